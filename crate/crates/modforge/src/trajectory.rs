//! Trajectory export for external playback.

use std::io::Write;

use modforge_core::Trajectory;

/// One row per configuration under the header `t,q0,…,q{n-1}`, where
/// `t = k · dt`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dof = traj.configurations.first().map_or(0, Vec::len);
    let header = std::iter::once("t".to_string()).chain((0..dof).map(|i| format!("q{i}")));
    w.write_record(header)?;
    for (k, q) in traj.configurations.iter().enumerate() {
        let row = std::iter::once(k as f64 * traj.dt).chain(q.iter().copied());
        w.write_record(row.map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use modforge_core::kinematics::linear_trajectory;

    #[test]
    fn header_and_rows() {
        let traj = linear_trajectory(&[0.0, 1.0], &[1.0, 0.0], 2, 0.5).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(r.headers().unwrap(), vec!["t", "q0", "q1"]);
        let rows: Vec<Vec<f64>> = r.records().map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), traj.len());
        assert_eq!(rows[0], [0.0, 0.0, 1.0]);
        assert_eq!(*rows.last().unwrap(), [0.5 * (traj.len() - 1) as f64, 1.0, 0.0]);
    }
}
