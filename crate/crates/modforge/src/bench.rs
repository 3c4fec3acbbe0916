//! Model-generation latency: chain construction, kinematic model, URDF
//! document and XML text for random chains of a fixed dof.

use std::time::Instant;

use modforge_core::search::EnumerationSpec;
use modforge_core::urdf::generate_urdf;
use modforge_core::RobotModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::xml::write_xml;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no chain with {0} dof found in the enumeration")]
    NoChain(usize),
    #[error("sampled chain failed to build: {0}")]
    Build(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub samples: usize,
    pub dof: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

/// Samples `n` chains with exactly `dof` degrees of freedom uniformly from
/// `spec` and times each one end to end.
pub fn bench_generation(spec: &EnumerationSpec, dof: usize, n: usize, seed: u64) -> Result<BenchReport, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = spec.index_space();
    let mut times = Vec::with_capacity(n);
    let mut misses = 0usize;
    while times.len() < n {
        let index = rng.gen_range(0..space.max(1));
        if spec.rank_key(index).is_none_or(|k| k.joint_count != dof) {
            misses += 1;
            if misses > 1000 * n.max(1) && times.is_empty() {
                return Err(BenchError::NoChain(dof));
            }
            continue;
        }
        let modules = spec.decode(index).expect("key exists");
        let start = Instant::now();
        let a = spec.assembly(&modules).map_err(|e| BenchError::Build(e.to_string()))?;
        let model = RobotModel::from_assembly(&a).map_err(|e| BenchError::Build(e.to_string()))?;
        let doc = generate_urdf(&a, "robot").map_err(|e| BenchError::Build(e.to_string()))?;
        let xml = write_xml(&doc);
        std::hint::black_box((model.dof(), xml.len()));
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mean_ms = times.iter().sum::<f64>() / n.max(1) as f64;
    times.sort_by(f64::total_cmp);
    let pct = |p: f64| times.get(((times.len() as f64 - 1.0) * p).round() as usize).copied().unwrap_or(0.0);
    Ok(BenchReport { samples: n, dof, mean_ms, p50_ms: pct(0.5), p95_ms: pct(0.95), max_ms: pct(1.0) })
}
