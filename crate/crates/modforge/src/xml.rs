//! URDF XML serialization and an independent reader.
//!
//! Numbers are written with 12 significant digits in `%g` style; origins as
//! `xyz` plus fixed-axis `rpy`. Output is UTF-8 with LF endings and two-space
//! indentation.

use std::fmt::Write as _;

use modforge_core::geometry::{Mat3, Transform, Vec3};
use modforge_core::module_model::{JointKind, JointLimits, Shape};
use modforge_core::urdf::{UrdfDocument, UrdfError, UrdfGeometry, UrdfInertial, UrdfJoint, UrdfLink};
use roxmltree::Node;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UrdfReadError {
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("root element must be <robot>, found <{0}>")]
    NotARobot(String),
    #[error("<{element}> is missing attribute '{attribute}'")]
    MissingAttribute { element: String, attribute: String },
    #[error("<{element}> is missing child <{child}>")]
    MissingElement { element: String, child: String },
    #[error("attribute '{attribute}' of <{element}>: cannot read '{value}' as {expected}")]
    BadValue { element: String, attribute: String, value: String, expected: &'static str },
    #[error("joint '{joint}' has unsupported type '{kind}'")]
    UnsupportedKind { joint: String, kind: String },
    #[error("<geometry> must hold exactly one box, cylinder, sphere or mesh")]
    BadGeometry,
    #[error(transparent)]
    Structure(#[from] UrdfError),
}

/// `%.12g`: 12 significant digits, trailing zeros trimmed, exponent form
/// outside `[1e-5, 1e12)`. Negative zero prints as `0`.
pub fn format_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| format_g(x)).collect::<Vec<_>>().join(" ")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn origin(out: &mut String, indent: &str, t: &Transform) {
    let p = t.translation();
    let _ = writeln!(out, r#"{indent}<origin xyz="{}" rpy="{}"/>"#, join(&p.to_array()), join(&t.to_rpy()));
}

fn geometry(out: &mut String, tag: &str, g: &UrdfGeometry) {
    let _ = writeln!(out, "    <{tag}>");
    origin(out, "      ", &g.origin);
    out.push_str("      <geometry>\n");
    let _ = match &g.shape {
        Shape::Box { size } => writeln!(out, r#"        <box size="{}"/>"#, join(&size.to_array())),
        Shape::Cylinder { radius, length } => {
            writeln!(out, r#"        <cylinder radius="{}" length="{}"/>"#, format_g(*radius), format_g(*length))
        }
        Shape::Sphere { radius } => writeln!(out, r#"        <sphere radius="{}"/>"#, format_g(*radius)),
        Shape::Mesh { path } => writeln!(out, r#"        <mesh filename="{}"/>"#, escape(path)),
    };
    out.push_str("      </geometry>\n");
    let _ = writeln!(out, "    </{tag}>");
}

/// Serializes `doc`; byte-identical for equal documents.
pub fn write_xml(doc: &UrdfDocument) -> String {
    let mut out = String::with_capacity(512 + 600 * (doc.links.len() + doc.joints.len()));
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, r#"<robot name="{}">"#, escape(&doc.name));
    for l in &doc.links {
        let _ = writeln!(out, r#"  <link name="{}">"#, escape(&l.name));
        if let Some(i) = &l.inertial {
            out.push_str("    <inertial>\n");
            origin(&mut out, "      ", &i.origin);
            let _ = writeln!(out, r#"      <mass value="{}"/>"#, format_g(i.mass));
            let m = &i.tensor.0;
            let _ = writeln!(
                out,
                r#"      <inertia ixx="{}" ixy="{}" ixz="{}" iyy="{}" iyz="{}" izz="{}"/>"#,
                format_g(m[0][0]),
                format_g(m[0][1]),
                format_g(m[0][2]),
                format_g(m[1][1]),
                format_g(m[1][2]),
                format_g(m[2][2])
            );
            out.push_str("    </inertial>\n");
        }
        if let Some(g) = &l.visual {
            geometry(&mut out, "visual", g);
        }
        if let Some(g) = &l.collision {
            geometry(&mut out, "collision", g);
        }
        out.push_str("  </link>\n");
    }
    for j in &doc.joints {
        let _ = writeln!(out, r#"  <joint name="{}" type="{}">"#, escape(&j.name), j.kind.as_str());
        let _ = writeln!(out, r#"    <parent link="{}"/>"#, escape(&j.parent));
        let _ = writeln!(out, r#"    <child link="{}"/>"#, escape(&j.child));
        origin(&mut out, "    ", &j.origin);
        let _ = writeln!(out, r#"    <axis xyz="{}"/>"#, join(&j.axis.to_array()));
        if let Some(l) = &j.limits {
            let _ = writeln!(
                out,
                r#"    <limit lower="{}" upper="{}" velocity="{}" effort="{}"/>"#,
                format_g(l.lower),
                format_g(l.upper),
                format_g(l.velocity),
                format_g(l.effort)
            );
        }
        out.push_str("  </joint>\n");
    }
    out.push_str("</robot>\n");
    out
}

fn attr<'a>(n: Node<'a, '_>, name: &str) -> Result<&'a str, UrdfReadError> {
    n.attribute(name).ok_or_else(|| UrdfReadError::MissingAttribute { element: n.tag_name().name().into(), attribute: name.into() })
}

fn bad(n: Node, attribute: &str, value: &str, expected: &'static str) -> UrdfReadError {
    UrdfReadError::BadValue { element: n.tag_name().name().into(), attribute: attribute.into(), value: value.into(), expected }
}

fn number(n: Node, name: &str) -> Result<f64, UrdfReadError> {
    let s = attr(n, name)?;
    s.trim().parse().map_err(|_| bad(n, name, s, "a number"))
}

fn number_or(n: Node, name: &str, default: f64) -> Result<f64, UrdfReadError> {
    match n.attribute(name) {
        Some(_) => number(n, name),
        None => Ok(default),
    }
}

fn triple(n: Node, name: &str, default: Option<[f64; 3]>) -> Result<[f64; 3], UrdfReadError> {
    let Some(s) = n.attribute(name) else {
        return default.ok_or_else(|| UrdfReadError::MissingAttribute { element: n.tag_name().name().into(), attribute: name.into() });
    };
    let parts: Vec<f64> = s.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| bad(n, name, s, "three numbers"))?;
    <[f64; 3]>::try_from(parts).map_err(|_| bad(n, name, s, "three numbers"))
}

fn child<'a, 'i>(n: Node<'a, 'i>, tag: &str) -> Option<Node<'a, 'i>> {
    n.children().find(|c| c.is_element() && c.has_tag_name(tag))
}

fn required<'a, 'i>(n: Node<'a, 'i>, tag: &str) -> Result<Node<'a, 'i>, UrdfReadError> {
    child(n, tag).ok_or_else(|| UrdfReadError::MissingElement { element: n.tag_name().name().into(), child: tag.into() })
}

/// Missing `<origin>` or missing attributes mean zero.
fn read_origin(parent: Node) -> Result<Transform, UrdfReadError> {
    let Some(o) = child(parent, "origin") else { return Ok(Transform::identity()) };
    let xyz = triple(o, "xyz", Some([0.0; 3]))?;
    let [r, p, y] = triple(o, "rpy", Some([0.0; 3]))?;
    Ok(Transform::from_rpy(r, p, y).with_translation(Vec3::from_array(xyz)))
}

fn read_geometry(n: Node) -> Result<UrdfGeometry, UrdfReadError> {
    let g = required(n, "geometry")?;
    let mut shapes = g.children().filter(Node::is_element);
    let (Some(s), None) = (shapes.next(), shapes.next()) else { return Err(UrdfReadError::BadGeometry) };
    let shape = match s.tag_name().name() {
        "box" => Shape::Box { size: Vec3::from_array(triple(s, "size", None)?) },
        "cylinder" => Shape::Cylinder { radius: number(s, "radius")?, length: number(s, "length")? },
        "sphere" => Shape::Sphere { radius: number(s, "radius")? },
        "mesh" => Shape::Mesh { path: attr(s, "filename")?.into() },
        _ => return Err(UrdfReadError::BadGeometry),
    };
    Ok(UrdfGeometry { origin: read_origin(n)?, shape })
}

fn read_link(n: Node) -> Result<UrdfLink, UrdfReadError> {
    let inertial = match child(n, "inertial") {
        None => None,
        Some(i) => {
            let t = required(i, "inertia")?;
            let v = |a: &str| number_or(t, a, 0.0);
            let (ixx, ixy, ixz, iyy, iyz, izz) = (v("ixx")?, v("ixy")?, v("ixz")?, v("iyy")?, v("iyz")?, v("izz")?);
            Some(UrdfInertial {
                origin: read_origin(i)?,
                mass: number(required(i, "mass")?, "value")?,
                tensor: Mat3([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]]),
            })
        }
    };
    Ok(UrdfLink {
        name: attr(n, "name")?.into(),
        inertial,
        visual: child(n, "visual").map(read_geometry).transpose()?,
        collision: child(n, "collision").map(read_geometry).transpose()?,
    })
}

fn read_joint(n: Node) -> Result<UrdfJoint, UrdfReadError> {
    let name = attr(n, "name")?;
    let kind_str = attr(n, "type")?;
    let kind = JointKind::parse(kind_str).ok_or_else(|| UrdfReadError::UnsupportedKind { joint: name.into(), kind: kind_str.into() })?;
    let axis = match child(n, "axis") {
        Some(a) => Vec3::from_array(triple(a, "xyz", Some([1.0, 0.0, 0.0]))?),
        None => Vec3::X,
    };
    let limits = match (kind, child(n, "limit")) {
        (JointKind::Fixed, _) => None,
        (_, None) => return Err(UrdfReadError::MissingElement { element: "joint".into(), child: "limit".into() }),
        (_, Some(l)) => Some(JointLimits {
            lower: number_or(l, "lower", 0.0)?,
            upper: number_or(l, "upper", 0.0)?,
            velocity: number(l, "velocity")?,
            effort: number(l, "effort")?,
        }),
    };
    Ok(UrdfJoint {
        name: name.into(),
        kind,
        parent: attr(required(n, "parent")?, "link")?.into(),
        child: attr(required(n, "child")?, "link")?.into(),
        origin: read_origin(n)?,
        axis,
        limits,
    })
}

/// Reads links, revolute/prismatic/fixed joints, origins, axes, limits,
/// inertials and primitive or mesh geometry, then checks the tree shape.
pub fn read_urdf(text: &str) -> Result<UrdfDocument, UrdfReadError> {
    let xml = roxmltree::Document::parse(text)?;
    let robot = xml.root_element();
    if !robot.has_tag_name("robot") {
        return Err(UrdfReadError::NotARobot(robot.tag_name().name().into()));
    }
    let mut doc = UrdfDocument { name: attr(robot, "name")?.into(), links: vec![], joints: vec![] };
    for n in robot.children().filter(Node::is_element) {
        match n.tag_name().name() {
            "link" => doc.links.push(read_link(n)?),
            "joint" => doc.joints.push(read_joint(n)?),
            other => log::debug!("ignoring <{other}>"),
        }
    }
    doc.validate()?;
    Ok(doc)
}
