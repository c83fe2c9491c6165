//! Declarative musculoskeletal model files.
//!
//! A model file is JSON with a top-level `schema_version`. Loading parses the
//! text, checks the version, and validates every structural invariant; each
//! validation failure names the offending field path (e.g.
//! `links[3].name`). See `docs/model_format.md` for the key reference.

use std::collections::{HashMap, HashSet};
use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::muscle::CurveParams;

pub const SCHEMA_VERSION: u32 = 1;

/// Reserved link name for the inertial frame. Valid as a joint parent and as
/// a muscle via-point anchor; never as a declared link.
pub const WORLD: &str = "world";

const MASS_REL_TOL: f64 = 1e-6;
const AXIS_NORM_TOL: f64 = 1e-9;

static BUNDLED: &[(&str, &str)] = &[
    ("full_humanoid", include_str!("../fixtures/full_humanoid.json")),
    ("biped2d", include_str!("../fixtures/biped2d.json")),
    ("pendulum_muscle", include_str!("../fixtures/pendulum_muscle.json")),
];

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported schema_version {found} (this build reads version {supported})")]
    Version { found: String, supported: u32 },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unknown bundled model '{0}' (available: full_humanoid, biped2d, pendulum_muscle)")]
    UnknownBundled(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDesc {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub total_mass_kg: f64,
    pub links: Vec<LinkDesc>,
    pub joints: Vec<JointDesc>,
    #[serde(default)]
    pub muscles: Vec<MuscleDesc>,
    #[serde(default)]
    pub contact_points: Vec<ContactPointDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<CurveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locomotion: Option<LocomotionRoles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDesc {
    pub name: String,
    pub mass_kg: f64,
    /// Inertia about the link centre of mass, in link axes.
    pub inertia_kgm2: Inertia,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
}

/// A full tensor, or a scalar for planar models (expanded to `s·I₃`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Inertia {
    Scalar(f64),
    Tensor([[f64; 3]; 3]),
}

impl Inertia {
    pub fn matrix(&self) -> Matrix3<f64> {
        match self {
            Inertia::Scalar(s) => Matrix3::identity() * *s,
            Inertia::Tensor(t) => Matrix3::from_fn(|r, c| t[r][c]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    /// Capsule aligned with the link y axis; `length_m` excludes the caps.
    Capsule { radius_m: f64, length_m: f64 },
    Box { extents_m: [f64; 3] },
}

impl Geometry {
    /// Uniform-density inertia about the centroid. The capsule is
    /// approximated as a solid cylinder of length `length + 2r`.
    pub fn inertia(&self, mass: f64) -> Matrix3<f64> {
        match *self {
            Geometry::Box { extents_m: [x, y, z] } => Matrix3::from_diagonal(&nalgebra::Vector3::new(
                mass * (y * y + z * z) / 12.0,
                mass * (x * x + z * z) / 12.0,
                mass * (x * x + y * y) / 12.0,
            )),
            Geometry::Capsule { radius_m: r, length_m } => {
                let h = length_m + 2.0 * r;
                let transverse = mass * (3.0 * r * r + h * h) / 12.0;
                Matrix3::from_diagonal(&nalgebra::Vector3::new(transverse, 0.5 * mass * r * r, transverse))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointType {
    Free6,
    Planar3,
    Ball3,
    Revolute1,
}

impl JointType {
    pub fn ndof(self) -> usize {
        match self {
            JointType::Free6 => 6,
            JointType::Planar3 | JointType::Ball3 => 3,
            JointType::Revolute1 => 1,
        }
    }

    pub fn is_floating(self) -> bool {
        matches!(self, JointType::Free6 | JointType::Planar3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDesc {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: JointType,
    /// Parent link name, or `world` for the root joint.
    pub parent: String,
    pub child: String,
    /// Rotation axis in parent axes; required for `revolute1`, ignored otherwise.
    #[serde(default)]
    pub axis: Option<[f64; 3]>,
    /// One `[lo, hi]` pair per DOF, or null for an unlimited joint.
    #[serde(default)]
    pub limits_rad: Option<Vec<[f64; 2]>>,
    /// Joint centre in the parent link frame.
    pub parent_offset_m: [f64; 3],
    /// Joint centre in the child link frame (child frame origin is its COM).
    pub child_offset_m: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuscleDesc {
    pub name: String,
    pub f_max_n: f64,
    pub l_opt_m: f64,
    pub l_slack_m: f64,
    pub pennation_rad: f64,
    pub path: Vec<ViaPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViaPoint {
    pub link: String,
    pub offset_m: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactPointDesc {
    pub link: String,
    pub offset_m: [f64; 3],
    pub radius_m: f64,
}

/// Named links and DOFs the locomotion environment needs: which link is the
/// torso and pelvis, the per-leg hip/knee flexion DOFs used by the leg-lift
/// reset, the foot links, and left/right joint pairs for symmetric poses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocomotionRoles {
    pub torso: String,
    pub pelvis: String,
    pub left: LegRoles,
    pub right: LegRoles,
    #[serde(default)]
    pub mirror_pairs: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegRoles {
    pub hip: DofRef,
    pub knee: DofRef,
    pub foot_links: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DofRef {
    pub joint: String,
    pub dof: usize,
}

impl ModelDesc {
    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn link_mass_sum(&self) -> f64 {
        self.links.iter().map(|l| l.mass_kg).sum()
    }
}

/// Parses and validates a model file.
pub fn load_model(text: &str) -> Result<ModelDesc, ModelError> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
    match raw.get("schema_version") {
        None => return Err(invalid("schema_version", "missing")),
        Some(v) if v.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
        Some(v) => {
            return Err(ModelError::Version {
                found: v.to_string(),
                supported: SCHEMA_VERSION,
            })
        }
    }
    let desc: ModelDesc = serde_json::from_value(raw).map_err(|e| ModelError::Parse(e.to_string()))?;
    validate(&desc)?;
    Ok(desc)
}

pub fn load_model_file(path: &Path) -> Result<ModelDesc, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_model(&text)
}

pub fn serialize_model(model: &ModelDesc) -> String {
    let mut s = serde_json::to_string_pretty(model).expect("model serialization is infallible");
    s.push('\n');
    s
}

/// Total generalized DOF: free6 = 6, planar3 = ball3 = 3, revolute1 = 1.
pub fn dof_count(model: &ModelDesc) -> usize {
    model.joints.iter().map(|j| j.kind.ndof()).sum()
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled_text(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn bundled(name: &str) -> Result<ModelDesc, ModelError> {
    let text = bundled_text(name).ok_or_else(|| ModelError::UnknownBundled(name.to_string()))?;
    load_model(text)
}

/// A bundled model name, or otherwise a path to a model file.
pub fn resolve_model(name_or_path: &str) -> Result<ModelDesc, ModelError> {
    match bundled_text(name_or_path) {
        Some(text) => load_model(text),
        None => load_model_file(Path::new(name_or_path)),
    }
}

fn check_unique<'a>(field: &str, names: impl Iterator<Item = &'a str>) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    for (i, n) in names.enumerate() {
        if n.is_empty() {
            return Err(invalid(format!("{field}[{i}].name"), "empty name"));
        }
        if !seen.insert(n) {
            return Err(invalid(format!("{field}[{i}].name"), format!("duplicate name \"{n}\"")));
        }
    }
    Ok(())
}

fn finite3(path: &str, v: &[f64; 3]) -> Result<(), ModelError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(path, "non-finite component"))
    }
}

pub fn validate(desc: &ModelDesc) -> Result<(), ModelError> {
    if desc.schema_version != SCHEMA_VERSION {
        return Err(ModelError::Version {
            found: desc.schema_version.to_string(),
            supported: SCHEMA_VERSION,
        });
    }
    if desc.links.is_empty() {
        return Err(invalid("links", "a model needs at least one link"));
    }
    check_unique("links", desc.links.iter().map(|l| l.name.as_str()))?;
    check_unique("joints", desc.joints.iter().map(|j| j.name.as_str()))?;
    check_unique("muscles", desc.muscles.iter().map(|m| m.name.as_str()))?;

    let link_ix: HashMap<&str, usize> = desc.links.iter().enumerate().map(|(i, l)| (l.name.as_str(), i)).collect();

    for (i, link) in desc.links.iter().enumerate() {
        let p = format!("links[{i}]");
        if link.name == WORLD {
            return Err(invalid(format!("{p}.name"), "\"world\" is reserved"));
        }
        if !(link.mass_kg > 0.0 && link.mass_kg.is_finite()) {
            return Err(invalid(format!("{p}.mass_kg"), format!("must be > 0, got {}", link.mass_kg)));
        }
        let m = link.inertia_kgm2.matrix();
        if m.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!("{p}.inertia_kgm2"), "non-finite entry"));
        }
        if (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
            return Err(invalid(format!("{p}.inertia_kgm2"), "not symmetric"));
        }
        if m.cholesky().is_none() {
            return Err(invalid(format!("{p}.inertia_kgm2"), "not positive definite"));
        }
    }

    let total = desc.link_mass_sum();
    if !(desc.total_mass_kg > 0.0) || (total - desc.total_mass_kg).abs() > MASS_REL_TOL * desc.total_mass_kg {
        return Err(invalid(
            "total_mass_kg",
            format!("declared {} kg but links sum to {} kg", desc.total_mass_kg, total),
        ));
    }

    let mut parent_of: Vec<Option<usize>> = vec![None; desc.links.len()];
    let mut has_parent = vec![false; desc.links.len()];
    let mut roots = Vec::new();
    for (i, j) in desc.joints.iter().enumerate() {
        let p = format!("joints[{i}]");
        let child = *link_ix
            .get(j.child.as_str())
            .ok_or_else(|| invalid(format!("{p}.child"), format!("unknown link \"{}\"", j.child)))?;
        if has_parent[child] {
            return Err(invalid(
                format!("{p}.child"),
                format!("link \"{}\" already has a parent joint", j.child),
            ));
        }
        has_parent[child] = true;
        if j.parent == WORLD {
            roots.push(i);
        } else {
            let parent = *link_ix
                .get(j.parent.as_str())
                .ok_or_else(|| invalid(format!("{p}.parent"), format!("unknown link \"{}\"", j.parent)))?;
            if parent == child {
                return Err(invalid(format!("{p}.parent"), "joint connects a link to itself"));
            }
            parent_of[child] = Some(parent);
            if j.kind.is_floating() {
                return Err(invalid(format!("{p}.type"), "free6/planar3 joints are only allowed at the root"));
            }
        }
        if j.kind == JointType::Revolute1 {
            let axis = j
                .axis
                .ok_or_else(|| invalid(format!("{p}.axis"), "revolute1 requires an axis"))?;
            finite3(&format!("{p}.axis"), &axis)?;
            let n = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (n - 1.0).abs() > AXIS_NORM_TOL {
                return Err(invalid(format!("{p}.axis"), format!("must be unit length, norm is {n}")));
            }
        }
        if let Some(limits) = &j.limits_rad {
            if limits.len() != j.kind.ndof() {
                return Err(invalid(
                    format!("{p}.limits_rad"),
                    format!("expected {} [lo, hi] pairs, got {}", j.kind.ndof(), limits.len()),
                ));
            }
            for (k, [lo, hi]) in limits.iter().enumerate() {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(invalid(format!("{p}.limits_rad[{k}]"), format!("invalid range [{lo}, {hi}]")));
                }
            }
        }
        finite3(&format!("{p}.parent_offset_m"), &j.parent_offset_m)?;
        finite3(&format!("{p}.child_offset_m"), &j.child_offset_m)?;
    }
    match roots.len() {
        1 => {}
        0 => return Err(invalid("joints", "no root joint (parent \"world\")")),
        _ => {
            return Err(invalid(
                format!("joints[{}].parent", roots[1]),
                "more than one root joint",
            ))
        }
    }
    if let Some(i) = has_parent.iter().position(|h| !h) {
        return Err(invalid(format!("links[{i}]"), format!("link \"{}\" has no parent joint", desc.links[i].name)));
    }
    // Every link must reach the root without revisiting a link.
    for start in 0..desc.links.len() {
        let mut cur = start;
        let mut steps = 0;
        while let Some(p) = parent_of[cur] {
            cur = p;
            steps += 1;
            if steps > desc.links.len() {
                return Err(invalid(format!("links[{start}]"), "joint graph contains a cycle"));
            }
        }
    }

    for (i, m) in desc.muscles.iter().enumerate() {
        let p = format!("muscles[{i}]");
        if !(m.f_max_n > 0.0 && m.f_max_n.is_finite()) {
            return Err(invalid(format!("{p}.f_max_n"), "must be > 0"));
        }
        if !(m.l_opt_m > 0.0 && m.l_opt_m.is_finite()) {
            return Err(invalid(format!("{p}.l_opt_m"), "must be > 0"));
        }
        if !(m.l_slack_m >= 0.0 && m.l_slack_m.is_finite()) {
            return Err(invalid(format!("{p}.l_slack_m"), "must be >= 0"));
        }
        if !(m.pennation_rad >= 0.0 && m.pennation_rad < FRAC_PI_2) {
            return Err(invalid(format!("{p}.pennation_rad"), "must lie in [0, pi/2)"));
        }
        if m.path.len() < 2 {
            return Err(invalid(format!("{p}.path"), "needs at least 2 via-points"));
        }
        for (k, v) in m.path.iter().enumerate() {
            if v.link != WORLD && !link_ix.contains_key(v.link.as_str()) {
                return Err(invalid(format!("{p}.path[{k}].link"), format!("unknown link \"{}\"", v.link)));
            }
            finite3(&format!("{p}.path[{k}].offset_m"), &v.offset_m)?;
        }
        let distinct: HashSet<&str> = m.path.iter().map(|v| v.link.as_str()).collect();
        if distinct.len() < 2 {
            return Err(invalid(format!("{p}.path"), "must span at least 2 distinct links"));
        }
    }

    for (i, c) in desc.contact_points.iter().enumerate() {
        let p = format!("contact_points[{i}]");
        if !link_ix.contains_key(c.link.as_str()) {
            return Err(invalid(format!("{p}.link"), format!("unknown link \"{}\"", c.link)));
        }
        if !(c.radius_m >= 0.0 && c.radius_m.is_finite()) {
            return Err(invalid(format!("{p}.radius_m"), "must be >= 0"));
        }
        finite3(&format!("{p}.offset_m"), &c.offset_m)?;
    }

    if let Some(c) = &desc.curves {
        c.validate().map_err(|(field, msg)| invalid(format!("curves.{field}"), msg))?;
    }

    if let Some(roles) = &desc.locomotion {
        let link_ok = |path: String, name: &str| {
            if link_ix.contains_key(name) {
                Ok(())
            } else {
                Err(invalid(path, format!("unknown link \"{name}\"")))
            }
        };
        link_ok("locomotion.torso".into(), &roles.torso)?;
        link_ok("locomotion.pelvis".into(), &roles.pelvis)?;
        for (side, leg) in [("left", &roles.left), ("right", &roles.right)] {
            for (part, r) in [("hip", &leg.hip), ("knee", &leg.knee)] {
                let path = format!("locomotion.{side}.{part}");
                let j = desc
                    .joint_index(&r.joint)
                    .ok_or_else(|| invalid(format!("{path}.joint"), format!("unknown joint \"{}\"", r.joint)))?;
                if r.dof >= desc.joints[j].kind.ndof() {
                    return Err(invalid(format!("{path}.dof"), "DOF index out of range for joint"));
                }
            }
            if leg.foot_links.is_empty() {
                return Err(invalid(format!("locomotion.{side}.foot_links"), "empty"));
            }
            for (k, f) in leg.foot_links.iter().enumerate() {
                link_ok(format!("locomotion.{side}.foot_links[{k}]"), f)?;
            }
        }
        for (k, [a, b]) in roles.mirror_pairs.iter().enumerate() {
            let (ja, jb) = match (desc.joint_index(a), desc.joint_index(b)) {
                (Some(ja), Some(jb)) => (ja, jb),
                _ => return Err(invalid(format!("locomotion.mirror_pairs[{k}]"), "unknown joint")),
            };
            if desc.joints[ja].kind != desc.joints[jb].kind {
                return Err(invalid(format!("locomotion.mirror_pairs[{k}]"), "joint types differ"));
            }
        }
    }
    Ok(())
}
