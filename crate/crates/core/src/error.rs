use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("non-positive dimension `{name}` = {value}")]
    NonPositiveDimension { name: &'static str, value: f64 },
    #[error("degenerate profile: enclosed area is zero")]
    DegenerateProfile,
    #[error("mesh is not watertight: {0} boundary or non-manifold edges")]
    OpenMesh(usize),
    #[error("voxel grid divisions must be at least 10, got {0}")]
    TooFewDivisions(usize),
    #[error("at least {min} surface nodes required, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("refinement level {0} outside [0, 8]")]
    RefinementLevel(usize),
    #[error("quaternion norm {0} is not unit")]
    NonUnitQuaternion(f64),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite state at step {step}: particle {particle}")]
    NonFinite { step: u64, particle: usize },
    #[error("impact angle {0} deg outside [0, 90]")]
    ImpactAngle(f64),
    #[error("contact did not release within {0} steps")]
    ContactNotReleased(u64),
    #[error("particle {0} escaped the container")]
    Escaped(usize),
    #[error("drum bed not steady within the step budget")]
    NotSteady,
    #[error("packing batch did not settle by t = {0} s")]
    NotSettled(f64),
    #[error("need at least two distinct x positions for a line fit")]
    VerticalFit,
    #[error("empty bed")]
    EmptyBed,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
