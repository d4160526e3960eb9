use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("mass parameter must be non-negative, got {0}")]
    NegativeKappa(f64),
    #[error("massless zero mode has a singular 1/(2k0) measure")]
    ZeroMode,
    #[error("invalid mode grid: {0}")]
    InvalidGrid(String),
    #[error("grid would hold {requested} cells, budget is {budget}")]
    ModeBudget { requested: usize, budget: usize },
    #[error("worldline {label}: {msg}")]
    InvalidWorldline { label: usize, msg: String },
    #[error("worldline {label} does not reach coordinate time {x0}")]
    OutOfRange { label: usize, x0: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field invariant violated for `{field}`: {msg}")]
    Invariant { field: &'static str, msg: String },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("tensor rank {0} exceeds the supported maximum")]
    RankTooLarge(usize),
    #[error("k is off the mass shell by {0}")]
    OffShell(f64),
    #[error("massless spinor projector is undefined")]
    MasslessSpinor,
    #[error("worldline {label} coupling does not match the field kind")]
    CouplingKind { label: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("mode {mode} at x0 = {x0}: {source}")]
    ModeContext { mode: usize, x0: f64, source: Box<DynamicsError> },
    #[error("invalid time window: {0}")]
    InvalidWindow(String),
    #[error("x0 = {0} is not a recorded sample")]
    NotSampled(f64),
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("amplitude layout does not match the field kind")]
    Layout,
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("point {distance} from worldline {label} is inside the exclusion radius")]
    Excluded { label: usize, distance: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CanonicalError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("gauge parameter invalid: {0}")]
    Gauge(String),
    #[error("momentum component {component} is not proportional to k (defect {defect:e})")]
    RankOneViolation { component: usize, defect: f64 },
    #[error("canonical layout does not match the field kind")]
    Layout,
    #[error("configuration: {0}")]
    Config(String),
    #[error("need recorded neighbours around sample {0}")]
    Stencil(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BracketError {
    #[error("gradient has {got} entries, state has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("wave vector is not a grid mode")]
    OffGrid,
    #[error("brackets are implemented for rank 0 and 1 only, got {0}")]
    Rank(usize),
    #[error("brackets are not defined for spinor fields")]
    Spinor,
    #[error("bracket vector V must be finite")]
    InvalidVector,
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
}
