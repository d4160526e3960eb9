//! Covariant (de Donder–Weyl) Hamiltonian dynamics of scalar, tensor,
//! electromagnetic and Dirac fields driven by prescribed point particles.
//!
//! Fields are expanded over a discrete grid of on-shell wave vectors. Each
//! mode carries plane-wave coefficients evolved from the particle sources,
//! from which the field, its canonical variables, the generator J and the
//! covariant Poisson bracket are built.

pub mod brackets;
pub mod canonical;
pub mod error;
pub mod field;
pub mod kinematics;
pub mod modes;
pub mod quadrature;

pub use num_complex::Complex64 as C64;

pub use brackets::{
    canonical_pair_bracket, dw_conservation_check, jacobi_defect, poisson_bracket, Observable, PoissonStructure,
};
pub use canonical::{
    canonical_j, dw_image_j, from_canonical, to_canonical, CanonicalGauge, CanonicalPair, CanonicalSector,
};
pub use error::{BracketError, CanonicalError, DynamicsError, FieldError, KinematicsError};
pub use field::{DiracCoupling, DiracSpinor, FieldKind, FieldSpec, Mat4};
pub use kinematics::{Coupling, FourVector, GridConfig, GridShape, Mode, ModeGrid, Trajectory, Worldline};
pub use modes::{AmplitudePair, Branch, EvolveConfig, ModeTrajectory, SpectralWindow};
