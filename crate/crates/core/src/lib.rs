//! Spectral/finite-difference solver for the primitive equations of ocean
//! dynamics on a horizontally periodic box `(0,1)² × (−h, 0)`.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod forcing;
pub mod grid;
pub mod hydrostatic;
pub mod model;
pub mod nonlinear;
pub mod norms;
pub mod profiles;
pub mod semigroup;
pub mod solver;
pub mod spectral;
pub mod vertical;

pub use error::{Error, Result};
pub use forcing::{Envelope, Forcing, ForcingTerm};
pub use field::{HVectorField, ScalarField, SurfaceScalarField};
pub use grid::{FieldKind, Grid, PhysParams};
pub use model::Model;
pub use semigroup::SemigroupCache;
pub use solver::{State, Trajectory};
pub use diagnostics::DiagnosticsRecord;
pub use spectral::{Axis, Spectral, SpectrumField};
pub use vertical::VerticalOperator;
