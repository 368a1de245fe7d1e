//! Perspective reformulations with variable aggregation for symmetric
//! mixed-integer convex programs.
//!
//! A [`model::ProblemSpec`] groups identical subsystems into equivalence
//! classes. It can be compiled three ways:
//!
//! * [`perspective::compile_p0`]: one copy per member, unscaled constraint rows;
//! * [`perspective::compile_per`]: one copy per member, perspective rows;
//! * [`aggregation::compile_agg`]: one aggregated copy per class, with integer
//!   counts `Y ∈ {0..N}` and perspective rows scaled by `Y` and `N − Y`.
//!
//! The compiled [`model::ConicModel`]s are linear plus rotated second-order
//! cones. They are solved by [`solver::solve_relaxation`] and
//! [`bnb::solve_mip`]. The [`oracle`] module holds brute-force checks used by
//! the test suites.

pub mod aggregation;
pub mod bnb;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod perspective;
pub mod sep;
pub mod solver;
pub mod uc;

pub use error::{Error, Result};
pub use model::{
    BlockPair, BlockSet, ConicModel, ConvexQuadratic, CouplingRow, EquivClass, GlobalRow,
    OmegaSpec, ProblemSpec, Role, Sense, VarTag,
};

/// Version stamped into every JSON document and conic-text header.
pub const FORMAT_VERSION: u32 = 1;

/// Integer or continuous compilation of a formulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Integer,
    Relaxed,
}
