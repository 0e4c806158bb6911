//! Entanglement monotones for bipartite and 2x2xn tripartite pure states.
//!
//! * [`bipartite`]: the Schmidt-sum monotone `E = N[(sum sqrt s_i)^2 - 1]`.
//! * [`tripartite`]: the genuine tripartite monotone built from the spin-flipped
//!   two-qubit reduced state, plus concurrence and the residual tangle.
//! * [`registry`]: named spectrum routes and measures, selectable at runtime.
//! * [`locc_fuzz`]: randomized checks that no local measurement increases a
//!   monotone on average.
//! * [`spinchain`]: the XY chain with three-spin interaction and its kinks.

pub mod bipartite;
pub mod cli;
pub mod error;
pub mod format;
pub mod io;
pub mod linalg;
pub mod locc_fuzz;
pub mod registry;
pub mod spinchain;
pub mod states;
pub mod tolerances;
pub mod tripartite;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SingularSpectrum, C64};
pub use states::{
    BipartitePureState, DensityMatrix, Party, PovmPair, PureState, RngSeed, StateShape,
    TripartitePureState,
};
