//! Runtime-selectable strategies.
//!
//! Two families live here, each behind a trait object and looked up by name:
//!
//! * [`SpectrumRoute`]: ways of obtaining the four spin-flip singular values of
//!   a 2x2xn pure state. They are mathematically identical and numerically
//!   independent, which is what makes them useful as cross-checks.
//! * [`Measure`]: entanglement quantities of a pure state, used by the CLI and
//!   by the LOCC fuzzer.

use crate::bipartite::{bipartite_e, BipartiteFrame};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace_last, SingularSpectrum};
use crate::states::{PureState, StateShape, TripartitePureState};
use crate::tripartite::{
    c_side_spectrum, e_from_spectrum, middle_state_spectrum, product_spectrum, tangle,
    TripartiteFrame,
};

pub trait SpectrumRoute: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn spectrum(&self, state: &TripartitePureState) -> Result<SingularSpectrum>;
}

/// Singular values of the middle state built from the eigenbasis of `rho_AB`.
pub struct MiddleStateSvd;

/// Square roots of the eigenvalues of `sqrt(rho) rho~ sqrt(rho)`.
pub struct HermitianProduct;

/// Singular values of `psi^T (sigma_y x sigma_y) psi` on party C.
pub struct CSideCongruence;

impl SpectrumRoute for MiddleStateSvd {
    fn name(&self) -> &'static str {
        "m-svd"
    }
    fn description(&self) -> &'static str {
        "SVD of the middle state sqrt(M) Phi^T YY Phi sqrt(M)"
    }
    fn spectrum(&self, state: &TripartitePureState) -> Result<SingularSpectrum> {
        middle_state_spectrum(&partial_trace_last(state)?)
    }
}

impl SpectrumRoute for HermitianProduct {
    fn name(&self) -> &'static str {
        "rho-product"
    }
    fn description(&self) -> &'static str {
        "sqrt of the eigenvalues of rho_AB times its spin flip"
    }
    fn spectrum(&self, state: &TripartitePureState) -> Result<SingularSpectrum> {
        product_spectrum(&partial_trace_last(state)?)
    }
}

impl SpectrumRoute for CSideCongruence {
    fn name(&self) -> &'static str {
        "c-side"
    }
    fn description(&self) -> &'static str {
        "SVD of the n x n symmetric matrix psi^T YY psi"
    }
    fn spectrum(&self, state: &TripartitePureState) -> Result<SingularSpectrum> {
        c_side_spectrum(state)
    }
}

pub fn spectrum_routes() -> Vec<Box<dyn SpectrumRoute>> {
    vec![
        Box::new(MiddleStateSvd),
        Box::new(HermitianProduct),
        Box::new(CSideCongruence),
    ]
}

pub fn spectrum_route(name: &str) -> Result<Box<dyn SpectrumRoute>> {
    spectrum_routes()
        .into_iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "spectrum route",
            name: name.to_string(),
            known: spectrum_routes()
                .iter()
                .map(|r| r.name())
                .collect::<Vec<_>>()
                .join(", "),
        })
}

pub trait Measure: Send + Sync {
    fn name(&self) -> &str;
    fn supports(&self, shape: StateShape) -> bool;
    fn evaluate(&self, state: &PureState) -> Result<f64>;
}

fn unsupported(measure: &str, shape: StateShape) -> Error {
    Error::WrongDimension(format!(
        "measure `{measure}` does not apply to shape {shape:?}"
    ))
}

pub struct BipartiteMonotone {
    pub frame: BipartiteFrame,
}

impl Measure for BipartiteMonotone {
    fn name(&self) -> &str {
        "bipartite-e"
    }
    fn supports(&self, shape: StateShape) -> bool {
        matches!(shape, StateShape::Bipartite(..))
    }
    fn evaluate(&self, state: &PureState) -> Result<f64> {
        match state {
            PureState::Bipartite(s) => bipartite_e(s, self.frame),
            other => Err(unsupported(self.name(), other.shape())),
        }
    }
}

pub struct TripartiteMonotone {
    pub frame: TripartiteFrame,
    pub route: Box<dyn SpectrumRoute>,
}

impl Measure for TripartiteMonotone {
    fn name(&self) -> &str {
        "tripartite-e"
    }
    fn supports(&self, shape: StateShape) -> bool {
        matches!(shape, StateShape::Tripartite(_))
    }
    fn evaluate(&self, state: &PureState) -> Result<f64> {
        match state {
            PureState::Tripartite(s) => e_from_spectrum(&self.route.spectrum(s)?, self.frame),
            other => Err(unsupported(self.name(), other.shape())),
        }
    }
}

pub struct ResidualTangle;

impl Measure for ResidualTangle {
    fn name(&self) -> &str {
        "tangle"
    }
    fn supports(&self, shape: StateShape) -> bool {
        shape == StateShape::Tripartite(2)
    }
    fn evaluate(&self, state: &PureState) -> Result<f64> {
        match state {
            PureState::Tripartite(s) => tangle(s),
            other => Err(unsupported(self.name(), other.shape())),
        }
    }
}

pub const MEASURE_NAMES: [&str; 3] = ["bipartite-e", "tripartite-e", "tangle"];

/// Builds a measure by name. `frame` is parsed according to the measure
/// (`raw` when absent); `route` only applies to `tripartite-e`.
pub fn measure(name: &str, frame: Option<&str>, route: Option<&str>) -> Result<Box<dyn Measure>> {
    let frame = frame.unwrap_or("raw");
    match name {
        "bipartite-e" => Ok(Box::new(BipartiteMonotone {
            frame: frame.parse()?,
        })),
        "tripartite-e" => Ok(Box::new(TripartiteMonotone {
            frame: frame.parse()?,
            route: spectrum_route(route.unwrap_or("m-svd"))?,
        })),
        "tangle" => Ok(Box::new(ResidualTangle)),
        _ => Err(Error::UnknownName {
            kind: "measure",
            name: name.to_string(),
            known: MEASURE_NAMES.join(", "),
        }),
    }
}

/// The natural monotone for a shape.
pub fn default_measure_name(shape: StateShape) -> &'static str {
    match shape {
        StateShape::Bipartite(..) => "bipartite-e",
        StateShape::Tripartite(_) => "tripartite-e",
    }
}
