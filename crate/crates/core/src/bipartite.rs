//! Bipartite pure-state monotone `E = N [ (sum_i sqrt(s_i))^2 - 1 ]`, where
//! `s_i` are the Schmidt coefficients (singular values of `psi_AB`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{singular_values, SingularSpectrum};
use crate::states::{BipartitePureState, Party, PovmPair};
use crate::tolerances;

/// Normalization constant `N` of the bipartite monotone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum BipartiteFrame {
    /// `N = 1`
    #[default]
    Raw,
    /// `E = 1` on two-qubit Bell states.
    Bell,
    /// `E = 1` on `D`-dimensional maximally entangled states.
    MaxD(usize),
    Custom(f64),
}

impl BipartiteFrame {
    pub fn validate(self) -> Result<Self> {
        match self {
            BipartiteFrame::MaxD(d) if d < 2 => Err(Error::InvalidParameter(format!(
                "maximally entangled frame needs D >= 2, got {d}"
            ))),
            BipartiteFrame::Custom(n) if !(n.is_finite() && n > 0.0) => Err(
                Error::InvalidParameter(format!("frame constant must be positive, got {n}")),
            ),
            f => Ok(f),
        }
    }
}

impl std::str::FromStr for BipartiteFrame {
    type Err = Error;

    /// `raw`, `bell`, `maxd:<D>` or `custom:<N>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let frame = match lower.split_once(':') {
            None if lower == "raw" => BipartiteFrame::Raw,
            None if lower == "bell" => BipartiteFrame::Bell,
            Some(("maxd", d)) => BipartiteFrame::MaxD(
                d.parse()
                    .map_err(|_| Error::Parse(format!("bad dimension in frame `{s}`")))?,
            ),
            Some(("custom", n)) => BipartiteFrame::Custom(
                n.parse()
                    .map_err(|_| Error::Parse(format!("bad constant in frame `{s}`")))?,
            ),
            _ => {
                return Err(Error::Parse(format!(
                    "unknown bipartite frame `{s}` (raw, bell, maxd:<D>, custom:<N>)"
                )))
            }
        };
        frame.validate()
    }
}

/// The constant `N` for a frame.
pub fn frame_constant(frame: BipartiteFrame) -> f64 {
    match frame {
        BipartiteFrame::Raw => 1.0,
        BipartiteFrame::Bell => (2.0 * 2f64.sqrt() + 1.0) / 7.0,
        BipartiteFrame::MaxD(d) => {
            let d = d as f64;
            (d * d.sqrt() + 1.0) / (d * d * d - 1.0)
        }
        BipartiteFrame::Custom(n) => n,
    }
}

/// Schmidt coefficients, with values under the separability threshold zeroed.
pub fn schmidt_coefficients(s: &BipartitePureState) -> Result<SingularSpectrum> {
    Ok(singular_values(s.psi())?.floored(tolerances::SEPARABILITY))
}

/// `(sum_i sqrt(s_i))^2`, in `[1, D sqrt D]` for a normalized state.
pub fn schmidt_sum(s: &BipartitePureState) -> Result<f64> {
    Ok(schmidt_coefficients(s)?.sqrt_sum_squared())
}

pub fn bipartite_e(s: &BipartitePureState, frame: BipartiteFrame) -> Result<f64> {
    let n = frame_constant(frame.validate()?);
    Ok(n * (schmidt_sum(s)? - 1.0).max(0.0))
}

/// Product state iff the second Schmidt coefficient vanishes.
pub fn is_separable(s: &BipartitePureState) -> Result<bool> {
    Ok(schmidt_coefficients(s)?
        .values()
        .get(1)
        .is_none_or(|&v| v == 0.0))
}

/// One outcome of a local measurement: probability and normalized post-state.
#[derive(Debug, Clone)]
pub struct Branch<S> {
    pub probability: f64,
    pub state: S,
}

/// Applies both POVM elements on `party`; branches with negligible weight are dropped.
pub fn measure_bipartite(
    s: &BipartitePureState,
    p: &PovmPair,
    party: Party,
) -> Result<Vec<Branch<BipartitePureState>>> {
    let (n1, n2) = s.shape();
    let expected = match party {
        Party::A => n1,
        Party::B => n2,
        Party::C => {
            return Err(Error::InvalidParameter(
                "a bipartite state has no party C".into(),
            ))
        }
    };
    if p.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: p.dim(),
        });
    }
    let mut out = Vec::with_capacity(2);
    for a in p.elements() {
        let theta = match party {
            Party::A => a * s.psi(),
            _ => s.psi() * &a.transpose(),
        };
        let prob = theta.frobenius_norm().powi(2);
        if prob < tolerances::BRANCH_PROBABILITY {
            continue;
        }
        out.push(Branch {
            probability: prob,
            state: BipartitePureState::from_matrix(theta)?,
        });
    }
    Ok(out)
}

/// `(sum_i p_i E(branch_i), E(s))`.
pub fn average_e_after_povm(
    s: &BipartitePureState,
    p: &PovmPair,
    party: Party,
    frame: BipartiteFrame,
) -> Result<(f64, f64)> {
    let before = bipartite_e(s, frame)?;
    let mut avg = 0.0;
    for b in measure_bipartite(s, p, party)? {
        avg += b.probability * bipartite_e(&b.state, frame)?;
    }
    Ok((avg, before))
}
