//! Genuine tripartite (GHZ-type) monotone for 2x2xn pure states.
//!
//! With `rho_AB = Phi M Phi^dagger`, the middle state is
//! `M = sqrt(M) Phi^T (sigma_y x sigma_y) Phi sqrt(M)` and
//! `E = N~ sum_{i != j} sqrt(s_i s_j)` over its singular values `s_i`.
//! The `s_i` coincide with the square roots of the eigenvalues of
//! `rho_AB rho~_AB`, the same numbers that enter Wootters' concurrence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, partial_trace_last, singular_values, spin_flip_operator, ComplexMatrix,
    SingularSpectrum, C64,
};
use crate::states::{DensityMatrix, TripartitePureState};
use crate::tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum TripartiteFrame {
    /// `N~ = 1`, so that `E(GHZ) = 1`.
    #[default]
    Raw,
    /// `N~ = 1/3`, so that `E = 1` on the (2, 2, 4) maximally entangled state.
    MaxTripartite,
    Custom(f64),
}

impl TripartiteFrame {
    pub fn constant(self) -> f64 {
        match self {
            TripartiteFrame::Raw => 1.0,
            TripartiteFrame::MaxTripartite => 1.0 / 3.0,
            TripartiteFrame::Custom(n) => n,
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            TripartiteFrame::Custom(n) if !(n.is_finite() && n > 0.0) => Err(
                Error::InvalidParameter(format!("frame constant must be positive, got {n}")),
            ),
            f => Ok(f),
        }
    }
}

impl std::str::FromStr for TripartiteFrame {
    type Err = Error;

    /// `raw` (alias `ghz`), `max` or `custom:<N>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let frame = match lower.split_once(':') {
            None if lower == "raw" || lower == "ghz" => TripartiteFrame::Raw,
            None if lower == "max" => TripartiteFrame::MaxTripartite,
            Some(("custom", n)) => TripartiteFrame::Custom(
                n.parse()
                    .map_err(|_| Error::Parse(format!("bad constant in frame `{s}`")))?,
            ),
            _ => {
                return Err(Error::Parse(format!(
                    "unknown tripartite frame `{s}` (raw, max, custom:<N>)"
                )))
            }
        };
        frame.validate()
    }
}

/// The unnormalized, complex-symmetric middle state.
#[derive(Debug, Clone)]
pub struct MMatrix {
    m: ComplexMatrix,
    /// Numerical rank of the `rho_AB` it was built from.
    support_rank: usize,
}

impl MMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn support_rank(&self) -> usize {
        self.support_rank
    }

    /// `max |M - M^T|`
    pub fn symmetry_defect(&self) -> f64 {
        self.m.max_abs_diff(&self.m.transpose())
    }

    /// Singular values; values past the support rank or below the
    /// separability threshold are exact zeros.
    pub fn spectrum(&self) -> Result<SingularSpectrum> {
        Ok(singular_values(&self.m)?
            .truncated(self.support_rank)
            .floored(tolerances::SEPARABILITY))
    }
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() == 4 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        })
    }
}

/// `(sigma_y x sigma_y) rho^* (sigma_y x sigma_y)`
pub fn spin_flip(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_two_qubit(rho)?;
    let y = spin_flip_operator();
    Ok(DensityMatrix::from_trusted(
        &(&y * &rho.matrix().conj()) * &y,
    ))
}

/// Eigendecomposition of `rho` with the eigenvalues outside the numerical
/// support set to zero. Returns the system and the support rank.
fn clamped_eig(rho: &DensityMatrix) -> Result<(crate::linalg::HermitianEigenSystem, usize)> {
    let mut eig = hermitian_eig(rho.matrix())?;
    crate::linalg::check_psd(&eig.eigenvalues)?;
    let mut rank = 0;
    for l in &mut eig.eigenvalues {
        if *l <= tolerances::RANK {
            *l = 0.0;
        } else {
            rank += 1;
        }
    }
    Ok((eig, rank))
}

pub fn m_matrix(rho: &DensityMatrix) -> Result<MMatrix> {
    require_two_qubit(rho)?;
    let (eig, rank) = clamped_eig(rho)?;
    let sqrt_m: Vec<f64> = eig.eigenvalues.iter().map(|l| l.sqrt()).collect();
    let sqrt_m = ComplexMatrix::from_real_diagonal(&sqrt_m);
    let phi = &eig.eigenvectors;
    let core = &(&phi.transpose() * &spin_flip_operator()) * phi;
    Ok(MMatrix {
        m: &(&sqrt_m * &core) * &sqrt_m,
        support_rank: rank,
    })
}

/// Spin-flip spectrum from the singular values of the middle state.
pub fn middle_state_spectrum(rho: &DensityMatrix) -> Result<SingularSpectrum> {
    m_matrix(rho)?.spectrum()
}

/// Spin-flip spectrum from the Hermitian product `sqrt(rho) rho~ sqrt(rho)`,
/// which is isospectral to `rho rho~`.
pub fn product_spectrum(rho: &DensityMatrix) -> Result<SingularSpectrum> {
    require_two_qubit(rho)?;
    let (eig, rank) = clamped_eig(rho)?;
    let root = eig.map_eigenvalues(|l| l.sqrt());
    let flipped = spin_flip(rho)?;
    let h = &(&root * flipped.matrix()) * &root;
    // Rounding leaves h Hermitian only to ~1e-17; symmetrize exactly.
    let h = (&h + &h.adjoint()).scale(0.5);
    let prod = hermitian_eig(&h)?;
    let sigma: Vec<f64> = prod.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    Ok(SingularSpectrum::new(sigma)?
        .truncated(rank)
        .floored(tolerances::SIGMA_FLOOR))
}

/// `psi^T (sigma_y x sigma_y) psi` for the 4 x n regrouped state: the n x n
/// complex-symmetric matrix seen from party C. A local operation `Q` on C maps
/// it to `Q X Q^T`.
pub fn c_side_matrix(s: &TripartitePureState) -> ComplexMatrix {
    let psi = s.regrouped();
    &(&psi.transpose() * &spin_flip_operator()) * &psi
}

/// Spin-flip spectrum from the C-side matrix, padded or cut to four values.
pub fn c_side_spectrum(s: &TripartitePureState) -> Result<SingularSpectrum> {
    let psi = s.regrouped();
    let psi_rank = singular_values(&psi)?
        .values()
        .iter()
        .filter(|v| **v * **v > tolerances::RANK)
        .count();
    let mut values = singular_values(&c_side_matrix(s))?.values().to_vec();
    values.resize(4.max(values.len()), 0.0);
    values.truncate(4);
    Ok(SingularSpectrum::new(values)?
        .truncated(psi_rank.min(4))
        .floored(tolerances::SEPARABILITY))
}

/// The four spin-flip singular values of `rho`, decreasing.
///
/// In debug builds the result is cross-checked against [`product_spectrum`].
pub fn sigma_spectrum(rho: &DensityMatrix) -> Result<SingularSpectrum> {
    let sigma = middle_state_spectrum(rho)?;
    #[cfg(debug_assertions)]
    {
        let other = product_spectrum(rho)?;
        for (a, b) in sigma.values().iter().zip(other.values()) {
            // The product route zeroes anything under its coarser floor.
            let tol = if *b == 0.0 {
                tolerances::SIGMA_FLOOR
            } else {
                tolerances::ROUTE_AGREEMENT
            };
            debug_assert!(
                (a - b).abs() <= tol,
                "spin-flip spectra disagree: {sigma:?} vs {other:?}"
            );
        }
    }
    Ok(sigma)
}

/// `N~ sum_{i != j} sqrt(s_i s_j)`, ordered pairs.
pub fn e_from_spectrum(sigma: &SingularSpectrum, frame: TripartiteFrame) -> Result<f64> {
    Ok(frame.validate()?.constant() * sigma.ordered_pair_cross_sum())
}

/// `N~ [ (sum_i sqrt(s_i))^2 - sum_i s_i ]`
pub fn e_schmidt_form(sigma: &SingularSpectrum, frame: TripartiteFrame) -> Result<f64> {
    let raw = (sigma.sqrt_sum_squared() - sigma.sum()).max(0.0);
    Ok(frame.validate()?.constant() * raw)
}

pub fn tripartite_e_from_rho(rho: &DensityMatrix, frame: TripartiteFrame) -> Result<f64> {
    e_from_spectrum(&sigma_spectrum(rho)?, frame)
}

pub fn tripartite_e(s: &TripartitePureState, frame: TripartiteFrame) -> Result<f64> {
    tripartite_e_from_rho(&partial_trace_last(s)?, frame)
}

/// Wootters concurrence `max(0, s_1 - s_2 - s_3 - s_4)`. Values below the
/// separability threshold are reported as zero.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let s = sigma_spectrum(rho)?;
    let v = s.values();
    let c = (v[0] - v[1] - v[2] - v[3]).clamp(0.0, 1.0);
    Ok(if c < tolerances::SEPARABILITY { 0.0 } else { c })
}

/// Tracing B out of a 4x4 `rho_AB` in the (00, 01, 10, 11) basis.
pub fn reduce_to_first_qubit(rho_ab: &DensityMatrix) -> Result<DensityMatrix> {
    require_two_qubit(rho_ab)?;
    let m = rho_ab.matrix();
    let r = ComplexMatrix::from_fn(2, 2, |i, k| {
        (0..2).map(|j| m.get(2 * i + j, 2 * k + j)).sum::<C64>()
    });
    Ok(DensityMatrix::from_trusted(r))
}

/// Residual tangle `C^2_{A(BC)} - C^2_{AB} - C^2_{AC}` for three qubits.
pub fn tangle(s: &TripartitePureState) -> Result<f64> {
    if s.n() != 2 {
        return Err(Error::WrongDimension(format!(
            "the residual tangle needs a qubit C (n = 2), got n = {}",
            s.n()
        )));
    }
    let rho_ab = partial_trace_last(s)?;
    let rho_ac = partial_trace_last(&s.swap_bc()?)?;
    let rho_a = reduce_to_first_qubit(&rho_ab)?;
    let a = rho_a.matrix();
    let det = (a.get(0, 0) * a.get(1, 1) - a.get(0, 1) * a.get(1, 0)).re;
    let c_ab = concurrence(&rho_ab)?;
    let c_ac = concurrence(&rho_ac)?;
    let tau = 4.0 * det - c_ab * c_ab - c_ac * c_ac;
    if tau < -tolerances::MONOTONICITY {
        return Err(Error::NumericalFailure(format!("negative tangle {tau:e}")));
    }
    Ok(tau.clamp(0.0, 1.0))
}
