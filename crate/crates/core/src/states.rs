//! Pure states, density matrices and two-outcome POVMs, plus seeded sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eig, ComplexMatrix, C64};
use crate::tolerances;

/// Seed for every random draw in the crate. There is no global RNG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent stream for sub-task `index`, e.g. one fuzz trial.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

/// Coefficient matrix `psi_AB` of a bipartite pure state, unit Frobenius norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitePureState {
    psi: ComplexMatrix,
}

impl BipartitePureState {
    /// Normalizes `m`; a zero matrix is rejected.
    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return Err(Error::InvalidParameter("empty coefficient matrix".into()));
        }
        let norm = m.frobenius_norm();
        if norm < tolerances::ZERO_NORM {
            return Err(Error::ZeroState);
        }
        Ok(Self {
            psi: m.scale(1.0 / norm),
        })
    }

    pub fn psi(&self) -> &ComplexMatrix {
        &self.psi
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.psi
    }

    /// `(n1, n2)`
    pub fn shape(&self) -> (usize, usize) {
        (self.psi.rows(), self.psi.cols())
    }

    /// Exchanges the roles of A and B.
    pub fn swap_parties(&self) -> Self {
        Self {
            psi: self.psi.transpose(),
        }
    }

    /// `rho_A = psi psi^dagger`
    pub fn reduced_a(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(&self.psi * &self.psi.adjoint())
    }
}

/// Amplitudes `a_ijk` of a 2x2xn pure state, stored at `(2i + j) * n + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartitePureState {
    amplitudes: Vec<C64>,
    n: usize,
}

impl TripartitePureState {
    /// From `a[i][j][k]`; every innermost vector must have the same length `n >= 1`.
    pub fn from_tensor(a: &[[Vec<C64>; 2]; 2]) -> Result<Self> {
        let n = a[0][0].len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "party C needs dimension >= 1".into(),
            ));
        }
        let mut amplitudes = Vec::with_capacity(4 * n);
        for row in a {
            for fiber in row {
                if fiber.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: fiber.len(),
                    });
                }
                amplitudes.extend_from_slice(fiber);
            }
        }
        Self::from_flat(amplitudes, n)
    }

    /// From amplitudes in `(2i + j) * n + k` order, normalizing.
    pub fn from_flat(amplitudes: Vec<C64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "party C needs dimension >= 1".into(),
            ));
        }
        if amplitudes.len() != 4 * n {
            return Err(Error::DimensionMismatch {
                expected: 4 * n,
                found: amplitudes.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < tolerances::ZERO_NORM {
            return Err(Error::ZeroState);
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
            n,
        })
    }

    /// Rows indexed by `2i + j`, columns by `k`.
    pub fn from_regrouped(m: &ComplexMatrix) -> Result<Self> {
        if m.rows() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: m.rows(),
            });
        }
        Self::from_flat(m.to_row_major(), m.cols())
    }

    /// `(|000> + |111>) / sqrt 2`
    pub fn ghz() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = vec![C64::ZERO; 8];
        a[0] = c64(h, 0.0);
        a[7] = c64(h, 0.0);
        Self {
            amplitudes: a,
            n: 2,
        }
    }

    /// `(|000> + |011> + |102> + |113>) / 2`, local ranks (2, 2, 4).
    pub fn psi_max() -> Self {
        let mut a = vec![C64::ZERO; 16];
        for (ab, k) in [(0, 0), (1, 1), (2, 2), (3, 3)] {
            a[ab * 4 + k] = c64(0.5, 0.0);
        }
        Self {
            amplitudes: a,
            n: 4,
        }
    }

    /// `(|001> + |010> + |100>) / sqrt 3`
    pub fn w() -> Self {
        let t = 1.0 / 3f64.sqrt();
        let mut a = vec![C64::ZERO; 8];
        for idx in [0b001, 0b010, 0b100] {
            a[idx] = c64(t, 0.0);
        }
        Self {
            amplitudes: a,
            n: 2,
        }
    }

    /// `|phi>_AB (x) |chi>_C`
    pub fn product_ab_c(phi: &[C64; 4], chi: &[C64]) -> Result<Self> {
        let n = chi.len();
        let mut a = Vec::with_capacity(4 * n);
        for p in phi {
            for c in chi {
                a.push(p * c);
            }
        }
        Self::from_flat(a, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitude(&self, i: usize, j: usize, k: usize) -> C64 {
        self.amplitudes[(2 * i + j) * self.n + k]
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `sum a_ijk^* b_ijk`. Panics if the C dimensions differ.
    pub fn overlap(&self, other: &Self) -> C64 {
        assert_eq!(self.n, other.n, "C dimensions differ");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// The same state seen as a 4 x n bipartite (AB | C) coefficient matrix.
    pub fn regrouped(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(4, self.n, |r, k| self.amplitudes[r * self.n + k])
    }

    /// Exchanges parties A and B.
    pub fn swap_ab(&self) -> Self {
        let mut a = vec![C64::ZERO; 4 * self.n];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..self.n {
                    a[(2 * j + i) * self.n + k] = self.amplitude(i, j, k);
                }
            }
        }
        Self {
            amplitudes: a,
            n: self.n,
        }
    }

    /// Exchanges parties B and C; only defined for qubit C.
    pub fn swap_bc(&self) -> Result<Self> {
        if self.n != 2 {
            return Err(Error::WrongDimension(format!(
                "swapping B and C needs n = 2, got n = {}",
                self.n
            )));
        }
        let mut a = vec![C64::ZERO; 8];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    a[(2 * i + k) * 2 + j] = self.amplitude(i, j, k);
                }
            }
        }
        Ok(Self {
            amplitudes: a,
            n: 2,
        })
    }

    /// Applies `op` (2x2 on A or B, n x n on C) without renormalizing.
    /// Returns the raw amplitudes in the same layout.
    pub fn apply_local_raw(&self, op: &ComplexMatrix, party: Party) -> Result<Vec<C64>> {
        let dim = match party {
            Party::A | Party::B => 2,
            Party::C => self.n,
        };
        if op.rows() != dim || op.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.rows().max(op.cols()),
            });
        }
        let n = self.n;
        let mut out = vec![C64::ZERO; 4 * n];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..n {
                    let v: C64 = match party {
                        Party::A => (0..2).map(|l| op.get(i, l) * self.amplitude(l, j, k)).sum(),
                        Party::B => (0..2).map(|l| op.get(j, l) * self.amplitude(i, l, k)).sum(),
                        Party::C => (0..n).map(|l| op.get(k, l) * self.amplitude(i, j, l)).sum(),
                    };
                    out[(2 * i + j) * n + k] = v;
                }
            }
        }
        Ok(out)
    }

    /// Applies a local unitary and renormalizes.
    pub fn apply_local(&self, op: &ComplexMatrix, party: Party) -> Result<Self> {
        Self::from_flat(self.apply_local_raw(op, party)?, self.n)
    }
}

/// A party of the bipartite (A, B) or tripartite (A, B, C) system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

impl std::str::FromStr for Party {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Party::A),
            "B" | "b" => Ok(Party::B),
            "C" | "c" => Ok(Party::C),
            other => Err(Error::Parse(format!("unknown party `{other}`"))),
        }
    }
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        };
        f.write_str(s)
    }
}

/// Hermitian, PSD, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::NotSquare {
                rows: rho.rows(),
                cols: rho.cols(),
            });
        }
        let eig = hermitian_eig(&rho)?;
        crate::linalg::check_psd(&eig.eigenvalues)?;
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tolerances::NORM || tr.im.abs() > tolerances::NORM {
            return Err(Error::NotNormalized { norm: tr.re });
        }
        Ok(Self { rho })
    }

    /// For matrices that are density matrices by construction (e.g. partial traces).
    pub(crate) fn from_trusted(rho: ComplexMatrix) -> Self {
        Self { rho }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    /// `|v><v| / <v|v>`
    pub fn from_pure(v: &[C64]) -> Result<Self> {
        let norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr.sqrt() < tolerances::ZERO_NORM {
            return Err(Error::ZeroState);
        }
        let d = v.len();
        Ok(Self {
            rho: ComplexMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj() / norm_sqr),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            rho: ComplexMatrix::identity(d).scale(1.0 / d as f64),
        }
    }
}

/// Two POVM elements with `a1^dagger a1 + a2^dagger a2 = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmPair {
    a1: ComplexMatrix,
    a2: ComplexMatrix,
}

impl PovmPair {
    pub fn new(a1: ComplexMatrix, a2: ComplexMatrix) -> Result<Self> {
        let d = a1.rows();
        if !a1.is_square() || a2.rows() != d || a2.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a2.rows(),
            });
        }
        let pair = Self { a1, a2 };
        let defect = pair.completeness_defect();
        if defect > tolerances::COMPLETENESS {
            return Err(Error::InvalidParameter(format!(
                "POVM elements are not complete (defect {defect:e})"
            )));
        }
        Ok(pair)
    }

    /// `A_1 = U_1 D_1 V`, `A_2 = U_2 D_2 V` with `D_1 = diag(a)` and
    /// `D_2 = diag(sqrt(1 - a^2))`. Every `a_k` must lie in `[0, 1]`.
    pub fn from_decomposition(
        u1: &ComplexMatrix,
        u2: &ComplexMatrix,
        v: &ComplexMatrix,
        a: &[f64],
    ) -> Result<Self> {
        if a.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParameter(
                "POVM weights must lie in [0, 1]".into(),
            ));
        }
        let d1 = ComplexMatrix::from_real_diagonal(a);
        let d2: Vec<f64> = a.iter().map(|x| (1.0 - x * x).max(0.0).sqrt()).collect();
        let d2 = ComplexMatrix::from_real_diagonal(&d2);
        Self::new(&(u1 * &d1) * v, &(u2 * &d2) * v)
    }

    /// `(I / sqrt 2, I / sqrt 2)`
    pub fn identity_split(d: usize) -> Self {
        let h = ComplexMatrix::identity(d).scale(std::f64::consts::FRAC_1_SQRT_2);
        Self {
            a1: h.clone(),
            a2: h,
        }
    }

    /// `(U, 0)`: a unitary dressed up as a measurement.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let d = u.rows();
        Self::new(u, ComplexMatrix::zeros(d, d))
    }

    /// Projective measurement onto the first `split` basis states vs the rest.
    pub fn projective(d: usize, split: usize) -> Self {
        let p1: Vec<f64> = (0..d).map(|k| if k < split { 1.0 } else { 0.0 }).collect();
        let p2: Vec<f64> = p1.iter().map(|x| 1.0 - x).collect();
        Self {
            a1: ComplexMatrix::from_real_diagonal(&p1),
            a2: ComplexMatrix::from_real_diagonal(&p2),
        }
    }

    pub fn a1(&self) -> &ComplexMatrix {
        &self.a1
    }

    pub fn a2(&self) -> &ComplexMatrix {
        &self.a2
    }

    pub fn elements(&self) -> [&ComplexMatrix; 2] {
        [&self.a1, &self.a2]
    }

    pub fn dim(&self) -> usize {
        self.a1.rows()
    }

    pub fn completeness_defect(&self) -> f64 {
        let sum = &(&self.a1.adjoint() * &self.a1) + &(&self.a2.adjoint() * &self.a2);
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    // Row-major draw order keeps samples stable independent of storage layout.
    let entries: Vec<C64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j])
}

/// Haar-random `d x d` unitary: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(d, d, rng);
    let qr = g.into_nalgebra().qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<C64> = (0..d)
        .map(|k| {
            let rk = r[(k, k)];
            if rk.norm() > 0.0 {
                rk / rk.norm()
            } else {
                C64::ONE
            }
        })
        .collect();
    ComplexMatrix::from_nalgebra(q) * ComplexMatrix::from_diagonal(&phases)
}

/// Haar-uniform `n1 x n2` pure state.
pub fn random_bipartite<R: Rng + ?Sized>(n1: usize, n2: usize, rng: &mut R) -> BipartitePureState {
    assert!(n1 >= 1 && n2 >= 1, "dimensions must be >= 1");
    BipartitePureState::from_matrix(gaussian_matrix(n1, n2, rng))
        .expect("a Gaussian sample is nonzero with probability one")
}

/// Haar-uniform 2x2xn pure state.
pub fn random_tripartite<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TripartitePureState {
    assert!(n >= 1, "party C needs dimension >= 1");
    let a: Vec<C64> = (0..4 * n).map(|_| complex_gaussian(rng)).collect();
    TripartitePureState::from_flat(a, n).expect("a Gaussian sample is nonzero with probability one")
}

/// Shape for random state requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateShape {
    Bipartite(usize, usize),
    Tripartite(usize),
}

impl StateShape {
    pub fn validate(self) -> Result<Self> {
        match self {
            StateShape::Bipartite(a, b) if a >= 1 && b >= 1 => Ok(self),
            StateShape::Tripartite(n) if n >= 1 => Ok(self),
            _ => Err(Error::InvalidParameter(format!(
                "invalid state shape {self:?}"
            ))),
        }
    }

    /// Local dimension of `party`, if it exists in this shape.
    pub fn party_dim(self, party: Party) -> Option<usize> {
        match (self, party) {
            (StateShape::Bipartite(a, _), Party::A) => Some(a),
            (StateShape::Bipartite(_, b), Party::B) => Some(b),
            (StateShape::Bipartite(..), Party::C) => None,
            (StateShape::Tripartite(_), Party::A | Party::B) => Some(2),
            (StateShape::Tripartite(n), Party::C) => Some(n),
        }
    }
}

impl std::str::FromStr for StateShape {
    type Err = Error;

    /// `"n1,n2"` or `"2,2,n"`.
    fn from_str(s: &str) -> Result<Self> {
        let dims: Vec<usize> = s
            .split([',', 'x'])
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("bad shape `{s}`: {e}")))?;
        let shape = match dims.as_slice() {
            [a, b] => StateShape::Bipartite(*a, *b),
            [2, 2, n] => StateShape::Tripartite(*n),
            _ => {
                return Err(Error::Parse(format!(
                    "shape `{s}` must be `n1,n2` or `2,2,n`"
                )))
            }
        };
        shape.validate()
    }
}

/// Either kind of pure state.
#[derive(Debug, Clone, PartialEq)]
pub enum PureState {
    Bipartite(BipartitePureState),
    Tripartite(TripartitePureState),
}

impl PureState {
    pub fn shape(&self) -> StateShape {
        match self {
            PureState::Bipartite(s) => {
                let (a, b) = s.shape();
                StateShape::Bipartite(a, b)
            }
            PureState::Tripartite(s) => StateShape::Tripartite(s.n()),
        }
    }
}

/// Haar-uniform state of the given shape, deterministic in `seed`.
pub fn random_pure_state(shape: StateShape, seed: RngSeed) -> PureState {
    random_pure_state_with(shape, &mut seed.rng())
}

pub fn random_pure_state_with<R: Rng + ?Sized>(shape: StateShape, rng: &mut R) -> PureState {
    match shape {
        StateShape::Bipartite(a, b) => PureState::Bipartite(random_bipartite(a, b, rng)),
        StateShape::Tripartite(n) => PureState::Tripartite(random_tripartite(n, rng)),
    }
}

/// Random two-outcome POVM `A_i = U_i D_i V` with `a_k ~ U[0, 1]`.
pub fn random_povm_pair(d: usize, seed: RngSeed) -> PovmPair {
    random_povm_pair_with(d, &mut seed.rng())
}

pub fn random_povm_pair_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PovmPair {
    assert!(d >= 1, "POVM dimension must be >= 1");
    let a: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..=1.0)).collect();
    let u1 = haar_unitary(d, rng);
    let u2 = haar_unitary(d, rng);
    let v = haar_unitary(d, rng);
    PovmPair::from_decomposition(&u1, &u2, &v, &a).expect("Haar unitaries give a complete POVM")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bipartite_construction() {
        let s =
            BipartitePureState::from_matrix(ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]))
                .unwrap();
        assert_eq!(s.shape(), (2, 2));
        let bell = BipartitePureState::from_matrix(ComplexMatrix::identity(2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(
            bell.psi()
                .max_abs_diff(&ComplexMatrix::identity(2).scale(h))
                < 1e-15
        );
        assert!(matches!(
            BipartitePureState::from_matrix(ComplexMatrix::zeros(2, 2)),
            Err(Error::ZeroState)
        ));
    }

    #[test]
    fn tripartite_construction() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut t: [[Vec<C64>; 2]; 2] = Default::default();
        for row in t.iter_mut() {
            for f in row.iter_mut() {
                *f = vec![C64::ZERO; 2];
            }
        }
        t[0][0][0] = c64(h, 0.0);
        t[1][1][1] = c64(h, 0.0);
        assert_eq!(
            TripartitePureState::from_tensor(&t).unwrap(),
            TripartitePureState::ghz()
        );

        let mut t: [[Vec<C64>; 2]; 2] = Default::default();
        for row in t.iter_mut() {
            for f in row.iter_mut() {
                *f = vec![C64::ZERO; 4];
            }
        }
        t[0][0][0] = c64(0.5, 0.0);
        t[0][1][1] = c64(0.5, 0.0);
        t[1][0][2] = c64(0.5, 0.0);
        t[1][1][3] = c64(0.5, 0.0);
        assert_eq!(
            TripartitePureState::from_tensor(&t).unwrap(),
            TripartitePureState::psi_max()
        );

        let t: [[Vec<C64>; 2]; 2] = [
            [vec![C64::ONE], vec![C64::ZERO]],
            [vec![C64::ZERO], vec![C64::ZERO]],
        ];
        let s = TripartitePureState::from_tensor(&t).unwrap();
        assert_eq!(s.n(), 1);
        assert_eq!(s.amplitude(0, 0, 0), C64::ONE);
    }

    #[test]
    fn tripartite_rejects_bad_tensors() {
        let t: [[Vec<C64>; 2]; 2] = [
            [vec![C64::ONE, C64::ZERO], vec![C64::ZERO]],
            [vec![C64::ZERO, C64::ZERO], vec![C64::ZERO, C64::ZERO]],
        ];
        assert!(matches!(
            TripartitePureState::from_tensor(&t),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            TripartitePureState::from_flat(vec![C64::ZERO; 8], 2),
            Err(Error::ZeroState)
        ));
    }

    #[test]
    fn regroup_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g = TripartitePureState::ghz().regrouped();
        let mut expected = ComplexMatrix::zeros(4, 2);
        expected.set(0, 0, c64(h, 0.0));
        expected.set(3, 1, c64(h, 0.0));
        assert_eq!(g, expected);

        let p = TripartitePureState::psi_max().regrouped();
        assert!(p.max_abs_diff(&ComplexMatrix::identity(4).scale(0.5)) == 0.0);

        let prod =
            TripartitePureState::from_flat(vec![C64::ONE, C64::ZERO, C64::ZERO, C64::ZERO], 1)
                .unwrap();
        assert_eq!(
            prod.regrouped(),
            ComplexMatrix::from_real(4, 1, &[1.0, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let a = random_pure_state(StateShape::Tripartite(3), RngSeed(7));
        let b = random_pure_state(StateShape::Tripartite(3), RngSeed(7));
        assert_eq!(a, b);
        let PureState::Tripartite(t) = a else {
            unreachable!()
        };
        assert!((t.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_weight_is_uniform() {
        let mut rng = RngSeed(11).rng();
        let mut acc = [0.0; 4];
        let samples = 10_000;
        for _ in 0..samples {
            let s = random_bipartite(2, 2, &mut rng);
            for (k, z) in s.psi().to_row_major().iter().enumerate() {
                acc[k] += z.norm_sqr();
            }
        }
        for a in acc {
            assert!((a / samples as f64 - 0.25).abs() < 0.01, "{a}");
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = RngSeed(3).rng();
        for d in 1..=6 {
            assert!(haar_unitary(d, &mut rng).is_unitary(1e-12));
        }
    }

    #[test]
    fn povm_forced_branches() {
        let mut rng = RngSeed(5).rng();
        let u1 = haar_unitary(3, &mut rng);
        let u2 = haar_unitary(3, &mut rng);
        let v = haar_unitary(3, &mut rng);
        let p = PovmPair::from_decomposition(&u1, &u2, &v, &[1.0; 3]).unwrap();
        assert!(p.a1().is_unitary(1e-12));
        assert_eq!(p.a2().max_abs(), 0.0);
        assert!(p.completeness_defect() < 1e-12);

        let i = ComplexMatrix::identity(2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = PovmPair::from_decomposition(&i, &i, &i, &[h, h]).unwrap();
        assert!(p.a1().max_abs_diff(&i.scale(h)) < 1e-15);
        assert!(p.a2().max_abs_diff(&i.scale(h)) < 1e-15);
    }

    #[test]
    fn povm_rejects_incomplete() {
        let i = ComplexMatrix::identity(2);
        assert!(PovmPair::new(i.clone(), i).is_err());
        assert!(PovmPair::from_decomposition(
            &ComplexMatrix::identity(1),
            &ComplexMatrix::identity(1),
            &ComplexMatrix::identity(1),
            &[1.5]
        )
        .is_err());
    }

    #[test]
    fn random_povms_are_complete() {
        for seed in 0..10_000u64 {
            let d = 1 + (seed % 6) as usize;
            let p = random_povm_pair(d, RngSeed(seed));
            assert!(p.completeness_defect() < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn shape_parsing() {
        assert_eq!(
            "2,4".parse::<StateShape>().unwrap(),
            StateShape::Bipartite(2, 4)
        );
        assert_eq!(
            "2,2,8".parse::<StateShape>().unwrap(),
            StateShape::Tripartite(8)
        );
        assert!("3,2,2".parse::<StateShape>().is_err());
        assert!("0,2".parse::<StateShape>().is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.5, 0.5])).is_ok());
    }
}
