//! Randomized LOCC monotonicity checks.
//!
//! Each trial draws a Haar-random state and a random two-outcome POVM on one
//! party, then compares the probability-weighted entanglement of the two
//! outcomes with the entanglement before the measurement. A monotone never
//! gains on average, so `avg - before` must stay below the tolerance.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bipartite::{measure_bipartite, Branch};
use crate::error::{Error, Result};
use crate::io::{povm_to_json, pure_state_to_json};
use crate::registry::{self, Measure};
use crate::states::{
    haar_unitary, random_povm_pair_with, random_pure_state_with, Party, PovmPair, PureState,
    RngSeed, StateShape, TripartitePureState,
};
use crate::tolerances;

/// How trial POVMs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PovmSampler {
    /// `A_i = U_i D_i V` with Haar unitaries and uniform weights.
    #[default]
    Random,
    /// `(U, 0)`: a Haar unitary posing as a measurement. Entanglement must not move.
    Unitary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub trials: usize,
    pub seed: RngSeed,
    pub shape: StateShape,
    pub parties: Vec<Party>,
    /// Registry name; `None` picks the natural monotone for the shape.
    pub measure: Option<String>,
    pub frame: Option<String>,
    pub route: Option<String>,
    pub tolerance: f64,
    pub sampler: PovmSampler,
    /// Test hook: added to every post-measurement value. Zero in real runs.
    #[doc(hidden)]
    pub branch_bias: f64,
}

impl FuzzConfig {
    pub fn new(shape: StateShape, parties: Vec<Party>, trials: usize, seed: RngSeed) -> Self {
        Self {
            trials,
            seed,
            shape,
            parties,
            measure: None,
            frame: None,
            route: None,
            tolerance: tolerances::MONOTONICITY,
            sampler: PovmSampler::Random,
            branch_bias: 0.0,
        }
    }

    /// Checks the config and resolves the measure.
    pub fn validate(&self) -> Result<Box<dyn Measure>> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        self.shape.validate()?;
        if self.parties.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one party is required".into(),
            ));
        }
        if let Some(p) = self
            .parties
            .iter()
            .find(|p| self.shape.party_dim(**p).is_none())
        {
            return Err(Error::InvalidParameter(format!(
                "party {p} does not exist for shape {:?}",
                self.shape
            )));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::InvalidParameter(
                "tolerance must be nonnegative".into(),
            ));
        }
        let name = self
            .measure
            .as_deref()
            .unwrap_or_else(|| registry::default_measure_name(self.shape));
        let measure = registry::measure(name, self.frame.as_deref(), self.route.as_deref())?;
        if !measure.supports(self.shape) {
            return Err(Error::InvalidParameter(format!(
                "measure `{name}` does not apply to shape {:?}",
                self.shape
            )));
        }
        Ok(measure)
    }
}

/// Everything needed to replay the worst trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub state: serde_json::Value,
    pub povm: serde_json::Value,
    pub party: Party,
    pub trial: u64,
    pub before: f64,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub trials_run: usize,
    /// Max over trials of `avg - before`; negative when every trial lost entanglement.
    pub max_violation: f64,
    pub passed: bool,
    pub worst_case: Witness,
}

impl FuzzReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Two-outcome measurement on one party of a 2x2xn state.
pub fn apply_povm_tripartite(
    s: &TripartitePureState,
    p: &PovmPair,
    party: Party,
) -> Result<Vec<Branch<TripartitePureState>>> {
    let mut out = Vec::with_capacity(2);
    for a in p.elements() {
        let raw = s.apply_local_raw(a, party)?;
        let prob: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
        if prob < tolerances::BRANCH_PROBABILITY {
            continue;
        }
        out.push(Branch {
            probability: prob,
            state: TripartitePureState::from_flat(raw, s.n())?,
        });
    }
    Ok(out)
}

/// Measurement on either kind of state.
pub fn apply_povm(s: &PureState, p: &PovmPair, party: Party) -> Result<Vec<Branch<PureState>>> {
    Ok(match s {
        PureState::Bipartite(b) => measure_bipartite(b, p, party)?
            .into_iter()
            .map(|br| Branch {
                probability: br.probability,
                state: PureState::Bipartite(br.state),
            })
            .collect(),
        PureState::Tripartite(t) => apply_povm_tripartite(t, p, party)?
            .into_iter()
            .map(|br| Branch {
                probability: br.probability,
                state: PureState::Tripartite(br.state),
            })
            .collect(),
    })
}

/// `(before, avg)` for one measurement.
pub fn monotonicity_trial(
    s: &PureState,
    p: &PovmPair,
    party: Party,
    measure: &dyn Measure,
) -> Result<(f64, f64)> {
    biased_trial(s, p, party, measure, 0.0)
}

fn biased_trial(
    s: &PureState,
    p: &PovmPair,
    party: Party,
    measure: &dyn Measure,
    bias: f64,
) -> Result<(f64, f64)> {
    let before = measure.evaluate(s)?;
    let mut avg = 0.0;
    for b in apply_povm(s, p, party)? {
        avg += b.probability * (measure.evaluate(&b.state)? + bias);
    }
    Ok((before, avg))
}

/// Expected value after two successive measurements, over the whole outcome tree.
pub fn two_round_average(
    s: &PureState,
    first: (&PovmPair, Party),
    second: (&PovmPair, Party),
    measure: &dyn Measure,
) -> Result<f64> {
    let mut avg = 0.0;
    for b in apply_povm(s, first.0, first.1)? {
        let (_, inner) = monotonicity_trial(&b.state, second.0, second.1, measure)?;
        avg += b.probability * inner;
    }
    Ok(avg)
}

struct TrialDraw {
    state: PureState,
    povm: PovmPair,
    party: Party,
}

fn draw_trial(cfg: &FuzzConfig, index: u64) -> TrialDraw {
    let mut rng = cfg.seed.stream(index);
    let state = random_pure_state_with(cfg.shape, &mut rng);
    let party = cfg.parties[rng.random_range(0..cfg.parties.len())];
    let dim = cfg
        .shape
        .party_dim(party)
        .expect("parties are validated against the shape");
    let povm = match cfg.sampler {
        PovmSampler::Random => random_povm_pair_with(dim, &mut rng),
        PovmSampler::Unitary => PovmPair::unitary(haar_unitary(dim, &mut rng))
            .expect("a Haar unitary is a complete POVM"),
    };
    TrialDraw { state, povm, party }
}

/// Runs the campaign. The report depends only on the config, not on how
/// many threads execute it.
pub fn run_campaign(cfg: &FuzzConfig) -> Result<FuzzReport> {
    let measure = cfg.validate()?;
    let outcomes: Vec<(f64, f64)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let t = draw_trial(cfg, i);
            biased_trial(
                &t.state,
                &t.povm,
                t.party,
                measure.as_ref(),
                cfg.branch_bias,
            )
        })
        .collect::<Result<_>>()?;

    let (worst, &(before, average)) = outcomes
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| (a.1 - a.0).total_cmp(&(b.1 - b.0)).then(ib.cmp(ia)))
        .expect("at least one trial");
    let max_violation = average - before;
    let t = draw_trial(cfg, worst as u64);
    Ok(FuzzReport {
        trials_run: cfg.trials,
        max_violation,
        passed: max_violation <= cfg.tolerance,
        worst_case: Witness {
            state: pure_state_to_json(&t.state),
            povm: povm_to_json(&t.povm),
            party: t.party,
            trial: worst as u64,
            before,
            average,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::states::random_povm_pair;

    fn tri_measure() -> Box<dyn Measure> {
        registry::measure("tripartite-e", None, None).unwrap()
    }

    #[test]
    fn identity_split_gives_equal_branches() {
        let s = TripartitePureState::psi_max();
        let b = apply_povm_tripartite(&s, &PovmPair::identity_split(4), Party::C).unwrap();
        assert_eq!(b.len(), 2);
        for br in &b {
            assert!((br.probability - 0.5).abs() < 1e-15);
            assert!((br.state.overlap(&s).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn projective_on_ghz() {
        let b = apply_povm_tripartite(
            &TripartitePureState::ghz(),
            &PovmPair::projective(2, 1),
            Party::A,
        )
        .unwrap();
        assert_eq!(b.len(), 2);
        let mut zero = [C64::ZERO; 8];
        zero[0] = C64::ONE;
        let mut seven = [C64::ZERO; 8];
        seven[7] = C64::ONE;
        assert!((b[0].probability - 0.5).abs() < 1e-15);
        assert_eq!(
            b[0].state
                .amplitudes()
                .iter()
                .map(|z| z.norm())
                .collect::<Vec<_>>(),
            zero.iter().map(|z| z.norm()).collect::<Vec<_>>()
        );
        assert_eq!(
            b[1].state
                .amplitudes()
                .iter()
                .map(|z| z.norm())
                .collect::<Vec<_>>(),
            seven.iter().map(|z| z.norm()).collect::<Vec<_>>()
        );

        let (before, avg) = monotonicity_trial(
            &PureState::Tripartite(TripartitePureState::ghz()),
            &PovmPair::projective(2, 1),
            Party::A,
            tri_measure().as_ref(),
        )
        .unwrap();
        assert!((before - 1.0).abs() < 1e-12);
        assert_eq!(avg, 0.0);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = RngSeed(17).rng();
        for t in 0..10_000u64 {
            let n = 1 + (t % 8) as usize;
            let s = crate::states::random_tripartite(n, &mut rng);
            let party = [Party::A, Party::B, Party::C][(t % 3) as usize];
            let d = if party == Party::C { n } else { 2 };
            let p = random_povm_pair_with(d, &mut rng);
            let total: f64 = apply_povm_tripartite(&s, &p, party)
                .unwrap()
                .iter()
                .map(|b| b.probability)
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "trial {t}: {total}");
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let r = apply_povm_tripartite(
            &TripartitePureState::ghz(),
            &PovmPair::identity_split(3),
            Party::C,
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn unitary_povm_keeps_e() {
        let mut cfg = FuzzConfig::new(
            StateShape::Tripartite(3),
            vec![Party::A, Party::B, Party::C],
            1,
            RngSeed(1),
        );
        cfg.sampler = PovmSampler::Unitary;
        let r = run_campaign(&cfg).unwrap();
        assert!(r.max_violation.abs() < 1e-12, "{}", r.max_violation);
        assert!(r.passed);
    }

    #[test]
    fn psi_max_c_party_never_exceeds_three() {
        let s = PureState::Tripartite(TripartitePureState::psi_max());
        let m = tri_measure();
        for seed in 0..10_000u64 {
            let p = random_povm_pair(4, RngSeed(seed));
            let (before, avg) = monotonicity_trial(&s, &p, Party::C, m.as_ref()).unwrap();
            assert!((before - 3.0).abs() < 1e-12);
            assert!(avg <= 3.0 + 1e-9, "seed {seed}: {avg}");
        }
    }

    #[test]
    fn campaign_is_deterministic() {
        let cfg = FuzzConfig::new(
            StateShape::Bipartite(2, 3),
            vec![Party::A, Party::B],
            200,
            RngSeed(42),
        );
        let a = run_campaign(&cfg).unwrap();
        let b = run_campaign(&cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.passed);
    }

    #[test]
    fn bias_hook_fails_campaign() {
        let mut cfg = FuzzConfig::new(StateShape::Tripartite(2), vec![Party::A], 20, RngSeed(3));
        cfg.branch_bias = 0.1;
        let r = run_campaign(&cfg).unwrap();
        assert!(!r.passed);
        assert!(r.max_violation > 0.05);
    }

    #[test]
    fn config_validation() {
        let base = FuzzConfig::new(StateShape::Bipartite(2, 2), vec![Party::A], 10, RngSeed(0));
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.parties = vec![Party::C];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.parties.clear();
        assert!(c.validate().is_err());
        let mut c = base;
        c.measure = Some("tangle".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn two_rounds_do_not_gain() {
        let m = tri_measure();
        let mut rng = RngSeed(8).rng();
        for _ in 0..1_000 {
            let n = rng.random_range(1..=5usize);
            let s = PureState::Tripartite(crate::states::random_tripartite(n, &mut rng));
            let parties = [Party::A, Party::B, Party::C];
            let p1 = parties[rng.random_range(0..3)];
            let p2 = parties[rng.random_range(0..3)];
            let d = |p: Party| if p == Party::C { n } else { 2 };
            let m1 = random_povm_pair_with(d(p1), &mut rng);
            let m2 = random_povm_pair_with(d(p2), &mut rng);
            let before = m.evaluate(&s).unwrap();
            let avg = two_round_average(&s, (&m1, p1), (&m2, p2), m.as_ref()).unwrap();
            assert!(avg <= before + 1e-9, "{avg} > {before}");
        }
    }
}
