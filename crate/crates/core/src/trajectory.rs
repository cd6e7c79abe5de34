//! Run-by-run sampling of the protocol: every trial draws each sender's
//! azimuth and outcome, applies the selective Lüders update, and scores
//! the receiver's corrected state. The sample means estimate the same
//! averages the closed forms give.
//!
//! Random stream: ChaCha8 seeded with `seed`, one stream per batch of
//! [`BATCH`] trials (`set_stream(batch index)`). Within a trial, sender k
//! draws its azimuth and then its outcome uniform, before sender k + 1.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::{average_fidelity, ProtocolConfig, SharpnessChain, Target};
use crate::error::{Result, RspError};
use crate::linalg::{partial_trace_second, sandwich_second, CMatrix};
use crate::measurement::{UnsharpEffect, MIN_PROBABILITY};
use crate::states::{make_initial, BellDiagonalCoeffs, BellKind, BlochCircleState, Correction, InitialFamily, Outcome};

pub const BATCH: usize = 4096;
pub const MIN_TRIALS: usize = 1000;
/// Standard errors are floored here before forming z-scores, so runs with
/// no spread (deterministic preparation) do not divide by rounding noise.
pub const SE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BobEstimate {
    pub index: usize,
    pub mean: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub z_score: f64,
    pub plus_frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRun {
    pub seed: u64,
    pub trials: usize,
    pub bobs: Vec<BobEstimate>,
}

impl TrajectoryRun {
    pub fn max_abs_z(&self) -> f64 {
        self.bobs.iter().map(|b| b.z_score.abs()).fold(0.0, f64::max)
    }
}

/// Running mean and M2 with pairwise merging.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    plus: f64,
}

impl Moments {
    fn push(&mut self, x: f64, plus: bool) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
        if plus {
            self.plus += 1.0;
        }
    }

    fn merge(self, o: Self) -> Self {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
            plus: self.plus + o.plus,
        }
    }
}

fn run_batch(
    config: &ProtocolConfig,
    lambdas: &[f64],
    initial: &CMatrix,
    seed: u64,
    batch: usize,
    trials: usize,
) -> Result<Vec<Moments>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    let fcl = config.threshold();
    let mut acc = vec![Moments::default(); lambdas.len()];
    for _ in 0..trials {
        let mut rho = *initial;
        for (k, &lambda) in lambdas.iter().enumerate() {
            let phi: f64 = rng.random::<f64>() * TAU;
            let u: f64 = rng.random();
            let basis = BlochCircleState::new(config.theta, phi)?;
            let plus = UnsharpEffect::new(lambda, basis, Outcome::Plus)?;
            let bob = crate::linalg::partial_trace_first(&rho)?;
            let p_plus = bob.mul_trace(&plus.operator());
            let outcome = if u < p_plus { Outcome::Plus } else { Outcome::Minus };
            let effect = if outcome == Outcome::Plus {
                plus
            } else {
                UnsharpEffect::new(lambda, basis, Outcome::Minus)?
            };
            let post = sandwich_second(&rho, &effect.sqrt_operator());
            let p = post.trace().re;
            if p < MIN_PROBABILITY {
                return Err(RspError::VanishingProbability(p));
            }
            rho = post.scale(1.0 / p);
            let score = match config.correction(outcome) {
                Correction::Apply(unitary) => {
                    let alice = partial_trace_second(&rho)?.conjugate_by(&unitary);
                    let target = match config.target {
                        Target::Psi => basis.ket(),
                        Target::PsiPerp => basis.complement_ket(),
                    };
                    alice.expectation(&target)
                }
                Correction::Reject => fcl,
            };
            acc[k].push(score, outcome == Outcome::Plus);
        }
    }
    Ok(acc)
}

/// Samples `trials` independent runs of the whole chain.
pub fn simulate(config: &ProtocolConfig, chain: &SharpnessChain, trials: usize, seed: u64) -> Result<TrajectoryRun> {
    if trials < MIN_TRIALS {
        return Err(RspError::OutOfRange {
            name: "trials",
            value: trials as f64,
            range: ">= 1000",
        });
    }
    let initial = make_initial(&config.family)?;
    let lambdas = chain.as_slice();
    let batches: Vec<(usize, usize)> = (0..trials.div_ceil(BATCH))
        .map(|b| (b, BATCH.min(trials - b * BATCH)))
        .collect();
    let job = |&(b, n): &(usize, usize)| run_batch(config, lambdas, &initial, seed, b, n);

    #[cfg(feature = "parallel")]
    let parts: Vec<Result<Vec<Moments>>> = {
        use rayon::prelude::*;
        batches.par_iter().map(job).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<Vec<Moments>>> = batches.iter().map(job).collect();

    // merge in batch order so the result does not depend on scheduling
    let mut total = vec![Moments::default(); lambdas.len()];
    for part in parts {
        for (t, m) in total.iter_mut().zip(part?) {
            *t = t.merge(m);
        }
    }

    let mut bobs = Vec::with_capacity(lambdas.len());
    for (k, m) in total.into_iter().enumerate() {
        let analytic = average_fidelity(config, chain, k + 1)?;
        let var = if m.n > 1.0 { m.m2 / (m.n - 1.0) } else { 0.0 };
        let se = (var / m.n).sqrt();
        bobs.push(BobEstimate {
            index: k + 1,
            mean: m.mean,
            std_error: se,
            analytic,
            z_score: (m.mean - analytic) / se.max(SE_FLOOR),
            plus_frequency: m.plus / m.n,
        });
    }
    Ok(TrajectoryRun { seed, trials, bobs })
}

/// Twenty configurations spanning every family, regime and target.
pub fn regression_panel() -> Vec<(ProtocolConfig, SharpnessChain)> {
    let mk = |family, theta, target, lambdas: &[f64]| {
        (
            ProtocolConfig::new(family, theta, target).expect("panel config"),
            SharpnessChain::new(lambdas.to_vec()).expect("panel chain"),
        )
    };
    let bd = BellDiagonalCoeffs::new(-0.8, -0.6, -0.5).expect("panel coeffs");
    let table_one = [0.5, 0.5359, 0.5811, 0.6408, 0.7250, 0.8586];
    use InitialFamily as F;
    use Target::{Psi, PsiPerp};
    vec![
        mk(F::Singlet, FRAC_PI_2, Psi, &[1.0]),
        mk(F::Singlet, FRAC_PI_2, Psi, &[0.6, 1.0]),
        mk(F::Singlet, FRAC_PI_2, Psi, &table_one),
        mk(F::Singlet, FRAC_PI_2, PsiPerp, &[0.7, 0.8, 0.9]),
        mk(F::Singlet, 1.0, Psi, &[0.7, 0.9]),
        mk(F::Singlet, 2.0f64.sqrt().atan(), Psi, &[0.6055, 0.7009, 0.8665, 1.0]),
        mk(F::Singlet, PI / 4.0, PsiPerp, &[0.8, 1.0]),
        mk(F::Singlet, 2.5, Psi, &[0.9, 0.5]),
        mk(F::Singlet, 0.0, Psi, &[0.7, 1.0]),
        mk(F::Singlet, PI, PsiPerp, &[0.4]),
        mk(F::Werner { c: 0.7 }, FRAC_PI_2, Psi, &[1.0]),
        mk(F::Werner { c: 0.9 }, FRAC_PI_2, Psi, &[0.6, 0.8, 1.0]),
        mk(F::Werner { c: 0.8 }, 1.2, Psi, &[0.75, 0.9]),
        mk(F::NonMaximal { xi: PI / 6.0 }, FRAC_PI_2, Psi, &[0.6, 0.7, 0.8]),
        mk(F::NonMaximal { xi: 0.3 }, FRAC_PI_2, PsiPerp, &[0.9, 1.0]),
        mk(F::BellState { bell: BellKind::PsiPlus }, FRAC_PI_2, Psi, &[0.6, 0.9]),
        mk(F::BellState { bell: BellKind::PhiPlus }, 0.8, Psi, &[0.7, 1.0]),
        mk(F::BellState { bell: BellKind::PhiMinus }, FRAC_PI_2, PsiPerp, &[0.5, 0.7]),
        mk(F::BellDiagonal { coeffs: bd }, FRAC_PI_2, Psi, &[0.8, 0.9]),
        mk(F::BellDiagonal { coeffs: bd }, 1.1, Psi, &[0.9, 1.0]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..37).map(|k| ((k * 7919) % 101) as f64 / 13.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x, false));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..11].iter().for_each(|&x| a.push(x, false));
        xs[11..].iter().for_each(|&x| b.push(x, true));
        let m = a.merge(b);
        assert!((m.mean - whole.mean).abs() < 1e-13);
        assert!((m.m2 - whole.m2).abs() < 1e-10);
        assert_eq!(m.plus, 26.0);
    }

    #[test]
    fn trial_count_checked() {
        let (cfg, ch) = regression_panel().remove(0);
        assert!(simulate(&cfg, &ch, 999, 1).is_err());
    }

    #[test]
    fn deterministic_preparation() {
        let (cfg, ch) = regression_panel().remove(0);
        let run = simulate(&cfg, &ch, 2000, 7).unwrap();
        assert!((run.bobs[0].mean - 1.0).abs() < 1e-12);
        assert!(run.bobs[0].z_score.abs() < 4.0);
    }

    #[test]
    fn same_seed_same_run() {
        let (cfg, ch) = regression_panel().remove(4);
        let a = simulate(&cfg, &ch, 5000, 42).unwrap();
        let b = simulate(&cfg, &ch, 5000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate(&cfg, &ch, 5000, 43).unwrap();
        assert_ne!(a.bobs[0].mean, c.bobs[0].mean);
    }

    #[test]
    fn panel_is_twenty_valid_configs() {
        let panel = regression_panel();
        assert_eq!(panel.len(), 20);
        for (cfg, ch) in &panel {
            for i in 1..=ch.len() {
                assert!(average_fidelity(cfg, ch, i).is_ok());
            }
        }
    }
}
