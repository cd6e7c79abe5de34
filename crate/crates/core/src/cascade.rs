//! The sequential protocol: each sender in turn measures unsharply, the
//! receiver corrects or post-selects, and the next sender inherits the
//! φ-averaged, outcome-summed state.
//!
//! Two independent routes compute every fidelity:
//! - [`average_fidelity`] evaluates the product formulas directly;
//! - [`numeric_average_fidelity`] builds the shared state matrix by repeated
//!   [`phi_averaged_channel`] calls and integrates the corrected conditional
//!   fidelities over the sender's azimuth.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::classical::classical_bound;
use crate::error::{Result, RspError};
use crate::linalg::CMatrix;
use crate::measurement::{check_sharpness, conditional_state, phi_averaged_channel, UnsharpEffect, DEFAULT_NODES};
use crate::resources;
use crate::solver;
use crate::states::{
    correction_unitary, make_initial, BlochCircleState, CircleRegime, Correction, InitialFamily, Outcome,
};

/// Longest supported chain of senders.
pub const MAX_CHAIN: usize = 12;

/// Which member of the complementary pair each sender wants to prepare.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    #[default]
    Psi,
    PsiPerp,
}

/// Sharpness λ₁…λₙ, one per sender, in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SharpnessChain(Vec<f64>);

impl SharpnessChain {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() > MAX_CHAIN {
            return Err(RspError::ChainTooLong(lambdas.len()));
        }
        if let Some((k, &v)) = lambdas.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(RspError::InvalidSharpness { index: k + 1, value: v });
        }
        Ok(Self(lambdas))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// A copy with `lambda` appended.
    pub fn extended(&self, lambda: f64) -> Result<Self> {
        let mut v = self.0.clone();
        v.push(lambda);
        Self::new(v)
    }
}

impl TryFrom<Vec<f64>> for SharpnessChain {
    type Error = RspError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SharpnessChain> for Vec<f64> {
    fn from(c: SharpnessChain) -> Self {
        c.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub family: InitialFamily,
    pub theta: f64,
    pub target: Target,
}

impl ProtocolConfig {
    pub fn new(family: InitialFamily, theta: f64, target: Target) -> Result<Self> {
        family.validate()?;
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(RspError::OutOfRange {
                name: "theta",
                value: theta,
                range: "[0, π]",
            });
        }
        if matches!(family, InitialFamily::NonMaximal { .. })
            && CircleRegime::of(theta) != CircleRegime::Equatorial
        {
            // outcome probabilities stop being ½ off the equator
            return Err(RspError::Unsupported(
                "non-maximally entangled family is defined on the equatorial circle only".into(),
            ));
        }
        Ok(Self { family, theta, target })
    }

    pub fn equatorial(family: InitialFamily) -> Result<Self> {
        Self::new(family, std::f64::consts::FRAC_PI_2, Target::Psi)
    }

    pub fn regime(&self) -> CircleRegime {
        CircleRegime::of(self.theta)
    }

    /// Fidelity a sender must strictly exceed.
    pub fn threshold(&self) -> f64 {
        classical_bound(self.theta)
    }

    /// Receiver's action after `outcome`, accounting for the target choice.
    pub fn correction(&self, outcome: Outcome) -> Correction {
        let effective = match self.target {
            Target::Psi => outcome,
            Target::PsiPerp => outcome.flipped(),
        };
        correction_unitary(self.family.bell_kind(), effective, self.theta)
    }

    fn target_ket(&self, basis: &BlochCircleState) -> [crate::linalg::C64; 2] {
        match self.target {
            Target::Psi => basis.ket(),
            Target::PsiPerp => basis.complement_ket(),
        }
    }
}

fn check_index(chain: &SharpnessChain, i: usize, need_own: bool) -> Result<()> {
    let available = if need_own { chain.len() } else { chain.len() + 1 };
    if i == 0 || i > available {
        return Err(RspError::InvalidIndex { index: i, len: chain.len() });
    }
    Ok(())
}

fn residual(lambda: f64) -> f64 {
    (1.0 - lambda * lambda).max(0.0).sqrt()
}

/// Diagonal of the sender-side map left by one φ-averaged unsharp
/// measurement: (transverse, transverse, longitudinal).
fn site_factors(theta: f64, lambda: f64) -> [f64; 3] {
    let s = residual(lambda);
    let sin2 = theta.sin().powi(2);
    let a = s + 0.5 * (1.0 - s) * sin2;
    [a, a, 1.0 - (1.0 - s) * sin2]
}

fn initial_correlations(family: &InitialFamily) -> [f64; 3] {
    match *family {
        InitialFamily::Singlet => [-1.0; 3],
        InitialFamily::NonMaximal { xi } => {
            let e = (2.0 * xi).sin();
            [-e, -e, -1.0]
        }
        InitialFamily::Werner { c } => [-c; 3],
        InitialFamily::BellDiagonal { coeffs } => coeffs.as_array(),
        InitialFamily::BellState { bell } => bell.correlations(),
    }
}

/// Closed-form diagonal of the correlation matrix of the state shared with
/// sender `i` (all off-diagonal entries vanish for every family here).
pub fn shared_state_correlations(config: &ProtocolConfig, chain: &SharpnessChain, i: usize) -> Result<[f64; 3]> {
    check_index(chain, i, false)?;
    let mut t = initial_correlations(&config.family);
    for &l in &chain.as_slice()[..i - 1] {
        let f = site_factors(config.theta, l);
        for k in 0..3 {
            t[k] *= f[k];
        }
    }
    Ok(t)
}

/// Entanglement amplitude scaling the singlet formulas.
fn amplitude(family: &InitialFamily) -> Option<f64> {
    match *family {
        InitialFamily::Singlet | InitialFamily::BellState { .. } => Some(1.0),
        InitialFamily::Werner { c } => Some(c),
        InitialFamily::NonMaximal { xi } => Some((2.0 * xi).sin()),
        InitialFamily::BellDiagonal { .. } => None,
    }
}

/// Closed-form average fidelity of sender `i` (1-based).
pub fn average_fidelity(config: &ProtocolConfig, chain: &SharpnessChain, i: usize) -> Result<f64> {
    check_index(chain, i, true)?;
    let prefix = &chain.as_slice()[..i - 1];
    let lambda = chain.as_slice()[i - 1];
    let theta = config.theta;
    let fcl = classical_bound(theta);

    let value = match (config.regime(), amplitude(&config.family)) {
        (CircleRegime::Equatorial, Some(amp)) => {
            let prod: f64 = prefix.iter().map(|&l| 1.0 + residual(l)).product();
            0.5 + amp * lambda * prod / 2f64.powi(i as i32)
        }
        (CircleRegime::Pole, Some(amp)) => (1.0 + amp * lambda) / 2.0,
        (CircleRegime::PostSelected, Some(amp)) => {
            let cos2 = theta.cos().powi(2);
            let sin2 = theta.sin().powi(2);
            let polar: f64 = prefix.iter().map(|&l| cos2 + sin2 * residual(l)).product();
            let transverse: f64 = prefix.iter().map(|&l| sin2 + (cos2 + 1.0) * residual(l)).product();
            fcl / 2.0
                + 0.25
                + amp * lambda / 4.0 * (cos2 * polar + sin2 / 2f64.powi(i as i32 - 1) * transverse)
        }
        (regime, None) => {
            let [c1, c2, c3] = shared_state_correlations(config, chain, i)?;
            match regime {
                CircleRegime::Equatorial => 0.5 - lambda * (c1 + c2) / 4.0,
                CircleRegime::Pole => 0.5 - lambda * c3 / 2.0,
                CircleRegime::PostSelected => {
                    fcl / 2.0 + 0.5 * direct_branch_fidelity(theta, lambda, [c1, c2, c3])
                }
            }
        }
    };
    Ok(value)
}

/// Fidelity of the uncorrected direct outcome, averaged over φ.
fn direct_branch_fidelity(theta: f64, lambda: f64, t: [f64; 3]) -> f64 {
    let sin2 = theta.sin().powi(2);
    let cos2 = theta.cos().powi(2);
    0.5 - lambda / 4.0 * ((t[0] + t[1]) * sin2 + 2.0 * t[2] * cos2)
}

/// Fidelity conditioned on the receiver keeping the state. Off the equator
/// and the poles only the direct outcome is kept; elsewhere this equals
/// [`average_fidelity`].
pub fn kept_branch_fidelity(config: &ProtocolConfig, chain: &SharpnessChain, i: usize) -> Result<f64> {
    let f = average_fidelity(config, chain, i)?;
    Ok(match config.regime() {
        CircleRegime::PostSelected => 2.0 * (f - config.threshold() / 2.0),
        _ => f,
    })
}

/// ρⁱ built numerically by iterating the φ-averaged channel.
pub fn shared_state_with_nodes(
    config: &ProtocolConfig,
    chain: &SharpnessChain,
    i: usize,
    nodes: usize,
) -> Result<CMatrix> {
    check_index(chain, i, false)?;
    let mut rho = make_initial(&config.family)?;
    for &l in &chain.as_slice()[..i - 1] {
        rho = phi_averaged_channel(&rho, l, config.theta, nodes)?;
    }
    Ok(rho)
}

pub fn shared_state(config: &ProtocolConfig, chain: &SharpnessChain, i: usize) -> Result<CMatrix> {
    shared_state_with_nodes(config, chain, i, DEFAULT_NODES)
}

/// Quadrature statistics of one sender's round on a given shared state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub fidelity: f64,
    /// Fidelity conditioned on the receiver keeping the state.
    pub kept_fidelity: f64,
    /// φ-averaged probability of the "up" outcome.
    pub p_plus: f64,
    /// Largest |p₊(φ) − ½| over the quadrature nodes.
    pub max_bias: f64,
}

pub fn evaluate_round(config: &ProtocolConfig, rho: &CMatrix, lambda: f64, nodes: usize) -> Result<RoundStats> {
    check_sharpness(lambda)?;
    let fcl = config.threshold();
    let mut fidelity = 0.0;
    let mut kept_weight = 0.0;
    let mut kept_score = 0.0;
    let mut p_plus = 0.0;
    let mut max_bias = 0.0_f64;
    for k in 0..nodes {
        let basis = BlochCircleState::new(config.theta, TAU * k as f64 / nodes as f64)?;
        let target = config.target_ket(&basis);
        for outcome in [Outcome::Plus, Outcome::Minus] {
            let cs = conditional_state(rho, &UnsharpEffect::new(lambda, basis, outcome)?)?;
            if outcome == Outcome::Plus {
                p_plus += cs.probability;
                max_bias = max_bias.max((cs.probability - 0.5).abs());
            }
            match config.correction(outcome) {
                Correction::Apply(u) => {
                    let f = cs.state.conjugate_by(&u).expectation(&target);
                    fidelity += cs.probability * f;
                    kept_weight += cs.probability;
                    kept_score += cs.probability * f;
                }
                Correction::Reject => fidelity += cs.probability * fcl,
            }
        }
    }
    let n = nodes as f64;
    Ok(RoundStats {
        fidelity: fidelity / n,
        kept_fidelity: kept_score / kept_weight,
        p_plus: p_plus / n,
        max_bias,
    })
}

/// Average fidelity of sender `i` via the numeric state cascade.
pub fn numeric_average_fidelity(
    config: &ProtocolConfig,
    chain: &SharpnessChain,
    i: usize,
    nodes: usize,
) -> Result<f64> {
    check_index(chain, i, true)?;
    let rho = shared_state_with_nodes(config, chain, i, nodes)?;
    Ok(evaluate_round(config, &rho, chain.as_slice()[i - 1], nodes)?.fidelity)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BobReport {
    pub index: usize,
    pub lambda: f64,
    pub average_fidelity: f64,
    pub numeric_fidelity: f64,
    pub kept_branch_fidelity: f64,
    pub classical_bound: f64,
    pub beats_classical: bool,
    /// Smallest λ for this sender given the actual predecessors; `None`
    /// when no sharpness helps.
    pub lambda_min: Option<f64>,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Correlation-matrix diagonal of the state this sender received.
    pub shared_correlations: [f64; 3],
    pub geometric_discord: f64,
    pub concurrence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeReport {
    pub config: ProtocolConfig,
    pub chain: SharpnessChain,
    pub nodes: usize,
    pub bobs: Vec<BobReport>,
}

impl CascadeReport {
    /// Number of leading senders that beat the classical bound.
    pub fn successful_prefix(&self) -> usize {
        self.bobs.iter().take_while(|b| b.beats_classical).count()
    }
}

/// Runs every sender in `chain` through both routes.
pub fn run_cascade(config: &ProtocolConfig, chain: &SharpnessChain, nodes: usize) -> Result<CascadeReport> {
    let mut rho = make_initial(&config.family)?;
    let mut bobs = Vec::with_capacity(chain.len());
    for (k, &lambda) in chain.as_slice().iter().enumerate() {
        let i = k + 1;
        let round = evaluate_round(config, &rho, lambda, nodes)?;
        let f = average_fidelity(config, chain, i)?;
        bobs.push(BobReport {
            index: i,
            lambda,
            average_fidelity: f,
            numeric_fidelity: round.fidelity,
            kept_branch_fidelity: kept_branch_fidelity(config, chain, i)?,
            classical_bound: config.threshold(),
            beats_classical: f > config.threshold(),
            lambda_min: Some(solver::lambda_min(config, i, &chain.as_slice()[..k])?).filter(|l| l.is_finite()),
            p_plus: round.p_plus,
            p_minus: 1.0 - round.p_plus,
            shared_correlations: shared_state_correlations(config, chain, i)?,
            geometric_discord: resources::geometric_discord_state(&rho)?,
            concurrence: resources::concurrence(&rho)?,
        });
        rho = phi_averaged_channel(&rho, lambda, config.theta, nodes)?;
    }
    Ok(CascadeReport {
        config: *config,
        chain: chain.clone(),
        nodes,
        bobs,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::states::{correlation_matrix, BellDiagonalCoeffs, BellKind};

    fn chain(v: &[f64]) -> SharpnessChain {
        SharpnessChain::new(v.to_vec()).unwrap()
    }

    fn singlet_eq() -> ProtocolConfig {
        ProtocolConfig::equatorial(InitialFamily::Singlet).unwrap()
    }

    #[test]
    fn chain_validation() {
        assert!(matches!(
            SharpnessChain::new(vec![0.5, 1.2]),
            Err(RspError::InvalidSharpness { index: 2, .. })
        ));
        assert!(matches!(SharpnessChain::new(vec![0.5; 13]), Err(RspError::ChainTooLong(13))));
        assert!(SharpnessChain::new(vec![0.5; 12]).is_ok());
    }

    #[test]
    fn nonmaximal_off_equator_rejected() {
        let r = ProtocolConfig::new(InitialFamily::NonMaximal { xi: 0.3 }, 1.0, Target::Psi);
        assert!(matches!(r, Err(RspError::Unsupported(_))));
        assert!(ProtocolConfig::new(InitialFamily::Singlet, 3.5, Target::Psi).is_err());
    }

    #[test]
    fn first_state_is_initial() {
        let rho = shared_state(&singlet_eq(), &chain(&[]), 1).unwrap();
        assert!(rho.max_abs_diff(&make_initial(&InitialFamily::Singlet).unwrap()) < 1e-15);
    }

    #[test]
    fn third_state_coefficients() {
        let cfg = singlet_eq();
        let ch = chain(&[0.6, 0.6]);
        let t = shared_state_correlations(&cfg, &ch, 3).unwrap();
        assert!((t[0] + 0.81).abs() < 1e-14 && (t[1] + 0.81).abs() < 1e-14);
        assert!((t[2] + 0.64).abs() < 1e-14);
        let m = correlation_matrix(&shared_state(&cfg, &ch, 3).unwrap()).unwrap();
        for k in 0..3 {
            assert!((m[k][k] - t[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn werner_state_scales_singlet() {
        let cw = 0.7;
        let cfg = ProtocolConfig::equatorial(InitialFamily::Werner { c: cw }).unwrap();
        let ch = chain(&[0.55]);
        let m = correlation_matrix(&shared_state(&cfg, &ch, 2).unwrap()).unwrap();
        let s = shared_state_correlations(&singlet_eq(), &ch, 2).unwrap();
        for k in 0..3 {
            assert!((m[k][k] - cw * s[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn lemma_one_every_circle() {
        for theta in [0.0, 0.3, 1.0, FRAC_PI_2, 2.4, PI] {
            let cfg = ProtocolConfig::new(InitialFamily::Singlet, theta, Target::Psi).unwrap();
            for lambda in [0.0, 0.3, 1.0] {
                let ch = chain(&[lambda]);
                let stats = evaluate_round(&cfg, &make_initial(&cfg.family).unwrap(), lambda, 64).unwrap();
                assert!((stats.kept_fidelity - (1.0 + lambda) / 2.0).abs() < 1e-12);
                let f = numeric_average_fidelity(&cfg, &ch, 1, 64).unwrap();
                assert!((f - average_fidelity(&cfg, &ch, 1).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn second_sender_value() {
        let ch = chain(&[0.6, 1.0]);
        let f = average_fidelity(&singlet_eq(), &ch, 2).unwrap();
        assert!((f - 0.95).abs() < 1e-14);
        assert!((numeric_average_fidelity(&singlet_eq(), &ch, 2, 64).unwrap() - 0.95).abs() < 1e-12);
    }

    #[test]
    fn first_sender_families() {
        let xi = 0.4;
        let cfg = ProtocolConfig::equatorial(InitialFamily::NonMaximal { xi }).unwrap();
        let f = average_fidelity(&cfg, &chain(&[0.8]), 1).unwrap();
        assert!((f - 0.5 * (1.0 + 0.8 * (2.0 * xi).sin())).abs() < 1e-15);

        let cfg = ProtocolConfig::equatorial(InitialFamily::Werner { c: 0.7 }).unwrap();
        let f = average_fidelity(&cfg, &chain(&[0.9]), 1).unwrap();
        assert!((f - (1.0 + 0.63) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn index_errors() {
        let ch = chain(&[0.6]);
        assert!(average_fidelity(&singlet_eq(), &ch, 0).is_err());
        assert!(average_fidelity(&singlet_eq(), &ch, 2).is_err());
        assert!(shared_state(&singlet_eq(), &ch, 2).is_ok());
        assert!(shared_state(&singlet_eq(), &ch, 3).is_err());
    }

    #[test]
    fn bell_states_share_singlet_fidelities() {
        let ch = chain(&[0.6, 0.7, 0.9]);
        for theta in [FRAC_PI_2, 1.0, 0.0] {
            let base = ProtocolConfig::new(InitialFamily::Singlet, theta, Target::Psi).unwrap();
            for bell in BellKind::ALL {
                for target in [Target::Psi, Target::PsiPerp] {
                    let cfg = ProtocolConfig::new(InitialFamily::BellState { bell }, theta, target).unwrap();
                    for i in 1..=3 {
                        let want = average_fidelity(&base, &ch, i).unwrap();
                        let got = numeric_average_fidelity(&cfg, &ch, i, 64).unwrap();
                        assert!((want - got).abs() < 1e-12, "{bell:?} {target:?} θ={theta} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn bell_diagonal_general_coefficients() {
        let coeffs = BellDiagonalCoeffs::new(-0.7, -0.4, -0.2).unwrap();
        let ch = chain(&[0.5, 0.8]);
        for theta in [FRAC_PI_2, 0.9, 0.0] {
            let cfg = ProtocolConfig::new(InitialFamily::BellDiagonal { coeffs }, theta, Target::Psi).unwrap();
            for i in 1..=2 {
                let a = average_fidelity(&cfg, &ch, i).unwrap();
                let b = numeric_average_fidelity(&cfg, &ch, i, 64).unwrap();
                assert!((a - b).abs() < 1e-12, "θ={theta} i={i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn report_fields() {
        let rep = run_cascade(&singlet_eq(), &chain(&[0.6, 1.0]), 64).unwrap();
        assert_eq!(rep.bobs.len(), 2);
        assert!(rep.bobs.iter().all(|b| b.beats_classical));
        assert!((rep.bobs[0].geometric_discord - 1.0).abs() < 1e-12);
        assert!((rep.bobs[0].concurrence - 1.0).abs() < 1e-9);
        assert!((rep.bobs[1].p_plus - 0.5).abs() < 1e-12);
        assert_eq!(rep.successful_prefix(), 2);
    }
}
