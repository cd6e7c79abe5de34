//! Unsharp two-outcome measurements on the second qubit and the Lüders
//! updates they induce.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RspError};
use crate::linalg::{partial_trace_second, sandwich_second, CMatrix};
use crate::states::{BlochCircleState, Outcome};

/// Default trapezoid node count for φ averages.
pub const DEFAULT_NODES: usize = 64;
pub const MIN_NODES: usize = 16;
/// Below this an outcome is treated as impossible.
pub const MIN_PROBABILITY: f64 = 1e-14;

/// E± = λ P± + (1 − λ) 𝟙/2 with P+ = |ψ⟩⟨ψ| and P− = |ψ⊥⟩⟨ψ⊥|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnsharpEffect {
    lambda: f64,
    basis: BlochCircleState,
    outcome: Outcome,
}

impl UnsharpEffect {
    pub fn new(lambda: f64, basis: BlochCircleState, outcome: Outcome) -> Result<Self> {
        check_sharpness(lambda)?;
        Ok(Self {
            lambda,
            basis,
            outcome,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn basis(&self) -> &BlochCircleState {
        &self.basis
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    fn projectors(&self) -> (CMatrix, CMatrix) {
        let up = CMatrix::projector(&self.basis.ket());
        let down = CMatrix::projector(&self.basis.complement_ket());
        match self.outcome {
            Outcome::Plus => (up, down),
            Outcome::Minus => (down, up),
        }
    }

    pub fn operator(&self) -> CMatrix {
        let (own, _) = self.projectors();
        own.scale(self.lambda) + CMatrix::identity(2).scale((1.0 - self.lambda) / 2.0)
    }

    /// √E in its own eigenbasis: √((1+λ)/2) P_own + √((1−λ)/2) P_other.
    pub fn sqrt_operator(&self) -> CMatrix {
        let (own, other) = self.projectors();
        own.scale(((1.0 + self.lambda) / 2.0).sqrt())
            + other.scale(((1.0 - self.lambda) / 2.0).max(0.0).sqrt())
    }
}

pub(crate) fn check_sharpness(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(RspError::OutOfRange {
            name: "lambda",
            value: lambda,
            range: "[0, 1]",
        });
    }
    Ok(())
}

pub fn effect(e: &UnsharpEffect) -> CMatrix {
    e.operator()
}

/// The first qubit's normalized state after outcome `e` on the second
/// qubit, together with the outcome probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalState {
    pub state: CMatrix,
    pub probability: f64,
}

pub fn conditional_state(rho: &CMatrix, e: &UnsharpEffect) -> Result<ConditionalState> {
    let post = sandwich_second(rho, &e.sqrt_operator());
    let reduced = partial_trace_second(&post)?;
    let p = reduced.trace().re;
    if p < MIN_PROBABILITY {
        return Err(RspError::VanishingProbability(p));
    }
    Ok(ConditionalState {
        state: reduced.scale(1.0 / p),
        probability: p,
    })
}

/// Selective Lüders update (𝟙⊗√E) ρ (𝟙⊗√E) / p.
pub fn lueders_update(rho: &CMatrix, e: &UnsharpEffect) -> Result<(CMatrix, f64)> {
    let post = sandwich_second(rho, &e.sqrt_operator());
    let p = post.trace().re;
    if p < MIN_PROBABILITY {
        return Err(RspError::VanishingProbability(p));
    }
    Ok((post.scale(1.0 / p), p))
}

/// Non-selective update averaged over the basis azimuth with a uniform
/// trapezoid rule; θ stays fixed.
pub fn phi_averaged_channel(rho: &CMatrix, lambda: f64, theta: f64, nodes: usize) -> Result<CMatrix> {
    check_sharpness(lambda)?;
    if nodes < MIN_NODES {
        return Err(RspError::OutOfRange {
            name: "nodes",
            value: nodes as f64,
            range: ">= 16",
        });
    }
    if rho.dim() != 4 {
        return Err(RspError::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let mut acc = CMatrix::zeros(4);
    for k in 0..nodes {
        let basis = BlochCircleState::new(theta, TAU * k as f64 / nodes as f64)?;
        for outcome in [Outcome::Plus, Outcome::Minus] {
            let root = UnsharpEffect::new(lambda, basis, outcome)?.sqrt_operator();
            acc = acc + sandwich_second(rho, &root);
        }
    }
    Ok(acc.scale(1.0 / nodes as f64))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::linalg::{c, eigvals_hermitian, sqrt_psd};
    use crate::states::{correlation_matrix, make_initial, BellDiagonalCoeffs, InitialFamily};

    fn equator(phi: f64) -> BlochCircleState {
        BlochCircleState::new(FRAC_PI_2, phi).unwrap()
    }

    #[test]
    fn sharp_and_trivial_limits() {
        let b = BlochCircleState::new(1.0, 0.4).unwrap();
        let e = UnsharpEffect::new(1.0, b, Outcome::Plus).unwrap();
        assert!(effect(&e).max_abs_diff(&CMatrix::projector(&b.ket())) < 1e-15);
        for outcome in [Outcome::Plus, Outcome::Minus] {
            let e = UnsharpEffect::new(0.0, b, outcome).unwrap();
            assert!(effect(&e).max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-15);
        }
    }

    #[test]
    fn half_sharp_effect() {
        let e = UnsharpEffect::new(0.5, equator(0.0), Outcome::Plus).unwrap();
        // 0.5 |+⟩⟨+| + 0.25 𝟙
        let want = CMatrix::from_rows(2, &[c(0.5, 0.0), c(0.25, 0.0), c(0.25, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(effect(&e).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn effects_are_complete() {
        for lambda in [0.0, 0.2, 0.73, 1.0] {
            let b = BlochCircleState::new(0.9, 5.0).unwrap();
            let sum = UnsharpEffect::new(lambda, b, Outcome::Plus).unwrap().operator()
                + UnsharpEffect::new(lambda, b, Outcome::Minus).unwrap().operator();
            assert!(sum.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn closed_form_root_matches_generic() {
        let e = UnsharpEffect::new(0.8, equator(0.0), Outcome::Plus).unwrap();
        let ev = eigvals_hermitian(&e.sqrt_operator()).unwrap();
        assert!((ev[0] - 0.1_f64.sqrt()).abs() < 1e-14);
        assert!((ev[1] - 0.9_f64.sqrt()).abs() < 1e-14);
        let generic = sqrt_psd(&e.operator()).unwrap();
        assert!(generic.max_abs_diff(&e.sqrt_operator()) < 1e-12);
    }

    #[test]
    fn sharpness_validated() {
        assert!(UnsharpEffect::new(1.01, equator(0.0), Outcome::Plus).is_err());
        assert!(UnsharpEffect::new(-0.01, equator(0.0), Outcome::Plus).is_err());
    }

    #[test]
    fn singlet_conditional_state() {
        let rho = make_initial(&InitialFamily::Singlet).unwrap();
        let lambda = 0.63;
        let b = BlochCircleState::new(1.2, 2.5).unwrap();
        let cs = conditional_state(&rho, &UnsharpEffect::new(lambda, b, Outcome::Plus).unwrap()).unwrap();
        assert!((cs.probability - 0.5).abs() < 1e-14);
        let want = CMatrix::projector(&b.complement_ket()).scale(lambda)
            + CMatrix::identity(2).scale((1.0 - lambda) / 2.0);
        assert!(cs.state.max_abs_diff(&want) < 1e-14);

        let cs = conditional_state(&rho, &UnsharpEffect::new(0.0, b, Outcome::Minus).unwrap()).unwrap();
        assert!((cs.probability - 0.5).abs() < 1e-14);
        assert!(cs.state.max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-14);
    }

    #[test]
    fn vanishing_probability_is_an_error() {
        // second qubit in |0⟩, sharp projection on |1⟩
        let z = c(0.0, 0.0);
        let rho = CMatrix::projector4(&[c(1.0, 0.0), z, z, z]);
        let b = BlochCircleState::new(0.0, 0.0).unwrap();
        let e = UnsharpEffect::new(1.0, b, Outcome::Minus).unwrap();
        assert!(matches!(conditional_state(&rho, &e), Err(RspError::VanishingProbability(_))));
    }

    #[test]
    fn channel_on_singlet_sharp() {
        let rho = make_initial(&InitialFamily::Singlet).unwrap();
        let out = phi_averaged_channel(&rho, 1.0, FRAC_PI_2, DEFAULT_NODES).unwrap();
        let want = BellDiagonalCoeffs::new(-0.5, -0.5, 0.0).unwrap().density_matrix();
        assert!(out.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn channel_on_singlet_unsharp() {
        let rho = make_initial(&InitialFamily::Singlet).unwrap();
        let out = phi_averaged_channel(&rho, 0.6, FRAC_PI_2, DEFAULT_NODES).unwrap();
        let m = correlation_matrix(&out).unwrap();
        for (k, want) in [-0.9, -0.9, -0.8].into_iter().enumerate() {
            assert!((m[k][k] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn channel_identity_at_zero_sharpness() {
        let rho = make_initial(&InitialFamily::NonMaximal { xi: 0.3 }).unwrap();
        let out = phi_averaged_channel(&rho, 0.0, 0.8, 32).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-14);
    }

    #[test]
    fn channel_node_doubling_agrees() {
        let rho = make_initial(&InitialFamily::NonMaximal { xi: 0.4 }).unwrap();
        let a = phi_averaged_channel(&rho, 0.7, 1.1, 32).unwrap();
        let b = phi_averaged_channel(&rho, 0.7, 1.1, 64).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert!(phi_averaged_channel(&rho, 0.7, 1.1, 8).is_err());
    }
}
