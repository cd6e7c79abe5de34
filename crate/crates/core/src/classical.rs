//! Best fidelity reachable with one classical bit and no shared quantum
//! resource, for targets drawn uniformly from a Bloch circle.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::linalg::{pauli_z, CMatrix};
use crate::states::BlochCircleState;

/// f_cl^max(θ) = ¾ + (cos 2θ + sin³θ)/4.
pub fn classical_bound(theta: f64) -> f64 {
    // fold onto [0, π/2] so the value is symmetric about the equator bit for bit
    let t = if theta > FRAC_PI_2 { PI - theta } else { theta };
    0.75 + ((2.0 * t).cos() + t.sin().powi(3)) / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyCase {
    /// Receiver prepares |ψ₂ᵖ⟩ on "down" and σ_z|ψ₂ᵖ⟩ on "up".
    Rotated,
    /// Receiver prepares independent circle states |ψ₁ᵖ⟩ / |ψ₂ᵖ⟩.
    Independent,
}

/// Sender measures n_B·σ and forwards the outcome bit; the receiver prepares
/// a state on the agreed circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalStrategy {
    pub theta_b: f64,
    pub phi_b: f64,
    pub phi_p1: f64,
    pub phi_p2: f64,
    pub case: StrategyCase,
}

impl ClassicalStrategy {
    fn measurement_axis(&self) -> [f64; 3] {
        let (st, ct) = self.theta_b.sin_cos();
        [st * self.phi_b.cos(), st * self.phi_b.sin(), ct]
    }
}

/// Closed form of the φ-averaged fidelity for either strategy case.
pub fn classical_fidelity(theta: f64, s: &ClassicalStrategy) -> f64 {
    let sin3 = theta.sin().powi(3);
    let base = 0.75 + (2.0 * theta).cos() / 4.0;
    match s.case {
        StrategyCase::Rotated => base - (s.phi_b - s.phi_p2).cos() * sin3 * s.theta_b.sin() / 4.0,
        StrategyCase::Independent => {
            base + sin3 * s.theta_b.sin() / 8.0
                * ((s.phi_b - s.phi_p1).cos() - (s.phi_b - s.phi_p2).cos())
        }
    }
}

/// Same average by direct quadrature over the target azimuth, with the
/// sender's measurement allowed to be unsharp (`lambda` = 1 is projective).
pub fn classical_fidelity_quadrature(theta: f64, s: &ClassicalStrategy, lambda: f64, nodes: usize) -> f64 {
    let axis = s.measurement_axis();
    let p2 = BlochCircleState::wrapped(theta, s.phi_p2).expect("theta in range");
    let rho2 = CMatrix::projector(&p2.ket());
    let rho1 = match s.case {
        StrategyCase::Rotated => rho2.conjugate_by(&pauli_z()),
        StrategyCase::Independent => {
            let p1 = BlochCircleState::wrapped(theta, s.phi_p1).expect("theta in range");
            CMatrix::projector(&p1.ket())
        }
    };
    let mut acc = 0.0;
    for k in 0..nodes {
        let d = BlochCircleState::new(theta, TAU * k as f64 / nodes as f64).expect("theta in range");
        let dv = d.bloch_vector();
        let proj: f64 = axis.iter().zip(dv).map(|(a, b)| a * b).sum();
        let p_up = (1.0 + lambda * proj) / 2.0;
        let ket = d.ket();
        acc += p_up * rho1.expectation(&ket) + (1.0 - p_up) * rho2.expectation(&ket);
    }
    acc / nodes as f64
}

/// Average fidelity when the receiver ignores the bit and always prepares
/// the fixed `guess`.
pub fn no_communication_fidelity(theta: f64, guess: &[crate::linalg::C64; 2], nodes: usize) -> f64 {
    let g = CMatrix::projector(guess);
    (0..nodes)
        .map(|k| {
            let d = BlochCircleState::new(theta, TAU * k as f64 / nodes as f64).expect("theta in range");
            g.expectation(&d.ket())
        })
        .sum::<f64>()
        / nodes as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOptimum {
    pub value: f64,
    pub strategy: ClassicalStrategy,
}

const GRID: usize = 33;
const DESCENT_TOL: f64 = 1e-8;

/// Maximizes the classical fidelity over both strategy cases: a 33-point
/// grid per angle followed by coordinate descent with step halving.
pub fn optimize_classical(theta: f64) -> ClassicalOptimum {
    // x = (θ_B, φ_B − φ₁ᵖ, φ_B − φ₂ᵖ) with φ_B pinned to 0
    let build = |x: [f64; 3], case| ClassicalStrategy {
        theta_b: x[0],
        phi_b: 0.0,
        phi_p1: -x[1],
        phi_p2: -x[2],
        case,
    };
    let ranges = [PI, TAU, TAU];
    let mut best: Option<ClassicalOptimum> = None;
    for case in [StrategyCase::Rotated, StrategyCase::Independent] {
        let objective = |x: [f64; 3]| classical_fidelity(theta, &build(x, case));
        let mut x = [0.0; 3];
        let mut fx = f64::NEG_INFINITY;
        for i in 0..GRID {
            for j in 0..GRID {
                for k in 0..GRID {
                    let cand = [
                        PI * i as f64 / (GRID - 1) as f64,
                        TAU * j as f64 / GRID as f64,
                        TAU * k as f64 / GRID as f64,
                    ];
                    let v = objective(cand);
                    if v > fx {
                        fx = v;
                        x = cand;
                    }
                }
            }
        }
        let mut step = ranges.map(|r| r / GRID as f64);
        while step.iter().any(|&h| h > DESCENT_TOL) {
            let mut improved = false;
            for d in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut cand = x;
                    cand[d] = (cand[d] + sign * step[d]).clamp(0.0, ranges[d]);
                    let v = objective(cand);
                    if v > fx {
                        fx = v;
                        x = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                for h in step.iter_mut() {
                    *h /= 2.0;
                }
            }
        }
        if best.is_none_or(|b| fx > b.value) {
            best = Some(ClassicalOptimum {
                value: fx,
                strategy: build(x, case),
            });
        }
    }
    best.expect("two cases evaluated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn bound_spot_values() {
        assert_eq!(classical_bound(FRAC_PI_2), 0.75);
        assert!((classical_bound(PI / 4.0) - 0.838).abs() < 1e-3);
        assert!((classical_bound(0.0) - 1.0).abs() < 1e-15);
        assert!((classical_bound(2.0_f64.sqrt().atan()) - 0.803).abs() < 1e-3);
    }

    #[test]
    fn bound_is_even_about_equator() {
        for k in 0..50 {
            let t = PI * k as f64 / 49.0;
            let b = classical_bound(t);
            assert!((b - classical_bound(PI - t)).abs() < 1e-15);
            assert!((0.75..=1.0 + 1e-15).contains(&b));
        }
    }

    #[test]
    fn case_one_equality_point() {
        let s = ClassicalStrategy {
            theta_b: FRAC_PI_2,
            phi_b: PI,
            phi_p1: 0.0,
            phi_p2: 0.0,
            case: StrategyCase::Rotated,
        };
        assert!((classical_fidelity(FRAC_PI_2, &s) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn case_two_without_azimuthal_term() {
        let s = ClassicalStrategy {
            theta_b: 0.0,
            phi_b: 0.3,
            phi_p1: 2.0,
            phi_p2: 4.0,
            case: StrategyCase::Independent,
        };
        for t in [0.2, 1.0, 2.5] {
            assert!((classical_fidelity(t, &s) - (0.75 + (2.0 * t).cos() / 4.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for case in [StrategyCase::Rotated, StrategyCase::Independent] {
            for (t, tb, pb, p1, p2) in [(0.4, 1.0, 0.3, 2.0, 5.0), (1.9, 2.2, 4.0, 0.1, 3.3)] {
                let s = ClassicalStrategy {
                    theta_b: tb,
                    phi_b: pb,
                    phi_p1: p1,
                    phi_p2: p2,
                    case,
                };
                let q = classical_fidelity_quadrature(t, &s, 1.0, 64);
                assert!((q - classical_fidelity(t, &s)).abs() < 1e-13, "{case:?}");
            }
        }
    }

    #[test]
    fn optimizer_spot_values() {
        let o = optimize_classical(FRAC_PI_2);
        assert!((o.value - 0.75).abs() < 1e-9);
        assert!((o.strategy.theta_b - FRAC_PI_2).abs() < 1e-3);
        assert!((optimize_classical(PI / 4.0).value - 0.838).abs() < 1e-3);
        assert!((optimize_classical(0.2).value - classical_bound(0.2)).abs() < 1e-6);
    }

    #[test]
    fn no_communication_floor() {
        for guess in [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.6, 0.0), c(0.0, 0.8)]] {
            let f = no_communication_fidelity(FRAC_PI_2, &guess, 64);
            assert!((f - 0.5).abs() < 1e-14);
        }
    }
}
