//! Geometric discord, concurrence, and how much of either is left for a
//! given sender along the singlet cascade on the equator.

use serde::{Deserialize, Serialize};

use crate::cascade::{shared_state_correlations, ProtocolConfig, SharpnessChain, MAX_CHAIN};
use crate::error::{Result, RspError};
use crate::linalg::{eigvals_hermitian, eigvals_real_symmetric, kron, pauli_y, sqrt_psd, CMatrix};
use crate::solver::{lambda_min, min_chain};
use crate::states::{correlation_matrix, local_bloch_vectors, BellDiagonalCoeffs, InitialFamily};

/// Off-diagonal correlations and local Bloch components below this count
/// as zero when deciding whether a state is Bell-diagonal.
pub const BELL_DIAGONAL_TOL: f64 = 1e-12;
const SPECTRUM_FLOOR: f64 = 1e-14;

/// D⁽²⁾ = ½(c₁² + c₂² + c₃² − max cⱼ²), normalized so the singlet gives 1.
pub fn geometric_discord(c: &BellDiagonalCoeffs) -> f64 {
    let sq = c.as_array().map(|x| x * x);
    let max = sq.iter().copied().fold(0.0, f64::max);
    0.5 * (sq.iter().sum::<f64>() - max)
}

/// D⁽²⁾ of an arbitrary two-qubit state with the second qubit measured:
/// ½(‖b‖² + ‖T‖² − k_max), k_max the top eigenvalue of b bᵀ + TᵀT.
pub fn geometric_discord_state(rho: &CMatrix) -> Result<f64> {
    let t = correlation_matrix(rho)?;
    let (_, b) = local_bloch_vectors(rho)?;
    let mut k = vec![vec![0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = b[i] * b[j] + (0..3).map(|m| t[m][i] * t[m][j]).sum::<f64>();
        }
    }
    let trace: f64 = (0..3).map(|i| k[i][i]).sum();
    let top = *eigvals_real_symmetric(k).last().expect("3×3");
    Ok((0.5 * (trace - top)).max(0.0))
}

fn bell_diagonal_part(rho: &CMatrix) -> Result<Option<BellDiagonalCoeffs>> {
    let t = correlation_matrix(rho)?;
    let (a, b) = local_bloch_vectors(rho)?;
    let local = a.iter().chain(b.iter()).all(|x| x.abs() < BELL_DIAGONAL_TOL);
    let off = (0..3).all(|i| (0..3).all(|j| i == j || t[i][j].abs() < BELL_DIAGONAL_TOL));
    if !(local && off) {
        return Ok(None);
    }
    let d = [t[0][0], t[1][1], t[2][2]].map(|x| x.clamp(-1.0, 1.0));
    BellDiagonalCoeffs::new(d[0], d[1], d[2]).map(Some)
}

/// max{0, 2τ − 1} with τ the largest eigenvalue of a Bell-diagonal state.
pub fn bell_diagonal_concurrence(c: &BellDiagonalCoeffs) -> f64 {
    let tau = c.eigenvalues().into_iter().fold(0.0, f64::max);
    (2.0 * tau - 1.0).max(0.0)
}

/// Concurrence; Bell-diagonal inputs use the largest eigenvalue, others the
/// spin-flip construction.
pub fn concurrence(rho: &CMatrix) -> Result<f64> {
    match bell_diagonal_part(rho)? {
        Some(c) => Ok(bell_diagonal_concurrence(&c)),
        None => wootters_concurrence(rho),
    }
}

/// max{0, μ₁ − μ₂ − μ₃ − μ₄}, μ the square roots of the eigenvalues of
/// √ρ ρ̃ √ρ with ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y).
pub fn wootters_concurrence(rho: &CMatrix) -> Result<f64> {
    let yy = kron(&pauli_y(), &pauli_y())?;
    let flipped = rho.conj().conjugate_by(&yy);
    let root = sqrt_psd(rho)?;
    let m = root * flipped * root;
    // symmetrize away rounding before the Hermitian check
    let m = (m + m.dagger()).scale(0.5);
    // eigenvalues at rounding level would otherwise turn into ~1e-8 roots
    let mut mu: Vec<f64> = eigvals_hermitian(&m)?
        .into_iter()
        .map(|x| if x < SPECTRUM_FLOOR { 0.0 } else { x.sqrt() })
        .collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).max(0.0))
}

/// Largest eigenvalue of ρⁱ for the singlet on the equator:
/// ¼[1 + ∏√(1−λₖ²) + 2^{2−i} ∏(1 + √(1−λₖ²))], k < i.
pub fn tau(chain: &SharpnessChain, i: usize) -> Result<f64> {
    if i < 2 || i > chain.len() + 1 {
        return Err(RspError::InvalidIndex { index: i, len: chain.len() });
    }
    let s: Vec<f64> = chain.as_slice()[..i - 1].iter().map(|l| (1.0 - l * l).max(0.0).sqrt()).collect();
    let p: f64 = s.iter().product();
    let q: f64 = s.iter().map(|x| 1.0 + x).product();
    Ok(0.25 * (1.0 + p + q / 2f64.powi(i as i32 - 2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResourceMeasure {
    Discord,
    Concurrence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub bob_index: usize,
    pub max_discord: f64,
    pub max_concurrence: f64,
    pub achieving_chain: SharpnessChain,
}

fn singlet_equator() -> ProtocolConfig {
    ProtocolConfig::equatorial(InitialFamily::Singlet).expect("valid")
}

/// (D⁽²⁾, C) of the state left after every sender in `chain` has measured,
/// starting from the singlet on the equator.
pub fn resource_after_chain(chain: &SharpnessChain) -> Result<(f64, f64)> {
    let t = shared_state_correlations(&singlet_equator(), chain, chain.len() + 1)?;
    let c = BellDiagonalCoeffs::new(t[0], t[1], t[2])?;
    Ok((geometric_discord(&c), bell_diagonal_concurrence(&c)))
}

/// Largest D⁽²⁾ and C available to sender `i` when all predecessors are
/// inside their success intervals. Both measures fall as any λₖ grows, so
/// the supremum sits on the infimum chain.
pub fn max_remaining_resource(i: usize) -> Result<ResourceReport> {
    if i == 0 || i > MAX_CHAIN {
        return Err(RspError::InvalidIndex { index: i, len: MAX_CHAIN });
    }
    let res = min_chain(&singlet_equator(), i - 1)?;
    if res.n_max < i - 1 {
        return Err(RspError::Infeasible(i));
    }
    let chain = res.infimum_chain()?;
    let (d, c) = resource_after_chain(&chain)?;
    Ok(ResourceReport {
        bob_index: i,
        max_discord: d,
        max_concurrence: c,
        achieving_chain: chain,
    })
}

/// One row of the resource profile along the infimum chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub bob_index: usize,
    /// Resource in the state this sender receives.
    pub discord_available: f64,
    pub concurrence_available: f64,
    /// Sharpness assumed for this sender: its own minimum while that is
    /// below 1, otherwise the last feasible minimum as a lower edge.
    pub lambda: f64,
    /// Resource left once this sender has measured with `lambda`.
    pub discord_after: f64,
    pub concurrence_after: f64,
}

/// Resource profile for senders 1..=`max_bob` on the singlet equator.
/// Beyond the last feasible sender the chain is continued at the last
/// feasible minimum, the smallest sharpness any later sender could use.
pub fn resource_profile(max_bob: usize) -> Result<Vec<ResourceRow>> {
    if max_bob == 0 || max_bob >= MAX_CHAIN {
        return Err(RspError::InvalidIndex { index: max_bob, len: MAX_CHAIN - 1 });
    }
    let res = min_chain(&singlet_equator(), MAX_CHAIN)?;
    let feasible = &res.lambda_mins[..res.n_max];
    let edge = feasible.last().copied().unwrap_or(1.0);
    let lambdas: Vec<f64> = (0..max_bob).map(|k| feasible.get(k).copied().unwrap_or(edge)).collect();
    let mut rows = Vec::with_capacity(max_bob);
    for i in 1..=max_bob {
        let (da, ca) = resource_after_chain(&SharpnessChain::new(lambdas[..i - 1].to_vec())?)?;
        let (dn, cn) = resource_after_chain(&SharpnessChain::new(lambdas[..i].to_vec())?)?;
        rows.push(ResourceRow {
            bob_index: i,
            discord_available: da,
            concurrence_available: ca,
            lambda: lambdas[i - 1],
            discord_after: dn,
            concurrence_after: cn,
        });
    }
    Ok(rows)
}

/// Brute-force maximum of `measure` for sender `i` over chains where each
/// λₖ runs over `steps` evenly spaced points of [λₖ^min, 1].
pub fn grid_search_resource(i: usize, measure: ResourceMeasure, steps: usize) -> Result<f64> {
    fn walk(
        cfg: &ProtocolConfig,
        prefix: &mut Vec<f64>,
        left: usize,
        steps: usize,
        measure: ResourceMeasure,
        best: &mut f64,
    ) -> Result<()> {
        if left == 0 {
            let (d, c) = resource_after_chain(&SharpnessChain::new(prefix.clone())?)?;
            *best = best.max(match measure {
                ResourceMeasure::Discord => d,
                ResourceMeasure::Concurrence => c,
            });
            return Ok(());
        }
        let lo = lambda_min(cfg, prefix.len() + 1, prefix)?;
        if lo >= 1.0 {
            return Ok(());
        }
        for k in 0..steps {
            let frac = if steps == 1 { 0.0 } else { k as f64 / (steps - 1) as f64 };
            prefix.push(lo + (1.0 - lo) * frac);
            walk(cfg, prefix, left - 1, steps, measure, best)?;
            prefix.pop();
        }
        Ok(())
    }

    if i == 0 || i > MAX_CHAIN {
        return Err(RspError::InvalidIndex { index: i, len: MAX_CHAIN });
    }
    let mut best = f64::NEG_INFINITY;
    walk(&singlet_equator(), &mut Vec::new(), i - 1, steps.max(1), measure, &mut best)?;
    if best == f64::NEG_INFINITY {
        return Err(RspError::Infeasible(i));
    }
    Ok(best)
}
