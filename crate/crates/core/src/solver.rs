//! Minimum sharpness per sender, the longest successful chain, and the
//! parameter intervals on which that length is constant.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::cascade::{average_fidelity, numeric_average_fidelity, ProtocolConfig, SharpnessChain, MAX_CHAIN};
use crate::error::{Result, RspError};
use crate::states::InitialFamily;

/// Bisection tolerance for both the λ cross-check and axis transitions.
pub const BISECTION_TOL: f64 = 1e-10;

/// Smallest λᵢ for which sender `i` strictly beats the classical bound,
/// given the sharpness of everyone before. Fidelity is affine in λᵢ, so the
/// value comes from inverting f = A + Bλ. Returns +∞ when λᵢ has no
/// influence, and values above 1 are reported as-is.
pub fn lambda_min(config: &ProtocolConfig, i: usize, prefix: &[f64]) -> Result<f64> {
    if prefix.len() + 1 != i {
        return Err(RspError::DimensionMismatch {
            expected: i.saturating_sub(1),
            got: prefix.len(),
        });
    }
    let eval = |l: f64| -> Result<f64> {
        let mut v = prefix.to_vec();
        v.push(l);
        average_fidelity(config, &SharpnessChain::new(v)?, i)
    };
    let a = eval(0.0)?;
    let b = eval(1.0)? - a;
    if b <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(((config.threshold() - a) / b).max(0.0))
}

/// Same threshold located by bisection on the quadrature fidelity. Returns
/// `None` when even λ = 1 fails.
pub fn lambda_min_bisection(config: &ProtocolConfig, prefix: &[f64], nodes: usize) -> Result<Option<f64>> {
    let i = prefix.len() + 1;
    let thr = config.threshold();
    let gap = |l: f64| -> Result<f64> {
        let mut v = prefix.to_vec();
        v.push(l);
        Ok(numeric_average_fidelity(config, &SharpnessChain::new(v)?, i, nodes)? - thr)
    };
    if gap(1.0)? <= 0.0 {
        return Ok(None);
    }
    if gap(0.0)? > 0.0 {
        return Ok(Some(0.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    /// λ₁^min, λ₂^min, … along the infimum chain. The last entry is the
    /// first one that is not below 1, unless `max_i` was reached first.
    pub lambda_mins: Vec<f64>,
    pub n_max: usize,
    pub family: InitialFamily,
    pub theta: f64,
}

impl FeasibilityResult {
    /// The feasible part, usable as a prefix for later senders.
    pub fn infimum_chain(&self) -> Result<SharpnessChain> {
        SharpnessChain::new(self.lambda_mins[..self.n_max].to_vec())
    }
}

/// Builds the infimum chain: every sender sits exactly at its own minimum.
pub fn min_chain(config: &ProtocolConfig, max_i: usize) -> Result<FeasibilityResult> {
    if max_i > MAX_CHAIN {
        return Err(RspError::ChainTooLong(max_i));
    }
    let mut mins = Vec::with_capacity(max_i);
    for i in 1..=max_i {
        let l = lambda_min(config, i, &mins)?;
        mins.push(l);
        if l >= 1.0 {
            break;
        }
    }
    let n_max = mins.iter().take_while(|&&l| l < 1.0).count();
    Ok(FeasibilityResult {
        lambda_mins: mins,
        n_max,
        family: config.family,
        theta: config.theta,
    })
}

/// Longest run of senders that can all beat the classical bound.
pub fn max_bobs(config: &ProtocolConfig) -> Result<usize> {
    Ok(min_chain(config, MAX_CHAIN)?.n_max)
}

/// Parameter swept by a boundary table, with the other settings fixed to
/// the singlet on the equator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Polar angle of the target circle, singlet resource.
    Theta,
    /// Non-maximally entangled cos ξ|01⟩ − sin ξ|10⟩ on the equator.
    Xi,
    /// Werner visibility on the equator.
    WernerC,
}

impl Axis {
    pub fn domain(self) -> (f64, f64) {
        match self {
            Axis::Theta => (0.0, PI),
            Axis::Xi => (0.0, FRAC_PI_2),
            Axis::WernerC => (0.0, 1.0),
        }
    }

    pub fn config(self, x: f64) -> Result<ProtocolConfig> {
        match self {
            Axis::Theta => ProtocolConfig::new(InitialFamily::Singlet, x, Default::default()),
            Axis::Xi => ProtocolConfig::equatorial(InitialFamily::NonMaximal { xi: x }),
            Axis::WernerC => ProtocolConfig::equatorial(InitialFamily::Werner { c: x }),
        }
    }

    pub fn max_bobs_at(self, x: f64) -> Result<usize> {
        max_bobs(&self.config(x)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub at: f64,
    pub n_below: usize,
    pub n_above: usize,
}

/// Interior points where the maximal chain length changes, in increasing
/// order. `samples` sets the coarse scan; each change is then bisected.
pub fn transitions(axis: Axis, samples: usize) -> Result<Vec<Transition>> {
    let samples = samples.max(8);
    let (lo, hi) = axis.domain();
    let x = |k: usize| lo + (hi - lo) * k as f64 / samples as f64;
    let mut out = Vec::new();
    let mut prev = (x(1), axis.max_bobs_at(x(1))?);
    for k in 2..samples {
        let cur = (x(k), axis.max_bobs_at(x(k))?);
        if cur.1 != prev.1 {
            let (mut a, mut b) = (prev.0, cur.0);
            let mut n_b = cur.1;
            while b - a > BISECTION_TOL {
                let mid = 0.5 * (a + b);
                let n = axis.max_bobs_at(mid)?;
                if n == prev.1 {
                    a = mid;
                } else {
                    b = mid;
                    n_b = n;
                }
            }
            out.push(Transition {
                at: 0.5 * (a + b),
                n_below: prev.1,
                n_above: n_b,
            });
        }
        prev = cur;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.lo == self.hi {
            return write!(f, "{{{:.3}}}", self.lo);
        }
        write!(
            f,
            "{}{:.3},{:.3}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub n: usize,
    pub intervals: Vec<Interval>,
}

/// Groups the axis into maximal intervals of constant chain length, sorted
/// by n. A transition point belongs to the side with fewer senders, since
/// the sender sitting exactly on it only reaches the bound. Domain
/// endpoints whose value differs from their neighbourhood appear as
/// degenerate point intervals.
pub fn boundary_table(axis: Axis, samples: usize) -> Result<Vec<BoundaryRow>> {
    let (lo, hi) = axis.domain();
    let ts = transitions(axis, samples)?;
    let n_lo = axis.max_bobs_at(lo)?;
    let n_hi = axis.max_bobs_at(hi)?;

    let mut segments: Vec<(usize, Interval)> = Vec::new();
    let mut start = lo;
    let mut start_closed = None;
    let first_n = ts.first().map_or_else(|| axis.max_bobs_at(0.5 * (lo + hi)), |t| Ok(t.n_below))?;
    let mut n = first_n;
    for t in &ts {
        let closed_hi = t.n_below < t.n_above;
        segments.push((
            n,
            Interval {
                lo: start,
                hi: t.at,
                lo_closed: start_closed.unwrap_or(n_lo == n),
                hi_closed: closed_hi,
            },
        ));
        start = t.at;
        start_closed = Some(!closed_hi);
        n = t.n_above;
    }
    segments.push((
        n,
        Interval {
            lo: start,
            hi,
            lo_closed: start_closed.unwrap_or(n_lo == n),
            hi_closed: n_hi == n,
        },
    ));
    if n_lo != first_n {
        segments.push((n_lo, Interval { lo, hi: lo, lo_closed: true, hi_closed: true }));
    }
    if n_hi != n {
        segments.push((n_hi, Interval { lo: hi, hi, lo_closed: true, hi_closed: true }));
    }

    let mut rows: Vec<BoundaryRow> = Vec::new();
    for (n, iv) in segments {
        match rows.iter_mut().find(|r| r.n == n) {
            Some(r) => r.intervals.push(iv),
            None => rows.push(BoundaryRow { n, intervals: vec![iv] }),
        }
    }
    for r in &mut rows {
        r.intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    }
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::Target;

    fn singlet(theta: f64) -> ProtocolConfig {
        ProtocolConfig::new(InitialFamily::Singlet, theta, Target::Psi).unwrap()
    }

    #[test]
    fn first_sender_closed_forms() {
        let eq = singlet(FRAC_PI_2);
        assert!((lambda_min(&eq, 1, &[]).unwrap() - 0.5).abs() < 1e-15);
        let l2 = lambda_min(&eq, 2, &[0.5]).unwrap();
        assert!((l2 - 1.0 / (1.0 + 0.75f64.sqrt())).abs() < 1e-14);

        let xi = 0.5;
        let cfg = ProtocolConfig::equatorial(InitialFamily::NonMaximal { xi }).unwrap();
        let want = 0.5 / (2.0 * xi).sin();
        assert!((lambda_min(&cfg, 1, &[]).unwrap() - want).abs() < 1e-14);

        let cfg = ProtocolConfig::equatorial(InitialFamily::Werner { c: 0.8 }).unwrap();
        assert!((lambda_min(&cfg, 1, &[]).unwrap() - 0.625).abs() < 1e-14);
    }

    #[test]
    fn prefix_length_checked() {
        assert!(lambda_min(&singlet(FRAC_PI_2), 3, &[0.5]).is_err());
    }

    #[test]
    fn zero_resource_is_infeasible() {
        let cfg = ProtocolConfig::equatorial(InitialFamily::Werner { c: 0.0 }).unwrap();
        assert_eq!(lambda_min(&cfg, 1, &[]).unwrap(), f64::INFINITY);
        assert_eq!(max_bobs(&cfg).unwrap(), 0);
    }

    #[test]
    fn bisection_agrees_with_inversion() {
        for theta in [FRAC_PI_2, 1.0, 2.5] {
            let cfg = singlet(theta);
            let res = min_chain(&cfg, 4).unwrap();
            for i in 1..=res.n_max.min(3) {
                let prefix = &res.lambda_mins[..i - 1];
                let b = lambda_min_bisection(&cfg, prefix, 32).unwrap().unwrap();
                assert!((b - res.lambda_mins[i - 1]).abs() < 1e-9, "θ={theta} i={i}");
            }
        }
    }

    #[test]
    fn poles_admit_nobody() {
        assert_eq!(max_bobs(&singlet(0.0)).unwrap(), 0);
        assert_eq!(max_bobs(&singlet(PI)).unwrap(), 0);
    }

    #[test]
    fn werner_unit_visibility_is_singlet() {
        let a = min_chain(&ProtocolConfig::equatorial(InitialFamily::Werner { c: 1.0 }).unwrap(), 7).unwrap();
        let b = min_chain(&singlet(FRAC_PI_2), 7).unwrap();
        assert_eq!(a.lambda_mins, b.lambda_mins);
    }

    #[test]
    fn werner_table_rows() {
        let rows = boundary_table(Axis::WernerC, 400).unwrap();
        assert_eq!(rows.len(), 7);
        let first = rows[0].intervals[0];
        assert_eq!(rows[0].n, 0);
        assert!(first.lo_closed && first.hi_closed);
        assert!((first.hi - 0.5).abs() < 1e-8);
        let last = rows[6].intervals[0];
        assert!(!last.lo_closed && last.hi_closed && last.hi == 1.0);
        assert_eq!(format!("{}", rows[1].intervals[0]), "(0.500,0.625]");
    }

    #[test]
    fn theta_table_has_pole_points() {
        let rows = boundary_table(Axis::Theta, 300).unwrap();
        assert_eq!(rows[0].n, 0);
        assert_eq!(rows[0].intervals.len(), 2);
        assert!(rows[0].intervals.iter().all(|iv| iv.lo == iv.hi));
        let six = rows.iter().find(|r| r.n == 6).unwrap();
        assert_eq!(six.intervals.len(), 1);
        assert!(!six.intervals[0].lo_closed && !six.intervals[0].hi_closed);
    }
}
