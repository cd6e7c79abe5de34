//! Qubit states on a Bloch circle, the initial two-qubit families, and the
//! receiver-side corrections for each Bell state.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RspError};
use crate::linalg::{c, kron, pauli_x, pauli_y, pauli_z, paulis, CMatrix, C64};

/// Angular tolerance used to detect the equator and the poles.
pub const ANGLE_TOL: f64 = 1e-12;

/// A point on the Bloch circle of polar angle `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochCircleState {
    theta: f64,
    phi: f64,
}

impl BlochCircleState {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(RspError::OutOfRange {
                name: "theta",
                value: theta,
                range: "[0, π]",
            });
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(RspError::OutOfRange {
                name: "phi",
                value: phi,
                range: "[0, 2π)",
            });
        }
        Ok(Self { theta, phi })
    }

    /// Like [`new`](Self::new) but wraps `phi` into [0, 2π).
    pub fn wrapped(theta: f64, phi: f64) -> Result<Self> {
        Self::new(theta, phi.rem_euclid(TAU))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩
    pub fn ket(&self) -> [C64; 2] {
        let (s, co) = (self.theta / 2.0).sin_cos();
        [c(co, 0.0), C64::from_polar(s, self.phi)]
    }

    /// −sin(θ/2)|0⟩ + e^{iφ} cos(θ/2)|1⟩
    pub fn complement_ket(&self) -> [C64; 2] {
        let (s, co) = (self.theta / 2.0).sin_cos();
        [c(-s, 0.0), C64::from_polar(co, self.phi)]
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

pub fn pure_state(s: &BlochCircleState, complement: bool) -> [C64; 2] {
    if complement {
        s.complement_ket()
    } else {
        s.ket()
    }
}

/// Correlation coefficients of ¼(𝟙⊗𝟙 + Σ c_j σ_j⊗σ_j).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalCoeffs {
    c: [f64; 3],
}

impl BellDiagonalCoeffs {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        for (name, v) in [("c1", c1), ("c2", c2), ("c3", c3)] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(RspError::OutOfRange {
                    name,
                    value: v,
                    range: "[-1, 1]",
                });
            }
        }
        let out = Self { c: [c1, c2, c3] };
        let worst = out.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if worst < -1e-12 {
            return Err(RspError::NotPositive(worst));
        }
        Ok(out)
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.c
    }

    /// Weights on |ψ−⟩, |ψ+⟩, |Φ+⟩, |Φ−⟩.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let [c1, c2, c3] = self.c;
        [
            (1.0 - c1 - c2 - c3) / 4.0,
            (1.0 + c1 + c2 - c3) / 4.0,
            (1.0 + c1 - c2 + c3) / 4.0,
            (1.0 - c1 + c2 + c3) / 4.0,
        ]
    }

    pub fn density_matrix(&self) -> CMatrix {
        let mut rho = CMatrix::identity(4);
        for (cj, s) in self.c.iter().zip(paulis()) {
            rho = rho + kron(&s, &s).unwrap().scale(*cj);
        }
        rho.scale(0.25)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellKind {
    PsiMinus,
    PsiPlus,
    PhiPlus,
    PhiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PsiMinus,
        BellKind::PsiPlus,
        BellKind::PhiPlus,
        BellKind::PhiMinus,
    ];

    pub fn ket(self) -> [C64; 4] {
        let h = c(FRAC_1_SQRT_2, 0.0);
        let z = c(0.0, 0.0);
        match self {
            BellKind::PsiMinus => [z, h, -h, z],
            BellKind::PsiPlus => [z, h, h, z],
            BellKind::PhiPlus => [h, z, z, h],
            BellKind::PhiMinus => [h, z, z, -h],
        }
    }

    /// Diagonal of the correlation matrix.
    pub fn correlations(self) -> [f64; 3] {
        match self {
            BellKind::PsiMinus => [-1.0, -1.0, -1.0],
            BellKind::PsiPlus => [1.0, 1.0, -1.0],
            BellKind::PhiPlus => [1.0, -1.0, 1.0],
            BellKind::PhiMinus => [-1.0, 1.0, 1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialFamily {
    Singlet,
    /// cos ξ |01⟩ − sin ξ |10⟩
    NonMaximal { xi: f64 },
    /// c |ψ−⟩⟨ψ−| + (1 − c) 𝟙/4
    Werner { c: f64 },
    BellDiagonal { coeffs: BellDiagonalCoeffs },
    BellState { bell: BellKind },
}

impl InitialFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialFamily::NonMaximal { xi } if !(0.0..=FRAC_PI_2).contains(&xi) => {
                Err(RspError::OutOfRange {
                    name: "xi",
                    value: xi,
                    range: "[0, π/2]",
                })
            }
            InitialFamily::Werner { c } if !(0.0..=1.0).contains(&c) => Err(RspError::OutOfRange {
                name: "c",
                value: c,
                range: "[0, 1]",
            }),
            _ => Ok(()),
        }
    }

    /// Which Bell state fixes the receiver's corrections.
    pub fn bell_kind(&self) -> BellKind {
        match self {
            InitialFamily::BellState { bell } => *bell,
            _ => BellKind::PsiMinus,
        }
    }
}

pub fn make_initial(f: &InitialFamily) -> Result<CMatrix> {
    f.validate()?;
    let singlet = CMatrix::projector4(&BellKind::PsiMinus.ket());
    Ok(match *f {
        InitialFamily::Singlet => singlet,
        InitialFamily::NonMaximal { xi } => {
            let (s, co) = xi.sin_cos();
            let z = c(0.0, 0.0);
            CMatrix::projector4(&[z, c(co, 0.0), c(-s, 0.0), z])
        }
        InitialFamily::Werner { c } => {
            singlet.scale(c) + CMatrix::identity(4).scale((1.0 - c) / 4.0)
        }
        InitialFamily::BellDiagonal { coeffs } => coeffs.density_matrix(),
        InitialFamily::BellState { bell } => CMatrix::projector4(&bell.ket()),
    })
}

/// Where the target circle sits on the Bloch sphere; decides which
/// corrections the receiver can apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleRegime {
    /// θ = π/2: both outcomes corrected with {𝟙, σ_z}.
    Equatorial,
    /// θ ∈ {0, π}: both outcomes corrected with {𝟙, σ_x}.
    Pole,
    /// Any other θ: only the direct outcome is kept.
    PostSelected,
}

impl CircleRegime {
    pub fn of(theta: f64) -> Self {
        if (theta - FRAC_PI_2).abs() < ANGLE_TOL {
            CircleRegime::Equatorial
        } else if theta < ANGLE_TOL || (PI - theta) < ANGLE_TOL {
            CircleRegime::Pole
        } else {
            CircleRegime::PostSelected
        }
    }
}

/// Measurement outcome of an unsharp two-outcome measurement.
/// `Plus` is "up" (projector on |ψ⟩), `Minus` is "down" (on |ψ⊥⟩).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Correction {
    Apply(CMatrix),
    /// The receiver discards the state and falls back to the classical
    /// strategy.
    Reject,
}

/// Receiver's local operation for target |ψ⟩ after the given outcome.
pub fn correction_unitary(kind: BellKind, outcome: Outcome, theta: f64) -> Correction {
    let i = c(0.0, 1.0);
    let (down, up) = match kind {
        BellKind::PsiMinus => (CMatrix::identity(2), pauli_z()),
        BellKind::PsiPlus => (pauli_z(), CMatrix::identity(2)),
        BellKind::PhiPlus => (pauli_y().scale_c(i), (pauli_z() * pauli_y()).scale_c(i)),
        BellKind::PhiMinus => (pauli_x(), pauli_z() * pauli_x()),
    };
    match (outcome, CircleRegime::of(theta)) {
        (Outcome::Minus, _) => Correction::Apply(down),
        (Outcome::Plus, CircleRegime::Equatorial) => Correction::Apply(up),
        (Outcome::Plus, CircleRegime::Pole) => Correction::Apply(pauli_x() * down),
        (Outcome::Plus, CircleRegime::PostSelected) => Correction::Reject,
    }
}

/// M_pq = Tr[(σ_p ⊗ σ_q) ρ].
pub fn correlation_matrix(rho: &CMatrix) -> Result<[[f64; 3]; 3]> {
    if rho.dim() != 4 {
        return Err(RspError::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let s = paulis();
    let mut m = [[0.0; 3]; 3];
    for p in 0..3 {
        for q in 0..3 {
            m[p][q] = (kron(&s[p], &s[q])? * *rho).trace().re;
        }
    }
    Ok(m)
}

/// Bloch vectors of the first and second qubit marginals.
pub fn local_bloch_vectors(rho: &CMatrix) -> Result<([f64; 3], [f64; 3])> {
    let s = paulis();
    let id = CMatrix::identity(2);
    let mut first = [0.0; 3];
    let mut second = [0.0; 3];
    for k in 0..3 {
        first[k] = (kron(&s[k], &id)? * *rho).trace().re;
        second[k] = (kron(&id, &s[k])? * *rho).trace().re;
    }
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::partial_trace_second;

    fn ket_close(a: &[C64; 2], b: &[C64; 2]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-14)
    }

    #[test]
    fn equatorial_and_pole_kets() {
        let s = BlochCircleState::new(FRAC_PI_2, 0.0).unwrap();
        let h = c(FRAC_1_SQRT_2, 0.0);
        assert!(ket_close(&pure_state(&s, false), &[h, h]));

        let s = BlochCircleState::new(0.0, 2.3).unwrap();
        assert!(ket_close(&pure_state(&s, false), &[c(1.0, 0.0), c(0.0, 0.0)]));
    }

    #[test]
    fn complement_is_orthogonal() {
        let s = BlochCircleState::new(PI / 3.0, 1.1).unwrap();
        let a = s.ket();
        let b = s.complement_ket();
        let overlap = a[0].conj() * b[0] + a[1].conj() * b[1];
        assert!(overlap.norm() < 1e-15);
        let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn angles_validated() {
        assert!(BlochCircleState::new(-0.1, 0.0).is_err());
        assert!(BlochCircleState::new(1.0, TAU).is_err());
        assert!(BlochCircleState::wrapped(1.0, TAU + 0.5).is_ok());
    }

    #[test]
    fn singlet_and_limits() {
        let singlet = make_initial(&InitialFamily::Singlet).unwrap();
        let nm = make_initial(&InitialFamily::NonMaximal { xi: PI / 4.0 }).unwrap();
        assert!(singlet.max_abs_diff(&nm) < 1e-15);

        let w0 = make_initial(&InitialFamily::Werner { c: 0.0 }).unwrap();
        assert!(w0.max_abs_diff(&CMatrix::identity(4).scale(0.25)) < 1e-15);

        let w1 = make_initial(&InitialFamily::Werner { c: 1.0 }).unwrap();
        assert!(w1.max_abs_diff(&singlet) < 1e-15);
    }

    #[test]
    fn family_ranges_checked() {
        assert!(make_initial(&InitialFamily::Werner { c: 1.2 }).is_err());
        assert!(make_initial(&InitialFamily::NonMaximal { xi: -0.1 }).is_err());
        assert!(BellDiagonalCoeffs::new(1.0, 1.0, 1.0).is_err());
        assert!(BellDiagonalCoeffs::new(-1.0, 1.0, 1.0).is_ok());
        assert!(BellDiagonalCoeffs::new(0.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn werner_marginal_is_maximally_mixed() {
        for cw in [0.0, 0.3, 0.77, 1.0] {
            let w = make_initial(&InitialFamily::Werner { c: cw }).unwrap();
            let m = partial_trace_second(&w).unwrap();
            assert!(m.max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-15);
        }
    }

    #[test]
    fn correlation_matrices() {
        let singlet = make_initial(&InitialFamily::Singlet).unwrap();
        let m = correlation_matrix(&singlet).unwrap();
        for (p, row) in m.iter().enumerate() {
            for (q, x) in row.iter().enumerate() {
                let want = if p == q { -1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-14);
            }
        }
        let w = make_initial(&InitialFamily::Werner { c: 0.4 }).unwrap();
        let m = correlation_matrix(&w).unwrap();
        assert!((0..3).all(|k| (m[k][k] + 0.4).abs() < 1e-14));
        let zero = correlation_matrix(&CMatrix::identity(4).scale(0.25)).unwrap();
        assert!(zero.iter().flatten().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn bell_kinds_match_their_correlations() {
        for kind in BellKind::ALL {
            let rho = make_initial(&InitialFamily::BellState { bell: kind }).unwrap();
            let m = correlation_matrix(&rho).unwrap();
            let want = kind.correlations();
            assert!((0..3).all(|k| (m[k][k] - want[k]).abs() < 1e-14), "{kind:?}");
            let bd = BellDiagonalCoeffs::new(want[0], want[1], want[2]).unwrap();
            assert!(bd.density_matrix().max_abs_diff(&rho) < 1e-14);
        }
    }

    #[test]
    fn correction_table() {
        let eq = FRAC_PI_2;
        let Correction::Apply(u) = correction_unitary(BellKind::PsiMinus, Outcome::Minus, eq) else {
            panic!()
        };
        assert_eq!(u, CMatrix::identity(2));
        let Correction::Apply(u) = correction_unitary(BellKind::PsiMinus, Outcome::Plus, eq) else {
            panic!()
        };
        assert_eq!(u, pauli_z());
        let Correction::Apply(u) = correction_unitary(BellKind::PhiMinus, Outcome::Minus, eq) else {
            panic!()
        };
        assert_eq!(u, pauli_x());
        assert_eq!(
            correction_unitary(BellKind::PsiMinus, Outcome::Plus, 1.0),
            Correction::Reject
        );
        assert!(matches!(
            correction_unitary(BellKind::PsiMinus, Outcome::Minus, 1.0),
            Correction::Apply(_)
        ));
    }

    #[test]
    fn corrections_prepare_target_for_every_bell_state() {
        // sharp measurement on the second qubit, receiver corrects the first
        use crate::linalg::sandwich_second;
        for kind in BellKind::ALL {
            let rho = make_initial(&InitialFamily::BellState { bell: kind }).unwrap();
            for (theta, phi) in [(FRAC_PI_2, 0.7), (0.0, 1.3), (PI, 4.0)] {
                let s = BlochCircleState::new(theta, phi).unwrap();
                for outcome in [Outcome::Plus, Outcome::Minus] {
                    let ket = match outcome {
                        Outcome::Plus => s.ket(),
                        Outcome::Minus => s.complement_ket(),
                    };
                    let post = sandwich_second(&rho, &CMatrix::projector(&ket));
                    let alice = partial_trace_second(&post).unwrap();
                    let p = alice.trace().re;
                    let Correction::Apply(u) = correction_unitary(kind, outcome, theta) else {
                        panic!("no rejection expected here")
                    };
                    let fid = alice.scale(1.0 / p).conjugate_by(&u).expectation(&s.ket());
                    assert!((fid - 1.0).abs() < 1e-12, "{kind:?} {outcome:?} θ={theta}: {fid}");
                }
            }
        }
    }
}
