//! Dense complex matrices for one and two qubits.
//!
//! Everything here is fixed to dimension 2 or 4, stored inline, and `Copy`.
//! Two-qubit basis ordering is |00⟩, |01⟩, |10⟩, |11⟩ with the first factor
//! as the high bit (row index = 2·i_a + i_b).

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Result, RspError};

pub type C64 = Complex64;

/// Tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL` are treated as non-negative.
pub const PSD_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = c(0.0, 0.0);
const ONE: C64 = c(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: [C64; 16],
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "CMatrix supports dim 2 or 4, got {dim}");
        Self {
            dim,
            data: [ZERO; 16],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(RspError::DimensionMismatch {
                expected: 4,
                got: dim,
            });
        }
        if entries.len() != dim * dim {
            return Err(RspError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        let mut m = Self::zeros(dim);
        m.data[..dim * dim].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(match diag.len() {
            2 | 4 => diag.len(),
            n => {
                return Err(RspError::DimensionMismatch {
                    expected: 4,
                    got: n,
                })
            }
        });
        for (k, &d) in diag.iter().enumerate() {
            m.set(k, k, c(d, 0.0));
        }
        Ok(m)
    }

    /// Outer product |v⟩⟨v| of a single-qubit ket.
    pub fn projector(v: &[C64; 2]) -> Self {
        let mut m = Self::zeros(2);
        for r in 0..2 {
            for col in 0..2 {
                m.set(r, col, v[r] * v[col].conj());
            }
        }
        m
    }

    /// Outer product |v⟩⟨v| of a two-qubit ket.
    pub fn projector4(v: &[C64; 4]) -> Self {
        let mut m = Self::zeros(4);
        for r in 0..4 {
            for col in 0..4 {
                m.set(r, col, v[r] * v[col].conj());
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, col: usize) -> C64 {
        self.data[r * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, r: usize, col: usize, v: C64) {
        self.data[r * self.dim + col] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for col in 0..self.dim {
                m.set(r, col, self.get(col, r).conj());
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        let mut m = *self;
        for z in m.data.iter_mut() {
            *z = z.conj();
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        for z in m.data.iter_mut() {
            *z *= s;
        }
        m
    }

    pub fn scale_c(&self, s: C64) -> Self {
        let mut m = *self;
        for z in m.data.iter_mut() {
            *z *= s;
        }
        m
    }

    /// Re tr(M N) without forming the product.
    pub fn mul_trace(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = ZERO;
        for r in 0..n {
            for k in 0..n {
                acc += self.get(r, k) * other.get(k, r);
            }
        }
        acc.re
    }

    /// ⟨v|M|v⟩ for a single-qubit ket, real part only (M Hermitian).
    pub fn expectation(&self, v: &[C64; 2]) -> f64 {
        debug_assert_eq!(self.dim, 2);
        let mut acc = ZERO;
        for r in 0..2 {
            for col in 0..2 {
                acc += v[r].conj() * self.get(r, col) * v[col];
            }
        }
        acc.re
    }

    /// Largest |M - M†| entry.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.dim {
            for col in r..self.dim {
                worst = worst.max((self.get(r, col) - self.get(col, r).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Unitary conjugation U·M·U†.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        *u * *self * u.dagger()
    }

    fn check_hermitian(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(RspError::NotHermitian(dev));
        }
        Ok(())
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for col in 0..n {
                    out.data[r * n + col] += a * rhs.data[k * n + col];
                }
            }
        }
        out
    }
}

impl Add for CMatrix {
    type Output = CMatrix;

    fn add(mut self, rhs: CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;

    fn sub(mut self, rhs: CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        self
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_rows(2, &[ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap()
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_rows(2, &[ONE, ZERO, ZERO, c(-1.0, 0.0)]).unwrap()
}

/// σ_x, σ_y, σ_z in that order.
pub fn paulis() -> [CMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Tensor product a ⊗ b of two single-qubit operators.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(RspError::DimensionMismatch {
                expected: 2,
                got: m.dim,
            });
        }
    }
    let mut out = CMatrix::zeros(4);
    for ia in 0..2 {
        for ja in 0..2 {
            let x = a.get(ia, ja);
            for ib in 0..2 {
                for jb in 0..2 {
                    out.set(2 * ia + ib, 2 * ja + jb, x * b.get(ib, jb));
                }
            }
        }
    }
    Ok(out)
}

/// Traces out the second qubit, leaving the first-qubit marginal.
pub fn partial_trace_second(rho: &CMatrix) -> Result<CMatrix> {
    if rho.dim != 4 {
        return Err(RspError::DimensionMismatch {
            expected: 4,
            got: rho.dim,
        });
    }
    let mut out = CMatrix::zeros(2);
    for ia in 0..2 {
        for ja in 0..2 {
            out.set(ia, ja, rho.get(2 * ia, 2 * ja) + rho.get(2 * ia + 1, 2 * ja + 1));
        }
    }
    Ok(out)
}

/// Traces out the first qubit, leaving the second-qubit marginal.
pub fn partial_trace_first(rho: &CMatrix) -> Result<CMatrix> {
    if rho.dim != 4 {
        return Err(RspError::DimensionMismatch {
            expected: 4,
            got: rho.dim,
        });
    }
    let mut out = CMatrix::zeros(2);
    for ib in 0..2 {
        for jb in 0..2 {
            out.set(ib, jb, rho.get(ib, jb) + rho.get(2 + ib, 2 + jb));
        }
    }
    Ok(out)
}

/// (𝟙 ⊗ K) ρ (𝟙 ⊗ K)† for a single-qubit operator K acting on the second
/// factor, computed block-wise.
pub fn sandwich_second(rho: &CMatrix, k: &CMatrix) -> CMatrix {
    assert_eq!(rho.dim, 4);
    assert_eq!(k.dim, 2);
    let kd = k.dagger();
    let mut out = CMatrix::zeros(4);
    for ia in 0..2 {
        for ja in 0..2 {
            let mut block = CMatrix::zeros(2);
            for ib in 0..2 {
                for jb in 0..2 {
                    block.set(ib, jb, rho.get(2 * ia + ib, 2 * ja + jb));
                }
            }
            let b = *k * block * kd;
            for ib in 0..2 {
                for jb in 0..2 {
                    out.set(2 * ia + ib, 2 * ja + jb, b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Real symmetric eigendecomposition by cyclic Jacobi rotations.
/// Returns eigenvalues (unsorted) and column eigenvectors.
#[allow(clippy::needless_range_loop)]
fn jacobi_symmetric(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (k, row) in v.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_TOL {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = cs * vkp - sn * vkq;
                    row[q] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    ((0..n).map(|k| a[k][k]).collect(), v)
}

/// Real embedding [[A, -B], [B, A]] of M = A + iB. Each eigenvalue of M
/// appears twice in the embedding, and functions of M commute with it.
fn real_embedding(m: &CMatrix) -> Vec<Vec<f64>> {
    let n = m.dim;
    let mut r = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            r[i][j] = z.re;
            r[i + n][j + n] = z.re;
            r[i][j + n] = -z.im;
            r[i + n][j] = z.im;
        }
    }
    r
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigvals_hermitian(m: &CMatrix) -> Result<Vec<f64>> {
    m.check_hermitian()?;
    let (mut vals, _) = jacobi_symmetric(real_embedding(m));
    vals.sort_by(f64::total_cmp);
    Ok(vals.into_iter().step_by(2).collect())
}

/// Eigenvalues of a real symmetric matrix of any size, ascending.
pub fn eigvals_real_symmetric(a: Vec<Vec<f64>>) -> Vec<f64> {
    let (mut vals, _) = jacobi_symmetric(a);
    vals.sort_by(f64::total_cmp);
    vals
}

/// Principal square root of a Hermitian positive semidefinite matrix.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    m.check_hermitian()?;
    let n = m.dim;
    let (vals, vecs) = jacobi_symmetric(real_embedding(m));
    if let Some(&worst) = vals.iter().filter(|&&x| x < -PSD_TOL).min_by(|a, b| a.total_cmp(b)) {
        return Err(RspError::NotPositive(worst));
    }
    let roots: Vec<f64> = vals.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let mut out = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            // top-left block gives Re, bottom-left block gives Im
            let mut re = 0.0;
            let mut im = 0.0;
            for (k, &s) in roots.iter().enumerate() {
                re += vecs[i][k] * s * vecs[j][k];
                im += vecs[i + n][k] * s * vecs[j][k];
            }
            out.set(i, j, c(re, im));
        }
    }
    Ok(out)
}
