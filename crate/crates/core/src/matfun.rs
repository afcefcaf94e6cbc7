//! Hermitian matrix functions on small composite Hilbert spaces.
//!
//! Operators carry the list of tensor-factor dimensions they act on, with
//! the first factor as the slowest-varying index. Every spectral function
//! symmetrizes its input as `(M + M^†)/2` before diagonalizing.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default relative cutoff below which eigenvalues are treated as outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Relative tolerance for negative eigenvalues of a PSD operator.
pub const PSD_TOL: f64 = 1e-10;

/// A Hermitian operator together with its subsystem layout.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl HermitianOperator {
    /// Wraps `matrix`, checking Hermiticity (1e-12 entrywise) and that `dims` multiply to its size.
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        check_layout(&matrix, &dims)?;
        let residual = hermitian_residual(&matrix);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self { matrix, dims })
    }

    /// Builds an operator from `(M + M^†)/2`, discarding any anti-Hermitian part.
    pub fn hermitized(matrix: &CMatrix, dims: Vec<usize>) -> Result<Self> {
        check_layout(matrix, &dims)?;
        Ok(Self {
            matrix: symmetrize(matrix),
            dims,
        })
    }

    /// A single-factor operator.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, vec![n])
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            matrix: CMatrix::identity(n, n),
            dims,
        }
    }

    /// Real diagonal operator on a single factor.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let diag = DVector::from_iterator(n, values.iter().map(|&v| C64::new(v, 0.0)));
        Self {
            matrix: CMatrix::from_diagonal(&diag),
            dims: vec![n],
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn projector(psi: &[C64], dims: Vec<usize>) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        Self::hermitized(&(&v * v.adjoint()), dims)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Replaces the subsystem layout, keeping the entries.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_layout(&self.matrix, &dims)?;
        self.dims = dims;
        Ok(self)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * factor),
            dims: self.dims.clone(),
        }
    }

    /// `U M U^†`, re-symmetrized.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "cannot conjugate a {}-dimensional operator by a {}x{} matrix",
                self.dim(),
                unitary.nrows(),
                unitary.ncols()
            )));
        }
        let out = unitary * &self.matrix * unitary.adjoint();
        Ok(Self {
            matrix: symmetrize(&out),
            dims: if unitary.nrows() == self.dim() {
                self.dims.clone()
            } else {
                vec![unitary.nrows()]
            },
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

fn check_layout(matrix: &CMatrix, dims: &[usize]) -> Result<()> {
    if !matrix.is_square() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, expected square",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let product: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || product != matrix.nrows() {
        return Err(Error::Dimension(format!(
            "subsystem dims {:?} do not multiply to {}",
            dims,
            matrix.nrows()
        )));
    }
    Ok(())
}

/// Largest entrywise modulus of `M - M^†`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Spectrum of a Hermitian operator, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMatrix,
}

impl Eigen {
    /// `V diag(f(λ)) V^†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(m: &HermitianOperator) -> Result<Eigen> {
    let residual = hermitian_residual(&m.matrix);
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    Ok(eig_symmetrized(&m.matrix))
}

/// Above this size the tridiagonal QR solver is used instead of Jacobi.
const JACOBI_MAX_DIM: usize = 64;

fn eig_symmetrized(m: &CMatrix) -> Eigen {
    let n = m.nrows();
    let sym = symmetrize(m);
    let (values, vectors) = if n <= JACOBI_MAX_DIM {
        jacobi_eigen(sym)
    } else {
        let decomposition = SymmetricEigen::new(sym.clone());
        if decomposition.eigenvalues.iter().all(|v| v.is_finite()) {
            (
                decomposition.eigenvalues.as_slice().to_vec(),
                decomposition.eigenvectors,
            )
        } else {
            jacobi_eigen(sym)
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    Eigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]),
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies
/// the real symmetric Jacobi rotation that zeroes it.
fn jacobi_eigen(mut a: CMatrix) -> (Vec<f64>, CMatrix) {
    const MAX_SWEEPS: usize = 100;
    let n = a.nrows();
    let mut v = CMatrix::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let floor = (f64::EPSILON * f64::EPSILON * 1e-4) * scale;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off <= floor || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let r = b.norm();
                if r == 0.0 || r * r <= floor * 1e-8 {
                    continue;
                }
                let phase = b / r;
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// Eigenvalues of a PSD operator with roundoff negatives clipped to zero.
///
/// Fails when an eigenvalue falls below `-PSD_TOL * λ_max`.
pub fn psd_spectrum(m: &HermitianOperator) -> Result<Eigen> {
    let mut eig = eig_symmetrized(&m.matrix);
    clip_psd(&mut eig.values)?;
    Ok(eig)
}

fn clip_psd(values: &mut [f64]) -> Result<()> {
    let max = values.iter().copied().fold(0.0_f64, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL * max.max(f64::MIN_POSITIVE) && min < -f64::EPSILON {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// `M^p` on the support of a PSD operator.
///
/// Eigenvalues at or below `support_cutoff * λ_max` map to zero, so negative
/// powers act as pseudo-inverse powers.
pub fn mat_pow_psd(
    m: &HermitianOperator,
    p: f64,
    support_cutoff: f64,
) -> Result<HermitianOperator> {
    if !(support_cutoff > 0.0) {
        return Err(Error::Parameter(format!(
            "support cutoff must be positive, got {support_cutoff}"
        )));
    }
    let eig = psd_spectrum(m)?;
    let threshold = support_cutoff * eig.values.first().copied().unwrap_or(0.0);
    let matrix = eig.reconstruct_with(|lambda| {
        if lambda <= threshold || lambda == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(lambda.powf(p), 0.0)
        }
    });
    HermitianOperator::hermitized(&matrix, m.dims.clone())
}

/// `Σ λ^p` over the support of a PSD operator.
pub fn trace_pow_psd(m: &HermitianOperator, p: f64, support_cutoff: f64) -> Result<f64> {
    let eig = psd_spectrum(m)?;
    let threshold = support_cutoff * eig.values.first().copied().unwrap_or(0.0);
    Ok(eig
        .values
        .iter()
        .filter(|&&lambda| lambda > threshold && lambda > 0.0)
        .map(|lambda| lambda.powf(p))
        .sum())
}

/// `exp(-i H t)`.
pub fn unitary_exp(h: &HermitianOperator, t: f64) -> Result<CMatrix> {
    let n = h.dim();
    if t == 0.0 {
        return Ok(CMatrix::identity(n, n));
    }
    let eig = eig_hermitian(h)?;
    Ok(eig.reconstruct_with(|lambda| C64::from_polar(1.0, -lambda * t)))
}

/// Kronecker product with concatenated subsystem layouts.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    HermitianOperator {
        matrix: a.matrix.kronecker(&b.matrix),
        dims,
    }
}

/// Row-major strides for a factor layout (first factor slowest).
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets of every multi-index over `factors`, in row-major order of those factors.
fn offsets(dims: &[usize], factors: &[usize]) -> Vec<usize> {
    let s = strides(dims);
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &base in &out {
            for i in 0..dims[f] {
                next.push(base + i * s[f]);
            }
        }
        out = next;
    }
    out
}

/// Traces out every factor not listed in `keep` (0-based, any order; result keeps ascending order).
pub fn partial_trace(m: &HermitianOperator, keep: &[usize]) -> Result<HermitianOperator> {
    let nfactors = m.dims.len();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.len() != keep.len() || kept.iter().any(|&k| k >= nfactors) {
        return Err(Error::Dimension(format!(
            "invalid keep set {:?} for subsystem dims {:?}",
            keep, m.dims
        )));
    }
    let traced: Vec<usize> = (0..nfactors).filter(|k| !kept.contains(k)).collect();
    let keep_offsets = offsets(&m.dims, &kept);
    let trace_offsets = offsets(&m.dims, &traced);
    let n = keep_offsets.len();
    let out = CMatrix::from_fn(n, n, |i, j| {
        trace_offsets
            .iter()
            .map(|&t| m.matrix[(keep_offsets[i] + t, keep_offsets[j] + t)])
            .sum()
    });
    let dims = kept.iter().map(|&k| m.dims[k]).collect();
    HermitianOperator::hermitized(&out, dims)
}

/// Reorders tensor factors: output factor `k` is input factor `order[k]`.
pub fn permute_factors(m: &HermitianOperator, order: &[usize]) -> Result<HermitianOperator> {
    let nfactors = m.dims.len();
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..nfactors).collect::<Vec<_>>() {
        return Err(Error::Dimension(format!(
            "{:?} is not a permutation of {} factors",
            order, nfactors
        )));
    }
    // offsets() enumerates multi-indices over `order` in the new row-major order,
    // giving for each new flat index its old flat index.
    let old_index = offsets(&m.dims, order);
    let n = m.dim();
    let matrix = CMatrix::from_fn(n, n, |i, j| m.matrix[(old_index[i], old_index[j])]);
    let dims = order.iter().map(|&k| m.dims[k]).collect();
    Ok(HermitianOperator { matrix, dims })
}

/// Swaps the two factors of a bipartite operator.
pub fn swap_factors(m: &HermitianOperator) -> Result<HermitianOperator> {
    if m.dims.len() != 2 {
        return Err(Error::Dimension(format!(
            "swap needs two factors, got {:?}",
            m.dims
        )));
    }
    permute_factors(m, &[1, 0])
}
