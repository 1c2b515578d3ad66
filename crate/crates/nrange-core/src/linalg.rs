//! Thin wrappers around the LAPACK-backed decompositions plus the handful of
//! subspace utilities (nullspaces, orthonormalization, principal vectors) the
//! dilation machinery needs.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{Eig, Eigh, Solve, UPLO, SVD};
use thiserror::Error;

use crate::C64;

/// Relative threshold below which a singular value counts as zero.
pub const NULL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("LAPACK call failed: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),
    #[error("decomposition returned no factors")]
    MissingFactor,
}

pub fn adjoint(a: &ArrayView2<'_, C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Hermitian eigendecomposition, eigenvalues ascending, eigenvectors as columns.
///
/// The backing `zheev` wrapper hands back the eigenvector matrix of the
/// transposed problem for complex input, so the columns must be conjugated
/// before `A·v_k = λ_k·v_k` holds; guarded by `eigh_residuals_vanish`.
pub fn eigh_ascending(a: &ArrayView2<'_, C64>) -> Result<(Array1<f64>, Array2<C64>), LinalgError> {
    let (vals, vecs) = a.to_owned().eigh(UPLO::Lower)?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// General (non-symmetric) eigendecomposition; eigenvectors as columns.
pub fn eig(a: &ArrayView2<'_, C64>) -> Result<(Array1<C64>, Array2<C64>), LinalgError> {
    let (vals, vecs) = a.to_owned().eig()?;
    Ok((vals, vecs))
}

/// Full SVD `a = u diag(s) v^H`; returns `(u, s, v)` with `v` (not `v^H`).
pub fn svd(a: &ArrayView2<'_, C64>) -> Result<(Array2<C64>, Array1<f64>, Array2<C64>), LinalgError> {
    let (u, s, vt) = a.to_owned().svd(true, true)?;
    let u = u.ok_or(LinalgError::MissingFactor)?;
    let vt = vt.ok_or(LinalgError::MissingFactor)?;
    Ok((u, s, adjoint(&vt.view())))
}

pub fn singular_values(a: &ArrayView2<'_, C64>) -> Result<Array1<f64>, LinalgError> {
    let (_, s, _) = a.to_owned().svd(false, false)?;
    Ok(s)
}

/// Operator (spectral) norm.
pub fn op_norm(a: &ArrayView2<'_, C64>) -> Result<f64, LinalgError> {
    Ok(singular_values(a)?.iter().copied().fold(0.0, f64::max))
}

/// `‖a^H a − I‖` in operator norm; zero exactly when `a` has orthonormal columns.
pub fn isometry_residual(a: &ArrayView2<'_, C64>) -> Result<f64, LinalgError> {
    let gram = adjoint(a).dot(a);
    let n = gram.nrows();
    op_norm(&(gram - Array2::<C64>::eye(n)).view())
}

/// Solves `a x = b` (square, well-conditioned use only).
pub fn solve(a: &ArrayView2<'_, C64>, b: &Array1<C64>) -> Result<Array1<C64>, LinalgError> {
    Ok(a.to_owned().solve(b)?)
}

/// Hermitian PSD square root; eigenvalues are clamped at zero before the root
/// so that tiny negative rounding noise cannot produce NaNs. Also returns the
/// clamped eigenvalues (ascending) and the eigenvector matrix.
pub fn sqrtm_psd(
    a: &ArrayView2<'_, C64>,
) -> Result<(Array2<C64>, Array1<f64>, Array2<C64>), LinalgError> {
    let (vals, vecs) = eigh_ascending(a)?;
    let clamped = vals.mapv(|x| x.max(0.0));
    let root = rebuild_hermitian(&clamped.mapv(f64::sqrt), &vecs);
    Ok((root, clamped, vecs))
}

/// Assembles `vecs · diag(vals) · vecs^H` for real `vals`.
pub fn rebuild_hermitian(vals: &Array1<f64>, vecs: &Array2<C64>) -> Array2<C64> {
    let scaled = vecs * &vals.mapv(|x| C64::new(x, 0.0)).insert_axis(Axis(0));
    scaled.dot(&adjoint(&vecs.view()))
}

/// Columns spanning `ker a`, from the SVD. A singular value counts as zero when
/// it is `≤ tol·σ_max` (or `≤ tol` if all of `a` is negligible).
pub fn nullspace(a: &ArrayView2<'_, C64>, tol: f64) -> Result<Array2<C64>, LinalgError> {
    let (_, s, v) = svd(a)?;
    let cutoff = zero_cutoff(&s, tol);
    let ncols = a.ncols();
    let rank = s.iter().take_while(|&&x| x > cutoff).count();
    let mut basis = v.slice(s![.., rank..ncols]).to_owned();
    fix_column_phases(&mut basis);
    Ok(basis)
}

/// Multiplies each column by a unimodular factor making its largest-modulus
/// entry real and positive.
///
/// SVD-derived bases carry an arbitrary phase per column; pinning it keeps
/// basis-dependent constructions downstream deterministic.
pub fn fix_column_phases(a: &mut Array2<C64>) {
    for mut col in a.columns_mut() {
        let mut best = 0usize;
        let mut best_norm = 0.0;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > best_norm + 1e-15 {
                best_norm = z.norm();
                best = i;
            }
        }
        if best_norm > 0.0 {
            let correction = (col[best] / C64::new(best_norm, 0.0)).conj();
            col.mapv_inplace(|z| z * correction);
        }
    }
}

/// Columns spanning `ker a^H` (the orthogonal complement of `range a`).
pub fn left_nullspace(a: &ArrayView2<'_, C64>, tol: f64) -> Result<Array2<C64>, LinalgError> {
    nullspace(&adjoint(a).view(), tol)
}

fn zero_cutoff(s: &Array1<f64>, tol: f64) -> f64 {
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax > 0.0 {
        tol * smax
    } else {
        tol
    }
}

/// Number of singular values exceeding `tol·σ_max`.
pub fn rank(a: &ArrayView2<'_, C64>, tol: f64) -> Result<usize, LinalgError> {
    let s = singular_values(a)?;
    let cutoff = zero_cutoff(&s, tol);
    Ok(s.iter().filter(|&&x| x > cutoff).count())
}

/// Orthonormal basis of the column span of `a` (columns with σ > tol·σ_max).
pub fn orthonormal_columns(a: &ArrayView2<'_, C64>, tol: f64) -> Result<Array2<C64>, LinalgError> {
    if a.ncols() == 0 {
        return Ok(a.to_owned());
    }
    let (u, s, _) = svd(a)?;
    let cutoff = zero_cutoff(&s, tol);
    let rank = s.iter().take_while(|&&x| x > cutoff).count();
    Ok(u.slice(s![.., ..rank]).to_owned())
}

/// Orthonormal basis of `span(k) ∩ span(c)` for matrices with orthonormal
/// columns, via the SVD of `k^H c`: singular values within `tol` of 1 mark
/// shared directions (principal angle ≈ 0).
pub fn subspace_intersection(
    k: &ArrayView2<'_, C64>,
    c: &ArrayView2<'_, C64>,
    tol: f64,
) -> Result<Array2<C64>, LinalgError> {
    if k.ncols() == 0 || c.ncols() == 0 {
        return Ok(Array2::zeros((k.nrows(), 0)));
    }
    let (u, s, _) = svd(&adjoint(k).dot(c).view())?;
    let shared = s.iter().take_while(|&&x| x >= 1.0 - tol).count();
    Ok(k.dot(&u.slice(s![.., ..shared])))
}

/// Eigenvalues and eigenvectors of a (numerically) unitary matrix, with the
/// eigenvectors of each eigenvalue cluster re-orthonormalized. Clusters are
/// groups of eigenvalues within `cluster_tol` of each other in ℂ.
pub fn unitary_eigensystem(
    u: &ArrayView2<'_, C64>,
    cluster_tol: f64,
) -> Result<(Array1<C64>, Array2<C64>), LinalgError> {
    let (vals, mut vecs) = eig(u)?;
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        vals[i]
            .arg()
            .partial_cmp(&vals[j].arg())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[order[end]] - vals[order[end - 1]]).norm() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<usize> = order[start..end].to_vec();
            let mut cluster = Array2::zeros((n, cols.len()));
            for (k, &c) in cols.iter().enumerate() {
                cluster.column_mut(k).assign(&vecs.column(c));
            }
            let ortho = orthonormal_columns(&cluster.view(), NULL_TOL)?;
            for (k, &c) in cols.iter().enumerate().take(ortho.ncols()) {
                vecs.column_mut(c).assign(&ortho.column(k));
            }
        }
        start = end;
    }
    Ok((vals, vecs))
}
