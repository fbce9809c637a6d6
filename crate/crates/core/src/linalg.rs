//! Small shared linear-algebra helpers.
//!
//! Thin wrappers over `ndarray`/`ndarray-linalg` that keep the rest of the
//! crate free of repeated conversion and norm boilerplate.  Everything here
//! is dimension-agnostic and carries no model knowledge.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, UPLO};

use crate::error::Result;
use crate::C64;

/// Promote a real matrix to complex entries.
pub fn to_complex(a: &Array2<f64>) -> Array2<C64> {
    a.mapv(|x| C64::new(x, 0.0))
}

/// Conjugate transpose.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of a real matrix.
pub fn fro_norm_real(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest absolute entry of a real matrix.
pub fn max_abs_real(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `‖A − A†‖_F`, the Hermiticity deviation.
pub fn hermiticity_deviation(a: &Array2<C64>) -> f64 {
    fro_norm(&(a - &adjoint(a)))
}

/// True when every entry is finite.
pub fn all_finite(a: &Array2<C64>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// True when every entry of a complex vector is finite.
pub fn vec_finite(v: &Array1<C64>) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn sym_eig(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    Ok(a.eigh(UPLO::Lower)?)
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    Ok(a.eigh(UPLO::Lower)?)
}

/// General (non-symmetric) eigendecomposition of a real matrix.
///
/// Returns complex eigenvalues and unit-norm complex right eigenvectors as
/// the columns of the second factor.
pub fn general_eig(a: &Array2<f64>) -> Result<(Array1<C64>, Array2<C64>)> {
    Ok(to_complex(a).eig()?)
}

/// Euclidean inner product `⟨u, v⟩ = Σ ū_k v_k`.
pub fn inner(u: &Array1<C64>, v: &Array1<C64>) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Sorted minimum pairwise distance of a complex point set.
///
/// Returns `f64::INFINITY` for fewer than two points.
pub fn min_pairwise_gap(points: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            gap = gap.min((points[i] - points[j]).norm());
        }
    }
    gap
}
