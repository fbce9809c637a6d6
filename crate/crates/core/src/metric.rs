//! Reconstruction of the time-dependent Hilbert-space metric `Θ`.
//!
//! For every radius matrix `R = D + τB + σ·1` of the family the
//! quasi-Hermiticity (Dieudonné) condition
//!
//! ```text
//!     Rᵀ Θ = Θ R,      Θ = Θᵀ > 0,
//! ```
//!
//! admits an `N`-parameter family of symmetric solutions.  The physical
//! branch is pinned by two requirements: it must connect continuously to
//! `Θ = 1` as `τ → 0`, and its eigenvalues must follow the closed-form
//! branch `θ_k(τ)` (a binomial polynomial in `τ`, see
//! [`eigenvalues_closed_form`]).  The shift `σ` drops out of the condition
//! identically, so the metric depends on the schedule only through `τ`.
//!
//! Two independent reconstructions are provided and cross-checked in the
//! test suite:
//!
//! 1. [`PolynomialMetric`] — a global coefficient ansatz
//!    `Θ(τ) = Σ_j M(j)·(−τ)^(j−1)` with banded, checkerboard-sparse
//!    coefficient matrices `M(j)`, solved once per dimension by least
//!    squares on the power-matching chain
//!    `[D, M(j+1)] + B M(j) + M(j) B = 0`;
//! 2. [`solve_metric_pointwise`] — at a single `τ`, extract the null space
//!    of the vectorised Dieudonné operator by SVD and pin the branch by
//!    alternating projections between that null space and the iso-spectral
//!    manifold of the closed-form eigenvalues, continued in `τ` from the
//!    identity.

use ndarray::{Array1, Array2};
use ndarray_linalg::{LeastSquaresSvd, SVD};

use crate::error::{Error, Result};
use crate::linalg::{general_eig, max_abs_real, sym_eig};
use crate::model::{ladder_coupling, ladder_diagonal, REALITY_RTOL};

/// Relative SVD cutoff for the null-space extraction: singular values below
/// `NULLSPACE_RTOL · σ_max` count as zero.
pub const NULLSPACE_RTOL: f64 = 1e-11;

/// Positivity margin: a metric counts as positive definite when its
/// smallest eigenvalue exceeds `POSITIVITY_RTOL · trace/N`.
pub const POSITIVITY_RTOL: f64 = 1e-12;

/// A reconstructed metric at a single coupling value.
#[derive(Debug, Clone)]
pub struct Metric {
    /// The symmetric matrix `Θ(τ)`.
    pub matrix: Array2<f64>,
    /// Coupling at which it was built.
    pub tau: f64,
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Positive definiteness within [`POSITIVITY_RTOL`].
    pub positive: bool,
}

impl Metric {
    /// Wrap a symmetric matrix, recording its spectrum and positivity flag.
    pub fn from_matrix(matrix: Array2<f64>, tau: f64) -> Result<Self> {
        let (vals, _) = sym_eig(&matrix)?;
        let eigenvalues = vals.to_vec();
        let trace: f64 = eigenvalues.iter().sum();
        let n = matrix.nrows() as f64;
        let positive = eigenvalues
            .first()
            .map(|&min| min > POSITIVITY_RTOL * trace.abs() / n)
            .unwrap_or(false);
        Ok(Self {
            matrix,
            tau,
            eigenvalues,
            positive,
        })
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Closed-form eigenvalue branch of the physical metric.
///
/// ```text
///     θ_k(τ) = Σ_m C_{k,m} τ^(m−1),
///     C_{k,m} = Σ_p (−1)^(p−1) · binom(k−1, p−1) · binom(N−k, m−p),
/// ```
///
/// for `k = 1..N`.  The sum telescopes to the product form
/// `θ_k = (1−τ)^(k−1) (1+τ)^(N−k)`, which is what gets evaluated: the
/// alternating binomial sum cancels catastrophically near `|τ| = 1`
/// where the smallest eigenvalue is `(1−|τ|)^(N−1)`, while the product
/// keeps full relative accuracy there.  The test suite verifies the two
/// forms against each other away from the cancellation regime.  All
/// `θ_k` are positive exactly for `|τ| < 1` and the smallest one
/// vanishes at the exceptional point.
pub fn eigenvalues_closed_form(n: usize, tau: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    Ok((1..=n)
        .map(|k| (1.0 - tau).powi(k as i32 - 1) * (1.0 + tau).powi((n - k) as i32))
        .collect())
}

// ---------------------------------------------------------------------------
// Symmetric vectorisation
// ---------------------------------------------------------------------------

/// Index pairs `(a, b)` with `a ≤ b` enumerating the symmetric basis.
fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            pairs.push((a, b));
        }
    }
    pairs
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Isometric vectorisation of a symmetric matrix (off-diagonal entries
/// scaled by √2 so that the Euclidean and Frobenius inner products agree).
fn sym_to_vec(m: &Array2<f64>, pairs: &[(usize, usize)]) -> Array1<f64> {
    Array1::from_iter(pairs.iter().map(
        |&(a, b)| {
            if a == b {
                m[(a, a)]
            } else {
                m[(a, b)] * SQRT2
            }
        },
    ))
}

/// Inverse of [`sym_to_vec`].
fn vec_to_sym(v: &Array1<f64>, n: usize, pairs: &[(usize, usize)]) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    for (idx, &(a, b)) in pairs.iter().enumerate() {
        if a == b {
            m[(a, a)] = v[idx];
        } else {
            let x = v[idx] / SQRT2;
            m[(a, b)] = x;
            m[(b, a)] = x;
        }
    }
    m
}

/// The vectorised Dieudonné operator `Θ ↦ RᵀΘ − ΘR` acting on the
/// isometric symmetric coordinates; shape `(n², n(n+1)/2)`.
fn dieudonne_operator(r: &Array2<f64>, pairs: &[(usize, usize)]) -> Array2<f64> {
    let n = r.nrows();
    let mut op = Array2::zeros((n * n, pairs.len()));
    for (col, &(a, b)) in pairs.iter().enumerate() {
        let mut e = Array2::<f64>::zeros((n, n));
        if a == b {
            e[(a, a)] = 1.0;
        } else {
            e[(a, b)] = 1.0 / SQRT2;
            e[(b, a)] = 1.0 / SQRT2;
        }
        let image = r.t().dot(&e) - e.dot(r);
        for (row, val) in image.iter().enumerate() {
            op[(row, col)] = *val;
        }
    }
    op
}

/// Orthonormal basis (rows) of the symmetric solutions of `RᵀΘ = ΘR`.
fn dieudonne_null_space(r: &Array2<f64>, pairs: &[(usize, usize)]) -> Result<Array2<f64>> {
    let op = dieudonne_operator(r, pairs);
    let (_, sv, vt) = op.svd(false, true)?;
    let vt = vt.expect("requested Vt");
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let dim = sv.iter().filter(|&&s| s <= NULLSPACE_RTOL * smax).count();
    let m = pairs.len();
    let mut basis = Array2::zeros((dim, m));
    for (i, row) in (m - dim..m).enumerate() {
        basis.row_mut(i).assign(&vt.row(row));
    }
    Ok(basis)
}

// ---------------------------------------------------------------------------
// Pointwise solver
// ---------------------------------------------------------------------------

/// Solve `RᵀΘ = ΘR` at a single point and pin the physical branch.
///
/// `r_matrix` is the radius matrix and `tau` the coupling it was built
/// with (the homotopy parameter: intermediate matrices are formed by
/// scaling the antisymmetric part of `r_matrix` down to zero, where the
/// metric is the identity).
///
/// The branch is pinned by alternating projections between the Dieudonné
/// null space (dimension `N`, SVD-extracted) and the manifold of symmetric
/// matrices with the closed-form spectrum, continued in the coupling from
/// `Θ = 1`.  Errors:
///
/// * [`Error::ComplexSpectrum`] — `r_matrix` has complex eigenvalues, no
///   positive metric exists;
/// * [`Error::DegenerateMetric`] — the branch eigenvalues hit zero
///   (exceptional point, e.g. `|τ| = 1`);
/// * [`Error::SolutionFamilyDimension`] — the null space has unexpected
///   dimension (degenerate non-EP input);
/// * [`Error::BranchPinningFailed`] — the projection iteration stalled.
pub fn solve_metric_pointwise(r_matrix: &Array2<f64>, tau: f64) -> Result<Metric> {
    let n = r_matrix.nrows();
    if n < 2 || r_matrix.ncols() != n {
        return Err(Error::DimensionTooSmall(n.min(r_matrix.ncols())));
    }

    // Reality check: complex spectrum ⇒ no positive metric.  Close to an
    // EP the eigenproblem itself is ill conditioned and true real
    // eigenvalues acquire spurious imaginary parts of order ε·κ(V), so
    // the tolerance is widened by the eigenvector condition number.
    let (vals, vecs) = general_eig(r_matrix)?;
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_imag = vals.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let kappa = {
        let (_, sv, _) = vecs.svd(false, false)?;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        smax / smin.max(1e-300)
    };
    let reality_tol = scale.max(1e-300) * (REALITY_RTOL + 50.0 * f64::EPSILON * kappa);
    if max_imag > reality_tol {
        return Err(Error::ComplexSpectrum { max_imag, scale });
    }

    // Branch eigenvalues must stay strictly positive.
    let target = eigenvalues_closed_form(n, tau)?;
    let theta_min = target.iter().cloned().fold(f64::INFINITY, f64::min);
    if theta_min <= 0.0 {
        return Err(Error::DegenerateMetric {
            theta_min,
            cutoff: 0.0,
        });
    }

    let pairs = sym_pairs(n);
    if tau == 0.0 {
        return Metric::from_matrix(Array2::eye(n), tau);
    }

    let sym = 0.5 * (r_matrix + &r_matrix.t().to_owned());
    let asym = 0.5 * (r_matrix - &r_matrix.t().to_owned());

    let mut s_prev = 0.0_f64;
    let mut vec_prev = sym_to_vec(&Array2::eye(n), &pairs);
    let sign = tau.signum();

    while s_prev.abs() < tau.abs() {
        let ds = (0.2 * (1.0 - s_prev.abs())).clamp(1e-3, 0.1);
        let s = sign * (s_prev.abs() + ds).min(tau.abs());

        let r_s = &sym + &asym.mapv(|x| x * (s / tau));
        let basis = dieudonne_null_space(&r_s, &pairs)?;
        if basis.nrows() != n {
            return Err(Error::SolutionFamilyDimension {
                found: basis.nrows(),
                expected: n,
            });
        }

        let mut thetas = eigenvalues_closed_form(n, s)?;
        thetas.sort_by(f64::total_cmp);
        let tgt = Array1::from(thetas);
        let tgt_scale = tgt.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));

        // Alternating projections: null space <-> iso-spectral manifold.
        let mut coords = basis.dot(&vec_prev);
        let stop = 1e-15 * tgt_scale * n as f64;
        for _ in 0..600 {
            let theta = vec_to_sym(&basis.t().dot(&coords), n, &pairs);
            let (w, u) = sym_eig(&theta)?;
            // Replace the spectrum, keeping the eigenframe (w ascending).
            let replaced = u.dot(&Array2::from_diag(&tgt)).dot(&u.t());
            let _ = w;
            let next = basis.dot(&sym_to_vec(&replaced, &pairs));
            let delta = (&next - &coords).iter().map(|x| x * x).sum::<f64>().sqrt();
            coords = next;
            if delta < stop {
                break;
            }
        }
        vec_prev = basis.t().dot(&coords);
        s_prev = s;
    }

    let theta = vec_to_sym(&vec_prev, n, &pairs);
    let metric = Metric::from_matrix(theta, tau)?;

    // Final guard: the pinned branch must actually carry the closed-form
    // spectrum (ascending order on both sides).
    let mut tgt = target;
    tgt.sort_by(f64::total_cmp);
    let tgt_scale = tgt.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));
    let mismatch = metric
        .eigenvalues
        .iter()
        .zip(&tgt)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let tol = 1e-10 * tgt_scale.max(1e-300);
    if mismatch > tol {
        return Err(Error::BranchPinningFailed { tau, mismatch, tol });
    }
    Ok(metric)
}

// ---------------------------------------------------------------------------
// Polynomial ansatz
// ---------------------------------------------------------------------------

/// The global polynomial form `Θ(τ) = Σ_{j=1..N} M(j)·(−τ)^(j−1)`.
///
/// Coefficient matrices are solved once per dimension; evaluating the
/// metric or its `τ`-derivative afterwards costs one polynomial sum.
#[derive(Debug, Clone)]
pub struct PolynomialMetric {
    n: usize,
    /// `coeffs[j-1]` is `M(j)`; `M(1) = 1`.
    coeffs: Vec<Array2<f64>>,
}

/// Support pattern of the coefficient matrix `M(k)`: entry `(a, b)`
/// (1-indexed) may be nonzero only when both
/// `i = (k + 1 + a − b)/2 ∈ {1..k}` and `j = (a + b − k + 1)/2 ∈
/// {1..N−k+1}` are integers in range.  This is the anti-diagonal band
/// pattern the coefficient arrays live on; it doubles as the checkerboard
/// rule `b − a ≡ k − 1 (mod 2)`.
fn in_support(n: usize, k: usize, a: usize, b: usize) -> bool {
    let i2 = k as i64 + 1 + a as i64 - b as i64;
    let j2 = a as i64 + b as i64 - k as i64 + 1;
    if i2 % 2 != 0 || j2 % 2 != 0 {
        return false;
    }
    let i = i2 / 2;
    let j = j2 / 2;
    (1..=k as i64).contains(&i) && (1..=(n - k + 1) as i64).contains(&j)
}

impl PolynomialMetric {
    /// Solve the coefficient chain for dimension `n`.
    ///
    /// Matching powers of `τ` in `RᵀΘ − ΘR = 0` with `M(1) = 1` yields the
    /// linear chain `[D, M(p+1)] + B·M(p) + M(p)·B = 0` for `p = 0..N`
    /// (with `M(0) = M(N+1) = 0`).  Restricted to the banded support the
    /// system has full column rank; it is solved in one least-squares shot
    /// and the solution is verified to be exact.
    pub fn build(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        let d = ladder_diagonal(n);
        let b = ladder_coupling(n);

        // Unknown layout: for each order k = 2..N the symmetric basis
        // entries (a ≤ b) inside the support.
        let mut unknowns: Vec<(usize, usize, usize)> = Vec::new();
        for k in 2..=n {
            for a in 1..=n {
                for bb in a..=n {
                    if in_support(n, k, a, bb) || in_support(n, k, bb, a) {
                        unknowns.push((k, a, bb));
                    }
                }
            }
        }
        let cols = unknowns.len();
        let rows = (n + 1) * n * n;
        let mut a_mat = Array2::<f64>::zeros((rows, cols));
        let mut rhs = Array1::<f64>::zeros(rows);

        let basis_matrix = |a: usize, bb: usize| -> Array2<f64> {
            let mut e = Array2::<f64>::zeros((n, n));
            e[(a - 1, bb - 1)] = 1.0;
            e[(bb - 1, a - 1)] = 1.0;
            e
        };

        for p in 0..=n {
            let block = p * n * n;
            // [D, M(p+1)] term.
            if (2..=n).contains(&(p + 1)) {
                for (col, &(k, a, bb)) in unknowns.iter().enumerate() {
                    if k != p + 1 {
                        continue;
                    }
                    let e = basis_matrix(a, bb);
                    let image = d.dot(&e) - e.dot(&d);
                    for (row, val) in image.iter().enumerate() {
                        a_mat[(block + row, col)] += *val;
                    }
                }
            }
            // B·M(p) + M(p)·B term.
            if (2..=n).contains(&p) {
                for (col, &(k, a, bb)) in unknowns.iter().enumerate() {
                    if k != p {
                        continue;
                    }
                    let e = basis_matrix(a, bb);
                    let image = b.dot(&e) + e.dot(&b);
                    for (row, val) in image.iter().enumerate() {
                        a_mat[(block + row, col)] += *val;
                    }
                }
            } else if p == 1 {
                // M(1) = 1 contributes B·1 + 1·B = 2B to the right side.
                for (row, val) in b.iter().enumerate() {
                    rhs[block + row] -= 2.0 * val;
                }
            }
        }

        let solution = a_mat.least_squares(&rhs)?;
        let rank = solution.rank as usize;
        let x = solution.solution;
        let residual = {
            let r = a_mat.dot(&x) - &rhs;
            r.iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let b_scale = max_abs_real(&b).max(1.0);
        if rank < cols || residual > 1e-9 * b_scale {
            return Err(Error::SolutionFamilyDimension {
                found: cols - rank + n,
                expected: n,
            });
        }

        let mut coeffs = vec![Array2::<f64>::zeros((n, n)); n];
        coeffs[0] = Array2::eye(n);
        for (col, &(k, a, bb)) in unknowns.iter().enumerate() {
            coeffs[k - 1][(a - 1, bb - 1)] += x[col];
            if a != bb {
                coeffs[k - 1][(bb - 1, a - 1)] += x[col];
            }
        }
        Ok(Self { n, coeffs })
    }

    /// Dimension `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient matrix `M(j)`, `j = 1..N`.
    pub fn coefficient(&self, j: usize) -> Result<&Array2<f64>> {
        self.coeffs
            .get(j.wrapping_sub(1))
            .ok_or(Error::IndexOutOfRange {
                index: j,
                size: self.n,
            })
    }

    /// Banded coefficient-array entry `α_{i,j}(k) = M(k)[j+i−1, j+k−i]`
    /// (all indices 1-based).
    pub fn alpha_coefficient(&self, k: usize, i: usize, j: usize) -> Result<f64> {
        let m = self.coefficient(k)?;
        let row = j + i - 1;
        let col = j + k - i;
        if row == 0 || col == 0 || row > self.n || col > self.n || i > k || j > self.n - k + 1 {
            return Err(Error::IndexOutOfRange {
                index: row.max(col),
                size: self.n,
            });
        }
        Ok(m[(row - 1, col - 1)])
    }

    /// Evaluate `Θ(τ)`.
    pub fn theta(&self, tau: f64) -> Array2<f64> {
        let mut acc = Array2::zeros((self.n, self.n));
        let mut power = 1.0;
        for m in &self.coeffs {
            acc.scaled_add(power, m);
            power *= -tau;
        }
        acc
    }

    /// Evaluate `dΘ/dτ`.
    pub fn theta_dtau(&self, tau: f64) -> Array2<f64> {
        let mut acc = Array2::zeros((self.n, self.n));
        let mut power = 1.0; // (−τ)^(j−2), starting at j = 2
        for (jm1, m) in self.coeffs.iter().enumerate().skip(1) {
            acc.scaled_add(-(jm1 as f64) * power, m);
            power *= -tau;
        }
        acc
    }

    /// The metric at coupling `τ`, with spectrum and positivity flags.
    pub fn metric_at(&self, tau: f64) -> Result<Metric> {
        Metric::from_matrix(self.theta(tau), tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn binomial(n: usize, k: i64) -> f64 {
        if k < 0 || k as usize > n {
            return 0.0;
        }
        let k = (k as usize).min(n - k as usize);
        let mut acc = 1.0;
        for i in 0..k {
            acc = acc * (n - i) as f64 / (i + 1) as f64;
        }
        acc
    }

    /// The alternating binomial sum the closed form telescopes from,
    /// evaluated literally (accurate only away from `|τ| = 1`).
    fn binomial_sum_form(n: usize, tau: f64) -> Vec<f64> {
        (1..=n)
            .map(|k| {
                let mut theta = 0.0;
                let mut tau_pow = 1.0;
                for m in 1..=n {
                    let mut c = 0.0;
                    for p in 1..=k {
                        let sign = if (p - 1) % 2 == 0 { 1.0 } else { -1.0 };
                        c += sign
                            * binomial(k - 1, p as i64 - 1)
                            * binomial(n - k, m as i64 - p as i64);
                    }
                    theta += c * tau_pow;
                    tau_pow *= tau;
                }
                theta
            })
            .collect()
    }

    #[test]
    fn closed_form_matches_binomial_sum() {
        for n in 2..=8 {
            for &tau in &[0.0, 0.1, 0.5, -0.3, -0.6, 0.75] {
                let got = eigenvalues_closed_form(n, tau).unwrap();
                let sum = binomial_sum_form(n, tau);
                for (a, b) in got.iter().zip(&sum) {
                    assert_abs_diff_eq!(a, b, epsilon = 1e-12 * (1.0 + b.abs()));
                }
            }
        }
    }

    #[test]
    fn closed_form_frozen_values() {
        let two = eigenvalues_closed_form(2, 0.5).unwrap();
        assert_abs_diff_eq!(two[0], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(two[1], 0.5, epsilon = 1e-14);
        let three = eigenvalues_closed_form(3, 0.5).unwrap();
        assert_abs_diff_eq!(three[0], 2.25, epsilon = 1e-14);
        assert_abs_diff_eq!(three[1], 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(three[2], 0.25, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_metric_two_level_coefficients() {
        let pm = PolynomialMetric::build(2).unwrap();
        let m2 = pm.coefficient(2).unwrap();
        assert_abs_diff_eq!(m2[(0, 1)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m2[(1, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m2[(0, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m2[(1, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn polynomial_metric_three_level_coefficients() {
        let pm = PolynomialMetric::build(3).unwrap();
        let m2 = pm.coefficient(2).unwrap();
        let m3 = pm.coefficient(3).unwrap();
        let s = std::f64::consts::SQRT_2;
        let expect2 = array![[0.0, s, 0.0], [s, 0.0, s], [0.0, s, 0.0]];
        let expect3 = array![[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
        for (got, want) in m2.iter().zip(expect2.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        for (got, want) in m3.iter().zip(expect3.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn polynomial_metric_four_level_second_coefficient() {
        let pm = PolynomialMetric::build(4).unwrap();
        let m2 = pm.coefficient(2).unwrap();
        let s3 = 3.0f64.sqrt();
        assert_abs_diff_eq!(m2[(0, 1)], s3, epsilon = 1e-12);
        assert_abs_diff_eq!(m2[(1, 2)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m2[(2, 3)], s3, epsilon = 1e-12);
        assert_abs_diff_eq!(m2[(0, 2)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m2[(0, 3)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn alpha_accessor_reads_banded_entries() {
        let pm = PolynomialMetric::build(3).unwrap();
        // k = 2: alpha_{1,j}(2) sits at (j, j+1).
        assert_abs_diff_eq!(
            pm.alpha_coefficient(2, 1, 1).unwrap(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        assert!(pm.alpha_coefficient(2, 3, 1).is_err());
    }

    #[test]
    fn coefficients_vanish_outside_support() {
        for n in [3, 5, 8] {
            let pm = PolynomialMetric::build(n).unwrap();
            for k in 2..=n {
                let m = pm.coefficient(k).unwrap();
                for a in 1..=n {
                    for b in 1..=n {
                        if !in_support(n, k, a, b) && !in_support(n, k, b, a) {
                            assert!(
                                m[(a - 1, b - 1)].abs() < 1e-10,
                                "N={n} M({k})[{a},{b}] = {}",
                                m[(a - 1, b - 1)]
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn metric_two_level_frozen_value() {
        let pm = PolynomialMetric::build(2).unwrap();
        let theta = pm.theta(0.5);
        assert_abs_diff_eq!(theta[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(theta[(0, 1)], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(theta[(1, 0)], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(theta[(1, 1)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn metric_three_level_closed_matrix() {
        // Θ(τ) = [[1, −√2τ, τ²], [−√2τ, 1+τ², −√2τ], [τ², −√2τ, 1]]
        let pm = PolynomialMetric::build(3).unwrap();
        let tau = 0.37;
        let s = std::f64::consts::SQRT_2;
        let theta = pm.theta(tau);
        let want = array![
            [1.0, -s * tau, tau * tau],
            [-s * tau, 1.0 + tau * tau, -s * tau],
            [tau * tau, -s * tau, 1.0]
        ];
        for (a, b) in theta.iter().zip(want.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn metric_is_identity_at_zero_coupling() {
        for n in [2, 4, 7] {
            let pm = PolynomialMetric::build(n).unwrap();
            let theta = pm.theta(0.0);
            for a in 0..n {
                for b in 0..n {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(theta[(a, b)], want, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn theta_dtau_matches_finite_differences() {
        let pm = PolynomialMetric::build(5).unwrap();
        let tau = 0.43;
        let h = 1e-6;
        let fd = (&pm.theta(tau + h) - &pm.theta(tau - h)) / (2.0 * h);
        let an = pm.theta_dtau(tau);
        for (a, b) in an.iter().zip(fd.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn pointwise_identity_at_zero_coupling() {
        let pm = PolynomialMetric::build(4).unwrap();
        let _ = pm;
        let r = crate::model::ladder_diagonal(4);
        let metric = solve_metric_pointwise(&r, 0.0).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(metric.matrix[(a, b)], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn pointwise_two_level_frozen_value() {
        let model = crate::model::RadiusModel::new(
            2,
            crate::schedule::Schedule::Frozen {
                tau: 0.5,
                sigma: 0.0,
            },
        )
        .unwrap();
        let r = model.radius(0.0).unwrap();
        let metric = solve_metric_pointwise(&r, 0.5).unwrap();
        assert_abs_diff_eq!(metric.matrix[(0, 1)], -0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(metric.matrix[(0, 0)], 1.0, epsilon = 1e-10);
        assert!(metric.positive);
    }

    #[test]
    fn pointwise_rejects_exceptional_point() {
        let model = crate::model::RadiusModel::new(
            2,
            crate::schedule::Schedule::Frozen {
                tau: 1.0,
                sigma: 0.0,
            },
        )
        .unwrap();
        let r = model.radius(0.0).unwrap();
        match solve_metric_pointwise(&r, 1.0) {
            Err(Error::DegenerateMetric { .. }) => {}
            other => panic!("expected degenerate-metric refusal, got {other:?}"),
        }
    }

    #[test]
    fn pointwise_rejects_complex_spectrum() {
        let model = crate::model::RadiusModel::new(
            3,
            crate::schedule::Schedule::Frozen {
                tau: 1.2,
                sigma: 0.0,
            },
        )
        .unwrap();
        let r = model.radius(0.0).unwrap();
        match solve_metric_pointwise(&r, 1.2) {
            Err(Error::ComplexSpectrum { .. }) => {}
            other => panic!("expected complex-spectrum refusal, got {other:?}"),
        }
    }

    #[test]
    fn positivity_flag_tracks_coupling() {
        let pm = PolynomialMetric::build(4).unwrap();
        assert!(pm.metric_at(0.5).unwrap().positive);
        assert!(pm.metric_at(-0.5).unwrap().positive);
        assert!(!pm.metric_at(1.0).unwrap().positive);
        assert!(!pm.metric_at(-1.0).unwrap().positive);
        assert!(!pm.metric_at(1.3).unwrap().positive);
    }

    #[test]
    fn shift_never_enters_the_metric() {
        // The Dieudonné condition cancels σ·1 exactly, so wildly different
        // shifts must give the same pointwise metric.
        for &sigma in &[0.0, 3.7, -12.0] {
            let model = crate::model::RadiusModel::new(
                3,
                crate::schedule::Schedule::Frozen { tau: 0.6, sigma },
            )
            .unwrap();
            let r = model.radius(0.0).unwrap();
            let metric = solve_metric_pointwise(&r, 0.6).unwrap();
            let reference = PolynomialMetric::build(3).unwrap().theta(0.6);
            for (a, b) in metric.matrix.iter().zip(reference.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }
}
