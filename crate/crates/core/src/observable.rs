//! Observables, biorthonormal eigensystems, dyadic projectors and
//! expectation values.
//!
//! In the interaction picture an operator `Λ` qualifies as an observable
//! when it is quasi-Hermitian with respect to the instantaneous metric,
//! `Λ†Θ = ΘΛ`; its eigenvalues are then real and its left/right
//! eigenvectors form a biorthonormal system
//!
//! ```text
//!     ⟨⟨m|k⟩ = δ_{mk},      Σ_m |m⟩⟨⟨m| = 1,      Λ = Σ_m λ_m |m⟩⟨⟨m|.
//! ```
//!
//! Two constructions of the system are provided: [`biorthonormalize`]
//! derives the left vectors from the metric (`|m⟩⟩ ∝ Θ|m⟩`, the stable
//! route when a positive metric is available) and
//! [`biorthonormalize_direct`] pairs left and right eigenvectors of the
//! operator alone, degrading gracefully towards an exceptional point where
//! the pairing overlap `⟨⟨m|m⟩` — the standard EP diagnostic — vanishes.

use ndarray::{Array1, Array2};

use crate::dyson::{DysonMap, NEAR_EP_RTOL};
use crate::error::{Error, Result};
use crate::evolve::StatePair;
use crate::linalg::{
    fro_norm_real, general_eig, inner, max_abs_real, min_pairwise_gap, sym_eig, to_complex,
    vec_norm,
};
use crate::model::REALITY_RTOL;
use crate::system::System;
use crate::C64;

/// Relative eigenvalue-gap threshold below which a spectrum counts as
/// degenerate and no biorthonormal system is constructed.
pub const DEGENERACY_RTOL: f64 = 1e-10;

/// Relative self-orthogonality threshold: a left/right pair with
/// `|⟨⟨m|m⟩| ≤ SELF_ORTHOGONALITY_RTOL · ‖⟨⟨m|‖·‖|m⟩‖` is refused.
pub const SELF_ORTHOGONALITY_RTOL: f64 = 1e-12;

/// Relative pseudo-norm threshold below which expectation values are
/// considered undefined.
pub const VANISHING_NORM_RTOL: f64 = 1e-12;

/// A (real) observable together with its metric-compatibility residual.
#[derive(Debug, Clone)]
pub struct Observable {
    /// The operator matrix `Λ`.
    pub matrix: Array2<f64>,
    /// Relative quasi-Hermiticity residual `‖ΛᵀΘ − ΘΛ‖/(‖Λ‖‖Θ‖)` against
    /// the metric it was constructed with.
    pub residual: f64,
}

impl Observable {
    /// The matrix as a complex array.
    pub fn complex_matrix(&self) -> Array2<C64> {
        to_complex(&self.matrix)
    }

    /// Expectation value in a conjugate-pair state.
    pub fn expectation(&self, pair: &StatePair) -> Result<Expectation> {
        expectation(&self.complex_matrix(), pair)
    }
}

fn quasi_hermiticity_residual(lambda: &Array2<f64>, theta: &Array2<f64>) -> f64 {
    let resid = &lambda.t().dot(theta) - &theta.dot(lambda);
    let scale = fro_norm_real(lambda) * fro_norm_real(theta);
    fro_norm_real(&resid) / scale.max(1e-300)
}

/// Dress a Hermitian textbook operator into an interaction-picture
/// observable: `Λ = Ω⁻¹ 𝔞 Ω`.
///
/// The seed must be symmetric; the result is quasi-Hermitian with respect
/// to `Θ = Ω²` by construction and isospectral to the seed.
pub fn make_observable(seed: &Array2<f64>, dyson: &DysonMap) -> Result<Observable> {
    let n = dyson.dim();
    if seed.nrows() != n || seed.ncols() != n {
        return Err(Error::DimensionMismatch {
            got: seed.nrows().max(seed.ncols()),
            expected: n,
        });
    }
    let dev = max_abs_real(&(seed - &seed.t().to_owned()));
    let scale = max_abs_real(seed).max(1.0);
    if dev > 1e-12 * scale {
        return Err(Error::NotHermitian {
            deviation: dev,
            scale,
        });
    }
    let matrix = dyson.omega_inv.dot(&seed.dot(&dyson.omega));
    let theta = dyson.omega.dot(&dyson.omega);
    let residual = quasi_hermiticity_residual(&matrix, &theta);
    Ok(Observable { matrix, residual })
}

/// The radius operator `R(t)` as the canonical observable of the model.
pub fn radius_observable(system: &System, t: f64) -> Result<Observable> {
    let frame = system.frame(t)?;
    let residual = quasi_hermiticity_residual(&frame.radius, &frame.theta);
    Ok(Observable {
        matrix: frame.radius,
        residual,
    })
}

/// A biorthonormal left/right eigensystem.
#[derive(Debug, Clone)]
pub struct BiorthonormalSystem {
    /// Real eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Right eigenvectors `|m⟩` (unit 2-norm, deterministic phase).
    pub right: Vec<Array1<C64>>,
    /// Left eigenvectors `|m⟩⟩` scaled so that `⟨⟨m|k⟩ = δ_{mk}`.
    pub left: Vec<Array1<C64>>,
    /// Largest deviation `max_{mk} |⟨⟨m|k⟩ − δ_{mk}|` actually achieved.
    pub residual: f64,
}

impl BiorthonormalSystem {
    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `‖Σ_m |m⟩⟨⟨m| − 1‖_max`: how well the dyads resolve the identity.
    pub fn completeness_residual(&self) -> f64 {
        let n = self.dim();
        let mut sum = Array2::<C64>::zeros((n, n));
        for m in 0..n {
            for a in 0..n {
                for b in 0..n {
                    sum[(a, b)] += self.right[m][a] * self.left[m][b].conj();
                }
            }
        }
        let mut dev = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let want = if a == b {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                dev = dev.max((sum[(a, b)] - want).norm());
            }
        }
        dev
    }
}

/// Eigen-decompose with reality and gap checks; returns eigenvalues
/// (real, ascending) and the matching right eigenvectors.
fn real_sorted_eig(op: &Array2<f64>) -> Result<(Vec<f64>, Vec<Array1<C64>>)> {
    let (vals, vecs) = general_eig(op)?;
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_imag = vals.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > REALITY_RTOL * scale.max(1e-300) {
        return Err(Error::ComplexSpectrum { max_imag, scale });
    }
    let gap = min_pairwise_gap(&vals.to_vec());
    let threshold = DEGENERACY_RTOL * scale.max(1e-300);
    if gap <= threshold {
        return Err(Error::DegenerateSpectrum { gap, threshold });
    }

    let n = op.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for &k in &order {
        eigenvalues.push(vals[k].re);
        let mut v = vecs.column(k).to_owned();
        let norm = vec_norm(&v);
        v.mapv_inplace(|z| z / norm);
        // Deterministic phase: largest component real and positive.
        let lead = v
            .iter()
            .cloned()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = lead / lead.norm();
        v.mapv_inplace(|z| z / phase);
        right.push(v);
    }
    Ok((eigenvalues, right))
}

/// Build the biorthonormal system of a quasi-Hermitian operator from the
/// metric: `|m⟩⟩ = Θ|m⟩ / ⟨m|Θ|m⟩`.
///
/// Refuses when the metric has lost positivity within [`NEAR_EP_RTOL`]
/// (the duals would amplify noise unboundedly), when the spectrum is
/// complex or degenerate, or — defensively — when a pair turns out
/// self-orthogonal.
pub fn biorthonormalize(op: &Array2<f64>, theta: &Array2<f64>) -> Result<BiorthonormalSystem> {
    let n = op.nrows();
    if theta.nrows() != n || theta.ncols() != n || op.ncols() != n {
        return Err(Error::DimensionMismatch {
            got: theta.nrows().max(op.ncols()),
            expected: n,
        });
    }
    let (tvals, _) = sym_eig(theta)?;
    let trace: f64 = tvals.iter().sum();
    let cutoff = NEAR_EP_RTOL * trace.abs() / n as f64;
    let tmin = tvals.iter().cloned().fold(f64::INFINITY, f64::min);
    if tmin <= cutoff || tmin.is_nan() {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: tmin,
            cutoff,
        });
    }

    let (eigenvalues, right) = real_sorted_eig(op)?;
    let theta_c = to_complex(theta);
    let theta_scale = max_abs_real(theta);
    let mut left = Vec::with_capacity(n);
    for (m, v) in right.iter().enumerate() {
        let tv = theta_c.dot(v);
        let c = inner(v, &tv); // real for symmetric Θ
        if c.norm() <= SELF_ORTHOGONALITY_RTOL * theta_scale {
            return Err(Error::SelfOrthogonal {
                index: m,
                value: c.norm(),
                threshold: SELF_ORTHOGONALITY_RTOL * theta_scale,
            });
        }
        left.push(tv.mapv(|z| z / c.conj()));
    }
    assemble(eigenvalues, right, left)
}

/// Build the biorthonormal system from the operator alone, pairing right
/// eigenvectors of `Λ` with eigenvectors of `Λᵀ`.
///
/// Needs no metric, so it remains usable where positivity has broken
/// down; instead it refuses via [`Error::SelfOrthogonal`] when a pair
/// overlap `|⟨⟨m|m⟩|/(‖⟨⟨m|‖·‖|m⟩‖)` — the canonical exceptional-point
/// indicator — falls below [`SELF_ORTHOGONALITY_RTOL`].
pub fn biorthonormalize_direct(op: &Array2<f64>) -> Result<BiorthonormalSystem> {
    let (eigenvalues, right) = real_sorted_eig(op)?;
    let (_, raw_left) = real_sorted_eig(&op.t().to_owned())?;
    let n = eigenvalues.len();
    let mut left = Vec::with_capacity(n);
    for m in 0..n {
        let l = &raw_left[m];
        let v = &right[m];
        let c = inner(l, v);
        let rel = c.norm() / (vec_norm(l) * vec_norm(v)).max(1e-300);
        if rel <= SELF_ORTHOGONALITY_RTOL {
            return Err(Error::SelfOrthogonal {
                index: m,
                value: rel,
                threshold: SELF_ORTHOGONALITY_RTOL,
            });
        }
        left.push(l.mapv(|z| z / c.conj()));
    }
    assemble(eigenvalues, right, left)
}

fn assemble(
    eigenvalues: Vec<f64>,
    right: Vec<Array1<C64>>,
    left: Vec<Array1<C64>>,
) -> Result<BiorthonormalSystem> {
    let mut residual = 0.0_f64;
    for (m, l) in left.iter().enumerate() {
        for (k, r) in right.iter().enumerate() {
            let want = if m == k { 1.0 } else { 0.0 };
            residual = residual.max((inner(l, r) - want).norm());
        }
    }
    Ok(BiorthonormalSystem {
        eigenvalues,
        right,
        left,
        residual,
    })
}

/// The dyadic spectral projector `P_m = |m⟩⟨⟨m|`.
///
/// The projectors are idempotent, mutually annihilating, resolve the
/// identity and reconstruct the operator as `Σ_m λ_m P_m`.
pub fn dyadic_projector(system: &BiorthonormalSystem, m: usize) -> Result<Array2<C64>> {
    let n = system.dim();
    if m >= n {
        return Err(Error::IndexOutOfRange { index: m, size: n });
    }
    let v = &system.right[m];
    let l = &system.left[m];
    Ok(Array2::from_shape_fn((n, n), |(a, b)| v[a] * l[b].conj()))
}

/// An expectation value together with the pseudo-norm it was divided by.
#[derive(Debug, Clone, Copy)]
pub struct Expectation {
    /// `⟨⟨ψ|A|ψ⟩ / ⟨⟨ψ|ψ⟩`.
    pub value: C64,
    /// The conserved pseudo-norm `⟨⟨ψ|ψ⟩`.
    pub norm: C64,
}

/// Physical expectation value of an operator in a conjugate-pair state.
///
/// Fails with [`Error::VanishingNorm`] when the pseudo-norm is too small
/// relative to the state magnitudes for the quotient to mean anything.
pub fn expectation(op: &Array2<C64>, pair: &StatePair) -> Result<Expectation> {
    let n = pair.dim();
    if op.nrows() != n || op.ncols() != n {
        return Err(Error::DimensionMismatch {
            got: op.nrows().max(op.ncols()),
            expected: n,
        });
    }
    let norm = pair.physical_norm();
    let threshold = VANISHING_NORM_RTOL * vec_norm(&pair.left) * vec_norm(&pair.ket);
    if norm.norm() <= threshold {
        return Err(Error::VanishingNorm {
            value: norm.norm(),
            threshold,
        });
    }
    let value = inner(&pair.left, &op.dot(&pair.ket)) / norm;
    Ok(Expectation { value, norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::system::System;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn standard_frame(n: usize, t: f64) -> (System, crate::system::Frame) {
        let sys = System::standard(n).unwrap();
        let frame = sys.frame(t).unwrap();
        (sys, frame)
    }

    #[test]
    fn dressed_observable_is_isospectral_to_its_seed() {
        let (_, frame) = standard_frame(4, 0.4);
        let seed = array![
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 2.0, 0.0, 0.0],
            [0.0, 0.0, 3.0, 0.0],
            [0.0, 0.0, 0.0, 4.0]
        ];
        let obs = make_observable(&seed, &frame.dyson).unwrap();
        assert!(obs.residual < 1e-13, "residual {}", obs.residual);
        let (vals, _) = general_eig(&obs.matrix).unwrap();
        let mut res: Vec<f64> = vals.iter().map(|z| z.re).collect();
        res.sort_by(f64::total_cmp);
        for (got, want) in res.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-10);
        }
    }

    #[test]
    fn dressing_rejects_non_symmetric_seeds() {
        let (_, frame) = standard_frame(2, 0.5);
        let seed = array![[0.0, 1.0], [0.0, 0.0]];
        assert!(matches!(
            make_observable(&seed, &frame.dyson),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn radius_is_metric_compatible() {
        let sys = System::standard(5).unwrap();
        for &t in &[0.2, 0.5, 1.1, 1.8] {
            let obs = radius_observable(&sys, t).unwrap();
            assert!(obs.residual < 1e-13, "t = {t}: residual {}", obs.residual);
        }
    }

    #[test]
    fn biorthonormal_system_of_the_radius() {
        let (sys, frame) = standard_frame(4, 0.4);
        let bs = biorthonormalize(&frame.radius, &frame.theta).unwrap();
        assert!(bs.residual < 1e-12, "residual {}", bs.residual);
        assert!(bs.completeness_residual() < 1e-12);
        // Eigenvalues match the closed form σ + (2k−N−1)√(1−τ²).
        let report = sys.model().spectrum(0.4).unwrap();
        for (got, want) in bs.eigenvalues.iter().zip(report.eigenvalues.iter()) {
            assert_abs_diff_eq!(got, &want.re, epsilon = 1e-10);
        }
    }

    #[test]
    fn metric_and_direct_constructions_agree() {
        let (_, frame) = standard_frame(3, 0.6);
        let a = biorthonormalize(&frame.radius, &frame.theta).unwrap();
        let b = biorthonormalize_direct(&frame.radius).unwrap();
        for m in 0..3 {
            assert_abs_diff_eq!(a.eigenvalues[m], b.eigenvalues[m], epsilon = 1e-11);
            // Same rays: the projectors must agree even if phases differ.
            let pa = dyadic_projector(&a, m).unwrap();
            let pb = dyadic_projector(&b, m).unwrap();
            assert!(max_abs(&(&pa - &pb)) < 1e-9);
        }
    }

    #[test]
    fn projectors_are_idempotent_orthogonal_and_complete() {
        let (_, frame) = standard_frame(5, 0.7);
        let bs = biorthonormalize(&frame.radius, &frame.theta).unwrap();
        let projectors: Vec<_> = (0..5).map(|m| dyadic_projector(&bs, m).unwrap()).collect();
        for (m, pm) in projectors.iter().enumerate() {
            for (k, pk) in projectors.iter().enumerate() {
                let prod = pm.dot(pk);
                let want = if m == k {
                    pm.clone()
                } else {
                    Array2::zeros((5, 5))
                };
                assert!(max_abs(&(&prod - &want)) < 1e-10, "P{m}·P{k}");
            }
        }
        // Spectral resolution of the radius itself.
        let mut resolved = Array2::<C64>::zeros((5, 5));
        for (m, pm) in projectors.iter().enumerate() {
            resolved = &resolved + &pm.mapv(|z| z * C64::new(bs.eigenvalues[m], 0.0));
        }
        assert!(max_abs(&(&resolved - &to_complex(&frame.radius))) < 1e-9);
    }

    #[test]
    fn near_ep_metric_construction_refuses() {
        // N = 6 close to the EP: the metric loses positivity within the
        // cutoff and the dual basis must not be built.
        let sys = System::standard(6).unwrap();
        let t = 1e-3;
        let tau = sys.model().schedule().tau(t);
        let radius = sys.model().radius(t).unwrap();
        let theta = sys.polynomial_metric().theta(tau);
        match biorthonormalize(&radius, &theta) {
            Err(e) if e.is_degeneracy() => {}
            other => panic!("expected degeneracy refusal, got {other:?}"),
        }
    }

    #[test]
    fn exact_ep_refuses_even_without_a_metric() {
        // At the EP the radius matrix is defective; floating point
        // scatters the coalesced eigenvalues into the complex plane, so
        // the refusal may surface as either a reality or a gap failure —
        // both are degeneracy-class errors.
        let sys = System::standard(3).unwrap();
        let radius = sys.model().radius(0.0).unwrap();
        match biorthonormalize_direct(&radius) {
            Err(e) if e.is_degeneracy() => {}
            other => panic!("expected degeneracy refusal, got {other:?}"),
        }
    }

    #[test]
    fn expectation_reproduces_eigenvalues_on_eigenstates() {
        let (_, frame) = standard_frame(4, 0.5);
        let bs = biorthonormalize(&frame.radius, &frame.theta).unwrap();
        for m in 0..4 {
            let pair = StatePair::new(bs.right[m].clone(), bs.left[m].clone()).unwrap();
            let e = expectation(&to_complex(&frame.radius), &pair).unwrap();
            assert_abs_diff_eq!(e.value.re, bs.eigenvalues[m], epsilon = 1e-10);
            assert!(e.value.im.abs() < 1e-11);
        }
    }

    #[test]
    fn expectation_refuses_vanishing_pseudo_norm() {
        let ket = Array1::from(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let left = Array1::from(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let pair = StatePair::new(ket, left).unwrap();
        let op = to_complex(&Array2::eye(2));
        assert!(matches!(
            expectation(&op, &pair),
            Err(Error::VanishingNorm { .. })
        ));
    }
}
