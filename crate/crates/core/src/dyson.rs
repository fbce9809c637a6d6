//! Hermitian Dyson map `Ω = Θ^{1/2}`, its time derivative, and the
//! Coriolis operator `Σ = i Ω⁻¹ Ω̇`.
//!
//! Among all factorisations `Θ = Ω†Ω` the Hermitian positive root is the
//! canonical gauge choice: it makes the map to the textbook representation
//! unique and keeps every intermediate object real.  The time derivative
//! `Ω̇` is obtained from the Sylvester equation
//!
//! ```text
//!     Ω Ω̇ + Ω̇ Ω = Θ̇,
//! ```
//!
//! solved entrywise in the eigenbasis of `Θ` (the denominators are sums of
//! pairs of positive square roots, so the solve is well conditioned away
//! from the exceptional points).

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::sym_eig;
use crate::C64;

/// Near-EP refusal margin for the square root: the factorisation is
/// refused when the smallest metric eigenvalue drops below
/// `NEAR_EP_RTOL · trace/N`.
pub const NEAR_EP_RTOL: f64 = 1e-10;

fn positive_eig(theta: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (vals, vecs) = sym_eig(theta)?;
    let n = theta.nrows() as f64;
    let trace: f64 = vals.iter().sum();
    let cutoff = NEAR_EP_RTOL * trace.abs() / n;
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= cutoff || min.is_nan() {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: min,
            cutoff,
        });
    }
    Ok((vals.to_vec(), vecs))
}

/// Hermitian square root of a positive definite metric along with its
/// inverse: `Θ ↦ (Ω, Ω⁻¹)` with `Ω = Ωᵀ > 0`, `Ω² = Θ`.
///
/// Fails with [`Error::NotPositiveDefinite`] when `Θ` is within
/// [`NEAR_EP_RTOL`] of losing positivity (the near-EP regime where the
/// physical Hilbert space collapses).
pub fn sqrt_metric(theta: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    let (vals, vecs) = positive_eig(theta)?;
    let n = theta.nrows();
    let mut omega = Array2::zeros((n, n));
    let mut omega_inv = Array2::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            let mut s = 0.0;
            let mut si = 0.0;
            for (k, &w) in vals.iter().enumerate() {
                let root = w.sqrt();
                let uu = vecs[(a, k)] * vecs[(b, k)];
                s += root * uu;
                si += uu / root;
            }
            omega[(a, b)] = s;
            omega_inv[(a, b)] = si;
        }
    }
    Ok((omega, omega_inv))
}

/// The Dyson map and its derivative at a single instant.
#[derive(Debug, Clone)]
pub struct DysonMap {
    /// Coupling the underlying metric was built at.
    pub tau: f64,
    /// Hermitian positive root `Ω`.
    pub omega: Array2<f64>,
    /// Its inverse `Ω⁻¹`.
    pub omega_inv: Array2<f64>,
    /// Time derivative `Ω̇` (Sylvester solution).
    pub omega_dot: Array2<f64>,
}

impl DysonMap {
    /// Factorise `Θ` and differentiate the root given `Θ̇ = dΘ/dt`.
    pub fn from_metric(theta: &Array2<f64>, theta_dot: &Array2<f64>, tau: f64) -> Result<Self> {
        let (vals, vecs) = positive_eig(theta)?;
        let n = theta.nrows();
        let roots: Vec<f64> = vals.iter().map(|w| w.sqrt()).collect();

        let mut omega = Array2::zeros((n, n));
        let mut omega_inv = Array2::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                let mut si = 0.0;
                for (k, &root) in roots.iter().enumerate() {
                    let uu = vecs[(a, k)] * vecs[(b, k)];
                    s += root * uu;
                    si += uu / root;
                }
                omega[(a, b)] = s;
                omega_inv[(a, b)] = si;
            }
        }

        // Sylvester solve in the eigenbasis of Θ:  Ω̇'_{ab} = Θ̇'_{ab}/(ω_a+ω_b).
        let theta_dot_eig = vecs.t().dot(theta_dot).dot(&vecs);
        let root_max = roots.iter().cloned().fold(0.0, f64::max);
        let mut omega_dot_eig = Array2::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let denom = roots[a] + roots[b];
                let tol = f64::EPSILON * root_max;
                if denom <= tol {
                    return Err(Error::NearSingularRoot { denom, tol });
                }
                omega_dot_eig[(a, b)] = theta_dot_eig[(a, b)] / denom;
            }
        }
        let omega_dot = vecs.dot(&omega_dot_eig).dot(&vecs.t());

        Ok(Self {
            tau,
            omega,
            omega_inv,
            omega_dot,
        })
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    /// The Coriolis operator `Σ = i Ω⁻¹ Ω̇` generated by this map.
    pub fn coriolis(&self) -> Coriolis {
        Coriolis {
            real_factor: self.omega_inv.dot(&self.omega_dot),
        }
    }
}

/// The Coriolis operator `Σ = i Ω⁻¹ Ω̇`.
///
/// For the real models in this crate `Ω` and `Ω̇` are real symmetric, so
/// `Σ` is `i` times a real matrix; the real factor is stored exactly and
/// the complex matrix is materialised on demand.  `Σ` satisfies the
/// metric-compatibility identity `ΘΣ − Σ†Θ = iΘ̇`.
#[derive(Debug, Clone)]
pub struct Coriolis {
    /// Real factor `S = Ω⁻¹Ω̇` in `Σ = iS`.
    pub real_factor: Array2<f64>,
}

impl Coriolis {
    /// The complex matrix `Σ = iS`.
    pub fn matrix(&self) -> Array2<C64> {
        self.real_factor.mapv(|x| C64::new(0.0, x))
    }

    /// Frobenius norm `‖Σ‖ = ‖S‖`.
    pub fn norm(&self) -> f64 {
        self.real_factor.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.real_factor.nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro_norm_real, max_abs_real};
    use crate::metric::PolynomialMetric;
    use crate::schedule::Schedule;
    use approx::assert_abs_diff_eq;

    fn theta_and_dot(n: usize, t: f64) -> (Array2<f64>, Array2<f64>, f64) {
        // Standard schedule: τ = 1 − t, so dΘ/dt = −dΘ/dτ.
        let pm = PolynomialMetric::build(n).unwrap();
        let sched = Schedule::Standard { n };
        let tau = sched.tau(t);
        let tau_dot = sched.tau_dot(t);
        (pm.theta(tau), pm.theta_dtau(tau).mapv(|x| x * tau_dot), tau)
    }

    #[test]
    fn square_of_root_reproduces_metric() {
        let (theta, _, _) = theta_and_dot(5, 0.3);
        let (omega, omega_inv) = sqrt_metric(&theta).unwrap();
        let diff = &omega.dot(&omega) - &theta;
        assert!(max_abs_real(&diff) < 1e-12);
        let eye = omega.dot(&omega_inv);
        for a in 0..5 {
            for b in 0..5 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(eye[(a, b)], want, epsilon = 1e-12);
            }
        }
        // Hermitian gauge: the root is symmetric.
        let asym = &omega - &omega.t().to_owned();
        assert!(max_abs_real(&asym) < 1e-13);
    }

    #[test]
    fn root_derivative_solves_sylvester_equation() {
        let (theta, theta_dot, tau) = theta_and_dot(6, 0.4);
        let map = DysonMap::from_metric(&theta, &theta_dot, tau).unwrap();
        let resid = &map.omega.dot(&map.omega_dot) + &map.omega_dot.dot(&map.omega) - &theta_dot;
        assert!(max_abs_real(&resid) < 1e-12 * fro_norm_real(&theta_dot).max(1.0));
    }

    #[test]
    fn root_derivative_matches_finite_differences() {
        let n = 4;
        let t = 0.55;
        let h = 1e-6;
        let (theta, theta_dot, tau) = theta_and_dot(n, t);
        let map = DysonMap::from_metric(&theta, &theta_dot, tau).unwrap();
        let (op, _, _) = theta_and_dot(n, t + h);
        let (om, _, _) = theta_and_dot(n, t - h);
        let fd = (&sqrt_metric(&op).unwrap().0 - &sqrt_metric(&om).unwrap().0) / (2.0 * h);
        for (a, b) in map.omega_dot.iter().zip(fd.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-7);
        }
    }

    #[test]
    fn refuses_near_exceptional_point() {
        // N = 6 at t = 1e-3: smallest metric eigenvalue ~ (2t)^5 ≈ 3e-14,
        // below the relative cutoff.
        let (theta, theta_dot, tau) = theta_and_dot(6, 1e-3);
        match DysonMap::from_metric(&theta, &theta_dot, tau) {
            Err(Error::NotPositiveDefinite { .. }) => {}
            other => panic!("expected positivity refusal, got {other:?}"),
        }
    }

    #[test]
    fn coriolis_satisfies_metric_compatibility() {
        // ΘΣ − Σ†Θ = iΘ̇ reduces to ΘS + SᵀΘ = Θ̇ for the real factor.
        let (theta, theta_dot, tau) = theta_and_dot(5, 0.35);
        let map = DysonMap::from_metric(&theta, &theta_dot, tau).unwrap();
        let s = map.coriolis().real_factor;
        let resid = &theta.dot(&s) + &s.t().dot(&theta) - &theta_dot;
        assert!(max_abs_real(&resid) < 1e-11);
    }

    #[test]
    fn coriolis_vanishes_for_frozen_coupling() {
        let pm = PolynomialMetric::build(3).unwrap();
        let theta = pm.theta(0.5);
        let zero = Array2::zeros((3, 3));
        let map = DysonMap::from_metric(&theta, &zero, 0.5).unwrap();
        assert!(map.coriolis().norm() < 1e-15);
    }

    #[test]
    fn coriolis_matrix_is_purely_imaginary() {
        let (theta, theta_dot, tau) = theta_and_dot(4, 0.6);
        let map = DysonMap::from_metric(&theta, &theta_dot, tau).unwrap();
        let sigma = map.coriolis().matrix();
        for z in sigma.iter() {
            assert_eq!(z.re, 0.0);
        }
        assert!(map.coriolis().norm() > 1e-3);
    }
}
