//! The solvable `N`-level radius-matrix family.
//!
//! The model is built from two fixed real matrices: a traceless integer
//! diagonal `D = diag(2k − N − 1)` and an antisymmetric ladder coupling
//! `B` with `B[k, k+1] = √(k(N−k)) = −B[k+1, k]`.  At time `t` the radius
//! operator is
//!
//! ```text
//!     R(t) = D + τ(t)·B + σ(t)·1.
//! ```
//!
//! For `|τ| < 1` the spectrum is real and equidistant,
//! `r_k = σ + (2k − N − 1)·√(1 − τ²)`; at `|τ| = 1` all `N` eigenvalues
//! coalesce into a single exceptional point of maximal order, and beyond it
//! they move into the complex plane.  With the standard schedule the EP
//! sits at `t = 0` and the spectrum fans out like `√t` — the Big-Bang
//! pattern this family was designed to exhibit.

use ndarray::Array2;
use ndarray_linalg::SVD;

use crate::error::{Error, Result};
use crate::linalg::{general_eig, min_pairwise_gap};
use crate::schedule::Schedule;
use crate::C64;

/// Relative tolerance deciding whether a numerically computed spectrum
/// counts as real: `max |Im r| ≤ REALITY_RTOL · max |r|`.
pub const REALITY_RTOL: f64 = 1e-10;

/// An `N`-level radius-matrix model with its parameter schedule.
#[derive(Debug, Clone)]
pub struct RadiusModel {
    n: usize,
    schedule: Schedule,
}

/// Eigenvalue diagnostics of `R(t)` at one time.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Evaluation time.
    pub t: f64,
    /// Eigenvalues sorted by real part, then imaginary part.
    pub eigenvalues: Vec<C64>,
    /// Whether the spectrum is real within [`REALITY_RTOL`].
    pub is_real: bool,
    /// Smallest pairwise eigenvalue distance.
    pub min_gap: f64,
    /// 2-norm condition number of the eigenvector matrix; explodes near an
    /// exceptional point where eigenvectors coalesce.
    pub eigvec_condition: f64,
}

/// Least-squares fit of `log(min_gap)` against `log t` near the EP.
#[derive(Debug, Clone)]
pub struct EpScalingFit {
    /// Fitted scaling exponent (1/2 for a fully coalescing EP of this
    /// family, independent of `N`).
    pub exponent: f64,
    /// Fitted intercept, `log` of the gap prefactor.
    pub intercept: f64,
    /// The `(t, min_gap)` pairs that entered the fit.
    pub samples: Vec<(f64, f64)>,
}

/// The traceless integer diagonal of the family.
pub fn ladder_diagonal(n: usize) -> Array2<f64> {
    let mut d = Array2::zeros((n, n));
    for k in 1..=n {
        d[(k - 1, k - 1)] = (2 * k) as f64 - (n as f64) - 1.0;
    }
    d
}

/// The antisymmetric ladder coupling of the family.
pub fn ladder_coupling(n: usize) -> Array2<f64> {
    let mut b = Array2::zeros((n, n));
    for k in 1..n {
        let c = ((k * (n - k)) as f64).sqrt();
        b[(k - 1, k)] = c;
        b[(k, k - 1)] = -c;
    }
    b
}

impl RadiusModel {
    /// Build a model of dimension `n ≥ 2` with the given schedule.
    pub fn new(n: usize, schedule: Schedule) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        Ok(Self { n, schedule })
    }

    /// Model with the standard Big-Bang schedule.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, Schedule::Standard { n })
    }

    /// Dimension `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The parameter schedule.
    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// Radius matrix from explicit parameters, bypassing the schedule.
    pub fn radius_from_params(&self, tau: f64, sigma: f64) -> Array2<f64> {
        let mut r = ladder_diagonal(self.n);
        r.scaled_add(tau, &ladder_coupling(self.n));
        for k in 0..self.n {
            r[(k, k)] += sigma;
        }
        r
    }

    /// Radius matrix `R(t) = D + τ(t)B + σ(t)·1`.
    pub fn radius(&self, t: f64) -> Result<Array2<f64>> {
        let (tau, sigma) = self.schedule.sample(t)?;
        Ok(self.radius_from_params(tau, sigma))
    }

    /// Eigenvalue diagnostics at time `t`.
    pub fn spectrum(&self, t: f64) -> Result<SpectrumReport> {
        let r = self.radius(t)?;
        let (vals, vecs) = general_eig(&r)?;
        let mut eigenvalues: Vec<C64> = vals.to_vec();
        eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

        let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let max_imag = eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let is_real = max_imag <= REALITY_RTOL * scale;

        let min_gap = min_pairwise_gap(&eigenvalues);

        let (_, sv, _) = vecs.svd(false, false)?;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let eigvec_condition = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };

        Ok(SpectrumReport {
            t,
            eigenvalues,
            is_real,
            min_gap,
            eigvec_condition,
        })
    }

    /// Fit the near-EP gap-opening exponent from `min_gap(t) ∝ t^α`.
    ///
    /// Requires at least four distinct sample times in `(0, 0.2]`; the fit
    /// runs on `log min_gap` versus `log t` by ordinary least squares.
    pub fn ep_scaling_fit(&self, sample_times: &[f64]) -> Result<EpScalingFit> {
        if sample_times.len() < 4 {
            return Err(Error::InsufficientSamples {
                needed: 4,
                got: sample_times.len(),
            });
        }
        let mut sorted = sample_times.to_vec();
        sorted.sort_by(f64::total_cmp);
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InsufficientSamples {
                    needed: 4,
                    got: sorted.len() - 1,
                });
            }
        }
        for &t in sample_times {
            if !(t > 0.0 && t <= 0.2) {
                return Err(Error::SampleOutOfRange(t));
            }
        }

        let mut samples = Vec::with_capacity(sample_times.len());
        for &t in sample_times {
            let report = self.spectrum(t)?;
            samples.push((t, report.min_gap));
        }

        // Ordinary least squares on (log t, log gap).
        let xs: Vec<f64> = samples.iter().map(|(t, _)| t.ln()).collect();
        let ys: Vec<f64> = samples.iter().map(|(_, g)| g.ln()).collect();
        let m = xs.len() as f64;
        let mean_x = xs.iter().sum::<f64>() / m;
        let mean_y = ys.iter().sum::<f64>() / m;
        let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
        let sxy: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mean_x) * (y - mean_y))
            .sum();
        let exponent = sxy / sxx;
        let intercept = mean_y - exponent * mean_x;

        Ok(EpScalingFit {
            exponent,
            intercept,
            samples,
        })
    }
}
