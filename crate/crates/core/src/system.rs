//! A radius model bundled with its reconstructed metric machinery.
//!
//! [`System`] owns the model, the polynomial metric solved once at
//! construction, and a choice of Hamiltonian.  Its central product is the
//! non-Hermitian interaction-picture generator
//!
//! ```text
//!     G(t) = H(t) − Σ(t),        Σ = i Ω⁻¹ Ω̇,
//! ```
//!
//! which drives the conjugate Schrödinger pair in [`crate::evolve`].  All
//! per-instant quantities (radius, metric, Dyson map) are collected in a
//! [`Frame`] so that one schedule sample and one eigendecomposition serve
//! every downstream consumer.

use ndarray::Array2;

use crate::dyson::{Coriolis, DysonMap};
use crate::error::{Error, Result};
use crate::linalg::{fro_norm_real, max_abs_real};
use crate::metric::PolynomialMetric;
use crate::model::RadiusModel;
use crate::C64;

/// Which Hamiltonian drives the Schrödinger pair.
#[derive(Debug, Clone)]
pub enum HamiltonianSpec {
    /// `H(t) = R(t)`, the radius operator itself (the canonical choice:
    /// quasi-Hermitian with respect to `Θ(t)` by construction).
    Radius,
    /// `H(t) = Θ(t)⁻¹·Λ̃` for a constant symmetric seed `Λ̃`; exactly
    /// quasi-Hermitian at every instant.
    HermitianSeed(Array2<f64>),
    /// A constant matrix used verbatim.  No compatibility with the metric
    /// is required — the conjugate-pair pseudo-norm is conserved for any
    /// generator — but only compatible choices give a Hermitian textbook
    /// image.
    Direct(Array2<f64>),
}

/// Everything the pipeline needs at one instant `t`.
#[derive(Debug, Clone)]
pub struct Frame {
    /// Time.
    pub t: f64,
    /// Coupling `τ(t)`.
    pub tau: f64,
    /// Shift `σ(t)`.
    pub sigma: f64,
    /// Radius matrix `R(t)`.
    pub radius: Array2<f64>,
    /// Metric `Θ(t)`.
    pub theta: Array2<f64>,
    /// Time derivative `Θ̇(t) = dΘ/dτ · τ̇`.
    pub theta_dot: Array2<f64>,
    /// Dyson map `Ω, Ω⁻¹, Ω̇` at this instant.
    pub dyson: DysonMap,
}

/// A model with its metric pipeline assembled.
#[derive(Debug, Clone)]
pub struct System {
    model: RadiusModel,
    poly: PolynomialMetric,
    hamiltonian: HamiltonianSpec,
}

impl System {
    /// Bundle a model with a Hamiltonian choice, solving the polynomial
    /// metric chain for the model dimension.
    pub fn new(model: RadiusModel, hamiltonian: HamiltonianSpec) -> Result<Self> {
        let n = model.n();
        match &hamiltonian {
            HamiltonianSpec::Radius => {}
            HamiltonianSpec::HermitianSeed(seed) => {
                check_dim(seed, n)?;
                let dev = max_abs_real(&(seed - &seed.t().to_owned()));
                let scale = max_abs_real(seed).max(1.0);
                if dev > 1e-12 * scale {
                    return Err(Error::NotHermitian {
                        deviation: dev,
                        scale,
                    });
                }
            }
            HamiltonianSpec::Direct(h) => check_dim(h, n)?,
        }
        let poly = PolynomialMetric::build(n)?;
        Ok(Self {
            model,
            poly,
            hamiltonian,
        })
    }

    /// The standard `n`-level system: Big-Bang schedule, `H = R(t)`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(RadiusModel::standard(n)?, HamiltonianSpec::Radius)
    }

    /// Model dimension.
    pub fn n(&self) -> usize {
        self.model.n()
    }

    /// The underlying radius model.
    pub fn model(&self) -> &RadiusModel {
        &self.model
    }

    /// The polynomial metric solved at construction.
    pub fn polynomial_metric(&self) -> &PolynomialMetric {
        &self.poly
    }

    /// The Hamiltonian choice.
    pub fn hamiltonian_spec(&self) -> &HamiltonianSpec {
        &self.hamiltonian
    }

    /// Assemble the per-instant bundle: schedule sample, radius, metric,
    /// metric derivative, and Dyson map.  Near an EP this fails with a
    /// positivity refusal from the square root.
    pub fn frame(&self, t: f64) -> Result<Frame> {
        let (tau, sigma) = self.model.schedule().sample(t)?;
        let (tau_dot, _) = self.model.schedule().sample_dot(t)?;
        let radius = self.model.radius_from_params(tau, sigma);
        let theta = self.poly.theta(tau);
        let theta_dot = self.poly.theta_dtau(tau).mapv(|x| x * tau_dot);
        let dyson = DysonMap::from_metric(&theta, &theta_dot, tau)?;
        Ok(Frame {
            t,
            tau,
            sigma,
            radius,
            theta,
            theta_dot,
            dyson,
        })
    }

    /// The Hamiltonian matrix at a given frame (always real for the
    /// specs supported here).
    pub fn hamiltonian_matrix(&self, frame: &Frame) -> Array2<f64> {
        match &self.hamiltonian {
            HamiltonianSpec::Radius => frame.radius.clone(),
            HamiltonianSpec::HermitianSeed(seed) => {
                // Θ⁻¹ = Ω⁻¹Ω⁻¹, so H = Ω⁻¹(Ω⁻¹ Λ̃).
                frame.dyson.omega_inv.dot(&frame.dyson.omega_inv.dot(seed))
            }
            HamiltonianSpec::Direct(h) => h.clone(),
        }
    }

    /// The interaction-picture generator `G = H − Σ` at a frame.
    pub fn generator_at(&self, frame: &Frame) -> Array2<C64> {
        let h = self.hamiltonian_matrix(frame);
        let s = frame.dyson.coriolis().real_factor;
        let n = h.nrows();
        Array2::from_shape_fn((n, n), |(a, b)| C64::new(h[(a, b)], -s[(a, b)]))
    }

    /// Convenience: the generator at time `t`.
    pub fn generator(&self, t: f64) -> Result<Array2<C64>> {
        Ok(self.generator_at(&self.frame(t)?))
    }

    /// Convenience: the Coriolis operator at time `t`.
    pub fn coriolis(&self, t: f64) -> Result<Coriolis> {
        Ok(self.frame(t)?.dyson.coriolis())
    }

    /// Relative quasi-Hermiticity residual `‖RᵀΘ − ΘR‖/(‖R‖·‖Θ‖)` of the
    /// reconstructed metric against the radius matrix at time `t`
    /// (Frobenius norms).  Uses only the schedule and the polynomial
    /// metric, so it stays available arbitrarily close to the EP.
    pub fn dieudonne_residual(&self, t: f64) -> Result<f64> {
        let (tau, sigma) = self.model.schedule().sample(t)?;
        let radius = self.model.radius_from_params(tau, sigma);
        let theta = self.poly.theta(tau);
        let resid = &radius.t().dot(&theta) - &theta.dot(&radius);
        let scale = fro_norm_real(&radius) * fro_norm_real(&theta);
        Ok(fro_norm_real(&resid) / scale.max(1e-300))
    }
}

fn check_dim(m: &Array2<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        Err(Error::DimensionMismatch {
            got: m.nrows().max(m.ncols()),
            expected: n,
        })
    } else {
        Ok(())
    }
}
