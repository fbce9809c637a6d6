//! Quasi-Hermitian quantum mechanics in the non-Hermitian interaction
//! picture (NIP).
//!
//! This crate implements a solvable family of `N`-level models whose
//! Hamiltonian-like "radius" operator `R(t)` is a real tridiagonal matrix
//! with an antisymmetric off-diagonal part.  Although `R(t)` is manifestly
//! non-Hermitian, its spectrum stays real inside a finite time interval
//! bounded by exceptional points (EPs) where all eigenvalues coalesce —
//! a toy model of a quantum "Big Bang".
//!
//! Physical consistency is restored by a time-dependent Hilbert-space
//! metric `Θ(t) > 0` solving the quasi-Hermiticity (Dieudonné) condition
//! `R†Θ = ΘR`.  The crate reconstructs this metric two independent ways
//! (a closed polynomial ansatz in the coupling `τ` and a pointwise
//! null-space solver), factorises it through the Hermitian Dyson map
//! `Ω = Θ^{1/2}`, forms the Coriolis operator `Σ = iΩ⁻¹Ω̇` that generates
//! the motion of the observables, and integrates the conjugate pair of
//! Schrödinger equations
//!
//! ```text
//!     i ∂_t |ψ(t)⟩  = G(t) |ψ(t)⟩,      G = H − Σ,
//!     i ∂_t |ψ(t)⟩⟩ = G†(t) |ψ(t)⟩⟩,
//! ```
//!
//! whose physical inner product `⟨⟨ψ|ψ⟩` is a constant of motion.  The
//! Heisenberg-type flow of observables and the biorthonormal eigensystem
//! machinery (left/right eigenvectors, dyadic spectral projectors,
//! expectation values) complete the picture and allow every prediction to
//! be cross-checked against the equivalent textbook (Hermitian)
//! representation.
//!
//! Modules roughly follow the pipeline order:
//!
//! * [`schedule`] — time-dependence of the coupling `τ(t)` and shift `σ(t)`;
//! * [`model`] — the radius matrices, their spectra and EP diagnostics;
//! * [`metric`] — metric reconstruction (polynomial and pointwise) and the
//!   closed-form eigenvalue branch used to pin the physical solution;
//! * [`dyson`] — Hermitian square root `Ω`, its time derivative, and the
//!   Coriolis operator;
//! * [`system`] — a preassembled model + metric bundle and generator
//!   assembly;
//! * [`evolve`] — fixed-step RK4 integration of states, conjugate pairs and
//!   Heisenberg observables, plus the textbook cross-check;
//! * [`observable`] — metric-compatible observables, biorthonormal systems,
//!   dyadic projectors and expectation values.

pub mod dyson;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod metric;
pub mod model;
pub mod observable;
pub mod schedule;
pub mod system;

pub use dyson::{sqrt_metric, Coriolis, DysonMap};
pub use error::{Error, Result};
pub use evolve::{
    evolve_heisenberg, evolve_pair, heisenberg_exact, textbook_crosscheck, CrosscheckReport,
    OperatorTrajectory, StatePair, Trajectory,
};
pub use metric::{eigenvalues_closed_form, solve_metric_pointwise, Metric, PolynomialMetric};
pub use model::{EpScalingFit, RadiusModel, SpectrumReport};
pub use observable::{
    biorthonormalize, biorthonormalize_direct, dyadic_projector, expectation, make_observable,
    radius_observable, BiorthonormalSystem, Expectation, Observable,
};
pub use schedule::Schedule;
pub use system::{Frame, HamiltonianSpec, System};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
