//! Fixed-step RK4 integration of the interaction-picture dynamics.
//!
//! Three flows are provided:
//!
//! * [`evolve_pair`] — the conjugate Schrödinger pair
//!   `i∂_t|ψ⟩ = G|ψ⟩`, `i∂_t|ψ⟩⟩ = G†|ψ⟩⟩`,
//!   whose physical pseudo-norm `⟨⟨ψ|ψ⟩` is conserved *identically* — for
//!   any generator `G`, compatible with the metric or not — because the
//!   two equations are adjoint to each other;
//! * [`evolve_heisenberg`] — the observable flow `i∂_t A = AΣ − ΣA`
//!   driven by the Coriolis operator alone, with the closed-form transport
//!   `A(t) = Ω⁻¹(t) · Ω(t₀)A₀Ω⁻¹(t₀) · Ω(t)` available through
//!   [`heisenberg_exact`] as an independent check;
//! * [`textbook_crosscheck`] — simultaneous integration of the same
//!   initial state in the interaction picture and in the textbook
//!   (Hermitian) picture under `𝔥 = ΩHΩ⁻¹`, verifying that
//!   `Ω(t)|ψ(t)⟩` and the textbook state agree along the whole window.
//!
//! All integrators use the classical fourth-order Runge–Kutta rule with a
//! fixed step (the last step is shortened to land exactly on the window
//! end) and abort with [`Error::NumericBlowup`] as soon as a state stops
//! being finite.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{adjoint, max_abs, to_complex, vec_finite};
use crate::system::System;
use crate::C64;

/// A state of the conjugate Schrödinger pair.
///
/// `ket` is the interaction-picture state `|ψ⟩`; `left` is the companion
/// `|ψ⟩⟩` evolving under `G†`.  When `left = Θ|ψ⟩` holds at one instant
/// and the Hamiltonian is metric-compatible, the relation persists under
/// evolution — that is the dynamical content of quasi-Hermiticity.
#[derive(Debug, Clone)]
pub struct StatePair {
    /// `|ψ⟩`.
    pub ket: Array1<C64>,
    /// `|ψ⟩⟩`.
    pub left: Array1<C64>,
}

impl StatePair {
    /// Pair a ket with an explicitly chosen companion.
    pub fn new(ket: Array1<C64>, left: Array1<C64>) -> Result<Self> {
        if ket.len() != left.len() {
            return Err(Error::DimensionMismatch {
                got: left.len(),
                expected: ket.len(),
            });
        }
        Ok(Self { ket, left })
    }

    /// Pair a ket with the metric companion `|ψ⟩⟩ = Θ|ψ⟩`.
    pub fn with_metric_companion(ket: Array1<C64>, theta: &Array2<f64>) -> Result<Self> {
        if ket.len() != theta.nrows() {
            return Err(Error::DimensionMismatch {
                got: ket.len(),
                expected: theta.nrows(),
            });
        }
        let left = to_complex(theta).dot(&ket);
        Ok(Self { ket, left })
    }

    /// The conserved physical bilinear `⟨⟨ψ|ψ⟩`.
    pub fn physical_norm(&self) -> C64 {
        self.left
            .iter()
            .zip(self.ket.iter())
            .map(|(l, k)| l.conj() * k)
            .sum()
    }

    /// Dimension of the state space.
    pub fn dim(&self) -> usize {
        self.ket.len()
    }
}

/// Time series of a conjugate-pair evolution (one entry per accepted
/// step, including the initial condition).
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Grid times.
    pub times: Vec<f64>,
    /// `|ψ(t)⟩` samples.
    pub kets: Vec<Array1<C64>>,
    /// `|ψ(t)⟩⟩` samples.
    pub lefts: Vec<Array1<C64>>,
}

impl Trajectory {
    /// Number of stored samples.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// True when no samples are stored.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The pair at grid index `i`.
    pub fn pair(&self, i: usize) -> Result<StatePair> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                size: self.len(),
            });
        }
        StatePair::new(self.kets[i].clone(), self.lefts[i].clone())
    }

    /// The final pair.
    pub fn final_pair(&self) -> Result<StatePair> {
        self.pair(self.len().saturating_sub(1))
    }

    /// The pseudo-norm `⟨⟨ψ|ψ⟩` along the grid.
    pub fn pseudo_norms(&self) -> Vec<C64> {
        self.lefts
            .iter()
            .zip(self.kets.iter())
            .map(|(l, k)| l.iter().zip(k.iter()).map(|(a, b)| a.conj() * b).sum())
            .collect()
    }

    /// Largest deviation of the pseudo-norm from its initial value.
    pub fn pseudo_norm_drift(&self) -> f64 {
        let norms = self.pseudo_norms();
        match norms.first() {
            None => 0.0,
            Some(&first) => norms
                .iter()
                .map(|&z| (z - first).norm())
                .fold(0.0, f64::max),
        }
    }
}

/// Time series of a Heisenberg-picture observable.
#[derive(Debug, Clone)]
pub struct OperatorTrajectory {
    /// Grid times.
    pub times: Vec<f64>,
    /// `A(t)` samples.
    pub operators: Vec<Array2<C64>>,
}

impl OperatorTrajectory {
    /// Number of stored samples.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// True when no samples are stored.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The final operator.
    pub fn final_operator(&self) -> Result<&Array2<C64>> {
        self.operators
            .last()
            .ok_or(Error::IndexOutOfRange { index: 0, size: 0 })
    }
}

/// Deviations between the interaction picture and the textbook picture
/// accumulated over a shared window.
#[derive(Debug, Clone, Copy)]
pub struct CrosscheckReport {
    /// `max_t ‖Ω(t)ψ(t) − φ(t)‖` over the grid, relative to `‖φ‖`.
    pub max_state_deviation: f64,
    /// Largest relative non-Hermiticity `‖𝔥 − 𝔥†‖ / ‖𝔥‖` seen at any
    /// RK4 stage.
    pub max_hermiticity_deviation: f64,
    /// Drift of the textbook norm `⟨φ|φ⟩` (conserved when `𝔥` is
    /// Hermitian).
    pub textbook_norm_drift: f64,
}

fn validate_window(t0: f64, t1: f64, step: f64) -> Result<usize> {
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::InvalidStep(step));
    }
    if t0 >= t1 || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidWindow { t0, t1 });
    }
    Ok(((t1 - t0) / step).ceil().max(1.0) as usize)
}

fn scaled(v: &Array1<C64>, k: &Array1<C64>, factor: f64) -> Array1<C64> {
    let f = C64::new(factor, 0.0);
    v + &k.mapv(|z| z * f)
}

/// One RK4 step of `y' = −i M(t) y` given the matrix at the three stage
/// times `t`, `t + h/2`, `t + h`.
fn rk4_vec(
    y: &Array1<C64>,
    h: f64,
    m0: &Array2<C64>,
    m_half: &Array2<C64>,
    m1: &Array2<C64>,
) -> Array1<C64> {
    let minus_i = C64::new(0.0, -1.0);
    let f = |m: &Array2<C64>, v: &Array1<C64>| m.dot(v).mapv(|z| z * minus_i);
    let k1 = f(m0, y);
    let k2 = f(m_half, &scaled(y, &k1, h / 2.0));
    let k3 = f(m_half, &scaled(y, &k2, h / 2.0));
    let k4 = f(m1, &scaled(y, &k3, h));
    let mut out = y.clone();
    let w = C64::new(h / 6.0, 0.0);
    for (o, (((a, b), c), d)) in out
        .iter_mut()
        .zip(k1.iter().zip(k2.iter()).zip(k3.iter()).zip(k4.iter()))
    {
        *o += w * (a + C64::new(2.0, 0.0) * (b + c) + d);
    }
    out
}

/// One RK4 step of the operator flow `A' = AS − SA` (the Coriolis flow
/// `i∂_t A = AΣ − ΣA` written through the real factor `Σ = iS`).
fn rk4_op(
    a: &Array2<C64>,
    h: f64,
    s0: &Array2<C64>,
    s_half: &Array2<C64>,
    s1: &Array2<C64>,
) -> Array2<C64> {
    let f = |s: &Array2<C64>, x: &Array2<C64>| x.dot(s) - s.dot(x);
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let k1 = f(s0, a);
    let k2 = f(s_half, &(a + &k1.mapv(|z| z * half)));
    let k3 = f(s_half, &(a + &k2.mapv(|z| z * half)));
    let k4 = f(s1, &(a + &k3.mapv(|z| z * full)));
    let w = C64::new(h / 6.0, 0.0);
    a + &(k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * w)
}

/// Integrate the conjugate Schrödinger pair over `[t0, t1]`.
///
/// The ket evolves under `G(t)` and the companion under `G†(t)`, sharing
/// the three generator evaluations per step.  The returned trajectory
/// contains every accepted step including the initial condition.
pub fn evolve_pair(
    system: &System,
    initial: &StatePair,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Trajectory> {
    let steps = validate_window(t0, t1, step)?;
    if initial.dim() != system.n() {
        return Err(Error::DimensionMismatch {
            got: initial.dim(),
            expected: system.n(),
        });
    }
    if !vec_finite(&initial.ket) || !vec_finite(&initial.left) {
        return Err(Error::NumericBlowup {
            t: t0,
            last_good: t0,
        });
    }

    let mut times = Vec::with_capacity(steps + 1);
    let mut kets = Vec::with_capacity(steps + 1);
    let mut lefts = Vec::with_capacity(steps + 1);
    times.push(t0);
    kets.push(initial.ket.clone());
    lefts.push(initial.left.clone());

    let mut t = t0;
    let mut ket = initial.ket.clone();
    let mut left = initial.left.clone();
    while t < t1 - 1e-12 * (t1 - t0) {
        let h = step.min(t1 - t);
        let g0 = system.generator(t)?;
        let gh = system.generator(t + h / 2.0)?;
        let g1 = system.generator(t + h)?;
        let g0d = adjoint(&g0);
        let ghd = adjoint(&gh);
        let g1d = adjoint(&g1);

        let next_ket = rk4_vec(&ket, h, &g0, &gh, &g1);
        let next_left = rk4_vec(&left, h, &g0d, &ghd, &g1d);
        if !vec_finite(&next_ket) || !vec_finite(&next_left) {
            return Err(Error::NumericBlowup {
                t: t + h,
                last_good: t,
            });
        }
        ket = next_ket;
        left = next_left;
        t += h;
        times.push(t);
        kets.push(ket.clone());
        lefts.push(left.clone());
    }

    Ok(Trajectory { times, kets, lefts })
}

/// Integrate the Heisenberg-picture flow `i∂_t A = AΣ − ΣA` of a single
/// observable over `[t0, t1]`.
pub fn evolve_heisenberg(
    system: &System,
    a0: &Array2<C64>,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<OperatorTrajectory> {
    let steps = validate_window(t0, t1, step)?;
    if a0.nrows() != system.n() || a0.ncols() != system.n() {
        return Err(Error::DimensionMismatch {
            got: a0.nrows().max(a0.ncols()),
            expected: system.n(),
        });
    }

    let coriolis_factor = |t: f64| -> Result<Array2<C64>> {
        Ok(to_complex(&system.frame(t)?.dyson.coriolis().real_factor))
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut operators = Vec::with_capacity(steps + 1);
    times.push(t0);
    operators.push(a0.clone());

    let mut t = t0;
    let mut a = a0.clone();
    while t < t1 - 1e-12 * (t1 - t0) {
        let h = step.min(t1 - t);
        let s0 = coriolis_factor(t)?;
        let sh = coriolis_factor(t + h / 2.0)?;
        let s1 = coriolis_factor(t + h)?;
        let next = rk4_op(&a, h, &s0, &sh, &s1);
        if !next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NumericBlowup {
                t: t + h,
                last_good: t,
            });
        }
        a = next;
        t += h;
        times.push(t);
        operators.push(a.clone());
    }

    Ok(OperatorTrajectory { times, operators })
}

/// Closed-form transport of a Heisenberg observable:
/// `A(t) = Ω⁻¹(t) · 𝔞 · Ω(t)` with the frozen textbook image
/// `𝔞 = Ω(t₀) A₀ Ω⁻¹(t₀)`.
pub fn heisenberg_exact(system: &System, a0: &Array2<C64>, t0: f64, t: f64) -> Result<Array2<C64>> {
    let f0 = system.frame(t0)?;
    let ft = system.frame(t)?;
    let frozen = to_complex(&f0.dyson.omega)
        .dot(a0)
        .dot(&to_complex(&f0.dyson.omega_inv));
    Ok(to_complex(&ft.dyson.omega_inv)
        .dot(&frozen)
        .dot(&to_complex(&ft.dyson.omega)))
}

/// Evolve the same initial ket in both pictures and compare.
///
/// The interaction-picture state `ψ` evolves under `G = H − Σ`; the
/// textbook state `φ` starts at `φ₀ = Ω(t₀)ψ₀` and evolves under
/// `𝔥(t) = Ω(t) H(t) Ω⁻¹(t)`.  The two are images of each other under
/// the Dyson map at every instant, so `‖Ωψ − φ‖` measures the combined
/// consistency of the metric, root, Coriolis and integrator pipeline.
pub fn textbook_crosscheck(
    system: &System,
    ket0: &Array1<C64>,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<CrosscheckReport> {
    validate_window(t0, t1, step)?;
    if ket0.len() != system.n() {
        return Err(Error::DimensionMismatch {
            got: ket0.len(),
            expected: system.n(),
        });
    }

    // Generator and textbook Hamiltonian from one shared frame.
    let both = |t: f64| -> Result<(Array2<C64>, Array2<C64>, f64)> {
        let frame = system.frame(t)?;
        let g = system.generator_at(&frame);
        let h_mat = system.hamiltonian_matrix(&frame);
        let textbook = to_complex(&frame.dyson.omega.dot(&h_mat).dot(&frame.dyson.omega_inv));
        let herm = {
            let dev = max_abs(&(&textbook - &adjoint(&textbook)));
            dev / max_abs(&textbook).max(1e-300)
        };
        Ok((g, textbook, herm))
    };

    let mut psi = ket0.clone();
    let mut phi = to_complex(&system.frame(t0)?.dyson.omega).dot(ket0);
    let phi_norm0: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>();

    let mut max_dev = 0.0_f64;
    let mut max_herm = 0.0_f64;
    let mut max_norm_drift = 0.0_f64;

    let mut t = t0;
    while t < t1 - 1e-12 * (t1 - t0) {
        let h = step.min(t1 - t);
        let (g0, hb0, e0) = both(t)?;
        let (gh, hbh, eh) = both(t + h / 2.0)?;
        let (g1, hb1, e1) = both(t + h)?;
        max_herm = max_herm.max(e0).max(eh).max(e1);

        psi = rk4_vec(&psi, h, &g0, &gh, &g1);
        phi = rk4_vec(&phi, h, &hb0, &hbh, &hb1);
        if !vec_finite(&psi) || !vec_finite(&phi) {
            return Err(Error::NumericBlowup {
                t: t + h,
                last_good: t,
            });
        }
        t += h;

        let mapped = to_complex(&system.frame(t)?.dyson.omega).dot(&psi);
        let dev: f64 = mapped
            .iter()
            .zip(phi.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        max_dev = max_dev.max(dev / scale.max(1e-300));
        let norm: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        max_norm_drift = max_norm_drift.max((norm - phi_norm0).abs() / phi_norm0.max(1e-300));
    }

    Ok(CrosscheckReport {
        max_state_deviation: max_dev,
        max_hermiticity_deviation: max_herm,
        textbook_norm_drift: max_norm_drift,
    })
}
