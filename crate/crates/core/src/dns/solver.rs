//! IMEX time stepping: Crank-Nicolson on the diagonal diffusion, second-order
//! Adams-Bashforth on the buoyancy coupling and the advection (explicit Euler
//! on the first step unless resumed with history).

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::checkpoint::{Checkpoint, History};
use super::diagnostics::Diagnostics;
use super::state::{Parity, SpectralState, C64};
use super::transform::Transform;
use crate::error::{domain, Error, Result};
use crate::params::DimensionlessParams;
use crate::spectrum::Eigenvector;

/// L² norm above which a run is treated as blown up.
pub const BLOW_UP_NORM: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Horizontal truncation `M` (wavenumbers `-M..=M`).
    pub modes_x: usize,
    /// Vertical truncation `N`.
    pub modes_z: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Evaluate products on a padded grid so the retained modes are alias free.
    pub dealias: bool,
    /// Advection on or off; off gives the linearized system.
    pub nonlinear: bool,
    /// Steps between recorded diagnostics.
    pub diag_every: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            modes_x: 64,
            modes_z: 32,
            dt: 1e-3,
            t_end: 1.0,
            dealias: true,
            nonlinear: true,
            diag_every: 10,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.modes_x < 4 || self.modes_z < 4 {
            return Err(domain("modes", "M and N must both be at least 4"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(domain("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(domain("t_end", format!("must be non-negative, got {}", self.t_end)));
        }
        if self.diag_every == 0 {
            return Err(domain("diag_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Step bounded by the explicit buoyancy coupling, whose largest rate is
    /// `max(|c_v|, |c_theta|) k_M / pi`, and capped at `1e-2`.
    pub fn recommended_dt(d: &DimensionlessParams, modes_x: usize) -> f64 {
        let k_top = 2.0 * PI * modes_x as f64 / d.alpha;
        let coupling = d.velocity_coupling().abs().max(d.temperature_coupling().abs()) * k_top / PI;
        if coupling > 0.0 {
            (0.2 / coupling).min(1e-2)
        } else {
            1e-2
        }
    }
}

/// `w = -int_0^z d_x v`: mode `(m, n >= 1)` of `v` gives `-(i k / (n pi)) v_hat`
/// on `sin(n pi z)`.
pub fn vertical_velocity(s: &SpectralState) -> Array2<C64> {
    let mut w = Array2::zeros(s.v_hat.raw_dim());
    for (i, _m, k) in s.wavenumbers() {
        for n in 1..=s.n_max() {
            w[[i, n]] = C64::new(0.0, -k / (n as f64 * PI)) * s.v_hat[[i, n]];
        }
    }
    w
}

/// Removes the vertical mean (`n = 0` cosine coefficients).
pub fn project_vertical_mean(f: &mut Array2<C64>) {
    f.column_mut(0).fill(C64::new(0.0, 0.0));
}

fn derivative_x(s: &SpectralState, f: &Array2<C64>) -> Array2<C64> {
    let mut out = f.clone();
    for (i, _m, k) in s.wavenumbers() {
        out.row_mut(i).mapv_inplace(|c| c * C64::new(0.0, k));
    }
    out
}

/// `d_z` maps `cos -> -q sin` and `sin -> q cos`.
fn derivative_z(f: &Array2<C64>, parity: Parity) -> Array2<C64> {
    let mut out = f.clone();
    for ((_, n), c) in out.indexed_iter_mut() {
        let q = n as f64 * PI;
        *c *= match parity {
            Parity::Cos => -q,
            Parity::Sin => q,
        };
    }
    out
}

/// Advective tendencies `(-(v d_x + w d_z) v, -(v d_x + w d_z) theta)` by the
/// transform method, with the velocity tendency projected to zero vertical mean.
pub fn nonlinear_tendency(s: &SpectralState, tr: &mut Transform) -> (Array2<C64>, Array2<C64>) {
    let len = tr.len();
    let (mut v, mut vx, mut vz, mut w, mut tx, mut tz) = (
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
    );
    let w_hat = vertical_velocity(s);
    let vx_hat = derivative_x(s, &s.v_hat);
    let vz_hat = derivative_z(&s.v_hat, Parity::Cos);
    let tx_hat = derivative_x(s, &s.theta_hat);
    let tz_hat = derivative_z(&s.theta_hat, Parity::Sin);
    tr.synthesize_pair(
        (&s.v_hat, Parity::Cos),
        Some((&vx_hat, Parity::Cos)),
        &mut v,
        Some(&mut vx),
    );
    tr.synthesize_pair(
        (&vz_hat, Parity::Sin),
        Some((&w_hat, Parity::Sin)),
        &mut vz,
        Some(&mut w),
    );
    tr.synthesize_pair(
        (&tx_hat, Parity::Sin),
        Some((&tz_hat, Parity::Cos)),
        &mut tx,
        Some(&mut tz),
    );
    let nv: Vec<f64> = (0..len).map(|i| -(v[i] * vx[i] + w[i] * vz[i])).collect();
    let nt: Vec<f64> = (0..len).map(|i| -(v[i] * tx[i] + w[i] * tz[i])).collect();
    let (mut fv, ft) = tr.analyze_pair(&nv, Parity::Cos, Some((&nt, Parity::Sin)));
    let mut ft = ft.unwrap_or_else(|| Array2::zeros(fv.raw_dim()));
    project_vertical_mean(&mut fv);
    ft.column_mut(0).fill(C64::new(0.0, 0.0));
    (fv, ft)
}

/// Buoyancy coupling `(c_v (i k / q) theta_hat, c_theta (i k / q) v_hat)` per mode.
pub fn coupling_tendency(s: &SpectralState, d: &DimensionlessParams) -> (Array2<C64>, Array2<C64>) {
    let (cv, ct) = (d.velocity_coupling(), d.temperature_coupling());
    let mut fv = Array2::zeros(s.v_hat.raw_dim());
    let mut ft = Array2::zeros(s.v_hat.raw_dim());
    for (i, _m, k) in s.wavenumbers() {
        for n in 1..=s.n_max() {
            let f = C64::new(0.0, k / (n as f64 * PI));
            fv[[i, n]] = cv * f * s.theta_hat[[i, n]];
            ft[[i, n]] = ct * f * s.v_hat[[i, n]];
        }
    }
    (fv, ft)
}

/// Diffusion rates `(Pr_x k^2 + Pr_z q^2, k^2 + kappa_a q^2)` per coefficient.
fn diffusion_tables(s: &SpectralState, d: &DimensionlessParams) -> (Array2<f64>, Array2<f64>) {
    let mut dv = Array2::zeros(s.v_hat.raw_dim());
    let mut dt = Array2::zeros(s.v_hat.raw_dim());
    for (i, _m, k) in s.wavenumbers() {
        for n in 0..=s.n_max() {
            let q = n as f64 * PI;
            dv[[i, n]] = d.pr_x * k * k + d.pr_z * q * q;
            dt[[i, n]] = k * k + d.kappa_a * q * q;
        }
    }
    (dv, dt)
}

/// State `delta (cos(phi) psi_1 + sin(phi) psi_2)` of L² norm `delta`.
pub fn init_from_eigenmode(
    modes_x: usize,
    modes_z: usize,
    delta: f64,
    angle: f64,
    eig: &Eigenvector,
) -> Result<SpectralState> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(domain("delta", format!("must be positive, got {delta}")));
    }
    let field = eig
        .profile(1)
        .scaled(delta * angle.cos())
        .axpy(delta * angle.sin(), &eig.profile(2));
    let mut s = field.to_state(modes_x, modes_z)?;
    s.enforce_invariants();
    Ok(s)
}

/// Random admissible state of L² norm `amplitude`.
pub fn init_random(modes_x: usize, modes_z: usize, alpha: f64, amplitude: f64, seed: u64) -> Result<SpectralState> {
    SpectralState::random(modes_x, modes_z, alpha, amplitude, seed)
}

/// Advective time-step limit `1 / (max|v| k_M + max|w| N pi)` on the collocation grid.
pub fn cfl_limit(s: &SpectralState, tr: &mut Transform) -> f64 {
    let len = tr.len();
    let (mut v, mut w) = (vec![0.0; len], vec![0.0; len]);
    let w_hat = vertical_velocity(s);
    tr.synthesize_pair(
        (&s.v_hat, Parity::Cos),
        Some((&w_hat, Parity::Sin)),
        &mut v,
        Some(&mut w),
    );
    let peak = |f: &[f64]| f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let k_top = s.wavenumber(s.m_max() as i64);
    let rate = peak(&v) * k_top + peak(&w) * s.n_max() as f64 * PI;
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

/// One simulation: owns its state, transform workspace and AB2 history.
#[derive(Debug)]
pub struct Simulation {
    config: SolverConfig,
    params: DimensionlessParams,
    state: SpectralState,
    transform: Transform,
    diff_v: Array2<f64>,
    diff_t: Array2<f64>,
    previous: Option<History>,
    steps: u64,
    projectors: Option<[SpectralState; 2]>,
    energy_residual: f64,
}

impl Simulation {
    /// Validates the configuration and, with advection on, the CFL bound at the
    /// initial state. The
    /// step is shortened if needed so that `t_end` is reached exactly.
    pub fn new(config: SolverConfig, params: DimensionlessParams, state: SpectralState) -> Result<Self> {
        config.validate()?;
        if state.m_max() != config.modes_x || state.n_max() != config.modes_z {
            return Err(domain("state", "truncation differs from the solver configuration"));
        }
        if state.alpha() != params.alpha {
            return Err(domain("state", "aspect ratio differs from the parameters"));
        }
        let mut transform = Transform::new(config.modes_x, config.modes_z, config.dealias)?;
        let cfl = cfl_limit(&state, &mut transform);
        if config.nonlinear && config.dt > cfl {
            return Err(domain(
                "dt",
                format!("{} exceeds the advective limit {cfl} at the initial state", config.dt),
            ));
        }
        let mut config = config;
        let span = config.t_end - state.t;
        if span > 0.0 {
            config.dt = span / (span / config.dt).ceil();
        }
        let (diff_v, diff_t) = diffusion_tables(&state, &params);
        let mut state = state;
        state.enforce_invariants();
        Ok(Self {
            config,
            params,
            state,
            transform,
            diff_v,
            diff_t,
            previous: None,
            steps: 0,
            projectors: None,
            energy_residual: 0.0,
        })
    }

    /// Enables the `x1`, `x2` projections onto the critical eigenfunctions.
    pub fn with_projection(mut self, eig: &Eigenvector) -> Result<Self> {
        let (m, n) = (self.config.modes_x, self.config.modes_z);
        self.projectors = Some([eig.profile(1).to_state(m, n)?, eig.profile(2).to_state(m, n)?]);
        Ok(self)
    }

    /// Continues from a checkpoint; its history, when present, replaces the
    /// Euler start step.
    pub fn resume(config: SolverConfig, params: DimensionlessParams, checkpoint: Checkpoint) -> Result<Self> {
        let mut sim = Self::new(config, params, checkpoint.state)?;
        if let Some(h) = checkpoint.history {
            if h.v.dim() != sim.state.v_hat.dim() || h.theta.dim() != sim.state.theta_hat.dim() {
                return Err(domain("checkpoint", "history shape differs from the state"));
            }
            sim.previous = Some(h);
        }
        Ok(sim)
    }

    /// The current state with the history needed to continue exactly.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            state: self.state.clone(),
            history: self.previous.clone(),
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn params(&self) -> &DimensionlessParams {
        &self.params
    }

    pub fn state(&self) -> &SpectralState {
        &self.state
    }

    pub fn into_state(self) -> SpectralState {
        self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Coupling plus (if enabled) advection.
    pub fn explicit_tendency(&mut self) -> (Array2<C64>, Array2<C64>) {
        let (mut fv, mut ft) = coupling_tendency(&self.state, &self.params);
        if self.config.nonlinear {
            let (nv, nt) = nonlinear_tendency(&self.state, &mut self.transform);
            fv += &nv;
            ft += &nt;
        }
        (fv, ft)
    }

    /// Full right-hand side at the current state.
    pub fn tendency(&mut self) -> SpectralState {
        let (mut fv, mut ft) = self.explicit_tendency();
        for ((f, &r), &c) in fv.iter_mut().zip(&self.diff_v).zip(&self.state.v_hat) {
            *f -= r * c;
        }
        for ((f, &r), &c) in ft.iter_mut().zip(&self.diff_t).zip(&self.state.theta_hat) {
            *f -= r * c;
        }
        let mut out = self.state.clone();
        out.v_hat = fv;
        out.theta_hat = ft;
        out.enforce_invariants();
        out
    }

    /// Advances one step of size `config.dt`.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.config.dt;
        let before = self.balance_terms();
        let (ev, et) = self.explicit_tendency();
        let (xv, xt) = match &self.previous {
            Some(h) => {
                let b = 0.5 * dt / h.dt;
                (&ev * (1.0 + b) - &h.v * b, &et * (1.0 + b) - &h.theta * b)
            }
            None => (ev.clone(), et.clone()),
        };
        advance(&mut self.state.v_hat, &xv, &self.diff_v, dt);
        advance(&mut self.state.theta_hat, &xt, &self.diff_t, dt);
        self.state.enforce_invariants();
        self.state.t += dt;
        self.steps += 1;
        self.previous = Some(History { dt, v: ev, theta: et });

        let norm = self.state.l2_norm();
        if !self.state.is_finite() || !norm.is_finite() {
            return Err(Error::BlowUp {
                t: self.state.t,
                reason: "non-finite coefficients".into(),
            });
        }
        if norm > BLOW_UP_NORM {
            return Err(Error::BlowUp {
                t: self.state.t,
                reason: format!("L2 norm {norm:e} exceeds {BLOW_UP_NORM:e}"),
            });
        }
        let after = self.balance_terms();
        self.energy_residual = ((after.0 - before.0) / dt - 0.5 * (before.1 + after.1)).abs();
        Ok(())
    }

    /// `(||v||^2 + ||theta||^2, cross_term - 2 dissipation)`.
    fn balance_terms(&self) -> (f64, f64) {
        let (dv, dt, cross) = super::diagnostics::energy_terms(&self.state, &self.params);
        (self.state.l2_norm().powi(2), cross - 2.0 * (dv + dt))
    }

    /// Diagnostics of the current state.
    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics::compute(
            &self.state,
            &self.params,
            self.projectors.as_ref(),
            self.energy_residual,
        )
    }

    /// Runs to `config.t_end`, recording diagnostics at the start, every
    /// `diag_every` steps and at the end.
    pub fn run(&mut self) -> Result<Vec<Diagnostics>> {
        self.run_observed(|_| true)
    }

    /// As [`Simulation::run`], stopping early when `observe` returns `false`.
    pub fn run_observed(&mut self, mut observe: impl FnMut(&Diagnostics) -> bool) -> Result<Vec<Diagnostics>> {
        let first = self.diagnostics();
        let mut out = vec![first];
        if !observe(&out[0]) {
            return Ok(out);
        }
        let remaining = ((self.config.t_end - self.state.t) / self.config.dt).round().max(0.0) as u64;
        for i in 1..=remaining {
            self.step()?;
            if i % self.config.diag_every as u64 == 0 || i == remaining {
                let d = self.diagnostics();
                let keep_going = observe(&d);
                out.push(d);
                if !keep_going {
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// `u <- ((1 - dt r / 2) u + dt x) / (1 + dt r / 2)`.
fn advance(u: &mut Array2<C64>, x: &Array2<C64>, rate: &Array2<f64>, dt: f64) {
    for ((c, &f), &r) in u.iter_mut().zip(x).zip(rate) {
        let h = 0.5 * dt * r;
        *c = (*c * (1.0 - h) + f * dt) / (1.0 + h);
    }
}
