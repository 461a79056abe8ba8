//! Time stepping of the radial system.
//!
//! One step is Strang split: half a step of the pointwise nonlinear flow
//! `i u_t = -f`, `iσ w_t = -g`, a full Crank–Nicolson step of the linear flow
//! `i u_t = (-Δ + 1) u`, `i w_t = σ⁻¹(-Δ + μ) w`, then the other nonlinear
//! half. In resonant mode the `+1` and `+μ` shifts are dropped.
//!
//! The nonlinear flow keeps `|u|² + 3σ|w|²` constant at every node. When RK4
//! lets that density move by more than `drift_tol` in a step, the step is
//! redone as two half steps.

use alloc::vec::Vec;

use libm::{ceil, fabs, sqrt};
use num_complex::Complex64;
use thiserror::Error;

use crate::cutoff::{build_profile, CutoffError, CutoffProfile};
use crate::functionals::{
    nonlinearity_f, nonlinearity_g, p_quartic, slot_masses, ComplexFieldPair, PhysicsParams,
};
use crate::grid::{GridError, RadialGrid};
use crate::tridiag::SymTridiag;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolveError {
    #[error("non-finite field values at t = {0}")]
    NonFinite(f64),
    #[error("invalid evolution configuration: {0}")]
    BadConfig(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Cutoff(#[from] CutoffError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Steps between diagnostics rows.
    pub sample_every: usize,
    /// Blow-up is declared once `K` exceeds this multiple of the reference level and still accelerates.
    pub blowup_k_factor: f64,
    /// Lower bound for the reference level; the reference is `max(K(0), k_floor)`.
    pub k_floor: f64,
    pub cutoff_r: f64,
    /// Steps between checkpoints, 0 for none.
    pub checkpoint_every: usize,
    pub amp_guard: f64,
    pub drift_tol: f64,
    pub max_halvings: u32,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 1.0,
            sample_every: 10,
            blowup_k_factor: 10.0,
            k_floor: 0.0,
            cutoff_r: 10.0,
            checkpoint_every: 0,
            amp_guard: 1e6,
            drift_tol: 1e-9,
            max_halvings: 12,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(EvolveError::BadConfig("dt must be positive"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(EvolveError::BadConfig("t_max must be positive"));
        }
        if self.sample_every == 0 {
            return Err(EvolveError::BadConfig("sample_every must be at least 1"));
        }
        if !(self.blowup_k_factor >= 1.0) {
            return Err(EvolveError::BadConfig("blowup_K_factor must be at least 1"));
        }
        if !(self.cutoff_r > 0.0) {
            return Err(EvolveError::BadConfig("cutoff_R must be positive"));
        }
        if !(self.amp_guard > 0.0 && self.drift_tol > 0.0) {
            return Err(EvolveError::BadConfig("guards must be positive"));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> u64 {
        libm::round(self.t_max / self.dt) as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub pair: ComplexFieldPair,
    pub step_count: u64,
}

impl SimState {
    pub fn new(pair: ComplexFieldPair) -> Self {
        Self {
            t: 0.0,
            pair,
            step_count: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub mass: f64,
    pub kinetic: f64,
    pub p_quartic: f64,
    pub tau: f64,
    pub virial: f64,
    pub virial_prime: f64,
    pub r_loc: f64,
    pub amp_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BlowupReason {
    AmplitudeGuard,
    KineticGrowth,
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    Blowup { halt_time: f64, reason: BlowupReason },
}

impl RunStatus {
    pub fn is_blowup(&self) -> bool {
        matches!(self, RunStatus::Blowup { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Blowup { .. } => "blowup",
        }
    }

    pub fn halt_time(&self) -> Option<f64> {
        match self {
            RunStatus::Completed => None,
            RunStatus::Blowup { halt_time, .. } => Some(*halt_time),
        }
    }
}

/// Receives rows and checkpoints while a run is in progress.
pub trait Observer {
    fn record(&mut self, _row: &DiagnosticsRecord) {}
    fn checkpoint(&mut self, _state: &SimState) {}
}

impl Observer for () {}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveOutcome {
    pub state: SimState,
    pub records: Vec<DiagnosticsRecord>,
    pub status: RunStatus,
}

struct CnSlot {
    factor: SymTridiag<Complex64>,
    rhs_diag: Vec<Complex64>,
    rhs_off: Vec<Complex64>,
}

impl CnSlot {
    // (V + iα(A + cV)) x⁺ = (V - iα(A + cV)) x
    fn new(vol: &[f64], diag: &[f64], off: &[f64], alpha: f64, shift: f64) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let lhs_diag: Vec<Complex64> = vol
            .iter()
            .zip(diag)
            .map(|(v, d)| *v + i * (alpha * (d + shift * v)))
            .collect();
        let lhs_off: Vec<Complex64> = off.iter().map(|o| i * (alpha * o)).collect();
        let rhs_diag = vol
            .iter()
            .zip(diag)
            .map(|(v, d)| *v - i * (alpha * (d + shift * v)))
            .collect();
        let rhs_off = off.iter().map(|o| -i * (alpha * o)).collect();
        Self {
            factor: SymTridiag::factor(&lhs_diag, &lhs_off),
            rhs_diag,
            rhs_off,
        }
    }

    fn apply(&self, x: &mut [Complex64], scratch: &mut [Complex64]) {
        crate::tridiag::sym_tridiag_mul(&self.rhs_diag, &self.rhs_off, x, scratch);
        self.factor.solve_in_place(scratch);
        x.copy_from_slice(scratch);
    }
}

struct Level {
    dt: f64,
    u: CnSlot,
    w: CnSlot,
}

/// Reusable stepper for one grid, parameter set and step size.
pub struct Stepper<'g> {
    grid: &'g RadialGrid,
    params: PhysicsParams,
    dt: f64,
    drift_tol: f64,
    max_halvings: u32,
    diag: Vec<f64>,
    off: Vec<f64>,
    levels: Vec<Level>,
    scratch: Vec<Complex64>,
    /// Largest relative drift of the nodal invariant seen in an accepted step.
    pub max_drift: f64,
    /// Number of steps that had to be subdivided.
    pub halvings: u64,
}

const THETA: f64 = 0.05;

impl<'g> Stepper<'g> {
    /// `dt` may be negative, which runs the scheme backwards.
    pub fn new(grid: &'g RadialGrid, params: PhysicsParams, dt: f64) -> Self {
        let (diag, off) = grid.stiffness();
        Self {
            grid,
            params,
            dt,
            drift_tol: 1e-9,
            max_halvings: 12,
            diag,
            off,
            levels: Vec::new(),
            scratch: alloc::vec![Complex64::new(0.0, 0.0); grid.n()],
            max_drift: 0.0,
            halvings: 0,
        }
    }

    pub fn with_guards(mut self, drift_tol: f64, max_halvings: u32) -> Self {
        self.drift_tol = drift_tol;
        self.max_halvings = max_halvings;
        self
    }

    fn level(&mut self, depth: usize) {
        while self.levels.len() <= depth {
            let d = self.levels.len() as i32;
            let dt = self.dt * libm::pow(0.5, d as f64);
            let (cu, cw) = if self.params.resonant { (0.0, 0.0) } else { (1.0, self.params.mu) };
            let vol = self.grid.volumes();
            let u = CnSlot::new(vol, &self.diag, &self.off, 0.5 * dt, cu);
            let w = CnSlot::new(vol, &self.diag, &self.off, 0.5 * dt / self.params.sigma, cw);
            self.levels.push(Level { dt, u, w });
        }
    }

    /// Advances the pair by one step in place.
    pub fn step(&mut self, pair: &mut ComplexFieldPair) -> Result<(), EvolveError> {
        self.advance(pair, 0)?;
        if pair.is_finite() {
            Ok(())
        } else {
            Err(EvolveError::NonFinite(f64::NAN))
        }
    }

    fn advance(&mut self, pair: &mut ComplexFieldPair, depth: usize) -> Result<(), EvolveError> {
        self.level(depth);
        let dt = self.levels[depth].dt;
        let theta = THETA * libm::pow(0.5, depth as f64);
        let backup = (depth < self.max_halvings as usize).then(|| (pair.u.clone(), pair.w.clone()));
        let d1 = nonlinear_flow(&mut pair.u, &mut pair.w, self.params.sigma, 0.5 * dt, theta);
        let lvl = &self.levels[depth];
        lvl.u.apply(&mut pair.u, &mut self.scratch);
        lvl.w.apply(&mut pair.w, &mut self.scratch);
        let d2 = nonlinear_flow(&mut pair.u, &mut pair.w, self.params.sigma, 0.5 * dt, theta);
        let drift = d1 + d2;
        if !drift.is_finite() {
            return Err(EvolveError::NonFinite(f64::NAN));
        }
        if drift > self.drift_tol {
            if let Some((u, w)) = backup {
                pair.u = u;
                pair.w = w;
                self.halvings += 1;
                self.advance(pair, depth + 1)?;
                return self.advance(pair, depth + 1);
            }
        }
        self.max_drift = self.max_drift.max(drift);
        Ok(())
    }
}

#[inline]
fn rhs(u: Complex64, w: Complex64, inv_sigma: f64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    (i * nonlinearity_f(u, w), i * nonlinearity_g(u, w) * inv_sigma)
}

/// Integrates the pointwise flow for time `tau`; returns the largest change of
/// `|u|² + 3σ|w|²` relative to its largest value.
pub fn nonlinear_flow(u: &mut [Complex64], w: &mut [Complex64], sigma: f64, tau: f64, theta: f64) -> f64 {
    let inv_sigma = 1.0 / sigma;
    let weight = 3.0 * sigma;
    let coeff = 12.0 * (1.0 + inv_sigma);
    let mut worst: f64 = 0.0;
    let mut top: f64 = 0.0;
    for (uu, ww) in u.iter_mut().zip(w.iter_mut()) {
        let (mut a, mut b) = (*uu, *ww);
        let a2 = a.norm_sqr();
        let b2 = b.norm_sqr();
        let m0 = a2 + weight * b2;
        top = top.max(m0);
        if m0 == 0.0 {
            continue;
        }
        let rate = coeff * (a2 + b2);
        let sub = ceil(fabs(tau) * rate / theta).max(1.0);
        if !sub.is_finite() || sub > 1e9 {
            return f64::INFINITY;
        }
        let h = tau / sub;
        for _ in 0..sub as u64 {
            let (k1a, k1b) = rhs(a, b, inv_sigma);
            let (k2a, k2b) = rhs(a + k1a * (0.5 * h), b + k1b * (0.5 * h), inv_sigma);
            let (k3a, k3b) = rhs(a + k2a * (0.5 * h), b + k2b * (0.5 * h), inv_sigma);
            let (k4a, k4b) = rhs(a + k3a * h, b + k3b * h, inv_sigma);
            a += (k1a + k2a * 2.0 + k3a * 2.0 + k4a) * (h / 6.0);
            b += (k1b + k2b * 2.0 + k3b * 2.0 + k4b) * (h / 6.0);
        }
        let m1 = a.norm_sqr() + weight * b.norm_sqr();
        worst = worst.max(fabs(m1 - m0));
        *uu = a;
        *ww = b;
    }
    if top > 0.0 {
        worst / top
    } else {
        0.0
    }
}

/// One step of size `config.dt` without reusing factorizations.
pub fn step(grid: &RadialGrid, state: &SimState, config: &EvolveConfig) -> Result<SimState, EvolveError> {
    let mut stepper =
        Stepper::new(grid, state.pair.params, config.dt).with_guards(config.drift_tol, config.max_halvings);
    let mut pair = state.pair.clone();
    stepper.step(&mut pair).map_err(|_| EvolveError::NonFinite(state.t))?;
    let step_count = state.step_count + 1;
    Ok(SimState {
        t: step_count as f64 * config.dt,
        pair,
        step_count,
    })
}

/// `V = ∫ r² (|u|² + σ²|w|²)`
pub fn virial_v(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    let s2 = pair.params.sigma * pair.params.sigma;
    let r = grid.nodes();
    grid.integrate_with(|i| r[i] * r[i] * (pair.u[i].norm_sqr() + s2 * pair.w[i].norm_sqr()))
}

fn momentum_density(grid: &RadialGrid, pair: &ComplexFieldPair) -> Vec<f64> {
    let du = grid.radial_derivative(&pair.u);
    let dw = grid.radial_derivative(&pair.w);
    let s = pair.params.sigma;
    (0..grid.n())
        .map(|i| (pair.u[i].conj() * du[i] + pair.w[i].conj() * dw[i] * s).im)
        .collect()
}

/// `V' = 4 Im ∫ (ū r ∂_r u + σ w̄ r ∂_r w)`
pub fn virial_vprime(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    let m = momentum_density(grid, pair);
    let r = grid.nodes();
    4.0 * grid.integrate_with(|i| r[i] * m[i])
}

/// `𝓡 = 2 Im ∫ χ_R' (ū ∂_r u + σ w̄ ∂_r w)`
pub fn localized_virial_r(grid: &RadialGrid, pair: &ComplexFieldPair, profile: &CutoffProfile) -> f64 {
    let m = momentum_density(grid, pair);
    2.0 * grid.integrate_with(|i| profile.d1[i] * m[i])
}

/// Right-hand side of `|𝓡| ≤ 2 sup|χ_R'| max(1, (σ/3)^{1/2}) M^{1/2} K^{1/2}`.
pub fn localized_virial_bound(profile: &CutoffProfile, params: &PhysicsParams, mass: f64, kinetic: f64) -> f64 {
    let slope = profile.d1.iter().cloned().fold(0.0, f64::max);
    2.0 * slope * sqrt(params.sigma / 3.0).max(1.0) * sqrt(mass * kinetic)
}

/// Share of `∫ r²(|u|² + σ²|w|²)` carried by the outer tenth of the grid.
pub fn outer_decade_fraction(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    let s2 = pair.params.sigma * pair.params.sigma;
    let r = grid.nodes();
    let cut = 0.9 * grid.r_max();
    let dens = |i: usize| r[i] * r[i] * (pair.u[i].norm_sqr() + s2 * pair.w[i].norm_sqr());
    let total = grid.integrate_with(dens);
    let outer = grid.integrate_with(|i| if r[i] > cut { dens(i) } else { 0.0 });
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

pub fn diagnostics(grid: &RadialGrid, t: f64, pair: &ComplexFieldPair, profile: &CutoffProfile) -> DiagnosticsRecord {
    let k = grid.grad_sq(&pair.u) + grid.grad_sq(&pair.w);
    let p = p_quartic(grid, pair);
    let (mu_, mw) = slot_masses(grid, pair);
    let quad = if pair.params.resonant {
        0.5 * k
    } else {
        0.5 * (k + mu_ + pair.params.mu * mw)
    };
    DiagnosticsRecord {
        t,
        energy: quad - p,
        mass: mu_ + 3.0 * pair.params.sigma * mw,
        kinetic: k,
        p_quartic: p,
        tau: k - 4.0 * p,
        virial: virial_v(grid, pair),
        virial_prime: virial_vprime(grid, pair),
        r_loc: localized_virial_r(grid, pair, profile),
        amp_max: pair.amp_max(),
    }
}

fn accelerating(records: &[DiagnosticsRecord]) -> bool {
    let n = records.len();
    n >= 3 && records[n - 1].kinetic - 2.0 * records[n - 2].kinetic + records[n - 3].kinetic > 0.0
}

pub fn evolve(
    grid: &RadialGrid,
    state0: SimState,
    config: &EvolveConfig,
    observer: &mut dyn Observer,
) -> Result<EvolveOutcome, EvolveError> {
    config.validate()?;
    grid.check_len(state0.pair.u.len())?;
    grid.check_len(state0.pair.w.len())?;
    if !state0.pair.is_finite() {
        return Err(EvolveError::NonFinite(state0.t));
    }
    let profile = build_profile(grid, config.cutoff_r)?;
    let total = config.total_steps();
    let every = config.sample_every as u64;
    let mut stepper =
        Stepper::new(grid, state0.pair.params, config.dt).with_guards(config.drift_tol, config.max_halvings);
    let mut state = state0;
    let mut records = Vec::new();

    let first = diagnostics(grid, state.t, &state.pair, &profile);
    let k_ref = first.kinetic.max(config.k_floor);
    if state.step_count % every == 0 {
        observer.record(&first);
        records.push(first);
    }

    let mut status = RunStatus::Completed;
    while state.step_count < total {
        let mut next = state.pair.clone();
        if stepper.step(&mut next).is_err() {
            status = RunStatus::Blowup {
                halt_time: state.t,
                reason: BlowupReason::NonFinite,
            };
            break;
        }
        state.pair = next;
        state.step_count += 1;
        state.t = state.step_count as f64 * config.dt;

        let amp = state.pair.amp_max();
        let sample = state.step_count % every == 0;
        if sample || amp > config.amp_guard {
            let row = diagnostics(grid, state.t, &state.pair, &profile);
            observer.record(&row);
            records.push(row);
            if amp > config.amp_guard {
                status = RunStatus::Blowup {
                    halt_time: state.t,
                    reason: BlowupReason::AmplitudeGuard,
                };
            } else if row.kinetic > config.blowup_k_factor * k_ref && accelerating(&records) {
                status = RunStatus::Blowup {
                    halt_time: state.t,
                    reason: BlowupReason::KineticGrowth,
                };
            }
        }
        if config.checkpoint_every > 0 && state.step_count % config.checkpoint_every as u64 == 0 {
            observer.checkpoint(&state);
        }
        if status.is_blowup() {
            break;
        }
    }
    Ok(EvolveOutcome {
        state,
        records,
        status,
    })
}

/// Post-hoc reading of a diagnostics series against the ground-state level `K(P, Q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonitorReport {
    pub status: RunStatus,
    /// Indices of rows with `K ≤ K(P, Q)`.
    pub below_threshold: Vec<usize>,
    /// `min K(t)/t²` over the terminal window (the last quarter of rows with `t > 0`).
    pub c0: Option<f64>,
    /// Least-squares slope of `K` against `t²` on the same window.
    pub growth_slope: Option<f64>,
    /// `min` over rows of `𝓡(t)` minus its first value; negative once the
    /// localized virial has started to fall.
    pub r_loc_drop: f64,
}

pub fn blow_up_monitor(records: &[DiagnosticsRecord], k_gs: f64, config: &EvolveConfig) -> MonitorReport {
    let below_threshold = records
        .iter()
        .enumerate()
        .filter(|(_, r)| !(r.kinetic > k_gs))
        .map(|(i, _)| i)
        .collect();
    let mut status = RunStatus::Completed;
    if let Some(first) = records.first() {
        let k_ref = first.kinetic.max(config.k_floor);
        for i in 0..records.len() {
            let r = &records[i];
            if !(r.amp_max <= config.amp_guard) {
                status = RunStatus::Blowup {
                    halt_time: r.t,
                    reason: BlowupReason::AmplitudeGuard,
                };
                break;
            }
            if r.kinetic > config.blowup_k_factor * k_ref && accelerating(&records[..=i]) {
                status = RunStatus::Blowup {
                    halt_time: r.t,
                    reason: BlowupReason::KineticGrowth,
                };
                break;
            }
        }
    }
    let positive: Vec<&DiagnosticsRecord> = records.iter().filter(|r| r.t > 0.0).collect();
    let (c0, growth_slope) = if positive.len() >= 2 {
        let start = positive.len() - (positive.len() / 4).max(2);
        let window = &positive[start..];
        let c0 = window
            .iter()
            .map(|r| r.kinetic / (r.t * r.t))
            .fold(f64::INFINITY, f64::min);
        let m = window.len() as f64;
        let mx = window.iter().map(|r| r.t * r.t).sum::<f64>() / m;
        let my = window.iter().map(|r| r.kinetic).sum::<f64>() / m;
        let sxy: f64 = window.iter().map(|r| (r.t * r.t - mx) * (r.kinetic - my)).sum();
        let sxx: f64 = window.iter().map(|r| (r.t * r.t - mx) * (r.t * r.t - mx)).sum();
        (Some(c0), (sxx > 0.0).then(|| sxy / sxx))
    } else {
        (None, None)
    };
    let r_loc_drop = match records.first() {
        Some(first) => records.iter().map(|r| r.r_loc - first.r_loc).fold(0.0, f64::min),
        None => 0.0,
    };
    MonitorReport {
        status,
        below_threshold,
        c0,
        growth_slope,
        r_loc_drop,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{energy, mass};
    use libm::exp;

    fn gaussian(grid: &RadialGrid, amp: f64, params: PhysicsParams) -> ComplexFieldPair {
        let g: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&r| Complex64::new(amp * exp(-r * r), 0.0))
            .collect();
        ComplexFieldPair {
            u: g.clone(),
            w: g,
            params,
        }
    }

    #[test]
    fn zero_stays_zero() {
        let g = RadialGrid::new(20.0, 200).unwrap();
        let s = SimState::new(ComplexFieldPair::zeros(g.n(), PhysicsParams::default()));
        let next = step(&g, &s, &EvolveConfig::default()).unwrap();
        assert!(next.pair.u.iter().chain(&next.pair.w).all(|v| *v == Complex64::new(0.0, 0.0)));
        assert_eq!(next.step_count, 1);
    }

    #[test]
    fn linear_step_preserves_slot_norms() {
        let g = RadialGrid::new(20.0, 400).unwrap();
        let mut pair = gaussian(&g, 1e-6, PhysicsParams::new(1.5, 2.0, false).unwrap());
        for (i, v) in pair.w.iter_mut().enumerate() {
            *v *= Complex64::new(0.0, libm::sin(i as f64 * 0.1));
        }
        let (mu0, mw0) = slot_masses(&g, &pair);
        let mut st = Stepper::new(&g, pair.params, 0.01);
        st.level(0);
        let mut scratch = alloc::vec![Complex64::new(0.0, 0.0); g.n()];
        for _ in 0..50 {
            st.levels[0].u.apply(&mut pair.u, &mut scratch);
            st.levels[0].w.apply(&mut pair.w, &mut scratch);
        }
        let (mu1, mw1) = slot_masses(&g, &pair);
        assert!(fabs(mu1 / mu0 - 1.0) < 1e-13);
        assert!(fabs(mw1 / mw0 - 1.0) < 1e-13);
    }

    #[test]
    fn nodal_invariant_of_nonlinear_flow() {
        let mut u = alloc::vec![Complex64::new(0.8, 0.3), Complex64::new(-1.2, 0.5)];
        let mut w = alloc::vec![Complex64::new(0.1, -0.9), Complex64::new(0.4, 0.4)];
        let before: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a.norm_sqr() + 9.0 * b.norm_sqr()).collect();
        let drift = nonlinear_flow(&mut u, &mut w, 3.0, 0.05, 0.01);
        let after: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a.norm_sqr() + 9.0 * b.norm_sqr()).collect();
        for (a, b) in before.iter().zip(&after) {
            assert!(fabs(a - b) < 1e-10 * a);
        }
        assert!(drift < 1e-10);
    }

    #[test]
    fn short_run_conserves() {
        let g = RadialGrid::new(30.0, 1200).unwrap();
        let pair = gaussian(&g, 0.1, PhysicsParams::default());
        let (e0, m0) = (energy(&g, &pair), mass(&g, &pair));
        let cfg = EvolveConfig {
            dt: 1e-3,
            t_max: 0.1,
            ..Default::default()
        };
        let out = evolve(&g, SimState::new(pair), &cfg, &mut ()).unwrap();
        assert_eq!(out.status, RunStatus::Completed);
        assert_eq!(out.records.len(), 11);
        let last = out.records.last().unwrap();
        assert!(fabs(last.energy / e0 - 1.0) < 1e-6);
        assert!(fabs(last.mass / m0 - 1.0) < 1e-10);
        assert!(fabs(last.t - 0.1) < 1e-15);
    }

    #[test]
    fn real_pairs_have_no_momentum() {
        let g = RadialGrid::new(20.0, 300).unwrap();
        let pair = gaussian(&g, 0.5, PhysicsParams::resonant());
        let prof = build_profile(&g, 5.0).unwrap();
        assert_eq!(virial_vprime(&g, &pair), 0.0);
        assert_eq!(localized_virial_r(&g, &pair, &prof), 0.0);
    }

    #[test]
    fn config_validation() {
        let bad = EvolveConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = EvolveConfig {
            sample_every: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(EvolveConfig::default().total_steps(), 1000);
    }
}
