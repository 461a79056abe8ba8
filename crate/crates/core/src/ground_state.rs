//! Ground states of the stationary system
//!
//! ```text
//! ΔP + (P²/9 + 2Q²) P + P² Q / 3 = 0
//! ΔQ + (9Q² + 2P²) Q + P³ / 9 = 0
//! ```
//!
//! found by minimizing `J = K²/N` over nonnegative radial pairs and rescaling
//! the normalized minimizer by its Lagrange multiplier.
//!
//! The critical problem is dilation invariant, so the minimizer is only defined
//! up to `f ↦ f(·/R)/R`. Each iterate is pulled back along the dilation
//! generator `f + r f'` to keep its amplitude at the origin fixed.

use alloc::vec::Vec;

use libm::{fabs, sqrt};
use thiserror::Error;

use crate::functionals::{
    energy_crit_real, kinetic_real, n_density, n_density_grad, n_quartic, RealFieldPair,
};
use crate::grid::RadialGrid;
use crate::tridiag::SymTridiag;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroundStateError {
    #[error("initial pair has N = {0}, outside the admissible cone")]
    InitOutsideCone(f64),
    #[error("no convergence after {iterations} iterations (last relative change {last_change:e})")]
    MaxIterExceeded { iterations: usize, last_change: f64 },
    #[error("line search could not decrease J at iteration {0}")]
    StepCollapse(usize),
    #[error("initial profiles have {got} samples, grid has {expected}")]
    BadInit { expected: usize, got: usize },
    #[error("invalid ground-state configuration: {0}")]
    BadConfig(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    /// `(e^{-r²}, e^{-r²})`
    GaussianPair,
    /// `(ε W, W/3)` with `ε` = [`GroundStateConfig::perturbation`].
    Semitrivial,
    /// Caller-supplied nonnegative profiles.
    Profiles(RealFieldPair),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateConfig {
    pub init: InitialGuess,
    /// Amplitude of `W` added to the first slot of the semitrivial start.
    pub perturbation: f64,
    /// First trial step of the backtracking search.
    pub descent_step: f64,
    pub max_iter: usize,
    pub tol_rel_k: f64,
    pub tol_residual: f64,
    /// Consecutive iterations with relative K change below `tol_rel_k` needed to stop.
    pub window: usize,
}

impl Default for GroundStateConfig {
    fn default() -> Self {
        Self {
            init: InitialGuess::Semitrivial,
            perturbation: 0.05,
            descent_step: 0.5,
            max_iter: 20_000,
            tol_rel_k: 1e-10,
            tol_residual: 5e-3,
            window: 50,
        }
    }
}

impl GroundStateConfig {
    pub fn validate(&self) -> Result<(), GroundStateError> {
        if !(self.descent_step > 0.0 && self.descent_step.is_finite()) {
            return Err(GroundStateError::BadConfig("descent_step must be positive"));
        }
        if self.max_iter == 0 {
            return Err(GroundStateError::BadConfig("max_iter must be at least 1"));
        }
        if !(self.tol_rel_k > 0.0 && self.tol_residual > 0.0) {
            return Err(GroundStateError::BadConfig("tolerances must be positive"));
        }
        if self.window == 0 {
            return Err(GroundStateError::BadConfig("window must be at least 1"));
        }
        Ok(())
    }
}

/// Output of [`minimize_normalized`].
#[derive(Clone, Debug, PartialEq)]
pub struct Minimizer {
    /// Normalized minimizer, `N(v, z) = 1`.
    pub pair: RealFieldPair,
    pub i_value: f64,
    /// `K` after every accepted iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateResult {
    /// The solution `(P0, Q0)`.
    pub solution: RealFieldPair,
    /// The normalized minimizer `(v, z)`.
    pub normalized: RealFieldPair,
    pub i_value: f64,
    pub lambda: f64,
    pub c_opt: f64,
    pub s_value: f64,
    pub residual_p: f64,
    pub residual_q: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

impl GroundStateResult {
    pub fn is_certified(&self, tol_residual: f64) -> bool {
        self.residual_p <= tol_residual && self.residual_q <= tol_residual
    }
}

/// `W(r) = (1 + r²/8)⁻¹`, the positive solution of `ΔW + W³ = 0` on ℝ⁴.
pub fn aubin_talenti(r: f64) -> f64 {
    1.0 / (1.0 + 0.125 * r * r)
}

/// The explicit solution `(0, W/3)`.
pub fn semitrivial_oracle(grid: &RadialGrid) -> RealFieldPair {
    RealFieldPair {
        p: alloc::vec![0.0; grid.n()],
        q: grid.sample(|r| aubin_talenti(r) / 3.0),
    }
}

fn initial_pair(config: &GroundStateConfig, grid: &RadialGrid) -> Result<RealFieldPair, GroundStateError> {
    Ok(match &config.init {
        InitialGuess::GaussianPair => {
            let g = grid.sample(|r| libm::exp(-r * r));
            RealFieldPair { p: g.clone(), q: g }
        }
        InitialGuess::Semitrivial => {
            let w = grid.sample(aubin_talenti);
            RealFieldPair {
                p: w.iter().map(|v| config.perturbation * v).collect(),
                q: w.iter().map(|v| v / 3.0).collect(),
            }
        }
        InitialGuess::Profiles(pair) => {
            for len in [pair.p.len(), pair.q.len()] {
                if len != grid.n() {
                    return Err(GroundStateError::BadInit {
                        expected: grid.n(),
                        got: len,
                    });
                }
            }
            RealFieldPair {
                p: pair.p.iter().map(|v| v.max(0.0)).collect(),
                q: pair.q.iter().map(|v| v.max(0.0)).collect(),
            }
        }
    })
}

/// Discrete dilation generator `f + r f'`, with `r f' = -2f` at the last node.
pub fn dilation_generator(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let d = grid.radial_derivative(f);
    let mut g: Vec<f64> = f
        .iter()
        .zip(&d)
        .zip(grid.nodes())
        .map(|((v, dv), r)| v + r * dv)
        .collect();
    let n = g.len();
    g[n - 1] = -f[n - 1];
    g
}

fn clamp_normalize(grid: &RadialGrid, pair: &mut RealFieldPair) -> f64 {
    for v in pair.p.iter_mut().chain(pair.q.iter_mut()) {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let n = n_quartic(grid, pair);
    if n > 0.0 {
        let s = 1.0 / sqrt(sqrt(n));
        for v in pair.p.iter_mut().chain(pair.q.iter_mut()) {
            *v *= s;
        }
    }
    n
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

/// Minimizes `K` on `{N = 1}` over nonnegative pairs.
pub fn minimize_normalized(
    config: &GroundStateConfig,
    grid: &RadialGrid,
) -> Result<Minimizer, GroundStateError> {
    config.validate()?;
    let mut x = initial_pair(config, grid)?;
    let n0 = clamp_normalize(grid, &mut x);
    if !(n0 > 0.0) {
        return Err(GroundStateError::InitOutsideCone(n0));
    }
    // every start is dilated to the scale of W, so under-resolved bubbles are never pinned
    let mut reference = semitrivial_oracle(grid);
    clamp_normalize(grid, &mut reference);
    let scale = libm::hypot(x.p[0], x.q[0]) / reference.q[0];
    if scale != 1.0 {
        x.p = grid.dilate(&x.p, scale).map_err(|_| GroundStateError::InitOutsideCone(n0))?;
        x.q = grid.dilate(&x.q, scale).map_err(|_| GroundStateError::InitOutsideCone(n0))?;
        clamp_normalize(grid, &mut x);
    }
    let (diag, off) = grid.stiffness();
    let solver = SymTridiag::factor(&diag, &off);
    let vol = grid.volumes();
    let pin = libm::hypot(x.p[0], x.q[0]);

    let mut k = kinetic_real(grid, &x);
    let mut trace = Vec::new();
    let mut quiet = 0usize;
    let mut last_change = f64::INFINITY;

    for it in 1..=config.max_iter {
        // J-stationarity reads A x = (K/4N) V ∂N; with N = 1 the fixed point is x = c A⁻¹ V ∂N.
        let nv = n_quartic(grid, &x);
        let c = k / (4.0 * nv);
        let j = k * k / nv;
        let (mut rp, mut rq): (Vec<f64>, Vec<f64>) = x
            .p
            .iter()
            .zip(&x.q)
            .zip(vol)
            .map(|((&p, &q), v)| {
                let (gp, gq) = n_density_grad(p, q);
                (c * v * gp, c * v * gq)
            })
            .unzip();
        solver.solve_in_place(&mut rp);
        solver.solve_in_place(&mut rq);
        let dp: Vec<f64> = rp.iter().zip(&x.p).map(|(a, b)| a - b).collect();
        let dq: Vec<f64> = rq.iter().zip(&x.q).map(|(a, b)| a - b).collect();

        let mut a = config.descent_step;
        let candidate = loop {
            let mut trial = RealFieldPair {
                p: axpy(a, &dp, &x.p),
                q: axpy(a, &dq, &x.q),
            };
            let nt = clamp_normalize(grid, &mut trial);
            if nt > 0.0 {
                let kt = kinetic_real(grid, &trial);
                if kt * kt <= j * (1.0 + 1e-15) {
                    break Some(trial);
                }
            }
            a *= 0.5;
            if a < 1e-12 {
                break None;
            }
        };
        let Some(mut next) = candidate else {
            if last_change < sqrt(config.tol_rel_k) {
                // already at the floor of what rounding lets J resolve
                quiet += 1;
                trace.push(k);
                if quiet >= config.window {
                    return Ok(Minimizer {
                        pair: x,
                        i_value: k,
                        trace,
                        iterations: it,
                    });
                }
                continue;
            }
            return Err(GroundStateError::StepCollapse(it));
        };

        let amp = libm::hypot(next.p[0], next.q[0]);
        if amp > 0.0 {
            let gp = dilation_generator(grid, &next.p);
            let gq = dilation_generator(grid, &next.q);
            let slope = (next.p[0] * gp[0] + next.q[0] * gq[0]) / amp;
            if slope != 0.0 {
                let beta = (pin - amp) / slope;
                next.p = axpy(beta, &gp, &next.p);
                next.q = axpy(beta, &gq, &next.q);
                clamp_normalize(grid, &mut next);
            }
        }

        let k_next = kinetic_real(grid, &next);
        last_change = fabs(k_next - k) / k;
        x = next;
        k = k_next;
        trace.push(k);
        if last_change < config.tol_rel_k {
            quiet += 1;
            if quiet >= config.window {
                return Ok(Minimizer {
                    pair: x,
                    i_value: k,
                    trace,
                    iterations: it,
                });
            }
        } else {
            quiet = 0;
        }
    }
    Err(GroundStateError::MaxIterExceeded {
        iterations: config.max_iter,
        last_change,
    })
}

/// `(P0, Q0) = (λ/2)^{1/2} (v, z)` with `λ = K(v, z)/2`; returns the pair and `λ`.
pub fn lagrange_rescale(grid: &RadialGrid, normalized: &RealFieldPair) -> (RealFieldPair, f64) {
    let lambda = 0.5 * kinetic_real(grid, normalized);
    (normalized.scaled(sqrt(0.5 * lambda)), lambda)
}

/// Weighted L² norms of the two equations' left-hand sides.
pub fn residual(grid: &RadialGrid, pair: &RealFieldPair) -> (f64, f64) {
    let (rp, rq) = residual_fields(grid, pair);
    (grid.norm(&rp), grid.norm(&rq))
}

/// Nodewise residuals `ΔP + f(P, Q)` and `ΔQ + g(P, Q)`.
pub fn residual_fields(grid: &RadialGrid, pair: &RealFieldPair) -> (Vec<f64>, Vec<f64>) {
    let mut lp = grid.laplacian(&pair.p);
    let mut lq = grid.laplacian(&pair.q);
    for i in 0..grid.n() {
        let (gp, gq) = n_density_grad(pair.p[i], pair.q[i]);
        lp[i] += gp;
        lq[i] += gq;
    }
    (lp, lq)
}

/// Full chain: minimize, rescale, certify.
pub fn solve(config: &GroundStateConfig, grid: &RadialGrid) -> Result<GroundStateResult, GroundStateError> {
    let m = minimize_normalized(config, grid)?;
    Ok(finish(grid, m))
}

/// Rescales a normalized minimizer and evaluates every derived quantity.
pub fn finish(grid: &RadialGrid, m: Minimizer) -> GroundStateResult {
    let (solution, lambda) = lagrange_rescale(grid, &m.pair);
    let (residual_p, residual_q) = residual(grid, &solution);
    GroundStateResult {
        s_value: energy_crit_real(grid, &solution),
        c_opt: 1.0 / (m.i_value * m.i_value),
        i_value: m.i_value,
        lambda,
        residual_p,
        residual_q,
        iterations: m.iterations,
        trace: m.trace,
        normalized: m.pair,
        solution,
    }
}

/// Roots `(α, β)`, both nonnegative and not both zero, of the system obtained by
/// substituting `(αW, βW)` into the stationary equations.
pub fn ansatz_roots() -> Vec<(f64, f64)> {
    let res = |a: f64, b: f64| {
        (
            a * a * a / 9.0 + 2.0 * a * b * b + a * a * b / 3.0 - a,
            9.0 * b * b * b + 2.0 * a * a * b + a * a * a / 9.0 - b,
        )
    };
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for i in 0..=20 {
        for j in 0..=20 {
            let (mut a, mut b) = (i as f64 * 0.2, j as f64 * 0.05);
            let mut ok = false;
            for _ in 0..200 {
                let (f1, f2) = res(a, b);
                if libm::hypot(f1, f2) < 1e-14 {
                    ok = true;
                    break;
                }
                let j11 = a * a / 3.0 + 2.0 * b * b + 2.0 * a * b / 3.0 - 1.0;
                let j12 = 4.0 * a * b + a * a / 3.0;
                let j21 = 4.0 * a * b + a * a / 3.0;
                let j22 = 27.0 * b * b + 2.0 * a * a - 1.0;
                let det = j11 * j22 - j12 * j21;
                if fabs(det) < 1e-300 {
                    break;
                }
                let da = (f1 * j22 - f2 * j12) / det;
                let db = (j11 * f2 - j21 * f1) / det;
                let norm0 = libm::hypot(f1, f2);
                let mut t = 1.0;
                loop {
                    let (g1, g2) = res(a - t * da, b - t * db);
                    if libm::hypot(g1, g2) < norm0 || t < 1e-6 {
                        break;
                    }
                    t *= 0.5;
                }
                a -= t * da;
                b -= t * db;
            }
            if ok && a > -1e-12 && b > -1e-12 && libm::hypot(a, b) > 1e-8 {
                let (a, b) = (a.max(0.0), b.max(0.0));
                if !roots.iter().any(|&(x, y)| fabs(x - a) + fabs(y - b) < 1e-9) {
                    roots.push((a, b));
                }
            }
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    roots
}

/// A fully coupled solution `(αW, βW)` with `α, β > 0`, if the ansatz admits one.
pub fn coupled_profile_search(grid: &RadialGrid) -> Option<RealFieldPair> {
    let w = grid.sample(aubin_talenti);
    ansatz_roots()
        .into_iter()
        .filter(|&(a, b)| a > 1e-10 && b > 1e-10)
        .map(|(a, b)| RealFieldPair {
            p: w.iter().map(|v| a * v).collect(),
            q: w.iter().map(|v| b * v).collect(),
        })
        .min_by(|x, y| {
            let sx = energy_crit_real(grid, x);
            let sy = energy_crit_real(grid, y);
            sx.partial_cmp(&sy).unwrap_or(core::cmp::Ordering::Equal)
        })
}

/// `N` of `(αW, βW)` relative to `∫W⁴`.
pub fn ansatz_n_factor(alpha: f64, beta: f64) -> f64 {
    n_density(alpha, beta)
}
