//! Ground-state thresholds, classification of initial data, the λ-scaled
//! data family, and the comparison monitor.

use alloc::vec::Vec;

use libm::{fabs, pow};
use thiserror::Error;

use crate::evolution::{outer_decade_fraction, DiagnosticsRecord};
use crate::functionals::{
    energy, kinetic, p_quartic, quadratic_energy, ComplexFieldPair, PhysicsParams,
};
use crate::grid::RadialGrid;
use crate::ground_state::GroundStateResult;
use crate::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriteriaError {
    #[error("ground state not certified (residuals {residual_p:e}, {residual_q:e} above {tol:e})")]
    UncertifiedGroundState {
        residual_p: f64,
        residual_q: f64,
        tol: f64,
    },
    #[error("quartic term of the seed is {0}, need a positive value")]
    CrossTermNotPositive(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub e_gs: f64,
    pub k_gs: f64,
    pub c_opt: f64,
    pub gamma: f64,
}

impl Thresholds {
    /// Thresholds implied by a value of `I` alone.
    pub fn from_i(i_value: f64) -> Self {
        let c_opt = 1.0 / (i_value * i_value);
        let e_gs = 1.0 / (16.0 * c_opt);
        Self {
            e_gs,
            k_gs: 4.0 * e_gs,
            c_opt,
            gamma: comparison_gamma(2.0 * c_opt, 2.0),
        }
    }
}

pub fn thresholds_from_ground_state(
    gs: &GroundStateResult,
    tol_residual: f64,
) -> Result<Thresholds, CriteriaError> {
    if !gs.is_certified(tol_residual) {
        return Err(CriteriaError::UncertifiedGroundState {
            residual_p: gs.residual_p,
            residual_q: gs.residual_q,
            tol: tol_residual,
        });
    }
    let e_gs = gs.s_value;
    Ok(Thresholds {
        e_gs,
        k_gs: 4.0 * e_gs,
        c_opt: gs.c_opt,
        gamma: comparison_gamma(2.0 * gs.c_opt, 2.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Classification {
    SubcriticalRegion,
    Indeterminate,
    SupercriticalBlowup,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::SupercriticalBlowup => "supercritical-blowup",
            Classification::SubcriticalRegion => "subcritical-region",
            Classification::Indeterminate => "indeterminate",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "supercritical-blowup" => Some(Classification::SupercriticalBlowup),
            "subcritical-region" => Some(Classification::SubcriticalRegion),
            "indeterminate" => Some(Classification::Indeterminate),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub e0: f64,
    pub k0: f64,
    pub classification: Classification,
    /// `E_gs - E0`, positive when the energy condition holds.
    pub margin_e: f64,
    /// `K0 - K_gs`, positive when the kinetic condition holds.
    pub margin_k: f64,
    /// Largest `ε` with `E0 < (1 - ε) E_gs`.
    pub epsilon_star: Option<f64>,
    /// Resonant mode only: the `|x|²`-weighted mass is not concentrated at the grid edge.
    pub confined: bool,
}

/// Allowed share of `∫|x|²(|u|² + 9|w|²)` in the outer decade of the grid.
pub const CONFINEMENT_TOL: f64 = 0.01;

pub fn classify(grid: &RadialGrid, pair0: &ComplexFieldPair, th: &Thresholds) -> Verdict {
    let e0 = energy(grid, pair0);
    let k0 = kinetic(grid, pair0);
    let confined = !pair0.params.resonant || outer_decade_fraction(grid, pair0) <= CONFINEMENT_TOL;
    let margin_e = th.e_gs - e0;
    let margin_k = k0 - th.k_gs;
    let classification = if !confined {
        Classification::Indeterminate
    } else if margin_e > 0.0 && margin_k > 0.0 {
        Classification::SupercriticalBlowup
    } else if margin_e > 0.0 && margin_k < 0.0 {
        Classification::SubcriticalRegion
    } else {
        Classification::Indeterminate
    };
    Verdict {
        e0,
        k0,
        classification,
        margin_e,
        margin_k,
        epsilon_star: (margin_e > 0.0 && th.e_gs > 0.0).then(|| 1.0 - e0 / th.e_gs),
        confined,
    }
}

/// `u₀ = w₀ = e^{-r²}`.
pub fn default_seed(grid: &RadialGrid, params: PhysicsParams) -> ComplexFieldPair {
    let g: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&r| Complex64::new(libm::exp(-r * r), 0.0))
        .collect();
    ComplexFieldPair {
        u: g.clone(),
        w: g,
        params,
    }
}

/// The family `λ ↦ λ (u₀, w₀)` with `E = λ² a - λ⁴ b` and `K = λ² K(u₀, w₀)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaFactory {
    pub seed: ComplexFieldPair,
    pub a: f64,
    pub b: f64,
    pub k_seed: f64,
    /// Smallest `λ` meeting both blow-up conditions, to `1e-6`.
    pub lambda_star: f64,
    /// `λ` at which `λ² K(u₀, w₀) = K_gs`.
    pub lambda_k: f64,
}

impl LambdaFactory {
    pub fn build(&self, lambda: f64) -> ComplexFieldPair {
        self.seed.scaled(lambda)
    }

    pub fn energy_at(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        l2 * self.a - l2 * l2 * self.b
    }

    fn meets(&self, lambda: f64, th: &Thresholds) -> bool {
        self.energy_at(lambda) < th.e_gs && lambda * lambda * self.k_seed > th.k_gs
    }
}

pub fn lambda_factory(
    grid: &RadialGrid,
    seed: &ComplexFieldPair,
    th: &Thresholds,
) -> Result<LambdaFactory, CriteriaError> {
    let b = p_quartic(grid, seed);
    if !(b > 0.0) {
        return Err(CriteriaError::CrossTermNotPositive(b));
    }
    let a = quadratic_energy(grid, seed);
    let k_seed = kinetic(grid, seed);
    let mut f = LambdaFactory {
        seed: seed.clone(),
        a,
        b,
        k_seed,
        lambda_star: f64::NAN,
        lambda_k: libm::sqrt(th.k_gs / k_seed),
    };
    // the admissible set is a half-line: at λ_K the energy sits at or above E_gs
    let mut hi = 1.0;
    while !f.meets(hi, th) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if f.meets(mid, th) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    f.lambda_star = hi;
    Ok(f)
}

/// `γ = (bq)^{-1/(q-1)}`
pub fn comparison_gamma(b: f64, q: f64) -> f64 {
    pow(b * q, -1.0 / (q - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonitorMode {
    /// `G(0) > γ ⇒ G(t) > γ` and `G(0) < γ ⇒ G(t) < γ`.
    Strict,
    /// Additionally reports `inf G/γ - 1` on the upper branch.
    Refined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub gamma: f64,
    /// `a < (1 - 1/q) γ`, the hypothesis under which the dichotomy is guaranteed.
    pub hypothesis: bool,
    /// Smallest `f(G(t))` over samples, scaled by `|a| + G + b G^q`.
    pub min_f_scaled: f64,
    /// Samples with `f(G(t))` below `-tolerance`.
    pub f_violations: Vec<usize>,
    /// Samples on the wrong side of `γ`.
    pub crossings: Vec<usize>,
    pub starts_above: bool,
    /// `inf G/γ - 1` over all samples (refined mode).
    pub inf_excess: Option<f64>,
}

impl ComparisonReport {
    pub fn holds(&self) -> bool {
        self.f_violations.is_empty()
            && self.crossings.is_empty()
            && self.inf_excess.is_none_or(|d| !self.starts_above || d > 0.0)
    }
}

/// `f(r) = a - r + b r^q` evaluated along `G`, with the continuity dichotomy.
pub fn comparison_monitor(g: &[f64], a: f64, b: f64, q: f64, mode: MonitorMode, tolerance: f64) -> ComparisonReport {
    let gamma = comparison_gamma(b, q);
    let mut min_f_scaled = f64::INFINITY;
    let mut f_violations = Vec::new();
    for (i, &x) in g.iter().enumerate() {
        let bx = b * pow(x, q);
        let scaled = (a - x + bx) / (fabs(a) + x + bx).max(f64::MIN_POSITIVE);
        min_f_scaled = min_f_scaled.min(scaled);
        if scaled < -tolerance {
            f_violations.push(i);
        }
    }
    let starts_above = g.first().is_some_and(|&g0| g0 > gamma);
    let crossings = g
        .iter()
        .enumerate()
        .filter(|(_, &x)| if starts_above { !(x > gamma) } else { !(x < gamma) })
        .map(|(i, _)| i)
        .collect();
    let inf_excess = (mode == MonitorMode::Refined)
        .then(|| g.iter().map(|&x| x / gamma - 1.0).fold(f64::INFINITY, f64::min));
    ComparisonReport {
        gamma,
        hypothesis: a < (1.0 - 1.0 / q) * gamma,
        min_f_scaled,
        f_violations,
        crossings,
        starts_above,
        inf_excess,
    }
}

/// Runs the monitor on a diagnostics series with `a = 2E₀`, `b = 2C_opt`, `q = 2`.
pub fn monitor_run(records: &[DiagnosticsRecord], th: &Thresholds, mode: MonitorMode, tolerance: f64) -> ComparisonReport {
    let g: Vec<f64> = records.iter().map(|r| r.kinetic).collect();
    let e0 = records.first().map_or(0.0, |r| r.energy);
    comparison_monitor(&g, 2.0 * e0, 2.0 * th.c_opt, 2.0, mode, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PI2;

    fn semitrivial_thresholds() -> Thresholds {
        Thresholds::from_i(libm::sqrt(128.0 * PI2 / 27.0))
    }

    #[test]
    fn gamma_examples() {
        assert!(fabs(comparison_gamma(0.5, 2.0) - 1.0) < 1e-15);
        let th = semitrivial_thresholds();
        assert!(fabs(th.gamma - th.k_gs) < 1e-12 * th.k_gs);
        assert!(fabs(th.gamma * 4.0 * th.c_opt - 1.0) < 1e-14);
        assert!(fabs(th.e_gs - 8.0 * PI2 / 27.0) < 1e-12);
    }

    #[test]
    fn degenerate_boundary() {
        let gamma = 1.0;
        let a = 0.5 * gamma;
        let rep = comparison_monitor(&[gamma], a, 0.5, 2.0, MonitorMode::Strict, 1e-12);
        assert!(fabs(rep.min_f_scaled) < 1e-15);
        assert!(!rep.hypothesis);
    }

    #[test]
    fn crossing_is_flagged() {
        let rep = comparison_monitor(&[2.0, 1.5, 0.9], 0.1, 0.5, 2.0, MonitorMode::Refined, 1e-12);
        assert!(rep.starts_above);
        assert_eq!(rep.crossings, alloc::vec![2]);
        assert!(!rep.holds());
    }

    #[test]
    fn labels_roundtrip() {
        for c in [
            Classification::SupercriticalBlowup,
            Classification::SubcriticalRegion,
            Classification::Indeterminate,
        ] {
            assert_eq!(Classification::from_label(c.label()), Some(c));
        }
    }

    #[test]
    fn zero_data_is_subcritical() {
        let g = RadialGrid::new(20.0, 200).unwrap();
        let v = classify(&g, &ComplexFieldPair::zeros(g.n(), PhysicsParams::default()), &semitrivial_thresholds());
        assert_eq!(v.classification, Classification::SubcriticalRegion);
        assert_eq!(v.epsilon_star, Some(1.0));
    }

    #[test]
    fn factory_rejects_vanishing_quartic() {
        let g = RadialGrid::new(20.0, 200).unwrap();
        let z = ComplexFieldPair::zeros(g.n(), PhysicsParams::default());
        assert_eq!(
            lambda_factory(&g, &z, &semitrivial_thresholds()).unwrap_err(),
            CriteriaError::CrossTermNotPositive(0.0)
        );
    }

    #[test]
    fn factory_scaling_laws() {
        let g = RadialGrid::new(50.0, 2000).unwrap();
        let th = semitrivial_thresholds();
        let seed = default_seed(&g, PhysicsParams::default());
        let f = lambda_factory(&g, &seed, &th).unwrap();
        for lam in [0.5, 1.0, 2.0] {
            let p = f.build(lam);
            assert!(fabs(energy(&g, &p) - f.energy_at(lam)) < 1e-12 * (1.0 + f.a * lam * lam));
            assert!(fabs(kinetic(&g, &p) - lam * lam * f.k_seed) < 1e-12 * f.k_seed * lam * lam);
        }
        assert!(f.lambda_star > f.lambda_k);
        assert!(!f.meets(f.lambda_star - 2e-6, &th));
        assert!(f.meets(f.lambda_star, &th));
        assert_eq!(
            classify(&g, &f.build(1.01 * f.lambda_star), &th).classification,
            Classification::SupercriticalBlowup
        );
        assert_eq!(
            classify(&g, &f.build(1e-3), &th).classification,
            Classification::SubcriticalRegion
        );
    }
}
