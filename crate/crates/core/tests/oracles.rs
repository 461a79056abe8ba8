//! Closed-form integrals and the ground-state chain checked against the solvers.

use std::f64::consts::PI;

use critnls_core::criteria::default_seed;
use critnls_core::functionals::{
    energy_crit_real, kinetic, kinetic_real, n_quartic, p_quartic, slot_masses, weinstein, RealFieldPair,
};
use critnls_core::ground_state::{
    self, aubin_talenti, ansatz_roots, coupled_profile_search, dilation_generator, residual, semitrivial_oracle,
    GroundStateConfig, InitialGuess,
};
use critnls_core::{PhysicsParams, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fact(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `B(a, b)` for positive integers.
fn beta(a: u32, b: u32) -> f64 {
    fact(a - 1) * fact(b - 1) / fact(a + b - 1)
}

/// `2π² ∫ r³ W^k`, via `r² = 8s`.
fn w_moment(k: u32) -> f64 {
    64.0 * PI * PI * beta(2, k - 2)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn default_grid() -> RadialGrid {
    RadialGrid::new(100.0, 4096).unwrap()
}

#[test]
fn beta_helper() {
    assert_eq!(beta(2, 2), 1.0 / 6.0);
    assert_eq!(beta(3, 1), 1.0 / 3.0);
}

#[test]
fn aubin_talenti_integrals() {
    let grid = default_grid();
    let w = grid.sample(aubin_talenti);
    let w4: Vec<f64> = w.iter().map(|v| v.powi(4)).collect();
    // |∇W|² = (r/4)² W⁴ gives 32π² B(3, 1)
    let grad_exact = 32.0 * PI * PI * beta(3, 1);
    assert!(rel(grid.grad_sq(&w), grad_exact) < 5e-3);
    assert!(rel(grid.integrate(&w4), w_moment(4)) < 5e-3);
    assert!(rel(grad_exact, w_moment(4)) < 1e-15);
}

#[test]
fn gaussian_integrals() {
    let grid = RadialGrid::new(12.0, 4096).unwrap();
    let h2 = grid.h() * grid.h();
    let pair = default_seed(&grid, PhysicsParams::default());
    let (mu, mw) = slot_masses(&grid, &pair);
    // 2π² ∫ r³ e^{-2r²} = π²/4, 2π² ∫ 4 r⁵ e^{-2r²} = π², 2π² ∫ r³ e^{-4r²} = π²/16
    assert!(rel(mu, PI * PI / 4.0) < h2);
    assert_eq!(mu, mw);
    assert!(rel(kinetic(&grid, &pair), 2.0 * PI * PI) < 2.0 * h2);
    let coeff = 1.0 / 36.0 + 9.0 / 4.0 + 1.0 + 1.0 / 9.0;
    assert!(rel(p_quartic(&grid, &pair), coeff * PI * PI / 16.0) < 2.0 * h2);
}

#[test]
fn residual_of_the_wrong_slot() {
    // (W, 0): ΔW = -W³ leaves -8W³/9 in the P equation and W³/9 in the Q equation.
    let grid = default_grid();
    let pair = RealFieldPair {
        p: grid.sample(aubin_talenti),
        q: vec![0.0; grid.n()],
    };
    let (rp, rq) = residual(&grid, &pair);
    let w3 = w_moment(6).sqrt();
    assert!(rel(rp, 8.0 * w3 / 9.0) < 5e-3, "{rp}");
    assert!(rel(rq, w3 / 9.0) < 5e-3, "{rq}");
}

#[test]
fn semitrivial_values() {
    let grid = default_grid();
    let st = semitrivial_oracle(&grid);
    let n_exact = w_moment(4) / 36.0;
    assert!(rel(n_quartic(&grid, &st), n_exact) < 5e-3);
    assert!(rel(kinetic_real(&grid, &st), w_moment(4) / 9.0) < 5e-3);
    assert!(rel(energy_crit_real(&grid, &st), 8.0 * PI * PI / 27.0) < 5e-3);
    assert!(rel(weinstein(&grid, &st).unwrap(), 128.0 * PI * PI / 27.0) < 1e-2);
}

#[test]
fn only_the_semitrivial_ansatz_root() {
    let roots = ansatz_roots();
    assert!(!roots.is_empty());
    for (a, b) in roots {
        assert!(a.abs() < 1e-9 && (b - 1.0 / 3.0).abs() < 1e-9, "({a}, {b})");
    }
    assert!(coupled_profile_search(&default_grid()).is_none());
}

#[test]
fn chain_and_semitrivial_limit() {
    let grid = default_grid();
    let gs = ground_state::solve(&GroundStateConfig::default(), &grid).unwrap();
    assert!(gs.is_certified(5e-3));
    let i_exact = (128.0f64 * PI * PI / 27.0).sqrt();
    assert!(rel(gs.i_value, i_exact) < 1e-3, "{}", gs.i_value);
    assert!(rel(gs.lambda, gs.i_value / 2.0) < 1e-12);
    assert!(gs.s_value <= 8.0 * PI * PI / 27.0 + 1e-2);
    assert!(rel(gs.s_value * 16.0 * gs.c_opt, 1.0) < 1e-12);
    let amp: f64 = gs.solution.p.iter().fold(0.0, |m, v| m.max(v.abs()));
    assert!(amp < 1e-6 * gs.solution.q[0], "first slot {amp}");
    let j = weinstein(&grid, &gs.normalized).unwrap();
    assert!(rel(j, gs.i_value * gs.i_value) < 1e-12);
}

#[test]
fn trace_is_nonincreasing_up_to_rounding() {
    let grid = default_grid();
    let gs = ground_state::solve(&GroundStateConfig::default(), &grid).unwrap();
    for w in gs.trace.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn gaussian_start_reaches_the_same_level() {
    let grid = default_grid();
    let cfg = GroundStateConfig {
        init: InitialGuess::GaussianPair,
        ..GroundStateConfig::default()
    };
    let a = ground_state::solve(&cfg, &grid).unwrap();
    let b = ground_state::solve(&GroundStateConfig::default(), &grid).unwrap();
    assert!(rel(a.i_value, b.i_value) < 1e-6, "{} vs {}", a.i_value, b.i_value);
}

#[test]
fn grid_refinement_moves_i_little() {
    let a = ground_state::solve(&GroundStateConfig::default(), &default_grid()).unwrap();
    let b = ground_state::solve(&GroundStateConfig::default(), &RadialGrid::new(200.0, 8192).unwrap()).unwrap();
    assert!(rel(a.i_value, b.i_value) < 1e-2);
}

fn bump(rng: &mut ChaCha8Rng, grid: &RadialGrid) -> Vec<f64> {
    let (a, c, w) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..5.0), rng.gen_range(0.5..3.0));
    grid.sample(|r| a * (-((r - c) / w).powi(2)).exp())
}

fn a_dot(grid: &RadialGrid, x: &(Vec<f64>, Vec<f64>), y: &(Vec<f64>, Vec<f64>)) -> f64 {
    let ax = grid.stiffness_apply(&x.0);
    let az = grid.stiffness_apply(&x.1);
    ax.iter().zip(&y.0).map(|(a, b)| a * b).sum::<f64>() + az.iter().zip(&y.1).map(|(a, b)| a * b).sum::<f64>()
}

#[test]
fn stationarity_on_the_gauge_slice() {
    let grid = default_grid();
    let gs = ground_state::solve(&GroundStateConfig::default(), &grid).unwrap();
    let x = &gs.normalized;
    let lambda = gs.lambda;
    let f = |p: &[f64], q: &[f64]| {
        let pair = RealFieldPair {
            p: p.to_vec(),
            q: q.to_vec(),
        };
        kinetic_real(&grid, &pair) - lambda * n_quartic(&grid, &pair)
    };
    // Gram-Schmidt of {generator, x} in the stiffness inner product
    let mut basis: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for mut b in [
        (dilation_generator(&grid, &x.p), dilation_generator(&grid, &x.q)),
        (x.p.clone(), x.q.clone()),
    ] {
        for o in &basis {
            let c = a_dot(&grid, &b, o) / a_dot(&grid, o, o);
            b.0.iter_mut().zip(&o.0).for_each(|(v, w)| *v -= c * w);
            b.1.iter_mut().zip(&o.1).for_each(|(v, w)| *v -= c * w);
        }
        basis.push(b);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let mut d = (bump(&mut rng, &grid), bump(&mut rng, &grid));
        for o in &basis {
            let c = a_dot(&grid, &d, o) / a_dot(&grid, o, o);
            d.0.iter_mut().zip(&o.0).for_each(|(v, w)| *v -= c * w);
            d.1.iter_mut().zip(&o.1).for_each(|(v, w)| *v -= c * w);
        }
        let t = 1e-4;
        let shift = |s: f64| {
            let p: Vec<f64> = x.p.iter().zip(&d.0).map(|(a, b)| a + s * b).collect();
            let q: Vec<f64> = x.q.iter().zip(&d.1).map(|(a, b)| a + s * b).collect();
            f(&p, &q)
        };
        let deriv = (shift(t) - shift(-t)) / (2.0 * t);
        let norm = (grid.norm(&d.0).powi(2) + grid.norm(&d.1).powi(2)).sqrt();
        assert!(deriv.abs() <= 1e-5 * norm, "derivative {deriv}, norm {norm}");
    }
}
