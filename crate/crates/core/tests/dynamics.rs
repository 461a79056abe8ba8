use critnls_core::criteria::{
    classify, default_seed, lambda_factory, thresholds_from_ground_state, Classification, Thresholds,
};
use critnls_core::cutoff::build_profile;
use critnls_core::evolution::{evolve, localized_virial_bound, EvolveConfig, Observer, SimState};
use critnls_core::ground_state::{self, GroundStateConfig};
use critnls_core::{Complex64, PhysicsParams, RadialGrid};

fn grid() -> RadialGrid {
    RadialGrid::new(100.0, 4096).unwrap()
}

fn thresholds(grid: &RadialGrid) -> Thresholds {
    let gs = ground_state::solve(&GroundStateConfig::default(), grid).unwrap();
    thresholds_from_ground_state(&gs, 5e-3).unwrap()
}

fn rank(c: Classification) -> u8 {
    match c {
        Classification::SubcriticalRegion => 0,
        Classification::Indeterminate => 1,
        Classification::SupercriticalBlowup => 2,
    }
}

#[test]
fn factory_classification_is_monotone() {
    let grid = grid();
    let th = thresholds(&grid);
    for params in [PhysicsParams::default(), PhysicsParams::resonant()] {
        let f = lambda_factory(&grid, &default_seed(&grid, params), &th).unwrap();
        let top = 2.0 * f.lambda_star;
        let mut last = None;
        let mut seen_blowup = false;
        for k in 1..=200 {
            let lambda = top * k as f64 / 200.0;
            let v = classify(&grid, &f.build(lambda), &th);
            assert!((v.e0 - f.energy_at(lambda)).abs() <= 1e-9 * (1.0 + v.e0.abs()));
            if v.classification == Classification::SupercriticalBlowup {
                assert!(lambda >= f.lambda_star - 1e-6);
                seen_blowup = true;
            } else if seen_blowup {
                panic!("blow-up verdict lost at λ = {lambda}");
            }
            if lambda < f.lambda_k * (1.0 - 1e-9) {
                assert_ne!(v.classification, Classification::SupercriticalBlowup);
            }
            last = Some(rank(v.classification));
        }
        assert_eq!(last, Some(2));
    }
}

#[test]
fn localized_virial_stays_under_its_bound() {
    let grid = grid();
    for params in [PhysicsParams::default(), PhysicsParams::resonant()] {
        let cfg = EvolveConfig {
            dt: 1e-3,
            t_max: 0.5,
            cutoff_r: 4.0,
            ..EvolveConfig::default()
        };
        let profile = build_profile(&grid, cfg.cutoff_r).unwrap();
        let out = evolve(&grid, SimState::new(default_seed(&grid, params).scaled(1.5)), &cfg, &mut ()).unwrap();
        assert!(!out.records.is_empty());
        for row in &out.records {
            let bound = localized_virial_bound(&profile, &params, row.mass, row.kinetic);
            assert!(row.r_loc.abs() <= bound, "t = {}: {} > {}", row.t, row.r_loc, bound);
        }
    }
}

#[test]
fn small_data_conserve_energy_and_mass() {
    let grid = grid();
    let cfg = EvolveConfig {
        dt: 1e-3,
        t_max: 1.0,
        ..EvolveConfig::default()
    };
    for params in [PhysicsParams::default(), PhysicsParams::resonant()] {
        let out = evolve(&grid, SimState::new(default_seed(&grid, params).scaled(0.01)), &cfg, &mut ()).unwrap();
        assert!(!out.status.is_blowup());
        let first = out.records[0];
        for row in &out.records {
            assert!((row.energy - first.energy).abs() <= 1e-6 * first.energy.abs());
            assert!((row.mass - first.mass).abs() <= 1e-10 * first.mass);
        }
        assert_eq!(out.state.step_count, cfg.total_steps());
    }
}

struct Distance<'a> {
    grid: &'a RadialGrid,
    p: Vec<Complex64>,
    q: Vec<Complex64>,
    worst: f64,
    seen: usize,
}

impl Observer for Distance<'_> {
    fn checkpoint(&mut self, state: &SimState) {
        let du: Vec<Complex64> = state.pair.u.iter().zip(&self.p).map(|(a, b)| a - b).collect();
        let dw: Vec<Complex64> = state.pair.w.iter().zip(&self.q).map(|(a, b)| a - b).collect();
        self.worst = self.worst.max(self.grid.norm(&du)).max(self.grid.norm(&dw));
        self.seen += 1;
    }
}

#[test]
fn resonant_ground_state_is_stationary() {
    let grid = grid();
    let gs = ground_state::solve(&GroundStateConfig::default(), &grid).unwrap();
    let params = PhysicsParams::resonant();
    let pair = gs.solution.to_complex(params);
    let cfg = EvolveConfig {
        dt: 1e-3,
        t_max: 1.0,
        sample_every: 50,
        checkpoint_every: 100,
        ..EvolveConfig::default()
    };
    let mut d = Distance {
        grid: &grid,
        p: pair.u.clone(),
        q: pair.w.clone(),
        worst: 0.0,
        seen: 0,
    };
    let out = evolve(&grid, SimState::new(pair), &cfg, &mut d).unwrap();
    assert!(!out.status.is_blowup());
    assert_eq!(d.seen, 10);
    assert!(d.worst <= 1e-4, "drifted {}", d.worst);
}
