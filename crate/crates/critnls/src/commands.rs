//! The subcommands. Each returns the process exit code.

use std::fs;
use std::path::{Path, PathBuf};

use critnls_core::criteria::{
    classify, default_seed, lambda_factory, thresholds_from_ground_state, Thresholds, CONFINEMENT_TOL,
};
use critnls_core::cutoff::check_cutoff;
use critnls_core::evolution::{evolve, outer_decade_fraction, EvolveError, EvolveOutcome, SimState};
use critnls_core::ground_state::{self, GroundStateError};
use critnls_core::{ComplexFieldPair, GroundStateResult, PhysicsParams, RadialGrid};
use rayon::prelude::*;

use crate::config::{RunConfig, SeedKind};
use crate::io::{
    write_json, write_sweep, Checkpoint, DiagnosticsWriter, GroundStateJson, RunRecorder, SweepRow, VerdictJson,
};
use crate::plots::render_from_csv;
use crate::{CliError, EXIT_BLOWUP, EXIT_NOT_CONVERGED, EXIT_OK};

/// Exit code of `check-cutoff` when a bound fails.
pub const EXIT_CHECK_FAILED: i32 = 1;

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Common {
    pub out: Option<PathBuf>,
    pub plots: bool,
    pub quiet: bool,
}

struct Ctx {
    out: PathBuf,
    plots: bool,
    quiet: bool,
}

impl Ctx {
    fn new(cfg: Option<&RunConfig>, common: &Common) -> Result<Self, CliError> {
        let out = match (&common.out, cfg) {
            (Some(dir), _) => dir.clone(),
            (None, Some(cfg)) => cfg.output.dir.clone(),
            (None, None) => PathBuf::from("out"),
        };
        Ok(Self {
            out,
            plots: common.plots || cfg.is_some_and(|c| c.output.plots),
            quiet: common.quiet,
        })
    }

    fn ensure_dir(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::Io(format!("{}: {e}", self.out.display())))?;
        Ok(&self.out)
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn warn(&self, msg: impl AsRef<str>) {
        eprintln!("warning: {}", msg.as_ref());
    }
}

fn evolve_err(e: EvolveError) -> CliError {
    match e {
        EvolveError::BadConfig(_) | EvolveError::Grid(_) | EvolveError::Cutoff(_) => CliError::Usage(e.to_string()),
        EvolveError::NonFinite(_) => CliError::Numerics(e.to_string()),
    }
}

fn solve_ground_state(cfg: &RunConfig, grid: &RadialGrid) -> Result<GroundStateResult, GroundStateError> {
    ground_state::solve(&cfg.ground_state_config(), grid)
}

/// Thresholds from a certified ground state, or `None` with a warning.
fn thresholds(cfg: &RunConfig, grid: &RadialGrid, ctx: &Ctx) -> Option<Thresholds> {
    match solve_ground_state(cfg, grid) {
        Ok(gs) => match thresholds_from_ground_state(&gs, cfg.ground_state.tol_residual) {
            Ok(th) => Some(th),
            Err(e) => {
                ctx.warn(format!("thresholds unavailable: {e}"));
                None
            }
        },
        Err(e) => {
            ctx.warn(format!("thresholds unavailable: {e}"));
            None
        }
    }
}

/// The unit seed profile; initial data are `amplitude` times this.
fn seed_shape(cfg: &RunConfig, grid: &RadialGrid, params: PhysicsParams) -> Result<ComplexFieldPair, CliError> {
    match cfg.seed.kind {
        SeedKind::Gaussian => Ok(default_seed(grid, params)),
        SeedKind::File => {
            let path = cfg.seed.path.as_deref().ok_or_else(|| CliError::Usage("seed.path missing".into()))?;
            let mut pair = Checkpoint::read(path)?
                .to_pair(grid)
                .map_err(|e| CliError::NoInput(format!("{}: {e}", path.display())))?;
            pair.params = params;
            Ok(pair)
        }
    }
}

pub fn cmd_ground_state(cfg: &RunConfig, common: &Common) -> Result<i32, CliError> {
    let ctx = Ctx::new(Some(cfg), common)?;
    let grid = cfg.grid()?;
    let gs = match solve_ground_state(cfg, &grid) {
        Ok(gs) => gs,
        Err(e @ (GroundStateError::MaxIterExceeded { .. } | GroundStateError::StepCollapse(_))) => {
            eprintln!("ground state: {e}");
            return Ok(EXIT_NOT_CONVERGED);
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let path = ctx.ensure_dir()?.join("ground_state.json");
    write_json(&path, &GroundStateJson::new(&grid, &gs))?;
    ctx.say(format!("I          = {}", gs.i_value));
    ctx.say(format!("C_opt      = {}", gs.c_opt));
    ctx.say(format!("S          = {}", gs.s_value));
    ctx.say(format!("residual_P = {:e}", gs.residual_p));
    ctx.say(format!("residual_Q = {:e}", gs.residual_q));
    ctx.say(format!("iterations = {}", gs.iterations));
    if gs.is_certified(cfg.ground_state.tol_residual) {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "ground state: residuals above {:e}, not certified",
            cfg.ground_state.tol_residual
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn run_and_record(
    grid: &RadialGrid,
    state: SimState,
    cfg: &RunConfig,
    k_floor: f64,
    csv: &Path,
    checkpoints: Option<&Path>,
) -> Result<EvolveOutcome, CliError> {
    let ecfg = cfg.evolve_config(k_floor);
    let mut rec = RunRecorder::new(grid, Some(DiagnosticsWriter::create(csv)?), checkpoints);
    let outcome = evolve(grid, state, &ecfg, &mut rec).map_err(evolve_err)?;
    rec.finish()?;
    Ok(outcome)
}

fn drift(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        (b - a).abs()
    } else {
        ((b - a) / a).abs()
    }
}

pub fn cmd_evolve(cfg: &RunConfig, common: &Common, resume: Option<&Path>) -> Result<i32, CliError> {
    let ctx = Ctx::new(Some(cfg), common)?;
    let grid = cfg.grid()?;
    let params = cfg.physics_params()?;
    let shape = seed_shape(cfg, &grid, params)?;
    let state0 = match resume {
        Some(path) => {
            let st = Checkpoint::read(path)?
                .to_state(&grid, cfg.evolve.dt)
                .map_err(|e| CliError::NoInput(format!("{}: {e}", path.display())))?;
            if st.pair.params != params {
                ctx.warn("checkpoint physics parameters differ from the config; using the checkpoint's");
            }
            st
        }
        None => SimState::new(shape.scaled(cfg.seed.amplitude)),
    };
    let outer = outer_decade_fraction(&grid, &state0.pair);
    if outer > CONFINEMENT_TOL {
        ctx.warn(format!(
            "{:.2}% of the |x|²-weighted mass lies in the outer decade of the grid; V and V' are not meaningful",
            100.0 * outer
        ));
    }
    let th = thresholds(cfg, &grid, &ctx);
    let out = ctx.ensure_dir()?;
    let ck_dir = out.join("checkpoints");
    if cfg.evolve.checkpoint_every > 0 {
        fs::create_dir_all(&ck_dir).map_err(|e| CliError::Io(format!("{}: {e}", ck_dir.display())))?;
    }
    let csv = out.join("diagnostics.csv");
    let outcome = run_and_record(
        &grid,
        state0.clone(),
        cfg,
        th.map_or(0.0, |t| t.k_gs),
        &csv,
        (cfg.evolve.checkpoint_every > 0).then_some(ck_dir.as_path()),
    )?;
    write_json(
        &out.join("checkpoint.json"),
        &Checkpoint::new(&grid, outcome.state.t, &outcome.state.pair),
    )?;
    if let Some(th) = th {
        let v = classify(&grid, &state0.pair, &th);
        let lambda_star = lambda_factory(&grid, &shape, &th).ok().map(|f| f.lambda_star);
        write_json(&out.join("verdict.json"), &VerdictJson::new(&v, &th, lambda_star))?;
        ctx.say(format!("classification = {}", v.classification.label()));
    }
    if ctx.plots {
        render_from_csv(&csv, &out.join("plots"))?;
    }
    if let (Some(first), Some(last)) = (outcome.records.first(), outcome.records.last()) {
        ctx.say(format!("energy drift   = {:e}", drift(first.energy, last.energy)));
        ctx.say(format!("mass drift     = {:e}", drift(first.mass, last.mass)));
    }
    ctx.say(format!("status         = {}", outcome.status.label()));
    ctx.say(format!("t              = {}", outcome.state.t));
    match outcome.status.halt_time() {
        Some(t) => {
            ctx.say(format!("halt_time      = {t}"));
            Ok(EXIT_BLOWUP)
        }
        None => Ok(EXIT_OK),
    }
}

pub fn cmd_classify(cfg: &RunConfig, common: &Common, state: &Path) -> Result<i32, CliError> {
    let ctx = Ctx::new(Some(cfg), common)?;
    let grid = cfg.grid()?;
    let pair = Checkpoint::read(state)?
        .to_pair(&grid)
        .map_err(|e| CliError::NoInput(format!("{}: {e}", state.display())))?;
    let Some(th) = thresholds(cfg, &grid, &ctx) else {
        return Ok(EXIT_NOT_CONVERGED);
    };
    let lambda_star = seed_shape(cfg, &grid, pair.params)
        .ok()
        .and_then(|s| lambda_factory(&grid, &s, &th).ok())
        .map(|f| f.lambda_star);
    let v = classify(&grid, &pair, &th);
    write_json(&ctx.ensure_dir()?.join("verdict.json"), &VerdictJson::new(&v, &th, lambda_star))?;
    ctx.say(format!("E0             = {}", v.e0));
    ctx.say(format!("K0             = {}", v.k0));
    ctx.say(format!("E_gs           = {}", th.e_gs));
    ctx.say(format!("K_gs           = {}", th.k_gs));
    ctx.say(format!("classification = {}", v.classification.label()));
    Ok(EXIT_OK)
}

/// `steps` equally spaced values from `min` to `max`.
pub fn lambda_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("empty lambda grid (steps = 0)".into()));
    }
    if !(min.is_finite() && max.is_finite() && min > 0.0 && max >= min) {
        return Err(CliError::Usage(format!("bad lambda range [{min}, {max}]")));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps)
        .map(|k| min + (max - min) * k as f64 / (steps - 1) as f64)
        .collect())
}

pub fn cmd_sweep(cfg: &RunConfig, common: &Common, min: f64, max: f64, steps: usize) -> Result<i32, CliError> {
    let lambdas = lambda_grid(min, max, steps)?;
    let ctx = Ctx::new(Some(cfg), common)?;
    let grid = cfg.grid()?;
    let params = cfg.physics_params()?;
    let shape = seed_shape(cfg, &grid, params)?;
    let Some(th) = thresholds(cfg, &grid, &ctx) else {
        return Ok(EXIT_NOT_CONVERGED);
    };
    let factory = lambda_factory(&grid, &shape, &th).map_err(|e| CliError::Usage(e.to_string()))?;
    let members = ctx.ensure_dir()?.join("sweep");
    fs::create_dir_all(&members).map_err(|e| CliError::Io(format!("{}: {e}", members.display())))?;

    let rows: Vec<Result<SweepRow, CliError>> = lambdas
        .par_iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let pair = factory.build(lambda);
            let v = classify(&grid, &pair, &th);
            let csv = members.join(format!("member_{k:04}.csv"));
            let outcome = run_and_record(&grid, SimState::new(pair), cfg, th.k_gs, &csv, None)?;
            Ok(SweepRow {
                lambda,
                e0: v.e0,
                k0: v.k0,
                classification: v.classification.label().to_string(),
                status: outcome.status.label().to_string(),
                halt_time: outcome.status.halt_time(),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_sweep(&ctx.out.join("sweep.csv"), &rows)?;
    ctx.say(format!("lambda_star = {}  lambda_K = {}", factory.lambda_star, factory.lambda_k));
    for r in &rows {
        ctx.say(format!(
            "{:<12.6} {:<22} {:<10} {}",
            r.lambda,
            r.classification,
            r.status,
            r.halt_time.map(|t| t.to_string()).unwrap_or_default()
        ));
    }
    Ok(EXIT_OK)
}

/// Samples per cutoff branch.
pub const CUTOFF_SAMPLES: usize = 10_000;
/// Allowed deviation of each decay ratio from its scaling value.
pub const CUTOFF_SLACK: f64 = 0.05;

pub fn cmd_check_cutoff(radii: &[f64], common: &Common) -> Result<i32, CliError> {
    let ctx = Ctx::new(None, common)?;
    if radii.is_empty() {
        return Err(CliError::Usage("no radii given".into()));
    }
    let report = check_cutoff(radii, CUTOFF_SAMPLES).map_err(|e| CliError::Usage(e.to_string()))?;
    ctx.say(format!("m0 = {}  m1 = {}", report.m0, report.m1));
    ctx.say(format!(
        "{:>10} {:>8} {:>10} {:>14} {:>14} {:>14}",
        "R", "inner", "max chi''", "sup lap", "sup bilap", "R^2 sup bilap"
    ));
    for c in &report.per_radius {
        ctx.say(format!(
            "{:>10} {:>8} {:>10.6} {:>14.6e} {:>14.6e} {:>14.6e}",
            c.radius,
            if c.inner_exact && c.localized { "exact" } else { "FAIL" },
            c.max_d2,
            c.sup_laplacian,
            c.sup_bilaplacian,
            c.radius * c.radius * c.sup_bilaplacian
        ));
    }
    for (w, ratio) in report.per_radius.windows(2).zip(&report.decay_ratios) {
        ctx.say(format!("decay {} -> {}: {:.6}", w[0].radius, w[1].radius, ratio));
    }
    ctx.say(format!("C = {:.6e}", report.bilaplacian_constant));
    let pass = report.passes(CUTOFF_SLACK);
    ctx.say(if pass { "cutoff checks: pass" } else { "cutoff checks: FAIL" });
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Re-emits the chart set from an existing diagnostics table.
pub fn cmd_plot(csv: &Path, common: &Common) -> Result<i32, CliError> {
    let ctx = Ctx::new(None, common)?;
    let dir = common.out.clone().unwrap_or_else(|| csv.parent().unwrap_or(Path::new(".")).join("plots"));
    for p in render_from_csv(csv, &dir)? {
        ctx.say(p.display().to_string());
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_grid_endpoints() {
        assert_eq!(lambda_grid(1.0, 2.0, 3).unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(lambda_grid(1.0, 2.0, 1).unwrap(), vec![1.0]);
        assert!(matches!(lambda_grid(1.0, 2.0, 0), Err(CliError::Usage(_))));
        assert!(matches!(lambda_grid(2.0, 1.0, 4), Err(CliError::Usage(_))));
        assert!(matches!(lambda_grid(f64::NAN, 1.0, 4), Err(CliError::Usage(_))));
    }

    #[test]
    fn drift_is_relative() {
        assert_eq!(drift(2.0, 2.5), 0.25);
        assert_eq!(drift(0.0, 1e-3), 1e-3);
    }
}
