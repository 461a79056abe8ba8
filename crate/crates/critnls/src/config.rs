//! Run configuration read from a sectioned TOML file.

use std::fs;
use std::path::{Path, PathBuf};

use critnls_core::evolution::EvolveConfig;
use critnls_core::ground_state::{GroundStateConfig, InitialGuess};
use critnls_core::{PhysicsParams, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub evolve: EvolveSection,
    pub ground_state: GroundStateSection,
    pub seed: SeedSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub r_max: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { r_max: 100.0, n: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub sigma: f64,
    pub mu: f64,
    pub resonant: bool,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            mu: 9.0,
            resonant: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub dt: f64,
    pub t_max: f64,
    pub sample_every: usize,
    #[serde(rename = "blowup_K_factor")]
    pub blowup_k_factor: f64,
    #[serde(rename = "cutoff_R")]
    pub cutoff_r: f64,
    /// 0 disables periodic checkpoints; the final state is always written.
    pub checkpoint_every: usize,
}

impl Default for EvolveSection {
    fn default() -> Self {
        let d = EvolveConfig::default();
        Self {
            dt: d.dt,
            t_max: d.t_max,
            sample_every: d.sample_every,
            blowup_k_factor: d.blowup_k_factor,
            cutoff_r: d.cutoff_r,
            checkpoint_every: d.checkpoint_every,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Semitrivial,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundStateSection {
    pub init: InitKind,
    pub perturbation: f64,
    pub descent_step: f64,
    pub max_iter: usize,
    #[serde(rename = "tol_rel_K")]
    pub tol_rel_k: f64,
    pub tol_residual: f64,
}

impl Default for GroundStateSection {
    fn default() -> Self {
        let d = GroundStateConfig::default();
        Self {
            init: InitKind::Semitrivial,
            perturbation: d.perturbation,
            descent_step: d.descent_step,
            max_iter: d.max_iter,
            tol_rel_k: d.tol_rel_k,
            tol_residual: d.tol_residual,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedKind {
    Gaussian,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSection {
    pub kind: SeedKind,
    /// Multiplies `e^{-r²}` in both slots, or the profiles read from `path`.
    pub amplitude: f64,
    pub path: Option<PathBuf>,
}

impl Default for SeedSection {
    fn default() -> Self {
        Self {
            kind: SeedKind::Gaussian,
            amplitude: 0.1,
            path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            plots: false,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {x}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        positive("grid.r_max", self.grid.r_max)?;
        if self.grid.n < 3 {
            return Err(CliError::Usage("grid.n must be at least 3".into()));
        }
        self.physics_params()?;
        let e = &self.evolve;
        positive("evolve.dt", e.dt)?;
        positive("evolve.t_max", e.t_max)?;
        positive("evolve.cutoff_R", e.cutoff_r)?;
        if e.sample_every == 0 {
            return Err(CliError::Usage("evolve.sample_every must be positive".into()));
        }
        if !(e.blowup_k_factor >= 1.0) {
            return Err(CliError::Usage("evolve.blowup_K_factor must be at least 1".into()));
        }
        let g = &self.ground_state;
        positive("ground_state.descent_step", g.descent_step)?;
        positive("ground_state.tol_rel_K", g.tol_rel_k)?;
        positive("ground_state.tol_residual", g.tol_residual)?;
        if g.max_iter == 0 {
            return Err(CliError::Usage("ground_state.max_iter must be positive".into()));
        }
        if !(g.perturbation >= 0.0) {
            return Err(CliError::Usage("ground_state.perturbation must be nonnegative".into()));
        }
        positive("seed.amplitude", self.seed.amplitude)?;
        if self.seed.kind == SeedKind::File && self.seed.path.is_none() {
            return Err(CliError::Usage("seed.kind = \"file\" needs seed.path".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<RadialGrid, CliError> {
        RadialGrid::new(self.grid.r_max, self.grid.n).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn physics_params(&self) -> Result<PhysicsParams, CliError> {
        let p = &self.physics;
        PhysicsParams::new(p.sigma, p.mu, p.resonant).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn evolve_config(&self, k_floor: f64) -> EvolveConfig {
        let e = &self.evolve;
        EvolveConfig {
            dt: e.dt,
            t_max: e.t_max,
            sample_every: e.sample_every,
            blowup_k_factor: e.blowup_k_factor,
            k_floor,
            cutoff_r: e.cutoff_r,
            checkpoint_every: e.checkpoint_every,
            ..EvolveConfig::default()
        }
    }

    pub fn ground_state_config(&self) -> GroundStateConfig {
        let g = &self.ground_state;
        GroundStateConfig {
            init: match g.init {
                InitKind::Semitrivial => InitialGuess::Semitrivial,
                InitKind::Gaussian => InitialGuess::GaussianPair,
            },
            perturbation: g.perturbation,
            descent_step: g.descent_step,
            max_iter: g.max_iter,
            tol_rel_k: g.tol_rel_k,
            tol_residual: g.tol_residual,
            ..GroundStateConfig::default()
        }
    }
}
