//! On-disk formats: ground-state and verdict JSON, checkpoints, and the
//! diagnostics and sweep tables.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use critnls_core::criteria::{Thresholds, Verdict};
use critnls_core::evolution::{DiagnosticsRecord, Observer, SimState};
use critnls_core::{Complex64, ComplexFieldPair, GroundStateResult, PhysicsParams, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DIAGNOSTICS_HEADER: [&str; 10] = ["t", "E", "M", "K", "P", "tau", "V", "Vprime", "Rloc", "amp_max"];
pub const SWEEP_HEADER: [&str; 6] = ["lambda", "E0", "K0", "classification", "status", "halt_time"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateJson {
    #[serde(rename = "I")]
    pub i_value: f64,
    pub lambda: f64,
    #[serde(rename = "C_opt")]
    pub c_opt: f64,
    #[serde(rename = "S")]
    pub s_value: f64,
    #[serde(rename = "residual_P")]
    pub residual_p: f64,
    #[serde(rename = "residual_Q")]
    pub residual_q: f64,
    pub iterations: usize,
    pub r: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
}

impl GroundStateJson {
    pub fn new(grid: &RadialGrid, gs: &GroundStateResult) -> Self {
        Self {
            i_value: gs.i_value,
            lambda: gs.lambda,
            c_opt: gs.c_opt,
            s_value: gs.s_value,
            residual_p: gs.residual_p,
            residual_q: gs.residual_q,
            iterations: gs.iterations,
            r: grid.nodes().to_vec(),
            p: gs.solution.p.clone(),
            q: gs.solution.q.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    pub sigma: f64,
    pub mu: f64,
    pub resonant: bool,
    pub r: Vec<f64>,
    pub u_re: Vec<f64>,
    pub u_im: Vec<f64>,
    pub w_re: Vec<f64>,
    pub w_im: Vec<f64>,
}

impl Checkpoint {
    pub fn new(grid: &RadialGrid, t: f64, pair: &ComplexFieldPair) -> Self {
        Self {
            t,
            sigma: pair.params.sigma,
            mu: pair.params.mu,
            resonant: pair.params.resonant,
            r: grid.nodes().to_vec(),
            u_re: pair.u.iter().map(|z| z.re).collect(),
            u_im: pair.u.iter().map(|z| z.im).collect(),
            w_re: pair.w.iter().map(|z| z.re).collect(),
            w_im: pair.w.iter().map(|z| z.im).collect(),
        }
    }

    /// Field pair on `grid`; the stored nodes must match the grid's.
    pub fn to_pair(&self, grid: &RadialGrid) -> Result<ComplexFieldPair, String> {
        let n = grid.n();
        let lens = [self.r.len(), self.u_re.len(), self.u_im.len(), self.w_re.len(), self.w_im.len()];
        if lens.iter().any(|&l| l != n) {
            return Err(format!("checkpoint arrays have lengths {lens:?}, grid has {n} nodes"));
        }
        let h = grid.h();
        if let Some((a, b)) = self.r.iter().zip(grid.nodes()).find(|(a, b)| (*a - *b).abs() > 1e-9 * h) {
            return Err(format!("checkpoint node {a} does not match grid node {b}"));
        }
        let params = PhysicsParams::new(self.sigma, self.mu, self.resonant).map_err(|e| e.to_string())?;
        let zip = |re: &[f64], im: &[f64]| re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Ok(ComplexFieldPair {
            u: zip(&self.u_re, &self.u_im),
            w: zip(&self.w_re, &self.w_im),
            params,
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::NoInput(format!("cannot read checkpoint {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::NoInput(format!("malformed checkpoint {}: {e}", path.display())))
    }

    /// Restores a run state; the step counter is recovered as `round(t/dt)`.
    pub fn to_state(&self, grid: &RadialGrid, dt: f64) -> Result<SimState, String> {
        let pair = self.to_pair(grid)?;
        let steps = (self.t / dt).round();
        if !(steps >= 0.0) {
            return Err(format!("checkpoint time {} is not a nonnegative multiple of dt", self.t));
        }
        Ok(SimState {
            t: self.t,
            pair,
            step_count: steps as u64,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
    #[serde(rename = "E_gs")]
    pub e_gs: f64,
    #[serde(rename = "K_gs")]
    pub k_gs: f64,
    pub classification: String,
    #[serde(rename = "margin_E")]
    pub margin_e: f64,
    #[serde(rename = "margin_K")]
    pub margin_k: f64,
    pub lambda_star: Option<f64>,
}

impl VerdictJson {
    pub fn new(v: &Verdict, th: &Thresholds, lambda_star: Option<f64>) -> Self {
        Self {
            e0: v.e0,
            k0: v.k0,
            e_gs: th.e_gs,
            k_gs: th.k_gs,
            classification: v.classification.label().to_string(),
            margin_e: v.margin_e,
            margin_k: v.margin_k,
            lambda_star,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::NoInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::NoInput(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn record_fields(r: &DiagnosticsRecord) -> [String; 10] {
    [
        r.t, r.energy, r.mass, r.kinetic, r.p_quartic, r.tau, r.virial, r.virial_prime, r.r_loc, r.amp_max,
    ]
    .map(|x| x.to_string())
}

/// Streams diagnostics rows to a CSV file as they are produced.
pub struct DiagnosticsWriter {
    inner: csv::Writer<BufWriter<File>>,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut inner = csv::Writer::from_writer(BufWriter::new(file));
        inner.write_record(DIAGNOSTICS_HEADER).map_err(io_err(path))?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> csv::Result<()> {
        self.inner.write_record(record_fields(r))
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

pub fn write_diagnostics(path: &Path, rows: &[DiagnosticsRecord]) -> Result<(), CliError> {
    let mut w = DiagnosticsWriter::create(path)?;
    for r in rows {
        w.write(r).map_err(io_err(path))?;
    }
    w.finish().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>, CliError> {
    let bad = |m: String| CliError::NoInput(format!("{}: {m}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(DIAGNOSTICS_HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut x = [0.0; 10];
        for (slot, field) in x.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|_| bad(format!("bad number {field:?}")))?;
        }
        let [t, energy, mass, kinetic, p_quartic, tau, virial, virial_prime, r_loc, amp_max] = x;
        rows.push(DiagnosticsRecord {
            t,
            energy,
            mass,
            kinetic,
            p_quartic,
            tau,
            virial,
            virial_prime,
            r_loc,
            amp_max,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub e0: f64,
    pub k0: f64,
    pub classification: String,
    pub status: String,
    pub halt_time: Option<f64>,
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(io_err(path))?;
    w.write_record(SWEEP_HEADER).map_err(io_err(path))?;
    for r in rows {
        let halt = r.halt_time.map(|t| t.to_string()).unwrap_or_default();
        w.write_record([
            r.lambda.to_string(),
            r.e0.to_string(),
            r.k0.to_string(),
            r.classification.clone(),
            r.status.clone(),
            halt,
        ])
        .map_err(io_err(path))?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Observer that writes rows to a CSV stream and checkpoints to a directory.
pub struct RunRecorder<'a> {
    grid: &'a RadialGrid,
    csv: Option<DiagnosticsWriter>,
    checkpoint_dir: Option<&'a Path>,
    pub error: Option<String>,
}

impl<'a> RunRecorder<'a> {
    pub fn new(grid: &'a RadialGrid, csv: Option<DiagnosticsWriter>, checkpoint_dir: Option<&'a Path>) -> Self {
        Self {
            grid,
            csv,
            checkpoint_dir,
            error: None,
        }
    }

    pub fn finish(self) -> Result<(), CliError> {
        if let Some(e) = self.error {
            return Err(CliError::Io(e));
        }
        match self.csv {
            Some(w) => w.finish().map_err(|e| CliError::Io(e.to_string())),
            None => Ok(()),
        }
    }
}

impl Observer for RunRecorder<'_> {
    fn record(&mut self, row: &DiagnosticsRecord) {
        if let (Some(w), None) = (self.csv.as_mut(), &self.error) {
            if let Err(e) = w.write(row) {
                self.error = Some(e.to_string());
            }
        }
    }

    fn checkpoint(&mut self, state: &SimState) {
        let Some(dir) = self.checkpoint_dir else { return };
        let path = dir.join(format!("checkpoint_{:09}.json", state.step_count));
        if let Err(e) = write_json(&path, &Checkpoint::new(self.grid, state.t, &state.pair)) {
            self.error.get_or_insert(e.to_string());
        }
    }
}
