//! Command-line front end.
//!
//! Each subcommand builds the requested family from flags, runs one
//! diagnostic or solver, and renders either CSV (header row, 15 significant
//! digits) or a JSON report that echoes the run configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{projector_dephase, projector_depolarizing, projector_replacer, DensityMatrix, Superoperator};
use crate::diagnostics::{
    self, BlpReport, CapacitySeries, DiagnosticsError, DivisibilityReport, SemiMarkovReport, Verdict,
};
use crate::family::{self, DynamicalMapFamily, FamilyError, ScalarFn};
use crate::mixture::{self, MixtureDecomposition, MixtureError};

/// Exit code for a non-Markovian verdict under `--fail-on-nonmarkovian`.
pub const EXIT_NONMARKOVIAN: u8 = 3;

/// Largest internal step used by the ODE and memory-kernel backends.
pub const SOLVER_SUBSTEP: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::InvalidArgs(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 4,
        }
    }
}

impl From<MixtureError> for CliError {
    fn from(e: MixtureError) -> Self {
        match e {
            MixtureError::BadParams(m) => CliError::InvalidArgs(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::BadParams(m) => CliError::InvalidArgs(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<DiagnosticsError> for CliError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::UnsupportedChannel | DiagnosticsError::BadDim(_) => CliError::InvalidArgs(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Local decoherence rates of the semigroup and both mixture components.
    Rates,
    /// Depolarizing channel capacity along the three trajectories.
    Capacity,
    /// CP-divisibility scan of the selected family.
    Divisibility,
    /// Trace-distance (BLP) witness scan of the selected family.
    Blp,
    /// Waiting-time density check of the selected family.
    Semimarkov,
    /// Solve the selected family with the chosen backend.
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Depolarizing,
    Dephasing,
    Replacer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Sin2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Semigroup,
    Lambda1,
    Lambda2,
    PauliMixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Closed,
    Ode,
    Volterra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Const,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "dynmap", version, about = "Dynamical-map families and Markovianity diagnostics")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    /// Semigroup rate γ.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub gamma: f64,
    /// Mixing weight p.
    #[arg(long, global = true, default_value_t = 0.75)]
    pub p: f64,
    /// Depth ε of the sin² profile, 0 < ε < 1.
    #[arg(long, global = true, default_value_t = 0.75)]
    pub epsilon: f64,
    /// Rate c of the Pauli mixture.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub c: f64,
    /// Hilbert-space dimension.
    #[arg(long, global = true, default_value_t = 2)]
    pub d: usize,
    #[arg(long, global = true, default_value_t = 10.0)]
    pub tmax: f64,
    /// Number of grid intervals on [0, tmax].
    #[arg(long, global = true, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, global = true, value_enum, default_value_t = ChannelKind::Depolarizing)]
    pub channel: ChannelKind,
    #[arg(long, global = true, value_enum, default_value_t = ProfileKind::Sin2)]
    pub profile: ProfileKind,
    #[arg(long, global = true, value_enum, default_value_t = FamilyKind::Semigroup)]
    pub family: FamilyKind,
    #[arg(long, global = true, value_enum, default_value_t = Backend::Closed)]
    pub backend: Backend,
    #[arg(long, global = true, value_enum, default_value_t = KernelKind::Const)]
    pub kernel: KernelKind,
    /// Two-column CSV (t, k) sampled memory function for `--kernel custom`.
    #[arg(long, global = true)]
    pub kernel_file: Option<PathBuf>,
    /// Output format; CSV for rates/capacity and JSON otherwise when omitted.
    #[arg(long, global = true, value_enum)]
    pub output: Option<OutputFormat>,
    /// Write to PATH instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the random state pairs of the BLP scan.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Exit with status 3 when a non-Markovian verdict is rendered.
    #[arg(long, global = true)]
    pub fail_on_nonmarkovian: bool,
}

/// Validated run configuration, echoed into JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: Command,
    pub gamma: f64,
    pub p: f64,
    pub epsilon: f64,
    pub c: f64,
    pub d: usize,
    pub tmax: f64,
    pub steps: usize,
    pub channel: ChannelKind,
    pub profile: ProfileKind,
    pub family: FamilyKind,
    pub backend: Backend,
    pub kernel: KernelKind,
    pub kernel_file: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    pub fail_on_nonmarkovian: bool,
}

impl RunConfig {
    pub fn from_args(a: &Args) -> Result<Self, CliError> {
        let default_format = match a.command {
            Command::Rates | Command::Capacity => OutputFormat::Csv,
            _ => OutputFormat::Json,
        };
        let cfg = Self {
            subcommand: a.command,
            gamma: a.gamma,
            p: a.p,
            epsilon: a.epsilon,
            c: a.c,
            d: a.d,
            tmax: a.tmax,
            steps: a.steps,
            channel: a.channel,
            profile: a.profile,
            family: a.family,
            backend: a.backend,
            kernel: a.kernel,
            kernel_file: a.kernel_file.clone(),
            output_format: a.output.unwrap_or(default_format),
            output_path: a.out.clone(),
            seed: a.seed,
            fail_on_nonmarkovian: a.fail_on_nonmarkovian,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::InvalidArgs(m));
        if self.steps < 2 {
            return bad(format!("--steps must be at least 2, got {}", self.steps));
        }
        if !(self.tmax > 0.0 && self.tmax.is_finite()) {
            return bad(format!("--tmax must be positive, got {}", self.tmax));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("--gamma must be positive, got {}", self.gamma));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return bad(format!("--p must lie in (0, 1), got {}", self.p));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("--epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("--c must be positive, got {}", self.c));
        }
        if self.d < 2 {
            return bad(format!("--d must be at least 2, got {}", self.d));
        }
        if self.family == FamilyKind::PauliMixture && self.d != 2 {
            return bad("the Pauli mixture is a qubit family; use --d 2".into());
        }
        if self.kernel == KernelKind::Custom && self.kernel_file.is_none() && self.backend == Backend::Volterra {
            return bad("--kernel custom needs --kernel-file".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.tmax * i as f64 / self.steps as f64).collect()
    }

    pub fn projector(&self) -> Superoperator {
        match self.channel {
            ChannelKind::Depolarizing => projector_depolarizing(self.d),
            ChannelKind::Dephasing => projector_dephase(self.d).expect("d validated"),
            ChannelKind::Replacer => projector_replacer(&DensityMatrix::basis(self.d, 0)),
        }
    }

    pub fn decomposition(&self) -> Result<MixtureDecomposition, CliError> {
        let profile = match self.profile {
            ProfileKind::Sin2 => mixture::g_sin2(self.gamma, self.p, self.epsilon)?,
        };
        Ok(mixture::decompose(profile, &self.grid())?)
    }

    pub fn family(&self) -> Result<DynamicalMapFamily, CliError> {
        match self.family {
            FamilyKind::PauliMixture => Ok(family::pauli_mixture(self.c)?),
            FamilyKind::Semigroup => Ok(family::projector_semigroup(self.gamma, self.projector())?),
            FamilyKind::Lambda1 => Ok(self.decomposition()?.family1(self.projector())?),
            FamilyKind::Lambda2 => Ok(self.decomposition()?.family2(self.projector())?),
        }
    }
}

/// Formats a value with 15 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    format!("{x:.14e}")
}

fn csv_table(columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Column-oriented table with a configuration echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityOutput {
    pub config: RunConfig,
    pub report: DivisibilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlpOutput {
    pub config: RunConfig,
    pub seed: u64,
    pub pairs: usize,
    pub report: BlpReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityOutput {
    pub config: RunConfig,
    pub semigroup: CapacitySeries,
    pub lambda1: CapacitySeries,
    pub lambda2: CapacitySeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiMarkovOutput {
    pub config: RunConfig,
    pub report: SemiMarkovReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub config: RunConfig,
    pub backend: Backend,
    pub tgrid: Vec<f64>,
    /// Weight of E in Λ(t) = (1 − x)𝟙 + xE; absent for non-projector families.
    pub weight: Option<Vec<f64>>,
    /// Closed-form reference weight, when one is known.
    pub reference: Option<Vec<f64>>,
    /// Pointwise deviation from the reference (Frobenius norm of the map difference for the ODE backend).
    pub residual: Option<Vec<f64>>,
    pub max_residual: Option<f64>,
}

/// Rendered output of one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub text: String,
    pub nonmarkovian: bool,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg.subcommand {
        Command::Rates => cmd_rates(cfg),
        Command::Capacity => cmd_capacity(cfg),
        Command::Divisibility => cmd_divisibility(cfg),
        Command::Blp => cmd_blp(cfg),
        Command::Semimarkov => cmd_semimarkov(cfg),
        Command::Solve => cmd_solve(cfg),
    }
}

/// Runs the parsed command line and writes its output; returns the exit code.
pub fn execute(args: &Args) -> Result<u8, CliError> {
    let cfg = RunConfig::from_args(args)?;
    let out = run(&cfg)?;
    match &cfg.output_path {
        Some(path) => fs::write(path, &out.text)?,
        None => print!("{}", out.text),
    }
    Ok(if cfg.fail_on_nonmarkovian && out.nonmarkovian { EXIT_NONMARKOVIAN } else { 0 })
}

fn rate_or_numerical(r: Result<f64, MixtureError>) -> Result<f64, CliError> {
    r.map_err(|e| CliError::Numerical(e.to_string()))
}

pub fn cmd_rates(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let dec = cfg.decomposition()?;
    let tg = cfg.grid();
    let rows = crate::par::try_map_indexed(tg.len(), |i| {
        let t = tg[i];
        Ok::<_, CliError>(vec![t, cfg.gamma, rate_or_numerical(dec.gamma1(t))?, rate_or_numerical(dec.gamma2(t))?])
    })?;
    let nonmarkovian = rows.iter().any(|r| r[2] < 0.0 || r[3] < 0.0);
    let columns = ["t", "gamma_semigroup", "gamma1", "gamma2"];
    let text = match cfg.output_format {
        OutputFormat::Csv => csv_table(&columns, rows),
        OutputFormat::Json => to_json(&TableReport {
            config: cfg.clone(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows,
        })?,
    };
    Ok(RunOutput { text, nonmarkovian })
}

pub fn cmd_capacity(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let e = cfg.projector();
    diagnostics::require_depolarizing(&e)?;
    let dec = cfg.decomposition()?;
    let tg = cfg.grid();
    let gamma = cfg.gamma;
    let semigroup = diagnostics::capacity_trajectory(&|t: f64| (-gamma * t).exp(), &tg, cfg.d)?;
    let lambda1 = diagnostics::capacity_trajectory(&|t| dec.mu1(t), &tg, cfg.d)?;
    let lambda2 = diagnostics::capacity_trajectory(&|t| dec.mu2(t), &tg, cfg.d)?;
    let nonmarkovian = !lambda1.increasing_intervals().is_empty() || !lambda2.increasing_intervals().is_empty();
    let text = match cfg.output_format {
        OutputFormat::Csv => csv_table(
            &["t", "C_semigroup", "C_lambda1", "C_lambda2"],
            (0..tg.len()).map(|i| vec![tg[i], semigroup.capacity[i], lambda1.capacity[i], lambda2.capacity[i]]),
        ),
        OutputFormat::Json => to_json(&CapacityOutput { config: cfg.clone(), semigroup, lambda1, lambda2 })?,
    };
    Ok(RunOutput { text, nonmarkovian })
}

pub fn cmd_divisibility(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let fam = cfg.family()?;
    let tg = cfg.grid();
    let report =
        diagnostics::cp_divisibility_scan(&fam, &tg, diagnostics::default_delta(&tg), diagnostics::DIVISIBILITY_TOL)?;
    let nonmarkovian = report.verdict == Verdict::Nondivisible;
    let text = match cfg.output_format {
        OutputFormat::Csv => {
            csv_table(&["t", "min_choi_eig"], report.tgrid.iter().zip(&report.min_choi_eig).map(|(&t, &l)| vec![t, l]))
        }
        OutputFormat::Json => to_json(&DivisibilityOutput { config: cfg.clone(), report })?,
    };
    Ok(RunOutput { text, nonmarkovian })
}

fn state_pairs(cfg: &RunConfig) -> Vec<diagnostics::StatePair> {
    if cfg.d == 2 {
        return diagnostics::default_qubit_pairs(cfg.seed);
    }
    // Orthogonal basis-state pairs for qudits.
    let mut pairs = Vec::new();
    for i in 0..cfg.d {
        for j in (i + 1)..cfg.d {
            pairs.push((DensityMatrix::basis(cfg.d, i), DensityMatrix::basis(cfg.d, j)));
        }
    }
    pairs
}

pub fn cmd_blp(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let fam = cfg.family()?;
    let tg = cfg.grid();
    let pairs = state_pairs(cfg);
    let report = diagnostics::blp_scan(&fam, &tg, &pairs, diagnostics::BLP_STEP, diagnostics::BLP_TOL)?;
    let nonmarkovian = !report.is_markovian();
    let text = match cfg.output_format {
        OutputFormat::Csv => {
            let mut s = String::new();
            writeln!(s, "# seed={}", cfg.seed).expect("write to string");
            s.push_str(&csv_table(&["t", "sigma"], report.tgrid.iter().zip(&report.sigma).map(|(&t, &v)| vec![t, v])));
            s
        }
        OutputFormat::Json => to_json(&BlpOutput { config: cfg.clone(), seed: cfg.seed, pairs: pairs.len(), report })?,
    };
    Ok(RunOutput { text, nonmarkovian })
}

fn waiting_density(cfg: &RunConfig) -> Result<(ScalarFn, Vec<f64>), CliError> {
    let gamma = cfg.gamma;
    match cfg.family {
        FamilyKind::Semigroup => Ok((Arc::new(move |t: f64| gamma * (-gamma * t).exp()), Vec::new())),
        FamilyKind::Lambda1 | FamilyKind::Lambda2 => {
            let dec = cfg.decomposition()?;
            let breaks = dec.profile().breakpoints().within(0.0, cfg.tmax);
            let (f1, f2) = mixture::waiting_densities(&dec);
            Ok((if cfg.family == FamilyKind::Lambda1 { f1 } else { f2 }, breaks))
        }
        FamilyKind::PauliMixture => {
            Err(CliError::InvalidArgs("the Pauli mixture is not a projector family; no waiting-time density".into()))
        }
    }
}

pub fn cmd_semimarkov(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (f, breaks) = waiting_density(cfg)?;
    let tg = cfg.grid();
    let report = diagnostics::semimarkov_check(&*f, cfg.tmax, &tg, &breaks);
    let nonmarkovian = !report.passed;
    let text = match cfg.output_format {
        OutputFormat::Csv => csv_table(
            &["t", "f", "survival"],
            report.tgrid.iter().zip(&report.survival).map(|(&t, &s)| vec![t, f(t), s]),
        ),
        OutputFormat::Json => to_json(&SemiMarkovOutput { config: cfg.clone(), report })?,
    };
    Ok(RunOutput { text, nonmarkovian })
}

/// Piecewise-linear memory function from a two-column `t,k` CSV file.
fn load_kernel(path: &PathBuf) -> Result<ScalarFn, CliError> {
    let text = fs::read_to_string(path)?;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cells = line.split(',').map(str::trim);
        let (Some(a), Some(b)) = (cells.next(), cells.next()) else {
            return Err(CliError::InvalidArgs(format!("kernel file line {}: expected two columns", n + 1)));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(t), Ok(k)) => pts.push((t, k)),
            // A non-numeric first row is a header.
            _ if pts.is_empty() => continue,
            _ => return Err(CliError::InvalidArgs(format!("kernel file line {}: not numeric", n + 1))),
        }
    }
    if pts.len() < 2 || pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(CliError::InvalidArgs("kernel file needs at least two rows with ascending t".into()));
    }
    Ok(Arc::new(move |t: f64| {
        let i = pts.partition_point(|&(s, _)| s <= t);
        if i == 0 {
            return pts[0].1;
        }
        if i == pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (t0, k0) = pts[i - 1];
        let (t1, k1) = pts[i];
        k0 + (k1 - k0) * (t - t0) / (t1 - t0)
    }))
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let tg = cfg.grid();
    let h = cfg.tmax / cfg.steps as f64;
    let out = match cfg.backend {
        Backend::Closed => {
            let fam = cfg.family()?;
            let weight = match cfg.family {
                FamilyKind::PauliMixture => None,
                _ => Some(tg.iter().map(|&t| 1.0 - fam.profile(t).expect("projector family")).collect()),
            };
            SolveOutput {
                config: cfg.clone(),
                backend: cfg.backend,
                tgrid: tg,
                weight,
                reference: None,
                residual: None,
                max_residual: None,
            }
        }
        Backend::Ode => {
            let fam = cfg.family()?;
            let generator = {
                let fam = fam.clone();
                move |t: f64| fam.generator_at(t).expect("family carries a generator")
            };
            let sampled = family::propagate_ode(&generator, &tg, SOLVER_SUBSTEP)?;
            let residual: Vec<f64> = tg.iter().zip(&sampled.maps).map(|(&t, m)| m.distance(&fam.map_at(t))).collect();
            SolveOutput {
                config: cfg.clone(),
                backend: cfg.backend,
                tgrid: tg,
                weight: None,
                reference: None,
                max_residual: Some(max_of(&residual)),
                residual: Some(residual),
            }
        }
        Backend::Volterra => {
            let (k, reference): (ScalarFn, Option<Vec<f64>>) = match cfg.kernel {
                KernelKind::Const => {
                    let g = cfg.gamma;
                    (Arc::new(move |_| g * g), Some(tg.iter().map(|&t| 1.0 - (g * t).cos()).collect()))
                }
                KernelKind::Custom => {
                    let path = cfg
                        .kernel_file
                        .as_ref()
                        .ok_or_else(|| CliError::InvalidArgs("--kernel custom needs --kernel-file".into()))?;
                    (load_kernel(path)?, None)
                }
            };
            // Solve on a refined uniform grid and sample it at the output grid.
            let refine = (h / SOLVER_SUBSTEP).ceil().max(1.0) as usize;
            let fine: Vec<f64> =
                (0..=cfg.steps * refine).map(|i| cfg.tmax * i as f64 / (cfg.steps * refine) as f64).collect();
            let x = family::solve_memory_weights(&*k, &fine)?;
            let weight: Vec<f64> = (0..=cfg.steps).map(|i| x[i * refine]).collect();
            let residual =
                reference.as_ref().map(|r| weight.iter().zip(r).map(|(a, b)| (a - b).abs()).collect::<Vec<f64>>());
            SolveOutput {
                config: cfg.clone(),
                backend: cfg.backend,
                tgrid: tg,
                weight: Some(weight),
                reference,
                max_residual: residual.as_deref().map(max_of),
                residual,
            }
        }
    };
    let text = match cfg.output_format {
        OutputFormat::Json => to_json(&out)?,
        OutputFormat::Csv => {
            let mut columns = vec!["t"];
            let mut cols: Vec<&Vec<f64>> = Vec::new();
            for (name, col) in [("weight", &out.weight), ("reference", &out.reference), ("residual", &out.residual)] {
                if let Some(c) = col {
                    columns.push(name);
                    cols.push(c);
                }
            }
            csv_table(
                &columns,
                (0..out.tgrid.len()).map(|i| std::iter::once(out.tgrid[i]).chain(cols.iter().map(|c| c[i])).collect()),
            )
        }
    };
    Ok(RunOutput { text, nonmarkovian: false })
}
