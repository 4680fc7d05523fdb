//! The `gkcs` command-line front end.
//!
//! One scenario per TOML file. Keys (all optional unless a command needs
//! them):
//!
//! | key | meaning |
//! |-----|---------|
//! | `spectrum` | `harmonic`, `squared` or `poschl_teller` (default `harmonic`) |
//! | `kappa` | Pöschl-Teller parameter (default 1) |
//! | `spectrum_table` | file with one `e_n` per line, relative to the config file; overrides `spectrum` |
//! | `z_re`, `z_im` | coherent-state label `z` |
//! | `state` | `nonlinear_cs` or `gkcs` (for `state`) |
//! | `alpha` | GKCS label `α` |
//! | `g1`, `g2`, `delta` | Raman couplings and detuning |
//! | `tau` | interaction time of each injected atom |
//! | `epsilons`, `epsilons_im` | atom preparation parameters `ε_m` |
//! | `detection_floor` | smallest accepted `P_e` |
//! | `include_field` | append the final field to the protocol report |
//! | `deltas`, `times`, `time_unit` | equivalence grid; `time_unit` is `absolute` or `inverse_lambda` |
//! | `atom_g`, `atom_e` | initial atom amplitudes `[re, im]` for the equivalence run |
//! | `n_trunc`, `tail_tol` | truncation override or tail tolerance |
//! | `output` | output path, relative to the config file (`--out` wins) |
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 divergent series, 4 improbable detection.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;

use crate::deformation::DeformationSpec;
use crate::error::Error;
use crate::evolution::{equivalence_experiment, EquivalenceSetup, TimeUnit};
use crate::fockspace::{choose_truncation, DEFAULT_TAIL_TOL};
use crate::hamiltonian::RamanParams;
use crate::protocol::{run_protocol, ProtocolConfig, DEFAULT_DETECTION_FLOOR};
use crate::report;
use crate::states::{gkcs, nonlinear_cs, GkLabel};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_IMPROBABLE_DETECTION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "gkcs",
    version,
    about = "Gazeau-Klauder coherent states from intensity-dependent Raman interaction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Dump the amplitudes of a nonlinear CS or GKCS as CSV.
    State,
    /// Run the sequential atom-injection scheme.
    Protocol,
    /// Compare interaction-picture and effective evolutions over a grid.
    Equivalence,
    /// Run the built-in verification suites.
    Verify,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    #[default]
    NonlinearCs,
    Gkcs,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnitName {
    #[default]
    Absolute,
    InverseLambda,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub spectrum: Option<String>,
    pub kappa: Option<f64>,
    pub spectrum_table: Option<PathBuf>,
    #[serde(default)]
    pub z_re: f64,
    #[serde(default)]
    pub z_im: f64,
    #[serde(default)]
    pub state: StateKind,
    #[serde(default)]
    pub alpha: f64,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub delta: Option<f64>,
    pub tau: Option<f64>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    pub epsilons_im: Option<Vec<f64>>,
    pub detection_floor: Option<f64>,
    #[serde(default)]
    pub include_field: bool,
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub time_unit: TimeUnitName,
    pub atom_g: Option<[f64; 2]>,
    pub atom_e: Option<[f64; 2]>,
    pub n_trunc: Option<usize>,
    pub tail_tol: Option<f64>,
    pub output: Option<PathBuf>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DivergentSeries { .. } | Error::SpectrumExhausted { .. } => EXIT_DIVERGENCE,
            Error::DetectionImprobable { .. } => EXIT_IMPROBABLE_DETECTION,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let mut cfg: Self =
            toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.z_re, self.z_im)
    }

    pub fn deformation(&self) -> crate::Result<DeformationSpec> {
        match &self.spectrum_table {
            Some(table) => {
                let path = self.resolve(table);
                Ok(DeformationSpec::from_table_file(&path)?.named(path.display().to_string()))
            }
            None => {
                DeformationSpec::by_name(self.spectrum.as_deref().unwrap_or("harmonic"), self.kappa)
            }
        }
    }

    pub fn truncation(&self, spec: &DeformationSpec) -> crate::Result<usize> {
        match self.n_trunc {
            Some(n) => Ok(n),
            None => choose_truncation(self.z(), spec, self.tail_tol.unwrap_or(DEFAULT_TAIL_TOL)),
        }
    }

    fn require(&self, value: Option<f64>, key: &str) -> Result<f64, CliError> {
        value.ok_or_else(|| {
            CliError::config(format!("config key `{key}` is required for this command"))
        })
    }

    pub fn epsilons(&self) -> Result<Vec<Complex64>, CliError> {
        match &self.epsilons_im {
            None => Ok(self
                .epsilons
                .iter()
                .map(|&re| Complex64::new(re, 0.0))
                .collect()),
            Some(im) if im.len() == self.epsilons.len() => Ok(self
                .epsilons
                .iter()
                .zip(im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect()),
            Some(im) => Err(CliError::config(format!(
                "epsilons_im has {} entries, epsilons has {}",
                im.len(),
                self.epsilons.len()
            ))),
        }
    }

    pub fn output_path(&self) -> Option<PathBuf> {
        self.output.as_deref().map(|p| self.resolve(p))
    }
}

fn cmd_state(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let spec = cfg.deformation()?;
    let n = cfg.truncation(&spec)?;
    let state = match cfg.state {
        StateKind::NonlinearCs => nonlinear_cs(cfg.z(), &spec, n)?,
        StateKind::Gkcs => gkcs(GkLabel::new(cfg.z(), cfg.alpha), &spec, n)?,
    };
    Ok(report::state_csv(&state))
}

fn cmd_protocol(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let spec = cfg.deformation()?;
    let n = cfg.truncation(&spec)?;
    let g1 = cfg.g1.unwrap_or(1.0);
    let params = RamanParams::new(g1, cfg.g2.unwrap_or(g1), cfg.require(cfg.delta, "delta")?)?;
    let tau = cfg.require(cfg.tau, "tau")?;
    let config = ProtocolConfig::new(cfg.z(), spec, params, tau, cfg.epsilons()?, n)?
        .with_detection_floor(cfg.detection_floor.unwrap_or(DEFAULT_DETECTION_FLOOR))?;
    let result = run_protocol(&config)?;
    Ok(report::protocol_report(&result, cfg.include_field))
}

fn amplitude(v: Option<[f64; 2]>, default: f64) -> Complex64 {
    v.map_or(Complex64::new(default, 0.0), |[re, im]| {
        Complex64::new(re, im)
    })
}

fn cmd_equivalence(cfg: &ScenarioConfig) -> Result<String, CliError> {
    if cfg.deltas.is_empty() || cfg.times.is_empty() {
        return Err(CliError::config(
            "equivalence needs non-empty `deltas` and `times`",
        ));
    }
    let spec = cfg.deformation()?;
    let n = cfg.truncation(&spec)?;
    let field = nonlinear_cs(cfg.z(), &spec, n)?;
    let g1 = cfg.g1.unwrap_or(1.0);
    let setup = EquivalenceSetup {
        g1,
        g2: cfg.g2.unwrap_or(g1),
        deltas: cfg.deltas.clone(),
        times: cfg.times.clone(),
        time_unit: match cfg.time_unit {
            TimeUnitName::Absolute => TimeUnit::Absolute,
            TimeUnitName::InverseLambda => TimeUnit::InverseLambda,
        },
        atom: (amplitude(cfg.atom_g, 1.0), amplitude(cfg.atom_e, 0.0)),
    };
    let rows = equivalence_experiment(&setup, &spec, &field)?;
    Ok(report::equivalence_csv(&rows))
}

fn cmd_verify(cfg: Option<&ScenarioConfig>, verbose: bool) -> (String, bool) {
    let extra = cfg
        .filter(|c| c.spectrum.is_some() || c.spectrum_table.is_some())
        .map(ScenarioConfig::deformation);
    let reports = verify::run_all(extra);
    (
        verify::render(&reports, verbose),
        verify::all_passed(&reports),
    )
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(&path, text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match try_execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn try_execute(cli: &Cli) -> Result<i32, CliError> {
    let cfg = cli
        .config
        .as_deref()
        .map(ScenarioConfig::load)
        .transpose()?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().and_then(ScenarioConfig::output_path));
    if let Command::Verify = cli.command {
        let (table, ok) = cmd_verify(cfg.as_ref(), cli.verbose);
        emit(&table, out)?;
        return Ok(if ok { EXIT_OK } else { EXIT_VERIFY_FAILED });
    }
    let cfg = cfg.ok_or_else(|| CliError::config("--config is required for this command"))?;
    let text = match cli.command {
        Command::State => cmd_state(&cfg)?,
        Command::Protocol => cmd_protocol(&cfg)?,
        Command::Equivalence => cmd_equivalence(&cfg)?,
        Command::Verify => unreachable!(),
    };
    emit(&text, out)?;
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
