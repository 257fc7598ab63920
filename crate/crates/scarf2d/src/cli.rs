//! Command-line front end: scenario configuration, spectra, state grids and
//! the verification suites, with JSON/CSV artifacts written atomically.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad configuration,
//! 3 domain/branch error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators2d::Branch;
use crate::scarf1d::ModelParams;
use crate::solvers::{
    chain_state, exact_branch_spectrum, exact_branch_state, principal_state, quasi_exact_spectrum,
    separable_state, zero_mode, Parity, SpectrumEntry,
};
use crate::verify::{
    degeneracy_scan, identity_residual, norm_quadrature, rt_eigen_check, symmetry_eigenvalue_check,
    DegeneracyRecord, Identity, NormConfig, ResidualReport,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "scarf2d", about = "Two-dimensional Scarf II model: spectra, states and verification")]
pub struct CliArgs {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Enumerate discrete energies of a branch and write them as JSON.
    Spectrum(SpectrumArgs),
    /// Evaluate a constructed state on a grid and write x1,x2,psi rows.
    State(StateArgs),
    /// Run residual/verification suites and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchArg {
    Exact,
    Quasi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    ZeroMode,
    Separable,
    Exact,
    Principal,
    Chain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteArg {
    Identities,
    Symmetry,
    Degeneracy,
    Norm,
    All,
}

/// Flags shared by every subcommand; a JSON config file may predefine any of
/// them, with explicit flags taking precedence.
#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
pub struct CommonArgs {
    /// JSON file with the same keys as the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub branch: Option<BranchArg>,
    /// Negative-integer branch index (a = -k).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub big_m: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub mmax: Option<usize>,
    #[arg(long = "Mmax")]
    #[serde(rename = "Mmax")]
    pub big_m_max: Option<usize>,
    /// Zero-mode basis cap for the closure-matrix fit.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub basis: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Half-width of the evaluation/integration box.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub strip: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<FormatArg>,
}

impl CommonArgs {
    /// Flags win over config-file values.
    fn merged(&self) -> Result<CommonArgs> {
        let mut base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str::<CommonArgs>(&text)
                    .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
            }
            None => CommonArgs::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if self.$f.is_some() { base.$f = self.$f.clone(); } )* };
        }
        take!(a, b, c, branch, k, n, m, big_m, nmax, mmax, big_m_max, basis, samples, seed,
              half_width, nodes, strip, out, format);
        Ok(base)
    }

    fn require_b(&self) -> Result<f64> {
        self.b.ok_or_else(|| Error::InvalidConfig("--b is required".into()))
    }

    fn c_or_default(&self) -> f64 {
        self.c.unwrap_or(1.0)
    }

    fn params_quasi(&self) -> Result<ModelParams> {
        let a = self.a.ok_or_else(|| Error::InvalidConfig("--a is required for the quasi branch".into()))?;
        let p = ModelParams::new(a, self.require_b()?, self.c_or_default())?;
        if p.a() <= -0.5 {
            return Err(Error::RegionError { a: p.a() });
        }
        Ok(p)
    }

    fn params_exact(&self) -> Result<(usize, ModelParams)> {
        let k = self.k.ok_or_else(|| Error::InvalidConfig("--k is required for the exact branch".into()))?;
        if k == 0 {
            return Err(Error::InvalidConfig("--k must be at least 1".into()));
        }
        let p = ModelParams::new(-(k as f64), self.require_b()?, self.c_or_default())?;
        Ok((k, p))
    }

    fn norm_config(&self) -> NormConfig {
        let d = NormConfig::default();
        NormConfig {
            half_width: self.half_width.unwrap_or(d.half_width),
            nodes: self.nodes.unwrap_or(d.nodes),
            strip: self.strip.unwrap_or(d.strip),
        }
    }

    fn default_basis(&self, b: f64) -> usize {
        self.basis.unwrap_or_else(|| (b.floor() as usize).min(6).saturating_sub(1))
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Annotate each entry with a normalizability flag (quadrature; slow).
    #[arg(long)]
    pub norm: bool,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "zero-mode")]
    pub kind: StateKind,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "minus")]
    pub parity: ParityArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Plus,
    Minus,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
}

// ---------------------------------------------------------------------------
// report envelopes
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub schema_version: u32,
    pub command: String,
    pub branch: Branch,
    pub params: ModelParams,
    pub entries: Vec<SpectrumEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: String,
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub reports: Vec<ResidualReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub degeneracy: Vec<DegeneracyRecord>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub norms: BTreeMap<String, crate::verify::NormResult>,
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        None => {
            println!("{content}");
            Ok(())
        }
        Some(path) => atomic_write(path, content),
    }
}

/// Write via a temp file in the destination directory, then rename.
fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let cfg = args.common.merged()?;
    let branch = cfg.branch.ok_or_else(|| Error::InvalidConfig("--branch is required".into()))?;
    let n_max = cfg.nmax.unwrap_or(2);
    let m_max = cfg.mmax.unwrap_or(2);
    let big_m_max = cfg.big_m_max.unwrap_or(0);

    let (params, mut entries) = match branch {
        BranchArg::Exact => {
            let (k, p) = cfg.params_exact()?;
            if (n_max as f64) >= p.b() {
                return Err(Error::InvalidConfig(format!("--nmax {n_max} must stay below b = {}", p.b())));
            }
            (p, exact_branch_spectrum(k, p.b(), p.c(), n_max))
        }
        BranchArg::Quasi => {
            let p = cfg.params_quasi()?;
            if (n_max as f64) >= p.b() - big_m_max as f64 {
                return Err(Error::InvalidConfig(format!(
                    "--nmax {n_max} must stay below b - Mmax = {}",
                    p.b() - big_m_max as f64
                )));
            }
            (p, quasi_exact_spectrum(&p, n_max, m_max, big_m_max)?)
        }
    };

    if args.norm {
        let ncfg = cfg.norm_config();
        let basis = cfg.default_basis(params.b());
        for e in &mut entries {
            let psi = match branch {
                BranchArg::Exact => exact_branch_state(cfg.k.unwrap_or(1), e.n, e.m, &params)?,
                BranchArg::Quasi => chain_state(e.n, e.m, e.big_m.unwrap_or(0), &params, basis.max(e.n))?,
            };
            let r = norm_quadrature(&psi, &ncfg)?;
            e.normalizable = Some(r.converged && r.value.is_finite());
        }
    }

    let report = SpectrumReport {
        schema_version: SCHEMA_VERSION,
        command: "spectrum".into(),
        branch: match branch {
            BranchArg::Exact => Branch::Exact,
            BranchArg::Quasi => Branch::Quasi,
        },
        params,
        entries,
    };
    let content = match cfg.format.unwrap_or(FormatArg::Json) {
        FormatArg::Json => serde_json::to_string_pretty(&report)?,
        FormatArg::Csv => {
            let mut s = String::from("n,m,M,energy,degenerate\n");
            for e in &report.entries {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    e.n,
                    e.m,
                    e.big_m.map_or(String::new(), |v| v.to_string()),
                    e.energy,
                    e.degenerate
                ));
            }
            s
        }
    };
    write_output(&cfg.out, &content)
}

pub fn cmd_state_eval(args: &StateArgs) -> Result<()> {
    let cfg = args.common.merged()?;
    let strip = cfg.strip.unwrap_or(0.1);
    let half = cfg.half_width.unwrap_or(5.0);
    let grid = args.grid.max(2);

    let psi = match args.kind {
        StateKind::ZeroMode => {
            let p = cfg.params_quasi()?;
            zero_mode(cfg.n.unwrap_or(0), &p)?
        }
        StateKind::Separable => {
            let b = cfg.require_b()?;
            let parity = match args.parity {
                ParityArg::Plus => Parity::Plus,
                ParityArg::Minus => Parity::Minus,
            };
            separable_state(cfg.n.unwrap_or(0), cfg.m.unwrap_or(1), parity, b, cfg.c_or_default())?
        }
        StateKind::Exact => {
            let (k, p) = cfg.params_exact()?;
            exact_branch_state(k, cfg.n.unwrap_or(0), cfg.m.unwrap_or(k + 1), &p)?
        }
        StateKind::Principal => {
            let p = cfg.params_quasi()?;
            let n = cfg.n.unwrap_or(0);
            principal_state(n, &p, cfg.default_basis(p.b()).max(n))?
        }
        StateKind::Chain => {
            let p = cfg.params_quasi()?;
            let n = cfg.n.unwrap_or(0);
            chain_state(n, cfg.m.unwrap_or(0), cfg.big_m.unwrap_or(0), &p, cfg.default_basis(p.b()).max(n))?
        }
    };

    let mut content = String::new();
    content.push_str(&format!(
        "# schema_version={} state={} energy={} symmetry={:?}\n",
        SCHEMA_VERSION,
        psi.meta.label,
        psi.meta.energy.map_or("none".into(), |e| e.to_string()),
        psi.meta.symmetry
    ));
    content.push_str("x1,x2,psi\n");
    for i in 0..grid {
        let x1 = -half + 2.0 * half * i as f64 / (grid - 1) as f64;
        for j in 0..grid {
            let x2 = -half + 2.0 * half * j as f64 / (grid - 1) as f64;
            if (x1 - x2).abs() < strip {
                continue;
            }
            let v = psi.value((x1, x2))?;
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("non-finite value at ({x1}, {x2})")));
            }
            content.push_str(&format!("{x1},{x2},{v}\n"));
        }
    }
    write_output(&cfg.out, &content)
}

/// Returns false when a gating check failed (exit code 1).
pub fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let cfg = args.common.merged()?;
    let seed = cfg.seed.unwrap_or(42);
    let samples = cfg.samples.unwrap_or(50);
    let mut reports: Vec<ResidualReport> = Vec::new();
    let mut degeneracy = Vec::new();
    let mut norms = BTreeMap::new();

    let want = |s: SuiteArg| args.suite == s || args.suite == SuiteArg::All;

    if want(SuiteArg::Identities) {
        let p = match (cfg.a, cfg.b) {
            (Some(a), Some(b)) => ModelParams::new(a, b, cfg.c_or_default())?,
            _ => ModelParams::new(1.0, 4.5, 1.0)?,
        };
        for id in Identity::all() {
            reports.push(identity_residual(id, &p, samples, seed)?);
        }
    }

    if want(SuiteArg::Symmetry) {
        let p = match (cfg.a, cfg.b) {
            (Some(a), Some(b)) => ModelParams::new(a, b, cfg.c_or_default())?,
            _ => ModelParams::new(1.0, 4.5, 1.0)?,
        };
        if p.a() <= -0.5 {
            return Err(Error::RegionError { a: p.a() });
        }
        match (cfg.n, cfg.m) {
            (Some(n), Some(m)) => reports.push(symmetry_eigenvalue_check(n, m, &p)?),
            _ => {
                for n in 0..=2usize.min(p.b() as usize) {
                    for m in 0..=2 {
                        reports.push(symmetry_eigenvalue_check(n, m, &p)?);
                    }
                }
            }
        }
        if let Some(big_m) = cfg.big_m {
            if big_m >= 1 {
                reports.push(rt_eigen_check(cfg.n.unwrap_or(0), cfg.m.unwrap_or(0), big_m, &p)?);
            }
        }
    }

    if want(SuiteArg::Degeneracy) {
        let b = cfg.b.unwrap_or(2.5);
        degeneracy = degeneracy_scan(b, cfg.c_or_default(), cfg.nmax.unwrap_or(2), cfg.mmax.unwrap_or(2));
    }

    if want(SuiteArg::Norm) {
        let p = match (cfg.a, cfg.b) {
            (Some(a), Some(b)) => ModelParams::new(a, b, cfg.c_or_default())?,
            _ => ModelParams::new(0.5, 4.5, 1.0)?,
        };
        let ncfg = cfg.norm_config();
        let psi = zero_mode(cfg.n.unwrap_or(0), &p)?;
        norms.insert(psi.meta.label.clone(), norm_quadrature(&psi, &ncfg)?);
    }

    let pass = reports.iter().all(|r| r.informational || r.pass);
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify".into(),
        suite: format!("{:?}", args.suite).to_lowercase(),
        seed,
        pass,
        reports,
        degeneracy,
        norms,
    };
    let content = serde_json::to_string_pretty(&report)?;
    write_output(&cfg.out, &content)?;
    Ok(pass)
}

/// Thread-pool size from SCARF2D_THREADS (0 or unset = automatic).
pub fn configure_threads() {
    if let Ok(v) = std::env::var("SCARF2D_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Entry point shared by main and the CLI tests.
pub fn run(args: CliArgs) -> i32 {
    let outcome = match &args.command {
        CommandArgs::Spectrum(a) => cmd_spectrum(a).map(|_| true),
        CommandArgs::State(a) => cmd_state_eval(a).map(|_| true),
        CommandArgs::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
