//! Command-line front end: reproduces the cloning-attack curves as CSV
//! files and exposes the photonic-circuit verification.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 verification
//! failure. All commands are deterministic for fixed flags and seed.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pcclone::cloner::{self, Basis, DisturbanceBranch};
use pcclone::eavesdrop::{self, ChannelParams};
use pcclone::fock::{self, BsConvention, CircuitTopology};
use pcclone::optimizer::OptimizerConfig;
use pcclone::sweep;

use config::FileConfig;

const DEFAULT_GRID: usize = 201;
const DEFAULT_SEED: u64 = 42;
const DEFAULT_TOPOLOGY_PATH: &str = "fock_topology.txt";
const VERIFY_TOL: f64 = 1e-9;

/// Errors carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Verification(m) => m,
        }
    }
}

impl From<pcclone::Error> for CliError {
    fn from(e: pcclone::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "pcclone",
    version,
    about = "BB84 eavesdropping analysis with a 1-to-3 phase-covariant cloner"
)]
struct Cli {
    /// Plain-text key=value file overriding built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clone fidelities and success probability over the branching ratio.
    Fidelity(GridArgs),
    /// Optimal-measurement phase over the disturbance range.
    Theta(GridArgs),
    /// Disturbance-information curves for Eve's measurement schemes.
    Info(InfoArgs),
    /// Bob's quantum bit error rate including detector dark counts.
    Qber(QberArgs),
    /// Calibrate the photonic circuit against the analytic cloner state.
    FockVerify(FockArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Number of grid points.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Output CSV path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Low,
    High,
    Both,
}

impl BranchArg {
    fn branches(self) -> Vec<DisturbanceBranch> {
        match self {
            BranchArg::Low => vec![DisturbanceBranch::Low],
            BranchArg::High => vec![DisturbanceBranch::High],
            BranchArg::Both => vec![DisturbanceBranch::Low, DisturbanceBranch::High],
        }
    }
}

impl std::str::FromStr for BranchArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(Self::Low),
            "high" => Ok(Self::High),
            "both" => Ok(Self::Both),
            other => Err(format!("invalid branch {other:?} (low|high|both)")),
        }
    }
}

#[derive(Args)]
struct InfoArgs {
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Which side of the disturbance maximum to sweep.
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
    /// Also run the numerical accessible-information optimizer per row.
    #[arg(long)]
    numeric: bool,
    /// Seed for the optimizer restarts.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QberArgs {
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
    /// Dark-count probability per detection window.
    #[arg(long, value_name = "X")]
    pd: Option<f64>,
    /// Probability that Bob detects no photon.
    #[arg(long, value_name = "X")]
    pb0: Option<f64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FockArgs {
    /// Force one beam-splitter convention (negative control).
    #[arg(long, value_name = "NAME")]
    convention: Option<String>,
    /// Where the calibrated topology is persisted.
    #[arg(long, value_name = "PATH")]
    topology: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                ExitCode::SUCCESS
            } else {
                eprint!("{e}");
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Fidelity(args) => cmd_fidelity(&args, &file_cfg),
        Command::Theta(args) => cmd_theta(&args, &file_cfg),
        Command::Info(args) => cmd_info(&args, &file_cfg),
        Command::Qber(args) => cmd_qber(&args, &file_cfg),
        Command::FockVerify(args) => cmd_fock_verify(&args, &file_cfg),
    }
}

/// 17 significant digits, enough for exact f64 round-trips.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn resolve_grid(flag: Option<usize>, cfg: &FileConfig) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => cfg.parsed::<usize>("grid")?.unwrap_or(DEFAULT_GRID),
    };
    if n < 2 {
        return Err(CliError::Usage(format!(
            "grid must have >= 2 points, got {n}"
        )));
    }
    Ok(n)
}

fn resolve_branch(flag: Option<BranchArg>, cfg: &FileConfig) -> Result<BranchArg, CliError> {
    Ok(match flag {
        Some(b) => b,
        None => cfg.parsed::<BranchArg>("branch")?.unwrap_or(BranchArg::Low),
    })
}

fn resolve_out(flag: &Option<PathBuf>, cfg: &FileConfig) -> Result<PathBuf, CliError> {
    flag.clone()
        .or_else(|| cfg.path("out"))
        .ok_or_else(|| CliError::Usage("missing --out PATH".into()))
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn cmd_fidelity(args: &GridArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let n = resolve_grid(args.grid, cfg)?;
    let out_path = resolve_out(&args.out, cfg)?;
    let grid = sweep::linspace(0.0, 1.0, n);
    let rows = sweep::map_grid(&grid, |&r| -> pcclone::Result<[f64; 4]> {
        Ok([
            r,
            cloner::bob_fidelity(r)?,
            cloner::eve_fidelity(r)?,
            cloner::success_probability(r)?,
        ])
    });
    let mut out = String::from("r,f_bob,f_eve,p_suc\n");
    for row in rows {
        let [r, fb, fe, ps] = row?;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f(r),
            fmt_f(fb),
            fmt_f(fe),
            fmt_f(ps)
        );
    }
    write_file(&out_path, &out)
}

fn cmd_theta(args: &GridArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let n = resolve_grid(args.grid, cfg)?;
    let out_path = resolve_out(&args.out, cfg)?;
    let grid = sweep::linspace(0.0, cloner::MAX_DISTURBANCE, n);
    let rows = sweep::map_grid(&grid, |&d| eavesdrop::optimal_phase(d));
    let mut out = String::from("d,theta\n");
    for (d, theta) in grid.iter().zip(rows) {
        let _ = writeln!(out, "{},{}", fmt_f(*d), fmt_f(theta?));
    }
    write_file(&out_path, &out)
}

struct InfoRow {
    r: f64,
    d: f64,
    conventional: f64,
    optimal_closed: f64,
    numeric: Option<(f64, bool)>,
}

fn info_rows(r_grid: &[f64], numeric: Option<&OptimizerConfig>) -> Result<Vec<InfoRow>, CliError> {
    let mut rows = sweep::map_grid(r_grid, |&r| -> pcclone::Result<InfoRow> {
        let d = cloner::disturbance(r)?;
        let ens = eavesdrop::eve_ensemble(r, Basis::X)?;
        let conventional = eavesdrop::mutual_information(&ens, &eavesdrop::conventional_povm())?;
        let optimal_closed =
            eavesdrop::mutual_information(&ens, &eavesdrop::optimal_povm(d, Basis::X)?)?;
        let numeric = match numeric {
            Some(cfg) => {
                let report = pcclone::optimizer::optimize_accessible_info(&ens, cfg)?;
                Some((report.best_info, report.converged))
            }
            None => None,
        };
        Ok(InfoRow {
            r,
            d,
            conventional,
            optimal_closed,
            numeric,
        })
    })
    .into_iter()
    .collect::<pcclone::Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (a.d, a.r).partial_cmp(&(b.d, b.r)).unwrap());
    Ok(rows)
}

fn cmd_info(args: &InfoArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let n = resolve_grid(args.grid, cfg)?;
    let branch = resolve_branch(args.branch, cfg)?;
    let numeric = args.numeric || cfg.flag("numeric")?;
    let seed = match args.seed {
        Some(s) => s,
        None => cfg.parsed::<u64>("seed")?.unwrap_or(DEFAULT_SEED),
    };
    let out_path = resolve_out(&args.out, cfg)?;

    let opt_cfg = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    let mut out = String::from(if numeric {
        "r,d,i_conventional,i_optimal_closed,i_optimal_numeric,status\n"
    } else {
        "r,d,i_conventional,i_optimal_closed\n"
    });
    for b in branch.branches() {
        let grid = cloner::branch_r_grid(b, n);
        for row in info_rows(&grid, numeric.then_some(&opt_cfg))? {
            match row.numeric {
                Some((value, converged)) => {
                    let status = if converged { "ok" } else { "not_converged" };
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        fmt_f(row.r),
                        fmt_f(row.d),
                        fmt_f(row.conventional),
                        fmt_f(row.optimal_closed),
                        fmt_f(value),
                        status
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        fmt_f(row.r),
                        fmt_f(row.d),
                        fmt_f(row.conventional),
                        fmt_f(row.optimal_closed)
                    );
                }
            }
        }
    }
    write_file(&out_path, &out)
}

fn cmd_qber(args: &QberArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let n = resolve_grid(args.grid, cfg)?;
    let branch = resolve_branch(args.branch, cfg)?;
    let pd = match args.pd {
        Some(x) => x,
        None => cfg
            .parsed::<f64>("pd")?
            .ok_or_else(|| CliError::Usage("missing --pd X (dark-count probability)".into()))?,
    };
    let pb0 = match args.pb0 {
        Some(x) => x,
        None => cfg
            .parsed::<f64>("pb0")?
            .ok_or_else(|| CliError::Usage("missing --pb0 X (no-detection probability)".into()))?,
    };
    let out_path = resolve_out(&args.out, cfg)?;
    let channel = ChannelParams::new(pd, pb0)?;

    let mut out = String::from("r,d,qber\n");
    for b in branch.branches() {
        let grid = cloner::branch_r_grid(b, n);
        let rows = sweep::map_grid(&grid, |&r| -> pcclone::Result<[f64; 3]> {
            let d = cloner::disturbance(r)?;
            Ok([r, d, eavesdrop::qber(d, &channel)?])
        });
        for row in rows {
            let [r, d, q] = row?;
            let _ = writeln!(out, "{},{},{}", fmt_f(r), fmt_f(d), fmt_f(q));
        }
    }
    write_file(&out_path, &out)
}

fn cmd_fock_verify(args: &FockArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let convention_name = match args.convention.clone() {
        Some(name) => Some(name),
        None => cfg.parsed::<String>("convention")?,
    };
    let convention = match convention_name {
        Some(name) => Some(BsConvention::parse(&name)?),
        None => None,
    };
    let topology_path = args
        .topology
        .clone()
        .or_else(|| cfg.path("topology"))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_TOPOLOGY_PATH));

    // A persisted topology skips the search, unless a convention is forced.
    let loaded = if convention.is_none() {
        CircuitTopology::load(&topology_path).ok()
    } else {
        None
    };

    let (report, source) = match loaded {
        Some(topology) => {
            let fit = fock::evaluate_topology(&topology)?;
            if fit.yield_residual <= VERIFY_TOL && fit.probability_residual <= VERIFY_TOL {
                let report = reuse_report(topology, fit)?;
                (report, format!("loaded from {}", topology_path.display()))
            } else {
                // Stale or edited file: fall back to a fresh search.
                let report = fock::calibrate_topology()?;
                (report, "recalibrated (persisted topology failed)".into())
            }
        }
        None => {
            let report = fock::calibrate_topology_filtered(convention)?;
            let searched = if convention.is_some() { 48 } else { 96 };
            (report, format!("searched {searched} candidate topologies"))
        }
    };

    let mut out = String::new();
    let _ = writeln!(out, "calibration: {source}");
    let _ = writeln!(out, "topology: {}", report.topology.describe());
    let _ = writeln!(
        out,
        "residual (raw amplitudes):        {}",
        fmt_f(report.fit.residual)
    );
    let _ = writeln!(
        out,
        "residual (yield-adjusted):        {}",
        fmt_f(report.fit.yield_residual)
    );
    let _ = writeln!(
        out,
        "residual (probability, adjusted): {}",
        fmt_f(report.fit.probability_residual)
    );
    let _ = writeln!(
        out,
        "note: strict one-photon-per-mode post-selection keeps only the singlet"
    );
    let _ = writeln!(
        out,
        "channel of the final conditional Bell measurement, so raw probabilities"
    );
    let _ = writeln!(
        out,
        "are exactly {} times the analytic success probability.",
        fock::SINGLET_CHANNEL_YIELD
    );
    let _ = writeln!(
        out,
        "r,phi,p_circuit,p_circuit_adjusted,p_analytic,state_distance"
    );
    for p in &report.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f(p.r),
            fmt_f(p.phi),
            fmt_f(p.probability),
            fmt_f(p.probability / fock::SINGLET_CHANNEL_YIELD),
            fmt_f(p.expected_probability),
            fmt_f(p.yield_distance)
        );
    }

    let equivalent = report.equivalent_within(VERIFY_TOL);
    let _ = writeln!(
        out,
        "verdict: {}",
        if equivalent {
            "EQUIVALENT (yield-adjusted residual <= 1e-9)"
        } else {
            "NOT EQUIVALENT (yield-adjusted residual > 1e-9)"
        }
    );
    print!("{out}");

    if equivalent {
        if convention.is_none() {
            report
                .topology
                .save(&topology_path)
                .map_err(|e| CliError::Io(format!("cannot persist topology: {e}")))?;
        }
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "circuit does not reproduce the analytic state (yield-adjusted residual {})",
            fmt_f(report.fit.yield_residual)
        )))
    }
}

/// Builds a full report for an already-known topology.
fn reuse_report(
    topology: CircuitTopology,
    fit: fock::TopologyFit,
) -> Result<fock::CalibrationReport, CliError> {
    let scale = (1.0 / fock::SINGLET_CHANNEL_YIELD).sqrt();
    let points = fock::calibration_grid()
        .iter()
        .map(|&(r, phi)| -> pcclone::Result<fock::CalibrationPoint> {
            let (psi, probability) = fock::run_cloner_circuit(r, phi, &topology)?;
            let target = cloner::cloner_state(&cloner::CloneParams::new(r, phi)?);
            let scaled = pcclone::quantum::PureState::new(
                3,
                psi.amplitudes()
                    .iter()
                    .map(|a| a * pcclone::C64::new(scale, 0.0))
                    .collect(),
            )?;
            Ok(fock::CalibrationPoint {
                r,
                phi,
                probability,
                expected_probability: cloner::success_probability(r)?,
                yield_distance: scaled.phase_aligned_distance(&target),
            })
        })
        .collect::<pcclone::Result<Vec<_>>>()?;
    Ok(fock::CalibrationReport {
        topology,
        fit,
        candidate_index: 0,
        points,
    })
}
