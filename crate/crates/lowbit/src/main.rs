use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use lowbit::exit;
use lowbit::harness::{
    replay, run_duel, run_scaling, tolerance_from_env, AdversaryKind, ConfigError, DuelConfig, ModeSpec,
    ScalingConfig,
};
use lowbit::io;

/// `println!` that tolerates a closed stdout (e.g. piping into `head`).
macro_rules! emit {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "lowbit", version, about = "Resisting oracles and cutting-plane duels for low-bandwidth separation oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver against a resisting oracle up to the certified floor and verify the witnesses.
    Duel(DuelArgs),
    /// Sweep d: certified floors next to honest-oracle solver counts, as CSV.
    Scaling(ScalingArgs),
    /// Re-check a transcript against its snapshot.
    Verify(VerifyArgs),
    /// Small end-to-end tour.
    Demo(DemoArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Number of binary variables (0 = continuous).
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long = "R", default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 1e-4)]
    rho: f64,
    /// bit or dir
    #[arg(long, default_value = "bit")]
    adversary: String,
    /// coord, bits or inner. Defaults to coord for bit and inner for dir.
    #[arg(long)]
    mode: Option<String>,
    /// Bits per coordinate in bits mode (default ⌈log₂(4Rd/ρ)⌉).
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Common {
    fn kind(&self) -> Result<AdversaryKind, ConfigError> {
        self.adversary.parse()
    }

    fn mode(&self, kind: AdversaryKind) -> Result<ModeSpec, ConfigError> {
        let default = match kind {
            AdversaryKind::Bit => "coord",
            AdversaryKind::Dir => "inner",
        };
        ModeSpec::parse(self.mode.as_deref().unwrap_or(default), self.bits)
    }
}

#[derive(Args)]
struct DuelArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 8)]
    d: usize,
    /// Stop earlier than floor − 1.
    #[arg(long)]
    max_queries: Option<u64>,
    /// Directory for transcript.jsonl, snapshot.json, report.json and duel.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    common: Common,
    /// Dimensions to sweep (at least four).
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    d: Vec<usize>,
    /// Planted instances per dimension.
    #[arg(long, default_value_t = 10)]
    instances: usize,
    /// CSV path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    transcript: PathBuf,
    /// Defaults to snapshot.json next to the transcript.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Where to write the verification report; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(ConfigError),
    Other(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn duel_config(common: &Common, d: usize, max_queries: Option<u64>) -> Result<DuelConfig, ConfigError> {
    let adversary = common.kind()?;
    let cfg = DuelConfig {
        n: common.n,
        d,
        r: common.r,
        rho: common.rho,
        adversary,
        mode: common.mode(adversary)?,
        seed: common.seed,
        max_queries,
        tol: tolerance_from_env()?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn duel(args: &DuelArgs) -> Result<i32, Failure> {
    let cfg = duel_config(&args.common, args.d, args.max_queries)?;
    let run = run_duel(&cfg)?;
    let rep = &run.report;
    match &args.out {
        Some(dir) => {
            run.write_to(dir)?;
            emit!(
                "floor {} queries {} cuts {} verified {} disjoint {} -> {}",
                rep.certified_floor,
                rep.queries,
                rep.cuts,
                rep.witnesses_verified,
                rep.disjoint,
                dir.display()
            );
        }
        None => emit!("{}", serde_json::to_string_pretty(rep).map_err(anyhow::Error::from)?),
    }
    for v in &rep.violations {
        eprintln!("violation at record {}: {:?}: {}", v.record_index, v.kind, v.detail);
    }
    if let Some(e) = &rep.error {
        eprintln!("error: {e}");
    }
    Ok(if rep.ok() { exit::OK } else { exit::VIOLATION })
}

fn scaling(args: &ScalingArgs) -> Result<i32, Failure> {
    let adversary = args.common.kind()?;
    let cfg = ScalingConfig {
        ds: args.d.clone(),
        n: args.common.n,
        r: args.common.r,
        rho: args.common.rho,
        adversary,
        mode: args.common.mode(adversary)?,
        instances: args.instances,
        seed: args.common.seed,
    };
    let rep = run_scaling(&cfg)?;
    match &args.out {
        Some(p) => io::write_csv(std::fs::File::create(p)?, &rep.rows)?,
        None => io::write_csv(std::io::stdout().lock(), &rep.rows)?,
    }
    let fmt = |s: Option<f64>| s.map_or("n/a".to_string(), |s| format!("{s:.3}"));
    eprintln!(
        "log-log slopes: floor {} cuts {} queries {}",
        fmt(rep.floor_slope),
        fmt(rep.cuts_slope),
        fmt(rep.queries_slope)
    );
    let sound = rep.rows.iter().all(|r| r.verified == Some(true));
    Ok(if sound { exit::OK } else { exit::VIOLATION })
}

fn verify(args: &VerifyArgs) -> Result<i32, Failure> {
    let snapshot = match &args.snapshot {
        Some(p) => p.clone(),
        None => args.transcript.parent().unwrap_or(Path::new(".")).join("snapshot.json"),
    };
    let rep = replay(&args.transcript, &snapshot)?;
    match &args.out {
        Some(p) => io::write_json(p, &rep)?,
        None => emit!("{}", serde_json::to_string_pretty(&rep).map_err(anyhow::Error::from)?),
    }
    for v in &rep.violations {
        eprintln!("violation at record {}: {:?}: {}", v.record_index, v.kind, v.detail);
    }
    if !rep.header_matches {
        eprintln!("transcript header does not match the snapshot");
    }
    if let Some(e) = &rep.error {
        eprintln!("error: {e}");
    }
    Ok(if rep.ok { exit::OK } else { exit::VIOLATION })
}

fn demo(args: &DemoArgs) -> Result<i32, Failure> {
    let tol = tolerance_from_env()?;
    let duels = [
        ("bit", DuelConfig::new(0, 8, AdversaryKind::Bit)),
        ("dir", DuelConfig::new(0, 4, AdversaryKind::Dir)),
        ("mixed-bit", DuelConfig::new(1, 8, AdversaryKind::Bit)),
    ];
    let mut code = exit::OK;
    let mut rows = Vec::new();
    emit!("{:<10} {:>3} {:>3} {:>6} {:>8} {:>6} {:>9} {:>9}", "duel", "n", "d", "floor", "queries", "cuts", "verified", "disjoint");
    for (name, mut cfg) in duels {
        cfg.tol = tol;
        let run = run_duel(&cfg)?;
        let r = &run.report;
        emit!(
            "{:<10} {:>3} {:>3} {:>6} {:>8} {:>6} {:>9} {:>9}",
            name, cfg.n, cfg.d, r.certified_floor, r.queries, r.cuts, r.witnesses_verified, r.disjoint
        );
        if !r.ok() {
            code = exit::VIOLATION;
        }
        if let Some(dir) = &args.out {
            run.write_to(&dir.join(name))?;
        }
        rows.push(r.csv_row());
    }
    let sweep = run_scaling(&ScalingConfig {
        ds: vec![2, 4, 8, 16],
        n: 0,
        r: 1.0,
        rho: 1e-3,
        adversary: AdversaryKind::Bit,
        mode: ModeSpec::Coord,
        instances: 5,
        seed: 0,
    })?;
    emit!();
    emit!("honest ellipsoid, coord mode, R = 1, rho = 1e-3");
    emit!("{:>3} {:>6} {:>10} {:>10}", "d", "floor", "cuts", "queries");
    for r in &sweep.rows {
        emit!("{:>3} {:>6} {:>10.1} {:>10.1}", r.d, r.floor, r.cuts, r.queries);
    }
    if let Some(s) = sweep.cuts_slope {
        emit!("cuts log-log slope {s:.2}");
    }
    rows.extend(sweep.rows);
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        io::write_csv(std::fs::File::create(dir.join("demo.csv"))?, &rows)?;
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INVALID_CONFIG } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Duel(a) => duel(a),
        Command::Scaling(a) => scaling(a),
        Command::Verify(a) => verify(a),
        Command::Demo(a) => demo(a),
    };
    let code = match result {
        Ok(c) => c,
        Err(Failure::Config(e)) => {
            eprintln!("{e}");
            exit::INVALID_CONFIG
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            exit::FAILURE
        }
    };
    ExitCode::from(code as u8)
}
