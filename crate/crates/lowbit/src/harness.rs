//! Adversary-vs-solver duels, honest scaling sweeps and transcript replay.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{Context, Result};
use lowbit_core::bit_adversary::{BitAdversary, BRUTE_FORCE_MAX_D};
use lowbit_core::bounds::{bit_depth, bit_floor, bit_level_budget, dir_depth, dir_floor, dir_stage_budget};
use lowbit_core::dir_adversary::DirAdversary;
use lowbit_core::geometry::{InfBall, WitnessSet};
use lowbit_core::mixed::MixedAdversary;
use lowbit_core::oracle::{OracleAnswer, Query, SeparationOracle, Transcript, TranscriptHeader};
use lowbit_core::solvers::{
    default_bits, ellipsoid_solve, mixed_solve, Capped, HonestOracle, ReconMode, SolveParams, SolverOutcome,
    MIXED_MAX_N,
};
use lowbit_core::verifier::{certify_disjoint, check_transcript, survival_report, LevelView, SurvivalReport, Violation};
use lowbit_core::{ContinuousAdversary, Error, DEFAULT_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::io::{self, CsvRow};

/// Environment variable that overrides [`DEFAULT_TOL`].
pub const TOL_ENV: &str = "ORACLE_DUEL_TOL";

/// Solver start jitter, relative to `R`.
const JITTER: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Reads the tolerance from `ORACLE_DUEL_TOL`, falling back to the default.
pub fn tolerance_from_env() -> Result<f64, ConfigError> {
    match std::env::var(TOL_ENV) {
        Err(_) => Ok(DEFAULT_TOL),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(invalid(format!("{TOL_ENV}={s:?} is not a positive number"))),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    Bit,
    Dir,
}

impl AdversaryKind {
    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::Bit => "bit",
            AdversaryKind::Dir => "dir",
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdversaryKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bit" => Ok(AdversaryKind::Bit),
            "dir" => Ok(AdversaryKind::Dir),
            _ => Err(invalid(format!("unknown adversary {s:?}"))),
        }
    }
}

/// Reconstruction mode before the bit budget is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeSpec {
    Coord,
    /// `None` picks `⌈log₂(4Rd/ρ)⌉`.
    Bits { bits: Option<u32> },
    Inner,
}

impl ModeSpec {
    pub fn parse(name: &str, bits: Option<u32>) -> Result<Self, ConfigError> {
        match name {
            "coord" => Ok(ModeSpec::Coord),
            "bits" => Ok(ModeSpec::Bits { bits }),
            "inner" => Ok(ModeSpec::Inner),
            _ => Err(invalid(format!("unknown mode {name:?}"))),
        }
    }

    pub fn resolve(self, r: f64, d: usize, rho: f64) -> ReconMode {
        match self {
            ModeSpec::Coord => ReconMode::Coord,
            ModeSpec::Bits { bits } => ReconMode::Bits { bits: bits.unwrap_or_else(|| default_bits(r, d, rho)) },
            ModeSpec::Inner => ReconMode::Inner,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModeSpec::Coord => "coord",
            ModeSpec::Bits { .. } => "bits",
            ModeSpec::Inner => "inner",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuelConfig {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub rho: f64,
    pub adversary: AdversaryKind,
    pub mode: ModeSpec,
    pub seed: u64,
    /// Extra cap on top of `floor − 1`.
    pub max_queries: Option<u64>,
    pub tol: f64,
}

impl DuelConfig {
    /// Defaults: bit adversary, coordinate queries, `R = 1`, `ρ = 1e-4`.
    pub fn new(n: usize, d: usize, adversary: AdversaryKind) -> Self {
        let mode = match adversary {
            AdversaryKind::Bit => ModeSpec::Coord,
            AdversaryKind::Dir => ModeSpec::Inner,
        };
        Self { n, d, r: 1.0, rho: 1e-4, adversary, mode, seed: 0, max_queries: None, tol: DEFAULT_TOL }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let (r, rho, d) = (self.r, self.rho, self.d);
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid("R must be positive and finite"));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid("rho must be positive and finite"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        if self.n > MIXED_MAX_N {
            return Err(invalid(format!("n = {} exceeds the fiber enumeration limit {MIXED_MAX_N}", self.n)));
        }
        match self.adversary {
            AdversaryKind::Bit => {
                if d < 1 {
                    return Err(invalid("the coordinate adversary needs d >= 1"));
                }
                if rho >= r / 2.0 {
                    return Err(invalid(format!("need rho < R/2 (rho = {rho}, R = {r})")));
                }
                if self.mode == ModeSpec::Inner {
                    return Err(invalid("the coordinate adversary answers coord and bits queries only"));
                }
            }
            AdversaryKind::Dir => {
                if d < 2 {
                    return Err(invalid("the direction adversary needs d >= 2"));
                }
                if rho >= r / (4.0 * d as f64) {
                    return Err(invalid(format!("need rho < R/(4d) (rho = {rho}, R = {r}, d = {d})")));
                }
                if self.mode != ModeSpec::Inner {
                    return Err(invalid("the direction adversary answers inner queries only"));
                }
            }
        }
        if let ModeSpec::Bits { bits: Some(b) } = self.mode {
            if b == 0 || b > 1000 {
                return Err(invalid("bits must be in 1..=1000"));
            }
        }
        Ok(())
    }

    /// `K`, the number of levels (or stages) the certificate relies on.
    pub fn depth(&self) -> u32 {
        match self.adversary {
            AdversaryKind::Bit => bit_depth(self.r, self.rho),
            AdversaryKind::Dir => dir_depth(self.d, self.r, self.rho),
        }
    }

    pub fn certified_floor(&self) -> u64 {
        match self.adversary {
            AdversaryKind::Bit => bit_floor(self.n, self.d, self.r, self.rho),
            AdversaryKind::Dir => dir_floor(self.n, self.d, self.r, self.rho),
        }
    }

    /// The floor without ceilings and integer parts, for comparison.
    pub fn asymptotic_floor(&self) -> f64 {
        let d = self.d as f64;
        let ratio = (self.r / (2.0 * self.rho)).ln();
        let per_level = match self.adversary {
            AdversaryKind::Bit => d * d / 16.0 * ratio / 3f64.ln(),
            AdversaryKind::Dir => d * d / 8.0 * ratio / (3.0 * d).ln(),
        };
        2f64.powi(self.n as i32) * per_level
    }

    fn header(&self) -> TranscriptHeader {
        TranscriptHeader {
            n: self.n,
            d: self.d,
            r: self.r,
            rho: self.rho,
            adversary: self.adversary.name().to_string(),
            seed: self.seed,
        }
    }
}

/// The adversary behind a duel.
pub enum Duelist {
    Bit(BitAdversary),
    Dir(DirAdversary),
    MixedBit(MixedAdversary<BitAdversary>),
    MixedDir(MixedAdversary<DirAdversary>),
}

impl Duelist {
    pub fn new(cfg: &DuelConfig) -> Result<Self, Error> {
        let (n, d, r, tol) = (cfg.n, cfg.d, cfg.r, cfg.tol);
        Ok(match (cfg.adversary, n) {
            (AdversaryKind::Bit, 0) => Duelist::Bit(BitAdversary::new(d, r)?),
            (AdversaryKind::Dir, 0) => Duelist::Dir(DirAdversary::new(d, r, tol)?),
            (AdversaryKind::Bit, _) => Duelist::MixedBit(MixedAdversary::new(n, d, r, tol, || BitAdversary::new(d, r))?),
            (AdversaryKind::Dir, _) => {
                Duelist::MixedDir(MixedAdversary::new(n, d, r, tol, || DirAdversary::new(d, r, tol))?)
            }
        })
    }

    pub fn transcript(&self) -> &Transcript {
        match self {
            Duelist::Bit(a) => a.transcript(),
            Duelist::Dir(a) => a.transcript(),
            Duelist::MixedBit(a) => a.transcript(),
            Duelist::MixedDir(a) => a.transcript(),
        }
    }

    /// Two witness instances consistent with everything answered so far.
    pub fn witnesses(&mut self, rho: f64) -> Result<(WitnessSet, WitnessSet), Error> {
        let wrap = |(a, b): (InfBall, InfBall)| (WitnessSet::from_ball(a), WitnessSet::from_ball(b));
        match self {
            Duelist::Bit(a) => a.witness_balls(rho).map(wrap),
            Duelist::Dir(a) => a.witness_balls(rho).map(wrap),
            Duelist::MixedBit(a) => a.mixed_witnesses(rho),
            Duelist::MixedDir(a) => a.mixed_witnesses(rho),
        }
    }

    /// Current level of the coordinate adversary, for brute-force survival counts.
    pub fn level_view(&self) -> Option<LevelView> {
        match self {
            Duelist::Bit(a) if a.d() <= BRUTE_FORCE_MAX_D => Some(LevelView {
                level: a.level(),
                anchor: a.state().anchor.clone(),
                radius: a.state().radius,
            }),
            _ => None,
        }
    }

    pub fn snapshot(&self) -> serde_json::Value {
        let v = match self {
            Duelist::Bit(a) => serde_json::to_value(a.snapshot()),
            Duelist::Dir(a) => serde_json::to_value(a.snapshot()),
            Duelist::MixedBit(a) => serde_json::to_value(a.snapshot()),
            Duelist::MixedDir(a) => serde_json::to_value(a.snapshot()),
        };
        v.unwrap_or_else(|e| serde_json::Value::String(format!("unserializable snapshot: {e}")))
    }
}

impl SeparationOracle for Duelist {
    fn dim(&self) -> usize {
        match self {
            Duelist::Bit(a) => a.dim(),
            Duelist::Dir(a) => a.dim(),
            Duelist::MixedBit(a) => a.dim(),
            Duelist::MixedDir(a) => a.dim(),
        }
    }

    fn query(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
        match self {
            Duelist::Bit(a) => a.query(point, q),
            Duelist::Dir(a) => a.query(point, q),
            Duelist::MixedBit(a) => a.query(point, q),
            Duelist::MixedDir(a) => a.query(point, q),
        }
    }

    fn queries_made(&self) -> usize {
        self.transcript().len()
    }
}

/// Query count at which the solver stopped on its own, or `"unresolved"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    At(usize),
    Unresolved,
}

impl Serialize for Resolution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Resolution::At(q) => s.serialize_u64(*q as u64),
            Resolution::Unresolved => s.serialize_str("unresolved"),
        }
    }
}

impl<'de> Deserialize<'de> for Resolution {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            At(usize),
            Tag(String),
        }
        match Raw::deserialize(de)? {
            Raw::At(q) => Ok(Resolution::At(q)),
            Raw::Tag(s) if s == "unresolved" => Ok(Resolution::Unresolved),
            Raw::Tag(s) => Err(serde::de::Error::custom(format!("expected a count or \"unresolved\", got {s:?}"))),
        }
    }
}

/// Which of the two fatness hypotheses the configuration satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FatnessConditions {
    /// `ρ < R/2` (bit) or `ρ < R/(4d)` (dir).
    pub statement: bool,
    /// `ρ < R/(2·base^K)`: the last level still holds two disjoint `ρ`-balls.
    pub recursion: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuelReport {
    pub config: DuelConfig,
    pub depth: u32,
    pub per_level_budget: usize,
    pub certified_floor: u64,
    pub asymptotic_floor: f64,
    pub query_cap: u64,
    pub queries: usize,
    pub cuts: usize,
    pub box_cuts: usize,
    pub solver_outcome: Option<SolverOutcome>,
    pub solver_queries_at_resolution: Resolution,
    pub witnesses_verified: bool,
    pub disjoint: bool,
    pub violations: Vec<Violation>,
    /// Brute-force survival at the cutoff, before pending answers are settled.
    pub survival: Option<SurvivalReport>,
    pub conditions: FatnessConditions,
    pub error: Option<String>,
    pub slope_fit: Option<f64>,
    pub wallclock_ms: f64,
}

impl DuelReport {
    pub fn ok(&self) -> bool {
        self.witnesses_verified && self.disjoint && self.error.is_none()
    }

    pub fn csv_row(&self) -> CsvRow {
        let c = &self.config;
        CsvRow {
            d: c.d,
            n: c.n,
            r: c.r,
            rho: c.rho,
            adversary: c.adversary.name().to_string(),
            mode: c.mode.name().to_string(),
            floor: self.certified_floor,
            queries: self.queries as f64,
            cuts: self.cuts as f64,
            survivors: self.survival.as_ref().map(|s| s.survivors),
            verified: Some(self.ok()),
            wallclock_ms: self.wallclock_ms,
        }
    }
}

/// What `verify` needs besides the transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub header: TranscriptHeader,
    pub tol: f64,
    pub adversary: serde_json::Value,
    pub witnesses: Vec<WitnessSet>,
    pub level_view: Option<LevelView>,
}

pub struct DuelRun {
    pub report: DuelReport,
    pub header: TranscriptHeader,
    pub transcript: Transcript,
    pub snapshot: Snapshot,
}

impl DuelRun {
    /// Writes `transcript.jsonl`, `snapshot.json`, `report.json` and `duel.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        io::write_transcript(&dir.join("transcript.jsonl"), &self.header, &self.transcript)?;
        io::write_json(&dir.join("snapshot.json"), &self.snapshot)?;
        io::write_json(&dir.join("report.json"), &self.report)?;
        let file = std::fs::File::create(dir.join("duel.csv"))?;
        io::write_csv(file, &[self.report.csv_row()])
    }
}

fn jittered_params(cfg: &DuelConfig, rng: &mut ChaCha8Rng) -> SolveParams {
    let jitter = JITTER * cfg.r;
    let start: Vec<f64> = (0..cfg.d).map(|_| rng.random_range(-jitter..=jitter)).collect();
    SolveParams {
        r: cfg.r,
        rho: cfg.rho,
        mode: cfg.mode.resolve(cfg.r, cfg.d, cfg.rho),
        start: Some(start),
        padding: jitter,
    }
}

/// Runs the solver against the adversary for `min(floor − 1, max_queries)`
/// queries, then extracts and verifies the witness pair.
pub fn run_duel(cfg: &DuelConfig) -> Result<DuelRun, ConfigError> {
    cfg.validate()?;
    let started = Instant::now();
    let floor = cfg.certified_floor();
    let cap = floor.saturating_sub(1).min(cfg.max_queries.unwrap_or(u64::MAX));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = jittered_params(cfg, &mut rng);
    let mut duelist = Duelist::new(cfg).map_err(|e| invalid(e.to_string()))?;

    let mut error = None;
    let solved = {
        let mut capped = Capped::new(&mut duelist, cap as usize);
        if cfg.n == 0 {
            ellipsoid_solve(&mut capped, &[], cfg.d, &params, None)
        } else {
            mixed_solve(&mut capped, cfg.n, cfg.d, &params)
        }
    };
    let solver = match solved {
        Ok(r) => Some(r),
        Err(e) => {
            error = Some(format!("solver: {e}"));
            None
        }
    };

    let level_view = duelist.level_view();
    let survival = level_view.as_ref().and_then(|v| survival_report(duelist.transcript(), v, cfg.tol).ok());

    let mut violations = Vec::new();
    let mut disjoint = false;
    let mut verified = false;
    let mut witnesses = Vec::new();
    match duelist.witnesses(cfg.rho) {
        Ok((w1, w2)) => {
            let t = duelist.transcript();
            let mut all_ok = true;
            for w in [&w1, &w2] {
                if let Err(v) = check_transcript(t, w, cfg.tol) {
                    all_ok = false;
                    violations.extend(v);
                }
            }
            violations.sort_by_key(|v| v.record_index);
            violations.dedup_by(|a, b| a.record_index == b.record_index && a.kind == b.kind);
            disjoint = certify_disjoint(&w1, &w2).unwrap_or(false);
            verified = all_ok;
            witnesses = vec![w1, w2];
        }
        Err(e) => error = Some(format!("witnesses: {e}")),
    }

    let (base, budget) = match cfg.adversary {
        AdversaryKind::Bit => (3.0, bit_level_budget(cfg.d)),
        AdversaryKind::Dir => (3.0 * cfg.d as f64, dir_stage_budget(cfg.d)),
    };
    let depth = cfg.depth();
    let conditions = FatnessConditions {
        statement: match cfg.adversary {
            AdversaryKind::Bit => cfg.rho < cfg.r / 2.0,
            AdversaryKind::Dir => cfg.rho < cfg.r / (4.0 * cfg.d as f64),
        },
        recursion: cfg.rho < cfg.r / (2.0 * base.powi(depth as i32)),
    };
    let resolution = match &solver {
        Some(r) if r.outcome != SolverOutcome::Exhausted => Resolution::At(r.queries),
        _ => Resolution::Unresolved,
    };
    let header = cfg.header();
    let transcript = duelist.transcript().clone();
    let report = DuelReport {
        config: cfg.clone(),
        depth,
        per_level_budget: budget,
        certified_floor: floor,
        asymptotic_floor: cfg.asymptotic_floor(),
        query_cap: cap,
        queries: transcript.len(),
        cuts: solver.as_ref().map_or(0, |r| r.cuts),
        box_cuts: solver.as_ref().map_or(0, |r| r.box_cuts),
        solver_outcome: solver.map(|r| r.outcome),
        solver_queries_at_resolution: resolution,
        witnesses_verified: verified,
        disjoint,
        violations,
        survival,
        conditions,
        error,
        slope_fit: None,
        wallclock_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let snapshot = Snapshot {
        header: header.clone(),
        tol: cfg.tol,
        adversary: duelist.snapshot(),
        witnesses,
        level_view,
    };
    Ok(DuelRun { report, header, transcript, snapshot })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub records: usize,
    pub header_matches: bool,
    pub violations: Vec<Violation>,
    pub disjoint: bool,
    pub survival: Option<SurvivalReport>,
    pub error: Option<String>,
}

impl VerificationReport {
    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Re-checks a transcript against the witnesses stored in a snapshot.
pub fn verify_transcript(header: &TranscriptHeader, t: &Transcript, snap: &Snapshot) -> VerificationReport {
    let mut violations = Vec::new();
    let mut error = None;
    if snap.witnesses.len() != 2 {
        error = Some(format!("snapshot holds {} witnesses, expected 2", snap.witnesses.len()));
    }
    for w in &snap.witnesses {
        if w.dim() != t.dim {
            error = Some(format!("witness dimension {} does not match transcript dimension {}", w.dim(), t.dim));
            continue;
        }
        if let Err(v) = check_transcript(t, w, snap.tol) {
            violations.extend(v);
        }
    }
    violations.sort_by_key(|v| v.record_index);
    violations.dedup_by(|a, b| a.record_index == b.record_index && a.kind == b.kind);
    let disjoint = match snap.witnesses.as_slice() {
        [a, b] if error.is_none() => certify_disjoint(a, b).unwrap_or(false),
        _ => false,
    };
    let survival = snap.level_view.as_ref().and_then(|v| match survival_report(t, v, snap.tol) {
        Ok(s) => Some(s),
        Err(e) => {
            error.get_or_insert_with(|| format!("survival: {e}"));
            None
        }
    });
    let survivors_ok = survival.as_ref().is_none_or(|s| s.survivors >= 1);
    let header_matches = *header == snap.header;
    VerificationReport {
        ok: violations.is_empty() && disjoint && survivors_ok && header_matches && error.is_none(),
        records: t.len(),
        header_matches,
        violations,
        disjoint,
        survival,
        error,
    }
}

/// Reads both files and verifies. Parse failures are errors, not reports.
pub fn replay(transcript: &Path, snapshot: &Path) -> Result<VerificationReport> {
    let (header, t) = io::read_transcript(transcript)?;
    let snap: Snapshot = io::read_json(snapshot)?;
    Ok(verify_transcript(&header, &t, &snap))
}

/// Least-squares slope of `ln y` against `ln x`. Needs two distinct positive `x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// A random planted instance: a fiber in `{0,1}^n` and a `ρ`-ball inside the box.
pub fn planted_instance(rng: &mut ChaCha8Rng, n: usize, d: usize, r: f64, rho: f64) -> HonestOracle {
    let fiber: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..2u8))).collect();
    let center: Vec<f64> = (0..d).map(|_| rng.random_range(-(r - rho)..=(r - rho))).collect();
    HonestOracle::planted(fiber, InfBall { center, radius: rho })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HonestRun {
    pub outcome: SolverOutcome,
    pub queries: usize,
    pub cuts: usize,
    /// Feasible, and the returned point lies in the planted instance.
    pub sound: bool,
}

pub fn honest_solve(oracle: &mut HonestOracle, n: usize, d: usize, params: &SolveParams) -> Result<HonestRun, Error> {
    let rep = if n == 0 {
        ellipsoid_solve(oracle, &[], d, params, None)?
    } else {
        mixed_solve(oracle, n, d, params)?
    };
    let sound = match &rep.outcome {
        SolverOutcome::Feasible { point } => oracle.contains(point),
        _ => false,
    };
    Ok(HonestRun { outcome: rep.outcome, queries: rep.queries, cuts: rep.cuts, sound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub ds: Vec<usize>,
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub rho: f64,
    /// Which floor to report next to the honest solver counts.
    pub adversary: AdversaryKind,
    pub mode: ModeSpec,
    pub instances: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<CsvRow>,
    pub floor_slope: Option<f64>,
    pub cuts_slope: Option<f64>,
    pub queries_slope: Option<f64>,
}

/// Per `d`: the certified floor, and mean cut and query counts of the honest
/// solver on planted instances.
pub fn run_scaling(cfg: &ScalingConfig) -> Result<ScalingReport, ConfigError> {
    if cfg.ds.len() < 4 {
        return Err(invalid("a scaling sweep needs at least four dimensions"));
    }
    if cfg.instances == 0 {
        return Err(invalid("a scaling sweep needs at least one instance per dimension"));
    }
    if !(cfg.r > 0.0 && cfg.rho > 0.0 && cfg.rho < cfg.r / 2.0) {
        return Err(invalid("need 0 < rho < R/2"));
    }
    if cfg.n > MIXED_MAX_N {
        return Err(invalid(format!("n must be at most {MIXED_MAX_N}")));
    }
    let mut rows = Vec::with_capacity(cfg.ds.len());
    for &d in &cfg.ds {
        if d == 0 {
            return Err(invalid("d must be positive"));
        }
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (d as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let params = SolveParams::new(cfg.r, cfg.rho, cfg.mode.resolve(cfg.r, d, cfg.rho));
        let (mut queries, mut cuts, mut sound) = (0usize, 0usize, true);
        for _ in 0..cfg.instances {
            let mut oracle = planted_instance(&mut rng, cfg.n, d, cfg.r, cfg.rho);
            let run = honest_solve(&mut oracle, cfg.n, d, &params).map_err(|e| invalid(e.to_string()))?;
            queries += run.queries;
            cuts += run.cuts;
            sound &= run.sound;
        }
        let floor = match cfg.adversary {
            AdversaryKind::Bit => bit_floor(cfg.n, d, cfg.r, cfg.rho),
            AdversaryKind::Dir => dir_floor(cfg.n, d, cfg.r, cfg.rho),
        };
        let k = cfg.instances as f64;
        rows.push(CsvRow {
            d,
            n: cfg.n,
            r: cfg.r,
            rho: cfg.rho,
            adversary: cfg.adversary.name().to_string(),
            mode: cfg.mode.name().to_string(),
            floor,
            queries: queries as f64 / k,
            cuts: cuts as f64 / k,
            survivors: None,
            verified: Some(sound),
            wallclock_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.d as f64).collect();
    let col = |f: fn(&CsvRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    Ok(ScalingReport {
        floor_slope: loglog_slope(&xs, &col(|r| r.floor as f64)),
        cuts_slope: loglog_slope(&xs, &col(|r| r.cuts)),
        queries_slope: loglog_slope(&xs, &col(|r| r.queries)),
        rows,
    })
}
