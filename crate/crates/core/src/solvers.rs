//! Baseline solvers that only see low-bandwidth answers: normal reconstruction
//! and an ellipsoid cutting-plane loop, plus an honest planted-ball oracle to run
//! them against.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::geometry::{all_finite, box_face_separator, check_dim, dot, signed_basis, BoxRegion, InfBall, Normal, Point};
use crate::linalg::SquareMatrix;
use crate::mixed::fiber_point;
use crate::oracle::{
    evaluate_query, point_key, reconstruct_from_bits, OracleAnswer, Query, SeparationOracle, Transcript,
    TranscriptRecord,
};
use crate::Error;

/// How a solver turns queries into a normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReconMode {
    /// One `Coord` query per coordinate.
    Coord,
    /// Bits `0..=B` of every coordinate of the ℓ∞-normalized normal.
    Bits { bits: u32 },
    /// One `Inner(e^j)` query per coordinate.
    Inner,
}

impl ReconMode {
    pub fn name(&self) -> &'static str {
        match self {
            ReconMode::Coord => "coord",
            ReconMode::Bits { .. } => "bits",
            ReconMode::Inner => "inner",
        }
    }

    /// Queries per reconstructed coordinate.
    pub fn cost(&self) -> usize {
        match self {
            ReconMode::Bits { bits } => *bits as usize + 1,
            _ => 1,
        }
    }

    /// Cut slack that keeps every cut valid under `2^-B` coordinate error:
    /// `2^-B · 2R · d` (the ℓ₁ diameter of the box).
    pub fn slack(&self, r: f64, d: usize) -> f64 {
        match self {
            ReconMode::Bits { bits } => libm::scalbn(2.0 * r * d as f64, -(*bits as i32)),
            _ => 0.0,
        }
    }
}

/// Default bit budget `⌈log₂(4Rd/ρ)⌉`, which keeps the slack at most `ρ/2`.
pub fn default_bits(r: f64, d: usize, rho: f64) -> u32 {
    let b = libm::ceil(libm::log2(4.0 * r * d as f64 / rho));
    if b < 1.0 {
        1
    } else {
        b as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reconstruction {
    Feasible,
    Normal(Normal),
}

/// Reconstructs coordinates `block` of the normal at `point`. Returns the block
/// and the number of queries spent.
pub fn reconstruct_block<O: SeparationOracle + ?Sized>(
    oracle: &mut O,
    point: &[f64],
    mode: ReconMode,
    block: Range<usize>,
) -> Result<(Reconstruction, usize), Error> {
    let mut used = 0;
    let r = reconstruct_counted(oracle, point, mode, block, &mut used)?;
    Ok((r, used))
}

/// As [`reconstruct_block`], but adds to `used` as it goes so that queries spent
/// before an error are still counted.
pub fn reconstruct_counted<O: SeparationOracle + ?Sized>(
    oracle: &mut O,
    point: &[f64],
    mode: ReconMode,
    block: Range<usize>,
    used: &mut usize,
) -> Result<Reconstruction, Error> {
    let dim = oracle.dim();
    check_dim(dim, point.len())?;
    let mut g = Vec::with_capacity(block.len());
    for j in block {
        let value = match mode {
            ReconMode::Coord | ReconMode::Inner => {
                let q = if mode == ReconMode::Coord {
                    Query::Coord { j }
                } else {
                    Query::Inner { v: signed_basis(dim, j, 1.0) }
                };
                let a = oracle.query(point, &q)?;
                *used += 1;
                match a {
                    OracleAnswer::Feasible => return Ok(Reconstruction::Feasible),
                    OracleAnswer::Value { value } => value,
                    OracleAnswer::Bit { .. } => return Err(Error::Invariant("bit answer to a value query".into())),
                }
            }
            ReconMode::Bits { bits } => {
                let mut digits = Vec::with_capacity(bits as usize + 1);
                for i in 0..=bits {
                    let a = oracle.query(point, &Query::Bit { i, j })?;
                    *used += 1;
                    match a {
                        OracleAnswer::Feasible => return Ok(Reconstruction::Feasible),
                        OracleAnswer::Bit { value } => digits.push(value),
                        OracleAnswer::Value { .. } => {
                            return Err(Error::Invariant("value answer to a bit query".into()))
                        }
                    }
                }
                reconstruct_from_bits(&digits)
            }
        };
        g.push(value);
    }
    Ok(Reconstruction::Normal(g))
}

/// Reconstructs the whole normal. An all-zero result counts as feasible.
pub fn reconstruct_normal<O: SeparationOracle + ?Sized>(
    oracle: &mut O,
    point: &[f64],
    mode: ReconMode,
) -> Result<(Reconstruction, usize), Error> {
    let dim = oracle.dim();
    let (r, used) = reconstruct_block(oracle, point, mode, 0..dim)?;
    Ok(match r {
        Reconstruction::Normal(g) if g.iter().all(|x| *x == 0.0) => (Reconstruction::Feasible, used),
        other => (other, used),
    })
}

/// Wraps an oracle and refuses queries beyond `cap`.
pub struct Capped<O> {
    pub inner: O,
    cap: usize,
    used: usize,
}

impl<O: SeparationOracle> Capped<O> {
    pub fn new(inner: O, cap: usize) -> Self {
        Self { inner, cap, used: 0 }
    }

    pub fn used(&self) -> usize {
        self.used
    }
}

impl<O: SeparationOracle> SeparationOracle for Capped<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
        if self.used >= self.cap {
            return Err(Error::QueryBudgetExhausted);
        }
        let a = self.inner.query(point, q)?;
        self.used += 1;
        Ok(a)
    }

    fn queries_made(&self) -> usize {
        self.used
    }
}

/// Separation oracle for a planted instance `{x*} × ball`, or the empty set.
///
/// Off the planted fiber the normal is `(x − x*, 0)`; on it, the signed basis
/// vector of the most violated ball coordinate (smallest index on ties).
#[derive(Debug, Clone)]
pub struct HonestOracle {
    n: usize,
    d: usize,
    planted: Option<(Vec<f64>, InfBall)>,
    transcript: Option<Transcript>,
    count: usize,
    cache: Option<(Vec<u64>, Normal)>,
}

impl HonestOracle {
    pub fn planted(fiber: Vec<f64>, ball: InfBall) -> Self {
        let (n, d) = (fiber.len(), ball.center.len());
        Self { n, d, planted: Some((fiber, ball)), transcript: None, count: 0, cache: None }
    }

    pub fn empty(n: usize, d: usize) -> Self {
        Self { n, d, planted: None, transcript: None, count: 0, cache: None }
    }

    /// Keep a transcript of every answer (off by default to save memory).
    pub fn recording(mut self) -> Self {
        self.transcript = Some(Transcript::new(self.n + self.d));
        self
    }

    pub fn transcript(&self) -> Option<&Transcript> {
        self.transcript.as_ref()
    }

    pub fn instance(&self) -> Option<&(Vec<f64>, InfBall)> {
        self.planted.as_ref()
    }

    /// Exact membership in the planted instance.
    pub fn contains(&self, z: &[f64]) -> bool {
        match &self.planted {
            None => false,
            Some((fiber, ball)) => {
                let (x, y) = z.split_at(self.n);
                x == fiber.as_slice() && ball.contains(y)
            }
        }
    }

    pub fn normal_at(&self, z: &[f64]) -> Normal {
        let dim = self.n + self.d;
        let Some((fiber, ball)) = &self.planted else {
            return signed_basis(dim, self.n, 1.0);
        };
        let (x, y) = z.split_at(self.n);
        if x != fiber.as_slice() {
            let mut g: Vec<f64> = x.iter().zip(fiber).map(|(a, b)| a - b).collect();
            g.resize(dim, 0.0);
            return g;
        }
        let region = BoxRegion { center: ball.center.clone(), radius: ball.radius };
        match box_face_separator(y, &region) {
            None => vec![0.0; dim],
            Some(h) => {
                let mut g = vec![0.0; self.n];
                g.extend(h.normal);
                g
            }
        }
    }
}

impl SeparationOracle for HonestOracle {
    fn dim(&self) -> usize {
        self.n + self.d
    }

    fn query(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
        check_dim(self.n + self.d, point.len())?;
        if !all_finite(point) {
            return Err(Error::NonFinite);
        }
        let key = point_key(point);
        let g = match &self.cache {
            Some((k, g)) if *k == key => g.clone(),
            _ => {
                let g = self.normal_at(point);
                self.cache = Some((key, g.clone()));
                g
            }
        };
        let answer = evaluate_query(q, &g)?;
        self.count += 1;
        if let Some(t) = &mut self.transcript {
            t.push(TranscriptRecord {
                point: point.to_vec(),
                query: q.clone(),
                answer,
                realized_normal: Some(g),
                level: 0,
                tag: "honest".to_string(),
            })?;
        }
        Ok(answer)
    }

    fn queries_made(&self) -> usize {
        self.count
    }
}

/// `ln` of the volume of the Euclidean unit ball in `ℝ^d`.
pub fn ln_unit_ball_volume(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    h * libm::log(core::f64::consts::PI) - libm::lgamma(h + 1.0)
}

/// `{z : (z − c)ᵀ P⁻¹ (z − c) <= 1}` with `ln det P` tracked analytically.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    pub center: Point,
    pub shape: SquareMatrix,
    pub log_det: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutEffect {
    Applied,
    /// The cut is too shallow to shrink the ellipsoid.
    Skipped,
    /// The halfspace misses the ellipsoid entirely.
    Empty,
    /// `gᵀPg` is not positive: the shape has lost definiteness.
    Degenerate,
}

impl Ellipsoid {
    pub fn ball(center: Point, radius: f64) -> Self {
        let d = center.len();
        Self {
            shape: SquareMatrix::scaled_identity(d, radius * radius),
            log_det: d as f64 * libm::log(radius * radius),
            center,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn log_volume(&self) -> f64 {
        ln_unit_ball_volume(self.dim()) + 0.5 * self.log_det
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        let Some(l) = self.shape.cholesky() else {
            return false;
        };
        // Solve L w = z − c, then ‖w‖² <= 1.
        let d = self.dim();
        let diff: Vec<f64> = z.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let mut w = vec![0.0; d];
        for i in 0..d {
            let mut s = diff[i];
            for k in 0..i {
                s -= l[i * d + k] * w[k];
            }
            w[i] = s / l[i * d + i];
        }
        dot(&w, &w) <= 1.0 + 1e-12
    }

    /// Löwner–John update for `E ∩ {z : ⟨g, z⟩ <= offset}`.
    pub fn cut(&mut self, g: &[f64], offset: f64) -> CutEffect {
        let d = self.dim();
        let pg = self.shape.mul_vec(g);
        let gpg = dot(g, &pg);
        if !(gpg > 0.0) || !gpg.is_finite() {
            self.shape.symmetrize();
            return CutEffect::Degenerate;
        }
        let root = libm::sqrt(gpg);
        let alpha = (dot(g, &self.center) - offset) / root;
        if alpha >= 1.0 {
            return CutEffect::Empty;
        }
        if d == 1 {
            let half = libm::sqrt(self.shape.data[0]);
            let (mut lo, mut hi) = (self.center[0] - half, self.center[0] + half);
            let bound = offset / g[0];
            if g[0] > 0.0 {
                hi = hi.min(bound);
            } else {
                lo = lo.max(bound);
            }
            if !(hi > lo) {
                return CutEffect::Empty;
            }
            let h = 0.5 * (hi - lo);
            self.center[0] = 0.5 * (hi + lo);
            self.shape.data[0] = h * h;
            self.log_det = libm::log(h * h);
            return CutEffect::Applied;
        }
        let df = d as f64;
        if alpha <= -1.0 / df {
            return CutEffect::Skipped;
        }
        let b: Vec<f64> = pg.iter().map(|x| x / root).collect();
        let tau = (1.0 + df * alpha) / (df + 1.0);
        let sigma = 2.0 * (1.0 + df * alpha) / ((df + 1.0) * (1.0 + alpha));
        let delta = df * df * (1.0 - alpha * alpha) / (df * df - 1.0);
        for (c, bi) in self.center.iter_mut().zip(&b) {
            *c -= tau * bi;
        }
        self.shape.rank_one_update(delta, sigma, &b);
        self.shape.symmetrize();
        self.log_det += df * libm::log(delta) + libm::log(1.0 - sigma);
        CutEffect::Applied
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverOutcome {
    Feasible { point: Point },
    Infeasible { reason: InfeasibleReason },
    /// The query budget ran out before the solver could decide.
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasibleReason {
    /// Ellipsoid volume fell below that of a `ρ`-ball.
    Volume,
    /// Hard iteration cap reached.
    Cap,
    /// A normal with vanishing continuous part ruled the whole fiber out.
    EmptyFiber,
    /// The cut missed the ellipsoid, or the shape lost definiteness.
    Numerical,
    /// Every fiber was ruled out.
    AllFibers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub outcome: SolverOutcome,
    pub queries: usize,
    /// Cuts from oracle normals.
    pub cuts: usize,
    /// Cuts from box faces, which cost no query.
    pub box_cuts: usize,
    pub oracle_kind: String,
}

impl SolverReport {
    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, SolverOutcome::Feasible { .. })
    }
}

/// One cut added by the solver, for validity audits.
#[derive(Debug, Clone, PartialEq)]
pub struct CutRecord {
    pub normal: Normal,
    pub center: Point,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    pub r: f64,
    pub rho: f64,
    pub mode: ReconMode,
    /// Start center; the origin if `None`.
    pub start: Option<Point>,
    /// Extra radius so a shifted start still covers the box.
    pub padding: f64,
}

impl SolveParams {
    pub fn new(r: f64, rho: f64, mode: ReconMode) -> Self {
        Self { r, rho, mode, start: None, padding: 0.0 }
    }
}

/// `⌈10·d²·ln(dR/ρ)⌉`.
pub fn iteration_cap(d: usize, r: f64, rho: f64) -> usize {
    let df = d as f64;
    let v = libm::ceil(10.0 * df * df * libm::log(df * r / rho));
    if v < 1.0 {
        1
    } else {
        v as usize
    }
}

/// Ellipsoid method on the slice `{fiber} × [−R, R]^d`; `fiber` is empty for
/// the continuous problem.
pub fn ellipsoid_solve<O: SeparationOracle + ?Sized>(
    oracle: &mut O,
    fiber: &[f64],
    d: usize,
    params: &SolveParams,
    mut log: Option<&mut Vec<CutRecord>>,
) -> Result<SolverReport, Error> {
    let n = fiber.len();
    check_dim(oracle.dim(), n + d)?;
    if !(params.r > params.rho && params.rho > 0.0) {
        return Err(Error::Precondition("need R > rho > 0".into()));
    }
    let start = params.start.clone().unwrap_or_else(|| vec![0.0; d]);
    check_dim(d, start.len())?;
    let mut e = Ellipsoid::ball(start, libm::sqrt(d as f64) * (params.r + params.padding));
    let universe = BoxRegion { center: vec![0.0; d], radius: params.r };
    let stop = d as f64 * libm::log(2.0 * params.rho);
    let slack = params.mode.slack(params.r, d);
    let cap = iteration_cap(d, params.r, params.rho);
    let mut report = SolverReport {
        outcome: SolverOutcome::Exhausted,
        queries: 0,
        cuts: 0,
        box_cuts: 0,
        oracle_kind: params.mode.name().to_string(),
    };
    let mut point = fiber.to_vec();
    point.resize(n + d, 0.0);

    for _ in 0..cap {
        if e.log_volume() < stop {
            report.outcome = SolverOutcome::Infeasible { reason: InfeasibleReason::Volume };
            return Ok(report);
        }
        let (g, offset) = if let Some(face) = box_face_separator(&e.center, &universe) {
            report.box_cuts += 1;
            (face.normal, face.offset)
        } else {
            point[n..].copy_from_slice(&e.center);
            let rec = match reconstruct_counted(oracle, &point, params.mode, n..n + d, &mut report.queries) {
                Ok(r) => r,
                Err(Error::QueryBudgetExhausted) => return Ok(report),
                Err(err) => return Err(err),
            };
            let g = match rec {
                Reconstruction::Feasible => {
                    report.outcome = SolverOutcome::Feasible { point: point.clone() };
                    return Ok(report);
                }
                Reconstruction::Normal(g) => g,
            };
            if g.iter().all(|x| *x == 0.0) {
                report.outcome = if n == 0 {
                    SolverOutcome::Feasible { point: point.clone() }
                } else {
                    SolverOutcome::Infeasible { reason: InfeasibleReason::EmptyFiber }
                };
                return Ok(report);
            }
            report.cuts += 1;
            let offset = dot(&g, &e.center) + slack;
            (g, offset)
        };
        if let Some(log) = log.as_deref_mut() {
            log.push(CutRecord { normal: g.clone(), center: e.center.clone(), offset });
        }
        match e.cut(&g, offset) {
            CutEffect::Applied | CutEffect::Skipped => {}
            CutEffect::Empty | CutEffect::Degenerate => {
                report.outcome = SolverOutcome::Infeasible { reason: InfeasibleReason::Numerical };
                return Ok(report);
            }
        }
    }
    report.outcome = SolverOutcome::Infeasible { reason: InfeasibleReason::Cap };
    Ok(report)
}

/// First query a mode would issue at `point`, used for the fractional probe.
fn probe_query(mode: ReconMode, dim: usize, j: usize) -> Query {
    match mode {
        ReconMode::Coord => Query::Coord { j },
        ReconMode::Bits { .. } => Query::Bit { i: 0, j },
        ReconMode::Inner => Query::Inner { v: signed_basis(dim, j, 1.0) },
    }
}

/// Largest `n` the fiber enumeration accepts.
pub const MIXED_MAX_N: usize = 3;

/// Fiber enumeration: one probe at the center of the unit cell, then the
/// ellipsoid method on every fiber `{0,1}^n` in order. A feasible answer at the
/// fractional probe is not a mixed-integer solution and only costs a query.
pub fn mixed_solve<O: SeparationOracle + ?Sized>(
    oracle: &mut O,
    n: usize,
    d: usize,
    params: &SolveParams,
) -> Result<SolverReport, Error> {
    if n > MIXED_MAX_N {
        return Err(Error::TooLarge(MIXED_MAX_N));
    }
    if n == 0 {
        return ellipsoid_solve(oracle, &[], d, params, None);
    }
    let mut total = SolverReport {
        outcome: SolverOutcome::Exhausted,
        queries: 0,
        cuts: 0,
        box_cuts: 0,
        oracle_kind: params.mode.name().to_string(),
    };
    let mut probe = vec![0.5; n];
    probe.resize(n + d, 0.0);
    match oracle.query(&probe, &probe_query(params.mode, n + d, n)) {
        Ok(_) => total.queries += 1,
        Err(Error::QueryBudgetExhausted) => return Ok(total),
        Err(err) => return Err(err),
    }
    for f in 0..1usize << n {
        let r = ellipsoid_solve(oracle, &fiber_point(n, f), d, params, None)?;
        total.queries += r.queries;
        total.cuts += r.cuts;
        total.box_cuts += r.box_cuts;
        match r.outcome {
            SolverOutcome::Infeasible { .. } => continue,
            other => {
                total.outcome = other;
                return Ok(total);
            }
        }
    }
    total.outcome = SolverOutcome::Infeasible { reason: InfeasibleReason::AllFibers };
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstruct_examples() {
        struct Fixed(Vec<f64>, usize);
        impl SeparationOracle for Fixed {
            fn dim(&self) -> usize {
                self.0.len()
            }
            fn query(&mut self, _: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
                self.1 += 1;
                evaluate_query(q, &self.0)
            }
            fn queries_made(&self) -> usize {
                self.1
            }
        }
        let mut o = Fixed(vec![0.5, -1.0], 0);
        let (r, used) = reconstruct_normal(&mut o, &[0.0, 0.0], ReconMode::Coord).unwrap();
        assert_eq!(r, Reconstruction::Normal(vec![0.5, -1.0]));
        assert_eq!(used, 2);

        let mut o = Fixed(vec![1.0, 0.3], 0);
        let (r, used) = reconstruct_normal(&mut o, &[0.0, 0.0], ReconMode::Bits { bits: 5 }).unwrap();
        let Reconstruction::Normal(g) = r else { panic!() };
        assert!((g[1] - 0.3).abs() <= 1.0 / 32.0);
        assert_eq!(used, 12);

        let mut o = Fixed(vec![3.0, 4.0, 0.0], 0);
        let (r, used) = reconstruct_normal(&mut o, &[0.0; 3], ReconMode::Inner).unwrap();
        assert_eq!(r, Reconstruction::Normal(vec![3.0, 4.0, 0.0]));
        assert_eq!(used, 3);
    }

    #[test]
    fn centered_ball_found_immediately() {
        let mut o = HonestOracle::planted(vec![], InfBall::new(vec![0.0; 3], 0.01).unwrap());
        let r = ellipsoid_solve(&mut o, &[], 3, &SolveParams::new(1.0, 0.01, ReconMode::Coord), None).unwrap();
        assert_eq!(r.outcome, SolverOutcome::Feasible { point: vec![0.0; 3] });
        assert_eq!(r.queries, 1);
    }

    #[test]
    fn empty_instance_is_infeasible() {
        let mut o = HonestOracle::empty(0, 3);
        let r = ellipsoid_solve(&mut o, &[], 3, &SolveParams::new(1.0, 0.05, ReconMode::Coord), None).unwrap();
        assert!(matches!(r.outcome, SolverOutcome::Infeasible { .. }));
        assert!(r.cuts <= iteration_cap(3, 1.0, 0.05));
    }

    #[test]
    fn one_dimensional_cuts() {
        let mut o = HonestOracle::planted(vec![], InfBall::new(vec![0.7], 0.01).unwrap());
        let r = ellipsoid_solve(&mut o, &[], 1, &SolveParams::new(1.0, 0.01, ReconMode::Coord), None).unwrap();
        let SolverOutcome::Feasible { point } = r.outcome else { panic!("{r:?}") };
        assert!(o.contains(&point));
    }

    #[test]
    fn mixed_finds_second_fiber() {
        let mut o = HonestOracle::planted(vec![1.0], InfBall::new(vec![0.2, -0.3], 0.05).unwrap());
        let r = mixed_solve(&mut o, 1, 2, &SolveParams::new(1.0, 0.05, ReconMode::Coord)).unwrap();
        let SolverOutcome::Feasible { point } = r.outcome else { panic!("{r:?}") };
        assert!(o.contains(&point));
        assert_eq!(r.queries, o.queries_made());
    }

    #[test]
    fn mixed_empty_within_cap() {
        let mut o = HonestOracle::empty(2, 2);
        let p = SolveParams::new(1.0, 0.05, ReconMode::Coord);
        let r = mixed_solve(&mut o, 2, 2, &p).unwrap();
        assert!(matches!(r.outcome, SolverOutcome::Infeasible { .. }));
        assert!(r.queries <= 1 + 4 * 2 * iteration_cap(2, 1.0, 0.05));
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((ln_unit_ball_volume(2) - libm::log(core::f64::consts::PI)).abs() < 1e-12);
        assert!((ln_unit_ball_volume(3) - libm::log(4.0 / 3.0 * core::f64::consts::PI)).abs() < 1e-12);
    }
}
