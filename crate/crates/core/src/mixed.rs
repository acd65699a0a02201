//! Lifting a continuous adversary to `n` binary variables.
//!
//! Points `(x, y) ∈ ℝ^n × ℝ^d` are classified by their integer part. Fractional
//! points inside the unit cell are reported feasible, integral points are handed
//! to one continuous adversary per fiber, and the fiber's normal `â` is lifted to
//! `(M·ã, â)` with `ã = x̂ − ½·1`. A large enough `M` keeps every other fiber and
//! every feasible-reported point strictly on the feasible side.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bounds::{bit_depth, bit_level_budget, dir_depth, dir_stage_budget};
use crate::geometry::{
    all_finite, box_face_separator, check_dim, dist_inf, dot, norm_l1, signed_basis, BoxRegion, InfBall, Normal,
    Point, WitnessSet,
};
use crate::oracle::{
    bit_of, evaluate_query, point_key, OracleAnswer, Query, SeparationOracle, Transcript, TranscriptRecord,
};
use crate::{ContinuousAdversary, Error};

/// Largest number of binary variables the mixed adversary accepts.
pub const MAX_N: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiberClass {
    OutsideUnitBox,
    Fractional,
    /// Every coordinate exactly 0 or 1.
    Integral(Vec<u8>),
}

pub fn classify_fiber(x: &[f64]) -> FiberClass {
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return FiberClass::OutsideUnitBox;
    }
    if x.iter().all(|v| *v == 0.0 || *v == 1.0) {
        FiberClass::Integral(x.iter().map(|v| u8::from(*v == 1.0)).collect())
    } else {
        FiberClass::Fractional
    }
}

/// Fiber number with coordinate 0 as the most significant bit.
pub fn fiber_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, b| (acc << 1) | usize::from(*b))
}

/// The 0/1 point of fiber `index`.
pub fn fiber_point(n: usize, index: usize) -> Vec<f64> {
    (0..n).map(|i| if index >> (n - 1 - i) & 1 == 1 { 1.0 } else { 0.0 }).collect()
}

/// `ã = x̂ − ½·1`.
pub fn centered(xhat: &[f64]) -> Vec<f64> {
    xhat.iter().map(|x| x - 0.5).collect()
}

/// `(M·ã, â)`.
pub fn compose(atilde: &[f64], m: f64, ahat: &[f64]) -> Normal {
    atilde.iter().map(|a| m * a).chain(ahat.iter().copied()).collect()
}

/// Feasible-reported points in `ℝ^{n+d}` and the instance parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftContext {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub feasible: Vec<Point>,
}

impl LiftContext {
    pub fn new(n: usize, d: usize, r: f64) -> Self {
        Self { n, d, r, feasible: Vec::new() }
    }
}

fn lift_gap(atilde: &[f64], xhat: &[f64], x: &[f64]) -> Result<f64, Error> {
    let gap: f64 = atilde.iter().zip(xhat).zip(x).map(|((a, xh), xi)| a * (xh - xi)).sum();
    if gap > 0.0 {
        Ok(gap)
    } else {
        Err(Error::Invariant(format!("feasible point on the lifted fiber side (gap {gap})")))
    }
}

/// Lift of a realized normal: `M = max{M1, M2} + 1` with `M1` the exact max-ratio
/// over `ctx` and `M2 = 4R‖â‖₁ + 1`. Returns the lifted normal and `M`.
pub fn lift_normal(xhat: &[f64], yhat: &[f64], ahat: &[f64], ctx: &LiftContext) -> Result<(Normal, f64), Error> {
    check_dim(ctx.n, xhat.len())?;
    check_dim(ctx.d, ahat.len())?;
    check_dim(ctx.d, yhat.len())?;
    let atilde = centered(xhat);
    let mut m1: f64 = 0.0;
    for z in &ctx.feasible {
        let (x, y) = z.split_at(ctx.n);
        let gap = lift_gap(&atilde, xhat, x)?;
        m1 = m1.max((dot(ahat, y) - dot(ahat, yhat)) / gap);
    }
    let m2 = 4.0 * ctx.r * norm_l1(ahat) + 1.0;
    let m = m1.max(m2) + 1.0;
    Ok((compose(&atilde, m, ahat), m))
}

/// `M` valid for every normal with `‖â‖₁ <= l1_bound`, with slack `guard` on every
/// feasible-reported point. Used while `â` is still pending.
pub fn lift_multiplier_bound(xhat: &[f64], yhat: &[f64], l1_bound: f64, ctx: &LiftContext, guard: f64) -> Result<f64, Error> {
    let atilde = centered(xhat);
    let mut m1: f64 = 0.0;
    for z in &ctx.feasible {
        let (x, y) = z.split_at(ctx.n);
        let gap = lift_gap(&atilde, xhat, x)?;
        m1 = m1.max((l1_bound * dist_inf(y, yhat) + guard) / gap);
    }
    let m2 = 4.0 * ctx.r * l1_bound + 1.0;
    Ok(m1.max(m2) + 1.0)
}

/// One integral query handed to a fiber adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftRecord {
    /// Index in the mixed transcript.
    pub index: usize,
    pub fiber: usize,
    /// Index in the fiber adversary's transcript.
    pub inner_index: usize,
    pub m: f64,
    /// Number of feasible-reported points when the lift was made.
    pub ctx_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Origin {
    Lift(usize),
    Guard,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedSnapshot {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub adversary: String,
    pub ctx: LiftContext,
    pub lifts: Vec<LiftRecord>,
    pub fiber_queries: Vec<usize>,
}

pub struct MixedAdversary<A: ContinuousAdversary> {
    n: usize,
    d: usize,
    r: f64,
    guard: f64,
    fibers: Vec<A>,
    ctx: LiftContext,
    lifts: Vec<LiftRecord>,
    origins: Vec<Origin>,
    transcript: Transcript,
    memo: BTreeMap<Vec<u64>, Normal>,
}

impl<A: ContinuousAdversary> MixedAdversary<A> {
    /// `make` builds one fresh continuous adversary per fiber.
    pub fn new(n: usize, d: usize, r: f64, tol: f64, mut make: impl FnMut() -> Result<A, Error>) -> Result<Self, Error> {
        if n > MAX_N {
            return Err(Error::TooLarge(MAX_N));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Precondition("R must be positive and finite".into()));
        }
        let fibers = (0..1usize << n).map(|_| make()).collect::<Result<Vec<A>, Error>>()?;
        if fibers.iter().any(|f| f.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: fibers[0].dim() });
        }
        Ok(Self {
            n,
            d,
            r,
            guard: 1e3 * tol.max(f64::EPSILON),
            fibers,
            ctx: LiftContext::new(n, d, r),
            lifts: Vec::new(),
            origins: Vec::new(),
            transcript: Transcript::new(n + d),
            memo: BTreeMap::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &'static str {
        self.fibers[0].kind()
    }

    pub fn fibers(&self) -> &[A] {
        &self.fibers
    }

    pub fn ctx(&self) -> &LiftContext {
        &self.ctx
    }

    pub fn lifts(&self) -> &[LiftRecord] {
        &self.lifts
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn fiber_queries(&self) -> Vec<usize> {
        self.fibers.iter().map(|f| f.queries_made()).collect()
    }

    pub fn snapshot(&self) -> MixedSnapshot {
        MixedSnapshot {
            n: self.n,
            d: self.d,
            r: self.r,
            adversary: self.kind().to_string(),
            ctx: self.ctx.clone(),
            lifts: self.lifts.clone(),
            fiber_queries: self.fiber_queries(),
        }
    }

    fn record(
        &mut self,
        point: &[f64],
        q: &Query,
        answer: OracleAnswer,
        normal: Option<Normal>,
        tag: String,
        origin: Origin,
    ) -> Result<usize, Error> {
        let level = match origin {
            Origin::Lift(l) => {
                let lift = &self.lifts[l];
                self.fibers[lift.fiber].transcript().records[lift.inner_index].level
            }
            _ => 0,
        };
        if let Some(g) = &normal {
            self.memo.insert(point_key(point), g.clone());
        }
        let index = self.transcript.push(TranscriptRecord {
            point: point.to_vec(),
            query: q.clone(),
            answer,
            realized_normal: normal,
            level,
            tag,
        })?;
        self.origins.push(origin);
        Ok(index)
    }

    fn answer_with(&mut self, point: &[f64], q: &Query, normal: Normal, tag: String, origin: Origin) -> Result<OracleAnswer, Error> {
        let answer = evaluate_query(q, &normal)?;
        self.record(point, q, answer, Some(normal), tag, origin)?;
        Ok(answer)
    }

    fn padded(&self, offset: usize, inner: &[f64]) -> Normal {
        let mut g = vec![0.0; self.n + self.d];
        g[offset..offset + inner.len()].copy_from_slice(inner);
        g
    }

    /// Realizes mixed records whose fiber normal has become known.
    fn sync(&mut self) -> Result<(), Error> {
        for l in 0..self.lifts.len() {
            let lift = self.lifts[l].clone();
            if self.transcript.records[lift.index].realized_normal.is_some() {
                continue;
            }
            let Some(ahat) = self.fibers[lift.fiber].transcript().records[lift.inner_index].realized_normal.clone() else {
                continue;
            };
            let atilde = centered(&fiber_point(self.n, lift.fiber));
            let g = compose(&atilde, lift.m, &ahat);
            self.memo.insert(point_key(&self.transcript.records[lift.index].point), g.clone());
            self.transcript.resolve(lift.index, g)?;
        }
        Ok(())
    }

    fn force_lift(&mut self, l: usize) -> Result<(), Error> {
        let lift = self.lifts[l].clone();
        self.fibers[lift.fiber].force_resolve(lift.inner_index)?;
        self.sync()
    }

    /// First lift or guard record whose point is not separated from `z` by more
    /// than the guard slack (pending normals are bounded by Hölder first).
    fn guard_violation(&mut self, z: &[f64]) -> Result<Option<usize>, Error> {
        let l1 = self.fibers[0].normal_l1_bound();
        for idx in 0..self.transcript.len() {
            let origin = self.origins[idx];
            if origin == Origin::Other {
                continue;
            }
            if self.transcript.records[idx].realized_normal.is_none() {
                let Origin::Lift(l) = origin else {
                    return Err(Error::Invariant("pending guard record".into()));
                };
                let lift = &self.lifts[l];
                let zr = &self.transcript.records[idx].point;
                let atilde = centered(&fiber_point(self.n, lift.fiber));
                let (xr, yr) = zr.split_at(self.n);
                let (x, y) = z.split_at(self.n);
                let xpart: f64 = atilde.iter().zip(xr).zip(x).map(|((a, p), q)| a * (p - q)).sum();
                if lift.m * xpart - l1 * dist_inf(yr, y) > self.guard {
                    continue;
                }
                self.force_lift(l)?;
            }
            let rec = &self.transcript.records[idx];
            let g = rec.realized_normal.as_ref().expect("realized");
            let margin = dot(g, &rec.point) - dot(g, z);
            if !(margin > self.guard) {
                return Ok(Some(idx));
            }
        }
        Ok(None)
    }

    /// Answers any query the fiber adversaries accept, at a point of `ℝ^{n+d}`.
    pub fn respond(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
        let (n, d) = (self.n, self.d);
        check_dim(n + d, point.len())?;
        if !all_finite(point) {
            return Err(Error::NonFinite);
        }
        q.validate(n + d)?;
        let kind = self.kind();
        let accepted = match kind {
            "dir" => matches!(q, Query::Inner { .. } | Query::SignInner { .. }),
            _ => matches!(q, Query::Coord { .. } | Query::Bit { .. }),
        };
        if !accepted {
            return Err(Error::UnsupportedQuery { kind: q.kind(), oracle: kind });
        }

        if let Some(g) = self.memo.get(&point_key(point)).cloned() {
            return self.answer_with(point, q, g, "memo".to_string(), Origin::Other);
        }
        let (x, y) = point.split_at(n);
        let class = classify_fiber(x);
        if class == FiberClass::OutsideUnitBox {
            let cell = BoxRegion { center: vec![0.5; n], radius: 0.5 };
            let face = box_face_separator(x, &cell).expect("outside the unit box");
            let g = self.padded(0, &face.normal);
            return self.answer_with(point, q, g, "unit-face".to_string(), Origin::Other);
        }
        if let Some(face) = box_face_separator(y, &BoxRegion { center: vec![0.0; d], radius: self.r }) {
            let g = self.padded(n, &face.normal);
            return self.answer_with(point, q, g, "face".to_string(), Origin::Other);
        }
        match class {
            FiberClass::Fractional => {
                if let Some(idx) = self.guard_violation(point)? {
                    let g = self.transcript.records[idx].realized_normal.clone().expect("realized");
                    return self.answer_with(point, q, g, format!("guard{idx}"), Origin::Guard);
                }
                self.ctx.feasible.push(point.to_vec());
                self.record(point, q, OracleAnswer::Feasible, Some(vec![0.0; n + d]), "fractional".to_string(), Origin::Other)?;
                Ok(OracleAnswer::Feasible)
            }
            FiberClass::Integral(bits) => self.respond_integral(point, q, &bits),
            FiberClass::OutsideUnitBox => unreachable!(),
        }
    }

    fn respond_integral(&mut self, point: &[f64], q: &Query, bits: &[u8]) -> Result<OracleAnswer, Error> {
        let (n, d) = (self.n, self.d);
        let (x, y) = point.split_at(n);
        let f = fiber_index(bits);
        let l1 = self.fibers[f].normal_l1_bound();
        let m = lift_multiplier_bound(x, y, l1, &self.ctx, self.guard)?;
        let atilde = centered(x);

        let inner_q = match q {
            Query::Coord { j } | Query::Bit { j, .. } => Query::Coord { j: j.saturating_sub(n) },
            Query::Inner { v } | Query::SignInner { v } => {
                let vy = &v[n..];
                if vy.iter().all(|c| *c == 0.0) {
                    Query::Inner { v: signed_basis(d, 0, 1.0) }
                } else {
                    Query::Inner { v: vy.to_vec() }
                }
            }
        };
        let inner_answer = self.fibers[f].query(y, &inner_q)?;
        let inner_index = self.fibers[f].transcript().len() - 1;
        let OracleAnswer::Value { value: w } = inner_answer else {
            return Err(Error::Invariant("fiber adversary did not return a value".into()));
        };

        let coord = |j: usize| if j < n { m * atilde[j] } else { w };
        let answer = match q {
            Query::Coord { j } => OracleAnswer::Value { value: coord(*j) },
            // ‖(M·ã, â)‖∞ = M/2 because M/2 > 2R·‖â‖₁ + 1 > ‖â‖∞.
            Query::Bit { i, j } => OracleAnswer::Bit { value: bit_of(coord(*j) / (0.5 * m), *i)? },
            Query::Inner { v } => OracleAnswer::Value { value: dot(&v[..n], &compose(&atilde, m, &[])) + w },
            Query::SignInner { v } => {
                OracleAnswer::Bit { value: u8::from(dot(&v[..n], &compose(&atilde, m, &[])) + w > 0.0) }
            }
        };

        let l = self.lifts.len();
        self.lifts.push(LiftRecord { index: self.transcript.len(), fiber: f, inner_index, m, ctx_len: self.ctx.feasible.len() });
        let fiber_label: String = bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
        let tag = format!("fiber{fiber_label}:{}", self.fibers[f].transcript().records[inner_index].tag);
        self.record(point, q, answer, None, tag, Origin::Lift(l))?;
        self.sync()?;
        Ok(answer)
    }

    /// Resolves every pending record in every fiber.
    pub fn finalize(&mut self) -> Result<(), Error> {
        for f in &mut self.fibers {
            f.finalize()?;
        }
        self.sync()
    }

    /// Queries per fiber before that fiber's own guarantee runs out.
    pub fn per_fiber_floor(&self, rho: f64) -> u64 {
        let (budget, depth) = match self.kind() {
            "dir" => (dir_stage_budget(self.d), dir_depth(self.d, self.r, rho)),
            _ => (bit_level_budget(self.d), bit_depth(self.r, rho)),
        };
        (budget as u64) * u64::from(depth)
    }

    /// Two witness instances sharing every feasible-reported point, with disjoint
    /// `rho`-balls on the least-queried fiber.
    pub fn mixed_witnesses(&mut self, rho: f64) -> Result<(WitnessSet, WitnessSet), Error> {
        let counts = self.fiber_queries();
        let (best, &fewest) = counts
            .iter()
            .enumerate()
            .min_by_key(|(_, c)| **c)
            .expect("at least one fiber");
        if fewest as u64 >= self.per_fiber_floor(rho) {
            return Err(Error::GuaranteeExpired);
        }
        for (f, adv) in self.fibers.iter_mut().enumerate() {
            if f != best {
                adv.finalize()?;
            }
        }
        let (b1, b2) = self.fibers[best].witness_balls(rho)?;
        self.sync()?;
        if self.transcript.pending().next().is_some() {
            return Err(Error::Invariant("lifted record left pending".into()));
        }
        let fiber = fiber_point(self.n, best);
        let make = |ball: InfBall| WitnessSet {
            n: self.n,
            d: self.d,
            generators: self.ctx.feasible.clone(),
            fiber: fiber.clone(),
            ball,
        };
        Ok((make(b1), make(b2)))
    }

    /// Indices of fibers, in order, that carry at least one query.
    pub fn touched_fibers(&self) -> BTreeSet<usize> {
        self.lifts.iter().map(|l| l.fiber).collect()
    }
}

impl<A: ContinuousAdversary> SeparationOracle for MixedAdversary<A> {
    fn dim(&self) -> usize {
        self.n + self.d
    }

    fn query(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
        self.respond(point, q)
    }

    fn queries_made(&self) -> usize {
        self.transcript.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bit_adversary::BitAdversary;
    use crate::geometry::separates_strictly;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_fiber(&[0.0, 1.0]), FiberClass::Integral(vec![0, 1]));
        assert_eq!(classify_fiber(&[0.5, 1.0]), FiberClass::Fractional);
        assert_eq!(classify_fiber(&[-0.2, 0.0]), FiberClass::OutsideUnitBox);
    }

    #[test]
    fn lift_example() {
        let ctx = LiftContext::new(1, 3, 1.0);
        let (g, m) = lift_normal(&[1.0], &[0.0; 3], &[1.0, 0.0, 0.0], &ctx).unwrap();
        assert_eq!(m, 6.0);
        assert_eq!(g, vec![3.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn fiber_numbering() {
        assert_eq!(fiber_point(2, 1), vec![0.0, 1.0]);
        assert_eq!(fiber_index(&[1, 0]), 2);
    }

    fn mixed(n: usize, d: usize) -> MixedAdversary<BitAdversary> {
        MixedAdversary::new(n, d, 1.0, 1e-9, || BitAdversary::new(d, 1.0)).unwrap()
    }

    #[test]
    fn respond_examples() {
        let mut adv = mixed(1, 2);
        assert_eq!(adv.respond(&[0.5, 0.3, -0.2], &Query::Coord { j: 1 }).unwrap(), OracleAnswer::Feasible);
        assert_eq!(adv.respond(&[-1.0, 0.0, 0.0], &Query::Coord { j: 0 }).unwrap(), OracleAnswer::Value { value: -1.0 });
        let p = [1.0, 0.4, 0.4];
        let a = adv.respond(&p, &Query::Coord { j: 2 }).unwrap();
        let inner = adv.fibers()[1].transcript().records.last().unwrap().answer;
        assert_eq!(a, inner);
        let m = adv.lifts()[0].m;
        assert_eq!(adv.respond(&p, &Query::Coord { j: 0 }).unwrap(), OracleAnswer::Value { value: 0.5 * m });
    }

    #[test]
    fn witnesses_without_queries() {
        let mut adv = mixed(1, 2);
        let (w1, w2) = adv.mixed_witnesses(0.01).unwrap();
        assert_eq!(w1.fiber, vec![0.0]);
        assert!(dist_inf(&w1.ball.center, &w2.ball.center) > 0.02);
    }

    #[test]
    fn lifted_records_separate_witnesses() {
        let mut adv = mixed(2, 4);
        let pts = [
            vec![0.5, 0.5, 0.1, 0.2, 0.3, 0.4],
            vec![1.0, 0.0, 0.1, -0.2, 0.3, 0.4],
            vec![0.0, 0.0, -0.5, 0.5, 0.5, 0.5],
            vec![0.25, 1.0, 0.9, 0.9, 0.9, -0.9],
            vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        ];
        for p in &pts {
            for j in 0..6 {
                adv.respond(p, &Query::Coord { j }).unwrap();
            }
        }
        let (w1, w2) = adv.mixed_witnesses(0.01).unwrap();
        for w in [&w1, &w2] {
            for r in &adv.transcript().records {
                let g = r.realized_normal.as_ref().unwrap();
                if r.answer.is_feasible() {
                    assert!(w.contains(&r.point));
                } else {
                    assert!(separates_strictly(g, &r.point, w, 1e-9).unwrap(), "{r:?}");
                }
            }
        }
    }
}
