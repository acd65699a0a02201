//! Independent transcript audit.
//!
//! Only geometry and the oracle contract are used here: the realized normals in
//! a transcript are the claimed first-order map, and each one is checked against
//! its answer and against a candidate instance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bit_adversary::BRUTE_FORCE_MAX_D;
use crate::bounds::{bit_level_budget, survival_bound};
use crate::geometry::{
    dot, norm_inf, norm_l1, orthant_of, separates_strictly, signed_basis, BoxRegion, OrthantLabel,
};
pub use crate::geometry::WitnessSet;
use crate::mixed::{classify_fiber, FiberClass};
use crate::oracle::{evaluate_query, point_key, OracleAnswer, Query, Transcript, TranscriptRecord};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    AnswerMismatch,
    NonSeparating,
    FeasibleOutside,
    PendingUnresolved,
    /// The same point carries two different normals.
    InconsistentMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub record_index: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    fn new(record_index: usize, kind: ViolationKind, detail: String) -> Self {
        Self { record_index, kind, detail }
    }
}

/// Whether `answer` is what `q` returns on normal `g`.
///
/// Coordinate and bit answers must match exactly. Inner-product answers may
/// differ by `tol` times the scale `max(1, ‖v‖₁‖g‖∞)`, and a sign answer is
/// accepted either way when the inner product is within that band of zero:
/// committed normals are orthogonal to queried directions only up to rounding.
pub fn answers_match(q: &Query, g: &[f64], answer: &OracleAnswer, tol: f64) -> bool {
    match evaluate_query(q, g) {
        Ok(a) if a == *answer => return true,
        Ok(_) => {}
        Err(_) => return false,
    }
    let Some(v) = q.direction() else {
        return false;
    };
    let ip = dot(v, g);
    let band = tol * norm_l1(v).max(1.0) * norm_inf(g).max(1.0);
    match (q, answer) {
        (Query::Inner { .. }, OracleAnswer::Value { value }) => (value - ip).abs() <= band,
        (Query::SignInner { .. }, OracleAnswer::Bit { value }) => *value <= 1 && ip.abs() <= band,
        _ => false,
    }
}

/// Checks one record against candidate instance `w`.
pub fn check_record(index: usize, rec: &TranscriptRecord, w: &WitnessSet, tol: f64) -> Result<(), Violation> {
    if rec.point.len() != w.dim() {
        return Err(Violation::new(
            index,
            ViolationKind::NonSeparating,
            format!("point has dimension {}, instance has {}", rec.point.len(), w.dim()),
        ));
    }
    if rec.answer.is_feasible() {
        if let Some(g) = &rec.realized_normal {
            if g.iter().any(|x| *x != 0.0) {
                return Err(Violation::new(index, ViolationKind::AnswerMismatch, "feasible answer with a nonzero normal".into()));
            }
        }
        if !w.contains(&rec.point) {
            return Err(Violation::new(index, ViolationKind::FeasibleOutside, "feasible-reported point outside the instance".into()));
        }
        return Ok(());
    }
    let Some(g) = &rec.realized_normal else {
        return Err(Violation::new(index, ViolationKind::PendingUnresolved, "no realized normal".into()));
    };
    if g.len() != w.dim() || g.iter().all(|x| *x == 0.0) || g.iter().any(|x| !x.is_finite()) {
        return Err(Violation::new(index, ViolationKind::NonSeparating, "zero or malformed normal".into()));
    }
    if !answers_match(&rec.query, g, &rec.answer, tol) {
        let expected = evaluate_query(&rec.query, g).ok();
        return Err(Violation::new(
            index,
            ViolationKind::AnswerMismatch,
            format!("recorded {:?}, normal gives {:?}", rec.answer, expected),
        ));
    }
    match separates_strictly(g, &rec.point, w, tol) {
        Ok(true) => Ok(()),
        Ok(false) => {
            let sup = w.support(g).unwrap_or(f64::NAN);
            Err(Violation::new(
                index,
                ViolationKind::NonSeparating,
                format!("sup over instance {sup} vs {} at the point", dot(g, &rec.point)),
            ))
        }
        Err(e) => Err(Violation::new(index, ViolationKind::NonSeparating, format!("{e}"))),
    }
}

/// Checks every record, plus that repeated points carry one normal.
pub fn check_transcript(t: &Transcript, w: &WitnessSet, tol: f64) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let mut seen: BTreeMap<Vec<u64>, (usize, &[f64])> = BTreeMap::new();
    for (i, rec) in t.records.iter().enumerate() {
        if let Err(v) = check_record(i, rec, w, tol) {
            violations.push(v);
        }
        if let Some(g) = &rec.realized_normal {
            match seen.get(&point_key(&rec.point)) {
                Some((first, h)) if *h != g.as_slice() => violations.push(Violation::new(
                    i,
                    ViolationKind::InconsistentMap,
                    format!("record {first} at the same point carries a different normal"),
                )),
                Some(_) => {}
                None => {
                    seen.insert(point_key(&rec.point), (i, g));
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// True iff no mixed-integer point lies in both instances.
///
/// Every generator must be fractional (so generator hulls add no integral
/// point), both fibers must be 0/1, and the balls must sit on different fibers
/// or be ℓ∞-separated.
pub fn certify_disjoint(w1: &WitnessSet, w2: &WitnessSet) -> Result<bool, Error> {
    if w1.n != w2.n || w1.d != w2.d {
        return Err(Error::DimensionMismatch { expected: w1.dim(), got: w2.dim() });
    }
    let n = w1.n;
    for w in [w1, w2] {
        if w.fiber.len() != n || w.fiber.iter().any(|x| *x != 0.0 && *x != 1.0) {
            return Ok(false);
        }
        if w.generators.iter().any(|g| g.len() != w.dim() || classify_fiber(&g[..n]) != FiberClass::Fractional) {
            return Ok(false);
        }
    }
    if w1.fiber != w2.fiber {
        return Ok(true);
    }
    Ok(crate::geometry::dist_inf(&w1.ball.center, &w2.ball.center) > w1.ball.radius + w2.ball.radius)
}

/// Which level of a coordinate-adversary run to analyze.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelView {
    pub level: u32,
    pub anchor: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalReport {
    pub level: u32,
    pub orthants: u64,
    pub survivors: u64,
    pub eliminated_by_commit: u64,
    pub eliminated_by_zeros: u64,
    /// Records at this level.
    pub level_queries: usize,
    /// Distinct committed normals seen at this level.
    pub commits: usize,
    /// `|J|` for every orthant still answering zeros.
    pub pending_groups: Vec<usize>,
    pub bound: f64,
    pub budget_respected: bool,
    pub bound_holds: bool,
}

/// Brute-force classification of all `2^d` orthants of one level (`d <= 12`).
///
/// An orthant survives if its sub-box `anchor + (2r/3)s ± r/3` is strictly
/// separated from every realized record, and every group of pending zero answers
/// (grouped by orthant) admits some `±e^i`, `i` unqueried, separating all its
/// points from the sub-box.
pub fn survival_report(t: &Transcript, view: &LevelView, tol: f64) -> Result<SurvivalReport, Error> {
    let d = view.anchor.len();
    if d > BRUTE_FORCE_MAX_D {
        return Err(Error::TooLarge(BRUTE_FORCE_MAX_D));
    }
    let universe = BoxRegion { center: view.anchor.clone(), radius: view.radius };
    let records: Vec<&TranscriptRecord> = t.records.iter().filter(|r| r.level == view.level).collect();
    let realized: Vec<&TranscriptRecord> = records
        .iter()
        .copied()
        .filter(|r| !r.answer.is_feasible() && r.realized_normal.is_some())
        .collect();
    let mut groups: BTreeMap<OrthantLabel, (BTreeSet<usize>, Vec<&[f64]>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.realized_normal.is_none()) {
        let entry = groups.entry(orthant_of(&r.point, &view.anchor)).or_default();
        if let Some(j) = r.query.coordinate() {
            entry.0.insert(j);
        }
        entry.1.push(&r.point);
    }
    let commits: BTreeSet<Vec<u64>> = realized
        .iter()
        .filter(|r| r.tag != "face" && r.tag != "memo")
        .map(|r| point_key(r.realized_normal.as_ref().expect("realized")))
        .collect();

    let total = 1u64 << d;
    let (mut by_commit, mut by_zeros) = (0, 0);
    for idx in 0..total {
        let label = OrthantLabel::from_index(d, idx);
        let w = WitnessSet::from_ball(universe.orthant_sub_box(&label).as_ball());
        let cut = |g: &[f64], p: &[f64]| separates_strictly(g, p, &w, tol).unwrap_or(false);
        if !realized.iter().all(|r| cut(r.realized_normal.as_ref().expect("realized"), &r.point)) {
            by_commit += 1;
            continue;
        }
        let explained = groups.iter().all(|(s, (queried, points))| {
            (0..d).filter(|i| !queried.contains(i)).any(|i| {
                let g = signed_basis(d, i, f64::from(s.sign(i)));
                points.iter().all(|p| cut(&g, p))
            })
        });
        if !explained {
            by_zeros += 1;
        }
    }
    let survivors = total - by_commit - by_zeros;
    let bound = survival_bound(d);
    let budget_respected = records.len() <= bit_level_budget(d);
    Ok(SurvivalReport {
        level: view.level,
        orthants: total,
        survivors,
        eliminated_by_commit: by_commit,
        eliminated_by_zeros: by_zeros,
        level_queries: records.len(),
        commits: commits.len(),
        pending_groups: groups.values().map(|(j, _)| j.len()).collect(),
        bound,
        budget_respected,
        bound_holds: !budget_respected || survivors as f64 >= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::InfBall;
    use alloc::string::ToString;
    use alloc::vec;

    fn rec(point: Vec<f64>, q: Query, answer: OracleAnswer, g: Option<Vec<f64>>) -> TranscriptRecord {
        TranscriptRecord { point, query: q, answer, realized_normal: g, level: 0, tag: "t".to_string() }
    }

    fn ball_w() -> WitnessSet {
        WitnessSet::from_ball(InfBall::new(vec![-1.0, 0.0], 0.5).unwrap())
    }

    #[test]
    fn record_examples() {
        let w = WitnessSet {
            n: 0,
            d: 2,
            generators: vec![vec![0.3, 0.3]],
            fiber: vec![],
            ball: InfBall::new(vec![0.0, 0.0], 0.1).unwrap(),
        };
        let r = rec(vec![0.3, 0.3], Query::Coord { j: 0 }, OracleAnswer::Feasible, Some(vec![0.0, 0.0]));
        assert!(check_record(0, &r, &w, 1e-9).is_ok());

        let e1 = vec![1.0, 0.0];
        let r = rec(vec![1.0, 0.0], Query::Coord { j: 0 }, OracleAnswer::Value { value: 1.0 }, Some(e1.clone()));
        assert!(check_record(0, &r, &ball_w(), 1e-9).is_ok());
        let r = rec(vec![-2.0, 0.0], Query::Coord { j: 0 }, OracleAnswer::Value { value: 1.0 }, Some(e1));
        assert_eq!(check_record(0, &r, &ball_w(), 1e-9).unwrap_err().kind, ViolationKind::NonSeparating);
    }

    #[test]
    fn pending_and_mismatch() {
        let r = rec(vec![1.0, 0.0], Query::Coord { j: 0 }, OracleAnswer::Value { value: 0.0 }, None);
        assert_eq!(check_record(3, &r, &ball_w(), 1e-9).unwrap_err().kind, ViolationKind::PendingUnresolved);
        let r = rec(vec![1.0, 0.0], Query::Coord { j: 0 }, OracleAnswer::Value { value: 2.0 }, Some(vec![1.0, 0.0]));
        let v = check_record(3, &r, &ball_w(), 1e-9).unwrap_err();
        assert_eq!((v.record_index, v.kind), (3, ViolationKind::AnswerMismatch));
    }

    #[test]
    fn empty_transcript_is_fine() {
        assert!(check_transcript(&Transcript::new(2), &ball_w(), 1e-9).is_ok());
    }

    #[test]
    fn inconsistent_map_is_flagged() {
        let mut t = Transcript::new(2);
        let p = vec![1.0, 0.0];
        t.push(rec(p.clone(), Query::Coord { j: 0 }, OracleAnswer::Value { value: 1.0 }, Some(vec![1.0, 0.0]))).unwrap();
        t.push(rec(p, Query::Coord { j: 0 }, OracleAnswer::Value { value: 2.0 }, Some(vec![2.0, 0.0]))).unwrap();
        let v = check_transcript(&t, &ball_w(), 1e-9).unwrap_err();
        assert_eq!(v[0].kind, ViolationKind::InconsistentMap);
        assert_eq!(v[0].record_index, 1);
    }

    #[test]
    fn disjointness_examples() {
        let b = |c: f64, f: f64| WitnessSet {
            n: 1,
            d: 1,
            generators: vec![vec![0.5, 0.0]],
            fiber: vec![f],
            ball: InfBall::new(vec![c], 0.1).unwrap(),
        };
        assert!(certify_disjoint(&b(0.0, 0.0), &b(0.5, 0.0)).unwrap());
        assert!(!certify_disjoint(&b(0.0, 0.0), &b(0.0, 0.0)).unwrap());
        assert!(certify_disjoint(&b(0.0, 0.0), &b(0.0, 1.0)).unwrap());
        let mut bad = b(0.5, 0.0);
        bad.generators.push(vec![1.0, 0.0]);
        assert!(!certify_disjoint(&b(0.0, 0.0), &bad).unwrap());
    }

    #[test]
    fn sign_answers_tolerate_rounding() {
        let q = Query::SignInner { v: vec![1.0, 0.0] };
        assert!(answers_match(&q, &[1e-17, 1.0], &OracleAnswer::Bit { value: 0 }, 1e-9));
        assert!(!answers_match(&q, &[1e-3, 1.0], &OracleAnswer::Bit { value: 0 }, 1e-9));
    }
}
