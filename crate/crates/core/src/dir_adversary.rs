//! Batch-nullspace adversary for inner-product queries.
//!
//! Queries are answered with zero and buffered. When the buffer holds
//! `⌊(d − k)/2⌋` queries, a unit normal orthogonal to the point differences, the
//! queried directions and the `k` earlier normals is committed, which makes every
//! buffered zero exact. Each commit leaves an open slab (split set) of feasible
//! candidates; after `⌈d²/8⌉` queries the stage ends and the game restarts in a
//! cube of side `1/(3d)` times smaller sitting inside every slab.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bit_adversary::split_region;
use crate::bounds::{dir_capacity, dir_stage_budget};
use crate::geometry::{
    all_finite, box_face_separator, check_dim, dot, sub, BoxRegion, InfBall, Normal, Point,
};
use crate::linalg::null_vector;
use crate::oracle::{
    evaluate_query, point_key, OracleAnswer, Query, SeparationOracle, Transcript, TranscriptRecord,
};
use crate::{ContinuousAdversary, Error};

/// Corner enumeration limit for the cube containment check.
pub const CORNER_CHECK_MAX_D: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageState {
    pub anchor: Point,
    pub radius: f64,
    /// Pairwise orthogonal unit normals committed at this stage.
    pub committed: Vec<Normal>,
    pub batch_points: Vec<Point>,
    pub batch_dirs: Vec<Vec<f64>>,
    pub batch_records: Vec<usize>,
    pub queries: usize,
}

impl StageState {
    fn fresh(anchor: Point, radius: f64) -> Self {
        Self {
            anchor,
            radius,
            committed: Vec::new(),
            batch_points: Vec::new(),
            batch_dirs: Vec::new(),
            batch_records: Vec::new(),
            queries: 0,
        }
    }

    pub fn universe(&self) -> BoxRegion {
        BoxRegion { center: self.anchor.clone(), radius: self.radius }
    }

    pub fn capacity(&self) -> usize {
        dir_capacity(self.anchor.len(), self.committed.len())
    }

    pub fn split_sets(&self) -> Vec<SplitSet> {
        let w = self.radius / libm::sqrt(self.anchor.len() as f64);
        self.committed
            .iter()
            .map(|a| SplitSet { normal: a.clone(), width: w, anchor: self.anchor.clone() })
            .collect()
    }
}

/// Open slab `{y : −width < ⟨normal, y − anchor⟩ < 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSet {
    pub normal: Normal,
    pub width: f64,
    pub anchor: Point,
}

impl SplitSet {
    pub fn offset(&self, y: &[f64]) -> f64 {
        dot(&self.normal, &sub(y, &self.anchor))
    }

    /// Strict membership with margin `tol` on both sides.
    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        let t = self.offset(y);
        -self.width + tol < t && t < -tol
    }
}

/// Per-stage summary kept after the stage ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: u32,
    pub anchor: Point,
    pub radius: f64,
    pub committed: Vec<Normal>,
    pub queries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirSnapshot {
    pub d: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub stage: u32,
    pub budget: usize,
    pub state: StageState,
    pub cube_center: Point,
    pub cube_radius: f64,
    pub history: Vec<StageSummary>,
}

#[derive(Debug, Clone)]
pub struct DirAdversary {
    d: usize,
    r: f64,
    tol: f64,
    stage: u32,
    state: StageState,
    history: Vec<StageSummary>,
    transcript: Transcript,
    memo: BTreeMap<Vec<u64>, Normal>,
}

/// Unit vector orthogonal to `constraints`, signed so that `⟨a, offset⟩ >= 0`.
pub fn orthogonal_commit(constraints: &[Vec<f64>], offset: &[f64]) -> Result<Normal, Error> {
    let d = offset.len();
    if constraints.len() > d.saturating_sub(1) {
        return Err(Error::Precondition(format!("{} constraints leave no room in dimension {d}", constraints.len())));
    }
    let mut a = null_vector(constraints, d).ok_or(Error::EmptyNullspace)?;
    if dot(&a, offset) < 0.0 {
        a.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(a)
}

impl DirAdversary {
    pub fn new(d: usize, r: f64, tol: f64) -> Result<Self, Error> {
        if d < 2 {
            return Err(Error::Precondition("the inner-product adversary needs d >= 2".into()));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Precondition("R must be positive and finite".into()));
        }
        if !(tol >= 0.0) {
            return Err(Error::Precondition("tolerance must be nonnegative".into()));
        }
        Ok(Self {
            d,
            r,
            tol,
            stage: 0,
            state: StageState::fresh(vec![0.0; d], r),
            history: Vec::new(),
            transcript: Transcript::new(d),
            memo: BTreeMap::new(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn state(&self) -> &StageState {
        &self.state
    }

    pub fn history(&self) -> &[StageSummary] {
        &self.history
    }

    pub fn budget(&self) -> usize {
        dir_stage_budget(self.d)
    }

    pub fn current_box(&self) -> BoxRegion {
        self.state.universe()
    }

    pub fn snapshot(&self) -> DirSnapshot {
        let (u, q) = self.cube_unchecked();
        DirSnapshot {
            d: self.d,
            r: self.r,
            stage: self.stage,
            budget: self.budget(),
            state: self.state.clone(),
            cube_center: u,
            cube_radius: q,
            history: self.history.clone(),
        }
    }

    /// Answers an `Inner` or `SignInner` query at `point`.
    pub fn respond(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
        check_dim(self.d, point.len())?;
        if !all_finite(point) {
            return Err(Error::NonFinite);
        }
        let Some(v) = q.direction() else {
            return Err(Error::UnsupportedQuery { kind: q.kind(), oracle: "dir" });
        };
        q.validate(self.d)?;
        if self.state.queries >= self.budget() || self.state.capacity() == 0 {
            self.descend()?;
        }

        if let Some(normal) = self.memo.get(&point_key(point)).cloned() {
            return self.answer_realized(point, q, normal, "memo".to_string());
        }
        if let Some(face) = box_face_separator(point, &self.state.universe()) {
            return self.answer_realized(point, q, face.normal, "face".to_string());
        }
        let width = self.state.radius / libm::sqrt(self.d as f64);
        let violation = self.state.committed.iter().enumerate().find_map(|(k, a)| {
            let t = dot(a, &sub(point, &self.state.anchor));
            if t >= -self.tol {
                Some((k, a.clone(), '+'))
            } else if t <= -width + self.tol {
                Some((k, a.iter().map(|x| -x).collect(), '-'))
            } else {
                None
            }
        });
        if let Some((k, normal, s)) = violation {
            return self.answer_realized(point, q, normal, format!("split{k}{s}"));
        }

        let answer = q.zero_answer();
        let index = self.transcript.push(TranscriptRecord {
            point: point.to_vec(),
            query: q.clone(),
            answer,
            realized_normal: None,
            level: self.stage,
            tag: "batch".to_string(),
        })?;
        self.state.batch_points.push(point.to_vec());
        self.state.batch_dirs.push(v.to_vec());
        self.state.batch_records.push(index);
        self.state.queries += 1;
        if self.state.batch_points.len() >= self.state.capacity() {
            self.commit_batch()?;
        }
        Ok(answer)
    }

    fn answer_realized(&mut self, point: &[f64], q: &Query, normal: Normal, tag: String) -> Result<OracleAnswer, Error> {
        let answer = evaluate_query(q, &normal)?;
        self.transcript.push(TranscriptRecord {
            point: point.to_vec(),
            query: q.clone(),
            answer,
            realized_normal: Some(normal.clone()),
            level: self.stage,
            tag,
        })?;
        self.memo.insert(point_key(point), normal);
        self.state.queries += 1;
        Ok(answer)
    }

    /// Commits a normal for the buffered queries and realizes their records.
    pub fn commit_batch(&mut self) -> Result<Normal, Error> {
        let Some(first) = self.state.batch_points.first().cloned() else {
            return Err(Error::Precondition("empty batch".into()));
        };
        let mut constraints: Vec<Vec<f64>> =
            self.state.batch_points.iter().skip(1).map(|y| sub(y, &first)).collect();
        constraints.extend(self.state.batch_dirs.iter().cloned());
        constraints.extend(self.state.committed.iter().cloned());
        let a = orthogonal_commit(&constraints, &sub(&first, &self.state.anchor))?;
        for index in core::mem::take(&mut self.state.batch_records) {
            self.transcript.resolve(index, a.clone())?;
            let key = point_key(&self.transcript.records[index].point);
            self.memo.insert(key, a.clone());
        }
        self.state.batch_points.clear();
        self.state.batch_dirs.clear();
        self.state.committed.push(a.clone());
        Ok(a)
    }

    fn flush(&mut self) -> Result<(), Error> {
        if !self.state.batch_points.is_empty() {
            self.commit_batch()?;
        }
        Ok(())
    }

    fn cube_unchecked(&self) -> (Point, f64) {
        let s = &self.state;
        let shift = s.radius / (2.0 * libm::sqrt(self.d as f64));
        let mut u = s.anchor.clone();
        for a in &s.committed {
            for (ui, ai) in u.iter_mut().zip(a) {
                *ui -= shift * ai;
            }
        }
        (u, s.radius / (3.0 * self.d as f64))
    }

    /// Cube `Q` centered at `u = anchor − (R_s/(2√d))·Σ a^k` with half-width `R_s/(3d)`.
    ///
    /// Checks that `Q` sits strictly inside every split set and the stage box,
    /// by corner enumeration for `d <= 12`. Only committed normals count, so a
    /// partially filled batch should be flushed first.
    pub fn stage_cube(&self) -> Result<(Point, BoxRegion), Error> {
        let (u, qr) = self.cube_unchecked();
        let cube = BoxRegion { center: u.clone(), radius: qr };
        let splits = self.state.split_sets();
        let universe = self.state.universe();
        if self.d <= CORNER_CHECK_MAX_D {
            for c in cube.as_ball().corners() {
                if !universe.contains(&c) {
                    return Err(Error::Invariant("stage cube leaves the stage box".into()));
                }
                if let Some(k) = splits.iter().position(|p| !p.contains(&c, 0.0)) {
                    return Err(Error::Invariant(format!("stage cube leaves split set {k}")));
                }
            }
        } else {
            // ‖corner − u‖₂ = R_s√d/(3d) < R_s/(2√d), and every split set contains
            // the Euclidean ball of that radius around u.
            let corner_dist = self.state.radius * libm::sqrt(self.d as f64) / (3.0 * self.d as f64);
            let ball = self.state.radius / (2.0 * libm::sqrt(self.d as f64));
            if !(corner_dist < ball) {
                return Err(Error::Invariant("stage cube norm bound fails".into()));
            }
        }
        Ok((u, cube))
    }

    /// Ends the stage and restarts inside the stage cube.
    pub fn descend(&mut self) -> Result<&StageState, Error> {
        self.flush()?;
        let (u, cube) = self.stage_cube()?;
        self.history.push(StageSummary {
            stage: self.stage,
            anchor: self.state.anchor.clone(),
            radius: self.state.radius,
            committed: self.state.committed.clone(),
            queries: self.state.queries,
        });
        self.state = StageState::fresh(u, cube.radius);
        self.stage += 1;
        Ok(&self.state)
    }
}

impl SeparationOracle for DirAdversary {
    fn dim(&self) -> usize {
        self.d
    }

    fn query(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
        self.respond(point, q)
    }

    fn queries_made(&self) -> usize {
        self.transcript.len()
    }
}

impl ContinuousAdversary for DirAdversary {
    fn kind(&self) -> &'static str {
        "dir"
    }

    fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    fn normal_l1_bound(&self) -> f64 {
        libm::sqrt(self.d as f64)
    }

    fn force_resolve(&mut self, index: usize) -> Result<(), Error> {
        let rec = self.transcript.get(index).ok_or(Error::IndexOutOfRange { index, dim: self.transcript.len() })?;
        if rec.realized_normal.is_some() {
            return Ok(());
        }
        if !self.state.batch_records.contains(&index) {
            return Err(Error::Invariant("pending record outside the current batch".into()));
        }
        self.commit_batch().map(|_| ())
    }

    fn finalize(&mut self) -> Result<(), Error> {
        self.flush()
    }

    fn witness_balls(&mut self, rho: f64) -> Result<(InfBall, InfBall), Error> {
        self.flush()?;
        let (_, cube) = self.stage_cube()?;
        split_region(&cube, rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm_l2;

    fn inner(v: Vec<f64>) -> Query {
        Query::Inner { v }
    }

    fn e(d: usize, i: usize) -> Vec<f64> {
        crate::geometry::signed_basis(d, i, 1.0)
    }

    #[test]
    fn hand_traced_stage() {
        let mut adv = DirAdversary::new(4, 1.0, 1e-9).unwrap();
        assert_eq!(adv.respond(&[0.0; 4], &inner(e(4, 0))).unwrap(), OracleAnswer::Value { value: 0.0 });
        assert_eq!(adv.state().batch_points.len(), 1);
        assert_eq!(adv.state().capacity(), 2);
        adv.respond(&[0.0, 1.0, 0.0, 0.0], &inner(e(4, 1))).unwrap();
        assert_eq!(adv.state().committed, vec![e(4, 2)]);
        for r in &adv.transcript().records {
            assert_eq!(r.realized_normal.as_ref(), Some(&e(4, 2)));
        }
        // Outside the split set: ⟨e³, y⟩ = −R < −R/√4.
        let ans = adv.respond(&[0.0, 0.0, -1.0, 0.0], &inner(e(4, 2))).unwrap();
        assert_eq!(ans, OracleAnswer::Value { value: -1.0 });
        assert_eq!(adv.transcript().records[2].realized_normal, Some(vec![0.0, 0.0, -1.0, 0.0]));
    }

    #[test]
    fn commit_sign_rule() {
        let a = orthogonal_commit(&[e(2, 0)], &[0.0, 0.0]).unwrap();
        assert!(a == e(2, 1) || a == vec![0.0, -1.0]);
        let a = orthogonal_commit(&[e(3, 0), e(3, 1)], &[0.0, 0.0, -1.0]).unwrap();
        assert_eq!(a, vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn cube_examples() {
        let adv = DirAdversary::new(4, 1.0, 1e-9).unwrap();
        let (u, q) = adv.stage_cube().unwrap();
        assert_eq!(u, vec![0.0; 4]);
        assert_eq!(q.radius, 1.0 / 12.0);

        let mut adv = DirAdversary::new(4, 1.0, 1e-9).unwrap();
        adv.respond(&[0.0; 4], &inner(e(4, 0))).unwrap();
        adv.respond(&[0.0, 1.0, 0.0, 0.0], &inner(e(4, 1))).unwrap();
        let (u, q) = adv.stage_cube().unwrap();
        // Middle of the split set (−R/√d, 0) along e³.
        assert_eq!(u, vec![0.0, 0.0, -0.25, 0.0]);
        assert_eq!(q.radius, 1.0 / 12.0);
        for c in q.as_ball().corners() {
            assert!(-0.5 < c[2] && c[2] < 0.0);
        }
        // ‖u − anchor‖₂ + R/(2√d) <= R
        assert!(norm_l2(&u) + 0.25 <= 1.0);
    }

    #[test]
    fn descend_scales_by_three_d() {
        let mut adv = DirAdversary::new(4, 1.0, 1e-9).unwrap();
        adv.descend().unwrap();
        assert_eq!(adv.state().radius, 1.0 / 12.0);
        adv.descend().unwrap();
        assert!((adv.state().radius - 1.0 / 144.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_dimension_and_coord_queries() {
        assert!(DirAdversary::new(1, 1.0, 1e-9).is_err());
        let mut adv = DirAdversary::new(2, 1.0, 1e-9).unwrap();
        assert!(matches!(adv.respond(&[0.0, 0.0], &Query::Coord { j: 0 }), Err(Error::UnsupportedQuery { .. })));
    }
}
