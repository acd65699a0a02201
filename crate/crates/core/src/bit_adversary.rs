//! Orthant-commitment adversary for coordinate and bit queries.
//!
//! Every orthant of the current box (relative to its center) answers zero until
//! it has absorbed `t = max(1, ⌈d/4⌉)` queries, then commits to a signed basis
//! vector `s_i e^i` with `i` outside both its queried coordinates and the
//! coordinates already used at this level. After `⌈d²/16⌉` queries the level
//! ends and the game restarts inside a surviving orthant at a third of the size.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bounds::{bit_level_budget, commit_threshold};
use crate::geometry::{
    all_finite, box_face_separator, check_dim, orthant_of, signed_basis, BoxRegion, InfBall, Normal,
    OrthantLabel,
};
use crate::oracle::{
    evaluate_query, point_key, OracleAnswer, Query, SeparationOracle, Transcript, TranscriptRecord,
};
use crate::{ContinuousAdversary, Error};

/// Largest dimension for brute-force orthant enumeration.
pub const BRUTE_FORCE_MAX_D: usize = 12;

/// Bookkeeping for one orthant at the current level.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OrthantState {
    /// Coordinates answered with zero before the commit (the set `J`).
    pub queried: BTreeSet<usize>,
    /// `(i, s)` once the orthant answers with `s·e^i`.
    pub commit: Option<(usize, i8)>,
    pub count: usize,
    /// Transcript indices still waiting for this orthant's normal.
    pub pending: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelState {
    pub anchor: Vec<f64>,
    pub radius: f64,
    pub orthants: BTreeMap<OrthantLabel, OrthantState>,
    /// Coordinates committed at this level (the set `E`).
    pub used: BTreeSet<usize>,
    pub queries: usize,
}

impl LevelState {
    fn fresh(anchor: Vec<f64>, radius: f64) -> Self {
        Self { anchor, radius, orthants: BTreeMap::new(), used: BTreeSet::new(), queries: 0 }
    }

    pub fn universe(&self) -> BoxRegion {
        BoxRegion { center: self.anchor.clone(), radius: self.radius }
    }
}

/// One orthant's commitment `s·e^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub orthant: OrthantLabel,
    pub coordinate: usize,
    pub sign: i8,
    pub level: u32,
    /// `false` for regular commits, `true` when pending zeros were settled at the
    /// end of a level or on demand.
    pub settled: bool,
}

/// Serializable view of the adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitSnapshot {
    pub d: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub level: u32,
    pub budget: usize,
    pub commit_threshold: usize,
    pub state: LevelState,
    pub commits: Vec<CommitRecord>,
}

#[derive(Debug, Clone)]
pub struct BitAdversary {
    d: usize,
    r: f64,
    level: u32,
    state: LevelState,
    commits: Vec<CommitRecord>,
    transcript: Transcript,
    memo: BTreeMap<Vec<u64>, Normal>,
}

/// The combinatorial survival test for orthant `s_hat` at one level.
struct SurvivalConstraints {
    fixed: Vec<Option<i8>>,
    groups: Vec<(Vec<i8>, BTreeSet<usize>)>,
}

impl SurvivalConstraints {
    fn from_state(d: usize, state: &LevelState) -> Self {
        let mut fixed = alloc::vec![None; d];
        let mut groups = Vec::new();
        for (label, o) in &state.orthants {
            match o.commit {
                // A commit `s·e^i` cuts off every orthant whose i-th sign is `s`.
                Some((i, s)) => fixed[i] = Some(-s),
                None if o.count > 0 => groups.push((label.signs().to_vec(), o.queried.clone())),
                None => {}
            }
        }
        Self { fixed, groups }
    }

    fn admits(&self, s_hat: &[i8]) -> bool {
        self.fixed.iter().zip(s_hat).all(|(f, s)| f.is_none_or(|f| f == *s))
            && self
                .groups
                .iter()
                .all(|(s, j)| (0..s.len()).any(|i| !j.contains(&i) && s_hat[i] == -s[i]))
    }

    /// Lexicographically first admitted sign vector, by depth-first search with pruning.
    fn first(&self, d: usize) -> Option<Vec<i8>> {
        let mut s_hat = alloc::vec![0i8; d];
        if self.search(0, &mut s_hat) {
            Some(s_hat)
        } else {
            None
        }
    }

    fn search(&self, idx: usize, s_hat: &mut Vec<i8>) -> bool {
        let d = s_hat.len();
        if idx == d {
            return self.admits(s_hat);
        }
        for choice in [-1i8, 1] {
            if self.fixed[idx].is_some_and(|f| f != choice) {
                continue;
            }
            s_hat[idx] = choice;
            if self.still_possible(idx + 1, s_hat) && self.search(idx + 1, s_hat) {
                return true;
            }
        }
        false
    }

    fn still_possible(&self, assigned: usize, s_hat: &[i8]) -> bool {
        self.groups.iter().all(|(s, j)| {
            (0..s.len()).any(|i| {
                if j.contains(&i) {
                    return false;
                }
                if i < assigned {
                    s_hat[i] == -s[i]
                } else {
                    self.fixed[i].is_none_or(|f| f == -s[i])
                }
            })
        })
    }
}

impl BitAdversary {
    pub fn new(d: usize, r: f64) -> Result<Self, Error> {
        if d == 0 {
            return Err(Error::Precondition("dimension must be at least 1".into()));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Precondition("R must be positive and finite".into()));
        }
        Ok(Self {
            d,
            r,
            level: 0,
            state: LevelState::fresh(alloc::vec![0.0; d], r),
            commits: Vec::new(),
            transcript: Transcript::new(d),
            memo: BTreeMap::new(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn state(&self) -> &LevelState {
        &self.state
    }

    pub fn commits(&self) -> &[CommitRecord] {
        &self.commits
    }

    pub fn budget(&self) -> usize {
        bit_level_budget(self.d)
    }

    pub fn current_box(&self) -> BoxRegion {
        self.state.universe()
    }

    pub fn snapshot(&self) -> BitSnapshot {
        BitSnapshot {
            d: self.d,
            r: self.r,
            level: self.level,
            budget: self.budget(),
            commit_threshold: commit_threshold(self.d),
            state: self.state.clone(),
            commits: self.commits.clone(),
        }
    }

    /// Answers a `Coord` or `Bit` query at `point`.
    pub fn respond(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
        check_dim(self.d, point.len())?;
        if !all_finite(point) {
            return Err(Error::NonFinite);
        }
        if !matches!(q, Query::Coord { .. } | Query::Bit { .. }) {
            return Err(Error::UnsupportedQuery { kind: q.kind(), oracle: "bit" });
        }
        q.validate(self.d)?;
        if self.state.queries >= self.budget() {
            self.descend()?;
        }

        let key = point_key(point);
        if let Some(normal) = self.memo.get(&key).cloned() {
            return self.answer_realized(point, q, normal, "memo".to_string());
        }
        if let Some(face) = box_face_separator(point, &self.state.universe()) {
            return self.answer_realized(point, q, face.normal, "face".to_string());
        }

        let label = orthant_of(point, &self.state.anchor);
        let tag = label.to_string();
        let entry = self.state.orthants.entry(label.clone()).or_default();
        if let Some((i, s)) = entry.commit {
            let normal = signed_basis(self.d, i, f64::from(s));
            return self.answer_realized(point, q, normal, tag);
        }

        let j = q.coordinate().expect("coordinate query");
        if entry.count + 1 < commit_threshold(self.d) {
            let answer = q.zero_answer();
            let index = self.push(point, q, answer, None, tag)?;
            let entry = self.state.orthants.get_mut(&label).expect("entry exists");
            entry.queried.insert(j);
            entry.count += 1;
            entry.pending.push(index);
            self.state.queries += 1;
            return Ok(answer);
        }

        // Commit on the t-th query of this orthant.
        let i = (0..self.d)
            .find(|i| !entry.queried.contains(i) && !self.state.used.contains(i))
            .ok_or(Error::BudgetExceeded)?;
        let s = label.sign(i);
        let normal = signed_basis(self.d, i, f64::from(s));
        let answer = evaluate_query(q, &normal)?;
        self.push(point, q, answer, Some(normal.clone()), tag)?;
        self.memo.insert(key, normal);
        let entry = self.state.orthants.get_mut(&label).expect("entry exists");
        entry.count += 1;
        self.commit_group(&label, i, s, false)?;
        self.state.queries += 1;
        Ok(answer)
    }

    fn push(
        &mut self,
        point: &[f64],
        q: &Query,
        answer: OracleAnswer,
        realized_normal: Option<Normal>,
        tag: alloc::string::String,
    ) -> Result<usize, Error> {
        self.transcript.push(TranscriptRecord {
            point: point.to_vec(),
            query: q.clone(),
            answer,
            realized_normal,
            level: self.level,
            tag,
        })
    }

    fn answer_realized(
        &mut self,
        point: &[f64],
        q: &Query,
        normal: Normal,
        tag: alloc::string::String,
    ) -> Result<OracleAnswer, Error> {
        let answer = evaluate_query(q, &normal)?;
        self.push(point, q, answer, Some(normal.clone()), tag)?;
        self.memo.insert(point_key(point), normal);
        self.state.queries += 1;
        Ok(answer)
    }

    /// Marks `label` as committed to `s·e^i` and realizes its pending records.
    fn commit_group(&mut self, label: &OrthantLabel, i: usize, s: i8, settled: bool) -> Result<(), Error> {
        let normal = signed_basis(self.d, i, f64::from(s));
        let entry = self.state.orthants.get_mut(label).expect("entry exists");
        entry.commit = Some((i, s));
        let pending = core::mem::take(&mut entry.pending);
        self.state.used.insert(i);
        for index in pending {
            self.transcript.resolve(index, normal.clone())?;
            let key = point_key(&self.transcript.records[index].point);
            self.memo.insert(key, normal.clone());
        }
        self.commits.push(CommitRecord { orthant: label.clone(), coordinate: i, sign: s, level: self.level, settled });
        Ok(())
    }

    /// Lexicographically first orthant consistent with every answer at this level.
    pub fn lex_first_survivor(&self) -> Result<OrthantLabel, Error> {
        let c = SurvivalConstraints::from_state(self.d, &self.state);
        let signs = c.first(self.d).ok_or(Error::NoSurvivor)?;
        OrthantLabel::new(signs)
    }

    /// Number of orthants still consistent with this level's answers (`d <= 12`).
    pub fn count_surviving_orthants(&self) -> Result<u64, Error> {
        if self.d > BRUTE_FORCE_MAX_D {
            return Err(Error::TooLarge(BRUTE_FORCE_MAX_D));
        }
        let c = SurvivalConstraints::from_state(self.d, &self.state);
        Ok((0..1u64 << self.d)
            .filter(|idx| c.admits(OrthantLabel::from_index(self.d, *idx).signs()))
            .count() as u64)
    }

    /// Settles one uncommitted orthant against `survivor`.
    fn settle(&mut self, label: &OrthantLabel, survivor: &OrthantLabel) -> Result<(), Error> {
        let entry = &self.state.orthants[label];
        if entry.commit.is_some() || entry.count == 0 {
            return Ok(());
        }
        let i = (0..self.d)
            .find(|i| !entry.queried.contains(i) && survivor.sign(*i) != label.sign(*i))
            .ok_or_else(|| Error::Invariant("survivor violates a pending orthant".into()))?;
        self.commit_group(label, i, label.sign(i), true)
    }

    fn settle_all(&mut self) -> Result<OrthantLabel, Error> {
        let survivor = self.lex_first_survivor()?;
        let labels: Vec<OrthantLabel> = self.state.orthants.keys().cloned().collect();
        for label in labels {
            self.settle(&label, &survivor)?;
        }
        Ok(survivor)
    }

    /// Ends the level: settles pending orthants and moves into the survivor's sub-box.
    pub fn descend(&mut self) -> Result<&LevelState, Error> {
        let survivor = self.settle_all()?;
        let sub = self.state.universe().orthant_sub_box(&survivor);
        self.state = LevelState::fresh(sub.center, sub.radius);
        self.level += 1;
        Ok(&self.state)
    }

    /// Region the witnesses are placed in: the whole box before any query at this
    /// level, otherwise the survivor's sub-box.
    fn witness_region(&mut self) -> Result<BoxRegion, Error> {
        if self.state.queries == 0 {
            return Ok(self.state.universe());
        }
        let survivor = self.settle_all()?;
        Ok(self.state.universe().orthant_sub_box(&survivor))
    }
}

/// Two disjoint `rho`-balls at `c ∓ (r/2)e^0` inside region `(c, r)`.
pub(crate) fn split_region(region: &BoxRegion, rho: f64) -> Result<(InfBall, InfBall), Error> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Precondition("rho must be nonnegative and finite".into()));
    }
    if rho >= region.radius / 2.0 {
        return Err(Error::FatnessTooLarge);
    }
    let mut a = region.center.clone();
    let mut b = region.center.clone();
    a[0] -= region.radius / 2.0;
    b[0] += region.radius / 2.0;
    Ok((InfBall { center: a, radius: rho }, InfBall { center: b, radius: rho }))
}

impl SeparationOracle for BitAdversary {
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

impl ContinuousAdversary for BitAdversary {
    fn kind(&self) -> &'static str {
        "bit"
    }

    fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    fn normal_l1_bound(&self) -> f64 {
        1.0
    }

    fn force_resolve(&mut self, index: usize) -> Result<(), Error> {
        let rec = self.transcript.get(index).ok_or(Error::IndexOutOfRange { index, dim: self.transcript.len() })?;
        if rec.realized_normal.is_some() {
            return Ok(());
        }
        let label = self
            .state
            .orthants
            .iter()
            .find(|(_, o)| o.pending.contains(&index))
            .map(|(l, _)| l.clone())
            .ok_or_else(|| Error::Invariant("pending record outside the current level".into()))?;
        let survivor = self.lex_first_survivor()?;
        self.settle(&label, &survivor)
    }

    fn finalize(&mut self) -> Result<(), Error> {
        self.settle_all().map(|_| ())
    }

    fn witness_balls(&mut self, rho: f64) -> Result<(InfBall, InfBall), Error> {
        if rho >= self.r / 2.0 {
            return Err(Error::FatnessTooLarge);
        }
        let region = self.witness_region()?;
        split_region(&region, rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{separates_strictly, WitnessSet};
    use alloc::vec;

    fn coord(j: usize) -> Query {
        Query::Coord { j }
    }

    #[test]
    fn hand_traced_commit() {
        let mut adv = BitAdversary::new(8, 2.0).unwrap();
        let ones = vec![1.0; 8];
        // 0-based: coordinate 2 is the third coordinate.
        assert_eq!(adv.respond(&ones, &coord(2)).unwrap(), OracleAnswer::Value { value: 0.0 });
        let plus = OrthantLabel::new(vec![1; 8]).unwrap();
        assert_eq!(adv.state().orthants[&plus].queried, [2].into_iter().collect());
        assert_eq!(adv.respond(&ones, &coord(4)).unwrap(), OracleAnswer::Value { value: 0.0 });
        assert_eq!(adv.state().orthants[&plus].commit, Some((0, 1)));
        let e0 = signed_basis(8, 0, 1.0);
        for r in &adv.transcript().records {
            assert_eq!(r.realized_normal.as_ref(), Some(&e0));
        }
        assert_eq!(adv.respond(&[2.0; 8], &coord(0)).unwrap(), OracleAnswer::Value { value: 1.0 });
    }

    #[test]
    fn descend_examples() {
        let mut adv = BitAdversary::new(8, 1.0).unwrap();
        adv.descend().unwrap();
        assert_eq!(adv.state().anchor, vec![-2.0 / 3.0; 8]);
        assert_eq!(adv.state().radius, 1.0 / 3.0);
        adv.descend().unwrap();
        assert!((adv.state().radius - 1.0 / 9.0).abs() < 1e-15);
        assert!((adv.state().anchor[0] - (-2.0 / 3.0 - 2.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn committed_normals_survive_descent() {
        let mut adv = BitAdversary::new(8, 1.0).unwrap();
        let p = vec![0.5; 8];
        for j in 0..4 {
            adv.respond(&p, &coord(j)).unwrap();
        }
        adv.descend().unwrap();
        let w = WitnessSet::from_ball(adv.current_box().as_ball());
        for r in &adv.transcript().records {
            let a = r.realized_normal.as_ref().unwrap();
            assert!(separates_strictly(a, &r.point, &w, 1e-9).unwrap());
        }
    }

    #[test]
    fn witness_examples() {
        let mut adv = BitAdversary::new(2, 1.0).unwrap();
        let (a, b) = adv.witness_balls(0.1).unwrap();
        assert!(crate::geometry::dist_inf(&a.center, &b.center) > 0.2);
        assert_eq!(adv.witness_balls(0.6), Err(Error::FatnessTooLarge));
    }

    #[test]
    fn survivor_counts() {
        let mut adv = BitAdversary::new(8, 1.0).unwrap();
        assert_eq!(adv.count_surviving_orthants().unwrap(), 256);
        let p = vec![0.5; 8];
        adv.respond(&p, &coord(3)).unwrap();
        adv.respond(&p, &coord(5)).unwrap();
        assert_eq!(adv.count_surviving_orthants().unwrap(), 128);
        let q = vec![-0.5; 8];
        adv.respond(&q, &coord(0)).unwrap();
        adv.respond(&q, &coord(0)).unwrap();
        assert!(adv.count_surviving_orthants().unwrap() >= 4);
    }

    #[test]
    fn rejects_inner_queries() {
        let mut adv = BitAdversary::new(2, 1.0).unwrap();
        let err = adv.respond(&[0.0, 0.0], &Query::Inner { v: vec![1.0, 0.0] }).unwrap_err();
        assert!(matches!(err, Error::UnsupportedQuery { .. }));
    }
}
