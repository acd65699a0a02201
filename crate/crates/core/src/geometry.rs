//! Points, halfspaces, ℓ∞ boxes and balls, orthant labels and the support
//! functions every consistency check reduces to.
//!
//! Points and normals are plain `Vec<f64>` / `&[f64]`. Dimensions are desk
//! scale (`d <= 64`), so no fixed-size or SIMD representation is used.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// A point of `ℝ^d` or `ℝ^{n+d}`.
pub type Point = Vec<f64>;

/// A (not necessarily normalized) halfspace normal.
pub type Normal = Vec<f64>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_l1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn norm_l2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| if x.abs() > m { x.abs() } else { m })
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| {
        let t = (x - y).abs();
        if t > m {
            t
        } else {
            m
        }
    })
}

pub fn is_zero(a: &[f64]) -> bool {
    a.iter().all(|x| *x == 0.0)
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// `s·e^i` in `ℝ^d`.
pub fn signed_basis(d: usize, i: usize, sign: f64) -> Normal {
    let mut e = vec![0.0; d];
    e[i] = sign;
    e
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), Error> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn check_normal(a: &[f64]) -> Result<(), Error> {
    if !all_finite(a) {
        return Err(Error::NonFinite);
    }
    if norm_inf(a) == 0.0 {
        return Err(Error::DegenerateNormal);
    }
    Ok(())
}

/// `{z : ⟨normal, z⟩ ≤ offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Normal,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Normal, offset: f64) -> Result<Self, Error> {
        check_normal(&normal)?;
        Ok(Self { normal, offset })
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        dot(&self.normal, z) <= self.offset
    }
}

/// Closed ℓ∞ box `center + [-radius, radius]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub center: Point,
    pub radius: f64,
}

impl BoxRegion {
    pub fn new(center: Point, radius: f64) -> Result<Self, Error> {
        if !(radius > 0.0) || !radius.is_finite() || !all_finite(&center) {
            return Err(Error::Precondition("box radius must be positive and finite".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        dist_inf(z, &self.center) <= self.radius
    }

    /// The box as an ℓ∞ ball, for support computations.
    pub fn as_ball(&self) -> InfBall {
        InfBall { center: self.center.clone(), radius: self.radius }
    }

    /// The sub-box `center + (2r/3)·s` of radius `r/3` lying in the interior of orthant `s`.
    pub fn orthant_sub_box(&self, orthant: &OrthantLabel) -> BoxRegion {
        let shift = 2.0 * self.radius / 3.0;
        let center = self
            .center
            .iter()
            .zip(orthant.signs())
            .map(|(c, s)| c + shift * f64::from(*s))
            .collect();
        BoxRegion { center, radius: self.radius / 3.0 }
    }
}

/// Closed ℓ∞ ball `{z : ‖z − center‖∞ ≤ radius}`; `radius` is the fatness ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfBall {
    pub center: Point,
    pub radius: f64,
}

impl InfBall {
    pub fn new(center: Point, radius: f64) -> Result<Self, Error> {
        if !(radius >= 0.0) || !radius.is_finite() || !all_finite(&center) {
            return Err(Error::Precondition("ball radius must be nonnegative and finite".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        dist_inf(z, &self.center) <= self.radius
    }

    /// Iterates over the `2^d` corner points. Intended for brute-force checks.
    pub fn corners(&self) -> impl Iterator<Item = Point> + '_ {
        let d = self.center.len();
        (0u64..(1u64 << d)).map(move |mask| {
            self.center
                .iter()
                .enumerate()
                .map(|(i, c)| if mask >> i & 1 == 1 { c + self.radius } else { c - self.radius })
                .collect()
        })
    }
}

/// Sign string `s_1 ⋯ s_d` naming one orthant relative to some anchor.
///
/// Orders lexicographically with `-1 < +1`, which coincides with the numeric
/// order of [`OrthantLabel::index`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrthantLabel {
    signs: Vec<i8>,
}

impl OrthantLabel {
    pub fn new(signs: Vec<i8>) -> Result<Self, Error> {
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Precondition("orthant signs must be ±1".into()));
        }
        Ok(Self { signs })
    }

    /// Orthant number `index` in lexicographic order (bit `d-1-i` set means `s_i = +1`).
    pub fn from_index(d: usize, index: u64) -> Self {
        let signs = (0..d)
            .map(|i| if index >> (d - 1 - i) & 1 == 1 { 1 } else { -1 })
            .collect();
        Self { signs }
    }

    pub fn index(&self) -> u64 {
        self.signs.iter().fold(0u64, |acc, s| (acc << 1) | u64::from(*s == 1))
    }

    pub fn all_negative(d: usize) -> Self {
        Self { signs: vec![-1; d] }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self, i: usize) -> i8 {
        self.signs[i]
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }
}

impl fmt::Display for OrthantLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.signs {
            f.write_str(if *s == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for OrthantLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::Precondition("orthant label must consist of '+' and '-'".into())),
            })
            .collect::<Result<Vec<i8>, Error>>()?;
        Ok(Self { signs })
    }
}

impl Serialize for OrthantLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OrthantLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A candidate instance: hull of feasible-reported points plus one ℓ∞ ball on
/// the integral fiber `fiber`. For continuous problems `n = 0` and `fiber` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSet {
    pub n: usize,
    pub d: usize,
    pub generators: Vec<Point>,
    pub fiber: Vec<f64>,
    pub ball: InfBall,
}

impl WitnessSet {
    /// A bare ball in `ℝ^d`.
    pub fn from_ball(ball: InfBall) -> Self {
        Self { n: 0, d: ball.center.len(), generators: Vec::new(), fiber: Vec::new(), ball }
    }

    pub fn dim(&self) -> usize {
        self.n + self.d
    }

    /// `sup_{z ∈ W} ⟨a, z⟩`: the max over generator supports and the ball support.
    pub fn support(&self, a: &[f64]) -> Result<f64, Error> {
        check_dim(self.dim(), a.len())?;
        check_normal(a)?;
        let (ax, ay) = a.split_at(self.n);
        let ball_part = dot(ax, &self.fiber) + dot(ay, &self.ball.center) + self.ball.radius * norm_l1(ay);
        Ok(self.generators.iter().map(|g| dot(a, g)).fold(ball_part, f64::max))
    }

    /// Membership of a reported point: exact generator match or ball membership on the fiber.
    pub fn contains(&self, z: &[f64]) -> bool {
        if z.len() != self.dim() {
            return false;
        }
        if self.generators.iter().any(|g| g.as_slice() == z) {
            return true;
        }
        let (x, y) = z.split_at(self.n);
        x == self.fiber.as_slice() && self.ball.contains(y)
    }
}

/// `sup_{z ∈ ball} ⟨a, z⟩ = ⟨a, center⟩ + ρ‖a‖₁`.
pub fn support_inf_ball(ball: &InfBall, a: &[f64]) -> Result<f64, Error> {
    check_dim(ball.center.len(), a.len())?;
    check_normal(a)?;
    Ok(dot(a, &ball.center) + ball.radius * norm_l1(a))
}

/// Support of the Euclidean ball `B(center, radius)`.
pub fn support_l2_ball(center: &[f64], radius: f64, a: &[f64]) -> Result<f64, Error> {
    check_dim(center.len(), a.len())?;
    check_normal(a)?;
    Ok(dot(a, center) + radius * norm_l2(a))
}

/// True iff `sup_{z ∈ w} ⟨a, z⟩ ≤ ⟨a, ẑ⟩ − tol`.
pub fn separates_strictly(a: &[f64], zhat: &[f64], w: &WitnessSet, tol: f64) -> Result<bool, Error> {
    check_dim(w.dim(), zhat.len())?;
    let sup = w.support(a)?;
    Ok(sup <= dot(a, zhat) - tol)
}

/// Orthant of `y` relative to `anchor`; coordinates on the boundary get sign `-1`.
pub fn orthant_of(y: &[f64], anchor: &[f64]) -> OrthantLabel {
    debug_assert_eq!(y.len(), anchor.len());
    let signs = y.iter().zip(anchor).map(|(v, a)| if v > a { 1 } else { -1 }).collect();
    OrthantLabel { signs }
}

/// Face separator `±e^i` of maximal violation when `zhat` lies outside `bx`.
///
/// Ties go to the smallest index. The returned halfspace is the box face itself.
pub fn box_face_separator(zhat: &[f64], bx: &BoxRegion) -> Option<Halfspace> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, (z, c)) in zhat.iter().zip(&bx.center).enumerate() {
        let violation = (z - c).abs() - bx.radius;
        if violation > 0.0 && best.is_none_or(|(_, v, _)| violation > v) {
            best = Some((i, violation, if z > c { 1.0 } else { -1.0 }));
        }
    }
    best.map(|(i, _, s)| {
        let normal = signed_basis(zhat.len(), i, s);
        let offset = s * bx.center[i] + bx.radius;
        Halfspace { normal, offset }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corner_max(ball: &InfBall, a: &[f64]) -> f64 {
        ball.corners().map(|c| dot(a, &c)).fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn support_examples() {
        let b = InfBall::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(support_inf_ball(&b, &[1.0, 0.0]).unwrap(), 1.0);

        let p = InfBall::new(vec![2.0, -1.0], 0.0).unwrap();
        assert_eq!(support_inf_ball(&p, &[3.0, 5.0]).unwrap(), 1.0);

        let b = InfBall::new(vec![1.0, 1.0], 0.5).unwrap();
        let a = [2.0, -3.0];
        // corners: (1.5,0.5)->1.5, (0.5,0.5)->-0.5, (1.5,1.5)->-1.5, (0.5,1.5)->-3.5
        assert_eq!(corner_max(&b, &a), 1.5);
        assert_eq!(support_inf_ball(&b, &a).unwrap(), 1.5);
    }

    #[test]
    fn support_rejects_zero_normal() {
        let b = InfBall::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(support_inf_ball(&b, &[0.0, 0.0]), Err(Error::DegenerateNormal));
    }

    #[test]
    fn strict_separation_examples() {
        let w = WitnessSet::from_ball(InfBall::new(vec![-1.0, 0.0], 0.5).unwrap());
        assert!(separates_strictly(&[1.0, 0.0], &[1.0, 0.0], &w, 1e-9).unwrap());
        assert!(!separates_strictly(&[1.0, 0.0], &[-0.5, 0.0], &w, 1e-9).unwrap());

        let w = WitnessSet {
            n: 0,
            d: 2,
            generators: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            fiber: vec![],
            ball: InfBall::new(vec![0.0, 1.0], 0.25).unwrap(),
        };
        // generator supports 0 and 1; ball support 1 + 0.25*2 = 1.5
        assert_eq!(w.support(&[1.0, 1.0]).unwrap(), 1.5);
        assert!(separates_strictly(&[1.0, 1.0], &[3.0, 3.0], &w, 1e-9).unwrap());
    }

    #[test]
    fn orthant_examples() {
        assert_eq!(orthant_of(&[1.0, -2.0], &[0.0, 0.0]).to_string(), "+-");
        assert_eq!(orthant_of(&[0.0, 3.0], &[0.0, 0.0]).to_string(), "-+");
        assert_eq!(orthant_of(&[0.5, 0.5, 0.5], &[0.5, 0.5, 0.5]), OrthantLabel::all_negative(3));
    }

    #[test]
    fn orthant_index_order_is_lexicographic() {
        let d = 4;
        let labels: Vec<_> = (0..16).map(|i| OrthantLabel::from_index(d, i)).collect();
        for w in labels.windows(2) {
            assert!(w[0] < w[1]);
        }
        for (i, l) in labels.iter().enumerate() {
            assert_eq!(l.index(), i as u64);
            assert_eq!(l.to_string().parse::<OrthantLabel>().unwrap(), *l);
        }
    }

    #[test]
    fn face_separator_examples() {
        let r = 2.0;
        let bx = BoxRegion::new(vec![0.0, 0.0], r).unwrap();
        let h = box_face_separator(&[2.0 * r, 0.0], &bx).unwrap();
        assert_eq!(h.normal, vec![1.0, 0.0]);
        assert_eq!(h.offset, r);
        assert!(box_face_separator(&[0.3, -r], &bx).is_none());
        let h = box_face_separator(&[1.5 * r, -3.0 * r], &bx).unwrap();
        assert_eq!(h.normal, vec![0.0, -1.0]);
        let h = box_face_separator(&[3.0 * r, -3.0 * r], &bx).unwrap();
        assert_eq!(h.normal, vec![1.0, 0.0]);
    }

    #[test]
    fn sub_box_lies_in_orthant_interior() {
        let bx = BoxRegion::new(vec![0.0; 3], 1.0).unwrap();
        let o = OrthantLabel::new(vec![1, -1, 1]).unwrap();
        let sb = bx.orthant_sub_box(&o);
        for c in sb.as_ball().corners() {
            assert!(bx.contains(&c));
            assert_eq!(orthant_of(&c, &bx.center), o);
        }
    }

    #[test]
    fn witness_membership_on_fiber() {
        let w = WitnessSet {
            n: 1,
            d: 2,
            generators: vec![vec![0.5, 0.0, 0.0]],
            fiber: vec![1.0],
            ball: InfBall::new(vec![0.0, 0.0], 0.1).unwrap(),
        };
        assert!(w.contains(&[0.5, 0.0, 0.0]));
        assert!(w.contains(&[1.0, 0.05, -0.1]));
        assert!(!w.contains(&[0.0, 0.05, -0.1]));
        assert!(!w.contains(&[1.0, 0.2, 0.0]));
    }
}
