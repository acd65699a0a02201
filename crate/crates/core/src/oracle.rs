//! The query/answer contract, the fixed-point bit encoding and transcripts.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{dot, norm_inf, Normal, Point};
use crate::Error;

/// One low-bandwidth question about the separating normal `g` at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Query {
    /// The `j`-th coordinate of `g`.
    Coord { j: usize },
    /// Bit `i` of coordinate `j` of `g / ‖g‖∞`.
    Bit { i: u32, j: usize },
    /// `⟨v, g⟩`.
    Inner { v: Vec<f64> },
    /// `1` if `⟨v, g⟩ > 0`, else `0`.
    SignInner { v: Vec<f64> },
}

impl Query {
    pub fn kind(&self) -> &'static str {
        match self {
            Query::Coord { .. } => "coord",
            Query::Bit { .. } => "bit",
            Query::Inner { .. } => "inner",
            Query::SignInner { .. } => "sign_inner",
        }
    }

    /// Coordinate addressed by a `Coord` or `Bit` query.
    pub fn coordinate(&self) -> Option<usize> {
        match self {
            Query::Coord { j } | Query::Bit { j, .. } => Some(*j),
            _ => None,
        }
    }

    /// Direction of an `Inner` or `SignInner` query.
    pub fn direction(&self) -> Option<&[f64]> {
        match self {
            Query::Inner { v } | Query::SignInner { v } => Some(v),
            _ => None,
        }
    }

    /// Checks indices and directions against dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<(), Error> {
        match self {
            Query::Coord { j } | Query::Bit { j, .. } => {
                if *j >= dim {
                    return Err(Error::IndexOutOfRange { index: *j, dim });
                }
            }
            Query::Inner { v } | Query::SignInner { v } => {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite);
                }
                if v.iter().all(|x| *x == 0.0) {
                    return Err(Error::DegenerateNormal);
                }
            }
        }
        Ok(())
    }

    /// The answer a not-yet-realized normal gives when it must vanish on this query.
    pub fn zero_answer(&self) -> OracleAnswer {
        match self {
            Query::Coord { .. } | Query::Inner { .. } => OracleAnswer::Value { value: 0.0 },
            Query::Bit { .. } | Query::SignInner { .. } => OracleAnswer::Bit { value: 0 },
        }
    }
}

/// `Feasible` is the zero map output and is distinct from a genuine zero value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleAnswer {
    Feasible,
    Value { value: f64 },
    Bit { value: u8 },
}

impl OracleAnswer {
    pub fn is_feasible(&self) -> bool {
        matches!(self, OracleAnswer::Feasible)
    }
}

/// Bit `i` of `x ∈ [-1, 1]` in sign-magnitude fixed point.
///
/// Bit 0 is the sign (1 iff `x < 0`); bit `i >= 1` is the `i`-th binary digit of
/// `|x|` after the radix point, truncated. `|x| = 1` has no such expansion, so it
/// is encoded as `0.111…₂`, keeping the reconstruction error below `2^-B`.
pub fn bit_of(x: f64, i: u32) -> Result<u8, Error> {
    if x.is_nan() || x.abs() > 1.0 {
        return Err(Error::UnnormalizedCoordinate(x));
    }
    if i == 0 {
        return Ok(u8::from(x < 0.0));
    }
    let m = x.abs();
    if m == 1.0 {
        return Ok(1);
    }
    // Past 1100 binary digits every representable `|x| < 1` has run out of bits.
    if i > 1100 {
        return Ok(0);
    }
    let scaled = libm::floor(libm::scalbn(m, i as i32));
    Ok(if libm::fmod(scaled, 2.0) == 1.0 { 1 } else { 0 })
}

/// `sign · Σ_{i=1}^{B} b_i 2^{-i}` from bits `b_0..=b_B`.
pub fn reconstruct_from_bits(bits: &[u8]) -> f64 {
    let Some((sign, digits)) = bits.split_first() else {
        return 0.0;
    };
    let mag: f64 = digits
        .iter()
        .enumerate()
        .filter(|(_, b)| **b == 1)
        .map(|(k, _)| libm::scalbn(1.0, -(k as i32 + 1)))
        .sum();
    if *sign == 1 {
        -mag
    } else {
        mag
    }
}

/// `q(g)`: the answer query `q` receives when the first-order map outputs `g`.
pub fn evaluate_query(q: &Query, g: &[f64]) -> Result<OracleAnswer, Error> {
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    q.validate(g.len())?;
    let scale = norm_inf(g);
    if scale == 0.0 {
        return Ok(OracleAnswer::Feasible);
    }
    Ok(match q {
        Query::Coord { j } => OracleAnswer::Value { value: g[*j] },
        Query::Bit { i, j } => OracleAnswer::Bit { value: bit_of(g[*j] / scale, *i)? },
        Query::Inner { v } => OracleAnswer::Value { value: dot(v, g) },
        Query::SignInner { v } => OracleAnswer::Bit { value: u8::from(dot(v, g) > 0.0) },
    })
}

/// One query/response pair plus the normal the adversary eventually committed to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub point: Point,
    pub query: Query,
    pub answer: OracleAnswer,
    /// `None` while pending. Feasible answers carry the zero vector.
    pub realized_normal: Option<Normal>,
    pub level: u32,
    pub tag: String,
}

/// First line of a transcript file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub rho: f64,
    pub adversary: String,
    pub seed: u64,
}

/// Append-only record list. A record's normal may be set once and never changed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    /// Ambient dimension of every point (`n + d`).
    pub dim: usize,
    pub records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn new(dim: usize) -> Self {
        Self { dim, records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&TranscriptRecord> {
        self.records.get(index)
    }

    pub fn push(&mut self, record: TranscriptRecord) -> Result<usize, Error> {
        crate::geometry::check_dim(self.dim, record.point.len())?;
        self.records.push(record);
        Ok(self.records.len() - 1)
    }

    /// Sets the realized normal of a pending record.
    ///
    /// Setting the same normal again is a no-op; a different one is an error.
    pub fn resolve(&mut self, index: usize, normal: Normal) -> Result<(), Error> {
        let dim = self.dim;
        let rec = self
            .records
            .get_mut(index)
            .ok_or(Error::IndexOutOfRange { index, dim: usize::MAX })?;
        crate::geometry::check_dim(dim, normal.len())?;
        match &rec.realized_normal {
            Some(existing) if *existing == normal => Ok(()),
            Some(_) => Err(Error::AlreadyRealized(index)),
            None => {
                rec.realized_normal = Some(normal);
                Ok(())
            }
        }
    }

    pub fn pending(&self) -> impl Iterator<Item = usize> + '_ {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.realized_normal.is_none())
            .map(|(i, _)| i)
    }
}

/// Anything that answers low-bandwidth queries at points of `ℝ^dim`.
pub trait SeparationOracle {
    fn dim(&self) -> usize;

    fn query(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error>;

    /// Number of successfully answered queries.
    fn queries_made(&self) -> usize;
}

impl<T: SeparationOracle + ?Sized> SeparationOracle for &mut T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn query(&mut self, point: &[f64], q: &Query) -> Result<OracleAnswer, Error> {
        (**self).query(point, q)
    }

    fn queries_made(&self) -> usize {
        (**self).queries_made()
    }
}

/// Memo key for a point: bit patterns with `-0.0` folded into `0.0`.
pub(crate) fn point_key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|x| (x + 0.0).to_bits()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn evaluate_examples() {
        // 0-based indices: Coord(0) is the first coordinate.
        assert_eq!(
            evaluate_query(&Query::Coord { j: 0 }, &[0.5, -1.0]).unwrap(),
            OracleAnswer::Value { value: 0.5 }
        );
        assert_eq!(
            evaluate_query(&Query::SignInner { v: vec![1.0, 1.0] }, &[1.0, -2.0]).unwrap(),
            OracleAnswer::Bit { value: 0 }
        );
        assert_eq!(
            evaluate_query(&Query::Inner { v: vec![0.0, 1.0, 0.0] }, &[3.0, 4.0, 0.0]).unwrap(),
            OracleAnswer::Value { value: 4.0 }
        );
        assert_eq!(evaluate_query(&Query::Coord { j: 1 }, &[0.0, 0.0]).unwrap(), OracleAnswer::Feasible);
        assert_eq!(
            evaluate_query(&Query::Coord { j: 2 }, &[1.0, 0.0]),
            Err(Error::IndexOutOfRange { index: 2, dim: 2 })
        );
    }

    #[test]
    fn bit_examples() {
        assert_eq!(bit_of(0.5, 1).unwrap(), 1);
        assert_eq!(bit_of(-0.25, 0).unwrap(), 1);
        assert_eq!(bit_of(-0.25, 1).unwrap(), 0);
        assert_eq!(bit_of(-0.25, 2).unwrap(), 1);
        let bits: Vec<u8> = (1..=5).map(|i| bit_of(0.3, i).unwrap()).collect();
        assert_eq!(bits, vec![0, 1, 0, 0, 1]);
        let mut all = vec![bit_of(0.3, 0).unwrap()];
        all.extend(bits);
        assert!((0.3 - reconstruct_from_bits(&all)).abs() <= 1.0 / 32.0);
        assert!(matches!(bit_of(1.5, 1), Err(Error::UnnormalizedCoordinate(_))));
    }

    #[test]
    fn unit_magnitude_reconstructs_within_bound() {
        for x in [1.0, -1.0] {
            let bits: Vec<u8> = (0..=10).map(|i| bit_of(x, i).unwrap()).collect();
            assert!((x - reconstruct_from_bits(&bits)).abs() <= 1.0 / 1024.0);
        }
    }

    #[test]
    fn serde_shapes() {
        let q = Query::Bit { i: 3, j: 1 };
        assert_eq!(serde_json::to_string(&q).unwrap(), r#"{"kind":"bit","i":3,"j":1}"#);
        let a = OracleAnswer::Value { value: 2.5 };
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"kind":"value","value":2.5}"#);
        assert_eq!(serde_json::to_string(&OracleAnswer::Feasible).unwrap(), r#"{"kind":"feasible"}"#);
    }

    #[test]
    fn resolve_is_write_once() {
        let mut t = Transcript::new(2);
        let rec = TranscriptRecord {
            point: vec![0.0, 0.0],
            query: Query::Coord { j: 0 },
            answer: OracleAnswer::Value { value: 0.0 },
            realized_normal: None,
            level: 0,
            tag: String::new(),
        };
        let i = t.push(rec).unwrap();
        assert_eq!(t.pending().count(), 1);
        t.resolve(i, vec![0.0, 1.0]).unwrap();
        t.resolve(i, vec![0.0, 1.0]).unwrap();
        assert_eq!(t.resolve(i, vec![1.0, 0.0]), Err(Error::AlreadyRealized(0)));
        assert_eq!(t.pending().count(), 0);
    }
}
