//! Just enough dense linear algebra: orthonormalization, null vectors and
//! row-major square matrices for the ellipsoid.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{dot, norm_l2};

/// Projections shorter than this count as numerically zero.
pub const NULL_THRESHOLD: f64 = 1e-8;

fn subtract_projection(v: &mut [f64], q: &[f64]) {
    let c = dot(v, q);
    for (x, y) in v.iter_mut().zip(q) {
        *x -= c * y;
    }
}

/// Orthonormal basis of the span of `vectors` by modified Gram–Schmidt with one
/// re-orthogonalization pass. Near-dependent inputs are dropped.
pub fn orthonormal_basis(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = norm_l2(v);
        if scale == 0.0 || !scale.is_finite() {
            continue;
        }
        let mut w: Vec<f64> = v.iter().map(|x| x / scale).collect();
        for _ in 0..2 {
            for q in &basis {
                subtract_projection(&mut w, q);
            }
        }
        let n = norm_l2(&w);
        if n > NULL_THRESHOLD {
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w);
        }
    }
    basis
}

/// A unit vector orthogonal to every constraint, or `None` if the span is all of `ℝ^d`.
///
/// Projects `e^0, e^1, …` off the constraint span in order and returns the first
/// projection longer than [`NULL_THRESHOLD`], normalized. Deterministic in the
/// input order.
pub fn null_vector(constraints: &[Vec<f64>], d: usize) -> Option<Vec<f64>> {
    let basis = orthonormal_basis(constraints);
    if basis.len() >= d {
        return None;
    }
    for i in 0..d {
        let mut w = vec![0.0; d];
        w[i] = 1.0;
        for _ in 0..2 {
            for q in &basis {
                subtract_projection(&mut w, q);
            }
        }
        let n = norm_l2(&w);
        if n > NULL_THRESHOLD {
            w.iter_mut().for_each(|x| *x /= n);
            return Some(w);
        }
    }
    None
}

/// Dense `d × d` matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    pub d: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn scaled_identity(d: usize, s: f64) -> Self {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = s;
        }
        Self { d, data }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.d).map(|row| dot(row, v)).collect()
    }

    /// `self ← s·(self − c·b bᵀ)`.
    pub fn rank_one_update(&mut self, s: f64, c: f64, b: &[f64]) {
        let d = self.d;
        for i in 0..d {
            let cb = c * b[i];
            let row = &mut self.data[i * d..(i + 1) * d];
            for (x, bj) in row.iter_mut().zip(b) {
                *x = s * (*x - cb * bj);
            }
        }
    }

    pub fn symmetrize(&mut self) {
        let d = self.d;
        for i in 0..d {
            for j in (i + 1)..d {
                let m = 0.5 * (self.data[i * d + j] + self.data[j * d + i]);
                self.data[i * d + j] = m;
                self.data[j * d + i] = m;
            }
        }
    }

    /// Largest entrywise asymmetry `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let d = self.d;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                worst = worst.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        worst
    }

    /// Lower Cholesky factor, or `None` if the matrix is not numerically positive definite.
    pub fn cholesky(&self) -> Option<Vec<f64>> {
        let d = self.d;
        let mut l = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let mut s = self.at(i, j);
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[i * d + i] = libm::sqrt(s);
                } else {
                    l[i * d + j] = s / l[j * d + j];
                }
            }
        }
        Some(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_vector_examples() {
        let a = null_vector(&[vec![1.0, 0.0]], 2).unwrap();
        assert_eq!(a, vec![0.0, 1.0]);
        let a = null_vector(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 3).unwrap();
        assert_eq!(a, vec![0.0, 0.0, 1.0]);
        assert!(null_vector(&[vec![1.0, 1.0], vec![1.0, -1.0]], 2).is_none());
    }

    #[test]
    fn null_vector_handles_dependent_constraints() {
        let c = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 0.0]];
        let a = null_vector(&c, 3).unwrap();
        for v in &c {
            assert!(dot(v, &a).abs() < 1e-12);
        }
        assert!((norm_l2(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let m = SquareMatrix { d: 2, data: vec![1.0, 2.0, 2.0, 1.0] };
        assert!(m.cholesky().is_none());
        assert!(SquareMatrix::scaled_identity(3, 2.0).cholesky().is_some());
    }
}
