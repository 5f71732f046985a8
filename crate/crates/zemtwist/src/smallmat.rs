//! Fixed-size dense linear algebra for matrices up to 6x6.
//!
//! Every consumer of the linearized models goes through this one audited
//! numeric core. Dimensions are fixed at construction (2..=6 for matrices),
//! storage is a stack array, and all operations are pure, so values can be
//! copied freely between threads.
//!
//! The matrix exponential uses scaling-and-squaring around a diagonal Pade
//! [6/6] core. The squaring count is chosen so the scaled infinity norm is
//! at most 0.5: the integrated model contains 1/tau_s = 50 1/s entries and
//! times-to-go of several seconds, where a naive power series loses all
//! precision in f64.

use std::ops::{Index, IndexMut};
use thiserror::Error;

/// Largest supported dimension.
pub const MAX_DIM: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmallMatError {
    #[error("dimension {0} outside supported range")]
    BadDimension(usize),
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("row {0} has length {1}, expected {2}")]
    RaggedRow(usize, usize, usize),
}

/// Dense square matrix, row-major, dimension 2..=6.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    elems: [f64; MAX_DIM * MAX_DIM],
}

/// Dense vector, dimension 1..=6.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector {
    n: usize,
    elems: [f64; MAX_DIM],
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        assert!(
            (2..=MAX_DIM).contains(&n),
            "matrix dimension {n} out of range"
        );
        Matrix {
            n,
            elems: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from rows, validating shape and finiteness.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, SmallMatError> {
        let n = rows.len();
        if !(2..=MAX_DIM).contains(&n) {
            return Err(SmallMatError::BadDimension(n));
        }
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(SmallMatError::RaggedRow(i, row.len(), n));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(SmallMatError::NonFinite(i, j));
                }
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> Vector {
        assert!(i < self.n);
        let mut v = Vector::zeros(self.n);
        for j in 0..self.n {
            v[j] = self[(i, j)];
        }
        v
    }

    /// Dense matrix product. Panics on dimension mismatch.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "matrix product dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product. Panics on dimension mismatch.
    pub fn mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(self.n, x.n, "matrix-vector dimension mismatch");
        let mut out = Vector::zeros(self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self[(i, j)] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let mut out = *self;
        for i in 0..self.n * MAX_DIM {
            out.elems[i] += other.elems[i];
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let mut out = *self;
        for i in 0..self.n * MAX_DIM {
            out.elems[i] -= other.elems[i];
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        let mut out = *self;
        for v in out.elems.iter_mut() {
            *v *= s;
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self[(i, j)].abs();
            }
            worst = worst.max(acc);
        }
        worst
    }

    /// exp(self * t) by scaling-and-squaring with a Pade [6/6] core.
    ///
    /// Exact identity for t = 0. Panics if `t` is not finite.
    pub fn exp(&self, t: f64) -> Matrix {
        assert!(
            t.is_finite(),
            "matrix exponential time argument must be finite"
        );
        if t == 0.0 {
            return Matrix::identity(self.n);
        }
        let at = self.scale(t);
        let norm = at.inf_norm();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let a = at.scale(0.5f64.powi(squarings as i32));

        // Diagonal Pade [6/6] coefficients c_j = (12-j)! 6! / (12! (6-j)! j!).
        const C: [f64; 7] = [
            1.0,
            0.5,
            5.0 / 44.0,
            1.0 / 66.0,
            1.0 / 792.0,
            1.0 / 15_840.0,
            1.0 / 665_280.0,
        ];
        let n = self.n;
        let ident = Matrix::identity(n);
        let a2 = a.mul(&a);
        let a4 = a2.mul(&a2);
        // odd part: U = A (c1 I + c3 A^2 + c5 A^4)
        let u_inner = ident.scale(C[1]).add(&a2.scale(C[3])).add(&a4.scale(C[5]));
        let u = a.mul(&u_inner);
        // even part: V = c0 I + c2 A^2 + c4 A^4 + c6 A^6
        let a6 = a4.mul(&a2);
        let v = ident
            .scale(C[0])
            .add(&a2.scale(C[2]))
            .add(&a4.scale(C[4]))
            .add(&a6.scale(C[6]));

        // exp(A) ~ (V - U)^-1 (V + U)
        let mut r = solve(v.sub(&u), v.add(&u));
        for _ in 0..squarings {
            r = r.mul(&r);
        }
        r
    }
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&n),
            "vector dimension {n} out of range"
        );
        Vector {
            n,
            elems: [0.0; MAX_DIM],
        }
    }

    pub fn from_slice(vals: &[f64]) -> Result<Self, SmallMatError> {
        let n = vals.len();
        if !(1..=MAX_DIM).contains(&n) {
            return Err(SmallMatError::BadDimension(n));
        }
        let mut v = Vector::zeros(n);
        for (i, &x) in vals.iter().enumerate() {
            if !x.is_finite() {
                return Err(SmallMatError::NonFinite(i, 0));
            }
            v[i] = x;
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.n, other.n, "dot product dimension mismatch");
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += self[i] * other[i];
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Vector {
        let mut out = *self;
        for v in out.elems.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.n, other.n);
        let mut out = *self;
        for i in 0..self.n {
            out.elems[i] += other.elems[i];
        }
        out
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.elems[..self.n]
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(
            i < self.n && j < self.n,
            "index ({i}, {j}) out of bounds for {}x{}",
            self.n,
            self.n
        );
        &self.elems[i * MAX_DIM + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(
            i < self.n && j < self.n,
            "index ({i}, {j}) out of bounds for {}x{}",
            self.n,
            self.n
        );
        &mut self.elems[i * MAX_DIM + j]
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        assert!(i < self.n);
        &self.elems[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        assert!(i < self.n);
        &mut self.elems[i]
    }
}

/// Solve A X = B by Gaussian elimination with partial pivoting.
///
/// Only used on the Pade denominator, which is well conditioned by the
/// norm-0.5 scaling, so a vanishing pivot indicates a bug upstream.
fn solve(a: Matrix, b: Matrix) -> Matrix {
    let n = a.dim();
    let mut lhs = a;
    let mut rhs = b;
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if lhs[(r, col)].abs() > lhs[(pivot, col)].abs() {
                pivot = r;
            }
        }
        if pivot != col {
            for j in 0..n {
                let tmp = lhs[(col, j)];
                lhs[(col, j)] = lhs[(pivot, j)];
                lhs[(pivot, j)] = tmp;
                let tmp = rhs[(col, j)];
                rhs[(col, j)] = rhs[(pivot, j)];
                rhs[(pivot, j)] = tmp;
            }
        }
        let p = lhs[(col, col)];
        assert!(p.abs() > 1e-300, "singular Pade denominator");
        for r in col + 1..n {
            let f = lhs[(r, col)] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                lhs[(r, j)] -= f * lhs[(col, j)];
            }
            for j in 0..n {
                rhs[(r, j)] -= f * rhs[(col, j)];
            }
        }
    }
    let mut x = Matrix::zeros(n);
    for j in 0..n {
        for i in (0..n).rev() {
            let mut acc = rhs[(i, j)];
            for k in i + 1..n {
                acc -= lhs[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / lhs[(i, i)];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        worst
    }

    #[test]
    fn exp_of_zero_time_is_identity() {
        let a = Matrix::from_rows(&[&[3.0, -2.0], &[7.0, 0.5]]).unwrap();
        assert_eq!(a.exp(0.0), Matrix::identity(2));
    }

    #[test]
    fn exp_of_nilpotent_shift() {
        // A = [[0,1],[0,0]] has A^2 = 0, so exp(A t) = I + A t exactly.
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        for t in [0.3, 1.0, -2.5, 8.0] {
            let e = a.exp(t);
            assert!((e[(0, 0)] - 1.0).abs() < 1e-15);
            assert!((e[(0, 1)] - t).abs() < 1e-12 * t.abs().max(1.0));
            assert!(e[(1, 0)].abs() < 1e-15);
            assert!((e[(1, 1)] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exp_matches_scalar_on_diagonal() {
        let a =
            Matrix::from_rows(&[&[-2.0, 0.0, 0.0], &[0.0, 0.3, 0.0], &[0.0, 0.0, -50.0]]).unwrap();
        let e = a.exp(0.1);
        assert!((e[(0, 0)] - (-0.2f64).exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - 0.03f64.exp()).abs() < 1e-14);
        assert!((e[(2, 2)] - (-5.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn exp_preserves_block_triangular_zeros() {
        // Lower-left 3x3 block of zeros must stay (numerically) zero.
        let a = Matrix::from_rows(&[
            &[0.0, 1.0, 0.0, 0.5, -2.0, 1.0],
            &[0.0, 0.0, 1.0, -100.0, 0.0, -80.0],
            &[0.0, 0.0, -10.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, -3.1, 1.0, -0.2],
            &[0.0, 0.0, 0.0, -234.0, -5.0, 160.0],
            &[0.0, 0.0, 0.0, 0.0, 0.0, -50.0],
        ])
        .unwrap();
        let e = a.exp(2.0);
        for i in 3..6 {
            for j in 0..3 {
                assert!(
                    e[(i, j)].abs() < 1e-12,
                    "block zero violated at ({i},{j}): {}",
                    e[(i, j)]
                );
            }
        }
    }

    #[test]
    fn mul_against_triple_loop() {
        let a =
            Matrix::from_rows(&[&[1.5, -2.0, 0.25], &[0.0, 3.0, -1.0], &[4.0, 5.0, 6.0]]).unwrap();
        let b =
            Matrix::from_rows(&[&[-1.0, 2.0, 0.5], &[3.5, 0.0, 1.0], &[2.0, -2.0, 0.0]]).unwrap();
        let c = a.mul(&b);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += a[(i, k)] * b[(k, j)];
                }
                assert!((c[(i, j)] - acc).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mul_vec_identity_is_noop() {
        let x = Vector::from_slice(&[1.0, -2.0, 3.5, 0.0, 9.0, -0.25]).unwrap();
        assert_eq!(Matrix::identity(6).mul_vec(&x), x);
    }

    #[test]
    fn mul_identity_is_noop() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(a.mul(&Matrix::identity(2)), a);
        assert_eq!(Matrix::identity(2).mul(&a), a);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(
            Matrix::from_rows(&[&[f64::NAN, 0.0], &[0.0, 1.0]]),
            Err(SmallMatError::NonFinite(0, 0))
        );
        assert_eq!(
            Matrix::from_rows(&[&[1.0]]),
            Err(SmallMatError::BadDimension(1))
        );
        assert_eq!(
            Matrix::from_rows(&[&[1.0, 2.0], &[3.0]]),
            Err(SmallMatError::RaggedRow(1, 1, 2))
        );
        assert_eq!(
            Vector::from_slice(&[0.0, f64::INFINITY]),
            Err(SmallMatError::NonFinite(1, 0))
        );
    }

    #[test]
    fn exp_derivative_matches_a_exp() {
        // d/dt exp(A t) = A exp(A t), central difference with h = 1e-4.
        let a =
            Matrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[-2.0, -3.0, -1.5]]).unwrap();
        let t = 0.7;
        let h = 1e-4;
        let fd = a.exp(t + h).sub(&a.exp(t - h)).scale(1.0 / (2.0 * h));
        let an = a.mul(&a.exp(t));
        assert!(max_abs_diff(&fd, &an) < 1e-5);
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |vals| {
            let mut m = Matrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = vals[i * n + j];
                }
            }
            m
        })
    }

    proptest! {
        #[test]
        fn exp_semigroup_property(a in arb_matrix(4), t1 in 0.1f64..3.0, t2 in 0.1f64..3.0) {
            // Shift the spectrum left so the matrix is stable, then bound the norm.
            let n = a.dim();
            let mut stable = a;
            let shift = a.inf_norm();
            for i in 0..n {
                stable[(i, i)] -= shift;
            }
            let norm_budget = 10.0 / (t1 + t2);
            if stable.inf_norm() > norm_budget {
                stable = stable.scale(norm_budget / stable.inf_norm());
            }
            let lhs = stable.exp(t1 + t2);
            let rhs = stable.exp(t1).mul(&stable.exp(t2));
            let scale = lhs.inf_norm().max(1e-30);
            prop_assert!(max_abs_diff(&lhs, &rhs) / scale < 1e-8);
        }

        #[test]
        fn mul_matches_naive_oracle(a in arb_matrix(6), b in arb_matrix(6)) {
            let c = a.mul(&b);
            for i in 0..6 {
                for j in 0..6 {
                    let mut acc = 0.0;
                    for k in 0..6 {
                        acc += a[(i, k)] * b[(k, j)];
                    }
                    prop_assert!((c[(i, j)] - acc).abs() < 1e-14);
                }
            }
        }
    }
}
