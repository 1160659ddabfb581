//! Small fixed-size and block matrices.
//!
//! Every covariance object in this crate is built from 2x2 blocks, so the
//! block grid is the natural storage. Dense conversion to `nalgebra` is only
//! used by reference computations.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

/// A real 2x2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    pub fn scalar(s: f64) -> Self {
        Mat2([[s, 0.0], [0.0, s]])
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.0[r][c]
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = self.0;
        Mat2([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
    }

    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        let m = self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |a, &b| a.max(b.abs()))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// A `2n x 2n` matrix stored as an `n x n` grid of [`Mat2`] blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMat {
    n: usize,
    blocks: Vec<Mat2>,
}

impl BlockMat {
    pub fn zeros(n: usize) -> Self {
        BlockMat {
            n,
            blocks: vec![Mat2::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Mat2::IDENTITY);
        }
        m
    }

    /// Number of block rows.
    pub fn blocks_per_side(&self) -> usize {
        self.n
    }

    /// Scalar dimension, always even.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    #[inline]
    pub fn block(&self, i: usize, j: usize) -> Mat2 {
        self.blocks[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, m: Mat2) {
        self.blocks[i * self.n + j] = m;
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.block(r / 2, c / 2).get(r % 2, c % 2)
    }

    pub fn matmul(&self, other: &BlockMat) -> BlockMat {
        assert_eq!(self.n, other.n, "block dimension mismatch");
        let n = self.n;
        let mut out = BlockMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Mat2::ZERO;
                for k in 0..n {
                    acc = acc + self.block(i, k) * other.block(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Product with a vector of length `2n` given as `n` pairs.
    pub fn mul_vec(&self, v: &[[f64; 2]]) -> Vec<[f64; 2]> {
        assert_eq!(v.len(), self.n, "vector length mismatch");
        (0..self.n)
            .map(|i| {
                let mut acc = [0.0, 0.0];
                for (j, vj) in v.iter().enumerate() {
                    let p = self.block(i, j).mul_vec(*vj);
                    acc[0] += p[0];
                    acc[1] += p[1];
                }
                acc
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| self.entry(r, c))
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Option<BlockMat> {
        if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) {
            return None;
        }
        let n = m.nrows() / 2;
        let mut out = BlockMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(
                    i,
                    j,
                    Mat2::new(
                        m[(2 * i, 2 * j)],
                        m[(2 * i, 2 * j + 1)],
                        m[(2 * i + 1, 2 * j)],
                        m[(2 * i + 1, 2 * j + 1)],
                    ),
                );
            }
        }
        Some(out)
    }

    /// Max-abs entrywise distance.
    pub fn max_abs_diff(&self, other: &BlockMat) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max)
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|r| (0..d).map(|c| self.entry(r, c).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.0.iter().flatten())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}

impl Sub for &BlockMat {
    type Output = BlockMat;
    fn sub(self, o: &BlockMat) -> BlockMat {
        assert_eq!(self.n, o.n, "block dimension mismatch");
        BlockMat {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .zip(&o.blocks)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}
