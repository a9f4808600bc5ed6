//! Dense row-major matrices, Cholesky and partially pivoted LU, and
//! iterative estimates of the extreme singular values.

use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)] // float methods come from libm when core lacks them
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate().take(self.rows) {
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
        y
    }

    /// `max |a_ij − a_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        d
    }

    /// `D_r A D_c` with diagonal scalings given as vectors.
    pub fn scaled(&self, row_scale: &[f64], col_scale: &[f64]) -> DenseMatrix {
        let mut m = self.clone();
        for i in 0..self.rows {
            let r = row_scale[i];
            for (a, c) in m.row_mut(i).iter_mut().zip(col_scale) {
                *a *= r * c;
            }
        }
        m
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `A = L Lᵀ`; only the lower triangle of the input is read.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.cols(),
            });
        }
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let lj = l.row(j);
            let d = a[(j, j)] - lj[..j].iter().map(|v| v * v).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::CholeskyFailed { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let (upper, lower) = l.data.split_at_mut(i * n);
                let lj = &upper[j * n..j * n + j];
                let li = &mut lower[..n];
                let s: f64 = li[..j].iter().zip(lj).map(|(x, y)| x * y).sum();
                li[j] = (a[(i, j)] - s) / d;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let s: f64 = row[..i].iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / row[i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    pub fn factor_matrix(&self) -> &DenseMatrix {
        &self.l
    }
}

/// `P A = L U` with partial pivoting, stored compactly.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.cols(),
            });
        }
        let scale = a.max_abs();
        let tiny = scale * f64::EPSILON * n.max(1) as f64;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, lu[(k, k)].abs());
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::SingularMatrix {
                    pivot: k,
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    lu.data.swap(p * n + j, k * n + j);
                }
            }
            let pivot = lu[(k, k)];
            let (top, bottom) = lu.data.split_at_mut((k + 1) * n);
            let row_k = &top[k * n..(k + 1) * n];
            for row_i in bottom.chunks_exact_mut(n) {
                let f = row_i[k] / pivot;
                row_i[k] = f;
                if f != 0.0 {
                    for (x, y) in row_i[k + 1..].iter_mut().zip(&row_k[k + 1..]) {
                        *x -= f * y;
                    }
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..]
                .iter()
                .zip(&y[i + 1..])
                .map(|(a, b)| a * b)
                .sum();
            y[i] = (y[i] - s) / row[i];
        }
        y
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        // Uᵀ z = b
        let mut z = b.to_vec();
        for i in 0..n {
            z[i] /= self.lu[(i, i)];
            let zi = z[i];
            let row = self.lu.row(i);
            for k in (i + 1)..n {
                z[k] -= row[k] * zi;
            }
        }
        // Lᵀ w = z
        for i in (0..n).rev() {
            let wi = z[i];
            let row = self.lu.row(i);
            for k in 0..i {
                z[k] -= row[k] * wi;
            }
        }
        let mut x = alloc::vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }
}

/// Power-iteration settings for singular value estimates.
const POWER_MAX_ITERS: usize = 400;
const POWER_REL_TOL: f64 = 1e-9;

fn start_vector(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.754_877_666).sin())
        .collect();
    let s = two_norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

fn power_iterate(n: usize, mut apply: impl FnMut(&[f64]) -> Vec<f64>) -> f64 {
    let mut x = start_vector(n);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let y = apply(&x);
        let new_lambda: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = two_norm(&y);
        if norm == 0.0 {
            return 0.0;
        }
        x = y.into_iter().map(|v| v / norm).collect();
        let done = (new_lambda - lambda).abs() <= POWER_REL_TOL * new_lambda.abs();
        lambda = new_lambda;
        if done {
            break;
        }
    }
    lambda
}

/// Largest singular value by power iteration on `AᵀA`.
pub fn largest_singular_value(a: &DenseMatrix) -> f64 {
    if a.rows() == 0 {
        return 0.0;
    }
    power_iterate(a.cols(), |x| a.transpose_mul_vec(&a.mul_vec(x)))
        .max(0.0)
        .sqrt()
}

/// Smallest singular value by inverse iteration on `AᵀA` using the LU factors.
/// Converges from above.
pub fn smallest_singular_value(lu: &Lu) -> f64 {
    let n = lu.lu.rows();
    if n == 0 {
        return 0.0;
    }
    let lambda = power_iterate(n, |x| lu.solve(&lu.solve_transpose(x)));
    if lambda <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / lambda.sqrt()
    }
}

/// `(σ_min, σ_max)` estimates; `σ_min = 0` for a numerically singular matrix.
pub fn extreme_singular_values(a: &DenseMatrix) -> (f64, f64) {
    let smax = largest_singular_value(a);
    let smin = match Lu::factor(a) {
        Ok(lu) => smallest_singular_value(&lu),
        Err(_) => 0.0,
    };
    (smin, smax)
}
