//! Small dense matrices and rank-3/rank-4 arrays.
//!
//! The geometry engine works point-locally in dimension 1..=4, so plain
//! row-major storage and Gauss-Jordan elimination are all that is needed.

use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::scalar::{lit, Real};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Mat::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, o.rows, "shape mismatch in matrix product");
        Mat::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * o[(k, j)]).sum()
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum())
            .collect()
    }

    pub fn add(&self, o: &Mat<T>) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + o[(i, j)])
    }

    pub fn sub(&self, o: &Mat<T>) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - o[(i, j)])
    }

    pub fn scale(&self, s: T) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Determinant by partial-pivoting elimination.
    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[(x, c)].abs().partial_cmp(&a[(y, c)].abs()).unwrap())
                .unwrap();
            if a[(p, c)] == T::zero() {
                return T::zero();
            }
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let piv = a[(c, c)];
            det *= piv;
            for r in c + 1..n {
                let f = a[(r, c)] / piv;
                for k in c..n {
                    let v = a[(c, k)];
                    a[(r, k)] -= f * v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        let scale = self.max_abs().max(T::min_positive_value());
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[(x, c)].abs().partial_cmp(&a[(y, c)].abs()).unwrap())
                .unwrap();
            if a[(p, c)].abs() <= scale * T::epsilon() {
                return None;
            }
            a.swap_rows(p, c);
            inv.swap_rows(p, c);
            let piv = a[(c, c)];
            for k in 0..n {
                a[(c, k)] /= piv;
                inv[(c, k)] /= piv;
            }
            for r in 0..n {
                if r != c {
                    let f = a[(r, c)];
                    if f != T::zero() {
                        for k in 0..n {
                            let (ack, ick) = (a[(c, k)], inv[(c, k)]);
                            a[(r, k)] -= f * ack;
                            inv[(r, k)] -= f * ick;
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(a * self.cols + k, b * self.cols + k);
        }
    }

    /// Matrix exponential by scaling and squaring of a Taylor series.
    pub fn expm(&self) -> Mat<T> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let norm = self.max_abs() * lit::<T>(n as f64);
        let mut s = 0i32;
        let mut scaled = self.clone();
        let half = lit::<T>(0.5);
        let mut nn = norm;
        while nn > half {
            nn = nn * half;
            s += 1;
        }
        if s > 0 {
            scaled = scaled.scale(lit::<T>(0.5f64.powi(s)));
        }
        let mut term = Mat::identity(n);
        let mut sum = Mat::identity(n);
        for k in 1..=18 {
            term = term.mul(&scaled).scale(T::one() / lit::<T>(k as f64));
            sum = sum.add(&term);
        }
        for _ in 0..s {
            sum = sum.mul(&sum);
        }
        sum
    }

    pub fn cast<U: Real>(&self) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| lit::<U>(crate::scalar::to_f64(x))).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Rank-3 array with independent extents.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tensor3<T> {
    dims: [usize; 3],
    data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(a: usize, b: usize, c: usize) -> Self {
        Tensor3 {
            dims: [a, b, c],
            data: vec![T::zero(); a * b * c],
        }
    }

    /// Cube of extent `d` in every slot.
    pub fn cube(d: usize) -> Self {
        Tensor3::zeros(d, d, d)
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { dims, data }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, o: &Tensor3<T>) -> T {
        assert_eq!(self.dims, o.dims);
        self.data
            .iter()
            .zip(&o.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Nested `[i][j][k]` vectors, for serialization.
    pub fn to_nested(&self) -> Vec<Vec<Vec<T>>> {
        let [a, b, c] = self.dims;
        (0..a)
            .map(|i| (0..b).map(|j| (0..c).map(|k| self[(i, j, k)]).collect()).collect())
            .collect()
    }
}

impl<T> Index<(usize, usize, usize)> for Tensor3<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &T {
        let [_, b, c] = self.dims;
        &self.data[(i * b + j) * c + k]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Tensor3<T> {
    #[inline]
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut T {
        let [_, b, c] = self.dims;
        &mut self.data[(i * b + j) * c + k]
    }
}

/// Rank-4 array with independent extents.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tensor4<T> {
    dims: [usize; 4],
    data: Vec<T>,
}

impl<T: Real> Tensor4<T> {
    pub fn zeros(dims: [usize; 4]) -> Self {
        Tensor4 {
            dims,
            data: vec![T::zero(); dims.iter().product()],
        }
    }

    pub fn hypercube(d: usize) -> Self {
        Tensor4::zeros([d; 4])
    }

    pub fn from_fn(dims: [usize; 4], mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    for l in 0..dims[3] {
                        data.push(f(i, j, k, l));
                    }
                }
            }
        }
        Tensor4 { dims, data }
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, o: &Tensor4<T>) -> T {
        assert_eq!(self.dims, o.dims);
        self.data
            .iter()
            .zip(&o.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<T>>>> {
        let [a, b, c, d] = self.dims;
        (0..a)
            .map(|i| {
                (0..b)
                    .map(|j| (0..c).map(|k| (0..d).map(|l| self[(i, j, k, l)]).collect()).collect())
                    .collect()
            })
            .collect()
    }
}

impl<T> Index<(usize, usize, usize, usize)> for Tensor4<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &T {
        let [_, b, c, d] = self.dims;
        &self.data[((i * b + j) * c + k) * d + l]
    }
}

impl<T> IndexMut<(usize, usize, usize, usize)> for Tensor4<T> {
    #[inline]
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut T {
        let [_, b, c, d] = self.dims;
        &mut self.data[((i * b + j) * c + k) * d + l]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m = Mat::from_rows(&[vec![0.0, -2.0], vec![1.0, 0.0]]);
        let inv = m.inverse().unwrap();
        assert_eq!(inv, Mat::from_rows(&[vec![0.0, 1.0], vec![-0.5, 0.0]]));
        assert_eq!(m.det(), 2.0);
        let s = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(s.inverse().is_none());
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7f64;
        let a = Mat::from_rows(&[vec![0.0, -t], vec![t, 0.0]]);
        let e = a.expm();
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - t.sin()).abs() < 1e-14);
        let big = Mat::from_rows(&[vec![-3.0, 0.0], vec![0.0, 2.0]]).expm();
        assert!((big[(0, 0)] - (-3.0f64).exp()).abs() < 1e-14);
        assert!((big[(1, 1)] - 2.0f64.exp()).abs() < 1e-12);
    }
}
