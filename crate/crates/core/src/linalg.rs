//! Fixed-size 3-vectors and 3x3 matrices, generic over [`Scalar`].

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec3<T = f64>(pub [T; 3]);

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T = f64>(pub [[T; 3]; 3]);

impl<T: Scalar> Vec3<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self([a, b, c])
    }

    pub fn zeros() -> Self {
        Self([T::zero(); 3])
    }

    pub fn from_f64(v: Vec3<f64>) -> Self {
        v.map(T::from_f64)
    }

    pub fn map<U, F: Fn(T) -> U>(self, f: F) -> Vec3<U> {
        let [a, b, c] = self.0;
        Vec3([f(a), f(b), f(c)])
    }

    pub fn zip_map<U, F: Fn(T, T) -> U>(self, other: Self, f: F) -> Vec3<U> {
        Vec3([
            f(self.0[0], other.0[0]),
            f(self.0[1], other.0[1]),
            f(self.0[2], other.0[2]),
        ])
    }

    pub fn dot(self, other: Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// Component-wise product.
    pub fn hadamard(self, other: Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(self, s: T) -> Self {
        self.map(|a| a * s)
    }

    pub fn re(self) -> Vec3<f64> {
        self.map(|a| a.re())
    }
}

impl Vec3<f64> {
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl<T: Scalar> Mul<f64> for Vec3<T> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.map(|a| a * rhs)
    }
}

impl<T: Scalar> Mat3<T> {
    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Self(rows)
    }

    pub fn zeros() -> Self {
        Self([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag(Vec3([T::one(); 3]))
    }

    pub fn diag(d: Vec3<T>) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = d.0[i];
        }
        m
    }

    pub fn from_f64(m: Mat3<f64>) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = T::from_f64(m.0[i][j]);
            }
        }
        out
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3(self.0[i])
    }

    pub fn diagonal(&self) -> Vec3<T> {
        Vec3([self.0[0][0], self.0[1][1], self.0[2][2]])
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3([self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v)])
    }

    /// `selfᵀ v` without materializing the transpose.
    pub fn tr_mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[1][0] * v.0[1] + m[2][0] * v.0[2],
            m[0][1] * v.0[0] + m[1][1] * v.0[1] + m[2][1] * v.0[2],
            m[0][2] * v.0[0] + m[1][2] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = T::zero();
                for k in 0..3 {
                    acc += self.0[i][k] * other.0[k][j];
                }
                out.0[i][j] = acc;
            }
        }
        out
    }

    pub fn add_mat(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += other.0[i][j];
            }
        }
        out
    }

    pub fn determinant(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

impl Mat3<f64> {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl<T> Index<(usize, usize)> for Mat3<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat3<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}
