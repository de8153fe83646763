//! Small dense 3x3 matrices over exact rings.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::real::{to_f64, Rational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat3<T> {
    rows: [[T; 3]; 3],
}

pub type QMat3 = Mat3<Rational>;
pub type IMat3 = Mat3<BigInt>;

impl<T> Mat3<T> {
    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Mat3 { rows }
    }

    pub fn rows(&self) -> &[[T; 3]; 3] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.rows[i][j]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat3<U> {
        Mat3::from_rows(std::array::from_fn(|i| std::array::from_fn(|j| f(&self.rows[i][j]))))
    }
}

impl<T: Clone> Mat3<T> {
    pub fn col(&self, j: usize) -> [T; 3] {
        std::array::from_fn(|i| self.rows[i][j].clone())
    }

    pub fn from_cols(cols: [[T; 3]; 3]) -> Self {
        Mat3::from_rows(std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].clone())))
    }

    pub fn transpose(&self) -> Self {
        Mat3::from_cols(self.rows.clone())
    }
}

impl<T> Mat3<T>
where
    T: Clone + Zero + One + PartialEq,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    pub fn identity() -> Self {
        Mat3::from_rows(std::array::from_fn(|i| std::array::from_fn(|j| if i == j { T::one() } else { T::zero() })))
    }

    pub fn diag(d: [T; 3]) -> Self {
        Mat3::from_rows(std::array::from_fn(|i| std::array::from_fn(|j| if i == j { d[i].clone() } else { T::zero() })))
    }

    pub fn det(&self) -> T {
        let r = &self.rows;
        let m0 = &(&r[1][1] * &r[2][2]) - &(&r[1][2] * &r[2][1]);
        let m1 = &(&r[1][0] * &r[2][2]) - &(&r[1][2] * &r[2][0]);
        let m2 = &(&r[1][0] * &r[2][1]) - &(&r[1][1] * &r[2][0]);
        &(&(&r[0][0] * &m0) - &(&r[0][1] * &m1)) + &(&r[0][2] * &m2)
    }

    pub fn mul_vec(&self, v: &[T; 3]) -> [T; 3] {
        std::array::from_fn(|i| {
            let r = &self.rows[i];
            &(&(&r[0] * &v[0]) + &(&r[1] * &v[1])) + &(&r[2] * &v[2])
        })
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        Mat3::from_cols(std::array::from_fn(|j| self.mul_vec(&other.col(j))))
    }

    /// Adjugate (transpose of the cofactor matrix).
    pub fn adjugate(&self) -> Self {
        let r = &self.rows;
        let cof = |i: usize, j: usize| {
            let (i0, i1) = ((i + 1) % 3, (i + 2) % 3);
            let (j0, j1) = ((j + 1) % 3, (j + 2) % 3);
            &(&r[i0][j0] * &r[i1][j1]) - &(&r[i0][j1] * &r[i1][j0])
        };
        // Cyclic index choice folds the sign of each cofactor in.
        Mat3::from_rows(std::array::from_fn(|i| std::array::from_fn(|j| cof(j, i))))
    }
}

impl<T> Neg for &Mat3<T>
where
    for<'a> &'a T: Neg<Output = T>,
{
    type Output = Mat3<T>;
    fn neg(self) -> Mat3<T> {
        self.map(|x| -x)
    }
}

impl QMat3 {
    /// Exact inverse, or `None` when singular.
    pub fn inverse(&self) -> Option<QMat3> {
        let det = self.det();
        if det.is_zero() {
            return None;
        }
        Some(self.adjugate().map(|x| x / &det))
    }

    pub fn is_integral(&self) -> bool {
        self.rows.iter().flatten().all(|x| x.is_integer())
    }

    pub fn to_f64(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| to_f64(&self.rows[i][j])))
    }
}

impl IMat3 {
    pub fn to_rational(&self) -> QMat3 {
        self.map(|x| Rational::from_integer(x.clone()))
    }

    pub fn from_i64(rows: [[i64; 3]; 3]) -> IMat3 {
        Mat3::from_rows(rows).map(|&x| BigInt::from(x))
    }
}

impl fmt::Debug for QMat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_f64().iter()).finish()
    }
}

impl fmt::Debug for IMat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        f.debug_list().entries(rows.iter()).finish()
    }
}

impl fmt::Display for QMat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_f64() {
            writeln!(f, "[{:>14.6} {:>14.6} {:>14.6}]", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

impl fmt::Display for IMat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            writeln!(f, "[{:>8} {:>8} {:>8}]", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}
