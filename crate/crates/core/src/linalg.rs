//! Dense complex matrices, just enough for 2^k-dimensional maps.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Unit complex number `e^{i theta}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Normalize an angle into `[0, 2pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = theta.rem_euclid(tau);
    // rem_euclid can round up to exactly tau for tiny negative inputs
    if r >= tau {
        0.0
    } else {
        r + 0.0
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = d;
        }
        m
    }

    /// Build from a row-major buffer. Returns `None` if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    /// Build from nested rows. Returns `None` for ragged input.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Option<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return None;
        }
        Some(Self { rows: nrows, cols: ncols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[C64]) {
        assert_eq!(values.len(), self.rows, "column length mismatch");
        for (r, &v) in values.iter().enumerate() {
            self.set(r, c, v);
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * factor).collect() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        out.set(r1 * other.rows + r2, c1 * other.cols + c2, a * other.get(r2, c2));
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise distance `max |a_ij - b_ij|`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) < tol
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs.get(k, c);
                }
            }
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_adjoint() {
        let h = Matrix::from_rows(vec![vec![ONE, ONE], vec![ONE, -ONE]]).unwrap().scale(C64::new(0.5f64.sqrt(), 0.0));
        let hh = &h * &h.adjoint();
        assert!(hh.approx_eq(&Matrix::identity(2), 1e-15));
    }

    #[test]
    fn kron_ordering_is_left_major() {
        let x = Matrix::from_rows(vec![vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        let id = Matrix::identity(2);
        // X on the left factor flips the most significant bit
        let m = x.kron(&id);
        assert_eq!(m.get(2, 0), ONE);
        assert_eq!(m.get(3, 1), ONE);
        assert_eq!(m.get(1, 0), ZERO);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Matrix::from_rows(vec![vec![ONE], vec![ONE, ONE]]).is_none());
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(0.0), 0.0);
        assert!((normalize_angle(-1.0) - (std::f64::consts::TAU - 1.0)).abs() < 1e-15);
        assert!(normalize_angle(-1e-300) < std::f64::consts::TAU);
    }
}
