//! Shared numeric plumbing: arbitrary-precision floats (MPFR via `rug`),
//! small dense matrices over `Float` and over exact `Rational`, and a
//! minimal complex type for polynomial root polishing.
//!
//! Matrix sizes here are tiny (at most r x (r+1) with r = (p-1)/2, p <= 101),
//! so everything is plain Gaussian elimination with partial pivoting.

use crate::error::{Error, Result};
use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::Complete;
use rug::{Float, Integer, Rational};

/// pi at the requested precision.
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// cos(2*pi*num/den) at the requested precision.
pub fn cos_two_pi_ratio(prec: u32, num: i64, den: i64) -> Float {
    let angle = pi(prec) * 2i32 * Rational::from((num, den));
    angle.cos()
}

/// 2^(-prec + slack), the tolerance scale used by zero-sum and backward-error
/// checks at a given working precision.
pub fn eps_at(prec: u32, slack: i32) -> Float {
    Float::with_val(prec, Float::i_exp(1, -(prec as i32) + slack))
}

// ---------------------------------------------------------------------------
// Dense Float matrices
// ---------------------------------------------------------------------------

/// Row-major dense matrix of `Float`s, all entries at the same precision.
#[derive(Debug, Clone)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub prec: u32,
    data: Vec<Float>,
}

impl Mat {
    pub fn zero(prec: u32, rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            prec,
            data: vec![Float::with_val(prec, 0); rows * cols],
        }
    }

    pub fn identity(prec: u32, n: usize) -> Mat {
        let mut m = Mat::zero(prec, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Float::with_val(prec, 1);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Float>(
        prec: u32,
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat {
            rows,
            cols,
            prec,
            data,
        }
    }

    pub fn from_rows(prec: u32, rows: &[Vec<Float>]) -> Mat {
        let cols = rows.first().map_or(0, Vec::len);
        Mat::from_fn(prec, rows.len(), cols, |i, j| {
            Float::with_val(prec, &rows[i][j])
        })
    }

    pub fn at(&self, i: usize, j: usize) -> &Float {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Float {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Float] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.prec, self.cols, self.rows, |i, j| {
            Float::with_val(self.prec, self.at(j, i))
        })
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix dimension mismatch");
        Mat::from_fn(self.prec, self.rows, other.cols, |i, j| {
            let mut acc = Float::with_val(self.prec, 0);
            for k in 0..self.cols {
                acc += (self.at(i, k) * other.at(k, j)).complete(self.prec);
            }
            acc
        })
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.prec, self.rows, self.cols, |i, j| {
            (self.at(i, j) - other.at(i, j)).complete(self.prec)
        })
    }

    pub fn scale(&self, c: &Float) -> Mat {
        Mat::from_fn(self.prec, self.rows, self.cols, |i, j| {
            (self.at(i, j) * c).complete(self.prec)
        })
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Float {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Float::with_val(self.prec, 1);
        for k in 0..n {
            let mut pivot = k;
            for i in (k + 1)..n {
                if a.at(i, k).clone().abs() > a.at(pivot, k).clone().abs() {
                    pivot = i;
                }
            }
            if a.at(pivot, k).is_zero() {
                return Float::with_val(self.prec, 0);
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = a.at(k, j).clone();
                    *a.at_mut(k, j) = a.at(pivot, j).clone();
                    *a.at_mut(pivot, j) = tmp;
                }
                det = -det;
            }
            det *= a.at(k, k);
            for i in (k + 1)..n {
                let factor = (a.at(i, k) / a.at(k, k)).complete(self.prec);
                for j in k..n {
                    let delta = (&factor * a.at(k, j)).complete(self.prec);
                    *a.at_mut(i, j) -= delta;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan with partial pivoting.
    pub fn inverse(&self) -> Result<Mat> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(self.prec, n);
        for k in 0..n {
            let mut pivot = k;
            for i in (k + 1)..n {
                if a.at(i, k).clone().abs() > a.at(pivot, k).clone().abs() {
                    pivot = i;
                }
            }
            if a.at(pivot, k).is_zero() {
                return Err(Error::Rank("singular matrix in inverse".into()));
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = a.at(k, j).clone();
                    *a.at_mut(k, j) = a.at(pivot, j).clone();
                    *a.at_mut(pivot, j) = tmp;
                    let tmp = inv.at(k, j).clone();
                    *inv.at_mut(k, j) = inv.at(pivot, j).clone();
                    *inv.at_mut(pivot, j) = tmp;
                }
            }
            let diag = a.at(k, k).clone();
            for j in 0..n {
                *a.at_mut(k, j) /= &diag;
                *inv.at_mut(k, j) /= &diag;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let factor = a.at(i, k).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let d = (&factor * a.at(k, j)).complete(self.prec);
                    *a.at_mut(i, j) -= d;
                    let d = (&factor * inv.at(k, j)).complete(self.prec);
                    *inv.at_mut(i, j) -= d;
                }
            }
        }
        Ok(inv)
    }

    /// Cholesky factor if the matrix is symmetric positive definite.
    pub fn cholesky(&self) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut l = Mat::zero(self.prec, n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = Float::with_val(self.prec, self.at(i, j));
                for k in 0..j {
                    sum -= (l.at(i, k) * l.at(j, k)).complete(self.prec);
                }
                if i == j {
                    if sum <= 0 {
                        return None;
                    }
                    *l.at_mut(i, j) = sum.sqrt();
                } else {
                    *l.at_mut(i, j) = sum / l.at(j, j);
                }
            }
        }
        Some(l)
    }

    pub fn max_abs(&self) -> Float {
        let mut m = Float::with_val(self.prec, 0);
        for v in &self.data {
            let a = v.clone().abs();
            if a > m {
                m = a;
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Exact rational matrices
// ---------------------------------------------------------------------------

/// Row-major dense matrix of exact `Rational`s.
#[derive(Debug, Clone, PartialEq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rational>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> QMat {
        QMat {
            rows,
            cols,
            data: vec![Rational::new(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> QMat {
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Rational::from(1);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Rational>(rows: usize, cols: usize, mut f: F) -> QMat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QMat { rows, cols, data }
    }

    pub fn from_integers(m: &[Vec<Integer>]) -> QMat {
        let cols = m.first().map_or(0, Vec::len);
        QMat::from_fn(m.len(), cols, |i, j| Rational::from(&m[i][j]))
    }

    pub fn at(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "matrix dimension mismatch");
        QMat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Rational::new();
            for k in 0..self.cols {
                acc += (self.at(i, k) * other.at(k, j)).complete();
            }
            acc
        })
    }

    /// Exact determinant by fraction-free-enough rational elimination.
    pub fn det(&self) -> Rational {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::from(1);
        for k in 0..n {
            let mut pivot = None;
            for i in k..n {
                if *a.at(i, k) != 0 {
                    pivot = Some(i);
                    break;
                }
            }
            let Some(p) = pivot else {
                return Rational::new();
            };
            if p != k {
                for j in 0..n {
                    let tmp = a.at(k, j).clone();
                    *a.at_mut(k, j) = a.at(p, j).clone();
                    *a.at_mut(p, j) = tmp;
                }
                det = -det;
            }
            det *= a.at(k, k);
            for i in (k + 1)..n {
                let factor = (a.at(i, k) / a.at(k, k)).complete();
                if factor == 0 {
                    continue;
                }
                for j in k..n {
                    let d = (&factor * a.at(k, j)).complete();
                    *a.at_mut(i, j) -= d;
                }
            }
        }
        det
    }

    /// Exact inverse; `Rank` error if singular.
    pub fn inverse(&self) -> Result<QMat> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for k in 0..n {
            let mut pivot = None;
            for i in k..n {
                if *a.at(i, k) != 0 {
                    pivot = Some(i);
                    break;
                }
            }
            let Some(p) = pivot else {
                return Err(Error::Rank("singular rational matrix".into()));
            };
            if p != k {
                for j in 0..n {
                    let tmp = a.at(k, j).clone();
                    *a.at_mut(k, j) = a.at(p, j).clone();
                    *a.at_mut(p, j) = tmp;
                    let tmp = inv.at(k, j).clone();
                    *inv.at_mut(k, j) = inv.at(p, j).clone();
                    *inv.at_mut(p, j) = tmp;
                }
            }
            let diag = a.at(k, k).clone();
            for j in 0..n {
                *a.at_mut(k, j) /= &diag;
                *inv.at_mut(k, j) /= &diag;
            }
            for i in 0..n {
                if i == k || *a.at(i, k) == 0 {
                    continue;
                }
                let factor = a.at(i, k).clone();
                for j in 0..n {
                    let d = (&factor * a.at(k, j)).complete();
                    *a.at_mut(i, j) -= d;
                    let d = (&factor * inv.at(k, j)).complete();
                    *inv.at_mut(i, j) -= d;
                }
            }
        }
        Ok(inv)
    }

    pub fn to_mat(&self, prec: u32) -> Mat {
        Mat::from_fn(prec, self.rows, self.cols, |i, j| {
            Float::with_val(prec, self.at(i, j))
        })
    }
}

// ---------------------------------------------------------------------------
// Complex floats for root finding
// ---------------------------------------------------------------------------

/// Complex number over `Float`; just enough for Durand-Kerner iteration and
/// polynomial evaluation. MPC is not linked, so this stays hand-rolled.
#[derive(Debug, Clone)]
pub struct Cplx {
    pub re: Float,
    pub im: Float,
}

impl Cplx {
    pub fn new(re: Float, im: Float) -> Cplx {
        Cplx { re, im }
    }

    pub fn zero(prec: u32) -> Cplx {
        Cplx::new(Float::with_val(prec, 0), Float::with_val(prec, 0))
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Cplx {
        Cplx::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn add(&self, o: &Cplx) -> Cplx {
        let p = self.prec();
        Cplx::new((&self.re + &o.re).complete(p), (&self.im + &o.im).complete(p))
    }

    pub fn sub(&self, o: &Cplx) -> Cplx {
        let p = self.prec();
        Cplx::new((&self.re - &o.re).complete(p), (&self.im - &o.im).complete(p))
    }

    pub fn mul(&self, o: &Cplx) -> Cplx {
        let p = self.prec();
        let re = (&self.re * &o.re).complete(p) - (&self.im * &o.im).complete(p);
        let im = (&self.re * &o.im).complete(p) + (&self.im * &o.re).complete(p);
        Cplx::new(re, im)
    }

    pub fn div(&self, o: &Cplx) -> Cplx {
        let p = self.prec();
        let denom = o.norm_sqr();
        let re = ((&self.re * &o.re).complete(p) + (&self.im * &o.im).complete(p)) / &denom;
        let im = ((&self.im * &o.re).complete(p) - (&self.re * &o.im).complete(p)) / &denom;
        Cplx::new(re, im)
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        self.re.clone().square() + Float::with_val(p, &self.im).square()
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mat_inverse_roundtrip() {
        let prec = 128;
        let m = Mat::from_fn(prec, 3, 3, |i, j| {
            Float::with_val(prec, (i * 3 + j) as i32 + if i == j { 5 } else { 0 })
        });
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                let diff = id.at(i, j) - Float::with_val(prec, expect);
                assert!(diff.abs() < 1e-30, "entry ({i},{j}) off");
            }
        }
    }

    #[test]
    fn qmat_det_and_inverse() {
        let m = QMat::from_fn(2, 2, |i, j| Rational::from(((i * 2 + j + 1) as i64, 1)));
        // [[1,2],[3,4]] has det -2
        assert_eq!(m.det(), Rational::from(-2));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(2));
    }

    #[test]
    fn qmat_singular_rejected() {
        let m = QMat::from_fn(2, 2, |_, j| Rational::from(j as i64));
        assert!(m.inverse().is_err());
        assert_eq!(m.det(), Rational::new());
    }

    #[test]
    fn cplx_division() {
        let a = Cplx::from_f64(96, 3.0, 4.0);
        let b = Cplx::from_f64(96, 1.0, -2.0);
        let q = a.div(&b);
        let back = q.mul(&b);
        assert!((back.re - 3.0f64).abs() < 1e-25);
        assert!((back.im - 4.0f64).abs() < 1e-25);
    }

    #[test]
    fn cos_ratio_matches_f64() {
        let c = cos_two_pi_ratio(128, 1, 5);
        let expect = (2.0 * std::f64::consts::PI / 5.0).cos();
        assert!((c.to_f64() - expect).abs() < 1e-14);
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let prec = 96;
        let mut m = Mat::identity(prec, 2);
        *m.at_mut(1, 1) = Float::with_val(prec, -1);
        assert!(m.cholesky().is_none());
        assert!(Mat::identity(prec, 2).cholesky().is_some());
    }
}
