//! Lattice shapes from unit logs: Gram matrices, the rank-2 upper-half-plane
//! map, SL2(Z) fundamental-domain reduction, and the regulator / ideal-norm
//! identities that tie a log lattice back to the trace form.

use crate::error::{Error, Result};
use crate::numeric::{eps_at, Mat, QMat};
use crate::traceform::TraceFormData;
use rug::ops::CompleteRound;
use rug::{Float, Integer, Rational};

/// Point x + iy in the upper half plane (y > 0).
#[derive(Debug, Clone)]
pub struct UHPPoint {
    pub x: Float,
    pub y: Float,
}

impl UHPPoint {
    pub fn new(x: Float, y: Float) -> Result<UHPPoint> {
        if !(y > 0) {
            return Err(Error::Domain(format!("y must be positive, got {y}")));
        }
        Ok(UHPPoint { x, y })
    }

    pub fn prec(&self) -> u32 {
        self.x.prec()
    }
}

/// Symmetric positive definite Gram matrix.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub mat: Mat,
}

impl GramMatrix {
    pub fn new(mat: Mat) -> Result<GramMatrix> {
        if mat.rows != mat.cols {
            return Err(Error::Validation("Gram matrix must be square".into()));
        }
        let scale = mat.max_abs().max(&Float::with_val(mat.prec, 1));
        let tol = eps_at(mat.prec, 32) * scale;
        for i in 0..mat.rows {
            for j in 0..i {
                let d = (mat.at(i, j) - mat.at(j, i)).complete(mat.prec).abs();
                if d > tol {
                    return Err(Error::Validation(format!(
                        "Gram matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if mat.cholesky().is_none() {
            return Err(Error::Domain("Gram matrix is not positive definite".into()));
        }
        Ok(GramMatrix { mat })
    }

    pub fn rank(&self) -> usize {
        self.mat.rows
    }
}

/// Unit-lattice basis in log coordinates: r rows of length r+1, each row
/// summing to zero.
#[derive(Debug, Clone)]
pub struct LogMatrix {
    pub rows: Mat,
}

impl LogMatrix {
    pub fn new(rows: Mat) -> Result<LogMatrix> {
        if rows.cols != rows.rows + 1 {
            return Err(Error::Validation(format!(
                "log matrix must be r x (r+1), got {}x{}",
                rows.rows, rows.cols
            )));
        }
        let prec = rows.prec;
        let scale = rows.max_abs().max(&Float::with_val(prec, 1));
        let tol = eps_at(prec, 16) * scale;
        for i in 0..rows.rows {
            let mut sum = Float::with_val(prec, 0);
            for j in 0..rows.cols {
                sum += rows.at(i, j);
            }
            if sum.abs() > tol {
                return Err(Error::Validation(format!("row {i} does not sum to zero")));
            }
        }
        let gram = rows.mul(&rows.transpose());
        if gram.cholesky().is_none() {
            return Err(Error::Rank("log rows are linearly dependent".into()));
        }
        Ok(LogMatrix { rows })
    }

    pub fn rank(&self) -> usize {
        self.rows.rows
    }

    pub fn prec(&self) -> u32 {
        self.rows.prec
    }

    /// Gram matrix L L^T of the row vectors.
    pub fn gram(&self) -> Result<GramMatrix> {
        GramMatrix::new(self.rows.mul(&self.rows.transpose()))
    }
}

/// The quintic log rows (a0, a1, -a0-a1) and (a1, a0-a1, -a0) of the basis
/// {u0, u1 = (sigma + sigma^-1) u0}.
pub fn quintic_log_rows(a0: &Float, a1: &Float) -> Result<LogMatrix> {
    let prec = a0.prec().max(a1.prec());
    let norm_form = quintic_norm_form(a0, a1);
    if a0.is_zero() && a1.is_zero() {
        return Err(Error::Rank("(a0, a1) = (0, 0) spans no lattice".into()));
    }
    if norm_form.is_zero() {
        return Err(Error::Rank(
            "norm form a0^2 - a0*a1 - a1^2 vanishes; rows are dependent".into(),
        ));
    }
    let row0 = vec![
        Float::with_val(prec, a0),
        Float::with_val(prec, a1),
        -(a0 + a1).complete(prec),
    ];
    let row1 = vec![
        Float::with_val(prec, a1),
        (a0 - a1).complete(prec),
        -Float::with_val(prec, a0),
    ];
    LogMatrix::new(Mat::from_rows(prec, &[row0, row1]))
}

/// N(a0, a1) = a0^2 - a0*a1 - a1^2, the norm form of Z[zeta_5 + zeta_5^-1].
pub fn quintic_norm_form(a0: &Float, a1: &Float) -> Float {
    let prec = a0.prec().max(a1.prec());
    a0.clone().square() - (a0 * a1).complete(prec) - Float::with_val(prec, a1).square()
}

/// Closed-form Gram matrix of {-Log(u1), Log(u0)} for the quintic case.
pub fn quintic_gram(a0: &Float, a1: &Float) -> Result<GramMatrix> {
    let prec = a0.prec().max(a1.prec());
    if quintic_norm_form(a0, a1).is_zero() {
        return Err(Error::Rank("norm form vanishes; Gram is singular".into()));
    }
    let sq0 = a0.clone().square();
    let sq1 = Float::with_val(prec, a1).square();
    let cross = (a0 * a1).complete(prec);
    let g00 = (&sq0 - &cross).complete(prec) + &sq1;
    let g00 = g00 * 2u32;
    let g01 = (&sq1 - &sq0).complete(prec) - (&cross * Float::with_val(prec, 3));
    let g11 = (&sq0 + &cross).complete(prec) + &sq1;
    let g11 = g11 * 2u32;
    let mat = Mat::from_rows(
        prec,
        &[
            vec![g00, g01.clone()],
            vec![g01, g11],
        ],
    );
    GramMatrix::new(mat)
}

/// Map a rank-2 Gram matrix to the upper half plane:
/// x = G[0,1]/G[0,0], y = sqrt(G[1,1]/G[0,0] - x^2).
pub fn uhp_from_gram(g: &GramMatrix) -> Result<UHPPoint> {
    if g.rank() != 2 {
        return Err(Error::Validation("UHP map needs a 2x2 Gram matrix".into()));
    }
    let prec = g.mat.prec;
    let x = (g.mat.at(0, 1) / g.mat.at(0, 0)).complete(prec);
    let y_sq = (g.mat.at(1, 1) / g.mat.at(0, 0)).complete(prec) - x.clone().square();
    if !(y_sq > 0) {
        return Err(Error::Domain(
            "Gram matrix is not positive definite; UHP point undefined".into(),
        ));
    }
    UHPPoint::new(x, y_sq.sqrt())
}

/// One step of the reduction word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReduceMove {
    /// z -> z + n
    Translate(Integer),
    /// z -> -1/z
    Invert,
}

impl std::fmt::Display for ReduceMove {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReduceMove::Translate(n) => write!(f, "T^{n}"),
            ReduceMove::Invert => write!(f, "S"),
        }
    }
}

/// Reduce z into the SL2(Z) fundamental domain {|x| <= 1/2, x^2 + y^2 >= 1}
/// by alternating integer translation and inversion z -> -1/z.
///
/// Tie-breaking is deterministic: x = -1/2 is normalized to x = +1/2, and no
/// inversion is applied on (or within rounding distance of) the unit circle.
pub fn reduce_fundamental(z: &UHPPoint) -> (UHPPoint, Vec<ReduceMove>) {
    let prec = z.prec();
    let mut x = z.x.clone();
    let mut y = z.y.clone();
    let mut word = Vec::new();
    let half = Float::with_val(prec, Rational::from((1, 2)));
    let neg_half = -half.clone();
    // points within this distance of |z| = 1 count as on the boundary
    let boundary = eps_at(prec, 24);
    loop {
        // translate x into (-1/2, 1/2]
        let mut shift = -(x.clone() + &half).floor();
        x += &shift;
        if x == neg_half {
            x += 1;
            shift += 1;
        }
        if shift != 0 {
            word.push(ReduceMove::Translate(
                shift.to_integer().expect("finite shift"),
            ));
        }
        let norm = x.clone().square() + y.clone().square();
        let defect = Float::with_val(prec, 1) - &norm;
        if defect > boundary {
            // strictly inside the unit circle: invert
            x = -(x / &norm);
            y /= &norm;
            word.push(ReduceMove::Invert);
        } else {
            break;
        }
    }
    (UHPPoint { x, y }, word)
}

/// The GL2(Z) class of a reduced point: the point and its mirror (-x, y),
/// re-reduced. On the reflection-fixed locus the two coincide.
pub fn gl2_orbit_pair(z: &UHPPoint) -> (UHPPoint, UHPPoint) {
    let mirror_raw = UHPPoint {
        x: -z.x.clone(),
        y: z.y.clone(),
    };
    let (mirror, _) = reduce_fundamental(&mirror_raw);
    (z.clone(), mirror)
}

/// Regulator: |det| of the r x r minor of L obtained by deleting one column.
/// All r+1 minors agree in absolute value for zero-sum rows; this is asserted
/// at the working precision.
pub fn regulator_from_logs(l: &LogMatrix) -> Result<Float> {
    let prec = l.prec();
    let r = l.rank();
    let mut dets = Vec::with_capacity(r + 1);
    for drop_col in 0..=r {
        let minor = Mat::from_fn(prec, r, r, |i, j| {
            let col = if j < drop_col { j } else { j + 1 };
            Float::with_val(prec, l.rows.at(i, col))
        });
        dets.push(minor.det().abs());
    }
    let reg = dets[r].clone();
    if reg.is_zero() {
        return Err(Error::Rank("log matrix is rank deficient".into()));
    }
    let scale = l.rows.max_abs().max(&Float::with_val(prec, 1));
    let mut tol = eps_at(prec, 32);
    for _ in 0..r {
        tol *= &scale;
    }
    tol *= (r + 1) as u32;
    for d in &dets {
        if (d - &reg).complete(prec).abs() > tol {
            return Err(Error::Validation(
                "column minors disagree; rows do not sum to zero".into(),
            ));
        }
    }
    Ok(reg)
}

/// N(a): |det X| where X solves X * G~ = L. Uses the exact rational
/// right-inverse G~^T (G~ G~^T)^-1, so only L contributes float error.
pub fn ideal_norm_from_logs(l: &LogMatrix, tf: &TraceFormData) -> Result<Float> {
    let r = tf.config.r();
    if l.rank() != r {
        return Err(Error::Validation(format!(
            "log matrix rank {} does not match r = {r}",
            l.rank()
        )));
    }
    let prec = l.prec();
    let gtilde = QMat::from_integers(&tf.gtilde);
    let gunit = QMat::from_integers(&tf.gunit);
    let right_inverse = gtilde.transpose().mul(&gunit.inverse()?);
    let x = l.rows.mul(&right_inverse.to_mat(prec));
    let det = x.det().abs();
    if det.is_zero() {
        return Err(Error::Rank("ideal-norm solve is rank deficient".into()));
    }
    Ok(det)
}

/// Regulator through the ideal norm: N(a) * det(G).
pub fn regulator_via_ideal_norm(l: &LogMatrix, tf: &TraceFormData) -> Result<Float> {
    let n = ideal_norm_from_logs(l, tf)?;
    Ok(n * Float::with_val(l.prec(), &tf.det_g()))
}
