//! The embedding matrix P of Q+, the conjugated diagonal torus P T P^-1,
//! ideal-class translates, orbit sampling, and an orbit-membership solver.
//!
//! Conjugating by P diagonalizes the torus action: with C = P^-1 G_unit P^-T
//! and D = (MP)^-1 G_target (MP)^-T, a target lies on the orbit exactly when
//! D_ij = t_i t_j C_ij for some diagonal t, which the solver reads off from
//! the diagonal ratios and the signs of the first row.

use crate::error::{Error, Result};
use crate::lattice::GramMatrix;
use crate::numeric::{cos_two_pi_ratio, Mat, QMat};
use crate::realcyclo::PrimeConfig;
use rug::ops::CompleteRound;
use rug::Float;
use std::collections::{HashSet, VecDeque};

/// P: rows are the real embeddings of the basis B = [1, eta_1, ...,
/// eta_{r-1}], so P[k][i-1] = j_i(B_k) and row 0 is all ones.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub config: PrimeConfig,
    pub mat: Mat,
}

pub fn embedding_matrix(config: PrimeConfig, precision: u32) -> Result<EmbeddingMatrix> {
    if precision < 64 {
        return Err(Error::Precision(format!(
            "embedding precision must be >= 64 bits, got {precision}"
        )));
    }
    let r = config.r();
    let p = config.p() as i64;
    let mat = Mat::from_fn(precision, r, r, |k, i| {
        if k == 0 {
            Float::with_val(precision, 1)
        } else {
            cos_two_pi_ratio(precision, (i as i64 + 1) * k as i64, p) * 2u32
        }
    });
    Ok(EmbeddingMatrix { config, mat })
}

/// Rational change-of-basis matrix M sending B to an ideal basis B_a.
#[derive(Debug, Clone)]
pub struct IdealBasisMatrix {
    pub mat: QMat,
}

impl IdealBasisMatrix {
    pub fn new(mat: QMat) -> Result<IdealBasisMatrix> {
        if mat.rows != mat.cols {
            return Err(Error::Validation("ideal basis matrix must be square".into()));
        }
        if mat.det() == 0 {
            return Err(Error::Rank("ideal basis matrix is singular".into()));
        }
        Ok(IdealBasisMatrix { mat })
    }

    pub fn identity(r: usize) -> IdealBasisMatrix {
        IdealBasisMatrix {
            mat: QMat::identity(r),
        }
    }
}

/// Diagonal torus element: r nonzero reals.
#[derive(Debug, Clone)]
pub struct TorusPoint {
    pub t: Vec<Float>,
}

impl TorusPoint {
    pub fn new(t: Vec<Float>) -> Result<TorusPoint> {
        if t.iter().any(Float::is_zero) {
            return Err(Error::Validation("torus point entries must be nonzero".into()));
        }
        Ok(TorusPoint { t })
    }
}

/// The Gram matrix (M P diag(t) P^-1) G_unit (M P diag(t) P^-1)^T.
pub fn orbit_point(
    gunit: &GramMatrix,
    p: &EmbeddingMatrix,
    t: &TorusPoint,
    m: &IdealBasisMatrix,
) -> Result<GramMatrix> {
    let r = p.config.r();
    if gunit.rank() != r || t.t.len() != r || m.mat.rows != r {
        return Err(Error::Validation("dimension mismatch in orbit_point".into()));
    }
    let prec = p.mat.prec;
    let p_inv = p.mat.inverse()?;
    let mut diag = Mat::zero(prec, r, r);
    for i in 0..r {
        *diag.at_mut(i, i) = Float::with_val(prec, &t.t[i]);
    }
    let x = m.mat.to_mat(prec).mul(&p.mat).mul(&diag).mul(&p_inv);
    GramMatrix::new(x.mul(&gunit.mat).mul(&x.transpose()))
}

/// A recovered torus point with its membership residual.
#[derive(Debug, Clone)]
pub struct Membership {
    pub t: TorusPoint,
    pub residual: Float,
}

/// Outcome of the membership solve: either a torus point (up to global scale
/// and coordinated sign flips with t_1 > 0), or a reject with the reason.
#[derive(Debug, Clone)]
pub enum MembershipOutcome {
    OnOrbit(Membership),
    Rejected { reason: String, residual: Option<Float> },
}

impl MembershipOutcome {
    pub fn membership(&self) -> Option<&Membership> {
        match self {
            MembershipOutcome::OnOrbit(m) => Some(m),
            MembershipOutcome::Rejected { .. } => None,
        }
    }
}

/// Decide whether G_target = X G_unit X^T for some X = M P diag(t) P^-1.
pub fn orbit_membership(
    gtarget: &GramMatrix,
    gunit: &GramMatrix,
    p: &EmbeddingMatrix,
    m: &IdealBasisMatrix,
    tol: &Float,
) -> Result<MembershipOutcome> {
    let r = p.config.r();
    if gtarget.rank() != r || gunit.rank() != r || m.mat.rows != r {
        return Err(Error::Validation("dimension mismatch in orbit_membership".into()));
    }
    let prec = p.mat.prec;
    let p_inv = p.mat.inverse()?;
    let c = p_inv.mul(&gunit.mat).mul(&p_inv.transpose());
    let mp_inv = m.mat.to_mat(prec).mul(&p.mat).inverse()?;
    let d_raw = mp_inv.mul(&gtarget.mat).mul(&mp_inv.transpose());

    // normalize to det D = det C; shapes are defined up to scaling
    let det_c = c.det();
    let det_d = d_raw.det();
    if !(det_d > 0) || !(det_c > 0) {
        return Ok(MembershipOutcome::Rejected {
            reason: "conjugated Gram is not positive definite".into(),
            residual: None,
        });
    }
    let scale = (det_c / det_d).root(r as u32);
    let d = d_raw.scale(&scale);

    // |t_i| from the diagonal ratios
    let mut t = Vec::with_capacity(r);
    for i in 0..r {
        let ratio = (d.at(i, i) / c.at(i, i)).complete(prec);
        if !(ratio > 0) {
            return Ok(MembershipOutcome::Rejected {
                reason: format!("diagonal ratio D[{i}][{i}]/C[{i}][{i}] is not positive"),
                residual: None,
            });
        }
        t.push(ratio.sqrt());
    }

    // signs from the first row, with s_1 fixed to +1
    let d_scale = d.max_abs();
    let near_zero = (tol * &d_scale).complete(prec);
    for j in 1..r {
        let c1j = c.at(0, j);
        let expected = (&t[0] * &t[j]).complete(prec) * c1j;
        if d.at(0, j).clone().abs() < near_zero {
            if expected.clone().abs() >= near_zero {
                return Ok(MembershipOutcome::Rejected {
                    reason: format!(
                        "D[0][{j}] is near zero but the torus model predicts magnitude {}",
                        expected.abs()
                    ),
                    residual: None,
                });
            }
            // sign unconstrained by this entry; keep +
        } else if (d.at(0, j) * &expected).complete(prec) < 0 {
            t[j] = -t[j].clone();
        }
    }

    // residual: max |t_i t_j C_ij - D_ij| / max |D|
    let mut worst = Float::with_val(prec, 0);
    for i in 0..r {
        for j in 0..r {
            let model = (&t[i] * &t[j]).complete(prec) * c.at(i, j);
            let diff = (model - d.at(i, j)).abs();
            if diff > worst {
                worst = diff;
            }
        }
    }
    let residual = worst / d_scale;
    if residual < *tol {
        Ok(MembershipOutcome::OnOrbit(Membership {
            t: TorusPoint::new(t)?,
            residual,
        }))
    } else {
        Ok(MembershipOutcome::Rejected {
            reason: "residual exceeds tolerance".into(),
            residual: Some(residual),
        })
    }
}

/// A hit from the GL_r(Z)-equivariant search.
#[derive(Debug, Clone)]
pub struct OrbitSearchHit {
    /// Index into the supplied ideal representative list.
    pub rep_index: usize,
    /// The unimodular twist that was applied to the target.
    pub unimodular: Vec<Vec<i64>>,
    pub membership: Membership,
}

/// Outcome of the bounded search over unimodular twists and ideal classes.
#[derive(Debug, Clone)]
pub enum OrbitSearchOutcome {
    Found(OrbitSearchHit),
    /// Exhausted the bounded enumeration; NOT a certificate of non-membership.
    NotFoundWithinBound,
}

/// Default word length for the unimodular breadth-first search.
pub const DEFAULT_WORD_LENGTH: usize = 6;

/// Enumerate unimodular matrices as breadth-first products of elementary,
/// permutation, and sign generators, in a fixed canonical order. Entries are
/// capped by `entry_bound` and words by `max_word_len`.
pub fn unimodular_words(r: usize, entry_bound: i64, max_word_len: usize) -> Vec<Vec<Vec<i64>>> {
    let identity: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..r).map(|j| i64::from(i == j)).collect())
        .collect();
    let mut gens: Vec<Vec<Vec<i64>>> = Vec::new();
    // elementary row additions E_ij(+-1)
    for i in 0..r {
        for j in 0..r {
            if i == j {
                continue;
            }
            for s in [1i64, -1] {
                let mut g = identity.clone();
                g[i][j] = s;
                gens.push(g);
            }
        }
    }
    // transpositions
    for i in 0..r {
        for j in (i + 1)..r {
            let mut g = identity.clone();
            g[i][i] = 0;
            g[j][j] = 0;
            g[i][j] = 1;
            g[j][i] = 1;
            gens.push(g);
        }
    }
    // sign flips
    for i in 0..r {
        let mut g = identity.clone();
        g[i][i] = -1;
        gens.push(g);
    }

    let mul = |a: &Vec<Vec<i64>>, b: &Vec<Vec<i64>>| -> Vec<Vec<i64>> {
        let mut out = vec![vec![0i64; r]; r];
        for i in 0..r {
            for j in 0..r {
                let mut acc = 0i64;
                for k in 0..r {
                    acc += a[i][k] * b[k][j];
                }
                out[i][j] = acc;
            }
        }
        out
    };

    let mut seen: HashSet<Vec<Vec<i64>>> = HashSet::new();
    let mut order: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut queue: VecDeque<(Vec<Vec<i64>>, usize)> = VecDeque::new();
    seen.insert(identity.clone());
    order.push(identity.clone());
    queue.push_back((identity, 0));
    while let Some((u, depth)) = queue.pop_front() {
        if depth >= max_word_len {
            continue;
        }
        for g in &gens {
            let next = mul(g, &u);
            if next
                .iter()
                .any(|row| row.iter().any(|&v| v.abs() > entry_bound))
            {
                continue;
            }
            if seen.insert(next.clone()) {
                order.push(next.clone());
                queue.push_back((next, depth + 1));
            }
        }
    }
    order
}

/// Try each ideal representative and each unimodular twist U (canonical
/// breadth-first order), testing orbit_membership(U G U^T). First hit wins.
pub fn orbit_membership_mod_gl(
    gtarget: &GramMatrix,
    gunit: &GramMatrix,
    p: &EmbeddingMatrix,
    ideal_reps: &[IdealBasisMatrix],
    tol: &Float,
    search_bound: i64,
    max_word_len: usize,
) -> Result<OrbitSearchOutcome> {
    let r = p.config.r();
    let prec = p.mat.prec;
    for u in unimodular_words(r, search_bound, max_word_len) {
        let u_mat = Mat::from_fn(prec, r, r, |i, j| Float::with_val(prec, u[i][j]));
        let twisted = GramMatrix::new(u_mat.mul(&gtarget.mat).mul(&u_mat.transpose()))?;
        for (idx, m) in ideal_reps.iter().enumerate() {
            if let MembershipOutcome::OnOrbit(membership) =
                orbit_membership(&twisted, gunit, p, m, tol)?
            {
                return Ok(OrbitSearchOutcome::Found(OrbitSearchHit {
                    rep_index: idx,
                    unimodular: u,
                    membership,
                }));
            }
        }
    }
    Ok(OrbitSearchOutcome::NotFoundWithinBound)
}

/// Default ideal-class representatives for Q+. The class number of
/// Q(zeta_p+zeta_p^-1) is 1 for the small primes this crate targets, so the
/// identity is the whole list; callers working at larger p supply their own
/// basis matrices.
pub fn default_ideal_reps(config: PrimeConfig) -> Vec<IdealBasisMatrix> {
    vec![IdealBasisMatrix::identity(config.r())]
}
