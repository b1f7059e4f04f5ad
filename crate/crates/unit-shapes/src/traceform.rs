//! The trace Gram matrix G of Z[zeta_p + zeta_p^-1], its zeroing-extended
//! form G~ (rows sum to zero), the unit Gram G_unit = G~ G~^T, and the exact
//! equivariance check that the rows of G~ transform correctly under the
//! (sigma^k + sigma^-k) action. Everything here is exact integer arithmetic;
//! there is no tolerance anywhere in this module.
//!
//! Indexing convention, fixed project-wide: row/column 0 corresponds to the
//! basis element 1, row/column j to eta_j for 1 <= j <= r-1.

use crate::error::{Error, Result};
use crate::numeric::QMat;
use crate::realcyclo::{eta, CycloRealElement, PrimeConfig};
use rug::Complete;
use rug::{Float, Integer, Rational};
use std::fmt::Write as _;

/// Exact trace-form data for a prime p: G, G~, and G_unit.
#[derive(Debug, Clone)]
pub struct TraceFormData {
    pub config: PrimeConfig,
    pub g: Vec<Vec<Integer>>,
    pub gtilde: Vec<Vec<Integer>>,
    pub gunit: Vec<Vec<Integer>>,
}

impl TraceFormData {
    pub fn new(config: PrimeConfig) -> TraceFormData {
        let g = build_trace_gram(config);
        let gtilde = zeroing_extend(&g);
        let gunit = unit_gram(&gtilde).expect("rows of G~ sum to zero by construction");
        TraceFormData {
            config,
            g,
            gtilde,
            gunit,
        }
    }

    /// det(G), which equals the discriminant of Q+ (p^((p-3)/2)).
    pub fn det_g(&self) -> Integer {
        let d = QMat::from_integers(&self.g).det();
        debug_assert_eq!(*d.denom(), 1);
        d.numer().clone()
    }
}

/// G[i][j] = Tr(B_i B_j) over the basis B = [1, eta_1, ..., eta_{r-1}].
pub fn build_trace_gram(config: PrimeConfig) -> Vec<Vec<Integer>> {
    let r = config.r();
    let basis: Vec<CycloRealElement> = (0..r)
        .map(|i| {
            if i == 0 {
                CycloRealElement::one(config)
            } else {
                eta(config, i as i64)
            }
        })
        .collect();
    let mut g = vec![vec![Integer::new(); r]; r];
    for i in 0..r {
        for j in 0..=i {
            let t = basis[i].mul(&basis[j]).expect("same config").trace();
            assert_eq!(*t.denom(), 1, "trace of integral element is an integer");
            g[i][j] = t.numer().clone();
            g[j][i] = g[i][j].clone();
        }
    }
    g
}

/// G~ = [G | c] where c_j makes row j sum to zero.
pub fn zeroing_extend(g: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    g.iter()
        .map(|row| {
            let mut ext = row.clone();
            let sum: Integer = row.iter().sum();
            ext.push(-sum);
            ext
        })
        .collect()
}

/// G_unit = G~ G~^T. Rejects input whose rows do not sum to zero.
pub fn unit_gram(gtilde: &[Vec<Integer>]) -> Result<Vec<Vec<Integer>>> {
    for (i, row) in gtilde.iter().enumerate() {
        let sum: Integer = row.iter().sum();
        if sum != 0 {
            return Err(Error::Validation(format!(
                "row {i} of G~ sums to {sum}, expected 0"
            )));
        }
    }
    let r = gtilde.len();
    let mut out = vec![vec![Integer::new(); r]; r];
    for i in 0..r {
        for j in 0..=i {
            let mut acc = Integer::new();
            for k in 0..gtilde[i].len() {
                acc += (&gtilde[i][k] * &gtilde[j][k]).complete();
            }
            out[i][j] = acc;
            out[j][i] = out[i][j].clone();
        }
    }
    Ok(out)
}

/// The action stencil of (sigma^k + sigma^-k) on log coordinates
/// (a_0, a_1, ..., a_r): for each output component, the list of
/// (input index, integer weight) pairs whose weighted sum produces it.
///
/// Component 0 is log|iota_0| and component j is 2log|iota_j|; writing
/// f(0) = 2a_0 and f(m) = a_fold(m) otherwise, the action sends component 0
/// to a_fold(k) and component j >= 1 to f(j+k) + f(j-k).
pub fn sigma_stencil(config: PrimeConfig, k: usize) -> Result<Vec<Vec<(usize, u32)>>> {
    let r = config.r();
    if k < 1 || k > r {
        return Err(Error::Validation(format!(
            "sigma power k must satisfy 1 <= k <= {r}, got {k}"
        )));
    }
    let term = |m: i64| -> (usize, u32) {
        let f = config.fold(m);
        if f == 0 {
            (0, 2)
        } else {
            (f, 1)
        }
    };
    let mut stencil = Vec::with_capacity(r + 1);
    // new log|iota_0| = log|iota_k| + log|iota_-k| = a_fold(k)
    stencil.push(vec![(config.fold(k as i64), 1u32)]);
    for j in 1..=r as i64 {
        stencil.push(vec![term(j + k as i64), term(j - k as i64)]);
    }
    Ok(stencil)
}

fn apply_stencil<T, F>(stencil: &[Vec<(usize, u32)>], v: &[T], add_scaled: F) -> Vec<T>
where
    T: Clone,
    F: Fn(Option<T>, &T, u32) -> T,
{
    stencil
        .iter()
        .map(|terms| {
            let mut acc: Option<T> = None;
            for &(idx, w) in terms {
                acc = Some(add_scaled(acc, &v[idx], w));
            }
            acc.expect("stencil rows are nonempty")
        })
        .collect()
}

/// Exact (sigma^k + sigma^-k) action on a rational vector of length r+1.
pub fn sigma_action(config: PrimeConfig, k: usize, v: &[Rational]) -> Result<Vec<Rational>> {
    if v.len() != config.r() + 1 {
        return Err(Error::Validation(format!(
            "expected vector of length {}, got {}",
            config.r() + 1,
            v.len()
        )));
    }
    let stencil = sigma_stencil(config, k)?;
    Ok(apply_stencil(&stencil, v, |acc, x, w| {
        let term = x * Rational::from(w);
        match acc {
            Some(a) => a + term,
            None => term,
        }
    }))
}

/// Same action on a float vector at its own precision.
pub fn sigma_action_float(config: PrimeConfig, k: usize, v: &[Float]) -> Result<Vec<Float>> {
    if v.len() != config.r() + 1 {
        return Err(Error::Validation(format!(
            "expected vector of length {}, got {}",
            config.r() + 1,
            v.len()
        )));
    }
    let stencil = sigma_stencil(config, k)?;
    Ok(apply_stencil(&stencil, v, |acc, x, w| {
        let prec = x.prec();
        let term = x * Float::with_val(prec, w);
        match acc {
            Some(a) => a + term,
            None => term,
        }
    }))
}

/// Exact equivariance report: does (sigma^i + sigma^-i) map row 0 of G~ to
/// row i, for every 1 <= i < r?
#[derive(Debug, Clone)]
pub struct EquivarianceReport {
    pub config: PrimeConfig,
    /// (i, passed) for each 1 <= i < r.
    pub cases: Vec<(usize, bool)>,
}

impl EquivarianceReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|&(_, ok)| ok)
    }
}

pub fn verify_equivariance(config: PrimeConfig) -> EquivarianceReport {
    let data = TraceFormData::new(config);
    let row0: Vec<Rational> = data.gtilde[0].iter().map(Rational::from).collect();
    let mut cases = Vec::new();
    for i in 1..config.r() {
        let acted = sigma_action(config, i, &row0).expect("row length r+1");
        let expect: Vec<Rational> = data.gtilde[i].iter().map(Rational::from).collect();
        cases.push((i, acted == expect));
    }
    EquivarianceReport { config, cases }
}

/// Exact integer text form of a matrix, e.g. [[2, -1], [-1, 3]].
pub fn format_matrix(m: &[Vec<Integer>]) -> String {
    let mut s = String::from("[");
    for (i, row) in m.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push('[');
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "{v}");
        }
        s.push(']');
    }
    s.push(']');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn cfg(p: u32) -> PrimeConfig {
        PrimeConfig::new(p).unwrap()
    }

    fn int_rows(rows: &[&[i64]]) -> Vec<Vec<Integer>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Integer::from(v)).collect())
            .collect()
    }

    #[test]
    fn gram_p5() {
        assert_eq!(build_trace_gram(cfg(5)), int_rows(&[&[2, -1], &[-1, 3]]));
    }

    #[test]
    fn gram_p7() {
        assert_eq!(
            build_trace_gram(cfg(7)),
            int_rows(&[&[3, -1, -1], &[-1, 5, -2], &[-1, -2, 5]])
        );
    }

    #[test]
    fn gram_closed_form_p11() {
        let g = build_trace_gram(cfg(11));
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == 0 && j == 0 {
                    5
                } else if i == 0 || j == 0 {
                    -1
                } else if i == j {
                    9
                } else {
                    -2
                };
                assert_eq!(g[i][j], expect, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn zeroing_extend_examples() {
        let g5 = build_trace_gram(cfg(5));
        assert_eq!(zeroing_extend(&g5), int_rows(&[&[2, -1, -1], &[-1, 3, -2]]));

        let g7 = build_trace_gram(cfg(7));
        assert_eq!(
            zeroing_extend(&g7),
            int_rows(&[&[3, -1, -1, -1], &[-1, 5, -2, -2], &[-1, -2, 5, -2]])
        );

        let zero = int_rows(&[&[0, 0], &[0, 0]]);
        assert_eq!(zeroing_extend(&zero), int_rows(&[&[0, 0, 0], &[0, 0, 0]]));
    }

    #[test]
    fn unit_gram_examples() {
        let data5 = TraceFormData::new(cfg(5));
        assert_eq!(data5.gunit, int_rows(&[&[6, -3], &[-3, 14]]));

        let data7 = TraceFormData::new(cfg(7));
        assert_eq!(
            data7.gunit,
            int_rows(&[&[12, -4, -4], &[-4, 34, -15], &[-4, -15, 34]])
        );

        // rows of the identity do not sum to zero
        let bad = int_rows(&[&[1, 0], &[0, 1]]);
        assert!(matches!(unit_gram(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn det_g_is_power_of_p() {
        for p in [5u32, 7, 11, 13] {
            let data = TraceFormData::new(cfg(p));
            let expect = Integer::from(p).pow((p - 3) / 2);
            assert_eq!(data.det_g(), expect, "p = {p}");
        }
    }

    #[test]
    fn gunit_positive_definite_exact() {
        // all leading principal minors > 0, checked exactly
        for p in [5u32, 7, 11, 13] {
            let data = TraceFormData::new(cfg(p));
            let q = QMat::from_integers(&data.gunit);
            for k in 1..=data.config.r() {
                let minor = QMat::from_fn(k, k, |i, j| q.at(i, j).clone()).det();
                assert!(minor > 0, "p={p} leading minor {k}");
            }
        }
    }

    #[test]
    fn sigma_action_p5_closed_form() {
        let c = cfg(5);
        // (a0, a1, a2) -> (a1, 2a0 + a2, a1 + a2)
        let v: Vec<Rational> = [3i64, 5, 7].iter().map(|&x| Rational::from(x)).collect();
        let out = sigma_action(c, 1, &v).unwrap();
        let expect: Vec<Rational> = [5i64, 13, 12].iter().map(|&x| Rational::from(x)).collect();
        assert_eq!(out, expect);

        // row 0 of G~ maps to row 1
        let row0: Vec<Rational> = [2i64, -1, -1].iter().map(|&x| Rational::from(x)).collect();
        let out = sigma_action(c, 1, &row0).unwrap();
        let expect: Vec<Rational> = [-1i64, 3, -2].iter().map(|&x| Rational::from(x)).collect();
        assert_eq!(out, expect);
    }

    #[test]
    fn sigma_action_zero_and_length_check() {
        let c = cfg(7);
        let zero = vec![Rational::new(); 4];
        assert_eq!(sigma_action(c, 2, &zero).unwrap(), zero);
        assert!(sigma_action(c, 1, &zero[..3]).is_err());
        assert!(sigma_action(c, 4, &zero).is_err());
    }

    #[test]
    fn sigma_action_preserves_zero_sum() {
        let c = cfg(11);
        let v: Vec<Rational> = [5i64, -2, 3, -1, -4, -1]
            .iter()
            .map(|&x| Rational::from(x))
            .collect();
        for k in 1..=c.r() {
            let out = sigma_action(c, k, &v).unwrap();
            let sum: Rational = out.iter().fold(Rational::new(), |a, b| a + b);
            assert_eq!(sum, 0, "k = {k}");
        }
    }

    #[test]
    fn equivariance_small_primes() {
        for p in [5u32, 7, 11, 13] {
            let report = verify_equivariance(cfg(p));
            assert!(report.all_pass(), "p = {p}: {:?}", report.cases);
            assert_eq!(report.cases.len(), cfg(p).r() - 1);
        }
    }

    #[test]
    fn sigma_composition_rule() {
        // (sigma^k + sigma^-k)^2 = (sigma^2k + sigma^-2k) + 2 on zero-sum vectors
        for p in [5u32, 7, 13] {
            let c = cfg(p);
            let data = TraceFormData::new(c);
            let v: Vec<Rational> = data.gtilde[0].iter().map(Rational::from).collect();
            for k in 1..=c.r() {
                let twice = sigma_action(c, k, &sigma_action(c, k, &v).unwrap()).unwrap();
                let two_k = c.fold(2 * k as i64);
                assert_ne!(two_k, 0, "2k cannot fold to 0 for prime p");
                let direct = sigma_action(c, two_k, &v).unwrap();
                let expect: Vec<Rational> = direct
                    .iter()
                    .zip(&v)
                    .map(|(d, x)| d + (x * Rational::from(2)))
                    .collect();
                assert_eq!(twice, expect, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn matrix_formatting() {
        let data = TraceFormData::new(cfg(5));
        assert_eq!(format_matrix(&data.gunit), "[[6, -3], [-3, 14]]");
    }
}
