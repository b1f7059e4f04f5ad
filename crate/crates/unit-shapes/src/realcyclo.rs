//! Exact arithmetic in the maximal real subfield Q+ = Q(zeta_p + zeta_p^-1)
//! and its ring of integers Z[zeta_p + zeta_p^-1].
//!
//! Elements are stored as exact rational coordinates in the integral basis
//! B = [1, eta_1, ..., eta_{r-1}] where eta_k = zeta_p^k + zeta_p^-k and
//! r = (p-1)/2. The dependent element eta_r is always rewritten via
//! 1 + eta_1 + ... + eta_r = 0. Only `embed` touches floating point.

use crate::error::{Error, Result};
use crate::numeric::{cos_two_pi_ratio, QMat};
use rug::Complete;
use rug::{Float, Rational};

/// Largest supported prime; the trace-form machinery is desk-scale by design.
pub const MAX_PRIME: u32 = 101;

/// An odd prime p >= 5 together with r = (p-1)/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeConfig {
    p: u32,
    r: usize,
}

impl PrimeConfig {
    pub fn new(p: u32) -> Result<PrimeConfig> {
        if p < 5 || !is_prime(p) {
            return Err(Error::Config(format!("p must be an odd prime >= 5, got {p}")));
        }
        if p > MAX_PRIME {
            return Err(Error::Config(format!(
                "p = {p} exceeds the supported bound {MAX_PRIME}"
            )));
        }
        Ok(PrimeConfig {
            p,
            r: ((p - 1) / 2) as usize,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// r = (p-1)/2, the unit rank and the degree of Q+ over Q.
    pub fn r(&self) -> usize {
        self.r
    }

    /// fold(k) = min(k mod p, p - k mod p), the index of eta_|k| in [0, r].
    pub fn fold(&self, k: i64) -> usize {
        let p = self.p as i64;
        let m = k.rem_euclid(p);
        m.min(p - m) as usize
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Element of Q+ as exact rational coordinates in the basis B.
/// coeffs[0] multiplies 1, coeffs[j] multiplies eta_j for 1 <= j <= r-1.
#[derive(Debug, Clone, PartialEq)]
pub struct CycloRealElement {
    config: PrimeConfig,
    coeffs: Vec<Rational>,
}

impl CycloRealElement {
    pub fn new(config: PrimeConfig, coeffs: Vec<Rational>) -> Result<CycloRealElement> {
        if coeffs.len() != config.r() {
            return Err(Error::Validation(format!(
                "expected {} coordinates, got {}",
                config.r(),
                coeffs.len()
            )));
        }
        Ok(CycloRealElement { config, coeffs })
    }

    pub fn zero(config: PrimeConfig) -> CycloRealElement {
        CycloRealElement {
            config,
            coeffs: vec![Rational::new(); config.r()],
        }
    }

    pub fn one(config: PrimeConfig) -> CycloRealElement {
        let mut e = CycloRealElement::zero(config);
        e.coeffs[0] = Rational::from(1);
        e
    }

    pub fn from_integers(config: PrimeConfig, coeffs: &[i64]) -> Result<CycloRealElement> {
        CycloRealElement::new(config, coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn config(&self) -> PrimeConfig {
        self.config
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    fn check_config(&self, other: &CycloRealElement) -> Result<()> {
        if self.config != other.config {
            return Err(Error::Config(format!(
                "mismatched configurations: p={} vs p={}",
                self.config.p(),
                other.config.p()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &CycloRealElement) -> Result<CycloRealElement> {
        self.check_config(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a + b).complete())
            .collect();
        Ok(CycloRealElement {
            config: self.config,
            coeffs,
        })
    }

    pub fn sub(&self, other: &CycloRealElement) -> Result<CycloRealElement> {
        self.check_config(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).complete())
            .collect();
        Ok(CycloRealElement {
            config: self.config,
            coeffs,
        })
    }

    pub fn scale(&self, c: &Rational) -> CycloRealElement {
        CycloRealElement {
            config: self.config,
            coeffs: self.coeffs.iter().map(|a| (a * c).complete()).collect(),
        }
    }

    /// Exact product, expanded over eta_i * eta_j = eta_{i+j} + eta_{i-j}
    /// with eta_0 meaning the scalar 2 inside the expansion.
    pub fn mul(&self, other: &CycloRealElement) -> Result<CycloRealElement> {
        self.check_config(other)?;
        let cfg = self.config;
        let mut acc = CycloRealElement::zero(cfg);
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if *b == 0 {
                    continue;
                }
                let w = (a * b).complete();
                if i == 0 || j == 0 {
                    // 1 * eta_k = eta_k
                    let k = i + j;
                    acc.coeffs[k] += &w;
                } else {
                    let s = eta(cfg, (i + j) as i64);
                    let d = eta(cfg, i as i64 - j as i64);
                    for t in 0..cfg.r() {
                        acc.coeffs[t] += (&w * &s.coeffs[t]).complete();
                        acc.coeffs[t] += (&w * &d.coeffs[t]).complete();
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Q-linear trace to Q: Tr(1) = r, Tr(eta_k) = -1.
    pub fn trace(&self) -> Rational {
        let r = self.config.r();
        let mut t = &self.coeffs[0] * Rational::from(r as i64);
        for c in &self.coeffs[1..] {
            t -= c;
        }
        t
    }

    /// Field norm to Q: determinant of the multiplication-by-self matrix on B.
    pub fn norm(&self) -> Rational {
        let cfg = self.config;
        let r = cfg.r();
        let mut mult = QMat::zero(r, r);
        for j in 0..r {
            // column j = self * B_j expressed in B
            let bj = if j == 0 {
                CycloRealElement::one(cfg)
            } else {
                eta(cfg, j as i64)
            };
            let prod = self.mul(&bj).expect("same config");
            for i in 0..r {
                *mult.at_mut(i, j) = prod.coeffs[i].clone();
            }
        }
        mult.det()
    }

    /// Real embeddings (j_1(a), ..., j_r(a)) with j_i(eta_k) = 2cos(2 pi i k / p).
    pub fn embed(&self, precision: u32) -> Result<Vec<Float>> {
        if precision < 64 {
            return Err(Error::Precision(format!(
                "embedding precision must be >= 64 bits, got {precision}"
            )));
        }
        let cfg = self.config;
        let p = cfg.p() as i64;
        let mut out = Vec::with_capacity(cfg.r());
        for i in 1..=cfg.r() as i64 {
            let mut v = Float::with_val(precision, &self.coeffs[0]);
            for (k, c) in self.coeffs.iter().enumerate().skip(1) {
                if *c == 0 {
                    continue;
                }
                let basis_val = cos_two_pi_ratio(precision, i * k as i64, p) * 2i32;
                v += basis_val * Float::with_val(precision, c);
            }
            out.push(v);
        }
        Ok(out)
    }
}

/// eta_{fold(k)} expressed in the basis B. fold(k) = 0 yields the constant 2;
/// fold(k) = r yields -1 - eta_1 - ... - eta_{r-1}.
pub fn eta(config: PrimeConfig, k: i64) -> CycloRealElement {
    let f = config.fold(k);
    let r = config.r();
    let mut e = CycloRealElement::zero(config);
    if f == 0 {
        e.coeffs[0] = Rational::from(2);
    } else if f == r {
        for c in e.coeffs.iter_mut() {
            *c = Rational::from(-1);
        }
    } else {
        e.coeffs[f] = Rational::from(1);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rug::ops::CompleteRound;

    fn p5() -> PrimeConfig {
        PrimeConfig::new(5).unwrap()
    }

    fn p7() -> PrimeConfig {
        PrimeConfig::new(7).unwrap()
    }

    #[test]
    fn config_rejects_bad_primes() {
        assert!(PrimeConfig::new(4).is_err());
        assert!(PrimeConfig::new(3).is_err());
        assert!(PrimeConfig::new(9).is_err());
        assert!(PrimeConfig::new(103).is_err());
        assert_eq!(PrimeConfig::new(13).unwrap().r(), 6);
    }

    #[test]
    fn eta_folding() {
        // p=5, k=1 -> (0, 1)
        assert_eq!(
            eta(p5(), 1).coeffs(),
            &[Rational::new(), Rational::from(1)]
        );
        // p=5, k=2 -> eta_2 = -1 - eta_1
        assert_eq!(
            eta(p5(), 2).coeffs(),
            &[Rational::from(-1), Rational::from(-1)]
        );
        // p=7, k=9 -> eta_2
        assert_eq!(
            eta(p7(), 9).coeffs(),
            &[Rational::new(), Rational::new(), Rational::from(1)]
        );
        // fold(0) is the constant 2
        assert_eq!(
            eta(p5(), 0).coeffs(),
            &[Rational::from(2), Rational::new()]
        );
        // negative k folds like |k|
        assert_eq!(eta(p7(), -2), eta(p7(), 2));
    }

    #[test]
    fn mul_examples() {
        // p=5: eta_1^2 = 1 - eta_1
        let e1 = eta(p5(), 1);
        let sq = e1.mul(&e1).unwrap();
        assert_eq!(sq.coeffs(), &[Rational::from(1), Rational::from(-1)]);

        // p=7: eta_1 * eta_2 = eta_3 + eta_1 = (-1, 0, -1)
        let prod = eta(p7(), 1).mul(&eta(p7(), 2)).unwrap();
        assert_eq!(
            prod.coeffs(),
            &[Rational::from(-1), Rational::new(), Rational::from(-1)]
        );

        // identity
        let x = CycloRealElement::from_integers(p7(), &[3, -2, 5]).unwrap();
        assert_eq!(CycloRealElement::one(p7()).mul(&x).unwrap(), x);
    }

    #[test]
    fn mul_mismatched_configs() {
        let a = CycloRealElement::one(p5());
        let b = CycloRealElement::one(p7());
        assert!(matches!(a.mul(&b), Err(Error::Config(_))));
    }

    #[test]
    fn trace_examples() {
        assert_eq!(CycloRealElement::one(p5()).trace(), Rational::from(2));
        assert_eq!(eta(p5(), 1).trace(), Rational::from(-1));
        // p=7: Tr(eta_1^2) = 5
        let sq = eta(p7(), 1).mul(&eta(p7(), 1)).unwrap();
        assert_eq!(sq.trace(), Rational::from(5));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(eta(p5(), 1).norm(), Rational::from(-1));
        assert_eq!(CycloRealElement::one(p5()).norm(), Rational::from(1));
        // p=5: N(x0 + x1 eta_1) = x0^2 - x0 x1 - x1^2
        for (x0, x1) in [(2i64, 3i64), (-1, 4), (7, -2)] {
            let e = CycloRealElement::from_integers(p5(), &[x0, x1]).unwrap();
            assert_eq!(e.norm(), Rational::from(x0 * x0 - x0 * x1 - x1 * x1));
        }
    }

    #[test]
    fn embed_examples() {
        let em = eta(p5(), 1).embed(128).unwrap();
        assert!((em[0].to_f64() - 0.618033988749894).abs() < 1e-14);
        assert!((em[1].to_f64() + 1.618033988749894).abs() < 1e-14);

        let one = CycloRealElement::one(p7()).embed(128).unwrap();
        assert!(one.iter().all(|v| (v.to_f64() - 1.0).abs() < 1e-30));

        let e7 = eta(p7(), 1).embed(128).unwrap();
        assert!((e7[0].to_f64() - 1.2469796037174672).abs() < 1e-14);
    }

    #[test]
    fn embed_rejects_low_precision() {
        assert!(eta(p5(), 1).embed(32).is_err());
    }

    #[test]
    fn fold_consistency_of_embeddings() {
        // embed(eta(k)) == (2cos(2 pi k/p), ..., 2cos(2 pi k r/p)) for |k| <= 3p
        for cfg in [p5(), p7(), PrimeConfig::new(11).unwrap()] {
            let prec = 128;
            let p = cfg.p() as i64;
            let tol = crate::numeric::eps_at(prec, 8);
            for k in -3 * p..=3 * p {
                let em = eta(cfg, k).embed(prec).unwrap();
                for i in 1..=cfg.r() as i64 {
                    let expect = cos_two_pi_ratio(prec, k * i, p) * 2i32;
                    let diff = (&em[(i - 1) as usize] - &expect).complete(prec).abs();
                    assert!(diff < tol, "p={} k={} i={}", cfg.p(), k, i);
                }
            }
        }
    }

    fn small_element(cfg: PrimeConfig) -> impl Strategy<Value = CycloRealElement> {
        prop::collection::vec(-10i64..=10, cfg.r())
            .prop_map(move |v| CycloRealElement::from_integers(cfg, &v).unwrap())
    }

    proptest! {
        #[test]
        fn ring_axioms_p7(a in small_element(p7()), b in small_element(p7()), c in small_element(p7())) {
            // commutativity and associativity of mul, distributivity over add
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn trace_is_sum_of_embeddings(a in small_element(p7())) {
            let prec = 128;
            let em = a.embed(prec).unwrap();
            let mut sum = Float::with_val(prec, 0);
            for v in &em {
                sum += v;
            }
            let tr = Float::with_val(prec, &a.trace());
            let diff = (sum - tr).abs();
            prop_assert!(diff < crate::numeric::eps_at(prec, 16));
        }

        #[test]
        fn norm_is_product_of_embeddings(a in small_element(p5())) {
            let prec = 128;
            let em = a.embed(prec).unwrap();
            let mut prod = Float::with_val(prec, 1);
            for v in &em {
                prod *= v;
            }
            let nm = Float::with_val(prec, &a.norm());
            let diff = (prod - nm).abs();
            // norms of coeff-<=10 elements stay small; absolute tolerance is fine
            prop_assert!(diff < 1e-25);
        }
    }
}
