//! Hyperbolic geometry of the upper half plane: geodesics as semicircles or
//! vertical lines, hypercycles (equidistant loci), and the specific arc psi
//! that carries every quintic unit shape.

use crate::error::{Error, Result};
use crate::lattice::{gl2_orbit_pair, reduce_fundamental, UHPPoint};
use crate::numeric::eps_at;
use rug::ops::CompleteRound;
use rug::{Float, Rational};

/// A geodesic: semicircle centered on the real axis, or a vertical line.
#[derive(Debug, Clone)]
pub enum Geodesic {
    Semicircle { center: Float, radius: Float },
    Vertical { x: Float },
}

impl Geodesic {
    /// Boundary endpoints (a, b) with a < b, for semicircles.
    pub fn endpoints(&self) -> Option<(Float, Float)> {
        match self {
            Geodesic::Semicircle { center, radius } => {
                let prec = center.prec();
                Some((
                    (center - radius).complete(prec),
                    (center + radius).complete(prec),
                ))
            }
            Geodesic::Vertical { .. } => None,
        }
    }
}

/// Geodesic of an indefinite binary quadratic form a x0^2 + b x0 x1 + c x1^2,
/// oriented so the quintic norm form (1, -1, -1) lands on the circle centered
/// at -1/2 with radius sqrt(5)/2: the endpoints are the roots of
/// a t^2 - b t + c.
pub fn geodesic_from_form(prec: u32, a: i64, b: i64, c: i64) -> Result<Geodesic> {
    let disc = b * b - 4 * a * c;
    if disc <= 0 {
        return Err(Error::Domain(format!(
            "form ({a}, {b}, {c}) is not indefinite: b^2 - 4ac = {disc}"
        )));
    }
    if a == 0 {
        // one root at infinity: vertical geodesic through t = c/b
        return Ok(Geodesic::Vertical {
            x: Float::with_val(prec, Rational::from((c, b))),
        });
    }
    let center = Float::with_val(prec, Rational::from((b, 2 * a)));
    let radius = Float::with_val(prec, disc).sqrt() / Float::with_val(prec, 2 * a.abs());
    Ok(Geodesic::Semicircle { center, radius })
}

/// A hypercycle: circular arc whose circle meets the real axis at the
/// endpoints {a, b} of its base geodesic.
#[derive(Debug, Clone)]
pub struct Hypercycle {
    pub center_x: Float,
    pub center_y: Float,
    pub radius: Float,
    pub a: Float,
    pub b: Float,
}

impl Hypercycle {
    pub fn new(center_x: Float, center_y: Float, radius: Float, a: Float, b: Float) -> Result<Hypercycle> {
        let prec = radius.prec();
        if !(radius > 0) {
            return Err(Error::Validation("hypercycle radius must be positive".into()));
        }
        if !(a < b) {
            return Err(Error::Validation("endpoints must satisfy a < b".into()));
        }
        let tol = eps_at(prec, 32) * radius.clone().square();
        for e in [&a, &b] {
            let resid = ((e - &center_x).complete(prec).square() + center_y.clone().square()
                - radius.clone().square())
            .abs();
            if resid > tol {
                return Err(Error::Validation(format!(
                    "endpoint {e} does not lie on the circle (residual {resid})"
                )));
            }
        }
        Ok(Hypercycle {
            center_x,
            center_y,
            radius,
            a,
            b,
        })
    }

    /// The base geodesic: the semicircle over [a, b].
    pub fn base_geodesic(&self) -> Geodesic {
        let prec = self.radius.prec();
        let center = ((&self.a + &self.b).complete(prec)) / 2u32;
        let radius = ((&self.b - &self.a).complete(prec)) / 2u32;
        Geodesic::Semicircle { center, radius }
    }
}

/// The distinguished arc: the hypercycle psi together with its two arc
/// endpoints in the fundamental domain.
#[derive(Debug, Clone)]
pub struct PsiArc {
    pub circle: Hypercycle,
    /// (1/2, sqrt(3)/2)
    pub start: UHPPoint,
    /// (-1/2, 5/(2 sqrt 3))
    pub end: UHPPoint,
}

impl PsiArc {
    /// Sample n points on the arc's upper branch, x running from -1/2 to 1/2.
    pub fn sample(&self, n: usize) -> Vec<UHPPoint> {
        let prec = self.circle.radius.prec();
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let x = Float::with_val(prec, Rational::from((i as i64, (n - 1).max(1) as i64)))
                - Float::with_val(prec, Rational::from((1, 2)));
            let dx = (&x - &self.circle.center_x).complete(prec);
            let y = (self.circle.radius.clone().square() - dx.square()).sqrt()
                + &self.circle.center_y;
            pts.push(UHPPoint { x, y });
        }
        pts
    }
}

/// The hypercycle psi: circle (x + 1/2)^2 + (y - 1/(2 sqrt 3))^2 = 4/3, with
/// boundary points (-1 +- sqrt(5))/2 shared with the norm-form geodesic and
/// arc endpoints (1/2, sqrt(3)/2), (-1/2, 5/(2 sqrt 3)).
pub fn psi_constants(prec: u32) -> PsiArc {
    let half = Float::with_val(prec, Rational::from((1, 2)));
    let sqrt3 = Float::with_val(prec, 3).sqrt();
    let sqrt5 = Float::with_val(prec, 5).sqrt();
    let center_x = -half.clone();
    let center_y = (Float::with_val(prec, 1) / &sqrt3) / 2u32;
    let radius = Float::with_val(prec, 2) / &sqrt3;
    let a = (-sqrt5.clone() - 1u32) / 2u32;
    let b = (sqrt5 - 1u32) / 2u32;
    let circle = Hypercycle::new(center_x, center_y.clone(), radius, a, b)
        .expect("psi constants are consistent");
    let start = UHPPoint {
        x: half.clone(),
        y: sqrt3.clone() / 2u32,
    };
    let end = UHPPoint {
        x: -half,
        y: (Float::with_val(prec, 5) / sqrt3) / 2u32,
    };
    PsiArc { circle, start, end }
}

/// Hyperbolic distance from z to a geodesic, via the Moebius map sending the
/// geodesic's endpoints to {0, infinity}: sinh d = |Re w| / Im w there.
pub fn distance_point_to_geodesic(z: &UHPPoint, geodesic: &Geodesic) -> Result<Float> {
    let prec = z.prec();
    if !(z.y > 0) {
        return Err(Error::Domain("point lies on the real axis".into()));
    }
    let sinh_d = match geodesic {
        Geodesic::Vertical { x } => (&z.x - x).complete(prec).abs() / &z.y,
        Geodesic::Semicircle { .. } => {
            let (a, b) = geodesic.endpoints().expect("semicircle has endpoints");
            // w = (z - b)/(z - a); Im w = y (b - a)/|z - a|^2 > 0
            let re_num = ((&z.x - &b).complete(prec) * (&z.x - &a).complete(prec))
                + z.y.clone().square();
            let im_num = z.y.clone() * (&b - &a).complete(prec);
            re_num.abs() / im_num
        }
    };
    // asinh(t) = ln(t + sqrt(t^2 + 1))
    Ok((sinh_d.clone() + (sinh_d.square() + 1u32).sqrt()).ln())
}

/// Result of the quotient-level arc membership test.
#[derive(Debug, Clone)]
pub struct ArcCheck {
    pub pass: bool,
    /// Minimum circle defect over the GL2 pair.
    pub residual: Float,
}

/// Does z lie on the arc psi in GL2(Z)\H? Reduces z, forms the GL2 pair, and
/// accepts if either representative sits on the upper branch of the psi
/// circle within tol.
pub fn on_arc_mod_gl2(z: &UHPPoint, tol: &Float) -> ArcCheck {
    let prec = z.prec();
    let psi = psi_constants(prec);
    let (reduced, _) = reduce_fundamental(z);
    let (z1, z2) = gl2_orbit_pair(&reduced);
    let half = Float::with_val(prec, Rational::from((1, 2)));
    let r_sq = psi.circle.radius.clone().square();
    let mut best_residual: Option<Float> = None;
    let mut pass = false;
    for cand in [&z1, &z2] {
        let dx = (&cand.x - &psi.circle.center_x).complete(prec);
        let dy = (&cand.y - &psi.circle.center_y).complete(prec);
        let residual = (dx.square() + dy.square() - &r_sq).abs();
        let x_ok = cand.x.clone().abs() <= (&half + tol).complete(prec);
        let upper = cand.y > psi.circle.center_y;
        if residual < *tol && x_ok && upper {
            pass = true;
        }
        best_residual = Some(match best_residual {
            Some(b) if b < residual => b,
            _ => residual,
        });
    }
    ArcCheck {
        pass,
        residual: best_residual.expect("two candidates checked"),
    }
}

/// Default arc tolerance at a given working precision: 1e-9 at 128 bits,
/// scaling as 2^(-precision/2 + 12) otherwise.
pub fn default_arc_tol(prec: u32) -> Float {
    if prec == 128 {
        Float::with_val(prec, 1e-9)
    } else {
        eps_at(prec, 12 + (prec / 2) as i32)
    }
}
