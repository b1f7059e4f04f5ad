//! Field-data pipeline: ingest number-field records carrying fundamental
//! units, compute embeddings by polynomial root finding, locate a basis
//! {u0, (sigma^k + sigma^-k) u0} of the unit lattice, and verify that the
//! resulting shape lands on the quintic arc (p = 5) or on the predicted
//! torus orbit (general p).

pub mod lmfdb;

use crate::error::{Error, Result};
use crate::hypgeo::on_arc_mod_gl2;
use crate::lattice::{
    gl2_orbit_pair, ideal_norm_from_logs, reduce_fundamental, regulator_from_logs, uhp_from_gram,
    LogMatrix,
};
use crate::numeric::{eps_at, Cplx, Mat};
use crate::realcyclo::PrimeConfig;
use crate::torus::{
    default_ideal_reps, embedding_matrix, orbit_membership_mod_gl, OrbitSearchOutcome,
    DEFAULT_WORD_LENGTH,
};
use crate::traceform::{sigma_action_float, TraceFormData};
use rug::ops::CompleteRound;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

/// Default exponent search bound for the sigma-basis search, and the
/// escalated bound tried when the default fails.
pub const DEFAULT_SEARCH_BOUND: i64 = 6;
pub const ESCALATED_SEARCH_BOUND: i64 = 12;

/// One ingested number field: defining polynomial, signature, fundamental
/// units (rational-coefficient polynomials in the generator), and reference
/// data. Mirrors the fixture/cache JSON schema; unknown keys are ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldRecord {
    pub label: String,
    pub degree: u32,
    /// Monic defining polynomial, ascending coefficients, leading 1 last.
    pub coeffs: Vec<i64>,
    pub r1: u32,
    pub r2: u32,
    pub galois_label: String,
    /// Each unit: ascending "num/den" coefficient strings, degree < p.
    pub units: Vec<Vec<String>>,
    /// Reference regulator as a decimal string, when known.
    pub regulator: Option<String>,
    /// Field discriminant (signed integer, as a string).
    pub disc: String,
}

impl FieldRecord {
    /// Structural validation; returns the prime configuration.
    pub fn validate(&self) -> Result<PrimeConfig> {
        let config = PrimeConfig::new(self.degree)
            .map_err(|_| Error::Data(format!("degree {} is not an odd prime >= 5", self.degree)))?;
        let r = config.r() as u32;
        if self.r1 != 1 || self.r2 != r {
            return Err(Error::Data(format!(
                "signature ({}, {}) is not (1, {r})",
                self.r1, self.r2
            )));
        }
        if self.coeffs.len() != self.degree as usize + 1 || *self.coeffs.last().unwrap() != 1 {
            return Err(Error::Data("defining polynomial must be monic of the stated degree".into()));
        }
        if self.units.len() != config.r() {
            return Err(Error::Data(format!(
                "expected {} fundamental units, got {}",
                config.r(),
                self.units.len()
            )));
        }
        Ok(config)
    }

    pub fn unit_coeffs(&self) -> Result<Vec<Vec<Rational>>> {
        self.units
            .iter()
            .map(|u| {
                u.iter()
                    .map(|s| {
                        s.trim()
                            .parse::<Rational>()
                            .map_err(|_| Error::Parse(format!("bad rational '{s}'")))
                    })
                    .collect()
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// All p roots of the defining polynomial, ordered [real, pair representatives
/// (Im > 0, sorted by real part), conjugates in reverse], so that index k and
/// index p-k are conjugate.
pub fn roots(record: &FieldRecord, precision: u32) -> Result<Vec<Cplx>> {
    let config = record.validate()?;
    let p = config.p() as usize;
    let coeffs: Vec<Float> = record
        .coeffs
        .iter()
        .map(|&c| Float::with_val(precision, c))
        .collect();
    let raw = durand_kerner(&coeffs, precision)?;

    let real_tol = eps_at(precision, (precision / 2) as i32);
    let mut real = Vec::new();
    let mut upper = Vec::new();
    for z in raw {
        if z.im.clone().abs() < real_tol {
            real.push(Cplx::new(z.re, Float::with_val(precision, 0)));
        } else if z.im > 0 {
            upper.push(z);
        }
    }
    if real.len() != 1 {
        return Err(Error::Data(format!(
            "expected exactly one real root, found {}",
            real.len()
        )));
    }
    if upper.len() != config.r() {
        return Err(Error::Precision(format!(
            "conjugate pairing failed: {} upper-half roots for r = {}; retry at higher precision",
            upper.len(),
            config.r()
        )));
    }
    upper.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let mut out = real;
    out.extend(upper.iter().cloned());
    for z in upper.iter().rev() {
        out.push(Cplx::new(z.re.clone(), -z.im.clone()));
    }
    debug_assert_eq!(out.len(), p);

    // Vieta sanity: roots sum to -coeffs[p-1]
    let mut sum = Float::with_val(precision, 0);
    for z in &out {
        sum += &z.re;
    }
    let expect = -Float::with_val(precision, record.coeffs[p - 1]);
    let scale = Float::with_val(precision, 1) + expect.clone().abs();
    if (sum - expect).abs() > eps_at(precision, 24) * scale {
        return Err(Error::Precision("root sum fails the Vieta check".into()));
    }
    Ok(out)
}

/// Durand-Kerner iteration with a Cauchy-bound spiral start; polishes until
/// the backward error drops below 2^(-precision+8) relative to the
/// coefficient scale at each root.
fn durand_kerner(coeffs_ascending: &[Float], precision: u32) -> Result<Vec<Cplx>> {
    let n = coeffs_ascending.len() - 1;
    let mut bound = Float::with_val(precision, 0);
    for c in &coeffs_ascending[..n] {
        let a = c.clone().abs();
        if a > bound {
            bound = a;
        }
    }
    bound += 1u32;

    // spiral of initial guesses, never symmetric about the real axis
    let seed = Cplx::from_f64(precision, 0.4, 0.9);
    let mut z: Vec<Cplx> = Vec::with_capacity(n);
    let mut acc = Cplx::new(Float::with_val(precision, &bound), Float::with_val(precision, 0));
    for _ in 0..n {
        acc = acc.mul(&seed);
        z.push(acc.clone());
    }

    let eval = |x: &Cplx| -> Cplx {
        let mut v = Cplx::zero(precision);
        for c in coeffs_ascending.iter().rev() {
            v = v.mul(x);
            v.re += c;
        }
        v
    };
    let tol = eps_at(precision, 8);
    // step-size floor scales with the root bound; accept on a verified
    // backward error, or once the iteration has collapsed to rounding noise
    // for several consecutive sweeps (roots at or near zero defeat the
    // coefficient-scaled backward bound)
    let step_tol = eps_at(precision, 16) * &bound;
    let mut small_sweeps = 0u32;
    for _iter in 0..600 {
        let mut worst = Float::with_val(precision, 0);
        for k in 0..n {
            let fv = eval(&z[k]);
            let mut denom = Cplx::new(
                Float::with_val(precision, 1),
                Float::with_val(precision, 0),
            );
            for j in 0..n {
                if j != k {
                    denom = denom.mul(&z[k].sub(&z[j]));
                }
            }
            let delta = fv.div(&denom);
            z[k] = z[k].sub(&delta);
            let step = delta.abs();
            if step > worst {
                worst = step;
            }
        }
        if worst < step_tol {
            small_sweeps += 1;
            let ok = z.iter().all(|zi| {
                let mut scale = Float::with_val(precision, 0);
                let mut pw = Float::with_val(precision, 1);
                let a = zi.abs();
                for c in coeffs_ascending {
                    scale += c.clone().abs() * &pw;
                    pw *= &a;
                }
                eval(zi).abs() < (&tol * &scale).complete(precision)
            });
            if ok || small_sweeps >= 3 {
                return Ok(z);
            }
        } else {
            small_sweeps = 0;
        }
    }
    Err(Error::Precision(
        "root iteration did not converge; retry at higher precision".into(),
    ))
}

// ---------------------------------------------------------------------------
// Unit logs
// ---------------------------------------------------------------------------

/// Per-unit log data: the full length-p vector (log |u| at every embedding,
/// conjugates included) and the collapsed length-(r+1) vector
/// (log|iota_0|, 2log|iota_1|, ..., 2log|iota_r|).
#[derive(Debug, Clone)]
pub struct UnitLogData {
    pub config: PrimeConfig,
    pub precision: u32,
    pub full: Vec<Vec<Float>>,
    pub collapsed: Vec<Vec<Float>>,
}

pub fn unit_logs(record: &FieldRecord, roots: &[Cplx], precision: u32) -> Result<UnitLogData> {
    let config = record.validate()?;
    let p = config.p() as usize;
    let r = config.r();
    let units = record.unit_coeffs()?;
    let min_abs = eps_at(precision, (precision / 2) as i32);
    let mut full = Vec::with_capacity(r);
    let mut collapsed = Vec::with_capacity(r);
    for (ui, unit) in units.iter().enumerate() {
        let mut logs = Vec::with_capacity(p);
        for root in roots {
            let mut v = Cplx::zero(precision);
            for c in unit.iter().rev() {
                v = v.mul(root);
                v.re += Float::with_val(precision, c);
            }
            let a = v.abs();
            if a < min_abs {
                return Err(Error::Validation(format!(
                    "unit {ui} evaluates to ~0 at an embedding (likely wrong unit data)"
                )));
            }
            logs.push(a.ln());
        }
        // |norm| = 1: the full vector sums to zero
        let mut sum = Float::with_val(precision, 0);
        let mut scale = Float::with_val(precision, 1);
        for l in &logs {
            sum += l;
            let a = l.clone().abs();
            if a > scale {
                scale = a;
            }
        }
        if sum.clone().abs() > eps_at(precision, 24) * &scale {
            return Err(Error::Validation(format!(
                "unit {ui} log vector does not sum to zero (|sum| = {})",
                sum.abs()
            )));
        }
        // conjugate embeddings agree in absolute value
        for k in 1..=r {
            let diff = (&logs[k] - &logs[p - k]).complete(precision).abs();
            if diff > eps_at(precision, 24) * &scale {
                return Err(Error::Validation(format!(
                    "unit {ui}: conjugate pair {k} mismatch"
                )));
            }
        }
        let mut coll = vec![logs[0].clone()];
        for k in 1..=r {
            coll.push(logs[k].clone() * 2u32);
        }
        full.push(logs);
        collapsed.push(coll);
    }
    Ok(UnitLogData {
        config,
        precision,
        full,
        collapsed,
    })
}

// ---------------------------------------------------------------------------
// Labelings
// ---------------------------------------------------------------------------

/// The r relabelings of pair indices induced by replacing sigma with sigma^m:
/// entry k-1 of labeling m is fold(m*k), 1-based pair indices.
pub fn candidate_labelings(config: PrimeConfig) -> Vec<Vec<usize>> {
    let r = config.r();
    (1..=r)
        .map(|m| (1..=r).map(|k| config.fold((m * k) as i64)).collect())
        .collect()
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    // all permutations of 1..=r in lexicographic order
    let mut out = Vec::new();
    let mut items: Vec<usize> = (1..=r).collect();
    fn rec(items: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if items.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..items.len() {
            let v = items.remove(i);
            prefix.push(v);
            rec(items, prefix, out);
            prefix.pop();
            items.insert(i, v);
        }
    }
    rec(&mut items, &mut Vec::new(), &mut out);
    out
}

fn apply_labeling(collapsed: &[Float], labeling: &[usize]) -> Vec<Float> {
    let mut out = vec![collapsed[0].clone()];
    for &pair in labeling {
        out.push(collapsed[pair].clone());
    }
    out
}

/// Pair labelings under which the unit-log lattice is stable under the
/// (sigma + sigma^-1) action with an integral, determinant +-1 matrix. A
/// valid sigma-labeling must have this property (the unit group is a module
/// over Z[sigma + sigma^-1]); relabelings that do not respect the cyclic
/// structure of the embeddings fail it.
pub fn stable_labelings(logs: &UnitLogData) -> Result<Vec<Vec<usize>>> {
    let config = logs.config;
    let r = config.r();
    let prec = logs.precision;
    let tol = 1e-6;
    let mut stable = Vec::new();
    for perm in permutations(r) {
        let rows: Vec<Vec<Float>> = logs
            .collapsed
            .iter()
            .map(|c| apply_labeling(c, &perm))
            .collect();
        let a = Mat::from_fn(prec, r, r, |i, j| Float::with_val(prec, &rows[i][j]));
        let Ok(a_inv) = a.inverse() else {
            continue;
        };
        let mut ok = true;
        let mut det_x = Float::with_val(prec, 1);
        let mut x = Mat::zero(prec, r, r);
        for (i, row) in rows.iter().enumerate() {
            let acted = sigma_action_float(config, 1, row)?;
            // coords of acted over the row basis, using the leading r columns
            let b = Mat::from_fn(prec, 1, r, |_, j| Float::with_val(prec, &acted[j]));
            let coords = b.mul(&a_inv);
            for j in 0..r {
                let c = coords.at(0, j).clone();
                let rounded = c.clone().round();
                if (c.clone() - &rounded).abs().to_f64() > tol {
                    ok = false;
                    break;
                }
                *x.at_mut(i, j) = rounded;
            }
            if !ok {
                break;
            }
        }
        if !ok {
            continue;
        }
        det_x *= x.det();
        if (det_x.clone().abs() - Float::with_val(prec, 1))
            .abs()
            .to_f64()
            > tol
        {
            continue;
        }
        stable.push(perm);
    }
    if stable.is_empty() {
        return Err(Error::Data(
            "no sigma-stable pair labeling found; unit data is inconsistent".into(),
        ));
    }
    Ok(stable)
}

// ---------------------------------------------------------------------------
// sigma-basis search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SigmaBasis {
    /// Exponents of the fundamental units making up u0.
    pub exponents: Vec<i64>,
    pub log_matrix: LogMatrix,
}

/// Search integer exponent vectors c with |c_i| <= bound for a unit
/// u0 = prod units^c_i whose iterated rows (sigma^k + sigma^-k) Log u0,
/// k = 0..r-1, span the unit lattice: accepted when the minor determinant
/// matches the reference regulator to relative 1e-8.
///
/// Enumeration is by growing max-norm shells, lexicographic within a shell,
/// and the first match wins; u0 is only determined up to a unit of the
/// coefficient ring, so the small-exponent representative is returned.
pub fn find_sigma_basis(
    logs: &UnitLogData,
    labeling: &[usize],
    regulator_ref: &Float,
    bound: i64,
) -> Result<Option<SigmaBasis>> {
    let config = logs.config;
    let r = config.r();
    let prec = logs.precision;
    let rows: Vec<Vec<Float>> = logs
        .collapsed
        .iter()
        .map(|c| apply_labeling(c, labeling))
        .collect();

    for c in exponent_shells(r, bound) {
        let mut v = vec![Float::with_val(prec, 0); r + 1];
        for (ci, row) in c.iter().zip(&rows) {
            if *ci == 0 {
                continue;
            }
            for (vj, rj) in v.iter_mut().zip(row) {
                *vj += rj * Float::with_val(prec, *ci);
            }
        }
        let mut basis_rows = vec![v.clone()];
        for k in 1..r {
            basis_rows.push(sigma_action_float(config, k, &v)?);
        }
        let mat = Mat::from_rows(prec, &basis_rows);
        if let Ok(l) = LogMatrix::new(mat) {
            if let Ok(reg) = regulator_from_logs(&l) {
                let rel = ((reg - regulator_ref) / regulator_ref).abs();
                if rel.to_f64() < 1e-8 {
                    return Ok(Some(SigmaBasis {
                        exponents: c.clone(),
                        log_matrix: l,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Nonzero integer vectors of length r, by growing max-norm shell and
/// lexicographic within a shell.
fn exponent_shells(r: usize, bound: i64) -> impl Iterator<Item = Vec<i64>> {
    (1..=bound).flat_map(move |shell| {
        let mut out = Vec::new();
        let mut c = vec![-shell; r];
        loop {
            if c.iter().any(|&v| v.abs() == shell) {
                out.push(c.clone());
            }
            let mut i = r;
            let mut done = true;
            while i > 0 {
                i -= 1;
                if c[i] < shell {
                    c[i] += 1;
                    for v in c.iter_mut().skip(i + 1) {
                        *v = -shell;
                    }
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
        out
    })
}

// ---------------------------------------------------------------------------
// End-to-end verification
// ---------------------------------------------------------------------------

/// Everything the pipeline measured for one field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeResult {
    pub label: String,
    pub degree: u32,
    pub precision: u32,
    /// Index of the accepted labeling within the stable set.
    pub labeling_index: usize,
    /// Accepted pair labeling (1-based pair indices).
    pub labeling: Vec<usize>,
    /// Exponent vector of u0 over the record's fundamental units.
    pub exponents: Vec<i64>,
    /// Reduced UHP representative (p = 5 only).
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub mirror_x: Option<f64>,
    /// Circle defect of the best GL2 representative (p = 5 only).
    pub circle_residual: Option<f64>,
    /// Torus-orbit membership residual (p > 5 only).
    pub orbit_residual: Option<f64>,
    /// Computed regulator, 30 digits.
    pub regulator: String,
    /// Relative gap to the reference regulator.
    pub regulator_delta: f64,
    /// Relative defect of regulator = N(a) * det(G).
    pub ideal_norm_delta: f64,
    pub on_predicted_locus: bool,
}

/// Tunable knobs for `verify_field`.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub precision: u32,
    pub search_bound: i64,
    /// Residual tolerance for arc / orbit membership.
    pub tol: f64,
    pub unimodular_bound: i64,
    pub word_length: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            precision: crate::DEFAULT_PRECISION,
            search_bound: DEFAULT_SEARCH_BOUND,
            tol: 1e-6,
            unimodular_bound: 2,
            word_length: DEFAULT_WORD_LENGTH,
        }
    }
}

/// Full pipeline for one record: roots, unit logs, labeling scan,
/// sigma-basis search, shape checks, regulator identities.
pub fn verify_field(record: &FieldRecord, opts: &VerifyOptions) -> Result<ShapeResult> {
    let config = record.validate().map_err(|e| e.at_stage("validate"))?;
    let prec = opts.precision;

    let rts = roots(record, prec).map_err(|e| e.at_stage("roots"))?;
    let logs = unit_logs(record, &rts, prec).map_err(|e| e.at_stage("unit_logs"))?;

    // reference regulator: the record's value if present, else the covolume
    // of the fundamental-unit rows
    let fundamental_mat = Mat::from_rows(prec, &logs.collapsed);
    let fundamental = LogMatrix::new(fundamental_mat).map_err(|e| e.at_stage("unit_logs"))?;
    let computed_ref = regulator_from_logs(&fundamental).map_err(|e| e.at_stage("unit_logs"))?;
    let regulator_ref = match &record.regulator {
        Some(s) => {
            let parsed = Float::parse(s)
                .map_err(|_| Error::Parse(format!("bad regulator '{s}'")).at_stage("validate"))?;
            Float::with_val(prec, parsed)
        }
        None => computed_ref.clone(),
    };

    let labelings = stable_labelings(&logs).map_err(|e| e.at_stage("labelings"))?;
    let mut found: Option<(usize, Vec<usize>, SigmaBasis)> = None;
    'outer: for bound in [opts.search_bound, ESCALATED_SEARCH_BOUND] {
        for (idx, labeling) in labelings.iter().enumerate() {
            if let Some(basis) = find_sigma_basis(&logs, labeling, &regulator_ref, bound)
                .map_err(|e| e.at_stage("sigma_basis"))?
            {
                found = Some((idx, labeling.clone(), basis));
                break 'outer;
            }
        }
        if bound >= ESCALATED_SEARCH_BOUND {
            break;
        }
    }
    let Some((labeling_index, labeling, basis)) = found else {
        return Err(Error::SearchExhausted(format!(
            "no sigma-generated basis within exponent bound {} across {} labelings",
            ESCALATED_SEARCH_BOUND,
            labelings.len()
        ))
        .at_stage("sigma_basis"));
    };

    let gram = basis.log_matrix.gram().map_err(|e| e.at_stage("gram"))?;
    let regulator = regulator_from_logs(&basis.log_matrix).map_err(|e| e.at_stage("gram"))?;
    let regulator_delta = ((regulator.clone() - &regulator_ref) / &regulator_ref)
        .abs()
        .to_f64();

    // ideal-norm identity: regulator = N(a) * det(G)
    let tf = TraceFormData::new(config);
    let ideal_norm = ideal_norm_from_logs(&basis.log_matrix, &tf)
        .map_err(|e| e.at_stage("ideal_norm"))?;
    let via_norm = ideal_norm * Float::with_val(prec, &tf.det_g());
    let ideal_norm_delta = ((via_norm - &regulator) / &regulator).abs().to_f64();

    let mut result = ShapeResult {
        label: record.label.clone(),
        degree: record.degree,
        precision: prec,
        labeling_index,
        labeling,
        exponents: basis.exponents.clone(),
        x: None,
        y: None,
        mirror_x: None,
        circle_residual: None,
        orbit_residual: None,
        regulator: regulator.to_string_radix(10, Some(30)),
        regulator_delta,
        ideal_norm_delta,
        on_predicted_locus: false,
    };

    if config.p() == 5 {
        let z = uhp_from_gram(&gram).map_err(|e| e.at_stage("uhp"))?;
        let (reduced, _) = reduce_fundamental(&z);
        let (_, mirror) = gl2_orbit_pair(&reduced);
        let tol = Float::with_val(prec, opts.tol);
        let check = on_arc_mod_gl2(&z, &tol);
        result.x = Some(reduced.x.to_f64());
        result.y = Some(reduced.y.to_f64());
        result.mirror_x = Some(mirror.x.to_f64());
        result.circle_residual = Some(check.residual.to_f64());
        result.on_predicted_locus = check.pass;
    } else {
        let gunit = crate::lattice::GramMatrix::new(
            crate::numeric::QMat::from_integers(&tf.gunit).to_mat(prec),
        )
        .map_err(|e| e.at_stage("orbit"))?;
        let emb = embedding_matrix(config, prec).map_err(|e| e.at_stage("orbit"))?;
        let reps = default_ideal_reps(config);
        let tol = Float::with_val(prec, opts.tol);
        let outcome = orbit_membership_mod_gl(
            &gram,
            &gunit,
            &emb,
            &reps,
            &tol,
            opts.unimodular_bound,
            opts.word_length,
        )
        .map_err(|e| e.at_stage("orbit"))?;
        match outcome {
            OrbitSearchOutcome::Found(hit) => {
                result.orbit_residual = Some(hit.membership.residual.to_f64());
                result.on_predicted_locus = true;
            }
            OrbitSearchOutcome::NotFoundWithinBound => {
                result.orbit_residual = None;
                result.on_predicted_locus = false;
            }
        }
    }
    Ok(result)
}

/// CSV header matching `to_csv_row`.
pub fn csv_header() -> &'static str {
    "label,x,y,circle_residual,orbit_residual,regulator_delta,labeling_index,exponents"
}

pub fn to_csv_row(s: &ShapeResult) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
    format!(
        "{},{},{},{},{},{:.6e},{},{}",
        s.label,
        s.x.map(|v| format!("{v:.12}")).unwrap_or_default(),
        s.y.map(|v| format!("{v:.12}")).unwrap_or_default(),
        opt(s.circle_residual),
        opt(s.orbit_residual),
        s.regulator_delta,
        s.labeling_index,
        s.exponents
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::quintic_log_rows;

    const PREC: u32 = 192;

    fn test_record_x5_minus_2() -> FieldRecord {
        // not a dihedral field; used only to exercise the root finder
        FieldRecord {
            label: "test.x5-2".into(),
            degree: 5,
            coeffs: vec![-2, 0, 0, 0, 0, 1],
            r1: 1,
            r2: 2,
            galois_label: "5T3".into(),
            units: vec![vec!["1".into()], vec!["1".into()]],
            regulator: None,
            disc: "50000".into(),
        }
    }

    #[test]
    fn roots_of_x5_minus_2() {
        let rts = roots(&test_record_x5_minus_2(), PREC).unwrap();
        assert_eq!(rts.len(), 5);
        let real = &rts[0];
        assert!(real.im.is_zero());
        assert!((real.re.to_f64() - 2f64.powf(0.2)).abs() < 1e-15);
        // conjugate pairing: index k and 5-k
        for k in 1..=2 {
            let a = &rts[k];
            let b = &rts[5 - k];
            assert!((a.re.clone() - &b.re).abs() < 1e-40);
            assert!((a.im.clone() + &b.im).abs() < 1e-40);
        }
    }

    #[test]
    fn roots_reject_totally_real() {
        let mut rec = test_record_x5_minus_2();
        // x^5 - 5x^3 + 4x = x(x-1)(x+1)(x-2)(x+2) has 5 real roots (and is
        // not squarefree-irreducible, but the signature check fires first)
        rec.coeffs = vec![0, 4, 0, -5, 0, 1];
        assert!(matches!(roots(&rec, 128), Err(Error::Data(_))));
    }

    #[test]
    fn candidate_labelings_examples() {
        let c5 = PrimeConfig::new(5).unwrap();
        assert_eq!(candidate_labelings(c5), vec![vec![1, 2], vec![2, 1]]);
        let c7 = PrimeConfig::new(7).unwrap();
        let l = candidate_labelings(c7);
        assert_eq!(l.len(), 3);
        assert_eq!(l[0], vec![1, 2, 3]);
        assert_eq!(l[1], vec![2, 3, 1]);
        assert_eq!(l[2], vec![3, 1, 2]);
    }

    #[test]
    fn sigma_search_round_trip_synthetic() {
        // build logs directly from the quintic rows: units = that basis
        let config = PrimeConfig::new(5).unwrap();
        let a0 = Float::with_val(PREC, 1.0);
        let a1 = Float::with_val(PREC, 0.3);
        let l = quintic_log_rows(&a0, &a1).unwrap();
        let collapsed: Vec<Vec<Float>> = (0..2)
            .map(|i| (0..3).map(|j| l.rows.at(i, j).clone()).collect())
            .collect();
        let logs = UnitLogData {
            config,
            precision: PREC,
            full: vec![],
            collapsed,
        };
        let reg = regulator_from_logs(&l).unwrap();
        let basis = find_sigma_basis(&logs, &[1, 2], &reg, 6).unwrap().unwrap();
        // u0 is determined only up to units of the coefficient ring; the
        // found basis must span the same lattice (equal regulator, integral
        // change of basis)
        assert_lattice_equal(&basis.log_matrix, &l);
        assert!(basis.exponents.iter().all(|&e| e.abs() <= 1));
    }

    fn assert_lattice_equal(a: &LogMatrix, b: &LogMatrix) {
        let ra = regulator_from_logs(a).unwrap();
        let rb = regulator_from_logs(b).unwrap();
        assert!(((ra - &rb) / rb).abs().to_f64() < 1e-20);
        // b rows expressed over a rows must be integral
        let r = a.rank();
        let amin = Mat::from_fn(a.prec(), r, r, |i, j| a.rows.at(i, j).clone());
        let bmin = Mat::from_fn(b.prec(), r, r, |i, j| b.rows.at(i, j).clone());
        let x = bmin.mul(&amin.inverse().unwrap());
        for i in 0..r {
            for j in 0..r {
                let v = x.at(i, j).to_f64();
                assert!((v - v.round()).abs() < 1e-9, "non-integral entry {v}");
            }
        }
    }

    #[test]
    fn sigma_search_synthetic_composite_u0() {
        // true u0 = units[0]^2 * units[1]^-1; search must find exponents
        // reproducing the same lattice (up to sign conventions)
        let config = PrimeConfig::new(5).unwrap();
        let a0 = Float::with_val(PREC, 0.7);
        let a1 = Float::with_val(PREC, -0.2);
        let l = quintic_log_rows(&a0, &a1).unwrap();
        let reg = regulator_from_logs(&l).unwrap();
        // fake "fundamental units": v0 = 2*row0 - row1, v1 = row1 - row0,
        // chosen unimodular so the lattice is unchanged
        let mk = |c0: i64, c1: i64| -> Vec<Float> {
            (0..3)
                .map(|j| {
                    (l.rows.at(0, j) * Float::with_val(PREC, c0))
                        + (l.rows.at(1, j) * Float::with_val(PREC, c1))
                })
                .collect()
        };
        let logs = UnitLogData {
            config,
            precision: PREC,
            full: vec![],
            collapsed: vec![mk(2, -1), mk(-1, 1)],
        };
        let basis = find_sigma_basis(&logs, &[1, 2], &reg, 6).unwrap().unwrap();
        assert_lattice_equal(&basis.log_matrix, &l);
    }

    #[test]
    fn sigma_search_exhausts_on_wrong_regulator() {
        let config = PrimeConfig::new(5).unwrap();
        let a0 = Float::with_val(PREC, 1.0);
        let a1 = Float::with_val(PREC, 0.3);
        let l = quintic_log_rows(&a0, &a1).unwrap();
        let collapsed: Vec<Vec<Float>> = (0..2)
            .map(|i| (0..3).map(|j| l.rows.at(i, j).clone()).collect())
            .collect();
        let logs = UnitLogData {
            config,
            precision: PREC,
            full: vec![],
            collapsed,
        };
        let wrong = Float::with_val(PREC, 1e6);
        assert!(find_sigma_basis(&logs, &[1, 2], &wrong, 3).unwrap().is_none());
    }

    #[test]
    fn stable_labelings_match_torsor_relabelings() {
        // on real field data the sigma-stable labelings are exactly the
        // candidate relabelings composed onto one base assignment
        let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join("d7");
        let records = crate::fields::lmfdb::load_record_dir(&dir).unwrap();
        let record = &records[0];
        let config = record.validate().unwrap();
        let rts = roots(record, PREC).unwrap();
        let logs = unit_logs(record, &rts, PREC).unwrap();
        let stable = stable_labelings(&logs).unwrap();
        assert_eq!(stable.len(), config.r(), "one labeling per torsor element");
        let base = &stable[0];
        let mut expect: Vec<Vec<usize>> = candidate_labelings(config)
            .iter()
            .map(|gamma| gamma.iter().map(|&k| base[k - 1]).collect())
            .collect();
        expect.sort();
        let mut got = stable.clone();
        got.sort();
        assert_eq!(got, expect);
    }

    #[test]
    fn ideal_stability_on_fixture() {
        // the sigma^k action maps the basis rows into their own
        // integer row span, for every k
        let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join("d5");
        let records = crate::fields::lmfdb::load_record_dir(&dir).unwrap();
        let record = &records[0];
        let config = record.validate().unwrap();
        let opts = VerifyOptions::default();
        let result = verify_field(record, &opts).unwrap();
        let rts = roots(record, opts.precision).unwrap();
        let logs = unit_logs(record, &rts, opts.precision).unwrap();
        let reg = Float::with_val(
            opts.precision,
            Float::parse(record.regulator.as_ref().unwrap()).unwrap(),
        );
        let basis = find_sigma_basis(&logs, &result.labeling, &reg, opts.search_bound)
            .unwrap()
            .unwrap();
        let l = &basis.log_matrix;
        let r = config.r();
        let minor = Mat::from_fn(opts.precision, r, r, |i, j| l.rows.at(i, j).clone());
        let minor_inv = minor.inverse().unwrap();
        for k in 1..=r {
            for i in 0..r {
                let row: Vec<Float> = (0..=r).map(|j| l.rows.at(i, j).clone()).collect();
                let acted = crate::traceform::sigma_action_float(config, k, &row).unwrap();
                let b = Mat::from_fn(opts.precision, 1, r, |_, j| acted[j].clone());
                let coords = b.mul(&minor_inv);
                for j in 0..r {
                    let v = coords.at(0, j).to_f64();
                    assert!(
                        (v - v.round()).abs() < 1e-6,
                        "k={k} row={i}: non-integral coefficient {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn quintic_regulator_is_norm_form_of_real_logs() {
        // for every bundled quintic field: regulator = |N(a0, a1)| with
        // a0, a1 the logs of |u0|, |u1| at the real embedding
        let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join("d5");
        let records = crate::fields::lmfdb::load_record_dir(&dir).unwrap();
        let opts = VerifyOptions::default();
        for record in records.iter().take(5) {
            let result = verify_field(record, &opts).unwrap();
            let rts = roots(record, opts.precision).unwrap();
            let logs = unit_logs(record, &rts, opts.precision).unwrap();
            let reg_ref = Float::with_val(
                opts.precision,
                Float::parse(record.regulator.as_ref().unwrap()).unwrap(),
            );
            let basis = find_sigma_basis(&logs, &result.labeling, &reg_ref, opts.search_bound)
                .unwrap()
                .unwrap();
            let a0 = basis.log_matrix.rows.at(0, 0).clone();
            let a1 = basis.log_matrix.rows.at(1, 0).clone();
            let n = crate::lattice::quintic_norm_form(&a0, &a1).abs();
            let reg = regulator_from_logs(&basis.log_matrix).unwrap();
            let rel = ((n - &reg) / reg).abs().to_f64();
            assert!(rel < 1e-6, "{}: relative defect {rel}", record.label);
        }
    }

    #[test]
    fn pipeline_is_deterministic() {
        let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join("d5");
        let records = crate::fields::lmfdb::load_record_dir(&dir).unwrap();
        let opts = VerifyOptions::default();
        let a = serde_json::to_string(&verify_field(&records[0], &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&verify_field(&records[0], &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn record_validation() {
        let mut rec = test_record_x5_minus_2();
        assert!(rec.validate().is_ok());
        rec.r1 = 5;
        rec.r2 = 0;
        assert!(matches!(rec.validate(), Err(Error::Data(_))));
        let mut rec = test_record_x5_minus_2();
        rec.degree = 4;
        assert!(rec.validate().is_err());
        let mut rec = test_record_x5_minus_2();
        rec.units.pop();
        assert!(rec.validate().is_err());
    }

    #[test]
    fn torsion_unit_has_zero_log_vector() {
        let mut rec = test_record_x5_minus_2();
        rec.units = vec![vec!["-1".into()], vec!["1".into()]];
        let rts = roots(&rec, PREC).unwrap();
        let logs = unit_logs(&rec, &rts, PREC).unwrap();
        assert!(logs.full[0].iter().all(|v| v.clone().abs().to_f64() < 1e-50));
        assert!(logs.collapsed[0].iter().all(|v| v.clone().abs().to_f64() < 1e-50));

        // a non-unit is rejected by the zero-sum validation
        rec.units = vec![vec!["-1".into()], vec!["0".into(), "1".into()]];
        assert!(matches!(
            unit_logs(&rec, &rts, PREC),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn unit_coeff_parsing() {
        let mut rec = test_record_x5_minus_2();
        rec.units = vec![
            vec!["1/2".into(), "-3".into()],
            vec!["0".into(), "5/7".into()],
        ];
        let parsed = rec.unit_coeffs().unwrap();
        assert_eq!(parsed[0][0], Rational::from((1, 2)));
        assert_eq!(parsed[0][1], Rational::from(-3));
        assert_eq!(parsed[1][1], Rational::from((5, 7)));
        rec.units = vec![vec!["x".into()]];
        assert!(rec.unit_coeffs().is_err());
    }
}
