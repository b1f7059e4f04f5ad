//! LMFDB number-field client: parameterized queries against the public API,
//! a one-file-per-label JSON cache, and a normalizer that converts the API's
//! polynomial-string unit format into coefficient vectors.
//!
//! The endpoint, query template, and page size are configuration values; the
//! transport is injectable so everything below the HTTP layer is testable
//! offline.

use super::FieldRecord;
use crate::error::{Error, Result};
use crate::realcyclo::PrimeConfig;
use rug::Rational;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// Client configuration. `query_template` receives {degree}, {galois_label},
/// {r2}, {limit} and {offset}.
#[derive(Debug, Clone)]
pub struct LmfdbConfig {
    pub base_url: String,
    pub query_template: String,
    pub page_size: usize,
    pub delay_ms: u64,
}

impl Default for LmfdbConfig {
    fn default() -> Self {
        LmfdbConfig {
            base_url: "https://www.lmfdb.org/api/nf_fields/".into(),
            query_template: "?_format=json&_fields=label,coeffs,disc_abs,disc_sign,\
                             galois_label,r2,regulator,units,class_number\
                             &degree={degree}&galois_label={galois_label}&r2={r2}\
                             &_sort=disc_abs&_limit={limit}&_offset={offset}"
                .into(),
            page_size: 100,
            delay_ms: 500,
        }
    }
}

/// Minimal HTTP GET abstraction; injected so tests run offline.
pub trait Transport {
    fn get(&self, url: &str) -> Result<String>;
}

/// Blocking reqwest transport with a fixed inter-request delay.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    delay: Duration,
}

impl HttpTransport {
    pub fn new(delay_ms: u64) -> Result<HttpTransport> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .user_agent(format!("unit-shapes/{}", crate::VERSION))
            .build()
            .map_err(|e| Error::Network(e.to_string()))?;
        Ok(HttpTransport {
            client,
            delay: Duration::from_millis(delay_ms),
        })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<String> {
        std::thread::sleep(self.delay);
        let resp = self
            .client
            .get(url)
            .send()
            .map_err(|e| Error::Network(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(Error::Network(format!("HTTP {} from {url}", resp.status())));
        }
        resp.text().map_err(|e| Error::Network(e.to_string()))
    }
}

/// Parse one LMFDB unit representation into ascending "num/den" strings.
/// Accepts either a polynomial string in `a` ("1/2*a^4 - a + 3") or an
/// already-split coefficient array.
pub fn normalize_unit(value: &serde_json::Value, degree: usize) -> Result<Vec<String>> {
    match value {
        serde_json::Value::String(s) => {
            let coeffs = parse_unit_poly(s, degree)?;
            Ok(coeffs.iter().map(rational_string).collect())
        }
        serde_json::Value::Array(parts) => {
            let mut out = vec![Rational::new(); degree];
            for (i, p) in parts.iter().enumerate() {
                if i >= degree {
                    return Err(Error::Parse("unit has too many coefficients".into()));
                }
                out[i] = json_rational(p)?;
            }
            Ok(out.iter().map(rational_string).collect())
        }
        other => Err(Error::Parse(format!("unsupported unit format: {other}"))),
    }
}

fn rational_string(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn json_rational(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::Number(n) => n
            .to_string()
            .parse::<Rational>()
            .map_err(|_| Error::Parse(format!("bad number {n}"))),
        serde_json::Value::String(s) => s
            .parse::<Rational>()
            .map_err(|_| Error::Parse(format!("bad rational '{s}'"))),
        other => Err(Error::Parse(format!("bad coefficient {other}"))),
    }
}

/// Parse a polynomial string in the generator `a` with rational coefficients
/// into an ascending coefficient vector of length `degree`.
pub fn parse_unit_poly(s: &str, degree: usize) -> Result<Vec<Rational>> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty unit polynomial".into()));
    }
    let mut out = vec![Rational::new(); degree];
    // split into signed terms
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 {
            let prev = compact.as_bytes()[i - 1] as char;
            if prev != '^' && prev != '*' && prev != '/' && prev != '+' && prev != '-' {
                terms.push(std::mem::take(&mut cur));
            }
        }
        cur.push(ch);
    }
    terms.push(cur);

    for term in terms {
        let t = term.trim_start_matches('+');
        let (coeff_str, power) = if let Some(pos) = t.find('a') {
            let coeff_part = t[..pos].trim_end_matches('*');
            let after = &t[pos + 1..];
            let power = if let Some(exp) = after.strip_prefix('^') {
                exp.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad exponent in '{term}'")))?
            } else if after.is_empty() {
                1
            } else {
                return Err(Error::Parse(format!("bad term '{term}'")));
            };
            (coeff_part, power)
        } else {
            (t, 0)
        };
        let coeff = match coeff_str {
            "" => Rational::from(1),
            "-" => Rational::from(-1),
            s => s
                .parse::<Rational>()
                .map_err(|_| Error::Parse(format!("bad coefficient '{s}' in '{term}'")))?,
        };
        if power >= degree {
            return Err(Error::Parse(format!(
                "term '{term}' has degree {power} >= {degree}"
            )));
        }
        out[power] += coeff;
    }
    Ok(out)
}

/// Convert one LMFDB API row into our record schema.
pub fn normalize_record(row: &serde_json::Value, degree: u32) -> Result<FieldRecord> {
    let obj = row
        .as_object()
        .ok_or_else(|| Error::Parse(format!("expected object, got: {row}")))?;
    let label = obj
        .get("label")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Parse("row has no label".into()))?
        .to_string();
    let coeffs: Vec<i64> = obj
        .get("coeffs")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Parse(format!("{label}: missing coeffs")))?
        .iter()
        .map(|v| {
            v.as_i64()
                .ok_or_else(|| Error::Parse(format!("{label}: non-integer coefficient")))
        })
        .collect::<Result<_>>()?;
    let r2 = obj.get("r2").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    let r1 = degree - 2 * r2;
    let galois_label = obj
        .get("galois_label")
        .and_then(|v| v.as_str())
        .unwrap_or("")
        .to_string();
    let units = obj
        .get("units")
        .and_then(|v| v.as_array())
        .map(|arr| {
            arr.iter()
                .map(|u| normalize_unit(u, degree as usize))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?
        .unwrap_or_default();
    let regulator = obj.get("regulator").and_then(|v| match v {
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::String(s) => Some(s.clone()),
        _ => None,
    });
    let disc_abs = obj
        .get("disc_abs")
        .map(|v| v.to_string())
        .unwrap_or_else(|| "0".into());
    let disc_sign = obj.get("disc_sign").and_then(|v| v.as_i64()).unwrap_or(1);
    let disc = if disc_sign < 0 {
        format!("-{disc_abs}")
    } else {
        disc_abs
    };
    Ok(FieldRecord {
        label,
        degree,
        coeffs,
        r1,
        r2,
        galois_label,
        units,
        regulator: regulator.filter(|s| !s.is_empty()),
        disc,
    })
}

fn cache_path(cache_dir: &Path, label: &str) -> PathBuf {
    cache_dir.join(format!("{label}.json"))
}

/// Write one record to the cache (idempotent).
pub fn write_cache(cache_dir: &Path, record: &FieldRecord) -> Result<()> {
    std::fs::create_dir_all(cache_dir)?;
    let path = cache_path(cache_dir, &record.label);
    let body = serde_json::to_string_pretty(record)
        .map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, body + "\n")?;
    Ok(())
}

/// Load every record in a directory of per-label JSON files, sorted by
/// |disc| then label.
pub fn load_record_dir(dir: &Path) -> Result<Vec<FieldRecord>> {
    let mut out = Vec::new();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let body = std::fs::read_to_string(&path)?;
        let record: FieldRecord = serde_json::from_str(&body)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        out.push(record);
    }
    out.sort_by_key(|r| {
        let disc_abs = r
            .disc
            .trim_start_matches('-')
            .parse::<u128>()
            .unwrap_or(u128::MAX);
        (disc_abs, r.label.clone())
    });
    Ok(out)
}

/// Query the LMFDB for fields of the given degree/Galois label/signature,
/// normalize, and cache. Falls back to the cache when the transport fails
/// and the cache is nonempty.
pub fn fetch_lmfdb(
    cfg: &LmfdbConfig,
    degree: u32,
    galois_label: &str,
    r2: u32,
    limit: Option<usize>,
    cache_dir: &Path,
    transport: &dyn Transport,
) -> Result<Vec<FieldRecord>> {
    PrimeConfig::new(degree)
        .map_err(|_| Error::Validation(format!("degree must be an odd prime >= 5, got {degree}")))?;
    let mut records = Vec::new();
    let mut offset = 0usize;
    loop {
        let page_limit = match limit {
            Some(l) => cfg.page_size.min(l - records.len()),
            None => cfg.page_size,
        };
        if page_limit == 0 {
            break;
        }
        let query = cfg
            .query_template
            .replace("{degree}", &degree.to_string())
            .replace("{galois_label}", galois_label)
            .replace("{r2}", &r2.to_string())
            .replace("{limit}", &page_limit.to_string())
            .replace("{offset}", &offset.to_string());
        let url = format!("{}{}", cfg.base_url, query);
        let body = match transport.get(&url) {
            Ok(b) => b,
            Err(e) => {
                let cached = load_record_dir(cache_dir).unwrap_or_default();
                if records.is_empty() && !cached.is_empty() {
                    return Ok(match limit {
                        Some(l) => cached.into_iter().take(l).collect(),
                        None => cached,
                    });
                }
                return Err(e);
            }
        };
        let parsed: serde_json::Value = serde_json::from_str(&body).map_err(|e| {
            let excerpt: String = body.chars().take(200).collect();
            Error::Parse(format!("malformed response ({e}); payload starts: {excerpt}"))
        })?;
        let data = parsed
            .get("data")
            .and_then(|v| v.as_array())
            .ok_or_else(|| {
                let excerpt: String = body.chars().take(200).collect();
                Error::Parse(format!("response has no data array; payload starts: {excerpt}"))
            })?;
        if data.is_empty() {
            break;
        }
        for row in data {
            let record = normalize_record(row, degree)?;
            write_cache(cache_dir, &record)?;
            records.push(record);
        }
        if let Some(l) = limit {
            if records.len() >= l {
                records.truncate(l);
                break;
            }
        }
        if data.len() < page_limit {
            break;
        }
        offset += data.len();
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    struct FakeTransport {
        pages: RefCell<Vec<String>>,
        urls: RefCell<Vec<String>>,
    }

    impl Transport for FakeTransport {
        fn get(&self, url: &str) -> Result<String> {
            self.urls.borrow_mut().push(url.to_string());
            let mut pages = self.pages.borrow_mut();
            if pages.is_empty() {
                Err(Error::Network("no more pages".into()))
            } else {
                Ok(pages.remove(0))
            }
        }
    }

    fn sample_row() -> serde_json::Value {
        serde_json::json!({
            "label": "5.1.2209.1",
            "coeffs": [-1, 1, 3, -2, -3, 1],
            "disc_abs": 2209,
            "disc_sign": 1,
            "galois_label": "5T2",
            "r2": 2,
            "regulator": 0.3469476120656434,
            "units": ["a^4-2*a^3-a^2+a+1", "1/2*a^2 - a - 1/2"],
            "class_number": 1
        })
    }

    #[test]
    fn parse_poly_strings() {
        let c = parse_unit_poly("a^4-2*a^3-a^2+a+1", 5).unwrap();
        let expect: Vec<i64> = vec![1, 1, -1, -2, 1];
        for (got, want) in c.iter().zip(expect) {
            assert_eq!(*got, Rational::from(want));
        }

        let c = parse_unit_poly("1/2*a^2 - a - 1/2", 5).unwrap();
        assert_eq!(c[0], Rational::from((-1, 2)));
        assert_eq!(c[1], Rational::from(-1));
        assert_eq!(c[2], Rational::from((1, 2)));

        let c = parse_unit_poly("-a", 3).unwrap();
        assert_eq!(c[1], Rational::from(-1));

        let c = parse_unit_poly("7", 3).unwrap();
        assert_eq!(c[0], Rational::from(7));

        assert!(parse_unit_poly("a^9", 5).is_err());
        assert!(parse_unit_poly("", 5).is_err());
        assert!(parse_unit_poly("b+1", 5).is_err());
    }

    #[test]
    fn normalize_sample_record() {
        let rec = normalize_record(&sample_row(), 5).unwrap();
        assert_eq!(rec.label, "5.1.2209.1");
        assert_eq!(rec.r1, 1);
        assert_eq!(rec.r2, 2);
        assert_eq!(rec.disc, "2209");
        assert_eq!(rec.units.len(), 2);
        assert_eq!(rec.units[0], vec!["1", "1", "-1", "-2", "1"]);
        assert_eq!(rec.units[1][0], "-1/2");
        assert!(rec.regulator.is_some());
        assert!(rec.validate().is_ok());
    }

    #[test]
    fn fetch_pages_and_caches() {
        let dir = tempfile::tempdir().unwrap();
        let page = serde_json::json!({ "data": [sample_row()] }).to_string();
        let transport = FakeTransport {
            pages: RefCell::new(vec![page]),
            urls: RefCell::new(vec![]),
        };
        let cfg = LmfdbConfig {
            delay_ms: 0,
            ..LmfdbConfig::default()
        };
        let recs = fetch_lmfdb(&cfg, 5, "5T2", 2, Some(20), dir.path(), &transport).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(dir.path().join("5.1.2209.1.json").exists());
        let url = transport.urls.borrow()[0].clone();
        assert!(url.contains("degree=5"));
        assert!(url.contains("galois_label=5T2"));

        // idempotent re-fetch falls back to the populated cache on failure
        let dead = FakeTransport {
            pages: RefCell::new(vec![]),
            urls: RefCell::new(vec![]),
        };
        let recs = fetch_lmfdb(&cfg, 5, "5T2", 2, None, dir.path(), &dead).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].label, "5.1.2209.1");
    }

    #[test]
    fn fetch_truncates_to_limit() {
        let dir = tempfile::tempdir().unwrap();
        // one page of 30 rows; limit 20 must return exactly 20
        let mut rows = Vec::new();
        for i in 0..30 {
            let mut row = sample_row();
            row["label"] = serde_json::json!(format!("5.1.{}.1", 2209 + i));
            rows.push(row);
        }
        let page = serde_json::json!({ "data": rows }).to_string();
        let transport = FakeTransport {
            pages: RefCell::new(vec![page]),
            urls: RefCell::new(vec![]),
        };
        let cfg = LmfdbConfig {
            delay_ms: 0,
            ..LmfdbConfig::default()
        };
        let recs = fetch_lmfdb(&cfg, 5, "5T2", 2, Some(20), dir.path(), &transport).unwrap();
        assert_eq!(recs.len(), 20);
    }

    #[test]
    fn fetch_rejects_bad_degree() {
        let dir = tempfile::tempdir().unwrap();
        let transport = FakeTransport {
            pages: RefCell::new(vec![]),
            urls: RefCell::new(vec![]),
        };
        let cfg = LmfdbConfig::default();
        assert!(fetch_lmfdb(&cfg, 4, "4T3", 1, None, dir.path(), &transport).is_err());
    }

    #[test]
    fn network_failure_with_empty_cache_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let transport = FakeTransport {
            pages: RefCell::new(vec![]),
            urls: RefCell::new(vec![]),
        };
        let cfg = LmfdbConfig {
            delay_ms: 0,
            ..LmfdbConfig::default()
        };
        let out = fetch_lmfdb(&cfg, 5, "5T2", 2, None, dir.path(), &transport);
        assert!(matches!(out, Err(Error::Network(_))));
    }

    #[test]
    fn malformed_response_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let transport = FakeTransport {
            pages: RefCell::new(vec!["<html>oops".into()]),
            urls: RefCell::new(vec![]),
        };
        let cfg = LmfdbConfig {
            delay_ms: 0,
            ..LmfdbConfig::default()
        };
        let out = fetch_lmfdb(&cfg, 5, "5T2", 2, None, dir.path(), &transport);
        match out {
            Err(Error::Parse(msg)) => assert!(msg.contains("oops")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
