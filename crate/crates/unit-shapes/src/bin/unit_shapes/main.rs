//! Command-line surface: exact trace-form printing, shape computation,
//! field verification, LMFDB fetching, orbit sampling/checking, and SVG
//! figure generation.
//!
//! Exit codes: 0 success, 2 usage, 3 domain/degenerate input, 4 data/parse,
//! 5 network.

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use unit_shapes::error::Error;
use unit_shapes::fields::lmfdb::{fetch_lmfdb, load_record_dir, HttpTransport, LmfdbConfig};
use unit_shapes::fields::{csv_header, to_csv_row, verify_field, FieldRecord, VerifyOptions};
use unit_shapes::hypgeo::{default_arc_tol, on_arc_mod_gl2};
use unit_shapes::lattice::{
    gl2_orbit_pair, quintic_gram, quintic_norm_form, reduce_fundamental,
    uhp_from_gram, GramMatrix,
};
use unit_shapes::numeric::{Mat, QMat};
use unit_shapes::plot::{points_from_csv, render_svg, PlotSpec};
use unit_shapes::realcyclo::PrimeConfig;
use unit_shapes::torus::{
    default_ideal_reps, embedding_matrix, orbit_membership_mod_gl, orbit_point, IdealBasisMatrix,
    OrbitSearchOutcome, TorusPoint, DEFAULT_WORD_LENGTH,
};
use unit_shapes::traceform::{format_matrix, verify_equivariance, TraceFormData};

#[derive(Parser)]
#[command(name = "unit-shapes", version, about = "Unit-lattice shapes of odd-prime dihedral fields")]
struct Cli {
    /// Key=value config file; explicit flags win over file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print G, G~, G_unit, det(G) and the equivariance report, all exact.
    TraceForm(TraceFormArgs),
    /// Compute the UHP shape of a rank-2 lattice, reduced, with residuals.
    Shape(ShapeArgs),
    /// Run the full pipeline over a record set and write CSV/JSON reports.
    Verify(VerifyArgs),
    /// Query the LMFDB and populate the cache.
    Fetch(FetchArgs),
    /// Render a verify CSV as an SVG figure.
    Plot(PlotArgs),
    /// Sample torus-orbit points or check a Gram matrix against the orbit.
    #[command(subcommand)]
    Orbit(OrbitCommand),
}

#[derive(Args)]
struct TraceFormArgs {
    #[arg(long)]
    p: u32,
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    /// JSON file with a 2x2 Gram matrix [[a, b], [b, c]].
    #[arg(long)]
    gram_file: Option<PathBuf>,
    /// Verify a single bundled record by label.
    #[arg(long)]
    field_label: Option<String>,
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long)]
    precision: Option<u32>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Record source: "fixtures" or "lmfdb".
    #[arg(long)]
    source: String,
    #[arg(long, default_value_t = 5)]
    p: u32,
    #[arg(long)]
    limit: Option<usize>,
    /// Output directory for shapes.csv / shapes.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long)]
    bound: Option<i64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct FetchArgs {
    #[arg(long)]
    degree: u32,
    #[arg(long)]
    galois_label: Option<String>,
    #[arg(long)]
    r2: Option<u32>,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    delay_ms: Option<u64>,
}

#[derive(Args)]
struct PlotArgs {
    /// CSV of points (verify output, or bare x,y rows).
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    #[arg(long)]
    arc_samples: Option<usize>,
}

#[derive(Subcommand)]
enum OrbitCommand {
    /// Sample random torus points and report their shapes.
    Sample(OrbitSampleArgs),
    /// Check a Gram matrix for orbit membership modulo GL_r(Z).
    Check(OrbitCheckArgs),
}

#[derive(Args)]
struct OrbitSampleArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    precision: Option<u32>,
}

#[derive(Args)]
struct OrbitCheckArgs {
    #[arg(long)]
    p: u32,
    /// JSON file with an r x r Gram matrix.
    #[arg(long)]
    gram_file: PathBuf,
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    search_bound: Option<i64>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Validation(_) | Error::Domain(_) | Error::Rank(_) => 3,
        Error::Data(_) | Error::Parse(_) => 4,
        Error::Network(_) => 5,
        Error::Stage { source, .. } => exit_code_for(source),
        _ => 1,
    }
}

/// Plain key=value config file; '#' starts a comment.
fn load_config(path: &Path) -> Result<HashMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut out = HashMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse(format!("config line without '=': {line}")));
        };
        out.insert(
            k.trim().to_string(),
            v.trim().trim_matches('"').to_string(),
        );
    }
    Ok(out)
}

fn cfg_get<T: std::str::FromStr>(cfg: &HashMap<String, String>, key: &str) -> Option<T> {
    cfg.get(key).and_then(|v| v.parse().ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(4);
            }
        },
        None => HashMap::new(),
    };
    let result = match cli.command {
        Command::TraceForm(args) => cmd_trace_form(&args),
        Command::Shape(args) => cmd_shape(&args, &cfg),
        Command::Verify(args) => cmd_verify(&args, &cfg),
        Command::Fetch(args) => cmd_fetch(&args, &cfg),
        Command::Plot(args) => cmd_plot(&args, &cfg),
        Command::Orbit(OrbitCommand::Sample(args)) => cmd_orbit_sample(&args, &cfg),
        Command::Orbit(OrbitCommand::Check(args)) => cmd_orbit_check(&args, &cfg),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn cmd_trace_form(args: &TraceFormArgs) -> Result<u8, Error> {
    let config = match PrimeConfig::new(args.p) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(2);
        }
    };
    let data = TraceFormData::new(config);
    println!("p = {}, r = {}", config.p(), config.r());
    println!("G = {}", format_matrix(&data.g));
    println!("G~ = {}", format_matrix(&data.gtilde));
    println!("G_unit = {}", format_matrix(&data.gunit));
    println!("det(G) = {}", data.det_g());
    let report = verify_equivariance(config);
    for (i, ok) in &report.cases {
        println!(
            "equivariance i={i}: {}",
            if *ok { "pass" } else { "FAIL" }
        );
    }
    println!(
        "equivariance: {}",
        if report.all_pass() { "all pass" } else { "FAILURES" }
    );
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn read_gram_file(path: &Path, prec: u32) -> Result<GramMatrix, Error> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("Gram file must be a square 2D array".into()));
    }
    let mat = Mat::from_fn(prec, n, n, |i, j| Float::with_val(prec, rows[i][j]));
    GramMatrix::new(mat)
}

fn cmd_shape(args: &ShapeArgs, cfg: &HashMap<String, String>) -> Result<u8, Error> {
    let prec = args
        .precision
        .or_else(|| cfg_get(cfg, "precision"))
        .unwrap_or(128);
    let modes = [
        args.a0.is_some() || args.a1.is_some(),
        args.gram_file.is_some(),
        args.field_label.is_some(),
    ];
    if modes.iter().filter(|&&m| m).count() != 1 {
        eprintln!("error: give exactly one of (--a0 --a1), --gram-file, --field-label");
        return Ok(2);
    }

    if let Some(label) = &args.field_label {
        let mut records = Vec::new();
        for p in [5u32, 7, 11, 13] {
            let dir = fixtures_dir(args.fixtures.clone(), cfg, p);
            if let Ok(mut found) = load_record_dir(&dir) {
                records.append(&mut found);
            }
        }
        records.dedup_by(|a, b| a.label == b.label);
        let Some(record) = records.iter().find(|r| r.label == *label) else {
            return Err(Error::Data(format!("no record with label {label}")));
        };
        let opts = VerifyOptions {
            precision: prec.max(unit_shapes::DEFAULT_PRECISION),
            ..VerifyOptions::default()
        };
        let result = verify_field(record, &opts)?;
        println!("{}", serde_json::to_string_pretty(&result).unwrap());
        return Ok(0);
    }

    let gram = if let Some(path) = &args.gram_file {
        read_gram_file(path, prec)?
    } else {
        let (Some(a0), Some(a1)) = (args.a0, args.a1) else {
            eprintln!("error: --a0 and --a1 must be given together");
            return Ok(2);
        };
        let a0 = Float::with_val(prec, a0);
        let a1 = Float::with_val(prec, a1);
        let n = quintic_norm_form(&a0, &a1);
        println!("N(a0, a1) = {}", n.to_f64());
        match quintic_gram(&a0, &a1) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("error: norm form a0^2 - a0*a1 - a1^2 vanishes: {e}");
                return Ok(3);
            }
        }
    };
    let z = uhp_from_gram(&gram)?;
    let (reduced, word) = reduce_fundamental(&z);
    let (_, mirror) = gl2_orbit_pair(&reduced);
    let tol = default_arc_tol(z.prec());
    let check = on_arc_mod_gl2(&z, &tol);
    println!("raw point:      ({}, {})", z.x.to_f64(), z.y.to_f64());
    println!(
        "reduced:        ({}, {})  via {}",
        reduced.x.to_f64(),
        reduced.y.to_f64(),
        word.iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("mirror:         ({}, {})", mirror.x.to_f64(), mirror.y.to_f64());
    println!("circle residual: {:.3e}", check.residual.to_f64());
    println!("on arc:         {}", check.pass);
    Ok(0)
}

fn fixtures_dir(flag: Option<PathBuf>, cfg: &HashMap<String, String>, p: u32) -> PathBuf {
    let base = flag
        .or_else(|| cfg_get::<PathBuf>(cfg, "fixtures"))
        .unwrap_or_else(|| PathBuf::from("fixtures"));
    // accept either a directory that already holds records or a root with d5/d7
    let sub = base.join(format!("d{p}"));
    if sub.is_dir() {
        sub
    } else {
        base
    }
}

fn cmd_verify(args: &VerifyArgs, cfg: &HashMap<String, String>) -> Result<u8, Error> {
    let precision = args
        .precision
        .or_else(|| cfg_get(cfg, "precision"))
        .unwrap_or(unit_shapes::DEFAULT_PRECISION);
    let bound = args
        .bound
        .or_else(|| cfg_get(cfg, "bound"))
        .unwrap_or(unit_shapes::fields::DEFAULT_SEARCH_BOUND);
    let tol = args.tol.or_else(|| cfg_get(cfg, "tol")).unwrap_or(1e-6);

    let records: Vec<FieldRecord> = match args.source.as_str() {
        "fixtures" => {
            let dir = fixtures_dir(args.fixtures.clone(), cfg, args.p);
            let all = load_record_dir(&dir)?;
            all.into_iter().filter(|r| r.degree == args.p).collect()
        }
        "lmfdb" => {
            let cache = args
                .cache_dir
                .clone()
                .or_else(|| cfg_get(cfg, "cache-dir"))
                .unwrap_or_else(|| PathBuf::from("lmfdb-cache"));
            let all = load_record_dir(&cache).unwrap_or_default();
            if all.is_empty() {
                eprintln!(
                    "error: lmfdb cache {} is empty; run fetch first",
                    cache.display()
                );
                return Ok(2);
            }
            all.into_iter().filter(|r| r.degree == args.p).collect()
        }
        other => {
            eprintln!("error: unknown source '{other}' (expected fixtures or lmfdb)");
            return Ok(2);
        }
    };
    let records: Vec<FieldRecord> = match args.limit {
        Some(l) => records.into_iter().take(l).collect(),
        None => records,
    };
    if records.is_empty() {
        eprintln!("error: no records to verify");
        return Ok(2);
    }

    let opts = VerifyOptions {
        precision,
        search_bound: bound,
        tol,
        unimodular_bound: 2,
        word_length: DEFAULT_WORD_LENGTH,
    };
    let outcomes: Vec<(String, Result<unit_shapes::fields::ShapeResult, Error>)> = records
        .par_iter()
        .map(|r| (r.label.clone(), verify_field(r, &opts)))
        .collect();

    let mut rows = vec![csv_header().to_string()];
    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut max_circle = 0f64;
    let mut max_reg_delta = 0f64;
    for (label, outcome) in outcomes {
        match outcome {
            Ok(result) => {
                if !result.on_predicted_locus {
                    failures.push(format!("{label}: off the predicted locus"));
                }
                if let Some(res) = result.circle_residual {
                    max_circle = max_circle.max(res);
                }
                max_reg_delta = max_reg_delta.max(result.regulator_delta);
                rows.push(to_csv_row(&result));
                results.push(result);
            }
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }

    if let Some(out) = args
        .out
        .clone()
        .or_else(|| cfg_get::<PathBuf>(cfg, "out"))
    {
        std::fs::create_dir_all(&out)?;
        std::fs::write(out.join("shapes.csv"), rows.join("\n") + "\n")?;
        std::fs::write(
            out.join("shapes.json"),
            serde_json::to_string_pretty(&results).unwrap() + "\n",
        )?;
        println!("wrote {}", out.join("shapes.csv").display());
    } else {
        for row in &rows {
            println!("{row}");
        }
    }
    println!(
        "unit-shapes v{} precision={precision} bound={bound} tol={tol:e}",
        unit_shapes::VERSION
    );
    println!(
        "{}/{} pass, max circle residual {:.3e}, max regulator delta {:.3e}",
        results.iter().filter(|r| r.on_predicted_locus).count(),
        results.len() + failures.len(),
        max_circle,
        max_reg_delta
    );
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("FAIL {f}");
        }
        return Ok(1);
    }
    Ok(0)
}

fn cmd_fetch(args: &FetchArgs, cfg: &HashMap<String, String>) -> Result<u8, Error> {
    let cache = args
        .cache_dir
        .clone()
        .or_else(|| cfg_get(cfg, "cache-dir"))
        .or_else(|| std::env::var("UNIT_SHAPES_CACHE").ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lmfdb-cache"));
    let galois = args
        .galois_label
        .clone()
        .unwrap_or_else(|| format!("{}T2", args.degree));
    let r2 = args.r2.unwrap_or((args.degree - 1) / 2);
    let mut lmfdb = LmfdbConfig::default();
    if let Some(base) = cfg.get("lmfdb-base-url") {
        lmfdb.base_url = base.clone();
    }
    if let Some(tpl) = cfg.get("lmfdb-query-template") {
        lmfdb.query_template = tpl.clone();
    }
    if let Some(ps) = cfg_get(cfg, "lmfdb-page-size") {
        lmfdb.page_size = ps;
    }
    if let Some(delay) = args.delay_ms.or_else(|| cfg_get(cfg, "lmfdb-delay-ms")) {
        lmfdb.delay_ms = delay;
    }
    let transport = HttpTransport::new(lmfdb.delay_ms)?;
    let records = fetch_lmfdb(
        &lmfdb,
        args.degree,
        &galois,
        r2,
        args.limit,
        &cache,
        &transport,
    )?;
    println!(
        "fetched {} records into {} (unit-shapes v{})",
        records.len(),
        cache.display(),
        unit_shapes::VERSION
    );
    Ok(0)
}

fn cmd_plot(args: &PlotArgs, cfg: &HashMap<String, String>) -> Result<u8, Error> {
    let text = std::fs::read_to_string(&args.points)?;
    let points = points_from_csv(&text)?;
    let mut spec = PlotSpec::default();
    if let Some(w) = args.width.or_else(|| cfg_get(cfg, "width")) {
        spec.width = w;
    }
    if let Some(h) = args.height.or_else(|| cfg_get(cfg, "height")) {
        spec.height = h;
    }
    if let Some(s) = args.arc_samples.or_else(|| cfg_get(cfg, "arc-samples")) {
        spec.arc_samples = s;
    }
    let svg = render_svg(&points, &spec)?;
    std::fs::write(&args.out, svg)?;
    println!("wrote {} ({} points)", args.out.display(), points.len());
    Ok(0)
}

fn cmd_orbit_sample(args: &OrbitSampleArgs, cfg: &HashMap<String, String>) -> Result<u8, Error> {
    let prec = args
        .precision
        .or_else(|| cfg_get(cfg, "precision"))
        .unwrap_or(128);
    let config = match PrimeConfig::new(args.p) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(2);
        }
    };
    let tf = TraceFormData::new(config);
    let gunit = GramMatrix::new(QMat::from_integers(&tf.gunit).to_mat(prec))?;
    let emb = embedding_matrix(config, prec)?;
    let m = IdealBasisMatrix::identity(config.r());
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    println!("x,y,circle_residual,on_arc");
    let tol = default_arc_tol(prec);
    for _ in 0..args.count {
        let t = TorusPoint::new(
            (0..config.r())
                .map(|_| {
                    let mag = rng.gen_range(0.05f64..4.0);
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    Float::with_val(prec, sign * mag)
                })
                .collect(),
        )?;
        let g = orbit_point(&gunit, &emb, &t, &m)?;
        if config.p() == 5 {
            let z = uhp_from_gram(&g)?;
            let (red, _) = reduce_fundamental(&z);
            let check = on_arc_mod_gl2(&z, &tol);
            println!(
                "{:.12},{:.12},{:.3e},{}",
                red.x.to_f64(),
                red.y.to_f64(),
                check.residual.to_f64(),
                check.pass
            );
        } else {
            let rows: Vec<Vec<f64>> = (0..config.r())
                .map(|i| (0..config.r()).map(|j| g.mat.at(i, j).to_f64()).collect())
                .collect();
            println!("{}", serde_json::to_string(&rows).unwrap());
        }
    }
    Ok(0)
}

fn cmd_orbit_check(args: &OrbitCheckArgs, cfg: &HashMap<String, String>) -> Result<u8, Error> {
    let prec = args
        .precision
        .or_else(|| cfg_get(cfg, "precision"))
        .unwrap_or(128);
    let config = match PrimeConfig::new(args.p) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(2);
        }
    };
    let tol_f = args.tol.or_else(|| cfg_get(cfg, "tol")).unwrap_or(1e-9);
    let search_bound = args
        .search_bound
        .or_else(|| cfg_get(cfg, "search-bound"))
        .unwrap_or(2);
    let gram = read_gram_file(&args.gram_file, prec)?;
    if gram.rank() != config.r() {
        return Err(Error::Validation(format!(
            "Gram rank {} does not match r = {}",
            gram.rank(),
            config.r()
        )));
    }
    let tf = TraceFormData::new(config);
    let gunit = GramMatrix::new(QMat::from_integers(&tf.gunit).to_mat(prec))?;
    let emb = embedding_matrix(config, prec)?;
    let reps = default_ideal_reps(config);
    let tol = Float::with_val(prec, tol_f);
    match orbit_membership_mod_gl(
        &gram,
        &gunit,
        &emb,
        &reps,
        &tol,
        search_bound,
        DEFAULT_WORD_LENGTH,
    )? {
        OrbitSearchOutcome::Found(hit) => {
            println!(
                "on orbit: residual {:.3e}, ideal class #{}, twist {:?}, |t| = {:?}",
                hit.membership.residual.to_f64(),
                hit.rep_index,
                hit.unimodular,
                hit.membership
                    .t
                    .t
                    .iter()
                    .map(|v| v.to_f64())
                    .collect::<Vec<_>>()
            );
            Ok(0)
        }
        OrbitSearchOutcome::NotFoundWithinBound => {
            println!("not found within search bound (not a non-membership certificate)");
            Ok(1)
        }
    }
}
