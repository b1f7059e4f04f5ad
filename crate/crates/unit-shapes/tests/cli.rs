//! End-to-end tests of the command-line surface: output contents, exit
//! codes, and determinism of generated artifacts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_unit-shapes"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixtures_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn trace_form_p5_and_p7() {
    let out = run(&["trace-form", "--p", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("G_unit = [[6, -3], [-3, 14]]"));
    assert!(text.contains("det(G) = 5"));
    assert!(text.contains("all pass"));

    let out = run(&["trace-form", "--p", "7"]);
    assert!(stdout(&out).contains("det(G) = 49"));
}

#[test]
fn trace_form_rejects_composite() {
    let out = run(&["trace-form", "--p", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shape_from_coordinates() {
    let out = run(&["shape", "--a0", "1", "--a1", "0.3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("0.31081"), "reduced x: {text}");
    assert!(text.contains("1.42777"), "reduced y: {text}");
    assert!(text.contains("on arc:         true"));
}

#[test]
fn shape_mode_conflicts_and_degenerate() {
    let dir = tmpdir("shape-modes");
    let gram = dir.join("gram.json");
    std::fs::write(&gram, "[[6.0, -3.0], [-3.0, 14.0]]").unwrap();

    // two modes at once -> usage error
    let out = run(&[
        "shape",
        "--a0",
        "1",
        "--a1",
        "0.3",
        "--gram-file",
        gram.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // degenerate norm form -> exit 3
    let out = run(&["shape", "--a0", "0", "--a1", "0"]);
    assert_eq!(out.status.code(), Some(3));

    // gram-file mode reproduces the base point
    let out = run(&["shape", "--gram-file", gram.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("-0.5"), "{text}");
    assert!(text.contains("1.4433"), "{text}");
}

#[test]
fn verify_fixtures_and_plot_roundtrip() {
    let dir = tmpdir("verify-out");
    let out = run(&[
        "verify",
        "--source",
        "fixtures",
        "--p",
        "5",
        "--limit",
        "3",
        "--fixtures",
        fixtures_root().to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "verify failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("3/3 pass"), "{text}");
    let csv_path = dir.join("shapes.csv");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("label,x,y,circle_residual"));
    assert_eq!(csv.lines().count(), 4);

    // plot the verify output; deterministic across runs
    let svg_path = dir.join("fig.svg");
    for _ in 0..2 {
        let out = run(&[
            "plot",
            "--points",
            csv_path.to_str().unwrap(),
            "--out",
            svg_path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<circle").count(), 3);

    let again = {
        let alt = dir.join("fig2.svg");
        run(&[
            "plot",
            "--points",
            csv_path.to_str().unwrap(),
            "--out",
            alt.to_str().unwrap(),
        ]);
        std::fs::read_to_string(&alt).unwrap()
    };
    assert_eq!(svg, again, "SVG output must be deterministic");
}

#[test]
fn verify_septic_populates_orbit_column() {
    let dir = tmpdir("verify-d7");
    let out = run(&[
        "verify",
        "--source",
        "fixtures",
        "--p",
        "7",
        "--limit",
        "2",
        "--fixtures",
        fixtures_root().to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("shapes.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let oi = header.iter().position(|c| *c == "orbit_residual").unwrap();
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert!(!fields[oi].is_empty(), "orbit column empty: {line}");
        assert!(fields[oi].parse::<f64>().unwrap() < 1e-6);
    }
}

#[test]
fn shape_by_field_label() {
    let out = run(&[
        "shape",
        "--field-label",
        "5.1.2209.1",
        "--fixtures",
        fixtures_root().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("\"on_predicted_locus\": true"), "{text}");
    assert!(text.contains("\"label\": \"5.1.2209.1\""));
}

#[test]
fn verify_rejects_empty_source() {
    let dir = tmpdir("empty-fixtures");
    std::fs::create_dir_all(dir.join("d5")).unwrap();
    let out = run(&[
        "verify",
        "--source",
        "fixtures",
        "--p",
        "5",
        "--fixtures",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["verify", "--source", "nonsense", "--p", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_rejects_malformed_row() {
    let dir = tmpdir("bad-plot");
    let csv = dir.join("pts.csv");
    std::fs::write(&csv, "label,x,y\nA,0.3,1.4\nB,not-a-number,2\n").unwrap();
    let out = run(&[
        "plot",
        "--points",
        csv.to_str().unwrap(),
        "--out",
        dir.join("o.svg").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn orbit_sample_and_check() {
    let out = run(&["orbit", "sample", "--p", "5", "--count", "5", "--seed", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));

    // a sampled p=7 orbit Gram passes the membership check
    let out = run(&["orbit", "sample", "--p", "7", "--count", "1", "--seed", "9"]);
    assert!(out.status.success());
    let gram_line = stdout(&out).lines().last().unwrap().to_string();
    let dir = tmpdir("orbit-check");
    let gram = dir.join("g.json");
    std::fs::write(&gram, &gram_line).unwrap();
    let out = run(&["orbit", "check", "--p", "7", "--gram-file", gram.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("on orbit"));

    // the square lattice is not on the p=5 orbit
    let id = dir.join("id.json");
    std::fs::write(&id, "[[1.0, 0.0], [0.0, 1.0]]").unwrap();
    let out = run(&["orbit", "check", "--p", "5", "--gram-file", id.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fetch_network_failure_is_exit_5() {
    let dir = tmpdir("fetch-cache-empty");
    let cfg = dir.join("cfg");
    // unroutable endpoint and no cache: transport error surfaces as exit 5
    std::fs::write(
        &cfg,
        "lmfdb-base-url = http://127.0.0.1:9/api/nf_fields/\nlmfdb-delay-ms = 0\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "fetch",
            "--degree",
            "5",
            "--cache-dir",
            dir.join("cache").to_str().unwrap(),
            "--limit",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn fetch_rejects_even_degree() {
    let dir = tmpdir("fetch-bad-degree");
    let out = run(&[
        "fetch",
        "--degree",
        "4",
        "--cache-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tmpdir("config-defaults");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "precision = 160\n# comment line\ntol = 1e-8\n").unwrap();
    let out = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "verify",
            "--source",
            "fixtures",
            "--p",
            "5",
            "--limit",
            "1",
            "--fixtures",
            fixtures_root().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("precision=160"), "{text}");
    assert!(text.contains("tol=1e-8"), "{text}");
}
