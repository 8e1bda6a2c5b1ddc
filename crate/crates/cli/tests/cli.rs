//! End-to-end tests of the `optloss` binary: published reference points
//! through the real argument surface, file emission with manifests, and
//! byte-determinism of the data formats.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optloss"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "optloss {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

fn run_raw(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// Parses the two-column text report into key -> value.
fn parse_report(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|line| {
            let mut it = line.split_whitespace();
            let key = it.next()?;
            let value = it.next()?;
            Some((key.to_string(), value.to_string()))
        })
        .collect()
}

fn report_f64(report: &HashMap<String, String>, key: &str) -> f64 {
    report
        .get(key)
        .unwrap_or_else(|| panic!("report key {key} missing"))
        .parse()
        .unwrap_or_else(|_| panic!("report key {key} is not a number"))
}

/// Parses CSV into (header, rows of f64-or-string cells kept as strings).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("csv header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("column {name} missing from {header:?}"))
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("optloss_test_{}_{name}", std::process::id()));
    p
}

#[test]
fn capacity_coherent_reference_row() {
    let report = parse_report(&run_ok(&[
        "capacity",
        "--channel",
        "coherent",
        "--eta",
        "0.9",
        "--n",
        "8.575",
    ]));
    let bits = report_f64(&report, "mutual_information_bits");
    assert!((bits - 3.124).abs() < 1e-3, "got {bits}");
}

#[test]
fn capacity_squeezed_achieves_the_bound_losslessly() {
    let text = run_ok(&[
        "capacity",
        "--channel",
        "squeezed",
        "--eta",
        "1",
        "--n",
        "3",
    ]);
    let report = parse_report(&text);
    let nats = report_f64(&report, "mutual_information_nats");
    assert!((nats - 7f64.ln()).abs() < 1e-12, "got {nats}");
    let bound = report_f64(&report, "hall_bound_nats");
    assert!((bound - 7f64.ln()).abs() < 1e-12);
    assert!(text.contains("(achieved)"));
}

#[test]
fn capacity_squeezed_with_explicit_xi() {
    // xi = 1 is the unsqueezed homodyne channel: I = ln(1 + 4 eta N) / 2.
    let report = parse_report(&run_ok(&[
        "capacity",
        "--channel",
        "squeezed",
        "--eta",
        "0.5",
        "--n",
        "2",
        "--xi",
        "1",
    ]));
    let nats = report_f64(&report, "mutual_information_nats");
    assert!((nats - 0.5 * 5f64.ln()).abs() < 1e-12);
}

#[test]
fn capacity_number_thermal_reference_row() {
    let report = parse_report(&run_ok(&[
        "capacity",
        "--channel",
        "number",
        "--prior",
        "thermal",
        "--eta",
        "0.55",
        "--n",
        "6.729",
    ]));
    let bits = report_f64(&report, "mutual_information_bits");
    assert!((bits - 1.595).abs() < 2e-3, "got {bits}");
}

#[test]
fn capacity_rejects_out_of_range_eta() {
    let out = run_raw(&[
        "capacity",
        "--channel",
        "coherent",
        "--eta",
        "1.5",
        "--n",
        "1",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("attenuation"), "stderr: {stderr}");
}

#[test]
fn optimize_lossless_prior_is_thermal() {
    let out_path = temp_path("lossless_prior.csv");
    let report = parse_report(&run_ok(&[
        "optimize",
        "--eta",
        "1",
        "--n",
        "1",
        "--iters",
        "5000",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    assert!((report_f64(&report, "mu") - std::f64::consts::LN_2).abs() < 2e-3);
    assert!((report_f64(&report, "n_achieved") - 1.0).abs() < 1.1e-3);
    assert!((report_f64(&report, "mutual_information_bits") - 2.0).abs() < 1e-3);

    // Prior file: p_n = 2^-(n+1) within 1e-4.
    let body = std::fs::read_to_string(&out_path).expect("prior file written");
    let (header, rows) = parse_csv(&body);
    assert_eq!(header, vec!["n", "p_n"]);
    assert_eq!(rows.len(), 200);
    for (n, row) in rows.iter().enumerate().take(12) {
        let p: f64 = row[1].parse().unwrap();
        let expect = 0.5f64.powi(n as i32 + 1);
        assert!((p - expect).abs() < 1e-4, "p_{n} = {p}, expected ~{expect}");
    }

    // The manifest sits beside the data file and references it.
    let manifest_path = PathBuf::from(format!("{}.manifest.json", out_path.display()));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "optimize");
    assert!(manifest["outputs"][0]
        .as_str()
        .unwrap()
        .ends_with("lossless_prior.csv"));
    assert!(manifest["version"].as_str().is_some());

    std::fs::remove_file(&out_path).ok();
    std::fs::remove_file(&manifest_path).ok();
}

#[test]
fn optimize_strong_loss_reference_row() {
    let out_path = temp_path("row_h_prior.csv");
    let report = parse_report(&run_ok(&[
        "optimize",
        "--eta",
        "0.15",
        "--n",
        "4.040",
        "--iters",
        "10000",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    let bits = report_f64(&report, "mutual_information_bits");
    assert!((bits - 0.720).abs() < 0.01, "got {bits}");
    let pct = report_f64(&report, "improvement_pct");
    assert!((pct - 73.08).abs() < 1.0, "got {pct}%");
    assert!(report_f64(&report, "gap_count") >= 1.0, "expected gaps");

    // Zero-probability gaps are visible in the emitted prior.
    let body = std::fs::read_to_string(&out_path).unwrap();
    let (_, rows) = parse_csv(&body);
    let probs: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let first = probs.iter().position(|&p| p > 1e-3).unwrap();
    let last = probs.iter().rposition(|&p| p > 1e-3).unwrap();
    assert!(
        (first..=last).any(|n| probs[n] < 1e-8),
        "no gap in the emitted prior"
    );

    std::fs::remove_file(format!("{}.manifest.json", out_path.display())).ok();
    std::fs::remove_file(&out_path).ok();
}

#[test]
fn optimize_at_fixed_multiplier() {
    let out_path = temp_path("mu_prior.csv");
    let report = parse_report(&run_ok(&[
        "optimize",
        "--eta",
        "1",
        "--mu",
        "0.6931471805599453",
        "--iters",
        "3000",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    assert!((report_f64(&report, "n_achieved") - 1.0).abs() < 1e-4);
    std::fs::remove_file(format!("{}.manifest.json", out_path.display())).ok();
    std::fs::remove_file(&out_path).ok();
}

#[test]
fn optimize_requires_a_target() {
    let out = run_raw(&["optimize", "--eta", "0.5"]);
    assert!(!out.status.success());
}

#[test]
fn table_reproduces_reference_values() {
    let csv = run_ok(&["table", "--iters", "10000"]);
    let (header, rows) = parse_csv(&csv);
    assert_eq!(rows.len(), 8);
    let i_coh = col(&header, "i_coh_bits");
    let i_coh_ref = col(&header, "i_coh_ref_bits");
    let within = col(&header, "within_tol");
    for row in &rows {
        let got: f64 = row[i_coh].parse().unwrap();
        let reference: f64 = row[i_coh_ref].parse().unwrap();
        assert!((got - reference).abs() <= 1e-3, "coherent column off");
        assert_eq!(row[within], "true");
    }
}

#[test]
fn diagram_fig2_unit_eta_column_prefers_squeezed() {
    let csv = run_ok(&[
        "diagram",
        "--kind",
        "fig2",
        "--eta-grid",
        "0.98:1:2",
        "--n-grid",
        "0.5:20:6:log",
    ]);
    let (header, rows) = parse_csv(&csv);
    let eta_col = col(&header, "eta");
    let winner = col(&header, "winner");
    let mut saw_unit_eta = false;
    for row in &rows {
        let eta: f64 = row[eta_col].parse().unwrap();
        if eta == 1.0 {
            saw_unit_eta = true;
            assert_eq!(
                row[winner], "squeezed_lossless_prior",
                "at N column {row:?}"
            );
        }
    }
    assert!(saw_unit_eta);
}

#[test]
fn diagram_fig3_boundary_straddles_eight_photons() {
    let csv = run_ok(&[
        "diagram",
        "--kind",
        "fig3",
        "--eta-grid",
        "0.5:0.54:2",
        "--n-grid",
        "6:10:5",
    ]);
    let (header, rows) = parse_csv(&csv);
    let eta_col = col(&header, "eta");
    let n_col = col(&header, "n_mean");
    let winner = col(&header, "winner");
    for row in &rows {
        let eta: f64 = row[eta_col].parse().unwrap();
        let n: f64 = row[n_col].parse().unwrap();
        if eta == 0.5 {
            let expect = if n < 8.0 {
                "squeezed_optimized"
            } else {
                // N = 8 ties exactly and resolves to coherent.
                "coherent"
            };
            assert_eq!(row[winner], expect, "at (0.5, {n})");
        }
    }
}

#[test]
fn diagram_fig9_shows_an_optimized_number_region() {
    let csv = run_ok(&[
        "diagram",
        "--kind",
        "fig9",
        "--eta-grid",
        "0.4:0.6:3",
        "--n-grid",
        "0.2:0.6:3",
        "--dim",
        "100",
        "--iters",
        "1500",
    ]);
    let (header, rows) = parse_csv(&csv);
    let winner = col(&header, "winner");
    assert!(
        rows.iter().any(|r| r[winner] == "number_optimized"),
        "no optimized-number region at low power / mid attenuation"
    );
}

#[test]
fn curves_fig1_unit_eta_matches_closed_form() {
    let csv = run_ok(&["curves", "--kind", "fig1", "--n-grid", "0.5:50:8:log"]);
    let (header, rows) = parse_csv(&csv);
    let n_col = col(&header, "n_mean");
    let s_col = col(&header, "squeeze_photons_eta_1");
    for row in &rows {
        let n: f64 = row[n_col].parse().unwrap();
        let s: f64 = row[s_col].parse().unwrap();
        assert!(
            (s - n * n / (2.0 * n + 1.0)).abs() < 1e-10,
            "at N = {n}: {s}"
        );
    }
}

#[test]
fn curves_fig4_strong_loss_curve_exceeds_25_percent() {
    let csv = run_ok(&["curves", "--kind", "fig4"]);
    let (header, rows) = parse_csv(&csv);
    let c = col(&header, "improvement_pct_eta_0.15");
    let max: f64 = rows
        .iter()
        .map(|r| r[c].parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(max > 25.0, "peak improvement only {max}%");
}

#[test]
fn curves_fig5_lossless_ordering() {
    let csv = run_ok(&[
        "curves",
        "--kind",
        "fig5",
        "--eta-grid",
        "0.5:1:2",
        "--n",
        "10",
    ]);
    let (header, rows) = parse_csv(&csv);
    let eta_col = col(&header, "eta");
    let number = col(&header, "mi_number_thermal_nats");
    let coherent = col(&header, "mi_coherent_nats");
    let squeezed = col(&header, "mi_squeezed_lossless_prior_nats");
    let unit_row = rows
        .iter()
        .find(|r| r[eta_col].parse::<f64>().unwrap() == 1.0)
        .expect("eta = 1 row");
    let nt: f64 = unit_row[number].parse().unwrap();
    let coh: f64 = unit_row[coherent].parse().unwrap();
    let sq: f64 = unit_row[squeezed].parse().unwrap();
    assert!(nt > sq && sq > coh, "ordering off: {nt}, {sq}, {coh}");
    assert!((nt - 3.3510).abs() < 1e-3);
    assert!((sq - 21f64.ln()).abs() < 1e-12);
    assert!((coh - 11f64.ln()).abs() < 1e-12);
}

#[test]
fn unit_flag_changes_only_the_rendering() {
    let nats_csv = run_ok(&[
        "curves",
        "--kind",
        "fig5",
        "--eta-grid",
        "0.5:1:2",
        "--nats",
    ]);
    let bits_csv = run_ok(&[
        "curves",
        "--kind",
        "fig5",
        "--eta-grid",
        "0.5:1:2",
        "--bits",
    ]);
    let (nh, nrows) = parse_csv(&nats_csv);
    let (bh, brows) = parse_csv(&bits_csv);
    assert!(nh[1].ends_with("_nats") && bh[1].ends_with("_bits"));
    for (nr, br) in nrows.iter().zip(&brows) {
        let n: f64 = nr[1].parse().unwrap();
        let b: f64 = br[1].parse().unwrap();
        assert!((n - b * std::f64::consts::LN_2).abs() < 1e-12);
    }
}

#[test]
fn data_output_is_byte_deterministic() {
    let args = ["curves", "--kind", "fig1", "--n-grid", "0.1:100:25:log"];
    assert_eq!(run_ok(&args), run_ok(&args));
    let args = [
        "diagram",
        "--kind",
        "fig2",
        "--eta-grid",
        "0.1:1:7",
        "--n-grid",
        "1:30:5:log",
    ];
    assert_eq!(run_ok(&args), run_ok(&args));
}

#[test]
fn json_mirror_carries_the_same_numbers() {
    let csv = run_ok(&["curves", "--kind", "fig1", "--n-grid", "1:10:3:log"]);
    let json = run_ok(&[
        "curves",
        "--kind",
        "fig1",
        "--n-grid",
        "1:10:3:log",
        "--format",
        "json",
    ]);
    let (header, rows) = parse_csv(&csv);
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    let arr = parsed.as_array().unwrap();
    assert_eq!(arr.len(), rows.len());
    for (obj, row) in arr.iter().zip(&rows) {
        for (i, name) in header.iter().enumerate() {
            let from_csv: f64 = row[i].parse().unwrap();
            let from_json = obj[name].as_f64().unwrap();
            // serde_json's reader is allowed a final-ulp wobble on
            // 17-digit mantissas; both documents carry full precision.
            let tol = 4.0 * f64::EPSILON * from_csv.abs().max(1.0);
            assert!(
                (from_csv - from_json).abs() <= tol,
                "field {name}: {from_csv} vs {from_json}"
            );
        }
    }
}

#[test]
fn table_writes_file_and_manifest() {
    let out_path = temp_path("table.csv");
    run_ok(&[
        "table",
        "--iters",
        "4000",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let body = std::fs::read_to_string(&out_path).expect("table file");
    let (_, rows) = parse_csv(&body);
    assert_eq!(rows.len(), 8);
    let manifest_path = PathBuf::from(format!("{}.manifest.json", out_path.display()));
    assert!(Path::new(&manifest_path).exists(), "manifest missing");
    std::fs::remove_file(&out_path).ok();
    std::fs::remove_file(&manifest_path).ok();
}
