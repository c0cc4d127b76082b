use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn malevich(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_malevich"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = malevich(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn num(v: &Value, path: &str) -> f64 {
    path.split('.')
        .fold(v, |v, key| match key.parse::<usize>() {
            Ok(i) => &v[i],
            Err(_) => &v[key],
        })
        .as_f64()
        .unwrap_or_else(|| panic!("{path} is not a number in {v}"))
}

fn write_matrix(dir: &Path, name: &str, re: &[f64], im: &[f64]) -> String {
    let path = dir.join(name);
    let body = serde_json::json!({ "dim": 3, "re": re, "im": im });
    std::fs::write(&path, body.to_string()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

#[test]
fn maximally_mixed_qubit() {
    let r = json(&["qubit", "--p", "0.5,0.5,0.5"]);
    close(num(&r, "area_sum"), 1.5, 1e-15);
    close(num(&r, "linear_entropy"), 0.5, 1e-15);
    assert_eq!(r["class"], "mixed");
}

#[test]
fn unphysical_qubit_is_reported_or_rejected() {
    let r = json(&["qubit", "--p", "1,1,1"]);
    close(num(&r, "quantumness_residual"), 0.5, 1e-15);
    assert_eq!(r["not_positive"], true);
    assert_eq!(malevich(&["qubit", "--p", "1,1,1", "--strict"]).status.code(), Some(3));
}

#[test]
fn global_maximum_triple() {
    let r = json(&["qubit", "--p", "0.7886751,0.7886751,0.7886751"]);
    assert_eq!(r["class"], "global_max");
    close(num(&r, "area_sum"), 3.0, 1e-6);
}

#[test]
fn center_block_concurrence() {
    let r = json(&["twoqubit", "--family", "center", "--p", "0.75,0.5,0.5"]);
    close(num(&r, "concurrence_closed_form.value"), 0.5, 1e-12);
    close(num(&r, "entanglement.concurrence"), 0.5, 1e-9);
    close(num(&r, "entanglement.negativity"), 0.25, 1e-12);
    assert_eq!(r["family"], "center");
}

#[test]
fn center_block_without_coherence_is_ppt() {
    let r = json(&["twoqubit", "--family", "center", "--p", "0.5,0.5,0.3"]);
    assert_eq!(num(&r, "entanglement.negativity"), 0.0);
    assert_eq!(r["entanglement"]["ppt_verdict"], "separable_by_ppt");
}

#[test]
fn unphysical_block_exit_code() {
    let args = ["twoqubit", "--family", "center", "--p", "1,1,0.5"];
    assert_eq!(malevich(&args).status.code(), Some(4));
    let mut loose = vec!["--format", "json"];
    loose.extend_from_slice(&args);
    loose.push("--allow-unphysical");
    let out = malevich(&loose);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["physical"], false);
    assert!(r["entanglement"].is_null());
}

#[test]
fn embed1_with_vanishing_d_coherence() {
    let dir = TempDir::new().unwrap();
    let file = write_matrix(
        dir.path(),
        "d0.json",
        &[0.4, 0.1, 0.05, 0.1, 0.35, 0.0, 0.05, 0.0, 0.25],
        &[0.0, 0.1, -0.02, -0.1, 0.0, 0.0, 0.02, 0.0, 0.0],
    );
    let r = json(&["twoqubit", "--family", "embed1", "--qutrit", &file]);
    close(num(&r, "entanglement.concurrence"), 0.0, 1e-12);
    for e in r["entanglement"]["pt_eigenvalues"].as_array().unwrap() {
        assert!(e.as_f64().unwrap() >= -1e-12, "{e}");
    }
    assert_eq!(r["entanglement"]["ppt_verdict"], "separable_by_ppt");
}

#[test]
fn maximally_mixed_qutrit() {
    let dir = TempDir::new().unwrap();
    let third = 1.0 / 3.0;
    let file = write_matrix(
        dir.path(),
        "i3.json",
        &[third, 0.0, 0.0, 0.0, third, 0.0, 0.0, 0.0, 1.0 - 2.0 * third],
        &[0.0; 9],
    );
    let r = json(&["qutrit", "--matrix", &file]);
    // B, C and D are all (½, ½, ⅓) or (½, ½, ⅔), each with S = 29/18
    close(num(&r, "area_sum"), 29.0 / 6.0, 1e-12);
    close(num(&r, "linear_entropy"), 2.0 / 3.0, 1e-12);
}

#[test]
fn qutrit_from_component_triples() {
    let r = json(&["qutrit", "--a", "0.5,0.5,1", "--b", "0.5,0.5,0.5", "--d", "0.5,0.5"]);
    close(num(&r, "area_sum"), 4.5, 1e-12);
    close(num(&r, "linear_entropy"), 0.5, 1e-12);
}

#[test]
fn appendix_state_area() {
    let (pb, pg, b, g) = (0.168493_f64, 0.875880_f64, 0.274985_f64, 3.989236_f64);
    let amp = [
        ((1.0 - pb * pb - pg * pg).sqrt(), 0.0),
        (pb * b.cos(), pb * b.sin()),
        (pg * g.cos(), pg * g.sin()),
    ];
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for (ar, ai) in amp {
        for (br, bi) in amp {
            re.push(ar * br + ai * bi);
            im.push(ai * br - ar * bi);
        }
    }
    let dir = TempDir::new().unwrap();
    let file = write_matrix(dir.path(), "pure.json", &re, &im);
    let r = json(&["qutrit", "--matrix", &file]);
    close(num(&r, "area_sum"), 8.1565, 1e-3);
    close(num(&r, "linear_entropy"), 0.0, 1e-12);
}

#[test]
fn qutrit_rejections() {
    let dir = TempDir::new().unwrap();
    let not_psd = write_matrix(
        dir.path(),
        "bad.json",
        &[0.5, 0.6, 0.0, 0.6, 0.5, 0.0, 0.0, 0.0, 0.0],
        &[0.0; 9],
    );
    assert_eq!(malevich(&["qutrit", "--matrix", &not_psd]).status.code(), Some(3));
    let missing = dir.path().join("absent.json");
    assert_eq!(
        malevich(&["qutrit", "--matrix", missing.to_str().unwrap()]).status.code(),
        Some(6)
    );
}

#[test]
fn parse_errors() {
    assert_eq!(malevich(&["qubit", "--p", "0.5,0.5"]).status.code(), Some(2));
    assert_eq!(malevich(&["qubit", "--p", "a,b,c"]).status.code(), Some(2));
    assert_eq!(malevich(&["bounds", "--problem", "nonsense"]).status.code(), Some(2));
    assert_eq!(malevich(&["scan", "--target", "fig9"]).status.code(), Some(2));
    assert_eq!(malevich(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(malevich(&["--help"]).status.code(), Some(0));
}

#[test]
fn bounds_command() {
    let r = json(&["bounds", "--problem", "separable_embed_3"]);
    close(num(&r, "extremum_value"), (57.0 + 17f64.sqrt()) / 8.0, 1e-5);
    assert_eq!(r["within_tolerance"], true);
    let r = json(&["bounds", "--problem", "qubit_area", "--minimize"]);
    close(num(&r, "extremum_value"), 1.5, 1e-6);
}

#[test]
fn scans_are_deterministic_and_versioned() {
    let a = malevich(&["scan", "--target", "fig5", "--resolution", "21"]);
    let b = malevich(&["scan", "--target", "fig5", "--resolution", "21", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("# malevich-qstate v1 scan fig5"));

    let dir = TempDir::new().unwrap();
    let path = dir.path().join("fig4a.csv");
    let out = malevich(&["scan", "--target", "concurrence_fig4a", "--resolution", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.contains(&"0.5,0.5,0,true"), "{rows:?}");
}

#[test]
fn unwritable_output_path() {
    let out = malevich(&["scan", "--target", "fig4a", "--resolution", "3", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn fig4b_log_negativity_matches_spectrum() {
    let out = malevich(&["scan", "--target", "fig4b", "--resolution", "41"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().skip(1);
    assert_eq!(lines.next(), Some("p1,p2,value,physical"));
    let mut count = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (p1, p2, value): (f64, f64, f64) =
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap());
        // I/3 on the first three levels with D coherence z: the transposed
        // block on levels 1 and 4 is [[1/3, z], [z*, 0]]
        let z2 = (p1 - 0.5).powi(2) + (p2 - 0.5).powi(2);
        let negativity = ((1.0 / 9.0 + 4.0 * z2).sqrt() - 1.0 / 3.0) / 2.0;
        close(value, (1.0 + 2.0 * negativity).ln(), 1e-12);
        assert_eq!(f[3] == "true", z2.sqrt() <= 1.0 / 3.0 + 1e-12, "{line}");
        count += 1;
    }
    assert_eq!(count, 41 * 41);
}

#[test]
fn fig6_scan_json() {
    let r = json(&["scan", "--target", "fig6", "--resolution", "21", "--sign", "minus"]);
    assert_eq!(r["command"], "scan fig6");
    let rows = r["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for row in rows {
        let s = num(row, "S_total");
        assert!((4.5 - 1e-9..=8.1).contains(&s), "{row}");
    }
}
