use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const EXACT_W5: &str = "0.1932691093266945";

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn problem(name: &str) -> String {
    root().join("problems").join(name).display().to_string()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn tripint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tripint")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = tripint(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

fn summary_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| {
            let (k, v) = l.split_once('=')?;
            (k.trim() == key).then(|| v.trim().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

fn is_formatted_number(field: &str) -> bool {
    let Some((mantissa, exp)) = field.split_once('e') else {
        return field.parse::<u64>().is_ok();
    };
    let digits = mantissa.trim_start_matches('-');
    let Some((int, frac)) = digits.split_once('.') else { return false };
    int.len() == 1
        && frac.len() == 11
        && int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        && exp.parse::<i32>().is_ok()
}

/// Headers must match byte for byte; values numerically, with a relative
/// tolerance per column.
fn assert_matches_golden(got: &str, want: &str, rel_tol: &[f64]) {
    let got_lines: Vec<&str> = got.split_inclusive('\n').collect();
    let want_lines: Vec<&str> = want.split_inclusive('\n').collect();
    assert_eq!(got_lines.first(), want_lines.first(), "header");
    assert_eq!(got_lines.len(), want_lines.len(), "row count\n{got}");
    assert!(!got.contains('\r'));
    for (g, w) in got_lines[1..].iter().zip(&want_lines[1..]) {
        let gf: Vec<&str> = g.trim_end_matches('\n').split(',').collect();
        let wf: Vec<&str> = w.trim_end_matches('\n').split(',').collect();
        assert_eq!(gf.len(), wf.len(), "{g}");
        for (col, (a, b)) in gf.iter().zip(&wf).enumerate() {
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    assert!(is_formatted_number(a), "format of `{a}`");
                    let tol = rel_tol[col.min(rel_tol.len() - 1)];
                    assert!((x - y).abs() <= tol * y.abs().max(1e-300), "column {col}: {a} vs {b}");
                }
                _ => assert_eq!(a, b, "column {col}"),
            }
        }
    }
}

#[test]
fn convergence_table_golden() {
    let got = ok(&["table", "--problem", &problem("sine.ini"), "--h-list", "0.04,0.02,0.01,0.005", "--reference", EXACT_W5]);
    // Error columns relative to tiny numbers, so they get looser bounds.
    assert_matches_golden(&got, &golden("table_sine.csv"), &[1e-12, 1e-9, 1e-9, 1e-9, 1e-9, 1e-6, 1e-3]);
}

#[test]
fn delta_table_golden_and_quarter_power() {
    let got = ok(&["table", "--problem", &problem("sine.ini"), "--delta-list", "1e-4,1e-6,1e-8"]);
    assert_matches_golden(&got, &golden("delta_table_sine.csv"), &[1e-12, 1e-6, 1e-6, 0.0, 1e-6]);

    let got = ok(&["table", "--problem", &problem("sine.ini"), "--delta-list", "1e-4,1e-8"]);
    let big_h: Vec<f64> = got
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!((big_h[0] / big_h[1] - 10.0).abs() < 1e-9, "{got}");
}

#[test]
fn nodes_and_plot_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["solve", "--problem", &problem("unit.ini"), "--steps", "4", "--order", "2", "--out", out]);
    let got = std::fs::read_to_string(dir.path().join("nodes.csv")).unwrap();
    assert_matches_golden(&got, &golden("nodes_unit.csv"), &[1e-12]);

    ok(&["plot", "--problem", &problem("zero.ini"), "--steps", "4", "--out", out]);
    let got = std::fs::read_to_string(dir.path().join("plot.csv")).unwrap();
    assert_eq!(got, golden("plot_zero.csv"));
}

#[test]
fn coeffs_golden() {
    assert_eq!(ok(&["coeffs", "--order", "6"]), golden("coeffs_6.txt"));
    assert_eq!(ok(&["coeffs", "--order", "2"]), "-1\n2\n");
    assert_eq!(ok(&["coeffs", "--order", "4"]), "-1/21\n2/3\n-8/3\n64/21\n");
    assert_eq!(ok(&["coeffs", "--order", "5"]), "1/315\n-2/21\n8/9\n-64/21\n1024/315\n");
}

#[test]
fn solve_fixed_steps_writes_every_node() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&[
        "solve", "--problem", &problem("sine.ini"), "--steps", "400", "--order", "4",
        "--out", dir.path().to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(dir.path().join("nodes.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,k0,k1,k2,k3,m4"));
    assert_eq!(lines.count(), 401);
    let w: f64 = summary_value(&text, "w_final");
    assert!((w - 0.193_269_109_3).abs() < 1e-4);
}

#[test]
fn solve_with_tolerance_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["solve", "--problem", &problem("sine.ini"), "--oracle", "--out", dir.path().to_str().unwrap()]);
    assert!((summary_value(&text, "w_final") - 0.193_269_109_3).abs() < 1e-5, "{text}");
    assert!(summary_value(&text, "error_vs_oracle") < 1e-5);
    let n = summary_value(&text, "n");
    let h = summary_value(&text, "h_final");
    assert!((n * h - 4.0).abs() < 1e-9);
    let a4bar = std::fs::read_to_string(dir.path().join("a4bar.csv")).unwrap();
    assert!(a4bar.starts_with("x,a4bar\n"));
    assert_eq!(a4bar.lines().count(), 402);
}

#[test]
fn oracle_values() {
    let text = ok(&["oracle", "--problem", &problem("sine.ini")]);
    assert!((summary_value(&text, "oracle") - 0.193269).abs() < 1e-5);
    assert_eq!(summary_value(&text, "tol"), 1e-6);
    assert_eq!(summary_value(&ok(&["oracle", "--problem", &problem("zero.ini")]), "oracle"), 0.0);
    let unit = summary_value(&ok(&["oracle", "--problem", &problem("unit.ini"), "--oracle-tol", "1e-10"]), "oracle");
    assert!((unit - 3.5).abs() < 1e-9);
}

#[test]
fn bench_columns_and_trend() {
    let text = ok(&["bench", "--problem", &problem("sine.ini"), "--h-list", "0.01", "--reference", EXACT_W5]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h,euler_sec,euler_err,rich_sec,rich_err"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(lines.next().is_none());
    assert!(row[4] < row[2]);
    assert!(row[1] > 0.0 && row[3] > 0.0);
}

#[test]
fn plot_svg_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["plot", "--problem", &problem("sine.ini"), "--steps", "20", "--out", dir.path().to_str().unwrap()]);
    assert!(summary_value(&text, "max_gap") > 1e-3);
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.attribute("viewBox"), Some("0 0 800 500"));
    let polylines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    assert_eq!(polylines, 2);
    let csv = std::fs::read_to_string(dir.path().join("plot.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,euler_w,richardson_m4"));
    assert_eq!(csv.lines().count(), 22);
}

#[test]
fn plot_gap_shrinks_with_h() {
    let gap = |steps: &str| {
        let dir = tempfile::tempdir().unwrap();
        let text = ok(&["plot", "--problem", &problem("sine.ini"), "--steps", steps, "--out", dir.path().to_str().unwrap()]);
        summary_value(&text, "max_gap")
    };
    let (coarse, mid, fine) = (gap("50"), gap("200"), gap("800"));
    assert!(coarse > mid && mid > fine, "{coarse} {mid} {fine}");
}

fn expect_exit(args: &[&str], code: i32, needle: &str) {
    let o = tripint(args);
    assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
    assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(problem("sine.ini")).unwrap();
    let no_z1 = dir.path().join("no_z1.ini");
    std::fs::write(&no_z1, text.replace("z1    = x+y\n", "")).unwrap();
    let no_z1 = no_z1.to_str().unwrap();
    let typo = dir.path().join("typo.ini");
    std::fs::write(&typo, text.replace("h0 ", "hO ")).unwrap();

    expect_exit(&["solve", "--problem", no_z1, "--steps", "4"], 2, "z1");
    expect_exit(&["solve", "--problem", typo.to_str().unwrap(), "--steps", "4"], 2, "hO");
    expect_exit(&["solve", "--problem", "/nonexistent/file.ini", "--steps", "4"], 2, "cannot read");
    expect_exit(&["solve", "--steps", "4"], 2, "--problem");
    expect_exit(&["coeffs", "--order", "13"], 2, "order 13");
    expect_exit(&["coeffs", "--order", "1"], 2, "order 1");
    expect_exit(&["table", "--problem", &problem("sine.ini"), "--h-list", ""], 2, "empty");
    expect_exit(&["table", "--problem", &problem("sine.ini"), "--h-list", "0.03", "--reference", "0"], 2, "0.03");
    expect_exit(&["table", "--problem", &problem("sine.ini")], 2, "--h-list");
    expect_exit(&["plot", "--problem", &problem("sine.ini"), "--steps", "4"], 2, "--out");
    expect_exit(&["solve", "--problem", &problem("sine.ini"), "--delta", "-1"], 2, "tolerance");
    expect_exit(&["frobnicate"], 2, "frobnicate");
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let singular = dir.path().join("singular.ini");
    std::fs::write(&singular, "[problem]\nf = 1/z\ny0 = 0\ny1 = 1\nz0 = 0\nz1 = 1\nx0 = 0\nx_end = 1\n").unwrap();
    expect_exit(&["oracle", "--problem", singular.to_str().unwrap()], 3, "division by zero");

    let blowup = dir.path().join("blowup.ini");
    std::fs::write(
        &blowup,
        "[problem]\nf = 1\ny0 = 0\ny1 = 1\nz0 = 0\nz1 = 1\nx0 = 0\nx_end = 1\nR = exp(1000*x)\n",
    )
    .unwrap();
    expect_exit(&["solve", "--problem", blowup.to_str().unwrap(), "--steps", "4"], 3, "non-finite");

    let cusp = dir.path().join("cusp.ini");
    std::fs::write(&cusp, "[problem]\nf = sqrt(z)\ny0 = 0\ny1 = 1\nz0 = 0\nz1 = 1\nx0 = 0\nx_end = 1\n").unwrap();
    expect_exit(&["oracle", "--problem", cusp.to_str().unwrap(), "--oracle-tol", "1e-15"], 3, "depth");
}

#[test]
fn quiet_silences_notes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let loud = tripint(&["plot", "--problem", &problem("zero.ini"), "--steps", "2", "--out", out]);
    assert!(stderr(&loud).contains("wrote"));
    let quiet = tripint(&["plot", "--problem", &problem("zero.ini"), "--steps", "2", "--out", out, "--quiet"]);
    assert!(stderr(&quiet).is_empty());
    assert_eq!(stdout(&loud), stdout(&quiet));
}
