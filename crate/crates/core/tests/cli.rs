use std::path::PathBuf;
use std::process::{Command, Output};

use greenfield::cli::WitnessReport;
use greenfield::experiments::{AdelicReport, LehmerTable, MultiplesResult};
use greenfield::heights::HeightValue;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn greenfield(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_greenfield"));
    c.args(args);
    match threads {
        Some(t) => c.env("GREENFIELD_THREADS", t),
        None => c.env_remove("GREENFIELD_THREADS"),
    };
    c.output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = greenfield(args, None);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn resultants_print_exact_rationals() {
    assert_eq!(ok(&["resultant", &data("power.json")]), "1\n");
    assert_eq!(ok(&["resultant", &data("half.toml")]), "1\n");
    // Sylvester determinant of the two quartics, 2^12 * 3^6.
    assert_eq!(ok(&["resultant", &data("lattes.json")]), "2985984\n");
}

#[test]
fn height_report_round_trips() {
    let text = ok(&["height", &data("power.json"), "--point", "2,1"]);
    let h: HeightValue = serde_json::from_str(&text).unwrap();
    assert!((h.value - 2f64.ln()).abs() < 1e-12);
    assert_eq!(serde_json::to_string_pretty(&h).unwrap() + "\n", text);
}

#[test]
fn adelic_report_is_deterministic_across_thread_counts() {
    let args = ["adelic-report", &data("half.toml"), "--n", "4,8", "--budget", "400", "--seed", "7"];
    let one = greenfield(&args, Some("1"));
    let two = greenfield(&args, Some("2"));
    let again = greenfield(&args, Some("2"));
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(two.stdout, again.stdout);
    let r: AdelicReport = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(r.schema, "greenfield-report/1");
    assert!(r.failures.is_empty());
    assert!(r.rows.iter().all(|row| row.consistent));
    let csv = ok(&["adelic-report", &data("half.toml"), "--n", "4,8", "--budget", "400", "--format", "csv"]);
    assert_eq!(csv.lines().count(), 1 + r.rows.iter().map(|row| row.places.len()).sum::<usize>());
}

#[test]
fn fekete_and_green_reports() {
    let text = ok(&["fekete", &data("power.json"), "--n", "2", "--budget", "4000", "--seed", "3"]);
    let r: Vec<WitnessReport> = serde_json::from_str(&text).unwrap();
    assert!((r[0].witness_logd.unwrap() - 3f64.ln() / 4.0).abs() < 1e-6);
    let text = ok(&["green", &data("power.json"), "--n", "1", "--points", "1,0;0,1", "--place", "3"]);
    let r: WitnessReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r.witness_logd, Some(0.0));
    assert_eq!(r.envelope_logd, 0.0);
}

#[test]
fn lattes_drivers() {
    let text = ok(&["multiples", &data("lattes.json"), "--curve", "0,-2", "--point", "3,5", "--n", "2"]);
    let r: MultiplesResult = serde_json::from_str(&text).unwrap();
    assert_eq!(r.indices, vec![1, 2, 3]);
    let wrong = greenfield(&["multiples", &data("power.json"), "--curve", "0,-2", "--point", "3,5", "--n", "2"], None);
    assert_eq!(wrong.status.code(), Some(1));
    let text = ok(&["lehmer-scan", "--curve", "0,-2", "--point", "3,5", "--depths", "0,1"]);
    let t: LehmerTable = serde_json::from_str(&text).unwrap();
    assert!(t.min_shape > 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(greenfield(&["selftest"], None).status.code(), Some(0));
    let bad_point = greenfield(&["height", &data("power.json"), "--point", "2,x"], None);
    assert_eq!(bad_point.status.code(), Some(2));
    let not_on_curve = greenfield(&["lehmer-scan", "--curve", "0,-2", "--point", "3,4"], None);
    assert_eq!(not_on_curve.status.code(), Some(1));
    let torsion = greenfield(&["multiples", "--curve", "0,1", "--point", "2,3", "--n", "2"], None);
    assert_eq!(torsion.status.code(), Some(1));
}
