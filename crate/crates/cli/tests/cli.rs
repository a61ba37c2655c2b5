use std::path::Path;
use std::process::{Command, Output};

fn dcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcf")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column(table: &[Vec<String>], name: &str) -> Vec<String> {
    let i = table[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    table[1..].iter().map(|r| r[i].clone()).collect()
}

#[test]
fn help_and_version() {
    let o = dcf(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("dcf "));
    let o = dcf(&["simulate", "--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("mean_sojourn_slots"));
    assert!(stdout(&dcf(&["--help"])).contains("Exit codes"));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(dcf(&["regions", "--bogus"]).status.code(), Some(2));
    assert_eq!(dcf(&["regions", "--q", "1.5"]).status.code(), Some(2));
    assert_eq!(dcf(&["sweep", "--var", "q", "--start", "0", "--stop", "1", "--step", "0"]).status.code(), Some(2));
    assert_eq!(dcf(&["simulate", "--units", "us", "--horizon", "1000"]).status.code(), Some(2));
    assert_eq!(dcf(&["curve", "--plot", "x.gp"]).status.code(), Some(2));
}

#[test]
fn scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 10, "lamda": 0.3}"#).unwrap();
    let o = dcf(&["regions", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    assert_eq!(dcf(&["regions", "--scenario", broken.to_str().unwrap()]).status.code(), Some(2));

    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{"mechanism": "rts", "n": 10, "lambda_hat": 0.3,
            "sweep": {"variable": "q", "start": 0.1, "stop": 0.5, "step": 0.2}}"#,
    )
    .unwrap();
    let o = dcf(&["sweep", "--scenario", good.to_str().unwrap()]);
    assert!(o.status.success());
    let t = rows(&stdout(&o));
    assert_eq!(t.len(), 4);
    assert_eq!(column(&t, "mechanism"), vec!["rts"; 3]);
    assert_eq!(column(&t, "q"), vec!["0.1", "0.3", "0.5"]);
    // a flag beats the scenario
    let o = dcf(&["sweep", "--scenario", good.to_str().unwrap(), "--mechanism", "basic"]);
    assert_eq!(column(&rows(&stdout(&o)), "mechanism")[0], "basic");
}

#[test]
fn regions_report_and_no_roots() {
    let o = dcf(&["regions"]);
    assert!(o.status.success());
    let t = rows(&stdout(&o));
    let hi: f64 = column(&t, "RT_hi")[0].parse().unwrap();
    let rd_lo: f64 = column(&t, "RD_lo")[0].parse().unwrap();
    assert!((hi - 0.875).abs() < 0.05);
    assert!((rd_lo - 0.049).abs() < 0.005);
    assert!(String::from_utf8_lossy(&o.stderr).contains("R_T = ["));

    // demand above lambda_max: 0.9 * 164 / 177 > 0.824
    let o = dcf(&["regions", "--lambda", "0.9"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not below the maximum throughput"));
}

#[test]
fn sweep_tokens_and_empty_range() {
    let o = dcf(&["sweep", "--var", "q", "--start", "0.01", "--stop", "0.2", "--step", "0.01"]);
    assert!(o.status.success());
    let t = rows(&stdout(&o));
    let delay = column(&t, "delay_slots");
    let q: Vec<f64> = column(&t, "q").iter().map(|v| v.parse().unwrap()).collect();
    let rd_lo = 0.04936923349744278;
    for (qi, d) in q.iter().zip(&delay) {
        assert_eq!(d == "inf", *qi < rd_lo, "q = {qi}, delay {d}");
    }
    assert!(t.iter().all(|r| r.len() == t[0].len()));

    let o = dcf(&["sweep", "--var", "lambda", "--start", "0.5", "--stop", "0.1", "--step", "0.1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stdout(&o).starts_with("mechanism,units,n,lambda_hat,q,K,"));
}

#[test]
fn sweep_flags_partial_failures() {
    // the high end is infeasible: rows stay, errors are per row
    let o = dcf(&["sweep", "--var", "lambda", "--start", "0.7", "--stop", "1.0", "--step", "0.1"]);
    assert!(o.status.success());
    let t = rows(&stdout(&o));
    let err = column(&t, "error");
    assert!(err[0].is_empty());
    assert!(err[3].contains("not below"));
}

#[test]
fn simulate_columns_trace_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let trace = dir.path().join("trace.csv");
    let args = [
        "simulate", "--horizon", "200000", "--seed", "4", "--replications", "2",
        "--out", out.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
    ];
    assert!(dcf(&args).status.success());
    let first = std::fs::read_to_string(&out).unwrap();
    let header = first.lines().next().unwrap();
    assert_eq!(
        header,
        "mechanism,n,lambda_hat,q,K,seed,horizon,throughput,throughput_ci,mean_sojourn_slots,\
         mean_sojourn_ci,mean_service,collision_rate"
    );
    let t = rows(&first);
    assert_eq!(column(&t, "seed"), vec!["4", "5"]);
    assert!(dcf(&args).status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
    let tr = std::fs::read_to_string(&trace).unwrap();
    assert!(tr.starts_with("slot,event,node\n"));
    assert!(tr.lines().skip(1).all(|l| l.split(',').count() == 3));
}

#[test]
fn compare_reports_both_sides() {
    let o = dcf(&["compare", "--horizon", "1000000"]);
    assert!(o.status.success());
    let t = rows(&stdout(&o));
    let rel: f64 = column(&t, "throughput_rel_err")[0].parse().unwrap();
    assert!(rel.abs() < 0.1);
    assert_eq!(column(&t, "status")[0], "stable");
    assert_eq!(dcf(&["compare", "--lambda", "0.95", "--horizon", "10000"]).status.code(), Some(3));
}

#[test]
fn curve_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let plot = dir.path().join("curve.gp");
    let o = dcf(&[
        "curve", "--mechanism", "rts", "--points", "100",
        "--out", out.to_str().unwrap(), "--plot", plot.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let t = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(t[0], vec!["mechanism", "units", "G_per_us", "x", "lambda_out"]);
    assert_eq!(t.len(), 101);
    let script = std::fs::read_to_string(&plot).unwrap();
    assert!(script.contains(&format!("'{}'", Path::new(&out).display())));
    assert!(script.contains("\"G_per_us\":\"lambda_out\""));
}
