use std::process::{Command, Output};

use extremal::experiments::{BoundCheckReport, ConvergenceReport, HittingReport};
use extremal::pricing::PriceQuote;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extremal"))
        .args(args)
        .env_remove("NO_COLOR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn prob_reports_closed_form_and_audit() {
    let o = run(&[
        "prob",
        "--spot",
        "1",
        "--barrier",
        "1.1",
        "--sigma",
        "0.3",
        "--mu",
        "0",
        "--maturity",
        "0.25",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = &v["rows"][0];
    assert!((row["crossing_prob"].as_f64().unwrap() - 0.500_184_878_296_615_8).abs() < 1e-13);
    assert!(row["remark_audit"]["deviation"].as_f64().unwrap() > 0.04);
}

#[test]
fn invalid_value_is_a_one_line_usage_error_naming_the_flag() {
    let o = run(&["prob", "--sigma", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("--sigma"), "{err}");
}

#[test]
fn unknown_flags_and_commands_are_rejected() {
    for args in [
        &["price", "--bogus", "1"][..],
        &["frobnicate"][..],
        &["converge", "--t-list", "0.1,abc"][..],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr(&o).trim_end().lines().count(), 1);
    }
}

#[test]
fn in_the_money_barrier_is_a_usage_error() {
    let o = run(&["price", "--barrier", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--barrier"));
}

#[test]
fn help_lists_the_flags() {
    let o = run(&["price", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for flag in [
        "--spot",
        "--barrier",
        "--sigma",
        "--mu",
        "--maturity",
        "--strike",
        "--payoff",
        "--paths",
        "--steps",
        "--seed",
        "--sampler",
        "--t-list",
        "--epsilon-list",
        "--output",
        "--out",
        "--threads",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
}

#[test]
fn price_emits_a_quote_and_is_reproducible() {
    let args = [
        "price",
        "--payoff",
        "european",
        "--strike",
        "1",
        "--barrier",
        "1.1",
        "--paths",
        "4000",
        "--steps",
        "32",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let q: PriceQuote = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(q.asymptotic, q.crossing_prob * q.limit_payoff);
    assert_eq!(q.inputs.seed, 0);
    let mc = q.mc.unwrap();
    assert_eq!(mc.n_effective, 4000);
    let again: PriceQuote = serde_json::from_str(&serde_json::to_string(&q).unwrap()).unwrap();
    assert_eq!(again, q);
}

#[test]
fn zero_paths_omits_the_mc_block() {
    let o = run(&["price", "--paths", "0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.get("mc").is_none());
    assert!(v.get("asymptotic").is_some());
}

#[test]
fn converge_emits_fixed_header_csv_and_json_fit() {
    let base = [
        "converge",
        "--t-list",
        "0.4,0.2,0.1,0.05,0.025",
        "--paths",
        "1000",
        "--steps",
        "32",
        "--mu",
        "0.05",
    ];
    let o = run(&base);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(
        text.lines().next(),
        Some("T,estimate,stderr,n_effective,sampler")
    );
    assert_eq!(text.lines().count(), 6);
    let mut json_args = base.to_vec();
    json_args.extend(["--output", "json"]);
    let j = run(&json_args);
    let rep: ConvergenceReport = serde_json::from_str(&stdout(&j)).unwrap();
    assert!(rep.fit.unwrap().slope > 0.0);
    let threaded = {
        let mut a = base.to_vec();
        a.extend(["--threads", "3"]);
        run(&a)
    };
    assert_eq!(threaded.stdout, o.stdout);
}

#[test]
fn bm_extreme_and_hitting_reports_parse() {
    let o = run(&[
        "bm-extreme",
        "--epsilon-list",
        "1,0.5",
        "--paths",
        "10000",
        "--output",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rep: BoundCheckReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rep.all_pass && rep.rows.len() == 2);
    let o = run(&["bm-extreme", "--epsilon-list", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["hitting", "--mu", "0.05", "--paths", "0"]);
    let rep: HittingReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep.rows.len(), 4);
    assert!(rep.monotone && rep.mc_check.is_none());
}

#[test]
fn underflow_is_a_computational_failure() {
    let o = run(&[
        "hitting",
        "--barrier",
        "3",
        "--t-list",
        "0.0001",
        "--paths",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("underflow"));
}

#[test]
fn rejection_refusal_is_a_computational_failure() {
    let o = run(&[
        "converge",
        "--sampler",
        "rejection",
        "--barrier",
        "1.5",
        "--t-list",
        "0.01",
        "--paths",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tilted sampler"));
}

#[test]
fn simulate_dumps_a_crossing_path_to_file() {
    let dir = std::env::temp_dir().join(format!("extremal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("path.csv");
    let o = run(&[
        "simulate",
        "--steps",
        "64",
        "--seed",
        "3",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&file).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,log_value,value"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 65);
    assert_eq!(rows[0], vec![0.0, 0.0, 1.0]);
    assert!(rows.iter().all(|r| (r[1].exp() - r[2]).abs() < 1e-12));
    std::fs::remove_dir_all(dir).unwrap();
}
