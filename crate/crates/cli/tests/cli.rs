use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::{Command, Output, Stdio};

use copula_crm_service::TrialService;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_copula-crm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scenario(name: &str) -> String {
    format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn prob(x: f64, y: f64, alpha: f64, beta: f64, gamma: f64) -> f64 {
    let (a, b) = (x.powf(alpha), y.powf(beta));
    let k = ((-gamma).exp() - 1.0) / ((-gamma).exp() + 1.0);
    a + b - a * b - a * (1.0 - a) * b * (1.0 - b) * k
}

#[test]
fn help_lists_commands_and_flags() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    for cmd in ["simulate", "scenario-table", "mtd-curve", "serve"] {
        assert!(stdout(&o).contains(cmd), "{cmd}");
    }
    let o = run(&["serve", "--help"]);
    for flag in ["--port", "--data-dir", "--host", "COPULA_CRM_DATA_DIR"] {
        assert!(stdout(&o).contains(flag), "{flag}");
    }
    let o = run(&["simulate", "--help"]);
    for flag in ["--scenario", "--eta", "--replicates", "--seed", "--threads", "--out", "--traces"] {
        assert!(stdout(&o).contains(flag), "{flag}");
    }
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn scenario_table_reproduces_working_model_grid() {
    let o = run(&["scenario-table", "--alpha", "1.1", "--beta", "1.1", "--gamma", "1", "--levels", "4"]);
    assert!(o.status.success());
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header.len(), 6);
    assert_eq!(rows.len(), 4);
    let levels = [0.05, 0.05 + 0.25 / 3.0, 0.05 + 0.5 / 3.0, 0.3];
    for row in &rows {
        let ix: usize = row[0].parse::<usize>().unwrap() - 1;
        for iy in 0..4 {
            let v: f64 = row[2 + iy].parse().unwrap();
            let want = prob(levels[ix], levels[iy], 1.1, 1.1, 1.0);
            assert!((v - want).abs() <= 5e-6 * want, "({ix}, {iy})");
        }
    }
    // printed top row is the highest D1 level; lowest corner 0.07, highest-D1 / lowest-D2 0.30
    assert_eq!(rows[0][0], "4");
    assert!((rows[3][2].parse::<f64>().unwrap() - 0.07).abs() < 0.005);
    assert!((rows[0][2].parse::<f64>().unwrap() - 0.30).abs() < 0.005);

    let o = run(&["scenario-table", "--alpha", "0.9", "--beta", "0.9", "--gamma", "1", "--levels", "4", "--levels2", "6"]);
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header.len(), 8);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 8));
}

#[test]
fn scenario_table_without_interaction_is_independent_union() {
    let o = run(&["scenario-table", "--alpha", "1", "--beta", "1", "--gamma", "0", "--levels", "3", "--levels2", "5"]);
    let (header, rows) = parse_csv(&stdout(&o));
    for row in rows {
        let x: f64 = row[1].parse().unwrap();
        for (k, h) in header[2..].iter().enumerate() {
            let y: f64 = h.trim_start_matches("y=").parse().unwrap();
            let v: f64 = row[2 + k].parse().unwrap();
            assert!((v - (x + y - x * y)).abs() < 1e-5);
        }
    }
}

#[test]
fn scenario_table_writes_loadable_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let o = run(&[
        "scenario-table", "--alpha", "1.3", "--beta", "1.3", "--gamma", "1", "--levels", "4",
        "--scenario-out", path.to_str().unwrap(), "--eta", "0.25", "--out", dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s: copula_crm::Scenario = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    s.validate().unwrap();
    assert_eq!(s.eta_true, 0.25);
    assert!(fs::read_to_string(dir.path().join("t.csv")).unwrap().starts_with("d1_level,x,"));
}

#[test]
fn mtd_curve_without_interaction_is_closed_form() {
    let o = run(&["mtd-curve", "--alpha", "1", "--beta", "1", "--gamma", "0", "--theta", "0.3", "--points", "26"]);
    assert!(o.status.success());
    let (header, rows) = parse_csv(&stdout(&o));
    assert_eq!(header, ["x", "y", "in_range"]);
    assert_eq!(rows.len(), 26);
    for row in rows {
        let x: f64 = row[0].parse().unwrap();
        let y = (0.3 - x) / (1.0 - x);
        if (0.05..=0.3).contains(&y) {
            assert_eq!(row[2], "1");
            assert!((row[1].parse::<f64>().unwrap() - y).abs() < 1e-6);
        } else {
            assert_eq!(row[2], "0");
            assert_eq!(row[1], "");
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(lo) < 0.0) == (f(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn mtd_curve_mask_matches_domain_oracle() {
    let o = run(&["mtd-curve", "--alpha", "1.1", "--beta", "1.1", "--gamma", "1", "--theta", "0.3", "--points", "201"]);
    let (_, rows) = parse_csv(&stdout(&o));
    // the contour enters the square at y = 0.3 and leaves it at y = 0.05
    let x_lo = bisect(|x| prob(x, 0.3, 1.1, 1.1, 1.0) - 0.3, 1e-9, 0.3);
    let x_hi = bisect(|x| prob(x, 0.05, 1.1, 1.1, 1.0) - 0.3, 0.05, 0.3);
    assert!(0.05 < x_hi && x_hi < 0.3);
    let mut masked = 0;
    for row in rows {
        let x: f64 = row[0].parse().unwrap();
        if (x - x_lo).abs() < 1e-9 || (x - x_hi).abs() < 1e-9 {
            continue;
        }
        let inside = x >= x_lo && x <= x_hi;
        assert_eq!(row[2] == "1", inside, "x = {x}");
        if inside {
            let y: f64 = row[1].parse().unwrap();
            assert!((prob(x, y, 1.1, 1.1, 1.0) - 0.3).abs() < 1e-5);
        } else {
            masked += 1;
        }
    }
    assert!(masked > 0);
}

#[test]
fn invalid_target_exits_2() {
    for theta in ["0", "1.2", "-0.1"] {
        let o = run(&["mtd-curve", "--alpha", "1", "--beta", "1", "--gamma", "0", "--theta", theta]);
        assert_eq!(o.status.code(), Some(2), "{theta}");
    }
    let o = run(&["mtd-curve", "--alpha", "-1", "--beta", "1", "--gamma", "0", "--theta", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
}

fn simulate(scenario_file: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "simulate",
        "--scenario",
        scenario_file,
        "--out",
        out.to_str().unwrap(),
        "--chain-length",
        "600",
        "--burn-in",
        "200",
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            files.extend(read_all(&p));
        } else {
            files.push((p.file_name().unwrap().to_string_lossy().into(), fs::read(&p).unwrap()));
        }
    }
    files.sort();
    files
}

#[test]
fn simulate_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(simulate("no/such/file.json", dir.path(), &[]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"label": "x", "truth": {"type": "working_model"}}"#).unwrap();
    let o = simulate(bad.to_str().unwrap(), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid scenario"));
    let o = simulate(&scenario("continuous_s1.json"), dir.path(), &["--eta", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = simulate(&scenario("continuous_s1.json"), dir.path(), &["--replicates", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_replicate_emits_replayable_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(&scenario("continuous_s2.json"), dir.path(), &["--replicates", "1", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traces: Vec<_> = fs::read_dir(dir.path().join("traces")).unwrap().collect();
    assert_eq!(traces.len(), 1);

    let data = tempfile::tempdir().unwrap();
    fs::create_dir_all(data.path().join("trials")).unwrap();
    fs::copy(
        dir.path().join("traces/trial-000000.ndjson"),
        data.path().join("trials/trial-000000.ndjson"),
    )
    .unwrap();
    let svc = TrialService::open(data.path()).unwrap();
    let snap = svc.get("trial-000000").unwrap();
    assert!(!snap.state.is_open());

    let trials = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    let (_, rows) = parse_csv(&trials);
    assert_eq!(rows[0][2], snap.state.patients_treated().to_string());
    assert_eq!(rows[0][3], snap.state.dlt_count().to_string());
}

#[test]
fn simulate_is_byte_reproducible_across_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let s = scenario("continuous_s1.json");
    let common = ["--replicates", "6", "--seed", "11", "--eta", "0.4"];
    assert!(simulate(&s, a.path(), &[&common[..], &["--threads", "1"]].concat()).status.success());
    assert!(simulate(&s, b.path(), &[&common[..], &["--threads", "3"]].concat()).status.success());
    assert_eq!(read_all(a.path()), read_all(b.path()));

    let (header, rows) = parse_csv(&fs::read_to_string(a.path().join("safety.csv")).unwrap());
    assert_eq!(header[2], "avg_pct_toxicities");
    assert_eq!(rows[0][1], "0.4");
    let (header, rows) = parse_csv(&fs::read_to_string(a.path().join("pointwise.csv")).unwrap());
    assert_eq!(header, ["x", "true_y", "bias", "pct_rec_p0.1", "pct_rec_p0.2"]);
    assert_eq!(rows.len(), 51);

    // keeping traces changes nothing else
    let c = tempfile::tempdir().unwrap();
    assert!(simulate(&s, c.path(), &[&common[..], &["--traces"]].concat()).status.success());
    let mut with_traces = read_all(c.path());
    with_traces.retain(|(name, _)| !name.ends_with(".ndjson"));
    assert_eq!(with_traces, read_all(a.path()));
}

#[test]
fn discrete_scenarios_report_selection() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(
        &scenario("discrete_s1.json"),
        dir.path(),
        &["--replicates", "3", "--discrete-selection", "curve-rounding"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = parse_csv(&fs::read_to_string(dir.path().join("selection.csv")).unwrap());
    assert_eq!(header, ["scenario", "eta", "at_least_25", "at_least_50", "at_least_75", "all"]);
    assert_eq!(rows.len(), 1);
    assert!(!dir.path().join("pointwise.csv").exists());
    let study: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("study.json")).unwrap()).unwrap();
    assert_eq!(study["config"]["discrete_selection"], "curve_rounding");
}

#[test]
fn serve_fails_on_taken_port() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["serve", "--port", &port, "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot bind"));
}

#[test]
fn serve_answers_requests() {
    let dir = tempfile::tempdir().unwrap();
    let mut child = bin()
        .args(["serve", "--port", "0"])
        .env("COPULA_CRM_DATA_DIR", dir.path())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line
        .split("http://")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .to_string();

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(
        stream,
        "POST /trials HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: 2\r\nConnection: close\r\n\r\n{{}}"
    )
    .unwrap();
    let mut resp = String::new();
    stream.read_to_string(&mut resp).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(resp.starts_with("HTTP/1.1 201"), "{resp}");
    assert!(resp.contains("\"schema_version\":1"));
    assert!(dir.path().join("trials/trial-000001.ndjson").exists());
}
