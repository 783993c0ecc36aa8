use std::process::Command;

use serde_json::Value;

const DEP: &str = r#"{"family":"depolarising","params":{"d":2,"lambda":0.5}}"#;
const AD: &str = r#"{"family":"amplitude_damping","params":{"gamma":0.3}}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_channel-purity"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(r: &Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", r.stdout))
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn lemma_example() {
    let dir = std::env::temp_dir().join(format!("cp-lemma-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let psi = dir.join("dep2_0.5.json");
    let m = dir.join("ad_0.3.json");
    std::fs::write(&psi, DEP).unwrap();
    std::fs::write(&m, AD).unwrap();
    let r = run(&["verify", "lemma", "--psi", psi.to_str().unwrap(), "--m", m.to_str().unwrap(), "--p", "2", "--seed", "7"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["status"], "confirmed");
    assert!(v["results"]["gap"].as_f64().unwrap().abs() <= 1e-5);
    assert_eq!(v["channels"][1]["role"], "m");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn identity_norm_is_one() {
    let r = run(&["opt", "nup", "--channel", r#"{"family":"identity","params":{"d":2}}"#, "--p", "2"]);
    assert_eq!(r.code, 0);
    assert!((json(&r)["results"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn classify_extreme() {
    let r = run(&["classify", "qubit", "--channel", r#"{"family":"extreme","params":{"x1":0.8,"x2":0.6,"sign":1}}"#]);
    assert_eq!(r.code, 0);
    let v = json(&r);
    assert_eq!(v["results"]["classification"]["family"], "extreme_c");
    assert_eq!(v["results"]["classification"]["certified"], true);
}

#[test]
fn classify_example_e_instance_from_spec_format() {
    let r = run(&["classify", "qubit", "--channel", r#"{"family":"example_e","params":{"l1":0.3,"l2":0.5,"l3":0.6,"x1":0.6}}"#]);
    assert_eq!(json(&r)["results"]["classification"]["family"], "example_e_form");
}

#[test]
fn exit_codes() {
    let bad = run(&["check", "cptp", "--channel", r#"{"family":"depolarising","params":{"d":2,"lambda":1.5}}"#]);
    assert_eq!(bad.code, 3);
    assert!(bad.stderr.contains("[-1/(d^2-1), 1]"), "{}", bad.stderr);
    assert_eq!(json(&bad)["status"], "error");

    let not_cp = run(&["check", "cptp", "--channel", r#"{"family":"upsilon","params":{"x1":1,"x2":1,"x3":-1,"t":0}}"#]);
    assert_eq!(not_cp.code, 1);

    let falsified =
        run(&["check", "covariance", "--channel", r#"{"family":"shifted_depolarising","params":{"d":2,"a":0.3,"b":0.5,"c":0.2}}"#]);
    assert_eq!(falsified.code, 1);
    assert_eq!(json(&falsified)["results"]["verdict"], "falsified");

    let no_rank_one = run(&["verify", "rank-one", "--channel", DEP]);
    assert_eq!(no_rank_one.code, 2);

    let not_covariant = run(&["verify", "lemma", "--psi", AD, "--m", AD]);
    assert_eq!(not_covariant.code, 2);

    assert_eq!(run(&["opt", "smin"]).code, 3);
    assert_eq!(run(&["frobnicate"]).code, 3);
    assert_eq!(run(&["opt", "nup", "--channel", DEP, "--p", "0.5"]).code, 3);
    assert_eq!(run(&["zoo", "describe", "nope"]).code, 3);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn reports_are_reproducible() {
    let args = ["verify", "mult", "--channel", DEP, "--omega", AD, "--p", "1.5", "--seed", "11", "--starts", "8"];
    let a = run(&args);
    let b = run_with_env(&args, &[("CHANNEL_PURITY_THREADS", "1")]);
    assert_eq!(a.code, 0);
    assert_eq!(without_timing(json(&a)), without_timing(json(&b)));
    let v = json(&a);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["command"][0], "verify");
}

#[test]
fn floats_round_trip() {
    let r = run(&["opt", "smin", "--channel", AD, "--seed", "3"]);
    let v = json(&r);
    let value = v["results"]["value"].as_f64().unwrap();
    let text = serde_json::to_string(&v["results"]["value"]).unwrap();
    assert_eq!(text.parse::<f64>().unwrap().to_bits(), value.to_bits());
    let amps = v["results"]["argopt"].as_array().unwrap();
    assert_eq!(amps.len(), 2);
}

#[test]
fn sweep_csv() {
    let r = run(&["verify", "sweep", "--channel", DEP, "--omega", AD, "--p-grid", "2,1.5,inf", "--format", "csv", "--starts", "8"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "p,lhs,rhs,gap,verdict");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("inf,"));
    assert!(lines.iter().skip(1).all(|l| l.ends_with(",confirmed")));
}

#[test]
fn sweep_json_has_additivity_last() {
    let r = run(&["verify", "sweep", "--channel", DEP, "--omega", AD, "--p-grid", "2", "--starts", "8"]);
    let v = json(&r);
    let reports = v["results"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1]["kind"], "additivity");
    assert!(v["results"]["scope"].as_str().unwrap().contains("listed exponents"));
}

#[test]
fn out_path() {
    let path = std::env::temp_dir().join(format!("cp-out-{}.json", std::process::id()));
    let r = run(&["zoo", "list", "--out", path.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let names: Vec<&str> = v["results"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    for name in ["depolarising", "shift", "unitary_mixture", "example_e", "kraus", "superop"] {
        assert!(names.contains(&name), "{name}");
    }
    std::fs::remove_file(&path).ok();
}

#[test]
fn compose_spec_matches_shifted_depolarising() {
    let composed = r#"{"compose":[{"family":"depolarising","params":{"d":2,"lambda":0.7}},{"family":"shift","params":{"a":0.4,"b":0.3}}]}"#;
    let direct = r#"{"family":"shifted_depolarising","params":{"d":2,"a":0.4,"b":0.3,"c":0.3}}"#;
    let a = json(&run(&["opt", "smin", "--channel", composed, "--seed", "5"]));
    let b = json(&run(&["opt", "smin", "--channel", direct, "--seed", "5"]));
    let (va, vb) = (a["results"]["value"].as_f64().unwrap(), b["results"]["value"].as_f64().unwrap());
    assert!((va - vb).abs() < 1e-10, "{va} vs {vb}");
}

#[test]
fn bad_thread_setting() {
    let r = run_with_env(&["zoo", "list"], &[("CHANNEL_PURITY_THREADS", "many")]);
    assert_eq!(r.code, 3);
}
