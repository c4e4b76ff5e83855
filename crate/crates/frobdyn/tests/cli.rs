use std::process::{Command, Output};

fn frobdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frobdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn map_example() {
    let o = frobdyn(&["map", "--field", "1", "--mu", "0", "--point", "1:1:1:1", "--coords", "y"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1:1:0:0");
}

#[test]
fn map_base_point_is_a_structured_error() {
    let o = frobdyn(&["map", "--field", "4", "--mu", "3", "--point", "0:0:1:0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["schema"], "1");
    assert!(v["error"].as_str().unwrap().contains("base point"));
    assert!(v.get("output").is_none());
}

#[test]
fn map_z_input_round_trips_through_coordinate_change() {
    // At mu = 0 the coordinate changes are the identity.
    let y = frobdyn(&["map", "--field", "3", "--mu", "0", "--point", "1:2:3:4"]);
    let z = frobdyn(&["map", "--field", "3", "--mu", "0", "--point", "1:2:3:4", "--coords", "z", "--out-coords", "y"]);
    assert_eq!(stdout(&y), stdout(&z));
}

#[test]
fn orbit_example() {
    let o = frobdyn(&["orbit", "--field", "1", "--mu", "0", "--start", "0:1:0:0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["preperiod"], 0);
    assert_eq!(v["period"], 2);
}

#[test]
fn orbit_from_excluded_point_exits_1() {
    let o = frobdyn(&["orbit", "--field", "2", "--mu", "1", "--start", "0:0:1:1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("error:"));
}

#[test]
fn fiber_example() {
    let o = frobdyn(&["fiber", "--field", "1", "--mu", "0", "--point", "0:0:1:0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "empty");
}

#[test]
fn fiber_on_kummer_is_a_line_through_e_bad() {
    // Target (0:1:0:0): a = 0, c^2 = bd.
    let o = frobdyn(&["fiber", "--field", "2", "--point", "0:1:0:0", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["kind"], "line");
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 5);
    assert_eq!(pts.last().unwrap(), "0:0:1:0");
}

#[test]
fn verify_rejects_omega_one() {
    let o = frobdyn(&["verify", "--omega", "1"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("omega"));
}

#[test]
fn malformed_flags_are_usage_errors() {
    assert_eq!(frobdyn(&["verify", "--trials", "x"]).status.code(), Some(64));
    assert_eq!(frobdyn(&["map", "--field", "2", "--point", "1:2"]).status.code(), Some(64));
    assert_eq!(frobdyn(&["map", "--field", "2", "--point", "0:0:0:0"]).status.code(), Some(64));
    assert_eq!(frobdyn(&["census", "--field", "11"]).status.code(), Some(64));
    assert_eq!(frobdyn(&["bogus"]).status.code(), Some(64));
    assert_eq!(frobdyn(&["--help"]).status.code(), Some(0));
}

#[test]
fn low_truncation_is_inconclusive() {
    let o = frobdyn(&["verify", "--trunc", "40", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["status"], "inconclusive");
}

#[test]
fn verify_certificate_layout() {
    let o = frobdyn(&["verify", "--trials", "2", "--seed", "3", "--mu", "5", "--omega", "2b"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema"], "1");
    assert_eq!(v["parameters"]["rng"], "ChaCha8");
    assert_eq!(v["parameters"]["seed"], 3);
    let trials = v["trials"].as_array().unwrap();
    assert_eq!(trials.len(), 3);
    assert_eq!(trials[2]["mu"], "5");
    assert_eq!(trials[2]["omega"], "2b");
    for t in trials {
        for c in t["checks"].as_array().unwrap() {
            let s = c["status"].as_str().unwrap();
            assert!(s == "certified" || s == "discrepancy", "{c}");
        }
    }
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--trials", "2", "--seed", "11"];
    let a = frobdyn(&args);
    let b = frobdyn(&[&args[..], &["--workers", "1"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let c = frobdyn(&["verify", "--trials", "2", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn census_json_report() {
    let o = frobdyn(&["census", "--field", "2", "--mu", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["points"], 85);
    let classes = &v["classes"];
    let total: u64 = ["off_h", "h_off_kummer", "kummer_on_h"]
        .iter()
        .map(|k| classes[k].as_u64().unwrap())
        .sum();
    assert_eq!(total, 85);
    assert!(v["invariants"].as_array().unwrap().iter().all(|c| c["status"] == "certified"));
}

#[test]
fn custom_modulus() {
    let o = frobdyn(&["map", "--field", "4", "--modulus", "19", "--point", "1:2:3:4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(frobdyn(&["map", "--field", "4", "--modulus", "15", "--point", "1:2:3:4"]).status.code(), Some(64));
}
