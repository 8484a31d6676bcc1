use std::process::{Command, Output};

use motivic_steenrod::{parse, DualAlgebra, Duality, Prime, SteenrodAlgebra};
use serde_json::Value;

fn msteen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msteen"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = msteen(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout)
        .unwrap()
        .trim_end()
        .to_string()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    serde_json::from_str(&stdout(&all)).unwrap()
}

/// Checks the field layout and rebuilds the parser's text form.
fn rebuild(v: &Value) -> String {
    let obj = v.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["basis", "prime", "terms"]);
    let basis = v["basis"].as_str().unwrap();
    assert!(["admissible", "milnor", "dual"].contains(&basis));
    let mut parts = Vec::new();
    for term in v["terms"].as_array().unwrap() {
        let mut keys: Vec<&str> = term
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        keys.sort();
        assert_eq!(keys, ["coeff", "monomial"]);
        let c = &term["coeff"];
        let mut coeff = vec![c["scalar"].as_i64().unwrap().to_string()];
        for (name, key) in [("t", "t"), ("r", "r")] {
            let e = c[key].as_u64().unwrap();
            if e > 0 {
                coeff.push(format!("{name}^{e}"));
            }
        }
        let m = term["monomial"].as_str().unwrap().to_string();
        let coeff = coeff.join(" ");
        parts.push(if basis == "dual" {
            format!("{m} {coeff}")
        } else {
            format!("{coeff} {m}")
        });
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

#[test]
fn examples() {
    assert_eq!(
        stdout(&["--prime", "2", "normalize", "Sq^2 Sq^2"]),
        "t Sq^3 Sq^1"
    );
    assert_eq!(stdout(&["--prime", "3", "multiply", "P^1", "P^1"]), "2 P^2");
    assert_eq!(stdout(&["normalize", "b b"]), "0");
    assert_eq!(stdout(&["specialize", "Sq^2 Sq^2"]), "Sq^3 Sq^1");
    assert_eq!(stdout(&["act", "b", "u_1"]), "v_1");
    assert_eq!(stdout(&["chern", "Pm(1)", "1", "2"]), "c1^2");
    assert!(stdout(&["verify", "adem", "--max", "10"]).starts_with("ok:"));
}

#[test]
fn json_round_trips_through_parse() {
    for (p, args) in [
        (2, vec!["normalize", "Sq^2 Sq^2 + r Sq^1 + P^0"]),
        (2, vec!["multiply", "t Sq^3", "Sq^2 Sq^1"]),
        (3, vec!["normalize", "P^1 b P^1 + 2 P^3"]),
        (2, vec!["to-milnor", "Sq^4 Sq^2 + t Sq^3"]),
        (3, vec!["to-milnor", "P^3 b P^1"]),
        (2, vec!["dual-mul", "tau_0 t", "tau_0 xi_1"]),
        (3, vec!["dual-mul", "tau_1 xi_1", "xi_1^2"]),
    ] {
        let prime = Prime::new(p).unwrap();
        let mut with_prime = vec!["--prime".to_string(), p.to_string()];
        with_prime.extend(args.iter().map(|s| s.to_string()));
        let with_prime: Vec<&str> = with_prime.iter().map(String::as_str).collect();
        let v = json(&with_prime);
        assert_eq!(v["prime"].as_u64(), Some(p as u64));
        let text = rebuild(&v);
        let printed = stdout(&with_prime);
        let alg = SteenrodAlgebra::new(prime);
        let duality = Duality::new(prime);
        if v["basis"] == "dual" {
            let d = DualAlgebra::new(prime);
            assert_eq!(
                parse(&text, prime).unwrap().dual(&d).unwrap(),
                parse(&printed, prime).unwrap().dual(&d).unwrap()
            );
        } else {
            let a = parse(&text, prime)
                .unwrap()
                .steenrod(&alg, &duality)
                .unwrap();
            let b = parse(&printed, prime)
                .unwrap()
                .steenrod(&alg, &duality)
                .unwrap();
            assert_eq!(a, b, "{text} vs {printed}");
        }
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["--json", "coproduct", "Sq^4 Sq^2 + t Sq^3"];
    assert_eq!(stdout(&args), stdout(&args));
    let a = stdout(&["--json", "verify", "adem", "--max", "12"]);
    let b = {
        let out = Command::new(env!("CARGO_BIN_EXE_msteen"))
            .args(["--json", "verify", "adem", "--max", "12"])
            .env("MSTEEN_THREADS", "1")
            .output()
            .unwrap();
        String::from_utf8(out.stdout).unwrap()
    };
    let pairs = |s: &str| -> Vec<Value> {
        let v: Value = serde_json::from_str(s).unwrap();
        v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["pair"].clone())
            .collect()
    };
    assert_eq!(pairs(&a), pairs(&b));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["counterexamples"], Value::Array(vec![]));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["normalize", "P^1 +"],
        vec!["--prime", "3", "normalize", "Sq^2"],
        vec!["--prime", "4", "normalize", "b"],
        vec!["frobnicate"],
        vec!["multiply", "b"],
    ] {
        assert_eq!(msteen(&args).status.code(), Some(2), "{args:?}");
    }
    let out = msteen(&["--json", "normalize", "P^1 + + b"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["position"], 6);
    assert!(v["error"].as_str().unwrap().contains("parse error"));
}

#[test]
fn thread_variable_is_validated() {
    let run = |value: &str| {
        Command::new(env!("CARGO_BIN_EXE_msteen"))
            .args(["verify", "adem", "--max", "6"])
            .env("MSTEEN_THREADS", value)
            .output()
            .unwrap()
    };
    assert_eq!(run("2").status.code(), Some(0));
    assert_eq!(run("lots").status.code(), Some(2));
}

#[test]
fn negative_index_warns() {
    let out = msteen(&["normalize", "P^-1 b + b"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Sq^1");
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}
