use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    run_env(dir, args, &[])
}

fn run_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_macrosize"));
    cmd.current_dir(dir).args(args).env_remove("MACROSIZE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn amp_norms(doc: &Value) -> Vec<f64> {
    doc["state"]["amps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| {
            let (re, im) = (z[0].as_f64().unwrap(), z[1].as_f64().unwrap());
            re * re + im * im
        })
        .collect()
}

/// `# key: value` comment from a CSV or text output.
fn comment(text: &str, key: &str) -> Option<String> {
    text.lines().find_map(|l| l.strip_prefix(&format!("# {key}: ")).map(str::to_string))
}

#[test]
fn fock_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["state", "--name", "fock", "--N", "3", "--cutoff", "16", "-o", "fock3.json"]);
    let info = stdout_json(&out);
    assert_eq!(info["meanExcitation"].as_f64(), Some(3.0));
    assert_eq!(info["basis"]["cutoff"].as_u64(), Some(16));
    let doc = read_json(&dir.path().join("fock3.json"));
    assert_eq!(doc["header"]["tool"], "macrosize");
    let p = amp_norms(&doc);
    assert_eq!(p.len(), 17);
    assert_eq!(p[3], 1.0);
    assert_eq!(p.iter().sum::<f64>(), 1.0);
}

#[test]
fn even_cat_has_only_even_components() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["state", "--name", "even-cat", "--alpha", "2", "-o", "cat.json"]);
    assert_eq!(code(&out), 0);
    let p = amp_norms(&read_json(&dir.path().join("cat.json")));
    assert!(p.iter().skip(1).step_by(2).all(|&x| x == 0.0));
    assert!(p[2] > 0.1);
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"name\": \"fock\", \"params\": {\"N\": -1}}").unwrap();
    std::fs::write(dir.path().join("junk.json"), "not json").unwrap();
    for args in [
        vec!["state", "--name", "fock", "--N", "x"],
        vec!["state", "--name", "fock"],
        vec!["state", "--name", "squeezed", "--N", "2"],
        vec!["state", "--name", "fock", "--N", "5", "--cutoff", "3"],
        vec!["state", "--spec", "bad.json"],
        vec!["measure", "n-eff", "junk.json"],
        vec!["measure", "n-eff", "missing.json"],
        vec!["measure", "volume", "junk.json"],
        vec!["sweep", "--family", "fock", "--measure", "n-eff", "--ladder", "8,9,10,11"],
    ] {
        let out = run(dir.path(), &args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn measure_values_and_undefined_cells() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["state", "--name", "ghz", "--M", "100", "-o", "ghz.json"])), 0);
    assert_eq!(code(&run(dir.path(), &["state", "--name", "fock", "--N", "3", "-o", "fock3.json"])), 0);
    let neff = stdout_json(&run(dir.path(), &["measure", "n-eff", "ghz.json"]));
    assert_eq!(neff["measure"], "n-eff");
    assert!((neff["value"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    assert!(neff["header"]["configHash"].as_str().unwrap().len() == 16);
    let i = stdout_json(&run(dir.path(), &["measure", "i-wigner", "fock3.json"]));
    assert_eq!(i["value"].as_f64(), Some(3.5));
    assert_eq!(code(&run(dir.path(), &["measure", "m2", "fock3.json"])), 3);
    assert_eq!(code(&run(dir.path(), &["measure", "i-wigner", "ghz.json"])), 3);
}

#[test]
fn pair_files_feed_superposition_measures() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        run(dir.path(), &["state", "--name", "fock-superposition", "--N", "4", "--components", "-o", "pair.json"]);
    assert_eq!(code(&out), 0);
    let dbar = stdout_json(&run(dir.path(), &["measure", "d-bar", "pair.json", "--M", "800"]));
    assert!((dbar["value"].as_f64().unwrap() - 8.0).abs() < 1e-9);
    let size = stdout_json(&run(dir.path(), &["measure", "size-pg", "pair.json"]));
    assert!(size["value"].as_f64().unwrap() > 1.0);
    // spin measures on photonic inputs need a spin count
    assert_eq!(code(&run(dir.path(), &["measure", "d-bar", "pair.json"])), 2);
    assert_eq!(code(&run(dir.path(), &["state", "--name", "fock", "--N", "2", "--components"])), 3);
}

#[test]
fn absorb_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["state", "--name", "coherent", "--alpha", "1", "-o", "coh.json"])), 0);
    let r = stdout_json(&run(dir.path(), &["absorb", "coh.json", "--M", "200", "-o", "spin.json"]));
    assert_eq!(r["productCheck"], true);
    assert!(r["fidelity"].as_f64().unwrap() >= 0.99);
    let spin = read_json(&dir.path().join("spin.json"));
    assert_eq!(spin["state"]["basis"]["kind"], "dicke");
    assert_eq!(spin["state"]["basis"]["M"], 200);
    let n = stdout_json(&run(dir.path(), &["measure", "n-eff", "spin.json"]));
    assert!((n["value"].as_f64().unwrap() - 1.0).abs() < 0.05);

    let r = stdout_json(&run(dir.path(), &["absorb", "coh.json", "--M", "200", "--mode", "exact", "--g", "0"]));
    let untouched = 1.0 - (-1.0f64).exp();
    assert!((r["residualPhotonPopulation"].as_f64().unwrap() - untouched).abs() < 1e-10);
    let r = stdout_json(&run(dir.path(), &["absorb", "coh.json", "--M", "200", "--mode", "exact", "-o", "x.json"]));
    assert!(r["fidelity"].as_f64().unwrap() >= 0.99);
    assert_eq!(read_json(&dir.path().join("x.json"))["state"]["type"], "density");
    assert_eq!(code(&run(dir.path(), &["absorb", "x.json", "--M", "200"])), 2);
}

#[test]
fn sweeps_fit_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sweep", "--family", "fock", "--measure", "n-eff", "-o", "fock.csv"]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("fock.csv")).unwrap();
    assert!(comment(&csv, "seed").is_some() && comment(&csv, "config-hash").is_some());
    let exponent: f64 = comment(&csv, "exponent").unwrap().parse().unwrap();
    assert!((exponent - 1.0).abs() < 0.1, "{exponent}");
    let table: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(table[0].starts_with("size,value,M,"));
    assert_eq!(table.len(), 5);
    assert!(table[1].starts_with("8,") && table[1].contains(",1600,"));

    let out = run(dir.path(), &["sweep", "--family", "coherent", "--measure", "i-wigner"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let exponent: f64 = comment(&csv, "exponent").unwrap().parse().unwrap();
    assert!(exponent.abs() < 1e-9);
    assert_eq!(code(&run(dir.path(), &["sweep", "--family", "fock", "--measure", "m2"])), 3);
}

#[test]
fn table1_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["table1", "-o", "t.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].contains("fock_exponent") && rows[0].contains("fock_paper_target"));
    assert_eq!(rows.len(), 9);
    assert!(csv.contains("paper-discrepancy"));

    let out = run(dir.path(), &["table1", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# tool: macrosize"));
    assert!(text.contains("26/26 checked cells agree"), "{text}");
}

#[test]
fn verify_mapping_checks() {
    let dir = tempfile::tempdir().unwrap();
    let r = stdout_json(&run(dir.path(), &["verify-mapping"]));
    assert_eq!(r["fidelity"]["pass"], true);
    assert_eq!(r["operatorMap"]["pass"], true);
    assert_eq!(r["disentangling"]["pass"], true);
    // M not doubling: the halving check fails, exit 4
    let out = run(dir.path(), &["verify-mapping", "--M", "200,300,400"]);
    assert_eq!(code(&out), 4);
    assert!(!out.stdout.is_empty());
}

#[test]
fn outputs_are_deterministic_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--family", "even-cat", "--measure", "n-eff", "--seed", "7"];
    let a = run_env(dir.path(), &args, &[("MACROSIZE_THREADS", "1")]);
    let b = run_env(dir.path(), &args, &[("MACROSIZE_THREADS", "3")]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(comment(&String::from_utf8(a.stdout).unwrap(), "seed").as_deref(), Some("7"));

    let s1 = run(dir.path(), &["state", "--name", "even-cat", "--alpha", "1.5"]);
    let s2 = run(dir.path(), &["state", "--name", "even-cat", "--alpha", "1.5"]);
    assert_eq!(s1.stdout, s2.stdout);
    let other = run(dir.path(), &["state", "--name", "even-cat", "--alpha", "1.6"]);
    let hash = |o: &Output| serde_json::from_slice::<Value>(&o.stdout).unwrap()["header"]["configHash"].clone();
    assert_ne!(hash(&s1), hash(&other));

    let bad = run_env(dir.path(), &args, &[("MACROSIZE_THREADS", "many")]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn numbers_carry_twelve_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["state", "--name", "coherent", "--alpha", "0.7"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for token in text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == '-')) {
        let digits: String = token.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
        let significant = digits.trim_start_matches('0');
        assert!(significant.len() <= 12, "{token}");
    }
}
