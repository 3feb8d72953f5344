use std::path::PathBuf;
use std::process::{Command, Output};

use compoundcap::capacity::{qe_compound, qe_single, DEFAULT_CAPACITY_TOL};
use compoundcap::compound::CompoundChannel;
use compoundcap::qcore::Channel;
use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compoundcap")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn maximally_entangled_min_entropy_is_minus_one() {
    let v = json(&["entropy", "--state", &data("phi_plus.json"), "--hmin"]);
    let bits = v["result"]["h_min"]["bits"].as_f64().unwrap();
    assert!((bits + 1.0).abs() < 1e-6, "{bits}");
    assert_eq!(v["command"], "entropy");
}

#[test]
fn identity_capacity_is_one_bit() {
    let v = json(&["capacity", "--channel", &data("identity_qubit.json")]);
    let q = v["result"]["bits_per_use"].as_f64().unwrap();
    assert!((q - 1.0).abs() < 1e-4, "{q}");
}

#[test]
fn compound_capacity_matches_the_library() {
    let v = json(&["capacity", "--compound", &data("pair.json")]);
    let pi = CompoundChannel::new(vec![Channel::dephasing(2, 0.5).unwrap(), Channel::depolarizing(2, 0.5).unwrap()])
        .unwrap();
    let lib = qe_compound(&pi, DEFAULT_CAPACITY_TOL).unwrap();
    let q = v["result"]["bits_per_use"].as_f64().unwrap();
    assert!((q - lib.bits_per_use).abs() < 1e-9);
    let active: Vec<usize> =
        v["result"]["active_indices"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap() as usize).collect();
    assert_eq!(active, lib.active_indices);
    let weakest = qe_single(&pi.channels()[1], DEFAULT_CAPACITY_TOL).unwrap().bits_per_use;
    assert!(q <= weakest + 1e-6);
}

#[test]
fn net_bound_is_evaluated_exactly() {
    let v = json(&["bounds", "--net", "nu=1", "dab=4"]);
    let x = v["result"]["net"]["log2_cardinality"].as_f64().unwrap();
    assert!((x - 32.0 * 6f64.log2()).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let non_tp = run(&["capacity", "--channel", &data("not_trace_preserving.json")]);
    assert_eq!(non_tp.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&non_tp.stderr).contains("kraus completeness violated"));

    let no_seed = run(&["decouple", "--compound", &data("pair.json"), "--m0", "1"]);
    assert_eq!(no_seed.status.code(), Some(1));

    let no_samples = run(&["decouple", "--compound", &data("pair.json"), "--m0", "1", "--seed", "1", "--samples", "0"]);
    assert_eq!(no_samples.status.code(), Some(3));

    assert_eq!(run(&["capacity", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["bounds"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn csv_and_out_file() {
    let csv = run(&["bounds", "--union", "fidelity=0.99", "members=5", "--format", "csv"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.lines().any(|l| l.starts_with("result.union.") && l.contains("0.95")), "{text}");

    let dir = std::env::temp_dir().join(format!("compoundcap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.json");
    let args = ["bounds", "--teleport", "messages=16", "m1=8", "success=0.9"];
    let stdout = run(&args).stdout;
    let mut with_out = args.to_vec();
    let p = path.to_string_lossy().into_owned();
    with_out.extend(["--out", &p]);
    let o = run(&with_out);
    assert!(o.status.success() && o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}
