use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dnet_core::algebra::{compose, FiniteOperation};
use dnet_core::hamming::{dihedral_endo, random_multilinear_indicator, swap_endo, BinaryImage, DihedralElement};
use dnet_core::net::{f5_example_net, Architecture, NeuralNet};
use dnet_core::rng::stream_rng;
use dnet_core::Universe;

fn dnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn unary_net(n: usize, op: FiniteOperation) -> NeuralNet {
    let acts = BTreeMap::from([("v_2_1".to_string(), op)]);
    NeuralNet::new(Architecture::dense(&[1, 1]), Universe::images(n).unwrap(), acts).unwrap()
}

fn binary_net(n: usize, op: FiniteOperation) -> NeuralNet {
    let u = Universe::images(n).unwrap();
    let acts = BTreeMap::from([
        ("v_2_1".to_string(), dihedral_endo(DihedralElement::E, n)),
        ("v_2_2".to_string(), dihedral_endo(DihedralElement::R, n)),
        ("v_3_1".to_string(), op),
    ]);
    NeuralNet::new(Architecture::dense(&[1, 2, 1]), u, acts).unwrap()
}

fn write_net(dir: &Path, name: &str, net: &NeuralNet) -> String {
    let p = dir.join(name);
    fs::write(&p, net.to_json()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn eval_scores_exact_and_complemented_nets() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("rot");
    let o = dnet(&["gen-dataset", "--task", "rot90", "--n", "3", "--count", "12", "--seed", "5", "--out", path(&data)]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(fs::read_to_string(data.join("manifest.tsv")).unwrap().lines().count(), 12);

    let r = dihedral_endo(DihedralElement::R, 3);
    let exact = write_net(tmp.path(), "exact.json", &unary_net(3, r.clone()));
    let flipped = compose(&swap_endo(BinaryImage::ones(3)), &[r]).unwrap();
    let wrong = write_net(tmp.path(), "wrong.json", &unary_net(3, flipped));

    let o = dnet(&["eval", "--net", &exact, "--dataset", path(&data)]);
    assert_eq!(stdout(&o).trim(), "0.000000");
    let o = dnet(&["eval", "--net", &wrong, "--dataset", path(&data)]);
    assert_eq!(stdout(&o).trim(), "1.000000");
    let o = dnet(&["eval", "--net", &wrong, "--dataset", path(&data), "--loss", "zero-one"]);
    assert_eq!(stdout(&o).trim(), "1.000000");
}

#[test]
fn verify_reports_polymorphisms_and_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let indicator = random_multilinear_indicator(2, 2, &mut stream_rng(1, 0));
    let good = binary_net(2, indicator);
    let good = write_net(tmp.path(), "good.json", &good);
    let o = dnet(&["verify", "--net", &good, "--n", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    assert!(stdout(&o).contains("exhaustive, 6400 checked"));

    let and = write_net(tmp.path(), "and.json", &binary_net(2, FiniteOperation::bitwise_and(2, 2).unwrap()));
    let o = dnet(&["verify", "--net", &and]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL activation v_3_1"), "{}", stdout(&o));

    let o = dnet(&["verify", "--net", &and, "--mode", "sampled", "--budget", "2000", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("sampled"));
}

#[test]
fn show_prints_the_f5_net() {
    let tmp = tempfile::tempdir().unwrap();
    let net = write_net(tmp.path(), "f5.json", &f5_example_net());
    let o = dnet(&["show", "--net", &net]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("layer 2: v_2_1 < v_2_2 < v_2_3 < v_2_4"));
    assert!(text.contains("v_1_3 -> v_2_2"));
    assert!(text.contains("linear"));
}

fn write_config(dir: &Path, neighbor: &str, seed: u64) -> String {
    let cfg = format!(
        r#"{{
  "n": 3,
  "dataset": "data",
  "net": {{ "layers": [1, 2, 1] }},
  "neighbor": {neighbor},
  "trainer": {{ "max_iterations": 25 }},
  "seed": {seed}
}}"#
    );
    let p = dir.join(format!("cfg{seed}.json"));
    fs::write(&p, cfg).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn singleton_training_leaves_the_net_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    dnet(&["gen-dataset", "--task", "mask", "--n", "3", "--count", "8", "--mask", "110/011/101", "--out", path(&data)]);
    let cfg = write_config(tmp.path(), r#"{ "family": "twist", "indicators": 1, "dominions": 1 }"#, 2);
    let first = tmp.path().join("first");
    assert!(dnet(&["train", "--config", &cfg, "--out", path(&first)]).status.success());

    let frozen = tmp.path().join("frozen.json");
    fs::write(
        &frozen,
        r#"{ "n": 3, "dataset": "data", "net": { "path": "first/net.json" }, "neighbor": { "family": "singleton" }, "trainer": { "max_iterations": 10 } }"#,
    )
    .unwrap();
    let out = tmp.path().join("frozen");
    let o = dnet(&["train", "--config", path(&frozen), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(first.join("net.json")).unwrap(),
        fs::read(out.join("net.json")).unwrap()
    );
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 11);
    assert!(trace.lines().skip(1).all(|l| {
        let f: Vec<&str> = l.split(',').collect();
        f[2] == f[3]
    }));
}

#[test]
fn train_is_reproducible_from_the_command_line() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    dnet(&["gen-dataset", "--task", "twist-composite", "--n", "3", "--count", "10", "--seed", "4", "--out", path(&data)]);
    let cfg = write_config(tmp.path(), r#"{ "family": "twist", "swap_masks": 2, "indicators": 2 }"#, 9);
    let runs: Vec<Output> = ["a", "b"]
        .iter()
        .map(|r| dnet(&["train", "--config", &cfg, "--out", path(&tmp.path().join(r))]))
        .collect();
    assert!(runs.iter().all(|o| o.status.success()));
    assert_eq!(stdout(&runs[0]).lines().take(3).collect::<Vec<_>>(), stdout(&runs[1]).lines().take(3).collect::<Vec<_>>());
    for f in ["net.json", "trace.csv"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap());
    }
    let c = dnet(&["train", "--config", &cfg, "--out", path(&tmp.path().join("c")), "--seed", "10"]);
    assert!(c.status.success());
}

#[test]
fn dominions_round_trip_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dnet(&["gen-dominion", "--k", "2", "--n", "2", "--labels", "4", "--seed", "1", "--out", path(tmp.path())]);
    assert!(o.status.success());
    let d = tmp.path().join("dominion.txt");
    assert!(tmp.path().join("minc.txt").exists());
    let o = dnet(&["verify", "--dominion", path(&d)]);
    assert_eq!(o.status.code(), Some(0));

    fs::write(&d, "2 1 3\n0 1\n1 2\n").unwrap();
    let o = dnet(&["verify", "--dominion", path(&d)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));
}

#[test]
fn bad_input_exits_with_usage_code() {
    assert_eq!(dnet(&["eval", "--net", "/nonexistent.json", "--dataset", "/nowhere"]).status.code(), Some(2));
    assert_eq!(dnet(&["gen-dataset", "--task", "blur", "--n", "3", "--out", "/tmp/x"]).status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let net = write_net(tmp.path(), "f5.json", &f5_example_net());
    let o = dnet(&["verify", "--net", &net]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not an image universe"));
}
