use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use dnet_core::algebra::{is_polymorphism, CheckMode, Counterexample, FiniteOperation, HomWitness, Universe};
use dnet_core::dominion::io::{format_dominion, format_edges};
use dnet_core::dominion::{generate_dominion, is_dominion, minc, Dominion, Labeling};
use dnet_core::hamming::hamming_structure;
use dnet_core::learn::empirical_loss;
use dnet_core::net::NeuralNet;

use crate::dataset::load_dataset;
use crate::experiment::{loss_for, LossName};

pub fn load_net(path: &Path) -> Result<NeuralNet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    NeuralNet::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

/// Empirical loss of a saved net on a dataset.
pub fn cmd_eval(net: &Path, dataset: &Path, loss: Option<LossName>) -> Result<f64> {
    let net = load_net(net)?;
    let data = load_dataset(dataset)?;
    let loss = loss_for(loss, net.universe());
    Ok(empirical_loss(&net, &data.training_set()?, &loss)?)
}

/// Writes `dominion.txt` and `minc.txt` into `out`.
pub fn cmd_gen_dominion(k: usize, n: usize, labels: u32, seed: u64, out: &Path) -> Result<(Dominion, PathBuf, PathBuf)> {
    let d = generate_dominion(k, n, labels, seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let (dp, mp) = (out.join("dominion.txt"), out.join("minc.txt"));
    fs::write(&dp, format_dominion(&d))?;
    fs::write(&mp, format_edges(&minc(&d)))?;
    Ok((d, dp, mp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Exhaustive,
    Sampled,
}

/// Exhaustive up to `n = 2`, sampled above.
pub fn default_mode(n: usize) -> Mode {
    if n <= 2 {
        Mode::Exhaustive
    } else {
        Mode::Sampled
    }
}

pub struct Verdict {
    pub target: String,
    pub witness: HomWitness,
}

impl Verdict {
    pub fn line(&self) -> String {
        let w = &self.witness;
        let how = if w.sampled { "sampled" } else { "exhaustive" };
        let mut s = format!(
            "{} {} ({how}, {} checked)",
            if w.verdict { "PASS" } else { "FAIL" },
            self.target,
            w.checked
        );
        if let Some(c) = &w.counterexample {
            let _ = write!(s, ": {}", describe(c));
        }
        s
    }
}

fn describe(c: &Counterexample) -> String {
    format!("{} maps {:?} to {:?}", c.symbol, c.arguments, c.image)
}

fn check_mode(mode: Mode, budget: usize, seed: u64) -> CheckMode {
    match mode {
        Mode::Exhaustive => CheckMode::exhaustive(),
        Mode::Sampled => CheckMode::sampled(budget, seed),
    }
}

/// Polymorphism verdicts for every activation and every output coordinate.
pub fn verify_net(net: &NeuralNet, mode: Mode, budget: usize, seed: u64) -> Result<Vec<Verdict>> {
    let Universe::Images { n } = net.universe() else {
        bail!("polymorphism checks need an image universe, net is over {}", net.universe());
    };
    let ham = hamming_structure(n as usize);
    let mode = check_mode(mode, budget, seed);
    let mut out = Vec::new();
    let mut push = |target: String, op: &FiniteOperation| -> Result<()> {
        let witness = is_polymorphism(op, &ham, mode)?;
        out.push(Verdict { target, witness });
        Ok(())
    };
    for (v, op) in net.activations() {
        push(format!("activation {v}"), op)?;
    }
    for j in 1..=net.output_len() {
        push(format!("output {j}"), &net.coordinate_operation(j)?)?;
    }
    Ok(out)
}

pub fn verify_dominion(path: &Path) -> Result<Verdict> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    // parse without the validity check so that violations are reported, not rejected
    let mut tokens = text.split_whitespace();
    let mut header = || -> Result<usize> {
        tokens
            .next()
            .context("truncated header")?
            .parse()
            .context("header must be integers")
    };
    let (k, n, l) = (header()?, header()?, header()? as u32);
    let labels = tokens
        .map(|t| t.parse::<u32>().with_context(|| format!("bad label {t:?}")))
        .collect::<Result<Vec<_>>>()?;
    let labeling = Labeling::new(k, n, l, labels)
        .with_context(|| format!("in {}", path.display()))?;
    Ok(Verdict {
        target: format!("dominion {}", path.display()),
        witness: is_dominion(&labeling),
    })
}

/// Layers, orders, edges and activation descriptors, one item per line.
pub fn show_net(net: &NeuralNet) -> String {
    let arch = net.architecture();
    let mut s = format!("universe {}\n", net.universe());
    for (i, layer) in arch.layers.iter().enumerate() {
        let _ = writeln!(s, "layer {}: {}", i + 1, layer.join(" < "));
    }
    let _ = writeln!(s, "edges ({}):", arch.edges.len());
    for (a, b) in &arch.edges {
        let _ = writeln!(s, "  {a} -> {b}");
    }
    let _ = writeln!(s, "activations:");
    for (v, op) in net.activations() {
        let doc = serde_json::to_string(op).expect("descriptors serialize");
        let _ = writeln!(s, "  {v}: {doc}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use dnet_core::dominion::io::parse_dominion;
    use dnet_core::net::f5_example_net;

    #[test]
    fn show_lists_the_f5_net() {
        let text = show_net(&f5_example_net());
        assert!(text.contains("layer 1: v_1_1 < v_1_2 < v_1_3"));
        assert!(text.contains("layer 3: v_3_1 < v_3_2"));
        assert!(text.contains("edges (10):"));
        assert_eq!(text.lines().filter(|l| l.contains(" -> ")).count(), 10);
    }

    #[test]
    fn table_nets_cannot_be_verified_on_ham() {
        assert!(verify_net(&f5_example_net(), Mode::Exhaustive, 10, 0).is_err());
    }

    #[test]
    fn dominion_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (d, dp, mp) = cmd_gen_dominion(2, 2, 3, 4, dir.path()).unwrap();
        assert!(verify_dominion(&dp).unwrap().witness.verdict);
        assert_eq!(parse_dominion(&fs::read_to_string(&dp).unwrap()).unwrap(), d);
        assert_eq!(fs::read_to_string(mp).unwrap(), format_edges(&minc(&d)));
        fs::write(&dp, "2 1 3\n0 1\n1 2\n").unwrap();
        let v = verify_dominion(&dp).unwrap();
        assert!(!v.witness.verdict);
        assert!(v.line().starts_with("FAIL"), "{}", v.line());
    }
}
