//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a criterion regresses.
//!
//! Criterion 5 is reported as FAIL: the literal law `h_s . h_t = h_{st}` does
//! not hold for the pixel-reading definition of the dihedral endomorphisms,
//! which compose contravariantly. The suite pins the law that does hold and
//! the exact number of pairs on which the literal one fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};

use dnet_cli::commands::{verify_net, Mode};
use dnet_cli::dataset::{gen_dataset, Task};
use dnet_cli::experiment::{
    cmd_train, Experiment, ExperimentConfig, LossName, NeighborSpec, NetSpec, TrainerSection,
};
use dnet_core::algebra::{compose, is_polymorphism, CheckMode, FiniteOperation, Universe};
use dnet_core::dominion::{
    dominion_polymorphism, embed_in_tree, generate_dominion, is_dominion, minc,
    tree_walk_homomorphism, Dominion,
};
use dnet_core::hamming::dihedral::in_centered_set;
use dnet_core::hamming::{
    dihedral_endo, gamma, gamma_inverse, hamming_structure, standard_basis, BinaryImage,
    DihedralElement,
};
use dnet_core::learn::{empirical_loss, learn_step_at, LinearModP, LossFunction, TrainingSet};
use dnet_core::net::{f5_example_net, Architecture, NeuralNet};
use dnet_core::rng::stream_rng;

const F5_LIMIT: Duration = Duration::from_secs(1);
const MONOTONE_LIMIT: Duration = Duration::from_secs(120);
const POLY_LIMIT: Duration = Duration::from_secs(60);
const DOMINION_LIMIT: Duration = Duration::from_secs(120);
const DIHEDRAL_LIMIT: Duration = Duration::from_secs(10);
const LINEAR_LIMIT: Duration = Duration::from_secs(1);
const DETERMINISM_LIMIT: Duration = Duration::from_secs(60);

const MONOTONE_RUNS: u64 = 50;
const MONOTONE_STEPS: usize = 200;
const SAMPLED_BUDGET: usize = 10_000;
const DOMINION_RUNS: u64 = 100;
/// Commuting pairs in D4: |D4| times its 5 conjugacy classes.
const D4_COMMUTING_PAIRS: usize = 40;

type Criterion = (&'static str, Duration, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
    /// Failure documented as unattainable; does not fail the suite.
    known: bool,
}

impl Outcome {
    fn pass(detail: String) -> Self {
        Outcome {
            pass: true,
            detail,
            known: false,
        }
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Result<Outcome>) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = f().unwrap_or_else(|e| Outcome {
        pass: false,
        detail: format!("error: {e:#}"),
        known: false,
    });
    let took = start.elapsed();
    if took > limit && out.pass {
        let detail = format!("{}; over the {limit:?} limit", out.detail);
        return (
            Outcome {
                pass: false,
                detail,
                known: false,
            },
            took,
        );
    }
    (out, took)
}

fn config(n: usize, dataset: &Path, layers: Vec<usize>, neighbor: NeighborSpec, seed: u64, steps: usize) -> ExperimentConfig {
    ExperimentConfig {
        task: None,
        n,
        dataset: dataset.to_path_buf(),
        net: NetSpec::Dense { layers },
        neighbor,
        loss: Some(LossName::Hamming),
        trainer: TrainerSection {
            max_iterations: steps,
            patience: 0,
        },
        seed,
    }
}

fn twist(swap_masks: usize, blank_masks: usize, indicators: usize, dominions: usize) -> NeighborSpec {
    NeighborSpec::Twist {
        dihedral: true,
        swap_masks,
        blank_masks,
        indicators,
        dominions,
        dominion_labels: 4,
        sample_bound: 64,
    }
}

fn f5_golden() -> Result<Outcome> {
    let net = f5_example_net();
    let mut checked = 0;
    for x1 in 0..5i64 {
        for x2 in 0..5i64 {
            for x3 in 0..5i64 {
                let t = x1 - x2 + x3;
                let want = [(-x1 * t * t).rem_euclid(5), (t * -x3 - 3).rem_euclid(5)];
                let got = net.evaluate(&[x1 as u64, x2 as u64, x3 as u64])?;
                ensure!(
                    got == want.map(|v| v as u64),
                    "input ({x1},{x2},{x3}): net gives {got:?}, closed form {want:?}"
                );
                checked += 1;
            }
        }
    }
    Ok(Outcome::pass(format!("{checked}/125 inputs match the closed form")))
}

fn monotone() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let mut steps = 0;
    let mut improved = 0;
    for seed in 0..MONOTONE_RUNS {
        let dir = tmp.path().join(format!("run{seed}"));
        gen_dataset(Task::Rot90, 3, 20, seed, None, &dir)?;
        let cfg = config(3, &dir, vec![1, 1, 1], twist(2, 2, 0, 0), seed, MONOTONE_STEPS);
        let exp = Experiment::prepare(&cfg)?;
        let out = exp.run()?;
        ensure!(out.trace.len() == MONOTONE_STEPS, "run {seed} stopped after {} steps", out.trace.len());
        let mut prev = out.initial_loss;
        for (t, s) in out.trace.iter().enumerate() {
            ensure!(s.loss_before == prev, "run {seed} step {}: trace is not chained", t + 1);
            ensure!(
                s.loss_after <= s.loss_before,
                "run {seed} step {}: {} -> {}",
                t + 1,
                s.loss_before,
                s.loss_after
            );
            prev = s.loss_after;
        }
        let recomputed = empirical_loss(&out.net, &exp.data.training_set()?, &exp.loss)?;
        ensure!(recomputed == out.final_loss(), "run {seed}: final net scores {recomputed}, trace says {}", out.final_loss());
        steps += out.trace.len();
        improved += usize::from(out.final_loss() < out.initial_loss);
    }
    Ok(Outcome::pass(format!(
        "{MONOTONE_RUNS} runs, {steps} steps non-increasing; {improved} runs improved"
    )))
}

fn polymorphisms() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let mut verdicts = 0;
    let mut exhaustive_cases = 0;
    for (n, mode) in [(2, Mode::Exhaustive), (5, Mode::Sampled)] {
        for seed in 0..3u64 {
            let dir = tmp.path().join(format!("n{n}s{seed}"));
            gen_dataset(Task::TwistComposite, n, 16, seed, None, &dir)?;
            let cfg = config(n, &dir, vec![1, 2, 1], twist(2, 2, 2, 1), seed, 40);
            let net = Experiment::prepare(&cfg)?.run()?.net;
            ensure!(
                net.activations().any(|(_, op)| op.arity() == 2),
                "n={n} seed {seed}: no binary activation to check"
            );
            for v in verify_net(&net, mode, SAMPLED_BUDGET, seed)? {
                ensure!(v.witness.verdict, "n={n} seed {seed}: {}", v.line());
                if !v.witness.sampled {
                    exhaustive_cases += v.witness.checked;
                }
                verdicts += 1;
            }
        }
    }
    Ok(Outcome::pass(format!(
        "{verdicts} maps from 6 trained nets; n=2 exhaustive ({exhaustive_cases} cases), n=5 sampled {SAMPLED_BUDGET} each"
    )))
}

/// Independent of `is_dominion`: scan every basic cube directly.
fn cubes_use_at_most_two_labels(d: &Dominion) -> bool {
    let side = d.n() * d.n() + 1;
    (0..side - 1).all(|a| {
        (0..side - 1).all(|b| {
            let labels: BTreeSet<u32> = [(0, 0), (0, 1), (1, 0), (1, 1)]
                .iter()
                .map(|&(x, y)| d.label_at(&[a + x, b + y]))
                .collect();
            labels.len() <= 2
        })
    })
}

fn dominion_pipeline() -> Result<Outcome> {
    let mut acyclic = [0; 2];
    let mut cases = [0u64; 2];
    for seed in 0..DOMINION_RUNS {
        let labels = 2 + (seed % 7) as u32;
        for (slot, n) in [(0, 3), (1, 2)] {
            let d = generate_dominion(2, n, labels, seed)?;
            ensure!(d.labeling().labels.len() == (n * n + 1).pow(2), "n={n} seed {seed}: wrong grid size");
            ensure!(is_dominion(d.labeling()).verdict, "n={n} seed {seed}: is_dominion rejects");
            ensure!(cubes_use_at_most_two_labels(&d), "n={n} seed {seed}: a basic cube has 3+ labels");
            let Ok(tree) = embed_in_tree(&minc(&d)) else {
                continue;
            };
            let alpha = tree_walk_homomorphism(&tree, n, seed)?;
            let g = dominion_polymorphism(&d, &alpha)?;
            let w = is_polymorphism(&g, &hamming_structure(n), CheckMode::exhaustive())?;
            ensure!(w.verdict && !w.sampled, "n={n} seed {seed}: g_alpha fails: {:?}", w.counterexample);
            acyclic[slot] += 1;
            cases[slot] += w.checked;
        }
    }
    Ok(Outcome::pass(format!(
        "{DOMINION_RUNS} dominions at n=3 and n=2 valid; exhaustive g_alpha checks: n=3 {} acyclic runs ({} cases each), n=2 {} acyclic runs",
        acyclic[0],
        cases[0] / acyclic[0].max(1) as u64,
        acyclic[1]
    )))
}

/// Pixel permutation of a unary map, read off the standard basis.
fn permutation(op: &FiniteOperation, n: usize) -> Result<Vec<usize>> {
    standard_basis(n)
        .iter()
        .map(|e| {
            let out = op.eval(&[e.bits()]);
            ensure!(out.count_ones() == 1, "not a pixel permutation");
            Ok(out.trailing_zeros() as usize)
        })
        .collect()
}

fn dihedral_law() -> Result<Outcome> {
    let mut literal = BTreeMap::new();
    for n in 2..=5 {
        let perm = |g: DihedralElement| permutation(&dihedral_endo(g, n), n);
        let mut holds = 0;
        for s in DihedralElement::ALL {
            for t in DihedralElement::ALL {
                let composed = compose(&dihedral_endo(s, n), &[dihedral_endo(t, n)])?;
                let lhs = permutation(&composed, n)?;
                ensure!(lhs == perm(t * s)?, "n={n}: h_{s:?} . h_{t:?} != h_({t:?}{s:?})");
                let mut rng = stream_rng(n as u64, 5);
                for _ in 0..32 {
                    let a = BinaryImage::random(n, &mut rng).bits();
                    ensure!(composed.eval(&[a]) == dihedral_endo(t * s, n).eval(&[a]), "n={n}: image mismatch");
                }
                holds += usize::from(lhs == perm(s * t)?);
            }
        }
        ensure!(holds == D4_COMMUTING_PAIRS, "n={n}: literal law holds on {holds} pairs, expected {D4_COMMUTING_PAIRS}");
        literal.insert(n, holds);
    }
    for n in 2..=7 {
        let mut seen = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                let c = gamma(n, (i, j))?;
                ensure!(in_centered_set(n, c), "n={n}: gamma({i},{j}) outside U_n");
                ensure!(gamma_inverse(n, c)? == (i, j), "n={n}: gamma not inverted at ({i},{j})");
                for s in DihedralElement::ALL {
                    ensure!(in_centered_set(n, s.act(c)), "n={n}: {s:?} leaves U_n");
                }
                seen.insert(c);
            }
        }
        ensure!(seen.len() == n * n, "n={n}: gamma not injective");
    }
    Ok(Outcome {
        pass: false,
        known: true,
        detail: format!(
            "literal h_s.h_t = h_(st) holds on {literal:?} of 64 pairs per n (the commuting pairs); \
             h_s.h_t = h_(ts) holds on 64/64 for n=2..5; gamma bijective for n=2..7"
        ),
    })
}

fn linear_reachability() -> Result<Outcome> {
    let p = 5;
    let f5 = Universe::table(p)?;
    let start = vec![1, 3];
    let eta = LinearModP::new(p)?;
    let mut reached = 0;
    for d0 in [p - 1, 0, 1] {
        for d1 in [p - 1, 0, 1] {
            if (d0, d1) == (0, 0) {
                continue;
            }
            let target = FiniteOperation::linear_form(p, vec![(start[0] + d0) % p, (start[1] + d1) % p])?;
            let pairs = (0..p)
                .flat_map(|x| (0..p).map(move |y| (x, y)))
                .map(|(x, y)| (vec![x, y], vec![target.eval(&[x, y])]))
                .collect();
            let data = TrainingSet::new(pairs)?;
            let arch = Architecture::dense(&[2, 1]);
            let acts = BTreeMap::from([("v_2_1".to_string(), FiniteOperation::linear_form(p, start.clone())?)]);
            let net = NeuralNet::new(arch, f5, acts)?;
            let loss = LossFunction::ZeroOne;
            ensure!(empirical_loss(&net, &data, &loss)? > 0.0, "target {:?} equals the start", target.linear_coefficients());
            let (next, report) = learn_step_at(&net, "v_2_1", &eta, &loss, &data, &mut stream_rng(0, 0))?;
            ensure!(report.loss_after == 0.0, "target {:?}: loss {} after one step", target.linear_coefficients(), report.loss_after);
            ensure!(
                next.activation("v_2_1")?.linear_coefficients() == target.linear_coefficients(),
                "wrong coefficients adopted"
            );
            reached += 1;
        }
    }
    Ok(Outcome::pass(format!("{reached}/8 neighboring coefficient vectors over F5 reached in one step")))
}

fn mask_floor() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let n = 4;
    let mask = BinaryImage::from_rows(&["1101", "0111", "1110", "1011"])?;
    ensure!(mask.weight() < (n * n) as u32, "mask has no zero pixel");
    let dir = tmp.path().join("mask");
    gen_dataset(Task::Mask, n, 30, 7, Some(mask), &dir)?;
    let cfg = config(n, &dir, vec![1, 1], twist(3, 3, 0, 0), 7, MONOTONE_STEPS);
    let out = Experiment::prepare(&cfg)?.run()?;
    let (first, last) = (out.initial_loss, out.final_loss());
    let detail = format!("initial {first:.6}, final {last:.6} (floor reported, not asserted)");
    Ok(Outcome {
        pass: last <= first,
        detail,
        known: false,
    })
}

fn determinism() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let data = tmp.path().join("data");
    gen_dataset(Task::TwistComposite, 3, 12, 11, None, &data)?;
    let cfg = config(3, Path::new("data"), vec![1, 2, 1], twist(2, 2, 2, 1), 11, 60);
    let cfg_path = tmp.path().join("experiment.json");
    fs::write(&cfg_path, serde_json::to_string_pretty(&cfg)?)?;
    let runs = ["a", "b"].map(|r| tmp.path().join(r));
    for out in &runs {
        cmd_train(&cfg_path, out, None)?;
    }
    let mut bytes = 0;
    for name in ["initial_net.json", "net.json", "trace.csv"] {
        let read = |dir: &Path| fs::read(dir.join(name)).with_context(|| format!("reading {name}"));
        let (a, b) = (read(&runs[0])?, read(&runs[1])?);
        ensure!(a == b, "{name} differs between runs");
        bytes += a.len();
    }
    Ok(Outcome::pass(format!("net documents and traces identical ({bytes} bytes compared)")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("golden F5 net", F5_LIMIT, f5_golden),
        ("loss monotonicity", MONOTONE_LIMIT, monotone),
        ("polymorphism preservation", POLY_LIMIT, polymorphisms),
        ("dominion pipeline", DOMINION_LIMIT, dominion_pipeline),
        ("dihedral group action", DIHEDRAL_LIMIT, dihedral_law),
        ("linear mod p reachability", LINEAR_LIMIT, linear_reachability),
        ("mask task loss floor", MONOTONE_LIMIT, mask_floor),
        ("determinism", DETERMINISM_LIMIT, determinism),
    ];
    let mut regressions = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let (out, took) = timed(limit, f);
        let status = match (out.pass, out.known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("[{}] {status} {name}: {} [{:.2?}]", i + 1, out.detail, took);
        regressions += usize::from(!out.pass && !out.known);
    }
    if regressions > 0 {
        println!("{regressions} criteria regressed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
