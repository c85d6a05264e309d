//! Experiment files: which net to start from, which clone to search, and how long.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use dnet_core::algebra::{project, FiniteOperation, Universe};
use dnet_core::dominion::{
    dominion_polymorphism, embed_in_tree, generate_dominion, minc, tree_walk_homomorphism,
};
use dnet_core::hamming::{build_h, random_multilinear_indicator, BinaryImage, HSpec};
use dnet_core::learn::{
    empirical_loss, train, write_trace, FullOpSpace, LinearModP, LossFunction, NeighborFunction,
    Singleton, TrainOutcome, TrainerConfig, Twist, DEFAULT_SAMPLE_BOUND,
};
use dnet_core::net::{Architecture, NeuralNet};
use dnet_core::rng::{derive_seed, stream_rng};

use crate::dataset::{load_dataset, Dataset};

const H_STREAM: u64 = 1;
const G_STREAM: u64 = 2;
const INIT_STREAM: u64 = 3;
const TRAIN_STREAM: u64 = 4;
const DOMINION_ATTEMPTS: u64 = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Free-form label, echoed in reports.
    #[serde(default)]
    pub task: Option<String>,
    pub n: usize,
    /// Manifest file or dataset directory.
    pub dataset: PathBuf,
    pub net: NetSpec,
    pub neighbor: NeighborSpec,
    #[serde(default)]
    pub loss: Option<LossName>,
    #[serde(default)]
    pub trainer: TrainerSection,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetSpec {
    /// A saved net document.
    File { path: PathBuf },
    /// Dense layers of the given widths, activations drawn from the clone.
    Dense { layers: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LossName {
    ZeroOne,
    Hamming,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NeighborSpec {
    Singleton,
    Full {
        #[serde(default)]
        ceiling: Option<u64>,
    },
    Linear {
        p: u64,
    },
    Twist {
        #[serde(default = "yes")]
        dihedral: bool,
        #[serde(default)]
        swap_masks: usize,
        #[serde(default)]
        blank_masks: usize,
        /// Random multi-linear indicators per arity in use.
        #[serde(default)]
        indicators: usize,
        /// Dominion polymorphisms per arity in use (arities 1 to 3).
        #[serde(default)]
        dominions: usize,
        #[serde(default = "four")]
        dominion_labels: u32,
        #[serde(default = "default_bound")]
        sample_bound: usize,
    },
}

fn yes() -> bool {
    true
}

fn four() -> u32 {
    4
}

fn default_bound() -> usize {
    DEFAULT_SAMPLE_BOUND
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerSection {
    pub max_iterations: usize,
    pub patience: usize,
}

impl Default for TrainerSection {
    fn default() -> Self {
        let d = TrainerConfig::default();
        TrainerSection {
            max_iterations: d.max_iterations,
            patience: d.patience,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.dataset = base.join(&cfg.dataset);
        if let NetSpec::File { path } = &mut cfg.net {
            *path = base.join(&*path);
        }
        Ok(cfg)
    }
}

/// Everything a training run needs, built and checked before the first step.
pub struct Experiment {
    pub net: NeuralNet,
    pub eta: Box<dyn NeighborFunction>,
    pub loss: LossFunction,
    pub data: Dataset,
    pub trainer: TrainerConfig,
}

pub fn loss_for(name: Option<LossName>, universe: Universe) -> LossFunction {
    match (name, universe) {
        (Some(LossName::ZeroOne), _) => LossFunction::ZeroOne,
        (_, Universe::Images { n }) => LossFunction::Hamming { n: n as usize },
        _ => LossFunction::ZeroOne,
    }
}

/// The generating set `G`, grouped by arity.
fn generators(
    spec: &NeighborSpec,
    n: usize,
    arities: &[usize],
    seed: u64,
) -> Result<BTreeMap<usize, Vec<FiniteOperation>>> {
    let mut out: BTreeMap<usize, Vec<FiniteOperation>> = BTreeMap::new();
    let NeighborSpec::Twist {
        indicators,
        dominions,
        dominion_labels,
        ..
    } = *spec
    else {
        return Ok(out);
    };
    for &k in arities.iter().filter(|&&k| k >= 1) {
        let mut rng = stream_rng(derive_seed(seed, G_STREAM, k as u64), 0);
        let ops = out.entry(k).or_default();
        for _ in 0..indicators {
            ops.push(random_multilinear_indicator(n, k, &mut rng));
        }
        if k > 3 {
            continue;
        }
        let mut attempt = 0;
        for _ in 0..dominions {
            // large random dominions rarely have a forest as minc; fewer labels
            // make it likelier, and two labels always give one
            let mut labels = dominion_labels;
            let mut tries = 0;
            loop {
                if tries == DOMINION_ATTEMPTS {
                    if labels <= 2 {
                        bail!("no dominion with a tree-like constraint graph found for arity {k}");
                    }
                    labels -= 1;
                    tries = 0;
                }
                let s = derive_seed(seed, G_STREAM, 1000 * k as u64 + attempt);
                attempt += 1;
                tries += 1;
                let d = generate_dominion(k, n, labels, s)?;
                let Ok(tree) = embed_in_tree(&minc(&d)) else {
                    continue;
                };
                let alpha = tree_walk_homomorphism(&tree, n, s)?;
                ops.push(dominion_polymorphism(&d, &alpha)?);
                break;
            }
        }
    }
    Ok(out)
}

/// The twisting set `H`; empty for other clones.
fn h_set(spec: &NeighborSpec, n: usize, seed: u64) -> Vec<FiniteOperation> {
    match *spec {
        NeighborSpec::Twist {
            dihedral,
            swap_masks,
            blank_masks,
            ..
        } => build_h(
            n,
            &HSpec {
                dihedral,
                swap_masks,
                blank_masks,
                seed: derive_seed(seed, H_STREAM, 0),
            },
        ),
        _ => Vec::new(),
    }
}

fn build_eta(
    spec: &NeighborSpec,
    h: Vec<FiniteOperation>,
    generators: &BTreeMap<usize, Vec<FiniteOperation>>,
) -> Result<Box<dyn NeighborFunction>> {
    Ok(match *spec {
        NeighborSpec::Singleton => Box::new(Singleton),
        NeighborSpec::Full { ceiling } => Box::new(FullOpSpace {
            ceiling: ceiling.unwrap_or(FullOpSpace::default().ceiling),
        }),
        NeighborSpec::Linear { p } => Box::new(LinearModP::new(p)?),
        NeighborSpec::Twist { sample_bound, .. } => {
            let g = generators.values().flatten().cloned().collect();
            Box::new(Twist::new(h, g)?.with_sample_bound(sample_bound))
        }
    })
}

/// Initial activations for a dense net: twist clones draw from `H` and `G`,
/// other clones start from first projections; nullary vertices get a random
/// constant image.
fn initial_net(
    layers: &[usize],
    n: usize,
    seed: u64,
    h: &[FiniteOperation],
    generators: &BTreeMap<usize, Vec<FiniteOperation>>,
) -> Result<NeuralNet> {
    let arch = Architecture::dense(layers);
    let u = Universe::images(n)?;
    let mut rng = stream_rng(seed, INIT_STREAM);
    let mut acts = BTreeMap::new();
    for (i, pair) in layers.windows(2).enumerate() {
        let k = pair[0];
        for j in 1..=pair[1] {
            let mut pool: Vec<&FiniteOperation> = generators.get(&k).into_iter().flatten().collect();
            if k == 1 {
                pool.extend(h);
            }
            let op = match pool.choose(&mut rng) {
                Some(op) => (*op).clone(),
                None if k == 0 => {
                    FiniteOperation::constant(u, 0, BinaryImage::random(n, &mut rng).bits())?
                }
                None => project(k, 1, u)?,
            };
            acts.insert(dnet_core::net::vertex_id(i + 2, j), op);
        }
    }
    Ok(NeuralNet::new(arch, u, acts)?)
}

impl Experiment {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let data = load_dataset(&cfg.dataset)?;
        if data.n != cfg.n {
            bail!("dataset images are {0}x{0}, config says n = {1}", data.n, cfg.n);
        }
        let (net, arities) = match &cfg.net {
            NetSpec::File { path } => {
                let text =
                    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let net = NeuralNet::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
                let arities = net.activations().map(|(_, op)| op.arity()).collect::<Vec<_>>();
                (Some(net), arities)
            }
            NetSpec::Dense { layers } => (None, layers[..layers.len().saturating_sub(1)].to_vec()),
        };
        let mut arities = arities;
        arities.sort_unstable();
        arities.dedup();
        let gens = generators(&cfg.neighbor, cfg.n, &arities, cfg.seed)?;
        let h = h_set(&cfg.neighbor, cfg.n, cfg.seed);
        let net = match (net, &cfg.net) {
            (Some(net), _) => net,
            (None, NetSpec::Dense { layers }) => initial_net(layers, cfg.n, cfg.seed, &h, &gens)?,
            (None, NetSpec::File { .. }) => unreachable!("file nets are loaded above"),
        };
        let eta = build_eta(&cfg.neighbor, h, &gens)?;
        let loss = loss_for(cfg.loss, net.universe());
        let training = data.training_set()?;
        empirical_loss(&net, &training, &loss).context("net does not fit the dataset")?;
        if let NeighborSpec::Linear { .. } = cfg.neighbor {
            let mut rng = stream_rng(0, 0);
            for (v, op) in net.activations() {
                eta.neighbors(op, &mut rng).with_context(|| format!("activation at {v}"))?;
            }
        }
        Ok(Experiment {
            net,
            eta,
            loss,
            data,
            trainer: TrainerConfig {
                max_iterations: cfg.trainer.max_iterations,
                patience: cfg.trainer.patience,
                seed: derive_seed(cfg.seed, TRAIN_STREAM, 0),
            },
        })
    }

    pub fn run(&self) -> Result<TrainOutcome> {
        Ok(train(
            &self.net,
            self.eta.as_ref(),
            &self.loss,
            &self.data.training_set()?,
            &self.trainer,
        )?)
    }
}

pub struct TrainSummary {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub steps: usize,
    pub initial_net: PathBuf,
    pub net: PathBuf,
    pub trace: PathBuf,
}

/// Runs an experiment and writes `initial_net.json`, `net.json` and `trace.csv` into `out`.
pub fn cmd_train(config: &Path, out: &Path, seed: Option<u64>) -> Result<TrainSummary> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let exp = Experiment::prepare(&cfg)?;
    let outcome = exp.run()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let summary = TrainSummary {
        initial_loss: outcome.initial_loss,
        final_loss: outcome.final_loss(),
        steps: outcome.trace.len(),
        initial_net: out.join("initial_net.json"),
        net: out.join("net.json"),
        trace: out.join("trace.csv"),
    };
    fs::write(&summary.initial_net, exp.net.to_json())?;
    fs::write(&summary.net, outcome.net.to_json())?;
    let mut csv = Vec::new();
    write_trace(&mut csv, &outcome.trace)?;
    fs::write(&summary.trace, csv)?;
    Ok(summary)
}
