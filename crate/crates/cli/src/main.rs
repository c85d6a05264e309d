use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use dnet_cli::commands::{
    cmd_eval, cmd_gen_dominion, default_mode, load_net, show_net, verify_dominion, verify_net, Mode,
};
use dnet_cli::dataset::{gen_dataset, Task};
use dnet_cli::exit;
use dnet_cli::experiment::{cmd_train, LossName};
use dnet_core::hamming::BinaryImage;
use dnet_core::Universe;

#[derive(Parser)]
#[command(name = "dnet", version, about = "Discrete neural nets on binary images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a dataset of input/target PBM pairs.
    GenDataset {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mask rows such as `101/010/111`; drawn from the seed when absent.
        #[arg(long)]
        mask: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a net as described by an experiment config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the empirical loss of a net on a dataset.
    Eval {
        #[arg(long)]
        net: PathBuf,
        /// Manifest file or dataset directory.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        loss: Option<LossName>,
    },
    /// Generate a dominion and its minimum constraint graph.
    GenDominion {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        labels: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a net's activations and outputs for polymorphisms of ham_n, or a dominion file.
    Verify {
        #[arg(long, conflicts_with = "dominion", required_unless_present = "dominion")]
        net: Option<PathBuf>,
        #[arg(long)]
        dominion: Option<PathBuf>,
        /// Expected image side; checked against the net.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a net's layers, edges and activations.
    Show {
        #[arg(long)]
        net: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::GenDataset {
            task,
            n,
            count,
            seed,
            mask,
            out,
        } => {
            let mask = mask
                .map(|m| BinaryImage::from_rows(&m.split('/').collect::<Vec<_>>()))
                .transpose()?;
            let d = gen_dataset(task, n, count, seed, mask, &out)?;
            println!("wrote {} pairs for {task} to {}", d.pairs.len(), out.display());
        }
        Command::Train { config, out, seed } => {
            let s = cmd_train(&config, &out, seed)?;
            println!("initial loss: {:.6}", s.initial_loss);
            println!("final loss: {:.6}", s.final_loss);
            println!("steps: {}", s.steps);
            println!("net: {}", s.net.display());
            println!("trace: {}", s.trace.display());
        }
        Command::Eval { net, dataset, loss } => {
            println!("{:.6}", cmd_eval(&net, &dataset, loss)?);
        }
        Command::GenDominion {
            k,
            n,
            labels,
            seed,
            out,
        } => {
            let (d, dp, mp) = cmd_gen_dominion(k, n, labels, seed, &out)?;
            println!("labels used: {:?}", d.image());
            println!("dominion: {}", dp.display());
            println!("minc: {}", mp.display());
        }
        Command::Verify {
            net,
            dominion,
            n,
            mode,
            budget,
            seed,
        } => {
            let verdicts = if let Some(path) = dominion {
                vec![verify_dominion(&path)?]
            } else {
                let net = load_net(&net.expect("clap requires --net or --dominion"))?;
                let side = match net.universe() {
                    Universe::Images { n } => n as usize,
                    u => bail!("net is over {u}, not an image universe"),
                };
                if let Some(n) = n.filter(|&n| n != side) {
                    bail!("--n {n} does not match the net's {side}x{side} images");
                }
                verify_net(&net, mode.unwrap_or(default_mode(side)), budget, seed)?
            };
            for v in &verdicts {
                println!("{}", v.line());
            }
            if verdicts.iter().any(|v| !v.witness.verdict) {
                return Ok(exit::VERIFY_FAILED);
            }
        }
        Command::Show { net } => print!("{}", show_net(&load_net(&net)?)),
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::USAGE
        }
    };
    ExitCode::from(code as u8)
}
