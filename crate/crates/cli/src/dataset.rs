//! Synthetic image-transformation datasets stored as PBM files plus a TSV manifest.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use dnet_core::algebra::{compose, Elem, FiniteOperation};
use dnet_core::hamming::pbm::{read_pbm, write_pbm};
use dnet_core::hamming::{blank_endo, dihedral_endo, swap_endo, BinaryImage, DihedralElement};
use dnet_core::learn::TrainingSet;
use dnet_core::rng::stream_rng;

const INPUT_STREAM: u64 = 0xDA7A;
const MASK_STREAM: u64 = 0x3A5C;

pub const MANIFEST: &str = "manifest.tsv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Task {
    /// Rotate a quarter turn.
    Rot90,
    /// Reflect in the horizontal axis.
    Reflect,
    /// Keep only the pixels of a fixed mask.
    Mask,
    /// Swap with a fixed image, then rotate.
    TwistComposite,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Rot90 => "rot90",
            Task::Reflect => "reflect",
            Task::Mask => "mask",
            Task::TwistComposite => "twist-composite",
        })
    }
}

impl FromStr for Task {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        <Task as clap::ValueEnum>::from_str(s, false).map_err(|_| {
            anyhow::anyhow!("unknown task {s:?} (expected rot90, reflect, mask or twist-composite)")
        })
    }
}

/// The fixed image used by `mask` and `twist-composite`, drawn from the seed
/// unless given.
pub fn task_image(n: usize, seed: u64, given: Option<BinaryImage>) -> BinaryImage {
    given.unwrap_or_else(|| BinaryImage::random(n, &mut stream_rng(seed, MASK_STREAM)))
}

/// The ground-truth endomorphism behind each task.
pub fn task_operation(task: Task, n: usize, image: BinaryImage) -> Result<FiniteOperation> {
    if image.side() != n {
        bail!("task image is {0}x{0}, dataset is {1}x{1}", image.side(), n);
    }
    Ok(match task {
        Task::Rot90 => dihedral_endo(DihedralElement::R, n),
        Task::Reflect => dihedral_endo(DihedralElement::S, n),
        Task::Mask => blank_endo(image),
        Task::TwistComposite => compose(&dihedral_endo(DihedralElement::R, n), &[swap_endo(image)])?,
    })
}

/// Input and target image tuples, all of side `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub n: usize,
    pub pairs: Vec<(Vec<BinaryImage>, Vec<BinaryImage>)>,
}

impl Dataset {
    pub fn training_set(&self) -> Result<TrainingSet> {
        let bits = |imgs: &[BinaryImage]| imgs.iter().map(BinaryImage::bits).collect::<Vec<Elem>>();
        Ok(TrainingSet::new(
            self.pairs.iter().map(|(x, y)| (bits(x), bits(y))).collect(),
        )?)
    }
}

/// Writes `input_%04d.pbm`, `target_%04d.pbm` and the manifest into `out`.
pub fn gen_dataset(
    task: Task,
    n: usize,
    count: usize,
    seed: u64,
    mask: Option<BinaryImage>,
    out: &Path,
) -> Result<Dataset> {
    BinaryImage::try_zeros(n)?;
    let op = task_operation(task, n, task_image(n, seed, mask))?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut rng = stream_rng(seed, INPUT_STREAM);
    let mut manifest = String::new();
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count {
        let a = BinaryImage::random(n, &mut rng);
        let b = BinaryImage::from_bits(n, op.eval(&[a.bits()]))?;
        let (input, target) = (format!("input_{i:04}.pbm"), format!("target_{i:04}.pbm"));
        write_pbm(&out.join(&input), &a)?;
        write_pbm(&out.join(&target), &b)?;
        manifest.push_str(&format!("{input}\t{target}\n"));
        pairs.push((vec![a], vec![b]));
    }
    let path = out.join(MANIFEST);
    fs::write(&path, manifest).with_context(|| format!("writing {}", path.display()))?;
    Ok(Dataset { n, pairs })
}

/// Reads a manifest; a directory argument means its `manifest.tsv`. Each row is
/// `inputs \t targets`, with several images in a column separated by commas.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let path: PathBuf = if path.is_dir() {
        path.join(MANIFEST)
    } else {
        path.to_path_buf()
    };
    let base = path.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut pairs = Vec::new();
    let mut n = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let ctx = || format!("{}:{}", path.display(), lineno + 1);
        let Some((xs, ys)) = line.split_once('\t') else {
            bail!("{}: expected `inputs<TAB>targets`", ctx());
        };
        let mut read = |col: &str| -> Result<Vec<BinaryImage>> {
            col.split(',')
                .map(|p| {
                    let img = read_pbm(&base.join(p.trim())).with_context(ctx)?;
                    match n {
                        None => n = Some(img.side()),
                        Some(m) if m != img.side() => {
                            bail!("{}: image {p} is {1}x{1}, expected {m}x{m}", ctx(), img.side())
                        }
                        _ => {}
                    }
                    Ok(img)
                })
                .collect()
        };
        let x = read(xs)?;
        let y = read(ys)?;
        pairs.push((x, y));
    }
    let Some(n) = n else {
        bail!("{}: empty dataset", path.display());
    };
    Ok(Dataset { n, pairs })
}
