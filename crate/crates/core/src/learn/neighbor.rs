use rand::{Rng, RngCore};

use super::LearnError;
use crate::algebra::{compose, compose_with_arity, project, FiniteOperation, OpKind, Universe};
use crate::hamming::PixelAffine;

/// Candidate neighborhoods for the activation being retrained. A neighborhood
/// is a nonempty list of operations with the arity of `g` that contains `g`
/// (extensionally).
pub trait NeighborFunction: Send + Sync {
    /// Name of the clone the neighborhoods live in.
    fn clone_tag(&self) -> &str;

    fn neighbors(
        &self,
        g: &FiniteOperation,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<FiniteOperation>, LearnError>;
}

/// `eta(g) = {g}`.
#[derive(Clone, Debug, Default)]
pub struct Singleton;

impl NeighborFunction for Singleton {
    fn clone_tag(&self) -> &str {
        "any"
    }

    fn neighbors(&self, g: &FiniteOperation, _: &mut dyn RngCore) -> Result<Vec<FiniteOperation>, LearnError> {
        Ok(vec![g.clone()])
    }
}

/// Every operation of the same arity, as value tables.
#[derive(Clone, Debug)]
pub struct FullOpSpace {
    pub ceiling: u64,
}

impl Default for FullOpSpace {
    fn default() -> Self {
        FullOpSpace { ceiling: 100_000 }
    }
}

impl FullOpSpace {
    /// `|A|^(|A|^n)`, saturating.
    pub fn size(universe: Universe, arity: usize) -> u128 {
        let m = universe.cardinality();
        let rows = m.checked_pow(arity as u32).unwrap_or(u128::MAX);
        u32::try_from(rows)
            .ok()
            .and_then(|r| m.checked_pow(r))
            .unwrap_or(u128::MAX)
    }
}

impl NeighborFunction for FullOpSpace {
    fn clone_tag(&self) -> &str {
        "all operations"
    }

    fn neighbors(&self, g: &FiniteOperation, _: &mut dyn RngCore) -> Result<Vec<FiniteOperation>, LearnError> {
        let (u, n) = (g.universe(), g.arity());
        let size = FullOpSpace::size(u, n);
        if size > u128::from(self.ceiling) {
            return Err(LearnError::TooLarge {
                estimate: size,
                ceiling: self.ceiling,
            });
        }
        let m = u.cardinality() as u64;
        let rows = m.pow(n as u32) as usize;
        (0..size as u64)
            .map(|idx| {
                let mut rest = idx;
                let mut values = vec![0; rows];
                for v in values.iter_mut().rev() {
                    *v = rest % m;
                    rest /= m;
                }
                FiniteOperation::from_table(n, u, values).map_err(LearnError::from)
            })
            .collect()
    }
}

/// Linear forms over `F_p`: each coefficient moves by `-1`, `0` or `+1`.
#[derive(Clone, Debug)]
pub struct LinearModP {
    p: u64,
}

impl LinearModP {
    pub fn new(p: u64) -> Result<Self, LearnError> {
        let prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d));
        if !prime {
            return Err(LearnError::Parameter(format!("{p} is not prime")));
        }
        Ok(LinearModP { p })
    }
}

impl NeighborFunction for LinearModP {
    fn clone_tag(&self) -> &str {
        "linear forms"
    }

    /// Offsets are enumerated with the first coordinate most significant,
    /// each in the order `0, -1, +1`; repeated forms (only at `p = 2`) are dropped.
    fn neighbors(&self, g: &FiniteOperation, _: &mut dyn RngCore) -> Result<Vec<FiniteOperation>, LearnError> {
        let p = self.p;
        let coeffs = match (g.linear_coefficients(), g.universe()) {
            (Some(c), Universe::Table { size }) if size == p => c.to_vec(),
            _ => {
                return Err(LearnError::Contract(format!(
                    "expected a linear form over F_{p}, got {} on {}",
                    g.family(),
                    g.universe()
                )))
            }
        };
        let n = coeffs.len();
        let steps = [0, p - 1, 1];
        let mut seen: Vec<Vec<u64>> = Vec::new();
        let mut out = Vec::new();
        for idx in 0..3usize.pow(n as u32) {
            let mut rest = idx;
            let mut shifted = vec![0; n];
            for i in (0..n).rev() {
                shifted[i] = (coeffs[i] + steps[rest % 3]) % p;
                rest /= 3;
            }
            if !seen.contains(&shifted) {
                seen.push(shifted.clone());
                out.push(FiniteOperation::linear_form(p, shifted)?);
            }
        }
        Ok(out)
    }
}

/// Default number of twist tuples tried per step.
pub const DEFAULT_SAMPLE_BOUND: usize = 64;

/// `eta(g) = { h_out . g[h_1, .., h_n] : h_i in H } + { f in G : arity f = arity g }`.
///
/// When `|H|^(n+1)` exceeds the sample bound, a uniform sample of tuples is
/// drawn, always led by the all-identity tuple.
#[derive(Clone, Debug)]
pub struct Twist {
    h: Vec<FiniteOperation>,
    identity: usize,
    extra: Vec<FiniteOperation>,
    sample_bound: usize,
}

impl Twist {
    pub fn new(h: Vec<FiniteOperation>, extra: Vec<FiniteOperation>) -> Result<Self, LearnError> {
        if let Some(bad) = h.iter().find(|op| op.arity() != 1) {
            return Err(LearnError::Parameter(format!(
                "twisting set member {} has arity {}",
                bad.family(),
                bad.arity()
            )));
        }
        let identity = h.iter().position(FiniteOperation::is_identity).ok_or_else(|| {
            LearnError::Parameter("twisting set must contain the identity".into())
        })?;
        Ok(Twist {
            h,
            identity,
            extra,
            sample_bound: DEFAULT_SAMPLE_BOUND,
        })
    }

    pub fn with_sample_bound(mut self, bound: usize) -> Self {
        self.sample_bound = bound.max(1);
        self
    }

    pub fn h(&self) -> &[FiniteOperation] {
        &self.h
    }

    pub fn extra(&self) -> &[FiniteOperation] {
        &self.extra
    }

    fn tuples(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Vec<usize>> {
        let k = self.h.len();
        let total = (k as u128).checked_pow(n as u32 + 1).unwrap_or(u128::MAX);
        if total <= self.sample_bound as u128 {
            return (0..total as usize)
                .map(|idx| {
                    let mut rest = idx;
                    let mut t = vec![0; n + 1];
                    for slot in t.iter_mut().rev() {
                        *slot = rest % k;
                        rest /= k;
                    }
                    t
                })
                .collect();
        }
        let mut out = vec![vec![self.identity; n + 1]];
        while out.len() < self.sample_bound {
            out.push((0..=n).map(|_| rng.gen_range(0..k)).collect());
        }
        out
    }

    /// `outer . g[inner_1, .., inner_n]`.
    fn twist(
        &self,
        g: &FiniteOperation,
        inner: &[usize],
        outer: usize,
    ) -> Result<FiniteOperation, LearnError> {
        if inner.iter().all(|&i| i == self.identity) && outer == self.identity {
            return Ok(g.clone());
        }
        let hs: Vec<&FiniteOperation> = inner.iter().map(|&i| &self.h[i]).collect();
        let ho = &self.h[outer];
        let affine: Option<Vec<PixelAffine>> = hs
            .iter()
            .chain(std::iter::once(&ho))
            .map(|h| PixelAffine::of(h))
            .collect();
        match affine {
            Some(a) => {
                let (a_out, a_in) = a.split_last().expect("outer stage present");
                Ok(affine_twist(g, a_in, a_out)?)
            }
            None => Ok(plain_twist(g, &hs, ho)?),
        }
    }
}

fn plain_twist(
    g: &FiniteOperation,
    hs: &[&FiniteOperation],
    ho: &FiniteOperation,
) -> Result<FiniteOperation, LearnError> {
    let n = g.arity();
    let u = g.universe();
    let inner = hs
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let p = project(n, i + 1, u)?;
            if h.is_identity() {
                Ok(p)
            } else {
                compose(h, &[p])
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let core = if hs.iter().all(|h| h.is_identity()) {
        g.clone()
    } else {
        compose_with_arity(g, &inner, n)?
    };
    Ok(if ho.is_identity() {
        core
    } else {
        compose(ho, &[core])?
    })
}

/// Rewrites `g` as `out . base[u_1, .., u_n]` with pixel-affine `out`, `u_i`
/// and folds the new twist into those stages, so repeated twisting does not
/// deepen the composition tree.
fn affine_twist(
    g: &FiniteOperation,
    hs: &[PixelAffine],
    ho: &PixelAffine,
) -> Result<FiniteOperation, LearnError> {
    let n = g.arity();
    let u = g.universe();
    if let Some(whole) = PixelAffine::of(g) {
        return Ok(hs[0].then(&whole).then(ho).to_operation());
    }
    let side = ho.n;
    let (out, rest) = match g.kind() {
        OpKind::Compose { outer, inner } if inner.len() == 1 => match PixelAffine::of(outer) {
            Some(a) => (a, &inner[0]),
            None => (PixelAffine::identity(side), g),
        },
        _ => (PixelAffine::identity(side), g),
    };
    let (base, stages) = split_stages(rest, side);
    let stages: Vec<PixelAffine> = stages.iter().zip(hs).map(|(s, h)| h.then(s)).collect();
    let out = out.then(ho);
    let core = if stages.iter().all(PixelAffine::is_identity) {
        base.clone()
    } else {
        let inner = stages
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let p = project(n, i + 1, u)?;
                if s.is_identity() {
                    Ok(p)
                } else {
                    compose(&s.to_operation(), &[p])
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        compose_with_arity(base, &inner, n)?
    };
    Ok(if out.is_identity() {
        core
    } else {
        compose(&out.to_operation(), &[core])?
    })
}

/// `f = base[u_1 . pr_1, .., u_n . pr_n]` when `f` has that shape, else `(f, id..)`.
fn split_stages(f: &FiniteOperation, side: usize) -> (&FiniteOperation, Vec<PixelAffine>) {
    let id = PixelAffine::identity(side);
    let n = f.arity();
    if let OpKind::Compose { outer, inner } = f.kind() {
        let stage = |i: usize, op: &FiniteOperation| match op.kind() {
            OpKind::Projection { k } if *k == i + 1 => Some(id),
            OpKind::Compose { outer, inner } if inner.len() == 1 => match inner[0].kind() {
                OpKind::Projection { k } if *k == i + 1 => PixelAffine::of(outer),
                _ => None,
            },
            _ => None,
        };
        let stages: Option<Vec<PixelAffine>> =
            inner.iter().enumerate().map(|(i, op)| stage(i, op)).collect();
        if let Some(stages) = stages {
            return (outer, stages);
        }
    }
    (f, vec![id; n])
}

impl NeighborFunction for Twist {
    fn clone_tag(&self) -> &str {
        "twisted"
    }

    fn neighbors(&self, g: &FiniteOperation, rng: &mut dyn RngCore) -> Result<Vec<FiniteOperation>, LearnError> {
        if self.h.iter().any(|h| h.universe() != g.universe()) {
            return Err(LearnError::Contract(format!(
                "twisting set does not act on {}",
                g.universe()
            )));
        }
        let n = g.arity();
        let mut out: Vec<FiniteOperation> = Vec::new();
        for t in self.tuples(n, rng) {
            let cand = self.twist(g, &t[..n], t[n])?;
            if !out.contains(&cand) {
                out.push(cand);
            }
        }
        for f in &self.extra {
            if f.arity() == n && f.universe() == g.universe() && !out.contains(f) {
                out.push(f.clone());
            }
        }
        Ok(out)
    }
}
