//! Training-order construction over several corpora.
//!
//! [`concatenate`] lays corpora end to end. [`interleave`] builds rounds that
//! take the next unused pair from every corpus and shuffles each round
//! independently, so every aligned block of `|D|` entries holds one pair per
//! corpus.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::artifact::ArtifactHeader;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixMode {
    Concatenated,
    Interleaved,
}

impl fmt::Display for MixMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MixMode::Concatenated => "concatenated",
            MixMode::Interleaved => "interleaved",
        })
    }
}

impl FromStr for MixMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concatenated" => Ok(MixMode::Concatenated),
            "interleaved" => Ok(MixMode::Interleaved),
            _ => Err(Error::InvalidArgument(format!("unknown mix mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairRef {
    pub corpus: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedDataset {
    pub order: Vec<PairRef>,
    pub seed: u64,
    pub mode: MixMode,
    pub num_corpora: usize,
    /// Interleaved mode only: shorter corpora were recycled instead of
    /// truncating to the shortest.
    pub cycle: bool,
}

impl MixedDataset {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// True when every aligned block of `num_corpora` entries contains each
    /// corpus exactly once. Only meaningful for interleaved orders.
    pub fn satisfies_round_invariant(&self) -> bool {
        let n = self.num_corpora;
        if n == 0 || !self.order.len().is_multiple_of(n) {
            return false;
        }
        self.order.chunks(n).all(|round| {
            let mut seen = vec![false; n];
            round.iter().all(|r| r.corpus < n && !std::mem::replace(&mut seen[r.corpus], true))
        })
    }

    /// Fails if any entry references a pair outside `sizes`.
    pub fn validate(&self, sizes: &[usize]) -> Result<()> {
        if sizes.len() != self.num_corpora {
            return Err(Error::InvalidArgument(format!(
                "mixed order covers {} corpora, registry has {}",
                self.num_corpora,
                sizes.len()
            )));
        }
        for r in &self.order {
            let limit = *sizes.get(r.corpus).ok_or(Error::OutOfRange {
                what: "corpus",
                index: r.corpus,
                limit: sizes.len(),
            })?;
            if r.index >= limit {
                return Err(Error::OutOfRange {
                    what: "pair",
                    index: r.index,
                    limit,
                });
            }
        }
        Ok(())
    }

    /// Order for `epoch` under per-epoch reshuffling. Concatenated orders and
    /// epoch 0 are returned unchanged.
    pub fn for_epoch(&self, sizes: &[usize], epoch: usize) -> Result<MixedDataset> {
        if self.mode == MixMode::Concatenated || epoch == 0 {
            return Ok(self.clone());
        }
        interleave_sizes(sizes, epoch_seed(self.seed, epoch), self.cycle)
            .map(|m| MixedDataset { seed: self.seed, ..m })
    }

    pub fn write(&self, path: &Path, header: ArtifactHeader) -> Result<()> {
        let header = header
            .with("mode", self.mode)
            .with("seed", self.seed)
            .with("corpora", self.num_corpora)
            .with("cycle", self.cycle);
        let mut buf = header.render().into_bytes();
        for r in &self.order {
            let _ = writeln!(buf, "{}\t{}", r.corpus, r.index);
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<(MixedDataset, ArtifactHeader)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let header = ArtifactHeader::parse(&text)
            .ok_or_else(|| Error::format(path, 1, "missing mix header"))?;
        header.expect_kind("mix", 1)?;
        let field = |k: &str| -> Result<&str> {
            header.get(k).ok_or_else(|| Error::format(path, 1, format!("header lacks {k}")))
        };
        let mode: MixMode = field("mode")?.parse()?;
        let seed = field("seed")?
            .parse()
            .map_err(|_| Error::format(path, 1, "bad seed"))?;
        let num_corpora = field("corpora")?
            .parse()
            .map_err(|_| Error::format(path, 1, "bad corpus count"))?;
        let cycle = header.get("cycle") == Some("true");
        let mut order = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let parsed = line.split_once('\t').and_then(|(c, p)| {
                Some(PairRef {
                    corpus: c.parse().ok()?,
                    index: p.parse().ok()?,
                })
            });
            order.push(parsed.ok_or_else(|| Error::format(path, i + 1, "expected corpus<TAB>pair"))?);
        }
        Ok((
            MixedDataset {
                order,
                seed,
                mode,
                num_corpora,
                cycle,
            },
            header,
        ))
    }
}

pub fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    seed.wrapping_add((epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// All pairs of `order[0]`, then all of `order[1]`, and so on.
pub fn concatenate<T>(corpora: &[Vec<T>], order: &[usize]) -> Result<MixedDataset> {
    let sizes: Vec<usize> = corpora.iter().map(Vec::len).collect();
    concatenate_sizes(&sizes, order)
}

pub fn concatenate_sizes(sizes: &[usize], order: &[usize]) -> Result<MixedDataset> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no corpora to concatenate".into()));
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..sizes.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument(format!(
            "corpus order {order:?} is not a permutation of 0..{}",
            sizes.len()
        )));
    }
    let order = order
        .iter()
        .flat_map(|&corpus| (0..sizes[corpus]).map(move |index| PairRef { corpus, index }))
        .collect();
    Ok(MixedDataset {
        order,
        seed: 0,
        mode: MixMode::Concatenated,
        num_corpora: sizes.len(),
        cycle: false,
    })
}

/// Round-by-round interleaving. Without `cycle` the output holds
/// `|D| * min(len)` entries; with `cycle` it holds `|D| * max(len)` and
/// shorter corpora wrap around.
pub fn interleave<T>(corpora: &[Vec<T>], seed: u64, cycle: bool) -> Result<MixedDataset> {
    let sizes: Vec<usize> = corpora.iter().map(Vec::len).collect();
    interleave_sizes(&sizes, seed, cycle)
}

pub fn interleave_sizes(sizes: &[usize], seed: u64, cycle: bool) -> Result<MixedDataset> {
    if sizes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "interleaving needs at least 2 corpora, got {}",
            sizes.len()
        )));
    }
    if let Some(d) = sizes.iter().position(|&n| n == 0) {
        return Err(Error::InvalidArgument(format!("corpus {d} is empty")));
    }
    let rounds = if cycle {
        sizes.iter().copied().max()
    } else {
        sizes.iter().copied().min()
    }
    .unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(rounds * sizes.len());
    for r in 0..rounds {
        let start = order.len();
        order.extend(sizes.iter().enumerate().map(|(corpus, &n)| PairRef {
            corpus,
            index: r % n,
        }));
        order[start..].shuffle(&mut rng);
    }
    Ok(MixedDataset {
        order,
        seed,
        mode: MixMode::Interleaved,
        num_corpora: sizes.len(),
        cycle,
    })
}
