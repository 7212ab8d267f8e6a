//! Set partitions, partition shapes and generalized rising factorials.
//!
//! A [`SetPartition`] is a labelled partition of `{1, ..., n}`; its
//! [`PartitionShape`] is the multiset of block sizes, which is all an
//! exchangeable partition probability function looks at. Set partitions are
//! enumerated through restricted-growth strings, so every partition is
//! produced exactly once and in a canonical order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_set_partitions`]. Bell(13) is about
/// 2.7e7, which is the most an exhaustive normalization check should visit.
pub const MAX_ENUMERATION_N: usize = 13;

/// Block sizes `(n_1, ..., n_k)` of a partition of `n`, stored non-increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PartitionShape {
    parts: Vec<usize>,
}

impl PartitionShape {
    /// Builds a shape from block sizes in any order.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("a shape needs at least one part".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Total number of elements `n`.
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of blocks `k`.
    pub fn k(&self) -> usize {
        self.parts.len()
    }

    /// Shape obtained by adding one element to block `j` (in canonical order).
    pub fn grow_block(&self, j: usize) -> Self {
        let mut parts = self.parts.clone();
        parts[j] += 1;
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    /// Shape obtained by opening a new singleton block.
    pub fn add_singleton(&self) -> Self {
        let mut parts = self.parts.clone();
        parts.push(1);
        Self { parts }
    }

    /// Natural log of the number of set partitions of `[n]` with this shape,
    /// `n! / (prod n_j! prod m_i!)` where `m_i` counts parts equal to `i`.
    pub fn ln_set_partition_count(&self) -> f64 {
        let mut ln = ln_factorial(self.n());
        for &p in &self.parts {
            ln -= ln_factorial(p);
        }
        for run in self.parts.chunk_by(|a, b| a == b) {
            ln -= ln_factorial(run.len());
        }
        ln
    }

    /// Number of set partitions with this shape. Exact for `n <= 30`.
    pub fn set_partition_count(&self) -> f64 {
        let n = self.n();
        if n > 30 {
            return self.ln_set_partition_count().exp();
        }
        let fact = |m: usize| (1..=m as u128).product::<u128>();
        let mut denom: u128 = self.parts.iter().map(|&p| fact(p)).product();
        for run in self.parts.chunk_by(|a, b| a == b) {
            denom *= fact(run.len());
        }
        (fact(n) / denom) as f64
    }
}

impl fmt::Display for PartitionShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.parts {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for PartitionShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidPartition(format!("`{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

impl TryFrom<Vec<usize>> for PartitionShape {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<PartitionShape> for Vec<usize> {
    fn from(shape: PartitionShape) -> Self {
        shape.parts
    }
}

/// A partition of `{1, ..., n}` into disjoint non-empty blocks.
///
/// Blocks are kept in order of their smallest element and each block is
/// sorted, so two equal partitions compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Validates and canonicalizes a list of blocks over `{1, ..., n}`.
    pub fn from_blocks(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; n + 1];
        for &x in blocks.iter().flatten() {
            if x == 0 || x > n {
                return Err(Error::InvalidPartition(format!(
                    "element {x} outside 1..={n}"
                )));
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidPartition(format!("element {x} repeated")));
            }
        }
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    /// Builds the partition whose element `i + 1` carries block label
    /// `labels[i]`. Labels are arbitrary; only equality matters.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut index: Vec<Option<usize>> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, &label) in labels.iter().enumerate() {
            if label >= index.len() {
                index.resize(label + 1, None);
            }
            let b = *index[label].get_or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(i + 1);
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Applies the relabelling `i -> perm[i - 1]` to every element.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        Self::from_blocks(
            self.blocks
                .iter()
                .map(|b| b.iter().map(|&x| perm[x - 1]).collect())
                .collect(),
        )
    }

    pub fn shape(&self) -> PartitionShape {
        shape_of(self)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, x) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// Block sizes of `p`, sorted non-increasing.
pub fn shape_of(p: &SetPartition) -> PartitionShape {
    let mut parts: Vec<usize> = p.blocks.iter().map(Vec::len).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    PartitionShape { parts }
}

/// Iterator over all set partitions of `{1, ..., n}` in restricted-growth
/// order.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    rgs: Vec<usize>,
    // prefix_max[i] = max(rgs[0..=i])
    prefix_max: Vec<usize>,
    done: bool,
}

impl SetPartitions {
    fn new(n: usize) -> Self {
        Self {
            rgs: vec![0; n],
            prefix_max: vec![0; n],
            done: false,
        }
    }

    fn advance(&mut self) {
        let n = self.rgs.len();
        let mut i = n;
        while i > 1 {
            i -= 1;
            if self.rgs[i] <= self.prefix_max[i - 1] {
                self.rgs[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.rgs[i]);
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for SetPartitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let out = SetPartition::from_labels(&self.rgs);
        self.advance();
        Some(out)
    }
}

/// Enumerates every set partition of `{1, ..., n}` exactly once.
pub fn enumerate_set_partitions(n: usize) -> Result<SetPartitions> {
    enumerate_set_partitions_with_ceiling(n, MAX_ENUMERATION_N)
}

/// As [`enumerate_set_partitions`] with an explicit ceiling on `n`.
pub fn enumerate_set_partitions_with_ceiling(n: usize, ceiling: usize) -> Result<SetPartitions> {
    if n == 0 || n > ceiling {
        return Err(Error::EnumerationBounds { n, ceiling });
    }
    Ok(SetPartitions::new(n))
}

/// All shapes (integer partitions) of `n`, in reverse lexicographic order
/// starting from `(n)`.
pub fn partition_shapes(n: usize) -> Vec<PartitionShape> {
    fn rec(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<PartitionShape>) {
        if remaining == 0 {
            out.push(PartitionShape {
                parts: prefix.clone(),
            });
            return;
        }
        for p in (1..=remaining.min(max_part)).rev() {
            prefix.push(p);
            rec(remaining - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Sign and log-magnitude of a real number; `sign == 0` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ONE: Self = Self {
        sign: 1,
        ln_abs: 0.0,
    };
    pub const ZERO: Self = Self {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn value(self) -> f64 {
        f64::from(self.sign) * self.ln_abs.exp()
    }

    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        Self {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }
}

/// Generalized rising factorial `prod_{i=0}^{n-1} (x + i * step)`.
///
/// ```
/// use gibbs_partitions::combinatorics::rising_factorial;
/// assert_eq!(rising_factorial(1.0, 3, 1.0), 6.0);
/// assert_eq!(rising_factorial(0.75, 2, 0.5), 0.9375);
/// ```
pub fn rising_factorial(x: f64, n: usize, step: f64) -> f64 {
    (0..n).map(|i| x + i as f64 * step).product()
}

/// Log-domain [`rising_factorial`]: sign and `ln |value|`.
pub fn ln_rising_factorial(x: f64, n: usize, step: f64) -> SignedLog {
    let mut acc = SignedLog::ONE;
    for i in 0..n {
        let term = x + i as f64 * step;
        if term == 0.0 {
            return SignedLog::ZERO;
        }
        acc.ln_abs += term.abs().ln();
        if term < 0.0 {
            acc.sign = -acc.sign;
        }
    }
    acc
}

pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}
