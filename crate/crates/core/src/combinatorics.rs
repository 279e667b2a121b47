//! Set-partition signatures and integer partitions.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

pub const MAX_SET_PARTITION_K: usize = 20;
pub const MAX_INTEGER_PARTITION_L: usize = 32;

/// The shape of a set partition of `{1..k}`: how many blocks of each size,
/// plus the number of set partitions sharing that shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetPartitionSignature {
    pub block_count: usize,
    /// `multiplicities[j - 1]` is the number of blocks of size `j`.
    pub multiplicities: Vec<usize>,
    pub weight: u64,
}

impl SetPartitionSignature {
    /// Iterate over `(block size, count)` pairs with nonzero count.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.multiplicities
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(j, c)| (j + 1, *c))
    }
}

/// A partition of `l` into positive parts, largest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPartition {
    pub parts: Vec<usize>,
    /// part value → number of times it occurs
    pub multiplicities: BTreeMap<usize, usize>,
}

impl IntegerPartition {
    fn from_parts(parts: Vec<usize>) -> Self {
        let mut multiplicities = BTreeMap::new();
        for &p in &parts {
            *multiplicities.entry(p).or_insert(0) += 1;
        }
        IntegerPartition { parts, multiplicities }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }
}

fn partitions_rec(n: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if n == 0 {
        out.push(prefix.clone());
        return;
    }
    for p in (1..=n.min(max_part)).rev() {
        prefix.push(p);
        partitions_rec(n - p, p, prefix, out);
        prefix.pop();
    }
}

fn raw_partitions(l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    partitions_rec(l, l, &mut Vec::new(), &mut out);
    out
}

/// All integer partitions of `l`.
pub fn integer_partitions(l: usize) -> Result<Vec<IntegerPartition>> {
    if l > MAX_INTEGER_PARTITION_L {
        return Err(Error::SizeGuard { requested: l, limit: MAX_INTEGER_PARTITION_L });
    }
    Ok(raw_partitions(l).into_iter().map(IntegerPartition::from_parts).collect())
}

/// Integer partitions of `l` whose parts do not exceed `max_part`.
pub fn integer_partitions_bounded(l: usize, max_part: usize) -> Result<Vec<IntegerPartition>> {
    if l > MAX_INTEGER_PARTITION_L {
        return Err(Error::SizeGuard { requested: l, limit: MAX_INTEGER_PARTITION_L });
    }
    let mut out = Vec::new();
    partitions_rec(l, max_part.min(l), &mut Vec::new(), &mut out);
    Ok(out.into_iter().map(IntegerPartition::from_parts).collect())
}

fn factorial_u128(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Signatures of all set partitions of a `k`-element set.
pub fn set_partition_signatures(k: usize) -> Result<Vec<SetPartitionSignature>> {
    if k > MAX_SET_PARTITION_K {
        return Err(Error::SizeGuard { requested: k, limit: MAX_SET_PARTITION_K });
    }
    let kfact = factorial_u128(k);
    Ok(raw_partitions(k)
        .into_iter()
        .map(|parts| {
            let mut multiplicities = vec![0usize; k];
            for &p in &parts {
                multiplicities[p - 1] += 1;
            }
            let denom: u128 = multiplicities
                .iter()
                .enumerate()
                .map(|(j, &c)| factorial_u128(j + 1).pow(c as u32) * factorial_u128(c))
                .product();
            SetPartitionSignature {
                block_count: parts.len(),
                multiplicities,
                weight: (kfact / denom) as u64,
            }
        })
        .collect())
}

/// Bell number: count of set partitions of a `k`-element set.
pub fn bell(k: usize) -> Result<u64> {
    Ok(set_partition_signatures(k)?.iter().map(|s| s.weight).sum())
}

/// Faà di Bruno: the `k`-th derivative of `exp(g)` divided by `exp(g)`,
/// given `g_derivs[i - 1] = g^{(i)}` for `i = 1..=k`.
pub fn exp_derivative_ratio(k: usize, g_derivs: &[f64]) -> Result<f64> {
    if g_derivs.len() < k {
        return Err(Error::Domain(format!(
            "need {k} derivatives of the exponent, got {}",
            g_derivs.len()
        )));
    }
    Ok(set_partition_signatures(k)?
        .iter()
        .map(|sig| {
            sig.blocks()
                .fold(sig.weight as f64, |acc, (j, c)| acc * g_derivs[j - 1].powi(c as i32))
        })
        .sum())
}
