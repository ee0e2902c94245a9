//! Partition-resolved entanglement witness for Gaussian comb states, with `L = H`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combstate::{quadratic_expectation, GaussianState, QuadraticForm};
use crate::error::{Error, Result};
use crate::matfun::trace_sqrt_product;
use crate::scalar::{to_f64, Real};

/// Largest mode count accepted by [`enumerate_partitions`].
pub const MAX_PARTITION_MODES: usize = 12;

/// Visibilities with magnitude below this count as zero.
pub const ZERO_VISIBILITY: f64 = 1e-9;

/// Set partition of `{0, .., n-1}`. Blocks are sorted internally and ordered
/// by their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks: Vec<Vec<usize>> = blocks;
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("index {i} outside 0..{n}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidPartition(format!("index {i} in two blocks")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("index {i} not covered")));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { n, blocks })
    }

    /// From a restricted growth string: `rgs[i]` is the block of element `i`.
    pub fn from_rgs(rgs: &[usize]) -> Result<Self> {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, &b) in rgs.iter().enumerate() {
            if b > blocks.len() {
                return Err(Error::InvalidPartition("not a restricted growth string".into()));
            }
            if b == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[b].push(i);
        }
        Ok(Self { n: rgs.len(), blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks `K`.
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn rgs(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = b;
            }
        }
        out
    }

    /// Block notation with element `i` labelled `i + offset`, e.g. `{-2,-1}{0}{1,2}`.
    pub fn block_string(&self, offset: i64) -> String {
        let mut s = String::new();
        for b in &self.blocks {
            s.push('{');
            let labels: Vec<String> = b.iter().map(|&i| (i as i64 + offset).to_string()).collect();
            s.push_str(&labels.join(","));
            s.push('}');
        }
        s
    }

    /// Whether every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let owner = coarser.rgs();
        self.n == coarser.n && self.blocks.iter().all(|b| b.iter().all(|&i| owner[i] == owner[b[0]]))
    }
}

/// Restricted growth strings of length `n` in lexicographic order.
#[derive(Clone, Debug)]
pub struct RgsIter {
    current: Option<Vec<usize>>,
}

impl RgsIter {
    pub fn new(n: usize) -> Self {
        Self { current: if n == 0 { None } else { Some(vec![0; n]) } }
    }
}

impl Iterator for RgsIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let a = self.current.as_mut().unwrap();
        let n = a.len();
        // prefix maxima decide how far each position may grow
        let mut prefix_max = vec![0; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(a[i - 1]);
        }
        let mut i = n;
        loop {
            if i <= 1 {
                self.current = None;
                break;
            }
            i -= 1;
            if a[i] <= prefix_max[i] {
                a[i] += 1;
                for x in a.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Every set partition of `n` modes, in restricted-growth-string order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n > MAX_PARTITION_MODES {
        return Err(Error::TooManyModes(n));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one mode".into()));
    }
    RgsIter::new(n).map(|r| Partition::from_rgs(&r)).collect()
}

/// Bell number `B_n` from the Bell triangle.
pub fn bell_number(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            next.push(next.last().unwrap() + x);
        }
        row = next;
    }
    row[0]
}

/// `<L> = Tr(H Sigma)`.
pub fn witness_expectation<T: Real>(qf: &QuadraticForm<T>, gs: &GaussianState<T>) -> Result<T> {
    quadratic_expectation(qf, &gs.sigma)
}

/// `g_min = sum_j Tr sqrt(H_qq^{I_j} H_pp^{I_j})`.
pub fn separable_bound<T: Real>(qf: &QuadraticForm<T>, part: &Partition) -> Result<T> {
    if part.n() != qf.n_modes() {
        return Err(Error::DimensionMismatch { expected: qf.n_modes(), found: part.n() });
    }
    let mut total = T::zero();
    for b in part.blocks() {
        total += trace_sqrt_product(&qf.hqq.principal_submatrix(b), &qf.hpp.principal_submatrix(b))?;
    }
    Ok(total)
}

/// Witness outcome for one partition.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport<T> {
    pub partition: Partition,
    pub l_expect: T,
    pub g_min: T,
    /// `(g_min - <L>) / (g_min + <L>)`.
    pub visibility: T,
}

impl<T: Real> WitnessReport<T> {
    pub fn is_entangled(&self) -> bool {
        to_f64(self.visibility) > ZERO_VISIBILITY
    }
}

fn report<T: Real>(qf: &QuadraticForm<T>, l: T, part: Partition) -> Result<WitnessReport<T>> {
    let g = separable_bound(qf, &part)?;
    Ok(WitnessReport { partition: part, l_expect: l, g_min: g, visibility: (g - l) / (g + l) })
}

pub fn visibility<T: Real>(qf: &QuadraticForm<T>, gs: &GaussianState<T>, part: &Partition) -> Result<WitnessReport<T>> {
    report(qf, witness_expectation(qf, gs)?, part.clone())
}

/// One report per partition, in canonical order; partitions are evaluated in parallel.
pub fn full_scan<T: Real>(qf: &QuadraticForm<T>, gs: &GaussianState<T>) -> Result<Vec<WitnessReport<T>>> {
    let l = witness_expectation(qf, gs)?;
    enumerate_partitions(qf.n_modes())?
        .into_par_iter()
        .map(|p| report(qf, l, p))
        .collect()
}

/// Header `partition_id,partition_string,K,L_expect,g_min,visibility`; labels run from `offset`.
///
/// The block string contains commas and is therefore double-quoted.
pub fn write_scan_csv<T: Real, W: std::io::Write>(reports: &[WitnessReport<T>], offset: i64, mut w: W) -> std::io::Result<()> {
    writeln!(w, "partition_id,partition_string,K,L_expect,g_min,visibility")?;
    for (id, r) in reports.iter().enumerate() {
        writeln!(
            w,
            "{},\"{}\",{},{},{},{}",
            id,
            r.partition.block_string(offset),
            r.partition.k(),
            r.l_expect,
            r.g_min,
            r.visibility
        )?;
    }
    Ok(())
}
