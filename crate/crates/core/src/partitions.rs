//! Integer partitions, Young-diagram statistics and plane partitions.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Weakly decreasing list of positive parts. The empty list is the empty partition.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Builds a partition, dropping trailing zeros. Fails if the parts increase.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("parts {parts:?} are not weakly decreasing")));
        }
        Ok(Partition(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Part `i` (0-based), zero past the end.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.part(0);
        let cols = (1..=first).map(|j| self.0.iter().take_while(|&&p| p >= j).count() as u32).collect();
        Partition(cols)
    }

    /// `Σ λ_i (λ_i − 2i + 1)`, equivalently twice the content sum.
    pub fn kappa(&self) -> i64 {
        self.0.iter().enumerate().map(|(i, &p)| p as i64 * (p as i64 - 2 * (i as i64 + 1) + 1)).sum()
    }

    /// Cells `(i, j)`, 1-based, in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &p)| (1..=p).map(move |j| (i as u32 + 1, j)))
    }

    pub fn hook(&self, i: u32, j: u32) -> u32 {
        let arm = self.part(i as usize - 1) - j;
        let leg = self.0.iter().skip(i as usize).take_while(|&&p| p >= j).count() as u32;
        arm + leg + 1
    }

    pub fn hooks(&self) -> Vec<u32> {
        self.cells().map(|(i, j)| self.hook(i, j)).collect()
    }

    pub fn contents(&self) -> Vec<i64> {
        self.cells().map(|(i, j)| j as i64 - i as i64).collect()
    }

    /// Number of standard tableaux via the hook-length formula.
    pub fn dim(&self) -> BigInt {
        let n = self.weight();
        let fact: BigInt = (1..=n).map(BigInt::from).product();
        let hooks: BigInt = self.hooks().into_iter().map(BigInt::from).product();
        fact / hooks
    }

    /// `λ_i − i + 1 + s` for `i = 1..=depth.max(len)`.
    pub fn levels(&self, s: i64, depth: usize) -> Vec<i64> {
        (0..depth.max(self.len())).map(|i| self.part(i) as i64 - i as i64 + s).collect()
    }

    /// True when every `μ_i ≤ λ_i`.
    pub fn contains(&self, mu: &Partition) -> bool {
        mu.len() <= self.len() && mu.0.iter().zip(&self.0).all(|(m, l)| m <= l)
    }

    /// Removable corners as the partitions obtained by deleting them.
    pub fn remove_corners(&self) -> Vec<Partition> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            if self.part(i) > self.part(i + 1) {
                let mut p = self.0.clone();
                p[i] -= 1;
                out.push(Partition::new(p).expect("still a partition"));
            }
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if inner.is_empty() || inner == "∅" {
            return Ok(Partition::empty());
        }
        let parts = inner
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad partition part '{p}'"))))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// All partitions of `n`, in descending lexicographic order.
pub fn enumerate_partitions(n: u32) -> Vec<Partition> {
    fn rec(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// All partitions with weight at most `w`, grouped by weight.
pub fn partitions_up_to(w: u32) -> Vec<Partition> {
    (0..=w).flat_map(enumerate_partitions).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionStats {
    pub weight: u32,
    pub kappa: i64,
    pub hooks: Vec<u32>,
    #[serde(serialize_with = "serialize_bigint")]
    pub dim: BigInt,
    pub contents: Vec<i64>,
    pub levels: Vec<i64>,
}

fn serialize_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn partition_stats(lambda: &Partition, s: i64, depth: usize) -> PartitionStats {
    PartitionStats {
        weight: lambda.weight(),
        kappa: lambda.kappa(),
        hooks: lambda.hooks(),
        dim: lambda.dim(),
        contents: lambda.contents(),
        levels: lambda.levels(s, depth),
    }
}

/// Number of standard Young tableaux by removing corners recursively.
pub fn count_standard_tableaux(lambda: &Partition) -> BigInt {
    fn rec(p: &Partition, memo: &mut HashMap<Partition, BigInt>) -> BigInt {
        if p.is_empty() {
            return BigInt::one();
        }
        if let Some(v) = memo.get(p) {
            return v.clone();
        }
        let v: BigInt = p.remove_corners().iter().map(|c| rec(c, memo)).sum();
        memo.insert(p.clone(), v.clone());
        v
    }
    rec(lambda, &mut HashMap::new())
}

pub const PLANE_PARTITION_LIMIT: u32 = 12;

/// Weakly decreasing 2D array of nonnegative integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanePartition {
    rows: Vec<Vec<u32>>,
}

impl PlanePartition {
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let right = row.get(j + 1).copied().unwrap_or(0);
                let below = rows.get(i + 1).and_then(|r| r.get(j)).copied().unwrap_or(0);
                if v < right || v < below {
                    return Err(Error::InvalidArgument("plane partition must decrease along rows and columns".into()));
                }
            }
        }
        Ok(PlanePartition { rows })
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn weight(&self) -> u32 {
        self.rows.iter().flatten().sum()
    }
}

/// Counts `c_0..=c_N` of plane partitions by exhaustive search inside an `N×N` grid.
pub fn enumerate_plane_partitions(n: u32) -> Result<Vec<u64>> {
    if n > PLANE_PARTITION_LIMIT {
        return Err(Error::InvalidArgument(format!("plane partition enumeration is limited to N <= {PLANE_PARTITION_LIMIT}, got {n}")));
    }
    let size = n.max(1) as usize;
    let mut grid = vec![vec![0u32; size]; size];
    let mut counts = vec![0u64; n as usize + 1];
    fn fill(cell: usize, size: usize, used: u32, n: u32, grid: &mut [Vec<u32>], counts: &mut [u64]) {
        if cell == size * size {
            counts[used as usize] += 1;
            return;
        }
        let (i, j) = (cell / size, cell % size);
        let up = if i > 0 { grid[i - 1][j] } else { n };
        let left = if j > 0 { grid[i][j - 1] } else { n };
        for v in 0..=up.min(left).min(n - used) {
            grid[i][j] = v;
            fill(cell + 1, size, used + v, n, grid, counts);
        }
        grid[i][j] = 0;
    }
    fill(0, size, 0, n, &mut grid, &mut counts);
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_order() {
        assert_eq!(enumerate_partitions(0), vec![Partition::empty()]);
        assert_eq!(enumerate_partitions(1), vec![p(&[1])]);
        let four = enumerate_partitions(4);
        assert_eq!(four, vec![p(&[4]), p(&[3, 1]), p(&[2, 2]), p(&[2, 1, 1]), p(&[1, 1, 1, 1])]);
        let counts: Vec<usize> = (0..=10).map(|n| enumerate_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
    }

    #[test]
    fn conjugation() {
        assert_eq!(Partition::empty().conjugate(), Partition::empty());
        assert_eq!(p(&[3, 1]).conjugate(), p(&[2, 1, 1]));
        for n in 0..=8 {
            for l in enumerate_partitions(n) {
                assert_eq!(l.conjugate().conjugate(), l);
                assert_eq!(l.conjugate().kappa(), -l.kappa());
            }
        }
    }

    #[test]
    fn stats_examples() {
        let st = partition_stats(&p(&[2, 1]), 0, 0);
        assert_eq!(st.kappa, 0);
        let mut h = st.hooks.clone();
        h.sort();
        assert_eq!(h, vec![1, 1, 3]);
        assert_eq!(st.dim, BigInt::from(2));
        let st = partition_stats(&p(&[2]), 0, 0);
        assert_eq!(st.kappa, 2);
        assert_eq!(st.hooks, vec![2, 1]);
        assert_eq!(st.dim, BigInt::one());
        let st = partition_stats(&Partition::empty(), 0, 0);
        assert_eq!((st.weight, st.kappa, st.dim.clone()), (0, 0, BigInt::one()));
        assert_eq!(partition_stats(&p(&[2, 1]), 1, 4).levels, vec![3, 1, -1, -2]);
    }

    #[test]
    fn kappa_is_twice_content_sum() {
        for l in partitions_up_to(7) {
            assert_eq!(l.kappa(), 2 * l.contents().iter().sum::<i64>());
        }
    }

    #[test]
    fn dim_matches_tableaux_and_sums_to_factorial() {
        for n in 0..=6u32 {
            let mut total = BigInt::from(0);
            for l in enumerate_partitions(n) {
                assert_eq!(l.dim(), count_standard_tableaux(&l));
                total += l.dim() * l.dim();
            }
            let fact: BigInt = (1..=n).map(BigInt::from).product();
            assert_eq!(total, fact);
        }
    }

    #[test]
    fn plane_partition_counts() {
        assert_eq!(enumerate_plane_partitions(0).unwrap(), vec![1]);
        assert_eq!(enumerate_plane_partitions(5).unwrap(), vec![1, 1, 3, 6, 13, 24]);
        assert!(enumerate_plane_partitions(13).is_err());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("(3,1,1)".parse::<Partition>().unwrap(), p(&[3, 1, 1]));
        assert_eq!("()".parse::<Partition>().unwrap(), Partition::empty());
        assert_eq!(p(&[3, 1, 1]).to_string(), "(3,1,1)");
        assert!("(1,2)".parse::<Partition>().is_err());
    }
}
