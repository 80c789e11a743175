//! Finite Laurent series in `z` with truncated-series coefficients.

use std::collections::BTreeMap;
use std::fmt;

use super::series::TruncSeries;

#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentSeriesZ {
    coeffs: BTreeMap<i32, TruncSeries>,
}

impl LaurentSeriesZ {
    pub fn zero() -> Self {
        LaurentSeriesZ { coeffs: BTreeMap::new() }
    }

    /// `c · z^k`.
    pub fn term(k: i32, c: TruncSeries) -> Self {
        let mut out = LaurentSeriesZ::zero();
        out.insert(k, c);
        out
    }

    pub fn insert(&mut self, k: i32, c: TruncSeries) {
        if c.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    pub fn coeff(&self, k: i32) -> Option<&TruncSeries> {
        self.coeffs.get(&k)
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, TruncSeries> {
        &self.coeffs
    }

    /// Support bounds `(zmin, zmax)`, `None` when zero.
    pub fn bounds(&self) -> Option<(i32, i32)> {
        Some((*self.coeffs.keys().next()?, *self.coeffs.keys().next_back()?))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `z^{-1}`; the zero series at `cutoff` when absent.
    pub fn residue(&self, cutoff: u32) -> TruncSeries {
        self.coeffs.get(&-1).cloned().unwrap_or_else(|| TruncSeries::zero(cutoff))
    }

    pub fn add(&self, other: &LaurentSeriesZ) -> LaurentSeriesZ {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            let v = match out.coeffs.get(k) {
                Some(x) => x.add(c),
                None => c.clone(),
            };
            out.insert(*k, v);
        }
        out
    }

    pub fn mul(&self, other: &LaurentSeriesZ) -> LaurentSeriesZ {
        let mut acc: BTreeMap<i32, Vec<TruncSeries>> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                acc.entry(a + b).or_default().push(ca.mul(cb));
            }
        }
        let mut out = LaurentSeriesZ::zero();
        for (k, parts) in acc {
            let cutoff = parts.iter().map(|p| p.cutoff()).min().unwrap();
            out.insert(k, TruncSeries::sum_all(parts.iter(), cutoff));
        }
        out
    }

    /// Keeps exponents within `[lo, hi]`.
    pub fn clip(&self, lo: i32, hi: i32) -> LaurentSeriesZ {
        LaurentSeriesZ { coeffs: self.coeffs.range(lo..=hi).map(|(k, c)| (*k, c.clone())).collect() }
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: i32) -> LaurentSeriesZ {
        LaurentSeriesZ { coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    pub fn map(&self, f: impl Fn(&TruncSeries) -> TruncSeries) -> LaurentSeriesZ {
        let mut out = LaurentSeriesZ::zero();
        for (k, c) in &self.coeffs {
            out.insert(*k, f(c));
        }
        out
    }
}

impl fmt::Debug for LaurentSeriesZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "z^{k}*[{c}]")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Bank, ExactScalar};

    #[test]
    fn residue_extraction() {
        let one = TruncSeries::one(2);
        assert!(LaurentSeriesZ::term(0, one.clone()).residue(2).is_zero());
        let t1 = TruncSeries::var(Bank::T, 1, 2);
        assert_eq!(LaurentSeriesZ::term(-1, t1.clone()).residue(2), t1);
        let mut l = LaurentSeriesZ::term(-2, one.clone());
        l.insert(-1, one.add(&TruncSeries::var(Bank::T, 2, 2)));
        l.insert(1, TruncSeries::constant(ExactScalar::from_int(5), 2));
        assert_eq!(l.residue(2), one.add(&TruncSeries::var(Bank::T, 2, 2)));
    }
}
