//! Polynomials in the time variables truncated by weighted degree.
//!
//! Four variable banks are available: `t`, `t̄` and their primed copies. The
//! variable with index `k` carries weight `k`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use super::scalar::ExactScalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bank {
    T = 0,
    TBar = 1,
    TPrime = 2,
    TBarPrime = 3,
}

impl Bank {
    pub const ALL: [Bank; 4] = [Bank::T, Bank::TBar, Bank::TPrime, Bank::TBarPrime];

    fn prefix(self) -> &'static str {
        match self {
            Bank::T => "t",
            Bank::TBar => "tb",
            Bank::TPrime => "tp",
            Bank::TBarPrime => "tbp",
        }
    }

    fn code(self, k: u8) -> u8 {
        debug_assert!((1..64).contains(&k));
        (self as u8) * 64 + k
    }

    fn decode(code: u8) -> (Bank, u8) {
        (Bank::ALL[(code / 64) as usize], code % 64)
    }
}

/// Monomial in the time variables. Ordered by weighted degree, then lexicographically
/// with `t` before `t̄` and ascending index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Mono {
    wdeg: u16,
    vars: SmallVec<[(u8, u8); 4]>,
}

impl Mono {
    pub fn one() -> Self {
        Mono::default()
    }

    pub fn var(bank: Bank, k: u8) -> Self {
        Mono::from_exponents(&[(bank, k, 1)])
    }

    pub fn from_exponents(exps: &[(Bank, u8, u8)]) -> Self {
        let mut vars: SmallVec<[(u8, u8); 4]> = SmallVec::new();
        let mut wdeg = 0u16;
        for (b, k, e) in exps {
            if *e == 0 {
                continue;
            }
            let code = b.code(*k);
            wdeg += *k as u16 * *e as u16;
            match vars.iter_mut().find(|(c, _)| *c == code) {
                Some(entry) => entry.1 += e,
                None => vars.push((code, *e)),
            }
        }
        vars.sort_unstable();
        Mono { wdeg, vars }
    }

    pub fn weight(&self) -> u32 {
        self.wdeg as u32
    }

    pub fn is_one(&self) -> bool {
        self.vars.is_empty()
    }

    /// `(bank, index, exponent)` triples.
    pub fn exponents(&self) -> impl Iterator<Item = (Bank, u8, u8)> + '_ {
        self.vars.iter().map(|(c, e)| {
            let (b, k) = Bank::decode(*c);
            (b, k, *e)
        })
    }

    pub fn exponent(&self, bank: Bank, k: u8) -> u8 {
        let code = bank.code(k);
        self.vars.iter().find(|(c, _)| *c == code).map(|(_, e)| *e).unwrap_or(0)
    }

    /// Weighted degree restricted to one bank.
    pub fn bank_weight(&self, bank: Bank) -> u32 {
        self.exponents().filter(|(b, _, _)| *b == bank).map(|(_, k, e)| k as u32 * e as u32).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut vars: SmallVec<[(u8, u8); 4]> = SmallVec::with_capacity(self.vars.len() + other.vars.len());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() || j < other.vars.len() {
            if j >= other.vars.len() || (i < self.vars.len() && self.vars[i].0 < other.vars[j].0) {
                vars.push(self.vars[i]);
                i += 1;
            } else if i >= self.vars.len() || other.vars[j].0 < self.vars[i].0 {
                vars.push(other.vars[j]);
                j += 1;
            } else {
                vars.push((self.vars[i].0, self.vars[i].1 + other.vars[j].1));
                i += 1;
                j += 1;
            }
        }
        Mono { wdeg: self.wdeg + other.wdeg, vars }
    }

    /// Lowers the exponent of one variable by one; `None` if absent.
    fn lower(&self, bank: Bank, k: u8) -> Option<(Mono, u8)> {
        let code = bank.code(k);
        let pos = self.vars.iter().position(|(c, _)| *c == code)?;
        let e = self.vars[pos].1;
        let mut vars = self.vars.clone();
        if e == 1 {
            vars.remove(pos);
        } else {
            vars[pos].1 -= 1;
        }
        Some((Mono { wdeg: self.wdeg - k as u16, vars }, e))
    }

    fn map_banks(&self, f: impl Fn(Bank) -> Bank) -> Mono {
        let exps: Vec<(Bank, u8, u8)> = self.exponents().map(|(b, k, e)| (f(b), k, e)).collect();
        Mono::from_exponents(&exps)
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vars.is_empty() {
            return write!(f, "1");
        }
        for (i, (b, k, e)) in self.exponents().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{}{}", b.prefix(), k)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeries {
    cutoff: u32,
    terms: BTreeMap<Mono, ExactScalar>,
}

fn collect_sums(cutoff: u32, acc: HashMap<Mono, Vec<ExactScalar>>) -> TruncSeries {
    let mut terms = BTreeMap::new();
    for (m, parts) in acc {
        let v = ExactScalar::sum_all(parts.iter());
        if !v.is_zero() {
            terms.insert(m, v);
        }
    }
    TruncSeries { cutoff, terms }
}

impl TruncSeries {
    pub fn zero(cutoff: u32) -> Self {
        TruncSeries { cutoff, terms: BTreeMap::new() }
    }

    pub fn one(cutoff: u32) -> Self {
        TruncSeries::constant(ExactScalar::one(), cutoff)
    }

    pub fn constant(c: ExactScalar, cutoff: u32) -> Self {
        TruncSeries::monomial(Mono::one(), c, cutoff)
    }

    pub fn monomial(m: Mono, c: ExactScalar, cutoff: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() && m.weight() <= cutoff {
            terms.insert(m, c);
        }
        TruncSeries { cutoff, terms }
    }

    /// The variable `bank_k`.
    pub fn var(bank: Bank, k: u8, cutoff: u32) -> Self {
        TruncSeries::monomial(Mono::var(bank, k), ExactScalar::one(), cutoff)
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, ExactScalar)>>(cutoff: u32, iter: I) -> Self {
        let mut acc: HashMap<Mono, Vec<ExactScalar>> = HashMap::new();
        for (m, c) in iter {
            if m.weight() <= cutoff {
                acc.entry(m).or_default().push(c);
            }
        }
        collect_sums(cutoff, acc)
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn terms(&self) -> &BTreeMap<Mono, ExactScalar> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> ExactScalar {
        self.terms.get(m).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn constant_term(&self) -> ExactScalar {
        self.coeff(&Mono::one())
    }

    /// Lowers the cutoff, dropping terms above it.
    pub fn truncate(&self, cutoff: u32) -> TruncSeries {
        let cutoff = cutoff.min(self.cutoff);
        TruncSeries { cutoff, terms: self.terms.iter().filter(|(m, _)| m.weight() <= cutoff).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    /// Reinterprets an exact polynomial at a different cutoff.
    pub fn with_cutoff_exact(&self, cutoff: u32) -> TruncSeries {
        TruncSeries { cutoff, terms: self.terms.iter().filter(|(m, _)| m.weight() <= cutoff).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    pub fn neg(&self) -> TruncSeries {
        TruncSeries { cutoff: self.cutoff, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        self.combine(other, true)
    }

    fn combine(&self, other: &TruncSeries, negate: bool) -> TruncSeries {
        let cutoff = self.cutoff.min(other.cutoff);
        let mut terms: BTreeMap<Mono, ExactScalar> =
            self.terms.iter().filter(|(m, _)| m.weight() <= cutoff).map(|(m, c)| (m.clone(), c.clone())).collect();
        for (m, c) in &other.terms {
            if m.weight() > cutoff {
                continue;
            }
            let c = if negate { -c } else { c.clone() };
            match terms.get_mut(m) {
                Some(v) => {
                    *v = &*v + &c;
                    if v.is_zero() {
                        terms.remove(m);
                    }
                }
                None => {
                    terms.insert(m.clone(), c);
                }
            }
        }
        TruncSeries { cutoff, terms }
    }

    /// Sum over a common cutoff, one scalar normalization per monomial.
    pub fn sum_all<'a, I: IntoIterator<Item = &'a TruncSeries>>(items: I, cutoff: u32) -> TruncSeries {
        let mut acc: HashMap<Mono, Vec<ExactScalar>> = HashMap::new();
        let mut cutoff = cutoff;
        let items: Vec<&TruncSeries> = items.into_iter().collect();
        for s in &items {
            cutoff = cutoff.min(s.cutoff);
        }
        for s in items {
            for (m, c) in &s.terms {
                if m.weight() <= cutoff {
                    acc.entry(m.clone()).or_default().push(c.clone());
                }
            }
        }
        collect_sums(cutoff, acc)
    }

    pub fn scale(&self, c: &ExactScalar) -> TruncSeries {
        if c.is_zero() {
            return TruncSeries::zero(self.cutoff);
        }
        TruncSeries { cutoff: self.cutoff, terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        let cutoff = self.cutoff.min(other.cutoff);
        if self.is_zero() || other.is_zero() {
            return TruncSeries::zero(cutoff);
        }
        if other.terms.len() == 1 && other.terms.contains_key(&Mono::one()) {
            return self.truncate(cutoff).scale(&other.constant_term());
        }
        if self.terms.len() == 1 && self.terms.contains_key(&Mono::one()) {
            return other.truncate(cutoff).scale(&self.constant_term());
        }
        let mut acc: HashMap<Mono, Vec<ExactScalar>> = HashMap::new();
        for (ma, ca) in &self.terms {
            if ma.weight() > cutoff {
                break;
            }
            let room = cutoff - ma.weight();
            for (mb, cb) in &other.terms {
                if mb.weight() > room {
                    break;
                }
                acc.entry(ma.mul(mb)).or_default().push(ca * cb);
            }
        }
        collect_sums(cutoff, acc)
    }

    pub fn pow(&self, n: u32) -> TruncSeries {
        let mut out = TruncSeries::one(self.cutoff);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Homogeneous components by weighted degree `0..=cutoff`.
    pub fn components(&self) -> Vec<TruncSeries> {
        let mut out = vec![TruncSeries::zero(self.cutoff); self.cutoff as usize + 1];
        for (m, c) in &self.terms {
            out[m.weight() as usize].terms.insert(m.clone(), c.clone());
        }
        out
    }

    /// Multiplies every weight-`n` component by `n`.
    fn euler(&self) -> TruncSeries {
        TruncSeries {
            cutoff: self.cutoff,
            terms: self.terms.iter().filter(|(m, _)| m.weight() > 0).map(|(m, c)| (m.clone(), c.scale_int(&BigInt::from(m.weight())))).collect(),
        }
    }

    pub fn exp(&self) -> Result<TruncSeries> {
        if !self.constant_term().is_zero() {
            return Err(Error::ConstantTerm { expected: "0" });
        }
        let d = self.cutoff as usize;
        let es = self.euler().components();
        // n F_n = Σ_{j=1}^n (j S_j) F_{n-j}
        let mut f: Vec<TruncSeries> = vec![TruncSeries::one(self.cutoff)];
        for n in 1..=d {
            let parts: Vec<TruncSeries> = (1..=n).filter(|j| !es[*j].is_zero()).map(|j| es[j].mul(&f[n - j])).collect();
            let s = TruncSeries::sum_all(parts.iter(), self.cutoff);
            f.push(s.scale(&ExactScalar::from_ratio(1, n as i64)));
        }
        Ok(TruncSeries::sum_all(f.iter(), self.cutoff))
    }

    pub fn log(&self) -> Result<TruncSeries> {
        if !self.constant_term().is_one() {
            return Err(Error::ConstantTerm { expected: "1" });
        }
        let d = self.cutoff as usize;
        let fc = self.components();
        let ef = self.euler().components();
        // n L_n = n F_n - Σ_{j=1}^{n-1} (j L_j) F_{n-j}
        let mut el: Vec<TruncSeries> = vec![TruncSeries::zero(self.cutoff)];
        for n in 1..=d {
            let mut parts = vec![ef[n].clone()];
            for j in 1..n {
                if !el[j].is_zero() && !fc[n - j].is_zero() {
                    parts.push(el[j].mul(&fc[n - j]).neg());
                }
            }
            el.push(TruncSeries::sum_all(parts.iter(), self.cutoff));
        }
        let out: Vec<TruncSeries> = el.iter().enumerate().skip(1).map(|(n, x)| x.scale(&ExactScalar::from_ratio(1, n as i64))).collect();
        Ok(TruncSeries::sum_all(out.iter(), self.cutoff))
    }

    /// Multiplicative inverse; the constant term must be invertible.
    pub fn inv(&self) -> Result<TruncSeries> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::ConstantTerm { expected: "nonzero" });
        }
        let c0_inv = c0.inv()?;
        let d = self.cutoff as usize;
        let fc = self.components();
        let mut g: Vec<TruncSeries> = vec![TruncSeries::constant(c0_inv.clone(), self.cutoff)];
        for n in 1..=d {
            let parts: Vec<TruncSeries> = (1..=n).filter(|j| !fc[*j].is_zero()).map(|j| fc[j].mul(&g[n - j])).collect();
            let s = TruncSeries::sum_all(parts.iter(), self.cutoff);
            g.push(s.scale(&c0_inv).neg());
        }
        Ok(TruncSeries::sum_all(g.iter(), self.cutoff))
    }

    pub fn div(&self, other: &TruncSeries) -> Result<TruncSeries> {
        Ok(self.mul(&other.inv()?))
    }

    /// Partial derivative in `bank_k`. The result is valid to weight `cutoff - k`.
    pub fn deriv(&self, bank: Bank, k: u8) -> TruncSeries {
        let cutoff = self.cutoff.saturating_sub(k as u32);
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if let Some((lowered, e)) = m.lower(bank, k) {
                if lowered.weight() <= cutoff {
                    terms.insert(lowered, c.scale_int(&BigInt::from(e)));
                }
            }
        }
        TruncSeries { cutoff, terms }
    }

    /// Substitutes `bank_k -> factor(k) · bank_k`.
    pub fn scale_vars(&self, bank: Bank, factor: impl Fn(u8) -> ExactScalar) -> TruncSeries {
        let mut cache: HashMap<(u8, u8), ExactScalar> = HashMap::new();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (b, k, e) in m.exponents() {
                if b == bank {
                    let f = cache.entry((k, e)).or_insert_with(|| factor(k).pow(e as i32));
                    v = &v * &*f;
                }
            }
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        TruncSeries { cutoff: self.cutoff, terms }
    }

    /// Renames banks through `f`.
    pub fn map_banks(&self, f: impl Fn(Bank) -> Bank) -> TruncSeries {
        TruncSeries::from_terms(self.cutoff, self.terms.iter().map(|(m, c)| (m.map_banks(&f), c.clone())))
    }

    /// Replaces every variable of `bank` by the given value (index `k` at position `k-1`,
    /// missing entries are zero). Only exact for polynomials.
    pub fn evaluate_bank(&self, bank: Bank, values: &[ExactScalar]) -> TruncSeries {
        let mut acc: HashMap<Mono, Vec<ExactScalar>> = HashMap::new();
        'terms: for (m, c) in &self.terms {
            let mut v = c.clone();
            let mut rest = Vec::new();
            for (b, k, e) in m.exponents() {
                if b == bank {
                    match values.get(k as usize - 1) {
                        Some(x) if !x.is_zero() => v = &v * &x.pow(e as i32),
                        _ => continue 'terms,
                    }
                } else {
                    rest.push((b, k, e));
                }
            }
            acc.entry(Mono::from_exponents(&rest)).or_default().push(v);
        }
        collect_sums(self.cutoff, acc)
    }

    /// Substitutes `bank_k -> Σ_j coeffs[k-1][j] · target_j` style linear maps given as
    /// series images of each variable, valid for polynomials and truncated series alike.
    pub fn substitute(&self, bank: Bank, images: &[TruncSeries], cutoff: u32) -> TruncSeries {
        let mut parts = Vec::new();
        let mut pow_cache: HashMap<(u8, u8), TruncSeries> = HashMap::new();
        for (m, c) in &self.terms {
            let mut term = TruncSeries::constant(c.clone(), cutoff);
            let mut rest = Vec::new();
            for (b, k, e) in m.exponents() {
                if b == bank {
                    let img = pow_cache
                        .entry((k, e))
                        .or_insert_with(|| images.get(k as usize - 1).cloned().unwrap_or_else(|| TruncSeries::zero(cutoff)).pow(e as u32))
                        .clone();
                    term = term.mul(&img);
                } else {
                    rest.push((b, k, e));
                }
            }
            let rest = TruncSeries::monomial(Mono::from_exponents(&rest), ExactScalar::one(), cutoff);
            parts.push(term.mul(&rest));
        }
        TruncSeries::sum_all(parts.iter(), cutoff)
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&ExactScalar) -> ExactScalar) -> TruncSeries {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), f(c))).filter(|(_, c)| !c.is_zero()).collect();
        TruncSeries { cutoff: self.cutoff, terms }
    }

    /// Banks with at least one variable present.
    pub fn uses_bank(&self, bank: Bank) -> bool {
        self.terms.keys().any(|m| m.exponents().any(|(b, _, _)| b == bank))
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "({c})*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[D={}] {}", self.cutoff, self)
    }
}

impl Serialize for TruncSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
