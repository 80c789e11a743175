//! Free-fermion engine in the partition basis.
//!
//! Operators are applied to a bra `⟨s|` one factor at a time; between
//! factors the state is a map from partitions to series, truncated by weight.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, LazyLock, Mutex};

use num_bigint::BigInt;

use crate::algebra::scalar::Q_UNITS;
use crate::algebra::{Bank, ExactScalar, Mono, TruncSeries};
use crate::error::{Error, Result};
use crate::partitions::{partitions_up_to, Partition};
use crate::schur::{skew_schur_in, skew_spec, skew_spec_conjugate, SpecPoint};

/// Basis vector `|λ, s⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockIndex {
    pub lambda: Partition,
    pub charge: i64,
}

impl FockIndex {
    pub fn new(lambda: Partition, charge: i64) -> Self {
        FockIndex { lambda, charge }
    }
}

/// Sequence `r_n` of a hypergeometric tau function.
#[derive(Clone)]
pub enum RSequence {
    Constant(ExactScalar),
    /// `r_n = a · b^n`.
    Geometric {
        a: ExactScalar,
        b: ExactScalar,
    },
    Custom(Arc<dyn Fn(i64) -> ExactScalar + Send + Sync>),
}

impl std::fmt::Debug for RSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RSequence::Constant(c) => write!(f, "Constant({c})"),
            RSequence::Geometric { a, b } => write!(f, "Geometric({a}, {b})"),
            RSequence::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl RSequence {
    pub fn at(&self, n: i64) -> ExactScalar {
        match self {
            RSequence::Constant(c) => c.clone(),
            RSequence::Geometric { a, b } => a.mul(&b.pow(n as i32)),
            RSequence::Custom(f) => f(n),
        }
    }

    /// `e^{T_n}` with `T_0 = 0` and `r_n = e^{T_n − T_{n−1}}`.
    pub fn exp_t(&self, n: i64) -> Result<ExactScalar> {
        if n >= 0 {
            Ok((1..=n).fold(ExactScalar::one(), |acc, m| acc.mul(&self.at(m))))
        } else {
            let prod = (n + 1..=0).fold(ExactScalar::one(), |acc, m| acc.mul(&self.at(m)));
            prod.inv()
        }
    }

    /// `⟨s|g|s⟩`.
    pub fn vacuum_value(&self, s: i64) -> Result<ExactScalar> {
        if s >= 0 {
            (1..=s).try_fold(ExactScalar::one(), |acc, n| Ok(acc.mul(&self.exp_t(n)?)))
        } else {
            // e^{−T_n} = Π_{m=n+1}^{0} r_m for n ≤ 0
            Ok((s + 1..=0).fold(ExactScalar::one(), |acc, n| (n + 1..=0).fold(acc, |acc, m| acc.mul(&self.at(m)))))
        }
    }

    /// Contents product `Π_{(i,j)∈λ} r_{j−i+1+s}`.
    pub fn contents_product(&self, lambda: &Partition, s: i64) -> ExactScalar {
        lambda.contents().iter().fold(ExactScalar::one(), |acc, c| acc.mul(&self.at(c + 1 + s)))
    }
}

/// One term `coeff · bank_var · H_k` of an exponentiated potential.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTerm {
    pub k: i32,
    pub bank: Bank,
    pub var: u8,
    pub coeff: ExactScalar,
}

/// Diagonal operators in the `|λ, s⟩` basis.
#[derive(Clone, Debug)]
pub enum Diag {
    L0,
    K,
    Hk(i32),
    /// `Q^{L_0}`.
    QL0,
    /// `p^{±K}` with `p = e^{β/2}` a unit monomial.
    QK2 {
        inverse: bool,
        p: ExactScalar,
    },
    /// `exp(Σ coeff · t · H_k)`.
    ExpH(Vec<PotentialTerm>),
    Hypergeometric(RSequence),
}

impl Diag {
    pub fn qk2(inverse: bool) -> Diag {
        Diag::QK2 { inverse, p: ExactScalar::u_pow(Q_UNITS / 2) }
    }
}

/// Substitution `t_k → scale_k · bank_k` used as the argument of `γ±`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeArg {
    pub bank: Bank,
    /// Entry `k−1` multiplies `bank_k`; missing entries are 1.
    pub scale: Vec<ExactScalar>,
}

impl TimeArg {
    pub fn plain(bank: Bank) -> Self {
        TimeArg { bank, scale: Vec::new() }
    }

    pub fn negated(bank: Bank, kmax: u32) -> Self {
        TimeArg::scaled(bank, kmax, |_| ExactScalar::from_int(-1))
    }

    pub fn scaled(bank: Bank, kmax: u32, f: impl Fn(u32) -> ExactScalar) -> Self {
        TimeArg { bank, scale: (1..=kmax).map(f).collect() }
    }

    fn factor(&self, k: u8) -> ExactScalar {
        self.scale.get(k as usize - 1).cloned().unwrap_or_else(ExactScalar::one)
    }

    /// `S_{λ/μ}` at this argument.
    pub fn skew(&self, lambda: &Partition, mu: &Partition, cutoff: u32) -> TruncSeries {
        let s = skew_schur_in(self.bank, lambda, mu, cutoff);
        if self.scale.is_empty() || s.is_zero() {
            s
        } else {
            s.scale_vars(self.bank, |k| self.factor(k))
        }
    }
}

#[derive(Clone, Debug)]
pub enum OperatorFactor {
    GammaMinus(SpecPoint),
    GammaPlus(SpecPoint),
    GammaPrimeMinus(SpecPoint),
    GammaPrimePlus(SpecPoint),
    /// `γ−(t) = exp(Σ t_k J_{−k})`.
    GammaMinusT(TimeArg),
    /// `γ+(t) = exp(Σ t_k J_k)`.
    GammaPlusT(TimeArg),
    Diag(Diag),
}

/// `φ_k(λ, s)`: eigenvalue of `H_k` on `|λ, s⟩`.
pub fn potential(k: i32, lambda: &Partition, s: i64) -> Result<ExactScalar> {
    if k == 0 {
        return Err(Error::InvalidArgument("H_k needs k != 0".into()));
    }
    let q = |e: i64| ExactScalar::u_pow((Q_UNITS as i64 * e) as i32);
    let k = k as i64;
    let mut terms = Vec::new();
    for (i, &part) in lambda.parts().iter().enumerate() {
        let i = i as i64 + 1;
        terms.push(q(k * (part as i64 - i + 1 + s)));
        terms.push(q(k * (-i + 1 + s)).neg());
    }
    // q^k (1 − q^{ks}) / (1 − q^k) as a finite geometric sum
    if s > 0 {
        terms.extend((1..=s).map(|j| q(k * j)));
    } else {
        terms.extend((0..-s).map(|j| q(-k * j).neg()));
    }
    Ok(ExactScalar::sum_all(terms.iter()))
}

/// `φ_k − q^k/(1 − q^k)`, the potential with its constant term removed.
pub fn potential_modified(k: i32, lambda: &Partition, s: i64) -> Result<ExactScalar> {
    let qk = ExactScalar::u_pow(Q_UNITS * k);
    let shift = qk.checked_div(&ExactScalar::one().sub(&qk))?;
    Ok(potential(k, lambda, s)?.sub(&shift))
}

/// Twelve times the eigenvalue of `K`: `12κ + 24 s|λ| + 4s³ − s`.
fn k_times_12(idx: &FockIndex) -> i64 {
    let s = idx.charge;
    12 * idx.lambda.kappa() + 24 * s * idx.lambda.weight() as i64 + 4 * s * s * s - s
}

/// Eigenvalue of a scalar diagonal operator.
pub fn diag_eigenvalue(d: &Diag, idx: &FockIndex) -> Result<ExactScalar> {
    let s = idx.charge;
    let w = idx.lambda.weight() as i64;
    match d {
        Diag::L0 => Ok(ExactScalar::from_int(w + s * (s + 1) / 2)),
        Diag::K => Ok(ExactScalar::from_ratio(k_times_12(idx), 12)),
        Diag::Hk(k) => potential(*k, &idx.lambda, s),
        Diag::QL0 => Ok(ExactScalar::monomial(0, (w + s * (s + 1) / 2) as i32)),
        Diag::QK2 { inverse, p } => {
            let (a, b) = p.as_unit_monomial().ok_or_else(|| Error::InvalidArgument(format!("e^(beta/2) must be a unit monomial, got {p}")))?;
            let k12 = k_times_12(idx) * if *inverse { -1 } else { 1 };
            if (a as i64 * k12) % 12 != 0 || (b as i64 * k12) % 12 != 0 {
                return Err(Error::InvalidArgument(format!("{p} raised to K = {k12}/12 leaves the u-lattice")));
            }
            Ok(ExactScalar::monomial((a as i64 * k12 / 12) as i32, (b as i64 * k12 / 12) as i32))
        }
        Diag::Hypergeometric(r) => Ok(r.vacuum_value(s)?.mul(&r.contents_product(&idx.lambda, s))),
        Diag::ExpH(_) => Err(Error::InvalidArgument("exponentiated potential is series valued".into())),
    }
}

/// Eigenvalue of any diagonal operator as a series at the given cutoff.
pub fn diag_series(d: &Diag, idx: &FockIndex, cutoff: u32) -> Result<TruncSeries> {
    match d {
        Diag::ExpH(terms) => {
            let mut arg = TruncSeries::zero(cutoff);
            for term in terms {
                let phi = potential(term.k, &idx.lambda, idx.charge)?;
                let v = TruncSeries::monomial(Mono::var(term.bank, term.var), term.coeff.mul(&phi), cutoff);
                arg = arg.add(&v);
            }
            arg.exp()
        }
        _ => Ok(TruncSeries::constant(diag_eigenvalue(d, idx)?, cutoff)),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum SpecKind {
    Plain,
    Conjugate,
}

static PRINCIPAL_CACHE: LazyLock<Mutex<HashMap<(SpecKind, Partition, Partition), ExactScalar>>> = LazyLock::new(Default::default);

fn principal_skew(kind: SpecKind, lambda: &Partition, mu: &Partition) -> ExactScalar {
    let key = (kind, lambda.clone(), mu.clone());
    if let Some(v) = PRINCIPAL_CACHE.lock().unwrap().get(&key) {
        return v.clone();
    }
    let v = match kind {
        SpecKind::Plain => skew_spec(lambda, mu, &SpecPoint::Principal),
        SpecKind::Conjugate => skew_spec_conjugate(lambda, mu, &SpecPoint::Principal),
    };
    PRINCIPAL_CACHE.lock().unwrap().insert(key, v.clone());
    v
}

/// `s_{λ/μ}(x)`, or `s_{ᵗλ/ᵗμ}(x)` when `conjugate`.
fn specialized_skew(x: &SpecPoint, lambda: &Partition, mu: &Partition, conjugate: bool) -> ExactScalar {
    if !lambda.contains(mu) {
        return ExactScalar::zero();
    }
    let kind = if conjugate { SpecKind::Conjugate } else { SpecKind::Plain };
    match x {
        SpecPoint::Principal => principal_skew(kind, lambda, mu),
        SpecPoint::ScaledPrincipal(c) => c.pow((lambda.weight() - mu.weight()) as i32).mul(&principal_skew(kind, lambda, mu)),
        SpecPoint::Finite(_) if conjugate => skew_spec_conjugate(lambda, mu, x),
        SpecPoint::Finite(_) => skew_spec(lambda, mu, x),
    }
}

/// `⟨λ|f|μ⟩` for a vertex-type factor.
///
/// Lowering factors (`Γ−`, `Γ′−`, `γ−`) need `λ ⊇ μ`; raising ones need `μ ⊇ λ`.
pub fn vertex_matrix_element(f: &OperatorFactor, lambda: &Partition, mu: &Partition, cutoff: u32) -> Result<TruncSeries> {
    let c = |v: ExactScalar| TruncSeries::constant(v, cutoff);
    Ok(match f {
        OperatorFactor::GammaMinus(x) => c(specialized_skew(x, lambda, mu, false)),
        OperatorFactor::GammaPlus(x) => c(specialized_skew(x, mu, lambda, false)),
        OperatorFactor::GammaPrimeMinus(x) => c(specialized_skew(x, lambda, mu, true)),
        OperatorFactor::GammaPrimePlus(x) => c(specialized_skew(x, mu, lambda, true)),
        OperatorFactor::GammaMinusT(t) => t.skew(lambda, mu, cutoff),
        OperatorFactor::GammaPlusT(t) => t.skew(mu, lambda, cutoff),
        OperatorFactor::Diag(_) => return Err(Error::InvalidArgument("diagonal factor is not a vertex operator".into())),
    })
}

/// Truncation data for an expectation value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cutoffs {
    /// Largest intermediate partition weight; `None` is rejected.
    pub weight: Option<u32>,
    /// Weighted-degree cutoff of the time variables.
    pub degree: u32,
}

impl Cutoffs {
    pub fn new(weight: u32, degree: u32) -> Self {
        Cutoffs { weight: Some(weight), degree }
    }
}

enum Direction {
    Lower(Option<u32>),
    Raise(Option<u32>),
    Diagonal,
}

fn direction(f: &OperatorFactor, degree: u32) -> Direction {
    match f {
        OperatorFactor::GammaMinus(_) | OperatorFactor::GammaPrimeMinus(_) => Direction::Lower(None),
        OperatorFactor::GammaPlus(_) | OperatorFactor::GammaPrimePlus(_) => Direction::Raise(None),
        OperatorFactor::GammaMinusT(_) => Direction::Lower(Some(degree)),
        OperatorFactor::GammaPlusT(_) => Direction::Raise(Some(degree)),
        OperatorFactor::Diag(_) => Direction::Diagonal,
    }
}

type Bra = BTreeMap<Partition, TruncSeries>;

/// Applies `f` from the right to a bra.
fn apply_factor(bra: &Bra, f: &OperatorFactor, s: i64, bound: u32, cutoff: u32, basis: &[Partition]) -> Result<Bra> {
    let mut out: HashMap<Partition, Vec<TruncSeries>> = HashMap::new();
    match direction(f, cutoff) {
        Direction::Diagonal => {
            let OperatorFactor::Diag(d) = f else { unreachable!() };
            let mut next = Bra::new();
            for (lambda, v) in bra {
                if lambda.weight() > bound {
                    continue;
                }
                let e = diag_series(d, &FockIndex::new(lambda.clone(), s), cutoff)?;
                let prod = v.mul(&e);
                if !prod.is_zero() {
                    next.insert(lambda.clone(), prod);
                }
            }
            return Ok(next);
        }
        Direction::Lower(step) => {
            for (lambda, v) in bra {
                let min_w = step.map(|st| lambda.weight().saturating_sub(st)).unwrap_or(0);
                for mu in basis.iter().filter(|m| m.weight() <= bound.min(lambda.weight()) && m.weight() >= min_w) {
                    if !lambda.contains(mu) {
                        continue;
                    }
                    let e = vertex_matrix_element(f, lambda, mu, cutoff)?;
                    if !e.is_zero() {
                        out.entry(mu.clone()).or_default().push(v.mul(&e));
                    }
                }
            }
        }
        Direction::Raise(step) => {
            for (lambda, v) in bra {
                let max_w = step.map(|st| lambda.weight() + st).unwrap_or(u32::MAX).min(bound);
                for mu in basis.iter().filter(|m| m.weight() <= max_w && m.weight() >= lambda.weight()) {
                    if !mu.contains(lambda) {
                        continue;
                    }
                    let e = vertex_matrix_element(f, lambda, mu, cutoff)?;
                    if !e.is_zero() {
                        out.entry(mu.clone()).or_default().push(v.mul(&e));
                    }
                }
            }
        }
    }
    let mut next = Bra::new();
    for (mu, parts) in out {
        let v = TruncSeries::sum_all(parts.iter(), cutoff);
        if !v.is_zero() {
            next.insert(mu, v);
        }
    }
    Ok(next)
}

/// `⟨λ, s| f_1 ⋯ f_n |μ, s⟩` with intermediate weights bounded by `cutoffs.weight`.
pub fn matrix_element(factors: &[OperatorFactor], lambda: &Partition, mu: &Partition, s: i64, cutoffs: Cutoffs) -> Result<TruncSeries> {
    let w = cutoffs.weight.ok_or_else(|| Error::InvalidArgument("expectation needs an intermediate weight cutoff".into()))?;
    let d = cutoffs.degree;
    let w = w.max(lambda.weight()).max(mu.weight());
    let basis = partitions_up_to(w);
    // after factor i, only states that the remaining factors can lower to |μ| matter
    let mut reach: Vec<Option<u32>> = vec![Some(0); factors.len() + 1];
    for i in (0..factors.len()).rev() {
        reach[i] = match (direction(&factors[i], d), reach[i + 1]) {
            (Direction::Lower(None), _) | (_, None) => None,
            (Direction::Lower(Some(st)), Some(r)) => Some(r + st),
            (_, r) => r,
        };
    }
    let mut bra = Bra::new();
    bra.insert(lambda.clone(), TruncSeries::one(d));
    for (i, f) in factors.iter().enumerate() {
        let bound = reach[i + 1].map(|r| (r + mu.weight()).min(w)).unwrap_or(w);
        bra = apply_factor(&bra, f, s, bound, d, &basis)?;
    }
    Ok(bra.remove(mu).unwrap_or_else(|| TruncSeries::zero(d)))
}

/// Vacuum expectation value `⟨s| f_1 ⋯ f_n |s⟩`.
pub fn expectation(factors: &[OperatorFactor], s: i64, cutoffs: Cutoffs) -> Result<TruncSeries> {
    let e = Partition::empty();
    matrix_element(factors, &e, &e, s, cutoffs)
}

/// Matrix with finitely many nonzero entries, indexed by integers.
pub type BandMatrixSmall = BTreeMap<(i64, i64), ExactScalar>;

/// Central term of `[Â, B̂] = \widehat{[A,B]} + γ(A, B)` for `Â = Σ a_ij :ψ_{−i} ψ*_j:`.
///
/// With this normal ordering the vacuum expectation gives
/// `Σ_{i>0, j≤0} (b_ij a_ji − a_ij b_ji)`, so that `γ(Λ^m, Λ^{−m}) = m`.
pub fn cocycle(a: &BandMatrixSmall, b: &BandMatrixSmall) -> ExactScalar {
    let get = |m: &BandMatrixSmall, i: i64, j: i64| m.get(&(i, j)).cloned();
    let mut terms = Vec::new();
    for (&(i, j), bij) in b {
        if i > 0 && j <= 0 {
            if let Some(aji) = get(a, j, i) {
                terms.push(bij.mul(&aji));
            }
        }
    }
    for (&(i, j), aij) in a {
        if i > 0 && j <= 0 {
            if let Some(bji) = get(b, j, i) {
                terms.push(aij.mul(&bji).neg());
            }
        }
    }
    ExactScalar::sum_all(terms.iter())
}

/// `Λ^m` restricted to `|i|, |j| ≤ radius`.
pub fn shift_pattern(m: i64, radius: i64) -> BandMatrixSmall {
    (-radius..=radius).filter(|i| (i + m).abs() <= radius).map(|i| ((i, i + m), ExactScalar::one())).collect()
}

/// Entry of a Heisenberg check on `⟨λ, s|[J_m, J_{−m}]|μ, s⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorEntry {
    pub lambda: Partition,
    pub mu: Partition,
    pub value: ExactScalar,
    pub expected: ExactScalar,
}

/// Reads `⟨λ|J_m J_{−m}|μ⟩ − ⟨λ|J_{−m} J_m|μ⟩` as the `t_m t'_m` coefficient of
/// `⟨λ|γ+(t)γ−(t')|μ⟩ − ⟨λ|γ−(t')γ+(t)|μ⟩`, for all `|λ| = |μ| ≤ max_weight`.
pub fn heisenberg_commutator(m: u8, s: i64, max_weight: u32) -> Result<Vec<CommutatorEntry>> {
    let d = 2 * m as u32;
    let plus = OperatorFactor::GammaPlusT(TimeArg::plain(Bank::T));
    let minus = OperatorFactor::GammaMinusT(TimeArg::plain(Bank::TPrime));
    let mono = Mono::from_exponents(&[(Bank::T, m, 1), (Bank::TPrime, m, 1)]);
    let cut = Cutoffs::new(max_weight + m as u32, d);
    let mut out = Vec::new();
    for n in 0..=max_weight {
        let parts = crate::partitions::enumerate_partitions(n);
        for lambda in &parts {
            for mu in &parts {
                let pm = matrix_element(&[plus.clone(), minus.clone()], lambda, mu, s, cut)?;
                let mp = matrix_element(&[minus.clone(), plus.clone()], lambda, mu, s, cut)?;
                let value = pm.coeff(&mono).sub(&mp.coeff(&mono));
                let expected = if lambda == mu { ExactScalar::from_int(m as i64) } else { ExactScalar::zero() };
                out.push(CommutatorEntry { lambda: lambda.clone(), mu: mu.clone(), value, expected });
            }
        }
    }
    Ok(out)
}

/// `φ_k` evaluated for every `k` in `1..=kmax` and both signs, handy for reports.
pub fn potentials_table(lambda: &Partition, s: i64, kmax: i32) -> Result<Vec<(i32, ExactScalar)>> {
    let mut out = Vec::new();
    for k in (-kmax..=kmax).filter(|k| *k != 0) {
        out.push((k, potential(k, lambda, s)?));
    }
    Ok(out)
}

/// Integer factorial as an exact scalar.
pub fn factorial(n: u32) -> ExactScalar {
    ExactScalar::from_bigint((1..=n).map(BigInt::from).product())
}
