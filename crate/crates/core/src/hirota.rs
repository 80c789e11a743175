//! Hirota bilinear operators, Miwa shifts and the bilinear identities of 2D Toda.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde_json::json;

use crate::algebra::{Bank, ExactScalar, LaurentSeriesZ, Mono, TruncSeries};
use crate::error::{Error, Result};
use crate::report::{compare_series, Check, Report};
use crate::tau::{ensure_nondegenerate, TauProvider};

/// `Π D_k^{a_k} D̄_k^{b_k}`; unprimed banks only.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct HirotaMonomial {
    exps: BTreeMap<(Bank, u8), u32>,
}

impl HirotaMonomial {
    pub fn one() -> Self {
        HirotaMonomial::default()
    }

    pub fn d(k: u8) -> Self {
        HirotaMonomial::var(Bank::T, k)
    }

    pub fn dbar(k: u8) -> Self {
        HirotaMonomial::var(Bank::TBar, k)
    }

    fn var(bank: Bank, k: u8) -> Self {
        let mut exps = BTreeMap::new();
        exps.insert((bank, k), 1);
        HirotaMonomial { exps }
    }

    pub fn mul(&self, other: &HirotaMonomial) -> Self {
        let mut exps = self.exps.clone();
        for (key, e) in &other.exps {
            *exps.entry(*key).or_default() += e;
        }
        HirotaMonomial { exps }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(HirotaMonomial::one(), |acc, _| acc.mul(self))
    }

    /// Number of `D` factors.
    pub fn degree(&self) -> u32 {
        self.exps.values().sum()
    }

    /// Weighted degree with `D_k` of weight `k`.
    pub fn weight(&self) -> u32 {
        self.exps.iter().map(|((_, k), e)| *k as u32 * e).sum()
    }
}

impl fmt::Display for HirotaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exps
            .iter()
            .map(|((b, k), e)| {
                let name = if *b == Bank::T { "D" } else { "Db" };
                if *e == 1 {
                    format!("{name}{k}")
                } else {
                    format!("{name}{k}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Linear combination of Hirota monomials.
#[derive(Clone, Debug, Default)]
pub struct HirotaPoly(pub Vec<(ExactScalar, HirotaMonomial)>);

impl HirotaPoly {
    pub fn monomial(m: HirotaMonomial) -> Self {
        HirotaPoly(vec![(ExactScalar::one(), m)])
    }

    pub fn plus(mut self, c: i64, m: HirotaMonomial) -> Self {
        self.0.push((ExactScalar::from_int(c), m));
        self
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().map(|(_, m)| m.weight()).max().unwrap_or(0)
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut v = BigInt::from(1);
    for i in 0..k {
        v = v * (n - i) / (i + 1);
    }
    v
}

/// `P(D) f·g`, valid to weight `min cutoff − weight(P)`.
pub fn hirota_apply(p: &HirotaPoly, f: &TruncSeries, g: &TruncSeries) -> TruncSeries {
    let cutoff = f.cutoff().min(g.cutoff()).saturating_sub(p.weight());
    let mut parts = Vec::new();
    for (c, m) in &p.0 {
        let factors: Vec<((Bank, u8), u32)> = m.exps.iter().map(|(k, e)| (*k, *e)).collect();
        expand_monomial(&factors, f.clone(), g.clone(), ExactScalar::one(), &mut |ff, gg, coef| {
            parts.push(ff.mul(&gg).truncate(cutoff).scale(&coef.mul(c)));
        });
    }
    TruncSeries::sum_all(parts.iter(), cutoff)
}

fn expand_monomial(
    factors: &[((Bank, u8), u32)],
    f: TruncSeries,
    g: TruncSeries,
    coef: ExactScalar,
    emit: &mut dyn FnMut(TruncSeries, TruncSeries, ExactScalar),
) {
    let Some((((bank, k), a), rest)) = factors.split_first() else {
        emit(f, g, coef);
        return;
    };
    for j in 0..=*a {
        let mut fj = f.clone();
        for _ in 0..j {
            fj = fj.deriv(*bank, *k);
        }
        let mut gj = g.clone();
        for _ in 0..(a - j) {
            gj = gj.deriv(*bank, *k);
        }
        let sign = if (a - j) % 2 == 0 { 1 } else { -1 };
        let c = coef.mul(&ExactScalar::from_bigint(binomial(*a, j) * sign));
        expand_monomial(rest, fj, gj, c, emit);
    }
}

/// Power of `z` carried by the shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZPower {
    /// `[z^{-1}]`.
    Inverse,
    /// `[z]`.
    Direct,
}

/// `S(bank ± [z^{∓1}])` as a Laurent series in `z` up to `|z|`-order `max_order`.
///
/// The coefficient of `z^{±j}` keeps only monomials of weight `≤ cutoff − j`.
pub fn miwa_shift(s: &TruncSeries, bank: Bank, sign: i32, zpow: ZPower, max_order: u32) -> Result<LaurentSeriesZ> {
    let cutoff = s.cutoff();
    if max_order > cutoff {
        return Err(Error::InvalidArgument(format!("z-order {max_order} exceeds the supported bound {cutoff}")));
    }
    let mut acc: BTreeMap<u32, Vec<TruncSeries>> = BTreeMap::new();
    for (m, c) in s.terms() {
        let mut rest = Vec::new();
        let mut shifted: Vec<(u8, u8)> = Vec::new();
        for (b, k, e) in m.exponents() {
            if b == bank {
                shifted.push((k, e));
            } else {
                rest.push((b, k, e));
            }
        }
        // expand Π (x_k + sign w^k / k)^{e_k}
        let mut pieces: Vec<(u32, Vec<(Bank, u8, u8)>, ExactScalar)> = vec![(0, rest, c.clone())];
        for (k, e) in shifted {
            let mut next = Vec::new();
            for (w, vars, coef) in &pieces {
                for i in 0..=e {
                    let zw = w + (k as u32) * i as u32;
                    if zw > max_order {
                        break;
                    }
                    let mut v = vars.clone();
                    if e > i {
                        v.push((bank, k, e - i));
                    }
                    let unit = ExactScalar::from_ratio(sign.into(), k as i64).pow(i as i32);
                    next.push((zw, v, coef.mul(&unit).mul(&ExactScalar::from_bigint(binomial(e as u32, i as u32)))));
                }
            }
            pieces = next;
        }
        for (w, vars, coef) in pieces {
            let mono = Mono::from_exponents(&vars);
            if mono.weight() + w <= cutoff {
                acc.entry(w).or_default().push(TruncSeries::monomial(mono, coef, cutoff));
            }
        }
    }
    let mut out = LaurentSeriesZ::zero();
    for (w, parts) in acc {
        let z = match zpow {
            ZPower::Inverse => -(w as i32),
            ZPower::Direct => w as i32,
        };
        out.insert(z, TruncSeries::sum_all(parts.iter(), cutoff));
    }
    Ok(out)
}

/// `e^{ξ(x' − x, z^{±1})} = Σ_a z^{±a} S_a(x' − x)` up to order `max_order`.
fn xi_exponential(primed: Bank, plain: Bank, zpow: ZPower, max_order: u32, cutoff: u32) -> Result<LaurentSeriesZ> {
    let mut arg = TruncSeries::zero(max_order);
    for k in 1..=max_order as u8 {
        arg = arg.add(&TruncSeries::var(primed, k, max_order)).sub(&TruncSeries::var(plain, k, max_order));
    }
    let e = arg.exp()?;
    let mut out = LaurentSeriesZ::zero();
    for (a, comp) in e.components().into_iter().enumerate() {
        let z = if zpow == ZPower::Inverse { -(a as i32) } else { a as i32 };
        out.insert(z, comp.with_cutoff_exact(cutoff));
    }
    Ok(out)
}

fn primed(s: &TruncSeries) -> TruncSeries {
    s.map_banks(|b| match b {
        Bank::T => Bank::TPrime,
        Bank::TBar => Bank::TBarPrime,
        other => other,
    })
}

/// Highest `Q`-degree at which `Π τ_i` is exact, from the per-factor bounds.
fn product_exactness(provider: &dyn TauProvider, factors: &[(i64, &TruncSeries)]) -> Option<i32> {
    let mut bound: Option<i32> = None;
    for (i, (s, _)) in factors.iter().enumerate() {
        let top = provider.exact_q_degree(*s)?;
        let others: i32 = factors
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (_, f))| f.terms().values().filter_map(|c| c.q_valuation()).min().unwrap_or(0))
            .sum();
        let b = top + others;
        bound = Some(bound.map_or(b, |x: i32| x.min(b)));
    }
    bound
}

/// The first three Hirota equations of the 2D Toda hierarchy. The signs of
/// `D_2`, `D̄_2` are the ones produced by expanding the residue identity at
/// `s' = s + 1` and `s' = s`.
pub fn hirota_triple() -> [(&'static str, HirotaPoly); 3] {
    use HirotaMonomial as H;
    [
        ("(i)", HirotaPoly::monomial(H::d(1).mul(&H::dbar(1)))),
        ("(ii)", HirotaPoly::monomial(H::d(1).pow(2)).plus(-1, H::d(2))),
        ("(iii)", HirotaPoly::monomial(H::dbar(1).pow(2)).plus(-1, H::dbar(2))),
    ]
}

/// Checks the three Hirota equations coefficientwise to degree `d`.
pub fn verify_hirota_triple(provider: &dyn TauProvider, charges: &[i64], d: u32) -> Result<Report> {
    let mut report = Report::new("verify hirota", json!({"provider": provider.label(), "charges": charges, "D": d}));
    let [eq1, eq2, eq3] = hirota_triple();
    for &s in charges {
        for c in [s - 1, s, s + 1] {
            ensure_nondegenerate(provider, c)?;
        }
        let cutoff = d + 2;
        let (tm, t0, tp) = (provider.tau(s - 1, cutoff)?, provider.tau(s, cutoff)?, provider.tau(s + 1, cutoff)?);
        let order = |fs: &[(i64, &TruncSeries)]| product_exactness(provider, fs);

        let lhs = hirota_apply(&eq1.1, &t0, &t0).add(&tp.mul(&tm).scale(&ExactScalar::from_int(2))).truncate(d);
        let q1 = [order(&[(s, &t0), (s, &t0)]), order(&[(s + 1, &tp), (s - 1, &tm)])].into_iter().flatten().min();
        push_vanishing(&mut report, &format!("s={s} {} ", eq1.0), &lhs, q1)?;

        let lhs = hirota_apply(&eq2.1, &tp, &t0).truncate(d);
        push_vanishing(&mut report, &format!("s={s} {} ", eq2.0), &lhs, order(&[(s + 1, &tp), (s, &t0)]))?;

        let lhs = hirota_apply(&eq3.1, &t0, &tp).truncate(d);
        push_vanishing(&mut report, &format!("s={s} {} ", eq3.0), &lhs, order(&[(s, &t0), (s + 1, &tp)]))?;
    }
    Ok(report)
}

fn push_vanishing(report: &mut Report, prefix: &str, lhs: &TruncSeries, q_max: Option<i32>) -> Result<()> {
    let order = q_max.map(|q| format!("exact through Q^{q}"));
    let zero = TruncSeries::zero(lhs.cutoff());
    report.extend(compare_series(prefix, lhs, &zero, q_max, order)?);
    Ok(())
}

/// Both sides of the bilinear residue identity for charges `s'`, `s`, with the
/// primed times independent. Output is compared to total degree `d`.
pub fn verify_bilinear_residue(provider: &dyn TauProvider, s: i64, s_prime: i64, d: u32, z_bound: Option<u32>) -> Result<Report> {
    let delta = s_prime - s;
    let needed = d + 1 + delta.unsigned_abs() as u32;
    if let Some(zb) = z_bound {
        if zb < needed {
            return Err(Error::InvalidArgument(format!("z-range {zb} too small, the residues need {needed}")));
        }
    }
    for c in [s - 1, s, s_prime, s_prime + 1] {
        ensure_nondegenerate(provider, c)?;
    }
    let mut report = Report::new("verify bilinear", json!({"provider": provider.label(), "s": s, "s_prime": s_prime, "D": d, "z_bound": needed}));
    let cutoff = needed + 1;
    let zpow = LaurentSeriesZ::term(delta as i32, TruncSeries::one(cutoff));

    let a = primed(&provider.tau(s_prime, cutoff)?);
    let b = provider.tau(s, cutoff)?;
    let lhs = zpow
        .mul(&xi_exponential(Bank::TPrime, Bank::T, ZPower::Direct, needed, cutoff)?)
        .mul(&miwa_shift(&a, Bank::TPrime, -1, ZPower::Inverse, needed)?)
        .mul(&miwa_shift(&b, Bank::T, 1, ZPower::Inverse, needed)?)
        .residue(cutoff)
        .truncate(d);

    let c = primed(&provider.tau(s_prime + 1, cutoff)?);
    let e = provider.tau(s - 1, cutoff)?;
    let rhs = zpow
        .mul(&xi_exponential(Bank::TBarPrime, Bank::TBar, ZPower::Inverse, needed, cutoff)?)
        .mul(&miwa_shift(&c, Bank::TBarPrime, -1, ZPower::Direct, needed)?)
        .mul(&miwa_shift(&e, Bank::TBar, 1, ZPower::Direct, needed)?)
        .residue(cutoff)
        .truncate(d);

    let q = [product_exactness(provider, &[(s_prime, &a), (s, &b)]), product_exactness(provider, &[(s_prime + 1, &c), (s - 1, &e)])]
        .into_iter()
        .flatten()
        .min();
    report.extend(compare_series("", &lhs, &rhs, q, q.map(|x| format!("exact through Q^{x}")))?);
    if lhs.is_zero() && rhs.is_zero() {
        report.push(Check::flag("both residues vanish", "0", "0", true));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::RSequence;
    use crate::partitions::Partition;
    use crate::tau::{ConstantTau, DiagonalTau, PerturbedTau};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn var(k: u8, d: u32) -> TruncSeries {
        TruncSeries::var(Bank::T, k, d)
    }

    #[test]
    fn apply_examples() {
        let f = var(1, 4).add(&var(2, 4).mul(&var(1, 4)));
        let one = TruncSeries::one(4);
        assert_eq!(hirota_apply(&HirotaPoly::monomial(HirotaMonomial::one()), &f, &one), f);
        assert!(hirota_apply(&HirotaPoly::monomial(HirotaMonomial::d(1)), &f, &f).is_zero());
        assert_eq!(hirota_apply(&HirotaPoly::monomial(HirotaMonomial::d(1)), &var(1, 4), &one), TruncSeries::one(3));
    }

    #[test]
    fn cauchy_by_hand() {
        // D_1 D̄_1 f·f = −2 f² for f = exp(−Σ k t_k t̄_k)
        let d = 4;
        let f = DiagonalTau::cauchy().tau(0, d + 2).unwrap();
        let [eq1, ..] = hirota_triple();
        let lhs = hirota_apply(&eq1.1, &f, &f);
        assert_eq!(lhs.truncate(d), f.mul(&f).scale(&ExactScalar::from_int(-2)).truncate(d));
    }

    #[test]
    fn miwa_examples() {
        let d = 4;
        let shift = |s: &TruncSeries| miwa_shift(s, Bank::T, -1, ZPower::Inverse, 2).unwrap();
        let one = shift(&TruncSeries::one(d));
        assert_eq!(one.coeffs().len(), 1);
        assert_eq!(one.coeff(0).unwrap(), &TruncSeries::one(d));
        let t1 = shift(&var(1, d));
        assert_eq!(t1.coeff(0).unwrap(), &var(1, d));
        assert_eq!(t1.coeff(-1).unwrap(), &TruncSeries::constant(ExactScalar::from_int(-1), d));
        let t2 = shift(&var(2, d));
        assert_eq!(t2.coeff(-2).unwrap(), &TruncSeries::constant(ExactScalar::from_ratio((-1).into(), 2.into()), d));
        assert!(miwa_shift(&var(1, 2), Bank::T, 1, ZPower::Direct, 3).is_err());
    }

    #[test]
    fn triple_cauchy_and_negative_control() {
        let r = verify_hirota_triple(&DiagonalTau::cauchy(), &[0], 3).unwrap();
        assert!(r.pass, "{:?}", r.first_failure());
        let r = verify_hirota_triple(&ConstantTau, &[0], 2).unwrap();
        assert!(!r.pass);
        assert_eq!(r.first_failure().unwrap().lhs, "2");
    }

    #[test]
    fn positive_second_flow_sign_fails() {
        use HirotaMonomial as H;
        let p = DiagonalTau::double_hurwitz(ExactScalar::u_pow(12), None).unwrap();
        let (t0, tp) = (p.tau(0, 4).unwrap(), p.tau(1, 4).unwrap());
        let plus = HirotaPoly::monomial(H::d(2)).plus(1, H::d(1).pow(2));
        assert!(!hirota_apply(&plus, &tp, &t0).truncate(2).is_zero());
        let plus_bar = HirotaPoly::monomial(H::dbar(2)).plus(1, H::dbar(1).pow(2));
        assert!(!hirota_apply(&plus_bar, &t0, &tp).truncate(2).is_zero());
    }

    #[test]
    fn triple_double_hurwitz() {
        let p = DiagonalTau::double_hurwitz(ExactScalar::u_pow(12), None).unwrap();
        let r = verify_hirota_triple(&p, &[-1, 0, 1], 4).unwrap();
        assert!(r.pass, "{:?}", r.first_failure());
    }

    #[test]
    fn bilinear_examples() {
        let cauchy = DiagonalTau::cauchy();
        let r = verify_bilinear_residue(&cauchy, 0, 0, 0, None).unwrap();
        assert!(r.pass, "{:?}", r.first_failure());
        let hyp = DiagonalTau::hypergeometric(RSequence::Constant(ExactScalar::one()), None);
        let r = verify_bilinear_residue(&hyp, 0, 1, 1, None).unwrap();
        assert!(r.pass, "{:?}", r.first_failure());
        let geo = DiagonalTau::hypergeometric(RSequence::Geometric { a: ExactScalar::big_q(), b: ExactScalar::u_pow(5) }, None);
        for (s, sp) in [(0, 0), (0, 1), (1, -1)] {
            let r = verify_bilinear_residue(&geo, s, sp, 2, None).unwrap();
            assert!(r.pass, "{s} {sp} {:?}", r.first_failure());
        }
        assert!(verify_bilinear_residue(&cauchy, 0, 2, 1, Some(2)).is_err());
    }

    #[test]
    fn bilinear_negative_control() {
        let perturbed =
            PerturbedTau { inner: Arc::new(DiagonalTau::cauchy()), charge: 0, lambda: Partition::new(vec![1]).unwrap(), delta: ExactScalar::one() };
        let r = verify_bilinear_residue(&perturbed, 0, 0, 2, None).unwrap();
        assert!(!r.pass);
        let r = verify_hirota_triple(&perturbed, &[0], 2).unwrap();
        assert!(!r.pass);
    }

    fn small_series() -> impl Strategy<Value = TruncSeries> {
        proptest::collection::vec((-3i64..=3, 0u8..3, 0u8..2, 0u8..2, 0u8..2), 1..6).prop_map(|terms| {
            let d = 5;
            let parts: Vec<TruncSeries> = terms
                .into_iter()
                .map(|(c, a, b, x, y)| {
                    let m = Mono::from_exponents(&[(Bank::T, 1, a), (Bank::T, 2, b), (Bank::TBar, 1, x), (Bank::TBar, 2, y)]);
                    TruncSeries::monomial(m, ExactScalar::from_int(c), d)
                })
                .collect();
            TruncSeries::sum_all(parts.iter(), d)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn hirota_symmetry(f in small_series(), g in small_series(), a in 0u32..3, b in 0u32..2, c in 0u32..2) {
            let m = HirotaMonomial::d(1).pow(a).mul(&HirotaMonomial::d(2).pow(b)).mul(&HirotaMonomial::dbar(1).pow(c));
            let p = HirotaPoly::monomial(m.clone());
            let fg = hirota_apply(&p, &f, &g);
            let gf = hirota_apply(&p, &g, &f);
            let expected = if m.degree().is_multiple_of(2) { gf } else { gf.neg() };
            prop_assert_eq!(fg, expected);
        }
    }
}
