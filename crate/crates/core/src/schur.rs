//! Schur polynomials in the time variables and their specializations.

use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};

use num_bigint::BigInt;

use crate::algebra::det::{det_exact, det_series_expand};
use crate::algebra::scalar::Q_UNITS;
use crate::algebra::{Bank, ExactScalar, Mono, TruncSeries};
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, Partition};

/// `S_n(t)`: coefficient of `z^n` in `exp(Σ t_k z^k)`, in the given bank.
pub fn schur_s_in(bank: Bank, n: i64, cutoff: u32) -> TruncSeries {
    if n < 0 || n as u32 > cutoff {
        return TruncSeries::zero(cutoff);
    }
    // Σ over multiplicities m_k with Σ k m_k = n of Π t_k^{m_k} / m_k!
    let terms = enumerate_partitions(n as u32).into_iter().map(|p| {
        let mut mult: Vec<(Bank, u8, u8)> = Vec::new();
        let mut denom = BigInt::from(1);
        for &k in p.parts() {
            match mult.iter_mut().find(|(_, kk, _)| *kk as u32 == k) {
                Some(e) => {
                    e.2 += 1;
                    denom *= e.2 as u32;
                }
                None => mult.push((bank, k as u8, 1)),
            }
        }
        (Mono::from_exponents(&mult), ExactScalar::one().div_int(&denom))
    });
    TruncSeries::from_terms(cutoff, terms)
}

pub fn schur_s(n: i64, cutoff: u32) -> TruncSeries {
    schur_s_in(Bank::T, n, cutoff)
}

static SKEW_CACHE: LazyLock<Mutex<HashMap<(Partition, Partition), TruncSeries>>> = LazyLock::new(Default::default);

/// `S_{λ/μ}(t)` as an exact polynomial in bank `T`, cached.
fn skew_polynomial(lambda: &Partition, mu: &Partition) -> TruncSeries {
    let key = (lambda.clone(), mu.clone());
    if let Some(v) = SKEW_CACHE.lock().unwrap().get(&key) {
        return v.clone();
    }
    let w = lambda.weight() - mu.weight();
    let n = lambda.len();
    let m: Vec<Vec<TruncSeries>> =
        (0..n).map(|i| (0..n).map(|j| schur_s(lambda.part(i) as i64 - mu.part(j) as i64 - i as i64 + j as i64, w)).collect()).collect();
    let v = det_series_expand(&m, w);
    SKEW_CACHE.lock().unwrap().insert(key, v.clone());
    v
}

/// Jacobi–Trudi determinant `det(S_{λ_i − μ_j − i + j})`, zero unless `μ ⊆ λ`.
pub fn skew_schur_in(bank: Bank, lambda: &Partition, mu: &Partition, cutoff: u32) -> TruncSeries {
    if !lambda.contains(mu) || lambda.weight() - mu.weight() > cutoff {
        return TruncSeries::zero(cutoff);
    }
    let poly = skew_polynomial(lambda, mu);
    let poly = if bank == Bank::T { poly } else { poly.map_banks(|_| bank) };
    poly.with_cutoff_exact(cutoff)
}

pub fn skew_schur_s(lambda: &Partition, mu: &Partition, cutoff: u32) -> TruncSeries {
    skew_schur_in(Bank::T, lambda, mu, cutoff)
}

pub fn schur_lambda(lambda: &Partition, cutoff: u32) -> TruncSeries {
    skew_schur_s(lambda, &Partition::empty(), cutoff)
}

/// `S_λ(−t)` in the given bank.
pub fn schur_negated_in(bank: Bank, lambda: &Partition, cutoff: u32) -> TruncSeries {
    let s = skew_schur_in(bank, &lambda.conjugate(), &Partition::empty(), cutoff);
    if lambda.weight().is_multiple_of(2) {
        s
    } else {
        s.neg()
    }
}

/// `s_λ(q^{-ρ}) = q^{n(λ)+|λ|/2} / Π (1 − q^h)` via the q-hook formula.
pub fn principal_spec(lambda: &Partition) -> ExactScalar {
    let hooks = lambda.hooks();
    let hook_sum: i64 = hooks.iter().map(|&h| h as i64).sum();
    let u_exp = -6 * lambda.kappa() + 12 * hook_sum;
    let mut v = ExactScalar::u_pow(u_exp as i32);
    for h in hooks {
        v = v.mul(&ExactScalar::inv_one_minus_q_pow(h));
    }
    v
}

/// Points at which symmetric functions are specialized.
#[derive(Clone, Debug, PartialEq)]
pub enum SpecPoint {
    Finite(Vec<ExactScalar>),
    /// `x_i = q^{i−1/2}`, `i ≥ 1`.
    Principal,
    /// `x_i = c · q^{i−1/2}`.
    ScaledPrincipal(ExactScalar),
}

impl SpecPoint {
    fn scale(&self) -> Option<ExactScalar> {
        match self {
            SpecPoint::Finite(_) => None,
            SpecPoint::Principal => Some(ExactScalar::one()),
            SpecPoint::ScaledPrincipal(c) => Some(c.clone()),
        }
    }
}

/// `1/(q;q)_m`.
fn inv_q_pochhammer(m: u32) -> ExactScalar {
    (1..=m).fold(ExactScalar::one(), |acc, l| acc.mul(&ExactScalar::inv_one_minus_q_pow(l)))
}

/// Complete symmetric function `h_m(x)`.
pub fn h_spec(m: i64, x: &SpecPoint) -> ExactScalar {
    if m < 0 {
        return ExactScalar::zero();
    }
    match x {
        SpecPoint::Finite(xs) => {
            let mut h = vec![ExactScalar::zero(); m as usize + 1];
            h[0] = ExactScalar::one();
            for xi in xs {
                for k in 1..=m as usize {
                    h[k] = h[k].add(&xi.mul(&h[k - 1]));
                }
            }
            h.swap_remove(m as usize)
        }
        _ => {
            let c = x.scale().unwrap();
            c.pow(m as i32).mul(&ExactScalar::q_half_pow(m)).mul(&inv_q_pochhammer(m as u32))
        }
    }
}

/// Elementary symmetric function `e_m(x)`.
pub fn e_spec(m: i64, x: &SpecPoint) -> ExactScalar {
    if m < 0 {
        return ExactScalar::zero();
    }
    match x {
        SpecPoint::Finite(xs) => {
            let mut e = vec![ExactScalar::zero(); m as usize + 1];
            e[0] = ExactScalar::one();
            for xi in xs {
                for k in (1..=m as usize).rev() {
                    e[k] = e[k].add(&xi.mul(&e[k - 1]));
                }
            }
            e.swap_remove(m as usize)
        }
        _ => {
            let c = x.scale().unwrap();
            c.pow(m as i32).mul(&ExactScalar::q_half_pow(m * m)).mul(&inv_q_pochhammer(m as u32))
        }
    }
}

/// `s_{λ/μ}(x)` by the Jacobi–Trudi determinant in `h_m(x)`.
pub fn skew_spec(lambda: &Partition, mu: &Partition, x: &SpecPoint) -> ExactScalar {
    if !lambda.contains(mu) {
        return ExactScalar::zero();
    }
    let n = lambda.len();
    let mut cache: HashMap<i64, ExactScalar> = HashMap::new();
    let m: Vec<Vec<ExactScalar>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = lambda.part(i) as i64 - mu.part(j) as i64 - i as i64 + j as i64;
                    cache.entry(k).or_insert_with(|| h_spec(k, x)).clone()
                })
                .collect()
        })
        .collect();
    det_exact(&m)
}

/// `s_{ᵗλ/ᵗμ}(x)` by the dual Jacobi–Trudi determinant in `e_m(x)`.
pub fn skew_spec_conjugate(lambda: &Partition, mu: &Partition, x: &SpecPoint) -> ExactScalar {
    if !lambda.contains(mu) {
        return ExactScalar::zero();
    }
    let n = lambda.len();
    let m: Vec<Vec<ExactScalar>> =
        (0..n).map(|i| (0..n).map(|j| e_spec(lambda.part(i) as i64 - mu.part(j) as i64 - i as i64 + j as i64, x)).collect()).collect();
    det_exact(&m)
}

/// Value of a power-sum substitution, exact or valid modulo `q^order`.
#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub value: ExactScalar,
    /// `None` when exact.
    pub q_order: Option<i32>,
}

/// Substitutes `t_k = (1/k) Σ x_i^k` into a series in bank `T`.
pub fn power_sum_subst(s: &TruncSeries, x: &SpecPoint, order: Option<i32>) -> Result<QExpansion> {
    if Bank::ALL[1..].iter().any(|b| s.uses_bank(*b)) {
        return Err(Error::InvalidArgument("power-sum substitution expects a series in t only".into()));
    }
    let kmax = s.cutoff().max(1) as i64;
    match x {
        SpecPoint::Finite(xs) => {
            let values: Vec<ExactScalar> = (1..=kmax)
                .map(|k| {
                    let p = ExactScalar::sum_all(xs.iter().map(|xi| xi.pow(k as i32)).collect::<Vec<_>>().iter());
                    p.div_int(&BigInt::from(k))
                })
                .collect();
            Ok(QExpansion { value: s.evaluate_bank(Bank::T, &values).constant_term(), q_order: None })
        }
        _ => {
            let order = order.ok_or_else(|| Error::InvalidArgument("infinite specialization needs an expansion order".into()))?;
            let c = x.scale().unwrap();
            let u_order = order * Q_UNITS;
            let values: Vec<ExactScalar> = (1..=kmax)
                .map(|k| {
                    // Σ_i q^{k(i−1/2)} truncated below q^order
                    let mut terms = Vec::new();
                    let mut i = 1i64;
                    loop {
                        let e = (Q_UNITS as i64 / 2) * k * (2 * i - 1);
                        if e >= u_order as i64 {
                            break;
                        }
                        terms.push(ExactScalar::u_pow(e as i32));
                        i += 1;
                    }
                    ExactScalar::sum_all(terms.iter()).mul(&c.pow(k as i32)).div_int(&BigInt::from(k))
                })
                .collect();
            let v = s.evaluate_bank(Bank::T, &values).constant_term();
            Ok(QExpansion { value: v.series_u(u_order)?, q_order: Some(order) })
        }
    }
}
