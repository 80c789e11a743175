//! Exact rational functions in `u` and `Q`.
//!
//! A value is stored as `num / (den · Π Φ_e(u)^{m_e} · res)` where `num` is a
//! Laurent polynomial, `den` a positive integer, `Φ_e` cyclotomic polynomials and
//! `res` a primitive polynomial with no monomial or cyclotomic factor. The form is
//! fully reduced, so equality is structural. `q = u^24`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use super::cyclo::{cyclotomic, cyclotomic_product, divisors, extract_cyclotomic, maybe_divisible};
use super::gcd::poly_gcd;
use super::poly::Poly;
use crate::error::Error;

/// u-exponent of `q`.
pub const Q_UNITS: i32 = 24;

type CycList = SmallVec<[(u32, u32); 6]>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    num: Poly,
    den: BigInt,
    cyc: CycList,
    res: Poly,
}

impl Default for ExactScalar {
    fn default() -> Self {
        ExactScalar::zero()
    }
}

fn reduce_cyclotomic(num: &mut Poly, cyc: &mut CycList) {
    loop {
        let hits: Vec<u32> = cyc.iter().filter(|(_, m)| *m > 0).map(|(e, _)| *e).filter(|e| maybe_divisible(num, *e)).collect();
        if hits.is_empty() {
            return;
        }
        let mut progressed = false;
        if hits.len() > 1 {
            let d = cyclotomic_product(&hits.iter().map(|e| (*e, 1)).collect::<Vec<_>>());
            if let Some(q) = num.div_exact(&d) {
                *num = q;
                for (e, m) in cyc.iter_mut() {
                    if hits.contains(e) {
                        *m -= 1;
                    }
                }
                progressed = true;
            }
        }
        if !progressed {
            for e in &hits {
                if let Some(q) = num.div_exact(&cyclotomic(*e)) {
                    *num = q;
                    if let Some(entry) = cyc.iter_mut().find(|(x, _)| x == e) {
                        entry.1 -= 1;
                    }
                    progressed = true;
                }
            }
        }
        if !progressed {
            return;
        }
    }
}

fn merge_cyc(a: &CycList, b: &CycList, f: impl Fn(u32, u32) -> u32) -> CycList {
    let mut out = CycList::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push((a[i].0, f(a[i].1, 0)));
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, f(0, b[j].1)));
            j += 1;
        } else {
            out.push((a[i].0, f(a[i].1, b[j].1)));
            i += 1;
            j += 1;
        }
    }
    out.retain(|(_, m)| *m > 0);
    out
}

/// Polynomial cofactor `Π Φ_e^{target - own}`.
fn cyc_cofactor(target: &CycList, own: &CycList) -> Poly {
    let diff: Vec<(u32, u32)> = target
        .iter()
        .filter_map(|(e, m)| {
            let have = own.iter().find(|(x, _)| x == e).map(|(_, k)| *k).unwrap_or(0);
            (*m > have).then_some((*e, m - have))
        })
        .collect();
    cyclotomic_product(&diff)
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar { num: Poly::zero(), den: BigInt::one(), cyc: CycList::new(), res: Poly::one() }
    }

    pub fn one() -> Self {
        ExactScalar::from_poly(Poly::one())
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar::from_poly(Poly::constant(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        ExactScalar::from_poly(Poly::constant(n))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        ExactScalar::from_int(n).div_int(&BigInt::from(d))
    }

    pub fn from_poly(p: Poly) -> Self {
        ExactScalar { num: p, den: BigInt::one(), cyc: CycList::new(), res: Poly::one() }
    }

    /// `u^u_exp · Q^q_exp`.
    pub fn monomial(u_exp: i32, q_exp: i32) -> Self {
        ExactScalar::from_poly(Poly::monomial(u_exp, q_exp, BigInt::one()))
    }

    pub fn u_pow(e: i32) -> Self {
        ExactScalar::monomial(e, 0)
    }

    /// `q^n = u^{24 n}`.
    pub fn q_pow(n: i32) -> Self {
        ExactScalar::monomial(Q_UNITS * n, 0)
    }

    /// `q^{n/2}`.
    pub fn q_half_pow(n: i64) -> Self {
        ExactScalar::u_pow((Q_UNITS as i64 / 2 * n) as i32)
    }

    pub fn big_q() -> Self {
        ExactScalar::monomial(0, 1)
    }

    /// `1 / (1 - u^n)` for `n > 0`, built directly from its cyclotomic factors.
    pub fn inv_one_minus_u_pow(n: u32) -> Self {
        assert!(n > 0);
        let cyc: CycList = divisors(n).into_iter().map(|d| (d, 1)).collect();
        ExactScalar { num: Poly::constant(BigInt::from(-1)), den: BigInt::one(), cyc, res: Poly::one() }
    }

    /// `1 / (1 - q^n)`.
    pub fn inv_one_minus_q_pow(n: u32) -> Self {
        ExactScalar::inv_one_minus_u_pow(Q_UNITS as u32 * n)
    }

    /// `1 - u^n`.
    pub fn one_minus_u_pow(n: i32) -> Self {
        ExactScalar::one() - ExactScalar::u_pow(n)
    }

    fn normalize(mut num: Poly, mut den: BigInt, mut cyc: CycList, mut res: Poly) -> Self {
        if num.is_zero() {
            return ExactScalar::zero();
        }
        if !res.is_one() {
            let g = poly_gcd(&num, &res);
            if !g.is_one() {
                num = num.div_exact(&g).expect("gcd divides numerator");
                res = res.div_exact(&g).expect("gcd divides residual");
            }
        }
        reduce_cyclotomic(&mut num, &mut cyc);
        cyc.retain(|(_, m)| *m > 0);
        let c = num.content();
        let g = c.gcd(&den);
        if !g.is_one() {
            num = num.div_int_exact(&g);
            den /= &g;
        }
        if !res.is_one() {
            let rc = res.content();
            if !rc.is_one() {
                res = res.div_int_exact(&rc);
                den *= rc;
            }
        }
        ExactScalar { num, den, cyc, res }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.is_polynomial()
    }

    /// Denominator is 1.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one() && self.cyc.is_empty() && self.res.is_one()
    }

    /// Denominator is an integer.
    pub fn is_laurent(&self) -> bool {
        self.cyc.is_empty() && self.res.is_one()
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn integer_denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn cyclotomic_factors(&self) -> &[(u32, u32)] {
        &self.cyc
    }

    pub fn residual_denominator(&self) -> &Poly {
        &self.res
    }

    /// Expanded denominator polynomial.
    pub fn denominator(&self) -> Poly {
        cyclotomic_product(&self.cyc).mul(&self.res).scale(&self.den)
    }

    /// `(c_num, c_den, u_exp, q_exp)` when the value is `c · u^a Q^b`.
    pub fn as_monomial(&self) -> Option<(BigInt, BigInt, i32, i32)> {
        if !self.is_laurent() {
            return None;
        }
        self.num.as_monomial().map(|(u, q, c)| (c.clone(), self.den.clone(), u, q))
    }

    /// `Some((u_exp, q_exp))` when the value is exactly `u^a Q^b`.
    pub fn as_unit_monomial(&self) -> Option<(i32, i32)> {
        match self.as_monomial() {
            Some((c, d, u, q)) if c.is_one() && d.is_one() => Some((u, q)),
            _ => None,
        }
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        match self.as_monomial() {
            Some((c, d, 0, 0)) if d.is_one() => Some(c),
            _ if self.is_zero() => Some(BigInt::zero()),
            _ => None,
        }
    }

    pub fn neg(&self) -> Self {
        ExactScalar { num: self.num.neg(), den: self.den.clone(), cyc: self.cyc.clone(), res: self.res.clone() }
    }

    pub fn scale_int(&self, c: &BigInt) -> Self {
        if c.is_zero() || self.is_zero() {
            return ExactScalar::zero();
        }
        let g = c.gcd(&self.den);
        ExactScalar { num: self.num.scale(&(c / &g)), den: &self.den / &g, cyc: self.cyc.clone(), res: self.res.clone() }
    }

    pub fn div_int(&self, c: &BigInt) -> Self {
        assert!(!c.is_zero(), "division by zero");
        if self.is_zero() {
            return ExactScalar::zero();
        }
        let g = self.num.content().gcd(c);
        let mut num = self.num.div_int_exact(&g);
        let mut d = c / &g;
        if d.is_negative() {
            d = -d;
            num = num.neg();
        }
        ExactScalar { num, den: &self.den * d, cyc: self.cyc.clone(), res: self.res.clone() }
    }

    /// Multiplies by `u^du Q^dq`.
    pub fn shift(&self, du: i32, dq: i32) -> Self {
        ExactScalar { num: self.num.shift(du, dq), den: self.den.clone(), cyc: self.cyc.clone(), res: self.res.clone() }
    }

    fn add_impl(&self, other: &ExactScalar, negate: bool) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { other.neg() } else { other.clone() };
        }
        if self.den == other.den && self.cyc == other.cyc && self.res == other.res {
            let num = if negate { self.num.sub(&other.num) } else { self.num.add(&other.num) };
            return ExactScalar::normalize(num, self.den.clone(), self.cyc.clone(), self.res.clone());
        }
        let den = self.den.lcm(&other.den);
        let cyc = merge_cyc(&self.cyc, &other.cyc, |a, b| a.max(b));
        let (res, ra, rb) = if self.res == other.res {
            (self.res.clone(), Poly::one(), Poly::one())
        } else if self.res.is_one() {
            (other.res.clone(), other.res.clone(), Poly::one())
        } else if other.res.is_one() {
            (self.res.clone(), Poly::one(), self.res.clone())
        } else {
            let g = poly_gcd(&self.res, &other.res);
            let ra = other.res.div_exact(&g).expect("gcd divides");
            let rb = self.res.div_exact(&g).expect("gcd divides");
            (self.res.mul(&ra), ra, rb)
        };
        let fa = cyc_cofactor(&cyc, &self.cyc).mul(&ra).scale(&(&den / &self.den));
        let fb = cyc_cofactor(&cyc, &other.cyc).mul(&rb).scale(&(&den / &other.den));
        let a = self.num.mul(&fa);
        let b = other.num.mul(&fb);
        let num = if negate { a.sub(&b) } else { a.add(&b) };
        ExactScalar::normalize(num, den, cyc, res)
    }

    pub fn add(&self, other: &ExactScalar) -> Self {
        self.add_impl(other, false)
    }

    pub fn sub(&self, other: &ExactScalar) -> Self {
        self.add_impl(other, true)
    }

    /// Sums over a single common denominator.
    pub fn sum_all<'a, I: IntoIterator<Item = &'a ExactScalar>>(items: I) -> Self {
        let items: Vec<&ExactScalar> = items.into_iter().filter(|x| !x.is_zero()).collect();
        match items.len() {
            0 => return ExactScalar::zero(),
            1 => return items[0].clone(),
            _ => {}
        }
        if items.iter().any(|x| !x.res.is_one()) {
            return items.iter().fold(ExactScalar::zero(), |acc, x| ExactScalar::add(&acc, x));
        }
        let mut den = BigInt::one();
        let mut cyc = CycList::new();
        for x in &items {
            den = den.lcm(&x.den);
            cyc = merge_cyc(&cyc, &x.cyc, |a, b| a.max(b));
        }
        let mut num = Poly::zero();
        for x in &items {
            let f = cyc_cofactor(&cyc, &x.cyc).scale(&(&den / &x.den));
            num = num.add(&x.num.mul(&f));
        }
        ExactScalar::normalize(num, den, cyc, Poly::one())
    }

    pub fn mul(&self, other: &ExactScalar) -> Self {
        if self.is_zero() || other.is_zero() {
            return ExactScalar::zero();
        }
        if other.is_polynomial() && other.num.len() == 1 {
            return self.mul_monomial_poly(&other.num);
        }
        if self.is_polynomial() && self.num.len() == 1 {
            return other.mul_monomial_poly(&self.num);
        }
        let mut an = self.num.clone();
        let mut bn = other.num.clone();
        let mut acyc = self.cyc.clone();
        let mut bcyc = other.cyc.clone();
        reduce_cyclotomic(&mut an, &mut bcyc);
        reduce_cyclotomic(&mut bn, &mut acyc);
        let cyc = merge_cyc(&acyc, &bcyc, |a, b| a + b);
        let num = an.mul(&bn);
        let den = &self.den * &other.den;
        let res = self.res.mul(&other.res);
        if res.is_one() {
            let c = num.content();
            let g = c.gcd(&den);
            let (num, den) = if g.is_one() { (num, den) } else { (num.div_int_exact(&g), den / &g) };
            return ExactScalar { num, den, cyc, res };
        }
        ExactScalar::normalize(num, den, cyc, res)
    }

    fn mul_monomial_poly(&self, m: &Poly) -> Self {
        let (u, q, c) = m.as_monomial().expect("monomial");
        let g = c.gcd(&self.den);
        let mut num = self.num.shift(u, q).scale(&(c / &g));
        let mut den = &self.den / &g;
        if den.is_negative() {
            den = -den;
            num = num.neg();
        }
        ExactScalar { num, den, cyc: self.cyc.clone(), res: self.res.clone() }
    }

    pub fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (mu, mq) = self.num.monomial_floor();
        let mut p = self.num.shift(-mu, -mq);
        let c = p.content();
        p = p.div_int_exact(&c);
        let sign = if p.is_positive_leading() { BigInt::one() } else { -BigInt::one() };
        if sign.is_negative() {
            p = p.neg();
        }
        let (factors, rest) = if p.len() == 1 { (Vec::new(), p) } else { extract_cyclotomic(&p) };
        let new_num = cyclotomic_product(&self.cyc).mul(&self.res).scale(&(&self.den * &sign)).shift(-mu, -mq);
        Ok(ExactScalar { num: new_num, den: c, cyc: factors.into_iter().collect(), res: rest })
    }

    pub fn checked_div(&self, other: &ExactScalar) -> Result<Self, Error> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: i32) -> Self {
        if n < 0 {
            return self.inv().expect("negative power of zero").pow(-n);
        }
        let mut result = ExactScalar::one();
        let mut base = self.clone();
        let mut n = n as u32;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = ExactScalar::mul(&base, &base);
            }
        }
        result
    }

    /// Lowest u-exponent of the numerator; the denominator has u-valuation 0.
    pub fn u_valuation(&self) -> Option<i32> {
        self.num.min_u()
    }

    /// Lowest Q-exponent, when the denominator does not involve `Q`.
    pub fn q_valuation(&self) -> Option<i32> {
        self.num.min_q()
    }

    /// True when the denominator is free of `Q`.
    pub fn q_free_denominator(&self) -> bool {
        self.res.is_univariate_u()
    }

    /// Coefficient of `Q^k`. Requires a Q-free denominator.
    pub fn q_coefficient(&self, k: i32) -> Result<ExactScalar, Error> {
        if !self.q_free_denominator() {
            return Err(Error::QDependentDenominator);
        }
        Ok(ExactScalar::normalize(self.num.q_coefficient(k), self.den.clone(), self.cyc.clone(), self.res.clone()))
    }

    /// Drops `Q^k` for `k > max_q`. Requires a Q-free denominator.
    pub fn truncate_q(&self, max_q: i32) -> Result<ExactScalar, Error> {
        if !self.q_free_denominator() {
            return Err(Error::QDependentDenominator);
        }
        Ok(ExactScalar::normalize(self.num.truncate_q(max_q), self.den.clone(), self.cyc.clone(), self.res.clone()))
    }

    /// Power-series expansion in `u` modulo `u^order`.
    ///
    /// The denominator must be a unit at `u = 0`, which holds for every
    /// cyclotomic factor.
    pub fn series_u(&self, order: i32) -> Result<ExactScalar, Error> {
        if self.is_zero() {
            return Ok(ExactScalar::zero());
        }
        let d = cyclotomic_product(&self.cyc).mul(&self.res);
        if !d.is_univariate_u() {
            return Err(Error::QDependentDenominator);
        }
        let d0 = d.coeff(0, 0);
        if !(d0.is_one() || d0 == -BigInt::one()) {
            return Err(Error::NonUnitConstant);
        }
        let val = self.num.min_u().unwrap();
        let n = (order - val).max(0) as usize;
        let mut dense = vec![BigInt::zero(); n];
        for ((_, u), c) in d.terms() {
            if (*u as usize) < n {
                dense[*u as usize] = c.clone();
            }
        }
        // inverse power series of d, d0 = ±1
        let mut inv = vec![BigInt::zero(); n];
        for i in 0..n {
            let mut acc = if i == 0 { BigInt::one() } else { BigInt::zero() };
            for j in 1..=i {
                if !dense[j].is_zero() && !inv[i - j].is_zero() {
                    acc -= &dense[j] * &inv[i - j];
                }
            }
            inv[i] = acc * &d0;
        }
        let inv_poly = Poly::from_terms(inv.into_iter().enumerate().map(|(i, c)| ((0, i as i32), c)));
        let num = self.num.mul(&inv_poly).truncate_u(order);
        Ok(ExactScalar::normalize(num, self.den.clone(), CycList::new(), Poly::one()))
    }

    /// Substitutes `Q -> Q^b` and `u -> u^a`. Both must be nonzero.
    pub fn rescale_exponents(&self, a: i32, b: i32) -> ExactScalar {
        assert!(a != 0 && b != 0);
        let num = self.num.rescale_exponents(a, b);
        let den = self.denominator().rescale_exponents(a, b);
        ExactScalar::from_poly(num).checked_div(&ExactScalar::from_poly(den)).expect("nonzero denominator")
    }

    /// Substitutes `Q = value`.
    pub fn substitute_q(&self, value: &ExactScalar) -> ExactScalar {
        let eval = |p: &Poly| -> ExactScalar {
            let mut total = Vec::new();
            for (k, class) in p.q_classes() {
                let coeff = ExactScalar::from_poly(Poly::from_terms(class.iter().map(|((_, u), c)| ((0, *u), c.clone()))));
                total.push(coeff.mul(&value.pow(k)));
            }
            ExactScalar::sum_all(total.iter())
        };
        let n = eval(&self.num);
        let d = eval(&self.denominator());
        n.checked_div(&d).expect("substituted denominator vanishes")
    }

    pub fn to_f64_at(&self, u: f64, q: f64) -> f64 {
        let ev = |p: &Poly| -> f64 { p.terms().iter().map(|((qe, ue), c)| c.to_f64().unwrap_or(f64::NAN) * u.powi(*ue) * q.powi(*qe)).sum() };
        ev(&self.num) / ev(&self.denominator())
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            return write!(f, "{}", self.num);
        }
        let num = if self.num.len() == 1 { format!("{}", self.num) } else { format!("({})", self.num) };
        let den = self.denominator();
        if den.len() == 1 {
            write!(f, "{num}/{den}")
        } else {
            write!(f, "{num}/({den})")
        }
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::from_int(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl $tr<&ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                ExactScalar::$imp(self, rhs)
            }
        }
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar::$imp(&self, &rhs)
            }
        }
        impl $tr<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                ExactScalar::$imp(&self, rhs)
            }
        }
        impl $tr<ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar::$imp(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

fn div_panicking(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    a.checked_div(b).expect("division by zero")
}

impl Div<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        div_panicking(self, rhs)
    }
}

impl Div<ExactScalar> for ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: ExactScalar) -> ExactScalar {
        div_panicking(&self, &rhs)
    }
}

impl Div<&ExactScalar> for ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        div_panicking(&self, rhs)
    }
}

impl Div<ExactScalar> for &ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: ExactScalar) -> ExactScalar {
        div_panicking(self, &rhs)
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::neg(&self)
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::neg(self)
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        *self = ExactScalar::add(self, rhs);
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        *self = ExactScalar::sub(self, rhs);
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, rhs: &ExactScalar) {
        *self = ExactScalar::mul(self, rhs);
    }
}

impl Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        let items: Vec<ExactScalar> = iter.collect();
        ExactScalar::sum_all(items.iter())
    }
}

impl<'a> Sum<&'a ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        ExactScalar::sum_all(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> ExactScalar {
        ExactScalar::u_pow(1)
    }

    #[test]
    fn geometric_reduction() {
        // (1 + u^12) / (1 - u^24) = 1 / (1 - u^12)
        let lhs = (ExactScalar::one() + ExactScalar::u_pow(12)) * ExactScalar::inv_one_minus_u_pow(24);
        assert_eq!(lhs, ExactScalar::inv_one_minus_u_pow(12));
        assert_eq!(lhs.to_string(), "-1/(u^12 - 1)");
    }

    #[test]
    fn inverse_of_binomial_matches_direct() {
        let x = ExactScalar::one_minus_u_pow(24);
        assert_eq!(x.inv().unwrap(), ExactScalar::inv_one_minus_u_pow(24));
        assert!((&x * &x.inv().unwrap()).is_one());
    }

    #[test]
    fn residual_denominators_cancel() {
        let q = ExactScalar::big_q();
        let a = ExactScalar::one() + &q;
        let b = (&a * &u()) / &a;
        assert_eq!(b, u());
        let c = ExactScalar::one() / &a + &q / &a;
        assert!(c.is_one());
    }

    #[test]
    fn series_expansion() {
        let x = ExactScalar::u_pow(12) * ExactScalar::inv_one_minus_u_pow(24);
        let s = x.series_u(80).unwrap();
        let expect = ExactScalar::u_pow(12) + ExactScalar::u_pow(36) + ExactScalar::u_pow(60);
        assert_eq!(s, expect);
    }

    #[test]
    fn integer_content_reduced() {
        let x = ExactScalar::from_int(6).div_int(&BigInt::from(4));
        assert_eq!(x, ExactScalar::from_ratio(3, 2));
        assert_eq!(x.to_string(), "3/2");
    }

    #[test]
    fn determinant_example_value() {
        let v = &u() * &u() - ExactScalar::one();
        assert_eq!(v.to_string(), "u^2 - 1");
    }
}
