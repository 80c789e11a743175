//! Sparse Laurent polynomials in `u` and `Q` with big-integer coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Exponent pair `(Q power, u power)`. Terms are kept sorted by this key.
pub type Exp = (i32, i32);

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Exp, BigInt)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Poly::monomial(0, 0, c)
    }

    /// `c * u^u_exp * Q^q_exp`.
    pub fn monomial(u_exp: i32, q_exp: i32, c: BigInt) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![((q_exp, u_exp), c)] }
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (Exp, BigInt)>>(iter: I) -> Self {
        let mut acc: BTreeMap<Exp, BigInt> = BTreeMap::new();
        for (e, c) in iter {
            *acc.entry(e).or_insert_with(BigInt::zero) += c;
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Univariate polynomial in `u` from dense coefficients starting at `u^0`.
    pub fn from_dense_u(coeffs: &[i64]) -> Self {
        Poly { terms: coeffs.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, c)| ((0, i as i32), BigInt::from(*c))).collect() }
    }

    pub fn terms(&self) -> &[(Exp, BigInt)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Exp, BigInt)> {
        self.terms
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

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == (0, 0) && self.terms[0].1.is_one()
    }

    /// Single term, if the polynomial is a monomial.
    pub fn as_monomial(&self) -> Option<(i32, i32, &BigInt)> {
        match self.terms.as_slice() {
            [((q, u), c)] => Some((*u, *q, c)),
            _ => None,
        }
    }

    pub fn coeff(&self, u_exp: i32, q_exp: i32) -> BigInt {
        match self.terms.binary_search_by(|(e, _)| e.cmp(&(q_exp, u_exp))) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => BigInt::zero(),
        }
    }

    pub fn is_univariate_u(&self) -> bool {
        self.terms.iter().all(|((q, _), _)| *q == 0)
    }

    pub fn min_u(&self) -> Option<i32> {
        self.terms.iter().map(|((_, u), _)| *u).min()
    }

    pub fn max_u(&self) -> Option<i32> {
        self.terms.iter().map(|((_, u), _)| *u).max()
    }

    pub fn min_q(&self) -> Option<i32> {
        self.terms.first().map(|((q, _), _)| *q)
    }

    pub fn max_q(&self) -> Option<i32> {
        self.terms.last().map(|((q, _), _)| *q)
    }

    /// Smallest u-degree span over the Q-classes.
    pub fn min_class_u_span(&self) -> i32 {
        let mut best = i32::MAX;
        for (_, class) in self.q_classes() {
            let lo = class.first().map(|((_, u), _)| *u).unwrap_or(0);
            let hi = class.last().map(|((_, u), _)| *u).unwrap_or(0);
            best = best.min(hi - lo);
        }
        if best == i32::MAX {
            0
        } else {
            best
        }
    }

    /// Terms grouped by Q exponent, each group sorted by u exponent.
    pub fn q_classes(&self) -> impl Iterator<Item = (i32, &[(Exp, BigInt)])> {
        let terms = &self.terms;
        let mut start = 0;
        std::iter::from_fn(move || {
            if start >= terms.len() {
                return None;
            }
            let q = terms[start].0 .0;
            let mut end = start;
            while end < terms.len() && terms[end].0 .0 == q {
                end += 1;
            }
            let slice = &terms[start..end];
            start = end;
            Some((q, slice))
        })
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.merge(other, true)
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                out.push((b[j].0, c));
                j += 1;
            } else {
                let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        Poly { terms: out }
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect() }
    }

    /// Multiplies by `u^du * Q^dq`.
    pub fn shift(&self, du: i32, dq: i32) -> Poly {
        Poly { terms: self.terms.iter().map(|((q, u), c)| ((q + dq, u + du), c.clone())).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some((u, q, c)) = other.as_monomial() {
            return self.shift(u, q).scale(c);
        }
        if let Some((u, q, c)) = self.as_monomial() {
            return other.shift(u, q).scale(c);
        }
        self.mul_small(other).unwrap_or_else(|| self.mul_sparse(other))
    }

    fn mul_sparse(&self, other: &Poly) -> Poly {
        let mut acc: HashMap<Exp, BigInt> = HashMap::with_capacity(self.len() * other.len());
        for ((qa, ua), ca) in &self.terms {
            for ((qb, ub), cb) in &other.terms {
                let e = (qa + qb, ua + ub);
                match acc.get_mut(&e) {
                    Some(v) => *v += ca * cb,
                    None => {
                        acc.insert(e, ca * cb);
                    }
                }
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|a| a.0);
        Poly { terms }
    }

    /// Dense `i128` product when coefficients and exponent spans are small enough
    /// that no accumulator can overflow.
    fn mul_small(&self, other: &Poly) -> Option<Poly> {
        let bits = |p: &Poly| p.terms.iter().map(|(_, c)| c.bits()).max().unwrap_or(0);
        let (ba, bb) = (bits(self), bits(other));
        let n = self.len().min(other.len()) as u64;
        if ba > 62 || bb > 62 || ba + bb + 64 - n.leading_zeros() as u64 > 126 {
            return None;
        }
        let span = |p: &Poly| {
            let (qlo, qhi) = (p.terms.first()?.0 .0, p.terms.last()?.0 .0);
            let ulo = p.terms.iter().map(|(e, _)| e.1).min()?;
            let uhi = p.terms.iter().map(|(e, _)| e.1).max()?;
            Some((qlo, qhi, ulo, uhi))
        };
        let (qa0, qa1, ua0, ua1) = span(self)?;
        let (qb0, qb1, ub0, ub1) = span(other)?;
        let (q0, u0) = (qa0 + qb0, ua0 + ub0);
        let width = (ua1 + ub1 - u0 + 1) as usize;
        let height = (qa1 + qb1 - q0 + 1) as usize;
        if width.checked_mul(height)? > 1 << 22 {
            return None;
        }
        let flat = |p: &Poly, q0: i32, u0: i32| -> Vec<(usize, i128)> {
            p.terms.iter().map(|((q, u), c)| ((q - q0) as usize * width + (u - u0) as usize, i128::try_from(c).expect("bits checked"))).collect()
        };
        let (a, b) = (flat(self, qa0, ua0), flat(other, qb0, ub0));
        let mut acc = vec![0i128; width * height];
        for (ia, ca) in &a {
            for (ib, cb) in &b {
                acc[ia + ib] += ca * cb;
            }
        }
        let terms = acc
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != 0)
            .map(|(i, c)| (((i / width) as i32 + q0, (i % width) as i32 + u0), BigInt::from(c)))
            .collect();
        Some(Poly { terms })
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Gcd of the coefficients, nonnegative.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn div_int_exact(&self, c: &BigInt) -> Poly {
        if c.is_one() {
            return self.clone();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, x)| {
                    debug_assert!((x % c).is_zero());
                    (*e, x / c)
                })
                .collect(),
        }
    }

    /// Componentwise minimum exponents `(u, Q)`; the largest monomial dividing all terms.
    pub fn monomial_floor(&self) -> (i32, i32) {
        let mut mu = i32::MAX;
        let mut mq = i32::MAX;
        for ((q, u), _) in &self.terms {
            mu = mu.min(*u);
            mq = mq.min(*q);
        }
        if self.is_zero() {
            (0, 0)
        } else {
            (mu, mq)
        }
    }

    /// Term that is largest under graded-lex order with `u < Q`.
    pub fn grlex_leading(&self) -> Option<&(Exp, BigInt)> {
        self.terms.iter().max_by(|a, b| {
            let ((qa, ua), _) = a;
            let ((qb, ub), _) = b;
            (qa + ua, qa).cmp(&(qb + ub, qb))
        })
    }

    /// Drops every term with u-exponent `>= order`.
    pub fn truncate_u(&self, order: i32) -> Poly {
        Poly { terms: self.terms.iter().filter(|((_, u), _)| *u < order).cloned().collect() }
    }

    /// Drops every term with Q-exponent `> max_q`.
    pub fn truncate_q(&self, max_q: i32) -> Poly {
        Poly { terms: self.terms.iter().filter(|((q, _), _)| *q <= max_q).cloned().collect() }
    }

    /// Coefficient of `Q^k` as a polynomial in `u`.
    pub fn q_coefficient(&self, k: i32) -> Poly {
        Poly { terms: self.terms.iter().filter(|((q, _), _)| *q == k).map(|((_, u), c)| ((0, *u), c.clone())).collect() }
    }

    /// Substitutes `u -> u^a`, `Q -> Q^b`.
    pub fn rescale_exponents(&self, a: i32, b: i32) -> Poly {
        Poly::from_terms(self.terms.iter().map(|((q, u), c)| ((q * b, u * a), c.clone())))
    }

    /// Exact division. Returns `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some((u, q, c)) = d.as_monomial() {
            if self.terms.iter().any(|(_, x)| !(x % c).is_zero()) {
                return None;
            }
            return Some(Poly { terms: self.terms.iter().map(|((qq, uu), x)| ((qq - q, uu - u), x / c)).collect() });
        }
        let (d_lead, d_lc) = d.terms.last().map(|(e, c)| (*e, c.clone()))?;
        let d_low = d.terms[0].0;
        let a_low = self.terms[0].0;
        let floor = (a_low.0 - d_low.0, a_low.1 - d_low.1);
        let mut rem: BTreeMap<Exp, BigInt> = self.terms.iter().cloned().collect();
        let mut quot: Vec<(Exp, BigInt)> = Vec::new();
        while let Some((&lead, lc)) = rem.iter().next_back() {
            let qe = (lead.0 - d_lead.0, lead.1 - d_lead.1);
            if qe < floor {
                return None;
            }
            let (qc, r) = lc.div_rem(&d_lc);
            if !r.is_zero() {
                return None;
            }
            for ((dq, du), dc) in &d.terms {
                let e = (qe.0 + dq, qe.1 + du);
                let entry = rem.entry(e).or_insert_with(BigInt::zero);
                *entry -= &qc * dc;
                if entry.is_zero() {
                    rem.remove(&e);
                }
            }
            quot.push((qe, qc));
        }
        quot.reverse();
        Some(Poly { terms: quot })
    }

    pub fn is_positive_leading(&self) -> bool {
        self.grlex_leading().map(|(_, c)| c.is_positive()).unwrap_or(true)
    }
}

fn write_var(f: &mut fmt::Formatter<'_>, name: &str, e: i32, first: &mut bool) -> fmt::Result {
    if e == 0 {
        return Ok(());
    }
    if !*first {
        write!(f, "*")?;
    }
    *first = false;
    if e == 1 {
        write!(f, "{name}")
    } else {
        write!(f, "{name}^{e}")
    }
}

impl fmt::Display for Poly {
    /// Graded-lex descending, `Q` before `u`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut order: Vec<&(Exp, BigInt)> = self.terms.iter().collect();
        order.sort_by(|a, b| {
            let ((qa, ua), _) = a;
            let ((qb, ub), _) = b;
            (qb + ub, qb).cmp(&(qa + ua, qa))
        });
        for (idx, ((q, u), c)) in order.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = *q == 0 && *u == 0;
            let mut first = true;
            if !mag.is_one() || is_const {
                write!(f, "{mag}")?;
                first = false;
            }
            write_var(f, "Q", *q, &mut first)?;
            write_var(f, "u", *u, &mut first)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_poly(max_coeff: i64) -> impl Strategy<Value = Poly> {
        proptest::collection::vec((-30i32..30, -3i32..4, -max_coeff..=max_coeff), 0..12)
            .prop_map(|t| Poly::from_terms(t.into_iter().map(|(u, q, c)| ((q, u), BigInt::from(c)))))
    }

    proptest! {
        #[test]
        fn dense_and_sparse_products_agree(a in arb_poly(1 << 40), b in arb_poly(1 << 40)) {
            prop_assert_eq!(a.mul(&b), a.mul_sparse(&b));
        }

        #[test]
        fn huge_coefficients_take_the_sparse_path(a in arb_poly(5), k in 60u32..70) {
            let big = Poly::constant(BigInt::from(3).pow(k)).add(&Poly::monomial(1, 0, BigInt::one()));
            prop_assert_eq!(a.mul(&big), a.mul_sparse(&big));
        }
    }

    fn p(terms: &[(i32, i32, i64)]) -> Poly {
        Poly::from_terms(terms.iter().map(|(u, q, c)| ((*q, *u), BigInt::from(*c))))
    }

    #[test]
    fn arithmetic_and_division() {
        let a = p(&[(1, 0, 1), (0, 0, -1)]); // u - 1
        let b = p(&[(1, 0, 1), (0, 0, 1)]); // u + 1
        let prod = a.mul(&b);
        assert_eq!(prod, p(&[(2, 0, 1), (0, 0, -1)]));
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(p(&[(2, 0, 1), (0, 0, 1)]).div_exact(&a), None);
        assert_eq!(a.add(&b), p(&[(1, 0, 2)]));
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn laurent_division_terminates() {
        let one = Poly::one();
        let d = p(&[(0, 0, 1), (1, 0, -1)]);
        assert_eq!(one.div_exact(&d), None);
    }

    #[test]
    fn bivariate_division() {
        let a = p(&[(1, 0, 1), (0, 1, 1)]); // u + Q
        let b = p(&[(2, 0, 1), (-1, 1, 3), (0, 0, 2)]);
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&b), Some(a));
    }

    #[test]
    fn display_is_graded() {
        let a = p(&[(0, 1, 2), (3, 0, -1), (0, 0, 1)]);
        assert_eq!(a.to_string(), "-u^3 + 2*Q + 1");
    }
}
