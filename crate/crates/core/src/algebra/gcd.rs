//! Polynomial gcd in `Z[u, Q]` via primitive remainder sequences.
//!
//! Only reached when a denominator picks up a factor that is neither a
//! monomial nor cyclotomic in `u`; inputs there are small.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::Poly;

type UPoly = Vec<BigInt>;
type BPoly = Vec<UPoly>;

fn trim(a: &mut UPoly) {
    while a.last().map(|c| c.is_zero()).unwrap_or(false) {
        a.pop();
    }
}

fn u_content(a: &UPoly) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn u_scale(a: &UPoly, c: &BigInt) -> UPoly {
    let mut out: UPoly = a.iter().map(|x| x * c).collect();
    trim(&mut out);
    out
}

fn u_mul(a: &UPoly, b: &UPoly) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn u_sub(a: &UPoly, b: &UPoly) -> UPoly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_default();
        let y = b.get(i).cloned().unwrap_or_default();
        out.push(x - y);
    }
    trim(&mut out);
    out
}

fn u_shift(a: &UPoly, k: usize) -> UPoly {
    if a.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); k];
    out.extend(a.iter().cloned());
    out
}

fn u_primitive(a: &UPoly) -> UPoly {
    let c = u_content(a);
    if c.is_zero() || c.is_one() {
        let mut out = a.clone();
        if out.last().map(|x| x.is_negative()).unwrap_or(false) {
            out = out.iter().map(|x| -x).collect();
        }
        return out;
    }
    let sign = if a.last().unwrap().is_negative() { -c.clone() } else { c.clone() };
    a.iter().map(|x| x / &sign).collect()
}

fn u_prem(a: &UPoly, b: &UPoly) -> UPoly {
    let mut r = a.clone();
    let lb = b.last().unwrap().clone();
    let db = b.len() - 1;
    while !r.is_empty() && r.len() > db {
        let lr = r.last().unwrap().clone();
        let k = r.len() - 1 - db;
        let t = u_shift(&u_scale(b, &lr), k);
        r = u_sub(&u_scale(&r, &lb), &t);
    }
    r
}

fn u_gcd(a: &UPoly, b: &UPoly) -> UPoly {
    if a.is_empty() {
        return u_primitive(b).iter().map(|x| x * u_content(b)).collect();
    }
    if b.is_empty() {
        return u_primitive(a).iter().map(|x| x * u_content(a)).collect();
    }
    let c = u_content(a).gcd(&u_content(b));
    let (mut x, mut y) = if a.len() >= b.len() { (u_primitive(a), u_primitive(b)) } else { (u_primitive(b), u_primitive(a)) };
    while !y.is_empty() {
        let r = u_prem(&x, &y);
        x = y;
        y = if r.is_empty() { r } else { u_primitive(&r) };
    }
    u_scale(&u_primitive(&x), &c)
}

fn u_div_exact(a: &UPoly, b: &UPoly) -> Option<UPoly> {
    if a.is_empty() {
        return Some(Vec::new());
    }
    if a.len() < b.len() {
        return None;
    }
    let mut r = a.clone();
    let db = b.len() - 1;
    let lb = b.last().unwrap();
    let mut q = vec![BigInt::zero(); a.len() - db];
    while !r.is_empty() && r.len() > db {
        let (c, rem) = r.last().unwrap().div_rem(lb);
        if !rem.is_zero() {
            return None;
        }
        let k = r.len() - 1 - db;
        q[k] = c.clone();
        r = u_sub(&r, &u_shift(&u_scale(b, &c), k));
    }
    if r.is_empty() {
        trim(&mut q);
        Some(q)
    } else {
        None
    }
}

fn b_trim(a: &mut BPoly) {
    while a.last().map(|c| c.is_empty()).unwrap_or(false) {
        a.pop();
    }
}

fn b_content(a: &BPoly) -> UPoly {
    let mut g: UPoly = Vec::new();
    for c in a {
        g = u_gcd(&g, c);
    }
    g
}

fn b_primitive(a: &BPoly) -> BPoly {
    let c = b_content(a);
    let c = u_primitive(&c);
    let mut out: BPoly = a.iter().map(|x| u_div_exact(x, &c).expect("content divides")).collect();
    b_trim(&mut out);
    out
}

fn b_prem(a: &BPoly, b: &BPoly) -> BPoly {
    let mut r = a.clone();
    let lb = b.last().unwrap().clone();
    let db = b.len() - 1;
    while !r.is_empty() && r.len() > db {
        let lr = r.last().unwrap().clone();
        let k = r.len() - 1 - db;
        let mut next: BPoly = r.iter().map(|x| u_mul(x, &lb)).collect();
        for (j, bj) in b.iter().enumerate() {
            let t = u_mul(bj, &lr);
            next[j + k] = u_sub(&next[j + k], &t);
        }
        b_trim(&mut next);
        r = next;
    }
    r
}

fn to_bpoly(p: &Poly) -> BPoly {
    let (mu, mq) = p.monomial_floor();
    let mut out: BPoly = Vec::new();
    for ((q, u), c) in p.terms() {
        let qi = (q - mq) as usize;
        let ui = (u - mu) as usize;
        if out.len() <= qi {
            out.resize(qi + 1, Vec::new());
        }
        if out[qi].len() <= ui {
            out[qi].resize(ui + 1, BigInt::zero());
        }
        out[qi][ui] = c.clone();
    }
    out
}

fn from_bpoly(b: &BPoly) -> Poly {
    let mut terms = Vec::new();
    for (qi, col) in b.iter().enumerate() {
        for (ui, c) in col.iter().enumerate() {
            if !c.is_zero() {
                terms.push(((qi as i32, ui as i32), c.clone()));
            }
        }
    }
    Poly::from_terms(terms)
}

/// Strips the monomial factor and the integer content, and fixes the sign so the
/// graded-lex leading coefficient is positive.
pub fn normalize_primitive(p: &Poly) -> Poly {
    if p.is_zero() {
        return Poly::zero();
    }
    let (mu, mq) = p.monomial_floor();
    let p = p.shift(-mu, -mq);
    let c = p.content();
    let p = p.div_int_exact(&c);
    if p.is_positive_leading() {
        p
    } else {
        p.neg()
    }
}

/// Primitive gcd of two nonzero Laurent polynomials, up to monomial units.
pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return normalize_primitive(b);
    }
    if b.is_zero() {
        return normalize_primitive(a);
    }
    let mut x = to_bpoly(a);
    let mut y = to_bpoly(b);
    let cont = u_gcd(&b_content(&x), &b_content(&y));
    x = b_primitive(&x);
    y = b_primitive(&y);
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    while !y.is_empty() {
        let r = b_prem(&x, &y);
        x = y;
        y = if r.is_empty() { r } else { b_primitive(&r) };
    }
    let g: BPoly = b_primitive(&x).iter().map(|c| u_mul(c, &cont)).collect();
    normalize_primitive(&from_bpoly(&g))
}
