//! Cyclotomic polynomials in `u` and a modular divisibility filter.
//!
//! `Φ_e(u)` divides a polynomial exactly when the polynomial vanishes at a
//! primitive e-th root of unity. The filter evaluates at such a root modulo a
//! prime `P ≡ 1 (mod e)`; a hit is confirmed by exact division.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use std::sync::LazyLock;

use super::poly::Poly;

static CYCLO: LazyLock<Mutex<HashMap<u32, Arc<Poly>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));
static PRODUCTS: LazyLock<Mutex<HashMap<Vec<(u32, u32)>, Arc<Poly>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));
const PRODUCT_CACHE_LIMIT: usize = 1 << 16;
static ROOTS: LazyLock<Mutex<HashMap<u32, Arc<RootTable>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

pub fn divisors(n: u32) -> Vec<u32> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn totient(n: u32) -> u32 {
    let mut r = n as u64;
    for p in prime_factors(n as u64) {
        r = r / p * (p - 1);
    }
    r as u32
}

fn dense_cyclotomic(e: u32) -> Vec<i64> {
    // Φ_e = (u^e - 1) / Π_{d | e, d < e} Φ_d
    let mut num = vec![0i64; e as usize + 1];
    num[0] = -1;
    num[e as usize] = 1;
    for d in divisors(e) {
        if d == e {
            continue;
        }
        let den = cyclotomic(d);
        let mut dd = vec![0i64; totient(d) as usize + 1];
        for ((_, u), c) in den.terms() {
            dd[*u as usize] = c.to_i64().expect("cyclotomic coefficient fits i64");
        }
        num = dense_div_monic(&num, &dd);
    }
    num
}

fn dense_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let n = num.len() - 1;
    let m = den.len() - 1;
    let mut rem = num.to_vec();
    let mut q = vec![0i64; n - m + 1];
    for i in (0..=n - m).rev() {
        let c = rem[i + m];
        q[i] = c;
        if c != 0 {
            for j in 0..=m {
                rem[i + j] -= c * den[j];
            }
        }
    }
    debug_assert!(rem.iter().all(|x| *x == 0));
    q
}

/// `Φ_e(u)` as a univariate polynomial.
pub fn cyclotomic(e: u32) -> Arc<Poly> {
    assert!(e >= 1);
    if let Some(p) = CYCLO.lock().unwrap().get(&e) {
        return p.clone();
    }
    let p = Arc::new(Poly::from_dense_u(&dense_cyclotomic(e)));
    CYCLO.lock().unwrap().insert(e, p.clone());
    p
}

/// Product `Π Φ_e^m` over the given factor list.
pub fn cyclotomic_product(factors: &[(u32, u32)]) -> Poly {
    match factors {
        [] => return Poly::one(),
        [(e, m)] => return cyclotomic(*e).pow(*m),
        _ => {}
    }
    if let Some(p) = PRODUCTS.lock().unwrap().get(factors) {
        return (**p).clone();
    }
    let (last, prefix) = factors.split_last().expect("nonempty");
    let out = cyclotomic_product(prefix).mul(&cyclotomic(last.0).pow(last.1));
    let mut cache = PRODUCTS.lock().unwrap();
    if cache.len() > PRODUCT_CACHE_LIMIT {
        cache.clear();
    }
    cache.insert(factors.to_vec(), Arc::new(out.clone()));
    out
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    r
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// A prime `P ≡ 1 (mod e)` and the powers of a primitive e-th root of unity mod `P`.
pub struct RootTable {
    pub prime: u64,
    pub powers: Vec<u64>,
}

fn build_root_table(e: u32) -> RootTable {
    let e64 = e as u64;
    let mut k = (1u64 << 61) / e64;
    let prime = loop {
        let cand = k * e64 + 1;
        if is_prime_u64(cand) {
            break cand;
        }
        k += 1;
    };
    let factors = prime_factors(e64);
    let mut a = 2u64;
    let zeta = loop {
        let z = pow_mod(a, (prime - 1) / e64, prime);
        if factors.iter().all(|r| pow_mod(z, e64 / r, prime) != 1) {
            break z;
        }
        a += 1;
    };
    let mut powers = Vec::with_capacity(e as usize);
    let mut cur = 1u64;
    for _ in 0..e {
        powers.push(cur);
        cur = mul_mod(cur, zeta, prime);
    }
    RootTable { prime, powers }
}

pub fn root_table(e: u32) -> Arc<RootTable> {
    if let Some(t) = ROOTS.lock().unwrap().get(&e) {
        return t.clone();
    }
    let t = Arc::new(build_root_table(e));
    ROOTS.lock().unwrap().insert(e, t.clone());
    t
}

fn residue(c: &BigInt, p: u64) -> u64 {
    if let Some(v) = c.to_i64() {
        return v.rem_euclid(p as i64) as u64;
    }
    let r = c % BigInt::from(p);
    let r = if r < BigInt::zero() { r + BigInt::from(p) } else { r };
    r.to_u64().unwrap()
}

/// True when every Q-class of `f` vanishes at a primitive e-th root of unity
/// modulo the table prime. A necessary condition for `Φ_e | f`.
pub fn maybe_divisible(f: &Poly, e: u32) -> bool {
    if f.is_zero() {
        return true;
    }
    if e == 1 {
        // Φ_1 = u - 1: evaluate at u = 1 exactly.
        return f.q_classes().all(|(_, class)| class.iter().map(|(_, c)| c).sum::<BigInt>().is_zero());
    }
    let table = root_table(e);
    let p = table.prime;
    for (_, class) in f.q_classes() {
        let mut acc: u64 = 0;
        for ((_, u), c) in class {
            let idx = u.rem_euclid(e as i32) as usize;
            let term = mul_mod(residue(c, p), table.powers[idx], p);
            acc = (acc + term) % p;
        }
        if acc != 0 {
            return false;
        }
    }
    true
}

/// Cyclotomic factors `Φ_e^m` of `f`, with the cofactor. `f` must be nonzero.
pub fn extract_cyclotomic(f: &Poly) -> (Vec<(u32, u32)>, Poly) {
    let span = f.min_class_u_span();
    let mut out = Vec::new();
    let mut rest = f.clone();
    if span <= 0 {
        return (out, rest);
    }
    let bound = 7 * span as u32 + 12;
    for e in 1..=bound {
        let deg = rest.min_class_u_span() as u32;
        if deg == 0 {
            break;
        }
        if totient(e) > deg {
            continue;
        }
        let mut m = 0;
        while maybe_divisible(&rest, e) {
            match rest.div_exact(&cyclotomic(e)) {
                Some(q) => {
                    rest = q;
                    m += 1;
                }
                None => break,
            }
        }
        if m > 0 {
            out.push((e, m));
        }
    }
    (out, rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic(1).to_string(), "u - 1");
        assert_eq!(cyclotomic(2).to_string(), "u + 1");
        assert_eq!(cyclotomic(6).to_string(), "u^2 - u + 1");
        assert_eq!(cyclotomic(12).to_string(), "u^4 - u^2 + 1");
        assert_eq!(totient(24), 8);
    }

    #[test]
    fn product_over_divisors_is_binomial() {
        let factors: Vec<(u32, u32)> = divisors(24).into_iter().map(|d| (d, 1)).collect();
        assert_eq!(cyclotomic_product(&factors).to_string(), "u^24 - 1");
    }

    #[test]
    fn filter_matches_exact_division() {
        let f = Poly::from_dense_u(&[-1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]); // u^12 - 1
        for e in 1..40 {
            assert_eq!(maybe_divisible(&f, e), 12 % e == 0, "e = {e}");
        }
    }

    #[test]
    fn extracts_factors() {
        let f = Poly::from_dense_u(&[-1, 0, 0, 0, 0, 0, 1]).mul(&Poly::from_dense_u(&[3, 1]));
        let (factors, rest) = extract_cyclotomic(&f);
        assert_eq!(factors, vec![(1, 1), (2, 1), (3, 1), (6, 1)]);
        assert_eq!(rest.to_string(), "u + 3");
    }
}
