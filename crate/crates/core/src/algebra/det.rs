//! Determinants over scalars and truncated series.

use std::collections::HashMap;

use super::scalar::ExactScalar;
use super::series::TruncSeries;
use crate::error::Result;

/// Fraction-free (Bareiss) elimination with row pivoting. The empty matrix has determinant 1.
pub fn det_exact(m: &[Vec<ExactScalar>]) -> ExactScalar {
    let n = m.len();
    if n == 0 {
        return ExactScalar::one();
    }
    let mut a: Vec<Vec<ExactScalar>> = m.to_vec();
    let mut sign = false;
    let mut prev = ExactScalar::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return ExactScalar::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = v.checked_div(&prev).expect("Bareiss pivot is nonzero");
            }
            a[i][k] = ExactScalar::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Division-free determinant by first-column expansion with memoized minors.
/// Cost grows as `n 2^n` series products.
pub fn det_series_expand(m: &[Vec<TruncSeries>], cutoff: u32) -> TruncSeries {
    let n = m.len();
    if n == 0 {
        return TruncSeries::one(cutoff);
    }
    assert!(n <= 20, "expansion is limited to small matrices");
    // minors[rows] = det of rows `rows` against the last popcount(rows) columns
    let mut memo: HashMap<u32, TruncSeries> = HashMap::new();
    fn rec(m: &[Vec<TruncSeries>], rows: u32, cutoff: u32, memo: &mut HashMap<u32, TruncSeries>) -> TruncSeries {
        let n = m.len();
        let k = rows.count_ones() as usize;
        if k == 0 {
            return TruncSeries::one(cutoff);
        }
        if let Some(v) = memo.get(&rows) {
            return v.clone();
        }
        let col = n - k;
        let mut parts = Vec::new();
        let mut pos = 0;
        for r in 0..n {
            if rows & (1 << r) == 0 {
                continue;
            }
            let entry = &m[r][col];
            if !entry.is_zero() {
                let minor = rec(m, rows & !(1 << r), cutoff, memo);
                if !minor.is_zero() {
                    let term = entry.mul(&minor);
                    parts.push(if pos % 2 == 1 { term.neg() } else { term });
                }
            }
            pos += 1;
        }
        let v = TruncSeries::sum_all(parts.iter(), cutoff);
        memo.insert(rows, v.clone());
        v
    }
    rec(m, (1u32 << n) - 1, cutoff, &mut memo)
}

/// Gaussian elimination choosing pivots with invertible constant term. Falls back to
/// expansion when no such pivot exists.
pub fn det_series(m: &[Vec<TruncSeries>], cutoff: u32) -> Result<TruncSeries> {
    let n = m.len();
    let mut a: Vec<Vec<TruncSeries>> = m.iter().map(|r| r.iter().map(|x| x.truncate(cutoff)).collect()).collect();
    let mut acc = TruncSeries::one(cutoff);
    for k in 0..n {
        let pivot = (k..n).find(|&i| !a[i][k].constant_term().is_zero());
        let Some(p) = pivot else {
            let rest: Vec<Vec<TruncSeries>> = a[k..].iter().map(|r| r[k..].to_vec()).collect();
            return Ok(acc.mul(&det_series_expand(&rest, cutoff)));
        };
        if p != k {
            a.swap(p, k);
            acc = acc.neg();
        }
        let piv = a[k][k].clone();
        let piv_inv = piv.inv()?;
        acc = acc.mul(&piv);
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = a[i][k].mul(&piv_inv);
            for j in k + 1..n {
                if a[k][j].is_zero() {
                    continue;
                }
                a[i][j] = a[i][j].sub(&f.mul(&a[k][j]));
            }
            a[i][k] = TruncSeries::zero(cutoff);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Bank;

    fn s(n: i64) -> ExactScalar {
        ExactScalar::from_int(n)
    }

    #[test]
    fn scalar_examples() {
        assert!(det_exact(&[]).is_one());
        assert!(det_exact(&[vec![s(1)]]).is_one());
        assert_eq!(det_exact(&[vec![s(0), s(1)], vec![s(1), s(0)]]), s(-1));
        let u = ExactScalar::u_pow(1);
        let d = det_exact(&[vec![u.clone(), s(1)], vec![s(1), u.clone()]]);
        assert_eq!(d, &u * &u - s(1));
    }

    #[test]
    fn series_routes_agree() {
        let t = |k| TruncSeries::var(Bank::T, k, 4);
        let one = TruncSeries::one(4);
        let m = vec![vec![one.add(&t(1)), t(2), t(3)], vec![t(1), one.clone(), t(1).mul(&t(1))], vec![one.clone(), t(2), one.sub(&t(1))]];
        assert_eq!(det_series(&m, 4).unwrap(), det_series_expand(&m, 4));
    }
}
