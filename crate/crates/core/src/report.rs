//! Verification reports shared by the library checks and the CLI.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::Value;

use crate::algebra::{ExactScalar, Mono, TruncSeries};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub equal: bool,
    pub guaranteed_order: Option<String>,
}

impl Check {
    pub fn scalars(name: impl Into<String>, lhs: &ExactScalar, rhs: &ExactScalar, order: Option<String>) -> Check {
        Check { name: name.into(), lhs: lhs.to_string(), rhs: rhs.to_string(), equal: lhs == rhs, guaranteed_order: order }
    }

    pub fn flag(name: impl Into<String>, lhs: impl ToString, rhs: impl ToString, equal: bool) -> Check {
        Check { name: name.into(), lhs: lhs.to_string(), rhs: rhs.to_string(), equal, guaranteed_order: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub parameters: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: impl Into<String>, parameters: Value) -> Report {
        Report { command: command.into(), parameters, checks: Vec::new(), pass: true }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.equal;
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    /// Appends all checks of `other`, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.push(c);
        }
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.equal)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.equal).count()
    }
}

/// Compares two series per monomial. With `q_max`, coefficients are split by
/// `Q`-degree and degrees above `q_max` are ignored.
pub fn compare_series(prefix: &str, lhs: &TruncSeries, rhs: &TruncSeries, q_max: Option<i32>, order: Option<String>) -> Result<Vec<Check>> {
    let cutoff = lhs.cutoff().min(rhs.cutoff());
    let monos: BTreeSet<&Mono> = lhs.terms().keys().chain(rhs.terms().keys()).filter(|m| m.weight() <= cutoff).collect();
    let mut out = Vec::new();
    for m in monos {
        let (a, b) = (lhs.coeff(m), rhs.coeff(m));
        let label = if m.is_one() { "1".to_string() } else { m.to_string() };
        match q_max {
            None => out.push(Check::scalars(format!("{prefix}{label}"), &a, &b, order.clone())),
            Some(qm) => {
                let lo = a.q_valuation().into_iter().chain(b.q_valuation()).min().unwrap_or(0).min(0);
                for d in lo..=qm {
                    let (x, y) = (a.q_coefficient(d)?, b.q_coefficient(d)?);
                    if x.is_zero() && y.is_zero() {
                        continue;
                    }
                    out.push(Check::scalars(format!("{prefix}{label} Q^{d}"), &x, &y, order.clone()));
                }
            }
        }
    }
    if out.is_empty() {
        out.push(Check::flag(format!("{prefix}all coefficients"), "0", "0", true));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Bank;

    #[test]
    fn report_tracks_failures() {
        let mut r = Report::new("demo", Value::Null);
        r.push(Check::flag("a", 1, 1, true));
        assert!(r.pass);
        r.push(Check::flag("b", 1, 2, false));
        assert!(!r.pass);
        assert_eq!(r.first_failure().unwrap().name, "b");
    }

    #[test]
    fn series_comparison_splits_q_degrees() {
        let q: ExactScalar = "1 + Q + 5*Q^3".parse().unwrap();
        let q2: ExactScalar = "1 + Q + 7*Q^3".parse().unwrap();
        let a = TruncSeries::var(Bank::T, 1, 2).scale(&q);
        let b = TruncSeries::var(Bank::T, 1, 2).scale(&q2);
        assert!(compare_series("", &a, &b, Some(2), None).unwrap().iter().all(|c| c.equal));
        assert!(!compare_series("", &a, &b, Some(3), None).unwrap().iter().all(|c| c.equal));
        assert!(!compare_series("", &a, &b, None, None).unwrap().iter().all(|c| c.equal));
    }
}
