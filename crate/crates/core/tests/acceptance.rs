//! The ten acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the verdicts always reach the output.
//! The process fails when a verdict differs from [`EXPECTED_RED`].

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use todalab::algebra::scalar::Q_UNITS;
use todalab::factorization::{sato_first_order_check, verify_backend_equivalence, verify_lax_initial_values, GeneratingMatrix};
use todalab::fock::RSequence;
use todalab::hirota::{verify_bilinear_residue, verify_hirota_triple};
use todalab::matrixrep::{build_operator, compare_operators, verify_matrix_shift_symmetries, wop_mul, OperatorSpec};
use todalab::partitions::{count_standard_tableaux, enumerate_partitions, enumerate_plane_partitions, partitions_up_to};
use todalab::report::Report;
use todalab::schur::{power_sum_subst, principal_spec, schur_lambda, skew_schur_in, SpecPoint};
use todalab::tau::{
    macmahon, one_d_reduction_check, verify_z_tau_identity_with, ConstantTau, DiagonalTau, FockTau, MacMahonProduct, MeltingModel, PerturbedTau,
    Potentials,
};
use todalab::{Bank, ExactScalar, Mono, Partition, Result, TruncSeries};

/// Criteria known to fail, with the reason printed next to the verdict.
const EXPECTED_RED: &[(u8, &str)] = &[(
    5,
    "shift symmetry (i) does not hold entrywise: Γ−Γ+ is Toeplitz with entries g(i−j), and \
     (i) would force g(n)/g(n+k) ∝ q^{kn}, a Gaussian profile, while g(n) has q-valuation |n|/2. \
     The mismatch already appears at the leading q-order and persists under band doubling. \
     The split form Γ+VΓ+^{-1} = εΓ−^{-1}V′Γ−, (ii) and (iii) hold",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn of(reports: &[Report]) -> Outcome {
        let checks: usize = reports.iter().map(|r| r.checks.len()).sum();
        let failed: Vec<String> = reports
            .iter()
            .flat_map(|r| r.checks.iter().filter(|c| !c.equal).map(move |c| format!("{}: {}: {} != {}", r.command, c.name, c.lhs, c.rhs)))
            .collect();
        let pass = failed.is_empty() && checks > 0;
        let detail = match failed.first() {
            None => format!("{checks} checks"),
            Some(f) => format!("{} of {checks} checks failed; first: {}", failed.len(), clip(f)),
        };
        Outcome { pass, detail }
    }

    fn flag(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome { pass, detail: detail.into() }
    }

    fn and(self, other: Outcome) -> Outcome {
        Outcome { pass: self.pass && other.pass, detail: format!("{}; {}", self.detail, other.detail) }
    }
}

fn clip(s: &str) -> String {
    if s.chars().count() > 240 {
        format!("{}...", s.chars().take(240).collect::<String>())
    } else {
        s.to_owned()
    }
}

/// Σ_{|λ| ≤ 6} s_λ(q^{−ρ})² against plane partition counts and Π(1 − q^n)^{−n}, to q^5.
fn macmahon_slicing() -> Result<Outcome> {
    let order = 6 * Q_UNITS;
    let squares: Vec<ExactScalar> = partitions_up_to(6).iter().map(|l| principal_spec(l).pow(2)).collect();
    let sum = ExactScalar::sum_all(squares.iter()).series_u(order)?;

    let counts = enumerate_plane_partitions(5)?;
    let brute = ExactScalar::sum_all(
        counts.iter().enumerate().map(|(n, c)| ExactScalar::from_int(*c as i64).mul(&ExactScalar::q_pow(n as i32))).collect::<Vec<_>>().iter(),
    );

    let product = (1..=5u32).fold(ExactScalar::one(), |acc, n| acc.mul(&ExactScalar::inv_one_minus_q_pow(n).pow(n as i32))).series_u(order)?;
    // the Q-graded product at Q = 1: Q^m only contributes from q^m on
    let graded = macmahon(MacMahonProduct::Standard, 5);
    let at_one = (0..=5).map(|m| graded.q_coefficient(m)).collect::<Result<Vec<_>>>()?;
    let at_one = ExactScalar::sum_all(at_one.iter()).series_u(order)?;

    let ok = sum == brute && sum == product && sum == at_one;
    Ok(Outcome::flag(ok, format!("counts {counts:?}; Σ s_λ² = {sum}")))
}

/// q-hook formula against the substituted Schur series, |λ| ≤ 5, to q^8.
fn q_hook() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut n = 0;
    for l in partitions_up_to(5) {
        let closed = principal_spec(&l).series_u(8 * Q_UNITS)?;
        let subst = power_sum_subst(&schur_lambda(&l, l.weight()), &SpecPoint::Principal, Some(8))?;
        n += 1;
        if closed != subst.value {
            bad.push(l.to_string());
        }
    }
    Ok(Outcome::flag(bad.is_empty(), format!("{n} partitions, mismatches {bad:?}")))
}

fn hirota() -> Result<Outcome> {
    let charges = [-1, 0, 1];
    let cauchy = verify_hirota_triple(&DiagonalTau::cauchy(), &charges, 4)?;
    let hurwitz = verify_hirota_triple(&DiagonalTau::double_hurwitz(ExactScalar::u_pow(12), None)?, &charges, 4)?;
    let control = verify_hirota_triple(&ConstantTau, &[0], 4)?;
    let eq1_fails = control.checks.iter().any(|c| !c.equal && c.name.contains("(i)"));
    Ok(Outcome::of(&[cauchy, hurwitz]).and(Outcome::flag(eq1_fails, format!("τ ≡ 1 control fails (i): {eq1_fails}"))))
}

fn hypergeometric_r() -> RSequence {
    RSequence::Geometric { a: ExactScalar::big_q(), b: ExactScalar::q_pow(1) }
}

fn bilinear() -> Result<Outcome> {
    let provider = Arc::new(DiagonalTau::hypergeometric(hypergeometric_r(), None));
    let mut reports = Vec::new();
    for sp in [-1, 0, 1] {
        reports.push(verify_bilinear_residue(provider.as_ref(), 0, sp, 2, None)?);
    }
    let perturbed = PerturbedTau { inner: provider, charge: 0, lambda: Partition::new(vec![1])?, delta: ExactScalar::from_int(1) };
    let detected = [-1, 0, 1].iter().map(|&sp| verify_bilinear_residue(&perturbed, 0, sp, 2, None).map(|r| !r.pass)).collect::<Result<Vec<_>>>()?;
    let hit = detected.iter().any(|d| *d);
    Ok(Outcome::of(&reports).and(Outcome::flag(hit, format!("perturbation detected for s' = -1, 0, 1: {detected:?}"))))
}

fn torus_and_shifts() -> Result<Outcome> {
    let (lo, hi) = (-10, 10);
    let l = build_operator(OperatorSpec::Shift(1), lo, hi, 0)?;
    let qd = build_operator(OperatorSpec::QPowDelta(1), lo, hi, 0)?;
    let torus = compare_operators(&wop_mul(&l, &qd)?, &wop_mul(&qd, &l)?.scale(&ExactScalar::q_pow(1)), None)?;
    let big = build_operator(OperatorSpec::BigQPowDelta(1), lo, hi, 0)?;
    let big_inv = build_operator(OperatorSpec::BigQPowDelta(-1), lo, hi, 0)?;
    let scaling = compare_operators(&wop_mul(&wop_mul(&big, &l)?, &big_inv)?, &l.scale(&ExactScalar::monomial(0, -1)), None)?;
    let algebra = Outcome::flag(torus.equal() && scaling.equal(), format!("torus {}, Q^Δ scaling {}", torus.equal(), scaling.equal()));

    let mut reports = Vec::new();
    for k in 1..=2 {
        for m in -2..=2 {
            reports.push(verify_matrix_shift_symmetries(k, m, lo, hi, 8)?);
        }
    }
    let literal_only = reports.iter().all(|r| r.checks.iter().all(|c| c.equal || c.name.starts_with("(i) literal")));
    let shifts = Outcome::of(&reports);
    Ok(algebra.and(shifts).and(Outcome::flag(literal_only, format!("only (i) literal fails: {literal_only}"))))
}

fn backends() -> Result<Outcome> {
    let charges = [-1, 0, 1];
    let mut reports = Vec::new();
    for model in [MeltingModel::One, MeltingModel::Two] {
        reports.push(verify_backend_equivalence(&GeneratingMatrix::Model(model), &FockTau::model(model, 2), &charges, 2, 2)?);
    }
    let r = hypergeometric_r();
    reports.push(verify_backend_equivalence(&GeneratingMatrix::Hypergeometric(r.clone()), &DiagonalTau::hypergeometric(r, None), &charges, 2, 2)?);
    Ok(Outcome::of(&reports))
}

fn lax_initial_values() -> Result<Outcome> {
    let one = verify_lax_initial_values(MeltingModel::One, -8, 8)?;
    let two = verify_lax_initial_values(MeltingModel::Two, -8, 8)?;
    Ok(Outcome::of(&[one, two]))
}

fn z_tau() -> Result<Outcome> {
    let charges = [-1, 0, 1];
    let mut reports = Vec::new();
    for d in 0..=2 {
        reports.push(verify_z_tau_identity_with(MeltingModel::One, &charges, 3, d, Potentials::Standard)?);
        reports.push(verify_z_tau_identity_with(MeltingModel::One, &charges, 3, d, Potentials::Modified)?);
        reports.push(verify_z_tau_identity_with(MeltingModel::Two, &charges, 3, d, Potentials::Standard)?);
    }
    reports.push(one_d_reduction_check(&charges, 2, 3)?);
    Ok(Outcome::of(&reports))
}

fn sato() -> Result<Outcome> {
    let mut reports = Vec::new();
    for model in [MeltingModel::One, MeltingModel::Two] {
        reports.push(sato_first_order_check(&GeneratingMatrix::Model(model), -6, 6)?);
    }
    let al = reports[1].checks.iter().any(|c| c.name.contains("AL form preserved") && c.equal);
    Ok(Outcome::of(&reports).and(Outcome::flag(al, format!("model 2 keeps the AL form: {al}"))))
}

fn kernel(sign: impl Fn(u8) -> i64, d: u32) -> Result<TruncSeries> {
    let mut arg = TruncSeries::zero(d);
    for k in 1..=d as u8 {
        let m = Mono::from_exponents(&[(Bank::T, k, 1), (Bank::TBar, k, 1)]);
        arg = arg.add(&TruncSeries::monomial(m, ExactScalar::from_int(sign(k) * k as i64), d));
    }
    arg.exp()
}

fn combinatorics() -> Result<Outcome> {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in 0..=6u32 {
        let parts = enumerate_partitions(n);
        let sum: BigInt = parts.iter().map(|l| l.dim().pow(2)).sum();
        let fact: BigInt = (1..=n).map(BigInt::from).product();
        ok &= sum == fact;
        ok &= parts.iter().all(|l| l.dim() == count_standard_tableaux(l));
    }
    notes.push(format!("dimension sums and tableau counts: {ok}"));
    // weighted degree 2W covers every |λ| ≤ W
    let d = 10;
    let mut plain = TruncSeries::zero(d);
    let mut dual = TruncSeries::zero(d);
    for l in partitions_up_to(5) {
        let a = schur_lambda(&l, d);
        plain = plain.add(&a.mul(&skew_schur_in(Bank::TBar, &l, &Partition::empty(), d)));
        dual = dual.add(&a.mul(&skew_schur_in(Bank::TBar, &l.conjugate(), &Partition::empty(), d)));
    }
    let cauchy = plain == kernel(|_| 1, d)?;
    let dual_cauchy = dual == kernel(|k| if k % 2 == 1 { 1 } else { -1 }, d)?;
    notes.push(format!("Cauchy {cauchy}, dual Cauchy {dual_cauchy}"));
    Ok(Outcome::flag(ok && cauchy && dual_cauchy, notes.join("; ")))
}

type Criterion = (u8, &'static str, u64, fn() -> Result<Outcome>);

const CRITERIA: &[Criterion] = &[
    (1, "MacMahon diagonal slicing", 10, macmahon_slicing),
    (2, "q-hook formula", 30, q_hook),
    (3, "Hirota triple", 120, hirota),
    (4, "bilinear residue identity", 120, bilinear),
    (5, "quantum torus and shift symmetries", 60, torus_and_shifts),
    (6, "backend equivalence", 120, backends),
    (7, "Lax initial values", 60, lax_initial_values),
    (8, "Z and tau conversions", 300, z_tau),
    (9, "Sato first order", 60, sato),
    (10, "combinatorial base", 30, combinatorics),
];

fn main() -> ExitCode {
    let filter: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for &(id, name, budget, run) in CRITERIA {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::flag(false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = outcome.pass && in_time;
        let timing = format!("{:.1}s of {budget}s", elapsed.as_secs_f64());
        println!("{} criterion {id:>2} {name} ({timing}): {}", if pass { "PASS" } else { "FAIL" }, outcome.detail);
        let expected_red = EXPECTED_RED.iter().find(|(n, _)| *n == id);
        match (pass, expected_red) {
            (false, Some((_, why))) => println!("     known red: {why}"),
            (true, Some(_)) => {
                println!("     criterion {id} passes but is listed as a known red");
                unexpected += 1;
            }
            (false, None) => unexpected += 1,
            (true, None) => {}
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected verdict(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
