//! Job descriptions, command dispatch and report output for the `todalab` binary.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{ExactScalar, TruncSeries};
use crate::error::{Error, Result};
use crate::factorization::{
    build_u_of_t, gauss_decompose, initial_lax, reduction_predicates, sato_first_order_check, verify_backend_equivalence, verify_lax_initial_values,
    wave_function_check, GeneratingMatrix, MinorTau,
};
use crate::fock::RSequence;
use crate::hirota::{verify_bilinear_residue, verify_hirota_triple};
use crate::matrixrep::{verify_matrix_shift_symmetries, Entry, WindowedOperator};
use crate::partitions::{enumerate_partitions, partition_stats, Partition};
use crate::report::Report;
use crate::schur::{principal_spec, schur_lambda, skew_schur_s};
use crate::tau::{
    melting_z, melting_zprime, one_d_reduction_check, verify_z_tau_identity_with, ConstantTau, DiagonalTau, FockTau, MeltingModel, Potentials,
    TauProvider,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Tsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "partitions")]
    Partitions,
    #[serde(rename = "schur")]
    Schur,
    #[serde(rename = "zcrystal")]
    Zcrystal,
    #[serde(rename = "tau")]
    Tau,
    #[serde(rename = "factorize")]
    Factorize,
    #[serde(rename = "lax")]
    Lax,
    #[serde(rename = "verify z-tau")]
    VerifyZTau,
    #[serde(rename = "verify reduction")]
    VerifyReduction,
    #[serde(rename = "verify hirota")]
    VerifyHirota,
    #[serde(rename = "verify bilinear")]
    VerifyBilinear,
    #[serde(rename = "verify shift-symmetries")]
    VerifyShiftSymmetries,
    #[serde(rename = "verify sato")]
    VerifySato,
    #[serde(rename = "verify minors")]
    VerifyMinors,
    #[serde(rename = "verify wave-function")]
    VerifyWaveFunction,
}

impl Command {
    fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }

    fn is_verification(self) -> bool {
        self.name().starts_with("verify")
    }

    /// Parameters the command reads; anything else is a usage error.
    fn accepts(self) -> &'static [&'static str] {
        match self {
            Command::Partitions => &["n"],
            Command::Schur => &["lambda", "mu", "D"],
            Command::Zcrystal => &["model", "s", "W", "D"],
            Command::Tau => &["provider", "backend", "s", "D", "q_max", "p", "a", "b"],
            Command::Factorize => &["provider", "window", "D", "a", "b"],
            Command::Lax => &["provider", "window", "a", "b"],
            Command::VerifyZTau => &["model", "charges", "D", "q_max"],
            Command::VerifyReduction => &["model", "window"],
            Command::VerifyHirota => &["provider", "charges", "D", "q_max", "p", "a", "b"],
            Command::VerifyBilinear => &["provider", "s", "s_prime", "D", "q_max", "p", "a", "b"],
            Command::VerifyShiftSymmetries => &["k", "m", "window", "band"],
            Command::VerifySato => &["provider", "window", "a", "b"],
            Command::VerifyMinors => &["provider", "charges", "D", "q_max", "a", "b"],
            Command::VerifyWaveFunction => &["provider", "s", "z_order", "D", "q_max", "a", "b"],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let words = s.split_whitespace().collect::<Vec<_>>().join(" ");
        serde_json::from_value(Value::String(words)).map_err(|_| Error::InvalidArgument(format!("unknown command '{s}'")))
    }
}

/// Command parameters, shared by flags and config files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Partition size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Partition such as "(3,1,1)".
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    /// Inner partition of a skew shape.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<String>,
    /// Melting crystal model, 1 or 2.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<u8>,
    /// Charge.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<i64>,
    /// Second charge of the bilinear identity.
    #[arg(long = "s-prime", allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_prime: Option<i64>,
    /// Charge range "a:b".
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charges: Option<String>,
    /// Partition weight cutoff.
    #[arg(long = "W")]
    #[serde(rename = "W")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<u32>,
    /// Weighted degree cutoff in the times.
    #[arg(long = "D")]
    #[serde(rename = "D")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    /// Highest bigQ degree.
    #[arg(long = "q-max")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u32>,
    /// Matrix window "lo:hi".
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    /// Band cutoff of vertex operators.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    /// Order of the spectral parameter expansion.
    #[arg(long = "z-order")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_order: Option<u32>,
    /// model1, model2, cauchy, double-hurwitz, hypergeometric, identity or constant.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
    /// fock or minors.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    /// Double Hurwitz parameter p.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    /// Hypergeometric r_n = a b^n.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
}

impl Params {
    fn set_fields(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(Value::Object(map)) => map.into_iter().filter(|(_, v)| !v.is_null()).map(|(k, _)| k).collect(),
            _ => Vec::new(),
        }
    }
}

/// A complete job: what flags or a config file describe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub format: Format,
}

impl JobSpec {
    pub fn validate(&self) -> Result<()> {
        let allowed = self.command.accepts();
        if let Some(bad) = self.params.set_fields().into_iter().find(|f| !allowed.contains(&f.as_str())) {
            return Err(Error::InvalidArgument(format!("'{}' does not take parameter '{bad}'", self.command)));
        }
        if self.params.band.is_some_and(|b| b < 1) {
            return Err(Error::InvalidArgument("band must be positive".into()));
        }
        if self.params.n == Some(0) && self.command == Command::Partitions {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    VerificationFailure = 1,
    UsageError = 2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

enum Payload {
    Table { json: Value, header: Vec<&'static str>, rows: Vec<Vec<String>> },
    Report(Report),
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn range(text: &str, what: &str) -> Result<(i64, i64)> {
    let (a, b) = text.split_once(':').ok_or_else(|| usage(format!("{what} must look like lo:hi, got '{text}'")))?;
    let parse = |x: &str| x.trim().parse::<i64>().map_err(|_| usage(format!("bad {what} bound '{x}'")));
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(usage(format!("{what} {a}:{b} is empty")));
    }
    Ok((a, b))
}

fn model(p: &Params) -> Result<MeltingModel> {
    MeltingModel::from_number(p.model.unwrap_or(1))
}

fn scalar(text: &Option<String>, default: Option<&str>, what: &str) -> Result<ExactScalar> {
    let t = text.as_deref().or(default).ok_or_else(|| usage(format!("missing --{what}")))?;
    t.parse().map_err(|e| usage(format!("--{what}: {e}")))
}

fn r_sequence(p: &Params) -> Result<RSequence> {
    Ok(RSequence::Geometric { a: scalar(&p.a, None, "a")?, b: scalar(&p.b, None, "b")? })
}

fn provider_name(p: &Params) -> &str {
    p.provider.as_deref().unwrap_or("model1")
}

fn generating(p: &Params) -> Result<GeneratingMatrix> {
    Ok(match provider_name(p) {
        "model1" => GeneratingMatrix::Model(MeltingModel::One),
        "model2" => GeneratingMatrix::Model(MeltingModel::Two),
        "identity" => GeneratingMatrix::Identity,
        "hypergeometric" => GeneratingMatrix::Hypergeometric(r_sequence(p)?),
        other => return Err(usage(format!("provider '{other}' has no generating matrix"))),
    })
}

fn provider(p: &Params, fock: bool) -> Result<Box<dyn TauProvider>> {
    let q_max = p.q_max.unwrap_or(2);
    Ok(match provider_name(p) {
        "model1" | "model2" if fock => Box::new(FockTau::model(model_of(provider_name(p)), q_max)),
        "cauchy" => Box::new(DiagonalTau::cauchy()),
        "double-hurwitz" => Box::new(DiagonalTau::double_hurwitz(scalar(&p.p, Some("u^12"), "p")?, None)?),
        "hypergeometric" if fock => Box::new(DiagonalTau::hypergeometric(r_sequence(p)?, None)),
        "constant" => Box::new(ConstantTau),
        _ => Box::new(MinorTau { generating: generating(p)?, q_max }),
    })
}

fn model_of(name: &str) -> MeltingModel {
    if name == "model2" {
        MeltingModel::Two
    } else {
        MeltingModel::One
    }
}

fn series_rows(v: &TruncSeries) -> Vec<Vec<String>> {
    v.terms().iter().map(|(m, c)| vec![if m.is_one() { "1".into() } else { m.to_string() }, c.to_string()]).collect()
}

fn operator_rows<E: Entry>(name: &str, op: &WindowedOperator<E>) -> Vec<Vec<String>> {
    op.entries().map(|(&(i, j), v)| vec![name.to_string(), i.to_string(), j.to_string(), v.render()]).collect()
}

fn run_partitions(p: &Params) -> Result<Payload> {
    let n = p.n.ok_or_else(|| usage("missing --n"))?;
    let parts = enumerate_partitions(n);
    let rows = parts
        .iter()
        .map(|l| {
            let st = partition_stats(l, 0, 0);
            vec![l.to_string(), l.len().to_string(), st.dim.to_string(), st.kappa.to_string(), format!("{:?}", st.hooks)]
        })
        .collect();
    let json = json!({
        "n": n,
        "count": parts.len(),
        "partitions": parts.iter().map(|l| {
            let st = partition_stats(l, 0, 0);
            json!({"partition": l, "length": l.len(), "dim": st.dim.to_string(), "kappa": st.kappa, "hooks": st.hooks})
        }).collect::<Vec<_>>(),
    });
    Ok(Payload::Table { json, header: vec!["partition", "length", "dim", "kappa", "hooks"], rows })
}

fn run_schur(p: &Params) -> Result<Payload> {
    let lambda: Partition = p.lambda.as_deref().ok_or_else(|| usage("missing --lambda"))?.parse()?;
    let mu: Option<Partition> = p.mu.as_deref().map(str::parse).transpose()?;
    let d = p.d.unwrap_or(lambda.weight());
    let series = match &mu {
        Some(mu) => skew_schur_s(&lambda, mu, d),
        None => schur_lambda(&lambda, d),
    };
    let spec = mu.is_none().then(|| principal_spec(&lambda).to_string());
    let json = json!({"lambda": lambda, "mu": mu, "D": d, "series": series.to_string(), "principal_specialization": spec});
    Ok(Payload::Table { json, header: vec!["monomial", "coefficient"], rows: series_rows(&series) })
}

fn run_zcrystal(p: &Params) -> Result<Payload> {
    let m = model(p)?;
    let s = p.s.unwrap_or(0);
    let w = p.w.ok_or_else(|| usage("missing --W"))?;
    let d = p.d.unwrap_or(0);
    let z = match m {
        MeltingModel::One => melting_z(s, w, d)?,
        MeltingModel::Two => melting_zprime(s, w, d)?,
    };
    let top = w as i32 + (s * (s + 1) / 2) as i32;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for (mono, c) in z.terms() {
        let name = if mono.is_one() { "1".to_string() } else { mono.to_string() };
        let bottom = c.q_valuation().unwrap_or(0);
        for k in bottom..=top {
            let x = c.q_coefficient(k)?;
            if x.is_zero() {
                continue;
            }
            rows.push(vec![name.clone(), k.to_string(), x.to_string()]);
            table.push(json!({"monomial": name, "Q_degree": k, "coefficient": x.to_string()}));
        }
    }
    let json = json!({"model": p.model.unwrap_or(1), "s": s, "W": w, "D": d, "coefficients": table});
    Ok(Payload::Table { json, header: vec!["monomial", "Q_degree", "coefficient"], rows })
}

fn run_tau(p: &Params) -> Result<Payload> {
    let s = p.s.unwrap_or(0);
    let d = p.d.unwrap_or(2);
    let fock = match p.backend.as_deref().unwrap_or("fock") {
        "fock" => true,
        "minors" => false,
        other => return Err(usage(format!("unknown backend '{other}'"))),
    };
    let prov = provider(p, fock)?;
    let tau = prov.tau(s, d)?;
    let json = json!({
        "provider": prov.label(),
        "s": s,
        "D": d,
        "exact_q_degree": prov.exact_q_degree(s),
        "series": tau.to_string(),
        "coefficients": series_rows(&tau).into_iter().map(|r| json!({"monomial": r[0], "coefficient": r[1]})).collect::<Vec<_>>(),
    });
    Ok(Payload::Table { json, header: vec!["monomial", "coefficient"], rows: series_rows(&tau) })
}

fn run_factorize(p: &Params) -> Result<Payload> {
    let g = generating(p)?;
    let (lo, hi) = range(p.window.as_deref().unwrap_or("-4:4"), "window")?;
    let d = p.d.unwrap_or(1);
    let pair = gauss_decompose(&build_u_of_t(&g, lo, hi, d)?)?;
    let json = json!({"generating": g.label(), "window": [lo, hi], "D": d, "W": pair.w.to_json(), "Wbar": pair.wbar.to_json()});
    let mut rows = operator_rows("W", &pair.w);
    rows.extend(operator_rows("Wbar", &pair.wbar));
    Ok(Payload::Table { json, header: vec!["operator", "i", "j", "value"], rows })
}

fn run_lax(p: &Params) -> Result<Payload> {
    let g = generating(p)?;
    let (lo, hi) = range(p.window.as_deref().unwrap_or("-6:6"), "window")?;
    let (_, lax) = initial_lax(&g, lo, hi)?;
    let red = reduction_predicates(&lax);
    let json = json!({
        "generating": g.label(),
        "window": [lo, hi],
        "region": [lax.region.0, lax.region.1],
        "L": lax.l.to_json(),
        "Lbar_inv": lax.lbar_inv.to_json(),
        "reduction": red,
    });
    let mut rows = operator_rows("L", &lax.l);
    rows.extend(operator_rows("Lbar_inv", &lax.lbar_inv));
    Ok(Payload::Table { json, header: vec!["operator", "i", "j", "value"], rows })
}

fn charges(p: &Params) -> Result<Vec<i64>> {
    let (a, b) = range(p.charges.as_deref().unwrap_or("-1:1"), "charges")?;
    Ok((a..=b).collect())
}

fn run_verify(cmd: Command, p: &Params) -> Result<Report> {
    match cmd {
        Command::VerifyZTau => {
            let m = model(p)?;
            let (cs, d, q) = (charges(p)?, p.d.unwrap_or(2), p.q_max.unwrap_or(3) as i32);
            let mut report = Report::new("verify z-tau", json!({"model": p.model.unwrap_or(1), "charges": cs, "D": d, "q_max": q}));
            report.absorb("", verify_z_tau_identity_with(m, &cs, q, d, Potentials::Standard)?);
            if m == MeltingModel::One {
                report.absorb("modified potentials: ", verify_z_tau_identity_with(m, &cs, q, d, Potentials::Modified)?);
                report.absorb("1D reduction: ", one_d_reduction_check(&cs, q, d.max(1))?);
            }
            Ok(report)
        }
        Command::VerifyReduction => {
            let (lo, hi) = range(p.window.as_deref().unwrap_or("-8:8"), "window")?;
            verify_lax_initial_values(model(p)?, lo, hi)
        }
        Command::VerifyHirota => verify_hirota_triple(provider(p, true)?.as_ref(), &charges(p)?, p.d.unwrap_or(4)),
        Command::VerifyBilinear => {
            let s = p.s.unwrap_or(0);
            verify_bilinear_residue(provider(p, true)?.as_ref(), s, p.s_prime.unwrap_or(s + 1), p.d.unwrap_or(2), None)
        }
        Command::VerifyShiftSymmetries => {
            let (lo, hi) = range(p.window.as_deref().unwrap_or("-8:8"), "window")?;
            verify_matrix_shift_symmetries(p.k.unwrap_or(1), p.m.unwrap_or(0), lo, hi, p.band.unwrap_or(8))
        }
        Command::VerifySato => {
            let (lo, hi) = range(p.window.as_deref().unwrap_or("-6:6"), "window")?;
            sato_first_order_check(&generating(p)?, lo, hi)
        }
        Command::VerifyMinors => {
            let g = generating(p)?;
            let q_max = p.q_max.unwrap_or(2);
            verify_backend_equivalence(&g, provider(p, true)?.as_ref(), &charges(p)?, p.d.unwrap_or(2), q_max)
        }
        Command::VerifyWaveFunction => {
            let g = generating(p)?;
            let prov = provider(p, true)?;
            wave_function_check(&g, prov.as_ref(), p.s.unwrap_or(0), p.z_order.unwrap_or(2), p.d.unwrap_or(2))
        }
        _ => unreachable!("not a verification command"),
    }
}

fn tsv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join("\t"));
        out.push('\n');
    }
    out
}

fn render(payload: &Payload, command: Command, params: &Params, format: Format) -> Result<String> {
    let to_json = |v: &Value| serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Parse(e.to_string()));
    match (payload, format) {
        (Payload::Table { json, .. }, Format::Json) => to_json(&json!({"command": command.name(), "parameters": params, "result": json})),
        (Payload::Table { header, rows, .. }, Format::Tsv) => Ok(tsv(header, rows)),
        (Payload::Report(r), Format::Json) => to_json(&serde_json::to_value(r).map_err(|e| Error::Parse(e.to_string()))?),
        (Payload::Report(r), Format::Tsv) => {
            let rows: Vec<Vec<String>> = r
                .checks
                .iter()
                .map(|c| vec![c.name.clone(), c.lhs.clone(), c.rhs.clone(), c.equal.to_string(), c.guaranteed_order.clone().unwrap_or_default()])
                .collect();
            let mut out = tsv(&["name", "lhs", "rhs", "equal", "guaranteed_order"], &rows);
            out.push_str(&format!("# pass\t{}\n", r.pass));
            Ok(out)
        }
    }
}

fn status_for(e: &Error) -> ExitStatus {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::InsufficientBand(_) | Error::EmptyTrustedRange | Error::Unsupported(_) => {
            ExitStatus::UsageError
        }
        _ => ExitStatus::VerificationFailure,
    }
}

/// Runs one job and renders its output.
pub fn run_command(spec: &JobSpec) -> Outcome {
    let fail = |e: Error| Outcome { status: status_for(&e), stdout: String::new(), stderr: format!("error: {e}\n") };
    if let Err(e) = spec.validate() {
        return fail(e);
    }
    let p = &spec.params;
    let payload = match spec.command {
        Command::Partitions => run_partitions(p),
        Command::Schur => run_schur(p),
        Command::Zcrystal => run_zcrystal(p),
        Command::Tau => run_tau(p),
        Command::Factorize => run_factorize(p),
        Command::Lax => run_lax(p),
        c => run_verify(c, p).map(Payload::Report),
    };
    let payload = match payload {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let stdout = match render(&payload, spec.command, p, spec.format) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match &payload {
        Payload::Report(r) if !r.pass => {
            let c = r.first_failure().expect("failing report has a failing check");
            Outcome {
                status: ExitStatus::VerificationFailure,
                stdout,
                stderr: format!("FAIL: {} of {} checks failed; first: {}: {} != {}\n", r.failures(), r.checks.len(), c.name, c.lhs, c.rhs),
            }
        }
        _ => {
            debug_assert!(!spec.command.is_verification() || matches!(payload, Payload::Report(_)));
            Outcome { status: ExitStatus::Pass, stdout, stderr: String::new() }
        }
    }
}

/// Runs a job given as JSON text.
pub fn run_json(text: &str) -> Outcome {
    match serde_json::from_str::<JobSpec>(text) {
        Ok(spec) => run_command(&spec),
        Err(e) => Outcome { status: ExitStatus::UsageError, stdout: String::new(), stderr: format!("error: invalid job: {e}\n") },
    }
}

#[derive(Parser, Debug)]
#[command(name = "todalab", version, about = "Exact tau functions, melting crystals and Toda hierarchy checks")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// JSON job file; replaces the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Partitions of n with dimensions and hooks.
    Partitions(Params),
    /// Schur and skew Schur functions in the times.
    Schur(Params),
    /// Melting crystal partition function by bigQ degree.
    Zcrystal(Params),
    /// Tau function of a provider.
    Tau(Params),
    /// Gauss decomposition of U(t, t̄).
    Factorize(Params),
    /// Initial Lax operators and reduction predicates.
    Lax(Params),
    /// Exact identity checks; exit 1 when one fails.
    #[command(subcommand)]
    Verify(VerifySub),
}

#[derive(Subcommand, Debug)]
enum VerifySub {
    /// Crystal sums against their fermionic forms.
    ZTau(Params),
    /// Lax initial values and the 1D Toda or AL reduction.
    Reduction(Params),
    /// The three Hirota equations.
    Hirota(Params),
    /// Bilinear residue identity for two charges.
    Bilinear(Params),
    /// Quantum torus shift symmetries on a window.
    ShiftSymmetries(Params),
    /// First-order Sato equations.
    Sato(Params),
    /// Minor-determinant tau against another backend.
    Minors(Params),
    /// Wave functions from tau against the dressing operators.
    WaveFunction(Params),
}

fn spec_from_cli(cli: Cli) -> Result<JobSpec> {
    if let Some(path) = cli.config {
        if cli.command.is_some() {
            return Err(usage("--config replaces the subcommand"));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let mut spec: JobSpec = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        if let Some(f) = cli.format {
            spec.format = f;
        }
        return Ok(spec);
    }
    let (command, params) = match cli.command.ok_or_else(|| usage("no command given"))? {
        Sub::Partitions(p) => (Command::Partitions, p),
        Sub::Schur(p) => (Command::Schur, p),
        Sub::Zcrystal(p) => (Command::Zcrystal, p),
        Sub::Tau(p) => (Command::Tau, p),
        Sub::Factorize(p) => (Command::Factorize, p),
        Sub::Lax(p) => (Command::Lax, p),
        Sub::Verify(v) => match v {
            VerifySub::ZTau(p) => (Command::VerifyZTau, p),
            VerifySub::Reduction(p) => (Command::VerifyReduction, p),
            VerifySub::Hirota(p) => (Command::VerifyHirota, p),
            VerifySub::Bilinear(p) => (Command::VerifyBilinear, p),
            VerifySub::ShiftSymmetries(p) => (Command::VerifyShiftSymmetries, p),
            VerifySub::Sato(p) => (Command::VerifySato, p),
            VerifySub::Minors(p) => (Command::VerifyMinors, p),
            VerifySub::WaveFunction(p) => (Command::VerifyWaveFunction, p),
        },
    };
    Ok(JobSpec { command, params, format: cli.format.unwrap_or_default() })
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I: IntoIterator<Item = String>>(args: I) -> i32 {
    if let Ok(n) = std::env::var("TODALAB_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: TODALAB_THREADS must be a positive integer");
                return ExitStatus::UsageError as i32;
            }
        }
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::UsageError as i32 } else { 0 };
        }
    };
    let outcome = match spec_from_cli(cli) {
        Ok(spec) => run_command(&spec),
        Err(e) => Outcome { status: ExitStatus::UsageError, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    outcome.status as i32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(command: Command, params: Params) -> JobSpec {
        JobSpec { command, params, format: Format::Tsv }
    }

    #[test]
    fn command_names_round_trip() {
        for c in [Command::Partitions, Command::VerifyZTau, Command::VerifyShiftSymmetries] {
            assert_eq!(c.to_string().parse::<Command>().unwrap(), c);
        }
        assert!("verify nothing".parse::<Command>().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let o = run_json(r#"{"command": "partitions", "params": {"n": 3, "colour": 1}}"#);
        assert_eq!(o.status, ExitStatus::UsageError);
        let o = run_json(r#"{"command": "partitions", "params": {"n": 3}, "extra": 0}"#);
        assert_eq!(o.status, ExitStatus::UsageError);
        let o = run_json(r#"{"command": "partitions", "params": {"n": 3}, "format": "tsv"}"#);
        assert_eq!(o.status, ExitStatus::Pass);
        assert_eq!(o.stdout.lines().count(), 4);
    }

    #[test]
    fn irrelevant_parameters_are_usage_errors() {
        let o = run_command(&job(Command::Partitions, Params { n: Some(3), k: Some(1), ..Params::default() }));
        assert_eq!(o.status, ExitStatus::UsageError);
        assert!(o.stderr.contains("'k'"));
    }

    #[test]
    fn bad_ranges() {
        assert!(range("3:1", "window").is_err());
        assert!(range("3", "window").is_err());
        assert_eq!(range("-8:8", "window").unwrap(), (-8, 8));
    }

    #[test]
    fn verification_failure_exit_code() {
        let p = Params { provider: Some("constant".into()), charges: Some("0:0".into()), d: Some(2), ..Params::default() };
        let o = run_command(&job(Command::VerifyHirota, p));
        assert_eq!(o.status, ExitStatus::VerificationFailure);
        assert!(o.stderr.starts_with("FAIL"));
    }

    #[test]
    fn output_is_deterministic() {
        let p = Params { lambda: Some("(2,1)".into()), ..Params::default() };
        let a = run_command(&JobSpec { command: Command::Schur, params: p.clone(), format: Format::Json });
        let b = run_command(&JobSpec { command: Command::Schur, params: p, format: Format::Json });
        assert_eq!(a, b);
        assert!(a.stdout.contains("\"principal_specialization\""));
    }
}
