//! The `conslaw` command line: flags or a job file in, a text or JSON report
//! out. Exit status 0 on success, 1 on a negative verdict, 2 on bad input.

pub mod job;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use conslaw_core::evolution::{construct_evolution, flux_from_density, verify_conserved_current};
use conslaw_core::families::{
    construct_family_affine, construct_family_h, construct_family_omega, sign_relation, verify_family_affine,
    verify_family_h, verify_family_omega,
};
use conslaw_core::jet::euler;
use conslaw_core::ode::{check_order_bounds, construct_ode, construct_ode_alt, first_integrals, verify_integrating_factor};
use conslaw_core::vorticity::{build_v, verify_closed_vorticity, vorticity_context};
use conslaw_core::wronskian::wronskian;
use conslaw_core::{ClosureData, Error, EvolutionEquation, Expression, JetContext, OrderReport};
use serde::Serialize;
use serde_json::Value;

pub use job::{parse_job_file, Format, Job, JobError};

#[derive(Parser, Debug)]
#[command(name = "conslaw", version, about = "Inverse problems on conservation laws, solved and checked exactly")]
struct Cli {
    /// Context header, e.g. "vars t x; unknowns u"
    #[arg(long, global = true)]
    context: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Job file with a context header and `name = expression` lines
    #[arg(long, global = true)]
    job: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The ODE admitting the given integrating factors, `L = DT(λ)†H`
    ConstructOde {
        /// `;`-separated integrating factors
        #[arg(long, allow_hyphen_values = true)]
        factors: Option<String>,
        #[arg(long = "H", allow_hyphen_values = true)]
        h: Option<String>,
    },
    /// First integrals matching the factors of `construct-ode`
    FirstIntegrals {
        #[arg(long, allow_hyphen_values = true)]
        factors: Option<String>,
        #[arg(long = "H", allow_hyphen_values = true)]
        h: Option<String>,
    },
    /// Checks `E(λL) = 0` for each factor
    VerifyFactor {
        #[arg(long = "L", allow_hyphen_values = true)]
        l: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        factors: Option<String>,
    },
    /// The evolution equation `u_t = G` admitting the given densities
    ConstructEvolution {
        #[arg(long, allow_hyphen_values = true)]
        densities: Option<String>,
        #[arg(long = "H", allow_hyphen_values = true)]
        h: Option<String>,
    },
    /// Checks `D_t ρ + D_x σ = 0` on solutions of `u_t = G`
    VerifyCurrent {
        #[arg(long = "G", allow_hyphen_values = true)]
        g: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<String>,
    },
    /// The flux of a density of `u_t = G`
    Flux {
        #[arg(long = "G", allow_hyphen_values = true)]
        g: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<String>,
    },
    /// Checks a family of zero-order characteristics: h, affine or omega
    VerifyFamily {
        #[arg(long)]
        family: Option<String>,
        #[arg(long = "L", allow_hyphen_values = true)]
        l: Option<String>,
        /// `;`-separated variable names (family h)
        #[arg(long)]
        args: Option<String>,
        /// base variable name (family affine)
        #[arg(long)]
        base: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
    },
    /// Builds an equation admitting a family: divergence of F (h), double
    /// divergence of K (affine) or `D_i(G^ij D_j ω)` (omega)
    ConstructFamily {
        #[arg(long)]
        family: Option<String>,
        #[arg(long = "F", allow_hyphen_values = true)]
        f: Option<String>,
        #[arg(long)]
        args: Option<String>,
        /// one matrix row per occurrence
        #[arg(long = "K", allow_hyphen_values = true)]
        k: Vec<String>,
        #[arg(long)]
        base: Option<String>,
        /// one matrix row per occurrence
        #[arg(long = "G", allow_hyphen_values = true)]
        g: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
    },
    /// Closes the averaged vorticity equation from P1 P2 P3 S1 S2 S3 and
    /// checks its conservation laws
    VorticityClosure {
        /// file with `P1 = …` … `S3 = …` lines
        file: Option<PathBuf>,
    },
    /// Euler operator with respect to one unknown
    Euler {
        #[arg(long, allow_hyphen_values = true)]
        f: Option<String>,
        #[arg(long)]
        unknown: Option<String>,
    },
    /// Total derivative in one variable
    Totald {
        #[arg(long, allow_hyphen_values = true)]
        f: Option<String>,
        #[arg(long)]
        var: Option<String>,
    },
}

type Bindings = Vec<(String, String)>;

fn bind(pairs: &[(&str, &Option<String>)]) -> Bindings {
    pairs
        .iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| ((*k).to_owned(), v.clone())))
        .collect()
}

fn rows(name: &str, rows: &[String]) -> Bindings {
    rows.iter().map(|r| (name.to_owned(), r.clone())).collect()
}

impl Command {
    fn into_parts(self) -> Result<(&'static str, Bindings), JobError> {
        Ok(match self {
            Command::ConstructOde { factors, h } => ("construct-ode", bind(&[("factors", &factors), ("H", &h)])),
            Command::FirstIntegrals { factors, h } => ("first-integrals", bind(&[("factors", &factors), ("H", &h)])),
            Command::VerifyFactor { l, factors } => ("verify-factor", bind(&[("L", &l), ("factors", &factors)])),
            Command::ConstructEvolution { densities, h } => {
                ("construct-evolution", bind(&[("densities", &densities), ("H", &h)]))
            }
            Command::VerifyCurrent { g, rho, sigma } => {
                ("verify-current", bind(&[("G", &g), ("rho", &rho), ("sigma", &sigma)]))
            }
            Command::Flux { g, rho } => ("flux", bind(&[("G", &g), ("rho", &rho)])),
            Command::VerifyFamily { family, l, args, base, omega } => (
                "verify-family",
                bind(&[("family", &family), ("L", &l), ("args", &args), ("base", &base), ("omega", &omega)]),
            ),
            Command::ConstructFamily { family, f, args, k, base, g, omega } => {
                let mut b = bind(&[("family", &family), ("F", &f), ("args", &args), ("base", &base), ("omega", &omega)]);
                b.extend(rows("K", &k));
                b.extend(rows("G", &g));
                ("construct-family", b)
            }
            Command::VorticityClosure { file } => {
                let mut b = Vec::new();
                if let Some(path) = file {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| JobError(format!("{}: {e}", path.display())))?;
                    let closure = parse_job_file(&text)?;
                    if let Some(header) = closure.context {
                        b.push(("context".to_owned(), header));
                    }
                    b.extend(closure.bindings);
                }
                ("vorticity-closure", b)
            }
            Command::Euler { f, unknown } => ("euler", bind(&[("f", &f), ("unknown", &unknown)])),
            Command::Totald { f, var } => ("totald", bind(&[("f", &f), ("var", &var)])),
        })
    }
}

/// The machine-readable report; `--format structured` prints it as JSON.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    /// Canonical forms of the inputs, plus the context header.
    pub inputs: BTreeMap<String, Value>,
    /// An expression, a list of expressions, or null for pure checks.
    pub result: Value,
    pub verdicts: BTreeMap<String, bool>,
    pub sign_note: Option<String>,
    pub order_report: Option<Value>,
    /// Shown on stderr only.
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.to_owned(),
            ..Default::default()
        }
    }

    fn input(&mut self, name: &str, v: impl Into<Value>) {
        self.inputs.insert(name.to_owned(), v.into());
    }

    pub fn exit_code(&self) -> i32 {
        if self.verdicts.values().all(|&v| v) {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => {
                let mut s = serde_json::to_string_pretty(self).expect("serializable");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut out = String::new();
                match &self.result {
                    Value::String(s) => out.push_str(&format!("{s}\n")),
                    Value::Array(items) => {
                        for i in items {
                            out.push_str(&format!("{}\n", i.as_str().unwrap_or_default()));
                        }
                    }
                    _ => {}
                }
                if self.result.is_null() && self.verdicts.len() == 1 {
                    let v = self.verdicts.values().next().expect("one verdict");
                    out.push_str(&format!("{v}\n"));
                } else {
                    for (k, v) in &self.verdicts {
                        out.push_str(&format!("{k}: {v}\n"));
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    /// An internal verification rejected a construction, or the input
    /// fails a property the command requires (no flux for a non-density).
    Negative(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Negative(_) => 1,
        }
    }
}

impl From<JobError> for Failure {
    fn from(e: JobError) -> Self {
        Failure::Input(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistent(_) | Error::NotADensity(_) | Error::NotADivergence(_) => {
                Failure::Negative(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// What the binary prints and returns.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let job = match assemble(cli) {
        Ok(job) => job,
        Err(e) => return failed(&Failure::from(e)),
    };
    match execute(&job) {
        Ok(report) => Outcome {
            code: report.exit_code(),
            stdout: report.render(job.format),
            stderr: report.warnings.iter().map(|w| format!("warning: {w}\n")).collect(),
        },
        Err(f) => failed(&f),
    }
}

fn failed(f: &Failure) -> Outcome {
    let msg = match f {
        Failure::Input(m) => format!("error: {m}\n"),
        Failure::Negative(m) => format!("rejected: {m}\n"),
    };
    Outcome {
        code: f.exit_code(),
        stdout: String::new(),
        stderr: msg,
    }
}

fn assemble(cli: Cli) -> Result<Job, JobError> {
    let mut job = match &cli.job {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| JobError(format!("{}: {e}", path.display())))?;
            parse_job_file(&text)?
        }
        None => Job::default(),
    };
    if let Some(cmd) = cli.command {
        let (tag, mut bindings) = cmd.into_parts()?;
        if !job.command.is_empty() && job.command != tag {
            return Err(JobError(format!("job file is for `{}`, not `{tag}`", job.command)));
        }
        job.command = tag.to_owned();
        if let Some(pos) = bindings.iter().position(|(k, _)| k == "context") {
            job.context = Some(bindings.remove(pos).1);
        }
        job.override_with(bindings);
    }
    if job.command.is_empty() {
        return Err(JobError("no command given".into()));
    }
    if let Some(c) = cli.context {
        job.context = Some(c);
    }
    if let Some(f) = cli.format {
        job.format = match f {
            FormatArg::Text => Format::Text,
            FormatArg::Structured => Format::Structured,
        };
    }
    Ok(job)
}

fn context(job: &Job, default: &str) -> Result<Arc<JetContext>, Failure> {
    let header = job.context.as_deref().unwrap_or(default);
    Ok(JetContext::parse(header)?)
}

fn expr(ctx: &Arc<JetContext>, name: &str, text: &str) -> Result<Expression, Failure> {
    Expression::parse(ctx, text).map_err(|e| Failure::Input(format!("{name}: {e}")))
}

fn expr_list(ctx: &Arc<JetContext>, name: &str, text: &str) -> Result<Vec<Expression>, Failure> {
    text.split(';').map(|item| expr(ctx, name, item.trim())).collect()
}

fn joined(es: &[Expression]) -> String {
    es.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn strings(es: &[Expression]) -> Value {
    Value::Array(es.iter().map(|e| Value::String(e.to_string())).collect())
}

fn var_index(ctx: &JetContext, name: &str) -> Result<usize, Failure> {
    ctx.independent_index(name.trim())
        .ok_or_else(|| Failure::Input(format!("`{name}` is not an independent variable")))
}

fn order_value(o: Option<u32>) -> Value {
    o.map_or_else(|| Value::String("-inf".into()), Value::from)
}

fn order_report_value(r: &OrderReport) -> Value {
    serde_json::json!({
        "r": order_value(r.r),
        "q": order_value(r.q),
        "p": r.p,
        "ord_h_hat": order_value(r.ord_h_hat),
        "bound": r.bound.map_or_else(|| Value::String("-inf".into()), Value::from),
        "bound_holds": r.bound_holds,
        "h_hat_bound": r.h_hat_bound,
        "exact_order": r.exact_order,
        "h_orders_exact": r.h_orders_exact,
    })
}

const ODE: &str = "vars t; unknowns u";
const EVOLUTION: &str = "vars t x; unknowns u";

pub fn execute(job: &Job) -> Result<Report, Failure> {
    let cmd = job.command.as_str();
    let mut rep = Report::new(cmd);
    match cmd {
        "construct-ode" | "first-integrals" => {
            let ctx = context(job, ODE)?;
            let lambdas = expr_list(&ctx, "factors", job.require("factors")?)?;
            let h = expr(&ctx, "H", job.require("H")?)?;
            rep.input("context", ctx.header());
            rep.input("factors", joined(&lambdas));
            rep.input("H", h.to_string());
            if cmd == "first-integrals" {
                rep.result = strings(&first_integrals(&lambdas, &h)?);
            } else {
                let l = construct_ode(&lambdas, &h)?;
                let w = wronskian(&ctx, &lambdas, 0)?;
                let h_hat = w.checked_mul(&h)?;
                let alt = construct_ode_alt(&lambdas, &h_hat)?;
                rep.sign_note = Some(match sign_relation(&l, &alt)? {
                    Some(s) => format!(
                        "(-1)^p W(φ̂¹, …, φ̂^p, Ĥ)/W(λ)^p = {s:+} · L with p = {}",
                        lambdas.len()
                    ),
                    None => "the Wronskian representation differs from L".into(),
                });
                rep.order_report = Some(order_report_value(&check_order_bounds(&lambdas, &h_hat)?));
                rep.result = Value::String(l.to_string());
            }
        }
        "verify-factor" => {
            let ctx = context(job, ODE)?;
            let l = expr(&ctx, "L", job.require("L")?)?;
            let lambdas = expr_list(&ctx, "factors", job.require("factors")?)?;
            rep.input("context", ctx.header());
            rep.input("L", l.to_string());
            rep.input("factors", joined(&lambdas));
            for lambda in &lambdas {
                rep.verdicts.insert(lambda.to_string(), verify_integrating_factor(&l, lambda)?);
            }
        }
        "construct-evolution" => {
            let ctx = context(job, EVOLUTION)?;
            let rhos = expr_list(&ctx, "densities", job.require("densities")?)?;
            let h = expr(&ctx, "H", job.require("H")?)?;
            rep.input("context", ctx.header());
            rep.input("densities", joined(&rhos));
            rep.input("H", h.to_string());
            let built = construct_evolution(&rhos, &h)?;
            rep.warnings.extend(built.warning.clone());
            rep.result = Value::String(built.rhs.to_string());
        }
        "verify-current" | "flux" => {
            let ctx = context(job, EVOLUTION)?;
            let g = expr(&ctx, "G", job.require("G")?)?;
            let rho = expr(&ctx, "rho", job.require("rho")?)?;
            rep.input("context", ctx.header());
            rep.input("G", g.to_string());
            rep.input("rho", rho.to_string());
            let (eq, warning) = EvolutionEquation::new_unchecked(g)?;
            rep.warnings.extend(warning);
            if cmd == "flux" {
                rep.result = Value::String(flux_from_density(&eq, &rho)?.to_string());
            } else {
                let sigma = expr(&ctx, "sigma", job.require("sigma")?)?;
                rep.input("sigma", sigma.to_string());
                rep.verdicts.insert("conserved".into(), verify_conserved_current(&eq, &rho, &sigma)?);
            }
        }
        "verify-family" | "construct-family" => family(job, &mut rep)?,
        "vorticity-closure" => {
            let ctx = match &job.context {
                Some(h) => JetContext::parse(h)?,
                None => vorticity_context(),
            };
            let get = |k: &str| -> Result<Expression, Failure> {
                job.get(k).map_or_else(|| Ok(Expression::zero(&ctx)), |t| expr(&ctx, k, t))
            };
            let p = [get("P1")?, get("P2")?, get("P3")?];
            let s = [get("S1")?, get("S2")?, get("S3")?];
            rep.input("context", ctx.header());
            for (k, e) in ["P1", "P2", "P3"].iter().zip(&p).chain(["S1", "S2", "S3"].iter().zip(&s)) {
                rep.input(k, e.to_string());
            }
            let v = build_v(&ClosureData::new(p, s)?)?;
            let report = verify_closed_vorticity(&v)?;
            rep.result = Value::String(v.to_string());
            rep.verdicts.insert("circulation".into(), report.circulation);
            rep.verdicts.insert("momentum_x".into(), report.momentum_x);
            rep.verdicts.insert("momentum_y".into(), report.momentum_y);
            rep.verdicts.insert("energy".into(), report.energy);
        }
        "euler" => {
            let ctx = context(job, EVOLUTION)?;
            let f = expr(&ctx, "f", job.require("f")?)?;
            let a = match job.get("unknown") {
                Some(name) => ctx
                    .dependent_index(name.trim())
                    .ok_or_else(|| Failure::Input(format!("`{name}` is not an unknown")))?,
                None => 0,
            };
            rep.input("context", ctx.header());
            rep.input("f", f.to_string());
            rep.input("unknown", ctx.dependent()[a].clone());
            rep.result = Value::String(euler(&f, a)?.to_string());
        }
        "totald" => {
            let ctx = context(job, EVOLUTION)?;
            let f = expr(&ctx, "f", job.require("f")?)?;
            let name = job.require("var")?;
            let i = var_index(&ctx, name)?;
            rep.input("context", ctx.header());
            rep.input("f", f.to_string());
            rep.input("var", name.trim());
            rep.result = Value::String(f.total_derivative(i)?.to_string());
        }
        other => return Err(Failure::Input(format!("unknown command `{other}`"))),
    }
    Ok(rep)
}

fn matrix(ctx: &Arc<JetContext>, name: &str, rows: &[&str]) -> Result<Vec<Vec<Expression>>, Failure> {
    if rows.is_empty() {
        return Err(Failure::Input(format!("`{name}` needs at least one row")));
    }
    rows.iter().map(|r| expr_list(ctx, name, r)).collect()
}

fn family(job: &Job, rep: &mut Report) -> Result<(), Failure> {
    let ctx = context(job, EVOLUTION)?;
    let kind = job.require("family")?;
    rep.input("context", ctx.header());
    rep.input("family", kind);
    let constructing = job.command == "construct-family";
    let given = if constructing {
        None
    } else {
        let l = expr(&ctx, "L", job.require("L")?)?;
        rep.input("L", l.to_string());
        Some(l)
    };
    let (l, holds) = match kind {
        "h" => {
            let args = job
                .require("args")?
                .split(';')
                .map(|n| var_index(&ctx, n))
                .collect::<Result<Vec<_>, _>>()?;
            rep.input("args", job.require("args")?);
            let l = match given {
                Some(l) => l,
                None => {
                    let fs = expr_list(&ctx, "F", job.require("F")?)?;
                    rep.input("F", joined(&fs));
                    construct_family_h(&fs, &args)?
                }
            };
            let holds = verify_family_h(&l, &args)?;
            (l, holds)
        }
        "affine" => {
            let base = var_index(&ctx, job.require("base")?)?;
            rep.input("base", job.require("base")?);
            let l = match given {
                Some(l) => l,
                None => {
                    let ks = matrix(&ctx, "K", &job.all("K"))?;
                    rep.input("K", Value::Array(ks.iter().map(|r| Value::String(joined(r))).collect()));
                    construct_family_affine(&ks, base)?
                }
            };
            let holds = verify_family_affine(&l, base)?;
            (l, holds)
        }
        "omega" => {
            let omega = expr(&ctx, "omega", job.require("omega")?)?;
            rep.input("omega", omega.to_string());
            let l = match given {
                Some(l) => l,
                None => {
                    let g = matrix(&ctx, "G", &job.all("G"))?;
                    rep.input("G", Value::Array(g.iter().map(|r| Value::String(joined(r))).collect()));
                    construct_family_omega(&g, &omega)?
                }
            };
            let holds = verify_family_omega(&l, &omega)?;
            (l, holds)
        }
        other => return Err(Failure::Input(format!("unknown family `{other}` (expected h, affine or omega)"))),
    };
    if constructing {
        rep.result = Value::String(l.to_string());
    }
    rep.verdicts.insert(format!("{kind} family"), holds);
    Ok(())
}
