//! `drinfeld`: batch computations with rank-2 Drinfeld modules over F_q[T]
//! that have complex multiplication.

use std::fmt;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use drinfeld_cm::bounds;
use drinfeld_cm::brown::{log_abs_j, weil_height};
use drinfeld_cm::classno::{check_class_bound, class_report};
use drinfeld_cm::cm::enumerate;
use drinfeld_cm::ffield::{prime_power, Fields};
use drinfeld_cm::laurent::EXACT;
use drinfeld_cm::modforms::{hilbert_poly, moduli_of, unit_check};
use drinfeld_cm::poly::{self, Poly, PolyRing};
use drinfeld_cm::quad::{Order, QuadField};
use drinfeld_cm::sweep::{self, flavor_name, SurveyOptions, VerifyOptions};
use drinfeld_cm::Error;

const SCHEMA: u32 = 1;
const MAX_Q: u32 = 16;
/// Vanishing digits past T^0 required when rounding Hilbert class polynomial coefficients.
const HILBERT_GUARD: i64 = 8;

const AFTER_HELP: &str = "\
Polynomials are written like 2*T^2+T+1; integer coefficients are element
encodings of F_q (for prime q, the residues 0..q-1).

TSV reports start with '#' lines echoing the configuration, the defining
polynomials of F_q and F_{q^2} over F_p, and the seed. The columns are:

  enumerate (with an order)  a, b, c, n, eps, elliptic, dist_deg, log_abs_j
  enumerate (no order)       flavor, size_log, disc_deg, points, order
  class-number               orbit, conductor_formula, h_max, lambda,
                             fe_residual, agree, bound, holds
  height                     moduli, log_abs_j, weil_height, lower_best,
                             upper_if_unit
  hilbert                    power, coefficient, sqrt_t_part, residual
  search-andre-oort          deg, product, in_fq, order1, point1, log1,
                             order2, point2, log2, precision
  search-units               flavor, size_log, moduli, method, norm_degree,
                             hilbert_constant_degree, is_unit, consistent,
                             order, error
  certificate                branch, bound, loglog
  verify                     check, ok, detail

JSON reports are objects {\"schema\": 1, \"command\", \"config\", \"ok\",
\"result\"}.

Exit codes: 0 ok, 1 invariant violation, 2 precision exhausted, 3 bad input.";

#[derive(Parser, Debug)]
#[command(name = "drinfeld", version, about = "Singular moduli of rank-2 Drinfeld modules over F_q[T]", after_help = AFTER_HELP)]
struct Cli {
    #[command(flatten)]
    cfg: Config,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct Config {
    /// Size of the constant field.
    #[arg(long, global = true)]
    q: Option<u32>,
    /// Defining polynomial of F_q over F_p, coefficients low to high, comma separated.
    #[arg(long, global = true)]
    modulus: Option<String>,
    /// Absolute precision of singular moduli, in digits of 1/T.
    #[arg(long, global = true, env = "DRINFELD_PREC", default_value_t = 100)]
    prec: i64,
    /// Seed of the randomized polynomial factorization.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Bound on |D| = q^deg D (on q^size for even q) for the sweeps.
    #[arg(long, global = true)]
    dbound: Option<u64>,
    /// Largest product degree searched by search-andre-oort (default q^2 - 1).
    #[arg(long, global = true)]
    degbound: Option<i64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Report format (default: json for certificate, tsv otherwise).
    #[arg(long, global = true, value_enum)]
    output: Option<Format>,
    /// Allow q above 16.
    #[arg(long, global = true)]
    allow_large_q: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Args, Debug, Clone, Default)]
struct OrderArgs {
    /// Discriminant D of the order A[√D] (odd q).
    #[arg(long)]
    disc: Option<String>,
    /// B in the Hasse normal form ξ² + ξ = B/C (even q).
    #[arg(long)]
    hasse_b: Option<String>,
    /// C in the Hasse normal form (even q, default 1).
    #[arg(long)]
    hasse_c: Option<String>,
    /// The field k(√T) (even q).
    #[arg(long)]
    insep: bool,
    /// Monic conductor f of the order (even q, default 1).
    #[arg(long)]
    conductor: Option<String>,
}

impl OrderArgs {
    fn given(&self) -> bool {
        self.disc.is_some() || self.hasse_b.is_some() || self.insep
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduced CM points of one order, or every order up to --dbound.
    Enumerate(OrderArgs),
    /// Class number by orbit count, conductor formula and L-polynomial.
    ClassNumber(OrderArgs),
    /// Valuations and Weil height of the singular moduli with the height bounds.
    Height(OrderArgs),
    /// The Hilbert class polynomial and its unit status.
    Hilbert(OrderArgs),
    /// Pairs of singular moduli whose product is a polynomial of degree ≤ --degbound.
    SearchAndreOort,
    /// Unit status and norm degree of every order up to --dbound.
    SearchUnits,
    /// The explicit bound on discriminants of orders with unit singular moduli.
    Certificate,
    /// Every check: per-order survey, counting sweeps, certificate, product search.
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Enumerate(_) => "enumerate",
            Command::ClassNumber(_) => "class-number",
            Command::Height(_) => "height",
            Command::Hilbert(_) => "hilbert",
            Command::SearchAndreOort => "search-andre-oort",
            Command::SearchUnits => "search-units",
            Command::Certificate => "certificate",
            Command::Verify => "verify",
        }
    }
}

/// Input rejected before any computation.
#[derive(Debug)]
struct BadInput(String);

impl fmt::Display for BadInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    BadInput(msg.into()).into()
}

/// The resolved configuration, echoed at the top of every report.
#[derive(Serialize)]
struct Echo {
    q: u32,
    p: u32,
    r: u32,
    fq_modulus: Vec<u32>,
    fq2_modulus: Vec<u32>,
    prec: i64,
    seed: u64,
    dbound: u64,
    size_log: i64,
    degbound: i64,
    jobs: String,
    order: Option<Value>,
}

struct Ctx {
    fl: Arc<Fields>,
    echo: Echo,
}

struct Report {
    json: Value,
    header: &'static str,
    rows: Vec<String>,
    /// Extra '#' lines after the configuration.
    notes: Vec<String>,
    ok: bool,
}

fn join(cols: &[String]) -> String {
    cols.join("\t")
}

fn setup(cfg: &Config) -> anyhow::Result<Ctx> {
    let q = cfg.q.ok_or_else(|| bad("--q is required"))?;
    let (p, r) = prime_power(q).ok_or_else(|| bad(format!("q = {q} is not a prime power")))?;
    if q > MAX_Q && !cfg.allow_large_q {
        return Err(bad(format!("q = {q} exceeds {MAX_Q}; pass --allow-large-q to run anyway")));
    }
    if cfg.prec < 1 {
        return Err(bad("--prec must be positive"));
    }
    let fl = match &cfg.modulus {
        None => Fields::new(q).map_err(|e| bad(e.to_string()))?,
        Some(m) => {
            let coeffs: Vec<u32> = m
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(format!("cannot parse modulus {m:?}")))?;
            Fields::with_modulus(q, coeffs).map_err(|e| bad(e.to_string()))?
        }
    };
    let dbound = cfg.dbound.unwrap_or((q as u64).pow(4));
    if dbound < q as u64 {
        return Err(bad(format!("--dbound {dbound} is below q")));
    }
    let size_log = (1..).take_while(|&s| (q as u64).checked_pow(s).is_some_and(|x| x <= dbound)).last().unwrap_or(0) as i64;
    let degbound = cfg.degbound.unwrap_or((q * q) as i64 - 1);
    if degbound < 0 {
        return Err(bad("--degbound must be nonnegative"));
    }
    let echo = Echo {
        q,
        p,
        r,
        fq_modulus: fl.fq.desc().modulus.clone(),
        fq2_modulus: fl.fq2.desc().modulus.clone(),
        prec: cfg.prec,
        seed: cfg.seed,
        dbound,
        size_log,
        degbound,
        jobs: cfg.jobs.map_or("auto".into(), |j| j.to_string()),
        order: None,
    };
    Ok(Ctx { fl, echo })
}

fn parse_poly(fl: &Fields, s: &str) -> anyhow::Result<Poly> {
    PolyRing::new(&fl.fq).parse(s).map_err(|e| bad(e.to_string()))
}

fn build_order(ctx: &Ctx, a: &OrderArgs) -> anyhow::Result<Order> {
    let fl = &ctx.fl;
    let order = if fl.odd() {
        if a.hasse_b.is_some() || a.hasse_c.is_some() || a.insep || a.conductor.is_some() {
            return Err(bad("odd q takes --disc only; the conductor is read off D"));
        }
        let d = a.disc.as_deref().ok_or_else(|| bad("odd q needs --disc"))?;
        Order::from_disc(fl, &parse_poly(fl, d)?)
    } else {
        if a.disc.is_some() {
            return Err(bad("even q takes --hasse-b/--hasse-c or --insep, and --conductor"));
        }
        let f = match &a.conductor {
            Some(s) => parse_poly(fl, s)?,
            None => Poly::one(),
        };
        let field = if a.insep {
            if a.hasse_b.is_some() || a.hasse_c.is_some() {
                return Err(bad("--insep excludes --hasse-b/--hasse-c"));
            }
            QuadField::even_insep(fl)
        } else {
            let b = a.hasse_b.as_deref().ok_or_else(|| bad("even q needs --hasse-b or --insep"))?;
            let c = match &a.hasse_c {
                Some(s) => parse_poly(fl, s)?,
                None => Poly::one(),
            };
            QuadField::even_sep(fl, &parse_poly(fl, b)?, &c)
        };
        field.and_then(|field| Order::new(field, f))
    };
    order.map_err(|e| match e {
        Error::Invalid(m) => bad(m),
        Error::Field(f) => bad(f.to_string()),
        e => e.into(),
    })
}

fn require_order(a: &OrderArgs) -> anyhow::Result<&OrderArgs> {
    if a.given() {
        Ok(a)
    } else {
        Err(bad("this command needs an order: --disc, --hasse-b, or --insep"))
    }
}

fn cmd_enumerate(ctx: &mut Ctx, a: &OrderArgs) -> anyhow::Result<Report> {
    if a.given() {
        let order = build_order(ctx, a)?;
        ctx.echo.order = Some(order.descriptor());
        let points = enumerate(&order)?;
        let mut rows = vec![];
        let mut js = vec![];
        for p in &points {
            let l = log_abs_j(&order, p)?;
            let (e, d) = match p.neighbor {
                Some(nb) => (nb.e.to_string(), nb.dist_deg.to_string()),
                None => ("-".into(), "-".into()),
            };
            rows.push(join(&[
                p.a.to_string(),
                p.b.to_string(),
                p.c.to_string(),
                p.n.to_string(),
                p.eps().to_string(),
                e.clone(),
                d.clone(),
                l.to_string(),
            ]));
            js.push(json!({
                "a": p.a.to_string(), "b": p.b.to_string(), "c": p.c.to_string(), "n": p.n,
                "eps": p.eps().to_string(), "elliptic": e, "dist_deg": d, "log_abs_j": l.to_string(),
            }));
        }
        return Ok(Report {
            json: json!({ "points": js }),
            header: "a\tb\tc\tn\teps\telliptic\tdist_deg\tlog_abs_j",
            rows,
            notes: vec![],
            ok: true,
        });
    }
    let os = sweep::orders(&ctx.fl, ctx.echo.size_log)?;
    let mut rows = vec![];
    let mut js = vec![];
    for o in &os {
        let n = enumerate(o)?.len();
        let dd = o.disc().map_or("-".into(), |d| d.deg().to_string());
        rows.push(join(&[
            flavor_name(o.flavor()).into(),
            o.size_log().to_string(),
            dd.clone(),
            n.to_string(),
            o.descriptor().to_string(),
        ]));
        js.push(json!({"flavor": flavor_name(o.flavor()), "size_log": o.size_log(), "disc_deg": dd, "points": n, "order": o.descriptor()}));
    }
    Ok(Report {
        json: json!({ "orders": js }),
        header: "flavor\tsize_log\tdisc_deg\tpoints\torder",
        rows,
        notes: vec![],
        ok: true,
    })
}

fn cmd_class_number(ctx: &mut Ctx, a: &OrderArgs) -> anyhow::Result<Report> {
    let order = build_order(ctx, require_order(a)?)?;
    ctx.echo.order = Some(order.descriptor());
    let rep = class_report(&order, ctx.echo.prec)?;
    let bound = if order.field.inert && order.disc().is_some_and(|d| d.deg() >= 1) {
        Some(check_class_bound(&order, rep.orbit, rep.h_ok)?)
    } else {
        None
    };
    let residual = rep.l_route.as_ref().map(|l| l.functional_equation_residual);
    let ok = rep.agree
        && residual.is_none_or(|r| r == 0)
        && bound.as_ref().is_none_or(|b| b.holds && b.holds_ok != Some(false));
    let lambda = rep.l_route.as_ref().map_or("-".into(), |l| {
        l.lambda.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    });
    let row = join(&[
        rep.orbit.to_string(),
        rep.conductor.to_string(),
        rep.h_ok.to_string(),
        lambda,
        residual.map_or("-".into(), |r| r.to_string()),
        rep.agree.to_string(),
        bound.as_ref().map_or("-".into(), |b| b.bound.to_string()),
        bound.as_ref().map_or("-".into(), |b| b.holds.to_string()),
    ]);
    Ok(Report {
        json: json!({ "class": rep, "bound": bound }),
        header: "orbit\tconductor_formula\th_max\tlambda\tfe_residual\tagree\tbound\tholds",
        rows: vec![row],
        notes: vec![],
        ok,
    })
}

fn cmd_height(ctx: &mut Ctx, a: &OrderArgs) -> anyhow::Result<Report> {
    let order = build_order(ctx, require_order(a)?)?;
    ctx.echo.order = Some(order.descriptor());
    let moduli = moduli_of(&order, ctx.echo.prec)?;
    let logs: Vec<_> = moduli.iter().map(|m| m.log_abs_j).collect();
    let height = weil_height(&logs);
    let h = moduli.len() as u64;
    let lower = bounds::lower_bounds_h(&order, h)?;
    let upper = if order.field.inert && order.disc().is_some_and(|d| d.deg() >= 4) {
        Some(bounds::upper_bound_h(&order, h, &num_one())?)
    } else {
        None
    };
    let notes = moduli
        .iter()
        .map(|m| {
            let p = &m.numeric.plan;
            format!(
                "truncation a = {}, b = {}: target2={} max_deg_a={} ec_terms={}",
                m.point.a, m.point.b, p.target2, p.max_deg_a, p.ec_terms
            )
        })
        .collect();
    let log_list = logs.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",");
    let row = join(&[
        moduli.len().to_string(),
        log_list.clone(),
        height.to_string(),
        lower.best().map_or("-".into(), |b| b.to_string()),
        upper.as_ref().map_or("-".into(), |u| u.optimized.to_string()),
    ]);
    let plans: Vec<_> = moduli.iter().map(|m| json!({"a": m.point.a.to_string(), "b": m.point.b.to_string(), "plan": m.numeric.plan})).collect();
    Ok(Report {
        json: json!({
            "moduli": moduli.len(), "log_abs_j": log_list, "weil_height": height.to_string(),
            "lower_bounds": lower, "upper_bound_if_unit": upper, "truncation": plans,
        }),
        header: "moduli\tlog_abs_j\tweil_height\tlower_best\tupper_if_unit",
        rows: vec![row],
        notes,
        ok: true,
    })
}

fn num_one() -> BigRational {
    BigRational::from_integer(1.into())
}

fn cmd_hilbert(ctx: &mut Ctx, a: &OrderArgs) -> anyhow::Result<Report> {
    let order = build_order(ctx, require_order(a)?)?;
    ctx.echo.order = Some(order.descriptor());
    let hp = hilbert_poly(&order, ctx.echo.prec, HILBERT_GUARD)?;
    let status = unit_check(&hp.coeffs);
    let mut rows = vec![];
    let mut coeffs = vec![];
    for (k, ((x, y), res)) in hp.coeffs.iter().zip(&hp.residuals).enumerate() {
        let res = if *res >= EXACT / 2 { "exact".to_string() } else { res.to_string() };
        rows.push(join(&[k.to_string(), x.to_string(), y.to_string(), res.clone()]));
        coeffs.push(json!({"power": k, "coefficient": x.to_string(), "sqrt_t_part": y.to_string(), "residual": res}));
    }
    let mut notes = vec![
        format!("degree={}", hp.degree()),
        format!("constant_term_degree={}", hp.constant_term_degree()),
        format!("unit_status={status:?}"),
    ];
    for (m, p) in hp.moduli.iter().zip(&hp.plans) {
        notes.push(format!(
            "truncation a = {}, b = {}: target2={} max_deg_a={} ec_terms={}",
            m.point.a, m.point.b, p.target2, p.max_deg_a, p.ec_terms
        ));
    }
    Ok(Report {
        json: json!({
            "degree": hp.degree(), "coefficients": coeffs,
            "constant_term_degree": hp.constant_term_degree().to_string(),
            "unit_status": format!("{status:?}"), "truncation": hp.plans,
        }),
        header: "power\tcoefficient\tsqrt_t_part\tresidual",
        rows,
        notes,
        ok: true,
    })
}

fn cmd_andre_oort(ctx: &Ctx) -> anyhow::Result<Report> {
    let e = &ctx.echo;
    let rep = sweep::andre_oort_search(&ctx.fl, e.size_log, e.degbound, e.prec)?;
    let rows = rep
        .hits
        .iter()
        .map(|h| {
            join(&[
                h.deg.to_string(),
                h.product.clone(),
                h.coefficients_in_fq.to_string(),
                h.order1.to_string(),
                h.point1.clone(),
                h.log_abs_j1.clone(),
                h.order2.to_string(),
                h.point2.clone(),
                h.log_abs_j2.clone(),
                h.precision.to_string(),
            ])
        })
        .collect();
    let mut notes = vec![
        format!("orders={} moduli={} candidates={}", rep.orders, rep.moduli, rep.candidates),
        format!("ramified_excluded={} not_polynomial={}", rep.ramified_excluded, rep.not_polynomial),
        format!(
            "hits={} min_hit_deg={} forbidden_max_deg={}",
            rep.hits.len(),
            rep.min_hit_deg.map_or("-".into(), |d| d.to_string()),
            rep.forbidden_max_deg
        ),
    ];
    for s in &rep.skipped {
        notes.push(format!("skipped {} {} x {} {}: deg {}, {}", s.order1, s.point1, s.order2, s.point2, s.deg, s.reason));
    }
    for err in &rep.errors {
        notes.push(format!("error {err}"));
    }
    Ok(Report {
        ok: rep.ok(),
        json: serde_json::to_value(&rep)?,
        header: "deg\tproduct\tin_fq\torder1\tpoint1\tlog1\torder2\tpoint2\tlog2\tprecision",
        rows,
        notes,
    })
}

fn cmd_units(ctx: &Ctx) -> anyhow::Result<Report> {
    let opts = SurveyOptions { want: ctx.echo.prec, valuations: false, bounds: true, ..SurveyOptions::default() };
    let rep = sweep::unit_search(&ctx.fl, ctx.echo.size_log, &opts)?;
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            let u = r.unit.as_ref();
            join(&[
                r.flavor.into(),
                r.size_log.to_string(),
                r.moduli.to_string(),
                u.map_or("-".into(), |u| u.method.into()),
                u.map_or("-".into(), |u| u.norm_degree.clone()),
                u.and_then(|u| u.hilbert_constant_degree.clone()).unwrap_or("-".into()),
                u.map_or("-".into(), |u| u.is_unit.to_string()),
                u.map_or("-".into(), |u| u.consistent.to_string()),
                r.order.to_string(),
                r.error.clone().unwrap_or("-".into()),
            ])
        })
        .collect();
    Ok(Report {
        ok: rep.ok(),
        notes: vec![format!("orders={} units={} failures={}", rep.rows.len(), rep.units, rep.failures)],
        json: serde_json::to_value(&rep)?,
        header: "flavor\tsize_log\tmoduli\tmethod\tnorm_degree\thilbert_constant_degree\tis_unit\tconsistent\torder\terror",
        rows,
    })
}

fn cmd_certificate(ctx: &Ctx) -> anyhow::Result<Report> {
    let c = bounds::final_certificate(ctx.echo.q)?;
    let rows = c.branches.iter().map(|b| join(&[b.name.clone(), b.bound.to_string(), b.loglog.to_string()])).collect();
    Ok(Report {
        ok: c.ok,
        notes: vec![
            format!("final_bound_loglog={}", c.final_bound_loglog),
            format!("log_slack_holds={}", c.log_slack_holds),
        ],
        json: serde_json::to_value(&c)?,
        header: "branch\tbound\tloglog",
        rows,
    })
}

fn cmd_verify(ctx: &Ctx) -> anyhow::Result<Report> {
    let mut opts = VerifyOptions::for_q(ctx.echo.q, ctx.echo.size_log);
    opts.deg_bound = ctx.echo.degbound;
    opts.survey.want = ctx.echo.prec;
    let rep = sweep::verify(&ctx.fl, &opts)?;
    let rows = rep.checks.iter().map(|c| join(&[c.name.into(), c.ok.to_string(), c.detail.clone()])).collect();
    Ok(Report { ok: rep.ok(), json: serde_json::to_value(&rep)?, header: "check\tok\tdetail", rows, notes: vec![] })
}

fn render(cmd: &str, echo: &Echo, rep: &Report, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => {
            let doc = json!({"schema": SCHEMA, "command": cmd, "config": echo, "ok": rep.ok, "result": rep.json});
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Tsv => {
            let list = |v: &[u32]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
            let mut out = format!("# drinfeld {cmd} schema={SCHEMA}\n");
            out += &format!(
                "# q={} p={} r={} prec={} seed={} dbound={} size_log={} degbound={} jobs={}\n",
                echo.q, echo.p, echo.r, echo.prec, echo.seed, echo.dbound, echo.size_log, echo.degbound, echo.jobs
            );
            out += &format!("# F_q modulus over F_p (low to high): {}\n", list(&echo.fq_modulus));
            out += &format!("# F_q^2 modulus over F_p (low to high): {}\n", list(&echo.fq2_modulus));
            if let Some(o) = &echo.order {
                out += &format!("# order: {o}\n");
            }
            for n in &rep.notes {
                out += &format!("# {n}\n");
            }
            out += &format!("# ok={}\n", rep.ok);
            out += rep.header;
            out += "\n";
            for r in &rep.rows {
                out += r;
                out += "\n";
            }
            Ok(out)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let mut ctx = setup(&cli.cfg)?;
    if let Some(j) = cli.cfg.jobs {
        if j == 0 {
            return Err(bad("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().context("thread pool")?;
    }
    poly::set_default_seed(cli.cfg.seed);
    let rep = match &cli.cmd {
        Command::Enumerate(a) => cmd_enumerate(&mut ctx, a)?,
        Command::ClassNumber(a) => cmd_class_number(&mut ctx, a)?,
        Command::Height(a) => cmd_height(&mut ctx, a)?,
        Command::Hilbert(a) => cmd_hilbert(&mut ctx, a)?,
        Command::SearchAndreOort => cmd_andre_oort(&ctx)?,
        Command::SearchUnits => cmd_units(&ctx)?,
        Command::Certificate => cmd_certificate(&ctx)?,
        Command::Verify => cmd_verify(&ctx)?,
    };
    let default = if matches!(cli.cmd, Command::Certificate) { Format::Json } else { Format::Tsv };
    print!("{}", render(cli.cmd.name(), &ctx.echo, &rep, cli.cfg.output.unwrap_or(default))?);
    Ok(rep.ok)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<BadInput>().is_some() {
        return 3;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Precision(_)) => 2,
        Some(Error::Invalid(_)) | Some(Error::Field(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("drinfeld: invariant violation, see the report");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("drinfeld: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
