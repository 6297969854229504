//! Argument handling and dispatch for the `hkquad` binary.

use std::time::Instant;

use clap::{Parser, ValueEnum};
use hkquad::integrate::{
    cauchy_extension, denjoy_extension, fubini, integrate, integrate_infinite_from, integrate_stieltjes, Gap,
    IntegralResult, IntegrateConfig, IntegrateError, PointIntegrand, Side, Status, StieltjesWeight,
};
use hkquad::propcheck::{default_corpus, default_suite, run_suite, CheckConfig};
use hkquad::variation::variation_bracket;
use hkquad::{Brick, DivisionError, Point, TagRule};
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::expr::{parse_expression, Expr, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Integrate,
    Stieltjes,
    Improper,
    Infinite,
    Fubini,
    Variation,
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tags {
    Gauss,
    Center,
    Corner,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "hkquad", version, about = "Gauge integration of expressions over bricks and the line")]
pub struct Cli {
    #[arg(value_enum)]
    pub mode: Mode,
    /// Integrand in x (and y, z for higher dimensions).
    pub expr: Option<String>,
    /// Bounds a,b[,c,d[,e,f]].
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    #[arg(long, default_value_t = 1e-8, allow_hyphen_values = true)]
    pub tol: f64,
    /// Singular points p1,p2 (points in the plane as x1,y1;x2,y2). Jump points for stieltjes.
    #[arg(long, allow_hyphen_values = true)]
    pub singular: Option<String>,
    /// Integrator g for stieltjes.
    #[arg(long, allow_hyphen_values = true)]
    pub weight: Option<String>,
    /// Open gaps (a1,b1);(a2,b2) for improper.
    #[arg(long, allow_hyphen_values = true)]
    pub gaps: Option<String>,
    /// First cutoffs a,b for infinite.
    #[arg(long, allow_hyphen_values = true)]
    pub cutoffs: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_refinements: Option<usize>,
    /// Tag placement inside each brick.
    #[arg(long, value_enum, default_value_t = Tags::Gauss)]
    pub tags: Tags,
    /// Suite for check.
    #[arg(long, default_value = "default")]
    pub suite: String,
}

#[derive(Debug, Error)]
pub enum UsageError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Bad(String),
}

fn bad<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError::Bad(msg.into()))
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NONINTEGRABLE: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

/// Result of one invocation: exit code and the text for stdout.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

/// The fixed output record, plus mode-specific fields in `extra`.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub value: Option<f64>,
    pub err_estimate: Option<f64>,
    pub status: String,
    pub refinements: usize,
    pub items: usize,
    pub evaluations: u64,
    pub elapsed_ms: f64,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

pub const CSV_COLUMNS: [&str; 7] = ["value", "err_estimate", "status", "refinements", "items", "evaluations", "elapsed_ms"];

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::DepthExhausted => "depth_exhausted",
        Status::MaxRefinements => "max_refinements",
        Status::Oscillating => "oscillating",
    }
}

impl Record {
    fn from_result(r: &IntegralResult) -> Self {
        Record {
            value: Some(r.value),
            err_estimate: Some(r.err_estimate),
            status: status_name(r.status).into(),
            refinements: r.refinements,
            items: r.items,
            evaluations: r.evaluations,
            elapsed_ms: 0.0,
            extra: Map::new(),
        }
    }

    fn from_error(e: &IntegrateError) -> Self {
        let mut extra = Map::new();
        extra.insert("error".into(), Value::String(e.to_string()));
        Record {
            value: None,
            err_estimate: None,
            status: error_status(e).0.into(),
            refinements: 0,
            items: 0,
            evaluations: 0,
            elapsed_ms: 0.0,
            extra,
        }
    }

    fn code(&self) -> i32 {
        match self.status.as_str() {
            "converged" | "unbounded" => EXIT_OK,
            "nonintegrable" | "divergent_tail" | "non_finite" => EXIT_NONINTEGRABLE,
            "invalid_input" => EXIT_USAGE,
            _ => EXIT_EXHAUSTED,
        }
    }
}

fn error_status(e: &IntegrateError) -> (&'static str, i32) {
    match e {
        IntegrateError::NonIntegrable { .. } => ("nonintegrable", EXIT_NONINTEGRABLE),
        IntegrateError::DivergentTail { .. } => ("divergent_tail", EXIT_NONINTEGRABLE),
        IntegrateError::NonFinite { .. } => ("non_finite", EXIT_NONINTEGRABLE),
        IntegrateError::InvalidInput(_) => ("invalid_input", EXIT_USAGE),
        IntegrateError::Division(DivisionError::DimensionMismatch { .. } | DivisionError::InvalidConfig(_)) => {
            ("invalid_input", EXIT_USAGE)
        }
        _ => ("exhausted", EXIT_EXHAUSTED),
    }
}

fn record_of(r: Result<IntegralResult, IntegrateError>) -> Record {
    match r {
        Ok(r) => Record::from_result(&r),
        Err(e) => Record::from_error(&e),
    }
}

/// Driver configuration for the given flags.
pub fn integrate_config(cli: &Cli) -> IntegrateConfig {
    let mut cfg = match cli.tags {
        Tags::Gauss => IntegrateConfig::gauss(),
        Tags::Center => IntegrateConfig::with_rule(TagRule::Center),
        Tags::Corner => IntegrateConfig::with_rule(TagRule::Corner),
    };
    if let Some(s) = cli.seed {
        cfg = cfg.seeded(s);
    }
    if let Some(d) = cli.max_depth {
        cfg.builder.max_depth = d;
    }
    if let Some(r) = cli.max_refinements {
        cfg.max_refinements = r;
    }
    cfg
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, UsageError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| UsageError::Bad(format!("{what}: cannot read {t:?} as a number"))))
        .collect()
}

pub fn parse_domain(s: &str) -> Result<Brick, UsageError> {
    let v = numbers(s, "--domain")?;
    if v.is_empty() || v.len() % 2 != 0 || v.len() > 6 {
        return bad("--domain takes 2, 4 or 6 numbers");
    }
    let pairs: Vec<(f64, f64)> = v.chunks(2).map(|c| (c[0], c[1])).collect();
    Brick::from_bounds(&pairs).map_err(|e| UsageError::Bad(format!("--domain: {e}")))
}

/// Points as `x1,y1;x2,y2`, or a plain comma list of `dim`-tuples.
pub fn parse_points(s: &str, dim: usize) -> Result<Vec<Point>, UsageError> {
    let groups: Vec<Vec<f64>> = if s.contains(';') {
        s.split(';').map(|g| numbers(g, "--singular")).collect::<Result<_, _>>()?
    } else {
        numbers(s, "--singular")?.chunks(dim.max(1)).map(|c| c.to_vec()).collect()
    };
    if groups.iter().any(|g| g.len() != dim) {
        return bad(format!("--singular: points need {dim} coordinates"));
    }
    Ok(groups.into_iter().map(Point::from_vec).collect())
}

pub fn parse_gaps(s: &str) -> Result<Vec<Gap>, UsageError> {
    s.split(';')
        .map(|g| {
            let t = g.trim().trim_start_matches('(').trim_end_matches(')');
            match numbers(t, "--gaps")?.as_slice() {
                [lo, hi] => Ok(Gap { lo: *lo, hi: *hi }),
                _ => bad(format!("--gaps: {g:?} is not (a,b)")),
            }
        })
        .collect()
}

fn parse(src: &str, dim: usize) -> Result<Expr, UsageError> {
    parse_expression(src, dim).map_err(|e: ParseError| {
        let caret: String = " ".repeat(e.pos) + "^";
        UsageError::Parse(format!("parse error: {e}\n  {src}\n  {caret}"))
    })
}

fn integrand(e: Expr) -> PointIntegrand {
    PointIntegrand::new(move |p| e.eval(p))
}

fn need_expr(cli: &Cli) -> Result<&str, UsageError> {
    cli.expr.as_deref().ok_or_else(|| UsageError::Bad("an integrand expression is required".into()))
}

fn need_domain(cli: &Cli) -> Result<Brick, UsageError> {
    parse_domain(cli.domain.as_deref().ok_or_else(|| UsageError::Bad("--domain is required".into()))?)
}

fn line(cli: &Cli) -> Result<(f64, f64), UsageError> {
    let d = need_domain(cli)?;
    if d.dim() != 1 {
        return bad("this mode integrates over an interval a,b");
    }
    Ok((d.lower()[0], d.upper()[0]))
}

/// Singular points from the flag plus those the builtins know of, inside `domain`.
fn singular_points(cli: &Cli, e: &Expr, domain: &Brick) -> Result<Vec<Point>, UsageError> {
    let mut pts = match &cli.singular {
        Some(s) => parse_points(s, domain.dim())?,
        None => Vec::new(),
    };
    if domain.dim() == 1 {
        for h in e.singular_hints() {
            let p = Point::from(h);
            if domain.contains(&p) && !pts.contains(&p) {
                pts.push(p);
            }
        }
    }
    Ok(pts)
}

/// Integral over `[a, b]` with ladders into each listed singular point.
pub fn improper_pieces(
    f: &PointIntegrand,
    a: f64,
    b: f64,
    singular: &[f64],
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<IntegralResult, IntegrateError> {
    let mut s: Vec<f64> = singular.iter().copied().filter(|x| (a..=b).contains(x)).collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.is_empty() {
        let d = Brick::interval(a, b).map_err(|e| IntegrateError::InvalidInput(e.to_string()))?;
        return integrate(f, &d, tol, cfg);
    }
    let mut nodes: Vec<(f64, bool)> = Vec::new();
    let mut push = |x: f64, sing: bool| {
        if let Some(last) = nodes.last_mut() {
            if last.0 == x {
                last.1 |= sing;
                return;
            }
            if last.1 && sing {
                let m = 0.5 * (last.0 + x);
                nodes.push((m, false));
            }
        }
        nodes.push((x, sing));
    };
    push(a, false);
    for &x in &s {
        push(x, true);
    }
    push(b, false);
    let pieces = nodes.len() - 1;
    let t = tol / pieces as f64;
    let mut parts = Vec::with_capacity(pieces);
    for w in nodes.windows(2) {
        let ((u, su), (v, sv)) = (w[0], w[1]);
        let r = if su {
            cauchy_extension(f, u, v, Side::Left, t, cfg)?
        } else if sv {
            cauchy_extension(f, u, v, Side::Right, t, cfg)?
        } else {
            let d = Brick::interval(u, v).map_err(|e| IntegrateError::InvalidInput(e.to_string()))?;
            integrate(f, &d, t, cfg)?
        };
        parts.push(r);
    }
    Ok(IntegralResult::sum(&parts))
}

fn ok_json(r: &Option<f64>) -> Value {
    match r {
        Some(v) if v.is_finite() => json!(v),
        _ => Value::Null,
    }
}

fn run_mode(cli: &Cli, cfg: &IntegrateConfig) -> Result<Record, UsageError> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return bad("--tol must be positive");
    }
    let tol = cli.tol;
    Ok(match cli.mode {
        Mode::Integrate => {
            let d = need_domain(cli)?;
            let e = parse(need_expr(cli)?, d.dim())?;
            let pts = singular_points(cli, &e, &d)?;
            record_of(integrate(&integrand(e).with_singular_points(pts), &d, tol, cfg))
        }
        Mode::Stieltjes => {
            let (a, b) = line(cli)?;
            let f = parse(need_expr(cli)?, 1)?;
            let g = parse(cli.weight.as_deref().ok_or_else(|| UsageError::Bad("--weight is required".into()))?, 1)?;
            let jumps = match &cli.singular {
                Some(s) => numbers(s, "--singular")?,
                None => Vec::new(),
            };
            let w = StieltjesWeight::new(move |x| g.eval(&[x])).with_jumps(jumps);
            let d = Brick::interval(a, b).map_err(|e| UsageError::Bad(e.to_string()))?;
            record_of(integrate_stieltjes(&integrand(f), &w, &d, tol, cfg))
        }
        Mode::Improper => {
            let (a, b) = line(cli)?;
            let e = parse(need_expr(cli)?, 1)?;
            let f = integrand(e);
            if let Some(g) = &cli.gaps {
                let gaps = parse_gaps(g)?;
                let d = Brick::interval(a, b).map_err(|e| UsageError::Bad(e.to_string()))?;
                record_of(denjoy_extension(&f, &d, &gaps, tol, cfg))
            } else {
                let s = match &cli.singular {
                    Some(s) => numbers(s, "--singular")?,
                    None => return bad("improper needs --singular or --gaps"),
                };
                record_of(improper_pieces(&f, a, b, &s, tol, cfg))
            }
        }
        Mode::Infinite => {
            let e = parse(need_expr(cli)?, 1)?;
            let cut = match &cli.cutoffs {
                Some(c) => match numbers(c, "--cutoffs")?.as_slice() {
                    [a, b] => (*a, *b),
                    _ => return bad("--cutoffs takes a,b"),
                },
                None => (-1.0, 1.0),
            };
            record_of(integrate_infinite_from(&integrand(e), cut, tol, cfg))
        }
        Mode::Fubini => {
            let d = need_domain(cli)?;
            if d.dim() != 2 {
                return bad("fubini needs --domain a,b,c,d");
            }
            let e = parse(need_expr(cli)?, 2)?;
            let pts = singular_points(cli, &e, &d)?;
            let x = Brick::interval(d.lower()[0], d.upper()[0]).map_err(|e| UsageError::Bad(e.to_string()))?;
            let y = Brick::interval(d.lower()[1], d.upper()[1]).map_err(|e| UsageError::Bad(e.to_string()))?;
            match fubini(&integrand(e).with_singular_points(pts), &x, &y, tol, cfg) {
                Ok(r) => {
                    let mut rec = match &r.double {
                        Ok(v) => Record::from_result(v),
                        Err(msg) => {
                            let mut rec = Record::from_error(&IntegrateError::NonIntegrable {
                                at: Point::new(&[]),
                                reason: msg.clone(),
                            });
                            if !msg.starts_with("not integrable") {
                                rec.status = "exhausted".into();
                            }
                            rec.extra.insert("error".into(), Value::String(msg.clone()));
                            rec
                        }
                    };
                    for (k, v) in [("iterated_xy", &r.iterated_xy), ("iterated_yx", &r.iterated_yx)] {
                        let val = match v {
                            Ok(v) => json!({"value": ok_json(&Some(v.value)), "err_estimate": v.err_estimate}),
                            Err(m) => json!({"error": m}),
                        };
                        rec.extra.insert(k.into(), val);
                    }
                    rec
                }
                Err(e) => Record::from_error(&e),
            }
        }
        Mode::Variation => {
            let d = need_domain(cli)?;
            let e = parse(need_expr(cli)?, d.dim())?;
            let pts = singular_points(cli, &e, &d)?;
            match variation_bracket(&integrand(e).with_singular_points(pts), &d, tol, cfg) {
                Ok(v) => {
                    let mut extra = Map::new();
                    extra.insert("lower".into(), json!(v.lower));
                    extra.insert("upper".into(), serde_json::to_value(v.upper).expect("upper serializes"));
                    extra.insert("gauge_used".into(), json!(v.gauge_used));
                    extra.insert("divisions_tried".into(), json!(v.divisions_tried));
                    let finite = !v.upper.is_infinite();
                    Record {
                        value: finite.then(|| v.upper.value()),
                        err_estimate: finite.then(|| (v.upper.value() - v.lower).abs()),
                        status: if finite { "converged" } else { "unbounded" }.into(),
                        refinements: 0,
                        items: 0,
                        evaluations: 0,
                        elapsed_ms: 0.0,
                        extra,
                    }
                }
                Err(e) => Record::from_error(&e),
            }
        }
        Mode::Check => unreachable!("check is dispatched separately"),
    })
}

fn render(rec: &Record, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(rec).expect("record serializes"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_COLUMNS).expect("csv header");
            let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                num(rec.value),
                num(rec.err_estimate),
                rec.status.clone(),
                rec.refinements.to_string(),
                rec.items.to_string(),
                rec.evaluations.to_string(),
                rec.elapsed_ms.to_string(),
            ])
            .expect("csv row");
            String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
        }
    }
}

fn run_check(cli: &Cli, cfg: &IntegrateConfig) -> Result<Outcome, UsageError> {
    if cli.suite != "default" {
        return bad(format!("unknown suite {:?}", cli.suite));
    }
    let mut ccfg = CheckConfig { integrate: cfg.clone(), ..CheckConfig::default() };
    if let Some(s) = cli.seed {
        ccfg.seed = s;
        // The jitter seed would change the divisions; the seed only moves split points here.
        ccfg.integrate.builder.rng_seed = None;
    }
    let report = run_suite(&default_suite(), &default_corpus(), &ccfg);
    let stdout = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["check", "entry", "params", "lhs", "rhs", "margin", "tolerance", "verdict", "evaluations", "note"])
                .expect("csv header");
            for r in &report.rows {
                w.write_record([
                    r.check.name().to_string(),
                    r.entry.clone(),
                    r.params.clone(),
                    r.lhs.to_string(),
                    r.rhs.to_string(),
                    r.margin.to_string(),
                    r.tolerance.to_string(),
                    format!("{:?}", r.verdict).to_lowercase(),
                    r.evaluations.to_string(),
                    r.note.clone(),
                ])
                .expect("csv row");
            }
            String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
        }
    };
    Ok(Outcome { code: if report.all_passed() { EXIT_OK } else { EXIT_CHECK_FAILED }, stdout })
}

/// Runs one invocation. Usage problems come back as `Err` with the message for stderr.
pub fn run(cli: &Cli) -> Result<Outcome, UsageError> {
    let cfg = integrate_config(cli);
    if cli.mode == Mode::Check {
        return run_check(cli, &cfg);
    }
    let start = Instant::now();
    let mut rec = run_mode(cli, &cfg)?;
    rec.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Outcome { code: rec.code(), stdout: render(&rec, cli.format) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::parse_from(std::iter::once("hkquad").chain(args.iter().copied()))
    }

    #[test]
    fn flags() {
        let c = cli(&["integrate", "x^2", "--domain", "-1,1", "--tol", "1e-6", "--seed", "3", "--max-refinements", "9"]);
        assert_eq!(c.mode, Mode::Integrate);
        assert_eq!(c.tol, 1e-6);
        let cfg = integrate_config(&c);
        assert_eq!(cfg.max_refinements, 9);
        assert_eq!(cfg.builder.rng_seed, Some(3));
        assert_eq!(parse_domain("0,1,2,3").unwrap().dim(), 2);
        assert!(parse_domain("0,1,2").is_err());
    }

    #[test]
    fn point_lists() {
        assert_eq!(parse_points("0,0.5", 1).unwrap().len(), 2);
        let p = parse_points("0,0;1,1", 2).unwrap();
        assert_eq!(p[1].coords(), &[1.0, 1.0]);
        assert!(parse_points("0,0,1", 2).is_err());
        let g = parse_gaps("(0,0.5);(0.6,0.7)").unwrap();
        assert_eq!(g[1], Gap { lo: 0.6, hi: 0.7 });
    }

    #[test]
    fn pieces_around_points() {
        let f = PointIntegrand::of_x(|x: f64| x.abs().powf(-0.5));
        let r = improper_pieces(&f, -1.0, 1.0, &[0.0], 1e-6, &IntegrateConfig::gauss()).unwrap();
        assert!((r.value - 4.0).abs() < 1e-6, "{r:?}");
    }
}
