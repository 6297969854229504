//! Convergence theorems and inequalities checked numerically over a small corpus.
//!
//! A row compares two sides. Its `margin` is `rhs - lhs` for an inequality `lhs <= rhs`
//! and `-|lhs - rhs|` for an equality; the row passes when `margin >= -tolerance`.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::brick::{Brick, Point};
use crate::division::TagRule;
use crate::integrate::{
    by_parts, fubini, henstock_residual, integrate, integrate_detailed, IntegralResult, IntegrateConfig, IntegrateError,
    PointIntegrand, StieltjesWeight,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    Levi,
    Fatou,
    Dominated,
    Holder,
    Minkowski,
    Additivity,
    Henstock,
    FubiniConsistency,
    ByPartsIdentity,
}

impl CheckId {
    pub const ALL: [CheckId; 9] = [
        CheckId::Levi,
        CheckId::Fatou,
        CheckId::Dominated,
        CheckId::Holder,
        CheckId::Minkowski,
        CheckId::Additivity,
        CheckId::Henstock,
        CheckId::FubiniConsistency,
        CheckId::ByPartsIdentity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckId::Levi => "levi",
            CheckId::Fatou => "fatou",
            CheckId::Dominated => "dominated",
            CheckId::Holder => "holder",
            CheckId::Minkowski => "minkowski",
            CheckId::Additivity => "additivity",
            CheckId::Henstock => "henstock",
            CheckId::FubiniConsistency => "fubini_consistency",
            CheckId::ByPartsIdentity => "by_parts_identity",
        }
    }

    pub fn parse(s: &str) -> Option<CheckId> {
        CheckId::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Smooth,
    Singular,
    Oscillatory,
    Stieltjes,
    Family,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// A check, the corpus tags it runs on (all entries when empty), and its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremCheck {
    pub id: CheckId,
    pub corpus_filter: Vec<Tag>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Stated,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KnownValue {
    pub value: f64,
    pub provenance: Provenance,
}

pub type Primitive = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Terms = Arc<dyn Fn(u32) -> PointIntegrand + Send + Sync>;

/// Shape of a corpus entry.
#[derive(Clone)]
pub enum Integrand {
    /// One integrand, with an antiderivative when it is on the line.
    Single { f: PointIntegrand, primitive: Option<Primitive> },
    /// `f_j` for listed `j`, converging like `1/j`, with optional pointwise limit, lower
    /// limit and dominating pair.
    Sequence {
        terms: Terms,
        indices: Vec<u32>,
        limit: Option<PointIntegrand>,
        liminf: Option<PointIntegrand>,
        bounds: Option<(PointIntegrand, PointIntegrand)>,
        increasing: bool,
    },
    /// Two integrands on the same domain.
    Pair { f: PointIntegrand, g: PointIntegrand },
    /// A function of `(x, y)` on `I x J`.
    Product { f: PointIntegrand, x: Brick, y: Brick },
    /// A Stieltjes pair and whether integration by parts should hold for it.
    Stieltjes { f: StieltjesWeight, g: StieltjesWeight, identity: bool },
}

#[derive(Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub integrand: Integrand,
    pub domain: Brick,
    pub tags: Vec<Tag>,
    pub known_value: Option<KnownValue>,
}

impl std::fmt::Debug for CorpusEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CorpusEntry").field("name", &self.name).field("tags", &self.tags).finish()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub check: CheckId,
    pub entry: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub evaluations: u64,
    pub note: String,
}

impl Row {
    fn new(check: CheckId, entry: &str, params: String, tolerance: f64) -> Self {
        Row {
            check,
            entry: entry.into(),
            params,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            tolerance,
            verdict: Verdict::Skipped,
            evaluations: 0,
            note: String::new(),
        }
    }

    fn inequality(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self.margin = rhs - lhs;
        self.verdict = if self.margin >= -self.tolerance { Verdict::Pass } else { Verdict::Fail };
        self
    }

    fn equality(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self.margin = -(lhs - rhs).abs();
        self.verdict = if self.margin >= -self.tolerance { Verdict::Pass } else { Verdict::Fail };
        self
    }

    fn skipped(mut self, why: &str) -> Self {
        self.verdict = Verdict::Skipped;
        self.note = why.into();
        self
    }

    fn failed(mut self, why: String) -> Self {
        self.verdict = Verdict::Fail;
        self.note = why;
        self
    }

    fn cost(mut self, evals: u64) -> Self {
        self.evaluations += evals;
        self
    }
}

/// Settings shared by all checks of a run.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub integrate: IntegrateConfig,
    /// Tolerance of each integral the checks compute.
    pub inner_tol: f64,
    /// Seed of the split points for additivity.
    pub seed: u64,
    pub splits: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { integrate: IntegrateConfig::gauss(), inner_tol: 1e-9, seed: 7, splits: 3 }
    }
}

fn x_of<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> PointIntegrand {
    PointIntegrand::of_x(f)
}

fn iv(a: f64, b: f64) -> Brick {
    Brick::interval(a, b).expect("corpus interval")
}

fn closed(v: f64) -> Option<KnownValue> {
    Some(KnownValue { value: v, provenance: Provenance::ClosedForm })
}

fn single(name: &str, f: PointIntegrand, prim: Option<Primitive>, domain: Brick, tags: &[Tag], known: Option<KnownValue>) -> CorpusEntry {
    CorpusEntry {
        name: name.into(),
        integrand: Integrand::Single { f, primitive: prim },
        domain,
        tags: tags.to_vec(),
        known_value: known,
    }
}

fn pair(name: &str, f: PointIntegrand, g: PointIntegrand, domain: Brick) -> CorpusEntry {
    CorpusEntry { name: name.into(), integrand: Integrand::Pair { f, g }, domain, tags: vec![Tag::Smooth], known_value: None }
}

/// The corpus the default suite runs on.
pub fn default_corpus() -> Vec<CorpusEntry> {
    use Tag::*;
    let origin = vec![Point::from(0.0)];
    let mut c = vec![
        single("cubic", x_of(|x| x * x * x - x), Some(Arc::new(|x| x.powi(4) / 4.0 - x * x / 2.0)), iv(0.0, 2.0), &[Smooth], closed(2.0)),
        single("sine", x_of(f64::sin), Some(Arc::new(|x| -x.cos())), iv(0.0, PI), &[Smooth], closed(2.0)),
        single("exp", x_of(f64::exp), Some(Arc::new(f64::exp)), iv(0.0, 1.0), &[Smooth], closed(E - 1.0)),
        single("lorentz", x_of(|x| 1.0 / (1.0 + x * x)), Some(Arc::new(f64::atan)), iv(0.0, 1.0), &[Smooth], closed(PI / 4.0)),
        single("kink", x_of(|x| (x - 1.0 / 3.0).abs()), Some(Arc::new(|x| 0.5 * (x - 1.0 / 3.0) * (x - 1.0 / 3.0).abs())), iv(0.0, 1.0), &[Smooth], closed(5.0 / 18.0)),
        single("cos20", x_of(|x| (20.0 * x).cos()), Some(Arc::new(|x| (20.0 * x).sin() / 20.0)), iv(0.0, 1.0), &[Oscillatory], closed(20f64.sin() / 20.0)),
        single("bump", x_of(|x| (-x * x).exp()), None, iv(-2.0, 2.0), &[Smooth], None),
        single("inv_sqrt", x_of(|x| x.powf(-0.5)).with_singular_points(origin.clone()), Some(Arc::new(|x| 2.0 * x.sqrt())), iv(0.0, 1.0), &[Singular], closed(2.0)),
        single("log", x_of(f64::ln).with_singular_points(origin.clone()), Some(Arc::new(|x| if x == 0.0 { 0.0 } else { x * x.ln() - x })), iv(0.0, 1.0), &[Singular], closed(-1.0)),
        single("plane", PointIntegrand::new(|p| p[0] + 2.0 * p[1]), None, Brick::unit(2), &[Smooth], closed(1.5)),
        pair("x_and_1-x", x_of(|x| x), x_of(|x| 1.0 - x), iv(0.0, 1.0)),
        pair("x_and_x", x_of(|x| x), x_of(|x| x), iv(0.0, 1.0)),
        pair("sin_and_cos", x_of(f64::sin), x_of(f64::cos), iv(0.0, PI / 2.0)),
        pair("exp_and_square", x_of(f64::exp), x_of(|x| x * x), iv(-1.0, 1.0)),
    ];
    c.push(CorpusEntry {
        name: "truncated_inv_sqrt".into(),
        integrand: Integrand::Sequence {
            terms: Arc::new(|r| {
                let r = r as f64;
                x_of(move |x| if x * r * r <= 1.0 { r } else { x.powf(-0.5) })
            }),
            indices: vec![8, 16, 32, 64],
            limit: Some(x_of(|x| x.powf(-0.5)).with_singular_points(vec![Point::from(0.0)])),
            liminf: None,
            bounds: None,
            increasing: true,
        },
        domain: iv(0.0, 1.0),
        tags: vec![Family, Singular],
        known_value: Some(KnownValue { value: 2.0, provenance: Provenance::Stated }),
    });
    c.push(CorpusEntry {
        name: "alternating".into(),
        integrand: Integrand::Sequence {
            terms: Arc::new(|j| if j % 2 == 0 { x_of(|x| x) } else { x_of(|x| 1.0 - x) }),
            indices: (1..=6).collect(),
            limit: None,
            liminf: Some(x_of(|x| x.min(1.0 - x))),
            bounds: Some((x_of(|_| 0.0), x_of(|_| 1.0))),
            increasing: false,
        },
        domain: iv(0.0, 1.0),
        tags: vec![Family],
        known_value: closed(0.25),
    });
    c.push(CorpusEntry {
        name: "compound_interest".into(),
        integrand: Integrand::Sequence {
            terms: Arc::new(|j| {
                let j = j as f64;
                x_of(move |x| (1.0 + x / j).powf(j))
            }),
            indices: vec![8, 16, 32, 64],
            limit: Some(x_of(f64::exp)),
            liminf: Some(x_of(f64::exp)),
            bounds: Some((x_of(|_| 1.0), x_of(f64::exp))),
            increasing: true,
        },
        domain: iv(0.0, 1.0),
        tags: vec![Family, Smooth],
        known_value: closed(E - 1.0),
    });
    c.push(CorpusEntry {
        name: "shrinking_hat".into(),
        integrand: Integrand::Sequence {
            terms: Arc::new(|j| {
                let j = j as f64;
                x_of(move |x| x.powf(1.0 + 1.0 / j))
            }),
            indices: vec![8, 16, 32, 64],
            limit: Some(x_of(|x| x)),
            liminf: Some(x_of(|x| x)),
            bounds: Some((x_of(|_| 0.0), x_of(|_| 1.0))),
            increasing: true,
        },
        domain: iv(0.0, 1.0),
        tags: vec![Family, Smooth],
        known_value: closed(0.5),
    });
    for (name, f, known) in [
        ("xy", PointIntegrand::new(|p| p[0] * p[1]), 0.25),
        ("sin_sum", PointIntegrand::new(|p| (p[0] + p[1]).sin()), 2.0 * 1f64.sin() - 2f64.sin()),
        ("exp_x_y2", PointIntegrand::new(|p| p[0].exp() * p[1] * p[1]), (E - 1.0) / 3.0),
    ] {
        c.push(CorpusEntry {
            name: name.into(),
            integrand: Integrand::Product { f, x: iv(0.0, 1.0), y: iv(0.0, 1.0) },
            domain: Brick::unit(2),
            tags: vec![Smooth],
            known_value: closed(known),
        });
    }
    for (name, f, g, identity, dom) in [
        ("x_dx2", StieltjesWeight::new(|x| x), StieltjesWeight::new(|x| x * x), true, iv(0.0, 1.0)),
        ("sin_dexp", StieltjesWeight::new(f64::sin), StieltjesWeight::new(f64::exp), true, iv(0.0, 1.0)),
        (
            "indicator_pair",
            StieltjesWeight::new(|x| if x <= 0.0 { 1.0 } else { 0.0 }).with_jumps(vec![0.0]),
            StieltjesWeight::new(|x| if x <= 0.0 { 0.0 } else { 1.0 }).with_jumps(vec![0.0]),
            false,
            iv(-1.0, 1.0),
        ),
    ] {
        c.push(CorpusEntry {
            name: name.into(),
            integrand: Integrand::Stieltjes { f, g, identity },
            domain: dom,
            tags: vec![Stieltjes],
            known_value: None,
        });
    }
    c
}

/// The default suite with its shipped tolerances.
pub fn default_suite() -> Vec<TheoremCheck> {
    use Tag::*;
    let check = |id, filter: &[Tag], tolerance| TheoremCheck { id, corpus_filter: filter.to_vec(), tolerance };
    vec![
        check(CheckId::Levi, &[Family], 1e-3),
        check(CheckId::Fatou, &[Family], 1e-3),
        check(CheckId::Dominated, &[Family], 1e-3),
        check(CheckId::Holder, &[Smooth], 1e-8),
        check(CheckId::Minkowski, &[Smooth], 1e-8),
        check(CheckId::Additivity, &[Smooth, Singular, Oscillatory], 1e-8),
        check(CheckId::Henstock, &[Smooth, Singular, Oscillatory], 4.0),
        check(CheckId::FubiniConsistency, &[Smooth], 3e-8),
        check(CheckId::ByPartsIdentity, &[Stieltjes], 3e-8),
    ]
}

fn int(f: &PointIntegrand, d: &Brick, cfg: &CheckConfig) -> Result<IntegralResult, IntegrateError> {
    integrate(f, d, cfg.inner_tol, &cfg.integrate)
}

/// Richardson limit of values at `j` and `2j` for an error of order `1/j`.
fn richardson(vals: &[(u32, f64)]) -> f64 {
    match vals {
        [.., (a, x), (b, y)] if *b == 2 * *a => 2.0 * y - x,
        [.., (_, y)] => *y,
        [] => f64::NAN,
    }
}

/// Rows for one check over the entries that carry one of its tags.
pub fn run_check(c: &TheoremCheck, corpus: &[CorpusEntry], cfg: &CheckConfig) -> Vec<Row> {
    let entries: Vec<&CorpusEntry> = corpus
        .iter()
        .filter(|e| c.corpus_filter.is_empty() || e.tags.iter().any(|t| c.corpus_filter.contains(t)))
        .collect();
    let mut rows: Vec<Row> = entries.par_iter().flat_map_iter(|e| rows_for(c, e, cfg)).collect();
    sort_rows(&mut rows);
    rows
}

fn rows_for(c: &TheoremCheck, e: &CorpusEntry, cfg: &CheckConfig) -> Vec<Row> {
    let row = |params: String| Row::new(c.id, &e.name, params, c.tolerance);
    let wrong = || vec![row(String::new()).skipped("entry shape does not fit this check")];
    match (c.id, &e.integrand) {
        (CheckId::Levi, Integrand::Sequence { terms, indices, limit: Some(lim), increasing: true, .. }) => {
            vec![levi(row(format!("r={}", indices.last().copied().unwrap_or(0))), e, terms, indices, lim, cfg)]
        }
        (CheckId::Fatou, Integrand::Sequence { terms, indices, liminf: Some(li), increasing, .. }) => {
            vec![fatou(row(String::new()), e, terms, indices, li, *increasing, cfg)]
        }
        (CheckId::Dominated, Integrand::Sequence { terms, indices, limit: Some(lim), bounds: Some(b), .. }) => {
            vec![dominated(row(String::new()), e, terms, indices, lim, b, cfg)]
        }
        (CheckId::Holder, Integrand::Pair { f, g }) => {
            [2.0, 3.0].iter().map(|&p| holder(row(format!("p={p}")), e, f, g, p, cfg)).collect()
        }
        (CheckId::Minkowski, Integrand::Pair { f, g }) => {
            [1.0, 2.0, 3.0].iter().map(|&p| minkowski(row(format!("p={p}")), e, f, g, p, cfg)).collect()
        }
        (CheckId::Additivity, Integrand::Single { f, .. }) => additivity(c, e, f, cfg),
        (CheckId::Henstock, Integrand::Single { f, primitive: Some(p) }) if e.domain.dim() == 1 => {
            vec![henstock(row(String::new()), e, f, p, cfg)]
        }
        (CheckId::FubiniConsistency, Integrand::Product { f, x, y }) => vec![fubini_row(row(String::new()), f, x, y, cfg)],
        (CheckId::ByPartsIdentity, Integrand::Stieltjes { f, g, identity }) => {
            vec![by_parts_row(row(format!("expect_identity={identity}")), e, f, g, *identity, cfg)]
        }
        _ => wrong(),
    }
}

fn sequence_values(terms: &Terms, indices: &[u32], d: &Brick, cfg: &CheckConfig) -> Result<(Vec<(u32, f64)>, u64), IntegrateError> {
    let mut out = Vec::with_capacity(indices.len());
    let mut evals = 0;
    for &j in indices {
        let r = int(&terms(j), d, cfg)?;
        evals += r.evaluations;
        out.push((j, r.value));
    }
    Ok((out, evals))
}

fn levi(row: Row, e: &CorpusEntry, terms: &Terms, indices: &[u32], lim: &PointIntegrand, cfg: &CheckConfig) -> Row {
    let (vals, evals) = match sequence_values(terms, indices, &e.domain, cfg) {
        Ok(v) => v,
        Err(err) => return row.failed(err.to_string()),
    };
    if vals.windows(2).any(|w| w[1].1 < w[0].1 - cfg.inner_tol) {
        return row.cost(evals).failed("integrals of the family decrease".into());
    }
    match int(lim, &e.domain, cfg) {
        Ok(r) => row.cost(evals + r.evaluations).equality(r.value, richardson(&vals)),
        Err(err) => row.cost(evals).failed(err.to_string()),
    }
}

fn fatou(row: Row, e: &CorpusEntry, terms: &Terms, indices: &[u32], li: &PointIntegrand, increasing: bool, cfg: &CheckConfig) -> Row {
    let (vals, evals) = match sequence_values(terms, indices, &e.domain, cfg) {
        Ok(v) => v,
        Err(err) => return row.failed(err.to_string()),
    };
    let liminf_int = if increasing {
        richardson(&vals)
    } else {
        // Smallest integral over the second half of the listed terms.
        vals[vals.len() / 2..].iter().map(|v| v.1).fold(f64::INFINITY, f64::min)
    };
    match int(li, &e.domain, cfg) {
        Ok(r) => row.cost(evals + r.evaluations).inequality(r.value, liminf_int),
        Err(err) => row.cost(evals).failed(err.to_string()),
    }
}

fn dominated(
    row: Row,
    e: &CorpusEntry,
    terms: &Terms,
    indices: &[u32],
    lim: &PointIntegrand,
    bounds: &(PointIntegrand, PointIntegrand),
    cfg: &CheckConfig,
) -> Row {
    let d = &e.domain;
    if d.dim() == 1 {
        let (a, w) = (d.lower()[0], d.edge(0));
        for &j in indices {
            let f = terms(j);
            for k in 0..=64 {
                let x = [a + w * k as f64 / 64.0];
                let v = f.eval(&x);
                if v < bounds.0.eval(&x) - 1e-12 || v > bounds.1.eval(&x) + 1e-12 {
                    return row.failed(format!("term {j} leaves its bounds at {}", x[0]));
                }
            }
        }
    }
    for g in [&bounds.0, &bounds.1] {
        if let Err(err) = int(g, d, cfg) {
            return row.failed(format!("bound not integrable: {err}"));
        }
    }
    let (vals, evals) = match sequence_values(terms, indices, d, cfg) {
        Ok(v) => v,
        Err(err) => return row.failed(err.to_string()),
    };
    match int(lim, d, cfg) {
        Ok(r) => row.cost(evals + r.evaluations).equality(richardson(&vals), r.value),
        Err(err) => row.cost(evals).failed(err.to_string()),
    }
}

fn norm(f: &PointIntegrand, p: f64, d: &Brick, cfg: &CheckConfig) -> Result<(f64, u64), IntegrateError> {
    let r = int(&f.map(move |v| v.abs().powf(p)), d, cfg)?;
    Ok((r.value.max(0.0).powf(1.0 / p), r.evaluations))
}

fn holder(row: Row, e: &CorpusEntry, f: &PointIntegrand, g: &PointIntegrand, p: f64, cfg: &CheckConfig) -> Row {
    let q = p / (p - 1.0);
    let (f2, g2) = (f.clone(), g.clone());
    let fg = PointIntegrand::new(move |x| (f2.eval(x) * g2.eval(x)).abs());
    let run = || -> Result<(f64, f64, u64), IntegrateError> {
        let l = int(&fg, &e.domain, cfg)?;
        let (nf, a) = norm(f, p, &e.domain, cfg)?;
        let (ng, b) = norm(g, q, &e.domain, cfg)?;
        Ok((l.value, nf * ng, l.evaluations + a + b))
    };
    match run() {
        Ok((l, r, n)) => row.cost(n).inequality(l, r),
        Err(err) => row.failed(err.to_string()),
    }
}

fn minkowski(row: Row, e: &CorpusEntry, f: &PointIntegrand, g: &PointIntegrand, p: f64, cfg: &CheckConfig) -> Row {
    let (f2, g2) = (f.clone(), g.clone());
    let sum = PointIntegrand::new(move |x| f2.eval(x) + g2.eval(x));
    let run = || -> Result<(f64, f64, u64), IntegrateError> {
        let (ns, a) = norm(&sum, p, &e.domain, cfg)?;
        let (nf, b) = norm(f, p, &e.domain, cfg)?;
        let (ng, c) = norm(g, p, &e.domain, cfg)?;
        Ok((ns, nf + ng, a + b + c))
    };
    match run() {
        Ok((l, r, n)) => row.cost(n).inequality(l, r),
        Err(err) => row.failed(err.to_string()),
    }
}

/// Split points in the middle 80% of the first axis, from the configured seed.
pub fn split_points(domain: &Brick, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, w) = (domain.lower()[0], domain.edge(0));
    (0..n).map(|_| a + w * rng.random_range(0.1..0.9)).collect()
}

fn split_at(d: &Brick, c: f64) -> (Brick, Brick) {
    let mut hi = d.upper().to_vec();
    let mut lo = d.lower().to_vec();
    hi[0] = c;
    lo[0] = c;
    (Brick::new(d.lower(), &hi).expect("split"), Brick::new(&lo, d.upper()).expect("split"))
}

fn additivity(c: &TheoremCheck, e: &CorpusEntry, f: &PointIntegrand, cfg: &CheckConfig) -> Vec<Row> {
    let whole = int(f, &e.domain, cfg);
    split_points(&e.domain, cfg.splits, cfg.seed ^ hash(&e.name))
        .into_iter()
        .map(|s| {
            let row = Row::new(c.id, &e.name, format!("c={s:.17}"), c.tolerance);
            let (l, r) = split_at(&e.domain, s);
            match (&whole, int(f, &l, cfg), int(f, &r, cfg)) {
                (Ok(w), Ok(a), Ok(b)) => {
                    // Each side carries its own error estimates.
                    let mut row = row.cost(w.evaluations + a.evaluations + b.evaluations);
                    row.tolerance = c.tolerance + w.err_estimate + a.err_estimate + b.err_estimate;
                    row.equality(w.value, a.value + b.value)
                }
                (Err(err), _, _) => row.failed(err.to_string()),
                (_, Err(err), _) | (_, _, Err(err)) => row.failed(err.to_string()),
            }
        })
        .collect()
}

fn hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

/// `sum |f(P) mu(J) - F(J)|` over the final division against `tolerance` times the
/// tolerance the integral ran at.
fn henstock(row: Row, e: &CorpusEntry, f: &PointIntegrand, prim: &Primitive, cfg: &CheckConfig) -> Row {
    // Cells of a Gauss rule are not fine in the point-tag sense the lemma needs.
    let mut point_tags = cfg.integrate.clone();
    point_tags.builder.tag_rule = TagRule::Center;
    match integrate_detailed(f, &e.domain, cfg.inner_tol, &point_tags) {
        Ok(d) if d.result.converged() => {
            let p = prim.clone();
            let (_, abs) = henstock_residual(f, move |j: &Brick| p(j.upper()[0]) - p(j.lower()[0]), &d.division);
            let mut row = row.cost(d.result.evaluations);
            let factor = row.tolerance;
            row.tolerance = 0.0;
            row.inequality(abs, factor * cfg.inner_tol)
        }
        Ok(d) => row.failed(format!("integral ended {:?}", d.result.status)),
        Err(err) => row.failed(err.to_string()),
    }
}

fn fubini_row(row: Row, f: &PointIntegrand, x: &Brick, y: &Brick, cfg: &CheckConfig) -> Row {
    match fubini(f, x, y, cfg.inner_tol, &cfg.integrate) {
        Ok(r) => match (&r.double, &r.iterated_xy, &r.iterated_yx) {
            (Ok(d), Ok(a), Ok(b)) => {
                let spread = (d.value - a.value).abs().max((d.value - b.value).abs());
                let evals = d.evaluations + a.evaluations + b.evaluations;
                let lhs = if (d.value - a.value).abs() >= (d.value - b.value).abs() { a.value } else { b.value };
                let mut row = row.cost(evals).equality(d.value, lhs);
                row.note = format!("spread {spread:e}");
                row
            }
            _ => row.failed(format!("{:?} {:?} {:?}", r.double.as_ref().err(), r.iterated_xy.as_ref().err(), r.iterated_yx.as_ref().err())),
        },
        Err(err) => row.failed(err.to_string()),
    }
}

fn by_parts_row(row: Row, e: &CorpusEntry, f: &StieltjesWeight, g: &StieltjesWeight, identity: bool, cfg: &CheckConfig) -> Row {
    match by_parts(f, g, &e.domain, cfg.inner_tol, &cfg.integrate) {
        Ok(bp) => {
            let (Ok(a), Ok(b)) = (&bp.f_dg, &bp.g_df) else {
                return row.failed("a Stieltjes integral failed".into());
            };
            let mut row = row.cost(a.evaluations + b.evaluations).equality(a.value + b.value, bp.boundary);
            row.note = format!("residual {:e}", bp.residual);
            if !identity {
                // The identity must fail here, by the residual.
                let ok = row.verdict == Verdict::Fail && (row.margin.abs() - bp.residual).abs() <= row.tolerance;
                row.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
            }
            row
        }
        Err(err) => row.failed(err.to_string()),
    }
}

fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| (a.check, &a.entry, &a.params).cmp(&(b.check, &b.entry, &b.params)));
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportHeader {
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub inner_tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub header: ReportHeader,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.header.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Report over the given rows, ordered by check, entry and parameters.
pub fn emit_report(mut rows: Vec<Row>, cfg: &CheckConfig) -> Report {
    sort_rows(&mut rows);
    let count = |v| rows.iter().filter(|r| r.verdict == v).count();
    Report {
        header: ReportHeader {
            rows: rows.len(),
            passed: count(Verdict::Pass),
            failed: count(Verdict::Fail),
            skipped: count(Verdict::Skipped),
            inner_tol: cfg.inner_tol,
            seed: cfg.seed,
        },
        rows,
    }
}

pub fn run_suite(checks: &[TheoremCheck], corpus: &[CorpusEntry], cfg: &CheckConfig) -> Report {
    let rows = checks.iter().flat_map(|c| run_check(c, corpus, cfg)).collect();
    emit_report(rows, cfg)
}
