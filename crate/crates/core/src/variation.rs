//! Variation brackets, outer measure, derivatives of brick functions and step
//! approximations.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::brick::{Brick, Point};
use crate::division::{cousin_bisect, BuilderConfig, TagRule};
use crate::gauge::{CountablePoints, Gauge};
use crate::integrate::{abs_sum, integrate, integrate_detailed, IntegrateConfig, IntegrateError, IntervalIntegrand, PointIntegrand};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationError {
    #[error("brick function is not finite on {0:?}")]
    NonFinite(Brick),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Upper end of a bracket. Serialized as a number or the string `"+inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upper {
    Finite(f64),
    Infinite,
}

impl Upper {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Upper::Infinite)
    }

    pub fn value(&self) -> f64 {
        match self {
            Upper::Finite(v) => *v,
            Upper::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Upper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Upper::Finite(v) => write!(f, "{v}"),
            Upper::Infinite => write!(f, "+inf"),
        }
    }
}

impl Serialize for Upper {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Upper::Finite(v) => s.serialize_f64(*v),
            Upper::Infinite => s.serialize_str("+inf"),
        }
    }
}

/// Bracket for a variation. `lower` holds for the gauge in `gauge_used`; `upper` holds for
/// the variation itself when it comes from an integral, and for that gauge otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct VariationEstimate {
    pub lower: f64,
    pub upper: Upper,
    pub gauge_used: String,
    pub divisions_tried: usize,
}

fn builder(i: usize) -> BuilderConfig {
    let rule = match i % 3 {
        0 => TagRule::Corner,
        1 => TagRule::Center,
        _ => TagRule::SplitCenter,
    };
    let cfg = BuilderConfig::with_rule(rule);
    if i < 3 {
        cfg
    } else {
        cfg.seeded(i as u64)
    }
}

/// Largest `sum |h|` found over `effort` fine divisions from different builder settings.
///
/// Every division found is `g`-fine, so the result is a lower bound for the variation
/// under `g`. Divisions that cannot be built are skipped.
pub fn variation_lower(h: &IntervalIntegrand, domain: &Brick, g: &Gauge, effort: usize) -> f64 {
    (0..effort.max(1))
        .into_par_iter()
        .filter_map(|i| {
            let d = cousin_bisect(domain, g, &builder(i)).ok()?;
            abs_sum(h, &d).ok().filter(|v| v.is_finite())
        })
        .reduce(|| 0.0, f64::max)
}

const BRACKET_EFFORT: usize = 6;
/// Items per division of the fallback gauge.
const FALLBACK_ITEMS: f64 = 4096.0;

/// `V(f mu; I)`: upper from the integral of `|f|`, lower from divisions fine for the
/// gauge that integral ended on.
///
/// When `|f|` has no integral the upper end is `+inf` and the lower end uses a constant
/// gauge.
pub fn variation_bracket(
    f: &PointIntegrand,
    domain: &Brick,
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<VariationEstimate, IntegrateError> {
    let af = f.abs();
    let h = IntervalIntegrand::from_point(&af);
    let (upper, gauge) = match integrate_detailed(&af, domain, tol, cfg) {
        Ok(d) if d.result.converged() => (Upper::Finite(d.result.value + d.result.err_estimate), d.gauge),
        Ok(_) | Err(IntegrateError::NonIntegrable { .. } | IntegrateError::Exhausted(_) | IntegrateError::NonFinite { .. }) => {
            let c = domain.diameter() / FALLBACK_ITEMS.powf(1.0 / domain.dim() as f64);
            let g = Gauge::constant(domain.clone(), c).map_err(IntegrateError::Gauge)?;
            (Upper::Infinite, g)
        }
        Err(e) => return Err(e),
    };
    // A gauge the driver stopped on need not bound every fine sum by the integral; halve
    // it while the lower end overshoots and the division size stays modest.
    let n = domain.dim();
    let mut tried = 0;
    let mut k = 0;
    loop {
        let g = if k == 0 { gauge.clone() } else { scaled(&gauge, 0.5f64.powi(k as i32)) };
        let lower = variation_lower(&h, domain, &g, BRACKET_EFFORT);
        tried += BRACKET_EFFORT;
        if upper.is_infinite() || lower <= upper.value() + tol || (k + 1) * n > MAX_HALVINGS {
            return Ok(VariationEstimate { lower, upper, gauge_used: g.label().to_string(), divisions_tried: tried });
        }
        k += 1;
    }
}

const MAX_HALVINGS: usize = 12;

fn scaled(g: &Gauge, s: f64) -> Gauge {
    let g2 = g.clone();
    let label = format!("{} x {s}", g.label());
    let base = match g.domain() {
        Some(d) => Gauge::new(d.clone(), move |p| g2.eval(p).map_or(f64::NAN, |v| v * s)),
        None => Gauge::unbounded(g.dim(), move |p| g2.eval(p).map_or(f64::NAN, |v| v * s)),
    };
    base.with_label(&label)
}

#[derive(Clone)]
enum Shape {
    Any,
    Brick(Brick),
    Points(CountablePoints),
}

/// A set given by its membership test.
#[derive(Clone)]
pub struct PointSet {
    member: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
    description: String,
    shape: Shape,
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSet({})", self.description)
    }
}

impl PointSet {
    pub fn new<F>(description: &str, member: F) -> Self
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        PointSet { member: Arc::new(member), description: description.into(), shape: Shape::Any }
    }

    pub fn brick(b: Brick) -> Self {
        let b2 = b.clone();
        PointSet { member: Arc::new(move |p| b2.contains(p)), description: format!("{b:?}"), shape: Shape::Brick(b) }
    }

    /// A listed (truncated countable) set of points.
    pub fn points(points: CountablePoints) -> Self {
        let p2 = points.clone();
        PointSet {
            member: Arc::new(move |p| p2.contains(p)),
            description: format!("{} listed points", points.len()),
            shape: Shape::Points(points),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        (self.member)(p)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

/// Outer measure of `X` in `domain` as the variation of `chi(X, P) mu(J)` under `g`.
///
/// The upper end bounds every `g`-fine sum: the brick grown by the gauge bound for a
/// brick set, `sum (2 g(p))^n` for listed points (at most `eps` for a null-cover gauge),
/// the domain volume otherwise.
pub fn outer_measure(x: &PointSet, domain: &Brick, g: &Gauge, effort: usize) -> VariationEstimate {
    let x2 = x.clone();
    let h = IntervalIntegrand::new(move |p, j| if x2.contains(p) { j.volume() } else { 0.0 });
    let lower = variation_lower(&h, domain, g, effort);
    let vol = domain.volume();
    let upper = match &x.shape {
        Shape::Any => vol,
        Shape::Brick(b) => match g.upper_bound() {
            Some(r) => {
                let lo: Vec<f64> = b.lower().iter().map(|v| v - r).collect();
                let hi: Vec<f64> = b.upper().iter().map(|v| v + r).collect();
                Brick::new(&lo, &hi).ok().and_then(|grown| grown.intersect(domain)).map_or(0.0, |c| c.volume())
            }
            None => vol,
        },
        Shape::Points(pts) => {
            let n = domain.dim() as i32;
            pts.iter()
                .filter(|(p, _)| domain.contains(p))
                .map(|(p, _)| g.eval(p).map_or(vol, |d| (2.0 * d).powi(n)))
                .sum::<f64>()
                .min(vol)
        }
    };
    VariationEstimate {
        lower,
        upper: Upper::Finite(upper.max(lower)),
        gauge_used: g.label().to_string(),
        divisions_tried: effort.max(1),
    }
}

/// Outcome of probing `F(J) / mu(J)` on shrinking bricks.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivative {
    Value(f64),
    /// Quotients over the last two scales ranged over `[low, high]`.
    NoDerivative { low: f64, high: f64 },
}

const MAX_SCALES: usize = 60;

/// Probe bricks of edge scale `s` containing `p`: centred, flush with each face, and one
/// slab of regularity `alpha`, each moved inside `domain`.
fn probes(p: &[f64], s: f64, alpha: f64, domain: &Brick) -> Vec<Brick> {
    let n = p.len();
    let mut shapes: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(2 * n + 2);
    let centred = |edges: &[f64], offs: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let lo: Vec<f64> = (0..n).map(|i| p[i] - offs[i] * edges[i]).collect();
        let hi: Vec<f64> = (0..n).map(|i| lo[i] + edges[i]).collect();
        (lo, hi)
    };
    let cube = vec![s; n];
    shapes.push(centred(&cube, &vec![0.5; n]));
    for i in 0..n {
        for off in [0.0, 1.0] {
            let mut o = vec![0.5; n];
            o[i] = off;
            shapes.push(centred(&cube, &o));
        }
    }
    let slab: Vec<f64> = if n == 1 {
        vec![s]
    } else {
        let t = s * alpha.powf(1.0 / (n - 1) as f64);
        (0..n).map(|i| if i == 0 { s } else { t }).collect()
    };
    shapes.push(centred(&slab, &vec![0.25; n]));
    shapes
        .into_iter()
        .filter_map(|(mut lo, mut hi)| {
            for i in 0..n {
                let (a, b) = (domain.lower()[i], domain.upper()[i]);
                if lo[i] < a {
                    hi[i] += a - lo[i];
                    lo[i] = a;
                }
                if hi[i] > b {
                    lo[i] -= hi[i] - b;
                    hi[i] = b;
                }
                if lo[i] < a || !(lo[i] <= p[i] && p[i] <= hi[i]) {
                    return None;
                }
            }
            Brick::new(&lo, &hi).ok()
        })
        .collect()
}

/// Derivative of a brick function at `p`: the common limit of `F(J) / mu(J)` over bricks
/// `J` containing `p` with regularity at least `alpha`.
///
/// Scales halve from half the shortest domain edge. The value is reported once all
/// quotients over two consecutive scales lie within `tol` of each other.
pub fn derivative_at<F>(big_f: F, p: &Point, domain: &Brick, alpha: f64, tol: f64) -> Result<Derivative, VariationError>
where
    F: Fn(&Brick) -> f64,
{
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(VariationError::InvalidInput(format!("alpha {alpha} not in (0, 1]")));
    }
    if !(tol > 0.0) {
        return Err(VariationError::InvalidInput(format!("tolerance {tol}")));
    }
    if p.dim() != domain.dim() || !domain.contains(p) {
        return Err(VariationError::InvalidInput(format!("{p:?} is not in {domain:?}")));
    }
    let mut s = 0.5 * domain.edges().fold(f64::INFINITY, f64::min);
    let mut prev: Option<(f64, f64)> = None;
    let mut band = (f64::NAN, f64::NAN);
    let floor = 64.0 * f64::EPSILON * p.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    for _ in 0..MAX_SCALES {
        if s < floor {
            break;
        }
        let js = probes(p, s, alpha, domain);
        if js.is_empty() {
            break;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in js {
            let q = big_f(&j) / j.volume();
            if !q.is_finite() {
                return Err(VariationError::NonFinite(j));
            }
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if let Some((plo, phi)) = prev {
            band = (lo.min(plo), hi.max(phi));
            if band.1 - band.0 < tol {
                return Ok(Derivative::Value(0.5 * (lo + hi)));
            }
        }
        prev = Some((lo, hi));
        s *= 0.5;
    }
    Ok(Derivative::NoDerivative { low: band.0, high: band.1 })
}

/// Cell averages of `f` on the `2^(k n)` equal sub-bricks of a domain.
#[derive(Debug, Clone, Serialize)]
pub struct StepApprox {
    pub domain: Brick,
    pub level: u32,
    pub cells: Vec<Brick>,
    pub values: Vec<f64>,
    /// `sum values * mu(cell)`.
    pub integral: f64,
    /// Summed error estimates of the cell integrals.
    pub err_estimate: f64,
}

impl StepApprox {
    /// Value of the cell holding `p` (the cell with the largest index on shared faces).
    pub fn eval(&self, p: &[f64]) -> f64 {
        let m = 1usize << self.level;
        let mut idx = 0;
        for (i, &x) in p.iter().enumerate() {
            let (a, w) = (self.domain.lower()[i], self.domain.edge(i));
            let c = (((x - a) / w * m as f64).floor() as isize).clamp(0, m as isize - 1) as usize;
            idx = idx * m + c;
        }
        self.values[idx]
    }
}

fn grid(domain: &Brick, k: u32) -> Vec<Brick> {
    let n = domain.dim();
    let m = 1usize << k;
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut lo = vec![0.0; n];
            let mut hi = vec![0.0; n];
            for i in (0..n).rev() {
                let c = idx % m;
                idx /= m;
                let (a, b) = (domain.lower()[i], domain.upper()[i]);
                let w = (b - a) / m as f64;
                lo[i] = a + c as f64 * w;
                hi[i] = if c + 1 == m { b } else { a + (c + 1) as f64 * w };
            }
            Brick::new(&lo, &hi).expect("grid cell")
        })
        .collect()
}

/// Step function with the cell averages of `f` at level `k`, each cell integrated to
/// `tol / cells`.
pub fn step_approx(
    f: &PointIntegrand,
    domain: &Brick,
    k: u32,
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<StepApprox, IntegrateError> {
    if k as usize * domain.dim() > 24 {
        return Err(IntegrateError::InvalidInput(format!("level {k} gives too many cells")));
    }
    let cells = grid(domain, k);
    let ctol = tol / cells.len() as f64;
    let results: Vec<_> = cells.iter().map(|c| integrate(f, c, ctol, cfg)).collect::<Result<_, _>>()?;
    let values: Vec<f64> = results.iter().zip(&cells).map(|(r, c)| r.value / c.volume()).collect();
    let integral = crate::sum::neumaier(results.iter().map(|r| r.value));
    let err_estimate = results.iter().map(|r| r.err_estimate).sum();
    Ok(StepApprox { domain: domain.clone(), level: k, cells, values, integral, err_estimate })
}
