//! Riemann sums, the adaptive gauge driver and the integral extensions built on it.

mod driver;
mod fubini;
mod improper;
mod stieltjes;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::brick::{Brick, Point, TaggedDivision};
use crate::division::{BuilderConfig, DivisionError, TagRule};
use crate::gauge::GaugeError;
use crate::sum::{neumaier, NeumaierSum};

pub use driver::{integrate, integrate_detailed, integrate_interval, Detailed};
pub use fubini::{fubini, FubiniResult};
pub use improper::{
    cauchy_extension, denjoy_extension, integrate_infinite, integrate_infinite_from, integrate_pieces,
    integrate_symmetric_check, Gap, Side,
};
pub use stieltjes::{by_parts, integrate_stieltjes, ByParts, StieltjesWeight};

pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type TermFn = Arc<dyn Fn(&Point, &Brick) -> f64 + Send + Sync>;

/// `f(P)`, defined as zero at the declared singular points.
#[derive(Clone)]
pub struct PointIntegrand {
    f: PointFn,
    singular: Vec<Point>,
}

impl fmt::Debug for PointIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointIntegrand").field("singular", &self.singular).finish()
    }
}

impl PointIntegrand {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        PointIntegrand { f: Arc::new(f), singular: Vec::new() }
    }

    /// Function of one variable.
    pub fn of_x<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PointIntegrand::new(move |p| f(p[0]))
    }

    pub fn with_singular_points(mut self, points: Vec<Point>) -> Self {
        self.singular = points;
        self
    }

    pub fn singular_points(&self) -> &[Point] {
        &self.singular
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        if self.singular.iter().any(|s| s.coords() == p) {
            0.0
        } else {
            (self.f)(p)
        }
    }

    /// `|f|` with the same singular points.
    pub fn abs(&self) -> PointIntegrand {
        let f = self.f.clone();
        PointIntegrand { f: Arc::new(move |p| f(p).abs()), singular: self.singular.clone() }
    }

    /// `g(f(P))` with the same singular points.
    pub fn map<G>(&self, g: G) -> PointIntegrand
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f = self.f.clone();
        PointIntegrand { f: Arc::new(move |p| g(f(p))), singular: self.singular.clone() }
    }
}

/// A brick-and-point function `h(P, J)`.
#[derive(Clone)]
pub struct IntervalIntegrand {
    h: TermFn,
}

impl fmt::Debug for IntervalIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntervalIntegrand")
    }
}

impl IntervalIntegrand {
    pub fn new<H>(h: H) -> Self
    where
        H: Fn(&Point, &Brick) -> f64 + Send + Sync + 'static,
    {
        IntervalIntegrand { h: Arc::new(h) }
    }

    pub fn eval(&self, tag: &Point, brick: &Brick) -> f64 {
        (self.h)(tag, brick)
    }

    /// `f(P) vol(J)`.
    pub fn from_point(f: &PointIntegrand) -> Self {
        let f = f.clone();
        IntervalIntegrand::new(move |p, j| {
            let v = f.eval(p);
            if v == 0.0 {
                0.0
            } else {
                v * j.volume()
            }
        })
    }

    /// `|h|`.
    pub fn abs(&self) -> Self {
        let h = self.h.clone();
        IntervalIntegrand::new(move |p, j| h(p, j).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    DepthExhausted,
    MaxRefinements,
    Oscillating,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub err_estimate: f64,
    pub refinements: usize,
    pub items: usize,
    pub evaluations: u64,
    pub status: Status,
}

impl IntegralResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Combine results of disjoint pieces.
    pub fn sum<'a, I: IntoIterator<Item = &'a IntegralResult>>(parts: I) -> IntegralResult {
        let mut value = NeumaierSum::new();
        let mut out = IntegralResult {
            value: 0.0,
            err_estimate: 0.0,
            refinements: 0,
            items: 0,
            evaluations: 0,
            status: Status::Converged,
        };
        for p in parts {
            value.add(p.value);
            out.err_estimate += p.err_estimate;
            out.refinements = out.refinements.max(p.refinements);
            out.items += p.items;
            out.evaluations += p.evaluations;
            if p.status != Status::Converged && out.status == Status::Converged {
                out.status = p.status;
            }
        }
        out.value = value.value();
        out
    }
}

#[derive(Debug, Clone)]
pub struct IntegrateConfig {
    pub builder: BuilderConfig,
    pub max_refinements: usize,
    /// Total integrand evaluations allowed, nested work included.
    pub max_evaluations: u64,
    /// Largest division built in one round.
    pub max_items: usize,
}

pub const DEFAULT_MAX_REFINEMENTS: usize = 60;

impl Default for IntegrateConfig {
    fn default() -> Self {
        IntegrateConfig {
            builder: BuilderConfig::with_rule(TagRule::Center),
            max_refinements: DEFAULT_MAX_REFINEMENTS,
            max_evaluations: 400_000_000,
            max_items: 8_000_000,
        }
    }
}

impl IntegrateConfig {
    pub fn with_rule(rule: TagRule) -> Self {
        let mut c = IntegrateConfig::default();
        c.builder.tag_rule = rule;
        c
    }

    /// Gauss-cell tags of order 16: high-order sums for smooth or oscillatory integrands.
    pub fn gauss() -> Self {
        IntegrateConfig::with_rule(TagRule::Gauss(16))
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.builder.rng_seed = Some(seed);
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("integrand is not finite at tag {tag:?} on {brick:?}")]
    NonFinite { tag: Point, brick: Brick },
    #[error("not integrable near {at:?}: {reason}")]
    NonIntegrable { at: Point, reason: String },
    #[error("divergent tail on the {side} side")]
    DivergentTail { side: &'static str },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resources exhausted: {0}")]
    Exhausted(String),
    #[error(transparent)]
    Division(#[from] DivisionError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
}

const CHUNK: usize = 4096;

/// Term values `h(tag, brick)` in item order.
pub(crate) fn term_values(h: &IntervalIntegrand, d: &TaggedDivision) -> Result<Vec<f64>, IntegrateError> {
    let vals: Vec<f64> = d.items.par_iter().with_min_len(CHUNK).map(|t| h.eval(&t.tag, &t.brick)).collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        let t = &d.items[i];
        return Err(IntegrateError::NonFinite { tag: t.tag.clone(), brick: t.brick.clone() });
    }
    Ok(vals)
}

/// Compensated sum in fixed-size chunks, merged in order.
pub(crate) fn chunked_sum(vals: &[f64]) -> f64 {
    let parts: Vec<f64> = vals.par_chunks(CHUNK).map(|c| neumaier(c.iter().copied())).collect();
    neumaier(parts)
}

/// `sum h(tag, brick)` over the division.
pub fn riemann_sum(h: &IntervalIntegrand, d: &TaggedDivision) -> Result<f64, IntegrateError> {
    Ok(chunked_sum(&term_values(h, d)?))
}

/// `sum |h(tag, brick)|` over the division.
pub fn abs_sum(h: &IntervalIntegrand, d: &TaggedDivision) -> Result<f64, IntegrateError> {
    Ok(chunked_sum(&term_values(&h.abs(), d)?))
}

/// `(signed_max, abs_sum)` for the terms `f(P) vol(J) - F(J)`.
///
/// `signed_max` is the larger of the positive-term and negative-term totals, the largest
/// partial sum over sub-families of the division.
pub fn henstock_residual<F>(f: &PointIntegrand, big_f: F, d: &TaggedDivision) -> (f64, f64)
where
    F: Fn(&Brick) -> f64 + Sync,
{
    let terms: Vec<f64> = d.items.par_iter().map(|t| f.eval(&t.tag) * t.brick.volume() - big_f(&t.brick)).collect();
    let pos = neumaier(terms.iter().copied().filter(|v| *v > 0.0));
    let neg = neumaier(terms.iter().copied().filter(|v| *v < 0.0));
    let abs = neumaier(terms.iter().map(|v| v.abs()));
    (pos.max(-neg), abs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brick::TaggedBrick;

    fn iv(a: f64, b: f64) -> Brick {
        Brick::interval(a, b).unwrap()
    }

    #[test]
    fn sum_of_identity_example() {
        let d = TaggedDivision::new(
            iv(0.0, 2.0),
            vec![
                TaggedBrick::new(iv(0.0, 1.0), Point::from(0.0)).unwrap(),
                TaggedBrick::new(iv(1.0, 2.0), Point::from(2.0)).unwrap(),
            ],
        );
        let h = IntervalIntegrand::from_point(&PointIntegrand::of_x(|x| x));
        assert_eq!(riemann_sum(&h, &d).unwrap(), 2.0);
        let one = IntervalIntegrand::from_point(&PointIntegrand::of_x(|_| 1.0));
        assert_eq!(riemann_sum(&one, &d).unwrap(), 2.0);
    }

    #[test]
    fn non_finite_is_reported() {
        let d = TaggedDivision::new(iv(0.0, 1.0), vec![TaggedBrick::new(iv(0.0, 1.0), Point::from(0.0)).unwrap()]);
        let h = IntervalIntegrand::from_point(&PointIntegrand::of_x(|x| 1.0 / x));
        assert!(matches!(riemann_sum(&h, &d), Err(IntegrateError::NonFinite { .. })));
        let f = PointIntegrand::of_x(|x| 1.0 / x).with_singular_points(vec![Point::from(0.0)]);
        assert_eq!(riemann_sum(&IntervalIntegrand::from_point(&f), &d).unwrap(), 0.0);
    }

    #[test]
    fn constant_residual_vanishes() {
        let d = TaggedDivision::new(
            iv(0.0, 1.0),
            vec![
                TaggedBrick::new(iv(0.0, 0.3), Point::from(0.1)).unwrap(),
                TaggedBrick::new(iv(0.3, 1.0), Point::from(1.0)).unwrap(),
            ],
        );
        let f = PointIntegrand::of_x(|_| 2.0);
        let (s, a) = henstock_residual(&f, |b| 2.0 * b.volume(), &d);
        assert!(s.abs() < 1e-15 && a.abs() < 1e-15);
    }
}
