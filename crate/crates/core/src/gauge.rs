//! Gauges: strictly positive functions on a brick that bound the size of admissible bricks.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::brick::{Brick, Point, TaggedBrick, TaggedDivision};

pub type GaugeFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("gauge is not positive at {point:?}: {value}")]
    NonPositive { point: Point, value: f64 },
    #[error("gauge is not finite at {point:?}")]
    NonFinite { point: Point },
    #[error("point {point:?} lies outside the gauge domain")]
    OutsideDomain { point: Point },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("gauge domains differ")]
    DomainMismatch,
    #[error("no gauges to combine")]
    Empty,
    #[error("invalid gauge parameter: {0}")]
    InvalidParameter(String),
    #[error("parts do not form a division: {0}")]
    InvalidParts(String),
}

/// A gauge on `domain`, or on all of R^dim when `domain` is `None`.
#[derive(Clone)]
pub struct Gauge {
    dim: usize,
    domain: Option<Brick>,
    f: GaugeFn,
    bound: Option<f64>,
    label: Arc<str>,
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gauge")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("bound", &self.bound)
            .finish()
    }
}

impl Gauge {
    pub fn new<F>(domain: Brick, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Gauge { dim: domain.dim(), domain: Some(domain), f: Arc::new(f), bound: None, label: "custom".into() }
    }

    /// A gauge defined on all of R^dim.
    pub fn unbounded<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Gauge { dim, domain: None, f: Arc::new(f), bound: None, label: "custom".into() }
    }

    pub fn constant(domain: Brick, c: f64) -> Result<Self, GaugeError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(GaugeError::InvalidParameter(format!("constant gauge value {c}")));
        }
        let mut g = Gauge::new(domain, move |_| c);
        g.bound = Some(c);
        g.label = "constant".into();
        Ok(g)
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    /// Record a known supremum of the gauge.
    pub fn with_upper_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Option<&Brick> {
        self.domain.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Known supremum, when the construction provides one.
    pub fn upper_bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64, GaugeError> {
        if p.len() != self.dim {
            return Err(GaugeError::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        if let Some(d) = &self.domain {
            if !d.contains(p) {
                return Err(GaugeError::OutsideDomain { point: Point::new(p) });
            }
        }
        let v = (self.f)(p);
        if v.is_nan() || v.is_infinite() {
            return Err(GaugeError::NonFinite { point: Point::new(p) });
        }
        if v <= 0.0 {
            return Err(GaugeError::NonPositive { point: Point::new(p), value: v });
        }
        Ok(v)
    }

    /// Pointwise minimum. A division fine for the result is fine for every input.
    pub fn min_combine(gauges: &[Gauge]) -> Result<Gauge, GaugeError> {
        let first = gauges.first().ok_or(GaugeError::Empty)?;
        let dim = first.dim;
        let mut domain = first.domain.clone();
        for g in &gauges[1..] {
            if g.dim != dim {
                return Err(GaugeError::DimensionMismatch { expected: dim, found: g.dim });
            }
            domain = match (domain, &g.domain) {
                (None, d) => d.clone(),
                (Some(a), None) => Some(a),
                (Some(a), Some(b)) if a == *b => Some(a),
                (Some(_), Some(_)) => return Err(GaugeError::DomainMismatch),
            };
        }
        let fs: Vec<GaugeFn> = gauges.iter().map(|g| g.f.clone()).collect();
        let bound = gauges.iter().filter_map(|g| g.bound).reduce(f64::min);
        Ok(Gauge {
            dim,
            domain,
            f: Arc::new(move |p| fs.iter().map(|f| f(p)).fold(f64::INFINITY, f64::min)),
            bound,
            label: "min".into(),
        })
    }

    /// `min(base(P), dist(P, S)/2)` away from the finite set `S`; `base` at points of `S`.
    pub fn cusp(base: &Gauge, points: Vec<Point>) -> Gauge {
        let f = base.f.clone();
        Gauge {
            dim: base.dim,
            domain: base.domain.clone(),
            f: Arc::new(move |p| {
                let d = points.iter().map(|s| s.distance(p)).fold(f64::INFINITY, f64::min);
                if d == 0.0 {
                    f(p)
                } else {
                    f(p).min(0.5 * d)
                }
            }),
            bound: base.bound,
            label: "cusp".into(),
        }
    }

    /// Glue gauges defined on the parts of a division into one gauge on the union.
    ///
    /// Interior points of part `j` get `min(g_j(P), dist(P, boundary of part j)/2)`.
    /// A point on part boundaries gets `min(d/2, g_k(P))` over the parts `k` containing it,
    /// `d` being the distance to the nearest other vertex of those parts. Any fine brick
    /// that meets several parts is then tagged on their common boundary.
    pub fn boundary_gauge(parts: &[(Brick, Gauge)]) -> Result<Gauge, GaugeError> {
        let first = parts.first().ok_or(GaugeError::Empty)?;
        let n = first.0.dim();
        let mut lo = first.0.lower().to_vec();
        let mut hi = first.0.upper().to_vec();
        for (b, g) in parts {
            if b.dim() != n || g.dim != n {
                return Err(GaugeError::DimensionMismatch { expected: n, found: b.dim().max(g.dim) });
            }
            for i in 0..n {
                lo[i] = lo[i].min(b.lower()[i]);
                hi[i] = hi[i].max(b.upper()[i]);
            }
        }
        let parent = Brick::new(&lo, &hi).map_err(|e| GaugeError::InvalidParts(e.to_string()))?;
        let total: f64 = parts.iter().map(|(b, _)| b.volume()).sum();
        if (total - parent.volume()).abs() > 1e-12 * parent.volume() * parts.len() as f64 {
            return Err(GaugeError::InvalidParts("parts do not cover their bounding brick".into()));
        }
        for (i, (a, _)) in parts.iter().enumerate() {
            for (b, _) in &parts[i + 1..] {
                if a.intersect(b).is_some() {
                    return Err(GaugeError::InvalidParts(format!("{a:?} overlaps {b:?}")));
                }
            }
        }
        let parts: Vec<(Brick, Gauge)> = parts.to_vec();
        let f = move |p: &[f64]| -> f64 {
            let holding: Vec<&(Brick, Gauge)> = parts.iter().filter(|(b, _)| b.contains(p)).collect();
            if let [(b, g)] = holding.as_slice() {
                let rho = b.distance_to_boundary(p);
                if rho > 0.0 {
                    return (g.f)(p).min(0.5 * rho);
                }
            }
            let d = holding
                .iter()
                .flat_map(|(b, _)| b.vertices())
                .map(|v| v.distance(p))
                .filter(|&d| d > 0.0)
                .fold(f64::INFINITY, f64::min);
            holding.iter().map(|(_, g)| (g.f)(p)).fold(0.5 * d, f64::min)
        };
        Ok(Gauge { dim: n, domain: Some(parent), f: Arc::new(f), bound: None, label: "boundary".into() })
    }

    /// Shrink `base` at listed points so that listed tags carry total weighted volume at most `eps`.
    ///
    /// The `j`-th point (from 1) of level `k` gets a cube of volume `eps 2^-j 2^-k` around it,
    /// half-width `eps/2^(1+j+k)` on the line. For `|f| <= 2^k` on level-`k` points, any
    /// fine division has `sum |f(P)| vol(J)` over listed tags at most `eps`.
    pub fn null_cover(points: &CountablePoints, eps: f64, base: &Gauge) -> Result<Gauge, GaugeError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(GaugeError::InvalidParameter(format!("eps {eps}")));
        }
        if points.dim() != base.dim && !points.is_empty() {
            return Err(GaugeError::DimensionMismatch { expected: base.dim, found: points.dim() });
        }
        let cover = CountableCover::new(points, eps, base.dim);
        let radii: Vec<f64> = cover.intervals.iter().map(|(_, r)| *r).collect();
        let pts = points.clone();
        let f = base.f.clone();
        Ok(Gauge {
            dim: base.dim,
            domain: base.domain.clone(),
            f: Arc::new(move |p| match pts.index_of(p) {
                Some(j) => f(p).min(radii[j]),
                None => f(p),
            }),
            bound: base.bound,
            label: "null-cover".into(),
        })
    }
}

/// Tag in the closed brick and every vertex strictly closer to the tag than `g(tag)`.
pub fn is_fine(tb: &TaggedBrick, g: &Gauge) -> Result<bool, GaugeError> {
    if !tb.brick.contains(&tb.tag) {
        return Ok(false);
    }
    let d = g.eval(&tb.tag)?;
    Ok(tb.brick.farthest_vertex_distance(&tb.tag) < d)
}

/// Every item of the division is fine.
pub fn is_fine_division(d: &TaggedDivision, g: &Gauge) -> Result<bool, GaugeError> {
    for it in &d.items {
        if !is_fine(it, g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Open cubes `(centre, half-width)` around listed points; total volume at most `budget`.
#[derive(Debug, Clone)]
pub struct CountableCover {
    pub intervals: Vec<(Point, f64)>,
    pub budget: f64,
}

impl CountableCover {
    pub fn new(points: &CountablePoints, eps: f64, dim: usize) -> Self {
        let intervals = points
            .iter()
            .enumerate()
            .map(|(j, (p, level))| {
                let vol = eps * 2f64.powi(-(j as i32 + 1) - level as i32);
                (p.clone(), 0.5 * vol.powf(1.0 / dim as f64))
            })
            .collect();
        CountableCover { intervals, budget: eps }
    }

    /// Sum of the cube volumes.
    pub fn total_volume(&self) -> f64 {
        let n = self.intervals.first().map_or(1, |(p, _)| p.dim()) as i32;
        self.intervals.iter().map(|(_, r)| (2.0 * r).powi(n)).sum()
    }
}

/// Default truncation length for countable point lists.
pub const DEFAULT_TRUNCATION: usize = 10_000;

/// A truncated countable point sequence with levels, indexed from 1 in listing order.
#[derive(Debug, Clone, Default)]
pub struct CountablePoints {
    points: Vec<(Point, u32)>,
    index: HashMap<Vec<u64>, usize>,
}

fn key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|&x| if x == 0.0 { 0 } else { x.to_bits() }).collect()
}

impl CountablePoints {
    /// The first `n` entries of `seq`; repeated points keep their first index.
    pub fn from_fn<F>(n: usize, mut seq: F) -> Self
    where
        F: FnMut(usize) -> (Point, u32),
    {
        let mut out = CountablePoints::default();
        for i in 0..n {
            let (p, level) = seq(i);
            out.push(p, level);
        }
        out
    }

    pub fn push(&mut self, p: Point, level: u32) {
        let k = key(&p);
        if !self.index.contains_key(&k) {
            self.index.insert(k, self.points.len());
            self.points.push((p, level));
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |(p, _)| p.dim())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, u32)> {
        self.points.iter().map(|(p, l)| (p, *l))
    }

    /// Zero-based position of `p` in the list.
    pub fn index_of(&self, p: &[f64]) -> Option<usize> {
        self.index.get(&key(p)).copied()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.index_of(p).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Brick {
        Brick::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn constant_rejects_nonpositive() {
        assert!(Gauge::constant(unit(), 0.0).is_err());
        assert!(Gauge::constant(unit(), f64::NAN).is_err());
    }

    #[test]
    fn eval_reports_bad_values() {
        let g = Gauge::new(unit(), |p| p[0] - 0.5);
        assert!(matches!(g.eval(&[0.25]), Err(GaugeError::NonPositive { .. })));
        assert!(matches!(g.eval(&[2.0]), Err(GaugeError::OutsideDomain { .. })));
        assert_eq!(g.eval(&[0.75]).unwrap(), 0.25);
    }

    #[test]
    fn min_of_two() {
        let a = Gauge::constant(unit(), 0.3).unwrap();
        let b = Gauge::new(unit(), |p| p[0] + 0.1);
        let m = Gauge::min_combine(&[a, b]).unwrap();
        assert_eq!(m.eval(&[0.1]).unwrap(), 0.2);
        assert_eq!(m.eval(&[0.9]).unwrap(), 0.3);
        assert_eq!(m.upper_bound(), Some(0.3));
    }

    #[test]
    fn boundary_values() {
        let parts = vec![
            (Brick::interval(0.0, 1.0).unwrap(), Gauge::constant(Brick::interval(0.0, 1.0).unwrap(), 1.0).unwrap()),
            (Brick::interval(1.0, 2.0).unwrap(), Gauge::constant(Brick::interval(1.0, 2.0).unwrap(), 1.0).unwrap()),
        ];
        let g = Gauge::boundary_gauge(&parts).unwrap();
        assert_eq!(g.eval(&[0.5]).unwrap(), 0.25);
        assert_eq!(g.eval(&[1.0]).unwrap(), 0.5);
        assert!((g.eval(&[1.9]).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn boundary_rejects_overlap() {
        let b1 = Brick::interval(0.0, 1.5).unwrap();
        let b2 = Brick::interval(1.0, 2.0).unwrap();
        let parts = vec![
            (b1.clone(), Gauge::constant(b1, 1.0).unwrap()),
            (b2.clone(), Gauge::constant(b2, 1.0).unwrap()),
        ];
        assert!(Gauge::boundary_gauge(&parts).is_err());
    }

    #[test]
    fn null_cover_first_point() {
        let pts = CountablePoints::from_fn(3, |i| (Point::from([0.0, 1.0, 0.5][i]), 1));
        let base = Gauge::constant(unit(), 1.0).unwrap();
        let g = Gauge::null_cover(&pts, 0.1, &base).unwrap();
        assert!(g.eval(&[0.0]).unwrap() <= 0.1 / 4.0);
        assert_eq!(g.eval(&[0.3]).unwrap(), 1.0);
    }

    #[test]
    fn fineness_examples() {
        let b = Brick::interval(0.0, 0.1).unwrap();
        let t = TaggedBrick::new(b, Point::from(0.05)).unwrap();
        assert!(is_fine(&t, &Gauge::constant(unit(), 0.06).unwrap()).unwrap());
        assert!(!is_fine(&t, &Gauge::constant(unit(), 0.04).unwrap()).unwrap());
        let sq = TaggedBrick::new(Brick::unit(2), Point::from([0.0, 0.0])).unwrap();
        assert!(is_fine(&sq, &Gauge::constant(Brick::unit(2), 1.5).unwrap()).unwrap());
        assert!(!is_fine(&sq, &Gauge::constant(Brick::unit(2), 1.4).unwrap()).unwrap());
    }

    #[test]
    fn cusp_halves_distance() {
        let base = Gauge::constant(unit(), 1.0).unwrap();
        let g = Gauge::cusp(&base, vec![Point::from(0.0)]);
        assert_eq!(g.eval(&[0.2]).unwrap(), 0.1);
        assert_eq!(g.eval(&[0.0]).unwrap(), 1.0);
    }
}
