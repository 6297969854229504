//! Builders for gauge-fine tagged divisions.

use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::ops::Range;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;
use thiserror::Error;

use crate::brick::{Brick, BrickError, Point, TaggedBrick, TaggedDivision};
use crate::gauge::{Gauge, GaugeError};
use crate::quadrature::{gauss_rule, MAX_ORDER};

pub type TagFn = Arc<dyn Fn(&Brick) -> Point + Send + Sync>;

/// Preferred way of choosing a tag in a candidate brick.
#[derive(Clone)]
pub enum TagRule {
    /// Lower corner.
    Corner,
    /// Centre.
    Center,
    /// Centre, emitted as the 2^n halves that share it as a vertex.
    SplitCenter,
    /// Cells of a k-point Gauss-Legendre product rule, each tagged at its node.
    Gauss(usize),
    /// User-supplied tag.
    Supplied(TagFn),
}

impl fmt::Debug for TagRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagRule::Corner => write!(f, "Corner"),
            TagRule::Center => write!(f, "Center"),
            TagRule::SplitCenter => write!(f, "SplitCenter"),
            TagRule::Gauss(k) => write!(f, "Gauss({k})"),
            TagRule::Supplied(_) => write!(f, "Supplied"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuilderConfig {
    pub max_depth: usize,
    pub tag_rule: TagRule,
    /// When set, a pseudo-random point of each brick is tried first.
    pub rng_seed: Option<u64>,
    /// Abort once the division would hold more items than this.
    pub max_items: Option<usize>,
}

pub const DEFAULT_MAX_DEPTH: usize = 1100;

impl Default for BuilderConfig {
    fn default() -> Self {
        BuilderConfig { max_depth: DEFAULT_MAX_DEPTH, tag_rule: TagRule::Corner, rng_seed: None, max_items: None }
    }
}

impl BuilderConfig {
    pub fn with_rule(tag_rule: TagRule) -> Self {
        BuilderConfig { tag_rule, ..Default::default() }
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.rng_seed = Some(seed);
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DivisionError {
    #[error("no fine tag found down to depth {depth}; smallest failing brick {brick:?}, gauge at candidates {candidates:?}")]
    DepthExhausted { depth: usize, brick: Brick, candidates: Vec<(Point, f64)> },
    #[error("chain construction stalled at {at}")]
    Stalled { at: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("division exceeds {limit} items")]
    TooManyItems { limit: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Brick(#[from] BrickError),
}

/// Child indices from the root of the bisection tree.
pub type Path = SmallVec<[u8; 32]>;

/// A terminal brick of the bisection tree and the items it produced.
#[derive(Debug, Clone)]
pub struct Leaf {
    pub path: Path,
    pub brick: Brick,
    pub items: Range<usize>,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub division: TaggedDivision,
    /// Leaves in depth-first order, which is lexicographic order of paths.
    pub leaves: Vec<Leaf>,
    pub max_depth_used: usize,
}

/// Bisect until every piece has a fine tag.
pub fn cousin_bisect(domain: &Brick, g: &Gauge, cfg: &BuilderConfig) -> Result<TaggedDivision, DivisionError> {
    cousin_bisect_detailed(domain, g, cfg).map(|o| o.division)
}

pub fn cousin_bisect_detailed(domain: &Brick, g: &Gauge, cfg: &BuilderConfig) -> Result<BuildOutput, DivisionError> {
    if g.dim() != domain.dim() {
        return Err(DivisionError::DimensionMismatch { expected: domain.dim(), found: g.dim() });
    }
    if cfg.max_depth == 0 {
        return Err(DivisionError::InvalidConfig("max_depth must be at least 1".into()));
    }
    if let TagRule::Gauss(k) = cfg.tag_rule {
        if !(1..=MAX_ORDER).contains(&k) {
            return Err(DivisionError::InvalidConfig(format!("Gauss order {k}")));
        }
    }
    let n = domain.dim();
    let mut items = Vec::new();
    let mut leaves = Vec::new();
    let mut max_depth_used = 0;
    let mut stack: Vec<(Brick, Path)> = vec![(domain.clone(), Path::new())];
    while let Some((brick, path)) = stack.pop() {
        let depth = path.len();
        let start = items.len();
        if try_tags(&brick, &path, g, cfg, &mut items)? {
            max_depth_used = max_depth_used.max(depth);
            leaves.push(Leaf { path, brick, items: start..items.len() });
            if let Some(limit) = cfg.max_items {
                if items.len() > limit {
                    return Err(DivisionError::TooManyItems { limit });
                }
            }
            continue;
        }
        let exhausted = |brick: &Brick| -> DivisionError {
            let candidates = [brick.lower().clone(), brick.center()]
                .into_iter()
                .map(|p| {
                    let v = g.eval(&p).unwrap_or(f64::NAN);
                    (p, v)
                })
                .collect();
            DivisionError::DepthExhausted { depth, brick: brick.clone(), candidates }
        };
        if depth >= cfg.max_depth {
            return Err(exhausted(&brick));
        }
        let kids = match brick.bisect() {
            Ok(k) => k,
            Err(BrickError::Unsplittable { .. }) => return Err(exhausted(&brick)),
            Err(e) => return Err(e.into()),
        };
        for (k, kid) in kids.into_iter().enumerate().rev() {
            let mut p = path.clone();
            p.push(k as u8);
            stack.push((kid, p));
        }
        debug_assert!(n <= 8);
    }
    Ok(BuildOutput { division: TaggedDivision::new(domain.clone(), items), leaves, max_depth_used })
}

fn fine(brick: &Brick, tag: &[f64], g: &Gauge) -> Result<bool, GaugeError> {
    Ok(brick.farthest_vertex_distance(tag) < g.eval(tag)?)
}

fn push_single(brick: &Brick, tag: Point, out: &mut Vec<TaggedBrick>) {
    out.push(TaggedBrick { brick: brick.clone(), tag });
}

fn jitter_point(brick: &Brick, path: &[u8], seed: u64) -> Point {
    let mut h = DefaultHasher::new();
    seed.hash(&mut h);
    path.hash(&mut h);
    let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
    Point::from_vec(
        (0..brick.dim())
            .map(|i| {
                let t: f64 = rng.random_range(0.0..=1.0);
                (brick.lower()[i] + t * brick.edge(i)).clamp(brick.lower()[i], brick.upper()[i])
            })
            .collect(),
    )
}

pub(crate) type AxisCells = SmallVec<[(f64, f64, f64); 16]>;

/// Per-axis `(lo, hi, node)` Gauss cells; `None` when they are not representable.
pub(crate) fn gauss_axes(brick: &Brick, k: usize) -> Option<SmallVec<[AxisCells; 3]>> {
    let rule = gauss_rule(k);
    let mut axes = SmallVec::new();
    for i in 0..brick.dim() {
        let (a, b) = (brick.lower()[i], brick.upper()[i]);
        let half = 0.5 * (b - a);
        let map = |t: f64| if t == -1.0 { a } else if t == 1.0 { b } else { a + half * (t + 1.0) };
        let mut cells = AxisCells::new();
        for j in 0..k {
            let (lo, hi, x) = (map(rule.cuts[j]), map(rule.cuts[j + 1]), map(rule.nodes[j]));
            if !(lo < hi && lo <= x && x <= hi) {
                return None;
            }
            cells.push((lo, hi, x));
        }
        axes.push(cells);
    }
    Some(axes)
}

/// Whether every Gauss cell of `brick` is fine, central (widest) cells first.
fn gauss_fine(axes: &[AxisCells], k: usize, g: &Gauge) -> Result<bool, GaugeError> {
    let n = axes.len();
    let total = k.pow(n as u32);
    let mut tag: SmallVec<[f64; 3]> = SmallVec::from_elem(0.0, n);
    for step in 0..total {
        let mut idx = step;
        let mut d2 = 0.0;
        for (i, cells) in axes.iter().enumerate() {
            // visit axis positions outward from the middle
            let r = idx % k;
            idx /= k;
            let j = if r % 2 == 0 { (k - 1) / 2 - r / 2 } else { (k - 1) / 2 + r.div_ceil(2) };
            let (lo, hi, x) = cells[j];
            tag[i] = x;
            let e = (x - lo).max(hi - x);
            d2 += e * e;
        }
        if d2.sqrt() >= g.eval(&tag)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn gauss_cells(axes: &[AxisCells], k: usize, out: &mut Vec<TaggedBrick>) -> Result<(), BrickError> {
    let n = axes.len();
    let total = k.pow(n as u32);
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    let mut tag = vec![0.0; n];
    for mut idx in 0..total {
        for i in 0..n {
            let (l, h, x) = axes[i][idx % k];
            idx /= k;
            lo[i] = l;
            hi[i] = h;
            tag[i] = x;
        }
        out.push(TaggedBrick { brick: Brick::new(&lo, &hi)?, tag: Point::new(&tag) });
    }
    Ok(())
}

fn try_rule(brick: &Brick, g: &Gauge, rule: &TagRule, out: &mut Vec<TaggedBrick>) -> Result<bool, DivisionError> {
    match rule {
        TagRule::Corner => {
            let p = brick.lower().clone();
            if fine(brick, &p, g)? {
                push_single(brick, p, out);
                return Ok(true);
            }
        }
        TagRule::Center => {
            let p = brick.center();
            if fine(brick, &p, g)? {
                push_single(brick, p, out);
                return Ok(true);
            }
        }
        TagRule::SplitCenter => {
            let p = brick.center();
            if fine(brick, &p, g)? {
                match brick.bisect() {
                    Ok(kids) => out.extend(kids.into_iter().map(|b| TaggedBrick { brick: b, tag: p.clone() })),
                    Err(_) => push_single(brick, p, out),
                }
                return Ok(true);
            }
        }
        TagRule::Gauss(k) => {
            if let Some(axes) = gauss_axes(brick, *k) {
                if gauss_fine(&axes, *k, g)? {
                    gauss_cells(&axes, *k, out)?;
                    return Ok(true);
                }
            }
        }
        TagRule::Supplied(f) => {
            let p = f(brick);
            if brick.contains(&p) && fine(brick, &p, g)? {
                push_single(brick, p, out);
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Candidates: a seeded random point if configured, the preferred rule, then
/// lower corner, centre and the remaining vertices (n <= 3).
fn try_tags(
    brick: &Brick,
    path: &[u8],
    g: &Gauge,
    cfg: &BuilderConfig,
    out: &mut Vec<TaggedBrick>,
) -> Result<bool, DivisionError> {
    if let Some(seed) = cfg.rng_seed {
        let p = jitter_point(brick, path, seed);
        if fine(brick, &p, g)? {
            push_single(brick, p, out);
            return Ok(true);
        }
    }
    if try_rule(brick, g, &cfg.tag_rule, out)? {
        return Ok(true);
    }
    if !matches!(cfg.tag_rule, TagRule::Corner) && try_rule(brick, g, &TagRule::Corner, out)? {
        return Ok(true);
    }
    if !matches!(cfg.tag_rule, TagRule::Center | TagRule::SplitCenter) && try_rule(brick, g, &TagRule::Center, out)? {
        return Ok(true);
    }
    if brick.dim() <= 3 {
        for k in 1..1usize << brick.dim() {
            let p = brick.vertex(k);
            if fine(brick, &p, g)? {
                push_single(brick, p, out);
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Left-to-right sweep on an interval.
///
/// From the current point `t` the tag is `t` itself and the next point is just short of
/// `t + g(t)`, unless the right end `c` already has `t` inside its ball, in which case the
/// last interval is tagged at `c`.
pub fn one_dim_chain(domain: &Brick, g: &Gauge) -> Result<TaggedDivision, DivisionError> {
    const REACH: f64 = 0.999;
    const MAX_STEPS: usize = 50_000_000;
    if domain.dim() != 1 || g.dim() != 1 {
        return Err(DivisionError::DimensionMismatch { expected: 1, found: domain.dim().max(g.dim()) });
    }
    let (b, c) = (domain.lower()[0], domain.upper()[0]);
    let dc = g.eval(&[c])?;
    let mut items = Vec::new();
    let mut t = b;
    for _ in 0..MAX_STEPS {
        if c - t < dc {
            items.push(TaggedBrick { brick: Brick::interval(t, c)?, tag: Point::from(c) });
            return Ok(TaggedDivision::new(domain.clone(), items));
        }
        let dt = g.eval(&[t])?;
        let next = (t + REACH * dt).min(c);
        if next <= t {
            return Err(DivisionError::Stalled { at: t });
        }
        items.push(TaggedBrick { brick: Brick::interval(t, next)?, tag: Point::from(t) });
        if next == c {
            return Ok(TaggedDivision::new(domain.clone(), items));
        }
        t = next;
    }
    Err(DivisionError::Stalled { at: t })
}

/// Items `(I x J, (x, y))` for each `(I, x)` of `dx` and `(J, y)` of `dy_for(x)`.
pub fn product_division<F>(dx: &TaggedDivision, mut dy_for: F) -> Result<TaggedDivision, DivisionError>
where
    F: FnMut(&Point) -> Result<TaggedDivision, DivisionError>,
{
    let mut items = Vec::new();
    let mut parent_y: Option<Brick> = None;
    for it in &dx.items {
        let dy = dy_for(&it.tag)?;
        match &parent_y {
            None => parent_y = Some(dy.parent.clone()),
            Some(p) if *p != dy.parent => {
                return Err(DivisionError::InvalidConfig("inner divisions have different parents".into()))
            }
            _ => {}
        }
        for jt in &dy.items {
            items.push(TaggedBrick { brick: concat_bricks(&it.brick, &jt.brick)?, tag: concat_points(&it.tag, &jt.tag) });
        }
    }
    let py = parent_y.ok_or_else(|| DivisionError::InvalidConfig("empty outer division".into()))?;
    Ok(TaggedDivision::new(concat_bricks(&dx.parent, &py)?, items))
}

pub fn concat_bricks(a: &Brick, b: &Brick) -> Result<Brick, BrickError> {
    let lo: Vec<f64> = a.lower().iter().chain(b.lower().iter()).copied().collect();
    let hi: Vec<f64> = a.upper().iter().chain(b.upper().iter()).copied().collect();
    Brick::new(&lo, &hi)
}

pub fn concat_points(a: &Point, b: &Point) -> Point {
    Point::from_vec(a.iter().chain(b.iter()).copied().collect())
}

/// Fine division of `I x J` for a gauge `delta` on the product.
///
/// Each `x` gets a division of `J` fine for `delta(x, .)/2`; `I` is then divided finely
/// for `delta_1(x) = min_j delta(x, y_j)/2` over that division's tags. The product items
/// are fine for `delta` because `sqrt(delta_1^2 + delta^2/4) < delta`.
pub fn fubini_division(
    delta: &Gauge,
    x_domain: &Brick,
    y_domain: &Brick,
    cfg: &BuilderConfig,
) -> Result<TaggedDivision, DivisionError> {
    let n = x_domain.dim() + y_domain.dim();
    if delta.dim() != n {
        return Err(DivisionError::DimensionMismatch { expected: n, found: delta.dim() });
    }
    let slice = |x: &[f64]| -> Result<TaggedDivision, DivisionError> {
        let d = delta.clone();
        let xs = x.to_vec();
        let g = Gauge::new(y_domain.clone(), move |y| {
            let p: Vec<f64> = xs.iter().chain(y).copied().collect();
            0.5 * d.eval(&p).unwrap_or(f64::NAN)
        });
        cousin_bisect(y_domain, &g, cfg)
    };
    let d1 = {
        let d = delta.clone();
        let ydom = y_domain.clone();
        let cfg = cfg.clone();
        Gauge::new(x_domain.clone(), move |x| {
            let xs = x.to_vec();
            let dd = d.clone();
            let g = Gauge::new(ydom.clone(), move |y| {
                let p: Vec<f64> = xs.iter().chain(y).copied().collect();
                0.5 * dd.eval(&p).unwrap_or(f64::NAN)
            });
            match cousin_bisect(&ydom, &g, &cfg) {
                Ok(dy) => dy
                    .items
                    .iter()
                    .map(|t| {
                        let p: Vec<f64> = x.iter().chain(t.tag.iter()).copied().collect();
                        0.5 * d.eval(&p).unwrap_or(f64::NAN)
                    })
                    .fold(f64::INFINITY, f64::min),
                Err(_) => f64::NAN,
            }
        })
    };
    let dx = cousin_bisect(x_domain, &d1, cfg)?;
    product_division(&dx, |x| slice(x))
}

/// Division of the real line: rays `(-inf, u]`, `[v, inf)` and a fine division of `[u, v]`.
#[derive(Debug, Clone)]
pub struct InfiniteDivision {
    pub u: f64,
    pub v: f64,
    pub middle: TaggedDivision,
    pub cutoffs: (f64, f64),
}

impl InfiniteDivision {
    pub fn left_ray(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, self.u)
    }

    pub fn right_ray(&self) -> (f64, f64) {
        (self.v, f64::INFINITY)
    }
}

/// `u`, `v` are the first integers at or beyond `a - 1`, `b + 1` for which the chain
/// builder succeeds on `[u, v]`, widening by one on each side after a failure.
pub fn infinite_division(g: &Gauge, cutoffs: (f64, f64), cfg: &BuilderConfig) -> Result<InfiniteDivision, DivisionError> {
    let (a, b) = cutoffs;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(DivisionError::InvalidConfig(format!("cutoffs ({a}, {b})")));
    }
    let mut u = (a - 1.0).floor();
    let mut v = (b + 1.0).ceil();
    let mut last = None;
    for _ in 0..cfg.max_depth.clamp(1, 64) {
        match one_dim_chain(&Brick::interval(u, v)?, g) {
            Ok(middle) => return Ok(InfiniteDivision { u, v, middle, cutoffs }),
            Err(e) => last = Some(e),
        }
        u -= 1.0;
        v += 1.0;
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brick::validate_division;
    use crate::gauge::is_fine_division;

    fn unit() -> Brick {
        Brick::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn coarse_gauge_single_brick() {
        let g = Gauge::constant(unit(), 1.0).unwrap();
        let d = cousin_bisect(&unit(), &g, &BuilderConfig::default()).unwrap();
        // the corner sits on the sphere of radius 1, so the centre is the first fine tag
        assert_eq!(d.items.len(), 1);
        assert_eq!(d.items[0].tag.coords(), &[0.5]);
        let g = Gauge::constant(unit(), 1.01).unwrap();
        let d = cousin_bisect(&unit(), &g, &BuilderConfig::default()).unwrap();
        assert_eq!(d.items[0].tag.coords(), &[0.0]);
    }

    #[test]
    fn constant_gauge_point_three() {
        let g = Gauge::constant(unit(), 0.3).unwrap();
        let d = cousin_bisect(&unit(), &g, &BuilderConfig::default()).unwrap();
        validate_division(&d).unwrap();
        assert!(is_fine_division(&d, &g).unwrap());
        assert!(d.items.iter().all(|t| t.brick.farthest_vertex_distance(&t.tag) < 0.3));
        assert!(d.items.iter().all(|t| t.brick.diameter() < 0.6));
    }

    #[test]
    fn depth_exhaustion_reports_brick() {
        let g = Gauge::new(unit(), |_| 1e-300);
        let cfg = BuilderConfig { max_depth: 20, ..Default::default() };
        match cousin_bisect(&unit(), &g, &cfg) {
            Err(DivisionError::DepthExhausted { depth, brick, candidates }) => {
                assert_eq!(depth, 20);
                assert!(brick.diameter() <= 2f64.powi(-20));
                assert_eq!(candidates.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gauss_cells_cover_and_are_fine() {
        let g = Gauge::constant(Brick::unit(2), 0.05).unwrap();
        let cfg = BuilderConfig::with_rule(TagRule::Gauss(4));
        let d = cousin_bisect(&Brick::unit(2), &g, &cfg).unwrap();
        validate_division(&d).unwrap();
        assert!(is_fine_division(&d, &g).unwrap());
    }

    #[test]
    fn split_center_tags_at_ends() {
        let g = Gauge::constant(unit(), 0.2).unwrap();
        let d = cousin_bisect(&unit(), &g, &BuilderConfig::with_rule(TagRule::SplitCenter)).unwrap();
        validate_division(&d).unwrap();
        for t in &d.items {
            assert!(t.tag[0] == t.brick.lower()[0] || t.tag[0] == t.brick.upper()[0]);
        }
    }

    #[test]
    fn chain_constant() {
        let g = Gauge::constant(unit(), 0.4).unwrap();
        let d = one_dim_chain(&unit(), &g).unwrap();
        assert!(d.items.len() <= 4);
        validate_division(&d).unwrap();
        assert!(is_fine_division(&d, &g).unwrap());
        assert_eq!(d.items.last().unwrap().tag[0], 1.0);
    }

    #[test]
    fn chain_accumulates_at_zero() {
        let g = Gauge::new(unit(), |p| (p[0] / 2.0).max(0.01));
        let d = one_dim_chain(&unit(), &g).unwrap();
        validate_division(&d).unwrap();
        assert!(is_fine_division(&d, &g).unwrap());
        assert_eq!(d.items[0].tag[0], 0.0);
        let first_half = d.items.iter().filter(|t| t.tag[0] < 0.5).count();
        assert!(first_half > d.items.len() / 2);
    }

    #[test]
    fn trivial_product() {
        let dx = TaggedDivision::new(unit(), vec![TaggedBrick::new(unit(), Point::from(0.0)).unwrap()]);
        let p = product_division(&dx, |_| Ok(dx.clone())).unwrap();
        assert_eq!(p.items.len(), 1);
        assert_eq!(p.items[0].brick, Brick::unit(2));
        assert_eq!(p.items[0].tag.coords(), &[0.0, 0.0]);
    }

    #[test]
    fn product_of_thirds() {
        let thirds = |_: &Point| {
            let items = (0..3)
                .map(|i| {
                    let (a, b) = (i as f64 / 3.0, (i + 1) as f64 / 3.0);
                    TaggedBrick::new(Brick::interval(a, b).unwrap(), Point::from(a)).unwrap()
                })
                .collect();
            Ok(TaggedDivision::new(unit(), items))
        };
        let dx = thirds(&Point::from(0.0)).unwrap();
        let p = product_division(&dx, thirds).unwrap();
        assert_eq!(p.items.len(), 9);
        validate_division(&p).unwrap();
    }

    #[test]
    fn product_gauge_fineness() {
        let sq = Brick::unit(2);
        let delta = Gauge::new(sq.clone(), |p| 0.1 + 0.05 * (p[0] + p[1]));
        let d = fubini_division(&delta, &unit(), &unit(), &BuilderConfig::default()).unwrap();
        validate_division(&d).unwrap();
        assert!(is_fine_division(&d, &delta).unwrap());
    }

    #[test]
    fn infinite_example() {
        let g = Gauge::unbounded(1, |_| 0.5);
        let d = infinite_division(&g, (-1.0, 1.0), &BuilderConfig::default()).unwrap();
        assert_eq!((d.u, d.v), (-2.0, 2.0));
        validate_division(&d.middle).unwrap();
        assert!(is_fine_division(&d.middle, &g).unwrap());
    }
}
