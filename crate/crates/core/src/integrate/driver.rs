//! The adaptive driver: a decreasing sequence of gauges, one fine division per round, and a
//! stopping rule on successive Riemann sums.

use std::ops::Range;
use std::sync::Arc;

use super::{chunked_sum, term_values, IntegralResult, IntegrateConfig, IntegrateError, IntervalIntegrand, PointIntegrand, Status};
use crate::brick::{midpoint, Brick, Point, TaggedBrick, TaggedDivision};
use crate::division::{cousin_bisect_detailed, gauss_axes, gauss_cells, DivisionError, Leaf, TagRule};
use crate::gauge::Gauge;
use crate::sum::{neumaier, NeumaierSum};
use rayon::prelude::*;

/// Result together with the last division and the gauge it was fine for.
#[derive(Debug, Clone)]
pub struct Detailed {
    pub result: IntegralResult,
    pub division: TaggedDivision,
    pub gauge: Gauge,
    /// Riemann sum of every round.
    pub history: Vec<f64>,
}

pub fn integrate(f: &PointIntegrand, domain: &Brick, tol: f64, cfg: &IntegrateConfig) -> Result<IntegralResult, IntegrateError> {
    integrate_detailed(f, domain, tol, cfg).map(|d| d.result)
}

pub fn integrate_detailed(f: &PointIntegrand, domain: &Brick, tol: f64, cfg: &IntegrateConfig) -> Result<Detailed, IntegrateError> {
    check_dim(domain, f.singular_points())?;
    let singular = f.singular_points().iter().filter(|s| domain.contains(s)).cloned().collect();
    let p = Problem { h: IntervalIntegrand::from_point(f), domain: domain.clone(), tol, singular, forced: Vec::new() };
    p.run(cfg, &mut Budget::new(cfg))
}

/// Integrate a brick-point function. Gauges shrink towards the `forced` points so each is
/// the tag of every brick containing it.
pub fn integrate_interval(
    h: &IntervalIntegrand,
    domain: &Brick,
    tol: f64,
    cfg: &IntegrateConfig,
    forced: &[Point],
) -> Result<Detailed, IntegrateError> {
    check_dim(domain, forced)?;
    let forced = forced.iter().filter(|s| domain.contains(s)).cloned().collect();
    let p = Problem { h: h.clone(), domain: domain.clone(), tol, singular: Vec::new(), forced };
    p.run(cfg, &mut Budget::new(cfg))
}

fn check_dim(domain: &Brick, pts: &[Point]) -> Result<(), IntegrateError> {
    match pts.iter().find(|p| p.dim() != domain.dim()) {
        Some(p) => Err(IntegrateError::InvalidInput(format!(
            "point {p:?} has dimension {}, domain has {}",
            p.dim(),
            domain.dim()
        ))),
        None => Ok(()),
    }
}

pub(crate) struct Budget {
    used: u64,
    limit: u64,
}

impl Budget {
    pub(crate) fn new(cfg: &IntegrateConfig) -> Self {
        Budget { used: 0, limit: cfg.max_evaluations }
    }

    fn spent(&self) -> bool {
        self.used > self.limit
    }
}

/// Minimum of gauge caps over bisection-tree nodes containing a point.
#[derive(Debug, Clone, Default)]
struct CapNode {
    cap: f64,
    children: Option<Box<[CapNode]>>,
}

#[derive(Debug, Clone)]
struct CapTree {
    root: CapNode,
    domain: Brick,
}

impl CapTree {
    fn new(domain: Brick) -> Self {
        CapTree { root: CapNode { cap: f64::INFINITY, children: None }, domain }
    }

    fn insert(&mut self, path: &[u8], cap: f64) {
        let fanout = 1usize << self.domain.dim();
        let mut node = &mut self.root;
        for &k in path {
            let kids = node
                .children
                .get_or_insert_with(|| vec![CapNode { cap: f64::INFINITY, children: None }; fanout].into_boxed_slice());
            node = &mut kids[k as usize];
        }
        node.cap = node.cap.min(cap);
    }

    fn query(&self, p: &[f64]) -> f64 {
        let n = p.len();
        let mut lo = [0.0; 8];
        let mut hi = [0.0; 8];
        lo[..n].copy_from_slice(self.domain.lower());
        hi[..n].copy_from_slice(self.domain.upper());
        query_node(&self.root, p, lo, hi)
    }
}

fn query_node(node: &CapNode, p: &[f64], mut lo: [f64; 8], mut hi: [f64; 8]) -> f64 {
    let n = p.len();
    let mut node = node;
    let mut best = node.cap;
    loop {
        let Some(kids) = &node.children else { return best };
        let mut mids = [0.0; 8];
        let mut k = 0;
        let mut tie = false;
        for i in 0..n {
            mids[i] = midpoint(lo[i], hi[i]);
            if p[i] > mids[i] {
                k |= 1 << i;
            } else if p[i] == mids[i] {
                tie = true;
            }
        }
        if tie {
            // p on a midplane: every child whose closure holds it
            for (c, kid) in kids.iter().enumerate() {
                let holds = (0..n).all(|i| if c >> i & 1 == 1 { p[i] >= mids[i] } else { p[i] <= mids[i] });
                if holds {
                    let (mut l2, mut h2) = (lo, hi);
                    for i in 0..n {
                        if c >> i & 1 == 1 {
                            l2[i] = mids[i];
                        } else {
                            h2[i] = mids[i];
                        }
                    }
                    best = best.min(query_node(kid, p, l2, h2));
                }
            }
            return best;
        }
        for i in 0..n {
            if k >> i & 1 == 1 {
                lo[i] = mids[i];
            } else {
                hi[i] = mids[i];
            }
        }
        node = &kids[k];
        best = best.min(node.cap);
    }
}

pub(crate) struct Problem {
    pub h: IntervalIntegrand,
    pub domain: Brick,
    pub tol: f64,
    /// Tags whose own term is zero; the domain is split around them by a dyadic walk.
    pub singular: Vec<Point>,
    /// Points that must be tags, with the ordinary gauge at the point itself.
    pub forced: Vec<Point>,
}

/// Unflagged leaves may carry this share of `tol` in sum changes.
const FLAG_BUDGET: f64 = 0.25;
/// Flagged leaves get caps this fraction of their current gauge value.
const CAP_SHRINK: f64 = 0.35;
const MAX_WALK: usize = 1000;
/// Relative accuracy of rings integrated only for the ratio test.
const COARSE: f64 = 1e-3;

struct Round {
    leaves: Vec<Leaf>,
    sums: Vec<f64>,
    /// Gauge value at the first tag of each leaf.
    delta: Vec<f64>,
}

/// An old leaf to refine: the new leaves inside it and their item count.
struct Flag {
    leaves: Range<usize>,
    items: usize,
}

enum Check {
    /// Leaf sums agree within `tol / 2`; the total disagreement.
    Agrees(f64),
    /// Leaves to refine.
    Refine(Vec<usize>),
}

enum Second {
    Trapezoid,
    Midpoint,
    Gauss(usize),
}

/// The leaf integral by `rule`, and the evaluations spent.
fn second_rule(h: &IntervalIntegrand, b: &Brick, rule: &Second) -> (f64, u64) {
    match rule {
        Second::Trapezoid => {
            let v = b.vertices();
            let w = 1.0 / v.len() as f64;
            (neumaier(v.iter().map(|p| w * h.eval(p, b))), v.len() as u64)
        }
        Second::Midpoint => (h.eval(&b.center(), b), 1),
        Second::Gauss(k) => {
            let mut cells = Vec::new();
            match gauss_axes(b, *k).map(|axes| gauss_cells(&axes, *k, &mut cells)) {
                Some(Ok(())) => (neumaier(cells.iter().map(|t| h.eval(&t.tag, &t.brick))), cells.len() as u64),
                _ => (h.eval(&b.center(), b), 1),
            }
        }
    }
}

/// Outcome of the dyadic walk about one singular point.
struct Walk {
    rings: Vec<Detailed>,
    /// Cube left over at the centre, tagged by the point.
    inner: Brick,
    delta: f64,
    tail: f64,
}

impl Problem {
    fn sub(&self, domain: Brick, tol: f64) -> Problem {
        let keep = |v: &[Point]| v.iter().filter(|s| domain.contains(s)).cloned().collect();
        Problem { h: self.h.clone(), singular: keep(&self.singular), forced: keep(&self.forced), domain, tol }
    }

    fn gauge(&self, base: f64, caps: &Arc<CapTree>) -> Gauge {
        let caps = caps.clone();
        let forced = Arc::new(self.forced.clone());
        Gauge::new(self.domain.clone(), move |p| {
            let mut v = base.min(caps.query(p));
            for s in forced.iter() {
                if s.coords() != p {
                    v = v.min(0.5 * s.distance(p));
                }
            }
            v
        })
        .with_label("adaptive")
    }

    pub(crate) fn run(&self, cfg: &IntegrateConfig, budget: &mut Budget) -> Result<Detailed, IntegrateError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(IntegrateError::InvalidInput(format!("tolerance {} must be positive", self.tol)));
        }
        if self.singular.is_empty() {
            self.drive(cfg, budget)
        } else {
            self.split(cfg, budget)
        }
    }

    /// Rings about each singular point, the rest of the domain in a few bricks, and a small
    /// cube tagged by each singular point. The division returned is the union of the parts.
    ///
    /// A quarter of `tol` goes to the rings, a quarter to the remaining bricks and half to
    /// the mass left inside the central cubes.
    fn split(&self, cfg: &IntegrateConfig, budget: &mut Budget) -> Result<Detailed, IntegrateError> {
        let mut h0 = self.domain.longest_edge() / 4.0;
        for (i, a) in self.singular.iter().enumerate() {
            for b in &self.singular[i + 1..] {
                let d = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                h0 = h0.min(d / 4.0);
            }
        }
        let mut parts: Vec<Detailed> = Vec::new();
        let mut centres: Vec<(TaggedBrick, f64, f64)> = Vec::new();
        let mut tail = 0.0;
        let mut rest = vec![self.domain.clone()];
        for s in &self.singular {
            let w = self.walk(s, h0, cfg, budget)?;
            let v = self.h.eval(s, &w.inner);
            if !v.is_finite() {
                return Err(IntegrateError::NonFinite { tag: s.clone(), brick: w.inner });
            }
            tail += w.tail;
            parts.extend(w.rings);
            centres.push((TaggedBrick::new(w.inner, s.clone()).map_err(DivisionError::from)?, w.delta, v));
            let c = self.cube(s, 2.0 * h0).expect("walk succeeded on this cube");
            let mut next = Vec::with_capacity(rest.len());
            for b in rest {
                match b.intersect(&c) {
                    Some(i) => next.extend(Brick::complement_partition(&b, &i).map_err(DivisionError::from)?),
                    None => next.push(b),
                }
            }
            rest = next;
        }
        let share = self.tol / 4.0 / rest.len().max(1) as f64;
        for b in rest {
            parts.push(self.sub(b, share).drive(cfg, budget)?);
        }

        let mut result = IntegralResult::sum(parts.iter().map(|p| &p.result));
        let mut value = NeumaierSum::new();
        value.add(result.value);
        let mut items = Vec::with_capacity(result.items + centres.len());
        let mut glue = Vec::with_capacity(parts.len());
        for p in parts {
            items.extend(p.division.items);
            glue.push((p.division.parent, p.gauge));
        }
        let mut points = Vec::with_capacity(centres.len());
        for (t, d, v) in centres {
            value.add(v);
            points.push((t.tag.clone(), d));
            items.push(t);
        }
        result.value = value.value();
        result.err_estimate += tail;
        result.items = items.len();
        result.evaluations = budget.used;
        Ok(Detailed {
            result: result.clone(),
            division: TaggedDivision::new(self.domain.clone(), items),
            gauge: glued(self.domain.clone(), glue, points),
            history: vec![result.value],
        })
    }

    /// Refine a gauge round by round until successive sums settle.
    fn drive(&self, cfg: &IntegrateConfig, budget: &mut Budget) -> Result<Detailed, IntegrateError> {
        let mut caps = Arc::new(CapTree::new(self.domain.clone()));
        let base0 = self.domain.diameter() / 4.0;
        let mut bcfg = cfg.builder.clone();
        bcfg.max_items = Some(cfg.max_items);

        let mut history: Vec<f64> = Vec::new();
        let mut gaps: Vec<f64> = Vec::new();
        let mut last: Option<(TaggedDivision, Gauge)> = None;
        let mut prev: Option<Round> = None;
        let mut status = None;
        let mut quiet = false;
        // error seen by the second rule on the last division
        let mut second = 0.0;
        for m in 0..=cfg.max_refinements {
            let mut rechecked = false;
            let base = base0 * 0.5f64.powi(m as i32);
            let gauge = self.gauge(base, &caps);
            let out = match cousin_bisect_detailed(&self.domain, &gauge, &bcfg) {
                Ok(o) => o,
                Err(e @ (DivisionError::DepthExhausted { .. } | DivisionError::TooManyItems { .. })) => {
                    if last.is_none() {
                        return Err(match e {
                            DivisionError::TooManyItems { limit } => {
                                IntegrateError::Exhausted(format!("first division exceeds {limit} items"))
                            }
                            e => e.into(),
                        });
                    }
                    status = Some(match e {
                        DivisionError::DepthExhausted { .. } => Status::DepthExhausted,
                        _ => Status::MaxRefinements,
                    });
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            if prev.as_ref().is_some_and(|r| same_leaves(&r.leaves, &out.leaves)) {
                // the same division again: a round of its own only when no leaf was flagged,
                // otherwise it carries no new information
                if quiet {
                    let s = history[history.len() - 1];
                    gaps.push(0.0);
                    history.push(s);
                    if (s - history[history.len() - 3]).abs() < self.tol / 2.0 {
                        let r = prev.as_ref().expect("same leaves as the previous round");
                        match self.check_rule(r, cfg, budget)? {
                            Check::Agrees(e) => {
                                second = e;
                                status = Some(Status::Converged);
                                break;
                            }
                            Check::Refine(leaves) => {
                                self.cap(&mut caps, r, leaves);
                                quiet = false;
                            }
                        }
                    }
                }
                continue;
            }
            let vals = term_values(&self.h, &out.division)?;
            budget.used += vals.len() as u64;
            let s = chunked_sum(&vals);
            let sums: Vec<f64> = out.leaves.iter().map(|l| neumaier(vals[l.items.clone()].iter().copied())).collect();
            drop(vals);
            if let Some(&p) = history.last() {
                gaps.push((s - p).abs());
            }
            history.push(s);
            last = Some((out.division, gauge));

            let (division, gauge) = last.as_ref().expect("just stored");
            let delta = out.leaves.iter().map(|l| gauge.eval(&division.items[l.items.start].tag).unwrap_or(0.0)).collect();
            let round = Round { leaves: out.leaves, sums, delta };
            let n = history.len();
            if n >= 3 {
                let g1 = (history[n - 1] - history[n - 2]).abs();
                let g2 = (history[n - 1] - history[n - 3]).abs();
                if g1 < self.tol / 2.0 && g2 < self.tol / 2.0 {
                    match self.check_rule(&round, cfg, budget)? {
                        Check::Agrees(e) => {
                            second = e;
                            status = Some(Status::Converged);
                            break;
                        }
                        Check::Refine(leaves) => {
                            self.cap(&mut caps, &round, leaves);
                            rechecked = true;
                        }
                    }
                }
            }
            if budget.spent() {
                status = Some(Status::MaxRefinements);
                break;
            }
            if let Some(old) = prev.take() {
                let items = division.len();
                let flagged = self.flag(&old, &round);
                if self.projected(&flagged, items) > cfg.max_items {
                    // the next division would overflow the item limit
                    status = Some(Status::MaxRefinements);
                    break;
                }
                quiet = flagged.is_empty() && !rechecked;
                if !flagged.is_empty() {
                    let tree = Arc::make_mut(&mut caps);
                    for g in flagged {
                        for j in g.leaves {
                            tree.insert(&round.leaves[j].path, CAP_SHRINK * round.delta[j]);
                        }
                    }
                }
            }
            prev = Some(round);
        }
        let (division, gauge) = last.expect("at least one round");
        let n = history.len();
        let status = status.unwrap_or_else(|| {
            let recent = gaps.iter().rev().take(3).copied().fold(f64::INFINITY, f64::min);
            let earlier = gaps.iter().rev().skip(3).copied().fold(f64::INFINITY, f64::min);
            if recent >= earlier {
                Status::Oscillating
            } else {
                Status::MaxRefinements
            }
        });
        let err_estimate = match status {
            Status::Converged => (history[n - 1] - history[n - 2]).abs().max(second) + self.tol / 2.0,
            _ if n >= 3 => {
                (history[n - 1] - history[n - 2]).abs().max((history[n - 1] - history[n - 3]).abs()) + self.tol / 2.0
            }
            _ if n == 2 => (history[1] - history[0]).abs() + self.tol / 2.0,
            _ => f64::INFINITY,
        };
        Ok(Detailed {
            result: IntegralResult {
                value: history[n - 1],
                err_estimate,
                refinements: n - 1,
                items: division.len(),
                evaluations: budget.used,
                status,
            },
            division,
            gauge,
            history,
        })
    }

    /// Compare each leaf sum with a second rule of similar order on the leaf brick.
    ///
    /// Successive sums can agree while an error term sits still: a kink near the end of a
    /// brick keeps its midpoint error under halving. The second rule sees such leaves.
    fn check_rule(&self, round: &Round, cfg: &IntegrateConfig, budget: &mut Budget) -> Result<Check, IntegrateError> {
        let rule = match &cfg.builder.tag_rule {
            _ if !self.forced.is_empty() => return Ok(Check::Agrees(0.0)),
            TagRule::Center => Second::Trapezoid,
            TagRule::Corner => Second::Midpoint,
            TagRule::Gauss(1) => Second::Trapezoid,
            TagRule::Gauss(k) => Second::Gauss(k - 1),
            TagRule::SplitCenter | TagRule::Supplied(_) => return Ok(Check::Agrees(0.0)),
        };
        let h = &self.h;
        let other: Vec<(f64, u64)> = round.leaves.par_iter().map(|l| second_rule(h, &l.brick, &rule)).collect();
        budget.used += other.iter().map(|o| o.1).sum::<u64>();
        let scale = if matches!(rule, Second::Trapezoid) { 1.0 / 3.0 } else { 1.0 };
        // a vertex on an undeclared singularity says nothing about the leaf
        let signed: Vec<f64> = round
            .sums
            .iter()
            .zip(&other)
            .map(|(s, o)| if o.0.is_finite() { scale * (s - o.0) } else { 0.0 })
            .collect();
        // Leaf errors of an oscillating integrand cancel; only their sum bounds the total.
        let total = neumaier(signed.iter().copied()).abs();
        if total <= self.tol / 2.0 {
            return Ok(Check::Agrees(total));
        }
        let diffs: Vec<f64> = signed.iter().map(|d| d.abs()).collect();
        let mut order: Vec<usize> = (0..diffs.len()).collect();
        order.sort_by(|&a, &b| diffs[b].total_cmp(&diffs[a]).then(a.cmp(&b)));
        let mut rest = neumaier(diffs.iter().copied());
        let mut out = Vec::new();
        for j in order {
            if rest <= self.tol * FLAG_BUDGET {
                break;
            }
            rest -= diffs[j];
            out.push(j);
        }
        Ok(Check::Refine(out))
    }

    fn cap(&self, caps: &mut Arc<CapTree>, round: &Round, leaves: Vec<usize>) {
        let tree = Arc::make_mut(caps);
        for j in leaves {
            tree.insert(&round.leaves[j].path, CAP_SHRINK * round.delta[j]);
        }
    }

    /// Old leaves to refine.
    ///
    /// Leaves are taken by decreasing change of their sum between rounds until the changes
    /// left over total at most `FLAG_BUDGET * tol`.
    fn flag(&self, old: &Round, new: &Round) -> Vec<Flag> {
        let mut change = Vec::with_capacity(old.leaves.len());
        let mut j = 0;
        for (i, leaf) in old.leaves.iter().enumerate() {
            let start = j;
            let mut items = 0;
            while j < new.leaves.len() && new.leaves[j].path.starts_with(&leaf.path) {
                items += new.leaves[j].items.len();
                j += 1;
            }
            let e = (neumaier(new.sums[start..j].iter().copied()) - old.sums[i]).abs();
            change.push((e, start..j, items));
        }
        change.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.start.cmp(&b.1.start)));
        let mut rest = neumaier(change.iter().map(|c| c.0));
        let mut out = Vec::new();
        for (e, leaves, items) in change {
            if rest <= self.tol * FLAG_BUDGET {
                break;
            }
            rest -= e;
            out.push(Flag { leaves, items });
        }
        out
    }

    /// Rough size of the next division: the items under a flagged leaf multiply by `CAP_SHRINK^-n`.
    fn projected(&self, flagged: &[Flag], items: usize) -> usize {
        let grow = CAP_SHRINK.powi(-(self.domain.dim() as i32)) - 1.0;
        let extra: f64 = flagged.iter().map(|g| g.items as f64 * grow).sum();
        (items as f64 + extra) as usize
    }

    /// Cube of half-width `h` about `s`, clipped to the domain.
    fn cube(&self, s: &Point, h: f64) -> Option<Brick> {
        let lo: Vec<f64> = (0..s.dim()).map(|i| (s[i] - h).max(self.domain.lower()[i])).collect();
        let hi: Vec<f64> = (0..s.dim()).map(|i| (s[i] + h).min(self.domain.upper()[i])).collect();
        Brick::new(&lo, &hi).ok()
    }

    /// Integrate the rings `C(2h) \ C(h)` about `s` for `h = h0, h0/2, ...`.
    ///
    /// With `M` the sum of the absolute ring integrals at one level and `r` the ratio of
    /// successive `M`, the walk stops once `M <= tol` and the geometric tail `M r / (1 - r)`
    /// is below `tol / 2`. Three ratios in a row at least 1 mean the mass near `s` does not
    /// shrink. Level `i` rings share `tol (3/4)^i / 16`.
    fn level(&self, parts: &[Brick], tol: f64, cfg: &IntegrateConfig, budget: &mut Budget) -> Result<(Vec<Detailed>, f64), IntegrateError> {
        let mut out = Vec::with_capacity(parts.len());
        let mut m = 0.0;
        for ring in parts {
            let r = self.sub(ring.clone(), tol).drive(cfg, budget)?;
            m += r.result.value.abs();
            out.push(r);
        }
        Ok((out, m))
    }

    fn walk(&self, s: &Point, h0: f64, cfg: &IntegrateConfig, budget: &mut Budget) -> Result<Walk, IntegrateError> {
        let mut h = h0;
        let mut rings = Vec::new();
        let mut prev: Option<f64> = None;
        let mut growing = 0;
        let mut level_tol = self.tol / 16.0;
        for _ in 0..MAX_WALK {
            let (Some(outer), Some(inner)) = (self.cube(s, 2.0 * h), self.cube(s, h)) else {
                break;
            };
            let level = Brick::complement_partition(&outer, &inner).map_err(DivisionError::from)?;
            let tol = level_tol / level.len() as f64;
            let ratio = |m: f64| match prev {
                _ if m == 0.0 => 0.0,
                Some(pm) if pm > 0.0 => m / pm,
                _ => f64::INFINITY,
            };
            // After a level that did not decay, the next one only feeds the ratio test.
            let coarse = match prev {
                Some(pm) if growing > 0 => tol.max(COARSE * pm / level.len() as f64),
                _ => tol,
            };
            let (mut parts, mut m) = self.level(&level, coarse, cfg, budget)?;
            if coarse > tol && ratio(m) < 1.0 {
                (parts, m) = self.level(&level, tol, cfg, budget)?;
            }
            rings.extend(parts);
            if prev.is_some() {
                let r = ratio(m);
                if r >= 1.0 {
                    growing += 1;
                    if growing >= 3 {
                        return Err(IntegrateError::NonIntegrable {
                            at: s.clone(),
                            reason: format!("absolute mass of dyadic rings does not decay (ratio {r:.3} at radius {h:e})"),
                        });
                    }
                } else {
                    growing = 0;
                    let tail = m * r / (1.0 - r);
                    if m <= self.tol && tail <= self.tol / 2.0 {
                        let delta = inner.farthest_vertex_distance(s) * (1.0 + 1e-9);
                        return Ok(Walk { rings, inner, delta, tail });
                    }
                }
            }
            if budget.spent() {
                return Err(IntegrateError::Exhausted(format!("evaluation budget spent resolving {s:?}")));
            }
            prev = Some(m);
            h *= 0.5;
            level_tol *= 0.75;
        }
        Err(IntegrateError::Division(DivisionError::DepthExhausted {
            depth: MAX_WALK,
            brick: self.cube(s, h).unwrap_or_else(|| self.domain.clone()),
            candidates: vec![(s.clone(), h)],
        }))
    }
}

fn same_leaves(a: &[Leaf], b: &[Leaf]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.path == y.path && x.items == y.items)
}

/// Gauge on the union of parts: the largest part gauge at a point, so every item of every
/// part is fine for it; the walk radius at a singular point.
fn glued(domain: Brick, parts: Vec<(Brick, Gauge)>, points: Vec<(Point, f64)>) -> Gauge {
    Gauge::new(domain, move |p| {
        if let Some((_, d)) = points.iter().find(|(s, _)| s.coords() == p) {
            return *d;
        }
        let v = parts
            .iter()
            .filter(|(b, _)| b.contains(p))
            .filter_map(|(_, g)| g.eval(p).ok())
            .fold(0.0, f64::max);
        if v > 0.0 {
            v
        } else {
            points.iter().map(|(s, _)| 0.5 * s.distance(p)).fold(f64::INFINITY, f64::min)
        }
    })
    .with_label("split")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Brick {
        Brick::interval(a, b).unwrap()
    }

    #[test]
    fn polynomial() {
        let r = integrate(&PointIntegrand::of_x(|x| x * x), &iv(0.0, 1.0), 1e-8, &IntegrateConfig::default()).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!((r.value - 1.0 / 3.0).abs() < 1e-8, "{r:?}");
        assert!(r.err_estimate <= 1e-8);
    }

    #[test]
    fn inverse_sqrt_with_singular_point() {
        let f = PointIntegrand::of_x(|x| x.powf(-0.5)).with_singular_points(vec![Point::from(0.0)]);
        let r = integrate(&f, &iv(0.0, 1.0), 1e-3, &IntegrateConfig::default()).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!((r.value - 2.0).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn interior_pole_is_rejected() {
        let f = PointIntegrand::of_x(|x| 1.0 / x).with_singular_points(vec![Point::from(0.0)]);
        let e = integrate(&f, &iv(-1.0, 1.0), 1e-6, &IntegrateConfig::default()).unwrap_err();
        assert!(matches!(e, IntegrateError::NonIntegrable { .. }), "{e:?}");
    }

    #[test]
    fn cap_tree_query() {
        let mut t = CapTree::new(iv(0.0, 1.0));
        t.insert(&[0, 1], 0.01);
        assert_eq!(t.query(&[0.3]), 0.01);
        assert_eq!(t.query(&[0.25]), 0.01);
        assert_eq!(t.query(&[0.6]), f64::INFINITY);
        t.insert(&[], 0.5);
        assert_eq!(t.query(&[0.6]), 0.5);
    }

    #[test]
    fn square() {
        let f = PointIntegrand::new(|p| p[0] * p[1]);
        let r = integrate(&f, &Brick::unit(2), 1e-7, &IntegrateConfig::default()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-7, "{r:?}");
    }
}
