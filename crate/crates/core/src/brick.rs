//! Points and closed axis-parallel bricks in R^n.

use std::fmt;
use std::ops::Deref;

use smallvec::SmallVec;
use thiserror::Error;

/// Coordinates of a point. Up to three axes are stored inline.
#[derive(Clone, PartialEq, Default)]
pub struct Point(SmallVec<[f64; 3]>);

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Point(SmallVec::from_slice(coords))
    }

    pub fn from_vec(coords: Vec<f64>) -> Self {
        Point(SmallVec::from_vec(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl serde::Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::new(&[x])
    }
}

impl From<&[f64]> for Point {
    fn from(c: &[f64]) -> Self {
        Point::new(c)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(c: [f64; N]) -> Self {
        Point::new(&c)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BrickError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero-dimensional brick")]
    ZeroDimensional,
    #[error("non-finite coordinate on axis {axis}")]
    NonFinite { axis: usize },
    #[error("empty extent on axis {axis}: [{lower}, {upper}]")]
    Empty { axis: usize, lower: f64, upper: f64 },
    #[error("brick cannot be bisected on axis {axis}: extent below floating-point resolution")]
    Unsplittable { axis: usize },
    #[error("inner brick is not contained in the outer brick")]
    NotContained,
}

/// Closed brick `[a_1,b_1] x ... x [a_n,b_n]` with `a_i < b_i`.
#[derive(Clone, PartialEq, serde::Serialize)]
pub struct Brick {
    lower: Point,
    upper: Point,
}

impl fmt::Debug for Brick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Brick{:?}..{:?}", self.lower, self.upper)
    }
}

impl Brick {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Self, BrickError> {
        if lower.len() != upper.len() {
            return Err(BrickError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(BrickError::ZeroDimensional);
        }
        for (axis, (&a, &b)) in lower.iter().zip(upper).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(BrickError::NonFinite { axis });
            }
            if a >= b {
                return Err(BrickError::Empty { axis, lower: a, upper: b });
            }
        }
        Ok(Brick { lower: Point::new(lower), upper: Point::new(upper) })
    }

    /// One-dimensional brick `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<Self, BrickError> {
        Brick::new(&[a], &[b])
    }

    /// Product of axis intervals `(a_i, b_i)`.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self, BrickError> {
        let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        let hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
        Brick::new(&lo, &hi)
    }

    pub fn unit(n: usize) -> Self {
        Brick::new(&vec![0.0; n], &vec![1.0; n]).expect("unit brick")
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn edge(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn edges(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim()).map(|i| self.edge(i))
    }

    pub fn volume(&self) -> f64 {
        self.edges().product()
    }

    /// Length of the main diagonal.
    pub fn diameter(&self) -> f64 {
        self.edges().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn longest_edge(&self) -> f64 {
        self.edges().fold(0.0, f64::max)
    }

    /// `volume / longest_edge^n`, in `(0, 1]`.
    pub fn regularity(&self) -> f64 {
        self.edges().map(|e| e / self.longest_edge()).product()
    }

    pub fn center(&self) -> Point {
        Point::from_vec(
            (0..self.dim()).map(|i| midpoint(self.lower[i], self.upper[i])).collect(),
        )
    }

    /// Closed containment.
    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .enumerate()
                .all(|(i, &x)| self.lower[i] <= x && x <= self.upper[i])
    }

    pub fn contains_brick(&self, other: &Brick) -> bool {
        other.dim() == self.dim()
            && (0..self.dim())
                .all(|i| self.lower[i] <= other.lower[i] && other.upper[i] <= self.upper[i])
    }

    /// Interior containment.
    pub fn contains_interior(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .enumerate()
                .all(|(i, &x)| self.lower[i] < x && x < self.upper[i])
    }

    /// Common part, if it has positive volume.
    pub fn intersect(&self, other: &Brick) -> Option<Brick> {
        if other.dim() != self.dim() {
            return None;
        }
        let lo: Vec<f64> = (0..self.dim()).map(|i| self.lower[i].max(other.lower[i])).collect();
        let hi: Vec<f64> = (0..self.dim()).map(|i| self.upper[i].min(other.upper[i])).collect();
        Brick::new(&lo, &hi).ok()
    }

    /// The 2^n corners; bit `i` of the index selects the upper end on axis `i`.
    pub fn vertices(&self) -> Vec<Point> {
        let n = self.dim();
        (0..1usize << n).map(|k| self.vertex(k)).collect()
    }

    pub fn vertex(&self, k: usize) -> Point {
        Point::from_vec(
            (0..self.dim())
                .map(|i| if k >> i & 1 == 1 { self.upper[i] } else { self.lower[i] })
                .collect(),
        )
    }

    /// Largest distance from `p` to a vertex.
    pub fn farthest_vertex_distance(&self, p: &[f64]) -> f64 {
        p.iter()
            .enumerate()
            .map(|(i, &x)| {
                let d = (x - self.lower[i]).abs().max((self.upper[i] - x).abs());
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Distance from a point of the brick to its boundary.
    pub fn distance_to_boundary(&self, p: &[f64]) -> f64 {
        p.iter()
            .enumerate()
            .map(|(i, &x)| (x - self.lower[i]).min(self.upper[i] - x))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    /// Euclidean distance from `p` to the closed brick (zero inside).
    pub fn distance_to(&self, p: &[f64]) -> f64 {
        p.iter()
            .enumerate()
            .map(|(i, &x)| {
                let d = (self.lower[i] - x).max(x - self.upper[i]).max(0.0);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Child `k` of the bisection; bit `i` of `k` selects the upper half on axis `i`.
    pub fn child(&self, k: usize) -> Result<Brick, BrickError> {
        let n = self.dim();
        let mut lo = SmallVec::<[f64; 3]>::with_capacity(n);
        let mut hi = SmallVec::<[f64; 3]>::with_capacity(n);
        for i in 0..n {
            let (a, b) = (self.lower[i], self.upper[i]);
            let m = midpoint(a, b);
            if !(a < m && m < b) {
                return Err(BrickError::Unsplittable { axis: i });
            }
            if k >> i & 1 == 1 {
                lo.push(m);
                hi.push(b);
            } else {
                lo.push(a);
                hi.push(m);
            }
        }
        Ok(Brick { lower: Point(lo), upper: Point(hi) })
    }

    /// Halve every edge, giving 2^n children.
    pub fn bisect(&self) -> Result<Vec<Brick>, BrickError> {
        (0..1usize << self.dim()).map(|k| self.child(k)).collect()
    }

    /// Index of a child containing `p`, preferring the lower half on ties.
    pub fn child_index_of(&self, p: &[f64]) -> usize {
        let mut k = 0;
        for (i, &x) in p.iter().enumerate() {
            if x > midpoint(self.lower[i], self.upper[i]) {
                k |= 1 << i;
            }
        }
        k
    }

    /// Indices of all children whose closure contains `p`.
    pub fn child_indices_containing(&self, p: &[f64]) -> SmallVec<[usize; 8]> {
        let mut out: SmallVec<[usize; 8]> = SmallVec::new();
        out.push(0);
        for (i, &x) in p.iter().enumerate() {
            let m = midpoint(self.lower[i], self.upper[i]);
            let bit = 1usize << i;
            if x > m {
                for k in out.iter_mut() {
                    *k |= bit;
                }
            } else if x == m {
                let len = out.len();
                for j in 0..len {
                    let k = out[j] | bit;
                    out.push(k);
                }
            }
        }
        out
    }

    /// Closure of `outer \ inner` as the grid cells cut by extending the faces of `inner`.
    ///
    /// Gives at most 3^n - 1 bricks with pairwise disjoint interiors.
    pub fn complement_partition(outer: &Brick, inner: &Brick) -> Result<Vec<Brick>, BrickError> {
        if outer.dim() != inner.dim() {
            return Err(BrickError::DimensionMismatch { expected: outer.dim(), found: inner.dim() });
        }
        if !outer.contains_brick(inner) {
            return Err(BrickError::NotContained);
        }
        let n = outer.dim();
        // per axis: list of (lo, hi, is_inner_segment)
        let segments: Vec<Vec<(f64, f64, bool)>> = (0..n)
            .map(|i| {
                let mut s = Vec::with_capacity(3);
                if outer.lower[i] < inner.lower[i] {
                    s.push((outer.lower[i], inner.lower[i], false));
                }
                s.push((inner.lower[i], inner.upper[i], true));
                if inner.upper[i] < outer.upper[i] {
                    s.push((inner.upper[i], outer.upper[i], false));
                }
                s
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            if idx.iter().enumerate().any(|(i, &j)| !segments[i][j].2) {
                let lo: Vec<f64> = (0..n).map(|i| segments[i][idx[i]].0).collect();
                let hi: Vec<f64> = (0..n).map(|i| segments[i][idx[i]].1).collect();
                out.push(Brick::new(&lo, &hi)?);
            }
            let mut axis = 0;
            loop {
                if axis == n {
                    return Ok(out);
                }
                idx[axis] += 1;
                if idx[axis] < segments[axis].len() {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }
}

/// A brick with its associated point.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedBrick {
    pub brick: Brick,
    pub tag: Point,
}

impl TaggedBrick {
    pub fn new(brick: Brick, tag: Point) -> Result<Self, BrickError> {
        if tag.dim() != brick.dim() {
            return Err(BrickError::DimensionMismatch { expected: brick.dim(), found: tag.dim() });
        }
        if !brick.contains(&tag) {
            return Err(BrickError::NotContained);
        }
        Ok(TaggedBrick { brick, tag })
    }
}

/// Finite family of tagged bricks covering `parent`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedDivision {
    pub parent: Brick,
    pub items: Vec<TaggedBrick>,
}

impl TaggedDivision {
    pub fn new(parent: Brick, items: Vec<TaggedBrick>) -> Self {
        TaggedDivision { parent, items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Largest item diameter (the classical norm of the division).
    pub fn norm(&self) -> f64 {
        self.items.iter().map(|t| t.brick.diameter()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Violation {
    #[error("division has no items")]
    Empty,
    #[error("item {index} has dimension {found}, parent has {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("tag of item {index} ({tag:?}) is outside its brick {brick:?}")]
    TagOutside { index: usize, brick: Brick, tag: Point },
    #[error("item {index} ({brick:?}) is not inside the parent")]
    OutsideParent { index: usize, brick: Brick },
    #[error("items {first} ({a:?}) and {second} ({b:?}) overlap")]
    Overlap { first: usize, second: usize, a: Brick, b: Brick },
    #[error("items cover volume {covered}, parent volume is {expected}")]
    CoverGap { covered: f64, expected: f64 },
}

/// Absolute coordinate slack used when checking divisions.
pub const FACE_TOLERANCE: f64 = 1e-12;

/// Check that `d` is a tagged division of its parent; reports the first violation found.
pub fn validate_division(d: &TaggedDivision) -> Result<(), Violation> {
    let tol = FACE_TOLERANCE;
    let n = d.parent.dim();
    if d.items.is_empty() {
        return Err(Violation::Empty);
    }
    for (index, it) in d.items.iter().enumerate() {
        if it.brick.dim() != n || it.tag.dim() != n {
            return Err(Violation::DimensionMismatch {
                index,
                expected: n,
                found: if it.brick.dim() != n { it.brick.dim() } else { it.tag.dim() },
            });
        }
        if !it.brick.contains(&it.tag) {
            return Err(Violation::TagOutside { index, brick: it.brick.clone(), tag: it.tag.clone() });
        }
        let inside = (0..n).all(|i| {
            it.brick.lower()[i] >= d.parent.lower()[i] - tol && it.brick.upper()[i] <= d.parent.upper()[i] + tol
        });
        if !inside {
            return Err(Violation::OutsideParent { index, brick: it.brick.clone() });
        }
    }
    // sweep along the first axis
    let mut order: Vec<usize> = (0..d.items.len()).collect();
    order.sort_by(|&a, &b| d.items[a].brick.lower()[0].total_cmp(&d.items[b].brick.lower()[0]).then(a.cmp(&b)));
    let mut active: Vec<usize> = Vec::new();
    for &j in &order {
        let bj = &d.items[j].brick;
        active.retain(|&i| d.items[i].brick.upper()[0] > bj.lower()[0] + tol);
        for &i in &active {
            let bi = &d.items[i].brick;
            let overlap = (0..n).all(|k| bi.upper()[k].min(bj.upper()[k]) - bi.lower()[k].max(bj.lower()[k]) > tol);
            if overlap {
                let (first, second) = (i.min(j), i.max(j));
                return Err(Violation::Overlap {
                    first,
                    second,
                    a: d.items[first].brick.clone(),
                    b: d.items[second].brick.clone(),
                });
            }
        }
        active.push(j);
    }
    let covered = crate::sum::neumaier(d.items.iter().map(|t| t.brick.volume()));
    let expected = d.parent.volume();
    let slack = expected * (4.0 * n as f64 * d.items.len() as f64 * f64::EPSILON).max(1e-12);
    if (covered - expected).abs() > slack {
        return Err(Violation::CoverGap { covered, expected });
    }
    Ok(())
}

pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    a + (b - a) * 0.5
}
