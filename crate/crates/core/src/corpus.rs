//! Named integrands with known values.

use crate::gauge::CountablePoints;
use crate::brick::Point;

/// `F(x) = |x|^p sin(|x|^-q)`, with `F(0) = 0`.
pub fn deriv_osc_primitive(p: f64, q: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let a = x.abs();
    a.powf(p) * a.powf(-q).sin()
}

/// `F'(x) = p x^(p-1) sin(x^-q) - q x^(p-q-1) cos(x^-q)` for `x > 0`, odd extension for
/// `x < 0`, and `0` at the origin.
///
/// For `p <= q + 1` the derivative is unbounded near 0 and `|F'|` has no finite integral,
/// while `F'` itself integrates to `F(1) - F(0)`.
pub fn deriv_osc(p: f64, q: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let a = x.abs();
    let t = a.powf(-q);
    let d = p * a.powf(p - 1.0) * t.sin() - q * a.powf(p - q - 1.0) * t.cos();
    if x < 0.0 {
        -d
    } else {
        d
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// First `n` rationals in the order `0, 1, -1, 1/2, -1/2, 2, -2, 1/3, -1/3, 3, -3, ...`:
/// fractions `p/q` by increasing `p + q`, then by `p`, later appearances of a value skipped.
pub fn rationals(n: usize) -> Vec<(i64, u64)> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push((0, 1));
    let mut height = 2u64;
    while out.len() < n {
        for p in 1..height {
            let q = height - p;
            if gcd(p, q) != 1 {
                continue;
            }
            for v in [p as i64, -(p as i64)] {
                if out.len() < n {
                    out.push((v, q));
                }
            }
        }
        height += 1;
    }
    out
}

/// The first `n` rationals as a point list with level 1.
pub fn rational_points(n: usize) -> CountablePoints {
    let r = rationals(n);
    CountablePoints::from_fn(n, |j| (Point::from(r[j].0 as f64 / r[j].1 as f64), 1))
}

/// Indicator of the first `n` rationals, compared as binary floats.
pub fn dirichlet(n: usize) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    let pts = std::sync::Arc::new(rational_points(n));
    move |x| if pts.contains(&[x]) { 1.0 } else { 0.0 }
}

/// `1` for `x >= c`, else `0`.
pub fn step_at(c: f64, x: f64) -> f64 {
    if x >= c {
        1.0
    } else {
        0.0
    }
}
