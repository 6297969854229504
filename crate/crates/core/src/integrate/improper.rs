//! Integrals that exist only as limits: dyadic ladders towards an endpoint, finite sets
//! of gaps, and the whole real line.

use serde::{Deserialize, Serialize};

use super::driver::integrate;
use super::{IntegralResult, IntegrateConfig, IntegrateError, PointIntegrand, Status};
use crate::brick::Brick;
use crate::sum::NeumaierSum;

/// Endpoint approached by a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

const MAX_PANELS: usize = 1100;
/// Panel tolerances stop halving at `tol` times this.
const PANEL_FLOOR: f64 = 1.0 / (1u64 << 20) as f64;

fn interval(a: f64, b: f64) -> Result<Brick, IntegrateError> {
    Brick::interval(a, b).map_err(|e| IntegrateError::InvalidInput(e.to_string()))
}

fn positive_tol(tol: f64) -> Result<(), IntegrateError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(IntegrateError::InvalidInput(format!("tolerance {tol} must be positive")))
    }
}

struct Ladder {
    sum: NeumaierSum,
    partial: Vec<f64>,
    panels: Vec<f64>,
    err: f64,
    items: usize,
    evaluations: u64,
    refinements: usize,
    status: Status,
}

impl Ladder {
    fn new() -> Self {
        Ladder {
            sum: NeumaierSum::new(),
            partial: Vec::new(),
            panels: Vec::new(),
            err: 0.0,
            items: 0,
            evaluations: 0,
            refinements: 0,
            status: Status::Converged,
        }
    }

    fn push(&mut self, r: &IntegralResult) {
        self.sum.add(r.value);
        self.partial.push(self.sum.value());
        self.panels.push(r.value);
        self.err += r.err_estimate;
        self.items += r.items;
        self.evaluations += r.evaluations;
        self.refinements = self.refinements.max(r.refinements);
        if r.status != Status::Converged && self.status == Status::Converged {
            self.status = r.status;
        }
    }

    /// Aitken extrapolation of the last three partial sums.
    fn aitken(&self, back: usize) -> Option<f64> {
        let n = self.partial.len().checked_sub(back)?;
        if n < 3 {
            return None;
        }
        let (s0, s1, s2) = (self.partial[n - 3], self.partial[n - 2], self.partial[n - 1]);
        let (d1, d2) = (s1 - s0, s2 - s1);
        let den = d2 - d1;
        if den == 0.0 || !den.is_finite() {
            Some(s2)
        } else {
            Some(s2 - d2 * d2 / den)
        }
    }

    fn result(&self, extra_err: f64) -> IntegralResult {
        IntegralResult {
            value: self.sum.value(),
            err_estimate: self.err + extra_err,
            refinements: self.refinements,
            items: self.items,
            evaluations: self.evaluations,
            status: self.status,
        }
    }
}

/// Integral over `[a, c]` as the limit of integrals over `[a, b_j]`, with the ladder
/// `b_j = c - (c - a) 2^-j` approaching `c` (`Side::Right`) or its mirror image approaching
/// `a` (`Side::Left`).
///
/// Panel `j` is integrated to `tol / 2^(j+1)`. The ladder stops once the newest panel is
/// below `tol / 4` and the Aitken limit of the partial sums has settled to within `tol / 4`
/// of itself and `tol / 2` of the partial sum. Panels that stop shrinking mean the limit
/// does not exist.
pub fn cauchy_extension(
    f: &PointIntegrand,
    a: f64,
    c: f64,
    side: Side,
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<IntegralResult, IntegrateError> {
    positive_tol(tol)?;
    if !(a.is_finite() && c.is_finite() && a < c) {
        return Err(IntegrateError::InvalidInput(format!("ladder needs a < c, got [{a}, {c}]")));
    }
    let end = match side {
        Side::Right => c,
        Side::Left => a,
    };
    let point = |j: i32| match side {
        Side::Right => c - (c - a) * 0.5f64.powi(j),
        Side::Left => a + (c - a) * 0.5f64.powi(j),
    };
    let mut ladder = Ladder::new();
    let mut growing = 0;
    for j in 1..=MAX_PANELS as i32 {
        let (p, q) = (point(j - 1), point(j));
        if p == q || q == end {
            break;
        }
        let panel = match side {
            Side::Right => interval(p, q)?,
            Side::Left => interval(q, p)?,
        };
        let ptol = (tol * 0.5f64.powi(j + 1)).max(tol * PANEL_FLOOR);
        let r = integrate(f, &panel, ptol, cfg)?;
        ladder.push(&r);
        let n = ladder.panels.len();
        if n >= 2 {
            let (prev, last) = (ladder.panels[n - 2].abs(), ladder.panels[n - 1].abs());
            if last >= prev && last > tol / 4.0 {
                growing += 1;
                if growing >= 3 {
                    return Err(IntegrateError::NonIntegrable {
                        at: crate::brick::Point::from(end),
                        reason: format!("ladder panels do not shrink (panel {j} = {:e})", ladder.panels[n - 1]),
                    });
                }
            } else {
                growing = 0;
            }
        }
        if ladder.panels[n - 1].abs() < tol / 4.0 {
            if let (Some(x), Some(y)) = (ladder.aitken(0), ladder.aitken(1)) {
                let s = ladder.sum.value();
                if (x - y).abs() < tol / 4.0 && (x - s).abs() < tol / 2.0 {
                    return Ok(ladder.result((x - s).abs()));
                }
            }
        }
    }
    if (end - point(ladder.panels.len() as i32)).abs() == 0.0 || ladder.panels.len() >= MAX_PANELS {
        let s = ladder.sum.value();
        if let Some(x) = ladder.aitken(0) {
            if ladder.panels.last().is_some_and(|p| p.abs() < tol / 4.0) && (x - s).abs() < tol / 2.0 {
                return Ok(ladder.result((x - s).abs()));
            }
        }
    }
    Err(IntegrateError::NonIntegrable {
        at: crate::brick::Point::from(end),
        reason: "partial integrals do not settle before the ladder reaches the endpoint".into(),
    })
}

/// Integral over `domain` with a singularity strictly inside, as two independent limits.
///
/// Each side is a ladder of its own; a symmetric cancellation (principal value) is never
/// accepted.
pub fn integrate_symmetric_check(
    f: &PointIntegrand,
    singularity: f64,
    domain: &Brick,
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<IntegralResult, IntegrateError> {
    positive_tol(tol)?;
    if domain.dim() != 1 {
        return Err(IntegrateError::InvalidInput("one-dimensional domain required".into()));
    }
    let (a, b) = (domain.lower()[0], domain.upper()[0]);
    if !(a < singularity && singularity < b) {
        return Err(IntegrateError::InvalidInput(format!("{singularity} is not inside [{a}, {b}]")));
    }
    let left = cauchy_extension(f, a, singularity, Side::Right, tol / 2.0, cfg)?;
    let right = cauchy_extension(f, singularity, b, Side::Left, tol / 2.0, cfg)?;
    Ok(IntegralResult::sum([&left, &right]))
}

/// An open interval `(lo, hi)` on whose closure the integral exists only as a limit at
/// the ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
}

/// Off-gap integral plus the integrals over the gaps.
pub fn integrate_pieces(off_gaps: &IntegralResult, gaps: &[IntegralResult]) -> IntegralResult {
    IntegralResult::sum(std::iter::once(off_gaps).chain(gaps))
}

/// Integral over `domain` from its values off a finite set of disjoint open gaps and on
/// each gap.
///
/// Off the gaps `f` is integrated directly; each gap is split at its midpoint and both
/// halves are ladders towards the gap ends.
pub fn denjoy_extension(
    f: &PointIntegrand,
    domain: &Brick,
    gaps: &[Gap],
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<IntegralResult, IntegrateError> {
    positive_tol(tol)?;
    if domain.dim() != 1 {
        return Err(IntegrateError::InvalidInput("one-dimensional domain required".into()));
    }
    let (a, b) = (domain.lower()[0], domain.upper()[0]);
    let mut sorted = gaps.to_vec();
    sorted.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    for (i, g) in sorted.iter().enumerate() {
        if !(a <= g.lo && g.lo < g.hi && g.hi <= b) {
            return Err(IntegrateError::InvalidInput(format!("gap ({}, {}) is not inside [{a}, {b}]", g.lo, g.hi)));
        }
        if i > 0 && sorted[i - 1].hi > g.lo {
            return Err(IntegrateError::InvalidInput("gaps overlap".into()));
        }
    }
    let share = tol / (2 * sorted.len() + 1) as f64;
    let mut off = Vec::new();
    let mut t = a;
    for g in &sorted {
        if t < g.lo {
            off.push(integrate(f, &interval(t, g.lo)?, share, cfg)?);
        }
        t = g.hi;
    }
    if t < b {
        off.push(integrate(f, &interval(t, b)?, share, cfg)?);
    }
    let off = IntegralResult::sum(&off);
    let mut parts = Vec::with_capacity(sorted.len());
    for g in &sorted {
        let m = 0.5 * (g.lo + g.hi);
        let l = cauchy_extension(f, g.lo, m, Side::Left, share / 2.0, cfg)?;
        let r = cauchy_extension(f, m, g.hi, Side::Right, share / 2.0, cfg)?;
        parts.push(IntegralResult::sum([&l, &r]));
    }
    Ok(integrate_pieces(&off, &parts))
}

const MAX_DOUBLINGS: i32 = 40;

/// Integral over the real line with starting cutoffs `(-1, 1)`.
pub fn integrate_infinite(f: &PointIntegrand, tol: f64, cfg: &IntegrateConfig) -> Result<IntegralResult, IntegrateError> {
    integrate_infinite_from(f, (-1.0, 1.0), tol, cfg)
}

/// Integral over the real line: `[a, b]`, then panels out to `b + 2^k - 1` on the right and
/// `a - 2^k + 1` on the left, each side on its own until two panels in a row add less than
/// `tol / 4`. The rays beyond the last cutoffs contribute nothing.
pub fn integrate_infinite_from(
    f: &PointIntegrand,
    cutoffs: (f64, f64),
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<IntegralResult, IntegrateError> {
    positive_tol(tol)?;
    let (a, b) = cutoffs;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(IntegrateError::InvalidInput(format!("cutoffs ({a}, {b})")));
    }
    let middle = integrate(f, &interval(a, b)?, tol / 4.0, cfg)?;
    let right = tail(f, b, 1.0, tol, cfg).map_err(|e| side_error(e, "right"))?;
    let left = tail(f, a, -1.0, tol, cfg).map_err(|e| side_error(e, "left"))?;
    Ok(IntegralResult::sum([&left, &middle, &right]))
}

fn side_error(e: Option<IntegrateError>, side: &'static str) -> IntegrateError {
    e.unwrap_or(IntegrateError::DivergentTail { side })
}

fn tail(f: &PointIntegrand, start: f64, dir: f64, tol: f64, cfg: &IntegrateConfig) -> Result<IntegralResult, Option<IntegrateError>> {
    let mut parts = Vec::new();
    let mut quiet = 0;
    for k in 1..=MAX_DOUBLINGS {
        let p = start + dir * (2f64.powi(k - 1) - 1.0);
        let q = start + dir * (2f64.powi(k) - 1.0);
        let panel = if dir > 0.0 { interval(p, q) } else { interval(q, p) }.map_err(Some)?;
        let ptol = (tol * 0.5f64.powi(k + 2)).max(tol * PANEL_FLOOR);
        let r = integrate(f, &panel, ptol, cfg).map_err(Some)?;
        quiet = if r.value.abs() < tol / 4.0 { quiet + 1 } else { 0 };
        parts.push(r);
        if quiet >= 2 {
            return Ok(IntegralResult::sum(&parts));
        }
    }
    Err(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> IntegrateConfig {
        IntegrateConfig::gauss()
    }

    #[test]
    fn inverse_sqrt_ladder() {
        let f = PointIntegrand::of_x(|x| x.powf(-0.5));
        let r = cauchy_extension(&f, 0.0, 1.0, Side::Left, 1e-6, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn log_ladder() {
        let f = PointIntegrand::of_x(|x| x.ln());
        let r = cauchy_extension(&f, 0.0, 1.0, Side::Left, 1e-6, &cfg()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn harmonic_ladder_diverges() {
        let f = PointIntegrand::of_x(|x| 1.0 / x);
        let e = cauchy_extension(&f, 0.0, 1.0, Side::Left, 1e-6, &cfg()).unwrap_err();
        assert!(matches!(e, IntegrateError::NonIntegrable { .. }), "{e:?}");
    }

    #[test]
    fn principal_value_is_not_accepted() {
        let f = PointIntegrand::of_x(|x| 1.0 / x);
        let e = integrate_symmetric_check(&f, 0.0, &Brick::interval(-1.0, 1.0).unwrap(), 1e-6, &cfg()).unwrap_err();
        assert!(matches!(e, IntegrateError::NonIntegrable { .. }), "{e:?}");
        let g = PointIntegrand::of_x(|x: f64| x.signum() * x.abs().powf(-0.5));
        let r = integrate_symmetric_check(&g, 0.0, &Brick::interval(-1.0, 1.0).unwrap(), 1e-6, &cfg()).unwrap();
        assert!(r.value.abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn one_gap() {
        let f = PointIntegrand::of_x(|x| if x < 0.5 { x.powf(-0.5) } else { 1.0 });
        let r = denjoy_extension(&f, &Brick::interval(0.0, 1.0).unwrap(), &[Gap { lo: 0.0, hi: 0.5 }], 1e-6, &cfg())
            .unwrap();
        assert!((r.value - (2f64.sqrt() + 0.5)).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn gaussian_and_sign() {
        let f = PointIntegrand::of_x(|x| (-x * x).exp());
        let r = integrate_infinite(&f, 1e-8, &cfg()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-6, "{r:?}");
        let s = PointIntegrand::of_x(|x| if x >= 0.0 { 1.0 } else { -1.0 });
        let e = integrate_infinite(&s, 1e-6, &cfg()).unwrap_err();
        assert!(matches!(e, IntegrateError::DivergentTail { .. }), "{e:?}");
    }
}
