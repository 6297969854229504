//! Stieltjes sums `f(P) (g(v) - g(u))` and integration by parts.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::driver::{integrate_interval, Detailed};
use super::{chunked_sum, IntegralResult, IntegrateConfig, IntegrateError, IntervalIntegrand, PointIntegrand};
use crate::brick::{Brick, Point, TaggedDivision};
use crate::division::TagRule;

/// An integrator `g` on the line, with the points where it may jump.
///
/// Jump points become forced tags: every brick that contains one is tagged there.
#[derive(Clone)]
pub struct StieltjesWeight {
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    jumps: Vec<f64>,
}

impl fmt::Debug for StieltjesWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StieltjesWeight").field("jumps", &self.jumps).finish()
    }
}

impl StieltjesWeight {
    pub fn new<G>(g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        StieltjesWeight { g: Arc::new(g), jumps: Vec::new() }
    }

    pub fn with_jumps(mut self, jumps: Vec<f64>) -> Self {
        self.jumps = jumps;
        self
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    /// `g(v) - g(u)` on `[u, v]`.
    pub fn increment(&self, b: &Brick) -> f64 {
        (self.g)(b.upper()[0]) - (self.g)(b.lower()[0])
    }

    pub fn as_integrand(&self) -> PointIntegrand {
        let g = self.g.clone();
        PointIntegrand::of_x(move |x| g(x))
    }
}

fn check_line(domain: &Brick) -> Result<(), IntegrateError> {
    if domain.dim() == 1 {
        Ok(())
    } else {
        Err(IntegrateError::InvalidInput(format!("Stieltjes integrals need a 1-dimensional domain, got {}", domain.dim())))
    }
}

/// Tags at brick ends only; no random candidates.
fn endpoint_config(cfg: &IntegrateConfig) -> IntegrateConfig {
    let mut c = cfg.clone();
    c.builder.tag_rule = TagRule::SplitCenter;
    c.builder.rng_seed = None;
    c
}

fn forced(points: &[f64]) -> Vec<Point> {
    let mut v: Vec<f64> = points.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.into_iter().map(Point::from).collect()
}

fn stieltjes_detailed(
    f: &PointIntegrand,
    w: &StieltjesWeight,
    domain: &Brick,
    tol: f64,
    cfg: &IntegrateConfig,
    extra: &[f64],
) -> Result<Detailed, IntegrateError> {
    check_line(domain)?;
    let (f2, w2) = (f.clone(), w.clone());
    let h = IntervalIntegrand::new(move |p, j| {
        let dg = w2.increment(j);
        if dg == 0.0 {
            0.0
        } else {
            f2.eval(p) * dg
        }
    });
    let pts: Vec<f64> = w.jumps.iter().chain(extra).copied().collect();
    integrate_interval(&h, domain, tol, &endpoint_config(cfg), &forced(&pts))
}

/// `int f dg` over an interval.
pub fn integrate_stieltjes(
    f: &PointIntegrand,
    w: &StieltjesWeight,
    domain: &Brick,
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<IntegralResult, IntegrateError> {
    stieltjes_detailed(f, w, domain, tol, cfg, &[]).map(|d| d.result)
}

/// Both Stieltjes integrals of a pair and the terms of the by-parts identity.
#[derive(Debug, Clone, Serialize)]
pub struct ByParts {
    /// `int f dg`.
    pub f_dg: Result<IntegralResult, String>,
    /// `int g df`.
    pub g_df: Result<IntegralResult, String>,
    /// `f(b) g(b) - f(a) g(a)`.
    pub boundary: f64,
    /// `sum |df dg|` over the last division of `int f dg`.
    pub residual: f64,
    /// `int f dg + int g df - boundary`, when both integrals exist.
    pub defect: Option<f64>,
    /// `|defect| <= 3 tol`.
    pub identity_holds: bool,
}

/// Integration by parts: `int f dg + int g df = f(b) g(b) - f(a) g(a)` when the variation
/// of `df dg` vanishes.
pub fn by_parts(
    f: &StieltjesWeight,
    g: &StieltjesWeight,
    domain: &Brick,
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<ByParts, IntegrateError> {
    check_line(domain)?;
    let (a, b) = (domain.lower()[0], domain.upper()[0]);
    let boundary = f.eval(b) * g.eval(b) - f.eval(a) * g.eval(a);
    let fdg = stieltjes_detailed(&f.as_integrand(), g, domain, tol, cfg, f.jumps());
    let gdf = stieltjes_detailed(&g.as_integrand(), f, domain, tol, cfg, g.jumps()).map(|d| d.result);
    let residual = match &fdg {
        Ok(d) => residual_on(&d.division, f, g),
        Err(_) => f64::NAN,
    };
    let fdg = fdg.map(|d| d.result);
    let defect = match (&fdg, &gdf) {
        (Ok(x), Ok(y)) => Some(x.value + y.value - boundary),
        _ => None,
    };
    Ok(ByParts {
        identity_holds: defect.is_some_and(|d| d.abs() <= 3.0 * tol),
        f_dg: fdg.map_err(|e| e.to_string()),
        g_df: gdf.map_err(|e| e.to_string()),
        boundary,
        residual,
        defect,
    })
}

fn residual_on(d: &TaggedDivision, f: &StieltjesWeight, g: &StieltjesWeight) -> f64 {
    let terms: Vec<f64> = d.items.iter().map(|t| (f.increment(&t.brick) * g.increment(&t.brick)).abs()).collect();
    chunked_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Brick {
        Brick::interval(a, b).unwrap()
    }

    #[test]
    fn identity_weight_is_lebesgue() {
        let r = integrate_stieltjes(
            &PointIntegrand::of_x(|x| x),
            &StieltjesWeight::new(|x| x),
            &iv(0.0, 1.0),
            1e-9,
            &IntegrateConfig::default(),
        )
        .unwrap();
        assert!((r.value - 0.5).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn indicator_pair() {
        let big_f = StieltjesWeight::new(|x| if x <= 0.0 { 1.0 } else { 0.0 }).with_jumps(vec![0.0]);
        let big_g = StieltjesWeight::new(|x| if x <= 0.0 { 0.0 } else { 1.0 }).with_jumps(vec![0.0]);
        let bp = by_parts(&big_f, &big_g, &iv(-1.0, 1.0), 1e-9, &IntegrateConfig::default()).unwrap();
        assert_eq!(bp.f_dg.as_ref().unwrap().value, 1.0);
        assert_eq!(bp.g_df.as_ref().unwrap().value, 0.0);
        assert_eq!(bp.boundary, 0.0);
        assert_eq!(bp.residual, 1.0);
        assert!(!bp.identity_holds);
    }

    #[test]
    fn smooth_pair() {
        let f = StieltjesWeight::new(|x| x);
        let g = StieltjesWeight::new(|x| x * x);
        let bp = by_parts(&f, &g, &iv(0.0, 1.0), 1e-8, &IntegrateConfig::default()).unwrap();
        assert!((bp.f_dg.as_ref().unwrap().value - 2.0 / 3.0).abs() < 1e-8);
        assert!((bp.g_df.as_ref().unwrap().value - 1.0 / 3.0).abs() < 1e-8);
        assert!(bp.identity_holds, "{bp:?}");
    }
}
