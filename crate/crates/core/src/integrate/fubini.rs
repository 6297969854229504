//! Double integrals over `I x J` against the two iterated integrals.

use std::sync::Mutex;

use serde::Serialize;

use super::driver::integrate;
use super::{IntegralResult, IntegrateConfig, IntegrateError, PointIntegrand};
use crate::brick::{Brick, Point};

/// The double integral and both iterated integrals of one integrand.
#[derive(Debug, Clone, Serialize)]
pub struct FubiniResult {
    pub double: Result<IntegralResult, String>,
    /// `int_I (int_J f dy) dx`.
    pub iterated_xy: Result<IntegralResult, String>,
    /// `int_J (int_I f dx) dy`.
    pub iterated_yx: Result<IntegralResult, String>,
    /// Outer tags at which the inner integral of `iterated_xy` failed.
    pub failed_x: Vec<Point>,
    /// Outer tags at which the inner integral of `iterated_yx` failed.
    pub failed_y: Vec<Point>,
}

impl FubiniResult {
    /// All three values exist and agree within `slack`.
    pub fn consistent(&self, slack: f64) -> bool {
        match (&self.double, &self.iterated_xy, &self.iterated_yx) {
            (Ok(d), Ok(a), Ok(b)) => (d.value - a.value).abs() <= slack && (d.value - b.value).abs() <= slack,
            _ => false,
        }
    }
}

fn join(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(x.len() + y.len());
    v.extend_from_slice(x);
    v.extend_from_slice(y);
    v
}

fn product(x: &Brick, y: &Brick) -> Result<Brick, IntegrateError> {
    Brick::new(&join(x.lower(), y.lower()), &join(x.upper(), y.upper()))
        .map_err(|e| IntegrateError::InvalidInput(e.to_string()))
}

/// Integrates `f(x, y)` over `x_domain x y_domain` directly and in both orders.
///
/// `f` takes the `x` coordinates followed by the `y` coordinates. Inner integrals run at
/// `tol / 4`; an outer tag whose inner integral fails is recorded and makes the outer
/// integral fail.
pub fn fubini(
    f: &PointIntegrand,
    x_domain: &Brick,
    y_domain: &Brick,
    tol: f64,
    cfg: &IntegrateConfig,
) -> Result<FubiniResult, IntegrateError> {
    let k = product(x_domain, y_domain)?;
    let double = integrate(f, &k, tol, cfg);
    let (xy, failed_x) = iterated(f, x_domain, y_domain, tol, cfg, |outer, inner| join(outer, inner));
    let (yx, failed_y) = iterated(f, y_domain, x_domain, tol, cfg, |outer, inner| join(inner, outer));
    Ok(FubiniResult {
        double: double.map_err(|e| e.to_string()),
        iterated_xy: xy.map_err(|e| e.to_string()),
        iterated_yx: yx.map_err(|e| e.to_string()),
        failed_x,
        failed_y,
    })
}

fn iterated<J>(
    f: &PointIntegrand,
    outer: &Brick,
    inner: &Brick,
    tol: f64,
    cfg: &IntegrateConfig,
    arrange: J,
) -> (Result<IntegralResult, IntegrateError>, Vec<Point>)
where
    J: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + Clone + 'static,
{
    let failed = std::sync::Arc::new(Mutex::new(Vec::new()));
    let (f2, inner2, cfg2, failed2) = (f.clone(), inner.clone(), cfg.clone(), failed.clone());
    let g = PointIntegrand::new(move |x: &[f64]| {
        let xs = x.to_vec();
        let arr = arrange.clone();
        let f3 = f2.clone();
        let h = PointIntegrand::new(move |y: &[f64]| f3.eval(&arr(&xs, y)));
        match integrate(&h, &inner2, tol / 4.0, &cfg2) {
            Ok(r) if r.converged() => r.value,
            _ => {
                failed2.lock().unwrap().push(Point::new(x));
                f64::NAN
            }
        }
    });
    let r = integrate(&g, outer, tol / 2.0, cfg);
    let mut v = std::mem::take(&mut *failed.lock().unwrap());
    v.sort_by(|a, b| a.coords().partial_cmp(b.coords()).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup();
    (r, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_coordinates() {
        let f = PointIntegrand::new(|p: &[f64]| p[0] * p[1]);
        let u = Brick::interval(0.0, 1.0).unwrap();
        let r = fubini(&f, &u, &u, 1e-9, &IntegrateConfig::gauss()).unwrap();
        assert!(r.consistent(3e-8), "{r:?}");
        assert!((r.double.unwrap().value - 0.25).abs() < 3e-8);
    }

    #[test]
    fn iterated_orders_disagree() {
        let f = PointIntegrand::new(|p: &[f64]| (p[0] - p[1]) / (p[0] + p[1]).powi(3))
            .with_singular_points(vec![Point::new(&[0.0, 0.0])]);
        let u = Brick::interval(0.0, 1.0).unwrap();
        let r = fubini(&f, &u, &u, 1e-6, &IntegrateConfig::gauss()).unwrap();
        assert!((r.iterated_xy.as_ref().unwrap().value - 0.5).abs() < 1e-5, "{r:?}");
        assert!((r.iterated_yx.as_ref().unwrap().value + 0.5).abs() < 1e-5, "{r:?}");
        assert!(r.double.is_err(), "{r:?}");
    }
}
