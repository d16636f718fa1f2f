//! Least-squares fit of `V(t) = a * exp(-b t) + c` with `a, b, c >= 0`.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::money::ExtMoney;

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-9;

/// Days per month for converting dates to the fit's time axis.
pub const DAYS_PER_MONTH: f64 = 30.4375;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {index} is infinite; truncate the series to start at the first finite frontier value")]
    Infinite { index: usize },
    #[error("point {index} is not a finite number")]
    NotFinite { index: usize },
    #[error("all time points coincide")]
    ZeroSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub a: f64,
    /// Per month.
    pub b: f64,
    pub c: f64,
    /// Residual 2-norm relative to the 2-norm of the observations.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `ln 2 / b`; `None` unless converged with `b > 0`.
    pub half_life_months: Option<f64>,
}

impl DecayFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.a * (-self.b * t).exp() + self.c
    }
}

/// Months between two dates on the fixed 30.4375-day month.
pub fn months_between(from: chrono::NaiveDate, to: chrono::NaiveDate) -> f64 {
    (to - from).num_days() as f64 / DAYS_PER_MONTH
}

/// Fits a frontier-value series. INFINITY points are rejected.
pub fn fit_decay(series: &[(f64, ExtMoney)]) -> Result<DecayFit, FitError> {
    let mut points = Vec::with_capacity(series.len());
    for (index, (t, v)) in series.iter().enumerate() {
        match v {
            ExtMoney::Infinite => return Err(FitError::Infinite { index }),
            ExtMoney::Finite(m) => points.push((*t, m.to_f64())),
        }
    }
    fit_decay_f64(&points)
}

fn model(p: &Vector3<f64>, t: f64) -> f64 {
    p[0] * (-p[1] * t).exp() + p[2]
}

fn sum_squares(p: &Vector3<f64>, pts: &[(f64, f64)]) -> f64 {
    pts.iter().map(|&(t, y)| (model(p, t) - y).powi(2)).sum()
}

fn project(p: Vector3<f64>) -> Vector3<f64> {
    p.map(|x| x.max(0.0))
}

fn initial_guess(pts: &[(f64, f64)], t_span: f64) -> Vector3<f64> {
    let first = pts[0];
    let last = pts[pts.len() - 1];
    let c0 = pts
        .iter()
        .map(|p| p.1)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let a0 = (first.1 - c0).max(0.0);
    let eps = (1e-3 * a0.abs()).max(f64::MIN_POSITIVE);
    let b0 = ((a0.max(eps) / (last.1 - c0).max(eps)).ln() / t_span).max(0.0);
    // a is the amplitude at t = 0, not at the first sample
    Vector3::new(a0 * (b0 * first.0).exp(), b0, c0)
}

pub fn fit_decay_f64(series: &[(f64, f64)]) -> Result<DecayFit, FitError> {
    if series.len() < 4 {
        return Err(FitError::TooFewPoints(series.len()));
    }
    if let Some(index) = series
        .iter()
        .position(|(t, v)| !t.is_finite() || !v.is_finite())
    {
        return Err(FitError::NotFinite { index });
    }
    let mut pts = series.to_vec();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let t_span = pts[pts.len() - 1].0 - pts[0].0;
    if t_span <= 0.0 {
        return Err(FitError::ZeroSpan);
    }
    let y_norm = pts.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt();
    let relative = |ss: f64| {
        if y_norm > 0.0 {
            ss.sqrt() / y_norm
        } else {
            ss.sqrt()
        }
    };

    let mut p = initial_guess(&pts, t_span);
    let mut cost = sum_squares(&p, &pts);
    let mut lambda = 1e-3;
    let mut converged = cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for &(t, y) in &pts {
            let e = (-p[1] * t).exp();
            let j = Vector3::new(e, -p[0] * t * e, 1.0);
            let r = model(&p, t) - y;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let max_diag = jtj.diagonal().max();
        let mut damped = jtj;
        for i in 0..3 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12 * max_diag).max(f64::MIN_POSITIVE);
        }
        let Some(step) = damped.lu().solve(&(-jtr)) else {
            lambda *= 10.0;
            continue;
        };
        let candidate = project(p + step);
        let moved = (candidate - p).norm() / p.norm().max(f64::MIN_POSITIVE);
        let new_cost = sum_squares(&candidate, &pts);
        if new_cost < cost {
            p = candidate;
            cost = new_cost;
            lambda = (lambda / 10.0).max(1e-15);
            if moved < STEP_TOLERANCE || cost == 0.0 {
                converged = true;
            }
        } else {
            lambda *= 10.0;
            if moved < STEP_TOLERANCE {
                converged = true;
            }
        }
    }

    let half_life_months = (converged && p[1] > 0.0).then(|| std::f64::consts::LN_2 / p[1]);
    Ok(DecayFit {
        a: p[0],
        b: p[1],
        c: p[2],
        residual_norm: relative(cost),
        converged,
        iterations,
        half_life_months,
    })
}
