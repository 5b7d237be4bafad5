//! Black-box holomorphic self-maps of ℍ^q: orbits, divergence-rate and step
//! estimates, a heuristic classifier, and two built-in example maps.
//!
//! Maps written on mixed half-plane/disc products are converted to ℍ^q by a
//! Cayley transform in each disc slot before they reach this module.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{cayley, cayley_inv, dist_poly, GeometryError, PointD, PointH, PolyPoint};
use crate::moebius::MoebiusH;
use crate::polyauto::{AutoKind, PolydiscAuto};
use crate::sampling;

/// Tolerance on increases of the step sequence.
pub const MONOTONE_TOL: f64 = 1e-9;
pub const DEFAULT_EPS_C: f64 = 1e-2;
pub const DEFAULT_EPS_FIX: f64 = 1e-6;
pub const DEFAULT_HORIZON: usize = 10_000;

const RANGE_CHECK_SAMPLES: usize = 16;
const DAMPED_ITERATIONS: usize = 2_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("map left the domain at iteration {step}: {source}")]
    Range { step: usize, source: GeometryError },
    #[error("map of dimension {map} applied to a point of dimension {point}")]
    Dimension { map: usize, point: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type MapFn = dyn Fn(&PolyPoint) -> Result<PolyPoint, GeometryError> + Send + Sync;

/// A self-map of ℍ^q given by an evaluation closure. Holomorphy is the
/// caller's contract; only the range is checked.
#[derive(Clone)]
pub struct HoloSelfMap {
    dim: usize,
    eval: Arc<MapFn>,
    description: Option<String>,
}

impl fmt::Debug for HoloSelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HoloSelfMap")
            .field("dim", &self.dim)
            .field("description", &self.description)
            .finish()
    }
}

impl HoloSelfMap {
    /// Registers `eval` after checking that it maps sample points of ℍ^dim
    /// into ℍ^dim.
    pub fn new<F>(dim: usize, eval: F, description: Option<String>) -> Result<Self, DynamicsError>
    where
        F: Fn(&PolyPoint) -> Result<PolyPoint, GeometryError> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(DynamicsError::Parameter(
                "dimension must be positive".into(),
            ));
        }
        let map = HoloSelfMap {
            dim,
            eval: Arc::new(eval),
            description,
        };
        for z in sampling::poly_points(dim, RANGE_CHECK_SAMPLES, 0) {
            map.eval(&z).map_err(|e| match e {
                DynamicsError::Geometry(source) => DynamicsError::Range { step: 0, source },
                other => other,
            })?;
        }
        Ok(map)
    }

    pub fn from_auto(tau: &PolydiscAuto) -> Self {
        let tau = tau.clone();
        HoloSelfMap {
            dim: tau.dim(),
            description: Some(format!("automorphism of H^{}", tau.dim())),
            eval: Arc::new(move |z: &PolyPoint| tau.apply(z)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    pub fn eval(&self, z: &PolyPoint) -> Result<PolyPoint, DynamicsError> {
        if z.dim() != self.dim {
            return Err(DynamicsError::Dimension {
                map: self.dim,
                point: z.dim(),
            });
        }
        let w = (self.eval)(z)?;
        if w.dim() != self.dim {
            return Err(DynamicsError::Dimension {
                map: self.dim,
                point: w.dim(),
            });
        }
        Ok(w)
    }
}

/// `[x, f(x), …, fⁿ(x)]`.
pub fn orbit(f: &HoloSelfMap, x: &PolyPoint, n: usize) -> Result<Vec<PolyPoint>, DynamicsError> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(x.clone());
    for step in 1..=n {
        let next = f
            .eval(out.last().expect("non-empty"))
            .map_err(|e| at_step(e, step))?;
        out.push(next);
    }
    Ok(out)
}

fn at_step(e: DynamicsError, step: usize) -> DynamicsError {
    match e {
        DynamicsError::Geometry(source) => DynamicsError::Range { step, source },
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDiagnostics {
    /// `(D(m) − D(m/2)) / (m − m/2)` with `D(n) = k(fⁿx, x)`.
    pub tail_slope: f64,
    /// Indices `n` with `step_seq[n+1] > step_seq[n] + 1e−9`.
    pub monotone_violations: Vec<usize>,
    pub step_non_increasing: bool,
    /// Largest increase of the step sequence between consecutive terms.
    pub max_step_increase: f64,
    /// First `n` at which a coordinate of `fⁿx` is flagged near the boundary.
    /// Later terms of `step_seq` may be limited by working precision.
    #[serde(default)]
    pub near_boundary_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitStats {
    pub base_point: PolyPoint,
    pub horizon: usize,
    /// `k(fⁿx, x)` for `n = 0, …, m`.
    pub dist_to_start: Vec<f64>,
    /// `k(fⁿx, fⁿ⁺¹x)` for `n = 0, …, m`.
    pub step_seq: Vec<f64>,
    /// `k(f^m x, x) / m`.
    pub c_estimate: f64,
    /// `k(f^m x, f^{m+1} x)`.
    pub s_estimate: f64,
    pub diagnostics: OrbitDiagnostics,
}

impl OrbitStats {
    /// Rows `n, dist_to_start, step`.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "dist_to_start", "step"])?;
        for (n, (d, s)) in self.dist_to_start.iter().zip(&self.step_seq).enumerate() {
            w.write_record([n.to_string(), d.to_string(), s.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Orbit statistics up to horizon `m`; both estimators read from them.
pub fn orbit_stats(f: &HoloSelfMap, x: &PolyPoint, m: usize) -> Result<OrbitStats, DynamicsError> {
    if m == 0 {
        return Err(DynamicsError::Parameter(
            "horizon must be at least 1".into(),
        ));
    }
    let mut dist_to_start = Vec::with_capacity(m + 1);
    let mut step_seq = Vec::with_capacity(m + 1);
    let mut near_boundary_from = None;
    let mut cur = x.clone();
    for n in 0..=m {
        if near_boundary_from.is_none() && cur.coords().iter().any(PointH::near_boundary) {
            near_boundary_from = Some(n);
        }
        dist_to_start.push(dist_poly(&cur, x)?);
        let next = f.eval(&cur).map_err(|e| at_step(e, n + 1))?;
        step_seq.push(dist_poly(&cur, &next)?);
        cur = next;
    }
    let half = m / 2;
    let tail_slope = (dist_to_start[m] - dist_to_start[half]) / (m - half) as f64;
    let increases: Vec<(usize, f64)> = step_seq
        .windows(2)
        .enumerate()
        .map(|(n, w)| (n, w[1] - w[0]))
        .collect();
    let monotone_violations: Vec<usize> = increases
        .iter()
        .filter(|(_, d)| *d > MONOTONE_TOL)
        .map(|(n, _)| *n)
        .collect();
    let max_step_increase = increases.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    Ok(OrbitStats {
        base_point: x.clone(),
        horizon: m,
        c_estimate: dist_to_start[m] / m as f64,
        s_estimate: step_seq[m],
        diagnostics: OrbitDiagnostics {
            tail_slope,
            step_non_increasing: monotone_violations.is_empty(),
            monotone_violations,
            max_step_increase,
            near_boundary_from,
        },
        dist_to_start,
        step_seq,
    })
}

/// `c(f) ≈ k(f^m x, x)/m`.
pub fn estimate_divergence_rate(
    f: &HoloSelfMap,
    x: &PolyPoint,
    m: usize,
) -> Result<OrbitStats, DynamicsError> {
    orbit_stats(f, x, m)
}

/// `s(x) ≈ k(f^m x, f^{m+1} x)`.
pub fn estimate_step(
    f: &HoloSelfMap,
    x: &PolyPoint,
    m: usize,
) -> Result<OrbitStats, DynamicsError> {
    orbit_stats(f, x, m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Base point; `(i, …, i)` when absent.
    pub x: Option<PolyPoint>,
    pub m: usize,
    pub eps_c: f64,
    pub eps_fix: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            x: None,
            m: DEFAULT_HORIZON,
            eps_c: DEFAULT_EPS_C,
            eps_fix: DEFAULT_EPS_FIX,
        }
    }
}

/// Outcome of [`classify_selfmap`]. Finite orbits cannot separate a small
/// positive divergence rate from zero, so the verdict is a heuristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfMapClassification {
    pub kind: AutoKind,
    pub heuristic: bool,
    pub c_estimate: f64,
    pub s_estimate: f64,
    pub tail_slope: f64,
    /// `k(f^m x, f^{m/2} x) < eps_fix`.
    pub orbit_converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<PolyPoint>,
    /// `c_estimate` within a factor 2 of `eps_c`, where the verdict is fragile.
    pub rate_near_threshold: bool,
    pub eps_c: f64,
    pub eps_fix: f64,
    pub horizon: usize,
}

pub fn classify_selfmap(
    f: &HoloSelfMap,
    opts: &ClassifyOptions,
) -> Result<SelfMapClassification, DynamicsError> {
    let x = opts.x.clone().unwrap_or_else(|| PolyPoint::center(f.dim()));
    let m = opts.m.max(2);
    let mut cur = x.clone();
    let mut mid = None;
    let mut dist_m = 0.0;
    let mut s_estimate = 0.0;
    for n in 1..=m {
        cur = f.eval(&cur).map_err(|e| at_step(e, n))?;
        if n == m / 2 {
            mid = Some(cur.clone());
        }
        if n == m {
            dist_m = dist_poly(&cur, &x)?;
            s_estimate = dist_poly(&cur, &f.eval(&cur).map_err(|e| at_step(e, n + 1))?)?;
        }
    }
    let mid = mid.expect("m ≥ 2");
    let c_estimate = dist_m / m as f64;
    let tail_slope = (dist_m - dist_poly(&mid, &x)?) / (m - m / 2) as f64;
    let orbit_converged = dist_poly(&cur, &mid)? < opts.eps_fix;
    let fixed_point = if orbit_converged {
        Some(cur.clone())
    } else if c_estimate > opts.eps_c {
        None
    } else {
        damped_fixed_point(f, &x, opts.eps_fix)
    };
    let kind = if c_estimate > opts.eps_c {
        AutoKind::Hyperbolic
    } else if fixed_point.is_some() {
        AutoKind::Elliptic
    } else {
        AutoKind::Parabolic
    };
    Ok(SelfMapClassification {
        kind,
        heuristic: true,
        c_estimate,
        s_estimate,
        tail_slope,
        orbit_converged,
        fixed_point,
        rate_near_threshold: c_estimate > 0.5 * opts.eps_c && c_estimate < 2.0 * opts.eps_c,
        eps_c: opts.eps_c,
        eps_fix: opts.eps_fix,
        horizon: m,
    })
}

/// Iterates `y ↦ (y + f(y))/2` coordinatewise and returns `y` once
/// `k(y, f(y)) < eps_fix`.
fn damped_fixed_point(f: &HoloSelfMap, x: &PolyPoint, eps_fix: f64) -> Option<PolyPoint> {
    let mut y = x.clone();
    for _ in 0..DAMPED_ITERATIONS {
        let fy = f.eval(&y).ok()?;
        if dist_poly(&y, &fy).ok()? < eps_fix {
            return Some(y);
        }
        let avg = y
            .coords()
            .iter()
            .zip(fy.coords())
            .map(|(a, b)| PointH::mean(&[*a, *b]))
            .collect::<Result<Vec<_>, _>>()
            .ok()?;
        y = PolyPoint::new(avg).ok()?;
    }
    None
}

/// `(z, w) ↦ (λz, (1 + w)/(3 − w))` on Δ², written on ℍ²: the first slot is
/// the rotation about `i` with multiplier `λ`, the second is `ζ ↦ ζ + i`.
pub fn builtin_intro_example(lambda: Complex64) -> Result<HoloSelfMap, DynamicsError> {
    if !lambda.re.is_finite() || !lambda.im.is_finite() || (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(DynamicsError::Parameter(format!(
            "lambda must have modulus 1, got {lambda}"
        )));
    }
    let rot = MoebiusH::rotation_about_i(-lambda.arg() / 2.0);
    let eval = move |z: &PolyPoint| -> Result<PolyPoint, GeometryError> {
        let first = rot.apply(z.coord(0))?;
        let second = PointH::new(z.coord(1).value() + Complex64::i())?;
        PolyPoint::new(vec![first, second])
    };
    HoloSelfMap::new(
        2,
        eval,
        Some(format!(
            "(z, w) -> (lambda z, (1 + w)/(3 - w)), lambda = {lambda}"
        )),
    )
}

/// Base point on ℍ² of a point of Δ² given in disc coordinates.
pub fn disc_base_point(w: &[Complex64]) -> Result<PolyPoint, GeometryError> {
    let coords = w
        .iter()
        .map(|&w| cayley_inv(&PointD::new(w)?))
        .collect::<Result<Vec<_>, _>>()?;
    PolyPoint::new(coords)
}

/// `(z, w) ↦ (e^{απ} z, (2 + w)/3 · exp(i log z))` on ℍ × Δ, written on ℍ²
/// through a Cayley transform of the second slot. `log` is the principal
/// branch, with imaginary part in `(0, π)` on ℍ. The map is hyperbolic for
/// every `α > 0`; irrational `α` is what makes its second slot wander.
pub fn builtin_remark5_example(alpha: f64) -> Result<HoloSelfMap, DynamicsError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(DynamicsError::Parameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let ln_factor = alpha * std::f64::consts::PI;
    let eval = move |z: &PolyPoint| -> Result<PolyPoint, GeometryError> {
        let (u, zeta) = (z.coord(0), z.coord(1));
        let first = u.dilate(ln_factor)?;
        let w = cayley(zeta)?.value();
        let phase = Complex64::new(-u.arg(), u.ln_abs()).exp();
        let w_next = PointD::new((w + 2.0) / 3.0 * phase)?;
        PolyPoint::new(vec![first, cayley_inv(&w_next)?])
    };
    HoloSelfMap::new(
        2,
        eval,
        Some(format!(
            "(z, w) -> (e^(alpha pi) z, (2 + w)/3 exp(i log z)), alpha = {alpha}"
        )),
    )
}
