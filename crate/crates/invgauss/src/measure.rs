//! The inverse Gaussian measure substrate: γ₋₁ density, discrete L^p(γ₋₁)
//! norms and the weak-L¹ quasinorm on quadrature grids, the local region N_δ,
//! the admissibility function m(x), and the angle θ(x, y).
//!
//! Discretization contract: grid functionals compute the exact value for the
//! step function carried by the grid. In particular the weak-L¹ sup over
//! levels λ is evaluated through its left limits at the sampled |f_i|, which
//! equals the supremum over all λ > 0 for grid functions.

use std::f64::consts::PI;
use std::io::{Read, Write};

use thiserror::Error;

use crate::quad::GaussLegendre;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("grid must be non-empty")]
    EmptyGrid,
    #[error("points, values and weights must have equal lengths")]
    LengthMismatch,
    #[error("quadrature weights must be positive and finite")]
    BadWeight,
    #[error("points must share one dimension ≥ 1")]
    BadDimension,
    #[error("L^p norm requires p ≥ 1, got {0}")]
    ExponentRange(f64),
    #[error("non-finite value encountered (γ₋₁ weight overflow?)")]
    NonFinite,
    #[error("region parameter delta must be positive")]
    BadDelta,
    #[error("csv: {0}")]
    Csv(String),
}

/// Density of γ₋₁ with respect to Lebesgue measure: e^{|x|²}·π^{n/2}.
///
/// Total function; for |x|² beyond the `f64` exponent range the result
/// overflows to +∞, which callers treat as the overflow report.
pub fn gamma_minus1_density(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    r2.exp() * PI.powf(n / 2.0)
}

/// Local-region parameters for N_δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParams {
    pub delta: f64,
    pub n: usize,
}

impl RegionParams {
    pub fn new(delta: f64, n: usize) -> Result<Self, MeasureError> {
        if !(delta > 0.0) {
            return Err(MeasureError::BadDelta);
        }
        Ok(RegionParams { delta, n })
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Membership in the local region N_δ: |x−y| < nδ·min{1, 1/|x|}, with strict
/// inequality.
pub fn in_local_region(x: &[f64], y: &[f64], params: &RegionParams) -> bool {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    assert_eq!(x.len(), params.n, "dimension mismatch with RegionParams");
    let nx = norm2(x);
    let bound = params.n as f64 * params.delta * 1f64.min(1.0 / nx);
    dist(x, y) < bound
}

/// m(x) = min{1, 1/|x|²}; m(0) = 1.
pub fn m_admissibility(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    1f64.min(1.0 / r2)
}

/// Angle θ(x, y) ∈ [0, π] between x and y when both are nonzero and n > 1;
/// zero in every other case.
pub fn angle(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    if x.len() == 1 {
        return 0.0;
    }
    let nx = norm2(x);
    let ny = norm2(y);
    if nx == 0.0 || ny == 0.0 {
        return 0.0;
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (dot / (nx * ny)).clamp(-1.0, 1.0).acos()
}

/// A tensor quadrature grid in ℝⁿ (Lebesgue weights).
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl SpatialGrid {
    /// Tensor Gauss–Legendre grid on [−extent, extent]ⁿ. The default extent 6
    /// keeps e^{−|x|²}-type integrands below 1e−14 at the boundary.
    pub fn gauss_legendre(n: usize, extent: f64, nodes_per_axis: usize) -> Self {
        assert!(n >= 1 && extent > 0.0 && nodes_per_axis >= 1);
        let rule = GaussLegendre::new(nodes_per_axis);
        let (xs, ws) = rule.scaled_to(-extent, extent);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let p: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
            let w: f64 = idx.iter().map(|&i| ws[i]).product();
            points.push(p);
            weights.push(w);
            // odometer increment
            let mut axis = 0;
            loop {
                idx[axis] += 1;
                if idx[axis] < xs.len() {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
                if axis == n {
                    return SpatialGrid { points, weights, dim: n };
                }
            }
        }
    }

    /// A 1-D grid over an explicit interval.
    pub fn gauss_legendre_interval(a: f64, b: f64, nodes: usize) -> Self {
        let rule = GaussLegendre::new(nodes);
        let (xs, ws) = rule.scaled_to(a, b);
        SpatialGrid {
            points: xs.into_iter().map(|x| vec![x]).collect(),
            weights: ws,
            dim: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Spatial samples with positive Lebesgue quadrature weights, representing a
/// scalar function for L^p(γ₋₁) and weak-L¹ evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

impl GridFunction {
    pub fn new(
        points: Vec<Vec<f64>>,
        values: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if points.is_empty() {
            return Err(MeasureError::EmptyGrid);
        }
        if points.len() != values.len() || points.len() != weights.len() {
            return Err(MeasureError::LengthMismatch);
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(MeasureError::BadDimension);
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(MeasureError::BadWeight);
        }
        Ok(GridFunction { points, values, weights, dim })
    }

    /// Samples `f` on a grid.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(grid: &SpatialGrid, mut f: F) -> Self {
        let values = grid.points().iter().map(|p| f(p)).collect();
        GridFunction {
            points: grid.points().to_vec(),
            values,
            weights: grid.weights().to_vec(),
            dim: grid.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, MeasureError> {
        GridFunction::new(self.points.clone(), values, self.weights.clone())
    }

    /// Writes `x_1,…,x_n,value,weight` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MeasureError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x_{i}")).collect();
        header.push("value".into());
        header.push("weight".into());
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.points[i].iter().map(|v| v.to_string()).collect();
            rec.push(self.values[i].to_string());
            rec.push(self.weights[i].to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| MeasureError::Csv(e.to_string()))
    }

    /// Reads the schema produced by [`GridFunction::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self, MeasureError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(csv_err)?.clone();
        if header.len() < 3 {
            return Err(MeasureError::Csv("expected x_1..x_n,value,weight".into()));
        }
        let dim = header.len() - 2;
        let mut points = Vec::new();
        let mut values = Vec::new();
        let mut weights = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| MeasureError::Csv(format!("bad float {s:?}: {e}")))
            };
            let mut p = Vec::with_capacity(dim);
            for j in 0..dim {
                p.push(parse(&rec[j])?);
            }
            points.push(p);
            values.push(parse(&rec[dim])?);
            weights.push(parse(&rec[dim + 1])?);
        }
        GridFunction::new(points, values, weights)
    }
}

fn csv_err(e: csv::Error) -> MeasureError {
    MeasureError::Csv(e.to_string())
}

/// Discrete ‖f‖_{L^p(γ₋₁)} = (Σ_i w_i·γ₋₁(x_i)·|f_i|^p)^{1/p}, p ≥ 1.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64, MeasureError> {
    if !(p >= 1.0) {
        return Err(MeasureError::ExponentRange(p));
    }
    let mut acc = 0.0;
    for i in 0..f.len() {
        acc += f.weights[i] * gamma_minus1_density(&f.points[i]) * f.values[i].abs().powf(p);
    }
    if !acc.is_finite() {
        return Err(MeasureError::NonFinite);
    }
    Ok(acc.powf(1.0 / p))
}

/// Discrete L^{1,∞}(γ₋₁) quasinorm sup_λ λ·γ₋₁{|f| > λ}.
///
/// The sup is evaluated through its left limits at the sampled levels,
/// i.e. max over distinct ℓ ∈ {|f_i|} of ℓ·γ₋₁{|f| ≥ ℓ}, which is exact for
/// grid (step) functions.
pub fn weak_l1_quasinorm(f: &GridFunction) -> f64 {
    let masses: Vec<f64> = (0..f.len())
        .map(|i| f.weights[i] * gamma_minus1_density(&f.points[i]))
        .collect();
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f.values[b].abs().total_cmp(&f.values[a].abs()));
    let mut best: f64 = 0.0;
    let mut cum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let level = f.values[order[i]].abs();
        // absorb ties so cum = γ₋₁{|f| ≥ level}
        while i < order.len() && f.values[order[i]].abs() == level {
            cum += masses[order[i]];
            i += 1;
        }
        if level > 0.0 {
            best = best.max(level * cum);
        }
    }
    best
}
