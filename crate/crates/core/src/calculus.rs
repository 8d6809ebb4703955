//! Uniform midpoint grids, iterated integration operators, and the
//! positive/negative area maps.
//!
//! Every integral is a rectangle sum over the midpoint nodes
//! `p_k = lo + (k - 0.5) * step`. Cumulative integrals include the current
//! node, so `integrate_up` of a constant `c` at node `k` is `c * k * step`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    lo: f64,
    hi: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_GRID_POINTS,
            lo: 0.0,
            hi: 1.0,
        }
    }
}

impl GridSpec {
    pub fn new(n_points: usize, lo: f64, hi: f64) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidGrid(format!("bad domain [{lo}, {hi}]")));
        }
        Ok(Self { n_points, lo, hi })
    }

    /// Grid over the unit interval.
    pub fn unit(n_points: usize) -> Result<Self> {
        Self::new(n_points, 0.0, 1.0)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn is_unit(&self) -> bool {
        self.lo == 0.0 && self.hi == 1.0
    }

    /// Width of one cell, `(hi - lo) / n_points`.
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.n_points as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.node(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Upward,
    Downward,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Upward => f.write_str("up"),
            Direction::Downward => f.write_str("down"),
        }
    }
}

/// A real function tabulated on the nodes of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.n_points {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                spec.n_points,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite grid value".into()));
        }
        Ok(Self { spec, values })
    }

    pub(crate) fn from_raw(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.n_points);
        Self { spec, values }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(spec, spec.nodes().into_iter().map(f).collect())
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        Self::from_raw(spec, vec![c; spec.n_points])
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, 0.0)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_raw(self.spec, values))
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        Self::from_raw(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One pass of `g(p_k) = step * Σ_{j<=k} f(p_j)`, in place.
pub(crate) fn cumulate_up(values: &mut [f64], step: f64) {
    let mut acc = 0.0;
    for v in values.iter_mut() {
        acc += *v;
        *v = acc * step;
    }
}

/// One pass of `g(p_k) = step * Σ_{j>=k} f(p_j)`, in place.
pub(crate) fn cumulate_down(values: &mut [f64], step: f64) {
    let mut acc = 0.0;
    for v in values.iter_mut().rev() {
        acc += *v;
        *v = acc * step;
    }
}

/// Applies the degree-`m` operator in place: `m - 1` cumulative passes.
pub(crate) fn apply_operator(values: &mut [f64], step: f64, m: usize, direction: Direction) {
    for _ in 1..m {
        match direction {
            Direction::Upward => cumulate_up(values, step),
            Direction::Downward => cumulate_down(values, step),
        }
    }
}

/// `𝓘_m^u`: identity for `m = 1`, otherwise `m - 1` integrations from the
/// lower end of the domain.
pub fn integrate_up(f: &GridFunction, m: usize) -> GridFunction {
    integrate(f, m, Direction::Upward)
}

/// `𝓘_m^d`: identity for `m = 1`, otherwise `m - 1` integrations towards the
/// upper end of the domain.
pub fn integrate_down(f: &GridFunction, m: usize) -> GridFunction {
    integrate(f, m, Direction::Downward)
}

pub fn integrate(f: &GridFunction, m: usize, direction: Direction) -> GridFunction {
    let mut values = f.values.clone();
    apply_operator(&mut values, f.spec.step(), m, direction);
    GridFunction::from_raw(f.spec, values)
}

pub(crate) fn areas_of(values: &[f64], step: f64) -> (f64, f64) {
    let (mut pos, mut neg) = (0.0, 0.0);
    for &v in values {
        if v > 0.0 {
            pos += v;
        } else {
            neg -= v;
        }
    }
    (pos * step, neg * step)
}

/// `𝓕₁(f) = ∫ max{f, 0}`.
pub fn positive_area(f: &GridFunction) -> f64 {
    areas_of(&f.values, f.spec.step()).0
}

/// `𝓕₂(f) = ∫ max{-f, 0}`.
pub fn negative_area(f: &GridFunction) -> f64 {
    areas_of(&f.values, f.spec.step()).1
}

pub(crate) fn ratio_of(pos: f64, neg: f64) -> Result<f64> {
    let total = pos + neg;
    if total <= 0.0 {
        return Err(Error::DegenerateCurves);
    }
    Ok(pos / total)
}

/// `𝓕(f) = 𝓕₁(f) / (𝓕₁(f) + 𝓕₂(f))`.
pub fn area_ratio(f: &GridFunction) -> Result<f64> {
    let (pos, neg) = areas_of(&f.values, f.spec.step());
    ratio_of(pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn grid_spec_validation_and_nodes() {
        assert!(GridSpec::new(1, 0.0, 1.0).is_err());
        assert!(GridSpec::new(10, 1.0, 1.0).is_err());
        let g = GridSpec::unit(4).unwrap();
        assert_eq!(g.nodes(), vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(g.step(), 0.25);
        let g = GridSpec::new(2, 2.0, 4.0).unwrap();
        assert_eq!(g.nodes(), vec![2.5, 3.5]);
    }

    #[test]
    fn integrate_up_constant_is_rectangle_sum() {
        let spec = unit();
        let g = integrate_up(&GridFunction::constant(spec, 1.0), 2);
        for (p, v) in spec.nodes().iter().zip(g.values()) {
            assert!((v - p).abs() <= spec.step() / 2.0 + 1e-15);
        }
        assert_eq!(integrate_up(&GridFunction::constant(spec, 1.0), 1).values(), &[1.0; 1000]);
    }

    #[test]
    fn zero_stays_zero() {
        let z = GridFunction::zeros(unit());
        for m in 1..5 {
            assert!(integrate_up(&z, m).values().iter().all(|&v| v == 0.0));
            assert!(integrate_down(&z, m).values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn integrate_up_linear_three_times() {
        let spec = unit();
        let g = integrate_up(&GridFunction::from_fn(spec, |p| p), 3);
        for (p, v) in spec.nodes().iter().zip(g.values()) {
            assert!((v - p.powi(3) / 6.0).abs() <= 2.0 * spec.step());
        }
    }

    #[test]
    fn integrate_down_examples() {
        let spec = unit();
        let g = integrate_down(&GridFunction::constant(spec, 1.0), 2);
        for (p, v) in spec.nodes().iter().zip(g.values()) {
            assert!((v - (1.0 - p)).abs() <= spec.step() / 2.0 + 1e-15);
        }
        let g = integrate_down(&GridFunction::from_fn(spec, |p| p), 2);
        for (p, v) in spec.nodes().iter().zip(g.values()) {
            assert!((v - (1.0 - p * p) / 2.0).abs() <= spec.step());
        }
    }

    #[test]
    fn area_examples() {
        let spec = unit();
        let f = GridFunction::from_fn(spec, |p| p - 0.5);
        assert!((positive_area(&f) - 0.125).abs() <= spec.step());
        assert!((negative_area(&f) - 0.125).abs() <= spec.step());
        assert!((area_ratio(&f).unwrap() - 0.5).abs() < 1e-12);

        let f = GridFunction::constant(spec, -2.0);
        assert_eq!(positive_area(&f), 0.0);
        assert!((negative_area(&f) - 2.0).abs() < 1e-12);
        assert_eq!(area_ratio(&f).unwrap(), 0.0);

        let f = GridFunction::from_fn(spec, |p| (2.0 * std::f64::consts::PI * p).sin());
        assert!((positive_area(&f) - 1.0 / std::f64::consts::PI).abs() < 1e-3);
        assert!((negative_area(&f) - 1.0 / std::f64::consts::PI).abs() < 1e-3);

        // triangles of area 0.28125 and 0.03125
        let f = GridFunction::from_fn(spec, |p| p - 0.25);
        assert!((area_ratio(&f).unwrap() - 0.9).abs() < 1e-5);

        let f = GridFunction::from_fn(spec, |p| p * p);
        assert_eq!(area_ratio(&f).unwrap(), 1.0);
    }

    #[test]
    fn area_sum_is_absolute_integral() {
        let spec = unit();
        let f = GridFunction::from_fn(spec, |p| (7.0 * p).cos() - 0.2);
        let abs: f64 = f.values().iter().map(|v| v.abs()).sum::<f64>() * spec.step();
        assert!((positive_area(&f) + negative_area(&f) - abs).abs() < 1e-12);
    }

    #[test]
    fn zero_function_is_degenerate() {
        assert_eq!(
            area_ratio(&GridFunction::zeros(unit())),
            Err(Error::DegenerateCurves)
        );
    }

    #[test]
    fn mismatched_grids_do_not_combine() {
        let a = GridFunction::zeros(GridSpec::unit(10).unwrap());
        let b = GridFunction::zeros(GridSpec::unit(11).unwrap());
        assert_eq!(a.sub(&b), Err(Error::GridMismatch));
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let err = |n: usize| {
            let spec = GridSpec::unit(n).unwrap();
            let s: f64 = spec.nodes().iter().map(|p| p * p).sum::<f64>() * spec.step();
            (s - 1.0 / 3.0).abs()
        };
        for n in [10, 50, 100, 1000] {
            assert!(err(n) / err(2 * n) >= 3.0);
        }
    }

    #[test]
    fn nonfinite_values_rejected() {
        let spec = GridSpec::unit(2).unwrap();
        assert!(GridFunction::new(spec, vec![0.0, f64::NAN]).is_err());
        assert!(GridFunction::new(spec, vec![0.0]).is_err());
    }
}
