//! Exact empirical distribution objects.
//!
//! The quantile function is the left-continuous step inverse of the empirical
//! CDF and the Lorenz curve is the exact integral of that step function, so no
//! discretization happens at this level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An observed sample of outcomes for one population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
    label: String,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_label(values, "")
    }

    pub fn with_label(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Self {
            values,
            label: label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the first negative value, if any.
    pub fn first_negative(&self) -> Option<usize> {
        self.values.iter().position(|&v| v < 0.0)
    }
}

/// Matched observations `(X_i^1, X_i^2)` drawn jointly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pairs: Vec<(f64, f64)>,
}

impl PairedSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = pairs
            .iter()
            .position(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Self { pairs })
    }

    /// Zips two equally long coordinate lists.
    pub fn from_columns(first: &[f64], second: &[f64]) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::SchemeMismatch(format!(
                "matched pairs need equal lengths, got {} and {}",
                first.len(),
                second.len()
            )));
        }
        Self::new(first.iter().copied().zip(second.iter().copied()).collect())
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn first(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn second(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    Independent,
    MatchedPairs,
}

impl std::fmt::Display for SamplingScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplingScheme::Independent => f.write_str("independent"),
            SamplingScheme::MatchedPairs => f.write_str("matched"),
        }
    }
}

/// The two-population data set under one of the two sampling schemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TwoSampleData {
    Independent { first: Sample, second: Sample },
    Matched(PairedSample),
}

impl TwoSampleData {
    pub fn independent(first: Sample, second: Sample) -> Self {
        TwoSampleData::Independent { first, second }
    }

    pub fn scheme(&self) -> SamplingScheme {
        match self {
            TwoSampleData::Independent { .. } => SamplingScheme::Independent,
            TwoSampleData::Matched(_) => SamplingScheme::MatchedPairs,
        }
    }

    pub fn sizes(&self) -> (usize, usize) {
        match self {
            TwoSampleData::Independent { first, second } => (first.len(), second.len()),
            TwoSampleData::Matched(p) => (p.len(), p.len()),
        }
    }

    pub fn pairs(&self) -> Option<&PairedSample> {
        match self {
            TwoSampleData::Matched(p) => Some(p),
            TwoSampleData::Independent { .. } => None,
        }
    }

    /// The two marginal samples as plain value lists.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            TwoSampleData::Independent { first, second } => {
                (first.values().to_vec(), second.values().to_vec())
            }
            TwoSampleData::Matched(p) => (p.first(), p.second()),
        }
    }

    pub fn distributions(&self) -> Result<(EmpiricalDistribution, EmpiricalDistribution)> {
        let (a, b) = self.marginals();
        Ok((
            EmpiricalDistribution::from_values(a)?,
            EmpiricalDistribution::from_values(b)?,
        ))
    }

    /// First index (over both coordinates) holding a negative value.
    pub fn first_negative(&self) -> Option<usize> {
        let (a, b) = self.marginals();
        a.iter()
            .position(|&v| v < 0.0)
            .or_else(|| b.iter().position(|&v| v < 0.0))
    }
}

/// Sorted sample with prefix sums; answers CDF, quantile, and Lorenz queries
/// exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
    // prefix[k] = sum of the k smallest values
    prefix: Vec<f64>,
    mean: f64,
}

/// `ceil(x)` that treats values within a few ulps of an integer as that integer.
pub(crate) fn snapped_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

impl EmpiricalDistribution {
    pub fn new(sample: &Sample) -> Result<Self> {
        Self::from_values(sample.values().to_vec())
    }

    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self::from_sorted_unchecked(values))
    }

    /// Caller guarantees `sorted` is nonempty, finite, and ascending.
    pub(crate) fn from_sorted_unchecked(sorted: Vec<f64>) -> Self {
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &v in &sorted {
            acc += v;
            prefix.push(acc);
        }
        let mean = acc / sorted.len() as f64;
        Self {
            sorted,
            prefix,
            mean,
        }
    }

    pub(crate) fn into_sorted(self) -> Vec<f64> {
        self.sorted
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// `F̂(x)`: fraction of observations `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Step quantile `X_(ceil(np))`; `p = 0` returns the sample minimum.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let k = snapped_ceil(p.clamp(0.0, 1.0) * n as f64) as usize;
        self.sorted[k.clamp(1, n) - 1]
    }

    /// `∫₀^p Q̂(t) dt`, exact for the step quantile.
    pub fn partial_integral(&self, p: f64) -> f64 {
        let n = self.len();
        let np = p.clamp(0.0, 1.0) * n as f64;
        let k = (np.floor() as usize).min(n);
        let frac = np - k as f64;
        let tail = if k < n && frac > 0.0 {
            frac * self.sorted[k]
        } else {
            0.0
        };
        (self.prefix[k] + tail) / n as f64
    }

    /// Exact empirical Lorenz curve at `p`.
    pub fn lorenz(&self, p: f64) -> Result<f64> {
        if self.mean <= 0.0 {
            return Err(Error::ZeroMean(self.mean));
        }
        Ok(self.partial_integral(p) / self.mean)
    }

    /// Empirical CDF at every point of an ascending slice, by a linear merge.
    pub(crate) fn cdf_sorted_into(&self, xs: &[f64], out: &mut [f64]) {
        let n = self.len() as f64;
        let mut j = 0;
        for (x, o) in xs.iter().zip(out.iter_mut()) {
            while j < self.sorted.len() && self.sorted[j] <= *x {
                j += 1;
            }
            *o = j as f64 / n;
        }
    }
}

/// `F̂₁₂(x, x2)`: fraction of pairs with both coordinates at or below the
/// thresholds.
pub fn joint_ecdf(paired: &PairedSample, x: f64, x2: f64) -> f64 {
    let hits = paired
        .pairs()
        .iter()
        .filter(|(a, b)| *a <= x && *b <= x2)
        .count();
    hits as f64 / paired.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn builds_sorted_copy_with_mean() {
        let s = Sample::new(vec![3.0, 1.0]).unwrap();
        let d = EmpiricalDistribution::new(&s).unwrap();
        assert_eq!(d.sorted_values(), &[1.0, 3.0]);
        assert_eq!(d.mean(), 2.0);
        assert_eq!(s.values(), &[3.0, 1.0]);

        let d = dist(&[5.0]);
        assert_eq!(d.sorted_values(), &[5.0]);
        assert_eq!(d.mean(), 5.0);
    }

    #[test]
    fn empty_sample_is_rejected() {
        assert_eq!(Sample::new(vec![]), Err(Error::EmptySample));
        assert_eq!(
            EmpiricalDistribution::from_values(vec![]),
            Err(Error::EmptySample)
        );
    }

    #[test]
    fn quantile_examples() {
        let d = dist(&[1.0, 3.0]);
        assert_eq!(d.quantile(0.5), 1.0);
        assert_eq!(d.quantile(0.51), 3.0);
        assert_eq!(d.quantile(0.0), 1.0);
        assert_eq!(d.quantile(1.0), 3.0);

        // brute force: smallest x in the data with F̂(x) >= p
        let d = dist(&[2.0, 4.0, 6.0, 8.0]);
        let brute = |p: f64| {
            d.sorted_values()
                .iter()
                .copied()
                .find(|&x| d.cdf(x) >= p)
                .unwrap()
        };
        assert_eq!(brute(0.75), 6.0);
        assert_eq!(d.quantile(0.75), 6.0);
        for k in 1..100 {
            let p = k as f64 / 100.0;
            assert_eq!(d.quantile(p), brute(p), "p={p}");
        }
    }

    #[test]
    fn quantile_at_exact_multiples_is_not_pushed_up_by_rounding() {
        let d = dist(&(1..=10).map(f64::from).collect::<Vec<_>>());
        // 10 * 0.3 = 3.0000000000000004 in floating point
        assert_eq!(d.quantile(0.3), 3.0);
        assert_eq!(d.quantile(0.7), 7.0);
    }

    #[test]
    fn lorenz_examples() {
        let d = dist(&[1.0, 3.0]);
        assert!((d.lorenz(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(d.lorenz(1.0).unwrap(), 1.0);
        assert_eq!(d.lorenz(0.0).unwrap(), 0.0);

        let d = dist(&[4.2; 7]);
        assert!((d.lorenz(0.3).unwrap() - 0.3).abs() < 1e-12);

        let d = dist(&[0.0, 0.0]);
        assert!(matches!(d.lorenz(0.5), Err(Error::ZeroMean(_))));
    }

    #[test]
    fn lorenz_slopes_are_order_statistics_over_mean() {
        let d = dist(&[0.5, 1.0, 2.0, 7.0, 11.0]);
        let n = d.len() as f64;
        for k in 1..=d.len() {
            let a = (k as f64 - 0.8) / n;
            let b = (k as f64 - 0.2) / n;
            let slope = (d.lorenz(b).unwrap() - d.lorenz(a).unwrap()) / (b - a);
            assert!((slope - d.sorted_values()[k - 1] / d.mean()).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_integrates_to_mean() {
        let d = dist(&[0.3, 9.1, 2.2, 2.2, 5.0, 0.0]);
        let rel = (d.partial_integral(1.0) - d.mean()).abs() / d.mean();
        assert!(rel < 1e-12);
    }

    #[test]
    fn joint_ecdf_examples() {
        let p = PairedSample::new(vec![(1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert_eq!(joint_ecdf(&p, 1.5, 1.5), 0.5);
        assert_eq!(joint_ecdf(&p, f64::INFINITY, f64::INFINITY), 1.0);

        let p = PairedSample::new(vec![(1.0, 4.0), (2.0, 3.0), (3.0, 2.0)]).unwrap();
        // enumerate: (1,4) fails x2<=3, (2,3) passes, (3,2) fails x<=2
        assert!((joint_ecdf(&p, 2.0, 3.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn matched_columns_must_agree_in_length() {
        assert!(matches!(
            PairedSample::from_columns(&[1.0, 2.0], &[1.0]),
            Err(Error::SchemeMismatch(_))
        ));
    }

    #[test]
    fn cdf_merge_matches_pointwise() {
        let d = dist(&[0.2, 0.5, 0.5, 0.9]);
        let xs = [0.0, 0.2, 0.3, 0.5, 0.6, 1.0];
        let mut out = [0.0; 6];
        d.cdf_sorted_into(&xs, &mut out);
        for (x, o) in xs.iter().zip(out) {
            assert_eq!(o, d.cdf(*x));
        }
    }
}
