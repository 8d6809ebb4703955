//! Data-generating processes, population coefficients, and the Monte Carlo
//! driver that reports Mean / Bias / SE / RMSE / coverage.

use rand::distributions::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{apply_operator, areas_of, ratio_of, Direction, GridSpec};
use crate::coefficients::{DominanceFamily, FamilyKind};
use crate::empirical::{PairedSample, Sample, SamplingScheme, TwoSampleData};
use crate::error::{Error, Result};
use crate::inference::{bootstrap_ci, InferenceConfig};
use crate::rng::{derive_seed, stream_rng};

/// Default node count for population coefficients.
pub const ORACLE_RESOLUTION: usize = 100_000;

/// Double Pareto law with scale 1: Pareto-type tails on both sides of 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublePareto {
    alpha: f64,
    beta: f64,
}

impl DoublePareto {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "double Pareto needs positive finite parameters, got ({alpha}, {beta})"
            )));
        }
        if alpha <= 2.0 {
            log::warn!("dP({alpha}, {beta}) has an infinite variance; asymptotics may not apply");
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Probability mass below 1.
    fn junction(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn density(&self, x: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let k = a * b / (a + b);
        if x <= 0.0 {
            0.0
        } else if x < 1.0 {
            k * x.powf(b - 1.0)
        } else {
            k * x.powf(-a - 1.0)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        if x <= 0.0 {
            0.0
        } else if x < 1.0 {
            a / (a + b) * x.powf(b)
        } else {
            1.0 - b / (a + b) * x.powf(-a)
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::DomainError(p));
        }
        Ok(self.quantile_unchecked(p))
    }

    fn quantile_unchecked(&self, p: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        if p < self.junction() {
            (p * (a + b) / a).powf(1.0 / b)
        } else {
            ((1.0 - p) * (a + b) / b).powf(-1.0 / a)
        }
    }

    /// `∫₀^p Q(t) dt` in closed form. Infinite at `p = 1` when `α <= 1`.
    pub fn partial_integral(&self, p: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let p0 = self.junction();
        let lower = |p: f64| {
            let k = (a + b) / a;
            k.powf(1.0 / b) * p.powf(1.0 + 1.0 / b) / (1.0 + 1.0 / b)
        };
        if p <= p0 {
            return lower(p.max(0.0));
        }
        let c = (a + b) / b;
        let e = 1.0 - 1.0 / a;
        let upper = if e.abs() < 1e-12 {
            c.powf(-1.0 / a) * ((1.0 - p0).ln() - (1.0 - p).ln())
        } else {
            c.powf(-1.0 / a) * ((1.0 - p0).powf(e) - (1.0 - p.min(1.0)).powf(e)) / e
        };
        lower(p0) + upper
    }

    pub fn mean(&self) -> f64 {
        self.partial_integral(1.0)
    }
}

/// Finitely many atoms with positive probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLaw {
    // ascending in value
    atoms: Vec<(f64, f64)>,
}

impl DiscreteLaw {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidConfig("a discrete law needs at least one atom".into()));
        }
        if atoms.iter().any(|&(v, p)| !v.is_finite() || !(p > 0.0)) {
            return Err(Error::InvalidConfig(
                "atoms need finite values and positive probabilities".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "atom probabilities sum to {total}, not 1"
            )));
        }
        atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, q) in &self.atoms {
            acc += q;
            if acc >= p - 1e-12 {
                return v;
            }
        }
        self.atoms[self.atoms.len() - 1].0
    }

    pub fn partial_integral(&self, p: f64) -> f64 {
        let mut left = p.clamp(0.0, 1.0);
        let mut acc = 0.0;
        for &(v, q) in &self.atoms {
            let take = q.min(left);
            acc += take * v;
            left -= take;
            if left <= 0.0 {
                break;
            }
        }
        acc
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(v, p) in &self.atoms {
            acc += p;
            if u < acc {
                return v;
            }
        }
        self.atoms[self.atoms.len() - 1].0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Dgp {
    DoublePareto(DoublePareto),
    Discrete(DiscreteLaw),
}

impl Dgp {
    pub fn double_pareto(alpha: f64, beta: f64) -> Result<Self> {
        DoublePareto::new(alpha, beta).map(Dgp::DoublePareto)
    }

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        DiscreteLaw::new(atoms).map(Dgp::Discrete)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Dgp::DoublePareto(d) => d.cdf(x),
            Dgp::Discrete(d) => d.cdf(x),
        }
    }

    pub fn partial_integral(&self, p: f64) -> f64 {
        match self {
            Dgp::DoublePareto(d) => d.partial_integral(p),
            Dgp::Discrete(d) => d.partial_integral(p),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Dgp::DoublePareto(d) => d.mean(),
            Dgp::Discrete(d) => d.mean(),
        }
    }

    /// Smallest and largest atom for discrete laws; `None` when unbounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Dgp::DoublePareto(_) => None,
            Dgp::Discrete(d) => Some((d.atoms[0].0, d.atoms[d.atoms.len() - 1].0)),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Dgp::DoublePareto(d) => d.quantile_unchecked(rng.sample(Open01)),
            Dgp::Discrete(d) => d.draw(rng),
        }
    }
}

pub fn sample_dgp<R: Rng>(dgp: &Dgp, n: usize, rng: &mut R) -> Result<Sample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Sample::new((0..n).map(|_| dgp.draw(rng)).collect())
}

/// Pairs with independently drawn coordinates.
pub fn sample_pairs<R: Rng>(dgp1: &Dgp, dgp2: &Dgp, n: usize, rng: &mut R) -> Result<PairedSample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    PairedSample::new((0..n).map(|_| (dgp1.draw(rng), dgp2.draw(rng))).collect())
}

pub fn sample_data<R: Rng>(
    dgp1: &Dgp,
    dgp2: &Dgp,
    scheme: SamplingScheme,
    sizes: (usize, usize),
    rng: &mut R,
) -> Result<TwoSampleData> {
    match scheme {
        SamplingScheme::Independent => Ok(TwoSampleData::independent(
            sample_dgp(dgp1, sizes.0, rng)?,
            sample_dgp(dgp2, sizes.1, rng)?,
        )),
        SamplingScheme::MatchedPairs => {
            if sizes.0 != sizes.1 {
                return Err(Error::SchemeMismatch(format!(
                    "matched pairs need equal sizes, got {} and {}",
                    sizes.0, sizes.1
                )));
            }
            sample_pairs(dgp1, dgp2, sizes.0, rng).map(TwoSampleData::Matched)
        }
    }
}

/// Grid for population coefficients: the unit interval for Lorenz and
/// inverse-SD families, the pooled support hull for SD.
pub fn oracle_grid(
    dgp1: &Dgp,
    dgp2: &Dgp,
    family: &DominanceFamily,
    resolution: usize,
) -> Result<GridSpec> {
    match family.kind() {
        FamilyKind::Sd => match (dgp1.support(), dgp2.support()) {
            (Some(a), Some(b)) => GridSpec::new(resolution, a.0.min(b.0), a.1.max(b.1)),
            _ => Err(Error::InvalidConfig(
                "SD coefficients need a bounded domain; pass an explicit grid".into(),
            )),
        },
        _ => GridSpec::unit(resolution),
    }
}

/// Population coefficient from the analytic curves of the two laws on `spec`.
///
/// For first-degree SD between two discrete laws the step CDFs are
/// integrated exactly instead.
pub fn population_coefficient(
    dgp1: &Dgp,
    dgp2: &Dgp,
    family: &DominanceFamily,
    spec: &GridSpec,
) -> Result<f64> {
    if let (FamilyKind::Sd, 1, Dgp::Discrete(a), Dgp::Discrete(b)) =
        (family.kind(), family.degree(), dgp1, dgp2)
    {
        return exact_sd_coefficient(a, b, spec.domain());
    }
    family.check_grid(spec)?;
    let nodes = spec.nodes();
    let base = |d: &Dgp| -> Result<Vec<f64>> {
        Ok(match family.kind() {
            FamilyKind::Lorenz => {
                let mu = d.mean();
                if !(mu > 0.0 && mu.is_finite()) {
                    return Err(Error::ZeroMean(mu));
                }
                nodes.iter().map(|&p| d.partial_integral(p) / mu).collect()
            }
            FamilyKind::InverseSd => nodes.iter().map(|&p| d.partial_integral(p)).collect(),
            FamilyKind::Sd => nodes.iter().map(|&x| d.cdf(x)).collect(),
        })
    };
    let b1 = base(dgp1)?;
    let b2 = base(dgp2)?;
    let mut phi: Vec<f64> = match family.kind() {
        FamilyKind::Sd => b1.iter().zip(&b2).map(|(a, b)| a - b).collect(),
        _ => b1.iter().zip(&b2).map(|(a, b)| b - a).collect(),
    };
    apply_operator(
        &mut phi,
        spec.step(),
        family.operator_degree(),
        family.direction(),
    );
    let (pos, neg) = areas_of(&phi, spec.step());
    ratio_of(pos, neg)
}

/// First-degree SD coefficient of two discrete laws over `[lo, hi]`, from
/// the exact piecewise-constant CDF difference.
pub fn exact_sd_coefficient(d1: &DiscreteLaw, d2: &DiscreteLaw, domain: (f64, f64)) -> Result<f64> {
    let (lo, hi) = domain;
    let mut cuts: Vec<f64> = d1
        .atoms
        .iter()
        .chain(&d2.atoms)
        .map(|a| a.0)
        .filter(|&v| v > lo && v < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (mut pos, mut neg) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let diff = d1.cdf(w[0]) - d2.cdf(w[0]);
        let area = diff * (w[1] - w[0]);
        if area > 0.0 {
            pos += area;
        } else {
            neg -= area;
        }
    }
    ratio_of(pos, neg)
}

/// The two-point laws with a closed-form first-degree SD coefficient
/// `3 / (5β − 3)`: `X¹ ∈ {0.25, 1}` with `P(0.25) = 1/β`, and
/// `X² ∈ {0.5, 0.75}` with probabilities 2/3 and 1/3.
pub fn two_point_laws(beta: f64) -> Result<(Dgp, Dgp)> {
    if !(beta > 1.0) {
        return Err(Error::InvalidConfig(format!("beta must exceed 1, got {beta}")));
    }
    Ok((
        Dgp::discrete(vec![(0.25, 1.0 / beta), (1.0, 1.0 - 1.0 / beta)])?,
        Dgp::discrete(vec![(0.5, 2.0 / 3.0), (0.75, 1.0 / 3.0)])?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloStudy {
    pub dgp1: Dgp,
    pub dgp2: Dgp,
    pub family: DominanceFamily,
    pub scheme: SamplingScheme,
    pub sizes: (usize, usize),
    pub spec: GridSpec,
    pub cfg: InferenceConfig,
    pub n_reps: usize,
    pub true_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub mean: f64,
    pub bias: f64,
    pub se: f64,
    pub rmse: f64,
    pub cr: f64,
    pub t_n: f64,
    pub true_c: f64,
    pub n_reps: usize,
    pub estimates: Vec<f64>,
    pub intervals: Vec<(f64, f64)>,
}

impl MonteCarloReport {
    fn from_runs(estimates: Vec<f64>, intervals: Vec<(f64, f64)>, true_c: f64, t_n: f64) -> Self {
        let r = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / r;
        let se = (estimates.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / r).sqrt();
        let rmse = (estimates.iter().map(|c| (c - true_c).powi(2)).sum::<f64>() / r).sqrt();
        let covered = intervals
            .iter()
            .filter(|(lo, hi)| *lo <= true_c && true_c <= *hi)
            .count();
        Self {
            mean,
            bias: mean - true_c,
            se,
            rmse,
            cr: covered as f64 / r,
            t_n,
            true_c,
            n_reps: estimates.len(),
            estimates,
            intervals,
        }
    }
}

/// Runs `n_reps` independent data sets through estimation and the bootstrap.
/// Replicate `r` depends only on the study seed and `r`.
pub fn monte_carlo(study: &MonteCarloStudy) -> Result<MonteCarloReport> {
    if study.n_reps == 0 {
        return Err(Error::InvalidConfig("n_reps must be at least 1".into()));
    }
    study.cfg.validate()?;
    let runs: Vec<Result<(f64, (f64, f64))>> = (0..study.n_reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(study.cfg.seed, rep as u64);
            let mut rng = stream_rng(rep_seed, 0);
            let data = sample_data(&study.dgp1, &study.dgp2, study.scheme, study.sizes, &mut rng)?;
            let cfg = study.cfg.with_seed(derive_seed(rep_seed, 1));
            let res = bootstrap_ci(&data, &study.family, &study.spec, &cfg)?;
            Ok((res.estimate.c_hat, res.ci))
        })
        .collect();
    let mut estimates = Vec::with_capacity(study.n_reps);
    let mut intervals = Vec::with_capacity(study.n_reps);
    for r in runs {
        let (c, ci) = r?;
        estimates.push(c);
        intervals.push(ci);
    }
    Ok(MonteCarloReport::from_runs(
        estimates,
        intervals,
        study.true_c,
        study.cfg.t_n,
    ))
}

/// A named simulation design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub dgp1: Dgp,
    pub dgp2: Dgp,
    pub family: DominanceFamily,
    /// Grid for estimation; for SD designs this spans the atom hull.
    pub spec: GridSpec,
}

pub const PRESET_NAMES: [&str; 12] = [
    "ldc-a", "ldc-b", "ldc-c", "ldc-d", "uisdc-a", "uisdc-b", "uisdc-c", "uisdc-d", "sdc-a",
    "sdc-b", "sdc-c", "sdc-d",
];

pub fn preset(name: &str) -> Result<Preset> {
    let (group, letter) = name
        .split_once('-')
        .ok_or_else(|| Error::InvalidConfig(format!("unknown preset '{name}'")))?;
    let idx = match letter {
        "a" => 0,
        "b" => 1,
        "c" => 2,
        "d" => 3,
        _ => return Err(Error::InvalidConfig(format!("unknown preset '{name}'"))),
    };
    let (dgp1, dgp2, family, spec) = match group {
        "ldc" => (
            Dgp::double_pareto(3.0, 1.5)?,
            Dgp::double_pareto(2.1, [2.0, 3.0, 4.0, 5.0][idx])?,
            DominanceFamily::lorenz(1, Direction::Upward)?,
            GridSpec::default(),
        ),
        "uisdc" => (
            Dgp::double_pareto(2.1, 1.5)?,
            Dgp::double_pareto(200.0, [2.2, 2.3, 2.4, 2.5][idx])?,
            DominanceFamily::inverse_sd(3, Direction::Upward)?,
            GridSpec::default(),
        ),
        "sdc" => {
            let (a, b) = two_point_laws([8.0, 6.0, 4.0, 2.0][idx])?;
            (a, b, DominanceFamily::sd(1)?, GridSpec::new(1000, 0.25, 1.0)?)
        }
        _ => return Err(Error::InvalidConfig(format!("unknown preset '{name}'"))),
    };
    Ok(Preset {
        name: name.to_string(),
        dgp1,
        dgp2,
        family,
        spec,
    })
}

impl Preset {
    /// Population coefficient of the design at the default oracle resolution.
    pub fn true_coefficient(&self) -> Result<f64> {
        let spec = match self.family.kind() {
            FamilyKind::Sd => self.spec,
            _ => GridSpec::unit(ORACLE_RESOLUTION)?,
        };
        population_coefficient(&self.dgp1, &self.dgp2, &self.family, &spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let (fa, fb, fc) = (f(a), f(b), f(c));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
        adaptive(f, a, b, fa, fb, fc, whole, tol, depth)
    }

    #[allow(clippy::too_many_arguments)]
    fn adaptive(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fb: f64,
        fc: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let c = 0.5 * (a + b);
        let (d, e) = (0.5 * (a + c), 0.5 * (c + b));
        let (fd, fe) = (f(d), f(e));
        let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
        let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        adaptive(f, a, c, fa, fc, fd, left, tol / 2.0, depth - 1)
            + adaptive(f, c, b, fc, fb, fe, right, tol / 2.0, depth - 1)
    }

    #[test]
    fn cdf_matches_integrated_density() {
        for (a, b) in [(3.0, 1.5), (2.1, 2.0), (200.0, 2.5), (2.1, 1.5)] {
            let d = DoublePareto::new(a, b).unwrap();
            for x in [0.1f64, 0.5, 0.99, 1.0, 1.3, 2.0, 5.0] {
                let f = |t: f64| d.density(t);
                let mut integral = simpson(&f, 0.0, x.min(1.0), 1e-13, 50);
                if x > 1.0 {
                    integral += simpson(&f, 1.0, x, 1e-13, 50);
                }
                assert!((integral - d.cdf(x)).abs() < 1e-10, "dP({a},{b}) at {x}");
            }
        }
    }

    #[test]
    fn quantile_examples() {
        let d = DoublePareto::new(3.0, 1.5).unwrap();
        assert!((d.quantile(2.0 / 3.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(d.quantile(0.0), Err(Error::DomainError(0.0)));
        assert_eq!(d.quantile(1.0), Err(Error::DomainError(1.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ps: Vec<f64> = (0..100).map(|_| rng.sample(Open01)).collect();
        for &p in &ps {
            assert!((d.cdf(d.quantile(p).unwrap()) - p).abs() < 1e-10);
        }
        ps.sort_by(f64::total_cmp);
        for w in ps.windows(2) {
            assert!(d.quantile(w[0]).unwrap() < d.quantile(w[1]).unwrap());
        }
    }

    #[test]
    fn partial_integral_matches_quadrature() {
        let d = DoublePareto::new(2.1, 2.2).unwrap();
        let q = |t: f64| d.quantile_unchecked(t);
        for p in [0.1, 0.4, 0.6, 0.9, 0.999] {
            let p0 = d.junction();
            let num = if p <= p0 {
                simpson(&q, 0.0, p, 1e-13, 50)
            } else {
                simpson(&q, 0.0, p0, 1e-13, 50) + simpson(&q, p0, p, 1e-13, 50)
            };
            assert!((num - d.partial_integral(p)).abs() < 1e-9, "p={p}");
        }
        // mean = αβ / ((α-1)(β+1)) for scale 1
        let (a, b) = (3.0, 1.5);
        let d = DoublePareto::new(a, b).unwrap();
        assert!((d.mean() - a * b / ((a - 1.0) * (b + 1.0))).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_seeded_and_matches_law() {
        let point = Dgp::discrete(vec![(5.0, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_dgp(&point, 3, &mut rng).unwrap().values(), &[5.0, 5.0, 5.0]);

        let dgp = Dgp::double_pareto(3.0, 1.5).unwrap();
        let a = sample_dgp(&dgp, 50, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = sample_dgp(&dgp, 50, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_two_point_coefficients() {
        for beta in [2.0, 4.0, 6.0, 8.0] {
            let (a, b) = two_point_laws(beta).unwrap();
            let fam = DominanceFamily::sd(1).unwrap();
            let spec = oracle_grid(&a, &b, &fam, 1000).unwrap();
            let c = population_coefficient(&a, &b, &fam, &spec).unwrap();
            assert!((c - 3.0 / (5.0 * beta - 3.0)).abs() < 1e-12, "beta={beta}");
        }
    }

    #[test]
    fn grid_sd_converges_to_exact_value() {
        let (a, b) = two_point_laws(4.0).unwrap();
        let fam = DominanceFamily::sd(1).unwrap();
        let spec = GridSpec::new(100_000, 0.0, 1.0).unwrap();
        // force the grid route by going through the generic machinery
        let nodes = spec.nodes();
        let phi: Vec<f64> = nodes.iter().map(|&x| a.cdf(x) - b.cdf(x)).collect();
        let (pos, neg) = areas_of(&phi, spec.step());
        let grid = ratio_of(pos, neg).unwrap();
        let exact = population_coefficient(&a, &b, &fam, &spec).unwrap();
        assert!((grid - exact).abs() < 1e-6);
    }

    #[test]
    fn population_complement() {
        let a = Dgp::double_pareto(3.0, 1.5).unwrap();
        let b = Dgp::double_pareto(2.1, 3.0).unwrap();
        let fam = DominanceFamily::lorenz(1, Direction::Upward).unwrap();
        let spec = GridSpec::unit(20_000).unwrap();
        let ab = population_coefficient(&a, &b, &fam, &spec).unwrap();
        let ba = population_coefficient(&b, &a, &fam, &spec).unwrap();
        assert!((ab + ba - 1.0).abs() < 1e-6);
    }

    #[test]
    fn report_identities_and_single_rep() {
        let est = vec![0.1, 0.3, 0.25, 0.4];
        let ci = vec![(0.0, 0.2), (0.2, 0.5), (0.3, 0.4), (0.1, 0.6)];
        let r = MonteCarloReport::from_runs(est, ci, 0.22, 1.0);
        assert!((r.rmse.powi(2) - (r.bias.powi(2) + r.se.powi(2))).abs() < 1e-9);
        assert_eq!(r.cr, 0.5);

        let (a, b) = two_point_laws(2.0).unwrap();
        let p = preset("sdc-d").unwrap();
        let study = MonteCarloStudy {
            dgp1: a,
            dgp2: b,
            family: p.family,
            scheme: SamplingScheme::MatchedPairs,
            sizes: (60, 60),
            spec: p.spec,
            cfg: InferenceConfig::new(0.001).with_boot(50).with_seed(5),
            n_reps: 1,
            true_c: 3.0 / 7.0,
        };
        let one = monte_carlo(&study).unwrap();
        assert_eq!(one.mean, one.estimates[0]);
        assert!(one.cr == 0.0 || one.cr == 1.0);
        assert_eq!(one.se, 0.0);
    }

    #[test]
    fn presets_resolve() {
        for name in PRESET_NAMES {
            preset(name).unwrap();
        }
        assert!(preset("ldc-e").is_err());
        assert!(preset("xyz").is_err());
        let c = preset("sdc-c").unwrap().true_coefficient().unwrap();
        assert!((c - 3.0 / 17.0).abs() < 1e-12);
    }
}
