//! Contact sets, the estimated directional derivative of the area-ratio map,
//! the bootstrap confidence interval, and data-driven choice of `t_n`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{areas_of, GridFunction, GridSpec};
use crate::coefficients::{base_curve_into, difference_into, CoefficientEstimate, DominanceFamily};
use crate::covariance::sigma_hat_from;
use crate::empirical::{
    snapped_ceil, EmpiricalDistribution, PairedSample, Sample, TwoSampleData,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    pub t_n: f64,
    pub xi0: f64,
    pub n_boot: usize,
    pub alpha: f64,
    pub clamp_to_unit: bool,
    pub seed: u64,
    /// Drop degenerate bootstrap replicates instead of failing.
    pub skip_degenerate: bool,
}

impl InferenceConfig {
    pub fn new(t_n: f64) -> Self {
        Self {
            t_n,
            xi0: 0.001,
            n_boot: 1000,
            alpha: 0.05,
            clamp_to_unit: true,
            seed: 0,
            skip_degenerate: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_boot(mut self, n_boot: usize) -> Self {
        self.n_boot = n_boot;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.t_n > 0.0 && self.t_n.is_finite()) {
            return bad(format!("t_n must be positive, got {}", self.t_n));
        }
        if !(self.xi0 > 0.0 && self.xi0.is_finite()) {
            return bad(format!("xi0 must be positive, got {}", self.xi0));
        }
        if self.n_boot == 0 {
            return bad("n_boot must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return bad(format!("alpha must lie in (0, 0.5), got {}", self.alpha));
        }
        Ok(())
    }
}

/// Grid masks for `B̂₊(φ)`, `B̂₊(−φ)` and `B̂₀(φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactSets {
    pub b_plus: Vec<bool>,
    pub b_minus: Vec<bool>,
    pub b_zero: Vec<bool>,
    pub t_n: f64,
    pub xi0: f64,
}

impl ContactSets {
    pub fn len(&self) -> usize {
        self.b_zero.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_zero.is_empty()
    }
}

/// Classifies each node by its studentized value `√T φ̂ / (ξ₀ ∨ σ̂)`.
pub fn contact_sets(
    phi_hat: &GridFunction,
    sigma_hat: &GridFunction,
    t_big: f64,
    cfg: &InferenceConfig,
) -> Result<ContactSets> {
    if phi_hat.spec() != sigma_hat.spec() {
        return Err(Error::GridMismatch);
    }
    if !(t_big > 0.0) {
        return Err(Error::InvalidConfig(format!("T_n must be positive, got {t_big}")));
    }
    let root = t_big.sqrt();
    let n = phi_hat.len();
    let mut sets = ContactSets {
        b_plus: vec![false; n],
        b_minus: vec![false; n],
        b_zero: vec![false; n],
        t_n: cfg.t_n,
        xi0: cfg.xi0,
    };
    for (k, (&phi, &sigma)) in phi_hat.values().iter().zip(sigma_hat.values()).enumerate() {
        let z = root * phi / sigma.max(cfg.xi0);
        if z > cfg.t_n {
            sets.b_plus[k] = true;
        } else if z < -cfg.t_n {
            sets.b_minus[k] = true;
        } else {
            sets.b_zero[k] = true;
        }
    }
    Ok(sets)
}

fn derivative_raw(h: &[f64], sets: &ContactSets, pos: f64, neg: f64, step: f64) -> f64 {
    let (mut d1, mut d2) = (0.0, 0.0);
    for (k, &v) in h.iter().enumerate() {
        if sets.b_plus[k] {
            d1 += v;
        } else if sets.b_minus[k] {
            d2 -= v;
        } else {
            d1 += v.max(0.0);
            d2 += (-v).max(0.0);
        }
    }
    let total = pos + neg;
    (d1 * step * neg - pos * d2 * step) / (total * total)
}

/// Estimated directional derivative `𝓕̂′_φ(h)` on fixed contact sets.
pub fn derivative(h: &GridFunction, sets: &ContactSets, phi_hat: &GridFunction) -> Result<f64> {
    if h.spec() != phi_hat.spec() || sets.len() != h.len() {
        return Err(Error::GridMismatch);
    }
    let step = phi_hat.spec().step();
    let (pos, neg) = areas_of(phi_hat.values(), step);
    if pos + neg <= 0.0 {
        return Err(Error::DegenerateCurves);
    }
    Ok(derivative_raw(h.values(), sets, pos, neg, step))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub estimate: CoefficientEstimate,
    pub sigma: GridFunction,
    pub sets: ContactSets,
    pub draws: Vec<f64>,
    pub q_lo: f64,
    pub q_hi: f64,
    pub ci: (f64, f64),
    pub n_boot_effective: usize,
    pub seed: u64,
    /// The point estimate is exactly 0 or 1, where the interval has no
    /// asymptotic guarantee.
    pub boundary: bool,
}

/// Draws bootstrap samples from the data under its sampling scheme.
pub(crate) enum Resampler<'a> {
    Independent(&'a [f64], &'a [f64]),
    Matched(&'a [(f64, f64)]),
}

impl<'a> Resampler<'a> {
    pub(crate) fn new(data: &'a TwoSampleData) -> Self {
        match data {
            TwoSampleData::Independent { first, second } => {
                Resampler::Independent(first.values(), second.values())
            }
            TwoSampleData::Matched(p) => Resampler::Matched(p.pairs()),
        }
    }

    /// Fills the two marginal buffers and sorts them.
    pub(crate) fn marginals_into(&self, rng: &mut ChaCha8Rng, a: &mut Vec<f64>, b: &mut Vec<f64>) {
        a.clear();
        b.clear();
        match self {
            Resampler::Independent(x, y) => {
                a.extend((0..x.len()).map(|_| x[rng.gen_range(0..x.len())]));
                b.extend((0..y.len()).map(|_| y[rng.gen_range(0..y.len())]));
            }
            Resampler::Matched(p) => {
                for _ in 0..p.len() {
                    let (u, v) = p[rng.gen_range(0..p.len())];
                    a.push(u);
                    b.push(v);
                }
            }
        }
        a.sort_unstable_by(f64::total_cmp);
        b.sort_unstable_by(f64::total_cmp);
    }

    /// A full resampled data set at the original sizes.
    pub(crate) fn dataset(&self, rng: &mut ChaCha8Rng) -> Result<TwoSampleData> {
        Ok(match self {
            Resampler::Independent(x, y) => TwoSampleData::independent(
                Sample::new((0..x.len()).map(|_| x[rng.gen_range(0..x.len())]).collect())?,
                Sample::new((0..y.len()).map(|_| y[rng.gen_range(0..y.len())]).collect())?,
            ),
            Resampler::Matched(p) => TwoSampleData::Matched(PairedSample::new(
                (0..p.len()).map(|_| p[rng.gen_range(0..p.len())]).collect(),
            )?),
        })
    }
}

/// Everything computed once from the original sample.
pub(crate) struct Fitted {
    pub estimate: CoefficientEstimate,
    pub sigma: GridFunction,
}

pub(crate) fn fit(
    data: &TwoSampleData,
    family: &DominanceFamily,
    spec: &GridSpec,
) -> Result<Fitted> {
    let (d1, d2) = data.distributions()?;
    let estimate = crate::coefficients::coefficient(family, &d1, &d2, spec)?;
    let sigma = sigma_hat_from(family, &d1, &d2, data.pairs(), data.scheme(), spec)?;
    Ok(Fitted { estimate, sigma })
}

/// Bootstrap fluctuations `√T(φ̂* − φ̂)`, one per replicate, in replicate
/// order. Replicate `b` uses stream `b` of `seed`.
pub(crate) fn fluctuations(
    data: &TwoSampleData,
    family: &DominanceFamily,
    phi_hat: &GridFunction,
    t_big: f64,
    n_boot: usize,
    seed: u64,
    skip_degenerate: bool,
) -> Result<Vec<Vec<f64>>> {
    let spec = *phi_hat.spec();
    let nodes = spec.nodes();
    let step = spec.step();
    let root = t_big.sqrt();
    let resampler = Resampler::new(data);
    let results: Vec<Result<Option<Vec<f64>>>> = (0..n_boot)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(a, b), rep| {
                let mut rng = stream_rng(seed, rep as u64);
                resampler.marginals_into(&mut rng, a, b);
                let d1 = EmpiricalDistribution::from_sorted_unchecked(std::mem::take(a));
                let d2 = EmpiricalDistribution::from_sorted_unchecked(std::mem::take(b));
                let mut h = vec![0.0; nodes.len()];
                let mut other = vec![0.0; nodes.len()];
                let built = base_curve_into(family.kind(), &d1, &nodes, &mut h)
                    .and_then(|_| base_curve_into(family.kind(), &d2, &nodes, &mut other));
                *a = d1.into_sorted();
                *b = d2.into_sorted();
                if let Err(e) = built {
                    return if skip_degenerate {
                        Ok(None)
                    } else {
                        Err(Error::NonFiniteDraw {
                            replicate: rep,
                            reason: e.to_string(),
                        })
                    };
                }
                difference_into(family, &mut h, &other, step);
                for (v, p) in h.iter_mut().zip(phi_hat.values()) {
                    *v = root * (*v - p);
                }
                Ok(Some(h))
            },
        )
        .collect();
    let mut out = Vec::with_capacity(n_boot);
    for r in results {
        if let Some(h) = r? {
            out.push(h);
        }
    }
    Ok(out)
}

/// Inf-type empirical quantile of already sorted draws: the `⌈βB⌉`-th
/// smallest.
pub fn sorted_quantile(sorted: &[f64], beta: f64) -> f64 {
    let n = sorted.len();
    let k = snapped_ceil(beta * n as f64) as usize;
    sorted[k.clamp(1, n) - 1]
}

/// Turns draws into quantiles and the interval.
pub(crate) fn interval(
    estimate: &CoefficientEstimate,
    draws: &[f64],
    cfg: &InferenceConfig,
) -> (f64, f64, (f64, f64)) {
    let mut sorted = draws.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let q_lo = sorted_quantile(&sorted, cfg.alpha / 2.0);
    let q_hi = sorted_quantile(&sorted, 1.0 - cfg.alpha / 2.0);
    let root = estimate.t_n.sqrt();
    let mut lo = estimate.c_hat - q_hi / root;
    let mut hi = estimate.c_hat - q_lo / root;
    if cfg.clamp_to_unit {
        lo = lo.clamp(0.0, 1.0);
        hi = hi.clamp(0.0, 1.0);
    }
    (q_lo, q_hi, (lo, hi))
}

fn draws_from(
    hs: &[Vec<f64>],
    sets: &ContactSets,
    estimate: &CoefficientEstimate,
) -> Result<Vec<f64>> {
    let step = estimate.phi.spec().step();
    hs.iter()
        .enumerate()
        .map(|(rep, h)| {
            let d = derivative_raw(h, sets, estimate.pos_area, estimate.neg_area, step);
            if d.is_finite() {
                Ok(d)
            } else {
                Err(Error::NonFiniteDraw {
                    replicate: rep,
                    reason: format!("derivative evaluated to {d}"),
                })
            }
        })
        .collect()
}

/// Point estimate plus bootstrap confidence interval.
pub fn bootstrap_ci(
    data: &TwoSampleData,
    family: &DominanceFamily,
    spec: &GridSpec,
    cfg: &InferenceConfig,
) -> Result<BootstrapResult> {
    cfg.validate()?;
    let Fitted { estimate, sigma } = fit(data, family, spec)?;
    let sets = contact_sets(&estimate.phi, &sigma, estimate.t_n, cfg)?;
    let hs = fluctuations(
        data,
        family,
        &estimate.phi,
        estimate.t_n,
        cfg.n_boot,
        cfg.seed,
        cfg.skip_degenerate,
    )?;
    if hs.is_empty() {
        return Err(Error::NonFiniteDraw {
            replicate: 0,
            reason: "every bootstrap replicate was degenerate".into(),
        });
    }
    let draws = draws_from(&hs, &sets, &estimate)?;
    let (q_lo, q_hi, ci) = interval(&estimate, &draws, cfg);
    let boundary = estimate.on_boundary();
    Ok(BootstrapResult {
        n_boot_effective: draws.len(),
        estimate,
        sigma,
        sets,
        draws,
        q_lo,
        q_hi,
        ci,
        seed: cfg.seed,
        boundary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub selected: f64,
    /// `(t_n, coverage)` for each candidate, ascending in `t_n`.
    pub coverage: Vec<(f64, f64)>,
    /// Coefficient of the empirical distributions, the truth being covered.
    pub pseudo_true: f64,
}

/// Chooses `t_n` by treating the empirical distributions as the truth.
///
/// Each calibration replicate resamples a data set at the original sizes,
/// bootstraps it once, and evaluates every candidate on the same bootstrap
/// fluctuations. The candidate whose coverage of the pseudo-true coefficient
/// is closest to `1 − α` wins; ties go to the smallest `t_n`.
pub fn select_tuning(
    data: &TwoSampleData,
    family: &DominanceFamily,
    spec: &GridSpec,
    cfg: &InferenceConfig,
    candidates: &[f64],
    n_cal_reps: usize,
    n_cal_boot: usize,
) -> Result<TuningReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no tuning candidates given".into()));
    }
    if n_cal_reps == 0 || n_cal_boot == 0 {
        return Err(Error::InvalidConfig(
            "calibration needs at least one replicate and one bootstrap draw".into(),
        ));
    }
    let mut cands = candidates.to_vec();
    cands.sort_unstable_by(f64::total_cmp);
    cands.dedup();
    for &t in &cands {
        InferenceConfig { t_n: t, ..*cfg }.validate()?;
    }
    let (d1, d2) = data.distributions()?;
    let pseudo_true = crate::coefficients::coefficient(family, &d1, &d2, spec)?.c_hat;
    let resampler = Resampler::new(data);

    let hits: Vec<Result<Vec<bool>>> = (0..n_cal_reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(cfg.seed, rep as u64);
            let mut rng = stream_rng(rep_seed, 0);
            let sim = resampler.dataset(&mut rng)?;
            let Fitted { estimate, sigma } = fit(&sim, family, spec)?;
            let hs = fluctuations(
                &sim,
                family,
                &estimate.phi,
                estimate.t_n,
                n_cal_boot,
                derive_seed(rep_seed, 1),
                cfg.skip_degenerate,
            )?;
            cands
                .iter()
                .map(|&t| {
                    let c = InferenceConfig { t_n: t, ..*cfg };
                    let sets = contact_sets(&estimate.phi, &sigma, estimate.t_n, &c)?;
                    let draws = draws_from(&hs, &sets, &estimate)?;
                    let (_, _, (lo, hi)) = interval(&estimate, &draws, &c);
                    Ok(lo <= pseudo_true && pseudo_true <= hi)
                })
                .collect()
        })
        .collect();

    let mut counts = vec![0usize; cands.len()];
    for h in hits {
        for (c, hit) in counts.iter_mut().zip(h?) {
            *c += hit as usize;
        }
    }
    let target = 1.0 - cfg.alpha;
    let coverage: Vec<(f64, f64)> = cands
        .iter()
        .zip(&counts)
        .map(|(&t, &c)| (t, c as f64 / n_cal_reps as f64))
        .collect();
    let mut best = 0;
    for (i, &(_, cr)) in coverage.iter().enumerate() {
        if (cr - target).abs() < (coverage[best].1 - target).abs() {
            best = i;
        }
    }
    Ok(TuningReport {
        selected: coverage[best].0,
        coverage,
        pseudo_true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Direction;

    fn unit() -> GridSpec {
        GridSpec::default()
    }

    fn cfg(t_n: f64) -> InferenceConfig {
        InferenceConfig::new(t_n)
    }

    #[test]
    fn contact_set_examples() {
        let spec = unit();
        let zero = GridFunction::zeros(spec);
        let sets = contact_sets(&zero, &zero, 100.0, &cfg(1.0)).unwrap();
        assert!(sets.b_zero.iter().all(|&z| z));

        let one = GridFunction::constant(spec, 1.0);
        let sets = contact_sets(&one, &one, 1e4, &cfg(10.0)).unwrap();
        assert!(sets.b_plus.iter().all(|&z| z));

        let line = GridFunction::from_fn(spec, |p| p - 0.5);
        let sets = contact_sets(&line, &zero, 1.0, &cfg(100.0)).unwrap();
        for (k, p) in spec.nodes().into_iter().enumerate() {
            // stay clear of the two boundary nodes where rounding decides
            if ((p - 0.5).abs() - 0.1).abs() < 1e-9 {
                continue;
            }
            assert_eq!(sets.b_zero[k], (p - 0.5).abs() <= 0.1, "p={p}");
            assert_eq!(sets.b_plus[k], p > 0.6);
            assert_eq!(sets.b_minus[k], p < 0.4);
        }
    }

    #[test]
    fn contact_sets_require_matching_grids() {
        let a = GridFunction::zeros(GridSpec::unit(10).unwrap());
        let b = GridFunction::zeros(GridSpec::unit(11).unwrap());
        assert_eq!(contact_sets(&a, &b, 1.0, &cfg(1.0)), Err(Error::GridMismatch));
    }

    #[test]
    fn derivative_examples() {
        let spec = GridSpec::unit(10).unwrap();
        // positive area 0.3, negative 0.1
        let phi = GridFunction::new(
            spec,
            vec![0.6, 0.6, 0.6, 0.6, 0.6, -0.2, -0.2, -0.2, -0.2, -0.2],
        )
        .unwrap();
        let all_plus = ContactSets {
            b_plus: vec![true; 10],
            b_minus: vec![false; 10],
            b_zero: vec![false; 10],
            t_n: 1.0,
            xi0: 0.001,
        };
        let d = derivative(&GridFunction::constant(spec, 1.0), &all_plus, &phi).unwrap();
        assert!((d - 0.625).abs() < 1e-12);
        assert_eq!(derivative(&GridFunction::zeros(spec), &all_plus, &phi).unwrap(), 0.0);
        assert_eq!(
            derivative(&GridFunction::zeros(spec), &all_plus, &GridFunction::zeros(spec)),
            Err(Error::DegenerateCurves)
        );
    }

    #[test]
    fn quantile_is_inf_type() {
        let s: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(sorted_quantile(&s, 0.025), 1.0);
        assert_eq!(sorted_quantile(&s, 0.5), 5.0);
        assert_eq!(sorted_quantile(&s, 0.975), 10.0);
        assert_eq!(sorted_quantile(&s, 0.3), 3.0);
    }

    fn small_data() -> TwoSampleData {
        TwoSampleData::independent(
            Sample::new(vec![1.0, 2.0, 2.5, 4.0, 7.0, 3.0, 0.5, 1.5]).unwrap(),
            Sample::new(vec![0.2, 3.0, 5.5, 1.0, 9.0, 0.7, 2.2]).unwrap(),
        )
    }

    #[test]
    fn bootstrap_is_deterministic_and_ordered() {
        let fam = DominanceFamily::lorenz(1, Direction::Upward).unwrap();
        let c = cfg(0.5).with_boot(200).with_seed(17);
        let a = bootstrap_ci(&small_data(), &fam, &unit(), &c).unwrap();
        let b = bootstrap_ci(&small_data(), &fam, &unit(), &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_boot_effective, 200);
        assert!(a.q_lo <= a.q_hi);
        assert!(0.0 <= a.ci.0 && a.ci.0 <= a.ci.1 && a.ci.1 <= 1.0);
        let other = bootstrap_ci(&small_data(), &fam, &unit(), &c.with_seed(18)).unwrap();
        assert_ne!(a.draws, other.draws);
    }

    #[test]
    fn zero_mean_resamples_fail_unless_skipped() {
        let data = TwoSampleData::independent(
            Sample::new(vec![0.0, 0.0, 1.0]).unwrap(),
            Sample::new(vec![1.0, 2.0, 3.0]).unwrap(),
        );
        let fam = DominanceFamily::lorenz(1, Direction::Upward).unwrap();
        let c = cfg(0.5).with_boot(300).with_seed(1);
        assert!(matches!(
            bootstrap_ci(&data, &fam, &unit(), &c),
            Err(Error::NonFiniteDraw { .. })
        ));
        let skipped = bootstrap_ci(
            &data,
            &fam,
            &unit(),
            &InferenceConfig {
                skip_degenerate: true,
                ..c
            },
        )
        .unwrap();
        assert!(skipped.n_boot_effective < 300 && skipped.n_boot_effective > 0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let fam = DominanceFamily::lorenz(1, Direction::Upward).unwrap();
        for c in [
            cfg(0.0),
            InferenceConfig { alpha: 0.5, ..cfg(1.0) },
            InferenceConfig { n_boot: 0, ..cfg(1.0) },
            InferenceConfig { xi0: 0.0, ..cfg(1.0) },
        ] {
            assert!(matches!(
                bootstrap_ci(&small_data(), &fam, &unit(), &c),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn tuning_edge_cases() {
        let fam = DominanceFamily::lorenz(1, Direction::Upward).unwrap();
        let c = cfg(1.0).with_seed(3);
        let r = select_tuning(&small_data(), &fam, &unit(), &c, &[0.7], 5, 20).unwrap();
        assert_eq!(r.selected, 0.7);
        assert!(matches!(
            select_tuning(&small_data(), &fam, &unit(), &c, &[0.7], 0, 20),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            select_tuning(&small_data(), &fam, &unit(), &c, &[], 5, 20),
            Err(Error::InvalidConfig(_))
        ));
    }
}
