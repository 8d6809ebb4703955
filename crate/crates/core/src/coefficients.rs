//! Difference curves and dominance coefficients for the three families, plus
//! rank-dependent inequality and welfare measures.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{apply_operator, areas_of, ratio_of, Direction, GridFunction, GridSpec};
use crate::empirical::EmpiricalDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Lorenz curves and their upward/downward iterated integrals.
    Lorenz,
    /// Iterated integrals of the quantile function (`Λ^m`, `Λ̃^m`).
    InverseSd,
    /// Iterated integrals of the CDF on a bounded domain.
    Sd,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Lorenz => "lorenz",
            FamilyKind::InverseSd => "isd",
            FamilyKind::Sd => "sd",
        })
    }
}

/// Which coefficient to compute: family, degree, and direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DominanceFamily {
    kind: FamilyKind,
    degree: usize,
    direction: Direction,
}

impl DominanceFamily {
    pub fn new(kind: FamilyKind, degree: usize, direction: Direction) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidFamilyDegree(format!("{kind} m={degree}: {msg}")));
        match kind {
            FamilyKind::Lorenz if degree < 1 => return bad("degree must be at least 1"),
            FamilyKind::InverseSd if degree < 2 => return bad("degree must be at least 2"),
            FamilyKind::InverseSd if degree == 2 && direction == Direction::Downward => {
                return bad("degree 2 (generalized Lorenz) is upward only")
            }
            FamilyKind::Sd if degree < 1 => return bad("degree must be at least 1"),
            _ => {}
        }
        // Directions that cannot matter are normalized so equal families compare equal.
        let direction = match kind {
            FamilyKind::Sd => Direction::Upward,
            FamilyKind::Lorenz if degree == 1 => Direction::Upward,
            _ => direction,
        };
        Ok(Self {
            kind,
            degree,
            direction,
        })
    }

    pub fn lorenz(degree: usize, direction: Direction) -> Result<Self> {
        Self::new(FamilyKind::Lorenz, degree, direction)
    }

    pub fn inverse_sd(degree: usize, direction: Direction) -> Result<Self> {
        Self::new(FamilyKind::InverseSd, degree, direction)
    }

    pub fn sd(degree: usize) -> Result<Self> {
        Self::new(FamilyKind::Sd, degree, Direction::Upward)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Degree of the integration operator applied to the base difference
    /// curve. Inverse-SD curves start from `Λ²`, one integration above `Q`.
    pub fn operator_degree(&self) -> usize {
        match self.kind {
            FamilyKind::InverseSd => self.degree - 1,
            _ => self.degree,
        }
    }

    pub fn requires_nonnegative(&self) -> bool {
        self.kind != FamilyKind::Sd
    }

    pub(crate) fn check_grid(&self, spec: &GridSpec) -> Result<()> {
        if self.kind != FamilyKind::Sd && !spec.is_unit() {
            return Err(Error::InvalidConfig(format!(
                "{} curves live on [0, 1], got domain {:?}",
                self.kind,
                spec.domain()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for DominanceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FamilyKind::Sd => write!(f, "sd(m={})", self.degree),
            _ => write!(f, "{}(m={}, {})", self.kind, self.degree, self.direction),
        }
    }
}

/// Evaluates the family's base curve of one distribution at the grid nodes:
/// `L̂` (Lorenz), `Λ̂² = ∫₀^p Q̂` (inverse SD), or `F̂` (SD).
pub(crate) fn base_curve_into(
    kind: FamilyKind,
    dist: &EmpiricalDistribution,
    nodes: &[f64],
    out: &mut [f64],
) -> Result<()> {
    match kind {
        FamilyKind::Lorenz => {
            let mean = dist.mean();
            if mean <= 0.0 {
                return Err(Error::ZeroMean(mean));
            }
            for (o, &p) in out.iter_mut().zip(nodes) {
                *o = dist.partial_integral(p) / mean;
            }
        }
        FamilyKind::InverseSd => {
            for (o, &p) in out.iter_mut().zip(nodes) {
                *o = dist.partial_integral(p);
            }
        }
        FamilyKind::Sd => dist.cdf_sorted_into(nodes, out),
    }
    Ok(())
}

pub fn base_curve(
    kind: FamilyKind,
    dist: &EmpiricalDistribution,
    spec: &GridSpec,
) -> Result<GridFunction> {
    let nodes = spec.nodes();
    let mut out = vec![0.0; nodes.len()];
    base_curve_into(kind, dist, &nodes, &mut out)?;
    Ok(GridFunction::from_raw(*spec, out))
}

/// Turns two base curves into the signed difference curve, in place in `first`.
///
/// Lorenz and inverse-SD use `base₂ - base₁`; SD uses `F₁ - F₂`. With these
/// signs a coefficient near zero always means the first distribution almost
/// dominates the second.
pub(crate) fn difference_into(
    family: &DominanceFamily,
    first: &mut [f64],
    second: &[f64],
    step: f64,
) {
    match family.kind {
        FamilyKind::Sd => first.iter_mut().zip(second).for_each(|(a, b)| *a -= b),
        _ => first.iter_mut().zip(second).for_each(|(a, b)| *a = b - *a),
    }
    apply_operator(first, step, family.operator_degree(), family.direction);
}

/// Signed difference curve `φ̂` for the family on the given grid.
pub fn phi_curve(
    family: &DominanceFamily,
    d1: &EmpiricalDistribution,
    d2: &EmpiricalDistribution,
    spec: &GridSpec,
) -> Result<GridFunction> {
    family.check_grid(spec)?;
    let nodes = spec.nodes();
    let mut a = vec![0.0; nodes.len()];
    let mut b = vec![0.0; nodes.len()];
    base_curve_into(family.kind, d1, &nodes, &mut a)?;
    base_curve_into(family.kind, d2, &nodes, &mut b)?;
    difference_into(family, &mut a, &b, spec.step());
    Ok(GridFunction::from_raw(*spec, a))
}

/// Point estimate of a dominance coefficient with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub c_hat: f64,
    pub pos_area: f64,
    pub neg_area: f64,
    pub phi: GridFunction,
    pub family: DominanceFamily,
    /// `n₁n₂ / (n₁ + n₂)`
    pub t_n: f64,
    /// `n₁ / (n₁ + n₂)`
    pub lambda_hat: f64,
    pub n1: usize,
    pub n2: usize,
}

impl CoefficientEstimate {
    pub(crate) fn from_phi(
        family: DominanceFamily,
        phi: GridFunction,
        n1: usize,
        n2: usize,
    ) -> Result<Self> {
        let (pos_area, neg_area) = areas_of(phi.values(), phi.spec().step());
        let c_hat = ratio_of(pos_area, neg_area)?;
        let (a, b) = (n1 as f64, n2 as f64);
        Ok(Self {
            c_hat,
            pos_area,
            neg_area,
            phi,
            family,
            t_n: a * b / (a + b),
            lambda_hat: a / (a + b),
            n1,
            n2,
        })
    }

    /// True when the estimate sits on the boundary `{0, 1}`.
    pub fn on_boundary(&self) -> bool {
        self.pos_area == 0.0 || self.neg_area == 0.0
    }
}

pub fn coefficient(
    family: &DominanceFamily,
    d1: &EmpiricalDistribution,
    d2: &EmpiricalDistribution,
    spec: &GridSpec,
) -> Result<CoefficientEstimate> {
    let phi = phi_curve(family, d1, d2, spec)?;
    CoefficientEstimate::from_phi(*family, phi, d1.len(), d2.len())
}

/// Rank-dependent weighting `P'(t)` used by `J_P` and `W_P`.
#[derive(Clone)]
pub struct PreferenceFunction {
    name: String,
    p_prime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for PreferenceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PreferenceFunction")
            .field("name", &self.name)
            .finish()
    }
}

impl PreferenceFunction {
    pub fn new(name: impl Into<String>, p_prime: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            p_prime: Arc::new(p_prime),
        }
    }

    /// `P(t) = t³ - 3t² + 3t`, so `P'(t) = 3(1 - t)²`.
    pub fn cubic() -> Self {
        Self::new("cubic", |t| 3.0 * (1.0 - t) * (1.0 - t))
    }

    /// `P(t) = t`: every rank weighted equally, `W_P` is the mean.
    pub fn uniform() -> Self {
        Self::new("uniform", |_| 1.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weight(&self, t: f64) -> f64 {
        (self.p_prime)(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankMeasures {
    /// Inequality `J_P = 1 - W_P / μ`.
    pub j_p: f64,
    /// Welfare `W_P = ∫ P'(t) Q(t) dt`.
    pub w_p: f64,
    pub mu: f64,
}

pub fn rank_measures(
    dist: &EmpiricalDistribution,
    pref: &PreferenceFunction,
    spec: &GridSpec,
) -> Result<RankMeasures> {
    let mu = dist.mean();
    if mu <= 0.0 {
        return Err(Error::ZeroMean(mu));
    }
    if !spec.is_unit() {
        return Err(Error::InvalidConfig("rank measures integrate over [0, 1]".into()));
    }
    let w_p = spec
        .nodes()
        .into_iter()
        .map(|p| pref.weight(p) * dist.quantile(p))
        .sum::<f64>()
        * spec.step();
    Ok(RankMeasures {
        j_p: 1.0 - w_p / mu,
        w_p,
        mu,
    })
}
