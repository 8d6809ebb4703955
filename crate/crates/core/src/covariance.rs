//! Plug-in covariance kernels of the limiting processes and the standard
//! deviation curves used to studentize contact sets.
//!
//! Every kernel is the (1/n) sample covariance of a per-observation transform
//! evaluated at the grid nodes:
//!
//! * Lorenz: `(L̂(p)·X − Q̂(p)∧X) / μ̂`
//! * inverse SD: `Q̂(p)∧X`
//! * SD: `1(X <= x)`
//!
//! combined across the two samples with weights `√(1−λ̂)` and `√λ̂`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{apply_operator, GridFunction, GridSpec};
use crate::coefficients::{DominanceFamily, FamilyKind};
use crate::empirical::{EmpiricalDistribution, PairedSample, SamplingScheme, TwoSampleData};
use crate::error::{Error, Result};

const CHUNK: usize = 2048;
const KERNEL_BLOCK: usize = 256;

/// Dense symmetric kernel on the grid, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovKernel {
    spec: GridSpec,
    matrix: Vec<f64>,
    kind: FamilyKind,
    scheme: SamplingScheme,
}

impl CovKernel {
    pub fn from_matrix(
        spec: GridSpec,
        matrix: Vec<f64>,
        kind: FamilyKind,
        scheme: SamplingScheme,
    ) -> Result<Self> {
        let n = spec.n_points();
        if matrix.len() != n * n {
            return Err(Error::InvalidGrid(format!(
                "kernel needs {} entries, got {}",
                n * n,
                matrix.len()
            )));
        }
        Ok(Self {
            spec,
            matrix,
            kind,
            scheme,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn scheme(&self) -> SamplingScheme {
        self.scheme
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.spec.n_points() + j]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.spec.n_points();
        (0..n).map(|i| self.matrix[i * n + i]).collect()
    }

    pub fn scale(&self, c: f64) -> CovKernel {
        CovKernel {
            matrix: self.matrix.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

/// Per-observation transform at the grid nodes for one distribution.
struct Transform {
    kind: FamilyKind,
    nodes: Vec<f64>,
    q: Vec<f64>,
    l: Vec<f64>,
    inv_mu: f64,
}

impl Transform {
    fn new(kind: FamilyKind, dist: &EmpiricalDistribution, spec: &GridSpec) -> Result<Self> {
        let nodes = spec.nodes();
        let (mut q, mut l, mut inv_mu) = (Vec::new(), Vec::new(), 0.0);
        match kind {
            FamilyKind::Lorenz => {
                let mu = dist.mean();
                if mu <= 0.0 {
                    return Err(Error::ZeroMean(mu));
                }
                inv_mu = 1.0 / mu;
                q = nodes.iter().map(|&p| dist.quantile(p)).collect();
                l = nodes.iter().map(|&p| dist.partial_integral(p) / mu).collect();
            }
            FamilyKind::InverseSd => q = nodes.iter().map(|&p| dist.quantile(p)).collect(),
            FamilyKind::Sd => {}
        }
        Ok(Self {
            kind,
            nodes,
            q,
            l,
            inv_mu,
        })
    }

    /// Writes `weight * z(x)` into `out`, or adds it when `accumulate` is set.
    fn fill(&self, x: f64, weight: f64, out: &mut [f64], accumulate: bool) {
        let put = |o: &mut f64, v: f64| {
            if accumulate {
                *o += weight * v
            } else {
                *o = weight * v
            }
        };
        match self.kind {
            FamilyKind::Lorenz => {
                let s = self.inv_mu;
                for ((o, &q), &l) in out.iter_mut().zip(&self.q).zip(&self.l) {
                    put(o, (l * x - q.min(x)) * s);
                }
            }
            FamilyKind::InverseSd => {
                for (o, &q) in out.iter_mut().zip(&self.q) {
                    put(o, q.min(x));
                }
            }
            FamilyKind::Sd => {
                for (o, &node) in out.iter_mut().zip(&self.nodes) {
                    put(o, if x <= node { 1.0 } else { 0.0 });
                }
            }
        }
    }
}

/// A stream of weighted observation vectors whose covariance is one
/// additive piece of the kernel.
enum Stream<'a> {
    Single {
        t: Transform,
        xs: &'a [f64],
        weight: f64,
    },
    Paired {
        t1: Transform,
        t2: Transform,
        pairs: &'a [(f64, f64)],
        w1: f64,
        w2: f64,
    },
}

impl Stream<'_> {
    fn len(&self) -> usize {
        match self {
            Stream::Single { xs, .. } => xs.len(),
            Stream::Paired { pairs, .. } => pairs.len(),
        }
    }

    fn fill(&self, i: usize, out: &mut [f64]) {
        match self {
            Stream::Single { t, xs, weight } => t.fill(xs[i], *weight, out, false),
            Stream::Paired {
                t1,
                t2,
                pairs,
                w1,
                w2,
            } => {
                let (a, b) = pairs[i];
                t1.fill(a, *w1, out, false);
                t2.fill(b, -*w2, out, true);
            }
        }
    }

    fn mean(&self, n_nodes: usize) -> Vec<f64> {
        let n = self.len();
        let partials: Vec<Vec<f64>> = (0..n)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|idx| {
                let mut acc = vec![0.0; n_nodes];
                let mut buf = vec![0.0; n_nodes];
                for &i in idx {
                    self.fill(i, &mut buf);
                    acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                }
                acc
            })
            .collect();
        let mut mean = vec![0.0; n_nodes];
        for part in partials {
            mean.iter_mut().zip(&part).for_each(|(m, p)| *m += p);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        mean
    }
}

fn matched_streams<'a>(
    kind: FamilyKind,
    d1: &EmpiricalDistribution,
    d2: &EmpiricalDistribution,
    pairs: Option<&'a PairedSample>,
    spec: &GridSpec,
) -> Result<Vec<Stream<'a>>> {
    let pairs = pairs
        .ok_or_else(|| Error::SchemeMismatch("matched-pairs kernel requires paired data".into()))?;
    if pairs.len() != d1.len() || pairs.len() != d2.len() {
        return Err(Error::SchemeMismatch(format!(
            "{} pairs but marginal sizes {} and {}",
            pairs.len(),
            d1.len(),
            d2.len()
        )));
    }
    // n1 = n2, so both weights are sqrt(1/2)
    let w = 0.5f64.sqrt();
    Ok(vec![Stream::Paired {
        t1: Transform::new(kind, d1, spec)?,
        t2: Transform::new(kind, d2, spec)?,
        pairs: pairs.pairs(),
        w1: w,
        w2: w,
    }])
}

fn independent_streams<'a>(
    kind: FamilyKind,
    d1: &'a EmpiricalDistribution,
    d2: &'a EmpiricalDistribution,
    spec: &GridSpec,
) -> Result<Vec<Stream<'a>>> {
    let (n1, n2) = (d1.len() as f64, d2.len() as f64);
    let lambda = n1 / (n1 + n2);
    Ok(vec![
        Stream::Single {
            t: Transform::new(kind, d1, spec)?,
            xs: d1.sorted_values(),
            weight: (1.0 - lambda).sqrt(),
        },
        Stream::Single {
            t: Transform::new(kind, d2, spec)?,
            xs: d2.sorted_values(),
            weight: lambda.sqrt(),
        },
    ])
}

fn streams<'a>(
    kind: FamilyKind,
    d1: &'a EmpiricalDistribution,
    d2: &'a EmpiricalDistribution,
    pairs: Option<&'a PairedSample>,
    scheme: SamplingScheme,
    spec: &GridSpec,
) -> Result<Vec<Stream<'a>>> {
    match scheme {
        SamplingScheme::Independent => independent_streams(kind, d1, d2, spec),
        SamplingScheme::MatchedPairs => matched_streams(kind, d1, d2, pairs, spec),
    }
}

fn assemble_kernel(streams: &[Stream<'_>], n_nodes: usize) -> Vec<f64> {
    let mut k = vec![0.0; n_nodes * n_nodes];
    for s in streams {
        let n = s.len();
        let mean = s.mean(n_nodes);
        let inv_n = 1.0 / n as f64;
        let mut block = vec![0.0; KERNEL_BLOCK * n_nodes];
        for start in (0..n).step_by(KERNEL_BLOCK) {
            let len = KERNEL_BLOCK.min(n - start);
            for b in 0..len {
                let row = &mut block[b * n_nodes..(b + 1) * n_nodes];
                s.fill(start + b, row);
                row.iter_mut().zip(&mean).for_each(|(r, m)| *r -= m);
            }
            let block = &block[..len * n_nodes];
            k.par_chunks_mut(n_nodes).enumerate().for_each(|(r, krow)| {
                for b in 0..len {
                    let c = &block[b * n_nodes..(b + 1) * n_nodes];
                    let a = c[r] * inv_n;
                    if a != 0.0 {
                        krow.iter_mut().zip(c).for_each(|(kv, cv)| *kv += a * cv);
                    }
                }
            });
        }
    }
    k
}

fn kernel_for(
    kind: FamilyKind,
    d1: &EmpiricalDistribution,
    d2: &EmpiricalDistribution,
    pairs: Option<&PairedSample>,
    scheme: SamplingScheme,
    spec: &GridSpec,
) -> Result<CovKernel> {
    let s = streams(kind, d1, d2, pairs, scheme, spec)?;
    let matrix = assemble_kernel(&s, spec.n_points());
    CovKernel::from_matrix(*spec, matrix, kind, scheme)
}

/// Kernel of the Lorenz-difference process.
pub fn lorenz_kernel(
    d1: &EmpiricalDistribution,
    d2: &EmpiricalDistribution,
    pairs: Option<&PairedSample>,
    scheme: SamplingScheme,
    spec: &GridSpec,
) -> Result<CovKernel> {
    kernel_for(FamilyKind::Lorenz, d1, d2, pairs, scheme, spec)
}

/// Kernel of the `Λ²`-difference process.
pub fn isd_kernel(
    d1: &EmpiricalDistribution,
    d2: &EmpiricalDistribution,
    pairs: Option<&PairedSample>,
    scheme: SamplingScheme,
    spec: &GridSpec,
) -> Result<CovKernel> {
    kernel_for(FamilyKind::InverseSd, d1, d2, pairs, scheme, spec)
}

/// Kernel of the CDF-difference process on the grid's domain.
pub fn sd_kernel(
    d1: &EmpiricalDistribution,
    d2: &EmpiricalDistribution,
    pairs: Option<&PairedSample>,
    scheme: SamplingScheme,
    spec: &GridSpec,
) -> Result<CovKernel> {
    kernel_for(FamilyKind::Sd, d1, d2, pairs, scheme, spec)
}

/// Kernel for any family straight from the data.
pub fn kernel(kind: FamilyKind, data: &TwoSampleData, spec: &GridSpec) -> Result<CovKernel> {
    let (d1, d2) = data.distributions()?;
    kernel_for(kind, &d1, &d2, data.pairs(), data.scheme(), spec)
}

/// `σ̂` from a dense kernel: the family's operator is applied along rows and
/// then columns, and the diagonal square-rooted.
pub fn sigma_curve(kernel: &CovKernel, family: &DominanceFamily) -> Result<GridFunction> {
    if kernel.kind != family.kind() {
        return Err(Error::FamilyMismatch {
            kernel: kernel.kind.to_string(),
            requested: family.kind().to_string(),
        });
    }
    let n = kernel.spec.n_points();
    let step = kernel.spec.step();
    let (m, dir) = (family.operator_degree(), family.direction());
    let mut a = kernel.matrix.clone();
    a.par_chunks_mut(n)
        .for_each(|row| apply_operator(row, step, m, dir));
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t.par_chunks_mut(n)
        .for_each(|row| apply_operator(row, step, m, dir));
    let values = (0..n).map(|i| t[i * n + i].max(0.0).sqrt()).collect();
    Ok(GridFunction::from_raw(kernel.spec, values))
}

/// `σ̂` without forming the kernel: the variance at each node of the
/// operated, centered observation vectors. Equal to [`sigma_curve`] of the
/// family's kernel up to rounding, at `O(N·n·m)` cost instead of `O(N²·n)`.
pub fn sigma_hat(
    family: &DominanceFamily,
    data: &TwoSampleData,
    spec: &GridSpec,
) -> Result<GridFunction> {
    let (d1, d2) = data.distributions()?;
    sigma_hat_from(family, &d1, &d2, data.pairs(), data.scheme(), spec)
}

pub(crate) fn sigma_hat_from(
    family: &DominanceFamily,
    d1: &EmpiricalDistribution,
    d2: &EmpiricalDistribution,
    pairs: Option<&PairedSample>,
    scheme: SamplingScheme,
    spec: &GridSpec,
) -> Result<GridFunction> {
    family.check_grid(spec)?;
    let n_nodes = spec.n_points();
    let step = spec.step();
    let (m, dir) = (family.operator_degree(), family.direction());
    let mut var = vec![0.0; n_nodes];
    for s in streams(family.kind(), d1, d2, pairs, scheme, spec)? {
        let n = s.len();
        let mut mean = s.mean(n_nodes);
        apply_operator(&mut mean, step, m, dir);
        let partials: Vec<Vec<f64>> = (0..n)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|idx| {
                let mut acc = vec![0.0; n_nodes];
                let mut buf = vec![0.0; n_nodes];
                for &i in idx {
                    s.fill(i, &mut buf);
                    apply_operator(&mut buf, step, m, dir);
                    for ((a, b), mu) in acc.iter_mut().zip(&buf).zip(&mean) {
                        let d = b - mu;
                        *a += d * d;
                    }
                }
                acc
            })
            .collect();
        for part in partials {
            for (v, p) in var.iter_mut().zip(&part) {
                *v += p / n as f64;
            }
        }
    }
    let values = var.into_iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok(GridFunction::from_raw(*spec, values))
}
