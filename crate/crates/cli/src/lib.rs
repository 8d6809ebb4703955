//! Command-line front end: argument parsing, command execution, and output.

pub mod input;
pub mod report;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use almostdom::coefficients::{base_curve, rank_measures, PreferenceFunction};
use almostdom::covariance::sigma_hat;
use almostdom::inference::{bootstrap_ci, select_tuning};
use almostdom::simulation::{monte_carlo, preset, MonteCarloStudy, PRESET_NAMES};
use almostdom::{
    coefficient, Direction, DominanceFamily, EmpiricalDistribution, FamilyKind, GridFunction,
    GridSpec, InferenceConfig, SamplingScheme, TwoSampleData,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use input::{load_csv, load_groups};
use report::{
    to_csv, to_json, EstimateRecord, MeasuresRecord, Record, ReportRecord, SimulationRecord,
    TuningRecord,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}: malformed CSV: {1}")]
    Csv(PathBuf, String),
    #[error("{0}: no data rows")]
    EmptyInput(PathBuf),
    #[error("parse error at row {row}, column {col}: {reason}")]
    ParseError {
        row: usize,
        col: usize,
        reason: String,
    },
    #[error("negative value at row {row}; this family needs nonnegative outcomes")]
    NegativeValue { row: usize },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] almostdom::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(almostdom::Error::DegenerateCurves) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "almostdom", version, about = "Almost-dominance coefficients with bootstrap confidence intervals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (0 = one per core)
    #[arg(long, global = true, env = "ALMOSTDOM_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Dump the estimated curves as long-format CSV (curve,p,value)
    #[arg(long, global = true)]
    pub emit_curves: Option<PathBuf>,

    /// Include wall-clock runtime in the report
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Lorenz,
    Isd,
    Sd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirArg {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Ind,
    Matched,
}

impl From<SchemeArg> for SamplingScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Ind => SamplingScheme::Independent,
            SchemeArg::Matched => SamplingScheme::MatchedPairs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PreferenceArg {
    Cubic,
    Uniform,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Ind)]
    pub scheme: SchemeArg,

    /// One file (group,value or x1,x2) or two single-column files
    #[arg(long, short, required = true, num_args = 1..=2)]
    pub input: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Lorenz)]
    pub family: FamilyArg,

    #[arg(long, default_value_t = 1)]
    pub m: usize,

    #[arg(long, value_enum, default_value_t = DirArg::Up)]
    pub dir: DirArg,

    #[arg(long, default_value_t = almostdom::DEFAULT_GRID_POINTS)]
    pub grid: usize,

    /// SD domain as a,b (default: hull of the pooled sample)
    #[arg(long, value_parser = parse_domain, allow_hyphen_values = true)]
    pub domain: Option<(f64, f64)>,
}

#[derive(Debug, Args)]
pub struct BootArgs {
    #[arg(long, default_value_t = 1000)]
    pub boot: usize,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 0.001)]
    pub xi0: f64,

    /// Drop degenerate bootstrap resamples instead of failing
    #[arg(long)]
    pub skip_degenerate: bool,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.1,0.5,1,2,5,10,20")]
    pub candidates: Vec<f64>,

    #[arg(long, default_value_t = 100)]
    pub cal_reps: usize,

    #[arg(long, default_value_t = 200)]
    pub cal_boot: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimate of the coefficient
    Estimate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Point estimate with a bootstrap confidence interval
    Ci {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        boot: BootArgs,
        /// Tuning parameter for the contact sets
        #[arg(long, required_unless_present = "tune", conflicts_with = "tune")]
        tn: Option<f64>,
        /// Choose the tuning parameter by calibration on the data
        #[arg(long)]
        tune: bool,
        #[command(flatten)]
        tuning: TuneArgs,
        /// Keep the interval unclamped instead of intersecting it with [0, 1]
        #[arg(long)]
        no_clamp: bool,
        /// Exit with status 3 when the estimate sits on the boundary {0, 1}
        #[arg(long)]
        strict: bool,
    },
    /// Monte Carlo study on a built-in design
    Simulate {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        preset: String,
        #[arg(long, value_enum, default_value_t = SchemeArg::Matched)]
        scheme: SchemeArg,
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long, default_value_t = 300)]
        reps: usize,
        #[arg(long, default_value_t = 300)]
        boot: usize,
        #[arg(long)]
        tn: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Calibrate the tuning parameter on the data
    Tune {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        tuning: TuneArgs,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.001)]
        xi0: f64,
    },
    /// Mean, rank-dependent welfare W_P and inequality J_P per group
    Measures {
        #[arg(long, short, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = PreferenceArg::Cubic)]
        preference: PreferenceArg,
        #[arg(long, default_value_t = almostdom::DEFAULT_GRID_POINTS)]
        grid: usize,
    },
}

fn parse_domain(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected a,b but got '{s}'"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad lower bound '{a}'"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad upper bound '{b}'"))?;
    if !(a < b) {
        return Err(format!("domain needs a < b, got {a},{b}"));
    }
    Ok((a, b))
}

/// What a command produced: the rendered report, optional curve dump, and
/// the exit status to use.
#[derive(Debug)]
pub struct Outcome {
    pub report: String,
    pub curves: Option<String>,
    pub exit_code: i32,
}

impl FamilyArgs {
    fn family(&self) -> Result<DominanceFamily, CliError> {
        let dir = match self.dir {
            DirArg::Up => Direction::Upward,
            DirArg::Down => Direction::Downward,
        };
        let kind = match self.family {
            FamilyArg::Lorenz => FamilyKind::Lorenz,
            FamilyArg::Isd => FamilyKind::InverseSd,
            FamilyArg::Sd => FamilyKind::Sd,
        };
        Ok(DominanceFamily::new(kind, self.m, dir)?)
    }

    fn grid(&self, family: &DominanceFamily, data: &TwoSampleData) -> Result<GridSpec, CliError> {
        if family.kind() != FamilyKind::Sd {
            if self.domain.is_some() {
                return Err(CliError::Usage("--domain only applies to --family sd".into()));
            }
            return Ok(GridSpec::unit(self.grid)?);
        }
        let (a, b) = data.marginals();
        let lo = a.iter().chain(&b).copied().fold(f64::INFINITY, f64::min);
        let hi = a.iter().chain(&b).copied().fold(f64::NEG_INFINITY, f64::max);
        let (dlo, dhi) = self.domain.unwrap_or((lo, hi));
        if dlo > lo || dhi < hi {
            return Err(CliError::Usage(format!(
                "domain [{dlo}, {dhi}] does not cover the data range [{lo}, {hi}]"
            )));
        }
        Ok(GridSpec::new(self.grid, dlo, dhi)?)
    }
}

fn family_name(f: &DominanceFamily) -> String {
    f.kind().to_string()
}

fn load(data: &DataArgs, family: &DominanceFamily) -> Result<TwoSampleData, CliError> {
    load_csv(&data.input, data.scheme.into(), family.requires_nonnegative())
}

fn render<R: Record>(format: Format, records: &[R]) -> String {
    match format {
        Format::Json => to_json(records),
        Format::Csv => to_csv(records),
    }
}

fn push_curve(out: &mut String, name: &str, f: &GridFunction) {
    for (p, v) in f.spec().nodes().iter().zip(f.values()) {
        let _ = writeln!(out, "{name},{},{}", report::format_float(*p), report::format_float(*v));
    }
}

fn data_curves(
    family: &DominanceFamily,
    data: &TwoSampleData,
    spec: &GridSpec,
    phi: &GridFunction,
    sigma: &GridFunction,
) -> Result<String, CliError> {
    let (d1, d2) = data.distributions()?;
    let base_name = match family.kind() {
        FamilyKind::Lorenz => "lorenz",
        FamilyKind::InverseSd => "lambda2",
        FamilyKind::Sd => "cdf",
    };
    let mut out = String::from("curve,p,value\n");
    push_curve(&mut out, &format!("{base_name}_1"), &base_curve(family.kind(), &d1, spec)?);
    push_curve(&mut out, &format!("{base_name}_2"), &base_curve(family.kind(), &d2, spec)?);
    push_curve(&mut out, "phi", phi);
    push_curve(&mut out, "sigma", sigma);
    Ok(out)
}

fn elapsed_ms(start: Instant, enabled: bool) -> Option<f64> {
    enabled.then(|| start.elapsed().as_secs_f64() * 1e3)
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.threads > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let start = Instant::now();
    let want_curves = cli.emit_curves.is_some();
    match &cli.command {
        Command::Estimate { data, family } => {
            let fam = family.family()?;
            let data = load(data, &fam)?;
            let spec = family.grid(&fam, &data)?;
            let (d1, d2) = data.distributions()?;
            let est = coefficient(&fam, &d1, &d2, &spec)?;
            let curves = if want_curves {
                let sigma = sigma_hat(&fam, &data, &spec)?;
                Some(data_curves(&fam, &data, &spec, &est.phi, &sigma)?)
            } else {
                None
            };
            let (lo, hi) = spec.domain();
            let rec = EstimateRecord {
                family: family_name(&fam),
                m: fam.degree(),
                direction: fam.direction().to_string(),
                scheme: data.scheme().to_string(),
                n1: est.n1,
                n2: est.n2,
                c_hat: est.c_hat,
                pos_area: est.pos_area,
                neg_area: est.neg_area,
                t_big: est.t_n,
                lambda_hat: est.lambda_hat,
                grid: spec.n_points(),
                domain_lo: lo,
                domain_hi: hi,
            };
            Ok(Outcome {
                report: render(cli.format, &[rec]),
                curves,
                exit_code: 0,
            })
        }
        Command::Ci {
            data,
            family,
            boot,
            tn,
            tune,
            tuning,
            no_clamp,
            strict,
        } => {
            let fam = family.family()?;
            let data = load(data, &fam)?;
            let spec = family.grid(&fam, &data)?;
            let mut cfg = InferenceConfig {
                t_n: tn.unwrap_or(1.0),
                xi0: boot.xi0,
                n_boot: boot.boot,
                alpha: boot.alpha,
                clamp_to_unit: !no_clamp,
                seed: boot.seed,
                skip_degenerate: boot.skip_degenerate,
            };
            if *tune {
                let r = select_tuning(
                    &data,
                    &fam,
                    &spec,
                    &cfg,
                    &tuning.candidates,
                    tuning.cal_reps,
                    tuning.cal_boot,
                )?;
                log::info!("selected t_n = {} from {:?}", r.selected, r.coverage);
                cfg.t_n = r.selected;
            }
            let res = bootstrap_ci(&data, &fam, &spec, &cfg)?;
            if res.boundary {
                log::warn!("estimate lies on the boundary; the interval has no coverage guarantee");
            }
            if res.n_boot_effective < cfg.n_boot {
                log::warn!(
                    "{} of {} bootstrap replicates were degenerate and dropped",
                    cfg.n_boot - res.n_boot_effective,
                    cfg.n_boot
                );
            }
            let curves = if want_curves {
                Some(data_curves(&fam, &data, &spec, &res.estimate.phi, &res.sigma)?)
            } else {
                None
            };
            let rec = ReportRecord {
                family: family_name(&fam),
                m: fam.degree(),
                direction: fam.direction().to_string(),
                n1: res.estimate.n1,
                n2: res.estimate.n2,
                c_hat: res.estimate.c_hat,
                ci_lo: res.ci.0,
                ci_hi: res.ci.1,
                t_n: cfg.t_n,
                xi0: cfg.xi0,
                n_boot: res.n_boot_effective,
                seed: cfg.seed,
                boundary_flag: res.boundary,
                runtime_ms: elapsed_ms(start, cli.timing),
            };
            Ok(Outcome {
                report: render(cli.format, &[rec]),
                curves,
                exit_code: if *strict && res.boundary { 3 } else { 0 },
            })
        }
        Command::Simulate {
            preset: name,
            scheme,
            n1,
            n2,
            reps,
            boot,
            tn,
            seed,
            alpha,
        } => {
            let p = preset(name)?;
            let true_c = p.true_coefficient()?;
            let cfg = InferenceConfig {
                alpha: *alpha,
                ..InferenceConfig::new(*tn).with_boot(*boot).with_seed(*seed)
            };
            let study = MonteCarloStudy {
                dgp1: p.dgp1.clone(),
                dgp2: p.dgp2.clone(),
                family: p.family,
                scheme: (*scheme).into(),
                sizes: (*n1, *n2),
                spec: p.spec,
                cfg,
                n_reps: *reps,
                true_c,
            };
            let r = monte_carlo(&study)?;
            let curves = if want_curves {
                let phi = population_phi(&p)?;
                let mut out = String::from("curve,p,value\n");
                push_curve(&mut out, "phi_population", &phi);
                Some(out)
            } else {
                None
            };
            let rec = SimulationRecord {
                preset: name.clone(),
                scheme: SamplingScheme::from(*scheme).to_string(),
                n1: *n1,
                n2: *n2,
                true_c,
                mean: r.mean,
                bias: r.bias,
                se: r.se,
                rmse: r.rmse,
                t_n: r.t_n,
                cr: r.cr,
                reps: r.n_reps,
                boot: *boot,
                seed: *seed,
                runtime_ms: elapsed_ms(start, cli.timing),
            };
            Ok(Outcome {
                report: render(cli.format, &[rec]),
                curves,
                exit_code: 0,
            })
        }
        Command::Tune {
            data,
            family,
            tuning,
            alpha,
            seed,
            xi0,
        } => {
            let fam = family.family()?;
            let data = load(data, &fam)?;
            let spec = family.grid(&fam, &data)?;
            let cfg = InferenceConfig {
                alpha: *alpha,
                xi0: *xi0,
                ..InferenceConfig::new(1.0).with_seed(*seed)
            };
            let r = select_tuning(
                &data,
                &fam,
                &spec,
                &cfg,
                &tuning.candidates,
                tuning.cal_reps,
                tuning.cal_boot,
            )?;
            let rows: Vec<TuningRecord> = r
                .coverage
                .iter()
                .map(|&(t_n, coverage)| TuningRecord {
                    t_n,
                    coverage,
                    selected: t_n == r.selected,
                    pseudo_true: r.pseudo_true,
                })
                .collect();
            let curves = if want_curves {
                let (d1, d2) = data.distributions()?;
                let est = coefficient(&fam, &d1, &d2, &spec)?;
                let sigma = sigma_hat(&fam, &data, &spec)?;
                Some(data_curves(&fam, &data, &spec, &est.phi, &sigma)?)
            } else {
                None
            };
            Ok(Outcome {
                report: render(cli.format, &rows),
                curves,
                exit_code: 0,
            })
        }
        Command::Measures {
            input,
            preference,
            grid,
        } => {
            let pref = match preference {
                PreferenceArg::Cubic => PreferenceFunction::cubic(),
                PreferenceArg::Uniform => PreferenceFunction::uniform(),
            };
            let spec = GridSpec::unit(*grid)?;
            let mut rows = Vec::new();
            let mut curves = String::from("curve,p,value\n");
            for (group, values) in load_groups(input)? {
                let n = values.len();
                let dist = EmpiricalDistribution::from_values(values)?;
                let m = rank_measures(&dist, &pref, &spec)?;
                if want_curves {
                    let lorenz = base_curve(FamilyKind::Lorenz, &dist, &spec)?;
                    push_curve(&mut curves, &format!("lorenz_{group}"), &lorenz);
                }
                rows.push(MeasuresRecord {
                    group,
                    n,
                    mu: m.mu,
                    w_p: m.w_p,
                    j_p: m.j_p,
                    preference: pref.name().to_string(),
                });
            }
            Ok(Outcome {
                report: render(cli.format, &rows),
                curves: want_curves.then_some(curves),
                exit_code: 0,
            })
        }
    }
}

fn population_phi(p: &almostdom::Preset) -> Result<GridFunction, CliError> {
    let nodes = p.spec.nodes();
    let base = |d: &almostdom::Dgp| -> Vec<f64> {
        match p.family.kind() {
            FamilyKind::Lorenz => nodes.iter().map(|&t| d.partial_integral(t) / d.mean()).collect(),
            FamilyKind::InverseSd => nodes.iter().map(|&t| d.partial_integral(t)).collect(),
            FamilyKind::Sd => nodes.iter().map(|&x| d.cdf(x)).collect(),
        }
    };
    let (b1, b2) = (base(&p.dgp1), base(&p.dgp2));
    let diff: Vec<f64> = match p.family.kind() {
        FamilyKind::Sd => b1.iter().zip(&b2).map(|(a, b)| a - b).collect(),
        _ => b1.iter().zip(&b2).map(|(a, b)| b - a).collect(),
    };
    let f = GridFunction::new(p.spec, diff)?;
    Ok(almostdom::integrate(&f, p.family.operator_degree(), p.family.direction()))
}
