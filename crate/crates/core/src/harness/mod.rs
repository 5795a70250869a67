//! Monte Carlo experiments for the matching and shortest-distance laws.
//!
//! An [`ExperimentPlan`] fixes a source or system, a schedule of `n`, a
//! number of trials and a master seed. [`run`] draws every trial from seeds
//! derived from `(master_seed, seed_stream, trial)`, so results do not depend
//! on the thread count, then fits the trial-mean statistic against `log n`
//! and compares the slope with the theoretical limit.
//!
//! Statistics per kind:
//!
//! | kind               | statistic              | limit of the slope |
//! |--------------------|------------------------|--------------------|
//! | `lcs_law`          | `M_n^f`                | `2 / H_2`          |
//! | `scrabble_law`     | `M_n^f`, stretch code  | `2 / (-log p)`     |
//! | `orbit_law`        | `-log m_n^f`           | `2 / C`            |
//! | `random_orbit_law` | `-log m_n`             | `2 / C_nu`         |
//! | `entropy_check`    | plateau estimate of `H_2` | closed form `H_2` (no fit) |

mod config;
mod selftest;

pub use crate::stats::{fit_slope, LinearFit};
pub use config::{ConfigFile, ExperimentConfig, DEFAULT_SEED};
pub use selftest::{selftest, selftest_with, Check, SelftestReport, SelftestSize};

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    iterate_random, iterate_seeded, observe, DriverStart, MapSpec, Observation, SkewSystem, Space, Start,
};
use crate::encoders::{Encoder, StretchEncoder, Weights, ZeroInflation};
use crate::entropy::{
    renyi2_iid, renyi2_increment, renyi2_markov, renyi2_plateau, renyi2_scrabble, renyi2_zero_inflated,
    renyi2_zero_inflated_annealed,
};
use crate::error::{invalid, Error, Result};
use crate::geometry::{correlation_dimension, default_radius_window, distance_profile};
use crate::matching::{encoded_lcs, encoded_prefix_lcs, highest_score};
use crate::rng::{derive_seed, stream};
use crate::symbolic::{MarkovSource, Source};

/// Encoder of a symbolic experiment; masks are drawn per trial.
#[derive(Debug, Clone, PartialEq)]
pub enum EncoderSpec {
    Identity,
    ZeroInflation { epsilon: f64 },
    Stretch(Weights),
}

impl EncoderSpec {
    fn build(&self, mask_seed: u64) -> Result<Encoder> {
        Ok(match self {
            // An all-ones mask is the identity.
            EncoderSpec::Identity | EncoderSpec::ZeroInflation { epsilon: 0.0 } => Encoder::Identity,
            EncoderSpec::ZeroInflation { epsilon } => Encoder::ZeroInflation(ZeroInflation::new(*epsilon, mask_seed)?),
            EncoderSpec::Stretch(w) => Encoder::Stretch(StretchEncoder::new(w.clone())),
        })
    }
}

/// Where the correlation dimension of a random system comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DimensionSpec {
    /// 1 for the 2x/3x system, 2 for toral pairs, estimated for perturbed maps.
    Default,
    Exact(f64),
    /// Correlation dimension of one long orbit with the default radius window.
    Empirical {
        points: usize,
        radii: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentKind {
    LcsLaw {
        source: Source,
        encoder: EncoderSpec,
    },
    ScrabbleLaw {
        source: MarkovSource,
        weights: Weights,
        /// Raw prefix length of the highest-score cross-check.
        score_check_n: usize,
    },
    OrbitLaw {
        map: MapSpec,
        observation: Observation,
        starts: (Start, Start),
    },
    RandomOrbitLaw {
        system: SkewSystem,
        dimension: DimensionSpec,
    },
    EntropyCheck {
        source: Source,
        encoder: EncoderSpec,
    },
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::LcsLaw { .. } => "lcs_law",
            ExperimentKind::ScrabbleLaw { .. } => "scrabble_law",
            ExperimentKind::OrbitLaw { .. } => "orbit_law",
            ExperimentKind::RandomOrbitLaw { .. } => "random_orbit_law",
            ExperimentKind::EntropyCheck { .. } => "entropy_check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Relative(f64),
    Absolute(f64),
}

impl Tolerance {
    pub fn allows(&self, value: f64, target: f64) -> bool {
        let err = (value - target).abs();
        match *self {
            Tolerance::Relative(r) => err <= r * target.abs(),
            Tolerance::Absolute(a) => err <= a,
        }
    }

    fn describe(&self, target: f64) -> String {
        match *self {
            Tolerance::Relative(r) => format!("{target:.4} ± {:.0}%", r * 100.0),
            Tolerance::Absolute(a) => format!("{target:.4} ± {a}"),
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub name: String,
    pub kind: ExperimentKind,
    pub trials: usize,
    pub schedule: Vec<usize>,
    pub master_seed: u64,
    pub seed_stream: u64,
    /// Replaces the computed limit when set.
    pub theory_limit: Option<f64>,
    pub tolerance: Option<Tolerance>,
    pub expect_collapse: bool,
}

impl ExperimentPlan {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: String,
        kind: ExperimentKind,
        trials: usize,
        schedule: Vec<usize>,
        master_seed: u64,
        seed_stream: u64,
        theory_limit: Option<f64>,
        tolerance: Option<Tolerance>,
        expect_collapse: bool,
    ) -> Result<Self> {
        let bad = |msg: &str| Err(Error::Config(format!("experiment {name:?}: {msg}")));
        if trials == 0 {
            return bad("trials must be at least 1");
        }
        if schedule.is_empty() || schedule[0] == 0 || schedule.windows(2).any(|w| w[0] >= w[1]) {
            return bad("schedule must be a nonempty increasing list of positive lengths");
        }
        if !matches!(kind, ExperimentKind::EntropyCheck { .. }) && schedule.len() < 3 && !expect_collapse {
            return bad("a slope fit needs at least 3 schedule points");
        }
        if let ExperimentKind::EntropyCheck {
            encoder: EncoderSpec::Stretch(_),
            ..
        } = kind
        {
            return bad("entropy checks support the identity and zero-inflation encoders");
        }
        if let ExperimentKind::ScrabbleLaw { weights, source, .. } = &kind {
            if weights.len() < source.alphabet().size() {
                return bad("fewer weights than symbols");
            }
        }
        Ok(ExperimentPlan {
            name,
            kind,
            trials,
            schedule,
            master_seed,
            seed_stream,
            theory_limit,
            tolerance,
            expect_collapse,
        })
    }

    fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.master_seed, &[self.seed_stream, trial as u64])
    }

    fn n_max(&self) -> usize {
        *self.schedule.last().unwrap()
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub trial: usize,
    pub n: usize,
    pub statistic: f64,
    pub log_n: f64,
    pub theory_limit: f64,
}

/// A pass/fail check.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    pub kind: &'static str,
    pub rows: Vec<Row>,
    /// Slope fit of the trial mean against `log n`; `None` for entropy checks
    /// and collapsed runs.
    pub fit: Option<LinearFit>,
    pub theory_limit: Option<f64>,
    /// Some `m_n` was exactly zero.
    pub collapse: bool,
    /// Named auxiliary values (closed forms, estimates, cross-check results).
    pub diagnostics: Vec<(String, f64)>,
    pub gates: Vec<Gate>,
}

impl ExperimentResult {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// The value comparisons use: the slope, or for entropy checks the mean
    /// estimate at the largest `n`.
    pub fn headline(&self) -> Option<f64> {
        match self.kind {
            "entropy_check" => self.diagnostic("mean_estimate_at_n_max"),
            _ => self.slope(),
        }
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }

    /// Mean statistic at each scheduled `n`.
    pub fn means(&self) -> Vec<(usize, f64)> {
        mean_by_n(&self.rows)
    }
}

fn mean_by_n(rows: &[Row]) -> Vec<(usize, f64)> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let v: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.statistic).collect();
            (n, v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect()
}

/// Results of a whole configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub results: Vec<ExperimentResult>,
    pub comparisons: Vec<Gate>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed()) && self.comparisons.iter().all(|g| g.pass)
    }

    pub fn result(&self, name: &str) -> Option<&ExperimentResult> {
        self.results.iter().find(|r| r.name == name)
    }

    /// All rows in experiment order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.results {
            for row in &r.rows {
                w.serialize(row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable summary, one line per gate.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.results {
            let slope = match r.fit {
                Some(f) => format!("slope {:.4} ± {:.4}", f.slope, f.stderr),
                None if r.collapse => "collapse detected".to_string(),
                None => "no fit".to_string(),
            };
            let limit = r.theory_limit.map_or("n/a".to_string(), |l| format!("{l:.4}"));
            s.push_str(&format!("{} [{}]: {slope}, theory {limit}\n", r.name, r.kind));
            for (k, v) in &r.diagnostics {
                s.push_str(&format!("    {k} = {v:.6}\n"));
            }
            for g in &r.gates {
                s.push_str(&format!(
                    "  {} {}: {}\n",
                    if g.pass { "PASS" } else { "FAIL" },
                    g.name,
                    g.detail
                ));
            }
        }
        for g in &self.comparisons {
            s.push_str(&format!(
                "{} {}: {}\n",
                if g.pass { "PASS" } else { "FAIL" },
                g.name,
                g.detail
            ));
        }
        s
    }
}

/// Runs every experiment of a configuration and evaluates its comparisons.
pub fn run_config(cfg: &ConfigFile, seed: Option<u64>, threads: usize) -> Result<RunReport> {
    let plans = cfg.plans(seed)?;
    let results = plans.iter().map(|p| run(p, threads)).collect::<Result<Vec<_>>>()?;
    let mut comparisons = Vec::new();
    for c in &cfg.comparisons {
        let value_of = |name: &str| -> Result<f64> {
            results
                .iter()
                .find(|r| r.name == name)
                .ok_or_else(|| Error::Config(format!("comparison {:?}: no experiment {name:?}", c.name)))?
                .headline()
                .ok_or_else(|| Error::Config(format!("comparison {:?}: experiment {name:?} has no slope", c.name)))
        };
        let ratio = value_of(&c.numerator)? / value_of(&c.denominator)?;
        let gate = match (c.expected, c.tolerance()?, c.max_relative_change) {
            (Some(expected), Some(tol), None) => Gate {
                name: c.name.clone(),
                pass: tol.allows(ratio, expected),
                detail: format!("ratio {ratio:.4}, expected {}", tol.describe(expected)),
            },
            (None, None, Some(max)) => Gate {
                name: c.name.clone(),
                pass: (ratio - 1.0).abs() <= max,
                detail: format!("relative change {:.4}, allowed {max}", (ratio - 1.0).abs()),
            },
            _ => {
                return Err(Error::Config(format!(
                    "comparison {:?}: give `expected` with `tolerance`, or `max_relative_change`",
                    c.name
                )))
            }
        };
        comparisons.push(gate);
    }
    Ok(RunReport { results, comparisons })
}

/// Output of one trial: the statistic at each scheduled `n`, plus an
/// optional per-trial check value.
struct TrialOutput {
    stats: Vec<f64>,
    check: Option<[f64; 2]>,
}

/// Runs one experiment on a pool of `threads` workers (0 uses rayon's
/// default). Output is identical for every thread count.
pub fn run(plan: &ExperimentPlan, threads: usize) -> Result<ExperimentResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(plan))
}

fn run_in_pool(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    let mut diagnostics = Vec::new();
    let computed = theory_limit(plan, &mut diagnostics)?;
    let theory = plan.theory_limit.or(computed);

    let outputs: Vec<TrialOutput> = (0..plan.trials)
        .into_par_iter()
        .map(|t| run_trial(plan, t))
        .collect::<Result<Vec<_>>>()?;

    let orbit_kind = matches!(
        plan.kind,
        ExperimentKind::OrbitLaw { .. } | ExperimentKind::RandomOrbitLaw { .. }
    );
    let mut rows = Vec::with_capacity(plan.trials * plan.schedule.len());
    for (trial, out) in outputs.iter().enumerate() {
        for (&n, &s) in plan.schedule.iter().zip(&out.stats) {
            rows.push(Row {
                experiment: plan.name.clone(),
                trial,
                n,
                statistic: s,
                log_n: (n as f64).ln(),
                theory_limit: theory.unwrap_or(f64::NAN),
            });
        }
    }

    let zero_rows = if orbit_kind {
        rows.iter().filter(|r| r.statistic == f64::INFINITY).count()
    } else {
        0
    };
    let collapse = zero_rows > 0;
    let mut gates = Vec::new();
    let fit = if matches!(plan.kind, ExperimentKind::EntropyCheck { .. }) || collapse {
        None
    } else {
        let means = mean_by_n(&rows);
        let xs: Vec<f64> = means.iter().map(|(n, _)| (*n as f64).ln()).collect();
        let ys: Vec<f64> = means.iter().map(|(_, m)| *m).collect();
        Some(fit_slope(&xs, &ys)?)
    };

    if collapse {
        diagnostics.push(("zero_distance_rows".into(), zero_rows as f64));
    }
    if plan.expect_collapse {
        gates.push(Gate {
            name: "collapse".into(),
            pass: zero_rows == rows.len(),
            detail: format!(
                "m_n = 0 in {zero_rows} of {} rows (collapse detected: {collapse})",
                rows.len()
            ),
        });
    } else if collapse {
        gates.push(Gate {
            name: "fit".into(),
            pass: false,
            detail: format!("collapse detected: m_n = 0 in {zero_rows} of {} rows", rows.len()),
        });
    }

    if let ExperimentKind::EntropyCheck { .. } = plan.kind {
        let last = mean_by_n(&rows).last().map(|&(_, m)| m).unwrap_or(f64::NAN);
        diagnostics.push(("mean_estimate_at_n_max".into(), last));
        // Ratio estimator on the first trial; cancels the constant in C_k ~ c p^k.
        let fx = entropy_sample(plan, 0)?;
        let sigma = fx.alphabet().size().max(2) as f64;
        let k = ((0.6 * (fx.len() as f64).ln() / sigma.ln()).floor() as usize).max(1);
        let inc = renyi2_increment(&fx, k)?;
        diagnostics.push((format!("increment_estimate_k{k}"), inc.value));
        if let (Some(tol), Some(h)) = (plan.tolerance, theory) {
            gates.push(Gate {
                name: "estimate".into(),
                pass: tol.allows(last, h),
                detail: format!("mean plateau estimate {last:.5}, closed form {}", tol.describe(h)),
            });
        }
    } else if let (Some(tol), Some(limit), Some(f)) = (plan.tolerance, theory, fit) {
        gates.push(Gate {
            name: "slope".into(),
            pass: tol.allows(f.slope, limit),
            detail: format!("slope {:.4} ± {:.4}, theory {}", f.slope, f.stderr, tol.describe(limit)),
        });
    }

    if let ExperimentKind::ScrabbleLaw {
        weights, score_check_n, ..
    } = &plan.kind
    {
        let worst = |i: usize| outputs.iter().filter_map(|o| o.check).map(|c| c[i]).fold(0.0, f64::max);
        let (full, matched) = (worst(0), worst(1));
        let n_check = (*score_check_n).min(plan.n_max());
        diagnostics.push(("score_vs_stretched_prefix_max_diff".into(), full));
        diagnostics.push(("score_vs_common_length_max_diff".into(), matched));
        gates.push(Gate {
            name: "score_check".into(),
            pass: full <= weights.max() as f64,
            detail: format!(
                "max |V_n - M^f| over {} trials at raw n = {n_check}, each sequence stretched from its n-prefix, is {full}, allowed {}",
                plan.trials,
                weights.max()
            ),
        });
    }

    Ok(ExperimentResult {
        name: plan.name.clone(),
        kind: plan.kind.name(),
        rows,
        fit,
        theory_limit: theory,
        collapse,
        diagnostics,
        gates,
    })
}

/// Closed-form `H_2` of a source seen through an encoder, with diagnostics.
fn encoded_entropy(
    source: &Source,
    encoder: &EncoderSpec,
    diagnostics: &mut Vec<(String, f64)>,
) -> Result<Option<f64>> {
    Ok(match (source, encoder) {
        (Source::Iid(s), EncoderSpec::Identity) => Some(renyi2_iid(s.probs())),
        (Source::Markov(m), EncoderSpec::Identity) => Some(renyi2_markov(m.transition())?),
        (Source::Iid(s), EncoderSpec::ZeroInflation { epsilon }) => {
            let annealed = renyi2_zero_inflated_annealed(s.probs(), *epsilon)?;
            diagnostics.push(("annealed_entropy".into(), annealed));
            diagnostics.push(("annealed_limit".into(), 2.0 / annealed));
            Some(renyi2_zero_inflated(s.probs(), *epsilon)?)
        }
        (Source::Markov(_), EncoderSpec::ZeroInflation { .. }) => None,
        (src, EncoderSpec::Stretch(w)) => {
            let chain = match src {
                Source::Iid(s) => s.to_markov(),
                Source::Markov(m) => m.clone(),
            };
            let spec = renyi2_scrabble(chain.transition(), w)?;
            diagnostics.push(("p_eigen".into(), spec.p_eigen));
            diagnostics.push(("p_root".into(), spec.p_root));
            Some(spec.entropy())
        }
    })
}

fn theory_limit(plan: &ExperimentPlan, diagnostics: &mut Vec<(String, f64)>) -> Result<Option<f64>> {
    let two_over = |h: f64| if h > 0.0 { Some(2.0 / h) } else { None };
    match &plan.kind {
        ExperimentKind::LcsLaw { source, encoder } => {
            let h = encoded_entropy(source, encoder, diagnostics)?;
            if let Some(h) = h {
                diagnostics.push(("entropy".into(), h));
            }
            Ok(h.and_then(two_over))
        }
        ExperimentKind::ScrabbleLaw { source, weights, .. } => {
            let h = encoded_entropy(
                &Source::Markov(source.clone()),
                &EncoderSpec::Stretch(weights.clone()),
                diagnostics,
            )?;
            Ok(h.and_then(two_over))
        }
        ExperimentKind::EntropyCheck { source, encoder } => encoded_entropy(source, encoder, diagnostics),
        ExperimentKind::OrbitLaw { map, observation, .. } => {
            let base = match map.space() {
                Space::Torus(d) => d as f64,
                Space::Euclidean(d) => d as f64,
            };
            let c = match observation {
                Observation::Identity => Some(base),
                Observation::Projection { .. } => Some(1.0),
                Observation::LipschitzAffine { matrix, .. } => Some(rank(matrix).min(base as usize) as f64),
                Observation::Collapse { .. } => None,
            };
            if let Some(c) = c {
                diagnostics.push(("correlation_dimension".into(), c));
            }
            Ok(c.and_then(two_over))
        }
        ExperimentKind::RandomOrbitLaw { system, dimension } => {
            let estimate = |points: usize, radii: usize, diagnostics: &mut Vec<(String, f64)>| -> Result<f64> {
                let seed = derive_seed(plan.master_seed, &[plan.seed_stream, stream::AUX]);
                let orbit = iterate_random(system, DriverStart::Uniform, Start::Uniform, points, seed)?.orbit;
                let (lo, hi) = default_radius_window(points, orbit.space().dim());
                let fit = correlation_dimension(&orbit, lo, hi, radii)?;
                diagnostics.push(("dimension_estimate".into(), fit.dimension()));
                diagnostics.push(("dimension_stderr".into(), fit.fit.stderr));
                Ok(fit.dimension())
            };
            let c = match (dimension, system.driver()) {
                (DimensionSpec::Exact(c), _) => *c,
                (DimensionSpec::Empirical { points, radii }, _) => estimate(*points, *radii, diagnostics)?,
                (DimensionSpec::Default, crate::dynamics::Driver::IidUniformBall { .. }) => {
                    estimate(100_000, 8, diagnostics)?
                }
                (DimensionSpec::Default, _) => system.space().dim() as f64,
            };
            diagnostics.push(("correlation_dimension".into(), c));
            Ok(two_over(c))
        }
    }
}

/// Numerical rank of a 1x1 to 2x2 matrix.
fn rank(m: &[Vec<f64>]) -> usize {
    let nonzero = m.iter().flatten().any(|v| *v != 0.0);
    if !nonzero {
        return 0;
    }
    if m.len() == 2 && m[0].len() == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det != 0.0 {
            return 2;
        }
    }
    1
}

fn run_trial(plan: &ExperimentPlan, trial: usize) -> Result<TrialOutput> {
    let ts = plan.trial_seed(trial);
    let first = derive_seed(ts, &[stream::FIRST]);
    let second = derive_seed(ts, &[stream::SECOND]);
    let n_max = plan.n_max();
    match &plan.kind {
        ExperimentKind::LcsLaw { source, encoder } => {
            let x = source.sample(n_max, first)?;
            let y = source.sample(n_max, second)?;
            let enc = encoder.build(derive_seed(ts, &[stream::MASK]))?;
            let stats = plan
                .schedule
                .iter()
                .map(|&n| encoded_lcs(&x, &y, &enc, n).map(|r| r.value as f64))
                .collect::<Result<Vec<_>>>()?;
            Ok(TrialOutput { stats, check: None })
        }
        ExperimentKind::ScrabbleLaw {
            source,
            weights,
            score_check_n,
        } => {
            let src = Source::Markov(source.clone());
            let x = src.sample(n_max, first)?;
            let y = src.sample(n_max, second)?;
            let enc = Encoder::Stretch(StretchEncoder::new(weights.clone()));
            let stats = plan
                .schedule
                .iter()
                .map(|&n| encoded_lcs(&x, &y, &enc, n).map(|r| r.value as f64))
                .collect::<Result<Vec<_>>>()?;
            let n_check = (*score_check_n).min(n_max);
            let v = highest_score(&x, &y, n_check, weights)?.value as f64;
            let full = encoded_prefix_lcs(&x, &y, &enc, n_check)?.value as f64;
            // Diagnostic only: a common encoded length, the shorter stretched
            // prefix, can cut the best match in the longer one.
            let stretch = StretchEncoder::new(weights.clone());
            let matched = stretch
                .image_len(&x.as_slice()[..n_check])?
                .min(stretch.image_len(&y.as_slice()[..n_check])?);
            let at_matched = encoded_lcs(&x, &y, &enc, matched)?.value as f64;
            Ok(TrialOutput {
                stats,
                check: Some([(v - full).abs(), (v - at_matched).abs()]),
            })
        }
        ExperimentKind::OrbitLaw {
            map,
            observation,
            starts,
        } => {
            let a = observe(observation, &iterate_seeded(map, starts.0, n_max, first)?)?;
            let b = observe(observation, &iterate_seeded(map, starts.1, n_max, second)?)?;
            let p = distance_profile(&a, &b, &plan.schedule)?;
            Ok(TrialOutput {
                stats: p.m_values.iter().map(|m| -m.ln()).collect(),
                check: None,
            })
        }
        ExperimentKind::RandomOrbitLaw { system, .. } => {
            let a = iterate_random(system, DriverStart::Uniform, Start::Uniform, n_max, first)?.orbit;
            let b = iterate_random(system, DriverStart::Uniform, Start::Uniform, n_max, second)?.orbit;
            let p = distance_profile(&a, &b, &plan.schedule)?;
            Ok(TrialOutput {
                stats: p.m_values.iter().map(|m| -m.ln()).collect(),
                check: None,
            })
        }
        ExperimentKind::EntropyCheck { .. } => {
            let fx = entropy_sample(plan, trial)?;
            let stats = plan
                .schedule
                .iter()
                .map(|&n| renyi2_plateau(&fx.prefix(n)).map(|e| e.value))
                .collect::<Result<Vec<_>>>()?;
            Ok(TrialOutput { stats, check: None })
        }
    }
}

/// Encoded sample of length `n_max` for one entropy-check trial.
fn entropy_sample(plan: &ExperimentPlan, trial: usize) -> Result<crate::symbolic::SymbolSeq> {
    let ExperimentKind::EntropyCheck { source, encoder } = &plan.kind else {
        return invalid("not an entropy check");
    };
    let ts = plan.trial_seed(trial);
    let x = source.sample(plan.n_max(), derive_seed(ts, &[stream::FIRST]))?;
    encoder
        .build(derive_seed(ts, &[stream::MASK]))?
        .encode(&x, plan.n_max())
}
