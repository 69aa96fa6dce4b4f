//! One runnable check per result, shared by the CLI `reproduce` command and
//! the acceptance tests.
//!
//! Each runner validates its configuration before computing, returns a
//! [`Report`] with one [`ResultRow`] per measured quantity and one
//! [`Verdict`] per checked inequality. Reports embed their configuration,
//! so re-running `report.config` reproduces `report.rows` exactly.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::{
    thm1_instance, thm2_instance, thm3_instance, thm3_instance_with_universe, thm5_instance, HardInstance,
    InstanceParams, SupportFamily, TheoremTag,
};
use crate::budget::Budget;
use crate::class::HypothesisClass;
use crate::distribution::{Atom, FiniteDistribution};
use crate::domain::Point;
use crate::error::{Error, Result};
use crate::learners::{AggregationRule, Interpolator, Learner, LearnerSpec, Partitioner};
use crate::mc::{
    exact_loss_distribution, fraction_exceeding, mc_trial_losses, quantile_envelope_check, scaling_fit,
    single_interpolator_bound, LossEstimate, ResultRow,
};
use crate::partial::{
    disambiguate, is_disambiguation_of, ln_disambiguation_bound, partial_vc_dimension, PartialClass, PartialConcept,
    PartialValue,
};
use crate::rational::Rational;
use crate::rng::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub tag: TheoremTag,
    pub gamma: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Sample sizes; empty means the result's own ceiling `n_max`.
    #[serde(default)]
    pub n: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<usize>,
    /// Class universe (Cantor) or universe override (split families).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Largest random class drawn by the disambiguation suite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_class_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerSpec>,
}

impl ExperimentConfig {
    /// The default desk-scale parameters for each tag.
    pub fn defaults(tag: TheoremTag) -> Self {
        let base = ExperimentConfig {
            tag,
            gamma: Rational::new(1, 2),
            epsilon: None,
            d: None,
            n: Vec::new(),
            trials: 0,
            seed: 7,
            m_bound: None,
            universe: None,
            delta: None,
            max_class_size: None,
            learner: None,
        };
        match tag {
            TheoremTag::Thm1 => ExperimentConfig {
                epsilon: Some(Rational::new(1, 32)),
                d: Some(2),
                universe: Some(5),
                ..base
            },
            TheoremTag::Thm2 => ExperimentConfig {
                epsilon: Some(Rational::new(1, 64)),
                d: Some(2),
                m_bound: Some(3),
                trials: 4000,
                ..base
            },
            TheoremTag::Thm3 => ExperimentConfig {
                epsilon: Some(Rational::new(1, 2)),
                n: vec![4],
                m_bound: Some(3),
                universe: Some(784),
                trials: 1000,
                ..base
            },
            TheoremTag::Thm4 => ExperimentConfig {
                d: Some(4),
                universe: Some(12),
                n: vec![32, 64, 128, 256, 512, 1024],
                trials: 2000,
                ..base
            },
            TheoremTag::Thm5 => ExperimentConfig {
                epsilon: Some(Rational::new(1, 256)),
                d: Some(4),
                trials: 4000,
                ..base
            },
            TheoremTag::LemmaInterp => ExperimentConfig {
                d: Some(2),
                universe: Some(6),
                n: vec![4096],
                trials: 400,
                delta: Some(0.1),
                ..base
            },
            TheoremTag::LemmaDisamb => ExperimentConfig {
                d: Some(3),
                n: vec![10],
                trials: 50,
                max_class_size: Some(40),
                ..base
            },
            TheoremTag::Custom => base,
        }
    }

    fn epsilon(&self) -> Result<&Rational> {
        self.epsilon
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("{} needs an epsilon", self.tag)))
    }

    fn d(&self) -> Result<usize> {
        self.d.ok_or_else(|| Error::Precondition(format!("{} needs d", self.tag)))
    }

    fn universe(&self) -> Result<u64> {
        self.universe
            .ok_or_else(|| Error::Precondition(format!("{} needs a universe", self.tag)))
    }

    fn seed(&self) -> Seed {
        Seed(self.seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
    pub wall_clock_secs: f64,
    pub version: String,
    pub seed: u64,
}

impl Report {
    fn new(config: &ExperimentConfig, rows: Vec<ResultRow>, verdicts: Vec<Verdict>, start: Instant) -> Self {
        Report {
            pass: verdicts.iter().all(|v| v.pass),
            config: config.clone(),
            rows,
            verdicts,
            wall_clock_secs: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
        }
    }
}

/// Runs the check selected by `config.tag`.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    match config.tag {
        TheoremTag::Thm1 => run_thm1(config),
        TheoremTag::Thm2 => run_thm2(config),
        TheoremTag::Thm3 => run_thm3(config),
        TheoremTag::Thm4 => run_thm4(config),
        TheoremTag::Thm5 => run_thm5(config),
        TheoremTag::LemmaInterp => run_lemma_interp(config),
        TheoremTag::LemmaDisamb => run_lemma_disamb(config),
        TheoremTag::Custom => Err(Error::Invalid("custom experiments have no runner".into())),
    }
}

/// Re-runs a report's configuration; true when the rows come out identical.
pub fn replay(report: &Report) -> Result<(Report, bool)> {
    let again = run(&report.config)?;
    let same = again.rows == report.rows;
    Ok((again, same))
}

fn fmt_opt(r: Option<&Rational>) -> String {
    r.map(Rational::to_string).unwrap_or_default()
}

#[allow(clippy::too_many_arguments)]
fn row(
    experiment: impl Into<String>,
    config: &ExperimentConfig,
    d: usize,
    n: usize,
    trials: usize,
    est: &LossEstimate,
    threshold: f64,
    pass: bool,
) -> ResultRow {
    ResultRow {
        experiment: experiment.into(),
        theorem: config.tag.to_string(),
        gamma: config.gamma.to_string(),
        epsilon: fmt_opt(config.epsilon.as_ref()),
        d,
        n,
        trials,
        mean: est.mean,
        ci_lo: est.ci95.0,
        ci_hi: est.ci95.1,
        threshold,
        pass,
    }
}

fn sample_sizes(config: &ExperimentConfig, n_max: usize) -> Result<Vec<usize>> {
    let ns = if config.n.is_empty() { vec![n_max] } else { config.n.clone() };
    if let Some(&n) = ns.iter().find(|&&n| n > n_max) {
        return Err(Error::Precondition(format!("n = {n} exceeds the sample ceiling n_max = {n_max}")));
    }
    if ns.contains(&0) {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    Ok(ns)
}

fn check_trials(config: &ExperimentConfig, at_least: usize) -> Result<()> {
    if config.trials < at_least {
        return Err(Error::Precondition(format!("need trials >= {at_least}, got {}", config.trials)));
    }
    Ok(())
}

/// Proper aggregations of the worst-case interpolator on the two-tier
/// instance, each with its exact loss law.
pub fn thm1_learners(inst: &HardInstance, n: usize, seed: Seed) -> Vec<(String, Learner)> {
    let cert = inst.certificate.clone().expect("two-tier instances carry a certificate");
    let adv = Interpolator::Adversarial(cert);
    let mut out = vec![("single".to_string(), Learner::SingleInterpolator(adv.clone()))];
    let odd: Vec<(String, Partitioner)> = vec![
        ("blocks1".into(), Partitioner::DisjointBlocks { m: 1 }),
        ("blocks3".into(), Partitioner::DisjointBlocks { m: 3 }),
        ("windows3".into(), Partitioner::OverlappingWindows { m: 3, width: n.div_ceil(2).max(1) }),
        ("bootstrap3".into(), Partitioner::Bootstrap { m: 3, size: n, seed }),
    ];
    let even: Vec<(String, Partitioner)> = vec![
        ("blocks2".into(), Partitioner::DisjointBlocks { m: 2 }),
        ("bootstrap4".into(), Partitioner::Bootstrap { m: 4, size: n, seed }),
    ];
    for (rname, rule) in [("min", AggregationRule::Min), ("max", AggregationRule::Max), ("median", AggregationRule::Median)] {
        let parts = if rule == AggregationRule::Median { odd.clone() } else { odd.iter().chain(&even).cloned().collect() };
        for (pname, p) in parts {
            out.push((
                format!("{rname}/{pname}"),
                Learner::InterpolatorAggregation { interpolator: adv.clone(), partitioner: p, rule: rule.clone() },
            ));
        }
    }
    out
}

/// Two-tier instance, exact expectations for every proper aggregation.
pub fn run_thm1(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let eps = config.epsilon()?.clone();
    let d = config.d()?;
    let universe = config.universe()?;
    if d < 2 {
        return Err(Error::Precondition(format!("need d >= 2, got {d}")));
    }
    let class = HypothesisClass::cantor(config.gamma.clone(), d, universe)
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let budget = Budget::from_env();
    let pool = class.natural_pool(64)?;
    let inst = thm1_instance(&class, &config.gamma, &eps, &pool, &budget)?;
    let n_max = inst.params.n_max.unwrap_or(0);
    let ns = sample_sizes(config, n_max)?;
    let two_eps = Rational::integer(2) * &eps;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &n in &ns {
        for (name, learner) in thm1_learners(&inst, n, config.seed()) {
            let law = exact_loss_distribution(&learner, &inst, n, &budget)?;
            let mean: Rational = law.iter().map(|(l, p)| l * p).sum();
            let tail: Rational = law.iter().filter(|(l, _)| *l > two_eps).map(|(_, p)| p).sum();
            let pass_mean = mean > eps;
            let pass_tail = tail >= Rational::new(1, 2);
            let est = LossEstimate::exact(mean.clone());
            let sequences = law.len();
            rows.push(row(format!("thm1/{name}"), config, inst.params.d, n, sequences, &est, eps.to_f64(), pass_mean && pass_tail));
            verdicts.push(Verdict {
                criterion: format!("thm1 {name} n={n}: E[loss] > eps and P(loss > 2 eps) >= 1/2"),
                pass: pass_mean && pass_tail,
                detail: format!("E[loss] = {mean}, P(loss > {two_eps}) = {tail}, eps = {eps}"),
            });
        }
    }
    Ok(Report::new(config, rows, verdicts, start))
}

fn family_learner(config: &ExperimentConfig, family: &SupportFamily, default: Learner, max_members: Option<usize>) -> Result<Learner> {
    let Some(spec) = &config.learner else { return Ok(default) };
    let members = match spec {
        LearnerSpec::Single { .. } | LearnerSpec::ProperErm { .. } => 1,
        LearnerSpec::Median3 { .. } => 3,
        LearnerSpec::Agg { partition, .. } => partition.blocks(),
        LearnerSpec::Finite { m, .. } => *m,
    };
    if let Some(limit) = max_members {
        if members > limit {
            return Err(Error::Precondition(format!(
                "learner aggregates {members} hypotheses, more than m_bound = {limit}"
            )));
        }
    }
    spec.build(&family.class, None)
}

fn mean_and_tail(losses: &[Rational], threshold: &Rational) -> Result<(LossEstimate, f64)> {
    Ok((LossEstimate::from_losses(losses)?, fraction_exceeding(losses, threshold)))
}

/// Pinned Cantor family, median of three over fresh supports.
pub fn run_thm2(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let eps = config.epsilon()?.clone();
    let m_bound = config.m_bound.unwrap_or(3);
    let family = thm2_instance(&config.gamma, config.d()?, &eps, m_bound)?;
    check_trials(config, 30)?;
    let ns = sample_sizes(config, family.params.n_max.unwrap_or(0))?;
    let learner = family_learner(
        config,
        &family,
        Learner::MedianOfThree(Interpolator::Generic(family.class.clone())),
        Some(m_bound),
    )?;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &n in &ns {
        let losses = mc_trial_losses(&learner, &family, n, config.trials, config.seed())?;
        let (est, tail) = mean_and_tail(&losses, &eps)?;
        let target = 2.0 * eps.to_f64();
        let pass_mean = est.mean > target - est.ci_halfwidth();
        let pass_tail = tail >= 1.0 / 16.0 - 0.02;
        rows.push(row("thm2/mean", config, family.params.d, n, config.trials, &est, target, pass_mean));
        verdicts.push(Verdict {
            criterion: format!("thm2 n={n}: mean loss > 2 eps - CI halfwidth"),
            pass: pass_mean,
            detail: format!("mean = {:.5} +/- {:.5}, 2 eps = {target:.5}, k_u = {}", est.mean, est.ci_halfwidth(), family.k_u()),
        });
        verdicts.push(Verdict {
            criterion: format!("thm2 n={n}: P(loss > eps) >= 1/16 - 0.02"),
            pass: pass_tail,
            detail: format!("frequency = {tail:.4}"),
        });
    }
    Ok(Report::new(config, rows, verdicts, start))
}

/// Sqrt-size split family, median of three over fresh supports.
pub fn run_thm3(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let eps = config.epsilon()?.clone();
    let m_bound = config.m_bound.unwrap_or(3);
    let n_prime = *config.n.first().unwrap_or(&4);
    let family = match config.universe {
        Some(k) => thm3_instance_with_universe(&config.gamma, &eps, n_prime, m_bound, k)?,
        None => thm3_instance(&config.gamma, &eps, n_prime, m_bound)?,
    };
    check_trials(config, 30)?;
    let ns = sample_sizes(config, n_prime)?;
    let learner = family_learner(
        config,
        &family,
        Learner::MedianOfThree(Interpolator::Generic(family.class.clone())),
        Some(m_bound),
    )?;
    let target = 1.0 - eps.to_f64() / 2.0;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &n in &ns {
        let losses = mc_trial_losses(&learner, &family, n, config.trials, config.seed())?;
        let est = LossEstimate::from_losses(&losses)?;
        let pass = est.mean >= target - est.ci_halfwidth();
        rows.push(row("thm3/mean", config, 1, n, config.trials, &est, target, pass));
        verdicts.push(Verdict {
            criterion: format!("thm3 n={n}: mean loss >= 1 - eps/2 - CI halfwidth"),
            pass,
            detail: format!("mean = {:.4} +/- {:.4}, 1 - eps/2 = {target}, k_u = {}", est.mean, est.ci_halfwidth(), family.k_u()),
        });
    }
    Ok(Report::new(config, rows, verdicts, start))
}

/// Light-atom masses for the fixed two-tier distribution used by the
/// scaling check: `d - 1` powers of two spread between 2^-6 and 2^-11.
pub fn scaling_light_masses(d: usize) -> Vec<Rational> {
    match d {
        0 | 1 => Vec::new(),
        2 => vec![Rational::new(1, 256)],
        _ => (0..d - 1)
            .map(|j| {
                let e = 6 + (5.0 * j as f64 / (d - 2) as f64).round() as u32;
                Rational::from_big(1.into(), num_bigint::BigInt::from(2u8).pow(e))
            })
            .collect(),
    }
}

/// Cantor instance with zero set the top `d` points of the universe: the
/// first carries the heavy mass, the rest the given light masses.
pub fn top_set_instance(
    tag: TheoremTag,
    gamma: &Rational,
    d: usize,
    universe: u64,
    light: &[Rational],
) -> Result<HardInstance> {
    let class = HypothesisClass::cantor(gamma.clone(), d, universe).map_err(|e| Error::Precondition(e.to_string()))?;
    if light.len() + 1 != d {
        return Err(Error::Invalid(format!("{} light masses for d = {d}", light.len())));
    }
    let top: Vec<u64> = (universe - d as u64 + 1..=universe).collect();
    let witness = class.cantor_member(&top)?;
    let heavy = Rational::one() - light.iter().sum::<Rational>();
    let atoms = top
        .iter()
        .zip(std::iter::once(&heavy).chain(light))
        .map(|(&x, m)| Atom { point: Point::Nat(x), label: Rational::zero(), mass: m.clone() })
        .collect();
    let inst = HardInstance {
        tag,
        class,
        distribution: FiniteDistribution::new(atoms)?,
        witness,
        params: InstanceParams { gamma: gamma.clone(), d, ..Default::default() },
        certificate: None,
        support: None,
    };
    inst.validate()?;
    Ok(inst)
}

/// Median of three on a fixed two-tier Cantor instance across sample sizes.
pub fn run_thm4(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let d = config.d()?;
    let universe = config.universe()?;
    if d < 2 {
        return Err(Error::Precondition(format!("need d >= 2, got {d}")));
    }
    if config.n.len() < 4 || config.n.contains(&0) {
        return Err(Error::Precondition("need at least 4 sample sizes, all >= 1".into()));
    }
    check_trials(config, 30)?;
    let inst = top_set_instance(TheoremTag::Thm4, &config.gamma, d, universe, &scaling_light_masses(d))?;
    let interp = Interpolator::Generic(inst.class.clone());
    let median = Learner::MedianOfThree(interp.clone());
    let single = Learner::SingleInterpolator(interp);
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &n in &config.n {
        let est = LossEstimate::from_losses(&mc_trial_losses(&median, &inst, n, config.trials, config.seed())?)?;
        points.push((n as f64, est.mean));
        rows.push(row("thm4/median3", config, d, n, config.trials, &est, 0.0, true));
    }
    let n_last = *config.n.last().unwrap();
    let single_est =
        LossEstimate::from_losses(&mc_trial_losses(&single, &inst, n_last, config.trials, config.seed().derive(1))?)?;
    rows.push(row("thm4/single", config, d, n_last, config.trials, &single_est, 0.0, true));
    let mut verdicts = Vec::new();
    match scaling_fit(&points) {
        Ok(fit) => {
            let pass_slope = (-1.3..=-0.8).contains(&fit.slope);
            let pass_r2 = fit.r2 >= 0.9;
            verdicts.push(Verdict {
                criterion: "thm4: log-log slope in [-1.3, -0.8]".into(),
                pass: pass_slope,
                detail: format!("slope = {:.4}, intercept = {:.4}", fit.slope, fit.intercept),
            });
            verdicts.push(Verdict { criterion: "thm4: r^2 >= 0.9".into(), pass: pass_r2, detail: format!("r^2 = {:.4}", fit.r2) });
        }
        Err(e) => verdicts.push(Verdict { criterion: "thm4: scaling fit".into(), pass: false, detail: e.to_string() }),
    }
    let last = points.last().unwrap().1;
    verdicts.push(Verdict {
        criterion: format!("thm4: median-of-three below single interpolator at n={n_last}"),
        pass: last < single_est.mean,
        detail: format!("median = {last:.6}, single = {:.6}", single_est.mean),
    });
    let fit_pass = verdicts.iter().all(|v| v.pass);
    for r in rows.iter_mut() {
        r.pass = fit_pass;
    }
    Ok(Report::new(config, rows, verdicts, start))
}

/// Complement split family, proper ERM over fresh supports.
pub fn run_thm5(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let eps = config.epsilon()?.clone();
    let family = thm5_instance(&config.gamma, config.d()?, &eps)?;
    check_trials(config, 30)?;
    let ns = sample_sizes(config, family.params.n_max.unwrap_or(0))?;
    let learner = family_learner(
        config,
        &family,
        Learner::ProperErm { class: family.class.clone(), gamma: None },
        None,
    )?;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &n in &ns {
        let losses = mc_trial_losses(&learner, &family, n, config.trials, config.seed())?;
        let (est, tail) = mean_and_tail(&losses, &eps)?;
        let target = 4.0 * eps.to_f64() / 3.0;
        let pass_mean = est.mean >= target - est.ci_halfwidth();
        let pass_tail = tail >= 1.0 / 48.0 - 0.01;
        rows.push(row("thm5/mean", config, family.params.d, n, config.trials, &est, target, pass_mean));
        verdicts.push(Verdict {
            criterion: format!("thm5 n={n}: mean loss >= 4 eps/3 - CI halfwidth"),
            pass: pass_mean,
            detail: format!("mean = {:.5} +/- {:.5}, 4 eps/3 = {target:.5}, k_u = {}", est.mean, est.ci_halfwidth(), family.k_u()),
        });
        verdicts.push(Verdict {
            criterion: format!("thm5 n={n}: P(loss > eps) >= 1/48 - 0.01"),
            pass: pass_tail,
            detail: format!("frequency = {tail:.4}"),
        });
    }
    Ok(Report::new(config, rows, verdicts, start))
}

/// Generic interpolator's loss quantile against the single-interpolator bound.
pub fn run_lemma_interp(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let d = config.d()?;
    let universe = config.universe()?;
    let delta = config.delta.unwrap_or(0.1);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("need 0 < delta < 1, got {delta}")));
    }
    if (config.trials as f64) < 1.0 / delta {
        return Err(Error::Precondition(format!("need trials >= 1/delta = {}", (1.0 / delta).ceil())));
    }
    if d < 2 || config.n.is_empty() || config.n.contains(&0) {
        return Err(Error::Precondition("need d >= 2 and sample sizes >= 1".into()));
    }
    // a fixed light tier of total mass 2^-12 split over the d - 1 light points
    let light = vec![Rational::new(1, 4096 * (d as i64 - 1)); d - 1];
    let inst = top_set_instance(TheoremTag::LemmaInterp, &config.gamma, d, universe, &light)?;
    let learner = Learner::SingleInterpolator(Interpolator::Generic(inst.class.clone()));
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &n in &config.n {
        let losses = mc_trial_losses(&learner, &inst, n, config.trials, config.seed())?;
        let est = LossEstimate::from_losses(&losses)?;
        let bound = single_interpolator_bound(d, n, delta);
        let floats: Vec<f64> = losses.iter().map(Rational::to_f64).collect();
        let check = quantile_envelope_check(&floats, delta, bound)?;
        rows.push(row("lemma-interp/quantile", config, d, n, config.trials, &est, check.effective_bound, check.pass));
        verdicts.push(Verdict {
            criterion: format!("lemma-interp n={n}: (1 - delta)-quantile <= bound"),
            pass: check.pass,
            detail: format!("quantile = {:.6}, bound = {:.4}, margin = {:.4}", check.quantile, check.bound, check.margin),
        });
    }
    Ok(Report::new(config, rows, verdicts, start))
}

/// A random partial class over `n` points with between 2 and `max_size`
/// concepts and VC dimension in `1..=max_vc`, from stream 0 of `seed`.
pub fn random_partial_class(n: usize, max_size: usize, max_vc: usize, seed: Seed) -> Result<PartialClass> {
    let mut rng = seed.rng(0);
    for _ in 0..10_000 {
        let size = rng.random_range(2..=max_size.max(2));
        let star = rng.random_range(0.3..0.9);
        let concepts = (0..size)
            .map(|_| {
                PartialConcept(
                    (0..n)
                        .map(|_| {
                            if rng.random_bool(star) {
                                PartialValue::Star
                            } else if rng.random_bool(0.5) {
                                PartialValue::One
                            } else {
                                PartialValue::Zero
                            }
                        })
                        .collect(),
                )
            })
            .collect();
        let class = PartialClass::new(n, concepts)?;
        let vc = partial_vc_dimension(&class)?;
        if (1..=max_vc).contains(&vc) {
            return Ok(class);
        }
    }
    Err(Error::Precondition(format!("could not draw a class with VC dimension in 1..={max_vc}")))
}

/// Greedy disambiguation of random partial classes.
pub fn run_lemma_disamb(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let n = *config.n.first().unwrap_or(&10);
    let max_vc = config.d()?;
    let max_size = config.max_class_size.unwrap_or(40);
    if n == 0 || n > 20 || max_vc == 0 || max_size < 2 {
        return Err(Error::Precondition("need 1 <= n <= 20, d >= 1 and class size >= 2".into()));
    }
    let budget = Budget::from_env();
    let mut rows = Vec::new();
    let mut all_prop = true;
    let mut all_size = true;
    let mut all_bound = true;
    let mut worst_margin = f64::INFINITY;
    for i in 0..config.trials {
        let class = random_partial_class(n, max_size, max_vc, config.seed().derive(i as u64))?;
        let d = partial_vc_dimension(&class)?;
        let r = disambiguate(&class, &budget)?;
        let prop = is_disambiguation_of(&r.total, &class);
        let size_ok = r.total.len() <= class.len();
        let ln_size = (r.total.len() as f64).ln();
        let bound = ln_disambiguation_bound(d, n);
        let bound_ok = ln_size <= bound;
        all_prop &= prop;
        all_size &= size_ok;
        all_bound &= bound_ok;
        worst_margin = worst_margin.min(bound - ln_size);
        let est = LossEstimate::exact(Rational::zero());
        let mut rw = row(format!("lemma-disamb/class{i}"), config, d, n, class.len(), &est, bound, prop && size_ok && bound_ok);
        rw.mean = ln_size;
        rw.ci_lo = ln_size;
        rw.ci_hi = ln_size;
        rows.push(rw);
    }
    let k = config.trials;
    let verdicts = vec![
        Verdict { criterion: "lemma-disamb: every completion agrees with its partial concept".into(), pass: all_prop, detail: format!("{k} classes") },
        Verdict { criterion: "lemma-disamb: |disambiguation| <= |class|".into(), pass: all_size, detail: format!("{k} classes") },
        Verdict {
            criterion: "lemma-disamb: ln|disambiguation| <= 2 d Ln^2(e n / d)".into(),
            pass: all_bound,
            detail: format!("smallest margin {worst_margin:.3}"),
        },
    ];
    Ok(Report::new(config, rows, verdicts, start))
}
