//! Expected cutoff loss: exact enumeration for tiny instances, seeded Monte
//! Carlo otherwise, plus the log-log scaling fit and quantile envelope check.
//!
//! Per-trial losses are exact rationals. Trial `t` uses seed
//! `seed.derive(t)`: stream 0 draws the instance (for families), streams
//! `1..=k` draw the learner's samples. Trials run on the rayon pool and are
//! collected in order, so results do not depend on the thread count.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversaries::{for_each_sequence, HardInstance, InstanceEnsemble};
use crate::budget::Budget;
use crate::domain::TrainingSequence;
use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::loss::cutoff_loss;
use crate::partial::ln_floor2;
use crate::predictor::Predictor;
use crate::rational::Rational;
use crate::rng::Seed;

/// Something that maps a fixed number of training sequences to a predictor.
pub trait Fit: Sync {
    fn samples_required(&self) -> usize;
    fn fit_samples(&self, samples: &[TrainingSequence]) -> Result<Predictor>;
}

impl Fit for Learner {
    fn samples_required(&self) -> usize {
        Learner::samples_required(self)
    }

    fn fit_samples(&self, samples: &[TrainingSequence]) -> Result<Predictor> {
        self.fit(samples)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Rational>,
}

impl LossEstimate {
    /// Mean (summed exactly), sample-variance standard error and normal 95% CI.
    pub fn from_losses(losses: &[Rational]) -> Result<Self> {
        if losses.is_empty() {
            return Err(Error::Invalid("no trials".into()));
        }
        let t = losses.len();
        let mean = (losses.iter().sum::<Rational>() / Rational::from(t)).to_f64();
        let var = if t > 1 {
            losses.iter().map(|l| (l.to_f64() - mean).powi(2)).sum::<f64>() / (t - 1) as f64
        } else {
            0.0
        };
        let stderr = (var / t as f64).sqrt();
        let half = 1.96 * stderr;
        Ok(LossEstimate { mean, stderr, ci95: (mean - half, mean + half), trials: t, exact: None })
    }

    pub fn ci_halfwidth(&self) -> f64 {
        (self.ci95.1 - self.ci95.0) / 2.0
    }

    pub fn exact(value: Rational) -> Self {
        let m = value.to_f64();
        LossEstimate { mean: m, stderr: 0.0, ci95: (m, m), trials: 0, exact: Some(value) }
    }
}

/// Fraction of losses strictly above `threshold`.
pub fn fraction_exceeding(losses: &[Rational], threshold: &Rational) -> f64 {
    if losses.is_empty() {
        return 0.0;
    }
    losses.iter().filter(|l| *l > threshold).count() as f64 / losses.len() as f64
}

/// Exact law of the loss: `(loss, probability)` pairs, ascending in loss.
///
/// Enumerates every sequence of positive-mass atoms of length `k * n`
/// (`k` samples of size `n`), refusing more than `budget.max_sequences`.
pub fn exact_loss_distribution<F: Fit + ?Sized>(
    learner: &F,
    instance: &HardInstance,
    n: usize,
    budget: &Budget,
) -> Result<Vec<(Rational, Rational)>> {
    let d = &instance.distribution;
    let support = d.support();
    let k = learner.samples_required();
    let len = k * n;
    let count = (support.len() as f64).powi(len as i32);
    if count > budget.max_sequences as f64 {
        return Err(Error::budget(format!(
            "{} sequences ({} atoms, length {len}); limit {}",
            count, support.len(), budget.max_sequences
        )));
    }
    let mut law: std::collections::BTreeMap<Rational, Rational> = std::collections::BTreeMap::new();
    let mut err = None;
    for_each_sequence(support.len(), len, |t| {
        if err.is_some() {
            return;
        }
        let prob: Rational = t.iter().fold(Rational::one(), |acc, &i| acc * &d.atoms()[support[i]].mass);
        let samples: Vec<TrainingSequence> = t
            .chunks(n.max(1))
            .take(k)
            .map(|c| c.iter().map(|&i| d.example(support[i])).collect())
            .collect();
        let samples = if n == 0 { vec![TrainingSequence::default(); k] } else { samples };
        match learner
            .fit_samples(&samples)
            .and_then(|p| cutoff_loss(&p, d, &instance.params.gamma))
        {
            Ok(loss) => {
                let e = law.entry(loss).or_insert_with(Rational::zero);
                *e = &*e + prob;
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(law.into_iter().collect())
}

/// `E_S[loss]` by weighted enumeration of all samples.
pub fn exact_expected_loss<F: Fit + ?Sized>(
    learner: &F,
    instance: &HardInstance,
    n: usize,
    budget: &Budget,
) -> Result<Rational> {
    Ok(exact_loss_distribution(learner, instance, n, budget)?
        .iter()
        .map(|(l, p)| l * p)
        .sum())
}

/// Exact per-trial losses, in trial order.
pub fn mc_trial_losses<F: Fit + ?Sized, E: InstanceEnsemble + ?Sized>(
    learner: &F,
    ensemble: &E,
    n: usize,
    trials: usize,
    seed: Seed,
) -> Result<Vec<Rational>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ts = seed.derive(t);
            let inst = ensemble.draw(ts)?;
            let samples: Vec<TrainingSequence> = (1..=learner.samples_required() as u64)
                .map(|j| inst.distribution.sample(n, ts, j))
                .collect();
            let p = learner.fit_samples(&samples)?;
            cutoff_loss(&p, &inst.distribution, &inst.params.gamma)
        })
        .collect()
}

/// Monte Carlo estimate of the expected loss over `trials` seeded trials.
pub fn mc_expected_loss<F: Fit + ?Sized, E: InstanceEnsemble + ?Sized>(
    learner: &F,
    ensemble: &E,
    n: usize,
    trials: usize,
    seed: Seed,
) -> Result<LossEstimate> {
    if trials < 30 {
        return Err(Error::Invalid(format!("need at least 30 trials, got {trials}")));
    }
    LossEstimate::from_losses(&mc_trial_losses(learner, ensemble, n, trials, seed)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of `ln loss` on `ln n`.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::Invalid(format!("need at least 4 points, got {}", points.len())));
    }
    if let Some(&(n, _)) = points.iter().find(|&&(_, l)| l <= 0.0) {
        return Err(Error::Invalid(format!(
            "mean loss at n = {n} is zero; use more trials or smaller n"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, l)| l.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("all sample sizes are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ScalingFit { points: points.to_vec(), slope, intercept, r2 })
}

/// `8 (d Ln^2(2 e n / d) + ln(2 / delta)) / n`, with `Ln(x) = max(2, ln x)`.
pub fn single_interpolator_bound(d: usize, n: usize, delta: f64) -> f64 {
    let d = d as f64;
    let n = n as f64;
    let l = ln_floor2(2.0 * std::f64::consts::E * n / d);
    8.0 * (d * l * l + (2.0 / delta).ln()) / n
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub pass: bool,
    /// Empirical `(1 - delta)`-quantile of the losses.
    pub quantile: f64,
    pub bound: f64,
    /// The bound clamped to 1 (a loss never exceeds 1).
    pub effective_bound: f64,
    pub margin: f64,
}

/// Compares the empirical `(1 - delta)`-quantile (the smallest sample value
/// with at least a `1 - delta` fraction of samples at or below it) with `bound`.
pub fn quantile_envelope_check(losses: &[f64], delta: f64, bound: f64) -> Result<EnvelopeCheck> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid(format!("delta = {delta} must lie in (0, 1)")));
    }
    if (losses.len() as f64) < 1.0 / delta {
        return Err(Error::Invalid(format!(
            "need at least {} samples for delta = {delta}, got {}",
            (1.0 / delta).ceil(),
            losses.len()
        )));
    }
    let mut v = losses.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = (((1.0 - delta) * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    let quantile = v[idx];
    let effective_bound = bound.min(1.0);
    Ok(EnvelopeCheck {
        pass: quantile <= effective_bound,
        quantile,
        bound,
        effective_bound,
        margin: effective_bound - quantile,
    })
}

/// One line of experiment output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub theorem: String,
    pub gamma: String,
    pub epsilon: String,
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Column names of the CSV output, in order.
pub const CSV_HEADER: [&str; 12] = [
    "experiment", "theorem", "gamma", "epsilon", "d", "n", "trials", "mean", "ci_lo", "ci_hi", "threshold", "pass",
];

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::HypothesisClass;
    use crate::distribution::FiniteDistribution;
    use crate::domain::Point;
    use crate::learners::Interpolator;
    use rand::Rng;

    struct Constant(Rational);

    impl Fit for Constant {
        fn samples_required(&self) -> usize {
            1
        }
        fn fit_samples(&self, _: &[TrainingSequence]) -> Result<Predictor> {
            Ok(Predictor::Constant { value: self.0.clone() })
        }
    }

    fn small_instance() -> HardInstance {
        let class = HypothesisClass::cantor(Rational::new(1, 2), 1, 3).unwrap();
        let witness = class.cantor_member(&[3]).unwrap();
        let dist = FiniteDistribution::from_triples([
            (Point::Nat(1), witness.eval(&Point::Nat(1)).unwrap().clone(), Rational::new(1, 2)),
            (Point::Nat(3), Rational::zero(), Rational::new(1, 2)),
        ])
        .unwrap();
        HardInstance {
            tag: crate::adversaries::TheoremTag::Custom,
            class,
            distribution: dist,
            witness,
            params: crate::adversaries::InstanceParams { gamma: Rational::new(1, 2), d: 1, ..Default::default() },
            certificate: None,
            support: None,
        }
    }

    #[test]
    fn exact_trivial_cases() {
        let inst = small_instance();
        let b = Budget::default();
        let far = Constant(Rational::one());
        // label at 1 is gamma_{3} = 2/3, so 1 is close there; only the zero atom is missed
        assert_eq!(exact_expected_loss(&far, &inst, 2, &b).unwrap(), Rational::new(1, 2));
        let witness = Learner::SingleInterpolator(Interpolator::Generic(inst.class.clone()));
        assert!(exact_expected_loss(&witness, &inst, 0, &b).unwrap() > Rational::zero());
        // with both points seen the interpolator is exact
        let law = exact_loss_distribution(&witness, &inst, 2, &b).unwrap();
        let total: Rational = law.iter().map(|(_, p)| p).sum();
        assert!(total.is_one());
        assert!(exact_expected_loss(&witness, &inst, 30, &b).is_err());
    }

    #[test]
    fn constant_loss_has_zero_stderr() {
        let inst = small_instance();
        let est = mc_expected_loss(&Constant(Rational::one()), &inst, 5, 40, Seed(1)).unwrap();
        assert_eq!(est.mean, 0.5);
        assert_eq!(est.stderr, 0.0);
        assert!(mc_expected_loss(&Constant(Rational::one()), &inst, 5, 10, Seed(1)).is_err());
    }

    #[test]
    fn mc_is_reproducible_across_pools() {
        let inst = small_instance();
        let l = Learner::MedianOfThree(Interpolator::Generic(inst.class.clone()));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_trial_losses(&l, &inst, 1, 300, Seed(42)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn ci_covers_bernoulli_mean() {
        let mut covered = 0;
        for s in 0..100 {
            let mut rng = Seed(s).rng(0);
            let losses: Vec<Rational> = (0..200)
                .map(|_| if rng.random_range(0..4) == 0 { Rational::one() } else { Rational::zero() })
                .collect();
            let e = LossEstimate::from_losses(&losses).unwrap();
            assert!(e.ci95.0 <= e.mean && e.mean <= e.ci95.1);
            if e.ci95.0 <= 0.25 && 0.25 <= e.ci95.1 {
                covered += 1;
            }
        }
        assert!(covered >= 90, "{covered}");
    }

    #[test]
    fn scaling_fit_examples() {
        let ns = [32.0, 64.0, 128.0, 256.0];
        let f = scaling_fit(&ns.map(|n| (n, 3.0 / n))).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let f = scaling_fit(&ns.map(|n| (n, 3.0 / (n * n)))).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!(scaling_fit(&ns[..3].iter().map(|&n| (n, 1.0 / n)).collect::<Vec<_>>()).is_err());
        assert!(scaling_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn envelope_examples() {
        // 8 (2 Ln^2(64 e) + ln 20) / 64, about 7.03: vacuous, clamps at 1
        let b = single_interpolator_bound(2, 64, 0.1);
        let expected = 8.0 * (2.0 * (64.0 * std::f64::consts::E).ln().powi(2) + 20f64.ln()) / 64.0;
        assert!((b - expected).abs() < 1e-12);
        assert!((b - 7.03).abs() < 0.01, "{b}");
        let c = quantile_envelope_check(&[0.0; 20], 0.1, b).unwrap();
        assert!(c.pass);
        assert_eq!(c.effective_bound, 1.0);
        assert_eq!(c.margin, 1.0);
        assert!(quantile_envelope_check(&[0.0; 5], 0.1, 0.5).is_err());
        // 90th percentile of 1..=10 (as tenths) is 0.9
        let v: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        assert_eq!(quantile_envelope_check(&v, 0.1, 0.95).unwrap().quantile, 0.9);
        let n4096 = single_interpolator_bound(2, 4096, 0.1);
        assert!(n4096 > 0.3 && n4096 < 0.4, "{n4096}");
    }

    #[test]
    fn csv_round_trip() {
        let row = ResultRow {
            experiment: "x".into(),
            theorem: "thm1".into(),
            gamma: "1/2".into(),
            epsilon: "1/32".into(),
            d: 2,
            n: 2,
            trials: 0,
            mean: 0.25,
            ci_lo: 0.25,
            ci_hi: 0.25,
            threshold: 0.03125,
            pass: true,
        };
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), vec![row]);
    }
}
