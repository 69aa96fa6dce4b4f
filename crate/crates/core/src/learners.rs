//! Interpolators, partitioners, aggregation and the learners built from them.
//!
//! A learner consumes one or more training sequences and returns a
//! [`Predictor`]. Everything here is deterministic given its inputs; the only
//! randomness (bootstrap partitions, sample draws) is keyed by explicit seeds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::class::HypothesisClass;
use crate::dims::ShatterCertificate;
use crate::distribution::FiniteDistribution;
use crate::domain::TrainingSequence;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::loss::empirical_cutoff_loss;
use crate::predictor::Predictor;
use crate::rational::Rational;
use crate::rng::Seed;

pub use crate::predictor::AggregationRule;

/// First consistent hypothesis in the class's canonical order.
pub fn generic_interpolator(class: &HypothesisClass, s: &TrainingSequence) -> Result<Hypothesis> {
    class
        .first_consistent(s)?
        .ok_or_else(|| Error::NotRealizable(format!("no hypothesis fits the {} examples", s.len())))
}

/// The worst-case interpolator on a shattered set: returns the certificate's
/// pattern hypothesis that matches the witness on every observed point and is
/// gamma-far from it on every unobserved one.
pub fn adversarial_interpolator(cert: &ShatterCertificate, s: &TrainingSequence) -> Result<Hypothesis> {
    let labels = cert.witness.restrict(&cert.points)?;
    let mut far = vec![true; cert.points.len()];
    for e in s {
        let i = cert.points.iter().position(|p| *p == e.point).ok_or_else(|| {
            Error::Invalid(format!("example at {} lies outside the shattered set", e.point))
        })?;
        if e.label != labels[i] {
            return Err(Error::NotRealizable(format!(
                "label {} at {} differs from the witness value {}",
                e.label, e.point, labels[i]
            )));
        }
        far[i] = false;
    }
    let h = cert.pattern(&far).clone();
    debug_assert!(h.interpolates(s).unwrap_or(false));
    Ok(h)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Interpolator {
    Generic(HypothesisClass),
    Adversarial(ShatterCertificate),
}

impl Interpolator {
    pub fn fit(&self, s: &TrainingSequence) -> Result<Hypothesis> {
        match self {
            Interpolator::Generic(class) => generic_interpolator(class, s),
            Interpolator::Adversarial(cert) => adversarial_interpolator(cert, s),
        }
    }
}

/// Pointwise aggregation of a nonempty list of hypotheses.
pub fn aggregate(rule: AggregationRule, hs: Vec<Hypothesis>) -> Result<Predictor> {
    Predictor::aggregate(rule, hs)
}

/// How a training sequence is cut into `m` sub-sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Partitioner {
    /// Contiguous blocks; when `m` does not divide `n`, earlier blocks get
    /// one extra example.
    #[serde(alias = "disjoint")]
    DisjointBlocks { m: usize },
    /// Block `j` is the cyclic window of `width` examples starting at
    /// `floor(j n / m)`.
    #[serde(alias = "windows")]
    OverlappingWindows { m: usize, width: usize },
    /// Block `j` draws `size` examples with replacement, from stream `j` of `seed`.
    Bootstrap { m: usize, size: usize, seed: Seed },
}

impl Partitioner {
    pub fn blocks(&self) -> usize {
        match self {
            Partitioner::DisjointBlocks { m }
            | Partitioner::OverlappingWindows { m, .. }
            | Partitioner::Bootstrap { m, .. } => *m,
        }
    }

    /// Index lists into a sequence of length `n`, one per block.
    pub fn indices(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        let m = self.blocks();
        if m == 0 {
            return Err(Error::Invalid("a partition needs at least one block".into()));
        }
        Ok(match self {
            Partitioner::DisjointBlocks { .. } => {
                let (q, r) = (n / m, n % m);
                let mut start = 0;
                (0..m)
                    .map(|j| {
                        let len = q + usize::from(j < r);
                        let block = (start..start + len).collect();
                        start += len;
                        block
                    })
                    .collect()
            }
            Partitioner::OverlappingWindows { width, .. } => {
                let w = (*width).min(n);
                (0..m).map(|j| (0..w).map(|t| (j * n / m + t) % n).collect()).collect()
            }
            Partitioner::Bootstrap { size, seed, .. } => (0..m)
                .map(|j| {
                    if n == 0 {
                        return Vec::new();
                    }
                    let mut rng = seed.rng(j as u64);
                    (0..*size).map(|_| rng.random_range(0..n)).collect()
                })
                .collect(),
        })
    }

    pub fn split(&self, s: &TrainingSequence) -> Result<Vec<TrainingSequence>> {
        Ok(self.indices(s.len())?.iter().map(|idx| s.select(idx)).collect())
    }
}

/// Partition, interpolate every block, aggregate.
pub fn interpolator_aggregation(
    interpolator: &Interpolator,
    partitioner: &Partitioner,
    rule: &AggregationRule,
    s: &TrainingSequence,
) -> Result<Predictor> {
    let hs = partitioner
        .split(s)?
        .iter()
        .map(|b| interpolator.fit(b))
        .collect::<Result<Vec<_>>>()?;
    aggregate(rule.clone(), hs)
}

/// Pointwise median of the interpolator run on three independent samples
/// (streams 1, 2, 3 of `seed`).
pub fn median_of_three(
    interpolator: &Interpolator,
    d: &FiniteDistribution,
    n: usize,
    seed: Seed,
) -> Result<Predictor> {
    if n == 0 {
        return Err(Error::Invalid("median of three needs n >= 1".into()));
    }
    let samples: Vec<TrainingSequence> = (1..=3).map(|j| d.sample(n, seed, j)).collect();
    median_of_three_on(interpolator, &samples)
}

/// [`median_of_three`] on samples already drawn.
pub fn median_of_three_on(interpolator: &Interpolator, samples: &[TrainingSequence]) -> Result<Predictor> {
    if samples.len() != 3 {
        return Err(Error::Invalid(format!("median of three got {} samples", samples.len())));
    }
    let hs = samples.iter().map(|s| interpolator.fit(s)).collect::<Result<Vec<_>>>()?;
    aggregate(AggregationRule::Median, hs)
}

/// Consistent hypothesis if one exists (canonical order), else the first
/// hypothesis of minimal empirical cutoff loss. The fallback enumerates the
/// class and needs a gamma, taken from the class or from `gamma`.
pub fn proper_erm(
    class: &HypothesisClass,
    s: &TrainingSequence,
    gamma: Option<&Rational>,
    budget: &Budget,
) -> Result<Hypothesis> {
    if let Some(h) = class.first_consistent(s)? {
        return Ok(h);
    }
    let gamma = class
        .gamma()
        .or(gamma)
        .ok_or_else(|| Error::Invalid("ERM over a finite list needs a gamma for the fallback".into()))?;
    let mut best: Option<(Rational, Hypothesis)> = None;
    for h in class.hypotheses(budget.max_hypotheses)? {
        let l = empirical_cutoff_loss(&h, s, gamma)?;
        if best.as_ref().is_none_or(|(b, _)| l < *b) {
            best = Some((l, h));
        }
    }
    best.map(|(_, h)| h).ok_or_else(|| Error::Invalid("ERM over an empty class".into()))
}

/// How a finite aggregation picks its hypotheses from the class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    /// ERM on each of `m` disjoint blocks of the sample.
    SubsampleErm,
    /// The first `m` hypotheses consistent with the whole sample.
    FirstConsistent,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Learner {
    SingleInterpolator(Interpolator),
    InterpolatorAggregation {
        interpolator: Interpolator,
        partitioner: Partitioner,
        rule: AggregationRule,
    },
    MedianOfThree(Interpolator),
    FiniteAggregation {
        class: HypothesisClass,
        selector: Selector,
        rule: AggregationRule,
        m: usize,
    },
    ProperErm {
        class: HypothesisClass,
        gamma: Option<Rational>,
    },
}

impl Learner {
    /// Number of independent samples of size `n` the learner consumes.
    pub fn samples_required(&self) -> usize {
        match self {
            Learner::MedianOfThree(_) => 3,
            _ => 1,
        }
    }

    pub fn fit(&self, samples: &[TrainingSequence]) -> Result<Predictor> {
        if samples.len() != self.samples_required() {
            return Err(Error::Invalid(format!(
                "learner needs {} samples, got {}",
                self.samples_required(),
                samples.len()
            )));
        }
        let s = &samples[0];
        let budget = Budget::default();
        match self {
            Learner::SingleInterpolator(a) => Ok(a.fit(s)?.into()),
            Learner::InterpolatorAggregation { interpolator, partitioner, rule } => {
                interpolator_aggregation(interpolator, partitioner, rule, s)
            }
            Learner::MedianOfThree(a) => median_of_three_on(a, samples),
            Learner::FiniteAggregation { class, selector, rule, m } => {
                let hs = match selector {
                    Selector::SubsampleErm => Partitioner::DisjointBlocks { m: *m }
                        .split(s)?
                        .iter()
                        .map(|b| proper_erm(class, b, None, &budget))
                        .collect::<Result<Vec<_>>>()?,
                    Selector::FirstConsistent => {
                        let mut hs = Vec::with_capacity(*m);
                        for h in class.hypotheses(budget.max_hypotheses)? {
                            if hs.len() == *m {
                                break;
                            }
                            if h.interpolates(s)? {
                                hs.push(h);
                            }
                        }
                        if hs.is_empty() {
                            return Err(Error::NotRealizable("no consistent hypothesis to select".into()));
                        }
                        hs
                    }
                };
                aggregate(rule.clone(), hs)
            }
            Learner::ProperErm { class, gamma } => Ok(proper_erm(class, s, gamma.as_ref(), &budget)?.into()),
        }
    }

    /// Draws the samples (streams `1..=k` of `seed`) and fits.
    pub fn train(&self, d: &FiniteDistribution, n: usize, seed: Seed) -> Result<Predictor> {
        let samples: Vec<TrainingSequence> =
            (1..=self.samples_required() as u64).map(|j| d.sample(n, seed, j)).collect();
        self.fit(&samples)
    }
}

/// Learner configuration as stored in experiment configs and passed on the
/// command line; turned into a [`Learner`] once the class is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum LearnerSpec {
    #[serde(alias = "interpolator")]
    Single {
        #[serde(default)]
        interpolator: InterpolatorKind,
    },
    Median3 {
        #[serde(default)]
        interpolator: InterpolatorKind,
    },
    Agg {
        #[serde(default)]
        interpolator: InterpolatorKind,
        rule: RuleSpec,
        partition: Partitioner,
    },
    Finite {
        selector: Selector,
        rule: RuleSpec,
        m: usize,
    },
    ProperErm {
        #[serde(default)]
        gamma: Option<Rational>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolatorKind {
    #[default]
    Generic,
    Adversarial,
}

/// A rule written either as a bare name (`"median"`, `"mean"`, `"min"`,
/// `"max"`) or as a full tagged record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleSpec {
    Name(String),
    Full(AggregationRule),
}

impl RuleSpec {
    pub fn resolve(&self) -> Result<AggregationRule> {
        match self {
            RuleSpec::Full(r) => Ok(r.clone()),
            RuleSpec::Name(n) => match n.as_str() {
                "median" => Ok(AggregationRule::Median),
                "mean" => Ok(AggregationRule::Mean),
                "min" => Ok(AggregationRule::Min),
                "max" => Ok(AggregationRule::Max),
                other => Err(Error::Parse(format!("unknown aggregation rule {other:?}"))),
            },
        }
    }
}

impl LearnerSpec {
    /// Binds this learner description to a class (and, for adversarial interpolation, a
    /// shatter certificate).
    pub fn build(&self, class: &HypothesisClass, cert: Option<&ShatterCertificate>) -> Result<Learner> {
        let interp = |k: InterpolatorKind| -> Result<Interpolator> {
            match k {
                InterpolatorKind::Generic => Ok(Interpolator::Generic(class.clone())),
                InterpolatorKind::Adversarial => cert
                    .cloned()
                    .map(Interpolator::Adversarial)
                    .ok_or_else(|| Error::Invalid("adversarial interpolation needs a shatter certificate".into())),
            }
        };
        Ok(match self {
            LearnerSpec::Single { interpolator } => Learner::SingleInterpolator(interp(*interpolator)?),
            LearnerSpec::Median3 { interpolator } => Learner::MedianOfThree(interp(*interpolator)?),
            LearnerSpec::Agg { interpolator, rule, partition } => Learner::InterpolatorAggregation {
                interpolator: interp(*interpolator)?,
                partitioner: partition.clone(),
                rule: rule.resolve()?,
            },
            LearnerSpec::Finite { selector, rule, m } => Learner::FiniteAggregation {
                class: class.clone(),
                selector: *selector,
                rule: rule.resolve()?,
                m: *m,
            },
            LearnerSpec::ProperErm { gamma } => Learner::ProperErm { class: class.clone(), gamma: gamma.clone() },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dims::gamma_graph_dimension;
    use crate::domain::{LabeledExample, Point};
    use crate::predictor::Predict;
    use proptest::prelude::*;

    fn half() -> Rational {
        Rational::new(1, 2)
    }

    fn zeros(xs: &[u64]) -> TrainingSequence {
        xs.iter().map(|&x| LabeledExample::new(Point::Nat(x), Rational::zero()).unwrap()).collect()
    }

    #[test]
    fn generic_examples() {
        let c = HypothesisClass::cantor(half(), 2, 4).unwrap();
        assert_eq!(generic_interpolator(&c, &zeros(&[])).unwrap(), c.cantor_member(&[1, 2]).unwrap());
        assert_eq!(generic_interpolator(&c, &zeros(&[1])).unwrap(), c.cantor_member(&[1, 2]).unwrap());
        assert_eq!(generic_interpolator(&c, &zeros(&[4])).unwrap(), c.cantor_member(&[1, 4]).unwrap());
        assert!(matches!(generic_interpolator(&c, &zeros(&[1, 2, 3])), Err(Error::NotRealizable(_))));
    }

    fn cert() -> ShatterCertificate {
        let c = HypothesisClass::cantor(half(), 3, 6).unwrap();
        let pool = c.natural_pool(10).unwrap();
        gamma_graph_dimension(&c, &pool, &half(), 3, &Budget::default()).unwrap().certificate
    }

    fn witness_sample(cert: &ShatterCertificate, idx: &[usize]) -> TrainingSequence {
        idx.iter()
            .map(|&i| {
                let p = cert.points[i];
                LabeledExample::new(p, cert.witness.eval(&p).unwrap().clone()).unwrap()
            })
            .collect()
    }

    #[test]
    fn adversarial_examples() {
        let cert = cert();
        let w = cert.witness.restrict(&cert.points).unwrap();
        // everything seen: the witness pattern
        let h = adversarial_interpolator(&cert, &witness_sample(&cert, &[0, 1, 2])).unwrap();
        assert_eq!(h.restrict(&cert.points).unwrap(), w);
        // nothing seen: far everywhere on the set
        let h = adversarial_interpolator(&cert, &TrainingSequence::default()).unwrap();
        for (p, wv) in cert.points.iter().zip(&w) {
            assert!(h.eval(p).unwrap().abs_diff(wv) > half());
        }
        // missing the third point only
        let h = adversarial_interpolator(&cert, &witness_sample(&cert, &[0, 1, 0])).unwrap();
        let v = h.restrict(&cert.points).unwrap();
        assert_eq!(v[0], w[0]);
        assert_eq!(v[1], w[1]);
        assert!(v[2].abs_diff(&w[2]) > half());
        // outside the set
        let out = zeros(&[99]);
        assert!(matches!(adversarial_interpolator(&cert, &out), Err(Error::Invalid(_))));
    }

    #[test]
    fn partition_sizes() {
        let p = Partitioner::DisjointBlocks { m: 3 };
        assert_eq!(p.indices(7).unwrap(), vec![vec![0, 1, 2], vec![3, 4], vec![5, 6]]);
        assert_eq!(p.indices(2).unwrap(), vec![vec![0], vec![1], vec![]]);
        let w = Partitioner::OverlappingWindows { m: 2, width: 3 };
        assert_eq!(w.indices(4).unwrap(), vec![vec![0, 1, 2], vec![2, 3, 0]]);
        let b = Partitioner::Bootstrap { m: 2, size: 5, seed: Seed(1) };
        let idx = b.indices(4).unwrap();
        assert_eq!(idx, b.indices(4).unwrap());
        assert!(idx.iter().all(|blk| blk.len() == 5 && blk.iter().all(|&i| i < 4)));
        assert!(Partitioner::DisjointBlocks { m: 0 }.indices(3).is_err());
    }

    #[test]
    fn one_block_equals_single_interpolator() {
        let c = HypothesisClass::cantor(half(), 2, 6).unwrap();
        let a = Interpolator::Generic(c.clone());
        let s = zeros(&[5, 3, 5]);
        let agg = interpolator_aggregation(&a, &Partitioner::DisjointBlocks { m: 1 }, &AggregationRule::Mean, &s).unwrap();
        let single = generic_interpolator(&c, &s).unwrap();
        for x in 1..=6 {
            let p = Point::Nat(x);
            assert_eq!(agg.predict(&p).unwrap(), *single.eval(&p).unwrap());
        }
    }

    #[test]
    fn median_of_three_identical_samples() {
        let c = HypothesisClass::cantor(half(), 2, 6).unwrap();
        let a = Interpolator::Generic(c.clone());
        let s = zeros(&[4]);
        let m = median_of_three_on(&a, &[s.clone(), s.clone(), s.clone()]).unwrap();
        let h = a.fit(&s).unwrap();
        for x in 1..=6 {
            assert_eq!(m.predict(&Point::Nat(x)).unwrap(), *h.eval(&Point::Nat(x)).unwrap());
        }
    }

    #[test]
    fn median_two_of_three_correct() {
        let c = HypothesisClass::cantor(half(), 1, 3).unwrap();
        let a = Interpolator::Generic(c);
        // two samples see point 3 (zero there), one does not
        let m = median_of_three_on(&a, &[zeros(&[3]), zeros(&[3]), zeros(&[])]).unwrap();
        assert!(m.predict(&Point::Nat(3)).unwrap().is_zero());
    }

    #[test]
    fn proper_erm_examples() {
        let c = HypothesisClass::cantor(half(), 2, 6).unwrap();
        let s = zeros(&[2, 6]);
        let h = proper_erm(&c, &s, None, &Budget::default()).unwrap();
        assert!(h.interpolates(&s).unwrap());
        // two-hypothesis list, no consistent member: the lower-loss one wins
        let h1 = Hypothesis::constant(Rational::zero());
        let h2 = Hypothesis::constant(Rational::one());
        let fin = HypothesisClass::finite(vec![h1.clone(), h2.clone()]);
        let s: TrainingSequence = [(1, 1), (2, 1), (3, 0)]
            .iter()
            .map(|&(x, y)| LabeledExample::new(Point::Nat(x), Rational::integer(y)).unwrap())
            .collect();
        assert_eq!(proper_erm(&fin, &s, Some(&half()), &Budget::default()).unwrap(), h2);
        assert!(proper_erm(&fin, &s, None, &Budget::default()).is_err());
        let empty = HypothesisClass::finite(vec![]);
        assert!(proper_erm(&empty, &s, Some(&half()), &Budget::default()).is_err());
    }

    #[test]
    fn finite_aggregation_selects_at_most_m() {
        let c = HypothesisClass::cantor(half(), 2, 6).unwrap();
        let s = zeros(&[1]);
        for selector in [Selector::FirstConsistent, Selector::SubsampleErm] {
            let l = Learner::FiniteAggregation { class: c.clone(), selector, rule: AggregationRule::Median, m: 3 };
            let p = l.fit(std::slice::from_ref(&s)).unwrap();
            assert!(p.members().len() <= 3);
            assert!(p.members().iter().all(|h| c.contains(h)));
        }
    }

    #[test]
    fn learner_spec_json() {
        let m: LearnerSpec = serde_json::from_str(r#"{"learner":"median3"}"#).unwrap();
        assert_eq!(m, LearnerSpec::Median3 { interpolator: InterpolatorKind::Generic });
        let a: LearnerSpec =
            serde_json::from_str(r#"{"learner":"agg","rule":"median","partition":{"kind":"disjoint","m":3}}"#).unwrap();
        let c = HypothesisClass::cantor(half(), 2, 6).unwrap();
        match a.build(&c, None).unwrap() {
            Learner::InterpolatorAggregation { partitioner, rule, .. } => {
                assert_eq!(partitioner, Partitioner::DisjointBlocks { m: 3 });
                assert_eq!(rule, AggregationRule::Median);
            }
            other => panic!("{other:?}"),
        }
        let e: LearnerSpec = serde_json::from_str(r#"{"learner":"proper_erm"}"#).unwrap();
        assert!(matches!(e.build(&c, None).unwrap(), Learner::ProperErm { .. }));
        let adv: LearnerSpec = serde_json::from_str(r#"{"learner":"single","interpolator":"adversarial"}"#).unwrap();
        assert!(adv.build(&c, None).is_err());
    }

    proptest! {
        #[test]
        fn aggregation_properness_and_range(
            picks in proptest::collection::vec(0usize..15, 1..6),
            x in 1u64..7,
            rule_idx in 0usize..5,
        ) {
            let c = HypothesisClass::cantor(half(), 2, 6).unwrap();
            let all: Vec<Hypothesis> = c.iter().collect();
            let hs: Vec<Hypothesis> = picks.iter().map(|&i| all[i].clone()).collect();
            let m = hs.len();
            let rule = match rule_idx {
                0 => AggregationRule::Min,
                1 => AggregationRule::Max,
                2 => AggregationRule::OrderStatistic { j: 1 + m / 2 },
                3 => AggregationRule::Mean,
                _ => if m % 2 == 1 { AggregationRule::Median } else { AggregationRule::Mean },
            };
            let vals: Vec<Rational> = hs.iter().map(|h| h.eval(&Point::Nat(x)).unwrap().clone()).collect();
            let p = aggregate(rule.clone(), hs).unwrap();
            let out = p.predict(&Point::Nat(x)).unwrap();
            prop_assert!(out >= *vals.iter().min().unwrap() && out <= *vals.iter().max().unwrap());
            if rule.is_proper() {
                prop_assert!(vals.contains(&out));
            }
        }

        #[test]
        fn interpolators_interpolate(xs in proptest::collection::vec(1u64..7, 0..3)) {
            let c = HypothesisClass::cantor(half(), 2, 6).unwrap();
            let s = zeros(&xs);
            if let Ok(h) = generic_interpolator(&c, &s) {
                prop_assert!(empirical_cutoff_loss(&h, &s, &Rational::zero()).map_or(true, |l| l.is_zero()));
            }
            let cert = cert();
            let idx: Vec<usize> = xs.iter().map(|&x| (x as usize) % 3).collect();
            let s = witness_sample(&cert, &idx);
            let h = adversarial_interpolator(&cert, &s).unwrap();
            prop_assert!(h.interpolates(&s).unwrap());
        }
    }
}
