//! Hard instances: the distributions on which aggregation lower bounds bite.
//!
//! * [`thm1_instance`] works for any class with graph dimension `d >= 2`: one
//!   heavy point of a shattered set with mass `1 - 4 eps`, the other `d - 1`
//!   sharing `4 eps`, labels from the shattering witness.
//! * [`thm2_instance`], [`thm3_instance`] and [`thm5_instance`] build
//!   families over a random support vector `A` for the Cantor and split
//!   classes. Each family exposes the index law `D_t`, so a sample can be
//!   drawn as indices `t_1..t_n` and mapped through `A` ([`coupled_sample`]).

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::class::{HypothesisClass, SplitVariant};
use crate::dims::{gamma_graph_dimension, ShatterCertificate};
use crate::distribution::{Atom, Categorical, FiniteDistribution};
use crate::domain::{LabeledExample, Point, TrainingSequence};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::rational::Rational;
use crate::rng::{distinct_draws, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremTag {
    #[serde(rename = "thm1")]
    Thm1,
    #[serde(rename = "thm2")]
    Thm2,
    #[serde(rename = "thm3")]
    Thm3,
    #[serde(rename = "thm4")]
    Thm4,
    #[serde(rename = "thm5")]
    Thm5,
    #[serde(rename = "lemma-interp")]
    LemmaInterp,
    #[serde(rename = "lemma-disamb")]
    LemmaDisamb,
    #[serde(rename = "custom")]
    Custom,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 7] = [
        TheoremTag::Thm1,
        TheoremTag::Thm2,
        TheoremTag::Thm3,
        TheoremTag::Thm4,
        TheoremTag::Thm5,
        TheoremTag::LemmaInterp,
        TheoremTag::LemmaDisamb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremTag::Thm1 => "thm1",
            TheoremTag::Thm2 => "thm2",
            TheoremTag::Thm3 => "thm3",
            TheoremTag::Thm4 => "thm4",
            TheoremTag::Thm5 => "thm5",
            TheoremTag::LemmaInterp => "lemma-interp",
            TheoremTag::LemmaDisamb => "lemma-disamb",
            TheoremTag::Custom => "custom",
        }
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TheoremTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremTag::ALL
            .into_iter()
            .chain([TheoremTag::Custom])
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown experiment tag {s:?}")))
    }
}

/// Distinct support entries; for the pinned families the first entry is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportVector(pub Vec<u64>);

/// Indices (0-based) into a support vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSequence(pub Vec<usize>);

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub gamma: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rational>,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_u: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_prime: Option<usize>,
}

/// A class together with a distribution it realizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardInstance {
    pub tag: TheoremTag,
    pub class: HypothesisClass,
    pub distribution: FiniteDistribution,
    pub witness: Hypothesis,
    pub params: InstanceParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ShatterCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportVector>,
}

impl HardInstance {
    /// Checks the witness realizes the distribution and belongs to the class.
    pub fn validate(&self) -> Result<()> {
        if !self.distribution.is_realized_by(&self.witness)? {
            return Err(Error::Invalid("witness does not realize the distribution".into()));
        }
        if !matches!(self.class, HypothesisClass::Finite { .. }) && !self.class.contains(&self.witness) {
            return Err(Error::Invalid("witness is not a member of the class".into()));
        }
        Ok(())
    }
}

/// Source of instances for Monte Carlo: a fixed instance or a family that
/// draws a fresh support vector per trial.
pub trait InstanceEnsemble: Sync {
    fn draw(&self, seed: Seed) -> Result<Cow<'_, HardInstance>>;
}

impl InstanceEnsemble for HardInstance {
    fn draw(&self, _seed: Seed) -> Result<Cow<'_, HardInstance>> {
        Ok(Cow::Borrowed(self))
    }
}

fn floor_usize(r: &Rational) -> usize {
    r.floor().to_usize().unwrap_or(usize::MAX)
}

fn check_epsilon(eps: &Rational, upper: Rational, what: &str) -> Result<()> {
    if eps.is_negative() || eps.is_zero() || *eps >= upper {
        return Err(Error::Precondition(format!("{what}: need 0 < epsilon < {upper}, got {eps}")));
    }
    Ok(())
}

/// Two-tier instance on a shattered set of `class` found within `pool`.
pub fn thm1_instance(
    class: &HypothesisClass,
    gamma: &Rational,
    epsilon: &Rational,
    pool: &[Point],
    budget: &Budget,
) -> Result<HardInstance> {
    check_epsilon(epsilon, Rational::new(1, 4), "two-tier instance")?;
    let report = gamma_graph_dimension(class, pool, gamma, pool.len(), budget)?;
    let d = report.dimension;
    if d < 2 {
        return Err(Error::Precondition(format!("need graph dimension d >= 2, found {d}")));
    }
    let cert = report.certificate;
    let labels = cert.witness.restrict(&cert.points)?;
    let four = Rational::integer(4) * epsilon;
    let light = &four / Rational::from(d - 1);
    let atoms = cert
        .points
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (p, y))| Atom {
            point: *p,
            label: y,
            mass: if i == 0 { Rational::one() - &four } else { light.clone() },
        })
        .collect();
    let n_max = floor_usize(&(Rational::from(d) / (Rational::integer(32) * epsilon)));
    Ok(HardInstance {
        tag: TheoremTag::Thm1,
        class: class.clone(),
        distribution: FiniteDistribution::new(atoms)?,
        witness: cert.witness.clone(),
        params: InstanceParams {
            gamma: gamma.clone(),
            epsilon: Some(epsilon.clone()),
            d,
            n_max: Some(n_max),
            ..Default::default()
        },
        certificate: Some(cert),
        support: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Cantor class, `A_1 = 1` heavy, the rest drawn from `{2..k_u}`.
    Pinned,
    /// Split class with `sqrt(k_u)`-sized zero sets, uniform on `A`.
    SqrtSize,
    /// Split class zero off a `(d-1)`-set, uniform on `A` of size `k_u - d + 1`.
    Complement,
}

/// A family of hard instances indexed by a random support vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportFamily {
    pub tag: TheoremTag,
    pub kind: FamilyKind,
    pub class: HypothesisClass,
    pub params: InstanceParams,
    index_law: Categorical,
}

/// Cantor-class family: `k_u = ceil(2 d m + d/4 + 1)`, masses `1 - 16 eps`
/// on the pinned point and `16 eps / (d - 1)` on the others, labels 0,
/// `n_max = floor(d / (128 eps))`.
pub fn thm2_instance(gamma: &Rational, d: usize, epsilon: &Rational, m_bound: usize) -> Result<SupportFamily> {
    check_epsilon(epsilon, Rational::new(1, 32), "pinned Cantor family")?;
    if d < 2 {
        return Err(Error::Precondition(format!("need d >= 2, got {d}")));
    }
    if m_bound == 0 {
        return Err(Error::Precondition("need m_bound >= 1".into()));
    }
    let d_r = Rational::from(d);
    let k = Rational::integer(2) * &d_r * Rational::from(m_bound) + &d_r / Rational::integer(4) + Rational::one();
    let k_u = k.ceil().to_u64().ok_or_else(|| Error::Precondition("universe too large".into()))?;
    let heavy = Rational::one() - Rational::integer(16) * epsilon;
    let light = Rational::integer(16) * epsilon / Rational::from(d - 1);
    let mut masses = vec![heavy];
    masses.extend(std::iter::repeat_n(light, d - 1));
    Ok(SupportFamily {
        tag: TheoremTag::Thm2,
        kind: FamilyKind::Pinned,
        class: HypothesisClass::cantor(gamma.clone(), d, k_u)?,
        params: InstanceParams {
            gamma: gamma.clone(),
            epsilon: Some(epsilon.clone()),
            d,
            k_u: Some(k_u),
            n_max: Some(floor_usize(&(d_r / (Rational::integer(128) * epsilon)))),
            m_bound: Some(m_bound),
            n_prime: None,
        },
        index_law: Categorical::new(masses)?,
    })
}

/// `(1 - n'/i)(1 - m/i) >= 1 - eps/2`, exactly.
pub fn thm3_condition(i: u64, n_prime: usize, m_bound: usize, epsilon: &Rational) -> bool {
    let i_r = Rational::from(i);
    let lhs = (Rational::one() - Rational::from(n_prime) / &i_r) * (Rational::one() - Rational::from(m_bound) / &i_r);
    lhs >= Rational::one() - epsilon / Rational::integer(2)
}

/// Smallest `i > n'` satisfying [`thm3_condition`]; the universe is `i^2`.
pub fn thm3_universe_root(n_prime: usize, m_bound: usize, epsilon: &Rational) -> u64 {
    let mut i = n_prime as u64 + 1;
    while !thm3_condition(i, n_prime, m_bound, epsilon) {
        i += 1;
    }
    i
}

/// Split-class family with the smallest admissible square universe.
pub fn thm3_instance(gamma: &Rational, epsilon: &Rational, n_prime: usize, m_bound: usize) -> Result<SupportFamily> {
    check_epsilon(epsilon, Rational::one(), "sqrt-size split family")?;
    if n_prime == 0 {
        return Err(Error::Precondition("need n' >= 1".into()));
    }
    let i = thm3_universe_root(n_prime, m_bound, epsilon);
    thm3_instance_with_universe(gamma, epsilon, n_prime, m_bound, i * i)
}

/// Same family on a caller-chosen square universe, which must satisfy the
/// size condition.
pub fn thm3_instance_with_universe(
    gamma: &Rational,
    epsilon: &Rational,
    n_prime: usize,
    m_bound: usize,
    k_u: u64,
) -> Result<SupportFamily> {
    check_epsilon(epsilon, Rational::one(), "sqrt-size split family")?;
    if n_prime == 0 {
        return Err(Error::Precondition("need n' >= 1".into()));
    }
    let i = k_u.isqrt();
    if i * i != k_u {
        return Err(Error::Precondition(format!("universe {k_u} is not a perfect square")));
    }
    if i <= n_prime as u64 || !thm3_condition(i, n_prime, m_bound, epsilon) {
        return Err(Error::Precondition(format!(
            "universe {k_u} violates (1 - {n_prime}/{i})(1 - {m_bound}/{i}) >= 1 - {epsilon}/2"
        )));
    }
    Ok(SupportFamily {
        tag: TheoremTag::Thm3,
        kind: FamilyKind::SqrtSize,
        class: HypothesisClass::split(gamma.clone(), SplitVariant::SqrtSize, k_u)?,
        params: InstanceParams {
            gamma: gamma.clone(),
            epsilon: Some(epsilon.clone()),
            d: 1,
            k_u: Some(k_u),
            n_max: Some(n_prime),
            m_bound: Some(m_bound),
            n_prime: Some(n_prime),
        },
        index_law: Categorical::uniform(i as usize)?,
    })
}

/// `epsilon < 1 / (64 e)`.
pub fn thm5_epsilon_ok(epsilon: &Rational) -> bool {
    !epsilon.is_negative() && !epsilon.is_zero() && 64.0 * std::f64::consts::E * epsilon.to_f64() < 1.0
}

/// Complement split-class family: `k_u = ceil(d / (16 eps))`, uniform on a
/// support of size `k_u - d + 1`, `n_max = floor(d/(32 eps) ln(1/(64 e eps)))`.
pub fn thm5_instance(gamma: &Rational, d: usize, epsilon: &Rational) -> Result<SupportFamily> {
    if !thm5_epsilon_ok(epsilon) {
        return Err(Error::Precondition(format!("need 0 < epsilon < 1/(64e), got {epsilon}")));
    }
    if d < 2 {
        return Err(Error::Precondition(format!("need d >= 2, got {d}")));
    }
    let d_r = Rational::from(d);
    let k_u = (&d_r / (Rational::integer(16) * epsilon))
        .ceil()
        .to_u64()
        .ok_or_else(|| Error::Precondition("universe too large".into()))?;
    debug_assert!(k_u > 2 * d as u64 + 1);
    let eps = epsilon.to_f64();
    let n_max = (d as f64 / (32.0 * eps) * (1.0 / (64.0 * std::f64::consts::E * eps)).ln()).floor() as usize;
    let len = (k_u - d as u64 + 1) as usize;
    Ok(SupportFamily {
        tag: TheoremTag::Thm5,
        kind: FamilyKind::Complement,
        class: HypothesisClass::split(gamma.clone(), SplitVariant::Complement { d }, k_u)?,
        params: InstanceParams {
            gamma: gamma.clone(),
            epsilon: Some(epsilon.clone()),
            d,
            k_u: Some(k_u),
            n_max: Some(n_max),
            m_bound: None,
            n_prime: None,
        },
        index_law: Categorical::uniform(len)?,
    })
}

impl SupportFamily {
    pub fn k_u(&self) -> u64 {
        self.params.k_u.expect("families always carry k_u")
    }

    pub fn support_len(&self) -> usize {
        self.index_law.len()
    }

    pub fn index_law(&self) -> &Categorical {
        &self.index_law
    }

    /// Whether index 0 is the fixed heavy point.
    pub fn pinned(&self) -> bool {
        self.kind == FamilyKind::Pinned
    }

    pub fn point(&self, entry: u64) -> Point {
        match self.kind {
            FamilyKind::Pinned => Point::Nat(entry),
            FamilyKind::SqrtSize | FamilyKind::Complement => Point::Pair(self.k_u(), entry),
        }
    }

    pub fn points(&self, a: &SupportVector) -> Vec<Point> {
        a.0.iter().map(|&x| self.point(x)).collect()
    }

    /// A uniform draw from the family's set of admissible support vectors.
    pub fn draw_support<R: Rng>(&self, rng: &mut R) -> SupportVector {
        let k = self.k_u();
        match self.kind {
            FamilyKind::Pinned => {
                let mut v = vec![1];
                v.extend(distinct_draws(rng, 2, k, self.support_len() - 1));
                SupportVector(v)
            }
            FamilyKind::SqrtSize | FamilyKind::Complement => SupportVector(distinct_draws(rng, 1, k, self.support_len())),
        }
    }

    pub fn validate_support(&self, a: &SupportVector) -> Result<()> {
        let set: BTreeSet<u64> = a.0.iter().copied().collect();
        if a.0.len() != self.support_len() || set.len() != a.0.len() {
            return Err(Error::Invalid(format!("support needs {} distinct entries", self.support_len())));
        }
        if a.0.iter().any(|&x| x == 0 || x > self.k_u()) {
            return Err(Error::Invalid(format!("support entries must lie in [1, {}]", self.k_u())));
        }
        if self.pinned() && a.0[0] != 1 {
            return Err(Error::Invalid("pinned support must start with 1".into()));
        }
        Ok(())
    }

    /// The hypothesis that is zero exactly on the support points.
    pub fn witness(&self, a: &SupportVector) -> Result<Hypothesis> {
        match self.kind {
            FamilyKind::Pinned => self.class.cantor_member(&a.0),
            FamilyKind::SqrtSize => self.class.split_member(self.k_u(), &a.0),
            FamilyKind::Complement => {
                let k = self.k_u();
                let rest: Vec<u64> = (1..=k).filter(|x| !a.0.contains(x)).collect();
                self.class.split_member(k, &rest)
            }
        }
    }

    pub fn instance(&self, a: &SupportVector) -> Result<HardInstance> {
        self.validate_support(a)?;
        let atoms = self
            .points(a)
            .into_iter()
            .zip(self.index_law.masses())
            .map(|(point, mass)| Atom { point, label: Rational::zero(), mass: mass.clone() })
            .collect();
        Ok(HardInstance {
            tag: self.tag,
            class: self.class.clone(),
            distribution: FiniteDistribution::new(atoms)?,
            witness: self.witness(a)?,
            params: self.params.clone(),
            certificate: None,
            support: Some(a.clone()),
        })
    }

    /// A sample drawn through the index law: `t` i.i.d. from `D_t`, examples
    /// `(A_t, 0)`.
    pub fn coupled_sample(&self, a: &SupportVector, n: usize, seed: Seed, stream: u64) -> (TrainingSequence, IndexSequence) {
        coupled_sample(&self.points(a), &self.index_law, n, seed, stream)
    }

    pub fn missing_indices(&self, a: &SupportVector, s: &TrainingSequence) -> BTreeSet<usize> {
        missing_indices(&self.points(a), s, self.pinned())
    }
}

impl InstanceEnsemble for SupportFamily {
    /// Fresh support vector from stream 0 of `seed`.
    fn draw(&self, seed: Seed) -> Result<Cow<'_, HardInstance>> {
        let a = self.draw_support(&mut seed.rng(0));
        Ok(Cow::Owned(self.instance(&a)?))
    }
}

/// Zero-labeled sample `(points[t_1], 0), ..., (points[t_n], 0)` with the
/// indices drawn i.i.d. from `law` on `stream` of `seed`.
pub fn coupled_sample(
    points: &[Point],
    law: &Categorical,
    n: usize,
    seed: Seed,
    stream: u64,
) -> (TrainingSequence, IndexSequence) {
    let mut rng = seed.rng(stream);
    let t = law.sample_many(&mut rng, n);
    let s = t
        .iter()
        .map(|&i| LabeledExample { point: points[i], label: Rational::zero() })
        .collect();
    (s, IndexSequence(t))
}

/// Indices of `points` not present in `s`; index 0 is left out when pinned.
pub fn missing_indices(points: &[Point], s: &TrainingSequence, pinned: bool) -> BTreeSet<usize> {
    let seen: BTreeSet<&Point> = s.points().collect();
    (usize::from(pinned)..points.len()).filter(|&i| !seen.contains(&points[i])).collect()
}

/// Exact law of the coupled sample: probability of each point sequence.
pub fn coupled_pmf(points: &[Point], law: &Categorical, n: usize) -> BTreeMap<Vec<Point>, Rational> {
    let mut out = BTreeMap::new();
    for_each_sequence(law.len(), n, |t| {
        let p: Rational = t.iter().fold(Rational::one(), |acc, &i| acc * &law.masses()[i]);
        let seq: Vec<Point> = t.iter().map(|&i| points[i]).collect();
        let e = out.entry(seq).or_insert_with(Rational::zero);
        *e = &*e + p;
    });
    out.retain(|_, p| !p.is_zero());
    out
}

/// Exact law of `n` i.i.d. draws from `d`.
pub fn product_pmf(d: &FiniteDistribution, n: usize) -> BTreeMap<Vec<Point>, Rational> {
    let atoms = d.atoms();
    let mut out = BTreeMap::new();
    for_each_sequence(atoms.len(), n, |t| {
        let p: Rational = t.iter().fold(Rational::one(), |acc, &i| acc * &atoms[i].mass);
        if !p.is_zero() {
            out.insert(t.iter().map(|&i| atoms[i].point).collect::<Vec<_>>(), p);
        }
    });
    out
}

/// Calls `f` on every sequence in `0..k` of length `n`, in lexicographic order.
pub fn for_each_sequence(k: usize, n: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 && n > 0 {
        return;
    }
    let mut t = vec![0usize; n];
    loop {
        f(&t);
        let mut j = n;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            t[j] += 1;
            if t[j] < k {
                break;
            }
            t[j] = 0;
        }
    }
}
