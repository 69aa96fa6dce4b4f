//! Hypothesis classes: explicit finite lists and the two parametric families.
//!
//! Cantor class `(gamma, d, universe)`: one hypothesis per `d`-subset `A` of
//! `[universe]`, zero on `A` and `gamma_A = gamma + (1 - gamma) / l` elsewhere,
//! where `l` is the 1-based colex rank of `A`. Distinct sets get distinct
//! nonzero values, so a single nonzero label pins down the whole hypothesis.
//!
//! Split class: the same idea on pairs `(k, x)`. A hypothesis is indexed by a
//! level `k` and a set `A` of `[k]`; the rank runs over levels in increasing
//! order and, within a level, colex over `A`. Two variants exist:
//! `SqrtSize` (levels `k = i^2`, `|A| = i`, zero on `A`) and
//! `Complement { d }` (levels `k >= d - 1`, `|A| = d - 1`, zero on `[k] \ A`).
//!
//! Enumeration order is canonical everywhere: Cantor by colex rank, split by
//! level then colex, finite lists in list order.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, colex_next, colex_rank, colex_unrank, smallest_superset};
use crate::domain::{Point, TrainingSequence};
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, ZeroOn};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitVariant {
    SqrtSize,
    Complement { d: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "ClassRepr")]
pub enum HypothesisClass {
    Finite { hypotheses: Vec<Hypothesis> },
    Cantor { gamma: Rational, d: usize, universe: u64 },
    SplitCantor { gamma: Rational, variant: SplitVariant, universe_cap: u64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ClassRepr {
    Finite { hypotheses: Vec<Hypothesis> },
    Cantor { gamma: Rational, d: usize, universe: Option<u64> },
    SplitCantor { gamma: Rational, variant: SplitVariant, universe_cap: Option<u64> },
}

impl TryFrom<ClassRepr> for HypothesisClass {
    type Error = Error;
    fn try_from(r: ClassRepr) -> Result<Self> {
        match r {
            ClassRepr::Finite { hypotheses } => Ok(HypothesisClass::Finite { hypotheses }),
            ClassRepr::Cantor { gamma, d, universe } => {
                let universe = universe.ok_or_else(|| {
                    Error::Invalid("Cantor class needs a finite `universe`".into())
                })?;
                HypothesisClass::cantor(gamma, d, universe)
            }
            ClassRepr::SplitCantor { gamma, variant, universe_cap } => {
                let cap = universe_cap.ok_or_else(|| {
                    Error::Invalid("split class needs a finite `universe_cap`".into())
                })?;
                HypothesisClass::split(gamma, variant, cap)
            }
        }
    }
}

fn check_gamma(gamma: &Rational) -> Result<()> {
    if gamma.is_negative() || gamma.is_zero() || *gamma >= Rational::one() {
        return Err(Error::Invalid(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    Ok(())
}

/// `gamma + (1 - gamma) / l` for a 1-based rank `l`.
pub fn rank_value(gamma: &Rational, l: &BigUint) -> Rational {
    gamma + (Rational::one() - gamma) / Rational::from_biguint(l.clone())
}

/// Inverse of [`rank_value`]: the rank `l` a nonzero label encodes, if any.
pub fn value_rank(gamma: &Rational, v: &Rational) -> Option<BigUint> {
    if v <= gamma {
        return None;
    }
    let l = (Rational::one() - gamma) / (v - gamma);
    if !l.is_integer() {
        return None;
    }
    l.numer().to_biguint().filter(|l| !l.is_zero())
}

impl HypothesisClass {
    pub fn cantor(gamma: Rational, d: usize, universe: u64) -> Result<Self> {
        check_gamma(&gamma)?;
        if d == 0 {
            return Err(Error::Invalid("Cantor class needs d >= 1".into()));
        }
        if (d as u64) > universe {
            return Err(Error::Invalid(format!("universe {universe} is smaller than d = {d}")));
        }
        Ok(HypothesisClass::Cantor { gamma, d, universe })
    }

    pub fn split(gamma: Rational, variant: SplitVariant, universe_cap: u64) -> Result<Self> {
        check_gamma(&gamma)?;
        if let SplitVariant::Complement { d } = variant {
            if d < 2 {
                return Err(Error::Invalid("complement split class needs d >= 2".into()));
            }
            if (d as u64 - 1).max(1) > universe_cap {
                return Err(Error::Invalid(format!("universe cap {universe_cap} below d - 1")));
            }
        }
        if universe_cap == 0 {
            return Err(Error::Invalid("universe cap must be positive".into()));
        }
        Ok(HypothesisClass::SplitCantor { gamma, variant, universe_cap })
    }

    pub fn finite(hypotheses: Vec<Hypothesis>) -> Self {
        HypothesisClass::Finite { hypotheses }
    }

    pub fn gamma(&self) -> Option<&Rational> {
        match self {
            HypothesisClass::Finite { .. } => None,
            HypothesisClass::Cantor { gamma, .. } | HypothesisClass::SplitCantor { gamma, .. } => {
                Some(gamma)
            }
        }
    }

    /// `(k, |A|)` for every level of a split class, ascending.
    pub fn split_levels(&self) -> Vec<(u64, usize)> {
        match self {
            HypothesisClass::SplitCantor { variant, universe_cap, .. } => {
                levels(*variant, *universe_cap)
            }
            _ => Vec::new(),
        }
    }

    pub fn size(&self) -> BigUint {
        match self {
            HypothesisClass::Finite { hypotheses } => BigUint::from(hypotheses.len()),
            HypothesisClass::Cantor { d, universe, .. } => binomial(*universe, *d as u64),
            HypothesisClass::SplitCantor { variant, universe_cap, .. } => levels(*variant, *universe_cap)
                .into_iter()
                .map(|(k, s)| binomial(k, s as u64))
                .sum(),
        }
    }

    /// Lazy canonical-order enumeration.
    pub fn iter(&self) -> ClassIter<'_> {
        match self {
            HypothesisClass::Finite { hypotheses } => ClassIter::Finite(hypotheses.iter()),
            HypothesisClass::Cantor { gamma, d, universe } => ClassIter::Cantor {
                gamma,
                universe: *universe,
                set: (1..=*d as u64).collect(),
                l: BigUint::one(),
                done: false,
            },
            HypothesisClass::SplitCantor { gamma, variant, universe_cap } => {
                let lv = levels(*variant, *universe_cap);
                let zero_on = zero_on(*variant);
                let set = lv.first().map(|&(_, s)| (1..=s as u64).collect()).unwrap_or_default();
                ClassIter::Split {
                    gamma,
                    zero_on,
                    done: lv.is_empty(),
                    levels: lv,
                    level: 0,
                    set,
                    l: BigUint::one(),
                }
            }
        }
    }

    /// Every hypothesis, refusing when the class has more than `budget` members.
    pub fn hypotheses(&self, budget: usize) -> Result<Vec<Hypothesis>> {
        let size = self.size();
        if size > BigUint::from(budget) {
            return Err(Error::budget(format!(
                "class has {size} hypotheses, enumeration budget is {budget}"
            )));
        }
        Ok(self.iter().collect())
    }

    /// The Cantor hypothesis for zero set `a`.
    pub fn cantor_member(&self, a: &[u64]) -> Result<Hypothesis> {
        let HypothesisClass::Cantor { gamma, d, universe } = self else {
            return Err(Error::Invalid("not a Cantor class".into()));
        };
        let mut a = a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.len() != *d || a.iter().any(|&x| x == 0 || x > *universe) {
            return Err(Error::Invalid(format!("{a:?} is not a {d}-subset of [{universe}]")));
        }
        let l = colex_rank(&a) + 1u32;
        Ok(Hypothesis::Cantor { value: rank_value(gamma, &l), zeros: a })
    }

    /// The split hypothesis at level `k` with stored set `a`.
    pub fn split_member(&self, k: u64, a: &[u64]) -> Result<Hypothesis> {
        let HypothesisClass::SplitCantor { gamma, variant, universe_cap } = self else {
            return Err(Error::Invalid("not a split class".into()));
        };
        let lv = levels(*variant, *universe_cap);
        let Some(pos) = lv.iter().position(|&(kk, _)| kk == k) else {
            return Err(Error::Invalid(format!("{k} is not a level of this class")));
        };
        let mut a = a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.len() != lv[pos].1 || a.iter().any(|&x| x == 0 || x > k) {
            return Err(Error::Invalid(format!(
                "{a:?} is not a {}-subset of [{k}]",
                lv[pos].1
            )));
        }
        let offset: BigUint = lv[..pos].iter().map(|&(kk, s)| binomial(kk, s as u64)).sum();
        let l = offset + colex_rank(&a) + 1u32;
        Ok(Hypothesis::SplitCantor {
            k,
            set: a,
            zero_on: zero_on(*variant),
            value: rank_value(gamma, &l),
        })
    }

    pub fn contains(&self, h: &Hypothesis) -> bool {
        match (self, h) {
            (HypothesisClass::Finite { hypotheses }, _) => hypotheses.contains(h),
            (HypothesisClass::Cantor { .. }, Hypothesis::Cantor { zeros, .. }) => {
                self.cantor_member(zeros).is_ok_and(|m| m == *h)
            }
            (HypothesisClass::SplitCantor { .. }, Hypothesis::SplitCantor { k, set, .. }) => {
                self.split_member(*k, set).is_ok_and(|m| m == *h)
            }
            _ => false,
        }
    }

    /// The points every member is naturally defined on and distinguishes:
    /// `[universe]` for Cantor classes, all level points for split classes,
    /// listed points for finite lists. Refuses above `budget` points.
    pub fn natural_pool(&self, budget: usize) -> Result<Vec<Point>> {
        let pts: Vec<Point> = match self {
            HypothesisClass::Finite { hypotheses } => {
                let mut v: Vec<Point> = hypotheses
                    .iter()
                    .flat_map(|h| match h {
                        Hypothesis::Table { entries, .. } => entries.keys().copied().collect(),
                        other => other.zero_points(),
                    })
                    .collect();
                v.sort();
                v.dedup();
                v
            }
            HypothesisClass::Cantor { universe, .. } => {
                if *universe as usize > budget {
                    return Err(Error::budget(format!("pool of {universe} points")));
                }
                (1..=*universe).map(Point::Nat).collect()
            }
            HypothesisClass::SplitCantor { .. } => {
                let total: u64 = self.split_levels().iter().map(|&(k, _)| k).sum();
                if total as usize > budget {
                    return Err(Error::budget(format!("pool of {total} points")));
                }
                self.split_levels()
                    .iter()
                    .flat_map(|&(k, _)| (1..=k).map(move |x| Point::Pair(k, x)))
                    .collect()
            }
        };
        if pts.len() > budget {
            return Err(Error::budget(format!("pool of {} points", pts.len())));
        }
        Ok(pts)
    }

    /// First hypothesis (canonical order) that interpolates `s`, or `None`.
    ///
    /// The parametric classes are never enumerated: a nonzero label fixes the
    /// rank outright, and with only zero labels the colex-first admissible set
    /// is the observed zeros topped up with the smallest free elements.
    pub fn first_consistent(&self, s: &TrainingSequence) -> Result<Option<Hypothesis>> {
        match self {
            HypothesisClass::Finite { hypotheses } => {
                for h in hypotheses {
                    if h.interpolates(s)? {
                        return Ok(Some(h.clone()));
                    }
                }
                Ok(None)
            }
            HypothesisClass::Cantor { gamma, d, universe } => {
                let Some(obs) = observe(s)? else { return Ok(None) };
                let mut zeros = Vec::new();
                for p in obs.zeros.iter().chain(obs.nonzero.iter()) {
                    if !p.is_nat() {
                        return Err(Error::DomainMismatch(format!(
                            "Cantor class queried at pair point {p}"
                        )));
                    }
                }
                for p in &obs.zeros {
                    if let Point::Nat(n) = p {
                        zeros.push(*n);
                    }
                }
                let cand = match &obs.value {
                    Some(v) => {
                        let Some(l) = value_rank(gamma, v) else { return Ok(None) };
                        match colex_unrank(&(l - 1u32), *d, *universe) {
                            Some(a) => a,
                            None => return Ok(None),
                        }
                    }
                    None => match smallest_superset(&zeros, &[], *d, *universe) {
                        Some(a) => a,
                        None => return Ok(None),
                    },
                };
                let h = self.cantor_member(&cand)?;
                Ok(h.interpolates(s)?.then_some(h))
            }
            HypothesisClass::SplitCantor { gamma, variant, universe_cap } => {
                let Some(obs) = observe(s)? else { return Ok(None) };
                for p in obs.zeros.iter().chain(obs.nonzero.iter()) {
                    if p.is_nat() {
                        return Err(Error::DomainMismatch(format!(
                            "split class queried at natural point {p}"
                        )));
                    }
                }
                let lv = levels(*variant, *universe_cap);
                let (k, a) = match &obs.value {
                    Some(v) => {
                        let Some(l) = value_rank(gamma, v) else { return Ok(None) };
                        let mut r = l - 1u32;
                        let mut found = None;
                        for &(k, size) in &lv {
                            let c = binomial(k, size as u64);
                            if r < c {
                                found = colex_unrank(&r, size, k).map(|a| (k, a));
                                break;
                            }
                            r -= c;
                        }
                        match found {
                            Some(x) => x,
                            None => return Ok(None),
                        }
                    }
                    None => {
                        let mut ks = obs.zeros.iter().map(|p| match p {
                            Point::Pair(k, _) => *k,
                            Point::Nat(_) => unreachable!(),
                        });
                        let k = match ks.next() {
                            None => match lv.first() {
                                Some(&(k, _)) => k,
                                None => return Ok(None),
                            },
                            Some(k) => k,
                        };
                        if ks.any(|kk| kk != k) {
                            return Ok(None);
                        }
                        let Some(&(_, size)) = lv.iter().find(|&&(kk, _)| kk == k) else {
                            return Ok(None);
                        };
                        let xs: Vec<u64> = obs
                            .zeros
                            .iter()
                            .map(|p| match p {
                                Point::Pair(_, x) => *x,
                                Point::Nat(_) => unreachable!(),
                            })
                            .collect();
                        let a = match variant {
                            SplitVariant::SqrtSize => smallest_superset(&xs, &[], size, k),
                            SplitVariant::Complement { .. } => smallest_superset(&[], &xs, size, k),
                        };
                        match a {
                            Some(a) => (k, a),
                            None => return Ok(None),
                        }
                    }
                };
                let h = self.split_member(k, &a)?;
                Ok(h.interpolates(s)?.then_some(h))
            }
        }
    }

    /// Reference implementation of [`first_consistent`](Self::first_consistent)
    /// by scanning the enumeration.
    pub fn first_consistent_by_scan(
        &self,
        s: &TrainingSequence,
        budget: usize,
    ) -> Result<Option<Hypothesis>> {
        for h in self.hypotheses(budget)? {
            if h.interpolates(s)? {
                return Ok(Some(h));
            }
        }
        Ok(None)
    }

    /// Distinct restrictions of the class to `points`, in order of first
    /// appearance, each with the first hypothesis that realizes it.
    pub fn restrictions(
        &self,
        points: &[Point],
        budget: usize,
    ) -> Result<Vec<(Vec<Rational>, Hypothesis)>> {
        let mut seen: BTreeMap<Vec<Rational>, usize> = BTreeMap::new();
        let mut out = Vec::new();
        for h in self.hypotheses(budget)? {
            let r = h.restrict(points)?;
            if !seen.contains_key(&r) {
                seen.insert(r.clone(), out.len());
                out.push((r, h));
            }
        }
        Ok(out)
    }
}

struct Observed {
    zeros: Vec<Point>,
    nonzero: Vec<Point>,
    value: Option<Rational>,
}

/// Splits a sample into zero-labeled and nonzero-labeled points. `None` when
/// the sample cannot be realized by any Cantor-type hypothesis (one point with
/// two labels, or two different nonzero labels).
fn observe(s: &TrainingSequence) -> Result<Option<Observed>> {
    let mut labels: BTreeMap<Point, &Rational> = BTreeMap::new();
    let mut value: Option<Rational> = None;
    for e in s {
        if let Some(prev) = labels.insert(e.point, &e.label) {
            if *prev != e.label {
                return Ok(None);
            }
        }
        if !e.label.is_zero() {
            match &value {
                Some(v) if *v != e.label => return Ok(None),
                Some(_) => {}
                None => value = Some(e.label.clone()),
            }
        }
    }
    let (zeros, nonzero): (Vec<_>, Vec<_>) = labels.iter().partition(|(_, v)| v.is_zero());
    Ok(Some(Observed {
        zeros: zeros.into_iter().map(|(p, _)| *p).collect(),
        nonzero: nonzero.into_iter().map(|(p, _)| *p).collect(),
        value,
    }))
}

fn zero_on(variant: SplitVariant) -> ZeroOn {
    match variant {
        SplitVariant::SqrtSize => ZeroOn::Set,
        SplitVariant::Complement { .. } => ZeroOn::Complement,
    }
}

fn levels(variant: SplitVariant, cap: u64) -> Vec<(u64, usize)> {
    match variant {
        SplitVariant::SqrtSize => (1u64..)
            .take_while(|i| i * i <= cap)
            .map(|i| (i * i, i as usize))
            .collect(),
        SplitVariant::Complement { d } => {
            let lo = (d as u64 - 1).max(1);
            (lo..=cap).map(|k| (k, d - 1)).collect()
        }
    }
}

pub enum ClassIter<'a> {
    Finite(std::slice::Iter<'a, Hypothesis>),
    Cantor {
        gamma: &'a Rational,
        universe: u64,
        set: Vec<u64>,
        l: BigUint,
        done: bool,
    },
    Split {
        gamma: &'a Rational,
        zero_on: ZeroOn,
        levels: Vec<(u64, usize)>,
        level: usize,
        set: Vec<u64>,
        l: BigUint,
        done: bool,
    },
}

impl Iterator for ClassIter<'_> {
    type Item = Hypothesis;

    fn next(&mut self) -> Option<Hypothesis> {
        match self {
            ClassIter::Finite(it) => it.next().cloned(),
            ClassIter::Cantor { gamma, universe, set, l, done } => {
                if *done {
                    return None;
                }
                let h = Hypothesis::Cantor { zeros: set.clone(), value: rank_value(gamma, l) };
                *l += 1u32;
                *done = !colex_next(set, *universe);
                Some(h)
            }
            ClassIter::Split { gamma, zero_on, levels, level, set, l, done } => {
                if *done {
                    return None;
                }
                let k = levels[*level].0;
                let h = Hypothesis::SplitCantor {
                    k,
                    set: set.clone(),
                    zero_on: *zero_on,
                    value: rank_value(gamma, l),
                };
                *l += 1u32;
                if !colex_next(set, k) {
                    *level += 1;
                    match levels.get(*level) {
                        Some(&(_, s)) => *set = (1..=s as u64).collect(),
                        None => *done = true,
                    }
                }
                Some(h)
            }
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            ClassIter::Finite(it) => it.size_hint(),
            _ => (0, None),
        }
    }
}

/// Size of a class as `usize`, if it fits.
pub fn size_usize(class: &HypothesisClass) -> Option<usize> {
    class.size().to_usize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::LabeledExample;
    use proptest::prelude::*;

    fn half() -> Rational {
        Rational::new(1, 2)
    }

    fn seq(pairs: &[(Point, Rational)]) -> TrainingSequence {
        pairs.iter().map(|(p, v)| LabeledExample::new(*p, v.clone()).unwrap()).collect()
    }

    #[test]
    fn cantor_two_of_five_values() {
        let c = HypothesisClass::cantor(half(), 2, 5).unwrap();
        let hs = c.hypotheses(100).unwrap();
        assert_eq!(hs.len(), 10);
        // ranks 1..=10 give 1/2 + 1/(2l): 1, 3/4, 2/3, ..., 11/20
        let expected: Vec<Rational> = (1..=10).map(|l| half() + Rational::new(1, 2 * l)).collect();
        let got: Vec<Rational> = hs
            .iter()
            .map(|h| match h {
                Hypothesis::Cantor { value, .. } => value.clone(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(got, expected);
        assert_eq!(got[0], Rational::one());
        assert_eq!(got[9], Rational::new(11, 20));
    }

    #[test]
    fn cantor_rejects_bad_params() {
        assert!(HypothesisClass::cantor(Rational::zero(), 2, 5).is_err());
        assert!(HypothesisClass::cantor(Rational::one(), 2, 5).is_err());
        assert!(HypothesisClass::cantor(half(), 6, 5).is_err());
        assert!(serde_json::from_str::<HypothesisClass>(r#"{"kind":"cantor","gamma":"1/2","d":2}"#).is_err());
    }

    #[test]
    fn class_json() {
        let c: HypothesisClass =
            serde_json::from_str(r#"{"kind":"cantor","gamma":"1/2","d":2,"universe":6}"#).unwrap();
        assert_eq!(c, HypothesisClass::cantor(half(), 2, 6).unwrap());
        let s: HypothesisClass = serde_json::from_str(
            r#"{"kind":"split_cantor","gamma":"1/2","variant":{"complement":{"d":3}},"universe_cap":5}"#,
        )
        .unwrap();
        assert_eq!(s.split_levels(), vec![(2, 2), (3, 2), (4, 2), (5, 2)]);
        let back: HypothesisClass =
            serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn first_consistent_examples() {
        let c = HypothesisClass::cantor(half(), 2, 5).unwrap();
        // zeros at 1 and 2 force A = {1,2}
        let s = seq(&[(Point::Nat(1), Rational::zero()), (Point::Nat(2), Rational::zero())]);
        assert_eq!(c.first_consistent(&s).unwrap(), Some(Hypothesis::cantor(vec![1, 2], Rational::one())));
        // label 2/3 is rank 3, i.e. A = {2,3}
        let s = seq(&[(Point::Nat(5), Rational::new(2, 3))]);
        assert_eq!(c.first_consistent(&s).unwrap(), Some(Hypothesis::cantor(vec![2, 3], Rational::new(2, 3))));
        // 7/10 encodes no integer rank; 13/25 encodes rank 25 > C(5,2)
        let s = seq(&[(Point::Nat(5), Rational::new(7, 10))]);
        assert_eq!(c.first_consistent(&s).unwrap(), None);
        let s = seq(&[(Point::Nat(5), Rational::new(13, 25))]);
        assert_eq!(c.first_consistent(&s).unwrap(), None);
        // three zeros cannot fit in a 2-set
        let s = seq(&[
            (Point::Nat(1), Rational::zero()),
            (Point::Nat(2), Rational::zero()),
            (Point::Nat(3), Rational::zero()),
        ]);
        assert_eq!(c.first_consistent(&s).unwrap(), None);
        let s = seq(&[(Point::Pair(2, 1), Rational::zero())]);
        assert!(matches!(c.first_consistent(&s), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn sqrt_size_levels_and_ranks() {
        let c = HypothesisClass::split(half(), SplitVariant::SqrtSize, 9).unwrap();
        assert_eq!(c.split_levels(), vec![(1, 1), (4, 2), (9, 3)]);
        // 1 + C(4,2) + C(9,3) = 1 + 6 + 84
        assert_eq!(c.size(), BigUint::from(91u32));
        let h = c.split_member(4, &[1, 2]).unwrap();
        match h {
            Hypothesis::SplitCantor { value, .. } => assert_eq!(value, half() + Rational::new(1, 4)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn membership() {
        let c = HypothesisClass::cantor(half(), 2, 5).unwrap();
        for h in c.iter() {
            assert!(c.contains(&h));
        }
        assert!(!c.contains(&Hypothesis::cantor(vec![1, 2], Rational::new(3, 4))));
    }

    fn small_class() -> impl Strategy<Value = HypothesisClass> {
        prop_oneof![
            (1usize..4, 0u64..4).prop_map(|(d, extra)| HypothesisClass::cantor(
                Rational::new(1, 3), d, d as u64 + extra).unwrap()),
            (1u64..17).prop_map(|cap| HypothesisClass::split(
                Rational::new(1, 2), SplitVariant::SqrtSize, cap).unwrap()),
            (2usize..4, 0u64..4).prop_map(|(d, extra)| HypothesisClass::split(
                Rational::new(1, 2), SplitVariant::Complement { d }, d as u64 + extra).unwrap()),
        ]
    }

    fn sample_for(class: &HypothesisClass, picks: &[(u64, u64, u8)]) -> TrainingSequence {
        let hs: Vec<Hypothesis> = class.iter().collect();
        let pool = class.natural_pool(10_000).unwrap();
        picks
            .iter()
            .map(|&(pi, hi, mode)| {
                let p = pool[(pi as usize) % pool.len()];
                let h = &hs[(hi as usize) % hs.len()];
                let label = match mode % 4 {
                    0 => Rational::zero(),
                    1 => Rational::one(),
                    _ => h.eval(&p).unwrap().clone(),
                };
                LabeledExample::new(p, label).unwrap()
            })
            .collect()
    }

    proptest! {
        #[test]
        fn structured_search_matches_scan(
            class in small_class(),
            picks in proptest::collection::vec((0u64..100, 0u64..100, 0u8..4), 0..5),
        ) {
            let s = sample_for(&class, &picks);
            prop_assert_eq!(
                class.first_consistent(&s).unwrap(),
                class.first_consistent_by_scan(&s, 100_000).unwrap()
            );
        }

        #[test]
        fn enumeration_matches_members(class in small_class()) {
            let hs: Vec<Hypothesis> = class.iter().collect();
            prop_assert_eq!(BigUint::from(hs.len()), class.size());
            let mut values: Vec<Rational> = hs.iter().map(|h| match h {
                Hypothesis::Cantor { value, .. } | Hypothesis::SplitCantor { value, .. } => value.clone(),
                _ => unreachable!(),
            }).collect();
            // strictly decreasing values along the enumeration
            for w in values.windows(2) {
                prop_assert!(w[0] > w[1]);
            }
            values.dedup();
            prop_assert_eq!(values.len(), hs.len());
            for h in &hs {
                prop_assert!(class.contains(h));
            }
        }
    }
}
