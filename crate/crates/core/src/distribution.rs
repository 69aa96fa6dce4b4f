//! Finite labeled distributions and exact sampling from them.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::domain::{LabeledExample, Point, TrainingSequence};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::rational::Rational;
use crate::rng::{uniform_below_big, Seed};

/// A categorical law over `0..len` with exact rational masses.
///
/// Sampling is inverse-CDF on integer weights over the common denominator,
/// so the draw frequencies are exactly the masses (no float rounding).
#[derive(Clone, Debug, PartialEq)]
pub struct Categorical {
    masses: Vec<Rational>,
    cdf: Cdf,
}

#[derive(Clone, Debug, PartialEq)]
enum Cdf {
    Small { cum: Vec<u64>, total: u64 },
    Big { cum: Vec<BigUint>, total: BigUint },
}

impl Categorical {
    /// Masses must be nonnegative and sum to exactly 1.
    pub fn new(masses: Vec<Rational>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Invalid("categorical law needs at least one outcome".into()));
        }
        if let Some(m) = masses.iter().find(|m| m.is_negative()) {
            return Err(Error::Invalid(format!("negative mass {m}")));
        }
        let total: Rational = masses.iter().sum();
        if !total.is_one() {
            return Err(Error::Invalid(format!("masses sum to {total}, not 1")));
        }
        let lcm = masses.iter().fold(BigInt::one(), |acc, m| acc.lcm(m.denom()));
        let weights: Vec<BigUint> = masses
            .iter()
            .map(|m| (m.numer() * (&lcm / m.denom())).to_biguint().expect("nonnegative"))
            .collect();
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = BigUint::ZERO;
        for w in weights {
            acc += w;
            cum.push(acc.clone());
        }
        let cdf = match cum.iter().map(|c| c.to_u64()).collect::<Option<Vec<u64>>>() {
            Some(small) => Cdf::Small { total: *small.last().unwrap(), cum: small },
            None => Cdf::Big { total: acc, cum },
        };
        Ok(Categorical { masses, cdf })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Invalid("uniform law over nothing".into()));
        }
        Self::new(vec![Rational::new(1, len as i64); len])
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> usize {
        match &self.cdf {
            Cdf::Small { cum, total } => {
                let u = rng.random_range(0..*total);
                cum.partition_point(|&c| c <= u)
            }
            Cdf::Big { cum, total } => {
                let u = uniform_below_big(rng, total);
                cum.partition_point(|c| *c <= u)
            }
        }
    }

    pub fn sample_many<R: RngCore>(&self, rng: &mut R, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Point,
    pub label: Rational,
    pub mass: Rational,
}

/// A distribution over labeled examples with finite support.
///
/// Points are distinct, labels lie in [0, 1], masses sum to exactly 1.
/// Atoms of mass zero are allowed and never drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub struct FiniteDistribution {
    atoms: Vec<Atom>,
    law: Categorical,
}

#[derive(Serialize, Deserialize)]
struct DistRepr {
    atoms: Vec<Atom>,
}

impl TryFrom<DistRepr> for FiniteDistribution {
    type Error = Error;
    fn try_from(r: DistRepr) -> Result<Self> {
        FiniteDistribution::new(r.atoms)
    }
}

impl From<FiniteDistribution> for DistRepr {
    fn from(d: FiniteDistribution) -> Self {
        DistRepr { atoms: d.atoms }
    }
}

impl FiniteDistribution {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for a in &atoms {
            if !seen.insert(a.point) {
                return Err(Error::Invalid(format!("point {} appears twice", a.point)));
            }
            if !a.label.in_unit_interval() {
                return Err(Error::Invalid(format!("label {} at {} outside [0,1]", a.label, a.point)));
            }
        }
        let law = Categorical::new(atoms.iter().map(|a| a.mass.clone()).collect())?;
        Ok(FiniteDistribution { atoms, law })
    }

    /// Convenience constructor from `(point, label, mass)` triples.
    pub fn from_triples(triples: impl IntoIterator<Item = (Point, Rational, Rational)>) -> Result<Self> {
        Self::new(
            triples
                .into_iter()
                .map(|(point, label, mass)| Atom { point, label, mass })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn law(&self) -> &Categorical {
        &self.law
    }

    pub fn example(&self, i: usize) -> LabeledExample {
        LabeledExample { point: self.atoms[i].point, label: self.atoms[i].label.clone() }
    }

    /// Indices of atoms with positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.atoms.len()).filter(|&i| !self.atoms[i].mass.is_zero()).collect()
    }

    pub fn sample_with<R: RngCore>(&self, rng: &mut R, n: usize) -> TrainingSequence {
        (0..n).map(|_| self.example(self.law.sample(rng))).collect()
    }

    /// `n` i.i.d. draws from stream `stream` of `seed`.
    pub fn sample(&self, n: usize, seed: Seed, stream: u64) -> TrainingSequence {
        self.sample_with(&mut seed.rng(stream), n)
    }

    /// True when some hypothesis labels every atom of positive mass exactly.
    pub fn is_realized_by(&self, h: &Hypothesis) -> Result<bool> {
        for a in self.atoms.iter().filter(|a| !a.mass.is_zero()) {
            if *h.eval(&a.point)? != a.label {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> FiniteDistribution {
        FiniteDistribution::from_triples([
            (Point::Nat(1), Rational::zero(), Rational::new(1, 3)),
            (Point::Nat(2), Rational::one(), Rational::new(2, 3)),
        ])
        .unwrap()
    }

    #[test]
    fn validation() {
        let bad_sum = FiniteDistribution::from_triples([(Point::Nat(1), Rational::zero(), Rational::new(1, 2))]);
        assert!(bad_sum.is_err());
        let dup = FiniteDistribution::from_triples([
            (Point::Nat(1), Rational::zero(), Rational::new(1, 2)),
            (Point::Nat(1), Rational::zero(), Rational::new(1, 2)),
        ]);
        assert!(dup.is_err());
        let neg = FiniteDistribution::from_triples([
            (Point::Nat(1), Rational::zero(), Rational::new(3, 2)),
            (Point::Nat(2), Rational::zero(), Rational::new(-1, 2)),
        ]);
        assert!(neg.is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_proportional() {
        let d = two_point();
        assert_eq!(d.sample(50, Seed(9), 1), d.sample(50, Seed(9), 1));
        let s = d.sample(30_000, Seed(9), 2);
        let ones = s.iter().filter(|e| e.label.is_one()).count() as f64 / 30_000.0;
        assert!((ones - 2.0 / 3.0).abs() < 0.015, "{ones}");
    }

    #[test]
    fn zero_mass_atoms_are_never_drawn() {
        let d = FiniteDistribution::from_triples([
            (Point::Nat(1), Rational::zero(), Rational::zero()),
            (Point::Nat(2), Rational::zero(), Rational::one()),
            (Point::Nat(3), Rational::zero(), Rational::zero()),
        ])
        .unwrap();
        assert!(d.sample(1000, Seed(1), 0).points().all(|p| *p == Point::Nat(2)));
        assert_eq!(d.support(), vec![1]);
    }

    #[test]
    fn huge_denominators_use_big_path() {
        let tiny = Rational::from_big(BigInt::one(), BigInt::from(10u8).pow(30));
        let law = Categorical::new(vec![tiny.clone(), Rational::one() - tiny]).unwrap();
        assert!(matches!(law.cdf, Cdf::Big { .. }));
        let mut rng = Seed(4).rng(0);
        assert!(law.sample_many(&mut rng, 1000).iter().all(|&i| i == 1));
    }

    #[test]
    fn json_round_trip() {
        let d = two_point();
        let js = serde_json::to_string(&d).unwrap();
        let back: FiniteDistribution = serde_json::from_str(&js).unwrap();
        assert_eq!(back, d);
    }
}
