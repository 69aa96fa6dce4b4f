//! The cutoff loss `1{|p(x) - y| > gamma}` and its expectations.

use crate::distribution::FiniteDistribution;
use crate::domain::TrainingSequence;
use crate::error::{Error, Result};
use crate::predictor::Predict;
use crate::rational::Rational;

fn check_gamma(gamma: &Rational) -> Result<()> {
    if gamma.is_negative() || *gamma >= Rational::one() {
        return Err(Error::Invalid(format!("gamma = {gamma} must lie in [0, 1)")));
    }
    Ok(())
}

/// True when the prediction misses the label by more than `gamma`.
pub fn violates(prediction: &Rational, label: &Rational, gamma: &Rational) -> bool {
    prediction.abs_diff(label) > *gamma
}

/// Exact probability mass of atoms the predictor misses by more than `gamma`.
/// Atoms of zero mass are not evaluated.
pub fn cutoff_loss<P: Predict + ?Sized>(
    p: &P,
    d: &FiniteDistribution,
    gamma: &Rational,
) -> Result<Rational> {
    check_gamma(gamma)?;
    let mut total = Rational::zero();
    for a in d.atoms().iter().filter(|a| !a.mass.is_zero()) {
        if violates(&p.predict(&a.point)?, &a.label, gamma) {
            total = total + &a.mass;
        }
    }
    Ok(total)
}

/// Fraction of examples (with multiplicity) missed by more than `gamma`.
pub fn empirical_cutoff_loss<P: Predict + ?Sized>(
    p: &P,
    s: &TrainingSequence,
    gamma: &Rational,
) -> Result<Rational> {
    check_gamma(gamma)?;
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut bad = 0usize;
    for e in s {
        if violates(&p.predict(&e.point)?, &e.label, gamma) {
            bad += 1;
        }
    }
    Ok(Rational::from(bad) / Rational::from(s.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{LabeledExample, Point};
    use crate::hypothesis::Hypothesis;
    use crate::predictor::Predictor;

    #[test]
    fn single_atom_cases() {
        let d = FiniteDistribution::from_triples([(Point::Nat(1), Rational::zero(), Rational::one())]).unwrap();
        let half = Rational::new(1, 2);
        let c = |v: Rational| Predictor::Constant { value: v };
        assert!(cutoff_loss(&c(Rational::new(3, 5)), &d, &half).unwrap().is_one());
        assert!(cutoff_loss(&c(Rational::new(2, 5)), &d, &half).unwrap().is_zero());
        // boundary is not a violation
        assert!(cutoff_loss(&c(half.clone()), &d, &half).unwrap().is_zero());
    }

    #[test]
    fn loss_is_mass_weighted() {
        let d = FiniteDistribution::from_triples([
            (Point::Nat(1), Rational::zero(), Rational::new(1, 4)),
            (Point::Nat(2), Rational::zero(), Rational::new(3, 4)),
        ])
        .unwrap();
        let h = Hypothesis::cantor(vec![2], Rational::one());
        assert_eq!(cutoff_loss(&h, &d, &Rational::new(1, 2)).unwrap(), Rational::new(1, 4));
    }

    #[test]
    fn empirical_loss() {
        let h = Hypothesis::cantor(vec![1], Rational::one());
        let s: TrainingSequence = [1, 2, 2, 3]
            .iter()
            .map(|&n| LabeledExample::new(Point::Nat(n), Rational::zero()).unwrap())
            .collect();
        assert_eq!(empirical_cutoff_loss(&h, &s, &Rational::new(1, 2)).unwrap(), Rational::new(3, 4));
        assert_eq!(
            empirical_cutoff_loss(&h, &TrainingSequence::default(), &Rational::new(1, 2)),
            Err(Error::EmptySample)
        );
    }
}
