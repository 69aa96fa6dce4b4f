//! Fitted predictors and the rules that aggregate several hypotheses.

use serde::{Deserialize, Serialize};

use crate::domain::Point;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::rational::Rational;

/// Anything that maps a point to a value in [0, 1].
pub trait Predict {
    fn predict(&self, x: &Point) -> Result<Rational>;
}

impl Predict for Hypothesis {
    fn predict(&self, x: &Point) -> Result<Rational> {
        self.eval(x).cloned()
    }
}

/// How the values of `m` hypotheses at a point are combined into one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AggregationRule {
    /// The `j`-th smallest value, 1-based.
    OrderStatistic { j: usize },
    Min,
    Max,
    /// The middle value; needs an odd number of members.
    Median,
    Mean,
    /// `sum_i w_i z_i` with nonnegative weights summing to 1.
    Convex { weights: Vec<Rational> },
}

impl AggregationRule {
    /// Proper rules always return one of the member values, so the
    /// aggregate agrees with some member at every point.
    pub fn is_proper(&self) -> bool {
        !matches!(self, AggregationRule::Mean | AggregationRule::Convex { .. })
    }

    /// Checks the rule can combine `m` values.
    pub fn validate(&self, m: usize) -> Result<()> {
        if m == 0 {
            return Err(Error::Invalid("aggregation over zero hypotheses".into()));
        }
        match self {
            AggregationRule::OrderStatistic { j } if *j == 0 || *j > m => Err(Error::Invalid(format!(
                "order statistic {j} out of range for {m} members"
            ))),
            AggregationRule::Median if m.is_multiple_of(2) => Err(Error::Invalid(format!(
                "median needs an odd number of members, got {m}"
            ))),
            AggregationRule::Convex { weights } => {
                if weights.len() != m {
                    return Err(Error::Invalid(format!(
                        "{} convex weights for {m} members",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| w.is_negative()) {
                    return Err(Error::Invalid("negative convex weight".into()));
                }
                let total: Rational = weights.iter().sum();
                if !total.is_one() {
                    return Err(Error::Invalid(format!("convex weights sum to {total}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, values: &[Rational]) -> Result<Rational> {
        self.validate(values.len())?;
        let sorted = || {
            let mut v: Vec<&Rational> = values.iter().collect();
            v.sort();
            v
        };
        Ok(match self {
            AggregationRule::OrderStatistic { j } => sorted()[j - 1].clone(),
            AggregationRule::Min => values.iter().min().unwrap().clone(),
            AggregationRule::Max => values.iter().max().unwrap().clone(),
            AggregationRule::Median => sorted()[values.len() / 2].clone(),
            AggregationRule::Mean => {
                values.iter().sum::<Rational>() / Rational::from(values.len())
            }
            AggregationRule::Convex { weights } => {
                weights.iter().zip(values).map(|(w, z)| w * z).sum()
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictor {
    Single { hypothesis: Hypothesis },
    Aggregate { rule: AggregationRule, members: Vec<Hypothesis> },
    Constant { value: Rational },
}

impl Predictor {
    pub fn aggregate(rule: AggregationRule, members: Vec<Hypothesis>) -> Result<Self> {
        rule.validate(members.len())?;
        Ok(Predictor::Aggregate { rule, members })
    }

    pub fn members(&self) -> &[Hypothesis] {
        match self {
            Predictor::Single { hypothesis } => std::slice::from_ref(hypothesis),
            Predictor::Aggregate { members, .. } => members,
            Predictor::Constant { .. } => &[],
        }
    }
}

impl From<Hypothesis> for Predictor {
    fn from(hypothesis: Hypothesis) -> Self {
        Predictor::Single { hypothesis }
    }
}

impl Predict for Predictor {
    fn predict(&self, x: &Point) -> Result<Rational> {
        match self {
            Predictor::Single { hypothesis } => hypothesis.predict(x),
            Predictor::Constant { value } => Ok(value.clone()),
            Predictor::Aggregate { rule, members } => {
                let vals = members
                    .iter()
                    .map(|h| h.eval(x).cloned())
                    .collect::<Result<Vec<_>>>()?;
                rule.apply(&vals)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn rules_on_three_values() {
        let v = [r(1, 2), r(0, 1), r(1, 1)];
        assert_eq!(AggregationRule::Median.apply(&v).unwrap(), r(1, 2));
        assert_eq!(AggregationRule::Min.apply(&v).unwrap(), r(0, 1));
        assert_eq!(AggregationRule::Max.apply(&v).unwrap(), r(1, 1));
        assert_eq!(AggregationRule::OrderStatistic { j: 2 }.apply(&v).unwrap(), r(1, 2));
        assert_eq!(AggregationRule::Mean.apply(&v).unwrap(), r(1, 2));
        let w = AggregationRule::Convex { weights: vec![r(1, 2), r(1, 4), r(1, 4)] };
        assert_eq!(w.apply(&v).unwrap(), r(1, 2));
    }

    #[test]
    fn rule_preconditions() {
        assert!(AggregationRule::Median.apply(&[r(1, 2), r(1, 3)]).is_err());
        assert!(AggregationRule::OrderStatistic { j: 3 }.apply(&[r(1, 2)]).is_err());
        assert!(AggregationRule::Mean.apply(&[]).is_err());
        let w = AggregationRule::Convex { weights: vec![r(1, 2), r(1, 3)] };
        assert!(w.apply(&[r(0, 1), r(1, 1)]).is_err());
    }

    #[test]
    fn proper_rules_return_a_member_value() {
        let v = [r(1, 5), r(3, 5), r(2, 5), r(4, 5), r(1, 1)];
        for rule in [
            AggregationRule::Median,
            AggregationRule::Min,
            AggregationRule::Max,
            AggregationRule::OrderStatistic { j: 4 },
        ] {
            assert!(rule.is_proper());
            assert!(v.contains(&rule.apply(&v).unwrap()));
        }
        assert!(!AggregationRule::Mean.is_proper());
    }

    #[test]
    fn rule_json() {
        let js = serde_json::to_string(&AggregationRule::OrderStatistic { j: 2 }).unwrap();
        assert_eq!(js, r#"{"rule":"order_statistic","j":2}"#);
        let m: AggregationRule = serde_json::from_str(r#"{"rule":"median"}"#).unwrap();
        assert_eq!(m, AggregationRule::Median);
    }
}
