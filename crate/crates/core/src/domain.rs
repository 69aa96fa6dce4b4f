//! Points, labeled examples and training sequences.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A domain point: a natural number (Cantor classes) or a pair `(k, x)` with
/// `1 <= x <= k` (split classes). Points order naturals before pairs, then
/// numerically.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", try_from = "PointRepr")]
pub enum Point {
    Nat(u64),
    Pair(u64, u64),
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum PointRepr {
    Nat(u64),
    Pair(u64, u64),
}

impl TryFrom<PointRepr> for Point {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        match r {
            PointRepr::Nat(n) => Ok(Point::Nat(n)),
            PointRepr::Pair(k, x) => Point::pair(k, x),
        }
    }
}

impl Point {
    /// Validated pair constructor.
    pub fn pair(k: u64, x: u64) -> Result<Self> {
        if x == 0 || x > k {
            return Err(Error::Invalid(format!("pair point ({k},{x}) needs 1 <= x <= k")));
        }
        Ok(Point::Pair(k, x))
    }

    pub fn is_nat(&self) -> bool {
        matches!(self, Point::Nat(_))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Nat(n) => write!(f, "{n}"),
            Point::Pair(k, x) => write!(f, "({k},{x})"),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ExampleRepr")]
pub struct LabeledExample {
    pub point: Point,
    pub label: Rational,
}

#[derive(Deserialize)]
struct ExampleRepr {
    point: Point,
    label: Rational,
}

impl TryFrom<ExampleRepr> for LabeledExample {
    type Error = Error;
    fn try_from(r: ExampleRepr) -> Result<Self> {
        LabeledExample::new(r.point, r.label)
    }
}

impl LabeledExample {
    /// Labels must lie in [0, 1].
    pub fn new(point: Point, label: Rational) -> Result<Self> {
        if !label.in_unit_interval() {
            return Err(Error::Invalid(format!("label {label} at {point} is outside [0,1]")));
        }
        Ok(LabeledExample { point, label })
    }
}

/// An ordered sequence of labeled examples. Repeats are allowed and order is kept.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrainingSequence(pub Vec<LabeledExample>);

impl TrainingSequence {
    pub fn new(examples: Vec<LabeledExample>) -> Self {
        TrainingSequence(examples)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.0.iter()
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.0.iter().map(|e| &e.point)
    }

    /// The examples at the given positions, in the given order.
    pub fn select(&self, idx: &[usize]) -> TrainingSequence {
        TrainingSequence(idx.iter().map(|&i| self.0[i].clone()).collect())
    }
}

impl FromIterator<LabeledExample> for TrainingSequence {
    fn from_iter<I: IntoIterator<Item = LabeledExample>>(iter: I) -> Self {
        TrainingSequence(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a TrainingSequence {
    type Item = &'a LabeledExample;
    type IntoIter = std::slice::Iter<'a, LabeledExample>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_json_forms() {
        assert_eq!(serde_json::to_string(&Point::Nat(3)).unwrap(), r#"{"nat":3}"#);
        assert_eq!(serde_json::to_string(&Point::Pair(4, 2)).unwrap(), r#"{"pair":[4,2]}"#);
        let p: Point = serde_json::from_str(r#"{"pair":[4,2]}"#).unwrap();
        assert_eq!(p, Point::Pair(4, 2));
        assert!(serde_json::from_str::<Point>(r#"{"pair":[2,4]}"#).is_err());
        assert!(serde_json::from_str::<Point>(r#"{"pair":[2,0]}"#).is_err());
    }

    #[test]
    fn labels_are_checked() {
        assert!(LabeledExample::new(Point::Nat(1), Rational::new(3, 2)).is_err());
        assert!(LabeledExample::new(Point::Nat(1), Rational::new(-1, 2)).is_err());
        let bad = r#"{"point":{"nat":1},"label":"5/4"}"#;
        assert!(serde_json::from_str::<LabeledExample>(bad).is_err());
    }

    #[test]
    fn points_order_nats_first() {
        assert!(Point::Nat(100) < Point::Pair(1, 1));
        assert!(Point::Pair(2, 2) < Point::Pair(3, 1));
    }
}
