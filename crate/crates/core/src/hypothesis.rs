//! Individual real-valued hypotheses `X -> [0, 1]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::Point;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Which side of the stored set a split hypothesis is zero on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroOn {
    /// zero on `{(k, x) : x in set}`
    Set,
    /// zero on `{(k, x) : x in [k] \ set}`
    Complement,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hypothesis {
    /// Explicit values; points not listed take `default`, or are outside the
    /// domain when there is no default.
    Table {
        #[serde(with = "table_entries")]
        entries: BTreeMap<Point, Rational>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        default: Option<Rational>,
    },
    /// Zero on the naturals in `zeros`, `value` on every other natural.
    Cantor { zeros: Vec<u64>, value: Rational },
    /// Defined on pairs. Zero on part of level `k` (chosen by `zero_on`),
    /// `value` everywhere else.
    SplitCantor {
        k: u64,
        set: Vec<u64>,
        zero_on: ZeroOn,
        value: Rational,
    },
}

impl Hypothesis {
    pub fn table(entries: impl IntoIterator<Item = (Point, Rational)>) -> Self {
        Hypothesis::Table { entries: entries.into_iter().collect(), default: None }
    }

    pub fn constant(value: Rational) -> Self {
        Hypothesis::Table { entries: BTreeMap::new(), default: Some(value) }
    }

    /// Sorts and deduplicates `zeros`.
    pub fn cantor(mut zeros: Vec<u64>, value: Rational) -> Self {
        zeros.sort_unstable();
        zeros.dedup();
        Hypothesis::Cantor { zeros, value }
    }

    pub fn split(k: u64, mut set: Vec<u64>, zero_on: ZeroOn, value: Rational) -> Self {
        set.sort_unstable();
        set.dedup();
        Hypothesis::SplitCantor { k, set, zero_on, value }
    }

    pub fn eval(&self, x: &Point) -> Result<&Rational> {
        match self {
            Hypothesis::Table { entries, default } => entries
                .get(x)
                .or(default.as_ref())
                .ok_or_else(|| Error::DomainMismatch(format!("table hypothesis has no value at {x}"))),
            Hypothesis::Cantor { zeros, value } => match x {
                Point::Nat(n) => Ok(if zeros.binary_search(n).is_ok() {
                    Rational::zero_ref()
                } else {
                    value
                }),
                Point::Pair(..) => Err(Error::DomainMismatch(format!(
                    "Cantor hypothesis evaluated at pair point {x}"
                ))),
            },
            Hypothesis::SplitCantor { k, set, zero_on, value } => match x {
                Point::Pair(kk, xx) => {
                    if kk != k {
                        return Ok(value);
                    }
                    let in_set = set.binary_search(xx).is_ok();
                    let zero = match zero_on {
                        ZeroOn::Set => in_set,
                        ZeroOn::Complement => !in_set,
                    };
                    Ok(if zero { Rational::zero_ref() } else { value })
                }
                Point::Nat(_) => Err(Error::DomainMismatch(format!(
                    "split hypothesis evaluated at natural point {x}"
                ))),
            },
        }
    }

    /// Values at a list of points, in order.
    pub fn restrict(&self, points: &[Point]) -> Result<Vec<Rational>> {
        points.iter().map(|p| self.eval(p).cloned()).collect()
    }

    /// True when `h(x) = y` for every example.
    pub fn interpolates(&self, s: &crate::domain::TrainingSequence) -> Result<bool> {
        for e in s {
            if *self.eval(&e.point)? != e.label {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Points of level `k` where a split hypothesis is zero; for a Cantor
    /// hypothesis its zero set. Empty for tables.
    pub fn zero_points(&self) -> Vec<Point> {
        match self {
            Hypothesis::Table { entries, .. } => {
                entries.iter().filter(|(_, v)| v.is_zero()).map(|(p, _)| *p).collect()
            }
            Hypothesis::Cantor { zeros, .. } => zeros.iter().map(|&n| Point::Nat(n)).collect(),
            Hypothesis::SplitCantor { k, set, zero_on, .. } => match zero_on {
                ZeroOn::Set => set.iter().map(|&x| Point::Pair(*k, x)).collect(),
                ZeroOn::Complement => (1..=*k)
                    .filter(|x| set.binary_search(x).is_err())
                    .map(|x| Point::Pair(*k, x))
                    .collect(),
            },
        }
    }
}

mod table_entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<Point, Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<Point, Rational>, D::Error> {
        let v: Vec<(Point, Rational)> = Vec::deserialize(d)?;
        let mut m = BTreeMap::new();
        for (p, r) in v {
            if !r.in_unit_interval() {
                return Err(serde::de::Error::custom(format!("value {r} at {p} outside [0,1]")));
            }
            if m.insert(p, r).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate table entry for {p}")));
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_values() {
        let h = Hypothesis::cantor(vec![3, 1], Rational::new(3, 4));
        assert!(h.eval(&Point::Nat(1)).unwrap().is_zero());
        assert_eq!(*h.eval(&Point::Nat(2)).unwrap(), Rational::new(3, 4));
        assert!(matches!(h.eval(&Point::Pair(2, 1)), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn split_values() {
        let h = Hypothesis::split(4, vec![2], ZeroOn::Set, Rational::new(5, 6));
        assert!(h.eval(&Point::Pair(4, 2)).unwrap().is_zero());
        assert_eq!(*h.eval(&Point::Pair(4, 1)).unwrap(), Rational::new(5, 6));
        assert_eq!(*h.eval(&Point::Pair(9, 2)).unwrap(), Rational::new(5, 6));
        let c = Hypothesis::split(4, vec![2], ZeroOn::Complement, Rational::new(5, 6));
        assert!(c.eval(&Point::Pair(4, 1)).unwrap().is_zero());
        assert!(!c.eval(&Point::Pair(4, 2)).unwrap().is_zero());
        assert!(matches!(c.eval(&Point::Nat(2)), Err(Error::DomainMismatch(_))));
        assert_eq!(c.zero_points().len(), 3);
    }

    #[test]
    fn table_domain() {
        let h = Hypothesis::table([(Point::Nat(1), Rational::new(1, 3))]);
        assert_eq!(*h.eval(&Point::Nat(1)).unwrap(), Rational::new(1, 3));
        assert!(h.eval(&Point::Nat(2)).is_err());
        let json = serde_json::to_string(&h).unwrap();
        let back: Hypothesis = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
    }
}
