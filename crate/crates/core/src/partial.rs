//! Partial concept classes over a finite domain `{0, .., n-1}` and their
//! greedy disambiguation into total classes.
//!
//! Values are `0`, `1` or `*` (undefined). A set `S` is shattered when every
//! 0/1 pattern on `S` is realized by some concept defined on all of `S`.
//! The shattering strength of a class counts its shattered sets, the empty
//! set included (an empty class has strength 0).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::class::HypothesisClass;
use crate::domain::TrainingSequence;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartialValue {
    Zero,
    One,
    Star,
}

impl PartialValue {
    pub fn as_char(self) -> char {
        match self {
            PartialValue::Zero => '0',
            PartialValue::One => '1',
            PartialValue::Star => '*',
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(PartialValue::Zero),
            '1' => Some(PartialValue::One),
            '*' => Some(PartialValue::Star),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialConcept(pub Vec<PartialValue>);

impl PartialConcept {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn masks(&self) -> (u64, u64) {
        let mut defined = 0u64;
        let mut ones = 0u64;
        for (i, v) in self.0.iter().enumerate() {
            match v {
                PartialValue::Zero => defined |= 1 << i,
                PartialValue::One => {
                    defined |= 1 << i;
                    ones |= 1 << i;
                }
                PartialValue::Star => {}
            }
        }
        (defined, ones)
    }
}

impl fmt::Display for PartialConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|v| write!(f, "{}", v.as_char()))
    }
}

impl FromStr for PartialConcept {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| PartialValue::from_char(c).ok_or_else(|| Error::Parse(format!("bad symbol {c:?} in row {s:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(PartialConcept)
    }
}

/// A deduplicated list of partial concepts (first occurrence order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialClass {
    domain_size: usize,
    concepts: Vec<PartialConcept>,
}

/// A deduplicated list of total 0/1 concepts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalClass {
    domain_size: usize,
    concepts: Vec<Vec<bool>>,
}

const MAX_DOMAIN: usize = 64;

impl PartialClass {
    pub fn new(domain_size: usize, concepts: Vec<PartialConcept>) -> Result<Self> {
        if domain_size > MAX_DOMAIN {
            return Err(Error::budget(format!("domain of {domain_size} points (at most {MAX_DOMAIN})")));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for c in concepts {
            if c.len() != domain_size {
                return Err(Error::Invalid(format!(
                    "concept of length {} over a domain of {domain_size}",
                    c.len()
                )));
            }
            if seen.insert(c.clone()) {
                out.push(c);
            }
        }
        Ok(PartialClass { domain_size, concepts: out })
    }

    /// Parses one concept per line over `{0, 1, *}`; blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse_rows(text: &str) -> Result<Self> {
        let rows: Vec<PartialConcept> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<_>>()?;
        let n = rows.first().map_or(0, PartialConcept::len);
        Self::new(n, rows)
    }

    pub fn to_rows(&self) -> String {
        self.concepts.iter().map(|c| format!("{c}\n")).collect()
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn concepts(&self) -> &[PartialConcept] {
        &self.concepts
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    fn masks(&self) -> Vec<(u64, u64)> {
        self.concepts.iter().map(PartialConcept::masks).collect()
    }
}

impl TotalClass {
    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn concepts(&self) -> &[Vec<bool>] {
        &self.concepts
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn to_rows(&self) -> String {
        self.concepts
            .iter()
            .map(|c| c.iter().map(|&b| if b { '1' } else { '0' }).chain(['\n']).collect::<String>())
            .collect()
    }

    /// The same concepts viewed as partial concepts without stars.
    pub fn as_partial(&self) -> PartialClass {
        let concepts = self
            .concepts
            .iter()
            .map(|c| {
                PartialConcept(
                    c.iter().map(|&b| if b { PartialValue::One } else { PartialValue::Zero }).collect(),
                )
            })
            .collect();
        PartialClass { domain_size: self.domain_size, concepts }
    }
}

fn is_shattered(members: &[(u64, u64)], set: u64) -> bool {
    let size = set.count_ones();
    let full = 1usize << size;
    if members.len() < full {
        return false;
    }
    let mut seen = vec![false; full];
    let mut count = 0;
    for &(def, ones) in members {
        if def & set != set {
            continue;
        }
        let b = extract(ones, set);
        if !seen[b] {
            seen[b] = true;
            count += 1;
            if count == full {
                return true;
            }
        }
    }
    false
}

fn extract(x: u64, mut mask: u64) -> usize {
    let mut out = 0usize;
    let mut k = 0;
    while mask != 0 {
        let bit = mask & mask.wrapping_neg();
        if x & bit != 0 {
            out |= 1 << k;
        }
        k += 1;
        mask ^= bit;
    }
    out
}

/// All shattered sets, level by level. Shattering is closed under subsets,
/// so a candidate is only tested once all of its one-smaller subsets passed.
/// Returns `(count, largest size)`; an empty class gives `(0, 0)`.
fn shattered_profile(members: &[(u64, u64)], n: usize, work: &mut u64, limit: u64) -> Result<(usize, usize)> {
    if members.is_empty() {
        return Ok((0, 0));
    }
    let mut level: HashSet<u64> = HashSet::from([0u64]);
    let mut count = 1usize;
    let mut size = 0usize;
    loop {
        let mut next: HashSet<u64> = HashSet::new();
        for &s in &level {
            let start = if s == 0 { 0 } else { 64 - s.leading_zeros() as usize };
            for x in start..n {
                let t = s | 1 << x;
                let mut rest = t;
                let mut closed = true;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    rest ^= bit;
                    if !level.contains(&(t ^ bit)) {
                        closed = false;
                        break;
                    }
                }
                *work += members.len() as u64;
                if *work > limit {
                    return Err(Error::budget("shattered-set enumeration"));
                }
                if closed && is_shattered(members, t) {
                    next.insert(t);
                }
            }
        }
        if next.is_empty() {
            return Ok((count, size));
        }
        count += next.len();
        size += 1;
        level = next;
    }
}

/// VC dimension: size of the largest shattered set (0 for an empty class).
pub fn partial_vc_dimension(class: &PartialClass) -> Result<usize> {
    let mut work = 0;
    Ok(shattered_profile(&class.masks(), class.domain_size, &mut work, Budget::default().max_work)?.1)
}

/// Number of shattered subsets of the domain, the empty set included.
pub fn shattering_strength(class: &PartialClass) -> Result<usize> {
    let mut work = 0;
    Ok(shattered_profile(&class.masks(), class.domain_size, &mut work, Budget::default().max_work)?.0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disambiguation {
    pub total: TotalClass,
    /// `assignment[i]` is the index in `total` of the completion of concept `i`.
    pub assignment: Vec<usize>,
}

/// Completes every partial concept greedily along the domain order.
///
/// For concept `h`, start from the whole class `H'`. At each point `x`, let
/// `M` be the value whose restriction `H'_(x,M)` has the larger shattering
/// strength (ties to 1). If `h(x)` is defined and equals `1 - M`, write it and
/// shrink `H'` to `H'_(x, h(x))`; otherwise write `M` and keep `H'`.
pub fn disambiguate(class: &PartialClass, budget: &Budget) -> Result<Disambiguation> {
    let n = class.domain_size;
    let masks = class.masks();
    let words = masks.len().div_ceil(64).max(1);
    let mut memo: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut work = 0u64;
    let mut strength = |set: &Vec<u64>, work: &mut u64| -> Result<usize> {
        if let Some(&s) = memo.get(set) {
            return Ok(s);
        }
        let members: Vec<(u64, u64)> = (0..masks.len())
            .filter(|&i| set[i / 64] >> (i % 64) & 1 == 1)
            .map(|i| masks[i])
            .collect();
        let s = shattered_profile(&members, n, work, budget.max_work)?.0;
        memo.insert(set.clone(), s);
        Ok(s)
    };
    let restrict = |set: &Vec<u64>, x: usize, y: bool| -> Vec<u64> {
        let mut out = vec![0u64; words];
        for (i, &(def, ones)) in masks.iter().enumerate() {
            if set[i / 64] >> (i % 64) & 1 == 1 && def >> x & 1 == 1 && (ones >> x & 1 == 1) == y {
                out[i / 64] |= 1 << (i % 64);
            }
        }
        out
    };
    let mut all = vec![0u64; words];
    for i in 0..masks.len() {
        all[i / 64] |= 1 << (i % 64);
    }

    let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut concepts: Vec<Vec<bool>> = Vec::new();
    let mut assignment = Vec::with_capacity(masks.len());
    for &(def, ones) in &masks {
        let mut current = all.clone();
        let mut out = Vec::with_capacity(n);
        for x in 0..n {
            let h1 = restrict(&current, x, true);
            let h0 = restrict(&current, x, false);
            let majority = strength(&h1, &mut work)? >= strength(&h0, &mut work)?;
            let defined = def >> x & 1 == 1;
            let hx = ones >> x & 1 == 1;
            if defined && hx != majority {
                out.push(hx);
                current = if hx { h1 } else { h0 };
            } else {
                out.push(majority);
            }
        }
        let next = concepts.len();
        let idx = *index.entry(out.clone()).or_insert(next);
        if idx == next {
            concepts.push(out);
        }
        assignment.push(idx);
    }
    Ok(Disambiguation { total: TotalClass { domain_size: n, concepts }, assignment })
}

/// True when every partial concept has a total concept agreeing with it
/// wherever it is defined.
pub fn is_disambiguation_of(total: &TotalClass, class: &PartialClass) -> bool {
    class.concepts.iter().all(|c| {
        total.concepts.iter().any(|t| {
            c.0.iter().zip(t).all(|(v, &b)| match v {
                PartialValue::Star => true,
                PartialValue::One => b,
                PartialValue::Zero => !b,
            })
        })
    })
}

/// `max(2, ln x)`.
pub fn ln_floor2(x: f64) -> f64 {
    x.ln().max(2.0)
}

/// Upper bound `2 d Ln^2(e n / d)` on the log-size of the greedy
/// disambiguation of a VC-`d` class over `n` points. Zero when `d = 0`.
pub fn ln_disambiguation_bound(d: usize, n: usize) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let l = ln_floor2(std::f64::consts::E * n as f64 / d as f64);
    2.0 * d as f64 * l * l
}

/// Loss-pattern view of a real-valued class on a sample: per example, `0`
/// when the hypothesis matches the label, `*` when it is off by at most
/// gamma, `1` when off by more.
pub fn loss_pattern_reduction(
    class: &HypothesisClass,
    s: &TrainingSequence,
    gamma: &Rational,
    budget: &Budget,
) -> Result<PartialClass> {
    let concepts = class
        .hypotheses(budget.max_hypotheses)?
        .iter()
        .map(|h| {
            s.iter()
                .map(|e| {
                    let v = h.eval(&e.point)?;
                    Ok(if *v == e.label {
                        PartialValue::Zero
                    } else if v.abs_diff(&e.label) <= *gamma {
                        PartialValue::Star
                    } else {
                        PartialValue::One
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(PartialConcept)
        })
        .collect::<Result<Vec<_>>>()?;
    PartialClass::new(s.len(), concepts)
}
