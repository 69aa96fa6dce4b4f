//! Binomials and colexicographic ranking of finite subsets of `{1, 2, ...}`.
//!
//! Sets are sorted ascending and 1-based. Colex order compares the largest
//! elements first, so the rank of a set does not depend on any universe size:
//! `rank(a_1 < ... < a_d) = sum_i C(a_i - 1, i)`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// 0-based colex rank of a sorted 1-based set.
pub fn colex_rank(set: &[u64]) -> BigUint {
    set.iter()
        .enumerate()
        .map(|(i, &a)| binomial(a - 1, i as u64 + 1))
        .sum()
}

/// Inverse of [`colex_rank`] for sets of size `d` drawn from `[universe]`.
/// Returns `None` when the rank is out of range.
pub fn colex_unrank(rank: &BigUint, d: usize, universe: u64) -> Option<Vec<u64>> {
    if *rank >= binomial(universe, d as u64) {
        return None;
    }
    let mut r = rank.clone();
    let mut out = vec![0u64; d];
    let mut hi = universe;
    for i in (1..=d as u64).rev() {
        // largest c < hi with C(c, i) <= r; C(i - 1, i) = 0 bounds the search
        let (mut lo, mut top) = (i - 1, hi - 1);
        while lo < top {
            let mid = lo + (top - lo).div_ceil(2);
            if binomial(mid, i) <= r {
                lo = mid;
            } else {
                top = mid - 1;
            }
        }
        let c = lo;
        r -= binomial(c, i);
        out[i as usize - 1] = c + 1;
        hi = c;
    }
    Some(out)
}

/// Advance a sorted set to its colex successor within `[universe]`.
/// Returns false (leaving the set unspecified) when it was the last one.
pub fn colex_next(set: &mut [u64], universe: u64) -> bool {
    let d = set.len();
    if d == 0 {
        return false;
    }
    for j in 0..d {
        let limit = if j + 1 < d { set[j + 1] } else { universe + 1 };
        if set[j] + 1 < limit {
            set[j] += 1;
            for (t, v) in set.iter_mut().enumerate().take(j) {
                *v = t as u64 + 1;
            }
            return true;
        }
    }
    false
}

/// The colex-first `d`-subset of `[universe]` containing every element of
/// `required` and none of `forbidden`: the required elements topped up with
/// the smallest allowed ones. `None` if no such subset exists.
pub fn smallest_superset(
    required: &[u64],
    forbidden: &[u64],
    d: usize,
    universe: u64,
) -> Option<Vec<u64>> {
    if required.len() > d || required.iter().any(|&x| x == 0 || x > universe) {
        return None;
    }
    if required.iter().any(|x| forbidden.contains(x)) {
        return None;
    }
    let mut set: Vec<u64> = required.to_vec();
    set.sort_unstable();
    set.dedup();
    let mut cand = 1u64;
    while set.len() < d {
        if cand > universe {
            return None;
        }
        if set.binary_search(&cand).is_err() && !forbidden.contains(&cand) {
            let pos = set.partition_point(|&v| v < cand);
            set.insert(pos, cand);
        }
        cand += 1;
    }
    Some(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(2, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        // C(784, 28) does not fit in 128 bits.
        assert!(binomial(784, 28).bits() > 128);
    }

    #[test]
    fn colex_order_of_pairs_in_five() {
        let mut set = vec![1, 2];
        let mut seen = vec![set.clone()];
        while colex_next(&mut set, 5) {
            seen.push(set.clone());
        }
        let expected: Vec<Vec<u64>> = vec![
            vec![1, 2],
            vec![1, 3],
            vec![2, 3],
            vec![1, 4],
            vec![2, 4],
            vec![3, 4],
            vec![1, 5],
            vec![2, 5],
            vec![3, 5],
            vec![4, 5],
        ];
        assert_eq!(seen, expected);
        for (i, s) in expected.iter().enumerate() {
            assert_eq!(colex_rank(s), BigUint::from(i));
            assert_eq!(colex_unrank(&BigUint::from(i), 2, 5).unwrap(), *s);
        }
        assert!(colex_unrank(&BigUint::from(10u32), 2, 5).is_none());
    }

    #[test]
    fn smallest_superset_fills_low() {
        assert_eq!(smallest_superset(&[5], &[], 2, 6), Some(vec![1, 5]));
        assert_eq!(smallest_superset(&[], &[1, 2], 2, 4), Some(vec![3, 4]));
        assert_eq!(smallest_superset(&[], &[1, 2], 2, 3), None);
        assert_eq!(smallest_superset(&[7], &[], 2, 6), None);
        assert_eq!(smallest_superset(&[1, 2, 3], &[], 2, 6), None);
    }

    proptest! {
        #[test]
        fn rank_matches_enumeration_position(universe in 1u64..10, d in 1usize..5) {
            prop_assume!(d as u64 <= universe);
            let mut set: Vec<u64> = (1..=d as u64).collect();
            let mut i = 0u64;
            loop {
                prop_assert_eq!(colex_rank(&set), BigUint::from(i));
                prop_assert_eq!(colex_unrank(&BigUint::from(i), d, universe).unwrap(), set.clone());
                i += 1;
                if !colex_next(&mut set, universe) { break; }
            }
            prop_assert_eq!(BigUint::from(i), binomial(universe, d as u64));
        }
    }
}
