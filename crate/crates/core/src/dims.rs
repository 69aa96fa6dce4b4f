//! Graph shattering, the gamma-graph dimension, and one-inclusion graphs.
//!
//! A point set `P` is gamma-graph shattered with witness `f` when for every
//! pattern `b` in `{0,1}^P` some hypothesis equals `f` where `b` is 0 and
//! misses `f` by more than gamma where `b` is 1. Taking `b = 0` shows `f`
//! agrees with a member on `P`, so witnesses range over member restrictions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::class::HypothesisClass;
use crate::combinatorics::binomial;
use crate::domain::Point;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::rational::Rational;

use num_traits::ToPrimitive;

/// Evidence that `points` are gamma-graph shattered.
///
/// `patterns[b]` realizes the pattern whose bit `i` (of `b`) says whether
/// the hypothesis must miss the witness at `points[i]` by more than gamma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShatterCertificate {
    pub gamma: Rational,
    pub points: Vec<Point>,
    pub witness: Hypothesis,
    pub patterns: Vec<Hypothesis>,
}

impl ShatterCertificate {
    pub fn dimension(&self) -> usize {
        self.points.len()
    }

    /// The hypothesis for a pattern given as one flag per point.
    pub fn pattern(&self, far: &[bool]) -> &Hypothesis {
        let idx = far.iter().enumerate().fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i));
        &self.patterns[idx]
    }

    /// Re-checks every pattern against the witness.
    pub fn verify(&self) -> Result<bool> {
        let d = self.points.len();
        if self.patterns.len() != 1usize << d {
            return Ok(false);
        }
        let w = self.witness.restrict(&self.points)?;
        for (b, h) in self.patterns.iter().enumerate() {
            for (i, p) in self.points.iter().enumerate() {
                let v = h.eval(p)?;
                let ok = if b >> i & 1 == 1 { v.abs_diff(&w[i]) > self.gamma } else { *v == w[i] };
                if !ok {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Relation masks of every hypothesis against one witness, over a pool of
/// at most 64 points: which coordinates agree and which are gamma-far.
struct Relations {
    eq: Vec<u64>,
    far: Vec<u64>,
}

fn relations(vertices: &[Vec<Rational>], w: &[Rational], gamma: &Rational) -> Relations {
    let mut eq = Vec::with_capacity(vertices.len());
    let mut far = Vec::with_capacity(vertices.len());
    for v in vertices {
        let (mut e, mut f) = (0u64, 0u64);
        for (i, (a, b)) in v.iter().zip(w).enumerate() {
            if a == b {
                e |= 1 << i;
            } else if a.abs_diff(b) > *gamma {
                f |= 1 << i;
            }
        }
        eq.push(e);
        far.push(f);
    }
    Relations { eq, far }
}

/// Bits of `x` at the positions set in `mask`, packed to the low end.
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

/// For one witness and one point subset: the realizing vertex per pattern, or
/// `None` if some pattern is missing.
fn shatter_table(rel: &Relations, subset: u64, d: usize) -> Option<Vec<usize>> {
    let full = 1usize << d;
    if rel.eq.len() < full {
        return None;
    }
    let mut table = vec![usize::MAX; full];
    let mut filled = 0;
    for (u, (&e, &f)) in rel.eq.iter().zip(&rel.far).enumerate() {
        if (e | f) & subset != subset {
            continue;
        }
        let b = extract(f, subset);
        if table[b] == usize::MAX {
            table[b] = u;
            filled += 1;
            if filled == full {
                return Some(table);
            }
        }
    }
    None
}

/// Shattering check for a fixed point list and witness.
pub fn check_graph_shattered(
    points: &[Point],
    class: &HypothesisClass,
    witness: &Hypothesis,
    gamma: &Rational,
    budget: &Budget,
) -> Result<Option<ShatterCertificate>> {
    if points.len() > budget.max_points {
        return Err(Error::budget(format!(
            "{} points exceeds the shattering limit of {}",
            points.len(),
            budget.max_points
        )));
    }
    let w = witness.restrict(points)?;
    let d = points.len();
    let mut table: Vec<Option<Hypothesis>> = vec![None; 1 << d];
    let mut filled = 0;
    for h in class.hypotheses(budget.max_hypotheses)? {
        let v = h.restrict(points)?;
        let mut b = 0usize;
        let mut ok = true;
        for i in 0..d {
            if v[i] == w[i] {
                continue;
            }
            if v[i].abs_diff(&w[i]) > *gamma {
                b |= 1 << i;
            } else {
                ok = false;
                break;
            }
        }
        if ok && table[b].is_none() {
            table[b] = Some(h);
            filled += 1;
            if filled == table.len() {
                break;
            }
        }
    }
    if filled < table.len() {
        return Ok(None);
    }
    Ok(Some(ShatterCertificate {
        gamma: gamma.clone(),
        points: points.to_vec(),
        witness: witness.clone(),
        patterns: table.into_iter().map(Option::unwrap).collect(),
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dimension: usize,
    pub certificate: ShatterCertificate,
    /// True when the search stopped at `cap` rather than exhausting the pool.
    pub capped: bool,
}

/// Largest gamma-graph shattered subset of `pool`, searched level by level.
///
/// Shattering is hereditary, so the search stops at the first size with no
/// shattered subset. Fails with a budget error (carrying the dimension
/// reached so far) when the next level would cost more than `max_work`.
pub fn gamma_graph_dimension(
    class: &HypothesisClass,
    pool: &[Point],
    gamma: &Rational,
    cap: usize,
    budget: &Budget,
) -> Result<DimensionReport> {
    if pool.len() > 64 {
        return Err(Error::budget(format!("pool of {} points (at most 64)", pool.len())));
    }
    let reps = class.restrictions(pool, budget.max_hypotheses)?;
    if reps.is_empty() {
        return Err(Error::Invalid("empty class has no graph dimension".into()));
    }
    let vertices: Vec<Vec<Rational>> = reps.iter().map(|(v, _)| v.clone()).collect();
    let rels: Vec<Relations> = vertices.iter().map(|w| relations(&vertices, w, gamma)).collect();
    let nv = vertices.len() as u64;

    let cert_from = |subset: u64, w: usize, table: &[usize]| {
        let points: Vec<Point> = (0..pool.len()).filter(|i| subset >> i & 1 == 1).map(|i| pool[i]).collect();
        ShatterCertificate {
            gamma: gamma.clone(),
            points,
            witness: reps[w].1.clone(),
            patterns: table.iter().map(|&u| reps[u].1.clone()).collect(),
        }
    };
    let mut best = ShatterCertificate {
        gamma: gamma.clone(),
        points: Vec::new(),
        witness: reps[0].1.clone(),
        patterns: vec![reps[0].1.clone()],
    };
    let mut spent: u64 = 0;
    let top = cap.min(pool.len());
    for d in 1..=top {
        if (1u64 << d.min(63)) > nv {
            return Ok(DimensionReport { dimension: d - 1, certificate: best, capped: false });
        }
        let cost = binomial(pool.len() as u64, d as u64)
            .to_u64()
            .unwrap_or(u64::MAX)
            .saturating_mul(nv.saturating_mul(nv));
        spent = spent.saturating_add(cost);
        if spent > budget.max_work {
            return Err(Error::Budget {
                what: format!("graph dimension search at size {d} over {} points", pool.len()),
                partial: Some(d - 1),
            });
        }
        let mut found = None;
        let mut combo: Vec<usize> = (0..d).collect();
        'outer: loop {
            let subset = combo.iter().fold(0u64, |acc, &i| acc | 1 << i);
            for (w, rel) in rels.iter().enumerate() {
                if let Some(table) = shatter_table(rel, subset, d) {
                    found = Some(cert_from(subset, w, &table));
                    break 'outer;
                }
            }
            if !next_combination(&mut combo, pool.len()) {
                break;
            }
        }
        match found {
            Some(c) => best = c,
            None => return Ok(DimensionReport { dimension: d - 1, certificate: best, capped: false }),
        }
    }
    Ok(DimensionReport { dimension: top, certificate: best, capped: top < pool.len() })
}

/// Lexicographic successor of a 0-based combination of `0..n`.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// A hyperedge: every vertex that agrees with the others off `coordinate`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub coordinate: usize,
    pub members: Vec<usize>,
}

/// The one-inclusion graph of a class restricted to a point list.
///
/// Vertices are the distinct restrictions. For each vertex `v` and
/// coordinate `i` there is exactly one hyperedge `e_{v,i}`, shared by all
/// vertices equal to `v` off `i` (a singleton when none exist).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneInclusionGraph {
    pub points: Vec<Point>,
    pub vertices: Vec<Vec<Rational>>,
    pub edges: Vec<Hyperedge>,
    /// `incident[v][i]` is the index of `e_{v,i}`.
    pub incident: Vec<Vec<usize>>,
}

/// `orientation[e]` is the vertex hyperedge `e` points to.
pub type Orientation = Vec<usize>;

impl OneInclusionGraph {
    /// Builds the graph over the given vertex vectors (deduplicated, order kept).
    #[allow(clippy::needless_range_loop)]
    pub fn from_vertices(points: Vec<Point>, vertices: Vec<Vec<Rational>>) -> Result<Self> {
        let n = points.len();
        let mut uniq: Vec<Vec<Rational>> = Vec::with_capacity(vertices.len());
        let mut seen = std::collections::HashSet::new();
        for v in vertices {
            if v.len() != n {
                return Err(Error::Invalid(format!("vertex of length {} over {n} points", v.len())));
            }
            if seen.insert(v.clone()) {
                uniq.push(v);
            }
        }
        let mut edges: Vec<Hyperedge> = Vec::new();
        let mut incident = vec![vec![0usize; n]; uniq.len()];
        for i in 0..n {
            let mut groups: HashMap<Vec<&Rational>, usize> = HashMap::new();
            for (vi, v) in uniq.iter().enumerate() {
                let key: Vec<&Rational> =
                    v.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, r)| r).collect();
                let e = *groups.entry(key).or_insert_with(|| {
                    edges.push(Hyperedge { coordinate: i, members: Vec::new() });
                    edges.len() - 1
                });
                edges[e].members.push(vi);
                incident[vi][i] = e;
            }
        }
        Ok(OneInclusionGraph { points, vertices: uniq, edges, incident })
    }

    /// The graph induced on a subset of vertex indices.
    pub fn induced(&self, keep: &[usize]) -> Result<Self> {
        Self::from_vertices(self.points.clone(), keep.iter().map(|&v| self.vertices[v].clone()).collect())
    }

    pub fn multi_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.members.len() > 1).count()
    }

    /// Checks `orientation` picks a member of every edge.
    pub fn validate(&self, orientation: &Orientation) -> Result<()> {
        if orientation.len() != self.edges.len() {
            return Err(Error::Invalid("orientation length differs from edge count".into()));
        }
        for (e, &v) in self.edges.iter().zip(orientation) {
            if !e.members.contains(&v) {
                return Err(Error::Invalid(format!("vertex {v} is not on its edge")));
            }
        }
        Ok(())
    }

    /// Per-vertex count of coordinates whose edge points to a vertex more
    /// than `gamma` away at that coordinate.
    pub fn gamma_outdegrees(&self, orientation: &Orientation, gamma: &Rational) -> Vec<usize> {
        (0..self.vertices.len())
            .map(|v| {
                (0..self.points.len())
                    .filter(|&i| {
                        let u = orientation[self.incident[v][i]];
                        self.vertices[u][i].abs_diff(&self.vertices[v][i]) > *gamma
                    })
                    .count()
            })
            .collect()
    }
}

pub fn build_oig(
    class: &HypothesisClass,
    points: &[Point],
    budget: &Budget,
) -> Result<OneInclusionGraph> {
    let reps = class.restrictions(points, budget.max_hypotheses)?;
    OneInclusionGraph::from_vertices(points.to_vec(), reps.into_iter().map(|(v, _)| v).collect())
}

/// Each edge points to its member with the smallest value at the free
/// coordinate; ties go to the lexicographically smallest vertex.
pub fn orient_smallest_value(g: &OneInclusionGraph) -> Orientation {
    g.edges
        .iter()
        .map(|e| {
            *e.members
                .iter()
                .min_by(|&&a, &&b| {
                    let (va, vb) = (&g.vertices[a], &g.vertices[b]);
                    va[e.coordinate].cmp(&vb[e.coordinate]).then_with(|| va.cmp(vb))
                })
                .expect("edges are nonempty")
        })
        .collect()
}

pub fn max_gamma_outdegree(g: &OneInclusionGraph, orientation: &Orientation, gamma: &Rational) -> usize {
    g.gamma_outdegrees(orientation, gamma).into_iter().max().unwrap_or(0)
}

/// The minimum over all orientations of the max gamma-outdegree, by
/// branch and bound. Refuses graphs with more than `max_multi_edges`
/// multi-vertex edges or searches beyond `max_work` nodes.
pub fn exhaustive_orientation_min(
    g: &OneInclusionGraph,
    gamma: &Rational,
    budget: &Budget,
) -> Result<(usize, Orientation)> {
    let multi: Vec<usize> = (0..g.edges.len()).filter(|&e| g.edges[e].members.len() > 1).collect();
    if multi.len() > budget.max_multi_edges {
        return Err(Error::budget(format!(
            "{} multi-vertex edges (limit {})",
            multi.len(),
            budget.max_multi_edges
        )));
    }
    let start = orient_smallest_value(g);
    let mut best = (max_gamma_outdegree(g, &start, gamma), start.clone());
    // cost[e][k]: vertices charged when edge e points to its k-th member
    let charged: Vec<Vec<Vec<usize>>> = multi
        .iter()
        .map(|&e| {
            let edge = &g.edges[e];
            edge.members
                .iter()
                .map(|&target| {
                    edge.members
                        .iter()
                        .copied()
                        .filter(|&v| {
                            g.vertices[target][edge.coordinate].abs_diff(&g.vertices[v][edge.coordinate]) > *gamma
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    struct Search<'a> {
        multi: &'a [usize],
        charged: &'a [Vec<Vec<usize>>],
        members: Vec<&'a [usize]>,
        deg: Vec<usize>,
        current: Orientation,
        best: (usize, Orientation),
        nodes: u64,
        limit: u64,
    }
    impl Search<'_> {
        fn go(&mut self, idx: usize, cur_max: usize) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(Error::budget("exhaustive orientation search"));
            }
            if cur_max >= self.best.0 {
                return Ok(());
            }
            if idx == self.multi.len() {
                self.best = (cur_max, self.current.clone());
                return Ok(());
            }
            for k in 0..self.members[idx].len() {
                let mut m = cur_max;
                for &v in &self.charged[idx][k] {
                    self.deg[v] += 1;
                    m = m.max(self.deg[v]);
                }
                self.current[self.multi[idx]] = self.members[idx][k];
                let r = self.go(idx + 1, m);
                for &v in &self.charged[idx][k] {
                    self.deg[v] -= 1;
                }
                r?;
            }
            Ok(())
        }
    }
    if best.0 == 0 {
        return Ok(best);
    }
    let mut s = Search {
        multi: &multi,
        charged: &charged,
        members: multi.iter().map(|&e| g.edges[e].members.as_slice()).collect(),
        deg: vec![0; g.vertices.len()],
        current: start,
        best: best.clone(),
        nodes: 0,
        limit: budget.max_work,
    };
    s.go(0, 0)?;
    best = s.best;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::SplitVariant;

    fn half() -> Rational {
        Rational::new(1, 2)
    }

    fn nats(xs: &[u64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::Nat(x)).collect()
    }

    #[test]
    fn cantor_graph_dimension_is_d() {
        for (d, u) in [(1, 3), (2, 5), (2, 6), (3, 7)] {
            let c = HypothesisClass::cantor(half(), d, u).unwrap();
            let pool = c.natural_pool(100).unwrap();
            let r = gamma_graph_dimension(&c, &pool, &half(), 8, &Budget::default()).unwrap();
            assert_eq!(r.dimension, d, "d={d} universe={u}");
            assert!(r.certificate.verify().unwrap());
        }
    }

    #[test]
    fn explicit_shattering_check() {
        let c = HypothesisClass::cantor(half(), 2, 5).unwrap();
        let w = c.cantor_member(&[1, 2]).unwrap();
        let cert = check_graph_shattered(&nats(&[1, 2]), &c, &w, &half(), &Budget::default())
            .unwrap()
            .unwrap();
        assert!(cert.verify().unwrap());
        assert!(cert.pattern(&[true, true]).eval(&Point::Nat(1)).unwrap() > &half());
        // three points cannot be shattered by 2-sets
        assert!(check_graph_shattered(&nats(&[1, 2, 3]), &c, &c.cantor_member(&[1, 2]).unwrap(), &half(), &Budget::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn trivial_shattering_cases() {
        let h = Hypothesis::cantor(vec![1], Rational::one());
        let single = HypothesisClass::finite(vec![h.clone()]);
        let b = Budget::default();
        // the only pattern available is b = 0
        assert!(check_graph_shattered(&nats(&[2]), &single, &h, &half(), &b).unwrap().is_none());
        let empty = check_graph_shattered(&[], &single, &h, &half(), &b).unwrap().unwrap();
        assert_eq!(empty.dimension(), 0);
        let r = gamma_graph_dimension(&single, &nats(&[1, 2, 3]), &half(), 5, &b).unwrap();
        assert_eq!(r.dimension, 0);
        let many: Vec<Point> = (1..=13).map(Point::Nat).collect();
        assert!(matches!(check_graph_shattered(&many, &single, &h, &half(), &b), Err(Error::Budget { .. })));
    }

    #[test]
    fn complement_split_on_one_level() {
        let c = HypothesisClass::split(half(), SplitVariant::Complement { d: 2 }, 4).unwrap();
        let pool: Vec<Point> = (1..=4).map(|x| Point::Pair(4, x)).collect();
        let r = gamma_graph_dimension(&c, &pool, &half(), 4, &Budget::default()).unwrap();
        assert_eq!(r.dimension, 2);
        assert!(r.certificate.verify().unwrap());
    }

    #[test]
    fn dimension_budget_reports_partial() {
        let c = HypothesisClass::cantor(half(), 2, 6).unwrap();
        let pool = c.natural_pool(100).unwrap();
        let tiny = Budget::default().with_work(2_000);
        match gamma_graph_dimension(&c, &pool, &half(), 8, &tiny) {
            Err(Error::Budget { partial: Some(p), .. }) => assert!(p <= 2),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn oig_structure() {
        let c = HypothesisClass::cantor(half(), 1, 3).unwrap();
        let g = build_oig(&c, &nats(&[1, 2, 3]), &Budget::default()).unwrap();
        assert_eq!(g.vertices.len(), 3);
        // every vertex lies on exactly one edge per coordinate
        for v in 0..g.vertices.len() {
            for i in 0..3 {
                assert!(g.edges[g.incident[v][i]].members.contains(&v));
                assert_eq!(g.edges[g.incident[v][i]].coordinate, i);
            }
        }
        let o = orient_smallest_value(&g);
        g.validate(&o).unwrap();
        assert!(max_gamma_outdegree(&g, &o, &half()) <= 1);
    }

    #[test]
    fn smallest_value_orientation_is_optimal_on_small_cantor() {
        let c = HypothesisClass::cantor(half(), 2, 4).unwrap();
        let g = build_oig(&c, &nats(&[1, 2, 3, 4]), &Budget::default()).unwrap();
        let o = orient_smallest_value(&g);
        let (best, ob) = exhaustive_orientation_min(&g, &half(), &Budget::default()).unwrap();
        g.validate(&ob).unwrap();
        assert!(best <= max_gamma_outdegree(&g, &o, &half()));
        assert!(max_gamma_outdegree(&g, &o, &half()) <= 1);
    }

    #[test]
    fn exhaustive_finds_better_orientation() {
        // two vertices differing by 1 on one coordinate: either orientation
        // costs 1 on one side, but an edge with three values at 0, 1/2, 1
        // has a cheaper choice (the middle) than smallest-value.
        let pts = nats(&[1]);
        let verts = vec![vec![Rational::zero()], vec![half()], vec![Rational::one()]];
        let g = OneInclusionGraph::from_vertices(pts, verts).unwrap();
        let small = orient_smallest_value(&g);
        assert_eq!(max_gamma_outdegree(&g, &small, &Rational::new(2, 5)), 1);
        let (best, _) = exhaustive_orientation_min(&g, &Rational::new(2, 5), &Budget::default()).unwrap();
        assert_eq!(best, 1);
        let (best, o) = exhaustive_orientation_min(&g, &Rational::new(1, 2), &Budget::default()).unwrap();
        assert_eq!(best, 0);
        assert_eq!(o, vec![1]);
    }

    #[test]
    fn exhaustive_refuses_large_graphs() {
        // the full cube {0,1}^5 has 5 * 16 two-vertex edges
        let verts: Vec<Vec<Rational>> = (0..32u32)
            .map(|b| (0..5).map(|i| Rational::integer((b >> i & 1) as i64)).collect())
            .collect();
        let g = OneInclusionGraph::from_vertices(nats(&[1, 2, 3, 4, 5]), verts).unwrap();
        assert!(g.multi_edge_count() > 20);
        assert!(matches!(
            exhaustive_orientation_min(&g, &half(), &Budget::default()),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn split_classes_graph_dimension() {
        let c = HypothesisClass::split(half(), SplitVariant::Complement { d: 3 }, 5).unwrap();
        let pool = c.natural_pool(100).unwrap();
        let r = gamma_graph_dimension(&c, &pool, &half(), 6, &Budget::default()).unwrap();
        assert!(r.certificate.verify().unwrap());
        assert!(r.dimension >= 2);
    }
}
