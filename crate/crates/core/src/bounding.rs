//! Bounding sets `L ≦ Yn^s ≦ U`, bounds on the ND sum, conditional dominance
//! and pairwise pruning of local vectors.
//!
//! Lower bounds are either finite stable sets or, for two objectives, the
//! lower-left convex chain of a vertex list. Upper bounds are finite.

use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::classify::planar_chain;
use crate::error::{Error, Result};
use crate::generator::GeneratorSet;
use crate::instance::MspInstance;
use crate::ndfilter::{minkowski_pair, nd_sum, NdSumOptions};
use crate::stable::{set_leqq, StableSet};
use crate::vector::ObjectiveVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Finite(StableSet),
    /// Vertices of a convex chain, first coordinate increasing, second decreasing.
    Envelope2D(Vec<ObjectiveVector>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingSet {
    kind: BoundKind,
    side: Side,
}

impl BoundingSet {
    pub fn finite(set: StableSet, side: Side) -> Self {
        BoundingSet {
            kind: BoundKind::Finite(set),
            side,
        }
    }

    /// A lower envelope; the vertices must form a strictly convex chain.
    pub fn envelope(vertices: Vec<ObjectiveVector>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("an envelope needs at least one vertex".into()));
        }
        if let Some(v) = vertices.iter().find(|v| v.dim() != 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: v.dim(),
            });
        }
        for w in vertices.windows(2) {
            if !(w[0].coords()[0] < w[1].coords()[0] && w[0].coords()[1] > w[1].coords()[1]) {
                return Err(Error::InvalidInput(format!(
                    "envelope vertices {} and {} are not strictly monotone",
                    w[0], w[1]
                )));
            }
        }
        for w in vertices.windows(3) {
            if cross(&w[0], &w[1], &w[2]) <= 0 {
                return Err(Error::InvalidInput(format!("envelope is not strictly convex at {}", w[1])));
            }
        }
        Ok(BoundingSet {
            kind: BoundKind::Envelope2D(vertices),
            side: Side::Lower,
        })
    }

    pub fn kind(&self) -> &BoundKind {
        &self.kind
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            BoundKind::Finite(s) => s.dim(),
            BoundKind::Envelope2D(_) => 2,
        }
    }

    /// Some point of the bound weakly dominates `y`.
    pub fn weakly_dominates(&self, y: &ObjectiveVector) -> bool {
        match &self.kind {
            BoundKind::Finite(s) => s.iter().any(|a| a.weakly_dominates(y)),
            BoundKind::Envelope2D(v) => envelope_weakly_dominates(v, y),
        }
    }

    /// `L ≦ Y` for a lower bound, `Y ≦ U` for an upper bound.
    pub fn is_valid_for(&self, y: &StableSet) -> Result<bool> {
        if self.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: y.dim(),
                found: self.dim(),
            });
        }
        match (self.side, &self.kind) {
            (Side::Lower, _) => Ok(y.iter().all(|p| self.weakly_dominates(p))),
            (Side::Upper, BoundKind::Finite(u)) => set_leqq(y, u),
            (Side::Upper, BoundKind::Envelope2D(_)) => {
                Err(Error::InvalidInput("upper bounds must be finite".into()))
            }
        }
    }

    fn shift(&self, z: &ObjectiveVector) -> Result<BoundingSet> {
        Ok(BoundingSet {
            kind: match &self.kind {
                BoundKind::Finite(s) => BoundKind::Finite(s.shift(z)?),
                BoundKind::Envelope2D(v) => BoundKind::Envelope2D(
                    v.iter().map(|p| p.checked_add(z)).collect::<Result<_>>()?,
                ),
            },
            side: self.side,
        })
    }
}

fn cross(o: &ObjectiveVector, a: &ObjectiveVector, b: &ObjectiveVector) -> i128 {
    let (ox, oy) = (o.coords()[0] as i128, o.coords()[1] as i128);
    (a.coords()[0] as i128 - ox) * (b.coords()[1] as i128 - oy)
        - (a.coords()[1] as i128 - oy) * (b.coords()[0] as i128 - ox)
}

/// Vertices of the lower-left convex chain of a planar stable set.
pub fn lower_chain(set: &StableSet) -> Vec<ObjectiveVector> {
    planar_chain(set.points())
        .into_iter()
        .map(|i| set.points()[i].clone())
        .collect()
}

/// The convex lower envelope of the extreme supported vectors of `y` (p = 2).
pub fn lower_hull_bound(y: &StableSet) -> Result<BoundingSet> {
    if y.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "envelope bounds need two objectives, got {}",
            y.dim()
        )));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("cannot bound an empty set".into()));
    }
    BoundingSet::envelope(lower_chain(y))
}

fn envelope_weakly_dominates(v: &[ObjectiveVector], y: &ObjectiveVector) -> bool {
    let (y1, y2) = (y.coords()[0] as i128, y.coords()[1] as i128);
    let first = &v[0];
    if y1 < first.coords()[0] as i128 {
        return false;
    }
    let last = &v[v.len() - 1];
    if y1 >= last.coords()[0] as i128 {
        return last.coords()[1] as i128 <= y2;
    }
    // segment a-b with a1 <= y1 < b1; the chain height at y1 must not exceed y2
    let k = v.partition_point(|p| p.coords()[0] as i128 <= y1);
    let (a, b) = (&v[k - 1], &v[k]);
    let (a1, a2) = (a.coords()[0] as i128, a.coords()[1] as i128);
    let (b1, b2) = (b.coords()[0] as i128, b.coords()[1] as i128);
    // f(y1) = a2 + (b2-a2)(y1-a1)/(b1-a1) <= y2
    let lhs = BigInt::from(a2) * (b1 - a1) + BigInt::from(b2 - a2) * (y1 - a1);
    lhs <= BigInt::from(y2) * (b1 - a1)
}

/// `n/d` with `d > 0`.
#[derive(Clone, Copy, Debug)]
struct Frac {
    n: i128,
    d: i128,
}

impl Frac {
    fn cmp(&self, o: &Frac) -> Ordering {
        match (self.n.checked_mul(o.d), o.n.checked_mul(self.d)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => (BigInt::from(self.n) * o.d).cmp(&(BigInt::from(o.n) * self.d)),
        }
    }
}

const ZERO: Frac = Frac { n: 0, d: 1 };
const ONE: Frac = Frac { n: 1, d: 1 };

/// Every point of segment `a-b` is dominated by some point of `u`.
///
/// `u` weakly dominates `a + t(b-a)` exactly for `t ∈ [lo, hi]`; when
/// `lo < hi` it also differs from every such point, so the closed interval
/// is dominated. The segment is dominated iff these intervals cover `[0, 1]`.
fn segment_dominated(u: &StableSet, a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let (a1, a2) = (a.coords()[0] as i128, a.coords()[1] as i128);
    let (b1, b2) = (b.coords()[0] as i128, b.coords()[1] as i128);
    let (dx, dy) = (b1 - a1, a2 - b2);
    let mut intervals: Vec<(Frac, Frac)> = Vec::new();
    for p in u.iter() {
        let (u1, u2) = (p.coords()[0] as i128, p.coords()[1] as i128);
        let lo = Frac { n: u1 - a1, d: dx };
        let hi = Frac { n: a2 - u2, d: dy };
        if lo.cmp(&hi) != Ordering::Less {
            continue;
        }
        let lo = if lo.cmp(&ZERO) == Ordering::Less { ZERO } else { lo };
        let hi = if hi.cmp(&ONE) == Ordering::Greater { ONE } else { hi };
        if lo.cmp(&hi) != Ordering::Greater {
            intervals.push((lo, hi));
        }
    }
    intervals.sort_by(|x, y| x.0.cmp(&y.0));
    let mut reach: Option<Frac> = None;
    for (lo, hi) in intervals {
        let start = reach.unwrap_or(ZERO);
        if reach.is_none() && lo.cmp(&ZERO) == Ordering::Greater {
            return false;
        }
        if lo.cmp(&start) == Ordering::Greater {
            return false;
        }
        if reach.is_none() || hi.cmp(&start) == Ordering::Greater {
            reach = Some(hi);
        }
    }
    matches!(reach, Some(r) if r.cmp(&ONE) != Ordering::Less)
}

/// Whether `y` is dominated by a point of `u`.
fn point_dominated(u: &StableSet, y: &ObjectiveVector) -> bool {
    if u.dim() == 2 {
        // staircase: among points with first coordinate <= y1 the last has the smallest second
        let k = u.points().partition_point(|p| p.coords()[0] <= y.coords()[0]);
        return k > 0 && {
            let p = &u.points()[k - 1];
            p.coords()[1] <= y.coords()[1] && p != y
        };
    }
    u.iter().any(|p| p.dominates(y))
}

/// `U < B`: every point of the (lower) bound `b` is dominated by a point of `u`.
pub fn strictly_dominates_bound(u: &StableSet, b: &BoundingSet) -> Result<bool> {
    if u.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: b.dim(),
        });
    }
    Ok(match &b.kind {
        BoundKind::Finite(l) => l.iter().all(|y| point_dominated(u, y)),
        BoundKind::Envelope2D(v) if v.len() == 1 => point_dominated(u, &v[0]),
        BoundKind::Envelope2D(v) => v.windows(2).all(|w| segment_dominated(u, &w[0], &w[1])),
    })
}

fn chain_of(b: &BoundingSet) -> Vec<ObjectiveVector> {
    match &b.kind {
        BoundKind::Finite(s) => lower_chain(s),
        BoundKind::Envelope2D(v) => v.clone(),
    }
}

/// Minkowski sum of two convex chains: merge edges by slope.
fn chain_sum(a: &[ObjectiveVector], b: &[ObjectiveVector]) -> Result<Vec<ObjectiveVector>> {
    let mut out = vec![a[0].checked_add(&b[0])?];
    let (mut i, mut j) = (0, 0);
    while i + 1 < a.len() || j + 1 < b.len() {
        let take_a = if i + 1 == a.len() {
            false
        } else if j + 1 == b.len() {
            true
        } else {
            // edge with the steeper descent first: compare dy_a/dx_a with dy_b/dx_b
            let ea = a[i + 1].checked_sub(&a[i])?;
            let eb = b[j + 1].checked_sub(&b[j])?;
            (ea.coords()[1] as i128) * (eb.coords()[0] as i128)
                <= (eb.coords()[1] as i128) * (ea.coords()[0] as i128)
        };
        let e = if take_a {
            i += 1;
            a[i].checked_sub(&a[i - 1])?
        } else {
            j += 1;
            b[j].checked_sub(&b[j - 1])?
        };
        let next = out[out.len() - 1].checked_add(&e)?;
        if out.len() >= 2 && cross(&out[out.len() - 2], &out[out.len() - 1], &next) == 0 {
            out.pop();
        }
        out.push(next);
    }
    Ok(out)
}

/// `ND(⊕ bounds)` for lower bounds. Finite parts are summed exactly; when
/// any envelope is present every part enters through its convex chain.
pub fn sum_lower(bounds: &[BoundingSet]) -> Result<BoundingSet> {
    let first = bounds
        .first()
        .ok_or_else(|| Error::InvalidInput("no bounds to sum".into()))?;
    if let Some(b) = bounds.iter().find(|b| b.dim() != first.dim()) {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            found: b.dim(),
        });
    }
    let finite: Option<Vec<StableSet>> = bounds
        .iter()
        .map(|b| match &b.kind {
            BoundKind::Finite(s) => Some(s.clone()),
            BoundKind::Envelope2D(_) => None,
        })
        .collect();
    if let Some(sets) = finite {
        let inst = MspInstance::new(sets)?;
        let set = nd_sum(&inst, NdSumOptions::default(), false)?.set;
        return Ok(BoundingSet::finite(set, Side::Lower));
    }
    let mut acc = chain_of(first);
    for b in &bounds[1..] {
        acc = chain_sum(&acc, &chain_of(b))?;
    }
    BoundingSet::envelope(acc)
}

/// Bounds on the ND sum from per-set bounds: `(ND(⊕ L^s), ND(⊕ U^s))`.
/// Either side may use `Yn^s` itself for any subset of the local sets.
pub fn bound_nd_sum(lowers: &[BoundingSet], uppers: &[StableSet]) -> Result<(BoundingSet, StableSet)> {
    if lowers.len() != uppers.len() {
        return Err(Error::InvalidInput("one lower and one upper bound per local set".into()));
    }
    if let Some(l) = lowers.iter().find(|l| l.side != Side::Lower) {
        return Err(Error::InvalidInput(format!("{:?} bound given as lower", l.side)));
    }
    let lower = sum_lower(lowers)?;
    let upper = nd_sum(&MspInstance::new(uppers.to_vec())?, NdSumOptions::default(), false)?.set;
    if upper.dim() != lower.dim() {
        return Err(Error::DimensionMismatch {
            expected: lower.dim(),
            found: upper.dim(),
        });
    }
    Ok((lower, upper))
}

/// `ND(⊕_s U^s) < ND({ȳ} ⊕ ⊕_{s≠s̄} L^s)`; true certifies `ȳ` redundant.
pub fn conditionally_dominated(
    y_bar: &ObjectiveVector,
    s_bar: usize,
    uppers: &[StableSet],
    lowers: &[BoundingSet],
) -> Result<bool> {
    if s_bar >= lowers.len() || uppers.len() != lowers.len() {
        return Err(Error::InvalidInput("one lower and one upper bound per local set".into()));
    }
    let upper = nd_sum(&MspInstance::new(uppers.to_vec())?, NdSumOptions::default(), false)?.set;
    let rest: Vec<BoundingSet> = lowers
        .iter()
        .enumerate()
        .filter(|(s, _)| *s != s_bar)
        .map(|(_, b)| b.clone())
        .collect();
    let right = if rest.is_empty() {
        BoundingSet::finite(StableSet::singleton(y_bar.clone()), Side::Lower)
    } else {
        sum_lower(&rest)?.shift(y_bar)?
    };
    strictly_dominates_bound(&upper, &right)
}

/// Algorithm 2 with the same upper bounds on both roles.
pub fn prune_with_bounds(instance: &MspInstance, lowers: &[BoundingSet], uppers: &[StableSet]) -> Result<GeneratorSet> {
    prune_with_role_bounds(instance, lowers, uppers, uppers)
}

/// Algorithm 2: for each ordered pair `(s̄, s)`, drop `y ∈ Y^s̄` when
/// `ND(U_focus^s̄ ⊕ U_other^s) < ND({y} ⊕ L^s)`.
pub fn prune_with_role_bounds(
    instance: &MspInstance,
    lowers: &[BoundingSet],
    focus_uppers: &[StableSet],
    other_uppers: &[StableSet],
) -> Result<GeneratorSet> {
    let n = instance.num_sets();
    if lowers.len() != n || focus_uppers.len() != n || other_uppers.len() != n {
        return Err(Error::InvalidInput("one bound per local set and role required".into()));
    }
    for b in lowers {
        if b.dim() != instance.dim() || b.side != Side::Lower {
            return Err(Error::InvalidInput("lower bounds must be lower-side bounds of the instance dimension".into()));
        }
    }
    let mut chosen = Vec::with_capacity(n);
    for s_bar in 0..n {
        let local = instance.local(s_bar);
        let mut keep = vec![true; local.len()];
        for s in (0..n).filter(|&s| s != s_bar) {
            let left = minkowski_pair(&focus_uppers[s_bar], &other_uppers[s])?;
            for (i, y) in local.iter().enumerate() {
                if keep[i] && strictly_dominates_bound(&left, &lowers[s].shift(y)?)? {
                    keep[i] = false;
                }
            }
        }
        chosen.push((0..local.len()).filter(|&i| keep[i]).collect());
    }
    GeneratorSet::new(instance, chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{redundancy_mask, verify_generator};
    use crate::ndfilter::filter_naive;
    use proptest::prelude::*;

    fn set(points: &[&[i64]]) -> StableSet {
        StableSet::new(
            points[0].len(),
            points.iter().map(|c| ObjectiveVector::new(c.iter().copied())).collect(),
        )
        .unwrap()
    }

    fn v(c: &[i64]) -> ObjectiveVector {
        ObjectiveVector::new(c.iter().copied())
    }

    #[test]
    fn hull_bound_examples() {
        let y = set(&[&[0, 4], &[2, 3], &[4, 0]]);
        let l = lower_hull_bound(&y).unwrap();
        assert_eq!(l.kind(), &BoundKind::Envelope2D(vec![v(&[0, 4]), v(&[4, 0])]));
        assert!(l.is_valid_for(&y).unwrap());
        // (2,2) lies on the segment and dominates (2,3)
        assert!(l.weakly_dominates(&v(&[2, 2])));
        assert!(!l.weakly_dominates(&v(&[2, 1])));
        assert!(l.weakly_dominates(&v(&[1, 3])));
        let all = set(&[&[0, 4], &[1, 2], &[4, 0]]);
        let l = lower_hull_bound(&all).unwrap();
        assert_eq!(l.kind(), &BoundKind::Envelope2D(all.points().to_vec()));
        assert!(lower_hull_bound(&set(&[&[1, 2, 3]])).is_err());
    }

    #[test]
    fn envelope_validation() {
        assert!(BoundingSet::envelope(vec![v(&[0, 4]), v(&[2, 2]), v(&[4, 0])]).is_err());
        assert!(BoundingSet::envelope(vec![v(&[0, 4]), v(&[2, 3]), v(&[4, 0])]).is_err());
        assert!(BoundingSet::envelope(vec![v(&[0, 4]), v(&[1, 1]), v(&[4, 0])]).is_ok());
        assert!(BoundingSet::envelope(vec![v(&[3, 3])]).is_ok());
    }

    #[test]
    fn segment_coverage() {
        let a = v(&[0, 4]);
        let b = v(&[4, 0]);
        // (0,4) and (4,0) only weakly dominate the endpoints
        assert!(!segment_dominated(&set(&[&[0, 4], &[4, 0]]), &a, &b));
        // (-1,3) covers t in [0,1/4] and (3,-1) covers [3/4,1]
        assert!(!segment_dominated(&set(&[&[-1, 3], &[3, -1]]), &a, &b));
        assert!(segment_dominated(&set(&[&[-1, 3], &[1, 1], &[3, -1]]), &a, &b));
        assert!(!segment_dominated(&set(&[&[-1, 3], &[2, 2], &[3, -1]]), &a, &b));
        assert!(segment_dominated(&set(&[&[-1, 4], &[0, 0]]), &a, &b));
    }

    #[test]
    fn chain_sum_matches_hull_of_vertex_sums() {
        let a = vec![v(&[0, 6]), v(&[1, 2]), v(&[5, 0])];
        let b = vec![v(&[0, 3]), v(&[3, 1]), v(&[6, 0])];
        let mut sums = Vec::new();
        for x in &a {
            for y in &b {
                sums.push(x.checked_add(y).unwrap());
            }
        }
        let expect = lower_chain(&filter_naive(2, &sums));
        assert_eq!(chain_sum(&a, &b).unwrap(), expect);
    }

    fn far_instance() -> MspInstance {
        MspInstance::new(vec![
            set(&[&[0, 4], &[3, 3], &[4, 0]]),
            set(&[&[0, 1], &[1, 0]]),
        ])
        .unwrap()
    }

    #[test]
    fn conditional_dominance_examples() {
        let inst = far_instance();
        let exact: Vec<BoundingSet> = inst
            .local_sets()
            .iter()
            .map(|s| BoundingSet::finite(s.clone(), Side::Lower))
            .collect();
        let uppers = inst.local_sets().to_vec();
        assert!(conditionally_dominated(&v(&[3, 3]), 0, &uppers, &exact).unwrap());
        assert!(!conditionally_dominated(&v(&[0, 4]), 0, &uppers, &exact).unwrap());
        assert!(!conditionally_dominated(&v(&[4, 0]), 0, &uppers, &exact).unwrap());
        // the ideal point of Y^2 is a valid but loose lower bound
        let loose = vec![exact[0].clone(), BoundingSet::finite(set(&[&[0, 0]]), Side::Lower)];
        assert!(loose[1].is_valid_for(inst.local(1)).unwrap());
        assert!(!conditionally_dominated(&v(&[3, 3]), 0, &uppers, &loose).unwrap());

        let g = prune_with_bounds(&inst, &exact, &uppers).unwrap();
        assert_eq!(g.chosen(), &[vec![0, 2], vec![0, 1]]);
        assert!(verify_generator(&g, &inst).unwrap());
    }

    #[test]
    fn nothing_removed_when_nothing_redundant() {
        let inst = MspInstance::new(vec![set(&[&[0, 2], &[2, 0]]), set(&[&[0, 1], &[1, 0]])]).unwrap();
        let exact: Vec<BoundingSet> = inst
            .local_sets()
            .iter()
            .map(|s| BoundingSet::finite(s.clone(), Side::Lower))
            .collect();
        let g = prune_with_bounds(&inst, &exact, inst.local_sets()).unwrap();
        assert_eq!(g, GeneratorSet::full(&inst));
    }

    fn planar(max_len: usize) -> impl Strategy<Value = StableSet> {
        proptest::collection::vec((0i64..40, 0i64..12), 1..=max_len).prop_map(|pts| {
            let pts: Vec<_> = pts.into_iter().map(|(a, e)| ObjectiveVector::from([a, 40 - a + e])).collect();
            filter_naive(2, &pts)
        })
    }

    fn planar_instance() -> impl Strategy<Value = MspInstance> {
        proptest::collection::vec(planar(10), 2..=3).prop_map(|s| MspInstance::new(s).unwrap())
    }

    fn exact_lowers(inst: &MspInstance) -> Vec<BoundingSet> {
        inst.local_sets()
            .iter()
            .map(|s| BoundingSet::finite(s.clone(), Side::Lower))
            .collect()
    }

    fn hull_lowers(inst: &MspInstance) -> Vec<BoundingSet> {
        inst.local_sets().iter().map(|s| lower_hull_bound(s).unwrap()).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hull_vertices_are_the_extreme_points(s in planar(30)) {
            let l = lower_hull_bound(&s).unwrap();
            let ext = crate::classify::extreme_points(&s).unwrap();
            prop_assert_eq!(l.kind(), &BoundKind::Envelope2D(ext.into_points()));
            prop_assert!(l.is_valid_for(&s).unwrap());
        }

        #[test]
        fn pruning_is_sound_and_monotone(inst in planar_instance()) {
            let mask = redundancy_mask(&inst).unwrap();
            let uppers = inst.local_sets().to_vec();
            let weak = prune_with_bounds(&inst, &hull_lowers(&inst), &uppers).unwrap();
            let strong = prune_with_bounds(&inst, &exact_lowers(&inst), &uppers).unwrap();
            for g in [&weak, &strong] {
                prop_assert!(verify_generator(g, &inst).unwrap());
                for (s, removed) in g.removed(&inst).iter().enumerate() {
                    for &i in removed {
                        prop_assert!(mask[s][i]);
                    }
                }
            }
            for s in 0..inst.num_sets() {
                for &i in &strong.chosen()[s] {
                    prop_assert!(weak.is_chosen(s, i));
                }
            }
            if inst.num_sets() == 2 {
                // with exact bounds the pairwise test is exact for two sets
                for s in 0..2 {
                    for i in 0..inst.local(s).len() {
                        prop_assert_eq!(strong.is_chosen(s, i), !mask[s][i]);
                    }
                }
            }
        }

        #[test]
        fn sum_bounds_sandwich_the_nd_sum(inst in planar_instance(), drop in 0usize..3) {
            let yn = nd_sum(&inst, NdSumOptions::default(), false).unwrap().set;
            let uppers: Vec<StableSet> = inst
                .local_sets()
                .iter()
                .map(|s| {
                    let ext: Vec<usize> = (0..s.len()).filter(|i| i % 3 != drop || s.len() == 1).collect();
                    s.subset(&ext)
                })
                .collect();
            for lowers in [hull_lowers(&inst), exact_lowers(&inst)] {
                let (lo, up) = bound_nd_sum(&lowers, &uppers).unwrap();
                prop_assert!(lo.is_valid_for(&yn).unwrap());
                prop_assert!(set_leqq(&yn, &up).unwrap());
            }
            let exact = exact_lowers(&inst);
            let (lo, up) = bound_nd_sum(&exact, inst.local_sets()).unwrap();
            prop_assert_eq!(lo.kind(), &BoundKind::Finite(yn.clone()));
            prop_assert_eq!(up, yn);
        }

        #[test]
        fn envelope_sum_is_hull_of_the_nd_sum(inst in planar_instance()) {
            let yn = nd_sum(&inst, NdSumOptions::default(), false).unwrap().set;
            let lo = sum_lower(&hull_lowers(&inst)).unwrap();
            prop_assert_eq!(lo.kind(), &BoundKind::Envelope2D(lower_chain(&yn)));
        }
    }
}
