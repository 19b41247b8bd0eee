//! Partition of a stable set into extreme supported, supported non-extreme and
//! unsupported vectors, decided exactly with small linear programs.
//!
//! A vector `y` of `Y` is supported iff no convex combination of `Y` dominates
//! it, i.e. `min Σ_k z_k` over `z ∈ conv(Y)`, `z ≦ y` equals `Σ_k y_k`. A
//! supported `y` is extreme iff it is not a convex combination of `Y \ {y}`
//! (together with supportedness this is the unique-minimizer condition).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlp::{IntProblem, LpOutcome, Rational, Relation};
use crate::instance::MspInstance;
use crate::ndfilter::{nd_sum, NdSumOptions};
use crate::stable::StableSet;
use crate::vector::ObjectiveVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Classification {
    ExtremeSupported,
    SupportedNonExtreme,
    Unsupported,
}

impl Classification {
    pub fn is_supported(self) -> bool {
        self != Classification::Unsupported
    }

    pub fn tag(self) -> &'static str {
        match self {
            Classification::ExtremeSupported => "extreme",
            Classification::SupportedNonExtreme => "supported",
            Classification::Unsupported => "unsupported",
        }
    }
}

/// A strictly positive weight vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchDirection(Vec<Rational>);

impl SearchDirection {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidInput("search direction must be strictly positive".into()));
        }
        Ok(SearchDirection(weights))
    }

    pub fn from_integers(weights: &[i64]) -> Result<Self> {
        Self::new(weights.iter().map(|&w| Rational::from_integer(w.into())).collect())
    }

    pub fn weights(&self) -> &[Rational] {
        &self.0
    }

    fn value(&self, y: &ObjectiveVector) -> Rational {
        self.0
            .iter()
            .zip(y.coords())
            .map(|(w, &c)| w * Rational::from_integer(c.into()))
            .sum()
    }
}

/// The three classes of a stable set, each in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub extreme: StableSet,
    pub supported_non_extreme: StableSet,
    pub unsupported: StableSet,
}

fn check_dim(y: &StableSet) -> Result<()> {
    if y.dim() < 2 {
        return Err(Error::InvalidInput(format!(
            "classification needs at least two objectives, got {}",
            y.dim()
        )));
    }
    Ok(())
}

/// `Y_λ = argmin { λᵀy | y ∈ Y }`.
pub fn minimizers(set: &StableSet, lambda: &SearchDirection) -> Result<StableSet> {
    if lambda.weights().len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: lambda.weights().len(),
        });
    }
    let values: Vec<Rational> = set.iter().map(|y| lambda.value(y)).collect();
    let Some(best) = values.iter().min() else {
        return Ok(StableSet::empty(set.dim()));
    };
    let keep = values
        .iter()
        .enumerate()
        .filter(|(_, v)| *v == best)
        .map(|(i, _)| i)
        .collect::<Vec<_>>();
    Ok(set.subset(&keep))
}

/// `min Σ z` over convex combinations `z` of `columns` with `z ≦ y`.
fn convex_dominance_lp(y: &ObjectiveVector, columns: &[&ObjectiveVector], with_objective: bool) -> IntProblem {
    let p = y.dim();
    let objective: Vec<i64> = columns
        .iter()
        .map(|c| if with_objective { c.coords().iter().sum() } else { 0 })
        .collect();
    let mut rows = Vec::with_capacity(p + 1);
    rows.push((vec![1i64; columns.len()], Relation::Eq, 1i64));
    for k in 0..p {
        rows.push((
            columns.iter().map(|c| c.coords()[k]).collect(),
            Relation::Le,
            y.coords()[k],
        ));
    }
    IntProblem::from_i64(&objective, rows)
}

fn is_supported_against(y: &ObjectiveVector, columns: &[&ObjectiveVector]) -> bool {
    match convex_dominance_lp(y, columns, true).solve() {
        LpOutcome::Optimal { value, .. } => value == Rational::from_integer(y.coord_sum().into()),
        // y itself is feasible for every caller, so anything else is a solver bug
        other => unreachable!("convex dominance program must be feasible and bounded: {other:?}"),
    }
}

/// Classifies `y` within `set` with one LP over all of `set` and, if
/// supported, one exclusion LP over `set \ {y}`.
pub fn classify_point(y: &ObjectiveVector, set: &StableSet) -> Result<Classification> {
    check_dim(set)?;
    if y.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: y.dim(),
        });
    }
    if !set.contains(y) {
        if set.iter().any(|a| a.dominates(y)) {
            return Err(Error::InvalidInput(format!("{y} is dominated within the set")));
        }
        return Err(Error::NotMember(y.to_string()));
    }
    let all: Vec<&ObjectiveVector> = set.iter().collect();
    if !is_supported_against(y, &all) {
        return Ok(Classification::Unsupported);
    }
    let others: Vec<&ObjectiveVector> = set.iter().filter(|a| *a != y).collect();
    if others.is_empty() {
        return Ok(Classification::ExtremeSupported);
    }
    Ok(match convex_dominance_lp(y, &others, false).solve() {
        LpOutcome::Infeasible { .. } => Classification::ExtremeSupported,
        _ => Classification::SupportedNonExtreme,
    })
}

enum Separation {
    Inside,
    /// Nonnegative integer weights with `λᵀy < λᵀw` for every current column `w`.
    Direction(Vec<BigInt>),
}

fn separate(y: &ObjectiveVector, columns: &[&ObjectiveVector]) -> Separation {
    if columns.is_empty() {
        return Separation::Direction(vec![BigInt::one(); y.dim()]);
    }
    match convex_dominance_lp(y, columns, false).solve() {
        LpOutcome::Infeasible { certificate } => {
            // rows: [Σα = 1, then one ≤ row per objective]; λ_k = -y_k ≥ 0
            let lambda: Vec<Rational> = certificate[1..].iter().map(|c| -c).collect();
            let lcm = lambda
                .iter()
                .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            Separation::Direction(
                lambda
                    .iter()
                    .map(|v| v.numer() * (&lcm / v.denom()))
                    .collect(),
            )
        }
        _ => Separation::Inside,
    }
}

fn dot(lambda: &[BigInt], y: &ObjectiveVector) -> BigInt {
    lambda
        .iter()
        .zip(y.coords())
        .fold(BigInt::zero(), |acc, (w, &c)| acc + w * c)
}

/// A vertex of the upper image minimizing `λ ≥ 0`: ties broken by the
/// coordinate sum, then lexicographically.
fn extreme_minimizer(points: &[ObjectiveVector], lambda: &[BigInt]) -> usize {
    let mut best = 0usize;
    let mut best_key = (dot(lambda, &points[0]), points[0].coord_sum());
    for (i, y) in points.iter().enumerate().skip(1) {
        let key = (dot(lambda, y), y.coord_sum());
        // points are lexicographically sorted, so strict improvement keeps the lex-min
        if key < best_key {
            best = i;
            best_key = key;
        }
    }
    best
}

fn cross(o: &ObjectiveVector, a: &ObjectiveVector, b: &ObjectiveVector) -> i128 {
    let (ox, oy) = (o.coords()[0] as i128, o.coords()[1] as i128);
    (a.coords()[0] as i128 - ox) * (b.coords()[1] as i128 - oy)
        - (a.coords()[1] as i128 - oy) * (b.coords()[0] as i128 - ox)
}

/// Indices of the lower-left convex chain of a planar stable set
/// (monotone chain; collinear points are dropped).
pub(crate) fn planar_chain(points: &[ObjectiveVector]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        while hull.len() >= 2 && cross(&points[hull[hull.len() - 2]], &points[hull[hull.len() - 1]], p) <= 0 {
            hull.pop();
        }
        hull.push(i);
    }
    hull
}

fn planar_classes(points: &[ObjectiveVector]) -> Vec<Classification> {
    let hull = planar_chain(points);
    let mut out = vec![Classification::Unsupported; points.len()];
    for w in hull.windows(2) {
        for i in w[0] + 1..w[1] {
            if cross(&points[w[0]], &points[w[1]], &points[i]) == 0 {
                out[i] = Classification::SupportedNonExtreme;
            }
        }
    }
    for &h in &hull {
        out[h] = Classification::ExtremeSupported;
    }
    out
}

/// Canonical indices of the extreme supported vectors of `set`.
pub fn extreme_indices(set: &StableSet) -> Result<Vec<usize>> {
    check_dim(set)?;
    Ok(if set.dim() == 2 {
        planar_chain(set.points())
    } else {
        extreme_indices_lp(set)
    })
}

/// Canonical indices of the extreme supported vectors of `set`.
///
/// Output-sensitive: each vector is tested for membership in the upper image
/// of the extreme vectors found so far; a failed test yields a separating
/// direction whose minimizer is a new extreme vector.
fn extreme_indices_lp(set: &StableSet) -> Vec<usize> {
    let points = set.points();
    let mut found: Vec<usize> = Vec::new();
    let mut is_extreme = vec![false; points.len()];
    for idx in 0..points.len() {
        while !is_extreme[idx] {
            let columns: Vec<&ObjectiveVector> = found.iter().map(|&i| &points[i]).collect();
            match separate(&points[idx], &columns) {
                Separation::Inside => break,
                Separation::Direction(lambda) => {
                    let v = extreme_minimizer(points, &lambda);
                    debug_assert!(!is_extreme[v], "separation must produce a new vertex");
                    is_extreme[v] = true;
                    found.push(v);
                }
            }
        }
    }
    found.sort_unstable();
    found
}

pub fn extreme_points(set: &StableSet) -> Result<StableSet> {
    Ok(set.subset(&extreme_indices(set)?))
}

/// `Ynse` of the ND sum, from the extreme local vectors only: the upper image
/// of the sum is the sum of the local upper images, whose vertices are
/// sums of local vertices.
pub fn extreme_points_of_sum(instance: &MspInstance, opts: NdSumOptions) -> Result<StableSet> {
    let ext = instance
        .local_sets()
        .iter()
        .map(extreme_points)
        .collect::<Result<Vec<_>>>()?;
    let candidates = nd_sum(&MspInstance::new(ext)?, opts, false)?.set;
    extreme_points(&candidates)
}

/// Classification of every vector of `set`, aligned with canonical order.
pub fn classify_all(set: &StableSet) -> Result<Vec<Classification>> {
    check_dim(set)?;
    if set.dim() == 2 {
        return Ok(planar_classes(set.points()));
    }
    classify_all_lp(set)
}

fn classify_all_lp(set: &StableSet) -> Result<Vec<Classification>> {
    let extreme = extreme_indices_lp(set);
    let columns: Vec<&ObjectiveVector> = extreme.iter().map(|&i| &set.points()[i]).collect();
    let mut out = vec![Classification::Unsupported; set.len()];
    for &i in &extreme {
        out[i] = Classification::ExtremeSupported;
    }
    for (i, y) in set.iter().enumerate() {
        if out[i] == Classification::ExtremeSupported {
            continue;
        }
        // conv(E) + R^p_+ equals conv(Y) + R^p_+, so the extreme columns suffice
        if is_supported_against(y, &columns) {
            out[i] = Classification::SupportedNonExtreme;
        }
    }
    Ok(out)
}

pub fn classify_set(set: &StableSet) -> Result<Partition> {
    let classes = classify_all(set)?;
    let pick = |c: Classification| {
        let idx: Vec<usize> = classes
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == c)
            .map(|(i, _)| i)
            .collect();
        set.subset(&idx)
    };
    Ok(Partition {
        extreme: pick(Classification::ExtremeSupported),
        supported_non_extreme: pick(Classification::SupportedNonExtreme),
        unsupported: pick(Classification::Unsupported),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
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

    use Classification::*;

    #[test]
    fn three_point_examples() {
        let y = set(&[&[0, 4], &[1, 2], &[4, 0]]);
        for p in y.iter() {
            assert_eq!(classify_point(p, &y).unwrap(), ExtremeSupported);
        }
        let y = set(&[&[0, 4], &[2, 3], &[4, 0]]);
        assert_eq!(classify_point(&v(&[2, 3]), &y).unwrap(), Unsupported);
        let y = set(&[&[0, 4], &[2, 2], &[4, 0]]);
        assert_eq!(classify_point(&v(&[2, 2]), &y).unwrap(), SupportedNonExtreme);
        assert_eq!(classify_point(&v(&[0, 4]), &y).unwrap(), ExtremeSupported);
    }

    #[test]
    fn classify_set_examples() {
        let s = set(&[&[3, 7]]);
        let part = classify_set(&s).unwrap();
        assert_eq!(part.extreme, s);
        assert!(part.supported_non_extreme.is_empty() && part.unsupported.is_empty());

        let s = set(&[&[0, 4], &[2, 2], &[4, 0]]);
        let part = classify_set(&s).unwrap();
        assert_eq!(part.extreme, set(&[&[0, 4], &[4, 0]]));
        assert_eq!(part.supported_non_extreme, set(&[&[2, 2]]));

        let s = set(&[&[0, 4], &[2, 3], &[4, 0]]);
        let part = classify_set(&s).unwrap();
        assert_eq!(part.unsupported, set(&[&[2, 3]]));
    }

    #[test]
    fn errors() {
        let s = set(&[&[0, 4], &[4, 0]]);
        assert!(matches!(classify_point(&v(&[1, 5]), &s), Err(Error::InvalidInput(_))));
        assert!(matches!(classify_point(&v(&[1, 1]), &s), Err(Error::NotMember(_))));
        let line = set(&[&[3]]);
        assert!(classify_set(&line).is_err());
    }

    #[test]
    fn minimizer_examples() {
        let y = set(&[&[0, 4], &[1, 2], &[4, 0]]);
        let l = SearchDirection::from_integers(&[1, 1]).unwrap();
        assert_eq!(minimizers(&y, &l).unwrap(), set(&[&[1, 2]]));
        // (0,4)->8, (1,2)->5, (4,0)->4
        let l = SearchDirection::from_integers(&[1, 2]).unwrap();
        assert_eq!(minimizers(&y, &l).unwrap(), set(&[&[4, 0]]));
        let y = set(&[&[0, 4], &[2, 2], &[4, 0]]);
        let l = SearchDirection::from_integers(&[1, 1]).unwrap();
        assert_eq!(minimizers(&y, &l).unwrap(), y);
        assert!(SearchDirection::from_integers(&[1, 0]).is_err());
    }

    /// Exact planar oracle: vertices of the lower-left convex chain via
    /// monotone-chain cross products, then on-chain / above-chain tests.
    fn planar_oracle(s: &StableSet) -> Vec<Classification> {
        let pts = s.points();
        let cross = |o: &ObjectiveVector, a: &ObjectiveVector, b: &ObjectiveVector| -> i128 {
            let (ox, oy) = (o.coords()[0] as i128, o.coords()[1] as i128);
            (a.coords()[0] as i128 - ox) * (b.coords()[1] as i128 - oy)
                - (a.coords()[1] as i128 - oy) * (b.coords()[0] as i128 - ox)
        };
        // points sorted by x ascending (and y descending since stable)
        let mut hull: Vec<usize> = Vec::new();
        for i in 0..pts.len() {
            while hull.len() >= 2
                && cross(&pts[hull[hull.len() - 2]], &pts[hull[hull.len() - 1]], &pts[i]) <= 0
            {
                hull.pop();
            }
            hull.push(i);
        }
        let mut out = vec![Unsupported; pts.len()];
        for &h in &hull {
            out[h] = ExtremeSupported;
        }
        for (i, y) in pts.iter().enumerate() {
            if out[i] == ExtremeSupported {
                continue;
            }
            let seg = hull.windows(2).find(|w| pts[w[0]].coords()[0] <= y.coords()[0] && y.coords()[0] <= pts[w[1]].coords()[0]).unwrap();
            if cross(&pts[seg[0]], &pts[seg[1]], y) == 0 {
                out[i] = SupportedNonExtreme;
            }
        }
        out
    }

    fn stable(dim: usize, max: i64, n: usize) -> impl Strategy<Value = StableSet> {
        // near the simplex Σy = max·(dim-1), so most points survive filtering
        proptest::collection::vec(proptest::collection::vec(0i64..max, dim), 1..n)
            .prop_map(move |pts| {
                let pts: Vec<_> = pts
                    .into_iter()
                    .map(|mut c| {
                        let head: i64 = c[..dim - 1].iter().sum();
                        c[dim - 1] = max * (dim as i64 - 1) - head + c[dim - 1] / 4;
                        ObjectiveVector::from(c)
                    })
                    .collect();
                filter_naive(dim, &pts)
            })
    }

    /// One-sided grid oracle: a grid weight that makes `y` a (unique) minimizer
    /// certifies supported (extreme).
    fn grid_oracle(s: &StableSet, steps: i64) -> Vec<(bool, bool)> {
        let p = s.dim();
        let mut res = vec![(false, false); s.len()];
        let mut w = vec![1i64; p];
        loop {
            let vals: Vec<i64> = s
                .iter()
                .map(|y| y.coords().iter().zip(&w).map(|(a, b)| a * b).sum())
                .collect();
            let best = *vals.iter().min().unwrap();
            let argmin: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] == best).collect();
            for &i in &argmin {
                res[i].0 = true;
                if argmin.len() == 1 {
                    res[i].1 = true;
                }
            }
            let mut k = 0;
            loop {
                if k == p {
                    return res;
                }
                w[k] += 1;
                if w[k] <= steps {
                    break;
                }
                w[k] = 1;
                k += 1;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn planar_sets_match_exact_hull_oracle(s in stable(2, 60, 40)) {
            let expect = planar_oracle(&s);
            prop_assert_eq!(classify_all(&s).unwrap(), expect.clone());
            prop_assert_eq!(classify_all_lp(&s).unwrap(), expect.clone());
            for (y, c) in s.iter().zip(&expect) {
                prop_assert_eq!(classify_point(y, &s).unwrap(), *c);
            }
        }

        #[test]
        fn set_and_point_routes_agree(dim in 2usize..5, seed in any::<u64>()) {
            use rand_chacha::ChaCha8Rng;
            use rand_core::{RngCore, SeedableRng};
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + (rng.next_u32() % 40) as usize;
            let pts: Vec<_> = (0..n)
                .map(|_| ObjectiveVector::new((0..dim).map(|_| (rng.next_u32() % 25) as i64)))
                .collect();
            let s = filter_naive(dim, &pts);
            let classes = classify_all(&s).unwrap();
            let grid = grid_oracle(&s, if dim == 2 { 60 } else if dim == 3 { 20 } else { 9 });
            for (i, y) in s.iter().enumerate() {
                prop_assert_eq!(classify_point(y, &s).unwrap(), classes[i]);
                if grid[i].0 { prop_assert!(classes[i].is_supported()); }
                if grid[i].1 { prop_assert_eq!(classes[i], ExtremeSupported); }
            }
        }

        #[test]
        fn sum_extremes_from_local_extremes(dim in 2usize..4, a in stable(3, 20, 12), b in stable(3, 20, 12), c in stable(2, 30, 12)) {
            let inst = if dim == 2 {
                MspInstance::new(vec![c.clone(), c.shift(&ObjectiveVector::from([3, -1])).unwrap(), c]).unwrap()
            } else {
                MspInstance::new(vec![a, b]).unwrap()
            };
            let yn = nd_sum(&inst, NdSumOptions::default(), false).unwrap().set;
            prop_assert_eq!(
                extreme_points_of_sum(&inst, NdSumOptions::default()).unwrap(),
                extreme_points(&yn).unwrap()
            );
        }

        #[test]
        fn classification_is_shift_invariant(s in stable(3, 30, 30), z in proptest::collection::vec(-100i64..100, 3)) {
            let shifted = s.shift(&ObjectiveVector::from(z)).unwrap();
            prop_assert_eq!(classify_all(&s).unwrap(), classify_all(&shifted).unwrap());
        }
    }
}
