//! Nondominance filtering and the nondominated sum of a Minkowski sum.
//!
//! Two filters share one contract: [`filter_naive`] is the quadratic pairwise
//! reference, [`filter_nondominated`] is a Kung-style divide and conquer over
//! the lexicographically sorted input. The ND sum folds local sets pairwise,
//! filtering the working buffer whenever it exceeds the configured limit so the
//! full Minkowski sum is never held in memory.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::MspInstance;
use crate::stable::StableSet;
use crate::vector::ObjectiveVector;

pub const DEFAULT_BUFFER_LIMIT: usize = 1 << 20;
pub const DEFAULT_PROVENANCE_CAP: u64 = 10_000_000;

/// Below this size the divide and conquer falls back to pairwise checks.
const BASE_CASE: usize = 24;

/// Pairwise O(n²) filter. Duplicates collapse.
pub fn filter_naive(dim: usize, points: &[ObjectiveVector]) -> StableSet {
    let mut keep: Vec<ObjectiveVector> = points
        .iter()
        .filter(|y| !points.iter().any(|z| z.dominates(y)))
        .cloned()
        .collect();
    keep.sort_unstable();
    keep.dedup();
    StableSet::from_canonical(dim, keep)
}

/// Divide-and-conquer filter; output identical to [`filter_naive`].
pub fn filter_nondominated(dim: usize, mut points: Vec<ObjectiveVector>) -> StableSet {
    points.sort_unstable();
    points.dedup();
    let kept = maxima(dim, &points);
    StableSet::from_canonical(dim, kept)
}

/// Minimal elements of a sorted, deduplicated slice. A dominator always
/// precedes the vector it dominates in lexicographic order, so the first half
/// is never dominated by the second.
fn maxima(dim: usize, sorted: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    if sorted.len() <= BASE_CASE {
        let mut out: Vec<ObjectiveVector> = Vec::with_capacity(sorted.len());
        for y in sorted {
            if !out.iter().any(|a| a.dominates(y)) {
                out.push(y.clone());
            }
        }
        return out;
    }
    let mid = sorted.len() / 2;
    let mut head = maxima(dim, &sorted[..mid]);
    let tail = maxima(dim, &sorted[mid..]);
    let survivors: Vec<ObjectiveVector> = match dim {
        2 => {
            // every head vector is lexicographically smaller, so only the second
            // coordinate can save a tail vector
            let min2 = head.iter().map(|a| a.coords()[1]).min().unwrap_or(i64::MAX);
            tail.into_iter().filter(|b| b.coords()[1] < min2).collect()
        }
        3 => {
            let mut stairs = Staircase::default();
            for a in &head {
                stairs.insert(a.coords()[1], a.coords()[2]);
            }
            tail.into_iter()
                .filter(|b| !stairs.covers(b.coords()[1], b.coords()[2]))
                .collect()
        }
        _ => tail
            .into_iter()
            .filter(|b| !head.iter().any(|a| a.weakly_dominates(b)))
            .collect(),
    };
    head.extend(survivors);
    head
}

/// Nondominated staircase in the plane for weak-dominance queries.
/// Keys ascend while values strictly descend.
#[derive(Default)]
struct Staircase {
    steps: BTreeMap<i64, i64>,
}

impl Staircase {
    fn covers(&self, a: i64, b: i64) -> bool {
        self.steps
            .range(..=a)
            .next_back()
            .is_some_and(|(_, &v)| v <= b)
    }

    fn insert(&mut self, a: i64, b: i64) {
        if self.covers(a, b) {
            return;
        }
        let stale: Vec<i64> = self
            .steps
            .range(a..)
            .take_while(|(_, &v)| v >= b)
            .map(|(&k, _)| k)
            .collect();
        for k in stale {
            self.steps.remove(&k);
        }
        self.steps.insert(a, b);
    }
}

/// `ND(A ⊕ B)`.
pub fn minkowski_pair(a: &StableSet, b: &StableSet) -> Result<StableSet> {
    buffered_pair(a, b, DEFAULT_BUFFER_LIMIT)
}

fn buffered_pair(a: &StableSet, b: &StableSet, buffer_limit: usize) -> Result<StableSet> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let dim = a.dim();
    let limit = buffer_limit.max(1);
    let mut threshold = limit;
    let mut buf: Vec<ObjectiveVector> = Vec::new();
    for x in a {
        for y in b {
            buf.push(x.checked_add(y)?);
            if buf.len() >= threshold {
                buf = filter_nondominated(dim, std::mem::take(&mut buf)).into_points();
                // if the frontier itself outgrows the limit, keep headroom so
                // refiltering stays amortized
                threshold = limit.max(2 * buf.len());
            }
        }
    }
    Ok(filter_nondominated(dim, buf))
}

/// One point per local set, by canonical index; `indices[s]` indexes set `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Combination(pub Vec<usize>);

impl Combination {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

/// `C(y)` for every vector of the ND sum, aligned with the ND sum's canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    combos: Vec<Vec<Combination>>,
}

impl Provenance {
    pub fn new(combos: Vec<Vec<Combination>>) -> Self {
        Provenance { combos }
    }

    /// Combinations of the `k`-th vector of the ND sum.
    pub fn of_index(&self, k: usize) -> &[Combination] {
        &self.combos[k]
    }

    pub fn all(&self) -> &[Vec<Combination>] {
        &self.combos
    }

    pub fn total(&self) -> usize {
        self.combos.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NdSumOptions {
    pub buffer_limit: usize,
    pub provenance_cap: u64,
}

impl Default for NdSumOptions {
    fn default() -> Self {
        NdSumOptions {
            buffer_limit: DEFAULT_BUFFER_LIMIT,
            provenance_cap: DEFAULT_PROVENANCE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdSum {
    pub set: StableSet,
    pub provenance: Option<Provenance>,
}

/// `Yn = ND(⊕_s Y^s)` by a sequential buffered fold, with optional `C(y)`.
///
/// Provenance is recovered afterwards by walking back through the stored
/// prefix ND sums: every prefix of a combination summing to a vector of `Yn`
/// is itself nondominated in the corresponding prefix sum.
pub fn nd_sum(instance: &MspInstance, opts: NdSumOptions, want_provenance: bool) -> Result<NdSum> {
    if opts.buffer_limit < instance.max_local_len() {
        return Err(Error::InvalidInput(format!(
            "buffer limit {} is smaller than the largest local set ({})",
            opts.buffer_limit,
            instance.max_local_len()
        )));
    }
    let sets = instance.local_sets();
    let mut acc = sets[0].clone();
    let mut prefixes = Vec::new();
    if want_provenance {
        prefixes.push(acc.clone());
    }
    for set in &sets[1..] {
        acc = buffered_pair(&acc, set, opts.buffer_limit)?;
        if want_provenance {
            prefixes.push(acc.clone());
        }
    }
    let provenance = if want_provenance {
        Some(trace_provenance(instance, &prefixes, opts.provenance_cap)?)
    } else {
        None
    };
    Ok(NdSum {
        set: acc,
        provenance,
    })
}

fn trace_provenance(instance: &MspInstance, prefixes: &[StableSet], cap: u64) -> Result<Provenance> {
    let last = prefixes.len() - 1;
    let mut total = 0u64;
    let mut combos = Vec::with_capacity(prefixes[last].len());
    let mut stack = vec![0usize; instance.num_sets()];
    for y in prefixes[last].iter() {
        let mut found = Vec::new();
        walk_back(instance, prefixes, last, y, &mut stack, &mut found)?;
        total += found.len() as u64;
        if total > cap {
            return Err(Error::ResourceCap {
                what: "provenance combinations",
                cap,
            });
        }
        found.sort_unstable();
        combos.push(found);
    }
    Ok(Provenance { combos })
}

fn walk_back(
    instance: &MspInstance,
    prefixes: &[StableSet],
    level: usize,
    target: &ObjectiveVector,
    stack: &mut [usize],
    found: &mut Vec<Combination>,
) -> Result<()> {
    let local = instance.local(level);
    if level == 0 {
        if let Some(i) = local.index_of(target) {
            stack[0] = i;
            found.push(Combination(stack.to_vec()));
        }
        return Ok(());
    }
    for (j, b) in local.iter().enumerate() {
        let rest = target.checked_sub(b)?;
        if prefixes[level - 1].contains(&rest) {
            stack[level] = j;
            walk_back(instance, prefixes, level - 1, &rest, stack, found)?;
        }
    }
    Ok(())
}

/// Odometer over every combination of an instance, in lexicographic index order.
pub fn all_combinations(instance: &MspInstance) -> impl Iterator<Item = Vec<usize>> + '_ {
    let sizes: Vec<usize> = instance.local_sets().iter().map(StableSet::len).collect();
    let mut next = Some(vec![0usize; sizes.len()]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for s in (0..sizes.len()).rev() {
            succ[s] += 1;
            if succ[s] < sizes[s] {
                next = Some(succ);
                break;
            }
            succ[s] = 0;
        }
        Some(current)
    })
}

/// Every vector sum of the instance (the full Minkowski sum as a multiset).
pub fn enumerate_sums(instance: &MspInstance) -> Result<Vec<ObjectiveVector>> {
    all_combinations(instance)
        .map(|c| instance.vector_sum(&c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(points: &[&[i64]]) -> StableSet {
        StableSet::new(
            points[0].len(),
            points.iter().map(|c| ObjectiveVector::new(c.iter().copied())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn filter_examples() {
        let pts = vec![
            ObjectiveVector::from([1, 2]),
            ObjectiveVector::from([2, 1]),
            ObjectiveVector::from([2, 2]),
        ];
        let expect = set(&[&[1, 2], &[2, 1]]);
        assert_eq!(filter_nondominated(2, pts.clone()), expect);
        assert_eq!(filter_naive(2, &pts), expect);
        assert_eq!(
            filter_nondominated(2, vec![ObjectiveVector::from([3, 3])]),
            set(&[&[3, 3]])
        );
        assert!(filter_nondominated(2, Vec::new()).is_empty());
    }

    #[test]
    fn staircase_queries() {
        let mut s = Staircase::default();
        s.insert(2, 5);
        s.insert(4, 3);
        assert!(s.covers(2, 5));
        assert!(s.covers(3, 6));
        assert!(!s.covers(1, 9));
        assert!(!s.covers(3, 4));
        s.insert(1, 3); // replaces both steps
        assert_eq!(s.steps.len(), 1);
        assert!(s.covers(4, 3));
    }

    #[test]
    fn nd_sum_singletons() {
        let inst = MspInstance::new(vec![set(&[&[1, 0]]), set(&[&[0, 1]])]).unwrap();
        let out = nd_sum(&inst, NdSumOptions::default(), true).unwrap();
        assert_eq!(out.set, set(&[&[1, 1]]));
        assert_eq!(out.provenance.unwrap().of_index(0), &[Combination(vec![0, 0])]);
    }

    #[test]
    fn nd_sum_small_example() {
        // all 6 sums: (0,7) (3,4) (1,5) (4,2) (4,3) (7,0); only (4,3) is dominated
        let inst = MspInstance::new(vec![
            set(&[&[0, 4], &[1, 2], &[4, 0]]),
            set(&[&[0, 3], &[3, 0]]),
        ])
        .unwrap();
        let out = nd_sum(&inst, NdSumOptions::default(), false).unwrap();
        assert_eq!(out.set, set(&[&[0, 7], &[1, 5], &[3, 4], &[4, 2], &[7, 0]]));
    }

    #[test]
    fn nd_sum_collapses_ties_and_keeps_all_combinations() {
        let inst = MspInstance::new(vec![set(&[&[0, 1], &[1, 0]]), set(&[&[0, 1], &[1, 0]])]).unwrap();
        let out = nd_sum(&inst, NdSumOptions::default(), true).unwrap();
        assert_eq!(out.set, set(&[&[0, 2], &[1, 1], &[2, 0]]));
        let prov = out.provenance.unwrap();
        assert_eq!(
            prov.of_index(1),
            &[Combination(vec![0, 1]), Combination(vec![1, 0])]
        );
    }

    #[test]
    fn nd_sum_rejects_small_buffer() {
        let inst = MspInstance::new(vec![set(&[&[0, 1], &[1, 0]])]).unwrap();
        let opts = NdSumOptions {
            buffer_limit: 1,
            ..Default::default()
        };
        assert!(matches!(nd_sum(&inst, opts, false), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn provenance_cap_is_enforced() {
        let inst = MspInstance::new(vec![set(&[&[0, 1], &[1, 0]]), set(&[&[0, 1], &[1, 0]])]).unwrap();
        let opts = NdSumOptions {
            provenance_cap: 3,
            ..Default::default()
        };
        assert_eq!(
            nd_sum(&inst, opts, true).unwrap_err(),
            Error::ResourceCap {
                what: "provenance combinations",
                cap: 3
            }
        );
    }

    #[test]
    fn odometer_visits_every_combination_once() {
        let inst = MspInstance::new(vec![
            set(&[&[0, 4], &[1, 2], &[4, 0]]),
            set(&[&[0, 3], &[3, 0]]),
        ])
        .unwrap();
        let all: Vec<_> = all_combinations(&inst).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[5], vec![2, 1]);
    }

    fn cloud(dim: usize) -> impl Strategy<Value = Vec<ObjectiveVector>> {
        proptest::collection::vec(proptest::collection::vec(0i64..30, dim), 0..200)
            .prop_map(|v| v.into_iter().map(ObjectiveVector::from).collect())
    }

    fn small_stable(dim: usize) -> impl Strategy<Value = StableSet> {
        cloud(dim).prop_filter_map("nonempty", move |pts| {
            let s = filter_naive(dim, &pts);
            (!s.is_empty()).then_some(s)
        })
    }

    proptest! {
        #[test]
        fn divide_and_conquer_matches_naive(dim in 1usize..6, seed in any::<u64>()) {
            use rand_chacha::ChaCha8Rng;
            use rand_core::{RngCore, SeedableRng};
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = (rng.next_u32() % 400) as usize;
            let pts: Vec<_> = (0..n)
                .map(|_| ObjectiveVector::new((0..dim).map(|_| (rng.next_u32() % 40) as i64)))
                .collect();
            prop_assert_eq!(filter_nondominated(dim, pts.clone()), filter_naive(dim, &pts));
        }

        #[test]
        fn shift_commutes_with_filtering(pts in cloud(3), z in proptest::collection::vec(-50i64..50, 3)) {
            let z = ObjectiveVector::from(z);
            let shifted: Vec<_> = pts.iter().map(|y| y.checked_add(&z).unwrap()).collect();
            prop_assert_eq!(
                filter_nondominated(3, shifted),
                filter_nondominated(3, pts).shift(&z).unwrap()
            );
        }

        #[test]
        fn minkowski_pair_is_commutative_and_associative(
            a in small_stable(2), b in small_stable(2), c in small_stable(2)
        ) {
            prop_assert_eq!(minkowski_pair(&a, &b).unwrap(), minkowski_pair(&b, &a).unwrap());
            let left = minkowski_pair(&minkowski_pair(&a, &b).unwrap(), &c).unwrap();
            let right = minkowski_pair(&a, &minkowski_pair(&b, &c).unwrap()).unwrap();
            // brute-force oracle
            let mut all = Vec::new();
            for x in &a { for y in &b { for w in &c {
                all.push(x.checked_add(y).unwrap().checked_add(w).unwrap());
            }}}
            let oracle = filter_naive(2, &all);
            prop_assert_eq!(&left, &oracle);
            prop_assert_eq!(&right, &oracle);
        }

        #[test]
        fn zero_offset_is_identity(b in small_stable(3)) {
            let zero = StableSet::singleton(ObjectiveVector::zeros(3));
            prop_assert_eq!(minkowski_pair(&zero, &b).unwrap(), b);
        }
    }
}
