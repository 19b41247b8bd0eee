//! Brute-force reference answers for small instances.

use minksum::{
    all_combinations, filter_naive, verify_generator_against, Combination, Error, GeneratorSet, MspInstance, NdSum,
    Provenance, Result, StableSet,
};

/// Largest `Π_s |Y^s|` the enumeration oracles accept.
pub const ORACLE_COMBINATION_CAP: u64 = 1_000_000;
/// Largest `Σ_s |Y^s|` the subset oracle accepts.
pub const ORACLE_VECTOR_CAP: u64 = 20;

fn check_size(instance: &MspInstance) -> Result<()> {
    if instance.combination_count() > ORACLE_COMBINATION_CAP as u128 {
        return Err(Error::ResourceCap {
            what: "oracle combinations",
            cap: ORACLE_COMBINATION_CAP,
        });
    }
    Ok(())
}

/// `ND` of the full enumeration, with `C(y)` when asked.
pub fn nd_sum(instance: &MspInstance, provenance: bool) -> Result<NdSum> {
    check_size(instance)?;
    let sums: Vec<_> = all_combinations(instance)
        .map(|c| instance.vector_sum(&c).map(|y| (y, c)))
        .collect::<Result<_>>()?;
    let points: Vec<_> = sums.iter().map(|(y, _)| y.clone()).collect();
    let set = filter_naive(instance.dim(), &points);
    let provenance = provenance.then(|| {
        let mut combos = vec![Vec::new(); set.len()];
        for (y, c) in sums {
            if let Some(k) = set.index_of(&y) {
                combos[k].push(Combination(c));
            }
        }
        for c in &mut combos {
            c.sort_unstable();
        }
        Provenance::new(combos)
    });
    Ok(NdSum { set, provenance })
}

/// `[s][i]`: every vector sum through `Y^s[i]` is dominated.
pub fn redundancy_mask(instance: &MspInstance) -> Result<Vec<Vec<bool>>> {
    let nd = nd_sum(instance, false)?;
    let mut redundant: Vec<Vec<bool>> = instance.local_sets().iter().map(|s| vec![true; s.len()]).collect();
    for c in all_combinations(instance) {
        if nd.set.contains(&instance.vector_sum(&c)?) {
            for (s, &i) in c.iter().enumerate() {
                redundant[s][i] = false;
            }
        }
    }
    Ok(redundant)
}

/// The first generator set of minimum total cardinality in level order.
pub fn minimum_generator_set(instance: &MspInstance) -> Result<GeneratorSet> {
    let slots: Vec<(usize, usize)> = instance
        .local_sets()
        .iter()
        .enumerate()
        .flat_map(|(s, set)| (0..set.len()).map(move |i| (s, i)))
        .collect();
    if slots.len() as u64 > ORACLE_VECTOR_CAP {
        return Err(Error::ResourceCap {
            what: "oracle vectors",
            cap: ORACLE_VECTOR_CAP,
        });
    }
    let yn = nd_sum(instance, false)?.set;
    let n = instance.num_sets();
    for k in n..=slots.len() {
        let mut pick: Vec<usize> = (0..k).collect();
        loop {
            let mut chosen = vec![Vec::new(); n];
            for &j in &pick {
                chosen[slots[j].0].push(slots[j].1);
            }
            if chosen.iter().all(|c| !c.is_empty()) {
                let g = GeneratorSet::new(instance, chosen)?;
                if verify_generator_against(&g, instance, &yn)? {
                    return Ok(g);
                }
            }
            if !next_subset(&mut pick, slots.len()) {
                break;
            }
        }
    }
    unreachable!("the full instance always generates its ND sum")
}

fn next_subset(pick: &mut [usize], n: usize) -> bool {
    let k = pick.len();
    for j in (0..k).rev() {
        if pick[j] < n - k + j {
            pick[j] += 1;
            for t in j + 1..k {
                pick[t] = pick[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Local sets with the masked vectors removed.
pub fn kept_sets(instance: &MspInstance, mask: &[Vec<bool>]) -> Vec<StableSet> {
    instance
        .local_sets()
        .iter()
        .zip(mask)
        .map(|(set, m)| {
            let idx: Vec<usize> = (0..set.len()).filter(|&i| !m[i]).collect();
            set.subset(&idx)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use minksum::{ndfilter, ObjectiveVector};

    fn inst(sets: &[&[[i64; 2]]]) -> MspInstance {
        MspInstance::new(
            sets.iter()
                .map(|s| StableSet::new(2, s.iter().map(|c| ObjectiveVector::new(c.to_vec())).collect()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn redundancy_example() {
        let i = inst(&[&[[0, 4], [3, 3], [4, 0]], &[[0, 1], [1, 0]]]);
        let m = redundancy_mask(&i).unwrap();
        assert_eq!(m, vec![vec![false, true, false], vec![false, false]]);
        assert_eq!(minimum_generator_set(&i).unwrap().total_cardinality(), 4);
    }

    #[test]
    fn oracle_matches_fast_sum() {
        let i = inst(&[&[[2, 2], [3, 1]], &[[2, 5], [3, 4], [4, 3], [5, 1]]]);
        let fast = ndfilter::nd_sum(&i, Default::default(), true).unwrap();
        assert_eq!(nd_sum(&i, true).unwrap(), fast);
    }

    #[test]
    fn subsets_in_order() {
        let mut p = vec![0, 1];
        let mut seen = vec![p.clone()];
        while next_subset(&mut p, 4) {
            seen.push(p.clone());
        }
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }
}
