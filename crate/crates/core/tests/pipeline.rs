use minksum::classify::extreme_indices;
use minksum::experiments::{lower_bounds, prune_counts, SubsetSampler};
use minksum::{
    assemble_instance, classify_set, enumerate_sums, extreme_points_of_sum, filter_naive, minimum_generator_set,
    nd_sum, prune_with_bounds, redundancy_mask, run_cell, verify_generator, CellKey, ConfigSpec, Configuration,
    GridSpec, LowerMode, MgsOptions, MspInstance, NdSumOptions, ObjectiveVector, StableSet, VectorRole,
};
use proptest::prelude::*;

fn set(points: &[[i64; 2]]) -> StableSet {
    StableSet::new(2, points.iter().map(|c| ObjectiveVector::new(c.to_vec())).collect()).unwrap()
}

fn generated(p: usize, num_sets: usize, n: usize, configuration: Configuration, seed: u64) -> MspInstance {
    assemble_instance(&ConfigSpec {
        p,
        num_sets,
        cardinality: n,
        configuration,
        seed,
        hypercube_max: 10_000,
    })
    .unwrap()
    .instance
}

#[test]
fn small_sum_matches_hand_enumeration() {
    let inst = MspInstance::new(vec![set(&[[0, 2], [1, 1], [2, 0]]), set(&[[0, 3], [2, 2], [3, 0]])]).unwrap();
    let nd = nd_sum(&inst, NdSumOptions::default(), true).unwrap();
    assert_eq!(nd.set, set(&[[0, 5], [1, 4], [2, 3], [3, 2], [4, 1], [5, 0]]));
    assert_eq!(nd.set, filter_naive(2, &enumerate_sums(&inst).unwrap()));
    let combos: Vec<usize> = nd.provenance.unwrap().all().iter().map(Vec::len).collect();
    assert_eq!(combos, [1, 1, 1, 1, 1, 1]);
    let part = classify_set(&nd.set).unwrap();
    assert_eq!(part.extreme.len(), 2);
    assert_eq!(part.supported_non_extreme.len(), 4);
}

#[test]
fn generated_pipeline_is_consistent() {
    for (k, cfg) in [Configuration::L, Configuration::M, Configuration::U, Configuration::LU].into_iter().enumerate() {
        let inst = generated(2, 3, 12, cfg, 40 + k as u64);
        let nd = nd_sum(&inst, NdSumOptions::default(), true).unwrap();
        let part = classify_set(&nd.set).unwrap();
        let ynse = extreme_points_of_sum(&inst, NdSumOptions::default()).unwrap();
        assert_eq!(ynse.len(), part.extreme.len());
        let local_max = inst.local_sets().iter().map(|s| extreme_indices(s).unwrap().len()).max().unwrap();
        assert!(nd.set.len() >= ynse.len() && ynse.len() >= local_max);

        let mgs = minimum_generator_set(&inst, MgsOptions::default()).unwrap();
        assert!(verify_generator(&mgs.generator, &inst).unwrap());
        let mask = redundancy_mask(&inst).unwrap();
        let roles = mgs.generator.roles().unwrap();
        for s in 0..inst.num_sets() {
            for i in 0..inst.local(s).len() {
                assert_eq!(mask[s][i], roles[s][i] == VectorRole::Excluded);
                if roles[s][i] == VectorRole::FixedRequired {
                    assert!(mgs.generator.is_chosen(s, i));
                }
            }
        }

        let uppers: Vec<StableSet> = inst.local_sets().to_vec();
        for mode in [LowerMode::Hull, LowerMode::Exact] {
            let g = prune_with_bounds(&inst, &lower_bounds(&inst, mode).unwrap(), &uppers).unwrap();
            assert!(verify_generator(&g, &inst).unwrap());
            for (s, idx) in g.removed(&inst).iter().enumerate() {
                assert!(idx.iter().all(|&i| mask[s][i]));
            }
            assert!(g.total_cardinality() >= mgs.total_cardinality);
        }
    }
}

#[test]
fn run_cell_agrees_with_direct_calls() {
    let grid = GridSpec {
        sweep: vec![0, 100],
        ..GridSpec::default()
    };
    let key = CellKey {
        p: 2,
        num_sets: 2,
        n: 15,
        configuration: Configuration::LU,
        seed: 11,
    };
    let rec = run_cell(key, &grid);
    assert!(rec.error.is_none());
    let inst = generated(2, 2, 15, Configuration::LU, 11);
    let nd = nd_sum(&inst, NdSumOptions::default(), false).unwrap();
    assert_eq!(rec.yn, Some(nd.set.len()));
    let mgs = minimum_generator_set(&inst, MgsOptions::default()).unwrap();
    assert_eq!(rec.mgs.as_ref().unwrap().total, mgs.total_cardinality);
    let sampler = SubsetSampler::new(&inst, 11).unwrap();
    let lowers = lower_bounds(&inst, LowerMode::Exact).unwrap();
    assert_eq!(
        rec.prune(0, 100, LowerMode::Exact).unwrap().kept,
        prune_counts(&inst, &sampler, &lowers, 0, 100).unwrap()
    );
    assert_eq!(rec.prunes.len(), 4 + 2);
}

fn anti_correlated(n: usize) -> impl Strategy<Value = StableSet> {
    proptest::collection::vec((0i64..60, 0i64..8), 1..n).prop_map(|v| {
        let pts = v.into_iter().map(|(a, e)| ObjectiveVector::new([a, 60 - a + e])).collect();
        minksum::filter_nondominated(2, pts)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sum_ignores_order_and_prefiltering(a in anti_correlated(15), b in anti_correlated(15), c in anti_correlated(15)) {
        let abc = MspInstance::new(vec![a.clone(), b.clone(), c.clone()]).unwrap();
        let cab = MspInstance::new(vec![c, a, b]).unwrap();
        let yn = nd_sum(&abc, NdSumOptions::default(), false).unwrap().set;
        prop_assert_eq!(&yn, &nd_sum(&cab, NdSumOptions::default(), false).unwrap().set);
        prop_assert_eq!(&yn, &filter_naive(2, &enumerate_sums(&abc).unwrap()));
    }
}

#[test]
fn metrics_inputs_are_shift_invariant() {
    let inst = generated(2, 3, 14, Configuration::U, 5);
    let offsets: Vec<ObjectiveVector> = (0..3).map(|s| ObjectiveVector::new([100 * s as i64 - 70, 13 - 9 * s as i64])).collect();
    let moved = inst.shifted(&offsets).unwrap();
    let a = minimum_generator_set(&inst, MgsOptions::default()).unwrap();
    let b = minimum_generator_set(&moved, MgsOptions::default()).unwrap();
    assert_eq!(a.generator.chosen(), b.generator.chosen());
    let sa = SubsetSampler::new(&inst, 5).unwrap();
    let sb = SubsetSampler::new(&moved, 5).unwrap();
    for mode in [LowerMode::Hull, LowerMode::Exact] {
        let la = lower_bounds(&inst, mode).unwrap();
        let lb = lower_bounds(&moved, mode).unwrap();
        for x in [0, 50, 100] {
            assert_eq!(prune_counts(&inst, &sa, &la, x, x).unwrap(), prune_counts(&moved, &sb, &lb, x, x).unwrap());
        }
    }
}
