//! Desk-scale experiment harness: instance grids, per-run records, the
//! `r^m` and `q^m` metrics, the growth fit and sign tests.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounding::{lower_hull_bound, prune_with_role_bounds, BoundingSet, Side};
use crate::classify::{extreme_indices, extreme_points_of_sum};
use crate::error::{Error, Result};
use crate::generator::{minimum_generator_set_from, GeneratorSet, MgsOptions, SolverPath, DEFAULT_NODE_LIMIT};
use crate::instance::MspInstance;
use crate::instgen::{assemble_instance, ConfigSpec, Configuration, Method, DEFAULT_HYPERCUBE_MAX};
use crate::ndfilter::{nd_sum, NdSumOptions, DEFAULT_BUFFER_LIMIT, DEFAULT_PROVENANCE_CAP};
use crate::stable::StableSet;

/// Parameter grid; every field has a desk-scale default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub p: Vec<usize>,
    pub num_sets: Vec<usize>,
    pub n: Vec<usize>,
    pub configurations: Vec<Configuration>,
    pub seeds: Vec<u64>,
    pub hypercube_max: i64,
    /// Percentages used for both λ and γ.
    pub sweep: Vec<u32>,
    pub node_limit: u64,
    pub provenance_cap: u64,
    pub mgs: bool,
    pub prune: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            p: vec![2, 3],
            num_sets: vec![2, 3, 4],
            n: vec![10, 20, 40],
            configurations: vec![Configuration::L, Configuration::M, Configuration::U, Configuration::LU],
            seeds: vec![1, 2, 3],
            hypercube_max: DEFAULT_HYPERCUBE_MAX,
            sweep: vec![0, 25, 50, 75, 100],
            node_limit: DEFAULT_NODE_LIMIT,
            provenance_cap: DEFAULT_PROVENANCE_CAP,
            mgs: true,
            prune: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub p: usize,
    pub num_sets: usize,
    pub n: usize,
    pub configuration: Configuration,
    pub seed: u64,
}

impl GridSpec {
    /// Every (cell, seed) in key order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &num_sets in &self.num_sets {
                for &n in &self.n {
                    for &configuration in &self.configurations {
                        for &seed in &self.seeds {
                            out.push(CellKey {
                                p,
                                num_sets,
                                n,
                                configuration,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LowerMode {
    Hull,
    Exact,
}

impl fmt::Display for LowerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LowerMode::Hull => "hull",
            LowerMode::Exact => "exact",
        })
    }
}

impl FromStr for LowerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hull" => Ok(LowerMode::Hull),
            "exact" => Ok(LowerMode::Exact),
            _ => Err(Error::InvalidInput(format!("unknown lower bound mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetRecord {
    pub method: Method,
    pub seed: u64,
    /// `|Yn^s|`
    pub yn: usize,
    /// `|Ynse^s|`
    pub ynse: usize,
    /// `|G^s|` in the minimum generator set.
    pub generator: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MgsSummary {
    pub total: usize,
    pub unique: bool,
    pub solver_path: SolverPath,
    pub nodes: u64,
}

/// `|Ĝ^s|` per local set for one bound configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneRecord {
    pub lambda: u32,
    pub gamma: u32,
    pub lower: LowerMode,
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub generate_ms: f64,
    pub ndsum_ms: f64,
    pub classify_ms: f64,
    pub mgs_ms: f64,
    pub prune_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub key: CellKey,
    pub sets: Vec<SetRecord>,
    pub yn: Option<usize>,
    pub ynse: Option<usize>,
    pub mgs: Option<MgsSummary>,
    pub prunes: Vec<PruneRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn prune(&self, lambda: u32, gamma: u32, lower: LowerMode) -> Option<&PruneRecord> {
        self.prunes
            .iter()
            .find(|r| r.lambda == lambda && r.gamma == gamma && r.lower == lower)
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Nested random subsets of the non-extreme vectors: one seeded permutation
/// per local set, of which the first `x`% are taken.
pub struct SubsetSampler {
    extreme: Vec<Vec<usize>>,
    order: Vec<Vec<usize>>,
}

impl SubsetSampler {
    /// The permutation stream is stream 1 of the instance seed, so it never
    /// overlaps the draws that generated the instance.
    pub fn new(instance: &MspInstance, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut extreme = Vec::new();
        let mut order = Vec::new();
        for set in instance.local_sets() {
            let ext = extreme_indices(set)?;
            let mut rest: Vec<usize> = (0..set.len()).filter(|i| ext.binary_search(i).is_err()).collect();
            rest.shuffle(&mut rng);
            extreme.push(ext);
            order.push(rest);
        }
        Ok(SubsetSampler { extreme, order })
    }

    /// `Ynse^s ∪ Ŷ^s(percent)`.
    pub fn upper(&self, instance: &MspInstance, s: usize, percent: u32) -> StableSet {
        let k = self.order[s].len() * percent.min(100) as usize / 100;
        let mut idx = self.extreme[s].clone();
        idx.extend_from_slice(&self.order[s][..k]);
        instance.local(s).subset(&idx)
    }
}

/// Lower bounds per local set for the given mode.
pub fn lower_bounds(instance: &MspInstance, mode: LowerMode) -> Result<Vec<BoundingSet>> {
    instance
        .local_sets()
        .iter()
        .map(|s| match mode {
            LowerMode::Hull => lower_hull_bound(s),
            LowerMode::Exact => Ok(BoundingSet::finite(s.clone(), Side::Lower)),
        })
        .collect()
}

/// Algorithm 2 with `U^s̄ = Ynse ∪ Ŷ(λ)` on the focus set and
/// `U^s = Ynse ∪ Ŷ(γ)` on the others.
pub fn prune_sampled(
    instance: &MspInstance,
    sampler: &SubsetSampler,
    lowers: &[BoundingSet],
    lambda: u32,
    gamma: u32,
) -> Result<GeneratorSet> {
    let n = instance.num_sets();
    let focus: Vec<StableSet> = (0..n).map(|s| sampler.upper(instance, s, lambda)).collect();
    let other: Vec<StableSet> = (0..n).map(|s| sampler.upper(instance, s, gamma)).collect();
    prune_with_role_bounds(instance, lowers, &focus, &other)
}

/// `|Ĝ^s|` from [`prune_sampled`].
pub fn prune_counts(
    instance: &MspInstance,
    sampler: &SubsetSampler,
    lowers: &[BoundingSet],
    lambda: u32,
    gamma: u32,
) -> Result<Vec<usize>> {
    let g = prune_sampled(instance, sampler, lowers, lambda, gamma)?;
    Ok(g.chosen().iter().map(Vec::len).collect())
}

/// One record; failures are stored in `error` rather than returned.
pub fn run_cell(key: CellKey, grid: &GridSpec) -> RunRecord {
    let mut rec = RunRecord {
        key,
        sets: Vec::new(),
        yn: None,
        ynse: None,
        mgs: None,
        prunes: Vec::new(),
        timings: Some(Timings::default()),
        error: None,
    };
    if let Err(e) = fill_record(&mut rec, grid) {
        rec.error = Some(e.to_string());
    }
    rec
}

fn fill_record(rec: &mut RunRecord, grid: &GridSpec) -> Result<()> {
    let key = rec.key;
    let t = Instant::now();
    let gen = assemble_instance(&ConfigSpec {
        p: key.p,
        num_sets: key.num_sets,
        cardinality: key.n,
        configuration: key.configuration,
        seed: key.seed,
        hypercube_max: grid.hypercube_max,
    })?;
    let timings = rec.timings.get_or_insert_with(Timings::default);
    timings.generate_ms = ms(t);
    let inst = &gen.instance;

    let t = Instant::now();
    for (s, set) in inst.local_sets().iter().enumerate() {
        rec.sets.push(SetRecord {
            method: gen.methods[s],
            seed: gen.seeds[s],
            yn: set.len(),
            ynse: extreme_indices(set)?.len(),
            generator: None,
        });
    }
    let opts = NdSumOptions {
        buffer_limit: DEFAULT_BUFFER_LIMIT,
        provenance_cap: grid.provenance_cap,
    };
    let classify_local = ms(t);

    let t = Instant::now();
    let nd = nd_sum(inst, opts, grid.mgs)?;
    rec.yn = Some(nd.set.len());
    let ndsum_ms = ms(t);

    let t = Instant::now();
    rec.ynse = Some(extreme_points_of_sum(inst, opts)?.len());
    let classify_ms = classify_local + ms(t);
    if let Some(tm) = rec.timings.as_mut() {
        tm.ndsum_ms = ndsum_ms;
        tm.classify_ms = classify_ms;
    }

    if grid.mgs {
        let t = Instant::now();
        let r = minimum_generator_set_from(
            inst,
            &nd,
            MgsOptions {
                nd: opts,
                node_limit: grid.node_limit,
                ..MgsOptions::default()
            },
        )?;
        for (s, c) in r.generator.chosen().iter().enumerate() {
            rec.sets[s].generator = Some(c.len());
        }
        rec.mgs = Some(MgsSummary {
            total: r.total_cardinality,
            unique: r.unique,
            solver_path: r.solver_path,
            nodes: r.nodes,
        });
        if let Some(tm) = rec.timings.as_mut() {
            tm.mgs_ms = ms(t);
        }
    }

    if grid.prune && key.p == 2 {
        let t = Instant::now();
        let sampler = SubsetSampler::new(inst, key.seed)?;
        let hull = lower_bounds(inst, LowerMode::Hull)?;
        let exact = lower_bounds(inst, LowerMode::Exact)?;
        for &gamma in &grid.sweep {
            for &lambda in &grid.sweep {
                rec.prunes.push(PruneRecord {
                    lambda,
                    gamma,
                    lower: LowerMode::Hull,
                    kept: prune_counts(inst, &sampler, &hull, lambda, gamma)?,
                });
            }
        }
        for &lambda in &grid.sweep {
            rec.prunes.push(PruneRecord {
                lambda,
                gamma: 100,
                lower: LowerMode::Exact,
                kept: prune_counts(inst, &sampler, &exact, lambda, 100)?,
            });
        }
        if let Some(tm) = rec.timings.as_mut() {
            tm.prune_ms = ms(t);
        }
    }
    Ok(())
}

/// Runs every cell (in parallel); records come back in key order.
pub fn run_grid(grid: &GridSpec) -> Vec<RunRecord> {
    grid.cells().into_par_iter().map(|k| run_cell(k, grid)).collect()
}

/// A per-method metric averaged over instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub method: Method,
    /// `None` when no instance contributed.
    pub value: Option<f64>,
    pub instances: usize,
    pub sets: usize,
}

/// `r^m` of one record: mean of `100·|G^s|/|Y^s|` over sets of method `m`.
pub fn instance_r(rec: &RunRecord) -> BTreeMap<Method, (f64, usize)> {
    let mut acc: BTreeMap<Method, (f64, usize)> = BTreeMap::new();
    for s in &rec.sets {
        if let Some(g) = s.generator {
            let e = acc.entry(s.method).or_default();
            e.0 += 100.0 * g as f64 / s.yn as f64;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(m, (sum, k))| (m, (sum / k as f64, k))).collect()
}

/// `q^m` of one record: mean over contributing sets of method `m` (those
/// with `|Yn^s| ≠ |G^s|`) of `100·(|Yn^s| - |Ĝ^s|)/(|Yn^s| - |G^s|)`.
pub fn instance_q(rec: &RunRecord, lambda: u32, gamma: u32, lower: LowerMode) -> BTreeMap<Method, (f64, usize)> {
    let Some(pr) = rec.prune(lambda, gamma, lower) else {
        return BTreeMap::new();
    };
    let mut acc: BTreeMap<Method, (f64, usize)> = BTreeMap::new();
    for (s, set) in rec.sets.iter().enumerate() {
        let Some(g) = set.generator else { continue };
        if g == set.yn {
            continue;
        }
        let e = acc.entry(set.method).or_default();
        e.0 += 100.0 * (set.yn - pr.kept[s]) as f64 / (set.yn - g) as f64;
        e.1 += 1;
    }
    acc.into_iter().map(|(m, (sum, k))| (m, (sum / k as f64, k))).collect()
}

fn average(per_instance: impl Iterator<Item = BTreeMap<Method, (f64, usize)>>) -> Vec<MetricValue> {
    let mut acc: BTreeMap<Method, (f64, usize, usize)> = BTreeMap::new();
    for m in per_instance {
        for (method, (v, k)) in m {
            let e = acc.entry(method).or_default();
            e.0 += v;
            e.1 += 1;
            e.2 += k;
        }
    }
    [Method::L, Method::M, Method::U]
        .into_iter()
        .map(|method| {
            let (sum, instances, sets) = acc.get(&method).copied().unwrap_or_default();
            MetricValue {
                method,
                value: (instances > 0).then(|| sum / instances as f64),
                instances,
                sets,
            }
        })
        .collect()
}

pub fn metric_r(records: &[RunRecord]) -> Vec<MetricValue> {
    average(records.iter().map(instance_r))
}

pub fn metric_q(records: &[RunRecord], lambda: u32, gamma: u32, lower: LowerMode) -> Vec<MetricValue> {
    average(records.iter().map(|r| instance_q(r, lambda, gamma, lower)))
}

/// Mean extreme fraction `|Ynse^s|/|Yn^s|` over local sets of `method`.
pub fn extreme_fraction(records: &[RunRecord], method: Method) -> Option<f64> {
    let fr: Vec<f64> = records
        .iter()
        .flat_map(|r| r.sets.iter())
        .filter(|s| s.method == method)
        .map(|s| s.ynse as f64 / s.yn as f64)
        .collect();
    (!fr.is_empty()).then(|| fr.iter().sum::<f64>() / fr.len() as f64)
}

/// `log|Yn| = log c1 + c2·p·log n + c3·p·log S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub r_squared: f64,
    pub observations: usize,
    pub cells: usize,
}

pub const MIN_FIT_CELLS: usize = 8;

/// Ordinary least squares over records that have `|Yn|`.
pub fn fit_growth(records: &[RunRecord]) -> Result<GrowthFit> {
    let rows: Vec<&RunRecord> = records.iter().filter(|r| r.yn.is_some_and(|y| y > 0)).collect();
    let mut cells: Vec<(usize, usize, usize)> = rows.iter().map(|r| (r.key.n, r.key.num_sets, r.key.p)).collect();
    cells.sort_unstable();
    cells.dedup();
    if cells.len() < MIN_FIT_CELLS {
        return Err(Error::InvalidInput(format!(
            "growth fit needs at least {MIN_FIT_CELLS} distinct (n, S, p) cells, got {}",
            cells.len()
        )));
    }
    let x = DMatrix::from_fn(rows.len(), 3, |i, j| {
        let k = &rows[i].key;
        match j {
            0 => 1.0,
            1 => k.p as f64 * (k.n as f64).ln(),
            _ => k.p as f64 * (k.num_sets as f64).ln(),
        }
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| (r.yn.unwrap() as f64).ln()));
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= smax * 1e-10 {
        return Err(Error::InvalidInput("degenerate design matrix for the growth fit".into()));
    }
    let beta = svd
        .solve(&y, smax * 1e-12)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let fitted = &x * &beta;
    let mean = y.mean();
    let ss_res: f64 = (&y - &fitted).iter().map(|e| e * e).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(GrowthFit {
        c1: beta[0].exp(),
        c2: beta[1],
        c3: beta[2],
        r_squared,
        observations: rows.len(),
        cells: cells.len(),
    })
}

/// One fit per configuration present in `records`.
pub fn fit_growth_by_configuration(records: &[RunRecord]) -> BTreeMap<Configuration, Result<GrowthFit>> {
    let mut by: BTreeMap<Configuration, Vec<RunRecord>> = BTreeMap::new();
    for r in records {
        by.entry(r.key.configuration).or_default().push(r.clone());
    }
    by.into_iter().map(|(c, rs)| (c, fit_growth(&rs))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SignTest {
    pub greater: usize,
    pub less: usize,
    pub ties: usize,
}

/// Counts of `a > b`, `a < b` and ties over paired observations.
pub fn sign_test(pairs: &[(f64, f64)]) -> SignTest {
    let mut t = SignTest::default();
    for &(a, b) in pairs {
        if a > b {
            t.greater += 1;
        } else if a < b {
            t.less += 1;
        } else {
            t.ties += 1;
        }
    }
    t
}
