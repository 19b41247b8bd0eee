//! Generator sets: fixings from `C(y)`, redundancy, and exact minimum
//! generator sets by an integer program solved with branch-and-bound.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::MspInstance;
use crate::ndfilter::{nd_sum, Combination, NdSum, NdSumOptions, Provenance};
use crate::stable::StableSet;
use crate::vector::ObjectiveVector;

pub const DEFAULT_NODE_LIMIT: u64 = 10_000_000;

/// Role of a local vector with respect to `Ȳ^s ⊆ Ŷ^s ⊆ Y^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VectorRole {
    /// In `Ȳ^s`: every generator set contains it.
    FixedRequired,
    /// In `Ŷ^s \ Ȳ^s`.
    CandidateOnly,
    /// Outside `Ŷ^s`: redundant.
    Excluded,
}

/// One chosen subset per local set, as canonical indices into `Y^s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSet {
    chosen: Vec<Vec<usize>>,
    roles: Option<Vec<Vec<VectorRole>>>,
}

impl GeneratorSet {
    pub fn new(instance: &MspInstance, chosen: Vec<Vec<usize>>) -> Result<Self> {
        if chosen.len() != instance.num_sets() {
            return Err(Error::InvalidInput(format!(
                "generator has {} subsets, instance has {} local sets",
                chosen.len(),
                instance.num_sets()
            )));
        }
        let mut chosen = chosen;
        for (s, c) in chosen.iter_mut().enumerate() {
            c.sort_unstable();
            c.dedup();
            if let Some(&i) = c.iter().find(|&&i| i >= instance.local(s).len()) {
                return Err(Error::InvalidInput(format!("index {i} out of range for set {s}")));
            }
        }
        Ok(GeneratorSet { chosen, roles: None })
    }

    /// Every local vector chosen.
    pub fn full(instance: &MspInstance) -> Self {
        GeneratorSet {
            chosen: instance.local_sets().iter().map(|s| (0..s.len()).collect()).collect(),
            roles: None,
        }
    }

    pub fn with_roles(mut self, roles: Vec<Vec<VectorRole>>) -> Self {
        self.roles = Some(roles);
        self
    }

    pub fn chosen(&self) -> &[Vec<usize>] {
        &self.chosen
    }

    pub fn roles(&self) -> Option<&[Vec<VectorRole>]> {
        self.roles.as_deref()
    }

    pub fn is_chosen(&self, s: usize, i: usize) -> bool {
        self.chosen[s].binary_search(&i).is_ok()
    }

    pub fn total_cardinality(&self) -> usize {
        self.chosen.iter().map(Vec::len).sum()
    }

    pub fn chosen_sets(&self, instance: &MspInstance) -> Vec<StableSet> {
        self.chosen
            .iter()
            .enumerate()
            .map(|(s, c)| instance.local(s).subset(c))
            .collect()
    }

    /// Indices not chosen, per local set.
    pub fn removed(&self, instance: &MspInstance) -> Vec<Vec<usize>> {
        (0..instance.num_sets())
            .map(|s| {
                (0..instance.local(s).len())
                    .filter(|&i| !self.is_chosen(s, i))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverPath {
    FixedShortcut,
    GeneratingShortcut,
    ExactIP,
}

impl fmt::Display for SolverPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverPath::FixedShortcut => "fixed",
            SolverPath::GeneratingShortcut => "generating",
            SolverPath::ExactIP => "ip",
        })
    }
}

impl fmt::Display for VectorRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VectorRole::FixedRequired => "fixed",
            VectorRole::CandidateOnly => "candidate",
            VectorRole::Excluded => "excluded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MgsResult {
    pub generator: GeneratorSet,
    pub total_cardinality: usize,
    pub unique: bool,
    pub solver_path: SolverPath,
    /// Branch-and-bound nodes over all solves (0 for the shortcuts).
    pub nodes: u64,
    /// Every minimum generator set, when enumeration was requested.
    pub optima: Option<Vec<GeneratorSet>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MgsOptions {
    pub nd: NdSumOptions,
    pub node_limit: u64,
    pub enumerate_optima: bool,
    pub optima_cap: usize,
}

impl Default for MgsOptions {
    fn default() -> Self {
        MgsOptions {
            nd: NdSumOptions::default(),
            node_limit: DEFAULT_NODE_LIMIT,
            enumerate_optima: false,
            optima_cap: 1000,
        }
    }
}

fn provenance(nd: &NdSum) -> Result<&Provenance> {
    nd.provenance
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("provenance was not computed".into()))
}

/// `C(y)` for `y ∈ Yn`.
pub fn combinations_of<'a>(y: &ObjectiveVector, nd: &'a NdSum) -> Result<&'a [Combination]> {
    let prov = provenance(nd)?;
    let k = nd
        .set
        .index_of(y)
        .ok_or_else(|| Error::NotMember(format!("{y} is not in the nondominated sum")))?;
    Ok(prov.of_index(k))
}

/// Role of every local vector, indexed `[s][i]`.
pub fn vector_roles(instance: &MspInstance, nd: &NdSum) -> Result<Vec<Vec<VectorRole>>> {
    let prov = provenance(nd)?;
    let mut roles: Vec<Vec<VectorRole>> = instance
        .local_sets()
        .iter()
        .map(|s| vec![VectorRole::Excluded; s.len()])
        .collect();
    for combos in prov.all() {
        for c in combos {
            for (s, &i) in c.indices().iter().enumerate() {
                if roles[s][i] == VectorRole::Excluded {
                    roles[s][i] = VectorRole::CandidateOnly;
                }
            }
        }
    }
    for combos in prov.all() {
        let Some(first) = combos.first() else { continue };
        for (s, &i) in first.indices().iter().enumerate() {
            if combos.iter().all(|c| c.indices()[s] == i) {
                roles[s][i] = VectorRole::FixedRequired;
            }
        }
    }
    Ok(roles)
}

fn sets_with(instance: &MspInstance, roles: &[Vec<VectorRole>], keep: impl Fn(VectorRole) -> bool) -> Vec<StableSet> {
    roles
        .iter()
        .enumerate()
        .map(|(s, r)| {
            let idx: Vec<usize> = (0..r.len()).filter(|&i| keep(r[i])).collect();
            instance.local(s).subset(&idx)
        })
        .collect()
}

/// `Ȳ^s`: local vectors used by every combination of some ND vector.
pub fn fixed_sets(instance: &MspInstance, nd: &NdSum) -> Result<Vec<StableSet>> {
    let roles = vector_roles(instance, nd)?;
    Ok(sets_with(instance, &roles, |r| r == VectorRole::FixedRequired))
}

/// `Ŷ^s`: local vectors used by some combination of some ND vector.
pub fn candidate_sets(instance: &MspInstance, nd: &NdSum) -> Result<Vec<StableSet>> {
    let roles = vector_roles(instance, nd)?;
    Ok(sets_with(instance, &roles, |r| r != VectorRole::Excluded))
}

fn check_local(y_s: &ObjectiveVector, s: usize, instance: &MspInstance) -> Result<()> {
    if s >= instance.num_sets() {
        return Err(Error::InvalidInput(format!("no local set {s}")));
    }
    if !instance.local(s).contains(y_s) {
        return Err(Error::NotMember(format!("{y_s} is not in local set {s}")));
    }
    Ok(())
}

fn redundant_against(y_s: &ObjectiveVector, s: usize, instance: &MspInstance, yn: &StableSet, opts: NdSumOptions) -> Result<bool> {
    let restricted = instance.with_local(s, StableSet::singleton(y_s.clone()))?;
    let part = nd_sum(&restricted, opts, false)?.set;
    Ok(!part.iter().any(|y| yn.contains(y)))
}

/// True iff no vector sum using `y_s` is nondominated in the full sum.
/// Decided directly from `ND({y_s} ⊕ ⊕_{t≠s} Y^t) ∩ Yn`.
pub fn is_redundant(y_s: &ObjectiveVector, s: usize, instance: &MspInstance) -> Result<bool> {
    check_local(y_s, s, instance)?;
    let opts = NdSumOptions::default();
    let yn = nd_sum(instance, opts, false)?.set;
    redundant_against(y_s, s, instance, &yn, opts)
}

/// [`is_redundant`] for every local vector, indexed `[s][i]`.
pub fn redundancy_mask(instance: &MspInstance) -> Result<Vec<Vec<bool>>> {
    let opts = NdSumOptions::default();
    let yn = nd_sum(instance, opts, false)?.set;
    instance
        .local_sets()
        .iter()
        .enumerate()
        .map(|(s, set)| {
            set.iter()
                .map(|y| redundant_against(y, s, instance, &yn, opts))
                .collect()
        })
        .collect()
}

/// `ND(⊕_s chosen_s) = Yn`.
pub fn verify_generator(g: &GeneratorSet, instance: &MspInstance) -> Result<bool> {
    let yn = nd_sum(instance, NdSumOptions::default(), false)?.set;
    verify_generator_against(g, instance, &yn)
}

pub fn verify_generator_against(g: &GeneratorSet, instance: &MspInstance, yn: &StableSet) -> Result<bool> {
    if g.chosen.len() != instance.num_sets() {
        return Err(Error::InvalidInput("generator does not match the instance".into()));
    }
    if g.chosen.iter().any(Vec::is_empty) {
        return Ok(false);
    }
    let sub = MspInstance::new(g.chosen_sets(instance))?;
    Ok(&nd_sum(&sub, NdSumOptions::default(), false)?.set == yn)
}

/// Algorithm 1: shortcuts on `Ȳ`/`Ŷ`, otherwise the exact integer program.
pub fn minimum_generator_set(instance: &MspInstance, opts: MgsOptions) -> Result<MgsResult> {
    let nd = nd_sum(instance, opts.nd, true)?;
    minimum_generator_set_from(instance, &nd, opts)
}

/// [`minimum_generator_set`] for an already computed ND sum with provenance.
pub fn minimum_generator_set_from(instance: &MspInstance, nd: &NdSum, opts: MgsOptions) -> Result<MgsResult> {
    let roles = vector_roles(instance, nd)?;
    let fixed_only = |roles: &[Vec<VectorRole>]| {
        let chosen = roles
            .iter()
            .map(|r| (0..r.len()).filter(|&i| r[i] == VectorRole::FixedRequired).collect())
            .collect();
        GeneratorSet { chosen, roles: Some(roles.to_vec()) }
    };
    let shortcut = |path: SolverPath| {
        let generator = fixed_only(&roles);
        MgsResult {
            total_cardinality: generator.total_cardinality(),
            optima: opts.enumerate_optima.then(|| vec![generator.clone()]),
            generator,
            unique: true,
            solver_path: path,
            nodes: 0,
        }
    };
    if roles.iter().flatten().all(|&r| r != VectorRole::CandidateOnly) {
        return Ok(shortcut(SolverPath::FixedShortcut));
    }
    let cover = CoverProblem::build(&roles, provenance(nd)?);
    if cover.demands.is_empty() {
        return Ok(shortcut(SolverPath::GeneratingShortcut));
    }
    solve_cover(cover, roles, opts)
}

/// The integer program over `x` for `Ŷ^s \ Ȳ^s`, solved exactly.
pub fn solve_mgs_ip(instance: &MspInstance, nd: &NdSum, opts: MgsOptions) -> Result<MgsResult> {
    let roles = vector_roles(instance, nd)?;
    let cover = CoverProblem::build(&roles, provenance(nd)?);
    solve_cover(cover, roles, opts)
}

/// Each ND vector not generated by `⊕ Ȳ^s` must have one combination whose
/// free positions are all chosen. A combination is kept as the sorted list
/// of free variables it needs.
struct CoverProblem {
    vars: Vec<(usize, usize)>,
    demands: Vec<Vec<Vec<u32>>>,
}

impl CoverProblem {
    fn build(roles: &[Vec<VectorRole>], prov: &Provenance) -> Self {
        let mut var_of: Vec<Vec<Option<u32>>> = roles.iter().map(|r| vec![None; r.len()]).collect();
        let mut vars = Vec::new();
        for (s, r) in roles.iter().enumerate() {
            for (i, &role) in r.iter().enumerate() {
                if role == VectorRole::CandidateOnly {
                    var_of[s][i] = Some(vars.len() as u32);
                    vars.push((s, i));
                }
            }
        }
        let mut demands = Vec::new();
        for combos in prov.all() {
            let mut options: Vec<Vec<u32>> = combos
                .iter()
                .map(|c| {
                    let mut v: Vec<u32> = c
                        .indices()
                        .iter()
                        .enumerate()
                        .filter_map(|(s, &i)| var_of[s][i])
                        .collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            options.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            options.dedup();
            let mut kept: Vec<Vec<u32>> = Vec::new();
            for o in options {
                if !kept.iter().any(|k| is_subset(k, &o)) {
                    kept.push(o);
                }
            }
            demands.push(kept);
        }
        CoverProblem { vars, demands }
    }
}

fn is_subset(a: &[u32], b: &[u32]) -> bool {
    let mut it = b.iter();
    a.iter().all(|x| it.any(|y| y == x))
}

const UNSET: i8 = -1;

struct Search<'a> {
    problem: &'a CoverProblem,
    forbidden: &'a [Vec<bool>],
    node_limit: u64,
    nodes: u64,
    /// Only solutions with cost strictly below this are accepted.
    bound: usize,
    best: Option<Vec<bool>>,
}

impl Search<'_> {
    fn run(&mut self, assign: Vec<i8>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(Error::ResourceCap {
                what: "branch-and-bound nodes",
                cap: self.node_limit,
            });
        }
        let mut assign = assign;
        // unit propagation: a demand with a single live option forces it
        let open = loop {
            let mut changed = false;
            let mut open: Vec<(usize, Vec<usize>)> = Vec::new();
            for (j, options) in self.problem.demands.iter().enumerate() {
                let mut live = Vec::new();
                let mut met = false;
                for (o, vars) in options.iter().enumerate() {
                    if vars.iter().any(|&v| assign[v as usize] == 0) {
                        continue;
                    }
                    if vars.iter().all(|&v| assign[v as usize] == 1) {
                        met = true;
                        break;
                    }
                    live.push(o);
                }
                if met {
                    continue;
                }
                match live.len() {
                    0 => return Ok(()),
                    1 => {
                        for &v in &options[live[0]] {
                            assign[v as usize] = 1;
                        }
                        changed = true;
                    }
                    _ => open.push((j, live)),
                }
            }
            if !changed {
                break open;
            }
        };
        let ones = assign.iter().filter(|&&a| a == 1).count();
        if ones >= self.bound {
            return Ok(());
        }

        if open.is_empty() {
            let completion: Vec<bool> = assign.iter().map(|&a| a == 1).collect();
            if !self.forbidden.contains(&completion) {
                self.bound = ones;
                self.best = Some(completion);
                return Ok(());
            }
            // the cheapest completion is excluded; any other costs at least one more
            if ones + 1 >= self.bound {
                return Ok(());
            }
            let Some(v) = assign.iter().position(|&a| a == UNSET) else {
                return Ok(());
            };
            return self.branch(assign, v);
        }

        let mut lb_max = 0usize;
        let mut needs: Vec<(usize, usize)> = Vec::with_capacity(open.len());
        let mut coverage = vec![0u32; assign.len()];
        for (k, (j, live)) in open.iter().enumerate() {
            let options = &self.problem.demands[*j];
            let need = live
                .iter()
                .map(|&o| options[o].iter().filter(|&&v| assign[v as usize] == UNSET).count())
                .min()
                .unwrap_or(0);
            lb_max = lb_max.max(need);
            needs.push((need, k));
            for &o in live {
                for &v in &options[o] {
                    if assign[v as usize] == UNSET {
                        coverage[v as usize] += 1;
                    }
                }
            }
        }
        // greedy packing of demands over disjoint unset variables
        needs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut used = vec![false; assign.len()];
        let mut packed = 0usize;
        for &(need, k) in &needs {
            let (j, live) = &open[k];
            let options = &self.problem.demands[*j];
            let touched: Vec<usize> = live
                .iter()
                .flat_map(|&o| options[o].iter().map(|&v| v as usize))
                .filter(|&v| assign[v] == UNSET)
                .collect();
            if touched.iter().all(|&v| !used[v]) {
                for v in touched {
                    used[v] = true;
                }
                packed += need;
            }
        }
        if ones + lb_max.max(packed) >= self.bound {
            return Ok(());
        }
        let v = (0..assign.len())
            .filter(|&v| assign[v] == UNSET)
            .max_by(|&a, &b| coverage[a].cmp(&coverage[b]).then(b.cmp(&a)))
            .expect("an open demand has an unset variable");
        self.branch(assign, v)
    }

    fn branch(&mut self, assign: Vec<i8>, v: usize) -> Result<()> {
        let mut one = assign.clone();
        one[v] = 1;
        self.run(one)?;
        let mut zero = assign;
        zero[v] = 0;
        self.run(zero)
    }
}

/// Cheapest assignment with cost `< bound` avoiding `forbidden`.
fn search(problem: &CoverProblem, forbidden: &[Vec<bool>], bound: usize, node_limit: u64, nodes: &mut u64) -> Result<Option<Vec<bool>>> {
    let mut s = Search {
        problem,
        forbidden,
        node_limit: node_limit.saturating_sub(*nodes),
        nodes: 0,
        bound,
        best: None,
    };
    let out = s.run(vec![UNSET; problem.vars.len()]);
    *nodes += s.nodes;
    out.map(|_| s.best)
}

fn solve_cover(cover: CoverProblem, roles: Vec<Vec<VectorRole>>, opts: MgsOptions) -> Result<MgsResult> {
    let mut nodes = 0u64;
    let node_cap = |e: Error| match e {
        Error::ResourceCap { what, .. } => Error::ResourceCap { what, cap: opts.node_limit },
        e => e,
    };
    let best = search(&cover, &[], usize::MAX, opts.node_limit, &mut nodes)
        .map_err(node_cap)?
        .expect("the candidate sets always generate the nondominated sum");
    let opt = best.iter().filter(|&&b| b).count();

    let to_generator = |x: &[bool]| {
        let chosen = roles
            .iter()
            .enumerate()
            .map(|(s, r)| {
                (0..r.len())
                    .filter(|&i| r[i] == VectorRole::FixedRequired)
                    .chain(cover.vars.iter().zip(x).filter(|((t, _), &on)| *t == s && on).map(|((_, i), _)| *i))
                    .collect::<Vec<_>>()
            })
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        GeneratorSet { chosen, roles: Some(roles.clone()) }
    };

    let mut forbidden = vec![best.clone()];
    let (unique, optima) = if opts.enumerate_optima {
        while forbidden.len() < opts.optima_cap {
            match search(&cover, &forbidden, opt + 1, opts.node_limit, &mut nodes).map_err(node_cap)? {
                Some(x) => forbidden.push(x),
                None => break,
            }
        }
        (forbidden.len() == 1, Some(forbidden.iter().map(|x| to_generator(x)).collect()))
    } else {
        let other = search(&cover, &forbidden, opt + 1, opts.node_limit, &mut nodes).map_err(node_cap)?;
        (other.is_none(), None)
    };
    let generator = to_generator(&best);
    Ok(MgsResult {
        total_cardinality: generator.total_cardinality(),
        generator,
        unique,
        solver_path: SolverPath::ExactIP,
        nodes,
        optima,
    })
}
