use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use minksum::classify::extreme_indices;
use minksum::experiments::{
    extreme_fraction, fit_growth_by_configuration, lower_bounds, metric_q, metric_r, prune_sampled, run_grid,
    SubsetSampler,
};
use minksum::{
    assemble_instance, classify_all, minimum_generator_set_from, nd_sum, vector_roles, verify_generator_against,
    ConfigSpec, GeneratorSet, GridSpec, LowerMode, Method, MgsOptions, MspInstance, NdSum, NdSumOptions, RunRecord,
    VectorRole,
};

use crate::checks::{self, Check};
use crate::format::{self, coord_fields, coord_headers, csv_string, fmt_g6, InstanceFile};
use crate::{
    oracle, ClassifyArgs, CliError, ExperimentArgs, GenerateArgs, MgsArgs, NdsumArgs, PruneArgs, RedundancyArgs,
    VerifyArgs, OUT_DIR_ENV,
};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to `out`, or returns the text for stdout.
fn emit(out: &Option<PathBuf>, text: String) -> Result<String, CliError> {
    match out {
        Some(p) => write(p, &text).map(|_| String::new()),
        None => Ok(text),
    }
}

pub fn load_instance(path: &Path) -> Result<InstanceFile, CliError> {
    format::parse_instance(&read(path)?).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        e => e,
    })
}

pub fn generate(a: &GenerateArgs) -> Result<String, CliError> {
    let g = assemble_instance(&ConfigSpec {
        p: a.p,
        num_sets: a.num_sets,
        cardinality: a.n,
        configuration: a.config,
        seed: a.seed,
        hypercube_max: a.hypercube_max,
    })?;
    let file = InstanceFile {
        instance: g.instance,
        seed: Some(a.seed),
        methods: g.methods.into_iter().map(Some).collect(),
        seeds: g.seeds.into_iter().map(Some).collect(),
    };
    emit(&a.out, format::write_instance(&file))
}

pub fn ndsum(a: &NdsumArgs) -> Result<String, CliError> {
    let f = load_instance(&a.input)?;
    let nd = if a.oracle {
        oracle::nd_sum(&f.instance, a.provenance)?
    } else {
        let opts = NdSumOptions {
            buffer_limit: a.buffer,
            provenance_cap: a.provenance_cap,
        };
        nd_sum(&f.instance, opts, a.provenance)?
    };
    emit(&a.out, format::write_ndsum(&nd))
}

pub fn classify(a: &ClassifyArgs) -> Result<String, CliError> {
    let f = load_instance(&a.input)?;
    let set = match a.set {
        Some(s) if s >= f.instance.num_sets() => {
            return Err(CliError::Usage(format!(
                "--set {s} out of range: the instance has {} local sets",
                f.instance.num_sets()
            )))
        }
        Some(s) => f.instance.local(s).clone(),
        None => nd_sum(&f.instance, NdSumOptions::default(), false)?.set,
    };
    let classes = classify_all(&set)?;
    let mut header = vec!["index".to_string()];
    header.extend(coord_headers(set.dim()));
    header.push("class".into());
    let rows: Vec<Vec<String>> = set
        .iter()
        .zip(&classes)
        .enumerate()
        .map(|(i, (y, c))| {
            let mut r = vec![i.to_string()];
            r.extend(coord_fields(y));
            r.push(c.tag().into());
            r
        })
        .collect();
    emit(&a.out, csv_string(&header, &rows)?)
}

fn vector_table(
    instance: &MspInstance,
    extra: &[&str],
    mut fields: impl FnMut(usize, usize) -> Vec<String>,
) -> Result<String, CliError> {
    let mut header = vec!["set".to_string(), "index".to_string()];
    header.extend(coord_headers(instance.dim()));
    header.extend(extra.iter().map(|s| s.to_string()));
    let mut rows = Vec::new();
    for (s, set) in instance.local_sets().iter().enumerate() {
        for (i, y) in set.iter().enumerate() {
            let mut r = vec![s.to_string(), i.to_string()];
            r.extend(coord_fields(y));
            r.extend(fields(s, i));
            rows.push(r);
        }
    }
    csv_string(&header, &rows)
}

pub fn mgs(a: &MgsArgs) -> Result<String, CliError> {
    let f = load_instance(&a.input)?;
    let inst = &f.instance;
    let opts = MgsOptions {
        node_limit: a.node_limit,
        enumerate_optima: a.enumerate_optima,
        optima_cap: a.optima_cap,
        ..MgsOptions::default()
    };
    let (generator, roles, optima, summary) = if a.oracle {
        let nd = oracle::nd_sum(inst, true)?;
        let roles = vector_roles(inst, &nd)?;
        let g = oracle::minimum_generator_set(inst)?;
        let summary = format!("total {}\nsolver_path oracle\n", g.total_cardinality());
        (g, roles, None, summary)
    } else {
        let nd = nd_sum(inst, opts.nd, true)?;
        let r = minimum_generator_set_from(inst, &nd, opts)?;
        let roles = vector_roles(inst, &nd)?;
        let mut summary = format!(
            "total {}\nunique {}\nsolver_path {}\nnodes {}\n",
            r.total_cardinality, r.unique, r.solver_path, r.nodes
        );
        if let Some(o) = &r.optima {
            summary.push_str(&format!("optima {}\n", o.len()));
        }
        (r.generator, roles, r.optima, summary)
    };
    let csv = vector_table(inst, &["role", "chosen", "in_optima"], |s, i| {
        vec![
            roles[s][i].to_string(),
            generator.is_chosen(s, i).to_string(),
            optima
                .as_ref()
                .map_or_else(String::new, |o| o.iter().filter(|g| g.is_chosen(s, i)).count().to_string()),
        ]
    })?;
    match &a.out {
        Some(p) => {
            write(p, &csv)?;
            Ok(summary)
        }
        None => {
            eprint!("{summary}");
            Ok(csv)
        }
    }
}

pub fn redundancy(a: &RedundancyArgs) -> Result<String, CliError> {
    let f = load_instance(&a.input)?;
    let inst = &f.instance;
    let mask = if a.oracle {
        oracle::redundancy_mask(inst)?
    } else {
        let nd = nd_sum(inst, NdSumOptions::default(), true)?;
        vector_roles(inst, &nd)?
            .into_iter()
            .map(|r| r.into_iter().map(|x| x == VectorRole::Excluded).collect())
            .collect()
    };
    emit(&a.out, vector_table(inst, &["redundant"], |s, i| vec![mask[s][i].to_string()])?)
}

pub fn prune(a: &PruneArgs) -> Result<String, CliError> {
    let f = load_instance(&a.input)?;
    let inst = &f.instance;
    let seed = a.seed.or(f.seed).unwrap_or(0);
    let sampler = SubsetSampler::new(inst, seed)?;
    let lowers = lower_bounds(inst, a.lower)?;
    let g = prune_sampled(inst, &sampler, &lowers, a.lambda, a.gamma)?;
    let removed = g.removed(inst);
    let header: Vec<String> = ["set", "yn", "kept", "removed", "removed_indices"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = (0..inst.num_sets())
        .map(|s| {
            vec![
                s.to_string(),
                inst.local(s).len().to_string(),
                g.chosen()[s].len().to_string(),
                removed[s].len().to_string(),
                removed[s].iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
            ]
        })
        .collect();
    emit(&a.out, csv_string(&header, &rows)?)
}

fn strings<const N: usize>(xs: [&str; N]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn key_fields(r: &RunRecord) -> Vec<String> {
    let k = &r.key;
    vec![
        k.p.to_string(),
        k.num_sets.to_string(),
        k.n.to_string(),
        k.configuration.to_string(),
        k.seed.to_string(),
    ]
}

fn opt_str<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn opt_g6(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_g6)
}

const KEY: [&str; 5] = ["p", "S", "n", "config", "seed"];

fn with_key<const N: usize>(extra: [&str; N]) -> Vec<String> {
    let mut h = strings(KEY);
    h.extend(strings(extra));
    h
}

/// Every output file of `experiment`, by file name.
pub fn experiment_files(records: &[RunRecord], timings: bool) -> Result<Vec<(&'static str, String)>, CliError> {
    let mut files = Vec::new();

    let mut jsonl = String::new();
    for r in records {
        let mut r = r.clone();
        if !timings {
            r.timings = None;
        }
        jsonl.push_str(&serde_json::to_string(&r).map_err(|e| CliError::Invariant(e.to_string()))?);
        jsonl.push('\n');
    }
    files.push(("records.jsonl", jsonl));

    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let mut row = key_fields(r);
            row.extend([
                opt_str(r.yn),
                opt_str(r.ynse),
                opt_str(r.mgs.as_ref().map(|m| m.total)),
                opt_str(r.mgs.as_ref().map(|m| m.unique)),
                opt_str(r.mgs.as_ref().map(|m| m.solver_path)),
                opt_str(r.mgs.as_ref().map(|m| m.nodes)),
                r.error.clone().unwrap_or_default(),
            ]);
            row
        })
        .collect();
    let header = with_key(["yn", "ynse", "mgs_total", "unique", "solver_path", "nodes", "error"]);
    files.push(("cells.csv", csv_string(&header, &rows)?));

    let mut rows = Vec::new();
    for r in records {
        for (s, set) in r.sets.iter().enumerate() {
            let mut row = key_fields(r);
            row.extend([
                s.to_string(),
                set.method.to_string(),
                set.seed.to_string(),
                set.yn.to_string(),
                set.ynse.to_string(),
                opt_str(set.generator),
            ]);
            rows.push(row);
        }
    }
    let header = with_key(["set", "method", "set_seed", "yn", "ynse", "generator"]);
    files.push(("sets.csv", csv_string(&header, &rows)?));

    let mut rows = Vec::new();
    for r in records {
        for pr in &r.prunes {
            for (s, k) in pr.kept.iter().enumerate() {
                let mut row = key_fields(r);
                row.extend([
                    pr.lower.to_string(),
                    pr.lambda.to_string(),
                    pr.gamma.to_string(),
                    s.to_string(),
                    k.to_string(),
                ]);
                rows.push(row);
            }
        }
    }
    let header = with_key(["lower", "lambda", "gamma", "set", "kept"]);
    files.push(("prune.csv", csv_string(&header, &rows)?));

    let rows: Vec<Vec<String>> = metric_r(records)
        .into_iter()
        .map(|m| vec![m.method.to_string(), opt_g6(m.value), m.instances.to_string(), m.sets.to_string()])
        .collect();
    files.push(("metric_r.csv", csv_string(&strings(["method", "value", "instances", "sets"]), &rows)?));

    let configs: BTreeSet<(LowerMode, u32, u32)> = records
        .iter()
        .flat_map(|r| r.prunes.iter().map(|p| (p.lower, p.lambda, p.gamma)))
        .collect();
    let mut rows = Vec::new();
    for (lower, lambda, gamma) in configs {
        for m in metric_q(records, lambda, gamma, lower) {
            rows.push(vec![
                lower.to_string(),
                lambda.to_string(),
                gamma.to_string(),
                m.method.to_string(),
                opt_g6(m.value),
                m.instances.to_string(),
                m.sets.to_string(),
            ]);
        }
    }
    let header = strings(["lower", "lambda", "gamma", "method", "value", "instances", "sets"]);
    files.push(("metric_q.csv", csv_string(&header, &rows)?));

    let rows: Vec<Vec<String>> = fit_growth_by_configuration(records)
        .into_iter()
        .map(|(c, fit)| match fit {
            Ok(f) => vec![
                c.to_string(),
                fmt_g6(f.c1),
                fmt_g6(f.c2),
                fmt_g6(f.c3),
                fmt_g6(f.r_squared),
                f.observations.to_string(),
                f.cells.to_string(),
                String::new(),
            ],
            Err(e) => {
                let mut r = vec![c.to_string()];
                r.extend(std::iter::repeat_n(String::new(), 6));
                r.push(e.to_string());
                r
            }
        })
        .collect();
    let header = strings(["configuration", "c1", "c2", "c3", "r_squared", "observations", "cells", "error"]);
    files.push(("growth.csv", csv_string(&header, &rows)?));

    let rows: Vec<Vec<String>> = [Method::L, Method::M, Method::U]
        .into_iter()
        .map(|m| vec![m.to_string(), opt_g6(extreme_fraction(records, m))])
        .collect();
    files.push(("extreme_fraction.csv", csv_string(&strings(["method", "value"]), &rows)?));

    if timings {
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                let t = r.timings.clone().unwrap_or_default();
                let mut row = key_fields(r);
                row.extend([t.generate_ms, t.ndsum_ms, t.classify_ms, t.mgs_ms, t.prune_ms].map(fmt_g6));
                row
            })
            .collect();
        let header = with_key(["generate_ms", "ndsum_ms", "classify_ms", "mgs_ms", "prune_ms"]);
        files.push(("timings.csv", csv_string(&header, &rows)?));
    }
    Ok(files)
}

pub fn experiment(a: &ExperimentArgs) -> Result<String, CliError> {
    let grid: GridSpec = match &a.grid_spec {
        Some(p) => toml::from_str(&read(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => GridSpec::default(),
    };
    let dir = a
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("minksum-results"));
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let records = run_grid(&grid);
    for (name, text) in experiment_files(&records, a.timings)? {
        write(&dir.join(name), &text)?;
    }
    let errors = records.iter().filter(|r| r.error.is_some()).count();
    Ok(format!("records {}\nerrors {errors}\n", records.len()))
}

fn parse_bool(s: &str) -> Result<bool, CliError> {
    s.parse().map_err(|_| CliError::Usage(format!("expected true or false, found {s:?}")))
}

/// Reads a per-vector CSV (`set,index,y1..yp,...`) and checks that the vector
/// columns match the instance; returns the remaining columns by name.
fn read_vector_table(text: &str, inst: &MspInstance, extra: &[&str]) -> Result<Vec<Vec<String>>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut want = vec!["set".to_string(), "index".to_string()];
    want.extend(coord_headers(inst.dim()));
    want.extend(extra.iter().map(|s| s.to_string()));
    let got: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if got != want {
        return Err(CliError::Usage(format!("expected columns {}", want.join(","))));
    }
    let mut cells = Vec::new();
    let mut expected = inst
        .local_sets()
        .iter()
        .enumerate()
        .flat_map(|(s, set)| set.iter().enumerate().map(move |(i, y)| (s, i, y)));
    for rec in rdr.records() {
        let rec = rec?;
        let (s, i, y) = expected
            .next()
            .ok_or_else(|| CliError::Usage("more rows than local vectors".into()))?;
        let mut lead = vec![s.to_string(), i.to_string()];
        lead.extend(coord_fields(y));
        if rec.iter().take(lead.len()).ne(lead.iter().map(String::as_str)) {
            return Err(CliError::Usage(format!("row for set {s} index {i} does not match the instance")));
        }
        cells.push(rec.iter().skip(lead.len()).map(str::to_string).collect());
    }
    if expected.next().is_some() {
        return Err(CliError::Usage("fewer rows than local vectors".into()));
    }
    Ok(cells)
}

fn chosen_from_flags(inst: &MspInstance, flags: &[bool]) -> Vec<Vec<usize>> {
    let mut k = 0;
    inst.local_sets()
        .iter()
        .map(|set| {
            let c = (0..set.len()).filter(|&i| flags[k + i]).collect();
            k += set.len();
            c
        })
        .collect()
}

fn generates(inst: &MspInstance, chosen: Vec<Vec<usize>>, yn: &NdSum) -> Result<bool, CliError> {
    if chosen.iter().any(Vec::is_empty) {
        return Ok(false);
    }
    let g = GeneratorSet::new(inst, chosen)?;
    Ok(verify_generator_against(&g, inst, &yn.set)?)
}

fn mgs_checks(inst: &MspInstance, nd: &NdSum, text: &str) -> Result<Vec<Check>, CliError> {
    let cells = read_vector_table(text, inst, &["role", "chosen", "in_optima"])?;
    let flags = cells.iter().map(|c| parse_bool(&c[1])).collect::<Result<Vec<_>, _>>()?;
    let chosen = chosen_from_flags(inst, &flags);
    let mut out = Vec::new();
    let roles = vector_roles(inst, nd)?;
    let roles_flat: Vec<String> = roles.iter().flatten().map(|r| r.to_string()).collect();
    out.push(Check::new(
        "mgs_roles",
        cells
            .iter()
            .zip(&roles_flat)
            .position(|(c, r)| &c[0] != r)
            .map(|k| format!("row {k} has role {} but should be {}", cells[k][0], roles_flat[k])),
    ));
    out.push(Check::new(
        "mgs_generates",
        (!generates(inst, chosen.clone(), nd)?).then(|| "chosen vectors do not generate Yn".to_string()),
    ));
    let best = minimum_generator_set_from(inst, nd, MgsOptions::default())?;
    let total: usize = chosen.iter().map(Vec::len).sum();
    out.push(Check::new(
        "mgs_minimum",
        (total != best.total_cardinality).then(|| format!("total {total}, minimum {}", best.total_cardinality)),
    ));
    let mut minimal = None;
    'outer: for s in 0..chosen.len() {
        for k in 0..chosen[s].len() {
            let mut fewer = chosen.clone();
            let i = fewer[s].remove(k);
            if generates(inst, fewer, nd)? {
                minimal = Some(format!("set {s} index {i} can be removed"));
                break 'outer;
            }
        }
    }
    out.push(Check::new("mgs_minimal", minimal));
    Ok(out)
}

fn prune_checks(inst: &MspInstance, nd: &NdSum, text: &str) -> Result<Vec<Check>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["set", "yn", "kept", "removed", "removed_indices"] {
        return Err(CliError::Usage("expected columns set,yn,kept,removed,removed_indices".into()));
    }
    let mut removed: Vec<Vec<usize>> = Vec::new();
    for (s, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |j: usize| {
            rec[j]
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("row {s}: bad integer {:?}", &rec[j])))
        };
        if s >= inst.num_sets() || num(0)? != s || num(1)? != inst.local(s).len() {
            return Err(CliError::Usage(format!("row {s} does not match the instance")));
        }
        let idx = if rec[4].is_empty() {
            Vec::new()
        } else {
            rec[4]
                .split(' ')
                .map(|t| t.parse::<usize>().map_err(|_| CliError::Usage(format!("row {s}: bad index {t:?}"))))
                .collect::<Result<Vec<_>, _>>()?
        };
        if idx.len() != num(3)? || num(2)? + idx.len() != inst.local(s).len() || idx.iter().any(|&i| i >= inst.local(s).len()) {
            return Err(CliError::Usage(format!("row {s} counts are inconsistent")));
        }
        removed.push(idx);
    }
    if removed.len() != inst.num_sets() {
        return Err(CliError::Usage("one row per local set required".into()));
    }
    let roles = vector_roles(inst, nd)?;
    let mut out = vec![Check::new(
        "prune_sound",
        removed.iter().enumerate().find_map(|(s, idx)| {
            idx.iter()
                .find(|&&i| roles[s][i] != VectorRole::Excluded)
                .map(|i| format!("set {s} index {i} is not redundant"))
        }),
    )];
    let kept: Vec<Vec<usize>> = removed
        .iter()
        .enumerate()
        .map(|(s, idx)| (0..inst.local(s).len()).filter(|i| !idx.contains(i)).collect())
        .collect();
    out.push(Check::new(
        "prune_generates",
        (!generates(inst, kept, nd)?).then(|| "kept vectors do not generate Yn".to_string()),
    ));
    Ok(out)
}

pub fn verify(a: &VerifyArgs) -> Result<String, CliError> {
    let f = load_instance(&a.input)?;
    let inst = &f.instance;
    let nd = nd_sum(inst, NdSumOptions::default(), true)?;
    let mut all = checks::ndsum_checks(inst, &nd)?;
    all.extend(checks::proposition_checks(inst, &nd)?);
    let local_ok = inst
        .local_sets()
        .iter()
        .all(|s| extreme_indices(s).is_ok_and(|e| !e.is_empty()));
    all.push(Check::new(
        "local_extremes_nonempty",
        (!local_ok).then(|| "a local set has no extreme vector".to_string()),
    ));
    if let Some(p) = &a.ndsum {
        let (pts, prov) = format::parse_ndsum(&read(p)?, inst.dim())?;
        all.push(Check::new(
            "ndsum_file",
            (pts != nd.set.points()).then(|| "vectors differ from the computed ND sum".to_string()),
        ));
        if let Some(prov) = prov {
            let want: Vec<Vec<Vec<usize>>> = nd
                .provenance
                .as_ref()
                .expect("requested")
                .all()
                .iter()
                .map(|cs| cs.iter().map(|c| c.indices().to_vec()).collect())
                .collect();
            all.push(Check::new(
                "ndsum_file_provenance",
                (prov != want).then(|| "provenance differs from the computed one".to_string()),
            ));
        }
    }
    if let Some(p) = &a.mgs {
        all.extend(mgs_checks(inst, &nd, &read(p)?)?);
    }
    if let Some(p) = &a.prune {
        all.extend(prune_checks(inst, &nd, &read(p)?)?);
    }
    let mut text = String::new();
    for c in &all {
        text.push_str(&c.to_string());
        text.push('\n');
    }
    let failed: Vec<&str> = all.iter().filter(|c| c.failed()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(text)
    } else {
        print!("{text}");
        Err(CliError::Invariant(format!("failed checks: {}", failed.join(", "))))
    }
}
