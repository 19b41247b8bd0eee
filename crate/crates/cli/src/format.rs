//! Plain-text instance and point files, plus CSV helpers.

use minksum::{Method, MspInstance, NdSum, ObjectiveVector, StableSet};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// An instance together with the generation metadata carried in its header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub instance: MspInstance,
    pub seed: Option<u64>,
    pub methods: Vec<Option<Method>>,
    pub seeds: Vec<Option<u64>>,
}

impl InstanceFile {
    pub fn bare(instance: MspInstance) -> Self {
        let n = instance.num_sets();
        InstanceFile {
            instance,
            seed: None,
            methods: vec![None; n],
            seeds: vec![None; n],
        }
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

fn push_row(out: &mut String, y: &ObjectiveVector) {
    for (i, c) in y.coords().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&c.to_string());
    }
    out.push('\n');
}

pub fn write_instance(f: &InstanceFile) -> String {
    let inst = &f.instance;
    let mut out = format!(
        "format_version {FORMAT_VERSION}\np {}\nS {}\nseed {}\nmethods {}\nseeds {}\n",
        inst.dim(),
        inst.num_sets(),
        opt(&f.seed),
        f.methods.iter().map(opt).collect::<Vec<_>>().join(" "),
        f.seeds.iter().map(opt).collect::<Vec<_>>().join(" "),
    );
    for set in inst.local_sets() {
        out.push('\n');
        for y in set.iter() {
            push_row(&mut out, y);
        }
    }
    out
}

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("line {line}: {msg}"))
}

fn parse_int<T: std::str::FromStr + ToString>(tok: &str, line: usize) -> Result<T, CliError> {
    match tok.parse::<T>() {
        Ok(v) if v.to_string() == tok => Ok(v),
        _ => Err(bad(line, format!("{tok:?} is not a canonical integer"))),
    }
}

fn parse_row(text: &str, p: usize, line: usize) -> Result<ObjectiveVector, CliError> {
    let toks: Vec<&str> = text.split(' ').collect();
    if toks.len() != p {
        return Err(bad(line, format!("expected {p} values, found {}", toks.len())));
    }
    let coords = toks
        .iter()
        .map(|t| parse_int::<i64>(t, line))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ObjectiveVector::new(coords))
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, Vec<&'a str>), CliError> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| CliError::Usage(format!("missing header line {key:?}")))?;
    let mut toks = line.split(' ');
    if toks.next() != Some(key) {
        return Err(bad(no, format!("expected header {key:?}")));
    }
    Ok((no, toks.collect()))
}

fn split_lines(text: &str) -> Result<Vec<&str>, CliError> {
    if text.contains('\r') {
        return Err(CliError::Usage("carriage returns are not allowed; use LF line endings".into()));
    }
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| CliError::Usage("file must end with a newline".into()))?;
    Ok(body.split('\n').collect())
}

fn parse_block(rows: &[(usize, &str)], p: usize) -> Result<Vec<ObjectiveVector>, CliError> {
    let mut pts: Vec<ObjectiveVector> = Vec::with_capacity(rows.len());
    for &(no, row) in rows {
        let y = parse_row(row, p, no)?;
        if pts.last().is_some_and(|prev| prev >= &y) {
            return Err(bad(no, "rows must be strictly increasing in lexicographic order"));
        }
        pts.push(y);
    }
    Ok(pts)
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, CliError> {
    let lines = split_lines(text)?;
    let mut it = lines.iter().enumerate().map(|(i, l)| (i + 1, *l));
    let (no, v) = header(&mut it, "format_version")?;
    if v != [FORMAT_VERSION.to_string().as_str()] {
        return Err(bad(no, format!("unsupported format_version {:?}", v.join(" "))));
    }
    let (no, v) = header(&mut it, "p")?;
    let p: usize = match v.as_slice() {
        [t] => parse_int(t, no)?,
        _ => return Err(bad(no, "p takes one value")),
    };
    if p < 1 {
        return Err(bad(no, "p must be positive"));
    }
    let (no, v) = header(&mut it, "S")?;
    let num_sets: usize = match v.as_slice() {
        [t] => parse_int(t, no)?,
        _ => return Err(bad(no, "S takes one value")),
    };
    if num_sets < 1 {
        return Err(bad(no, "S must be positive"));
    }
    let (no, v) = header(&mut it, "seed")?;
    let seed = match v.as_slice() {
        ["-"] => None,
        [t] => Some(parse_int::<u64>(t, no)?),
        _ => return Err(bad(no, "seed takes one value")),
    };
    let (no, v) = header(&mut it, "methods")?;
    if v.len() != num_sets {
        return Err(bad(no, format!("expected {num_sets} methods")));
    }
    let methods = v
        .iter()
        .map(|t| match *t {
            "-" => Ok(None),
            t => t.parse::<Method>().map(Some).map_err(|e| bad(no, e)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (no, v) = header(&mut it, "seeds")?;
    if v.len() != num_sets {
        return Err(bad(no, format!("expected {num_sets} seeds")));
    }
    let seeds = v
        .iter()
        .map(|t| match *t {
            "-" => Ok(None),
            t => parse_int::<u64>(t, no).map(Some),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rest: Vec<(usize, &str)> = it.collect();
    let mut blocks: Vec<&[(usize, &str)]> = Vec::new();
    let mut start = 0;
    for (k, &(no, l)) in rest.iter().enumerate() {
        if l.is_empty() {
            if k > 0 && k == start {
                return Err(bad(no, "empty block"));
            }
            if k > 0 {
                blocks.push(&rest[start..k]);
            }
            start = k + 1;
        } else if k == 0 {
            return Err(bad(no, "a blank line must follow the header"));
        }
    }
    if start >= rest.len() {
        return Err(CliError::Usage("missing or empty final block".into()));
    }
    blocks.push(&rest[start..]);
    if blocks.len() != num_sets {
        return Err(CliError::Usage(format!("header says S = {num_sets} but found {} blocks", blocks.len())));
    }
    let mut sets = Vec::with_capacity(num_sets);
    for (s, rows) in blocks.iter().enumerate() {
        let pts = parse_block(rows, p)?;
        sets.push(StableSet::new(p, pts).map_err(|e| CliError::Usage(format!("block {s}: {e}")))?);
    }
    Ok(InstanceFile {
        instance: MspInstance::new(sets)?,
        seed,
        methods,
        seeds,
    })
}

/// `Yn` rows, optionally followed by a blank line and one provenance line per
/// vector: its coordinates, ` :`, then each combination of local indices
/// separated by ` ;`.
pub fn write_ndsum(nd: &NdSum) -> String {
    let mut out = String::new();
    for y in nd.set.iter() {
        push_row(&mut out, y);
    }
    if let Some(prov) = &nd.provenance {
        out.push('\n');
        for (k, y) in nd.set.iter().enumerate() {
            let mut line = String::new();
            push_row(&mut line, y);
            line.pop();
            for (j, c) in prov.of_index(k).iter().enumerate() {
                line.push_str(if j == 0 { " :" } else { " ;" });
                for i in c.indices() {
                    line.push(' ');
                    line.push_str(&i.to_string());
                }
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

/// Parsed `ndsum` output: the vectors and, when present, their combinations.
pub type NdSumFile = (Vec<ObjectiveVector>, Option<Vec<Vec<Vec<usize>>>>);

pub fn parse_ndsum(text: &str, p: usize) -> Result<NdSumFile, CliError> {
    let lines = split_lines(text)?;
    let numbered: Vec<(usize, &str)> = lines.iter().enumerate().map(|(i, l)| (i + 1, *l)).collect();
    let split = numbered.iter().position(|(_, l)| l.is_empty());
    let rows = &numbered[..split.unwrap_or(numbered.len())];
    if rows.is_empty() {
        return Err(CliError::Usage("no vectors".into()));
    }
    let pts = parse_block(rows, p)?;
    let Some(split) = split else {
        return Ok((pts, None));
    };
    let prov_lines = &numbered[split + 1..];
    if prov_lines.len() != pts.len() {
        return Err(CliError::Usage("provenance section must have one line per vector".into()));
    }
    let mut prov = Vec::with_capacity(pts.len());
    for (&(no, line), y) in prov_lines.iter().zip(&pts) {
        let mut parts = line.split(" : ");
        let head = parts.next().unwrap_or_default();
        let combos = parts.next().ok_or_else(|| bad(no, "missing ' : '"))?;
        if parts.next().is_some() || &parse_row(head, p, no)? != y {
            return Err(bad(no, "provenance line does not match its vector"));
        }
        let cs = combos
            .split(" ; ")
            .map(|c| c.split(' ').map(|t| parse_int::<usize>(t, no)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        prov.push(cs);
    }
    Ok((pts, Some(prov)))
}

/// C-style `%.6g`.
pub fn fmt_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn coord_headers(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("y{i}")).collect()
}

pub fn coord_fields(y: &ObjectiveVector) -> Vec<String> {
    y.coords().iter().map(i64::to_string).collect()
}

/// Rows written with `\n` terminators and minimal quoting.
pub fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Invariant(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Invariant(e.to_string()))
}
