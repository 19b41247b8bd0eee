//! Invariant checks shared by `verify` and the acceptance suite.

use std::fmt;

use minksum::classify::extreme_indices;
use minksum::{
    classify_all, extreme_points, extreme_points_of_sum, minimizers, nd_sum, Classification, MspInstance, NdSum,
    NdSumOptions, SearchDirection,
};

use crate::oracle;
use crate::CliError;

/// Yn sizes above this skip the LP-based classification checks for p ≥ 3.
pub const CLASSIFY_CAP: usize = 4000;
/// `Π_s |Y^s|` above this skips the enumeration oracle.
pub const ENUMERATION_CAP: u128 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skip(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
}

impl Check {
    pub fn new(name: &'static str, failure: Option<String>) -> Self {
        Check {
            name,
            outcome: failure.map_or(Outcome::Pass, Outcome::Fail),
        }
    }

    pub fn skip(name: &'static str, why: impl Into<String>) -> Self {
        Check {
            name,
            outcome: Outcome::Skip(why.into()),
        }
    }

    pub fn failed(&self) -> bool {
        matches!(self.outcome, Outcome::Fail(_))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Pass => write!(f, "PASS {}", self.name),
            Outcome::Fail(d) => write!(f, "FAIL {}: {d}", self.name),
            Outcome::Skip(d) => write!(f, "SKIP {}: {d}", self.name),
        }
    }
}

fn first_failure<T>(items: impl IntoIterator<Item = T>, bad: impl Fn(&T) -> Option<String>) -> Option<String> {
    items.into_iter().find_map(|t| bad(&t))
}

/// ND-sum checks: buffer invariance, local pre-filtering, the oracle and
/// Corollary 1.
pub fn ndsum_checks(instance: &MspInstance, nd: &NdSum) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let tight = NdSumOptions {
        buffer_limit: instance.max_local_len(),
        ..NdSumOptions::default()
    };
    let small = nd_sum(instance, tight, false)?;
    out.push(Check::new(
        "ndsum_buffer_invariance",
        (small.set != nd.set).then(|| "smallest buffer gives a different ND sum".to_string()),
    ));

    let reversed = MspInstance::new(instance.local_sets().iter().rev().cloned().collect())?;
    out.push(Check::new(
        "ndsum_order_invariance",
        (nd_sum(&reversed, NdSumOptions::default(), false)?.set != nd.set)
            .then(|| "reversed set order gives a different ND sum".to_string()),
    ));

    if instance.combination_count() <= ENUMERATION_CAP {
        let brute = oracle::nd_sum(instance, nd.provenance.is_some())?;
        out.push(Check::new(
            "ndsum_oracle",
            (brute.set != nd.set).then(|| "differs from full enumeration".to_string()),
        ));
        if let (Some(fast), Some(slow)) = (&nd.provenance, &brute.provenance) {
            out.push(Check::new(
                "provenance_oracle",
                (fast != slow).then(|| "provenance differs from full enumeration".to_string()),
            ));
        }
    } else {
        out.push(Check::skip("ndsum_oracle", "too many combinations"));
    }

    let ynse = extreme_points_of_sum(instance, NdSumOptions::default())?;
    let local_max = instance
        .local_sets()
        .iter()
        .map(|s| extreme_indices(s).map(|e| e.len()))
        .collect::<minksum::Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    out.push(Check::new(
        "corollary1",
        (!(nd.set.len() >= ynse.len() && ynse.len() >= local_max))
            .then(|| format!("|Yn| = {}, |Ynse| = {}, max |Ynse^s| = {local_max}", nd.set.len(), ynse.len())),
    ));
    Ok(out)
}

/// Propositions 1 to 3 against the classification of `Yn` and of every
/// local set. `nd` must carry provenance.
pub fn proposition_checks(instance: &MspInstance, nd: &NdSum) -> Result<Vec<Check>, CliError> {
    const NAMES: [&str; 6] = [
        "prop1_supported_combinations",
        "prop1_weighted_minimizers",
        "prop2_unique_extreme_combinations",
        "prop2_local_extremes_used",
        "prop3_nonextreme_never_extreme",
        "extremes_of_sum",
    ];
    let Some(prov) = &nd.provenance else {
        return Err(CliError::Invariant("proposition checks need provenance".into()));
    };
    if instance.dim() > 2 && nd.set.len() > CLASSIFY_CAP {
        return Ok(NAMES.iter().map(|n| Check::skip(n, "ND sum too large to classify")).collect());
    }
    let global = classify_all(&nd.set)?;
    let local: Vec<Vec<Classification>> = instance
        .local_sets()
        .iter()
        .map(classify_all)
        .collect::<minksum::Result<_>>()?;
    let combos = |k: usize| prov.of_index(k).iter().map(|c| c.indices());
    let mut out = Vec::new();

    out.push(Check::new(
        NAMES[0],
        first_failure(0..nd.set.len(), |&k| {
            if !global[k].is_supported() {
                return None;
            }
            combos(k)
                .any(|c| c.iter().enumerate().any(|(s, &i)| !local[s][i].is_supported()))
                .then(|| format!("supported {} uses an unsupported local vector", nd.set.points()[k]))
        }),
    ));

    let p = instance.dim();
    let directions: Vec<Vec<i64>> = vec![
        vec![1; p],
        (1..=p as i64).collect(),
        (1..=p as i64).rev().collect(),
        (0..p).map(|i| if i == 0 { 7 } else { 2 }).collect(),
    ];
    let mut minimizer_fail = None;
    for w in directions {
        let lambda = SearchDirection::from_integers(&w)?;
        let parts = instance
            .local_sets()
            .iter()
            .map(|s| minimizers(s, &lambda))
            .collect::<minksum::Result<Vec<_>>>()?;
        let summed = nd_sum(&MspInstance::new(parts)?, NdSumOptions::default(), false)?.set;
        if minimizers(&nd.set, &lambda)? != summed {
            minimizer_fail = Some(format!("weights {w:?}"));
            break;
        }
    }
    out.push(Check::new(NAMES[1], minimizer_fail));

    let is_ext = |c: Classification| c == Classification::ExtremeSupported;
    out.push(Check::new(
        NAMES[2],
        first_failure(0..nd.set.len(), |&k| {
            if !is_ext(global[k]) {
                return None;
            }
            let cs: Vec<&[usize]> = combos(k).collect();
            (cs.len() != 1 || cs[0].iter().enumerate().any(|(s, &i)| !is_ext(local[s][i])))
                .then(|| format!("extreme {} has {} combinations or a non-extreme part", nd.set.points()[k], cs.len()))
        }),
    ));

    let mut used: Vec<Vec<bool>> = local.iter().map(|l| vec![false; l.len()]).collect();
    for k in (0..nd.set.len()).filter(|&k| is_ext(global[k])) {
        for c in combos(k) {
            for (s, &i) in c.iter().enumerate() {
                used[s][i] = true;
            }
        }
    }
    out.push(Check::new(
        NAMES[3],
        first_failure(0..local.len(), |&s| {
            (0..local[s].len())
                .find(|&i| is_ext(local[s][i]) && !used[s][i])
                .map(|i| format!("local extreme {} of set {s} is in no extreme vector sum", instance.local(s).points()[i]))
        }),
    ));

    out.push(Check::new(
        NAMES[4],
        first_failure(0..nd.set.len(), |&k| {
            let offending = combos(k).any(|c| {
                c.iter().enumerate().all(|(s, &i)| local[s][i].is_supported())
                    && c.iter().enumerate().any(|(s, &i)| !is_ext(local[s][i]))
            });
            (offending && is_ext(global[k])).then(|| format!("{} is extreme", nd.set.points()[k]))
        }),
    ));

    let direct = extreme_points(&nd.set)?;
    let via_local = extreme_points_of_sum(instance, NdSumOptions::default())?;
    out.push(Check::new(
        NAMES[5],
        (direct != via_local).then(|| "extremes of Yn differ from extremes of the summed local extremes".to_string()),
    ));
    Ok(out)
}
