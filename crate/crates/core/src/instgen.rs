//! Reproducible local sets (methods L, M, U) and instance assembly.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64`. An instance seed drives
//! a master stream from which the per-set seeds are drawn in order, followed
//! by one coin flip when an odd `LU` split needs it. Sampling uses only
//! uniform draws, square roots and division, so results are identical on
//! every IEEE-754 platform.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::MspInstance;
use crate::stable::StableSet;
use crate::vector::ObjectiveVector;

pub const DEFAULT_HYPERCUBE_MAX: i64 = 10_000;

/// Samples drawn per requested point before giving up.
pub const ITERATIONS_PER_POINT: u64 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    L,
    M,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Configuration {
    L,
    M,
    U,
    LU,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::L => "L",
            Method::M => "M",
            Method::U => "U",
        })
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Configuration::L => "L",
            Configuration::M => "M",
            Configuration::U => "U",
            Configuration::LU => "LU",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(Method::L),
            "M" => Ok(Method::M),
            "U" => Ok(Method::U),
            _ => Err(Error::InvalidInput(format!("unknown method {s:?}"))),
        }
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(Configuration::L),
            "M" => Ok(Configuration::M),
            "U" => Ok(Configuration::U),
            "LU" => Ok(Configuration::LU),
            _ => Err(Error::InvalidInput(format!("unknown configuration {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub p: usize,
    pub cardinality: usize,
    pub method: Method,
    pub seed: u64,
    pub hypercube_max: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigSpec {
    pub p: usize,
    pub num_sets: usize,
    pub cardinality: usize,
    pub configuration: Configuration,
    pub seed: u64,
    pub hypercube_max: i64,
}

/// An instance with the method and seed used for each local set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedInstance {
    pub instance: MspInstance,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform direction in the nonnegative orthant of the unit sphere.
fn orthant_direction(rng: &mut ChaCha8Rng, p: usize, out: &mut [f64]) {
    loop {
        let mut r2 = 0.0;
        for x in out.iter_mut().take(p) {
            *x = unit(rng);
            r2 += *x * *x;
        }
        if r2 > 1e-12 && r2 <= 1.0 {
            let r = r2.sqrt();
            for x in out.iter_mut() {
                *x /= r;
            }
            return;
        }
    }
}

fn sample(rng: &mut ChaCha8Rng, spec: &GenSpec, buf: &mut [f64]) -> ObjectiveVector {
    let h = spec.hypercube_max as f64;
    match spec.method {
        Method::L => {
            orthant_direction(rng, spec.p, buf);
            ObjectiveVector::new(buf.iter().map(|d| (h - h * d).round() as i64))
        }
        Method::U => {
            orthant_direction(rng, spec.p, buf);
            ObjectiveVector::new(buf.iter().map(|d| (h * d).round() as i64))
        }
        Method::M => {
            let mid = h * spec.p as f64 / 2.0;
            let (lo, hi) = (0.9 * mid, 1.1 * mid);
            loop {
                let mut sum = 0.0;
                for x in buf.iter_mut() {
                    *x = h * unit(rng);
                    sum += *x;
                }
                if lo <= sum && sum <= hi {
                    return ObjectiveVector::new(buf.iter().map(|x| x.round() as i64));
                }
            }
        }
    }
}

fn check_spec(p: usize, cardinality: usize, hypercube_max: i64) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidInput(format!("need at least two objectives, got {p}")));
    }
    if cardinality == 0 {
        return Err(Error::InvalidInput("cardinality must be positive".into()));
    }
    if hypercube_max <= 0 {
        return Err(Error::InvalidInput("hypercube_max must be positive".into()));
    }
    Ok(())
}

/// Samples, rounds and keeps the nondominated points until exactly
/// `cardinality` remain.
pub fn generate_local_set(spec: &GenSpec) -> Result<StableSet> {
    check_spec(spec.p, spec.cardinality, spec.hypercube_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cap = ITERATIONS_PER_POINT.saturating_mul(spec.cardinality as u64);
    let mut buf = vec![0.0; spec.p];
    let mut front: Vec<ObjectiveVector> = Vec::with_capacity(spec.cardinality + 1);
    for _ in 0..cap {
        let y = sample(&mut rng, spec, &mut buf);
        if front.iter().any(|a| a.weakly_dominates(&y)) {
            continue;
        }
        front.retain(|a| !y.dominates(a));
        front.push(y);
        if front.len() == spec.cardinality {
            return StableSet::new(spec.p, front);
        }
    }
    Err(Error::Unreachable {
        target: spec.cardinality,
        reached: front.len(),
        iterations: cap,
    })
}

fn methods_for(cfg: &ConfigSpec, rng: &mut ChaCha8Rng) -> Vec<Method> {
    let all = |m| vec![m; cfg.num_sets];
    match cfg.configuration {
        Configuration::L => all(Method::L),
        Configuration::M => all(Method::M),
        Configuration::U => all(Method::U),
        Configuration::LU => {
            let extra = if cfg.num_sets % 2 == 1 {
                (rng.next_u64() & 1) as usize
            } else {
                0
            };
            let k = cfg.num_sets / 2 + extra;
            (0..cfg.num_sets)
                .map(|s| if s < k { Method::L } else { Method::U })
                .collect()
        }
    }
}

/// Draws one sub-seed per local set from the master seed, then the methods.
pub fn assemble_instance(cfg: &ConfigSpec) -> Result<GeneratedInstance> {
    check_spec(cfg.p, cfg.cardinality, cfg.hypercube_max)?;
    if cfg.num_sets == 0 {
        return Err(Error::InvalidInput("need at least one local set".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.num_sets).map(|_| master.next_u64()).collect();
    let methods = methods_for(cfg, &mut master);
    let sets = methods
        .iter()
        .zip(&seeds)
        .map(|(&method, &seed)| {
            generate_local_set(&GenSpec {
                p: cfg.p,
                cardinality: cfg.cardinality,
                method,
                seed,
                hypercube_max: cfg.hypercube_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratedInstance {
        instance: MspInstance::new(sets)?,
        methods,
        seeds,
    })
}
