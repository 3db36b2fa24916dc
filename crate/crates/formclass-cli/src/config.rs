//! Sweep configuration: the (discriminant, level, group) grid, the
//! oracle seed bound, and the hash that ties a report to the grid it
//! ran over.
//!
//! The file format is plain `key = value` lines; `#` starts a
//! comment. Group entries are whitespace-separated templates, each
//! instantiated at every configured level:
//!
//! - `gamma1`, `sl2`: the standard groups at each level;
//! - `gamma0-divisors`: one `gamma0:d@N` per divisor d of N;
//! - `gammaG-all`: one diagonal-unit group per subgroup of
//!   (Z/NZ)^x;
//! - `gamma0:M`: applied at the levels M divides;
//! - `gammaG:t1,t2,...`: applied at the levels where every t is a
//!   unit;
//! - `gens:[[q,r,s,t],...]`: generator matrices reduced mod each
//!   level.

use crate::errors::CliError;
use formclass::congruence::{units_subgroup_closure, MAX_ENUM_LEVEL};
use num_integer::Integer;
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

pub const DEFAULT_DISCRIMINANTS: [i64; 9] = [-15, -20, -23, -24, -40, -52, -56, -60, -63];
pub const DEFAULT_LEVELS: [u64; 6] = [1, 2, 3, 4, 5, 6];
pub const DEFAULT_GROUPS: [&str; 6] = [
    "gamma1",
    "sl2",
    "gamma0-divisors",
    "gammaG-all",
    "gens:[[0,-1,1,0]]",
    "gens:[[1,0,2,1]]",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub discriminants: Vec<i64>,
    pub levels: Vec<u64>,
    pub group_templates: Vec<String>,
    /// Seed bound for the ray-class oracle; `None` picks the
    /// per-case default.
    pub ray_bound: Option<u64>,
    pub output_dir: PathBuf,
    /// Worker threads; 0 lets the pool pick.
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            discriminants: DEFAULT_DISCRIMINANTS.to_vec(),
            levels: DEFAULT_LEVELS.to_vec(),
            group_templates: DEFAULT_GROUPS.iter().map(|s| s.to_string()).collect(),
            ray_bound: None,
            output_dir: PathBuf::from("formclass-report"),
            jobs: 0,
        }
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

impl SweepConfig {
    /// `"default"` or a path to a key-value file.
    pub fn load(spec: &str) -> Result<SweepConfig, CliError> {
        if spec == "default" {
            return Ok(SweepConfig::default());
        }
        let text = std::fs::read_to_string(spec)
            .map_err(|e| usage(format!("cannot read config `{spec}`: {e}")))?;
        SweepConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<SweepConfig, CliError> {
        let mut cfg = SweepConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {lineno}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "discriminants" => {
                    cfg.discriminants = parse_int_list(value)
                        .ok_or_else(|| usage(format!("config line {lineno}: bad discriminant list")))?;
                }
                "levels" => {
                    cfg.levels = parse_int_list(value)
                        .ok_or_else(|| usage(format!("config line {lineno}: bad level list")))?;
                }
                "groups" => {
                    cfg.group_templates =
                        value.split_whitespace().map(|s| s.to_string()).collect();
                }
                "ray_bound" => {
                    cfg.ray_bound = if value == "auto" {
                        None
                    } else {
                        Some(value.parse().map_err(|_| {
                            usage(format!("config line {lineno}: ray_bound wants `auto` or an integer"))
                        })?)
                    };
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "jobs" => {
                    cfg.jobs = value.parse().map_err(|_| {
                        usage(format!("config line {lineno}: jobs wants an integer"))
                    })?;
                }
                other => {
                    return Err(usage(format!("config line {lineno}: unknown key `{other}`")));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.discriminants.is_empty() {
            return Err(usage("config needs at least one discriminant".into()));
        }
        for &d in &self.discriminants {
            if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
                return Err(usage(format!(
                    "{d} is not a negative discriminant (need < 0 and congruent to 0 or 1 mod 4)"
                )));
            }
        }
        if self.levels.is_empty() {
            return Err(usage("config needs at least one level".into()));
        }
        for &n in &self.levels {
            if n == 0 || n > MAX_ENUM_LEVEL {
                return Err(usage(format!(
                    "level {n} is out of range (1 through {MAX_ENUM_LEVEL})"
                )));
            }
        }
        if self.group_templates.is_empty() {
            return Err(usage("config needs at least one group template".into()));
        }
        for &n in &self.levels {
            for g in groups_at_level(&self.group_templates, n)? {
                formclass::congruence::parse_group_spec(&g)?;
            }
        }
        Ok(())
    }

    /// Canonical rendering of the mathematical content. Execution
    /// details (jobs, output paths) are deliberately left out so the
    /// hash is stable across runs that differ only in parallelism.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let discs: Vec<String> = self.discriminants.iter().map(|d| d.to_string()).collect();
        let levels: Vec<String> = self.levels.iter().map(|n| n.to_string()).collect();
        writeln!(s, "discriminants = {}", discs.join(",")).unwrap();
        writeln!(s, "levels = {}", levels.join(",")).unwrap();
        writeln!(s, "groups = {}", self.group_templates.join(" ")).unwrap();
        match self.ray_bound {
            None => writeln!(s, "ray_bound = auto").unwrap(),
            Some(b) => writeln!(s, "ray_bound = {b}").unwrap(),
        }
        s
    }

    pub fn hash(&self) -> String {
        crate::cache::hex(&Sha256::digest(self.canonical().as_bytes()))
    }
}

fn parse_int_list<T: std::str::FromStr>(value: &str) -> Option<Vec<T>> {
    let mut out = Vec::new();
    for part in value.split(|c: char| c == ',' || c.is_whitespace()) {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(part.parse().ok()?);
    }
    Some(out)
}

/// Instantiates the group templates at one level, in template order,
/// duplicates removed.
pub fn groups_at_level(templates: &[String], n: u64) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |s: String, out: &mut Vec<String>| {
        if seen.insert(s.clone()) {
            out.push(s);
        }
    };
    for t in templates {
        match t.as_str() {
            "gamma1" => push(format!("gamma1:{n}"), &mut out),
            "sl2" => push(format!("sl2:{n}"), &mut out),
            "gamma0-divisors" => {
                for d in 1..=n {
                    if n % d == 0 {
                        push(format!("gamma0:{d}@{n}"), &mut out);
                    }
                }
            }
            "gammaG-all" => {
                for sub in unit_subgroups(n)? {
                    let elems: Vec<String> = sub.iter().map(|u| u.to_string()).collect();
                    push(format!("gammaG:{n}:{}", elems.join(",")), &mut out);
                }
            }
            other => {
                if let Some(m) = other.strip_prefix("gamma0:") {
                    let m: u64 = m
                        .parse()
                        .map_err(|_| usage(format!("bad group template `{other}`")))?;
                    if m >= 1 && n % m == 0 {
                        push(format!("gamma0:{m}@{n}"), &mut out);
                    }
                } else if let Some(ts) = other.strip_prefix("gammaG:") {
                    let units: Option<Vec<u64>> = parse_int_list(ts);
                    let units =
                        units.ok_or_else(|| usage(format!("bad group template `{other}`")))?;
                    if units.iter().all(|&u| u.gcd(&n) == 1) {
                        push(format!("gammaG:{n}:{ts}"), &mut out);
                    }
                } else if let Some(mats) = other.strip_prefix("gens:") {
                    push(format!("gens:{n}:{mats}"), &mut out);
                } else {
                    return Err(usage(format!("unknown group template `{other}`")));
                }
            }
        }
    }
    Ok(out)
}

/// Every subgroup of (Z/nZ)^x as a sorted element set. Seeds of size
/// at most three are exhaustive here: the unit group has rank at most
/// three for every level under the enumeration cap.
pub fn unit_subgroups(n: u64) -> Result<Vec<BTreeSet<u64>>, CliError> {
    if n == 0 || n > MAX_ENUM_LEVEL {
        return Err(usage(format!(
            "level {n} is out of range (1 through {MAX_ENUM_LEVEL})"
        )));
    }
    let units: Vec<u64> = (1..=n).filter(|u| u.gcd(&n) == 1).collect();
    let k = units.len();
    let mut found: BTreeSet<BTreeSet<u64>> = BTreeSet::new();
    let try_seed = |seed: &[u64], found: &mut BTreeSet<BTreeSet<u64>>| -> Result<(), CliError> {
        let set: BTreeSet<u64> = seed.iter().copied().collect();
        let closure = units_subgroup_closure(&set, n)?;
        found.insert(closure.elements);
        Ok(())
    };
    try_seed(&[], &mut found)?;
    for i in 0..k {
        try_seed(&[units[i]], &mut found)?;
        for j in i..k {
            try_seed(&[units[i], units[j]], &mut found)?;
            for l in j..k {
                try_seed(&[units[i], units[j], units[l]], &mut found)?;
            }
        }
    }
    Ok(found.into_iter().collect())
}
