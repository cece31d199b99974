//! File and argument parsing.
//!
//! Gram matrices are decoded here rather than through the library's serde
//! impls so that `--tol-psd` also governs how strictly input files are validated.

use std::fs;
use std::path::Path;

use cloneprob::feasibility::MachineSpec;
use cloneprob::gram::gram_of;
use cloneprob::{CMatrix, GramMatrix, StateSet, Tolerances, C64};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

/// Parses `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| format!("'{t}' is not a number: {e}"))
    };
    let z = match s.split_once(',') {
        Some((re, im)) => C64::new(parse(re)?, parse(im)?),
        None => C64::new(parse(s)?, 0.0),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::usage(format!(
            "{}: invalid JSON at line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn decode<T: DeserializeOwned>(path: &Path, value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn read_typed<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let value = read_json(path)?;
    decode(path, value)
}

#[derive(Deserialize)]
struct RawGram {
    n: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl RawGram {
    fn build(self, tol: &Tolerances, path: &Path) -> Result<GramMatrix, CliError> {
        let n = self.entries.len();
        if n != self.n {
            return Err(CliError::usage(format!(
                "{}: field \"n\" is {} but \"entries\" has {n} rows",
                path.display(),
                self.n
            )));
        }
        if let Some(i) = self.entries.iter().position(|r| r.len() != n) {
            return Err(CliError::usage(format!(
                "{}: row {i} of \"entries\" has {} columns, expected {n}",
                path.display(),
                self.entries[i].len()
            )));
        }
        let m = CMatrix::from_fn(n, n, |i, j| {
            let [re, im] = self.entries[i][j];
            C64::new(re, im)
        });
        GramMatrix::with_tolerances(m, tol).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}

/// Reads either a state-set file (`vectors`) or a Gram file (`entries`) and
/// returns its Gram matrix.
pub fn read_gram_or_states(path: &Path, tol: &Tolerances) -> Result<GramMatrix, CliError> {
    let value = read_json(path)?;
    let has = |k: &str| value.get(k).is_some();
    if has("vectors") {
        let states: StateSet = decode(path, value)?;
        Ok(gram_of(&states))
    } else if has("entries") {
        decode::<RawGram>(path, value)?.build(tol, path)
    } else {
        Err(CliError::usage(format!(
            "{}: expected a state set (\"vectors\") or a Gram matrix (\"entries\")",
            path.display()
        )))
    }
}

pub fn read_gram(path: &Path, tol: &Tolerances) -> Result<GramMatrix, CliError> {
    let value = read_json(path)?;
    decode::<RawGram>(path, value)?.build(tol, path)
}

#[derive(Deserialize)]
struct RawMachine {
    input_gram: RawGram,
    output_overlaps: RawGram,
    gammas: Vec<f64>,
    flag_gram: RawGram,
}

pub fn read_machine(path: &Path, tol: &Tolerances) -> Result<MachineSpec, CliError> {
    let value = read_json(path)?;
    let raw: RawMachine = decode(path, value)?;
    MachineSpec::new(
        raw.input_gram.build(tol, path)?,
        raw.output_overlaps.build(tol, path)?,
        raw.gammas,
        raw.flag_gram.build(tol, path)?,
    )
    .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}
