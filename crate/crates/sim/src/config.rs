//! Key-value code description files.
//!
//! ```text
//! # 5G NR uplink control code
//! name = ul128_105
//! n = 128
//! k = 105
//! crc_poly = 0xE21
//! interleave = identity
//! info_set = ts38212
//! ```
//!
//! `crc_poly` is hex with the leading term included. `interleave` is
//! `identity`, `ts38212` or an explicit permutation; `info_set` is `ts38212`,
//! `bhattacharyya` or an explicit list of polar rows. Lists may be separated
//! by commas or whitespace.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use grand_core::ca_polar::{CrcPolynomial, InfoSetRule, Interleaver};
use grand_core::CodeSpec;

use crate::error::{Result, SimError};

const KEYS: [&str; 6] = ["name", "n", "k", "crc_poly", "interleave", "info_set"];

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| SimError::Config(format!("{key}: {s:?} is not an index"))))
        .collect()
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| SimError::Config(format!("{key}: {value:?} is not a non-negative integer")))
}

/// Parses a code description. Unknown keys and repeated keys are rejected.
pub fn parse_code_config(text: &str) -> Result<CodeSpec> {
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| SimError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(SimError::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        if fields.insert(key, value.trim()).is_some() {
            return Err(SimError::Config(format!("line {}: {key} given twice", lineno + 1)));
        }
    }
    let require = |key: &str| fields.get(key).copied().ok_or_else(|| SimError::Config(format!("missing key {key}")));

    let n = parse_usize("n", require("n")?)?;
    let k = parse_usize("k", require("k")?)?;
    let crc: CrcPolynomial = fields.get("crc_poly").copied().unwrap_or("1").parse()?;
    let interleaver = match fields.get("interleave").copied().unwrap_or("identity") {
        "identity" => Interleaver::Identity,
        "ts38212" => Interleaver::Ts38212,
        list => Interleaver::Explicit(parse_list("interleave", list)?),
    };
    let info_set = match require("info_set")? {
        "ts38212" => InfoSetRule::Ts38212,
        "bhattacharyya" => InfoSetRule::Bhattacharyya,
        list => InfoSetRule::Explicit(parse_list("info_set", list)?),
    };
    let spec = CodeSpec { name: fields.get("name").map(|s| s.to_string()), n, k, crc, interleaver, info_set };
    spec.validate()?;
    Ok(spec)
}

fn join(list: &[usize]) -> String {
    list.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// Renders a spec in the format read by [`parse_code_config`].
pub fn format_code_config(spec: &CodeSpec) -> String {
    let mut out = String::new();
    if let Some(name) = &spec.name {
        writeln!(out, "name = {name}").unwrap();
    }
    writeln!(out, "n = {}", spec.n).unwrap();
    writeln!(out, "k = {}", spec.k).unwrap();
    writeln!(out, "crc_poly = {}", spec.crc).unwrap();
    let interleave = match &spec.interleaver {
        Interleaver::Identity => "identity".to_string(),
        Interleaver::Ts38212 => "ts38212".to_string(),
        Interleaver::Explicit(p) => join(p),
    };
    writeln!(out, "interleave = {interleave}").unwrap();
    let info = match &spec.info_set {
        InfoSetRule::Ts38212 => "ts38212".to_string(),
        InfoSetRule::Bhattacharyya => "bhattacharyya".to_string(),
        InfoSetRule::Explicit(rows) => join(rows),
    };
    writeln!(out, "info_set = {info}").unwrap();
    out
}

/// Resolves a `--code` argument: a preset name, or else a path to a code file.
pub fn load_code_spec(arg: &str) -> Result<CodeSpec> {
    if let Some(spec) = CodeSpec::preset(arg) {
        return Ok(spec);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(SimError::Config(format!(
            "{arg:?} is neither a preset (ul128_105, dl128_99) nor an existing file"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_code_config(&text)
}
