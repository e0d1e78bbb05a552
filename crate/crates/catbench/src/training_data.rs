//! Supervision pairs and experiment files: the two text inputs to training,
//! plus the compiled `.sup` serialization.

use std::path::Path;

use thiserror::Error;

use crate::engine::{tokenize, Tokens};
use crate::lambda::LambdaTerm;
use crate::parse::{parse_lambda, LineError};
use crate::source::atomic_write;

/// A surface expression paired with its presumed predicate-argument
/// structure. Derivations are latent; there is no other annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisionPair {
    pub surface: Tokens,
    pub gold_lf: LambdaTerm,
}

/// Header of the compiled supervision format.
pub const SUP_HEADER: &str = "catbench-sup 1";

/// Parses supervision text: one `surface : lf` pair per line. The text
/// before the colon is case-sensitive surface material with MWEs in bars;
/// `%` is literal there, while the part after the colon may carry a
/// trailing comment. Exact repetition of a line is a separate pair.
pub fn parse_supervision(text: &str) -> (Vec<SupervisionPair>, Vec<LineError>) {
    let mut pairs = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lineno = idx + 1;
        match parse_supervision_line(line) {
            Ok(p) => pairs.push(p),
            Err(reason) => errors.push(LineError { line: lineno, reason }),
        }
    }
    (pairs, errors)
}

fn parse_supervision_line(line: &str) -> Result<SupervisionPair, String> {
    let colon = find_colon_outside_bars(line)
        .ok_or("supervision line needs `surface : predicate-argument structure`")?;
    let surface_text = &line[..colon];
    let mut lf_text = &line[colon + 1..];
    if let Some(p) = lf_text.find('%') {
        lf_text = &lf_text[..p];
    }
    let surface = tokenize(surface_text).map_err(|e| e.to_string())?;
    if surface.is_empty() {
        return Err("supervision line has an empty surface expression".into());
    }
    let gold_lf = parse_lambda(lf_text)?;
    if !gold_lf.is_closed() {
        return Err("gold predicate-argument structure has free lambda variables".into());
    }
    Ok(SupervisionPair { surface, gold_lf })
}

fn find_colon_outside_bars(s: &str) -> Option<usize> {
    let mut in_bars = false;
    for (i, c) in s.char_indices() {
        match c {
            '|' => in_bars = !in_bars,
            ':' if !in_bars => return Some(i),
            _ => {}
        }
    }
    None
}

/// Serializes pairs to the compiled `.sup` format: surface (bars and `+`
/// seams restored), a tab, and the canonical LF text.
pub fn sup_text(pairs: &[SupervisionPair]) -> String {
    let mut out = String::new();
    out.push_str(SUP_HEADER);
    out.push('\n');
    for p in pairs {
        out.push_str(&format!("{}\t{}\n", p.surface.render(), p.gold_lf));
    }
    out
}

#[derive(Debug, Error)]
pub enum SupError {
    #[error("unknown version header `{0}`")]
    VersionMismatch(String),
    #[error("record {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn parse_sup(text: &str) -> Result<Vec<SupervisionPair>, SupError> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != SUP_HEADER {
        return Err(SupError::VersionMismatch(header.to_string()));
    }
    let mut pairs = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (surface, lf) = line
            .split_once('\t')
            .ok_or(SupError::Malformed { line: idx + 1, reason: "missing tab".into() })?;
        let surface = tokenize(surface)
            .map_err(|e| SupError::Malformed { line: idx + 1, reason: e.to_string() })?;
        let gold_lf = parse_lambda(lf)
            .map_err(|reason| SupError::Malformed { line: idx + 1, reason })?;
        pairs.push(SupervisionPair { surface, gold_lf });
    }
    Ok(pairs)
}

pub fn write_sup(pairs: &[SupervisionPair], path: &Path) -> Result<(), SupError> {
    atomic_write(path, &sup_text(pairs))?;
    Ok(())
}

pub fn read_sup(path: &Path) -> Result<Vec<SupervisionPair>, SupError> {
    let text = std::fs::read_to_string(path)?;
    parse_sup(&text)
}

/// Iteration policy of one experiment: a fixed count, or a predetermined
/// number of epochs feeding the extrapolator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Iterations {
    Count(u32),
    Extrapolate,
}

/// One line of an experiment file: resource hints, iteration policy,
/// learning-rate schedule, log prefix, and an optional function to call
/// before training starts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub mem_mb: u64,
    pub heap_mb: u64,
    pub iterations: Iterations,
    pub learning_rate: f64,
    pub learning_rate_rate: f64,
    pub log_prefix: String,
    pub pre_function: Option<String>,
}

impl ExperimentSpec {
    /// Suffix identifying this experiment in file names:
    /// `<lr>-<lrr>-<iters>`.
    pub fn name_suffix(&self) -> String {
        let iters = match self.iterations {
            Iterations::Count(n) => n.to_string(),
            Iterations::Extrapolate => "xp".to_string(),
        };
        format!("{:?}-{:?}-{}", self.learning_rate, self.learning_rate_rate, iters)
    }
}

/// Parses one experiment line: 6 or 7 whitespace-separated fields.
pub fn parse_experiment_line(line: &str) -> Result<ExperimentSpec, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 6 && fields.len() != 7 {
        return Err(format!("expected 6 or 7 fields, found {}", fields.len()));
    }
    let mem_mb: u64 = fields[0].parse().map_err(|_| format!("bad memory field `{}`", fields[0]))?;
    let heap_mb: u64 = fields[1].parse().map_err(|_| format!("bad heap field `{}`", fields[1]))?;
    if heap_mb > mem_mb {
        return Err(format!("heap {heap_mb} exceeds memory {mem_mb}"));
    }
    let iterations = if fields[2] == "xp" {
        Iterations::Extrapolate
    } else {
        let n: u32 = fields[2]
            .parse()
            .map_err(|_| format!("iterations field must be `xp` or a positive integer, found `{}`", fields[2]))?;
        if n == 0 {
            return Err("iteration count must be positive".into());
        }
        Iterations::Count(n)
    };
    let learning_rate: f64 =
        fields[3].parse().map_err(|_| format!("bad learning rate `{}`", fields[3]))?;
    if !(learning_rate > 0.0) {
        return Err("learning rate must be positive".into());
    }
    let learning_rate_rate: f64 =
        fields[4].parse().map_err(|_| format!("bad learning rate rate `{}`", fields[4]))?;
    let log_prefix = fields[5].to_string();
    let pre_function = match fields.get(6) {
        Some(name) => {
            if !crate::config::is_processor_function(name) {
                return Err(format!("unknown pre-function `{name}`"));
            }
            Some(name.to_string())
        }
        None => None,
    };
    Ok(ExperimentSpec {
        mem_mb,
        heap_mb,
        iterations,
        learning_rate,
        learning_rate_rate,
        log_prefix,
        pre_function,
    })
}

/// Parses a whole experiment file, collecting per-line diagnostics.
pub fn parse_experiment_file(text: &str) -> (Vec<ExperimentSpec>, Vec<LineError>) {
    let mut specs = Vec::new();
    let mut errors = Vec::new();
    for (line, result) in parse_experiment_lines(text) {
        match result {
            Ok(spec) => specs.push(spec),
            Err(reason) => errors.push(LineError { line, reason }),
        }
    }
    (specs, errors)
}

/// Line-by-line variant keeping bad lines addressable, so one bad
/// experiment can fail alone without stopping its siblings.
pub fn parse_experiment_lines(text: &str) -> Vec<(usize, Result<ExperimentSpec, String>)> {
    text.lines()
        .enumerate()
        .filter_map(|(idx, raw)| {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('%') {
                None
            } else {
                Some((idx + 1, parse_experiment_line(line)))
            }
        })
        .collect()
}
