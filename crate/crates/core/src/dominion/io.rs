//! Text formats for dominions, constraint graphs and label assignments.
//!
//! Dominion: a `k n |L|` header, then the labels of `[0..n^2]^k` in
//! lexicographic order, one row per value of the leading coordinates.
//! Label assignment: one `label pbm-path` line per label.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{Dominion, DominionError, LabelAssignment, LabelGraph, Labeling};
use crate::hamming::pbm::{read_pbm, write_pbm};

pub fn format_dominion(d: &Dominion) -> String {
    let l = d.labeling();
    let mut out = format!("{} {} {}\n", l.k, l.n, l.num_labels);
    for row in l.labels.chunks(l.side()) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_dominion(text: &str) -> Result<Dominion, DominionError> {
    let mut tokens = text.split_whitespace().map(|t| {
        t.parse::<u64>()
            .map_err(|_| DominionError::Parse(format!("not an integer: {t:?}")))
    });
    let mut header = || {
        tokens
            .next()
            .unwrap_or_else(|| Err(DominionError::Parse("truncated header".into())))
    };
    let k = header()? as usize;
    let n = header()? as usize;
    let num_labels = u32::try_from(header()?)
        .map_err(|_| DominionError::Parse("label count too large".into()))?;
    let labels = tokens
        .map(|t| {
            t.and_then(|v| {
                u32::try_from(v).map_err(|_| DominionError::Parse(format!("label {v} too large")))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Dominion::try_from(Labeling::new(k, n, num_labels, labels)?)
}

/// One `a b` line per edge.
pub fn format_edges(g: &LabelGraph) -> String {
    g.edges().fold(String::new(), |mut out, (a, b)| {
        let _ = writeln!(out, "{a} {b}");
        out
    })
}

/// Writes `<stem>_<label>.pbm` for every label into `dir`, returning the index text.
pub fn write_label_assignment(
    alpha: &LabelAssignment,
    dir: &Path,
    stem: &str,
) -> Result<String, DominionError> {
    let mut index = String::new();
    for (label, image) in alpha.images().iter().enumerate() {
        let name = format!("{stem}_{label}.pbm");
        write_pbm(&dir.join(&name), image)?;
        let _ = writeln!(index, "{label} {name}");
    }
    Ok(index)
}

/// Parses an index of `label pbm-path` lines; relative paths resolve against `base`.
pub fn read_label_assignment(text: &str, base: &Path) -> Result<LabelAssignment, DominionError> {
    let mut entries: Vec<(usize, PathBuf)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, path) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| DominionError::Parse(format!("line {}: expected `label path`", lineno + 1)))?;
        let label = label
            .parse::<usize>()
            .map_err(|_| DominionError::Parse(format!("line {}: bad label {label:?}", lineno + 1)))?;
        entries.push((label, base.join(path.trim())));
    }
    entries.sort_by_key(|(label, _)| *label);
    if entries.iter().enumerate().any(|(i, (label, _))| i != *label) {
        return Err(DominionError::Parse(
            "labels must be exactly 0..|L| with no repeats".into(),
        ));
    }
    let images = entries
        .iter()
        .map(|(_, path)| read_pbm(path))
        .collect::<Result<Vec<_>, _>>()?;
    LabelAssignment::new(images)
}
