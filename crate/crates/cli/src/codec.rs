//! Version-1 JSON documents for metrics and doubles.
//!
//! Keys appear in a fixed order and every matrix row sits on its own line,
//! so `save(load(text)) == text` for any document this module wrote.

use std::fmt::Write as _;
use std::path::Path;

use coarse_core::metric::Label;
use coarse_core::{assemble_double, Dist, DistMatrix, DoubleMetric, FiniteMetric, MAX_QUANTA};
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u64 = 1;

/// A base metric as read from disk, before validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawMetric {
    pub dist: DistMatrix,
    pub scale_denominator: u64,
    pub labels: Option<Vec<Label>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    Metric(RawMetric),
    Double { base: RawMetric, cross: DistMatrix },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    version: u64,
    kind: String,
    #[serde(default = "one")]
    scale_denominator: u64,
    #[serde(default)]
    labels: Option<Vec<Label>>,
    #[serde(default)]
    dist: Option<Vec<Vec<i128>>>,
    #[serde(default)]
    base: Option<Vec<Vec<i128>>>,
    #[serde(default)]
    cross: Option<Vec<Vec<i128>>>,
}

fn one() -> u64 {
    1
}

fn matrix(field: &'static str, rows: Vec<Vec<i128>>) -> Result<DistMatrix, CliError> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for (row, entries) in rows.into_iter().enumerate() {
        if entries.len() != n {
            return Err(CliError::Ragged { field, row, expected: n, found: entries.len() });
        }
        for (col, value) in entries.into_iter().enumerate() {
            if value < 0 {
                return Err(CliError::Negative { field, row, col, value });
            }
            if value > MAX_QUANTA as i128 {
                return Err(CliError::Overflow { field, row, col, value, cap: MAX_QUANTA });
            }
            data.push(Dist(value as u64));
        }
    }
    Ok(DistMatrix::from_flat(n, data).expect("square by construction"))
}

fn missing(field: &str) -> CliError {
    CliError::Config(format!("document lacks the `{field}` field"))
}

/// Parses a document, checking schema version, shape and integer ranges.
pub fn parse_document(text: &str, path: &Path) -> Result<Document, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|source| CliError::Json { path: path.into(), source })?;
    if let Some(found) = value.get("version").and_then(|v| v.as_u64()) {
        if found != SCHEMA_VERSION {
            return Err(CliError::SchemaVersion { found, expected: SCHEMA_VERSION });
        }
    }
    let raw: RawDoc = serde_json::from_value(value).map_err(|source| CliError::Json { path: path.into(), source })?;
    if raw.version != SCHEMA_VERSION {
        return Err(CliError::SchemaVersion { found: raw.version, expected: SCHEMA_VERSION });
    }
    let meta = |dist| RawMetric { dist, scale_denominator: raw.scale_denominator, labels: raw.labels.clone() };
    match raw.kind.as_str() {
        "metric" => Ok(Document::Metric(meta(matrix("dist", raw.dist.ok_or_else(|| missing("dist"))?)?))),
        "double" => {
            let base = matrix("base", raw.base.ok_or_else(|| missing("base"))?)?;
            let cross = matrix("cross", raw.cross.ok_or_else(|| missing("cross"))?)?;
            Ok(Document::Double { base: meta(base), cross })
        }
        other => Err(CliError::SchemaKind { expected: "metric or double", found: other.into() }),
    }
}

/// Validates a raw base metric.
pub fn build_metric(raw: RawMetric) -> Result<FiniteMetric, CliError> {
    let mut m = FiniteMetric::new(raw.dist)?.with_scale_denominator(raw.scale_denominator)?;
    if let Some(labels) = raw.labels {
        m = m.with_labels(labels)?;
    }
    Ok(m)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

pub fn load_metric(path: &Path) -> Result<FiniteMetric, CliError> {
    match parse_document(&read_text(path)?, path)? {
        Document::Metric(raw) => build_metric(raw),
        Document::Double { .. } => Err(CliError::SchemaKind { expected: "metric", found: "double".into() }),
    }
}

pub fn load_double(path: &Path) -> Result<DoubleMetric, CliError> {
    match parse_document(&read_text(path)?, path)? {
        Document::Double { base, cross } => Ok(assemble_double(build_metric(base)?, cross)?),
        Document::Metric(_) => Err(CliError::SchemaKind { expected: "double", found: "metric".into() }),
    }
}

fn push_matrix(out: &mut String, name: &str, m: &DistMatrix, last: bool) {
    let _ = write!(out, "  \"{name}\": [");
    for (i, row) in m.rows().enumerate() {
        out.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
        for (j, d) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", d.0);
        }
        out.push(']');
    }
    if m.n() > 0 {
        out.push_str("\n  ");
    }
    out.push(']');
    out.push_str(if last { "\n" } else { ",\n" });
}

fn push_header(out: &mut String, kind: &str, base: &FiniteMetric) {
    let labels = serde_json::to_string(&base.labels()).expect("labels serialize");
    let _ = write!(
        out,
        "{{\n  \"version\": {SCHEMA_VERSION},\n  \"kind\": \"{kind}\",\n  \"scale_denominator\": {},\n  \"labels\": {labels},\n",
        base.scale_denominator()
    );
}

pub fn metric_to_json(m: &FiniteMetric) -> String {
    let mut out = String::new();
    push_header(&mut out, "metric", m);
    push_matrix(&mut out, "dist", m.matrix(), true);
    out.push_str("}\n");
    out
}

pub fn double_to_json(d: &DoubleMetric) -> String {
    let mut out = String::new();
    push_header(&mut out, "double", d.base());
    push_matrix(&mut out, "base", d.base().matrix(), false);
    push_matrix(&mut out, "cross", d.cross(), true);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use coarse_core::{generate_space, make_catalog_double, CatalogKind, SpaceKind};

    fn path() -> &'static Path {
        Path::new("mem.json")
    }

    #[test]
    fn double_round_trip_is_byte_identical() {
        let base = generate_space(&SpaceKind::Grid { width: 8 }, 64).unwrap();
        let d = make_catalog_double(base, &CatalogKind::Focused { point: 9, lambda: Dist(2) }).unwrap();
        let text = double_to_json(&d);
        let Document::Double { base, cross } = parse_document(&text, path()).unwrap() else { panic!() };
        let back = assemble_double(build_metric(base).unwrap(), cross).unwrap();
        assert_eq!(back, d);
        assert_eq!(double_to_json(&back), text);
    }

    #[test]
    fn metric_layout() {
        let m = FiniteMetric::from_rows(&[[0u64, 2], [2, 0]]).unwrap();
        let text = metric_to_json(&m);
        assert_eq!(
            text,
            "{\n  \"version\": 1,\n  \"kind\": \"metric\",\n  \"scale_denominator\": 1,\n  \"labels\": null,\n  \"dist\": [\n    [0,2],\n    [2,0]\n  ]\n}\n"
        );
        let Document::Metric(raw) = parse_document(&text, path()).unwrap() else { panic!() };
        assert_eq!(metric_to_json(&build_metric(raw).unwrap()), text);
    }

    #[test]
    fn version_two_is_a_schema_error() {
        let text = r#"{"version": 2, "kind": "metric", "whatever": true}"#;
        assert!(matches!(parse_document(text, path()), Err(CliError::SchemaVersion { found: 2, expected: 1 })));
    }

    #[test]
    fn negative_entry_is_a_validation_error() {
        let text = r#"{"version":1,"kind":"double","base":[[0,1],[1,0]],"cross":[[1,-1],[2,1]]}"#;
        let err = parse_document(text, path()).unwrap_err();
        assert!(matches!(err, CliError::Negative { field: "cross", row: 0, col: 1, value: -1 }));
        assert_eq!(err.exit_code(), crate::error::exit::NEGATIVE);
    }

    #[test]
    fn oversized_entry_is_an_overflow_error() {
        let big = (1u64 << 40) + 1;
        let text = format!(r#"{{"version":1,"kind":"metric","dist":[[0,{big}],[{big},0]]}}"#);
        assert!(matches!(parse_document(&text, path()), Err(CliError::Overflow { .. })));
        let huge = r#"{"version":1,"kind":"metric","dist":[[0,99999999999999999999999],[1,0]]}"#;
        assert!(parse_document(huge, path()).is_err());
    }

    #[test]
    fn ragged_and_float_rejected() {
        let ragged = r#"{"version":1,"kind":"metric","dist":[[0,1],[1]]}"#;
        assert!(matches!(parse_document(ragged, path()), Err(CliError::Ragged { row: 1, .. })));
        let float = r#"{"version":1,"kind":"metric","dist":[[0,1.5],[1.5,0]]}"#;
        assert!(matches!(parse_document(float, path()), Err(CliError::Json { .. })));
    }

    #[test]
    fn empty_metric_round_trips() {
        let m = FiniteMetric::new(DistMatrix::filled(0, Dist(0))).unwrap();
        let text = metric_to_json(&m);
        let Document::Metric(raw) = parse_document(&text, path()).unwrap() else { panic!() };
        assert_eq!(metric_to_json(&build_metric(raw).unwrap()), text);
    }
}
