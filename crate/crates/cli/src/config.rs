//! TOML family configs.
//!
//! ```toml
//! space = "halfline"
//! levels = [16, 32, 64, 128, 256]
//! cross = "abs(x0-y0)+min(x0,y0)+1"
//!
//! [options]
//! penalty = 0
//! window = 3
//! ```
//!
//! `space` may also be a table such as `{ kind = "grid", width = 4 }`, and
//! `cross` may be replaced by `catalog = "lambda" | "focused" | "shift"` with
//! `lambda`, `point` and `map` as parameters.

use std::path::Path;
use std::sync::Arc;

use coarse_core::order::{CheckParams, Ladder, MetricFamily};
use coarse_core::tropical::ComposeOptions;
use coarse_core::{CatalogKind, Dist, SpaceKind};
use serde::{Deserialize, Deserializer, Serialize};

use crate::codec::read_text;
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(deserialize_with = "space_field")]
    pub space: SpaceKind,
    pub levels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<usize>>,
    #[serde(default)]
    pub options: OptionsConfig,
}

fn space_field<'de, D: Deserializer<'de>>(d: D) -> Result<SpaceKind, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Field {
        Name(String),
        Table(SpaceKind),
    }
    match Field::deserialize(d)? {
        Field::Name(name) => name.parse().map_err(serde::de::Error::custom),
        Field::Table(kind) => Ok(kind),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_witness: Option<usize>,
}

impl OptionsConfig {
    /// Fields set in `self` win over `fallback`.
    pub fn or(self, fallback: OptionsConfig) -> OptionsConfig {
        OptionsConfig {
            penalty: self.penalty.or(fallback.penalty),
            window: self.window.or(fallback.window),
            delta: self.delta.or(fallback.delta),
            min_witness: self.min_witness.or(fallback.min_witness),
        }
    }

    pub fn resolve(self) -> Resolved {
        let d = CheckParams::default();
        Resolved {
            params: CheckParams {
                window: self.window.unwrap_or(d.window),
                delta: self.delta.map(Dist).unwrap_or(d.delta),
                min_witness_len: self.min_witness.unwrap_or(d.min_witness_len),
            },
            compose: ComposeOptions::with_penalty(self.penalty.unwrap_or(0)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolved {
    pub params: CheckParams,
    pub compose: ComposeOptions,
}

impl Resolved {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "penalty": self.compose.junction_penalty.0,
            "window": self.params.window,
            "delta": self.params.delta.0,
            "min_witness": self.params.min_witness_len,
        })
    }
}

pub fn parse_config(text: &str, path: &Path) -> Result<FamilyConfig, CliError> {
    toml::from_str(text).map_err(|source| CliError::Toml { path: path.into(), source })
}

pub fn load_config(path: &Path) -> Result<FamilyConfig, CliError> {
    parse_config(&read_text(path)?, path)
}

impl FamilyConfig {
    pub fn build(&self, ladder: Arc<Ladder>) -> Result<MetricFamily, CliError> {
        let lambda = || Dist(self.lambda.unwrap_or(1));
        match (&self.cross, self.catalog.as_deref()) {
            (Some(src), None) => Ok(MetricFamily::dsl(ladder, src)?),
            (None, Some("lambda")) => Ok(MetricFamily::catalog(ladder, CatalogKind::Lambda { lambda: lambda() })?),
            (None, Some("focused")) => {
                let point = self.point.unwrap_or(0);
                Ok(MetricFamily::catalog(ladder, CatalogKind::Focused { point, lambda: lambda() })?)
            }
            (None, Some("shift")) => {
                let map = self.map.clone().ok_or_else(|| CliError::Config("shift needs `map`".into()))?;
                Ok(MetricFamily::catalog(ladder, CatalogKind::Shift { map, lambda: lambda() })?)
            }
            (None, Some(other)) => {
                Err(CliError::Config(format!("unknown catalog kind `{other}` (expected lambda, focused or shift)")))
            }
            (Some(_), Some(_)) => Err(CliError::Config("give either `cross` or `catalog`, not both".into())),
            (None, None) => Err(CliError::Config("family needs `cross` or `catalog`".into())),
        }
    }
}

/// Two families on one shared ladder.
pub struct Pair {
    pub configs: [FamilyConfig; 2],
    pub ladder: Arc<Ladder>,
    pub families: [MetricFamily; 2],
    pub options: Resolved,
}

/// Loads two configs, applies a level override, and builds both families on
/// a common ladder. Options come from `overrides`, then the first config,
/// then the second.
pub fn load_pair(
    first: &Path,
    second: &Path,
    levels: Option<Vec<usize>>,
    overrides: OptionsConfig,
) -> Result<Pair, CliError> {
    let mut a = load_config(first)?;
    let mut b = load_config(second)?;
    if let Some(levels) = levels {
        a.levels = levels.clone();
        b.levels = levels;
    }
    if a.space != b.space || a.levels != b.levels {
        return Err(CliError::Config(format!(
            "families live on different ladders: {} {:?} vs {} {:?}",
            a.space, a.levels, b.space, b.levels
        )));
    }
    let ladder = Arc::new(Ladder::new(a.space.clone(), a.levels.clone())?);
    let fa = a.build(ladder.clone())?;
    let fb = b.build(ladder.clone())?;
    let options = overrides.or(a.options).or(b.options).resolve();
    Ok(Pair { configs: [a, b], ladder, families: [fa, fb], options })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FamilyConfig, CliError> {
        parse_config(text, Path::new("mem.toml"))
    }

    #[test]
    fn parses_flat_dsl_family() {
        let cfg = parse("space = \"halfline\"\nlevels = [4, 8]\ncross = \"dxy+1\"\n[options]\npenalty = 1\n").unwrap();
        assert_eq!(cfg.space, SpaceKind::Halfline);
        assert_eq!(cfg.options.resolve().compose, ComposeOptions::with_penalty(1));
        let ladder = Arc::new(Ladder::new(cfg.space.clone(), cfg.levels.clone()).unwrap());
        assert_eq!(cfg.build(ladder).unwrap().top().at(0, 3), Dist(4));
    }

    #[test]
    fn space_table_form() {
        let cfg = parse("levels = [4]\ncross = \"dxy+1\"\n[space]\nkind = \"grid\"\nwidth = 2\n").unwrap();
        assert_eq!(cfg.space, SpaceKind::Grid { width: 2 });
        assert!(parse("space = \"moebius\"\nlevels = [4]\ncross = \"1\"\n").is_err());
    }

    #[test]
    fn catalog_families() {
        let cfg = parse("space = \"halfline\"\nlevels = [4]\ncatalog = \"focused\"\npoint = 2\nlambda = 3\n").unwrap();
        let ladder = Arc::new(Ladder::new(SpaceKind::Halfline, vec![4]).unwrap());
        assert_eq!(cfg.build(ladder.clone()).unwrap().top().at(0, 0), Dist(7));
        let bad = parse("space = \"halfline\"\nlevels = [4]\ncatalog = \"spiral\"\n").unwrap();
        assert!(matches!(bad.build(ladder.clone()), Err(CliError::Config(_))));
        let none = parse("space = \"halfline\"\nlevels = [4]\n").unwrap();
        assert!(matches!(none.build(ladder), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            parse("space = \"line\"\nlevels = [4]\ncolour = 1\ncross = \"dxy+1\"\n"),
            Err(CliError::Toml { .. })
        ));
    }

    #[test]
    fn options_precedence() {
        let cli = OptionsConfig { window: Some(2), ..Default::default() };
        let file = OptionsConfig { window: Some(4), penalty: Some(1), ..Default::default() };
        let r = cli.or(file).resolve();
        assert_eq!((r.params.window, r.compose.junction_penalty), (2, Dist(1)));
        assert_eq!(r.params.min_witness_len, 6);
    }
}
