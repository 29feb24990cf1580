//! Experiment configuration from `key = value` files and CLI flags.
//!
//! Every CLI flag has a config-file key with the same name (without the
//! leading dashes). Values given on the command line override the file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::ExperimentError;
use crate::data::{CellSelection, ColumnMap, DataFormat, Language, LoadOptions, SynthParams};
use crate::encoding::{ColumnOrder, EncodingConfig, EncodingMode};

/// Keys accepted in config files.
pub const KNOWN_KEYS: &[&str] = &[
    "data",
    "format",
    "language",
    "cells",
    "vigilance-min",
    "vigilance-max",
    "vigilance-step",
    "permutations",
    "vigilance",
    "folds",
    "seed",
    "jobs",
    "out",
    "min-class-size",
    "mode",
    "no-padding",
    "ngram",
    "learning-param",
    "restarts",
    "baseline-k",
    "no-baseline",
    "col-lexeme",
    "col-cell",
    "col-form",
    "col-class",
    "filter-column",
    "filter-value",
    "delimiter",
    "segment-delimiter",
    "n-classes",
    "n-lexemes",
    "n-cells",
    "stem-length",
    "noise",
];

/// `data` value selecting the built-in synthetic generator.
pub const SYNTHETIC_DATA: &str = "synthetic";

/// Raw key/value settings before typing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines. `#` starts a comment line; keys may use
    /// `_` or `-`.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut map = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ExperimentError::Config(format!("config line {}: expected key = value", ln + 1))
            })?;
            let key = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ExperimentError::Config(format!(
                    "config line {}: unknown key {key:?}",
                    ln + 1
                )));
            }
            let value = v.trim().trim_matches('"').to_string();
            map.insert(key, value);
        }
        Ok(Self(map))
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    /// Entries of `other` replace entries of `self`.
    pub fn overlay(mut self, other: &Settings) -> Self {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ExperimentError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| ExperimentError::Config(format!("{key} = {v:?}: {e}")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool, ExperimentError> {
        match self.get(key) {
            None => Ok(false),
            Some("true" | "1" | "yes" | "") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(ExperimentError::Config(format!("{key} = {v:?}: expected a boolean"))),
        }
    }
}

/// Inclusive vigilance grid `min, min + step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VigilanceGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for VigilanceGrid {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 0.3,
            step: 0.005,
        }
    }
}

impl VigilanceGrid {
    /// A grid holding a single value.
    pub fn single(v: f64) -> Self {
        Self {
            min: v,
            max: v,
            step: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let ok = self.min.is_finite()
            && self.max.is_finite()
            && self.step > 0.0
            && self.min <= self.max
            && self.min >= 0.0
            && self.max <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(ExperimentError::Config(format!(
                "vigilance grid needs 0 <= min <= max <= 1 and step > 0, got {self:?}"
            )))
        }
    }

    /// Grid values rounded to 9 decimals, so that e.g. the 12th point of a
    /// 0.005 grid is exactly the literal `0.06`.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| {
                let v = self.min + i as f64 * self.step;
                (v * 1e9).round() / 1e9
            })
            .filter(|&v| v <= self.max + 1e-12)
            .collect()
    }
}

/// Where the lexemes come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File { path: PathBuf, options: LoadOptions },
    Synthetic(SynthParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: Option<DataSource>,
    pub language: Language,
    /// Explicit cells for `Language::Custom`. `None` means every cell seen
    /// in the data, in order of first appearance.
    pub cells: Option<Vec<String>>,
    pub encoding: EncodingConfig,
    pub grid: VigilanceGrid,
    pub n_permutations: usize,
    pub learning_param: f64,
    /// Vigilance for `cv` and `report`; `None` picks the best sweep point.
    pub vigilance: Option<f64>,
    /// k-means `k`; `None` uses the attested class count.
    pub baseline_k: Option<usize>,
    pub baseline_restarts: usize,
    pub baseline: bool,
    pub folds: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub min_class_size: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: None,
            language: Language::Custom,
            cells: None,
            encoding: EncodingConfig::default(),
            grid: VigilanceGrid::default(),
            n_permutations: 10,
            learning_param: 2.0,
            vigilance: None,
            baseline_k: None,
            baseline_restarts: 10,
            baseline: true,
            folds: 10,
            out_dir: PathBuf::from("out"),
            seed: 0,
            jobs: None,
            min_class_size: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.grid.validate()?;
        if self.n_permutations == 0 {
            return Err(ExperimentError::Config("permutations must be >= 1".into()));
        }
        if self.folds < 2 {
            return Err(ExperimentError::Config("folds must be >= 2".into()));
        }
        if !(self.learning_param > 1.0) {
            return Err(ExperimentError::Config("learning-param must be > 1".into()));
        }
        if let Some(v) = self.vigilance {
            if !(0.0..=1.0).contains(&v) {
                return Err(ExperimentError::Config("vigilance must lie in [0, 1]".into()));
            }
        }
        if self.baseline_restarts == 0 {
            return Err(ExperimentError::Config("restarts must be >= 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(ExperimentError::Config("jobs must be >= 1".into()));
        }
        self.encoding
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))
    }

    /// Cell selection for the configured language.
    pub fn selection(&self) -> Option<CellSelection> {
        match (&self.cells, self.language) {
            (Some(cells), _) => Some(CellSelection::custom(cells.clone())),
            (None, lang) => CellSelection::builtin(lang),
        }
    }

    pub fn from_settings(s: &Settings) -> Result<Self, ExperimentError> {
        let mut c = Self::default();
        if let Some(l) = s.get("language") {
            c.language = l.parse().map_err(|e: crate::data::DataError| ExperimentError::Config(e.to_string()))?;
        }
        if let Some(p) = s.get("cells") {
            let sel = CellSelection::from_file(Path::new(p))?;
            c.cells = Some(sel.cells);
        }
        c.data = match s.get("data") {
            None => None,
            Some(SYNTHETIC_DATA) => Some(DataSource::Synthetic(synth_params(s)?)),
            Some(path) => Some(DataSource::File {
                path: PathBuf::from(path),
                options: load_options(s)?,
            }),
        };
        if let Some(v) = s.parsed("vigilance-min")? {
            c.grid.min = v;
        }
        if let Some(v) = s.parsed("vigilance-max")? {
            c.grid.max = v;
        }
        if let Some(v) = s.parsed("vigilance-step")? {
            c.grid.step = v;
        }
        if let Some(v) = s.parsed("permutations")? {
            c.n_permutations = v;
        }
        c.vigilance = s.parsed("vigilance")?;
        if let Some(v) = s.parsed("folds")? {
            c.folds = v;
        }
        if let Some(v) = s.parsed("seed")? {
            c.seed = v;
        }
        c.jobs = s.parsed("jobs")?;
        if let Some(v) = s.get("out") {
            c.out_dir = PathBuf::from(v);
        }
        if let Some(v) = s.parsed("min-class-size")? {
            c.min_class_size = v;
        }
        if let Some(m) = s.get("mode") {
            c.encoding.mode = match m {
                "concat" => EncodingMode::Concat,
                "set" => EncodingMode::Set,
                other => {
                    return Err(ExperimentError::Config(format!(
                        "mode = {other:?}: expected concat or set"
                    )))
                }
            };
        }
        c.encoding.boundary_padding = !s.flag("no-padding")?;
        if let Some(n) = s.parsed("ngram")? {
            c.encoding.n = n;
        }
        c.encoding.order = ColumnOrder::Sorted;
        if let Some(v) = s.parsed("learning-param")? {
            c.learning_param = v;
        }
        if let Some(v) = s.parsed("restarts")? {
            c.baseline_restarts = v;
        }
        c.baseline_k = s.parsed("baseline-k")?;
        c.baseline = !s.flag("no-baseline")?;
        c.validate()?;
        Ok(c)
    }
}

fn load_options(s: &Settings) -> Result<LoadOptions, ExperimentError> {
    let format: DataFormat = match s.get("format") {
        Some(f) => f.parse().map_err(|e: crate::data::DataError| ExperimentError::Config(e.to_string()))?,
        None => DataFormat::Paralex,
    };
    let mut o = LoadOptions::new(format);
    let defaults = ColumnMap::defaults_for(format);
    o.columns.lexeme = s.get("col-lexeme").unwrap_or(defaults.lexeme.as_str()).to_string();
    o.columns.cell = s.get("col-cell").unwrap_or(defaults.cell.as_str()).to_string();
    o.columns.form = s.get("col-form").unwrap_or(defaults.form.as_str()).to_string();
    o.columns.class = s.get("col-class").unwrap_or(defaults.class.as_str()).to_string();
    o.columns.filter = match (s.get("filter-column"), s.get("filter-value")) {
        (Some(c), Some(v)) => Some((c.to_string(), v.to_string())),
        (None, None) => None,
        _ => {
            return Err(ExperimentError::Config(
                "filter-column and filter-value must be given together".into(),
            ))
        }
    };
    o.delimiter = match s.get("delimiter") {
        None => None,
        Some("tab" | "\\t") => Some(b'\t'),
        Some(d) if d.len() == 1 => Some(d.as_bytes()[0]),
        Some(d) => return Err(ExperimentError::Config(format!("delimiter = {d:?}: expected one byte or 'tab'"))),
    };
    if let Some(d) = s.get("segment-delimiter") {
        o.segment_delimiter = if d == "space" { " ".into() } else { d.to_string() };
    }
    Ok(o)
}

/// Synthetic dataset parameters from settings (`n-classes`, `n-lexemes`,
/// `n-cells`, `stem-length`, `noise`, `seed`).
pub fn synth_params(s: &Settings) -> Result<SynthParams, ExperimentError> {
    let mut p = SynthParams::default();
    if let Some(v) = s.parsed("n-classes")? {
        p.n_classes = v;
    }
    if let Some(v) = s.parsed("n-lexemes")? {
        p.n_lexemes = v;
    }
    if let Some(v) = s.parsed("n-cells")? {
        p.n_cells = v;
    }
    if let Some(v) = s.parsed("stem-length")? {
        p.stem_length = v;
    }
    if let Some(v) = s.parsed("noise")? {
        p.noise = v;
    }
    if let Some(v) = s.parsed("seed")? {
        p.seed = v;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_61_points() {
        let v = VigilanceGrid::default().values();
        assert_eq!(v.len(), 61);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[12], 0.06);
        assert_eq!(v[60], 0.3);
        assert_eq!(VigilanceGrid::single(0.06).values(), vec![0.06]);
    }

    #[test]
    fn defaults() {
        let c = ExperimentConfig::default();
        assert_eq!(c.n_permutations, 10);
        assert_eq!(c.folds, 10);
        assert_eq!(c.learning_param, 2.0);
        assert_eq!(c.grid, VigilanceGrid { min: 0.0, max: 0.3, step: 0.005 });
        assert_eq!(c.encoding.n, 3);
    }

    #[test]
    fn parse_and_overlay() {
        let file = Settings::parse("# comment\nvigilance_min = 0.01\npermutations=3\nmode = set\n").unwrap();
        let mut flags = Settings::new();
        flags.set("permutations", "5");
        flags.set("no-padding", "true");
        let c = ExperimentConfig::from_settings(&file.overlay(&flags)).unwrap();
        assert_eq!(c.grid.min, 0.01);
        assert_eq!(c.n_permutations, 5);
        assert_eq!(c.encoding.mode, EncodingMode::Set);
        assert!(!c.encoding.boundary_padding);
    }

    #[test]
    fn bad_settings() {
        assert!(Settings::parse("bogus = 1").is_err());
        assert!(Settings::parse("no equals sign").is_err());
        let mut s = Settings::new();
        s.set("folds", "1");
        assert!(ExperimentConfig::from_settings(&s).is_err());
        let mut s = Settings::new();
        s.set("vigilance-step", "0");
        assert!(ExperimentConfig::from_settings(&s).is_err());
        let mut s = Settings::new();
        s.set("seed", "abc");
        assert!(matches!(ExperimentConfig::from_settings(&s), Err(ExperimentError::Config(_))));
        let mut s = Settings::new();
        s.set("filter-column", "lang");
        s.set("data", "x.csv");
        assert!(ExperimentConfig::from_settings(&s).is_err());
    }

    #[test]
    fn column_overrides() {
        let s = Settings::parse("data = f.csv\nformat = rvid\ncol-class = macroclass\ndelimiter = tab\n").unwrap();
        let c = ExperimentConfig::from_settings(&s).unwrap();
        match c.data {
            Some(DataSource::File { options, .. }) => {
                assert_eq!(options.format, DataFormat::Rvid);
                assert_eq!(options.columns.class, "macroclass");
                assert_eq!(options.columns.cell, "Cell");
                assert_eq!(options.delimiter, Some(b'\t'));
            }
            other => panic!("{other:?}"),
        }
    }
}
