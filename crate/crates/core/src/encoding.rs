//! Trigram encoding of paradigms into binary vectors.
//!
//! A lexeme becomes one vector. In concat mode there is a column for every
//! `(cell, n-gram)` pair seen in the training lexemes; in set mode the
//! columns are bare n-grams and a bit is set if the n-gram occurs in any
//! cell. Only presence is recorded.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use indexmap::IndexSet;
use thiserror::Error;

use crate::bits::BinaryVector;
use crate::data::ParadigmSample;

pub const DEFAULT_BOUNDARY: &str = "#";

/// Separator between tokens of an n-gram in the feature-space table.
pub const GRAM_SEPARATOR: char = '|';

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("cannot build a feature space from zero samples")]
    EmptySpace,
    #[error("invalid encoding config: {0}")]
    Config(String),
    #[error("token {token:?} in lexeme {lexeme:?} collides with the boundary symbol")]
    BoundaryCollision { lexeme: String, token: String },
    #[error("lexeme {lexeme:?} has cells {found:?}, expected {expected:?}")]
    CellMismatch {
        lexeme: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("feature table line {line}: {message}")]
    Table { line: usize, message: String },
}

/// A phonemic form split into segment tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentedForm(Vec<String>);

impl SegmentedForm {
    pub fn new(segments: Vec<String>) -> Self {
        Self(segments)
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for SegmentedForm {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for SegmentedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncodingMode {
    #[default]
    Concat,
    Set,
}

/// How columns of a freshly built space are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnOrder {
    /// Cell order, then first observation in sample order.
    #[default]
    FirstSeen,
    /// Cell order, then lexicographic token order. Independent of sample order.
    Sorted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingConfig {
    pub n: usize,
    pub boundary_padding: bool,
    pub boundary: String,
    pub mode: EncodingMode,
    pub order: ColumnOrder,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            n: 3,
            boundary_padding: true,
            boundary: DEFAULT_BOUNDARY.to_string(),
            mode: EncodingMode::Concat,
            order: ColumnOrder::FirstSeen,
        }
    }
}

impl EncodingConfig {
    pub fn validate(&self) -> Result<(), EncodingError> {
        if self.n == 0 {
            return Err(EncodingError::Config("n must be at least 1".into()));
        }
        if self.boundary_padding && self.boundary.is_empty() {
            return Err(EncodingError::Config("boundary symbol is empty".into()));
        }
        Ok(())
    }
}

/// A window of `n` consecutive tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gram(Vec<String>);

impl Gram {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        Self(tokens.into_iter().map(Into::into).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }
}

/// Tokens concatenated, the way trigrams are usually printed (`aːre`).
impl fmt::Display for Gram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.0 {
            f.write_str(t)?;
        }
        Ok(())
    }
}

/// Column key. `cell` is `None` in set mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureKey {
    pub cell: Option<String>,
    pub gram: Gram,
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.cell {
            Some(c) => write!(f, "{c}: {}", self.gram),
            None => write!(f, "{}", self.gram),
        }
    }
}

/// Distinct n-grams of a form, in first-occurrence order.
pub fn extract_ngrams(form: &SegmentedForm, config: &EncodingConfig) -> IndexSet<Gram> {
    let mut padded: Vec<&str> = Vec::with_capacity(form.len() + 2);
    if config.boundary_padding {
        padded.push(&config.boundary);
    }
    padded.extend(form.segments().iter().map(String::as_str));
    if config.boundary_padding {
        padded.push(&config.boundary);
    }
    if config.n == 0 || padded.len() < config.n {
        return IndexSet::new();
    }
    padded
        .windows(config.n)
        .map(|w| Gram::new(w.iter().copied()))
        .collect()
}

/// Ordered `(cell, n-gram)` columns with a reverse index.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    mode: EncodingMode,
    columns: Vec<FeatureKey>,
    index: HashMap<FeatureKey, usize>,
}

impl FeatureSpace {
    /// Builds a space from explicit columns. Duplicate keys are rejected.
    pub fn from_columns(mode: EncodingMode, columns: Vec<FeatureKey>) -> Result<Self, EncodingError> {
        let mut index = HashMap::with_capacity(columns.len());
        for (i, key) in columns.iter().enumerate() {
            if (mode == EncodingMode::Set) != key.cell.is_none() {
                return Err(EncodingError::Config(format!(
                    "column {i} does not fit {mode:?} mode"
                )));
            }
            if index.insert(key.clone(), i).is_some() {
                return Err(EncodingError::Config(format!("duplicate column {key}")));
            }
        }
        Ok(Self { mode, columns, index })
    }

    pub fn mode(&self) -> EncodingMode {
        self.mode
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[FeatureKey] {
        &self.columns
    }

    pub fn column(&self, key: &FeatureKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Writes the space as a text table: `index TAB cell TAB gram`.
    ///
    /// Gram tokens are joined by `|`. Inside cells and tokens, `\` is written
    /// as `\\`, `|` as `\|`, tab as `\t` and newline as `\n`. In set mode the
    /// cell field is empty.
    pub fn write_table<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mode = match self.mode {
            EncodingMode::Concat => "concat",
            EncodingMode::Set => "set",
        };
        writeln!(out, "# mode={mode}")?;
        for (i, key) in self.columns.iter().enumerate() {
            let cell = key.cell.as_deref().map(escape_field).unwrap_or_default();
            let gram: Vec<String> = key.gram.tokens().iter().map(|t| escape_field(t)).collect();
            writeln!(out, "{i}\t{cell}\t{}", gram.join(&GRAM_SEPARATOR.to_string()))?;
        }
        Ok(())
    }

    pub fn read_table<R: BufRead>(input: R) -> Result<Self, EncodingError> {
        let table_err = |line: usize, message: String| EncodingError::Table { line, message };
        let mut mode = None;
        let mut columns = Vec::new();
        for (ln, line) in input.lines().enumerate() {
            let line = line.map_err(|e| table_err(ln + 1, e.to_string()))?;
            if let Some(rest) = line.strip_prefix("# mode=") {
                mode = Some(match rest.trim() {
                    "concat" => EncodingMode::Concat,
                    "set" => EncodingMode::Set,
                    other => return Err(table_err(ln + 1, format!("unknown mode {other:?}"))),
                });
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut fields = line.splitn(3, '\t');
            let (Some(idx), Some(cell), Some(gram)) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(table_err(ln + 1, "expected 3 tab-separated fields".into()));
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| table_err(ln + 1, format!("bad index {idx:?}")))?;
            if idx != columns.len() {
                return Err(table_err(ln + 1, format!("index {idx} out of sequence")));
            }
            let mode = mode.ok_or_else(|| table_err(ln + 1, "missing mode header".into()))?;
            let cell = match mode {
                EncodingMode::Concat => Some(unescape_field(cell).map_err(|m| table_err(ln + 1, m))?),
                EncodingMode::Set => None,
            };
            let tokens = split_escaped(gram)
                .into_iter()
                .map(|t| unescape_field(&t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| table_err(ln + 1, m))?;
            columns.push(FeatureKey {
                cell,
                gram: Gram(tokens),
            });
        }
        let mode = mode.ok_or_else(|| table_err(0, "missing mode header".into()))?;
        Self::from_columns(mode, columns)
    }
}

fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '|' => out.push_str("\\|"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_field(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('|') => out.push('|'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            other => return Err(format!("bad escape \\{other:?}")),
        }
    }
    Ok(out)
}

// Splits on unescaped separators, leaving escapes in place.
fn split_escaped(s: &str) -> Vec<String> {
    let mut parts = vec![String::new()];
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let last = parts.last_mut().expect("non-empty");
                last.push('\\');
                if let Some(n) = chars.next() {
                    last.push(n);
                }
            }
            GRAM_SEPARATOR => parts.push(String::new()),
            c => parts.last_mut().expect("non-empty").push(c),
        }
    }
    parts
}

fn check_tokens(sample: &ParadigmSample, config: &EncodingConfig) -> Result<(), EncodingError> {
    if !config.boundary_padding {
        return Ok(());
    }
    for form in sample.forms.values() {
        if let Some(tok) = form.segments().iter().find(|t| **t == config.boundary) {
            return Err(EncodingError::BoundaryCollision {
                lexeme: sample.lexeme_id.clone(),
                token: tok.clone(),
            });
        }
    }
    Ok(())
}

/// Builds the feature space over the given (training) samples. Only keys
/// observed in at least one sample become columns.
pub fn build_feature_space(
    samples: &[ParadigmSample],
    config: &EncodingConfig,
) -> Result<FeatureSpace, EncodingError> {
    config.validate()?;
    let first = samples.first().ok_or(EncodingError::EmptySpace)?;
    let cells: Vec<&String> = first.forms.keys().collect();
    for s in samples {
        check_tokens(s, config)?;
        if s.forms.len() != cells.len() || s.forms.keys().zip(&cells).any(|(a, b)| a != *b) {
            return Err(EncodingError::CellMismatch {
                lexeme: s.lexeme_id.clone(),
                expected: cells.iter().map(|c| c.to_string()).collect(),
                found: s.forms.keys().cloned().collect(),
            });
        }
    }

    let columns: Vec<FeatureKey> = match config.mode {
        EncodingMode::Concat => {
            let mut columns = Vec::new();
            for (ci, cell) in cells.iter().enumerate() {
                let mut seen: IndexSet<Gram> = IndexSet::new();
                for s in samples {
                    let (_, form) = s.forms.get_index(ci).expect("checked cell inventory");
                    seen.extend(extract_ngrams(form, config));
                }
                let mut grams: Vec<Gram> = seen.into_iter().collect();
                if config.order == ColumnOrder::Sorted {
                    grams.sort();
                }
                columns.extend(grams.into_iter().map(|gram| FeatureKey {
                    cell: Some((*cell).clone()),
                    gram,
                }));
            }
            columns
        }
        EncodingMode::Set => {
            let mut seen: IndexSet<Gram> = IndexSet::new();
            for s in samples {
                for form in s.forms.values() {
                    seen.extend(extract_ngrams(form, config));
                }
            }
            let mut grams: Vec<Gram> = seen.into_iter().collect();
            if config.order == ColumnOrder::Sorted {
                grams.sort();
            }
            grams
                .into_iter()
                .map(|gram| FeatureKey { cell: None, gram })
                .collect()
        }
    };
    FeatureSpace::from_columns(config.mode, columns)
}

/// Encodes one sample against a space. Keys absent from the space are dropped.
pub fn encode(sample: &ParadigmSample, space: &FeatureSpace, config: &EncodingConfig) -> BinaryVector {
    let mut v = BinaryVector::zeros(space.width());
    for (cell, form) in &sample.forms {
        for gram in extract_ngrams(form, config) {
            let key = FeatureKey {
                cell: match space.mode() {
                    EncodingMode::Concat => Some(cell.clone()),
                    EncodingMode::Set => None,
                },
                gram,
            };
            if let Some(i) = space.column(&key) {
                v.set(i, true);
            }
        }
    }
    v
}

/// Encodes many samples in order.
pub fn encode_all(
    samples: &[ParadigmSample],
    space: &FeatureSpace,
    config: &EncodingConfig,
) -> Vec<BinaryVector> {
    samples.iter().map(|s| encode(s, space, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use indexmap::IndexMap;

    fn form(s: &str) -> SegmentedForm {
        s.split_whitespace().collect()
    }

    fn gram(s: &str) -> Gram {
        Gram::new(s.split('-'))
    }

    fn sample(id: &str, cells: &[(&str, &str)]) -> ParadigmSample {
        ParadigmSample {
            lexeme_id: id.into(),
            forms: cells
                .iter()
                .map(|(c, f)| (c.to_string(), form(f)))
                .collect::<IndexMap<_, _>>(),
            class_label: "x".into(),
        }
    }

    #[test]
    fn ngrams_padded() {
        let cfg = EncodingConfig::default();
        let got: Vec<Gram> = extract_ngrams(&form("a m o"), &cfg).into_iter().collect();
        assert_eq!(got, vec![gram("#-a-m"), gram("a-m-o"), gram("m-o-#")]);
        let got: Vec<Gram> = extract_ngrams(&form("o"), &cfg).into_iter().collect();
        assert_eq!(got, vec![gram("#-o-#")]);
    }

    #[test]
    fn ngrams_unpadded_short_form_is_empty() {
        let cfg = EncodingConfig {
            boundary_padding: false,
            ..Default::default()
        };
        assert!(extract_ngrams(&form("a m"), &cfg).is_empty());
        assert_eq!(extract_ngrams(&form("a m o"), &cfg).len(), 1);
    }

    #[test]
    fn ngrams_collapse_duplicates() {
        let cfg = EncodingConfig {
            boundary_padding: false,
            ..Default::default()
        };
        assert_eq!(extract_ngrams(&form("a b a b a b"), &cfg).len(), 2);
    }

    #[test]
    fn two_lexeme_space_and_encoding() {
        let cfg = EncodingConfig::default();
        let samples = [sample("1", &[("c", "a m o")]), sample("2", &[("c", "a m a")])];
        let space = build_feature_space(&samples, &cfg).unwrap();
        let grams: Vec<String> = space
            .columns()
            .iter()
            .map(|k| k.gram.tokens().join("-"))
            .collect();
        assert_eq!(grams, vec!["#-a-m", "a-m-o", "m-o-#", "a-m-a", "m-a-#"]);
        assert!(space.columns().iter().all(|k| k.cell.as_deref() == Some("c")));
        assert_eq!(encode(&samples[1], &space, &cfg).to_bits(), vec![1, 0, 0, 1, 1]);
        assert_eq!(encode(&samples[0], &space, &cfg).to_bits(), vec![1, 1, 1, 0, 0]);
    }

    #[test]
    fn concat_keeps_cells_separate_set_does_not() {
        let cfg = EncodingConfig::default();
        let s = [sample("1", &[("a", "k a t"), ("b", "k a t")])];
        let space = build_feature_space(&s, &cfg).unwrap();
        assert_eq!(space.width(), 2 * 3);
        let set_cfg = EncodingConfig {
            mode: EncodingMode::Set,
            ..Default::default()
        };
        let space = build_feature_space(&s, &set_cfg).unwrap();
        assert_eq!(space.width(), 3);
        assert_eq!(encode(&s[0], &space, &set_cfg).count_ones(), 3);
    }

    #[test]
    fn self_encoding_is_all_ones_disjoint_is_zero() {
        let cfg = EncodingConfig::default();
        let s = [sample("1", &[("a", "p a t a"), ("b", "p i")])];
        let space = build_feature_space(&s, &cfg).unwrap();
        let v = encode(&s[0], &space, &cfg);
        assert_eq!(v.count_ones(), space.width());
        let other = sample("2", &[("a", "x y z"), ("b", "u")]);
        assert!(encode(&other, &space, &cfg).is_zero());
    }

    #[test]
    fn sorted_order_ignores_sample_order() {
        let cfg = EncodingConfig {
            order: ColumnOrder::Sorted,
            ..Default::default()
        };
        let a = sample("1", &[("c", "a m o"), ("d", "t u")]);
        let b = sample("2", &[("c", "b e l"), ("d", "s i")]);
        let s1 = build_feature_space(&[a.clone(), b.clone()], &cfg).unwrap();
        let s2 = build_feature_space(&[b, a], &cfg).unwrap();
        assert_eq!(s1.columns(), s2.columns());
        assert_eq!(s1.columns()[0].cell.as_deref(), Some("c"));
    }

    #[test]
    fn errors() {
        let cfg = EncodingConfig::default();
        assert_eq!(build_feature_space(&[], &cfg), Err(EncodingError::EmptySpace));
        let bad = sample("1", &[("c", "a # b")]);
        assert!(matches!(
            build_feature_space(&[bad], &cfg),
            Err(EncodingError::BoundaryCollision { .. })
        ));
        let mismatched = [sample("1", &[("c", "a")]), sample("2", &[("d", "a")])];
        assert!(matches!(
            build_feature_space(&mismatched, &cfg),
            Err(EncodingError::CellMismatch { .. })
        ));
        let zero_n = EncodingConfig { n: 0, ..Default::default() };
        assert!(matches!(
            build_feature_space(&[sample("1", &[("c", "a")])], &zero_n),
            Err(EncodingError::Config(_))
        ));
    }

    #[test]
    fn table_round_trip_with_escapes() {
        let columns = vec![
            FeatureKey {
                cell: Some("prs|1sg".into()),
                gram: Gram::new(["#", "a\\", "b|c"]),
            },
            FeatureKey {
                cell: Some("inf".into()),
                gram: Gram::new(["a\tb", "r", "e"]),
            },
        ];
        let space = FeatureSpace::from_columns(EncodingMode::Concat, columns).unwrap();
        let mut buf = Vec::new();
        space.write_table(&mut buf).unwrap();
        let back = FeatureSpace::read_table(&buf[..]).unwrap();
        assert_eq!(back, space);

        let set = FeatureSpace::from_columns(
            EncodingMode::Set,
            vec![FeatureKey {
                cell: None,
                gram: Gram::new(["x", "y", "z"]),
            }],
        )
        .unwrap();
        let mut buf = Vec::new();
        set.write_table(&mut buf).unwrap();
        assert_eq!(FeatureSpace::read_table(&buf[..]).unwrap(), set);
    }

    #[test]
    fn duplicate_columns_rejected() {
        let k = FeatureKey {
            cell: Some("c".into()),
            gram: Gram::new(["a"]),
        };
        assert!(FeatureSpace::from_columns(EncodingMode::Concat, vec![k.clone(), k]).is_err());
    }
}
