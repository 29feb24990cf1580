//! Paradigm lexicon loading, cell selection and synthetic datasets.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use indexmap::IndexMap;
use log::{info, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::encoding::SegmentedForm;

/// Placeholder marking a defective (non-existent) form.
pub const DEFECTIVE_PLACEHOLDER: &str = "Ø";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing required column {column:?} (header: {header:?})")]
    MissingColumn {
        path: String,
        column: String,
        header: Vec<String>,
    },
    #[error("dataset is empty: {0}")]
    EmptyDataset(String),
    #[error("invalid data config: {0}")]
    Config(String),
    #[error("lexeme {0:?} yields no n-gram features")]
    NoFeatures(String),
}

/// Input file layouts. They differ only in default column names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Paralex forms table.
    Paralex,
    /// Romance Verbal Inflection Dataset (CLDF forms table).
    Rvid,
    /// `lexeme`, `cell`, `form`, `class`.
    SimpleTsv,
}

impl std::str::FromStr for DataFormat {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paralex" => Ok(Self::Paralex),
            "rvid" => Ok(Self::Rvid),
            "simple_tsv" | "simple-tsv" | "tsv" => Ok(Self::SimpleTsv),
            other => Err(DataError::Config(format!("unknown data format {other:?}"))),
        }
    }
}

/// Which header names hold which field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub lexeme: String,
    pub cell: String,
    pub form: String,
    pub class: String,
    /// Keep only rows whose `column` equals `value`, e.g. a language id in a
    /// multi-language table.
    pub filter: Option<(String, String)>,
}

impl ColumnMap {
    pub fn defaults_for(format: DataFormat) -> Self {
        let (lexeme, cell, form, class) = match format {
            DataFormat::Paralex => ("lexeme", "cell", "phon_form", "inflection_class"),
            DataFormat::Rvid => ("Lexeme_ID", "Cell", "Form", "Inflection_class"),
            DataFormat::SimpleTsv => ("lexeme", "cell", "form", "class"),
        };
        Self {
            lexeme: lexeme.into(),
            cell: cell.into(),
            form: form.into(),
            class: class.into(),
            filter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub format: DataFormat,
    pub columns: ColumnMap,
    /// Field delimiter; `None` picks tab for `.tsv`/`.txt` and comma otherwise.
    pub delimiter: Option<u8>,
    /// Separator between segments in pre-segmented forms.
    pub segment_delimiter: String,
}

impl LoadOptions {
    pub fn new(format: DataFormat) -> Self {
        Self {
            format,
            columns: ColumnMap::defaults_for(format),
            delimiter: None,
            segment_delimiter: " ".into(),
        }
    }
}

/// One line of a long-format lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadigmRow {
    pub lexeme_id: String,
    pub cell_id: String,
    pub form: SegmentedForm,
    pub class_label: String,
}

/// A lexeme with exactly the selected cells, in selection order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadigmSample {
    pub lexeme_id: String,
    pub forms: IndexMap<String, SegmentedForm>,
    pub class_label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    Latin,
    Portuguese,
    Estonian,
    Custom,
}

impl std::str::FromStr for Language {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "latin" => Ok(Self::Latin),
            "portuguese" => Ok(Self::Portuguese),
            "estonian" => Ok(Self::Estonian),
            "custom" => Ok(Self::Custom),
            other => Err(DataError::Config(format!("unknown language {other:?}"))),
        }
    }
}

pub const LATIN_CELLS: [&str; 9] = [
    "imperf-ind.3sg",
    "inf",
    "imp.2sg",
    "prs-ind.1sg",
    "prs-ind.2sg",
    "prs-ind.3sg",
    "prs-ind.3pl",
    "prs-sbjv.3sg",
    "ger",
];

pub const PORTUGUESE_CELLS: [&str; 12] = [
    "prs.ind.1sg",
    "prs.ind.3sg",
    "prs.ind.1pl",
    "prs.ind.2pl",
    "prs.ind.3pl",
    "pst.impf.ind.3sg",
    "pst.pfv.ind.1sg",
    "pst.perf.ind.3sg",
    "fut.ind.3sg",
    "prs.sbjv.3sg",
    "prs.sbjv.2pl",
    "pst.ptcp",
];

pub const ESTONIAN_CELLS: [&str; 14] = [
    "inf",
    "imp.prs.2pl",
    "imp.prs.pers",
    "ger",
    "ptcp.pst.pers",
    "ind.prs.1sg",
    "cond.prs.pers",
    "imp.prs.2sg",
    "sup",
    "ptcp.prs.pers",
    "quot.prs.pers",
    "ind.pst.ipfv.1sg",
    "ind.prs.impers",
    "ind.pst.ipfv.impers",
];

/// Ordered list of the paradigm cells a lexeme is represented by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSelection {
    pub language: Language,
    pub cells: Vec<String>,
}

impl CellSelection {
    /// Built-in selection for a language. `Custom` has no built-in list.
    pub fn builtin(language: Language) -> Option<Self> {
        let cells: &[&str] = match language {
            Language::Latin => &LATIN_CELLS,
            Language::Portuguese => &PORTUGUESE_CELLS,
            Language::Estonian => &ESTONIAN_CELLS,
            Language::Custom => return None,
        };
        Some(Self {
            language,
            cells: cells.iter().map(|c| c.to_string()).collect(),
        })
    }

    pub fn custom(cells: Vec<String>) -> Self {
        Self {
            language: Language::Custom,
            cells,
        }
    }

    /// Reads one cell id per line; blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        let io_err = |source| DataError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = File::open(path).map_err(io_err)?;
        let mut cells = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(io_err)?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                cells.push(line.to_string());
            }
        }
        Ok(Self::custom(cells))
    }
}

fn attaches_to_previous(c: char) -> bool {
    matches!(c,
        '\u{0300}'..='\u{036F}'
        | '\u{1AB0}'..='\u{1AFF}'
        | '\u{1DC0}'..='\u{1DFF}'
        | '\u{20D0}'..='\u{20FF}'
        | '\u{FE20}'..='\u{FE2F}'
        // length marks and secondary articulations
        | 'ː' | 'ˑ' | 'ʰ' | 'ʲ' | 'ʷ' | 'ˠ' | 'ˤ' | 'ⁿ' | 'ˡ' | '\u{02BC}')
}

fn attaches_to_next(c: char) -> bool {
    matches!(c, 'ˈ' | 'ˌ')
}

/// Character-level segmentation: combining marks and length or
/// secondary-articulation modifiers join the preceding character, stress
/// marks join the following one. Whitespace is dropped.
pub fn tokenize_fallback(form: &str) -> Vec<String> {
    let mut tokens: Vec<String> = Vec::new();
    let mut pending_prefix = String::new();
    for c in form.chars() {
        if c.is_whitespace() {
            continue;
        }
        if attaches_to_next(c) {
            pending_prefix.push(c);
        } else if attaches_to_previous(c) && pending_prefix.is_empty() && !tokens.is_empty() {
            tokens.last_mut().expect("non-empty").push(c);
        } else {
            let mut tok = std::mem::take(&mut pending_prefix);
            tok.push(c);
            tokens.push(tok);
        }
    }
    if !pending_prefix.is_empty() {
        tokens.push(pending_prefix);
    }
    tokens
}

/// Splits a raw form into segments: on `delimiter` if present, otherwise
/// with [`tokenize_fallback`]. Returns whether the fallback was used.
pub fn segment_form(raw: &str, delimiter: &str) -> (SegmentedForm, bool) {
    let raw = raw.trim();
    if !delimiter.is_empty() && raw.contains(delimiter) {
        let segs = raw
            .split(delimiter)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        (SegmentedForm::new(segs), false)
    } else {
        (SegmentedForm::new(tokenize_fallback(raw)), true)
    }
}

fn is_defective(raw: &str) -> bool {
    let t = raw.trim();
    t.is_empty() || t == DEFECTIVE_PLACEHOLDER
}

fn delimiter_for(path: &Path, explicit: Option<u8>) -> u8 {
    if let Some(d) = explicit {
        return d;
    }
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("tsv") | Some("txt") | Some("tab") => b'\t',
        _ => b',',
    }
}

/// Reads a long-format lexicon. Defective forms (`Ø` or empty) are dropped.
pub fn load_dataset(path: &Path, options: &LoadOptions) -> Result<Vec<ParadigmRow>, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_rows(file, &path.display().to_string(), delimiter_for(path, options.delimiter), options)
}

/// Like [`load_dataset`] but from any reader; `name` is used in errors.
pub fn read_rows<R: io::Read>(
    input: R,
    name: &str,
    delimiter: u8,
    options: &LoadOptions,
) -> Result<Vec<ParadigmRow>, DataError> {
    let csv_err = |source| DataError::Csv {
        path: name.to_string(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(DataError::EmptyDataset(format!("{name} has no header")));
    }
    let col = |column: &str| {
        header
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| DataError::MissingColumn {
                path: name.to_string(),
                column: column.to_string(),
                header: header.clone(),
            })
    };
    let c = &options.columns;
    let (li, ci, fi, ki) = (col(&c.lexeme)?, col(&c.cell)?, col(&c.form)?, col(&c.class)?);
    let filter = match &c.filter {
        Some((column, value)) => Some((col(column)?, value.as_str())),
        None => None,
    };

    let mut rows = Vec::new();
    let mut defective = 0usize;
    let mut fallback_used = 0usize;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        if let Some((fc, value)) = filter {
            if field(fc) != value {
                continue;
            }
        }
        let raw = field(fi);
        if is_defective(raw) {
            defective += 1;
            continue;
        }
        let (form, fallback) = segment_form(raw, &options.segment_delimiter);
        fallback_used += fallback as usize;
        rows.push(ParadigmRow {
            lexeme_id: field(li).to_string(),
            cell_id: field(ci).to_string(),
            form,
            class_label: field(ki).to_string(),
        });
    }
    if rows.is_empty() {
        return Err(DataError::EmptyDataset(format!("{name} has no usable rows")));
    }
    if defective > 0 {
        info!("{name}: dropped {defective} defective forms");
    }
    if fallback_used > 0 {
        warn!(
            "{name}: {fallback_used} forms were not pre-segmented; used the character-level fallback tokenizer"
        );
    }
    Ok(rows)
}

/// Counts reported by [`assemble`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    pub lexemes_seen: usize,
    pub incomplete_dropped: usize,
    pub duplicates_resolved: usize,
}

/// Groups rows into samples over the selected cells; see [`select_and_assemble`].
pub fn assemble(
    rows: &[ParadigmRow],
    selection: &CellSelection,
) -> Result<(Vec<ParadigmSample>, AssemblyStats), DataError> {
    if selection.cells.is_empty() {
        return Err(DataError::Config("cell selection is empty".into()));
    }
    let wanted: HashMap<&str, usize> = selection
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    struct Partial<'a> {
        class: &'a str,
        forms: Vec<Option<&'a SegmentedForm>>,
    }
    let mut by_lexeme: IndexMap<&str, Partial> = IndexMap::new();
    let mut stats = AssemblyStats::default();
    for row in rows {
        let entry = by_lexeme.entry(&row.lexeme_id).or_insert_with(|| Partial {
            class: &row.class_label,
            forms: vec![None; selection.cells.len()],
        });
        if let Some(&slot) = wanted.get(row.cell_id.as_str()) {
            if entry.forms[slot].is_some() {
                stats.duplicates_resolved += 1;
            } else {
                entry.forms[slot] = Some(&row.form);
            }
        }
    }
    stats.lexemes_seen = by_lexeme.len();

    let mut samples = Vec::new();
    for (lexeme, partial) in by_lexeme {
        if partial.forms.iter().any(Option::is_none) {
            stats.incomplete_dropped += 1;
            continue;
        }
        let forms = selection
            .cells
            .iter()
            .zip(partial.forms)
            .map(|(c, f)| (c.clone(), f.expect("checked").clone()))
            .collect();
        samples.push(ParadigmSample {
            lexeme_id: lexeme.to_string(),
            forms,
            class_label: partial.class.to_string(),
        });
    }
    if stats.duplicates_resolved > 0 {
        info!(
            "resolved {} duplicate (lexeme, cell) forms by keeping the first",
            stats.duplicates_resolved
        );
    }
    if stats.incomplete_dropped > 0 {
        info!(
            "dropped {} of {} lexemes missing a selected cell",
            stats.incomplete_dropped, stats.lexemes_seen
        );
    }
    if samples.is_empty() {
        return Err(DataError::EmptyDataset(
            "no lexeme has all selected cells".into(),
        ));
    }
    Ok((samples, stats))
}

/// Keeps the selected cells, drops incomplete lexemes and resolves duplicate
/// `(lexeme, cell)` forms by keeping the first in file order. Samples are in
/// order of first appearance.
pub fn select_and_assemble(
    rows: &[ParadigmRow],
    selection: &CellSelection,
) -> Result<Vec<ParadigmSample>, DataError> {
    assemble(rows, selection).map(|(s, _)| s)
}

/// Writes samples in the `simple_tsv` layout (reloadable with
/// [`DataFormat::SimpleTsv`]).
pub fn write_samples_tsv<W: Write>(samples: &[ParadigmSample], mut out: W) -> io::Result<()> {
    writeln!(out, "lexeme\tcell\tform\tclass")?;
    for s in samples {
        for (cell, form) in &s.forms {
            writeln!(out, "{}\t{}\t{}\t{}", s.lexeme_id, cell, form, s.class_label)?;
        }
    }
    Ok(())
}

/// Number of ground-truth classes among the samples.
pub fn class_count(samples: &[ParadigmSample]) -> usize {
    let mut labels: Vec<&str> = samples.iter().map(|s| s.class_label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    labels.len()
}

const STEM_ALPHABET: [&str; 18] = [
    "p", "t", "k", "b", "d", "g", "m", "n", "l", "r", "s", "f", "v", "a", "e", "i", "o", "u",
];

const SUFFIX_ALPHABET: [&str; 16] = [
    "aː", "eː", "iː", "oː", "uː", "ɛ", "ɔ", "ə", "ʃ", "ʒ", "χ", "θ", "ð", "ŋ", "ɲ", "ʎ",
];

/// Segments per synthetic class suffix.
pub const SYNTH_SUFFIX_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_classes: usize,
    pub n_lexemes: usize,
    pub n_cells: usize,
    pub stem_length: usize,
    pub seed: u64,
    pub noise: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_classes: 5,
            n_lexemes: 500,
            n_cells: 6,
            stem_length: 5,
            seed: 0,
            noise: 0.0,
        }
    }
}

/// Generated samples plus the generating suffixes.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub samples: Vec<ParadigmSample>,
    pub cells: Vec<String>,
    /// `suffixes[class][cell]`.
    pub suffixes: Vec<Vec<SegmentedForm>>,
    pub class_labels: Vec<String>,
}

/// Lexemes are a random stem plus a per-(class, cell) suffix. Stem and suffix
/// segments come from disjoint alphabets, and within a cell no two classes
/// share the last two suffix segments, so the suffix-internal trigrams
/// (`s1 s2 s3`, `s2 s3 #`) identify the class. With probability `noise` a
/// cell takes the suffix of another random class instead.
pub fn synthetic_dataset(params: &SynthParams) -> Result<SyntheticDataset, DataError> {
    let SynthParams {
        n_classes,
        n_lexemes,
        n_cells,
        stem_length,
        seed,
        noise,
    } = *params;
    if n_classes == 0 || n_lexemes < n_classes {
        return Err(DataError::Config(format!(
            "need 1 <= n_classes <= n_lexemes, got {n_classes} classes for {n_lexemes} lexemes"
        )));
    }
    if n_cells == 0 || stem_length == 0 {
        return Err(DataError::Config("n_cells and stem_length must be positive".into()));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(DataError::Config(format!("noise must lie in [0, 1], got {noise}")));
    }
    let a = SUFFIX_ALPHABET.len();
    if n_classes > a * a {
        return Err(DataError::Config(format!(
            "suffix alphabet of {a} segments cannot give {n_classes} distinct classes"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<String> = (0..n_cells).map(|c| format!("cell{c}")).collect();
    let class_labels: Vec<String> = (0..n_classes).map(|k| format!("class{k}")).collect();

    let mut suffixes = vec![Vec::with_capacity(n_cells); n_classes];
    let all_pairs: Vec<(usize, usize)> = (0..a).flat_map(|i| (0..a).map(move |j| (i, j))).collect();
    for _ in 0..n_cells {
        let pairs: Vec<&(usize, usize)> = all_pairs.choose_multiple(&mut rng, n_classes).collect();
        for (k, &&(s2, s3)) in pairs.iter().enumerate() {
            let mut segs: Vec<usize> = (0..SYNTH_SUFFIX_LEN - 2).map(|_| rng.gen_range(0..a)).collect();
            segs.extend([s2, s3]);
            suffixes[k].push(SegmentedForm::new(
                segs.iter().map(|&i| SUFFIX_ALPHABET[i].to_string()).collect(),
            ));
        }
    }

    let mut samples = Vec::with_capacity(n_lexemes);
    for i in 0..n_lexemes {
        let class = i % n_classes;
        let stem: Vec<&str> = (0..stem_length)
            .map(|_| STEM_ALPHABET[rng.gen_range(0..STEM_ALPHABET.len())])
            .collect();
        let mut forms = IndexMap::with_capacity(n_cells);
        for (c, cell) in cells.iter().enumerate() {
            let mut source = class;
            if n_classes > 1 && rng.gen_bool(noise) {
                source = rng.gen_range(0..n_classes - 1);
                if source >= class {
                    source += 1;
                }
            }
            let segs: Vec<String> = stem
                .iter()
                .map(|s| s.to_string())
                .chain(suffixes[source][c].segments().iter().cloned())
                .collect();
            forms.insert(cell.clone(), SegmentedForm::new(segs));
        }
        samples.push(ParadigmSample {
            lexeme_id: format!("lex{i:05}"),
            forms,
            class_label: class_labels[class].clone(),
        });
    }
    Ok(SyntheticDataset {
        samples,
        cells,
        suffixes,
        class_labels,
    })
}
