//! Column-typed observation tables and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Real,
    Count,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Real(Vec<f64>),
    Count(Vec<u64>),
    Categorical(CategoricalData),
}

impl Dataset {
    pub fn n_obs(&self) -> usize {
        match self {
            Dataset::Real(x) => x.len(),
            Dataset::Count(x) => x.len(),
            Dataset::Categorical(c) => c.n_obs(),
        }
    }

    pub fn kind(&self) -> DataKind {
        match self {
            Dataset::Real(_) => DataKind::Real,
            Dataset::Count(_) => DataKind::Count,
            Dataset::Categorical(_) => DataKind::Categorical,
        }
    }
}

/// An `N × Q` table of response codes. Codes for question `q` lie in
/// `0..cardinalities[q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalData {
    n_obs: usize,
    codes: Vec<u32>,
    cardinalities: Vec<u32>,
    names: Vec<String>,
    levels: Vec<Vec<String>>,
    missing: Vec<Option<u32>>,
}

impl CategoricalData {
    /// Builds a table from row-major codes. Level names default to the code
    /// values.
    pub fn from_codes(n_obs: usize, cardinalities: Vec<u32>, codes: Vec<u32>) -> Result<Self> {
        let q = cardinalities.len();
        if q == 0 {
            return Err(Error::data("categorical data needs at least one question"));
        }
        if codes.len() != n_obs * q {
            return Err(Error::data(format!(
                "expected {} codes for {n_obs} rows x {q} questions, got {}",
                n_obs * q,
                codes.len()
            )));
        }
        if let Some(&kq) = cardinalities.iter().find(|&&kq| kq == 0) {
            return Err(Error::data(format!("question cardinality {kq} must be positive")));
        }
        for (idx, &c) in codes.iter().enumerate() {
            let kq = cardinalities[idx % q];
            if c >= kq {
                return Err(Error::data(format!(
                    "code {c} in row {} question {} is outside 0..{kq}",
                    idx / q,
                    idx % q
                )));
            }
        }
        let names = (1..=q).map(|j| format!("q{j}")).collect();
        let levels = cardinalities
            .iter()
            .map(|&kq| (0..kq).map(|c| c.to_string()).collect())
            .collect();
        Ok(Self {
            n_obs,
            codes,
            cardinalities,
            names,
            levels,
            missing: vec![None; q],
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_questions() {
            return Err(Error::data("one name per question required"));
        }
        self.names = names;
        Ok(self)
    }

    #[inline]
    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    #[inline]
    pub fn n_questions(&self) -> usize {
        self.cardinalities.len()
    }

    #[inline]
    pub fn cardinalities(&self) -> &[u32] {
        &self.cardinalities
    }

    /// Responses of observation `i`, one code per question.
    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        let q = self.n_questions();
        &self.codes[i * q..(i + 1) * q]
    }

    #[inline]
    pub fn code(&self, i: usize, q: usize) -> u32 {
        self.codes[i * self.n_questions() + q]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Level strings per question, indexed by code.
    pub fn levels(&self) -> &[Vec<String>] {
        &self.levels
    }

    /// Code of the missing-data category for each question, if one was added.
    pub fn missing_codes(&self) -> &[Option<u32>] {
        &self.missing
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Treat the first row as a header. `None` auto-detects for numeric data
    /// (header iff the first cell does not parse) and assumes a header for
    /// categorical data.
    pub header: Option<bool>,
    /// Column to read for numeric data, by header name or 0-based index.
    pub column: Option<String>,
    /// Map missing cells to an extra response category.
    pub missing_as_category: bool,
    /// Cell value treated as missing, in addition to the empty cell.
    pub missing_sentinel: Option<String>,
}

pub fn ingest_path(path: impl AsRef<Path>, kind: DataKind, opts: &IngestOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| {
        Error::data(format!("cannot open {}: {e}", path.as_ref().display()))
    })?;
    ingest(file, kind, opts)
}

pub fn ingest<R: Read>(reader: R, kind: DataKind, opts: &IngestOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::data(format!("malformed CSV: {e}")))?;
        rows.push(rec.iter().map(str::to_owned).collect());
    }
    // Trailing blank lines
    while rows.last().is_some_and(|r| r.iter().all(String::is_empty)) {
        rows.pop();
    }
    if rows.is_empty() {
        return Err(Error::data("no rows"));
    }
    let width = rows[0].len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(Error::data(format!(
            "ragged row {}: {} cells, expected {width}",
            i + 1,
            r.len()
        )));
    }
    match kind {
        DataKind::Real | DataKind::Count => ingest_numeric(rows, kind, opts),
        DataKind::Categorical => ingest_categorical(rows, opts),
    }
}

fn is_missing(cell: &str, opts: &IngestOptions) -> bool {
    cell.is_empty() || opts.missing_sentinel.as_deref() == Some(cell)
}

fn ingest_numeric(mut rows: Vec<Vec<String>>, kind: DataKind, opts: &IngestOptions) -> Result<Dataset> {
    let header = match opts.header {
        Some(h) => h,
        None => rows[0].iter().any(|c| c.parse::<f64>().is_err()),
    };
    let names = if header { Some(rows.remove(0)) } else { None };
    let col = match &opts.column {
        None => 0,
        Some(c) => match c.parse::<usize>() {
            Ok(idx) => idx,
            Err(_) => names
                .as_ref()
                .and_then(|n| n.iter().position(|h| h == c))
                .ok_or_else(|| Error::data(format!("no column named {c:?}")))?,
        },
    };
    if rows.is_empty() {
        return Err(Error::data("no data rows"));
    }
    if col >= rows[0].len() {
        return Err(Error::data(format!("column {col} out of range")));
    }
    let offset = usize::from(header) + 1;
    let cells = rows.iter().enumerate().map(|(i, r)| (i + offset, r[col].as_str()));
    match kind {
        DataKind::Real => cells
            .map(|(line, c)| {
                if is_missing(c, opts) {
                    return Err(Error::data(format!("missing value on line {line}")));
                }
                let v: f64 = c
                    .parse()
                    .map_err(|_| Error::data(format!("unparseable number {c:?} on line {line}")))?;
                if !v.is_finite() {
                    return Err(Error::data(format!("non-finite value {c:?} on line {line}")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()
            .map(Dataset::Real),
        DataKind::Count => cells
            .map(|(line, c)| {
                if is_missing(c, opts) {
                    return Err(Error::data(format!("missing count on line {line}")));
                }
                let v: i64 = c
                    .parse()
                    .map_err(|_| Error::data(format!("unparseable count {c:?} on line {line}")))?;
                u64::try_from(v).map_err(|_| Error::data(format!("negative count {v} on line {line}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Dataset::Count),
        DataKind::Categorical => unreachable!(),
    }
}

fn ingest_categorical(mut rows: Vec<Vec<String>>, opts: &IngestOptions) -> Result<Dataset> {
    let q = rows[0].len();
    let names = if opts.header.unwrap_or(true) {
        rows.remove(0)
    } else {
        (1..=q).map(|j| format!("q{j}")).collect()
    };
    let n = rows.len();
    if n == 0 {
        return Err(Error::data("no data rows"));
    }
    let mut levels: Vec<Vec<String>> = vec![Vec::new(); q];
    let mut has_missing = vec![false; q];
    // First pass assigns codes to observed levels in order of appearance.
    let mut codes = vec![u32::MAX; n * q];
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if is_missing(cell, opts) {
                if !opts.missing_as_category {
                    return Err(Error::data(format!(
                        "missing value in row {} column {:?}; pass the missing-as-category option to keep it",
                        i + 1,
                        names[j]
                    )));
                }
                has_missing[j] = true;
                continue;
            }
            let code = match levels[j].iter().position(|l| l == cell) {
                Some(c) => c,
                None => {
                    levels[j].push(cell.clone());
                    levels[j].len() - 1
                }
            };
            codes[i * q + j] = code as u32;
        }
    }
    let mut missing = vec![None; q];
    for j in 0..q {
        if has_missing[j] {
            missing[j] = Some(levels[j].len() as u32);
            levels[j].push(String::new());
        }
        if levels[j].is_empty() {
            return Err(Error::data(format!("column {:?} has no responses", names[j])));
        }
    }
    for (idx, c) in codes.iter_mut().enumerate() {
        if *c == u32::MAX {
            *c = missing[idx % q].expect("missing cells only where a category was added");
        }
    }
    let cardinalities = levels.iter().map(|l| l.len() as u32).collect();
    Ok(Dataset::Categorical(CategoricalData {
        n_obs: n,
        codes,
        cardinalities,
        names,
        levels,
        missing,
    }))
}

/// Writes a dataset in the CSV form accepted by [`ingest`], with a header.
pub fn write_dataset<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    match data {
        Dataset::Real(x) => {
            w.write_record(["x"])?;
            for v in x {
                w.write_record([format!("{v:?}")])?;
            }
        }
        Dataset::Count(x) => {
            w.write_record(["x"])?;
            for v in x {
                w.write_record([v.to_string()])?;
            }
        }
        Dataset::Categorical(c) => {
            w.write_record(c.names())?;
            for i in 0..c.n_obs() {
                w.write_record(
                    c.row(i)
                        .iter()
                        .enumerate()
                        .map(|(q, &code)| c.levels()[q][code as usize].as_str()),
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
