//! Instance ingestion: LIBSVM sparse text and dense CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::synthetic::{generate, SyntheticSpec};
use crate::error::{Error, Result};
use crate::matrix::Design;

/// A design matrix with its response (or labels, for classification data).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub a: Design,
    pub y: Vec<f64>,
}

impl Dataset {
    /// Rescales every nonzero column of `A` to unit Euclidean norm.
    pub fn normalize_columns(&mut self) {
        let factors: Vec<f64> = self
            .a
            .col_norms()
            .into_iter()
            .map(|c| if c > 0.0 { 1.0 / c } else { 1.0 })
            .collect();
        self.a.scale_cols(&factors).expect("one factor per column");
    }

    /// `diag(b)·A` with `b = ±1`: positive responses map to `+1`, the rest to `−1`
    /// (so `{0, 1}` labels become `{−1, +1}`).
    pub fn fold_labels(&self) -> Design {
        let signs: Vec<f64> = self
            .y
            .iter()
            .map(|&v| if v > 0.0 { 1.0 } else { -1.0 })
            .collect();
        let mut a = self.a.clone();
        a.scale_rows(&signs).expect("one label per row");
        a
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSource {
    /// `n_features` pads the column count beyond the largest observed index.
    Libsvm {
        path: PathBuf,
        n_features: Option<usize>,
    },
    /// Header row, last column is the response.
    Csv {
        path: PathBuf,
    },
    Synthetic(SyntheticSpec),
}

pub fn load_instance(src: &InstanceSource) -> Result<Dataset> {
    match src {
        InstanceSource::Libsvm { path, n_features } => {
            parse_libsvm(BufReader::new(open(path)?), *n_features)
        }
        InstanceSource::Csv { path } => parse_csv(open(path)?),
        InstanceSource::Synthetic(spec) => generate(spec),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn parse_number(tok: &str, line: usize) -> Result<f64> {
    let normalized = tok.replace('\u{2212}', "-");
    let v: f64 = normalized.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid number `{tok}`"),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse {
            line,
            message: format!("non-finite value `{tok}`"),
        })
    }
}

/// LIBSVM format: `label idx:value ...` with 1-based, increasing indices.
/// Blank lines and `#` comments are skipped.
pub fn parse_libsvm<R: BufRead>(reader: R, n_features: Option<usize>) -> Result<Dataset> {
    let mut triplets = Vec::new();
    let mut labels = Vec::new();
    let mut max_col = 0usize;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let label = parse_number(toks.next().expect("nonempty line"), lineno)?;
        let row = labels.len();
        labels.push(label);
        let mut last = 0usize;
        for tok in toks {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected index:value, got `{tok}`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid feature index `{idx}`"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    message: "feature indices are 1-based".into(),
                });
            }
            if idx <= last {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("feature index {idx} is not increasing"),
                });
            }
            last = idx;
            max_col = max_col.max(idx);
            triplets.push((row, idx - 1, parse_number(val, lineno)?));
        }
    }
    if labels.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no samples".into(),
        });
    }
    let cols = match n_features {
        Some(n) if n < max_col => {
            return Err(Error::InvalidParameter(format!(
                "file uses feature {max_col} but n_features = {n}"
            )))
        }
        Some(n) => n,
        None => max_col,
    };
    if cols == 0 {
        return Err(Error::Parse {
            line: 0,
            message: "no features".into(),
        });
    }
    let a = Design::from_triplets_auto(labels.len(), cols, &triplets)?;
    Ok(Dataset { a, y: labels })
}

/// Dense CSV with a header row; the last column is the response.
pub fn parse_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let width = rdr.headers()?.len();
    if width < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "need at least one feature column and a response column".into(),
        });
    }
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let vals = rec
            .iter()
            .map(|t| parse_number(t, line))
            .collect::<Result<Vec<f64>>>()?;
        let (resp, feats) = vals.split_last().expect("width checked");
        y.push(*resp);
        rows.push(feats.to_vec());
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    let (m, n) = (rows.len(), width - 1);
    let mut data = vec![0.0; m * n];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            data[j * m + i] = v;
        }
    }
    Ok(Dataset {
        a: Design::from_dense_auto(m, n, data)?,
        y,
    })
}
