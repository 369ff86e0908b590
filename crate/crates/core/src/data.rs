//! Labelled datasets and the CSV exchange format.
//!
//! CSV grammar: UTF-8, comma separated, one observation per line, an optional
//! header line, the class label in one designated column (the first by
//! default) and decimal floats in every other column. Lines starting with `#`
//! are comments. Empty fields are rejected as missing values.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
    class_rows: Vec<Vec<usize>>,
}

impl Dataset {
    /// Builds a dataset from features and per-row class indices into `class_names`.
    ///
    /// Every class must appear at least once.
    pub fn new(features: Matrix, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::LengthMismatch {
                left: features.rows(),
                right: labels.len(),
            });
        }
        if features.rows() == 0 {
            return Err(Error::EmptyInput);
        }
        if !features.all_finite() {
            return Err(Error::InvalidParameter("features must be finite".into()));
        }
        let mut class_rows = vec![Vec::new(); class_names.len()];
        for (i, &k) in labels.iter().enumerate() {
            let rows = class_rows.get_mut(k).ok_or_else(|| {
                Error::InvalidParameter(format!("label index {k} out of range for {} classes", class_names.len()))
            })?;
            rows.push(i);
        }
        if let Some(k) = class_rows.iter().position(|r| r.is_empty()) {
            return Err(Error::InvalidParameter(format!("class '{}' has no samples", class_names[k])));
        }
        Ok(Dataset {
            features,
            labels,
            class_names,
            class_rows,
        })
    }

    /// Builds a dataset from string labels; classes are ordered by first appearance.
    pub fn from_named(features: Matrix, names: &[String]) -> Result<Self> {
        let mut class_names: Vec<String> = Vec::new();
        let labels = names
            .iter()
            .map(|n| match class_names.iter().position(|c| c == n) {
                Some(k) => k,
                None => {
                    class_names.push(n.clone());
                    class_names.len() - 1
                }
            })
            .collect();
        Dataset::new(features, labels, class_names)
    }

    /// Stacks per-class blocks of rows; class `k` is named `names[k]`.
    pub fn from_class_blocks(blocks: Vec<Matrix>, names: Vec<String>) -> Result<Self> {
        let p = blocks.first().map_or(0, |b| b.cols());
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (k, b) in blocks.iter().enumerate() {
            if b.cols() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: b.cols(),
                });
            }
            data.extend_from_slice(b.as_slice());
            labels.extend(std::iter::repeat_n(k, b.rows()));
        }
        let n = labels.len();
        Dataset::new(Matrix::from_vec(n, p, data)?, labels, names)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.features.rows()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Row indices of class `k`, in dataset order.
    pub fn class_rows(&self, k: usize) -> &[usize] {
        &self.class_rows[k]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.class_rows.iter().map(Vec::len).collect()
    }

    /// Rows of class `k` as a matrix.
    pub fn class_matrix(&self, k: usize) -> Matrix {
        self.features.select_rows(&self.class_rows[k])
    }

    /// The dataset with row `i` removed. Fails if that empties a class.
    pub fn without_row(&self, i: usize) -> Result<Dataset> {
        let keep: Vec<usize> = (0..self.n()).filter(|&r| r != i).collect();
        let labels = keep.iter().map(|&r| self.labels[r]).collect();
        Dataset::new(self.features.select_rows(&keep), labels, self.class_names.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Zero-based index of the label column.
    pub label_col: usize,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: true,
            label_col: 0,
        }
    }
}

pub fn ingest_csv(path: impl AsRef<Path>, options: CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(file, options)
}

pub fn read_csv<R: Read>(reader: R, options: CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut width: Option<usize> = None;
    let mut values = Vec::new();
    let mut names = Vec::new();
    if options.has_header {
        let header = rdr.headers().map_err(csv_error)?;
        if !header.is_empty() {
            width = Some(header.len());
        }
    }
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::InconsistentWidth {
                line,
                expected: w,
                found: record.len(),
            });
        }
        if options.label_col >= w {
            return Err(Error::ParseError {
                line,
                column: options.label_col + 1,
                message: format!("label column {} beyond row width {w}", options.label_col + 1),
            });
        }
        for (c, field) in record.iter().enumerate() {
            if field.is_empty() || field.eq_ignore_ascii_case("na") || field.eq_ignore_ascii_case("nan") {
                return Err(Error::MissingValue { line, column: c + 1 });
            }
            if c == options.label_col {
                names.push(field.to_string());
            } else {
                let v: f64 = field.parse().map_err(|_| Error::ParseError {
                    line,
                    column: c + 1,
                    message: format!("'{field}' is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::ParseError {
                        line,
                        column: c + 1,
                        message: format!("'{field}' is not finite"),
                    });
                }
                values.push(v);
            }
        }
    }
    let n = names.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let p = width.unwrap_or(1) - 1;
    Dataset::from_named(Matrix::from_vec(n, p, values)?, &names)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        csv::ErrorKind::Utf8 { err, .. } => Error::ParseError {
            line,
            column: err.field() + 1,
            message: "invalid UTF-8".into(),
        },
        _ => Error::ParseError {
            line,
            column: 0,
            message: e.to_string(),
        },
    }
}

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a dataset with a `label,f1,...,fp` header. `comments` become
/// leading `# ` lines.
pub fn write_csv<W: Write>(mut w: W, data: &Dataset, comments: &[String]) -> Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    let mut header = String::from("label");
    for j in 1..=data.p() {
        header.push_str(&format!(",f{j}"));
    }
    writeln!(w, "{header}")?;
    let mut line = String::new();
    for i in 0..data.n() {
        line.clear();
        line.push_str(&data.class_names()[data.labels()[i]]);
        for v in data.features().row(i) {
            line.push(',');
            line.push_str(&format_f64(*v));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
