//! Ordered binary success matrices `{x_{n,h}}`, produced either by the patent
//! index pipeline or by simulation, and their CSV format.
//!
//! CSV header: `id,pub_date,category,x_<label>...`, one row per observation in
//! sequence order. `category` is the row's own (source) category and may be
//! empty when it is unknown; `pub_date` may be empty for simulated rows.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SuccessMatrixError {
    #[error("success matrix CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("success matrix CSV: {0}")]
    Io(#[from] std::io::Error),
    #[error("success matrix CSV line {line}: {reason}")]
    Schema { line: u64, reason: String },
}

/// Identification of one row: patent id and publication date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowLabel {
    pub id: String,
    pub pub_date: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessMatrix {
    labels: Vec<String>,
    n_rows: usize,
    x: Vec<u8>,
    /// Source category of each row, as an index into `labels`.
    row_category: Option<Vec<usize>>,
    row_labels: Option<Vec<RowLabel>>,
    /// Threshold used to build the matrix, when it came from the index.
    pub tau: Option<f64>,
}

impl SuccessMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        Self {
            labels,
            n_rows: 0,
            x: Vec::new(),
            row_category: None,
            row_labels: None,
            tau: None,
        }
    }

    /// Default category labels `1..=n`.
    pub fn numbered(n: usize) -> Self {
        Self::new((1..=n).map(|i| i.to_string()).collect())
    }

    pub fn n_cols(&self) -> usize {
        self.labels.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Appends a row. `category` and `label` must be supplied consistently for
    /// every row or never.
    pub fn push_row(&mut self, x: &[bool], category: Option<usize>, label: Option<RowLabel>) {
        assert_eq!(x.len(), self.n_cols(), "row width");
        self.x.extend(x.iter().map(|&b| b as u8));
        match (category, &mut self.row_category) {
            (Some(c), Some(cats)) => cats.push(c),
            (Some(c), None) if self.n_rows == 0 => self.row_category = Some(vec![c]),
            (None, None) => {}
            _ => panic!("row categories must be given for all rows or none"),
        }
        match (label, &mut self.row_labels) {
            (Some(l), Some(ls)) => ls.push(l),
            (Some(l), None) if self.n_rows == 0 => self.row_labels = Some(vec![l]),
            (None, None) => {}
            _ => panic!("row labels must be given for all rows or none"),
        }
        self.n_rows += 1;
    }

    #[inline]
    pub fn row(&self, n: usize) -> &[u8] {
        let w = self.n_cols();
        &self.x[n * w..(n + 1) * w]
    }

    #[inline]
    pub fn get(&self, n: usize, h: usize) -> bool {
        self.x[n * self.n_cols() + h] != 0
    }

    pub fn row_categories(&self) -> Option<&[usize]> {
        self.row_category.as_deref()
    }

    pub fn row_labels(&self) -> Option<&[RowLabel]> {
        self.row_labels.as_deref()
    }

    /// Column totals `S_{n_rows,h}`.
    pub fn totals(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.n_cols()];
        for n in 0..self.n_rows {
            for (acc, &x) in s.iter_mut().zip(self.row(n)) {
                *acc += x as u64;
            }
        }
        s
    }

    /// Cumulative counts `S_t` at each requested `t` (sorted, `1 ≤ t ≤ n_rows`),
    /// and the source-split counts `S_{t,k,h}` when row categories are known.
    pub fn cumulative_at(&self, ts: &[u64]) -> Vec<CumulativeCounts> {
        let w = self.n_cols();
        let mut out = Vec::with_capacity(ts.len());
        let mut counts = vec![0u64; w];
        let mut split = self.row_category.as_ref().map(|_| vec![0u64; w * w]);
        let mut row = 0usize;
        for &t in ts {
            let t = (t as usize).min(self.n_rows);
            while row < t {
                let x = self.row(row);
                for (acc, &b) in counts.iter_mut().zip(x) {
                    *acc += b as u64;
                }
                if let (Some(split), Some(cats)) = (split.as_mut(), self.row_category.as_ref()) {
                    let k = cats[row];
                    for (h, &b) in x.iter().enumerate() {
                        split[k * w + h] += b as u64;
                    }
                }
                row += 1;
            }
            out.push(CumulativeCounts {
                t: t as u64,
                counts: counts.clone(),
                split: split.clone(),
            });
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SuccessMatrixError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "pub_date".into(), "category".into()];
        header.extend(self.labels.iter().map(|l| format!("x_{l}")));
        w.write_record(&header)?;
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for n in 0..self.n_rows {
            record.clear();
            match &self.row_labels {
                Some(ls) => {
                    record.push(ls[n].id.clone());
                    record.push(ls[n].pub_date.clone());
                }
                None => {
                    record.push((n + 1).to_string());
                    record.push(String::new());
                }
            }
            record.push(
                self.row_category
                    .as_ref()
                    .map(|c| self.labels[c[n]].clone())
                    .unwrap_or_default(),
            );
            record.extend(self.row(n).iter().map(|b| b.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, SuccessMatrixError> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let fixed = ["id", "pub_date", "category"];
        for (i, name) in fixed.iter().enumerate() {
            if header.get(i) != Some(name) {
                return Err(SuccessMatrixError::Schema {
                    line: 1,
                    reason: format!("expected column {} to be {name:?}", i + 1),
                });
            }
        }
        let labels: Vec<String> = header
            .iter()
            .skip(3)
            .map(|h| {
                h.strip_prefix("x_").map(str::to_string).ok_or_else(|| {
                    SuccessMatrixError::Schema {
                        line: 1,
                        reason: format!("category column {h:?} must start with \"x_\""),
                    }
                })
            })
            .collect::<Result<_, _>>()?;
        if labels.is_empty() {
            return Err(SuccessMatrixError::Schema {
                line: 1,
                reason: "no x_ columns".into(),
            });
        }
        let mut m = SuccessMatrix::new(labels);
        let mut all_categories = true;
        let mut rows: Vec<(Vec<bool>, Option<usize>, RowLabel)> = Vec::new();
        for record in r.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let category = record.get(2).unwrap_or("");
            let cat_idx = if category.is_empty() {
                all_categories = false;
                None
            } else {
                let idx = m.labels.iter().position(|l| l == category).ok_or_else(|| {
                    SuccessMatrixError::Schema {
                        line,
                        reason: format!("unknown category {category:?}"),
                    }
                })?;
                Some(idx)
            };
            let x = record
                .iter()
                .skip(3)
                .map(|v| match v.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(SuccessMatrixError::Schema {
                        line,
                        reason: format!("entry {other:?} is not 0 or 1"),
                    }),
                })
                .collect::<Result<Vec<bool>, _>>()?;
            let label = RowLabel {
                id: record.get(0).unwrap_or("").to_string(),
                pub_date: record.get(1).unwrap_or("").to_string(),
            };
            rows.push((x, cat_idx, label));
        }
        let keep_labels = rows.iter().any(|(_, _, l)| !l.pub_date.is_empty());
        for (x, cat, label) in rows {
            m.push_row(
                &x,
                if all_categories { cat } else { None },
                keep_labels.then_some(label),
            );
        }
        Ok(m)
    }
}

/// Cumulative counts at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeCounts {
    pub t: u64,
    pub counts: Vec<u64>,
    /// Row-major `N×N`, entry `(k, h)` = successes in target `h` among rows
    /// whose own category is `k`.
    pub split: Option<Vec<u64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SuccessMatrix {
        let mut m = SuccessMatrix::new(vec!["A".into(), "B".into()]);
        m.push_row(&[true, false], Some(0), None);
        m.push_row(&[true, true], Some(1), None);
        m.push_row(&[false, true], Some(1), None);
        m
    }

    #[test]
    fn cumulative_and_split() {
        let m = sample();
        let c = m.cumulative_at(&[1, 3]);
        assert_eq!(c[0].counts, vec![1, 0]);
        assert_eq!(c[1].counts, vec![2, 2]);
        // (k=A,h=A)=1, (A,B)=0, (B,A)=1, (B,B)=2
        assert_eq!(c[1].split.as_ref().unwrap(), &vec![1, 0, 1, 2]);
        assert_eq!(m.totals(), vec![2, 2]);
    }

    #[test]
    fn csv_roundtrip() {
        let m = sample();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,pub_date,category,x_A,x_B\n1,,A,1,0\n"));
        let back = SuccessMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_entries() {
        let bad = "id,pub_date,category,x_A\n1,,A,2\n";
        assert!(matches!(
            SuccessMatrix::read_csv(bad.as_bytes()),
            Err(SuccessMatrixError::Schema { line: 2, .. })
        ));
        let bad_header = "id,date,category,x_A\n";
        assert!(SuccessMatrix::read_csv(bad_header.as_bytes()).is_err());
    }
}
