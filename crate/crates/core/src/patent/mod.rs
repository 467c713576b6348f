//! Category forward-citation index: ingestion of patent and citation tables,
//! windowed citation counts, cohort normalization and success labelling.

mod index;

pub use index::{
    compute_index, forward_citation_counts, success_matrix, sweep_with_fits, threshold_sweep,
    write_sweep_csv, CitTable, IndexTable, SweepFit, SweepRow,
};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;

use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use thiserror::Error;

/// Default category set: CPC sections A–H.
pub const DEFAULT_CATEGORIES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

#[derive(Debug, Error)]
pub enum PatentError {
    #[error("{file} line {line}: {reason}")]
    Schema {
        file: &'static str,
        line: u64,
        reason: String,
    },
    #[error("{0}")]
    EmptyInput(String),
    #[error("{file}: {source}")]
    Csv {
        file: &'static str,
        source: csv::Error,
    },
    #[error("window length T must be at least 1 year")]
    InvalidWindow,
    #[error("category set is empty or has duplicates")]
    InvalidCategories,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatentRecord {
    pub id: String,
    pub pub_date: NaiveDate,
    pub pub_year: i32,
    /// Index into the category set.
    pub category: usize,
}

/// Validated patents (sorted by publication date, then id) and resolved
/// citations as `(citing, cited)` indices into the patent list.
#[derive(Debug, Clone, PartialEq)]
pub struct Tables {
    pub categories: Vec<String>,
    pub patents: Vec<PatentRecord>,
    pub citations: Vec<(usize, usize)>,
}

/// Counts of rows kept and dropped during ingestion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub patent_rows: u64,
    pub patents_kept: u64,
    pub duplicate_patents: u64,
    pub conflicting_duplicates: u64,
    pub bad_dates: u64,
    pub unknown_categories: u64,
    pub multi_category: u64,
    pub citation_rows: u64,
    pub citations_kept: u64,
    pub self_citations: u64,
    pub unresolvable_citations: u64,
    pub duplicate_citations: u64,
    pub warnings: Vec<String>,
}

fn check_header(
    file: &'static str,
    header: &csv::StringRecord,
    expected: &[&str],
) -> Result<(), PatentError> {
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(PatentError::Schema {
            file,
            line: 1,
            reason: format!("header must be {:?}, found {:?}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn csv_err(file: &'static str) -> impl Fn(csv::Error) -> PatentError {
    move |source| match source.kind() {
        csv::ErrorKind::UnequalLengths {
            pos: Some(pos),
            expected_len,
            len,
        } => PatentError::Schema {
            file,
            line: pos.line(),
            reason: format!("expected {expected_len} fields, found {len}"),
        },
        _ => PatentError::Csv { file, source },
    }
}

/// Parses `patents` (`id,pub_date,category`) and `citations`
/// (`citing_id,cited_id`). Malformed content rows are dropped and counted;
/// a wrong header or ragged row is a schema error.
///
/// A category field listing several labels (separated by `;`, `|` or
/// whitespace) keeps the first one.
pub fn ingest<P: Read, C: Read>(
    patents: P,
    citations: C,
    categories: &[String],
) -> Result<(Tables, IngestReport), PatentError> {
    let unique: HashSet<&String> = categories.iter().collect();
    if categories.is_empty() || unique.len() != categories.len() {
        return Err(PatentError::InvalidCategories);
    }
    let mut report = IngestReport::default();
    let cat_index: HashMap<&str, usize> = categories
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    let mut reader = csv::ReaderBuilder::new().from_reader(patents);
    check_header("patents", reader.headers().map_err(csv_err("patents"))?, &["id", "pub_date", "category"])?;
    let mut by_id: BTreeMap<String, PatentRecord> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err("patents"))?;
        let line = rec.position().map_or(0, |p| p.line());
        report.patent_rows += 1;
        let id = rec[0].trim().to_string();
        if id.is_empty() {
            return Err(PatentError::Schema {
                file: "patents",
                line,
                reason: "empty id".into(),
            });
        }
        let Ok(pub_date) = NaiveDate::parse_from_str(rec[1].trim(), "%Y-%m-%d") else {
            report.bad_dates += 1;
            continue;
        };
        let labels: Vec<&str> = rec[2]
            .split(|c: char| c == ';' || c == '|' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if labels.len() > 1 {
            report.multi_category += 1;
            report.warnings.push(format!(
                "patents line {line}: patent {id} lists several categories; using {}",
                labels[0]
            ));
        }
        let Some(&category) = labels.first().and_then(|l| cat_index.get(l)) else {
            report.unknown_categories += 1;
            continue;
        };
        let record = PatentRecord {
            id: id.clone(),
            pub_date,
            pub_year: pub_date.year(),
            category,
        };
        match by_id.get(&id) {
            Some(existing) if *existing == record => report.duplicate_patents += 1,
            Some(_) => {
                report.conflicting_duplicates += 1;
                report.warnings.push(format!(
                    "patents line {line}: conflicting duplicate of patent {id} dropped"
                ));
            }
            None => {
                by_id.insert(id, record);
            }
        }
    }
    if by_id.is_empty() {
        return Err(PatentError::EmptyInput("no valid patent records".into()));
    }
    let mut patents: Vec<PatentRecord> = by_id.into_values().collect();
    patents.sort_by(|a, b| a.pub_date.cmp(&b.pub_date).then_with(|| a.id.cmp(&b.id)));
    report.patents_kept = patents.len() as u64;
    let position: HashMap<&str, usize> = patents
        .iter()
        .enumerate()
        .map(|(i, p)| (p.id.as_str(), i))
        .collect();

    let mut reader = csv::ReaderBuilder::new().from_reader(citations);
    check_header("citations", reader.headers().map_err(csv_err("citations"))?, &["citing_id", "cited_id"])?;
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut resolved = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err("citations"))?;
        report.citation_rows += 1;
        let (citing, cited) = (rec[0].trim(), rec[1].trim());
        if citing == cited {
            report.self_citations += 1;
            continue;
        }
        let (Some(&a), Some(&b)) = (position.get(citing), position.get(cited)) else {
            report.unresolvable_citations += 1;
            continue;
        };
        if seen.insert((a, b)) {
            resolved.push((a, b));
        } else {
            report.duplicate_citations += 1;
        }
    }
    resolved.sort_unstable();
    report.citations_kept = resolved.len() as u64;
    if resolved.is_empty() {
        report
            .warnings
            .push("no usable citations; every index will be zero".into());
    }
    Ok((
        Tables {
            categories: categories.to_vec(),
            patents,
            citations: resolved,
        },
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cats() -> Vec<String> {
        vec!["A".into(), "B".into()]
    }

    #[test]
    fn filtering_and_report() {
        let patents = "id,pub_date,category\n\
            P1,2000-01-10,A\n\
            P2,2000-04-19,A\n\
            P2,2000-04-19,A\n\
            P3,2000-13-01,B\n\
            P4,2000-02-01,Y\n\
            P5,2001-03-01,B;A\n";
        let citations = "citing_id,cited_id\nP2,P1\nP2,P1\nP5,P5\nP5,P9\nP5,P2\n";
        let (t, r) = ingest(patents.as_bytes(), citations.as_bytes(), &cats()).unwrap();
        assert_eq!(
            t.patents.iter().map(|p| p.id.as_str()).collect::<Vec<_>>(),
            vec!["P1", "P2", "P5"]
        );
        assert_eq!(t.patents[2].category, 1);
        assert_eq!(t.citations, vec![(1, 0), (2, 1)]);
        assert_eq!(r.duplicate_patents, 1);
        assert_eq!(r.bad_dates, 1);
        assert_eq!(r.unknown_categories, 1);
        assert_eq!(r.multi_category, 1);
        assert_eq!(r.self_citations, 1);
        assert_eq!(r.unresolvable_citations, 1);
        assert_eq!(r.duplicate_citations, 1);
        assert_eq!(r.citations_kept, 2);
    }

    #[test]
    fn ties_on_date_ordered_by_id() {
        let patents = "id,pub_date,category\nb,2000-01-01,A\na,2000-01-01,B\n";
        let (t, _) = ingest(patents.as_bytes(), "citing_id,cited_id\n".as_bytes(), &cats()).unwrap();
        assert_eq!(t.patents[0].id, "a");
    }

    #[test]
    fn schema_errors() {
        let bad = ingest(
            "id,date,category\n".as_bytes(),
            "citing_id,cited_id\n".as_bytes(),
            &cats(),
        );
        assert!(matches!(bad, Err(PatentError::Schema { line: 1, .. })));
        let ragged = ingest(
            "id,pub_date,category\nP1,2000-01-01\n".as_bytes(),
            "citing_id,cited_id\n".as_bytes(),
            &cats(),
        );
        assert!(matches!(ragged, Err(PatentError::Schema { line: 2, .. })));
        let empty = ingest(
            "id,pub_date,category\n".as_bytes(),
            "citing_id,cited_id\n".as_bytes(),
            &cats(),
        );
        assert!(matches!(empty, Err(PatentError::EmptyInput(_))));
    }
}
