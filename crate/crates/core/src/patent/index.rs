use std::collections::HashMap;
use std::io::Write;

use chrono::Days;
use serde::Serialize;

use super::{PatentError, Tables};
use crate::estimate::{fit_heaps, subsample, CountSource};
use crate::success::{RowLabel, SuccessMatrix};

/// `CIT_{n,h}` for every patent (in table order) and target category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitTable {
    pub n_categories: usize,
    pub window_years: u32,
    /// Row-major `patents × categories`.
    pub counts: Vec<u32>,
}

impl CitTable {
    pub fn get(&self, patent: usize, h: usize) -> u32 {
        self.counts[patent * self.n_categories + h]
    }
}

/// Citations received by each patent from category-`h` patents published in
/// `[d_n, d_n + 365·T days]` (both ends inclusive).
pub fn forward_citation_counts(tables: &Tables, window_years: u32) -> Result<CitTable, PatentError> {
    if window_years == 0 {
        return Err(PatentError::InvalidWindow);
    }
    let k = tables.categories.len();
    let mut counts = vec![0u32; tables.patents.len() * k];
    let window = Days::new(365 * window_years as u64);
    for &(citing, cited) in &tables.citations {
        let src = &tables.patents[citing];
        let dst = &tables.patents[cited];
        let end = dst.pub_date.checked_add_days(window).unwrap_or(chrono::NaiveDate::MAX);
        if src.pub_date >= dst.pub_date && src.pub_date <= end {
            counts[cited * k + src.category] += 1;
        }
    }
    Ok(CitTable {
        n_categories: k,
        window_years,
        counts,
    })
}

/// `I_{n,h} = CIT_{n,h} / max_{i ∈ cohort(n)} CIT_{i,h}`, cohort keyed by
/// `(publication year, category)` of `n`; zero when the cohort max is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexTable {
    pub cit: CitTable,
    /// Row-major `patents × categories`.
    pub index: Vec<f64>,
    /// `(pub_year, category)` of each patent.
    pub cohorts: Vec<(i32, usize)>,
}

impl IndexTable {
    pub fn get(&self, patent: usize, h: usize) -> f64 {
        self.index[patent * self.cit.n_categories + h]
    }

    pub fn n_patents(&self) -> usize {
        self.cohorts.len()
    }

    /// CSV: `id,pub_date,category,cohort_year,cit_<h>...,index_<h>...`.
    pub fn write_csv<W: Write>(&self, tables: &Tables, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![
            "id".to_string(),
            "pub_date".into(),
            "category".into(),
            "cohort_year".into(),
        ];
        header.extend(tables.categories.iter().map(|c| format!("cit_{c}")));
        header.extend(tables.categories.iter().map(|c| format!("index_{c}")));
        w.write_record(&header)?;
        let k = self.cit.n_categories;
        for (n, p) in tables.patents.iter().enumerate() {
            let mut rec = vec![
                p.id.clone(),
                p.pub_date.to_string(),
                tables.categories[p.category].clone(),
                p.pub_year.to_string(),
            ];
            rec.extend((0..k).map(|h| self.cit.get(n, h).to_string()));
            rec.extend((0..k).map(|h| self.get(n, h).to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn compute_index(tables: &Tables, cit: CitTable) -> IndexTable {
    let k = cit.n_categories;
    let cohorts: Vec<(i32, usize)> = tables
        .patents
        .iter()
        .map(|p| (p.pub_year, p.category))
        .collect();
    let mut max: HashMap<(i32, usize), Vec<u32>> = HashMap::new();
    for (n, key) in cohorts.iter().enumerate() {
        let m = max.entry(*key).or_insert_with(|| vec![0; k]);
        for h in 0..k {
            m[h] = m[h].max(cit.get(n, h));
        }
    }
    let index = cohorts
        .iter()
        .enumerate()
        .flat_map(|(n, key)| {
            let m = &max[key];
            let cit = &cit;
            (0..k).map(move |h| {
                if m[h] == 0 {
                    0.0
                } else {
                    cit.get(n, h) as f64 / m[h] as f64
                }
            })
        })
        .collect();
    IndexTable {
        cit,
        index,
        cohorts,
    }
}

/// `x_{n,h} = 1` iff `I_{n,h} > τ`, rows in table order (publication date,
/// then id), with each patent's own category recorded for split counts.
pub fn success_matrix(tables: &Tables, index: &IndexTable, tau: f64) -> SuccessMatrix {
    let k = tables.categories.len();
    let mut m = SuccessMatrix::new(tables.categories.clone());
    let mut row = vec![false; k];
    for (n, p) in tables.patents.iter().enumerate() {
        for (h, x) in row.iter_mut().enumerate() {
            *x = index.get(n, h) > tau;
        }
        m.push_row(
            &row,
            Some(p.category),
            Some(RowLabel {
                id: p.id.clone(),
                pub_date: p.pub_date.to_string(),
            }),
        );
    }
    m.tau = Some(tau);
    m
}

/// Common-slope fit of the success matrix built at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFit {
    pub common_slope: f64,
    pub r2_common: f64,
    pub r2_free: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    /// `100·|{n : I_{n,h} > τ}| / |patents|` per category.
    pub exceedance_pct: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<SweepFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
}

pub fn threshold_sweep(index: &IndexTable, taus: &[f64]) -> Vec<SweepRow> {
    let k = index.cit.n_categories;
    let total = index.n_patents() as f64;
    taus.iter()
        .map(|&tau| SweepRow {
            tau,
            exceedance_pct: (0..k)
                .map(|h| {
                    let above = (0..index.n_patents()).filter(|&n| index.get(n, h) > tau).count();
                    100.0 * above as f64 / total
                })
                .collect(),
            fit: None,
            fit_error: None,
        })
        .collect()
}

/// [`threshold_sweep`] plus a Heaps fit (subsample of `size` points) of the
/// success matrix at each threshold. Thresholds whose matrix cannot be fitted
/// carry the reason in `fit_error`.
pub fn sweep_with_fits(tables: &Tables, index: &IndexTable, taus: &[f64], size: usize) -> Vec<SweepRow> {
    let mut rows = threshold_sweep(index, taus);
    for row in &mut rows {
        let m = success_matrix(tables, index, row.tau);
        match subsample(CountSource::Matrix(&m), size).and_then(|s| fit_heaps(&s)) {
            Ok(f) => {
                row.fit = Some(SweepFit {
                    common_slope: f.common_slope,
                    r2_common: f.r2_common,
                    r2_free: f.r2_free,
                })
            }
            Err(e) => row.fit_error = Some(e.to_string()),
        }
    }
    rows
}

/// CSV: `tau,pct_<h>...[,common_slope,r2_common,r2_free]`.
pub fn write_sweep_csv<W: Write>(
    rows: &[SweepRow],
    categories: &[String],
    writer: W,
) -> Result<(), csv::Error> {
    let with_fits = rows.iter().any(|r| r.fit.is_some() || r.fit_error.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["tau".to_string()];
    header.extend(categories.iter().map(|c| format!("pct_{c}")));
    if with_fits {
        header.extend(["common_slope".into(), "r2_common".into(), "r2_free".into()]);
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.tau.to_string()];
        rec.extend(r.exceedance_pct.iter().map(f64::to_string));
        if with_fits {
            match &r.fit {
                Some(f) => rec.extend([
                    f.common_slope.to_string(),
                    f.r2_common.to_string(),
                    f.r2_free.to_string(),
                ]),
                None => rec.extend([String::new(), String::new(), String::new()]),
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
