use proptest::prelude::*;
use reinforced_core::patent::{
    compute_index, forward_citation_counts, ingest, success_matrix, threshold_sweep,
    write_sweep_csv, Tables,
};

const PATENTS: &str = "\
id,pub_date,category
P1,2000-01-10,A
P2,2000-04-19,A
P3,2005-07-02,B
P4,2000-07-03,B
P5,2001-03-01,A;B
P6,2000-05-05,Y
P7,2000-02-30,A
P2,2000-04-19,A
";

// P3 cites P4 exactly 1825 days after P4's publication (counted) and cites P1
// after P1's window closed on 2005-01-09 (not counted).
const CITATIONS: &str = "\
citing_id,cited_id
P2,P1
P3,P1
P4,P1
P5,P1
P5,P2
P3,P4
P5,P4
P1,P4
P5,P5
P4,P9
P2,P1
";

fn cats() -> Vec<String> {
    vec!["A".into(), "B".into()]
}

fn golden() -> Tables {
    ingest(PATENTS.as_bytes(), CITATIONS.as_bytes(), &cats()).unwrap().0
}

#[test]
fn golden_report() {
    let (_, r) = ingest(PATENTS.as_bytes(), CITATIONS.as_bytes(), &cats()).unwrap();
    assert_eq!(r.patent_rows, 8);
    assert_eq!(r.patents_kept, 5);
    assert_eq!(r.duplicate_patents, 1);
    assert_eq!(r.bad_dates, 1);
    assert_eq!(r.unknown_categories, 1);
    assert_eq!(r.multi_category, 1);
    assert_eq!(r.citation_rows, 11);
    assert_eq!(r.self_citations, 1);
    assert_eq!(r.unresolvable_citations, 1);
    assert_eq!(r.duplicate_citations, 1);
    assert_eq!(r.citations_kept, 8);
}

#[test]
fn golden_index_table() {
    let t = golden();
    let idx = compute_index(&t, forward_citation_counts(&t, 5).unwrap());
    let mut buf = Vec::new();
    idx.write_csv(&t, &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "id,pub_date,category,cohort_year,cit_A,cit_B,index_A,index_B\n\
         P1,2000-01-10,A,2000,2,1,1,1\n\
         P2,2000-04-19,A,2000,1,0,0.5,0\n\
         P4,2000-07-03,B,2000,1,1,1,1\n\
         P5,2001-03-01,A,2001,0,0,0,0\n\
         P3,2005-07-02,B,2005,0,0,0,0\n"
    );
}

#[test]
fn golden_success_matrix() {
    let t = golden();
    let idx = compute_index(&t, forward_citation_counts(&t, 5).unwrap());
    let mut buf = Vec::new();
    success_matrix(&t, &idx, 0.8).write_csv(&mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "id,pub_date,category,x_A,x_B\n\
         P1,2000-01-10,A,1,1\n\
         P2,2000-04-19,A,0,0\n\
         P4,2000-07-03,B,1,1\n\
         P5,2001-03-01,A,0,0\n\
         P3,2005-07-02,B,0,0\n"
    );
}

#[test]
fn golden_sweep() {
    let t = golden();
    let idx = compute_index(&t, forward_citation_counts(&t, 5).unwrap());
    let taus: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let rows = threshold_sweep(&idx, &taus);
    for r in &rows {
        let a = if r.tau < 0.5 { 60.0 } else { 40.0 };
        assert_eq!(r.exceedance_pct, vec![a, 40.0], "tau={}", r.tau);
    }
    let mut buf = Vec::new();
    write_sweep_csv(&rows[..2], &t.categories, &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "tau,pct_A,pct_B\n0.1,60,40\n0.2,60,40\n"
    );
}

#[test]
fn empty_citations_give_zero_matrix_and_warning() {
    let (t, r) = ingest(PATENTS.as_bytes(), "citing_id,cited_id\n".as_bytes(), &cats()).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("no usable citations")));
    let idx = compute_index(&t, forward_citation_counts(&t, 5).unwrap());
    let m = success_matrix(&t, &idx, 0.0);
    assert_eq!(m.totals(), vec![0, 0]);
}

#[test]
fn deterministic_under_row_shuffles() {
    let shuffled_patents: String = {
        let mut lines: Vec<&str> = PATENTS.lines().collect();
        lines[1..].reverse();
        lines.join("\n")
    };
    let shuffled_citations: String = {
        let mut lines: Vec<&str> = CITATIONS.lines().collect();
        lines[1..].reverse();
        lines.join("\n")
    };
    let csv = |p: &str, c: &str| {
        let t = ingest(p.as_bytes(), c.as_bytes(), &cats()).unwrap().0;
        let idx = compute_index(&t, forward_citation_counts(&t, 5).unwrap());
        let mut buf = Vec::new();
        success_matrix(&t, &idx, 0.3).write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(csv(PATENTS, CITATIONS), csv(&shuffled_patents, &shuffled_citations));
}

#[derive(Debug, Clone)]
struct Corpus {
    patents: Vec<(u32, u32, usize)>,
    citations: Vec<(usize, usize)>,
}

impl Corpus {
    fn patents_csv(&self, only: Option<usize>) -> String {
        let mut s = String::from("id,pub_date,category\n");
        for (i, &(year, day, cat)) in self.patents.iter().enumerate() {
            if only.is_some_and(|h| h != cat) {
                continue;
            }
            let date = chrono::NaiveDate::from_yo_opt(year as i32, day).unwrap();
            s.push_str(&format!("Q{i},{date},{}\n", ["A", "B", "C"][cat]));
        }
        s
    }

    fn citations_csv(&self) -> String {
        let mut s = String::from("citing_id,cited_id\n");
        for &(a, b) in &self.citations {
            s.push_str(&format!("Q{a},Q{b}\n"));
        }
        s
    }
}

fn corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec((2000u32..2006, 1u32..366, 0usize..3), 2..40).prop_flat_map(|patents| {
        let n = patents.len();
        prop::collection::vec((0..n, 0..n), 0..120)
            .prop_map(move |citations| Corpus {
                patents: patents.clone(),
                citations,
            })
    })
}

fn three() -> Vec<String> {
    vec!["A".into(), "B".into(), "C".into()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn restriction_invariance(c in corpus(), h in 0usize..3, window in 1u32..6) {
        let full = ingest(c.patents_csv(None).as_bytes(), c.citations_csv().as_bytes(), &three()).unwrap().0;
        let full_idx = compute_index(&full, forward_citation_counts(&full, window).unwrap());
        let restricted_csv = c.patents_csv(Some(h));
        prop_assume!(restricted_csv.lines().count() > 1);
        let sub = ingest(restricted_csv.as_bytes(), c.citations_csv().as_bytes(), &three()).unwrap().0;
        let sub_idx = compute_index(&sub, forward_citation_counts(&sub, window).unwrap());
        for (i, p) in sub.patents.iter().enumerate() {
            let j = full.patents.iter().position(|q| q.id == p.id).unwrap();
            prop_assert_eq!(sub_idx.get(i, h), full_idx.get(j, h));
            prop_assert_eq!(sub_idx.cit.get(i, h), full_idx.cit.get(j, h));
        }
    }

    #[test]
    fn index_bounds_and_cohort_max(c in corpus()) {
        let t = ingest(c.patents_csv(None).as_bytes(), c.citations_csv().as_bytes(), &three()).unwrap().0;
        let idx = compute_index(&t, forward_citation_counts(&t, 5).unwrap());
        for h in 0..3 {
            for n in 0..t.patents.len() {
                let v = idx.get(n, h);
                prop_assert!((0.0..=1.0).contains(&v));
                let cohort: Vec<usize> = (0..t.patents.len()).filter(|&m| idx.cohorts[m] == idx.cohorts[n]).collect();
                let max = cohort.iter().map(|&m| idx.cit.get(m, h)).max().unwrap();
                if max > 0 {
                    prop_assert!(cohort.iter().any(|&m| idx.get(m, h) == 1.0));
                    prop_assert_eq!(v, idx.cit.get(n, h) as f64 / max as f64);
                } else {
                    prop_assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn threshold_monotonicity(c in corpus(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let t = ingest(c.patents_csv(None).as_bytes(), c.citations_csv().as_bytes(), &three()).unwrap().0;
        let idx = compute_index(&t, forward_citation_counts(&t, 5).unwrap());
        let m_lo = success_matrix(&t, &idx, lo);
        let m_hi = success_matrix(&t, &idx, hi);
        for n in 0..m_lo.n_rows() {
            for h in 0..3 {
                prop_assert!(m_lo.get(n, h) >= m_hi.get(n, h));
            }
        }
        let sweep = threshold_sweep(&idx, &[lo, hi]);
        for h in 0..3 {
            prop_assert!(sweep[0].exceedance_pct[h] >= sweep[1].exceedance_pct[h]);
        }
    }
}
