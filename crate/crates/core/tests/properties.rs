use proptest::prelude::*;
use reinforced_core::estimate::{
    centrality_ratios, fit_heaps, fit_split, LogLogSample, SamplePoint,
};
use reinforced_core::inference::{chisq_sf, mean_field_test, mle_iota, zeta};
use reinforced_core::model::{growth_exponents, perron, InteractionMatrix};
use reinforced_core::sim::{
    run_ensemble, run_replica, simulate_outcomes, CheckpointSchedule, ModelParams,
};

/// Strictly positive `n×n` matrix whose column sums are drawn in `(0.2, 1]`.
fn irreducible(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(0.01f64..1.0, n), n),
            prop::collection::vec(0.2f64..=1.0, n),
        )
            .prop_map(move |(raw, sums)| {
                let mut rows = raw;
                for h in 0..n {
                    let s: f64 = (0..n).map(|j| rows[j][h]).sum();
                    for row in rows.iter_mut() {
                        row[h] *= sums[h] / s;
                    }
                }
                rows
            })
    })
}

fn column_stochastic(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(0.01f64..1.0, n), n).prop_map(move |raw| {
            let mut rows = raw;
            for h in 0..n {
                let s: f64 = (0..n).map(|j| rows[j][h]).sum();
                for row in rows.iter_mut() {
                    row[h] /= s;
                }
            }
            rows
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perron_residuals_and_normalization(rows in irreducible(6)) {
        let m = InteractionMatrix::validate(&rows).unwrap();
        let s = perron(&m).unwrap();
        prop_assert!(s.left_residual(&m) <= 1e-10);
        prop_assert!(s.right_residual(&m) <= 1e-10);
        let v1: f64 = s.v.iter().sum();
        let vu: f64 = s.v.iter().zip(&s.u).map(|(a, b)| a * b).sum();
        prop_assert!((v1 - 1.0).abs() <= 1e-10);
        prop_assert!((vu - 1.0).abs() <= 1e-10);
        prop_assert!(s.u.iter().chain(&s.v).all(|&x| x > 0.0));
        prop_assert!(s.gamma_star <= 1.0 + 1e-12);
        let g = growth_exponents(&m);
        prop_assert!(g.exponent.iter().all(|&e| (e - s.gamma_star).abs() < 1e-12));
        prop_assert!(g.log_power.iter().all(|&p| p == 0));
    }

    #[test]
    fn unit_root_iff_column_stochastic(rows in column_stochastic(6), col in 0usize..6, shrink in 0.5f64..0.99) {
        let m = InteractionMatrix::validate(&rows).unwrap();
        prop_assert!((perron(&m).unwrap().gamma_star - 1.0).abs() < 1e-10);
        let n = rows.len();
        let mut sub = rows.clone();
        for row in sub.iter_mut() {
            row[col % n] *= shrink;
        }
        let m = InteractionMatrix::validate(&sub).unwrap();
        prop_assert!(perron(&m).unwrap().gamma_star < 1.0 - 1e-6);
    }

    #[test]
    fn mean_field_spectrum(g in 0.05f64..=1.0, iota in 0.01f64..=1.0, n in 2usize..10) {
        let m = InteractionMatrix::mean_field(g, iota, n).unwrap();
        let s = perron(&m).unwrap();
        prop_assert!((s.gamma_star - g).abs() <= 1e-12);
        prop_assert!((s.gamma2_real.unwrap() - g * (1.0 - iota)).abs() <= 1e-10);
    }

    #[test]
    fn relabelling_permutes_spectral_data(rows in irreducible(5), seed in any::<u64>()) {
        let m = InteractionMatrix::validate(&rows).unwrap();
        let n = m.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let p = m.permuted(&perm).unwrap();
        let (a, b) = (perron(&m).unwrap(), perron(&p).unwrap());
        prop_assert!((a.gamma_star - b.gamma_star).abs() < 1e-12);
        let (ga, gb) = (growth_exponents(&m), growth_exponents(&p));
        for i in 0..n {
            prop_assert!((b.u[i] - a.u[perm[i]]).abs() < 1e-9);
            prop_assert!((b.v[i] - a.v[perm[i]]).abs() < 1e-9);
            prop_assert!((gb.exponent[i] - ga.exponent[perm[i]]).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectory_invariants(
        rows in irreducible(4),
        theta_scale in 0.05f64..2.0,
        c_extra in 0.0f64..5.0,
        seed in any::<u64>(),
        with_pi in any::<bool>(),
    ) {
        let m = InteractionMatrix::validate(&rows).unwrap();
        let n = m.n();
        let mut params = ModelParams::uniform(n, theta_scale, theta_scale + c_extra);
        if with_pi {
            params = params.with_pi(vec![1.0 / n as f64; n]);
        }
        let schedule = CheckpointSchedule::geometric(3000, 40);
        let tr = run_replica(&params, &m, 3000, seed, 0, &schedule).unwrap();
        let mut prev = vec![0u64; n];
        for cp in &tr.checkpoints {
            for h in 0..n {
                prop_assert!(cp.counts[h] >= prev[h]);
                prop_assert!(cp.counts[h] <= cp.t);
                prop_assert!(cp.probs[h] > 0.0 && cp.probs[h] <= 1.0);
            }
            if let Some(split) = &cp.split {
                for h in 0..n {
                    let sum: u64 = (0..n).map(|k| split[k * n + h]).sum();
                    prop_assert_eq!(sum, cp.counts[h]);
                }
            } else {
                prop_assert!(!with_pi);
            }
            prev = cp.counts.clone();
        }
    }
}

#[test]
fn ensembles_independent_of_thread_count() {
    let m = InteractionMatrix::mean_field(0.7, 0.9, 3).unwrap();
    let p = ModelParams::uniform(3, 0.5, 1.0).with_pi(vec![0.2, 0.3, 0.5]);
    let schedule = CheckpointSchedule::geometric(5000, 20);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_ensemble(&p, &m, 5000, 12, 42, &schedule).unwrap())
    };
    assert_eq!(run(1), run(4));
}

fn sample(counts: &[Vec<f64>], ts: &[u64]) -> LogLogSample {
    let n = counts[0].len();
    LogLogSample::from_points(
        (1..=n).map(|h| h.to_string()).collect(),
        ts.iter()
            .zip(counts)
            .map(|(&t, c)| SamplePoint {
                t,
                counts: c.clone(),
                split: None,
            })
            .collect(),
    )
    .unwrap()
}

fn noisy_counts() -> impl Strategy<Value = (Vec<u64>, Vec<Vec<f64>>)> {
    (2usize..5, 5usize..40).prop_flat_map(|(n, len)| {
        (
            prop::collection::btree_set(1u64..1_000_000, len),
            prop::collection::vec(prop::collection::vec(1.0f64..1e5, n), len),
        )
            .prop_map(|(ts, counts)| (ts.into_iter().collect(), counts))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_power_law_recovered(
        slope in 0.1f64..1.0,
        amps in prop::collection::vec(0.1f64..10.0, 2..5),
    ) {
        let ts: Vec<u64> = (0..30).map(|k| 10u64.pow(k / 5) * (1 + k as u64 % 5)).collect();
        let mut ts = ts;
        ts.sort_unstable();
        ts.dedup();
        let counts: Vec<Vec<f64>> = ts
            .iter()
            .map(|&t| amps.iter().map(|a| a * (t as f64).powf(slope)).collect())
            .collect();
        let fit = fit_heaps(&sample(&counts, &ts)).unwrap();
        prop_assert!((fit.common_slope - slope).abs() < 1e-10);
        for (h, a) in amps.iter().enumerate() {
            prop_assert!((fit.slopes[h] - slope).abs() < 1e-10);
            prop_assert!((fit.intercepts[h] - a.log10()).abs() < 1e-10);
        }
        prop_assert!((fit.r2_common - 1.0).abs() < 1e-10);
        prop_assert!((fit.r2_free - 1.0).abs() < 1e-10);
    }

    #[test]
    fn free_model_nests_common((ts, counts) in noisy_counts()) {
        let fit = fit_heaps(&sample(&counts, &ts)).unwrap();
        prop_assert!(fit.r2_free >= fit.r2_common - 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&fit.r2_free));
        prop_assert!(fit.r2_common <= 1.0 + 1e-12);
    }

    #[test]
    fn scale_equivariance((ts, counts) in noisy_counts(), scale in 0.01f64..100.0) {
        let scaled: Vec<Vec<f64>> = counts.iter().map(|c| c.iter().map(|x| x * scale).collect()).collect();
        let a = fit_heaps(&sample(&counts, &ts)).unwrap();
        let b = fit_heaps(&sample(&scaled, &ts)).unwrap();
        prop_assert!((a.common_slope - b.common_slope).abs() < 1e-9);
        prop_assert!((a.r2_common - b.r2_common).abs() < 1e-9);
        prop_assert!((a.r2_free - b.r2_free).abs() < 1e-9);
        for h in 0..a.slopes.len() {
            prop_assert!((a.slopes[h] - b.slopes[h]).abs() < 1e-9);
            prop_assert!((b.intercepts[h] - a.intercepts[h] - scale.log10()).abs() < 1e-9);
        }
        let (ra, rb) = (centrality_ratios(&a, 0).unwrap(), centrality_ratios(&b, 0).unwrap());
        for (x, y) in ra.iter().zip(&rb) {
            prop_assert!((x / y - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ratio_identity_across_baselines((ts, counts) in noisy_counts(), b1 in 0usize..4, b2 in 0usize..4) {
        let fit = fit_heaps(&sample(&counts, &ts)).unwrap();
        let n = fit.labels.len();
        let (b1, b2) = (b1 % n, b2 % n);
        let r1 = centrality_ratios(&fit, b1).unwrap();
        let r2 = centrality_ratios(&fit, b2).unwrap();
        for h in 0..n {
            for j in 0..n {
                prop_assert!(((r1[h] / r1[j]) / (r2[h] / r2[j]) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn split_ratios_scale_invariant(
        amps in prop::collection::vec(0.5f64..5.0, 4),
        scale in 0.01f64..100.0,
        g in 0.2f64..1.0,
    ) {
        let ts: Vec<u64> = (1..=30).map(|k| k * k * 10).collect();
        let build = |a: f64| {
            let points = ts
                .iter()
                .map(|&t| {
                    let split: Vec<f64> = amps.iter().map(|x| a * x * (t as f64).powf(g)).collect();
                    SamplePoint {
                        t,
                        counts: vec![split[0] + split[2], split[1] + split[3]],
                        split: Some(split),
                    }
                })
                .collect();
            LogLogSample::from_points(vec!["1".into(), "2".into()], points).unwrap()
        };
        let a = fit_split(&build(1.0), g, 1).unwrap();
        let b = fit_split(&build(scale), g, 1).unwrap();
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            prop_assert!((x.unwrap() / y.unwrap() - 1.0).abs() < 1e-9);
        }
        // Noiseless split series: ratio of π̂ estimated in target h is amps[0,h]/amps[1,h].
        prop_assert!((a.ratios[0].unwrap() - amps[0] / amps[2]).abs() < 1e-9);
        prop_assert!((a.ratios[1].unwrap() - amps[1] / amps[3]).abs() < 1e-9);
    }

    #[test]
    fn statistic_permutation_invariant(
        counts in prop::collection::vec(0.0f64..1e6, 2..10),
        iota0 in 0.51f64..=1.0,
        seed in any::<u64>(),
    ) {
        prop_assume!(counts.iter().sum::<f64>() > 0.0);
        let mut shuffled = counts.clone();
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = mean_field_test(&counts, 100, iota0, 0.7).unwrap();
        let b = mean_field_test(&shuffled, 100, iota0, 0.7).unwrap();
        prop_assert!((a.statistic - b.statistic).abs() <= 1e-9 * a.statistic.max(1.0));
    }

    #[test]
    fn statistic_linear_and_p_monotone(counts in prop::collection::vec(0.0f64..1e6, 2..10)) {
        prop_assume!(counts.iter().sum::<f64>() > 0.0);
        let s9 = mean_field_test(&counts, 100, 0.9, 0.7).unwrap();
        let s7 = mean_field_test(&counts, 100, 0.7, 0.7).unwrap();
        if s7.statistic > 0.0 {
            prop_assert!((s9.statistic / s7.statistic - 2.0).abs() < 1e-12);
        }
        let mut last_p = f64::INFINITY;
        for k in 51..=100 {
            let r = mean_field_test(&counts, 100, k as f64 / 100.0, 0.7).unwrap();
            prop_assert!(r.p_value <= last_p);
            prop_assert!((r.p_value - chisq_sf(r.statistic, r.df).unwrap()).abs() == 0.0);
            last_p = r.p_value;
        }
    }

    #[test]
    fn chisq_sf_decreasing(k in 1u32..60, a in 0.0f64..200.0, b in 0.0f64..200.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let (p_lo, p_hi) = (chisq_sf(lo, k).unwrap(), chisq_sf(hi, k).unwrap());
        prop_assert!(p_lo >= p_hi);
        prop_assert!(p_hi < p_lo || p_lo < 1e-300);
        prop_assert_eq!(chisq_sf(0.0, k).unwrap(), 1.0);
    }
}

#[test]
fn zeta_ratio_approaches_one_monotonically() {
    for x in [0.3, 0.689, 1.0] {
        let gaps: Vec<f64> = [100u64, 10_000, 1_000_000]
            .iter()
            .map(|&t| (zeta(t, x).unwrap() / (t as f64).powf(x) - 1.0).abs())
            .collect();
        assert!(gaps[0] + 1e-13 >= gaps[1] && gaps[1] + 1e-13 >= gaps[2], "x={x}: {gaps:?}");
        assert!(gaps[2] < 1e-6);
    }
}

/// Log-likelihood under the mean-field matrix, written out directly.
fn log_likelihood(
    m: &reinforced_core::success::SuccessMatrix,
    g: f64,
    iota: f64,
    theta: &[f64],
    c: &[f64],
) -> f64 {
    let n = m.n_cols();
    let mut s = vec![0.0; n];
    let mut ll = 0.0;
    for row in 0..m.n_rows() {
        let total: f64 = s.iter().sum();
        for h in 0..n {
            let input = g * ((1.0 - iota) * s[h] + iota * total / n as f64);
            let p = (theta[h] + input) / (c[h] + row as f64);
            ll += if m.get(row, h) { p.ln() } else { (1.0 - p).ln() };
        }
        for (h, sh) in s.iter_mut().enumerate() {
            *sh += m.get(row, h) as u8 as f64;
        }
    }
    ll
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mle_dominates_grid(iota in 0.1f64..=1.0, seed in any::<u64>()) {
        let g = 0.689;
        let m = InteractionMatrix::mean_field(g, iota, 3).unwrap();
        let p = ModelParams::uniform(3, 0.5, 1.0);
        let data = simulate_outcomes(&p, &m, 400, seed, 0).unwrap();
        let r = mle_iota(&data, g, &p.theta, &p.c).unwrap();
        let at_hat = log_likelihood(&data, g, r.iota_hat, &p.theta, &p.c);
        prop_assert!((at_hat - r.log_likelihood).abs() < 1e-8 * at_hat.abs().max(1.0));
        for k in 1..=100 {
            let ll = log_likelihood(&data, g, k as f64 / 100.0, &p.theta, &p.c);
            prop_assert!(r.log_likelihood >= ll - 1e-9, "grid {k}");
        }
    }
}
