//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured figure once its assertions hold. Thresholds marked "pilot"
//! were fixed by committed pilot runs; the generating configuration is
//! recorded next to each constant.

use qmask_core::channels::{Channel, StateSource};
use qmask_core::linalg::{kron, max_abs, max_abs_diff, CMat};
use qmask_core::presets;
use qmask_core::qstate::{
    binary_entropy, shannon_entropy, DensityOperator, HybridState, Povm, Register, Validate,
};
use qmask_core::random::{
    random_classical_csi_measurement, random_density, random_kraus_channel, random_povm,
    random_unitary,
};
use qmask_core::region::{
    evaluate_strategy, multiletter_point, optimize_rate, region_boundary, region_csv,
    trivial_leakage_threshold, OptimizeOptions, Strategy,
};
use qmask_core::sim::{
    exact_leakage, induced_table, mod_add_table, mutual_information_classical, simulate,
    ChannelTable, EncoderMode, SimConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn projection_pair(eps: f64) -> (Channel, StateSource) {
    let rpc = presets::build_projection(eps, &presets::default_psi()).unwrap();
    let (channel, source) = rpc.lift().unwrap();
    (Channel::Kraus(channel), source)
}

/// Criterion 1: closed-form reproduction of the projection-channel curve
/// over the (ε, α) grid, within 1e-9, in under 5 seconds.
#[test]
fn criterion_1_projection_closed_form_grid() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for eps_tenths in 1..=9 {
        let eps = eps_tenths as f64 / 10.0;
        let (channel, source) = projection_pair(eps);
        for alpha in [0.0, 0.1, 0.25, 0.4, 0.5] {
            let strategy = presets::projection_strategy(alpha).unwrap();
            let point = evaluate_strategy(&source, &strategy, &channel).unwrap();
            let expect_r = (1.0 - eps) * binary_entropy(alpha).unwrap();
            let expect_l = binary_entropy((1.0 - eps) * alpha).unwrap() - expect_r;
            worst = worst.max((point.rate - expect_r).abs()).max((point.leakage - expect_l).abs());
            assert!(
                (point.rate - expect_r).abs() <= 1e-9 && (point.leakage - expect_l).abs() <= 1e-9,
                "criterion 1 FAIL at eps={eps}, alpha={alpha}: got ({}, {}), expected ({expect_r}, {expect_l})",
                point.rate,
                point.leakage
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 1 FAIL: runtime {elapsed:?} ≥ 5 s");
    println!("PASS criterion 1: 45-point closed-form grid, worst deviation {worst:.2e}, {elapsed:.2?}");
}

/// Criterion 2: endpoint anchors — α = 0 gives exactly (0, 0); the midpoint
/// ε = 0.5, α = 0.5 gives (0.5, 0.3112781245) within 1e-9.
#[test]
fn criterion_2_endpoint_anchors() {
    let (channel, source) = projection_pair(0.5);
    let zero = evaluate_strategy(&source, &presets::projection_strategy(0.0).unwrap(), &channel).unwrap();
    assert_eq!(zero.rate, 0.0, "criterion 2 FAIL: rate at alpha=0 is {}", zero.rate);
    assert_eq!(zero.leakage, 0.0, "criterion 2 FAIL: leakage at alpha=0 is {}", zero.leakage);
    let half = evaluate_strategy(&source, &presets::projection_strategy(0.5).unwrap(), &channel).unwrap();
    assert!((half.rate - 0.5).abs() <= 1e-9, "criterion 2 FAIL: rate {}", half.rate);
    assert!(
        (half.leakage - 0.3112781245).abs() <= 1e-9,
        "criterion 2 FAIL: leakage {}",
        half.leakage
    );
    println!("PASS criterion 2: anchors (0,0) exact and (0.5, 0.3112781245) within 1e-9");
}

/// Criterion 3: Pauli-correction cancellation for every state and message
/// bit within 1e-12, and the q-average equals (1−ε)ρ + επ on a 4-operator
/// basis within 1e-12.
#[test]
fn criterion_3_depolarizing_cancellation() {
    let mut worst: f64 = 0.0;
    for eps in [0.25, 0.5, 1.0] {
        let rpc = presets::build_depolarizing(eps).unwrap();
        for s in 0..4 {
            let sigma = presets::pauli(s);
            for b in 0..2 {
                let basis = DensityOperator::basis_state(2, b);
                let precompensated = &sigma * basis.matrix() * sigma.adjoint();
                let out = rpc.apply_branch(s, &precompensated);
                let dev = max_abs_diff(&out, basis.matrix());
                worst = worst.max(dev);
                assert!(dev <= 1e-12, "criterion 3 FAIL: branch {s}, bit {b}: residual {dev:.2e}");
            }
        }
        for b in 0..4 {
            let op = presets::pauli(b);
            let avg = rpc.apply_average(&op);
            let expect = op.scale(1.0 - eps)
                + CMat::identity(2, 2).scale(eps * op.trace().re / 2.0);
            let dev = max_abs_diff(&avg, &expect);
            worst = worst.max(dev);
            assert!(dev <= 1e-12, "criterion 3 FAIL: average action on basis op {b}: residual {dev:.2e}");
        }
    }
    println!("PASS criterion 3: single-shot cancellation and average action, worst residual {worst:.2e}");
}

/// Criterion 4: operational (1, 0) point — the XOR-correction coder on the
/// mod-2 additive configuration at n = 8, R = 7/8: zero errors over 500
/// trials and exact leakage 0 within 1e-12, in under 30 seconds.
#[test]
fn criterion_4_operational_correction_point() {
    let start = Instant::now();
    let config = SimConfig {
        n: 8,
        rate: 7.0 / 8.0,
        rtilde: None,
        delta: 0.2,
        trials: 500,
        seed: 7,
        encoder: EncoderMode::Custom(presets::correction_coder()),
    };
    let table = mod_add_table();
    let result = simulate(&config, &table, &[0.5, 0.5], &[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
    assert_eq!(result.error_rate, 0.0, "criterion 4 FAIL: error rate {}", result.error_rate);
    let leak = result.leakage_bits_per_letter.expect("leakage fits the cell budget");
    assert!(leak.abs() <= 1e-12, "criterion 4 FAIL: leakage {leak}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "criterion 4 FAIL: runtime {elapsed:?} ≥ 30 s");
    println!("PASS criterion 4: 500 noiseless trials, exact leakage {leak:.1e}, {elapsed:.2?}");
}

/// Criterion 5: at budget 2·log₂|Y| the masking constraint is vacuous — the
/// optimum matches the unconstrained optimum within 1e-6.
#[test]
fn criterion_5_trivial_masking_threshold() {
    let (channel, source) = {
        let (m, s) = presets::projection_measurement(0.5).unwrap();
        (Channel::Measurement(m), s)
    };
    let budget = trivial_leakage_threshold(&channel);
    assert!((budget - 2.0).abs() < 1e-12);
    let opts = OptimizeOptions { restarts: 16, iterations: 24, seed: 7, x_size: None };
    let (at_budget, _) = optimize_rate(&source, &channel, budget, &opts).unwrap();
    let (unconstrained, _) = optimize_rate(&source, &channel, f64::INFINITY, &opts).unwrap();
    let gap = (at_budget.rate - unconstrained.rate).abs();
    assert!(gap <= 1e-6, "criterion 5 FAIL: gap {gap:.2e}");
    println!("PASS criterion 5: threshold-budget vs unconstrained gap {gap:.2e}");
}

/// Criterion 6: covering-lemma decay on the correlated mod-add
/// configuration at n = 8 over 500 trials: failure rate nonincreasing in
/// the binning slack, final point at most the pilot threshold.
///
/// Pilot (committed): `simulate` with q = (1/2, 1/2), p(x|s) = flip-0.25,
/// δ = 0.15, n = 8, R = 0.25, seed 7, slacks I(X;S)+{0.1, 0.3, 0.5} gave
/// covering failure rates [0.39, 0.192, 0.13].
#[test]
fn criterion_6_covering_decay() {
    const PILOT_FINAL_THRESHOLD: f64 = 0.16; // pilot value 0.13 plus 2σ ≈ 0.03
    let start = Instant::now();
    let table = mod_add_table();
    let q = [0.5, 0.5];
    let cond = vec![vec![0.75, 0.25], vec![0.25, 0.75]];
    let p_sx: Vec<Vec<f64>> = (0..2).map(|s| (0..2).map(|x| q[s] * cond[s][x]).collect()).collect();
    let i_xs = mutual_information_classical(&p_sx);
    let mut rates = Vec::new();
    for slack in [0.1, 0.3, 0.5] {
        let config = SimConfig {
            n: 8,
            rate: 0.25,
            rtilde: Some(0.25 + i_xs + slack),
            delta: 0.15,
            trials: 500,
            seed: 7,
            encoder: EncoderMode::Binning,
        };
        let result = simulate(&config, &table, &q, &cond).unwrap();
        rates.push(result.covering_failure_rate);
    }
    assert!(
        rates[0] >= rates[1] && rates[1] >= rates[2],
        "criterion 6 FAIL: covering failure not monotone: {rates:?}"
    );
    assert!(
        rates[2] <= PILOT_FINAL_THRESHOLD,
        "criterion 6 FAIL: final rate {} above pilot threshold {PILOT_FINAL_THRESHOLD}",
        rates[2]
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 6 FAIL: runtime {elapsed:?} ≥ 60 s");
    println!("PASS criterion 6: covering failure {rates:?} nonincreasing, final ≤ {PILOT_FINAL_THRESHOLD}, {elapsed:.2?}");
}

/// Criterion 7: the auxiliary-alphabet cap suffices — on 20 random binary
/// measurement channels the optimum with |X| = 10 and |X| = 13 differ by at
/// most 1e-4, in under 10 minutes.
#[test]
fn criterion_7_cardinality_sufficiency() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let (channel, source) = random_classical_csi_measurement(&mut rng, 2, 2, 2);
        let channel = Channel::Measurement(channel);
        let budget = trivial_leakage_threshold(&channel);
        let mut rates = Vec::new();
        for x_size in [10usize, 13] {
            let opts = OptimizeOptions { restarts: 16, iterations: 24, seed: 7 + i, x_size: Some(x_size) };
            let (point, _) = optimize_rate(&source, &channel, budget, &opts).unwrap();
            rates.push(point.rate);
        }
        let diff = (rates[0] - rates[1]).abs();
        worst = worst.max(diff);
        assert!(
            diff <= 1e-4,
            "criterion 7 FAIL: channel {i}: |X|=10 gives {}, |X|=13 gives {} (diff {diff:.2e})",
            rates[0],
            rates[1]
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "criterion 7 FAIL: runtime {elapsed:?} ≥ 10 min");
    println!("PASS criterion 7: 20 channels, worst |X|=10 vs 13 difference {worst:.2e}, {elapsed:.1?}");
}

/// Criterion 8: randomized invariant suites, 1000 cases each, zero
/// violations beyond the stated tolerances.
#[test]
fn criterion_8_randomized_invariant_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // Entropy bounds and unitary invariance.
    for _ in 0..1000 {
        let dim = rng.random_range(2..=5);
        let rho = random_density(&mut rng, dim);
        let h = rho.von_neumann_entropy().unwrap();
        assert!(h >= 0.0 && h <= (dim as f64).log2() + 1e-9, "entropy bound violated: {h}");
        let u = random_unitary(&mut rng, dim);
        let rotated = DensityOperator::new_unchecked(&u * rho.matrix() * u.adjoint());
        let hr = rotated.von_neumann_entropy().unwrap();
        assert!((h - hr).abs() <= 1e-9, "unitary invariance violated: {h} vs {hr}");
    }

    // Subadditivity and mutual-information bounds on random bipartite states.
    for _ in 0..1000 {
        let (da, db) = (2usize, rng.random_range(2..=3));
        let joint = random_density(&mut rng, da * db);
        let state = HybridState::from_joint_density(
            vec![("A".into(), da), ("B".into(), db)],
            joint,
        )
        .unwrap();
        let ha = state.entropy_of(&["A"]).unwrap();
        let hb = state.entropy_of(&["B"]).unwrap();
        let hab = state.entropy_of(&["A", "B"]).unwrap();
        assert!(hab <= ha + hb + 1e-9, "subadditivity violated: {hab} > {ha} + {hb}");
        let mi = state.mutual_information(&["A"], &["B"]).unwrap();
        assert!(mi >= -1e-9, "mutual information negative: {mi}");
        assert!(mi <= 2.0 * ha.min(hb) + 1e-9, "mutual information above 2·min: {mi}");
    }

    // Trace preservation of channel application on random channels/inputs.
    for _ in 0..1000 {
        let channel = random_kraus_channel(&mut rng, 2, 2, 2, 3);
        let rho = random_density(&mut rng, 4);
        let state = HybridState::from_joint_density(
            vec![("E".into(), 2), ("A".into(), 2)],
            rho,
        )
        .unwrap();
        let out = Channel::Kraus(channel).apply(&state).unwrap();
        let trace: f64 = out
            .branches()
            .iter()
            .map(|b| b.weight * b.state.trace())
            .sum();
        assert!((trace - 1.0).abs() <= 1e-9, "trace preservation violated: {trace}");
    }

    // POVM completeness of randomly generated POVMs.
    for _ in 0..1000 {
        let dim = rng.random_range(2..=4);
        let outcomes = rng.random_range(2..=4);
        let povm = random_povm(&mut rng, dim, outcomes);
        let report = povm.validate();
        assert!(report.is_valid(), "random POVM failed validation: {report}");
    }

    // Partial-trace composition: tracing {C} then {S} equals tracing both.
    for _ in 0..1000 {
        let q = {
            let mut v: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 0.05).collect();
            let t: f64 = v.iter().sum();
            v.iter_mut().for_each(|p| *p /= t);
            v
        };
        let branches = q
            .iter()
            .enumerate()
            .map(|(i, &w)| qmask_core::qstate::Branch {
                labels: vec![i % 3, i % 2],
                weight: w,
                state: random_density(&mut rng, 2),
            })
            .collect();
        let state = HybridState::new(
            vec![
                Register::classical_indexed("C", 3),
                Register::classical_indexed("S", 2),
                Register::quantum("A", 2),
            ],
            branches,
        )
        .unwrap();
        let two_step = state.partial_trace(&["S", "A"]).unwrap().partial_trace(&["A"]).unwrap();
        let one_step = state.partial_trace(&["A"]).unwrap();
        assert_eq!(two_step.branches().len(), one_step.branches().len());
        for (a, b) in two_step.branches().iter().zip(one_step.branches()) {
            assert!((a.weight - b.weight).abs() <= 1e-10);
            assert!(max_abs_diff(a.state.matrix(), b.state.matrix()) <= 1e-10);
        }
    }

    println!("PASS criterion 8: five invariant suites × 1000 randomized cases, zero violations");
}

/// Independent naive enumerator for the leakage oracle: builds the full
/// joint table p(s^n, y^n) by direct triple loops.
fn naive_leakage(
    encode: &dyn Fn(u64, &[usize]) -> Vec<usize>,
    table: &ChannelTable,
    q: &[f64],
    n: usize,
    num_messages: u64,
) -> f64 {
    let s_total = q.len().pow(n as u32);
    let y_total = table.y_count().pow(n as u32);
    let unrank = |mut idx: usize, base: usize| -> Vec<usize> {
        let mut seq = vec![0usize; n];
        for pos in (0..n).rev() {
            seq[pos] = idx % base;
            idx /= base;
        }
        seq
    };
    let mut joint = vec![vec![0.0f64; y_total]; s_total];
    for si in 0..s_total {
        let s_n = unrank(si, q.len());
        let p_s: f64 = s_n.iter().map(|&s| q[s]).product();
        for m in 0..num_messages {
            let x_n = encode(m, &s_n);
            for yi in 0..y_total {
                let y_n = unrank(yi, table.y_count());
                let mut p = p_s / num_messages as f64;
                for i in 0..n {
                    p *= table.w(s_n[i], x_n[i], y_n[i]);
                }
                joint[si][yi] += p;
            }
        }
    }
    let p_y: Vec<f64> = (0..y_total).map(|yi| (0..s_total).map(|si| joint[si][yi]).sum()).collect();
    let p_s: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
    let mut mi = 0.0;
    for si in 0..s_total {
        for yi in 0..y_total {
            let p = joint[si][yi];
            if p > 0.0 {
                mi += p * (p / (p_s[si] * p_y[yi])).log2();
            }
        }
    }
    mi / n as f64
}

/// Criterion 9: oracle equivalences — classical entropies against the
/// Shannon formula (1e-10), exact leakage against an independent naive
/// enumerator at n ≤ 4 (1e-12), and the n = 2 product strategy against the
/// single-letter point (1e-9).
#[test]
fn criterion_9_oracle_equivalences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4096);

    // Classical hybrid states against the Shannon formulas.
    for _ in 0..300 {
        let (s_count, x_count) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let mut joint = vec![vec![0.0f64; x_count]; s_count];
        let mut total = 0.0;
        for row in joint.iter_mut() {
            for p in row.iter_mut() {
                *p = rng.random::<f64>() + 1e-3;
                total += *p;
            }
        }
        joint.iter_mut().for_each(|row| row.iter_mut().for_each(|p| *p /= total));
        let branches = (0..s_count)
            .flat_map(|s| {
                let joint = &joint;
                (0..x_count).map(move |x| qmask_core::qstate::Branch {
                    labels: vec![s, x],
                    weight: joint[s][x],
                    state: DensityOperator::new_unchecked(CMat::identity(1, 1)),
                })
            })
            .collect();
        let state = HybridState::new(
            vec![
                Register::classical_indexed("S", s_count),
                Register::classical_indexed("X", x_count),
            ],
            branches,
        )
        .unwrap();

        let p_s: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
        let p_x: Vec<f64> = (0..x_count).map(|x| joint.iter().map(|r| r[x]).sum()).collect();
        let h_joint: f64 = joint.iter().flatten().map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 }).sum();
        assert!((state.entropy_of(&["S"]).unwrap() - shannon_entropy(&p_s)).abs() <= 1e-10);
        assert!((state.entropy_of(&["X"]).unwrap() - shannon_entropy(&p_x)).abs() <= 1e-10);
        assert!((state.entropy_of(&["S", "X"]).unwrap() - h_joint).abs() <= 1e-10);
        let mi_direct = shannon_entropy(&p_s) + shannon_entropy(&p_x) - h_joint;
        assert!(
            (state.mutual_information(&["S"], &["X"]).unwrap() - mi_direct).abs() <= 1e-10,
            "criterion 9 FAIL: classical MI oracle"
        );
    }

    // Exact leakage against the independently coded naive enumerator.
    let coder = presets::correction_coder();
    for n in 2..=4usize {
        for seed in [3u64, 17] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Random 2x2x2 table with strictly positive rows.
            let mut w = vec![vec![vec![0.0; 2]; 2]; 2];
            for s in 0..2 {
                for x in 0..2 {
                    let a = rng.random::<f64>() * 0.9 + 0.05;
                    w[s][x] = vec![a, 1.0 - a];
                }
            }
            let table = ChannelTable::new(2, 2, 2, &w).unwrap();
            let q = [0.35, 0.65];
            let m_count = 1u64 << (n - 1);
            for encoder_name in ["correction", "state_xor"] {
                let encode: Box<dyn Fn(u64, &[usize]) -> Vec<usize>> = match encoder_name {
                    "correction" => Box::new(move |m, s_n: &[usize]| (coder.encode)(m, s_n, m_count)),
                    _ => Box::new(|_m, s_n: &[usize]| s_n.iter().map(|&s| s ^ 1).collect()),
                };
                let fast = exact_leakage(&*encode, &table, &q, n, m_count).unwrap();
                let naive = naive_leakage(&*encode, &table, &q, n, m_count);
                assert!(
                    (fast - naive).abs() <= 1e-12,
                    "criterion 9 FAIL: leakage oracle at n={n}, encoder {encoder_name}: {fast} vs {naive}"
                );
            }
        }
    }

    // n = 2 product strategy equals the single-letter point.
    let mut rng2 = ChaCha8Rng::seed_from_u64(77);
    let (mchan, source) = random_classical_csi_measurement(&mut rng2, 2, 2, 2);
    let channel = Channel::Measurement(mchan);
    let strategy = Strategy::new(
        Povm::computational(2),
        vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.2, 0.6]],
        vec![
            DensityOperator::basis_state(2, 0),
            DensityOperator::basis_state(2, 1),
            qmask_core::random::random_pure_state(&mut rng2, 2),
        ],
    )
    .unwrap();
    let single = evaluate_strategy(&source, &strategy, &channel).unwrap();
    let doubled = strategy.product(&strategy).unwrap();
    let two = multiletter_point(&source, &doubled, &channel, 2).unwrap();
    assert!(
        (single.rate - two.rate).abs() <= 1e-9 && (single.leakage - two.leakage).abs() <= 1e-9,
        "criterion 9 FAIL: product strategy ({}, {}) vs single letter ({}, {})",
        two.rate,
        two.leakage,
        single.rate,
        single.leakage
    );

    println!("PASS criterion 9: Shannon oracle (1e-10), naive leakage enumerator (1e-12), n=2 additivity (1e-9)");
}

/// Criterion 10: stochastic runs repeated with the same seed under
/// different thread counts produce byte-identical artifacts.
#[test]
fn criterion_10_thread_count_determinism() {
    let run_sim = || {
        let config = SimConfig {
            n: 6,
            rate: 0.5,
            rtilde: None,
            delta: 0.25,
            trials: 400,
            seed: 1234,
            encoder: EncoderMode::Binning,
        };
        simulate(&config, &mod_add_table(), &[0.3, 0.7], &[vec![0.5, 0.5], vec![0.5, 0.5]])
            .unwrap()
            .to_json()
    };
    let run_region = || {
        let (m, source) = presets::projection_measurement(0.5).unwrap();
        let channel = Channel::Measurement(m);
        let opts = OptimizeOptions { restarts: 6, iterations: 8, seed: 7, x_size: Some(3) };
        let rows = region_boundary(&source, &channel, &[0.0, 0.1, 0.2], &opts).unwrap();
        region_csv(&rows, opts.seed)
    };

    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let (sim1, region1) = pool1.install(|| (run_sim(), run_region()));
    let (sim4, region4) = pool4.install(|| (run_sim(), run_region()));
    assert_eq!(sim1, sim4, "criterion 10 FAIL: simulation JSON differs across thread counts");
    assert_eq!(region1, region4, "criterion 10 FAIL: region CSV differs across thread counts");
    println!("PASS criterion 10: simulation JSON and region CSV byte-identical at 1 vs 4 threads");
}

/// Supporting check for the optimizer contract used by criteria 5-7: the
/// analytic projection curve is matched or exceeded at its own budgets.
#[test]
fn optimizer_dominates_analytic_curve() {
    let eps = 0.5;
    let (m, source) = presets::projection_measurement(eps).unwrap();
    let channel = Channel::Measurement(m);
    let mut worst: f64 = f64::NEG_INFINITY;
    for alpha in [0.1, 0.25, 0.4, 0.5] {
        let target = presets::projection_analytic(eps, alpha).unwrap();
        let opts = OptimizeOptions { restarts: 12, iterations: 18, seed: 7, x_size: Some(4) };
        let (point, _) = optimize_rate(&source, &channel, target.leakage, &opts).unwrap();
        let deficit = target.rate - point.rate;
        worst = worst.max(deficit);
        assert!(
            point.rate >= target.rate - 1e-4,
            "optimizer under analytic curve at alpha={alpha}: {} < {}",
            point.rate,
            target.rate
        );
        assert!(point.leakage <= target.leakage + 1e-6);
    }
    println!("PASS optimizer-vs-analytic: worst deficit {worst:.2e} across budget grid");
}

/// Supporting check: binning leakage at n = 6 stays within the pilot gap of
/// the single-letter bound.
///
/// Pilot (committed): ε = 0.5 measurement analog, α = 0.5 strategy, n = 6,
/// R = 1/3, δ = 0.2, seed 7, 200 trials gave exact leakage 0.3102 against
/// the single-letter bound 0.3113.
#[test]
fn binning_leakage_within_pilot_gap() {
    const PILOT_GAP: f64 = 0.02;
    let (mchan, _) = presets::projection_measurement(0.5).unwrap();
    let states = vec![
        DensityOperator::basis_state(2, 0),
        DensityOperator::basis_state(2, 1),
    ];
    let table = induced_table(&mchan, &states).unwrap();
    let config = SimConfig {
        n: 6,
        rate: 1.0 / 3.0,
        rtilde: None,
        delta: 0.2,
        trials: 200,
        seed: 7,
        encoder: EncoderMode::Binning,
    };
    let result = simulate(&config, &table, &[0.5, 0.5], &[vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
    let leak = result.leakage_bits_per_letter.unwrap();
    assert!(
        leak <= result.prediction.l_bound + PILOT_GAP,
        "binning leakage {leak} exceeds single-letter bound {} + {PILOT_GAP}",
        result.prediction.l_bound
    );
    println!(
        "PASS binning leakage: {leak:.4} ≤ bound {:.4} + {PILOT_GAP}",
        result.prediction.l_bound
    );
}

/// Supporting check: error behavior across rates fixed by pilot runs.
///
/// Pilot (committed): mod-add with ps = 0.1, uniform inputs, n = 8, δ = 0.35,
/// seed 7, 500 trials: R = 0.25 gave error 0.096; R = 0.875 gave 0.696.
/// Codebook-averaged decay: ps = 0.05, R = 0.5, R̃ = R, seeds 0..16 × 500
/// trials gave mean errors [0.185, 0.161, 0.125] for n = 4, 6, 8.
#[test]
fn error_rate_pilot_thresholds() {
    let table = mod_add_table();
    let uniform = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
    let q = [0.9, 0.1];
    let below = SimConfig {
        n: 8,
        rate: 0.25,
        rtilde: None,
        delta: 0.35,
        trials: 500,
        seed: 7,
        encoder: EncoderMode::Binning,
    };
    let res = simulate(&below, &table, &q, &uniform).unwrap();
    assert!(res.error_rate <= 0.15, "low-rate error {} above pilot threshold", res.error_rate);

    let above = SimConfig { rate: 0.875, ..below };
    let res = simulate(&above, &table, &q, &uniform).unwrap();
    assert!(res.error_rate >= 0.5, "above-capacity error {} under 0.5", res.error_rate);

    // Codebook-averaged decay in n at fixed rate strictly inside capacity.
    let q = [0.95, 0.05];
    let mean = |n: usize| -> f64 {
        (0..16u64)
            .map(|seed| {
                let cfg = SimConfig {
                    n,
                    rate: 0.5,
                    rtilde: Some(0.5),
                    delta: 0.35,
                    trials: 500,
                    seed,
                    encoder: EncoderMode::Binning,
                };
                simulate(&cfg, &table, &q, &uniform).unwrap().error_rate
            })
            .sum::<f64>()
            / 16.0
    };
    let means: Vec<f64> = [4, 6, 8].iter().map(|&n| mean(n)).collect();
    let sigma2 = 2.0 * (0.2f64 * 0.8 / (16.0 * 500.0)).sqrt();
    assert!(
        means[1] <= means[0] + sigma2 && means[2] <= means[1] + sigma2,
        "error decay violated beyond 2σ: {means:?}"
    );
    println!("PASS error-rate pilots: low-rate, above-capacity, and decay {means:?}");
}
