//! The sign-off checklist for the whole toolkit. Each test covers one
//! criterion end to end on generated instances and prints a `criterion N:
//! pass` line (visible with `--nocapture`); a failure panics with a matching
//! FAIL line. The tests share a lock so timing-sensitive checks never run
//! next to other work.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Instant;

use ssmp::{
    backtrack_subsets, decision_oracle, discretize_reorganize, generate, generate_one,
    greedy_solve, optimal_oracle, solve_exact, tabulate, Deadline, DecisionOutcome, DecisionSolver,
    DpConfig, DpSolver, ExactConfig, ExactStatus, Family, GenConfig, IndexMask, Match,
    SearchSolver, SplitCache, Subset,
};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn pass(n: usize, what: &str) {
    println!("criterion {n}: pass - {what}");
}

fn subset_of_bits(len: usize, bits: u64) -> Subset {
    let mut s = Subset::empty(len);
    for i in 0..len {
        if bits >> i & 1 == 1 {
            s.insert(i);
        }
    }
    s
}

#[test]
fn criterion_1_exact_proves_oracle_optima_and_greedy_never_beats_them() {
    let _guard = serial();
    let deadline = Deadline::none();
    for seed in 0..50u64 {
        let cfg = GenConfig {
            m: 2 + (seed % 3) as usize,
            n: 2 + ((seed / 3) % 3) as usize,
            family: Family::Integer { gamma: 10 },
            epsilon: 0,
            seed,
            count: 1,
        };
        let instance = generate_one(&cfg, 0);
        let (best, _) = optimal_oracle(&instance, 1).unwrap();
        let exact = solve_exact(&instance, &ExactConfig::default(), &deadline, None).unwrap();
        assert_eq!(
            exact.status,
            ExactStatus::Optimal,
            "criterion 1: FAIL - no optimality proof on seed {seed}"
        );
        assert_eq!(
            exact.psi, best,
            "criterion 1: FAIL - exact and oracle measures differ on seed {seed}"
        );
        for solver in [&SearchSolver::default() as &dyn DecisionSolver, &DpSolver::default()] {
            let greedy = greedy_solve(&instance, solver, &deadline).unwrap();
            let psi = instance.psi(&greedy.solution).unwrap();
            assert!(
                psi <= best,
                "criterion 1: FAIL - greedy {} reported {psi} above the optimum {best} on seed {seed}",
                solver.name()
            );
        }
    }
    pass(1, "exact = oracle and greedy <= oracle on 50 small instances");
}

#[test]
fn criterion_2_decision_solvers_agree_with_the_oracle() {
    let _guard = serial();
    let deadline = Deadline::none();
    let mut checked = 0;
    for (block, epsilon) in [0i64, 1, 3].into_iter().enumerate() {
        let cfg = GenConfig {
            m: 4,
            n: 6,
            family: Family::Integer { gamma: 20 },
            epsilon,
            seed: 20 + block as u64,
            count: 67,
        };
        for instance in generate(&cfg) {
            let witness = matches!(decision_oracle(&instance).unwrap(), DecisionOutcome::Match(_));
            let solvers: [(&str, &dyn DecisionSolver); 5] = [
                ("search r=0", &SearchSolver::with_r(0)),
                ("search r=1", &SearchSolver::with_r(1)),
                ("search r=6", &SearchSolver::with_r(6)),
                ("search default", &SearchSolver::default()),
                ("dp rho=1", &DpSolver::default()),
            ];
            for (name, solver) in solvers {
                match solver.solve_decision(&instance, &deadline).unwrap() {
                    DecisionOutcome::Match(m) => {
                        assert!(
                            witness,
                            "criterion 2: FAIL - {name} found a match where none exists"
                        );
                        assert!(
                            instance.is_valid_match(&m),
                            "criterion 2: FAIL - {name} returned an invalid match"
                        );
                    }
                    DecisionOutcome::NoMatch => {
                        assert!(!witness, "criterion 2: FAIL - {name} missed a match");
                    }
                }
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 201);
    pass(2, "search (r = 0, 1, 6, default) and dp match the decision oracle on 201 instances");
}

#[test]
fn criterion_3_search_scales_worse_than_dp_but_both_stay_fast() {
    let _guard = serial();
    let deadline = Deadline::after_secs(90.0);
    // mean measures pinned from calibration runs; the 40% band keeps the
    // check robust across toolchains and machines
    let expected: HashMap<(&str, usize), f64> = HashMap::from([
        (("search", 10), 7.9),
        (("search", 20), 21.2),
        (("search", 30), 31.0),
        (("dp", 10), 9.2),
        (("dp", 20), 23.4),
        (("dp", 30), 31.3),
    ]);
    let mut mean_secs: HashMap<(&str, usize), f64> = HashMap::new();
    for n in [10usize, 20, 30] {
        let cfg = GenConfig {
            m: 10,
            n,
            family: Family::Integer { gamma: 10_000 },
            epsilon: 0,
            seed: 1,
            count: 10,
        };
        let solvers: [(&str, &dyn DecisionSolver); 2] =
            [("search", &SearchSolver::default()), ("dp", &DpSolver::default())];
        for (name, solver) in solvers {
            let mut psis = Vec::new();
            let mut total = 0.0;
            for instance in generate(&cfg) {
                let start = Instant::now();
                let out = greedy_solve(&instance, solver, &deadline).unwrap();
                let secs = start.elapsed().as_secs_f64();
                assert!(secs < 90.0, "criterion 3: FAIL - {name} needed {secs:.1}s at N = {n}");
                total += secs;
                psis.push(instance.psi(&out.solution).unwrap());
            }
            let mean = psis.iter().sum::<i64>() as f64 / psis.len() as f64;
            let want = expected[&(name, n)];
            assert!(
                (mean - want).abs() <= 0.4 * want,
                "criterion 3: FAIL - {name} mean measure {mean:.1} at N = {n} is outside {want} +- 40%"
            );
            mean_secs.insert((name, n), total / 10.0);
        }
    }
    // growth from N = 10 to N = 30; sub-millisecond means are floored so
    // the ratio is not noise
    let ratio = |name: &str| mean_secs[&(name, 30)].max(1e-3) / mean_secs[&(name, 10)].max(1e-3);
    let (search, dp) = (ratio("search"), ratio("dp"));
    assert!(
        search >= 4.0 * dp,
        "criterion 3: FAIL - search grew {search:.1}x vs dp {dp:.1}x; expected at least a 4x gap"
    );
    pass(3, "search slows down at least 4x faster than dp as N grows; measures stay in band");
}

fn real_benchmark_mean(epsilon: i64, rho: i64, criterion: usize) -> f64 {
    let cfg = GenConfig {
        m: 100,
        n: 100,
        family: Family::Real { low: -1_000_000, high: 1_000_000, digits: 4 },
        epsilon,
        seed: 1,
        count: 10,
    };
    let solver = DpSolver::new(DpConfig { rho, ..DpConfig::default() });
    let mut psis = Vec::new();
    for instance in generate(&cfg) {
        let start = Instant::now();
        let out = greedy_solve(&instance, &solver, &Deadline::after_secs(90.0)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 90.0, "criterion {criterion}: FAIL - a 100x100 instance took {secs:.1}s");
        assert_eq!(
            out.status,
            ssmp::GreedyStatus::Completed,
            "criterion {criterion}: FAIL - the greedy loop timed out"
        );
        psis.push(instance.psi(&out.solution).unwrap());
    }
    psis.iter().sum::<i64>() as f64 / psis.len() as f64
}

#[test]
fn criterion_4_tight_tolerance_benchmark_lands_in_band() {
    let _guard = serial();
    let mean = real_benchmark_mean(1, 10, 4);
    assert!(
        (185.0..=235.0).contains(&mean),
        "criterion 4: FAIL - mean measure {mean:.1} outside [185, 235]"
    );
    pass(4, "dp at rho = 10 handles 100x100 instances with a one-unit tolerance in band");
}

#[test]
fn criterion_5_loose_tolerance_benchmark_lands_in_band() {
    let _guard = serial();
    let mean = real_benchmark_mean(10_000, 1, 5);
    assert!(
        (210.0..=256.0).contains(&mean),
        "criterion 5: FAIL - mean measure {mean:.1} outside [210, 256]"
    );
    pass(5, "dp at rho = 1 handles 100x100 instances with a whole-amount tolerance in band");
}

#[test]
fn criterion_6_warm_started_exact_never_drops_below_its_start() {
    let _guard = serial();
    let cfg = GenConfig {
        m: 20,
        n: 20,
        family: Family::Real { low: -1_000_000, high: 1_000_000, digits: 4 },
        epsilon: 1,
        seed: 6,
        count: 10,
    };
    let solver = DpSolver::new(DpConfig { rho: 10, ..DpConfig::default() });
    for instance in generate(&cfg) {
        let greedy = greedy_solve(&instance, &solver, &Deadline::after_secs(30.0)).unwrap();
        let floor = instance.psi(&greedy.solution).unwrap();
        let exact = solve_exact(
            &instance,
            &ExactConfig::default(),
            &Deadline::after_secs(3.0),
            Some(&greedy.solution),
        )
        .unwrap();
        assert_ne!(
            exact.status,
            ExactStatus::TimedOutNoIncumbent,
            "criterion 6: FAIL - the warm start was lost"
        );
        assert!(
            exact.psi >= floor,
            "criterion 6: FAIL - final measure {} fell below the warm start {floor}",
            exact.psi
        );
        for &(_, psi) in &exact.incumbents {
            assert!(
                psi >= floor,
                "criterion 6: FAIL - an incumbent ({psi}) fell below the warm start {floor}"
            );
        }
        let solution_psi = instance.psi(&exact.solution).unwrap();
        assert_eq!(solution_psi, exact.psi, "criterion 6: FAIL - reported measure is stale");
    }
    pass(6, "every incumbent of the warm-started exact solver stays at or above its start");
}

#[test]
fn criterion_7_cache_halves_have_exact_power_of_two_sizes() {
    let _guard = serial();
    let b: Vec<i64> = (1..=16).collect();
    for r in [0usize, 4, 8, 12, 16] {
        let cache = SplitCache::build(&b, r, 0).unwrap();
        assert_eq!(cache.prefix_len(), 1 << r, "criterion 7: FAIL - prefix size at r = {r}");
        assert_eq!(cache.keyed_len(), 1 << (16 - r), "criterion 7: FAIL - keyed size at r = {r}");
    }
    pass(7, "split caches hold exactly 2^r prefix and 2^(16-r) keyed entries");
}

#[test]
fn criterion_8_backtracking_reproduces_every_subset() {
    let _guard = serial();
    let start = Instant::now();
    // grouped by sum; index = target, slot = every subset hitting it
    let mut by_sum: Vec<Vec<IndexMask>> = vec![Vec::new(); 61];
    let mut lists = 0u64;
    for len in 1..=6usize {
        let mut values = vec![1i64; len];
        'lists: loop {
            let sum: i64 = values.iter().sum();
            for slot in by_sum.iter_mut().take(sum as usize + 1) {
                slot.clear();
            }
            for bits in 0u64..1 << len {
                let s: i64 = (0..len).filter(|&i| bits >> i & 1 == 1).map(|i| values[i]).sum();
                let mut mask = IndexMask::empty();
                for i in (0..len).filter(|&i| bits >> i & 1 == 1) {
                    mask.set(i);
                }
                by_sum[s as usize].push(mask);
            }
            let table = tabulate(&values, sum, u64::MAX).unwrap();
            for (target, want) in by_sum.iter_mut().enumerate().take(sum as usize + 1) {
                let mut got = backtrack_subsets(&table, target as i64);
                got.sort_unstable();
                want.sort_unstable();
                assert_eq!(
                    &got, want,
                    "criterion 8: FAIL - subsets of {values:?} summing to {target} differ"
                );
            }
            assert!(
                backtrack_subsets(&table, sum + 1).is_empty(),
                "criterion 8: FAIL - found subsets beyond the full sum of {values:?}"
            );
            lists += 1;

            // odometer over all lists with entries in 1..=10
            let mut pos = 0;
            loop {
                if pos == len {
                    break 'lists;
                }
                values[pos] += 1;
                if values[pos] <= 10 {
                    break;
                }
                values[pos] = 1;
                pos += 1;
            }
        }
    }
    assert_eq!(lists, (1..=6).map(|l| 10u64.pow(l)).sum::<u64>());
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "criterion 8: FAIL - the sweep took {elapsed:?}, over the minute budget"
    );
    pass(8, "backtracking equals brute-force enumeration on all 1,111,110 short lists");
}

#[test]
fn criterion_9_rounding_never_hides_a_true_match() {
    let _guard = serial();
    let cfg = GenConfig {
        m: 6,
        n: 6,
        family: Family::Real { low: -1_000_000, high: 1_000_000, digits: 4 },
        epsilon: 1,
        seed: 9,
        count: 100,
    };
    for instance in generate(&cfg) {
        let reorg = discretize_reorganize(&instance, 10);
        assert_eq!(
            reorg.bar_eps, 7,
            "criterion 9: FAIL - widened tolerance is not ceil(0.001 + 6) = 7"
        );
        let sum = |v: &[i64]| v.iter().sum::<i64>();
        let (full_eta, full_lambda) = (sum(&reorg.eta), sum(&reorg.lambda));
        let x_eta = full_eta.min(full_lambda + reorg.bar_eps);
        let x_lambda = full_lambda.min(full_eta + reorg.bar_eps);
        let t_eta = tabulate(&reorg.eta, x_eta, u64::MAX).unwrap();
        let t_lambda = tabulate(&reorg.lambda, x_lambda, u64::MAX).unwrap();
        for w_bits in 1..1u64 << instance.m() {
            for v_bits in 1..1u64 << instance.n() {
                let m = Match {
                    w: subset_of_bits(instance.m(), w_bits),
                    v: subset_of_bits(instance.n(), v_bits),
                };
                if !instance.is_valid_match(&m) {
                    continue;
                }
                let (i, j) = reorg.sums_for_match(&m);
                assert!(
                    (i - j).abs() <= reorg.bar_eps,
                    "criterion 9: FAIL - a valid match rounds outside the widened tolerance"
                );
                assert!(
                    i <= x_eta && j <= x_lambda,
                    "criterion 9: FAIL - a valid match lands beyond the table widths"
                );
                assert!(
                    t_eta.reachable_full(i) && t_lambda.reachable_full(j),
                    "criterion 9: FAIL - a valid match's sums are unreachable in the tables"
                );
            }
        }
    }
    pass(9, "every valid match stays within tolerance and reachable after rounding at rho = 10");
}
