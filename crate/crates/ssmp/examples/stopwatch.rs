//! Rough single-instance timings at benchmark scale. Handy when tuning:
//! `cargo run --release --example stopwatch`

use std::time::Instant;

use ssmp::{greedy_solve, Deadline, DpConfig, DpSolver, Family, GenConfig, SearchSolver};

fn main() {
    let real = |epsilon: i64, seed: u64| GenConfig {
        m: 100,
        n: 100,
        family: Family::Real { low: -1_000_000, high: 1_000_000, digits: 4 },
        epsilon,
        seed,
        count: 1,
    };
    for (label, cfg, rho) in
        [("real eps=1e-4 rho=10", real(1, 1), 10), ("real eps=1 rho=1", real(10_000, 1), 1)]
    {
        let cfg = GenConfig { count: 10, ..cfg };
        let solver = DpSolver::new(DpConfig { rho, ..DpConfig::default() });
        let mut psis = Vec::new();
        let mut secs = Vec::new();
        for instance in ssmp::generate(&cfg) {
            let start = Instant::now();
            let out = greedy_solve(&instance, &solver, &Deadline::after_secs(90.0)).unwrap();
            psis.push(instance.psi(&out.solution).unwrap());
            secs.push(start.elapsed().as_secs_f64());
        }
        let mean = psis.iter().sum::<i64>() as f64 / psis.len() as f64;
        let worst = secs.iter().cloned().fold(0.0, f64::max);
        println!("{label}: psi {psis:?} mean={mean:.1} worst_time={worst:.2}s");
    }

    for n in [10usize, 20, 30] {
        let int = GenConfig {
            m: 10,
            n,
            family: Family::Integer { gamma: 10_000 },
            epsilon: 0,
            seed: 1,
            count: 10,
        };
        for (name, solver) in [
            ("search", &SearchSolver::default() as &dyn ssmp::DecisionSolver),
            ("dp", &DpSolver::default()),
        ] {
            let mut psis = Vec::new();
            let mut total = 0.0;
            for instance in ssmp::generate(&int) {
                let start = Instant::now();
                let out = greedy_solve(&instance, solver, &Deadline::after_secs(90.0)).unwrap();
                total += start.elapsed().as_secs_f64();
                psis.push(instance.psi(&out.solution).unwrap());
            }
            let mean = psis.iter().sum::<i64>() as f64 / psis.len() as f64;
            println!("int {name} M10 N{n}: mean_psi={mean:.1} mean_time={:.4}s", total / 10.0);
        }
    }
}
