mod common;

use soslab::sdp::{solve, weak_duality_check, SdpOptions, SdpStatus};

#[test]
fn planted_corpus() {
    let mut worst = 0;
    for seed in 0..50 {
        let (p, opt) = common::planted_problem(seed);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal, "seed {seed}: {:?}", sol.message);
        assert!((sol.primal_objective - opt).abs() <= 1e-6 * (1.0 + opt.abs()), "seed {seed}");
        assert!(sol.gap <= 1e-6 * (1.0 + sol.primal_objective.abs()));
        assert!(sol.primal_residual <= 1e-7 && sol.dual_residual <= 1e-7);
        assert!(sol.iterations <= 60, "seed {seed}: {} iterations", sol.iterations);
        assert!(weak_duality_check(&p, &sol));
        worst = worst.max(sol.iterations);
    }
    println!("max iterations {worst}");
}
