//! Cross-checks against independent oracles on a few instances; the full
//! runs live in the acceptance target.

mod common;

use common::{brute_force_m2k1, channels, clarabel_sdr, params};
use swipt::optimal::{solve_optimal, SearchConfig};
use swipt::sdr::{build_instance, check_feasibility, solve_sdr, FeasibilityConfig, SdrStatus, SolverConfig};

#[test]
fn relaxation_matches_general_conic_solver() {
    let p = params(4, 3);
    for seed in 100..103 {
        let ch = channels(&p, seed);
        let report = check_feasibility(&p, &ch, &FeasibilityConfig::default()).unwrap();
        let pt = p.clone().with_target(0.5 * report.r_max);
        let inst = build_instance(&pt, &ch, report.gamma0_witness).unwrap();
        let ours = solve_sdr(&inst, &SolverConfig::default());
        assert_eq!(ours.status, SdrStatus::Optimal);
        let oracle = clarabel_sdr(&inst);
        let rel = (ours.objective - oracle.objective).abs() / oracle.objective;
        assert!(rel <= 1e-5, "seed {seed}: {} vs {} ({rel:e})", ours.objective, oracle.objective);
    }
}

#[test]
fn two_antenna_design_matches_brute_force() {
    let p = params(2, 1);
    let cfg = SearchConfig::default();
    for seed in 200..202 {
        let ch = channels(&p, seed);
        let r_max = check_feasibility(&p, &ch, &cfg.feasibility).unwrap().r_max;
        let pt = p.clone().with_target(0.5 * r_max);
        let ours = solve_optimal(&pt, &ch, &cfg).unwrap().energy();
        let oracle = brute_force_m2k1(&pt, &ch, 48);
        assert!(oracle <= ours * (1.0 + 1e-6), "seed {seed}: oracle {oracle} above design {ours}");
        assert!(ours <= oracle * 1.02, "seed {seed}: design {ours} vs oracle {oracle}");
    }
}
