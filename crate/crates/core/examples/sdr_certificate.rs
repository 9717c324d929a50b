//! Solve one semidefinite relaxation at a fixed IR SINR and check its
//! optimality certificate: multipliers, Lagrangian matrices and residuals.
//!
//! Run with `cargo run --release --example sdr_certificate`.

use swipt::linalg::{hermitian_evd, trace_product};
use swipt::model::{generate_channels, ChannelGenSpec, SystemParams};
use swipt::sdr::{build_instance, gamma0_lower_bound, kkt_matrices, solve_sdr, SolverConfig};

fn main() -> swipt::Result<()> {
    let params = SystemParams::reference().with_target(1.0);
    let ch = generate_channels(&params, &ChannelGenSpec::reference(params.energy_receivers, 3))?;
    let gamma0 = 4.0 * gamma0_lower_bound(params.secrecy_target);
    let inst = build_instance(&params, &ch, gamma0)?;
    println!("IR SINR {gamma0}, tolerated eavesdropper SINR {:.4}", inst.gamma_e);

    let sci = |v: &[f64]| v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ");
    let sol = solve_sdr(&inst, &SolverConfig::default());
    println!("status {:?} after {} iterations", sol.status, sol.iterations);
    println!("objective {:.8e} J/slot", sol.objective);
    println!("multipliers: lambda {:.4e}, beta [{}], theta {:.4e}", sol.lambda, sci(&sol.beta), sol.theta);
    println!("strictly positive IR and power multipliers: {}", sol.duals_strictly_positive(SolverConfig::default().dual_floor));
    println!(
        "residuals: primal {:.2e}, dual {:.2e}, complementarity {:.2e}",
        sol.kkt.primal, sol.kkt.dual, sol.kkt.complementarity
    );

    let mats = kkt_matrices(&inst, &sol)?;
    let scale = inst.power.max(1.0);
    println!("Tr(A S) / P = {:.2e}", trace_product(&mats.a, &sol.s) / scale);
    println!("Tr(B Q) / P = {:.2e}", trace_product(&mats.b, &sol.q) / scale);
    let a_top = hermitian_evd(&mats.a)?.values[0];
    let b_top = hermitian_evd(&mats.b)?.values[0];
    println!("largest eigenvalues: A {a_top:.2e}, B {b_top:.2e} (both should be <= 0)");
    println!("S eigenvalues [{}]", sci(&hermitian_evd(&sol.s)?.values));
    println!("slacks (IR, ERs..., power) [{}]", sci(&inst.constraint_slacks(&sol.s, &sol.q)));
    Ok(())
}
