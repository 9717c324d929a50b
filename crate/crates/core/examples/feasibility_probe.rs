//! Largest achievable secrecy rate and feasibility verdicts.
//!
//! Run with `cargo run --release --example feasibility_probe`.

use swipt::model::{generate_channels, ChannelGenSpec, SystemParams};
use swipt::sdr::{check_feasibility, FeasibilityConfig};

fn main() -> swipt::Result<()> {
    let cfg = FeasibilityConfig::default();
    for seed in 0..4 {
        let params = SystemParams::reference();
        let ch = generate_channels(&params, &ChannelGenSpec::reference(params.energy_receivers, seed))?;
        let report = check_feasibility(&params, &ch, &cfg)?;
        println!(
            "seed {seed}: r_max {:.5} bits/s/Hz (IR alone {:.5}), witness IR SINR {:.4e}",
            report.r_max, report.rate_cap, report.gamma0_witness
        );
        for target in [0.0, 0.5 * report.r_max, report.r_max, report.r_max + 0.1] {
            let verdict = check_feasibility(&params.clone().with_target(target), &ch, &cfg)?;
            println!("    target {target:.5}: {}", if verdict.feasible { "feasible" } else { "infeasible" });
        }
    }
    Ok(())
}
