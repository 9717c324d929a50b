//! Mean rate-energy boundaries over random channel draws.
//!
//! Run with `cargo run --release --example monte_carlo`.

use swipt::experiments::{monte_carlo, MonteCarloConfig, RateAxis};
use swipt::model::{ChannelGenSpec, SchemeTag, SystemParams};

fn main() -> swipt::Result<()> {
    let params = SystemParams::reference();
    let spec = ChannelGenSpec::reference(params.energy_receivers, 2024);
    let cfg = MonteCarloConfig {
        n_trials: 6,
        n_points: 5,
        absolute_grid: false,
        ..MonteCarloConfig::default()
    };
    let schemes = [SchemeTag::Optimal, SchemeTag::Sub1, SchemeTag::Sub2];
    let summary = monte_carlo(&params, &spec, &schemes, &cfg)?;

    for t in &summary.trials {
        println!("trial {} (stream {}): r_max {:.4} bits/s/Hz", t.trial, t.stream, t.r_max);
    }
    println!("mean energy in mJ/slot on the normalized rate grid (feasible trials / all):");
    print!("{:>8}", "r/r_max");
    for s in schemes {
        print!("{:>18}", s.to_string());
    }
    println!();
    for j in 0..cfg.n_points {
        let frac = summary.curve(schemes[0], RateAxis::Normalized).unwrap().grid[j];
        print!("{frac:>8.3}");
        for s in schemes {
            let c = summary.curve(s, RateAxis::Normalized).unwrap();
            let e = c.mean_energy[j].map_or("-".to_string(), |e| format!("{:.4}", e * 1e3));
            print!("{:>12} {:>2}/{}", e, c.feasible[j], summary.n_trials);
        }
        println!();
    }
    println!("quarantined trials: {}", summary.failures.len());
    Ok(())
}
