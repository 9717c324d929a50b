//! Optimal secrecy beamforming for one random channel draw.
//!
//! Run with `cargo run --release --example optimal_design`.

use swipt::model::{generate_channels, ChannelGenSpec, SystemParams};
use swipt::optimal::{solve_optimal, SearchConfig};
use swipt::sdr::check_feasibility;

fn main() -> swipt::Result<()> {
    let params = SystemParams::reference();
    let ch = generate_channels(&params, &ChannelGenSpec::reference(params.energy_receivers, 7))?;
    let cfg = SearchConfig::default();

    let r_max = check_feasibility(&params, &ch, &cfg.feasibility)?.r_max;
    let target = 0.5 * r_max;
    println!("largest feasible secrecy rate {r_max:.4} bits/s/Hz, designing for {target:.4}");

    let design = solve_optimal(&params.clone().with_target(target), &ch, &cfg)?;
    let m = &design.metrics;
    println!("design            {}", design.beams.scheme);
    println!("IR SINR target    {:.4e}", design.gamma0.unwrap_or(f64::NAN));
    println!("IR SINR achieved  {:.4e}", m.sinr_ir);
    println!("ER SINRs          {:.4?}", m.sinr_er);
    println!("secrecy rate      {:.6} bits/s/Hz", m.secrecy_rate);
    println!("harvested energy  {:.6e} J/slot (no-secrecy maximum {:.6e})", m.weighted_sum_energy, design.trivial.e_max);
    println!("transmit power    {:.6} W of {} W", design.beams.total_power(), params.power);
    println!("energy beams      {}", design.beams.energy_beam_count());
    if let Some(red) = &design.reduction {
        println!("rank reduction    {:?}, null space dimension {}", red.method, red.null_dim);
    }
    println!(
        "energy covariance rank {} (bound min(K, M) holds: {})",
        design.q_rank.unwrap_or(0),
        design.q_rank_bound_holds
    );
    Ok(())
}
