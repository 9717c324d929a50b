//! Rate-energy boundaries of all three designs for one channel draw,
//! written as CSV to the path given on the command line (stdout otherwise).
//!
//! Run with `cargo run --release --example rate_energy_region -- region.csv`.

use swipt::experiments::{region_csv, sweep_region, ChannelRef, ExperimentConfig};
use swipt::model::{generate_channels, ChannelGenSpec, SchemeTag, SystemParams};

fn main() -> swipt::Result<()> {
    let seed = 1;
    let params = SystemParams::reference();
    let ch = generate_channels(&params, &ChannelGenSpec::reference(params.energy_receivers, seed))?;
    let cfg = ExperimentConfig::default();

    let mut regions = Vec::new();
    for scheme in [SchemeTag::Optimal, SchemeTag::Sub1, SchemeTag::Sub2] {
        let region = sweep_region(&params, &ch, scheme, 8, ChannelRef::Seeded { seed, trial: 0 }, &cfg)?;
        eprintln!(
            "{scheme}: r_max {:.4} bits/s/Hz, {} of {} points feasible, monotone {}",
            region.r_max,
            region.points.iter().filter(|p| p.feasible).count(),
            region.points.len(),
            region.is_monotone()
        );
        regions.push(region);
    }
    let csv = region_csv(regions.iter().flat_map(|r| &r.points));
    match std::env::args().nth(1) {
        Some(path) => std::fs::write(&path, csv).map_err(|e| swipt::Error::Io { path: path.into(), source: e })?,
        None => print!("{csv}"),
    }
    Ok(())
}
