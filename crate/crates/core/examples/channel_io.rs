//! Channel files: draw a realization, save it as JSON and load it back.
//!
//! Run with `cargo run --release --example channel_io`.

use swipt::model::{generate_channels_for_trial, ChannelGenSpec, ChannelSet, SystemParams};

fn main() -> swipt::Result<()> {
    let params = SystemParams::reference();
    let spec = ChannelGenSpec::reference(params.energy_receivers, 42);
    // every Monte Carlo trial has its own random stream under the same seed
    let ch = generate_channels_for_trial(&params, &spec, 3)?;

    let path = std::env::temp_dir().join("swipt_channels_example.json");
    ch.write(&path)?;
    let back = ChannelSet::read(&path)?;
    assert_eq!(back, ch);
    println!("wrote and re-read {}", path.display());
    println!("|h|^2 = {:.4e}", ch.h.norm_squared());
    for (k, g) in ch.g.iter().enumerate() {
        println!("|g_{}|^2 = {:.4e}", k + 1, g.norm_squared());
    }
    println!("{}", back.to_json()?);
    std::fs::remove_file(&path).ok();
    Ok(())
}
