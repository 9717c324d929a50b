//! TOML run configuration with dBm / dB units, resolved to linear values.
//!
//! Run with `cargo run --release --example run_config`.

use swipt::config::RunConfig;

fn main() -> swipt::Result<()> {
    let cfg = RunConfig::from_toml(
        r#"
        points = 12

        [system]
        antennas = 6
        energy_receivers = 2
        power_dbm = 33.0
        er_noise_dbm = [-50.0, -47.0]
        secrecy_target = 1.5

        [channels.generation]
        rho_h_db = -60.0
        rho_g_db = -25.0
        seed = 5
        "#,
    )?;
    let params = cfg.system_params()?;
    let spec = cfg.generation_spec()?;
    let sci = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    println!("budget {:.4} W, ER noise [{}] W", params.power, sci(&params.er_noise));
    println!("path gains: h {:.3e}, g [{}]", spec.rho_h_sq, sci(&spec.rho_g_sq));
    println!("fully resolved configuration:\n{}", cfg.to_toml()?);
    Ok(())
}
