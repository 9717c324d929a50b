//! The two closed-form designs next to the optimal one, across targets.
//!
//! Run with `cargo run --release --example suboptimal_schemes`.

use swipt::model::{generate_channels, ChannelGenSpec, SystemParams};
use swipt::optimal::{solve_optimal, SearchConfig};
use swipt::sdr::check_feasibility;
use swipt::suboptimal::{scheme1, scheme1_rate_limit, scheme2, scheme2_rate_limit, Scheme2Config};

fn show(result: swipt::Result<f64>) -> String {
    match result {
        Ok(e) => format!("{:>12.4e}", e),
        Err(_) => format!("{:>12}", "-"),
    }
}

fn main() -> swipt::Result<()> {
    let params = SystemParams::reference();
    let ch = generate_channels(&params, &ChannelGenSpec::reference(params.energy_receivers, 11))?;
    let search = SearchConfig::default();
    let s2 = Scheme2Config::default();

    let r_opt = check_feasibility(&params, &ch, &search.feasibility)?.r_max;
    println!(
        "rate limits: optimal {:.4}, scheme I {:.4}, scheme II {:.4} bits/s/Hz",
        r_opt,
        scheme1_rate_limit(&params, &ch)?,
        scheme2_rate_limit(&params, &ch, &s2)?
    );
    println!("{:>8} {:>12} {:>12} {:>12}", "rate", "optimal", "scheme I", "scheme II");
    for j in 0..=6 {
        let r = r_opt * j as f64 / 6.0;
        let p = params.clone().with_target(r);
        println!(
            "{:>8.4} {} {} {}",
            r,
            show(solve_optimal(&p, &ch, &search).map(|d| d.energy())),
            show(scheme1(&p, &ch).map(|d| d.energy)),
            show(scheme2(&p, &ch, &s2).map(|d| d.energy)),
        );
    }
    let mid = params.clone().with_target(0.5 * r_opt);
    if let Ok(d) = scheme2(&mid, &ch, &s2) {
        println!(
            "scheme II at {:.4}: feasible powers [{:.4e}, {:.4e}] W, branch {:?}, chose {:.4e} W",
            mid.secrecy_target, d.p0_min, d.p0_max, d.branch, d.p0
        );
    }
    Ok(())
}
