//! Evaluates MRC/MRT processing with MRT energy beams on one realization and
//! shows how the time split trades harvested energy against data time.
//!
//! ```text
//! cargo run --release --example beamforming_sinr -- [seed]
//! ```

use fdhap::beamforming::{evaluate, harvested_powers, mrt_baseline};
use fdhap::model::{draw_channels, PathLossProfile, RngStream, SystemParams};

fn main() -> fdhap::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let base = SystemParams::default();
    let losses = PathLossProfile::unit(&base);
    let ch = draw_channels(&base, &losses, RngStream::new(seed, 0))?;
    let beams = mrt_baseline(&ch)?;

    println!("{:>6} {:>12} {:>10} {:>10}", "alpha", "sensor P_u", "UL sum", "DL sum");
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let params = SystemParams { alpha, ..base.clone() };
        let powers = harvested_powers(&ch, &beams.w_e, &params);
        let report = evaluate(&ch, &beams, &params);
        let mean_p = powers.p_ul.iter().sum::<f64>() / powers.p_ul.len() as f64;
        println!(
            "{alpha:>6.1} {mean_p:>12.1} {:>10.3} {:>10.3}",
            report.uplink_rate_sum, report.downlink_rate_sum
        );
    }

    let report = evaluate(&ch, &beams, &base);
    println!("\nper-sensor uplink SINR {:?}", report.uplink.iter().map(|g| format!("{g:.2}")).collect::<Vec<_>>());
    println!("per-user downlink SINR {:?}", report.downlink.iter().map(|g| format!("{g:.2}")).collect::<Vec<_>>());
    Ok(())
}
