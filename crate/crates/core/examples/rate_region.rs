//! Uplink/downlink sum-rate region of the optimized energy beamformer and
//! of the MRT energy beam, averaged over a few channel realizations.
//!
//! ```text
//! cargo run --release --example rate_region -- [realizations]
//! ```

use fdhap::model::{PathLossProfile, SystemParams};
use fdhap::montecarlo::{rate_region, TrialPlan};

fn main() -> fdhap::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let params = SystemParams::default();
    let losses = PathLossProfile::unit(&params);
    let plan = TrialPlan::new(params, losses, n, 17);
    let floors: Vec<f64> = (0..8).map(f64::from).collect();
    let alphas: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
    let region = rate_region(&plan, &floors, &alphas)?;

    println!("{:>5} | {:>8} {:>8} {:>8} | {:>8} {:>8}", "floor", "opt UL", "opt DL", "SDR DL", "MRT UL", "MRT DL");
    for (o, b) in region.optimized.iter().zip(&region.baseline) {
        let sdr = o.sdr_dl_sum_rate.map_or("-".to_string(), |s| format!("{s:.3}"));
        println!(
            "{:>5.1} | {:>8.3} {:>8.3} {:>8} | {:>8.3} {:>8.3}",
            o.r_ul_min, o.ul_sum_rate, o.dl_sum_rate, sdr, b.ul_sum_rate, b.dl_sum_rate
        );
    }
    Ok(())
}
