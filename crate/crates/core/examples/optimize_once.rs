//! Optimizes the energy beamformer for one channel draw and compares it with
//! the MRT energy beam.
//!
//! ```text
//! cargo run --release --example optimize_once -- [seed] [r_ul_min]
//! ```

use std::time::Instant;

use fdhap::model::{draw_channels, PathLossProfile, RngStream, SystemParams};
use fdhap::optimizer::{default_alpha_grid, mrt_energy_baseline, optimize, OptimizeOptions};

fn main() -> fdhap::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let r_ul_min: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);

    let params = SystemParams::default();
    let losses = PathLossProfile::unit(&params);
    let root = RngStream::new(seed, 0);
    let ch = draw_channels(&params, &losses, root.child(0))?;
    let grid = default_alpha_grid();
    let opts = OptimizeOptions::default();

    let start = Instant::now();
    let res = optimize(&ch, &losses, None, &params, &grid, r_ul_min, &opts, root.child(1))?;
    let elapsed = start.elapsed();
    let base = mrt_energy_baseline(&ch, &losses, None, &params, &grid, r_ul_min, opts.form)?;

    println!("status          {:?}", res.status);
    println!("alpha*          {:.2}", res.alpha_star);
    println!("downlink        {:.4} bits/s/Hz (relaxation {:.4})", res.dl_sum_rate, res.sdr_dl_sum_rate);
    println!("uplink          {:.4} bits/s/Hz (floor {r_ul_min})", res.ul_sum_rate);
    println!("rank-one gap    {:.3e}", res.rank_one_gap);
    println!("SCA iterations  {}", res.sca_trace.len());
    println!("MRT baseline    dl {:.4} ul {:.4} at alpha {:.2}", base.dl_sum_rate, base.ul_sum_rate, base.alpha_star);
    println!("solve time      {:.2?} for {} grid points", elapsed, grid.len());
    Ok(())
}
