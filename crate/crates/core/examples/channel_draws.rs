//! Drops nodes on a disk, draws fading channels, and shows the per-antenna
//! channel energy settling to the path loss as the array grows.
//!
//! ```text
//! cargo run --release --example channel_draws -- [seed]
//! ```

use fdhap::linalg::col_norm_sqr;
use fdhap::model::{
    draw_channels, sample_path_losses, DiskModel, PathLossModel, RngStream, SystemParams,
};

fn main() -> fdhap::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let disk = DiskModel {
        radius: 20.0,
        exponent: 3.0,
        reference_gain: 1.0,
        reference_distance: 1.0,
    };

    let base = SystemParams::default();
    let losses = sample_path_losses(&PathLossModel::Disk(disk), &base, RngStream::new(seed, 99))?;
    println!("sensor path losses  {:?}", losses.beta_ap_ul.iter().map(|b| format!("{b:.2e}")).collect::<Vec<_>>());
    println!("user path losses    {:?}", losses.beta_ap_dl.iter().map(|b| format!("{b:.2e}")).collect::<Vec<_>>());

    println!("\n{:>6} {:>14} {:>10}", "N_t", "|g|^2/(N_t b)", "SI power");
    for n_tx in [4, 16, 64, 256, 1024] {
        let params = SystemParams { n_tx, tau: n_tx + base.k_dl, ..base.clone() };
        let ch = draw_channels(&params, &losses, RngStream::new(seed, n_tx as u64))?;
        let ratio = col_norm_sqr(&ch.g_ap_ul, 0) / (n_tx as f64 * losses.beta_ap_ul[0]);
        let si = ch.h_si.norm_squared() / (params.n_rx * n_tx) as f64;
        println!("{n_tx:>6} {ratio:>14.4} {si:>10.4}");
    }
    Ok(())
}
