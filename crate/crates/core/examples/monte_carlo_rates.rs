//! Monte Carlo ergodic rates with perfect and estimated CSI next to the
//! closed-form lower bounds.
//!
//! ```text
//! cargo run --release --example monte_carlo_rates -- [trials]
//! ```

use fdhap::analysis::{downlink_rate_lower_bound, uplink_rate_lower_bound, uplink_rate_lower_bound_icsi, RateBoundInputs};
use fdhap::model::{PathLossProfile, SystemParams};
use fdhap::montecarlo::{mc_rates, CsiMode, TrialPlan};

fn main() -> fdhap::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let params = SystemParams { n_tx: 64, n_rx: 64, tau: 69, ..SystemParams::default() };
    let losses = PathLossProfile::unit(&params);
    let inputs = RateBoundInputs::new(params.clone(), losses.clone());

    let perfect = mc_rates(&TrialPlan::new(params.clone(), losses.clone(), trials, 1))?;
    let estimated = mc_rates(&TrialPlan { csi_mode: CsiMode::Estimated, ..TrialPlan::new(params, losses, trials, 2) })?;

    let ul = perfect.uplink[0];
    let ul_e = estimated.uplink[0];
    let dl = perfect.downlink[0];
    println!("uplink, perfect CSI    {:.4} +- {:.4}  bound {:.4}", ul.mean, ul.std_error, uplink_rate_lower_bound(&inputs, 0)?);
    println!("uplink, estimated CSI  {:.4} +- {:.4}  bound {:.4}", ul_e.mean, ul_e.std_error, uplink_rate_lower_bound_icsi(&inputs, 0)?);
    println!("downlink, perfect CSI  {:.4} +- {:.4}  bound {:.4}", dl.mean, dl.std_error, downlink_rate_lower_bound(&inputs, 0)?);
    println!("downlink, estimated    {:.4} +- {:.4}", estimated.downlink[0].mean, estimated.downlink[0].std_error);
    println!("sum rates: UL {:.3}, DL {:.3} ({trials} trials)", perfect.uplink_sum.mean, perfect.downlink_sum.mean);
    Ok(())
}
