//! Closed-form rate bounds and single-integral rate expressions across array
//! sizes, with perfect and estimated CSI.

use fdhap::analysis::{
    downlink_rate_integral, downlink_rate_lower_bound, uplink_rate_integral, uplink_rate_lower_bound,
    uplink_rate_lower_bound_icsi, QuadratureConfig, RateBoundInputs,
};
use fdhap::model::{PathLossProfile, SystemParams};

fn main() -> fdhap::Result<()> {
    let quad = QuadratureConfig::default();
    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "N", "UL bound", "UL icsi", "UL integ", "DL bound", "DL integ"
    );
    for n in [8, 16, 32, 64, 128, 256] {
        let params = SystemParams { n_tx: n, n_rx: n, tau: n + 5, ..SystemParams::default() };
        let inputs = RateBoundInputs::new(params.clone(), PathLossProfile::unit(&params));
        println!(
            "{n:>5} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            uplink_rate_lower_bound(&inputs, 0)?,
            uplink_rate_lower_bound_icsi(&inputs, 0)?,
            uplink_rate_integral(&inputs, 0, &quad)?,
            downlink_rate_lower_bound(&inputs, 0)?,
            downlink_rate_integral(&inputs, 0, &quad)?,
        );
    }
    Ok(())
}
