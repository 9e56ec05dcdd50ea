//! Uplink sum-rate as the array grows while the HAP power shrinks as
//! `E_A / N_t^2`, against the closed-form bound and its limit.

use fdhap::analysis::UplinkBoundForm;
use fdhap::model::{PathLossProfile, SystemParams};
use fdhap::montecarlo::{scaling_experiment, PowerLaw, TrialPlan};

fn main() -> fdhap::Result<()> {
    let params = SystemParams { alpha: 0.2, ..SystemParams::default() };
    let losses = PathLossProfile::unit(&params);
    let plan = TrialPlan::new(params, losses, 2000, 8);
    let rows = scaling_experiment(&plan, &[8, 16, 32, 64, 128, 256], 100.0, PowerLaw::InvSquare, UplinkBoundForm::AsPrinted)?;

    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "N_t", "P_A", "MC", "bound", "limit");
    for r in rows {
        println!(
            "{:>5} {:>10.2e} {:>10.4} {:>10.4} {:>10.4}",
            r.n_tx, r.p_ap, r.mc_rate.mean, r.bound, r.asymptote
        );
    }
    Ok(())
}
