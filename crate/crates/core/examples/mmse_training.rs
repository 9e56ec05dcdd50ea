//! Builds the orthogonal training block, runs MMSE estimation, and compares
//! the empirical estimate variances with their closed forms. Pass `--dump` to
//! print one estimate as CSV.
//!
//! ```text
//! cargo run --release --example mmse_training -- [--dump]
//! ```

use fdhap::estimation::{
    design_training, estimate_channels, estimate_variance_si, estimate_variance_user, estimation_error_stats,
};
use fdhap::model::{draw_channels_with, PathLossProfile, RngStream, SystemParams};

fn main() -> fdhap::Result<()> {
    let dump = std::env::args().any(|a| a == "--dump");
    let params = SystemParams { n_tx: 4, n_rx: 8, k_dl: 3, tau: 8, p_dl: 0.5, ..SystemParams::default() };
    let mut losses = PathLossProfile::unit(&params);
    losses.beta_ap_dl = vec![0.2, 0.6, 1.0];

    let design = design_training(&params)?;
    let cross = (&design.energy_seq * design.pilots.adjoint()).norm();
    println!("pilot rows {} x {}, energy rows {} x {}, |E P^H| = {cross:.1e}",
        design.pilots.nrows(), design.pilots.ncols(), design.energy_seq.nrows(), design.energy_seq.ncols());

    if dump {
        let mut rng = RngStream::new(3, 0).rng();
        let ch = draw_channels_with(&params, &losses, &mut rng);
        let est = estimate_channels(&ch, &losses, &design, &params, &mut rng)?;
        est.write_csv(std::io::stdout().lock())?;
        return Ok(());
    }

    let stats = estimation_error_stats(&params, &losses, RngStream::new(3, 0), 5000)?;
    println!("\n{:>5} {:>8} {:>12} {:>12}", "user", "beta", "var(g_hat)", "closed form");
    for k in 0..params.k_dl {
        let b = losses.beta_ap_dl[k];
        println!("{k:>5} {b:>8.2} {:>12.4} {:>12.4}", stats.var_g_hat[k], estimate_variance_user(&params, b));
    }
    println!("SI estimate variance {:.4} (closed form {:.4})", stats.var_si_hat, estimate_variance_si(&params));
    println!("estimate/error correlation: users {:.4}, SI {:.4}", stats.corr_g, stats.corr_si);
    Ok(())
}
