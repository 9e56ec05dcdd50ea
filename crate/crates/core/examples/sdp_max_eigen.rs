//! The barrier SDP solver on two small problems: a maximum-eigenvalue
//! program, checked against an eigendecomposition, and the same objective
//! with a log-sum floor that pushes the solution away from the top eigenvector.

use fdhap::linalg::{trace_re, CMat};
use fdhap::optimizer::sdp::{LogFloor, LogTerm};
use fdhap::optimizer::{solve_sdp, SdpOptions, SdpProblem};
use num_complex::Complex64;

fn main() -> fdhap::Result<()> {
    let c = CMat::from_fn(4, 4, |i, j| {
        let (i, j) = (i as f64, j as f64);
        Complex64::new(1.0 / (1.0 + i + j), 0.1 * (i - j))
    });
    let opts = SdpOptions::default();

    let plain = SdpProblem::linear(c.clone(), 1.0);
    let sol = solve_sdp(&plain, &opts)?;
    let lmax = c.clone().symmetric_eigenvalues().max();
    println!("max <C, X>        {:.10}", sol.objective);
    println!("largest eigenvalue {:.10}", lmax);
    println!("trace {:.3e} off, {} Newton steps", (trace_re(&sol.x) - 1.0).abs(), sol.newton_steps);

    let mut e_last = CMat::zeros(4, 4);
    e_last[(3, 3)] = Complex64::new(1.0, 0.0);
    let floored = SdpProblem {
        log_floor: Some(LogFloor {
            terms: vec![LogTerm { weight: 1.0, mat: e_last.scale(50.0) }],
            floor: 2.0,
        }),
        ..plain
    };
    let sol = solve_sdp(&floored, &opts)?;
    println!(
        "\nwith ln(1 + 50 X_33) >= 2: objective {:.6}, X_33 = {:.4}, phase-one steps {}",
        sol.objective,
        sol.x[(3, 3)].re,
        sol.phase_one_steps
    );
    Ok(())
}
