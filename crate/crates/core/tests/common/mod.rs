#![allow(dead_code)]

use fdhap::linalg::CMat;
use fdhap::model::complex_gaussian;
use fdhap::optimizer::SdrProblem;
use num_complex::Complex64;
use rand::Rng;

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| complex_gaussian(rng, 1.0));
    (&a + a.adjoint()).scale(0.5)
}

/// Best downlink objective over unit-norm `w = (cos t, e^{i p} sin t)` that
/// meets the uplink floor, on a `steps x 2 steps` grid. `None` if no grid
/// point is feasible.
pub fn toy_grid_search(problem: &SdrProblem, steps: usize) -> Option<(f64, CMat)> {
    let mut best: Option<(f64, CMat)> = None;
    for i in 0..=steps {
        let t = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
        for j in 0..2 * steps {
            let p = std::f64::consts::PI * j as f64 / steps as f64;
            let w = CMat::from_column_slice(
                2,
                1,
                &[Complex64::new(t.cos(), 0.0), Complex64::from_polar(t.sin(), p)],
            );
            let (dl, ul) = problem.evaluate_beam(&w);
            if problem.meets_uplink(ul, 0.0) && best.as_ref().map_or(true, |b| dl > b.0) {
                best = Some((dl, w));
            }
        }
    }
    best
}
