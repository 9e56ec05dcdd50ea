//! Primal log-barrier interior-point solver for small dense Hermitian SDPs.
//!
//! Problem class, over a Hermitian `X` of size `dim` and auxiliary reals `t_k`:
//!
//! ```text
//! maximize   <C, X> + sum_j v_j ln(1 + <B_j, X>) + sum_k [w_k ln(t_k + d_k) - l_k t_k]
//! subject to tr X = T,  X ⪰ 0,
//!            <A_k, X> + s_k <= t_k                      (epigraph rows)
//!            sum_j u_j ln(1 + <F_j, X>) >= r            (optional log floor)
//! ```
//!
//! Newton steps are taken in the congruence-scaled variable `Z` with
//! `X = L Z L^†` and `Z = I` at the current iterate, so the log-det barrier has
//! identity Hessian. Every other term is a scalar function of a linear
//! functional of `X`, which makes the line search exact and cheap.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, herm_to_real_into, hermitize, inner, real_to_herm, trace_re, CMat};

/// `weight * ln(1 + <mat, X>)`.
#[derive(Debug, Clone)]
pub struct LogTerm {
    pub weight: f64,
    pub mat: CMat,
}

/// Constraint `<mat, X> + offset <= t` with objective `weight ln(t + shift) - price t`.
#[derive(Debug, Clone)]
pub struct Epigraph {
    pub mat: CMat,
    pub offset: f64,
    pub weight: f64,
    pub shift: f64,
    pub price: f64,
}

#[derive(Debug, Clone)]
pub struct LogFloor {
    pub terms: Vec<LogTerm>,
    pub floor: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub dim: usize,
    pub trace: f64,
    pub linear: Option<CMat>,
    pub log_objective: Vec<LogTerm>,
    pub epigraphs: Vec<Epigraph>,
    pub log_floor: Option<LogFloor>,
}

impl SdpProblem {
    /// `max <C, X>` over the scaled spectraplex `{X ⪰ 0, tr X = trace}`.
    pub fn linear(c: CMat, trace: f64) -> Self {
        SdpProblem {
            dim: c.nrows(),
            trace,
            linear: Some(c),
            log_objective: Vec::new(),
            epigraphs: Vec::new(),
            log_floor: None,
        }
    }

    /// Objective value at `(x, t)`.
    pub fn objective(&self, x: &CMat, t: &[f64]) -> f64 {
        let mut f = self.linear.as_ref().map_or(0.0, |c| inner(c, x));
        f += log_sum(&self.log_objective, x);
        for (e, &tk) in self.epigraphs.iter().zip(t) {
            f += e.weight * (tk + e.shift).ln() - e.price * tk;
        }
        f
    }

    /// Largest violation of the epigraph and log-floor constraints.
    pub fn max_violation(&self, x: &CMat, t: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for (e, &tk) in self.epigraphs.iter().zip(t) {
            v = v.max(inner(&e.mat, x) + e.offset - tk);
        }
        if let Some(fl) = &self.log_floor {
            v = v.max(fl.floor - log_sum(&fl.terms, x));
        }
        v
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n == 0 || !(self.trace > 0.0) {
            return Err(Error::Domain("SDP needs dim > 0 and a positive trace".into()));
        }
        let square = |m: &CMat| m.nrows() == n && m.ncols() == n;
        let ok = self.linear.as_ref().map_or(true, square)
            && self.log_objective.iter().all(|l| square(&l.mat) && l.weight >= 0.0)
            && self.epigraphs.iter().all(|e| {
                square(&e.mat) && e.weight > 0.0 && e.price > 0.0 && e.shift.is_finite()
            })
            && self
                .log_floor
                .as_ref()
                .map_or(true, |f| f.terms.iter().all(|l| square(&l.mat) && l.weight >= 0.0));
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(
                "SDP data must be square of size dim with positive epigraph weights and prices".into(),
            ))
        }
    }
}

pub(crate) fn log_sum(terms: &[LogTerm], x: &CMat) -> f64 {
    terms.iter().map(|l| l.weight * inner(&l.mat, x).ln_1p()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Stop when the barrier duality-gap bound falls below
    /// `gap_tol * max(1, |objective|)`.
    pub gap_tol: f64,
    /// Barrier-parameter growth per outer iteration.
    pub mu: f64,
    pub t_init: f64,
    /// Centering stops when half the squared Newton decrement drops below this.
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            gap_tol: 1e-9,
            mu: 16.0,
            t_init: 1.0,
            newton_tol: 1e-10,
            max_newton: 600,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: CMat,
    pub t: Vec<f64>,
    pub objective: f64,
    /// Upper bound on `optimum - objective` from the barrier parameter.
    pub gap_bound: f64,
    pub newton_steps: usize,
    pub phase_one_steps: usize,
    pub status: SdpStatus,
}

/// Solves the problem, running a feasibility phase first when the log floor is
/// violated at the scaled identity.
pub fn solve_sdp(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let n = problem.dim;
    let mut x = CMat::identity(n, n).scale(problem.trace / n as f64);
    let mut phase_one_steps = 0;

    if let Some(fl) = &problem.log_floor {
        let margin = 1e-3 * fl.floor.abs().max(1.0);
        if log_sum(&fl.terms, &x) <= fl.floor + margin {
            let aux = SdpProblem {
                dim: n,
                trace: problem.trace,
                linear: None,
                log_objective: fl.terms.clone(),
                epigraphs: Vec::new(),
                log_floor: None,
            };
            let mut stop = |x: &CMat| log_sum(&fl.terms, x) > fl.floor + margin;
            let sol = barrier(&aux, x, opts, Some(&mut stop))?;
            phase_one_steps = sol.newton_steps;
            let reached = log_sum(&fl.terms, &sol.x);
            if reached <= fl.floor {
                return Err(Error::Infeasible(format!(
                    "log constraint floor {:.6} exceeds its maximum {:.6} (gap bound {:.2e})",
                    fl.floor, reached, sol.gap_bound
                )));
            }
            x = sol.x;
        }
    }

    let mut sol = barrier(problem, x, opts, None)?;
    sol.phase_one_steps = phase_one_steps;
    Ok(sol)
}

struct Workspace {
    coords: Vec<DVector<f64>>,
    values: Vec<f64>,
    trace_coords: DVector<f64>,
}

/// Index layout of the matrices whose scaled coordinates are needed.
struct Layout {
    linear: Option<usize>,
    log_obj: std::ops::Range<usize>,
    epi: std::ops::Range<usize>,
    floor: std::ops::Range<usize>,
}

fn layout(p: &SdpProblem) -> (Layout, Vec<&CMat>) {
    let mut mats: Vec<&CMat> = Vec::new();
    let linear = p.linear.as_ref().map(|c| {
        mats.push(c);
        0
    });
    let s = mats.len();
    mats.extend(p.log_objective.iter().map(|l| &l.mat));
    let log_obj = s..mats.len();
    let s = mats.len();
    mats.extend(p.epigraphs.iter().map(|e| &e.mat));
    let epi = s..mats.len();
    let s = mats.len();
    if let Some(f) = &p.log_floor {
        mats.extend(f.terms.iter().map(|l| &l.mat));
    }
    let floor = s..mats.len();
    (
        Layout {
            linear,
            log_obj,
            epi,
            floor,
        },
        mats,
    )
}

/// Square-root factor `L` with `X = L L^†`.
fn factor(x: &CMat) -> Result<CMat> {
    if let Some(ch) = x.clone().cholesky() {
        return Ok(ch.l());
    }
    let e = herm_eigen(x);
    if e.values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Numerical(format!(
            "barrier iterate left the PSD cone (min eigenvalue {:.3e})",
            e.values.last().copied().unwrap_or(f64::NAN)
        )));
    }
    let mut l = e.vectors.clone();
    for (j, v) in e.values.iter().enumerate() {
        l.column_mut(j).scale_mut(v.sqrt());
    }
    Ok(l)
}

fn scaled(mats: &[&CMat], l: &CMat, ws: &mut Workspace) {
    let n = l.nrows();
    let la = l.adjoint();
    for (i, m) in mats.iter().enumerate() {
        let s = &la * *m * l;
        herm_to_real_into(&s, ws.coords[i].as_mut_slice());
        ws.values[i] = ws.coords[i].rows(0, n).sum();
    }
    herm_to_real_into(&(&la * l), ws.trace_coords.as_mut_slice());
}

type StopFn<'a> = &'a mut dyn FnMut(&CMat) -> bool;

fn barrier(
    p: &SdpProblem,
    mut x: CMat,
    opts: &SdpOptions,
    mut stop: Option<StopFn<'_>>,
) -> Result<SdpSolution> {
    let n = p.dim;
    let nz = n * n;
    let m = p.epigraphs.len();
    let dim = nz + m;
    let (lay, mats) = layout(p);
    let mut ws = Workspace {
        coords: vec![DVector::zeros(nz); mats.len()],
        values: vec![0.0; mats.len()],
        trace_coords: DVector::zeros(nz),
    };

    // epigraph variables start strictly inside and near their own optimum
    let mut t: Vec<f64> = p
        .epigraphs
        .iter()
        .map(|e| {
            let q = inner(&e.mat, &x) + e.offset;
            let best = e.weight / e.price - e.shift;
            let mut tk = q.max(best) + 0.1 * (q.abs() + 1.0);
            if tk + e.shift <= 0.0 {
                tk = -e.shift + q.abs() + 1.0;
            }
            tk
        })
        .collect();

    let nu = (n + m + usize::from(p.log_floor.is_some())) as f64;
    let mut tb = opts.t_init;
    let mut steps = 0;
    let mut grad = DVector::<f64>::zeros(dim);
    let mut status = SdpStatus::MaxIterations;

    'outer: loop {
        // centering
        let mut quad_steps = 0;
        loop {
            if steps >= opts.max_newton {
                break 'outer;
            }
            let l = factor(&x)?;
            scaled(&mats, &l, &mut ws);
            // Hessian = diag(D0) + sum_i s_i u_i u_i^T; the low-rank part is
            // handled through the Woodbury identity
            let mut d0 = DVector::<f64>::from_element(dim, 1.0);
            let mut us: Vec<(DVector<f64>, f64)> = Vec::new();
            let pad = |v: &DVector<f64>| -> DVector<f64> {
                let mut out = DVector::zeros(dim);
                out.rows_mut(0, nz).copy_from(v);
                out
            };
            grad.fill(0.0);
            for i in 0..n {
                grad[i] = 1.0;
            }
            if let Some(i) = lay.linear {
                grad.rows_mut(0, nz).axpy(tb, &ws.coords[i], 1.0);
            }
            for (j, i) in lay.log_obj.clone().enumerate() {
                let w = p.log_objective[j].weight;
                let u = 1.0 + ws.values[i];
                let b = &ws.coords[i];
                grad.rows_mut(0, nz).axpy(tb * w / u, b, 1.0);
                us.push((pad(b), tb * w / (u * u)));
            }
            for (k, i) in lay.epi.clone().enumerate() {
                let e = &p.epigraphs[k];
                let slack = t[k] - ws.values[i] - e.offset;
                let mut v = DVector::<f64>::zeros(dim);
                v.rows_mut(0, nz).axpy(-1.0 / slack, &ws.coords[i], 0.0);
                v[nz + k] = 1.0 / slack;
                grad += &v;
                us.push((v, 1.0));
                let sh = t[k] + e.shift;
                grad[nz + k] += tb * (e.weight / sh - e.price);
                d0[nz + k] = tb * e.weight / (sh * sh);
            }
            if let Some(fl) = &p.log_floor {
                let mut gsum = -fl.floor;
                let mut dg = DVector::<f64>::zeros(nz);
                for (j, i) in lay.floor.clone().enumerate() {
                    let w = fl.terms[j].weight;
                    let u = 1.0 + ws.values[i];
                    gsum += w * u.ln();
                    dg.axpy(w / u, &ws.coords[i], 1.0);
                }
                if !(gsum > 0.0) {
                    return Err(Error::Numerical("log-floor slack lost positivity".into()));
                }
                for (j, i) in lay.floor.clone().enumerate() {
                    let w = fl.terms[j].weight;
                    let u = 1.0 + ws.values[i];
                    us.push((pad(&ws.coords[i]), w / (u * u * gsum)));
                }
                grad.rows_mut(0, nz).axpy(1.0 / gsum, &dg, 1.0);
                us.push((pad(&dg), 1.0 / (gsum * gsum)));
            }
            us.retain(|(_, c)| *c > 0.0);

            // With A = D0^{-1/2} U S^{1/2} = Q R and R = W Σ V^T the inverse is
            // D0^{-1/2} (I - QW diag(σ²/(1+σ²)) (QW)^T) D0^{-1/2}, which stays
            // bounded even when S is huge or U has dependent columns.
            let sq = d0.map(f64::sqrt);
            let (qw, shrink) = if us.is_empty() {
                (DMatrix::<f64>::zeros(dim, 0), DVector::<f64>::zeros(0))
            } else {
                let a = DMatrix::from_fn(dim, us.len(), |i, j| us[j].0[i] * us[j].1.sqrt() / sq[i]);
                let qr = a.qr();
                let svd = qr.r().svd(true, false);
                let w = svd.u.ok_or_else(|| Error::Numerical("SVD of the Newton system failed".into()))?;
                let shrink = svd.singular_values.map(|s| s * s / (1.0 + s * s));
                (qr.q() * w, shrink)
            };
            let solve = |rhs: &DVector<f64>| -> DVector<f64> {
                let z = rhs.component_div(&sq);
                let c = (qw.transpose() * &z).component_mul(&shrink);
                (z - &qw * c).component_div(&sq)
            };
            let mut e_full = DVector::<f64>::zeros(dim);
            e_full.rows_mut(0, nz).copy_from(&ws.trace_coords);
            let w1 = solve(&grad);
            let w2 = solve(&e_full);
            let r_eq = p.trace - trace_re(&x);
            let nu_eq = (e_full.dot(&w1) - r_eq) / e_full.dot(&w2);
            let delta = &w1 - w2.scale(nu_eq);
            let dec = delta.dot(&(&grad - e_full.scale(nu_eq)));
            steps += 1;

            if dec * 0.5 <= opts.newton_tol {
                break;
            }
            // quadratic convergence takes a handful of steps from dec < 0.05;
            // beyond that the decrement sits at its roundoff floor
            if dec < 0.05 {
                quad_steps += 1;
                if quad_steps > 6 {
                    break;
                }
            }

            let dz = real_to_herm(&delta.as_slice()[..nz], n);
            let mu_eig = hermitize(&dz).symmetric_eigenvalues();
            let mu_min = mu_eig.iter().copied().fold(f64::INFINITY, f64::min);
            let mut s = if mu_min < 0.0 { (0.99 / -mu_min).min(1.0) } else { 1.0 };

            // directional data for every linear functional along the step
            // The trace equality is only met up to cancellation error at high
            // barrier weight, so every trial point is renormalized to the exact
            // trace and the barrier is evaluated there.
            let dvals: Vec<f64> = ws.coords.iter().map(|c| c.dot(&delta.rows(0, nz))).collect();
            let tr0 = trace_re(&x);
            let dtr = ws.trace_coords.dot(&delta.rows(0, nz));
            let renorm = |s: f64| p.trace / (tr0 + s * dtr);
            let phi = |s: f64| -> Option<f64> {
                let c = renorm(s);
                if !(c > 0.0) {
                    return None;
                }
                let mut f = n as f64 * c.ln();
                for &mu in mu_eig.iter() {
                    let a = 1.0 + s * mu;
                    if a <= 0.0 {
                        return None;
                    }
                    f += a.ln();
                }
                let val = |i: usize| c * (ws.values[i] + s * dvals[i]);
                let mut obj = 0.0;
                if let Some(i) = lay.linear {
                    obj += val(i);
                }
                for (j, i) in lay.log_obj.clone().enumerate() {
                    let u = 1.0 + val(i);
                    if u <= 0.0 {
                        return None;
                    }
                    obj += p.log_objective[j].weight * u.ln();
                }
                for (k, i) in lay.epi.clone().enumerate() {
                    let e = &p.epigraphs[k];
                    let tk = t[k] + s * delta[nz + k];
                    let slack = tk - val(i) - e.offset;
                    let sh = tk + e.shift;
                    if slack <= 0.0 || sh <= 0.0 {
                        return None;
                    }
                    f += slack.ln();
                    obj += e.weight * sh.ln() - e.price * tk;
                }
                if let Some(fl) = &p.log_floor {
                    let mut g = -fl.floor;
                    for (j, i) in lay.floor.clone().enumerate() {
                        let u = 1.0 + val(i);
                        if u <= 0.0 {
                            return None;
                        }
                        g += fl.terms[j].weight * u.ln();
                    }
                    if g <= 0.0 {
                        return None;
                    }
                    f += g.ln();
                }
                Some(f + tb * obj)
            };
            let phi0 = phi(0.0).ok_or_else(|| Error::Numerical("iterate left the barrier domain".into()))?;
            // inside the quadratic-convergence region the barrier value is
            // flatter than its roundoff, so only feasibility is checked
            let quadratic = dec < 0.05;
            let accepted = loop {
                match phi(s) {
                    Some(_) if quadratic => break true,
                    Some(v) if v >= phi0 + 0.25 * s * dec => break true,
                    _ => {}
                }
                s *= 0.5;
                if s < 1e-14 {
                    break false;
                }
            };
            if !accepted {
                // no further progress is numerically possible at this barrier weight
                break;
            }
            let step = CMat::identity(n, n) + dz.scale(s);
            x = hermitize(&(&l * step * l.adjoint()));
            x.scale_mut(p.trace / trace_re(&x));
            for k in 0..m {
                t[k] += s * delta[nz + k];
            }
            if let Some(f) = stop.as_mut() {
                if f(&x) {
                    status = SdpStatus::Converged;
                    break 'outer;
                }
            }
        }

        let obj = p.objective(&x, &t);
        if nu / tb <= opts.gap_tol * obj.abs().max(1.0) {
            status = SdpStatus::Converged;
            break;
        }
        tb *= opts.mu;
    }

    let objective = p.objective(&x, &t);
    Ok(SdpSolution {
        x,
        t,
        objective,
        gap_bound: nu / tb,
        newton_steps: steps,
        phase_one_steps: 0,
        status,
    })
}
