//! Lanczos time stepping for e^{iHt}|ψ⟩ with on-the-fly Pauli-term matvec.
//!
//! H is Hermitian, so the Lanczos recurrence produces a real symmetric
//! tridiagonal T; the step propagator is V·e^{i·dt·T}·e₁ with the small
//! exponential evaluated through the tridiagonal eigendecomposition. Steps
//! are halved until the standard a-posteriori residual estimate falls below
//! the local tolerance.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::syk::SykTerm;

/// Local step tolerance for the adaptive Lanczos propagator.
pub const KRYLOV_TOL: f64 = 1e-12;

const MAX_BASIS: usize = 48;
const BREAKDOWN: f64 = 1e-14;

/// y += c_n P_n x accumulated over all terms.
fn apply_hamiltonian(terms: &[SykTerm], x: &[Complex64], y: &mut [Complex64]) {
    y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    for term in terms {
        let xm = term.string.x_mask() as usize;
        let zm = term.string.z_mask();
        let c0 = Complex64::new(0.0, 1.0).powu(term.string.y_count()) * term.coefficient;
        for (col, &amp) in x.iter().enumerate() {
            let par = (col as u64 & zm).count_ones() % 2;
            let val = if par == 0 { c0 } else { -c0 };
            y[col ^ xm] += val * amp;
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// exp(i·dt·T)·e₁·scale for the real symmetric tridiagonal (alpha, beta),
/// returning the Krylov-space coefficient vector.
fn tridiag_exp_e1(alpha: &[f64], beta: &[f64], dt: f64, scale: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = Mat::<f64>::zeros(m, m);
    for (j, &a) in alpha.iter().enumerate() {
        t[(j, j)] = a;
    }
    for (j, &b) in beta.iter().enumerate() {
        t[(j, j + 1)] = b;
        t[(j + 1, j)] = b;
    }
    let evd = t
        .self_adjoint_eigen(Side::Lower)
        .expect("small tridiagonal eigendecomposition");
    let evals: Vec<f64> = (0..m).map(|k| evd.S()[k]).collect();
    let q = evd.U();
    // Q e^{i dt Λ} Qᵀ e₁
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        let w = Complex64::new(0.0, evals[k] * dt).exp() * q[(0, k)] * scale;
        for (j, o) in out.iter_mut().enumerate() {
            *o += q[(j, k)] * w;
        }
    }
    out
}

/// e^{iHt}|ψ⟩ by adaptive Lanczos stepping.
pub fn krylov_evolve(
    terms: &[SykTerm],
    l: usize,
    t: f64,
    psi: &[Complex64],
    tol: f64,
) -> Vec<Complex64> {
    let dim = 1usize << l;
    debug_assert_eq!(psi.len(), dim);
    if terms.is_empty() || t == 0.0 {
        return psi.to_vec();
    }

    let mut current = psi.to_vec();
    let mut remaining = t;
    let direction = t.signum();

    while remaining.abs() > 1e-15 {
        let beta0 = norm(&current);
        if beta0 < 1e-300 {
            return current;
        }

        // Build the Lanczos basis once per step attempt set; the same basis
        // is reused when the step is halved.
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(MAX_BASIS);
        basis.push(current.iter().map(|a| a / beta0).collect());
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        let mut breakdown = false;
        let mut tail_beta = 0.0;
        for j in 0..MAX_BASIS {
            apply_hamiltonian(terms, &basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            for (wi, vi) in w.iter_mut().zip(basis[j].iter()) {
                *wi -= a * vi;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wi, vi) in w.iter_mut().zip(basis[j - 1].iter()) {
                    *wi -= b * vi;
                }
            }
            // One full re-orthogonalization pass keeps the basis clean at
            // the accuracy the local tolerance demands.
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v.iter()) {
                    *wi -= c * vi;
                }
            }
            let b = norm(&w);
            tail_beta = b;
            if b < BREAKDOWN {
                breakdown = true;
                break;
            }
            if j + 1 == MAX_BASIS {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }

        let mut dt = remaining;
        let m = alpha.len();
        debug_assert_eq!(beta.len(), m - 1);
        let coeffs = loop {
            let coeffs = tridiag_exp_e1(&alpha, &beta, dt, beta0);
            if breakdown {
                break coeffs;
            }
            // Residual estimate: |β_m · (e^{i dt T})_{m,1}|.
            let est = (tail_beta * coeffs[m - 1].norm()).abs();
            if est <= tol * beta0 || dt.abs() < 1e-12 {
                break coeffs;
            }
            dt *= 0.5;
        };

        let mut next = vec![Complex64::new(0.0, 0.0); dim];
        for (v, &c) in basis.iter().zip(coeffs.iter()) {
            for (ni, vi) in next.iter_mut().zip(v.iter()) {
                *ni += c * vi;
            }
        }
        current = next;
        remaining -= dt;
        // Guard against sign overshoot from accumulated rounding.
        if remaining * direction < 0.0 {
            break;
        }
    }
    current
}
