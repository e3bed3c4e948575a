//! Brute-force dense-matrix oracles for unit tests.
//!
//! Everything here is intentionally independent of the simulation kernels it
//! checks: matrices are built element-by-element from single-qubit factors,
//! and the propagator oracle is a scaled-and-squared Taylor series rather
//! than an eigendecomposition.

use num_complex::Complex64;

use crate::pauli::SignedPauliString;
use crate::syk::SparseSykInstance;

pub type Mat = Vec<Vec<Complex64>>;

fn single_qubit(site: char) -> [[Complex64; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match site {
        'I' => [[one, zero], [zero, one]],
        'X' => [[zero, one], [one, zero]],
        'Y' => [[zero, -i], [i, zero]],
        'Z' => [[one, zero], [zero, -one]],
        _ => unreachable!(),
    }
}

/// Dense matrix of a signed Pauli string. Basis index bit q = qubit q.
pub fn mat_of_string(s: &SignedPauliString) -> Mat {
    let n = s.n_qubits();
    let dim = 1usize << n;
    let phase = Complex64::new(0.0, 1.0).powu(u32::from(s.phase_exp()));
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for col in 0..dim {
        for row in 0..dim {
            let mut v = phase;
            for q in 0..n {
                let sq = single_qubit(s.site(q));
                v *= sq[row >> q & 1][col >> q & 1];
                if v.norm_sqr() == 0.0 {
                    break;
                }
            }
            m[row][col] = v;
        }
    }
    m
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[i][k] * b[k][j];
            }
            *cell = acc;
        }
    }
    out
}

pub fn mat_add_scaled(acc: &mut Mat, m: &Mat, s: Complex64) {
    for (ra, rm) in acc.iter_mut().zip(m.iter()) {
        for (a, b) in ra.iter_mut().zip(rm.iter()) {
            *a += s * b;
        }
    }
}

pub fn scale(m: &Mat, s: Complex64) -> Mat {
    m.iter()
        .map(|row| row.iter().map(|v| s * v).collect())
        .collect()
}

pub fn mat_identity(dim: usize) -> Mat {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn mat_allclose(a: &Mat, b: &Mat, tol: f64) -> bool {
    a.iter()
        .zip(b.iter())
        .all(|(ra, rb)| ra.iter().zip(rb.iter()).all(|(x, y)| (x - y).norm() <= tol))
}

pub fn mat_vec(m: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
        .collect()
}

/// Dense Hamiltonian matrix from the instance's encoded terms.
pub fn dense_hamiltonian_matrix(instance: &SparseSykInstance) -> Mat {
    let l = instance.params().l_qubits();
    let dim = 1usize << l;
    let mut h = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for term in instance.terms() {
        let m = mat_of_string(&term.string);
        mat_add_scaled(&mut h, &m, Complex64::new(term.coefficient, 0.0));
    }
    h
}

/// exp(i·A·t) by scaling-and-squaring the Taylor series.
///
/// Independent of the eigendecomposition path used by the simulator.
pub fn taylor_exp_i_at(a: &Mat, t: f64) -> Mat {
    let dim = a.len();
    // Crude norm bound to pick the scaling power.
    let norm: f64 = a
        .iter()
        .map(|row| row.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let mut squarings = 0u32;
    let mut theta = norm * t.abs();
    while theta > 0.5 {
        theta /= 2.0;
        squarings += 1;
    }
    let dt = t / f64::powi(2.0, squarings as i32);
    let it = Complex64::new(0.0, dt);

    let mut result = mat_identity(dim);
    let mut term = mat_identity(dim);
    for k in 1..=24 {
        term = scale(&mat_mul(&term, a), it / k as f64);
        let mut grew = result.clone();
        mat_add_scaled(&mut grew, &term, Complex64::new(1.0, 0.0));
        result = grew;
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}
