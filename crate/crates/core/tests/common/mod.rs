//! Reference evolution by direct expansion of creation operators.
//!
//! A Fock state `|S⟩ = ∏ (a_i†)^{s_i} / √(s_i!) |0⟩` is evolved by substituting
//! `a_i† → Σ_j U[i][j] a_j†` and multiplying out the polynomial. No permanents
//! are involved.
#![allow(dead_code)]

use std::collections::HashMap;

use nlbs::fock::factorial;
use nlbs::{ComplexMatrix, FockState};
use num_complex::Complex64;

/// Polynomial in creation operators: monomial exponents → coefficient.
type Poly = HashMap<Vec<usize>, Complex64>;

fn expand(u: &ComplexMatrix, input: &FockState) -> Poly {
    let m = input.modes();
    let mut poly: Poly = HashMap::new();
    poly.insert(vec![0; m], Complex64::new(1.0, 0.0));
    for i in 0..m {
        for _ in 0..input.get(i) {
            let mut next: Poly = HashMap::new();
            for (mono, c) in &poly {
                for j in 0..m {
                    let coeff = u[(i, j)];
                    if coeff == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut mono2 = mono.clone();
                    mono2[j] += 1;
                    *next.entry(mono2).or_default() += c * coeff;
                }
            }
            poly = next;
        }
    }
    let norm = (input.normalization_product() as f64).sqrt();
    poly.values_mut().for_each(|c| *c /= norm);
    poly
}

/// Output state of `U` on `input`, as Fock-basis amplitudes.
pub fn evolve(u: &ComplexMatrix, input: &FockState) -> HashMap<FockState, Complex64> {
    expand(u, input)
        .into_iter()
        .map(|(mono, c)| {
            let state = FockState::new(mono);
            let amp = c * (state.normalization_product() as f64).sqrt();
            (state, amp)
        })
        .collect()
}

/// Transition amplitude from the expansion.
pub fn amplitude(u: &ComplexMatrix, input: &FockState, output: &FockState) -> Complex64 {
    evolve(u, input).get(output).copied().unwrap_or_default()
}

/// `W`, then `exp(-i r_x² φ)` on 0-based mode `x0`, then `V`.
pub fn nonlinear_evolve(
    w: &ComplexMatrix,
    x0: usize,
    phi: f64,
    v: &ComplexMatrix,
    input: &FockState,
) -> HashMap<FockState, Complex64> {
    let mut out: HashMap<FockState, Complex64> = HashMap::new();
    for (r, a) in evolve(w, input) {
        let rx = r.get(x0) as f64;
        let a = a * Complex64::from_polar(1.0, -rx * rx * phi);
        for (t, b) in evolve(v, &r) {
            *out.entry(t).or_default() += a * b;
        }
    }
    out
}

pub fn nonlinear_amplitude(
    w: &ComplexMatrix,
    x0: usize,
    phi: f64,
    v: &ComplexMatrix,
    input: &FockState,
    output: &FockState,
) -> Complex64 {
    nonlinear_evolve(w, x0, phi, v, input)
        .get(output)
        .copied()
        .unwrap_or_default()
}

pub fn fact(n: usize) -> f64 {
    factorial(n) as f64
}

pub fn beamsplitter() -> ComplexMatrix {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_rows(&[vec![h, h], vec![h, -h]]).unwrap()
}

pub fn st(v: &[usize]) -> FockState {
    FockState::new(v.to_vec())
}
