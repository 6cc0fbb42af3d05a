//! Amplitudes of a three-step evolution `W → N → V` where `N` is a
//! photon-number-preserving non-linear layer.
//!
//! Mode indices in this module's public interface are 1-based.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{enumerate_states, FockState, StateSpace};
use crate::linalg::{check_states, matmul, permanent_submatrix, phase_shifter, ComplexMatrix};
use crate::linear_bs::{amplitudes_into, Distribution, Indexed, UNITARY_TOLERANCE};

/// Largest intermediate space for which the literal double sum is evaluated.
pub const DENSE_GATE_MAX_STATES: usize = 2_000;

/// Non-linear layer acting on Φ(m, n).
#[derive(Clone, Debug)]
pub enum NonlinearGate {
    /// `exp(-i r_x² φ)` on 1-based mode `x`.
    SingleModePhase { x: usize, phi: f64 },
    /// Unit-modulus factor per intermediate state.
    GeneralDiagonal(HashMap<FockState, Complex64>),
    /// Dense transition matrix `N[R][Q]` indexed by the ranks of Φ(m, n).
    Dense(ComplexMatrix),
}

impl NonlinearGate {
    pub fn single_mode_phase(x: usize, phi: f64) -> Self {
        Self::SingleModePhase { x, phi }
    }

    fn diagonal_factor(&self, r: &FockState) -> Result<Complex64> {
        match self {
            Self::SingleModePhase { x, phi } => Ok(nlp_factor(r.get(x - 1), *phi)),
            Self::GeneralDiagonal(map) => map
                .get(r)
                .copied()
                .ok_or_else(|| Error::Invalid(format!("no diagonal factor for state {r}"))),
            Self::Dense(_) => unreachable!("dense gates have no diagonal factor"),
        }
    }
}

#[inline]
fn nlp_factor(r_x: usize, phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, -((r_x * r_x) as f64) * phi)
}

#[inline]
fn linear_factor(r_x: usize, phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, -(r_x as f64) * phi)
}

/// `W`, `V`, the non-linear layer between them and the input state.
#[derive(Clone, Debug)]
pub struct NonlinearExperiment {
    pub w: ComplexMatrix,
    pub v: ComplexMatrix,
    pub gate: NonlinearGate,
    pub input: FockState,
}

impl NonlinearExperiment {
    pub fn new(w: ComplexMatrix, v: ComplexMatrix, gate: NonlinearGate, input: FockState) -> Result<Self> {
        check_states(&w, &input, &input)?;
        check_states(&v, &input, &input)?;
        w.ensure_unitary(UNITARY_TOLERANCE)?;
        v.ensure_unitary(UNITARY_TOLERANCE)?;
        let m = w.rows();
        match &gate {
            NonlinearGate::SingleModePhase { x, .. } => check_mode(*x, m)?,
            NonlinearGate::GeneralDiagonal(map) => {
                for (state, factor) in map {
                    if state.modes() != m || state.photons() != input.photons() {
                        return Err(Error::Invalid(format!("diagonal gate entry {state} outside Φ({m},{})", input.photons())));
                    }
                    if (factor.norm() - 1.0).abs() > 1e-9 {
                        return Err(Error::Invalid(format!("diagonal factor for {state} is not unit modulus")));
                    }
                }
            }
            NonlinearGate::Dense(n) => {
                let size = crate::fock::state_count(m, input.photons());
                if n.rows() as u128 != size || n.cols() as u128 != size {
                    return Err(Error::InvalidDimension(format!(
                        "dense gate must be {size}x{size}, got {}x{}",
                        n.rows(),
                        n.cols()
                    )));
                }
                if size > DENSE_GATE_MAX_STATES as u128 {
                    return Err(Error::StateSpaceTooLarge {
                        states: size,
                        limit: DENSE_GATE_MAX_STATES,
                    });
                }
            }
        }
        Ok(Self { w, v, gate, input })
    }

    /// Single-mode phase experiment on 1-based mode `x`.
    pub fn single_mode(w: ComplexMatrix, v: ComplexMatrix, x: usize, phi: f64, input: FockState) -> Result<Self> {
        Self::new(w, v, NonlinearGate::single_mode_phase(x, phi), input)
    }

    pub fn modes(&self) -> usize {
        self.w.rows()
    }

    pub fn photons(&self) -> usize {
        self.input.photons()
    }
}

pub(crate) fn check_mode(x: usize, m: usize) -> Result<()> {
    if x == 0 || x > m {
        return Err(Error::ModeOutOfRange { index: x, modes: m });
    }
    Ok(())
}

/// Default placement of the non-linearity: the central mode ⌈m/2⌉.
pub fn central_mode(m: usize) -> usize {
    m.div_ceil(2)
}

/// Amplitudes `γ^W(S → R) = per(W[S,R]) / √(∏s! ∏r!)` for every intermediate
/// state `R`; they do not depend on the output state.
struct PathSum {
    space: Arc<StateSpace>,
    indexed: Indexed,
    w_amps: Vec<Complex64>,
    t_sqrt_norm: Option<f64>,
}

impl PathSum {
    fn new(exp: &NonlinearExperiment) -> Result<Self> {
        let space = enumerate_states(exp.modes(), exp.photons())?;
        let w_amps = amplitudes_into(&exp.w, &exp.input, &space);
        let indexed = Indexed::new(&space);
        Ok(Self {
            space,
            indexed,
            w_amps,
            t_sqrt_norm: None,
        })
    }

    /// `γ^V(R → T) = per(V[R,T]) / √(∏r! ∏t!)`.
    fn v_amp(&self, v: &ComplexMatrix, r_idx: usize, t_list: &[usize], t_sqrt_norm: f64) -> Complex64 {
        permanent_submatrix(v, &self.indexed.lists[r_idx], t_list) / (self.indexed.sqrt_norms[r_idx] * t_sqrt_norm)
    }

    fn amplitude(&self, exp: &NonlinearExperiment, output: &FockState) -> Result<Complex64> {
        let t_list = output.mode_list();
        let t_norm = self
            .t_sqrt_norm
            .unwrap_or_else(|| (output.normalization_product() as f64).sqrt());
        match &exp.gate {
            NonlinearGate::Dense(n) => {
                // literal double sum over R and Q
                let v_amps: Vec<Complex64> = (0..self.space.len())
                    .map(|q| self.v_amp(&exp.v, q, &t_list, t_norm))
                    .collect();
                let mut total = Complex64::new(0.0, 0.0);
                for (r, wa) in self.w_amps.iter().enumerate() {
                    for (q, va) in v_amps.iter().enumerate() {
                        total += wa * n[(r, q)] * va;
                    }
                }
                Ok(total)
            }
            gate => {
                let mut total = Complex64::new(0.0, 0.0);
                for (r_idx, r) in self.space.iter().enumerate() {
                    let wa = self.w_amps[r_idx];
                    total += wa * gate.diagonal_factor(r)? * self.v_amp(&exp.v, r_idx, &t_list, t_norm);
                }
                Ok(total)
            }
        }
    }
}

/// General path-sum amplitude over intermediate states.
pub fn nl_amplitude_general(exp: &NonlinearExperiment, output: &FockState) -> Result<Complex64> {
    check_states(&exp.v, &exp.input, output)?;
    PathSum::new(exp)?.amplitude(exp, output)
}

fn check_triple(w: &ComplexMatrix, v: &ComplexMatrix, x: usize, input: &FockState, output: &FockState) -> Result<()> {
    check_states(w, input, output)?;
    check_states(v, input, output)?;
    check_mode(x, w.rows())
}

/// Single-mode non-linear phase amplitude:
/// `Σ_R exp(-i r_x² φ) per(W[S,R]) per(V[R,T]) / √(∏s! (∏r!)² ∏t!)`.
pub fn nlp_amplitude(
    w: &ComplexMatrix,
    x: usize,
    phi: f64,
    v: &ComplexMatrix,
    input: &FockState,
    output: &FockState,
) -> Result<Complex64> {
    check_triple(w, v, x, input, output)?;
    let space = enumerate_states(input.modes(), input.photons())?;
    let s_list = input.mode_list();
    let t_list = output.mode_list();
    let st_norm = (input.normalization_product() as f64 * output.normalization_product() as f64).sqrt();
    let mut total = Complex64::new(0.0, 0.0);
    for r in space.iter() {
        let r_list = r.mode_list();
        let weight = nlp_factor(r.get(x - 1), phi) / r.normalization_product() as f64;
        total += permanent_submatrix(w, &s_list, &r_list) * weight * permanent_submatrix(v, &r_list, &t_list);
    }
    Ok(total / st_norm)
}

/// Benchmark linear evolution: `W`, then a linear phase `exp(-iφ)` on mode
/// `x`, then `V`; the product `W · F · V`.
pub fn ubar(w: &ComplexMatrix, x: usize, phi: f64, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !w.is_square() || w.rows() != v.rows() || !v.is_square() {
        return Err(Error::InvalidDimension(format!(
            "W is {}x{}, V is {}x{}",
            w.rows(),
            w.cols(),
            v.rows(),
            v.cols()
        )));
    }
    let f = phase_shifter(w.rows(), x, phi)?;
    matmul(&matmul(w, &f)?, v)
}

/// The same amplitude split into the `Ū` permanent plus the correction from
/// intermediate states with more than one photon in mode `x`.
pub fn nlp_amplitude_split(
    w: &ComplexMatrix,
    x: usize,
    phi: f64,
    v: &ComplexMatrix,
    input: &FockState,
    output: &FockState,
) -> Result<Complex64> {
    check_triple(w, v, x, input, output)?;
    let s_list = input.mode_list();
    let t_list = output.mode_list();
    let st_norm = (input.normalization_product() as f64 * output.normalization_product() as f64).sqrt();
    let u_bar = ubar(w, x, phi, v)?;
    let linear = permanent_submatrix(&u_bar, &s_list, &t_list);
    let mut correction = Complex64::new(0.0, 0.0);
    if input.photons() > 1 {
        let space = enumerate_states(input.modes(), input.photons())?;
        for r in space.iter().filter(|r| r.get(x - 1) > 1) {
            let r_x = r.get(x - 1);
            let r_list = r.mode_list();
            let delta = (nlp_factor(r_x, phi) - linear_factor(r_x, phi)) / r.normalization_product() as f64;
            correction +=
                permanent_submatrix(w, &s_list, &r_list) * delta * permanent_submatrix(v, &r_list, &t_list);
        }
    }
    Ok((linear + correction) / st_norm)
}

/// Output distribution of the non-linear experiment.
pub fn nl_distribution(exp: &NonlinearExperiment) -> Result<Distribution> {
    let mut path = PathSum::new(exp)?;
    let space = path.space.clone();
    let t_norms: Vec<f64> = path.indexed.sqrt_norms.clone();
    let probs: Vec<f64> = if let NonlinearGate::SingleModePhase { x, phi } = exp.gate {
        // fold the phase into the cached W amplitudes once
        let weighted: Vec<Complex64> = space
            .iter()
            .zip(&path.w_amps)
            .map(|(r, wa)| wa * nlp_factor(r.get(x - 1), phi))
            .collect();
        (0..space.len())
            .into_par_iter()
            .map(|t| {
                let t_list = &path.indexed.lists[t];
                let amp: Complex64 = weighted
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
                    .map(|(r, a)| a * path.v_amp(&exp.v, r, t_list, t_norms[t]))
                    .sum();
                amp.norm_sqr()
            })
            .collect()
    } else {
        path.t_sqrt_norm = None;
        space
            .states()
            .par_iter()
            .map(|t| path.amplitude(exp, t).map(|a| a.norm_sqr()))
            .collect::<Result<Vec<_>>>()?
    };
    Distribution::new(space, probs)
}
