//! Simulation of the non-linear experiment by an enlarged linear network
//! with `k` ancilla photons and post-selection on the ancilla modes.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{enumerate_states, FockState};
use crate::gadget::GadgetSpec;
use crate::linalg::{check_states, direct_sum, matmul, ComplexMatrix};
use crate::linear_bs::{amplitude_unchecked, amplitudes_into, Distribution, InversionSampler, OutcomeSampler, UNITARY_TOLERANCE};
use crate::nonlinear_bs::check_mode;

/// Acceptance rate below which the rejection loop gives up.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SimulationSetup {
    pub w: ComplexMatrix,
    pub v: ComplexMatrix,
    /// 1-based mode carrying the non-linearity.
    pub x: usize,
    pub input: FockState,
    pub gadget: GadgetSpec,
    pub enlarged_unitary: ComplexMatrix,
    pub enlarged_input: FockState,
}

impl SimulationSetup {
    pub fn modes(&self) -> usize {
        self.w.rows()
    }

    pub fn photons(&self) -> usize {
        self.input.photons()
    }

    pub fn ancillas(&self) -> usize {
        self.gadget.k
    }

    fn heralded(&self, output: &FockState) -> FockState {
        output.concat(&FockState::new(vec![1; self.ancillas()]))
    }

    fn is_heralded(&self, enlarged: &FockState) -> bool {
        enlarged.occupations()[self.modes()..].iter().all(|&c| c == 1)
    }
}

/// `(m+k)`-mode identity with `u_eff` on modes `{x, m+1, …, m+k}` (1-based),
/// gadget port 1 on mode `x`.
pub fn embed_gadget(u_eff: &ComplexMatrix, m: usize, x: usize) -> Result<ComplexMatrix> {
    check_mode(x, m)?;
    let k = u_eff.rows().saturating_sub(1);
    let mut ports = Vec::with_capacity(k + 1);
    ports.push(x - 1);
    ports.extend(m..m + k);
    let mut g = ComplexMatrix::identity(m + k);
    for (a, &pa) in ports.iter().enumerate() {
        for (b, &pb) in ports.iter().enumerate() {
            g[(pa, pb)] = u_eff[(a, b)];
        }
    }
    Ok(g)
}

/// Enlarged network: `W ⊕ I_k`, then the embedded gadget, then `V ⊕ I_k`.
pub fn build_setup(
    w: &ComplexMatrix,
    v: &ComplexMatrix,
    x: usize,
    input: &FockState,
    gadget: &GadgetSpec,
) -> Result<SimulationSetup> {
    check_states(w, input, input)?;
    check_states(v, input, input)?;
    w.ensure_unitary(UNITARY_TOLERANCE)?;
    v.ensure_unitary(UNITARY_TOLERANCE)?;
    let m = w.rows();
    check_mode(x, m)?;
    let k = gadget.k;
    if k == 0 || gadget.u_eff.rows() != k + 1 || !gadget.u_eff.is_square() {
        return Err(Error::InvalidDimension(format!(
            "gadget with k={k} must carry a {0}x{0} matrix",
            k + 1
        )));
    }
    let id = ComplexMatrix::identity(k);
    let g = embed_gadget(&gadget.u_eff, m, x)?;
    let enlarged = matmul(&matmul(&direct_sum(w, &id), &g)?, &direct_sum(v, &id))?;
    let enlarged_input = input.concat(&FockState::new(vec![1; k]));
    Ok(SimulationSetup {
        w: w.clone(),
        v: v.clone(),
        x,
        input: input.clone(),
        gadget: gadget.clone(),
        enlarged_unitary: enlarged,
        enlarged_input,
    })
}

/// Distribution over the `m`-mode outputs conditioned on one photon in each
/// ancilla mode, together with the heralding probability.
pub fn postselected_distribution(setup: &SimulationSetup) -> Result<(Distribution, f64)> {
    let space = enumerate_states(setup.modes(), setup.photons())?;
    let weights: Vec<f64> = space
        .states()
        .par_iter()
        .map(|t| amplitude_unchecked(&setup.enlarged_unitary, &setup.enlarged_input, &setup.heralded(t)).norm_sqr())
        .collect();
    let kept: f64 = weights.iter().sum();
    if kept.is_nan() || kept <= 0.0 {
        return Err(Error::DegeneratePostselection);
    }
    Ok((Distribution::from_weights(space, weights)?, kept))
}

/// Full distribution of the enlarged network before post-selection.
///
/// Renormalized, so rounded gadget matrices that are unitary only to a few
/// decimals still yield a distribution.
pub fn enlarged_distribution(setup: &SimulationSetup) -> Result<Distribution> {
    let space = enumerate_states(setup.enlarged_input.modes(), setup.enlarged_input.photons())?;
    let weights = amplitudes_into(&setup.enlarged_unitary, &setup.enlarged_input, &space)
        .into_iter()
        .map(|a| a.norm_sqr())
        .collect();
    Distribution::from_weights(space, weights)
}

/// Accepted samples with the number of trials each one took.
#[derive(Clone, Debug)]
pub struct Algorithm1Run {
    pub samples: Vec<FockState>,
    pub trials_per_sample: Vec<u64>,
    pub total_trials: u64,
}

impl Algorithm1Run {
    pub fn acceptance_rate(&self) -> f64 {
        if self.total_trials == 0 {
            0.0
        } else {
            self.samples.len() as f64 / self.total_trials as f64
        }
    }
}

/// Rejection loop on the enlarged network.
///
/// Draws events from the exact enlarged distribution and keeps those with a
/// single photon in every ancilla mode, until `n_samples` are accepted.
/// Aborts once `min_trials` have been spent at an acceptance rate below
/// [`MIN_ACCEPTANCE`], or when `max_trials` is exhausted.
pub fn run_algorithm1<R: Rng + ?Sized>(
    setup: &SimulationSetup,
    n_samples: usize,
    rng: &mut R,
    min_trials: u64,
    max_trials: u64,
) -> Result<Algorithm1Run> {
    let dist = enlarged_distribution(setup)?;
    let sampler = InversionSampler::new(&dist);
    let m = setup.modes();
    let mut samples = Vec::with_capacity(n_samples);
    let mut trials_per_sample = Vec::with_capacity(n_samples);
    let mut total: u64 = 0;
    let mut since_last: u64 = 0;
    while samples.len() < n_samples {
        let event = sampler.draw(rng);
        total += 1;
        since_last += 1;
        if setup.is_heralded(&event) {
            samples.push(event.truncate(m));
            trials_per_sample.push(since_last);
            since_last = 0;
            continue;
        }
        let rate = samples.len() as f64 / total as f64;
        if (total >= min_trials && rate < MIN_ACCEPTANCE) || total >= max_trials {
            return Err(Error::AcceptanceTooLow {
                rate,
                trials: total,
                threshold: MIN_ACCEPTANCE,
            });
        }
    }
    Ok(Algorithm1Run {
        samples,
        trials_per_sample,
        total_trials: total,
    })
}

/// Default trial limits used by callers that do not tune them.
pub const DEFAULT_MIN_TRIALS: u64 = 1_000_000;
pub const DEFAULT_MAX_TRIALS: u64 = 1_000_000_000;

/// Heralded amplitude of a single output, for diagnostics.
pub fn heralded_amplitude(setup: &SimulationSetup, output: &FockState) -> Result<Complex64> {
    check_states(&setup.w, &setup.input, output)?;
    Ok(amplitude_unchecked(&setup.enlarged_unitary, &setup.enlarged_input, &setup.heralded(output)))
}
