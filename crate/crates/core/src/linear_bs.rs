//! Linear Boson Sampling: transition amplitudes, output distributions and
//! exact sampling.
//!
//! Matrices act on creation operators row-wise, `a_i† → Σ_j U[i][j] a_j†`, so
//! the amplitude from `S` to `T` is `per(U[S, T]) / √(∏ s_i! ∏ t_j!)` with
//! rows taken from the input. Under this convention a network `W` followed
//! by a network `V` is the matrix product `W · V`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{enumerate_states, FockState, StateSpace};
use crate::linalg::{check_states, matmul, permanent_submatrix, ComplexMatrix};

/// Maximum tolerated `max |U†U − I|` for evolution matrices.
pub const UNITARY_TOLERANCE: f64 = 1e-8;

/// Probabilities over every state of a [`StateSpace`], in its order.
#[derive(Clone, Debug)]
pub struct Distribution {
    space: Arc<StateSpace>,
    probabilities: Vec<f64>,
}

impl Distribution {
    /// Wraps raw probabilities; entries must lie in [0, 1] up to 1e-12 and
    /// are clamped into that range.
    pub fn new(space: Arc<StateSpace>, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != space.len() {
            return Err(Error::InvalidDimension(format!(
                "{} probabilities for a space of {} states",
                probabilities.len(),
                space.len()
            )));
        }
        let mut probabilities = probabilities;
        for p in probabilities.iter_mut() {
            if !p.is_finite() || *p < -1e-12 || *p > 1.0 + 1e-12 {
                return Err(Error::Invalid(format!("probability {p} outside [0, 1]")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        Ok(Self {
            space,
            probabilities,
        })
    }

    /// Normalizes non-negative weights to unit mass.
    pub fn from_weights(space: Arc<StateSpace>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::Invalid(format!("cannot normalize total mass {total}")));
        }
        Self::new(space, weights.into_iter().map(|w| w / total).collect())
    }

    /// Empirical distribution of a sample.
    pub fn empirical(space: Arc<StateSpace>, samples: &[FockState]) -> Result<Self> {
        let mut counts = vec![0.0; space.len()];
        for s in samples {
            counts[space.rank(s)?] += 1.0;
        }
        Self::from_weights(space, counts)
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, state: &FockState) -> Result<f64> {
        Ok(self.probabilities[self.space.rank(state)?])
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockState, f64)> {
        self.space.iter().zip(self.probabilities.iter().copied())
    }

    /// CSV body with a `state,probability` header and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,probability\n");
        for (s, p) in self.iter() {
            out.push_str(&format!("\"{s}\",{p:.16e}\n"));
        }
        out
    }
}

/// Precomputed row/column lists and normalizations for each state of a space.
pub(crate) struct Indexed {
    pub lists: Vec<Vec<usize>>,
    pub sqrt_norms: Vec<f64>,
}

impl Indexed {
    pub fn new(space: &StateSpace) -> Self {
        Self {
            lists: space.iter().map(FockState::mode_list).collect(),
            sqrt_norms: space
                .iter()
                .map(|s| (s.normalization_product() as f64).sqrt())
                .collect(),
        }
    }
}

pub(crate) fn amplitude_unchecked(u: &ComplexMatrix, input: &FockState, output: &FockState) -> Complex64 {
    let norm = (input.normalization_product() as f64 * output.normalization_product() as f64).sqrt();
    permanent_submatrix(u, &input.mode_list(), &output.mode_list()) / norm
}

/// Transition amplitude `per(U[S,T]) / √(∏s_i! ∏t_j!)`.
pub fn amplitude(u: &ComplexMatrix, input: &FockState, output: &FockState) -> Result<Complex64> {
    check_states(u, input, output)?;
    u.ensure_unitary(UNITARY_TOLERANCE)?;
    Ok(amplitude_unchecked(u, input, output))
}

/// All amplitudes from `input` into the states of `space`, in order.
pub(crate) fn amplitudes_into(u: &ComplexMatrix, input: &FockState, space: &StateSpace) -> Vec<Complex64> {
    let rows = input.mode_list();
    let s_norm = (input.normalization_product() as f64).sqrt();
    space
        .states()
        .par_iter()
        .map(|t| {
            let t_norm = (t.normalization_product() as f64).sqrt();
            permanent_submatrix(u, &rows, &t.mode_list()) / (s_norm * t_norm)
        })
        .collect()
}

/// Output distribution `|amplitude(U, S, T)|²` over Φ(m, n).
pub fn output_distribution(u: &ComplexMatrix, input: &FockState) -> Result<Distribution> {
    check_states(u, input, input)?;
    u.ensure_unitary(UNITARY_TOLERANCE)?;
    let space = enumerate_states(input.modes(), input.photons())?;
    let probs = amplitudes_into(u, input, &space)
        .into_iter()
        .map(|a| a.norm_sqr())
        .collect();
    Distribution::new(space, probs)
}

/// Draws outcome indices from a fixed distribution.
pub trait OutcomeSampler {
    fn space(&self) -> &Arc<StateSpace>;

    /// Index of one drawn outcome in [`Self::space`].
    fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize;

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> FockState {
        let idx = self.draw_index(rng);
        self.space().states()[idx].clone()
    }
}

/// Inversion sampling over a fully materialized distribution.
pub struct InversionSampler {
    space: Arc<StateSpace>,
    cumulative: Vec<f64>,
}

impl InversionSampler {
    pub fn new(dist: &Distribution) -> Self {
        let mut acc = 0.0;
        let cumulative = dist
            .probabilities()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            space: dist.space().clone(),
            cumulative,
        }
    }
}

impl OutcomeSampler for InversionSampler {
    fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty space");
        let u: f64 = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // zero-probability tail entries share the last cumulative value
        idx.min(self.cumulative.len() - 1)
    }
}

/// `count` i.i.d. draws from the output distribution of `U` on `input`.
pub fn sample_exact<R: Rng + ?Sized>(
    u: &ComplexMatrix,
    input: &FockState,
    count: usize,
    rng: &mut R,
) -> Result<Vec<FockState>> {
    let dist = output_distribution(u, input)?;
    let sampler = InversionSampler::new(&dist);
    Ok((0..count).map(|_| sampler.draw(rng)).collect())
}

/// `|per((W·V)[S,T]) − Σ_R per(W[S,R]) per(V[R,T]) / ∏ r_i!|`.
pub fn verify_composition(
    w: &ComplexMatrix,
    v: &ComplexMatrix,
    input: &FockState,
    output: &FockState,
) -> Result<f64> {
    check_states(w, input, output)?;
    check_states(v, input, output)?;
    w.ensure_unitary(UNITARY_TOLERANCE)?;
    v.ensure_unitary(UNITARY_TOLERANCE)?;
    let composite = matmul(w, v)?;
    let rows = input.mode_list();
    let cols = output.mode_list();
    let direct = permanent_submatrix(&composite, &rows, &cols);
    let space = enumerate_states(input.modes(), input.photons())?;
    let path_sum: Complex64 = space
        .iter()
        .map(|r| {
            let mid = r.mode_list();
            permanent_submatrix(w, &rows, &mid) * permanent_submatrix(v, &mid, &cols)
                / r.normalization_product() as f64
        })
        .sum();
    Ok((direct - path_sum).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use crate::rng::seeded;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn st(v: &[usize]) -> FockState {
        FockState::new(v.to_vec())
    }

    fn beamsplitter() -> ComplexMatrix {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        ComplexMatrix::from_rows(&[vec![h, h], vec![h, -h]]).unwrap()
    }

    #[test]
    fn identity_evolution() {
        let id = ComplexMatrix::identity(3);
        let s = st(&[1, 1, 0]);
        assert!((amplitude(&id, &s, &s).unwrap() - 1.0).norm() < 1e-15);
        assert!(amplitude(&id, &s, &st(&[0, 1, 1])).unwrap().norm() < 1e-15);
        let d = output_distribution(&id, &s).unwrap();
        assert_eq!(d.probability(&s).unwrap(), 1.0);
        assert!((d.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel() {
        let bs = beamsplitter();
        let s = st(&[1, 1]);
        assert!(amplitude(&bs, &s, &s).unwrap().norm() < 1e-15);
        let a20 = amplitude(&bs, &s, &st(&[2, 0])).unwrap();
        assert!((a20.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        let d = output_distribution(&bs, &s).unwrap();
        let p = d.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && p[1].abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary_and_mismatch() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 0)] = Complex64::new(1.1, 0.0);
        let s = st(&[1, 1]);
        match amplitude(&m, &s, &s) {
            Err(Error::NotUnitary { deviation, .. }) => assert!(deviation > 0.2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            amplitude(&ComplexMatrix::identity(2), &s, &st(&[1, 0])),
            Err(Error::PhotonMismatch { .. })
        ));
    }

    #[test]
    fn normalization_for_haar() {
        let mut rng = seeded(1);
        for m in [2, 5, 8] {
            for n in 1..=4usize.min(m) {
                let u = haar_unitary(m, &mut rng);
                let d = output_distribution(&u, &FockState::single_photons(m, n).unwrap()).unwrap();
                assert!((d.total() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampler_point_mass_and_reproducible() {
        let id = ComplexMatrix::identity(3);
        let s = st(&[1, 0, 1]);
        let samples = sample_exact(&id, &s, 50, &mut seeded(3)).unwrap();
        assert!(samples.iter().all(|x| *x == s));

        let mut rng = seeded(10);
        let u = haar_unitary(4, &mut rng);
        let input = st(&[1, 1, 0, 0]);
        let a = sample_exact(&u, &input, 200, &mut seeded(77)).unwrap();
        let b = sample_exact(&u, &input, 200, &mut seeded(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hom_sampling_frequencies() {
        let samples = sample_exact(&beamsplitter(), &st(&[1, 1]), 10_000, &mut seeded(4)).unwrap();
        let freq = |t: &[usize]| samples.iter().filter(|x| x.occupations() == t).count() as f64 / 1e4;
        assert!((freq(&[2, 0]) - 0.5).abs() <= 0.02);
        assert!((freq(&[0, 2]) - 0.5).abs() <= 0.02);
        assert_eq!(freq(&[1, 1]), 0.0);
    }

    #[test]
    fn composition_trivial_cases() {
        let id = ComplexMatrix::identity(3);
        let s = st(&[1, 1, 0]);
        assert!(verify_composition(&id, &id, &s, &s).unwrap() < 1e-15);
        let w = haar_unitary(3, &mut seeded(8));
        let wd = w.dagger();
        // W then W† is the identity evolution
        let r = verify_composition(&w, &wd, &s, &s).unwrap();
        assert!(r < 1e-12);
        let composite = matmul(&w, &wd).unwrap();
        assert!((amplitude(&composite, &s, &s).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn csv_format() {
        let d = output_distribution(&beamsplitter(), &st(&[1, 1])).unwrap();
        let csv = d.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("state,probability"));
        assert!(lines.next().unwrap().starts_with("\"2,0\",5.0000000000000"));
    }
}
