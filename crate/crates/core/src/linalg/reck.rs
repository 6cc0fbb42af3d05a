use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Parameters of a Reck triangular mesh on `m` modes.
///
/// Rotations are applied to mode pairs `(q, p)` with `p` running from the
/// last mode down to 1 and `q` from `p - 1` down to 0, followed by a diagonal
/// layer of output phases. `thetas` and `phis` are listed in that order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReckParams {
    pub m: usize,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub output_phases: Vec<f64>,
}

impl ReckParams {
    pub fn rotation_count(m: usize) -> usize {
        m * (m.saturating_sub(1)) / 2
    }

    /// Total real parameter count, m².
    pub fn dimension(m: usize) -> usize {
        m * m
    }

    pub fn zeros(m: usize) -> Self {
        let r = Self::rotation_count(m);
        Self {
            m,
            thetas: vec![0.0; r],
            phis: vec![0.0; r],
            output_phases: vec![0.0; m],
        }
    }

    /// Uniform draw over the nominal ranges.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let r = Self::rotation_count(m);
        Self {
            m,
            thetas: (0..r).map(|_| rng.random_range(0.0..FRAC_PI_2)).collect(),
            phis: (0..r).map(|_| rng.random_range(0.0..2.0 * PI)).collect(),
            output_phases: (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = Self::rotation_count(self.m);
        if self.m == 0
            || self.thetas.len() != r
            || self.phis.len() != r
            || self.output_phases.len() != self.m
        {
            return Err(Error::InvalidDimension(format!(
                "Reck parameters for m={} need {r} thetas, {r} phis and {} output phases; got {}, {}, {}",
                self.m,
                self.m,
                self.thetas.len(),
                self.phis.len(),
                self.output_phases.len()
            )));
        }
        Ok(())
    }

    /// Flat vector `[thetas..., phis..., output_phases...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::dimension(self.m));
        v.extend_from_slice(&self.thetas);
        v.extend_from_slice(&self.phis);
        v.extend_from_slice(&self.output_phases);
        v
    }

    pub fn from_slice(m: usize, x: &[f64]) -> Result<Self> {
        if x.len() != Self::dimension(m) {
            return Err(Error::InvalidDimension(format!(
                "expected {} Reck parameters for m={m}, got {}",
                Self::dimension(m),
                x.len()
            )));
        }
        let r = Self::rotation_count(m);
        Ok(Self {
            m,
            thetas: x[..r].to_vec(),
            phis: x[r..2 * r].to_vec(),
            output_phases: x[2 * r..].to_vec(),
        })
    }

    fn pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
        (1..m).rev().flat_map(|p| (0..p).rev().map(move |q| (q, p)))
    }

    /// The unitary `D · T_1 · T_2 ⋯` of the mesh.
    pub fn to_unitary(&self) -> Result<ComplexMatrix> {
        self.validate()?;
        let m = self.m;
        let mut u = ComplexMatrix::identity(m);
        // D first, then right-multiply by each two-mode block
        for (i, &ph) in self.output_phases.iter().enumerate() {
            u[(i, i)] = Complex64::from_polar(1.0, ph);
        }
        for (((q, p), &theta), &phi) in Self::pairs(m).zip(&self.thetas).zip(&self.phis) {
            let e = Complex64::from_polar(1.0, phi);
            let (c, s) = (theta.cos(), theta.sin());
            // block on (q, p): [[e c, -s], [e s, c]]
            let b_qq = e * c;
            let b_qp = Complex64::new(-s, 0.0);
            let b_pq = e * s;
            let b_pp = Complex64::new(c, 0.0);
            for i in 0..m {
                let uq = u[(i, q)];
                let up = u[(i, p)];
                u[(i, q)] = uq * b_qq + up * b_pq;
                u[(i, p)] = uq * b_qp + up * b_pp;
            }
        }
        Ok(u)
    }
}
