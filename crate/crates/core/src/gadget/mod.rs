//! Post-selected linear-optical gadget that applies `exp(-i l² φ)` to the
//! `l`-photon component of a single mode, for `l ≤ k`.
//!
//! The gadget is a `(k+1)`-mode unitary `U_eff`. Port 1 carries the signal;
//! ports `2..=k+1` each receive one ancilla photon and must each register
//! exactly one photon at the output. The conditional amplitude for
//! `|l⟩ → |l⟩` is `per(U_eff^{l,1,…,1}) / l!`.

mod optim;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::factorial;
use crate::linalg::{permanent_submatrix, ComplexMatrix, ReckParams};
use crate::rng::stream;

pub use optim::{levenberg_marquardt, nelder_mead};

/// Unitarity tolerance for synthesized gadgets.
pub const GADGET_UNITARY_TOLERANCE: f64 = 1e-8;

/// Residual threshold (objective value) at which synthesis is declared converged.
pub const CONVERGED_OBJECTIVE: f64 = 1e-8;

/// Largest supported ancilla count.
pub const MAX_K: usize = 4;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub k: usize,
    pub phi: f64,
    pub u_eff: ComplexMatrix,
    pub success_prob: f64,
    pub residual: f64,
}

impl GadgetSpec {
    /// Builds a spec from a unitary, recomputing the success probability and
    /// objective value.
    pub fn from_unitary(u_eff: ComplexMatrix, phi: f64, tolerance: f64) -> Result<Self> {
        let k = gadget_size(&u_eff)?;
        u_eff.ensure_unitary(tolerance)?;
        let success_prob = success_probability(&u_eff)?;
        let residual = residual_norm_sqr(&gadget_residuals(&u_eff, phi)?);
        Ok(Self {
            k,
            phi,
            u_eff,
            success_prob,
            residual,
        })
    }

    /// Transparent gadget: the identity on `k+1` modes. Acts as `φ = 0`.
    pub fn identity(k: usize) -> Self {
        Self {
            k,
            phi: 0.0,
            u_eff: ComplexMatrix::identity(k + 1),
            success_prob: 1.0,
            residual: 0.0,
        }
    }

    /// Largest residual modulus at the spec's own phase.
    pub fn max_residual(&self) -> Result<f64> {
        Ok(gadget_residuals(&self.u_eff, self.phi)?
            .iter()
            .map(|r| r.norm())
            .fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        let k = gadget_size(&spec.u_eff)?;
        if k != spec.k {
            return Err(Error::InvalidDimension(format!(
                "gadget declares k={} but u_eff is {}x{}",
                spec.k,
                spec.u_eff.rows(),
                spec.u_eff.cols()
            )));
        }
        Ok(spec)
    }
}

fn gadget_size(u: &ComplexMatrix) -> Result<usize> {
    if !u.is_square() || u.rows() < 2 {
        return Err(Error::InvalidDimension(format!(
            "gadget matrix must be square of size >= 2, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    Ok(u.rows() - 1)
}

/// `U^{l,1,…,1}`: the first row and column repeated `l` times, the others once.
pub fn expanded_gadget_matrix(u_eff: &ComplexMatrix, l: usize) -> Result<ComplexMatrix> {
    let k = gadget_size(u_eff)?;
    if l > k {
        return Err(Error::Invalid(format!("expansion order {l} exceeds k={k}")));
    }
    let idx = expansion_indices(k, l);
    Ok(u_eff.select(&idx, &idx))
}

fn expansion_indices(k: usize, l: usize) -> Vec<usize> {
    std::iter::repeat_n(0, l).chain(1..=k).collect()
}

fn expanded_permanent(u: &ComplexMatrix, k: usize, l: usize) -> Complex64 {
    let idx = expansion_indices(k, l);
    permanent_submatrix(u, &idx, &idx)
}

/// `|per(U^{0,1,…,1})|²`.
pub fn success_probability(u_eff: &ComplexMatrix) -> Result<f64> {
    let k = gadget_size(u_eff)?;
    Ok(expanded_permanent(u_eff, k, 0).norm_sqr())
}

/// Residuals `per(U^{l,1,…,1})/l! − per(U^{0,1,…,1}) e^{-i l² φ}` for `l = 1..=k`.
pub fn gadget_residuals(u_eff: &ComplexMatrix, phi: f64) -> Result<Vec<Complex64>> {
    let k = gadget_size(u_eff)?;
    Ok(residuals_unchecked(u_eff, k, phi))
}

fn residuals_unchecked(u: &ComplexMatrix, k: usize, phi: f64) -> Vec<Complex64> {
    let p0 = expanded_permanent(u, k, 0);
    (1..=k)
        .map(|l| {
            let target = p0 * Complex64::from_polar(1.0, -((l * l) as f64) * phi);
            expanded_permanent(u, k, l) / factorial(l) as f64 - target
        })
        .collect()
}

fn residual_norm_sqr(r: &[Complex64]) -> f64 {
    r.iter().map(|z| z.norm_sqr()).sum()
}

/// Objective `D = Σ_l |residual_l|²` at the Reck unitary of `params`.
pub fn gadget_objective(params: &ReckParams, phi: f64, k: usize) -> Result<f64> {
    if params.m != k + 1 {
        return Err(Error::InvalidDimension(format!(
            "Reck parameters for m={} cannot describe a k={k} gadget",
            params.m
        )));
    }
    let u = params.to_unitary()?;
    Ok(residual_norm_sqr(&residuals_unchecked(&u, k, phi)))
}

/// Upper bound on the success probability of a `k = 2` non-linear phase gate.
pub fn success_bound(phi: f64) -> f64 {
    let a = 3.0 - (PI + 2.0 * phi).cos();
    a * a / 16.0
}

/// `c_l ↦ c_l · per(U^{l,1,…,1}) / l!`, the unnormalized heralded output.
pub fn apply_gadget(u_eff: &ComplexMatrix, coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
    let k = gadget_size(u_eff)?;
    if coefficients.len() != k + 1 {
        return Err(Error::InvalidDimension(format!(
            "expected {} coefficients for k={k}, got {}",
            k + 1,
            coefficients.len()
        )));
    }
    Ok(coefficients
        .iter()
        .enumerate()
        .map(|(l, c)| c * expanded_permanent(u_eff, k, l) / factorial(l) as f64)
        .collect())
}

/// Search effort per optimizer start.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub nelder_mead_evals: usize,
    pub lm_iterations: usize,
    /// Penalty escalation rounds for starts that end infeasible.
    pub penalty_rounds: usize,
    /// Penalty weight of the first round.
    pub initial_penalty: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            nelder_mead_evals: 4_000,
            lm_iterations: 200,
            penalty_rounds: 4,
            initial_penalty: 1.0,
        }
    }
}

/// Default success-probability threshold for each `k`.
pub fn default_p_th(k: usize) -> f64 {
    match k {
        1 => 0.5,
        2 => 0.15,
        3 => 0.02,
        _ => 0.005,
    }
}

struct StartResult {
    index: usize,
    params: ReckParams,
    objective: f64,
    success_prob: f64,
}

impl StartResult {
    fn feasible(&self, p_th: f64) -> bool {
        self.success_prob >= p_th
    }
}

fn penalty_residuals(x: &[f64], k: usize, phi: f64, p_th: f64, lambda: f64) -> Vec<f64> {
    let params = ReckParams::from_slice(k + 1, x).expect("dimension fixed by caller");
    let u = params.to_unitary().expect("validated parameters");
    let r = residuals_unchecked(&u, k, phi);
    let pr = expanded_permanent(&u, k, 0).norm_sqr();
    let mut out = Vec::with_capacity(2 * k + 1);
    for z in &r {
        out.push(z.re);
        out.push(z.im);
    }
    out.push(lambda.sqrt() * (p_th - pr).max(0.0));
    out
}

fn run_start<R: Rng>(index: usize, k: usize, phi: f64, p_th: f64, budget: Budget, rng: &mut R) -> StartResult {
    let m = k + 1;
    // aim slightly above the threshold so the exterior penalty's optimum lands inside
    let target = p_th * (1.0 + 1e-6) + 1e-12;
    let mut x = ReckParams::random(m, rng).to_vec();
    let mut lambda = budget.initial_penalty;
    let mut objective = f64::INFINITY;
    let mut success_prob = 0.0;
    for round in 0..=budget.penalty_rounds {
        let residuals = |y: &[f64]| penalty_residuals(y, k, phi, target, lambda);
        if round == 0 {
            let cost = |y: &[f64]| residuals(y).iter().map(|v| v * v).sum::<f64>();
            x = nelder_mead(&cost, &x, 0.4, budget.nelder_mead_evals, 1e-14).0;
        }
        x = levenberg_marquardt(&residuals, &x, 1e-6, budget.lm_iterations, 1e-30).0;
        let u = ReckParams::from_slice(m, &x)
            .and_then(|p| p.to_unitary())
            .expect("dimension fixed");
        objective = residual_norm_sqr(&residuals_unchecked(&u, k, phi));
        success_prob = expanded_permanent(&u, k, 0).norm_sqr();
        if success_prob >= p_th {
            break;
        }
        lambda *= 10.0;
    }
    StartResult {
        index,
        params: ReckParams::from_slice(m, &x).expect("dimension fixed"),
        objective,
        success_prob,
    }
}

/// Multi-start penalized search for a gadget with `Pr_succ ≥ p_th`.
///
/// Each start draws its initial Reck parameters from its own stream keyed by
/// a master seed taken from `rng`, so the result does not depend on how many
/// threads run the starts.
pub fn optimize_gadget<R: Rng + ?Sized>(
    k: usize,
    phi: f64,
    p_th: f64,
    starts: usize,
    rng: &mut R,
    budget: Budget,
) -> Result<GadgetSpec> {
    if k == 0 || k > MAX_K {
        return Err(Error::Unsupported(format!("gadget synthesis for k={k}; supported 1..={MAX_K}")));
    }
    if !(p_th > 0.0 && p_th < 1.0) {
        return Err(Error::Invalid(format!("threshold p_th={p_th} must lie in (0, 1)")));
    }
    if k == 1 {
        return Ok(diagonal_k1(phi));
    }
    if starts == 0 {
        return Err(Error::Invalid("at least one optimizer start is required".into()));
    }
    let master: u64 = rng.random();
    let results: Vec<StartResult> = (0..starts)
        .into_par_iter()
        .map(|i| run_start(i, k, phi, p_th, budget, &mut stream(master, i as u64)))
        .collect();

    let best = results
        .iter()
        .min_by(|a, b| {
            b.feasible(p_th)
                .cmp(&a.feasible(p_th))
                .then(a.objective.total_cmp(&b.objective))
                .then(b.success_prob.total_cmp(&a.success_prob))
                .then(a.index.cmp(&b.index))
        })
        .expect("at least one start");

    let u_eff = best.params.to_unitary()?;
    let spec = GadgetSpec {
        k,
        phi,
        success_prob: best.success_prob,
        residual: best.objective,
        u_eff,
    };
    if best.feasible(p_th) && best.objective <= CONVERGED_OBJECTIVE {
        Ok(spec)
    } else {
        Err(Error::GadgetNotFound {
            k,
            phi,
            p_th,
            residual: best.objective,
            success_prob: best.success_prob,
            best: Box::new(spec),
        })
    }
}

/// For one photon the phase `e^{-iφ}` is linear: `diag(e^{-iφ}, 1)`.
fn diagonal_k1(phi: f64) -> GadgetSpec {
    let mut u = ComplexMatrix::identity(2);
    u[(0, 0)] = Complex64::from_polar(1.0, -phi);
    GadgetSpec {
        k: 1,
        phi,
        u_eff: u,
        success_prob: 1.0,
        residual: 0.0,
    }
}

/// Published gadget matrices for `φ = π/2`, four-decimal entries as printed.
///
/// They satisfy the gadget conditions under the opposite phase convention to
/// the one used here; [`published_gadget`] applies the conversion.
pub fn published_matrix(k: usize) -> Result<ComplexMatrix> {
    let rows: &[&[(f64, f64)]] = match k {
        2 => &[
            &[(0.0, -0.4574), (-0.8426, 0.0223), (0.2822, -0.0261)],
            &[(-0.0969, -0.0943), (-0.1689, 0.1830), (-0.6028, 0.7458)],
            &[(0.6775, 0.5599), (-0.2940, 0.3756), (0.0, 0.0)],
        ],
        3 => &[
            &[(0.0032, 0.2218), (0.0889, -0.8075), (0.1756, -0.0772), (0.1455, -0.4826)],
            &[(0.6671, 0.1569), (0.1942, -0.2732), (0.1871, -0.0443), (-0.1623, 0.5956)],
            &[(0.0606, -0.1733), (0.2204, -0.2742), (-0.8767, 0.1685), (-0.2133, -0.0099)],
            &[(0.2418, -0.6237), (0.3134, 0.0717), (0.3240, 0.1560), (-0.4179, -0.3802)],
        ],
        4 => &[
            &[(-0.0006, -0.1994), (-0.5735, 0.0763), (0.0071, -0.0505), (0.2902, -0.3501), (0.1843, -0.6181)],
            &[(0.3200, 0.2740), (0.3072, 0.5019), (-0.0749, -0.0098), (-0.0761, 0.3436), (0.4135, -0.4190)],
            &[(0.4328, -0.1960), (-0.0933, 0.4354), (-0.1877, 0.3742), (0.4265, -0.1473), (-0.0404, 0.4421)],
            &[(0.4356, 0.6058), (0.0671, -0.2111), (0.2851, 0.0872), (-0.0559, -0.5462), (-0.0572, -0.0219)],
            &[(0.0123, 0.0017), (0.2591, 0.0667), (-0.3623, -0.7721), (0.2273, -0.3355), (0.1105, 0.1560)],
        ],
        _ => return Err(Error::Unsupported(format!("no published gadget for k={k}"))),
    };
    ComplexMatrix::from_rows(
        &rows
            .iter()
            .map(|r| r.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
            .collect::<Vec<_>>(),
    )
}

/// Unitarity tolerance accepted for the rounded published matrices.
///
/// The `k = 3` matrix deviates by about 1.8e-2, dominated by the entry in
/// row 3, column 4.
pub fn published_tolerance(k: usize) -> f64 {
    if k == 3 {
        2e-2
    } else {
        2e-3
    }
}

/// Published gadget at `φ = π/2`, converted to this crate's convention
/// (complex conjugate of the printed matrix).
pub fn published_gadget(k: usize) -> Result<GadgetSpec> {
    let u = published_matrix(k)?.conj();
    GadgetSpec::from_unitary(u, PI / 2.0, published_tolerance(k))
}

/// Max residual modulus of `u_eff` at `phi`, with the recomputed success probability.
pub fn verify_gadget(u_eff: &ComplexMatrix, phi: f64) -> Result<(f64, f64)> {
    let r = gadget_residuals(u_eff, phi)?;
    Ok((r.iter().map(|z| z.norm()).fold(0.0, f64::max), success_probability(u_eff)?))
}
