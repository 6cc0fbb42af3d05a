//! Metrics and parametric studies: distances between distributions,
//! bunching probabilities, cumulative-mass fractions, Haar benchmarks and the
//! TVD-versus-bunching experiment.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{enumerate_states, FockState, StateSpace};
use crate::gadget::{default_p_th, optimize_gadget, Budget, GadgetSpec};
use crate::linalg::{check_states, haar_unitary, ComplexMatrix};
use crate::linear_bs::{amplitudes_into, output_distribution, Distribution, UNITARY_TOLERANCE};
use crate::nonlinear_bs::{central_mode, check_mode, nl_distribution, NonlinearExperiment};
use crate::rng::stream;
use crate::sim::{build_setup, postselected_distribution};

/// Sample mean and standard deviation (n − 1 denominator).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                count,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std, count }
    }
}

fn same_space(a: &StateSpace, b: &StateSpace) -> bool {
    a.modes() == b.modes() && a.photons() == b.photons()
}

/// Total variation distance `½ Σ |p_i − q_i|`.
pub fn tvd(p: &Distribution, q: &Distribution) -> Result<f64> {
    if !same_space(p.space(), q.space()) {
        return Err(Error::Invalid(format!(
            "distributions over Φ({},{}) and Φ({},{})",
            p.space().modes(),
            p.space().photons(),
            q.space().modes(),
            q.space().photons()
        )));
    }
    let l1: f64 = p
        .probabilities()
        .iter()
        .zip(q.probabilities())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

fn intermediate(w: &ComplexMatrix, input: &FockState) -> Result<(Arc<StateSpace>, Vec<f64>)> {
    check_states(w, input, input)?;
    w.ensure_unitary(UNITARY_TOLERANCE)?;
    let space = enumerate_states(input.modes(), input.photons())?;
    let probs = amplitudes_into(w, input, &space).iter().map(|a| a.norm_sqr()).collect();
    Ok((space, probs))
}

/// Mass after `W` with more than `k` photons on 1-based mode `x`.
pub fn bunching_at_site(w: &ComplexMatrix, input: &FockState, x: usize, k: usize) -> Result<f64> {
    check_mode(x, w.rows())?;
    let (space, probs) = intermediate(w, input)?;
    Ok(space
        .iter()
        .zip(&probs)
        .filter(|(r, _)| r.get(x - 1) > k)
        .map(|(_, p)| p)
        .sum())
}

/// Mass after `W` with more than `k` photons on any mode.
pub fn bunching_global(w: &ComplexMatrix, input: &FockState, k: usize) -> Result<f64> {
    let (space, probs) = intermediate(w, input)?;
    let kept: f64 = space
        .iter()
        .zip(&probs)
        .filter(|(r, _)| r.max_occupation() <= k)
        .map(|(_, p)| p)
        .sum();
    Ok((1.0 - kept).clamp(0.0, 1.0))
}

/// Probabilities sorted in descending order and their running sums.
pub fn sorted_cumulative(dist: &Distribution) -> (Vec<f64>, Vec<f64>) {
    let mut sorted = dist.probabilities().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let cumulative = sorted
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    (sorted, cumulative)
}

/// Smallest fraction of outcomes, taken by decreasing probability, whose mass
/// reaches `threshold`.
pub fn fraction_for_threshold(dist: &Distribution, threshold: f64) -> f64 {
    let (_, cumulative) = sorted_cumulative(dist);
    let n = cumulative.len();
    let needed = cumulative
        .iter()
        .position(|&c| c >= threshold - 1e-12)
        .map_or(n, |i| i + 1);
    needed as f64 / n as f64
}

/// Relative modulus difference and phase difference of two amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeMetrics {
    /// `||a| − |a_ref|| / |a_ref|`; `None` when `a_ref = 0`.
    pub delta_abs_rel: Option<f64>,
    /// `|arg a − arg a_ref|` reduced to `[0, π]`.
    pub delta_arg: f64,
}

pub fn amplitude_metrics(a: Complex64, a_ref: Complex64) -> AmplitudeMetrics {
    let r = a_ref.norm();
    let delta_abs_rel = (r > 0.0).then(|| (a.norm() - r).abs() / r);
    let d = (a.arg() - a_ref.arg()).rem_euclid(2.0 * PI);
    AmplitudeMetrics {
        delta_abs_rel,
        delta_arg: if d > PI { 2.0 * PI - d } else { d },
    }
}

/// Mean and spread over `units` Haar unitaries of the output mass with at most
/// `n_max` photons per mode, single photons in the first `n` modes.
pub fn haar_truncation_study<R: Rng + ?Sized>(n: usize, m: usize, n_max: usize, units: usize, rng: &mut R) -> Result<MeanStd> {
    let input = FockState::single_photons(m, n)?;
    let space = enumerate_states(m, n)?;
    let master: u64 = rng.random();
    let values: Vec<f64> = (0..units)
        .into_par_iter()
        .map(|i| {
            let u = haar_unitary(m, &mut stream(master, i as u64));
            amplitudes_into(&u, &input, &space)
                .iter()
                .zip(space.iter())
                .filter(|(_, r)| r.max_occupation() <= n_max)
                .map(|(a, _)| a.norm_sqr())
                .sum()
        })
        .collect();
    Ok(MeanStd::of(&values))
}

/// Mean fraction of outcomes needed to reach each cumulative threshold, over
/// `units` Haar unitaries with single photons in the first `n` modes.
pub fn haar_cumulative_study<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    thresholds: &[f64],
    units: usize,
    rng: &mut R,
) -> Result<Vec<MeanStd>> {
    let input = FockState::single_photons(m, n)?;
    let master: u64 = rng.random();
    let per_unit: Vec<Vec<f64>> = (0..units)
        .into_par_iter()
        .map(|i| {
            let u = haar_unitary(m, &mut stream(master, i as u64));
            let d = output_distribution(&u, &input)?;
            Ok(thresholds.iter().map(|&t| fraction_for_threshold(&d, t)).collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..thresholds.len())
        .map(|j| MeanStd::of(&per_unit.iter().map(|v| v[j]).collect::<Vec<_>>()))
        .collect())
}

/// Best linear approximation found by Haar sampling.
#[derive(Clone, Debug)]
pub struct LinearSearch {
    pub best_tvd: f64,
    pub best_unitary: ComplexMatrix,
    /// Running minimum after each iteration.
    pub trace: Vec<f64>,
}

/// Minimum over `iterations` Haar unitaries `H` of the TVD between the linear
/// distribution of `H` and the non-linear target.
pub fn random_linear_search<R: Rng + ?Sized>(exp: &NonlinearExperiment, iterations: usize, rng: &mut R) -> Result<LinearSearch> {
    if iterations == 0 {
        return Err(Error::Invalid("random search needs at least one iteration".into()));
    }
    let target = nl_distribution(exp)?;
    let m = exp.modes();
    let mut best_tvd = f64::INFINITY;
    let mut best_unitary = ComplexMatrix::identity(m);
    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let h = haar_unitary(m, rng);
        let d = output_distribution(&h, &exp.input)?;
        let t = tvd(&d, &target)?;
        if t < best_tvd {
            best_tvd = t;
            best_unitary = h;
        }
        trace.push(best_tvd);
    }
    Ok(LinearSearch {
        best_tvd,
        best_unitary,
        trace,
    })
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::Invalid(format!(
            "rank correlation needs two equal-length samples of size >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (ra, rb) = (ranks(a), ranks(b));
    Ok(pearson(&ra, &rb))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return f64::NAN;
    }
    cov / (va * vb).sqrt()
}

/// One row of the TVD-versus-bunching experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub phi: f64,
    pub trial: usize,
    pub seed: u64,
    pub tvd: f64,
    pub p_bunch_site: f64,
    pub p_bunch_global: f64,
    pub p_postselect: f64,
}

/// Which distribution the approximate simulations are compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Post-selected simulation with `k = n` ancillas.
    Gadget,
    /// Direct path sum over intermediate states.
    PathSum,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TvdBunchingConfig {
    pub n: usize,
    pub modes: Vec<usize>,
    pub ks: Vec<usize>,
    pub phi: f64,
    pub trials: usize,
    pub seed: u64,
    pub reference: Reference,
    pub gadget_starts: usize,
}

impl TvdBunchingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 4 {
            return Err(Error::Unsupported(format!("n={} outside 1..=4", self.n)));
        }
        if self.modes.iter().any(|&m| m < self.n || m > 45) {
            return Err(Error::Unsupported("mode counts must lie in n..=45".into()));
        }
        if self.ks.iter().any(|&k| k == 0 || k > 4) {
            return Err(Error::Unsupported("gadget sizes must lie in 1..=4".into()));
        }
        if self.trials == 0 {
            return Err(Error::Invalid("at least one trial is required".into()));
        }
        Ok(())
    }

    /// Gadget sizes that must be synthesized, including the reference.
    pub fn required_ks(&self) -> Vec<usize> {
        let mut ks = self.ks.clone();
        if self.reference == Reference::Gadget {
            ks.push(self.n);
        }
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Stream index of trial `trial` at `m` modes; shared by every `k`.
    pub fn stream_index(m: usize, trial: usize) -> u64 {
        ((m as u64) << 32) | trial as u64
    }
}

/// Synthesizes one gadget per required `k` at the configured phase.
pub fn prepare_gadgets(cfg: &TvdBunchingConfig) -> Result<BTreeMap<usize, GadgetSpec>> {
    cfg.required_ks()
        .into_iter()
        .map(|k| {
            let mut rng = stream(cfg.seed ^ 0x6761_6467_6574, k as u64);
            optimize_gadget(k, cfg.phi, default_p_th(k), cfg.gadget_starts, &mut rng, Budget::default()).map(|g| (k, g))
        })
        .collect()
}

/// Runs every `(m, trial)` pair, drawing `W` and `V` from the pair's own
/// stream, and evaluates each `k` against the reference distribution.
/// Records are ordered by `m`, then `k`, then trial.
pub fn experiment_tvd_vs_bunching(cfg: &TvdBunchingConfig, gadgets: &BTreeMap<usize, GadgetSpec>) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    for k in cfg.required_ks() {
        match gadgets.get(&k) {
            Some(g) if g.k == k => {}
            _ => return Err(Error::Invalid(format!("missing gadget for k={k}"))),
        }
    }
    let jobs: Vec<(usize, usize)> = cfg
        .modes
        .iter()
        .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
        .collect();
    let per_job: Vec<Vec<ExperimentRecord>> = jobs
        .par_iter()
        .map(|&(m, trial)| run_trial(cfg, gadgets, m, trial))
        .collect::<Result<_>>()?;
    let mut records: Vec<ExperimentRecord> = per_job.into_iter().flatten().collect();
    records.sort_by_key(|r| (r.m, r.k, r.trial));
    Ok(records)
}

fn run_trial(cfg: &TvdBunchingConfig, gadgets: &BTreeMap<usize, GadgetSpec>, m: usize, trial: usize) -> Result<Vec<ExperimentRecord>> {
    let mut rng = stream(cfg.seed, TvdBunchingConfig::stream_index(m, trial));
    let w = haar_unitary(m, &mut rng);
    let v = haar_unitary(m, &mut rng);
    let input = FockState::single_photons(m, cfg.n)?;
    let x = central_mode(m);
    let reference = match cfg.reference {
        Reference::Gadget => postselected_distribution(&build_setup(&w, &v, x, &input, &gadgets[&cfg.n])?)?.0,
        Reference::PathSum => nl_distribution(&NonlinearExperiment::single_mode(w.clone(), v.clone(), x, cfg.phi, input.clone())?)?,
    };
    let (space, probs) = intermediate(&w, &input)?;
    cfg.ks
        .iter()
        .map(|&k| {
            let (dist, p_ps) = postselected_distribution(&build_setup(&w, &v, x, &input, &gadgets[&k])?)?;
            let mut site = 0.0;
            let mut within = 0.0;
            for (r, p) in space.iter().zip(&probs) {
                if r.get(x - 1) > k {
                    site += p;
                }
                if r.max_occupation() <= k {
                    within += p;
                }
            }
            Ok(ExperimentRecord {
                n: cfg.n,
                m,
                k,
                phi: cfg.phi,
                trial,
                seed: cfg.seed,
                tvd: tvd(&dist, &reference)?,
                p_bunch_site: site,
                p_bunch_global: (1.0 - within).clamp(0.0, 1.0),
                p_postselect: p_ps,
            })
        })
        .collect()
}

/// Per-`(m, k)` means and spreads of the record columns.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSummary {
    pub m: usize,
    pub k: usize,
    pub tvd: MeanStd,
    pub p_bunch_site: MeanStd,
    pub p_bunch_global: MeanStd,
    pub p_postselect: MeanStd,
}

pub fn summarize(records: &[ExperimentRecord]) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<(usize, usize), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.m, r.k)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((m, k), rs)| {
            let col = |f: fn(&ExperimentRecord) -> f64| MeanStd::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            GroupSummary {
                m,
                k,
                tvd: col(|r| r.tvd),
                p_bunch_site: col(|r| r.p_bunch_site),
                p_bunch_global: col(|r| r.p_bunch_global),
                p_postselect: col(|r| r.p_postselect),
            }
        })
        .collect()
}

/// Empirical TVD of growing Algorithm 1 sample prefixes against `exact`.
pub fn sampling_convergence(samples: &[FockState], exact: &Distribution, sizes: &[usize]) -> Result<Vec<(usize, f64)>> {
    sizes
        .iter()
        .map(|&n| {
            if n == 0 || n > samples.len() {
                return Err(Error::Invalid(format!("prefix size {n} outside 1..={}", samples.len())));
            }
            let emp = Distribution::empirical(exact.space().clone(), &samples[..n])?;
            Ok((n, tvd(&emp, exact)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn st(v: &[usize]) -> FockState {
        FockState::new(v.to_vec())
    }

    fn point_mass(space: Arc<StateSpace>, i: usize) -> Distribution {
        let mut p = vec![0.0; space.len()];
        p[i] = 1.0;
        Distribution::new(space, p).unwrap()
    }

    #[test]
    fn tvd_basic() {
        let space = enumerate_states(2, 2).unwrap();
        let a = point_mass(space.clone(), 0);
        let b = point_mass(space.clone(), 2);
        assert_eq!(tvd(&a, &a).unwrap(), 0.0);
        assert_eq!(tvd(&a, &b).unwrap(), 1.0);
        let c = Distribution::new(space.clone(), vec![0.5, 0.0, 0.5]).unwrap();
        let d = Distribution::new(space, vec![0.25, 0.5, 0.25]).unwrap();
        assert!((tvd(&c, &d).unwrap() - 0.5).abs() < 1e-15);
        let other = point_mass(enumerate_states(3, 2).unwrap(), 0);
        assert!(tvd(&a, &other).is_err());
    }

    #[test]
    fn bunching_hom() {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let bs = ComplexMatrix::from_rows(&[vec![h, h], vec![h, -h]]).unwrap();
        let s = st(&[1, 1]);
        assert!((bunching_at_site(&bs, &s, 1, 1).unwrap() - 0.5).abs() < 1e-12);
        assert!((bunching_global(&bs, &s, 1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(bunching_at_site(&bs, &s, 1, 2).unwrap(), 0.0);
        assert!(bunching_global(&bs, &s, 2).unwrap().abs() < 1e-12);
        let id = ComplexMatrix::identity(3);
        assert_eq!(bunching_at_site(&id, &st(&[1, 1, 1]), 2, 1).unwrap(), 0.0);
    }

    #[test]
    fn cumulative_fractions() {
        let space = enumerate_states(3, 3).unwrap();
        let n = space.len();
        let uniform = Distribution::new(space.clone(), vec![1.0 / n as f64; n]).unwrap();
        // 10 states: 0.9 needs 9 of them
        assert_eq!(n, 10);
        assert!((fraction_for_threshold(&uniform, 0.9) - 0.9).abs() < 1e-12);
        let pm = point_mass(space, 4);
        for p in [0.1, 0.5, 1.0] {
            assert_eq!(fraction_for_threshold(&pm, p), 0.1);
        }
        let (sorted, cum) = sorted_cumulative(&uniform);
        assert_eq!(sorted.len(), 10);
        assert!((cum[9] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_metric_cases() {
        let a = Complex64::new(0.3, -0.4);
        let m = amplitude_metrics(a, a);
        assert_eq!((m.delta_abs_rel, m.delta_arg), (Some(0.0), 0.0));
        let m = amplitude_metrics(-a, a);
        assert!(m.delta_abs_rel.unwrap().abs() < 1e-15 && (m.delta_arg - PI).abs() < 1e-12);
        let m = amplitude_metrics(2.0 * a, a);
        assert!((m.delta_abs_rel.unwrap() - 1.0).abs() < 1e-12 && m.delta_arg < 1e-12);
        assert_eq!(amplitude_metrics(a, Complex64::new(0.0, 0.0)).delta_abs_rel, None);
    }

    #[test]
    fn truncation_trivial_limit() {
        let r = haar_truncation_study(3, 5, 3, 10, &mut seeded(1)).unwrap();
        assert!((r.mean - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spearman_values() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&a, &[10.0, 20.0, 30.0, 40.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
        assert!(spearman(&a, &a[..3]).is_err());
    }

    #[test]
    fn mean_std() {
        let s = MeanStd::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_search_zero_phase() {
        let mut rng = seeded(3);
        let w = haar_unitary(2, &mut rng);
        let v = haar_unitary(2, &mut rng);
        let exp = NonlinearExperiment::single_mode(w, v, 1, 0.0, st(&[1, 0])).unwrap();
        let res = random_linear_search(&exp, 400, &mut rng).unwrap();
        assert!(res.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(res.best_tvd < 0.02);
    }
}
