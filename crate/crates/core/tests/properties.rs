use nlbs::analysis::{bunching_at_site, fraction_for_threshold, tvd};
use nlbs::fock::{enumerate_states, state_count};
use nlbs::gadget::{expanded_gadget_matrix, gadget_objective, gadget_residuals, success_probability};
use nlbs::linalg::{haar_unitary, permanent, permanent_naive, ComplexMatrix, ReckParams};
use nlbs::linear_bs::{output_distribution, Distribution};
use nlbs::nonlinear_bs::{nl_distribution, nlp_amplitude, nlp_amplitude_split, ubar, NonlinearExperiment};
use nlbs::rng::seeded;
use nlbs::FockState;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn complex_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(v[i * n + j].0, v[i * n + j].1)))
}

fn sized_matrix() -> impl Strategy<Value = ComplexMatrix> {
    (1usize..=6).prop_flat_map(complex_matrix)
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=6).prop_flat_map(|m| (Just(m), 1usize..=3))
}

fn random_dist(m: usize, n: usize, seed: u64) -> Distribution {
    use rand::Rng;
    let space = enumerate_states(m, n).unwrap();
    let mut rng = seeded(seed);
    let w: Vec<f64> = (0..space.len()).map(|_| rng.random::<f64>()).collect();
    Distribution::from_weights(space, w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permanent_matches_naive(m in sized_matrix()) {
        let diff = (permanent(&m).unwrap() - permanent_naive(&m).unwrap()).norm();
        prop_assert!(diff <= 1e-9);
    }

    #[test]
    fn permanent_invariant_under_transpose_and_permutation(m in sized_matrix(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let n = m.rows();
        let mut rng = seeded(seed);
        let mut rows: Vec<usize> = (0..n).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let p = permanent(&m).unwrap();
        prop_assert!((permanent(&m.transpose()).unwrap() - p).norm() <= 1e-10);
        prop_assert!((permanent(&m.select(&rows, &cols)).unwrap() - p).norm() <= 1e-10);
    }

    #[test]
    fn permanent_is_linear_in_each_row(m in sized_matrix(), re in -2.0f64..2.0, im in -2.0f64..2.0, row in 0usize..6) {
        let row = row % m.rows();
        let c = Complex64::new(re, im);
        let mut scaled = m.clone();
        for j in 0..m.cols() {
            scaled[(row, j)] *= c;
        }
        prop_assert!((permanent(&scaled).unwrap() - c * permanent(&m).unwrap()).norm() <= 1e-9);
    }

    #[test]
    fn state_space_rank_is_bijective((m, n) in dims()) {
        let space = enumerate_states(m, n).unwrap();
        prop_assert_eq!(space.len() as u128, state_count(m, n));
        for (i, s) in space.iter().enumerate() {
            prop_assert_eq!(space.rank(s).unwrap(), i);
            prop_assert_eq!(space.unrank(i).unwrap(), s);
            prop_assert_eq!(s.photons(), n);
        }
        for w in space.states().windows(2) {
            prop_assert!(w[0].occupations() > w[1].occupations());
        }
    }

    #[test]
    fn fock_string_round_trip(occ in prop::collection::vec(0usize..5, 1..8)) {
        let s = FockState::new(occ);
        prop_assert_eq!(s.to_string().parse::<FockState>().unwrap(), s);
    }

    #[test]
    fn haar_output_is_normalized((m, n) in dims(), seed in any::<u64>()) {
        let u = haar_unitary(m, &mut seeded(seed));
        prop_assert!(u.unitarity_deviation() <= 1e-12);
        let d = output_distribution(&u, &FockState::single_photons(m, n.min(m)).unwrap()).unwrap();
        prop_assert!((d.total() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn reck_is_unitary(m in 1usize..7, seed in any::<u64>()) {
        let p = ReckParams::random(m, &mut seeded(seed));
        prop_assert!(p.to_unitary().unwrap().unitarity_deviation() <= 1e-12);
    }

    #[test]
    fn tvd_is_a_metric((m, n) in dims(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (p, q, r) = (random_dist(m, n, a), random_dist(m, n, b), random_dist(m, n, c));
        let pq = tvd(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert_eq!(tvd(&p, &p).unwrap(), 0.0);
        prop_assert!((pq - tvd(&q, &p).unwrap()).abs() <= 1e-15);
        prop_assert!(tvd(&p, &r).unwrap() <= pq + tvd(&q, &r).unwrap() + 1e-12);
    }

    #[test]
    fn threshold_fraction_is_monotone((m, n) in dims(), seed in any::<u64>(), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0) {
        let d = random_dist(m, n, seed);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(fraction_for_threshold(&d, lo) <= fraction_for_threshold(&d, hi));
    }

    #[test]
    fn bunching_and_complement_sum_to_one(m in 2usize..6, n in 1usize..4, k in 0usize..4, seed in any::<u64>()) {
        let n = n.min(m);
        let w = haar_unitary(m, &mut seeded(seed));
        let s = FockState::single_photons(m, n).unwrap();
        let x = m.div_ceil(2);
        let above = bunching_at_site(&w, &s, x, k).unwrap();
        let d = output_distribution(&w, &s).unwrap();
        let below: f64 = d.iter().filter(|(r, _)| r.get(x - 1) <= k).map(|(_, p)| p).sum();
        prop_assert!((above + below - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn gadget_residuals_match_naive(k in 1usize..4, seed in any::<u64>(), phi in 0.0f64..(2.0 * PI)) {
        let u = haar_unitary(k + 1, &mut seeded(seed));
        let fast = gadget_residuals(&u, phi).unwrap();
        let p0 = permanent_naive(&expanded_gadget_matrix(&u, 0).unwrap()).unwrap();
        for l in 1..=k {
            let pl = permanent_naive(&expanded_gadget_matrix(&u, l).unwrap()).unwrap() / nlbs::fock::factorial(l) as f64;
            let want = pl - p0 * Complex64::from_polar(1.0, -((l * l) as f64) * phi);
            prop_assert!((fast[l - 1] - want).norm() <= 1e-10);
        }
        prop_assert!((success_probability(&u).unwrap() - p0.norm_sqr()).abs() <= 1e-12);
    }

    #[test]
    fn objective_nonnegative(k in 1usize..4, seed in any::<u64>(), phi in 0.0f64..(2.0 * PI)) {
        let p = ReckParams::random(k + 1, &mut seeded(seed));
        prop_assert!(gadget_objective(&p, phi, k).unwrap() >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nonlinear_forms_agree_and_are_periodic(m in 2usize..=6, n in 1usize..=3, seed in any::<u64>(), phi in 0.0f64..(2.0 * PI)) {
        let n = n.min(m);
        let mut rng = seeded(seed);
        let (w, v) = (haar_unitary(m, &mut rng), haar_unitary(m, &mut rng));
        let s = FockState::single_photons(m, n).unwrap();
        let x = m.div_ceil(2);
        for t in enumerate_states(m, n).unwrap().iter().take(12) {
            let a = nlp_amplitude(&w, x, phi, &v, &s, t).unwrap();
            prop_assert!((a - nlp_amplitude_split(&w, x, phi, &v, &s, t).unwrap()).norm() <= 1e-12);
            prop_assert!((a - nlp_amplitude(&w, x, phi + 2.0 * PI, &v, &s, t).unwrap()).norm() <= 1e-12);
        }
        let d = nl_distribution(&NonlinearExperiment::single_mode(w.clone(), v.clone(), x, phi, s.clone()).unwrap()).unwrap();
        prop_assert!((d.total() - 1.0).abs() <= 1e-9);
        prop_assert!(ubar(&w, x, phi, &v).unwrap().unitarity_deviation() <= 1e-12);
    }

    #[test]
    fn nonlinear_tvd_is_continuous_in_phase(seed in any::<u64>(), phi in 0.0f64..3.0) {
        let mut rng = seeded(seed);
        let (w, v) = (haar_unitary(4, &mut rng), haar_unitary(4, &mut rng));
        let s = FockState::single_photons(4, 3).unwrap();
        let dphi = 0.01;
        let dist = |p: f64| {
            let nl = nl_distribution(&NonlinearExperiment::single_mode(w.clone(), v.clone(), 2, p, s.clone()).unwrap()).unwrap();
            let lin = output_distribution(&ubar(&w, 2, p, &v).unwrap(), &s).unwrap();
            tvd(&nl, &lin).unwrap()
        };
        prop_assert!((dist(phi + dphi) - dist(phi)).abs() <= 10.0 * dphi);
    }
}
