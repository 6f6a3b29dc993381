use hlforms::norms::{
    estimate_norm, exact_norm_sup, interpolation_upper_bound, spectral_norm, AscentConfig,
};
use hlforms::witnesses::{diagonal_kform, ksz_sample, lift_kform, random_dense, Distribution};
use hlforms::{BlockPattern, ExtendedExponent, MultilinearForm};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn form_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = MultilinearForm> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        prop::collection::vec(-4.0f64..4.0, n.pow(m as u32))
            .prop_map(move |c| MultilinearForm::dense(m, n, c).unwrap())
    })
}

fn pattern_for(m: usize, pick: usize) -> BlockPattern {
    let all = BlockPattern::compositions(m);
    all[pick % all.len()].clone()
}

fn exponent_strategy() -> impl Strategy<Value = ExtendedExponent> {
    prop_oneof![
        Just(ExtendedExponent::Infinite),
        (1i64..=12, 1i64..=4)
            .prop_filter_map("q >= 1", |(a, b)| ExtendedExponent::ratio(a + b, b).ok()),
    ]
}

fn ascent(restarts: usize, seed: u64) -> AscentConfig {
    AscentConfig {
        restarts,
        seed,
        ..Default::default()
    }
}

fn random_unit(n: usize, q: &ExtendedExponent, seed: u64) -> Vec<f64> {
    let v = random_dense(1, n, Distribution::Gaussian, seed).unwrap();
    let x = v.dense_coefficients().unwrap().to_vec();
    let norm = hlforms::norms::lp_norm(&x, q.to_f64());
    x.iter().map(|v| v / norm).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocked_sum_at_most_full_sum(t in form_strategy(4, 4), pick in 0usize..8, r in 0.3f64..4.0) {
        let pattern = pattern_for(t.degree(), pick);
        let blocked = t.blocked_power_sum(&pattern, r).unwrap();
        let full = t.power_sum(r).unwrap();
        prop_assert!(blocked <= full * (1.0 + 1e-12));
    }

    #[test]
    fn power_sums_decrease_in_r(t in form_strategy(3, 4), pick in 0usize..4, r in 0.3f64..3.0, dr in 0.0f64..3.0) {
        let pattern = pattern_for(t.degree(), pick);
        let (r, rho) = (r, r + dr);
        let sr = t.blocked_power_sum(&pattern, r).unwrap();
        let srho = t.blocked_power_sum(&pattern, rho).unwrap();
        let count = (t.dim() as f64).powi(pattern.k() as i32);
        prop_assert!(srho <= sr * (1.0 + 1e-12));
        prop_assert!(sr <= count.powf(1.0 / r - 1.0 / rho) * srho * (1.0 + 1e-12));
    }

    #[test]
    fn power_sum_is_homogeneous(t in form_strategy(3, 3), pick in 0usize..4, r in 0.5f64..3.0, c in -8.0f64..8.0) {
        let pattern = pattern_for(t.degree(), pick);
        let base = t.blocked_power_sum(&pattern, r).unwrap();
        let scaled = t.scaled(c).unwrap().blocked_power_sum(&pattern, r).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * (1.0 + c.abs() * base));
    }

    #[test]
    fn slices_agree_with_evaluation(t in form_strategy(4, 4), seed in any::<u64>(), pos in 0usize..4) {
        let (m, n) = (t.degree(), t.dim());
        let args: Vec<Vec<f64>> = (0..m).map(|j| random_unit(n, &ExtendedExponent::Infinite, seed ^ j as u64)).collect();
        let position = pos % m;
        let fixed: Vec<&[f64]> = args.iter().enumerate().filter(|(j, _)| *j != position).map(|(_, a)| a.as_slice()).collect();
        let slice = t.slice_vector(position, &fixed).unwrap();
        let via_slice: f64 = slice.iter().zip(&args[position]).map(|(a, b)| a * b).sum();
        let refs: Vec<&[f64]> = args.iter().map(Vec::as_slice).collect();
        let direct = t.evaluate(&refs).unwrap();
        prop_assert!((via_slice - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
    }

    #[test]
    fn lift_reproduces_blocked_coefficients(k in 1usize..=3, n in 1usize..=4, extra in 0usize..2, pick in 0usize..8, seed in any::<u64>()) {
        let m = k + extra;
        let candidates: Vec<BlockPattern> = BlockPattern::compositions(m).into_iter().filter(|p| p.k() == k).collect();
        let pattern = candidates[pick % candidates.len()].clone();
        let a = random_dense(k, n, Distribution::Gaussian, seed).unwrap();
        let t = lift_kform(&a, &pattern).unwrap();
        for (idx, v) in a.nonzero_entries() {
            prop_assert_eq!(t.blocked_coefficient(&pattern, &idx).unwrap(), v);
        }
        let mut block = Vec::new();
        let mut on_pattern = true;
        t.for_each_nonzero(&mut |full, _| on_pattern &= pattern.collapse_into(full, &mut block));
        prop_assert!(on_pattern);
    }

    #[test]
    fn ascent_value_is_attained(t in form_strategy(3, 4), p in exponent_strategy(), seed in any::<u64>()) {
        let exps = vec![p.clone(); t.degree()];
        let est = estimate_norm(&t, &exps, &ascent(4, seed)).unwrap();
        if let Some(w) = &est.witness {
            for x in w {
                prop_assert!(hlforms::norms::lp_norm(x, p.to_f64()) <= 1.0 + 1e-9);
            }
            let refs: Vec<&[f64]> = w.iter().map(Vec::as_slice).collect();
            prop_assert!((t.evaluate(&refs).unwrap().abs() - est.value).abs() <= 1e-9 * (1.0 + est.value));
        }
        for pair in est.sweep_values.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-9 * (1.0 + pair[0].abs()));
        }
    }

    #[test]
    fn sup_norm_bounds_every_evaluation(t in form_strategy(3, 4), seed in any::<u64>()) {
        let (m, n) = (t.degree(), t.dim());
        prop_assume!(n * (m - 1) <= 24);
        let inf = ExtendedExponent::Infinite;
        let args: Vec<Vec<f64>> = (0..m).map(|j| random_unit(n, &inf, seed.wrapping_add(j as u64))).collect();
        let refs: Vec<&[f64]> = args.iter().map(Vec::as_slice).collect();
        let probe = t.evaluate(&refs).unwrap().abs();
        prop_assert!(probe <= exact_norm_sup(&t).unwrap().value * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn scaling_by_powers_of_two_is_exact(t in form_strategy(3, 3), e in -6i32..6, seed in any::<u64>()) {
        let c = 2f64.powi(e);
        let exps = vec![ExtendedExponent::Infinite; t.degree()];
        let a = estimate_norm(&t, &exps, &ascent(4, seed)).unwrap().value;
        let b = estimate_norm(&t.scaled(c).unwrap(), &exps, &ascent(4, seed)).unwrap().value;
        prop_assert_eq!(b, c * a);
    }

    #[test]
    fn sup_norm_is_sandwiched(t in form_strategy(3, 4), seed in any::<u64>()) {
        prop_assume!(t.dim() * (t.degree() - 1) <= 24);
        let exact = exact_norm_sup(&t).unwrap().value;
        let lower = estimate_norm(&t, &vec![ExtendedExponent::Infinite; t.degree()], &ascent(4, seed)).unwrap().value;
        prop_assert!(lower <= exact * (1.0 + 1e-9) + 1e-12);
        if t.degree() == 2 {
            let upper = interpolation_upper_bound(&t, &ExtendedExponent::Infinite).unwrap().value;
            prop_assert!(exact <= upper * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn interpolation_bounds_ascent(n in 2usize..=6, seed in any::<u64>(), p in prop_oneof![Just(2i64), Just(3), Just(4), Just(8)]) {
        let t = random_dense(2, n, Distribution::Gaussian, seed).unwrap();
        let pe = ExtendedExponent::integer(p).unwrap();
        let lower = estimate_norm(&t, &[pe.clone(), pe.clone()], &ascent(8, seed)).unwrap().value;
        let upper = interpolation_upper_bound(&t, &pe).unwrap().value;
        prop_assert!(lower <= upper * (1.0 + 1e-9));
    }

    #[test]
    fn lifted_norm_at_most_base_norm(k in 1usize..=2, n in 1usize..=4, pick in 0usize..4, seed in any::<u64>()) {
        let candidates: Vec<BlockPattern> = BlockPattern::compositions(3).into_iter().filter(|p| p.k() == k).collect();
        let pattern = candidates[pick % candidates.len()].clone();
        let a = random_dense(k, n, Distribution::Gaussian, seed).unwrap();
        let t = lift_kform(&a, &pattern).unwrap();
        prop_assert!(exact_norm_sup(&t).unwrap().value <= exact_norm_sup(&a).unwrap().value + 1e-9);
    }
}

#[test]
fn sup_norm_grows_with_the_exponent_domain() {
    // Larger p means larger unit balls, so the norm cannot decrease.
    let t = random_dense(2, 5, Distribution::Gaussian, 31).unwrap();
    let mut last = 0.0;
    for p in ["2", "3", "4", "8", "inf"] {
        let pe: ExtendedExponent = p.parse().unwrap();
        let v = estimate_norm(&t, &[pe.clone(), pe], &ascent(32, 3))
            .unwrap()
            .value;
        assert!(v >= last * (1.0 - 1e-9), "p = {p}: {v} < {last}");
        last = v;
    }
}

#[test]
fn random_sign_norms_grow_like_n_three_halves() {
    let mut points = Vec::new();
    for n in [4usize, 8, 12, 16] {
        let mut norms: Vec<f64> = (0..8)
            .map(|s| {
                exact_norm_sup(&ksz_sample(2, n, 100 * n as u64 + s).unwrap())
                    .unwrap()
                    .value
            })
            .collect();
        norms.sort_by(f64::total_cmp);
        points.push((n as f64, norms[4]));
    }
    let fit = hlforms::experiments::fit_loglog(&points).unwrap();
    assert!(fit.slope <= 1.65, "slope {}", fit.slope);
    assert!(fit.slope >= 1.0, "slope {}", fit.slope);
}

#[test]
fn spectral_norm_matches_svd() {
    for (n, seed) in [(2usize, 1u64), (5, 2), (9, 3), (16, 4)] {
        let t = random_dense(2, n, Distribution::Gaussian, seed).unwrap();
        let a = DMatrix::from_row_slice(n, n, t.dense_coefficients().unwrap());
        let largest = a.singular_values().max();
        let (sigma, _) = spectral_norm(&t).unwrap();
        assert!(
            (sigma - largest).abs() <= 1e-8 * largest,
            "n = {n}: {sigma} vs {largest}"
        );
    }
}

#[test]
fn diagonal_witness_norm_at_infinity_is_n() {
    for n in [1usize, 3, 6] {
        let s = diagonal_kform(2, n).unwrap();
        assert_eq!(exact_norm_sup(&s).unwrap().value, n as f64);
    }
}
