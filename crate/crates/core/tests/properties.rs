use bellkit_core::exact::{int, ratio, to_f64};
use bellkit_core::statistics::chsh_exact;
use bellkit_core::*;
use proptest::prelude::*;

fn arb_cell() -> impl Strategy<Value = (u64, u64)> {
    (1u64..5000).prop_flat_map(|m| (Just(m), 0..=m))
}

fn arb_tally() -> impl Strategy<Value = TallyTable> {
    prop::array::uniform4(arb_cell()).prop_map(|cells| {
        TallyTable::from_counts(cells.map(|c| c.0), cells.map(|c| c.1))
    })
}

fn arb_uniform_tally() -> impl Strategy<Value = TallyTable> {
    (1u64..2000).prop_flat_map(|k| {
        prop::array::uniform4(0..=k).prop_map(move |n| TallyTable::uniform(k, n))
    })
}

proptest! {
    #[test]
    fn e_sum_matches_closed_form(t in arb_tally()) {
        let s = chsh_statistic(&t).unwrap();
        let scale: f64 = s.correlations().iter().map(|e| e.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        let tol = 4.0 * f64::EPSILON * scale;
        prop_assert!((s.e_sum() - s.s).abs() <= tol, "{} vs {}", s.e_sum(), s.s);
        prop_assert!((-4.0..=4.0).contains(&s.s));
        prop_assert!(s.correlations().iter().all(|e| (-1.0..=1.0).contains(e)));
    }

    #[test]
    fn equal_fractions_never_violate(k in 1u64..10_000, n in 0u64..10_000) {
        let n = n % (k + 1);
        let s = chsh_statistic(&TallyTable::uniform(k, [n; 4])).unwrap();
        prop_assert!(s.s <= 2.0);
        prop_assert!(!s.violated);
    }

    #[test]
    fn sprime_route_matches_tally_route(t in arb_uniform_tally()) {
        let n = t.total() as u64;
        let via_sprime = chsh_from_sprime(sprime(&t).s_prime, n).unwrap();
        prop_assert_eq!(via_sprime, chsh_statistic(&t).unwrap().s);
    }

    #[test]
    fn sprime_is_within_bounds(t in arb_tally()) {
        let sp = sprime(&t);
        prop_assert!(sp.s_prime_min <= sp.s_prime && sp.s_prime <= sp.s_prime_max);
        let sk = skew(&t);
        prop_assert_eq!(sp.s_prime_max, 3 * sk.n_max as i128 - sk.n_min as i128);
        prop_assert_eq!(sp.s_prime_min, 3 * sk.n_min as i128 - sk.n_max as i128);
    }

    #[test]
    fn bell1964_identity(cells in prop::array::uniform3(arb_cell())) {
        let [(ac, nac), (ba, nba), (bc, nbc)] = cells;
        let t = ThreeSettingTally {
            trials_ac: ac, trials_ba: ba, trials_bc: bc,
            corr_ac: nac, corr_ba: nba, corr_bc: nbc,
        };
        let b = bell1964_statistic(&t).unwrap();
        // both rounded once from exact values, scale ≤ 3
        prop_assert!((b.b_corr - (2.0 * b.b_frac + 1.0)).abs() <= 8.0 * f64::EPSILON);
        // independent route through the correlation coefficients
        let e = |n, m| correlation_coefficient(n, m).unwrap();
        let b_corr = e(nac, ac) - e(nba, ba) - e(nbc, bc);
        prop_assert!((b.b_corr - b_corr).abs() <= 16.0 * f64::EPSILON);
    }

    #[test]
    fn uniform_epsilon_is_twice_skew_over_n(t in arb_uniform_tally()) {
        let r = nosignalling_deltas(&t).unwrap();
        let sk = skew(&t);
        prop_assert_eq!(r.epsilon_achieved_exact, ratio(2 * sk.sigma, t.total()));
    }

    #[test]
    fn violation_needs_skew(t in arb_uniform_tally()) {
        let s = chsh_statistic(&t).unwrap();
        if s.violated {
            let sk = skew(&t);
            prop_assert!(sk.sigma >= 1);
            let excess = chsh_exact(&t).unwrap() - int(2);
            prop_assert!(int(sk.sigma) * int(24) > int(t.total()) * &excess);
            prop_assert!(nosignalling_deltas(&t).unwrap().epsilon_achieved_exact * int(12) > excess);
        }
    }

    #[test]
    fn deltas_are_paired_orientations(t in arb_tally()) {
        let r = nosignalling_deltas(&t).unwrap();
        prop_assert_eq!(r.deltas.len(), 12);
        for d in &r.deltas {
            let back = r.deltas.iter().find(|e| e.alpha == d.beta && e.beta == d.alpha).unwrap();
            // α(α+β)·v(α,β) = −β(α+β)·v(β,α)
            let a = t.trial_counts()[(d.alpha as u8 - b'a') as usize];
            let b = t.trial_counts()[(d.beta as u8 - b'a') as usize];
            prop_assert_eq!(int(a) * d.exact.clone(), -(int(b) * back.exact.clone()));
        }
        prop_assert!(r.epsilon_achieved >= 0.0);
    }
}

#[test]
fn sprime_bounds_exhaustive_small() {
    for k in 1..=6 {
        for t in enumerate_uniform_tallies(k).unwrap() {
            let sp = sprime(&t);
            assert!(sp.s_prime_min <= sp.s_prime && sp.s_prime <= sp.s_prime_max, "{t:?}");
        }
    }
}

#[test]
fn epsilon_zero_iff_cross_products_vanish() {
    // proportional but unequal cells: every α·n_β − β·n_α is zero
    let t = TallyTable::from_counts([10, 20, 30, 40], [3, 6, 9, 12]);
    let r = nosignalling_deltas(&t).unwrap();
    assert_eq!(r.epsilon_achieved, 0.0);
    let t = TallyTable::from_counts([10, 20, 30, 40], [3, 6, 9, 13]);
    assert!(nosignalling_deltas(&t).unwrap().epsilon_achieved > 0.0);
}

#[test]
fn required_skew_identity_random() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n: u64 = rng.random_range(1..1_000_000);
        let d: f64 = rng.random_range(0.0..2.0);
        assert_eq!(required_skew(n, d).unwrap() * int(3), delta_small(n, d).unwrap());
        assert!((to_f64(&delta_small(n, d).unwrap()) - n as f64 * d / 8.0).abs() <= 1e-9 * n as f64);
    }
}
