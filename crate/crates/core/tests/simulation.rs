use std::f64::consts::{PI, SQRT_2};

use bellkit_core::simulate::quantum_correlation_probability;
use bellkit_core::*;

/// Standard error of S from per-cell binomial variances.
fn chsh_standard_error(t: &TallyTable, expected: [f64; 4]) -> f64 {
    expected
        .iter()
        .zip(t.trial_counts())
        .map(|(e, m)| (1.0 - e * e) / m as f64)
        .sum::<f64>()
        .sqrt()
}

#[test]
fn quantum_cells_track_cos_squared() {
    let cfg = SimulationConfig {
        model: Model::Quantum,
        theta_a0: 0.3,
        theta_a1: 2.1,
        theta_b0: -0.4,
        theta_b1: 1.0,
        trials: 200_000,
        seed: 99,
        setting_scheme: SettingScheme::UniformRandom,
        flip_station2: false,
    };
    let t = simulate_tally(&cfg, 4).unwrap();
    for s in Setting::ALL {
        let m = t.trials(s);
        assert!(m >= 10_000);
        let p = quantum_correlation_probability(cfg.angle_difference(s));
        let frac = t.corr(s) as f64 / m as f64;
        let sd = (p * (1.0 - p) / m as f64).sqrt();
        assert!((frac - p).abs() <= 5.0 * sd, "{s}: {frac} vs {p}");
    }
}

#[test]
fn lhv_never_beats_the_local_bound() {
    let angle_sets = [
        [0.0, PI / 2.0, PI / 4.0, -PI / 4.0],
        [0.1, 1.7, 0.9, -0.6],
        [0.0, PI / 4.0, PI / 8.0, 3.0 * PI / 8.0],
        [2.0, -1.0, 0.5, 3.0],
    ];
    for (i, [a0, a1, b0, b1]) in angle_sets.into_iter().enumerate() {
        let cfg = SimulationConfig {
            model: Model::Lhv,
            theta_a0: a0,
            theta_a1: a1,
            theta_b0: b0,
            theta_b1: b1,
            trials: 1_000_000,
            seed: 1000 + i as u64,
            setting_scheme: SettingScheme::UniformRandom,
            flip_station2: false,
        };
        let t = simulate_tally(&cfg, 8).unwrap();
        let s = chsh_statistic(&t).unwrap().s;
        let se = chsh_standard_error(&t, cfg.expected_correlations());
        assert!(s <= 2.0 + 5.0 * se, "angles {i}: S = {s}, se = {se}");
        assert!(cfg.expected_chsh() <= 2.0 + 1e-12);
    }
}

#[test]
fn quantum_chsh_converges_to_two_root_two() {
    let cfg = SimulationConfig::chsh_optimal(Model::Quantum, 400_000, 5);
    let t = simulate_tally(&cfg, 4).unwrap();
    let s = chsh_statistic(&t).unwrap().s;
    let se = chsh_standard_error(&t, cfg.expected_correlations());
    assert!((s - 2.0 * SQRT_2).abs() <= 5.0 * se, "{s}");
}

#[test]
fn equal_angles_give_the_uniform_boundary() {
    let cfg = SimulationConfig {
        model: Model::Quantum,
        theta_a0: 0.5,
        theta_a1: 0.5,
        theta_b0: 0.5,
        theta_b1: 0.5,
        trials: 10_000,
        seed: 1,
        setting_scheme: SettingScheme::UniformRandom,
        flip_station2: false,
    };
    let s = chsh_statistic(&simulate_tally(&cfg, 1).unwrap()).unwrap();
    assert_eq!(s.s, 2.0);
    assert!(!s.violated);
}

#[test]
fn settings_are_independent() {
    let cfg = SimulationConfig::chsh_optimal(Model::Lhv, 100_000, 17);
    let t = simulate_tally(&cfg, 2).unwrap();
    let expected = cfg.trials as f64 / 4.0;
    let chi2: f64 = t
        .trial_counts()
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    // χ² with 3 degrees of freedom, p = 0.001
    assert!(chi2 < 16.27, "chi2 = {chi2}");

    // s2 given s1 is uniform
    for (x, y) in [(t.a, t.b), (t.c, t.d)] {
        let mid = (x + y) as f64 / 2.0;
        let chi2 = ((x as f64 - mid).powi(2) + (y as f64 - mid).powi(2)) / mid;
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }
}

#[test]
fn same_seed_same_tally_and_different_seed_differs() {
    let cfg = SimulationConfig::chsh_optimal(Model::Quantum, 300_000, 42);
    let a = simulate_tally(&cfg, 1).unwrap();
    let b = simulate_tally(&cfg, 4).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
    let other = SimulationConfig { seed: 43, ..cfg };
    assert_ne!(simulate_tally(&other, 4).unwrap(), a);
}
