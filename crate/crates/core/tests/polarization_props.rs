use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix4;
use num_complex::Complex64;
use proptest::prelude::*;
use qkdsim_core::polarization::{
    chsh_value, correlation, outcome_probability, qber_in_basis, werner_state, AnalyzerAngle, Port, TwoQubitState,
    CHSH_ANGLES, TSIRELSON_BOUND,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn angle(x: f64) -> AnalyzerAngle {
    AnalyzerAngle::new(x).unwrap()
}

/// `G G† / tr(G G†)` for a random complex `G` is a valid full-rank state.
fn random_state(rng: &mut ChaCha8Rng) -> TwoQubitState {
    let g = Matrix4::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = g * g.adjoint();
    let tr = m.trace();
    TwoQubitState::new(m / tr).unwrap()
}

fn state_from_seed(seed: u64) -> TwoQubitState {
    random_state(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #[test]
    fn probabilities_form_a_distribution(seed in any::<u64>(), a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let s = state_from_seed(seed);
        let mut total = 0.0;
        for pa in Port::ALL {
            for pb in Port::ALL {
                let p = outcome_probability(&s, angle(a), angle(b), pa, pb);
                prop_assert!((0.0..=1.0).contains(&p));
                total += p;
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_turn_invariance(seed in any::<u64>(), a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let s = state_from_seed(seed);
        for pa in Port::ALL {
            for pb in Port::ALL {
                let p = outcome_probability(&s, angle(a), angle(b), pa, pb);
                let q = outcome_probability(&s, angle(a + PI), angle(b - PI), pa, pb);
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn werner_correlation_is_v_cos(v in 0.0..=1.0f64, a in -4.0..4.0f64, b in -4.0..4.0f64) {
        let s = werner_state(v).unwrap();
        let e = correlation(&s, angle(a), angle(b));
        prop_assert!((e - v * (2.0 * (a - b)).cos()).abs() < 1e-12);
    }

    #[test]
    fn reflected_port_is_orthogonal(v in 0.0..=1.0f64, a in -4.0..4.0f64) {
        let s = werner_state(v).unwrap();
        let same = outcome_probability(&s, angle(a), angle(a), Port::Transmitted, Port::Transmitted);
        let crossed = outcome_probability(&s, angle(a), angle(a + FRAC_PI_2), Port::Transmitted, Port::Reflected);
        prop_assert!((same - crossed).abs() < 1e-12);
    }
}

#[test]
fn werner_grid() {
    for i in 0..=20 {
        let v = i as f64 / 20.0;
        let s = werner_state(v).unwrap();
        for k in 0..12 {
            let th = k as f64 * PI / 12.0;
            assert!((correlation(&s, angle(th), angle(th)) - v).abs() < 1e-12);
            assert!((qber_in_basis(&s, angle(th)) - (1.0 - v) / 2.0).abs() < 1e-12);
        }
        let [a, a2, b, b2] = CHSH_ANGLES;
        assert!((chsh_value(&s, a, a2, b, b2) - TSIRELSON_BOUND * v).abs() < 1e-12);
    }
}

#[test]
fn tsirelson_over_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut largest: f64 = 0.0;
    for _ in 0..1000 {
        let s = random_state(&mut rng);
        let mut ang = || angle(rng.random_range(0.0..PI));
        let (a, a2, b, b2) = (ang(), ang(), ang(), ang());
        let v = chsh_value(&s, a, a2, b, b2);
        assert!(v.abs() <= TSIRELSON_BOUND + 1e-10);
        largest = largest.max(v.abs());
    }
    assert!(largest > 0.0);
}

#[test]
fn random_states_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let s = random_state(&mut rng);
        let ev = s.eigenvalues();
        assert!(ev.iter().all(|&x| x > -1e-10));
        assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn non_physical_matrices_are_rejected() {
    let mut m = *TwoQubitState::phi_plus().matrix();
    m[(0, 0)] += Complex64::new(0.5, 0.0);
    assert!(TwoQubitState::new(m).is_err());
    let mut m = *TwoQubitState::phi_plus().matrix();
    m[(0, 1)] = Complex64::new(0.0, 0.3);
    assert!(TwoQubitState::new(m).is_err());
    assert!(werner_state(1.2).is_err());
}
