// SPDX-License-Identifier: Apache-2.0

//! Cross-module properties: generator consistency, measure behaviour,
//! freezing against direct evolution, and randomized invariants.

use corrchan::channel::{correlated_channel, correlated_dephasing_channel, correlated_nmad_channel, cptp_report};
use corrchan::dynamics::{bloch_update, freezing_predicate, BlochDiagonal, ChannelKind, FreezeVerdict};
use corrchan::linalg::RealMatrix;
use corrchan::maps::{correlated_generator, correlated_transfer_matrix, pauli_basis, transfer_matrix, DEFAULT_STEP};
use corrchan::measures::{blp_measure, concurrence, trace_distance, uniform_grid};
use corrchan::noise::NoiseParams;
use corrchan::qec::{success_probability_closed, success_probability_normalized};
use corrchan::states::{apply_local_unitaries, random_density, random_unitary, ProbeState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rk4_transfer(noise: &NoiseParams, mu: f64, t_end: f64, dt: f64) -> RealMatrix {
    let l = |t: f64| correlated_generator(noise, mu, t, DEFAULT_STEP).unwrap();
    let mut f = RealMatrix::identity(16);
    let steps = (t_end / dt).round() as usize;
    for n in 0..steps {
        let t = n as f64 * dt;
        let (l0, lh, l1) = (l(t), l(t + 0.5 * dt), l(t + dt));
        let k1 = &l0 * &f;
        let k2 = &lh * &(&f + &k1.scale(0.5 * dt));
        let k3 = &lh * &(&f + &k2.scale(0.5 * dt));
        let k4 = &l1 * &(&f + &k3.scale(dt));
        let incr = &(&(&k1 + &k2.scale(2.0)) + &k3.scale(2.0)) + &k4;
        f = &f + &incr.scale(dt / 6.0);
    }
    f
}

#[test]
fn generator_integrates_back_to_transfer_matrix() {
    for noise in [NoiseParams::oun(1.0, 0.05).unwrap(), NoiseParams::rtn(0.3, 1.0).unwrap()] {
        let mu = 0.4;
        let integrated = rk4_transfer(&noise, mu, 10.0, 1e-3);
        let direct = correlated_transfer_matrix(&noise, mu, 10.0).unwrap();
        let dev = integrated.max_abs_diff(direct.matrix());
        assert!(dev < 1e-4, "{}: RK4 deviation {dev:e}", noise.name());
    }
}

fn blp_for(noise: &NoiseParams, mu: f64, points: usize) -> f64 {
    let grid = uniform_grid(100.0, points).unwrap();
    let (a, b) = (ProbeState::PhiPlus.density(), ProbeState::PhiMinus.density());
    blp_measure(
        |t| {
            let ch = correlated_channel(noise, mu, t)?;
            Ok((ch.apply(&a)?, ch.apply(&b)?))
        },
        &grid,
    )
    .unwrap()
    .value
}

#[test]
fn blp_vanishes_for_oun_and_not_for_rtn() {
    let oun = NoiseParams::oun(1.0, 0.05).unwrap();
    let rtn = NoiseParams::rtn(0.8, 0.05).unwrap();
    for mu in [0.0, 0.5, 0.9] {
        assert_eq!(blp_for(&oun, mu, 1000), 0.0);
        assert!(blp_for(&rtn, mu, 1000) > 0.0);
    }
}

#[test]
fn blp_is_stable_under_grid_refinement() {
    let rtn = NoiseParams::rtn(0.8, 0.05).unwrap();
    let coarse = blp_for(&rtn, 0.5, 1001);
    let fine = blp_for(&rtn, 0.5, 2001);
    assert!(((coarse - fine) / fine).abs() < 0.02, "coarse {coarse}, fine {fine}");
}

#[test]
fn freezing_predicate_agrees_with_evolution() {
    let noise = NoiseParams::rtn(0.8, 0.05).unwrap();
    let times = [3.0, 17.0, 41.0];
    let values = [-0.6, -0.2, 0.0, 0.3];
    for &c1 in &values {
        for &c2 in &values {
            for &c3 in &values {
                let Ok(c) = BlochDiagonal::new(c1, c2, c3) else { continue };
                for mu in [0.0, 0.5, 1.0] {
                    let moves = times.iter().any(|&t| {
                        let p = noise.p(t).unwrap();
                        !bloch_update(&c, ChannelKind::Rtn, p, mu).unwrap().approx_eq(&c)
                    });
                    let verdict = freezing_predicate(&c, ChannelKind::Rtn, mu).unwrap();
                    assert_eq!(verdict == FreezeVerdict::Frozen, !moves, "c = ({c1}, {c2}, {c3}), mu = {mu}");
                }
            }
        }
    }
}

#[test]
fn amplitude_damping_freezing_needs_full_correlation() {
    let c = BlochDiagonal::new(0.4, 0.4, -1.0).unwrap();
    assert_eq!(freezing_predicate(&c, ChannelKind::Nmad, 1.0).unwrap(), FreezeVerdict::Frozen);
    assert!(matches!(freezing_predicate(&c, ChannelKind::Nmad, 0.7).unwrap(), FreezeVerdict::Conditionally(_)));
    let psi = ProbeState::PsiPlus.density();
    let moved = correlated_nmad_channel(0.5, 0.7).unwrap().apply(&psi).unwrap();
    assert!(trace_distance(&moved, &psi).unwrap() > 1e-3);
}

#[test]
fn success_probability_is_a_probability() {
    for i in 0..20 {
        for j in 0..20 {
            let p = -1.0 + 2.0 * i as f64 / 19.0;
            let mu = j as f64 / 19.0;
            let raw = success_probability_closed(p, mu).unwrap();
            let norm = success_probability_normalized(p, mu).unwrap();
            assert!((0.0..=1.0 + 1e-12).contains(&raw), "P = {raw} at p = {p}, mu = {mu}");
            assert!((0.0..=1.0 + 1e-12).contains(&norm));
            assert!(norm >= raw - 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dephasing_channels_are_cptp(p in -1.0f64..=1.0, mu in 0.0f64..=1.0) {
        let report = cptp_report(&correlated_dephasing_channel(p, mu).unwrap()).unwrap();
        prop_assert!(report.is_cptp());
    }

    #[test]
    fn amplitude_damping_channels_are_cptp(p in 0.0f64..=1.0, mu in 0.0f64..=1.0) {
        let report = cptp_report(&correlated_nmad_channel(p, mu).unwrap()).unwrap();
        prop_assert!(report.is_cptp());
    }

    #[test]
    fn transfer_matrices_preserve_trace(p in 0.0f64..=1.0, mu in 0.0f64..=1.0) {
        let basis = pauli_basis(2).unwrap();
        let f = transfer_matrix(&correlated_nmad_channel(p, mu).unwrap(), &basis).unwrap();
        prop_assert!(f.trace_preservation_residual() < 1e-12);
    }

    #[test]
    fn concurrence_is_bounded_and_locally_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(4, &mut rng);
        let c = concurrence(&rho).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
        let (u, v) = (random_unitary(2, &mut rng), random_unitary(2, &mut rng));
        let rotated = concurrence(&apply_local_unitaries(&rho, &u, &v)).unwrap();
        prop_assert!((c - rotated).abs() < 1e-8);
    }

    #[test]
    fn trace_distance_contracts_under_channels(seed in any::<u64>(), p in -1.0f64..=1.0, mu in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_density(4, &mut rng), random_density(4, &mut rng));
        let ch = correlated_dephasing_channel(p, mu).unwrap();
        let before = trace_distance(&a, &b).unwrap();
        let after = trace_distance(&ch.apply(&a).unwrap(), &ch.apply(&b).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn csv_numbers_round_trip(x in -1e9f64..1e9) {
        let text = corrchan::cli::format_number(x);
        let back: f64 = text.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs().max(1e-300));
    }
}
