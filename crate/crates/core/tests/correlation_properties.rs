use gapcorr::correlation::{
    assemble_state, eof_from_concurrence, partition_values, reduce, CompositeState, DiscordOptions, InitialWeights,
    Partition, Side,
};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn state_params() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..std::f64::consts::TAU)
}

fn fast() -> DiscordOptions {
    DiscordOptions { grid: 16, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn global_state_is_normalised((alpha, r, phi) in state_params()) {
        let w = InitialWeights::from_alpha(alpha).unwrap();
        let s = assemble_state(&w, C::from_polar(r, phi)).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reductions_are_physical_x_states((alpha, r, phi) in state_params()) {
        let w = InitialWeights::from_alpha(alpha).unwrap();
        let s = assemble_state(&w, C::from_polar(r, phi)).unwrap();
        for p in Partition::ALL {
            let rho = reduce(&s, p);
            prop_assert!((rho.trace() - 1.0).norm() < 1e-12);
            prop_assert!(rho.hermiticity_defect() < 1e-14);
            prop_assert!(rho.x_defect() == 0.0);
            prop_assert!(rho.eigenvalues().iter().all(|&e| e > -1e-12));
        }
    }

    #[test]
    fn complementary_pairs_share_entropy((alpha, r, phi) in state_params()) {
        // the global state is pure, so S(N1N2) = S(r1r2), S(N1r1) = S(N2r2), S(N1r2) = S(N2r1)
        let w = InitialWeights::from_alpha(alpha).unwrap();
        let s = assemble_state(&w, C::from_polar(r, phi)).unwrap();
        let ent = |p| reduce(&s, p).entropy().unwrap();
        prop_assert!((ent(Partition::N1N2) - ent(Partition::R1R2)).abs() < 1e-8);
        prop_assert!((ent(Partition::N1R1) - ent(Partition::N2R2)).abs() < 1e-8);
        prop_assert!((ent(Partition::N1R2) - ent(Partition::N2R1)).abs() < 1e-8);
    }

    #[test]
    fn measures_are_ordered((alpha, r, phi) in state_params(), idx in 0usize..6) {
        let w = InitialWeights::from_alpha(alpha).unwrap();
        let v = partition_values(&w, C::from_polar(r, phi), Partition::ALL[idx], &fast()).unwrap();
        prop_assert!(v.qd >= 0.0 && v.qd <= v.mi + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v.eof));
        prop_assert!(v.mi <= 2.0 + 1e-12);
    }

    #[test]
    fn exchange_symmetry_of_the_pairs((alpha, r, phi) in state_params()) {
        // swapping (N1, r1) with (N2, r2) leaves the state invariant
        let w = InitialWeights::from_alpha(alpha).unwrap();
        let b = C::from_polar(r, phi);
        let a = partition_values(&w, b, Partition::N1R1, &fast()).unwrap();
        let c = partition_values(&w, b, Partition::N2R2, &fast()).unwrap();
        prop_assert!((a.eof - c.eof).abs() < 1e-9);
        prop_assert!((a.mi - c.mi).abs() < 1e-9);
    }

    #[test]
    fn concurrence_is_phase_independent((alpha, r, phi) in state_params()) {
        let w = InitialWeights::from_alpha(alpha).unwrap();
        let a = reduce(&assemble_state(&w, C::from_polar(r, phi)).unwrap(), Partition::N1N2);
        let b = reduce(&assemble_state(&w, C::new(r, 0.0)).unwrap(), Partition::N1N2);
        prop_assert!((a.concurrence().unwrap() - b.concurrence().unwrap()).abs() < 1e-9);
    }
}

#[test]
fn decayed_reservoirs_inherit_the_initial_pair_state() {
    let w = InitialWeights::from_alpha(0.3).unwrap();
    let start = reduce(&assemble_state(&w, C::new(1.0, 0.0)).unwrap(), Partition::N1N2);
    let end = reduce(&assemble_state(&w, C::new(0.0, 0.0)).unwrap(), Partition::R1R2);
    assert!((start.matrix - end.matrix).norm() < 1e-15);
}

#[test]
fn x_state_discord_matches_known_value() {
    // b = 1 leaves the emitters in a Bell state: one bit of discord from either side
    let w = InitialWeights::from_alpha(std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let pure = reduce(&assemble_state(&w, C::new(1.0, 0.0)).unwrap(), Partition::N1N2);
    for side in [Side::A, Side::B] {
        let d = pure.discord(&DiscordOptions { side, ..Default::default() }).unwrap();
        assert!((d.discord - 1.0).abs() < 1e-9);
    }
}

#[test]
fn eof_is_monotone_in_concurrence() {
    let mut last = -1.0;
    for i in 0..=100 {
        let e = eof_from_concurrence(i as f64 / 100.0);
        assert!(e > last);
        last = e;
    }
}

#[test]
fn basis_index_puts_n1_first() {
    assert_eq!(CompositeState::index(1, 0, 0, 0), 8);
    assert_eq!(CompositeState::index(0, 0, 0, 1), 1);
}
