use fiolab::packets::random_shell_field;
use fiolab::propagate::{half_wave, spherical_mean};
use fiolab::symbols::{AmplitudeSpec, PhaseSpec};
use fiolab::GridSpec;
use proptest::prelude::*;

fn phase() -> PhaseSpec {
    PhaseSpec::diagonal(&[1.0, 1.3]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn half_wave_is_a_unitary_group(t in -2.0f64..2.0, s in -2.0f64..2.0, seed in 0u64..1000) {
        let grid = GridSpec::new(2, 32, 8.0).unwrap();
        let f = random_shell_field(&grid, 1, seed).unwrap();
        let one = AmplitudeSpec::one();
        let ft = half_wave(&f, &phase(), &one, t).unwrap();
        let fts = half_wave(&ft, &phase(), &one, s).unwrap();
        let direct = half_wave(&f, &phase(), &one, t + s).unwrap();
        let diff = fts.add_scaled((-1.0).into(), &direct).unwrap();
        prop_assert!(diff.lp_norm(2.0).unwrap() < 1e-10);
        prop_assert!((ft.lp_norm(2.0).unwrap() - f.lp_norm(2.0).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn small_spheres_average_to_the_center_value() {
    let grid = GridSpec::new(2, 64, 8.0).unwrap();
    let f = random_shell_field(&grid, 0, 5).unwrap();
    let m = spherical_mean(&f, 1e-4, true).unwrap();
    let diff = m.add_scaled((-1.0).into(), &f).unwrap();
    assert!(diff.sup_norm() < 1e-6 * f.sup_norm());
}
