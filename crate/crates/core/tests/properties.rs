use num_complex::Complex64;
use proptest::prelude::*;

use resonance_rigidity::geometry::{ellipsoid_invariants, sphere_invariants};
use resonance_rigidity::radial::ball_resonances;
use resonance_rigidity::rigidity::{alexandrov_fenchel_defect, identify, EXACT_TOLERANCE};
use resonance_rigidity::scattering::DirectDeterminant;
use resonance_rigidity::BoundaryCondition;

fn odd_dimension() -> impl Strategy<Value = u32> {
    prop_oneof![Just(3u32), Just(5), Just(7), Just(9)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn equal_balls_are_recognised(d in odd_dimension(), m in 1u32..12, rho in 0.05f64..20.0) {
        let r = identify(&sphere_invariants(d, rho, m).unwrap(), EXACT_TOLERANCE).unwrap();
        prop_assert!(r.is_union_of_equal_balls);
        prop_assert_eq!(r.m, Some(m));
        prop_assert!((r.rho.unwrap() - rho).abs() <= 1e-12 * rho);
    }

    #[test]
    fn ellipsoid_inequalities(a in 0.3f64..3.0, b in 0.3f64..3.0, c in 0.3f64..3.0) {
        let inv = ellipsoid_invariants(a, b, c).unwrap().invariants;
        prop_assert!(inv.cauchy_schwarz_defect() >= -1e-9);
        prop_assert!(alexandrov_fenchel_defect(&inv) >= -1e-9);
    }

    #[test]
    fn resonances_scale_inversely(rho in 0.1f64..10.0, d in prop_oneof![Just(3u32), Just(5)]) {
        let unit = ball_resonances(d, 1.0, 5, BoundaryCondition::Neumann).unwrap();
        let scaled = ball_resonances(d, rho, 5, BoundaryCondition::Neumann).unwrap();
        prop_assert_eq!(unit.len(), scaled.len());
        for (u, s) in unit.iter().zip(scaled.iter()) {
            prop_assert!((u.value / rho - s.value).norm() <= 1e-13 * s.value.norm());
            prop_assert_eq!(u.multiplicity, s.multiplicity);
            prop_assert!(s.value.im < 0.0);
        }
        prop_assert!(scaled.mirror_defect() <= 1e-12 * scaled.min_modulus().unwrap());
    }

    #[test]
    fn determinant_is_unitary_on_the_real_axis(x in 0.01f64..4.0, rho in 0.5f64..2.0) {
        let det = DirectDeterminant::new(3, rho, 60, BoundaryCondition::Neumann).unwrap();
        let s = det.evaluate(Complex64::new(x, 0.0)).unwrap().value;
        let t = det.evaluate(Complex64::new(-x, 0.0)).unwrap().value;
        prop_assert!((s.norm() - 1.0).abs() < 1e-9);
        prop_assert!((s * t - 1.0).norm() < 1e-9);
    }
}
