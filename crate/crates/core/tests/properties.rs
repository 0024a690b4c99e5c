use kgflow::{
    boost_trajectory, conserved_current, emt_sample, integrate_trajectory, match_boundaries, BarrierSpec,
    PotentialKind, StationaryField, StepConfig, VelocityLaw,
};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = PotentialKind> {
    prop_oneof![Just(PotentialKind::Scalar), Just(PotentialKind::Electrostatic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigen_flow_is_timelike_everywhere(
        k in 0.05f64..2.5,
        v in 0.0f64..6.0,
        a in 0.5f64..20.0,
        kind in kind(),
        x in -30.0f64..50.0,
        t in 0.0f64..20.0,
    ) {
        let sol = match_boundaries(&BarrierSpec::from_momentum(k, 1.0, v, a, kind).unwrap()).unwrap();
        let s = emt_sample(&sol, t, x).unwrap();
        prop_assert!(s.v_e.unwrap().abs() < 1.0);
        prop_assert!(s.lambda_time > 0.0);
        prop_assert!(s.lambda_time >= s.lambda_space);
        prop_assert!(s.w_time.is_timelike());
    }

    #[test]
    fn current_is_uniform(
        k in 0.05f64..2.5,
        v in 0.0f64..6.0,
        a in 0.5f64..12.0,
        kind in kind(),
        x in -30.0f64..40.0,
    ) {
        let sol = match_boundaries(&BarrierSpec::from_momentum(k, 1.0, v, a, kind).unwrap()).unwrap();
        let flux = sol.k1 * sol.trans2;
        prop_assert!((conserved_current(&sol, x) - flux).abs() < 1e-9 * sol.density_scale() * sol.k1.max(1.0));
    }

    #[test]
    fn boosted_eigen_world_lines_stay_subluminal(
        k in 0.1f64..1.5,
        r in 0.0f64..0.9,
        alpha in -1.0f64..1.0,
        x0 in -30.0f64..20.0,
    ) {
        let omega = (k * k + 1.0f64).sqrt();
        let sol = match_boundaries(&BarrierSpec::new(1.0, omega, r * (omega - 1.0), 8.0, PotentialKind::Electrostatic).unwrap()).unwrap();
        let field = StationaryField::new(&sol, VelocityLaw::Eigen);
        let traj = integrate_trajectory(&field, x0, 0.0, 15.0, StepConfig::with_dt(0.1)).unwrap();
        prop_assert!(traj.max_chord_speed() < 1.0);
        let boosted = boost_trajectory(&traj, alpha);
        prop_assert!(!boosted.causality_violation);
        prop_assert!(boosted.trajectory.points.windows(2).all(|w| w[1].t > w[0].t));
    }
}
