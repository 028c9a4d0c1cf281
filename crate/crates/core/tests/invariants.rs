use loewner::bounds::{big_l, k_sigma, lambert_w, p_offset, p_offset_residual, BoundProfile};
use loewner::driving::{lip_seminorm, reverse_driver};
use loewner::flow::{solve_reverse, SolverOptions};
use loewner::{Driver, DrivingFunction};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reverse_flow_invariants(
        sigma in 0.1f64..3.95,
        seed in 0u64..1000,
        t in 0.05f64..1.0,
        log_y0 in -3.0f64..-1.0,
    ) {
        let y0 = 10f64.powf(log_y0);
        let d = Driver::random_walk(sigma, 1.0, 256, seed).unwrap();
        let traj = solve_reverse(&d, t, y0, &SolverOptions::default()).unwrap();
        let beta = reverse_driver(&d, t).unwrap();
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut prev = 0.0;
        for st in &traj.states {
            prop_assert!(st.y <= (y0 * y0 + 4.0 * st.s).sqrt() * (1.0 + 1e-9));
            prop_assert!(st.y > prev);
            prev = st.y;
            let b = beta.value(st.s);
            lo = lo.min(b);
            hi = hi.max(b);
            prop_assert!(st.x.abs() <= (b - lo).max(hi - b) + 1e-12);
        }
        let l = big_l(sigma).unwrap();
        prop_assert!(traj.sup_abs_w() <= l * (1.0 + 1e-3), "sup|W| {} > L {}", traj.sup_abs_w(), l);
    }

    #[test]
    fn random_walk_seminorm_is_exact(sigma in 0.1f64..4.0, seed in 0u64..10_000, steps in 8usize..600) {
        let d = Driver::random_walk(sigma, 1.0, steps, seed).unwrap();
        let measured = lip_seminorm(&d, steps + 1).unwrap();
        prop_assert!((measured - sigma).abs() <= 0.05 * sigma);
        prop_assert_eq!(d.value(0.0), 0.0);
    }

    #[test]
    fn lambert_inverts(x in 0.0f64..1e6) {
        let w = lambert_w(x).unwrap();
        prop_assert!(w >= 0.0);
        prop_assert!((w * w.exp() - x).abs() <= 1e-14 * x.max(1.0));
    }

    #[test]
    fn p_solves_its_equation(sigma in 0.01f64..3.98) {
        let d = p_offset(sigma).unwrap();
        prop_assert!(d > 0.0);
        prop_assert!(p_offset_residual(sigma, d) <= 1e-12);
    }

    #[test]
    fn l_is_increasing_and_dominates_k(a in 0.01f64..3.99, b in 0.01f64..3.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(big_l(lo).unwrap() <= big_l(hi).unwrap());
        prop_assert!(big_l(hi).unwrap() >= k_sigma(hi).unwrap());
    }

    #[test]
    fn profile_is_consistent(sigma in 0.01f64..3.98) {
        let p = BoundProfile::new(sigma).unwrap();
        prop_assert!(p.m <= p.l && p.m >= 0.0);
        prop_assert!(p.alpha_cap > 0.0 && p.alpha_cap <= 1.0);
        prop_assert!(p.cone_lower <= p.m * (1.0 + 1e-12));
        prop_assert!(p.xi <= 1.0);
    }
}
