use proptest::collection::vec;
use proptest::prelude::*;

use crossdiff::entropy::{boltzmann_entropy, rao_entropy};
use crossdiff::grid::norm_lq;
use crossdiff::harness::registry;
use crossdiff::kernel::cell_average;
use crossdiff::metrics::{eoc_slope, lp_error, restrict, wasserstein1};
use crossdiff::mobility::face_mobility;
use crossdiff::{Field, KernelSpec, Mesh, MobilityRule, Scheme, SolverOptions, State};

fn positive(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(0.0..4.0f64, n)
}

fn pair(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    n.prop_flat_map(|n| (positive(n), positive(n)))
}

fn same_mass(mut b: Vec<f64>, a: &[f64]) -> Option<Vec<f64>> {
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if sa < 1e-3 || sb < 1e-3 {
        return None;
    }
    b.iter_mut().for_each(|x| *x *= sa / sb);
    Some(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lp_error_is_a_metric((a, b) in pair(3..=40), c in positive(40), p in prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY)]) {
        let c = &c[..a.len()];
        let ab = lp_error(&a, &b, p).unwrap();
        prop_assert!((ab - lp_error(&b, &a, p).unwrap()).abs() <= 1e-14 * (1.0 + ab));
        prop_assert_eq!(lp_error(&a, &a, p).unwrap(), 0.0);
        let via = lp_error(&a, c, p).unwrap() + lp_error(c, &b, p).unwrap();
        prop_assert!(ab <= via + 1e-12);
    }

    #[test]
    fn lebesgue_norms_increase_with_exponent(v in vec(-3.0..3.0f64, 3..60)) {
        let n1 = norm_lq(&v, 1.0).unwrap();
        let n2 = norm_lq(&v, 2.0).unwrap();
        let ninf = norm_lq(&v, f64::INFINITY).unwrap();
        prop_assert!(n1 <= n2 * (1.0 + 1e-14));
        prop_assert!(n2 <= ninf * (1.0 + 1e-14));
    }

    #[test]
    fn wasserstein_symmetric_and_translation_invariant((a, b) in pair(2..=48), shift in -50isize..50) {
        let Some(b) = same_mass(b, &a) else { return Ok(()) };
        let w = wasserstein1(&a, &b).unwrap();
        prop_assert!((w - wasserstein1(&b, &a).unwrap()).abs() <= 1e-12);
        let sa = Field(a.clone()).shifted(shift);
        let sb = Field(b.clone()).shifted(shift);
        prop_assert!((w - wasserstein1(&sa, &sb).unwrap()).abs() <= 1e-12);
        // half the L1 distance is moved, at most half the circumference
        prop_assert!(w <= 0.25 * lp_error(&a, &b, 1.0).unwrap() + 1e-12);
    }

    #[test]
    fn wasserstein_triangle_inequality((a, b) in pair(2..=32), c in positive(32)) {
        let c = &c[..a.len()];
        let (Some(b), Some(c)) = (same_mass(b, &a), same_mass(c.to_vec(), &a)) else { return Ok(()) };
        let ab = wasserstein1(&a, &b).unwrap();
        let via = wasserstein1(&a, &c).unwrap() + wasserstein1(&c, &b).unwrap();
        prop_assert!(ab <= via + 1e-12);
    }

    #[test]
    fn restriction_keeps_mass_sign_and_constants(coarse_pow in 2u32..6, ratio_pow in 1u32..4, seed in positive(512), c in -2.0..2.0f64) {
        let coarse = 1usize << coarse_pow;
        let fine = coarse << ratio_pow;
        let f = &seed[..fine];
        let r = restrict(f, coarse).unwrap();
        prop_assert!((r.integral() - Field(f.to_vec()).integral()).abs() <= 1e-13 * (1.0 + r.integral()));
        prop_assert!(r.min() >= 0.0);
        let k = restrict(&vec![c; fine], coarse).unwrap();
        prop_assert!(k.iter().all(|x| (x - c).abs() <= 1e-15));
    }

    #[test]
    fn mobilities_lie_between_neighbours(ul in 0.0..10.0f64, ur in 0.0..10.0f64, dp in -5.0..5.0f64) {
        for rule in [MobilityRule::Upwind, MobilityRule::Logmean] {
            let m = face_mobility(rule, ul, ur, dp).unwrap();
            prop_assert!(m >= ul.min(ur) * (1.0 - 1e-14) && m <= ul.max(ur) * (1.0 + 1e-14));
        }
    }

    #[test]
    fn kernel_cell_averages_carry_the_kernel_mass(n in 4usize..200, radius in 0.005..0.49f64, height in 0.1..10.0f64, width in 0.002..0.2f64) {
        let mesh = Mesh::new(n).unwrap();
        let ind = cell_average(&KernelSpec::Indicator { radius, height }, &mesh).unwrap();
        prop_assert!((ind.mass() - 2.0 * radius * height).abs() <= 1e-12 * (1.0 + height));
        let tri = cell_average(&KernelSpec::Triangle { radius, height }, &mesh).unwrap();
        prop_assert!((tri.mass() - radius * height).abs() <= 1e-12 * (1.0 + height));
        let gauss = cell_average(&KernelSpec::gaussian(width), &mesh).unwrap();
        prop_assert!((gauss.mass() - 1.0).abs() <= 1e-12);
        prop_assert!(ind.is_even() && tri.is_even() && gauss.is_even());
    }

    #[test]
    fn power_laws_have_their_exponent(c in 0.01..100.0f64, k in 0.25..3.0f64, levels in 2usize..7) {
        let h: Vec<f64> = (0..levels).map(|i| 0.5f64.powi(i as i32 + 3)).collect();
        let e: Vec<f64> = h.iter().map(|x| c * x.powf(k)).collect();
        prop_assert!((eoc_slope(&h, &e).unwrap() - k).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn implicit_step_preserves_structure(n in 6usize..20, u1 in vec(0.05..3.0f64, 20), u2 in vec(0.05..3.0f64, 20), logmean in any::<bool>(), dt_pow in 2i32..8) {
        let mut params = registry::preset("13").unwrap().model;
        if logmean {
            params.mobility = MobilityRule::Logmean;
        }
        let mesh = Mesh::new(n).unwrap();
        let scheme = Scheme::new(params, mesh).unwrap();
        let prev = State::new(vec![Field(u1[..n].to_vec()), Field(u2[..n].to_vec())]);
        let dt = 0.5f64.powi(dt_pow);
        let (next, _) = scheme.step(&prev, dt, &SolverOptions::default()).unwrap();
        for (a, b) in next.masses().iter().zip(prev.masses()) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b));
        }
        prop_assert!(next.min() >= -1e-12);
        let slack = |h: f64| 1e-8 * (1.0 + h.abs());
        let (hb0, hb1) = (boltzmann_entropy(&scheme, &prev).unwrap(), boltzmann_entropy(&scheme, &next).unwrap());
        let (hr0, hr1) = (rao_entropy(&scheme, &prev).unwrap(), rao_entropy(&scheme, &next).unwrap());
        prop_assert!(hb1 <= hb0 + slack(hb0));
        prop_assert!(hr1 <= hr0 + slack(hr0));
    }

    #[test]
    fn constant_states_are_steady(n in 4usize..24, c1 in 0.0..3.0f64, c2 in 0.0..3.0f64) {
        let scheme = Scheme::new(registry::preset("14").unwrap().model, Mesh::new(n).unwrap()).unwrap();
        let prev = State::new(vec![Field(vec![c1; n]), Field(vec![c2; n])]);
        let (next, report) = scheme.step(&prev, 0.1, &SolverOptions::default()).unwrap();
        prop_assert_eq!(report.newton_iterations, 0);
        prop_assert_eq!(next.fields, prev.fields);
    }
}
