use nalgebra::DMatrix;
use orthokit::approx_ortho::{
    approx_bisectrix_quad, approx_bisectrix_ratio, check_approx, min_epsilon, ApproxRelation, ApproxRelationKind,
};
use orthokit::operator_analysis::{
    corollary_theta, operator_bounds, preservation_hypothesis_from_bounds, sandwich_at_band_ends, theta,
    LinearMapSpec,
};
use orthokit::ortho_core::{directional_derivatives, is_bisectrix, is_pythagorean, DERIVATIVE_TOL};
use orthokit::search::{ortho_set_2d, sample_approx_orthogonal_pair, OrthoSet};
use orthokit::{norm, unit, Epsilon, NormSpec, RelationKind, Vector, DEFAULT_TOL};
use proptest::prelude::*;

fn menu() -> Vec<NormSpec> {
    vec![
        NormSpec::l1(),
        NormSpec::lp(1.5).unwrap(),
        NormSpec::l2(),
        NormSpec::lp(3.0).unwrap(),
        NormSpec::linf(),
    ]
}

fn space() -> impl Strategy<Value = NormSpec> {
    (0..5usize).prop_map(|i| menu()[i].clone())
}

fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, dim)
}

/// A norm from the menu with two vectors of a common dimension in 2..=5.
fn pair() -> impl Strategy<Value = (NormSpec, Vector, Vector)> {
    (space(), 2..=5usize).prop_flat_map(|(s, d)| {
        (Just(s), coords(d), coords(d))
            .prop_map(|(s, x, y)| (s, Vector::new(x).unwrap(), Vector::new(y).unwrap()))
    })
}

fn nonzero_pair() -> impl Strategy<Value = (NormSpec, Vector, Vector)> {
    pair().prop_filter("nonzero", |(_, x, y)| !x.is_zero() && !y.is_zero())
}

fn scaled(v: &Vector, a: f64) -> Vector {
    v.scale(a).unwrap()
}

proptest! {
    #[test]
    fn norm_axioms((s, x, y) in pair(), a in -5.0..5.0f64) {
        let nx = norm(&s, &x).unwrap();
        prop_assert!(nx >= 0.0);
        prop_assert_eq!(nx == 0.0, x.is_zero());
        let nax = norm(&s, &scaled(&x, a)).unwrap();
        prop_assert!((nax - a.abs() * nx).abs() <= 1e-12 * (1.0 + a.abs() * nx));
        let sum = norm(&s, &x.combine(1.0, &y, 1.0).unwrap()).unwrap();
        prop_assert!(sum <= (nx + norm(&s, &y).unwrap()) * (1.0 + 1e-12));
    }

    #[test]
    fn bisectrix_zero_and_symmetry((s, x, y) in pair()) {
        let zero = Vector::zeros(x.dim()).unwrap();
        prop_assert!(is_bisectrix(&s, &x, &zero, DEFAULT_TOL).unwrap().holds);
        prop_assert!(is_bisectrix(&s, &zero, &y, DEFAULT_TOL).unwrap().holds);
        prop_assert_eq!(
            is_bisectrix(&s, &x, &y, DEFAULT_TOL).unwrap().holds,
            is_bisectrix(&s, &y, &x, DEFAULT_TOL).unwrap().holds
        );
    }

    #[test]
    fn bisectrix_pairs_are_independent_scalable_and_pythagorean(
        s in space(),
        dim in 2..=5usize,
        seed in any::<u64>(),
        a in 0.01..100.0f64,
        b in 0.01..100.0f64,
        negate in any::<bool>(),
    ) {
        let (x, y) = sample_approx_orthogonal_pair(&s, dim, 0.0, seed).unwrap();
        prop_assert!(is_bisectrix(&s, &x, &y, DEFAULT_TOL).unwrap().holds);

        let m = DMatrix::from_fn(2, dim, |i, j| if i == 0 { x.as_slice()[j] } else { y.as_slice()[j] });
        let sv = m.singular_values();
        prop_assert!(sv.min() > 1e-9 * sv.max());

        let sign = if negate { -1.0 } else { 1.0 };
        prop_assert!(is_bisectrix(&s, &scaled(&x, sign * a), &scaled(&y, sign * b), DEFAULT_TOL).unwrap().holds);

        let (ux, uy) = (unit(&s, &x).unwrap(), unit(&s, &y).unwrap());
        prop_assert!(is_pythagorean(&s, &ux, &uy, DEFAULT_TOL).unwrap().holds);
    }

    #[test]
    fn one_sided_derivatives_are_ordered((s, x, y) in pair()) {
        let d = directional_derivatives(&s, &x, &y, DERIVATIVE_TOL).unwrap();
        prop_assert!(d.rho_minus <= d.rho_plus, "{} > {}", d.rho_minus, d.rho_plus);
    }

    #[test]
    fn approximate_relations_are_symmetric((s, x, y) in nonzero_pair(), e in 0.0..1.0f64) {
        for kind in ApproxRelationKind::ALL {
            let rel = ApproxRelation { kind, eps: Epsilon::new(e).unwrap() };
            prop_assert_eq!(check_approx(&s, rel, &x, &y).unwrap(), check_approx(&s, rel, &y, &x).unwrap());
        }
    }

    #[test]
    fn ratio_bisectrix_only_sees_directions((s, x, y) in nonzero_pair(), a in 0.01..100.0f64, b in 0.01..100.0f64) {
        let k = ApproxRelationKind::BisectrixRatio;
        let e0 = min_epsilon(&s, &x, &y, k).unwrap().value;
        let e1 = min_epsilon(&s, &scaled(&x, a), &scaled(&y, b), k).unwrap().value;
        prop_assert!((e0 - e1).abs() <= 1e-12, "{} vs {}", e0, e1);
    }

    #[test]
    fn min_epsilon_is_the_acceptance_threshold((s, x, y) in nonzero_pair()) {
        for kind in ApproxRelationKind::ALL {
            let m = min_epsilon(&s, &x, &y, kind).unwrap();
            if m.saturated {
                continue;
            }
            let at = ApproxRelation { kind, eps: Epsilon::new(m.value).unwrap() };
            prop_assert!(check_approx(&s, at, &x, &y).unwrap());
            if m.value > 0.0 {
                let below = ApproxRelation { kind, eps: Epsilon::new(m.value.next_down()).unwrap() };
                prop_assert!(!check_approx(&s, below, &x, &y).unwrap());
            }
        }
    }

    #[test]
    fn quad_implies_ratio_at_equal_eps((s, x, y) in nonzero_pair()) {
        let m = min_epsilon(&s, &x, &y, ApproxRelationKind::BisectrixQuad).unwrap();
        prop_assume!(!m.saturated);
        prop_assert!(approx_bisectrix_ratio(&s, &x, &y, m.value).unwrap());
    }

    #[test]
    fn ratio_converts_to_quad_at_sixteen_eps(s in space(), dim in 2..=5usize, e in 1e-6..0.0625f64, seed in any::<u64>()) {
        let (x, y) = sample_approx_orthogonal_pair(&s, dim, e, seed).unwrap();
        prop_assert!(approx_bisectrix_ratio(&s, &x, &y, e).unwrap());
        prop_assert!(approx_bisectrix_quad(&s, &x, &y, 16.0 * e).unwrap());
    }

    #[test]
    fn min_modulus_never_exceeds_op_norm(
        which in 0..3usize,
        entries in prop::collection::vec(-3.0..3.0f64, 9),
        probe in coords(3),
    ) {
        let s = [NormSpec::l1(), NormSpec::l2(), NormSpec::linf()][which].clone();
        let rows: Vec<Vec<f64>> = entries.chunks(3).map(<[f64]>::to_vec).collect();
        let t = LinearMapSpec::new(rows, s.clone(), s.clone()).unwrap();
        prop_assume!(!t.is_zero());
        let b = operator_bounds(&t, 500, 1).unwrap();
        prop_assert!(b.min_modulus.value <= b.op_norm.value * (1.0 + 1e-12));
        let p = Vector::new(probe).unwrap();
        let ratio = norm(&s, &t.apply(&p).unwrap()).unwrap();
        let np = norm(&s, &p).unwrap();
        prop_assert!(ratio <= b.op_norm.value * np * (1.0 + 1e-12) + 1e-12);
        prop_assert!(ratio >= b.min_modulus.value * np * (1.0 - 1e-12) - 1e-12);
    }

    #[test]
    fn band_end_sandwich_matches_reduced_hypothesis(
        d0 in 0.1..10.0f64,
        d1 in 0.1..10.0f64,
        delta in 0.0..0.9f64,
        eps in 0.0..0.9f64,
    ) {
        let t = LinearMapSpec::new(vec![vec![d0, 0.0], vec![0.0, d1]], NormSpec::l2(), NormSpec::l2()).unwrap();
        let b = operator_bounds(&t, 500, 1).unwrap();
        let h = preservation_hypothesis_from_bounds(&b, delta, eps).unwrap();
        prop_assume!(h.margin.abs() > 1e-9 * b.op_norm.value);
        prop_assert_eq!(sandwich_at_band_ends(&b, delta, eps).unwrap(), h.holds);
    }

    #[test]
    fn theta_solves_its_identity(delta in 0.0..0.9f64, eps in 0.0..0.5f64, phi1 in 0.0..0.5f64, phi2 in 0.0..0.5f64) {
        let th = theta(delta, eps, phi1, phi2).unwrap();
        prop_assume!(!th.vacuous);
        let k = (1.0 - phi1) - eps * (1.0 + phi2);
        let lhs = (1.0 + th.value) / (1.0 - th.value) * k * (1.0 - delta);
        let rhs = (1.0 + eps) * (1.0 + phi2) * (1.0 + delta);
        // Rounding in θ is amplified by 1/(1−θ) on the left-hand side.
        prop_assert!((lhs - rhs).abs() / rhs * (1.0 - th.value) <= 1e-15);
        prop_assert!(th.identity_residual <= 1e-15);
        let c = corollary_theta(delta, phi1, phi2).unwrap();
        prop_assert_eq!(c.value.to_bits(), theta(delta, 0.0, phi1, phi2).unwrap().value.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bisectrix_rays_are_cones(s in space(), angle in -std::f64::consts::PI..std::f64::consts::PI, scale in 0.01..100.0f64) {
        let x = Vector::new(vec![angle.cos(), angle.sin()]).unwrap();
        let OrthoSet::Rays(set) = ortho_set_2d(&s, &x, RelationKind::Bisectrix, 3600, DEFAULT_TOL).unwrap() else {
            panic!("bisectrix set should be conic");
        };
        prop_assert!(!set.rays.is_empty() || !set.arcs.is_empty());
        for ray in &set.rays {
            prop_assert!(is_bisectrix(&s, &x, &scaled(&ray.direction, scale), DEFAULT_TOL).unwrap().holds);
        }
    }
}
