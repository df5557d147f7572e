use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use knotfield::field::FlatConnection;
use knotfield::geometry::{basis_vectors, cartesian_to_toroidal, metric_factors, toroidal_to_cartesian, CartesianPoint, ToroidalPoint};
use knotfield::harmonics::{green_expansion, legendre_q_half, TruncationPolicy};
use knotfield::knot_source::{mean_of_product, Wave};
use knotfield::verify::{gauss_linking, holonomy, Evaluator, LoopPath};
use knotfield::{FlatConnection64, KnotSpec64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn trefoil() -> &'static FlatConnection64 {
    static CELL: OnceLock<FlatConnection64> = OnceLock::new();
    CELL.get_or_init(|| FlatConnection::new(KnotSpec64::new(2, 3, 2.0, 0.5, 1.0).unwrap(), TruncationPolicy::default()).unwrap())
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[test]
fn chart_round_trip_on_ten_thousand_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let a = rng.random_range(0.2..5.0);
        let tp = ToroidalPoint::new(rng.random_range(0.01..8.0), rng.random_range(-PI..PI), rng.random_range(0.0..TAU)).unwrap();
        let back = cartesian_to_toroidal(&toroidal_to_cartesian(&tp, a).unwrap(), a).unwrap();
        assert!((back.eta() - tp.eta()).abs() <= 1e-12 * tp.eta().max(1.0), "{tp:?} -> {back:?}");
        assert!(angle_gap(back.theta(), tp.theta()) <= 1e-12 * (1.0 + tp.eta()));
        assert!(angle_gap(back.phi(), tp.phi()) <= 1e-12);
    }
}

#[test]
fn chart_reference_values() {
    let x = toroidal_to_cartesian(&ToroidalPoint::<f64>::new(1.0, 0.0, 0.0).unwrap(), 1.0).unwrap();
    assert!((x.x - 2.163_953_413_738_653).abs() < 1e-12 && x.y == 0.0 && x.z.abs() < 1e-15);
    let eta0 = 2f64.acosh();
    let x = toroidal_to_cartesian(&ToroidalPoint::new(eta0, PI, 0.0).unwrap(), 1.0).unwrap();
    assert!((x.x - (0.5 * eta0).tanh()).abs() < 1e-15);
    let h = metric_factors(&ToroidalPoint::new(1.0, PI / 2.0, 0.0).unwrap(), 1.0);
    assert!((h.h1 - 1.0 / 1f64.cosh()).abs() < 1e-15);
    assert!((h.h3 - 1f64.tanh()).abs() < 1e-15);
    let e = basis_vectors(&ToroidalPoint::<f64>::new(1.0, 0.0, 0.0).unwrap()).unwrap();
    assert!((e[2][1] - 1.0).abs() < 1e-15 && e[2][0].abs() < 1e-15);
}

#[test]
fn knot_torus_has_the_requested_radii() {
    for (r, d) in [(2.0, 0.5), (3.0, 1.0), (1.2, 1.1)] {
        let spec = KnotSpec64::new(2, 3, r, d, 1.0).unwrap();
        let a = spec.focal_radius();
        let rho = |theta: f64| {
            let x = toroidal_to_cartesian(&ToroidalPoint::new(spec.eta0(), theta, 0.0).unwrap(), a).unwrap();
            x.x.hypot(x.y)
        };
        let (outer, inner) = (rho(0.0), rho(PI));
        assert!((0.5 * (outer + inner) - r).abs() < 1e-12 * r);
        assert!((0.5 * (outer - inner) - d).abs() < 1e-12 * r);
    }
}

#[test]
fn trefoil_tangent_ratio_reference() {
    let spec = KnotSpec64::new(2, 3, 2.0, 1.0, 1.0).unwrap();
    for s in [0.0, 0.7, 2.9] {
        let e = basis_vectors(&spec.point(s)).unwrap();
        let t = spec.tangent(s);
        let ratio = dot(&t, &e[1]) / dot(&t, &e[2]);
        assert!((ratio + 0.866_025_403_784_438_6).abs() < 1e-12, "{ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn basis_is_right_handed_and_orthonormal(eta in 0.01f64..8.0, theta in -PI..PI, phi in 0.0f64..TAU) {
        let tp = ToroidalPoint::new(eta, theta, phi).unwrap();
        let e = basis_vectors(&tp).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(&e[i], &e[j]) - want).abs() < 1e-14);
            }
        }
        prop_assert!((dot(&cross(&e[0], &e[1]), &e[2]) - 1.0).abs() < 1e-14);
        let h = metric_factors(&tp, 1.7);
        prop_assert!(h.h1 > 0.0 && h.h1 == h.h2);
        prop_assert!((h.h3 / h.h1 - eta.sinh()).abs() <= 1e-13 * eta.sinh());
    }

    #[test]
    fn eta_surfaces_are_tori(eta in 0.05f64..6.0, a in 0.3f64..3.0) {
        let rho = |theta: f64| toroidal_to_cartesian(&ToroidalPoint::new(eta, theta, 0.0).unwrap(), a).unwrap().x;
        prop_assert!((rho(0.0) - a * eta.sinh() / (eta.cosh() - 1.0)).abs() <= 1e-12 * rho(0.0));
        prop_assert!((rho(PI) - a * eta.sinh() / (eta.cosh() + 1.0)).abs() <= 1e-12 * rho(0.0));
        for k in 1..8 {
            let r = rho(PI * k as f64 / 8.0);
            prop_assert!(r < rho(0.0) && r > rho(PI));
        }
    }

    #[test]
    fn knot_stays_on_its_torus(p in 1i64..6, q in 1i64..6, s in 0.0f64..TAU, sign in prop::bool::ANY) {
        prop_assume!(num_gcd(p, q) == 1);
        let q = if sign { q } else { -q };
        let spec = KnotSpec64::new(p, q, 2.0, 0.6, 1.0).unwrap();
        let tp = cartesian_to_toroidal(&spec.position(s), spec.focal_radius()).unwrap();
        prop_assert!((tp.eta() - spec.eta0()).abs() < 1e-12);
        prop_assert!(spec.position(s + TAU).distance(&spec.position(s)) < 1e-12);
        let t = spec.tangent(s);
        prop_assert!((dot(&t, &t) - 1.0).abs() < 1e-14);
        let e = basis_vectors(&spec.point(s)).unwrap();
        let ratio = dot(&t, &e[1]) / dot(&t, &e[2]);
        prop_assert!((ratio - spec.lambda0()).abs() < 1e-12 * (1.0 + ratio.abs()));
        let j = spec.reduced_current(s);
        prop_assert!((j.j_theta / j.j_phi - spec.lambda0()).abs() < 1e-12 * (1.0 + ratio.abs()));
    }

    #[test]
    fn exact_means_match_sampled_means(k in prop::collection::vec((0i64..7, prop::bool::ANY), 1..5)) {
        let waves: Vec<Wave> = k.iter().map(|&(f, c)| if c { Wave::Cos(f) } else { Wave::Sin(f) }).collect();
        // a rectangle rule with more nodes than the top frequency is exact
        let nodes = 64;
        let sampled: f64 = (0..nodes)
            .map(|j| {
                let s = TAU * j as f64 / nodes as f64;
                waves.iter().map(|w| match *w { Wave::Cos(f) => (f as f64 * s).cos(), Wave::Sin(f) => (f as f64 * s).sin() }).product::<f64>()
            })
            .sum::<f64>() / nodes as f64;
        prop_assert!((mean_of_product(&waves) - sampled).abs() < 1e-13);
    }

    #[test]
    fn green_expansion_is_symmetric(e1 in 0.2f64..0.6, e2 in 1.0f64..1.5, t1 in -PI..PI, t2 in -PI..PI, f1 in 0.0f64..TAU, f2 in 0.0f64..TAU) {
        let policy = TruncationPolicy { n_max: 120, m_max: 120, tail_tol: 1e-9, hard_cap: 120, eta_band: 0.3 };
        let x = ToroidalPoint::new(e1, t1, f1).unwrap();
        let y = ToroidalPoint::new(e2, t2, f2).unwrap();
        let g1 = green_expansion(&x, &y, 1.0, &policy).unwrap();
        let g2 = green_expansion(&y, &x, 1.0, &policy).unwrap();
        let exact = 1.0 / toroidal_to_cartesian(&x, 1.0).unwrap().distance(&toroidal_to_cartesian(&y, 1.0).unwrap());
        prop_assert_eq!(g1, g2);
        prop_assert!((g1 - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn harmonic_products_decay_at_the_gap_rate(eta in 0.3f64..1.2, gap in 0.4f64..1.2, m in 0usize..4) {
        let q = |n| legendre_q_half(n, m, eta + gap).unwrap().ln_abs();
        let p = |n| knotfield::harmonics::legendre_p_half(n, m, eta).unwrap().ln_abs();
        for n in [20usize, 40] {
            let rate = (q(n + 20) + p(n + 20) - q(n) - p(n)) / 20.0;
            prop_assert!(rate < -0.5 * gap && rate > -1.5 * gap, "n {} rate {} gap {}", n, rate, gap);
        }
    }

    #[test]
    fn repeated_evaluation_is_bit_identical(eta in 0.3f64..1.7, theta in -PI..PI, phi in 0.0f64..TAU) {
        let c = trefoil();
        let tp = ToroidalPoint::new(eta, theta, phi).unwrap();
        prop_assert_eq!(c.hertz_partials(&tp).unwrap(), c.hertz_partials(&tp).unwrap());
        let sample = c.sample(&toroidal_to_cartesian(&tp, c.spec().focal_radius()).unwrap()).unwrap();
        let back = sample.to_toroidal().unwrap().to_cartesian().unwrap();
        for i in 0..3 {
            prop_assert!((back.vector[i] - sample.vector[i]).abs() <= 1e-12 * (1.0 + sample.vector[i].abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Circles about the z-axis in a horizontal plane, either threading the
    /// tube or clear of it: the holonomy is Phi times the Gauss linking number.
    #[test]
    fn holonomy_law_for_axial_circles(
        (z, radius) in prop_oneof![
            (0.06f64..0.2, 1.9f64..2.1),
            (-0.2f64..-0.06, 1.9f64..2.1),
            (-1.5f64..1.5, 0.3f64..1.0),
            (-1.5f64..1.5, 3.0f64..4.0),
        ]
    ) {
        let c = trefoil();
        let spec = c.spec();
        let phi = 4.0 * PI * spec.dipole_density();
        let lp = LoopPath::circle(CartesianPoint::new(0.0, 0.0, z), [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], radius, 64).unwrap();
        let min_gap = lp
            .samples()
            .iter()
            .map(|x| (cartesian_to_toroidal(x, spec.focal_radius()).unwrap().eta() - spec.eta0()).abs())
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_gap > 0.2);
        let series = Evaluator::Series(c);
        let value = holonomy(&lp, |x: &CartesianPoint<f64>| series.potential(x), 1e-10).unwrap();
        let lk = gauss_linking(&lp, spec).unwrap();
        prop_assert!((value - phi * lk as f64).abs() <= 1e-6 * phi, "value {} lk {}", value, lk);
        if radius > 1.5 && radius < 2.5 {
            prop_assert_eq!(lk.abs(), 3);
        }
    }
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        num_gcd(b, a % b)
    }
}
