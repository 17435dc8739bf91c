//! Property tests over randomly drawn fields, seeds, and scalings.

use hallmhd::*;
use proptest::prelude::*;
use std::sync::Arc;

fn grid2() -> Arc<Grid> {
    Grid::new(2, 16).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// inverse(forward(samples)) reproduces arbitrary real samples,
    /// Nyquist content included.
    #[test]
    fn transform_round_trip(values in proptest::collection::vec(-10.0f64..10.0, 256)) {
        let g = grid2();
        let f = ScalarField::from_samples(&g, &values).unwrap();
        let back = f.samples();
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
        }
    }

    /// curl grad = 0 and div curl = 0 for random band-limited fields.
    #[test]
    fn exact_calculus_identities(seed in 0u64..1_000_000, k in 1usize..5) {
        let g = grid2();
        let v = random_vector(&g, k, seed, FieldKind::Auxiliary).unwrap();
        prop_assert!(divergence(&curl(&v)).l2_norm() <= 1e-12);
        let f = v.component(0);
        prop_assert!(curl(&gradient(f, FieldKind::Auxiliary)).l2_norm() <= 1e-12);
    }

    /// The Leray projector is idempotent and lands on divergence-free
    /// fields.
    #[test]
    fn leray_projection_properties(seed in 0u64..1_000_000) {
        let g = grid2();
        let v = random_vector(&g, 4, seed, FieldKind::Velocity).unwrap();
        let p = leray_project(&v);
        prop_assert!(divergence(&p).l2_norm() <= 1e-12);
        let pp = leray_project(&p);
        prop_assert!(pp.sub(&p).l2_norm() <= 1e-12 * p.l2_norm().max(1e-300));
    }

    /// Quadratic products commute and treat the constant one as identity.
    #[test]
    fn product_algebra(seed in 0u64..1_000_000) {
        let g = grid2();
        let v = random_vector(&g, 4, seed, FieldKind::Auxiliary).unwrap();
        let f = v.component(0);
        let h = v.component(1);
        let fh = multiply(f, h, DEALIAS_PADDING).unwrap();
        let hf = multiply(h, f, DEALIAS_PADDING).unwrap();
        prop_assert!(fh.sub(&hf).l2_norm() <= 1e-13 * fh.l2_norm().max(1e-300));
        let one = ScalarField::constant(&g, 1.0);
        let f1 = multiply(f, &one, DEALIAS_PADDING).unwrap();
        prop_assert!(f1.sub(f).l2_norm() <= 1e-13);
    }

    /// Every split integral is cubic in b: rescaling b by lambda scales
    /// each term by lambda^3 exactly.
    #[test]
    fn hall_split_terms_are_cubic(seed in 0u64..1_000_000, lambda in 0.25f64..4.0) {
        let g = Grid::new(2, 32).unwrap();
        let b = random_solenoidal(&g, 10, seed, FieldKind::Magnetic).unwrap();
        let d1 = hallmhd::hall::decompose_hall_2d(&b, 1.0).unwrap();
        let d2 = hallmhd::hall::decompose_hall_2d(&b.scaled(lambda), 1.0).unwrap();
        let cube = lambda.powi(3);
        let scale = d1.max_term().max(1e-300) * cube;
        for i in 0..6 {
            prop_assert!((d2.i51[i] - cube * d1.i51[i]).abs() <= 1e-12 * scale);
            prop_assert!((d2.i52[i] - cube * d1.i52[i]).abs() <= 1e-12 * scale);
        }
    }

    /// Parseval consistency between the H^1 seminorm and component
    /// derivative norms.
    #[test]
    fn h1_parseval(seed in 0u64..1_000_000) {
        let g = grid2();
        let v = random_vector(&g, 4, seed, FieldKind::Auxiliary).unwrap();
        let f = v.component(2);
        let lhs = f.sobolev_seminorm(1.0).powi(2);
        let rhs = f.derivative(Axis::X1).lp_norm(2.0).unwrap().powi(2)
            + f.derivative(Axis::X2).lp_norm(2.0).unwrap().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }
}

/// Pure spectral operations are safe to call from multiple threads; the
/// per-thread transform plans keep results identical.
#[test]
fn concurrent_transforms_agree() {
    let g = Grid::new(2, 32).unwrap();
    let b = random_solenoidal(&g, 8, 9, FieldKind::Magnetic).unwrap();
    let reference = energy_flux_hall(&b).unwrap();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let b = b.clone();
            std::thread::spawn(move || energy_flux_hall(&b).unwrap())
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), reference);
    }
}
