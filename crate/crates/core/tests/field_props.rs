//! Field properties of exact cyclotomic arithmetic against the complex
//! embedding.

use num_complex::Complex64;
use proptest::prelude::*;

use thetanz_core::cyclotomic::{root_of_unity, CycloNumber};

fn element() -> impl Strategy<Value = CycloNumber> {
    (1u64..=120).prop_flat_map(|n| {
        prop::collection::vec(-3i64..=3, n as usize)
            .prop_map(move |d| CycloNumber::from_dense_integers(n, d).unwrap())
    })
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn difference_with_itself_is_canonical_zero(a in element()) {
        let z = &a - &a;
        prop_assert!(z.is_zero());
        prop_assert!(z.numerators().iter().all(|c| *c == 0.into()));
    }

    #[test]
    fn embedding_is_a_ring_homomorphism(a in element(), b in element()) {
        prop_assert!(close((&a * &b).embed(), a.embed() * b.embed()));
        prop_assert!(close((&a + &b).embed(), a.embed() + b.embed()));
    }

    #[test]
    fn inverse_embeds_to_reciprocal(a in element()) {
        prop_assume!(!a.is_zero());
        let inv = a.inverse().unwrap();
        prop_assert!((&a * &inv) == CycloNumber::from_integer(a.order(), 1).unwrap());
        prop_assert!(close(inv.embed(), a.embed().inv()));
    }

    #[test]
    fn roots_embed_on_the_unit_circle(n in 1u64..=120, k in -240i64..240) {
        let z = root_of_unity(n, k).unwrap().embed();
        let expected = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64);
        prop_assert!(close(z, expected));
    }
}
