use nugrass_core::algebra::{AssumptionSet, EvenScalar, GeneratorContext, Substitution, SuperElement};
use nugrass_core::nu::NuInvolution;
use nugrass_core::sample;
use nugrass_core::supermatrix::{invert, pseudo_unit, smul, MultiIndex, SuperMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn supercommutative(seed in any::<u64>(), pa in 0u8..2, pb in 0u8..2) {
        let ctx = GeneratorContext::standard(2, 4).unwrap();
        let mut r = rng(seed);
        let a = sample::element(&ctx, pa, 3, &mut r);
        let b = sample::element(&ctx, pb, 3, &mut r);
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        let ba = if pa == 1 && pb == 1 { ba.neg() } else { ba };
        prop_assert!(ab.equals(&ba, None));
    }

    #[test]
    fn associative_and_distributive(seed in any::<u64>()) {
        let ctx = GeneratorContext::standard(2, 4).unwrap();
        let mut r = rng(seed);
        let a = sample::element(&ctx, 0, 3, &mut r);
        let b = sample::element(&ctx, 1, 3, &mut r);
        let c = sample::element(&ctx, 1, 3, &mut r);
        let l = a.mul(&b).unwrap().mul(&c).unwrap();
        let rr = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(l.equals(&rr, None));
        let d = a.mul(&b.add(&c).unwrap()).unwrap();
        let e = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(d.equals(&e, None));
    }

    #[test]
    fn inverse_of_invertible_even(seed in any::<u64>()) {
        let ctx = GeneratorContext::standard(2, 4).unwrap();
        let mut r = rng(seed);
        let a = SuperElement::from_int(&ctx, 2).add(&sample::element(&ctx, 0, 3, &mut r)).unwrap();
        prop_assume!(!a.body().is_zero());
        let mut assume = AssumptionSet::new();
        let inv = a.invert(&mut assume).unwrap();
        prop_assert!(a.mul(&inv).unwrap().is_one());
        prop_assert!(inv.mul(&a).unwrap().is_one());
    }

    #[test]
    fn substitution_is_a_homomorphism(seed in any::<u64>()) {
        let src = GeneratorContext::standard(2, 3).unwrap();
        let tgt = GeneratorContext::standard(2, 3).unwrap();
        let mut r = rng(seed);
        let even = (0..2).map(|_| sample::element(&tgt, 0, 2, &mut r)).collect();
        let odd = (0..3).map(|_| sample::element(&tgt, 1, 2, &mut r)).collect();
        let s = Substitution::new(&src, &tgt, even, odd).unwrap();
        let a = sample::element(&src, 0, 3, &mut r);
        let b = sample::element(&src, 1, 3, &mut r);
        let mut assume = AssumptionSet::new();
        let lhs = s.apply(&a.mul(&b).unwrap(), &mut assume).unwrap();
        let rhs = s.apply(&a, &mut assume).unwrap().mul(&s.apply(&b, &mut assume).unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs, None));
        let lhs = s.apply(&a.add(&a).unwrap(), &mut assume).unwrap();
        let sa = s.apply(&a, &mut assume).unwrap();
        prop_assert!(lhs.equals(&sa.add(&sa).unwrap(), None));
    }

    #[test]
    fn nu_is_an_odd_linear_involution(seed in any::<u64>(), pa in 0u8..2) {
        let ctx = GeneratorContext::standard(2, 5).unwrap();
        let nu = NuInvolution::toggle_first(&ctx);
        let mut r = rng(seed);
        let a = sample::element(&ctx, pa, 4, &mut r);
        let na = nu.apply(&a).unwrap();
        prop_assert!(nu.apply(&na).unwrap().equals(&a, None));
        prop_assert!(a.is_zero() || na.has_parity(1 - pa));
        let f = SuperElement::scalar(&ctx, EvenScalar::new(sample::poly(2, &mut r), sample::poly(0, &mut r).add(&nugrass_core::algebra::Poly::from_int(7))));
        let lhs = nu.apply(&f.mul(&a).unwrap()).unwrap();
        prop_assert!(lhs.equals(&f.mul(&na).unwrap(), None));
    }

    #[test]
    fn matrix_inverse_both_sides(seed in any::<u64>(), k in 0usize..=2, l in 0usize..=2) {
        prop_assume!(k + l > 0);
        let ctx = GeneratorContext::standard(2, 4).unwrap();
        let nu = NuInvolution::toggle_first(&ctx);
        let mut r = rng(seed);
        let b = sample::invertible_matrix(&ctx, k, l, &mut r);
        let mut assume = AssumptionSet::new();
        let bi = invert(&b, &nu, &mut assume).unwrap();
        prop_assert!(smul(&b, &bi, &nu).unwrap().is_identity());
        prop_assert!(smul(&bi, &b, &nu).unwrap().is_identity());
    }
}

#[test]
fn pseudo_units_are_self_inverse() {
    let ctx = GeneratorContext::standard(1, 1).unwrap();
    let nu = NuInvolution::toggle_first(&ctx);
    for (k, l, m, n) in [(2, 2, 3, 3), (1, 1, 2, 2), (1, 2, 3, 3)] {
        for idx in MultiIndex::all(k, l, m, n) {
            let pu = pseudo_unit(&ctx, &idx);
            assert!(smul(&pu, &pu, &nu).unwrap().is_identity(), "{idx}");
        }
    }
}

#[test]
fn identity_is_left_unit() {
    let ctx = GeneratorContext::standard(2, 4).unwrap();
    let nu = NuInvolution::toggle_first(&ctx);
    let mut r = rng(3);
    let b = sample::invertible_matrix(&ctx, 2, 2, &mut r);
    let id = SuperMatrix::identity(&ctx, 2, 2);
    assert!(smul(&id, &b, &nu).unwrap().equals(&b));
}
