use nugrass_core::algebra::{AssumptionSet, Ctx, SuperElement};
use nugrass_core::bundle::BundleCocycle;
use nugrass_core::fixtures::*;
use nugrass_core::gauss::*;
use nugrass_core::grassmannian::{Atlas, GrassSpec};
use nugrass_core::nu::FormalEntry;
use nugrass_core::sample;
use nugrass_core::supermatrix::{invert, smul, MultiIndex, SuperMatrix};
use nugrass_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn gen(ctx: &Ctx, name: &str) -> SuperElement {
    SuperElement::gen(ctx, name).unwrap()
}

fn ring(e: &FormalEntry) -> &SuperElement {
    e.ring().expect("ring entry")
}

fn target_of(b: &BundleCocycle) -> Atlas {
    let t = b.atlas.len();
    Atlas::build(GrassSpec::new(b.k, b.l, t * b.k, t * b.l).unwrap()).unwrap()
}

fn pipeline(b: &BundleCocycle) -> (GaussMorphism, Vec<ClassifyingMorphism>) {
    let pou = PartitionOfUnity::new(b.atlas.len()).unwrap();
    let gm = gauss_morphism(b, &pou).unwrap();
    let target = target_of(b);
    let sigma = (0..b.atlas.len())
        .map(|c| classifying_morphism(&gauss_supermatrix(&gm, c).unwrap(), &target).unwrap())
        .collect();
    (gm, sigma)
}

fn image(cm: &ClassifyingMorphism, idx: &[usize], name: &str) -> SuperElement {
    let pos = cm
        .target
        .charts
        .iter()
        .position(|c| c.index.indices == idx)
        .unwrap();
    cm.charts[&pos].subst.image_of(name).unwrap().clone()
}

/// `g_{αβ} = h_β⁻¹·h_α` over the repeated chart.
fn coboundary(t: usize, k: usize, l: usize, seed: u64) -> BundleCocycle {
    let at = repeated_chart(t).unwrap();
    let ctx = at.charts[0].clone();
    let nu = at.nus[0].clone();
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let hs: Vec<SuperMatrix> = (0..t).map(|_| sample::invertible_matrix(&ctx, k, l, &mut r)).collect();
    let mut g = BTreeMap::new();
    for a in 0..t {
        for b in 0..t {
            let hb = invert(&hs[b], &nu, &mut AssumptionSet::new()).unwrap();
            g.insert((a, b), smul(&hb, &hs[a], &nu).unwrap());
        }
    }
    BundleCocycle::new(at, k, l, g).unwrap()
}

#[test]
fn single_chart_is_the_identity_embedding() {
    let b = trivial_bundle(1, 1, 1).unwrap();
    let (gm, sigma) = pipeline(&b);
    assert!(gm.charts[0].g.is_identity());
    assert!(gm.charts[0].relation.is_none());
    let gs = gauss_supermatrix(&gm, 0).unwrap();
    assert!(gs.matrix.is_identity());
    // Gr(1|1, 1|1) is a point: one chart, no generators
    assert_eq!(sigma[0].charts.len(), 1);
    assert_eq!(sigma[0].charts[&0].subst.even.len() + sigma[0].charts[&0].subst.odd.len(), 0);
    assert!(verify_pullback_iso(&gm, &sigma).passed());
}

#[test]
fn left_inverse_holds_modulo_the_partition_relation() {
    for t in 1..=3 {
        let gm = gauss_morphism(&trivial_bundle(t, 1, 1).unwrap(), &PartitionOfUnity::new(t).unwrap()).unwrap();
        let rep = gm.left_inverse_report();
        assert!(rep.passed(), "t = {t}");
        if t > 1 {
            // literally (Σ r²)·id, so only the relation makes it id
            let gc = &gm.charts[0];
            let hg = smul(&gc.g, &gc.h, &gc.nu).unwrap();
            assert!(!hg.is_identity());
            assert!(hg.equals_mod(&SuperMatrix::identity(&gc.ctx, 1, 1), gc.relation.as_ref()));
        }
    }
    for b in [line_bundle().unwrap(), superline_bundle().unwrap()] {
        assert!(gauss_morphism(&b, &PartitionOfUnity::new(2).unwrap()).unwrap().left_inverse_report().passed());
    }
}

#[test]
fn line_bundle_gauss_matrix() {
    let b = line_bundle().unwrap();
    let gm = gauss_morphism(&b, &PartitionOfUnity::new(2).unwrap()).unwrap();
    let gs = gauss_supermatrix(&gm, 0).unwrap();
    let c = &gs.ctx;
    let (x, r1, r2) = (gen(c, "x"), gen(c, "r1"), gen(c, "r2"));
    let ix = x.invert(&mut AssumptionSet::new()).unwrap();
    let m = |xs: &[&SuperElement]| xs.iter().skip(1).fold(xs[0].clone(), |a, b| a.mul(b).unwrap());
    // ρ_α √ρ_β a^{αβ}: g₁₁ = 1, g₂₁ = 1/x seen from U1, g₁₂ = x, g₂₂ = 1
    let want = [
        [m(&[&r1, &r1, &r1]), m(&[&r2, &r2, &r1, &ix])],
        [m(&[&r1, &r1, &r2, &x]), m(&[&r2, &r2, &r2])],
    ];
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            assert!(ring(gs.matrix.get(i, j)).equals(w, None), "({i},{j}) = {}", gs.matrix.get(i, j));
        }
    }
    assert!(gauss_consistency_report(&gm, &gs).passed());
}

#[test]
fn fourth_row_follows_the_block_ordering() {
    // rank 2|1 over two charts: row 4 is g(√ρ₂ s²₂)
    let b = coboundary(2, 2, 1, 7);
    let gm = gauss_morphism(&b, &PartitionOfUnity::new(2).unwrap()).unwrap();
    let gs = gauss_supermatrix(&gm, 0).unwrap();
    let c = &gs.ctx;
    let (r1, r2) = (gen(c, "r1"), gen(c, "r2"));
    let w = |a: &SuperElement, e: &FormalEntry| {
        let e = ring(e).recontext(c).unwrap();
        a.mul(&r2).unwrap().mul(&e).unwrap()
    };
    let rho1 = r1.mul(&r1).unwrap();
    let rho2 = r2.mul(&r2).unwrap();
    let a12 = b.get(0, 1).unwrap();
    let a22 = b.get(1, 1).unwrap();
    // columns: (1,e1) (1,e2) (2,e1) (2,e2) ; (1,f1) (2,f1)
    let want = [
        w(&rho1, a12.get(1, 0)),
        w(&rho1, a12.get(1, 1)),
        w(&rho2, a22.get(1, 0)),
        w(&rho2, a22.get(1, 1)),
        w(&rho1, a12.get(1, 2)),
        w(&rho2, a22.get(1, 2)),
    ];
    for (j, e) in want.iter().enumerate() {
        assert!(ring(gs.matrix.get(3, j)).equals(e, None), "column {}", j + 1);
    }
    gs.matrix.check_parity().unwrap();
}

#[test]
fn line_bundle_classifying_images() {
    let b = line_bundle().unwrap();
    let (gm, sigma) = pipeline(&b);
    let c = &gm.charts[0].ctx;
    let (x, r1, r2) = (gen(c, "x"), gen(c, "r1"), gen(c, "r2"));
    let mut a = AssumptionSet::new();
    // G({1}) = [r1³, r1 r2²/x] normalized by r1³
    let want = r2.mul(&r2).unwrap().mul(&x.mul(&r1).unwrap().mul(&r1).unwrap().invert(&mut a).unwrap()).unwrap();
    assert!(image(&sigma[0], &[1], "x1").equals(&want, None));
    let want2 = want.invert(&mut a).unwrap();
    assert!(image(&sigma[0], &[2], "x1").equals(&want2, None));
    assert_eq!(image(&sigma[1], &[1], "x1").to_string(), "y*r2^2/r1^2");
    assert!(verify_pullback_iso(&gm, &sigma).passed());
}

#[test]
fn trivial_bundle_classifying_images() {
    let (gm, sigma) = pipeline(&trivial_bundle(2, 1, 1).unwrap());
    let frozen = [
        ([1, 3], ["r2^2/r1^2", "r2^2/r1^2"]),
        ([1, 4], ["r2^2/r1^2", "r1^2/r2^2"]),
        ([2, 3], ["r1^2/r2^2", "r2^2/r1^2"]),
        ([2, 4], ["r1^2/r2^2", "r1^2/r2^2"]),
    ];
    for (idx, [x1, x2]) in frozen {
        assert_eq!(image(&sigma[0], &idx, "x1").to_string(), x1);
        assert_eq!(image(&sigma[0], &idx, "x2").to_string(), x2);
        assert!(image(&sigma[0], &idx, "e1").is_zero());
        assert!(image(&sigma[0], &idx, "e2").is_zero());
    }
    assert!(verify_pullback_iso(&gm, &sigma).passed());
}

#[test]
fn superline_bundle_pulls_back_gamma() {
    let (gm, sigma) = pipeline(&superline_bundle().unwrap());
    assert_eq!(image(&sigma[0], &[2, 3], "e1").to_string(), "e");
    assert_eq!(image(&sigma[0], &[2, 3], "e2").to_string(), "-e");
    assert_eq!(image(&sigma[1], &[1, 4], "e1").to_string(), "-f");
    for cm in &sigma {
        for cc in cm.charts.values() {
            assert!(cc.subst.even.iter().all(|e| e.has_parity(0)));
            assert!(cc.subst.odd.iter().all(|e| e.has_parity(1)));
        }
    }
    let rep = verify_pullback_iso(&gm, &sigma);
    assert!(rep.passed(), "{:?}", rep.witnesses);
    assert_eq!(rep.details["gamma_pairs_checked"], 24);
}

#[test]
fn trivial_bundle_up_to_three_charts() {
    for (t, k, l) in [(1, 1, 0), (2, 1, 0), (3, 1, 0), (3, 1, 1), (2, 2, 1)] {
        let (gm, sigma) = pipeline(&trivial_bundle(t, k, l).unwrap());
        let rep = verify_pullback_iso(&gm, &sigma);
        assert!(rep.passed(), "t={t} {k}|{l}: {:?}", rep.witnesses);
    }
}

#[test]
fn unbalanced_index_is_rejected() {
    let b = trivial_bundle(2, 1, 1).unwrap();
    let gm = gauss_morphism(&b, &PartitionOfUnity::new(2).unwrap()).unwrap();
    let gs = gauss_supermatrix(&gm, 0).unwrap();
    let idx = MultiIndex::new(vec![1, 2], 1, 1, 2, 2);
    let err = match idx {
        Ok(i) => classifying_substitutions(&gs, &target_of(&b), &i).unwrap_err(),
        Err(e) => e,
    };
    assert!(matches!(err, Error::BadIndexBalance(_) | Error::InvalidIndex(_)), "{err:?}");
    assert!(matches!(check_balance(1, 1, 2, &MultiIndex { indices: vec![1, 2], k: 1, l: 1, m: 2, n: 2 }), Err(Error::BadIndexBalance(_))));
}

#[test]
fn partition_size_must_match() {
    let b = line_bundle().unwrap();
    assert!(matches!(gauss_morphism(&b, &PartitionOfUnity::new(3).unwrap()), Err(Error::Precondition(_))));
    assert!(PartitionOfUnity::new(0).is_err());
}

#[test]
fn corrupted_left_inverse_is_detected() {
    let b = line_bundle().unwrap();
    let mut gm = gauss_morphism(&b, &PartitionOfUnity::new(2).unwrap()).unwrap();
    let ctx = gm.charts[0].ctx.clone();
    gm.charts[0].h.set(1, 0, FormalEntry::Ring(SuperElement::from_int(&ctx, 2)));
    let rep = gm.left_inverse_report();
    assert!(!rep.passed());
    assert_eq!(rep.witnesses[0].at, "chart U1");
}

#[test]
fn negated_image_is_detected() {
    let (gm, mut sigma) = pipeline(&line_bundle().unwrap());
    let first = *sigma[0].charts.keys().next().unwrap();
    let cc = sigma[0].charts.get_mut(&first).unwrap();
    cc.subst.even[0] = cc.subst.even[0].neg();
    let rep = verify_pullback_iso(&gm, &sigma);
    assert!(!rep.passed());
    assert!(rep.witnesses.iter().any(|w| w.at.contains("T·g vs sigma*(A^I)")));
}

#[test]
fn dependent_rows_miss_the_chart() {
    let b = trivial_bundle(2, 1, 1).unwrap();
    let gm = gauss_morphism(&b, &PartitionOfUnity::new(2).unwrap()).unwrap();
    let mut gs = gauss_supermatrix(&gm, 0).unwrap();
    let z = FormalEntry::zero(&gs.ctx);
    for j in 0..4 {
        gs.matrix.set(0, j, z.clone());
    }
    let target = target_of(&b);
    let idx = target.spec.index(vec![1, 3]).unwrap();
    assert!(matches!(classifying_substitutions(&gs, &target, &idx), Err(Error::Singular(_))));
    let cm = classifying_morphism(&gs, &target).unwrap();
    assert_eq!(cm.missed.len(), 2);
    assert_eq!(cm.charts.len(), 2);
}

#[test]
fn assembly_sums_weighted_pullbacks() {
    let (_, sigma) = pipeline(&trivial_bundle(2, 1, 0).unwrap());
    let cm = &sigma[0];
    // constant weights 1/2 on both charts, local function x1 on each
    let mut local = BTreeMap::new();
    for (i, cc) in &cm.charts {
        let c = &cm.target.charts[*i].ctx;
        let half = SuperElement::from_rational(c, nugrass_core::algebra::rational(1, 2));
        local.insert(*i, (half, gen(c, "x1")));
        assert_eq!(cc.subst.source.p(), 1);
    }
    let h = cm.assemble(&local).unwrap();
    let c = cm.charts.values().next().unwrap().subst.target.clone();
    let (r1, r2) = (gen(&c, "r1"), gen(&c, "r2"));
    let mut a = AssumptionSet::new();
    let q = r2.mul(&r2).unwrap().mul(&r1.mul(&r1).unwrap().invert(&mut a).unwrap()).unwrap();
    let want = q.add(&q.invert(&mut a).unwrap()).unwrap().scale_rational(&nugrass_core::algebra::rational(1, 2));
    assert!(h.equals(&want, None), "{h}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn coboundaries_pull_back_gamma(seed in any::<u64>(), t in 1usize..=2, kl in 0usize..2) {
        let (k, l) = [(1, 1), (1, 0)][kl];
        let (gm, sigma) = pipeline(&coboundary(t, k, l, seed));
        prop_assert!(gm.left_inverse_report().passed());
        let rep = verify_pullback_iso(&gm, &sigma);
        prop_assert!(rep.passed(), "{:?}", rep.witnesses);
    }
}
