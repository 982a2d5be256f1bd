use nugrass_core::algebra::{AssumptionSet, SuperElement};
use nugrass_core::grassmannian::*;
use nugrass_core::nu::FormalEntry;
use nugrass_core::report::Status;

fn g(ctx: &nugrass_core::algebra::Ctx, name: &str) -> SuperElement {
    SuperElement::gen(ctx, name).unwrap()
}

fn ring(e: SuperElement) -> FormalEntry {
    FormalEntry::Ring(e)
}

#[test]
fn golden_chart_1236() {
    let spec = GrassSpec::new(2, 2, 3, 3).unwrap();
    let chart = coordinate_matrix(spec, &spec.index(vec![1, 2, 3, 6]).unwrap()).unwrap();
    let c = &chart.ctx;
    let zero = || FormalEntry::zero(c);
    let one = || FormalEntry::one(c);
    // toggle ν written out: ν(x) = x·e1, ν(e1) = 1, ν(e2) = e1·e2
    let e1 = g(c, "e1");
    let nx1 = e1.mul(&g(c, "x1")).unwrap();
    let nx2 = e1.mul(&g(c, "x2")).unwrap();
    let ne1 = SuperElement::one(c);
    let ne2 = e1.mul(&g(c, "e2")).unwrap();
    let want = [
        vec![one(), zero(), zero(), ring(nx1), ring(g(c, "e3")), zero()],
        vec![zero(), one(), zero(), ring(nx2), ring(g(c, "e4")), zero()],
        vec![zero(), zero(), FormalEntry::NuUnit, ring(ne1), ring(g(c, "x3")), zero()],
        vec![zero(), zero(), zero(), ring(ne2), ring(g(c, "x4")), one()],
    ];
    for (r, row) in want.iter().enumerate() {
        for (col, w) in row.iter().enumerate() {
            assert!(chart.a.get(r, col).equals(w), "cell ({}, {}): {} vs {}", r + 1, col + 1, chart.a.get(r, col), w);
        }
    }
    let wrapped: Vec<bool> = chart.cells.iter().map(|c| c.wrapped).collect();
    // x1..x4 then e1..e4
    assert_eq!(wrapped, vec![true, true, false, false, true, true, false, false]);
}

#[test]
fn projective_line_chart() {
    let spec = GrassSpec::new(1, 0, 2, 0).unwrap();
    let chart = coordinate_matrix(spec, &spec.index(vec![1]).unwrap()).unwrap();
    assert!(chart.a.get(0, 0).is_one());
    assert!(chart.a.get(0, 1).equals(&ring(g(&chart.ctx, "x1"))));
}

#[test]
fn chart_13_of_11_22() {
    let spec = GrassSpec::new(1, 1, 2, 2).unwrap();
    let chart = coordinate_matrix(spec, &spec.index(vec![1, 3]).unwrap()).unwrap();
    let c = &chart.ctx;
    let want = [
        ["1", "x1", "0", "e2"],
        ["0", "e1", "1", "x2"],
    ];
    for (r, row) in want.iter().enumerate() {
        for (col, w) in row.iter().enumerate() {
            let w = match *w {
                "0" => FormalEntry::zero(c),
                "1" => FormalEntry::one(c),
                name => ring(g(c, name)),
            };
            assert!(chart.a.get(r, col).equals(&w));
        }
    }
    assert!(chart.cells.iter().all(|c| !c.wrapped));
}

#[test]
fn every_chart_minor_is_pseudo_unit_and_uses_each_generator_once() {
    for (k, l, m, n) in [(1, 1, 2, 2), (2, 2, 3, 3), (1, 2, 3, 3), (1, 0, 3, 0)] {
        let spec = GrassSpec::new(k, l, m, n).unwrap();
        let atlas = Atlas::build(spec).unwrap();
        for ch in &atlas.charts {
            let mi = nugrass_core::supermatrix::minor(&ch.a, &ch.index).unwrap();
            let pu = nugrass_core::supermatrix::pseudo_unit(&ch.ctx, &ch.index);
            assert!(mi.equals(&pu), "{spec} {}", ch.index);
            let mut seen = std::collections::BTreeSet::new();
            for cell in &ch.cells {
                assert!(seen.insert((cell.row, cell.col)), "{spec} {}", ch.index);
                assert!(!ch.index.contains(cell.col + 1));
            }
            assert_eq!(seen.len(), spec.p() + spec.q());
        }
    }
}

#[test]
fn transition_13_to_23_hand_expansion() {
    // A^{13} = [[1, x1, 0, e2], [0, e1, 1, x2]], A^{23} = [[x1, 1, 0, e2], [e1, 0, 1, x2]].
    // B = [[x1, 0], [e1, 1]], B⁻¹ = [[1/x1, 0], [−e1/x1, 1]], and B⁻¹A^{13} reads off
    // x1 ↦ 1/x1, e1 ↦ −e1/x1, e2 ↦ e2/x1, x2 ↦ x2 − e1e2/x1.
    let spec = GrassSpec::new(1, 1, 2, 2).unwrap();
    let atlas = Atlas::build(spec).unwrap();
    let i = atlas.position(&spec.index(vec![1, 3]).unwrap()).unwrap();
    let j = atlas.position(&spec.index(vec![2, 3]).unwrap()).unwrap();
    let t = atlas.transition(i, j).unwrap();
    let c = &atlas.ctx;
    let mut a = AssumptionSet::new();
    let inv_x1 = g(c, "x1").invert(&mut a).unwrap();
    let e1e2 = g(c, "e1").mul(&g(c, "e2")).unwrap();
    let want = [
        ("x1", inv_x1.clone()),
        ("x2", g(c, "x2").sub(&e1e2.mul(&inv_x1).unwrap()).unwrap()),
        ("e1", g(c, "e1").mul(&inv_x1).unwrap().neg()),
        ("e2", g(c, "e2").mul(&inv_x1).unwrap()),
    ];
    for (name, w) in want {
        let got = t.subst.image_of(name).unwrap();
        assert!(got.equals(&w, None), "{name}: {} vs {}", got.display(), w.display());
    }
    assert_eq!(t.assumptions.display(c), vec!["x1 != 0".to_string()]);
}

#[test]
fn self_transitions_are_identity() {
    let spec = GrassSpec::new(1, 1, 2, 2).unwrap();
    let atlas = Atlas::build(spec).unwrap();
    for i in 0..atlas.charts.len() {
        assert!(atlas.transition(i, i).unwrap().subst.is_identity());
    }
}

#[test]
fn gluing_11_22_exhaustive() {
    let atlas = Atlas::build(GrassSpec::new(1, 1, 2, 2).unwrap()).unwrap();
    let r = verify_gluing(&atlas, &GluingOptions::default());
    assert_eq!(r.status, Status::Pass, "{}", r.to_json());
    assert_eq!(r.details["identities_checked"], 6);
    assert_eq!(r.details["pairs_checked"], 12);
    assert_eq!(r.details["triples_checked"], 24);
    assert_eq!(r.details["empty_overlaps"], 15);
    assert_eq!(r.details["one_sided_overlaps"], 3);
    assert_eq!(r.details["triples_exhaustive"], true);
}

#[test]
fn corrupted_transition_is_caught() {
    let spec = GrassSpec::new(1, 1, 2, 2).unwrap();
    let atlas = Atlas::build(spec).unwrap();
    let opts = GluingOptions {
        corrupt: Some((spec.index(vec![1, 3]).unwrap(), spec.index(vec![2, 3]).unwrap(), "e1".into())),
        ..Default::default()
    };
    let r = verify_gluing(&atlas, &opts);
    assert_eq!(r.status, Status::Fail);
    assert!(r.witnesses.iter().any(|w| w.item == "e1"));
}

#[test]
fn sampled_gluing_is_reproducible() {
    let atlas = Atlas::build(GrassSpec::new(2, 2, 3, 3).unwrap()).unwrap();
    let opts = GluingOptions { sample: Some(10), seed: 7, corrupt: None };
    let a = verify_gluing(&atlas, &opts);
    assert!(a.passed(), "{}", a.to_json());
    assert_eq!(a.details["triples_checked"], 10);
    let b = verify_gluing(&atlas, &opts);
    assert_eq!(a.witnesses, b.witnesses);
    assert_eq!(a.details["pairs_checked"], b.details["pairs_checked"]);
}

#[test]
fn rejects_bad_specs() {
    assert!(GrassSpec::new(3, 0, 2, 1).is_err());
    assert!(GrassSpec::new(1, 4, 2, 3).is_err());
    assert!(GrassSpec::new(0, 0, 2, 3).is_err());
    // the one-chart point
    let point = GrassSpec::new(1, 1, 1, 1).unwrap();
    let atlas = Atlas::build(point).unwrap();
    assert_eq!(atlas.charts.len(), 1);
    assert_eq!((point.p(), point.q()), (0, 0));
}
