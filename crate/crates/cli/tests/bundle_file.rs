use nugrass_cli::BundleFile;
use nugrass_core::bundle::{verify_bundle_cocycle, BundleCocycle};
use nugrass_core::fixtures::{line_bundle, superline_bundle, trivial_bundle};
use nugrass_core::Error;
use std::path::PathBuf;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn file_of(b: &BundleCocycle) -> BundleFile {
    BundleFile::from_bundle(b).unwrap()
}

/// Every fixture shipped in `fixtures/`, derived from the named bundles of the core.
fn expected_fixtures() -> Vec<(&'static str, BundleFile)> {
    let line = file_of(&line_bundle().unwrap());
    let mut swapped = line.clone();
    swapped.charts.reverse();
    let superline = file_of(&superline_bundle().unwrap());
    let mut corrupted = superline.clone();
    corrupted.cocycle[0].matrix[0][0] = "x + 1".into();
    let mut negated = superline.clone();
    let ov = negated.overlaps.iter_mut().find(|o| o.from == "U2").unwrap();
    let f = ov.images.get_mut("e").unwrap();
    *f = format!("-({f})");
    vec![
        ("line.json", line),
        ("line_swapped.json", swapped),
        ("superline.json", superline),
        ("trivial3.json", file_of(&trivial_bundle(3, 1, 1).unwrap())),
        ("corrupted.json", corrupted),
        ("negated_transition.json", negated),
    ]
}

#[test]
fn shipped_fixtures_match_the_named_bundles() {
    let bless = std::env::var_os("NUGRASS_BLESS").is_some();
    for (name, f) in expected_fixtures() {
        let path = fixture_path(name);
        let text = f.to_json() + "\n";
        if bless {
            std::fs::write(&path, &text).unwrap();
        }
        let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{name}: {e} (run with NUGRASS_BLESS=1)"));
        assert_eq!(on_disk, text, "{name}");
    }
}

#[test]
fn line_bundle_file_is_exact() {
    let f = BundleFile::load(&fixture_path("line.json")).unwrap();
    assert_eq!(f.overlaps[0].images["y"], "1/x");
    assert!(f.overlaps[0].assume.is_empty());
    assert_eq!(f.cocycle[0].matrix, [["x"]]);
    assert_eq!(f.cocycle[1].matrix, [["y"]]);
}

#[test]
fn files_round_trip_to_the_same_cocycle() {
    for b in [line_bundle().unwrap(), superline_bundle().unwrap(), trivial_bundle(3, 1, 1).unwrap()] {
        let back = BundleFile::from_json(&file_of(&b).to_json()).unwrap().to_bundle().unwrap();
        assert_eq!(back.atlas.labels, b.atlas.labels);
        assert_eq!(back.g.len(), b.g.len());
        for (key, g) in &b.g {
            assert!(back.g[key].equals(g), "{key:?}");
        }
        for (key, ov) in &b.atlas.overlaps {
            assert_eq!(back.atlas.overlaps[key].subst, ov.subst, "{key:?}");
            // divisions in the text are recorded on reload
            let got: Vec<_> = back.atlas.overlaps[key].assumptions.iter().collect();
            assert!(ov.assumptions.iter().all(|p| got.contains(&p)), "{key:?}");
        }
        assert!(verify_bundle_cocycle(&back).passed());
    }
}

#[test]
fn corrupted_fixtures_fail_verification() {
    for name in ["corrupted.json", "negated_transition.json"] {
        let b = BundleFile::load(&fixture_path(name)).unwrap().to_bundle().unwrap();
        let rep = verify_bundle_cocycle(&b);
        assert!(!rep.passed(), "{name}");
        assert!(!rep.witnesses.is_empty());
    }
}

fn load_text(text: &str) -> Result<BundleCocycle, Error> {
    BundleFile::from_json(text)?.to_bundle()
}

#[test]
fn schema_errors() {
    let base = file_of(&line_bundle().unwrap()).to_json();
    let v: serde_json::Value = serde_json::from_str(&base).unwrap();
    let edit = |f: &dyn Fn(&mut serde_json::Value)| {
        let mut w = v.clone();
        f(&mut w);
        load_text(&w.to_string())
    };
    assert!(matches!(edit(&|w| w["schema"] = 2.into()), Err(Error::Schema(_))));
    assert!(matches!(edit(&|w| w["extra"] = 1.into()), Err(Error::Schema(_))));
    assert!(matches!(edit(&|w| w["overlaps"][0]["from"] = "U9".into()), Err(Error::Schema(_))));
    assert!(matches!(
        edit(&|w| w["overlaps"][0]["images"] = serde_json::json!({})),
        Err(Error::Schema(_))
    ));
    assert!(matches!(
        edit(&|w| w["overlaps"][0]["images"]["z"] = "1".into()),
        Err(Error::Schema(_))
    ));
    assert!(matches!(edit(&|w| w["cocycle"][0]["matrix"] = serde_json::json!([["x", "1"]])), Err(Error::Schema(_))));
    assert!(matches!(edit(&|w| w["cocycle"][0]["matrix"][0][0] = "x +".into()), Err(Error::Syntax { .. })));
    assert!(matches!(edit(&|w| w["cocycle"][0]["matrix"][0][0] = "z".into()), Err(Error::UnknownIdentifier(_))));
    // dropping g on an overlap
    assert!(matches!(
        edit(&|w| {
            w["cocycle"].as_array_mut().unwrap().pop();
        }),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(BundleFile::load(&fixture_path("missing.json")), Err(Error::Io(_))));
}

#[test]
fn odd_entry_in_an_even_block_is_rejected() {
    let mut f = file_of(&superline_bundle().unwrap());
    f.cocycle[0].matrix[0][0] = "e".into();
    assert!(matches!(f.to_bundle(), Err(Error::ParityViolation(_))));
}

#[test]
fn formal_unit_cells() {
    // 1nu is odd, so it may sit in an odd block only
    let mut f = file_of(&trivial_bundle(2, 1, 1).unwrap());
    f.cocycle[0].matrix[0][1] = "1nu".into();
    let b = f.to_bundle().unwrap();
    assert!(b.g[&(0, 1)].get(0, 1).is_nu_unit());
    assert_eq!(BundleFile::from_bundle(&b).unwrap().cocycle[0].matrix[0][1], "1nu");
    f.cocycle[0].matrix[0][1] = "0".into();
    f.cocycle[0].matrix[0][0] = "1nu".into();
    assert!(matches!(f.to_bundle(), Err(Error::ParityViolation(_))));
}
