use nugrass_cli::expr::{parse_expression, parse_with};
use nugrass_core::algebra::{AssumptionSet, EvenScalar, GeneratorContext, Poly, SuperElement};
use nugrass_core::nu::NuInvolution;
use nugrass_core::sample;
use nugrass_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ctx() -> nugrass_core::algebra::Ctx {
    GeneratorContext::standard(3, 4).unwrap()
}

fn show(text: &str) -> String {
    parse_expression(text, &ctx()).unwrap().to_string()
}

#[test]
fn odd_factors_are_reordered_with_signs() {
    assert_eq!(show("e2*e1"), "-e1*e2");
    assert_eq!(show("e1*e1"), "0");
    assert_eq!(show("e3*e1*e2"), "e1*e2*e3");
}

#[test]
fn parenthesised_sum() {
    let got = parse_expression("(1+e1*e2)", &ctx()).unwrap();
    let c = ctx();
    let want = SuperElement::one(&c)
        .add(&SuperElement::odd_gen(&c, 0).mul(&SuperElement::odd_gen(&c, 1)).unwrap())
        .unwrap();
    assert_eq!(got, want);
    assert_eq!(got.to_string(), "1 + e1*e2");
}

#[test]
fn division_needs_an_invertible_even_divisor() {
    for bad in ["1/e1", "1/0", "x1/(e1*e2)", "1/(x1 - x1)"] {
        let r = parse_expression(bad, &ctx());
        assert!(matches!(r, Err(Error::DivisionByNonInvertible(_))), "{bad}: {r:?}");
    }
    // 1 + e1*e2 has a unit body, so it inverts
    assert_eq!(show("1/(1 + e1*e2)"), "1 - e1*e2");
}

#[test]
fn divisions_are_recorded_as_assumptions() {
    let c = ctx();
    let mut a = AssumptionSet::new();
    let e = parse_with("e1/(x1 + x2)", &c, &NuInvolution::toggle_first(&c), &mut a).unwrap();
    assert_eq!(e.to_string(), "(1/(x1 + x2))*e1");
    assert_eq!(a.display(&c), ["x1 + x2 != 0"]);
}

#[test]
fn precedence() {
    assert_eq!(show("-x1^2"), "-x1^2");
    assert_eq!(show("(-x1)^2"), "x1^2");
    assert_eq!(show("1/2*x1"), "1/2*x1");
    assert_eq!(show("2^3 - 8"), "0");
    assert_eq!(show("x1 - x2 - x3"), "x1 - x2 - x3");
    assert_eq!(show("x2/x1/x1"), "x2/x1^2");
}

#[test]
fn nu_toggles_the_first_odd_generator() {
    assert_eq!(show("nu(1)"), "e1");
    assert_eq!(show("nu(e1*e2)"), "e2");
    assert_eq!(show("nu(x1*e2)"), "x1*e1*e2");
    // ν is not multiplicative
    assert_eq!(show("nu(e2)*nu(e3)"), "0");
    assert_eq!(show("nu(e2*e3)"), "e1*e2*e3");
}

#[test]
fn syntax_errors_carry_positions() {
    let cases = [("x1 +", 4), ("x1 * * x2", 5), ("(x1", 3), ("x1 $ x2", 3), ("x1 x2", 3), ("x1^e1", 3)];
    for (text, pos) in cases {
        match parse_expression(text, &ctx()) {
            Err(Error::Syntax { pos: p, .. }) => assert_eq!(p, pos, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(matches!(parse_expression("y1 + 1", &ctx()), Err(Error::UnknownIdentifier(_))));
    assert!(matches!(parse_expression("nu", &ctx()), Err(Error::UnknownIdentifier(_))));
}

#[test]
fn custom_generator_names() {
    let c = GeneratorContext::new(vec!["r1".into(), "t".into()], vec!["f".into()]).unwrap();
    let e = parse_expression("(-r1^2*t + r1^2)*f", &c).unwrap();
    assert_eq!(e.to_string(), "(-r1^2*t + r1^2)*f");
}

fn element(seed: u64, parity: u8) -> SuperElement {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = sample::element(&c, parity, 4, &mut rng);
    // some terms get a rational coefficient
    let d = sample::poly(c.p(), &mut rng);
    if d.is_zero() {
        a
    } else {
        a.scale(&EvenScalar::new(Poly::one(), d))
    }
}

proptest! {
    #[test]
    fn printing_round_trips(seed in 0u64..5000, parity in 0u8..2) {
        let a = element(seed, parity);
        let printed = a.to_string();
        let back = parse_expression(&printed, &ctx()).unwrap();
        prop_assert_eq!(&back, &a, "{}", printed);
        prop_assert_eq!(back.to_string(), printed);
    }
}
