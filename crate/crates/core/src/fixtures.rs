//! Small named bundles used by the checks, the CLI and the acceptance suite.

use crate::algebra::{AssumptionSet, Ctx, GeneratorContext, Substitution, SuperElement};
use crate::bundle::{BundleCocycle, SuperManifoldAtlas};
use crate::error::Result;
use crate::nu::NuInvolution;
use crate::supermatrix::{invert, SuperMatrix};
use std::collections::BTreeMap;

fn gen(ctx: &Ctx, name: &str) -> SuperElement {
    SuperElement::gen(ctx, name).expect("fixture generator")
}

fn inv(a: &SuperElement) -> Result<SuperElement> {
    a.invert(&mut AssumptionSet::new())
}

/// `ℙ¹` with coordinate `x` on U1 and `y = 1/x` on U2.
pub fn projective_line() -> Result<SuperManifoldAtlas> {
    let cx = GeneratorContext::new(vec!["x".into()], vec![])?;
    let cy = GeneratorContext::new(vec!["y".into()], vec![])?;
    let mut at = SuperManifoldAtlas::new(vec!["U1".into(), "U2".into()], vec![cx.clone(), cy.clone()])?;
    at.add_overlap(0, 1, Substitution::new(&cy, &cx, vec![inv(&gen(&cx, "x"))?], vec![])?, AssumptionSet::new())?;
    at.add_overlap(1, 0, Substitution::new(&cx, &cy, vec![inv(&gen(&cy, "y"))?], vec![])?, AssumptionSet::new())?;
    Ok(at)
}

/// `ℙ^{1|1}` with coordinates `(x, e)` and `(y, f) = (1/x, e/x)`.
pub fn projective_superline() -> Result<SuperManifoldAtlas> {
    let c1 = GeneratorContext::new(vec!["x".into()], vec!["e".into()])?;
    let c2 = GeneratorContext::new(vec!["y".into()], vec!["f".into()])?;
    let mut at = SuperManifoldAtlas::new(vec!["U1".into(), "U2".into()], vec![c1.clone(), c2.clone()])?;
    let ix = inv(&gen(&c1, "x"))?;
    let iy = inv(&gen(&c2, "y"))?;
    let to1 = Substitution::new(&c2, &c1, vec![ix.clone()], vec![gen(&c1, "e").mul(&ix)?])?;
    let to2 = Substitution::new(&c1, &c2, vec![iy.clone()], vec![gen(&c2, "f").mul(&iy)?])?;
    at.add_overlap(0, 1, to1, AssumptionSet::new())?;
    at.add_overlap(1, 0, to2, AssumptionSet::new())?;
    Ok(at)
}

/// Two-chart bundle from `g₁₂`; `g₂₁ := φ*₂₁(g₁₂)⁻¹`.
pub fn two_chart_bundle(atlas: SuperManifoldAtlas, g12: SuperMatrix) -> Result<BundleCocycle> {
    let (k, l) = (g12.k, g12.l);
    let mut assume = AssumptionSet::new();
    let ov = atlas.overlap(1, 0).expect("two-chart atlas").clone();
    let pulled = g12.substitute(&ov.subst, &mut assume)?;
    let g21 = invert(&pulled, &atlas.nus[1], &mut assume)?;
    let mut g = BTreeMap::new();
    g.insert((0, 0), SuperMatrix::identity(&atlas.charts[0], k, l));
    g.insert((1, 1), SuperMatrix::identity(&atlas.charts[1], k, l));
    g.insert((0, 1), g12);
    g.insert((1, 0), g21);
    BundleCocycle::new(atlas, k, l, g)
}

/// Rank 1|0 on `ℙ¹` with `g₁₂ = x` (so `g₂₁ = y`, i.e. `1/x` seen from U1).
pub fn line_bundle() -> Result<BundleCocycle> {
    let at = projective_line()?;
    let c = at.charts[0].clone();
    let g12 = SuperMatrix::from_ring(&c, 1, 0, 1, 0, vec![vec![gen(&c, "x")]])?;
    two_chart_bundle(at, g12)
}

/// Rank 1|1 on `ℙ^{1|1}` with `g₁₂ = [[x, e], [e, 1]]`.
pub fn superline_bundle() -> Result<BundleCocycle> {
    let at = projective_superline()?;
    let c = at.charts[0].clone();
    let g12 = SuperMatrix::from_ring(
        &c,
        1,
        1,
        1,
        1,
        vec![vec![gen(&c, "x"), gen(&c, "e")], vec![gen(&c, "e"), SuperElement::one(&c)]],
    )?;
    two_chart_bundle(at, g12)
}

/// `ℝ^{1|1}` covered `t` times by the same chart.
pub fn repeated_chart(t: usize) -> Result<SuperManifoldAtlas> {
    let c = GeneratorContext::new(vec!["x".into()], vec!["e".into()])?;
    let mut at = SuperManifoldAtlas::new((1..=t).map(|a| format!("U{a}")).collect(), vec![c.clone(); t])?;
    at.nus = vec![NuInvolution::toggle_first(&c); t];
    for a in 0..t {
        for b in 0..t {
            if a != b {
                at.add_overlap(a, b, Substitution::identity(&c), AssumptionSet::new())?;
            }
        }
    }
    Ok(at)
}

/// Trivial rank `k|l` bundle over [`repeated_chart`].
pub fn trivial_bundle(t: usize, k: usize, l: usize) -> Result<BundleCocycle> {
    Ok(BundleCocycle::trivial(repeated_chart(t)?, k, l))
}
