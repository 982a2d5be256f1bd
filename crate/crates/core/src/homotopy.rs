//! Doubling inclusions, induced chart homomorphisms, the linear homotopy
//! between Gauss morphisms and the deformation retraction of `ℙ^{m|n}`.
//!
//! Column indices are global (`1..=m+n`, odd columns after the even ones), so
//! `e_i ↦ e_{2i}, f_j ↦ f_{2j}` is simply `c ↦ 2c` and the odd-position
//! doubling is `c ↦ 2c − 1`.

use crate::algebra::{rational, AssumptionSet, Ctx, PartitionRelation, Substitution, SuperElement};
use crate::error::{Error, Result};
use crate::gauss::{classifying_morphism, frame_to_chart, gauss_supermatrix, GaussMorphism};
use crate::grassmannian::{first_difference_formal, Atlas, Chart, GrassSpec};
use crate::nu::{entry_mul, FormalEntry, NuInvolution};
use crate::report::{Report, ReportBuilder};
use crate::supermatrix::{reduced_rank, smul, MultiIndex, SuperMatrix};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inclusion {
    /// `J^e`: `c ↦ 2c` into `2m|2n`.
    EvenDouble,
    /// `J^o`: `c ↦ 2c − 1` into `2m|2n`.
    OddDouble,
    /// `J`: even columns fixed, odd columns shifted by `m′ − m`.
    Plain { m: usize, n: usize },
}

impl Inclusion {
    pub fn target_dims(self, m: usize, n: usize) -> (usize, usize) {
        match self {
            Inclusion::EvenDouble | Inclusion::OddDouble => (2 * m, 2 * n),
            Inclusion::Plain { m: m2, n: n2 } => (m2, n2),
        }
    }

    /// Image of the 1-based column `c` of `ℝ^{m|n}`.
    pub fn column(self, m: usize, n: usize, c: usize) -> Result<usize> {
        if c == 0 || c > m + n {
            return Err(Error::OutOfRange(format!("column {c} outside 1..={}", m + n)));
        }
        match self {
            Inclusion::EvenDouble => Ok(2 * c),
            Inclusion::OddDouble => Ok(2 * c - 1),
            Inclusion::Plain { m: m2, n: n2 } => {
                if m2 < m || n2 < n {
                    return Err(Error::OutOfRange(format!("{m}|{n} does not include into {m2}|{n2}")));
                }
                Ok(if c <= m { c } else { c + m2 - m })
            }
        }
    }

    pub fn target_spec(self, spec: GrassSpec) -> Result<GrassSpec> {
        let (m2, n2) = self.target_dims(spec.m, spec.n);
        GrassSpec::new(spec.k, spec.l, m2, n2)
    }
}

/// `I^e`, `I^o` or `Ī`.
pub fn index_map(kind: Inclusion, idx: &MultiIndex) -> Result<MultiIndex> {
    let (m2, n2) = kind.target_dims(idx.m, idx.n);
    let out = idx
        .indices
        .iter()
        .map(|&c| kind.column(idx.m, idx.n, c))
        .collect::<Result<Vec<_>>>()?;
    MultiIndex::new(out, idx.k, idx.l, m2, n2)
}

/// Basis map of `O ⊗ ℝ^{m|n} → O ⊗ ℝ^{m′|n′}`: entry `c−1` is the image of basis vector `c`.
pub fn inclusion_on_trivial(kind: Inclusion, m: usize, n: usize) -> Result<Vec<usize>> {
    (1..=m + n).map(|c| kind.column(m, n, c)).collect()
}

/// `J(a)` for a matrix with `m|n` columns: column `c` moves to `J(c)`, new columns are zero.
pub fn embed_columns(kind: Inclusion, a: &SuperMatrix) -> Result<SuperMatrix> {
    let (m2, n2) = kind.target_dims(a.m, a.n);
    let mut out = SuperMatrix::zeros(&a.ctx, a.k, a.l, m2, n2);
    for c in 1..=a.m + a.n {
        let c2 = kind.column(a.m, a.n, c)?;
        for r in 0..a.rows() {
            out.set(r, c2 - 1, a.get(r, c - 1).clone());
        }
    }
    Ok(out)
}

/// Row analogue of [`embed_columns`] (for left inverses).
pub fn embed_rows(kind: Inclusion, a: &SuperMatrix) -> Result<SuperMatrix> {
    let (k2, l2) = kind.target_dims(a.k, a.l);
    let mut out = SuperMatrix::zeros(&a.ctx, k2, l2, a.m, a.n);
    for r in 1..=a.k + a.l {
        let r2 = kind.column(a.k, a.l, r)?;
        for c in 0..a.cols() {
            out.set(r2 - 1, c, a.get(r - 1, c).clone());
        }
    }
    Ok(out)
}

/// `(J̄)*` on chart `J(I)` of the target: the generator in cell `(r, c′)` of
/// `A′^{J(I)}` goes to the entry of `J(A^I)` in the same cell, so that
/// `φ*(A′^{J(I)}) = J(A^I)`.
pub fn induced_chart_hom(kind: Inclusion, source: &Chart, target: &Chart) -> Result<Substitution> {
    let want = index_map(kind, &source.index)?;
    if want != target.index {
        return Err(Error::InvalidIndex(format!(
            "{} maps to {want}, not to {}",
            source.index, target.index
        )));
    }
    let ja = embed_columns(kind, &source.a)?;
    let mut assume = AssumptionSet::new();
    let (subst, _, l) = frame_to_chart(&ja, &source.nu, target, &mut assume)?;
    // A^I is already normalized at I, so no division may have happened
    debug_assert!(first_difference_formal(&l, &ja, &source.nu).ok().flatten().is_none());
    Ok(subst)
}

/// `φ*(A′^{J(I)}) = J(A^I)` on every chart and `(J̄)*` commutes with the
/// transitions of both Grassmannians on every nonempty overlap.
pub fn verify_induced_homs(kind: Inclusion, spec: GrassSpec) -> Result<Report> {
    let src = Atlas::build(spec)?;
    let tgt = Atlas::build(kind.target_spec(spec)?)?;
    let mut rep = ReportBuilder::new("homotopy.induced_chart_homs");
    // ν-charts are tallied apart: the toggle ν does not commute with substitutions
    let mut nu_mismatch = 0usize;
    let homs: Vec<Option<(usize, Substitution)>> = src
        .charts
        .iter()
        .map(|c| {
            let j = tgt.position(&index_map(kind, &c.index).ok()?)?;
            induced_chart_hom(kind, c, &tgt.charts[j]).ok().map(|s| (j, s))
        })
        .collect();
    let balanced = |i: usize| src.charts[i].index.is_balanced();
    let mut charts = 0usize;
    for (i, h) in homs.iter().enumerate() {
        let at = format!("I={}", src.charts[i].index);
        let Some((j, s)) = h else {
            rep.fail(at, "induced hom", "defined", "undefined");
            continue;
        };
        let mut assume = AssumptionSet::new();
        let diff = tgt.charts[*j].a.substitute(s, &mut assume).and_then(|pa| {
            let ja = embed_columns(kind, &src.charts[i].a)?;
            first_difference_formal(&pa, &ja, &src.nu)
        });
        if !balanced(i) {
            nu_mismatch += usize::from(!matches!(diff, Ok(None)));
            continue;
        }
        charts += 1;
        match diff {
            Ok(None) => {}
            Ok(Some((r, c))) => rep.fail(at, format!("({}, {})", r + 1, c + 1), "J(A^I)", "different"),
            Err(e) => rep.fail(at, "phi*(A')", "defined", e.to_string()),
        }
    }
    let mut pairs = 0usize;
    for i in 0..src.charts.len() {
        for k in 0..src.charts.len() {
            if i == k {
                continue;
            }
            let (Some((ti, hi)), Some((tk, hk))) = (&homs[i], &homs[k]) else {
                continue;
            };
            let Ok(t_src) = src.transition(i, k) else {
                continue;
            };
            let at = format!("I={} K={}", src.charts[i].index, src.charts[k].index);
            let mut assume = AssumptionSet::new();
            // chart J(K) of the target, read on chart I of the source, two ways
            let lhs = tgt.transition(*ti, *tk).and_then(|t| t.subst.then(hi, &mut assume));
            let rhs = hk.then(&t_src.subst, &mut assume);
            let bad: Vec<(String, String, String)> = match (lhs, rhs) {
                (Ok(a), Ok(b)) => a
                    .diff(&b, None)
                    .into_iter()
                    .map(|(g, got, want)| (g, want.to_string(), got.to_string()))
                    .collect(),
                (Err(e), _) | (_, Err(e)) => vec![("composition".into(), "defined".into(), e.to_string())],
            };
            if !(balanced(i) && balanced(k)) {
                nu_mismatch += usize::from(!bad.is_empty());
                continue;
            }
            pairs += 1;
            for (g, want, got) in bad {
                rep.fail(at.clone(), g, want, got);
            }
            rep.assume(assume.display(&src.ctx));
        }
    }
    rep.detail("kind", format!("{kind:?}"));
    rep.detail("source", spec.to_string());
    rep.detail("target", tgt.spec.to_string());
    rep.detail("charts_checked", charts);
    rep.detail("pairs_checked", pairs);
    rep.detail("nu_chart_mismatches", nu_mismatch);
    Ok(rep.finish())
}

pub const PARAM: &str = "t";

/// `F_t` on one base chart, over the chart context extended by the parameter.
#[derive(Clone, Debug)]
pub struct HomotopyChart {
    pub chart: usize,
    pub ctx: Ctx,
    pub nu: NuInvolution,
    pub relation: Option<PartitionRelation>,
    /// `J^e gA` and `J^o gB`.
    pub f0: SuperMatrix,
    pub f1: SuperMatrix,
    /// `(1−t)·J^e gA + t·J^o gB`.
    pub f: SuperMatrix,
    /// `J^e hA + J^o hB`, a left inverse of every `F_t`.
    pub h: SuperMatrix,
}

#[derive(Clone, Debug)]
pub struct HomotopyFamily {
    pub param: String,
    pub k: usize,
    pub l: usize,
    /// Column dimensions of the Gauss morphisms (`tk|tl`).
    pub m: usize,
    pub n: usize,
    pub charts: Vec<HomotopyChart>,
}

fn lift(m: &SuperMatrix, ctx: &Ctx) -> Result<SuperMatrix> {
    m.map_ring(ctx, |e| e.recontext(ctx))
}

fn scale(m: &SuperMatrix, s: &SuperElement, nu: &NuInvolution) -> Result<SuperMatrix> {
    let mut out = m.clone();
    let f = FormalEntry::Ring(s.clone());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            out.set(r, c, entry_mul(&f, m.get(r, c), nu)?);
        }
    }
    Ok(out)
}

/// Entries of `a` and `b` never share a column here, so the sum is a merge.
fn merge(a: &SuperMatrix, b: &SuperMatrix) -> SuperMatrix {
    let mut out = a.clone();
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            if !b.get(r, c).is_zero() {
                out.set(r, c, b.get(r, c).clone());
            }
        }
    }
    out
}

/// `F_t = (1−t)·J^e gA + t·J^o gB` with its left inverse.
pub fn linear_homotopy(ga: &GaussMorphism, gb: &GaussMorphism) -> Result<HomotopyFamily> {
    if ga.charts.len() != gb.charts.len() || (ga.bundle.k, ga.bundle.l) != (gb.bundle.k, gb.bundle.l) {
        return Err(Error::Precondition("Gauss data of different bundles".into()));
    }
    let (k, l) = (ga.bundle.k, ga.bundle.l);
    let charts = ga
        .charts
        .par_iter()
        .zip(gb.charts.par_iter())
        .map(|(a, b)| {
            if a.ctx != b.ctx || a.relation != b.relation {
                return Err(Error::Precondition(format!(
                    "chart {} carries different contexts in the two Gauss morphisms",
                    a.chart
                )));
            }
            let ctx = a.ctx.with_extra_even(&[PARAM.to_string()])?;
            let nu = a.nu.on_context(&ctx)?;
            let t = SuperElement::gen(&ctx, PARAM)?;
            let one_minus = SuperElement::one(&ctx).sub(&t)?;
            let f0 = embed_columns(Inclusion::EvenDouble, &lift(&a.g, &ctx)?)?;
            let f1 = embed_columns(Inclusion::OddDouble, &lift(&b.g, &ctx)?)?;
            let f = merge(&scale(&f0, &one_minus, &nu)?, &scale(&f1, &t, &nu)?);
            let h = merge(
                &embed_rows(Inclusion::EvenDouble, &lift(&a.h, &ctx)?)?,
                &embed_rows(Inclusion::OddDouble, &lift(&b.h, &ctx)?)?,
            );
            Ok(HomotopyChart {
                chart: a.chart,
                ctx,
                nu,
                relation: a.relation.clone(),
                f0,
                f1,
                f,
                h,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HomotopyFamily {
        param: PARAM.into(),
        k,
        l,
        m: ga.charts.len() * k,
        n: ga.charts.len() * l,
        charts,
    })
}

/// `t ↦ value`, identity on every other generator.
pub fn specialization(ctx: &Ctx, value: &SuperElement) -> Result<Substitution> {
    let pos = ctx
        .even_index(PARAM)
        .ok_or_else(|| Error::UnknownIdentifier(PARAM.into()))?;
    let mut s = Substitution::identity(ctx);
    s.even[pos] = value.recontext(ctx)?;
    Ok(s)
}

impl HomotopyChart {
    pub fn at(&self, value: &SuperElement) -> Result<SuperMatrix> {
        let s = specialization(&self.ctx, value)?;
        let mut assume = AssumptionSet::new();
        self.f.substitute(&s, &mut assume)
    }
}

/// Endpoint and kernel checks for `F_t`, plus the induced maps: `F̄_0 = J̄^e f`
/// on charts `I^e`, `F̄_1 = J̄^o f_1` on charts `I^o`, and specializing the
/// symbolic `F̄_t` at 0 and 1 agrees with classifying the specialized frames.
pub fn verify_endpoints(ga: &GaussMorphism, gb: &GaussMorphism, fam: &HomotopyFamily) -> Result<Report> {
    let mut rep = ReportBuilder::new("homotopy.endpoints");
    let (k, l) = (fam.k, fam.l);
    let src = Atlas::build(GrassSpec::new(k, l, fam.m, fam.n)?)?;
    let tgt = Atlas::build(GrassSpec::new(k, l, 2 * fam.m, 2 * fam.n)?)?;
    let mut counts = [0usize; 3];
    for hc in &fam.charts {
        let base = &ga.bundle.atlas.labels[hc.chart];
        let rel = hc.relation.as_ref();
        let zero = SuperElement::zero(&hc.ctx);
        let one = SuperElement::one(&hc.ctx);
        let half = SuperElement::from_rational(&hc.ctx, rational(1, 2));
        for (name, v, want) in [("F0 = J^e gA", &zero, &hc.f0), ("F1 = J^o gB", &one, &hc.f1)] {
            match hc.at(v) {
                Ok(fv) => {
                    if let Some((r, c)) = first_difference_formal(&fv, want, &hc.nu)? {
                        rep.fail(format!("chart {base} {name}"), format!("({}, {})", r + 1, c + 1), want.get(r, c).to_string(), fv.get(r, c).to_string());
                    }
                }
                Err(e) => rep.fail(format!("chart {base}"), name, "defined", e.to_string()),
            }
        }
        let id = SuperMatrix::identity(&hc.ctx, k, l);
        for (name, v) in [("t", None), ("0", Some(&zero)), ("1/2", Some(&half)), ("1", Some(&one))] {
            let f = match v {
                None => Ok(hc.f.clone()),
                Some(v) => hc.at(v),
            };
            match f.and_then(|f| {
                if name == "1/2" && reduced_rank(&f) < k + l {
                    rep.fail(format!("chart {base} t=1/2"), "reduced rank", (k + l).to_string(), reduced_rank(&f).to_string());
                }
                smul(&f, &hc.h, &hc.nu)
            }) {
                Ok(fh) => {
                    counts[0] += 1;
                    if let Some((r, c)) = fh.first_difference(&id, rel) {
                        rep.fail(format!("chart {base} t={name} h∘F"), format!("({}, {})", r + 1, c + 1), id.get(r, c).to_string(), fh.get(r, c).to_string());
                    }
                }
                Err(e) => rep.fail(format!("chart {base} t={name}"), "h∘F", "defined", e.to_string()),
            }
        }
        // induced maps into the doubled Grassmannian
        let sig_a = classifying_morphism(&gauss_supermatrix(ga, hc.chart)?, &src)?;
        let sig_b = classifying_morphism(&gauss_supermatrix(gb, hc.chart)?, &src)?;
        for (kind, sig, v, label) in [
            (Inclusion::EvenDouble, &sig_a, &zero, "F0bar = J^e-bar f"),
            (Inclusion::OddDouble, &sig_b, &one, "F1bar = J^o-bar f1"),
        ] {
            for (&i, cc) in &sig.charts {
                let sc = &src.charts[i];
                let idx2 = index_map(kind, &sc.index)?;
                let j = tgt.position(&idx2).expect("doubled index is a chart");
                let at = format!("chart {base} {label} I={}", sc.index);
                counts[1] += 1;
                let mut assume = AssumptionSet::new();
                let jbar = induced_chart_hom(kind, sc, &tgt.charts[j])?;
                let want = jbar.then(&cc.subst, &mut assume)?;
                let spec_s = specialization(&hc.ctx, v)?;
                let fv = hc.f.substitute(&spec_s, &mut assume)?;
                // classify the specialized frame, and specialize the symbolic classification
                let direct = frame_to_chart(&fv, &hc.nu, &tgt.charts[j], &mut assume);
                let symbolic = frame_to_chart(&hc.f, &hc.nu, &tgt.charts[j], &mut assume)
                    .and_then(|(s, _, _)| s.then(&spec_s, &mut assume));
                match (direct, symbolic) {
                    (Ok((d, _, _)), Ok(s)) => {
                        let want = lift_subst(&want, &hc.ctx)?;
                        for (g, got, w) in d.diff(&want, rel) {
                            rep.fail(at.clone(), g, w.to_string(), got.to_string());
                        }
                        counts[2] += 1;
                        for (g, got, w) in s.diff(&d, rel) {
                            rep.fail(format!("{at} specialization"), g, w.to_string(), got.to_string());
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => rep.fail(at, "classification", "defined", e.to_string()),
                }
                rep.assume(assume.display(&hc.ctx));
            }
        }
    }
    rep.detail("charts", fam.charts.len());
    rep.detail("kernel_checks", counts[0]);
    rep.detail("induced_chart_checks", counts[1]);
    rep.detail("specialization_checks", counts[2]);
    rep.detail("target", format!("({k},{l},{},{})", 2 * fam.m, 2 * fam.n));
    Ok(rep.finish())
}

fn lift_subst(s: &Substitution, ctx: &Ctx) -> Result<Substitution> {
    let even = s.even.iter().map(|e| e.recontext(ctx)).collect::<Result<Vec<_>>>()?;
    let odd = s.odd.iter().map(|e| e.recontext(ctx)).collect::<Result<Vec<_>>>()?;
    Substitution::new(&s.source, ctx, even, odd)
}

/// `H*` on `ℙ^{m|n}`: `x ↦ x`, `e ↦ c(t)·e` with `c = 1 − t` (or a corrupted factor).
fn retraction_subst(ctx: &Ctx, ext: &Ctx, factor: &SuperElement) -> Result<Substitution> {
    let even = (0..ctx.p()).map(|i| SuperElement::even_gen(ext, i)).collect();
    let odd = (0..ctx.q())
        .map(|i| factor.mul(&SuperElement::odd_gen(ext, i)))
        .collect::<Result<Vec<_>>>()?;
    Substitution::new(ctx, ext, even, odd)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RetractionFactor {
    /// `1 − t`.
    #[default]
    Standard,
    /// `1 + t`, a negative control.
    Corrupted,
}

/// Deformation retraction of `ℙ^{m|n}` onto `ℙ^m`, chart by chart on the
/// standard charts of `Gr(1|0, m+1|n)`: `j₀*∘H* = id`, `j₁*∘H* = (j∘r)*`, and
/// `H*` commutes with every transition.
pub fn retraction_check(m: usize, n: usize, factor: RetractionFactor) -> Result<Report> {
    if m == 0 || n == 0 {
        return Err(Error::Precondition("retraction needs m, n ≥ 1".into()));
    }
    let atlas = Atlas::build(GrassSpec::new(1, 0, m + 1, n)?)?;
    let ctx = atlas.ctx.clone();
    let ext = ctx.with_extra_even(&[PARAM.to_string()])?;
    let t = SuperElement::gen(&ext, PARAM)?;
    let one = SuperElement::one(&ext);
    let c = match factor {
        RetractionFactor::Standard => one.sub(&t)?,
        RetractionFactor::Corrupted => one.add(&t)?,
    };
    let h = retraction_subst(&ctx, &ext, &c)?;
    let j0 = specialization(&ext, &SuperElement::zero(&ext))?;
    let j1 = specialization(&ext, &one)?;
    let mut rep = ReportBuilder::new("homotopy.retraction");
    let charts: Vec<usize> = (0..atlas.charts.len())
        .filter(|&i| atlas.charts[i].index.indices[0] <= m + 1)
        .collect();
    let mut assume = AssumptionSet::new();
    let ident = lift_subst(&Substitution::identity(&ctx), &ext)?;
    let reduce = {
        let mut r = ident.clone();
        for e in r.odd.iter_mut() {
            *e = SuperElement::zero(&ext);
        }
        r
    };
    for &i in &charts {
        let at = format!("chart {}", atlas.charts[i].index);
        for (name, j, want) in [("j0*H* = id", &j0, &ident), ("j1*H* = (j r)*", &j1, &reduce)] {
            match h.then(j, &mut assume) {
                Ok(got) => {
                    for (g, gv, wv) in got.diff(want, None) {
                        rep.fail(format!("{at} {name}"), g, wv.to_string(), gv.to_string());
                    }
                }
                Err(e) => rep.fail(at.clone(), name, "defined", e.to_string()),
            }
        }
    }
    let mut pairs = 0usize;
    for &i in &charts {
        for &j in &charts {
            if i == j {
                continue;
            }
            let Ok(tr) = atlas.transition(i, j) else {
                continue;
            };
            pairs += 1;
            let at = format!("I={} J={}", atlas.charts[i].index, atlas.charts[j].index);
            let lhs = tr.subst.then(&h, &mut assume);
            let rhs = extend_identity(&tr.subst, &ext).and_then(|e| h.then(&e, &mut assume));
            match (lhs, rhs) {
                (Ok(a), Ok(b)) => {
                    for (g, gv, wv) in a.diff(&b, None) {
                        rep.fail(format!("{at} H* commutes with phi"), g, wv.to_string(), gv.to_string());
                    }
                }
                (Err(e), _) | (_, Err(e)) => rep.fail(at, "composition", "defined", e.to_string()),
            }
        }
    }
    rep.assume(assume.display(&ext));
    let sample = |name: &str| h.image_of(name).map(|e| e.to_string()).unwrap_or_default();
    rep.detail("space", format!("P^{{{m}|{n}}}"));
    rep.detail("charts", charts.len());
    rep.detail("pairs_checked", pairs);
    rep.detail("H*(e1)", sample("e1"));
    rep.detail("H*(x1)", sample("x1"));
    Ok(rep.finish())
}

/// `φ*` on the parameter-extended contexts (`t ↦ t`).
fn extend_identity(s: &Substitution, ext: &Ctx) -> Result<Substitution> {
    let mut even = s.even.iter().map(|e| e.recontext(ext)).collect::<Result<Vec<_>>>()?;
    even.push(SuperElement::gen(ext, PARAM)?);
    let odd = s.odd.iter().map(|e| e.recontext(ext)).collect::<Result<Vec<_>>>()?;
    Substitution::new(ext, ext, even, odd)
}
