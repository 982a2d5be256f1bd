//! Gauss morphisms, Gauss supermatrices and classifying substitutions.
//!
//! A partition of unity is formal: even symbols `r_1..r_t` are adjoined to
//! every chart, `√ρ_α = r_α`, `ρ_α = r_α²`, and `Σ r_α² = 1` over the charts
//! that meet the chart at hand (the others vanish there). Everything below is
//! computed chart by chart in these extended contexts.
//!
//! Layout of `O^{tk|tl}`: even slot `(α, i)` is column `αk + i`, odd slot
//! `(α, j)` is column `tk + αl + j` (0-based α, i, j).

use crate::algebra::{AssumptionSet, Ctx, PartitionRelation, Substitution, SuperElement};
use crate::bundle::{canonical_cocycle, BundleCocycle};
use crate::error::{Error, Result};
use crate::grassmannian::{materialize, Atlas, Chart};
use crate::nu::{entry_mul, FormalEntry, NuInvolution};
use crate::report::{Report, ReportBuilder};
use crate::supermatrix::{invert, minor, pseudo_unit, reduced_rank, smul, MultiIndex, SuperMatrix};
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionOfUnity {
    pub t: usize,
    /// Symbol names; empty when `t = 1` (the partition is the constant 1).
    pub names: Vec<String>,
}

impl PartitionOfUnity {
    pub fn new(t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::Precondition("a partition of unity needs at least one chart".into()));
        }
        let names = if t == 1 { Vec::new() } else { (1..=t).map(|a| format!("r{a}")).collect() };
        Ok(PartitionOfUnity { t, names })
    }

    pub fn extend(&self, ctx: &Ctx) -> Result<Ctx> {
        ctx.with_extra_even(&self.names)
    }

    /// `√ρ_α` in an extended context.
    pub fn sqrt_rho(&self, ext: &Ctx, a: usize) -> SuperElement {
        if self.t == 1 {
            return SuperElement::one(ext);
        }
        SuperElement::gen(ext, &self.names[a]).expect("extended context carries the partition symbols")
    }

    pub fn rho(&self, ext: &Ctx, a: usize) -> SuperElement {
        let r = self.sqrt_rho(ext, a);
        r.mul(&r).expect("same context")
    }

    /// `Σ_{α ∈ support} r_α² = 1`.
    pub fn relation(&self, ext: &Ctx, support: &[usize]) -> Option<PartitionRelation> {
        if self.t == 1 || support.is_empty() {
            return None;
        }
        let vars = support
            .iter()
            .map(|&a| ext.even_index(&self.names[a]).expect("partition symbol"))
            .collect();
        Some(PartitionRelation::new(vars))
    }
}

/// Even slot for `(α, i)` with `i < k`, odd slot for `i ≥ k`.
pub fn slot(k: usize, l: usize, t: usize, a: usize, i: usize) -> usize {
    if i < k {
        a * k + i
    } else {
        t * k + a * l + (i - k)
    }
}

/// `φ*` extended by `r_α ↦ r_α`.
fn extend_subst(s: &Substitution, src: &Ctx, tgt: &Ctx, names: &[String]) -> Result<Substitution> {
    let mut even = s.even.iter().map(|e| e.recontext(tgt)).collect::<Result<Vec<_>>>()?;
    for n in names {
        even.push(SuperElement::gen(tgt, n)?);
    }
    let odd = s.odd.iter().map(|e| e.recontext(tgt)).collect::<Result<Vec<_>>>()?;
    Substitution::new(src, tgt, even, odd)
}

fn recontext_matrix(m: &SuperMatrix, ctx: &Ctx) -> Result<SuperMatrix> {
    m.map_ring(ctx, |e| e.recontext(ctx))
}

fn scale(m: &SuperMatrix, r: &SuperElement, nu: &NuInvolution) -> Result<SuperMatrix> {
    let mut out = m.clone();
    let f = FormalEntry::Ring(r.clone());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, entry_mul(&f, m.get(i, j), nu)?);
        }
    }
    Ok(out)
}

/// Per-chart data of the Gauss morphism.
#[derive(Clone, Debug)]
pub struct GaussChart {
    pub chart: usize,
    pub ctx: Ctx,
    pub nu: NuInvolution,
    /// Charts meeting this one (itself included).
    pub support: Vec<usize>,
    pub relation: Option<PartitionRelation>,
    /// `g` in the local frame: `(k|l)×(tk|tl)`, block α = `ρ_α · φ*_{γα}(g_{αγ})`.
    pub g: SuperMatrix,
    /// Left inverse `h`: `(tk|tl)×(k|l)`, block α = `g_{γα}`.
    pub h: SuperMatrix,
    /// Generating sections `√ρ_β s^β_j` in the local frame: `(tk|tl)×(k|l)`.
    pub sections: SuperMatrix,
    /// Extended `φ*_{γα}` for α in the support.
    pub pulls: BTreeMap<usize, Substitution>,
    pub assumptions: AssumptionSet,
}

#[derive(Clone, Debug)]
pub struct GaussMorphism {
    pub bundle: BundleCocycle,
    pub partition: PartitionOfUnity,
    /// Block position of each chart in `O^{tk|tl}`.
    pub order: Vec<usize>,
    pub charts: Vec<GaussChart>,
}

fn gauss_chart(b: &BundleCocycle, pou: &PartitionOfUnity, order: &[usize], c: usize) -> Result<GaussChart> {
    let at = &b.atlas;
    let (k, l, t) = (b.k, b.l, at.len());
    let ext = pou.extend(&at.charts[c])?;
    let nu = at.nus[c].on_context(&ext)?;
    let support: Vec<usize> = (0..t).filter(|&a| at.intersects(c, a) && at.intersects(a, c)).collect();
    let relation = pou.relation(&ext, &support);
    let mut assume = AssumptionSet::new();
    let mut pulls = BTreeMap::new();
    for &a in &support {
        let ov = at.overlap(c, a).expect("support");
        assume.extend(&ov.assumptions);
        let src = pou.extend(&at.charts[a])?;
        pulls.insert(a, extend_subst(&ov.subst, &src, &ext, &pou.names)?);
    }
    let n = k + l;
    let mut g = SuperMatrix::zeros(&ext, k, l, t * k, t * l);
    let mut h = SuperMatrix::zeros(&ext, t * k, t * l, k, l);
    let mut sections = SuperMatrix::zeros(&ext, t * k, t * l, k, l);
    for &a in &support {
        let src = pou.extend(&at.charts[a])?;
        let gac = recontext_matrix(b.get(a, c).expect("support"), &src)?.substitute(&pulls[&a], &mut assume)?;
        let block = scale(&gac, &pou.rho(&ext, a), &nu)?;
        let gca = recontext_matrix(b.get(c, a).expect("support"), &ext)?;
        let sec = scale(&gca, &pou.sqrt_rho(&ext, a), &nu)?;
        for i in 0..n {
            for j in 0..n {
                g.set(i, slot(k, l, t, order[a], j), block.get(i, j).clone());
                h.set(slot(k, l, t, order[a], i), j, gca.get(i, j).clone());
                sections.set(slot(k, l, t, order[a], i), j, sec.get(i, j).clone());
            }
        }
    }
    Ok(GaussChart {
        chart: c,
        ctx: ext,
        nu,
        support,
        relation,
        g,
        h,
        sections,
        pulls,
        assumptions: assume,
    })
}

fn diff_cells(
    rep: &mut ReportBuilder,
    at: &str,
    got: &SuperMatrix,
    want: &SuperMatrix,
    rel: Option<&PartitionRelation>,
) -> usize {
    let mut n = 0;
    for r in 0..got.rows() {
        for c in 0..got.cols() {
            let same = match (got.get(r, c), want.get(r, c)) {
                (FormalEntry::Ring(a), FormalEntry::Ring(b)) => a.equals(b, rel),
                (x, y) => x.equals(y),
            };
            if !same {
                n += 1;
                rep.fail(
                    at,
                    format!("({}, {})", r + 1, c + 1),
                    want.get(r, c).to_string(),
                    got.get(r, c).to_string(),
                );
            }
        }
    }
    n
}

impl GaussMorphism {
    /// `h∘g = id` on every chart, modulo the partition relation.
    pub fn left_inverse_report(&self) -> Report {
        let mut rep = ReportBuilder::new("gauss.left_inverse");
        for gc in &self.charts {
            let label = format!("chart {}", self.bundle.atlas.labels[gc.chart]);
            match smul(&gc.g, &gc.h, &gc.nu) {
                Ok(hg) => {
                    let id = SuperMatrix::identity(&gc.ctx, self.bundle.k, self.bundle.l);
                    diff_cells(&mut rep, &label, &hg, &id, gc.relation.as_ref());
                }
                Err(e) => rep.fail(label, "h∘g", "defined", e.to_string()),
            }
            rep.assume(gc.assumptions.display(&gc.ctx));
        }
        rep.detail("charts", self.charts.len());
        rep.detail("t", self.partition.t);
        rep.detail("rank", format!("{}|{}", self.bundle.k, self.bundle.l));
        rep.detail("relation", relation_text(&self.partition));
        rep.finish()
    }
}

fn relation_text(p: &PartitionOfUnity) -> String {
    if p.t == 1 {
        "rho1 = 1".into()
    } else {
        format!("{} = 1", p.names.iter().map(|n| format!("{n}^2")).collect::<Vec<_>>().join(" + "))
    }
}

/// `g(s) = Σ ρ_α · i_α ∘ ψ*_α ∘ r_α(s)`, certified injective by its left inverse.
pub fn gauss_morphism(b: &BundleCocycle, pou: &PartitionOfUnity) -> Result<GaussMorphism> {
    gauss_morphism_ordered(b, pou, &(0..b.atlas.len()).collect::<Vec<_>>())
}

/// As [`gauss_morphism`], with chart α embedded in block `order[α]`.
pub fn gauss_morphism_ordered(b: &BundleCocycle, pou: &PartitionOfUnity, order: &[usize]) -> Result<GaussMorphism> {
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..b.atlas.len()).collect::<Vec<_>>() {
        return Err(Error::Precondition(format!("{order:?} is not a permutation of the charts")));
    }
    if pou.t != b.atlas.len() {
        return Err(Error::Precondition(format!(
            "partition has {} members for {} charts",
            pou.t,
            b.atlas.len()
        )));
    }
    let charts = (0..b.atlas.len())
        .into_par_iter()
        .map(|c| gauss_chart(b, pou, order, c))
        .collect::<Result<Vec<_>>>()?;
    let gm = GaussMorphism {
        bundle: b.clone(),
        partition: pou.clone(),
        order: order.to_vec(),
        charts,
    };
    let rep = gm.left_inverse_report();
    if !rep.passed() {
        let w = &rep.witnesses[0];
        return Err(Error::KernelNotTrivial(format!(
            "h∘g differs from id at {} {}: expected {}, got {}",
            w.at, w.item, w.expected, w.got
        )));
    }
    Ok(gm)
}

/// The Gauss supermatrix written on one chart.
#[derive(Clone, Debug)]
pub struct GaussSupermatrix {
    pub chart: usize,
    pub ctx: Ctx,
    pub nu: NuInvolution,
    pub relation: Option<PartitionRelation>,
    pub k: usize,
    pub l: usize,
    pub t: usize,
    /// `(tk|tl)×(tk|tl)`; row of `√ρ_β s^β_j` holds `ρ_α √ρ_β a^{αβ}_{ij}` in slot `(α, i)`.
    pub matrix: SuperMatrix,
    pub assumptions: AssumptionSet,
}

/// Row `(β, j)`, slot `(α, i)`: `ρ_α √ρ_β a^{αβ}_{ij}`, where `a^{αβ}` is the
/// matrix of `ψ*_α ∘ ψ*_β⁻¹`, i.e. row `j` of `g_{αβ}` read as a column, pulled to the chart.
pub fn gauss_supermatrix(gm: &GaussMorphism, chart: usize) -> Result<GaussSupermatrix> {
    let b = &gm.bundle;
    let gc = gm
        .charts
        .get(chart)
        .ok_or_else(|| Error::OutOfRange(format!("chart {chart}")))?;
    let (k, l, t) = (b.k, b.l, b.atlas.len());
    let ext = &gc.ctx;
    let mut assume = gc.assumptions.clone();
    let mut m = SuperMatrix::zeros(ext, t * k, t * l, t * k, t * l);
    for &be in &gc.support {
        for &al in &gc.support {
            let Some(gab) = b.get(al, be) else {
                // ρ_α √ρ_β vanishes when U_α and U_β are disjoint
                continue;
            };
            let src = gm.partition.extend(&b.atlas.charts[al])?;
            let a = recontext_matrix(gab, &src)?.substitute(&gc.pulls[&al], &mut assume)?;
            let w = gm.partition.rho(ext, al).mul(&gm.partition.sqrt_rho(ext, be))?;
            let a = scale(&a, &w, &gc.nu)?;
            for j in 0..k + l {
                for i in 0..k + l {
                    m.set(slot(k, l, t, gm.order[be], j), slot(k, l, t, gm.order[al], i), a.get(j, i).clone());
                }
            }
        }
    }
    m.check_parity()?;
    Ok(GaussSupermatrix {
        chart,
        ctx: ext.clone(),
        nu: gc.nu.clone(),
        relation: gc.relation.clone(),
        k,
        l,
        t,
        matrix: m,
        assumptions: assume,
    })
}

/// `G = S · g`: every row of the Gauss supermatrix is `g` of its generating section.
pub fn gauss_consistency_report(gm: &GaussMorphism, gs: &GaussSupermatrix) -> Report {
    let mut rep = ReportBuilder::new("gauss.supermatrix_consistency");
    let gc = &gm.charts[gs.chart];
    match smul(&gc.sections, &gc.g, &gc.nu) {
        Ok(sg) => {
            diff_cells(
                &mut rep,
                &format!("chart {}", gm.bundle.atlas.labels[gs.chart]),
                &gs.matrix,
                &sg,
                gs.relation.as_ref(),
            );
        }
        Err(e) => rep.fail("S·g", "product", "defined", e.to_string()),
    }
    rep.finish()
}

/// `φ*_I` on one base chart.
#[derive(Clone, Debug)]
pub struct ClassifyingChart {
    pub index: MultiIndex,
    /// Grassmannian chart-I generators ↦ base functions (with partition symbols).
    pub subst: Substitution,
    /// `(M_I(G(I))·id_I)⁻¹`.
    pub b_inv: SuperMatrix,
    /// `L = (M_I(G(I))·id_I)⁻¹ · G(I)`, whose retained columns are the `y^I_{ij}`.
    pub l: SuperMatrix,
    pub assumptions: AssumptionSet,
}

/// Balanced `I`: `k` even rows (indices ≤ tk) and `l` odd rows.
pub fn check_balance(k: usize, l: usize, t: usize, idx: &MultiIndex) -> Result<()> {
    let even = idx.indices.iter().filter(|&&i| i <= t * k).count();
    if even != k || idx.indices.len() != k + l {
        return Err(Error::BadIndexBalance(format!(
            "{idx} selects {even} even and {} odd rows, expected {k} and {l}",
            idx.indices.len() - even
        )));
    }
    Ok(())
}

/// `x^I_{ij} ↦ y^I_{ij}` from the rows of `G` indexed by `I`.
///
/// `G(I)` is first normalized by its `I`-minor (as chart matrices are), so
/// the images satisfy `φ*_I(A^I) = L`; when that minor is already `id_I` this
/// is exactly `id_I·G(I)` with the `I` columns deleted.
pub fn classifying_substitutions(gs: &GaussSupermatrix, target: &Atlas, idx: &MultiIndex) -> Result<ClassifyingChart> {
    check_balance(gs.k, gs.l, gs.t, idx)?;
    let pos = target
        .position(idx)
        .ok_or_else(|| Error::InvalidIndex(format!("{idx} is not a chart of {}", target.spec)))?;
    let rows: Vec<usize> = idx.indices.iter().map(|i| i - 1).collect();
    let gi = gs.matrix.select_rows(&rows, gs.k, gs.l)?;
    let mut assume = gs.assumptions.clone();
    let (subst, b_inv, l) = frame_to_chart(&gi, &gs.nu, &target.charts[pos], &mut assume)
        .map_err(|e| match e {
            Error::Singular(_) => Error::Singular(format!("rows {idx} of G are dependent on this chart")),
            other => other,
        })?;
    Ok(ClassifyingChart {
        index: idx.clone(),
        subst,
        b_inv,
        l,
        assumptions: assume,
    })
}

/// Chart-`I` coordinates of the plane spanned by the rows of `frame`:
/// `L = (M_I(frame)·id_I)⁻¹·frame` read at the generator cells of `chart`
/// (ν-wrapped cells read back through ν).
pub fn frame_to_chart(
    frame: &SuperMatrix,
    nu: &NuInvolution,
    chart: &Chart,
    assume: &mut AssumptionSet,
) -> Result<(Substitution, SuperMatrix, SuperMatrix)> {
    let ctx = &frame.ctx;
    let idx = &chart.index;
    let mi = minor(frame, idx)?;
    if reduced_rank(&mi) < mi.rows() {
        return Err(Error::Singular(format!("frame minor at {idx} is singular")));
    }
    let b = smul(&mi, &pseudo_unit(ctx, idx), nu)?;
    let b_inv = invert(&b, nu, assume)?;
    let l = smul(&b_inv, frame, nu)?;
    let (p, q) = (chart.ctx.p(), chart.ctx.q());
    let mut imgs = Vec::with_capacity(p + q);
    for g in 0..p + q {
        let cell = chart.cell_of(g);
        let v = materialize(l.get(cell.row, cell.col), ctx, nu)?;
        imgs.push(if cell.wrapped { nu.apply(&v)? } else { v });
    }
    let odd = imgs.split_off(p);
    let subst = Substitution::new(&chart.ctx, ctx, imgs, odd)?;
    Ok((subst, b_inv, l))
}

/// The family `{φ*_I}` on one base chart, over every balanced chart of the target.
#[derive(Clone, Debug)]
pub struct ClassifyingMorphism {
    pub chart: usize,
    pub target: Atlas,
    /// Keyed by chart position in `target`.
    pub charts: BTreeMap<usize, ClassifyingChart>,
    /// Balanced charts whose rows are dependent here (the image misses `V_I`).
    pub missed: Vec<MultiIndex>,
}

pub fn classifying_morphism(gs: &GaussSupermatrix, target: &Atlas) -> Result<ClassifyingMorphism> {
    let spec = target.spec;
    if (spec.k, spec.l, spec.m, spec.n) != (gs.k, gs.l, gs.t * gs.k, gs.t * gs.l) {
        return Err(Error::Precondition(format!(
            "target {spec} does not match rank {}|{} with t = {}",
            gs.k, gs.l, gs.t
        )));
    }
    let results: Vec<(usize, Result<ClassifyingChart>)> = target
        .charts
        .par_iter()
        .enumerate()
        .filter(|(_, c)| check_balance(gs.k, gs.l, gs.t, &c.index).is_ok())
        .map(|(i, c)| (i, classifying_substitutions(gs, target, &c.index)))
        .collect();
    let mut charts = BTreeMap::new();
    let mut missed = Vec::new();
    for (i, r) in results {
        match r {
            Ok(c) => {
                charts.insert(i, c);
            }
            Err(Error::Singular(_)) => missed.push(target.charts[i].index.clone()),
            Err(e) => return Err(e),
        }
    }
    Ok(ClassifyingMorphism {
        chart: gs.chart,
        target: target.clone(),
        charts,
        missed,
    })
}

impl ClassifyingMorphism {
    /// `h̃ = Σ_I φ*_I(ρ'_I · h_I)` for local data `h_I` on target charts and
    /// weights `ρ'_I` already written as target functions on chart I.
    pub fn assemble(&self, local: &BTreeMap<usize, (SuperElement, SuperElement)>) -> Result<SuperElement> {
        let ctx = self
            .charts
            .values()
            .next()
            .map(|c| c.subst.target.clone())
            .ok_or_else(|| Error::Precondition("no chart of the target meets this base chart".into()))?;
        let mut out = SuperElement::zero(&ctx);
        let mut assume = AssumptionSet::new();
        for (i, (w, h)) in local {
            let c = self
                .charts
                .get(i)
                .ok_or_else(|| Error::Precondition(format!("chart {} is not met", self.target.charts[*i].index)))?;
            out = out.add(&c.subst.apply(&w.mul(h)?, &mut assume)?)?;
        }
        Ok(out)
    }
}

fn invertible(m: &SuperMatrix, nu: &NuInvolution, assume: &mut AssumptionSet) -> bool {
    reduced_rank(m) == m.rows() && invert(m, nu, assume).is_ok()
}

/// `O ⊗_σ Γ ≅ E`: per base chart γ and balanced chart I met by σ, the matrix
/// `T_{γ,I}` of δ (pulled-back frame of Γ in the frame of E) is invertible,
/// `T·g = φ*_I(A^I)`, `G(I) = S_I·g`, and `T` is natural for both cocycles:
/// `T_{γ,J} = φ*_I(m_{IJ})·T_{γ,I}` with `φ*_I∘φ*_{IJ} = φ*_J`, and
/// `T_{γ,I} = φ*_{γγ'}(T_{γ',I})·g_{γγ'}`.
pub fn verify_pullback_iso(gm: &GaussMorphism, sigma: &[ClassifyingMorphism]) -> Report {
    let mut rep = ReportBuilder::new("gauss.pullback_iso");
    let b = &gm.bundle;
    let (k, l) = (b.k, b.l);
    if sigma.len() != gm.charts.len() {
        rep.fail("sigma", "charts", gm.charts.len().to_string(), sigma.len().to_string());
        return rep.finish();
    }
    let mut deltas: Vec<BTreeMap<usize, SuperMatrix>> = vec![BTreeMap::new(); sigma.len()];
    let mut counts = BTreeMap::<&str, usize>::new();
    for (c, sg) in sigma.iter().enumerate() {
        let gc = &gm.charts[c];
        let rel = gc.relation.as_ref();
        let base = &b.atlas.labels[c];
        rep.assume(gc.assumptions.display(&gc.ctx));
        let target = &sg.target;
        for (&i, cc) in &sg.charts {
            let at = format!("chart {base} I={}", cc.index);
            rep.assume(cc.assumptions.display(&gc.ctx));
            let rows: Vec<usize> = cc.index.indices.iter().map(|x| x - 1).collect();
            let s_i = match gc.sections.select_rows(&rows, k, l) {
                Ok(s) => s,
                Err(e) => {
                    rep.fail(at, "sections", "rows", e.to_string());
                    continue;
                }
            };
            let t_ci = match smul(&cc.b_inv, &s_i, &gc.nu) {
                Ok(t) => t,
                Err(e) => {
                    rep.fail(at, "delta", "defined", e.to_string());
                    continue;
                }
            };
            *counts.entry("deltas_checked").or_default() += 1;
            let mut assume = AssumptionSet::new();
            if !invertible(&t_ci, &gc.nu, &mut assume) {
                rep.fail(at.clone(), "delta", "invertible (zero kernel)", "singular");
            }
            rep.assume(assume.display(&gc.ctx));
            // δ sends the pulled-back Γ frame to sections whose g-image is φ*_I(A^I)
            let mut assume = AssumptionSet::new();
            match (smul(&t_ci, &gc.g, &gc.nu), target.charts[i].a.substitute(&cc.subst, &mut assume)) {
                (Ok(tg), Ok(pa)) => {
                    diff_cells(&mut rep, &format!("{at} T·g vs sigma*(A^I)"), &tg, &pa, rel);
                }
                (Err(e), _) | (_, Err(e)) => rep.fail(at.clone(), "T·g", "defined", e.to_string()),
            }
            match (gauss_supermatrix(gm, c), smul(&s_i, &gc.g, &gc.nu)) {
                (Ok(gs), Ok(sg)) => match gs.matrix.select_rows(&rows, k, l) {
                    Ok(gi) => {
                        diff_cells(&mut rep, &format!("{at} G(I) vs S_I·g"), &gi, &sg, rel);
                    }
                    Err(e) => rep.fail(at.clone(), "G(I)", "rows", e.to_string()),
                },
                (Err(e), _) | (_, Err(e)) => rep.fail(at.clone(), "G(I)", "defined", e.to_string()),
            }
            deltas[c].insert(i, t_ci);
        }
        // naturality for Γ on the same base chart
        for (&i, ci) in &sg.charts {
            for (&j, cj) in &sg.charts {
                if i == j {
                    continue;
                }
                let Ok(tij) = target.transition(i, j) else {
                    continue;
                };
                let at = format!("chart {base} I={} J={}", ci.index, cj.index);
                *counts.entry("gamma_pairs_checked").or_default() += 1;
                let mut assume = AssumptionSet::new();
                match tij.subst.then(&ci.subst, &mut assume) {
                    Ok(comp) => {
                        for (g, got, want) in comp.diff(&cj.subst, rel) {
                            rep.fail(format!("{at} sigma_I∘phi_IJ vs sigma_J"), g, want.to_string(), got.to_string());
                        }
                    }
                    Err(e) => rep.fail(at.clone(), "composition", "defined", e.to_string()),
                }
                let m = canonical_cocycle(target, i, j).and_then(|(m, _)| m.substitute(&ci.subst, &mut assume));
                match m.and_then(|m| smul(&m, &deltas[c][&i], &gc.nu)) {
                    Ok(rhs) => {
                        diff_cells(&mut rep, &format!("{at} T_J vs sigma_I(m_IJ)·T_I"), &deltas[c][&j], &rhs, rel);
                    }
                    Err(e) => rep.fail(at, "sigma_I(m_IJ)·T_I", "defined", e.to_string()),
                }
                rep.assume(assume.display(&gc.ctx));
            }
        }
    }
    // naturality for E across base charts
    for (c, gc) in gm.charts.iter().enumerate() {
        for &d in &gc.support {
            if d == c {
                continue;
            }
            for (i, t_ci) in &deltas[c] {
                let Some(t_di) = deltas[d].get(i) else {
                    continue;
                };
                let at = format!(
                    "charts {} {} I={}",
                    b.atlas.labels[c], b.atlas.labels[d], sigma[c].target.charts[*i].index
                );
                *counts.entry("e_pairs_checked").or_default() += 1;
                let mut assume = AssumptionSet::new();
                let rhs = t_di
                    .substitute(&gc.pulls[&d], &mut assume)
                    .and_then(|p| recontext_matrix(b.get(c, d).expect("support"), &gc.ctx).and_then(|g| smul(&p, &g, &gc.nu)));
                match rhs {
                    Ok(rhs) => {
                        diff_cells(&mut rep, &format!("{at} T vs phi(T')·g"), t_ci, &rhs, gc.relation.as_ref());
                    }
                    Err(e) => rep.fail(at, "phi(T')·g", "defined", e.to_string()),
                }
                rep.assume(assume.display(&gc.ctx));
            }
        }
    }
    for (key, v) in counts {
        rep.detail(key, v);
    }
    let missed: Vec<String> = sigma
        .iter()
        .flat_map(|s| s.missed.iter().map(move |m| format!("chart {} I={m}", b.atlas.labels[s.chart])))
        .collect();
    rep.detail("missed_charts", missed);
    rep.detail("relation", relation_text(&gm.partition));
    rep.finish()
}
