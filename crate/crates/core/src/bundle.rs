//! Super vector bundles as Čech cocycles over a finite atlas.
//!
//! Convention: on an overlap (α, β) the local frames are related by
//! `F_β = g_{αβ} · F_α` (rows are frame vectors), with `g_{αβ}` written in the
//! coordinates of chart α. The cocycle condition then reads
//! `g_{αγ} = φ*_{αβ}(g_{βγ}) · g_{αβ}` and `φ*_{αβ}(g_{βα}) · g_{αβ} = id`,
//! and a section with coefficient rows `λ^α` satisfies `λ^α = φ*_{αβ}(λ^β) · g_{αβ}`.

use crate::algebra::{AssumptionSet, Ctx, Substitution, SuperElement};
use crate::error::{Error, Result};
use crate::grassmannian::{all_transitions, Atlas};
use crate::nu::{entry_add, entry_mul, FormalEntry, NuInvolution};
use crate::report::{Report, ReportBuilder};
use crate::supermatrix::{invert, minor, pseudo_unit, reduced_rank, smul, SuperMatrix};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Human-readable statement of the orientation used by every check here.
pub const CONVENTION: &str = "F_b = g_ab * F_a (row frames); g_ac = phi_ab(g_bc) * g_ab";

/// Restriction data `φ*_{αβ}: O(U_β) → O(U_α)` on a nonempty overlap.
#[derive(Clone, Debug)]
pub struct Overlap {
    pub subst: Substitution,
    pub assumptions: AssumptionSet,
}

/// A supermanifold presented by finitely many coordinate charts and their overlap maps.
#[derive(Clone, Debug)]
pub struct SuperManifoldAtlas {
    pub labels: Vec<String>,
    pub charts: Vec<Ctx>,
    pub nus: Vec<NuInvolution>,
    /// Keyed by `(α, β)`; maps chart-β generators to functions on chart α.
    pub overlaps: BTreeMap<(usize, usize), Overlap>,
}

impl SuperManifoldAtlas {
    /// Charts with only their self-overlaps.
    pub fn new(labels: Vec<String>, charts: Vec<Ctx>) -> Result<Self> {
        if labels.len() != charts.len() {
            return Err(Error::DimensionMismatch("one label per chart".into()));
        }
        let nus = charts.iter().map(NuInvolution::toggle_first).collect();
        let overlaps = charts
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (
                    (i, i),
                    Overlap {
                        subst: Substitution::identity(c),
                        assumptions: AssumptionSet::new(),
                    },
                )
            })
            .collect();
        Ok(SuperManifoldAtlas {
            labels,
            charts,
            nus,
            overlaps,
        })
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn add_overlap(&mut self, a: usize, b: usize, subst: Substitution, assumptions: AssumptionSet) -> Result<()> {
        if a >= self.len() || b >= self.len() {
            return Err(Error::OutOfRange(format!("overlap ({a}, {b})")));
        }
        if !crate::algebra::context::same_ctx(&subst.source, &self.charts[b])
            || !crate::algebra::context::same_ctx(&subst.target, &self.charts[a])
        {
            return Err(Error::ContextMismatch(format!(
                "overlap {} -> {} must map chart {} generators into chart {}",
                self.labels[a], self.labels[b], self.labels[b], self.labels[a]
            )));
        }
        self.overlaps.insert((a, b), Overlap { subst, assumptions });
        Ok(())
    }

    pub fn overlap(&self, a: usize, b: usize) -> Option<&Overlap> {
        self.overlaps.get(&(a, b))
    }

    pub fn intersects(&self, a: usize, b: usize) -> bool {
        self.overlaps.contains_key(&(a, b))
    }

    /// Ordered pairs `α ≠ β` with overlap maps in both directions.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && self.intersects(a, b) && self.intersects(b, a))
            .collect()
    }

    /// Ordered triples of distinct charts whose three legs `(α,β), (β,γ), (α,γ)` are defined.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c && self.intersects(a, b) && self.intersects(b, c) && self.intersects(a, c) {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }

    /// The ν-Grassmannian atlas, keeping the overlaps that are nonempty in both directions.
    pub fn from_grassmannian(atlas: &Atlas) -> Result<Self> {
        let mut out = SuperManifoldAtlas::new(
            atlas.charts.iter().map(|c| c.label()).collect(),
            atlas.charts.iter().map(|c| c.ctx.clone()).collect(),
        )?;
        out.nus = atlas.charts.iter().map(|c| c.nu.clone()).collect();
        let trans = all_transitions(atlas);
        for (&(i, j), t) in &trans {
            match t {
                // a one-sided overlap is not an overlap of the glued space
                Ok(t) if matches!(trans.get(&(j, i)), Some(Ok(_))) => {
                    out.add_overlap(i, j, t.subst.clone(), t.assumptions.clone())?
                }
                Ok(_) | Err(Error::Singular(_)) => {}
                Err(e) => return Err(e.clone()),
            }
        }
        Ok(out)
    }
}

/// Basis of a free module `O^{k|l}`: `k` even-flagged vectors then `l` odd-flagged ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeModuleSignature {
    pub k: usize,
    pub l: usize,
    pub names: Vec<(String, bool)>,
}

impl FreeModuleSignature {
    pub fn standard(k: usize, l: usize) -> Self {
        let names = (1..=k)
            .map(|i| (format!("s{i}"), false))
            .chain((1..=l).map(|j| (format!("t{j}"), true)))
            .collect();
        FreeModuleSignature { k, l, names }
    }

    pub fn rank(&self) -> usize {
        self.k + self.l
    }

    pub fn is_odd(&self, i: usize) -> bool {
        i >= self.k
    }

    /// `z · v` for `v = Σ w_i b_i`, where an odd-flagged `b_i` is `π` of the ring:
    /// `z·(πw) = (−1)^{p(z)} π(zw)`.
    pub fn left_mul(&self, z: &SuperElement, v: &[SuperElement]) -> Result<Vec<SuperElement>> {
        let pz = z
            .parity()
            .ok_or_else(|| Error::ParityViolation(format!("left multiplication by inhomogeneous {z}")))?;
        v.iter()
            .enumerate()
            .map(|(i, w)| {
                let zw = z.mul(w)?;
                Ok(if self.is_odd(i) && pz == 1 { zw.neg() } else { zw })
            })
            .collect()
    }

    /// Parity of a module element, if homogeneous.
    pub fn parity(&self, v: &[SuperElement]) -> Option<u8> {
        let mut out = None;
        for (i, w) in v.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let p = w.parity()? ^ u8::from(self.is_odd(i));
            match out {
                None => out = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(0))
    }
}

/// Transition matrices of a rank `k|l` bundle over an atlas.
#[derive(Clone, Debug)]
pub struct BundleCocycle {
    pub atlas: SuperManifoldAtlas,
    pub k: usize,
    pub l: usize,
    /// `g_{αβ}` over chart α, for every intersecting ordered pair (including α = β).
    pub g: BTreeMap<(usize, usize), SuperMatrix>,
}

impl BundleCocycle {
    pub fn new(atlas: SuperManifoldAtlas, k: usize, l: usize, g: BTreeMap<(usize, usize), SuperMatrix>) -> Result<Self> {
        for (&(a, b), m) in &g {
            if !atlas.intersects(a, b) {
                return Err(Error::Precondition(format!(
                    "g given on ({}, {}) where the charts do not meet",
                    atlas.labels[a], atlas.labels[b]
                )));
            }
            if (m.k, m.l, m.m, m.n) != (k, l, k, l) {
                return Err(Error::DimensionMismatch(format!(
                    "g({}, {}) is ({}|{})x({}|{}), expected ({k}|{l})x({k}|{l})",
                    atlas.labels[a], atlas.labels[b], m.k, m.l, m.m, m.n
                )));
            }
            if !crate::algebra::context::same_ctx(&m.ctx, &atlas.charts[a]) {
                return Err(Error::ContextMismatch(format!("g({}, {})", atlas.labels[a], atlas.labels[b])));
            }
            m.check_parity()?;
        }
        for &key in atlas.overlaps.keys() {
            if !g.contains_key(&key) {
                return Err(Error::Precondition(format!(
                    "missing g on ({}, {})",
                    atlas.labels[key.0], atlas.labels[key.1]
                )));
            }
        }
        Ok(BundleCocycle { atlas, k, l, g })
    }

    /// All transition matrices equal to the identity.
    pub fn trivial(atlas: SuperManifoldAtlas, k: usize, l: usize) -> Self {
        let g = atlas
            .overlaps
            .keys()
            .map(|&(a, b)| ((a, b), SuperMatrix::identity(&atlas.charts[a], k, l)))
            .collect();
        BundleCocycle { atlas, k, l, g }
    }

    pub fn signature(&self) -> FreeModuleSignature {
        FreeModuleSignature::standard(self.k, self.l)
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&SuperMatrix> {
        self.g.get(&(a, b))
    }
}

/// `φ*_{αβ}(x) · y`, both over chart α.
fn pull_mul(
    atlas: &SuperManifoldAtlas,
    a: usize,
    b: usize,
    x: &SuperMatrix,
    y: &SuperMatrix,
    assume: &mut AssumptionSet,
) -> Result<SuperMatrix> {
    let ov = atlas
        .overlap(a, b)
        .ok_or_else(|| Error::Precondition(format!("no overlap ({}, {})", atlas.labels[a], atlas.labels[b])))?;
    assume.extend(&ov.assumptions);
    let px = x.substitute(&ov.subst, assume)?;
    smul(&px, y, &atlas.nus[a])
}

fn cell_witnesses(got: &SuperMatrix, want: &SuperMatrix) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for r in 0..got.rows() {
        for c in 0..got.cols() {
            if !got.get(r, c).equals(want.get(r, c)) {
                out.push((format!("({}, {})", r + 1, c + 1), want.get(r, c).to_string(), got.get(r, c).to_string()));
            }
        }
    }
    out
}

/// `g_{αα} = id`, the pair inverse law and the triple cocycle law on every
/// intersecting pair and triple.
pub fn verify_bundle_cocycle(b: &BundleCocycle) -> Report {
    let mut rep = ReportBuilder::new("bundle.verify_cocycle");
    let at = &b.atlas;
    let n = at.len();
    for a in 0..n {
        match b.get(a, a) {
            Some(m) if m.is_identity() => {}
            Some(m) => {
                for (cell, w, g) in cell_witnesses(m, &SuperMatrix::identity(&at.charts[a], b.k, b.l)) {
                    rep.fail(format!("g({0},{0})", at.labels[a]), cell, w, g);
                }
            }
            None => rep.fail(format!("g({0},{0})", at.labels[a]), "matrix", "identity", "missing"),
        }
    }
    let pairs = at.pairs();
    let triples = at.triples();

    type Outcome = (String, Vec<(String, String, String)>, AssumptionSet);
    let check_pair = |&(x, y): &(usize, usize)| -> Outcome {
        let at_label = format!("alpha={} beta={}", at.labels[x], at.labels[y]);
        let mut assume = AssumptionSet::new();
        let id = SuperMatrix::identity(&at.charts[x], b.k, b.l);
        match pull_mul(at, x, y, &b.g[&(y, x)], &b.g[&(x, y)], &mut assume) {
            Ok(m) => (at_label, cell_witnesses(&m, &id), assume),
            Err(e) => (at_label, vec![("product".into(), "defined".into(), e.to_string())], assume),
        }
    };
    let check_triple = |&(x, y, z): &(usize, usize, usize)| -> Outcome {
        let at_label = format!("alpha={} beta={} gamma={}", at.labels[x], at.labels[y], at.labels[z]);
        let mut assume = AssumptionSet::new();
        match pull_mul(at, x, y, &b.g[&(y, z)], &b.g[&(x, y)], &mut assume) {
            Ok(m) => (at_label, cell_witnesses(&m, &b.g[&(x, z)]), assume),
            Err(e) => (at_label, vec![("product".into(), "defined".into(), e.to_string())], assume),
        }
    };
    let pr: Vec<Outcome> = pairs.par_iter().map(check_pair).collect();
    let tr: Vec<Outcome> = triples.par_iter().map(check_triple).collect();
    for (label, ws, assume) in pr.into_iter().chain(tr) {
        for (cell, w, g) in ws {
            rep.fail(label.clone(), cell, w, g);
        }
        rep.assume(assume.display(&at.charts[0]));
    }
    rep.detail("convention", CONVENTION);
    rep.detail("rank", format!("{}|{}", b.k, b.l));
    rep.detail("charts", n);
    rep.detail("pairs_checked", pairs.len());
    rep.detail("triples_checked", triples.len());
    rep.finish()
}

/// `m = (M_J(A^I)·id_J)⁻¹` over chart I.
pub fn canonical_cocycle(atlas: &Atlas, i: usize, j: usize) -> Result<(SuperMatrix, AssumptionSet)> {
    let ci = &atlas.charts[i];
    let cj = &atlas.charts[j];
    let mi = minor(&ci.a, &cj.index)?;
    if reduced_rank(&mi) < mi.rows() {
        return Err(Error::Singular(format!("{} and {} do not overlap", ci.index, cj.index)));
    }
    let b = smul(&mi, &pseudo_unit(&ci.ctx, &cj.index), &ci.nu)?;
    let mut assume = AssumptionSet::new();
    let m = invert(&b, &ci.nu, &mut assume)?;
    Ok((m, assume))
}

/// The canonical bundle Γ: `g_{IJ} = m_{IJ}` on every nonempty overlap.
pub fn canonical_bundle(atlas: &Atlas) -> Result<BundleCocycle> {
    let man = SuperManifoldAtlas::from_grassmannian(atlas)?;
    let keys: Vec<(usize, usize)> = man.overlaps.keys().copied().collect();
    let g = keys
        .par_iter()
        .map(|&(i, j)| canonical_cocycle(atlas, i, j).map(|(m, _)| ((i, j), m)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    BundleCocycle::new(man, atlas.spec.k, atlas.spec.l, g)
}

/// Coefficient rows of one global section, one per chart.
#[derive(Clone, Debug)]
pub struct SectionRep {
    pub coeffs: Vec<Vec<SuperElement>>,
}

/// `λ^α = φ*_{αβ}(λ^β) · g_{αβ}` on every intersecting pair.
pub fn verify_section(b: &BundleCocycle, s: &SectionRep) -> Result<Report> {
    let at = &b.atlas;
    if s.coeffs.len() != at.len() || s.coeffs.iter().any(|c| c.len() != b.k + b.l) {
        return Err(Error::DimensionMismatch("one coefficient row of length k+l per chart".into()));
    }
    let mut rep = ReportBuilder::new("bundle.verify_section");
    let mut checked = 0usize;
    for (&(x, y), g) in &b.g {
        checked += 1;
        let ov = &at.overlaps[&(x, y)];
        let mut assume = ov.assumptions.clone();
        let pulled = s.coeffs[y]
            .iter()
            .map(|e| ov.subst.apply(e, &mut assume).map(FormalEntry::Ring))
            .collect::<Result<Vec<_>>>()?;
        let mut got = Vec::with_capacity(b.k + b.l);
        for c in 0..b.k + b.l {
            let mut acc = FormalEntry::zero(&at.charts[x]);
            for t in 0..b.k + b.l {
                let p = entry_mul(&pulled[t], g.get(t, c), &at.nus[x])?;
                acc = entry_add(&acc, &p)?;
            }
            got.push(acc);
        }
        for (c, e) in got.iter().enumerate() {
            if !e.equals(&FormalEntry::Ring(s.coeffs[x][c].clone())) {
                rep.fail(
                    format!("alpha={} beta={}", at.labels[x], at.labels[y]),
                    format!("coefficient {}", c + 1),
                    s.coeffs[x][c].to_string(),
                    e.to_string(),
                );
            }
        }
        rep.assume(assume.display(&at.charts[x]));
    }
    rep.detail("overlaps_checked", checked);
    Ok(rep.finish())
}

/// Chart-level data of a morphism `σ: source → target`.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub source: SuperManifoldAtlas,
    /// Target chart hit by each source chart.
    pub assign: Vec<usize>,
    /// `σ*_α`: generators of target chart `assign[α]` ↦ functions on source chart α.
    pub maps: Vec<Substitution>,
}

impl Morphism {
    pub fn new(source: SuperManifoldAtlas, assign: Vec<usize>, maps: Vec<Substitution>) -> Result<Self> {
        if assign.len() != source.len() || maps.len() != source.len() {
            return Err(Error::DimensionMismatch("one target chart and map per source chart".into()));
        }
        for (a, m) in maps.iter().enumerate() {
            if !crate::algebra::context::same_ctx(&m.target, &source.charts[a]) {
                return Err(Error::ContextMismatch(format!("sigma on chart {}", source.labels[a])));
            }
        }
        Ok(Morphism { source, assign, maps })
    }

    /// Identity morphism of an atlas.
    pub fn identity(atlas: &SuperManifoldAtlas) -> Self {
        Morphism {
            source: atlas.clone(),
            assign: (0..atlas.len()).collect(),
            maps: atlas.charts.iter().map(Substitution::identity).collect(),
        }
    }

    /// `self ∘ tau`: first `tau: L → M`, then `self: M → N`.
    pub fn after(&self, tau: &Morphism) -> Result<Morphism> {
        let mut assume = AssumptionSet::new();
        let mut maps = Vec::with_capacity(tau.source.len());
        let mut assign = Vec::with_capacity(tau.source.len());
        for (g, t) in tau.maps.iter().enumerate() {
            let mid = tau.assign[g];
            maps.push(self.maps[mid].then(t, &mut assume)?);
            assign.push(self.assign[mid]);
        }
        Morphism::new(tau.source.clone(), assign, maps)
    }
}

/// `σ*E`: entries of each `g` sent through the chart maps of `σ`.
pub fn pullback(b: &BundleCocycle, sigma: &Morphism) -> Result<BundleCocycle> {
    let src = &sigma.source;
    let mut g = BTreeMap::new();
    for &(x, y) in src.overlaps.keys() {
        let (tx, ty) = (sigma.assign[x], sigma.assign[y]);
        let m = b.get(tx, ty).ok_or_else(|| {
            Error::Singular(format!(
                "source charts {} and {} meet but their targets {} and {} do not",
                src.labels[x], src.labels[y], b.atlas.labels[tx], b.atlas.labels[ty]
            ))
        })?;
        let mut assume = AssumptionSet::new();
        g.insert((x, y), m.substitute(&sigma.maps[x], &mut assume)?);
    }
    BundleCocycle::new(src.clone(), b.k, b.l, g)
}

/// `φ*_{αβ}(T_β) · g^A_{αβ} = g^B_{αβ} · T_α` on every overlap, and each `T_α` invertible.
pub fn bundle_iso_check(a: &BundleCocycle, b: &BundleCocycle, t: &[SuperMatrix]) -> Result<Report> {
    if (a.k, a.l) != (b.k, b.l) {
        return Err(Error::Precondition(format!(
            "ranks differ: {}|{} vs {}|{}",
            a.k, a.l, b.k, b.l
        )));
    }
    if a.atlas.len() != b.atlas.len() || t.len() != a.atlas.len() {
        return Err(Error::Precondition("bundles and T must share one atlas".into()));
    }
    let at = &a.atlas;
    let mut rep = ReportBuilder::new("bundle.iso_check");
    for (x, tx) in t.iter().enumerate() {
        let mut assume = AssumptionSet::new();
        let ok = reduced_rank(tx) == tx.rows() && invert(tx, &at.nus[x], &mut assume).is_ok();
        if !ok {
            rep.fail(format!("T({})", at.labels[x]), "invertible", "yes", "no");
        }
        rep.assume(assume.display(&at.charts[x]));
    }
    let mut checked = 0usize;
    for (&(x, y), ga) in &a.g {
        let Some(gb) = b.get(x, y) else {
            rep.fail(format!("alpha={} beta={}", at.labels[x], at.labels[y]), "overlap", "present in both", "missing");
            continue;
        };
        checked += 1;
        let mut assume = AssumptionSet::new();
        let label = format!("alpha={} beta={}", at.labels[x], at.labels[y]);
        let lhs = pull_mul(at, x, y, &t[y], ga, &mut assume);
        let rhs = smul(gb, &t[x], &at.nus[x]);
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                for (cell, w, g) in cell_witnesses(&l, &r) {
                    rep.fail(label.clone(), cell, w, g);
                }
            }
            (Err(e), _) | (_, Err(e)) => rep.fail(label, "product", "defined", e.to_string()),
        }
        rep.assume(assume.display(&at.charts[x]));
    }
    rep.detail("convention", CONVENTION);
    rep.detail("overlaps_checked", checked);
    Ok(rep.finish())
}
