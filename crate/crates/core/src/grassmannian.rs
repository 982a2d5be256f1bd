//! ν-Grassmannian atlases: chart matrices, transition homomorphisms and gluing checks.

use crate::algebra::{AssumptionSet, Ctx, GeneratorContext, Substitution, SuperElement};
use crate::error::{Error, Result};
use crate::nu::{FormalEntry, NuInvolution};
use crate::report::{Report, ReportBuilder};
use crate::supermatrix::{invert, minor, pseudo_unit, reduced_rank, smul, MultiIndex, SuperMatrix};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `(k|l)`-planes in `m|n` space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GrassSpec {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub n: usize,
}

impl GrassSpec {
    pub fn new(k: usize, l: usize, m: usize, n: usize) -> Result<Self> {
        // k = m and l = n give the one-chart point used by single-chart Gauss data
        if k > m {
            return Err(Error::Precondition(format!("need k <= m, got k={k}, m={m}")));
        }
        if l > n {
            return Err(Error::Precondition(format!("need l <= n, got l={l}, n={n}")));
        }
        if k + l == 0 {
            return Err(Error::Precondition("need k + l > 0".into()));
        }
        Ok(GrassSpec { k, l, m, n })
    }

    pub fn p(&self) -> usize {
        self.k * (self.m - self.k) + self.l * (self.n - self.l)
    }

    pub fn q(&self) -> usize {
        self.k * (self.n - self.l) + self.l * (self.m - self.k)
    }

    pub fn index(&self, idx: Vec<usize>) -> Result<MultiIndex> {
        MultiIndex::new(idx, self.k, self.l, self.m, self.n)
    }

    pub fn all_indices(&self) -> Vec<MultiIndex> {
        MultiIndex::all(self.k, self.l, self.m, self.n)
    }
}

impl std::fmt::Display for GrassSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.k, self.l, self.m, self.n)
    }
}

/// Location of a chart generator in `A^I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub wrapped: bool,
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub spec: GrassSpec,
    pub index: MultiIndex,
    pub ctx: Ctx,
    pub a: SuperMatrix,
    pub nu: NuInvolution,
    /// Cells of the even generators followed by the odd ones.
    pub cells: Vec<Cell>,
}

impl Chart {
    pub fn label(&self) -> String {
        self.index.to_string()
    }

    /// Cell holding generator `g` (even generators first, then odd).
    pub fn cell_of(&self, g: usize) -> Cell {
        self.cells[g]
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.ctx.all_names().cloned().collect()
    }
}

/// Chart matrix `A^I` on a given context with a given ν.
pub fn coordinate_matrix_on(spec: GrassSpec, idx: &MultiIndex, ctx: &Ctx, nu: &NuInvolution) -> Result<Chart> {
    // first (m−k) free columns: k x's then l e's; the rest: k e's then l x's
    layout(spec, idx, ctx, nu, |_, j| j < spec.m - spec.k)
}

/// `kinds(c, j)` says whether free column `c` (1-based, `j`-th free) holds
/// `k` x's then `l` e's (first kind) or `k` e's then `l` x's.
fn layout(
    spec: GrassSpec,
    idx: &MultiIndex,
    ctx: &Ctx,
    nu: &NuInvolution,
    kinds: impl Fn(usize, usize) -> bool,
) -> Result<Chart> {
    if idx.k != spec.k || idx.l != spec.l || idx.m != spec.m || idx.n != spec.n {
        return Err(Error::InvalidIndex(format!("{idx} does not belong to {spec}")));
    }
    let (p, q) = (spec.p(), spec.q());
    if ctx.p() != p || ctx.q() != q {
        return Err(Error::GeneratorCount(format!(
            "chart context has {}|{} generators, expected {p}|{q}",
            ctx.p(),
            ctx.q()
        )));
    }
    let rows = spec.k + spec.l;
    let pu = pseudo_unit(ctx, idx);
    let mut a = SuperMatrix::zeros(ctx, spec.k, spec.l, spec.m, spec.n);
    for (pos, &c) in idx.indices.iter().enumerate() {
        for r in 0..rows {
            a.set(r, c - 1, pu.get(r, pos).clone());
        }
    }
    let free: Vec<usize> = (1..=spec.m + spec.n).filter(|c| !idx.contains(*c)).collect();
    let mut cells = vec![
        Cell {
            row: 0,
            col: 0,
            wrapped: false
        };
        p + q
    ];
    let (mut nx, mut ne) = (0usize, 0usize);
    for (j, &c) in free.iter().enumerate() {
        let first_kind = kinds(c, j);
        for r in 0..rows {
            let take_x = (r < spec.k) == first_kind;
            let (g, elem) = if take_x {
                let g = nx;
                nx += 1;
                (g, SuperElement::even_gen(ctx, g))
            } else {
                let g = ne;
                ne += 1;
                (p + g, SuperElement::odd_gen(ctx, g))
            };
            let content_parity: u8 = if take_x { 0 } else { 1 };
            let wrapped = content_parity != a.block_parity(r, c - 1);
            let e = if wrapped { nu.apply(&elem)? } else { elem };
            a.set(r, c - 1, FormalEntry::Ring(e));
            cells[g] = Cell {
                row: r,
                col: c - 1,
                wrapped,
            };
        }
    }
    if nx != p || ne != q {
        return Err(Error::GeneratorCount(format!(
            "chart {idx} consumed {nx}|{ne} generators, expected {p}|{q}"
        )));
    }
    a.check_parity()?;
    Ok(Chart {
        spec,
        index: idx.clone(),
        ctx: ctx.clone(),
        a,
        nu: nu.clone(),
        cells,
    })
}

/// Chart `idx` extending a layout from a smaller level: even generator `i`
/// sits in cell `even[i]`, odd generator `j` in `odd[j]`, and the remaining
/// generators follow in column order. A column holding a pinned cell keeps
/// the kind that cell implies; other even columns are of the first kind and
/// other odd columns of the second.
pub fn coordinate_matrix_pinned(
    spec: GrassSpec,
    idx: &MultiIndex,
    ctx: &Ctx,
    nu: &NuInvolution,
    even: &[(usize, usize)],
    odd: &[(usize, usize)],
) -> Result<Chart> {
    let k = spec.k;
    let kinds = |c: usize, _| {
        if let Some(&(r, _)) = even.iter().find(|x| x.1 == c - 1) {
            r < k
        } else if let Some(&(r, _)) = odd.iter().find(|x| x.1 == c - 1) {
            r >= k
        } else {
            c <= spec.m
        }
    };
    let mut chart = layout(spec, idx, ctx, nu, kinds)?;
    let (p, q) = (spec.p(), spec.q());
    let reorder = |pinned: &[(usize, usize)], cells: &[Cell], kind: &str| -> Result<Vec<Cell>> {
        let mut out = Vec::with_capacity(cells.len());
        for &(r, c) in pinned {
            let cell = cells
                .iter()
                .find(|x| x.row == r && x.col == c)
                .ok_or_else(|| Error::Precondition(format!("cell ({}, {}) of {idx} holds no {kind} generator", r + 1, c + 1)))?;
            if out.contains(cell) {
                return Err(Error::Precondition(format!("cell ({}, {}) pinned twice", r + 1, c + 1)));
            }
            out.push(*cell);
        }
        out.extend(cells.iter().filter(|x| !out.contains(x)).copied().collect::<Vec<_>>());
        Ok(out)
    };
    let mut cells = reorder(even, &chart.cells[..p], "even")?;
    cells.extend(reorder(odd, &chart.cells[p..], "odd")?);
    for (g, cell) in cells.iter().enumerate() {
        let elem = if g < p {
            SuperElement::even_gen(ctx, g)
        } else {
            SuperElement::odd_gen(ctx, g - p)
        };
        let e = if cell.wrapped { nu.apply(&elem)? } else { elem };
        chart.a.set(cell.row, cell.col, FormalEntry::Ring(e));
    }
    debug_assert_eq!(cells.len(), p + q);
    chart.cells = cells;
    chart.a.check_parity()?;
    Ok(chart)
}

/// Chart `A^I` on the standard context `x1..xp, e1..eq` with the toggle ν.
pub fn coordinate_matrix(spec: GrassSpec, idx: &MultiIndex) -> Result<Chart> {
    let ctx = GeneratorContext::standard(spec.p(), spec.q())?;
    let nu = NuInvolution::toggle_first(&ctx);
    coordinate_matrix_on(spec, idx, &ctx, &nu)
}

/// `φ*_IJ`: images of chart-J generators as functions on chart I.
#[derive(Clone, Debug)]
pub struct Transition {
    pub from: MultiIndex,
    pub to: MultiIndex,
    pub subst: Substitution,
    pub assumptions: AssumptionSet,
}

/// Ring value of an entry, reading 1ν as ν(1).
pub fn materialize(e: &FormalEntry, ctx: &Ctx, nu: &NuInvolution) -> Result<SuperElement> {
    match e {
        FormalEntry::Ring(a) => Ok(a.clone()),
        FormalEntry::NuUnit => nu.apply(&SuperElement::one(ctx)),
    }
}

/// First cell where `a` and `b` differ once formal units are read as ν(1).
pub fn first_difference_formal(a: &SuperMatrix, b: &SuperMatrix, nu: &NuInvolution) -> Result<Option<(usize, usize)>> {
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            let (x, y) = (a.get(r, c), b.get(r, c));
            if x.equals(y) {
                continue;
            }
            if !materialize(x, &a.ctx, nu)?.equals(&materialize(y, &b.ctx, nu)?, None) {
                return Ok(Some((r, c)));
            }
        }
    }
    Ok(None)
}

/// Transition from chart `ci` (I) to chart `cj` (J).
pub fn transition(ci: &Chart, cj: &Chart) -> Result<Transition> {
    let mut assume = AssumptionSet::new();
    let pj = pseudo_unit(&ci.ctx, &cj.index);
    let mi = minor(&ci.a, &cj.index)?;
    if reduced_rank(&mi) < mi.rows() {
        return Err(Error::Singular(format!(
            "reduced minor of {} at {} is singular (empty overlap)",
            ci.index, cj.index
        )));
    }
    let b = smul(&mi, &pj, &ci.nu)?;
    let binv = invert(&b, &ci.nu, &mut assume).map_err(|e| match e {
        Error::Singular(s) => Error::EliminationStalled(s),
        other => other,
    })?;
    let l = smul(&binv, &ci.a, &ci.nu)?;
    let mj = minor(&l, &cj.index)?;
    if let Some((r, c)) = first_difference_formal(&mj, &pj, &ci.nu)? {
        return Err(Error::Precondition(format!(
            "minor of the transported matrix at {} differs from the pseudo-unit at ({}, {}): {}",
            cj.index,
            r + 1,
            c + 1,
            mj.get(r, c)
        )));
    }
    let (p, q) = (cj.ctx.p(), cj.ctx.q());
    let mut imgs = Vec::with_capacity(p + q);
    for g in 0..p + q {
        let cell = cj.cell_of(g);
        // a formal unit landing on a generator cell is read as the ring element ν(1)
        let lc = materialize(l.get(cell.row, cell.col), &ci.ctx, &ci.nu)?;
        imgs.push(if cell.wrapped { ci.nu.apply(&lc)? } else { lc });
    }
    let odd = imgs.split_off(p);
    let subst = Substitution::new(&cj.ctx, &ci.ctx, imgs, odd)?;
    Ok(Transition {
        from: ci.index.clone(),
        to: cj.index.clone(),
        subst,
        assumptions: assume,
    })
}

/// All charts of a ν-Grassmannian on one shared context.
#[derive(Clone, Debug)]
pub struct Atlas {
    pub spec: GrassSpec,
    pub ctx: Ctx,
    pub nu: NuInvolution,
    pub charts: Vec<Chart>,
}

impl Atlas {
    pub fn build(spec: GrassSpec) -> Result<Atlas> {
        let ctx = GeneratorContext::standard(spec.p(), spec.q())?;
        let nu = NuInvolution::toggle_first(&ctx);
        Atlas::build_with(spec, &ctx, &nu)
    }

    pub fn build_with(spec: GrassSpec, ctx: &Ctx, nu: &NuInvolution) -> Result<Atlas> {
        let charts = spec
            .all_indices()
            .iter()
            .map(|i| coordinate_matrix_on(spec, i, ctx, nu))
            .collect::<Result<Vec<_>>>()?;
        Ok(Atlas {
            spec,
            ctx: ctx.clone(),
            nu: nu.clone(),
            charts,
        })
    }

    pub fn chart(&self, idx: &MultiIndex) -> Option<&Chart> {
        self.charts.iter().find(|c| &c.index == idx)
    }

    pub fn position(&self, idx: &MultiIndex) -> Option<usize> {
        self.charts.iter().position(|c| &c.index == idx)
    }

    pub fn transition(&self, i: usize, j: usize) -> Result<Transition> {
        transition(&self.charts[i], &self.charts[j])
    }
}

#[derive(Clone, Debug, Default)]
pub struct GluingOptions {
    /// Number of pairs and triples to sample when there are more than [`EXHAUSTIVE_LIMIT`].
    pub sample: Option<usize>,
    pub seed: u64,
    /// Negate the image of one generator in `φ*_IJ` (negative control).
    pub corrupt: Option<(MultiIndex, MultiIndex, String)>,
}

/// Tuples are checked exhaustively up to this many.
pub const EXHAUSTIVE_LIMIT: usize = 200;

fn pick<T>(mut all: Vec<T>, sample: Option<usize>, rng: &mut ChaCha8Rng) -> (Vec<T>, bool) {
    if all.len() <= EXHAUSTIVE_LIMIT {
        return (all, true);
    }
    all.shuffle(rng);
    all.truncate(sample.unwrap_or(EXHAUSTIVE_LIMIT));
    (all, false)
}

fn corrupt_transition(t: &mut Transition, g: &str) {
    match t.subst.source.lookup(g) {
        Some((false, v)) => t.subst.even[v] = t.subst.even[v].neg(),
        Some((true, v)) => t.subst.odd[v] = t.subst.odd[v].neg(),
        None => {}
    }
}

/// Every ordered transition of the atlas, computed in parallel.
pub fn all_transitions(atlas: &Atlas) -> BTreeMap<(usize, usize), Result<Transition>> {
    let n = atlas.charts.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    pairs
        .into_par_iter()
        .map(|(i, j)| ((i, j), atlas.transition(i, j)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Check `φ*_II = id`, `φ*_IJ∘φ*_JI = id` and `φ*_IK∘φ*_KJ∘φ*_JI = id`
/// on every pair and triple whose overlaps are nonempty (sampled when large).
pub fn verify_gluing(atlas: &Atlas, opts: &GluingOptions) -> Report {
    let mut rep = ReportBuilder::new("atlas.verify_gluing");
    let n = atlas.charts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trans = all_transitions(atlas);
    if let Some((ci, cj, g)) = &opts.corrupt {
        if let (Some(i), Some(j)) = (atlas.position(ci), atlas.position(cj)) {
            if let Some(Ok(t)) = trans.get_mut(&(i, j)) {
                corrupt_transition(t, g);
            }
        }
    }
    let label = |i: usize| atlas.charts[i].label();
    let ok = |i: usize, j: usize| matches!(trans.get(&(i, j)), Some(Ok(_)));

    let mut empty = 0usize;
    for ((i, j), t) in &trans {
        match t {
            Err(Error::Singular(_)) => empty += 1,
            Err(e) => rep.fail(
                format!("I={} J={}", label(*i), label(*j)),
                "transition",
                "a transition or an empty overlap",
                format!("{} ({})", e, e.code()),
            ),
            Ok(tr) => {
                let ch = &atlas.charts[*i];
                rep.assume(
                    tr.assumptions
                        .display(&ch.ctx)
                        .into_iter()
                        .map(|s| format!("chart {}: {s}", ch.label())),
                );
            }
        }
    }

    for i in 0..n {
        match trans.get(&(i, i)) {
            Some(Ok(t)) => {
                for (g, got, want) in t.subst.diff(&Substitution::identity(&atlas.ctx), None) {
                    rep.fail(format!("I=J={}", label(i)), g, want.to_string(), got.to_string());
                }
            }
            _ => rep.fail(format!("I=J={}", label(i)), "transition", "identity", "missing"),
        }
    }

    let mut one_sided = 0usize;
    let mut eligible_pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            match (ok(i, j), ok(j, i)) {
                (true, true) => eligible_pairs.push((i, j)),
                (true, false) => one_sided += 1,
                _ => {}
            }
        }
    }
    let mut eligible_triples = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k && ok(j, i) && ok(k, j) && ok(i, k) {
                    eligible_triples.push((i, j, k));
                }
            }
        }
    }
    let (pairs, pairs_exhaustive) = pick(eligible_pairs, opts.sample, &mut rng);
    let (triples, triples_exhaustive) = pick(eligible_triples, opts.sample, &mut rng);

    // composite of the listed transitions, applied first to last
    let check = |steps: &[(usize, usize)]| -> (Vec<(String, String, String)>, AssumptionSet) {
        let mut assume = AssumptionSet::new();
        let mut s = trans[&steps[0]].as_ref().expect("eligible").subst.clone();
        for st in &steps[1..] {
            let next = &trans[st].as_ref().expect("eligible").subst;
            match s.then(next, &mut assume) {
                Ok(c) => s = c,
                Err(e) => return (vec![("composition".into(), "defined".into(), e.to_string())], assume),
            }
        }
        let id = Substitution::identity(&s.source);
        let diffs = s
            .diff(&id, None)
            .into_iter()
            .map(|(g, got, want)| (g, want.to_string(), got.to_string()))
            .collect();
        (diffs, assume)
    };

    let pair_results: Vec<_> = pairs.par_iter().map(|&(i, j)| (i, j, check(&[(j, i), (i, j)]))).collect();
    for (i, j, (diffs, assume)) in pair_results {
        let ch = &atlas.charts[i];
        rep.assume(assume.display(&ch.ctx).into_iter().map(|s| format!("chart {}: {s}", ch.label())));
        for (g, want, got) in diffs {
            rep.fail(format!("I={} J={}", label(i), label(j)), g, want, got);
        }
    }
    let triple_results: Vec<_> = triples
        .par_iter()
        .map(|&(i, j, k)| (i, j, k, check(&[(j, i), (k, j), (i, k)])))
        .collect();
    for (i, j, k, (diffs, assume)) in triple_results {
        let ch = &atlas.charts[i];
        rep.assume(assume.display(&ch.ctx).into_iter().map(|s| format!("chart {}: {s}", ch.label())));
        for (g, want, got) in diffs {
            rep.fail(format!("I={} J={} K={}", label(i), label(j), label(k)), g, want, got);
        }
    }

    rep.detail("spec", atlas.spec.to_string());
    rep.detail("charts", n);
    rep.detail("identities_checked", n);
    rep.detail("pairs_checked", pairs.len());
    rep.detail("triples_checked", triples.len());
    rep.detail("pairs_exhaustive", pairs_exhaustive);
    rep.detail("triples_exhaustive", triples_exhaustive);
    rep.detail("empty_overlaps", empty);
    rep.detail("one_sided_overlaps", one_sided);
    rep.detail("seed", opts.seed);
    rep.finish()
}
