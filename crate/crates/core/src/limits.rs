//! Finite truncations of the limit constructions: towers of ν-Grassmannians
//! joined by inclusion homomorphisms, compatible section families, the
//! commuting squares, the universality map `T` and the reduced embedding.
//!
//! Levels of a [`Tower`] number their chart generators compatibly. On a chart
//! that comes from the level below, the generators of that level keep their
//! indices and the new ones follow, so the inclusion homomorphism is literally
//! "shared generators fixed, the rest to 0". With the default column-order
//! numbering the toggle ν would not commute with it on ν-charts.

use crate::algebra::{AssumptionSet, GeneratorContext, PartitionRelation, Substitution, SuperElement};
use crate::bundle::{canonical_cocycle, BundleCocycle};
use crate::error::{Error, Result};
use crate::gauss::{
    classifying_morphism, frame_to_chart, gauss_morphism, gauss_supermatrix, verify_pullback_iso, PartitionOfUnity,
};
use crate::grassmannian::{coordinate_matrix_on, coordinate_matrix_pinned, first_difference_formal, Atlas, GrassSpec};
use crate::homotopy::{embed_columns, index_map, induced_chart_hom, Inclusion};
use crate::nu::{FormalEntry, NuInvolution};
use crate::report::{Report, ReportBuilder};
use crate::supermatrix::{minor, reduced_rank, smul, MultiIndex, SuperMatrix};
use rayon::prelude::*;

/// `ι*_I` on one chart of the larger level.
#[derive(Clone, Debug)]
pub enum InclusionHom {
    Map(Substitution),
    /// `I ⊈ {1..m} ∪ {m′+1..m′+n}`: the chart misses the smaller level.
    Zero,
}

impl InclusionHom {
    pub fn map(&self) -> Option<&Substitution> {
        match self {
            InclusionHom::Map(s) => Some(s),
            InclusionHom::Zero => None,
        }
    }
}

fn plain(hi: GrassSpec) -> Inclusion {
    Inclusion::Plain { m: hi.m, n: hi.n }
}

/// Index of the smaller level whose image is `idx`, if `idx` lies in the allowed set.
pub fn preimage(lo: GrassSpec, idx: &MultiIndex) -> Option<MultiIndex> {
    let (m, n, m2) = (lo.m, lo.n, idx.m);
    let cols = idx
        .indices
        .iter()
        .map(|&c| {
            if c <= m {
                Some(c)
            } else if c > m2 && c <= m2 + n {
                Some(c - (m2 - m))
            } else {
                None
            }
        })
        .collect::<Option<Vec<_>>>()?;
    MultiIndex::new(cols, lo.k, lo.l, m, n).ok()
}

fn check_levels(lo: GrassSpec, hi: GrassSpec) -> Result<()> {
    if (lo.k, lo.l) != (hi.k, hi.l) {
        return Err(Error::Precondition(format!("rank {}|{} vs {}|{}", lo.k, lo.l, hi.k, hi.l)));
    }
    if hi.m < lo.m || hi.n < lo.n {
        return Err(Error::Precondition(format!("{lo} does not include into {hi}")));
    }
    Ok(())
}

/// `ι*_I` from chart `pos` of `hi` to `lo`, read off geometrically:
/// the generator in cell `(r, c′)` goes to the entry of `J(A^I)` there.
/// Valid for any generator numbering.
pub fn inclusion_hom(lo: &Atlas, hi: &Atlas, pos: usize) -> Result<InclusionHom> {
    check_levels(lo.spec, hi.spec)?;
    let big = hi
        .charts
        .get(pos)
        .ok_or_else(|| Error::OutOfRange(format!("chart {pos} of {}", hi.spec)))?;
    let Some(small) = preimage(lo.spec, &big.index).and_then(|i| lo.chart(&i)) else {
        return Ok(InclusionHom::Zero);
    };
    induced_chart_hom(plain(hi.spec), small, big).map(InclusionHom::Map)
}

/// Levels `Gr(k|l, m_i|n_i)` with compatible generator numbering.
#[derive(Clone, Debug)]
pub struct Tower {
    pub k: usize,
    pub l: usize,
    pub levels: Vec<Atlas>,
}

fn lift_atlas(lo: &Atlas, spec: GrassSpec) -> Result<Atlas> {
    let ctx = GeneratorContext::standard(spec.p(), spec.q())?;
    let nu = NuInvolution::toggle_first(&ctx);
    let kind = plain(spec);
    let p = lo.spec.p();
    let charts = spec
        .all_indices()
        .par_iter()
        .map(|idx| {
            let Some(small) = preimage(lo.spec, idx).and_then(|s| lo.chart(&s)) else {
                return coordinate_matrix_on(spec, idx, &ctx, &nu);
            };
            let cells = small
                .cells
                .iter()
                .map(|c| Ok((c.row, kind.column(lo.spec.m, lo.spec.n, c.col + 1)? - 1)))
                .collect::<Result<Vec<_>>>()?;
            coordinate_matrix_pinned(spec, idx, &ctx, &nu, &cells[..p], &cells[p..])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Atlas { spec, ctx, nu, charts })
}

impl Tower {
    /// Levels must increase strictly in `m` and in `n`, except that a rank
    /// `k|0` tower may keep `n = 0` throughout.
    pub fn build(k: usize, l: usize, dims: &[(usize, usize)]) -> Result<Tower> {
        if dims.is_empty() {
            return Err(Error::Precondition("a tower needs at least one level".into()));
        }
        let reduced = l == 0 && dims.iter().all(|d| d.1 == 0);
        for w in dims.windows(2) {
            if w[1].0 <= w[0].0 || (w[1].1 <= w[0].1 && !reduced) {
                return Err(Error::Precondition(format!(
                    "levels {}|{} and {}|{} do not increase strictly",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        let mut levels: Vec<Atlas> = Vec::with_capacity(dims.len());
        for &(m, n) in dims {
            let spec = GrassSpec::new(k, l, m, n)?;
            let atlas = match levels.last() {
                None => Atlas::build(spec)?,
                Some(lo) => lift_atlas(lo, spec)?,
            };
            levels.push(atlas);
        }
        Ok(Tower { k, l, levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn spec(&self, level: usize) -> GrassSpec {
        self.levels[level].spec
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a > b || b >= self.depth() {
            return Err(Error::OutOfRange(format!("levels {a} → {b} of a depth-{} tower", self.depth())));
        }
        Ok(())
    }

    /// Image at level `b` of a chart index of level `a`.
    pub fn image(&self, a: usize, b: usize, idx: &MultiIndex) -> Result<MultiIndex> {
        self.check_pair(a, b)?;
        index_map(plain(self.spec(b)), idx)
    }

    /// Chart position at level `b` of the image of a level-`a` index.
    pub fn position(&self, a: usize, b: usize, idx: &MultiIndex) -> Result<usize> {
        let img = self.image(a, b, idx)?;
        self.levels[b]
            .position(&img)
            .ok_or_else(|| Error::InvalidIndex(format!("{img} is not a chart of {}", self.spec(b))))
    }

    /// `ι*` from chart `pos` of level `b` down to level `a`: the first `p_a`
    /// even and `q_a` odd generators are fixed, the others go to 0.
    pub fn inclusion_hom(&self, a: usize, b: usize, pos: usize) -> Result<InclusionHom> {
        self.check_pair(a, b)?;
        let (lo, hi) = (&self.levels[a], &self.levels[b]);
        let big = hi
            .charts
            .get(pos)
            .ok_or_else(|| Error::OutOfRange(format!("chart {pos} of {}", hi.spec)))?;
        if preimage(lo.spec, &big.index).is_none() {
            return Ok(InclusionHom::Zero);
        }
        let (p, q) = (lo.spec.p(), lo.spec.q());
        let zero = SuperElement::zero(&lo.ctx);
        let even = (0..hi.spec.p())
            .map(|i| if i < p { SuperElement::even_gen(&lo.ctx, i) } else { zero.clone() })
            .collect();
        let odd = (0..hi.spec.q())
            .map(|j| if j < q { SuperElement::odd_gen(&lo.ctx, j) } else { zero.clone() })
            .collect();
        Substitution::new(&hi.ctx, &lo.ctx, even, odd).map(InclusionHom::Map)
    }
}

/// Replace the image of one generator by `image + 1` (negative controls).
pub fn perturb(s: &Substitution, gen: &str) -> Result<Substitution> {
    let mut map = std::collections::BTreeMap::new();
    let mut found = false;
    for (name, v) in s.images() {
        let v = if name == gen {
            found = true;
            v.add(&SuperElement::one(v.ctx()))?
        } else {
            v.clone()
        };
        map.insert(name.clone(), v);
    }
    if !found {
        return Err(Error::UnknownIdentifier(gen.to_string()));
    }
    Substitution::from_map(&s.source, &s.target, &map)
}

/// Which pairs a square check visits and an optional corruption of `ι*`.
#[derive(Clone, Debug, Default)]
pub struct SquareOptions {
    /// Only this pair (smaller-level indices); all pairs otherwise.
    pub pair: Option<(MultiIndex, MultiIndex)>,
    /// Perturb the image of generator `.1` under `ι*` on the chart over `.0`.
    pub corrupt: Option<(MultiIndex, String)>,
}

struct SquareData {
    homs: Vec<Option<Substitution>>,
    pairs: Vec<(usize, usize)>,
}

fn square_data(lo: &Atlas, hi: &Atlas, opts: &SquareOptions) -> Result<SquareData> {
    check_levels(lo.spec, hi.spec)?;
    let kind = plain(hi.spec);
    let homs = lo
        .charts
        .par_iter()
        .map(|c| {
            let pos = hi
                .position(&index_map(kind, &c.index)?)
                .ok_or_else(|| Error::InvalidIndex(format!("image of {} is not a chart", c.index)))?;
            let h = inclusion_hom(lo, hi, pos)?.map().cloned();
            match (&opts.corrupt, h) {
                (Some((idx, g)), Some(s)) if *idx == c.index => perturb(&s, g).map(Some),
                (_, h) => Ok(h),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = match &opts.pair {
        Some((i, j)) => {
            let find = |x: &MultiIndex| {
                lo.position(x)
                    .ok_or_else(|| Error::InvalidIndex(format!("{x} is not a chart of {}", lo.spec)))
            };
            vec![(find(i)?, find(j)?)]
        }
        None => (0..lo.charts.len())
            .flat_map(|i| (0..lo.charts.len()).map(move |j| (i, j)))
            .collect(),
    };
    Ok(SquareData { homs, pairs })
}

fn big_pos(lo: &Atlas, hi: &Atlas, i: usize) -> usize {
    hi.position(&index_map(plain(hi.spec), &lo.charts[i].index).expect("checked in square_data"))
        .expect("checked in square_data")
}

enum PairOutcome {
    /// Overlap empty at both levels.
    Skipped,
    /// Overlap nonempty at exactly one level.
    OneSided(String),
    Checked(Vec<(String, String, String)>, Vec<String>),
}

fn finish_squares(mut rep: ReportBuilder, lo: &Atlas, hi: &Atlas, data: &SquareData, out: Vec<PairOutcome>) -> Report {
    let (mut checked, mut skipped) = (0usize, 0usize);
    for (&(i, j), o) in data.pairs.iter().zip(out) {
        let at = format!("I={} J={}", lo.charts[i].index, lo.charts[j].index);
        match o {
            PairOutcome::Skipped => skipped += 1,
            PairOutcome::OneSided(why) => rep.fail(at, "overlap", "nonempty at both levels", why),
            PairOutcome::Checked(bad, assume) => {
                checked += 1;
                rep.assume(assume);
                for (g, want, got) in bad {
                    rep.fail(at.clone(), g, want, got);
                }
            }
        }
    }
    rep.detail("source", lo.spec.to_string());
    rep.detail("target", hi.spec.to_string());
    rep.detail("pairs_checked", checked);
    rep.detail("pairs_without_overlap", skipped);
    rep.finish()
}

fn overlap_state(a: &Result<impl Sized>, b: &Result<impl Sized>) -> Option<PairOutcome> {
    let ea = matches!(a, Err(Error::Singular(_)));
    let eb = matches!(b, Err(Error::Singular(_)));
    match (ea, eb) {
        (true, true) => Some(PairOutcome::Skipped),
        (true, false) => Some(PairOutcome::OneSided("empty at the smaller level only".into())),
        (false, true) => Some(PairOutcome::OneSided("empty at the larger level only".into())),
        _ => None,
    }
}

/// `ι*_I ∘ φ′*_{IJ} = φ*_{IJ} ∘ ι*_J` on every generator of chart `J′`.
pub fn verify_inclusion_square(lo: &Atlas, hi: &Atlas, opts: &SquareOptions) -> Result<Report> {
    let data = square_data(lo, hi, opts)?;
    let out: Vec<PairOutcome> = data
        .pairs
        .par_iter()
        .map(|&(i, j)| {
            let small = lo.transition(i, j);
            let big = hi.transition(big_pos(lo, hi, i), big_pos(lo, hi, j));
            if let Some(o) = overlap_state(&small, &big) {
                return o;
            }
            let (Some(hom_i), Some(hom_j)) = (&data.homs[i], &data.homs[j]) else {
                return PairOutcome::Checked(vec![("iota*".into(), "defined".into(), "zero map".into())], vec![]);
            };
            let mut assume = AssumptionSet::new();
            let lhs = big.and_then(|t| t.subst.then(hom_i, &mut assume));
            let rhs = small.and_then(|t| hom_j.then(&t.subst, &mut assume));
            let bad = match (lhs, rhs) {
                (Ok(a), Ok(b)) => a
                    .diff(&b, None)
                    .into_iter()
                    .map(|(g, got, want)| (g, want.to_string(), got.to_string()))
                    .collect(),
                (Err(e), _) | (_, Err(e)) => vec![("composition".into(), "defined".into(), e.to_string())],
            };
            PairOutcome::Checked(bad, assume.display(&lo.ctx))
        })
        .collect();
    Ok(finish_squares(ReportBuilder::new("limits.inclusion_square"), lo, hi, &data, out))
}

/// Diagram (a4) on module generators: `ῑ*` sends `A′^J_t` to `A^J_t`, so the
/// square commutes iff `ι*_I(m′_{IJ}) = m_{IJ}`.
pub fn verify_bundle_square(lo: &Atlas, hi: &Atlas, opts: &SquareOptions) -> Result<Report> {
    let data = square_data(lo, hi, opts)?;
    let out: Vec<PairOutcome> = data
        .pairs
        .par_iter()
        .map(|&(i, j)| {
            let small = canonical_cocycle(lo, i, j);
            let big = canonical_cocycle(hi, big_pos(lo, hi, i), big_pos(lo, hi, j));
            if let Some(o) = overlap_state(&small, &big) {
                return o;
            }
            let Some(hom_i) = &data.homs[i] else {
                return PairOutcome::Checked(vec![("iota*".into(), "defined".into(), "zero map".into())], vec![]);
            };
            let mut assume = AssumptionSet::new();
            let res = big
                .and_then(|(m2, _)| m2.substitute(hom_i, &mut assume))
                .and_then(|pulled| {
                    let (m, a) = small?;
                    assume.extend(&a);
                    Ok((pulled, m))
                });
            let bad = match res {
                Ok((pulled, m)) => match first_difference_formal(&pulled, &m, &lo.nu) {
                    Ok(None) => vec![],
                    Ok(Some((r, c))) => vec![(
                        format!("m_IJ ({}, {})", r + 1, c + 1),
                        m.get(r, c).to_string(),
                        pulled.get(r, c).to_string(),
                    )],
                    Err(e) => vec![("m_IJ".into(), "comparable".into(), e.to_string())],
                },
                Err(e) => vec![("iota*(m'_IJ)".into(), "defined".into(), e.to_string())],
            };
            PairOutcome::Checked(bad, assume.display(&lo.ctx))
        })
        .collect();
    Ok(finish_squares(ReportBuilder::new("limits.bundle_square"), lo, hi, &data, out))
}

/// Both squares between every consecutive pair of tower levels.
pub fn verify_tower_squares(tower: &Tower) -> Result<Report> {
    let mut rep = ReportBuilder::new("limits.tower_squares");
    for w in tower.levels.windows(2) {
        let tag = format!("{}→{}", w[0].spec, w[1].spec);
        rep.absorb(&format!("{tag} inclusion"), &verify_inclusion_square(&w[0], &w[1], &SquareOptions::default())?);
        rep.absorb(&format!("{tag} bundle"), &verify_bundle_square(&w[0], &w[1], &SquareOptions::default())?);
    }
    rep.detail("levels", tower.depth());
    Ok(rep.finish())
}

/// `ι*_{b→c}` followed by `ι*_{a→b}` equals `ι*_{a→c}` for all `a < b < c`,
/// and each consecutive `ι*` agrees with the geometric one.
pub fn transitivity_check(tower: &Tower) -> Result<Report> {
    let mut rep = ReportBuilder::new("limits.transitivity");
    let d = tower.depth();
    let mut triples = 0usize;
    for c in 0..d {
        for pos in 0..tower.levels[c].charts.len() {
            let idx = &tower.levels[c].charts[pos].index;
            if c > 0 {
                let lit = tower.inclusion_hom(c - 1, c, pos)?;
                let geo = inclusion_hom(&tower.levels[c - 1], &tower.levels[c], pos)?;
                let at = format!("{} I={idx}", tower.spec(c));
                match (lit.map(), geo.map()) {
                    (None, None) => {}
                    (Some(x), Some(y)) => {
                        for (g, got, want) in x.diff(y, None) {
                            rep.fail(at.clone(), g, format!("{want} (geometric)"), got.to_string());
                        }
                    }
                    _ => rep.fail(at, "iota*", "same support", "zero on one side only"),
                }
            }
            for a in 0..c {
                for b in a + 1..c {
                    triples += 1;
                    let at = format!("levels {a}<{b}<{c} I={idx}");
                    let direct = tower.inclusion_hom(a, c, pos)?;
                    let via = match tower.inclusion_hom(b, c, pos)? {
                        InclusionHom::Zero => None,
                        InclusionHom::Map(s) => {
                            let mid = tower.levels[b]
                                .position(&preimage(tower.spec(b), idx).expect("nonzero ι*"))
                                .expect("chart");
                            match tower.inclusion_hom(a, b, mid)? {
                                InclusionHom::Zero => None,
                                InclusionHom::Map(t) => Some(s.then(&t, &mut AssumptionSet::new())?),
                            }
                        }
                    };
                    match (direct.map(), via) {
                        (None, None) => {}
                        (Some(x), Some(y)) => {
                            for (g, got, want) in y.diff(x, None) {
                                rep.fail(at.clone(), g, want.to_string(), got.to_string());
                            }
                        }
                        (x, _) => rep.fail(
                            at,
                            "iota*",
                            if x.is_some() { "nonzero" } else { "zero" }.to_string(),
                            "mismatch",
                        ),
                    }
                }
            }
        }
    }
    rep.detail("levels", d);
    rep.detail("triples_checked", triples);
    Ok(rep.finish())
}

/// A compatible family `(f_i)` on the images of one chart, with a chain of
/// nested opens `W_0 = V_chart ⊇ W_1 = W_0 ∩ V_{opens[0]} ⊇ …` whose
/// coordinates are those of the last chart intersected.
#[derive(Clone, Debug)]
pub struct TowerSection {
    /// Index at level 0.
    pub chart: MultiIndex,
    /// `f_i` over the context of level `i`.
    pub values: Vec<SuperElement>,
    /// Level-0 indices of the further charts intersected, in order.
    pub opens: Vec<MultiIndex>,
}

impl TowerSection {
    /// `f_i := ι*(f_{i+1})` from a section on the top level.
    pub fn pull_down(tower: &Tower, chart: &MultiIndex, top: SuperElement, opens: Vec<MultiIndex>) -> Result<Self> {
        let d = tower.depth();
        let mut values = vec![top];
        for b in (1..d).rev() {
            let pos = tower.position(0, b, chart)?;
            let hom = tower.inclusion_hom(b - 1, b, pos)?;
            let s = hom.map().expect("images of level-0 charts are allowed");
            let next = s.apply(values.last().expect("nonempty"), &mut AssumptionSet::new())?;
            values.push(next);
        }
        values.reverse();
        Ok(TowerSection {
            chart: chart.clone(),
            values,
            opens,
        })
    }

    /// `p_i`: the component at level `i`.
    pub fn project(&self, level: usize) -> Option<&SuperElement> {
        self.values.get(level)
    }
}

/// `ι*(f_{i+1}) = f_i` at each consecutive pair, the presheaf axioms
/// `r_{WW} = id` and `r_{UV}∘r_{VW} = r_{UW}` along the declared chain at
/// every level, and compatibility of the restricted families.
pub fn tower_section_check(tower: &Tower, s: &TowerSection) -> Result<Report> {
    let d = tower.depth();
    if d < 2 || s.values.len() != d {
        return Err(Error::Precondition(format!(
            "section has {} levels, tower has {d} (need at least 2)",
            s.values.len()
        )));
    }
    for (i, v) in s.values.iter().enumerate() {
        if !crate::algebra::context::same_ctx(v.ctx(), &tower.levels[i].ctx) {
            return Err(Error::ContextMismatch(format!("f_{} is not over level {i}", i + 1)));
        }
    }
    let mut rep = ReportBuilder::new("limits.tower_section");
    let homes: Vec<&MultiIndex> = std::iter::once(&s.chart).chain(s.opens.iter()).collect();
    // restricted[u][i]: f_i restricted to W_u, in the coordinates of its home chart
    let mut restricted: Vec<Vec<Option<SuperElement>>> = vec![vec![None; d]; homes.len()];
    let mut axioms = 0usize;
    for i in 0..d {
        let atlas = &tower.levels[i];
        let pos = homes
            .iter()
            .map(|h| tower.position(0, i, h))
            .collect::<Result<Vec<_>>>()?;
        let restrict = |from: usize, to: usize, f: &SuperElement| -> Result<SuperElement> {
            atlas.transition(pos[to], pos[from])?.subst.apply(f, &mut AssumptionSet::new())
        };
        let f = &s.values[i];
        for u in 0..homes.len() {
            let at = format!("level {} W_{u}", i + 1);
            let r = if u == 0 {
                axioms += 1;
                match restrict(0, 0, f) {
                    Ok(g) if g == *f => {}
                    Ok(g) => rep.fail(at.clone(), "r_WW(f)", f.to_string(), g.to_string()),
                    Err(e) => rep.fail(at.clone(), "r_WW", "defined", e.to_string()),
                }
                Ok(f.clone())
            } else {
                restrict(0, u, f)
            };
            match r {
                Ok(g) => restricted[u][i] = Some(g),
                Err(e) => rep.fail(at, "restriction", "defined (nested opens)", e.to_string()),
            }
        }
        for t in 1..homes.len() {
            for u in t + 1..homes.len() {
                let (Some(ft), Some(fu)) = (&restricted[t][i], &restricted[u][i]) else {
                    continue;
                };
                axioms += 1;
                let at = format!("level {} W_{t} ⊇ W_{u}", i + 1);
                match restrict(t, u, ft) {
                    Ok(g) if g == *fu => {}
                    Ok(g) => rep.fail(at, "r_UV∘r_VW(f)", fu.to_string(), g.to_string()),
                    Err(e) => rep.fail(at, "r_UV", "defined", e.to_string()),
                }
            }
        }
    }
    let mut pairs = 0usize;
    for (u, h) in homes.iter().enumerate() {
        for i in 0..d - 1 {
            let (Some(lo), Some(hi)) = (&restricted[u][i], &restricted[u][i + 1]) else {
                continue;
            };
            pairs += 1;
            let at = format!("W_{u} levels {}→{}", i + 1, i + 2);
            let hom = tower.inclusion_hom(i, i + 1, tower.position(0, i + 1, h)?)?;
            let s = hom.map().expect("images of level-0 charts are allowed");
            match s.apply(hi, &mut AssumptionSet::new()) {
                Ok(g) if g == *lo => {}
                Ok(g) => rep.fail(at, format!("iota*(f_{})", i + 2), lo.to_string(), g.to_string()),
                Err(e) => rep.fail(at, "iota*", "defined", e.to_string()),
            }
        }
    }
    rep.detail("depth", d);
    rep.detail("opens", homes.len());
    rep.detail("compatibility_checks", pairs);
    rep.detail("axiom_checks", axioms);
    Ok(rep.finish())
}

fn diff_cells(
    rep: &mut ReportBuilder,
    at: &str,
    got: &SuperMatrix,
    want: &SuperMatrix,
    rel: Option<&PartitionRelation>,
) {
    for r in 0..got.rows() {
        for c in 0..got.cols() {
            let same = match (got.get(r, c), want.get(r, c)) {
                (FormalEntry::Ring(a), FormalEntry::Ring(b)) => a.equals(b, rel),
                (x, y) => x.equals(y),
            };
            if !same {
                rep.fail(
                    at,
                    format!("({}, {})", r + 1, c + 1),
                    want.get(r, c).to_string(),
                    got.get(r, c).to_string(),
                );
            }
        }
    }
}

/// Basis `(s^c)` at one level: row `c` of `A^I`, with the last row replaced
/// by the first (or by 0 in rank 1) when corrupted.
fn basis(a: &SuperMatrix, corrupt: bool) -> SuperMatrix {
    let mut b = a.clone();
    if corrupt {
        let last = b.rows() - 1;
        for c in 0..b.cols() {
            let v = if last == 0 {
                FormalEntry::Ring(SuperElement::zero(&b.ctx))
            } else {
                b.get(0, c).clone()
            };
            b.set(last, c, v);
        }
    }
    b
}

/// Universality of the tower on a truncation.
///
/// The bundle is classified at level `t` (its chart count); the tower starts
/// there and continues from `level` for `depth` levels. Checked: the frames
/// `(A^I_c)` are compatible under `ῑ*`, `T` is injective on each basis
/// (rank `k+l` at `I`), the pullback isomorphism at level `t`, and at every
/// higher level the composite `ι*∘σ_I` classifies `J(G)` and carries the
/// same `δ`.
pub fn universality_check(
    b: &BundleCocycle,
    level: (usize, usize),
    depth: usize,
    corrupt_basis: bool,
) -> Result<Report> {
    let (k, l, t) = (b.k, b.l, b.atlas.len());
    let base = (t * k, t * l);
    if depth == 0 || level.0 < base.0 || level.1 < base.1 || (l == 0 && level.1 != 0) {
        return Err(Error::Precondition(format!(
            "level {}|{} with depth {depth} does not extend the classifying level {}|{}",
            level.0, level.1, base.0, base.1
        )));
    }
    let step = usize::from(l > 0);
    let mut dims: Vec<(usize, usize)> = (0..depth).map(|s| (level.0 + s, level.1 + s * step)).collect();
    if dims[0] != base {
        dims.insert(0, base);
    }
    let tower = Tower::build(k, l, &dims)?;
    let mut rep = ReportBuilder::new("limits.universality");

    // ῑ*(A′^{I′}) = J(A^I) between consecutive levels
    let mut frames = 0usize;
    for w in 1..tower.depth() {
        let (lo, hi) = (&tower.levels[w - 1], &tower.levels[w]);
        for c in &lo.charts {
            let pos = tower.position(w - 1, w, &c.index)?;
            let hom = tower.inclusion_hom(w - 1, w, pos)?;
            let s = hom.map().expect("image chart");
            frames += 1;
            let at = format!("{}→{} I={}", lo.spec, hi.spec, c.index);
            let pulled = hi.charts[pos].a.substitute(s, &mut AssumptionSet::new())?;
            let want = embed_columns(plain(hi.spec), &c.a)?;
            if let Some((r, cc)) = first_difference_formal(&pulled, &want, &lo.nu)? {
                rep.fail(at, format!("frame ({}, {})", r + 1, cc + 1), want.get(r, cc).to_string(), pulled.get(r, cc).to_string());
            }
        }
    }

    // T(u ⊗ s^c) = u·s^c_{ij}: injective iff the I-minor of the basis has full reduced rank
    let mut ranks = 0usize;
    for atlas in &tower.levels {
        for c in &atlas.charts {
            ranks += 1;
            let s = basis(&c.a, corrupt_basis);
            let r = reduced_rank(&minor(&s, &c.index)?);
            if r < k + l {
                let kernel = if k + l == 1 {
                    "a = (1)".to_string()
                } else {
                    format!("a = s^1 - s^{}", k + l)
                };
                rep.fail(
                    format!("{} I={}", atlas.spec, c.index),
                    "kernel of T",
                    "0",
                    format!("nonzero: {kernel} (rank {r} < {})", k + l),
                );
            }
        }
    }

    // level t: the pullback isomorphism itself
    let pou = PartitionOfUnity::new(t)?;
    let gm = gauss_morphism(b, &pou)?;
    let sigma = (0..t)
        .map(|c| gauss_supermatrix(&gm, c).and_then(|gs| classifying_morphism(&gs, &tower.levels[0])))
        .collect::<Result<Vec<_>>>()?;
    rep.absorb(&format!("{}", tower.spec(0)), &verify_pullback_iso(&gm, &sigma));

    // higher levels: p_ij∘σ_t
    let mut lifted = 0usize;
    let mut pairs = 0usize;
    for d in 1..tower.depth() {
        let hi = &tower.levels[d];
        let kind = plain(hi.spec);
        for (c, sg) in sigma.iter().enumerate() {
            let gc = &gm.charts[c];
            let rel = gc.relation.as_ref();
            let gs = gauss_supermatrix(&gm, c)?;
            let jg = embed_columns(kind, &gc.g)?;
            let mut comp = std::collections::BTreeMap::new();
            let mut deltas = std::collections::BTreeMap::new();
            for (&i, cc) in &sg.charts {
                let pos = tower.position(0, d, &cc.index)?;
                let at = format!("{} chart {} I={}", hi.spec, b.atlas.labels[c], hi.charts[pos].index);
                let hom = tower.inclusion_hom(0, d, pos)?;
                let mut assume = gc.assumptions.clone();
                let phi = hom.map().expect("image chart").then(&cc.subst, &mut assume)?;
                let rows: Vec<usize> = cc.index.indices.iter().map(|x| x - 1).collect();
                let gi = embed_columns(kind, &gs.matrix.select_rows(&rows, k, l)?)?;
                match frame_to_chart(&gi, &gc.nu, &hi.charts[pos], &mut assume) {
                    Ok((direct, _, _)) => {
                        for (g, got, want) in direct.diff(&phi, rel) {
                            rep.fail(format!("{at} classify J(G) vs iota*∘sigma"), g, want.to_string(), got.to_string());
                        }
                    }
                    Err(e) => rep.fail(at.clone(), "classify J(G)", "defined", e.to_string()),
                }
                let s_i = gc.sections.select_rows(&rows, k, l)?;
                let t_ci = smul(&cc.b_inv, &s_i, &gc.nu)?;
                let tg = smul(&t_ci, &jg, &gc.nu)?;
                let pa = hi.charts[pos].a.substitute(&phi, &mut assume)?;
                diff_cells(&mut rep, &format!("{at} T·J(g) vs phi*(A')"), &tg, &pa, rel);
                rep.assume(assume.display(&gc.ctx));
                lifted += 1;
                comp.insert(i, (pos, phi));
                deltas.insert(i, t_ci);
            }
            for (i, (pi, phi_i)) in &comp {
                for (j, (pj, _)) in &comp {
                    if i == j {
                        continue;
                    }
                    let Ok((m, _)) = canonical_cocycle(hi, *pi, *pj) else {
                        continue;
                    };
                    pairs += 1;
                    let at = format!(
                        "{} chart {} I={} J={}",
                        hi.spec, b.atlas.labels[c], hi.charts[*pi].index, hi.charts[*pj].index
                    );
                    let mut assume = AssumptionSet::new();
                    let rhs = m.substitute(phi_i, &mut assume).and_then(|m| smul(&m, &deltas[i], &gc.nu))?;
                    diff_cells(&mut rep, &format!("{at} T_J vs phi_I(m'_IJ)·T_I"), &deltas[j], &rhs, rel);
                }
            }
        }
    }
    rep.detail("levels", dims.iter().map(|(m, n)| format!("{m}|{n}")).collect::<Vec<_>>());
    rep.detail("frame_checks", frames);
    rep.detail("rank_checks", ranks);
    rep.detail("lifted_charts", lifted);
    rep.detail("lifted_pairs", pairs);
    rep.detail("corrupt_basis", corrupt_basis);
    Ok(rep.finish())
}

/// `ι^{m,n}: Gr_k^m → Gr(k|0, m|n)` at each level: odd generators go to 0,
/// the maps commute with both gluings and with the tower inclusions, and the
/// frame map `T` of the reduced pullback is an isomorphism.
pub fn reduced_embedding_check(k: usize, levels: &[(usize, usize)]) -> Result<Report> {
    let mut rep = ReportBuilder::new("limits.reduced_embedding");
    rep.detail("levels", levels.len());
    if levels.is_empty() {
        return Ok(rep.finish());
    }
    let sup = Tower::build(k, 0, levels)?;
    let red_dims: Vec<(usize, usize)> = levels.iter().map(|&(m, _)| (m, 0)).collect();
    let red = Tower::build(k, 0, &red_dims)?;
    let (mut squares, mut frames) = (0usize, 0usize);
    // emb[d][r]: ι^{m,n}* on the super chart over reduced chart r
    let mut emb: Vec<Vec<Substitution>> = Vec::new();
    for d in 0..levels.len() {
        let (s, r) = (&sup.levels[d], &red.levels[d]);
        let kind = plain(s.spec);
        let mut row = Vec::with_capacity(r.charts.len());
        for rc in &r.charts {
            let at = format!("{} I={}", s.spec, rc.index);
            let sc = s
                .chart(&index_map(kind, &rc.index)?)
                .ok_or_else(|| Error::InvalidIndex(format!("{} has no chart {}", s.spec, rc.index)))?;
            let h = induced_chart_hom(kind, rc, sc)?;
            for j in 0..s.spec.q() {
                let name = &sc.ctx.odd_names[j];
                let v = h.image_of(name).expect("generator");
                if !v.is_zero() {
                    rep.fail(at.clone(), name.clone(), "0", v.to_string());
                }
            }
            frames += 1;
            let pulled = sc.a.substitute(&h, &mut AssumptionSet::new())?;
            let want = embed_columns(kind, &rc.a)?;
            if let Some((i, c)) = first_difference_formal(&pulled, &want, &r.nu)? {
                rep.fail(at.clone(), format!("frame ({}, {})", i + 1, c + 1), want.get(i, c).to_string(), pulled.get(i, c).to_string());
            }
            let rank = reduced_rank(&minor(&rc.a, &rc.index)?);
            if rank < k {
                rep.fail(at.clone(), "T", format!("rank {k}"), format!("rank {rank}"));
            }
            row.push(h);
        }
        for i in 0..r.charts.len() {
            for j in 0..r.charts.len() {
                let Ok(tr) = r.transition(i, j) else {
                    continue;
                };
                let si = s.position(&index_map(kind, &r.charts[i].index)?).expect("chart");
                let sj = s.position(&index_map(kind, &r.charts[j].index)?).expect("chart");
                squares += 1;
                let at = format!("{} I={} J={}", s.spec, r.charts[i].index, r.charts[j].index);
                let mut assume = AssumptionSet::new();
                let lhs = s.transition(si, sj)?.subst.then(&row[i], &mut assume)?;
                let rhs = row[j].then(&tr.subst, &mut assume)?;
                for (g, got, want) in lhs.diff(&rhs, None) {
                    rep.fail(format!("{at} gluing"), g, want.to_string(), got.to_string());
                }
                let (ms, _) = canonical_cocycle(s, si, sj)?;
                let (mr, _) = canonical_cocycle(r, i, j)?;
                let pulled = ms.substitute(&row[i], &mut assume)?;
                if let Some((a, c)) = first_difference_formal(&pulled, &mr, &r.nu)? {
                    rep.fail(format!("{at} cocycle"), format!("({}, {})", a + 1, c + 1), mr.get(a, c).to_string(), pulled.get(a, c).to_string());
                }
                rep.assume(assume.display(&r.ctx));
            }
        }
        emb.push(row);
    }
    // ι^{m,n}* ∘ ι_super* = ι_red* ∘ ι^{m′,n′}*
    let mut across = 0usize;
    for d in 1..levels.len() {
        for (ri, rc) in red.levels[d - 1].charts.iter().enumerate() {
            let rpos = red.position(d - 1, d, &rc.index)?;
            let r_hi = &red.levels[d].charts[rpos];
            let spos = sup.levels[d]
                .position(&index_map(plain(sup.spec(d)), &r_hi.index)?)
                .expect("chart");
            let (Some(is), Some(ir)) = (sup.inclusion_hom(d - 1, d, spos)?.map().cloned(), red.inclusion_hom(d - 1, d, rpos)?.map().cloned()) else {
                rep.fail(format!("I={}", rc.index), "iota*", "nonzero", "zero");
                continue;
            };
            across += 1;
            let mut assume = AssumptionSet::new();
            let lhs = is.then(&emb[d - 1][ri], &mut assume)?;
            let rhs = emb[d][rpos].then(&ir, &mut assume)?;
            for (g, got, want) in lhs.diff(&rhs, None) {
                rep.fail(format!("levels {d}→{} I={}", d + 1, rc.index), g, want.to_string(), got.to_string());
            }
        }
    }
    rep.detail("frame_checks", frames);
    rep.detail("square_checks", squares);
    rep.detail("level_checks", across);
    Ok(rep.finish())
}
