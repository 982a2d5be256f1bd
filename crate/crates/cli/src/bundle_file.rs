//! Bundle files: a JSON presentation of a cocycle over a finite atlas.
//!
//! Overlap `{from, to}` lists every generator of chart `to` as an expression
//! on chart `from`; cocycle entry `{from, to}` is `g_{from,to}` over chart
//! `from`. Identity diagonals are added when absent. A cell written exactly
//! `1nu` is the formal odd unit.

use nugrass_core::algebra::{AssumptionSet, Ctx, GeneratorContext, Substitution};
use nugrass_core::bundle::{BundleCocycle, SuperManifoldAtlas};
use nugrass_core::nu::FormalEntry;
use nugrass_core::supermatrix::SuperMatrix;
use nugrass_core::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::expr::parse_with;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rank {
    pub k: usize,
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDecl {
    pub name: String,
    pub even_gens: Vec<String>,
    pub odd_gens: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapDecl {
    pub from: String,
    pub to: String,
    pub images: BTreeMap<String, String>,
    #[serde(default)]
    pub assume: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleDecl {
    pub from: String,
    pub to: String,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleFile {
    pub schema: u32,
    pub rank: Rank,
    pub charts: Vec<ChartDecl>,
    #[serde(default)]
    pub overlaps: Vec<OverlapDecl>,
    #[serde(default)]
    pub cocycle: Vec<CocycleDecl>,
}

fn chart_pos(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::Schema(format!("{what} names undeclared chart {name}")))
}

fn entry(text: &str, ctx: &Ctx, nu: &nugrass_core::nu::NuInvolution, assume: &mut AssumptionSet) -> Result<FormalEntry> {
    if text.trim() == "1nu" {
        return Ok(FormalEntry::NuUnit);
    }
    Ok(FormalEntry::Ring(parse_with(text, ctx, nu, assume)?))
}

impl BundleFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: BundleFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if f.schema != SCHEMA_VERSION {
            return Err(Error::Schema(format!("schema {} (supported: {SCHEMA_VERSION})", f.schema)));
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        BundleFile::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle file serializes")
    }

    /// Parse every expression and assemble the cocycle.
    pub fn to_bundle(&self) -> Result<BundleCocycle> {
        let names: Vec<String> = self.charts.iter().map(|c| c.name.clone()).collect();
        let ctxs = self
            .charts
            .iter()
            .map(|c| GeneratorContext::new(c.even_gens.clone(), c.odd_gens.clone()))
            .collect::<Result<Vec<_>>>()?;
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Schema(format!("chart {n} declared twice")));
            }
        }
        let mut atlas = SuperManifoldAtlas::new(names.clone(), ctxs.clone())?;
        let mut seen = BTreeMap::new();
        for ov in &self.overlaps {
            let a = chart_pos(&names, &ov.from, "overlap")?;
            let b = chart_pos(&names, &ov.to, "overlap")?;
            if seen.insert((a, b), ()).is_some() {
                return Err(Error::Schema(format!("overlap {} -> {} given twice", ov.from, ov.to)));
            }
            let (src, tgt) = (&ctxs[b], &ctxs[a]);
            for g in ov.images.keys() {
                if src.lookup(g).is_none() {
                    return Err(Error::Schema(format!("overlap {} -> {}: {g} is not a generator of {}", ov.from, ov.to, ov.to)));
                }
            }
            let mut assume = AssumptionSet::new();
            let mut img = BTreeMap::new();
            for g in src.all_names() {
                let text = ov
                    .images
                    .get(g)
                    .ok_or_else(|| Error::Schema(format!("overlap {} -> {}: no image for {g}", ov.from, ov.to)))?;
                img.insert(g.clone(), parse_with(text, tgt, &atlas.nus[a], &mut assume)?);
            }
            for text in &ov.assume {
                let p = parse_with(text, tgt, &atlas.nus[a], &mut assume)?;
                if p.num_terms() > 1 || !p.nilpotent_part().is_zero() {
                    return Err(Error::Schema(format!("assumption {text} must be a function of the even generators")));
                }
                assume.insert(p.body().numer()).map_err(|_| Error::Schema(format!("assumption {text} is zero")))?;
            }
            atlas.add_overlap(a, b, Substitution::from_map(src, tgt, &img)?, assume)?;
        }
        let (k, l) = (self.rank.k, self.rank.l);
        let mut g = BTreeMap::new();
        for c in &self.cocycle {
            let a = chart_pos(&names, &c.from, "cocycle")?;
            let b = chart_pos(&names, &c.to, "cocycle")?;
            if c.matrix.len() != k + l || c.matrix.iter().any(|r| r.len() != k + l) {
                return Err(Error::Schema(format!("g({}, {}) must be {n}x{n}", c.from, c.to, n = k + l)));
            }
            let mut assume = AssumptionSet::new();
            let rows = c
                .matrix
                .iter()
                .map(|r| r.iter().map(|t| entry(t, &ctxs[a], &atlas.nus[a], &mut assume)).collect())
                .collect::<Result<Vec<Vec<_>>>>()?;
            if g.insert((a, b), SuperMatrix::new(&ctxs[a], k, l, k, l, rows)?).is_some() {
                return Err(Error::Schema(format!("cocycle entry ({}, {}) given twice", c.from, c.to)));
            }
        }
        for (a, ctx) in ctxs.iter().enumerate() {
            g.entry((a, a)).or_insert_with(|| SuperMatrix::identity(ctx, k, l));
        }
        BundleCocycle::new(atlas, k, l, g)
    }

    /// The file form of a cocycle; diagonals are omitted.
    pub fn from_bundle(b: &BundleCocycle) -> Result<Self> {
        let at = &b.atlas;
        let charts = at
            .labels
            .iter()
            .zip(&at.charts)
            .map(|(name, c)| ChartDecl {
                name: name.clone(),
                even_gens: c.even_names.clone(),
                odd_gens: c.odd_names.clone(),
            })
            .collect();
        let overlaps = at
            .overlaps
            .iter()
            .filter(|((a, b), _)| a != b)
            .map(|(&(a, b), ov)| OverlapDecl {
                from: at.labels[a].clone(),
                to: at.labels[b].clone(),
                images: ov.subst.images().map(|(n, v)| (n.clone(), v.to_string())).collect(),
                assume: ov.assumptions.iter().map(|p| p.display(&at.charts[a].even_names)).collect(),
            })
            .collect();
        let cocycle = b
            .g
            .iter()
            .filter(|((a, b), _)| a != b)
            .map(|(&(a, c), m)| CocycleDecl {
                from: at.labels[a].clone(),
                to: at.labels[c].clone(),
                matrix: m.display_rows(),
            })
            .collect();
        Ok(BundleFile {
            schema: SCHEMA_VERSION,
            rank: Rank { k: b.k, l: b.l },
            charts,
            overlaps,
            cocycle,
        })
    }
}
