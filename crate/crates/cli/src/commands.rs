//! Subcommands: each one produces a single JSON report and an exit code.

use crate::bundle_file::BundleFile;
use clap::{Args, Parser, Subcommand};
use nugrass_core::algebra::SuperElement;
use nugrass_core::bundle::{verify_bundle_cocycle, BundleCocycle};
use nugrass_core::gauss::{
    classifying_morphism, gauss_consistency_report, gauss_morphism, gauss_morphism_ordered, gauss_supermatrix,
    verify_pullback_iso, ClassifyingMorphism, GaussMorphism, PartitionOfUnity,
};
use nugrass_core::grassmannian::{verify_gluing, Atlas, GluingOptions, GrassSpec};
use nugrass_core::homotopy::{linear_homotopy, retraction_check, verify_endpoints, RetractionFactor};
use nugrass_core::limits::{
    tower_section_check, transitivity_check, universality_check, verify_tower_squares, Tower, TowerSection,
};
use nugrass_core::report::{Report, ReportBuilder, Status};
use nugrass_core::supermatrix::MultiIndex;
use nugrass_core::{Error, Result};
use serde_json::json;
use std::path::{Path, PathBuf};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nugrass", version, about = "Exact checks on nu-Grassmannians, super vector bundles and Gauss supermatrices")]
pub struct Cli {
    /// Worker threads for the independent checks (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report elapsed time as 0 so that reports are byte-identical across runs.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Subcommand)]
pub enum AtlasCmd {
    /// Chart matrices of every chart.
    Build(SpecArgs),
    /// Identity, pair and triple gluing laws.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        /// Tuples to sample when there are more than 200.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Negative control `I:J:gen`, e.g. `1,3:2,3:x1`: negate one image of phi_IJ.
        #[arg(long)]
        corrupt: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum BundleCmd {
    /// Cocycle identity, pair and triple laws.
    Verify { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum GaussCmd {
    /// Gauss morphism, its left inverse and the Gauss supermatrix on each chart.
    Build {
        file: PathBuf,
        /// Number of charts in the partition of unity (must match the file).
        #[arg(long)]
        charts: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum PullbackCmd {
    /// The pullback of the canonical bundle along the classifying morphism is the bundle.
    Verify { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum HomotopyCmd {
    /// Endpoints of the linear homotopy between two Gauss maps of one bundle.
    ///
    /// The second file fixes the block order by chart name.
    Endpoints { a: PathBuf, b: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum TowerCmd {
    /// Squares, transitivity and a compatible section family over a tower.
    Verify {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        depth: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(subcommand)]
    Atlas(AtlasCmd),
    #[command(subcommand)]
    Bundle(BundleCmd),
    #[command(subcommand)]
    Gauss(GaussCmd),
    /// Classifying morphism into the canonical chart atlas.
    Classify { file: PathBuf },
    #[command(subcommand)]
    Pullback(PullbackCmd),
    #[command(subcommand)]
    Homotopy(HomotopyCmd),
    /// Deformation retraction of the projective superspace onto its reduced space.
    Retraction {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Negative control: use the factor 1 + t instead of 1 - t.
        #[arg(long)]
        corrupt_h: bool,
    },
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Universality of the tower on a finite truncation.
    Universality {
        file: PathBuf,
        /// Starting level as `m,n`.
        #[arg(long, value_parser = parse_level)]
        level: (usize, usize),
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Negative control: make the last basis row depend on the first.
        #[arg(long)]
        corrupt_basis: bool,
    },
}

fn parse_level(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected m,n")?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_index(s: &str, spec: GrassSpec) -> Result<MultiIndex> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Schema(format!("bad index {s}"))))
        .collect::<Result<Vec<_>>>()?;
    spec.index(v)
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Atlas(AtlasCmd::Build(_)) => "atlas.build",
        Command::Atlas(AtlasCmd::Verify { .. }) => "atlas.verify",
        Command::Bundle(_) => "bundle.verify",
        Command::Gauss(_) => "gauss.build",
        Command::Classify { .. } => "classify",
        Command::Pullback(_) => "pullback.verify",
        Command::Homotopy(_) => "homotopy.endpoints",
        Command::Retraction { .. } => "retraction",
        Command::Tower(_) => "tower.verify",
        Command::Universality { .. } => "universality",
    }
}

/// Errors about the input itself exit with 2; the rest are check failures.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::NotInvertible(_)
        | Error::Singular(_)
        | Error::EliminationStalled(_)
        | Error::KernelNotTrivial(_)
        | Error::FormalUnitSum(_) => EXIT_FAIL,
        _ => EXIT_INPUT,
    }
}

fn load(path: &Path) -> Result<BundleCocycle> {
    BundleFile::load(path)?.to_bundle()
}

fn gauss_of(b: &BundleCocycle) -> Result<GaussMorphism> {
    gauss_morphism(b, &PartitionOfUnity::new(b.atlas.len())?)
}

fn classify_all(gm: &GaussMorphism) -> Result<Vec<ClassifyingMorphism>> {
    let b = &gm.bundle;
    let t = b.atlas.len();
    let target = Atlas::build(GrassSpec::new(b.k, b.l, t * b.k, t * b.l)?)?;
    (0..t)
        .map(|c| classifying_morphism(&gauss_supermatrix(gm, c)?, &target))
        .collect()
}

fn atlas_build(s: &SpecArgs) -> Result<Report> {
    let spec = GrassSpec::new(s.k, s.l, s.m, s.n)?;
    let atlas = Atlas::build(spec)?;
    let mut rep = ReportBuilder::new("atlas.build");
    rep.detail("spec", spec.to_string());
    rep.detail("charts", atlas.charts.len());
    let charts: Vec<_> = atlas
        .charts
        .iter()
        .map(|c| json!({ "index": c.label(), "generators": c.generator_names(), "matrix": c.a.display_rows() }))
        .collect();
    rep.detail("chart_matrices", charts);
    Ok(rep.finish())
}

fn atlas_verify(s: &SpecArgs, sample: Option<usize>, seed: u64, corrupt: Option<&str>) -> Result<Report> {
    let spec = GrassSpec::new(s.k, s.l, s.m, s.n)?;
    let corrupt = match corrupt {
        None => None,
        Some(c) => {
            let parts: Vec<&str> = c.split(':').collect();
            let [i, j, g] = parts[..] else {
                return Err(Error::Schema(format!("--corrupt expects I:J:gen, got {c}")));
            };
            Some((parse_index(i, spec)?, parse_index(j, spec)?, g.to_string()))
        }
    };
    let atlas = Atlas::build(spec)?;
    Ok(verify_gluing(&atlas, &GluingOptions { sample, seed, corrupt }))
}

fn gauss_build(path: &Path, charts: usize) -> Result<Report> {
    let b = load(path)?;
    if charts != b.atlas.len() {
        return Err(Error::Precondition(format!("--charts {charts} but the file has {} charts", b.atlas.len())));
    }
    let gm = gauss_of(&b)?;
    let mut rep = ReportBuilder::new("gauss.build");
    rep.absorb("h∘g", &gm.left_inverse_report());
    let mut mats = serde_json::Map::new();
    for c in 0..charts {
        let gs = gauss_supermatrix(&gm, c)?;
        rep.absorb(&format!("G on {}", b.atlas.labels[c]), &gauss_consistency_report(&gm, &gs));
        rep.assume(gs.assumptions.display(&gs.ctx));
        mats.insert(b.atlas.labels[c].clone(), json!(gs.matrix.display_rows()));
    }
    rep.detail("t", charts);
    rep.detail("rank", format!("{}|{}", b.k, b.l));
    rep.detail("gauss_supermatrices", mats);
    Ok(rep.finish())
}

fn classify(path: &Path) -> Result<Report> {
    let b = load(path)?;
    let gm = gauss_of(&b)?;
    let sigma = classify_all(&gm)?;
    let mut rep = ReportBuilder::new("classify");
    let mut per_chart = serde_json::Map::new();
    for cm in &sigma {
        let label = &b.atlas.labels[cm.chart];
        if cm.charts.is_empty() {
            rep.fail(format!("chart {label}"), "charts hit", "at least one", "none (Gauss rows dependent)");
        }
        let hits: serde_json::Map<_, _> = cm
            .charts
            .iter()
            .map(|(&pos, cc)| {
                rep.assume(cc.assumptions.display(&cc.subst.target));
                let images: serde_json::Map<_, _> =
                    cc.subst.images().map(|(n, v)| (n.clone(), json!(v.to_string()))).collect();
                (cm.target.charts[pos].label(), serde_json::Value::Object(images))
            })
            .collect();
        let missed: Vec<String> = cm.missed.iter().map(|i| i.to_string()).collect();
        per_chart.insert(label.clone(), json!({ "charts": hits, "missed": missed }));
    }
    rep.detail("target", sigma[0].target.spec.to_string());
    rep.detail("classifying_charts", per_chart);
    Ok(rep.finish())
}

fn pullback(path: &Path) -> Result<Report> {
    let gm = gauss_of(&load(path)?)?;
    let sigma = classify_all(&gm)?;
    Ok(verify_pullback_iso(&gm, &sigma))
}

fn homotopy(a: &Path, b: &Path) -> Result<Report> {
    let ba = load(a)?;
    let bb = load(b)?;
    let (la, lb) = (&ba.atlas.labels, &bb.atlas.labels);
    let mut order = Vec::with_capacity(la.len());
    for (i, name) in la.iter().enumerate() {
        let j = lb
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Precondition(format!("chart {name} missing from the second file")))?;
        if ba.atlas.charts[i] != bb.atlas.charts[j] {
            return Err(Error::Precondition(format!("chart {name} has different generators in the two files")));
        }
        order.push(j);
    }
    if lb.len() != la.len() || (ba.k, ba.l) != (bb.k, bb.l) {
        return Err(Error::Precondition("the files describe different bundles".into()));
    }
    for (&(x, y), g) in &ba.g {
        if !bb.get(order[x], order[y]).is_some_and(|h| h.equals(g)) {
            return Err(Error::Precondition(format!("g({}, {}) differs between the two files", la[x], la[y])));
        }
    }
    let pou = PartitionOfUnity::new(la.len())?;
    let ga = gauss_morphism(&ba, &pou)?;
    let gb = gauss_morphism_ordered(&ba, &pou, &order)?;
    let fam = linear_homotopy(&ga, &gb)?;
    let mut rep = verify_endpoints(&ga, &gb, &fam)?;
    rep.details.insert("order".into(), json!(order));
    Ok(rep)
}

/// Balanced level-0 charts intersected one after another, keeping those the
/// zero family can be restricted to at every level.
fn section_chain(tower: &Tower, home: &MultiIndex, want: usize) -> Result<Vec<MultiIndex>> {
    let zero = |i: usize| SuperElement::zero(&tower.levels[i].ctx);
    let mut opens: Vec<MultiIndex> = Vec::new();
    for c in tower.levels[0].charts.iter().filter(|c| c.index.is_balanced() && &c.index != home) {
        if opens.len() == want {
            break;
        }
        let mut trial = opens.clone();
        trial.push(c.index.clone());
        let s = TowerSection {
            chart: home.clone(),
            values: (0..tower.depth()).map(zero).collect(),
            opens: trial.clone(),
        };
        if tower_section_check(tower, &s)?.passed() {
            opens = trial;
        }
    }
    Ok(opens)
}

fn tower(k: usize, l: usize, depth: usize) -> Result<Report> {
    if depth < 2 {
        return Err(Error::Precondition("a tower needs depth at least 2".into()));
    }
    let dims: Vec<(usize, usize)> = (0..depth)
        .map(|s| (k + 1 + s, if l == 0 { 0 } else { l + 1 + s }))
        .collect();
    let tw = Tower::build(k, l, &dims)?;
    let mut rep = ReportBuilder::new("tower.verify");
    rep.absorb("squares", &verify_tower_squares(&tw)?);
    rep.absorb("transitivity", &transitivity_check(&tw)?);
    let home = tw.levels[0]
        .charts
        .iter()
        .find(|c| c.index.is_balanced())
        .map(|c| c.index.clone())
        .ok_or_else(|| Error::Precondition("no balanced chart at the first level".into()))?;
    let opens = section_chain(&tw, &home, 2)?;
    let top = &tw.levels[depth - 1].ctx;
    let f = if top.p() > 0 { SuperElement::even_gen(top, 0) } else { SuperElement::one(top) };
    let s = TowerSection::pull_down(&tw, &home, f.clone(), opens.clone())?;
    let sec = tower_section_check(&tw, &s)?;
    rep.absorb("section", &sec);
    rep.detail("levels", dims.iter().map(|(m, n)| format!("{m}|{n}")).collect::<Vec<_>>());
    rep.detail("section_chart", home.to_string());
    rep.detail("section_opens", opens.iter().map(|i| i.to_string()).collect::<Vec<_>>());
    rep.detail("section_top", f.to_string());
    rep.detail("compatibility_checks", sec.details["compatibility_checks"].clone());
    Ok(rep.finish())
}

fn dispatch(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Atlas(AtlasCmd::Build(s)) => atlas_build(s),
        Command::Atlas(AtlasCmd::Verify { spec, sample, seed, corrupt }) => {
            atlas_verify(spec, *sample, *seed, corrupt.as_deref())
        }
        Command::Bundle(BundleCmd::Verify { file }) => Ok(verify_bundle_cocycle(&load(file)?)),
        Command::Gauss(GaussCmd::Build { file, charts }) => gauss_build(file, *charts),
        Command::Classify { file } => classify(file),
        Command::Pullback(PullbackCmd::Verify { file }) => pullback(file),
        Command::Homotopy(HomotopyCmd::Endpoints { a, b }) => homotopy(a, b),
        Command::Retraction { m, n, corrupt_h } => {
            let factor = if *corrupt_h { RetractionFactor::Corrupted } else { RetractionFactor::Standard };
            retraction_check(*m, *n, factor)
        }
        Command::Tower(TowerCmd::Verify { k, l, depth }) => tower(*k, *l, *depth),
        Command::Universality { file, level, depth, corrupt_basis } => {
            universality_check(&load(file)?, *level, *depth, *corrupt_basis)
        }
    }
}

fn error_report(check: &str, e: &Error) -> serde_json::Value {
    json!({
        "check": check,
        "status": "error",
        "error": { "code": e.code(), "message": e.to_string() },
        "witnesses": [],
        "assumptions": [],
        "timing": { "elapsed_ms": 0 },
    })
}

/// Run a parsed command line: `(exit code, JSON report)`.
pub fn run(cli: &Cli) -> (i32, String) {
    let go = || dispatch(&cli.cmd);
    let out = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(go),
            Err(e) => Err(Error::Precondition(format!("thread pool: {e}"))),
        },
        None => go(),
    };
    match out {
        Ok(mut rep) => {
            if cli.no_timing {
                rep.timing.elapsed_ms = 0;
            }
            let code = if rep.status == Status::Pass { EXIT_PASS } else { EXIT_FAIL };
            (code, rep.to_json())
        }
        Err(e) => {
            let v = error_report(name(&cli.cmd), &e);
            (exit_code_for(&e), serde_json::to_string_pretty(&v).expect("error report serializes"))
        }
    }
}

/// Parse `args` (program name first) and run. Usage errors exit with 2.
pub fn run_suite<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            (code, e.to_string())
        }
    }
}
