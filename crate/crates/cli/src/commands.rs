//! One function per subcommand. Each writes its artifacts under the output directory,
//! re-checks the invariants of what it produced and returns a short human summary.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotacover::cantor::{envelope_check, run_construction, CantorOpts, CantorReport, EnvelopeCheck};
use rotacover::constructions::{
    build_bad_perfect_set, build_bad_sequence, build_good_sequence, build_very_good_sequence, dilate_cover,
    BadOpts, BadSequenceResult, DilateCover, GoodSequenceResult, PerfectSetResult, ShellOpts,
};
use rotacover::coverage::{covers_point, find_hole_beyond, recheck_hole, HoleSearch};
use rotacover::fourier::{check_goodness_criterion, default_probe_annuli, GoodnessOpts, GoodnessReport, RestrictionMeasure};
use rotacover::{AngleSet, CircleArc, CoverageReport, Hole, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::{BadConfig, PerfectConfig};
use crate::{render, Artifact, CliError, Command, ExperimentConfig, SCHEMA};

pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
}

impl Context {
    fn write_json<T: Serialize>(&self, command: Command, file: &str, result: &T) -> Result<PathBuf, CliError> {
        let art = Artifact {
            schema: SCHEMA,
            command: command.name().to_string(),
            config: self.cfg.clone(),
            result,
        };
        let path = self.out.join(file);
        let mut text = serde_json::to_string_pretty(&art)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    fn write_text(&self, file: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.out.join(file);
        std::fs::write(&path, text)?;
        Ok(path)
    }

    fn shell_opts(&self) -> ShellOpts {
        let d = self.cfg.budgets.max_depth;
        let base = ShellOpts::default();
        ShellOpts {
            max_depth: d,
            greedy_depth: base.greedy_depth.min(d),
            ..base
        }
    }

    fn hole_search(&self, min_clearance: f64) -> HoleSearch {
        HoleSearch {
            min_clearance,
            max_rounds: self.cfg.budgets.search_rounds,
            ..HoleSearch::default()
        }
    }
}

pub fn dispatch(cmd: Command, ctx: &Context) -> Result<String, CliError> {
    match cmd {
        Command::CoverCheck => cover_check(ctx),
        Command::FindHoles => find_holes(ctx),
        Command::BuildGood => build_good(ctx),
        Command::BuildVeryGood => build_very_good(ctx),
        Command::BuildBad => build_bad(ctx),
        Command::BuildPerfect => build_perfect(ctx),
        Command::FourierCheck => fourier_check(ctx),
        Command::CantorBuild => cantor_build(ctx),
        Command::DilateCover => dilate(ctx),
        Command::Render => render_cmd(ctx),
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Invariant(msg()))
    }
}

/// Largest number of cells re-evaluated pointwise after a region verification.
const RECHECK_CELLS: usize = 20_000;

fn check_coverage_report(rep: &CoverageReport, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let lattice = cfg.lattice()?;
    let total: f64 = rep.cells.iter().map(|c| c.cell.area()).sum();
    let area = rep.region.area();
    ensure((total - area).abs() <= 1e-9 * area.max(1.0), || {
        format!("cells cover area {total}, region has {area}")
    })?;
    let stride = rep.cells.len().div_ceil(RECHECK_CELLS).max(1);
    for c in rep.cells.iter().step_by(stride) {
        let v = covers_point(&c.cell.center(), &rep.angle_set, &lattice, rep.epsilon)?;
        let contradicts = matches!(
            (c.verdict, v),
            (Verdict::Covered, Verdict::Uncovered) | (Verdict::Uncovered, Verdict::Covered)
        );
        ensure(!contradicts, || {
            format!("cell {:?} certified {:?} but its centre is {v:?}", c.cell, c.verdict)
        })?;
    }
    Ok(())
}

fn write_raster(ctx: &Context, file: &str, rep: &CoverageReport, width: usize, height: usize) -> Result<PathBuf, CliError> {
    let px = render::raster(rep, width, height);
    let mut buf = Vec::new();
    render::write_ppm(&mut buf, &px, width, height)?;
    let path = ctx.out.join(file);
    std::fs::write(&path, buf)?;
    Ok(path)
}

fn coverage_line(rep: &CoverageReport) -> String {
    let s = rep.summary();
    let area = rep.region.area();
    format!(
        "covered {:.6}  uncovered {:.6}  ambiguous {:.6} (area fractions, {} cells){}",
        s.covered_area / area,
        s.uncovered_area / area,
        s.ambiguous_area / area,
        rep.cells.len(),
        if rep.truncated { "; evaluated on stored data of an infinite set" } else { "" }
    )
}

fn cover_check(ctx: &Context) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let rep = rotacover::coverage::verify_region(
        &cfg.angle_set()?,
        &cfg.lattice()?,
        cfg.epsilon,
        &cfg.region()?,
        cfg.budgets.max_depth,
    )?;
    check_coverage_report(&rep, cfg)?;
    let json = ctx.write_json(Command::CoverCheck, "cover_check.json", &rep)?;
    let (w, h) = cfg.render.as_ref().map_or((720, 240), |r| (r.width, r.height));
    let ppm = write_raster(ctx, "cover_check.ppm", &rep, w, h)?;
    let verdict = if rep.all_covered() {
        "region certified covered"
    } else if rep.any_uncovered() {
        "region contains certified uncovered cells"
    } else {
        "region not fully certified"
    };
    Ok(format!(
        "{verdict}\n{}\nwrote {}\nwrote {}",
        coverage_line(&rep),
        json.display(),
        ppm.display()
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleRecord {
    pub angles: Vec<f64>,
    pub hole: Hole,
    /// Clearance recomputed from scratch against every angle.
    pub rechecked_clearance: f64,
}

fn find_holes(ctx: &Context) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let hc = cfg.holes.unwrap_or_default();
    let lattice = cfg.lattice()?;
    let sets: Vec<Vec<f64>> = if hc.random_sets > 0 {
        if hc.max_size == 0 {
            return Err(CliError::Config("holes.max_size must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..hc.random_sets)
            .map(|_| {
                let k = rng.gen_range(1..=hc.max_size);
                (0..k).map(|_| rng.gen_range(0.0..TAU)).collect()
            })
            .collect()
    } else {
        match cfg.angle_set()? {
            AngleSet::Finite { angles } => vec![angles],
            _ => return Err(CliError::Config("find-holes needs finite [angles] or holes.random_sets".into())),
        }
    };
    let search = ctx.hole_search(hc.min_clearance);
    let mut records = Vec::with_capacity(sets.len());
    let mut lines = String::new();
    for angles in sets {
        let set = AngleSet::finite(&angles)?;
        let hole = find_hole_beyond(&set, &lattice, cfg.epsilon, hc.r_min, hc.rho, &search)?;
        let again = recheck_hole(&hole, &set, &lattice, cfg.epsilon)?;
        ensure(hole.center.norm() >= hc.r_min && again >= hc.min_clearance, || {
            format!("hole {hole:?} rechecked at clearance {again}")
        })?;
        let _ = writeln!(
            lines,
            "{} angles: hole at |x| = {:.3}, radius {}, clearance {:.4}",
            angles.len(),
            hole.center.norm(),
            hole.radius,
            again
        );
        records.push(HoleRecord {
            angles,
            hole,
            rechecked_clearance: again,
        });
    }
    let json = ctx.write_json(Command::FindHoles, "holes.json", &records)?;
    Ok(format!("{lines}wrote {}", json.display()))
}

fn good_summary(res: &GoodSequenceResult) -> String {
    let mut s = format!(
        "{} angles over {} shells [{}, {}], limit {:.6}",
        res.angles.len(),
        res.shells.len(),
        res.shells.first().map_or(0.0, |s| s.r_lo),
        res.shells.last().map_or(0.0, |s| s.r_hi),
        res.limit
    );
    for a in &res.adjustments {
        let _ = write!(s, "\nshell {} moved from r = {} to r = {}", a.shell, a.nominal, a.used);
    }
    s
}

fn build_good(ctx: &Context) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let g = cfg.good.unwrap_or_default();
    let lattice = cfg.lattice()?;
    let arc = CircleArc::new(g.arc_start, g.arc_length)?;
    let opts = ctx.shell_opts();
    let res = build_good_sequence(&lattice, cfg.epsilon, &arc, g.r_start, g.shells, &opts)?;
    ensure(res.reverify(&lattice, opts.max_depth)?, || "a shell failed re-verification".into())?;
    ensure(res.angles.iter().all(|&a| arc.contains(a)), || "an angle left the arc".into())?;
    let json = ctx.write_json(Command::BuildGood, "good.json", &res)?;
    Ok(format!("{}\nevery shell re-verified\nwrote {}", good_summary(&res), json.display()))
}

fn build_very_good(ctx: &Context) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let v = cfg.very_good.clone().unwrap_or_default();
    let lattice = cfg.lattice()?;
    let schedule = v.schedule();
    let opts = ctx.shell_opts();
    let res = build_very_good_sequence(&lattice, &schedule, v.r_start, v.shells_per_term, &opts)?;
    ensure(res.reverify(&lattice, opts.max_depth)?, || "a shell failed re-verification".into())?;
    for (i, shell) in res.shells.iter().enumerate() {
        let term = schedule[i / v.shells_per_term.max(1)];
        ensure(shell.angles.iter().all(|&a| a > 0.0 && a < term.a), || {
            format!("shell {i} has angles outside (0, {})", term.a)
        })?;
    }
    let json = ctx.write_json(Command::BuildVeryGood, "very_good.json", &res)?;
    Ok(format!("{}\nevery shell re-verified\nwrote {}", good_summary(&res), json.display()))
}

fn bad_opts(ctx: &Context, rho: f64, min_clearance: f64, root: CircleArc) -> BadOpts {
    BadOpts {
        rho,
        search: ctx.hole_search(min_clearance),
        root,
    }
}

/// Each hole re-checked against the final angle set; all must keep a positive clearance.
fn recheck_all(holes: &[Hole], set: &AngleSet, ctx: &Context) -> Result<Vec<f64>, CliError> {
    let lattice = ctx.cfg.lattice()?;
    let out = holes
        .iter()
        .map(|h| recheck_hole(h, set, &lattice, ctx.cfg.epsilon))
        .collect::<rotacover::Result<Vec<_>>>()?;
    if let Some((j, c)) = out.iter().enumerate().find(|(_, &c)| !(c > 0.0)) {
        return Err(CliError::Invariant(format!("hole {j} lost its clearance ({c})")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadArtifact {
    pub sequence: BadSequenceResult,
    pub final_clearances: Vec<f64>,
}

fn build_bad(ctx: &Context) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let b: BadConfig = cfg.bad.unwrap_or_default();
    let opts = bad_opts(ctx, b.rho, b.min_clearance, BadOpts::default().root);
    let res = build_bad_sequence(&cfg.lattice()?, cfg.epsilon, b.n, &opts)?;
    let final_clearances = recheck_all(&res.holes, &AngleSet::finite(&res.angles)?, ctx)?;
    for (j, h) in res.holes.iter().enumerate() {
        ensure(h.center.norm() >= (j + 1) as f64, || format!("hole {j} is too close to the origin"))?;
    }
    let min = final_clearances.iter().cloned().fold(f64::INFINITY, f64::min);
    let art = BadArtifact {
        sequence: res,
        final_clearances,
    };
    let json = ctx.write_json(Command::BuildBad, "bad.json", &art)?;
    Ok(format!(
        "{} angles, {} holes, smallest final clearance {min:.4}\nwrote {}",
        art.sequence.angles.len(),
        art.sequence.holes.len(),
        json.display()
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfectArtifact {
    pub tree: PerfectSetResult,
    pub final_clearances: Vec<f64>,
}

fn build_perfect(ctx: &Context) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let p: PerfectConfig = cfg.perfect.unwrap_or_default();
    let root = CircleArc::new(p.root_start, p.root_length)?;
    let opts = bad_opts(ctx, p.rho, p.min_clearance, root);
    let res = build_bad_perfect_set(&cfg.lattice()?, cfg.epsilon, p.depth, &opts)?;
    for (n, level) in res.levels.iter().enumerate() {
        ensure(level.len() == 1 << n, || format!("level {n} has {} arcs", level.len()))?;
    }
    let final_clearances = recheck_all(&res.holes, &res.angle_set()?, ctx)?;
    let min = final_clearances.iter().cloned().fold(f64::INFINITY, f64::min);
    let art = PerfectArtifact {
        tree: res,
        final_clearances,
    };
    let json = ctx.write_json(Command::BuildPerfect, "perfect.json", &art)?;
    Ok(format!(
        "depth {}, {} holes, smallest final clearance {min:.4}\nwrote {}",
        p.depth,
        art.tree.holes.len(),
        json.display()
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierArtifact {
    pub report: GoodnessReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<RestrictionMeasure>,
}

fn fourier_check(ctx: &Context) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let f = cfg
        .fourier
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [fourier] section".into()))?;
    let angles = cfg.angles.as_ref().map(|a| a.to_angle_set()).transpose()?;
    let (sigma, restriction) = f.measure.to_measure(angles.as_ref())?;
    let annuli: Vec<(f64, f64)> = if f.annuli.is_empty() {
        default_probe_annuli()
    } else {
        f.annuli.iter().map(|a| (a[0], a[1])).collect()
    };
    let opts = GoodnessOpts {
        grid: cfg.budgets.grid,
        strict_epsilon: f.strict_epsilon,
        ..GoodnessOpts::default()
    };
    let report = check_goodness_criterion(&sigma, &cfg.lattice()?, cfg.epsilon, &annuli, &opts)?;
    let d = report.delta.delta;
    ensure(d > 0.0 && d <= 1.0, || format!("δ = {d} outside (0, 1]"))?;
    ensure(report.probes.iter().all(|p| (0.0..=1.0 + 1e-9).contains(&p.sup)), || {
        "a sampled transform modulus left [0, 1]".into()
    })?;
    let csv = ctx.write_text("fourier_profile.csv", &report.profile_csv())?;
    let mut s = format!(
        "verdict {:?}: δ(ε = {}) = {:.6} ({:?} side, {} terms)\n",
        report.verdict, report.delta.epsilon, d, report.delta.side, report.delta.terms
    );
    for p in &report.probes {
        let _ = writeln!(s, "  [{}, {}]  sup {:.6}", p.r_lo, p.r_hi, p.sup);
    }
    if let Some(r) = &restriction {
        let _ = writeln!(s, "restriction window density {:.4}, L1 gap to surrogate {:.3e}", r.density, r.l1_distance);
    }
    let art = FourierArtifact { report, restriction };
    let json = ctx.write_json(Command::FourierCheck, "fourier.json", &art)?;
    let _ = write!(s, "{}\nwrote {}\nwrote {}", art.report.note, json.display(), csv.display());
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorArtifact {
    pub report: CantorReport,
    /// Envelope re-sampled on a grid offset from the construction grid.
    pub fresh_envelope: EnvelopeCheck,
}

fn cantor_build(ctx: &Context) -> Result<String, CliError> {
    let c = ctx.cfg.cantor.unwrap_or_default();
    let arc = CircleArc::new(c.arc_start, c.arc_length)?;
    let report = run_construction(arc, c.stages, &CantorOpts { grid: c.grid })?;
    for i in 0..report.stages.len() {
        report.stage_measure(i).validate()?;
    }
    let fresh = envelope_check(&report, c.grid);
    let csv = ctx.write_text("cantor_envelope.csv", &fresh.to_csv())?;
    let mut s = String::new();
    for st in &report.stages {
        let _ = writeln!(
            s,
            "stage {}: {} arcs, support {:.4}, R_n = {}, ε_n = {:.4}",
            st.n,
            st.arcs.len(),
            st.support_length,
            st.r_n,
            st.epsilon_n
        );
    }
    let passed = fresh.passed;
    let excess = fresh.max_excess;
    let art = CantorArtifact {
        report,
        fresh_envelope: fresh,
    };
    let json = ctx.write_json(Command::CantorBuild, "cantor.json", &art)?;
    ensure(passed, || {
        format!("fresh envelope check failed (max excess {excess:.3e}); see {}", csv.display())
    })?;
    let _ = write!(
        s,
        "fresh envelope check passed (max excess {excess:.3e})\nwrote {}\nwrote {}",
        json.display(),
        csv.display()
    );
    Ok(s)
}

fn dilate(ctx: &Context) -> Result<String, CliError> {
    let eps = ctx
        .cfg
        .dilate
        .as_ref()
        .map_or_else(|| vec![ctx.cfg.epsilon], |d| d.epsilons.clone());
    let covers = eps.iter().map(|&e| dilate_cover(e)).collect::<rotacover::Result<Vec<DilateCover>>>()?;
    let mut s = String::new();
    for d in &covers {
        ensure(
            (d.worst.0 as f64) < d.epsilon * d.worst.1 as f64 && d.minimal_prefix <= d.factors.len() as u64,
            || format!("dilate cover for ε = {} is inconsistent", d.epsilon),
        )?;
        let _ = writeln!(
            s,
            "ε = {}: K = {}, worst gap {}/{}, minimal prefix {}",
            d.epsilon,
            d.factors.len(),
            d.worst.0,
            d.worst.1,
            d.minimal_prefix
        );
    }
    let json = ctx.write_json(Command::DilateCover, "dilate.json", &covers)?;
    let _ = write!(s, "wrote {}", json.display());
    Ok(s)
}

pub fn read_artifact<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Artifact<T>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let art: Artifact<T> = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: not a readable artifact: {e}", path.display())))?;
    if art.schema != SCHEMA {
        return Err(CliError::Config(format!("{}: unsupported schema {}", path.display(), art.schema)));
    }
    Ok(art)
}

fn render_cmd(ctx: &Context) -> Result<String, CliError> {
    let r = ctx
        .cfg
        .render
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [render] section".into()))?;
    if r.width == 0 || r.height == 0 {
        return Err(CliError::Config("render width and height must be positive".into()));
    }
    let art: Artifact<CoverageReport> = read_artifact(&r.input)?;
    if art.command != Command::CoverCheck.name() {
        return Err(CliError::Config(format!("{} is not a cover-check report", r.input.display())));
    }
    check_coverage_report(&art.result, &art.config)?;
    let ppm = write_raster(ctx, "render.ppm", &art.result, r.width, r.height)?;
    Ok(format!("{}\nwrote {}", coverage_line(&art.result), ppm.display()))
}
