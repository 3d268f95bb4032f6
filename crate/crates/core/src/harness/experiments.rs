//! The packaged experiments behind the CLI subcommands.

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{Cell, Report, Table, Verdict};
use super::stats::spearman;
use super::verify;
use crate::error::{Error, Result};
use crate::frames::{check_intrinsic_graph, Direction};
use crate::group::{Ball, Point};
use crate::lines::{Estimate, TraceOptions};
use crate::monotonicity::{nm_ball, width_ball};
use crate::multiscale::{
    build_cubes, carleson_sum, check_cubes, cube_betas, extract_graph_piece, fit_beta, forest_table, width_carleson,
    BetaMode, BetaOptions, CubeOptions, WidthCarlesonOptions,
};
use crate::regions::{favard_average, surface_sample, ProjectionOptions, Region, SampleOptions, Surface};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Verify,
    Nm,
    WidthCarleson,
    Bwgl,
    Favard,
    Extract,
    Flatness,
}

impl Mode {
    pub const ALL: [Mode; 7] =
        [Mode::Verify, Mode::Nm, Mode::WidthCarleson, Mode::Bwgl, Mode::Favard, Mode::Extract, Mode::Flatness];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Verify => "verify",
            Mode::Nm => "nm",
            Mode::WidthCarleson => "width-carleson",
            Mode::Bwgl => "bwgl",
            Mode::Favard => "favard",
            Mode::Extract => "extract",
            Mode::Flatness => "flatness",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::InvalidParameter(format!("unknown experiment {s:?}")))
    }
}

/// A reference point on the surface: the center of a horizontal plane, the
/// point closest to the origin otherwise, the equator point `(r e₁, 0)` of a
/// sphere, the graph point over the origin of `W_ν`, or a cloud's first point.
pub fn anchor(s: &Surface) -> Result<Point> {
    let k = s.k();
    let equator = |b: &Ball| {
        let mut v = vec![0.0; 2 * k];
        v[0] = b.radius;
        &b.center * &Point::new(&v, 0.0)
    };
    match s {
        Surface::Hyperplane(p) => Ok(p.center().unwrap_or_else(|| {
            let a = p.euclidean_anchor();
            Point::new(&a[..2 * k], a[2 * k])
        })),
        Surface::Sphere(b) => Ok(equator(b)),
        Surface::UnionBoundary(bs) => bs.first().map(equator).ok_or_else(|| Error::Empty("no balls".into())),
        Surface::Graph(g) => Ok(g.lift(&vec![0.0; 2 * k])),
        Surface::Cloud(c) => c.points.first().cloned().ok_or_else(|| Error::Empty("empty cloud".into())),
    }
}

fn region_of(s: &Surface) -> Result<Region> {
    match s {
        Surface::Hyperplane(p) => Ok(Region::HalfSpace { plane: p.clone() }),
        Surface::Sphere(b) => Ok(Region::Ball { ball: b.clone() }),
        Surface::UnionBoundary(bs) => Ok(Region::UnionOfBalls { balls: bs.clone() }),
        _ => Err(Error::Undefined(format!("{} does not bound a packaged region", s.describe()))),
    }
}

fn point_cells(p: &Point) -> Vec<Cell> {
    p.v.iter().map(|x| Cell::from(*x)).chain([Cell::from(p.t)]).collect()
}

fn coord_names(k: usize) -> Vec<String> {
    (1..=2 * k).map(|i| format!("v{i}")).chain(["t".to_string()]).collect()
}

fn report(cfg: &ExperimentConfig, mode: Mode, results: Vec<Table>, verdicts: Vec<Verdict>, start: Instant) -> Report {
    Report { experiment: mode.name().into(), config: cfg.clone(), results, verdicts, wall_clock: start.elapsed() }
}

/// Runs one experiment; writes its files when `cfg.out` is set.
pub fn run_experiment(cfg: &ExperimentConfig, mode: Mode) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let rep = match mode {
        Mode::Verify => {
            let rows = verify::run_suite(&cfg.suite, cfg)?;
            let (t, v) = verify::checks_table(&rows);
            report(cfg, mode, vec![t], v, start)
        }
        Mode::Nm => nm_experiment(cfg, start)?,
        Mode::WidthCarleson => width_carleson_experiment(cfg, start)?,
        Mode::Bwgl => bwgl_experiment(cfg, start)?,
        Mode::Favard => favard_experiment(cfg, start)?,
        Mode::Extract => extract_experiment(cfg, start)?,
        Mode::Flatness => flatness_experiment(cfg, start)?,
    };
    if let Some(dir) = &cfg.out {
        rep.write(dir)?;
    }
    Ok(rep)
}

fn nm_experiment(cfg: &ExperimentConfig, start: Instant) -> Result<Report> {
    let s = Surface::from_name(&cfg.surface, cfg.k)?;
    let region = region_of(&s)?;
    let p = anchor(&s)?;
    let opts = TraceOptions::default();
    let mut t = Table::new("nm", &["radius", "nm", "nm_std_error", "width", "width_std_error", "n_lines", "seed"]);
    let mut verdicts = Vec::new();
    for (i, &r) in cfg.radii.iter().enumerate() {
        let ball = Ball { center: p.clone(), radius: r };
        let seed = cfg.seed.wrapping_add(i as u64);
        let nm = nm_ball(&region, &ball, cfg.n_lines, seed, &opts)?;
        let w = width_ball(&s, &ball, cfg.n_lines, seed, &opts)?;
        t.push(vec![r.into(), nm.value.into(), nm.std_error.into(), w.value.into(), w.std_error.into(), cfg.n_lines.into(), seed.into()]);
        verdicts.push(Verdict::new(
            format!("nm-below-width/r={r}"),
            nm.value <= w.value + 1e-9,
            format!("NM {:.6e} vs width {:.6e} on the same lines", nm.value, w.value),
        ));
        if matches!(s, Surface::Hyperplane(_)) {
            verdicts.push(Verdict::new(
                format!("half-space-degenerate/r={r}"),
                nm.value.abs() <= 3.0 * nm.std_error + 1e-12 && w.value.abs() <= 3.0 * w.std_error + 1e-12,
                format!("NM {:.3e} ± {:.3e}, width {:.3e} ± {:.3e}", nm.value, nm.std_error, w.value, w.std_error),
            ));
        }
    }
    Ok(report(cfg, Mode::Nm, vec![t], verdicts, start))
}

fn width_carleson_experiment(cfg: &ExperimentConfig, start: Instant) -> Result<Report> {
    let s = Surface::from_name(&cfg.surface, cfg.k)?;
    let p = anchor(&s)?;
    let opts = WidthCarlesonOptions { scales: cfg.scales, cloud_size: cfg.cloud_size, n_lines: cfg.n_lines };
    let mut t = Table::new("width_carleson", &["R", "lhs", "bound"]);
    let mut per = Table::new("per_scale", &["R", "scale_index", "s", "bad_measure"]);
    let mut results = Vec::new();
    for &r in &cfg.radii {
        let w = width_carleson(&s, &p, r, cfg.eps, cfg.seed, &opts)?;
        t.push(vec![r.into(), w.lhs.into(), w.bound.into()]);
        for (i, m) in w.per_scale.iter().enumerate() {
            per.push(vec![r.into(), i.into(), (r * 0.5f64.powi(i as i32)).into(), (*m).into()]);
        }
        results.push(w);
    }
    let mut verdicts = vec![Verdict::new(
        "lhs-finite",
        results.iter().all(|w| w.lhs.is_finite() && w.lhs >= 0.0),
        "every left-hand side is a finite nonnegative number",
    )];
    let target = 2f64.powi(2 * cfg.k as i32 + 1);
    for a in &results {
        for b in &results {
            if (a.radius - 2.0 * b.radius).abs() < 1e-12 * a.radius && b.lhs > 0.0 {
                let ratio = a.lhs / b.lhs;
                verdicts.push(Verdict::new(
                    format!("scaling/R={}", a.radius),
                    ratio >= target / 2.0 && ratio <= 2.0 * target,
                    format!("lhs(R)/lhs(R/2) = {ratio:.4} against 2^(2k+1) = {target}"),
                ));
            }
        }
    }
    Ok(report(cfg, Mode::WidthCarleson, vec![t, per], verdicts, start))
}

fn bwgl_experiment(cfg: &ExperimentConfig, start: Instant) -> Result<Report> {
    let s = Surface::from_name(&cfg.surface, cfg.k)?;
    let p = anchor(&s)?;
    let cloud = match &s {
        Surface::Cloud(c) => c.clone(),
        _ => surface_sample(&s, &Ball { center: p.clone(), radius: cfg.radii[0] }, cfg.cloud_size, cfg.seed, &SampleOptions::default())?,
    };
    let copts = CubeOptions { top_level: cfg.top_level, bottom_level: cfg.bottom_level, ..Default::default() };
    let forest = build_cubes(&cloud, &copts)?;
    let inv = check_cubes(&forest, &cloud);
    // β-numbers are computed on the subtree of the root cube containing the
    // cloud point nearest to the anchor; the packing constants use the first
    // two cubes of that chain.
    let (_, ip) = cloud.nearest(&p).ok_or_else(|| Error::Empty("empty cloud".into()))?;
    let mut chain = Vec::new();
    let mut cur = forest.roots().iter().copied().find(|&r| forest.cubes[r].members.binary_search(&ip).is_ok());
    while let Some(c) = cur {
        chain.push(c);
        cur = forest.cubes[c].children.iter().copied().find(|&r| forest.cubes[r].members.binary_search(&ip).is_ok());
    }
    let ids = forest.subtree(chain[0]);
    let bopts = BetaOptions { seed: cfg.seed, ..BetaOptions::light() };
    let modes = [BetaMode::BilateralArbitrary, BetaMode::BilateralVertical];
    let mut betas = Vec::new();
    for m in modes {
        betas.push(cube_betas(&forest, &ids, &cloud, &s, m, &bopts)?);
    }
    let mut by_cube = vec![[None, None]; forest.cubes.len()];
    for (i, &id) in ids.iter().enumerate() {
        by_cube[id] = [Some(betas[0][i]), Some(betas[1][i])];
    }
    let k = cfg.k;
    let mut cols: Vec<String> = vec!["id".into(), "level".into()];
    cols.extend(coord_names(k));
    cols.extend(["parent", "members", "beta_bilateral_arbitrary", "beta_bilateral_vertical"].map(String::from));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut cubes = Table::new("cubes", &col_refs);
    for row in forest_table(&forest, &cloud) {
        let mut r: Vec<Cell> = vec![row.id.into(), row.level.into()];
        r.extend(row.center.iter().map(|x| Cell::from(*x)));
        r.push(row.parent.map_or(Cell::from(-1i64), Cell::from));
        r.push(row.members.into());
        for b in by_cube[row.id] {
            r.push(b.map_or(Cell::from(""), Cell::from));
        }
        cubes.push(r);
    }
    let mut sums = Table::new("sums", &["mode", "root", "level", "side", "eps", "sum", "constant"]);
    let mut verdicts = vec![Verdict::new(
        "cube-invariants",
        inv.all_hold(),
        format!("{} cubes, {} failures, max 2·diam/(C₀ℓ) = {:.4}", forest.cubes.len(), inv.failures.len(), inv.max_diameter_ratio),
    )];
    for (mi, m) in modes.iter().enumerate() {
        let mut constants = Vec::new();
        for &root in chain.iter().take(2) {
            let side = forest.cubes[root].side();
            let sum = carleson_sum(&forest, root, cfg.eps, &ids, &betas[mi], k);
            let c = sum / side.powi(2 * k as i32 + 1);
            constants.push(c);
            sums.push(vec![m.name().into(), root.into(), forest.cubes[root].level.into(), side.into(), cfg.eps.into(), sum.into(), c.into()]);
        }
        if constants.len() == 2 {
            let (lo, hi) = (constants[0].min(constants[1]), constants[0].max(constants[1]));
            let stable = hi == 0.0 || (lo > 0.0 && hi / lo <= 2.0);
            verdicts.push(Verdict::new(
                format!("carleson-constant-stability/{}", m.name()),
                stable,
                format!("constants {:.4} and {:.4} at two root scales", constants[0], constants[1]),
            ));
        }
    }
    Ok(report(cfg, Mode::Bwgl, vec![cubes, sums], verdicts, start))
}

fn favard_experiment(cfg: &ExperimentConfig, start: Instant) -> Result<Report> {
    let s = Surface::from_name(&cfg.surface, cfg.k)?;
    let p = anchor(&s)?;
    let mut t = Table::new("favard", &["radius", "value", "std_error", "normalised", "n_dirs", "delta", "seed"]);
    let mut verdicts = Vec::new();
    for &r in &cfg.radii {
        let ball = Ball { center: p.clone(), radius: r };
        let e = favard_average(&s, &ball, cfg.n_dirs, cfg.delta, cfg.seed, &ProjectionOptions::default())?;
        let norm = e.value / r.powi(2 * cfg.k as i32 + 1);
        t.push(vec![r.into(), e.value.into(), e.std_error.into(), norm.into(), cfg.n_dirs.into(), cfg.delta.into(), e.seed.into()]);
        verdicts.push(Verdict::new(
            format!("favard-positive/r={r}"),
            e.value > 3.0 * e.std_error && e.value > 0.0,
            format!("average {:.6e} ± {:.3e}", e.value, e.std_error),
        ));
    }
    Ok(report(cfg, Mode::Favard, vec![t], verdicts, start))
}

fn extract_experiment(cfg: &ExperimentConfig, start: Instant) -> Result<Report> {
    let s = Surface::from_name(&cfg.surface, cfg.k)?;
    let p = anchor(&s)?;
    let nu = Direction::axis(cfg.k, 0);
    let mut t = Table::new("extract", &["radius", "points", "kept", "fraction", "violations"]);
    let mut verdicts = Vec::new();
    for &r in &cfg.radii {
        let ball = Ball { center: p.clone(), radius: r };
        let cloud = surface_sample(&s, &ball, cfg.cloud_size, cfg.seed, &SampleOptions::default())?;
        let kept = extract_graph_piece(&cloud, &ball, cfg.gamma, &nu);
        let pts: Vec<Point> = kept.iter().map(|&i| cloud.points[i].clone()).collect();
        let violations = check_intrinsic_graph(&pts, 1.0 / cfg.gamma, &nu)?.len();
        let n = cloud.indices_in(&ball).len();
        t.push(vec![r.into(), n.into(), kept.len().into(), (kept.len() as f64 / n.max(1) as f64).into(), violations.into()]);
        verdicts.push(Verdict::new(format!("graph-condition/r={r}"), violations == 0, format!("{violations} cone violations among {} kept points", kept.len())));
    }
    Ok(report(cfg, Mode::Extract, vec![t], verdicts, start))
}

/// Width of `S` in `B(p, r)` paired with the bilateral β at `B(p, γ r)`.
pub fn flatness_probe(s: &Surface, p: &Point, r: f64, cfg: &ExperimentConfig) -> Result<(Estimate, f64)> {
    let w = width_ball(s, &Ball { center: p.clone(), radius: r }, cfg.n_lines, cfg.seed, &TraceOptions::default())?;
    let b = fit_beta(s, p, cfg.gamma * r, BetaMode::BilateralArbitrary, &BetaOptions { seed: cfg.seed, ..BetaOptions::light() })?;
    Ok((w, b.value))
}

/// Default radii of the flatness design.
pub const FLATNESS_RADII: [f64; 5] = [0.05, 0.1, 0.2, 0.4, 0.8];

fn flatness_experiment(cfg: &ExperimentConfig, start: Instant) -> Result<Report> {
    let s = Surface::from_name(&cfg.surface, cfg.k)?;
    let p0 = anchor(&s)?;
    let pts = match &s {
        Surface::Cloud(c) => c.points.iter().take(4).cloned().collect::<Vec<_>>(),
        _ => surface_sample(&s, &Ball { center: p0.clone(), radius: 1.0 }, 4, cfg.seed, &SampleOptions::default())?.points,
    };
    let radii: Vec<f64> = if cfg.radii.len() >= 2 { cfg.radii.clone() } else { FLATNESS_RADII.to_vec() };
    let mut cols: Vec<String> = coord_names(cfg.k);
    cols.extend(["r", "width", "width_std_error", "beta", "seed"].map(String::from));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("flatness", &col_refs);
    let mut ws = Vec::new();
    let mut bs = Vec::new();
    for p in &pts {
        for &r in &radii {
            let (w, b) = flatness_probe(&s, p, r, cfg)?;
            let mut row = point_cells(p);
            row.extend([r.into(), w.value.into(), w.std_error.into(), b.into(), w.seed.into()]);
            t.push(row);
            ws.push(w.value);
            bs.push(b);
        }
    }
    let rho = spearman(&ws, &bs);
    let verdicts = vec![Verdict::new(
        "width-beta-association",
        rho > 0.5,
        format!("Spearman correlation {rho:.4} over {} probes", ws.len()),
    )];
    Ok(report(cfg, Mode::Flatness, vec![t], verdicts, start))
}
