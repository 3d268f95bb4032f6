//! Invariant suites behind the `verify` experiment.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{Table, Verdict};
use crate::error::{Error, Result};
use crate::frames::{horizontal_project, vertical_project, Direction, FrameSplit};
use crate::group::{Ball, Point};
use crate::lines::{region_trace, sample_lines, surface_hits, Interval, TraceOptions};
use crate::monotonicity::{best_monotone_fit, nc_line, nm_line, width_line, WindowedTrace};
use crate::multiscale::{alpha_and_angle, axis_angle, build_cubes, check_cubes, CubeOptions};
use crate::par;
use crate::regions::{surface_sample, favard_average, Hyperplane, ProjectionOptions, Region, SampleOptions, Surface};
use crate::rng::{self, Domain};

pub const SUITES: &[&str] = &["algebra", "projections", "monotonicity", "measure", "cubes", "angles"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub suite: String,
    pub check: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckRow {
    fn new(suite: &str, check: &str, cases: usize, max_error: f64, tolerance: f64) -> Self {
        CheckRow { suite: suite.into(), check: check.into(), cases, max_error, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

/// A point with coordinates uniform in `[-scale, scale]` (t in `[-scale², scale²]`).
pub fn random_point(k: usize, seed: u64, domain_index: u64, scale: f64) -> Point {
    let mut r = rng::stream(seed, Domain::Test, domain_index);
    let v: Vec<f64> = (0..2 * k).map(|_| rng::uniform(&mut r, -scale, scale)).collect();
    Point::new(&v, rng::uniform(&mut r, -scale * scale, scale * scale))
}

fn random_direction(k: usize, seed: u64, index: u64) -> Direction {
    let mut r = rng::stream(seed, Domain::Directions, index);
    Direction::new(&rng::unit_vector(&mut r, 2 * k)).expect("unit vector")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn coord_err(p: &Point, q: &Point) -> f64 {
    let scale = 1.0 + p.knorm().max(q.knorm()).powi(2);
    let dv = p.v.iter().zip(&q.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    dv.max((p.t - q.t).abs()) / scale
}

fn max_over(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    par::map_range(n, f).into_iter().fold(0.0, f64::max)
}

pub fn algebra(cfg: &ExperimentConfig) -> Vec<CheckRow> {
    let (k, seed, n) = (cfg.k, cfg.seed, cfg.cases);
    let pt = |i: usize, j: u64| random_point(k, seed, 4 * i as u64 + j, 2.0);
    let assoc = max_over(n, |i| {
        let (a, b, c) = (pt(i, 0), pt(i, 1), pt(i, 2));
        coord_err(&(&(&a * &b) * &c), &(&a * &(&b * &c)))
    });
    let inverse = max_over(n, |i| {
        let a = pt(i, 0);
        let e = Point::origin(k);
        coord_err(&(&a * &a.inv()), &e).max(coord_err(&(&a.inv() * &a), &e)).max(coord_err(&(&a * &e), &a))
    });
    let invariance = max_over(n, |i| {
        let (g, p, q) = (pt(i, 0), pt(i, 1), pt(i, 2));
        rel((&g * &p).dist(&(&g * &q)), p.dist(&q))
    });
    let triangle = max_over(n, |i| {
        let (p, q, r) = (pt(i, 0), pt(i, 1), pt(i, 2));
        ((p.dist(&r) - p.dist(&q) - q.dist(&r)) / (1.0 + p.dist(&r))).max(0.0)
    });
    let dilation = max_over(n, |i| {
        let (p, q) = (pt(i, 0), pt(i, 1));
        let r = 0.1 + 3.0 * (i as f64 / n as f64);
        rel(p.dilate(r).dist(&q.dilate(r)), r * p.dist(&q)).max(rel(p.dilate(r).knorm(), r * p.knorm()))
    });
    vec![
        CheckRow::new("algebra", "associativity", n, assoc, 1e-9),
        CheckRow::new("algebra", "identity-and-inverse", n, inverse, 1e-9),
        CheckRow::new("algebra", "left-invariance", n, invariance, 1e-9),
        CheckRow::new("algebra", "triangle-inequality", n, triangle, 1e-9),
        CheckRow::new("algebra", "dilation-homogeneity", n, dilation, 1e-9),
    ]
}

pub fn projections(cfg: &ExperimentConfig) -> Vec<CheckRow> {
    let (k, seed, n) = (cfg.k, cfg.seed, cfg.cases);
    let recompose = max_over(n, |i| {
        let p = random_point(k, seed, i as u64, 2.0);
        let nu = random_direction(k, seed, i as u64);
        let split = FrameSplit::new(&nu, &p).expect("split");
        coord_err(&split.recompose(), &p)
    });
    let idempotent = max_over(n, |i| {
        let p = random_point(k, seed, i as u64, 2.0);
        let nu = random_direction(k, seed, i as u64);
        let w = vertical_project(&nu, &p);
        let l = horizontal_project(&nu, &p);
        coord_err(&vertical_project(&nu, &w), &w).max(coord_err(&horizontal_project(&nu, &l), &l))
    });
    let mut worked = 0.0;
    if k == 1 {
        let w = vertical_project(&Direction::axis(1, 0), &Point::new(&[1.0, 1.0], 0.0));
        worked = coord_err(&w, &Point::new(&[0.0, 1.0], 0.5));
    }
    vec![
        CheckRow::new("projections", "recomposition", n, recompose, 1e-12),
        CheckRow::new("projections", "idempotence", n, idempotent, 1e-12),
        CheckRow::new("projections", "worked-example", 1, worked, 1e-12),
    ]
}

/// Random disjoint segments in `[0, len]`.
pub fn random_trace(seed: u64, index: u64, len: f64) -> WindowedTrace {
    let mut r = rng::stream(seed, Domain::Test, index);
    let m = 1 + (rng::uniform(&mut r, 0.0, 6.0) as usize);
    let mut cuts: Vec<f64> = (0..2 * m).map(|_| rng::uniform(&mut r, 0.0, len)).collect();
    cuts.sort_by(f64::total_cmp);
    let raw: Vec<Interval> = cuts.chunks(2).map(|c| Interval { lo: c[0], hi: c[1] }).collect();
    WindowedTrace::new(Interval { lo: 0.0, hi: len }, &raw)
}

/// Grid minimisation of `|A Δ J|` over intervals with endpoints on a grid of step `h`.
pub fn nc_grid(trace: &WindowedTrace, h: f64) -> f64 {
    let w = trace.window;
    let m = ((w.hi - w.lo) / h).ceil() as usize;
    let xs: Vec<f64> = (0..=m).map(|i| (w.lo + i as f64 * h).min(w.hi)).collect();
    let mut best = trace.l1_to_interval(None);
    for (i, &a) in xs.iter().enumerate() {
        for &b in &xs[i + 1..] {
            best = best.min(trace.l1_to_interval(Some(Interval { lo: a, hi: b })));
        }
    }
    best
}

/// A random region whose boundary passes near the origin.
pub fn random_region(k: usize, seed: u64, index: u64) -> Region {
    let mut r = rng::stream(seed, Domain::Regions, index);
    let pick = rng::uniform(&mut r, 0.0, 4.0) as usize;
    let mut point = |s: f64| {
        let v: Vec<f64> = (0..2 * k).map(|_| rng::uniform(&mut r, -s, s)).collect();
        let t = rng::uniform(&mut r, -s * s, s * s);
        Point::new(&v, t)
    };
    match pick {
        0 => {
            let c = point(0.6);
            Region::Ball { ball: Ball { center: c, radius: 0.7 } }
        }
        1 => {
            let balls = (0..3).map(|_| Ball { center: point(0.7), radius: 0.45 }).collect();
            Region::UnionOfBalls { balls }
        }
        2 => {
            let c = point(0.6);
            Region::Complement { inner: Box::new(Region::Ball { ball: Ball { center: c, radius: 0.6 } }) }
        }
        _ => {
            let q = point(0.3);
            let m: Vec<f64> = q.v.iter().map(|x| x + 0.2).chain([q.t + 0.1]).collect();
            let plane = Hyperplane::new(&m, 0.05).expect("nonzero normal");
            Region::HalfSpace { plane }
        }
    }
}

pub fn monotonicity(cfg: &ExperimentConfig) -> Vec<CheckRow> {
    let (k, seed, n) = (cfg.k, cfg.seed, cfg.cases);
    let h = 1e-2;
    let nc_cases = n.min(1000);
    let oracle = max_over(nc_cases, |i| {
        let t = random_trace(seed, i as u64, 3.0);
        let exact = nc_line(&t);
        let grid = nc_grid(&t, h);
        // The exact value never exceeds the grid minimum, which is within h of it.
        ((exact - grid).max(0.0) + (grid - exact - h).max(0.0)).max(0.0)
    });
    let two_blocks = WindowedTrace::new(
        Interval { lo: 0.0, hi: 3.0 },
        &[Interval { lo: 0.0, hi: 1.0 }, Interval { lo: 2.0, hi: 3.0 }],
    );
    let named = (nc_line(&two_blocks) - 1.0).abs();

    let n_regions = (n / 10).clamp(1, 100);
    let n_lines = 200;
    let opts = TraceOptions::default();
    let ball = Ball::unit(k);
    let per_region = par::map_range(n_regions, |i| {
        let region = random_region(k, seed, i as u64);
        let boundary = region.boundary().expect("regions here have boundaries");
        let lines = sample_lines(&ball, n_lines, seed.wrapping_add(i as u64)).expect("lines");
        let mut excess = 0.0f64;
        let mut fit = 0.0f64;
        for l in lines.lines.iter().filter(|l| l.window.is_some()) {
            let (window, segs) = region_trace(&l.line, &ball, &region, &opts);
            let Some(window) = window else { continue };
            let trace = WindowedTrace::new(window, &segs.intervals);
            let nm = nm_line(&trace);
            let hits = surface_hits(&l.line, &ball, &boundary, &opts);
            let width = if hits.embedded { 0.0 } else { width_line(&hits.hits) };
            excess = excess.max(nm - width);
            fit = fit.max(best_monotone_fit(&trace).1 - nm);
        }
        (excess, fit)
    });
    let excess = per_region.iter().map(|x| x.0).fold(0.0, f64::max);
    let fit = per_region.iter().map(|x| x.1).fold(0.0, f64::max);
    vec![
        CheckRow::new("monotonicity", "nc-grid-oracle", nc_cases, oracle, 1e-12),
        CheckRow::new("monotonicity", "nc-two-blocks", 1, named, 0.0),
        CheckRow::new("monotonicity", "nm-below-width", n_regions * n_lines, excess.max(0.0), 1e-6),
        CheckRow::new("monotonicity", "monotone-fit-residual", n_regions * n_lines, fit.max(0.0), 1e-9),
    ]
}

pub fn measure(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>> {
    let (k, seed, n) = (cfg.k, cfg.seed, cfg.n_lines);
    let base = [Point::origin(k), random_point(k, seed, 1, 1.0), random_point(k, seed, 2, 3.0)];
    let mut ests = Vec::new();
    for (i, q) in base.iter().enumerate() {
        ests.push(sample_lines(&Ball { center: q.clone(), radius: 1.0 }, n, seed + i as u64)?.measure_of_hitting());
    }
    let mut z_inv = 0.0f64;
    for i in 0..ests.len() {
        for j in i + 1..ests.len() {
            z_inv = z_inv.max(ests[i].z_distance(&ests[j]));
        }
    }
    let mut normalised = Vec::new();
    for (i, r) in [0.5f64, 1.0, 2.0].into_iter().enumerate() {
        let e = sample_lines(&Ball { center: Point::origin(k), radius: r }, n, seed + 10 + i as u64)?.measure_of_hitting();
        normalised.push(e.value / r.powi(2 * k as i32 + 1));
    }
    let lo = normalised.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = normalised.iter().copied().fold(0.0, f64::max);
    let spread = hi / lo - 1.0;
    let unit = Ball::unit(k);
    let by_projection = favard_average(&Surface::Sphere(unit.clone()), &Ball { center: Point::origin(k), radius: 1.5 }, cfg.n_dirs, cfg.delta, seed, &ProjectionOptions::default())?;
    let z_two = ests[0].z_distance(&by_projection);
    Ok(vec![
        CheckRow::new("measure", "left-invariance-z", 3, z_inv, 3.0),
        CheckRow::new("measure", "homogeneity-spread", 3, spread, 0.05),
        CheckRow::new("measure", "two-estimators-z", 2, z_two, 3.0),
    ])
}

pub fn cubes(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>> {
    let k = cfg.k;
    let mut rows = Vec::new();
    for name in ["vertical-hyperplane", "koranyi-sphere", "intrinsic-graph"] {
        let s = Surface::from_name(name, k)?;
        let center = super::experiments::anchor(&s)?;
        let cloud = surface_sample(&s, &Ball { center, radius: 1.0 }, cfg.cloud_size, cfg.seed, &SampleOptions::default())?;
        let opts = CubeOptions { top_level: 0, bottom_level: -2, ..Default::default() };
        let forest = build_cubes(&cloud, &opts)?;
        let inv = check_cubes(&forest, &cloud);
        rows.push(CheckRow::new("cubes", &format!("invariants-{name}"), forest.cubes.len(), inv.failures.len() as f64, 0.0));
    }
    Ok(rows)
}

pub fn angles(cfg: &ExperimentConfig) -> Vec<CheckRow> {
    let (k, seed, n) = (cfg.k, cfg.seed, cfg.cases);
    let err = max_over(n, |i| {
        let c = random_point(k, seed, 2 * i as u64, 2.0);
        let p = random_point(k, seed, 2 * i as u64 + 1, 2.0);
        let plane = Hyperplane::horizontal_through(&c);
        let (_, angle) = alpha_and_angle(&p, &plane);
        (angle - axis_angle(&p, &plane)).abs()
    });
    vec![CheckRow::new("angles", "arctan-formula", n, err, 1e-9)]
}

pub fn run_suite(name: &str, cfg: &ExperimentConfig) -> Result<Vec<CheckRow>> {
    match name {
        "algebra" => Ok(algebra(cfg)),
        "projections" => Ok(projections(cfg)),
        "monotonicity" => Ok(monotonicity(cfg)),
        "measure" => measure(cfg),
        "cubes" => cubes(cfg),
        "angles" => Ok(angles(cfg)),
        "all" => {
            let mut rows = Vec::new();
            for s in SUITES {
                rows.extend(run_suite(s, cfg)?);
            }
            Ok(rows)
        }
        other => Err(Error::InvalidParameter(format!("unknown suite {other:?}; expected one of {SUITES:?} or all"))),
    }
}

pub fn checks_table(rows: &[CheckRow]) -> (Table, Vec<Verdict>) {
    let mut t = Table::new("checks", &["suite", "check", "cases", "max_error", "tolerance", "passed"]);
    let mut verdicts = Vec::new();
    for r in rows {
        t.push(vec![
            r.suite.as_str().into(),
            r.check.as_str().into(),
            r.cases.into(),
            r.max_error.into(),
            r.tolerance.into(),
            r.passed().into(),
        ]);
        verdicts.push(Verdict::new(
            format!("{}/{}", r.suite, r.check),
            r.passed(),
            format!("max error {:e} vs tolerance {:e} over {} cases", r.max_error, r.tolerance, r.cases),
        ));
    }
    (t, verdicts)
}
