//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p heisur --test acceptance`. Each criterion compares
//! the library against hand-written reference formulas from `common`, or
//! against exact properties that hold by construction.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use heisur::frames::{horizontal_project, vertical_project, Direction, FrameSplit};
use heisur::harness::{run_experiment, Cell, ExperimentConfig, Mode};
use heisur::lines::{region_trace, sample_lines, surface_hits, Interval, TraceOptions};
use heisur::monotonicity::{best_monotone_fit, nc_line, nm_ball, nm_line, width_ball, width_line, WindowedTrace};
use heisur::multiscale::{
    alpha_and_angle, build_cubes, extract_graph_piece, fit_beta, vertical_surrogate, width_carleson, BetaMode, BetaOptions, CubeOptions,
    WidthCarlesonOptions,
};
use heisur::regions::{favard_average, projection_measure, surface_sample, ProjectionOptions, SampleOptions};
use heisur::rng::{self, Domain};
use heisur::{Ball, Cloud, Hyperplane, Point, Region, Surface};

type Outcome = Result<(bool, String), String>;

const SEED: u64 = 20_240_611;

fn point(k: usize, seed: u64, i: u64, scale: f64) -> Point {
    let mut r = rng::stream(seed, Domain::Test, i);
    let v: Vec<f64> = (0..2 * k).map(|_| rng::uniform(&mut r, -scale, scale)).collect();
    Point::new(&v, rng::uniform(&mut r, -scale * scale, scale * scale))
}

fn direction(k: usize, seed: u64, i: u64) -> Direction {
    let mut r = rng::stream(seed, Domain::Directions, i);
    Direction::new(&rng::unit_vector(&mut r, 2 * k)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Coordinate error scaled by the size of the points.
fn coord_gap(p: &Point, v: &[f64], t: f64) -> f64 {
    let scale = 1.0 + common::koranyi(&p.v, p.t).powi(2);
    let dv = p.v.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    dv.max((p.t - t).abs()) / scale
}

fn max_par(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    heisur::par::map_range(n, f).into_iter().fold(0.0, f64::max)
}

fn algebra() -> Outcome {
    let start = Instant::now();
    let n = 100_000;
    let mut worst = 0.0f64;
    for k in [1usize, 2] {
        let pt = |i: usize, j: u64| point(k, SEED + k as u64, 4 * i as u64 + j, 2.0);
        worst = worst.max(max_par(n, |i| {
            let (a, b, c) = (pt(i, 0), pt(i, 1), pt(i, 2));
            let ab = &a * &b;
            let (v, t) = common::mul(&a, &b);
            let mut e = coord_gap(&ab, &v, t);
            let lhs = &ab * &c;
            let rhs = &a * &(&b * &c);
            e = e.max(coord_gap(&lhs, &rhs.v, rhs.t));
            let id = &a * &a.inv();
            e = e.max(coord_gap(&id, &vec![0.0; 2 * k], 0.0));
            let r = 0.1 + 3.0 * (i as f64 / n as f64);
            let d = a.dist(&b);
            e = e.max(rel(d, common::dist(&a, &b)));
            e = e.max(rel((&c * &a).dist(&(&c * &b)), d));
            e = e.max(rel(a.dilate(r).dist(&b.dilate(r)), r * d));
            e.max(((a.dist(&c) - d - b.dist(&c)) / (1.0 + a.dist(&c))).max(0.0))
        }));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst <= 1e-9 && secs < 10.0, format!("max relative error {worst:.2e} over 2×10⁵ cases in {secs:.2} s")))
}

fn projections() -> Outcome {
    let n = 100_000;
    let worst = max_par(n, |i| {
        let k = 1 + i % 2;
        let p = point(k, SEED, i as u64, 2.0);
        let nu = direction(k, SEED, i as u64);
        let (w, wt) = common::vertical_part(nu.as_slice(), &p.v, p.t);
        let pw = vertical_project(&nu, &p);
        let pl = horizontal_project(&nu, &p);
        let split = FrameSplit::new(&nu, &p).unwrap();
        let back = split.recompose();
        let ww = vertical_project(&nu, &pw);
        let ll = horizontal_project(&nu, &pl);
        coord_gap(&pw, &w, wt)
            .max(coord_gap(&back, &p.v, p.t))
            .max(coord_gap(&(&pw * &pl), &p.v, p.t))
            .max(coord_gap(&ww, &pw.v, pw.t))
            .max(coord_gap(&ll, &pl.v, pl.t))
    });
    let worked = vertical_project(&Direction::axis(1, 0), &Point::new(&[1.0, 1.0], 0.0));
    let werr = coord_gap(&worked, &[0.0, 1.0], 0.5);
    Ok((worst <= 1e-12 && werr <= 1e-12, format!("max error {worst:.2e} on 10⁵ cases; worked example off by {werr:.1e}")))
}

fn nc_oracle() -> Outcome {
    let h = 0.01;
    let cases = 1000;
    let worst = max_par(cases, |i| {
        let mut r = rng::stream(SEED, Domain::Test, 7_000 + i as u64);
        let m = 1 + (rng::uniform(&mut r, 0.0, 5.0) as usize);
        let mut cuts: Vec<f64> = (0..2 * m).map(|_| rng::uniform(&mut r, 0.0, 3.0)).collect();
        cuts.sort_by(f64::total_cmp);
        let segs: Vec<(f64, f64)> = cuts.chunks(2).map(|c| (c[0], c[1])).collect();
        let raw: Vec<Interval> = segs.iter().map(|&(lo, hi)| Interval { lo, hi }).collect();
        let exact = nc_line(&WindowedTrace::new(Interval { lo: 0.0, hi: 3.0 }, &raw));
        let grid = common::grid_nc(&segs, 0.0, 3.0, h);
        // The exact minimum lies below the grid minimum and within one step of it.
        (exact - grid - 1e-12).max(0.0).max(grid - exact - h)
    });
    let blocks = WindowedTrace::new(Interval { lo: 0.0, hi: 3.0 }, &[Interval { lo: 0.0, hi: 1.0 }, Interval { lo: 2.0, hi: 3.0 }]);
    let named = nc_line(&blocks);
    Ok((worst <= 0.0 && named == 1.0, format!("worst excess over grid bracket {worst:.2e} on 10³ cases; [0,1]∪[2,3] gives {named}")))
}

fn corpus_region(i: u64) -> Region {
    let mut r = rng::stream(SEED, Domain::Regions, i);
    let mut p = |s: f64| Point::new(&[rng::uniform(&mut r, -s, s), rng::uniform(&mut r, -s, s)], rng::uniform(&mut r, -s * s, s * s));
    match i % 4 {
        0 => Region::Ball { ball: Ball { center: p(0.6), radius: 0.7 } },
        1 => Region::UnionOfBalls { balls: (0..3).map(|_| Ball { center: p(0.7), radius: 0.45 }).collect() },
        2 => Region::Complement { inner: Box::new(Region::Ball { ball: Ball { center: p(0.6), radius: 0.6 } }) },
        _ => {
            let q = p(0.3);
            Region::HalfSpace { plane: Hyperplane::new(&[q.v[0] + 0.2, q.v[1] - 0.1, q.t + 0.3], 0.05).unwrap() }
        }
    }
}

/// Per region: (lines used, max of nm − width, max of fit residual − nm).
fn corpus() -> Vec<(usize, f64, f64)> {
    let ball = Ball::unit(1);
    let opts = TraceOptions::default();
    heisur::par::map_range(100, |i| {
        let region = corpus_region(i as u64);
        let boundary = region.boundary().unwrap();
        let lines = sample_lines(&ball, 2000, SEED + i as u64).unwrap();
        let (mut used, mut excess, mut fit) = (0, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for l in lines.lines.iter().filter(|l| l.window.is_some()).take(200) {
            let (Some(window), segs) = region_trace(&l.line, &ball, &region, &opts) else { continue };
            let trace = WindowedTrace::new(window, &segs.intervals);
            let nm = nm_line(&trace);
            let hits = surface_hits(&l.line, &ball, &boundary, &opts);
            let width = if hits.embedded { 0.0 } else { width_line(&hits.hits) };
            excess = excess.max(nm - width);
            fit = fit.max(best_monotone_fit(&trace).1 - nm);
            used += 1;
        }
        (used, excess, fit)
    })
}

fn nm_below_width() -> Outcome {
    let rows = corpus();
    let violations: usize = rows.iter().filter(|r| r.1 > 1e-6).count();
    let worst = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let used: usize = rows.iter().map(|r| r.0).sum();
    Ok((violations == 0, format!("{violations} violating regions; max nm − width = {worst:.2e} over {used} line traces")))
}

fn monotone_fit() -> Outcome {
    let rows = corpus();
    let worst = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    Ok((worst <= 1e-9, format!("max residual − nm = {worst:.2e}")))
}

fn degeneracies() -> Outcome {
    let opts = TraceOptions::default();
    let n = 10_000;
    let planes = [
        Hyperplane::vertical(&Direction::axis(1, 0), 0.0),
        Hyperplane::horizontal_through(&Point::origin(1)),
        Hyperplane::new(&[0.3, -0.5, 0.8], 0.1).unwrap(),
        Hyperplane::new(&[1.0, 2.0, -0.4], -0.3).unwrap(),
    ];
    let balls = [Ball::unit(1), Ball { center: Point::new(&[0.4, -0.2], 0.1), radius: 0.5 }];
    let mut worst_z = 0.0f64;
    for (i, pl) in planes.iter().enumerate() {
        for (j, b) in balls.iter().enumerate() {
            let seed = SEED + (10 * i + j) as u64;
            let half = Region::HalfSpace { plane: pl.clone() };
            for e in [nm_ball(&half, b, n, seed, &opts).map_err(|e| e.to_string())?, width_ball(&Surface::Hyperplane(pl.clone()), b, n, seed, &opts).map_err(|e| e.to_string())?] {
                let z = if e.value == 0.0 { 0.0 } else if e.std_error == 0.0 { f64::INFINITY } else { e.value.abs() / e.std_error };
                worst_z = worst_z.max(z);
            }
        }
    }
    Ok((worst_z <= 3.0, format!("largest |value|/std_error {worst_z:.3} over 4 half-spaces × 2 balls with 10⁴ lines")))
}

fn line_measure() -> Outcome {
    let n = 40_000;
    let mut ests = Vec::new();
    for (i, q) in [Point::origin(1), Point::new(&[0.7, -1.1], 0.4), Point::new(&[-2.5, 1.0], -3.0)].iter().enumerate() {
        let b = Ball { center: q.clone(), radius: 1.0 };
        ests.push(sample_lines(&b, n, SEED + i as u64).map_err(|e| e.to_string())?.measure_of_hitting());
    }
    let mut z_inv = 0.0f64;
    for i in 0..3 {
        for j in i + 1..3 {
            z_inv = z_inv.max(ests[i].z_distance(&ests[j]));
        }
    }
    let mut norm = Vec::new();
    for (i, r) in [0.5f64, 1.0, 2.0].into_iter().enumerate() {
        let b = Ball { center: Point::origin(1), radius: r };
        norm.push(sample_lines(&b, n, SEED + 10 + i as u64).map_err(|e| e.to_string())?.measure_of_hitting().value / r.powi(3));
    }
    let spread = norm.iter().copied().fold(0.0, f64::max) / norm.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let proj = favard_average(&Surface::Sphere(Ball::unit(1)), &Ball { center: Point::origin(1), radius: 1.5 }, 64, 1.0 / 128.0, SEED, &ProjectionOptions::default())
        .map_err(|e| e.to_string())?;
    let z_two = ests[0].z_distance(&proj);
    Ok((
        z_inv <= 3.0 && spread <= 0.05 && z_two <= 3.0,
        format!(
            "invariance z {z_inv:.2}; homogeneity spread {:.2}%; line sampling {:.4} vs projections {:.4} (z {z_two:.2})",
            100.0 * spread,
            ests[0].value,
            proj.value
        ),
    ))
}

fn projection_oracle() -> Outcome {
    let truth = 2.0 * 0.5 * common::quartic_disc_area();
    let mut worst = 0.0f64;
    let mut seen = Vec::new();
    for nu in [Direction::axis(1, 0), direction(1, SEED, 99)] {
        let w = Surface::Hyperplane(Hyperplane::vertical(&nu, 0.0));
        let e = projection_measure(&w, &Ball::unit(1), &nu, 1.0 / 256.0, &ProjectionOptions::default()).map_err(|e| e.to_string())?;
        worst = worst.max(rel(e.value, truth));
        seen.push(e.value);
    }
    Ok((worst <= 0.02, format!("areas {seen:.5?} vs quadrature {truth:.6}; worst relative error {:.3}%", 100.0 * worst)))
}

fn favard() -> Outcome {
    let mut worst: Option<(f64, f64)> = None;
    for i in 0..50u64 {
        let mut r = rng::stream(SEED, Domain::Hyperplanes, i);
        let m = rng::unit_vector(&mut r, 3);
        let pl = Surface::Hyperplane(Hyperplane::new(&m, 0.0).unwrap());
        let e = favard_average(&pl, &Ball::unit(1), 64, 1.0 / 64.0, SEED + i, &ProjectionOptions::default()).map_err(|e| e.to_string())?;
        let margin = e.value - 3.0 * e.std_error;
        if worst.is_none_or(|w| margin < w.0 - 3.0 * w.1) {
            worst = Some((e.value, e.std_error));
        }
    }
    let (v, se) = worst.unwrap();
    Ok((v > 3.0 * se, format!("empirical constant c̄ = {v:.4} ± {se:.4} (weakest of 50 planes)")))
}

fn beta_degeneracies() -> Outcome {
    let opts = BetaOptions::default();
    let mut worst_vertical = 0.0f64;
    for i in 0..3u64 {
        let nu = direction(1, SEED, 200 + i);
        let b = 0.3 * i as f64 - 0.2;
        let pl = Hyperplane::vertical(&nu, b);
        let x = Surface::Hyperplane(pl);
        let n = nu.as_slice();
        // A point of the plane: horizontal part bν + τν^⊥ and any height.
        let p = Point::new(&[b * n[0] - 0.4 * n[1], b * n[1] + 0.4 * n[0]], 0.15 * i as f64);
        for s in [0.25, 0.5, 1.0] {
            let r = fit_beta(&x, &p, s, BetaMode::BilateralVertical, &opts).map_err(|e| e.to_string())?;
            worst_vertical = worst_vertical.max(r.value);
        }
    }
    let floor = 0.5;
    let h = Surface::Hyperplane(Hyperplane::horizontal_through(&Point::origin(1)));
    let mut h_betas = Vec::new();
    for s in [0.25, 0.5, 1.0] {
        h_betas.push(fit_beta(&h, &Point::origin(1), s, BetaMode::BilateralVertical, &opts).map_err(|e| e.to_string())?.value);
    }
    let lowest = h_betas.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        worst_vertical <= 1e-3 && lowest >= floor,
        format!("vertical planes: max β {worst_vertical:.2e}; H at its center: β {h_betas:.4?} against floor {floor}"),
    ))
}

fn width_scaling() -> Outcome {
    let start = Instant::now();
    let s = Surface::Sphere(Ball::unit(1));
    let p = Point::new(&[1.0, 0.0], 0.0);
    let opts = WidthCarlesonOptions { scales: 4, cloud_size: 200, n_lines: 10_000 };
    let big = width_carleson(&s, &p, 0.5, 0.01, SEED, &opts).map_err(|e| e.to_string())?;
    let small = width_carleson(&s, &p, 0.25, 0.01, SEED, &opts).map_err(|e| e.to_string())?;
    let ratio = big.lhs / small.lhs;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        (4.0..=16.0).contains(&ratio) && secs < 300.0,
        format!("lhs {:.4e} / {:.4e} = {ratio:.3} (target [4, 16]); {secs:.1} s", big.lhs, small.lhs),
    ))
}

fn sums_column(rep: &heisur::harness::Report) -> Vec<(String, f64, f64)> {
    let t = rep.table("sums").expect("sums table");
    let col = |n: &str| t.columns.iter().position(|c| c == n).unwrap();
    let (m, s, c) = (col("mode"), col("sum"), col("constant"));
    let num = |x: &Cell| match x {
        Cell::Float(f) => *f,
        Cell::Int(i) => *i as f64,
        Cell::Text(_) => f64::NAN,
    };
    t.rows
        .iter()
        .map(|r| {
            let name = match &r[m] {
                Cell::Text(x) => x.clone(),
                _ => String::new(),
            };
            (name, num(&r[s]), num(&r[c]))
        })
        .collect()
}

fn bwgl() -> Outcome {
    let mut cfg = ExperimentConfig { eps: 0.1, radii: vec![0.6], cloud_size: 1500, top_level: -1, bottom_level: -4, seed: SEED, ..Default::default() };
    let sphere = run_experiment(&cfg, Mode::Bwgl).map_err(|e| e.to_string())?;
    let stable = sphere.verdicts.iter().filter(|v| v.check.starts_with("carleson-constant-stability")).all(|v| v.passed);
    let invariants = sphere.verdicts.iter().any(|v| v.check == "cube-invariants" && v.passed);
    let consts: Vec<String> = sums_column(&sphere).iter().map(|(m, _, c)| format!("{m} {c:.3}")).collect();
    cfg.surface = "vertical-hyperplane".into();
    cfg.cloud_size = 400;
    cfg.bottom_level = -3;
    let flat = run_experiment(&cfg, Mode::Bwgl).map_err(|e| e.to_string())?;
    let flat_max = sums_column(&flat).iter().map(|r| r.1).fold(0.0, f64::max);
    Ok((
        stable && invariants && flat_max == 0.0,
        format!("sphere constants [{}]; vertical hyperplane max sum {flat_max}", consts.join(", ")),
    ))
}

/// Checks every cube property directly from the point lists.
fn cube_failures(cloud: &Cloud, opts: &CubeOptions) -> Result<(usize, usize), String> {
    let forest = build_cubes(cloud, opts).map_err(|e| e.to_string())?;
    let n = cloud.len();
    let mut fails = 0;
    for level in (opts.bottom_level..=opts.top_level).rev() {
        let mut count = vec![0; n];
        for q in forest.cubes.iter().filter(|q| q.level == level) {
            for &m in &q.members {
                count[m] += 1;
            }
        }
        fails += count.iter().filter(|&&c| c != 1).count();
    }
    for q in &forest.cubes {
        let side = 2f64.powi(q.level);
        if let Some(p) = q.parent {
            let parent = &forest.cubes[p];
            fails += q.members.iter().filter(|m| !parent.members.contains(m)).count();
            if parent.level != q.level + 1 {
                fails += 1;
            }
        } else if q.level != opts.top_level {
            fails += 1;
        }
        let mut diam = 0.0f64;
        for (a, &i) in q.members.iter().enumerate() {
            for &j in &q.members[a + 1..] {
                diam = diam.max(common::dist(&cloud.points[i], &cloud.points[j]));
            }
        }
        if 2.0 * diam >= opts.c0 * side {
            fails += 1;
        }
        let c = &cloud.points[q.center];
        fails += (0..n).filter(|&m| common::dist(&cloud.points[m], c) <= opts.c_inner * side && !q.members.contains(&m)).count();
    }
    Ok((forest.cubes.len(), fails))
}

fn cubes() -> Outcome {
    let mut report = Vec::new();
    let mut total = 0;
    for name in ["vertical-hyperplane", "koranyi-sphere", "intrinsic-graph"] {
        let s = Surface::from_name(name, 1).map_err(|e| e.to_string())?;
        let center = heisur::harness::anchor(&s).map_err(|e| e.to_string())?;
        let cloud = surface_sample(&s, &Ball { center, radius: 1.0 }, 800, SEED, &SampleOptions::default()).map_err(|e| e.to_string())?;
        let opts = CubeOptions { top_level: 0, bottom_level: -3, ..Default::default() };
        let (n, f) = cube_failures(&cloud, &opts)?;
        total += f;
        report.push(format!("{name}: {n} cubes, {f} failures"));
    }
    Ok((total == 0, report.join("; ")))
}

fn angles() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let p = point(1, SEED, 50_000 + 2 * i, 2.0);
        let mut r = rng::stream(SEED, Domain::Hyperplanes, 1_000 + i);
        let mut m = rng::unit_vector(&mut r, 3);
        if m[2].abs() < 0.05 {
            m[2] = 0.05f64.copysign(m[2]);
        }
        let b = rng::uniform(&mut r, -1.0, 1.0);
        let plane = Hyperplane::new(&m, b).unwrap();
        let on_plane = |x: f64, y: f64| Point::new(&[x, y], (b - m[0] * x - m[1] * y) / m[2]);
        let moved: Vec<[f64; 3]> = [on_plane(0.0, 0.0), on_plane(1.0, 0.0), on_plane(0.0, 1.0)]
            .iter()
            .map(|q| {
                let (v, t) = common::mul(&p.inv(), q);
                [v[0], v[1], t]
            })
            .collect();
        let oracle = common::angle_to_t_axis(&moved[0], &moved[1], &moved[2]);
        let (_, angle) = alpha_and_angle(&p, &plane);
        worst = worst.max((angle - oracle).abs());
    }
    let alphas = [4.0, 8.0, 16.0, 40.0];
    let mut errs = Vec::new();
    for a in alphas {
        let plane = Hyperplane::horizontal_through(&Point::new(&[a, 0.0], 0.0));
        let (_, err) = vertical_surrogate(&plane, &Ball::unit(1), &BetaOptions { seed: SEED, ..BetaOptions::light() }).map_err(|e| e.to_string())?;
        errs.push(err);
    }
    let x: Vec<f64> = alphas.iter().map(|a| (1.0 / a).ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let slope = common::ls_slope(&x, &y);
    Ok((
        worst <= 1e-9 && (slope - 1.0).abs() <= 0.2,
        format!("max angle error {worst:.2e} on 10³ planes; surrogate errors {errs:.4?} give slope {slope:.3}"),
    ))
}

fn extraction() -> Outcome {
    let nu = Direction::axis(1, 0);
    let gamma = 0.5;
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["vertical-hyperplane", "horizontal-plane", "koranyi-sphere", "intrinsic-graph", "half-space"] {
        let s = Surface::from_name(name, 1).map_err(|e| e.to_string())?;
        let center = heisur::harness::anchor(&s).map_err(|e| e.to_string())?;
        let ball = Ball { center, radius: 1.0 };
        let cloud = surface_sample(&s, &ball, 400, SEED, &SampleOptions::default()).map_err(|e| e.to_string())?;
        let kept = extract_graph_piece(&cloud, &ball, gamma, &nu);
        let mut violations = 0;
        for &i in &kept {
            for &j in &kept {
                if i != j && common::cone_contains(gamma, nu.as_slice(), &cloud.points[i], &cloud.points[j]) {
                    violations += 1;
                }
            }
        }
        let inside = cloud.indices_in(&ball).len();
        ok &= violations == 0;
        if name == "vertical-hyperplane" {
            ok &= kept.len() == inside;
        }
        notes.push(format!("{name} {}/{inside} kept, {violations} violations", kept.len()));
    }
    let bad_pair = vec![Point::origin(1), Point::new(&[0.5, 0.0], 0.0), Point::new(&[0.0, 0.3], 0.0)];
    assert!(common::cone_contains(gamma, nu.as_slice(), &bad_pair[0], &bad_pair[1]));
    let h_cloud = Cloud::new(bad_pair, vec![1.0; 3], Some(0.1)).map_err(|e| e.to_string())?;
    let kept = extract_graph_piece(&h_cloud, &Ball::unit(1), gamma, &nu);
    ok &= kept.len() < 3 && !kept.is_empty();
    notes.push(format!("H with a violating pair keeps {}/3", kept.len()));
    Ok((ok, notes.join("; ")))
}

fn small_config(mode: Mode) -> ExperimentConfig {
    let mut c = ExperimentConfig { seed: SEED, n_lines: 1500, n_dirs: 8, cloud_size: 150, cases: 300, delta: 1.0 / 32.0, ..Default::default() };
    match mode {
        Mode::Verify => c.suite = "all".into(),
        Mode::Nm => c.radii = vec![0.5, 0.25],
        Mode::WidthCarleson => {
            c.radii = vec![0.5, 0.25];
            c.scales = 2;
            c.cloud_size = 60;
            c.n_lines = 500;
        }
        Mode::Bwgl => {
            c.radii = vec![0.6];
            c.cloud_size = 200;
            c.top_level = -1;
            c.bottom_level = -2;
        }
        Mode::Flatness => {
            c.radii = vec![0.1, 0.3];
            c.n_lines = 500;
        }
        _ => {}
    }
    c
}

/// Every file written by one run, sorted by name.
fn outputs(mode: Mode, threads: usize) -> Result<Vec<(String, Vec<u8>)>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig { out: Some(dir.path().to_path_buf()), ..small_config(mode) };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    pool.install(|| run_experiment(&cfg, mode)).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for entry in fs::read_dir(dir.path()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.push((name, fs::read(&path).map_err(|e| e.to_string())?));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let modes = [Mode::Verify, Mode::Nm, Mode::WidthCarleson, Mode::Bwgl, Mode::Favard, Mode::Extract, Mode::Flatness];
    let mut differing = Vec::new();
    let mut files = 0;
    for m in modes {
        let one = outputs(m, 1)?;
        let four = outputs(m, 4)?;
        files += one.len();
        // The JSON echoes the output directory, which differs between runs.
        let strip = |v: &[(String, Vec<u8>)]| -> Vec<(String, Vec<u8>)> {
            v.iter()
                .map(|(n, b)| {
                    if n.ends_with(".json") {
                        let mut j: serde_json::Value = serde_json::from_slice(b).unwrap();
                        j["config"]["out"] = serde_json::Value::Null;
                        (n.clone(), j.to_string().into_bytes())
                    } else {
                        (n.clone(), b.clone())
                    }
                })
                .collect()
        };
        if one.is_empty() || strip(&one) != strip(&four) {
            differing.push(m.name());
        }
    }
    Ok((differing.is_empty(), format!("{files} files across 7 experiments compared at 1 and 4 workers; differing: {differing:?}")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 16] = [
        ("algebra and metric", algebra),
        ("projections", projections),
        ("non-convexity oracle", nc_oracle),
        ("non-monotonicity below width", nm_below_width),
        ("monotone fit residual", monotone_fit),
        ("half-space and hyperplane degeneracy", degeneracies),
        ("line measure invariance and homogeneity", line_measure),
        ("projection measure oracle", projection_oracle),
        ("Favard positivity", favard),
        ("beta degeneracies", beta_degeneracies),
        ("width Carleson scaling", width_scaling),
        ("BWGL packing", bwgl),
        ("David cube invariants", cubes),
        ("alpha and angle formula", angles),
        ("cone extraction", extraction),
        ("determinism across worker counts", determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let (passed, detail) = match outcome {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!("{} {:>2} {name}: {detail} [{:.1} s]", if passed { "PASS" } else { "FAIL" }, i + 1, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
