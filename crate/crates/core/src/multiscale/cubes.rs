//! Nested dyadic-like cube systems over point clouds.
//!
//! Centers come from nested greedy nets `N_top ⊂ … ⊂ N_bottom`, where `N_j`
//! is `2^j`-separated. Cubes are built top-down: inside a level-(j+1) cube
//! with center `x`, the level-j centers are `x` itself plus a greedy
//! `2^j`-net of the *deep* members, those whose inner ball `B(z, c·2^j)`
//! lies entirely in the parent cube. Members go to the child whose inner ball
//! contains them, and otherwise to the nearest child center. Inner-ball
//! containment and nesting hold by construction; the diameter bound is
//! checked after the fact.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{Ball, Point};
use crate::par;
use crate::regions::Cloud;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeOptions {
    /// Inner-ball constant `c`.
    pub c_inner: f64,
    /// Diameter constant `C₀` in `2 diam Q < C₀ ℓ(Q)`.
    pub c0: f64,
    pub top_level: i32,
    pub bottom_level: i32,
}

impl Default for CubeOptions {
    fn default() -> Self {
        CubeOptions { c_inner: 0.125, c0: 8.0, top_level: 0, bottom_level: -3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DavidCube {
    pub id: usize,
    pub level: i32,
    /// Index of the center in the cloud.
    pub center: usize,
    /// Sorted cloud indices.
    pub members: Vec<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl DavidCube {
    pub fn side(&self) -> f64 {
        2f64.powi(self.level)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeForest {
    pub cubes: Vec<DavidCube>,
    pub options: CubeOptions,
    /// Cube ids per level, from the top level down.
    pub by_level: Vec<Vec<usize>>,
}

impl CubeForest {
    pub fn roots(&self) -> &[usize] {
        &self.by_level[0]
    }

    pub fn level_ids(&self, level: i32) -> &[usize] {
        let i = (self.options.top_level - level) as usize;
        &self.by_level[i]
    }

    /// `Q` and all its descendants, parents before children.
    pub fn subtree(&self, root: usize) -> Vec<usize> {
        let mut out = vec![root];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.cubes[out[i]].children.iter().copied());
            i += 1;
        }
        out
    }

    pub fn inner_ball(&self, q: &DavidCube, points: &[Point]) -> Ball {
        Ball { center: points[q.center].clone(), radius: self.options.c_inner * q.side() }
    }
}

/// Builds the cube forest for levels `top_level` down to `bottom_level`.
pub fn build_cubes(cloud: &Cloud, opts: &CubeOptions) -> Result<CubeForest> {
    if cloud.is_empty() {
        return Err(Error::Empty("cannot build cubes over an empty cloud".into()));
    }
    if opts.bottom_level > opts.top_level {
        return Err(invalid("bottom level above top level"));
    }
    if !(opts.c_inner > 0.0 && opts.c_inner < 0.5) || !(opts.c0 > 0.0) {
        return Err(invalid("inner-ball constant must lie in (0, 1/2) and C₀ must be positive"));
    }
    let n = cloud.len();
    if n > 1 {
        // The cloud's stated resolution is half its tube radius, which by
        // default is the median nearest-neighbour spacing.
        let spacing = 0.5 * cloud.tube_radius;
        if 2f64.powi(opts.bottom_level) < 0.5 * spacing {
            return Err(invalid(format!(
                "level {} (side {}) is below the cloud resolution {spacing:.4}",
                opts.bottom_level,
                2f64.powi(opts.bottom_level)
            )));
        }
    }
    let pts = &cloud.points;

    // Top level: greedy net in index order, nearest-center assignment with
    // inner balls claimed first.
    let side = 2f64.powi(opts.top_level);
    let all: Vec<usize> = (0..n).collect();
    let top_centers = greedy_net(pts, &all, &[], side, |_| true);
    let top_groups = assign(pts, &all, &top_centers, opts.c_inner * side);

    let mut cubes: Vec<DavidCube> = Vec::new();
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new()];
    for (c, members) in top_centers.iter().zip(top_groups) {
        let id = cubes.len();
        cubes.push(DavidCube { id, level: opts.top_level, center: *c, members, parent: None, children: vec![] });
        by_level[0].push(id);
    }

    // label[i] = id of the cube containing point i at the current level.
    let mut label = vec![usize::MAX; n];
    for &id in &by_level[0] {
        for &m in &cubes[id].members {
            label[m] = id;
        }
    }

    for level in (opts.bottom_level..opts.top_level).rev() {
        let side = 2f64.powi(level);
        let r_in = opts.c_inner * side;
        let parents = by_level.last().expect("previous level").clone();
        let splits = par::map_slice(&parents, |&pid| {
            let parent = &cubes[pid];
            let deep = |z: usize| {
                let ball = Ball { center: pts[z].clone(), radius: r_in };
                cloud.indices_in(&ball).iter().all(|&y| label[y] == pid)
            };
            let centers = greedy_net(pts, &parent.members, &[parent.center], side, deep);
            let groups = assign(pts, &parent.members, &centers, r_in);
            (pid, centers, groups)
        });
        let mut ids = Vec::new();
        for (pid, centers, groups) in splits {
            for (c, members) in centers.into_iter().zip(groups) {
                let id = cubes.len();
                for &m in &members {
                    label[m] = id;
                }
                cubes.push(DavidCube { id, level, center: c, members, parent: Some(pid), children: vec![] });
                cubes[pid].children.push(id);
                ids.push(id);
            }
        }
        by_level.push(ids);
    }
    Ok(CubeForest { cubes, options: *opts, by_level })
}

/// Greedy `sep`-separated subset of `candidates` (index order) that starts
/// from `seed` and only admits candidates passing `admit`.
fn greedy_net(pts: &[Point], candidates: &[usize], seed: &[usize], sep: f64, admit: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut net: Vec<usize> = seed.to_vec();
    for &i in candidates {
        if net.contains(&i) {
            continue;
        }
        if net.iter().all(|&c| pts[c].dist(&pts[i]) >= sep) && admit(i) {
            net.push(i);
        }
    }
    net
}

/// Splits `members` among `centers`: a member inside some `B(center, r_in)`
/// goes to that center (those balls are disjoint), otherwise to the nearest
/// center, ties broken by lower center index.
fn assign(pts: &[Point], members: &[usize], centers: &[usize], r_in: f64) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); centers.len()];
    for &m in members {
        let mut best = (f64::INFINITY, usize::MAX, 0usize);
        let mut claimed = None;
        for (ci, &c) in centers.iter().enumerate() {
            let d = pts[c].dist(&pts[m]);
            if d <= r_in {
                claimed = Some(ci);
                break;
            }
            if d < best.0 || (d == best.0 && c < best.1) {
                best = (d, c, ci);
            }
        }
        groups[claimed.unwrap_or(best.2)].push(m);
    }
    groups
}

/// Outcome of the structural checks on a forest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CubeInvariants {
    pub partition: bool,
    pub nesting: bool,
    pub diameter: bool,
    pub inner_ball: bool,
    pub max_diameter_ratio: f64,
    pub failures: Vec<String>,
}

impl CubeInvariants {
    pub fn all_hold(&self) -> bool {
        self.partition && self.nesting && self.diameter && self.inner_ball
    }
}

fn diameter(pts: &[Point], members: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            d = d.max(pts[i].dist(&pts[j]));
        }
    }
    d
}

/// Checks every structural property of the forest exactly.
pub fn check_cubes(forest: &CubeForest, cloud: &Cloud) -> CubeInvariants {
    let pts = &cloud.points;
    let n = pts.len();
    let mut inv = CubeInvariants { partition: true, nesting: true, diameter: true, inner_ball: true, ..Default::default() };
    for (li, ids) in forest.by_level.iter().enumerate() {
        let level = forest.options.top_level - li as i32;
        let mut seen = vec![0u32; n];
        for &id in ids {
            let q = &forest.cubes[id];
            if q.level != level {
                inv.partition = false;
                inv.failures.push(format!("cube {id} filed under level {level} but has level {}", q.level));
            }
            for &m in &q.members {
                seen[m] += 1;
            }
        }
        if seen.iter().any(|&s| s != 1) {
            inv.partition = false;
            inv.failures.push(format!("level {level} is not a partition of the cloud"));
        }
    }
    let per_cube = par::map_slice(&forest.cubes, |q| {
        let mut fails = Vec::new();
        let mut nest = true;
        if let Some(p) = q.parent {
            let parent = &forest.cubes[p];
            if q.members.iter().any(|m| parent.members.binary_search(m).is_err()) {
                nest = false;
                fails.push(format!("cube {} is not inside its parent {p}", q.id));
            }
        }
        let diam = diameter(pts, &q.members);
        let ratio = 2.0 * diam / (forest.options.c0 * q.side());
        if ratio >= 1.0 {
            fails.push(format!("cube {} violates the diameter bound (2 diam / C₀ℓ = {ratio:.3})", q.id));
        }
        let ball = forest.inner_ball(q, pts);
        let inner_ok = cloud.indices_in(&ball).iter().all(|m| q.members.binary_search(m).is_ok());
        if !inner_ok {
            fails.push(format!("inner ball of cube {} leaks outside it", q.id));
        }
        (nest, ratio, inner_ok, fails)
    });
    for (nest, ratio, inner_ok, fails) in per_cube {
        inv.nesting &= nest;
        inv.diameter &= ratio < 1.0;
        inv.inner_ball &= inner_ok;
        inv.max_diameter_ratio = inv.max_diameter_ratio.max(ratio);
        inv.failures.extend(fails);
    }
    inv
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRow {
    pub id: usize,
    pub level: i32,
    pub center: Vec<f64>,
    pub parent: Option<usize>,
    pub members: usize,
    pub beta: std::collections::BTreeMap<String, f64>,
}

/// Tabular view of a forest for export.
pub fn forest_table(forest: &CubeForest, cloud: &Cloud) -> Vec<CubeRow> {
    forest
        .cubes
        .iter()
        .map(|q| {
            let c = &cloud.points[q.center];
            let mut center: Vec<f64> = c.v.to_vec();
            center.push(c.t);
            CubeRow { id: q.id, level: q.level, center, parent: q.parent, members: q.members.len(), beta: Default::default() }
        })
        .collect()
}
