//! Weighted point clouds standing in for surface measure.

use std::borrow::Cow;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{Ball, Point};
use crate::par;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cloud {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Radius of the tube used to intersect the cloud with lines.
    pub tube_radius: f64,
    /// Point indices sorted by the first horizontal coordinate.
    #[serde(skip)]
    order: Vec<usize>,
}

impl Cloud {
    /// Builds a cloud; a tube radius of `None` selects twice the median
    /// nearest-neighbour spacing.
    pub fn new(points: Vec<Point>, weights: Vec<f64>, tube_radius: Option<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(invalid(format!("{} points but {} weights", points.len(), weights.len())));
        }
        if let Some(p) = points.first() {
            let k = p.k();
            if let Some(bad) = points.iter().find(|q| q.k() != k) {
                return Err(Error::DimensionMismatch { expected: k, found: bad.k() });
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid("cloud weights must be finite and nonnegative"));
        }
        let mut cloud = Cloud { points, weights, tube_radius: 0.0, order: Vec::new() };
        cloud.reindex();
        cloud.tube_radius = match tube_radius {
            Some(r) if r > 0.0 => r,
            Some(r) => return Err(invalid(format!("tube radius must be positive, got {r}"))),
            None => 2.0 * cloud.median_spacing(),
        };
        Ok(cloud)
    }

    fn reindex(&mut self) {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| self.points[a].v[0].total_cmp(&self.points[b].v[0]).then(a.cmp(&b)));
        self.order = order;
    }

    fn order(&self) -> Cow<'_, [usize]> {
        if self.order.len() == self.points.len() {
            return Cow::Borrowed(&self.order);
        }
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| self.points[a].v[0].total_cmp(&self.points[b].v[0]).then(a.cmp(&b)));
        Cow::Owned(order)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn k(&self) -> usize {
        self.points.first().map_or(1, |p| p.k())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().fold(0.0, |a, b| a + b)
    }

    pub fn map_points(&self, f: impl Fn(&Point) -> Point, weight_factor: f64) -> Cloud {
        let mut c = Cloud {
            points: self.points.iter().map(f).collect(),
            weights: self.weights.iter().map(|w| w * weight_factor).collect(),
            tube_radius: self.tube_radius,
            order: Vec::new(),
        };
        c.reindex();
        c
    }

    /// Indices of the points inside a closed ball.
    pub fn indices_in(&self, ball: &Ball) -> Vec<usize> {
        let lo = ball.center.v[0] - ball.radius;
        let hi = ball.center.v[0] + ball.radius;
        let order = self.order();
        let start = order.partition_point(|&i| self.points[i].v[0] < lo);
        let mut out: Vec<usize> = order[start..]
            .iter()
            .take_while(|&&i| self.points[i].v[0] <= hi)
            .copied()
            .filter(|&i| ball.contains(&self.points[i]))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn subset(&self, idx: &[usize]) -> Cloud {
        let mut c = Cloud {
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
            tube_radius: self.tube_radius,
            order: Vec::new(),
        };
        c.reindex();
        c
    }

    pub fn weight_in(&self, ball: &Ball) -> f64 {
        self.indices_in(ball).iter().map(|&i| self.weights[i]).fold(0.0, |a, b| a + b)
    }

    /// Korányi distance from `q` to the nearest cloud point and its index.
    ///
    /// Scans outward from `q` in the first horizontal coordinate, which is
    /// 1-Lipschitz for the Korányi metric, and stops once that coordinate
    /// alone exceeds the best distance found.
    pub fn nearest(&self, q: &Point) -> Option<(f64, usize)> {
        if self.points.is_empty() {
            return None;
        }
        let order = self.order();
        let x = q.v[0];
        let mid = order.partition_point(|&i| self.points[i].v[0] < x);
        let mut best = (f64::INFINITY, usize::MAX);
        let consider = |i: usize, best: &mut (f64, usize)| {
            let d = self.points[i].dist(q);
            if d < best.0 || (d == best.0 && i < best.1) {
                *best = (d, i);
            }
        };
        let (mut lo, mut hi) = (mid, mid);
        loop {
            let left = if lo > 0 { Some((x - self.points[order[lo - 1]].v[0]).abs()) } else { None };
            let right = if hi < order.len() { Some((self.points[order[hi]].v[0] - x).abs()) } else { None };
            match (left, right) {
                (None, None) => break,
                (Some(l), r) if r.is_none_or(|r| l <= r) => {
                    if l > best.0 {
                        break;
                    }
                    lo -= 1;
                    consider(order[lo], &mut best);
                }
                (_, Some(r)) => {
                    if r > best.0 {
                        break;
                    }
                    consider(order[hi], &mut best);
                    hi += 1;
                }
                _ => unreachable!(),
            }
        }
        Some(best)
    }

    /// Median over points of the distance to the nearest other point.
    pub fn median_spacing(&self) -> f64 {
        if self.points.len() < 2 {
            return 1.0;
        }
        let order = self.order();
        let mut pos = vec![0usize; order.len()];
        for (r, &i) in order.iter().enumerate() {
            pos[i] = r;
        }
        let mut nn = par::map_range(self.points.len(), |i| {
            let p = &self.points[i];
            let mut best = f64::INFINITY;
            let r = pos[i];
            for &j in order[r + 1..].iter() {
                if self.points[j].v[0] - p.v[0] > best {
                    break;
                }
                best = best.min(p.dist(&self.points[j]));
            }
            for &j in order[..r].iter().rev() {
                if p.v[0] - self.points[j].v[0] > best {
                    break;
                }
                best = best.min(p.dist(&self.points[j]));
            }
            best
        });
        nn.sort_by(f64::total_cmp);
        let m = nn[nn.len() / 2];
        if m > 0.0 { m } else { nn.iter().copied().find(|x| *x > 0.0).unwrap_or(1.0) }
    }

    pub fn to_csv(&self) -> String {
        let k = self.k();
        let mut out = String::new();
        for i in 1..=2 * k {
            let _ = write!(out, "v{i},");
        }
        out.push_str("t,weight\n");
        for (p, w) in self.points.iter().zip(&self.weights) {
            for x in p.v.iter() {
                let _ = write!(out, "{x:?},");
            }
            let _ = writeln!(out, "{:?},{:?}", p.t, w);
        }
        out
    }

    pub fn from_csv(text: &str, k: usize) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Empty("cloud file has no header".into()))?;
        let mut want: Vec<String> = (1..=2 * k).map(|i| format!("v{i}")).collect();
        want.push("t".into());
        want.push("weight".into());
        let got: Vec<&str> = header.split(',').map(str::trim).collect();
        if got != want {
            return Err(Error::Parse(format!("expected header `{}`, found `{header}`", want.join(","))));
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (n, line) in lines.enumerate() {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|x| x.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::Parse(format!("row {}: {e}", n + 1)))?;
            if vals.len() != 2 * k + 2 {
                return Err(Error::Parse(format!("row {} has {} fields", n + 1, vals.len())));
            }
            points.push(Point::try_new(&vals[..2 * k], vals[2 * k])?);
            weights.push(vals[2 * k + 1]);
        }
        Cloud::new(points, weights, None)
    }

    pub fn read_csv(path: &Path, k: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv(&text, k)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AhlforsRow {
    pub center: usize,
    pub radius: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AhlforsStats {
    pub rows: Vec<AhlforsRow>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// `weight(B(c, r)) / r^{2k+1}` for every listed center index and radius.
pub fn ahlfors_stats(cloud: &Cloud, centers: &[usize], radii: &[f64]) -> Result<AhlforsStats> {
    if cloud.is_empty() {
        return Err(Error::Empty("cloud has no points".into()));
    }
    let exp = 2 * cloud.k() as i32 + 1;
    let pairs: Vec<(usize, f64)> = centers.iter().flat_map(|&c| radii.iter().map(move |&r| (c, r))).collect();
    let rows = par::map_slice(&pairs, |&(c, r)| {
        let ball = Ball { center: cloud.points[c].clone(), radius: r };
        AhlforsRow { center: c, radius: r, ratio: cloud.weight_in(&ball) / r.powi(exp) }
    });
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(AhlforsStats { rows, min_ratio, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_cloud() -> Cloud {
        let mut pts = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                pts.push(Point::new(&[0.0, i as f64 * 0.1 - 1.0], j as f64 * 0.01 - 0.1));
            }
        }
        let n = pts.len();
        Cloud::new(pts, vec![1.0; n], None).unwrap()
    }

    #[test]
    fn nearest_matches_brute_force() {
        let c = grid_cloud();
        for i in 0..30 {
            let q = Point::new(&[(i as f64).sin(), (i as f64 * 0.3).cos()], 0.1 * (i as f64).cos());
            let (d, j) = c.nearest(&q).unwrap();
            let brute = c.points.iter().map(|p| p.dist(&q)).fold(f64::INFINITY, f64::min);
            assert_eq!(d, brute);
            assert_eq!(c.points[j].dist(&q), d);
        }
    }

    #[test]
    fn csv_round_trip() {
        let c = grid_cloud();
        let back = Cloud::from_csv(&c.to_csv(), 1).unwrap();
        assert_eq!(back.points, c.points);
        assert_eq!(back.weights, c.weights);
        assert!(Cloud::from_csv("x,y\n", 1).is_err());
        assert!(c.to_csv().starts_with("v1,v2,t,weight\n"));
    }

    #[test]
    fn single_point_ratio_decays() {
        let c = Cloud::new(vec![Point::origin(1)], vec![1.0], Some(0.1)).unwrap();
        let s = ahlfors_stats(&c, &[0], &[1.0, 2.0, 4.0]).unwrap();
        assert!(s.rows.windows(2).all(|w| w[1].ratio < w[0].ratio));
        let empty = Cloud::new(vec![], vec![], Some(1.0)).unwrap();
        assert!(ahlfors_stats(&empty, &[], &[1.0]).is_err());
    }

    #[test]
    fn indices_in_ball() {
        let c = grid_cloud();
        let b = Ball::new(Point::origin(1), 0.35).unwrap();
        let brute: Vec<usize> = (0..c.len()).filter(|&i| b.contains(&c.points[i])).collect();
        assert_eq!(c.indices_in(&b), brute);
    }
}
