use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::spline::BicubicInterpolant;

pub const DEFAULT_REFINE: usize = 8;
pub const DEFAULT_FRONTIER_TOL: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierOptions {
    pub refine: usize,
    /// Largest accepted |p − α| on the interpolant after polishing.
    pub tol: f64,
}

impl Default for FrontierOptions {
    fn default() -> Self {
        Self {
            refine: DEFAULT_REFINE,
            tol: DEFAULT_FRONTIER_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierVertex {
    pub xi: f64,
    pub y: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierLevel {
    pub alpha: f64,
    /// Each polyline is ordered by increasing ξ at its endpoints.
    pub polylines: Vec<Vec<FrontierVertex>>,
    pub empty: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSet {
    pub levels: Vec<FrontierLevel>,
}

impl FrontierSet {
    pub fn vertices(&self) -> impl Iterator<Item = (f64, &FrontierVertex)> {
        self.levels
            .iter()
            .flat_map(|l| l.polylines.iter().flatten().map(move |v| (l.alpha, v)))
    }

    pub fn max_residual(&self) -> f64 {
        self.vertices().map(|(_, v)| v.residual).fold(0.0, f64::max)
    }
}

/// Linear y on the chord between two vertices bracketing ξ, if any.
pub fn polyline_y_at(line: &[FrontierVertex], xi: f64) -> Option<f64> {
    line.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        let (lo, hi) = if a.xi <= b.xi { (a, b) } else { (b, a) };
        if xi < lo.xi || xi > hi.xi {
            return None;
        }
        if hi.xi == lo.xi {
            return Some(0.5 * (lo.y + hi.y));
        }
        Some(lo.y + (hi.y - lo.y) * (xi - lo.xi) / (hi.xi - lo.xi))
    })
}

struct Lattice {
    y: Vec<f64>,
    xi: Vec<f64>,
    v: Vec<f64>,
}

impl Lattice {
    fn new(interp: &BicubicInterpolant, refine: usize) -> Self {
        let sub = |nodes: &[f64]| {
            let mut out = Vec::with_capacity((nodes.len() - 1) * refine + 1);
            for w in nodes.windows(2) {
                for k in 0..refine {
                    out.push(w[0] + (w[1] - w[0]) * k as f64 / refine as f64);
                }
            }
            out.push(nodes[nodes.len() - 1]);
            out
        };
        let y = sub(&interp.y);
        let xi = sub(&interp.xi);
        let v = y.iter().flat_map(|&a| xi.iter().map(move |&b| interp.eval(a, b))).collect();
        Self { y, xi, v }
    }

    fn at(&self, a: usize, b: usize) -> f64 {
        self.v[a * self.xi.len() + b]
    }
}

/// Lattice edge: along y from (a, b) to (a+1, b), or along ξ from (a, b)
/// to (a, b+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    Y(usize, usize),
    X(usize, usize),
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * mid.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn crossing(interp: &BicubicInterpolant, lat: &Lattice, e: Edge, alpha: f64) -> FrontierVertex {
    let (y, xi) = match e {
        Edge::Y(a, b) => {
            let xi = lat.xi[b];
            let f = |y: f64| interp.eval(y, xi) - alpha;
            (bisect(f, lat.y[a], lat.y[a + 1], lat.at(a, b) - alpha), xi)
        }
        Edge::X(a, b) => {
            let y = lat.y[a];
            let f = |x: f64| interp.eval(y, x) - alpha;
            (y, bisect(f, lat.xi[b], lat.xi[b + 1], lat.at(a, b) - alpha))
        }
    };
    FrontierVertex {
        xi,
        y,
        residual: (interp.eval(y, xi) - alpha).abs(),
    }
}

fn cell_segments(lat: &Lattice, a: usize, b: usize, alpha: f64) -> Vec<(Edge, Edge)> {
    let c = [lat.at(a, b), lat.at(a + 1, b), lat.at(a + 1, b + 1), lat.at(a, b + 1)];
    let above = c.map(|v| v >= alpha);
    let code = above.iter().enumerate().fold(0, |m, (k, &u)| m | ((u as u8) << k));
    // corner order: 0 (a,b), 1 (a+1,b), 2 (a+1,b+1), 3 (a,b+1)
    let e01 = Edge::Y(a, b);
    let e12 = Edge::X(a + 1, b);
    let e32 = Edge::Y(a, b + 1);
    let e03 = Edge::X(a, b);
    match code {
        0 | 15 => vec![],
        1 | 14 => vec![(e03, e01)],
        2 | 13 => vec![(e01, e12)],
        3 | 12 => vec![(e03, e12)],
        4 | 11 => vec![(e12, e32)],
        6 | 9 => vec![(e01, e32)],
        7 | 8 => vec![(e03, e32)],
        5 | 10 => {
            let centre_above = c.iter().sum::<f64>() / 4.0 >= alpha;
            if centre_above == above[0] {
                vec![(e03, e32), (e01, e12)]
            } else {
                vec![(e03, e01), (e12, e32)]
            }
        }
        _ => unreachable!(),
    }
}

fn chain(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut adj: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (p, q)) in segments.iter().enumerate() {
        adj.entry(*p).or_default().push(k);
        adj.entry(*q).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let walk = |start: Edge, used: &mut Vec<bool>| {
        let mut line = vec![start];
        let mut cur = start;
        while let Some(&k) = adj[&cur].iter().find(|&&k| !used[k]) {
            used[k] = true;
            let (p, q) = segments[k];
            cur = if p == cur { q } else { p };
            line.push(cur);
        }
        line
    };
    // open lines start at boundary edges (degree one); sort for determinism
    let mut ends: Vec<Edge> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(e, _)| *e).collect();
    ends.sort_by_key(|e| match *e {
        Edge::Y(a, b) => (b, a, 0),
        Edge::X(a, b) => (b, a, 1),
    });
    for e in ends {
        if adj[&e].iter().any(|&k| !used[k]) {
            lines.push(walk(e, &mut used));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            lines.push(walk(segments[k].0, &mut used));
        }
    }
    lines
}

/// Constant-α contours of the interpolant: marching squares on a lattice
/// `refine` times denser than the spline knots, with every vertex polished
/// by bisection along its lattice edge.
pub fn extract_frontiers(interp: &BicubicInterpolant, levels: &[f64], opts: FrontierOptions) -> FrontierSet {
    let lat = Lattice::new(interp, opts.refine.max(1));
    let (lo, hi) = lat.v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let (ny, nx) = (lat.y.len(), lat.xi.len());
    let levels = levels
        .iter()
        .map(|&alpha| {
            if !(alpha > lo && alpha < hi) {
                return FrontierLevel {
                    alpha,
                    polylines: vec![],
                    empty: true,
                    note: Some(format!("level outside surface range [{lo:.6}, {hi:.6}]")),
                };
            }
            let mut segs = Vec::new();
            for b in 0..nx - 1 {
                for a in 0..ny - 1 {
                    segs.extend(cell_segments(&lat, a, b, alpha));
                }
            }
            let mut polylines: Vec<Vec<FrontierVertex>> = chain(&segs)
                .into_iter()
                .map(|edges| {
                    let mut line: Vec<FrontierVertex> = edges.into_iter().map(|e| crossing(interp, &lat, e, alpha)).collect();
                    if line[0].xi > line[line.len() - 1].xi {
                        line.reverse();
                    }
                    line
                })
                .collect();
            polylines.sort_by(|p, q| p.len().cmp(&q.len()).reverse().then(p[0].xi.total_cmp(&q[0].xi)));
            let worst = polylines.iter().flatten().map(|v| v.residual).fold(0.0, f64::max);
            let note = (worst > opts.tol).then(|| format!("polish residual {worst:.2e} above tolerance"));
            FrontierLevel {
                alpha,
                empty: polylines.is_empty(),
                polylines,
                note,
            }
        })
        .collect();
    FrontierSet { levels }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// Largest rise of p along increasing y at fixed ξ on the lattice.
    pub max_rise_y: f64,
    /// Largest rise of p along increasing ξ at fixed y on the lattice.
    pub max_rise_xi: f64,
    pub flagged: bool,
}

/// Checks that the interpolant does not increase along y (and along ξ)
/// beyond `tol` at lattice resolution.
pub fn monotonicity(interp: &BicubicInterpolant, refine: usize, tol: f64) -> MonotonicityReport {
    let lat = Lattice::new(interp, refine.max(1));
    let (ny, nx) = (lat.y.len(), lat.xi.len());
    let mut ry: f64 = 0.0;
    let mut rx: f64 = 0.0;
    for a in 0..ny {
        for b in 0..nx {
            if a + 1 < ny {
                ry = ry.max(lat.at(a + 1, b) - lat.at(a, b));
            }
            if b + 1 < nx {
                rx = rx.max(lat.at(a, b + 1) - lat.at(a, b));
            }
        }
    }
    MonotonicityReport {
        max_rise_y: ry,
        max_rise_xi: rx,
        flagged: ry > tol || rx > tol,
    }
}
