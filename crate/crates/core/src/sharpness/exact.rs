//! Norms of `T` and `T*` applied to indicators of small convex sets, computed
//! without a grid.
//!
//! For an indicator `f = 1_E`,
//! `||Tf||_q^q = int du int dt int_E Tf(y + u c(t), u)^(q-1) dy`,
//! and `Tf(x, u)` is the length of `{t : x - u c(t) in E}`, which is found by
//! scanning a window in `t` and bisecting each boundary crossing.

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use std::num::NonZeroUsize;

use crate::curves::Curve;
use crate::sampling::compensated_sum;
use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub(crate) fn gauss(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).expect("nonzero");
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    GaussLegendre::new(n).as_node_weight_pairs().iter().map(|&(x, w)| (mid + half * x, half * w)).collect()
}

/// Convex set centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Shape {
    Rect { a: f64, b: f64 },
    Disk { r: f64 },
    /// `|x.e1| <= a`, `|x.e2| <= b`.
    Tilted { e1: [f64; 2], e2: [f64; 2], a: f64, b: f64 },
}

impl Shape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect { a, b } => x.abs() <= a && y.abs() <= b,
            Shape::Disk { r } => x * x + y * y <= r * r,
            Shape::Tilted { e1, e2, a, b } => {
                (x * e1[0] + y * e1[1]).abs() <= a && (x * e2[0] + y * e2[1]).abs() <= b
            }
        }
    }

    /// Half width of the projection onto the `x1` axis.
    pub fn half_x1(&self) -> f64 {
        match *self {
            Shape::Rect { a, .. } => a,
            Shape::Disk { r } => r,
            Shape::Tilted { e1, e2, a, b } => a * e1[0].abs() + b * e2[0].abs(),
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            Shape::Rect { a, b } | Shape::Tilted { a, b, .. } => 4.0 * a * b,
            Shape::Disk { r } => std::f64::consts::PI * r * r,
        }
    }

    /// Product quadrature in the set's own coordinates: `(y1, y2, weight)`.
    pub fn nodes(&self, n: usize) -> Vec<(f64, f64, f64)> {
        match *self {
            Shape::Rect { a, b } => product(n, a, b, [1.0, 0.0], [0.0, 1.0]),
            Shape::Tilted { e1, e2, a, b } => product(n, a, b, e1, e2),
            Shape::Disk { r } => {
                let radial = gauss(n.div_ceil(2), 0.0, r);
                let m = 2 * n;
                let dth = std::f64::consts::TAU / m as f64;
                let mut out = Vec::with_capacity(n * m);
                for &(rho, w) in &radial {
                    for k in 0..m {
                        let th = (k as f64 + 0.5) * dth;
                        out.push((rho * th.cos(), rho * th.sin(), w * rho * dth));
                    }
                }
                out
            }
        }
    }
}

fn product(n: usize, a: f64, b: f64, e1: [f64; 2], e2: [f64; 2]) -> Vec<(f64, f64, f64)> {
    let (ga, gb) = (gauss(n, -a, a), gauss(n, -b, b));
    let mut out = Vec::with_capacity(n * n);
    for &(s, ws) in &ga {
        for &(r, wr) in &gb {
            out.push((s * e1[0] + r * e2[0], s * e1[1] + r * e2[1], ws * wr));
        }
    }
    out
}

/// Cubic Hermite table of `gamma` on `[0, end]`: geometric nodes below
/// `split`, uniform above.
#[derive(Debug, Clone)]
pub(crate) struct Track {
    pub end: f64,
    ts: Vec<f64>,
    g: Vec<f64>,
    d: Vec<f64>,
    split: f64,
    n_geo: usize,
    h: f64,
}

const TRACK_FLOOR: f64 = 1.0 / (1u64 << 40) as f64;
const TRACK_PER_OCTAVE: f64 = 32.0;
const TRACK_UNIFORM: usize = 8192;

impl Track {
    pub fn new(curve: &Curve) -> Result<Self> {
        let end = curve.end.min(1.0);
        let split = (end / 4.0).min(1.0 / 16.0);
        let n_geo = ((split / TRACK_FLOOR).log2() * TRACK_PER_OCTAVE).ceil() as usize;
        let mut ts: Vec<f64> = (0..n_geo).map(|k| TRACK_FLOOR * (k as f64 / TRACK_PER_OCTAVE).exp2()).collect();
        let h = (end - split) / TRACK_UNIFORM as f64;
        ts.extend((0..=TRACK_UNIFORM).map(|i| if i == TRACK_UNIFORM { end } else { split + i as f64 * h }));
        let mut g = Vec::with_capacity(ts.len());
        let mut d = Vec::with_capacity(ts.len());
        for &t in &ts {
            g.push(curve.eval(t, 0)?);
            d.push(curve.eval(t, 1)?);
        }
        Ok(Track { end, ts, g, d, split, n_geo, h })
    }

    pub fn gamma(&self, t: f64) -> f64 {
        if t <= TRACK_FLOOR {
            return self.g[0] * t.max(0.0) / TRACK_FLOOR;
        }
        let last = self.ts.len() - 2;
        let guess = if t < self.split {
            ((t / TRACK_FLOOR).log2() * TRACK_PER_OCTAVE) as usize
        } else {
            self.n_geo + ((t - self.split) / self.h) as usize
        };
        let mut i = guess.min(last);
        while i > 0 && t < self.ts[i] {
            i -= 1;
        }
        while i < last && t > self.ts[i + 1] {
            i += 1;
        }
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let dt = t1 - t0;
        let s = ((t - t0) / dt).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.g[i]
            + (s3 - 2.0 * s2 + s) * dt * self.d[i]
            + (-2.0 * s3 + 3.0 * s2) * self.g[i + 1]
            + (s3 - s2) * dt * self.d[i + 1]
    }
}

/// Sampling density of the exact evaluator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExactResolution {
    /// Gauss nodes per axis on the set.
    pub set_nodes: usize,
    /// Gauss nodes on each `u` interval.
    pub u_nodes: usize,
    /// Gauss nodes per graded `t` panel.
    pub panel_nodes: usize,
    /// Uniform scan points in each `t` window before bisection.
    pub scan: usize,
}

impl Default for ExactResolution {
    fn default() -> Self {
        ExactResolution { set_nodes: 16, u_nodes: 8, panel_nodes: 6, scan: 48 }
    }
}

impl ExactResolution {
    pub fn validate(&self) -> Result<()> {
        if self.set_nodes < 4 || self.u_nodes < 2 || self.panel_nodes < 2 || self.scan < 8 {
            return Err(Error::Precondition(format!("exact resolution too coarse: {self:?}")));
        }
        Ok(())
    }
}

/// Length of `{t in [0, end] : x + sign u c(t) in shape}`.
pub(crate) fn hit_length(shape: &Shape, track: &Track, x: [f64; 2], u: f64, sign: f64, scan: usize) -> f64 {
    let a = shape.half_x1();
    let su = sign * u;
    let (w0, w1) = {
        let (p, q) = ((-a - x[0]) / su, (a - x[0]) / su);
        (p.min(q).max(0.0), p.max(q).min(track.end))
    };
    if w1 <= w0 {
        return 0.0;
    }
    let inside = |t: f64| shape.contains(x[0] + su * t, x[1] + su * track.gamma(t));
    let crossing = |mut lo: f64, mut hi: f64, lo_in: bool| {
        for _ in 0..48 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) == lo_in {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let step = (w1 - w0) / scan as f64;
    let mut prev_t = w0;
    let mut prev_in = inside(w0);
    let mut start = if prev_in { Some(w0) } else { None };
    let mut total = 0.0;
    for k in 1..=scan {
        let t = if k == scan { w1 } else { w0 + k as f64 * step };
        let now = inside(t);
        if now != prev_in {
            let c = crossing(prev_t, t, prev_in);
            match start.take() {
                Some(s) => total += c - s,
                None => start = Some(c),
            }
        }
        prev_t = t;
        prev_in = now;
    }
    if let Some(s) = start {
        total += w1 - s;
    }
    total
}

/// Graded panels on `[0, end]`, refined geometrically towards both ends
/// starting from width `s`.
pub(crate) fn t_nodes(end: f64, s: f64, per_panel: usize) -> Vec<(f64, f64)> {
    let half = 0.5 * end;
    let mut cuts = vec![0.0];
    let mut w = s.min(half);
    while w < half {
        cuts.push(w);
        w *= 2.0;
    }
    cuts.push(half);
    let mirrored: Vec<f64> = cuts.iter().rev().skip(1).map(|c| end - c).collect();
    cuts.extend(mirrored);
    cuts.windows(2).flat_map(|p| gauss(per_panel, p[0], p[1])).collect()
}

fn reduce(parts: Vec<f64>, q: f64) -> f64 {
    if q.is_infinite() {
        parts.into_iter().fold(0.0, f64::max)
    } else {
        compensated_sum(parts)
    }
}

/// `||T 1_E||_{L^q(R^2 x [1,2])}` for `q in [1, inf]`.
pub(crate) fn forward_norm(shape: &Shape, track: &Track, q: f64, res: &ExactResolution) -> Result<f64> {
    res.validate()?;
    if q < 1.0 {
        return Err(Error::Domain(format!("exponent {q} < 1")));
    }
    let us = gauss(res.u_nodes, 1.0, 2.0);
    let ts = t_nodes(track.end, 0.5 * shape.half_x1(), res.panel_nodes);
    let ys = shape.nodes(res.set_nodes);
    let outer: Vec<(f64, f64, f64)> =
        us.iter().flat_map(|&(u, wu)| ts.iter().map(move |&(t, wt)| (u, t, wu * wt))).collect();
    let parts: Vec<f64> = outer
        .par_iter()
        .map(|&(u, t, w)| {
            let (c1, c2) = (u * t, u * track.gamma(t));
            let vals = ys.iter().map(|&(y1, y2, wy)| {
                let m = hit_length(shape, track, [y1 + c1, y2 + c2], u, -1.0, res.scan);
                (m, wy)
            });
            if q.is_infinite() {
                vals.fold(0.0f64, |acc, (m, _)| acc.max(m))
            } else {
                w * compensated_sum(vals.map(|(m, wy)| wy * m.powf(q - 1.0)))
            }
        })
        .collect();
    let s = reduce(parts, q);
    Ok(if q.is_infinite() { s } else { s.powf(1.0 / q) })
}

/// `||T* 1_W||_{L^p(R^2)}` for `W = shape x [1, u_hi]` and `p in [1, inf]`.
pub(crate) fn adjoint_norm(shape: &Shape, u_hi: f64, track: &Track, p: f64, res: &ExactResolution) -> Result<f64> {
    res.validate()?;
    if p < 1.0 {
        return Err(Error::Domain(format!("exponent {p} < 1")));
    }
    if !(u_hi > 1.0 && u_hi <= 2.0) {
        return Err(Error::Precondition(format!("slab top {u_hi} not in (1, 2]")));
    }
    let us = gauss(res.u_nodes, 1.0, u_hi);
    let ts = t_nodes(track.end, 0.5 * shape.half_x1(), res.panel_nodes);
    let ys = shape.nodes(res.set_nodes);
    let outer: Vec<(f64, f64, f64)> =
        us.iter().flat_map(|&(u, wu)| ts.iter().map(move |&(t, wt)| (u, t, wu * wt))).collect();
    let dual = |x: [f64; 2]| -> f64 {
        compensated_sum(us.iter().map(|&(v, wv)| wv * hit_length(shape, track, x, v, 1.0, res.scan)))
    };
    let parts: Vec<f64> = outer
        .par_iter()
        .map(|&(u, t, w)| {
            let (c1, c2) = (u * t, u * track.gamma(t));
            let vals = ys.iter().map(|&(y1, y2, wy)| (dual([y1 - c1, y2 - c2]), wy));
            if p.is_infinite() {
                vals.fold(0.0f64, |acc, (m, _)| acc.max(m))
            } else {
                w * compensated_sum(vals.map(|(m, wy)| wy * m.powf(p - 1.0)))
            }
        })
        .collect();
    let s = reduce(parts, p);
    Ok(if p.is_infinite() { s } else { s.powf(1.0 / p) })
}
