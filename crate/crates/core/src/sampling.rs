//! Cell-centered grids on the plane and on plane x `[1, 2]`, indicator sets,
//! and Lebesgue norms.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::Curve;
use crate::error::{Error, Result};

/// Default cap on the number of cells in one field.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 26;

/// Chunk length used by the parallel reductions. Fixed so that the
/// combination order, and hence the result, does not depend on thread count.
const REDUCE_CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x1_range: (f64, f64),
    pub x2_range: (f64, f64),
    pub n1: usize,
    pub n2: usize,
    /// `(lo, hi, nu)` for fields on plane x `[lo, hi]`.
    pub u_range: Option<(f64, f64, usize)>,
}

impl GridSpec {
    pub fn new(x1_range: (f64, f64), x2_range: (f64, f64), n1: usize, n2: usize) -> Result<Self> {
        Self::with_budget(x1_range, x2_range, n1, n2, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(
        x1_range: (f64, f64),
        x2_range: (f64, f64),
        n1: usize,
        n2: usize,
        budget: usize,
    ) -> Result<Self> {
        if !(x1_range.1 > x1_range.0 && x2_range.1 > x2_range.0) || n1 == 0 || n2 == 0 {
            return Err(Error::Domain("grid needs positive widths and cell counts".to_string()));
        }
        if n1.saturating_mul(n2) > budget {
            return Err(Error::Resolution(format!("{n1}x{n2} cells exceed the budget of {budget}")));
        }
        Ok(GridSpec { x1_range, x2_range, n1, n2, u_range: None })
    }

    /// Square grid `[-half, half]^2` with `n` cells per side.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new((-half, half), (-half, half), n, n)
    }

    /// `[-4, 4]^2` at 1024^2.
    pub fn default_plane() -> Self {
        Self::square(4.0, 1024).expect("default grid fits the budget")
    }

    /// Adds `u in [1, 2]` with `nu` cells.
    pub fn with_u(self, nu: usize) -> Result<Self> {
        self.with_u_range(1.0, 2.0, nu)
    }

    pub fn with_u_range(mut self, lo: f64, hi: f64, nu: usize) -> Result<Self> {
        if !(hi > lo) || nu == 0 {
            return Err(Error::Domain("u range needs positive width and cells".to_string()));
        }
        if self.n1.saturating_mul(self.n2).saturating_mul(nu) > DEFAULT_CELL_BUDGET {
            return Err(Error::Resolution(format!(
                "{}x{}x{nu} cells exceed the budget of {DEFAULT_CELL_BUDGET}",
                self.n1, self.n2
            )));
        }
        self.u_range = Some((lo, hi, nu));
        Ok(self)
    }

    pub fn h1(&self) -> f64 {
        (self.x1_range.1 - self.x1_range.0) / self.n1 as f64
    }

    pub fn h2(&self) -> f64 {
        (self.x2_range.1 - self.x2_range.0) / self.n2 as f64
    }

    pub fn hu(&self) -> f64 {
        self.u_range.map(|(lo, hi, n)| (hi - lo) / n as f64).unwrap_or(1.0)
    }

    pub fn nu(&self) -> usize {
        self.u_range.map(|u| u.2).unwrap_or(1)
    }

    pub fn cell_area(&self) -> f64 {
        self.h1() * self.h2()
    }

    pub fn x1(&self, i1: usize) -> f64 {
        self.x1_range.0 + (i1 as f64 + 0.5) * self.h1()
    }

    pub fn x2(&self, i2: usize) -> f64 {
        self.x2_range.0 + (i2 as f64 + 0.5) * self.h2()
    }

    pub fn u(&self, iu: usize) -> f64 {
        let (lo, _, _) = self.u_range.unwrap_or((1.0, 2.0, 1));
        lo + (iu as f64 + 0.5) * self.hu()
    }

    pub fn plane_len(&self) -> usize {
        self.n1 * self.n2
    }

    /// The same plane with no `u` axis.
    pub fn plane(&self) -> GridSpec {
        GridSpec { u_range: None, ..*self }
    }

    /// Index range of cells whose centers lie in `[lo, hi]` along axis 1.
    fn range1(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        axis_range(self.x1_range.0, self.h1(), self.n1, lo, hi)
    }

    fn range2(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        axis_range(self.x2_range.0, self.h2(), self.n2, lo, hi)
    }

    fn check_fits(&self, bbox: [f64; 4]) -> Result<()> {
        let (m1, m2) = (2.0 * self.h1(), 2.0 * self.h2());
        if bbox[0] - m1 < self.x1_range.0
            || bbox[1] + m1 > self.x1_range.1
            || bbox[2] - m2 < self.x2_range.0
            || bbox[3] + m2 > self.x2_range.1
        {
            return Err(Error::Domain(format!(
                "set [{}, {}]x[{}, {}] does not fit the grid with a 2-cell margin",
                bbox[0], bbox[1], bbox[2], bbox[3]
            )));
        }
        Ok(())
    }
}

fn axis_range(origin: f64, h: f64, n: usize, lo: f64, hi: f64) -> std::ops::Range<usize> {
    let a = ((lo - origin) / h - 0.5).ceil().max(0.0);
    let b = ((hi - origin) / h - 0.5).floor() + 1.0;
    let b = b.clamp(0.0, n as f64);
    (a.min(b) as usize)..(b as usize)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn chunked_sum(values: &[f64], f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let parts: Vec<f64> = values
        .par_chunks(REDUCE_CHUNK)
        .map(|c| compensated_sum(c.iter().map(|&v| f(v))))
        .collect();
    compensated_sum(parts)
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("exponent {p} < 1")))
    }
}

fn norm_of(values: &[f64], p: f64, measure: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    // scale by the max to avoid overflow for large p
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(0.0);
    }
    let s = chunked_sum(values, |v| (v.abs() / max).powf(p));
    Ok(max * (s * measure).powf(1.0 / p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub spec: GridSpec,
    /// Index `i2 * n1 + i1`.
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn zeros(spec: GridSpec) -> Self {
        SampledField { values: vec![0.0; spec.plane_len()], spec: spec.plane() }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let spec = spec.plane();
        let values = (0..spec.plane_len())
            .into_par_iter()
            .map(|i| f(spec.x1(i % spec.n1), spec.x2(i / spec.n1)))
            .collect();
        SampledField { spec, values }
    }

    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.values[i2 * self.spec.n1 + i1]
    }

    pub fn scaled(&self, c: f64) -> Self {
        SampledField { spec: self.spec, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Bilinear interpolation between cell centers, zero outside the grid.
    pub fn interpolate(&self, x1: f64, x2: f64) -> f64 {
        let s = &self.spec;
        let a = (x1 - s.x1_range.0) / s.h1() - 0.5;
        let b = (x2 - s.x2_range.0) / s.h2() - 0.5;
        if !(a > -1.0 && b > -1.0 && a < s.n1 as f64 && b < s.n2 as f64) {
            return 0.0;
        }
        let (i, k) = (a.floor(), b.floor());
        let (fa, fb) = (a - i, b - k);
        let (i, k) = (i as isize, k as isize);
        let at = |ii: isize, kk: isize| -> f64 {
            if ii < 0 || kk < 0 || ii >= s.n1 as isize || kk >= s.n2 as isize {
                0.0
            } else {
                self.values[kk as usize * s.n1 + ii as usize]
            }
        };
        (1.0 - fb) * ((1.0 - fa) * at(i, k) + fa * at(i + 1, k))
            + fb * ((1.0 - fa) * at(i, k + 1) + fa * at(i + 1, k + 1))
    }

    /// Integral of the field, i.e. the measure of an indicator.
    pub fn integral(&self) -> f64 {
        chunked_sum(&self.values, |v| v) * self.spec.cell_area()
    }

    /// Nonzero cells as `(x1, x2, value)`.
    pub fn support(&self) -> Vec<(f64, f64, f64)> {
        let s = &self.spec;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (s.x1(i % s.n1), s.x2(i / s.n1), v))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Internal(e.to_string());
        let s = &self.spec;
        writeln!(
            w,
            "# x1=[{},{}] x2=[{},{}] n1={} n2={}",
            s.x1_range.0, s.x1_range.1, s.x2_range.0, s.x2_range.1, s.n1, s.n2
        )
        .map_err(io)?;
        writeln!(w, "i1,i2,value").map_err(io)?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{},{}", i % s.n1, i / s.n1, v).map_err(io)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedField {
    pub spec: GridSpec,
    /// Index `(iu * n2 + i2) * n1 + i1`.
    pub values: Vec<f64>,
}

impl MixedField {
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Result<Self> {
        if spec.u_range.is_none() {
            return Err(Error::Precondition("mixed field needs a u range".to_string()));
        }
        let plane = spec.plane_len();
        let values = (0..plane * spec.nu())
            .into_par_iter()
            .map(|i| {
                let (iu, r) = (i / plane, i % plane);
                f(spec.x1(r % spec.n1), spec.x2(r / spec.n1), spec.u(iu))
            })
            .collect();
        Ok(MixedField { spec, values })
    }

    /// Slice at the `iu`-th `u` cell.
    pub fn slice(&self, iu: usize) -> SampledField {
        let plane = self.spec.plane_len();
        SampledField { spec: self.spec.plane(), values: self.values[iu * plane..(iu + 1) * plane].to_vec() }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Internal(e.to_string());
        let s = &self.spec;
        let (ulo, uhi, nu) = s.u_range.unwrap_or((1.0, 2.0, 1));
        writeln!(
            w,
            "# x1=[{},{}] x2=[{},{}] u=[{},{}] n1={} n2={} nu={}",
            s.x1_range.0, s.x1_range.1, s.x2_range.0, s.x2_range.1, ulo, uhi, s.n1, s.n2, nu
        )
        .map_err(io)?;
        writeln!(w, "i1,i2,iu,value").map_err(io)?;
        let plane = s.plane_len();
        for (i, v) in self.values.iter().enumerate() {
            let r = i % plane;
            writeln!(w, "{},{},{},{}", r % s.n1, r / s.n1, i / plane, v).map_err(io)?;
        }
        Ok(())
    }
}

/// `(sum |v|^p * cellArea)^(1/p)`, or `max |v|` for `p = inf`.
pub fn lp_norm(field: &SampledField, p: f64) -> Result<f64> {
    norm_of(&field.values, p, field.spec.cell_area())
}

/// Norm over the product measure `dx du`.
pub fn mixed_norm(field: &MixedField, q: f64) -> Result<f64> {
    norm_of(&field.values, q, field.spec.cell_area() * field.spec.hu())
}

/// Which `u` values sweep a curve neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Single(f64),
    /// All `u in [1, 2]`.
    Swept,
}

/// Indicator sets used by the extremizer constructions.
#[derive(Debug, Clone)]
pub enum SetBuilder {
    /// `[-a, a] x [-b, b]`
    Rectangle { half_width: f64, half_height: f64 },
    Ball { center: (f64, f64), radius: f64 },
    /// `eps`-neighborhood of `sign * (u t, u gamma(t))`, `t in (0, 1]`.
    CurveNeighborhood { curve: Curve, eps: f64, sweep: Sweep, sign: f64 },
    /// Box with half sides `6 eps` along `e1 = -(1, g'(1))/|.|` and
    /// `(3 + 2|g''(1)|) eps^2` along `e2 = (-g'(1), 1)/|.|`, for the curve
    /// normalized to `g(1) = 1`.
    TiltedBox { curve: Curve, eps: f64 },
    /// `B(0, radius) x [u_lo, u_hi]`.
    SlabProduct { radius: f64, u_lo: f64, u_hi: f64 },
}

impl SetBuilder {
    /// `S_t = [-t, t] x [-|gamma(t)|, |gamma(t)|]`.
    pub fn s_t(curve: &Curve, t: f64) -> Result<Self> {
        Ok(SetBuilder::Rectangle { half_width: t, half_height: curve.eval(t, 0)?.abs() })
    }

    /// Unit vectors `e1`, `e2` and half sides of the tilted box.
    pub fn tilted_frame(curve: &Curve, eps: f64) -> Result<([f64; 2], [f64; 2], f64, f64)> {
        let g = curve.rescale(0)?;
        let d1 = g.eval(1.0, 1)?;
        let d2 = g.eval(1.0, 2)?;
        let n = (1.0 + d1 * d1).sqrt();
        Ok(([-1.0 / n, -d1 / n], [-d1 / n, 1.0 / n], 6.0 * eps, (3.0 + 2.0 * d2.abs()) * eps * eps))
    }

    /// Exact area (plane sets) or volume (slab), when it has a closed form.
    pub fn measure(&self) -> Result<Option<f64>> {
        Ok(match self {
            SetBuilder::Rectangle { half_width, half_height } => Some(4.0 * half_width * half_height),
            SetBuilder::Ball { radius, .. } => Some(std::f64::consts::PI * radius * radius),
            SetBuilder::TiltedBox { curve, eps } => {
                let (_, _, a, b) = Self::tilted_frame(curve, *eps)?;
                Some(4.0 * a * b)
            }
            SetBuilder::SlabProduct { radius, u_lo, u_hi } => {
                Some(std::f64::consts::PI * radius * radius * (u_hi - u_lo))
            }
            SetBuilder::CurveNeighborhood { .. } => None,
        })
    }

    /// Axis-aligned bounding box `[x1_lo, x1_hi, x2_lo, x2_hi]`.
    pub fn bounding_box(&self) -> Result<[f64; 4]> {
        Ok(match self {
            SetBuilder::Rectangle { half_width: a, half_height: b } => [-a, *a, -b, *b],
            SetBuilder::Ball { center, radius } => {
                [center.0 - radius, center.0 + radius, center.1 - radius, center.1 + radius]
            }
            SetBuilder::SlabProduct { radius, .. } => [-radius, *radius, -radius, *radius],
            SetBuilder::TiltedBox { curve, eps } => {
                let (e1, e2, a, b) = Self::tilted_frame(curve, *eps)?;
                let w1 = a * e1[0].abs() + b * e2[0].abs();
                let w2 = a * e1[1].abs() + b * e2[1].abs();
                [-w1, w1, -w2, w2]
            }
            SetBuilder::CurveNeighborhood { curve, eps, sweep, sign } => {
                let umax = match sweep {
                    Sweep::Single(u) => *u,
                    Sweep::Swept => 2.0,
                };
                let g1 = curve.eval(curve.end.min(1.0), 0)?;
                let (xa, xb) = sorted(0.0, sign * umax * curve.end.min(1.0));
                let (ya, yb) = sorted(0.0, sign * umax * g1);
                [xa - eps, xb + eps, ya - eps, yb + eps]
            }
        })
    }
}

fn sorted(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Indicator of a plane set, by cell-center membership.
pub fn build_indicator(builder: &SetBuilder, spec: &GridSpec) -> Result<SampledField> {
    let spec = spec.plane();
    spec.check_fits(builder.bounding_box()?)?;
    match builder {
        SetBuilder::Rectangle { half_width: a, half_height: b } => {
            let (a, b) = (*a, *b);
            Ok(SampledField::from_fn(spec, move |x, y| indicator(x.abs() <= a && y.abs() <= b)))
        }
        SetBuilder::Ball { center, radius } => {
            let (c, r2) = (*center, radius * radius);
            Ok(SampledField::from_fn(spec, move |x, y| {
                indicator((x - c.0).powi(2) + (y - c.1).powi(2) <= r2)
            }))
        }
        SetBuilder::TiltedBox { curve, eps } => {
            let (e1, e2, a, b) = SetBuilder::tilted_frame(curve, *eps)?;
            Ok(SampledField::from_fn(spec, move |x, y| {
                indicator((x * e1[0] + y * e1[1]).abs() <= a && (x * e2[0] + y * e2[1]).abs() <= b)
            }))
        }
        SetBuilder::CurveNeighborhood { curve, eps, sweep, sign } => {
            curve_neighborhood(curve, *eps, *sweep, *sign, spec)
        }
        SetBuilder::SlabProduct { .. } => {
            Err(Error::Precondition("slab_product is a set in plane x [1,2]; use build_slab".to_string()))
        }
    }
}

/// Indicator of `B(0, r) x [u_lo, u_hi]` on a grid with a `u` axis.
pub fn build_slab(builder: &SetBuilder, spec: &GridSpec) -> Result<MixedField> {
    let SetBuilder::SlabProduct { radius, u_lo, u_hi } = builder else {
        return Err(Error::Precondition("build_slab needs a slab_product".to_string()));
    };
    spec.check_fits(builder.bounding_box()?)?;
    let (r2, lo, hi) = (radius * radius, *u_lo, *u_hi);
    MixedField::from_fn(*spec, move |x, y, u| indicator(x * x + y * y <= r2 && u >= lo && u <= hi))
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Marks every cell whose center is within `eps` of a dense sampling of the
/// curve (or of the swept region), with at least 4 samples per cell.
fn curve_neighborhood(curve: &Curve, eps: f64, sweep: Sweep, sign: f64, spec: GridSpec) -> Result<SampledField> {
    let h = spec.h1().min(spec.h2());
    let step = h / 4.0;
    let t_end = curve.end.min(1.0);
    let (ulo, uhi) = match sweep {
        Sweep::Single(u) => (u, u),
        Sweep::Swept => (1.0, 2.0),
    };
    // t samples with spacing <= step in arclength at u = uhi
    let mut ts = vec![];
    let mut t = 0.0f64;
    ts.push(0.0);
    while t < t_end {
        let speed = uhi * (1.0 + curve.eval(t.max(1e-12).min(t_end), 1)?.powi(2)).sqrt();
        t = (t + step / speed.max(1e-12)).min(t_end);
        ts.push(t);
    }
    let mut points = Vec::new();
    for &t in &ts {
        let g = if t == 0.0 { 0.0 } else { curve.eval(t, 0)? };
        let len = (t * t + g * g).sqrt();
        let nu = (((uhi - ulo) * len / step).ceil() as usize).max(1);
        for k in 0..=nu {
            let u = if uhi > ulo { ulo + (uhi - ulo) * k as f64 / nu as f64 } else { ulo };
            points.push((sign * u * t, sign * u * g));
        }
    }
    let mut values = vec![0.0; spec.plane_len()];
    let e2 = eps * eps;
    for (px, py) in points {
        for i2 in spec.range2(py - eps, py + eps) {
            let dy = spec.x2(i2) - py;
            let rem = e2 - dy * dy;
            if rem < 0.0 {
                continue;
            }
            let w = rem.sqrt();
            for i1 in spec.range1(px - w, px + w) {
                values[i2 * spec.n1 + i1] = 1.0;
            }
        }
    }
    Ok(SampledField { spec, values })
}
