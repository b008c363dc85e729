//! The averaging operator `Tf(x, u) = int_0^1 f(x1 - u t, x2 - u gamma(t)) dt`,
//! its dyadic pieces, the rescaled pieces, dilations and the adjoint, applied
//! to sampled fields by quadrature with bilinear interpolation.
//!
//! Every dyadic piece keeps the `t <= end` restriction of `T` itself, so
//! `sum_j T_j = T` holds exactly on `(0, end]`.

use serde::Serialize;

use crate::curves::{Curve, RescaledCurve};
use crate::error::{Error, Result};
use crate::sampling::{GridSpec, MixedField, SampledField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Midpoint,
    Simpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub nodes: usize,
    /// Extra geometric midpoint cells below `2^-6` on `(0, 1]`.
    pub refine_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rule: Rule::Simpson, nodes: 512, refine_nodes: 64 }
    }
}

const REFINE_TOP: f64 = 1.0 / 64.0;
/// The geometric cells span `[2^-30, 2^-6]`; `[0, 2^-30]` is one more cell.
const REFINE_OCTAVES: f64 = 24.0;

impl QuadratureSpec {
    pub fn new(rule: Rule, nodes: usize) -> Result<Self> {
        let q = QuadratureSpec { rule, nodes, ..Default::default() };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::Precondition(format!("{} quadrature nodes < 16", self.nodes)));
        }
        Ok(())
    }

    /// Nodes and weights of the base rule on `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let n = self.nodes;
        let h = (b - a) / n as f64;
        match self.rule {
            Rule::Midpoint => (0..n).map(|i| (a + (i as f64 + 0.5) * h, h)).collect(),
            Rule::Simpson => {
                let n = n + n % 2;
                let h = (b - a) / n as f64;
                (0..=n)
                    .map(|i| {
                        let w = if i == 0 || i == n {
                            1.0
                        } else if i % 2 == 1 {
                            4.0
                        } else {
                            2.0
                        };
                        (a + i as f64 * h, w * h / 3.0)
                    })
                    .collect()
            }
        }
    }

    /// Nodes on `(0, end]`: the base rule above `2^-6` and geometric midpoint
    /// cells below, so that `t = 0` is never evaluated.
    pub fn on_unit(&self, end: f64) -> Vec<(f64, f64)> {
        if self.refine_nodes == 0 || end <= REFINE_TOP {
            let mut q = QuadratureSpec { rule: Rule::Midpoint, ..*self };
            q.refine_nodes = 0;
            return q.on_interval(0.0, end);
        }
        let mut out = Vec::with_capacity(self.nodes + self.refine_nodes + 2);
        let m = self.refine_nodes;
        let edge = |k: usize| REFINE_TOP * (-(REFINE_OCTAVES * k as f64 / m as f64)).exp2();
        let bottom = edge(m);
        out.push((0.5 * bottom, bottom));
        for k in (0..m).rev() {
            let (lo, hi) = (edge(k + 1), edge(k));
            out.push((0.5 * (lo + hi), hi - lo));
        }
        out.extend(self.on_interval(REFINE_TOP, end));
        out
    }
}

/// Smooth dyadic bump `psi(t) = eta(t) - eta(2t)`, with `eta = 1` on `(0, 1]`,
/// `eta = 0` on `[2, inf)` and an `exp(-1/s)` transition between.
#[derive(Debug, Clone, Copy, Default)]
pub struct CutoffBump;

impl CutoffBump {
    fn s(x: f64) -> f64 {
        if x > 0.0 {
            (-1.0 / x).exp()
        } else {
            0.0
        }
    }

    pub fn eta(t: f64) -> f64 {
        if t <= 1.0 {
            1.0
        } else if t >= 2.0 {
            0.0
        } else {
            let a = Self::s(2.0 - t);
            a / (a + Self::s(t - 1.0))
        }
    }

    pub fn psi(t: f64) -> f64 {
        Self::eta(t) - Self::eta(2.0 * t)
    }

    /// `psi_j(t) = psi(2^-j t)`.
    pub fn psi_j(j: i32, t: f64) -> f64 {
        Self::psi(t * (-j as f64).exp2())
    }

    pub const SUPPORT: (f64, f64) = (0.5, 2.0);
}

/// Curve samples `(w, dx1, dx2)` so that the operator reads
/// `sum w f(x1 - u dx1, x2 - u dx2)`.
type Stencil = Vec<(f64, f64, f64)>;

fn stencil_unit(curve: &Curve, quad: &QuadratureSpec) -> Result<Stencil> {
    quad.validate()?;
    quad.on_unit(curve.end)
        .into_iter()
        .map(|(t, w)| Ok((w, t, curve.eval(t, 0)?)))
        .collect()
}

fn stencil_tj(curve: &Curve, j: i32, quad: &QuadratureSpec) -> Result<Stencil> {
    quad.validate()?;
    if j > 0 {
        return Err(Error::Precondition(format!("j = {j} must be <= 0")));
    }
    let s = (j as f64).exp2();
    let hi = (2.0 * s).min(curve.end);
    let lo = 0.5 * s;
    if hi <= lo {
        return Ok(vec![]);
    }
    quad.on_interval(lo, hi)
        .into_iter()
        .map(|(t, w)| Ok((w * CutoffBump::psi_j(j, t), t, curve.eval(t, 0)?)))
        .collect()
}

fn stencil_ttilde(g: &RescaledCurve, quad: &QuadratureSpec) -> Result<Stencil> {
    quad.validate()?;
    let hi = 2.0f64.min(g.t_max());
    if hi <= 0.5 {
        return Ok(vec![]);
    }
    quad.on_interval(0.5, hi)
        .into_iter()
        .map(|(t, w)| Ok((w * CutoffBump::psi(t), t, g.eval(t, 0)?)))
        .collect()
}

/// Bounding box of `{x - u c : x in out, u in us, c in stencil}`.
fn pulled_back_box(out: &GridSpec, us: (f64, f64), st: &Stencil, sign: f64) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for &(_, d1, d2) in st {
        for u in [us.0, us.1] {
            b[0] = b[0].min(-sign * u * d1);
            b[1] = b[1].max(-sign * u * d1);
            b[2] = b[2].min(-sign * u * d2);
            b[3] = b[3].max(-sign * u * d2);
        }
    }
    let (x1a, x1b) = (out.x1(0), out.x1(out.n1 - 1));
    let (x2a, x2b) = (out.x2(0), out.x2(out.n2 - 1));
    [x1a + b[0].min(0.0), x1b + b[1].max(0.0), x2a + b[2].min(0.0), x2b + b[3].max(0.0)]
}

/// The input grid must contain every sampled point, unless the field vanishes
/// on its outer two cells, in which case zero extension is exact.
fn check_cover(f: &SampledField, need: [f64; 4]) -> Result<()> {
    let s = &f.spec;
    // bilinear interpolation is only complete between the outer cell centers
    let inside = need[0] >= s.x1(0) && need[1] <= s.x1(s.n1 - 1) && need[2] >= s.x2(0) && need[3] <= s.x2(s.n2 - 1);
    if inside || zero_frame(f) {
        return Ok(());
    }
    Err(Error::Domain(format!(
        "input grid does not cover [{}, {}]x[{}, {}] and the field is nonzero near its edge",
        need[0], need[1], need[2], need[3]
    )))
}

fn zero_frame(f: &SampledField) -> bool {
    let (n1, n2) = (f.spec.n1, f.spec.n2);
    (0..n2).all(|i2| {
        (0..n1).all(|i1| {
            let edge = i1 < 2 || i2 < 2 || i1 + 2 >= n1 || i2 + 2 >= n2;
            !edge || f.get(i1, i2) == 0.0
        })
    })
}

fn gather(f: &SampledField, x1: f64, x2: f64, u: f64, st: &Stencil) -> f64 {
    // fixed-order sum, so each cell is reproducible under any partitioning
    st.iter().map(|&(w, d1, d2)| w * f.interpolate(x1 - u * d1, x2 - u * d2)).sum()
}

fn apply_mixed(f: &SampledField, spec: &GridSpec, st: &Stencil) -> Result<MixedField> {
    let (lo, hi, _) = spec
        .u_range
        .ok_or_else(|| Error::Precondition("output grid needs a u range".to_string()))?;
    check_cover(f, pulled_back_box(spec, (lo, hi), st, 1.0))?;
    MixedField::from_fn(*spec, |x1, x2, u| gather(f, x1, x2, u, st))
}

fn apply_plane(f: &SampledField, out: &GridSpec, u: f64, st: &Stencil) -> Result<SampledField> {
    check_cover(f, pulled_back_box(out, (u, u), st, 1.0))?;
    Ok(SampledField::from_fn(*out, |x1, x2| gather(f, x1, x2, u, st)))
}

/// `Tf` on the cell centers of `spec` (which must carry a `u` range).
pub fn apply_t(f: &SampledField, curve: &Curve, spec: &GridSpec, quad: &QuadratureSpec) -> Result<MixedField> {
    apply_mixed(f, spec, &stencil_unit(curve, quad)?)
}

/// `Tf(., u)` for one fixed `u`.
pub fn apply_t_at(
    f: &SampledField,
    curve: &Curve,
    u: f64,
    out: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<SampledField> {
    apply_plane(f, out, u, &stencil_unit(curve, quad)?)
}

/// Scatter form of [`apply_t_at`]: each nonzero input cell deposits its
/// bilinear hat along the translated curve. With equal cell sizes on input
/// and output this is the same sum as the gather form, at a cost
/// proportional to the support of `f`.
pub fn apply_t_at_scatter(
    f: &SampledField,
    curve: &Curve,
    u: f64,
    out: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<SampledField> {
    let (h1, h2) = (out.h1(), out.h2());
    if (f.spec.h1() - h1).abs() > 1e-12 * h1 || (f.spec.h2() - h2).abs() > 1e-12 * h2 {
        return Err(Error::Precondition("scatter needs equal cell sizes on input and output".to_string()));
    }
    let st = stencil_unit(curve, quad)?;
    let support = f.support();
    let mut values = vec![0.0; out.plane_len()];
    for (y1, y2, v) in support {
        for &(w, d1, d2) in &st {
            let a = (y1 + u * d1 - out.x1_range.0) / h1 - 0.5;
            let b = (y2 + u * d2 - out.x2_range.0) / h2 - 0.5;
            let (i, k) = (a.floor(), b.floor());
            let (fa, fb) = (a - i, b - k);
            let (i, k) = (i as isize, k as isize);
            for (di, dk, wt) in [
                (0, 0, (1.0 - fa) * (1.0 - fb)),
                (1, 0, fa * (1.0 - fb)),
                (0, 1, (1.0 - fa) * fb),
                (1, 1, fa * fb),
            ] {
                let (ii, kk) = (i + di, k + dk);
                if ii < 0 || kk < 0 || ii >= out.n1 as isize || kk >= out.n2 as isize {
                    if wt > 0.0 {
                        return Err(Error::Domain("output grid does not contain the image of f".to_string()));
                    }
                    continue;
                }
                values[kk as usize * out.n1 + ii as usize] += w * v * wt;
            }
        }
    }
    Ok(SampledField { spec: out.plane(), values })
}

/// `T_j f`: the `t`-integral weighted by `psi_j`, over `[2^(j-1), 2^(j+1)]`.
pub fn apply_tj(
    f: &SampledField,
    curve: &Curve,
    j: i32,
    spec: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<MixedField> {
    apply_mixed(f, spec, &stencil_tj(curve, j, quad)?)
}

/// `T~_j f(., u)`: the `t`-integral of `f(x1 - u t, x2 - u Gamma_j(t))` against `psi`.
pub fn apply_ttilde(
    f: &SampledField,
    curve: &Curve,
    j: i32,
    u: f64,
    out: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<SampledField> {
    if !(1.0..=2.0).contains(&u) {
        return Err(Error::Domain(format!("u = {u} not in [1, 2]")));
    }
    apply_plane(f, out, u, &stencil_ttilde(&curve.rescale(j)?, quad)?)
}

/// `delta_j f(x) = f(2^j x1, gamma(2^j) x2)`, realized on the grid whose cell
/// centers are the preimages of `f`'s, so no resampling is needed.
pub fn dilate(f: &SampledField, curve: &Curve, j: i32) -> Result<SampledField> {
    Ok(SampledField { spec: dilated_spec(&f.spec, curve, j)?, values: f.values.clone() })
}

/// Same as [`dilate`] for each `u` slice of a mixed field.
pub fn dilate_mixed(g: &MixedField, curve: &Curve, j: i32) -> Result<MixedField> {
    let mut spec = dilated_spec(&g.spec.plane(), curve, j)?;
    spec.u_range = g.spec.u_range;
    Ok(MixedField { spec, values: g.values.clone() })
}

fn dilated_spec(s: &GridSpec, curve: &Curve, j: i32) -> Result<GridSpec> {
    if j > 0 {
        return Err(Error::Precondition(format!("j = {j} must be <= 0")));
    }
    let a = (j as f64).exp2();
    let b = curve.eval(a, 0)?;
    if !(b > 0.0) {
        return Err(Error::Domain(format!("gamma(2^{j}) = {b} is not positive")));
    }
    let r1 = (s.x1_range.0 / a, s.x1_range.1 / a);
    let r2 = (s.x2_range.0 / b, s.x2_range.1 / b);
    if !(r1.0.is_finite() && r1.1.is_finite() && r2.0.is_finite() && r2.1.is_finite()) {
        return Err(Error::Domain(format!("dilation by 2^{j} overflows the grid range")));
    }
    Ok(GridSpec { x1_range: r1, x2_range: r2, ..*s })
}

/// `T* g(x) = int_1^2 int_0^1 g(x1 + u t, x2 + u gamma(t), u) dt du`, with
/// Simpson in `u` on `2 nu` intervals and linear interpolation between the
/// `u` slices of `g`.
pub fn apply_adjoint(g: &MixedField, curve: &Curve, out: &GridSpec, quad: &QuadratureSpec) -> Result<SampledField> {
    let (ulo, uhi, nu) = g
        .spec
        .u_range
        .ok_or_else(|| Error::Precondition("adjoint input needs a u range".to_string()))?;
    if (ulo, uhi) != (1.0, 2.0) {
        return Err(Error::Precondition("adjoint input must live on u in [1, 2]".to_string()));
    }
    let st = stencil_unit(curve, quad)?;
    let slices: Vec<SampledField> = (0..nu).map(|iu| g.slice(iu)).collect();
    for s in &slices {
        check_cover(s, pulled_back_box(out, (1.0, 2.0), &st, -1.0))?;
    }
    let uq = QuadratureSpec { rule: Rule::Simpson, nodes: (2 * nu).max(16), refine_nodes: 0 }.on_interval(1.0, 2.0);
    let hu = g.spec.hu();
    // (weight, lower slice, fraction)
    let ustencil: Vec<(f64, usize, f64)> = uq
        .iter()
        .map(|&(u, w)| {
            let a = ((u - 1.0) / hu - 0.5).clamp(0.0, (nu - 1) as f64);
            let i = (a.floor() as usize).min(nu.saturating_sub(2));
            (w, i, if nu > 1 { a - i as f64 } else { 0.0 })
        })
        .collect();
    let uvals: Vec<f64> = uq.iter().map(|p| p.0).collect();
    Ok(SampledField::from_fn(*out, |x1, x2| {
        let mut acc = 0.0;
        for (k, &(wu, i, fr)) in ustencil.iter().enumerate() {
            let u = uvals[k];
            let mut inner = 0.0;
            for &(w, d1, d2) in &st {
                let (y1, y2) = (x1 + u * d1, x2 + u * d2);
                let lo = slices[i].interpolate(y1, y2);
                let hi = if fr > 0.0 { slices[i + 1].interpolate(y1, y2) } else { 0.0 };
                inner += w * ((1.0 - fr) * lo + fr * hi);
            }
            acc += wu * inner;
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: f64, y: f64, r: f64) -> f64 {
        let s = (x * x + y * y) / (r * r);
        if s < 1.0 {
            (-1.0 / (1.0 - s)).exp()
        } else {
            0.0
        }
    }

    /// Composite Simpson on a fine grid, independent of `QuadratureSpec`.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn bump_invariants() {
        let total = simpson(CutoffBump::psi, 0.5, 2.0, 20_000);
        assert!((total - 0.75).abs() < 1e-10, "{total}");
        assert_eq!(CutoffBump::psi(1.0), 1.0);
        assert_eq!(CutoffBump::psi(0.5), 0.0);
        assert_eq!(CutoffBump::psi(2.0), 0.0);
        for k in 0..200 {
            let t = (-9.0 + 18.0 * k as f64 / 199.0).exp2();
            let s: f64 = (-12..=12).map(|j| CutoffBump::psi_j(j, t)).sum();
            assert!((s - 1.0).abs() < 1e-12, "t={t} sum={s}");
        }
    }

    #[test]
    fn quadrature_rules() {
        let q = QuadratureSpec::default();
        let sum: f64 = q.on_unit(1.0).iter().map(|p| p.1).sum();
        assert!((sum - 1.0).abs() < 1e-14);
        let lin: f64 = q.on_unit(1.0).iter().map(|p| p.0 * p.1).sum();
        assert!((lin - 0.5).abs() < 1e-14);
        assert!(QuadratureSpec::new(Rule::Simpson, 8).is_err());
    }

    fn setup() -> (GridSpec, GridSpec) {
        let input = GridSpec::square(5.0, 320).unwrap();
        let out = GridSpec::square(0.5, 32).unwrap().with_u(4).unwrap();
        (input, out)
    }

    #[test]
    fn constant_and_linear_inputs() {
        let (input, out) = setup();
        let c = Curve::polynomial(&[0.0, 0.0, 1.0, 1.0]);
        let q = QuadratureSpec::default();
        let one = SampledField::from_fn(input, |_, _| 1.0);
        let t1 = apply_t(&one, &c, &out, &q).unwrap();
        assert!(t1.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let lin = SampledField::from_fn(input, |x, _| x);
        let tl = apply_t(&lin, &c, &out, &q).unwrap();
        let plane = out.plane_len();
        for (i, v) in tl.values.iter().enumerate() {
            let (iu, r) = (i / plane, i % plane);
            let expect = out.x1(r % out.n1) - out.u(iu) / 2.0;
            assert!((v - expect).abs() < 1e-6);
        }
    }

    #[test]
    fn margin_error() {
        let input = GridSpec::square(1.0, 64).unwrap();
        let out = GridSpec::square(0.5, 16).unwrap().with_u(2).unwrap();
        let one = SampledField::from_fn(input, |_, _| 1.0);
        let r = apply_t(&one, &Curve::power(2.0), &out, &QuadratureSpec::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn swept_neighborhood_is_averaged_to_one() {
        use crate::sampling::{build_indicator, SetBuilder, Sweep};
        let c = Curve::power(2.0);
        let eps = 0.05;
        let input = GridSpec::new((-2.2, 0.2), (-2.2, 0.2), 768, 768).unwrap();
        let a = build_indicator(
            &SetBuilder::CurveNeighborhood { curve: c.clone(), eps, sweep: Sweep::Swept, sign: -1.0 },
            &input,
        )
        .unwrap();
        let out = GridSpec::square(eps / 2.0, 8).unwrap().with_u(8).unwrap();
        let t = apply_t(&a, &c, &out, &QuadratureSpec::default()).unwrap();
        let min = t.values.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min >= 0.95, "{min}");
    }

    #[test]
    fn tj_constant_and_partition() {
        let (input, out) = setup();
        let c = Curve::power(2.0);
        let q = QuadratureSpec::default();
        let one = SampledField::from_fn(input, |_, _| 1.0);
        let j = -2;
        let t = apply_tj(&one, &c, j, &out, &q).unwrap();
        let oracle = simpson(|s| CutoffBump::psi_j(j, s), 0.125, 0.5, 20_000);
        assert!((oracle - 0.25 * 0.75).abs() < 1e-10);
        assert!(t.values.iter().all(|v| (v - oracle).abs() < 1e-10));

        let f = SampledField::from_fn(input, |x, y| bump(x + 0.3, y + 0.2, 1.5));
        let mut sum = vec![0.0; t.values.len()];
        for j in -12..=0 {
            for (s, v) in sum.iter_mut().zip(apply_tj(&f, &c, j, &out, &q).unwrap().values) {
                *s += v;
            }
        }
        // the pieces telescope to eta(t) - eta(2^13 t): weight 1 on [2^-12, 1]
        // plus a transition on [2^-13, 2^-12]
        let plane = out.plane_len();
        for (i, s) in sum.iter().enumerate() {
            let (iu, r) = (i / plane, i % plane);
            let (x1, x2, u) = (out.x1(r % out.n1), out.x2(r / out.n1), out.u(iu));
            let g = |t: f64| f.interpolate(x1 - u * t, x2 - u * t * t);
            let lo = 2f64.powi(-12);
            let direct = simpson(g, lo, 1.0, 40_000)
                + simpson(|t| (1.0 - CutoffBump::eta(t * 8192.0)) * g(t), 0.5 * lo, lo, 2_000);
            assert!((s - direct).abs() < 1e-6 * direct.abs().max(1e-3), "{s} vs {direct}");
        }
    }

    #[test]
    fn tj_linear_in_second_coordinate() {
        let (input, out) = setup();
        let c = Curve::power(2.0);
        let f = SampledField::from_fn(input, |_, y| y);
        let t = apply_tj(&f, &c, 0, &out, &QuadratureSpec::default()).unwrap();
        // T_j keeps the t <= 1 restriction of T
        let i0 = simpson(CutoffBump::psi, 0.5, 1.0, 20_000);
        let i2 = simpson(|s| s * s * CutoffBump::psi(s), 0.5, 1.0, 20_000);
        let plane = out.plane_len();
        for (i, v) in t.values.iter().enumerate() {
            let (iu, r) = (i / plane, i % plane);
            let expect = out.x2(r / out.n1) * i0 - out.u(iu) * i2;
            assert!((v - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn ttilde_parabola_is_scale_free() {
        let input = GridSpec::square(8.0, 320).unwrap();
        let out = GridSpec::square(0.5, 16).unwrap();
        let f = SampledField::from_fn(input, |x, y| bump(x + 1.5, y + 3.0, 3.0));
        let q = QuadratureSpec::default();
        let c = Curve::power(2.0);
        let a = apply_ttilde(&f, &c, -1, 1.5, &out, &q).unwrap();
        for j in [-2, -5, -9] {
            let b = apply_ttilde(&f, &c, j, 1.5, &out, &q).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
            }
        }
        let one = SampledField::from_fn(input, |_, _| 1.0);
        let t1 = apply_ttilde(&one, &c, -3, 1.0, &out, &q).unwrap();
        assert!(t1.values.iter().all(|v| (v - 0.75).abs() < 1e-9));
    }

    #[test]
    fn rescaling_identity() {
        let c = Curve::polynomial(&[0.0, 0.0, 1.0, 1.0]);
        let j = -3;
        let q = QuadratureSpec::default();
        let input = GridSpec::square(0.5, 1024).unwrap();
        let f = SampledField::from_fn(input, |x, y| bump(x - 0.05, y - 0.01, 0.3));
        let out = GridSpec::square(0.1, 16).unwrap().with_u_range(1.25, 1.75, 2).unwrap();
        let lhs = dilate_mixed(&apply_tj(&f, &c, j, &out, &q).unwrap(), &c, j).unwrap();
        let df = dilate(&f, &c, j).unwrap();
        let s = (j as f64).exp2();
        let mut worst = 0.0f64;
        let max = lhs.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for iu in 0..2 {
            let u = lhs.spec.u(iu);
            let rhs = apply_ttilde(&df, &c, j, u, &lhs.spec.plane(), &q).unwrap();
            for (a, b) in lhs.slice(iu).values.iter().zip(&rhs.values) {
                worst = worst.max((a - s * b).abs() / max);
            }
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn dilation_examples() {
        let c = Curve::power(2.0);
        let spec = GridSpec::new((-0.5, 1.5), (-0.5, 1.5), 64, 64).unwrap();
        let f = SampledField::from_fn(spec, |x, y| if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) { 1.0 } else { 0.0 });
        let d = dilate(&f, &c, -1).unwrap();
        assert_eq!(d.spec.x1_range, (-1.0, 3.0));
        assert_eq!(d.spec.x2_range, (-2.0, 6.0));
        assert!((d.integral() - 8.0).abs() < 1e-12);
        let lhs = (0.5f64 * 0.25).powf(0.5) * crate::sampling::lp_norm(&d, 2.0).unwrap();
        let rhs = crate::sampling::lp_norm(&f, 2.0).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
        assert!((rhs - 1.0).abs() < 1e-12);
        let id = dilate(&f, &c, 0).unwrap();
        assert_eq!(id, f);
    }

    #[test]
    fn adjoint_constant_and_duality() {
        let c = Curve::power(2.0);
        let q = QuadratureSpec { nodes: 128, ..Default::default() };
        let gspec = GridSpec::square(3.0, 96).unwrap().with_u(16).unwrap();
        let one = MixedField::from_fn(gspec, |_, _, _| 1.0).unwrap();
        let out = GridSpec::square(0.5, 8).unwrap();
        let a = apply_adjoint(&one, &c, &out, &q).unwrap();
        assert!(a.values.iter().all(|v| (v - 1.0).abs() < 1e-10));

        // <Tf, g> = <f, T* g> with compactly supported smooth f and g
        let fs = GridSpec::square(3.0, 96).unwrap();
        let f = SampledField::from_fn(fs, |x, y| bump(x - 0.2, y + 0.1, 0.9));
        let g = MixedField::from_fn(gspec, |x, y, u| bump(x - 1.2, y - 0.6, 1.1) * (1.0 + 0.3 * u)).unwrap();
        let tf = apply_t(&f, &c, &gspec, &q).unwrap();
        let lhs: f64 = tf.values.iter().zip(&g.values).map(|(a, b)| a * b).sum::<f64>()
            * gspec.cell_area()
            * gspec.hu();
        let tg = apply_adjoint(&g, &c, &fs, &q).unwrap();
        let rhs: f64 = f.values.iter().zip(&tg.values).map(|(a, b)| a * b).sum::<f64>() * fs.cell_area();
        assert!((lhs - rhs).abs() < 1e-3 * lhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn adjoint_of_slab_is_large_on_reflected_curve() {
        use crate::sampling::{build_slab, SetBuilder};
        let c = Curve::power(2.0);
        let (eps, delta) = (0.1, 1.0);
        let gspec = GridSpec::new((-0.3, 0.3), (-0.3, 0.3), 120, 120).unwrap().with_u(60).unwrap();
        let w = build_slab(&SetBuilder::SlabProduct { radius: delta * eps, u_lo: 1.0, u_hi: 1.0 + eps }, &gspec).unwrap();
        let q = QuadratureSpec { nodes: 256, ..Default::default() };
        // points -x with x on the curve, x2 = -gamma(x1)
        let out = GridSpec::new((-1.0, -0.2), (-1.0, 0.0), 16, 16).unwrap();
        let t = apply_adjoint(&w, &c, &out, &q).unwrap();
        let mut min = f64::INFINITY;
        for i1 in 0..out.n1 {
            let x1 = out.x1(i1);
            let i2 = ((-x1 * x1 - out.x2_range.0) / out.h2()) as usize;
            if i2 < out.n2 {
                min = min.min(t.get(i1, i2));
            }
        }
        assert!(min >= 0.5 * eps * eps, "{min}");
    }

    #[test]
    fn scatter_matches_gather() {
        use crate::sampling::{build_indicator, SetBuilder};
        let c = Curve::power(2.0);
        let h = 1.0 / 128.0;
        let input = GridSpec::new((-0.25, 0.25), (-0.25, 0.25), 64, 64).unwrap();
        let f = build_indicator(&SetBuilder::Ball { center: (0.0, 0.0), radius: 0.1 }, &input).unwrap();
        let out = GridSpec::new((-0.5, 1.5), (-0.5, 1.5), 256, 256).unwrap();
        assert!((out.h1() - h).abs() < 1e-15);
        let q = QuadratureSpec::default();
        let a = apply_t_at(&f, &c, 1.3, &out, &q).unwrap();
        let b = apply_t_at_scatter(&f, &c, 1.3, &out, &q).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn structural_properties() {
        let (input, out) = setup();
        let c = Curve::power(1.5);
        let q = QuadratureSpec::default();
        let f = SampledField::from_fn(input, |x, y| bump(x, y, 2.0));
        let g = SampledField::from_fn(input, |x, y| (3.0 * x).sin() * bump(x - 0.5, y, 2.0));
        let comb = SampledField {
            spec: input,
            values: f.values.iter().zip(&g.values).map(|(a, b)| 2.0 * a - 0.7 * b).collect(),
        };
        let (tf, tg, tc) = (
            apply_t(&f, &c, &out, &q).unwrap(),
            apply_t(&g, &c, &out, &q).unwrap(),
            apply_t(&comb, &c, &out, &q).unwrap(),
        );
        let fmax = f.values.iter().copied().fold(0.0, f64::max);
        for i in 0..tc.values.len() {
            let lin = 2.0 * tf.values[i] - 0.7 * tg.values[i];
            assert!((tc.values[i] - lin).abs() <= 1e-10 * lin.abs().max(1e-10));
            assert!(tf.values[i] >= 0.0 && tf.values[i] <= fmax * (1.0 + 1e-12));
        }
        // one-cell shift of the input shifts the output by one cell
        let shifted = SampledField::from_fn(input, |x, y| bump(x - input.h1(), y, 2.0));
        let ts = apply_t(&shifted, &c, &out, &q).unwrap();
        let out_shift = GridSpec { x1_range: (out.x1_range.0 + input.h1(), out.x1_range.1 + input.h1()), ..out };
        let tsr = apply_t(&shifted, &c, &out_shift, &q).unwrap();
        assert!(tsr.values.iter().zip(&tf.values).all(|(a, b)| (a - b).abs() < 1e-13));
        assert_ne!(ts.values, tf.values);
    }

    #[test]
    fn quadrature_converges() {
        let (input, out) = setup();
        let c = Curve::power(2.0);
        let f = SampledField::from_fn(input, |x, y| bump(x - 0.3, y + 0.4, 2.5));
        let a = apply_t(&f, &c, &out, &QuadratureSpec { nodes: 512, ..Default::default() }).unwrap();
        let b = apply_t(&f, &c, &out, &QuadratureSpec { nodes: 1024, ..Default::default() }).unwrap();
        let max = a.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-6 * max);
        }
    }
}
