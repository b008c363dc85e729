//! Plane curve families `t -> (t, gamma(t))` on `(0, end]`.
//!
//! Every family is described through `ln|gamma|` as a Taylor jet, which keeps
//! derivative ratios such as `t^k gamma^(k) / gamma` accurate down to
//! `t = 2^-40` and lets infinitely flat curves like `exp(-a/t)` be sampled
//! without underflow.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{Jet, JET_ORDER};
use crate::pq_geometry::{ExponentPair, Omega};

/// Default number of derivatives constrained by the upper curvature condition.
pub const DEFAULT_N: usize = 6;
/// Default number of geometric sample points for the condition constants.
pub const DEFAULT_SAMPLES: usize = 512;
/// Smallest sampled parameter, `2^-40`.
pub const T_FLOOR_LOG2: i32 = -40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedCurve {
    /// `1 - sqrt(1 - t^2)`
    OneMinusSqrt,
    /// `t sin t`
    TSinT,
    /// `t - sin t`
    TMinusSinT,
    /// `1 - cos t`
    OneMinusCos,
    /// `e^t - t - 1`
    ExpMinusLinear,
}

impl NamedCurve {
    pub const ALL: [NamedCurve; 5] = [
        NamedCurve::OneMinusSqrt,
        NamedCurve::TSinT,
        NamedCurve::TMinusSinT,
        NamedCurve::OneMinusCos,
        NamedCurve::ExpMinusLinear,
    ];

    pub fn label(self) -> &'static str {
        match self {
            NamedCurve::OneMinusSqrt => "one_minus_sqrt",
            NamedCurve::TSinT => "t_sin_t",
            NamedCurve::TMinusSinT => "t_minus_sin_t",
            NamedCurve::OneMinusCos => "one_minus_cos",
            NamedCurve::ExpMinusLinear => "exp_minus_linear",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        NamedCurve::ALL.into_iter().find(|n| n.label() == s)
    }

    fn omega(self) -> f64 {
        match self {
            NamedCurve::TMinusSinT => 3.0,
            _ => 2.0,
        }
    }

    /// `gamma'` blows up at `t = 1` for the circle arc, so it is cut off at 1/2.
    fn default_end(self) -> f64 {
        match self {
            NamedCurve::OneMinusSqrt => 0.5,
            _ => 1.0,
        }
    }

    /// `gamma(t) / t^m` as an ascending power series, with `m` the order of
    /// vanishing at 0. Used for the families whose closed forms cancel badly
    /// for small `t`.
    fn series(self) -> Option<(usize, Vec<f64>)> {
        const TERMS: usize = 26;
        let mut c = vec![0.0; TERMS];
        match self {
            NamedCurve::TMinusSinT => {
                // t - sin t = sum_{k>=0} (-1)^k t^{2k+3} / (2k+3)!
                for k in 0..TERMS / 2 {
                    c[2 * k] = sign(k) / crate::jet::factorial(2 * k + 3);
                }
                Some((3, c))
            }
            NamedCurve::OneMinusCos => {
                for k in 0..TERMS / 2 {
                    c[2 * k] = sign(k) / crate::jet::factorial(2 * k + 2);
                }
                Some((2, c))
            }
            NamedCurve::ExpMinusLinear => {
                for (k, v) in c.iter_mut().enumerate() {
                    *v = 1.0 / crate::jet::factorial(k + 2);
                }
                Some((2, c))
            }
            _ => None,
        }
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveKind {
    /// `t^d`
    Power { d: f64 },
    /// `t^(d-1) ln(1+t)`
    PowerLog { d: f64 },
    /// Ascending coefficients.
    Polynomial { coeffs: Vec<f64> },
    /// `sum beta_i t^alpha_i`, stored as `(beta, alpha)` pairs.
    PowerSum { pairs: Vec<(f64, f64)> },
    Named { name: NamedCurve },
    /// `exp(-a/t)`
    FlatExp { a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub kind: CurveKind,
    /// Right end of the parameter domain `(0, end]`.
    pub end: f64,
    pub max_deriv_order: usize,
    pub monotone_increasing: bool,
}

impl Curve {
    pub fn new(kind: CurveKind) -> Result<Self> {
        let end = match &kind {
            CurveKind::Named { name } => name.default_end(),
            _ => 1.0,
        };
        Self::with_end(kind, end)
    }

    pub fn with_end(kind: CurveKind, end: f64) -> Result<Self> {
        validate_kind(&kind)?;
        if !(end > 0.0 && end <= 1.0) {
            return Err(Error::InvalidCurve(format!("domain end {end} not in (0, 1]")));
        }
        let mut curve = Curve {
            kind,
            end,
            max_deriv_order: JET_ORDER,
            monotone_increasing: true,
        };
        curve.monotone_increasing = curve.sampled_monotonicity()? == Some(true);
        Ok(curve)
    }

    pub fn power(d: f64) -> Self {
        Self::new(CurveKind::Power { d }).expect("valid power exponent")
    }

    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::new(CurveKind::Polynomial { coeffs: coeffs.to_vec() }).expect("valid polynomial")
    }

    /// `Some(true)` increasing, `Some(false)` decreasing, `None` if the sign of
    /// `gamma'` changes on the sample grid.
    fn sampled_monotonicity(&self) -> Result<Option<bool>> {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for t in geometric_grid(self.end, 256) {
            let (s, jet) = self.log_abs_jet(Jet::variable(t, 1.0))?;
            // d/dt gamma = sign * gamma_abs * (ln|gamma|)'
            let d = s * jet.coeff(1);
            if d > 0.0 {
                pos += 1;
            } else if d < 0.0 {
                neg += 1;
            }
        }
        Ok(match (pos, neg) {
            (_, 0) if pos > 0 => Some(true),
            (0, _) if neg > 0 => Some(false),
            _ => None,
        })
    }

    pub fn is_monotone(&self) -> bool {
        matches!(self.sampled_monotonicity(), Ok(Some(_)))
    }

    /// Sign of `gamma` and the jet of `ln|gamma(x)|` for an argument jet `x`.
    pub(crate) fn log_abs_jet(&self, x: Jet) -> Result<(f64, Jet)> {
        let lx = x.ln();
        let (sign, jet) = match &self.kind {
            CurveKind::Power { d } => (1.0, lx.scale(*d)),
            CurveKind::PowerLog { d } => (1.0, lx.scale(*d) + ln_log1p_over_x(x)),
            CurveKind::Polynomial { coeffs } => {
                let m = coeffs.iter().position(|&c| c != 0.0).unwrap_or(0);
                signed_log(lx.scale(m as f64), x.poly(&coeffs[m..]))
            }
            CurveKind::PowerSum { pairs } => {
                let amin = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                let mut q = Jet::constant(0.0);
                for &(beta, alpha) in pairs {
                    let e = alpha - amin;
                    q = q + if e == 0.0 { Jet::constant(beta) } else { x.powf(e).scale(beta) };
                }
                signed_log(lx.scale(amin), q)
            }
            CurveKind::Named { name } => match name.series() {
                Some((m, coeffs)) => signed_log(lx.scale(m as f64), x.poly(&coeffs)),
                None => match name {
                    NamedCurve::OneMinusSqrt => {
                        // t^2 / (1 + sqrt(1 - t^2))
                        let one_minus = (x * x).scale(-1.0).add_const(1.0);
                        let denom = one_minus.powf(0.5).add_const(1.0);
                        (1.0, lx.scale(2.0) - denom.ln())
                    }
                    NamedCurve::TSinT => (1.0, lx + x.sin_cos().0.ln()),
                    _ => unreachable!("series-backed curves handled above"),
                },
            },
            CurveKind::FlatExp { a } => (1.0, x.recip().scale(-a)),
        };
        if !jet.value().is_finite() {
            return Err(Error::InvalidCurve(format!(
                "ln|gamma| is not finite at t = {}",
                x.value()
            )));
        }
        Ok((sign, jet))
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t > 0.0 && t <= self.end {
            Ok(())
        } else {
            Err(Error::Domain(format!("t = {t} outside (0, {}]", self.end)))
        }
    }

    /// `gamma^(order)(t)`.
    pub fn eval(&self, t: f64, order: usize) -> Result<f64> {
        if order > self.max_deriv_order {
            return Err(Error::UnsupportedOrder { order, max: self.max_deriv_order });
        }
        self.check_domain(t)?;
        let (s, lj) = self.log_abs_jet(Jet::variable(t, 1.0))?;
        Ok(s * lj.exp().derivative(order))
    }

    /// `ln|gamma(t)|`.
    pub fn ln_abs(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.log_abs_jet(Jet::variable(t, 1.0))?.1.value())
    }

    /// `t^k gamma^(k)(t) / gamma(t)` for `k = 0..=JET_ORDER`.
    pub fn derivative_ratios(&self, t: f64) -> Result<[f64; JET_ORDER + 1]> {
        self.check_domain(t)?;
        let (_, lj) = self.log_abs_jet(Jet::variable(t, 1.0))?;
        let normalized = lj.add_const(-lj.value()).exp();
        let mut out = [0.0; JET_ORDER + 1];
        let mut tk = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            *o = tk * normalized.derivative(k);
            tk *= t;
        }
        Ok(out)
    }

    /// Flatness exponent at the origin.
    pub fn omega(&self) -> Result<OmegaEstimate> {
        let analytic = match &self.kind {
            CurveKind::Power { d } | CurveKind::PowerLog { d } => Some(*d),
            CurveKind::Polynomial { coeffs } => {
                Some(coeffs.iter().position(|&c| c != 0.0).unwrap_or(0) as f64)
            }
            CurveKind::PowerSum { pairs } => {
                Some(pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min))
            }
            CurveKind::Named { name } => Some(name.omega()),
            CurveKind::FlatExp { .. } => None,
        };
        match analytic {
            Some(w) if w <= 0.0 => Err(Error::InvalidCurve(
                "gamma does not vanish at the origin".to_string(),
            )),
            Some(w) => Ok(OmegaEstimate { value: Omega::Finite(w), analytic: true, samples: vec![] }),
            None => self.omega_sampled(),
        }
    }

    /// Geometric-sampling estimate: max of `ln|gamma(t_k)| / ln t_k` over
    /// `t_k = 2^-k`, `k = 20..=50`. Declared infinite when the ratio exceeds
    /// `1e3` and is still increasing at the finest scale.
    pub fn omega_sampled(&self) -> Result<OmegaEstimate> {
        let mut samples = Vec::with_capacity(31);
        for k in 20..=50 {
            let t = (-(k as f64)).exp2();
            if t > self.end {
                continue;
            }
            samples.push((t, self.ln_abs(t)? / t.ln()));
        }
        let first = self.ln_abs(samples[0].0)?;
        let last = self.ln_abs(samples[samples.len() - 1].0)?;
        if !(last < first) || samples.iter().any(|s| s.1 <= 0.0) {
            return Err(Error::InvalidCurve("gamma does not vanish at the origin".to_string()));
        }
        let max = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let n = samples.len();
        let increasing = samples[n - 1].1 > samples[n - 2].1;
        let value = if max > 1e3 && increasing { Omega::Infinite } else { Omega::Finite(max) };
        Ok(OmegaEstimate { value, analytic: false, samples })
    }

    /// Right end of the range where the family formula is still a smooth
    /// monotone continuation: 2 for every family except the circle arc,
    /// whose derivative blows up at 1.
    pub fn natural_end(&self) -> f64 {
        match self.kind {
            CurveKind::Named { name: NamedCurve::OneMinusSqrt } => self.end,
            _ => self.end.max(2.0),
        }
    }

    pub fn rescale(&self, j: i32) -> Result<RescaledCurve> {
        if j > 0 {
            return Err(Error::Precondition(format!("rescaling index j = {j} must be <= 0")));
        }
        let scale = (j as f64).exp2();
        let (_, lj) = self.log_abs_jet(Jet::variable(scale, 1.0))?;
        Ok(RescaledCurve { base: self.clone(), j, scale, ln_norm: lj.value() })
    }

    /// Canonical `key=value` description, parseable by [`FromStr`].
    pub fn spec_string(&self) -> String {
        self.to_string()
    }
}

fn signed_log(prefix: Jet, q: Jet) -> (f64, Jet) {
    let s = if q.value() < 0.0 { -1.0 } else { 1.0 };
    (s, prefix + q.scale(s).ln())
}

/// `ln( ln(1+x) / x )`, accurate for small `x`.
fn ln_log1p_over_x(x: Jet) -> Jet {
    let ratio = if x.value() < 0.5 {
        // sum (-1)^k x^k / (k+1)
        let coeffs: Vec<f64> = (0..64).map(|k| sign(k) / (k as f64 + 1.0)).collect();
        x.poly(&coeffs)
    } else {
        x.add_const(1.0).ln() * x.recip()
    };
    ratio.ln()
}

fn validate_kind(kind: &CurveKind) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidCurve(m.to_string()));
    match kind {
        CurveKind::Power { d } if !(*d > 0.0 && d.is_finite()) => bad("power exponent must be > 0"),
        CurveKind::PowerLog { d } if !(*d > 1.0 && d.is_finite()) => {
            bad("power_log exponent must be > 1")
        }
        CurveKind::Polynomial { coeffs } if coeffs.iter().all(|&c| c == 0.0) => {
            bad("polynomial needs a nonzero coefficient")
        }
        CurveKind::PowerSum { pairs }
            if pairs.is_empty() || pairs.iter().any(|p| !(p.1 > 0.0) || p.0 == 0.0) =>
        {
            bad("power_sum needs nonzero betas and positive exponents")
        }
        CurveKind::FlatExp { a } if !(*a > 0.0) => bad("flat_exp needs a > 0"),
        _ => Ok(()),
    }
}

/// `n` geometric points from `2^-40` to `end` inclusive.
pub fn geometric_grid(end: f64, n: usize) -> Vec<f64> {
    let lo = (T_FLOOR_LOG2 as f64) * std::f64::consts::LN_2;
    let hi = end.ln();
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .map(|t| t.min(end))
        .collect()
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        match &self.kind {
            CurveKind::Power { d } => write!(f, "kind=power d={d}")?,
            CurveKind::PowerLog { d } => write!(f, "kind=power_log d={d}")?,
            CurveKind::Polynomial { coeffs } => write!(f, "kind=polynomial coeffs={}", join(coeffs))?,
            CurveKind::PowerSum { pairs } => {
                let p: Vec<String> = pairs.iter().map(|(b, a)| format!("{b}:{a}")).collect();
                write!(f, "kind=power_sum pairs={}", p.join(","))?
            }
            CurveKind::Named { name } => write!(f, "kind=named name={}", name.label())?,
            CurveKind::FlatExp { a } => write!(f, "kind=flat_exp a={a}")?,
        }
        let default_end = match &self.kind {
            CurveKind::Named { name } => name.default_end(),
            _ => 1.0,
        };
        if self.end != default_end {
            write!(f, " end={}", self.end)?;
        }
        Ok(())
    }
}

impl FromStr for Curve {
    type Err = Error;

    /// Parses `kind=power d=2`, `kind=polynomial coeffs=0,0,1,1`,
    /// `kind=power_sum pairs=1:2,0.5:3`, `kind=named name=t_sin_t`,
    /// `kind=flat_exp a=1`, each with an optional `end=<t>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut fields = std::collections::BTreeMap::new();
        for tok in s.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{tok}'")))?;
            if fields.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Parse(format!("duplicate key '{k}'")));
            }
        }
        let num = |key: &str, fields: &std::collections::BTreeMap<String, String>| -> Result<f64> {
            let v = fields.get(key).ok_or_else(|| Error::Parse(format!("missing '{key}'")))?;
            v.parse::<f64>().map_err(|_| Error::Parse(format!("bad number for '{key}': '{v}'")))
        };
        let list = |v: &str| -> Result<Vec<f64>> {
            v.split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{c}'"))))
                .collect()
        };
        let kind_name = fields.get("kind").ok_or_else(|| Error::Parse("missing 'kind'".into()))?;
        let (kind, allowed): (CurveKind, &[&str]) = match kind_name.as_str() {
            "power" => (CurveKind::Power { d: num("d", &fields)? }, &["d"]),
            "power_log" => (CurveKind::PowerLog { d: num("d", &fields)? }, &["d"]),
            "polynomial" => {
                let v = fields.get("coeffs").ok_or_else(|| Error::Parse("missing 'coeffs'".into()))?;
                (CurveKind::Polynomial { coeffs: list(v)? }, &["coeffs"])
            }
            "power_sum" => {
                let v = fields.get("pairs").ok_or_else(|| Error::Parse("missing 'pairs'".into()))?;
                let pairs = v
                    .split(',')
                    .map(|p| {
                        let (b, a) = p
                            .split_once(':')
                            .ok_or_else(|| Error::Parse(format!("pair '{p}' is not beta:alpha")))?;
                        let b = b.parse::<f64>().map_err(|_| Error::Parse(format!("bad beta '{b}'")))?;
                        let a = a.parse::<f64>().map_err(|_| Error::Parse(format!("bad alpha '{a}'")))?;
                        Ok((b, a))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (CurveKind::PowerSum { pairs }, &["pairs"])
            }
            "named" => {
                let v = fields.get("name").ok_or_else(|| Error::Parse("missing 'name'".into()))?;
                let name = NamedCurve::from_label(v)
                    .ok_or_else(|| Error::Parse(format!("unknown named curve '{v}'")))?;
                (CurveKind::Named { name }, &["name"])
            }
            "flat_exp" => (CurveKind::FlatExp { a: num("a", &fields)? }, &["a"]),
            other => return Err(Error::Parse(format!("unknown curve kind '{other}'"))),
        };
        if let Some(k) = fields
            .keys()
            .find(|k| k.as_str() != "kind" && k.as_str() != "end" && !allowed.contains(&k.as_str()))
        {
            return Err(Error::Parse(format!("unexpected key '{k}' for kind {kind_name}")));
        }
        let curve = match fields.get("end") {
            Some(_) => Curve::with_end(kind, num("end", &fields)?),
            None => Curve::new(kind),
        };
        curve.map_err(|e| match e {
            Error::InvalidCurve(m) => Error::Parse(m),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaEstimate {
    pub value: Omega,
    pub analytic: bool,
    /// `(t_k, ln|gamma(t_k)| / ln t_k)` for sampled estimates.
    pub samples: Vec<(f64, f64)>,
}

/// `Gamma_j(t) = gamma(2^j t) / gamma(2^j)`.
#[derive(Debug, Clone)]
pub struct RescaledCurve {
    base: Curve,
    j: i32,
    scale: f64,
    ln_norm: f64,
}

impl RescaledCurve {
    pub fn j(&self) -> i32 {
        self.j
    }

    pub fn base(&self) -> &Curve {
        &self.base
    }

    /// Largest admissible parameter, `end * 2^-j`.
    pub fn t_max(&self) -> f64 {
        self.base.end / self.scale
    }

    /// Largest parameter reachable through the analytic continuation of the
    /// family formula, `natural_end * 2^-j`.
    pub fn t_max_extended(&self) -> f64 {
        self.base.natural_end() / self.scale
    }

    /// Jet of `Gamma_j` around `t`, on `(0, t_max_extended]`.
    pub fn jet(&self, t: f64) -> Result<Jet> {
        let hi = self.t_max_extended();
        if !(t > 0.0 && t <= hi * (1.0 + 1e-15)) {
            return Err(Error::Domain(format!("t = {t} outside (0, {hi}]")));
        }
        let (_, lj) = self.base.log_abs_jet(Jet::variable(self.scale * t, self.scale))?;
        Ok(lj.add_const(-self.ln_norm).exp())
    }

    /// `Gamma_j^(k)(t) = 2^{jk} gamma^(k)(2^j t) / gamma(2^j)`.
    pub fn eval(&self, t: f64, k: usize) -> Result<f64> {
        if k > self.base.max_deriv_order {
            return Err(Error::UnsupportedOrder { order: k, max: self.base.max_deriv_order });
        }
        Ok(self.jet(t)?.derivative(k))
    }

    /// Solves `Gamma_j'(t) = y` on `[lo, hi]` by bisection; `Gamma_j'` must be
    /// strictly monotone there.
    pub fn inverse_derivative(&self, y: f64, lo: f64, hi: f64) -> Result<f64> {
        let f = |t: f64| self.eval(t, 1).map(|v| v - y);
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (f(a)?, f(b)?);
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.signum() == fb.signum() {
            return Err(Error::NotAdmissible(format!(
                "no root of Gamma_j' = {y} in [{lo}, {hi}]"
            )));
        }
        let increasing = fb > fa;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = f(m)?;
            if (fm < 0.0) == increasing {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub samples: usize,
    /// `C_1^(1)`, `C_1^(2)`: sampled infima of `|t^j gamma^(j) / gamma|`.
    pub lower_constants: [f64; 2],
    /// `C_2^(j)` for `j = 1..=n`: sampled suprema.
    pub upper_constants: Vec<f64>,
    /// Sampled `(min, max)` of `gamma(2t) / gamma(t)`.
    pub doubling: (f64, f64),
    pub monotone: bool,
    pub violations: Vec<String>,
    pub pass: bool,
}

impl ConditionReport {
    pub fn c1(&self, j: usize) -> f64 {
        self.lower_constants[j - 1]
    }

    pub fn c2(&self, j: usize) -> f64 {
        self.upper_constants[j - 1]
    }
}

/// `vals` ordered from the smallest sampled `t` upwards.
fn diverges_at_origin(vals: &[f64]) -> bool {
    let q = (vals.len() / 4).max(1);
    let bottom = vals[..q].iter().copied().fold(0.0, f64::max);
    let next = vals[q..2 * q].iter().copied().fold(0.0, f64::max);
    !bottom.is_finite() || bottom > 1e8 || bottom > 4.0 * next
}

fn vanishes_at_origin(vals: &[f64]) -> bool {
    let q = (vals.len() / 4).max(1);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let bottom = vals[..q].iter().copied().fold(f64::INFINITY, f64::min);
    let next = vals[q..2 * q].iter().copied().fold(f64::INFINITY, f64::min);
    !(min > 1e-8) || bottom < 0.25 * next
}

/// Samples the curvature conditions on a geometric grid down to `2^-40`.
pub fn check_conditions(curve: &Curve, n: usize, samples: usize) -> Result<ConditionReport> {
    if samples < 64 {
        return Err(Error::Precondition(format!("samples = {samples} < 64")));
    }
    if n < 2 || n > curve.max_deriv_order {
        return Err(Error::UnsupportedOrder { order: n, max: curve.max_deriv_order });
    }
    let grid = geometric_grid(curve.end, samples);
    let mut ratios = vec![Vec::with_capacity(samples); n + 1];
    for &t in &grid {
        let r = curve.derivative_ratios(t)?;
        for (j, col) in ratios.iter_mut().enumerate().skip(1) {
            col.push(r[j].abs());
        }
    }
    let mut violations = Vec::new();
    let mut lower = [0.0; 2];
    for j in 1..=2 {
        let col = &ratios[j];
        lower[j - 1] = col.iter().copied().fold(f64::INFINITY, f64::min);
        if vanishes_at_origin(col) {
            violations.push(format!("(i) j={j}: |t^{j} gamma^({j})/gamma| not bounded below"));
        }
    }
    let mut upper = Vec::with_capacity(n);
    for (j, col) in ratios.iter().enumerate().skip(1) {
        upper.push(col.iter().copied().fold(0.0, f64::max));
        if diverges_at_origin(col) {
            violations.push(format!("(ii) j={j}: |t^{j} gamma^({j})/gamma| not bounded above"));
        }
    }
    let mut dmin = f64::INFINITY;
    let mut dmax = 0.0f64;
    for &t in grid.iter().filter(|&&t| 2.0 * t <= curve.end) {
        let r = (curve.ln_abs(2.0 * t)? - curve.ln_abs(t)?).exp();
        dmin = dmin.min(r);
        dmax = dmax.max(r);
    }
    let monotone = curve.is_monotone();
    if !monotone {
        violations.push("gamma is not monotone on the sample grid".to_string());
    }
    Ok(ConditionReport {
        n,
        samples,
        lower_constants: lower,
        upper_constants: upper,
        doubling: (dmin, dmax),
        monotone,
        pass: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketItem {
    pub label: String,
    pub pass: bool,
    /// Largest observed `value / bound` (upper) or `bound / value` (lower).
    pub worst_ratio: f64,
    /// Offending `(j, t)` pairs, capped at 16 entries.
    pub violations: Vec<(i32, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma31Report {
    /// Whether the curve satisfies the sampled hypotheses at all.
    pub conditions_pass: bool,
    pub items: Vec<BracketItem>,
    pub pass: bool,
    /// Sweep entries skipped because `[1/2, 2]` leaves the curve domain.
    pub skipped: Vec<i32>,
}

struct Bracket {
    label: &'static str,
    worst: f64,
    violations: Vec<(i32, f64)>,
}

impl Bracket {
    fn new(label: &'static str) -> Self {
        Bracket { label, worst: 0.0, violations: vec![] }
    }

    fn check(&mut self, j: i32, t: f64, value: f64, lo: f64, hi: f64) {
        const SLACK: f64 = 1e-9;
        let mut r = 0.0f64;
        if lo > 0.0 {
            r = r.max(lo / value);
        }
        if hi.is_finite() {
            r = r.max(value / hi);
        }
        if !value.is_finite() {
            r = f64::INFINITY;
        }
        self.worst = self.worst.max(r);
        if r > 1.0 + SLACK && self.violations.len() < 16 {
            self.violations.push((j, t));
        }
    }

    fn finish(self) -> BracketItem {
        BracketItem {
            label: self.label.to_string(),
            pass: self.worst <= 1.0 + 1e-9,
            worst_ratio: self.worst,
            violations: self.violations,
        }
    }
}

/// Checks the uniform bounds on `Gamma_j` and its derivatives on `[1/2, 2]`
/// with constants sampled by [`check_conditions`].
pub fn verify_lemma31(curve: &Curve, j_range: &[i32], t_samples: usize) -> Result<Lemma31Report> {
    let n = DEFAULT_N.min(curve.max_deriv_order);
    let report = check_conditions(curve, n, DEFAULT_SAMPLES)?;
    let c21 = report.c2(1);
    let e = c21.exp();
    let (c11, c12) = (report.c1(1), report.c1(2));
    let mut b1 = Bracket::new("(i) Gamma_j");
    let mut b2 = Bracket::new("(ii) Gamma_j'");
    let mut b3 = Bracket::new("(iii) Gamma_j''");
    let mut b4 = Bracket::new("(iv) Gamma_j^(k), 2<=k<=N");
    let mut b5 = Bracket::new("(v) ((Gamma_j')^-1)^(k), k<=3");
    let mut skipped = vec![];

    // bounds for the inverse of Gamma_j' from (iii) and (iv)
    let m2 = c12 / (4.0 * e);
    let upper = |k: usize| (k as f64).exp2() * e * report.c2(k);
    let inv_bounds = [
        2.0,
        1.0 / m2,
        upper(3) / m2.powi(3),
        (3.0 * upper(3).powi(2) + upper(2) * upper(4)) / m2.powi(5),
    ];

    for &j in j_range {
        let g = curve.rescale(j)?;
        let t_hi = g.t_max().min(2.0);
        if t_hi <= 0.5 {
            skipped.push(j);
            continue;
        }
        let ts: Vec<f64> = (0..t_samples)
            .map(|i| 0.5 + (t_hi - 0.5) * i as f64 / (t_samples - 1).max(1) as f64)
            .collect();
        for &t in &ts {
            let jet = g.jet(t)?;
            b1.check(j, t, jet.value(), (-c21).exp(), e);
            b2.check(j, t, jet.derivative(1).abs(), c11 / (2.0 * e), 2.0 * e * c21);
            b3.check(j, t, jet.derivative(2).abs(), m2, 4.0 * e * report.c2(2));
            for k in 2..=n {
                b4.check(j, t, jet.derivative(k).abs(), 0.0, upper(k));
            }
        }
        // (v): inverse of Gamma_j' by bisection, derivatives by central differences
        let (d_lo, d_hi) = (g.eval(0.5, 1)?, g.eval(t_hi, 1)?);
        if !(d_lo - d_hi).is_finite() || (d_lo - d_hi).abs() < 1e-12 || !(m2 > 0.0) {
            b5.check(j, 0.5, f64::INFINITY, 0.0, 1.0);
            continue;
        }
        let (y_lo, y_hi) = (d_lo.min(d_hi), d_lo.max(d_hi));
        let width = y_hi - y_lo;
        let h = 1e-3 * width;
        let inv = |y: f64| g.inverse_derivative(y, 0.5, t_hi);
        for i in 0..t_samples.min(32) {
            let y = y_lo + width * (0.1 + 0.8 * i as f64 / (t_samples.min(32) - 1).max(1) as f64);
            let v: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0]
                .iter()
                .map(|s| inv(y + s * h))
                .collect::<Result<_>>()?;
            let d1 = (v[3] - v[1]) / (2.0 * h);
            let d2 = (v[3] - 2.0 * v[2] + v[1]) / (h * h);
            let d3 = (v[4] - 2.0 * v[3] + 2.0 * v[1] - v[0]) / (2.0 * h * h * h);
            for (k, d) in [v[2], d1, d2, d3].into_iter().enumerate() {
                // finite differences carry O(h^2) error
                b5.check(j, y, d.abs(), 0.0, inv_bounds[k] * 1.05 + 1e-3);
            }
        }
    }
    let items: Vec<BracketItem> = [b1, b2, b3, b4, b5].into_iter().map(Bracket::finish).collect();
    Ok(Lemma31Report {
        conditions_pass: report.pass,
        pass: report.pass && items.iter().all(|i| i.pass),
        items,
        skipped,
    })
}

/// Lower bound of `|phi''|` on `[1/2, 4]` for `phi(t) = u Gamma_j(t/u)`.
pub fn lemma22_curvature_floor(curve: &Curve, j: i32, u: f64, samples: usize) -> Result<f64> {
    let g = curve.rescale(j)?;
    if g.t_max() < 4.0 {
        return Err(Error::Domain(format!("Gamma_{j} is not defined on [1/4, 4]")));
    }
    let mut floor = f64::INFINITY;
    for i in 0..samples {
        let t = 0.5 + 3.5 * i as f64 / (samples - 1).max(1) as f64;
        floor = floor.min((g.eval(t / u, 2)? / u).abs());
    }
    Ok(floor)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SeriesVerdict {
    Convergent { value: f64 },
    Divergent,
}

/// Partial sums of `sum_{j<=0} 2^j |2^j gamma(2^j)|^(1/q - 1/p)` down to
/// `j_min`, with a geometric tail correction when the term ratio settles.
pub fn series_lemma21(curve: &Curve, pair: &ExponentPair, j_min: i32) -> Result<SeriesVerdict> {
    let e = pair.inv_q_f64() - pair.inv_p_f64();
    if e > 1e-15 {
        return Err(Error::Precondition(format!("1/q - 1/p = {e} > 0")));
    }
    if j_min > -32 {
        return Err(Error::Precondition(format!("j_min = {j_min} must be <= -32")));
    }
    let ln2 = std::f64::consts::LN_2;
    let mut terms = Vec::with_capacity((-j_min) as usize + 1);
    for j in (j_min..=0).rev() {
        let t = (j as f64).exp2();
        let ln_term = j as f64 * ln2 + e * (j as f64 * ln2 + curve.log_abs_jet(Jet::constant(t))?.1.value());
        terms.push(ln_term.exp());
    }
    if terms.iter().any(|t| !t.is_finite()) {
        return Ok(SeriesVerdict::Divergent);
    }
    const WINDOW: usize = 16;
    let n = terms.len();
    let ratios: Vec<f64> = (n - WINDOW..n).map(|i| terms[i] / terms[i - 1]).collect();
    let rmax = ratios.iter().copied().fold(0.0, f64::max);
    if !(rmax < 1.0 - 1e-3) {
        return Ok(SeriesVerdict::Divergent);
    }
    // sum smallest-first
    let partial: f64 = terms.iter().rev().sum();
    let r = ratios[WINDOW - 1];
    Ok(SeriesVerdict::Convergent { value: partial + terms[n - 1] * r / (1.0 - r) })
}
