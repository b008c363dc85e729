//! Extremizer families, scaling experiments over `eps`, log-log fits and
//! consistency verdicts.

mod exact;

use rayon::prelude::*;
use serde::Serialize;

use crate::averaging::{apply_t_at_scatter, QuadratureSpec, Rule};
use crate::curves::{Curve, CurveKind};
use crate::fit::loglog;
use crate::pq_geometry::{necessary_region_contains, predicted_exponent, ExponentPair, FamilyKind};
use crate::sampling::{build_indicator, build_slab, lp_norm, GridSpec, MixedField, SampledField, SetBuilder, Sweep};
use crate::{Error, Result};

pub use exact::ExactResolution;
use exact::{adjoint_norm, forward_norm, Shape, Track};

pub const DEFAULT_DELTA: f64 = 0.125;
pub const DEFAULT_TOLERANCE: f64 = 0.15;
/// Smallest admissible `|gamma'(1) - gamma(1)|` after normalization.
pub const TILT_THRESHOLD: f64 = 1e-6;
pub const MIN_SAMPLES: usize = 4;

#[derive(Debug, Clone)]
pub struct ExtremizerFamily {
    pub kind: FamilyKind,
    /// For `tilted_iv` this is the normalized curve `gamma / gamma(1)`.
    pub curve: Curve,
    pub delta: f64,
}

impl ExtremizerFamily {
    pub fn new(kind: FamilyKind, curve: Curve) -> Result<Self> {
        Self::with_delta(kind, curve, DEFAULT_DELTA)
    }

    pub fn with_delta(kind: FamilyKind, curve: Curve, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Precondition(format!("delta {delta} not in (0, 1)")));
        }
        let curve = if kind == FamilyKind::TiltedIV { normalized_for_tilt(&curve)? } else { curve };
        Ok(ExtremizerFamily { kind, curve, delta })
    }

    /// Default `eps` sequence, strictly decreasing by factors of 2.
    pub fn default_eps(&self) -> Vec<f64> {
        let (hi, lo) = match self.kind {
            FamilyKind::TiltedIV | FamilyKind::Thm3Ball => (5, 9),
            _ => (3, 7),
        };
        (hi..=lo).map(|k| (-(k as f64)).exp2()).collect()
    }

    /// The set whose indicator is the input at scale `eps`.
    pub fn set_builder(&self, eps: f64) -> Result<SetBuilder> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Precondition(format!("eps {eps} not in (0, 1)")));
        }
        Ok(match self.kind {
            FamilyKind::RectI => SetBuilder::s_t(&self.curve, eps)?,
            FamilyKind::BallII => SetBuilder::Ball { center: (0.0, 0.0), radius: self.delta * eps },
            FamilyKind::AdjointIII => SetBuilder::SlabProduct { radius: self.delta * eps, u_lo: 1.0, u_hi: 1.0 + eps },
            FamilyKind::TiltedIV => SetBuilder::TiltedBox { curve: self.curve.clone(), eps },
            FamilyKind::Thm3Ball => {
                SetBuilder::CurveNeighborhood { curve: self.curve.clone(), eps, sweep: Sweep::Single(THM3_U), sign: -1.0 }
            }
        })
    }

    fn shape(&self, eps: f64) -> Result<Shape> {
        Ok(match self.set_builder(eps)? {
            SetBuilder::Rectangle { half_width, half_height } => Shape::Rect { a: half_width, b: half_height },
            SetBuilder::Ball { radius, .. } | SetBuilder::SlabProduct { radius, .. } => Shape::Disk { r: radius },
            SetBuilder::TiltedBox { curve, eps } => {
                let (e1, e2, a, b) = SetBuilder::tilted_frame(&curve, eps)?;
                Shape::Tilted { e1, e2, a, b }
            }
            SetBuilder::CurveNeighborhood { .. } => {
                return Err(Error::Precondition("curve neighborhoods have no exact shape".to_string()))
            }
        })
    }
}

/// `thm3_ball` works at this fixed dilation; the bound it probes is uniform
/// in `u`.
pub const THM3_U: f64 = 1.0;

fn normalized_for_tilt(curve: &Curve) -> Result<Curve> {
    if !curve.monotone_increasing {
        return Err(Error::NotAdmissible("tilted_iv needs an increasing curve".to_string()));
    }
    if curve.end < 1.0 {
        return Err(Error::NotAdmissible("tilted_iv needs the curve on all of (0, 1]".to_string()));
    }
    let g1 = curve.eval(1.0, 0)?;
    let d1 = curve.eval(1.0, 1)? / g1;
    if (d1 - 1.0).abs() <= TILT_THRESHOLD {
        return Err(Error::NotAdmissible(format!("|gamma'(1) - gamma(1)| = {} after normalization", (d1 - 1.0).abs())));
    }
    if (g1 - 1.0).abs() <= 1e-15 {
        return Ok(curve.clone());
    }
    scaled_curve(curve, 1.0 / g1)
}

fn scaled_curve(curve: &Curve, c: f64) -> Result<Curve> {
    let kind = match &curve.kind {
        CurveKind::Power { d } => CurveKind::PowerSum { pairs: vec![(c, *d)] },
        CurveKind::Polynomial { coeffs } => CurveKind::Polynomial { coeffs: coeffs.iter().map(|a| a * c).collect() },
        CurveKind::PowerSum { pairs } => CurveKind::PowerSum { pairs: pairs.iter().map(|&(b, a)| (b * c, a)).collect() },
        _ => {
            return Err(Error::Unsupported(format!(
                "tilted_iv cannot normalize '{curve}'; supply a curve with gamma(1) = 1"
            )))
        }
    };
    Curve::with_end(kind, curve.end)
}

/// Input of an experiment.
#[derive(Debug, Clone)]
pub enum FamilyInput {
    Plane(SampledField),
    Slab(MixedField),
}

/// Grid indicator of the family's set; `spec` needs a `u` range for
/// `adjoint_iii`.
pub fn build_family(family: &ExtremizerFamily, eps: f64, spec: &GridSpec) -> Result<FamilyInput> {
    let b = family.set_builder(eps)?;
    match family.kind {
        FamilyKind::AdjointIII => Ok(FamilyInput::Slab(build_slab(&b, spec)?)),
        _ => Ok(FamilyInput::Plane(build_indicator(&b, spec)?)),
    }
}

/// Resolution of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentResolution {
    pub exact: ExactResolution,
    /// Grid cells per `eps` for the curve-neighborhood family.
    pub cells_per_eps: usize,
    /// Cap on cells per axis of that grid.
    pub max_cells: usize,
}

impl Default for ExperimentResolution {
    fn default() -> Self {
        ExperimentResolution { exact: ExactResolution::default(), cells_per_eps: 4, max_cells: 8192 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub eps: f64,
    pub ratio: f64,
}

/// One entry per `eps`: the ratio, or why it could not be computed.
pub type SampleOutcome = (f64, Result<f64>);

/// `R(eps)` for every `eps`, in order. Per-`eps` failures are returned, not
/// raised.
pub fn run_samples(
    family: &ExtremizerFamily,
    pair: &ExponentPair,
    eps_seq: &[f64],
    res: &ExperimentResolution,
) -> Result<Vec<SampleOutcome>> {
    check_eps_seq(eps_seq)?;
    let track = match family.kind {
        FamilyKind::Thm3Ball => None,
        _ => Some(Track::new(&family.curve)?),
    };
    Ok(eps_seq
        .par_iter()
        .map(|&eps| (eps, ratio_at(family, pair, eps, track.as_ref(), res)))
        .collect())
}

/// Successful samples of [`run_samples`]; fails unless at least
/// [`MIN_SAMPLES`] survive.
pub fn run_experiment(
    family: &ExtremizerFamily,
    pair: &ExponentPair,
    eps_seq: &[f64],
    res: &ExperimentResolution,
) -> Result<Vec<Sample>> {
    let outcomes = run_samples(family, pair, eps_seq, res)?;
    let mut samples = Vec::new();
    let mut reasons = Vec::new();
    for (eps, r) in outcomes {
        match r {
            Ok(ratio) => samples.push(Sample { eps, ratio }),
            Err(e) => reasons.push(format!("eps={eps}: {e}")),
        }
    }
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Resolution(format!(
            "{} of {} samples survived (need {MIN_SAMPLES}): {}",
            samples.len(),
            eps_seq.len(),
            reasons.join("; ")
        )));
    }
    Ok(samples)
}

fn check_eps_seq(eps: &[f64]) -> Result<()> {
    if eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::Precondition("every eps must lie in (0, 1)".to_string()));
    }
    if eps.len() >= 2 {
        let r = eps[1] / eps[0];
        let geometric = eps.windows(2).all(|w| ((w[1] / w[0]) - r).abs() <= 1e-9 * r);
        if !(r < 1.0) || !geometric {
            return Err(Error::Precondition("eps must be a strictly decreasing geometric sequence".to_string()));
        }
    }
    Ok(())
}

fn conjugate(inv: f64) -> f64 {
    // exponent whose reciprocal is 1 - inv
    let c = 1.0 - inv;
    if c <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / c
    }
}

fn exponent(inv: f64) -> f64 {
    if inv <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / inv
    }
}

fn ratio_at(
    family: &ExtremizerFamily,
    pair: &ExponentPair,
    eps: f64,
    track: Option<&Track>,
    res: &ExperimentResolution,
) -> Result<f64> {
    let (p, q) = (exponent(pair.inv_p_f64()), exponent(pair.inv_q_f64()));
    let r = match (family.kind, track) {
        (FamilyKind::Thm3Ball, _) => thm3_ratio(family, eps, p, q, res)?,
        (FamilyKind::AdjointIII, Some(tr)) => {
            let shape = family.shape(eps)?;
            let top = 1.0 + eps;
            let num = adjoint_norm(&shape, top, tr, conjugate(pair.inv_p_f64()), &res.exact)?;
            // ||1_W||_{q'} with |W| = |B| eps
            let inv_qc = 1.0 - pair.inv_q_f64();
            num / (shape.measure() * eps).powf(inv_qc)
        }
        (_, Some(tr)) => {
            let shape = family.shape(eps)?;
            forward_norm(&shape, tr, q, &res.exact)? / shape.measure().powf(pair.inv_p_f64())
        }
        (_, None) => return Err(Error::Internal("missing curve table".to_string())),
    };
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Resolution(format!("ratio {r} at eps = {eps}")));
    }
    Ok(r)
}

/// Square-cell grid with spacing `h` containing `bbox` plus a margin.
fn cell_grid(bbox: [f64; 4], h: f64, max_cells: usize) -> Result<GridSpec> {
    let margin = 4.0 * h;
    let (a1, a2) = (bbox[0] - margin, bbox[2] - margin);
    let n1 = ((bbox[1] + margin - a1) / h).ceil() as usize;
    let n2 = ((bbox[3] + margin - a2) / h).ceil() as usize;
    if n1.max(n2) > max_cells {
        return Err(Error::Resolution(format!("grid of {n1}x{n2} cells exceeds {max_cells} per axis")));
    }
    GridSpec::new((a1, a1 + n1 as f64 * h), (a2, a2 + n2 as f64 * h), n1, n2)
}

/// `||T_u 1_A||_{L^q_x} / ||1_A||_{L^p}` at `u = THM3_U`, on a grid with
/// `cells_per_eps` cells per `eps`.
fn thm3_ratio(family: &ExtremizerFamily, eps: f64, p: f64, q: f64, res: &ExperimentResolution) -> Result<f64> {
    let h = eps / res.cells_per_eps.max(2) as f64;
    let builder = family.set_builder(eps)?;
    let bbox = builder.bounding_box()?;
    let input = cell_grid(bbox, h, res.max_cells)?;
    let f = build_indicator(&builder, &input)?;
    // image of A under x -> x + u c(t)
    let curve = &family.curve;
    let t_end = curve.end.min(1.0);
    let g = curve.eval(t_end, 0)?;
    let reach = [THM3_U * t_end.min(0.0), THM3_U * t_end, THM3_U * g.min(0.0), THM3_U * g.max(0.0)];
    let out_box = [bbox[0] + reach[0], bbox[1] + reach[1], bbox[2] + reach[2], bbox[3] + reach[3]];
    let out = cell_grid(out_box, h, res.max_cells)?;
    let len = t_end + g.abs();
    let nodes = ((2.0 * len / h).ceil() as usize).max(512);
    let quad = QuadratureSpec::new(Rule::Simpson, nodes + nodes % 2)?;
    let tf = apply_t_at_scatter(&f, curve, THM3_U, &out, &quad)?;
    Ok(lp_norm(&tf, q)? / lp_norm(&f, p)?)
}

/// Log-log fit of `R` against `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub samples: Vec<Sample>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub predicted: f64,
    pub tolerance: f64,
    /// `|slope - predicted| <= tolerance`.
    pub consistent: bool,
}

/// Ordinary least squares on `(ln eps, ln R)`.
pub fn fit_exponent(samples: &[Sample], predicted: f64, tolerance: f64) -> Result<ScalingFit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!("{} samples, need {MIN_SAMPLES}", samples.len())));
    }
    let eps: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    check_eps_seq(&eps)?;
    let ratio: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    let f = loglog(&eps, &ratio)?;
    Ok(ScalingFit {
        samples: samples.to_vec(),
        slope: f.slope,
        intercept: f.intercept,
        stderr: f.stderr,
        predicted,
        tolerance,
        consistent: (f.slope - predicted).abs() <= tolerance,
    })
}

/// The family's necessary condition, named as in
/// [`necessary_region_contains`]; `thm3_ball` probes `1/q >= 1/(2p)`.
pub fn family_condition(kind: FamilyKind) -> &'static str {
    match kind {
        FamilyKind::RectI => "(i)",
        FamilyKind::BallII => "(ii)",
        FamilyKind::AdjointIII => "(iii)",
        FamilyKind::TiltedIV => "(iv)",
        FamilyKind::Thm3Ball => "1/q >= 1/(2p)",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub family: FamilyKind,
    pub predicted: f64,
    pub slope: f64,
    /// The pair satisfies the family's necessary condition.
    pub condition_holds: bool,
    pub in_theorem1: bool,
    /// Blow-up (`slope <= min(-tolerance, predicted / 2)`) when the condition
    /// fails; `slope >= -tolerance` inside the sufficient region.
    pub sign_ok: bool,
    /// `|slope - predicted| <= tolerance`.
    pub two_sided: bool,
    pub consistent: bool,
}

/// Compares a fit with the predicted exponent and the region membership of
/// `pair`.
pub fn verdict(fit: &ScalingFit, pair: &ExponentPair, curve: &Curve, kind: FamilyKind) -> Result<Verdict> {
    let tol = fit.tolerance;
    let omega = curve.omega()?.value;
    let region = necessary_region_contains(pair, omega);
    let condition_holds = match kind {
        FamilyKind::Thm3Ball => pair.inv_q_f64() >= 0.5 * pair.inv_p_f64() - 1e-12,
        _ => !region.violated_conditions.contains(&family_condition(kind)),
    };
    let predicted = predicted_exponent(kind, pair, curve)?;
    let s = fit.slope;
    let two_sided = (s - predicted).abs() <= tol;
    // A violated condition only needs a visible blow-up: the constructions
    // bound the ratio from below, so a steeper or somewhat flatter decay
    // than predicted is still a blow-up.
    let (sign_ok, consistent) = if !condition_holds {
        let ok = s <= (-tol).min(0.5 * predicted);
        (ok, ok)
    } else {
        let ok = !region.in_theorem1 || s >= -tol;
        (ok, ok && two_sided)
    };
    Ok(Verdict {
        family: kind,
        predicted,
        slope: s,
        condition_holds,
        in_theorem1: region.in_theorem1,
        sign_ok,
        two_sided,
        consistent,
    })
}

pub const REPORT_SCHEMA: u32 = 1;

/// JSON experiment report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub family: FamilyKind,
    pub curve: String,
    pub inv_p: f64,
    pub inv_q: f64,
    pub samples: Vec<Sample>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub predicted: f64,
    pub consistent: bool,
    pub verdict: Verdict,
    /// Samples that could not be computed, with the reason.
    pub dropped: Vec<(f64, String)>,
}

/// Runs the experiment, fits and judges it.
pub fn run_report(
    family: &ExtremizerFamily,
    pair: &ExponentPair,
    eps_seq: &[f64],
    res: &ExperimentResolution,
    tolerance: f64,
) -> Result<ExperimentReport> {
    let outcomes = run_samples(family, pair, eps_seq, res)?;
    let mut samples = Vec::new();
    let mut dropped = Vec::new();
    for (eps, r) in outcomes {
        match r {
            Ok(ratio) => samples.push(Sample { eps, ratio }),
            Err(e) => dropped.push((eps, e.to_string())),
        }
    }
    if samples.len() < MIN_SAMPLES {
        let why: Vec<String> = dropped.iter().map(|(e, m)| format!("eps={e}: {m}")).collect();
        return Err(Error::Resolution(format!("only {} samples survived: {}", samples.len(), why.join("; "))));
    }
    let predicted = predicted_exponent(family.kind, pair, &family.curve)?;
    let fit = fit_exponent(&samples, predicted, tolerance)?;
    let v = verdict(&fit, pair, &family.curve, family.kind)?;
    Ok(ExperimentReport {
        schema: REPORT_SCHEMA,
        family: family.kind,
        curve: family.curve.spec_string(),
        inv_p: pair.inv_p_f64(),
        inv_q: pair.inv_q_f64(),
        samples,
        slope: fit.slope,
        intercept: fit.intercept,
        stderr: fit.stderr,
        predicted,
        consistent: v.consistent,
        verdict: v,
        dropped,
    })
}

impl ExperimentReport {
    pub fn write_json<W: std::io::Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(|e| Error::Internal(e.to_string()))
    }

    /// `eps,ratio` rows, `ln` columns included for plotting.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Internal(e.to_string());
        writeln!(w, "eps,ratio,ln_eps,ln_ratio").map_err(io)?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{}", s.eps, s.ratio, s.eps.ln(), s.ratio.ln()).map_err(io)?;
        }
        Ok(())
    }
}
