//! Oscillatory integrals along the rescaled curves: the multiplier
//! `H_j(u, xi) = int exp(-i u (xi1 t + xi2 Gamma_j(t))) psi(t) dt`, the
//! stationary point, the Taylor remainder phase and the curvature checks of
//! the phase `Psi_j(z, xi) = x . xi - u xi1 t0 - u xi2 Gamma_j(t0)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::averaging::CutoffBump;
use crate::curves::{check_conditions, Curve, RescaledCurve, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::fit::{loglog, LineFit};

/// Node policy for the oscillatory Simpson rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscQuad {
    pub nodes_per_period: usize,
    pub min_nodes: usize,
    /// Requests needing more nodes than this are refused.
    pub max_nodes: usize,
}

impl Default for OscQuad {
    fn default() -> Self {
        OscQuad { nodes_per_period: 32, min_nodes: 2048, max_nodes: 1 << 22 }
    }
}

/// Integration window `[1/2, min(2, t_max)]` of the bump.
fn window(g: &RescaledCurve) -> Result<(f64, f64)> {
    let hi = g.t_max_extended().min(CutoffBump::SUPPORT.1);
    if hi <= CutoffBump::SUPPORT.0 {
        return Err(Error::Domain(format!("Gamma_{} is not defined past t = 1/2", g.j())));
    }
    Ok((CutoffBump::SUPPORT.0, hi))
}

/// Solves `Gamma_j'(t0) = -xi1/xi2` for `t0` in the open window `(1/2, 2)`.
pub fn critical_point(curve: &Curve, j: i32, xi: [f64; 2]) -> Result<f64> {
    critical_point_on(&curve.rescale(j)?, xi)
}

fn critical_point_on(g: &RescaledCurve, xi: [f64; 2]) -> Result<f64> {
    if xi[1] == 0.0 {
        return Err(Error::NotAdmissible("xi2 = 0 has no stationary point".to_string()));
    }
    let y = -xi[0] / xi[1];
    let (lo, hi) = window(g)?;
    let mut t = g.inverse_derivative(y, lo, hi)?;
    for _ in 0..8 {
        let jet = g.jet(t)?;
        let step = (jet.derivative(1) - y) / jet.derivative(2);
        if !step.is_finite() {
            break;
        }
        t = (t - step).clamp(lo, hi);
        if step.abs() < 1e-16 * t {
            break;
        }
    }
    let residual = (g.eval(t, 1)? - y).abs();
    if residual > 1e-12 * y.abs().max(1.0) {
        return Err(Error::Internal(format!("critical point residual {residual:e}")));
    }
    if t - lo < 1e-14 || hi - t < 1e-14 {
        return Err(Error::NotAdmissible(format!("t0 = {t} on the window boundary")));
    }
    Ok(t)
}

/// `H_j(u, xi)` by Simpson with at least `nodes_per_period` nodes per local
/// period of the phase.
pub fn compute_h(curve: &Curve, j: i32, u: f64, xi: [f64; 2], osc: &OscQuad) -> Result<Complex64> {
    let g = curve.rescale(j)?;
    let (a, b) = window(&g)?;
    let mut dmax = 0.0f64;
    for k in 0..=64 {
        let t = a + (b - a) * k as f64 / 64.0;
        dmax = dmax.max(g.eval(t, 1)?.abs());
    }
    let omega = u * (xi[0].abs() + xi[1].abs() * dmax);
    let required = (osc.nodes_per_period as f64 * (b - a) * omega / (2.0 * PI)).ceil() as usize;
    let n = required.max(osc.min_nodes);
    let n = n + n % 2;
    if n > osc.max_nodes {
        return Err(Error::InsufficientNodes { required: n, cap: osc.max_nodes });
    }
    let h = (b - a) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let t = a + i as f64 * h;
        let psi = CutoffBump::psi(t);
        if psi == 0.0 {
            continue;
        }
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let phase = -u * (xi[0] * t + xi[1] * g.eval(t, 0)?);
        acc += Complex64::from_polar(w * psi, phase);
    }
    Ok(acc * (h / 3.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub fit: LineFit,
    /// `(lambda, |H_j(u, lambda theta)|)`.
    pub samples: Vec<(f64, f64)>,
    pub expected: f64,
}

/// Slope of `ln |H_j(u, lambda theta)|` against `ln lambda`.
pub fn symbol_decay_fit(
    curve: &Curve,
    j: i32,
    u: f64,
    theta: [f64; 2],
    lambdas: &[f64],
    osc: &OscQuad,
) -> Result<DecayFit> {
    let (lo, hi) = lambdas
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    if !(lo > 0.0) || hi / lo < 100.0 {
        return Err(Error::Precondition("lambda range must span at least two decades".to_string()));
    }
    let mut samples = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let h = compute_h(curve, j, u, [l * theta[0], l * theta[1]], osc)?;
        samples.push((l, h.norm()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    Ok(DecayFit { fit: loglog(&x, &y)?, samples, expected: -0.5 })
}

/// `Gamma_j''(t0)/2 + (t/2) int_0^1 (1-theta)^2 Gamma_j'''(theta t + t0) dtheta`.
pub fn eta_remainder(curve: &Curve, j: i32, t: f64, t0: f64) -> Result<f64> {
    let g = curve.rescale(j)?;
    let hi = g.t_max_extended();
    for s in [t0, t0 + t] {
        if !(s > 0.0 && s <= hi) {
            return Err(Error::Domain(format!("Taylor window point {s} outside (0, {hi}]")));
        }
    }
    const N: usize = 128;
    let mut acc = 0.0;
    for i in 0..=N {
        let th = i as f64 / N as f64;
        let w = if i == 0 || i == N {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (1.0 - th).powi(2) * g.eval(th * t + t0, 3)?;
    }
    Ok(g.eval(t0, 2)? / 2.0 + t / 2.0 * acc / (3.0 * N as f64))
}

/// A space-time point `z = (x1, x2, u)` with a frequency `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub z: [f64; 3],
    pub xi: [f64; 2],
    pub j: i32,
}

/// Window `[C1/(10 e^C2), 10 e^C2 C2]` for `|xi1|/|xi2|` from the sampled
/// curvature constants.
pub fn admissible_ratio_window(curve: &Curve) -> Result<(f64, f64)> {
    let r = check_conditions(curve, 2, DEFAULT_SAMPLES)?;
    let (c1, c2) = (r.c1(1), r.c2(1));
    Ok((c1 / (10.0 * c2.exp()), 10.0 * c2.exp() * c2))
}

impl PhasePoint {
    /// Checks the sign, window and existence conditions and returns `t0`.
    pub fn validate(&self, curve: &Curve) -> Result<f64> {
        let [x1, x2, u] = self.z;
        if !(x1.is_finite() && x2.is_finite()) || !(1.0..=2.0).contains(&u) {
            return Err(Error::NotAdmissible(format!("z = {:?} needs finite x and u in [1, 2]", self.z)));
        }
        if !(self.xi[0] * self.xi[1] < 0.0) {
            return Err(Error::NotAdmissible("xi1 xi2 must be negative".to_string()));
        }
        let ratio = (self.xi[0] / self.xi[1]).abs();
        let (lo, hi) = admissible_ratio_window(curve)?;
        if !(ratio >= lo && ratio <= hi) {
            return Err(Error::NotAdmissible(format!("|xi1/xi2| = {ratio} outside [{lo}, {hi}]")));
        }
        critical_point(curve, self.j, self.xi)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Ranks {
    pub mixed: usize,
    pub xi: usize,
    pub cone: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub t0: f64,
    pub gauss: [f64; 3],
    pub mixed_hessian: [[f64; 3]; 2],
    pub xi_hessian: [[f64; 2]; 2],
    pub cone_hessian: [[f64; 2]; 2],
    pub dt0_dxi: [f64; 2],
    pub ranks: Ranks,
    pub singular_values: [Vec<f64>; 3],
    /// Largest finite-difference discrepancy, relative to each matrix norm.
    pub fd_rel_error: f64,
}

/// `Psi_j(z, xi)` with `t0 = t0(xi)`.
pub fn phase_psi(g: &RescaledCurve, z: [f64; 3], xi: [f64; 2]) -> Result<f64> {
    let t0 = critical_point_on(g, xi)?;
    Ok(z[0] * xi[0] + z[1] * xi[1] - z[2] * (xi[0] * t0 + xi[1] * g.eval(t0, 0)?))
}

/// `d_z Psi_j = (xi1, xi2, -xi1 t0 - xi2 Gamma_j(t0))`.
fn grad_z(g: &RescaledCurve, xi: [f64; 2]) -> Result<[f64; 3]> {
    let t0 = critical_point_on(g, xi)?;
    Ok([xi[0], xi[1], -xi[0] * t0 - xi[1] * g.eval(t0, 0)?])
}

fn rank(m: &DMatrix<f64>) -> (usize, Vec<f64>) {
    let sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    let max = sv.iter().copied().fold(0.0, f64::max);
    (sv.iter().filter(|&&s| s > 1e-8 * max).count(), sv)
}

fn rel_err(closed: &[f64], fd: &[f64]) -> f64 {
    let norm = closed.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    closed.iter().zip(fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / norm
}

/// Closed-form Hessians of the phase at an admissible point, each entry
/// cross-checked against central differences.
pub fn curvature_check(curve: &Curve, point: &PhasePoint) -> Result<CurvatureReport> {
    let t0 = point.validate(curve)?;
    let g = curve.rescale(point.j)?;
    let [xi1, xi2] = point.xi;
    let u = point.z[2];
    let jet = g.jet(t0)?;
    let (gam, d1, d2) = (jet.value(), jet.derivative(1), jet.derivative(2));
    let dt1 = -1.0 / (xi2 * d2);
    let dt2 = xi1 / (xi2 * xi2 * d2);

    let mixed = [[1.0, 0.0, -t0], [0.0, 1.0, -gam]];
    let xi_h = [[-u * dt1, -u * dt2], [-u * d1 * dt1, -u * d1 * dt2]];
    let norm = (t0 * t0 + gam * gam + 1.0).sqrt();
    let gauss = [t0 / norm, gam / norm, 1.0 / norm];
    let cone = [[-gauss[2] * dt1, -gauss[2] * dt2], [-gauss[2] * d1 * dt1, -gauss[2] * d1 * dt2]];

    // finite differences
    let xs = 1e-4 * (xi1 * xi1 + xi2 * xi2).sqrt();
    let zs = 1e-4 * point.z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let psi = |z: [f64; 3], xi: [f64; 2]| phase_psi(&g, z, xi);
    let mut fd_mixed = [[0.0; 3]; 2];
    for a in 0..2 {
        for b in 0..3 {
            let mut v = 0.0;
            for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut xi = point.xi;
                let mut z = point.z;
                xi[a] += sa * xs;
                z[b] += sb * zs;
                v += w * psi(z, xi)?;
            }
            fd_mixed[a][b] = v / (4.0 * xs * zs);
        }
    }
    let second = |f: &dyn Fn([f64; 2]) -> Result<f64>, a: usize, b: usize| -> Result<f64> {
        let mut v = 0.0;
        for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
            let mut xi = point.xi;
            xi[a] += sa * xs;
            xi[b] += sb * xs;
            v += w * f(xi)?;
        }
        Ok(v / (4.0 * xs * xs))
    };
    let psi_xi = |xi: [f64; 2]| psi(point.z, xi);
    let cone_fn = |xi: [f64; 2]| -> Result<f64> {
        let gz = grad_z(&g, xi)?;
        Ok(gz[0] * gauss[0] + gz[1] * gauss[1] + gz[2] * gauss[2])
    };
    let mut fd_xi = [[0.0; 2]; 2];
    let mut fd_cone = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            fd_xi[a][b] = second(&psi_xi, a, b)?;
            fd_cone[a][b] = second(&cone_fn, a, b)?;
        }
    }
    let err = rel_err(&mixed.concat(), &fd_mixed.concat())
        .max(rel_err(&xi_h.concat(), &fd_xi.concat()))
        .max(rel_err(&cone.concat(), &fd_cone.concat()));
    if !(err < 1e-5) {
        return Err(Error::Internal(format!("finite-difference cross-check failed: relative error {err:e}")));
    }
    let (rm, sm) = rank(&DMatrix::from_row_slice(2, 3, &mixed.concat()));
    let (rx, sx) = rank(&DMatrix::from_row_slice(2, 2, &xi_h.concat()));
    let (rc, sc) = rank(&DMatrix::from_row_slice(2, 2, &cone.concat()));
    Ok(CurvatureReport {
        t0,
        gauss,
        mixed_hessian: mixed,
        xi_hessian: xi_h,
        cone_hessian: cone,
        dt0_dxi: [dt1, dt2],
        ranks: Ranks { mixed: rm, xi: rx, cone: rc },
        singular_values: [sm, sx, sc],
        fd_rel_error: err,
    })
}

/// `|M G|` for the mixed Hessian `M`; zero when `G` spans its kernel.
pub fn gauss_residual(r: &CurvatureReport) -> f64 {
    r.mixed_hessian
        .iter()
        .map(|row| row.iter().zip(&r.gauss).map(|(a, b)| a * b).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `n` admissible points drawn with a seeded generator: `j` in `{0, -5, -20}`,
/// `t0` uniform in `[0.55, 1.95]` (clipped to the curve), `|xi2|` in
/// `[0.5, 20]`, `x` in `[-2, 2]^2`, `u` in `[1, 2]`. Draws that fail
/// [`PhasePoint::validate`] are discarded.
pub fn random_phase_points(curve: &Curve, n: usize, seed: u64) -> Result<Vec<PhasePoint>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut draws = 0usize;
    while out.len() < n {
        draws += 1;
        if draws > 1000 * n.max(1) {
            return Err(Error::NotAdmissible(format!("only {} admissible points in {} draws", out.len(), draws - 1)));
        }
        let j = [0, -5, -20][rng.gen_range(0..3)];
        let g = curve.rescale(j)?;
        let hi = (g.t_max_extended() - 0.05).min(1.95);
        if hi <= 0.55 {
            return Err(Error::Domain(format!("Gamma_{j} is too short for the phase window")));
        }
        let t = rng.gen_range(0.55..hi);
        let xi2 = rng.gen_range(0.5..20.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let xi = [-xi2 * g.eval(t, 1)?, xi2];
        let z = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(1.0..2.0)];
        let p = PhasePoint { z, xi, j };
        if p.validate(curve).is_ok() {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::CurveKind;

    fn cubic() -> Curve {
        Curve::power(3.0)
    }

    #[test]
    fn critical_point_examples() {
        let p = Curve::power(2.0);
        assert!(matches!(critical_point(&p, 0, [-1.0, 1.0]), Err(Error::NotAdmissible(_))));
        assert!((critical_point(&p, 0, [-2.0, 1.0]).unwrap() - 1.0).abs() < 1e-14);
        assert!((critical_point(&p, -4, [-3.0, 2.0]).unwrap() - 0.75).abs() < 1e-14);
        assert!((critical_point(&cubic(), 0, [-3.0, 1.0]).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(critical_point(&p, 0, [-9.0, 1.0]), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn h_at_zero_frequency_is_bump_mass() {
        let h = compute_h(&Curve::power(2.0), -2, 1.0, [0.0, 0.0], &OscQuad::default()).unwrap();
        assert!((h.re - 0.75).abs() < 1e-10 && h.im.abs() < 1e-15);
    }

    #[test]
    fn stationary_phase_leading_term() {
        let lambda = 256.0;
        let h = compute_h(&Curve::power(2.0), 0, 1.0, [-2.0 * lambda, lambda], &OscQuad::default()).unwrap();
        // psi(t0) sqrt(2 pi / |phi''(t0)|), phi'' = u xi2 Gamma'' = 2 lambda
        let oracle = CutoffBump::psi(1.0) * (2.0 * PI / (2.0 * lambda)).sqrt();
        assert!((h.norm() / oracle - 1.0).abs() < 0.1, "{} vs {oracle}", h.norm());
    }

    #[test]
    fn non_stationary_direction_decays_fast() {
        let lambda = 256.0;
        let h = compute_h(&Curve::power(2.0), -1, 1.0, [lambda, lambda], &OscQuad::default()).unwrap();
        assert!(h.norm() <= lambda.powi(-3), "{}", h.norm());
    }

    #[test]
    fn node_cap_refuses() {
        let osc = OscQuad { max_nodes: 4096, ..Default::default() };
        let r = compute_h(&Curve::power(2.0), 0, 1.0, [-2e4, 1e4], &osc);
        assert!(matches!(r, Err(Error::InsufficientNodes { .. })));
    }

    #[test]
    fn conjugation_and_bound() {
        let c = Curve::polynomial(&[0.0, 0.0, 1.0, 1.0]);
        let osc = OscQuad::default();
        for xi in [[-30.0, 11.0], [5.0, 7.0], [-100.0, 40.0]] {
            let a = compute_h(&c, -3, 1.3, xi, &osc).unwrap();
            let b = compute_h(&c, -3, 1.3, [-xi[0], -xi[1]], &osc).unwrap();
            assert!((a - b.conj()).norm() < 1e-12);
            assert!(a.norm() <= 0.75 + 1e-12);
        }
    }

    fn geometric(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|k| (k as f64).exp2()).collect()
    }

    #[test]
    fn decay_fits() {
        let osc = OscQuad::default();
        let f = symbol_decay_fit(&Curve::power(2.0), 0, 1.0, [-2.0, 1.0], &geometric(4, 12), &osc).unwrap();
        assert!((f.fit.slope + 0.5).abs() < 0.05, "{:?}", f.fit);
        let c = Curve::polynomial(&[0.0, 0.0, 1.0, 1.0]);
        let g = c.rescale(-5).unwrap();
        let theta = [-g.eval(1.2, 1).unwrap(), 1.0];
        let f = symbol_decay_fit(&c, -5, 1.5, theta, &geometric(4, 12), &osc).unwrap();
        assert!((f.fit.slope + 0.5).abs() < 0.05, "{:?}", f.fit);
        let f = symbol_decay_fit(&Curve::power(2.0), 0, 1.0, [1.0, 1.0], &geometric(2, 9), &osc).unwrap();
        assert!(f.fit.slope <= -2.0, "{:?}", f.fit);
        assert!(symbol_decay_fit(&Curve::power(2.0), 0, 1.0, [-2.0, 1.0], &geometric(4, 8), &osc).is_err());
    }

    #[test]
    fn eta_examples() {
        let p = Curve::power(2.0);
        for (t, t0) in [(0.3, 0.8), (-0.2, 1.1), (0.0, 1.7)] {
            assert!((eta_remainder(&p, -3, t, t0).unwrap() - 1.0).abs() < 1e-13);
        }
        let c = Curve::polynomial(&[0.0, 0.0, 1.0, 1.0]);
        let g = c.rescale(-2).unwrap();
        assert!((eta_remainder(&c, -2, 0.0, 0.9).unwrap() - g.eval(0.9, 2).unwrap() / 2.0).abs() < 1e-14);
        assert!(matches!(eta_remainder(&p, 0, 1.5, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn taylor_identity_for_cubic() {
        let (t0, t, u, xi2) = (1.0, 0.1, 1.3, 2.0);
        let xi1 = -xi2 * 3.0 * t0 * t0;
        // direct phase with Gamma_0(s) = s^3
        let phi = |s: f64| -u * (xi1 * s + xi2 * s.powi(3));
        let lhs = phi(t + t0) - phi(t0);
        let rhs = -u * xi2 * t * t * eta_remainder(&cubic(), 0, t, t0).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn curvature_example_parabola() {
        let p = Curve::power(2.0);
        let r = curvature_check(&p, &PhasePoint { z: [0.3, -0.2, 1.0], xi: [-2.0, 1.0], j: 0 }).unwrap();
        assert!((r.t0 - 1.0).abs() < 1e-14);
        assert!((r.dt0_dxi[0] + 0.5).abs() < 1e-14 && (r.dt0_dxi[1] + 1.0).abs() < 1e-14);
        let expect = [[0.5, 1.0], [1.0, 2.0]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((r.xi_hessian[a][b] - expect[a][b]).abs() < 1e-14);
            }
        }
        assert_eq!((r.ranks.mixed, r.ranks.xi, r.ranks.cone), (2, 1, 1));
    }

    #[test]
    fn homogeneity_of_phase() {
        let c = Curve::polynomial(&[0.0, 0.0, 1.0, 1.0]);
        let g = c.rescale(-5).unwrap();
        let z = [0.4, 1.1, 1.7];
        let xi = [-2.3, 1.0];
        let a = phase_psi(&g, z, xi).unwrap();
        let b = phase_psi(&g, z, [3.0 * xi[0], 3.0 * xi[1]]).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn random_points_have_expected_ranks() {
        use rand::{Rng, SeedableRng};
        let curves = [
            Curve::power(2.0),
            Curve::power(3.0),
            Curve::polynomial(&[0.0, 0.0, 1.0, 1.0]),
            Curve::new(CurveKind::Power { d: 0.5 }).unwrap(),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 100 {
            let c = &curves[rng.gen_range(0..curves.len())];
            let j = [0, -5, -20][rng.gen_range(0..3)];
            let g = c.rescale(j).unwrap();
            let t = rng.gen_range(0.55..1.95);
            let xi2 = rng.gen_range(0.5..20.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let xi = [-xi2 * g.eval(t, 1).unwrap(), xi2];
            let z = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(1.0..2.0)];
            let p = PhasePoint { z, xi, j };
            let Ok(t0) = p.validate(c) else { continue };
            assert!((t0 - t).abs() < 1e-9);
            let r = curvature_check(c, &p).unwrap();
            assert_eq!((r.ranks.mixed, r.ranks.xi, r.ranks.cone), (2, 1, 1));
            assert!((r.cone_hessian[0][1] - r.cone_hessian[1][0]).abs() < 1e-8 * r.cone_hessian[0][1].abs().max(1.0));
            let n: f64 = r.gauss.iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-14);
            assert!(gauss_residual(&r) < 1e-8);
            // gradient in xi of <d_z Psi(xi), G(xi0)> vanishes at xi0
            let gz = grad_z(&g, xi).unwrap();
            let h = 1e-6 * xi2.abs();
            for a in 0..2 {
                let (mut p1, mut m1) = (xi, xi);
                p1[a] += h;
                m1[a] -= h;
                let f = |x: [f64; 2]| {
                    let v = grad_z(&g, x).unwrap();
                    v[0] * r.gauss[0] + v[1] * r.gauss[1] + v[2] * r.gauss[2]
                };
                let d = (f(p1) - f(m1)) / (2.0 * h);
                assert!(d.abs() < 1e-8 * gz.iter().fold(1.0f64, |m, v| m.max(v.abs())), "{d}");
            }
            checked += 1;
        }
    }

    #[test]
    fn seeded_points_are_admissible_and_reproducible() {
        let c = Curve::power(3.0);
        let a = random_phase_points(&c, 20, 3).unwrap();
        assert_eq!(a, random_phase_points(&c, 20, 3).unwrap());
        for p in &a {
            assert!(p.validate(&c).is_ok());
            let r = curvature_check(&c, p).unwrap();
            assert_eq!((r.ranks.mixed, r.ranks.xi, r.ranks.cone), (2, 1, 1));
        }
    }
}
