//! Regions of the `(1/p, 1/q)` exponent plane.
//!
//! Points built from fractions are compared exactly; real points use an
//! absolute tolerance of `1e-12` on every linear boundary.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::curves::Curve;
use crate::error::{Error, Result};

pub const TOLERANCE: f64 = 1e-12;

/// Flatness exponent, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Omega {
    Finite(f64),
    Infinite,
}

impl Omega {
    pub fn finite(self) -> Option<f64> {
        match self {
            Omega::Finite(w) => Some(w),
            Omega::Infinite => None,
        }
    }
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Omega::Finite(w) => write!(f, "{w}"),
            Omega::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Omega {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Omega::Finite(w) => s.serialize_f64(*w),
            Omega::Infinite => s.serialize_str("inf"),
        }
    }
}

impl FromStr for Omega {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinity" => Ok(Omega::Infinite),
            _ => s
                .parse::<f64>()
                .ok()
                .filter(|w| *w > 0.0 && w.is_finite())
                .map(Omega::Finite)
                .ok_or_else(|| Error::Parse(format!("bad omega '{s}'"))),
        }
    }
}

/// A point `(1/p, 1/q)` of the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    inv_p: f64,
    inv_q: f64,
    exact: Option<(Rational64, Rational64)>,
}

impl ExponentPair {
    pub fn real(inv_p: f64, inv_q: f64) -> Result<Self> {
        check_unit(inv_p)?;
        check_unit(inv_q)?;
        Ok(ExponentPair { inv_p, inv_q, exact: None })
    }

    pub fn rational(inv_p: Rational64, inv_q: Rational64) -> Result<Self> {
        let zero = Rational64::from_integer(0);
        let one = Rational64::from_integer(1);
        for r in [inv_p, inv_q] {
            if r < zero || r > one {
                return Err(Error::Domain(format!("coordinate {r} not in [0, 1]")));
            }
        }
        Ok(ExponentPair { inv_p: to_f64(inv_p), inv_q: to_f64(inv_q), exact: Some((inv_p, inv_q)) })
    }

    /// `(a/b, c/d)`.
    pub fn fractions(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if b == 0 || d == 0 {
            return Err(Error::Domain("zero denominator".to_string()));
        }
        Self::rational(Rational64::new(a, b), Rational64::new(c, d))
    }

    pub fn inv_p_f64(&self) -> f64 {
        self.inv_p
    }

    pub fn inv_q_f64(&self) -> f64 {
        self.inv_q
    }

    pub fn exact(&self) -> Option<(Rational64, Rational64)> {
        self.exact
    }

    /// Sign of `a/p + b/q + c` for integer coefficients.
    fn sign(&self, a: i64, b: i64, c: i64) -> i8 {
        match self.exact {
            Some((x, y)) => {
                let v = x * a + y * b + c;
                v.numer().signum() as i8
            }
            None => {
                let v = a as f64 * self.inv_p + b as f64 * self.inv_q + c as f64;
                if v.abs() <= TOLERANCE {
                    0
                } else if v > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    fn is_point(&self, x: (i64, i64), y: (i64, i64)) -> bool {
        // x.0/x.1 == 1/p  <=>  x.1/p - x.0 == 0
        self.sign(x.1, 0, -x.0) == 0 && self.sign(0, y.1, -y.0) == 0
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some((x, y)) => write!(f, "({x}, {y})"),
            None => write!(f, "({}, {})", self.inv_p, self.inv_q),
        }
    }
}

impl Serialize for ExponentPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExponentPair", 2)?;
        st.serialize_field("inv_p", &self.inv_p)?;
        st.serialize_field("inv_q", &self.inv_q)?;
        st.end()
    }
}

impl FromStr for ExponentPair {
    type Err = Error;

    /// `a,b` where each coordinate is a decimal or a fraction `n/d`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected 'inv_p,inv_q', got '{s}'")))?;
        let parse_frac = |t: &str| -> Option<Rational64> {
            let t = t.trim();
            match t.split_once('/') {
                Some((n, d)) => {
                    let (n, d) = (n.trim().parse::<i64>().ok()?, d.trim().parse::<i64>().ok()?);
                    (d != 0).then(|| Rational64::new(n, d))
                }
                None => t.parse::<i64>().ok().map(Rational64::from_integer),
            }
        };
        let map = |e: Error| match e {
            Error::Domain(m) => Error::Parse(m),
            other => other,
        };
        if let (Some(x), Some(y)) = (parse_frac(a), parse_frac(b)) {
            return Self::rational(x, y).map_err(map);
        }
        let num = |t: &str| -> Result<f64> {
            parse_frac(t)
                .map(to_f64)
                .or_else(|| t.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("bad coordinate '{t}'")))
        };
        Self::real(num(a)?, num(b)?).map_err(map)
    }
}

fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_unit(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("coordinate {v} not in [0, 1]")))
    }
}

/// `2/p - 1 <= 1/q <= 1/p`, `1/q > 1/(3p)`, `1/q > 1/p - 1/3`.
pub fn trapezium_contains(pair: &ExponentPair) -> bool {
    pair.sign(-2, 1, 1) >= 0
        && pair.sign(1, -1, 0) >= 0
        && pair.sign(-1, 3, 0) > 0
        && pair.sign(-3, 3, 1) > 0
}

/// Closed triangle `1/(2p) <= 1/q <= 1/p`, `1/q >= 2/p - 1`.
pub fn triangle_contains(pair: &ExponentPair) -> bool {
    pair.sign(-1, 2, 0) >= 0 && pair.sign(1, -1, 0) >= 0 && pair.sign(-2, 1, 1) >= 0
}

/// `1 + (1 + omega)(1/q - 1/p)`.
pub fn line_condition(pair: &ExponentPair, omega: Omega) -> Result<f64> {
    let w = omega.finite().ok_or(Error::FlatCurve)?;
    if pair.sign(-1, 1, 0) == 0 {
        return Ok(1.0);
    }
    Ok(1.0 + (1.0 + w) * (pair.inv_q - pair.inv_p))
}

fn line_sign(pair: &ExponentPair, omega: Omega) -> i8 {
    match omega {
        // limit of the line value as omega grows
        Omega::Infinite => {
            if pair.sign(-1, 1, 0) == 0 {
                1
            } else {
                -1
            }
        }
        Omega::Finite(_) => {
            let v = line_condition(pair, omega).expect("finite omega");
            if v.abs() <= TOLERANCE {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        }
    }
}

fn in_trapezium_union(pair: &ExponentPair) -> bool {
    trapezium_contains(pair) || pair.is_point((0, 1), (0, 1)) || pair.is_point((2, 3), (1, 3))
}

/// Sufficient region: (trapezium, O or D) and a positive line value.
pub fn theorem1_region_contains(pair: &ExponentPair, omega: Omega) -> Result<bool> {
    if omega == Omega::Infinite {
        return Err(Error::FlatCurve);
    }
    Ok(in_trapezium_union(pair) && line_sign(pair, omega) > 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub in_trapezium: bool,
    pub in_triangle: bool,
    /// `None` for an infinitely flat curve.
    pub line_value: Option<f64>,
    pub in_theorem1: bool,
    pub in_necessary: bool,
    pub violated_conditions: Vec<&'static str>,
}

/// Evaluates the four closed necessary conditions along with the other
/// memberships. For infinite `omega` the line condition is taken in the limit.
pub fn necessary_region_contains(pair: &ExponentPair, omega: Omega) -> RegionVerdict {
    let mut violated = Vec::new();
    if line_sign(pair, omega) < 0 {
        violated.push("(i)");
    }
    if !(pair.sign(-2, 1, 1) >= 0 && pair.sign(1, -1, 0) >= 0) {
        violated.push("(ii)");
    }
    if pair.sign(-1, 3, 0) < 0 {
        violated.push("(iii)");
    }
    if pair.sign(-3, 3, 1) < 0 {
        violated.push("(iv)");
    }
    RegionVerdict {
        in_trapezium: trapezium_contains(pair),
        in_triangle: triangle_contains(pair),
        line_value: line_condition(pair, omega).ok(),
        in_theorem1: theorem1_region_contains(pair, omega).unwrap_or(false),
        in_necessary: violated.is_empty(),
        violated_conditions: violated,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledPoint {
    pub label: &'static str,
    pub inv_p: f64,
    pub inv_q: f64,
}

/// Named corners, plus where the line `1/q = 1/p - 1/(omega+1)` meets the
/// edges `OC` and `DA` when `omega >= 2`.
pub fn vertices(omega: f64) -> Vec<LabeledPoint> {
    let p = |label, inv_p, inv_q| LabeledPoint { label, inv_p, inv_q };
    let mut v = vec![
        p("O", 0.0, 0.0),
        p("A", 1.0, 1.0),
        p("D", 2.0 / 3.0, 1.0 / 3.0),
        p("C", 0.5, 1.0 / 6.0),
        p("M", 0.25, 0.25),
    ];
    if omega >= 2.0 {
        let c = 1.0 / (omega + 1.0);
        v.push(p("line_OC", 1.5 * c, 0.5 * c));
        v.push(p("line_DA", 1.0 - c, 1.0 - 2.0 * c));
    }
    v
}

/// Extremizer families with a known scaling exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    RectI,
    BallII,
    AdjointIII,
    TiltedIV,
    Thm3Ball,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::RectI,
        FamilyKind::BallII,
        FamilyKind::AdjointIII,
        FamilyKind::TiltedIV,
        FamilyKind::Thm3Ball,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::RectI => "rect_i",
            FamilyKind::BallII => "ball_ii",
            FamilyKind::AdjointIII => "adjoint_iii",
            FamilyKind::TiltedIV => "tilted_iv",
            FamilyKind::Thm3Ball => "thm3_ball",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown family '{s}'")))
    }
}

/// Exponent of `epsilon` in the lower bound of the norm ratio.
pub fn predicted_exponent(kind: FamilyKind, pair: &ExponentPair, curve: &Curve) -> Result<f64> {
    let (x, y) = (pair.inv_p, pair.inv_q);
    Ok(match kind {
        FamilyKind::RectI => line_condition(pair, curve.omega()?.value)?,
        FamilyKind::BallII => 1.0 + y - 2.0 * x,
        FamilyKind::AdjointIII => 3.0 * y - x,
        FamilyKind::TiltedIV => 1.0 + 3.0 * y - 3.0 * x,
        FamilyKind::Thm3Ball => 2.0 * y - x,
    })
}

/// Verdicts on the lattice `{(i/n, k/n)}`.
pub fn region_lattice(n: i64, omega: Omega) -> Result<Vec<(ExponentPair, RegionVerdict)>> {
    if n < 1 {
        return Err(Error::Precondition(format!("lattice size {n} < 1")));
    }
    let mut out = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
    for i in 0..=n {
        for k in 0..=n {
            let pair = ExponentPair::fractions(i, n, k, n)?;
            out.push((pair, necessary_region_contains(&pair, omega)));
        }
    }
    Ok(out)
}

pub const REGION_CSV_HEADER: &str = "inv_p,inv_q,in_trapezium,in_triangle,line_value,in_theorem1,in_necessary";

pub fn write_region_csv<W: Write>(mut w: W, rows: &[(ExponentPair, RegionVerdict)]) -> Result<()> {
    let io = |e: std::io::Error| Error::Internal(e.to_string());
    writeln!(w, "{REGION_CSV_HEADER}").map_err(io)?;
    for (p, v) in rows {
        let line = v.line_value.map(|l| l.to_string()).unwrap_or_else(|| "nan".to_string());
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.inv_p, p.inv_q, v.in_trapezium as u8, v.in_triangle as u8, line, v.in_theorem1 as u8, v.in_necessary as u8
        )
        .map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fr(a: i64, b: i64, c: i64, d: i64) -> ExponentPair {
        ExponentPair::fractions(a, b, c, d).unwrap()
    }

    #[test]
    fn trapezium_examples() {
        assert!(trapezium_contains(&fr(1, 2, 1, 3)));
        assert!(!trapezium_contains(&fr(2, 3, 1, 3)));
        assert!(!trapezium_contains(&fr(0, 1, 0, 1)));
    }

    #[test]
    fn triangle_examples() {
        assert!(triangle_contains(&fr(1, 2, 1, 4)));
        assert!(triangle_contains(&fr(2, 3, 1, 3)));
        assert!(!triangle_contains(&fr(1, 2, 1, 6)));
    }

    #[test]
    fn line_examples() {
        assert_eq!(line_condition(&fr(1, 4, 1, 4), Omega::Finite(7.0)).unwrap(), 1.0);
        assert!(line_condition(&fr(2, 3, 1, 3), Omega::Finite(2.0)).unwrap().abs() < 1e-15);
        assert!((line_condition(&fr(2, 3, 1, 3), Omega::Finite(3.0)).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(line_condition(&fr(1, 2, 1, 2), Omega::Infinite), Err(Error::FlatCurve)));
    }

    #[test]
    fn sufficient_region_examples() {
        assert!(theorem1_region_contains(&fr(2, 3, 1, 3), Omega::Finite(1.5)).unwrap());
        assert!(!theorem1_region_contains(&fr(2, 3, 1, 3), Omega::Finite(2.0)).unwrap());
        assert!(!theorem1_region_contains(&fr(1, 2, 1, 6), Omega::Finite(2.0)).unwrap());
        assert!(theorem1_region_contains(&fr(0, 1, 0, 1), Omega::Finite(9.0)).unwrap());
    }

    #[test]
    fn real_pairs_use_tolerance() {
        let d = ExponentPair::real(2.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!(!trapezium_contains(&d));
        assert!(theorem1_region_contains(&d, Omega::Finite(1.5)).unwrap());
        assert!(!theorem1_region_contains(&d, Omega::Finite(2.0)).unwrap());
    }

    #[test]
    fn necessary_examples() {
        let v = necessary_region_contains(&fr(2, 3, 1, 3), Omega::Finite(2.0));
        assert!(v.in_necessary && v.violated_conditions.is_empty());
        let v = necessary_region_contains(&fr(1, 1, 0, 1), Omega::Finite(2.0));
        assert_eq!(v.violated_conditions, vec!["(i)", "(ii)", "(iii)", "(iv)"]);
        assert!(necessary_region_contains(&fr(1, 4, 1, 4), Omega::Finite(10.0)).in_necessary);
        let flat = necessary_region_contains(&fr(1, 2, 1, 3), Omega::Infinite);
        assert_eq!(flat.violated_conditions, vec!["(i)"]);
        assert!(flat.line_value.is_none());
    }

    #[test]
    fn vertex_examples() {
        let v = vertices(2.0);
        let get = |l: &str| v.iter().find(|p| p.label == l).unwrap().clone();
        let d = get("D");
        assert_eq!((d.inv_p, d.inv_q), (2.0 / 3.0, 1.0 / 3.0));
        let c = get("C");
        assert_eq!((c.inv_p, c.inv_q), (0.5, 1.0 / 6.0));
        let da = get("line_DA");
        assert!((da.inv_p - 2.0 / 3.0).abs() < 1e-15 && (da.inv_q - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(vertices(1.0).len(), 5);
    }

    #[test]
    fn predicted_examples() {
        let parab = Curve::power(2.0);
        let p = predicted_exponent(FamilyKind::BallII, &fr(1, 2, 1, 2), &parab).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let p = predicted_exponent(FamilyKind::TiltedIV, &fr(2, 3, 1, 3), &parab).unwrap();
        assert!(p.abs() < 1e-15);
        let p = predicted_exponent(FamilyKind::RectI, &fr(1, 2, 1, 4), &parab).unwrap();
        assert!((p - 0.25).abs() < 1e-15);
        assert!(matches!("rect_v".parse::<FamilyKind>(), Err(Error::Parse(_))));
    }

    #[test]
    fn pair_parsing() {
        let p: ExponentPair = "2/3,1/3".parse().unwrap();
        assert!(p.exact().is_some());
        let p: ExponentPair = "0.5, 0.25".parse().unwrap();
        assert_eq!((p.inv_p_f64(), p.inv_q_f64()), (0.5, 0.25));
        assert!("1.5,0".parse::<ExponentPair>().is_err());
        assert!("x".parse::<ExponentPair>().is_err());
    }

    #[test]
    fn lattice_csv() {
        let rows = region_lattice(6, Omega::Finite(2.0)).unwrap();
        assert_eq!(rows.len(), 49);
        let mut buf = Vec::new();
        write_region_csv(&mut buf, &rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with(REGION_CSV_HEADER));
        assert_eq!(s.lines().count(), 50);
    }
}
