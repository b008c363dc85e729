//! The `cavlab` command line: argument grammar, command runners and the
//! report, CSV and gnuplot writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use serde::Serialize;
use serde_json::json;

use crate::curves::{check_conditions, verify_lemma31, Curve, DEFAULT_N, DEFAULT_SAMPLES};
use crate::oscillatory::{
    curvature_check, gauss_residual, random_phase_points, symbol_decay_fit, OscQuad, PhasePoint,
};
use crate::pq_geometry::{region_lattice, vertices, write_region_csv, ExponentPair, FamilyKind, Omega};
use crate::sharpness::{run_report, ExactResolution, ExperimentReport, ExperimentResolution, ExtremizerFamily};
use crate::{Error, Result};

pub const SCHEMA: u32 = 1;
/// Exit code of a run that completed but whose check did not pass.
pub const EXIT_FAILED_CHECK: i32 = 6;
pub const THREADS_ENV: &str = "CAVLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "cavlab",
    version,
    about = "Dilated averages over plane curves: curve checks, exponent regions, scaling experiments and phase diagnostics",
    after_help = "Curves are given as key=value lists, e.g. \"kind=power d=2\", \"kind=polynomial coeffs=0,0,1,1\", \
\"kind=power_sum pairs=1:2,0.5:3\", \"kind=named name=t_sin_t\", \"kind=flat_exp a=1\", each with optional end=<t>.\n\n\
Exit codes: 0 success, 1 internal error, 2 parse error, 3 unsupported input (e.g. omega = inf), \
4 resolution exhausted, 5 inadmissible input, 6 computed but the check did not pass.\n\n\
CAVLAB_THREADS caps the number of worker threads."
)]
pub struct Cli {
    /// Directory for output files (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of the summary printed on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the curvature conditions and the uniform bounds of the rescaled curves.
    CheckCurve {
        #[arg(long)]
        curve: String,
        /// Highest derivative order checked.
        #[arg(long, default_value_t = DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Most negative rescaling index of the sweep.
        #[arg(long, default_value_t = -40, allow_hyphen_values = true)]
        j_min: i32,
    },
    /// Classify a lattice of exponent pairs and emit a plot script.
    Region {
        /// Flatness exponent; alternatively pass --curve.
        #[arg(long, conflicts_with = "curve")]
        omega: Option<String>,
        #[arg(long)]
        curve: Option<String>,
        /// Lattice points per axis minus one.
        #[arg(long, default_value_t = 200)]
        resolution: i64,
    },
    /// Run an extremizer family over a decreasing eps sequence and fit the exponent.
    Sharpness {
        #[arg(long)]
        family: String,
        #[arg(long)]
        curve: String,
        /// Input exponent p (accepts "inf", fractions and decimals).
        #[arg(long, requires = "q", conflicts_with = "pair")]
        p: Option<String>,
        /// Output exponent q.
        #[arg(long, requires = "p")]
        q: Option<String>,
        /// Alternatively "1/p,1/q", e.g. "2/3,1/3".
        #[arg(long)]
        pair: Option<String>,
        /// Comma-separated eps values; defaults to the family's sequence.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long, default_value_t = crate::sharpness::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = crate::sharpness::DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Gauss nodes per axis on the input set.
        #[arg(long, default_value_t = ExactResolution::default().set_nodes)]
        set_nodes: usize,
        /// Grid cells per eps for the curve-neighborhood family.
        #[arg(long, default_value_t = ExperimentResolution::default().cells_per_eps)]
        cells_per_eps: usize,
    },
    /// Decay of the oscillatory symbol along a frequency ray.
    Phase {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        j: i32,
        #[arg(long, default_value_t = 1.0)]
        u: f64,
        /// Direction "xi1,xi2"; xi1 xi2 < 0 is required.
        #[arg(long, allow_hyphen_values = true)]
        dir: String,
        #[arg(long, default_value_t = 16.0)]
        lmin: f64,
        #[arg(long, default_value_t = 4096.0)]
        lmax: f64,
        /// Number of geometric lambda samples.
        #[arg(long, default_value_t = 17)]
        points: usize,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// Hessian ranks of the phase at seeded random admissible points.
    Rank {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// What a command produced: a summary for standard output, files for
/// `--out`, and whether its check passed.
#[derive(Debug)]
pub struct Outcome {
    pub summary: serde_json::Value,
    pub csv: String,
    pub files: Vec<(String, Vec<u8>)>,
    pub pass: bool,
}

pub fn parse_curve(s: &str) -> Result<Curve> {
    s.parse()
}

/// Reciprocal of an exponent given as "inf", "a/b" or a decimal.
pub fn parse_reciprocal(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad exponent '{s}'"));
    let value = if s == "inf" || s == "infinity" {
        return Ok(Rational64::from_integer(0));
    } else if let Some((a, b)) = s.split_once('/') {
        let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if b == 0 {
            return Err(bad());
        }
        Rational64::new(a, b)
    } else {
        decimal(s).ok_or_else(bad)?
    };
    if value < Rational64::from_integer(1) {
        return Err(Error::Parse(format!("exponent {s} < 1")));
    }
    Ok(value.recip())
}

fn decimal(s: &str) -> Option<Rational64> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 12 || int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    Some(Rational64::new(digits, 10i64.pow(frac.len() as u32)))
}

fn parse_pair(p: Option<&str>, q: Option<&str>, pair: Option<&str>) -> Result<ExponentPair> {
    match (p, q, pair) {
        (Some(p), Some(q), None) => ExponentPair::rational(parse_reciprocal(p)?, parse_reciprocal(q)?),
        (None, None, Some(s)) => s.parse(),
        _ => Err(Error::Parse("give either --p and --q or --pair".to_string())),
    }
}

fn parse_dir(s: &str) -> Result<[f64; 2]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad direction '{s}'"))))
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [a, b] if a.is_finite() && b.is_finite() => Ok([*a, *b]),
        _ => Err(Error::Parse(format!("direction '{s}' needs two finite numbers"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| Error::Internal(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

pub fn cmd_check_curve(curve: &str, n: usize, samples: usize, j_min: i32) -> Result<Outcome> {
    let c = parse_curve(curve)?;
    if j_min > 0 {
        return Err(Error::Precondition(format!("j_min = {j_min} must be <= 0")));
    }
    let omega = c.omega()?;
    let conditions = check_conditions(&c, n, samples)?;
    let js: Vec<i32> = (j_min..=0).rev().collect();
    let lemma = verify_lemma31(&c, &js, samples)?;
    let pass = conditions.pass && lemma.pass;
    let doc = json!({
        "schema": SCHEMA,
        "curve": c.spec_string(),
        "omega": omega,
        "conditions": conditions,
        "lemma31": lemma,
        "pass": pass,
    });
    let csv = format!(
        "curve,omega,conditions_pass,lemma31_pass,pass\n\"{}\",{},{},{},{}\n",
        c.spec_string(),
        omega.value,
        conditions.pass,
        lemma.pass,
        pass
    );
    let summary = json!({
        "schema": SCHEMA,
        "curve": c.spec_string(),
        "omega": omega.value,
        "violations": conditions.violations,
        "lemma31_pass": lemma.pass,
        "pass": pass,
    });
    Ok(Outcome { summary, csv, files: vec![("conditions.json".to_string(), to_json(&doc)?)], pass })
}

pub fn cmd_region(omega: Option<&str>, curve: Option<&str>, resolution: i64) -> Result<Outcome> {
    let omega: Omega = match (omega, curve) {
        (Some(w), None) => w.parse()?,
        (None, Some(c)) => parse_curve(c)?.omega()?.value,
        _ => return Err(Error::Parse("give either --omega or --curve".to_string())),
    };
    let w = omega.finite().ok_or(Error::FlatCurve)?;
    let rows = region_lattice(resolution, omega)?;
    let mut csv = Vec::new();
    write_region_csv(&mut csv, &rows)?;
    let inside = rows.iter().filter(|r| r.1.in_theorem1).count();
    let necessary = rows.iter().filter(|r| r.1.in_necessary).count();
    let summary = json!({
        "schema": SCHEMA,
        "omega": w,
        "lattice": resolution,
        "points": rows.len(),
        "in_theorem1": inside,
        "in_necessary": necessary,
        "vertices": vertices(w),
    });
    let gp = region_script(w);
    Ok(Outcome {
        csv: String::from_utf8(csv.clone()).map_err(|e| Error::Internal(e.to_string()))?,
        summary,
        files: vec![("region.csv".to_string(), csv), ("region.gp".to_string(), gp.into_bytes())],
        pass: true,
    })
}

/// Gnuplot script drawing the lattice classification, the trapezium
/// `OCDA`, the triangle `OAD`, the omega-line and the labeled vertices.
pub fn region_script(omega: f64) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot region.gp\n");
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set title 'exponent region, omega = {omega}'\n"));
    s.push_str("set xlabel '1/p'\nset ylabel '1/q'\nset size square\nset xrange [0:1]\nset yrange [0:1]\n");
    s.push_str("set key outside\n");
    for v in vertices(omega) {
        s.push_str(&format!(
            "set label '{}' at {},{} offset 0.5,0.5\nset object circle at {},{} size 0.006 fc rgb 'black' fs solid\n",
            v.label, v.inv_p, v.inv_q, v.inv_p, v.inv_q
        ));
    }
    s.push_str("set arrow from 0,0 to 0.5,0.16666666666666666 nohead lw 2 lc rgb 'blue'\n");
    s.push_str("set arrow from 0.5,0.16666666666666666 to 0.6666666666666666,0.3333333333333333 nohead lw 2 lc rgb 'blue'\n");
    s.push_str("set arrow from 0.6666666666666666,0.3333333333333333 to 1,1 nohead lw 2 lc rgb 'blue'\n");
    s.push_str("set arrow from 1,1 to 0,0 nohead lw 2 lc rgb 'blue'\n");
    s.push_str("set arrow from 0,0 to 0.6666666666666666,0.3333333333333333 nohead lw 1 dt 2 lc rgb 'dark-green'\n");
    let c = 1.0 / (omega + 1.0);
    // 1/q = 1/p - c, clipped to the unit square
    s.push_str(&format!("set arrow from {c},0 to 1,{} nohead lw 1 dt 3 lc rgb 'red'\n", 1.0 - c));
    s.push_str(
        "plot 'region.csv' every ::1 using 1:($6 == 1 ? $2 : 1/0) with points pt 7 ps 0.2 lc rgb '#8080ff' title 'sufficient region', \\\n",
    );
    s.push_str(
        "     'region.csv' every ::1 using 1:($7 == 1 && $6 == 0 ? $2 : 1/0) with points pt 7 ps 0.2 lc rgb '#ffb060' title 'necessary only'\n",
    );
    s
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sharpness(
    family: &str,
    curve: &str,
    pair: &ExponentPair,
    eps: Option<&[f64]>,
    delta: f64,
    tolerance: f64,
    set_nodes: usize,
    cells_per_eps: usize,
) -> Result<Outcome> {
    let kind: FamilyKind = family.parse()?;
    let c = parse_curve(curve)?;
    if !(tolerance > 0.0) {
        return Err(Error::Precondition(format!("tolerance {tolerance} must be positive")));
    }
    let fam = ExtremizerFamily::with_delta(kind, c, delta)?;
    let eps = eps.map(|e| e.to_vec()).unwrap_or_else(|| fam.default_eps());
    let res = ExperimentResolution {
        exact: ExactResolution { set_nodes, ..Default::default() },
        cells_per_eps,
        ..Default::default()
    };
    res.exact.validate()?;
    if cells_per_eps < 2 {
        return Err(Error::Precondition("cells_per_eps must be at least 2".to_string()));
    }
    let report = run_report(&fam, pair, &eps, &res, tolerance)?;
    let mut json_bytes = Vec::new();
    report.write_json(&mut json_bytes)?;
    json_bytes.push(b'\n');
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let label = kind.label();
    let gp = sharpness_script(&report);
    let summary = serde_json::from_slice(&json_bytes).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(Outcome {
        summary,
        csv: String::from_utf8(csv.clone()).map_err(|e| Error::Internal(e.to_string()))?,
        files: vec![
            (format!("sharpness_{label}.json"), json_bytes),
            (format!("sharpness_{label}.csv"), csv),
            (format!("sharpness_{label}.gp"), gp.into_bytes()),
        ],
        pass: report.consistent,
    })
}

/// Log-log plot of the samples with the fitted and predicted lines.
pub fn sharpness_script(r: &ExperimentReport) -> String {
    let label = r.family.label();
    format!(
        "# gnuplot sharpness_{label}.gp\n\
set datafile separator ','\n\
set logscale xy\n\
set xlabel 'eps'\n\
set ylabel 'R(eps)'\n\
set title '{label}, (1/p, 1/q) = ({}, {}): slope {:.4}, predicted {:.4}'\n\
set key left top\n\
fit_line(x) = exp({}) * x**{}\n\
pred_line(x) = exp({}) * x**{}\n\
plot 'sharpness_{label}.csv' every ::1 using 1:2 with points pt 7 title 'samples', \\\n\
     fit_line(x) with lines lw 2 title 'fit', \\\n\
     pred_line(x) with lines dt 2 title 'predicted'\n",
        r.inv_p,
        r.inv_q,
        r.slope,
        r.predicted,
        r.intercept,
        r.slope,
        // predicted line through the sample mean
        mean_log(r) - r.predicted * mean_log_eps(r),
        r.predicted,
    )
}

fn mean_log(r: &ExperimentReport) -> f64 {
    r.samples.iter().map(|s| s.ratio.ln()).sum::<f64>() / r.samples.len() as f64
}

fn mean_log_eps(r: &ExperimentReport) -> f64 {
    r.samples.iter().map(|s| s.eps.ln()).sum::<f64>() / r.samples.len() as f64
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_phase(
    curve: &str,
    j: i32,
    u: f64,
    dir: [f64; 2],
    lmin: f64,
    lmax: f64,
    points: usize,
    tolerance: f64,
) -> Result<Outcome> {
    let c = parse_curve(curve)?;
    if !(1.0..=2.0).contains(&u) {
        return Err(Error::Precondition(format!("u = {u} not in [1, 2]")));
    }
    if points < 2 || !(lmin > 0.0 && lmax > lmin) {
        return Err(Error::Precondition("need lmin > 0, lmax > lmin and at least 2 points".to_string()));
    }
    let t0 = PhasePoint { z: [0.0, 0.0, u], xi: dir, j }.validate(&c)?;
    let lambdas: Vec<f64> = (0..points)
        .map(|k| lmin * (lmax / lmin).powf(k as f64 / (points - 1) as f64))
        .collect();
    let fit = symbol_decay_fit(&c, j, u, dir, &lambdas, &OscQuad::default())?;
    let pass = (fit.fit.slope - fit.expected).abs() <= tolerance;
    let mut csv = String::from("lambda,abs_h\n");
    for (l, h) in &fit.samples {
        csv.push_str(&format!("{l},{h}\n"));
    }
    let summary = json!({
        "schema": SCHEMA,
        "curve": c.spec_string(),
        "j": j,
        "u": u,
        "dir": dir,
        "t0": t0,
        "slope": fit.fit.slope,
        "intercept": fit.fit.intercept,
        "stderr": fit.fit.stderr,
        "expected": fit.expected,
        "tolerance": tolerance,
        "pass": pass,
    });
    Ok(Outcome {
        files: vec![("phase.csv".to_string(), csv.clone().into_bytes()), ("phase.json".to_string(), to_json(&summary)?)],
        summary,
        csv,
        pass,
    })
}

/// Largest allowed finite-difference discrepancy and Gauss-map residual.
pub const RANK_FD_TOL: f64 = 1e-5;
pub const RANK_GAUSS_TOL: f64 = 1e-8;

pub fn cmd_rank(curve: &str, samples: usize, seed: u64) -> Result<Outcome> {
    let c = parse_curve(curve)?;
    if samples == 0 {
        return Err(Error::Precondition("samples must be positive".to_string()));
    }
    let pts = random_phase_points(&c, samples, seed)?;
    let mut csv = String::from("j,x1,x2,u,xi1,xi2,t0,rank_mixed,rank_xi,rank_cone,gauss_residual,fd_rel_error,ok\n");
    let mut good = 0;
    for p in &pts {
        let r = curvature_check(&c, p)?;
        let res = gauss_residual(&r);
        let ok = (r.ranks.mixed, r.ranks.xi, r.ranks.cone) == (2, 1, 1)
            && res < RANK_GAUSS_TOL
            && r.fd_rel_error < RANK_FD_TOL;
        good += ok as usize;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            p.j, p.z[0], p.z[1], p.z[2], p.xi[0], p.xi[1], r.t0, r.ranks.mixed, r.ranks.xi, r.ranks.cone, res,
            r.fd_rel_error, ok
        ));
    }
    let pass = good == pts.len();
    let summary = json!({
        "schema": SCHEMA,
        "curve": c.spec_string(),
        "samples": pts.len(),
        "seed": seed,
        "expected_ranks": [2, 1, 1],
        "matching": good,
        "pass": pass,
    });
    Ok(Outcome {
        files: vec![("rank.csv".to_string(), csv.clone().into_bytes()), ("rank.json".to_string(), to_json(&summary)?)],
        summary,
        csv,
        pass,
    })
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::CheckCurve { curve, n, samples, j_min } => cmd_check_curve(curve, *n, *samples, *j_min),
        Command::Region { omega, curve, resolution } => cmd_region(omega.as_deref(), curve.as_deref(), *resolution),
        Command::Sharpness { family, curve, p, q, pair, eps, delta, tolerance, set_nodes, cells_per_eps } => {
            let pair = parse_pair(p.as_deref(), q.as_deref(), pair.as_deref())?;
            cmd_sharpness(family, curve, &pair, eps.as_deref(), *delta, *tolerance, *set_nodes, *cells_per_eps)
        }
        Command::Phase { curve, j, u, dir, lmin, lmax, points, tolerance } => {
            cmd_phase(curve, *j, *u, parse_dir(dir)?, *lmin, *lmax, *points, *tolerance)
        }
        Command::Rank { curve, samples, seed } => cmd_rank(curve, *samples, *seed),
    }
}

/// Writes every file of `outcome` under `dir`, after all computation.
pub fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<()> {
    let io = |e: std::io::Error| Error::Internal(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for (name, bytes) in &outcome.files {
        fs::write(dir.join(name), bytes).map_err(io)?;
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Parse(format!("{THREADS_ENV}='{v}' is not a positive integer")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = configure_threads().and_then(|_| execute(cli)).and_then(|o| {
        if let Some(dir) = &cli.out {
            write_outputs(dir, &o)?;
        }
        Ok(o)
    });
    match result {
        Ok(o) => {
            let mut stdout = std::io::stdout().lock();
            let _ = match cli.format {
                Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&o.summary).unwrap_or_default()),
                Format::Csv => write!(stdout, "{}", o.csv),
            };
            if o.pass {
                0
            } else {
                EXIT_FAILED_CHECK
            }
        }
        Err(e) => {
            eprintln!("cavlab: {e}");
            e.exit_code()
        }
    }
}

/// Entry point of the binary: clap usage errors map to exit code 2.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocals() {
        assert_eq!(parse_reciprocal("1.5").unwrap(), Rational64::new(2, 3));
        assert_eq!(parse_reciprocal("3").unwrap(), Rational64::new(1, 3));
        assert_eq!(parse_reciprocal("inf").unwrap(), Rational64::from_integer(0));
        assert_eq!(parse_reciprocal("4/3").unwrap(), Rational64::new(3, 4));
        assert!(matches!(parse_reciprocal("0.5"), Err(Error::Parse(_))));
        assert!(matches!(parse_reciprocal("x"), Err(Error::Parse(_))));
    }

    #[test]
    fn directions() {
        assert_eq!(parse_dir("-2,1").unwrap(), [-2.0, 1.0]);
        assert!(parse_dir("1").is_err());
    }

    #[test]
    fn region_counts_shrink_with_omega() {
        let a = cmd_region(Some("2"), None, 60).unwrap();
        let b = cmd_region(Some("4"), None, 60).unwrap();
        assert!(b.summary["in_theorem1"].as_u64() < a.summary["in_theorem1"].as_u64());
        assert!(matches!(cmd_region(Some("inf"), None, 10), Err(Error::FlatCurve)));
    }

    #[test]
    fn region_script_mentions_vertices() {
        let s = region_script(2.0);
        for l in ["'O'", "'A'", "'D'", "'C'", "'M'", "region.csv"] {
            assert!(s.contains(l), "{l}");
        }
    }

    #[test]
    fn phase_rejects_same_sign() {
        let e = cmd_phase("kind=power d=2", 0, 1.0, [1.0, 1.0], 16.0, 4096.0, 9, 0.05).unwrap_err();
        assert_eq!(e.exit_code(), 5);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_from_args(["cavlab", "region", "--bogus"]), 2);
    }
}
