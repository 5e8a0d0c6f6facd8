//! The `caustics` command line: argument parsing, orchestration and
//! deterministic CSV/JSON output.
//!
//! Floats are printed with 17 significant digits in lowercase scientific
//! notation. Values that do not exist (an approximation outside its window,
//! an unrepresentable collapse) are empty CSV fields and JSON `null`.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 invalid input, 3 numerical
//! failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::legendre::{
    mode_u, ode_residual, sph_harm_sq, Ladder, LadderMember, LegendreEngine, MAX_DEGREE,
};
use crate::measures::{
    arcsine_limit, char_fn_addition, char_fn_direct, empirical_measure, integrate_against,
    is_decreasing_trend, mehler_heine_gap, TestFunction, MAX_MEASURE_DEGREE,
};
use crate::quadrature::gauss_legendre;
use crate::semiclassics::{
    action, airy_arg_rho, caustic_peak, caustic_scan, caustic_slope, fit_order, matching_gap,
    phi_at_airy_arg, LadderGeometry, PhiGrid, RhoConvention,
};
use crate::specfun::{airy, bessel_j0, log_gamma};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Gaps below this are treated as converged in trend verdicts.
pub const TREND_FLOOR: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "caustics",
    version,
    about = "Spherical harmonics near caustic latitude circles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the normalized associated Legendre function and the mode u_h.
    Legendre(LegendreArgs),
    /// Compare the exact mode with its WKB and Airy approximations along a ladder.
    Scan(ScanArgs),
    /// Empirical measures on a latitude circle and their arcsine limit.
    Measure(MeasureArgs),
    /// Run the built-in invariant suite at reduced sizes.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LegendreArgs {
    /// Degree.
    #[arg(long = "N")]
    pub n: u64,
    /// Order.
    #[arg(long)]
    pub m: u64,
    /// Evaluation points in [-1, 1].
    #[arg(long, allow_negative_numbers = true, conflicts_with = "phi")]
    pub x: Vec<f64>,
    /// Evaluation angles in [0, pi].
    #[arg(long)]
    pub phi: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub m0: u64,
    #[arg(long = "N0")]
    pub n0: u64,
    /// Ladder indices (repeatable).
    #[arg(long, required = true)]
    pub k: Vec<u64>,
    /// Fixed angles (repeatable), or `caustic:n`.
    #[arg(long, conflicts_with = "caustic")]
    pub phi: Vec<String>,
    /// Use the n angles phi_+ - j h^{2/3}, j = 1..n.
    #[arg(long)]
    pub caustic: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Degrees (repeatable).
    #[arg(long = "N", required = true)]
    pub n: Vec<u64>,
    #[arg(long)]
    pub c0: f64,
    /// Test functions: one, t2, t4 or cos:<s> (repeatable).
    #[arg(long)]
    pub f: Vec<String>,
    /// Characteristic-function arguments (repeatable).
    #[arg(long, allow_negative_numbers = true)]
    pub s: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub output: OutputArgs,
    /// Scale the recurrence coefficients by 1 + REL to check that the suite
    /// notices.
    #[arg(long, hide = true)]
    pub corrupt_recurrence: Option<f64>,
}

/// Parses `args` (including the program name) and runs the command, writing
/// the report to `stdout` or the `--out` file and diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let (outcome, output) = match &cli.command {
        Command::Legendre(a) => (cmd_legendre(a), &a.output),
        Command::Scan(a) => (cmd_scan(a), &a.output),
        Command::Measure(a) => (cmd_measure(a), &a.output),
        Command::Selftest(a) => (cmd_selftest(a), &a.output),
    };
    let (text, code) = match outcome {
        Ok(report) => report,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &output.out {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_USAGE;
    }
    code
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Domain(_) | Error::InvalidData(_) => EXIT_USAGE,
        Error::Accuracy { .. } | Error::Proximity { .. } => EXIT_NUMERIC,
    }
}

/// Float formatted with 17 significant digits; empty when not finite.
pub fn sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// A float that serializes as a bare JSON number in [`sci`] format, or `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(sci(self.0))
                .map_err(serde::ser::Error::custom)?
                .serialize(serializer)
        } else {
            serializer.serialize_none()
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct LegendreRow {
    #[serde(rename = "N")]
    n: u64,
    m: u64,
    x: Sci,
    phi: Sci,
    mantissa: Sci,
    exp10: i64,
    value: Sci,
    mode_u: Sci,
}

#[derive(Serialize)]
struct LegendreReport {
    command: &'static str,
    rows: Vec<LegendreRow>,
}

fn check_order_degree(n: u64, m: u64) -> crate::Result<()> {
    if m > n {
        return Err(Error::domain(format!(
            "order exceeds degree (m={m}, N={n})"
        )));
    }
    if n > MAX_DEGREE {
        return Err(Error::invalid(format!("degree {n} exceeds {MAX_DEGREE}")));
    }
    Ok(())
}

pub fn cmd_legendre(args: &LegendreArgs) -> crate::Result<(String, i32)> {
    check_order_degree(args.n, args.m)?;
    if args.x.is_empty() && args.phi.is_empty() {
        return Err(Error::invalid("give at least one --x or --phi"));
    }
    let engine = LegendreEngine::exact();
    let member = LadderMember::new(args.m, args.n)?;
    let mut rows = Vec::new();
    let points: Vec<(f64, f64, bool)> = if args.phi.is_empty() {
        args.x.iter().map(|&x| (x, x.acos(), false)).collect()
    } else {
        args.phi.iter().map(|&phi| (phi.cos(), phi, true)).collect()
    };
    for (x, phi, by_angle) in points {
        let value = if by_angle {
            engine.eval_angle(args.n, args.m, phi)?
        } else {
            engine.eval(args.n, args.m, x)?
        };
        let collapsed = if value.is_representable() {
            value.to_f64()
        } else {
            f64::NAN
        };
        let u = if phi > 0.0 && phi < std::f64::consts::PI {
            let u = mode_u(&member, phi)?;
            if u.is_representable() {
                u.to_f64()
            } else {
                f64::NAN
            }
        } else {
            f64::NAN
        };
        rows.push(LegendreRow {
            n: args.n,
            m: args.m,
            x: Sci(x),
            phi: Sci(phi),
            mantissa: Sci(value.mantissa()),
            exp10: value.exp10(),
            value: Sci(collapsed),
            mode_u: Sci(u),
        });
    }
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("N,m,x,phi,mantissa,exp10,value,mode_u\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.n,
                    r.m,
                    sci(r.x.0),
                    sci(r.phi.0),
                    sci(r.mantissa.0),
                    r.exp10,
                    sci(r.value.0),
                    sci(r.mode_u.0)
                );
            }
            s
        }
        Format::Json => to_json(&LegendreReport {
            command: "legendre",
            rows,
        }),
    };
    Ok((text, EXIT_OK))
}

#[derive(Serialize)]
struct ScanJsonRow {
    k: u64,
    #[serde(rename = "N")]
    n: u64,
    m: u64,
    h: Sci,
    phi: Sci,
    exact: Sci,
    wkb: Sci,
    airy: Sci,
    err_wkb: Sci,
    err_airy: Sci,
}

#[derive(Serialize)]
struct ScanSign {
    k: u64,
    wkb: Option<Sci>,
    airy: Option<Sci>,
}

#[derive(Serialize)]
struct ScanReport {
    command: &'static str,
    m0: u64,
    #[serde(rename = "N0")]
    n0: u64,
    c: Sci,
    fitted_order_wkb: Option<Sci>,
    fitted_order_airy: Option<Sci>,
    sign_consistent: bool,
    signs: Vec<ScanSign>,
    rows: Vec<ScanJsonRow>,
}

fn parse_phi_spec(args: &ScanArgs) -> crate::Result<PhiGrid> {
    if let Some(n) = args.caustic {
        if n == 0 {
            return Err(Error::invalid("--caustic needs at least one point"));
        }
        return Ok(PhiGrid::Caustic(n));
    }
    if args.phi.is_empty() {
        return Err(Error::invalid("give --phi values or --caustic n"));
    }
    if let [single] = args.phi.as_slice() {
        if let Some(rest) = single.strip_prefix("caustic:") {
            let n: usize = rest
                .parse()
                .map_err(|_| Error::invalid(format!("bad point count in '{single}'")))?;
            if n == 0 {
                return Err(Error::invalid("caustic:n needs n >= 1"));
            }
            return Ok(PhiGrid::Caustic(n));
        }
    }
    let angles = args
        .phi
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::invalid(format!("bad angle '{p}'")))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(PhiGrid::Fixed(angles))
}

pub fn cmd_scan(args: &ScanArgs) -> crate::Result<(String, i32)> {
    let ladder = Ladder::new(args.m0, args.n0)?;
    if args.m0 == 0 {
        return Err(Error::invalid("scan needs m0 >= 1 so that 0 < c < 1"));
    }
    let grid = parse_phi_spec(args)?;
    let mut ks = args.k.clone();
    ks.sort_unstable();
    ks.dedup();
    let table = caustic_scan(&ladder, &ks, &grid)?;
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("k,N,m,h,phi,exact,wkb,airy,err_wkb,err_airy\n");
            for r in &table.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.k,
                    r.n,
                    r.m,
                    sci(r.h),
                    sci(r.phi),
                    sci(r.exact),
                    sci(r.wkb),
                    sci(r.airy),
                    sci(r.err_wkb),
                    sci(r.err_airy)
                );
            }
            s
        }
        Format::Json => to_json(&ScanReport {
            command: "scan",
            m0: args.m0,
            n0: args.n0,
            c: Sci(ladder.c()),
            fitted_order_wkb: table.fitted_order_wkb.map(Sci),
            fitted_order_airy: table.fitted_order_airy.map(Sci),
            sign_consistent: table.sign_consistent,
            signs: table
                .signs
                .iter()
                .map(|s| ScanSign {
                    k: s.k,
                    wkb: s.wkb.map(Sci),
                    airy: s.airy.map(Sci),
                })
                .collect(),
            rows: table
                .rows
                .iter()
                .map(|r| ScanJsonRow {
                    k: r.k,
                    n: r.n,
                    m: r.m,
                    h: Sci(r.h),
                    phi: Sci(r.phi),
                    exact: Sci(r.exact),
                    wkb: Sci(r.wkb),
                    airy: Sci(r.airy),
                    err_wkb: Sci(r.err_wkb),
                    err_airy: Sci(r.err_airy),
                })
                .collect(),
        }),
    };
    Ok((text, EXIT_OK))
}

#[derive(Serialize)]
struct MeasureRow {
    #[serde(rename = "N")]
    n: u64,
    f_or_s: String,
    empirical: Sci,
    limit: Sci,
    gap: Sci,
}

#[derive(Serialize)]
struct Trend {
    f: String,
    gaps: Vec<Sci>,
    decreasing: bool,
}

#[derive(Serialize)]
struct MeasureReport {
    command: &'static str,
    c0: Sci,
    rows: Vec<MeasureRow>,
    trends: Vec<Trend>,
}

pub fn cmd_measure(args: &MeasureArgs) -> crate::Result<(String, i32)> {
    let mut degrees = args.n.clone();
    degrees.sort_unstable();
    degrees.dedup();
    if let Some(&n) = degrees.iter().find(|&&n| n == 0 || n > MAX_MEASURE_DEGREE) {
        return Err(Error::invalid(format!(
            "N must lie in [1, {MAX_MEASURE_DEGREE}], got {n}"
        )));
    }
    if !(args.c0 > 0.0 && args.c0 < 1.0) {
        return Err(Error::invalid(format!(
            "c0 must lie in (0, 1), got {}",
            args.c0
        )));
    }
    if let Some(s) = args.s.iter().find(|s| !s.is_finite()) {
        return Err(Error::invalid(format!("bad s value {s}")));
    }
    let mut functions = args
        .f
        .iter()
        .map(|f| f.parse::<TestFunction>())
        .collect::<crate::Result<Vec<_>>>()?;
    if functions.is_empty() && args.s.is_empty() {
        functions = vec![
            TestFunction::One,
            TestFunction::T2,
            TestFunction::T4,
            TestFunction::Cos(3.0),
        ];
    }
    let limits = functions
        .iter()
        .map(|f| arcsine_limit(args.c0, |t| f.eval(t)))
        .collect::<crate::Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut gaps = vec![Vec::new(); functions.len()];
    for &n in &degrees {
        let mu = empirical_measure(n, args.c0)?;
        for (i, f) in functions.iter().enumerate() {
            let emp = integrate_against(&mu, |t| f.eval(t));
            let gap = (emp - limits[i]).abs();
            gaps[i].push(gap);
            rows.push(MeasureRow {
                n,
                f_or_s: f.to_string(),
                empirical: Sci(emp),
                limit: Sci(limits[i]),
                gap: Sci(gap),
            });
        }
        for &s in &args.s {
            let direct = char_fn_direct(&mu, s).re;
            let addition = char_fn_addition(n, args.c0, s)?;
            rows.push(MeasureRow {
                n,
                f_or_s: format!("s:{s}"),
                empirical: Sci(direct),
                limit: Sci(addition),
                gap: Sci((direct - addition).abs()),
            });
        }
    }
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("N,f_or_s,empirical,limit,gap\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.n,
                    r.f_or_s,
                    sci(r.empirical.0),
                    sci(r.limit.0),
                    sci(r.gap.0)
                );
            }
            s
        }
        Format::Json => to_json(&MeasureReport {
            command: "measure",
            c0: Sci(args.c0),
            trends: functions
                .iter()
                .zip(&gaps)
                .map(|(f, g)| Trend {
                    f: f.to_string(),
                    gaps: g.iter().copied().map(Sci).collect(),
                    decreasing: is_decreasing_trend(g, TREND_FLOOR),
                })
                .collect(),
            rows,
        }),
    };
    Ok((text, EXIT_OK))
}

/// One verdict of the self-test suite.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Sci,
    pub threshold: Sci,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value: Sci(value),
            threshold: Sci(threshold),
            detail: format!("value <= {}", sci(threshold)),
        }
    }

    fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            passed: (lo..=hi).contains(&value),
            value: Sci(value),
            threshold: Sci(hi),
            detail: format!("value in [{}, {}]", sci(lo), sci(hi)),
        }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= threshold,
            value: Sci(value),
            threshold: Sci(threshold),
            detail: format!("value >= {}", sci(threshold)),
        }
    }

    fn flag(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            value: Sci(f64::NAN),
            threshold: Sci(f64::NAN),
            detail: detail.into(),
        }
    }

    fn failed(name: &str, e: &Error) -> Self {
        Check::flag(name, false, format!("error: {e}"))
    }
}

#[derive(Serialize)]
struct SelftestReport {
    command: &'static str,
    passed: bool,
    checks: Vec<Check>,
}

pub fn cmd_selftest(args: &SelftestArgs) -> crate::Result<(String, i32)> {
    let engine = match args.corrupt_recurrence {
        Some(rel) if rel.is_finite() => LegendreEngine::with_corrupted_coefficient(rel),
        Some(rel) => return Err(Error::invalid(format!("bad corruption level {rel}"))),
        None => LegendreEngine::exact(),
    };
    let checks = selftest_checks(engine);
    let passed = checks.iter().all(|c| c.passed);
    let code = if passed { EXIT_OK } else { EXIT_SELFTEST };
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&SelftestReport {
            command: "selftest",
            passed,
            checks,
        }),
        Format::Csv => {
            let mut s = String::from("name,passed,value,threshold,detail\n");
            for c in &checks {
                let _ = writeln!(
                    s,
                    "{},{},{},{},\"{}\"",
                    c.name,
                    c.passed,
                    sci(c.value.0),
                    sci(c.threshold.0),
                    c.detail.replace('"', "'")
                );
            }
            s
        }
    };
    Ok((text, code))
}

fn guarded(name: &str, body: impl FnOnce() -> crate::Result<Check>) -> Check {
    body().unwrap_or_else(|e| Check::failed(name, &e))
}

/// The invariant suite behind `caustics selftest`, in a fixed order.
///
/// `engine` evaluates the Legendre functions used by the orthonormality,
/// orthogonality and parity checks.
pub fn selftest_checks(engine: LegendreEngine) -> Vec<Check> {
    use std::f64::consts::PI;
    let mut out = Vec::new();

    out.push(guarded("quadrature_normalization", || {
        let rule = gauss_legendre(64)?;
        let total: f64 = rule.weights().iter().sum();
        let odd = rule.apply(|x| x.powi(7));
        Ok(Check::at_most(
            "quadrature_normalization",
            (total - 2.0).abs().max(odd.abs()),
            1e-13,
        ))
    }));

    out.push(guarded("airy_origin", || {
        let g13 = log_gamma(1.0 / 3.0)?.exp();
        let g23 = log_gamma(2.0 / 3.0)?.exp();
        let ai0 = 1.0 / (3f64.powf(2.0 / 3.0) * g23);
        let aip0 = -1.0 / (3f64.powf(1.0 / 3.0) * g13);
        let pair = airy(0.0)?;
        let err = (pair.ai - ai0).abs().max((pair.ai_prime - aip0).abs());
        Ok(Check::at_most("airy_origin", err, 1e-12))
    }));

    out.push(guarded("airy_branch_continuity", || {
        let mut worst: f64 = 0.0;
        for x0 in [-8.0f64, 2.0, 8.0] {
            let a = airy(x0 * (1.0 - 1e-12))?;
            let b = airy(x0 * (1.0 + 1e-12))?;
            let scale = a.ai.abs().max(1e-300);
            worst = worst.max((a.ai - b.ai).abs() / scale);
        }
        Ok(Check::at_most("airy_branch_continuity", worst, 1e-8))
    }));

    out.push(guarded("j0_defining_integral", || {
        let mut worst: f64 = 0.0;
        for s in [1.0f64, 5.0, 20.0] {
            // composite trapezoid on a periodic integrand converges geometrically
            let n = 2048;
            let sum: f64 = (0..n)
                .map(|i| (s * (2.0 * PI * i as f64 / n as f64).sin()).cos())
                .sum();
            worst = worst.max((bessel_j0(s)? - sum / n as f64).abs());
        }
        Ok(Check::at_most("j0_defining_integral", worst, 1e-10))
    }));

    let grid = [5u64, 50];
    out.push(guarded("legendre_orthonormality", || {
        let mut worst: f64 = 0.0;
        for n in grid {
            let rule = gauss_legendre(n as usize + 1)?;
            for m in [0, n / 2, n] {
                let norm = rule.apply(|x| {
                    engine
                        .eval(n, m, x)
                        .map(|v| v.to_f64().powi(2))
                        .unwrap_or(f64::NAN)
                });
                if norm.is_nan() {
                    return Err(Error::InvalidData(format!(
                        "non-finite norm at N={n}, m={m}"
                    )));
                }
                worst = worst.max((norm - 1.0).abs());
            }
        }
        Ok(Check::at_most("legendre_orthonormality", worst, 1e-8))
    }));

    out.push(guarded("legendre_orthogonality", || {
        let mut worst: f64 = 0.0;
        for n in grid {
            for m in [0, n / 2, n] {
                let other = n + 3;
                let rule = gauss_legendre((n + other) as usize / 2 + 1)?;
                let cross = rule.apply(|x| {
                    let a = engine.eval(n, m, x).map(|v| v.to_f64()).unwrap_or(f64::NAN);
                    let b = engine
                        .eval(other, m, x)
                        .map(|v| v.to_f64())
                        .unwrap_or(f64::NAN);
                    a * b
                });
                worst = worst.max(cross.abs());
            }
        }
        Ok(Check::at_most("legendre_orthogonality", worst, 1e-8))
    }));

    out.push(guarded("legendre_parity_positivity", || {
        let mut ok = true;
        for n in grid {
            for m in [0, n / 2, n] {
                let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
                for x in [0.1, 0.45, 0.8] {
                    let a = engine.eval(n, m, x)?.to_f64();
                    let b = engine.eval(n, m, -x)?.to_f64();
                    ok &= (b - sign * a).abs() <= 1e-12 * a.abs().max(1e-300);
                }
                ok &= engine.eval(n, m, 1.0 - 1e-6)?.signum() > 0.0;
            }
        }
        Ok(Check::flag(
            "legendre_parity_positivity",
            ok,
            "parity to 1e-12 and P > 0 at 1 - 1e-6",
        ))
    }));

    out.push(guarded("ode_residual", || {
        let r = ode_residual(50, 20, 0.3, 1e-4)?;
        Ok(Check::at_most("ode_residual", r.residual, 1e-5))
    }));

    out.push(guarded("addition_theorem_sum", || {
        let n = 100u64;
        let mut worst: f64 = 0.0;
        for phi in [0.4, 1.3, 2.6] {
            let sum: f64 = (-(n as i64)..=n as i64)
                .map(|m| sph_harm_sq(n, m, phi))
                .sum::<crate::Result<f64>>()?;
            let want = (2 * n + 1) as f64 / (4.0 * PI);
            worst = worst.max((sum / want - 1.0).abs());
        }
        Ok(Check::at_most("addition_theorem_sum", worst, 1e-9))
    }));

    out.push(guarded("loop_action", || {
        let mut worst: f64 = 0.0;
        for c in [0.4, 2.0 / 3.0, 0.8] {
            let g = LadderGeometry::new(c)?;
            worst = worst.max((2.0 * action(&g, g.phi_minus())? - 2.0 * PI * (1.0 - c)).abs());
        }
        Ok(Check::at_most("loop_action", worst, 1e-10))
    }));

    out.push(guarded("caustic_slope", || {
        let g = LadderGeometry::new(2.0 / 3.0)?;
        let d = 1e-7;
        let slope = airy_arg_rho(&g, g.phi_plus() - d)? / d;
        Ok(Check::at_most(
            "caustic_slope",
            (slope - caustic_slope(&g)).abs(),
            1e-6,
        ))
    }));

    let ladder = Ladder::new(1, 1).expect("valid ladder");
    let ks = [31u64, 63, 127, 255];
    out.push(guarded("wkb_order", || {
        let t = caustic_scan(&ladder, &ks, &PhiGrid::Fixed(vec![1.9]))?;
        let order = t.fitted_order_wkb.unwrap_or(f64::NAN);
        Ok(Check::within("wkb_order", order, 0.8, 1.3))
    }));

    out.push(guarded("airy_order", || {
        let t = caustic_scan(&ladder, &ks, &PhiGrid::Caustic(4))?;
        let order = t.fitted_order_airy.unwrap_or(f64::NAN);
        Ok(Check::at_least("airy_order", order, 0.2))
    }));

    out.push(guarded("airy_relative_error", || {
        let t = caustic_scan(&ladder, &[255], &PhiGrid::Caustic(4))?;
        let err = t.rows.iter().map(|r| r.err_airy).fold(0.0, f64::max);
        let peak = t.rows.iter().map(|r| r.exact.abs()).fold(0.0, f64::max);
        Ok(Check::at_most("airy_relative_error", err / peak, 0.15))
    }));

    out.push(guarded("wkb_airy_matching", || {
        let verdict = matching_experiment(&ladder, &[63, 127, 255, 511], 10.0)?;
        let mut check = Check::at_least("wkb_airy_matching", verdict.order_three_halves, 0.2);
        check.passed = verdict.passed();
        check.detail = format!(
            "order >= 2e-1 with rho = ((3/2)A)^(2/3); gaps {:?}; alternative coefficient order {} gaps {:?}",
            verdict.gaps_three_halves.iter().map(|g| sci(*g)).collect::<Vec<_>>(),
            sci(verdict.order_four_thirds),
            verdict.gaps_four_thirds.iter().map(|g| sci(*g)).collect::<Vec<_>>(),
        );
        Ok(check)
    }));

    out.push(guarded("peak_growth", || {
        let g = LadderGeometry::from_ladder(&ladder)?;
        let pairs = ks
            .iter()
            .map(|&k| {
                let member = ladder.member(k)?;
                Ok((member.h, caustic_peak(&member, &g)?.1))
            })
            .collect::<crate::Result<Vec<_>>>()?;
        Ok(Check::within(
            "peak_growth",
            -fit_order(&pairs)?,
            0.13,
            0.20,
        ))
    }));

    out.push(guarded("forbidden_region", || {
        let c = ladder.c();
        let phi = PI - (c - 0.1).asin();
        let mut ok = true;
        let mut prev: Option<(f64, f64)> = None;
        for k in ks {
            let member = ladder.member(k)?;
            let u = mode_u(&member, phi)?.abs();
            if let Some((h_prev, u_prev)) = prev {
                let ratio = (u.log10_abs() - u_prev) * std::f64::consts::LN_10;
                ok &= ratio < 3.0 * (member.h / h_prev).ln();
            }
            prev = Some((member.h, u.log10_abs()));
        }
        Ok(Check::flag(
            "forbidden_region",
            ok,
            "successive ratios below (h'/h)^3",
        ))
    }));

    out.push(guarded("measure_mass_and_char_fn", || {
        let mu = empirical_measure(500, 0.8)?;
        let mut worst = (mu.total_mass() - 1.0).abs();
        for s in [1.0, 5.0, 20.0] {
            worst = worst.max((char_fn_direct(&mu, s).re - char_fn_addition(500, 0.8, s)?).abs());
        }
        Ok(Check::at_most("measure_mass_and_char_fn", worst, 1e-9))
    }));

    out.push(guarded("weak_limit", || {
        let degrees = [250u64, 500, 1000];
        let mut ok = true;
        let mut last_gap: f64 = 0.0;
        for c0 in [0.5, 0.8] {
            let measures = degrees
                .iter()
                .map(|&n| empirical_measure(n, c0))
                .collect::<crate::Result<Vec<_>>>()?;
            for f in [
                TestFunction::One,
                TestFunction::T2,
                TestFunction::T4,
                TestFunction::Cos(3.0),
            ] {
                let limit = arcsine_limit(c0, |t| f.eval(t))?;
                let gaps: Vec<f64> = measures
                    .iter()
                    .map(|mu| (integrate_against(mu, |t| f.eval(t)) - limit).abs())
                    .collect();
                ok &= is_decreasing_trend(&gaps, TREND_FLOOR);
                last_gap = last_gap.max(*gaps.last().expect("nonempty"));
            }
        }
        let mut check = Check::at_most("weak_limit", last_gap, 0.02);
        check.passed &= ok;
        check.detail.push_str(" at N = 1000 with decreasing trend");
        Ok(check)
    }));

    out.push(guarded("support_concentration", || {
        let mu = empirical_measure(1000, 0.8)?;
        Ok(Check::at_most(
            "support_concentration",
            mu.mass_outside(0.9),
            1e-6,
        ))
    }));

    out.push(guarded("mehler_heine", || {
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for z in [1.0, 5.0, 10.0] {
            let far = mehler_heine_gap(2000, z)?;
            ok &= far <= mehler_heine_gap(200, z)?;
            worst = worst.max(far);
        }
        let mut check = Check::at_most("mehler_heine", worst, 0.01);
        check.passed &= ok;
        Ok(check)
    }));

    out
}

/// WKB/Airy matching at a fixed Airy argument along a ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingVerdict {
    pub hs: Vec<f64>,
    pub gaps_three_halves: Vec<f64>,
    pub gaps_four_thirds: Vec<f64>,
    pub order_three_halves: f64,
    pub order_four_thirds: f64,
}

impl MatchingVerdict {
    /// The consistent coefficient must match with order at least 0.2 and gap
    /// below `h^{1/3}`; the alternative must fail that same test.
    pub fn three_halves_matches(&self) -> bool {
        self.order_three_halves >= 0.2
            && self
                .hs
                .iter()
                .zip(&self.gaps_three_halves)
                .all(|(h, g)| *g <= h.cbrt())
    }

    pub fn four_thirds_fails(&self) -> bool {
        self.order_four_thirds < 0.2
            || self
                .hs
                .iter()
                .zip(&self.gaps_four_thirds)
                .any(|(h, g)| *g > h.cbrt())
    }

    pub fn passed(&self) -> bool {
        self.three_halves_matches() && self.four_thirds_fails()
    }
}

/// Relative WKB/Airy gaps at the angle where `h^{-2/3} rho = t` for each `k`.
pub fn matching_experiment(ladder: &Ladder, ks: &[u64], t: f64) -> crate::Result<MatchingVerdict> {
    let g = LadderGeometry::from_ladder(ladder)?;
    let mut hs = Vec::new();
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for &k in ks {
        let member = ladder.member(k)?;
        let phi = phi_at_airy_arg(&member, &g, t)?;
        hs.push(member.h);
        good.push(matching_gap(&member, &g, phi, RhoConvention::ThreeHalves)?);
        bad.push(matching_gap(&member, &g, phi, RhoConvention::FourThirds)?);
    }
    let pairs = |gaps: &[f64]| {
        hs.iter()
            .copied()
            .zip(gaps.iter().copied())
            .collect::<Vec<_>>()
    };
    Ok(MatchingVerdict {
        order_three_halves: fit_order(&pairs(&good))?,
        order_four_thirds: fit_order(&pairs(&bad))?,
        hs,
        gaps_three_halves: good,
        gaps_four_thirds: bad,
    })
}
