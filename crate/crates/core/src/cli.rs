//! Command-line front end. JSON is the canonical output and CSV a flat
//! projection of it; rationals are always written as strings.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, int, parse_rational};
use crate::basis::special_basis;
use crate::config::SystemConfig;
use crate::dynsys::{parse_lift, DynSystem, EscapeRate};
use crate::error::{Error, Result};
use crate::experiments::{
    adelic_report, lehmer_scan, multiples_bound, multiples_search, LattesSystem, SCHEMA,
};
use crate::fekete::{fekete_search, SphereChart, DEFAULT_RESTARTS};
use crate::green::{dbn_witness, green_value, hadamard_envelope, GreenValue};
use crate::heights::{canonical_height, weil_height};
use crate::homopoly::ProjPoint;
use crate::macaulay::RConvention;
use crate::pf::{LogAbs, Place};

pub const THREADS_ENV: &str = "GREENFIELD_THREADS";

#[derive(Parser, Debug)]
#[command(name = "greenfield", version, about = "Escape rates, resultants and transfinite-diameter bounds")]
pub struct Cli {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Override the system file's resultant convention.
    #[arg(long, global = true)]
    convention: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact Macaulay resultant of the coordinate forms.
    Resultant { system: PathBuf },
    /// Canonical height of a rational point.
    Height {
        system: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long)]
        tol: Option<f64>,
        /// Naive Weil height instead.
        #[arg(long)]
        weil: bool,
    },
    /// Local escape rate of a lift.
    Escape {
        system: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long, default_value = "inf")]
        place: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// The special basis H(n) with provenance.
    Basis {
        system: PathBuf,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
    },
    /// Green's function, witness and envelope for an exact tuple.
    Green {
        system: PathBuf,
        #[arg(long)]
        n: u32,
        /// Semicolon-separated lifts, e.g. "1,0;0,1;1,1".
        #[arg(long)]
        points: String,
        #[arg(long, default_value = "inf")]
        place: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Archimedean Fekete search on P^1.
    Fekete {
        system: PathBuf,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },
    /// Envelopes and witnesses at every relevant place.
    AdelicReport {
        system: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        n: Vec<u32>,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Greedy rank scan of x(kP) on a Lattès system.
    Multiples {
        /// Optional system file; it must hold the Lattès map of the curve.
        system: Option<PathBuf>,
        #[arg(long)]
        curve: String,
        #[arg(long)]
        point: String,
        #[arg(long)]
        n: u32,
    },
    /// Heights and degrees of preimages of x(P).
    LehmerScan {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        point: String,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        depths: Vec<u32>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Runs the embedded invariant suite.
    Selftest,
}

/// An exact or numeric tuple as written in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tuple {
    Exact(Vec<Vec<String>>),
    Numeric(Vec<Vec<[f64; 2]>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub schema: String,
    pub n: u32,
    pub place: Place,
    pub c: usize,
    /// `None` for a singular tuple.
    pub witness_logd: Option<f64>,
    pub envelope_logd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub green: Option<GreenValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<usize>,
    pub tuple: Tuple,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub schema: String,
    pub place: Place,
    pub point: Vec<String>,
    pub approx: f64,
    pub error: f64,
    pub escape: EscapeRate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisElementReport {
    pub provenance: String,
    pub form: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    pub n: u32,
    pub c: usize,
    pub candidates_scanned: usize,
    pub relaxed: bool,
    pub elements: Vec<BasisElementReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Minimal CSV writer: every field quoted when it needs to be.
fn csv<const W: usize>(header: [&str; W], rows: impl IntoIterator<Item = [String; W]>) -> String {
    fn field(s: &str) -> String {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.iter().map(|s| field(s)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn tuple_exact(points: &[ProjPoint]) -> Tuple {
    Tuple::Exact(
        points
            .iter()
            .map(|p| p.as_exact().unwrap_or_default().iter().map(format_rational).collect())
            .collect(),
    )
}

fn parse_place(text: &str) -> Result<Place> {
    text.parse()
}

fn parse_pair(text: &str, what: &str) -> Result<(BigRational, BigRational)> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::parse(format!("{what} needs two comma-separated rationals")));
    }
    Ok((parse_rational(parts[0])?, parse_rational(parts[1])?))
}

fn lattes_from(curve: &str, point: &str) -> Result<LattesSystem> {
    let (a, b) = parse_pair(curve, "--curve")?;
    let (x, y) = parse_pair(point, "--point")?;
    LattesSystem::new(a, b, x, y)
}

struct Ctx {
    convention: Option<RConvention>,
}

impl Ctx {
    fn load(&self, path: &Path) -> Result<(SystemConfig, DynSystem)> {
        let mut cfg = SystemConfig::load(path)?;
        if let Some(c) = self.convention {
            cfg.r_convention = c;
        }
        let sys = cfg.build()?;
        Ok((cfg, sys))
    }
}

/// `(json, csv)` for one invocation.
fn execute(cli: &Cli) -> Result<(String, String)> {
    let ctx = Ctx {
        convention: cli.convention.as_deref().map(str::parse).transpose()?,
    };
    let json = |v: &dyn erased::Json| v.to_json();
    match &cli.command {
        Command::Resultant { system } => {
            let (_, sys) = ctx.load(system)?;
            let r = format_rational(sys.resultant());
            Ok((format!("{r}\n"), csv(["resultant"], [[r]])))
        }
        Command::Height {
            system,
            point,
            tol,
            weil,
        } => {
            let (cfg, sys) = ctx.load(system)?;
            let p = parse_lift(point, sys.nvars())?;
            let h = if *weil {
                weil_height(&p)?
            } else {
                canonical_height(&sys, &p, tol.unwrap_or(cfg.tol))?
            };
            let rows: Vec<[String; 3]> = h
                .local_profile
                .iter()
                .map(|(v, m)| [v.to_string(), m.value().to_string(), m.render()])
                .chain([["total".into(), h.value.to_string(), h.total.render()]])
                .collect();
            Ok((json(&h), csv(["place", "value", "exact"], rows)))
        }
        Command::Escape {
            system,
            point,
            place,
            tol,
        } => {
            let (cfg, sys) = ctx.load(system)?;
            let p = parse_lift(point, sys.nvars())?;
            let v = parse_place(place)?;
            let e = sys.escape_rate(&v, &p, tol.unwrap_or(cfg.tol))?;
            let r = EscapeReport {
                schema: SCHEMA.into(),
                place: v,
                point: p.as_exact().unwrap_or_default().iter().map(format_rational).collect(),
                approx: e.approx(),
                error: e.err(),
                escape: e,
            };
            let row = [
                r.place.to_string(),
                r.approx.to_string(),
                r.error.to_string(),
                r.escape.value.render(),
                r.escape.steps.to_string(),
            ];
            Ok((json(&r), csv(["place", "value", "error", "exact", "steps"], [row])))
        }
        Command::Basis { system, n } => {
            let (_, sys) = ctx.load(system)?;
            let reports = n
                .iter()
                .map(|&n| {
                    let b = special_basis(&sys, n)?;
                    Ok(BasisReport {
                        n,
                        c: b.len(),
                        candidates_scanned: b.candidates_scanned,
                        relaxed: b.relaxed,
                        elements: b
                            .elements
                            .iter()
                            .map(|e| BasisElementReport {
                                provenance: e.provenance.to_string(),
                                form: e.expanded.to_string(),
                            })
                            .collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = reports.iter().flat_map(|r| {
                r.elements
                    .iter()
                    .map(move |e| [r.n.to_string(), e.provenance.clone(), e.form.clone()])
            });
            let c = csv(["n", "provenance", "form"], rows);
            Ok((json(&reports), c))
        }
        Command::Green {
            system,
            n,
            points,
            place,
            tol,
        } => {
            let (cfg, sys) = ctx.load(system)?;
            let tol = tol.unwrap_or(cfg.tol);
            let v = parse_place(place)?;
            let lifts = points
                .split(';')
                .map(|t| parse_lift(t.trim(), sys.nvars()))
                .collect::<Result<Vec<_>>>()?;
            let basis = special_basis(&sys, *n)?;
            if lifts.len() != basis.len() {
                return Err(Error::DimensionMismatch {
                    expected: basis.len(),
                    found: lifts.len(),
                });
            }
            let witness = match dbn_witness(&sys, &basis, &lifts, &v, tol)? {
                LogAbs::Finite(m) => Some(m.value()),
                LogAbs::MinusInfinity => None,
            };
            let g = green_value(&sys, &basis, &lifts, &v, tol)?;
            let nc = (*n as usize * basis.len()) as f64;
            let r = WitnessReport {
                schema: SCHEMA.into(),
                n: *n,
                place: v.clone(),
                c: basis.len(),
                witness_logd: witness,
                envelope_logd: hadamard_envelope(&sys, *n, sys.julia_radius_log(&v)?, &v) / nc,
                green: Some(g),
                evaluations: None,
                tuple: tuple_exact(&lifts),
            };
            Ok((json(&r), witness_csv(std::slice::from_ref(&r))))
        }
        Command::Fekete {
            system,
            n,
            budget,
            seed,
            restarts,
        } => {
            let (cfg, sys) = ctx.load(system)?;
            let chart = SphereChart::new(&sys)?;
            let r_log = sys.julia_radius_log(&Place::Archimedean)?;
            let reports = n
                .iter()
                .map(|&n| {
                    let basis = special_basis(&sys, n)?;
                    let f = fekete_search(&basis, &chart, *budget, seed.unwrap_or(cfg.seed), *restarts)?;
                    let nc = (n as usize * basis.len()) as f64;
                    Ok(WitnessReport {
                        schema: SCHEMA.into(),
                        n,
                        place: Place::Archimedean,
                        c: basis.len(),
                        witness_logd: Some(f.witness),
                        envelope_logd: hadamard_envelope(&sys, n, r_log, &Place::Archimedean) / nc,
                        green: None,
                        evaluations: Some(f.evaluations),
                        tuple: Tuple::Numeric(f.lifts),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((json(&reports), witness_csv(&reports)))
        }
        Command::AdelicReport {
            system,
            n,
            budget,
            seed,
        } => {
            let (cfg, sys) = ctx.load(system)?;
            let r = adelic_report(&sys, n, *budget, seed.unwrap_or(cfg.seed));
            let rows = r.rows.iter().flat_map(|row| {
                row.places.iter().map(move |p| {
                    [
                        row.n.to_string(),
                        p.place.to_string(),
                        p.reduction.map_or(String::new(), |k| format!("{k:?}")),
                        p.r_log.to_string(),
                        p.envelope.to_string(),
                        p.envelope_logd.to_string(),
                        opt(p.witness_logd),
                        p.witness_source.clone(),
                        row.reference.to_string(),
                    ]
                })
            });
            let c = csv(
                [
                    "n",
                    "place",
                    "reduction",
                    "r_log",
                    "envelope",
                    "envelope_logd",
                    "witness_logd",
                    "witness_source",
                    "reference",
                ],
                rows,
            );
            Ok((json(&r), c))
        }
        Command::Multiples {
            system,
            curve,
            point,
            n,
        } => {
            let l = lattes_from(curve, point)?;
            if let Some(path) = system {
                let (_, sys) = ctx.load(path)?;
                if !same_map_up_to_scalar(&sys, &l.system) {
                    return Err(Error::Invalid("system file does not hold the Lattès map of the curve".into()));
                }
            }
            let orbit = l.orbit(multiples_bound(&l.system, *n));
            let r = multiples_search(&l.system, &orbit, *n)?;
            let rows = r.indices.iter().map(|k| [r.n.to_string(), k.to_string()]);
            let c = csv(["n", "k"], rows);
            Ok((json(&r), c))
        }
        Command::LehmerScan {
            curve,
            point,
            depths,
            tol,
        } => {
            let l = lattes_from(curve, point)?;
            let t = lehmer_scan(&l, depths, *tol)?;
            let rows = t.rows.iter().map(|r| {
                [
                    r.depth.to_string(),
                    r.factor.clone(),
                    r.degree.to_string(),
                    r.multiplicity.to_string(),
                    r.height.to_string(),
                    r.height_scaled.to_string(),
                    r.shape.to_string(),
                ]
            });
            let c = csv(
                ["depth", "factor", "degree", "multiplicity", "height", "height_scaled", "shape"],
                rows,
            );
            Ok((json(&t), c))
        }
        Command::Selftest => {
            let checks = selftest();
            let rows = checks
                .iter()
                .map(|c| [c.name.clone(), c.passed.to_string(), c.detail.clone()]);
            let c = csv(["check", "passed", "detail"], rows);
            let out = json(&checks);
            if checks.iter().all(|c| c.passed) {
                Ok((out, c))
            } else {
                Err(Error::Internal(format!("selftest failed:\n{out}")))
            }
        }
    }
}

fn witness_csv(reports: &[WitnessReport]) -> String {
    csv(
        ["n", "place", "c", "witness_logd", "envelope_logd"],
        reports.iter().map(|r| {
            [
                r.n.to_string(),
                r.place.to_string(),
                r.c.to_string(),
                opt(r.witness_logd),
                r.envelope_logd.to_string(),
            ]
        }),
    )
}

fn same_map_up_to_scalar(a: &DynSystem, b: &DynSystem) -> bool {
    if a.nvars() != b.nvars() || a.degree() != b.degree() || a.hypersurface().is_some() {
        return false;
    }
    let pairs: Vec<_> = a
        .map()
        .forms()
        .iter()
        .zip(b.map().forms())
        .flat_map(|(f, g)| {
            let mut ms: Vec<_> = f.terms().map(|(m, _)| m.clone()).collect();
            ms.extend(g.terms().map(|(m, _)| m.clone()));
            ms.into_iter().map(move |m| (f.coeff(&m), g.coeff(&m)))
        })
        .collect();
    let Some((x0, y0)) = pairs.iter().find(|(x, _)| *x != int(0)) else {
        return false;
    };
    pairs.iter().all(|(x, y)| x * y0 == y * x0)
}

/// Quick exact and numeric checks of the core invariants.
pub fn selftest() -> Vec<SelftestCheck> {
    fn check(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> SelftestCheck {
        let (passed, detail) = f().unwrap_or_else(|e| (false, e.to_string()));
        SelftestCheck {
            name: name.into(),
            passed,
            detail,
        }
    }
    let sys = |forms: &[&str]| SystemConfig::new(forms).build();
    vec![
        check("product formula", || {
            let x = parse_rational("-360/77")?;
            let s = crate::pf::product_formula_sum(&x)?;
            let exact = crate::pf::log_expansion(&x)?.scale(&int(-1));
            Ok((s.padic() == exact.padic() && s.value().abs() <= 1e-12, s.render()))
        }),
        check("resultant of the power map", || {
            let r = sys(&["x^2", "y^2"])?.resultant().clone();
            Ok((r == int(1), format_rational(&r)))
        }),
        check("resultant scaling", || {
            let r = sys(&["2*x^2", "y^2"])?.resultant().clone();
            Ok((r == int(4), format_rational(&r)))
        }),
        check("height of [2:1] under z^2", || {
            let h = canonical_height(&sys(&["x^2", "y^2"])?, &ProjPoint::parse("2,1")?, 1e-12)?;
            Ok(((h.value - 2f64.ln()).abs() <= 1e-12, h.value.to_string()))
        }),
        check("Chebyshev escape rate", || {
            let s = sys(&["x^2 - 2*y^2", "y^2"])?;
            let e = s.escape_rate(&Place::Archimedean, &ProjPoint::parse("3,1")?, 1e-10)?;
            let want = ((3.0 + 5f64.sqrt()) / 2.0).ln();
            Ok(((e.approx() - want).abs() <= 1e-9, e.approx().to_string()))
        }),
        check("functional equation", || {
            let s = sys(&["x^2 + 1/2*y^2", "y^2"])?;
            let p = ProjPoint::parse("7/3,-5/2")?;
            let fp = ProjPoint::exact(s.map().evaluate(p.as_exact().expect("exact"))?)?;
            let a = s.escape_rate(&Place::Archimedean, &fp, 1e-10)?.approx();
            let b = s.escape_rate(&Place::Archimedean, &p, 1e-10)?.approx();
            Ok(((a - 2.0 * b).abs() <= 2e-9, format!("{a} vs 2*{b}")))
        }),
        check("torsion orbit rejected", || {
            let l = LattesSystem::new(int(0), int(1), int(2), int(3))?;
            let orbit = l.orbit(multiples_bound(&l.system, 2));
            let r = multiples_search(&l.system, &orbit, 2);
            Ok((matches!(r, Err(Error::Precondition { .. })), format!("{:?}", r.err())))
        }),
    ]
}

mod erased {
    use serde::Serialize;

    /// Pretty JSON with a trailing newline.
    pub trait Json {
        fn to_json(&self) -> String;
    }

    impl<T: Serialize> Json for T {
        fn to_json(&self) -> String {
            let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
            s.push('\n');
            s
        }
    }
}

/// Exit code for an error: 2 for malformed input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_parse() {
        2
    } else {
        1
    }
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Parses `argv`, runs the command and writes the result; returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        pool = pool.num_threads(n);
    }
    let result = match pool.build() {
        Ok(p) => p.install(|| execute(&cli)),
        Err(e) => Err(Error::Internal(e.to_string())),
    };
    let (json, csv) = match result {
        Ok(out) => out,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let text = match cli.format {
        Format::Json => json,
        Format::Csv => csv,
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                let _ = writeln!(stderr, "error: {}: {e}", path.display());
                return 1;
            }
            0
        }
        None => match stdout.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(_) => 1,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("greenfield").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn system_file(name: &str, text: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("greenfield-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn resultant_and_height() {
        let p = system_file("sq.json", r#"{"N": 1, "d": 2, "forms": ["x^2", "y^2"]}"#);
        let (code, out, _) = call(&["resultant", p.to_str().unwrap()]);
        assert_eq!((code, out.as_str()), (0, "1\n"));
        let (code, out, _) = call(&["height", p.to_str().unwrap(), "--point", "2,1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["value"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exit_codes() {
        let bad = system_file("bad.json", r#"{"N": 1, "d": 2, "forms": ["x^2" "y^2"]}"#);
        assert_eq!(call(&["resultant", bad.to_str().unwrap()]).0, 2);
        let degenerate = system_file("deg.json", r#"{"N": 1, "d": 2, "forms": ["x^2", "x*y"]}"#);
        assert_eq!(call(&["resultant", degenerate.to_str().unwrap()]).0, 1);
        assert_eq!(call(&["no-such-command"]).0, 2);
        assert_eq!(call(&["multiples", "--curve", "0,1", "--point", "2,3", "--n", "2"]).0, 1);
    }

    #[test]
    fn selftest_passes() {
        let (code, out, err) = call(&["selftest"]);
        assert_eq!(code, 0, "{out}{err}");
    }
}
