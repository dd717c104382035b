//! Command-line front end. Every command writes its reports plus a
//! `manifest.json` into `--out`; reports never depend on the thread count.
//!
//! Exit codes: 0 pass, 1 invariant failure, 2 I/O or bad input,
//! 3 unsupported (operator, domain) pair.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus;
use crate::error::{Error, Result};
use crate::io::{field_sidecar, read_profile_csv, write_field_csv, write_json, write_lateral_csv};
use crate::kernels::CubeSpec;
use crate::maxops::{default_grid, evaluate, MaximalField, OperatorKind, OperatorSpec, SearchConfig};
use crate::profile::{Domain, DomainKind, Profile};
use crate::sunrise::{lateral_derivative_table, sunrise_decompose, SunriseDecomposition};
use crate::verify::{
    bound_suite, check_flatness, check_no_strict_local_max, check_sunrise_identities, continuity_experiment,
    dyadic_ancestry_certificate, BoundReport, FlatnessReport, P1Report, SunriseCheck,
};

#[derive(Debug, Parser)]
#[command(name = "sunrise", version, about = "Maximal functions of PL profiles and their lateral decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads (default: rayon's choice).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OpArgs {
    #[arg(long, default_value = "uncentered")]
    pub op: OperatorKind,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// line | circle | radial:D | polar:D
    #[arg(long, default_value = "line")]
    pub domain: Domain,
    /// Number of evaluation nodes.
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    /// Gap tolerance for the connecting / disconnecting labels.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    P1,
    P3,
    Bounds,
    Sunrise,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the maximal function of a profile.
    Eval {
        #[command(flatten)]
        op: OpArgs,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Lateral decomposition of the field.
    Sunrise {
        #[command(flatten)]
        op: OpArgs,
        #[arg(long = "in")]
        input: PathBuf,
        /// Cutoff (required on radial and polar domains).
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Run pass/fail suites over profiles or a seeded corpus.
    Verify {
        #[command(flatten)]
        op: OpArgs,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long = "in", num_args = 1..)]
        input: Vec<PathBuf>,
        /// Number of seeded random profiles.
        #[arg(long)]
        corpus: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Continuity tracer for f and a sequence f_j → f.
    Converge {
        #[command(flatten)]
        op: OpArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        seq: Vec<PathBuf>,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Dyadic ancestry certificate for a cube Q_0.
    Certify {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value = "line")]
        domain: Domain,
        #[arg(long = "in")]
        input: PathBuf,
        /// a b (line) or cx cy h [phi] (radial:2).
        #[arg(long, num_args = 2..=4, allow_negative_numbers = true, required = true)]
        q0: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
}

/// Everything that determines a run's reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub inputs: Vec<String>,
    pub domain: String,
    pub op: Option<OperatorSpec>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub rho: Option<f64>,
    pub suite: Option<Suite>,
    pub corpus: Option<usize>,
    pub seed: Option<u64>,
    pub q0: Option<Vec<f64>>,
    pub depth: Option<usize>,
    pub out_dir: String,
}

impl RunManifest {
    fn new(command: &str, domain: Domain, out: &Path) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: vec![],
            domain: domain.to_string(),
            op: None,
            grid: None,
            tol: None,
            rho: None,
            suite: None,
            corpus: None,
            seed: None,
            q0: None,
            depth: None,
            out_dir: out.display().to_string(),
        }
    }

    fn with_op(mut self, a: &OpArgs) -> Self {
        self.op = Some(a.spec());
        self.grid = Some(a.grid);
        self.tol = a.tol;
        self
    }
}

impl OpArgs {
    pub fn spec(&self) -> OperatorSpec {
        OperatorSpec::new(self.op, self.alpha).with_search(SearchConfig::default())
    }

    fn field(&self, f: &Profile) -> Result<MaximalField> {
        let mut field = evaluate(&self.spec(), f, &default_grid(f, self.grid))?;
        if let Some(t) = self.tol {
            field.relabel(t);
        }
        Ok(field)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Unsupported(_) => 3,
        Error::NoCertificate(_) => 1,
        _ => 2,
    }
}

/// Parse, run and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let res = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Error::InvalidArgument(format!("thread pool: {e}"))),
        },
        None => run(&cli),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn prepare_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))
}

fn default_rho(domain: Domain, rho: Option<f64>) -> Option<f64> {
    match domain.kind {
        DomainKind::RadialHalfLine | DomainKind::PolarInterval => Some(rho.unwrap_or(0.1)),
        _ => None,
    }
}

/// Run a parsed command; Ok carries the exit code (0 or 1).
pub fn run(cli: &Cli) -> Result<i32> {
    let out = &cli.out;
    prepare_out(out)?;
    match &cli.command {
        Command::Eval { op, input } => {
            let f = read_profile_csv(input, op.domain)?;
            let field = op.field(&f)?;
            write_field_csv(&out.join("field.csv"), &field)?;
            let side = field_sidecar(&field);
            write_json(&out.join("field.json"), &side)?;
            let mut m = RunManifest::new("eval", op.domain, out).with_op(op);
            m.inputs.push(input.display().to_string());
            write_json(&out.join("manifest.json"), &m)?;
            println!(
                "{} nodes: {} connecting, {} disconnecting in {} intervals; max Mf = {}",
                side.grid_len,
                side.connecting_nodes,
                side.disconnecting_nodes,
                side.intervals.len(),
                side.max_value
            );
            Ok(0)
        }
        Command::Sunrise { op, input, rho } => {
            let f = read_profile_csv(input, op.domain)?;
            let field = op.field(&f)?;
            let rho = default_rho(op.domain, *rho);
            let dec = sunrise_decompose(&f, &field, rho)?;
            write_lateral_csv(&out.join("lateral.csv"), &dec)?;
            let check = check_sunrise_identities(&dec);
            write_json(&out.join("decomposition.json"), &DecompositionReport::new(&dec, &check))?;
            let mut m = RunManifest::new("sunrise", op.domain, out).with_op(op);
            m.inputs.push(input.display().to_string());
            m.rho = rho;
            write_json(&out.join("manifest.json"), &m)?;
            println!("{:>4} {:>14} {:>14} {:>14} {:>14}", "comp", "a", "tau-", "tau+", "b");
            for (k, c) in dec.components.iter().enumerate() {
                println!("{k:>4} {:>14.6} {:>14.6} {:>14.6} {:>14.6}", c.a, c.tau_minus, c.tau_plus, c.b);
            }
            report_sunrise_failures("input", &check);
            Ok(if check.passed() { 0 } else { 1 })
        }
        Command::Verify { op, suite, input, corpus: n, seed, rho } => {
            let mut profiles: Vec<(String, Profile)> = vec![];
            for p in input {
                profiles.push((p.display().to_string(), read_profile_csv(p, op.domain)?));
            }
            if let Some(n) = n {
                for (k, f) in corpus::corpus(op.domain, *seed, *n).into_iter().enumerate() {
                    profiles.push((format!("corpus[{k}]"), f));
                }
            }
            if profiles.is_empty() {
                return Err(Error::InvalidArgument("verify needs --in files or --corpus N".into()));
            }
            let rho = default_rho(op.domain, *rho);
            let results: Vec<Result<ProfileVerdict>> =
                profiles.par_iter().map(|(name, f)| verify_one(name, f, op, *suite, rho)).collect();
            let results: Vec<ProfileVerdict> = results.into_iter().collect::<Result<_>>()?;
            let passed = results.iter().all(|r| r.passed);
            let report = VerifyReport { suite: *suite, op: op.spec(), domain: op.domain.to_string(), passed, profiles: results };
            write_json(&out.join("verify.json"), &report)?;
            let mut m = RunManifest::new("verify", op.domain, out).with_op(op);
            m.inputs = input.iter().map(|p| p.display().to_string()).collect();
            m.suite = Some(*suite);
            m.corpus = *n;
            m.seed = n.map(|_| *seed);
            m.rho = rho;
            write_json(&out.join("manifest.json"), &m)?;
            println!("{:<24} {:>6} {:>8} {:>8} {:>8} {:>8}", "profile", "pass", "p1", "p3", "bounds", "sunrise");
            for r in &report.profiles {
                let flag = |b: Option<bool>| match b {
                    Some(true) => "ok",
                    Some(false) => "FAIL",
                    None => "-",
                };
                println!(
                    "{:<24} {:>6} {:>8} {:>8} {:>8} {:>8}",
                    r.name,
                    if r.passed { "yes" } else { "NO" },
                    flag(r.p1.as_ref().map(|p| p.passed())),
                    flag(r.p3.as_ref().map(|p| p.flat())),
                    flag(r.bounds.as_ref().map(|b| b.contractive != Some(false))),
                    flag(r.sunrise.as_ref().map(|s| s.passed())),
                );
                print_failures(r);
            }
            Ok(if passed { 0 } else { 1 })
        }
        Command::Converge { op, input, seq, rho } => {
            let f = read_profile_csv(input, op.domain)?;
            let fs: Vec<Profile> = seq.iter().map(|p| read_profile_csv(p, op.domain)).collect::<Result<_>>()?;
            let rho = default_rho(op.domain, *rho);
            let grid = default_grid(&f, op.grid);
            let rep = continuity_experiment(&f, &fs, &op.spec(), &grid, rho)?;
            write_json(&out.join("converge.json"), &rep)?;
            write_converge_csv(&out.join("converge.csv"), &rep)?;
            let mut m = RunManifest::new("converge", op.domain, out).with_op(op);
            m.inputs.push(input.display().to_string());
            m.inputs.extend(seq.iter().map(|p| p.display().to_string()));
            m.rho = rho;
            write_json(&out.join("manifest.json"), &m)?;
            println!("{:>3} {:>12} {:>12} {:>12} {:>12} {:>8}", "j", "deriv", "lateral", "lambda", "w11", "branch");
            for s in &rep.steps {
                println!(
                    "{:>3} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>8?}",
                    s.j, s.deriv_distance, s.lateral_distance, s.lambda, s.w11.deriv_l1, s.branch
                );
            }
            println!("verdict: {}", if rep.verdict { "converging" } else { "not demonstrated" });
            Ok(0)
        }
        Command::Certify { alpha, domain, input, q0, depth } => {
            let f = read_profile_csv(input, *domain)?;
            let q = match (domain.kind, q0.as_slice()) {
                (DomainKind::Line, [a, b]) if b > a => CubeSpec::interval(0.5 * (a + b), 0.5 * (b - a)),
                (DomainKind::RadialHalfLine, [cx, cy, h, rest @ ..]) if domain.dim == 2 && *h > 0.0 => {
                    CubeSpec::square([*cx, *cy], *h, rest.first().copied().unwrap_or(0.0))
                }
                (DomainKind::Line | DomainKind::RadialHalfLine, _) => {
                    return Err(Error::InvalidArgument(format!("--q0 {q0:?} does not describe a cube on {domain}")))
                }
                _ => return Err(Error::Unsupported(format!("dyadic certificates on {domain}"))),
            };
            let mut m = RunManifest::new("certify", *domain, out);
            m.inputs.push(input.display().to_string());
            m.q0 = Some(q0.clone());
            m.depth = Some(*depth);
            write_json(&out.join("manifest.json"), &m)?;
            let cert = dyadic_ancestry_certificate(&f, &q, *alpha, *depth)?;
            write_json(&out.join("certificate.json"), &cert)?;
            println!("{:>3} {:>24} {:>12} {:>20} {:>8}", "i", "center", "half_side", "average", "overlap");
            for (i, c) in cert.chain.iter().enumerate() {
                let center = if c.dim == 1 { format!("{:.9}", c.center[0]) } else { format!("({:.6}, {:.6})", c.center[0], c.center[1]) };
                let ov = cert.overlaps.get(i).map(|b| b.to_string()).unwrap_or_else(|| "-".into());
                println!("{i:>3} {center:>24} {:>12.6e} {:>20.15} {ov:>8}", c.half_side, cert.averages[i]);
            }
            println!("k = {}, all overlaps: {}", cert.k, cert.all_overlap());
            Ok(0)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct DecompositionReport<'a> {
    rho: Option<f64>,
    domain: String,
    anchor_forced: bool,
    components: &'a [crate::sunrise::Component],
    regions: &'a [crate::sunrise::Region],
    side_r: &'a [crate::sunrise::Side],
    side_l: &'a [crate::sunrise::Side],
    deriv_class: Vec<crate::sunrise::DerivClass>,
    lateral_r_deriv_l1: f64,
    lateral_l_deriv_l1: f64,
    check: &'a SunriseCheck,
}

impl<'a> DecompositionReport<'a> {
    fn new(dec: &'a SunriseDecomposition, check: &'a SunriseCheck) -> Self {
        DecompositionReport {
            rho: dec.rho,
            domain: dec.domain.to_string(),
            anchor_forced: dec.anchor_forced,
            components: &dec.components,
            regions: &dec.regions,
            side_r: &dec.side_r,
            side_l: &dec.side_l,
            deriv_class: lateral_derivative_table(dec).classes,
            lateral_r_deriv_l1: lateral_norm(dec, &dec.lateral_r),
            lateral_l_deriv_l1: lateral_norm(dec, &dec.lateral_l),
            check,
        }
    }
}

fn lateral_norm(dec: &SunriseDecomposition, v: &[f64]) -> f64 {
    let c = dec.domain.measure_constant();
    dec.cells()
        .into_iter()
        .map(|cell| {
            let t0 = dec.nodes[cell.0];
            let t1 = t0 + dec.cell_width(cell);
            let w = match dec.domain.kind {
                DomainKind::Line | DomainKind::Circle => t1 - t0,
                _ => dec.domain.weight_integral(t0, t1) * c,
            };
            (v[cell.1] - v[cell.0]).abs() / (t1 - t0) * w
        })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
struct ProfileVerdict {
    name: String,
    passed: bool,
    p1: Option<P1Report>,
    p3: Option<FlatnessReport>,
    bounds: Option<BoundReport>,
    sunrise: Option<SunriseCheck>,
}

#[derive(Debug, Clone, Serialize)]
struct VerifyReport {
    suite: Suite,
    op: OperatorSpec,
    domain: String,
    passed: bool,
    profiles: Vec<ProfileVerdict>,
}

fn verify_one(name: &str, f: &Profile, op: &OpArgs, suite: Suite, rho: Option<f64>) -> Result<ProfileVerdict> {
    let field = op.field(f)?;
    let want = |s: Suite| suite == s || suite == Suite::All;
    let p1 = want(Suite::P1).then(|| check_no_strict_local_max(&field, None));
    let p3 = if want(Suite::P3) { Some(check_flatness(&field, f)?) } else { None };
    let bounds = if want(Suite::Bounds) { Some(bound_suite(f, &field)?) } else { None };
    let sunrise = if want(Suite::Sunrise) { Some(check_sunrise_identities(&sunrise_decompose(f, &field, rho)?)) } else { None };
    let passed = p1.as_ref().is_none_or(|p| p.passed())
        && p3.as_ref().is_none_or(|p| p.flat())
        && bounds.as_ref().is_none_or(|b| b.contractive != Some(false))
        && sunrise.as_ref().is_none_or(|s| s.passed());
    Ok(ProfileVerdict { name: name.to_string(), passed, p1, p3, bounds, sunrise })
}

fn print_failures(r: &ProfileVerdict) {
    if let Some(p) = &r.p1 {
        for v in p.violations.iter().take(3) {
            eprintln!(
                "  {}: no-strict-local-max fails at node {} (t = {}), excess {:.3e}",
                r.name, v.index, v.t, v.excess
            );
        }
    }
    if let Some(p) = &r.p3 {
        for v in p.list_a.iter().take(3) {
            eprintln!("  {}: flatness fails at connecting node {} (t = {}), f' = {:.3e}", r.name, v.index, v.t, v.slope);
        }
    }
    if let Some(b) = &r.bounds {
        if b.contractive == Some(false) {
            eprintln!("  {}: variation contractivity fails, ratio {}", r.name, b.ratio);
        }
    }
    if let Some(s) = &r.sunrise {
        report_sunrise_failures(&r.name, s);
    }
}

fn report_sunrise_failures(name: &str, s: &SunriseCheck) {
    if let Some(k) = s.sandwich_failures.first() {
        eprintln!("  {name}: f <= M_R, M_L <= Mf fails at node {k}");
    }
    if let Some(k) = s.max_failures.first() {
        eprintln!("  {name}: max(M_R, M_L) = Mf fails at node {k}");
    }
    for v in s.table_violations.iter().chain(&s.monotonicity_violations).take(3) {
        eprintln!("  {name}: {} sign check fails on cell {:?} (t = {}), delta {:.3e}", v.class, v.cell, v.t, v.delta);
    }
}

fn write_converge_csv(path: &Path, rep: &crate::verify::ConvergenceReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    w.write_record([
        "j",
        "w11_l1",
        "w11_deriv_l1",
        "w11_sup",
        "sup_f",
        "sup_field",
        "deriv_distance",
        "lateral_distance",
        "piece_cc",
        "piece_dc",
        "piece_cd",
        "piece_dd",
        "bl_j",
        "bl",
        "gamma_j",
        "gamma",
        "r_j",
        "r",
        "lambda",
        "branch",
    ])?;
    for s in &rep.steps {
        let mut row: Vec<String> = vec![s.j.to_string()];
        row.extend(
            [
                s.w11.l1,
                s.w11.deriv_l1,
                s.w11.sup_tail,
                s.sup_f,
                s.sup_field,
                s.deriv_distance,
                s.lateral_distance,
                s.pieces[0],
                s.pieces[1],
                s.pieces[2],
                s.pieces[3],
                s.brezis_lieb.0,
                s.brezis_lieb.1,
                s.terms_j.gamma,
                s.terms.gamma,
                s.terms_j.r,
                s.terms.r,
                s.lambda,
            ]
            .iter()
            .map(|v| v.to_string()),
        );
        row.push(format!("{:?}", s.branch).to_lowercase());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
