//! `cpack`: command-line front end for the compact-packing toolkit.
//!
//! Primary output goes to stdout; every invocation also writes exactly one
//! JSON [`report::CommandReport`] line to stderr. Exit status is 0 for
//! pass/info, 1 for a checked failure and 2 for usage or input errors.

mod input;
mod report;
mod svg;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use compact_packing::angle_core::{gradient, realize, AngleSymbol, Realizer};
use compact_packing::codes::{downarrow_codeset, is_fundamental, parse_codes, serialize_codes, CodeSet};
use compact_packing::packing::{codes_of, fundamental_subset, verify_compact_2d, SpherePacking};
use compact_packing::solver::{
    bootstrap_code_sets, bootstrap_harness, candidates_csv, solve_corona_two_size, two_size_pipeline,
    uniqueness_harness, CoronaSystem, CoronaWord, Tier, AGREEMENT_TOL,
};
use compact_packing::spherical::{
    build_darts_triangulation, build_split_meridian_octahedron, compare_edges, in_q, in_w,
    LabeledSphericalTriangulation,
};
use compact_packing::{codes::parse_word, fixtures, Error};

use input::Kind;
use report::{Outcome, Recorder};

/// Relative tolerance of `angles grad --check-fd`.
const FD_REL_TOL: f64 = 1e-5;
/// Residual required of `solve system`.
const SYSTEM_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "cpack", version, about = "Compact sphere packings with finitely many sizes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate angle symbols and their gradients.
    #[command(subcommand)]
    Angles(AnglesCmd),
    /// Fundamental-set checks and relabeling of code files.
    #[command(subcommand)]
    Codes(CodesCmd),
    /// Compactness verification, code extraction and drawing of packings.
    #[command(subcommand)]
    Packing(PackingCmd),
    /// Corona equations, realizer systems and the two-size enumeration.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Spherical triangulations: Q/W membership and the perturbation demos.
    #[command(subcommand)]
    Sphere(SphereCmd),
    /// Randomized property harnesses.
    #[command(subcommand)]
    Harness(HarnessCmd),
}

#[derive(Args)]
struct SymbolArgs {
    /// Vertex label.
    #[arg(long)]
    c: usize,
    /// First flank label.
    #[arg(long)]
    a: usize,
    /// Second flank label.
    #[arg(long)]
    b: usize,
    /// Realizer values ρ(0),…,ρ(n−1), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    rho: String,
}

#[derive(Subcommand)]
enum AnglesCmd {
    /// Print the realized angle in radians.
    Eval(SymbolArgs),
    /// Print the gradient with respect to each radius.
    Grad {
        #[command(flatten)]
        symbol: SymbolArgs,
        /// Compare against central finite differences.
        #[arg(long)]
        check_fd: bool,
    },
}

#[derive(Subcommand)]
enum CodesCmd {
    /// Decide whether the codes centered below the largest label form a
    /// fundamental set.
    CheckFundamental {
        /// Codes file, fixture name, or `-` for stdin.
        file: String,
    },
    /// Apply the ↓ relabeling onto the smallest `k` labels.
    Down {
        #[arg(long)]
        k: usize,
        file: String,
    },
}

#[derive(Subcommand)]
enum PackingCmd {
    /// Verify that a planar periodic packing is compact.
    Verify { file: String },
    /// Print the codes of a packing and its fundamental subset.
    Codes { file: String },
    /// Draw the packing with its packing complex overlaid.
    Svg {
        file: String,
        /// Output path (default: `<name>.svg` in the working directory).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SolveCmd {
    /// Roots of one two-size corona equation (large radius 1).
    Corona {
        /// Neighbor labels around the center, e.g. `1111`.
        #[arg(long)]
        word: String,
        /// Label of the center disc.
        #[arg(long, default_value_t = 0)]
        center: usize,
    },
    /// Solve the corona system of a codes file by multistart Newton.
    System {
        #[arg(long)]
        file: String,
        #[arg(long, default_value_t = 20)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Enumerate two-size candidate radii and tier them against the fixtures.
    Enumerate {
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        /// Also write the CSV table to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SphereCmd {
    /// Membership in Q for a monotone realizer.
    CheckQ {
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        /// Triangulation JSON file, fixture name, or `-` for stdin.
        #[arg(default_value = "-")]
        file: String,
    },
    /// Membership in W (the hull realizes the triangulation).
    CheckW {
        #[arg(default_value = "-")]
        file: String,
    },
    /// Rotate the equator of the dart strip and compare edge lengths.
    DemoDarts {
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
        phi: f64,
    },
    /// Print the split-meridian octahedron as triangulation JSON.
    DemoSplitmeridian {
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
}

#[derive(Subcommand)]
enum HarnessCmd {
    /// Randomized check of the bootstrapping inequality on `count`
    /// hypothesis-passing instances.
    Bootstrap {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
    },
    /// Multistart agreement of the realizer solve on a codes file.
    Uniqueness {
        #[arg(long)]
        file: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        starts: usize,
    },
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let start = Instant::now();
    let mut rec = Recorder::new(&args);
    let (outcome, error) = match Cli::try_parse_from(&args) {
        Err(e) => {
            let _ = e.print();
            rec.command("usage");
            // Help and version requests are not errors.
            let ok = matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion);
            if ok {
                (Outcome::Info, None)
            } else {
                (Outcome::Error, Some(e.kind().to_string()))
            }
        }
        Ok(cli) => match run(cli.command, &mut rec) {
            Ok(o) => (o, None),
            Err(e) => {
                eprintln!("error: {e}");
                (error_outcome(&e), Some(e.to_string()))
            }
        },
    };
    let report = rec.finish(outcome, start.elapsed().as_secs_f64() * 1e3, error);
    eprintln!("{}", serde_json::to_string(&report).expect("reports serialize"));
    std::process::exit(outcome.exit_code());
}

/// Input problems are usage errors; failures of a computation the user
/// asked to be checked are checked failures.
fn error_outcome(e: &Error) -> Outcome {
    match e {
        Error::Consistency(_) | Error::Solver(_) | Error::InvalidPacking(_) => Outcome::Fail,
        Error::Domain(_) | Error::Parse { .. } | Error::Validation(_) | Error::Precondition(_) | Error::Io(_) => {
            Outcome::Error
        }
    }
}

type Run = compact_packing::Result<Outcome>;

fn run(command: Command, rec: &mut Recorder) -> Run {
    match command {
        Command::Angles(c) => angles(c, rec),
        Command::Codes(c) => codes(c, rec),
        Command::Packing(c) => packing(c, rec),
        Command::Solve(c) => solve(c, rec),
        Command::Sphere(c) => sphere(c, rec),
        Command::Harness(c) => harness(c, rec),
    }
}

fn symbol_and_realizer(s: &SymbolArgs) -> compact_packing::Result<(AngleSymbol, Realizer)> {
    let rho = Realizer::new(input::parse_values(&s.rho)?)?;
    Ok((AngleSymbol::new(s.c, s.a, s.b), rho))
}

fn angles(cmd: AnglesCmd, rec: &mut Recorder) -> Run {
    match cmd {
        AnglesCmd::Eval(s) => {
            rec.command("angles eval");
            let (sym, rho) = symbol_and_realizer(&s)?;
            let angle = realize(&sym, &rho)?;
            println!("{angle:.15}");
            rec.metric("symbol", sym.to_string());
            rec.metric("angle", angle);
            Ok(Outcome::Info)
        }
        AnglesCmd::Grad { symbol, check_fd } => {
            rec.command("angles grad");
            let (sym, rho) = symbol_and_realizer(&symbol)?;
            let g = gradient(&sym, &rho)?;
            let mut worst: f64 = 0.0;
            for (label, d) in g.iter().enumerate() {
                if !check_fd {
                    println!("{label}\t{d:.15}");
                    continue;
                }
                let values = rho.values();
                let h = 1e-6 * values[label];
                let mut plus = values.to_vec();
                let mut minus = values.to_vec();
                plus[label] += h;
                minus[label] -= h;
                let fd = (realize(&sym, &Realizer::new(plus)?)? - realize(&sym, &Realizer::new(minus)?)?) / (2.0 * h);
                let err = if *d == 0.0 { fd.abs() } else { (fd - d).abs() / d.abs() };
                worst = worst.max(err);
                println!("{label}\t{d:.15}\tfd {fd:.15}\terr {err:.3e}");
            }
            rec.metric("symbol", sym.to_string());
            rec.metric("gradient", &g);
            if check_fd {
                rec.metric("max_relative_error", worst);
                Ok(Outcome::from_check(worst < FD_REL_TOL))
            } else {
                Ok(Outcome::Info)
            }
        }
    }
}

fn read_codes(arg: &str, rec: &mut Recorder) -> compact_packing::Result<CodeSet> {
    let text = input::read(Kind::Codes, arg)?;
    rec.input(&text);
    parse_codes(&text)
}

/// The codes centered below the largest label. A code centered at `n−1`
/// (such as the fifth corona of a five-size packing) is part of a packing's
/// code list but not of a fundamental set, so it is set aside.
fn lower_codes(c: &CodeSet, rec: &mut Recorder) -> CodeSet {
    let top = c.n() - 1;
    let lower = c.filter_centers(|l| l < top);
    let set_aside = c.len() - lower.len();
    if set_aside > 0 {
        println!("set aside {set_aside} code(s) centered at the largest label {top}");
    }
    rec.metric("set_aside", set_aside);
    lower
}

fn codes(cmd: CodesCmd, rec: &mut Recorder) -> Run {
    match cmd {
        CodesCmd::CheckFundamental { file } => {
            rec.command("codes check-fundamental");
            let c = read_codes(&file, rec)?;
            let lower = lower_codes(&c, rec);
            let f = is_fundamental(&lower);
            rec.metric("codes", lower.len());
            rec.metric("n", lower.n());
            match &f.certificate {
                None => println!("fundamental: {lower}"),
                Some(cert) => {
                    println!("not fundamental: {cert}");
                    rec.metric("certificate", cert);
                }
            }
            Ok(Outcome::from_check(f.fundamental))
        }
        CodesCmd::Down { k, file } => {
            rec.command("codes down");
            let c = read_codes(&file, rec)?;
            let lower = lower_codes(&c, rec);
            let d = downarrow_codeset(&lower, k)?;
            println!("{d}");
            rec.metric("k", k);
            rec.metric("result", d.to_string());
            rec.metric("serialized", serialize_codes(&d));
            Ok(Outcome::Info)
        }
    }
}

fn read_packing(arg: &str, rec: &mut Recorder) -> compact_packing::Result<SpherePacking> {
    let text = input::read(Kind::Packing, arg)?;
    rec.input(&text);
    SpherePacking::from_json(&text)
}

/// Read a packing that may overlap; verification reports the overlaps.
fn read_packing_for_verify(arg: &str, rec: &mut Recorder) -> compact_packing::Result<SpherePacking> {
    let text = input::read(Kind::Packing, arg)?;
    rec.input(&text);
    SpherePacking::from_json_allow_overlaps(&text)
}

fn packing(cmd: PackingCmd, rec: &mut Recorder) -> Run {
    match cmd {
        PackingCmd::Verify { file } => {
            rec.command("packing verify");
            let p = read_packing_for_verify(&file, rec)?;
            let report = verify_compact_2d(&p)?;
            rec.metric("packing", &report.name);
            rec.metric("spheres", p.spheres.len());
            rec.metric("failures", &report.failures);
            if let Some(c) = &report.complex {
                rec.metric("triangles", c.triangles.len());
                rec.metric("radii", &c.labeling.radii);
                println!("{}: compact ({} spheres, {} triangles)", report.name, p.spheres.len(), c.triangles.len());
            } else {
                println!("{}: NOT compact", report.name);
                for f in &report.failures {
                    println!("  {f}");
                }
            }
            Ok(Outcome::from_check(report.compact))
        }
        PackingCmd::Codes { file } => {
            rec.command("packing codes");
            let p = read_packing(&file, rec)?;
            let c = codes_of(&p)?;
            println!("codes: {c}");
            rec.metric("codes", c.to_string());
            if c.n() >= 2 {
                let f = fundamental_subset(&p)?;
                println!("fundamental subset: {f}");
                rec.metric("fundamental_subset", f.to_string());
            }
            Ok(Outcome::Info)
        }
        PackingCmd::Svg { file, out } => {
            rec.command("packing svg");
            let p = read_packing_for_verify(&file, rec)?;
            let (doc, edges) = svg::render(&p)?;
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{}.svg", p.label())));
            std::fs::write(&path, doc).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            println!("{}", path.display());
            rec.metric("discs", p.spheres.len());
            rec.metric("edges", edges);
            rec.artifacts.push(path.display().to_string());
            Ok(Outcome::Info)
        }
    }
}

fn solve(cmd: SolveCmd, rec: &mut Recorder) -> Run {
    match cmd {
        SolveCmd::Corona { word, center } => {
            rec.command("solve corona");
            let w = CoronaWord::new(center, parse_word(&word)?)?;
            if w.max_label() > 1 || center > 1 {
                return Err(Error::Domain(format!("two-size words use labels 0 and 1 only: {w}")));
            }
            let roots = solve_corona_two_size(&w);
            if roots.degenerate {
                println!("{w}: residual vanishes identically; no isolated root");
            }
            for r in &roots.roots {
                println!("{r:.15}");
            }
            rec.metric("word", w.to_string());
            rec.metric("roots", &roots.roots);
            rec.metric("degenerate", roots.degenerate);
            Ok(Outcome::Info)
        }
        SolveCmd::System { file, starts, seed } => {
            rec.command("solve system");
            rec.seed = Some(seed);
            let c = read_codes(&file, rec)?;
            let system = CoronaSystem::from_codes(&c)?;
            let u = uniqueness_harness(&c, starts, seed)?;
            let Some(solution) = &u.solution else {
                println!("no start converged");
                rec.metric("failures", &u.failures);
                return Ok(Outcome::Fail);
            };
            let rho = Realizer::new(solution.clone())?;
            let residual = system.residuals(&rho)?.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let top = system.top_residual(&rho)?;
            println!("realizer: {rho}");
            println!("residual: {residual:.3e}");
            if let Some(t) = top {
                println!("largest-label corona residual: {t:.3e}");
            }
            println!("starts: {} converged: {} agree: {} spread: {:.3e}", starts, u.successes, u.agree, u.max_spread);
            rec.metric("realizer", rho.values());
            rec.metric("residual", residual);
            rec.metric("top_residual", top);
            rec.metric("starts", starts);
            rec.metric("successes", u.successes);
            rec.metric("agree", u.agree);
            rec.metric("max_spread", u.max_spread);
            let ok = u.agree
                && !u.inconclusive
                && residual <= SYSTEM_RESIDUAL_TOL
                && top.is_none_or(|t| t.abs() <= SYSTEM_RESIDUAL_TOL);
            Ok(Outcome::from_check(ok))
        }
        SolveCmd::Enumerate { max_len, csv } => {
            rec.command("solve enumerate");
            let candidates = two_size_pipeline(max_len)?;
            let table = candidates_csv(&candidates);
            print!("{table}");
            if let Some(path) = csv {
                std::fs::write(&path, &table).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                rec.artifacts.push(path.display().to_string());
            }
            let count = |t: Tier| candidates.iter().filter(|c| c.tier == t).count();
            let verified = count(Tier::Verified);
            rec.metric("max_len", max_len);
            rec.metric("candidates", candidates.len());
            rec.metric("verified", verified);
            rec.metric("unresolved", count(Tier::Unresolved));
            rec.metric(
                "verified_fixtures",
                candidates.iter().filter_map(|c| c.fixture.clone()).collect::<Vec<_>>(),
            );
            Ok(Outcome::from_check(verified == fixtures::TWO_SIZE_PACKINGS.len()))
        }
    }
}

fn read_triangulation(arg: &str, rec: &mut Recorder) -> compact_packing::Result<LabeledSphericalTriangulation> {
    let text = input::read(Kind::Triangulation, arg)?;
    rec.input(&text);
    LabeledSphericalTriangulation::from_json(&text)
}

fn sphere(cmd: SphereCmd, rec: &mut Recorder) -> Run {
    match cmd {
        SphereCmd::CheckQ { rho, file } => {
            rec.command("sphere check-q");
            let rho = Realizer::new(input::parse_values(&rho)?)?;
            let t = read_triangulation(&file, rec)?;
            let q = in_q(&t, &rho)?;
            println!("{}", if q.member { "in Q" } else { "not in Q" });
            if let Some(w) = &q.worst {
                println!("worst: {:?} ({}, {}) distance {} realized {}", w.kind, w.u, w.v, w.distance, w.realized);
            }
            rec.metric("max_edge_error", q.max_edge_error);
            rec.metric("min_pair_slack", q.min_pair_slack);
            rec.metric("worst", &q.worst);
            Ok(Outcome::from_check(q.member))
        }
        SphereCmd::CheckW { file } => {
            rec.command("sphere check-w");
            let t = read_triangulation(&file, rec)?;
            let w = in_w(&t)?;
            println!("{}", if w.member { "in W" } else { "not in W" });
            if let Some(d) = &w.diagnostic {
                println!("{d}");
            }
            rec.metric("hull_facets", w.hull_facets.len());
            rec.metric("diagnostic", &w.diagnostic);
            Ok(Outcome::from_check(w.member))
        }
        SphereCmd::DemoDarts { k, phi } => {
            rec.command("sphere demo-darts");
            let p = build_darts_triangulation(k, 0.0)?;
            let q = build_darts_triangulation(k, phi)?;
            let ids: Vec<usize> = (0..p.vertex_count()).collect();
            let c = compare_edges(&p, &q, &ids)?;
            println!("grow={} shrink={} equal={}", c.grow.len(), c.shrink.len(), c.equal.len());
            rec.metric("k", k);
            rec.metric("phi", phi);
            rec.metric("grow", c.grow.len());
            rec.metric("shrink", c.shrink.len());
            rec.metric("equal", c.equal.len());
            Ok(Outcome::from_check(!c.grow.is_empty() && c.shrink.is_empty()))
        }
        SphereCmd::DemoSplitmeridian { delta } => {
            rec.command("sphere demo-splitmeridian");
            let t = build_split_meridian_octahedron(delta)?;
            println!("{}", t.to_json());
            rec.metric("delta", delta);
            rec.metric("vertices", t.vertex_count());
            rec.metric("in_w", in_w(&t)?.member);
            Ok(Outcome::Info)
        }
    }
}

fn harness(cmd: HarnessCmd, rec: &mut Recorder) -> Run {
    match cmd {
        HarnessCmd::Bootstrap { seed, count } => {
            rec.command("harness bootstrap");
            rec.seed = Some(seed);
            let sets = bootstrap_code_sets()?;
            let r = bootstrap_harness(&sets, count, seed)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            rec.metric("instances", r.instances);
            rec.metric("draws", r.draws);
            rec.metric("checked", r.checked);
            rec.metric("failures", r.failures.len());
            if count == 0 {
                Ok(Outcome::Info)
            } else {
                Ok(Outcome::from_check(r.failures.is_empty() && r.checked == count))
            }
        }
        HarnessCmd::Uniqueness { file, seed, starts } => {
            rec.command("harness uniqueness");
            rec.seed = Some(seed);
            let c = read_codes(&file, rec)?;
            let u = uniqueness_harness(&c, starts, seed)?;
            println!("{}", serde_json::to_string_pretty(&u)?);
            rec.metric("starts", u.starts);
            rec.metric("successes", u.successes);
            rec.metric("agree", u.agree);
            rec.metric("max_spread", u.max_spread);
            rec.metric("tolerance", AGREEMENT_TOL);
            Ok(Outcome::from_check(u.agree && !u.inconclusive))
        }
    }
}
