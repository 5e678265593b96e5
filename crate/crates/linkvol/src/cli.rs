//! `linkvol analyze|from-rep|solve|verify|selftest`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::coloring::ColoringFile;
use crate::diagram::{load_diagram, LinkDiagram};
use crate::engine::{
    gluing_check, multi_start, vol_cs, volume_from_representation, ColoringChoice, EngineError, SolveConfig,
};
use crate::numerics::{dilog, mod_pi2_equal, plog, to_pair, C64, PI2};
use crate::potential::{
    critical_residuals, is_nondegenerate, log_gradient, total_potential, PotentialError, Solution, SolutionFile,
};
use crate::representation::{
    complete_representation, ComponentFilling, FillingFile, FillingSpec, RepresentationFile, Slope,
};

#[derive(Parser, Debug)]
#[command(name = "linkvol", version, about = "Volume and Chern-Simons invariants of link diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print diagram combinatorics
    Analyze {
        diagram: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Volume and CS from a representation
    FromRep {
        diagram: PathBuf,
        rep: PathBuf,
        /// e.g. "2/3" or "-5,-5/2" or "inf"
        #[arg(long, allow_hyphen_values = true)]
        filling: Option<String>,
        #[arg(long = "seedV", allow_hyphen_values = true)]
        seed_v: Option<String>,
        #[arg(long = "W", allow_hyphen_values = true)]
        w: Option<String>,
        #[arg(long)]
        seed_region: Option<usize>,
        /// Coloring JSON file
        #[arg(long)]
        coloring: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Solve the critical equations at fixed meridian eigenvalues
    Solve {
        diagram: PathBuf,
        /// One value per component, comma separated
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        m: String,
        #[arg(long, allow_hyphen_values = true)]
        filling: Option<String>,
        /// Longitude eigenvalues, one per component ("-" for unfilled)
        #[arg(long, allow_hyphen_values = true)]
        l: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check a solution file (or a solver report)
    Verify {
        diagram: PathBuf,
        solution: PathBuf,
        /// Filling flag string or filling JSON file
        #[arg(long, allow_hyphen_values = true)]
        filling: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        l: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Built-in reproduction suite
    Selftest {
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Verification(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::Gluing(_) | EngineError::Potential(PotentialError::NotASolution(_)) => {
            Failure::Verification(e.to_string())
        }
        e => Failure::Input(e.to_string()),
    }
}

/// Parse and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = match cli.command {
        Command::Analyze { diagram, json } => analyze(&diagram, json.as_deref()),
        Command::FromRep { diagram, rep, filling, seed_v, w, seed_region, coloring, rng_seed, json } => {
            let pinned = PinnedColoring { seed_v, w, seed_region, coloring };
            from_rep(&diagram, &rep, filling.as_deref(), &pinned, rng_seed, json.as_deref())
        }
        Command::Solve { diagram, m, filling, l, tol, seeds, rng_seed, json } => {
            let cfg = SolveConfig { residual_tol: tol, seeds, rng_seed, ..SolveConfig::default() };
            solve(&diagram, &m, filling.as_deref(), l.as_deref(), &cfg, json.as_deref())
        }
        Command::Verify { diagram, solution, filling, l, tol, json } => {
            verify(&diagram, &solution, filling.as_deref(), l.as_deref(), tol, json.as_deref())
        }
        Command::Selftest { json } => selftest(json.as_deref()),
    };
    match out {
        Ok(()) => 0,
        Err(Failure::Verification(msg)) => {
            eprintln!("FAIL: {msg}");
            1
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

/// Parse `a+bi`, `a`, `bi`, `-i`, with optional exponents.
pub fn parse_complex(text: &str) -> Result<C64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid complex number {text:?}");
    let num = |s: &str| -> Result<f64, String> { s.parse::<f64>().map_err(|_| bad()) };
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(C64::new(num(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64, String> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            s => num(s),
        }
    };
    match split {
        Some(k) => Ok(C64::new(num(&body[..k])?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

fn parse_complex_list(text: &str) -> Result<Vec<C64>, String> {
    text.split(',').map(parse_complex).collect()
}

fn parse_slope(item: &str) -> Result<Slope, String> {
    let item = item.trim();
    if item.eq_ignore_ascii_case("inf") || item == "∞" {
        return Ok(Slope::Infinite);
    }
    let bad = || format!("invalid slope {item:?}");
    let (r, s) = match item.split_once('/') {
        Some((r, s)) => (r.trim().parse::<i64>().map_err(|_| bad())?, s.trim().parse::<i64>().map_err(|_| bad())?),
        None => (item.parse::<i64>().map_err(|_| bad())?, 1),
    };
    Slope::finite(r, s).map_err(|e| e.to_string())
}

/// `--filling` value: a JSON file path or `r/s,r/s,inf`.
fn parse_filling(arg: &str, l: Option<&str>, h: usize) -> Result<FillingSpec, Failure> {
    let mut spec = if Path::new(arg).is_file() {
        FillingFile::from_json(&std::fs::read_to_string(arg)?)?.to_spec()?
    } else {
        let components = arg
            .split(',')
            .map(|s| parse_slope(s).map(|slope| ComponentFilling { slope, l: None, uv: None }))
            .collect::<Result<Vec<_>, String>>()
            .map_err(Failure::Input)?;
        FillingSpec { components }
    };
    if spec.components.len() != h {
        return Err(Failure::Input(format!(
            "filling has {} entries, diagram has {h} components",
            spec.components.len()
        )));
    }
    if let Some(l) = l {
        let items: Vec<&str> = l.split(',').collect();
        if items.len() != h {
            return Err(Failure::Input(format!("--l has {} entries, diagram has {h} components", items.len())));
        }
        for (f, item) in spec.components.iter_mut().zip(items) {
            if item.trim() != "-" {
                f.l = Some(parse_complex(item).map_err(Failure::Input)?);
            }
        }
    }
    Ok(spec)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_diagram(path: &Path) -> Result<LinkDiagram, Failure> {
    Ok(load_diagram(&read(path)?)?)
}

fn write_json(path: Option<&Path>, v: &Value) -> Result<(), Failure> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(v)?;
        std::fs::write(p, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn fmt_c(z: C64) -> String {
    format!("{:.10}{:+.10}i", z.re, z.im)
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|&z| to_pair(z)).collect()
}

fn analyze(path: &Path, json_out: Option<&Path>) -> Result<(), Failure> {
    let d = read_diagram(path)?;
    print!("{}", d.summary());
    let crossings: Vec<Value> = d
        .crossings
        .iter()
        .map(|c| {
            json!({
                "pd": c.pd, "sign": c.sign, "regions": c.slots(),
                "under_component": c.under_component, "over_component": c.over_component,
            })
        })
        .collect();
    let components: Vec<Value> = (0..d.n_components())
        .map(|i| {
            let word = d.longitude_word(i).expect("valid component");
            json!({
                "edges": d.components[i], "writhe": d.writhe(i).expect("valid component"),
                "meridian": d.meridians[i], "longitude": word.0,
            })
        })
        .collect();
    let relations: Vec<Value> = d
        .wirtinger()
        .iter()
        .map(|r| json!({"over": r.over, "input": r.input, "output": r.output, "sign": r.sign}))
        .collect();
    let arcs: Vec<Value> = d.arcs.iter().map(|a| json!({"edges": a.edges, "component": a.component})).collect();
    write_json(
        json_out,
        &json!({
            "n_regions": d.n_regions, "n_crossings": d.crossings.len(), "n_components": d.n_components(),
            "crossings": crossings, "arcs": arcs, "relations": relations, "components": components,
        }),
    )
}

struct PinnedColoring {
    seed_v: Option<String>,
    w: Option<String>,
    seed_region: Option<usize>,
    coloring: Option<PathBuf>,
}

impl PinnedColoring {
    fn choice(&self, rng_seed: u64) -> Result<ColoringChoice, Failure> {
        let mut file = match &self.coloring {
            Some(p) => Some(ColoringFile::from_json(&read(p)?)?),
            None => None,
        };
        let vec2 = |s: &str| -> Result<[C64; 2], Failure> {
            let v = parse_complex_list(s).map_err(Failure::Input)?;
            <[C64; 2]>::try_from(v).map_err(|_| Failure::Input(format!("expected two complex entries in {s:?}")))
        };
        if self.seed_v.is_some() || self.w.is_some() || self.seed_region.is_some() {
            let base = file.take().unwrap_or_else(|| {
                ColoringFile::new(0, [C64::new(1.0, 0.0), C64::new(0.0, 1.0)], [C64::new(2.0, 0.0), C64::new(1.0, 0.0)])
            });
            let seed = match &self.seed_v {
                Some(s) => vec2(s)?,
                None => base.seed(),
            };
            let w = match &self.w {
                Some(s) => vec2(s)?,
                None => base.w_vec(),
            };
            file = Some(ColoringFile::new(self.seed_region.unwrap_or(base.seed_region), seed, w));
        }
        Ok(match file {
            Some(f) => ColoringChoice::Pinned(f),
            None => ColoringChoice::Random(rng_seed),
        })
    }
}

fn solution_json(s: &Solution) -> Value {
    json!({"w": pairs(&s.w), "m": pairs(&s.m)})
}

fn from_rep(
    diagram: &Path,
    rep: &Path,
    filling: Option<&str>,
    pinned: &PinnedColoring,
    rng_seed: u64,
    json_out: Option<&Path>,
) -> Result<(), Failure> {
    let d = read_diagram(diagram)?;
    let partial = RepresentationFile::from_json(&read(rep)?)?.partial()?;
    let rho = complete_representation(&d, &partial)?;
    let filling = match filling {
        Some(f) => parse_filling(f, None, d.n_components())?,
        None => FillingSpec::unfilled(d.n_components()),
    };
    let choice = pinned.choice(rng_seed)?;
    let report = volume_from_representation(&d, &rho, &filling, &choice).map_err(engine_failure)?;
    let r = &report.vol_cs.result;
    for (i, c) in report.filling.components.iter().enumerate() {
        let m = report.solution.m[i];
        let l = c.l.map(fmt_c).unwrap_or_else(|| "-".into());
        let uv = c.uv.map(|(u, v)| format!("({u}, {v})")).unwrap_or_else(|| "-".into());
        println!("component {i}: m = {}, l = {l}, (u, v) = {uv}", fmt_c(m));
    }
    for (j, w) in report.solution.w.iter().enumerate() {
        println!("w[{j}] = {}", fmt_c(*w));
    }
    println!("residual_max = {:.3e}", report.residual_max);
    println!("W0 = {}", fmt_c(r.w0));
    println!("vol = {:.10}", r.vol);
    println!("cs = {:.10} (mod pi^2)", r.cs);
    let col = &report.coloring;
    let mut v = solution_json(&report.solution);
    let extra = json!({
        "filling": report.filling.to_file(),
        "coloring": ColoringFile::new(col.seed_region, col.v[col.seed_region], col.w.expect("assembled")),
        "residual_max": r.residual_max,
        "W0": to_pair(r.w0), "vol": r.vol, "cs": r.cs,
        "gluing_report": report.vol_cs.gluing,
    });
    merge(&mut v, extra);
    write_json(json_out, &v)
}

fn merge(a: &mut Value, b: Value) {
    if let (Value::Object(a), Value::Object(b)) = (a, b) {
        a.extend(b);
    }
}

fn solve(
    diagram: &Path,
    m: &str,
    filling: Option<&str>,
    l: Option<&str>,
    cfg: &SolveConfig,
    json_out: Option<&Path>,
) -> Result<(), Failure> {
    let d = read_diagram(diagram)?;
    let h = d.n_components();
    let mut ms = parse_complex_list(m).map_err(Failure::Input)?;
    if ms.len() == 1 && h > 1 {
        ms = vec![ms[0]; h];
    }
    if ms.len() != h {
        return Err(Failure::Input(format!("--m has {} entries, diagram has {h} components", ms.len())));
    }
    if ms.iter().any(|z| z.norm_sqr() == 0.0 || !z.is_finite()) {
        return Err(Failure::Input("--m entries must be nonzero".into()));
    }
    let mut filling = match filling {
        Some(f) => parse_filling(f, l, h)?,
        None => FillingSpec::unfilled(h),
    };
    filling.complete_uv(&ms)?;
    let t = Instant::now();
    let found = multi_start(&d, &ms, cfg);
    let mut entries = Vec::new();
    for f in &found {
        let Ok(vc) = vol_cs(&d, &f.solution, &filling, 1e-6) else { continue };
        let r = &vc.result;
        println!("W0 = {}  vol = {:.10}  cs = {:.10}  residual = {:.2e}", fmt_c(r.w0), r.vol, r.cs, r.residual_max);
        let mut v = solution_json(&f.solution);
        merge(
            &mut v,
            json!({
                "residual_max": r.residual_max, "W0": to_pair(r.w0), "vol": r.vol, "cs": r.cs,
                "gluing_report": vc.gluing,
            }),
        );
        entries.push(v);
    }
    println!("{} distinct solution(s) from {} seeds in {:.2?}", entries.len(), cfg.seeds, t.elapsed());
    write_json(json_out, &json!({"filling": filling.to_file(), "solutions": entries}))
}

fn verify(
    diagram: &Path,
    solution: &Path,
    filling: Option<&str>,
    l: Option<&str>,
    tol: f64,
    json_out: Option<&Path>,
) -> Result<(), Failure> {
    let d = read_diagram(diagram)?;
    let text = read(solution)?;
    let value: Value = serde_json::from_str(&text)?;
    let files: Vec<SolutionFile> = match value.get("solutions") {
        Some(list) => serde_json::from_value(list.clone())?,
        None => vec![serde_json::from_value(value)?],
    };
    let mut all_ok = true;
    let mut reports = Vec::new();
    for (idx, f) in files.iter().enumerate() {
        let s = f.to_solution(&d)?;
        let mut fill = match filling {
            Some(f) => Some(parse_filling(f, l, d.n_components())?),
            None => None,
        };
        if let Some(fs) = fill.as_mut() {
            fs.complete_uv(&s.m)?;
        }
        let degen = is_nondegenerate(&d, &s);
        let mut ok = degen.is_ok();
        println!("solution {idx}:");
        for (c, q, v) in &degen.failures {
            println!("  degenerate: crossing {c}, ratio {q} = {}", fmt_c(*v));
        }
        let mut entry = json!({"index": idx, "nondegenerate": degen.is_ok()});
        if degen.is_ok() {
            let res = critical_residuals(&d, &s)?;
            let gl = gluing_check(&d, &s)?;
            println!("  critical residual max = {:.3e}", res.max());
            for (j, (a, b)) in res.exp_form.iter().zip(&res.tau_form).enumerate() {
                if a.norm().max(b.norm()) > tol {
                    println!("  region {j}: exp residual {:.3e}, tau residual {:.3e}", a.norm(), b.norm());
                }
            }
            println!(
                "  gluing: regional {:.3e}, over {:.3e}, under {:.3e}, octahedron {:.3e}",
                gl.regional_max, gl.over_max, gl.under_max, gl.octahedron_max
            );
            ok &= res.max() <= tol && gl.passed(tol);
            merge(&mut entry, json!({"residual_max": res.max(), "gluing_report": gl}));
            if let Some(fs) = &fill {
                match crate::potential::w0(&d, &s, fs) {
                    Ok(r) => {
                        println!("  W0 = {}  vol = {:.10}  cs = {:.10}", fmt_c(r.w0), r.vol, r.cs);
                        merge(&mut entry, json!({"W0": to_pair(r.w0), "vol": r.vol, "cs": r.cs}));
                    }
                    Err(e) => {
                        println!("  W0: {e}");
                        ok = false;
                    }
                }
            }
        }
        println!("  {}", if ok { "PASS" } else { "FAIL" });
        merge(&mut entry, json!({"pass": ok}));
        reports.push(entry);
        all_ok &= ok;
    }
    write_json(json_out, &json!({"pass": all_ok, "solutions": reports}))?;
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Verification("solution check failed".into()))
    }
}

const FIG8_PD: &str = include_str!("../data/figure8.pd");
const FIG8_REP: &str = include_str!("../data/figure8_rep.json");
const FIG8_COLORING: &str = include_str!("../data/figure8_coloring.json");
const FIG8_FILLING: &str = include_str!("../data/figure8_filling.json");
const WH_PD: &str = include_str!("../data/whitehead.pd");
const WH_REP: &str = include_str!("../data/whitehead_rep.json");
const WH_COLORING: &str = include_str!("../data/whitehead_coloring.json");
const WH_FILLING: &str = include_str!("../data/whitehead_filling.json");

fn golden(pd: &str, rep: &str, coloring: &str, filling: &str, want: C64) -> Result<String, String> {
    let d = load_diagram(pd).map_err(|e| e.to_string())?;
    let partial = RepresentationFile::from_json(rep).and_then(|r| r.partial()).map_err(|e| e.to_string())?;
    let rho = complete_representation(&d, &partial).map_err(|e| e.to_string())?;
    let col = ColoringFile::from_json(coloring).map_err(|e| e.to_string())?;
    let fill = FillingFile::from_json(filling).and_then(|f| f.to_spec()).map_err(|e| e.to_string())?;
    let rep = volume_from_representation(&d, &rho, &fill, &ColoringChoice::Pinned(col)).map_err(|e| e.to_string())?;
    let got = rep.vol_cs.result.w0;
    if mod_pi2_equal(got, want, 1e-4) {
        Ok(format!("W0 = {}", fmt_c(got)))
    } else {
        Err(format!("W0 = {}, expected {} mod pi^2", fmt_c(got), fmt_c(want)))
    }
}

fn check_dilog_identities() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let z6 = PI2 / 6.0;
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let z = C64::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let li = |x| dilog(x).expect("finite");
        let inv = li(z) + li(1.0 / z) + z6 + 0.5 * plog(-z).powi(2);
        let refl = li(z) + li(1.0 - z) - z6 + plog(z) * plog(1.0 - z);
        worst = worst.max(inv.norm()).max(refl.norm());
    }
    let one = (dilog(C64::new(1.0, 0.0)).expect("finite").re - z6).abs();
    let minus = (dilog(C64::new(-1.0, 0.0)).expect("finite").re + PI2 / 12.0).abs();
    worst = worst.max(one).max(minus);
    if worst <= 1e-10 {
        Ok(format!("max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e}"))
    }
}

fn check_derivatives() -> Result<String, String> {
    let d = load_diagram(FIG8_PD).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w: Vec<C64> =
        (0..d.n_regions).map(|_| C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(-3.0..3.0))).collect();
    let s = Solution::new(&d, w, vec![C64::from_polar(1.2, 0.4)]).map_err(|e| e.to_string())?;
    let g = log_gradient(&d, &s).map_err(|e| e.to_string())?;
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..s.n_vars() {
        let shift = |t: f64| {
            let mut p = s.clone();
            if k < p.w.len() {
                p.w[k] *= C64::new(t, 0.0).exp();
            } else {
                p.m[k - p.w.len()] *= C64::new(t, 0.0).exp();
            }
            total_potential(&d, &p)
        };
        let fd = (shift(h) - shift(-h)) / (2.0 * h);
        worst = worst.max((fd - g[k]).norm());
    }
    if worst <= 1e-6 {
        Ok(format!("max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e}"))
    }
}

fn selftest(json_out: Option<&Path>) -> Result<(), Failure> {
    let t = Instant::now();
    let checks: Vec<(&str, Result<String, String>)> = vec![
        ("dilogarithm identities", check_dilog_identities()),
        ("analytic derivatives", check_derivatives()),
        (
            "figure-eight 2/3 filling",
            golden(FIG8_PD, FIG8_REP, FIG8_COLORING, FIG8_FILLING, C64::new(-3.33836, 1.73712)),
        ),
        ("Whitehead (-5, -5/2) filling", golden(WH_PD, WH_REP, WH_COLORING, WH_FILLING, C64::new(1.18520, 0.94270))),
    ];
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, r) in &checks {
        let (pass, msg) = match r {
            Ok(m) => (true, m),
            Err(m) => (false, m),
        };
        ok &= pass;
        println!("{} {name}: {msg}", if pass { "PASS" } else { "FAIL" });
        rows.push(json!({"check": name, "pass": pass, "detail": msg}));
    }
    println!("{} in {:.2?}", if ok { "PASS" } else { "FAIL" }, t.elapsed());
    write_json(json_out, &json!({"pass": ok, "checks": rows}))?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification("selftest".into()))
    }
}
