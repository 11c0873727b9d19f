//! Command-line front end: argument parsing, run-configuration ingestion and
//! emission of JSON reports, CSV curves and SVG figures.
//!
//! Exit status: `0` success, `2` a check ran but failed, `1` usage or
//! operational error. Relative output paths resolve against `--out-dir`,
//! falling back to the `HSURF_OUT_DIR` environment variable and then to the
//! working directory. Every report embeds the resolved [`RunConfig`].

use crate::annulus_robin::{compare_scan, critical_points_radial, AnnulusModel, RadialCurve, RadialFunction};
use crate::bubble_core::{rotation_from_angles, AngleTriple, BubbleParams, Point2, Rotation3};
use crate::construction::{
    find_critical_configuration, limiting_spheres, max_center_deviation, ConstructionParams, SphereConfig,
};
use crate::direct_energy::{
    validate_datum_cross_term, validate_one_bubble_expansion, validate_pair_interaction, validate_pair_third_row,
    Resolution,
};
use crate::domain_green::{h_tilde, radii, robin_diagonal, DomainModel, Mobius};
use crate::error::{Error, Result};
use crate::linearized_s2::{kernel_report, spectral_gap_check};
use crate::reduced_energy::{
    concentration_w, optimal_lambda, rotation_extremal_datum, rotation_extremal_search, sigma_breakdown,
    sigma_gradient, two_bubble_extremal, two_bubble_extremal_search, BoundaryDatum, Configuration, GOmega,
    LinearDatum, ZeroDatum,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HSURF_OUT_DIR";

/// Separation constant `C̄` used when a configuration does not set one.
pub const DEFAULT_C_BAR: f64 = 10.0;

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for usage and operational errors.
pub const EXIT_USAGE: i32 = 1;
/// Exit status when a check ran to completion and failed.
pub const EXIT_VALIDATION: i32 = 2;

/// Domain selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    #[default]
    Disk,
    /// A Möbius image of the unit disk, given by the map `Ω → D`.
    Mobius { map: Mobius },
    /// The annulus `1/ρ < |z| < ρ`.
    Annulus { rho: f64, series_terms: Option<usize> },
}

impl DomainSpec {
    pub fn model(&self) -> Result<DomainModel> {
        Ok(match self {
            DomainSpec::Disk => DomainModel::Disk,
            DomainSpec::Mobius { map } => DomainModel::mobius(*map),
            DomainSpec::Annulus { rho, series_terms } => DomainModel::Annulus(match series_terms {
                Some(k) => AnnulusModel::with_terms(*rho, *k)?,
                None => AnnulusModel::new(*rho)?,
            }),
        })
    }
}

/// Boundary datum selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum DatumSpec {
    #[default]
    Zero,
    Linear { col_x: [f64; 3], col_y: [f64; 3], offset: [f64; 3] },
    GOmega { omega: f64 },
    /// The multi-sphere datum for `k` targets (equally spaced if empty).
    GKOmega { omega: f64, k: usize, targets: Vec<[f64; 3]> },
}

impl DatumSpec {
    pub fn datum(&self, eps: f64) -> Result<Arc<dyn BoundaryDatum>> {
        Ok(match self {
            DatumSpec::Zero => Arc::new(ZeroDatum),
            DatumSpec::Linear { col_x, col_y, offset } => {
                Arc::new(LinearDatum { col_x: *col_x, col_y: *col_y, offset: *offset })
            }
            DatumSpec::GOmega { omega } => Arc::new(GOmega::new(*omega)?),
            DatumSpec::GKOmega { omega, k, targets } => {
                let t = if targets.is_empty() { SphereConfig::equally_spaced(*k)? } else { SphereConfig::new(targets.clone())? };
                let p = ConstructionParams::new(*k, *omega, eps, 0.1, t)?;
                Arc::new(crate::construction::build_g_k_omega(&p)?)
            }
        })
    }
}

/// One bubble: centre, scale and either chart angles `(θ, ψ, φ)` (identity at
/// `(π/2, 0, 0)`) or an explicit rotation matrix (rows); identity if neither.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleSpec {
    pub center: [f64; 2],
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[[f64; 3]; 3]>,
}

impl BubbleSpec {
    pub fn params(&self) -> Result<BubbleParams> {
        let r = match (&self.angles, &self.rotation) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput("bubble: give either angles or rotation, not both".into()))
            }
            (Some(a), None) => rotation_from_angles(AngleTriple::from_array(*a)),
            (None, Some(m)) => Rotation3::from_rows(*m)?,
            (None, None) => Rotation3::identity(),
        };
        BubbleParams::new(Point2::new(self.center[0], self.center[1]), self.scale, r)
    }
}

/// Numerical knobs; unset entries take the documented defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Numerics {
    pub series_terms: Option<usize>,
    pub grid: Option<usize>,
    pub mu: Option<f64>,
    pub tol: Option<f64>,
    pub n_max: Option<usize>,
    pub c_bar: Option<f64>,
    pub kappa: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub quadrature: Option<Resolution>,
    pub threads: Option<usize>,
}

/// Output locations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Outputs {
    pub out_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Fully resolved description of one run; emitted inside every report and
/// accepted back by `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub domain: DomainSpec,
    pub datum: DatumSpec,
    pub bubbles: Vec<BubbleSpec>,
    pub epsilon: Option<f64>,
    pub point: Option<[f64; 2]>,
    pub suite: Option<String>,
    pub numerics: Numerics,
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn configuration(&self) -> Result<Configuration> {
        let eps = self.epsilon.ok_or_else(|| Error::InvalidInput("epsilon: missing".into()))?;
        let bubbles = self.bubbles.iter().map(|b| b.params()).collect::<Result<Vec<_>>>()?;
        Configuration::new(eps, bubbles, self.numerics.c_bar.unwrap_or(DEFAULT_C_BAR))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.outputs.out_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hsurf", version, about = "Bubble calculus, Robin functions and reduced energies for the H-surface equation")]
struct Cli {
    /// Print the machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for relative output paths (default: $HSURF_OUT_DIR, else the working directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Robin function, H̃ and the two radii at a point.
    Robin(RobinArgs),
    /// Radial profiles of H̃ and 2e^{2H} on an annulus (CSV, optional SVG).
    AnnulusCompare(AnnulusArgs),
    /// Reduced energy value, gradient blocks and diagnostics of a configuration.
    EnergyExpand(ConfigArgs),
    /// Critical scales, rotation extremals and concentration functions.
    ReduceCritical(ConfigArgs),
    /// Multi-sphere critical-point construction with its certificate.
    ConstructSpheres(ConstructArgs),
    /// Kernel dimensions of the linearised operator per harmonic degree.
    Kernel(KernelArgs),
    /// Direct-quadrature validation suites of the reduced expansion.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct RobinArgs {
    /// Query point `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    point: [f64; 2],
    /// JSON file with a Möbius map `{alpha, beta, gamma, delta}` (complex as `[re, im]`).
    #[arg(long, conflicts_with = "rho")]
    mobius: Option<PathBuf>,
    /// Annulus parameter ρ > 1 (domain 1/ρ < |z| < ρ).
    #[arg(long)]
    rho: Option<f64>,
    /// Series terms K for the annulus.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnnulusArgs {
    #[arg(long)]
    rho: f64,
    /// Series terms K (default from the tail bound).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 501)]
    grid: usize,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Optional JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Run configuration JSON (ε, domain, datum, bubbles).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.95)]
    omega: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    mu: f64,
    /// JSON list of unit target vectors (default: equally spaced).
    #[arg(long)]
    targets: Option<PathBuf>,
    #[arg(long, default_value = "run.json")]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long, default_value_t = 12)]
    nmax: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    OneBubble,
    Pair,
    Datum,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::OneBubble => "one-bubble",
            Suite::Pair => "pair",
            Suite::Datum => "datum",
        }
    }
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Scales λ (comma separated).
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Multiplier of every quadrature node count.
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("point: expected `x,y`, got `{s}`"));
    }
    let p = |t: &str, name: &str| t.trim().parse::<f64>().map_err(|e| format!("point.{name}: {e}"));
    Ok([p(parts[0], "x")?, p(parts[1], "y")?])
}

/// Outcome of a command: the report and whether its checks passed.
struct Outcome {
    report: Value,
    summary: String,
    pass: bool,
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit status.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: threads: must be at least 1");
            return EXIT_USAGE;
        }
        // Only the first pool configuration in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out_dir = cli.out_dir.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    match execute(&cli, out_dir) {
        Ok(o) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&o.report).unwrap_or_default());
            } else {
                print!("{}", o.summary);
            }
            if o.pass {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            }
        }
        Err(e) => {
            let code = match e {
                Error::CertificateFailure { .. } | Error::SearchFailure { .. } => EXIT_VALIDATION,
                _ => EXIT_USAGE,
            };
            if cli.json {
                println!("{}", json!({ "error": e.to_string(), "exit_code": code }));
            }
            eprintln!("error: {e}");
            code
        }
    }
}

fn execute(cli: &Cli, out_dir: Option<PathBuf>) -> Result<Outcome> {
    let mut cfg = RunConfig { outputs: Outputs { out_dir, ..Default::default() }, ..Default::default() };
    cfg.numerics.threads = cli.threads;
    let outcome = match &cli.command {
        Command::Robin(a) => robin(a, cfg)?,
        Command::AnnulusCompare(a) => annulus_compare(a, cfg)?,
        Command::EnergyExpand(a) => energy_expand(a, cfg)?,
        Command::ReduceCritical(a) => reduce_critical(a, cfg)?,
        Command::ConstructSpheres(a) => construct_spheres(a, cfg)?,
        Command::Kernel(a) => kernel(a, cfg)?,
        Command::Validate(a) => validate(a, cfg)?,
    };
    Ok(outcome)
}

fn require_file(p: &Path, field: &str) -> Result<()> {
    if !p.is_file() {
        return Err(Error::InvalidInput(format!("{field}: file {} does not exist", p.display())));
    }
    Ok(())
}

fn write_json(cfg: &RunConfig, path: &Option<PathBuf>, report: &Value) -> Result<()> {
    if let Some(p) = path {
        let p = cfg.resolve(p);
        if let Some(dir) = p.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(p, serde_json::to_string_pretty(report)?)?;
    }
    Ok(())
}

fn finish(cfg: &RunConfig, mut body: Value, summary: String, pass: bool) -> Result<Outcome> {
    body["config"] = serde_json::to_value(cfg)?;
    body["pass"] = json!(pass);
    // `annulus-compare` writes its curve to `--out`; its JSON goes to `--report`.
    let json_path = if cfg.command == "annulus-compare" { &cfg.outputs.report } else { &cfg.outputs.out };
    write_json(cfg, json_path, &body)?;
    Ok(Outcome { report: body, summary, pass })
}

fn robin(a: &RobinArgs, mut cfg: RunConfig) -> Result<Outcome> {
    cfg.command = "robin".into();
    cfg.point = Some(a.point);
    cfg.outputs.out = a.out.clone();
    cfg.domain = if let Some(path) = &a.mobius {
        require_file(path, "mobius")?;
        let map: Mobius = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        DomainSpec::Mobius { map }
    } else if let Some(rho) = a.rho {
        cfg.numerics.series_terms = a.k;
        DomainSpec::Annulus { rho, series_terms: a.k }
    } else {
        DomainSpec::Disk
    };
    let d = cfg.domain.model()?;
    let p = Point2::new(a.point[0], a.point[1]);
    let h = robin_diagonal(&d, p)?;
    let ht = h_tilde(&d, p)?;
    let two_e2h = 2.0 * (2.0 * h).exp();
    let (r_har, r_hyp) = radii(&d, p)?;
    let rel = ((ht - two_e2h) / ht).abs();
    // On simply connected domains the two functions coincide.
    let pass = matches!(cfg.domain, DomainSpec::Annulus { .. }) || rel < 1e-10;
    let summary = format!(
        "H(a,a) = {h:.12}\nH̃(a) = {ht:.12}\n2e^(2H) = {two_e2h:.12}\nrelative difference = {rel:.3e}\nharmonic radius = {r_har:.12}\nhyperbolic radius = {r_hyp:.12}\n"
    );
    let body = json!({
        "robin_diagonal": h, "h_tilde": ht, "two_e2h": two_e2h, "relative_difference": rel,
        "harmonic_radius": r_har, "hyperbolic_radius": r_hyp,
    });
    finish(&cfg, body, summary, pass)
}

fn annulus_compare(a: &AnnulusArgs, mut cfg: RunConfig) -> Result<Outcome> {
    cfg.command = "annulus-compare".into();
    cfg.domain = DomainSpec::Annulus { rho: a.rho, series_terms: a.k };
    cfg.numerics.series_terms = a.k;
    cfg.numerics.grid = Some(a.grid);
    cfg.outputs.out = Some(a.out.clone());
    cfg.outputs.svg = a.svg.clone();
    cfg.outputs.report = a.report.clone();
    let m = match a.k {
        Some(k) => AnnulusModel::with_terms(a.rho, k)?,
        None => AnnulusModel::new(a.rho)?,
    };
    let curve = compare_scan(&m, a.grid)?;
    let crit_h = critical_points_radial(RadialFunction::HTilde, &m)?;
    let crit_r = critical_points_radial(RadialFunction::TwoE2H, &m)?;
    write_curve_csv(&cfg.resolve(&a.out), &curve)?;
    if let Some(svg) = &a.svg {
        std::fs::write(cfg.resolve(svg), annulus_svg(&curve))?;
    }
    let summary = format!(
        "rho = {}, K = {}, grid = {}\nmax relative difference = {:.6e}\ncritical log x (H̃) = {:?}\ncritical log x (2e^(2H)) = {:?}\nCSV: {}\n",
        a.rho,
        m.k_terms,
        a.grid,
        curve.max_relative_difference(),
        crit_h,
        crit_r,
        cfg.resolve(&a.out).display()
    );
    let body = json!({
        "rho": a.rho, "k_terms": m.k_terms, "grid": a.grid,
        "max_relative_difference": curve.max_relative_difference(),
        "critical_log_x_h_tilde": crit_h, "critical_log_x_two_e2h": crit_r,
        "h_tilde_tail_bound": m.h_tilde_tail_bound(), "product_tail_bound": m.product_tail_bound(),
    });
    finish(&cfg, body, summary, true)
}

/// Writes `x, h_tilde, two_e2H` rows after `#` comment lines recording ρ, K
/// and the prefactor convention.
pub fn write_curve_csv(path: &Path, c: &RadialCurve) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "# rho={}", c.rho)?;
    writeln!(f, "# K={}", c.k_terms)?;
    writeln!(
        f,
        "# prefactor={}",
        if c.constant_factored { "common positive constant factored out of both columns" } else { "full" }
    )?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["x", "h_tilde", "two_e2H"])?;
    for i in 0..c.x.len() {
        w.write_record([c.x[i].to_string(), c.h_tilde[i].to_string(), c.two_e2h[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn load_config(path: &Path, command: &str, base: RunConfig) -> Result<RunConfig> {
    require_file(path, "config")?;
    let mut cfg = RunConfig::load(path)?;
    cfg.command = command.into();
    cfg.outputs.out_dir = base.outputs.out_dir.or(cfg.outputs.out_dir);
    cfg.numerics.threads = base.numerics.threads.or(cfg.numerics.threads);
    cfg.numerics.c_bar.get_or_insert(DEFAULT_C_BAR);
    Ok(cfg)
}

fn energy_expand(a: &ConfigArgs, base: RunConfig) -> Result<Outcome> {
    let mut cfg = load_config(&a.config, "energy-expand", base)?;
    cfg.outputs.out = a.out.clone().or(cfg.outputs.out);
    let c = cfg.configuration()?;
    let d = cfg.domain.model()?;
    let g = cfg.datum.datum(c.epsilon)?;
    c.validate(&d)?;
    let report = sigma_gradient(&c, &d, g.as_ref())?;
    let breakdown = sigma_breakdown(&c, &d, g.as_ref())?;
    let mut summary = format!("Σ = {:.12e}\n|∇Σ| = {:.6e}\n", report.value, report.gradient_norm);
    for (i, b) in report.gradient.iter().enumerate() {
        let _ = writeln!(summary, "  bubble {i}: ∂a = {:?}, ∂λ = {:.6e}, ∂angles = {:?}", b.position, b.scale, b.angles);
    }
    let body = json!({ "value": report.value, "gradient": report.gradient, "gradient_norm": report.gradient_norm,
        "diagnostics": report.diagnostics, "breakdown": breakdown });
    finish(&cfg, body, summary, true)
}

fn reduce_critical(a: &ConfigArgs, base: RunConfig) -> Result<Outcome> {
    let mut cfg = load_config(&a.config, "reduce-critical", base)?;
    cfg.outputs.out = a.out.clone().or(cfg.outputs.out);
    let c = cfg.configuration()?;
    let d = cfg.domain.model()?;
    let g = cfg.datum.datum(c.epsilon)?;
    let mut per_bubble = Vec::new();
    let mut summary = String::new();
    let mut pass = true;
    for (i, b) in c.bubbles.iter().enumerate() {
        let lam = optimal_lambda(c.epsilon, b.center, &b.rotation, &d, g.as_ref());
        let lam_json = match &lam {
            Ok(v) => json!(v),
            Err(e) => json!({ "error": e.to_string() }),
        };
        let mut entry = json!({ "bubble": i, "optimal_lambda": lam_json });
        if !g.is_zero() {
            let (plus, minus) = rotation_extremal_datum(g.as_ref(), b.center)?;
            let (search_max, _) = rotation_extremal_search(g.as_ref(), b.center);
            let agree = (search_max - plus).abs() <= 1e-6 * (1.0 + plus.abs());
            pass &= agree;
            entry["rotation_extremal"] =
                json!({ "max": plus, "other_critical": minus, "search_max": search_max, "agree": agree });
            entry["concentration_w"] = json!(concentration_w(g.as_ref(), &d, b.center)?);
        }
        let _ = writeln!(summary, "bubble {i}: {entry}");
        per_bubble.push(entry);
    }
    let mut body = json!({ "bubbles": per_bubble });
    if c.bubbles.len() == 2 {
        let (p, q) = (c.bubbles[0].center, c.bubbles[1].center);
        let closed = two_bubble_extremal(p, q, &d)?;
        let (search, _) = two_bubble_extremal_search(p, q, &d)?;
        let agree = (search - closed).abs() <= 1e-6 * (1.0 + closed.abs());
        pass &= agree;
        let _ = writeln!(summary, "two-bubble extremal: closed form {closed:.12e}, search {search:.12e}");
        body["two_bubble_extremal"] = json!({ "closed_form": closed, "search": search, "agree": agree });
    }
    finish(&cfg, body, summary, pass)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TargetsFile {
    List(Vec<[f64; 3]>),
    Object { targets: Vec<[f64; 3]> },
}

fn construct_spheres(a: &ConstructArgs, mut cfg: RunConfig) -> Result<Outcome> {
    cfg.command = "construct-spheres".into();
    let targets = match &a.targets {
        Some(p) => {
            require_file(p, "targets")?;
            match serde_json::from_str::<TargetsFile>(&std::fs::read_to_string(p)?)? {
                TargetsFile::List(v) | TargetsFile::Object { targets: v } => v,
            }
        }
        None => SphereConfig::equally_spaced(a.k)?.centers,
    };
    cfg.datum = DatumSpec::GKOmega { omega: a.omega, k: a.k, targets: targets.clone() };
    cfg.epsilon = Some(a.eps);
    cfg.numerics.mu = Some(a.mu);
    cfg.outputs.out = Some(a.out.clone());
    cfg.outputs.svg = a.svg.clone();
    let sc = SphereConfig::new(targets)?;
    let params = ConstructionParams::new(a.k, a.omega, a.eps, a.mu, sc.clone())?;
    let (conf, cert) = match find_critical_configuration(&params) {
        Ok(r) => r,
        Err(e @ (Error::CertificateFailure { .. } | Error::SearchFailure { .. })) => {
            let body = json!({ "error": e.to_string() });
            let out = finish(&cfg, body, format!("construction failed: {e}\n"), false)?;
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    let spheres: Vec<[f64; 3]> = limiting_spheres(&conf).iter().map(|v| [v.x, v.y, v.z]).collect();
    let deviation = max_center_deviation(&conf, &sc);
    if let Some(svg) = &a.svg {
        std::fs::write(cfg.resolve(svg), spheres_svg(&spheres, &sc.centers))?;
    }
    let mut summary = format!(
        "certificate pass = {}\nNewton iterations = {}, |∇Σ| = {:.3e}\nHessian min eigenvalue/ε² = {:.4}\n",
        cert.pass, cert.newton_iterations, cert.gradient_norm, cert.hessian_min_eigenvalue_normalized
    );
    for b in &cert.blocks {
        let _ = writeln!(summary, "  block {}: boundary margin/ε² = {:.4}", b.block, b.normalized_margin);
    }
    let _ = writeln!(summary, "max |centre − target| = {deviation:.6e}");
    for (i, s) in spheres.iter().enumerate() {
        let _ = writeln!(summary, "  sphere {i}: centre ({:.6}, {:.6}, {:.6})", s[0], s[1], s[2]);
    }
    let pass = cert.pass;
    let body = json!({ "configuration": conf, "certificate": cert, "sphere_centers": spheres,
        "targets": sc.centers, "max_center_deviation": deviation });
    finish(&cfg, body, summary, pass)
}

fn kernel(a: &KernelArgs, mut cfg: RunConfig) -> Result<Outcome> {
    cfg.command = "kernel".into();
    cfg.numerics.n_max = Some(a.nmax);
    cfg.numerics.tol = Some(a.tol);
    cfg.outputs.out = a.out.clone();
    let r = kernel_report(a.nmax, a.tol);
    let dims: BTreeMap<usize, usize> = r.degrees.iter().map(|d| (d.n, d.dimension)).collect();
    let gap = if a.nmax >= 4 { Some(spectral_gap_check(a.nmax)?) } else { None };
    let pass = r.dims.first() == Some(&3)
        && (a.nmax < 3 || r.total_low_degree == 9)
        && r.dims.iter().skip(4).all(|&d| d == 0)
        && gap.as_ref().map(|g| g.pass).unwrap_or(true);
    let mut summary = String::new();
    for d in &r.degrees {
        let _ = writeln!(
            summary,
            "n = {:2}: kernel dimension {}  (smallest nonzero singular value {:?}; bound admits kernel: {})",
            d.n, d.dimension, d.smallest_nonzero_singular_value, d.bound_admits_kernel
        );
    }
    let _ = writeln!(summary, "total over n ≤ 3: {}", r.total_low_degree);
    let body = json!({ "dims": dims, "degrees": r.degrees, "total_low_degree": r.total_low_degree,
        "bound": r.bound, "spectral_gap": gap });
    finish(&cfg, body, summary, pass)
}

fn validate(a: &ValidateArgs, mut cfg: RunConfig) -> Result<Outcome> {
    cfg.command = "validate".into();
    cfg.suite = Some(a.suite.name().into());
    cfg.outputs.out = a.out.clone();
    if !(a.resolution > 0.0) {
        return Err(Error::InvalidInput("resolution: must be positive".into()));
    }
    let res = Resolution::default().scaled(a.resolution);
    cfg.numerics.quadrature = Some(res);
    let (body, summary, pass) = match a.suite {
        Suite::OneBubble => {
            let lambdas = a.lambdas.clone().unwrap_or_else(|| vec![10.0, 20.0, 40.0, 80.0]);
            let omega = 0.5;
            let a_datum = Point2::new(0.2, 0.1);
            cfg.numerics.lambdas = Some(lambdas.clone());
            cfg.numerics.kappa = Some(2.0);
            cfg.datum = DatumSpec::GOmega { omega };
            let zero = validate_one_bubble_expansion(Point2::ORIGIN, &Rotation3::identity(), &lambdas, 2.0, &ZeroDatum, &res)?;
            let datum = validate_one_bubble_expansion(a_datum, &Rotation3::identity(), &lambdas, 2.0, &GOmega::new(omega)?, &res)?;
            let pass = zero.pass && datum.datum_ok;
            let summary = format!(
                "fitted constant {:.9} (4π/3 = {:.9}, 8A₀/9 = {:.9})\nresidual slopes {:?}\ndatum coefficient relative errors {:?}\n",
                zero.fitted_constant, zero.direct_level, zero.stated_constant, zero.residual_slopes, datum.datum_relative_errors
            );
            (json!({ "zero_datum": zero, "g_omega_datum": datum }), summary, pass)
        }
        Suite::Pair => {
            let lambdas = a.lambdas.clone().unwrap_or_else(|| vec![20.0, 40.0, 80.0]);
            cfg.numerics.lambdas = Some(lambdas.clone());
            let (p1, p2) = (Point2::new(-0.3, 0.0), Point2::new(0.3, 0.0));
            let tr = validate_pair_third_row(p1, p2, &lambdas, &res)?;
            let antipodal_r = Rotation3::planar(std::f64::consts::PI);
            let last = *lambdas.last().unwrap_or(&80.0);
            let anti = validate_pair_interaction(p1, p2, &Rotation3::identity(), &antipodal_r, &[last], &res)?;
            let flips = (anti.predicted + tr.diagonal.predicted).abs() < 1e-12 * tr.diagonal.predicted.abs().max(1.0)
                && anti.measured[0] * tr.diagonal.measured.last().copied().unwrap_or(0.0) < 0.0;
            let pass = tr.diagonal.pass && tr.pass && anti.pass && flips;
            let summary = format!(
                "diagonal: closed form {:.6}, λ²·quadrature {:?}, relative errors {:?}\nout-of-plane share {:.4}\nantipodal: closed form {:.6}, λ²·quadrature {:?}\n",
                tr.diagonal.predicted, tr.diagonal.measured, tr.diagonal.relative_errors, tr.relative_contribution,
                anti.predicted, anti.measured
            );
            (json!({ "third_row": tr, "antipodal": anti, "antipodal_flips_sign": flips }), summary, pass)
        }
        Suite::Datum => {
            let lambdas = a.lambdas.clone().unwrap_or_else(|| vec![10.0, 20.0, 40.0, 80.0]);
            let omega = 0.5;
            cfg.numerics.lambdas = Some(lambdas.clone());
            cfg.numerics.kappa = Some(2.0);
            cfg.datum = DatumSpec::GOmega { omega };
            let g = GOmega::new(omega)?;
            let id = Rotation3::identity();
            let two = Configuration::new(
                1.0,
                vec![BubbleParams::new(Point2::new(-0.3, 0.0), 1.0, id)?, BubbleParams::new(Point2::new(0.3, 0.0), 1.0, id)?],
                1e6,
            )?;
            let one = Configuration::new(1.0, vec![BubbleParams::new(Point2::new(0.2, 0.1), 1.0, id)?], 1e6)?;
            let r2 = validate_datum_cross_term(&two, &g, &lambdas, 2.0, &res)?;
            let r1 = validate_datum_cross_term(&one, &g, &lambdas, 2.0, &res)?;
            let rz = validate_datum_cross_term(&two, &ZeroDatum, &lambdas[..2.min(lambdas.len())], 2.0, &res)?;
            let zero_ok = rz.measured.iter().all(|m| *m == 0.0);
            let pass = r2.pass && r1.pass && zero_ok;
            let summary = format!(
                "two bubbles: remainder slopes (after |log ε|) {:?}\none bubble: remainder slopes {:?}\nzero datum term vanishes: {zero_ok}\n",
                r2.remainder_slopes, r1.remainder_slopes
            );
            (json!({ "two_bubbles": r2, "one_bubble": r1, "zero_datum": rz, "zero_datum_vanishes": zero_ok }), summary, pass)
        }
    };
    finish(&cfg, body, summary, pass)
}

fn polyline(points: &[(f64, f64)], bounds: (f64, f64, f64, f64), size: (f64, f64), color: &str) -> String {
    let (x0, x1, y0, y1) = bounds;
    let (w, h) = size;
    let mut s = String::new();
    for (x, y) in points {
        let px = 50.0 + (x - x0) / (x1 - x0) * (w - 100.0);
        let py = h - 50.0 - (y - y0) / (y1 - y0) * (h - 100.0);
        let _ = write!(s, "{px:.2},{py:.2} ");
    }
    format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n", s.trim_end())
}

/// Self-contained SVG of `log H̃` and `log 2e^{2H}` against `log x`.
pub fn annulus_svg(c: &RadialCurve) -> String {
    let a: Vec<(f64, f64)> = c.x.iter().zip(&c.h_tilde).map(|(x, v)| (x.ln(), v.ln())).collect();
    let b: Vec<(f64, f64)> = c.x.iter().zip(&c.two_e2h).map(|(x, v)| (x.ln(), v.ln())).collect();
    let all = a.iter().chain(&b);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let size = (640.0, 420.0);
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n\
<rect width=\"640\" height=\"420\" fill=\"white\"/>\n\
<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">log ρ = {:.4}: log H̃ (blue) and log 2e^(2H) (red) vs log |z|</text>\n{}{}</svg>\n",
        c.rho.ln(),
        polyline(&a, (x0, x1, y0, y1), size, "#1f77b4"),
        polyline(&b, (x0, x1, y0, y1), size, "#d62728")
    )
}

/// Orthographic projection onto the `(x, y)` plane of the unit spheres
/// centred at `centers` (all through the origin), with targets marked.
pub fn spheres_svg(centers: &[[f64; 3]], targets: &[[f64; 3]]) -> String {
    let scale = 100.0;
    let (cx, cy) = (300.0, 300.0);
    let mut s = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n<rect width=\"600\" height=\"600\" fill=\"white\"/>\n",
    );
    for c in centers {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{scale}\" fill=\"#1f77b4\" fill-opacity=\"0.15\" stroke=\"#1f77b4\"/>",
            cx + scale * c[0],
            cy - scale * c[1]
        );
    }
    for t in targets {
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#d62728\"/>", cx + scale * t[0], cy - scale * t[1]);
    }
    let _ = writeln!(s, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"black\"/>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips() {
        let cfg = RunConfig {
            command: "energy-expand".into(),
            domain: DomainSpec::Annulus { rho: 3.0, series_terms: Some(20) },
            datum: DatumSpec::GKOmega { omega: 0.9, k: 2, targets: vec![[1.0, 0.0, 0.0]] },
            bubbles: vec![BubbleSpec { center: [0.1, 0.2], scale: 30.0, angles: Some([1.5, 0.1, 0.2]), rotation: None }],
            epsilon: Some(0.01),
            ..Default::default()
        };
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["hsurf", "frobnicate"].map(OsString::from)), EXIT_USAGE);
        assert_eq!(run(["hsurf", "kernel", "--nmax", "abc"].map(OsString::from)), EXIT_USAGE);
        assert_eq!(run(["hsurf", "--help"].map(OsString::from)), EXIT_OK);
    }
}
