//! `hle` — command-line front end for the `hle-core` toolkit.
//!
//! Subcommands mirror the library modules: `classify` (three-valued
//! membership verdicts for the weight pair), `power` (explicit power-type
//! solutions, or the one-parameter family on the homogeneous line),
//! `kelvin` (the weight reflection and its fixed point), `solve` (radial
//! Dirichlet profiles by shooting or by quotient minimisation), `region`
//! (rasterised membership maps), and `verify` (finite-difference residual
//! checks of stored profiles).
//!
//! Output conventions: verdicts and summaries are single-line JSON on
//! standard output, with every float in scientific notation at 17
//! significant digits so that output is byte-stable and round-trips
//! exactly; profiles and region grids are CSV with a header row and LF
//! line endings.  Exit codes: 0 on success, 1 when a wrapped computation
//! fails (a JSON object `{"error", "detail"}` is printed), 2 on usage
//! errors (message on standard error).

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hle_core::power::{kelvin_map, power_family_h, power_solution};
use hle_core::regions::membership_e;
use hle_core::solver::rayleigh::{minimize_rayleigh_with, RayleighOptions};
use hle_core::solver::shooting::{shoot_radial_with, ShootOptions};
use hle_core::solver::ProfileError;
use hle_core::verify::residual_check;
use hle_core::{
    DomainError, ExponentPair, PowerError, ProfileMethod, RadialProfile, Regime, RegionVerdict,
    SolveError, TriState, VerifyError, WeightPair, DEFAULT_BOUNDARY_EPS,
};

#[derive(Parser)]
#[command(
    name = "hle",
    version,
    about = "Weighted Henon-Lane-Emden toolkit: region verdicts, power solutions, radial solvers",
    propagate_version = true
)]
struct Cli {
    /// Config file with `key = value` lines supplying defaults for
    /// `eps`, `tol`, `rtol` and `grid`; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Dimension and exponents of the system.
#[derive(Args, Clone, Copy)]
struct SystemArgs {
    /// Space dimension (n >= 3)
    #[arg(long)]
    n: u32,
    /// Exponent of v in the first equation (p > 1)
    #[arg(long)]
    p: f64,
    /// Exponent of u in the second equation (q > 1)
    #[arg(long)]
    q: f64,
}

impl SystemArgs {
    fn build(self) -> Result<ExponentPair, Failure> {
        ExponentPair::new(self.n, self.p, self.q).map_err(Failure::from)
    }
}

/// Exponents of the radial weights.
#[derive(Args, Clone, Copy)]
struct WeightArgs {
    /// Exponent of the weight |x|^a in the first equation
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    /// Exponent of the weight |x|^b in the second equation
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
}

impl WeightArgs {
    fn build(self) -> Result<WeightPair, Failure> {
        WeightPair::new(self.a, self.b).map_err(Failure::from)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Damped-Newton shooting on the central values
    Shooting,
    /// Minimisation of the weighted fourth-order Rayleigh quotient
    Rayleigh,
}

#[derive(Subcommand)]
enum Command {
    /// Classify (p, q) into its regime and (a, b) against E, E+ and Q
    ///
    /// Prints a JSON verdict with the regime, three-valued memberships
    /// (inside / boundary / outside, resolved at the tolerance `eps`),
    /// and the signed margin of every defining inequality.
    Classify {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        weights: WeightArgs,
        /// Boundary tolerance for the three-valued verdicts
        #[arg(long)]
        eps: Option<f64>,
    },

    /// Power-type solution u = c1 r^alpha, v = c2 r^beta for the weights
    ///
    /// Off the homogeneous regime the exponents are uniquely determined
    /// and a single solution is printed; on it (q = p') the system is
    /// degenerate and the one-parameter family is printed instead.
    Power {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        weights: WeightArgs,
    },

    /// Kelvin reflection of the weight pair and the fixed point of the map
    Kelvin {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        weights: WeightArgs,
    },

    /// Construct the positive radial Dirichlet profile on the unit ball
    ///
    /// Prints a JSON summary with the central values (shooting) or the
    /// minimal quotient (rayleigh) plus residual and boundary-defect
    /// figures; `--out` additionally writes the profile as `r,u,v` CSV.
    Solve {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        weights: WeightArgs,
        /// Solution method
        #[arg(long, value_enum)]
        method: Method,
        /// Grid resolution: cells of the finest grid (rayleigh) or output
        /// cells, i.e. nodes - 1 (shooting) [default: 2048]
        #[arg(long)]
        grid: Option<usize>,
        /// Convergence target: boundary defect (shooting) or relative
        /// stagnation threshold (rayleigh) [defaults: 1e-9 / 1e-12]
        #[arg(long)]
        tol: Option<f64>,
        /// Local relative tolerance of the adaptive integrator (shooting
        /// only) [default: 1e-12]
        #[arg(long)]
        rtol: Option<f64>,
        /// Write the profile CSV here
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Rasterise the (a, b) membership map over a rectangle to CSV
    ///
    /// Each row is `a,b,code` with the cell-centre coordinates, row-major
    /// with `a` as the outer (slowest) loop.  Codes: 0 = outside E,
    /// 1 = inside E but not Q, 2 = inside Q (hence inside E), 3 = within
    /// the boundary tolerance of a defining hypersurface of E or Q.
    /// Without `--out` the CSV goes to standard output; with it, the CSV
    /// goes to the file and a JSON summary with per-code cell counts is
    /// printed.  Default bounds cover Q with a margin of one unit on
    /// every side.
    Region {
        #[command(flatten)]
        sys: SystemArgs,
        /// Cells per axis (the map costs its square)
        #[arg(long)]
        grid: Option<usize>,
        /// Lower bound in a [default: -n - 1]
        #[arg(long, allow_negative_numbers = true)]
        a_min: Option<f64>,
        /// Upper bound in a [default: max(p, q) (n - 2) - n + 1]
        #[arg(long, allow_negative_numbers = true)]
        a_max: Option<f64>,
        /// Lower bound in b [default: -n - 1]
        #[arg(long, allow_negative_numbers = true)]
        b_min: Option<f64>,
        /// Upper bound in b [default: max(p, q) (n - 2) - n + 1]
        #[arg(long, allow_negative_numbers = true)]
        b_max: Option<f64>,
        /// Boundary tolerance for the three-valued verdicts
        #[arg(long)]
        eps: Option<f64>,
        /// Write the grid CSV here instead of standard output
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Finite-difference residuals of a stored profile against the system
    ///
    /// Reads an `r,u,v` CSV, rebuilds the Laplacians with three-point
    /// stencils on its nodes, and prints residual statistics JSON; `pass`
    /// reports whether the sup residual relative to the right-hand sides
    /// stays within `tol`.
    Verify {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        weights: WeightArgs,
        /// Profile CSV to check
        #[arg(long, value_name = "FILE")]
        profile: PathBuf,
        /// Coefficient of the first equation
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda1: f64,
        /// Coefficient of the second equation
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda2: f64,
        /// Acceptance threshold for the relative sup residual
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// How a run fails: bad flags or config (exit 2, message on standard
/// error) versus a failed computation (exit 1, JSON on standard output).
enum Failure {
    Usage(String),
    Computation { kind: &'static str, detail: String },
}

impl From<DomainError> for Failure {
    fn from(err: DomainError) -> Self {
        Failure::Usage(err.to_string())
    }
}

impl From<PowerError> for Failure {
    fn from(err: PowerError) -> Self {
        Failure::Computation { kind: "power", detail: err.to_string() }
    }
}

impl From<SolveError> for Failure {
    fn from(err: SolveError) -> Self {
        Failure::Computation { kind: "solve", detail: err.to_string() }
    }
}

impl From<VerifyError> for Failure {
    fn from(err: VerifyError) -> Self {
        Failure::Computation { kind: "verify", detail: err.to_string() }
    }
}

impl From<ProfileError> for Failure {
    fn from(err: ProfileError) -> Self {
        Failure::Computation { kind: "profile", detail: err.to_string() }
    }
}

fn io_failure(path: &Path, err: io::Error) -> Failure {
    Failure::Computation { kind: "io", detail: format!("{}: {err}", path.display()) }
}

/// Defaults read from `--config`; `None` means the file did not set the
/// key and the built-in default applies.
#[derive(Debug, Default, Clone, Copy)]
struct ConfigDefaults {
    eps: Option<f64>,
    tol: Option<f64>,
    rtol: Option<f64>,
    grid: Option<usize>,
}

impl ConfigDefaults {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// skipped, unknown keys are usage errors.
    fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|err| Failure::Usage(format!("--config {}: {err}", path.display())))?;
        let mut cfg = ConfigDefaults::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ctx = format!("--config {}:{}", path.display(), idx + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("{ctx}: expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let number = || -> Result<f64, Failure> {
                value.parse::<f64>().map_err(|_| {
                    Failure::Usage(format!("{ctx}: {key} needs a number, got {value:?}"))
                })
            };
            match key {
                "eps" => cfg.eps = Some(number()?),
                "tol" => cfg.tol = Some(number()?),
                "rtol" => cfg.rtol = Some(number()?),
                "grid" => {
                    cfg.grid = Some(value.parse::<usize>().map_err(|_| {
                        Failure::Usage(format!("{ctx}: grid needs a nonnegative integer, got {value:?}"))
                    })?);
                }
                other => {
                    return Err(Failure::Usage(format!(
                        "{ctx}: unknown key {other:?} (known keys: eps, tol, rtol, grid)"
                    )));
                }
            }
        }
        Ok(cfg)
    }
}

fn resolve_eps(flag: Option<f64>, cfg: &ConfigDefaults) -> Result<f64, Failure> {
    let eps = flag.or(cfg.eps).unwrap_or(DEFAULT_BOUNDARY_EPS);
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Failure::Usage(format!(
            "--eps must be a finite nonnegative number, got {eps}"
        )));
    }
    Ok(eps)
}

/// Serialises to single-line JSON with floats in scientific notation at
/// 17 significant digits (the same precision as the CSV writers), so the
/// output is byte-stable and parses back to the identical `f64`.
fn json_line<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFloats);
    value.serialize(&mut ser).expect("serialising to memory cannot fail");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

struct SciFloats;

impl serde_json::ser::Formatter for SciFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// JSON summary printed by `solve`: exactly one of `gamma` (shooting) and
/// `m_value` (rayleigh) is present.
#[derive(Serialize)]
struct SolveSummary {
    method: ProfileMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_value: Option<f64>,
    lambda: (f64, f64),
    residual_sup: f64,
    boundary_defect: f64,
    nodes: usize,
}

#[derive(Serialize)]
struct RegionBounds {
    a_min: f64,
    a_max: f64,
    b_min: f64,
    b_max: f64,
}

#[derive(Serialize)]
struct RegionCounts {
    outside: u64,
    #[serde(rename = "E_only")]
    e_only: u64,
    #[serde(rename = "Q")]
    q: u64,
    boundary: u64,
}

#[derive(Serialize)]
struct RegionSummary<'a> {
    n: u32,
    p: f64,
    q: f64,
    grid: usize,
    bounds: RegionBounds,
    boundary_tolerance: f64,
    cells: RegionCounts,
    out: &'a str,
}

/// Small-integer verdict code of one region-grid cell.
fn cell_code(verdict: &RegionVerdict) -> u8 {
    if verdict.in_e == TriState::Boundary || verdict.in_q == TriState::Boundary {
        3
    } else if verdict.in_q == TriState::Inside {
        2
    } else if verdict.in_e == TriState::Inside {
        1
    } else {
        0
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Computation { kind, detail }) => {
            #[derive(Serialize)]
            struct ErrorLine<'a> {
                error: &'a str,
                detail: &'a str,
            }
            println!("{}", json_line(&ErrorLine { error: kind, detail: &detail }));
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => ConfigDefaults::load(path)?,
        None => ConfigDefaults::default(),
    };
    match cli.command {
        Command::Classify { sys, weights, eps } => {
            let e = sys.build()?;
            let w = weights.build()?;
            let verdict = membership_e(e, w, resolve_eps(eps, &cfg)?);
            println!("{}", json_line(&verdict));
            Ok(())
        }

        Command::Power { sys, weights } => {
            let e = sys.build()?;
            let w = weights.build()?;
            let line = match e.regime() {
                Regime::Homogeneous => json_line(&power_family_h(e, w)?),
                _ => json_line(&power_solution(e, w)?),
            };
            println!("{line}");
            Ok(())
        }

        Command::Kelvin { sys, weights } => {
            let e = sys.build()?;
            let w = weights.build()?;
            println!("{}", json_line(&kelvin_map(e, w)));
            Ok(())
        }

        Command::Solve { sys, weights, method, grid, tol, rtol, out } => {
            let e = sys.build()?;
            let w = weights.build()?;
            let grid = grid.or(cfg.grid).unwrap_or(2048);
            let (profile, summary) = match method {
                Method::Shooting => {
                    let opts = ShootOptions {
                        tol: tol.or(cfg.tol).unwrap_or(1e-9),
                        rtol: rtol.or(cfg.rtol).unwrap_or(1e-12),
                        output_nodes: grid.saturating_add(1),
                        ..ShootOptions::default()
                    };
                    let profile = shoot_radial_with(e, w, &opts)?;
                    let summary = SolveSummary {
                        method: ProfileMethod::Shooting,
                        gamma: Some(profile.central),
                        m_value: None,
                        lambda: profile.lambda,
                        residual_sup: profile.residual_sup,
                        boundary_defect: profile.boundary_defect,
                        nodes: profile.radii.len(),
                    };
                    (profile, summary)
                }
                Method::Rayleigh => {
                    let opts = RayleighOptions {
                        cells: grid,
                        tol: tol.or(cfg.tol).unwrap_or(1e-12),
                        ..RayleighOptions::default()
                    };
                    let solution = minimize_rayleigh_with(e, w, &opts)?;
                    let summary = SolveSummary {
                        method: ProfileMethod::Rayleigh,
                        gamma: None,
                        m_value: Some(solution.m_value),
                        lambda: solution.profile.lambda,
                        residual_sup: solution.profile.residual_sup,
                        boundary_defect: solution.profile.boundary_defect,
                        nodes: solution.profile.radii.len(),
                    };
                    (solution.profile, summary)
                }
            };
            if let Some(path) = out {
                let file = File::create(&path).map_err(|err| io_failure(&path, err))?;
                let mut writer = BufWriter::new(file);
                profile
                    .write_csv(&mut writer)
                    .and_then(|()| writer.flush())
                    .map_err(|err| io_failure(&path, err))?;
            }
            println!("{}", json_line(&summary));
            Ok(())
        }

        Command::Region { sys, grid, a_min, a_max, b_min, b_max, eps, out } => {
            let e = sys.build()?;
            let eps = resolve_eps(eps, &cfg)?;
            let grid = grid.or(cfg.grid).unwrap_or(200);
            if grid == 0 {
                return Err(Failure::Usage("--grid must be at least 1".into()));
            }
            let lo_default = -(e.nf() + 1.0);
            let hi_default = e.p().max(e.q()) * (e.nf() - 2.0) - e.nf() + 1.0;
            let bounds = RegionBounds {
                a_min: a_min.unwrap_or(lo_default),
                a_max: a_max.unwrap_or(hi_default),
                b_min: b_min.unwrap_or(lo_default),
                b_max: b_max.unwrap_or(hi_default),
            };
            for (name, lo, hi) in [
                ("a", bounds.a_min, bounds.a_max),
                ("b", bounds.b_min, bounds.b_max),
            ] {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Failure::Usage(format!(
                        "bounds in {name} must be finite with min < max, got [{lo}, {hi}]"
                    )));
                }
            }

            let mut csv = String::with_capacity(16 + 60 * grid * grid);
            csv.push_str("a,b,code\n");
            let mut counts = RegionCounts { outside: 0, e_only: 0, q: 0, boundary: 0 };
            for i in 0..grid {
                let a = bounds.a_min
                    + (i as f64 + 0.5) * (bounds.a_max - bounds.a_min) / grid as f64;
                for j in 0..grid {
                    let b = bounds.b_min
                        + (j as f64 + 0.5) * (bounds.b_max - bounds.b_min) / grid as f64;
                    let w = WeightPair::new(a, b).expect("grid coordinates are finite");
                    let code = cell_code(&membership_e(e, w, eps));
                    match code {
                        0 => counts.outside += 1,
                        1 => counts.e_only += 1,
                        2 => counts.q += 1,
                        _ => counts.boundary += 1,
                    }
                    writeln!(csv, "{a:.16e},{b:.16e},{code}").expect("writing to a String");
                }
            }
            match out {
                Some(path) => {
                    fs::write(&path, &csv).map_err(|err| io_failure(&path, err))?;
                    let summary = RegionSummary {
                        n: e.n(),
                        p: e.p(),
                        q: e.q(),
                        grid,
                        bounds,
                        boundary_tolerance: eps,
                        cells: counts,
                        out: &path.display().to_string(),
                    };
                    println!("{}", json_line(&summary));
                }
                None => print!("{csv}"),
            }
            Ok(())
        }

        Command::Verify { sys, weights, profile, lambda1, lambda2, tol } => {
            let e = sys.build()?;
            let w = weights.build()?;
            let tol = tol.or(cfg.tol).unwrap_or(1e-3);
            let file = File::open(&profile).map_err(|err| io_failure(&profile, err))?;
            let parsed = RadialProfile::read_csv(BufReader::new(file))?;
            let stats = residual_check(e, w, &parsed, lambda1, lambda2, tol)?;
            println!("{}", json_line(&stats));
            Ok(())
        }
    }
}
