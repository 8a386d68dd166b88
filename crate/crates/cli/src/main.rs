//! `trispec`: batch front end for the lattice spectral toolkit.
//!
//! One request per process: read a plain-text model configuration, run the
//! requested computation, and write a deterministic report.  Every report
//! embeds the fully resolved model — coefficient tables, derived masses and
//! fractions, grid resolution — so a report file is a complete record of the
//! run.  All numeric output uses fixed-precision formatting and all parallel
//! maps preserve index order, so repeated runs produce byte-identical
//! reports.

mod momentum;
mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trispec_core::channel::ChannelSystem;
use trispec_core::config::{parse_config, ParsedConfig};
use trispec_core::model::{validate_dispersion, validate_potential};
use trispec_core::twobody::PairSystem;
use trispec_core::{faddeev, threebody};
use trispec_core::{LatticeCoefficients, Model, SpectralError, TorusGrid, Vec3};

use report::{fmt_f, Report};

/// Multiset tolerance for the product-basis versus fiber comparison verdict.
const FIBER_EQUIV_TOL: f64 = 1e-9;

const EXIT_NOTES: &str = "Exit codes:
  0  success
  2  invalid configuration or arguments
  3  violated precondition (grid caps, fiber membership, z inside a spectrum)
  4  numerical failure (singular linear system, eigensolver breakdown)";

#[derive(Parser)]
#[command(
    name = "trispec",
    version,
    about = "Spectral computations for two- and three-particle lattice operators",
    after_help = EXIT_NOTES
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file against the dispersion and potential hypotheses
    Validate(ValidateArgs),
    /// Two-body fiber at fixed pair quasi-momentum: band, levels, z-table
    Twobody(TwobodyArgs),
    /// One channel's below-band branch intervals over the spectator grid
    Channel(ChannelArgs),
    /// Assembled essential-spectrum union at fixed total quasi-momentum
    Essential(EssentialArgs),
    /// Smallest singular value of the three-body coupling operator I - T(z)
    Faddeev(FaddeevArgs),
    /// Dense three-body spectrum classified against the assembled union
    Oracle(OracleArgs),
    /// Product-basis two-body operator versus the union of its fibers
    FiberTest(FiberTestArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Model configuration file
    #[arg(long, value_name = "PATH")]
    model: PathBuf,

    /// Grid resolution per axis; overrides the `n` set in the model file
    #[arg(long, value_name = "INT")]
    n: Option<usize>,

    /// Write the report to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Cap the worker-thread count (1 = fully sequential)
    #[arg(long, value_name = "INT")]
    threads: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct TwobodyArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Pair quasi-momentum `x,y,z`; fractions of pi such as `pi/2` accepted
    #[arg(
        long,
        value_name = "X,Y,Z",
        default_value = "0,0,0",
        allow_hyphen_values = true,
        value_parser = momentum::parse_vec3
    )]
    k: Vec3,

    /// Channel index 1..=3 (the pair complementary to this particle)
    #[arg(long, value_name = "INT", default_value_t = 1)]
    alpha: usize,

    /// Single spectral parameter, strictly below the fiber band floor
    #[arg(long, value_name = "FLOAT", allow_hyphen_values = true, conflicts_with = "z_sweep")]
    z: Option<f64>,

    /// Equispaced window `LO:HI:STEPS` for the (z, count, determinant) table
    #[arg(
        long = "z-sweep",
        value_name = "LO:HI:STEPS",
        allow_hyphen_values = true,
        value_parser = momentum::parse_sweep
    )]
    z_sweep: Option<(f64, f64, usize)>,

    /// Also write the z-table as CSV to this path
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ChannelArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Total quasi-momentum `x,y,z`; fractions of pi accepted
    #[arg(
        long = "K",
        value_name = "X,Y,Z",
        default_value = "0,0,0",
        allow_hyphen_values = true,
        value_parser = momentum::parse_vec3
    )]
    total: Vec3,

    /// Channel index 1..=3
    #[arg(long, value_name = "INT", default_value_t = 1)]
    alpha: usize,

    /// Merge tolerance for joining level samples into intervals
    #[arg(long = "gap-tol", value_name = "FLOAT")]
    gap_tol: Option<f64>,
}

#[derive(Args)]
struct EssentialArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Total quasi-momentum `x,y,z`; fractions of pi accepted
    #[arg(
        long = "K",
        value_name = "X,Y,Z",
        default_value = "0,0,0",
        allow_hyphen_values = true,
        value_parser = momentum::parse_vec3
    )]
    total: Vec3,

    /// Merge tolerance for joining level samples into intervals
    #[arg(long = "gap-tol", value_name = "FLOAT")]
    gap_tol: Option<f64>,

    /// Write per-fiber band edges and levels as CSV to this path
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct FaddeevArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Total quasi-momentum `x,y,z`; fractions of pi accepted
    #[arg(
        long = "K",
        value_name = "X,Y,Z",
        default_value = "0,0,0",
        allow_hyphen_values = true,
        value_parser = momentum::parse_vec3
    )]
    total: Vec3,

    /// Single spectral parameter outside the channel spectra
    #[arg(
        long,
        value_name = "FLOAT",
        allow_hyphen_values = true,
        conflicts_with = "z_sweep",
        required_unless_present = "z_sweep"
    )]
    z: Option<f64>,

    /// Sweep window `LO:HI:STEPS`; interior dips are refined automatically
    #[arg(
        long = "z-sweep",
        value_name = "LO:HI:STEPS",
        allow_hyphen_values = true,
        value_parser = momentum::parse_sweep
    )]
    z_sweep: Option<(f64, f64, usize)>,

    /// Also write the (z, sigma) scan as CSV to this path
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Total quasi-momentum `x,y,z`; fractions of pi accepted
    #[arg(
        long = "K",
        value_name = "X,Y,Z",
        default_value = "0,0,0",
        allow_hyphen_values = true,
        value_parser = momentum::parse_vec3
    )]
    total: Vec3,

    /// Merge tolerance for joining level samples into intervals
    #[arg(long = "gap-tol", value_name = "FLOAT")]
    gap_tol: Option<f64>,

    /// Containment margin; defaults to the band sampling spread
    #[arg(long, value_name = "FLOAT")]
    margin: Option<f64>,
}

#[derive(Args)]
struct FiberTestArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Channel index 1..=3
    #[arg(long, value_name = "INT", default_value_t = 1)]
    alpha: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// A run failure carrying the documented exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        let code = match &e {
            SpectralError::InvalidModel(_)
            | SpectralError::InvalidMass(_)
            | SpectralError::DegenerateDispersion(_) => 2,
            SpectralError::NumericalFailure(_) => 4,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Twobody(a) => cmd_twobody(a),
        Command::Channel(a) => cmd_channel(a),
        Command::Essential(a) => cmd_essential(a),
        Command::Faddeev(a) => cmd_faddeev(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::FiberTest(a) => cmd_fiber_test(a),
    }
}

/// Model file plus everything derived from it for one run.
struct Loaded {
    model: Model,
    n: usize,
    grid: TorusGrid,
}

fn init_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(config_failure("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| config_failure(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

fn read_config(path: &Path) -> Result<ParsedConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_failure(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(Failure::from)
}

fn load(common: &CommonArgs) -> Result<Loaded, Failure> {
    init_threads(common.threads)?;
    let parsed = read_config(&common.model)?;
    let model = parsed.build_model()?;
    let n = common.n.or(parsed.n).ok_or_else(|| {
        config_failure("no grid resolution: pass --n or set `n = ...` in the model file")
    })?;
    let grid = TorusGrid::new(n)?;
    Ok(Loaded { model, n, grid })
}

fn check_alpha(alpha: usize) -> Result<usize, Failure> {
    if (1..=3).contains(&alpha) {
        Ok(alpha - 1)
    } else {
        Err(config_failure("--alpha must be 1, 2, or 3"))
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| config_failure(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_csv(text: &str, path: &Path) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| config_failure(format!("cannot write {}: {e}", path.display())))
}

fn input_section(r: &mut Report, command: &str, common: &CommonArgs) {
    r.section("input");
    r.kv("command", command);
    r.kv("model", common.model.display());
    if let Some(t) = common.threads {
        r.kv("threads", t);
    }
}

fn coefficient_table(r: &mut Report, name: &str, table: &LatticeCoefficients) {
    r.kv(&format!("{name}_entries"), table.len());
    for (s, v) in table.iter() {
        r.kv_f(&format!("{name}[{},{},{}]", s[0], s[1], s[2]), *v);
    }
}

/// Audit trail: the full resolved model every report embeds.
fn model_section(r: &mut Report, loaded: &Loaded) {
    r.section("model");
    r.kv("n", loaded.n);
    r.kv_floats("masses", &loaded.model.masses());
    let ratios = loaded.model.ratios();
    r.kv_floats("mass_fractions", &ratios.fraction);
    for alpha in 0..3 {
        r.kv_floats(
            &format!("pair_fractions{}", alpha + 1),
            &ratios.pair_fraction[alpha],
        );
    }
    r.kv_f("potential_bound", loaded.model.potential_bound());
    for i in 0..3 {
        coefficient_table(r, &format!("dispersion{}", i + 1), loaded.model.dispersion(i));
    }
    for alpha in 0..3 {
        coefficient_table(r, &format!("potential{}", alpha + 1), loaded.model.potential(alpha));
    }
}

fn interval_lines(r: &mut Report, prefix: &str, iv: &trispec_core::channel::IntervalUnion) {
    r.kv(&format!("{prefix}_count"), iv.count());
    for (i, &pair) in iv.intervals().iter().enumerate() {
        r.kv_interval(&format!("{prefix}[{i}]"), pair);
    }
}

fn clause_lines(r: &mut Report, name: &str, rep: &trispec_core::ValidationReport) {
    for c in &rep.clauses {
        let status = if c.passed {
            "pass"
        } else if c.required {
            "FAIL"
        } else {
            "advisory-fail"
        };
        r.kv(&format!("{name}.{}", c.name), format!("{status} ({})", c.detail));
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    init_threads(a.common.threads)?;
    let parsed = read_config(&a.common.model)?;

    let mut r = Report::new();
    input_section(&mut r, "validate", &a.common);

    let mut failed: Vec<String> = Vec::new();
    r.section("validation");
    for i in 0..3 {
        let rep = validate_dispersion(&parsed.dispersions[i]);
        clause_lines(&mut r, &format!("dispersion{}", i + 1), &rep);
        for c in rep.failures().iter().filter(|c| c.required) {
            failed.push(format!("dispersion{}.{}", i + 1, c.name));
        }
    }
    for alpha in 0..3 {
        let rep = validate_potential(&parsed.potentials[alpha]);
        clause_lines(&mut r, &format!("potential{}", alpha + 1), &rep);
        for c in rep.failures().iter().filter(|c| c.required) {
            failed.push(format!("potential{}.{}", alpha + 1, c.name));
        }
    }

    // audit trail: raw tables always, derived data once they validate
    r.section("model");
    if let Some(n) = a.common.n.or(parsed.n) {
        r.kv("n", n);
    }
    for i in 0..3 {
        coefficient_table(&mut r, &format!("dispersion{}", i + 1), &parsed.dispersions[i]);
    }
    for alpha in 0..3 {
        coefficient_table(&mut r, &format!("potential{}", alpha + 1), &parsed.potentials[alpha]);
    }

    let model = if failed.is_empty() {
        Some(parsed.build_model().map_err(Failure::from)?)
    } else {
        None
    };
    r.section("result");
    if let Some(model) = &model {
        r.kv("verdict", "pass");
        r.kv_floats("masses", &model.masses());
        r.kv_floats("mass_fractions", &model.ratios().fraction);
        r.kv_f("potential_bound", model.potential_bound());
    } else {
        r.kv("verdict", "FAIL");
        r.kv("failed_clauses", failed.join(" "));
    }
    emit(&r.finish(), a.common.out.as_deref())?;

    if failed.is_empty() {
        Ok(())
    } else {
        Err(config_failure(format!(
            "validation failed: {}",
            failed.join(", ")
        )))
    }
}

fn two_body_row(
    pair: &PairSystem,
    grid: &TorusGrid,
    k: Vec3,
    z: f64,
) -> Result<(f64, usize, f64), Failure> {
    let count = pair.count_below(grid, k, z)?;
    let det = pair.fredholm_determinant_lowrank(grid, k, z)?;
    Ok((z, count, det))
}

fn cmd_twobody(a: TwobodyArgs) -> Result<(), Failure> {
    let loaded = load(&a.common)?;
    let alpha = check_alpha(a.alpha)?;
    let pair = PairSystem::from_model(&loaded.model, alpha);

    let band = pair.band(&loaded.grid, a.k);
    let energies = pair.fiber_energies(&loaded.grid, a.k);
    let fiber_floor = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let fiber_ceiling = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let levels = pair.levels_below_band(&loaded.grid, a.k)?;

    let mut rows: Vec<(f64, usize, f64)> = Vec::new();
    if let Some(z) = a.z {
        rows.push(two_body_row(&pair, &loaded.grid, a.k, z)?);
    }
    if let Some((z_lo, z_hi, steps)) = a.z_sweep {
        if steps < 2 || !(z_lo < z_hi) {
            return Err(config_failure(
                "--z-sweep needs LO < HI and at least 2 steps",
            ));
        }
        let h = (z_hi - z_lo) / (steps - 1) as f64;
        for j in 0..steps {
            rows.push(two_body_row(&pair, &loaded.grid, a.k, z_lo + h * j as f64)?);
        }
    }

    let mut r = Report::new();
    input_section(&mut r, "twobody", &a.common);
    r.kv("alpha", a.alpha);
    r.kv_floats("k", &a.k);
    if let Some(z) = a.z {
        r.kv_f("z", z);
    }
    if let Some((z_lo, z_hi, steps)) = a.z_sweep {
        r.kv(
            "z_sweep",
            format!("{} {} {}", fmt_f(z_lo), fmt_f(z_hi), steps),
        );
    }
    model_section(&mut r, &loaded);
    r.section("result");
    r.kv_interval("band", band);
    r.kv_interval("fiber_sample_range", (fiber_floor, fiber_ceiling));
    r.kv("below_band_count", levels.len());
    if !levels.is_empty() {
        r.kv_floats("below_band_levels", &levels);
    }
    if !rows.is_empty() {
        r.kv("table_columns", "z below_count fredholm_determinant");
        r.kv("table_rows", rows.len());
        for (i, (z, count, det)) in rows.iter().enumerate() {
            r.kv(
                &format!("table[{i}]"),
                format!("{} {} {}", fmt_f(*z), count, fmt_f(*det)),
            );
        }
    }

    if let Some(csv) = &a.csv {
        let mut text = String::from("z,below_count,fredholm_determinant\n");
        for (z, count, det) in &rows {
            let _ = writeln!(text, "{},{},{}", fmt_f(*z), count, fmt_f(*det));
        }
        emit_csv(&text, csv)?;
    }
    emit(&r.finish(), a.common.out.as_deref())
}

fn cmd_channel(a: ChannelArgs) -> Result<(), Failure> {
    let loaded = load(&a.common)?;
    let alpha = check_alpha(a.alpha)?;
    let channel = ChannelSystem::from_model(&loaded.model, alpha);

    let envelope = channel.band_envelope(&loaded.grid, a.total);
    let (union, tol) = channel.branch_intervals(&loaded.grid, a.total, a.gap_tol)?;

    let mut r = Report::new();
    input_section(&mut r, "channel", &a.common);
    r.kv("alpha", a.alpha);
    r.kv_floats("K", &a.total);
    if let Some(g) = a.gap_tol {
        r.kv_f("gap_tol", g);
    }
    model_section(&mut r, &loaded);
    r.section("result");
    r.kv_interval("band_envelope", envelope);
    r.kv_f("gap_tol_used", tol);
    interval_lines(&mut r, "interval", &union);
    emit(&r.finish(), a.common.out.as_deref())
}

fn cmd_essential(a: EssentialArgs) -> Result<(), Failure> {
    let loaded = load(&a.common)?;
    let ess = threebody::essential_spectrum(&loaded.model, &loaded.grid, a.total, a.gap_tol)?;
    let delta = threebody::band_sample_delta(&loaded.model, &loaded.grid, a.total);

    let mut r = Report::new();
    input_section(&mut r, "essential", &a.common);
    r.kv_floats("K", &a.total);
    if let Some(g) = a.gap_tol {
        r.kv_f("gap_tol", g);
    }
    model_section(&mut r, &loaded);
    r.section("result");
    r.kv_interval("band", ess.band);
    r.kv_f("band_sample_delta", delta);
    for alpha in 0..3 {
        r.kv_f(&format!("channel{}_gap_tol", alpha + 1), ess.gap_tols[alpha]);
        interval_lines(
            &mut r,
            &format!("channel{}_interval", alpha + 1),
            &ess.branches[alpha],
        );
    }
    interval_lines(&mut r, "union", &ess.union);

    if let Some(csv) = &a.csv {
        emit_csv(&band_samples_csv(&loaded, a.total)?, csv)?;
    }
    emit(&r.finish(), a.common.out.as_deref())
}

/// Plot-ready band data: per channel and spectator fiber, the shifted pair
/// band edges and every below-band level.
fn band_samples_csv(loaded: &Loaded, total: Vec3) -> Result<String, Failure> {
    let grid = &loaded.grid;
    let mut text = String::from("channel,fiber,g1,g2,g3,kind,value\n");
    for alpha in 0..3 {
        let channel = ChannelSystem::from_model(&loaded.model, alpha);
        for a in 0..grid.len() {
            let g = grid.point(a).coords();
            let shift = channel.spectator_shift(g);
            let pair_k = channel.pair_momentum(total, g);
            let (lo, hi) = channel.pair().band(grid, pair_k);
            let head = format!(
                "{},{},{},{},{}",
                alpha + 1,
                a,
                fmt_f(g[0]),
                fmt_f(g[1]),
                fmt_f(g[2])
            );
            let _ = writeln!(text, "{head},band_lo,{}", fmt_f(shift + lo));
            let _ = writeln!(text, "{head},band_hi,{}", fmt_f(shift + hi));
            for level in channel.fiber_levels(grid, total, a)? {
                let _ = writeln!(text, "{head},level,{}", fmt_f(level));
            }
        }
    }
    Ok(text)
}

fn cmd_faddeev(a: FaddeevArgs) -> Result<(), Failure> {
    let loaded = load(&a.common)?;

    let mut r = Report::new();
    input_section(&mut r, "faddeev", &a.common);
    r.kv_floats("K", &a.total);
    if let Some(z) = a.z {
        r.kv_f("z", z);
    }
    if let Some((z_lo, z_hi, steps)) = a.z_sweep {
        r.kv(
            "z_sweep",
            format!("{} {} {}", fmt_f(z_lo), fmt_f(z_hi), steps),
        );
    }
    model_section(&mut r, &loaded);
    r.section("result");

    if let Some(z) = a.z {
        let op = faddeev::FaddeevOperator::new(&loaded.model, &loaded.grid, a.total, z)?;
        let sigma = op.smallest_singular_value(1e-9, 400);
        r.kv("total_dim", op.total_dim());
        r.kv("coupling_rank", op.rank());
        r.kv_f("sigma_min", sigma);
        r.kv("candidate", sigma < faddeev::DIP_SIGMA);
    }
    if let Some((z_lo, z_hi, steps)) = a.z_sweep {
        let points =
            faddeev::scan_smallest_singular(&loaded.model, &loaded.grid, a.total, z_lo, z_hi, steps)?;
        let dips = faddeev::refine_dips(&loaded.model, &loaded.grid, a.total, &points, 60)?;
        r.kv("scan_columns", "z sigma_min");
        r.kv("scan_rows", points.len());
        for (i, p) in points.iter().enumerate() {
            r.kv(&format!("scan[{i}]"), format!("{} {}", fmt_f(p.z), fmt_f(p.sigma)));
        }
        r.kv("dip_count", dips.len());
        for (i, d) in dips.iter().enumerate() {
            r.kv(
                &format!("dip[{i}]"),
                format!("{} {} {}", fmt_f(d.z), fmt_f(d.sigma), d.resolved),
            );
        }
        if let Some(csv) = &a.csv {
            let mut text = String::from("z,sigma_min\n");
            for p in &points {
                let _ = writeln!(text, "{},{}", fmt_f(p.z), fmt_f(p.sigma));
            }
            emit_csv(&text, csv)?;
        }
    }
    emit(&r.finish(), a.common.out.as_deref())
}

fn cmd_oracle(a: OracleArgs) -> Result<(), Failure> {
    let loaded = load(&a.common)?;
    let full = threebody::full_spectrum(&loaded.model, &loaded.grid, a.total)?;
    let ess = threebody::essential_spectrum(&loaded.model, &loaded.grid, a.total, a.gap_tol)?;
    let margin = a
        .margin
        .unwrap_or_else(|| threebody::band_sample_delta(&loaded.model, &loaded.grid, a.total));
    let verdicts = threebody::oracle_compare(&full, &ess, margin);

    let mut r = Report::new();
    input_section(&mut r, "oracle", &a.common);
    r.kv_floats("K", &a.total);
    if let Some(g) = a.gap_tol {
        r.kv_f("gap_tol", g);
    }
    model_section(&mut r, &loaded);
    r.section("result");
    r.kv("full_count", verdicts.full_count);
    r.kv_f("margin", verdicts.margin);
    r.kv("contained", verdicts.contained);
    r.kv("above_union", verdicts.above_union);
    r.kv("in_gaps", verdicts.in_gaps);
    r.kv("isolated_below_count", verdicts.isolated_below.len());
    if !verdicts.isolated_below.is_empty() {
        r.kv_floats("isolated_below", &verdicts.isolated_below);
    }
    r.kv_f("containment_fraction", verdicts.accounted_fraction());
    interval_lines(&mut r, "union", &ess.union);
    emit(&r.finish(), a.common.out.as_deref())
}

fn cmd_fiber_test(a: FiberTestArgs) -> Result<(), Failure> {
    let loaded = load(&a.common)?;
    let alpha = check_alpha(a.alpha)?;
    let pair = PairSystem::from_model(&loaded.model, alpha);
    let cmp = pair.fiber_equivalence(&loaded.grid)?;

    let mut r = Report::new();
    input_section(&mut r, "fiber-test", &a.common);
    r.kv("alpha", a.alpha);
    model_section(&mut r, &loaded);
    r.section("result");
    r.kv("product_dim", cmp.dim);
    r.kv("fibers", cmp.fibers);
    r.kv_f("worst_deviation", cmp.worst);
    let pass = cmp.worst < FIBER_EQUIV_TOL;
    r.kv("verdict", if pass { "pass" } else { "FAIL" });
    emit(&r.finish(), a.common.out.as_deref())?;

    if pass {
        Ok(())
    } else {
        Err(Failure {
            code: 4,
            message: format!(
                "fiber equivalence deviation {} exceeds {}",
                fmt_f(cmp.worst),
                fmt_f(FIBER_EQUIV_TOL)
            ),
        })
    }
}
