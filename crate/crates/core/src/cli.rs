//! The `starid` command line. Everything lives here so the binary is a
//! one-liner and the commands can be driven from tests.
//!
//! Angles are given in degrees on the command line and converted to radians
//! on the way in.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use serde::Serialize;

use crate::catalog::{load_catalog, ParseMode, StarDatabase, StarId, StarRecord};
use crate::error::{Error, Result};
use crate::geometry::{max_angular_resolution, resolution_to_nautical_miles};
use crate::matcher::{match_stars, MeasuredStar};
use crate::montecarlo::{
    aggregate, derive_tolerances, full_grid, grid, run_config, run_sweep, write_trial_csv,
    ConfigRun, Execution, SimConfig, DEFAULT_PIXELS, DEFAULT_TRIALS, STUDY_BETAS, STUDY_FOVS_DEG,
    STUDY_MAGNITUDES,
};
use crate::pairdb::{build_pair_db, PairDatabase};
use crate::pairdb::{read_pair_db, read_star_db, write_pair_db, write_star_db};

pub const CATALOG_ENV: &str = "STARID_CATALOG";
pub const STAR_FILE: &str = "stars.bin";
pub const PAIR_FILE: &str = "pairs.bin";
pub const PAIR_CSV_FILE: &str = "pairs.csv";
pub const TRIAL_FILE: &str = "trials.csv";
pub const STATS_FILE: &str = "stats.json";

pub const DEFAULT_RESOLUTION_PIXELS: [u32; 4] = [512, 1024, 2048, 4096];

/// How far a "unit" vector given to `match` may stray from norm 1.
pub const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "starid",
    version,
    about = "Star identification and FOV trade study"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Angular resolution table for a set of cameras.
    Resolution(ResolutionArgs),
    /// Build the star and pair databases for one camera.
    BuildDb(BuildDbArgs),
    /// Run the Monte Carlo sweep.
    Simulate(SimulateArgs),
    /// Identify measured star directions.
    Match(MatchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CatalogArgs {
    /// BSC5 fixed-width file, or `.csv` with id,ra_hours,dec_degrees,vmag.
    #[arg(long, env = CATALOG_ENV)]
    pub catalog: Option<PathBuf>,
    /// Fail on the first malformed catalog line instead of skipping it.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ResolutionArgs {
    #[arg(long = "fov-deg", value_delimiter = ',', num_args = 1.., default_values_t = STUDY_FOVS_DEG)]
    pub fov_deg: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = DEFAULT_RESOLUTION_PIXELS)]
    pub pixels: Vec<u32>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildDbArgs {
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[arg(long = "fov-deg")]
    pub fov_deg: f64,
    #[arg(long)]
    pub mlim: f64,
    #[arg(long, default_value_t = DEFAULT_PIXELS)]
    pub pixels: u32,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the pair table as CSV.
    #[arg(long)]
    pub pairs_csv: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[arg(long = "fov-deg", value_delimiter = ',', num_args = 1.., default_values_t = STUDY_FOVS_DEG)]
    pub fov_deg: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = STUDY_MAGNITUDES)]
    pub mlim: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = STUDY_BETAS)]
    pub beta: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_PIXELS)]
    pub pixels: u32,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// The full 5 x 3 x 5 grid; overrides the list flags.
    #[arg(long, alias = "paper-grid")]
    pub full_grid: bool,
    /// Reuse databases written by `build-db` instead of building from the catalog.
    #[arg(long)]
    pub db: Option<PathBuf>,
    /// Run trials on one thread. The output is identical either way.
    #[arg(long)]
    pub serial: bool,
    /// Output directory for trials.csv and stats.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MatchArgs {
    /// JSON array of unit vectors in the camera frame, `-` for stdin.
    #[arg(long)]
    pub vectors: PathBuf,
    /// Directory written by `build-db`.
    #[arg(long)]
    pub db: PathBuf,
    /// Matching tolerance; defaults to the database's close-pair radius.
    #[arg(long = "epsilon-deg")]
    pub epsilon_deg: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Usage errors exit with 1.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = io::stdout();
    match run(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("starid: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Resolution(a) => cmd_resolution(&a, out),
        Command::BuildDb(a) => cmd_build_db(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Match(a) => cmd_match(&a, out),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolutionRow {
    pub fov_deg: f64,
    pub pixels: u32,
    pub theta_res_rad: f64,
    pub theta_res_deg: f64,
    pub nautical_miles: f64,
}

pub fn resolution_table(fovs_deg: &[f64], pixels: &[u32]) -> Result<Vec<ResolutionRow>> {
    if fovs_deg.is_empty() || pixels.is_empty() {
        return Err(Error::domain(
            "resolution table needs at least one FOV and one pixel count",
        ));
    }
    let mut rows = Vec::with_capacity(fovs_deg.len() * pixels.len());
    for &fov_deg in fovs_deg {
        for &u in pixels {
            let theta = max_angular_resolution(fov_deg.to_radians(), u)?;
            rows.push(ResolutionRow {
                fov_deg,
                pixels: u,
                theta_res_rad: theta,
                theta_res_deg: theta.to_degrees(),
                nautical_miles: resolution_to_nautical_miles(theta),
            });
        }
    }
    Ok(rows)
}

pub fn write_resolution<W: Write>(mut w: W, rows: &[ResolutionRow], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(
                w,
                "fov_deg,pixels,theta_res_rad,theta_res_deg,nautical_miles"
            )?;
            for r in rows {
                writeln!(
                    w,
                    "{},{},{:e},{:e},{}",
                    r.fov_deg, r.pixels, r.theta_res_rad, r.theta_res_deg, r.nautical_miles
                )?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_resolution(a: &ResolutionArgs, out: &mut dyn Write) -> Result<()> {
    let rows = resolution_table(&a.fov_deg, &a.pixels)?;
    match &a.out {
        Some(path) => write_resolution(BufWriter::new(File::create(path)?), &rows, a.format),
        None => write_resolution(out, &rows, a.format),
    }
}

/// Loads the catalog named by `--catalog` or the environment.
pub fn read_catalog(a: &CatalogArgs) -> Result<Vec<StarRecord>> {
    let path = a.catalog.as_ref().ok_or_else(|| {
        Error::domain(format!(
            "no catalog given; pass --catalog or set {CATALOG_ENV}"
        ))
    })?;
    let mode = if a.strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    };
    let parsed = load_catalog(path, mode)?;
    if parsed.skipped + parsed.malformed > 0 {
        eprintln!(
            "catalog {}: {} stars, {} without position or magnitude, {} malformed",
            path.display(),
            parsed.entries.len(),
            parsed.skipped,
            parsed.malformed
        );
    }
    parsed.to_records()
}

pub fn cmd_build_db(a: &BuildDbArgs, out: &mut dyn Write) -> Result<()> {
    let tol = derive_tolerances(a.fov_deg.to_radians(), a.pixels)?;
    let catalog = read_catalog(&a.catalog)?;
    let sdb = StarDatabase::build(&catalog, a.mlim, tol.theta_min)?;
    let pdb = build_pair_db(&sdb, tol.theta_max)?;

    fs::create_dir_all(&a.out)?;
    write_star_db(BufWriter::new(File::create(a.out.join(STAR_FILE))?), &sdb)?;
    write_pair_db(BufWriter::new(File::create(a.out.join(PAIR_FILE))?), &pdb)?;
    if a.pairs_csv {
        pdb.write_csv(BufWriter::new(File::create(a.out.join(PAIR_CSV_FILE))?))?;
    }
    writeln!(out, "catalog stars: {}", catalog.len())?;
    writeln!(out, "database stars: {}", sdb.len())?;
    writeln!(out, "pairs: {}", pdb.len())?;
    writeln!(out, "theta_min_rad: {:e}", tol.theta_min)?;
    writeln!(out, "theta_max_rad: {:e}", tol.theta_max)?;
    writeln!(out, "content_hash: {}", pdb.fingerprint().hash_hex())?;
    Ok(())
}

/// Reads `stars.bin` and `pairs.bin` from a `build-db` directory and checks
/// that they belong together.
pub fn load_databases(dir: &Path) -> Result<(StarDatabase, PairDatabase)> {
    let sdb = read_star_db(BufReader::new(File::open(dir.join(STAR_FILE))?))?;
    let pdb = read_pair_db(BufReader::new(File::open(dir.join(PAIR_FILE))?))?;
    if sdb.content_hash() != pdb.fingerprint().content_hash {
        return Err(Error::Fingerprint(format!(
            "{} and {} were built from different star tables",
            STAR_FILE, PAIR_FILE
        )));
    }
    Ok((sdb, pdb))
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Refuses a prebuilt database that was not built for `cfg`.
pub fn check_fingerprint(cfg: &SimConfig, pdb: &PairDatabase) -> Result<()> {
    let tol = derive_tolerances(cfg.fov, cfg.pixels)?;
    let fp = pdb.fingerprint();
    let mut problems = Vec::new();
    if fp.m_lim != cfg.m_lim_hat {
        problems.push(format!(
            "magnitude limit {} != requested {}",
            fp.m_lim, cfg.m_lim_hat
        ));
    }
    if !same(fp.theta_min, tol.theta_min) {
        problems.push(format!(
            "theta_min {:e} rad != {:e} rad for {} deg / {} px",
            fp.theta_min,
            tol.theta_min,
            cfg.fov.to_degrees(),
            cfg.pixels
        ));
    }
    if !same(pdb.theta_max(), tol.theta_max) {
        problems.push(format!(
            "theta_max {:e} rad != {:e} rad for {} deg",
            pdb.theta_max(),
            tol.theta_max,
            cfg.fov.to_degrees()
        ));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Fingerprint(format!(
            "database does not match configuration ({}); rebuild it with build-db",
            problems.join("; ")
        )))
    }
}

pub fn sim_grid(a: &SimulateArgs) -> Result<Vec<SimConfig>> {
    if a.full_grid {
        return Ok(full_grid(a.trials, a.seed)
            .into_iter()
            .map(|c| SimConfig {
                pixels: a.pixels,
                ..c
            })
            .collect());
    }
    if a.fov_deg.is_empty() || a.mlim.is_empty() || a.beta.is_empty() {
        return Err(Error::domain("grid lists must not be empty"));
    }
    Ok(grid(
        &a.fov_deg, &a.mlim, &a.beta, a.trials, a.seed, a.pixels,
    ))
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let configs = sim_grid(a)?;
    let exec = if a.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };

    let (runs, catalog): (Vec<ConfigRun>, Vec<StarRecord>) = match &a.db {
        Some(dir) => {
            let (sdb, pdb) = load_databases(dir)?;
            for cfg in &configs {
                check_fingerprint(cfg, &pdb)?;
            }
            let runs = configs
                .iter()
                .enumerate()
                .map(|(i, cfg)| run_config(i, cfg, &sdb, &pdb, exec))
                .collect::<Result<Vec<_>>>()?;
            (runs, sdb.stars().to_vec())
        }
        None => {
            let catalog = read_catalog(&a.catalog)?;
            (run_sweep(&configs, &catalog, exec)?, catalog)
        }
    };

    fs::create_dir_all(&a.out)?;
    write_trial_csv(BufWriter::new(File::create(a.out.join(TRIAL_FILE))?), &runs)?;
    let stats = aggregate(&runs, &catalog);
    let mut w = BufWriter::new(File::create(a.out.join(STATS_FILE))?);
    serde_json::to_writer_pretty(&mut w, &stats)?;
    writeln!(w)?;
    w.flush()?;

    writeln!(out, "configs: {}", runs.len())?;
    writeln!(out, "trials per config: {}", a.trials)?;
    for s in &stats.configs {
        if let Some(all) = &s.all {
            writeln!(
                out,
                "fov {:>5} deg  mlim {:.1}  beta {:.1}  P(correct) {:.4}",
                s.fov_deg, s.m_lim, s.beta, all.correct_probability
            )?;
        }
    }
    Ok(())
}

/// Parses a JSON array of 3-vectors and checks each has unit norm.
pub fn parse_vectors(json: &str) -> Result<Vec<Vector3<f64>>> {
    let raw: Vec<[f64; 3]> = serde_json::from_str(json)?;
    raw.into_iter()
        .enumerate()
        .map(|(i, v)| {
            let v = Vector3::from(v);
            let n = v.norm();
            if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
                Err(Error::domain(format!(
                    "vector {i} has norm {n}, expected a unit vector"
                )))
            } else {
                Ok(v)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub measured: usize,
    pub p_used: usize,
    pub unique: bool,
    pub epsilon_rad: f64,
    pub candidates: Vec<Vec<StarId>>,
}

pub fn identify(vectors: &[Vector3<f64>], pdb: &PairDatabase, epsilon: f64) -> MatchReport {
    let stars: Vec<MeasuredStar> = vectors.iter().copied().map(MeasuredStar::new).collect();
    let outcome = match_stars(&stars, pdb, epsilon);
    MatchReport {
        measured: stars.len(),
        p_used: outcome.p_used,
        unique: outcome.unique,
        epsilon_rad: epsilon,
        candidates: outcome
            .candidates
            .tuples()
            .map(<[StarId]>::to_vec)
            .collect(),
    }
}

pub fn cmd_match(a: &MatchArgs, out: &mut dyn Write) -> Result<()> {
    let text = if a.vectors.as_os_str() == "-" {
        io::read_to_string(io::stdin())?
    } else {
        fs::read_to_string(&a.vectors)?
    };
    let vectors = parse_vectors(&text)?;
    let (_, pdb) = load_databases(&a.db)?;
    let epsilon = match a.epsilon_deg {
        Some(d) if d > 0.0 && d.is_finite() => d.to_radians(),
        Some(d) => {
            return Err(Error::domain(format!(
                "epsilon must be positive, got {d} deg"
            )))
        }
        None => pdb.fingerprint().theta_min,
    };
    let report = identify(&vectors, &pdb, epsilon);
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "# p_used={} unique={}", report.p_used, report.unique)?;
            for t in &report.candidates {
                let ids: Vec<String> = t.iter().map(ToString::to_string).collect();
                writeln!(out, "{}", ids.join(","))?;
            }
        }
    }
    if !report.unique {
        eprintln!("not unique: {} candidate tuple(s)", report.candidates.len());
    }
    Ok(())
}
