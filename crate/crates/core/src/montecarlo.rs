//! Monte Carlo field-of-view study.
//!
//! Each trial points a camera at a random attitude, collects the database
//! stars it would see, corrupts and thins them the way a shipboard sensor
//! would (bounded angular noise, random occlusion), shuffles them, and runs
//! the incremental matcher. Trials are independent: trial `t` of grid entry
//! `c` draws from its own ChaCha8 stream keyed by `(seed, c, t)`, so results
//! do not depend on thread count or scheduling.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::{Quaternion, Rotation3, UnitQuaternion, Vector3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{
    content_hash, equatorial_to_galactic, unit_to_radec, StarDatabase, StarRecord,
};
use crate::error::{Error, Result};
use crate::geometry::{fov_diagonal, in_fov, max_angular_resolution};
use crate::matcher::{is_correct_match, match_stars, MeasuredStar};
use crate::pairdb::{build_pair_db, hex, PairDatabase};

pub const STUDY_FOVS_DEG: [f64; 5] = [5.0, 10.0, 20.0, 40.0, 80.0];
pub const STUDY_MAGNITUDES: [f64; 3] = [3.5, 4.5, 5.5];
pub const STUDY_BETAS: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];
pub const STUDY_TRIALS: u64 = 20_000;
pub const DEFAULT_TRIALS: u64 = 2_000;
pub const DEFAULT_PIXELS: u32 = 1024;
/// Boresights within this galactic latitude count as looking at the Milky Way.
pub const MILKY_WAY_LAT_DEG: f64 = 30.0;
/// Largest `N_min` reported in the observation table.
pub const MAX_N_MIN: usize = 10;

pub const NOISE_MODEL: &str =
    "rotation about a uniform tangent axis by a uniform angle in [0, epsilon/2]";
pub const ROTATION_SAMPLER: &str = "uniform unit quaternion (Shoemake)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Full angle of view, radians.
    pub fov: f64,
    /// Faintest magnitude the sensor registers.
    pub m_lim_hat: f64,
    /// Probability that an in-view star is occluded.
    pub beta: f64,
    pub trials: u64,
    pub seed: u64,
    pub pixels: u32,
}

impl SimConfig {
    pub fn new(fov_deg: f64, m_lim_hat: f64, beta: f64) -> Self {
        Self {
            fov: fov_deg.to_radians(),
            m_lim_hat,
            beta,
            trials: DEFAULT_TRIALS,
            seed: 0,
            pixels: DEFAULT_PIXELS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::domain(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials must be positive"));
        }
        if self.m_lim_hat.is_nan() {
            return Err(Error::domain("magnitude limit is NaN"));
        }
        derive_tolerances(self.fov, self.pixels).map(|_| ())
    }
}

/// Every grid combination, FOV outermost, then magnitude, then beta.
pub fn grid(
    fovs_deg: &[f64],
    magnitudes: &[f64],
    betas: &[f64],
    trials: u64,
    seed: u64,
    pixels: u32,
) -> Vec<SimConfig> {
    let mut out = Vec::with_capacity(fovs_deg.len() * magnitudes.len() * betas.len());
    for &f in fovs_deg {
        for &m in magnitudes {
            for &b in betas {
                out.push(SimConfig {
                    trials,
                    seed,
                    pixels,
                    ..SimConfig::new(f, m, b)
                });
            }
        }
    }
    out
}

pub fn full_grid(trials: u64, seed: u64) -> Vec<SimConfig> {
    grid(
        &STUDY_FOVS_DEG,
        &STUDY_MAGNITUDES,
        &STUDY_BETAS,
        trials,
        seed,
        DEFAULT_PIXELS,
    )
}

/// Angular thresholds tied to one camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub theta_res: f64,
    /// Close-pair exclusion radius for the star database.
    pub theta_min: f64,
    /// Largest separation inside the field of view.
    pub theta_max: f64,
    /// Matching tolerance on inter-star angles.
    pub epsilon: f64,
}

/// A star can be off by up to √2 pixels, so two stars' separation can be off
/// by twice that: `epsilon = theta_min = 2√2 theta_res`.
pub fn derive_tolerances(fov: f64, pixels: u32) -> Result<Tolerances> {
    let theta_res = max_angular_resolution(fov, pixels)?;
    let eps = 2.0 * std::f64::consts::SQRT_2 * theta_res;
    Ok(Tolerances {
        theta_res,
        theta_min: eps,
        theta_max: fov_diagonal(fov),
        epsilon: eps,
    })
}

/// Haar-uniform rotation from a uniformly distributed unit quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3<f64> {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let u3: f64 = rng.random();
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (s2, c2) = (TAU * u2).sin_cos();
    let (s3, c3) = (TAU * u3).sin_cos();
    let q = Quaternion::new(b * c3, a * s2, a * c2, b * s3);
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

/// Rotates `s` by a uniform angle in `[0, max_angle]` about a uniformly
/// oriented axis perpendicular to `s`.
pub fn perturb_direction<R: Rng + ?Sized>(
    s: &Vector3<f64>,
    max_angle: f64,
    rng: &mut R,
) -> Vector3<f64> {
    let angle = max_angle * rng.random::<f64>();
    let phi = TAU * rng.random::<f64>();
    if angle == 0.0 {
        return *s;
    }
    // Any vector not parallel to s works as a seed for the tangent basis.
    let seed = if s.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = s.cross(&seed).normalize();
    let e2 = s.cross(&e1);
    let axis = e1 * phi.cos() + e2 * phi.sin();
    (s * angle.cos() + axis.cross(s) * angle.sin()).normalize()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Galactic latitude of the boresight, radians.
    pub galactic_lat: f64,
    /// Stars inside the field of view and bright enough, before occlusion.
    pub n_selected: usize,
    /// Stars left after occlusion; what the matcher sees.
    pub n_observed: usize,
    pub correct: bool,
    /// Stars the matcher needed; 0 unless the match was correct.
    pub p_match: usize,
    pub near_milky_way: bool,
}

/// One trial. The databases must have been built for `cfg` (see
/// [`derive_tolerances`]) with a magnitude limit no brighter than `cfg.m_lim_hat`.
pub fn simulate_trial<R: Rng + ?Sized>(
    cfg: &SimConfig,
    sdb: &StarDatabase,
    pdb: &PairDatabase,
    rng: &mut R,
) -> Result<TrialRecord> {
    let tol = derive_tolerances(cfg.fov, cfg.pixels)?;
    if sdb.m_lim() < cfg.m_lim_hat {
        return Err(Error::Contract(format!(
            "database magnitude limit {} is brighter than the sensor limit {}",
            sdb.m_lim(),
            cfg.m_lim_hat
        )));
    }

    let rot = random_rotation(rng);

    let mut measured: Vec<MeasuredStar> = sdb
        .stars()
        .iter()
        .filter(|s| s.vmag < cfg.m_lim_hat)
        .filter_map(|s| {
            let s_c = rot * s.direction;
            in_fov(&s_c, cfg.fov).then(|| MeasuredStar::with_truth(s_c, s.id))
        })
        .collect();
    let n_selected = measured.len();

    for m in &mut measured {
        m.direction = perturb_direction(&m.direction, tol.epsilon / 2.0, rng);
    }
    measured.retain(|_| rng.random::<f64>() >= cfg.beta);
    measured.shuffle(rng);

    let outcome = match_stars(&measured, pdb, tol.epsilon);
    let correct = is_correct_match(&outcome, &measured)?;

    let boresight = rot.inverse() * Vector3::z();
    let (ra, dec) = unit_to_radec(&boresight);
    let galactic_lat = equatorial_to_galactic(ra, dec)?.lat;

    Ok(TrialRecord {
        galactic_lat,
        n_selected,
        n_observed: measured.len(),
        correct,
        p_match: if correct { outcome.p_used } else { 0 },
        near_milky_way: galactic_lat.abs() <= MILKY_WAY_LAT_DEG.to_radians(),
    })
}

/// The RNG for one trial, independent of every other `(config, trial)`.
pub fn trial_rng(seed: u64, config_index: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((config_index as u64) << 32) | (trial & 0xffff_ffff));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Trials of one grid entry, with the databases they ran against.
#[derive(Debug, Clone)]
pub struct ConfigRun {
    pub config_index: usize,
    pub config: SimConfig,
    pub tolerances: Tolerances,
    pub star_count: usize,
    pub pair_count: usize,
    pub records: Vec<TrialRecord>,
}

/// Databases for one camera/magnitude combination.
pub fn build_databases(
    catalog: &[StarRecord],
    cfg: &SimConfig,
) -> Result<(StarDatabase, PairDatabase)> {
    let tol = derive_tolerances(cfg.fov, cfg.pixels)?;
    let sdb = StarDatabase::build(catalog, cfg.m_lim_hat, tol.theta_min)?;
    let pdb = build_pair_db(&sdb, tol.theta_max)?;
    Ok((sdb, pdb))
}

/// Runs every configuration. Databases are built once per distinct
/// `(fov, pixels, m_lim_hat)` and shared by the configurations that differ
/// only in `beta`, seed or trial count.
pub fn run_sweep(
    grid: &[SimConfig],
    catalog: &[StarRecord],
    exec: Execution,
) -> Result<Vec<ConfigRun>> {
    for cfg in grid {
        cfg.validate()?;
    }
    let mut cache: HashMap<(u64, u32, u64), (StarDatabase, PairDatabase)> = HashMap::new();
    let mut runs = Vec::with_capacity(grid.len());
    for (index, cfg) in grid.iter().enumerate() {
        let key = (cfg.fov.to_bits(), cfg.pixels, cfg.m_lim_hat.to_bits());
        if !cache.contains_key(&key) {
            cache.insert(key, build_databases(catalog, cfg)?);
        }
        let (sdb, pdb) = &cache[&key];
        runs.push(run_config(index, cfg, sdb, pdb, exec)?);
    }
    Ok(runs)
}

/// Runs one configuration against prebuilt databases.
pub fn run_config(
    index: usize,
    cfg: &SimConfig,
    sdb: &StarDatabase,
    pdb: &PairDatabase,
    exec: Execution,
) -> Result<ConfigRun> {
    cfg.validate()?;
    let one = |t: u64| simulate_trial(cfg, sdb, pdb, &mut trial_rng(cfg.seed, index, t));
    let records = match exec {
        Execution::Serial => (0..cfg.trials).map(one).collect::<Result<Vec<_>>>()?,
        Execution::Parallel => (0..cfg.trials)
            .into_par_iter()
            .map(one)
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(ConfigRun {
        config_index: index,
        config: *cfg,
        tolerances: derive_tolerances(cfg.fov, cfg.pixels)?,
        star_count: sdb.len(),
        pair_count: pdb.len(),
        records,
    })
}

/// Statistics over one group of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub trials: usize,
    /// `P(N >= N_min)` for `N_min = 0..=10`, with N the post-occlusion count.
    pub observation_probability: BTreeMap<usize, f64>,
    pub correct_probability: f64,
    /// Distribution of `p_match` over correct trials; empty when there are none.
    pub p_match_pmf: BTreeMap<usize, f64>,
}

/// `None` for an empty group.
pub fn summarize<'a, I>(records: I) -> Option<CellSummary>
where
    I: IntoIterator<Item = &'a TrialRecord>,
{
    let mut trials = 0usize;
    let mut at_least = [0usize; MAX_N_MIN + 1];
    let mut correct = 0usize;
    let mut p_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in records {
        trials += 1;
        for (n_min, count) in at_least.iter_mut().enumerate() {
            if r.n_observed >= n_min {
                *count += 1;
            }
        }
        if r.correct {
            correct += 1;
            *p_counts.entry(r.p_match).or_default() += 1;
        }
    }
    if trials == 0 {
        return None;
    }
    let n = trials as f64;
    Some(CellSummary {
        trials,
        observation_probability: at_least
            .iter()
            .enumerate()
            .map(|(k, &c)| (k, c as f64 / n))
            .collect(),
        correct_probability: correct as f64 / n,
        p_match_pmf: p_counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / correct as f64))
            .collect(),
    })
}

/// Summaries for one grid entry, split on the Milky Way flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigStatistics {
    pub config_id: usize,
    pub fov_deg: f64,
    pub m_lim: f64,
    pub beta: f64,
    pub pixels: u32,
    pub tolerances: Tolerances,
    pub star_count: usize,
    pub pair_count: usize,
    pub near_milky_way: Option<CellSummary>,
    pub away_from_milky_way: Option<CellSummary>,
    pub all: Option<CellSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub seed: u64,
    pub trials: u64,
    pub pixels: u32,
    pub catalog_stars: usize,
    pub catalog_hash: String,
    pub noise_model: String,
    pub rotation_sampler: String,
    pub milky_way_lat_deg: f64,
    /// Which star count the observation table uses.
    pub observation_count: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStatistics {
    pub metadata: SweepMetadata,
    pub configs: Vec<ConfigStatistics>,
}

pub fn aggregate_run(run: &ConfigRun) -> ConfigStatistics {
    let recs = &run.records;
    ConfigStatistics {
        config_id: run.config_index,
        fov_deg: run.config.fov.to_degrees(),
        m_lim: run.config.m_lim_hat,
        beta: run.config.beta,
        pixels: run.config.pixels,
        tolerances: run.tolerances,
        star_count: run.star_count,
        pair_count: run.pair_count,
        near_milky_way: summarize(recs.iter().filter(|r| r.near_milky_way)),
        away_from_milky_way: summarize(recs.iter().filter(|r| !r.near_milky_way)),
        all: summarize(recs),
    }
}

pub fn aggregate(runs: &[ConfigRun], catalog: &[StarRecord]) -> SweepStatistics {
    let first = runs.first().map(|r| r.config);
    SweepStatistics {
        metadata: SweepMetadata {
            seed: first.map_or(0, |c| c.seed),
            trials: first.map_or(0, |c| c.trials),
            pixels: first.map_or(DEFAULT_PIXELS, |c| c.pixels),
            catalog_stars: catalog.len(),
            catalog_hash: hex(&content_hash(catalog)),
            noise_model: NOISE_MODEL.into(),
            rotation_sampler: ROTATION_SAMPLER.into(),
            milky_way_lat_deg: MILKY_WAY_LAT_DEG,
            observation_count: "post-occlusion".into(),
        },
        configs: runs.iter().map(aggregate_run).collect(),
    }
}

pub const TRIAL_CSV_HEADER: &str =
    "config_id,trial,b_c_deg,near_milky_way,n_observed,correct,p_match";

pub fn write_trial_csv<W: Write>(mut w: W, runs: &[ConfigRun]) -> Result<()> {
    writeln!(w, "{TRIAL_CSV_HEADER}")?;
    for run in runs {
        for (t, r) in run.records.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                run.config_index,
                t,
                r.galactic_lat.to_degrees(),
                r.near_milky_way,
                r.n_observed,
                r.correct,
                r.p_match
            )?;
        }
    }
    w.flush()?;
    Ok(())
}
