//! Star catalog ingestion and the filtered star database.
//!
//! Two input formats are understood:
//!
//! * the Yale Bright Star Catalog, 5th edition, as the fixed-width ASCII file
//!   distributed by the CDS (`catalog`, one 197-byte record per HR number);
//! * a small CSV dialect, `id,ra_hours,dec_degrees,vmag`, where the RA and Dec
//!   fields may carry an `h` / `d` suffix. A header row and `#` comments are
//!   ignored.
//!
//! Positions are used as given at J2000. No proper motion or precession.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::angular_distance;

/// Right ascension of the north galactic pole, degrees.
pub const NGP_RA_DEG: f64 = 192.85948;
/// Declination of the north galactic pole, degrees.
pub const NGP_DEC_DEG: f64 = 27.12825;
/// Galactic longitude of the north celestial pole, degrees.
pub const NCP_GAL_LON_DEG: f64 = 122.93192;

pub type StarId = u32;

/// One catalog row after parsing, before conversion to a direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub id: StarId,
    /// Right ascension, radians.
    pub ra: f64,
    /// Declination, radians.
    pub dec: f64,
    pub vmag: f64,
}

/// A star with its inertial (equatorial J2000) unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarRecord {
    pub id: StarId,
    pub direction: Vector3<f64>,
    pub vmag: f64,
}

impl StarRecord {
    pub fn from_entry(entry: &CatalogEntry) -> Result<Self> {
        Ok(Self {
            id: entry.id,
            direction: radec_to_unit(entry.ra, entry.dec)?,
            vmag: entry.vmag,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogFormat {
    Bsc5Ascii,
    Csv,
}

impl CatalogFormat {
    /// Guess from the file extension: `.csv` is CSV, anything else is BSC5.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CatalogFormat::Csv,
            _ => CatalogFormat::Bsc5Ascii,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Stop at the first malformed line.
    Strict,
    /// Skip malformed lines and count them.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedCatalog {
    pub entries: Vec<CatalogEntry>,
    /// Rows without a position or magnitude (BSC5 keeps placeholders for
    /// objects that were dropped from the catalog).
    pub skipped: usize,
    /// Rows that could not be parsed; always zero in strict mode.
    pub malformed: usize,
}

impl ParsedCatalog {
    pub fn to_records(&self) -> Result<Vec<StarRecord>> {
        self.entries.iter().map(StarRecord::from_entry).collect()
    }
}

enum Row {
    Star(CatalogEntry),
    Missing,
    Ignored,
}

pub fn parse_catalog<R: BufRead>(
    reader: R,
    format: CatalogFormat,
    mode: ParseMode,
) -> Result<ParsedCatalog> {
    let mut out = ParsedCatalog::default();
    let mut seen_data = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let row = match format {
            CatalogFormat::Bsc5Ascii => parse_bsc5_line(&line),
            CatalogFormat::Csv => parse_csv_line(&line, !seen_data),
        };
        match row {
            Ok(Row::Star(e)) => {
                seen_data = true;
                out.entries.push(e);
            }
            Ok(Row::Missing) => {
                seen_data = true;
                out.skipped += 1;
            }
            Ok(Row::Ignored) => {}
            Err(message) => match mode {
                ParseMode::Strict => {
                    return Err(Error::Parse {
                        line: lineno,
                        message,
                    })
                }
                ParseMode::Lenient => {
                    seen_data = true;
                    out.malformed += 1;
                }
            },
        }
    }
    Ok(out)
}

/// Reads a catalog file, picking the format from its extension.
pub fn load_catalog(path: &Path, mode: ParseMode) -> Result<ParsedCatalog> {
    let file = File::open(path)?;
    parse_catalog(BufReader::new(file), CatalogFormat::from_path(path), mode)
}

/// 1-based inclusive byte columns, as in the catalog's ReadMe.
fn column(line: &str, first: usize, last: usize) -> &str {
    let bytes = line.as_bytes();
    let start = (first - 1).min(bytes.len());
    let end = last.min(bytes.len());
    std::str::from_utf8(&bytes[start..end]).unwrap_or("").trim()
}

fn parse_num<T: std::str::FromStr>(field: &str, name: &str) -> Result<T, String> {
    field
        .parse()
        .map_err(|_| format!("bad {name} field {field:?}"))
}

fn parse_bsc5_line(line: &str) -> Result<Row, String> {
    if line.trim().is_empty() {
        return Ok(Row::Ignored);
    }
    if !line.is_ascii() {
        return Err("non-ASCII bytes in fixed-width record".into());
    }
    let id: StarId = parse_num(column(line, 1, 4), "HR")?;

    let (rah, ram, ras) = (
        column(line, 76, 77),
        column(line, 78, 79),
        column(line, 80, 83),
    );
    let (sign, ded, dem, des) = (
        column(line, 84, 84),
        column(line, 85, 86),
        column(line, 87, 88),
        column(line, 89, 90),
    );
    let vmag = column(line, 103, 107);
    if rah.is_empty() || ded.is_empty() || vmag.is_empty() {
        return Ok(Row::Missing);
    }

    let hours = parse_num::<f64>(rah, "RAh")?
        + parse_num::<f64>(ram, "RAm")? / 60.0
        + parse_num::<f64>(ras, "RAs")? / 3600.0;
    let magnitude = parse_num::<f64>(ded, "DEd")?
        + parse_num::<f64>(dem, "DEm")? / 60.0
        + parse_num::<f64>(des, "DEs")? / 3600.0;
    let degrees = match sign {
        "-" => -magnitude,
        "+" | "" => magnitude,
        other => return Err(format!("bad declination sign {other:?}")),
    };
    let entry = CatalogEntry {
        id,
        ra: hours_to_radians(hours),
        dec: degrees.to_radians(),
        vmag: parse_num(vmag, "Vmag")?,
    };
    validate_entry(entry).map(Row::Star)
}

fn parse_csv_line(line: &str, may_be_header: bool) -> Result<Row, String> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(Row::Ignored);
    }
    let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 fields, found {}", fields.len()));
    }
    if may_be_header && fields[0].parse::<StarId>().is_err() {
        return Ok(Row::Ignored);
    }
    let id: StarId = parse_num(fields[0], "id")?;
    if fields[1..].iter().any(|f| f.is_empty()) {
        return Ok(Row::Missing);
    }
    let hours: f64 = parse_num(strip_unit(fields[1], 'h'), "ra_hours")?;
    let degrees: f64 = parse_num(strip_unit(fields[2], 'd'), "dec_degrees")?;
    let entry = CatalogEntry {
        id,
        ra: hours_to_radians(hours),
        dec: degrees.to_radians(),
        vmag: parse_num(fields[3], "vmag")?,
    };
    validate_entry(entry).map(Row::Star)
}

fn strip_unit(field: &str, unit: char) -> &str {
    field
        .strip_suffix(unit)
        .or_else(|| field.strip_suffix(unit.to_ascii_uppercase()))
        .unwrap_or(field)
        .trim_end()
}

fn validate_entry(e: CatalogEntry) -> Result<CatalogEntry, String> {
    if !(e.ra.is_finite() && e.vmag.is_finite()) {
        return Err("non-finite value".into());
    }
    if !(-FRAC_PI_2..=FRAC_PI_2).contains(&e.dec) {
        return Err(format!(
            "declination {} deg out of range",
            e.dec.to_degrees()
        ));
    }
    Ok(e)
}

#[inline]
pub fn hours_to_radians(hours: f64) -> f64 {
    hours * (PI / 12.0)
}

/// Unit vector `(cos a cos d, sin a cos d, sin d)` in the equatorial frame.
pub fn radec_to_unit(alpha: f64, delta: f64) -> Result<Vector3<f64>> {
    if !(-FRAC_PI_2..=FRAC_PI_2).contains(&delta) {
        return Err(Error::domain(format!(
            "declination {delta} rad out of range"
        )));
    }
    let (sa, ca) = alpha.sin_cos();
    let (sd, cd) = delta.sin_cos();
    Ok(Vector3::new(ca * cd, sa * cd, sd))
}

/// Inverse of [`radec_to_unit`]; RA wrapped into `[0, 2pi)`.
pub fn unit_to_radec(s: &Vector3<f64>) -> (f64, f64) {
    let ra = s.y.atan2(s.x).rem_euclid(TAU);
    let dec = s.z.clamp(-1.0, 1.0).asin();
    (ra, dec)
}

/// Galactic longitude and latitude, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GalacticCoord {
    /// `[0, 2pi)`; zero at the galactic poles.
    pub lon: f64,
    /// `[-pi/2, pi/2]`.
    pub lat: f64,
}

pub fn equatorial_to_galactic(alpha: f64, delta: f64) -> Result<GalacticCoord> {
    if !(-FRAC_PI_2..=FRAC_PI_2).contains(&delta) {
        return Err(Error::domain(format!(
            "declination {delta} rad out of range"
        )));
    }
    let (sg, cg) = NGP_DEC_DEG.to_radians().sin_cos();
    let (sd, cd) = delta.sin_cos();
    let (sa, ca) = (alpha - NGP_RA_DEG.to_radians()).sin_cos();

    let sin_b = (cd * cg * ca + sd * sg).clamp(-1.0, 1.0);
    let lat = sin_b.asin();
    // sin(lN - l) cos b and cos(lN - l) cos b
    let y = cd * sa;
    let x = sd * cg - cd * sg * ca;
    let lon = if y.hypot(x) < 1e-12 {
        0.0
    } else {
        (NCP_GAL_LON_DEG.to_radians() - y.atan2(x)).rem_euclid(TAU)
    };
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    let lon = if lon >= TAU { 0.0 } else { lon };
    Ok(GalacticCoord { lon, lat })
}

/// Stars no fainter than `m_lim`, in input order.
pub fn filter_by_magnitude(records: &[StarRecord], m_lim: f64) -> Vec<StarRecord> {
    records
        .iter()
        .filter(|r| r.vmag <= m_lim)
        .copied()
        .collect()
}

/// The star database: bright enough to be seen and free of unresolvable pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct StarDatabase {
    stars: Vec<StarRecord>,
    m_lim: f64,
    theta_min: f64,
}

impl StarDatabase {
    /// Magnitude cut first, then close-pair exclusion on what remains.
    pub fn build(records: &[StarRecord], m_lim: f64, theta_min: f64) -> Result<Self> {
        if theta_min.is_nan() || theta_min < 0.0 {
            return Err(Error::domain(format!(
                "theta_min must be >= 0, got {theta_min}"
            )));
        }
        if m_lim.is_nan() {
            return Err(Error::domain("m_lim is NaN"));
        }
        let mut ids = HashSet::with_capacity(records.len());
        if let Some(dup) = records.iter().find(|r| !ids.insert(r.id)) {
            return Err(Error::domain(format!("duplicate star id {}", dup.id)));
        }
        let bright = filter_by_magnitude(records, m_lim);
        Ok(exclude_close_pairs(&bright, m_lim, theta_min))
    }

    /// Reassembles a database from stored parts; used by the file loader.
    pub(crate) fn from_parts(stars: Vec<StarRecord>, m_lim: f64, theta_min: f64) -> Self {
        Self {
            stars,
            m_lim,
            theta_min,
        }
    }

    pub fn stars(&self) -> &[StarRecord] {
        &self.stars
    }

    pub fn len(&self) -> usize {
        self.stars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stars.is_empty()
    }

    pub fn m_lim(&self) -> f64 {
        self.m_lim
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    /// SHA-256 over the little-endian encoding of every record.
    pub fn content_hash(&self) -> [u8; 32] {
        content_hash(&self.stars)
    }
}

pub(crate) fn content_hash(stars: &[StarRecord]) -> [u8; 32] {
    let mut h = Sha256::new();
    for s in stars {
        h.update(s.id.to_le_bytes());
        for c in s.direction.iter() {
            h.update(c.to_le_bytes());
        }
        h.update(s.vmag.to_le_bytes());
    }
    h.finalize().into()
}

/// Keeps a star only if every other input star is at least `theta_min` away.
/// Both members of a close pair are dropped.
pub fn exclude_close_pairs(records: &[StarRecord], m_lim: f64, theta_min: f64) -> StarDatabase {
    let n = records.len();
    let mut close = vec![false; n];
    if theta_min > 0.0 {
        let decs: Vec<f64> = records
            .iter()
            .map(|r| r.direction.z.clamp(-1.0, 1.0).asin())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| decs[a].total_cmp(&decs[b]));
        // Separation is at least the declination difference, so only a thin
        // band of neighbours in declination order needs checking. The slack
        // absorbs asin/acos rounding differences.
        let band = theta_min + 1e-9;
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if decs[j] - decs[i] > band {
                    break;
                }
                if angular_distance(&records[i].direction, &records[j].direction) < theta_min {
                    close[i] = true;
                    close[j] = true;
                }
            }
        }
    }
    let stars = records
        .iter()
        .zip(&close)
        .filter(|(_, &c)| !c)
        .map(|(r, _)| *r)
        .collect();
    StarDatabase {
        stars,
        m_lim,
        theta_min,
    }
}

/// An isotropic random sky for tests and demos when no catalog file is at
/// hand. Magnitudes follow `N(< m) ∝ 10^(m/2)` up to `faintest`, roughly the
/// bright-star counts of the real sky; ids run from 1.
pub fn synthetic_sky<R: rand::Rng + ?Sized>(
    count: usize,
    faintest: f64,
    rng: &mut R,
) -> Vec<StarRecord> {
    (1..=count)
        .map(|id| {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(0.0..TAU);
            let r = (1.0 - z * z).max(0.0).sqrt();
            let u: f64 = 1.0 - rng.random::<f64>();
            StarRecord {
                id: id as StarId,
                direction: Vector3::new(r * phi.cos(), r * phi.sin(), z),
                vmag: faintest + 2.0 * u.log10(),
            }
        })
        .collect()
}
