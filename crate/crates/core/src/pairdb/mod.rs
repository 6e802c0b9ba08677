//! Inter-star angle database with ε-range lookup.
//!
//! Every unordered pair of database stars no more than `theta_max` apart is
//! stored once, as `(id_a, id_b, theta)` with `id_a < id_b`, in a flat array
//! sorted by angle. A range query `|theta - theta_hat| <= eps` is two binary
//! searches and a slice.

mod container;

use std::collections::HashMap;
use std::io::Write;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{content_hash, StarDatabase, StarId, StarRecord};
use crate::error::{Error, Result};
use crate::geometry::angular_distance;

pub use container::{read_pair_db, read_star_db, write_pair_db, write_star_db, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub id_a: StarId,
    pub id_b: StarId,
    /// Angular separation, radians.
    pub theta: f64,
}

/// Identifies the star database a pair database was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub m_lim: f64,
    pub theta_min: f64,
    pub star_count: u64,
    #[serde(with = "hex_bytes")]
    pub content_hash: [u8; 32],
}

impl Fingerprint {
    pub fn of(db: &StarDatabase) -> Self {
        Self {
            m_lim: db.m_lim(),
            theta_min: db.theta_min(),
            star_count: db.len() as u64,
            content_hash: db.content_hash(),
        }
    }

    pub fn hash_hex(&self) -> String {
        hex(&self.content_hash)
    }
}

/// The pair set plus the star table it refers to.
///
/// Stars are kept alongside the pairs because triangle matching needs their
/// directions, not just their ids.
#[derive(Debug, Clone)]
pub struct PairDatabase {
    entries: Vec<PairEntry>,
    theta_max: f64,
    stars: Vec<StarRecord>,
    fingerprint: Fingerprint,
    index_of: HashMap<StarId, usize>,
}

impl PartialEq for PairDatabase {
    fn eq(&self, other: &Self) -> bool {
        // Bit-level comparison so that a round trip through the file format
        // is checked exactly.
        self.theta_max.to_bits() == other.theta_max.to_bits()
            && self.fingerprint.m_lim.to_bits() == other.fingerprint.m_lim.to_bits()
            && self.fingerprint.theta_min.to_bits() == other.fingerprint.theta_min.to_bits()
            && self.fingerprint.star_count == other.fingerprint.star_count
            && self.fingerprint.content_hash == other.fingerprint.content_hash
            && self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| {
                a.id_a == b.id_a && a.id_b == b.id_b && a.theta.to_bits() == b.theta.to_bits()
            })
            && self.stars.len() == other.stars.len()
            && self.stars.iter().zip(&other.stars).all(|(a, b)| {
                a.id == b.id
                    && a.vmag.to_bits() == b.vmag.to_bits()
                    && a.direction
                        .iter()
                        .zip(b.direction.iter())
                        .all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

fn index_stars(stars: &[StarRecord]) -> HashMap<StarId, usize> {
    stars.iter().enumerate().map(|(i, s)| (s.id, i)).collect()
}

/// Collects every pair within `theta_max`; rows are split across threads and
/// the result is sorted afterwards, so the output is independent of scheduling.
pub fn build_pair_db(db: &StarDatabase, theta_max: f64) -> Result<PairDatabase> {
    if !(theta_max > 0.0) {
        return Err(Error::domain(format!(
            "theta_max must be positive, got {theta_max}"
        )));
    }
    let stars = db.stars();
    let cos_cut = theta_max.cos();
    let mut entries: Vec<PairEntry> = (0..stars.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = &stars[i];
            stars[i + 1..].iter().filter_map(move |b| {
                // Cheap reject on the dot product before paying for acos.
                if a.direction.dot(&b.direction) < cos_cut - 1e-12 {
                    return None;
                }
                let theta = angular_distance(&a.direction, &b.direction);
                (theta <= theta_max).then(|| PairEntry {
                    id_a: a.id.min(b.id),
                    id_b: a.id.max(b.id),
                    theta,
                })
            })
        })
        .collect();
    entries.par_sort_unstable_by(|x, y| {
        x.theta
            .total_cmp(&y.theta)
            .then(x.id_a.cmp(&y.id_a))
            .then(x.id_b.cmp(&y.id_b))
    });
    Ok(PairDatabase {
        entries,
        theta_max,
        stars: stars.to_vec(),
        fingerprint: Fingerprint::of(db),
        index_of: index_stars(stars),
    })
}

impl PairDatabase {
    pub(crate) fn from_parts(
        entries: Vec<PairEntry>,
        theta_max: f64,
        stars: Vec<StarRecord>,
        fingerprint: Fingerprint,
    ) -> Result<Self> {
        if content_hash(&stars) != fingerprint.content_hash {
            return Err(Error::Format(
                "star table does not match content hash".into(),
            ));
        }
        if stars.len() as u64 != fingerprint.star_count {
            return Err(Error::Format("star count does not match header".into()));
        }
        if entries.windows(2).any(|w| w[0].theta > w[1].theta) {
            return Err(Error::Format("pair entries are not sorted by angle".into()));
        }
        let index_of = index_stars(&stars);
        if entries.iter().any(|e| {
            !(e.id_a < e.id_b && index_of.contains_key(&e.id_a) && index_of.contains_key(&e.id_b))
        }) {
            return Err(Error::Format(
                "pair entry references an unknown or non-canonical id".into(),
            ));
        }
        Ok(Self {
            entries,
            theta_max,
            stars,
            fingerprint,
            index_of,
        })
    }

    pub fn entries(&self) -> &[PairEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }

    pub fn stars(&self) -> &[StarRecord] {
        &self.stars
    }

    pub fn star(&self, id: StarId) -> Option<&StarRecord> {
        self.index_of.get(&id).map(|&i| &self.stars[i])
    }

    pub(crate) fn direction(&self, id: StarId) -> &Vector3<f64> {
        &self.stars[self.index_of[&id]].direction
    }

    /// Entries with `|theta - theta_hat| <= epsilon`, as a contiguous slice
    /// of the angle-sorted array.
    pub fn query_pairs(&self, theta_hat: f64, epsilon: f64) -> &[PairEntry] {
        if !(epsilon >= 0.0) || theta_hat.is_nan() {
            return &[];
        }
        let lo = self
            .entries
            .partition_point(|e| e.theta - theta_hat < -epsilon);
        let hi = self
            .entries
            .partition_point(|e| e.theta - theta_hat <= epsilon);
        if lo >= hi {
            &[]
        } else {
            &self.entries[lo..hi]
        }
    }

    /// Debug export, `id_a,id_b,theta_rad` with a header row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "id_a,id_b,theta_rad")?;
        for e in &self.entries {
            writeln!(w, "{},{},{:e}", e.id_a, e.id_b, e.theta)?;
        }
        Ok(())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::hex(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let text = String::deserialize(d)?;
        let mut out = [0u8; 32];
        if text.len() != 64 {
            return Err(serde::de::Error::custom("expected 64 hex digits"));
        }
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&text[2 * i..2 * i + 2], 16)
                .map_err(serde::de::Error::custom)?;
        }
        Ok(out)
    }
}
