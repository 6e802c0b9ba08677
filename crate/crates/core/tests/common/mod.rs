#![allow(dead_code)]

pub mod props;

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::seq::index::sample;
use rand::Rng;
use starid::catalog::{load_catalog, ParseMode};
use starid::geometry::angular_distance;
use starid::matcher::handedness;
use starid::montecarlo::random_rotation;
use starid::{PairDatabase, StarId, StarRecord};

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// `STARID_CATALOG` when set, otherwise the bundled Hipparcos V <= 6 sky.
pub fn catalog_path() -> PathBuf {
    std::env::var_os("STARID_CATALOG")
        .map(PathBuf::from)
        .unwrap_or_else(|| data_dir().join("hip_mag6.csv"))
}

pub fn catalog() -> Vec<StarRecord> {
    load_catalog(&catalog_path(), ParseMode::Lenient)
        .and_then(|c| c.to_records())
        .expect("catalog loads")
}

/// True when the catalog in use is the full BSC5 file.
pub fn is_bsc5(path: &Path) -> bool {
    path.extension()
        .is_none_or(|e| !e.eq_ignore_ascii_case("csv"))
}

/// `n` stars spread uniformly over a cap of half-angle `radius` around +Z.
pub fn cap_stars<R: Rng>(n: usize, radius: f64, rng: &mut R) -> Vec<StarRecord> {
    let zmin = radius.cos();
    (0..n)
        .map(|i| {
            let z: f64 = rng.random_range(zmin..=1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).sqrt();
            StarRecord {
                id: 1000 + 7 * i as StarId,
                direction: Vector3::new(r * phi.cos(), r * phi.sin(), z),
                vmag: rng.random_range(0.0..6.0),
            }
        })
        .collect()
}

/// Camera-frame directions of `k` distinct database stars under a random
/// rotation, each nudged by at most `noise` radians.
pub fn scene_from_db<R: Rng>(
    pdb: &PairDatabase,
    k: usize,
    noise: f64,
    rng: &mut R,
) -> (Vec<StarId>, Vec<Vector3<f64>>) {
    let rot = random_rotation(rng);
    let picks = sample(rng, pdb.stars().len(), k);
    let mut ids = Vec::with_capacity(k);
    let mut dirs = Vec::with_capacity(k);
    for i in picks {
        let s = &pdb.stars()[i];
        ids.push(s.id);
        let d = rot * s.direction;
        dirs.push(starid::montecarlo::perturb_direction(&d, noise, rng));
    }
    (ids, dirs)
}

fn pair_ok(
    pdb: &PairDatabase,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    theta_hat: f64,
    eps: f64,
) -> bool {
    let theta = angular_distance(a, b);
    theta <= pdb.theta_max() && (theta - theta_hat).abs() <= eps
}

/// Every ordered triple of distinct stars whose three angles are within
/// `eps` of the measured ones and whose winding matches.
pub fn brute_triangles(pdb: &PairDatabase, m: &[Vector3<f64>], eps: f64) -> Vec<[StarId; 3]> {
    let stars = pdb.stars();
    let t12 = angular_distance(&m[0], &m[1]);
    let t13 = angular_distance(&m[0], &m[2]);
    let t23 = angular_distance(&m[1], &m[2]);
    let sign = handedness(&m[0], &m[1], &m[2]);
    let mut out = Vec::new();
    for a in stars {
        for b in stars {
            if a.id == b.id || !pair_ok(pdb, &a.direction, &b.direction, t12, eps) {
                continue;
            }
            for c in stars {
                if c.id == a.id || c.id == b.id {
                    continue;
                }
                if pair_ok(pdb, &a.direction, &c.direction, t13, eps)
                    && pair_ok(pdb, &b.direction, &c.direction, t23, eps)
                    && handedness(&a.direction, &b.direction, &c.direction) == sign
                {
                    out.push([a.id, b.id, c.id]);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Ordered 4-tuples: a valid triangle on the first three slots plus a fourth
/// star whose angles to all three agree. Only the first triple is sign tested.
pub fn brute_quads(pdb: &PairDatabase, m: &[Vector3<f64>], eps: f64) -> Vec<[StarId; 4]> {
    let t: Vec<f64> = (0..3).map(|i| angular_distance(&m[i], &m[3])).collect();
    let mut out = Vec::new();
    for [a, b, c] in brute_triangles(pdb, m, eps) {
        let dirs = [a, b, c].map(|id| pdb.star(id).unwrap().direction);
        for d in pdb.stars() {
            if [a, b, c].contains(&d.id) {
                continue;
            }
            if (0..3).all(|i| pair_ok(pdb, &dirs[i], &d.direction, t[i], eps)) {
                out.push([a, b, c, d.id]);
            }
        }
    }
    out.sort_unstable();
    out
}
