//! Invariants shared by the property tests and the acceptance run. Each
//! check pairs an input strategy with a body that returns a `TestCaseResult`.

use std::collections::BTreeSet;

use nalgebra::{Rotation3, Unit, Vector3};
use proptest::prelude::*;
use proptest::test_runner::TestCaseResult;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starid::catalog::{filter_by_magnitude, synthetic_sky};
use starid::geometry::{angular_distance, fov_diagonal, in_fov};
use starid::matcher::{match_3_stars, match_p_stars, MeasuredStar};
use starid::pairdb::{read_pair_db, read_star_db, write_pair_db, write_star_db};
use starid::{build_pair_db, CandidateSet, PairDatabase, StarDatabase, StarId, StarRecord};

use super::{cap_stars, scene_from_db};

pub const CASES: u32 = 1000;

pub fn unit() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("not too short", |(x, y, z)| x * x + y * y + z * z > 1e-4)
        .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
}

fn small_db(seed: u64, n: usize) -> PairDatabase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stars = cap_stars(n, 0.3, &mut rng);
    let db = StarDatabase::build(&stars, 10.0, 0.0).unwrap();
    build_pair_db(&db, 0.6).unwrap()
}

fn tuples(set: &CandidateSet) -> BTreeSet<Vec<StarId>> {
    set.tuples().map(<[_]>::to_vec).collect()
}

fn measured(dirs: &[Vector3<f64>]) -> Vec<MeasuredStar> {
    dirs.iter().copied().map(MeasuredStar::new).collect()
}

pub fn epsilon_args() -> impl Strategy<Value = (u64, f64, f64, usize)> {
    (any::<u64>(), 0.0..0.03f64, 0.0..0.03f64, 5usize..30)
}

/// A wider tolerance never loses a candidate.
pub fn epsilon_monotone((seed, e1, extra, n): (u64, f64, f64, usize)) -> TestCaseResult {
    let pdb = small_db(seed, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (_, dirs) = scene_from_db(&pdb, 3, 0.01, &mut rng);
    let m = measured(&dirs);
    let e2 = e1 + extra;

    let theta = angular_distance(&dirs[0], &dirs[1]);
    let narrow: BTreeSet<_> = pdb
        .query_pairs(theta, e1)
        .iter()
        .map(|e| (e.id_a, e.id_b))
        .collect();
    let wide: BTreeSet<_> = pdb
        .query_pairs(theta, e2)
        .iter()
        .map(|e| (e.id_a, e.id_b))
        .collect();
    prop_assert!(narrow.is_subset(&wide));

    let narrow = tuples(&match_3_stars(&m[0], &m[1], &m[2], &pdb, e1));
    let wide = tuples(&match_3_stars(&m[0], &m[1], &m[2], &pdb, e2));
    prop_assert!(narrow.is_subset(&wide));
    Ok(())
}

pub fn narrowing_args() -> impl Strategy<Value = (u64, f64, usize, usize)> {
    (any::<u64>(), 0.001..0.05f64, 6usize..30, 3usize..6)
}

/// Every (k+1)-tuple extends one of the k-tuples.
pub fn monotone_narrowing((seed, eps, n, k): (u64, f64, usize, usize)) -> TestCaseResult {
    let pdb = small_db(seed, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let (_, dirs) = scene_from_db(&pdb, k + 1, eps / 2.0, &mut rng);
    let m = measured(&dirs);
    let shorter = tuples(&match_p_stars(&m[..k], &pdb, eps));
    let longer = match_p_stars(&m, &pdb, eps);
    for t in longer.tuples() {
        prop_assert!(shorter.contains(&t[..k].to_vec()));
    }
    Ok(())
}

pub fn mirror_args() -> impl Strategy<Value = (Vector3<f64>, [f64; 4])> {
    (
        unit(),
        [-0.3..0.3f64, -0.3..0.3f64, -0.3..0.3f64, -0.3..0.3f64],
    )
}

/// A triangle and its reflection through the plane of two of its vertices
/// have the same angles; only the true one may match.
pub fn mirror_rejected((a, [u1, v1, u2, v2]): (Vector3<f64>, [f64; 4])) -> TestCaseResult {
    let e1 = a
        .cross(&Vector3::z())
        .try_normalize(1e-6)
        .unwrap_or_else(Vector3::x);
    let e2 = a.cross(&e1);
    let b = (a + u1 * e1 + v1 * e2).normalize();
    let c = (a + u2 * e1 + v2 * e2).normalize();
    let n = a.cross(&b);
    prop_assume!(angular_distance(&a, &b) > 0.01 && n.norm() > 1e-3);
    let n = n.normalize();
    prop_assume!(n.dot(&c).abs() > 0.01);
    let mirror = c - 2.0 * n.dot(&c) * n;
    let stars: Vec<StarRecord> = [a, b, c, mirror]
        .iter()
        .enumerate()
        .map(|(i, d)| StarRecord {
            id: i as StarId + 1,
            direction: *d,
            vmag: 1.0,
        })
        .collect();
    let db = StarDatabase::build(&stars, 5.0, 0.0).unwrap();
    let pdb = build_pair_db(&db, 1.2).unwrap();
    let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(0.3, -1.0, 0.2)), 0.8);
    let m = measured(&[rot * a, rot * b, rot * c]);
    let got = tuples(&match_3_stars(&m[0], &m[1], &m[2], &pdb, 1e-9));
    prop_assert!(got.contains(&vec![1, 2, 3]));
    prop_assert!(!got.contains(&vec![1, 2, 4]));
    Ok(())
}

pub fn filter_args() -> impl Strategy<Value = (u64, f64, usize)> {
    (any::<u64>(), -1.0..7.0f64, 0usize..200)
}

pub fn filter_idempotent((seed, m, n): (u64, f64, usize)) -> TestCaseResult {
    let stars = synthetic_sky(n, 6.5, &mut ChaCha8Rng::seed_from_u64(seed));
    let once = filter_by_magnitude(&stars, m);
    prop_assert_eq!(filter_by_magnitude(&once, m), once.clone());
    prop_assert!(once.iter().all(|s| s.vmag <= m));
    prop_assert_eq!(once.len(), stars.iter().filter(|s| s.vmag <= m).count());
    Ok(())
}

pub fn serialization_args() -> impl Strategy<Value = (u64, usize, f64)> {
    (any::<u64>(), 0usize..60, 0.0..0.05f64)
}

pub fn serialization_round_trip((seed, n, theta_min): (u64, usize, f64)) -> TestCaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stars = cap_stars(n, 0.4, &mut rng);
    let db = StarDatabase::build(&stars, 4.0, theta_min).unwrap();
    let pdb = build_pair_db(&db, 0.5).unwrap();

    let mut buf = Vec::new();
    write_star_db(&mut buf, &db).unwrap();
    prop_assert_eq!(read_star_db(&buf[..]).unwrap(), db);

    let mut buf = Vec::new();
    write_pair_db(&mut buf, &pdb).unwrap();
    let back = read_pair_db(&buf[..]).unwrap();
    let mut again = Vec::new();
    write_pair_db(&mut again, &back).unwrap();
    prop_assert_eq!(back, pdb);
    prop_assert_eq!(again, buf);
    Ok(())
}

pub fn permutation_args() -> impl Strategy<Value = (u64, f64, usize)> {
    (any::<u64>(), 0.001..0.05f64, 5usize..25)
}

/// Rotating the order of the measured stars rotates every candidate.
pub fn permutation_consistent((seed, eps, n): (u64, f64, usize)) -> TestCaseResult {
    let pdb = small_db(seed, n);
    let mut rng = ChaCha8Rng::seed_from_u64(!seed);
    let (_, dirs) = scene_from_db(&pdb, 3, eps / 2.0, &mut rng);
    let m = measured(&dirs);
    let base = tuples(&match_3_stars(&m[0], &m[1], &m[2], &pdb, eps));
    // cyclic shifts keep the winding, so the set must map exactly
    let shifted = tuples(&match_3_stars(&m[1], &m[2], &m[0], &pdb, eps));
    let expect: BTreeSet<Vec<StarId>> = base.iter().map(|t| vec![t[1], t[2], t[0]]).collect();
    prop_assert_eq!(shifted, expect);
    Ok(())
}

pub fn fov_args() -> impl Strategy<Value = (Vector3<f64>, f64)> {
    (unit(), 0.01..3.0f64)
}

pub fn in_view_within_half_diagonal((s, fov): (Vector3<f64>, f64)) -> TestCaseResult {
    if in_fov(&s, fov) {
        prop_assert!(angular_distance(&s, &Vector3::z()) <= fov_diagonal(fov) / 2.0 + 1e-12);
    }
    Ok(())
}

pub fn triangle_args() -> impl Strategy<Value = (Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
    (unit(), unit(), unit())
}

pub fn triangle_inequality(
    (a, b, c): (Vector3<f64>, Vector3<f64>, Vector3<f64>),
) -> TestCaseResult {
    let (ab, bc, ac) = (
        angular_distance(&a, &b),
        angular_distance(&b, &c),
        angular_distance(&a, &c),
    );
    prop_assert!(ac <= ab + bc + 1e-7);
    prop_assert!((0.0..=std::f64::consts::PI).contains(&ab));
    prop_assert_eq!(ab, angular_distance(&b, &a));
    Ok(())
}
