//! Renders the stars around a random boresight onto a 1024 px sensor,
//! rounds them to pixel centres, and identifies them from the pixel
//! coordinates alone.
//!
//! ```bash
//! cargo run --release --example identify_scene -- 7
//! ```

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starid::catalog::{load_catalog, ParseMode};
use starid::geometry::{in_fov, pixel_to_unit, project_to_pixel, CameraIntrinsics};
use starid::montecarlo::{build_databases, random_rotation, SimConfig};
use starid::{match_stars, MeasuredStar};

fn main() -> starid::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/hip_mag6.csv");
    let records = load_catalog(&path, ParseMode::Lenient)?.to_records()?;

    let cfg = SimConfig::new(20.0, 5.5, 0.0);
    let (sdb, pdb) = build_databases(&records, &cfg)?;
    let cam = CameraIntrinsics::from_fov(cfg.fov, cfg.pixels)?;
    let epsilon = pdb.fingerprint().theta_min;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rot = random_rotation(&mut rng);

    let mut truth = Vec::new();
    let mut measured = Vec::new();
    for s in sdb.stars() {
        let s_c = rot * s.direction;
        if !in_fov(&s_c, cfg.fov) {
            continue;
        }
        let (u, v) = project_to_pixel(&s_c, &cam)?;
        let (u, v) = (u.floor() + 0.5, v.floor() + 0.5);
        if truth.len() < 8 {
            println!(
                "id {:>6}  V {:>5.2}  pixel ({u:>6.1}, {v:>6.1})",
                s.id, s.vmag
            );
        }
        truth.push(s.id);
        measured.push(MeasuredStar::new(pixel_to_unit(u, v, &cam)));
    }

    let outcome = match_stars(&measured, &pdb, epsilon);
    println!(
        "{} stars in view, used {}, {} candidate(s), unique = {}",
        measured.len(),
        outcome.p_used,
        outcome.candidates.len(),
        outcome.unique
    );
    if let Some(ids) = outcome.candidates.single() {
        let ok = ids == &truth[..outcome.p_used];
        println!(
            "identified {ids:?} ({})",
            if ok { "correct" } else { "wrong" }
        );
    }
    Ok(())
}
