//! A handful of Monte Carlo trials for one configuration, showing what a
//! single trial records.
//!
//! ```bash
//! cargo run --release --example single_trial
//! ```

use std::path::Path;

use starid::catalog::{load_catalog, ParseMode};
use starid::montecarlo::{build_databases, simulate_trial, trial_rng, SimConfig};

fn main() -> starid::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/hip_mag6.csv");
    let records = load_catalog(&path, ParseMode::Lenient)?.to_records()?;

    let mut cfg = SimConfig::new(20.0, 5.5, 0.2);
    cfg.seed = 3;
    let (sdb, pdb) = build_databases(&records, &cfg)?;
    println!("{} stars, {} pairs", sdb.len(), pdb.len());

    println!("trial  gal.lat  selected  observed  correct  p_match");
    for t in 0..12 {
        let r = simulate_trial(&cfg, &sdb, &pdb, &mut trial_rng(cfg.seed, 0, t))?;
        println!(
            "{t:>5}  {:>7.2}  {:>8}  {:>8}  {:>7}  {:>7}",
            r.galactic_lat.to_degrees(),
            r.n_selected,
            r.n_observed,
            r.correct,
            r.p_match
        );
    }
    Ok(())
}
