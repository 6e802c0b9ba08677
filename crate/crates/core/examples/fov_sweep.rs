//! Monte Carlo sweep over field of view, sensor magnitude limit and
//! occlusion rate, printed as a table.
//!
//! Uses the catalog in `STARID_CATALOG` when set, otherwise the bundled
//! Hipparcos sky.
//!
//! ```bash
//! cargo run --release --example fov_sweep -- 500
//! ```

use std::path::Path;
use std::time::Instant;

use starid::catalog::{load_catalog, ParseMode};
use starid::montecarlo::{aggregate, grid, run_sweep, Execution};
use starid::StarRecord;

fn catalog() -> Vec<StarRecord> {
    let path = std::env::var_os("STARID_CATALOG")
        .map(Into::into)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data/hip_mag6.csv"));
    load_catalog(&path, ParseMode::Lenient)
        .and_then(|c| c.to_records())
        .expect("catalog")
}

fn main() -> starid::Result<()> {
    let trials: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(300);
    let stars = catalog();
    let configs = grid(
        &[5.0, 20.0, 80.0],
        &[3.5, 5.5],
        &[0.0, 0.4, 0.8],
        trials,
        42,
        1024,
    );

    let t0 = Instant::now();
    let runs = run_sweep(&configs, &stars, Execution::Parallel)?;
    let stats = aggregate(&runs, &stars);
    eprintln!(
        "{} configs x {} trials in {:.1?}",
        runs.len(),
        trials,
        t0.elapsed()
    );

    println!("fov   mlim  beta  stars  P(N>=3)  P(correct)  p_match pmf");
    for c in &stats.configs {
        let all = c.all.as_ref().expect("trials > 0");
        let pmf: Vec<String> = all
            .p_match_pmf
            .iter()
            .map(|(k, v)| format!("{k}:{v:.3}"))
            .collect();
        println!(
            "{:>4}  {:>4}  {:>4}  {:>5}  {:>7.3}  {:>10.3}  {}",
            c.fov_deg,
            c.m_lim,
            c.beta,
            c.star_count,
            all.observation_probability[&3],
            all.correct_probability,
            pmf.join(" ")
        );
    }
    Ok(())
}
