//! Builds the star and pair databases for a 20° camera, writes them to a
//! temporary directory, reads them back and runs a few pair queries.
//!
//! ```bash
//! cargo run --release --example build_database
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use starid::catalog::{load_catalog, ParseMode};
use starid::montecarlo::derive_tolerances;
use starid::pairdb::{read_pair_db, write_pair_db};
use starid::{build_pair_db, StarDatabase};

fn main() -> starid::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/hip_mag6.csv");
    let records = load_catalog(&path, ParseMode::Lenient)?.to_records()?;

    let tol = derive_tolerances(20f64.to_radians(), 1024)?;
    let sdb = StarDatabase::build(&records, 5.5, tol.theta_min)?;
    let pdb = build_pair_db(&sdb, tol.theta_max)?;
    println!(
        "{} catalog stars -> {} database stars -> {} pairs within {:.3} deg",
        records.len(),
        sdb.len(),
        pdb.len(),
        tol.theta_max.to_degrees()
    );
    println!("fingerprint {}", pdb.fingerprint().hash_hex());

    let file = std::env::temp_dir().join("starid-example-pairs.bin");
    write_pair_db(BufWriter::new(File::create(&file)?), &pdb)?;
    let back = read_pair_db(BufReader::new(File::open(&file)?))?;
    println!(
        "round trip through {}: {} bytes, identical = {}",
        file.display(),
        std::fs::metadata(&file)?.len(),
        back.entries() == pdb.entries()
    );
    std::fs::remove_file(&file)?;

    for theta_deg in [1.0f64, 5.0, 10.0] {
        let hits = back.query_pairs(theta_deg.to_radians(), tol.epsilon);
        print!(
            "pairs at {theta_deg:>4} deg ± {:.4} deg: {:>3}",
            tol.epsilon.to_degrees(),
            hits.len()
        );
        if let Some(e) = hits.first() {
            print!(
                "  e.g. {} - {} at {:.5} deg",
                e.id_a,
                e.id_b,
                e.theta.to_degrees()
            );
        }
        println!();
    }
    Ok(())
}
