//! Parsing both catalog formats, including the rows that get skipped.
//!
//! ```bash
//! cargo run --example parse_catalog
//! ```

use std::io::Cursor;

use starid::catalog::{parse_catalog, CatalogFormat, ParseMode};

/// Places fields at their 1-based byte columns in a blank 197-byte record.
fn bsc5(hr: u32, ra: &str, dec: &str, vmag: &str) -> String {
    let mut line = vec![b' '; 197];
    let mut put =
        |col: usize, s: &str| line[col - 1..col - 1 + s.len()].copy_from_slice(s.as_bytes());
    put(1, &format!("{hr:>4}"));
    put(76, ra);
    put(84, dec);
    put(103, vmag);
    String::from_utf8(line).unwrap()
}

fn main() -> starid::Result<()> {
    let fixed = [
        bsc5(7001, "183656.3", "+384701", " 0.03"),
        bsc5(2491, "064508.9", "-164258", "-1.46"),
        // a dropped entry: HR number only
        bsc5(92, "", "", ""),
    ]
    .join("\n");
    let parsed = parse_catalog(
        Cursor::new(fixed),
        CatalogFormat::Bsc5Ascii,
        ParseMode::Lenient,
    )?;
    println!(
        "BSC5: {} stars, {} skipped",
        parsed.entries.len(),
        parsed.skipped
    );
    for e in &parsed.entries {
        println!(
            "  HR {:>4}  ra {:>9.5} deg  dec {:>9.5} deg  V {:>5.2}",
            e.id,
            e.ra.to_degrees(),
            e.dec.to_degrees(),
            e.vmag
        );
    }

    let csv = "id,ra_hours,dec_degrees,vmag\n\
               # Polaris\n\
               424,2.530301h,89.264109d,1.97\n\
               5340,14.261020,19.182410,-0.05\n\
               9999,,,\n\
               oops,1,2\n";
    let lenient = parse_catalog(Cursor::new(csv), CatalogFormat::Csv, ParseMode::Lenient)?;
    println!(
        "CSV: {} stars, {} skipped, {} malformed",
        lenient.entries.len(),
        lenient.skipped,
        lenient.malformed
    );
    match parse_catalog(Cursor::new(csv), CatalogFormat::Csv, ParseMode::Strict) {
        Ok(_) => println!("strict: accepted"),
        Err(e) => println!("strict: {e}"),
    }
    Ok(())
}
