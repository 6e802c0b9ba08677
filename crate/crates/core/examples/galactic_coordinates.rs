//! Equatorial to galactic conversion for a few bright stars, and which of
//! them lie in the Milky Way band used by the simulation.
//!
//! ```bash
//! cargo run --example galactic_coordinates
//! ```

use starid::catalog::{equatorial_to_galactic, hours_to_radians, NGP_DEC_DEG, NGP_RA_DEG};
use starid::montecarlo::MILKY_WAY_LAT_DEG;

fn main() -> starid::Result<()> {
    // name, RA hours, Dec degrees (J2000)
    let stars = [
        ("Sirius", 6.752_481, -16.716_116),
        ("Vega", 18.615_649, 38.783_689),
        ("Deneb", 20.690_532, 45.280_339),
        ("Polaris", 2.530_301, 89.264_109),
        ("Arcturus", 14.261_020, 19.182_410),
        ("Acrux", 12.443_311, -63.099_093),
    ];
    println!("{:<10}{:>10}{:>10}  band", "star", "l [deg]", "b [deg]");
    for (name, ra_h, dec_deg) in stars {
        let g = equatorial_to_galactic(hours_to_radians(ra_h), f64::to_radians(dec_deg))?;
        let in_band = g.lat.to_degrees().abs() <= MILKY_WAY_LAT_DEG;
        println!(
            "{name:<10}{:>10.3}{:>10.3}  {}",
            g.lon.to_degrees(),
            g.lat.to_degrees(),
            if in_band { "yes" } else { "" }
        );
    }

    let pole = equatorial_to_galactic(NGP_RA_DEG.to_radians(), NGP_DEC_DEG.to_radians())?;
    println!("north galactic pole: b = {:.9} deg", pole.lat.to_degrees());
    Ok(())
}
