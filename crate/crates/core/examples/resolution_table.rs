//! Angular resolution of a pinhole camera for a few fields of view and
//! sensor widths, with the equivalent position error in nautical miles.
//!
//! ```bash
//! cargo run --example resolution_table
//! ```

use starid::geometry::{fov_diagonal, max_angular_resolution, resolution_to_nautical_miles};

fn main() -> starid::Result<()> {
    let pixels = [512, 1024, 2048, 4096];
    print!("{:>8}", "fov");
    for u in pixels {
        print!("{:>14}", format!("{u} px [nm]"));
    }
    println!("{:>12}", "diag [deg]");

    for fov_deg in [5.0f64, 10.0, 20.0, 40.0, 80.0] {
        let fov = fov_deg.to_radians();
        print!("{fov_deg:>7}°");
        for u in pixels {
            let theta = max_angular_resolution(fov, u)?;
            print!("{:>14.4}", resolution_to_nautical_miles(theta));
        }
        println!("{:>12.3}", fov_diagonal(fov).to_degrees());
    }
    Ok(())
}
