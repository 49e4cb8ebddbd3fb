//! Activity thresholds: z_Ru, the bound constant c_z, the contraction
//! curve f(z) and its first up-crossing z_crit, for the two canonical
//! parameter sets.
//!
//! ```text
//! cargo run --example thresholds
//! ```

use pathgibbs::constants::{c_z, ks_norm_bound, uniform_rb_threshold, z_crit, z_ruelle};

fn main() -> pathgibbs::Result<()> {
    for (b, label) in [(0.0, "repulsive (B = 0)"), (1.0, "stable (B = 1)")] {
        let (beta, c) = (1.0, 1.0);
        let z_ru = z_ruelle(c, b, beta);
        let report = z_crit(c, b, beta, 2048, 1e-8)?;
        println!("--- {label}, beta = {beta}, C = {c} ---");
        println!("z_Ru   = {z_ru:.6}");
        println!(
            "z_crit = {:.6}  (first up-crossing of f = 1)",
            report.z_crit
        );
        if b > 0.0 {
            println!(
                "uniform-Ruelle-bound threshold = {:.6}",
                uniform_rb_threshold(c, b, beta)
            );
        }
        println!("  z        c_z      f(z)");
        for frac in [0.0, 0.2, 0.5, 0.8, 0.95] {
            let z = frac * z_ru * 0.999;
            println!(
                "  {z:<8.5} {:<8.4} {:<8.4}",
                c_z(z, c, b, beta)?,
                ks_norm_bound(z, c, b, beta)?
            );
        }
        for note in &report.notes {
            println!("note: {note}");
        }
        println!();
    }
    Ok(())
}
