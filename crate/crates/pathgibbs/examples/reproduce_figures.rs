//! Emit the potential-profile and contraction-curve data sets (the same
//! artifacts as `pathgibbs reproduce-figures`) into a directory.
//!
//! ```text
//! cargo run --example reproduce_figures -- out/figures
//! ```

use std::path::PathBuf;

fn main() -> pathgibbs::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("pathgibbs_figures"));
    let files = pathgibbs::report::reproduce_figures(&out)?;
    println!("wrote:");
    for f in &files {
        println!("  {}", f.display());
    }
    Ok(())
}
