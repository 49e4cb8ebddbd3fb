//! Figure data and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::constants::{z_crit, CurvePoint};
use crate::csvio::{fmt_f64, sha256_hex, write_table};
use crate::energy::Energy;
use crate::error::Result;
use crate::potential::{ScalarPotential, TailPotential};
use crate::runconfig::RunConfig;

/// The shifted Lennard-Jones profile with hard core 1 and sensitivity
/// radius 2.5: `16 ((1.5/(u-1))^12 - (1.5/(u-1))^6)`.
pub fn shifted_lj_profile() -> ScalarPotential {
    let c6 = 1.5f64.powi(6);
    ScalarPotential {
        hard_core_r: 1.0,
        tail: TailPotential::LennardJones {
            a: 16.0 * c6 * c6,
            b: 16.0 * c6,
            shifted: true,
        },
        a0: 2.5,
    }
}

/// Hard core plus an unshifted Lennard-Jones tail that is finite at contact
/// (its maximum), hence integrable.
pub fn contact_lj_profile() -> ScalarPotential {
    ScalarPotential {
        hard_core_r: 1.0,
        tail: TailPotential::LennardJones {
            a: 4.0,
            b: 2.0,
            shifted: false,
        },
        a0: 2.5,
    }
}

fn profile_rows(p: &ScalarPotential, lo: f64, hi: f64, n: usize) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|k| {
            let u = lo + (hi - lo) * k as f64 / n as f64;
            let v = match p.eval(u) {
                Energy::Finite(v) => v,
                Energy::Infinite => f64::INFINITY,
            };
            vec![u, v]
        })
        .collect()
}

fn curve_rows(curve: &[CurvePoint]) -> Vec<Vec<f64>> {
    curve.iter().map(|c| vec![c.z, c.c_z, c.f]).collect()
}

/// Write the four figure-data CSVs plus a threshold summary; returns the
/// emitted paths.
pub fn reproduce_figures(out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut files = Vec::new();

    let shifted = profile_rows(&shifted_lj_profile(), 1.02, 6.0, 498);
    let path = out.join("figure2_shifted_lj.csv");
    write_table(&mut fs::File::create(&path)?, &["u", "phi"], &shifted)?;
    files.push(path);

    let contact = profile_rows(&contact_lj_profile(), 1.0, 6.0, 500);
    let path = out.join("figure3_hard_core_lj.csv");
    write_table(&mut fs::File::create(&path)?, &["u", "phi"], &contact)?;
    files.push(path);

    let repulsive = z_crit(1.0, 0.0, 1.0, 2048, 1e-8)?;
    let path = out.join("figure4_contraction_repulsive.csv");
    write_table(
        &mut fs::File::create(&path)?,
        &["z", "c_z", "f"],
        &curve_rows(&repulsive.curve),
    )?;
    files.push(path);

    let stable = z_crit(1.0, 1.0, 1.0, 2048, 1e-8)?;
    let path = out.join("figure5_contraction_stable.csv");
    write_table(
        &mut fs::File::create(&path)?,
        &["z", "c_z", "f"],
        &curve_rows(&stable.curve),
    )?;
    files.push(path);

    let path = out.join("thresholds_summary.csv");
    write_table(
        &mut fs::File::create(&path)?,
        &["beta", "B_phi", "C_beta", "z_ru", "z_crit"],
        &[
            vec![1.0, 0.0, 1.0, repulsive.z_ru, repulsive.z_crit],
            vec![1.0, 1.0, 1.0, stable.z_ru, stable.z_crit],
        ],
    )?;
    files.push(path);

    let path = out.join("thresholds_notes.txt");
    let mut w = fs::File::create(&path)?;
    writeln!(
        w,
        "divergence: f explodes as z -> z_ru (repulsive set: z_ru = {})",
        fmt_f64(repulsive.z_ru)
    )?;
    writeln!(
        w,
        "divergence: f explodes as z -> z_ru (stable set:    z_ru = {})",
        fmt_f64(stable.z_ru)
    )?;
    for note in repulsive.notes.iter().chain(stable.notes.iter()) {
        writeln!(w, "note: {note}")?;
    }
    files.push(path);

    Ok(files)
}

/// Write `manifest.txt`: artifact version, seed, the resolved config and a
/// SHA-256 checksum per emitted file. Identical runs give identical
/// manifests.
pub fn run_manifest(out: &Path, cfg: &RunConfig, files: &[PathBuf]) -> Result<PathBuf> {
    fs::create_dir_all(out)?;
    let path = out.join("manifest.txt");
    let mut w = fs::File::create(&path)?;
    writeln!(w, "artifact = pathgibbs {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "seed = {}", cfg.seed)?;
    writeln!(w, "[resolved config]")?;
    for line in cfg.serialize().lines() {
        writeln!(w, "  {line}")?;
    }
    writeln!(w, "[checksums]")?;
    for file in files {
        let bytes = fs::read(file)?;
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        writeln!(w, "  {name} = {}", sha256_hex(&bytes))?;
    }
    Ok(path)
}
