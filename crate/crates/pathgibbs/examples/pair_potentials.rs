//! The scalar potentials and their lift to paths: hard core plus
//! Lennard-Jones tails, tail norms, and the packing stability constant.
//!
//! ```text
//! cargo run --example pair_potentials
//! ```

use pathgibbs::configuration::MarkedPoint;
use pathgibbs::langevin::{simulate_mark, LangevinSpec};
use pathgibbs::potential::{
    phi_tail_norm, stability_constant_bound, PathPairPotential, ScalarPotential, TailPotential,
};
use pathgibbs::rngutil::stream_rng;

fn main() -> pathgibbs::Result<()> {
    // Shifted tail: diverges at contact, always negative past a0 = 2.5.
    let c6 = 1.5f64.powi(6);
    let shifted = ScalarPotential {
        hard_core_r: 1.0,
        tail: TailPotential::LennardJones {
            a: 16.0 * c6 * c6,
            b: 16.0 * c6,
            shifted: true,
        },
        a0: 2.5,
    };
    // Unshifted tail: finite at contact, hence integrable.
    let contact = ScalarPotential {
        hard_core_r: 1.0,
        tail: TailPotential::LennardJones {
            a: 4.0,
            b: 2.0,
            shifted: false,
        },
        a0: 2.5,
    };

    println!("profile of the shifted tail (hard core at 1):");
    for u in [1.2, 1.5, 2.0, 2.5, 3.0, 4.0] {
        println!("  phi({u}) = {:?}", shifted.eval(u));
    }

    for (name, scalar) in [("shifted", &shifted), ("contact-finite", &contact)] {
        match phi_tail_norm(scalar, 1)? {
            pathgibbs::potential::TailNorm::Regular { value, .. } => {
                println!(
                    "{name}: tail norm = {value:.6} (regular; the uniqueness machinery applies)"
                )
            }
            pathgibbs::potential::TailNorm::NotRegular => {
                println!("{name}: tail norm diverges at the core edge (not regular)")
            }
        }
        if let Ok(b) = stability_constant_bound(scalar, 1) {
            println!("{name}: packing stability bound B_phi = {b:.4}");
        }
    }

    // Lift to paths: the interaction vanishes exactly out of range, is
    // +infinity on node-wise core overlap, and integrates the tail else.
    let phi = PathPairPotential::new(contact)?;
    let spec = LangevinSpec::default_for_dim(1);
    let mut rng = stream_rng(3, 0);
    let a = MarkedPoint {
        x: vec![0.0],
        mark: simulate_mark(&spec, &mut rng)?,
    };
    for x in [0.3, 1.2, 2.0, 3.5, 8.0] {
        let b = MarkedPoint {
            x: vec![x],
            mark: simulate_mark(&spec, &mut rng)?,
        };
        println!(
            "Phi((0, m1), ({x}, m2)) = {:?}   (range radius {:.3})",
            phi.pair_energy(&a, &b)?,
            phi.range_radius(a.mark.sup_norm(), b.mark.sup_norm())
        );
    }
    Ok(())
}
