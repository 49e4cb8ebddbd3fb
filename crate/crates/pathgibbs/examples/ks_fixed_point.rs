//! The Kirkwood-Salsburg fixed point: the ideal gas is exact at every
//! depth, and the hard-core correlation converges geometrically below the
//! contraction threshold.
//!
//! ```text
//! cargo run --example ks_fixed_point
//! ```

use pathgibbs::configuration::MarkedPoint;
use pathgibbs::constants::{ks_norm_bound, z_crit};
use pathgibbs::ks::{ks_residual, neumann_eval, IdealGas, KsParams, SampleDomain, SigmaSampler};
use pathgibbs::langevin::MarkSampler;
use pathgibbs::potential::{PathPairPotential, ScalarPotential, SelfPotential, TailPotential};
use pathgibbs::rngutil::stream_rng;

fn main() -> pathgibbs::Result<()> {
    let zero_sigma = SigmaSampler {
        domain: SampleDomain::FullSpace,
        marks: MarkSampler::Zero { dim: 1, n_steps: 4 },
        psi: SelfPotential::ZERO,
    };

    // Ideal gas: rho == 1 solves the equations with residual exactly zero.
    let free = PathPairPotential::new(ScalarPotential {
        hard_core_r: 0.0,
        tail: TailPotential::None,
        a0: 1.0,
    })?;
    let args = [
        MarkedPoint::with_zero_mark(vec![0.0], 4),
        MarkedPoint::with_zero_mark(vec![1.0], 4),
    ];
    let p = KsParams {
        z: 0.5,
        beta: 1.0,
        k_max: 3,
        budget: 32,
    };
    let mut rng = stream_rng(11, 0);
    let res = ks_residual(&IdealGas, &args, &free, &zero_sigma, &p, &mut rng)?;
    println!(
        "ideal gas residual at a 2-tuple: {} +- {} (exact zero)",
        res.value, res.stderr
    );

    // Pure hard core in d = 1 (zero marks): C = 2R exactly.
    let phi = PathPairPotential::new(ScalarPotential::pure_hard_core(1.0))?;
    let c_beta = 2.0;
    let crit = z_crit(c_beta, 0.0, 1.0, 2048, 1e-8)?.z_crit;
    let z = crit / 2.0;
    println!(
        "\nhard core: z_crit = {crit:.5}, evaluating at z = {z:.5} (f(z) = {:.4})",
        ks_norm_bound(z, c_beta, 0.0, 1.0)?
    );
    let probe = [MarkedPoint::with_zero_mark(vec![0.0], 4)];
    for depth in 1..=4 {
        let mut rng = stream_rng(11, depth as u64);
        let est = neumann_eval(&probe, &phi, &zero_sigma, z, 1.0, depth, 512, &mut rng)?;
        println!(
            "  depth {depth}: rho_1(0) = {:.5} +- {:.5}",
            est.value, est.stderr
        );
    }
    println!(
        "  first-order expansion for comparison: 1 - 2 R z = {:.5}",
        1.0 - 2.0 * z
    );
    Ok(())
}
