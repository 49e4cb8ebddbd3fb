//! Three independent routes to the same number: the tiny-volume partition
//! oracle (nested quadrature), the Metropolis-Hastings sampler, and the
//! truncated Kirkwood-Salsburg fixed point, all computing the averaged
//! one-point correlation of the hard-core gas in a 1-d box.
//!
//! ```text
//! cargo run --release --example cross_validate
//! ```

use pathgibbs::configuration::MarkedPoint;
use pathgibbs::constants::z_crit;
use pathgibbs::geom::SimBox;
use pathgibbs::ks::{neumann_eval, SampleDomain, SigmaSampler};
use pathgibbs::langevin::MarkSampler;
use pathgibbs::potential::{PathPairPotential, ScalarPotential, SelfPotential};
use pathgibbs::rngutil::stream_rng;
use pathgibbs::sampler::{
    estimate_intensity, mcmc_run, partition_oracle, sigma_volume, MoveMix, SamplerConfig,
};

fn main() -> pathgibbs::Result<()> {
    let phi = PathPairPotential::new(ScalarPotential::pure_hard_core(1.0))?;
    let psi = SelfPotential::ZERO;
    let sim_box = SimBox::new(vec![0.0], vec![4.0])?;
    // Zero marks in d = 1 make the regularity constant the exact tube
    // volume 2R; work at half the critical activity.
    let z = z_crit(2.0, 0.0, 1.0, 2048, 1e-8)?.z_crit / 2.0;
    println!("hard rods in [0, 4], z = {z:.5}");

    let oracle = partition_oracle(&sim_box, z, 1.0, &phi, &psi, 4, 4096, 2.0, 1e-6)?;
    println!(
        "oracle (nested quadrature): rho_avg = {:.5}, Z = {:.6}, truncation tail {:.1e}",
        oracle.rho_avg, oracle.z_tilde, oracle.tail_fraction
    );

    let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
    let cfg = SamplerConfig {
        sim_box: sim_box.clone(),
        z,
        beta: 1.0,
        moves: MoveMix::default(),
        n_sweeps: 200_000,
        burn_in: 20_000,
        thinning: 4,
        seed: 17,
        translate_step: 0.5,
    };
    let (samples, _) = mcmc_run(&cfg, &phi, &psi, &marks)?;
    let sigma_l = sigma_volume(&sim_box, &psi, &marks, 100, 1)?;
    let mcmc = estimate_intensity(&samples, z, sigma_l)?;
    println!(
        "sampler:                    rho_avg = {:.5} +- {:.5}",
        mcmc.value, mcmc.stderr
    );

    let sigma = SigmaSampler {
        domain: SampleDomain::Box(sim_box),
        marks,
        psi,
    };
    let n_probes = 16;
    let mut total = 0.0;
    let mut var = 0.0;
    for i in 0..n_probes {
        let x = 4.0 * (i as f64 + 0.5) / n_probes as f64;
        let mut rng = stream_rng(18, i as u64);
        let est = neumann_eval(
            &[MarkedPoint::with_zero_mark(vec![x], 4)],
            &phi,
            &sigma,
            z,
            1.0,
            4,
            128,
            &mut rng,
        )?;
        total += est.value;
        var += est.stderr * est.stderr;
    }
    println!(
        "fixed point (depth 4):      rho_avg = {:.5} +- {:.5}",
        total / n_probes as f64,
        var.sqrt() / n_probes as f64
    );
    Ok(())
}
