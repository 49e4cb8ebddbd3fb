//! Sampled invariants that cut across modules: stability witnesses, tree
//! estimates, operator-norm surrogates and the detailed-balance audit.

use pathgibbs::cluster;
use pathgibbs::configuration::{
    conditional_energy, pair_interaction_energy, select_anchor, total_energy, Configuration,
    MarkedPoint,
};
use pathgibbs::constants;
use pathgibbs::energy::Energy;
use pathgibbs::geom::SimBox;
use pathgibbs::ks::{
    ks_apply, ks_apply_terms, neumann_eval, KsParams, ProductWeight, SampleDomain, SigmaSampler,
    WeightFunction,
};
use pathgibbs::langevin::{simulate_mark, ConfiningPotential, LangevinSpec, MarkSampler, PathMark};
use pathgibbs::mc::McValue;
use pathgibbs::potential::{
    random_admissible_locations, stability_constant_bound, PathPairPotential, ScalarPotential,
    SelfPotential, TailPotential,
};
use pathgibbs::rngutil::stream_rng;
use pathgibbs::sampler::{
    birth_log_acceptance, death_log_acceptance, replace_log_acceptance, MoveMix, SamplerConfig,
};
use proptest::prelude::*;
use rand::Rng;

fn contact_lj() -> ScalarPotential {
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

fn pure_hard_core() -> PathPairPotential {
    PathPairPotential::new(ScalarPotential::pure_hard_core(1.0)).unwrap()
}

fn zero_cfg(xs: &[f64]) -> Configuration {
    Configuration::new(
        xs.iter()
            .map(|&x| MarkedPoint::with_zero_mark(vec![x], 4))
            .collect(),
    )
    .unwrap()
}

#[test]
fn range_property_exact_zero_on_10k_pairs() {
    let phi = PathPairPotential::new(contact_lj()).unwrap();
    let spec = LangevinSpec {
        dim: 1,
        potential: ConfiningPotential::Zero,
        n_steps: 8,
        delta: 0.5,
    };
    let mut rng = stream_rng(101, 0);
    for _ in 0..10_000 {
        let m1 = simulate_mark(&spec, &mut rng).unwrap();
        let m2 = simulate_mark(&spec, &mut rng).unwrap();
        let radius = phi.range_radius(m1.sup_norm(), m2.sup_norm());
        let gap: f64 = rng.gen_range(1e-9..3.0);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let a = MarkedPoint {
            x: vec![0.0],
            mark: m1,
        };
        let b = MarkedPoint {
            x: vec![sign * (radius + gap)],
            mark: m2,
        };
        assert_eq!(phi.pair_energy(&a, &b).unwrap(), Energy::Finite(0.0));
    }
}

#[test]
fn admissible_sum_lower_bound_1000_configs() {
    // sum_i phi_l(|y_i|) >= -2 B_phi on admissible (R-separated) points.
    let scalar = contact_lj();
    let b_phi = stability_constant_bound(&scalar, 1).unwrap();
    let mut rng = stream_rng(102, 0);
    for _ in 0..1000 {
        let pts = random_admissible_locations(8, 3.5, scalar.hard_core_r, 1, &mut rng);
        let sum: f64 = pts
            .iter()
            .map(|y| {
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                match scalar.eval(norm.max(scalar.hard_core_r)) {
                    Energy::Finite(v) => v,
                    Energy::Infinite => 0.0,
                }
            })
            .sum();
        assert!(
            sum >= -2.0 * b_phi - 1e-12,
            "sum {sum} < -2 B_phi = {}",
            -2.0 * b_phi
        );
    }
}

#[test]
fn stability_witness_and_anchor_bound_1000_configs() {
    let phi = PathPairPotential::new(contact_lj()).unwrap();
    let b_phi = stability_constant_bound(&contact_lj(), 1).unwrap();
    let mut rng = stream_rng(103, 0);
    let mut checked = 0;
    while checked < 1000 {
        let pts = random_admissible_locations(8, 5.0, 1.0, 1, &mut rng);
        if pts.is_empty() {
            continue;
        }
        let gamma = Configuration::new(
            pts.iter()
                .map(|x| MarkedPoint::with_zero_mark(x.clone(), 4))
                .collect(),
        )
        .unwrap();
        let e = pair_interaction_energy(&gamma, &phi).unwrap();
        let e = match e {
            Energy::Finite(v) => v,
            Energy::Infinite => continue,
        };
        let n = gamma.len() as f64;
        assert!(
            e >= -b_phi * n - 1e-12,
            "E_Phi = {e} < -B n = {}",
            -b_phi * n
        );
        // The anchor's conditional energy dominates the pair average.
        let anchor = select_anchor(&gamma, &phi).unwrap();
        let cond = conditional_energy(gamma.point(anchor), &gamma.without(anchor), &phi)
            .unwrap()
            .finite()
            .unwrap();
        assert!(cond >= 2.0 * e / n - 1e-12);
        assert!(cond >= -2.0 * b_phi - 1e-12);
        checked += 1;
    }
}

#[test]
fn conditional_energy_bound_on_admissible_environments() {
    let phi = PathPairPotential::new(contact_lj()).unwrap();
    let b_phi = stability_constant_bound(&contact_lj(), 1).unwrap();
    let mut rng = stream_rng(104, 0);
    let probe = MarkedPoint::with_zero_mark(vec![0.0], 4);
    let mut checked = 0;
    while checked < 1000 {
        let pts = random_admissible_locations(7, 4.0, 1.0, 1, &mut rng);
        let xi = Configuration::new(
            pts.iter()
                .map(|x| MarkedPoint::with_zero_mark(x.clone(), 4))
                .collect(),
        )
        .unwrap();
        if xi.contains(&probe) {
            continue;
        }
        match conditional_energy(&probe, &xi, &phi).unwrap() {
            Energy::Infinite => continue,
            Energy::Finite(v) => {
                assert!(v >= -2.0 * b_phi - 1e-12, "E(x|xi) = {v}");
                checked += 1;
            }
        }
    }
}

#[test]
fn ursell_bounded_by_single_point_tree_sum() {
    // |k(gamma)| <= e^{2 beta B |gamma|} sum_{T} prod |e^{-beta Phi} - 1|,
    // the right side being the single-point Q of the first point against
    // the rest.
    let phi = PathPairPotential::new(contact_lj()).unwrap();
    let beta = 1.0;
    let b_phi = stability_constant_bound(&contact_lj(), 1).unwrap();
    let mut rng = stream_rng(105, 0);
    for _ in 0..100 {
        let n = rng.gen_range(2..=5);
        let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..7.0)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        if xs.len() < 2 {
            continue;
        }
        let gamma = zero_cfg(&xs);
        let k = cluster::ursell_function(&gamma, &phi, beta).unwrap().value;
        let head = gamma.point(0).clone();
        let rest = gamma.without(0);
        // q_single's scale is e^{2 beta B (|xi|+1)} = e^{2 beta B |gamma|}.
        let bound = cluster::q_single(&head, &rest, &phi, beta, b_phi)
            .unwrap()
            .value;
        assert!(
            k.abs() <= bound * (1.0 + 1e-12) + 1e-12,
            "|k| = {} > {}",
            k.abs(),
            bound
        );
    }
}

#[test]
fn tree_integral_lemma_at_desk_scale() {
    // MC estimate of int Q({x}, {y_1..y_N}) sigma^N over a box stays below
    // e^{2 beta B (N+1)} C^{N-1} (N+1)^{N-1} C within 3 stderr.
    let phi = pure_hard_core();
    let beta = 1.0;
    let c_beta = 2.0f64; // exact for zero marks in d = 1
    let sim_box = SimBox::new(vec![-3.0], vec![3.0]).unwrap();
    let volume = sim_box.volume();
    let x = MarkedPoint::with_zero_mark(vec![0.0], 4);
    for n in 1..=4usize {
        let mut rng = stream_rng(106, n as u64);
        let mut samples = Vec::with_capacity(20_000);
        for _ in 0..20_000 {
            let ys: Configuration = (0..n)
                .map(|_| MarkedPoint::with_zero_mark(sim_box.sample_uniform(&mut rng), 4))
                .collect();
            let q = cluster::q_single(&x, &ys, &phi, beta, 0.0).unwrap().value;
            samples.push(q * volume.powi(n as i32));
        }
        let est = McValue::from_samples(&samples);
        let bound = c_beta.powi(n as i32 - 1) * ((n + 1) as f64).powi(n as i32 - 1) * c_beta;
        assert!(
            est.value <= bound + 3.0 * est.stderr,
            "N = {n}: {} > {bound} (se {})",
            est.value,
            est.stderr
        );
    }
}

#[test]
fn operator_norm_surrogate_below_f() {
    // On the extremal unit-norm sequence r_N = c_z^N, the measured ratio
    // |(K_z r)(args)| / c^{N+1} stays below f(z) plus MC slack.
    let phi = pure_hard_core();
    let c_beta = 2.0;
    let z_crit = constants::z_crit(c_beta, 0.0, 1.0, 2048, 1e-8)
        .unwrap()
        .z_crit;
    let z = 0.5 * z_crit;
    let cz = constants::c_z(z, c_beta, 0.0, 1.0).unwrap();
    let f = constants::ks_norm_bound(z, c_beta, 0.0, 1.0).unwrap();
    let r = ProductWeight(WeightFunction::Constant(cz));
    let sigma = SigmaSampler {
        domain: SampleDomain::FullSpace,
        marks: MarkSampler::Zero { dim: 1, n_steps: 4 },
        psi: SelfPotential::ZERO,
    };
    let p = KsParams {
        z,
        beta: 1.0,
        k_max: 4,
        budget: 4000,
    };
    let mut rng = stream_rng(107, 0);
    for args in [
        vec![MarkedPoint::with_zero_mark(vec![0.0], 4)],
        vec![
            MarkedPoint::with_zero_mark(vec![0.0], 4),
            MarkedPoint::with_zero_mark(vec![1.4], 4),
        ],
        vec![
            MarkedPoint::with_zero_mark(vec![0.0], 4),
            MarkedPoint::with_zero_mark(vec![1.2], 4),
            MarkedPoint::with_zero_mark(vec![2.6], 4),
        ],
    ] {
        let applied = ks_apply(&r, &args, &phi, &sigma, &p, &mut rng).unwrap();
        let denom = cz.powi(args.len() as i32);
        let ratio = applied.value.abs() / denom;
        let slack = 3.0 * applied.stderr / denom;
        assert!(
            ratio <= f + slack,
            "N+1 = {}: ratio {ratio} > f {f} + {slack}",
            args.len()
        );
    }
}

#[test]
fn series_terms_obey_geometric_envelope() {
    // Each k-term of (K_z r) on the unit-norm extremal sequence is bounded
    // by e^{2 beta B} c^N (z c C)^k / k!.
    let phi = pure_hard_core();
    let c_beta = 2.0;
    let z = 0.08;
    let cz = constants::c_z(z, c_beta, 0.0, 1.0).unwrap();
    let r = ProductWeight(WeightFunction::Constant(cz));
    let sigma = SigmaSampler {
        domain: SampleDomain::FullSpace,
        marks: MarkSampler::Zero { dim: 1, n_steps: 4 },
        psi: SelfPotential::ZERO,
    };
    let p = KsParams {
        z,
        beta: 1.0,
        k_max: 3,
        budget: 4000,
    };
    let mut rng = stream_rng(108, 0);
    let args = [
        MarkedPoint::with_zero_mark(vec![0.0], 4),
        MarkedPoint::with_zero_mark(vec![1.5], 4),
    ];
    let terms = ks_apply_terms(&r, &args, &phi, &sigma, &p, &mut rng).unwrap();
    assert_eq!(terms.len(), 4);
    let n = 1; // rest size
    let mut factorial = 1.0;
    for (k, term) in terms.iter().enumerate().skip(1) {
        factorial *= k as f64;
        let envelope = cz.powi(n) * (z * cz * c_beta).powi(k as i32) / factorial;
        // The pure hard core saturates the envelope exactly (C is the tube
        // volume), so leave room for the last bit.
        assert!(
            term.value.abs() <= envelope * (1.0 + 1e-12) + 3.0 * term.stderr,
            "k = {k}: |{}| > {envelope} + 3 * {}",
            term.value,
            term.stderr
        );
    }
}

#[test]
fn neumann_estimates_respect_ruelle_bound() {
    let phi = pure_hard_core();
    let c_beta = 2.0;
    let z_ru = constants::z_ruelle(c_beta, 0.0, 1.0);
    let z = 0.5 * z_ru;
    let cz = constants::c_z(z, c_beta, 0.0, 1.0).unwrap();
    let sigma = SigmaSampler {
        domain: SampleDomain::FullSpace,
        marks: MarkSampler::Zero { dim: 1, n_steps: 4 },
        psi: SelfPotential::ZERO,
    };
    let mut rng = stream_rng(109, 0);
    for args in [
        vec![MarkedPoint::with_zero_mark(vec![0.0], 4)],
        vec![
            MarkedPoint::with_zero_mark(vec![0.0], 4),
            MarkedPoint::with_zero_mark(vec![1.3], 4),
        ],
    ] {
        let est = neumann_eval(&args, &phi, &sigma, z, 1.0, 3, 512, &mut rng).unwrap();
        let bound = cz.powi(args.len() as i32);
        assert!(
            est.value <= bound + 3.0 * est.stderr,
            "rho_{} = {} > c_z^N = {bound}",
            args.len(),
            est.value
        );
    }
}

#[test]
fn neumann_output_symmetric_under_argument_swap() {
    let phi = pure_hard_core();
    let sigma = SigmaSampler {
        domain: SampleDomain::FullSpace,
        marks: MarkSampler::Zero { dim: 1, n_steps: 4 },
        psi: SelfPotential::ZERO,
    };
    let a = MarkedPoint::with_zero_mark(vec![0.0], 4);
    let b = MarkedPoint::with_zero_mark(vec![1.3], 4);
    let reps = 24;
    let eval_pair = |args: &[MarkedPoint], salt: u64| -> McValue {
        let runs: Vec<f64> = (0..reps)
            .map(|r| {
                let mut rng = stream_rng(110 + salt, r as u64);
                neumann_eval(args, &phi, &sigma, 0.06, 1.0, 3, 256, &mut rng)
                    .unwrap()
                    .value
            })
            .collect();
        McValue::from_samples(&runs)
    };
    let fwd = eval_pair(&[a.clone(), b.clone()], 0);
    let rev = eval_pair(&[b, a], 1);
    assert!(
        fwd.agrees_with(rev, 3.0),
        "rho_2(x, y) = {} +- {} vs rho_2(y, x) = {} +- {}",
        fwd.value,
        fwd.stderr,
        rev.value,
        rev.stderr
    );
}

#[test]
fn detailed_balance_audit_1000_pairs() {
    // The move acceptance ratios must equal the target-density ratio times
    // the proposal ratio, recomputed here through full-energy differences.
    let phi = PathPairPotential::new(contact_lj()).unwrap();
    let psi = SelfPotential::ZERO;
    let cfg = SamplerConfig {
        sim_box: SimBox::cube(1, 8.0).unwrap(),
        z: 0.4,
        beta: 0.7,
        moves: MoveMix::default(),
        n_sweeps: 1,
        burn_in: 0,
        thinning: 1,
        seed: 0,
        translate_step: 0.5,
    };
    let volume = cfg.sim_box.volume();
    let u_of = |gamma: &Configuration| -> Option<f64> {
        total_energy(gamma, &psi, &phi, cfg.beta).unwrap().finite()
    };
    let mut rng = stream_rng(111, 0);
    let mut audited = 0;
    while audited < 1000 {
        let pts = random_admissible_locations(4, 4.0, 1.0, 1, &mut rng);
        let gamma = Configuration::new(
            pts.iter()
                .map(|x| MarkedPoint::with_zero_mark(x.clone(), 4))
                .collect(),
        )
        .unwrap();
        let u_gamma = match u_of(&gamma) {
            Some(u) => u,
            None => continue,
        };
        let n = gamma.len() as f64;

        // Birth.
        let candidate = MarkedPoint::with_zero_mark(cfg.sim_box.sample_uniform(&mut rng), 4);
        let log_acc = birth_log_acceptance(&cfg, &phi, &psi, &gamma, &candidate).unwrap();
        let mut grown = gamma.clone();
        grown.push(candidate.clone());
        match u_of(&grown) {
            Some(u_grown) => {
                let oracle = (cfg.z * volume / (n + 1.0)).ln() - (u_grown - u_gamma);
                assert!(
                    (log_acc - oracle).abs() < 1e-12,
                    "birth: {log_acc} vs {oracle}"
                );
            }
            None => assert_eq!(log_acc, f64::NEG_INFINITY),
        }

        // Death.
        if !gamma.is_empty() {
            let i = rng.gen_range(0..gamma.len());
            let log_acc = death_log_acceptance(&cfg, &phi, &psi, &gamma, i).unwrap();
            let shrunk = gamma.without(i);
            let oracle = (n / (cfg.z * volume)).ln() - (u_of(&shrunk).unwrap() - u_gamma);
            assert!(
                (log_acc - oracle).abs() < 1e-12,
                "death: {log_acc} vs {oracle}"
            );
        }

        // Replacement (translation-style).
        if !gamma.is_empty() {
            let i = rng.gen_range(0..gamma.len());
            let replacement = MarkedPoint::with_zero_mark(cfg.sim_box.sample_uniform(&mut rng), 4);
            if !gamma.contains(&replacement) {
                let log_acc =
                    replace_log_acceptance(&cfg, &phi, &psi, &gamma, i, &replacement).unwrap();
                let mut replaced = gamma.without(i);
                replaced.push(replacement);
                match u_of(&replaced) {
                    Some(u_new) => {
                        let oracle = -(u_new - u_gamma);
                        assert!(
                            (log_acc - oracle).abs() < 1e-12,
                            "replace: {log_acc} vs {oracle}"
                        );
                    }
                    None => assert_eq!(log_acc, f64::NEG_INFINITY),
                }
            }
        }
        audited += 1;
    }
}

#[test]
fn chain_correlations_satisfy_ks_equation() {
    // Correlation functions read off the sampler through the insertion
    // representation must solve the finite-volume fixed-point equation
    // within Monte Carlo error.
    let phi = pure_hard_core();
    let psi = SelfPotential::ZERO;
    let sim_box = SimBox::new(vec![0.0], vec![4.0]).unwrap();
    let z = 0.08;
    let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
    let cfg = SamplerConfig {
        sim_box: sim_box.clone(),
        z,
        beta: 1.0,
        moves: MoveMix::default(),
        n_sweeps: 200_000,
        burn_in: 20_000,
        thinning: 4,
        seed: 113,
        translate_step: 0.5,
    };
    let (samples, _) = pathgibbs::sampler::mcmc_run(&cfg, &phi, &psi, &marks).unwrap();
    let chain = pathgibbs::sampler::ChainCorrelations {
        samples: &samples,
        phi: &phi,
        beta: 1.0,
    };
    let sigma = SigmaSampler {
        domain: SampleDomain::Box(sim_box),
        marks,
        psi,
    };
    let p = KsParams {
        z,
        beta: 1.0,
        k_max: 3,
        budget: 3000,
    };
    let mut rng = stream_rng(114, 0);
    for args in [
        vec![MarkedPoint::with_zero_mark(vec![2.0], 4)],
        vec![
            MarkedPoint::with_zero_mark(vec![1.2], 4),
            MarkedPoint::with_zero_mark(vec![2.7], 4),
        ],
    ] {
        let res = pathgibbs::ks::ks_residual(&chain, &args, &phi, &sigma, &p, &mut rng).unwrap();
        assert!(
            res.value.abs() <= 3.0 * res.stderr.max(1e-12),
            "N = {}: residual {} +- {}",
            args.len(),
            res.value,
            res.stderr
        );
    }
}

#[test]
fn neumann_norm_below_geometric_series_bound() {
    // ||r_J||_{c_z} for the truncated fixed point stays below the geometric
    // series bound 1/(1 - f(z)); the sampled-tuple estimate is a lower
    // bound of the true norm, so the comparison is meaningful as stated.
    let phi = pure_hard_core();
    let c_beta = 2.0;
    let z_crit = constants::z_crit(c_beta, 0.0, 1.0, 2048, 1e-8)
        .unwrap()
        .z_crit;
    let z = 0.5 * z_crit;
    let f = constants::ks_norm_bound(z, c_beta, 0.0, 1.0).unwrap();
    let cz = constants::c_z(z, c_beta, 0.0, 1.0).unwrap();
    let sigma = SigmaSampler {
        domain: SampleDomain::FullSpace,
        marks: MarkSampler::Zero { dim: 1, n_steps: 4 },
        psi: SelfPotential::ZERO,
    };
    let solver = pathgibbs::ks::NeumannSolver::new(&phi, &sigma, z, 1.0, 3, 96);
    let corr = pathgibbs::ks::NeumannCorrelations { solver };
    let mut rng = stream_rng(115, 0);
    let norm = pathgibbs::ks::banach_norm_estimate(
        &corr,
        &WeightFunction::Constant(cz),
        &sigma,
        &phi,
        6,
        3,
        &mut rng,
    )
    .unwrap();
    let bound = 1.0 / (1.0 - f);
    assert!(
        norm <= bound + 0.05,
        "norm estimate {norm} > 1/(1 - f) = {bound}"
    );
}

#[test]
fn intensity_first_order_expansion_at_small_z() {
    // rho_1_avg = 1 - z * (tube volume) + O(z^2) for the hard-core gas; the
    // boundary-clipped tube makes the linear coefficient smaller, so the
    // first-order value is a lower bound up to O(z^2).
    let phi = pure_hard_core();
    let psi = SelfPotential::ZERO;
    let sim_box = SimBox::new(vec![0.0], vec![6.0]).unwrap();
    let z = 0.02;
    let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
    let cfg = SamplerConfig {
        sim_box: sim_box.clone(),
        z,
        beta: 1.0,
        moves: MoveMix::default(),
        n_sweeps: 300_000,
        burn_in: 20_000,
        thinning: 4,
        seed: 116,
        translate_step: 0.5,
    };
    let (samples, _) = pathgibbs::sampler::mcmc_run(&cfg, &phi, &psi, &marks).unwrap();
    let sigma_l = pathgibbs::sampler::sigma_volume(&sim_box, &psi, &marks, 100, 1).unwrap();
    let rho = pathgibbs::sampler::estimate_intensity(&samples, z, sigma_l).unwrap();
    let tube = 2.0; // 2R in d = 1
    assert!(
        rho.value < 1.0,
        "hard core must depress the intensity, got {}",
        rho.value
    );
    assert!(
        rho.value >= 1.0 - z * tube - 3.0 * rho.stderr,
        "rho {} below the first-order floor {}",
        rho.value,
        1.0 - z * tube
    );
}

#[test]
fn marked_oracle_cross_checks_the_sampler() {
    // The MC-marks partition oracle and the chain must agree on the
    // averaged intensity of hard-core paths in d = 1.
    let phi = pure_hard_core();
    let psi = SelfPotential::ZERO;
    let sim_box = SimBox::new(vec![0.0], vec![4.0]).unwrap();
    let z = 0.05;
    let marks = MarkSampler::Langevin(LangevinSpec {
        dim: 1,
        potential: ConfiningPotential::power(3.0),
        n_steps: 8,
        delta: 0.5,
    });
    let (oracle, spread) = pathgibbs::sampler::partition_oracle_marked(
        &sim_box, z, 1.0, &phi, &psi, 2, 400, 2.0, 2e-3, &marks, 48, 121,
    )
    .unwrap();
    assert!(!oracle.flagged, "truncation tail {}", oracle.tail_fraction);
    // Replicate spread plus the N_cut = 2 truncation allowance.
    let oracle_rho = McValue {
        value: oracle.rho_avg,
        stderr: spread + 2e-3,
    };

    let cfg = SamplerConfig {
        sim_box: sim_box.clone(),
        z,
        beta: 1.0,
        moves: MoveMix::default(),
        n_sweeps: 240_000,
        burn_in: 24_000,
        thinning: 4,
        seed: 122,
        translate_step: 0.5,
    };
    let (samples, _) = pathgibbs::sampler::mcmc_run(&cfg, &phi, &psi, &marks).unwrap();
    let sigma_l = pathgibbs::sampler::sigma_volume(&sim_box, &psi, &marks, 4000, 123).unwrap();
    let mcmc_rho = pathgibbs::sampler::estimate_intensity(&samples, z, sigma_l).unwrap();
    assert!(
        oracle_rho.agrees_with(mcmc_rho, 3.0),
        "oracle {} +- {} vs sampler {} +- {}",
        oracle_rho.value,
        oracle_rho.stderr,
        mcmc_rho.value,
        mcmc_rho.stderr
    );
}

#[test]
fn multi_chain_runs_are_deterministic_and_merge() {
    let phi = pure_hard_core();
    let psi = SelfPotential::ZERO;
    let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
    let cfg = SamplerConfig {
        sim_box: SimBox::cube(1, 6.0).unwrap(),
        z: 0.2,
        beta: 1.0,
        moves: MoveMix::default(),
        n_sweeps: 40_000,
        burn_in: 4_000,
        thinning: 4,
        seed: 117,
        translate_step: 0.5,
    };
    let runs_a = pathgibbs::sampler::mcmc_run_chains(&cfg, &phi, &psi, &marks, 4).unwrap();
    let runs_b = pathgibbs::sampler::mcmc_run_chains(&cfg, &phi, &psi, &marks, 4).unwrap();
    for ((sa, _), (sb, _)) in runs_a.iter().zip(&runs_b) {
        assert_eq!(sa, sb, "chains must not depend on scheduling");
    }
    // Chains are genuinely distinct, and the merged estimate is consistent
    // with each chain's own.
    assert_ne!(runs_a[0].0, runs_a[1].0);
    let merged: Vec<_> = runs_a.iter().flat_map(|(s, _)| s.iter().cloned()).collect();
    let sigma_l = pathgibbs::sampler::sigma_volume(&cfg.sim_box, &psi, &marks, 100, 1).unwrap();
    let merged_rho = pathgibbs::sampler::estimate_intensity(&merged, cfg.z, sigma_l).unwrap();
    let first_rho = pathgibbs::sampler::estimate_intensity(&runs_a[0].0, cfg.z, sigma_l).unwrap();
    assert!(merged_rho.agrees_with(first_rho, 4.0));
    assert!(merged_rho.stderr < first_rho.stderr);
}

#[test]
fn weighted_norm_wiring_from_weighted_constants() {
    // Example-4 wiring: a(x, m) = A (1 + ||m||^{d+delta}) with A from the
    // weighted-constants computation and b == 2 B_Phi.
    let phi = PathPairPotential::new(contact_lj()).unwrap();
    let psi = SelfPotential::ZERO;
    let b_phi = stability_constant_bound(&contact_lj(), 1).unwrap();
    let bbar = 2.0 * b_phi;
    let m_phi = 2.0; // tail maximum at contact: a/R^12 - b/R^6
    let marks = MarkSampler::Langevin(LangevinSpec {
        dim: 1,
        potential: ConfiningPotential::power(3.0),
        n_steps: 16,
        delta: 0.5,
    });
    let w = constants::weighted_constants(
        &phi, &psi, 1, 0.5, 1.0, b_phi, bbar, m_phi, &marks, 4000, 118,
    )
    .unwrap();
    assert!(w.a >= bbar);
    // Langevin marks put mass on ||m|| > 0, so upsilon exceeds the zero-mark
    // value e^A strictly.
    assert!(w.upsilon.value > w.a.exp());
    assert_eq!(w.flagged, 0);
    assert!(w.z_crit_weighted > 0.0 && w.z_crit_weighted.is_finite());

    let weight = WeightFunction::Weighted {
        a: w.a,
        b: 2.0 * b_phi,
        d: 1,
        delta: 0.5,
    };
    let sigma = SigmaSampler {
        domain: SampleDomain::FullSpace,
        marks,
        psi,
    };
    let mut rng = stream_rng(119, 0);
    // c(x) = e^{a + b} >= 1 pointwise, so the ideal-gas sequence has
    // weighted norm at most 1.
    let norm = pathgibbs::ks::banach_norm_estimate(
        &pathgibbs::ks::IdealGas,
        &weight,
        &sigma,
        &phi,
        8,
        3,
        &mut rng,
    )
    .unwrap();
    assert!(
        norm <= 1.0 + 1e-12,
        "weighted norm of the ideal gas is {norm}"
    );
}

#[test]
fn residual_shrinks_with_iteration_depth() {
    // The fixed-point residual of the depth-J evaluator is K applied to the
    // step r_{J-1} - r_J, so it contracts with J.
    let phi = pure_hard_core();
    let sigma = SigmaSampler {
        domain: SampleDomain::FullSpace,
        marks: MarkSampler::Zero { dim: 1, n_steps: 4 },
        psi: SelfPotential::ZERO,
    };
    let z = 0.06;
    let args = [MarkedPoint::with_zero_mark(vec![0.0], 4)];
    let reps = 8;
    let residual_at = |depth: usize| -> McValue {
        let runs: Vec<f64> = (0..reps)
            .map(|r| {
                let mut rng = stream_rng(120 + depth as u64, r as u64);
                let solver = pathgibbs::ks::NeumannSolver::new(&phi, &sigma, z, 1.0, depth, 192);
                let corr = pathgibbs::ks::NeumannCorrelations { solver };
                let p = KsParams {
                    z,
                    beta: 1.0,
                    k_max: 3,
                    budget: 192,
                };
                pathgibbs::ks::ks_residual(&corr, &args, &phi, &sigma, &p, &mut rng)
                    .unwrap()
                    .value
            })
            .collect();
        McValue::from_samples(&runs)
    };
    let shallow = residual_at(1);
    let deep = residual_at(2);
    let noise = 3.0 * (shallow.stderr + deep.stderr);
    assert!(
        deep.value.abs() <= 0.5 * shallow.value.abs() + noise,
        "depth 2 residual {} +- {} vs depth 1 residual {} +- {}",
        deep.value,
        deep.stderr,
        shallow.value,
        shallow.stderr
    );
}

#[test]
fn self_potential_lower_bound_on_samples() {
    let psi = SelfPotential {
        kind: pathgibbs::potential::SelfKind::MarkPower {
            coeff: -0.4,
            exponent: 1.5,
        },
        a_psi: 0.4,
    };
    let spec = LangevinSpec::default_for_dim(1);
    let mut rng = stream_rng(112, 0);
    for _ in 0..500 {
        let p = MarkedPoint {
            x: vec![0.0],
            mark: simulate_mark(&spec, &mut rng).unwrap(),
        };
        assert!(psi.lower_bound_ok(&p, 1, 0.5));
    }
}

proptest! {
    #[test]
    fn prop_basic_inequality(x in -10.0f64..10.0) {
        prop_assert!(cluster::basic_inequality_holds(Energy::Finite(x)));
    }

    #[test]
    fn prop_pair_energy_symmetric(x1 in -4.0f64..4.0, x2 in -4.0f64..4.0, seed in 0u64..1000) {
        let phi = PathPairPotential::new(contact_lj()).unwrap();
        let spec = LangevinSpec { dim: 1, potential: ConfiningPotential::Zero, n_steps: 8, delta: 0.5 };
        let mut rng = stream_rng(seed, 0);
        let a = MarkedPoint { x: vec![x1], mark: simulate_mark(&spec, &mut rng).unwrap() };
        let b = MarkedPoint { x: vec![x2], mark: simulate_mark(&spec, &mut rng).unwrap() };
        prop_assert_eq!(phi.pair_energy(&a, &b).unwrap(), phi.pair_energy(&b, &a).unwrap());
    }

    #[test]
    fn prop_configuration_csv_round_trip(xs in proptest::collection::vec(-50.0f64..50.0, 1..6), seed in 0u64..1000) {
        let spec = LangevinSpec::default_for_dim(1);
        let mut rng = stream_rng(seed, 1);
        let mut points = Vec::new();
        for (i, x) in xs.iter().enumerate() {
            points.push(MarkedPoint {
                x: vec![x + i as f64 * 200.0],
                mark: simulate_mark(&spec, &mut rng).unwrap(),
            });
        }
        let gamma = Configuration::new(points).unwrap();
        let mut buf = Vec::new();
        pathgibbs::csvio::write_configuration(&mut buf, &gamma).unwrap();
        let back = pathgibbs::csvio::read_configuration(std::io::Cursor::new(&buf)).unwrap();
        prop_assert_eq!(gamma, back);
    }

    #[test]
    fn prop_mark_sup_norm_consistent(seed in 0u64..2000) {
        let spec = LangevinSpec { dim: 2, potential: ConfiningPotential::power(4.0), n_steps: 16, delta: 0.5 };
        let mut rng = stream_rng(seed, 2);
        let mark: PathMark = simulate_mark(&spec, &mut rng).unwrap();
        prop_assert!((mark.sup_norm() - mark.recompute_sup_norm()).abs() == 0.0);
    }
}

#[test]
fn marks_widen_the_exclusion_tube() {
    // Path marks enlarge the collision region of the hard core, so the
    // marked intensity sits strictly below the zero-mark one.
    let phi = pure_hard_core();
    let psi = SelfPotential::ZERO;
    let sim_box = SimBox::new(vec![0.0], vec![4.0]).unwrap();
    let z = 0.05;
    let marks = MarkSampler::Langevin(LangevinSpec {
        dim: 1,
        potential: ConfiningPotential::power(3.0),
        n_steps: 8,
        delta: 0.5,
    });
    let (marked, spread) = pathgibbs::sampler::partition_oracle_marked(
        &sim_box, z, 1.0, &phi, &psi, 2, 400, 2.0, 2e-3, &marks, 48, 121,
    )
    .unwrap();
    let zero_marks = MarkSampler::Zero { dim: 1, n_steps: 8 };
    let (plain, _) = pathgibbs::sampler::partition_oracle_marked(
        &sim_box,
        z,
        1.0,
        &phi,
        &psi,
        2,
        400,
        2.0,
        2e-3,
        &zero_marks,
        2,
        1,
    )
    .unwrap();
    assert!(
        marked.rho_avg + 3.0 * spread < plain.rho_avg,
        "marked {} vs zero-mark {}",
        marked.rho_avg,
        plain.rho_avg
    );
}
