//! Birth-death-move Metropolis-Hastings for the finite-volume Gibbs point
//! process, plus estimators and diagnostics.
//!
//! The target is the free-boundary finite-volume Gibbs measure: against the
//! marked Poisson reference of activity `z` on a box, the unnormalized
//! density of a configuration is
//!
//! ```text
//! w(gamma) = exp( - sum_i Psi(x_i) - beta * E_Phi(gamma) ),
//! ```
//!
//! i.e. the self potential weights the reference measure (`sigma = e^{-Psi}
//! lambda`) and the pair part enters through `e^{-beta E_Phi}`. Birth
//! proposals draw a location uniformly in the box and a mark from the mark
//! law, so the mark density cancels in the Hastings ratio:
//!
//! ```text
//! birth:  min(1, z |L| / (n+1) * e^{-beta E(y | gamma) - Psi(y)}),
//! death:  min(1, n / (z |L|) * e^{+beta E(x_i | rest) + Psi(x_i)}),
//! ```
//!
//! translations and mark redraws are symmetric-proposal moves on one point.
//! Hard-core violations give acceptance exactly zero, so stored states are
//! always admissible.
//!
//! Estimator normalization: intensities are densities with respect to
//! `z sigma`, i.e. `rho_1_avg = E|gamma| / (z sigma(L))`. References that
//! normalize with respect to the plain intensity measure differ by the
//! `e^{-Psi}` weight.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::configuration::{conditional_energy, Configuration, MarkedPoint};
use crate::energy::Energy;
use crate::error::{Error, Result};
use crate::geom::SimBox;
use crate::ks::Correlations;
use crate::langevin::MarkSampler;
use crate::mc::{autocorr_time, batch_means, McValue};
use crate::potential::{PathPairPotential, SelfPotential};
use crate::rngutil::stream_rng;

pub const BATCHES: usize = 32;

/// Move-mix probabilities; must sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveMix {
    pub birth: f64,
    pub death: f64,
    pub translate: f64,
    pub mark_resample: f64,
}

impl Default for MoveMix {
    fn default() -> MoveMix {
        MoveMix {
            birth: 0.35,
            death: 0.35,
            translate: 0.2,
            mark_resample: 0.1,
        }
    }
}

impl MoveMix {
    fn validate(&self) -> Result<()> {
        let parts = [self.birth, self.death, self.translate, self.mark_resample];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidSpec(
                "move probabilities must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "move probabilities sum to {sum}, not 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Birth,
    Death,
    Translate,
    MarkResample,
}

/// Sampler parameters.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub sim_box: SimBox,
    pub z: f64,
    pub beta: f64,
    pub moves: MoveMix,
    pub n_sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    /// Half-width of the uniform translation proposal.
    pub translate_step: f64,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        self.moves.validate()?;
        if !(self.z > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidSpec("need z > 0 and beta > 0".into()));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidSpec("thinning must be >= 1".into()));
        }
        if !(self.translate_step > 0.0) {
            return Err(Error::InvalidSpec("translate_step must be positive".into()));
        }
        Ok(())
    }
}

/// Per-move acceptance bookkeeping and basic chain statistics.
#[derive(Debug, Clone, Default)]
pub struct ChainSummary {
    pub kept: usize,
    pub proposed: [usize; 4],
    pub accepted: [usize; 4],
    pub mean_count: f64,
    pub autocorr_time_count: f64,
}

impl ChainSummary {
    pub fn acceptance_rate(&self, kind: MoveKind) -> f64 {
        let i = kind as usize;
        if self.proposed[i] == 0 {
            0.0
        } else {
            self.accepted[i] as f64 / self.proposed[i] as f64
        }
    }
}

/// Log of the uncapped birth Hastings ratio for inserting `candidate` into
/// `gamma`; `-inf` on a hard-core violation.
pub fn birth_log_acceptance(
    cfg: &SamplerConfig,
    phi: &PathPairPotential,
    psi: &SelfPotential,
    gamma: &Configuration,
    candidate: &MarkedPoint,
) -> Result<f64> {
    let n = gamma.len() as f64;
    let volume = cfg.sim_box.volume();
    match conditional_energy(candidate, gamma, phi)? {
        Energy::Infinite => Ok(f64::NEG_INFINITY),
        Energy::Finite(e) => {
            Ok((cfg.z * volume / (n + 1.0)).ln() - cfg.beta * e - psi.eval(candidate))
        }
    }
}

/// Log of the uncapped death Hastings ratio for removing point `index`.
pub fn death_log_acceptance(
    cfg: &SamplerConfig,
    phi: &PathPairPotential,
    psi: &SelfPotential,
    gamma: &Configuration,
    index: usize,
) -> Result<f64> {
    let n = gamma.len() as f64;
    let volume = cfg.sim_box.volume();
    let rest = gamma.without(index);
    let point = gamma.point(index);
    match conditional_energy(point, &rest, phi)? {
        Energy::Infinite => Ok(f64::INFINITY),
        Energy::Finite(e) => Ok((n / (cfg.z * volume)).ln() + cfg.beta * e + psi.eval(point)),
    }
}

/// Log of the uncapped single-point replacement ratio (translation or mark
/// redraw: symmetric proposals, so only the density ratio remains).
pub fn replace_log_acceptance(
    cfg: &SamplerConfig,
    phi: &PathPairPotential,
    psi: &SelfPotential,
    gamma: &Configuration,
    index: usize,
    replacement: &MarkedPoint,
) -> Result<f64> {
    let rest = gamma.without(index);
    let new_e = match conditional_energy(replacement, &rest, phi)? {
        Energy::Infinite => return Ok(f64::NEG_INFINITY),
        Energy::Finite(e) => e,
    };
    let old_e = match conditional_energy(gamma.point(index), &rest, phi)? {
        Energy::Infinite => return Ok(f64::INFINITY),
        Energy::Finite(e) => e,
    };
    Ok(-cfg.beta * (new_e - old_e) - (psi.eval(replacement) - psi.eval(gamma.point(index))))
}

/// Run one chain; returns the thinned kept configurations and a summary.
pub fn mcmc_run(
    cfg: &SamplerConfig,
    phi: &PathPairPotential,
    psi: &SelfPotential,
    marks: &MarkSampler,
) -> Result<(Vec<Configuration>, ChainSummary)> {
    cfg.validate()?;
    if marks.dim() != cfg.sim_box.dim() {
        return Err(Error::InvalidSpec(
            "mark sampler and box dimensions differ".into(),
        ));
    }
    let mut rng = stream_rng(cfg.seed, 0);
    let mut gamma = Configuration::empty();
    let mut kept = Vec::new();
    let mut counts = Vec::with_capacity(cfg.n_sweeps);
    let mut summary = ChainSummary::default();
    let total = cfg.burn_in + cfg.n_sweeps;
    for sweep in 0..total {
        let u: f64 = rng.gen();
        let kind = if u < cfg.moves.birth {
            MoveKind::Birth
        } else if u < cfg.moves.birth + cfg.moves.death {
            MoveKind::Death
        } else if u < cfg.moves.birth + cfg.moves.death + cfg.moves.translate {
            MoveKind::Translate
        } else {
            MoveKind::MarkResample
        };
        summary.proposed[kind as usize] += 1;
        match kind {
            MoveKind::Birth => {
                let candidate = MarkedPoint {
                    x: cfg.sim_box.sample_uniform(&mut rng),
                    mark: marks.sample(&mut rng)?,
                };
                let log_acc = birth_log_acceptance(cfg, phi, psi, &gamma, &candidate)?;
                if rng.gen::<f64>().ln() < log_acc {
                    gamma.push(candidate);
                    summary.accepted[kind as usize] += 1;
                }
            }
            MoveKind::Death => {
                if !gamma.is_empty() {
                    let i = rng.gen_range(0..gamma.len());
                    let log_acc = death_log_acceptance(cfg, phi, psi, &gamma, i)?;
                    if rng.gen::<f64>().ln() < log_acc {
                        gamma.remove(i);
                        summary.accepted[kind as usize] += 1;
                    }
                }
            }
            MoveKind::Translate => {
                if !gamma.is_empty() {
                    let i = rng.gen_range(0..gamma.len());
                    let old = gamma.point(i);
                    let x: Vec<f64> = old
                        .x
                        .iter()
                        .map(|v| v + rng.gen_range(-cfg.translate_step..cfg.translate_step))
                        .collect();
                    // Free boundary: leaving the box is rejected outright.
                    if cfg.sim_box.contains(&x) {
                        let candidate = MarkedPoint {
                            x,
                            mark: old.mark.clone(),
                        };
                        let log_acc = replace_log_acceptance(cfg, phi, psi, &gamma, i, &candidate)?;
                        if rng.gen::<f64>().ln() < log_acc {
                            gamma.remove(i);
                            gamma.push(candidate);
                            summary.accepted[kind as usize] += 1;
                        }
                    }
                }
            }
            MoveKind::MarkResample => {
                if !gamma.is_empty() {
                    let i = rng.gen_range(0..gamma.len());
                    let candidate = MarkedPoint {
                        x: gamma.point(i).x.clone(),
                        mark: marks.sample(&mut rng)?,
                    };
                    let log_acc = replace_log_acceptance(cfg, phi, psi, &gamma, i, &candidate)?;
                    if rng.gen::<f64>().ln() < log_acc {
                        gamma.remove(i);
                        gamma.push(candidate);
                        summary.accepted[kind as usize] += 1;
                    }
                }
            }
        }
        if sweep >= cfg.burn_in {
            counts.push(gamma.len() as f64);
            if (sweep - cfg.burn_in) % cfg.thinning == 0 {
                kept.push(gamma.clone());
            }
        }
    }
    summary.kept = kept.len();
    summary.mean_count = if counts.is_empty() {
        0.0
    } else {
        counts.iter().sum::<f64>() / counts.len() as f64
    };
    summary.autocorr_time_count = autocorr_time(&counts);
    Ok((kept, summary))
}

/// Run `n_chains` independent chains in parallel (one RNG stream each).
pub fn mcmc_run_chains(
    cfg: &SamplerConfig,
    phi: &PathPairPotential,
    psi: &SelfPotential,
    marks: &MarkSampler,
    n_chains: usize,
) -> Result<Vec<(Vec<Configuration>, ChainSummary)>> {
    (0..n_chains)
        .into_par_iter()
        .map(|c| {
            let mut chain_cfg = cfg.clone();
            chain_cfg.seed = cfg
                .seed
                .wrapping_add(c as u64)
                .wrapping_mul(0x9e3779b97f4a7c15)
                .max(1);
            mcmc_run(&chain_cfg, phi, psi, marks)
        })
        .collect()
}

/// `sigma(L) = int_L e^{-Psi} dx R(dm)`: exact `|L|` for a zero self
/// potential, Monte Carlo over the mark law otherwise.
pub fn sigma_volume(
    sim_box: &SimBox,
    psi: &SelfPotential,
    marks: &MarkSampler,
    n_mc: usize,
    seed: u64,
) -> Result<McValue> {
    if psi.is_zero() {
        return Ok(McValue::exact(sim_box.volume()));
    }
    let mut rng = stream_rng(seed, 0);
    let samples: Vec<f64> = (0..n_mc.max(100))
        .map(|_| -> Result<f64> {
            let mark = marks.sample(&mut rng)?;
            let x = sim_box.sample_uniform(&mut rng);
            Ok((-psi.eval(&MarkedPoint { x, mark })).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(McValue::from_samples(&samples).scale(sim_box.volume()))
}

/// Mark-and-space averaged one-point correlation,
/// `rho_1_avg = E|gamma| / (z sigma(L))`, with batch-means error.
pub fn estimate_intensity(samples: &[Configuration], z: f64, sigma_l: McValue) -> Result<McValue> {
    if samples.len() < 100 {
        return Err(Error::InvalidSpec(
            "estimate_intensity needs >= 100 kept samples".into(),
        ));
    }
    let counts: Vec<f64> = samples.iter().map(|g| g.len() as f64).collect();
    let mean = batch_means(&counts, BATCHES);
    let denom = z * sigma_l.value;
    let value = mean.value / denom;
    // First-order error propagation through the sigma(L) estimate.
    let rel = (mean.stderr / mean.value.max(1e-300)).hypot(sigma_l.stderr / sigma_l.value);
    Ok(McValue {
        value,
        stderr: value.abs() * rel,
    })
}

/// A bounded test function `f(x, gamma)` for the GNZ identity.
pub struct GnzTestFn {
    pub name: &'static str,
    pub f: Box<dyn Fn(&MarkedPoint, &Configuration) -> f64 + Sync>,
}

/// The shipped GNZ test suite: constants, an isolation indicator and a
/// capped neighbour count, all bounded and range-supported.
pub fn gnz_test_suite(scale: f64) -> Vec<GnzTestFn> {
    vec![
        GnzTestFn {
            name: "ones",
            f: Box::new(|_, _| 1.0),
        },
        GnzTestFn {
            name: "zero",
            f: Box::new(|_, _| 0.0),
        },
        GnzTestFn {
            name: "isolated",
            f: Box::new(move |x, gamma| {
                let isolated = gamma
                    .points()
                    .iter()
                    .all(|y| crate::geom::euclidean_distance(&x.x, &y.x) > 2.0 * scale);
                if isolated {
                    1.0
                } else {
                    0.0
                }
            }),
        },
        GnzTestFn {
            name: "capped_neighbours",
            f: Box::new(move |x, gamma| {
                let n = gamma
                    .points()
                    .iter()
                    .filter(|y| crate::geom::euclidean_distance(&x.x, &y.x) <= 2.5 * scale)
                    .count();
                (n.min(5) as f64) / 5.0
            }),
        },
    ]
}

/// Both sides of the GNZ identity for one test function.
#[derive(Debug, Clone, Copy)]
pub struct GnzReport {
    pub lhs: McValue,
    pub rhs: McValue,
    /// Batch-means estimate of `lhs - rhs` (computed per batch, so the
    /// correlation between the two sides is accounted for).
    pub residual: McValue,
}

/// Estimate `E[sum_{x in gamma} f(x, gamma \ x)]` against
/// `z int E[f(x, gamma) e^{-beta E(x|gamma)}] sigma(dx)` on the chain
/// samples; the right side inserts `insertions` test points per sample.
#[allow(clippy::too_many_arguments)]
pub fn gnz_residual(
    samples: &[Configuration],
    tests: &[GnzTestFn],
    z: f64,
    beta: f64,
    phi: &PathPairPotential,
    psi: &SelfPotential,
    marks: &MarkSampler,
    sim_box: &SimBox,
    insertions: usize,
    seed: u64,
) -> Result<Vec<GnzReport>> {
    if samples.is_empty() {
        return Err(Error::InvalidSpec(
            "gnz_residual needs chain samples".into(),
        ));
    }
    let volume = sim_box.volume();
    tests
        .iter()
        .enumerate()
        .map(|(t, test)| -> Result<GnzReport> {
            let mut rng = stream_rng(seed, t as u64);
            let mut lhs_series = Vec::with_capacity(samples.len());
            let mut rhs_series = Vec::with_capacity(samples.len());
            for gamma in samples {
                let mut lhs = 0.0;
                for i in 0..gamma.len() {
                    lhs += (test.f)(gamma.point(i), &gamma.without(i));
                }
                lhs_series.push(lhs);
                let mut rhs_acc = 0.0;
                for _ in 0..insertions.max(1) {
                    let y = MarkedPoint {
                        x: sim_box.sample_uniform(&mut rng),
                        mark: marks.sample(&mut rng)?,
                    };
                    let fv = (test.f)(&y, gamma);
                    if fv == 0.0 {
                        continue;
                    }
                    let boltz = conditional_energy(&y, gamma, phi)?.boltzmann(beta);
                    if boltz == 0.0 {
                        continue;
                    }
                    rhs_acc += fv * boltz * (-psi.eval(&y)).exp();
                }
                rhs_series.push(z * volume * rhs_acc / insertions.max(1) as f64);
            }
            let diff: Vec<f64> = lhs_series
                .iter()
                .zip(&rhs_series)
                .map(|(a, b)| a - b)
                .collect();
            Ok(GnzReport {
                lhs: batch_means(&lhs_series, BATCHES),
                rhs: batch_means(&rhs_series, BATCHES),
                residual: batch_means(&diff, BATCHES),
            })
        })
        .collect()
}

/// Correlation functions read off a chain through the insertion
/// representation `rho_N(args) = e^{-beta E_Phi(args)} E[e^{-beta E(args | gamma)}]`.
pub struct ChainCorrelations<'a> {
    pub samples: &'a [Configuration],
    pub phi: &'a PathPairPotential,
    pub beta: f64,
}

impl Correlations for ChainCorrelations<'_> {
    fn rho(&self, args: &[MarkedPoint], _rng: &mut ChaCha8Rng) -> Result<McValue> {
        if args.is_empty() {
            return Ok(McValue::exact(1.0));
        }
        let tuple = Configuration::new(args.to_vec())
            .map_err(|_| Error::InvalidSpec("correlation arguments must be distinct".into()))?;
        let prefactor = match crate::configuration::pair_interaction_energy(&tuple, self.phi)? {
            Energy::Infinite => return Ok(McValue::exact(0.0)),
            Energy::Finite(e) => (-self.beta * e).exp(),
        };
        let mut series = Vec::with_capacity(self.samples.len());
        for gamma in self.samples {
            let mut e = Energy::ZERO;
            for a in args {
                e = e + conditional_energy(a, gamma, self.phi)?;
                if e.is_infinite() {
                    break;
                }
            }
            series.push(e.boltzmann(self.beta));
        }
        Ok(batch_means(&series, BATCHES).scale(prefactor))
    }
}

/// Output of the tiny-volume brute-force oracle.
#[derive(Debug, Clone, Copy)]
pub struct PartitionOracle {
    /// The unnormalized series `sum_N z^N/N! I_N` (partition function of the
    /// sigma-weighted reference).
    pub z_tilde: f64,
    /// One-point correlation at the probe location (zero mark).
    pub rho_probe: f64,
    /// Mark-and-space averaged one-point correlation.
    pub rho_avg: f64,
    /// Mean number of points under the finite-volume Gibbs measure.
    pub mean_count: f64,
    /// Bound on the fraction of `z_tilde` missed by the truncation, from
    /// `I_{N+1} <= I_N |L| e^{-Psi}` (exact for nonnegative tails).
    pub tail_fraction: f64,
    /// Set when the truncation tail exceeds the tolerance.
    pub flagged: bool,
}

/// Direct nested-quadrature evaluation of the finite-volume partition
/// function and one-point correlation, in `d = 1` with marks frozen to
/// zero. This is the independent oracle the sampler and the fixed-point
/// solver are checked against.
///
/// Cost is `O(n_quad^N)` per term; per-term node counts shrink with `N`,
/// which the small activities of the oracle regime tolerate.
#[allow(clippy::too_many_arguments)]
pub fn partition_oracle(
    sim_box: &SimBox,
    z: f64,
    beta: f64,
    phi: &PathPairPotential,
    psi: &SelfPotential,
    n_cut: usize,
    n_quad: usize,
    probe: f64,
    tail_tol: f64,
) -> Result<PartitionOracle> {
    let n_steps = 2;
    let draw = |_rng: &mut ChaCha8Rng| Ok(crate::langevin::PathMark::zero(1, n_steps));
    let mut rng = stream_rng(0, 0);
    partition_terms(
        sim_box, z, beta, phi, psi, n_cut, n_quad, probe, tail_tol, &draw, &mut rng,
    )
}

/// The MC-marks variant of [`partition_oracle`]: each replicate draws one
/// mark per potential point from the mark law, runs the nested location
/// quadrature with those marks held fixed, and the replicates average to
/// the marked partition function. Returns the averaged oracle and the
/// standard error of `rho_avg` across replicates.
#[allow(clippy::too_many_arguments)]
pub fn partition_oracle_marked(
    sim_box: &SimBox,
    z: f64,
    beta: f64,
    phi: &PathPairPotential,
    psi: &SelfPotential,
    n_cut: usize,
    n_quad: usize,
    probe: f64,
    tail_tol: f64,
    marks: &MarkSampler,
    n_replicates: usize,
    seed: u64,
) -> Result<(PartitionOracle, f64)> {
    if marks.dim() != 1 {
        return Err(Error::InvalidSpec("the marked oracle runs in d = 1".into()));
    }
    if n_replicates == 0 {
        return Err(Error::InvalidSpec(
            "need at least one mark replicate".into(),
        ));
    }
    let replicates: Vec<PartitionOracle> = (0..n_replicates)
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let draw = |rng: &mut ChaCha8Rng| marks.sample(rng);
            partition_terms(
                sim_box, z, beta, phi, psi, n_cut, n_quad, probe, tail_tol, &draw, &mut rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    // Average the linear quantities (partition function, numerators), then
    // form the ratios.
    let m = n_replicates as f64;
    let z_tilde = replicates.iter().map(|o| o.z_tilde).sum::<f64>() / m;
    let z_probe = replicates
        .iter()
        .map(|o| o.rho_probe * o.z_tilde)
        .sum::<f64>()
        / m;
    let mean_num = replicates
        .iter()
        .map(|o| o.mean_count * o.z_tilde)
        .sum::<f64>()
        / m;
    let tail_fraction = replicates
        .iter()
        .map(|o| o.tail_fraction)
        .fold(0.0, f64::max);
    let sigma_l = sigma_volume(sim_box, psi, marks, 4096.max(n_replicates), seed ^ 0x5eed)?;
    let rho_avg = mean_num / z_tilde / (z * sigma_l.value);
    let rho_samples: Vec<f64> = replicates.iter().map(|o| o.rho_avg).collect();
    let spread = McValue::from_samples(&rho_samples);
    Ok((
        PartitionOracle {
            z_tilde,
            rho_probe: z_probe / z_tilde,
            rho_avg,
            mean_count: mean_num / z_tilde,
            tail_fraction,
            flagged: tail_fraction > tail_tol,
        },
        spread.stderr,
    ))
}

/// One nested-quadrature pass with a fixed mark per point slot, drawn by
/// `draw` (the zero-mark oracle passes a constant draw).
#[allow(clippy::too_many_arguments)]
fn partition_terms(
    sim_box: &SimBox,
    z: f64,
    beta: f64,
    phi: &PathPairPotential,
    psi: &SelfPotential,
    n_cut: usize,
    n_quad: usize,
    probe: f64,
    tail_tol: f64,
    draw: &dyn Fn(&mut ChaCha8Rng) -> Result<crate::langevin::PathMark>,
    rng: &mut ChaCha8Rng,
) -> Result<PartitionOracle> {
    if sim_box.dim() != 1 {
        return Err(Error::InvalidSpec("partition oracle runs in d = 1".into()));
    }
    if n_cut > 4 || n_cut == 0 {
        return Err(Error::InvalidSpec(
            "partition oracle supports 1 <= N_cut <= 4".into(),
        ));
    }
    let (lo, hi) = (sim_box.lo[0], sim_box.hi[0]);
    let length = hi - lo;
    if length > 4.0 * phi.scalar.hard_core_r && phi.scalar.hard_core_r > 0.0 {
        return Err(Error::InvalidSpec(
            "oracle box must satisfy |L| <= 4R".into(),
        ));
    }
    // One mark per point slot, held fixed through the location quadrature;
    // the slot points are mutated in place. The probe carries the zero mark
    // (the reported correlation is the one at a zero-mark point).
    let mut slots: Vec<MarkedPoint> = (0..n_cut)
        .map(|_| -> Result<MarkedPoint> {
            Ok(MarkedPoint {
                x: vec![lo],
                mark: draw(rng)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let probe_point = MarkedPoint {
        x: vec![probe],
        mark: crate::langevin::PathMark::zero(1, slots[0].mark.n_steps()),
    };
    let psi_weights: Vec<f64> = slots.iter().map(|p| (-psi.eval(p)).exp()).collect();

    let nodes_for = |n: usize| -> usize {
        match n {
            1 => n_quad,
            2 => n_quad.min(1024),
            3 => n_quad.min(160),
            _ => n_quad.min(48),
        }
    };
    // I_N = int_{L^N} e^{-beta E_Phi} prod e^{-Psi} dx by midpoint rule;
    // J_N is the same with the probe point adjoined.
    let mut i_terms = vec![1.0f64; n_cut + 1];
    let mut j_terms = vec![1.0f64; n_cut + 1];
    for n in 1..=n_cut {
        let q = nodes_for(n);
        let h = length / q as f64;
        let mut idx = vec![0usize; n];
        let mut i_sum = 0.0f64;
        let mut j_sum = 0.0f64;
        loop {
            for (slot, &k) in slots.iter_mut().zip(&idx) {
                slot.x[0] = lo + (k as f64 + 0.5) * h;
            }
            let mut energy = Energy::ZERO;
            for a in 0..n {
                for b in 0..a {
                    energy = energy + phi.pair_energy(&slots[a], &slots[b])?;
                    if energy.is_infinite() {
                        break;
                    }
                }
                if energy.is_infinite() {
                    break;
                }
            }
            let weight: f64 = psi_weights[..n].iter().product();
            let boltz = energy.boltzmann(beta);
            if boltz > 0.0 {
                i_sum += boltz * weight;
                let mut probe_energy = energy;
                for slot in &slots[..n] {
                    probe_energy = probe_energy + phi.pair_energy(slot, &probe_point)?;
                    if probe_energy.is_infinite() {
                        break;
                    }
                }
                j_sum += probe_energy.boltzmann(beta) * weight;
            }
            // Odometer over the N-fold grid.
            let mut dim = 0;
            loop {
                if dim == n {
                    break;
                }
                idx[dim] += 1;
                if idx[dim] < q {
                    break;
                }
                idx[dim] = 0;
                dim += 1;
            }
            if dim == n {
                break;
            }
        }
        i_terms[n] = i_sum * h.powi(n as i32);
        j_terms[n] = j_sum * h.powi(n as i32);
    }
    let mut z_tilde = 0.0;
    let mut z_probe = 0.0;
    let mut mean_num = 0.0;
    let mut factorial = 1.0;
    for n in 0..=n_cut {
        if n > 0 {
            factorial *= n as f64;
        }
        let coeff = z.powi(n as i32) / factorial;
        z_tilde += coeff * i_terms[n];
        z_probe += coeff * j_terms[n];
        mean_num += n as f64 * coeff * i_terms[n];
    }
    // Next-term bound: appending a point multiplies the integrand by
    // e^{-beta E(new | rest)} <= 1 for a repulsive tail, so
    // I_{N+1} <= I_N * |L| * psi_weight.
    let max_psi_weight = psi_weights.iter().copied().fold(1.0f64, f64::max);
    let next_bound = z.powi(n_cut as i32 + 1) / (factorial * (n_cut as f64 + 1.0))
        * i_terms[n_cut]
        * length
        * max_psi_weight;
    let tail_fraction = next_bound / z_tilde;
    let sigma_l = length * psi_weights.iter().sum::<f64>() / psi_weights.len().max(1) as f64;
    let mean_count = mean_num / z_tilde;
    Ok(PartitionOracle {
        z_tilde,
        rho_probe: z_probe / z_tilde,
        rho_avg: mean_count / (z * sigma_l),
        mean_count,
        tail_fraction,
        flagged: tail_fraction > tail_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ScalarPotential;

    fn hard_core() -> PathPairPotential {
        PathPairPotential::new(ScalarPotential::pure_hard_core(1.0)).unwrap()
    }

    fn free() -> PathPairPotential {
        PathPairPotential::new(ScalarPotential {
            hard_core_r: 0.0,
            tail: crate::potential::TailPotential::None,
            a0: 1.0,
        })
        .unwrap()
    }

    fn base_cfg(side: f64, z: f64, seed: u64) -> SamplerConfig {
        SamplerConfig {
            sim_box: SimBox::cube(1, side).unwrap(),
            z,
            beta: 1.0,
            moves: MoveMix::default(),
            n_sweeps: 40_000,
            burn_in: 4_000,
            thinning: 4,
            seed,
            translate_step: 0.5,
        }
    }

    #[test]
    fn move_mix_must_sum_to_one() {
        let mut cfg = base_cfg(4.0, 0.5, 1);
        cfg.moves = MoveMix {
            birth: 0.5,
            death: 0.5,
            translate: 0.1,
            mark_resample: 0.0,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fixed_seed_reproduces_chain() {
        let cfg = base_cfg(4.0, 0.4, 9);
        let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
        let (a, _) = mcmc_run(&cfg, &hard_core(), &SelfPotential::ZERO, &marks).unwrap();
        let (b, _) = mcmc_run(&cfg, &hard_core(), &SelfPotential::ZERO, &marks).unwrap();
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(x, y)| x == y));
    }

    #[test]
    fn poisson_limit_mean_count() {
        // Phi = 0, Psi = 0: counts are Poisson(z |L|).
        let mut cfg = base_cfg(5.0, 0.6, 4);
        cfg.n_sweeps = 60_000;
        let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
        let (samples, summary) = mcmc_run(&cfg, &free(), &SelfPotential::ZERO, &marks).unwrap();
        let lambda = 0.6 * 5.0;
        let counts: Vec<f64> = samples.iter().map(|g| g.len() as f64).collect();
        let mean = batch_means(&counts, BATCHES);
        assert!(
            (mean.value - lambda).abs() < 4.0 * mean.stderr,
            "mean {} vs lambda {lambda} (se {})",
            mean.value,
            mean.stderr
        );
        assert!(summary.acceptance_rate(MoveKind::Birth) > 0.0);
    }

    #[test]
    fn tiny_box_never_holds_two_hard_cores() {
        let mut cfg = base_cfg(0.8, 2.0, 5);
        cfg.n_sweeps = 20_000;
        let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
        let (samples, _) = mcmc_run(&cfg, &hard_core(), &SelfPotential::ZERO, &marks).unwrap();
        assert!(samples.iter().all(|g| g.len() <= 1));
    }

    #[test]
    fn stored_states_respect_hard_core() {
        let cfg = base_cfg(4.0, 0.8, 6);
        let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
        let (samples, _) = mcmc_run(&cfg, &hard_core(), &SelfPotential::ZERO, &marks).unwrap();
        for g in &samples {
            for i in 0..g.len() {
                for j in 0..i {
                    let d = crate::geom::euclidean_distance(&g.point(i).x, &g.point(j).x);
                    assert!(d >= 1.0, "hard-core violation at distance {d}");
                }
            }
        }
    }

    #[test]
    fn intensity_poisson_is_one() {
        let cfg = base_cfg(5.0, 0.5, 7);
        let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
        let (samples, _) = mcmc_run(&cfg, &free(), &SelfPotential::ZERO, &marks).unwrap();
        let sigma_l = sigma_volume(&cfg.sim_box, &SelfPotential::ZERO, &marks, 100, 1).unwrap();
        let rho = estimate_intensity(&samples, 0.5, sigma_l).unwrap();
        assert!(
            (rho.value - 1.0).abs() < 4.0 * rho.stderr,
            "rho {} se {}",
            rho.value,
            rho.stderr
        );
    }

    #[test]
    fn gnz_ones_matches_mean_count_identity() {
        let cfg = base_cfg(4.0, 0.5, 8);
        let marks = MarkSampler::Zero { dim: 1, n_steps: 4 };
        let (samples, _) = mcmc_run(&cfg, &free(), &SelfPotential::ZERO, &marks).unwrap();
        let tests = gnz_test_suite(1.0);
        let reports = gnz_residual(
            &samples,
            &tests,
            0.5,
            1.0,
            &free(),
            &SelfPotential::ZERO,
            &marks,
            &cfg.sim_box,
            4,
            3,
        )
        .unwrap();
        // "ones" residual: E|gamma| - z|L| ~ 0; "zero" is exactly zero.
        assert!(reports[0].residual.value.abs() < 3.0 * reports[0].residual.stderr.max(1e-12));
        assert_eq!(reports[1].lhs.value, 0.0);
        assert_eq!(reports[1].rhs.value, 0.0);
    }

    #[test]
    fn oracle_small_box_exact_cases() {
        // Box shorter than the core: Z = 1 + z |L| exactly, rho_1 -> 1 as z -> 0.
        let phi = hard_core();
        let sim_box = SimBox::new(vec![0.0], vec![0.8]).unwrap();
        let oracle = partition_oracle(
            &sim_box,
            0.3,
            1.0,
            &phi,
            &SelfPotential::ZERO,
            2,
            2000,
            0.4,
            0.5,
        )
        .unwrap();
        assert!((oracle.z_tilde - (1.0 + 0.3 * 0.8)).abs() < 1e-8);
        let tiny = partition_oracle(
            &sim_box,
            1e-8,
            1.0,
            &phi,
            &SelfPotential::ZERO,
            2,
            500,
            0.4,
            0.5,
        )
        .unwrap();
        assert!((tiny.z_tilde - 1.0).abs() < 1e-7);
        assert!((tiny.rho_probe - 1.0).abs() < 1e-7);
    }

    #[test]
    fn oracle_matches_tonks_closed_form() {
        // Hard rods of diameter R in [0, L]: the admissible N-point volume
        // is (L - (N-1) R)_+^N.
        let phi = hard_core();
        let sim_box = SimBox::new(vec![0.0], vec![4.0]).unwrap();
        let z = 0.09;
        let oracle = partition_oracle(
            &sim_box,
            z,
            1.0,
            &phi,
            &SelfPotential::ZERO,
            4,
            3000,
            2.0,
            1.0,
        )
        .unwrap();
        let mut z_exact = 1.0;
        let mut mean = 0.0;
        let mut factorial = 1.0;
        for n in 1..=4usize {
            factorial *= n as f64;
            let v = (4.0 - (n as f64 - 1.0)).max(0.0).powi(n as i32);
            z_exact += z.powi(n as i32) / factorial * v;
            mean += n as f64 * z.powi(n as i32) / factorial * v;
        }
        let rho_exact = mean / z_exact / (z * 4.0);
        assert!(
            (oracle.z_tilde - z_exact).abs() < 2e-4 * z_exact,
            "{} vs {z_exact}",
            oracle.z_tilde
        );
        assert!(
            (oracle.rho_avg - rho_exact).abs() < 5e-4 * rho_exact,
            "{} vs {rho_exact}",
            oracle.rho_avg
        );
    }

    #[test]
    fn marked_oracle_with_zero_marks_matches_plain_oracle() {
        let phi = hard_core();
        let sim_box = SimBox::new(vec![0.0], vec![3.5]).unwrap();
        let plain = partition_oracle(
            &sim_box,
            0.1,
            1.0,
            &phi,
            &SelfPotential::ZERO,
            3,
            400,
            1.5,
            1.0,
        )
        .unwrap();
        let marks = MarkSampler::Zero { dim: 1, n_steps: 2 };
        let (marked, spread) = partition_oracle_marked(
            &sim_box,
            0.1,
            1.0,
            &phi,
            &SelfPotential::ZERO,
            3,
            400,
            1.5,
            1.0,
            &marks,
            3,
            5,
        )
        .unwrap();
        assert_eq!(plain.z_tilde, marked.z_tilde);
        assert_eq!(plain.rho_probe, marked.rho_probe);
        assert_eq!(spread, 0.0);
    }

    #[test]
    fn oracle_guards() {
        let phi = hard_core();
        let b = SimBox::new(vec![0.0], vec![8.0]).unwrap();
        assert!(
            partition_oracle(&b, 0.1, 1.0, &phi, &SelfPotential::ZERO, 2, 100, 1.0, 0.5).is_err()
        );
        let b = SimBox::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        assert!(
            partition_oracle(&b, 0.1, 1.0, &phi, &SelfPotential::ZERO, 2, 100, 1.0, 0.5).is_err()
        );
    }
}
