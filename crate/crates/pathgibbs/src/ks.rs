//! The Kirkwood-Salsburg operator and correlation functions.
//!
//! Correlation sequences `r = (r_N)_N` live in the weighted space with norm
//! `||r||_c = sup_N sup |r_N(x_1..x_N)| / prod c(x_i)`. The operator acts as
//!
//! ```text
//! (K_z r)_{N+1}(x_0..x_N) = e^{-beta sum_i Phi(x_0, x_i)} ( r_N(x_1..x_N)
//!     + sum_{k>=1} z^k/k! int prod_j (e^{-beta Phi(x_0, y_j)} - 1)
//!                           r_{N+k}(x_1..x_N, y_1..y_k) sigma^{(x) k}(dy) ),
//! (K_z r)_1(x_0) = the series alone,
//! ```
//!
//! and the correlation functions solve `r = K_z r + 1_z` where `1_z` is `1`
//! in its one-point component and `0` elsewhere. [`neumann_eval`] runs that
//! fixed point as a truncated iteration `r <- K_z r + 1_z` started from the
//! ideal-gas sequence `r == 1`, so with `Phi == 0` every depth returns the
//! Poisson value `1` exactly; below the contraction threshold successive
//! depths converge geometrically.
//!
//! The `k`-fold integrals are Monte Carlo over the exact support of the
//! integrand: each `y_j` draws a mark and then a location uniformly in the
//! range ball around the anchor (radius `a0 + ||m_0|| + ||m_j||`), weighted
//! by the ball volume and `e^{-Psi}`. Out-of-range draws contribute exact
//! zeros and short-circuit the recursive evaluation.

use rand_chacha::ChaCha8Rng;

use crate::configuration::MarkedPoint;
use crate::error::{Error, Result};
use crate::geom::{sample_in_ball, unit_ball_volume, SimBox};
use crate::langevin::MarkSampler;
use crate::mc::McValue;
use crate::potential::{PathPairPotential, SelfPotential};

/// Weight defining the Banach norm: a constant `c`, or the mark-dependent
/// `c(x, m) = exp(A (1 + ||m||^{d+delta}) + b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFunction {
    Constant(f64),
    Weighted {
        a: f64,
        b: f64,
        d: usize,
        delta: f64,
    },
}

impl WeightFunction {
    pub fn eval(&self, p: &MarkedPoint) -> f64 {
        match *self {
            WeightFunction::Constant(c) => c,
            WeightFunction::Weighted { a, b, d, delta } => {
                (a * (1.0 + p.mark.sup_norm().powf(d as f64 + delta)) + b).exp()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightFunction::Constant(c) if !(c > 0.0) => Err(Error::InvalidSpec(
                "weight must be strictly positive".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// A lazily evaluated correlation sequence: `rho_N` at an argument tuple,
/// with an attached Monte Carlo error. The empty tuple returns `rho_0 = 1`.
pub trait Correlations {
    fn rho(&self, args: &[MarkedPoint], rng: &mut ChaCha8Rng) -> Result<McValue>;

    /// Largest tuple length the evaluator supports.
    fn n_max(&self) -> usize {
        usize::MAX
    }
}

/// The ideal-gas sequence `rho_N == 1`, the exact fixed point for `Phi == 0`.
#[derive(Debug, Clone, Copy)]
pub struct IdealGas;

impl Correlations for IdealGas {
    fn rho(&self, _args: &[MarkedPoint], _rng: &mut ChaCha8Rng) -> Result<McValue> {
        Ok(McValue::exact(1.0))
    }
}

/// The extremal sequence `r_N = prod_i c(x_i)` of unit norm in `X_c`.
#[derive(Debug, Clone, Copy)]
pub struct ProductWeight(pub WeightFunction);

impl Correlations for ProductWeight {
    fn rho(&self, args: &[MarkedPoint], _rng: &mut ChaCha8Rng) -> Result<McValue> {
        Ok(McValue::exact(
            args.iter().map(|p| self.0.eval(p)).product(),
        ))
    }
}

/// Where the `sigma` integrals live: the whole space (locations sampled on
/// the exact range-ball support) or a finite box (same sampling, with draws
/// outside the box weighted zero).
#[derive(Debug, Clone)]
pub enum SampleDomain {
    FullSpace,
    Box(SimBox),
}

/// Importance sampler for `sigma(dy) = e^{-Psi(y)} dy R(dm)` restricted to
/// the range ball of an anchor.
#[derive(Debug, Clone)]
pub struct SigmaSampler {
    pub domain: SampleDomain,
    pub marks: MarkSampler,
    pub psi: SelfPotential,
}

impl SigmaSampler {
    /// Draw `(y, w)` with `E[w g(y)] = int_{ball cap domain} g dsigma` for
    /// integrands supported on the range ball around `anchor`.
    pub fn sample(
        &self,
        anchor: &MarkedPoint,
        phi: &PathPairPotential,
        rng: &mut ChaCha8Rng,
    ) -> Result<(MarkedPoint, f64)> {
        let mark = self.marks.sample(rng)?;
        let radius = phi.range_radius(anchor.mark.sup_norm(), mark.sup_norm());
        let d = anchor.x.len();
        let x = sample_in_ball(&anchor.x, radius, rng);
        let volume = unit_ball_volume(d) * radius.powi(d as i32);
        let inside = match &self.domain {
            SampleDomain::FullSpace => true,
            SampleDomain::Box(b) => b.contains(&x),
        };
        let y = MarkedPoint { x, mark };
        let w = if inside {
            volume * (-self.psi.eval(&y)).exp()
        } else {
            0.0
        };
        Ok((y, w))
    }
}

/// Truncation parameters of one operator application.
#[derive(Debug, Clone, Copy)]
pub struct KsParams {
    pub z: f64,
    pub beta: f64,
    /// Series truncation order.
    pub k_max: usize,
    /// Monte Carlo samples per integral.
    pub budget: usize,
}

impl KsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.z >= 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidSpec("need z >= 0 and beta > 0".into()));
        }
        if self.k_max == 0 || self.budget < 8 {
            return Err(Error::InvalidSpec("need k_max >= 1 and budget >= 8".into()));
        }
        Ok(())
    }
}

/// `(K_z r)` at `args = (x_0, ..., x_N)`, split into the `r_N` base term
/// (index 0; absent for one-point arguments) and the `k = 1..k_max` series
/// terms, all already multiplied by the hard-core prefactor.
pub fn ks_apply_terms<C: Correlations + ?Sized>(
    r: &C,
    args: &[MarkedPoint],
    phi: &PathPairPotential,
    sigma: &SigmaSampler,
    p: &KsParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<McValue>> {
    p.validate()?;
    if args.is_empty() {
        return Err(Error::InvalidSpec(
            "the operator acts on tuples of >= 1 point".into(),
        ));
    }
    if args.len() + p.k_max > r.n_max() {
        return Err(Error::InvalidSpec(format!(
            "evaluator supports N <= {}, needed {}",
            r.n_max(),
            args.len() + p.k_max
        )));
    }
    let anchor = &args[0];
    let rest = &args[1..];
    // Prefactor e^{-beta E(x_0 | x_1..x_N)}; empty product for N = 0.
    let mut prefactor = 1.0;
    for x in rest {
        prefactor *= phi.pair_energy(anchor, x)?.boltzmann(p.beta);
        if prefactor == 0.0 {
            return Ok(vec![McValue::exact(0.0)]);
        }
    }
    let mut terms = Vec::with_capacity(p.k_max + 1);
    if !rest.is_empty() {
        terms.push(r.rho(rest, rng)?.scale(prefactor));
    }
    let mut extended = rest.to_vec();
    let mut factorial = 1.0;
    for k in 1..=p.k_max {
        factorial *= k as f64;
        let coeff = p.z.powi(k as i32) / factorial;
        let mut samples = Vec::with_capacity(p.budget);
        for _ in 0..p.budget {
            extended.truncate(rest.len());
            let mut weight = 1.0;
            for _ in 0..k {
                let (y, w) = sigma.sample(anchor, phi, rng)?;
                if w == 0.0 {
                    weight = 0.0;
                    break;
                }
                weight *= w * phi.pair_energy(anchor, &y)?.mayer(p.beta);
                if weight == 0.0 {
                    break;
                }
                extended.push(y);
            }
            if weight == 0.0 {
                samples.push(0.0);
            } else {
                samples.push(weight * r.rho(&extended, rng)?.value);
            }
        }
        terms.push(McValue::from_samples(&samples).scale(coeff * prefactor));
    }
    Ok(terms)
}

/// `(K_z r)(args)` with combined Monte Carlo error.
pub fn ks_apply<C: Correlations + ?Sized>(
    r: &C,
    args: &[MarkedPoint],
    phi: &PathPairPotential,
    sigma: &SigmaSampler,
    p: &KsParams,
    rng: &mut ChaCha8Rng,
) -> Result<McValue> {
    let terms = ks_apply_terms(r, args, phi, sigma, p, rng)?;
    Ok(terms
        .into_iter()
        .fold(McValue::exact(0.0), |acc, t| acc.add(t)))
}

/// `1_z(args)`: `1` on one-point tuples, `0` elsewhere.
pub fn one_z(args: &[MarkedPoint]) -> f64 {
    if args.len() == 1 {
        1.0
    } else {
        0.0
    }
}

/// Residual of the fixed-point equation at `args`:
/// `r(args) - [(K_z r)(args) + 1_z(args)]`.
pub fn ks_residual<C: Correlations + ?Sized>(
    r: &C,
    args: &[MarkedPoint],
    phi: &PathPairPotential,
    sigma: &SigmaSampler,
    p: &KsParams,
    rng: &mut ChaCha8Rng,
) -> Result<McValue> {
    let lhs = r.rho(args, rng)?;
    let rhs = ks_apply(r, args, phi, sigma, p, rng)?;
    Ok(lhs.sub(rhs).sub(McValue::exact(one_z(args))))
}

/// Truncated fixed-point evaluator: `depth` applications of
/// `r <- K_z r + 1_z` started from `r == 1`, with geometrically decaying
/// Monte Carlo budgets down the recursion.
#[derive(Debug, Clone)]
pub struct NeumannSolver<'a> {
    pub phi: &'a PathPairPotential,
    pub sigma: &'a SigmaSampler,
    pub z: f64,
    pub beta: f64,
    pub depth: usize,
    pub k_max: usize,
    pub budget: usize,
    pub budget_floor: usize,
}

impl<'a> NeumannSolver<'a> {
    pub fn new(
        phi: &'a PathPairPotential,
        sigma: &'a SigmaSampler,
        z: f64,
        beta: f64,
        depth: usize,
        budget: usize,
    ) -> NeumannSolver<'a> {
        NeumannSolver {
            phi,
            sigma,
            z,
            beta,
            depth,
            k_max: 3,
            budget,
            budget_floor: 8,
        }
    }

    /// Per-level Monte Carlo budget: the top application gets the full
    /// budget, each level below a sixteenth of the one above (floored).
    /// Inner noise enters the top estimate averaged over the whole outer
    /// sample loop, so thin inner budgets cost little accuracy while keeping
    /// the total work from compounding exponentially with depth.
    fn budget_at(&self, depth: usize) -> usize {
        let shift = (4 * self.depth.saturating_sub(depth)).min(usize::BITS as usize - 1);
        (self.budget >> shift).max(self.budget_floor)
    }

    /// `rho` after `depth` iterations, at `args`.
    pub fn eval(
        &self,
        args: &[MarkedPoint],
        depth: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<McValue> {
        if depth == 0 {
            return Ok(McValue::exact(1.0));
        }
        if args.is_empty() {
            return Ok(McValue::exact(1.0));
        }
        let level = Level {
            solver: self,
            depth: depth - 1,
        };
        let p = KsParams {
            z: self.z,
            beta: self.beta,
            k_max: self.k_max,
            budget: self.budget_at(depth),
        };
        let applied = ks_apply(&level, args, self.phi, self.sigma, &p, rng)?;
        Ok(applied.add(McValue::exact(one_z(args))))
    }
}

struct Level<'b, 'a> {
    solver: &'b NeumannSolver<'a>,
    depth: usize,
}

impl Correlations for Level<'_, '_> {
    fn rho(&self, args: &[MarkedPoint], rng: &mut ChaCha8Rng) -> Result<McValue> {
        self.solver.eval(args, self.depth, rng)
    }
}

/// A view of a solver at a fixed depth, usable wherever a correlation
/// sequence is expected (residual checks, norm estimates).
pub struct NeumannCorrelations<'a> {
    pub solver: NeumannSolver<'a>,
}

impl Correlations for NeumannCorrelations<'_> {
    fn rho(&self, args: &[MarkedPoint], rng: &mut ChaCha8Rng) -> Result<McValue> {
        self.solver.eval(args, self.solver.depth, rng)
    }
}

/// Estimate `rho_N(args)` by the truncated fixed point. The iteration is
/// meaningful below the contraction threshold; above it the value is still
/// returned but has no convergence guarantee, which callers should surface.
#[allow(clippy::too_many_arguments)]
pub fn neumann_eval(
    args: &[MarkedPoint],
    phi: &PathPairPotential,
    sigma: &SigmaSampler,
    z: f64,
    beta: f64,
    depth: usize,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Result<McValue> {
    let solver = NeumannSolver::new(phi, sigma, z, beta, depth, budget);
    solver.eval(args, depth, rng)
}

/// Empirical lower bound for `||r||_c`: the max of `|r_N(tuple)| / prod c`
/// over sampled tuples with `N <= max_n`.
#[allow(clippy::too_many_arguments)]
pub fn banach_norm_estimate<C: Correlations + ?Sized>(
    r: &C,
    weight: &WeightFunction,
    sigma: &SigmaSampler,
    phi: &PathPairPotential,
    n_tuples: usize,
    max_n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    weight.validate()?;
    let d = sigma.marks.dim();
    let mut best = 0.0f64;
    for n in 1..=max_n {
        for _ in 0..n_tuples {
            // Chain the tuple: each next point sampled in range of the last,
            // so the tuple stays in the interacting regime.
            let first_mark = sigma.marks.sample(rng)?;
            let origin = match &sigma.domain {
                SampleDomain::FullSpace => vec![0.0; d],
                SampleDomain::Box(b) => b.sample_uniform(rng),
            };
            let mut tuple = vec![MarkedPoint {
                x: origin,
                mark: first_mark,
            }];
            while tuple.len() < n {
                let (y, w) = sigma.sample(tuple.last().expect("nonempty"), phi, rng)?;
                if w == 0.0 {
                    continue;
                }
                tuple.push(y);
            }
            let denom: f64 = tuple.iter().map(|p| weight.eval(p)).product();
            let value = r.rho(&tuple, rng)?.value.abs() / denom;
            best = best.max(value);
        }
    }
    Ok(best)
}
