//! Finite-volume Gibbs point processes whose points carry Langevin diffusion
//! paths as marks.
//!
//! A marked point is a pair `(x, m)` of a location `x` in R^d and a path mark
//! `m`: a trajectory on `[0,1]` started at `0`, represented on a uniform time
//! grid. Pair potentials act on whole trajectories (hard core plus an
//! integrable tail, lifted to paths by time quadrature), and the toolkit
//! covers the objects built on top of that interaction:
//!
//! * [`langevin`] — Euler-Maruyama simulation of the mark law and moment
//!   checks of its confinement.
//! * [`potential`] — scalar hard-core + tail potentials, their path lift,
//!   tail norms and stability constants.
//! * [`configuration`] — finite marked configurations, energies, temperedness
//!   and interaction-range bookkeeping.
//! * [`cluster`] — exact tree/graph enumeration, the Ursell function and
//!   kernel, and the tree-sum dominator `Q`.
//! * [`constants`] — the regularity constant `C(beta)`, the activity
//!   thresholds `z_Ru` and `z_crit`, and their weighted variants.
//! * [`ks`] — the Kirkwood-Salsburg operator, truncated fixed-point
//!   evaluation of correlation functions and residual checks.
//! * [`sampler`] — birth-death-move Metropolis-Hastings for the
//!   finite-volume Gibbs process, estimators and GNZ diagnostics.
//! * [`runconfig`] / [`report`] — plain-text configs, CSV emission and the
//!   figure/threshold reports used by the `pathgibbs` binary.
//!
//! Correlation functions are normalized as densities with respect to
//! `(z sigma)^{tensor N}` with `sigma(dx,dm) = e^{-Psi(x,m)} dx R(dm)`; other
//! references normalize with respect to the unweighted intensity measure, so
//! compare conventions before matching numbers across toolkits.
//!
//! Everything is deterministic given a seed: randomness flows through
//! explicit ChaCha streams (see [`rngutil`]), and parallel reductions are
//! order-independent.

pub mod cluster;
pub mod configuration;
pub mod constants;
pub mod csvio;
pub mod driver;
pub mod energy;
pub mod error;
pub mod geom;
pub mod ks;
pub mod langevin;
pub mod mc;
pub mod potential;
pub mod report;
pub mod rngutil;
pub mod runconfig;
pub mod sampler;

pub use energy::Energy;
pub use error::{Error, Result};
pub use mc::McValue;
