//! Finite marked configurations and their energies.
//!
//! A configuration is a finite simple set of marked points. The energy
//! functional splits as
//!
//! ```text
//! H(gamma) = sum_i Psi(x_i)  +  beta * E_Phi(gamma),
//! E_Phi(gamma) = sum_{i<j} Phi(x_i, x_j),
//! E(x | xi)    = sum_{y in xi} Phi(x, y),
//! ```
//!
//! with `H(empty) = 0` by convention. This module also carries the
//! structural predicates used by the estimates downstream: admissibility,
//! temperedness, the interaction-range bound and the anchor point whose
//! conditional energy against the rest is maximal.

use crate::energy::Energy;
use crate::error::{Error, Result};
use crate::langevin::PathMark;
use crate::potential::{PathPairPotential, SelfPotential};

/// A location in `R^d` together with a path mark of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPoint {
    pub x: Vec<f64>,
    pub mark: PathMark,
}

impl MarkedPoint {
    pub fn new(x: Vec<f64>, mark: PathMark) -> Result<MarkedPoint> {
        if x.len() != mark.dim() {
            return Err(Error::InvalidSpec(
                "location and mark dimensions differ".into(),
            ));
        }
        Ok(MarkedPoint { x, mark })
    }

    /// A point with the constant-zero mark.
    pub fn with_zero_mark(x: Vec<f64>, n_steps: usize) -> MarkedPoint {
        let d = x.len();
        MarkedPoint {
            x,
            mark: PathMark::zero(d, n_steps),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// A finite simple configuration: pairwise distinct marked points, in
/// insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Configuration {
    points: Vec<MarkedPoint>,
}

impl Configuration {
    pub fn empty() -> Configuration {
        Configuration { points: Vec::new() }
    }

    /// Build from points, rejecting exact duplicates of `(x, mark)`.
    pub fn new(points: Vec<MarkedPoint>) -> Result<Configuration> {
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::InvalidSpec(format!(
                        "configuration is not simple: points {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(Configuration { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[MarkedPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &MarkedPoint {
        &self.points[i]
    }

    pub fn push(&mut self, p: MarkedPoint) {
        self.points.push(p);
    }

    pub fn remove(&mut self, i: usize) -> MarkedPoint {
        self.points.remove(i)
    }

    pub fn contains(&self, p: &MarkedPoint) -> bool {
        self.points.iter().any(|q| q == p)
    }

    /// Concatenation of two disjoint configurations.
    pub fn concat(&self, other: &Configuration) -> Result<Configuration> {
        if other.points.iter().any(|p| self.contains(p)) {
            return Err(Error::NotDisjoint);
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Ok(Configuration { points })
    }

    /// The configuration without its `i`-th point.
    pub fn without(&self, i: usize) -> Configuration {
        let mut points = self.points.clone();
        points.remove(i);
        Configuration { points }
    }

    pub fn max_mark_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.mark.sup_norm())
            .fold(0.0, f64::max)
    }
}

impl FromIterator<MarkedPoint> for Configuration {
    fn from_iter<T: IntoIterator<Item = MarkedPoint>>(iter: T) -> Configuration {
        Configuration {
            points: iter.into_iter().collect(),
        }
    }
}

/// `E_Phi(gamma)`: sum over unordered pairs, absorbing the infinite state.
pub fn pair_interaction_energy(gamma: &Configuration, phi: &PathPairPotential) -> Result<Energy> {
    let pts = gamma.points();
    let mut acc = Energy::ZERO;
    for i in 0..pts.len() {
        for j in 0..i {
            acc = acc + phi.pair_energy(&pts[i], &pts[j])?;
            if acc.is_infinite() {
                return Ok(Energy::Infinite);
            }
        }
    }
    Ok(acc)
}

/// `E(x | xi)`: conditional energy of `x` against the finite configuration
/// `xi`. Errors when `x` is a member of `xi`.
pub fn conditional_energy(
    x: &MarkedPoint,
    xi: &Configuration,
    phi: &PathPairPotential,
) -> Result<Energy> {
    if xi.contains(x) {
        return Err(Error::NotDisjoint);
    }
    let mut acc = Energy::ZERO;
    for y in xi.points() {
        acc = acc + phi.pair_energy(x, y)?;
        if acc.is_infinite() {
            return Ok(Energy::Infinite);
        }
    }
    Ok(acc)
}

/// `H(gamma) = sum Psi + beta * E_Phi(gamma)`; `H(empty) = 0`.
pub fn total_energy(
    gamma: &Configuration,
    psi: &SelfPotential,
    phi: &PathPairPotential,
    beta: f64,
) -> Result<Energy> {
    let pair = pair_interaction_energy(gamma, phi)?;
    let self_term: f64 = gamma.points().iter().map(|p| psi.eval(p)).sum();
    Ok(match pair {
        Energy::Infinite => Energy::Infinite,
        Energy::Finite(v) => Energy::Finite(self_term + beta * v),
    })
}

/// Range bound for the interaction of a point of a `t`-tempered
/// configuration:
///
/// ```text
/// r = 2 l(t) + 2 sup||m|| + 1 + a0,    l(t) = 2^{(d+delta)/delta - 1} t^{1/delta}.
/// ```
pub fn interaction_range(t: u64, sup_mark: f64, a0: f64, d: usize, delta: f64) -> f64 {
    let l = 2f64.powf((d as f64 + delta) / delta - 1.0) * (t as f64).powf(1.0 / delta);
    2.0 * l + 2.0 * sup_mark + 1.0 + a0
}

/// Result of the temperedness scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperednessReport {
    /// Smallest index `t` for which the bound holds on the scan horizon.
    /// Always `Some` for finite configurations.
    pub index_t: Option<u64>,
    pub l_max: u64,
}

/// Smallest integer `t >= 1` such that, for all `l <= l_max`,
/// `sum_{|x| <= l} (1 + ||m||^{d+2 delta}) <= t l^d`.
pub fn temperedness_index(
    gamma: &Configuration,
    l_max: u64,
    delta: f64,
    d: usize,
) -> Result<TemperednessReport> {
    if l_max < 1 {
        return Err(Error::InvalidSpec("l_max must be >= 1".into()));
    }
    let exponent = d as f64 + 2.0 * delta;
    let mut t_req = 1u64;
    for l in 1..=l_max {
        let radius = l as f64;
        let sum: f64 = gamma
            .points()
            .iter()
            .filter(|p| p.x.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius)
            .map(|p| 1.0 + p.mark.sup_norm().powf(exponent))
            .sum();
        let level = radius.powi(d as i32);
        // Smallest integer t with sum <= t * l^d.
        let t_l = (sum / level).ceil().max(1.0);
        if !t_l.is_finite() {
            return Ok(TemperednessReport {
                index_t: None,
                l_max,
            });
        }
        t_req = t_req.max(t_l as u64);
    }
    Ok(TemperednessReport {
        index_t: Some(t_req),
        l_max,
    })
}

/// The point of `gamma` whose conditional energy against the rest is
/// maximal (ties broken by lowest index). With `E_Phi(gamma)` finite its
/// conditional energy is `>= 2 E_Phi(gamma)/|gamma|`, hence `>= -2 B_Phi`
/// under stability.
pub fn select_anchor(gamma: &Configuration, phi: &PathPairPotential) -> Result<usize> {
    if gamma.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let mut best = 0usize;
    let mut best_e = conditional_energy(gamma.point(0), &gamma.without(0), phi)?;
    for i in 1..gamma.len() {
        let e = conditional_energy(gamma.point(i), &gamma.without(i), phi)?;
        if e > best_e {
            best_e = e;
            best = i;
        }
    }
    Ok(best)
}

/// Whether every pair of `gamma` has finite pair energy.
pub fn is_admissible(gamma: &Configuration, phi: &PathPairPotential) -> Result<bool> {
    Ok(pair_interaction_energy(gamma, phi)?.is_finite())
}
