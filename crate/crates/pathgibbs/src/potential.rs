//! Pair potentials between path-marked points.
//!
//! The scalar ingredient lives on `R_+`: a hard core of diameter `R` plus an
//! optional Lennard-Jones tail on `[R, +inf)`,
//!
//! ```text
//! phi(u) = (+inf) 1_{[0,R)}(u) + phi_l(u),
//! phi_l(u) = a / (u - R)^12 - b / (u - R)^6      (shifted form), or
//! phi_l(u) = a / u^12        - b / u^6           (unshifted form).
//! ```
//!
//! The lift to marked points integrates the scalar potential along the two
//! trajectories and cuts the interaction off when the starting points are
//! out of range:
//!
//! ```text
//! Phi(x1, x2) = ( int_0^1 phi(|x1 - x2 + m1(s) - m2(s)|) ds )
//!               * 1{ |x1 - x2| <= a0 + ||m1|| + ||m2|| }.
//! ```
//!
//! The time integral is a trapezoidal rule on the shared mark grid, and the
//! hard core is tested at grid nodes: "paths keep distance >= R" means, in
//! this discretization, at every node of the common grid.

use rand::Rng;

use crate::configuration::MarkedPoint;
use crate::energy::Energy;
use crate::error::{Error, Result};

/// Tail component `phi_l` on `[R, +inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailPotential {
    None,
    /// `a/v^12 - b/v^6` with `v = u - R` when `shifted`, else `v = u`.
    LennardJones {
        a: f64,
        b: f64,
        shifted: bool,
    },
}

/// Scalar potential: hard core of diameter `hard_core_r`, tail, and the
/// sensitivity radius `a0` used by the range indicator of the path lift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarPotential {
    pub hard_core_r: f64,
    pub tail: TailPotential,
    pub a0: f64,
}

impl ScalarPotential {
    /// Pure hard core with the sensitivity radius equal to the diameter.
    pub fn pure_hard_core(r: f64) -> ScalarPotential {
        ScalarPotential {
            hard_core_r: r,
            tail: TailPotential::None,
            a0: r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hard_core_r >= 0.0) || !self.hard_core_r.is_finite() {
            return Err(Error::InvalidSpec(
                "hard core diameter must be a nonnegative real".into(),
            ));
        }
        if !(self.a0 >= 0.0) || !self.a0.is_finite() {
            return Err(Error::InvalidSpec("a0 must be a nonnegative real".into()));
        }
        if self.hard_core_r > 0.0 && self.a0 < self.hard_core_r {
            return Err(Error::InvalidSpec(
                "a0 must be >= the hard core diameter, else the range cutoff would truncate the core".into(),
            ));
        }
        if let TailPotential::LennardJones { a, b, .. } = self.tail {
            if !(a > 0.0) || !(b >= 0.0) {
                return Err(Error::InvalidSpec(
                    "Lennard-Jones tail needs a > 0, b >= 0".into(),
                ));
            }
            // An attractive tail must stay attractive past a0.
            if b > 0.0 {
                let span = 20.0 * (self.a0 + self.hard_core_r.max(1.0));
                for k in 0..=4000usize {
                    let u = self.a0 + span * k as f64 / 4000.0;
                    if let Energy::Finite(v) = self.eval(u) {
                        if v > 1e-12 {
                            return Err(Error::InvalidSpec(format!(
                                "tail is positive at u = {u} > a0 = {}; increase a0",
                                self.a0
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn tail_value(&self, u: f64) -> f64 {
        match self.tail {
            TailPotential::None => 0.0,
            TailPotential::LennardJones { a, b, shifted } => {
                let v = if shifted { u - self.hard_core_r } else { u };
                let v6 = v.powi(6);
                a / (v6 * v6) - b / v6
            }
        }
    }

    /// `phi(u)`: the infinite state iff `u < R`, else the tail value.
    ///
    /// A tail that itself diverges (the shifted form at `u = R` exactly) is
    /// mapped to the infinite state as well.
    pub fn eval(&self, u: f64) -> Energy {
        debug_assert!(u >= 0.0);
        if u < self.hard_core_r {
            return Energy::Infinite;
        }
        let v = self.tail_value(u);
        if v.is_finite() {
            Energy::Finite(v)
        } else {
            Energy::Infinite
        }
    }
}

/// `phi(u)`; see [`ScalarPotential::eval`].
pub fn phi_eval(scalar: &ScalarPotential, u: f64) -> Energy {
    scalar.eval(u)
}

/// The path pair potential: a scalar potential lifted to marked points by
/// trapezoidal quadrature on the shared mark grid. Carries no inverse
/// temperature; `beta` multiplies energies downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPairPotential {
    pub scalar: ScalarPotential,
}

impl PathPairPotential {
    pub fn new(scalar: ScalarPotential) -> Result<PathPairPotential> {
        scalar.validate()?;
        Ok(PathPairPotential { scalar })
    }

    /// Range radius around a point with anchor mark norm `sup_a` against a
    /// partner of mark norm `sup_b`. Grouped so the value is exactly
    /// symmetric in the two arguments.
    pub fn range_radius(&self, sup_a: f64, sup_b: f64) -> f64 {
        self.scalar.a0 + (sup_a + sup_b)
    }

    /// `Phi(a, b)`.
    ///
    /// Exactly `0` when the starting points are out of range; the infinite
    /// state when any grid node puts the paths closer than the hard core;
    /// otherwise the quadrature of the tail along the paths.
    pub fn pair_energy(&self, a: &MarkedPoint, b: &MarkedPoint) -> Result<Energy> {
        let (ma, mb) = (&a.mark, &b.mark);
        if ma.n_nodes() != mb.n_nodes() {
            return Err(Error::GridMismatch(ma.n_nodes(), mb.n_nodes()));
        }
        if a.x.len() != b.x.len() || a.x.len() != ma.dim() {
            return Err(Error::InvalidSpec(
                "marked points have mismatched dimensions".into(),
            ));
        }
        let start_dist = crate::geom::euclidean_distance(&a.x, &b.x);
        if start_dist > self.range_radius(ma.sup_norm(), mb.sup_norm()) {
            return Ok(Energy::ZERO);
        }
        let d = ma.dim();
        let n_nodes = ma.n_nodes();
        let r = self.scalar.hard_core_r;
        let has_tail = !matches!(self.scalar.tail, TailPotential::None);
        // One pass over the shared grid: hard-core short circuit at each
        // node, trapezoid accumulation of the tail when present.
        let h = 1.0 / (n_nodes - 1) as f64;
        let mut acc = 0.0;
        for k in 0..n_nodes {
            let (na, nb) = (ma.node(k), mb.node(k));
            let mut s = 0.0;
            for i in 0..d {
                // Grouped per point so the swap (a, b) -> (b, a) negates the
                // difference exactly and the energy is bit-for-bit symmetric.
                let diff = (a.x[i] + na[i]) - (b.x[i] + nb[i]);
                s += diff * diff;
            }
            let dist = s.sqrt();
            if dist < r {
                return Ok(Energy::Infinite);
            }
            if has_tail {
                match self.scalar.eval(dist) {
                    Energy::Infinite => return Ok(Energy::Infinite),
                    Energy::Finite(v) => {
                        let w = if k == 0 || k == n_nodes - 1 {
                            0.5 * h
                        } else {
                            h
                        };
                        acc += w * v;
                    }
                }
            }
        }
        Ok(Energy::Finite(acc))
    }

    /// Truncated pair potential: `1` on the infinite state, `Phi` otherwise.
    pub fn truncated_pair(&self, a: &MarkedPoint, b: &MarkedPoint) -> Result<f64> {
        Ok(self.pair_energy(a, b)?.truncated())
    }
}

/// Result of the tail-norm quadrature `int_R^inf |phi_l(u)| u^{d-1} du`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailNorm {
    Regular {
        value: f64,
        error: f64,
    },
    /// Non-integrable divergence at the hard-core edge: the regularity
    /// assumption fails for this potential.
    NotRegular,
}

impl TailNorm {
    pub fn value(&self) -> Option<f64> {
        match self {
            TailNorm::Regular { value, .. } => Some(*value),
            TailNorm::NotRegular => None,
        }
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    simpson_step(f, a, b, fa, fm, fb, tol, depth)
}

fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
    }
}

/// `||phi||_{R_+} = int_R^inf |phi_l(u)| u^{d-1} du`, by adaptive quadrature.
///
/// A divergence at `u -> R^+` (the shifted tail) is detected by refining the
/// inner cutoff; it yields [`TailNorm::NotRegular`], signalling that the
/// uniform regularity condition fails for this potential.
pub fn phi_tail_norm(scalar: &ScalarPotential, d: usize) -> Result<TailNorm> {
    scalar.validate()?;
    if d == 0 {
        return Err(Error::InvalidSpec("dimension must be >= 1".into()));
    }
    if matches!(scalar.tail, TailPotential::None) {
        return Ok(TailNorm::Regular {
            value: 0.0,
            error: 0.0,
        });
    }
    let r = scalar.hard_core_r;
    let g = |u: f64| -> f64 {
        match scalar.eval(u) {
            Energy::Finite(v) => v.abs() * u.powi(d as i32 - 1),
            Energy::Infinite => f64::INFINITY,
        }
    };
    // Near part on (R, R+1], as a limit of shrinking inner cutoffs. For an
    // integrable edge the dyadic increments decay geometrically; for a
    // divergent one they grow, which flags the potential as not regular.
    // Dyadic intervals [R + eps/2, R + eps] starting at eps = 1 cover
    // (R, R + 1] in the limit.
    let mut near = 0.0;
    let mut prev_increment = f64::INFINITY;
    let mut grow_streak = 0usize;
    let mut eps = 1.0f64;
    for _ in 0..60 {
        let lo = r + eps / 2.0;
        let hi = r + eps;
        let increment = adaptive_simpson(&g, lo, hi, 1e-12, 40);
        if !increment.is_finite() || near + increment > 1e14 {
            return Ok(TailNorm::NotRegular);
        }
        near += increment;
        // A divergent edge grows on every halving (by 2^{p-1} for a 1/v^p
        // blowup); a zero of |phi_l| away from the edge can produce one
        // small increment followed by a larger one, so require a streak.
        if increment > prev_increment.max(1e-300) * 1.5 && increment > 1e-6 {
            grow_streak += 1;
            if grow_streak >= 3 {
                return Ok(TailNorm::NotRegular);
            }
        } else {
            grow_streak = 0;
        }
        if increment < 1e-9 * near.max(1e-12) {
            // Leftover below the reporting accuracy.
            break;
        }
        prev_increment = increment;
        eps /= 2.0;
    }
    let shoulder = adaptive_simpson(&g, r + 1.0, r + 10.0, 1e-12, 40);
    // Far tail via u = 1/t; the transformed integrand vanishes at t = 0 for
    // the u^{-6} decay whenever d <= 4.
    if d > 4 {
        return Err(Error::InvalidSpec(
            "tail norm computed for d <= 4 only".into(),
        ));
    }
    let transformed = |t: f64| -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            g(1.0 / t) / (t * t)
        }
    };
    let far = adaptive_simpson(&transformed, 0.0, 1.0 / (r + 10.0), 1e-12, 40);
    let value = near + shoulder + far;
    Ok(TailNorm::Regular {
        value,
        error: 1e-9 * value.max(1.0),
    })
}

/// Packing bound realizing the stability of the scalar tail: with
/// `kappa = ceil(((a0 + R)/(R/2))^d)` points of pairwise distance `>= R`
/// within range, `2 B_phi = kappa * sup_{u >= R} |min(phi_l(u), 0)|`.
///
/// The sup is scanned on a fine grid with a parabolic refinement around the
/// best node.
pub fn stability_constant_bound(scalar: &ScalarPotential, d: usize) -> Result<f64> {
    scalar.validate()?;
    if !(scalar.hard_core_r > 0.0) {
        return Err(Error::InvalidSpec(
            "stability bound needs a positive hard core".into(),
        ));
    }
    let depth = tail_well_depth(scalar);
    if depth == 0.0 {
        return Ok(0.0);
    }
    let kappa = ((scalar.a0 + scalar.hard_core_r) / (scalar.hard_core_r / 2.0))
        .powi(d as i32)
        .ceil();
    Ok(kappa * depth / 2.0)
}

/// `sup_{u >= R} |min(phi_l(u), 0)|`.
pub fn tail_well_depth(scalar: &ScalarPotential) -> f64 {
    match scalar.tail {
        TailPotential::None => 0.0,
        TailPotential::LennardJones { b, .. } if b == 0.0 => 0.0,
        TailPotential::LennardJones { .. } => {
            let r = scalar.hard_core_r;
            let hi = scalar.a0 + 10.0 * (scalar.a0 + r.max(1.0));
            let n = 2_000_000usize;
            let h = (hi - r) / n as f64;
            let mut best_k = 0usize;
            let mut best = 0.0f64;
            for k in 0..=n {
                let u = r + k as f64 * h;
                if let Energy::Finite(v) = scalar.eval(u) {
                    if v < best {
                        best = v;
                        best_k = k;
                    }
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            // Parabolic refinement through the best node and its neighbours.
            let u0 = r + best_k as f64 * h;
            let f = |u: f64| match scalar.eval(u) {
                Energy::Finite(v) => v,
                Energy::Infinite => f64::INFINITY,
            };
            let (fm, f0, fp) = (f(u0 - h), f(u0), f(u0 + h));
            let denom = fm - 2.0 * f0 + fp;
            let refined = if best_k > 0 && denom > 0.0 && fm.is_finite() {
                let shift = 0.5 * (fm - fp) / denom;
                f(u0 + shift.clamp(-1.0, 1.0) * h).min(f0)
            } else {
                f0
            };
            refined.min(0.0).abs()
        }
    }
}

/// Kind of self potential acting on a single marked point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelfKind {
    Zero,
    /// `Psi(x, m) = coeff * ||m||^exponent`.
    MarkPower {
        coeff: f64,
        exponent: f64,
    },
}

/// The self potential and its declared lower-bound constant `A_Psi`, with
/// `Psi(x, m) >= -A_Psi ||m||^{d + delta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfPotential {
    pub kind: SelfKind,
    pub a_psi: f64,
}

impl SelfPotential {
    pub const ZERO: SelfPotential = SelfPotential {
        kind: SelfKind::Zero,
        a_psi: 0.0,
    };

    pub fn eval(&self, point: &MarkedPoint) -> f64 {
        match self.kind {
            SelfKind::Zero => 0.0,
            SelfKind::MarkPower { coeff, exponent } => coeff * point.mark.sup_norm().powf(exponent),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, SelfKind::Zero)
    }

    /// Check the declared lower bound on a sampled point.
    pub fn lower_bound_ok(&self, point: &MarkedPoint, d: usize, delta: f64) -> bool {
        self.eval(point) >= -self.a_psi * point.mark.sup_norm().powf(d as f64 + delta) - 1e-12
    }
}

/// Draws random admissible scalar configurations: points in a box around the
/// origin with pairwise distances `>= R`. Used by stability property checks.
pub fn random_admissible_locations<R: Rng + ?Sized>(
    n_max: usize,
    half_width: f64,
    hard_core_r: f64,
    d: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let n = rng.gen_range(1..=n_max);
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut attempts = 0;
    while pts.len() < n && attempts < 10_000 {
        attempts += 1;
        let cand: Vec<f64> = (0..d)
            .map(|_| rng.gen_range(-half_width..half_width))
            .collect();
        if pts
            .iter()
            .all(|p| crate::geom::euclidean_distance(p, &cand) >= hard_core_r)
        {
            pts.push(cand);
        }
    }
    pts
}
