//! Extended-real energies.
//!
//! Hard-core potentials take the value `+infinity`, which must participate in
//! Boltzmann factors exactly: `e^{-beta * inf} = 0`. Rather than relying on
//! IEEE infinities inside sums (where `inf - inf` or `0 * inf` would poison a
//! result), energies are carried as a tagged value and only converted to
//! floats at the Boltzmann/Mayer boundary.

use std::iter::Sum;
use std::ops::Add;

/// An energy value in `R union {+infinity}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub const ZERO: Energy = Energy::Finite(0.0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Energy::Infinite)
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    /// Finite value, or `None` for the infinite state.
    pub fn finite(self) -> Option<f64> {
        match self {
            Energy::Finite(v) => Some(v),
            Energy::Infinite => None,
        }
    }

    /// `e^{-beta * E}`, with the exact convention `e^{-beta * inf} = 0` for
    /// `beta > 0`.
    pub fn boltzmann(self, beta: f64) -> f64 {
        match self {
            Energy::Finite(v) => (-beta * v).exp(),
            Energy::Infinite => 0.0,
        }
    }

    /// Mayer factor `e^{-beta * E} - 1`; the infinite state contributes `-1`.
    pub fn mayer(self, beta: f64) -> f64 {
        match self {
            Energy::Finite(v) => (-beta * v).exp_m1(),
            Energy::Infinite => -1.0,
        }
    }

    /// Truncation: `1` on the infinite state, the value itself otherwise.
    pub fn truncated(self) -> f64 {
        match self {
            Energy::Finite(v) => v,
            Energy::Infinite => 1.0,
        }
    }
}

impl Add for Energy {
    type Output = Energy;

    fn add(self, rhs: Energy) -> Energy {
        match (self, rhs) {
            (Energy::Finite(a), Energy::Finite(b)) => Energy::Finite(a + b),
            _ => Energy::Infinite,
        }
    }
}

impl Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        let mut acc = Energy::ZERO;
        for e in iter {
            acc = acc + e;
            if acc.is_infinite() {
                // Absorbing: no need to look at the rest.
                return Energy::Infinite;
            }
        }
        acc
    }
}

impl PartialOrd for Energy {
    fn partial_cmp(&self, other: &Energy) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering;
        match (self, other) {
            (Energy::Infinite, Energy::Infinite) => Some(Ordering::Equal),
            (Energy::Infinite, Energy::Finite(_)) => Some(Ordering::Greater),
            (Energy::Finite(_), Energy::Infinite) => Some(Ordering::Less),
            (Energy::Finite(a), Energy::Finite(b)) => a.partial_cmp(b),
        }
    }
}
