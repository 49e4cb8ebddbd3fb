//! Small geometric helpers: balls, boxes and uniform sampling in them.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Volume of the unit ball in `R^d`, by the exact two-step recursion
/// `b_d = 2 pi / d * b_{d-2}` with `b_0 = 1`, `b_1 = 2`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Uniform draw from the ball of radius `radius` centered at `center`.
pub fn sample_in_ball<R: Rng + ?Sized>(center: &[f64], radius: f64, rng: &mut R) -> Vec<f64> {
    let d = center.len();
    // Gaussian direction, radial inverse-cdf for the radius.
    let dir: Vec<f64> = (0..d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: f64 = rng.gen::<f64>();
    let r = radius * u.powf(1.0 / d as f64);
    if norm == 0.0 {
        return center.to_vec();
    }
    center
        .iter()
        .zip(&dir)
        .map(|(c, v)| c + r * v / norm)
        .collect()
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// An axis-aligned box in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SimBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<SimBox> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidSpec(
                "box bounds must have matching nonzero dimension".into(),
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidSpec(
                "box must be nondegenerate with finite bounds".into(),
            ));
        }
        Ok(SimBox { lo, hi })
    }

    /// Cube `[0, side]^d`.
    pub fn cube(d: usize, side: f64) -> Result<SimBox> {
        SimBox::new(vec![0.0; d], vec![side; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| rng.gen_range(*a..*b))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngutil::stream_rng;

    #[test]
    fn ball_volumes_match_closed_forms() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = stream_rng(1, 0);
        let c = [0.5, -1.0];
        for _ in 0..1000 {
            let x = sample_in_ball(&c, 2.5, &mut rng);
            assert!(euclidean_distance(&x, &c) <= 2.5 + 1e-12);
        }
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(SimBox::new(vec![0.0], vec![0.0]).is_err());
        assert!(SimBox::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn box_volume_and_membership() {
        let b = SimBox::new(vec![0.0, 1.0], vec![2.0, 4.0]).unwrap();
        assert!((b.volume() - 6.0).abs() < 1e-15);
        assert!(b.contains(&[1.0, 2.0]));
        assert!(!b.contains(&[3.0, 2.0]));
    }
}
