//! Finite-dimensional truncation of ℓ₂: points, balls, spheres and half-spaces.
//!
//! Every statement of the game is implemented in `R^d` for a scenario-chosen
//! truncation dimension `d`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for analytic containment checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A dense vector in the `d`-dimensional truncation of ℓ₂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Builds a point, rejecting NaN/Inf coordinates and empty vectors.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates".into()));
        }
        Ok(Point(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// Scaled basis vector `value · e_index`.
    pub fn axis(dim: usize, index: usize, value: f64) -> Self {
        let mut p = Point::zeros(dim);
        p.0[index] = value;
        p
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Inner product; callers guarantee equal dimensions.
    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + scale · dir`, in place.
    pub fn axpy(&mut self, scale: f64, dir: &Point) {
        debug_assert_eq!(self.dim(), dir.dim());
        for (a, b) in self.0.iter_mut().zip(&dir.0) {
            *a += scale * b;
        }
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0).then(|| self.scaled(1.0 / n))
    }

    fn check_dim(&self, other: &Point) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add<&Point> for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        debug_assert_eq!(self.dim(), rhs.dim());
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&Point> for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        debug_assert_eq!(self.dim(), rhs.dim());
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        self.scaled(rhs)
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.scaled(-1.0)
    }
}

impl AddAssign<&Point> for Point {
    fn add_assign(&mut self, rhs: &Point) {
        self.axpy(1.0, rhs);
    }
}

/// `Σ a_k b_k`, rejecting mismatched dimensions.
pub fn inner(a: &Point, b: &Point) -> Result<f64> {
    a.check_dim(b)?;
    Ok(a.dot(b))
}

pub fn norm(a: &Point) -> f64 {
    a.norm()
}

/// Closed ball `B(center, radius)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("ball radius {radius} must be finite and >= 0")));
        }
        Ok(Ball { center, radius })
    }

    /// Nearest point of the ball to `z`.
    pub fn project(&self, z: &Point) -> Point {
        let offset = z - &self.center;
        let d = offset.norm();
        if d <= self.radius {
            z.clone()
        } else {
            let mut p = self.center.clone();
            p.axpy(self.radius / d, &offset);
            p
        }
    }
}

pub fn ball_contains(b: &Ball, z: &Point, tol: f64) -> bool {
    b.center.dist(z) <= b.radius + tol
}

/// The set `{z : 2(normal, z) <= offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Point,
    pub offset: f64,
}

impl HalfSpace {
    /// Signed violation `2(normal, z) − offset`; non-positive inside.
    pub fn excess(&self, z: &Point) -> f64 {
        2.0 * self.normal.dot(z) - self.offset
    }
}

pub fn halfspace_contains(h: &HalfSpace, z: &Point, tol: f64) -> bool {
    h.excess(z) <= tol
}

/// Seeded sample of the sphere `S(center, radius)` from normalized Gaussian draws.
pub fn sphere_sample(center: &Point, radius: f64, count: usize, seed: u64) -> Vec<Point> {
    let d = center.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            if radius == 0.0 {
                return center.clone();
            }
            let dir = random_unit(d, &mut rng);
            let mut p = center.clone();
            p.axpy(radius, &dir);
            p
        })
        .collect()
}

/// Uniformly distributed unit vector.
pub(crate) fn random_unit<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Point {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let g = Point(g);
        let n = g.norm();
        if n > 1e-300 {
            return g.scaled(1.0 / n);
        }
    }
}

/// Uniformly distributed point of the ball `B(center, radius)`.
pub(crate) fn random_in_ball<R: rand::Rng + ?Sized>(center: &Point, radius: f64, rng: &mut R) -> Point {
    let d = center.dim();
    let dir = random_unit(d, rng);
    let u: f64 = rng.random();
    let mut p = center.clone();
    p.axpy(radius * u.powf(1.0 / d as f64), &dir);
    p
}
