#![allow(dead_code)]

use pursuit_core::geometry::Point;
use pursuit_core::model::{ConstraintClass, Pursuer, Scenario};
use rand::Rng;

pub fn pt(v: &[f64]) -> Point {
    Point::new(v.to_vec()).unwrap()
}

pub fn random_point<R: Rng>(d: usize, scale: f64, rng: &mut R) -> Point {
    Point::new((0..d).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

/// Scenario with `n` pursuers of random class in dimension `d`.
pub fn random_scenario<R: Rng>(d: usize, n: usize, rng: &mut R) -> Scenario {
    let theta = rng.random_range(0.5..4.0);
    let sigma = rng.random_range(0.5..2.0);
    let y0 = random_point(d, 1.0, rng);
    let pursuers = (0..n)
        .map(|i| {
            let constraint = if rng.random_bool(0.5) {
                ConstraintClass::integral(rng.random_range(0.3..2.0))
            } else {
                ConstraintClass::geometric(rng.random_range(0.3..2.0))
            };
            Pursuer { id: i as u64, x0: random_point(d, 4.0, rng), constraint }
        })
        .collect();
    Scenario::new(d, theta, sigma, y0, pursuers).unwrap()
}

pub fn single_pursuer<R: Rng>(d: usize, constraint: ConstraintClass, sigma: f64, rng: &mut R) -> Scenario {
    let theta = rng.random_range(0.5..3.0);
    let y0 = random_point(d, 1.0, rng);
    let x0 = random_point(d, 2.0, rng);
    Scenario::new(d, theta, sigma, y0, vec![Pursuer { id: 0, x0, constraint }]).unwrap()
}
