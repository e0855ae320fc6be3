//! Shared test helpers: an evaluator for construction records that follows
//! the recursive definition directly (no matrices), and random instance
//! generators for the separation suites.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use squashnet_core::{GridDomain, PointSet, SquashingFunction, Term};

/// Evaluates a construction record by recursion on its structure.
pub fn eval_term(term: &Term, sigma: &SquashingFunction, x: &[f64]) -> f64 {
    match term {
        Term::Affine(map) => {
            let mut v = map.bias;
            for (w, xi) in map.weights.iter().zip(x) {
                v += w * xi;
            }
            v
        }
        Term::Squash(inner) => sigma.value(eval_term(inner, sigma, x)).unwrap(),
        Term::Sum { bias, terms } => terms
            .iter()
            .fold(*bias, |acc, (c, t)| acc + c * eval_term(t, sigma, x)),
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// 101 × 101 grid on the unit square.
pub fn fine_square() -> GridDomain {
    GridDomain::unit_cube(2, 101).unwrap()
}

pub fn random_box_point(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect()
}

/// Up to 50 random grid points of `domain` and a point at distance at least
/// 0.05 from all of them.
pub fn point_set_instance(rng: &mut impl Rng, domain: &GridDomain) -> (PointSet, Vec<f64>) {
    let size = rng.gen_range(1..=50);
    point_set_of_size(rng, domain, size)
}

pub fn point_set_of_size(
    rng: &mut impl Rng,
    domain: &GridDomain,
    size: usize,
) -> (PointSet, Vec<f64>) {
    loop {
        let mut all: Vec<usize> = (0..domain.len()).collect();
        all.shuffle(rng);
        all.truncate(size);
        let set = PointSet::from_indices(domain, all).unwrap();
        for _ in 0..200 {
            let x0 = random_box_point(rng, domain.dim());
            if set.points().iter().all(|b| dist(b, &x0) >= 0.05) {
                return (set, x0);
            }
        }
    }
}

fn cluster(
    rng: &mut impl Rng,
    domain: &GridDomain,
    center: &[f64],
    radius: f64,
    size: usize,
) -> Option<PointSet> {
    let candidates: Vec<usize> = (0..domain.len())
        .filter(|&i| dist(&domain.point(i), center) <= radius)
        .collect();
    if candidates.len() < size {
        return None;
    }
    let chosen: Vec<usize> = candidates.choose_multiple(rng, size).copied().collect();
    Some(PointSet::from_indices(domain, chosen).unwrap())
}

/// Two clusters of `size` grid points each, every cross pair at distance at
/// least `gap`.
pub fn cluster_pair(
    rng: &mut impl Rng,
    domain: &GridDomain,
    size: usize,
    gap: f64,
) -> (PointSet, PointSet) {
    loop {
        let ca = random_box_point(rng, 2);
        let cb = random_box_point(rng, 2);
        let radius = rng.gen_range(0.06..0.2);
        let (Some(a), Some(b)) = (
            cluster(rng, domain, &ca, radius, size),
            cluster(rng, domain, &cb, radius, size),
        ) else {
            continue;
        };
        let min = a
            .points()
            .iter()
            .flat_map(|p| b.points().iter().map(move |q| dist(p, q)))
            .fold(f64::INFINITY, f64::min);
        if min >= gap {
            return (a, b);
        }
    }
}

/// Random grid indices of `domain`.
pub fn random_grid_points(rng: &mut impl Rng, domain: &GridDomain, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| domain.point(rng.gen_range(0..domain.len())))
        .collect()
}
