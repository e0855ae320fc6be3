//! Deterministic fixtures shared by the benchmarks.

use squashnet_core::{GridDomain, PointSet};

/// Grid points of `domain` inside the disc of `radius` around `center`.
pub fn disc(domain: &GridDomain, center: &[f64], radius: f64) -> PointSet {
    let indices = (0..domain.len())
        .filter(|&i| {
            let p = domain.point(i);
            let d2: f64 = p.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 <= radius * radius
        })
        .collect();
    PointSet::from_indices(domain, indices).expect("indices come from the grid")
}

/// Two discs of roughly `size` points each on a 101 × 101 unit-square grid,
/// far enough apart for any separation tolerance.
pub fn cluster_pair(size: usize) -> (PointSet, PointSet) {
    let domain = GridDomain::unit_cube(2, 101).expect("valid grid");
    // a disc of radius r holds about π r² 10⁴ grid points
    let radius = (size as f64 / (std::f64::consts::PI * 1e4))
        .sqrt()
        .max(0.005);
    (
        disc(&domain, &[0.25, 0.3], radius),
        disc(&domain, &[0.75, 0.7], radius),
    )
}

/// Square membership matrix: candidate `c` covers target `t` when
/// `(7t + 3c) mod 5 != 0` or `c == t`.
pub fn cover_instance(n: usize) -> Vec<Vec<bool>> {
    (0..n)
        .map(|c| (0..n).map(|t| (7 * t + 3 * c) % 5 != 0 || c == t).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_disjoint_and_sized() {
        let (a, b) = cluster_pair(40);
        assert!(a.first_common_point(&b).is_none());
        assert!(a.len() >= 20 && b.len() >= 20);
        let m = cover_instance(64);
        assert!(squashnet_core::greedy_cover(&m).is_ok());
    }
}
