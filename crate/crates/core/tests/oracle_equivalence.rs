//! Layered evaluation against the recursive construction record.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use squashnet_core::*;

use common::*;

const SIGMA: SquashingFunction = SquashingFunction::Logistic;

fn assert_agrees(c: &Construction, rng: &mut ChaCha8Rng, points: usize) {
    let dim = c.network.input_dim();
    for _ in 0..points {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..1.5)).collect();
        let layered = c.network.evaluate(&x).unwrap();
        let recursive = eval_term(&c.term, c.network.sigma(), &x);
        assert!(
            (layered - recursive).abs() <= 1e-12,
            "{layered} vs {recursive} at {x:?}"
        );
    }
}

#[test]
fn nested_two_hidden_layer_construction() {
    // σ(s2 + t2·(c0 + Σ c_j σ(s1 + t1·f_j))) built through the algebra
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let maps: Vec<AffineMap> = (0..4)
        .map(|_| {
            AffineMap::new(
                rng.gen_range(-1.0..1.0),
                vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            )
        })
        .collect();
    let (s1, t1) = (0.3, 1.7);
    let coeffs = [0.5, -1.25, 2.0, 0.75];
    let inner: Vec<LayeredNetwork> = maps
        .iter()
        .map(|m| {
            LayeredNetwork::affine(m, SIGMA)
                .unwrap()
                .squash_affine_of(s1, t1)
                .unwrap()
        })
        .collect();
    let refs: Vec<&LayeredNetwork> = inner.iter().collect();
    let g = affine_combine(&refs, &coeffs, -0.4).unwrap();
    let big = g.squash_affine_of(-0.2, 3.0).unwrap();
    let two_layer = affine_combine(&[&big, &big], &[1.0, 0.5], 0.1).unwrap();
    assert_eq!(two_layer.depth(), 3);

    let term_g = Term::Sum {
        bias: -0.4,
        terms: maps
            .iter()
            .zip(coeffs)
            .map(|(m, c)| (c, Term::gate(Term::Affine(m.clone()), s1, t1)))
            .collect(),
    };
    let term_big = Term::gate(term_g, -0.2, 3.0);
    let term = Term::Sum {
        bias: 0.1,
        terms: vec![(1.0, term_big.clone()), (0.5, term_big)],
    };
    assert_agrees(
        &Construction {
            network: two_layer,
            term,
        },
        &mut rng,
        100,
    );
}

#[test]
fn separators_agree_with_their_records() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let domain = fine_square();
    let (set, x0) = point_set_instance(&mut rng, &domain);
    let g = separate_point_from_set(&x0, &set, 0.1, &SIGMA).unwrap();
    assert_agrees(&g.into_construction(), &mut rng, 100);

    let (a, b) = cluster_pair(&mut rng, &domain, 12, 0.1);
    let h = separate_sets_affine(&a, &b, 0.1, &SIGMA).unwrap();
    assert_agrees(&h.into_construction(), &mut rng, 100);
    let big_h = separate_sets_squashed(&a, &b, 1.0 / 6.0, &SIGMA).unwrap();
    assert_agrees(&big_h.into_construction(), &mut rng, 100);
    let empty = PointSet::empty(&domain);
    let constant = separate_sets_squashed(&empty, &b, 1.0 / 6.0, &SIGMA).unwrap();
    assert_agrees(&constant.into_construction(), &mut rng, 20);
}

#[test]
fn lifted_separator_matches_recursive_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let domain = fine_square();
    let (set, x0) = point_set_instance(&mut rng, &domain);
    let g = separate_point_from_set(&x0, &set, 0.1, &SIGMA).unwrap();
    let squashed = g.network.squash_affine_of(0.0, 1.0).unwrap();
    let lifted = squashed.lift().unwrap();
    let term = Term::gate(g.term, 0.0, 1.0);
    assert_agrees(
        &Construction {
            network: lifted,
            term,
        },
        &mut rng,
        50,
    );
}

#[test]
fn approximants_agree_with_their_records() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let domain = GridDomain::unit_cube(2, 9).unwrap();
    let target = TargetFunction::MaxOfCoordinates;
    let run = approximate(&target, &domain, 0.1, &SIGMA, 0.85, 50).unwrap();
    assert!(!run.trace.iterations.is_empty());
    assert_agrees(&run.approximant, &mut rng, 100);
}
