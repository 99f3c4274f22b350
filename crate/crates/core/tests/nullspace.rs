mod common;

use common::{gauss_rank, rng, to_rows};
use nullspace_core::linalg::{Matrix, Vector};
use nullspace_core::network::{Activation, Layer, Network};
use nullspace_core::nullspace::{
    check_mapped_to_single_point, verify_direction, verify_null_property, NetworkNullSpace,
};
use proptest::prelude::*;
use rand::Rng;

fn random_net(widths: &[usize], seed: u64) -> Network<f64> {
    Network::random(widths, Activation::Relu, &mut rng(seed)).unwrap()
}

fn random_input(n: usize, r: &mut impl Rng) -> Vector<f64> {
    Vector::new((0..n).map(|_| r.random_range(-1.0..=1.0)).collect())
}

#[test]
fn nullity_of_small_net_matches_elimination() {
    let net = random_net(&[6, 2, 2], 41);
    let ns = NetworkNullSpace::extract(&net).unwrap();
    let rank = gauss_rank(&to_rows(net.first_layer_weights()), 1e-10);
    assert_eq!(rank, 2);
    assert_eq!(ns.dim(), 6 - rank);
    assert_eq!(ns.rank_of_first_layer(), rank);
}

#[test]
fn identity_first_layer_has_trivial_null_space() {
    let l1 = Layer::new(Matrix::identity(4), Vector::zeros(4)).unwrap();
    let l2 = Layer::new(Matrix::from_fn(2, 4, |i, j| (i + j) as f64), Vector::zeros(2)).unwrap();
    let net = Network::new(vec![l1, l2], Activation::Relu).unwrap();
    let ns = NetworkNullSpace::extract(&net).unwrap();
    assert!(ns.is_trivial());
    let rep = verify_null_property(&net, &ns, 10, (-10.0, 10.0), 0).unwrap();
    assert!(rep.trivial);
}

#[test]
fn every_basis_vector_is_a_null_direction() {
    let net = random_net(&[20, 6, 5, 3], 42);
    let ns = NetworkNullSpace::extract(&net).unwrap();
    assert_eq!(ns.dim(), 14);
    for v in ns.basis().vectors() {
        let rep = verify_direction(&net, v, 20, (-10.0, 10.0), 7).unwrap();
        assert!(rep.max_output_deviation <= 1e-9);
        assert_eq!(rep.argmax_flips, 0);
    }
}

#[test]
fn row_space_direction_moves_the_output() {
    let net = random_net(&[20, 6, 5, 3], 43);
    let w1 = net.first_layer_weights();
    let row = w1.row_vector(0);
    let v = row.scale(1.0 / row.norm());
    let rep = verify_direction(&net, &v, 50, (-10.0, 10.0), 8).unwrap();
    assert!(
        rep.max_output_deviation > 1e-3,
        "control moved only {}",
        rep.max_output_deviation
    );
}

#[test]
fn null_members_share_one_output() {
    let net = random_net(&[30, 8, 4], 44);
    let ns = NetworkNullSpace::extract(&net).unwrap();
    let rep = check_mapped_to_single_point(&net, &ns, 100, 9).unwrap();
    assert!(rep.max_pair_deviation <= 1e-9);
    assert!(rep.max_origin_deviation <= 1e-9);
}

#[test]
fn projectors_sum_to_identity() {
    let net = random_net(&[25, 7, 3], 45);
    let ns = NetworkNullSpace::extract(&net).unwrap();
    let sum = ns.row_projector().add(ns.null_projector()).unwrap();
    assert!(sum.sub(&Matrix::identity(25)).unwrap().max_abs() <= 1e-9);
    let w1 = net.first_layer_weights();
    let scale = w1.frobenius_norm();
    for v in ns.basis().vectors() {
        assert!(w1.matvec(v).unwrap().norm() <= 1e-9 * scale);
    }
}

#[test]
fn extraction_is_deterministic() {
    let net = random_net(&[40, 10, 5], 46);
    let a = NetworkNullSpace::extract(&net).unwrap();
    let b = NetworkNullSpace::extract(&net).unwrap();
    assert_eq!(a.null_projector(), b.null_projector());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_is_orthogonal_and_idempotent(seed in 0u64..10_000, x_seed in 0u64..10_000) {
        let net = random_net(&[16, 5, 3], seed);
        let ns = NetworkNullSpace::extract(&net).unwrap();
        let x = random_input(16, &mut rng(x_seed));
        let d = ns.decompose(&x).unwrap();
        let sum = d.null_part.add(&d.perp_part).unwrap();
        prop_assert!(sum.max_abs_diff(&x).unwrap() <= 1e-12 * x.norm_inf().max(1.0));
        prop_assert!(d.null_part.dot(&d.perp_part).unwrap().abs() <= 1e-9 * x.norm().powi(2).max(1.0));

        let again = ns.decompose(&d.perp_part).unwrap();
        prop_assert!(again.null_part.norm_inf() <= 1e-9);
        prop_assert!(again.perp_part.max_abs_diff(&d.perp_part).unwrap() <= 1e-9);
    }

    #[test]
    fn null_space_is_closed_under_combination(
        seed in 0u64..10_000,
        sample in 0u64..10_000,
        c in -10.0f64..10.0,
    ) {
        let net = random_net(&[12, 4, 4, 3], seed);
        let ns = NetworkNullSpace::extract(&net).unwrap();
        let mut r = rng(sample);
        let x = random_input(12, &mut r);
        let u = ns.random_member(&mut r);
        let w = ns.random_member(&mut r);
        let moved = x.add(&u).unwrap().add_scaled(c, &w).unwrap();
        let gap = net.forward(&x).unwrap().max_abs_diff(&net.forward(&moved).unwrap()).unwrap();
        prop_assert!(gap <= 1e-9);
    }

    #[test]
    fn nullity_is_input_width_minus_rank(n0 in 2usize..30, n1 in 1usize..12, seed in 0u64..1000) {
        let net = random_net(&[n0, n1, 2], seed);
        let ns = NetworkNullSpace::extract(&net).unwrap();
        prop_assert_eq!(ns.dim(), n0 - n0.min(n1));
        prop_assert!(ns.basis().orthonormality_error() <= 1e-10);
    }
}
