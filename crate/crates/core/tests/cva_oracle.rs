mod common;

use common::{max_abs_diff, norm, random_bank, rng, svd_common_vector};
use commonbg::cva::{
    average_vector, bank_basis, common_vector, common_vector_via_average, discriminative_common_vector,
    project_onto_basis, DEFAULT_DROP_TOL,
};
use commonbg::{DifferenceProjector, Frame};
use proptest::prelude::*;
use rand::Rng;

fn toy_bank() -> Vec<Frame> {
    [[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, 5.0, 5.0]]
        .iter()
        .map(|a| Frame::from_vec(a.to_vec()).unwrap())
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
#[allow(clippy::approx_constant)]
fn toy_distances_separate_the_outlier() {
    let bank = toy_bank();
    let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
    let com = common_vector(&bank, &basis, 0).unwrap();
    let ave = average_vector(&bank).unwrap();
    let to_com: Vec<f64> = bank
        .iter()
        .map(|a| dist(a.as_slice(), com.as_frame().as_slice()))
        .collect();
    let to_ave: Vec<f64> = bank.iter().map(|a| dist(a.as_slice(), ave.as_slice())).collect();
    for (got, want) in to_com.iter().zip([1.4142, 1.4142, 7.0711]) {
        assert!((got - want).abs() < 1e-3, "common distances {to_com:?}");
    }
    for (got, want) in to_ave.iter().zip([1.4907, 2.9814, 4.2687]) {
        assert!((got - want).abs() < 1e-3, "average distances {to_ave:?}");
    }
    assert!(to_com[2] > to_com[0] && (to_com[0] - to_com[1]).abs() < 1e-12);
}

#[test]
fn toy_test_vector_residual_is_the_common_vector() {
    let bank = toy_bank();
    let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
    let dcv = discriminative_common_vector(&bank[2], &basis).unwrap();
    assert!(max_abs_diff(dcv.as_frame().as_slice(), &[1.0, 0.0, 0.0]) < 1e-12);
}

#[test]
fn svd_oracle_on_random_instances() {
    let mut r = rng(11);
    for _ in 0..200 {
        let p = r.random_range(3..=50);
        let k = r.random_range(2..=10);
        let mut bank = random_bank(&mut r, k, p, 1);
        if r.random_bool(0.2) && k > 2 {
            bank[k - 1] = bank[1].clone();
        }
        let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
        let com = common_vector(&bank, &basis, 0).unwrap();
        let oracle = svd_common_vector(&bank);
        let scale = norm(bank[0].as_slice()).max(1.0);
        let err = max_abs_diff(com.as_frame().as_slice(), &oracle) / scale;
        assert!(err <= 1e-8, "p={p} k={k}: relative error {err:e}");
    }
}

#[test]
fn reference_choice_is_immaterial() {
    let mut r = rng(12);
    let bank = random_bank(&mut r, 6, 30, 1);
    let from0 = common_vector(&bank, &bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap(), 0).unwrap();
    let from3 = common_vector(&bank, &bank_basis(&bank, 3, DEFAULT_DROP_TOL).unwrap(), 3).unwrap();
    let scale = norm(bank[0].as_slice());
    assert!(max_abs_diff(from0.as_frame().as_slice(), from3.as_frame().as_slice()) <= 1e-9 * scale);
}

#[test]
fn decomposition_identity_holds_for_every_member() {
    let mut r = rng(13);
    let bank = random_bank(&mut r, 8, 12, 10);
    let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
    let com = common_vector(&bank, &basis, 0).unwrap();
    for a in &bank {
        let diff = project_onto_basis(a, &basis).unwrap();
        let rebuilt: Vec<f64> = com
            .as_frame()
            .as_slice()
            .iter()
            .zip(diff.as_slice())
            .map(|(c, d)| c + d)
            .collect();
        let err = dist(a.as_slice(), &rebuilt);
        assert!(err <= 1e-6 * norm(a.as_slice()), "reconstruction error {err:e}");
    }
}

#[test]
fn average_route_agrees() {
    let mut r = rng(14);
    let bank = random_bank(&mut r, 7, 40, 1);
    let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
    let a = common_vector(&bank, &basis, 0).unwrap();
    let b = common_vector_via_average(&bank, &basis).unwrap();
    let scale = norm(a.as_frame().as_slice());
    assert!(max_abs_diff(a.as_frame().as_slice(), b.as_frame().as_slice()) <= 1e-9 * scale);
}

#[test]
fn large_bank_basis_stays_orthonormal() {
    let mut r = rng(15);
    // near-duplicate frames stress the reorthogonalization
    let base = random_bank(&mut r, 1, 64, 48).remove(0);
    let bank: Vec<Frame> = (0..35)
        .map(|_| {
            let data = base.as_slice().iter().map(|v| v + r.random_range(-1.0..1.0)).collect();
            Frame::new(64, 48, data).unwrap()
        })
        .collect();
    let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
    assert_eq!(basis.len(), 34);
    let zs: Vec<&[f64]> = basis.vectors().collect();
    for i in 0..zs.len() {
        assert!((norm(zs[i]) - 1.0).abs() <= 1e-9);
        for j in 0..i {
            let d: f64 = zs[i].iter().zip(zs[j]).map(|(a, b)| a * b).sum();
            assert!(d.abs() <= 1e-8, "z{i}.z{j} = {d:e}");
        }
    }
}

#[test]
fn projector_matches_gram_schmidt_route() {
    let mut r = rng(16);
    let bank = random_bank(&mut r, 12, 20, 15);
    let proj = DifferenceProjector::new(&bank, DEFAULT_DROP_TOL).unwrap();
    let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
    let com = common_vector(&bank, &basis, 0).unwrap();
    assert!(max_abs_diff(proj.common_vector().as_slice(), com.as_frame().as_slice()) < 1e-9);
    assert!(max_abs_diff(proj.common_vector().as_slice(), &svd_common_vector(&bank)) < 1e-9);
    for a in &bank {
        let res = proj.residual(a).unwrap();
        assert!(max_abs_diff(res.as_slice(), com.as_frame().as_slice()) < 1e-9);
    }
}

proptest! {
    #[test]
    fn residual_is_orthogonal_and_complementary(
        seed in any::<u64>(),
        k in 2usize..8,
        p in 4usize..30,
    ) {
        let mut r = rng(seed);
        let bank = random_bank(&mut r, k, p, 1);
        let test = random_bank(&mut r, 1, p, 1).remove(0);
        let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
        let dcv = discriminative_common_vector(&test, &basis).unwrap();
        let scale = norm(test.as_slice());
        for z in basis.vectors() {
            let d: f64 = z.iter().zip(dcv.as_frame().as_slice()).map(|(a, b)| a * b).sum();
            prop_assert!(d.abs() <= 1e-9 * scale);
        }
        // test - residual lies in the span: projecting it again changes nothing
        let removed: Vec<f64> = test.as_slice().iter().zip(dcv.as_frame().as_slice()).map(|(a, b)| a - b).collect();
        let removed = Frame::from_vec(removed).unwrap();
        let again = project_onto_basis(&removed, &basis).unwrap();
        prop_assert!(max_abs_diff(again.as_slice(), removed.as_slice()) <= 1e-9 * scale);
    }

    #[test]
    fn bank_members_share_one_common_vector(seed in any::<u64>(), k in 2usize..7) {
        let mut r = rng(seed);
        let bank = random_bank(&mut r, k, 25, 1);
        let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
        let com = common_vector(&bank, &basis, 0).unwrap();
        for a in &bank {
            let dcv = discriminative_common_vector(a, &basis).unwrap();
            prop_assert!(max_abs_diff(dcv.as_frame().as_slice(), com.as_frame().as_slice()) <= 1e-9 * norm(a.as_slice()));
        }
    }
}
