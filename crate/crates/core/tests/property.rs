//! Property tests for the tensor algebra and the spectral-ball projection.

use proptest::prelude::*;

use spherenorm::linalg::{project_spectral_ball, spectral_norm_matrix, Matrix};
use spherenorm::tensor::{
    frobenius_inner, multilinear_form, partial_contract, DenseTensor, ModeAssignment,
};

fn tensor_strategy(max_dim: usize, order: usize) -> impl Strategy<Value = DenseTensor> {
    prop::collection::vec(1..=max_dim, order).prop_flat_map(|shape| {
        let len: usize = shape.iter().product();
        prop::collection::vec(-1.0f64..1.0, len)
            .prop_map(move |data| DenseTensor::new(shape.clone(), data).unwrap())
    })
}

/// Tensor together with one vector per mode.
fn tensor_with_vectors(
    max_dim: usize,
    order: usize,
) -> impl Strategy<Value = (DenseTensor, Vec<Vec<f64>>)> {
    prop::collection::vec(1..=max_dim, order).prop_flat_map(|shape| {
        let len: usize = shape.iter().product();
        let vecs: Vec<_> = shape
            .iter()
            .map(|&n| prop::collection::vec(-1.0f64..1.0, n))
            .collect();
        (prop::collection::vec(-1.0f64..1.0, len), vecs)
            .prop_map(move |(data, xs)| (DenseTensor::new(shape.clone(), data).unwrap(), xs))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn form_equals_frobenius_of_outer((t, xs) in tensor_with_vectors(6, 3)) {
        let form = multilinear_form(&t, &xs).unwrap();
        let outer = DenseTensor::outer(&xs).unwrap();
        let fro = frobenius_inner(&t, &outer).unwrap();
        prop_assert!((form - fro).abs() <= 1e-12 * form.abs().max(1.0));
    }

    #[test]
    fn form_is_linear_in_first_mode(
        t in tensor_strategy(5, 3),
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let shape = t.shape().to_vec();
        let mut rng = spherenorm::rng::Rng::new(99);
        let x: Vec<f64> = (0..shape[0]).map(|_| rng.next_normal()).collect();
        let y: Vec<f64> = (0..shape[0]).map(|_| rng.next_normal()).collect();
        let x2: Vec<f64> = (0..shape[1]).map(|_| rng.next_normal()).collect();
        let x3: Vec<f64> = (0..shape[2]).map(|_| rng.next_normal()).collect();
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = multilinear_form(&t, &[mixed, x2.clone(), x3.clone()]).unwrap();
        let fx = multilinear_form(&t, &[x, x2.clone(), x3.clone()]).unwrap();
        let fy = multilinear_form(&t, &[y, x2, x3]).unwrap();
        let rhs = alpha * fx + beta * fy;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn contract_then_dot_reproduces_form(t in tensor_strategy(5, 3), hole in 0usize..3) {
        let shape = t.shape().to_vec();
        let mut rng = spherenorm::rng::Rng::new(7);
        let xs: Vec<Vec<f64>> = shape.iter().map(|&n| rng.unit_vector(n)).collect();
        let others: Vec<Vec<f64>> = (0..3).filter(|&k| k != hole).map(|k| xs[k].clone()).collect();
        let assign = ModeAssignment::with_holes(3, &[hole], &others).unwrap();
        let v = partial_contract(&t, &assign).unwrap();
        let dot: f64 = v.data().iter().zip(&xs[hole]).map(|(a, b)| a * b).sum();
        let form = multilinear_form(&t, &xs).unwrap();
        prop_assert!((dot - form).abs() <= 1e-12 * form.abs().max(1.0));
    }

    #[test]
    fn projection_lands_inside_ball(
        data in prop::collection::vec(-3.0f64..3.0, 16),
    ) {
        let a = Matrix::new(4, 4, data).unwrap();
        let p = project_spectral_ball(&a).unwrap();
        let (s, _, _) = spectral_norm_matrix(&p).unwrap();
        prop_assert!(s <= 1.0 + 1e-10);
    }

    #[test]
    fn projection_nonexpansive(
        a_data in prop::collection::vec(-3.0f64..3.0, 9),
        b_data in prop::collection::vec(-3.0f64..3.0, 9),
    ) {
        let a = Matrix::new(3, 3, a_data).unwrap();
        let b = Matrix::new(3, 3, b_data).unwrap();
        let pa = project_spectral_ball(&a).unwrap();
        let pb = project_spectral_ball(&b).unwrap();
        prop_assert!(pa.sub(&pb).frobenius_norm() <= a.sub(&b).frobenius_norm() + 1e-10);
    }
}
