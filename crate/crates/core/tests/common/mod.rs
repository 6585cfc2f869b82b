//! Helpers shared by the integration suites.

use rayon::prelude::*;

use spherenorm::linalg::{spectral_norm_matrix, Matrix};
use spherenorm::rng::Rng;
use spherenorm::tensor::DenseTensor;

pub fn random_tensor(shape: &[usize], seed: u64) -> DenseTensor {
    let mut rng = Rng::new(seed);
    let len: usize = shape.iter().product();
    DenseTensor::new(shape.to_vec(), rng.normal_vec(len)).unwrap()
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn heap(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(cur, k - 1, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    heap(&mut cur, d, &mut out);
    out
}

/// Symmetrizes a seeded random cubical tensor by averaging over all index
/// permutations.
pub fn random_symmetric(n: usize, d: usize, seed: u64) -> DenseTensor {
    let t = random_tensor(&vec![n; d], seed);
    let perms = permutations(d);
    let mut out = DenseTensor::zeros(vec![n; d]).unwrap();
    let strides: Vec<usize> = {
        let mut s = vec![1usize; d];
        for k in (0..d - 1).rev() {
            s[k] = s[k + 1] * n;
        }
        s
    };
    let mut idx = vec![0usize; d];
    for flat in 0..t.data().len() {
        let mut acc = 0.0;
        for p in &perms {
            let mut src = 0;
            for (k, &pk) in p.iter().enumerate() {
                src += idx[pk] * strides[k];
            }
            acc += t.data()[src];
        }
        out.data_mut()[flat] = acc / perms.len() as f64;
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// Brute-force lower bound on the spectral norm of an order-3 tensor:
/// seeded sphere samples on the first mode, the last two modes closed
/// exactly by the matrix spectral norm.
pub fn sampled_spectral_oracle(t: &DenseTensor, samples: usize, seed: u64) -> f64 {
    let n = t.shape()[0];
    let rows = t.shape()[1];
    let cols = t.shape()[2];
    (0..samples)
        .into_par_iter()
        .map(|j| {
            let x = Rng::derive(seed, j as u64).unit_vector(n);
            let mut slice = vec![0.0f64; rows * cols];
            for (i, &w) in x.iter().enumerate() {
                let off = i * rows * cols;
                for (s, &v) in slice.iter_mut().zip(&t.data()[off..off + rows * cols]) {
                    *s += w * v;
                }
            }
            let m = Matrix::new(rows, cols, slice).unwrap();
            spectral_norm_matrix(&m).unwrap().0
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}
