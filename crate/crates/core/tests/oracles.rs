//! Kernel results checked against nalgebra's dense decompositions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repbandit::linalg::{
    argmax_unit_ball, dot, least_squares, subspace_distance, top_k_left_singular_vectors, Matrix, OrthonormalBasis,
};
use repbandit::Real;

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| f64::standard_normal(rng))
}

fn to_na(a: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

/// Top-k eigenvectors of `A·Aᵀ` from nalgebra's symmetric eigensolver.
fn oracle_left_subspace(a: &Matrix<f64>, k: usize) -> OrthonormalBasis<f64> {
    let na = to_na(a);
    let eig = (&na * na.transpose()).symmetric_eigen();
    let mut order: Vec<usize> = (0..a.rows()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
    let cols: Vec<Vec<f64>> = order[..k]
        .iter()
        .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
        .collect();
    OrthonormalBasis::new(Matrix::from_columns(a.rows(), &cols).unwrap()).unwrap()
}

#[test]
fn svd_matches_dense_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let rows = rng.random_range(3..12);
        let cols = rng.random_range(2..30);
        let k = rng.random_range(1..rows.min(cols) + 1);
        let a = random_matrix(rows, cols, &mut rng);
        let ours = top_k_left_singular_vectors(&a, k).unwrap();
        let oracle = oracle_left_subspace(&a, k);
        let dist = subspace_distance(&ours, &oracle).unwrap();
        assert!(dist <= 1e-8, "{rows}x{cols} k={k}: {dist}");
    }
}

#[test]
fn six_by_eight_top_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_matrix(6, 8, &mut rng);
    let d = subspace_distance(&top_k_left_singular_vectors(&a, 3).unwrap(), &oracle_left_subspace(&a, 3)).unwrap();
    assert!(d <= 1e-8);
}

#[test]
fn least_squares_matches_pseudo_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let cols = rng.random_range(1..8);
        let rows = cols + rng.random_range(0..20);
        let x = random_matrix(rows, cols, &mut rng);
        let y: Vec<f64> = (0..rows).map(|_| f64::standard_normal(&mut rng)).collect();
        let ours = least_squares(&x, &y).unwrap();
        let pinv = to_na(&x).pseudo_inverse(1e-14).unwrap();
        let oracle = pinv * DVector::from_column_slice(&y);
        for j in 0..cols {
            assert!((ours[j] - oracle[j]).abs() <= 1e-8, "{} vs {}", ours[j], oracle[j]);
        }
    }
}

#[test]
fn argmax_matches_sphere_grid() {
    // Fibonacci lattice with 10⁵ points on S².
    let n = 100_000;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let grid: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let scale = rng.random_range(0.1..5.0);
        let theta: Vec<f64> = (0..3).map(|_| scale * f64::standard_normal(&mut rng)).collect();
        let ours = dot(&argmax_unit_ball(&theta), &theta);
        let brute = grid.iter().map(|p| dot(p, &theta)).fold(f64::NEG_INFINITY, f64::max);
        assert!(ours >= brute - 1e-12);
        assert!((ours - brute) / scale.max(1.0) <= 1e-3);
    }
}
