use featopt::numerics::{standardize, sym_eigen, Matrix, RandomStream};
use proptest::prelude::*;

fn random_symmetric(n: usize, rng: &mut RandomStream) -> Matrix {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.uniform(-1.0, 1.0);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Matrix::from_vec(n, n, data).unwrap()
}

#[test]
fn eigen_residual_orthonormality_and_reconstruction() {
    let mut rng = RandomStream::new(2024, 7);
    for _ in 0..20 {
        let a = random_symmetric(20, &mut rng);
        let eig = sym_eigen(&a).unwrap();
        let v = &eig.eigenvectors;
        for w in eig.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
        for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
            let col = v.column(c);
            for i in 0..20 {
                let av: f64 = (0..20).map(|j| a[(i, j)] * col[j]).sum();
                assert!((av - lambda * col[i]).abs() < 1e-8);
            }
        }
        let vtv = v.transpose().matmul(v).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[(i, j)] - expect).abs() < 1e-8);
            }
        }
        for i in 0..20 {
            for j in 0..20 {
                let r: f64 = (0..20)
                    .map(|k| v[(i, k)] * eig.eigenvalues[k] * v[(j, k)])
                    .sum();
                assert!((r - a[(i, j)]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn million_draws_repeat_exactly() {
    let mut a = RandomStream::new(0xDEAD_BEEF, 3);
    let mut b = RandomStream::new(0xDEAD_BEEF, 3);
    for _ in 0..1_000_000 {
        assert_eq!(a.next_u64(), b.next_u64());
    }
}

#[test]
fn uniform_moments() {
    let mut rng = RandomStream::new(5, 0);
    let n = 200_000;
    let xs: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    // U(0,1): mean 1/2, variance 1/12; standard errors about 6.5e-4 and 3e-4
    assert!((mean - 0.5).abs() < 4e-3);
    assert!((var - 1.0 / 12.0).abs() < 2e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standardize_is_idempotent(
        rows in 2usize..12,
        cols in 1usize..6,
        seed in any::<u64>(),
        scale in 0.01f64..1e3,
    ) {
        let mut rng = RandomStream::new(seed, 0);
        let data: Vec<f64> = (0..rows * cols).map(|_| scale * rng.normal() + 7.0).collect();
        let x = Matrix::from_vec(rows, cols, data).unwrap();
        let once = standardize(&x).unwrap();
        let twice = standardize(&once.data).unwrap();
        for (a, b) in once.data.as_slice().iter().zip(twice.data.as_slice()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        for j in 0..cols {
            let col = once.data.column(j);
            let mean = col.iter().sum::<f64>() / rows as f64;
            prop_assert!(mean.abs() < 1e-10);
        }
    }

    #[test]
    fn below_stays_in_range(seed in any::<u64>(), n in 1usize..1000) {
        let mut rng = RandomStream::new(seed, 1);
        for _ in 0..100 {
            prop_assert!(rng.below(n) < n);
        }
    }
}
