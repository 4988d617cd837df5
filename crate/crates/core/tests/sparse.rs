use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zeroclass::sparse_coding::{ksvd_fit, omp_encode, Dictionary, KsvdConfig};

fn random_dict(rng: &mut ChaCha8Rng, dim: usize, m: usize) -> Dictionary {
    Dictionary::from_columns(Array2::from_shape_fn((dim, m), |_| rng.gen_range(-1.0..1.0))).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Array1<f64> {
    Array1::from_shape_fn(dim, |_| rng.gen_range(-1.0..1.0))
}

/// Least-squares error of `y` on the columns `support` via the normal equations.
fn ls_error(dict: &Dictionary, y: &Array1<f64>, support: &[usize]) -> f64 {
    let a = dict.atoms();
    let k = support.len();
    let mut g = vec![vec![0.0; k + 1]; k];
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            g[r][c] = a.column(i).dot(&a.column(j));
        }
        g[r][k] = a.column(i).dot(y);
    }
    // Gaussian elimination with partial pivoting
    for col in 0..k {
        let piv = (col..k).max_by(|&p, &q| g[p][col].abs().total_cmp(&g[q][col].abs())).unwrap();
        g.swap(col, piv);
        for r in col + 1..k {
            let f = g[r][col] / g[col][col];
            for c in col..=k {
                g[r][c] -= f * g[col][c];
            }
        }
    }
    let mut coef = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| g[r][c] * coef[c]).sum();
        coef[r] = (g[r][k] - s) / g[r][r];
    }
    let mut res = y.clone();
    for (&i, &c) in support.iter().zip(&coef) {
        res.scaled_add(-c, &a.column(i));
    }
    res.dot(&res)
}

fn omp_error(dict: &Dictionary, y: &Array1<f64>, cap: usize) -> (f64, Array1<f64>, Vec<usize>) {
    let code = omp_encode(y.view(), dict, cap).unwrap();
    let r = y - &code.reconstruct(dict);
    (r.dot(&r), r, code.support)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn omp_residual_is_orthogonal_to_support(seed in any::<u64>(), cap in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dict = random_dict(&mut rng, 16, 24);
        let y = random_vec(&mut rng, 16);
        let (_, r, support) = omp_error(&dict, &y, cap);
        prop_assert!(support.len() <= cap);
        for j in support {
            prop_assert!(dict.atom(j).dot(&r).abs() < 1e-8);
        }
    }

    #[test]
    fn omp_error_is_monotone_in_sparsity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dict = random_dict(&mut rng, 12, 30);
        let y = random_vec(&mut rng, 12);
        let mut last = f64::INFINITY;
        for cap in 1..=12 {
            let (e, _, _) = omp_error(&dict, &y, cap);
            prop_assert!(e <= last + 1e-12);
            last = e;
        }
    }

    #[test]
    fn omp_matches_least_squares_on_its_support(seed in any::<u64>(), cap in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dict = random_dict(&mut rng, 10, 20);
        let y = random_vec(&mut rng, 10);
        let (e, _, support) = omp_error(&dict, &y, cap);
        prop_assert!((e - ls_error(&dict, &y, &support)).abs() < 1e-9);
    }
}

#[test]
fn omp_against_exhaustive_supports() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 1000;
    let mut close = 0;
    for _ in 0..trials {
        let dict = random_dict(&mut rng, 8, 8);
        let y = random_vec(&mut rng, 8);
        let mut best = f64::INFINITY;
        for i in 0..8 {
            best = best.min(ls_error(&dict, &y, &[i]));
            for j in i + 1..8 {
                best = best.min(ls_error(&dict, &y, &[i, j]));
            }
        }
        let (e, _, _) = omp_error(&dict, &y, 2);
        assert!(e >= best - 1e-9, "greedy {e} beat exhaustive {best}");
        if e <= 1.5 * best {
            close += 1;
        }
    }
    assert!(close * 100 >= trials * 95, "{close}/{trials} within 1.5x");
}

#[test]
fn ksvd_objective_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let y = Array2::from_shape_fn((20, 200), |_| rng.gen_range(-1.0..1.0));
    let out = ksvd_fit(
        y.view(),
        &KsvdConfig {
            atoms: 40,
            sparsity: 3,
            iterations: 30,
            seed: 4,
        },
    )
    .unwrap();
    assert_eq!(out.objective.len(), 30);
    for w in out.objective.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
    }
    for col in out.dictionary.atoms().columns() {
        assert!((col.dot(&col).sqrt() - 1.0).abs() < 1e-9);
    }
}
