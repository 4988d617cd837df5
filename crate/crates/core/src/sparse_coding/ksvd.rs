use log::warn;
use ndarray::{Array1, Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::kernels::{axpy, dot};
use super::{Dictionary, OmpCoder, SparseCode};

pub const DEFAULT_KSVD_ITERATIONS: usize = 30;

const RANK1_MAX_SWEEPS: usize = 1;
const RANK1_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsvdConfig {
    pub atoms: usize,
    pub sparsity: usize,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct KsvdOutcome {
    pub dictionary: Dictionary,
    pub codes: Vec<SparseCode>,
    /// `||Y - D B||_F^2` after each iteration.
    pub objective: Vec<f64>,
}

/// Learns a dictionary for the columns of `signals` (`dim x n`).
pub fn ksvd_train(signals: ArrayView2<f64>, atoms: usize, sparsity: usize, iterations: usize, seed: u64) -> Result<Dictionary> {
    Ok(ksvd_fit(
        signals,
        &KsvdConfig {
            atoms,
            sparsity,
            iterations,
            seed,
        },
    )?
    .dictionary)
}

/// Picks `m` distinct, normalized signals in seeded random order, skipping
/// zero signals and repeated directions; tops up with random unit vectors.
/// Signals and atoms are rows.
fn initial_atoms(signals: &Array2<f64>, m: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let (n, dim) = signals.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut atoms = Array2::zeros((m, dim));
    let mut filled = 0;
    for i in order {
        if filled == m {
            break;
        }
        let row = signals.row(i);
        let norm = row.dot(&row).sqrt();
        if !(norm > 0.0) {
            continue;
        }
        let unit = row.mapv(|v| v / norm);
        let duplicate = (0..filled).any(|j| atoms.row(j).dot(&unit).abs() > 1.0 - 1e-12);
        if duplicate {
            continue;
        }
        atoms.row_mut(filled).assign(&unit);
        filled += 1;
    }
    while filled < m {
        let mut v: Array1<f64> = Array1::from_shape_fn(dim, |_| rng.gen_range(-1.0..1.0));
        let norm = v.dot(&v).sqrt();
        if norm > 0.0 {
            v.mapv_inplace(|x| x / norm);
            atoms.row_mut(filled).assign(&v);
            filled += 1;
        }
    }
    atoms
}

/// Per signal: (atom, coefficient) pairs.
type Codes = Vec<Vec<(usize, f64)>>;

fn users_of(codes: &Codes, m: usize) -> Vec<Vec<(usize, usize)>> {
    let mut users = vec![Vec::new(); m];
    for (i, code) in codes.iter().enumerate() {
        for (pos, &(j, _)) in code.iter().enumerate() {
            users[j].push((i, pos));
        }
    }
    users
}

fn residual_rows(signals: &Array2<f64>, atoms: &Array2<f64>, codes: &Codes) -> Array2<f64> {
    let mut r = signals.clone();
    for (i, code) in codes.iter().enumerate() {
        let mut row = r.row_mut(i);
        for &(j, c) in code {
            row.scaled_add(-c, &atoms.row(j));
        }
    }
    r
}

fn frobenius_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

/// Best rank-1 fit `v u^T` of `E = R + c a^T` by alternating least squares
/// started from the atom `a` in `u`, where the rows of `R` are the residual rows
/// `users` of `res` and `c` their coefficients on `a`. Every sweep lowers
/// `||E - v u^T||`, so the result never fits worse than the starting atom with
/// optimal coefficients. Leaves the fit in `u` and `coefs` and the new residual
/// `E - v u^T` in `res`, without forming `E`.
fn rank_one_update(
    res: &mut [f64],
    dim: usize,
    users: &[usize],
    coefs: &mut [f64],
    u: &mut [f64],
    scratch: &mut [f64],
) {
    let a = u.to_vec();
    let old = coefs.to_vec();
    let row = |i: usize| i * dim..(i + 1) * dim;
    let aa = dot(&a, &a);
    for (v, (&i, &c)) in coefs.iter_mut().zip(users.iter().zip(&old)) {
        *v = dot(&res[row(i)], &a) + c * aa;
    }
    for _ in 0..RANK1_MAX_SWEEPS {
        // E^T v = R^T v + (c . v) a
        scratch.fill(0.0);
        let mut cv = 0.0;
        for ((&i, &c), &v) in users.iter().zip(&old).zip(coefs.iter()) {
            axpy(v, &res[row(i)], scratch);
            cv += c * v;
        }
        axpy(cv, &a, scratch);
        let norm = dot(scratch, scratch).sqrt();
        if !(norm > 0.0) {
            break;
        }
        let mut change = 0.0;
        for (uv, sv) in u.iter_mut().zip(scratch.iter()) {
            let next = sv / norm;
            change += (next - *uv) * (next - *uv);
            *uv = next;
        }
        let au = dot(&a, u);
        for (v, (&i, &c)) in coefs.iter_mut().zip(users.iter().zip(&old)) {
            *v = dot(&res[row(i)], u) + c * au;
        }
        if change.sqrt() < RANK1_TOL {
            break;
        }
    }
    for ((&i, &c), &v) in users.iter().zip(&old).zip(coefs.iter()) {
        let r = &mut res[row(i)];
        axpy(c, &a, r);
        axpy(-v, u, r);
    }
}

/// K-SVD with OMP coding.
///
/// Each iteration codes every signal with at most `sparsity` atoms (a signal
/// keeps its previous code when the new one is not better), then updates atoms
/// one by one with a rank-1 fit of the residual restricted to the signals that
/// use the atom. Unused atoms are replaced by the worst reconstructed signal.
/// The recorded objective never increases.
pub fn ksvd_fit(signals: ArrayView2<f64>, config: &KsvdConfig) -> Result<KsvdOutcome> {
    let (dim, n) = signals.dim();
    if dim == 0 {
        return Err(Error::input("cannot learn a dictionary for zero-dimensional signals"));
    }
    if n == 0 {
        return Err(Error::input("cannot learn a dictionary from zero signals"));
    }
    if config.atoms == 0 || config.sparsity == 0 || config.iterations == 0 {
        return Err(Error::param(
            "K-SVD needs at least one atom, one coefficient and one iteration",
        ));
    }
    let mut m = config.atoms;
    if n < m {
        warn!("K-SVD asked for {m} atoms from {n} signals; using {n} atoms");
        m = n;
    }

    let y = signals.t().as_standard_layout().into_owned();
    let energy: Vec<f64> = y.rows().into_iter().map(|r| r.dot(&r)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut atoms = initial_atoms(&y, m, &mut rng);
    let mut codes: Codes = vec![Vec::new(); n];
    let mut residual = y.clone();
    let mut objective = Vec::with_capacity(config.iterations);

    let mut coefs: Vec<f64> = Vec::new();
    let mut u = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut r = vec![0.0; dim];

    for _ in 0..config.iterations {
        // sparse coding
        let dict = Dictionary::new(atoms.t().to_owned())?;
        let coder = OmpCoder::new(&dict);
        let fresh = coder.encode_rows(y.view(), config.sparsity)?;
        {
            let ys = y.as_slice().expect("standard layout");
            let at = atoms.as_slice().expect("standard layout");
            let res = residual.as_slice_mut().expect("standard layout");
            for (i, code) in fresh.into_iter().enumerate() {
                r.copy_from_slice(&ys[i * dim..(i + 1) * dim]);
                for (&j, &c) in code.support.iter().zip(&code.coefficients) {
                    axpy(-c, &at[j * dim..(j + 1) * dim], &mut r);
                }
                let old = &mut res[i * dim..(i + 1) * dim];
                if dot(&r, &r) <= dot(old, old) {
                    codes[i] = code.support.into_iter().zip(code.coefficients).collect();
                    old.copy_from_slice(&r);
                }
            }
        }

        // atom updates
        let users = users_of(&codes, m);
        let mut taken = vec![false; n];
        let ys = y.as_slice().expect("standard layout");
        let at = atoms.as_slice_mut().expect("standard layout");
        let res = residual.as_slice_mut().expect("standard layout");
        for j in 0..m {
            if users[j].is_empty() {
                let worst = (0..n)
                    .filter(|&i| !taken[i] && energy[i] > 0.0)
                    .map(|i| {
                        let row = &res[i * dim..(i + 1) * dim];
                        (i, dot(row, row))
                    })
                    .fold(None, |best: Option<(usize, f64)>, (i, e)| match best {
                        Some((_, be)) if be >= e => best,
                        _ => Some((i, e)),
                    });
                if let Some((i, _)) = worst {
                    taken[i] = true;
                    let norm = energy[i].sqrt();
                    for (a, v) in at[j * dim..(j + 1) * dim].iter_mut().zip(&ys[i * dim..(i + 1) * dim]) {
                        *a = v / norm;
                    }
                }
                continue;
            }

            let rows: Vec<usize> = users[j].iter().map(|&(i, _)| i).collect();
            coefs.clear();
            coefs.extend(users[j].iter().map(|&(i, pos)| codes[i][pos].1));
            let atom = &mut at[j * dim..(j + 1) * dim];
            u.copy_from_slice(atom);
            rank_one_update(res, dim, &rows, &mut coefs, &mut u, &mut scratch);
            for (&(i, pos), &c) in users[j].iter().zip(&coefs) {
                codes[i][pos].1 = c;
            }
            atom.copy_from_slice(&u);
        }

        // recomputed rather than read off `residual`, so drift cannot hide an increase
        objective.push(frobenius_sq(&residual_rows(&y, &atoms, &codes)));
    }

    let dictionary = Dictionary::from_columns(atoms.t().to_owned())?;
    let codes = codes
        .into_iter()
        .map(|c| SparseCode {
            support: c.iter().map(|&(j, _)| j).collect(),
            coefficients: c.iter().map(|&(_, v)| v).collect(),
            sparsity_cap: config.sparsity,
        })
        .collect();
    Ok(KsvdOutcome {
        dictionary,
        codes,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Axis;

    fn random_data(seed: u64, dim: usize, n: usize) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((dim, n), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn repeated_basis_is_learned_exactly() {
        let m = 6;
        let basis = Array2::<f64>::eye(m);
        let data = Array2::from_shape_fn((m, 5 * m), |(r, c)| basis[[r, c % m]] * 2.0);
        let out = ksvd_fit(
            data.view(),
            &KsvdConfig {
                atoms: m,
                sparsity: 1,
                iterations: 5,
                seed: 3,
            },
        )
        .unwrap();
        assert!(*out.objective.last().unwrap() < 1e-10);
    }

    #[test]
    fn objective_is_non_increasing() {
        let data = random_data(1, 12, 80);
        let out = ksvd_fit(
            data.view(),
            &KsvdConfig {
                atoms: 20,
                sparsity: 3,
                iterations: 15,
                seed: 9,
            },
        )
        .unwrap();
        for w in out.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{:?}", out.objective);
        }
        assert!(out.objective.last().unwrap() < &frobenius_sq(&data));
    }

    #[test]
    fn atoms_stay_unit_norm_and_codes_respect_cap() {
        let data = random_data(2, 8, 40);
        let out = ksvd_fit(
            data.view(),
            &KsvdConfig {
                atoms: 10,
                sparsity: 2,
                iterations: 4,
                seed: 1,
            },
        )
        .unwrap();
        for col in out.dictionary.atoms().axis_iter(Axis(1)) {
            assert!((col.dot(&col).sqrt() - 1.0).abs() < 1e-9);
        }
        assert!(out.codes.iter().all(|c| c.nnz() <= 2));
    }

    #[test]
    fn deterministic_for_seed() {
        let data = random_data(3, 6, 30);
        let a = ksvd_train(data.view(), 8, 2, 5, 42).unwrap();
        let b = ksvd_train(data.view(), 8, 2, 5, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn atom_count_reduced_to_signal_count() {
        let data = random_data(4, 5, 3);
        let d = ksvd_train(data.view(), 10, 2, 2, 0).unwrap();
        assert_eq!(d.num_atoms(), 3);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(ksvd_train(Array2::<f64>::zeros((4, 0)).view(), 2, 1, 1, 0).is_err());
        assert!(ksvd_train(Array2::<f64>::zeros((0, 4)).view(), 2, 1, 1, 0).is_err());
    }

    #[test]
    fn zero_columns_do_not_break_training() {
        let mut data = random_data(5, 4, 10);
        data.column_mut(0).fill(0.0);
        data.column_mut(3).fill(0.0);
        let d = ksvd_train(data.view(), 6, 2, 3, 0).unwrap();
        assert_eq!(d.num_atoms(), 6);
    }
}
