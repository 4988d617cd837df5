use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::kernels::{axpy, dot};
use super::Dictionary;

/// Residual norm below which pursuit stops early.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Candidate atoms whose Cholesky pivot falls below this are treated as lying in
/// the span of the current support.
const PIVOT_TOL: f64 = 1e-10;

/// Signals per batch of correlations computed as one matrix product.
const CHUNK_ROWS: usize = 64;

/// Scratch buffers reused across the signals of one batch.
struct Workspace {
    corr: Vec<f64>,
    excluded: Vec<bool>,
    /// Lower-triangular Cholesky factor of `G[S, S]`, row-major `max_atoms x max_atoms`.
    chol: Vec<f64>,
    rhs: Vec<f64>,
    z: Vec<f64>,
    residual: Vec<f64>,
}

impl Workspace {
    fn new(m: usize, dim: usize, cap: usize) -> Self {
        let max_atoms = cap.min(m).min(dim);
        Self {
            corr: vec![0.0; m],
            excluded: vec![false; m],
            chol: vec![0.0; max_atoms * max_atoms],
            rhs: Vec::with_capacity(max_atoms),
            z: vec![0.0; max_atoms],
            residual: vec![0.0; dim],
        }
    }
}

/// Sparse coefficients over a dictionary, listed in selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub sparsity_cap: usize,
}

impl SparseCode {
    pub fn empty(sparsity_cap: usize) -> Self {
        Self {
            support: Vec::new(),
            coefficients: Vec::new(),
            sparsity_cap,
        }
    }

    pub fn nnz(&self) -> usize {
        self.support.len()
    }

    pub fn to_dense(&self, num_atoms: usize) -> Array1<f64> {
        let mut out = Array1::zeros(num_atoms);
        for (&j, &c) in self.support.iter().zip(&self.coefficients) {
            out[j] = c;
        }
        out
    }

    /// `D x` restricted to the atoms accepted by `keep`.
    pub fn reconstruct_where(&self, dict: &Dictionary, keep: impl Fn(usize) -> bool) -> Array1<f64> {
        let mut out = Array1::zeros(dict.dim());
        for (&j, &c) in self.support.iter().zip(&self.coefficients) {
            if keep(j) {
                out.scaled_add(c, &dict.atom(j));
            }
        }
        out
    }

    pub fn reconstruct(&self, dict: &Dictionary) -> Array1<f64> {
        self.reconstruct_where(dict, |_| true)
    }
}

pub fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Orthogonal matching pursuit over a fixed dictionary, with its Gram matrix
/// cached so repeated encodings cost `O(dim m)` for the initial correlations
/// plus `O(m k)` per selected atom.
#[derive(Debug, Clone)]
pub struct OmpCoder<'a> {
    dict: &'a Dictionary,
    gram: Array2<f64>,
    /// Atoms as contiguous rows.
    atoms_t: Array2<f64>,
}

impl<'a> OmpCoder<'a> {
    pub fn new(dict: &'a Dictionary) -> Self {
        Self {
            dict,
            gram: dict.gram().as_standard_layout().into_owned(),
            atoms_t: dict.atoms().t().as_standard_layout().into_owned(),
        }
    }

    pub fn dictionary(&self) -> &Dictionary {
        self.dict
    }

    fn check_dim(&self, y: ArrayView1<f64>) -> Result<()> {
        if y.len() != self.dict.dim() {
            return Err(Error::input(format!(
                "signal has dimension {}, dictionary has {}",
                y.len(),
                self.dict.dim()
            )));
        }
        Ok(())
    }

    /// Greedy pursuit with at most `min(cap, m, dim)` atoms. Ties in
    /// correlation go to the lowest atom index.
    pub fn encode(&self, y: ArrayView1<f64>, cap: usize) -> Result<SparseCode> {
        self.check_dim(y)?;
        let rows = y.insert_axis(Axis(0));
        Ok(self.encode_rows(rows, cap)?.pop().expect("one row"))
    }

    /// Encodes every row of `signals` (`n x dim`), in parallel, in row order.
    pub fn encode_rows(&self, signals: ArrayView2<f64>, cap: usize) -> Result<Vec<SparseCode>> {
        if signals.ncols() != self.dict.dim() {
            return Err(Error::input(format!(
                "signal has dimension {}, dictionary has {}",
                signals.ncols(),
                self.dict.dim()
            )));
        }
        if cap == 0 {
            return Err(Error::param("sparsity cap must be at least 1"));
        }
        let chunks: Vec<_> = signals.axis_chunks_iter(Axis(0), CHUNK_ROWS).collect();
        let coded: Vec<Vec<SparseCode>> = chunks
            .into_par_iter()
            .map(|chunk| {
                let alpha = chunk.dot(&self.atoms_t.t());
                let mut work = Workspace::new(self.dict.num_atoms(), self.dict.dim(), cap);
                chunk
                    .rows()
                    .into_iter()
                    .zip(alpha.rows())
                    .map(|(y, a)| {
                        let owned;
                        let y: &[f64] = match y.as_slice() {
                            Some(s) => s,
                            None => {
                                owned = y.to_vec();
                                &owned
                            }
                        };
                        self.pursue(y, a.as_slice().expect("standard layout"), cap, &mut work)
                    })
                    .collect()
            })
            .collect();
        Ok(coded.into_iter().flatten().collect())
    }

    /// Pursuit of `y` given its atom correlations `alpha = D^T y`.
    fn pursue(&self, y: &[f64], alpha: &[f64], cap: usize, work: &mut Workspace) -> SparseCode {
        let m = self.dict.num_atoms();
        let dim = self.dict.dim();
        let max_atoms = cap.min(m).min(dim);
        let energy = dot(y, y);
        if energy.sqrt() < RESIDUAL_TOL {
            return SparseCode::empty(cap);
        }

        let atoms = self.atoms_t.as_slice().expect("standard layout");
        let gram = self.gram.as_slice().expect("standard layout");
        let Workspace {
            corr,
            excluded,
            chol,
            rhs,
            z,
            residual,
        } = work;
        corr.copy_from_slice(alpha);
        excluded.fill(false);
        rhs.clear();
        let mut support: Vec<usize> = Vec::with_capacity(max_atoms);
        let mut coef: Vec<f64> = Vec::with_capacity(max_atoms);

        while support.len() < max_atoms {
            let (mut j, mut best) = (usize::MAX, -1.0);
            for (i, (c, &skip)) in corr.iter().zip(excluded.iter()).enumerate() {
                let c = if skip { -1.0 } else { c.abs() };
                if c > best {
                    best = c;
                    j = i;
                }
            }
            if j == usize::MAX {
                break;
            }

            // new Cholesky row: solve L w = G[S, j]
            let k = support.len();
            let g = &gram[j * m..(j + 1) * m];
            let (done, rest) = chol.split_at_mut(k * max_atoms);
            let new_row = &mut rest[..max_atoms];
            let mut norm_sq = 0.0;
            for r in 0..k {
                let row = &done[r * max_atoms..r * max_atoms + r + 1];
                let w = (g[support[r]] - dot(&row[..r], &new_row[..r])) / row[r];
                new_row[r] = w;
                norm_sq += w * w;
            }
            excluded[j] = true;
            let pivot = g[j] - norm_sq;
            if pivot < PIVOT_TOL {
                continue;
            }
            new_row[k] = pivot.sqrt();
            support.push(j);
            rhs.push(alpha[j]);
            let k = k + 1;

            // forward then backward substitution
            for r in 0..k {
                let row = &chol[r * max_atoms..r * max_atoms + r + 1];
                z[r] = (rhs[r] - dot(&row[..r], &z[..r])) / row[r];
            }
            coef.clear();
            coef.resize(k, 0.0);
            for r in (0..k).rev() {
                let mut s = z[r];
                for c in r + 1..k {
                    s -= chol[c * max_atoms + r] * coef[c];
                }
                coef[r] = s / chol[r * max_atoms + r];
            }

            // ||r||^2 = ||y||^2 - x_S . alpha_S for the least-squares fit; confirm
            // small values against the explicit residual
            let estimate = energy - dot(&coef, rhs);
            if estimate <= 1e-10 * energy {
                residual.copy_from_slice(y);
                for (&s, &c) in support.iter().zip(&coef) {
                    axpy(-c, &atoms[s * dim..(s + 1) * dim], residual);
                }
                if dot(residual, residual).sqrt() < RESIDUAL_TOL {
                    break;
                }
            }
            corr.copy_from_slice(alpha);
            for (&s, &c) in support.iter().zip(&coef) {
                axpy(-c, &gram[s * m..(s + 1) * m], corr);
            }
        }

        SparseCode {
            support,
            coefficients: coef,
            sparsity_cap: cap,
        }
    }

    /// Per-atom reconstruction errors `e_i(y) = ||y - D delta_i(beta)||^2`.
    pub fn error_features(&self, y: ArrayView1<f64>, cap: usize) -> Result<ErrorFeature> {
        let code = self.encode(y, cap)?;
        Ok(error_features_from_code(y, self.dict, &code))
    }

    /// Encodes every column of `signals` (`dim x n`), in parallel, in column order.
    pub fn encode_columns(&self, signals: ArrayView2<f64>, cap: usize) -> Result<Vec<SparseCode>> {
        self.encode_rows(signals.t(), cap)
    }

    /// Error features of every column of `signals`, as an `m x n` matrix.
    pub fn error_feature_columns(&self, signals: ArrayView2<f64>, cap: usize) -> Result<Array2<f64>> {
        let codes = self.encode_rows(signals.t(), cap)?;
        let feats: Vec<ErrorFeature> = signals
            .axis_iter(Axis(1))
            .zip(&codes)
            .map(|(y, code)| error_features_from_code(y, self.dict, code))
            .collect();
        let m = self.dict.num_atoms();
        let mut out = Array2::zeros((m, feats.len()));
        for (i, f) in feats.iter().enumerate() {
            out.column_mut(i).assign(&ArrayView1::from(f.values()));
        }
        Ok(out)
    }
}

/// Orthogonal matching pursuit of `y` over `dict` with at most `cap` atoms.
pub fn omp_encode(y: ArrayView1<f64>, dict: &Dictionary, cap: usize) -> Result<SparseCode> {
    OmpCoder::new(dict).encode(y, cap)
}

/// Per-atom reconstruction errors; entries are non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorFeature(Vec<f64>);

impl ErrorFeature {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::input("error features must be non-negative"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn view(&self) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `e_i = ||y - c_i d_i||^2` for atoms in the support, `||y||^2` elsewhere.
pub fn error_features_from_code(y: ArrayView1<f64>, dict: &Dictionary, code: &SparseCode) -> ErrorFeature {
    let energy = y.dot(&y);
    let mut e = vec![energy; dict.num_atoms()];
    for (&j, &c) in code.support.iter().zip(&code.coefficients) {
        let atom = dict.atom(j);
        e[j] = y.iter().zip(atom.iter()).map(|(a, b)| (a - c * b) * (a - c * b)).sum();
    }
    ErrorFeature(e)
}

pub fn error_features(y: ArrayView1<f64>, dict: &Dictionary, cap: usize) -> Result<ErrorFeature> {
    OmpCoder::new(dict).error_features(y, cap)
}
