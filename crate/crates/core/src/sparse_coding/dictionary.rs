use ndarray::{Array2, ArrayView1, Axis};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

pub const DICTIONARY_VERSION: u32 = 1;
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Column-wise atom matrix (`dim x m`) with unit-norm atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Array2<f64>,
}

impl Dictionary {
    /// Wraps `atoms`, which must already have unit-norm columns.
    pub fn new(atoms: Array2<f64>) -> Result<Self> {
        let (dim, m) = atoms.dim();
        if dim == 0 || m == 0 {
            return Err(Error::input(format!(
                "dictionary must be non-empty, got {dim}x{m}"
            )));
        }
        for (j, col) in atoms.axis_iter(Axis(1)).enumerate() {
            let norm = col.dot(&col).sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::input(format!(
                    "atom {j} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(Self { atoms })
    }

    /// Normalizes every column; zero columns are rejected.
    pub fn from_columns(mut atoms: Array2<f64>) -> Result<Self> {
        for (j, mut col) in atoms.axis_iter_mut(Axis(1)).enumerate() {
            let norm = col.dot(&col).sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::input(format!("atom {j} cannot be normalized")));
            }
            col.mapv_inplace(|v| v / norm);
        }
        Self::new(atoms)
    }

    /// Side-by-side concatenation `[D_0 | D_1 | ...]`.
    pub fn concat(parts: &[&Dictionary]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::input("cannot concatenate zero dictionaries"))?;
        let dim = first.dim();
        if let Some(bad) = parts.iter().find(|d| d.dim() != dim) {
            return Err(Error::input(format!(
                "dictionary dimension mismatch: {} vs {}",
                dim,
                bad.dim()
            )));
        }
        let views: Vec<_> = parts.iter().map(|d| d.atoms.view()).collect();
        let atoms = ndarray::concatenate(Axis(1), &views)
            .map_err(|e| Error::input(format!("concatenating dictionaries: {e}")))?;
        Ok(Self { atoms })
    }

    pub fn dim(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn atoms(&self) -> &Array2<f64> {
        &self.atoms
    }

    pub fn atom(&self, j: usize) -> ArrayView1<'_, f64> {
        self.atoms.column(j)
    }

    /// `D^T D`.
    pub fn gram(&self) -> Array2<f64> {
        self.atoms.t().dot(&self.atoms)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Row-major values with 17 significant digits.
pub(crate) fn format_row_major(atoms: &Array2<f64>) -> String {
    let mut out = String::with_capacity(atoms.len() * 26 + 2);
    out.push('[');
    for (i, v) in atoms.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("{v:.16e}"));
    }
    out.push(']');
    out
}

#[derive(Serialize)]
struct DictionaryDocOut<'a> {
    version: u32,
    dim: usize,
    m: usize,
    atoms: &'a RawValue,
}

#[derive(Deserialize)]
struct DictionaryDocIn {
    version: u32,
    dim: usize,
    m: usize,
    atoms: Vec<f64>,
}

impl Serialize for Dictionary {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // standard layout is row-major, so `iter` walks rows
        let std_atoms = self.atoms.as_standard_layout();
        let raw = RawValue::from_string(format_row_major(&std_atoms.to_owned()))
            .map_err(serde::ser::Error::custom)?;
        DictionaryDocOut {
            version: DICTIONARY_VERSION,
            dim: self.dim(),
            m: self.num_atoms(),
            atoms: &raw,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dictionary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = DictionaryDocIn::deserialize(deserializer)?;
        if doc.version != DICTIONARY_VERSION {
            return Err(D::Error::custom(Error::Version {
                found: doc.version,
                expected: DICTIONARY_VERSION,
            }));
        }
        let atoms = Array2::from_shape_vec((doc.dim, doc.m), doc.atoms).map_err(D::Error::custom)?;
        Dictionary::new(atoms).map_err(D::Error::custom)
    }
}
