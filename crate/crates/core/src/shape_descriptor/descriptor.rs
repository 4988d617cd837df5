use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::silhouette_io::Contour;

use super::frft::FrftPlan;

pub const DEFAULT_LENGTH: usize = 100;
pub const DEFAULT_ORDER: f64 = 0.9;

/// Boundary points as complex numbers `x + iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence(Vec<Complex64>);

impl ComplexSequence {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::input(format!(
                "complex sequence needs at least 3 values, got {}",
                values.len()
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptorParams {
    pub length: usize,
    pub order: f64,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        Self {
            length: DEFAULT_LENGTH,
            order: DEFAULT_ORDER,
        }
    }
}

/// Normalized fractional Fourier energy spectrum of one frame's contour.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDescriptor {
    values: Vec<f64>,
    order: f64,
}

impl FrameDescriptor {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Shifts the origin to the centroid of the contour points.
pub fn center_contour(contour: &Contour) -> ComplexSequence {
    let n = contour.len() as f64;
    let (sx, sy) = contour
        .points()
        .iter()
        .fold((0.0, 0.0), |(ax, ay), &(x, y)| (ax + x, ay + y));
    let (cx, cy) = (sx / n, sy / n);
    ComplexSequence(
        contour
            .points()
            .iter()
            .map(|&(x, y)| Complex64::new(x - cx, y - cy))
            .collect(),
    )
}

/// Picks `L` points by the ceiling index rule `out[i] = in[ceil(i N / L)]`
/// (1-based). Points repeat when `N < L`.
pub fn resample_contour(seq: &ComplexSequence, length: usize) -> Result<ComplexSequence> {
    if length < 3 {
        return Err(Error::param(format!(
            "resampled length must be at least 3, got {length}"
        )));
    }
    let n = seq.len();
    let out = (1..=length)
        .map(|i| {
            let idx = (i * n).div_ceil(length).clamp(1, n);
            seq.0[idx - 1]
        })
        .collect();
    ComplexSequence::new(out)
}

/// `d(i) = |S(i)|^2 / sum |S|^2` for a transformed sequence `S`.
pub fn normalized_energy(spectrum: &[Complex64]) -> Result<Vec<f64>> {
    let energy: Vec<f64> = spectrum.iter().map(|s| s.norm_sqr()).collect();
    let total: f64 = energy.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ZeroSpectrum);
    }
    Ok(energy.into_iter().map(|e| e / total).collect())
}

/// Descriptor pipeline with a cached transform plan for repeated use.
#[derive(Debug)]
pub struct Describer {
    params: DescriptorParams,
    plan: FrftPlan,
}

impl Describer {
    pub fn new(params: DescriptorParams) -> Result<Self> {
        if params.length < 3 {
            return Err(Error::param(format!(
                "descriptor length must be at least 3, got {}",
                params.length
            )));
        }
        let plan = FrftPlan::new(params.length, params.order)?;
        Ok(Self { params, plan })
    }

    pub fn params(&self) -> DescriptorParams {
        self.params
    }

    pub fn describe(&self, contour: &Contour) -> Result<FrameDescriptor> {
        let centred = center_contour(contour);
        let resampled = resample_contour(&centred, self.params.length)?;
        self.describe_resampled(&resampled)
    }

    /// Transform and normalize an already length-`L` sequence.
    pub fn describe_resampled(&self, seq: &ComplexSequence) -> Result<FrameDescriptor> {
        let spectrum = self.plan.apply(seq.values())?;
        Ok(FrameDescriptor {
            values: normalized_energy(&spectrum)?,
            order: self.params.order,
        })
    }
}

/// Centre, resample to `length` points, transform at order `order`, normalize.
pub fn describe_frame(contour: &Contour, length: usize, order: f64) -> Result<FrameDescriptor> {
    Describer::new(DescriptorParams { length, order })?.describe(contour)
}

/// One CSV row per frame: `video_id,frame,label,d1..dL`.
pub struct DescriptorRow<'a> {
    pub video_id: &'a str,
    pub frame: usize,
    pub label: usize,
    pub values: &'a [f64],
}

pub fn write_descriptor_csv<'a, W: Write>(
    out: W,
    rows: impl IntoIterator<Item = DescriptorRow<'a>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header_written = false;
    for row in rows {
        if !header_written {
            let mut header = vec!["video_id".to_string(), "frame".into(), "label".into()];
            header.extend((1..=row.values.len()).map(|i| format!("d{i}")));
            w.write_record(&header)?;
            header_written = true;
        }
        let mut rec = vec![row.video_id.to_string(), row.frame.to_string(), row.label.to_string()];
        rec.extend(row.values.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("writing descriptor csv", e))?;
    Ok(())
}
