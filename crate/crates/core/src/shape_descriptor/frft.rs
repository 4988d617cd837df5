//! Sampling-type discrete fractional Fourier transform.
//!
//! The order-`p` kernel `B_a exp(i (t^2 + u^2) cot(a) / 2 - i t u / sin(a))`,
//! `a = p pi / 2`, factors into a chirp multiplication by
//! `exp(-i tan(a/2) t^2 / 2)`, a convolution with `B_a exp(i t^2 / (2 sin a))`
//! and the same chirp multiplication again. The convolution's frequency response
//! is the unit-modulus chirp `exp(i a/2 - i sin(a) w^2 / 2)`, so sampling every
//! factor on the grid `t_n = n sqrt(2 pi / L)` (unit time-bandwidth product,
//! centred indices) yields an exactly unitary `L x L` transform. At `p = 1` and
//! even `L` it coincides with the centred unitary DFT.
//!
//! Orders are reduced to `(-2, 2]`. Orders with `|p| > 1` are folded into a full
//! (inverse) DFT followed by the residual order, which keeps `|tan(a/2)| <= 1`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Distance from 0 or 2 (mod 4) below which the exact special cases apply.
pub const SPECIAL_ORDER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stage {
    Identity,
    Reverse,
    Shear {
        /// `Some(true)` forward DFT first, `Some(false)` inverse DFT first.
        pre_dft: Option<bool>,
        residual: f64,
    },
}

/// Reduces `p` to `(-2, 2]`.
pub fn reduce_order(p: f64) -> f64 {
    if p > -2.0 && p <= 2.0 {
        return p;
    }
    let r = (p + 2.0).rem_euclid(4.0) - 2.0;
    if r <= -2.0 {
        r + 4.0
    } else {
        r
    }
}

fn stage_for(p: f64) -> Result<Stage> {
    if !p.is_finite() {
        return Err(Error::param(format!("transform order must be finite, got {p}")));
    }
    let r = reduce_order(p);
    Ok(if r.abs() < SPECIAL_ORDER_TOL {
        Stage::Identity
    } else if (r.abs() - 2.0).abs() < SPECIAL_ORDER_TOL {
        Stage::Reverse
    } else if r > 1.0 {
        Stage::Shear {
            pre_dft: Some(true),
            residual: r - 1.0,
        }
    } else if r < -1.0 {
        Stage::Shear {
            pre_dft: Some(false),
            residual: r + 1.0,
        }
    } else {
        Stage::Shear {
            pre_dft: None,
            residual: r,
        }
    })
}

fn check_len(len: usize) -> Result<()> {
    if len < 3 {
        return Err(Error::input(format!(
            "transform length must be at least 3, got {len}"
        )));
    }
    Ok(())
}

#[inline]
fn grid_step(len: usize) -> f64 {
    (2.0 * PI / len as f64).sqrt()
}

/// Centred sample index of storage position `j`.
#[inline]
fn centred(j: usize, len: usize) -> f64 {
    j as f64 - (len / 2) as f64
}

/// Signed frequency of DFT bin `k`.
#[inline]
fn bin_frequency(k: usize, len: usize) -> f64 {
    if 2 * k < len + 1 {
        k as f64
    } else {
        k as f64 - len as f64
    }
}

fn chirp(len: usize, alpha: f64) -> Vec<Complex64> {
    let step = grid_step(len);
    let rate = (alpha / 2.0).tan();
    (0..len)
        .map(|j| {
            let t = centred(j, len) * step;
            Complex64::from_polar(1.0, -rate * t * t / 2.0)
        })
        .collect()
}

fn chirp_response(len: usize, alpha: f64) -> Vec<Complex64> {
    let step = grid_step(len);
    let s = alpha.sin();
    (0..len)
        .map(|k| {
            let w = bin_frequency(k, len) * step;
            Complex64::from_polar(1.0, alpha / 2.0 - s * w * w / 2.0)
        })
        .collect()
}

struct ShearPlan {
    pre_dft: Option<bool>,
    chirp: Vec<Complex64>,
    response: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Precomputed fast transform for a fixed length and order. Immutable and
/// shareable across threads.
pub struct FrftPlan {
    len: usize,
    order: f64,
    shear: Option<ShearPlan>,
    reverse: bool,
}

impl std::fmt::Debug for FrftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrftPlan")
            .field("len", &self.len)
            .field("order", &self.order)
            .finish()
    }
}

impl FrftPlan {
    pub fn new(len: usize, order: f64) -> Result<Self> {
        check_len(len)?;
        let stage = stage_for(order)?;
        let mut plan = Self {
            len,
            order,
            shear: None,
            reverse: false,
        };
        match stage {
            Stage::Identity => {}
            Stage::Reverse => plan.reverse = true,
            Stage::Shear { pre_dft, residual } => {
                let alpha = residual * PI / 2.0;
                let mut planner = FftPlanner::new();
                plan.shear = Some(ShearPlan {
                    pre_dft,
                    chirp: chirp(len, alpha),
                    response: chirp_response(len, alpha),
                    forward: planner.plan_fft_forward(len),
                    inverse: planner.plan_fft_inverse(len),
                });
            }
        }
        Ok(plan)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn apply(&self, input: &[Complex64]) -> Result<Vec<Complex64>> {
        if input.len() != self.len {
            return Err(Error::input(format!(
                "plan length {} does not match input length {}",
                self.len,
                input.len()
            )));
        }
        let mut buf = input.to_vec();
        if self.reverse {
            buf.reverse();
            return Ok(buf);
        }
        let Some(sp) = &self.shear else {
            return Ok(buf);
        };

        let n = self.len;
        let half = n / 2;
        if let Some(forward) = sp.pre_dft {
            buf.rotate_left(half);
            if forward {
                sp.forward.process(&mut buf);
            } else {
                sp.inverse.process(&mut buf);
            }
            buf.rotate_right(half);
            let scale = 1.0 / (n as f64).sqrt();
            buf.iter_mut().for_each(|v| *v *= scale);
        }

        for (v, c) in buf.iter_mut().zip(&sp.chirp) {
            *v *= c;
        }
        buf.rotate_left(half);
        sp.forward.process(&mut buf);
        for (v, h) in buf.iter_mut().zip(&sp.response) {
            *v *= h;
        }
        sp.inverse.process(&mut buf);
        buf.rotate_right(half);
        let scale = 1.0 / n as f64;
        for (v, c) in buf.iter_mut().zip(&sp.chirp) {
            *v *= c * scale;
        }
        Ok(buf)
    }
}

/// Explicit `L x L` transform matrix assembled from the same chirp factors by
/// direct summation (no FFT). O(L^2) to apply.
#[derive(Debug, Clone)]
pub struct FrftKernel {
    order: f64,
    matrix: Array2<Complex64>,
}

fn dft_matrix(len: usize, forward: bool) -> Array2<Complex64> {
    let sign = if forward { -1.0 } else { 1.0 };
    let scale = 1.0 / (len as f64).sqrt();
    Array2::from_shape_fn((len, len), |(m, k)| {
        let phase = sign * 2.0 * PI * centred(m, len) * centred(k, len) / len as f64;
        Complex64::from_polar(scale, phase)
    })
}

impl FrftKernel {
    pub fn new(len: usize, order: f64) -> Result<Self> {
        check_len(len)?;
        let matrix = match stage_for(order)? {
            Stage::Identity => Array2::from_shape_fn((len, len), |(i, j)| {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            Stage::Reverse => Array2::from_shape_fn((len, len), |(i, j)| {
                if i + j == len - 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            Stage::Shear { pre_dft, residual } => {
                let alpha = residual * PI / 2.0;
                let c = chirp(len, alpha);
                let h = chirp_response(len, alpha);
                // circulant generator g[d] = (1/L) sum_k H_k exp(2 pi i k d / L)
                let g: Vec<Complex64> = (0..len)
                    .map(|d| {
                        h.iter()
                            .enumerate()
                            .map(|(k, hk)| {
                                hk * Complex64::from_polar(1.0, 2.0 * PI * ((k * d) % len) as f64 / len as f64)
                            })
                            .sum::<Complex64>()
                            / len as f64
                    })
                    .collect();
                let shear = Array2::from_shape_fn((len, len), |(m, n)| {
                    c[m] * g[(m + len - n) % len] * c[n]
                });
                match pre_dft {
                    Some(forward) => shear.dot(&dft_matrix(len, forward)),
                    None => shear,
                }
            }
        };
        Ok(Self { order, matrix })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, input: &[Complex64]) -> Result<Vec<Complex64>> {
        if input.len() != self.matrix.ncols() {
            return Err(Error::input(format!(
                "kernel size {} does not match input length {}",
                self.matrix.ncols(),
                input.len()
            )));
        }
        let v = Array1::from(input.to_vec());
        Ok(self.matrix.dot(&v).to_vec())
    }
}

/// Fast order-`p` transform of `input`.
pub fn dfrft(input: &[Complex64], p: f64) -> Result<Vec<Complex64>> {
    FrftPlan::new(input.len(), p)?.apply(input)
}

/// Reference order-`p` transform through the explicit kernel matrix.
pub fn dfrft_reference(input: &[Complex64], p: f64) -> Result<Vec<Complex64>> {
    FrftKernel::new(input.len(), p)?.apply(input)
}
