use image::GrayImage;

use crate::error::{Error, Result};

/// Binary foreground image for one frame, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SilhouetteMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl SilhouetteMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::input(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(Error::input(format!(
                "mask of {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Builds a mask by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    /// Nonzero pixels are foreground.
    pub fn from_gray(img: &GrayImage) -> Result<Self> {
        let (w, h) = img.dimensions();
        let bits = img.pixels().map(|p| p.0[0] != 0).collect();
        Self::new(w as usize, h as usize, bits)
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            image::Luma([if self.get(x as usize, y as usize) { 255 } else { 0 }])
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Bounds-checked lookup with signed coordinates; outside pixels are background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(SilhouetteMask::new(0, 3, vec![]).is_err());
        assert!(SilhouetteMask::new(2, 2, vec![true; 3]).is_err());
    }

    #[test]
    fn gray_round_trip() {
        let mask = SilhouetteMask::from_fn(5, 4, |x, y| (x + y) % 3 == 0).unwrap();
        let back = SilhouetteMask::from_gray(&mask.to_gray()).unwrap();
        assert_eq!(mask, back);
        assert_eq!(mask.foreground_count(), back.foreground_count());
    }

    #[test]
    fn signed_lookup_outside_is_background() {
        let mask = SilhouetteMask::from_fn(2, 2, |_, _| true).unwrap();
        assert!(mask.get_signed(1, 1));
        assert!(!mask.get_signed(-1, 0));
        assert!(!mask.get_signed(0, 2));
    }
}
