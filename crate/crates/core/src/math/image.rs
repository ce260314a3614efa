use crate::error::CoreError;

/// Row-major scalar image; RGB data lives in `[0,1]`, single-channel images
/// (depth maps) are unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self, CoreError> {
        if channels != 1 && channels != 3 {
            return Err(CoreError::domain("channels must be 1 or 3"));
        }
        if data.len() != width * height * channels {
            return Err(CoreError::domain(format!(
                "data length {} != {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if channels == 3 {
            for &v in &data {
                if !(0.0..=1.0).contains(&v) {
                    return Err(CoreError::domain(format!("RGB value {v} outside [0,1]")));
                }
            }
        } else if data.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::domain("non-finite image value"));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, channels: usize, value: f32) -> Result<Self, CoreError> {
        Image::new(width, height, channels, vec![value; width * height * channels])
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn len_pixels(&self) -> usize {
        self.width * self.height
    }
}

/// Block-mean downsampling by an integer factor that must divide both
/// dimensions; no implicit cropping.
pub fn downsample(img: &Image, factor: usize) -> Result<Image, CoreError> {
    if factor == 0 {
        return Err(CoreError::domain("downsample factor must be >= 1"));
    }
    if img.width % factor != 0 || img.height % factor != 0 {
        return Err(CoreError::domain(format!(
            "factor {factor} does not divide {}x{}",
            img.width, img.height
        )));
    }
    if factor == 1 {
        return Ok(img.clone());
    }
    let (w, h, c) = (img.width / factor, img.height / factor, img.channels);
    let inv = 1.0 / (factor * factor) as f64;
    let mut out = vec![0.0f32; w * h * c];
    for oy in 0..h {
        for ox in 0..w {
            for ch in 0..c {
                let mut acc = 0.0f64;
                for sy in 0..factor {
                    for sx in 0..factor {
                        let x = ox * factor + sx;
                        let y = oy * factor + sy;
                        acc += img.data[(y * img.width + x) * c + ch] as f64;
                    }
                }
                // Clamp away rounding excursions so RGB invariants survive.
                let mean = (acc * inv).clamp(0.0, 1.0) as f32;
                out[(oy * w + ox) * c + ch] = if c == 3 { mean } else { (acc * inv) as f32 };
            }
        }
    }
    Image::new(w, h, c, out)
}

/// Peak signal-to-noise ratio against a peak of 1.0. Zero error is reported
/// as a distinct sentinel rather than a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    Infinite,
}

impl Psnr {
    pub fn as_db(&self) -> Option<f64> {
        match self {
            Psnr::Finite(v) => Some(*v),
            Psnr::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Psnr::Finite(_))
    }

    pub fn from_mse(mse: f64) -> Psnr {
        if mse == 0.0 {
            Psnr::Infinite
        } else {
            Psnr::Finite(10.0 * (1.0 / mse).log10())
        }
    }
}

impl std::fmt::Display for Psnr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Psnr::Finite(v) => write!(f, "{v}"),
            Psnr::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Psnr {
    type Err = std::num::ParseFloatError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "inf" {
            Ok(Psnr::Infinite)
        } else {
            Ok(Psnr::Finite(s.parse()?))
        }
    }
}

/// PSNR between prediction and ground truth (peak 1.0), MSE taken over all
/// pixels and channels in `f64`.
pub fn psnr(pred: &Image, gt: &Image) -> Result<Psnr, CoreError> {
    if pred.width != gt.width || pred.height != gt.height || pred.channels != gt.channels {
        return Err(CoreError::domain("psnr inputs must have identical shape"));
    }
    let mut acc = 0.0f64;
    for (a, b) in pred.data.iter().zip(&gt.data) {
        let d = *a as f64 - *b as f64;
        acc += d * d;
    }
    let mse = acc / pred.data.len() as f64;
    Ok(Psnr::from_mse(mse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_image_downsamples_to_its_value() {
        let img = Image::constant(4, 4, 3, 0.5).unwrap();
        let out = downsample(&img, 4).unwrap();
        assert_eq!((out.width, out.height), (1, 1));
        assert_eq!(out.data, vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn two_by_two_mean() {
        let img = Image::new(2, 2, 1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let out = downsample(&img, 2).unwrap();
        assert_eq!(out.data, vec![0.5]);
    }

    #[test]
    fn twice_by_two_equals_once_by_four() {
        // Oracle: direct 4x4 block means.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f32> = (0..8 * 8 * 3).map(|_| rng.gen_range(0.0..1.0)).collect();
        let img = Image::new(8, 8, 3, data.clone()).unwrap();

        let twice = downsample(&downsample(&img, 2).unwrap(), 2).unwrap();
        let once = downsample(&img, 4).unwrap();
        for (a, b) in twice.data.iter().zip(&once.data) {
            assert!((a - b).abs() < 1e-6);
        }

        let mut oracle = vec![0.0f32; 2 * 2 * 3];
        for oy in 0..2 {
            for ox in 0..2 {
                for ch in 0..3 {
                    let mut acc = 0.0;
                    for sy in 0..4 {
                        for sx in 0..4 {
                            acc += data[((oy * 4 + sy) * 8 + ox * 4 + sx) * 3 + ch];
                        }
                    }
                    oracle[(oy * 2 + ox) * 3 + ch] = acc / 16.0;
                }
            }
        }
        for (a, b) in once.data.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn non_divisible_factor_rejected() {
        let img = Image::constant(6, 6, 1, 0.0).unwrap();
        assert!(downsample(&img, 4).is_err());
    }

    #[test]
    fn downsample_preserves_global_mean() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let data: Vec<f32> = (0..16 * 8 * 3).map(|_| rng.gen_range(0.0..1.0)).collect();
        let img = Image::new(16, 8, 3, data).unwrap();
        let out = downsample(&img, 4).unwrap();
        let sum_in: f64 = img.data.iter().map(|&v| v as f64).sum();
        let sum_out: f64 = out.data.iter().map(|&v| v as f64).sum();
        let rel = (sum_out * 16.0 - sum_in).abs() / sum_in.abs();
        assert!(rel < 1e-6, "relative drift {rel}");
    }

    #[test]
    fn psnr_known_values() {
        let ones = Image::constant(2, 2, 3, 1.0).unwrap();
        let zeros = Image::constant(2, 2, 3, 0.0).unwrap();
        match psnr(&ones, &zeros).unwrap() {
            Psnr::Finite(v) => assert!((v - 0.0).abs() < 1e-12),
            _ => panic!("expected finite"),
        }
        // MSE 1e-3 -> 30 dB: offset every value by sqrt(1e-3).
        let eps = (1e-3f64).sqrt() as f32;
        let a = Image::constant(2, 2, 3, 0.5).unwrap();
        let b = Image::constant(2, 2, 3, 0.5 + eps).unwrap();
        let v = psnr(&a, &b).unwrap().as_db().unwrap();
        assert!((v - 30.0).abs() < 1e-4, "got {v}");
        assert_eq!(psnr(&a, &a).unwrap(), Psnr::Infinite);
    }

    #[test]
    fn psnr_symmetric_and_monotone_in_noise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let gt_data: Vec<f32> = (0..8 * 8 * 3).map(|_| rng.gen_range(0.2..0.8)).collect();
        let gt = Image::new(8, 8, 3, gt_data.clone()).unwrap();
        let mut last = f64::INFINITY;
        for amp in [0.01f32, 0.02, 0.05, 0.1, 0.15] {
            let mut noise_rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
            let noisy: Vec<f32> = gt_data
                .iter()
                .map(|&v| (v + noise_rng.gen_range(-amp..amp)).clamp(0.0, 1.0))
                .collect();
            let img = Image::new(8, 8, 3, noisy).unwrap();
            let fwd = psnr(&img, &gt).unwrap().as_db().unwrap();
            let rev = psnr(&gt, &img).unwrap().as_db().unwrap();
            assert_eq!(fwd, rev);
            assert!(fwd < last, "noise {amp}: {fwd} !< {last}");
            last = fwd;
        }
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let a = Image::constant(2, 2, 3, 0.0).unwrap();
        let b = Image::constant(2, 2, 1, 0.0).unwrap();
        assert!(psnr(&a, &b).is_err());
    }
}
