//! Render-based perceptual metrics: PSNR, SSIM, and LPIPS with a pluggable
//! feature extractor.

mod lpips;

pub use lpips::{
    lpips, read_extractor_weights, write_extractor_weights, ConvExtractor, ConvLayer,
    FeatureExtractor, FeatureMap, IdentityExtractor, PyramidExtractor, EXTRACTOR_MAGIC,
};

use crate::render::Image;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Metric2dError {
    #[error("image dimensions differ: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: u32,
        a_height: u32,
        b_width: u32,
        b_height: u32,
    },
    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    TooSmall {
        width: u32,
        height: u32,
        window: u32,
    },
    #[error("feature extractor failed: {0}")]
    ExtractorFailure(String),
}

fn check_dims<S: Real>(a: &Image<S>, b: &Image<S>) -> Result<(), Metric2dError> {
    if a.width != b.width || a.height != b.height {
        return Err(Metric2dError::DimensionMismatch {
            a_width: a.width,
            a_height: a.height,
            b_width: b.width,
            b_height: b.height,
        });
    }
    Ok(())
}

/// Peak signal-to-noise ratio in decibels over all pixels and channels.
/// Identical images give +infinity.
pub fn psnr<S: Real>(a: &Image<S>, b: &Image<S>, max_val: S) -> Result<S, Metric2dError> {
    check_dims(a, b)?;
    let mut acc = 0f64;
    for (&x, &y) in a.channels().iter().zip(b.channels()) {
        let d = x.to_f64() - y.to_f64();
        acc += d * d;
    }
    let mse = acc / a.channels().len() as f64;
    if mse == 0.0 {
        return Ok(S::infinity());
    }
    let m = max_val.to_f64();
    Ok(S::of(10.0 * (m * m / mse).log10()))
}

/// SSIM window parameters: 11x11 Gaussian (sigma 1.5), K1/K2 stabilizers,
/// dynamic range L.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimParams<S> {
    pub window: u32,
    pub sigma: S,
    pub k1: S,
    pub k2: S,
    pub dynamic_range: S,
}

impl<S: Real> Default for SsimParams<S> {
    fn default() -> Self {
        SsimParams {
            window: 11,
            sigma: S::of(1.5),
            k1: S::of(0.01),
            k2: S::of(0.03),
            dynamic_range: S::one(),
        }
    }
}

impl<S: Real> SsimParams<S> {
    /// Normalized 1D Gaussian taps; the 2D window is their outer product and
    /// sums to 1.
    pub fn kernel(&self) -> Vec<S> {
        let n = self.window as i64;
        let mid = S::of((n - 1) as f64 / 2.0);
        let two_sigma_sq = S::of(2.0) * self.sigma * self.sigma;
        let mut taps: Vec<S> = (0..n)
            .map(|i| {
                let d = S::of(i as f64) - mid;
                (-(d * d) / two_sigma_sq).exp()
            })
            .collect();
        let total = taps.iter().fold(S::zero(), |acc, t| acc + *t);
        for t in &mut taps {
            *t /= total;
        }
        taps
    }
}

/// Structural similarity on luma, averaged over all fully-interior window
/// positions (no padding).
pub fn ssim<S: Real>(a: &Image<S>, b: &Image<S>, params: &SsimParams<S>) -> Result<S, Metric2dError> {
    check_dims(a, b)?;
    let w = a.width as usize;
    let h = a.height as usize;
    let win = params.window as usize;
    if w < win || h < win {
        return Err(Metric2dError::TooSmall {
            width: a.width,
            height: a.height,
            window: params.window,
        });
    }

    let la = a.to_luma();
    let lb = b.to_luma();
    let kernel = params.kernel();

    let mul: Vec<S> = la.iter().zip(&lb).map(|(x, y)| *x * *y).collect();
    let sq_a: Vec<S> = la.iter().map(|x| *x * *x).collect();
    let sq_b: Vec<S> = lb.iter().map(|y| *y * *y).collect();

    let mu_a = conv_valid(&la, w, h, &kernel);
    let mu_b = conv_valid(&lb, w, h, &kernel);
    let e_ab = conv_valid(&mul, w, h, &kernel);
    let e_aa = conv_valid(&sq_a, w, h, &kernel);
    let e_bb = conv_valid(&sq_b, w, h, &kernel);

    let c1 = {
        let k = params.k1 * params.dynamic_range;
        k * k
    };
    let c2 = {
        let k = params.k2 * params.dynamic_range;
        k * k
    };

    let mut acc = S::zero();
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = e_aa[i] - ma * ma;
        let var_b = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let two = S::of(2.0);
        let value = ((two * ma * mb + c1) * (two * cov + c2))
            / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        acc += value;
    }
    Ok(acc / S::of_usize(mu_a.len()))
}

/// Separable "valid" convolution with a symmetric 1D kernel applied along x
/// then y. Output is (w - k + 1) x (h - k + 1).
fn conv_valid<S: Real>(data: &[S], w: usize, h: usize, kernel: &[S]) -> Vec<S> {
    let k = kernel.len();
    let ow = w - k + 1;
    let oh = h - k + 1;
    let mut tmp = vec![S::zero(); ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut acc = S::zero();
            for (i, kv) in kernel.iter().enumerate() {
                acc += *kv * data[y * w + x + i];
            }
            tmp[y * ow + x] = acc;
        }
    }
    let mut out = vec![S::zero(); ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = S::zero();
            for (i, kv) in kernel.iter().enumerate() {
                acc += *kv * tmp[(y + i) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    out
}
