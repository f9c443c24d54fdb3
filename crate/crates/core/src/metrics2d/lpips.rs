//! LPIPS-style perceptual distance over channel-normalized feature maps.
//!
//! The built-in [`PyramidExtractor`] is a deterministic surrogate (luma +
//! gradient-magnitude image pyramid), NOT a pretrained network; its scores
//! are self-consistent but not comparable to published LPIPS numbers. A real
//! backbone can be plugged in through [`ConvExtractor`] by exporting
//! convolution weights to the flat binary format documented below.

use super::{check_dims, Metric2dError};
use crate::render::Image;
use crate::scalar::Real;

/// Ordered feature maps; `data` is row-major with interleaved channels:
/// `data[(y * width + x) * channels + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<S> {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<S>,
}

impl<S: Real> FeatureMap<S> {
    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        FeatureMap {
            width,
            height,
            channels,
            data: vec![S::zero(); width * height * channels],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, c: usize) -> S {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: S) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }
}

/// Deterministic image-to-feature-stack mapping.
pub trait FeatureExtractor<S: Real> {
    fn extract(&self, img: &Image<S>) -> Result<Vec<FeatureMap<S>>, Metric2dError>;
}

/// Perceptual distance: per layer, unit-normalize the channel vector at every
/// pixel, take squared differences, average spatially, weight, and sum layers.
pub fn lpips<S: Real>(
    a: &Image<S>,
    b: &Image<S>,
    extractor: &dyn FeatureExtractor<S>,
    layer_weights: Option<&[S]>,
) -> Result<S, Metric2dError> {
    check_dims(a, b)?;
    let fa = extractor.extract(a)?;
    let fb = extractor.extract(b)?;
    if fa.len() != fb.len() {
        return Err(Metric2dError::ExtractorFailure(format!(
            "layer count differs: {} vs {}",
            fa.len(),
            fb.len()
        )));
    }
    let eps = S::of(1e-10);
    let mut total = S::zero();
    for (layer, (ma, mb)) in fa.iter().zip(&fb).enumerate() {
        if (ma.width, ma.height, ma.channels) != (mb.width, mb.height, mb.channels) {
            return Err(Metric2dError::ExtractorFailure(format!(
                "layer {layer} shapes differ"
            )));
        }
        let weight = layer_weights
            .and_then(|w| w.get(layer).copied())
            .unwrap_or_else(S::one);
        let mut acc = S::zero();
        for y in 0..ma.height {
            for x in 0..ma.width {
                let mut norm_a = S::zero();
                let mut norm_b = S::zero();
                for c in 0..ma.channels {
                    let va = ma.at(x, y, c);
                    let vb = mb.at(x, y, c);
                    norm_a += va * va;
                    norm_b += vb * vb;
                }
                let inv_a = S::one() / (norm_a.sqrt() + eps);
                let inv_b = S::one() / (norm_b.sqrt() + eps);
                for c in 0..ma.channels {
                    let d = ma.at(x, y, c) * inv_a - mb.at(x, y, c) * inv_b;
                    acc += d * d;
                }
            }
        }
        total += weight * acc / S::of_usize(ma.width * ma.height);
    }
    Ok(total)
}

/// Raw pixels as a single 3-channel feature layer; collapses `lpips` to the
/// mean squared channel-normalized pixel difference.
pub struct IdentityExtractor;

impl<S: Real> FeatureExtractor<S> for IdentityExtractor {
    fn extract(&self, img: &Image<S>) -> Result<Vec<FeatureMap<S>>, Metric2dError> {
        let (w, h) = (img.width as usize, img.height as usize);
        let mut map = FeatureMap::zeros(w, h, 3);
        for y in 0..h {
            for x in 0..w {
                let px = img.pixel(x as u32, y as u32);
                for c in 0..3 {
                    map.set(x, y, c, px[c]);
                }
            }
        }
        Ok(vec![map])
    }
}

/// Surrogate extractor: a 3-level pyramid (2x2 box downsampling) where each
/// level contributes luma and central-difference gradient magnitude channels.
pub struct PyramidExtractor {
    pub levels: usize,
}

impl Default for PyramidExtractor {
    fn default() -> Self {
        PyramidExtractor { levels: 3 }
    }
}

impl<S: Real> FeatureExtractor<S> for PyramidExtractor {
    fn extract(&self, img: &Image<S>) -> Result<Vec<FeatureMap<S>>, Metric2dError> {
        let mut luma = img.to_luma();
        let mut w = img.width as usize;
        let mut h = img.height as usize;
        let mut out = Vec::with_capacity(self.levels);
        for level in 0..self.levels {
            if w == 0 || h == 0 {
                return Err(Metric2dError::ExtractorFailure(format!(
                    "image too small for pyramid level {level}"
                )));
            }
            let mut map = FeatureMap::zeros(w, h, 2);
            for y in 0..h {
                for x in 0..w {
                    let v = luma[y * w + x];
                    let xl = luma[y * w + x.saturating_sub(1)];
                    let xr = luma[y * w + (x + 1).min(w - 1)];
                    let yu = luma[y.saturating_sub(1) * w + x];
                    let yd = luma[(y + 1).min(h - 1) * w + x];
                    let gx = (xr - xl) * S::of(0.5);
                    let gy = (yd - yu) * S::of(0.5);
                    map.set(x, y, 0, v);
                    map.set(x, y, 1, (gx * gx + gy * gy).sqrt());
                }
            }
            out.push(map);
            if level + 1 < self.levels {
                let (nl, nw, nh) = box_downsample(&luma, w, h);
                luma = nl;
                w = nw;
                h = nh;
            }
        }
        Ok(out)
    }
}

fn box_downsample<S: Real>(data: &[S], w: usize, h: usize) -> (Vec<S>, usize, usize) {
    let nw = (w / 2).max(1);
    let nh = (h / 2).max(1);
    let quarter = S::of(0.25);
    let mut out = vec![S::zero(); nw * nh];
    for y in 0..nh {
        for x in 0..nw {
            let x0 = (2 * x).min(w - 1);
            let x1 = (2 * x + 1).min(w - 1);
            let y0 = (2 * y).min(h - 1);
            let y1 = (2 * y + 1).min(h - 1);
            out[y * nw + x] =
                (data[y0 * w + x0] + data[y0 * w + x1] + data[y1 * w + x0] + data[y1 * w + x1])
                    * quarter;
        }
    }
    (out, nw, nh)
}

// ---------------------------------------------------------------------------
// External convolutional extractor + weights file format
// ---------------------------------------------------------------------------

/// Magic bytes opening an extractor-weights file.
pub const EXTRACTOR_MAGIC: &[u8; 4] = b"FEXW";

/// One convolution layer: zero padding k/2, given stride, ReLU activation.
/// Weights are `[out_c][in_c][k][k]`, then `out_c` biases, all float32 LE.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

/// Convolutional feature extractor loaded from a flat binary weights file:
///
/// ```text
/// magic  b"FEXW"
/// u32    version (1)
/// u32    layer count
/// per layer:
///   u32  out_channels, u32 in_channels, u32 kernel (odd), u32 stride (>= 1)
///   f32  weights[out_c * in_c * k * k]
///   f32  bias[out_c]
/// ```
///
/// all integers and floats little-endian. The first layer must take 3 input
/// channels (RGB); each later layer's input must match the previous output.
/// The feature stack is the post-ReLU activation of every layer.
pub struct ConvExtractor {
    layers: Vec<ConvLayer>,
}

impl ConvExtractor {
    pub fn new(layers: Vec<ConvLayer>) -> Result<Self, Metric2dError> {
        validate_layers(&layers)?;
        Ok(ConvExtractor { layers })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Metric2dError> {
        ConvExtractor::new(read_extractor_weights(bytes)?)
    }

    pub fn layers(&self) -> &[ConvLayer] {
        &self.layers
    }
}

fn validate_layers(layers: &[ConvLayer]) -> Result<(), Metric2dError> {
    let fail = |msg: String| Err(Metric2dError::ExtractorFailure(msg));
    if layers.is_empty() {
        return fail("weights file contains no layers".into());
    }
    let mut in_c = 3usize;
    for (i, layer) in layers.iter().enumerate() {
        if layer.in_channels != in_c {
            return fail(format!(
                "layer {i} expects {} input channels, pipeline provides {in_c}",
                layer.in_channels
            ));
        }
        if layer.kernel % 2 == 0 || layer.kernel == 0 {
            return fail(format!("layer {i} kernel size must be odd"));
        }
        if layer.stride == 0 {
            return fail(format!("layer {i} stride must be >= 1"));
        }
        let expect = layer.out_channels * layer.in_channels * layer.kernel * layer.kernel;
        if layer.weights.len() != expect || layer.bias.len() != layer.out_channels {
            return fail(format!("layer {i} weight/bias sizes are inconsistent"));
        }
        in_c = layer.out_channels;
    }
    Ok(())
}

pub fn read_extractor_weights(bytes: &[u8]) -> Result<Vec<ConvLayer>, Metric2dError> {
    let fail = |msg: &str| Metric2dError::ExtractorFailure(msg.to_string());
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], Metric2dError> {
        let end = pos.checked_add(n).ok_or_else(|| fail("offset overflow"))?;
        let out = bytes.get(*pos..end).ok_or_else(|| fail("truncated weights file"))?;
        *pos = end;
        Ok(out)
    };
    let read_u32 = |pos: &mut usize| -> Result<u32, Metric2dError> {
        let raw = take(pos, 4)?;
        Ok(u32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]))
    };

    if take(&mut pos, 4)? != EXTRACTOR_MAGIC {
        return Err(fail("bad magic (expected FEXW)"));
    }
    let version = read_u32(&mut pos)?;
    if version != 1 {
        return Err(fail("unsupported weights file version"));
    }
    let layer_count = read_u32(&mut pos)? as usize;
    if layer_count > 64 {
        return Err(fail("unreasonable layer count"));
    }
    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let out_c = read_u32(&mut pos)? as usize;
        let in_c = read_u32(&mut pos)? as usize;
        let kernel = read_u32(&mut pos)? as usize;
        let stride = read_u32(&mut pos)? as usize;
        let n_weights = out_c
            .checked_mul(in_c)
            .and_then(|v| v.checked_mul(kernel))
            .and_then(|v| v.checked_mul(kernel))
            .ok_or_else(|| fail("weight count overflow"))?;
        if n_weights > 1 << 28 {
            return Err(fail("unreasonable weight count"));
        }
        let mut read_f32s = |count: usize| -> Result<Vec<f32>, Metric2dError> {
            let raw = take(&mut pos, count * 4)?;
            Ok(raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect())
        };
        let weights = read_f32s(n_weights)?;
        let bias = read_f32s(out_c)?;
        layers.push(ConvLayer {
            out_channels: out_c,
            in_channels: in_c,
            kernel,
            stride,
            weights,
            bias,
        });
    }
    if pos != bytes.len() {
        return Err(fail("trailing bytes after last layer"));
    }
    Ok(layers)
}

pub fn write_extractor_weights(layers: &[ConvLayer]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(EXTRACTOR_MAGIC);
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for layer in layers {
        for v in [
            layer.out_channels,
            layer.in_channels,
            layer.kernel,
            layer.stride,
        ] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for w in &layer.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        for b in &layer.bias {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    out
}

impl<S: Real> FeatureExtractor<S> for ConvExtractor {
    fn extract(&self, img: &Image<S>) -> Result<Vec<FeatureMap<S>>, Metric2dError> {
        let (w, h) = (img.width as usize, img.height as usize);
        let mut current = FeatureMap::zeros(w, h, 3);
        for y in 0..h {
            for x in 0..w {
                let px = img.pixel(x as u32, y as u32);
                for c in 0..3 {
                    current.set(x, y, c, px[c]);
                }
            }
        }
        let mut out = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let next = conv_forward(&current, layer)?;
            out.push(next.clone());
            current = next;
        }
        Ok(out)
    }
}

fn conv_forward<S: Real>(
    input: &FeatureMap<S>,
    layer: &ConvLayer,
) -> Result<FeatureMap<S>, Metric2dError> {
    if input.channels != layer.in_channels {
        return Err(Metric2dError::ExtractorFailure(
            "channel mismatch in conv stack".into(),
        ));
    }
    let k = layer.kernel;
    let pad = k / 2;
    let ow = input.width.div_ceil(layer.stride);
    let oh = input.height.div_ceil(layer.stride);
    if ow == 0 || oh == 0 {
        return Err(Metric2dError::ExtractorFailure(
            "feature map collapsed to zero size".into(),
        ));
    }
    let mut out = FeatureMap::zeros(ow, oh, layer.out_channels);
    for oy in 0..oh {
        for ox in 0..ow {
            let cx = ox * layer.stride;
            let cy = oy * layer.stride;
            for oc in 0..layer.out_channels {
                let mut acc = S::of(f64::from(layer.bias[oc]));
                let w_base = oc * layer.in_channels * k * k;
                for ic in 0..layer.in_channels {
                    let wc_base = w_base + ic * k * k;
                    for ky in 0..k {
                        let sy = cy as isize + ky as isize - pad as isize;
                        if sy < 0 || sy >= input.height as isize {
                            continue; // zero padding
                        }
                        for kx in 0..k {
                            let sx = cx as isize + kx as isize - pad as isize;
                            if sx < 0 || sx >= input.width as isize {
                                continue;
                            }
                            let wv = S::of(f64::from(layer.weights[wc_base + ky * k + kx]));
                            acc += wv * input.at(sx as usize, sy as usize, ic);
                        }
                    }
                }
                out.set(ox, oy, oc, acc.max(S::zero())); // ReLU
            }
        }
    }
    Ok(out)
}
