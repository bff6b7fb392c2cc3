//! Seeded white Gaussian I/Q noise and the three impairment models:
//! I/Q gain/phase imbalance, uniform quantization with clipping, and
//! windowed-sinc low-pass filtering.
//!
//! For samples `X_I, X_Q ~ N(0, σ²)` the power `P = X_I² + X_Q²` is
//! exponential with mean `2σ²`; the normalized power `P / 2σ²` is Exp(1).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, PaprError, Result};
use crate::rng::{substream, PADDING_STREAM_FLAG};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WgnParams<T> {
    /// Standard deviation of each of the I and Q components.
    pub sigma: T,
    pub seed: u64,
    /// Stream within `seed`; see [`crate::rng`].
    pub stream: u64,
}

impl<T: Real> WgnParams<T> {
    pub fn new(sigma: T, seed: u64) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite()) {
            return domain(format!("sigma must be positive, got {sigma}"));
        }
        Ok(Self {
            sigma,
            seed,
            stream: 0,
        })
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    /// Mean instantaneous power `E[P] = 2σ²`.
    pub fn mean_power(&self) -> T {
        T::lit(2.0) * self.sigma * self.sigma
    }
}

/// Receiver I/Q gain and phase mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceParams<T> {
    /// Relative gain mismatch `|G_I − G_Q| / G_Q`.
    pub delta_g: T,
    /// Phase mismatch in degrees.
    pub delta_phi_deg: T,
}

impl<T: Real> ImbalanceParams<T> {
    pub fn new(delta_g: T, delta_phi_deg: T) -> Result<Self> {
        if !(delta_g >= T::zero() && delta_g < T::lit(2.0)) {
            return domain(format!("gain mismatch must lie in [0, 2), got {delta_g}"));
        }
        if !(delta_phi_deg.abs() < T::lit(90.0)) {
            return domain(format!("phase mismatch must lie in (-90, 90) degrees, got {delta_phi_deg}"));
        }
        Ok(Self {
            delta_g,
            delta_phi_deg,
        })
    }

    /// `[[A cos(Δφ/2), A sin(Δφ/2)], [B sin(Δφ/2), B cos(Δφ/2)]]` with
    /// `A = 1 − ΔG/2`, `B = 1 + ΔG/2`.
    pub fn matrix(&self) -> [[T; 2]; 2] {
        let half = T::lit(0.5);
        let a = T::one() - half * self.delta_g;
        let b = T::one() + half * self.delta_g;
        let (s, c) = (half * self.delta_phi_deg.to_radians()).sin_cos();
        [[a * c, a * s], [b * s, b * c]]
    }
}

/// Uniform quantizer with saturation, modelled on a two's-complement ADC.
///
/// The step is `2·reference_level / 2^bits` and the levels are `k·step` for
/// `k ∈ [−2^(bits−1), 2^(bits−1) − 1]`, so zero is a level (mid-tread) and the
/// levels cover `[−reference_level, reference_level − step]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerParams<T> {
    pub bits: u32,
    pub reference_level: T,
}

impl<T: Real> QuantizerParams<T> {
    pub fn new(bits: u32, reference_level: T) -> Result<Self> {
        if !(1..=24).contains(&bits) {
            return domain(format!("quantizer resolution must be 1..=24 bits, got {bits}"));
        }
        if !(reference_level > T::zero() && reference_level.is_finite()) {
            return domain(format!("reference level must be positive, got {reference_level}"));
        }
        Ok(Self {
            bits,
            reference_level,
        })
    }

    pub fn step(&self) -> T {
        T::lit(2.0) * self.reference_level / T::from_count(1u64 << self.bits)
    }

    pub fn quantize(&self, x: T) -> T {
        let step = self.step();
        let half_levels = T::from_count(1u64 << (self.bits - 1));
        let k = (x / step).round().max(-half_levels).min(half_levels - T::one());
        k * step
    }
}

/// Linear-phase low-pass FIR filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirLowPass<T> {
    /// Cutoff in cycles/sample.
    pub cutoff: T,
    pub order: usize,
    pub coefficients: Vec<T>,
}

impl<T: Real> FirLowPass<T> {
    /// Single unit tap; passes every frequency.
    pub fn identity() -> Self {
        Self {
            cutoff: T::lit(0.5),
            order: 0,
            coefficients: vec![T::one()],
        }
    }

    /// Magnitude response at normalized frequency `f` (cycles/sample).
    pub fn magnitude_response(&self, f: T) -> T {
        let w = T::lit(2.0) * T::PI() * f;
        let (re, im) = self
            .coefficients
            .iter()
            .enumerate()
            .fold((T::zero(), T::zero()), |(re, im), (k, &h)| {
                let (s, c) = (w * T::from_count(k as u64)).sin_cos();
                (re + h * c, im - h * s)
            });
        (re * re + im * im).sqrt()
    }

    pub fn dc_gain(&self) -> T {
        self.coefficients.iter().copied().sum()
    }
}

/// Paired I and Q sample vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqBuffer<T> {
    i: Vec<T>,
    q: Vec<T>,
}

impl<T: Real> IqBuffer<T> {
    pub fn new(i: Vec<T>, q: Vec<T>) -> Result<Self> {
        if i.len() != q.len() {
            return Err(PaprError::Domain(format!(
                "I and Q lengths differ ({} vs {})",
                i.len(),
                q.len()
            )));
        }
        if i.iter().chain(q.iter()).any(|v| !v.is_finite()) {
            return domain("I/Q samples must be finite");
        }
        Ok(Self { i, q })
    }

    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn i(&self) -> &[T] {
        &self.i
    }

    pub fn q(&self) -> &[T] {
        &self.q
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>) {
        (self.i, self.q)
    }

    /// Instantaneous power `i² + q²` of each sample.
    pub fn powers(&self) -> impl Iterator<Item = T> + '_ {
        self.i.iter().zip(&self.q).map(|(&a, &b)| a * a + b * b)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            i: self.i.iter().map(|&v| v * c).collect(),
            q: self.q.iter().map(|&v| v * c).collect(),
        }
    }
}

/// Draw `n` complex samples with i.i.d. `N(0, σ²)` components from `rng`,
/// interleaved I₀, Q₀, I₁, Q₁, …
pub fn generate_wgn_from<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, sigma: T) -> IqBuffer<T> {
    let mut i = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        i.push(T::lit(a) * sigma);
        q.push(T::lit(b) * sigma);
    }
    IqBuffer { i, q }
}

/// `n` complex WGN samples from the stream selected by `p`.
pub fn generate_wgn<T: Real>(n: usize, p: &WgnParams<T>) -> Result<IqBuffer<T>> {
    if n == 0 {
        return domain("sample count must be at least 1");
    }
    let mut rng = substream(p.seed, p.stream);
    Ok(generate_wgn_from(&mut rng, n, p.sigma))
}

pub fn apply_imbalance<T: Real>(b: &IqBuffer<T>, imb: &ImbalanceParams<T>) -> IqBuffer<T> {
    let [[m00, m01], [m10, m11]] = imb.matrix();
    let (i, q) = b
        .i
        .iter()
        .zip(&b.q)
        .map(|(&xi, &xq)| (m00 * xi + m01 * xq, m10 * xi + m11 * xq))
        .unzip();
    IqBuffer { i, q }
}

pub fn apply_quantizer<T: Real>(b: &IqBuffer<T>, qp: &QuantizerParams<T>) -> IqBuffer<T> {
    IqBuffer {
        i: b.i.iter().map(|&v| qp.quantize(v)).collect(),
        q: b.q.iter().map(|&v| qp.quantize(v)).collect(),
    }
}

/// Window-method low-pass design: ideal sinc response truncated to
/// `order + 1` taps, tapered by a symmetric Hamming window
/// `0.54 − 0.46·cos(2πk/order)`, then scaled to unit DC gain.
pub fn design_lowpass<T: Real>(cutoff: T, order: usize) -> Result<FirLowPass<T>> {
    if !(cutoff > T::zero() && cutoff < T::lit(0.5)) {
        return domain(format!("cutoff must lie in (0, 0.5) cycles/sample, got {cutoff}"));
    }
    if order < 2 || !order.is_multiple_of(2) {
        return domain(format!("filter order must be even and >= 2, got {order}"));
    }
    let two_pi = T::lit(2.0) * T::PI();
    let center = T::from_count(order as u64 / 2);
    let span = T::from_count(order as u64);
    let half = order / 2;
    let mut coefficients: Vec<T> = (0..=half)
        .map(|k| {
            let kf = T::from_count(k as u64);
            let t = kf - center;
            let ideal = if t == T::zero() {
                T::lit(2.0) * cutoff
            } else {
                (two_pi * cutoff * t).sin() / (T::PI() * t)
            };
            let window = T::lit(0.54) - T::lit(0.46) * (two_pi * kf / span).cos();
            ideal * window
        })
        .collect();
    for k in (0..half).rev() {
        coefficients.push(coefficients[k]);
    }
    let gain: T = coefficients.iter().copied().sum();
    for c in &mut coefficients {
        *c = *c / gain;
    }
    Ok(FirLowPass {
        cutoff,
        order,
        coefficients,
    })
}

/// Filter I and Q independently, padding each end with `order` extra WGN
/// samples so every retained output is a full-overlap convolution.
///
/// The padding is drawn from stream `p.stream | PADDING_STREAM_FLAG` of
/// `p.seed`: first the leading `order` samples, then the trailing ones.
/// Output sample `k` is aligned with input sample `k` (the `order/2` group
/// delay is removed).
pub fn filter_trimmed<T: Real>(b: &IqBuffer<T>, f: &FirLowPass<T>, p: &WgnParams<T>) -> IqBuffer<T> {
    let order = f.order;
    if order == 0 {
        let g = f.coefficients[0];
        return b.scaled(g);
    }
    let mut rng = substream(p.seed, p.stream | PADDING_STREAM_FLAG);
    let lead = generate_wgn_from(&mut rng, order, p.sigma);
    let trail = generate_wgn_from(&mut rng, order, p.sigma);

    let reversed: Vec<T> = f.coefficients.iter().rev().copied().collect();
    let leg = |pre: &[T], body: &[T], post: &[T]| -> Vec<T> {
        let padded: Vec<T> = pre.iter().chain(body).chain(post).copied().collect();
        let offset = order / 2;
        (0..body.len())
            .map(|k| {
                let start = k + offset;
                padded[start..start + order + 1]
                    .iter()
                    .zip(&reversed)
                    .fold(T::zero(), |acc, (&x, &h)| acc + x * h)
            })
            .collect()
    };
    IqBuffer {
        i: leg(&lead.i, &b.i, &trail.i),
        q: leg(&lead.q, &b.q, &trail.q),
    }
}
