//! Reference computations shared by the integration tests. They deliberately
//! avoid the library's own numerics.

#![allow(dead_code)]

use num_complex::Complex32;
use papr_core::iq_io::IqCapture;
use papr_core::rng::substream;
use papr_core::signal_gen::generate_wgn_from;

/// Kahan–Babuška–Neumaier compensated sum.
#[derive(Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn harmonic_oracle(n: u64) -> f64 {
    let mut s = Neumaier::default();
    for k in 1..=n {
        s.add(1.0 / k as f64);
    }
    s.value()
}

/// Composite Simpson rule with `intervals` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals.is_multiple_of(2));
    let h = (b - a) / intervals as f64;
    let mut s = Neumaier::default();
    s.add(f(a));
    s.add(f(b));
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s.add(w * f(a + h * k as f64));
    }
    s.value() * h / 3.0
}

/// Two-sided one-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let m = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).max((i + 1) as f64 / m - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 0.01.
pub fn ks_critical_001(m: usize) -> f64 {
    1.627_6 / (m as f64).sqrt()
}

/// Max-over-mean of `|z|²` computed directly.
pub fn papr_direct(i: &[f64], q: &[f64]) -> f64 {
    let p: Vec<f64> = i.iter().zip(q).map(|(a, b)| a * a + b * b).collect();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    p.iter().cloned().fold(0.0, f64::max) / mean
}

pub fn peak_power_direct(i: &[f64], q: &[f64]) -> f64 {
    i.iter().zip(q).map(|(a, b)| a * a + b * b).fold(0.0, f64::max)
}

pub fn wgn_samples(n: usize, seed: u64, stream: u64) -> Vec<Complex32> {
    let b = generate_wgn_from(&mut substream(seed, stream), n, 1.0f64);
    b.i().iter()
        .zip(b.q())
        .map(|(&i, &q)| Complex32::new(i as f32, q as f32))
        .collect()
}

pub fn wgn_capture(n: usize, seed: u64, sample_rate_hz: f64, center_frequency_hz: f64) -> IqCapture {
    IqCapture::new(wgn_samples(n, seed, 0), sample_rate_hz, center_frequency_hz, "synthetic wgn").unwrap()
}
