//! FFT magnitude spectrum of the pulse and peak extraction.
//!
//! The Gaussian envelope is its own window, so the samples are taken plain
//! over `[-t_span, t_span]` and zero-padded to reach the requested frequency
//! resolution. Peaks are local maxima above a floor, refined parabolically
//! over three bins.

use num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::real::Real;

/// Default peak floor as a fraction of the global maximum. Matches the
/// dynamic range that is visible in the pulse spectra plots.
pub const DEFAULT_PEAK_FLOOR: f64 = 1e-3;

/// A detected spectral peak (frequency in mass units, amplitude relative to
/// the global maximum).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak<T> {
    pub freq: T,
    pub amp: T,
}

/// Magnitude spectrum of `E(t)`, normalized so the largest amplitude is 1.
#[derive(Debug, Clone)]
pub struct FieldSpectrum<T> {
    /// Uniformly spaced frequency samples, strictly increasing from 0.
    pub freqs: Vec<T>,
    /// |FFT| at each sample, max-normalized.
    pub amplitude: Vec<T>,
    /// Detected peaks, sorted by frequency.
    pub peaks: Vec<SpectralPeak<T>>,
    /// Actual bin spacing (at most the requested resolution).
    pub resolution: T,
}

impl<T: Real> FieldSpectrum<T> {
    /// Highest-amplitude peak, if any.
    pub fn dominant_peak(&self) -> Option<SpectralPeak<T>> {
        self.peaks
            .iter()
            .copied()
            .max_by(|a, b| a.amp.partial_cmp(&b.amp).unwrap())
    }
}

/// Spectrum with the default peak floor.
pub fn field_spectrum<T: Real + FftNum>(
    cfg: &FieldConfig<T>,
    resolution: T,
) -> Result<FieldSpectrum<T>> {
    field_spectrum_with_floor(cfg, resolution, T::of(DEFAULT_PEAK_FLOOR))
}

/// Spectrum of the pulse at the requested frequency resolution.
///
/// `resolution` must resolve the sidebands: at most `omega_m / 10` when the
/// field is modulated.
pub fn field_spectrum_with_floor<T: Real + FftNum>(
    cfg: &FieldConfig<T>,
    resolution: T,
    floor: T,
) -> Result<FieldSpectrum<T>> {
    if !(resolution > T::zero()) {
        return Err(Error::InvalidConfig(format!(
            "spectrum resolution must be positive, got {resolution}"
        )));
    }
    if cfg.omega_m() > T::zero() && resolution > cfg.omega_m() / T::of(10.0) {
        return Err(Error::InvalidConfig(format!(
            "resolution {resolution} too coarse to resolve sidebands; need <= omega_m/10 = {}",
            cfg.omega_m() / T::of(10.0)
        )));
    }
    if !(floor > T::zero() && floor < T::one()) {
        return Err(Error::InvalidConfig(format!(
            "peak floor must lie in (0, 1), got {floor}"
        )));
    }

    // stored band: everything the modulation can reach, with margin
    let f_keep = (cfg.omega() * T::of(2.0)).max(
        cfg.omega()
            + (cfg.modulation_depth() + T::of(12.0)) * cfg.omega_m()
            + T::of(8.0) / cfg.tau(),
    );
    // sample fast enough that content near f_keep is far below Nyquist
    let dt = T::PI() / (T::of(8.0) * f_keep);
    let n_samples = (T::of(2.0) * cfg.t_span() / dt).ceil().to_f64_lossy() as usize + 1;

    // zero-pad to reach the requested bin spacing
    let mut fft_len = n_samples.next_power_of_two();
    let target = (T::of(2.0) * T::PI() / (resolution * dt))
        .ceil()
        .to_f64_lossy() as usize;
    while fft_len < target {
        fft_len *= 2;
    }

    let mut buf: Vec<Complex<T>> = (0..fft_len)
        .map(|i| {
            if i < n_samples {
                let t = -cfg.t_span() + dt * T::of(i as f64);
                Complex::new(cfg.eval_real(t), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(fft_len).process(&mut buf);

    let bin = T::of(2.0) * T::PI() / (T::of(fft_len as f64) * dt);
    let n_keep = (f_keep / bin).floor().to_f64_lossy() as usize + 1;
    let n_keep = n_keep.min(fft_len / 2);

    let mut freqs = Vec::with_capacity(n_keep);
    let mut amplitude = Vec::with_capacity(n_keep);
    let mut max_amp = T::zero();
    for (j, value) in buf.iter().take(n_keep).enumerate() {
        let a = value.norm();
        freqs.push(bin * T::of(j as f64));
        amplitude.push(a);
        if a > max_amp {
            max_amp = a;
        }
    }
    if max_amp > T::zero() {
        for a in amplitude.iter_mut() {
            *a = *a / max_amp;
        }
    }

    let peaks = detect_peaks(&freqs, &amplitude, floor);
    Ok(FieldSpectrum {
        freqs,
        amplitude,
        peaks,
        resolution: bin,
    })
}

/// Local maxima above `floor`, parabolically refined over three bins.
/// Shared by the field spectrum and the momentum-spectrum peak finder.
pub(crate) fn detect_peaks<T: Real>(xs: &[T], ys: &[T], floor: T) -> Vec<SpectralPeak<T>> {
    let max = ys.iter().copied().fold(T::zero(), T::max);
    let threshold = floor * max;
    let mut peaks = Vec::new();
    if xs.len() < 3 || max == T::zero() {
        return peaks;
    }
    for j in 1..ys.len() - 1 {
        let (lo, mid, hi) = (ys[j - 1], ys[j], ys[j + 1]);
        if mid > lo && mid > hi && mid >= threshold {
            let denom = lo - T::of(2.0) * mid + hi;
            let (freq, amp) = if denom < T::zero() {
                let d = T::of(0.5) * (lo - hi) / denom;
                let step = xs[j] - xs[j - 1];
                (xs[j] + d * step, mid - T::of(0.25) * (lo - hi) * d)
            } else {
                (xs[j], mid)
            };
            peaks.push(SpectralPeak { freq, amp });
        }
    }
    peaks
}
