use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// One-sided magnitude spectrum. `frequencies[k] = k · sample_rate / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// Index of the largest magnitude.
    pub fn peak_bin(&self) -> usize {
        self.magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i)
    }
}

/// DFT magnitudes for bins `0..=n/2` of a real signal.
pub fn dft_magnitude(signal: &[f64], sample_rate: f64) -> Result<Spectrum> {
    if signal.len() < 2 {
        return Err(Error::validation(format!(
            "signal needs at least 2 samples, got {}",
            signal.len()
        )));
    }
    if !(sample_rate > 0.0) || !sample_rate.is_finite() {
        return Err(Error::validation(format!("sample rate must be positive, got {sample_rate}")));
    }
    let n = signal.len();
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let df = sample_rate / n as f64;
    Ok(Spectrum {
        frequencies: (0..=half).map(|k| k as f64 * df).collect(),
        magnitudes: buf[..=half].iter().map(|c| c.norm()).collect(),
    })
}
