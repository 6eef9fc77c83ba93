use std::f64::consts::TAU;

use super::ModalProperties;
use crate::error::{Error, Result};
use crate::numerics::dft_magnitude;

/// Synthesizes the free decay after a unit impulse as a sum of damped modal
/// sinusoids, takes its magnitude spectrum and returns the frequencies
/// (rad/s, ascending) of the `n_modes` strongest spectral peaks.
///
/// Resolution is one bin, `2π / duration` rad/s.
pub fn impulse_response_and_extract(
    modal: &ModalProperties,
    damping_ratio: f64,
    duration: f64,
    sample_rate: f64,
) -> Result<Vec<f64>> {
    if !(damping_ratio > 0.0 && damping_ratio < 0.1) {
        return Err(Error::validation(format!(
            "damping ratio must be in (0, 0.1), got {damping_ratio}"
        )));
    }
    if !(duration > 0.0) || !(sample_rate > 0.0) {
        return Err(Error::validation("duration and sample rate must be positive"));
    }
    let n_modes = modal.n_modes();
    if n_modes == 0 {
        return Err(Error::validation("no modes to synthesize"));
    }
    let max_hz = modal.frequencies.iter().fold(0.0_f64, |m, &w| m.max(w / TAU));
    if sample_rate <= 2.0 * max_hz {
        return Err(Error::validation(format!(
            "sample rate {sample_rate} Hz is below the Nyquist rate for a {max_hz:.3} Hz mode"
        )));
    }

    let n_samples = (duration * sample_rate).round() as usize;
    let dt = 1.0 / sample_rate;
    let signal: Vec<f64> = (0..n_samples)
        .map(|i| {
            let t = i as f64 * dt;
            modal
                .frequencies
                .iter()
                .map(|&w| {
                    let wd = w * (1.0 - damping_ratio * damping_ratio).sqrt();
                    (-damping_ratio * w * t).exp() * (wd * t).sin()
                })
                .sum::<f64>()
        })
        .collect();

    let spectrum = dft_magnitude(&signal, sample_rate)?;
    let mags = &spectrum.magnitudes;
    let mut peaks: Vec<usize> = (1..mags.len().saturating_sub(1))
        .filter(|&k| mags[k] > mags[k - 1] && mags[k] >= mags[k + 1])
        .collect();
    if peaks.len() < n_modes {
        return Err(Error::numeric(format!(
            "found {} spectral peaks, need {n_modes}; modes may be closer than one bin",
            peaks.len()
        )));
    }
    peaks.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]).then(a.cmp(&b)));
    let mut found: Vec<f64> = peaks[..n_modes]
        .iter()
        .map(|&k| spectrum.frequencies[k] * TAU)
        .collect();
    found.sort_by(f64::total_cmp);
    Ok(found)
}
