//! Scalar summaries of averaged correlation curves.

use khlab_core::dynamics::{frequency_spectrum, moving_rms};
use khlab_core::{Error, Result};

/// First local minimum of `|x|` that lies below `frac * |x(0)|`.
pub fn first_node(times: &[f64], x: &[f64], frac: f64) -> Option<f64> {
    let a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let thresh = frac * a.first()?;
    (1..a.len().saturating_sub(1))
        .find(|&k| a[k] < thresh && a[k] <= a[k - 1] && a[k] <= a[k + 1])
        .map(|k| times[k])
}

/// Angular frequency of the strongest nonzero spectral line of `x - mean(x)`.
pub fn dominant_frequency(times: &[f64], x: &[f64]) -> Result<f64> {
    let mu = x.iter().sum::<f64>() / x.len().max(1) as f64;
    let y: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let spec = frequency_spectrum(times, std::slice::from_ref(&y))?;
    spec.modulus_of_mean
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| spec.omega[k])
        .ok_or_else(|| Error::Analysis("series too short for a carrier".into()))
}

/// First time at which the moving RMS of `x` (window `4 pi / carrier`)
/// falls to `1/e` of its value at the first full window. `None` if it never does.
pub fn envelope_decay_time(times: &[f64], x: &[f64]) -> Result<Option<f64>> {
    if times.len() < 3 || times.len() != x.len() {
        return Err(Error::Invalid("need matching series of at least three samples".into()));
    }
    let dt = times[1] - times[0];
    let carrier = dominant_frequency(times, x)?;
    let width = ((4.0 * std::f64::consts::PI / carrier) / dt).round().max(1.0) as usize;
    let env = moving_rms(x, width);
    let start = width / 2;
    if start >= env.len() {
        return Err(Error::Analysis("run shorter than one envelope window".into()));
    }
    let target = env[start] / std::f64::consts::E;
    Ok((start..env.len()).find(|&k| env[k] <= target).map(|k| times[k]))
}
