use std::f64::consts::PI;

use num_complex::Complex64;

use crate::toeplitz::ReflectionCoords;

use super::cells::CellField;

/// Frequencies `−1/2 + j/n_freq`, `j = 0, …, n_freq − 1`.
pub fn frequency_grid(n_freq: usize) -> Vec<f64> {
    (0..n_freq)
        .map(|j| -0.5 + j as f64 / n_freq as f64)
        .collect()
}

/// Autoregressive power spectral density `P_{n−1} / |1 + Σ a_k e^{−2πikf}|²`
/// on [`frequency_grid`].
pub fn ar_spectrum(c: &ReflectionCoords, n_freq: usize) -> Vec<f64> {
    let a = c.prediction_filter();
    let innovation = *c.prediction_errors().last().expect("at least P₀");
    frequency_grid(n_freq)
        .into_iter()
        .map(|f| {
            let w = Complex64::from_polar(1.0, -2.0 * PI * f);
            // Horner in w over the filter taps.
            let resp = a
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, ak| acc * w + ak);
            innovation / resp.norm_sqr()
        })
        .collect()
}

/// One spectrum row per cell.
pub fn field_spectra(field: &CellField, n_freq: usize) -> Vec<Vec<f64>> {
    field
        .cells()
        .iter()
        .map(|c| ar_spectrum(c, n_freq))
        .collect()
}
