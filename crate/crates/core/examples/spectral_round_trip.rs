//! Real FFT round trip, Parseval's identity and the periodogram.
//!
//! ```text
//! cargo run --example spectral_round_trip
//! ```

use freqdenoise::tensor::fft::{self, PsdWindow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 64;
    // two tones on exact bins plus a slow ramp
    let x: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64;
            (2.0 * std::f64::consts::PI * 5.0 * t / n as f64).sin()
                + 0.5 * (2.0 * std::f64::consts::PI * 12.0 * t / n as f64).cos()
                + 0.01 * t
        })
        .collect();

    let (re, im) = fft::rfft(&x)?;
    let back = fft::irfft(&re, &im)?;
    let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("round trip max error: {err:.3e}");

    let psd = fft::periodogram(&x)?;
    let time_energy: f64 = x.iter().map(|v| v * v).sum();
    // full-spectrum energy from the half spectrum: interior bins count twice
    let f = psd.len();
    let freq_energy: f64 = psd
        .iter()
        .enumerate()
        .map(|(k, p)| if k == 0 || k == f - 1 { *p } else { 2.0 * p })
        .sum();
    println!("energy: time {time_energy:.6}, frequency {freq_energy:.6}");

    let hann = fft::periodogram_windowed(&x, PsdWindow::Hann)?;
    println!("bin  rectangular        hann");
    for k in [0, 4, 5, 6, 12, 20] {
        println!("{k:>3}  {:>11.5}  {:>11.5}", psd[k], hann[k]);
    }

    println!("psd([1, 0, -1, 0]) = {:?}", fft::periodogram(&[1.0, 0.0, -1.0, 0.0])?);
    Ok(())
}
