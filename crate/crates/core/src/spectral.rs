//! Radix-2 decimation-in-time FFT, inverse FFT, and wavenumber utilities.
//!
//! Conventions fixed here and relied on by the rest of the crate:
//!
//! * forward transform is unnormalized: `X_k = Σ_n x_n · e^{-2πi kn/N}`;
//! * inverse transform carries the `1/N` factor;
//! * wavenumbers are ordered `[0, 1, ..., N/2-1, -N/2, ..., -1]`;
//! * when an odd-order spectral derivative factor `(ik)^n` is formed, the
//!   Nyquist mode `k = -N/2` is zeroed — `(ik)^odd` at Nyquist has no
//!   real-signal counterpart and would leak an imaginary component into the
//!   recovered field.
//!
//! The transform is the iterative bit-reversal form of decimation-in-time,
//! so sequence lengths must be powers of two (N = 2^r, r ≥ 1).

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectralError {
    #[error("sequence length {len} is not a power of two (>= 2)")]
    InvalidLength { len: usize },
}

fn check_length(len: usize) -> Result<(), SpectralError> {
    if len >= 2 && len.is_power_of_two() {
        Ok(())
    } else {
        Err(SpectralError::InvalidLength { len })
    }
}

/// In-place bit-reversal permutation.
fn bit_reverse_permute(data: &mut [Complex64]) {
    let n = data.len();
    let shift = usize::BITS - n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if j > i {
            data.swap(i, j);
        }
    }
}

/// Butterfly passes shared by the forward and inverse transforms;
/// `sign` is the sign of the twiddle exponent (-1 forward, +1 inverse).
fn dit_transform(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    bit_reverse_permute(data);

    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / (len as f64);
        let w_len = Complex64::new(ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let a = data[start + k];
                let b = data[start + k + len / 2] * w;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
                w *= w_len;
            }
        }
        len <<= 1;
    }
}

/// Forward DFT via decimation-in-time: `X_k = Σ_n x_n e^{-2πi kn/N}`.
pub fn fft(x: &[Complex64]) -> Result<Vec<Complex64>, SpectralError> {
    check_length(x.len())?;
    let mut data = x.to_vec();
    dit_transform(&mut data, -1.0);
    Ok(data)
}

/// Inverse DFT: `x_n = (1/N) Σ_k X_k e^{+2πi kn/N}`, so `ifft(fft(x)) = x`.
pub fn ifft(x: &[Complex64]) -> Result<Vec<Complex64>, SpectralError> {
    check_length(x.len())?;
    let mut data = x.to_vec();
    dit_transform(&mut data, 1.0);
    let scale = 1.0 / (x.len() as f64);
    for z in &mut data {
        *z *= scale;
    }
    Ok(data)
}

/// Signed wavenumbers in transform order: `[0, 1, ..., N/2-1, -N/2, ..., -1]`.
pub fn wavenumbers(n: usize) -> Result<Vec<i64>, SpectralError> {
    check_length(n)?;
    let half = (n / 2) as i64;
    Ok((0..half).chain(-half..0).collect())
}

/// Wavenumbers for an odd-order derivative factor: as [`wavenumbers`] but
/// with the Nyquist mode zeroed.
pub fn odd_derivative_wavenumbers(n: usize) -> Result<Vec<i64>, SpectralError> {
    let mut k = wavenumbers(n)?;
    k[n / 2] = 0;
    Ok(k)
}

/// n-th spectral derivative on the uniform `[0, 2π)` grid: transform,
/// multiply by `(ik)^order`, transform back.
pub fn spectral_derivative(x: &[Complex64], order: u32) -> Result<Vec<Complex64>, SpectralError> {
    let n = x.len();
    let k = if order % 2 == 1 {
        odd_derivative_wavenumbers(n)?
    } else {
        wavenumbers(n)?
    };
    let mut spectrum = fft(x)?;
    for (z, &ki) in spectrum.iter_mut().zip(&k) {
        *z *= Complex64::new(0.0, ki as f64).powu(order);
    }
    ifft(&spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Naive O(N²) DFT used as the oracle for the fast transform.
    fn dft_naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        let ang = -2.0 * PI * (k as f64) * (j as f64) / (n as f64);
                        x[j] * c(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    /// Deterministic pseudo-random stream for oracle sweeps (xorshift64*).
    struct Rng(u64);

    impl Rng {
        fn next_f64(&mut self) -> f64 {
            self.0 ^= self.0 >> 12;
            self.0 ^= self.0 << 25;
            self.0 ^= self.0 >> 27;
            let bits = self.0.wrapping_mul(0x2545F4914F6CDD1D);
            (bits >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        }

        fn complex_vec(&mut self, n: usize) -> Vec<Complex64> {
            (0..n).map(|_| c(self.next_f64(), self.next_f64())).collect()
        }
    }

    #[test]
    fn delta_transforms_to_constant() {
        let x = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let spectrum = fft(&x).unwrap();
        for z in spectrum {
            assert!((z - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_transforms_to_dc_only() {
        let x = vec![c(2.5, -1.0); 4];
        let spectrum = fft(&x).unwrap();
        assert!((spectrum[0] - c(10.0, -4.0)).norm() < 1e-14);
        for z in &spectrum[1..] {
            assert!(z.norm() < 1e-14);
        }
    }

    #[test]
    fn shifted_delta_four_point_case() {
        // DFT of [0,1,0,0] evaluated by hand: [1, -i, -1, i].
        let x = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let spectrum = fft(&x).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 1.0)];
        assert!(max_err(&spectrum, &expected) < 1e-15);
    }

    #[test]
    fn ifft_of_ones_recovers_delta() {
        let spectrum = vec![c(1.0, 0.0); 4];
        let x = ifft(&spectrum).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(max_err(&x, &expected) < 1e-15);
    }

    #[test]
    fn dc_spectrum_recovers_constant() {
        let n = 8;
        let mut spectrum = vec![c(0.0, 0.0); n];
        spectrum[0] = c(n as f64 * 3.0, 0.0);
        let x = ifft(&spectrum).unwrap();
        for z in x {
            assert!((z - c(3.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip_identity() {
        let mut rng = Rng(0x9E3779B97F4A7C15);
        for &n in &[2usize, 8, 64, 256] {
            let x = rng.complex_vec(n);
            let back = ifft(&fft(&x).unwrap()).unwrap();
            assert!(max_err(&x, &back) < 1e-12, "round trip failed at n={n}");
        }
    }

    #[test]
    fn matches_naive_dft_across_sizes() {
        let mut rng = Rng(42);
        for r in 1..=8 {
            let n = 1usize << r;
            for _ in 0..13 {
                let x = rng.complex_vec(n);
                let fast = fft(&x).unwrap();
                let slow = dft_naive(&x);
                assert!(max_err(&fast, &slow) < 1e-10, "mismatch at n={n}");
            }
        }
    }

    #[test]
    fn parseval_identity() {
        let mut rng = Rng(7);
        for &n in &[4usize, 32, 128] {
            let x = rng.complex_vec(n);
            let spectrum = fft(&x).unwrap();
            let time_energy: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let freq_energy: f64 =
                spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>() / (n as f64);
            assert!((time_energy - freq_energy).abs() <= 1e-10 * time_energy);
        }
    }

    #[test]
    fn invalid_lengths_rejected() {
        for &n in &[0usize, 1, 3, 6, 12] {
            let x = vec![c(0.0, 0.0); n];
            assert_eq!(fft(&x), Err(SpectralError::InvalidLength { len: n }));
            assert_eq!(ifft(&x), Err(SpectralError::InvalidLength { len: n }));
            assert_eq!(wavenumbers(n), Err(SpectralError::InvalidLength { len: n }));
        }
    }

    #[test]
    fn wavenumber_orderings() {
        assert_eq!(wavenumbers(2).unwrap(), vec![0, -1]);
        assert_eq!(wavenumbers(4).unwrap(), vec![0, 1, -2, -1]);
        assert_eq!(
            wavenumbers(8).unwrap(),
            vec![0, 1, 2, 3, -4, -3, -2, -1]
        );
        // The sum collapses to the unpaired Nyquist entry.
        for &n in &[2usize, 4, 16, 128] {
            let total: i64 = wavenumbers(n).unwrap().iter().sum();
            assert_eq!(total, -((n / 2) as i64));
        }
        assert_eq!(odd_derivative_wavenumbers(4).unwrap(), vec![0, 1, 0, -1]);
    }

    #[test]
    fn spectral_derivative_of_sine_is_cosine() {
        let n = 64;
        let grid: Vec<f64> = (0..n).map(|j| 2.0 * PI * (j as f64) / (n as f64)).collect();
        let x: Vec<Complex64> = grid.iter().map(|&z| c(z.sin(), 0.0)).collect();
        let deriv = spectral_derivative(&x, 1).unwrap();
        for (z, &g) in deriv.iter().zip(&grid) {
            assert!((z.re - g.cos()).abs() < 1e-10);
            assert!(z.im.abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn linearity(seed in any::<u64>(), a in -3.0_f64..3.0, b in -3.0_f64..3.0) {
            let mut rng = Rng(seed | 1);
            let n = 32;
            let x = rng.complex_vec(n);
            let y = rng.complex_vec(n);
            let combo: Vec<Complex64> = x.iter().zip(&y).map(|(u, v)| u * a + v * b).collect();
            let lhs = fft(&combo).unwrap();
            let fx = fft(&x).unwrap();
            let fy = fft(&y).unwrap();
            let scale: f64 = lhs.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for i in 0..n {
                prop_assert!((lhs[i] - (fx[i] * a + fy[i] * b)).norm() <= 1e-12 * scale);
            }
        }
    }
}
