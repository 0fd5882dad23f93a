//! Forward discrete Fourier transform plans.
//!
//! Power-of-two lengths use an iterative radix-2 decimation-in-time kernel.
//! Every other length goes through Bluestein's chirp-z identity, which
//! re-expresses the transform as a circular convolution evaluated with a
//! power-of-two kernel of length at least `2N - 1`.
//!
//! Twiddles and chirps are evaluated directly from `sin`/`cos` with the phase
//! index reduced modulo the period, so no error accumulates from recurrences.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A reusable forward transform for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Single,
    Radix2(Radix2),
    Bluestein(Box<Bluestein>),
}

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    twiddles: Vec<Complex64>,
    bit_rev: Vec<u32>,
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: Radix2,
    /// `exp(-i*pi*n^2/N)` for `n < N`.
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp kernel, pre-scaled by `1/M`.
    kernel: Vec<Complex64>,
}

/// `exp(-2*pi*i*num/den)` with `num` already reduced into `[0, den)`.
fn unit_root(num: u128, den: u128) -> Complex64 {
    let theta = -2.0 * PI * (num as f64) / (den as f64);
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

impl Radix2 {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two() && len >= 2);
        let bits = len.trailing_zeros();
        let twiddles = (0..len / 2)
            .map(|k| unit_root(k as u128, len as u128))
            .collect();
        let bit_rev = (0..len as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        Self {
            len,
            twiddles,
            bit_rev,
        }
    }

    fn process(&self, buf: &mut [Complex64]) {
        let n = self.len;
        for i in 0..n {
            let j = self.bit_rev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    fn process_inverse_unscaled(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.process(buf);
        for v in buf.iter_mut() {
            *v = v.conj();
        }
    }
}

impl Bluestein {
    fn new(len: usize) -> Self {
        let m = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(m);
        let period = 2 * len as u128;
        // exp(-i*pi*n^2/N) = exp(-2*pi*i*(n^2 mod 2N)/(2N))
        let chirp: Vec<Complex64> = (0..len as u128)
            .map(|n| unit_root((n * n) % period, period))
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for n in 1..len {
            let c = chirp[n].conj();
            kernel[n] = c;
            kernel[m - n] = c;
        }
        inner.process(&mut kernel);
        let scale = 1.0 / m as f64;
        for v in kernel.iter_mut() {
            *v *= scale;
        }
        Self {
            inner,
            chirp,
            kernel,
        }
    }

    fn process(&self, buf: &mut [Complex64]) {
        let m = self.inner.len;
        let mut work = vec![Complex64::new(0.0, 0.0); m];
        for ((w, x), c) in work.iter_mut().zip(buf.iter()).zip(&self.chirp) {
            *w = x * c;
        }
        self.inner.process(&mut work);
        for (w, k) in work.iter_mut().zip(&self.kernel) {
            *w *= k;
        }
        self.inner.process_inverse_unscaled(&mut work);
        for ((out, w), c) in buf.iter_mut().zip(&work).zip(&self.chirp) {
            *out = w * c;
        }
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        let kind = match len {
            0 => return Err(Error::EmptyInput),
            1 => Kind::Single,
            n if n.is_power_of_two() => Kind::Radix2(Radix2::new(n)),
            n => Kind::Bluestein(Box::new(Bluestein::new(n))),
        };
        Ok(Self { len, kind })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform, `X[k] = sum_n x[n] exp(-2*pi*i*k*n/N)`.
    pub fn process(&self, buf: &mut [Complex64]) -> Result<()> {
        if buf.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: buf.len(),
            });
        }
        match &self.kind {
            Kind::Single => {}
            Kind::Radix2(r) => r.process(buf),
            Kind::Bluestein(b) => b.process(buf),
        }
        Ok(())
    }

    /// Transform of a real sequence, returned as the full complex spectrum.
    pub fn forward_real(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.process(&mut buf)?;
        Ok(buf)
    }
}
