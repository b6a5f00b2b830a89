//! Unitary DFT pair, channel frequency response, cyclic prefix and
//! convolution for length-`n` blocks.
//!
//! Two conventions coexist:
//! - signals use the unitary pair, `x[m] = n^{-1/2} Σ_k X[k] e^{+j2πkm/n}`;
//! - the channel response is the plain sum `H[k] = Σ_m h[m] e^{-j2πkm/n}`,
//!   so that `Y[k] = H[k]·X[k] + W[k]` holds for unit-power symbols.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Complex, Error, Result};

const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

macro_rules! block_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Vec<Complex>);

        impl $name {
            pub fn new(values: Vec<Complex>) -> Self {
                Self(values)
            }

            pub fn zeros(n: usize) -> Self {
                Self(vec![ZERO; n])
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[Complex] {
                &self.0
            }

            pub fn as_mut_slice(&mut self) -> &mut [Complex] {
                &mut self.0
            }

            pub fn into_inner(self) -> Vec<Complex> {
                self.0
            }

            /// Squared Euclidean norm.
            pub fn energy(&self) -> f64 {
                crate::group::energy(&self.0)
            }
        }

        impl From<Vec<Complex>> for $name {
            fn from(values: Vec<Complex>) -> Self {
                Self(values)
            }
        }

        impl core::ops::Index<usize> for $name {
            type Output = Complex;
            fn index(&self, i: usize) -> &Complex {
                &self.0[i]
            }
        }
    };
}

block_type!(
    /// Time-domain baseband samples of one OFDM block.
    TimeBlock
);
block_type!(
    /// Per-subcarrier values of one OFDM block.
    FreqBlock
);

fn cis(angle: f64) -> Complex {
    let (s, c) = libm::sincos(angle);
    Complex::new(c, s)
}

/// Factors `n` into primes, smallest first.
fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Precomputed mixed-radix DFT plan for one block length.
///
/// Decimation in time over the prime factorisation of `n`; a prime length
/// degenerates to the direct sum. The twiddle table is immutable after
/// construction, so a plan can be shared across worker threads.
#[derive(Debug, Clone)]
pub struct Dft {
    n: usize,
    factors: Vec<usize>,
    /// `e^{-j2πk/n}` for `k in 0..n`.
    twiddles: Vec<Complex>,
    scale: f64,
}

impl Dft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        let twiddles = (0..n)
            .map(|k| cis(-2.0 * PI * k as f64 / n as f64))
            .collect();
        Ok(Self {
            n,
            factors: prime_factors(n),
            twiddles,
            scale: 1.0 / libm::sqrt(n as f64),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Complex multiply-adds per transform: `n · Σ p` over the prime factors.
    pub fn op_count(&self) -> usize {
        self.n * self.factors.iter().sum::<usize>()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Unnormalised transform with kernel `e^{∓j2πkm/n}`.
    fn raw(&self, input: &[Complex], inverse: bool) -> Vec<Complex> {
        let mut out = vec![ZERO; self.n];
        let max_radix = self.factors.iter().copied().max().unwrap_or(1);
        let mut scratch = vec![ZERO; max_radix];
        self.stage(input, 0, 1, &mut out, 0, inverse, &mut scratch);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn stage(
        &self,
        input: &[Complex],
        offset: usize,
        stride: usize,
        out: &mut [Complex],
        level: usize,
        inverse: bool,
        scratch: &mut [Complex],
    ) {
        let m = out.len();
        if m == 1 {
            out[0] = input[offset];
            return;
        }
        let p = self.factors[level];
        let q = m / p;
        for r in 0..p {
            self.stage(
                input,
                offset + r * stride,
                stride * p,
                &mut out[r * q..(r + 1) * q],
                level + 1,
                inverse,
                scratch,
            );
        }
        // Butterfly: X[k + q·t] = Σ_r W_m^{r(k + q·t)} F_r[k], with W_m = W_n^stride.
        for k in 0..q {
            for r in 0..p {
                scratch[r] = out[r * q + k];
            }
            for t in 0..p {
                let e = k + q * t;
                let mut acc = scratch[0];
                for (r, &f) in scratch.iter().enumerate().take(p).skip(1) {
                    let idx = (r * e * stride) % self.n;
                    let w = self.twiddles[idx];
                    acc += f * if inverse { w.conj() } else { w };
                }
                out[e] = acc;
            }
        }
    }

    /// `t[m] = n^{-1/2} Σ_k f[k] e^{+j2πkm/n}`.
    pub fn inverse_unitary(&self, f: &FreqBlock) -> Result<TimeBlock> {
        self.check(f.len())?;
        let mut v = self.raw(f.as_slice(), true);
        v.iter_mut().for_each(|x| *x *= self.scale);
        Ok(TimeBlock(v))
    }

    /// `f[k] = n^{-1/2} Σ_m t[m] e^{-j2πkm/n}`.
    pub fn forward_unitary(&self, t: &TimeBlock) -> Result<FreqBlock> {
        self.check(t.len())?;
        let mut v = self.raw(t.as_slice(), false);
        v.iter_mut().for_each(|x| *x *= self.scale);
        Ok(FreqBlock(v))
    }

    /// `H[k] = Σ_m h[m] e^{-j2πkm/n}` with no normalisation.
    pub fn channel_response(&self, taps: &[Complex]) -> Result<FreqBlock> {
        self.check(taps.len())?;
        Ok(FreqBlock(self.raw(taps, false)))
    }

    /// Exact inverse of [`Dft::channel_response`], `h[m] = n^{-1} Σ_k H[k] e^{+j2πkm/n}`.
    pub fn impulse_response(&self, response: &FreqBlock) -> Result<Vec<Complex>> {
        self.check(response.len())?;
        let inv_n = 1.0 / self.n as f64;
        let mut v = self.raw(response.as_slice(), true);
        v.iter_mut().for_each(|x| *x *= inv_n);
        Ok(v)
    }
}

/// Direct `O(n²)` DFT, `Σ_m x[m] e^{sign·j2πkm/n}` with no normalisation.
///
/// Kept as the reference the fast plan is checked against.
pub fn dft_direct(x: &[Complex], sign: f64) -> Vec<Complex> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(m, &v)| {
                    let phase = ((k * m) % n) as f64;
                    v * cis(sign * 2.0 * PI * phase / n as f64)
                })
                .sum()
        })
        .collect()
}

pub fn idft_unitary(f: &FreqBlock) -> Result<TimeBlock> {
    Dft::new(f.len())?.inverse_unitary(f)
}

pub fn dft_unitary(t: &TimeBlock) -> Result<FreqBlock> {
    Dft::new(t.len())?.forward_unitary(t)
}

pub fn channel_freq_response(taps: &[Complex]) -> Result<FreqBlock> {
    Dft::new(taps.len())?.channel_response(taps)
}

/// Prepends the last `n_cp` samples of the block.
pub fn add_cp(t: &TimeBlock, n_cp: usize) -> Result<Vec<Complex>> {
    let n = t.len();
    if n_cp > n {
        return Err(Error::CyclicPrefixTooLong { n_cp, n });
    }
    let mut out = Vec::with_capacity(n + n_cp);
    out.extend_from_slice(&t.as_slice()[n - n_cp..]);
    out.extend_from_slice(t.as_slice());
    Ok(out)
}

/// Drops the first `n_cp` samples of an extended block of length `n + n_cp`.
pub fn remove_cp(samples: &[Complex], n_cp: usize) -> Result<TimeBlock> {
    if 2 * n_cp > samples.len() {
        return Err(Error::CyclicPrefixTooLong {
            n_cp,
            n: samples.len().saturating_sub(n_cp),
        });
    }
    Ok(TimeBlock(samples[n_cp..].to_vec()))
}

/// `y[m] = Σ_l h[l]·x[(m - l) mod n]`.
pub fn circular_convolve(x: &TimeBlock, taps: &[Complex]) -> Result<TimeBlock> {
    let n = x.len();
    if taps.len() > n {
        return Err(Error::TapsTooLong {
            taps: taps.len(),
            n,
        });
    }
    let mut y = vec![ZERO; n];
    for (l, &h) in taps.iter().enumerate() {
        if h == ZERO {
            continue;
        }
        for (m, out) in y.iter_mut().enumerate() {
            *out += h * x[(m + n - l) % n];
        }
    }
    Ok(TimeBlock(y))
}

/// Causal FIR filtering of a stream that starts from rest,
/// `y[i] = Σ_l h[l]·x[i - l]`, truncated to the input length.
///
/// `taps` lists `(delay, gain)` pairs so sparse channels stay cheap.
pub fn linear_filter(samples: &[Complex], taps: &[(usize, Complex)]) -> Vec<Complex> {
    let mut y = vec![ZERO; samples.len()];
    for &(delay, gain) in taps {
        for (i, out) in y.iter_mut().enumerate().skip(delay) {
            *out += gain * samples[i - delay];
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn random_vec(n: usize, seed: u64) -> Vec<Complex> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn max_abs_diff(a: &[Complex], b: &[Complex]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn delta(n: usize, at: usize) -> Vec<Complex> {
        let mut v = vec![ZERO; n];
        v[at] = c(1.0, 0.0);
        v
    }

    #[test]
    fn plan_matches_direct_sum() {
        for n in [1, 2, 3, 5, 7, 8, 9, 12, 30, 64, 97, 256] {
            let x = random_vec(n, n as u64);
            let plan = Dft::new(n).unwrap();
            let fast = plan.channel_response(&x).unwrap();
            let slow = dft_direct(&x, -1.0);
            assert!(max_abs_diff(fast.as_slice(), &slow) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn idft_of_dc_and_flat() {
        let n = 16;
        let t = idft_unitary(&FreqBlock::new(delta(n, 0))).unwrap();
        let k = 1.0 / (n as f64).sqrt();
        assert!(t.as_slice().iter().all(|v| (v - c(k, 0.0)).norm() < 1e-15));

        let t = idft_unitary(&FreqBlock::new(vec![c(1.0, 0.0); n])).unwrap();
        let mut expected = vec![ZERO; n];
        expected[0] = c((n as f64).sqrt(), 0.0);
        assert!(max_abs_diff(t.as_slice(), &expected) < 1e-12);
    }

    #[test]
    fn dft_of_shifted_impulse() {
        let n = 12;
        let f = dft_unitary(&TimeBlock::new(delta(n, 1))).unwrap();
        let k = 1.0 / (n as f64).sqrt();
        for (i, v) in f.as_slice().iter().enumerate() {
            let want = cis(-2.0 * PI * i as f64 / n as f64) * k;
            assert!((v - want).norm() < 1e-14);
        }
    }

    #[test]
    fn channel_response_examples() {
        let n = 8;
        let flat = channel_freq_response(&delta(n, 0)).unwrap();
        assert!(flat.as_slice().iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
        let half = channel_freq_response(&delta(n, n / 2)).unwrap();
        for (k, v) in half.as_slice().iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - c(sign, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn structured_taps_give_periodic_response() {
        // Support on <n/d> = <4> in Z_12 makes H periodic with period d = 3.
        let mut h = vec![ZERO; 12];
        h[0] = c(0.9, 0.1);
        h[4] = c(-0.3, 0.4);
        h[8] = c(0.2, -0.6);
        let resp = dft_direct(&h, -1.0);
        for k in 0..12 {
            assert!((resp[k] - resp[(k + 3) % 12]).norm() < 1e-12);
        }
        let fast = channel_freq_response(&h).unwrap();
        assert!(max_abs_diff(fast.as_slice(), &resp) < 1e-12);
    }

    #[test]
    fn impulse_response_inverts_channel_response() {
        let plan = Dft::new(64).unwrap();
        let h = random_vec(64, 9);
        let back = plan
            .impulse_response(&plan.channel_response(&h).unwrap())
            .unwrap();
        assert!(max_abs_diff(&back, &h) < 1e-13);
    }

    #[test]
    fn cp_examples() {
        let t = TimeBlock::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(add_cp(&t, 0).unwrap(), t.as_slice());
        let ext = add_cp(&t, 2).unwrap();
        let want: Vec<_> = [3.0, 4.0, 1.0, 2.0, 3.0, 4.0].iter().map(|&r| c(r, 0.0)).collect();
        assert_eq!(ext, want);
        assert_eq!(remove_cp(&ext, 2).unwrap(), t);
        assert_eq!(
            add_cp(&t, 5),
            Err(Error::CyclicPrefixTooLong { n_cp: 5, n: 4 })
        );
    }

    #[test]
    fn convolution_examples() {
        let x = TimeBlock::new(random_vec(8, 3));
        assert_eq!(circular_convolve(&x, &delta(1, 0)).unwrap(), x);
        let shifted = circular_convolve(&x, &[ZERO, c(1.0, 0.0)]).unwrap();
        for m in 0..8 {
            assert_eq!(shifted[m], x[(m + 7) % 8]);
        }
        assert_eq!(
            circular_convolve(&x, &random_vec(9, 1)),
            Err(Error::TapsTooLong { taps: 9, n: 8 })
        );
    }

    #[test]
    fn length_checks() {
        let plan = Dft::new(8).unwrap();
        assert_eq!(
            plan.forward_unitary(&TimeBlock::zeros(4)),
            Err(Error::LengthMismatch {
                expected: 8,
                got: 4
            })
        );
        assert_eq!(Dft::new(0).unwrap_err(), Error::ZeroOrder);
    }

    #[test]
    fn op_count_is_n_times_factor_sum() {
        assert_eq!(Dft::new(256).unwrap().op_count(), 256 * 16);
        assert_eq!(Dft::new(12).unwrap().op_count(), 12 * 7);
    }
}
