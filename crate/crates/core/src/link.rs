//! One OFDM link trial: QPSK mapping onto the active tones, channel and
//! noise, pilot-based estimation, one-tap equalisation and metrics.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::channel::{self, Fading, NoiseSpec, SampleGrid, TapProfile};
use crate::estimators::{self, EstimateResult, LmmseFilter};
use crate::group::SubgroupSpec;
use crate::transform::{Dft, FreqBlock};
use crate::{Complex, Error, Result};

/// Channel magnitude below which a tone is treated as erased.
pub const ERASURE_THRESHOLD: f64 = 1e-9;

/// Gray-labelled QPSK with unit average power: the first bit selects the
/// sign of the imaginary part, the second the sign of the real part.
pub fn qpsk_symbol(b0: bool, b1: bool) -> Complex {
    let re = if b1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    let im = if b0 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Complex::new(re, im)
}

pub fn qpsk_map(bits: &[bool]) -> Result<Vec<Complex>> {
    if bits.len() % 2 != 0 {
        return Err(Error::OddBitCount(bits.len()));
    }
    Ok(bits.chunks_exact(2).map(|b| qpsk_symbol(b[0], b[1])).collect())
}

/// Quadrant decision.
pub fn qpsk_decide(s: Complex) -> (bool, bool) {
    (s.im < 0.0, s.re < 0.0)
}

pub fn qpsk_demap(symbols: &[Complex]) -> Vec<bool> {
    symbols
        .iter()
        .flat_map(|&s| {
            let (b0, b1) = qpsk_decide(s);
            [b0, b1]
        })
        .collect()
}

/// Closed-form QPSK symbol error rate over AWGN at symbol SNR `gamma`
/// (linear): `erfc(√(γ/2)) - ¼·erfc²(√(γ/2))`.
pub fn qpsk_ser_awgn(gamma: f64) -> f64 {
    let e = libm::erfc(libm::sqrt(gamma / 2.0));
    e - 0.25 * e * e
}

/// Data tones of one OFDM symbol: everything outside the nulled subgroup.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneAllocation {
    n: usize,
    spec: Option<SubgroupSpec>,
    active: Vec<usize>,
    eta: f64,
}

impl ToneAllocation {
    /// Nulls `H = <d>`; `eta = 1 - 1/d`.
    pub fn new(spec: SubgroupSpec) -> Self {
        let n = spec.n();
        let active: Vec<usize> = (0..n).filter(|&k| !spec.contains_h(k)).collect();
        let eta = active.len() as f64 / n as f64;
        Self {
            n,
            spec: Some(spec),
            active,
            eta,
        }
    }

    pub fn for_generator(n: usize, d: usize) -> Result<Self> {
        Ok(Self::new(SubgroupSpec::new(n, d)?))
    }

    /// Every tone active, no nulls.
    pub fn full_band(n: usize) -> Self {
        Self {
            n,
            spec: None,
            active: (0..n).collect(),
            eta: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> Option<&SubgroupSpec> {
        self.spec.as_ref()
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Fraction of active tones.
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Places `data` on the active tones in index order; nulled tones are zero.
pub fn build_ofdm_symbol(data: &[Complex], alloc: &ToneAllocation) -> Result<FreqBlock> {
    if data.len() != alloc.active.len() {
        return Err(Error::LengthMismatch {
            expected: alloc.active.len(),
            got: data.len(),
        });
    }
    let mut bins = vec![Complex::new(0.0, 0.0); alloc.n];
    for (&k, &s) in alloc.active.iter().zip(data) {
        bins[k] = s;
    }
    Ok(FreqBlock::new(bins))
}

/// One-tap equaliser `Y[k]/Ĥ[k]` on active tones. Tones with
/// `|Ĥ[k]| < ERASURE_THRESHOLD` come back as `None`.
pub fn equalize(y: &FreqBlock, h_hat: &FreqBlock, alloc: &ToneAllocation) -> Vec<Option<Complex>> {
    alloc
        .active
        .iter()
        .map(|&k| {
            let h = h_hat[k];
            if h.norm() < ERASURE_THRESHOLD {
                None
            } else {
                Some(y[k] / h)
            }
        })
        .collect()
}

/// `(1/n) Σ_k |H[k] - Ĥ[k]|²` over all tones.
pub fn mse_metric(h_true: &FreqBlock, h_hat: &FreqBlock) -> f64 {
    let n = h_true.len();
    let sum: f64 = h_true
        .as_slice()
        .iter()
        .zip(h_hat.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    sum / n as f64
}

/// Effective throughput in bits per subcarrier use, `eta·(1 - SER)·log2 M`.
pub fn throughput_metric(ser: f64, alloc: &ToneAllocation, bits_per_symbol: usize) -> f64 {
    alloc.eta * (1.0 - ser) * bits_per_symbol as f64
}

/// Expected time-domain MSE of a projected noisy estimate:
/// `(E_total - E_sub)/n + σ²·d*/n`.
pub fn predicted_mse(e_total: f64, e_sub: f64, sigma2: f64, d_star: usize, n: usize) -> f64 {
    (e_total - e_sub) / n as f64 + sigma2 * d_star as f64 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    Ls,
    Lmmse,
    Subgroup,
    /// Genie receiver using the true channel response.
    PerfectCsi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub mse: f64,
    pub ser: f64,
    pub ber: f64,
    pub throughput: f64,
    pub chosen_d: Option<usize>,
}

/// Everything fixed across the trials of one `(channel, d, SNR)` cell.
#[derive(Debug, Clone, Copy)]
pub struct TrialSetup<'a> {
    pub dft: &'a Dft,
    pub grid: SampleGrid,
    pub alloc: &'a ToneAllocation,
    pub profile: &'a TapProfile,
    pub fading: Fading,
    pub noise: NoiseSpec,
    pub epsilon: f64,
    /// Required when [`Estimator::Lmmse`] is requested.
    pub lmmse: Option<&'a LmmseFilter>,
}

fn random_qpsk<R: Rng + ?Sized>(count: usize, rng: &mut R) -> (Vec<bool>, Vec<Complex>) {
    let bits: Vec<bool> = (0..2 * count).map(|_| rng.random()).collect();
    let syms = bits.chunks_exact(2).map(|b| qpsk_symbol(b[0], b[1])).collect();
    (bits, syms)
}

/// Runs one trial and scores every requested estimator on the same
/// channel, pilot, noise and data realisations.
pub fn run_trial<R: Rng + ?Sized>(
    setup: &TrialSetup<'_>,
    estimators: &[Estimator],
    rng: &mut R,
) -> Result<Vec<TrialMetrics>> {
    let dft = setup.dft;
    let alloc = setup.alloc;
    if dft.len() != alloc.n || setup.grid.n != alloc.n {
        return Err(Error::LengthMismatch {
            expected: alloc.n,
            got: dft.len(),
        });
    }
    let channel = channel::realize_channel(setup.profile, &setup.grid, setup.fading, dft, rng)?;

    let (_, pilot_syms) = random_qpsk(alloc.active.len(), rng);
    let pilot = build_ofdm_symbol(&pilot_syms, alloc)?;
    let rx_pilot = transmit(&pilot, &channel, &setup.noise, dft, rng)?;

    let (data_bits, data_syms) = random_qpsk(alloc.active.len(), rng);
    let data = build_ofdm_symbol(&data_syms, alloc)?;
    let rx_data = transmit(&data, &channel, &setup.noise, dft, rng)?;

    let mut ls_cache: Option<EstimateResult> = None;
    let mut out = Vec::with_capacity(estimators.len());
    for &est in estimators {
        let (h_hat, chosen_d) = match est {
            Estimator::PerfectCsi => (channel.freq().clone(), None),
            Estimator::Ls | Estimator::Lmmse => {
                let ls = match &ls_cache {
                    Some(ls) => ls.clone(),
                    None => {
                        let ls = estimators::ls_estimate(&rx_pilot, &pilot, &alloc.active, dft)?;
                        ls_cache = Some(ls.clone());
                        ls
                    }
                };
                if est == Estimator::Ls {
                    (ls.h_hat_freq, None)
                } else {
                    let filter = setup.lmmse.ok_or_else(|| {
                        Error::InvalidConfig("LMMSE requested without receiver statistics".into())
                    })?;
                    (estimators::lmmse_estimate(&ls.h_hat_freq, filter, dft)?.h_hat_freq, None)
                }
            }
            Estimator::Subgroup => {
                let r = estimators::subgroup_estimate(&rx_pilot, &pilot, &alloc.active, setup.epsilon, dft)?;
                (r.h_hat_freq, r.chosen_d)
            }
        };
        out.push(score(channel.freq(), &h_hat, &rx_data, &data_bits, alloc, chosen_d));
    }
    Ok(out)
}

fn transmit<R: Rng + ?Sized>(
    symbol: &FreqBlock,
    channel: &channel::ChannelRealization,
    noise: &NoiseSpec,
    dft: &Dft,
    rng: &mut R,
) -> Result<FreqBlock> {
    let tx = dft.inverse_unitary(symbol)?;
    let rx = channel::apply_channel_awgn(&tx, channel, noise, rng)?;
    dft.forward_unitary(&rx)
}

fn score(
    h_true: &FreqBlock,
    h_hat: &FreqBlock,
    rx: &FreqBlock,
    bits: &[bool],
    alloc: &ToneAllocation,
    chosen_d: Option<usize>,
) -> TrialMetrics {
    let eq = equalize(rx, h_hat, alloc);
    let mut symbol_errors = 0usize;
    let mut bit_errors = 0usize;
    for (s, b) in eq.iter().zip(bits.chunks_exact(2)) {
        // Erasures decide to the fixed symbol 00.
        let (d0, d1) = s.map(qpsk_decide).unwrap_or((false, false));
        let e = (d0 != b[0]) as usize + (d1 != b[1]) as usize;
        bit_errors += e;
        symbol_errors += (e > 0) as usize;
    }
    let symbols = eq.len().max(1) as f64;
    let ser = symbol_errors as f64 / symbols;
    TrialMetrics {
        mse: mse_metric(h_true, h_hat),
        ser,
        ber: bit_errors as f64 / (2.0 * symbols),
        throughput: throughput_metric(ser, alloc, 2),
        chosen_d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::itu_indoor_pdp;
    use crate::estimators::{covariance_from_pdp, LmmseStatistics};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qpsk_labelling() {
        let s = FRAC_1_SQRT_2;
        assert_eq!(qpsk_map(&[false, false]).unwrap(), [Complex::new(s, s)]);
        assert_eq!(qpsk_map(&[false, true]).unwrap(), [Complex::new(-s, s)]);
        assert_eq!(qpsk_map(&[true, true]).unwrap(), [Complex::new(-s, -s)]);
        assert_eq!(qpsk_map(&[true, false]).unwrap(), [Complex::new(s, -s)]);
        assert!((qpsk_map(&[false, false]).unwrap()[0].norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(qpsk_map(&[true]), Err(Error::OddBitCount(1)));
    }

    #[test]
    fn qpsk_loopback() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bits: Vec<bool> = (0..10_000).map(|_| rng.random()).collect();
        assert_eq!(qpsk_demap(&qpsk_map(&bits).unwrap()), bits);
    }

    #[test]
    fn allocation_shapes() {
        let a = ToneAllocation::for_generator(8, 2).unwrap();
        assert_eq!(a.active(), &[1, 3, 5, 7]);
        assert_eq!(a.eta(), 0.5);
        let a = ToneAllocation::for_generator(8, 8).unwrap();
        assert_eq!(a.active(), &[1, 2, 3, 4, 5, 6, 7]);
        let a = ToneAllocation::for_generator(256, 128).unwrap();
        assert_eq!(a.active().len(), 256 - 2);
        assert_eq!(a.eta(), 1.0 - 1.0 / 128.0);
    }

    #[test]
    fn ofdm_symbol_nulls_subgroup() {
        let a = ToneAllocation::for_generator(8, 2).unwrap();
        let data = qpsk_map(&[false, false, true, true, false, true, true, false]).unwrap();
        let block = build_ofdm_symbol(&data, &a).unwrap();
        for k in [0, 2, 4, 6] {
            assert_eq!(block[k], Complex::new(0.0, 0.0));
        }
        for (i, k) in [1, 3, 5, 7].into_iter().enumerate() {
            assert_eq!(block[k], data[i]);
        }
        assert!((block.energy() - 4.0).abs() < 1e-12);
        assert!(build_ofdm_symbol(&data[..3], &a).is_err());
    }

    #[test]
    fn equalizer_cases() {
        let a = ToneAllocation::full_band(4);
        let s = qpsk_map(&[false, false, true, false, false, true, true, true]).unwrap();
        let h = FreqBlock::new(vec![
            Complex::new(0.5, 0.2),
            Complex::new(-1.0, 0.3),
            Complex::new(0.1, 0.9),
            Complex::new(2.0, 0.0),
        ]);
        let y = FreqBlock::new(s.iter().zip(h.as_slice()).map(|(a, b)| a * b).collect());
        let eq = equalize(&y, &h, &a);
        for (e, want) in eq.iter().zip(&s) {
            assert!((e.unwrap() - want).norm() < 1e-14);
        }
        let doubled = FreqBlock::new(h.as_slice().iter().map(|v| v * 2.0).collect());
        let eq: Vec<Complex> = equalize(&y, &doubled, &a).into_iter().map(Option::unwrap).collect();
        assert_eq!(qpsk_demap(&eq), qpsk_demap(&s));
        let mut holed = h.clone();
        holed.as_mut_slice()[2] = Complex::new(0.0, 0.0);
        assert_eq!(equalize(&y, &holed, &a)[2], None);
    }

    #[test]
    fn metric_formulas() {
        let h = FreqBlock::new(vec![Complex::new(1.0, 1.0); 8]);
        assert_eq!(mse_metric(&h, &h), 0.0);
        let a = ToneAllocation::for_generator(256, 2).unwrap();
        assert_eq!(throughput_metric(0.0, &a, 2), 1.0);
        assert_eq!(throughput_metric(1.0, &a, 2), 0.0);
        let a = ToneAllocation::for_generator(256, 128).unwrap();
        assert_eq!(throughput_metric(0.0, &a, 2), 127.0 / 128.0 * 2.0);
        assert_eq!(predicted_mse(1.0, 1.0, 0.0, 4, 8), 0.0);
        assert!((predicted_mse(1.25, 1.0, 0.0, 2, 8) - 0.03125).abs() < 1e-16);
    }

    #[test]
    fn ser_closed_form_reference_points() {
        // Q(1) by Simpson's rule on the Gaussian density; SER = 2Q - Q² at γ = 1.
        let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * core::f64::consts::PI).sqrt();
        let (a, b, steps) = (1.0, 12.0, 20_000);
        let h = (b - a) / steps as f64;
        let mut q = pdf(a) + pdf(b);
        for i in 1..steps {
            q += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        q *= h / 3.0;
        assert!((qpsk_ser_awgn(1.0) - (2.0 * q - q * q)).abs() < 1e-10);
    }

    fn itu_setup_parts() -> (Dft, SampleGrid, ToneAllocation, TapProfile) {
        let grid = SampleGrid::with_default_timing(256);
        let profile = TapProfile::from_pdp(&itu_indoor_pdp(), &grid).unwrap();
        (Dft::new(256).unwrap(), grid, ToneAllocation::for_generator(256, 16).unwrap(), profile)
    }

    #[test]
    fn perfect_csi_noiseless_has_no_errors() {
        let (dft, grid, alloc, profile) = itu_setup_parts();
        let setup = TrialSetup {
            dft: &dft,
            grid,
            alloc: &alloc,
            profile: &profile,
            fading: Fading::Rayleigh,
            noise: NoiseSpec::noiseless(),
            epsilon: 0.15,
            lmmse: None,
        };
        let m = run_trial(&setup, &[Estimator::PerfectCsi], &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(m[0].ser, 0.0);
        assert_eq!(m[0].mse, 0.0);
        assert_eq!(m[0].throughput, alloc.eta() * 2.0);
    }

    #[test]
    fn trial_is_seed_deterministic() {
        let (dft, grid, alloc, profile) = itu_setup_parts();
        let noise = NoiseSpec::from_snr_db(10.0);
        let stats = LmmseStatistics {
            covariance: covariance_from_pdp(&profile, 256),
            sigma2: noise.sigma2,
        };
        let filter = LmmseFilter::new(&stats, alloc.active()).unwrap();
        let setup = TrialSetup {
            dft: &dft,
            grid,
            alloc: &alloc,
            profile: &profile,
            fading: Fading::Rayleigh,
            noise,
            epsilon: 0.15,
            lmmse: Some(&filter),
        };
        let all = [Estimator::Ls, Estimator::Lmmse, Estimator::Subgroup];
        let a = run_trial(&setup, &all, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = run_trial(&setup, &all, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
        assert!(a[2].chosen_d.is_some());
        assert!(a.iter().all(|m| m.throughput <= alloc.eta() * 2.0 + 1e-15));
    }

    #[test]
    fn lmmse_without_statistics_is_an_error() {
        let (dft, grid, alloc, profile) = itu_setup_parts();
        let setup = TrialSetup {
            dft: &dft,
            grid,
            alloc: &alloc,
            profile: &profile,
            fading: Fading::Rayleigh,
            noise: NoiseSpec::from_snr_db(10.0),
            epsilon: 0.15,
            lmmse: None,
        };
        assert!(run_trial(&setup, &[Estimator::Lmmse], &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
