//! Multipath channel models, random realisations and AWGN.
//!
//! Channels are block fading: one realisation holds for every OFDM symbol
//! of a trial. Taps are circularly-symmetric complex Gaussian with variance
//! equal to their normalised average power (Rayleigh magnitudes), unless
//! deterministic taps are requested.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::group::SubgroupSpec;
use crate::transform::{self, Dft, FreqBlock, TimeBlock};
use crate::{Complex, Error, Result};

/// Block length, cyclic prefix and symbol duration of the sample grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub n: usize,
    pub n_cp: usize,
    pub symbol_duration_us: f64,
}

impl SampleGrid {
    /// 12.8 µs OFDM symbol with a CP of `n/8` samples.
    pub fn with_default_timing(n: usize) -> Self {
        Self {
            n,
            n_cp: n / 8,
            symbol_duration_us: 12.8,
        }
    }

    pub fn sample_period_ns(&self) -> f64 {
        self.symbol_duration_us * 1e3 / self.n as f64
    }
}

/// Path delays with their average powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    pub label: String,
    pub delays_ns: Vec<f64>,
    pub powers_db: Vec<f64>,
}

impl PowerDelayProfile {
    pub fn new(label: &str, delays_ns: Vec<f64>, powers_db: Vec<f64>) -> Result<Self> {
        if delays_ns.is_empty() || delays_ns.len() != powers_db.len() {
            return Err(Error::InvalidProfile(
                "delay and power lists must be non-empty and of equal length".to_string(),
            ));
        }
        if delays_ns[0] != 0.0 {
            return Err(Error::InvalidProfile("first delay must be 0 ns".to_string()));
        }
        if delays_ns.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidProfile("delays must be strictly increasing".to_string()));
        }
        if powers_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidProfile("powers must be finite".to_string()));
        }
        Ok(Self {
            label: label.to_string(),
            delays_ns,
            powers_db,
        })
    }

    /// Linear path powers scaled to unit total.
    pub fn normalized_linear_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.powers_db.iter().map(|&p| libm::pow(10.0, p / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }
}

/// ITU indoor office profile (channel A).
pub fn itu_indoor_pdp() -> PowerDelayProfile {
    PowerDelayProfile {
        label: "itu-indoor-office".to_string(),
        delays_ns: alloc::vec![0.0, 100.0, 200.0, 300.0, 500.0, 700.0],
        powers_db: alloc::vec![0.0, -3.6, -7.2, -10.8, -18.0, -25.2],
    }
}

/// Tapped delay line whose taps sit on `H⊥ = <n/d>` inside the cyclic
/// prefix, with average power decaying as `e^{-decay_rate·i}` over the tap
/// ordinal `i`.
pub fn tdl_structured_pdp(grid: &SampleGrid, d: usize, decay_rate: f64) -> Result<PowerDelayProfile> {
    let spec = SubgroupSpec::new(grid.n, d)?;
    let period = grid.sample_period_ns();
    let indices: Vec<usize> = spec
        .elements_h_perp()
        .iter()
        .copied()
        .filter(|&m| m < grid.n_cp.max(1))
        .collect();
    let weights: Vec<f64> = (0..indices.len())
        .map(|i| libm::exp(-decay_rate * i as f64))
        .collect();
    let total: f64 = weights.iter().sum();
    PowerDelayProfile::new(
        &alloc::format!("tdl-structured-d{d}"),
        indices.iter().map(|&m| m as f64 * period).collect(),
        weights.iter().map(|w| 10.0 * libm::log10(w / total)).collect(),
    )
}

/// Rounds each path delay to the sample grid.
pub fn delays_to_samples(pdp: &PowerDelayProfile, grid: &SampleGrid) -> Result<Vec<usize>> {
    let period = grid.sample_period_ns();
    let symbol_ns = grid.symbol_duration_us * 1e3;
    pdp.delays_ns
        .iter()
        .map(|&delay| {
            if !(delay >= 0.0 && delay < symbol_ns) {
                return Err(Error::DelayOutsideSymbol {
                    delay_ns: delay,
                    symbol_ns,
                });
            }
            Ok(libm::round(delay / period) as usize)
        })
        .collect()
}

/// A profile resolved onto sample indices, with normalised powers.
///
/// Paths that round to the same sample merge by adding linear power.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    pub indices: Vec<usize>,
    pub powers: Vec<f64>,
}

impl TapProfile {
    pub fn from_pdp(pdp: &PowerDelayProfile, grid: &SampleGrid) -> Result<Self> {
        let samples = delays_to_samples(pdp, grid)?;
        let powers = pdp.normalized_linear_powers();
        let mut indices: Vec<usize> = Vec::new();
        let mut merged: Vec<f64> = Vec::new();
        for (idx, p) in samples.into_iter().zip(powers) {
            match indices.last() {
                Some(&last) if last == idx => *merged.last_mut().unwrap() += p,
                _ => {
                    indices.push(idx);
                    merged.push(p);
                }
            }
        }
        let profile = Self {
            indices,
            powers: merged,
        };
        profile.check_admissible(grid)?;
        Ok(profile)
    }

    /// Every tap must fall strictly inside the cyclic prefix.
    pub fn check_admissible(&self, grid: &SampleGrid) -> Result<()> {
        match self.indices.iter().copied().max() {
            Some(m) if m >= grid.n_cp.max(1) => Err(Error::TapOutsideCyclicPrefix {
                index: m,
                n_cp: grid.n_cp,
            }),
            _ => Ok(()),
        }
    }
}

/// How tap gains are drawn for each realisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    #[default]
    Rayleigh,
    /// Real taps with magnitude `sqrt(power)`, identical every trial.
    Deterministic,
}

/// Sample of `CN(0, variance)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex {
    let s = libm::sqrt(variance / 2.0);
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re * s, im * s)
}

/// One draw of the channel impulse response on the sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<Complex>,
    freq: FreqBlock,
    support: Vec<usize>,
    n_cp: usize,
}

impl ChannelRealization {
    /// Wraps explicit taps, checking that they fit inside the cyclic prefix.
    pub fn from_taps(taps: Vec<Complex>, n_cp: usize, dft: &Dft) -> Result<Self> {
        let support: Vec<usize> = taps
            .iter()
            .enumerate()
            .filter(|(_, t)| t.norm_sqr() > 0.0)
            .map(|(i, _)| i)
            .collect();
        if let Some(&m) = support.last() {
            if m >= n_cp.max(1) {
                return Err(Error::TapOutsideCyclicPrefix { index: m, n_cp });
            }
        }
        let freq = dft.channel_response(&taps)?;
        Ok(Self {
            taps,
            freq,
            support,
            n_cp,
        })
    }

    pub fn taps(&self) -> &[Complex] {
        &self.taps
    }

    /// `H[k]` under the non-unitary channel convention.
    pub fn freq(&self) -> &FreqBlock {
        &self.freq
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn n_cp(&self) -> usize {
        self.n_cp
    }

    fn sparse_taps(&self) -> Vec<(usize, Complex)> {
        self.support.iter().map(|&i| (i, self.taps[i])).collect()
    }
}

pub fn realize_channel<R: Rng + ?Sized>(
    profile: &TapProfile,
    grid: &SampleGrid,
    fading: Fading,
    dft: &Dft,
    rng: &mut R,
) -> Result<ChannelRealization> {
    profile.check_admissible(grid)?;
    let mut taps = alloc::vec![Complex::new(0.0, 0.0); grid.n];
    for (&idx, &p) in profile.indices.iter().zip(&profile.powers) {
        taps[idx] = match fading {
            Fading::Rayleigh => complex_gaussian(rng, p),
            Fading::Deterministic => Complex::new(libm::sqrt(p), 0.0),
        };
    }
    ChannelRealization::from_taps(taps, grid.n_cp, dft)
}

/// Receive SNR and the matching per-sample complex noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub sigma2: f64,
}

impl NoiseSpec {
    /// Unit signal power convention: `sigma2 = 10^(-snr_db/10)`.
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self {
            snr_db,
            sigma2: libm::pow(10.0, -snr_db / 10.0),
        }
    }

    pub fn noiseless() -> Self {
        Self {
            snr_db: f64::INFINITY,
            sigma2: 0.0,
        }
    }
}

fn add_noise<R: Rng + ?Sized>(samples: &mut [Complex], sigma2: f64, rng: &mut R) {
    if sigma2 > 0.0 {
        for s in samples.iter_mut() {
            *s += complex_gaussian(rng, sigma2);
        }
    }
}

/// Time-domain path: add CP, filter through the taps, add noise over the
/// extended block, then strip the CP.
pub fn apply_channel_awgn<R: Rng + ?Sized>(
    x: &TimeBlock,
    channel: &ChannelRealization,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<TimeBlock> {
    if x.len() != channel.taps.len() {
        return Err(Error::LengthMismatch {
            expected: channel.taps.len(),
            got: x.len(),
        });
    }
    let extended = transform::add_cp(x, channel.n_cp)?;
    let mut received = transform::linear_filter(&extended, &channel.sparse_taps());
    add_noise(&mut received, noise.sigma2, rng);
    transform::remove_cp(&received, channel.n_cp)
}

/// Frequency-domain shortcut `Y[k] = H[k]·X[k] + W[k]`, `W` white with
/// variance `sigma2`.
pub fn apply_channel_freq<R: Rng + ?Sized>(
    x: &FreqBlock,
    channel: &ChannelRealization,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<FreqBlock> {
    if x.len() != channel.freq.len() {
        return Err(Error::LengthMismatch {
            expected: channel.freq.len(),
            got: x.len(),
        });
    }
    let mut y: Vec<Complex> = x
        .as_slice()
        .iter()
        .zip(channel.freq.as_slice())
        .map(|(a, h)| a * h)
        .collect();
    add_noise(&mut y, noise.sigma2, rng);
    Ok(FreqBlock::new(y))
}
