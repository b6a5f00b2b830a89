//! Simulation configuration, trial schedule and per-trial seed derivation.

use alloc::format;
use alloc::vec::Vec;

use crate::channel::{itu_indoor_pdp, tdl_structured_pdp, Fading, PowerDelayProfile, SampleGrid, TapProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modulation {
    #[default]
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Modulation::Qpsk => 2,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChannelKind {
    /// Tapped delay line with taps on the annihilator of the nulled subgroup.
    #[default]
    Tdl,
    /// ITU indoor office profile, unrelated to the subgroup structure.
    Itu,
}

impl ChannelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelKind::Tdl => "tdl",
            ChannelKind::Itu => "itu",
        }
    }

    fn seed_tag(&self) -> u64 {
        match self {
            ChannelKind::Tdl => 1,
            ChannelKind::Itu => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrialsMode {
    /// More trials for the sparser, noisier low-`d` cells.
    #[default]
    Auto,
    Fixed(usize),
}

/// Monte Carlo trials for one `(d, SNR)` cell.
///
/// Auto mode: 300 for `d <= 8`, 200 for `d <= 16`, 100 above.
pub fn trials_for(d: usize, mode: TrialsMode) -> usize {
    match mode {
        TrialsMode::Fixed(k) => k,
        TrialsMode::Auto if d <= 8 => 300,
        TrialsMode::Auto if d <= 16 => 200,
        TrialsMode::Auto => 100,
    }
}

/// Inclusive `start:stop:step` grid.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "SNR grid {start}:{stop}:{step} needs finite bounds and a positive step"
        )));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let count = libm::floor((stop - start) / step + 1e-9) as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub n_cp: usize,
    pub modulation: Modulation,
    pub epsilon: f64,
    pub snr_grid_db: Vec<f64>,
    pub d_grid: Vec<usize>,
    pub channel: ChannelKind,
    pub trials: TrialsMode,
    pub master_seed: u64,
    pub deterministic_taps: bool,
    pub symbol_duration_us: f64,
    pub tdl_decay_rate: f64,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 256,
            n_cp: 32,
            modulation: Modulation::Qpsk,
            epsilon: 0.15,
            snr_grid_db: alloc::vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            d_grid: alloc::vec![2, 8, 16, 64, 128],
            channel: ChannelKind::Tdl,
            trials: TrialsMode::Auto,
            master_seed: DEFAULT_SEED,
            deterministic_taps: false,
            symbol_duration_us: 12.8,
            tdl_decay_rate: 0.3,
        }
    }
}

impl SimConfig {
    pub fn grid(&self) -> SampleGrid {
        SampleGrid {
            n: self.n,
            n_cp: self.n_cp,
            symbol_duration_us: self.symbol_duration_us,
        }
    }

    pub fn fading(&self) -> Fading {
        if self.deterministic_taps {
            Fading::Deterministic
        } else {
            Fading::Rayleigh
        }
    }

    /// Power delay profile used for cells with generator `d`.
    pub fn pdp(&self, d: usize) -> Result<PowerDelayProfile> {
        match self.channel {
            ChannelKind::Tdl => tdl_structured_pdp(&self.grid(), d, self.tdl_decay_rate),
            ChannelKind::Itu => Ok(itu_indoor_pdp()),
        }
    }

    pub fn tap_profile(&self, d: usize) -> Result<TapProfile> {
        TapProfile::from_pdp(&self.pdp(d)?, &self.grid())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n = {} is too small", self.n)));
        }
        if self.n_cp > self.n {
            return Err(Error::CyclicPrefixTooLong {
                n_cp: self.n_cp,
                n: self.n,
            });
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        if !(self.symbol_duration_us > 0.0) {
            return Err(Error::InvalidConfig("symbol duration must be positive".into()));
        }
        if let TrialsMode::Fixed(0) = self.trials {
            return Err(Error::InvalidConfig("trial count must be positive".into()));
        }
        if let Some(s) = self.snr_grid_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig(format!("SNR {s} dB is not finite")));
        }
        for &d in &self.d_grid {
            if d == 0 || self.n % d != 0 {
                return Err(Error::InvalidGenerator { n: self.n, d });
            }
            if d == 1 {
                return Err(Error::InvalidConfig("d = 1 nulls every tone".into()));
            }
            self.tap_profile(d)?;
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial, derived only from its own cell coordinates so
/// cells are independent of grid composition and execution order.
pub fn trial_seed(master: u64, channel: ChannelKind, d: usize, snr_db: f64, trial: usize) -> u64 {
    [channel.seed_tag(), d as u64, snr_db.to_bits(), trial as u64]
        .iter()
        .fold(splitmix64(master), |acc, &v| splitmix64(acc ^ v))
}
