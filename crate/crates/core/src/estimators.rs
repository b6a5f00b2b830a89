//! Least-squares, LMMSE and energy-constrained subgroup channel estimators.
//!
//! All three work from one pilot OFDM symbol. Tones outside the active set
//! carry no pilot and are zero-filled before any transform.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::channel::TapProfile;
use crate::group::{self, divisors};
use crate::transform::{Dft, FreqBlock};
use crate::{Complex, Error, Result};

const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ls,
    Lmmse,
    Subgroup,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ls => "ls",
            Method::Lmmse => "lmmse",
            Method::Subgroup => "subgroup",
        }
    }
}

/// Operation counts gathered while running the subgroup search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubgroupWork {
    /// Candidate annihilators whose energy ratio was evaluated.
    pub candidates: usize,
    /// Squared-magnitude terms summed (total energy plus every candidate).
    pub energy_terms: usize,
    /// Masking writes for the sparse impulse response.
    pub mask_ops: usize,
    /// Butterfly multiply-adds in the inverse and forward transforms.
    pub transform_ops: usize,
}

impl SubgroupWork {
    pub fn total(&self) -> usize {
        self.energy_terms + self.mask_ops + self.transform_ops
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    /// Impulse-response estimate, inverse of the channel-response convention.
    pub h_hat_time: Vec<Complex>,
    pub h_hat_freq: FreqBlock,
    pub method: Method,
    /// Selected generator; subgroup estimator only.
    pub chosen_d: Option<usize>,
    /// `(d, R_d)` for every divisor visited; subgroup estimator only.
    pub ratio_trace: Vec<(usize, f64)>,
    pub work: Option<SubgroupWork>,
}

fn validate_active(active: &[usize], n: usize) -> Result<()> {
    if active.is_empty() {
        return Err(Error::NoActiveTones);
    }
    if let Some(&tone) = active.iter().find(|&&k| k >= n) {
        return Err(Error::ToneOutOfRange { tone, n });
    }
    Ok(())
}

/// `Y[k]/X[k]` on active tones, zero elsewhere.
fn pilot_division(y: &FreqBlock, x: &FreqBlock, active: &[usize]) -> Result<FreqBlock> {
    let n = y.len();
    if x.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: x.len(),
        });
    }
    validate_active(active, n)?;
    let mut h = vec![ZERO; n];
    for &k in active {
        if x[k] == ZERO {
            return Err(Error::ZeroPilot(k));
        }
        h[k] = y[k] / x[k];
    }
    Ok(FreqBlock::new(h))
}

pub fn ls_estimate(y: &FreqBlock, x: &FreqBlock, active: &[usize], dft: &Dft) -> Result<EstimateResult> {
    let h_hat_freq = pilot_division(y, x, active)?;
    Ok(EstimateResult {
        h_hat_time: dft.impulse_response(&h_hat_freq)?,
        h_hat_freq,
        method: Method::Ls,
        chosen_d: None,
        ratio_trace: Vec::new(),
        work: None,
    })
}

/// `R[k,l] = Σ_p P_p e^{-j2π(k-l)m_p/n}` for a profile with taps at `m_p`.
pub fn covariance_from_pdp(profile: &TapProfile, n: usize) -> DMatrix<Complex> {
    // Toeplitz: only the first column varies.
    let column: Vec<Complex> = (0..n)
        .map(|delta| {
            profile
                .indices
                .iter()
                .zip(&profile.powers)
                .map(|(&m, &p)| {
                    let phase = -2.0 * PI * ((delta * m) % n) as f64 / n as f64;
                    let (s, c) = libm::sincos(phase);
                    Complex::new(c * p, s * p)
                })
                .sum()
        })
        .collect();
    DMatrix::from_fn(n, n, |k, l| {
        if k >= l {
            column[k - l]
        } else {
            column[l - k].conj()
        }
    })
}

/// Channel covariance and noise variance known to the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct LmmseStatistics {
    pub covariance: DMatrix<Complex>,
    pub sigma2: f64,
}

/// `R (R + σ²I)^{-1}` on the active-tone submatrix, factored once per
/// (channel model, SNR, tone allocation) and then applied per trial.
#[derive(Debug, Clone)]
pub struct LmmseFilter {
    n: usize,
    active: Vec<usize>,
    /// `None` when `σ² = 0`: the filter reduces to the identity.
    weights: Option<DMatrix<Complex>>,
}

impl LmmseFilter {
    pub fn new(stats: &LmmseStatistics, active: &[usize]) -> Result<Self> {
        let n = stats.covariance.nrows();
        if stats.covariance.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: stats.covariance.ncols(),
            });
        }
        validate_active(active, n)?;
        if stats.sigma2 == 0.0 {
            return Ok(Self {
                n,
                active: active.to_vec(),
                weights: None,
            });
        }
        let a = active.len();
        let r = DMatrix::from_fn(a, a, |i, j| stats.covariance[(active[i], active[j])]);
        let mut system = r.clone();
        for i in 0..a {
            system[(i, i)] += Complex::new(stats.sigma2, 0.0);
        }
        // R and R + σ²I commute, so R (R + σ²I)^{-1} = (R + σ²I)^{-1} R.
        let weights = match system.clone().cholesky() {
            Some(chol) => chol.solve(&r),
            None => {
                let eig = system.symmetric_eigenvalues();
                let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let min = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
                return Err(Error::SolverFailure {
                    condition: max / min,
                });
            }
        };
        Ok(Self {
            n,
            active: active.to_vec(),
            weights: Some(weights),
        })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Filters `H_ls` on the active tones; nulled tones come out zero.
    pub fn apply(&self, h_ls: &FreqBlock) -> Result<FreqBlock> {
        if h_ls.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: h_ls.len(),
            });
        }
        let mut out = vec![ZERO; self.n];
        match &self.weights {
            None => {
                for &k in &self.active {
                    out[k] = h_ls[k];
                }
            }
            Some(w) => {
                let input: Vec<Complex> = self.active.iter().map(|&k| h_ls[k]).collect();
                for (i, &k) in self.active.iter().enumerate() {
                    let mut acc = ZERO;
                    for (j, v) in input.iter().enumerate() {
                        acc += w[(i, j)] * v;
                    }
                    out[k] = acc;
                }
            }
        }
        Ok(FreqBlock::new(out))
    }
}

pub fn lmmse_estimate(h_ls: &FreqBlock, filter: &LmmseFilter, dft: &Dft) -> Result<EstimateResult> {
    let h_hat_freq = filter.apply(h_ls)?;
    Ok(EstimateResult {
        h_hat_time: dft.impulse_response(&h_hat_freq)?,
        h_hat_freq,
        method: Method::Lmmse,
        chosen_d: None,
        ratio_trace: Vec::new(),
        work: None,
    })
}

/// Energy-constrained subgroup estimation.
///
/// 1. `Ĥ = Y/X` on active tones, zero elsewhere.
/// 2. `ĥ` is the impulse response of `Ĥ`.
/// 3. For each divisor `d | n` in increasing order, `R_d` is the share of
///    `‖ĥ‖²` on `{m : m mod (n/d) = 0}`; the first `d` with
///    `R_d > 1 - ε` wins.
/// 4. Taps outside the winning annihilator are zeroed and the sparse
///    response is transformed back to frequency.
///
/// A zero-energy `ĥ` yields the all-zero estimate with no chosen divisor.
pub fn subgroup_estimate(
    y: &FreqBlock,
    x: &FreqBlock,
    active: &[usize],
    epsilon: f64,
    dft: &Dft,
) -> Result<EstimateResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let h_ls = pilot_division(y, x, active)?;
    let h = dft.impulse_response(&h_ls)?;
    let n = h.len();
    let mut work = SubgroupWork {
        transform_ops: dft.op_count(),
        energy_terms: n,
        ..SubgroupWork::default()
    };
    let e_total = group::energy(&h);

    let mut trace = Vec::new();
    let mut best = None;
    if e_total > 0.0 {
        let threshold = 1.0 - epsilon;
        for d in divisors(n) {
            let r = group::strided_energy(&h, n / d) / e_total;
            work.candidates += 1;
            work.energy_terms += d;
            trace.push((d, r));
            if r > threshold {
                best = Some(d);
                break;
            }
        }
    }

    let sparse: Vec<Complex> = match best {
        None => vec![ZERO; n],
        Some(d) => {
            work.mask_ops = n;
            let stride = n / d;
            h.iter()
                .enumerate()
                .map(|(m, &v)| if m % stride == 0 { v } else { ZERO })
                .collect()
        }
    };
    let h_hat_freq = dft.channel_response(&sparse)?;
    work.transform_ops += dft.op_count();

    Ok(EstimateResult {
        h_hat_time: sparse,
        h_hat_freq,
        method: Method::Subgroup,
        chosen_d: best,
        ratio_trace: trace,
        work: Some(work),
    })
}
