//! Monte Carlo sweep over `(d, SNR)` cells.
//!
//! Every trial reseeds from its own coordinates, so a cell's numbers do not
//! depend on which other cells are in the grid or on scheduling order. All
//! three estimators are scored on the same realisations within a trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use subgroup_ofdm::channel::NoiseSpec;
use subgroup_ofdm::config::{trial_seed, trials_for, ChannelKind, SimConfig};
use subgroup_ofdm::estimators::{covariance_from_pdp, LmmseFilter, LmmseStatistics, Method};
use subgroup_ofdm::link::{run_trial, Estimator, ToneAllocation, TrialMetrics, TrialSetup};
use subgroup_ofdm::transform::Dft;

/// Estimators compared in every cell, in output order.
pub const METHODS: [Method; 3] = [Method::Ls, Method::Lmmse, Method::Subgroup];

fn as_estimator(m: Method) -> Estimator {
    match m {
        Method::Ls => Estimator::Ls,
        Method::Lmmse => Estimator::Lmmse,
        Method::Subgroup => Estimator::Subgroup,
    }
}

/// Averages over the trials of one `(channel, estimator, d, SNR)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub channel: ChannelKind,
    pub estimator: Method,
    pub d: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub mean_mse: f64,
    pub stderr_mse: f64,
    pub mean_ser: f64,
    pub stderr_ser: f64,
    pub mean_ber: f64,
    pub mean_throughput: f64,
    /// Subgroup estimator only.
    pub mean_chosen_d: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid configuration: {0}")]
    Config(#[source] subgroup_ofdm::Error),
    #[error("cell d={d}, snr={snr_db} dB failed: {source}")]
    Cell {
        d: usize,
        snr_db: f64,
        #[source]
        source: subgroup_ofdm::Error,
    },
}

fn mean_and_stderr(samples: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = samples.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = samples.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn aggregate(channel: ChannelKind, method: Method, d: usize, snr_db: f64, trials: &[TrialMetrics]) -> AggregateRow {
    let (mean_mse, stderr_mse) = mean_and_stderr(trials.iter().map(|t| t.mse));
    let (mean_ser, stderr_ser) = mean_and_stderr(trials.iter().map(|t| t.ser));
    let (mean_ber, _) = mean_and_stderr(trials.iter().map(|t| t.ber));
    let (mean_throughput, _) = mean_and_stderr(trials.iter().map(|t| t.throughput));
    let mean_chosen_d = (method == Method::Subgroup).then(|| {
        let chosen: Vec<f64> = trials.iter().filter_map(|t| t.chosen_d).map(|d| d as f64).collect();
        if chosen.is_empty() {
            f64::NAN
        } else {
            chosen.iter().sum::<f64>() / chosen.len() as f64
        }
    });
    AggregateRow {
        channel,
        estimator: method,
        d,
        snr_db,
        trials: trials.len(),
        mean_mse,
        stderr_mse,
        mean_ser,
        stderr_ser,
        mean_ber,
        mean_throughput,
        mean_chosen_d,
    }
}

/// Runs the trials of one `(d, SNR)` cell and returns one row per method.
pub fn run_cell(config: &SimConfig, dft: &Dft, d: usize, snr_db: f64) -> Result<Vec<AggregateRow>, SweepError> {
    let cell_err = |source| SweepError::Cell { d, snr_db, source };
    let grid = config.grid();
    let alloc = ToneAllocation::for_generator(config.n, d).map_err(cell_err)?;
    let profile = config.tap_profile(d).map_err(cell_err)?;
    let noise = NoiseSpec::from_snr_db(snr_db);
    let stats = LmmseStatistics {
        covariance: covariance_from_pdp(&profile, config.n),
        sigma2: noise.sigma2,
    };
    let filter = LmmseFilter::new(&stats, alloc.active()).map_err(cell_err)?;
    let setup = TrialSetup {
        dft,
        grid,
        alloc: &alloc,
        profile: &profile,
        fading: config.fading(),
        noise,
        epsilon: config.epsilon,
        lmmse: Some(&filter),
    };
    let estimators: Vec<Estimator> = METHODS.iter().copied().map(as_estimator).collect();
    let k = trials_for(d, config.trials);
    let per_trial: Vec<Vec<TrialMetrics>> = (0..k)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.master_seed, config.channel, d, snr_db, t));
            run_trial(&setup, &estimators, &mut rng)
        })
        .collect::<Result<_, _>>()
        .map_err(cell_err)?;

    Ok(METHODS
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let column: Vec<TrialMetrics> = per_trial.iter().map(|t| t[i]).collect();
            aggregate(config.channel, m, d, snr_db, &column)
        })
        .collect())
}

/// One row per `(estimator, d, SNR)`, ordered by `d`, then SNR, then
/// estimator.
pub fn sweep(config: &SimConfig) -> Result<Vec<AggregateRow>, SweepError> {
    config.validate().map_err(SweepError::Config)?;
    let dft = Dft::new(config.n).map_err(SweepError::Config)?;
    let cells: Vec<(usize, f64)> = config
        .d_grid
        .iter()
        .flat_map(|&d| config.snr_grid_db.iter().map(move |&s| (d, s)))
        .collect();
    let rows: Vec<Vec<AggregateRow>> = cells
        .par_iter()
        .map(|&(d, snr)| run_cell(config, &dft, d, snr))
        .collect::<Result<_, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use subgroup_ofdm::config::TrialsMode;

    fn small_config() -> SimConfig {
        SimConfig {
            n: 64,
            n_cp: 8,
            snr_grid_db: vec![0.0, 10.0],
            d_grid: vec![2, 16],
            trials: TrialsMode::Fixed(6),
            ..SimConfig::default()
        }
    }

    #[test]
    fn row_count_and_order() {
        let rows = sweep(&small_config()).unwrap();
        assert_eq!(rows.len(), 3 * 2 * 2);
        assert_eq!(rows[0].estimator, Method::Ls);
        assert_eq!(rows[2].estimator, Method::Subgroup);
        assert_eq!((rows[3].d, rows[3].snr_db), (2, 10.0));
        assert!(rows.iter().all(|r| r.trials == 6));
        assert!(rows.iter().all(|r| r.mean_chosen_d.is_some() == (r.estimator == Method::Subgroup)));
    }

    #[test]
    fn empty_snr_grid_gives_no_rows() {
        let cfg = SimConfig {
            snr_grid_db: vec![],
            ..small_config()
        };
        assert!(sweep(&cfg).unwrap().is_empty());
    }

    #[test]
    fn cells_are_independent_of_grid() {
        let full = sweep(&small_config()).unwrap();
        let cfg = SimConfig {
            snr_grid_db: vec![10.0],
            d_grid: vec![16],
            ..small_config()
        };
        let single = sweep(&cfg).unwrap();
        let matching: Vec<_> = full.into_iter().filter(|r| r.d == 16 && r.snr_db == 10.0).collect();
        assert_eq!(single, matching);
    }

    #[test]
    fn invalid_config_is_reported() {
        let cfg = SimConfig {
            d_grid: vec![3],
            ..small_config()
        };
        assert!(matches!(sweep(&cfg), Err(SweepError::Config(_))));
    }

    #[test]
    fn stderr_formula() {
        let (m, s) = mean_and_stderr([1.0, 2.0, 3.0, 4.0].into_iter());
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_stderr([7.0].into_iter()), (7.0, 0.0));
    }
}
