//! Sweep execution. Grid points are evaluated in parallel and collected in
//! grid order, so the output never depends on the thread count.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use xyecho::{
    berry_phase_finite_with_delta, berry_phase_thermodynamic, derive_branch_params, df_dlambda,
    df_thermodynamic, echo_series, find_peak, loschmidt_echo, mode_table, oracle_echo,
    peak_exponent, CentralSpinParams, ChainParams, PeakTarget, Slope,
};

use crate::config::{Experiment, Quantity, SweepConfig};

/// One output line. Unused parameters are `None` (empty in CSV, `null` in JSON).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub n_sites: Option<usize>,
    pub delta: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub g: Option<f64>,
    pub t: Option<f64>,
    pub value: f64,
    pub flag: String,
}

#[derive(Debug, thiserror::Error)]
#[error("{experiment} failed at {point}: {source}")]
pub struct RunError {
    pub experiment: Experiment,
    pub point: String,
    #[source]
    pub source: xyecho::Error,
}

type RunResult<T> = std::result::Result<T, RunError>;

struct Point {
    gamma: f64,
    lambda: f64,
    n_sites: Option<usize>,
}

impl Point {
    fn describe(&self) -> String {
        match self.n_sites {
            Some(n) => format!("gamma={}, lambda={}, n_sites={n}", self.gamma, self.lambda),
            None => format!(
                "gamma={}, lambda={}, thermodynamic",
                self.gamma, self.lambda
            ),
        }
    }
}

fn blank(experiment: Experiment) -> ResultRow {
    ResultRow {
        experiment: experiment.tag(),
        gamma: None,
        lambda: None,
        n_sites: None,
        delta: None,
        mu: None,
        nu: None,
        g: None,
        t: None,
        value: f64::NAN,
        flag: String::new(),
    }
}

fn with_spin(mut row: ResultRow, cs: &CentralSpinParams) -> ResultRow {
    row.mu = Some(cs.mu);
    row.nu = Some(cs.nu);
    row.g = Some(cs.g);
    row
}

/// Evaluates `config` on the current rayon pool.
pub fn run_experiment(config: &SweepConfig) -> RunResult<Vec<ResultRow>> {
    match config.experiment {
        Experiment::LeTimeLambda | Experiment::LeTimeSizes | Experiment::LeTimeGammas => {
            echo_rows(config)
        }
        Experiment::BerrySurface | Experiment::BerryXxSizes => berry_rows(config),
        Experiment::DbetaScaling => scaling_rows(config),
        Experiment::OracleCheck => oracle_rows(config),
    }
}

/// Runs on a dedicated pool with `threads` workers (0 = rayon default).
pub fn run_with_threads(config: &SweepConfig, threads: usize) -> RunResult<Vec<ResultRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction");
    pool.install(|| run_experiment(config))
}

fn grid_points(config: &SweepConfig, sizes: &[Option<usize>]) -> Vec<Point> {
    let lambdas = config.lambda.points();
    let mut out = Vec::with_capacity(config.gammas.len() * lambdas.len() * sizes.len());
    for &gamma in &config.gammas {
        for &lambda in &lambdas {
            for &n_sites in sizes {
                out.push(Point {
                    gamma,
                    lambda,
                    n_sites,
                });
            }
        }
    }
    out
}

fn flatten(chunks: Vec<Vec<ResultRow>>) -> Vec<ResultRow> {
    chunks.into_iter().flatten().collect()
}

fn echo_rows(config: &SweepConfig) -> RunResult<Vec<ResultRow>> {
    let sizes: Vec<Option<usize>> = config.n_sites.iter().map(|&n| Some(n)).collect();
    let times = config.time.points();
    let cs = config.central_spin;
    let chunks = grid_points(config, &sizes)
        .par_iter()
        .map(|p| {
            let n = p.n_sites.expect("finite size");
            let fail = |source| RunError {
                experiment: config.experiment,
                point: p.describe(),
                source,
            };
            let delta = match config.delta {
                Some(d) => d,
                None => derive_branch_params(&cs, n).map_err(fail)?.delta,
            };
            let chain = ChainParams::new(p.gamma, p.lambda, n).map_err(fail)?;
            let modes = mode_table(&chain, delta).map_err(fail)?;
            let series = echo_series(&modes, &times).map_err(fail)?;
            let flag = if modes.iter().any(|m| m.degenerate) {
                "degenerate"
            } else {
                ""
            };
            let mut template = ResultRow {
                gamma: Some(p.gamma),
                lambda: Some(p.lambda),
                n_sites: Some(n),
                delta: Some(delta),
                flag: flag.to_string(),
                ..blank(config.experiment)
            };
            if config.delta.is_none() {
                template = with_spin(template, &cs);
            }
            Ok(series
                .times
                .iter()
                .zip(&series.values)
                .map(|(&t, &value)| ResultRow {
                    t: Some(t),
                    value,
                    ..template.clone()
                })
                .collect())
        })
        .collect::<RunResult<Vec<_>>>()?;
    Ok(flatten(chunks))
}

fn slope_value(slope: Slope) -> (f64, String) {
    match slope {
        Slope::Regular(v) => (v, String::new()),
        Slope::OneSided { left, right } => (left, format!("one_sided;right={right:e}")),
        Slope::Singular => (f64::NAN, "singular".into()),
    }
}

fn tagged(quantity: &str, extra: String) -> String {
    if extra.is_empty() {
        format!("q={quantity}")
    } else {
        format!("q={quantity};{extra}")
    }
}

/// Berry-phase quantity at one grid point.
fn berry_point(config: &SweepConfig, p: &Point, quantity: Quantity) -> xyecho::Result<ResultRow> {
    let cs = config.central_spin;
    let row = with_spin(
        ResultRow {
            gamma: Some(p.gamma),
            lambda: Some(p.lambda),
            n_sites: p.n_sites,
            ..blank(config.experiment)
        },
        &cs,
    );
    let (value, extra, delta) = match p.n_sites {
        Some(n) => {
            let chain = ChainParams::with_any_parity(p.gamma, p.lambda, n)?;
            let delta = match config.delta {
                Some(d) => d,
                None => derive_branch_params(&cs, n)?.delta,
            };
            let (value, extra) = match quantity {
                Quantity::Df => match df_dlambda(&chain, delta) {
                    Ok(v) => (v, String::new()),
                    Err(xyecho::Error::SingularDerivative { .. }) => slope_value(Slope::Singular),
                    Err(e) => return Err(e),
                },
                _ => {
                    let r = berry_phase_finite_with_delta(&chain, &cs, delta)?;
                    match quantity {
                        Quantity::Beta => (r.beta, String::new()),
                        Quantity::F => (r.f_value, String::new()),
                        _ => slope_value(r.dbeta_dlambda),
                    }
                }
            };
            (value, extra, Some(delta))
        }
        None => {
            let (value, extra) = match quantity {
                Quantity::Df => slope_value(df_thermodynamic(p.gamma, p.lambda)?),
                _ => {
                    let r = berry_phase_thermodynamic(p.gamma, p.lambda, &cs)?;
                    match quantity {
                        Quantity::Beta => (r.beta, String::new()),
                        Quantity::F => (r.f_value, String::new()),
                        _ => slope_value(r.dbeta_dlambda),
                    }
                }
            };
            (value, extra, None)
        }
    };
    Ok(ResultRow {
        delta,
        value,
        flag: tagged(quantity.tag(), extra),
        ..row
    })
}

fn berry_sizes(config: &SweepConfig) -> Vec<Option<usize>> {
    let mut sizes: Vec<Option<usize>> = config.n_sites.iter().map(|&n| Some(n)).collect();
    if config.thermodynamic {
        sizes.push(None);
    }
    sizes
}

fn berry_rows(config: &SweepConfig) -> RunResult<Vec<ResultRow>> {
    grid_points(config, &berry_sizes(config))
        .par_iter()
        .map(|p| {
            berry_point(config, p, config.quantity).map_err(|source| RunError {
                experiment: config.experiment,
                point: p.describe(),
                source,
            })
        })
        .collect()
}

fn scaling_rows(config: &SweepConfig) -> RunResult<Vec<ResultRow>> {
    // curves use the configured quantity with delta derived from the central spin
    let curve_config = SweepConfig {
        delta: None,
        ..config.clone()
    };
    let sizes: Vec<Option<usize>> = config.n_sites.iter().map(|&n| Some(n)).collect();
    let mut rows: Vec<ResultRow> = grid_points(&curve_config, &sizes)
        .par_iter()
        .map(|p| {
            berry_point(&curve_config, p, config.quantity).map_err(|source| RunError {
                experiment: config.experiment,
                point: p.describe(),
                source,
            })
        })
        .collect::<RunResult<_>>()?;

    let cs = config.central_spin;
    for &gamma in &config.gammas {
        for (target, tag) in [(PeakTarget::Dbeta, "dbeta"), (PeakTarget::Df, "df")] {
            let peaks = config
                .n_sites
                .par_iter()
                .map(|&n| {
                    let fail = |source| RunError {
                        experiment: config.experiment,
                        point: format!("gamma={gamma}, n_sites={n}, peak of {tag}"),
                        source,
                    };
                    let chain =
                        ChainParams::with_any_parity(gamma, config.bracket.0, n).map_err(fail)?;
                    let peak = find_peak(&chain, &cs, config.bracket, target).map_err(fail)?;
                    let mut row = ResultRow {
                        gamma: Some(gamma),
                        lambda: Some(peak.x),
                        n_sites: Some(n),
                        value: peak.value,
                        flag: format!("q=peak_{tag}"),
                        ..blank(config.experiment)
                    };
                    row = match target {
                        PeakTarget::Dbeta => ResultRow {
                            delta: Some(derive_branch_params(&cs, n).map_err(fail)?.delta),
                            ..with_spin(row, &cs)
                        },
                        PeakTarget::Df => ResultRow {
                            delta: Some(0.0),
                            ..row
                        },
                    };
                    Ok(row)
                })
                .collect::<RunResult<Vec<_>>>()?;
            let positions: Vec<f64> = peaks
                .iter()
                .map(|r| r.lambda.expect("peak position"))
                .collect();
            let exponent =
                peak_exponent(&config.n_sites, &positions).map_err(|source| RunError {
                    experiment: config.experiment,
                    point: format!("gamma={gamma}, exponent fit of {tag}"),
                    source,
                })?;
            rows.extend(peaks);
            let mut fit = ResultRow {
                gamma: Some(gamma),
                value: exponent,
                flag: format!("q=exponent_{tag}"),
                ..blank(config.experiment)
            };
            if target == PeakTarget::Dbeta {
                fit = with_spin(fit, &cs);
            }
            rows.push(fit);
        }
    }
    Ok(rows)
}

/// One random oracle instance: `N in {8, 10, 12}`, `gamma in [0, 1]`,
/// `lambda in [0, 2]`, `delta in [0, 0.2]`, `t in [0, 5]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleInstance {
    pub n_sites: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
    pub t: f64,
}

pub fn oracle_instances(samples: usize, seed: u64) -> Vec<OracleInstance> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..samples)
        .map(|_| OracleInstance {
            n_sites: [8, 10, 12][rng.random_range(0..3)],
            gamma: rng.random_range(0.0..=1.0),
            lambda: rng.random_range(0.0..=2.0),
            delta: rng.random_range(0.0..=0.2),
            t: rng.random_range(0.0..=5.0),
        })
        .collect()
}

/// `|product formula - oracle|` for one instance.
pub fn oracle_deviation(inst: &OracleInstance) -> xyecho::Result<f64> {
    let chain = ChainParams::new(inst.gamma, inst.lambda, inst.n_sites)?;
    let modes = mode_table(&chain, inst.delta)?;
    let exact = loschmidt_echo(&modes, inst.t)?;
    Ok((exact - oracle_echo(&chain, inst.delta, inst.t)?).abs())
}

fn oracle_rows(config: &SweepConfig) -> RunResult<Vec<ResultRow>> {
    let mut rows = oracle_instances(config.samples, config.seed)
        .par_iter()
        .map(|inst| {
            let value = oracle_deviation(inst).map_err(|source| RunError {
                experiment: config.experiment,
                point: format!(
                    "gamma={}, lambda={}, n_sites={}, delta={}, t={}",
                    inst.gamma, inst.lambda, inst.n_sites, inst.delta, inst.t
                ),
                source,
            })?;
            Ok(ResultRow {
                gamma: Some(inst.gamma),
                lambda: Some(inst.lambda),
                n_sites: Some(inst.n_sites),
                delta: Some(inst.delta),
                t: Some(inst.t),
                value,
                flag: "q=abs_diff".into(),
                ..blank(config.experiment)
            })
        })
        .collect::<RunResult<Vec<_>>>()?;
    let max = rows.iter().map(|r| r.value).fold(0.0, f64::max);
    rows.push(ResultRow {
        value: max,
        flag: "q=max_abs_diff".into(),
        ..blank(config.experiment)
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn echo_rows_are_ordered_and_echo_inputs() {
        let c = parse_config(
            "[chain]\ngamma = [0.0, 1.0]\nlambda = [0.5, 1.0, 0.5]\nn_sites = [10]\n[grid]\ntime = [0.0, 1.0, 0.5]\n",
        )
        .unwrap();
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3);
        assert_eq!(rows[0].gamma, Some(0.0));
        assert_eq!(rows[0].t, Some(0.0));
        assert_eq!(rows[0].value, 1.0);
        assert_eq!(rows[3].lambda, Some(1.0));
        assert_eq!(rows[11].gamma, Some(1.0));
        assert_eq!(rows[11].delta, Some(0.05));
        assert_eq!(rows[11].mu, None);
        // round trip
        let chain = ChainParams::new(1.0, 1.0, 10).unwrap();
        let l = loschmidt_echo(&mode_table(&chain, 0.05).unwrap(), 1.0).unwrap();
        assert_eq!(rows[11].value, l);
    }

    #[test]
    fn derived_delta_echoes_central_spin() {
        let c = parse_config(
            "[chain]\nlambda = 1.0\nn_sites = 10\n[central_spin]\nmu = 0.1\nnu = 2.0\ng = 0.5\n[grid]\ntime = 1.0\n",
        )
        .unwrap();
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mu, Some(0.1));
        let expected = 0.5 * (0.1 / 4.01f64.sqrt()) / 10.0;
        assert!((rows[0].delta.unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn berry_xx_plateau() {
        let c = parse_config(
            "experiment = \"berry_xx_sizes\"\n[chain]\nlambda = 1.2\nn_sites = [10]\n",
        )
        .unwrap();
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 2);
        let expected = std::f64::consts::PI * (1.0 + 1.1 / (1.1f64 * 1.1 + 4.0).sqrt());
        assert!((rows[1].value - expected).abs() < 1e-12);
        assert_eq!(rows[1].n_sites, None);
        assert_eq!(rows[1].flag, "q=beta");
    }

    #[test]
    fn thermodynamic_kink_flagged() {
        let c = parse_config(
            "experiment = \"berry_surface\"\n[chain]\ngamma = 0.0\nlambda = 1.0\n[berry]\nquantity = \"df\"\n",
        )
        .unwrap();
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows[0].value, f64::INFINITY);
        assert!(rows[0].flag.starts_with("q=df;one_sided"));
    }

    #[test]
    fn oracle_rows_end_with_max() {
        let c = parse_config("experiment = \"oracle_check\"\n[oracle]\nsamples = 5\nseed = 7\n")
            .unwrap();
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 6);
        let last = rows.last().unwrap();
        assert_eq!(last.flag, "q=max_abs_diff");
        assert!(last.value < 1e-9);
        assert_eq!(oracle_instances(5, 7), oracle_instances(5, 7));
    }

    #[test]
    fn peak_failure_names_the_point() {
        let c = parse_config(
            "experiment = \"dbeta_scaling\"\n[chain]\nlambda = 1.0\nn_sites = [11, 21, 31, 41]\n[berry]\nbracket = [1.2, 1.5]\n",
        )
        .unwrap();
        let err = run_experiment(&c).unwrap_err();
        assert!(matches!(err.source, xyecho::Error::PeakNotBracketed { .. }));
        assert!(err.to_string().contains("n_sites="), "{err}");
    }
}
