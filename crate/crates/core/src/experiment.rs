//! Monte Carlo experiment harness.
//!
//! An experiment draws `m` Haar-random targets and runs `n` independent
//! estimations of each. Per iteration `k` it averages the squared error (or
//! Hilbert-Schmidt distance) over the runs of each target and summarizes the
//! `m` resulting MSE values. Every (target, run) cell owns a stream derived
//! from the master seed, and results are reduced in index order, so the
//! output does not depend on thread scheduling.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::cspsa::GainSchedule;
use crate::error::{Error, Result};
use crate::metrics::{gill_massar_mse, power_law_fit, summary_statistics, FitPoint, PowerLawFit};
use crate::protocol::{
    estimate_state_random_guess, estimate_unitary, EstimationConfig, PostProcessing,
    UnitaryEstimationOptions,
};
use crate::qudit::{haar_random_state, haar_random_unitary};
use crate::rng::RngStream;
use crate::simplex::SimplexOptions;

const TARGET_STREAM: u64 = 1;
const RUN_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    State,
    Unitary,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::State => "state",
            Mode::Unitary => "unitary",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state" => Ok(Mode::State),
            "unitary" => Ok(Mode::Unitary),
            other => Err(Error::Config(format!(
                "mode: expected `state` or `unitary`, got `{other}`"
            ))),
        }
    }
}

/// Which estimate a result row describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Raw,
    Closest,
    GramSchmidt,
}

impl Variant {
    fn of(method: PostProcessing) -> Self {
        match method {
            PostProcessing::None => Variant::Raw,
            PostProcessing::ClosestUnitary => Variant::Closest,
            PostProcessing::GramSchmidt => Variant::GramSchmidt,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Raw => "raw",
            Variant::Closest => "closest",
            Variant::GramSchmidt => "gs",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Variant::Raw),
            "closest" => Ok(Variant::Closest),
            "gs" => Ok(Variant::GramSchmidt),
            other => Err(Error::InvalidData(format!("unknown variant `{other}`"))),
        }
    }
}

/// Parses the `--post` / `post =` spelling of a post-processing method.
pub fn parse_post_processing(s: &str) -> Result<PostProcessing> {
    match s {
        "none" => Ok(PostProcessing::None),
        "closest" => Ok(PostProcessing::ClosestUnitary),
        "gs" => Ok(PostProcessing::GramSchmidt),
        other => Err(Error::Config(format!(
            "post: expected one of none, closest, gs; got `{other}`"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub dim: usize,
    /// Shots per probe per iteration; one sweep per entry.
    pub shots: Vec<u64>,
    pub iterations: usize,
    /// Number of random targets, `m`.
    pub targets: usize,
    /// Estimation runs per target, `n`.
    pub runs: usize,
    pub seed: u64,
    pub gains: GainSchedule,
    pub simplex: SimplexOptions,
    pub mle: bool,
    pub noiseless: bool,
    pub renormalize_iterate: bool,
    pub unitary: UnitaryEstimationOptions,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::State,
            dim: 2,
            shots: vec![1000],
            iterations: 100,
            targets: 20,
            runs: 10,
            seed: 0,
            gains: GainSchedule::default(),
            simplex: SimplexOptions::default(),
            mle: true,
            noiseless: false,
            renormalize_iterate: true,
            unitary: UnitaryEstimationOptions::default(),
            out: None,
        }
    }
}

/// On-disk form: flat `key = value` lines (TOML syntax). Unknown keys are
/// rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    mode: Option<String>,
    d: Option<usize>,
    shots: Option<ShotsField>,
    iters: Option<usize>,
    targets: Option<usize>,
    runs: Option<usize>,
    seed: Option<u64>,
    gain_a: Option<f64>,
    gain_big_a: Option<f64>,
    gain_s: Option<f64>,
    gain_b: Option<f64>,
    gain_r: Option<f64>,
    simplex_max_evals: Option<usize>,
    simplex_xtol: Option<f64>,
    simplex_ftol: Option<f64>,
    simplex_step: Option<f64>,
    mle: Option<bool>,
    noiseless: Option<bool>,
    renormalize: Option<bool>,
    post: Option<String>,
    re_update: Option<bool>,
    out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ShotsField {
    One(u64),
    Many(Vec<u64>),
}

impl ExperimentConfig {
    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let mut cfg = Self::default();
        if let Some(mode) = file.mode {
            cfg.mode = mode.parse()?;
        }
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = file.$src { cfg.$($dst).+ = v; })*
            };
        }
        set!(
            d => dim,
            iters => iterations,
            targets => targets,
            runs => runs,
            seed => seed,
            gain_a => gains.a,
            gain_big_a => gains.big_a,
            gain_s => gains.s,
            gain_b => gains.b,
            gain_r => gains.r,
            simplex_xtol => simplex.x_tolerance,
            simplex_ftol => simplex.f_tolerance,
            simplex_step => simplex.initial_step,
            mle => mle,
            noiseless => noiseless,
            renormalize => renormalize_iterate,
            re_update => unitary.re_update,
        );
        if let Some(shots) = file.shots {
            cfg.shots = match shots {
                ShotsField::One(n) => vec![n],
                ShotsField::Many(v) => v,
            };
        }
        if let Some(n) = file.simplex_max_evals {
            cfg.simplex.max_evaluations = Some(n);
        }
        if let Some(post) = file.post {
            cfg.unitary.post_processing = parse_post_processing(&post)?;
        }
        cfg.out = file.out;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks every field, reporting all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.dim < 2 {
            problems.push(format!("d: must be at least 2, got {}", self.dim));
        }
        if self.shots.is_empty() {
            problems.push("shots: at least one value required".to_string());
        }
        if self.shots.contains(&0) {
            problems.push("shots: every value must be at least 1".to_string());
        }
        if self.iterations == 0 {
            problems.push("iters: must be at least 1".to_string());
        }
        if self.targets == 0 {
            problems.push("targets: must be at least 1".to_string());
        }
        if self.runs == 0 {
            problems.push("runs: must be at least 1".to_string());
        }
        for check in [
            self.gains.validate(),
            self.simplex.validate(),
            self.unitary.validate(),
        ] {
            if let Err(e) = check {
                problems.push(e.to_string());
            }
        }
        if self.mode == Mode::State && self.unitary.re_update {
            problems.push("re_update: only meaningful in unitary mode".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    fn estimation_config(&self, shots: u64) -> EstimationConfig {
        EstimationConfig {
            dim: self.dim,
            shots,
            iterations: self.iterations,
            gains: self.gains,
            simplex: self.simplex.clone(),
            mle: self.mle && !self.noiseless,
            noiseless: self.noiseless,
            renormalize_iterate: self.renormalize_iterate,
        }
    }

    fn variants(&self) -> Vec<Variant> {
        match (self.mode, self.unitary.post_processing) {
            (Mode::State, _) | (Mode::Unitary, PostProcessing::None) => vec![Variant::Raw],
            (Mode::Unitary, method) => vec![Variant::Raw, Variant::of(method)],
        }
    }
}

/// One `(d, N, k, variant)` row of results.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub mode: Mode,
    pub dim: usize,
    pub shots: u64,
    pub iteration: usize,
    /// `2Nk`; per column in unitary mode.
    pub n_t: u64,
    pub variant: Variant,
    pub mean_mse: f64,
    pub median_mse: f64,
    pub q1: f64,
    pub q3: f64,
    pub gm_benchmark: f64,
    pub samples: usize,
    /// Standard error of `mean_mse` over all `m·n` runs. Not serialized.
    pub std_error: Option<f64>,
}

/// Run-level events that do not show up in the per-row statistics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub restarts: usize,
    pub post_processing_fallbacks: usize,
    /// Largest `‖M†M − 1‖_max` over post-processed estimates that did not fall back.
    pub max_unitarity_defect: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
    pub diagnostics: Diagnostics,
}

impl ResultsTable {
    pub fn row(&self, shots: u64, iteration: usize, variant: Variant) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.shots == shots && r.iteration == iteration && r.variant == variant)
    }
}

/// Per-run error curves: `curves[variant][k - 1]`.
struct RunCurves {
    curves: Vec<Vec<f64>>,
    restarts: usize,
    fallbacks: usize,
    max_defect: f64,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultsTable> {
    match config.mode {
        Mode::State => run_state_experiment(config),
        Mode::Unitary => run_unitary_experiment(config),
    }
}

pub fn run_state_experiment(config: &ExperimentConfig) -> Result<ResultsTable> {
    if config.mode != Mode::State {
        return Err(Error::Config(
            "mode: state experiment requires mode = state".into(),
        ));
    }
    config.validate()?;
    let targets = (0..config.targets)
        .map(|i| {
            haar_random_state(
                config.dim,
                &mut RngStream::derive(config.seed, &[TARGET_STREAM, i as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    run_grid(config, |shots, i, rng| {
        let est = config.estimation_config(shots);
        let traj = estimate_state_random_guess(&targets[i], &est, rng)?;
        Ok(RunCurves {
            curves: vec![traj.squared_errors()],
            restarts: traj.restarts,
            fallbacks: 0,
            max_defect: 0.0,
        })
    })
}

pub fn run_unitary_experiment(config: &ExperimentConfig) -> Result<ResultsTable> {
    if config.mode != Mode::Unitary {
        return Err(Error::Config(
            "mode: unitary experiment requires mode = unitary".into(),
        ));
    }
    config.validate()?;
    let targets = (0..config.targets)
        .map(|i| {
            haar_random_unitary(
                config.dim,
                &mut RngStream::derive(config.seed, &[TARGET_STREAM, i as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    run_grid(config, |shots, i, rng| {
        let est = config.estimation_config(shots);
        let traj = estimate_unitary(&targets[i], &est, &config.unitary, rng)?;
        let mut curves = vec![traj
            .points
            .iter()
            .map(|p| p.raw_distance)
            .collect::<Vec<_>>()];
        let mut fallbacks = 0;
        let mut max_defect: f64 = 0.0;
        if config.unitary.post_processing != PostProcessing::None {
            let mut processed = Vec::with_capacity(traj.points.len());
            for p in &traj.points {
                let pp = p.processed.as_ref().expect("post-processing requested");
                if pp.fell_back {
                    fallbacks += 1;
                } else {
                    max_defect = max_defect.max(pp.estimate.unitarity_defect());
                }
                processed.push(pp.distance);
            }
            curves.push(processed);
        }
        Ok(RunCurves {
            curves,
            restarts: traj.restarts,
            fallbacks,
            max_defect,
        })
    })
}

fn run_grid<F>(config: &ExperimentConfig, run: F) -> Result<ResultsTable>
where
    F: Fn(u64, usize, &mut RngStream) -> Result<RunCurves> + Sync,
{
    let variants = config.variants();
    let mut table = ResultsTable::default();
    for &shots in &config.shots {
        let cells: Vec<(usize, usize)> = (0..config.targets)
            .flat_map(|i| (0..config.runs).map(move |j| (i, j)))
            .collect();
        let results = cells
            .par_iter()
            .map(|&(i, j)| {
                let mut rng =
                    RngStream::derive(config.seed, &[RUN_STREAM, shots, i as u64, j as u64]);
                run(shots, i, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;

        for r in &results {
            table.diagnostics.restarts += r.restarts;
            table.diagnostics.post_processing_fallbacks += r.fallbacks;
            table.diagnostics.max_unitarity_defect =
                table.diagnostics.max_unitarity_defect.max(r.max_defect);
        }
        for (v, &variant) in variants.iter().enumerate() {
            for k in 1..=config.iterations {
                // results are ordered target-major, so each chunk is one target
                let per_target: Vec<f64> = results
                    .chunks(config.runs)
                    .map(|runs| {
                        runs.iter().map(|r| r.curves[v][k - 1]).sum::<f64>() / config.runs as f64
                    })
                    .collect();
                let all: Vec<f64> = results.iter().map(|r| r.curves[v][k - 1]).collect();
                let stats = summary_statistics(&per_target)?;
                let pooled = summary_statistics(&all)?;
                let n_t = 2 * shots * k as u64;
                table.rows.push(ResultRow {
                    mode: config.mode,
                    dim: config.dim,
                    shots,
                    iteration: k,
                    n_t,
                    variant,
                    mean_mse: stats.mean,
                    median_mse: stats.median,
                    q1: stats.q1,
                    q3: stats.q3,
                    gm_benchmark: gill_massar_mse(2 * config.dim, n_t)?,
                    samples: config.targets * config.runs,
                    std_error: Some(pooled.std_error),
                });
            }
        }
    }
    Ok(table)
}

/// A fit of one `(mode, d, N, variant)` curve over one window.
#[derive(Clone, Debug, PartialEq)]
pub struct FitEntry {
    pub mode: Mode,
    pub dim: usize,
    pub shots: u64,
    pub variant: Variant,
    pub fit: PowerLawFit,
}

/// Fits `mean_mse = p / N_T^a` for every curve in `table` and every window.
pub fn fit_report(table: &ResultsTable, windows: &[(usize, usize)]) -> Result<Vec<FitEntry>> {
    let mut keys: Vec<(Mode, usize, u64, Variant)> = table
        .rows
        .iter()
        .map(|r| (r.mode, r.dim, r.shots, r.variant))
        .collect();
    keys.sort();
    keys.dedup();
    let mut out = Vec::new();
    for (mode, dim, shots, variant) in keys {
        let points: Vec<FitPoint> = table
            .rows
            .iter()
            .filter(|r| r.mode == mode && r.dim == dim && r.shots == shots && r.variant == variant)
            .map(|r| FitPoint {
                iteration: r.iteration,
                n_t: r.n_t as f64,
                mse: r.mean_mse,
            })
            .collect();
        let k_min = points.iter().map(|p| p.iteration).min().unwrap_or(0);
        let k_max = points.iter().map(|p| p.iteration).max().unwrap_or(0);
        for &(lo, hi) in windows {
            if lo < k_min || hi > k_max {
                return Err(Error::Range(format!(
                    "window {lo}:{hi} outside iterations {k_min}:{k_max}"
                )));
            }
            out.push(FitEntry {
                mode,
                dim,
                shots,
                variant,
                fit: power_law_fit(&points, (lo, hi))?,
            });
        }
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 12] = [
    "mode",
    "d",
    "N",
    "k",
    "N_T",
    "variant",
    "mean_mse",
    "median_mse",
    "q1",
    "q3",
    "gm_benchmark",
    "samples",
];

/// Formats with 17 significant digits, enough to round-trip any `f64`.
fn float_field(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: std::io::Write>(
    table: &ResultsTable,
    writer: W,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.mode.to_string(),
            r.dim.to_string(),
            r.shots.to_string(),
            r.iteration.to_string(),
            r.n_t.to_string(),
            r.variant.to_string(),
            float_field(r.mean_mse),
            float_field(r.median_mse),
            float_field(r.q1),
            float_field(r.q3),
            float_field(r.gm_benchmark),
            r.samples.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `table` to `path`, replacing any existing file.
pub fn emit_csv(table: &ResultsTable, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(table, file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<ResultsTable> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidData(format!(
            "{}: unexpected header `{}`",
            path.display(),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let bad = |field: &str| {
            Error::InvalidData(format!(
                "{}: row {}: bad `{field}`",
                path.display(),
                line + 2
            ))
        };
        macro_rules! field {
            ($i:expr, $t:ty) => {
                record[$i].parse::<$t>().map_err(|_| bad(CSV_HEADER[$i]))?
            };
        }
        rows.push(ResultRow {
            mode: record[0].parse().map_err(|_| bad("mode"))?,
            dim: field!(1, usize),
            shots: field!(2, u64),
            iteration: field!(3, usize),
            n_t: field!(4, u64),
            variant: record[5].parse().map_err(|_| bad("variant"))?,
            mean_mse: field!(6, f64),
            median_mse: field!(7, f64),
            q1: field!(8, f64),
            q3: field!(9, f64),
            gm_benchmark: field!(10, f64),
            samples: field!(11, usize),
            std_error: None,
        });
    }
    Ok(ResultsTable {
        rows,
        diagnostics: Diagnostics::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            mode,
            dim: 2,
            shots: vec![100],
            iterations: 4,
            targets: 3,
            runs: 2,
            seed: 11,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn parse_flat_config() {
        let cfg = ExperimentConfig::parse(
            r#"
            # comment
            mode = "unitary"
            d = 4
            shots = [1000, 10000]
            iters = 10
            targets = 5
            runs = 3
            seed = 42
            gain_b = 0.2
            post = "gs"
            re_update = true
            out = "results.csv"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Unitary);
        assert_eq!(cfg.dim, 4);
        assert_eq!(cfg.shots, vec![1000, 10000]);
        assert_eq!(cfg.gains.b, 0.2);
        assert_eq!(cfg.gains.a, 3.0);
        assert_eq!(cfg.unitary.post_processing, PostProcessing::GramSchmidt);
        assert!(cfg.unitary.re_update);
        assert_eq!(cfg.out.as_deref(), Some(Path::new("results.csv")));
        cfg.validate().unwrap();

        let single = ExperimentConfig::parse("shots = 500").unwrap();
        assert_eq!(single.shots, vec![500]);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ExperimentConfig::parse("dimension = 3").unwrap_err();
        assert!(
            matches!(&err, Error::Config(msg) if msg.contains("dimension")),
            "{err}"
        );
    }

    #[test]
    fn validation_lists_every_problem() {
        let cfg = ExperimentConfig {
            dim: 1,
            targets: 0,
            runs: 0,
            ..ExperimentConfig::default()
        };
        let Err(Error::Config(msg)) = cfg.validate() else {
            panic!("expected config error")
        };
        for field in ["d:", "targets:", "runs:"] {
            assert!(msg.contains(field), "{msg}");
        }
        let bad_post = ExperimentConfig::parse("post = \"qr\"").unwrap_err();
        assert!(matches!(bad_post, Error::Config(_)));
        let cfg = ExperimentConfig {
            mode: Mode::Unitary,
            unitary: UnitaryEstimationOptions {
                post_processing: PostProcessing::None,
                re_update: true,
            },
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn state_table_shape() {
        let cfg = small(Mode::State);
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 4);
        for (k, row) in table.rows.iter().enumerate() {
            assert_eq!(row.iteration, k + 1);
            assert_eq!(row.n_t, 200 * (k as u64 + 1));
            assert_eq!(row.samples, 6);
            assert_eq!(row.variant, Variant::Raw);
            assert!(row.gm_benchmark > 0.0);
            assert!(row.q1 <= row.median_mse && row.median_mse <= row.q3);
        }
        assert!(run_unitary_experiment(&cfg).is_err());
    }

    #[test]
    fn unitary_table_has_both_variants() {
        let cfg = small(Mode::Unitary);
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 8);
        assert!(table.row(100, 4, Variant::Raw).is_some());
        assert!(table.row(100, 4, Variant::Closest).is_some());
        assert!(table.diagnostics.max_unitarity_defect <= 1e-10);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = small(Mode::State);
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
        let other = ExperimentConfig {
            seed: 12,
            ..cfg.clone()
        };
        assert_ne!(
            run_experiment(&cfg).unwrap(),
            run_experiment(&other).unwrap()
        );
    }

    fn synthetic(dim: usize, shots: u64) -> ResultsTable {
        let rows = (1..=100)
            .map(|k| {
                let n_t = 2 * shots * k as u64;
                let mse = (2 * dim - 1) as f64 / n_t as f64;
                ResultRow {
                    mode: Mode::State,
                    dim,
                    shots,
                    iteration: k,
                    n_t,
                    variant: Variant::Raw,
                    mean_mse: mse,
                    median_mse: mse,
                    q1: mse,
                    q3: mse,
                    gm_benchmark: mse,
                    samples: 1,
                    std_error: None,
                }
            })
            .collect();
        ResultsTable {
            rows,
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn fit_report_on_exact_table() {
        let mut table = synthetic(2, 1000);
        table.rows.extend(synthetic(4, 1000).rows);
        let fits = fit_report(&table, &crate::metrics::DEFAULT_WINDOWS).unwrap();
        assert_eq!(fits.len(), 4);
        for f in &fits {
            assert!((f.fit.a - 1.0).abs() < 1e-10);
            assert!((f.fit.p - (2 * f.dim - 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_report_window_errors() {
        let table = synthetic(2, 1000);
        assert!(matches!(
            fit_report(&table, &[(50, 120)]),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            fit_report(&table, &[(0, 20)]),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            fit_report(&table, &[(10, 11)]),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn csv_round_trip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let mut table = run_experiment(&small(Mode::Unitary)).unwrap();
        emit_csv(&table, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "mode,d,N,k,N_T,variant,mean_mse,median_mse,q1,q3,gm_benchmark,samples"
        );
        let back = read_csv(&path).unwrap();
        for r in &mut table.rows {
            r.std_error = None;
        }
        assert_eq!(back.rows, table.rows);
        // overwriting is idempotent
        emit_csv(&table, &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), text);
    }

    #[test]
    fn empty_table_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        emit_csv(&ResultsTable::default(), &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            format!("{}\n", CSV_HEADER.join(","))
        );
        assert!(read_csv(&path).unwrap().rows.is_empty());
    }

    #[test]
    fn emit_csv_reports_path_on_failure() {
        let path = Path::new("/nonexistent-dir/out.csv");
        let err = emit_csv(&ResultsTable::default(), path).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
