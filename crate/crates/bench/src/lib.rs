//! Experiment harness: runs the learner repeatedly against known target
//! machines and records query metrics.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use apartlearn::learner::{learn, LearnError, LearnerConfig, Policy, RuleEvent, Variant};
use apartlearn::mealy::{
    bisimilar, minimize, parse_dot, random_machine, DotError, MealyError, MealyMachine,
};
use apartlearn::obstree::NormSnapshot;
use apartlearn::oracle::{EqOracleConfig, SimulatedTeacher};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Dot {
        path: PathBuf,
        #[source]
        source: DotError,
    },
    #[error(transparent)]
    Mealy(#[from] MealyError),
    #[error("{model} repeat {repeat}: {source}")]
    Learn {
        model: String,
        repeat: usize,
        #[source]
        source: LearnError,
    },
    #[error("{model} repeat {repeat}: {resets} resets exceed the ceiling {ceiling}")]
    CeilingExceeded {
        model: String,
        repeat: usize,
        resets: u64,
        ceiling: u64,
    },
    #[error("invalid generator parameters {0:?}, expected n=<N>,k=<K>,p=<P>")]
    BadGenerator(String),
    #[error("repeats must be at least 1")]
    NoRepeats,
}

impl BenchError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            BenchError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                "file-not-found"
            }
            BenchError::Io { .. } => "io",
            BenchError::Dot { .. } => "parse",
            BenchError::Mealy(_) => "model",
            BenchError::Learn {
                source: LearnError::BudgetExceeded { .. },
                ..
            } => "budget",
            BenchError::Learn { .. } => "teacher",
            BenchError::CeilingExceeded { .. } => "ceiling",
            BenchError::BadGenerator(_) | BenchError::NoRepeats => "usage",
        }
    }

    /// Errors caused by the inputs of the run rather than by learning.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.kind(),
            "file-not-found" | "io" | "parse" | "model" | "usage"
        )
    }
}

/// Parameters of the random generator, written `n=20,k=3,p=3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorParams {
    pub n: usize,
    pub k: usize,
    pub p: usize,
}

impl FromStr for GeneratorParams {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BenchError::BadGenerator(s.to_string());
        let (mut n, mut k, mut p) = (None, None, None);
        for part in s.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let value: usize = value.trim().parse().map_err(|_| bad())?;
            let slot = match key.trim() {
                "n" => &mut n,
                "k" => &mut k,
                "p" => &mut p,
                _ => return Err(bad()),
            };
            if slot.replace(value).is_some() {
                return Err(bad());
            }
        }
        Ok(GeneratorParams {
            n: n.ok_or_else(bad)?,
            k: k.ok_or_else(bad)?,
            p: p.unwrap_or(2),
        })
    }
}

impl fmt::Display for GeneratorParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={},k={},p={}", self.n, self.k, self.p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelSource {
    Dot(PathBuf),
    Random(GeneratorParams),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PolicyKind {
    #[default]
    Strategic,
    Any,
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub models: Vec<ModelSource>,
    pub variant: Variant,
    pub policy: PolicyKind,
    /// The oracle seed is replaced per repeat.
    pub oracle: EqOracleConfig,
    pub max_output_queries: Option<u64>,
    pub repeats: usize,
    pub seed: u64,
    pub record_events: bool,
    pub timing: bool,
}

/// A target machine ready for learning.
#[derive(Clone, Debug)]
pub struct Target {
    pub id: String,
    pub machine: MealyMachine,
}

impl Target {
    pub fn load(source: &ModelSource, seed: u64) -> Result<Target, BenchError> {
        match source {
            ModelSource::Dot(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
                    path: path.clone(),
                    source,
                })?;
                let machine = parse_dot(&text).map_err(|source| BenchError::Dot {
                    path: path.clone(),
                    source,
                })?;
                Ok(Target {
                    id: model_id(path),
                    machine: minimize(&machine)?,
                })
            }
            ModelSource::Random(g) => Ok(Target {
                id: format!("random-n{}-k{}-p{}-s{seed}", g.n, g.k, g.p),
                machine: random_machine(g.n, g.k, g.p, seed)?,
            }),
        }
    }
}

fn model_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// One learning run. Column order of the CSV output follows the fields.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub model: String,
    pub n: usize,
    pub k: usize,
    pub learn_resets: u64,
    pub learn_inputs: u64,
    pub test_resets: u64,
    pub test_inputs: u64,
    pub eq_queries: u64,
    pub success: bool,
    /// Only filled in when timing is requested, so that outputs stay
    /// reproducible by default.
    pub wall_time_ms: Option<f64>,
}

/// Events of one run, for the verbose log.
#[derive(Clone, Debug, Serialize)]
pub struct EventRecord<'a> {
    pub model: &'a str,
    pub repeat: usize,
    #[serde(flatten)]
    pub event: &'a RuleEvent,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub row: MetricsRow,
    pub repeat: usize,
    pub events: Vec<RuleEvent>,
}

/// Seed of repeat `r`, spread so that neighbouring repeats differ in many bits.
pub fn repeat_seed(seed: u64, repeat: usize) -> u64 {
    let mut z = seed.wrapping_add((repeat as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Largest number of learning resets a correct run may use on a target with
/// `n` states and `k` inputs when counterexamples have length at most `m`.
///
/// Every rule application except a refining R4 costs at most two output
/// queries (one, plus a repeated plain query when an adaptive query gains
/// nothing). There are at most `n - 1` refining R4 applications, each
/// spending one query on the counterexample and at most `ceil(log2(2m))`
/// on processing it.
pub fn reset_ceiling(n: usize, k: usize, m: usize) -> u64 {
    let (n, k) = (n as u64, k as u64);
    let per_counterexample = if m == 0 {
        1
    } else {
        (2 * m as u64).next_power_of_two().ilog2() as u64 + 1
    };
    2 * NormSnapshot::bound(n, k) + n.saturating_sub(1) * per_counterexample
}

pub fn run_one(
    spec: &ExperimentSpec,
    target: &Target,
    repeat: usize,
) -> Result<RunOutcome, BenchError> {
    let seed = repeat_seed(spec.seed, repeat);
    let oracle = EqOracleConfig {
        seed,
        ..spec.oracle
    };
    let config = LearnerConfig {
        variant: spec.variant,
        policy: match spec.policy {
            PolicyKind::Strategic => Policy::Strategic,
            PolicyKind::Any => Policy::AnyOrder { seed },
        },
        max_output_queries: spec.max_output_queries,
        record_events: spec.record_events,
    };
    let wrap = |source: LearnError| BenchError::Learn {
        model: target.id.clone(),
        repeat,
        source,
    };
    let start = Instant::now();
    let teacher =
        SimulatedTeacher::new(target.machine.clone(), oracle).map_err(|e| wrap(e.into()))?;
    let (report, teacher) = learn(teacher, config).map_err(wrap)?;
    let elapsed = start.elapsed();
    let success = bisimilar(&report.hypothesis, &target.machine)?.is_equivalent();
    let (n, k) = (target.machine.num_states(), target.machine.num_inputs());
    let learning = teacher.session().learning();
    let testing = teacher.session().testing();
    if success && spec.policy == PolicyKind::Strategic {
        let ceiling = reset_ceiling(n, k, report.longest_counterexample);
        if learning.resets > ceiling {
            return Err(BenchError::CeilingExceeded {
                model: target.id.clone(),
                repeat,
                resets: learning.resets,
                ceiling,
            });
        }
    }
    Ok(RunOutcome {
        row: MetricsRow {
            model: target.id.clone(),
            n,
            k,
            learn_resets: learning.resets,
            learn_inputs: learning.symbols,
            test_resets: testing.resets,
            test_inputs: testing.symbols,
            eq_queries: report.eq_queries,
            success,
            wall_time_ms: spec.timing.then_some(elapsed.as_secs_f64() * 1e3),
        },
        repeat,
        events: report.events,
    })
}

/// Loads every model and runs all repeats, in parallel. Results are ordered
/// by model, then repeat, whatever the scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunOutcome>, BenchError> {
    if spec.repeats == 0 {
        return Err(BenchError::NoRepeats);
    }
    let targets = spec
        .models
        .iter()
        .map(|m| Target::load(m, spec.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(&Target, usize)> = targets
        .iter()
        .flat_map(|t| (0..spec.repeats).map(move |r| (t, r)))
        .collect();
    // indexed collect keeps job order
    jobs.into_par_iter()
        .map(|(t, r)| run_one(spec, t, r))
        .collect()
}

/// Summary statistics of one counter. The standard deviation is the
/// population one, so a single row has deviation 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let len = values.len() as f64;
        let mean = values.iter().sum::<f64>() / len;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len;
        Some(Stat {
            mean,
            stddev: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub model: String,
    pub n: usize,
    pub k: usize,
    pub runs: usize,
    pub successes: usize,
    pub learn_resets: Stat,
    pub learn_inputs: Stat,
    pub test_resets: Stat,
    pub test_inputs: Stat,
    pub eq_queries: Stat,
    pub wall_time_ms: Option<Stat>,
    /// Mean learning resets per transition of the target, `learn_resets / (k n)`.
    pub resets_per_transition: f64,
}

impl Summary {
    /// Whether the resets ratio lies in the range of 1 to 4 queries per
    /// transition observed on the usual benchmark models.
    pub fn ratio_in_typical_range(&self) -> bool {
        (1.0..=4.0).contains(&self.resets_per_transition)
    }
}

/// Per-model summaries, in order of first appearance.
pub fn aggregate(rows: &[MetricsRow]) -> Vec<Summary> {
    let mut models: Vec<&str> = Vec::new();
    for r in rows {
        if !models.contains(&r.model.as_str()) {
            models.push(&r.model);
        }
    }
    models
        .into_iter()
        .map(|model| {
            let group: Vec<&MetricsRow> = rows.iter().filter(|r| r.model == model).collect();
            let stat = |f: fn(&MetricsRow) -> u64| {
                Stat::of(&group.iter().map(|r| f(r) as f64).collect::<Vec<_>>())
                    .expect("non-empty group")
            };
            let times: Vec<f64> = group.iter().filter_map(|r| r.wall_time_ms).collect();
            let (n, k) = (group[0].n, group[0].k);
            let learn_resets = stat(|r| r.learn_resets);
            Summary {
                model: model.to_string(),
                n,
                k,
                runs: group.len(),
                successes: group.iter().filter(|r| r.success).count(),
                learn_resets,
                learn_inputs: stat(|r| r.learn_inputs),
                test_resets: stat(|r| r.test_resets),
                test_inputs: stat(|r| r.test_inputs),
                eq_queries: stat(|r| r.eq_queries),
                wall_time_ms: Stat::of(&times),
                resets_per_transition: learn_resets.mean / (n * k) as f64,
            }
        })
        .collect()
}

/// Human-readable summary, one block per model.
pub fn render_summary(summaries: &[Summary]) -> String {
    let mut out = String::new();
    for s in summaries {
        out.push_str(&format!(
            "{} (n={}, k={}): {}/{} successful\n",
            s.model, s.n, s.k, s.successes, s.runs
        ));
        let mut line = |name: &str, st: &Stat| {
            out.push_str(&format!(
                "  {name:<13} {:>12.2} ± {:<10.2} [{}, {}]\n",
                st.mean, st.stddev, st.min, st.max
            ));
        };
        line("learn_resets", &s.learn_resets);
        line("learn_inputs", &s.learn_inputs);
        line("test_resets", &s.test_resets);
        line("test_inputs", &s.test_inputs);
        line("eq_queries", &s.eq_queries);
        if let Some(t) = &s.wall_time_ms {
            line("wall_time_ms", t);
        }
        out.push_str(&format!(
            "  resets/(k*n)  {:>12.2}{}\n",
            s.resets_per_transition,
            if s.ratio_in_typical_range() {
                ""
            } else {
                "  (outside [1, 4])"
            }
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn write_rows<W: std::io::Write>(
    rows: &[MetricsRow],
    format: Format,
    mut out: W,
) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: &str, resets: u64) -> MetricsRow {
        MetricsRow {
            model: model.into(),
            n: 2,
            k: 2,
            learn_resets: resets,
            learn_inputs: 10,
            test_resets: 0,
            test_inputs: 0,
            eq_queries: 1,
            success: true,
            wall_time_ms: None,
        }
    }

    #[test]
    fn generator_params() {
        let g: GeneratorParams = "n=20,k=3,p=3".parse().unwrap();
        assert_eq!(g, GeneratorParams { n: 20, k: 3, p: 3 });
        assert_eq!("n=4,k=2".parse::<GeneratorParams>().unwrap().p, 2);
        for bad in ["n=4", "n=4,k=x", "n=1,n=2,k=1", "q=1,n=1,k=1", ""] {
            assert!(bad.parse::<GeneratorParams>().is_err(), "{bad}");
        }
    }

    #[test]
    fn single_row_has_zero_deviation() {
        let s = aggregate(&[row("m", 7)]);
        assert_eq!(s[0].learn_resets.mean, 7.0);
        assert_eq!(s[0].learn_resets.stddev, 0.0);
        assert!(s[0].wall_time_ms.is_none());
    }

    #[test]
    fn equal_rows_have_zero_deviation() {
        let s = aggregate(&[row("m", 5), row("m", 5)]);
        assert_eq!(s[0].learn_resets.stddev, 0.0);
        assert_eq!(s[0].runs, 2);
    }

    #[test]
    fn three_rows_by_hand() {
        // 2, 4, 9: mean 5, squared deviations 9 + 1 + 16 = 26
        let s = aggregate(&[row("m", 2), row("m", 4), row("m", 9), row("other", 1)]);
        assert_eq!(s.len(), 2);
        let st = s[0].learn_resets;
        assert_eq!(st.mean, 5.0);
        assert!((st.stddev - (26.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!((st.min, st.max), (2.0, 9.0));
        assert_eq!(s[0].resets_per_transition, 1.25);
        assert_eq!(s[1].model, "other");
    }

    #[test]
    fn repeat_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..100).map(|r| repeat_seed(7, r)).collect();
        assert_eq!(seeds.len(), 100);
    }

    #[test]
    fn ceiling_values() {
        // n=1: only the norm bound term
        assert_eq!(reset_ceiling(1, 2, 0), 2 * NormSnapshot::bound(1, 2));
        // log2(2 * 5) rounds up to 4, plus the counterexample query
        assert_eq!(
            reset_ceiling(3, 2, 5),
            2 * NormSnapshot::bound(3, 2) + 2 * 5
        );
        assert_eq!(
            reset_ceiling(3, 2, 4),
            2 * NormSnapshot::bound(3, 2) + 2 * 4
        );
    }

    #[test]
    fn csv_columns_follow_field_order() {
        let mut buf = Vec::new();
        write_rows(&[row("m", 3)], Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "model,n,k,learn_resets,learn_inputs,test_resets,test_inputs,eq_queries,success,wall_time_ms"
        );
        assert_eq!(text.lines().nth(1).unwrap(), "m,2,2,3,10,0,0,1,true,");
    }

    #[test]
    fn runs_are_ordered_and_successful() {
        let spec = ExperimentSpec {
            models: vec![
                ModelSource::Random(GeneratorParams { n: 6, k: 2, p: 2 }),
                ModelSource::Random(GeneratorParams { n: 4, k: 3, p: 2 }),
            ],
            variant: Variant::Ads,
            policy: PolicyKind::Strategic,
            oracle: EqOracleConfig::default(),
            max_output_queries: None,
            repeats: 3,
            seed: 1,
            record_events: true,
            timing: false,
        };
        let out = run_experiment(&spec).unwrap();
        let keys: Vec<(usize, usize)> = out.iter().map(|o| (o.row.n, o.repeat)).collect();
        assert_eq!(keys, [(6, 0), (6, 1), (6, 2), (4, 0), (4, 1), (4, 2)]);
        assert!(out.iter().all(|o| o.row.success && !o.events.is_empty()));
        let total: u64 = out[0].events.iter().map(|e| e.resets).sum();
        assert_eq!(total, out[0].row.learn_resets);
    }
}
