//! Batch runs and their aggregation into per-drag-bucket statistics.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::{resolved_terrain, run_scenario, ControllerKind, ScenarioConfig};

/// Drag terrain class. Edge buckets are open-ended so values outside
/// `[−0.1, 0.5]` still land somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DragBucket {
    Low,
    Mid,
    High,
}

impl DragBucket {
    pub const ALL: [Self; 3] = [Self::Low, Self::Mid, Self::High];

    pub fn of(c_d: f64) -> Self {
        if c_d < 0.1 {
            Self::Low
        } else if c_d < 0.3 {
            Self::Mid
        } else {
            Self::High
        }
    }

    /// Nominal `[lo, hi]` drag range.
    pub fn range(self) -> [f64; 2] {
        match self {
            Self::Low => [-0.1, 0.1],
            Self::Mid => [0.1, 0.3],
            Self::High => [0.3, 0.5],
        }
    }
}

/// One row of the per-run index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub controller: ControllerKind,
    pub drag: f64,
    pub bucket: DragBucket,
    /// `None` for a diverged run.
    pub ate: Option<f64>,
    pub success: bool,
    pub time_to_stop: Option<f64>,
    pub max_ball_dist: Option<f64>,
    pub diverged: bool,
}

/// Runs one seed; divergence becomes a failed run, any other error is fatal.
pub fn run_seed(cfg: &ScenarioConfig, seed: u64) -> Result<RunSummary> {
    let cfg = ScenarioConfig { seed, ..cfg.clone() };
    match run_scenario(&cfg) {
        Ok(out) => Ok(RunSummary {
            seed,
            controller: cfg.controller,
            drag: out.terrain.drag_coefficient,
            bucket: DragBucket::of(out.terrain.drag_coefficient),
            ate: Some(out.metrics.ate),
            success: out.metrics.success,
            time_to_stop: out.metrics.time_to_stop,
            max_ball_dist: Some(out.metrics.max_ball_dist),
            diverged: false,
        }),
        Err(Error::SimulationDiverged { .. }) => {
            let drag = resolved_terrain(&cfg)?.drag_coefficient;
            Ok(RunSummary {
                seed,
                controller: cfg.controller,
                drag,
                bucket: DragBucket::of(drag),
                ate: None,
                success: false,
                time_to_stop: None,
                max_ball_dist: None,
                diverged: true,
            })
        }
        Err(e) => Err(e),
    }
}

/// Runs `seeds` in parallel; results come back in seed order.
pub fn run_batch(cfg: &ScenarioConfig, seeds: impl IntoIterator<Item = u64>) -> Result<Vec<RunSummary>> {
    let seeds: Vec<u64> = seeds.into_iter().collect();
    seeds.par_iter().map(|&s| run_seed(cfg, s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Linear-interpolation quantiles of a non-empty sample.
pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    Some(Quartiles { q1: q(0.25), median: q(0.5), q3: q(0.75) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketStats {
    pub bucket: DragBucket,
    pub drag_range: [f64; 2],
    pub runs: usize,
    pub successes: usize,
    pub diverged: usize,
    /// `None` for an empty bucket.
    pub success_rate: Option<f64>,
    /// Over runs that did not diverge.
    pub ate: Option<Quartiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControllerStats {
    pub controller: ControllerKind,
    pub runs: usize,
    pub success_rate: f64,
    pub buckets: Vec<BucketStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub runs: usize,
    /// Smallest and largest seed, inclusive.
    pub seed_range: [u64; 2],
    pub controllers: Vec<ControllerStats>,
}

impl BatchReport {
    pub fn bucket(&self, controller: ControllerKind, bucket: DragBucket) -> Option<&BucketStats> {
        self.controllers.iter().find(|c| c.controller == controller)?.buckets.iter().find(|b| b.bucket == bucket)
    }
}

pub fn aggregate(runs: &[RunSummary]) -> Result<BatchReport> {
    let (Some(lo), Some(hi)) = (runs.iter().map(|r| r.seed).min(), runs.iter().map(|r| r.seed).max()) else {
        return Err(Error::InvalidInput("cannot aggregate an empty batch".into()));
    };
    let mut kinds: Vec<ControllerKind> = Vec::new();
    for r in runs {
        if !kinds.contains(&r.controller) {
            kinds.push(r.controller);
        }
    }
    let controllers = kinds
        .into_iter()
        .map(|kind| {
            let mine: Vec<&RunSummary> = runs.iter().filter(|r| r.controller == kind).collect();
            let buckets = DragBucket::ALL
                .iter()
                .map(|&bucket| {
                    let inside: Vec<&&RunSummary> = mine.iter().filter(|r| r.bucket == bucket).collect();
                    let successes = inside.iter().filter(|r| r.success).count();
                    let ates: Vec<f64> = inside.iter().filter_map(|r| r.ate).collect();
                    BucketStats {
                        bucket,
                        drag_range: bucket.range(),
                        runs: inside.len(),
                        successes,
                        diverged: inside.iter().filter(|r| r.diverged).count(),
                        success_rate: (!inside.is_empty()).then(|| successes as f64 / inside.len() as f64),
                        ate: quartiles(&ates),
                    }
                })
                .collect();
            ControllerStats {
                controller: kind,
                runs: mine.len(),
                success_rate: mine.iter().filter(|r| r.success).count() as f64 / mine.len() as f64,
                buckets,
            }
        })
        .collect();
    Ok(BatchReport { runs: runs.len(), seed_range: [lo, hi], controllers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(seed: u64, drag: f64, ate: f64, success: bool) -> RunSummary {
        RunSummary {
            seed,
            controller: ControllerKind::FeedbackGuided,
            drag,
            bucket: DragBucket::of(drag),
            ate: Some(ate),
            success,
            time_to_stop: None,
            max_ball_dist: Some(0.3),
            diverged: false,
        }
    }

    #[test]
    fn bucket_edges() {
        assert_eq!(DragBucket::of(-0.1), DragBucket::Low);
        assert_eq!(DragBucket::of(0.0999), DragBucket::Low);
        assert_eq!(DragBucket::of(0.1), DragBucket::Mid);
        assert_eq!(DragBucket::of(0.3), DragBucket::High);
        assert_eq!(DragBucket::of(0.5), DragBucket::High);
    }

    #[test]
    fn quartile_examples() {
        let q = quartiles(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (2.0, 3.0, 4.0));
        let q = quartiles(&[1.0, 2.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.25, 1.5, 1.75));
        assert_eq!(quartiles(&[]), None);
    }

    #[test]
    fn single_run_report_equals_run() {
        let r = aggregate(&[run(7, 0.2, 0.31, true)]).unwrap();
        assert_eq!(r.seed_range, [7, 7]);
        let b = r.bucket(ControllerKind::FeedbackGuided, DragBucket::Mid).unwrap();
        assert_eq!(b.ate, Some(Quartiles { q1: 0.31, median: 0.31, q3: 0.31 }));
        assert_eq!(b.success_rate, Some(1.0));
        assert_eq!(r.bucket(ControllerKind::FeedbackGuided, DragBucket::Low).unwrap().success_rate, None);
    }

    #[test]
    fn diverged_runs_count_as_failures() {
        let mut d = run(1, 0.0, 0.0, false);
        d.ate = None;
        d.diverged = true;
        let r = aggregate(&[run(0, 0.0, 0.5, true), d]).unwrap();
        let b = r.bucket(ControllerKind::FeedbackGuided, DragBucket::Low).unwrap();
        assert_eq!((b.runs, b.successes, b.diverged), (2, 1, 1));
        assert_eq!(b.ate.unwrap().median, 0.5);
    }

    #[test]
    fn empty_batch_is_an_error() {
        assert!(aggregate(&[]).is_err());
    }

    proptest! {
        #[test]
        fn quartiles_are_ordered(v in proptest::collection::vec(-10.0f64..10.0, 1..50)) {
            let q = quartiles(&v).unwrap();
            let (min, max) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            prop_assert!(min <= q.q1 && q.q1 <= q.median && q.median <= q.q3 && q.q3 <= max);
        }

        #[test]
        fn buckets_partition_runs(drags in proptest::collection::vec(-0.1f64..=0.5, 1..40)) {
            let runs: Vec<_> = drags.iter().enumerate().map(|(i, &d)| run(i as u64, d, 0.1, true)).collect();
            let r = aggregate(&runs).unwrap();
            let total: usize = r.controllers[0].buckets.iter().map(|b| b.runs).sum();
            prop_assert_eq!(total, runs.len());
        }
    }
}
