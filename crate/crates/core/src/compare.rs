//! Defended versus undefended runs over a set of seeds.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::metrics::MetricsSeries;
use crate::netsim::{run_with, EvalMode};

/// Thresholds of the containment comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentCriterion {
    /// Largest allowed ratio of median defended peak to median baseline peak.
    pub max_median_ratio: f64,
    /// Per-seed ratio that counts as contained.
    pub max_seed_ratio: f64,
    /// Fraction of seeds that must be contained.
    pub min_seed_fraction: f64,
    /// Median baseline peak below which the scenario is not a saturating outbreak.
    pub min_baseline_peak: f64,
}

impl Default for ContainmentCriterion {
    fn default() -> Self {
        ContainmentCriterion {
            max_median_ratio: 0.5,
            max_seed_ratio: 0.7,
            min_seed_fraction: 0.8,
            min_baseline_peak: 0.95,
        }
    }
}

/// Outcome of one arm of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    /// Highest per-step infected fraction over all worm antigens.
    pub peak_infected_fraction: f64,
    pub final_infected_fraction: f64,
    pub ever_infected_fraction: f64,
    pub false_positive_strong: u64,
    pub messages: u64,
}

impl ArmResult {
    fn from_series(series: &MetricsSeries) -> Self {
        let summary = series.summary();
        let max = |f: fn(&crate::metrics::WormSummary) -> f64| {
            summary.worms.values().map(f).fold(0.0, f64::max)
        };
        ArmResult {
            peak_infected_fraction: max(|w| w.peak_infected_fraction),
            final_infected_fraction: max(|w| w.final_infected_fraction),
            ever_infected_fraction: max(|w| w.ever_infected_fraction),
            false_positive_strong: summary.total_false_positive_strong,
            messages: summary.total_messages,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedComparison {
    pub seed: u64,
    pub defended: ArmResult,
    pub baseline: ArmResult,
    /// Defended peak over baseline peak; absent when the baseline never infected anyone.
    pub peak_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NoOutbreak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub criterion: ContainmentCriterion,
    pub seeds: Vec<SeedComparison>,
    pub median_defended_peak: f64,
    pub median_baseline_peak: f64,
    pub median_defended_final: f64,
    pub median_baseline_final: f64,
    pub median_false_positive_strong: f64,
    pub seeds_contained: usize,
    pub verdict: Verdict,
    /// Human-readable reasons for a failing verdict.
    pub failures: Vec<String>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Median of `values`; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Runs every seed with the defense enabled and disabled.
pub fn compare_runs(
    config: &RunConfig,
    seeds: &[u64],
    criterion: ContainmentCriterion,
) -> Result<ComparisonReport> {
    config.validate()?;
    let mut defended = config.clone();
    defended.cardinal_enabled = true;
    let mut baseline = config.clone();
    baseline.cardinal_enabled = false;

    let jobs: Vec<(u64, bool)> = seeds
        .iter()
        .flat_map(|&s| [(s, true), (s, false)])
        .collect();
    let results: Vec<ArmResult> = jobs
        .par_iter()
        .map(|&(seed, on)| {
            let cfg = if on { &defended } else { &baseline };
            run_with(cfg, seed, cfg.horizon, EvalMode::Sequential, |_, _| {})
                .map(|s| ArmResult::from_series(&s))
        })
        .collect::<Result<_>>()?;

    let per_seed: Vec<SeedComparison> = seeds
        .iter()
        .zip(results.chunks(2))
        .map(|(&seed, pair)| {
            let (defended, baseline) = (pair[0].clone(), pair[1].clone());
            let peak_ratio = (baseline.peak_infected_fraction > 0.0)
                .then(|| defended.peak_infected_fraction / baseline.peak_infected_fraction);
            SeedComparison {
                seed,
                defended,
                baseline,
                peak_ratio,
            }
        })
        .collect();
    Ok(summarize(per_seed, criterion))
}

fn summarize(seeds: Vec<SeedComparison>, criterion: ContainmentCriterion) -> ComparisonReport {
    let column = |f: &dyn Fn(&SeedComparison) -> f64| seeds.iter().map(f).collect::<Vec<_>>();
    let median_defended_peak = median(&column(&|s| s.defended.peak_infected_fraction));
    let median_baseline_peak = median(&column(&|s| s.baseline.peak_infected_fraction));
    let median_defended_final = median(&column(&|s| s.defended.final_infected_fraction));
    let median_baseline_final = median(&column(&|s| s.baseline.final_infected_fraction));
    let median_false_positive_strong =
        median(&column(&|s| s.defended.false_positive_strong as f64));
    let seeds_contained = seeds
        .iter()
        .filter(|s| s.peak_ratio.is_some_and(|r| r <= criterion.max_seed_ratio))
        .count();

    let mut failures = Vec::new();
    let verdict = if median_baseline_peak == 0.0 {
        Verdict::NoOutbreak
    } else {
        if median_baseline_peak < criterion.min_baseline_peak {
            failures.push(format!(
                "median baseline peak {median_baseline_peak:.3} below {}",
                criterion.min_baseline_peak
            ));
        }
        let bound = criterion.max_median_ratio * median_baseline_peak;
        if median_defended_peak > bound {
            failures.push(format!(
                "median defended peak {median_defended_peak:.3} exceeds {bound:.3}"
            ));
        }
        let needed = (criterion.min_seed_fraction * seeds.len() as f64).ceil() as usize;
        if seeds_contained < needed {
            failures.push(format!(
                "{seeds_contained} of {} seeds within ratio {}, need {needed}",
                seeds.len(),
                criterion.max_seed_ratio
            ));
        }
        if failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    };

    ComparisonReport {
        criterion,
        seeds,
        median_defended_peak,
        median_baseline_peak,
        median_defended_final,
        median_baseline_final,
        median_false_positive_strong,
        seeds_contained,
        verdict,
        failures,
    }
}
