//! Derived metrics over benchmark records.
//!
//! `T(kind, p)` is the best time of any record of that policy kind at `p`
//! threads, taken over the kind's whole parameter grid. All functions only
//! take minima and maxima, so record order never matters.

use crate::config::App;
use crate::run::BenchRecord;
use loomsched::PolicyKind;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("no guided run at 1 thread for {app} on `{input}`")]
    MissingBaseline { app: App, input: String },
    #[error("no {kind} run at {threads} threads for {app} on `{input}`")]
    MissingCell { app: App, input: String, kind: PolicyKind, threads: usize },
    #[error("need at least two iCh configurations, found {found}")]
    TooFewEpsilons { found: usize },
}

fn matching<'a>(
    records: &'a [BenchRecord],
    app: App,
    input: &'a str,
    kind: PolicyKind,
    p: usize,
) -> impl Iterator<Item = &'a BenchRecord> + 'a {
    records
        .iter()
        .filter(move |r| r.app == app && r.input == input && r.threads == p && r.kind() == Some(kind))
}

/// Best time over every configuration of `kind` at `p` threads.
pub fn best_time(records: &[BenchRecord], app: App, input: &str, kind: PolicyKind, p: usize) -> Option<f64> {
    matching(records, app, input, kind, p)
        .map(BenchRecord::best_time)
        .reduce(f64::min)
}

/// `T(guided, 1) / T(kind, p)`.
pub fn speedup(
    records: &[BenchRecord],
    app: App,
    input: &str,
    kind: PolicyKind,
    p: usize,
) -> Result<f64, MetricError> {
    let base = best_time(records, app, input, PolicyKind::Guided, 1)
        .ok_or_else(|| MetricError::MissingBaseline { app, input: input.to_string() })?;
    let t = best_time(records, app, input, kind, p).ok_or_else(|| MetricError::MissingCell {
        app,
        input: input.to_string(),
        kind,
        threads: p,
    })?;
    Ok(base / t)
}

/// Best time of each iCh configuration at `p`, keyed by parameter string.
fn ich_times(records: &[BenchRecord], app: App, input: &str, p: usize) -> BTreeMap<String, f64> {
    let mut by_param: BTreeMap<String, f64> = BTreeMap::new();
    for r in matching(records, app, input, PolicyKind::Ich, p) {
        let t = r.best_time();
        by_param
            .entry(r.param.clone())
            .and_modify(|b| *b = b.min(t))
            .or_insert(t);
    }
    by_param
}

/// Worst over best iCh time across its ε configurations.
pub fn epsilon_sensitivity(records: &[BenchRecord], app: App, input: &str, p: usize) -> Result<f64, MetricError> {
    let times = ich_times(records, app, input, p);
    if times.len() < 2 {
        return Err(MetricError::TooFewEpsilons { found: times.len() });
    }
    let worst = times.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let best = times.values().copied().fold(f64::INFINITY, f64::min);
    Ok(worst / best)
}

/// Worst-ε iCh time over the best stealing time.
pub fn worst_stealing(records: &[BenchRecord], app: App, input: &str, p: usize) -> Result<f64, MetricError> {
    let missing = |kind| MetricError::MissingCell { app, input: input.to_string(), kind, threads: p };
    let worst = ich_times(records, app, input, p)
        .into_values()
        .reduce(f64::max)
        .ok_or_else(|| missing(PolicyKind::Ich))?;
    let best = best_time(records, app, input, PolicyKind::Stealing, p).ok_or_else(|| missing(PolicyKind::Stealing))?;
    Ok(worst / best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(policy: &str, param: &str, threads: usize, t: f64) -> BenchRecord {
        BenchRecord {
            app: App::Synth,
            input: "in".into(),
            policy: policy.into(),
            param: param.into(),
            threads,
            times: vec![t * 1.5, t, t * 2.0],
            verified: true,
        }
    }

    #[test]
    fn speedup_examples() {
        let rs = vec![rec("guided", "1", 1, 100.0), rec("guided", "2", 1, 120.0), rec("ich", "0.25", 4, 25.0)];
        assert_eq!(speedup(&rs, App::Synth, "in", PolicyKind::Ich, 4).unwrap(), 4.0);
        assert_eq!(speedup(&rs, App::Synth, "in", PolicyKind::Guided, 1).unwrap(), 1.0);
        let slow = vec![rec("guided", "1", 1, 10.0), rec("static", "", 2, 20.0)];
        assert_eq!(speedup(&slow, App::Synth, "in", PolicyKind::Static, 2).unwrap(), 0.5);
        assert!(matches!(
            speedup(&rs[2..], App::Synth, "in", PolicyKind::Ich, 4),
            Err(MetricError::MissingBaseline { .. })
        ));
    }

    #[test]
    fn sensitivity_examples() {
        let rs = vec![rec("ich", "0.25", 8, 10.0), rec("ich", "0.33", 8, 11.0), rec("ich", "0.5", 8, 12.8)];
        assert_eq!(epsilon_sensitivity(&rs, App::Synth, "in", 8).unwrap(), 12.8 / 10.0);
        let tie = vec![rec("ich", "0.25", 8, 3.0), rec("ich", "0.5", 8, 3.0)];
        assert_eq!(epsilon_sensitivity(&tie, App::Synth, "in", 8).unwrap(), 1.0);
        assert_eq!(
            epsilon_sensitivity(&rs[..1], App::Synth, "in", 8),
            Err(MetricError::TooFewEpsilons { found: 1 })
        );
    }

    #[test]
    fn worst_stealing_examples() {
        let rs = vec![rec("ich", "0.25", 2, 14.0), rec("ich", "0.5", 2, 9.0), rec("stealing", "64", 2, 10.0), rec("stealing", "1", 2, 11.0)];
        assert_eq!(worst_stealing(&rs, App::Synth, "in", 2).unwrap(), 1.4);
        assert!(worst_stealing(&rs[..2], App::Synth, "in", 2).is_err());
    }
}
