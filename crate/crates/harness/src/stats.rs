use serde::{Deserialize, Serialize};

use crate::config::Algorithm;
use crate::error::{HarnessError, Result};
use crate::run::{RunRecord, SpecEcho};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); 0 for a single value.
    pub sd: f64,
    pub se: f64,
}

pub fn final_stats(values: &[f64]) -> Result<FinalStats> {
    if values.is_empty() {
        return Err(HarnessError::Records("no records to summarize".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(FinalStats {
        n,
        mean,
        sd,
        se: sd / (n as f64).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LllSummary {
    /// Mean regret of task `m` (index 0 = first task).
    pub mean_task_regret: Vec<f64>,
    /// Mean over seeds of the average regret of tasks `1..=m`.
    pub running_mean_task_regret: Vec<f64>,
    pub mean_tau_final: f64,
    pub max_tau_final: usize,
    pub mean_sample_total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub spec: SpecEcho,
    pub final_regret: FinalStats,
    pub finals: Vec<f64>,
    /// `(t, mean cumulative regret)` on the shared trace grid.
    pub mean_curve: Vec<(u64, f64)>,
    pub lll: Option<LllSummary>,
}

/// Statistics over runs of a single algorithm and configuration.
pub fn summarize(records: &[RunRecord]) -> Result<AlgorithmSummary> {
    let first = records
        .first()
        .ok_or_else(|| HarnessError::Records("no records to summarize".into()))?;
    if records.iter().any(|r| r.algorithm != first.algorithm || r.spec != first.spec) {
        return Err(HarnessError::Records("summarize needs records from one configuration".into()));
    }
    let finals: Vec<f64> = records.iter().map(|r| r.final_regret).collect();
    let n = records.len() as f64;

    let grid: Vec<u64> = first.trace.iter().map(|p| p.t).collect();
    let mean_curve = if records.iter().all(|r| r.trace.iter().map(|p| p.t).eq(grid.iter().copied())) {
        grid.iter()
            .enumerate()
            .map(|(i, &t)| (t, records.iter().map(|r| r.trace[i].cum_regret).sum::<f64>() / n))
            .collect()
    } else {
        // Pure-exploration LLL runs stop at different pull counts.
        Vec::new()
    };

    let lll = if first.lll.is_some() {
        let extras: Vec<_> = records
            .iter()
            .map(|r| r.lll.as_ref().ok_or_else(|| HarnessError::Records("missing per-task rows".into())))
            .collect::<Result<_>>()?;
        let tasks = first.spec.tasks;
        if extras.iter().any(|e| e.tasks.len() != tasks) {
            return Err(HarnessError::Records("per-task rows do not cover every task".into()));
        }
        let mean_task_regret: Vec<f64> = (0..tasks)
            .map(|m| extras.iter().map(|e| e.tasks[m].task_regret).sum::<f64>() / n)
            .collect();
        let mut acc = 0.0;
        let running_mean_task_regret = mean_task_regret
            .iter()
            .enumerate()
            .map(|(m, r)| {
                acc += r;
                acc / (m + 1) as f64
            })
            .collect();
        Some(LllSummary {
            mean_task_regret,
            running_mean_task_regret,
            mean_tau_final: extras.iter().map(|e| e.tau_final as f64).sum::<f64>() / n,
            max_tau_final: extras.iter().map(|e| e.tau_final).max().unwrap_or(0),
            mean_sample_total: extras.iter().map(|e| e.sample_total as f64).sum::<f64>() / n,
        })
    } else {
        None
    };

    Ok(AlgorithmSummary {
        algorithm: first.algorithm,
        spec: first.spec,
        final_regret: final_stats(&finals)?,
        finals,
        mean_curve,
        lll,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDifference {
    pub a: Algorithm,
    pub b: Algorithm,
    /// `mean(a) − mean(b)` of final regret.
    pub difference: f64,
    /// `sqrt(se_a² + se_b²)`.
    pub pooled_se: f64,
    /// `difference / pooled_se`, absent when the pooled SE is zero.
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub summaries: Vec<AlgorithmSummary>,
    pub pairs: Vec<PairwiseDifference>,
}

impl Comparison {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }

    pub fn pair(&self, a: Algorithm, b: Algorithm) -> Option<&PairwiseDifference> {
        self.pairs.iter().find(|p| p.a == a && p.b == b)
    }
}

/// Groups by algorithm (first-appearance order) and compares every pair.
/// All groups must share the instance spec and seed schedule.
pub fn compare(records: &[RunRecord]) -> Result<Comparison> {
    let mut order: Vec<Algorithm> = Vec::new();
    for r in records {
        if !order.contains(&r.algorithm) {
            order.push(r.algorithm);
        }
    }
    let groups: Vec<Vec<RunRecord>> = order
        .iter()
        .map(|&a| records.iter().filter(|r| r.algorithm == a).cloned().collect())
        .collect();
    let reference = groups
        .first()
        .ok_or_else(|| HarnessError::Records("no records to compare".into()))?;
    let seeds = |g: &[RunRecord]| g.iter().map(|r| (r.seed_index, r.seed)).collect::<Vec<_>>();
    for g in &groups {
        if g[0].spec != reference[0].spec || g.iter().any(|r| r.spec != g[0].spec) {
            return Err(HarnessError::Records("compared runs use different instance specs".into()));
        }
        if seeds(g) != seeds(reference) {
            return Err(HarnessError::Records("compared runs use different seed schedules".into()));
        }
    }
    let summaries: Vec<AlgorithmSummary> = groups.iter().map(|g| summarize(g)).collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for (i, sa) in summaries.iter().enumerate() {
        for sb in &summaries[i + 1..] {
            let difference = sa.final_regret.mean - sb.final_regret.mean;
            let pooled_se = (sa.final_regret.se.powi(2) + sb.final_regret.se.powi(2)).sqrt();
            pairs.push(PairwiseDifference {
                a: sa.algorithm,
                b: sb.algorithm,
                difference,
                pooled_se,
                z: (pooled_se > 0.0).then(|| difference / pooled_se),
            });
        }
    }
    Ok(Comparison { summaries, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::TraceRow;

    fn record(algorithm: Algorithm, seed_index: usize, finals: &[f64]) -> RunRecord {
        RunRecord {
            algorithm,
            spec: SpecEcho {
                d: 2,
                k: 1,
                tasks: 1,
                horizon: 10,
                noise_std: 1.0,
            },
            seed_index,
            seed: seed_index as u64,
            final_regret: *finals.last().unwrap(),
            trace: finals
                .iter()
                .enumerate()
                .map(|(i, &c)| TraceRow {
                    t: 5 * (i as u64 + 1),
                    cum_regret: c,
                })
                .collect(),
            lll: None,
            wall_seconds: 0.0,
        }
    }

    #[test]
    fn stats_examples() {
        let s = final_stats(&[100.0, 300.0]).unwrap();
        assert_eq!(s.mean, 200.0);
        assert!((s.sd - 141.421_356_237_309_5).abs() < 1e-9);
        assert!((s.se - 100.0).abs() < 1e-9);
        let one = final_stats(&[7.0]).unwrap();
        assert_eq!((one.mean, one.sd, one.se), (7.0, 0.0, 0.0));
        assert!(final_stats(&[]).is_err());
    }

    #[test]
    fn mean_curve_is_pointwise_average() {
        let rs = [
            record(Algorithm::Mtrl, 0, &[1.0, 3.0]),
            record(Algorithm::Mtrl, 1, &[2.0, 2.5]),
        ];
        let s = summarize(&rs).unwrap();
        assert_eq!(s.mean_curve, vec![(5, 1.5), (10, 2.75)]);
        assert!(s.mean_curve.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(summarize(&[]).is_err());
        assert!(summarize(&[rs[0].clone(), record(Algorithm::Lll, 0, &[1.0])]).is_err());
    }

    #[test]
    fn self_comparison_has_zero_difference() {
        let mut rs = vec![record(Algorithm::Mtrl, 0, &[1.0, 4.0]), record(Algorithm::Mtrl, 1, &[1.0, 6.0])];
        rs.extend(rs.clone().into_iter().map(|mut r| {
            r.algorithm = Algorithm::E2tc;
            r
        }));
        let c = compare(&rs).unwrap();
        let p = c.pair(Algorithm::Mtrl, Algorithm::E2tc).unwrap();
        assert_eq!(p.difference, 0.0);
        assert!((p.pooled_se - 2.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.z, Some(0.0));
    }

    #[test]
    fn mismatched_specs_are_rejected() {
        let a = record(Algorithm::Mtrl, 0, &[1.0]);
        let mut b = record(Algorithm::E2tc, 0, &[1.0]);
        b.spec.d = 3;
        assert!(compare(&[a.clone(), b]).is_err());
        let c = record(Algorithm::E2tc, 1, &[1.0]);
        assert!(compare(&[a, c]).is_err());
    }
}
