//! Shared test oracles: direct, unoptimized evaluations of the model
//! formulas, independent of the library's computation paths.

#![allow(dead_code)]

use proflik::{Dataset, Observation};

pub fn dataset(rows: &[(f64, bool, f64)]) -> Dataset {
    Dataset::new(
        rows.iter()
            .map(|&(t, e, z)| Observation::new(t, e, z).unwrap())
            .collect(),
    )
    .unwrap()
}

pub fn rows_of(d: &Dataset) -> Vec<(f64, bool, f64)> {
    d.observations()
        .iter()
        .map(|o| (o.time(), o.event(), o.covariate()))
        .collect()
}

/// Term-by-term log partial likelihood: for every event, scan the whole
/// sample for its risk set and sum exponentials directly. O(n^2).
pub fn direct_cox_loglik(rows: &[(f64, bool, f64)], theta: f64) -> f64 {
    let mut total = 0.0f64;
    for &(t_i, event, z_i) in rows {
        if !event {
            continue;
        }
        let risk_sum: f64 = rows
            .iter()
            .filter(|&&(t_j, _, _)| t_j >= t_i)
            .map(|&(_, _, z_j)| (theta * z_j).exp())
            .sum();
        total += theta * z_i - risk_sum.ln();
    }
    total
}

/// Direct baseline cumulative-hazard jumps, merged over distinct event
/// times: at each event, 1 / sum_{Y_j >= t} exp(theta z_j).
pub fn direct_breslow(rows: &[(f64, bool, f64)], theta: f64) -> Vec<(f64, f64)> {
    let mut event_times: Vec<f64> = rows
        .iter()
        .filter(|r| r.1)
        .map(|r| r.0)
        .collect();
    event_times.sort_by(f64::total_cmp);
    event_times.dedup();
    event_times
        .into_iter()
        .map(|t| {
            let risk_sum: f64 = rows
                .iter()
                .filter(|&&(t_j, _, _)| t_j >= t)
                .map(|&(_, _, z_j)| (theta * z_j).exp())
                .sum();
            let events_at_t = rows.iter().filter(|r| r.1 && r.0 == t).count() as f64;
            (t, events_at_t / risk_sum)
        })
        .collect()
}

/// Direct substitution into the proportional-odds likelihood for a step
/// function with the given jumps.
pub fn direct_po_loglik(
    rows: &[(f64, bool, f64)],
    jump_times: &[f64],
    jump_sizes: &[f64],
    theta: f64,
) -> f64 {
    let eta_at = |y: f64| -> f64 {
        jump_times
            .iter()
            .zip(jump_sizes)
            .filter(|(&t, _)| t <= y)
            .map(|(_, &s)| s)
            .sum()
    };
    let eta_before = |y: f64| -> f64 {
        jump_times
            .iter()
            .zip(jump_sizes)
            .filter(|(&t, _)| t < y)
            .map(|(_, &s)| s)
            .sum()
    };
    let mut total = 0.0f64;
    for &(y, event, z) in rows {
        let a = (-z * theta).exp();
        if event {
            let k = jump_times
                .iter()
                .position(|&t| t == y)
                .expect("event time must be a jump time");
            total += (a * jump_sizes[k] / ((eta_at(y) + a) * (eta_before(y) + a))).ln();
        } else {
            total += (a / (eta_at(y) + a)).ln();
        }
    }
    total
}

/// Two-sided Kolmogorov-Smirnov distance between a sample and a continuous
/// CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}
