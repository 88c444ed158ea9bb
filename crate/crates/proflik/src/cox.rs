//! Cox proportional-hazards profile (partial) likelihood.
//!
//! For sorted data with events at times t_1 <= ... <= t_l, the log-profile
//! likelihood is
//!
//! ```text
//! log pl(theta) = sum_i [ theta * z_(i) - log sum_{j in R_i} exp(theta * z_j) ]
//! ```
//!
//! with risk sets R_i = { j : Y_j >= t_i }. Risk-set sums are accumulated in
//! a single reverse pass over the sorted sample, so one evaluation costs
//! O(n) after the O(n log n) sort done at construction. Exponentials are
//! stabilized by subtracting max_j theta*z_j before exponentiation.
//!
//! Tied event times share the risk set, and the baseline cumulative-hazard
//! estimator puts one merged jump at each distinct event time.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::step::StepFunction;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_SCORE_TOL: f64 = 1e-10;
const NEWTON_DIVERGENCE_BOUND: f64 = 50.0;
const FLAT_CURVATURE_TOL: f64 = 1e-12;

/// Precomputed evaluation structure for the Cox profile likelihood.
#[derive(Debug, Clone)]
pub struct CoxProfile {
    data: Dataset,
    times: Vec<f64>,
    z: Vec<f64>,
    /// For each event, its position in the sorted sample and the first index
    /// of its risk set (the first subject with the same follow-up time).
    events: Vec<(usize, usize)>,
    z_min: f64,
    z_max: f64,
}

impl CoxProfile {
    /// Sorts the data if needed and indexes risk sets. Requires at least one
    /// event.
    pub fn new(data: Dataset) -> Result<Self> {
        let data = if data.is_sorted_by_time() {
            data
        } else {
            data.sort_by_time()
        };
        let n = data.len();
        let mut times = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        let mut events = Vec::new();
        let mut group_start = 0usize;
        for (i, o) in data.observations().iter().enumerate() {
            if i > 0 && o.time() != times[i - 1] {
                group_start = i;
            }
            times.push(o.time());
            z.push(o.covariate());
            if o.event() {
                events.push((i, group_start));
            }
        }
        if events.is_empty() {
            return Err(Error::InvalidData(
                "dataset has no events; fitting requires at least one".into(),
            ));
        }
        let z_min = z.iter().copied().fold(f64::INFINITY, f64::min);
        let z_max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            data,
            times,
            z,
            events,
            z_min,
            z_max,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    /// Log-likelihood, score, and curvature in one reverse sweep.
    fn evaluate(&self, theta: f64) -> (f64, f64, f64) {
        // max_j theta*z_j, so every exponent is <= 0
        let shift = if theta >= 0.0 {
            theta * self.z_max
        } else {
            theta * self.z_min
        };
        let n = self.times.len();
        let (mut s0, mut s1, mut s2) = (0.0f64, 0.0f64, 0.0f64);
        let (mut loglik, mut score, mut curvature) = (0.0f64, 0.0f64, 0.0f64);
        let mut k = n;
        for &(pos, risk_start) in self.events.iter().rev() {
            while k > risk_start {
                k -= 1;
                let zk = self.z[k];
                let w = (theta * zk - shift).exp();
                s0 += w;
                s1 += zk * w;
                s2 += zk * zk * w;
            }
            let zi = self.z[pos];
            let m1 = s1 / s0;
            loglik += theta * zi - (s0.ln() + shift);
            score += zi - m1;
            curvature -= s2 / s0 - m1 * m1;
        }
        (loglik, score, curvature)
    }

    /// Log-profile likelihood at `theta`. Finite for every finite `theta`.
    pub fn log_profile_lik(&self, theta: f64) -> f64 {
        self.evaluate(theta).0
    }

    /// First and second derivatives of the log-profile likelihood.
    /// The curvature is nonpositive everywhere and strictly negative as soon
    /// as some risk set contains covariate variation.
    pub fn score_and_curvature(&self, theta: f64) -> (f64, f64) {
        let (_, score, curvature) = self.evaluate(theta);
        (score, curvature)
    }

    /// Newton maximization from theta = 0 with step halving; a step is only
    /// accepted if it increases the log-likelihood. Concavity makes this
    /// globally convergent whenever a finite maximizer exists.
    ///
    /// Fails with [`Error::ConstantLikelihood`] when no risk set has
    /// covariate variation, and with [`Error::MonotoneLikelihood`] when the
    /// iterates pass |theta| = 50 (the supremum sits at infinity).
    pub fn mle(&self) -> Result<f64> {
        let mut theta = 0.0f64;
        let (mut ll, mut score, mut curvature) = self.evaluate(theta);
        if curvature > -FLAT_CURVATURE_TOL && score.abs() < 1e-9 {
            return Err(Error::ConstantLikelihood);
        }
        // globalized phase: accept a step only if the log-likelihood rises
        for _ in 0..NEWTON_MAX_ITER {
            if score.abs() < NEWTON_SCORE_TOL {
                return Ok(theta);
            }
            let step = if curvature < 0.0 {
                -score / curvature
            } else {
                // numerically flat curvature with nonzero score: walk uphill
                score.signum()
            };
            let mut lambda = 1.0f64;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = theta + lambda * step;
                let (cand_ll, cand_score, cand_curv) = self.evaluate(cand);
                if cand_ll > ll {
                    theta = cand;
                    ll = cand_ll;
                    score = cand_score;
                    curvature = cand_curv;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                // the likelihood is flat at floating-point resolution
                break;
            }
            if theta.abs() > NEWTON_DIVERGENCE_BOUND {
                return Err(Error::MonotoneLikelihood);
            }
        }
        // polish phase: raw Newton on the score, which stays precise after
        // value comparisons have hit the noise floor; concavity keeps each
        // step a contraction here
        for _ in 0..20 {
            if score.abs() < NEWTON_SCORE_TOL || curvature >= 0.0 {
                break;
            }
            let cand = theta - score / curvature;
            let (_, cand_score, cand_curv) = self.evaluate(cand);
            if !cand_score.is_finite() || cand_score.abs() >= score.abs() {
                break;
            }
            theta = cand;
            score = cand_score;
            curvature = cand_curv;
            if theta.abs() > NEWTON_DIVERGENCE_BOUND {
                return Err(Error::MonotoneLikelihood);
            }
        }
        if score.abs() < 1e-8 {
            Ok(theta)
        } else {
            Err(Error::NoConvergence(format!(
                "Newton stalled at theta={theta} with score {score:e}"
            )))
        }
    }

    /// Baseline cumulative-hazard estimator at fixed `theta`: one jump per
    /// distinct event time of size (events at t) / sum_{j in R} exp(theta z_j).
    pub fn breslow(&self, theta: f64) -> StepFunction {
        let shift = if theta >= 0.0 {
            theta * self.z_max
        } else {
            theta * self.z_min
        };
        let n = self.times.len();
        let mut s0 = 0.0f64;
        let mut k = n;
        // per-event jumps, built in reverse time order
        let mut rev: Vec<(f64, f64)> = Vec::with_capacity(self.events.len());
        for &(pos, risk_start) in self.events.iter().rev() {
            while k > risk_start {
                k -= 1;
                s0 += (theta * self.z[k] - shift).exp();
            }
            rev.push((self.times[pos], (-shift).exp() / s0));
        }
        let mut jump_times = Vec::new();
        let mut jump_sizes: Vec<f64> = Vec::new();
        for &(t, size) in rev.iter().rev() {
            if jump_times.last() == Some(&t) {
                *jump_sizes.last_mut().unwrap() += size;
            } else {
                jump_times.push(t);
                jump_sizes.push(size);
            }
        }
        StepFunction::new(jump_times, jump_sizes)
            .expect("event times ascending and risk sums positive")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Observation;

    fn dataset(rows: &[(f64, bool, f64)]) -> Dataset {
        Dataset::new(
            rows.iter()
                .map(|&(t, e, z)| Observation::new(t, e, z).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn loglik_at_zero_counts_risk_sets() {
        // three events at distinct times: risk sets of sizes 3, 2, 1
        let p = CoxProfile::new(dataset(&[
            (1.0, true, 0.5),
            (2.0, true, -0.3),
            (3.0, true, 1.2),
        ]))
        .unwrap();
        let expect = -(3.0f64.ln() + 2.0f64.ln() + 1.0f64.ln());
        assert!((p.log_profile_lik(0.0) - expect).abs() < 1e-12);
        assert!((expect + 1.791759469228055).abs() < 1e-12);
    }

    #[test]
    fn single_event_singleton_risk_set_is_zero() {
        let p = CoxProfile::new(dataset(&[(1.0, true, 0.7)])).unwrap();
        for theta in [-3.0, 0.0, 1.5, 10.0] {
            assert_eq!(p.log_profile_lik(theta), 0.0);
        }
    }

    #[test]
    fn constant_covariate_has_zero_score_and_curvature() {
        let p = CoxProfile::new(dataset(&[
            (1.0, true, 2.0),
            (2.0, false, 2.0),
            (3.0, true, 2.0),
        ]))
        .unwrap();
        for theta in [-1.0, 0.0, 0.5, 4.0] {
            let (s, c) = p.score_and_curvature(theta);
            assert!(s.abs() < 1e-12, "score {s} at theta={theta}");
            assert!(c.abs() < 1e-12, "curvature {c} at theta={theta}");
        }
        assert!(matches!(p.mle(), Err(Error::ConstantLikelihood)));
    }

    #[test]
    fn no_events_is_rejected() {
        assert!(CoxProfile::new(dataset(&[(1.0, false, 0.5), (2.0, false, 0.1)])).is_err());
    }

    #[test]
    fn censored_subject_at_tied_time_stays_in_risk_set() {
        // event and censoring both at t=2: risk set of the t=2 event has
        // size 2, so the theta=0 log-likelihood is -log 3 - log 2
        let p = CoxProfile::new(dataset(&[
            (1.0, true, 0.1),
            (2.0, false, 0.2),
            (2.0, true, 0.3),
        ]))
        .unwrap();
        let expect = -(3.0f64.ln() + 2.0f64.ln());
        assert!((p.log_profile_lik(0.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn breslow_at_zero_is_reciprocal_risk_set_sizes() {
        let p = CoxProfile::new(dataset(&[
            (1.0, true, 0.5),
            (2.0, true, -0.3),
            (3.0, true, 1.2),
        ]))
        .unwrap();
        let f = p.breslow(0.0);
        assert_eq!(f.value(0.5), 0.0);
        assert!((f.value(1.0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((f.value(2.0) - (1.0 / 3.0 + 1.0 / 2.0)).abs() < 1e-12);
        assert!((f.value(3.0) - (1.0 / 3.0 + 1.0 / 2.0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn breslow_merges_tied_event_times() {
        let p = CoxProfile::new(dataset(&[
            (1.0, true, 0.0),
            (1.0, true, 0.0),
            (2.0, false, 0.0),
        ]))
        .unwrap();
        let f = p.breslow(0.0);
        assert_eq!(f.jump_times(), &[1.0]);
        // two events, shared risk set of size 3
        assert!((f.jump_sizes()[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mle_translation_invariant() {
        let base = &[
            (0.4, true, 0.9),
            (0.9, false, 0.2),
            (1.3, true, -0.4),
            (2.2, true, 0.5),
            (2.9, false, 1.1),
            (3.5, true, 0.3),
        ];
        let p0 = CoxProfile::new(dataset(base)).unwrap();
        let shifted: Vec<(f64, bool, f64)> =
            base.iter().map(|&(t, e, z)| (t, e, z + 3.0)).collect();
        let p1 = CoxProfile::new(dataset(&shifted)).unwrap();
        let m0 = p0.mle().unwrap();
        let m1 = p1.mle().unwrap();
        assert!((m0 - m1).abs() < 1e-10, "{m0} vs {m1}");
    }

    #[test]
    fn mle_satisfies_score_tolerance() {
        let p = CoxProfile::new(dataset(&[
            (0.1, true, 0.2),
            (0.5, true, 0.9),
            (0.7, false, 0.4),
            (1.1, true, 0.6),
            (1.8, false, 0.05),
            (2.0, true, 0.35),
        ]))
        .unwrap();
        let theta = p.mle().unwrap();
        let (score, curv) = p.score_and_curvature(theta);
        assert!(score.abs() < 1e-8);
        assert!(curv < 0.0);
    }

    #[test]
    fn monotone_likelihood_is_detected() {
        // the largest covariate always fails first: likelihood increases in
        // theta without a finite maximizer
        let p = CoxProfile::new(dataset(&[
            (1.0, true, 0.03),
            (2.0, true, 0.02),
            (3.0, true, 0.01),
            (4.0, false, 0.0),
        ]))
        .unwrap();
        assert!(matches!(p.mle(), Err(Error::MonotoneLikelihood)));
    }
}
