//! Proportional-odds profile likelihood.
//!
//! The odds function `eta` is a nondecreasing step function with one jump
//! per distinct event time (tied events merge into one jump). For an
//! observation `(y, d, z)` with `a = exp(-z theta)` the log-likelihood
//! contribution is
//!
//! ```text
//! d = 1:  log a + log eta{y} - log(eta(y) + a) - log(eta(y-) + a)
//! d = 0:  log a - log(eta(y) + a)
//! ```
//!
//! The profile value at a fixed `theta` maximizes this over the jump sizes.
//! The inner problem is parameterized in log-jumps, which enforces
//! positivity without constraints, and is solved by BFGS ascent with
//! backtracking. Jump sizes passing `exp(30)` are reported as a degenerate
//! maximizer: that happens when nothing is left at risk after the last
//! event, so the supremum sits on the boundary.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::step::StepFunction;

const DEGENERACY_LOG_JUMP: f64 = 30.0;
const OUTER_BRACKET_LO: f64 = -10.0;
const OUTER_BRACKET_HI: f64 = 10.0;
const OUTER_DERIV_TOL: f64 = 1e-6;
const OUTER_DERIV_STEP: f64 = 1e-4;

/// Proportional-odds model over a sorted dataset.
///
/// A finite inner maximizer needs at least one censored observation at or
/// after the last event time; without one, `profile_inner` reports a
/// degenerate maximizer.
#[derive(Debug, Clone)]
pub struct PoProfile {
    data: Dataset,
    /// Distinct event times, ascending.
    event_times: Vec<f64>,
    /// Events per distinct event time.
    multiplicities: Vec<f64>,
    /// Per observation: number of event times <= y (so eta(y) = prefix[leq]).
    idx_leq: Vec<usize>,
    /// Per observation: number of event times < y (so eta(y-) = prefix[lt]).
    idx_lt: Vec<usize>,
    z: Vec<f64>,
    event: Vec<bool>,
    /// A finite inner maximizer requires a censored observation at or after
    /// the last event time; otherwise the last jump's likelihood
    /// contribution increases without bound.
    censoring_after_last_event: bool,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl PoProfile {
    pub fn new(data: Dataset) -> Result<Self> {
        let data = if data.is_sorted_by_time() {
            data
        } else {
            data.sort_by_time()
        };
        let mut event_times: Vec<f64> = Vec::new();
        let mut multiplicities: Vec<f64> = Vec::new();
        for o in data.observations() {
            if o.event() {
                if event_times.last() == Some(&o.time()) {
                    *multiplicities.last_mut().unwrap() += 1.0;
                } else {
                    event_times.push(o.time());
                    multiplicities.push(1.0);
                }
            }
        }
        if event_times.is_empty() {
            return Err(Error::InvalidData(
                "dataset has no events; fitting requires at least one".into(),
            ));
        }
        let mut idx_leq = Vec::with_capacity(data.len());
        let mut idx_lt = Vec::with_capacity(data.len());
        let mut z = Vec::with_capacity(data.len());
        let mut event = Vec::with_capacity(data.len());
        let last_event_time = *event_times.last().unwrap();
        let mut censoring_after_last_event = false;
        for o in data.observations() {
            let y = o.time();
            idx_leq.push(event_times.partition_point(|&t| t <= y));
            idx_lt.push(event_times.partition_point(|&t| t < y));
            z.push(o.covariate());
            event.push(o.event());
            if !o.event() && y >= last_event_time {
                censoring_after_last_event = true;
            }
        }
        Ok(Self {
            data,
            event_times,
            multiplicities,
            idx_leq,
            idx_lt,
            z,
            event,
            censoring_after_last_event,
            inner_tol: 1e-8,
            inner_max_iter: 500,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// Distinct event times carrying the jumps.
    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    /// Log-likelihood at `theta` for the given jump sizes (one per distinct
    /// event time, all strictly positive).
    pub fn log_lik(&self, theta: f64, jumps: &[f64]) -> Result<f64> {
        if jumps.len() != self.event_times.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} jumps, got {}",
                self.event_times.len(),
                jumps.len()
            )));
        }
        if jumps.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidConfig("nonpositive jump".into()));
        }
        let log_jumps: Vec<f64> = jumps.iter().map(|s| s.ln()).collect();
        Ok(self.value_in_log_jumps(theta, &log_jumps))
    }

    /// Objective in log-jump coordinates; `log(s_k)` is taken from the
    /// coordinate itself so an overflowing `exp` degrades to -inf, not NaN.
    fn value_in_log_jumps(&self, theta: f64, u: &[f64]) -> f64 {
        let l = u.len();
        let mut prefix = Vec::with_capacity(l + 1);
        prefix.push(0.0f64);
        let mut acc = 0.0f64;
        for &uk in u {
            acc += uk.exp();
            prefix.push(acc);
        }
        let mut total = 0.0f64;
        for i in 0..self.z.len() {
            let a = (-self.z[i] * theta).exp();
            let log_a = -self.z[i] * theta;
            let h = prefix[self.idx_leq[i]];
            if self.event[i] {
                let k = self.idx_lt[i]; // y equals event_times[k]
                let h_minus = prefix[k];
                total += log_a + u[k] - (h + a).ln() - (h_minus + a).ln();
            } else {
                total += log_a - (h + a).ln();
            }
        }
        total
    }

    /// Gradient of the objective with respect to the log-jumps.
    fn gradient_in_log_jumps(&self, theta: f64, u: &[f64], grad: &mut [f64]) {
        let l = u.len();
        let mut prefix = Vec::with_capacity(l + 1);
        prefix.push(0.0f64);
        let mut acc = 0.0f64;
        for &uk in u {
            acc += uk.exp();
            prefix.push(acc);
        }
        // bucket_a[j]: observations whose eta(y) includes jumps 0..j-1
        let mut bucket_a = vec![0.0f64; l + 1];
        let mut bucket_b = vec![0.0f64; l + 1];
        for i in 0..self.z.len() {
            let a = (-self.z[i] * theta).exp();
            bucket_a[self.idx_leq[i]] += 1.0 / (prefix[self.idx_leq[i]] + a);
            if self.event[i] {
                bucket_b[self.idx_lt[i]] += 1.0 / (prefix[self.idx_lt[i]] + a);
            }
        }
        // suffix sums: jump k appears in eta(y) iff idx_leq > k, and in
        // eta(y-) iff idx_lt > k
        let mut acc_a = 0.0f64;
        let mut acc_b = 0.0f64;
        for k in (0..l).rev() {
            acc_a += bucket_a[k + 1];
            acc_b += bucket_b[k + 1];
            grad[k] = self.multiplicities[k] - u[k].exp() * (acc_a + acc_b);
        }
    }

    /// Inner maximization from a warm-start workspace, or from all-ones
    /// jumps with a fresh curvature matrix when absent.
    fn inner_from(&self, theta: f64, warm: Option<&Workspace>) -> Result<(f64, Workspace)> {
        if !self.censoring_after_last_event {
            // the last jump's contribution is strictly increasing: the
            // supremum sits at an infinite jump size
            return Err(Error::DegenerateNpmle);
        }
        let l = self.event_times.len();
        let (mut u, mut h_inv) = match warm {
            Some(w) if w.u.len() == l => (w.u.clone(), w.h_inv.clone()),
            _ => (vec![0.0; l], identity(l)),
        };
        let mut value = self.value_in_log_jumps(theta, &u);
        if !value.is_finite() {
            u = vec![0.0; l];
            h_inv = identity(l);
            value = self.value_in_log_jumps(theta, &u);
        }
        let mut grad = vec![0.0f64; l];
        self.gradient_in_log_jumps(theta, &u, &mut grad);

        let mut dir = vec![0.0f64; l];
        let mut u_next = vec![0.0f64; l];
        let mut grad_next = vec![0.0f64; l];
        let mut first_update = warm.is_none();

        for _ in 0..self.inner_max_iter {
            if max_abs(&grad) < self.inner_tol {
                return Ok((value, Workspace { u, h_inv }));
            }
            // ascent direction H * grad
            mat_vec(&h_inv, &grad, &mut dir);
            if dot(&grad, &dir) <= 0.0 {
                // curvature information went stale; reset to steepest ascent
                h_inv = identity(l);
                first_update = true;
                dir.copy_from_slice(&grad);
            }
            let slope = dot(&grad, &dir);
            // once the Armijo increment sinks below the evaluation noise,
            // value comparisons cannot certify progress any more
            let noise_floor = 16.0 * f64::EPSILON * (1.0 + value.abs());

            let mut accepted = f64::NAN;
            let mut t = 1.0f64;
            while 1e-4 * t * slope >= noise_floor {
                for k in 0..l {
                    u_next[k] = u[k] + t * dir[k];
                }
                let v = self.value_in_log_jumps(theta, &u_next);
                if v.is_finite() && v >= value + 1e-4 * t * slope {
                    accepted = v;
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_nan() {
                // value comparisons are noise-limited this close to the
                // maximum: scan step lengths in both directions and take the
                // best gradient-norm decrease instead
                let g_now = max_abs(&grad);
                let mut best: Option<(f64, f64)> = None; // (t, gradient norm)
                let mut t = 2.0f64.powi(-10);
                let mut scratch = vec![0.0f64; l];
                for _ in 0..32 {
                    for k in 0..l {
                        scratch[k] = u[k] + t * dir[k];
                    }
                    if self.value_in_log_jumps(theta, &scratch).is_finite() {
                        self.gradient_in_log_jumps(theta, &scratch, &mut grad_next);
                        let g = max_abs(&grad_next);
                        if best.is_none_or(|(_, gb)| g < gb) {
                            best = Some((t, g));
                        }
                    }
                    t *= 2.0;
                }
                match best {
                    Some((tb, gb)) if gb < 0.995 * g_now => {
                        for k in 0..l {
                            u_next[k] = u[k] + tb * dir[k];
                        }
                        accepted = self.value_in_log_jumps(theta, &u_next);
                        self.gradient_in_log_jumps(theta, &u_next, &mut grad_next);
                    }
                    _ => break,
                }
            } else {
                self.gradient_in_log_jumps(theta, &u_next, &mut grad_next);
            }
            if u_next.iter().any(|&x| x > DEGENERACY_LOG_JUMP) {
                return Err(Error::DegenerateNpmle);
            }

            // inverse-Hessian update written for the negated (convex) problem:
            // its gradient change is grad - grad_next, and s.y must be
            // positive; steps too small to carry curvature signal are skipped
            let s: Vec<f64> = (0..l).map(|k| u_next[k] - u[k]).collect();
            let y: Vec<f64> = (0..l).map(|k| grad[k] - grad_next[k]).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * norm2(&s) * norm2(&y) && norm2(&s) > 1e-12 * (1.0 + norm2(&u)) {
                if first_update {
                    // scale the initial matrix to the observed curvature
                    let scale = sy / dot(&y, &y);
                    if scale.is_finite() && scale > 0.0 {
                        for v in h_inv.iter_mut() {
                            *v *= scale;
                        }
                    }
                    first_update = false;
                }
                bfgs_update(&mut h_inv, &s, &y, 1.0 / sy);
            }

            u.copy_from_slice(&u_next);
            grad.copy_from_slice(&grad_next);
            value = accepted;
        }
        if max_abs(&grad) < self.inner_tol {
            Ok((value, Workspace { u, h_inv }))
        } else {
            Err(Error::NoConvergence(format!(
                "inner maximization at theta={theta}: gradient max-norm {:e}",
                max_abs(&grad)
            )))
        }
    }

    /// Profile value `sup over jumps` at `theta`, with the maximizing jumps.
    pub fn profile_inner(&self, theta: f64) -> Result<(f64, Vec<f64>)> {
        let (value, w) = self.inner_from(theta, None)?;
        Ok((value, w.u.iter().map(|x| x.exp()).collect()))
    }

    /// Outer maximizer of the profile likelihood: bracket expansion inside
    /// [-10, 10], golden-section shrinking, then parabolic refinement until
    /// the central-difference derivative drops below 1e-6.
    pub fn mle(&self) -> Result<f64> {
        let mut eval = PoEvaluator::new(self);
        let (mut a, mut b, mut fb, mut c) = bracket_maximum(&mut eval)?;

        // golden-section shrink
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        while c - a > 1e-4 {
            let (x, on_right) = if c - b > b - a {
                (b + (1.0 - INV_PHI) * (c - b), true)
            } else {
                (b - (1.0 - INV_PHI) * (b - a), false)
            };
            let fx = eval.log_profile_lik(x)?;
            if fx > fb {
                if on_right {
                    a = b;
                } else {
                    c = b;
                }
                b = x;
                fb = fx;
            } else if on_right {
                c = x;
            } else {
                a = x;
            }
        }

        // parabolic refinement on equally spaced samples around b
        let mut h = OUTER_DERIV_STEP;
        for _ in 0..100 {
            let f_hi = eval.log_profile_lik(b + h)?;
            let f_lo = eval.log_profile_lik(b - h)?;
            let deriv = (f_hi - f_lo) / (2.0 * h);
            if deriv.abs() < OUTER_DERIV_TOL {
                return Ok(b);
            }
            let denom = f_lo - 2.0 * fb + f_hi;
            if denom >= 0.0 {
                // not locally concave at this resolution; tighten
                h *= 0.5;
                if h < 1e-7 {
                    return Err(Error::NoConvergence(
                        "outer refinement lost local concavity".into(),
                    ));
                }
                continue;
            }
            let vertex = b + 0.5 * h * (f_lo - f_hi) / denom;
            let clamped = vertex.clamp(b - 1.0, b + 1.0);
            let f_vertex = eval.log_profile_lik(clamped)?;
            if f_vertex >= fb {
                b = clamped;
                fb = f_vertex;
            } else {
                h *= 0.5;
                if h < 1e-7 {
                    return Err(Error::NoConvergence(
                        "outer refinement stalled above derivative tolerance".into(),
                    ));
                }
            }
        }
        Err(Error::NoConvergence(
            "outer refinement exhausted its iteration budget".into(),
        ))
    }
}

/// Inner-solver state carried between warm-started evaluations: the last
/// maximizing log-jumps and the accumulated curvature approximation.
#[derive(Debug, Clone)]
struct Workspace {
    u: Vec<f64>,
    h_inv: Vec<f64>,
}

/// Warm-started profile evaluator: reuses the previous maximizing jumps and
/// curvature matrix as the start of the next inner solve. Intended for
/// serially correlated evaluation points (samplers, line searches); keep one
/// instance per worker.
pub struct PoEvaluator<'a> {
    profile: &'a PoProfile,
    warm: Option<Workspace>,
}

impl<'a> PoEvaluator<'a> {
    pub fn new(profile: &'a PoProfile) -> Self {
        Self {
            profile,
            warm: None,
        }
    }

    /// Profile log-likelihood at `theta`.
    pub fn log_profile_lik(&mut self, theta: f64) -> Result<f64> {
        let (value, w) = self.profile.inner_from(theta, self.warm.as_ref())?;
        self.warm = Some(w);
        Ok(value)
    }
}

/// Expands from 0 with doubling steps until three points `a < b < c` with
/// `f(b) >= f(a)` and `f(b) >= f(c)` are found inside [-10, 10].
fn bracket_maximum(eval: &mut PoEvaluator<'_>) -> Result<(f64, f64, f64, f64)> {
    const STEP0: f64 = 0.25;
    let f_mid = eval.log_profile_lik(0.0)?;
    let f_plus = eval.log_profile_lik(STEP0)?;
    let f_minus = eval.log_profile_lik(-STEP0)?;
    if f_mid >= f_plus && f_mid >= f_minus {
        return Ok((-STEP0, 0.0, f_mid, STEP0));
    }

    // walk uphill with doubling steps
    let dir = if f_plus > f_minus { STEP0 } else { -STEP0 };
    let mut x_prev = 0.0f64;
    let (mut x_best, mut f_best) = if dir > 0.0 {
        (STEP0, f_plus)
    } else {
        (-STEP0, f_minus)
    };
    let mut width = 2.0 * dir;
    loop {
        let x_next = x_best + width;
        if !(OUTER_BRACKET_LO..=OUTER_BRACKET_HI).contains(&x_next) {
            return Err(Error::BracketNotFound {
                lo: OUTER_BRACKET_LO,
                hi: OUTER_BRACKET_HI,
            });
        }
        let f_next = eval.log_profile_lik(x_next)?;
        if f_next < f_best {
            return Ok(if x_prev < x_next {
                (x_prev, x_best, f_best, x_next)
            } else {
                (x_next, x_best, f_best, x_prev)
            });
        }
        x_prev = x_best;
        x_best = x_next;
        f_best = f_next;
        width *= 2.0;
    }
}

/// Log-likelihood of a dataset under an explicitly supplied odds step
/// function. Every event time must be a jump time of `eta`.
pub fn po_log_lik(data: &Dataset, eta: &StepFunction, theta: f64) -> Result<f64> {
    let mut total = 0.0f64;
    for o in data.observations() {
        let y = o.time();
        let a = (-o.covariate() * theta).exp();
        let log_a = -o.covariate() * theta;
        if o.event() {
            let jump = eta.jump_at(y);
            if jump == 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "event time {y} is not a jump time of the supplied odds function"
                )));
            }
            total +=
                log_a + jump.ln() - (eta.value(y) + a).ln() - (eta.value_before(y) + a).ln();
        } else {
            total += log_a - (eta.value(y) + a).ln();
        }
    }
    Ok(total)
}

fn identity(l: usize) -> Vec<f64> {
    let mut m = vec![0.0f64; l * l];
    for k in 0..l {
        m[k * l + k] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let l = v.len();
    for r in 0..l {
        let row = &m[r * l..(r + 1) * l];
        out[r] = dot(row, v);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Inverse-Hessian update `H <- (I - rho s y') H (I - rho y s') + rho s s'`
/// with `rho = 1/(y's)`, expanded to the symmetric rank-two form.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], rho: f64) {
    let l = s.len();
    let mut hy = vec![0.0f64; l];
    mat_vec(h, y, &mut hy);
    let yhy = dot(y, &hy);
    let c = (1.0 + rho * yhy) * rho;
    for r in 0..l {
        for q in 0..l {
            h[r * l + q] += c * s[r] * s[q] - rho * (s[r] * hy[q] + hy[r] * s[q]);
        }
    }
}
