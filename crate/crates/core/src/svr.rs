//! Epsilon-insensitive support vector regression.
//!
//! The dual is solved over β = α − α*, one variable per training row:
//!
//! ```text
//! maximize   W(β) = −½ βᵀKβ + yᵀβ − ε·Σ|βᵢ|
//! subject to −C ≤ βᵢ ≤ C,  Σβᵢ = 0
//! ```
//!
//! Each iteration moves one pair (βᵢ += t, βⱼ −= t), which keeps the equality
//! constraint, and maximizes W exactly along that line. W restricted to the
//! line is a concave piecewise quadratic with kinks where either variable
//! crosses zero, so the step is found by checking each piece. The pair is the
//! maximal KKT violator `i` plus the `j` with the largest second-order gain.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::{rng, Error, Result};

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_PASSES: usize = 1000;
pub const DEFAULT_POLY_DEGREE: u32 = 3;

/// Above this many rows the Gram matrix is not cached and kernel rows are
/// recomputed on demand.
const GRAM_CACHE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Polynomial,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: f64,
    pub coef0: f64,
    pub degree: u32,
}

impl KernelSpec {
    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            gamma: 1.0,
            coef0: 0.0,
            degree: 1,
        }
    }

    pub fn polynomial(gamma: f64, coef0: f64, degree: u32) -> Self {
        KernelSpec {
            kind: KernelKind::Polynomial,
            gamma,
            coef0,
            degree,
        }
    }

    pub fn rbf(gamma: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Rbf,
            gamma,
            coef0: 0.0,
            degree: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            KernelKind::Linear => Ok(()),
            KernelKind::Polynomial if self.degree < 1 => {
                Err(Error::invalid("polynomial kernel degree must be at least 1"))
            }
            _ if !(self.gamma > 0.0 && self.gamma.is_finite()) => Err(Error::invalid(format!(
                "kernel gamma must be positive, got {}",
                self.gamma
            ))),
            _ => Ok(()),
        }
    }

    fn eval_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => dot(u, v),
            KernelKind::Polynomial => (self.gamma * dot(u, v) + self.coef0).powi(self.degree as i32),
            KernelKind::Rbf => {
                let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                (-self.gamma * d2).exp()
            }
        }
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn kernel_eval(u: &[f64], v: &[f64], spec: &KernelSpec) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    Ok(spec.eval_unchecked(u, v))
}

/// `1 / (d · Var(X))` over all entries of the feature matrix; 1 when the
/// matrix is constant.
pub fn scale_gamma(ds: &Dataset) -> f64 {
    let values: Vec<f64> = ds.features().iter().flatten().copied().collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (ds.n_features() as f64 * var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrConfig {
    pub kernel: KernelSpec,
    pub c: f64,
    pub epsilon: f64,
    /// Stop once the largest KKT violation falls below this.
    pub tolerance: f64,
    /// One pass is n pair updates.
    pub max_passes: usize,
    /// Seeds the random pair fallback used when the greedy pair stalls.
    pub seed: u64,
}

impl SvrConfig {
    pub fn new(kernel: KernelSpec) -> Self {
        SvrConfig {
            kernel,
            c: DEFAULT_C,
            epsilon: DEFAULT_EPSILON,
            tolerance: DEFAULT_TOLERANCE,
            max_passes: DEFAULT_MAX_PASSES,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// βᵢ = αᵢ − αᵢ* for each support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    pub epsilon: f64,
    /// False when `max_passes` ran out before the KKT conditions were met.
    pub converged: bool,
    pub iterations: usize,
    /// Dual objective at the end of each pass, plus the final value.
    pub objective_trace: Vec<f64>,
    pub input_dim: usize,
}

impl SvrModel {
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: row.len(),
            });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, b)| b * self.kernel.eval_unchecked(sv, row))
            .sum::<f64>()
            + self.bias)
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&0.0)
    }
}

enum Gram<'a> {
    Cached(Vec<Vec<f64>>),
    OnDemand {
        x: &'a [Vec<f64>],
        kernel: KernelSpec,
    },
}

impl Gram<'_> {
    fn row(&self, i: usize) -> std::borrow::Cow<'_, [f64]> {
        match self {
            Gram::Cached(m) => std::borrow::Cow::Borrowed(&m[i]),
            Gram::OnDemand { x, kernel } => std::borrow::Cow::Owned(
                x.iter().map(|r| kernel.eval_unchecked(&x[i], r)).collect(),
            ),
        }
    }
}

/// Pair step state shared by the selection and line search.
struct Solver<'a> {
    y: &'a [f64],
    beta: Vec<f64>,
    /// gᵢ = yᵢ − (Kβ)ᵢ.
    grad: Vec<f64>,
    diag: Vec<f64>,
    c: f64,
    eps: f64,
}

impl Solver<'_> {
    fn can_rise(&self, i: usize) -> bool {
        self.beta[i] < self.c
    }

    fn can_fall(&self, i: usize) -> bool {
        self.beta[i] > -self.c
    }

    /// dW/dβᵢ when βᵢ increases.
    fn up(&self, i: usize) -> f64 {
        if self.beta[i] >= 0.0 {
            self.grad[i] - self.eps
        } else {
            self.grad[i] + self.eps
        }
    }

    /// −dW/dβⱼ when βⱼ decreases.
    fn low(&self, j: usize) -> f64 {
        if self.beta[j] <= 0.0 {
            self.grad[j] + self.eps
        } else {
            self.grad[j] - self.eps
        }
    }

    /// Largest `up` and smallest `low` with their indices.
    fn extremes(&self) -> (Option<(usize, f64)>, Option<(usize, f64)>) {
        let mut hi: Option<(usize, f64)> = None;
        let mut lo: Option<(usize, f64)> = None;
        for i in 0..self.beta.len() {
            if self.can_rise(i) {
                let u = self.up(i);
                if hi.is_none_or(|(_, v)| u > v) {
                    hi = Some((i, u));
                }
            }
            if self.can_fall(i) {
                let l = self.low(i);
                if lo.is_none_or(|(_, v)| l < v) {
                    lo = Some((i, l));
                }
            }
        }
        (hi, lo)
    }

    fn objective(&self) -> f64 {
        let mut w = 0.0;
        for i in 0..self.beta.len() {
            w += 0.5 * self.beta[i] * (self.y[i] + self.grad[i]) - self.eps * self.beta[i].abs();
        }
        w
    }

    /// Exact maximizer of W(βᵢ + t, βⱼ − t) over t ≥ 0 inside the box.
    fn line_search(&self, i: usize, j: usize, kij: f64) -> f64 {
        let (bi, bj) = (self.beta[i], self.beta[j]);
        let t_max = (self.c - bi).min(bj + self.c);
        if t_max <= 0.0 {
            return 0.0;
        }
        let eta = self.diag[i] + self.diag[j] - 2.0 * kij;
        let lin = self.grad[i] - self.grad[j];
        let gain = |t: f64| {
            t * lin - 0.5 * eta * t * t
                - self.eps * ((bi + t).abs() - bi.abs() + (bj - t).abs() - bj.abs())
        };

        let mut knots = vec![0.0, t_max];
        for k in [-bi, bj] {
            if k > 0.0 && k < t_max {
                knots.push(k);
            }
        }
        knots.sort_by(f64::total_cmp);

        let mut best_t = 0.0;
        let mut best_w = 0.0;
        let mut consider = |t: f64| {
            let w = gain(t);
            if w > best_w {
                best_w = w;
                best_t = t;
            }
        };
        for seg in knots.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            consider(b);
            if eta > 0.0 {
                let mid = 0.5 * (a + b);
                let si = (bi + mid).signum();
                let sj = (bj - mid).signum();
                let stationary = (lin - self.eps * si + self.eps * sj) / eta;
                consider(stationary.clamp(a, b));
            }
        }
        best_t
    }

    fn apply(&mut self, i: usize, j: usize, t: f64, row_i: &[f64], row_j: &[f64]) {
        self.beta[i] += t;
        self.beta[j] -= t;
        for b in [i, j] {
            if (self.beta[b] - self.c).abs() <= 1e-12 * self.c {
                self.beta[b] = self.c;
            } else if (self.beta[b] + self.c).abs() <= 1e-12 * self.c {
                self.beta[b] = -self.c;
            }
        }
        for k in 0..self.grad.len() {
            self.grad[k] -= t * (row_i[k] - row_j[k]);
        }
    }
}

/// Fits an epsilon-SVR by pairwise coordinate ascent on the dual.
///
/// A model is returned even when `max_passes` runs out; check
/// [`SvrModel::converged`].
pub fn fit_svr(ds: &Dataset, cfg: &SvrConfig) -> Result<SvrModel> {
    let n = ds.n_samples();
    if n < 2 {
        return Err(Error::NotEnoughSamples { needed: 2, got: n });
    }
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(Error::invalid("C must be positive"));
    }
    if !(cfg.epsilon >= 0.0 && cfg.epsilon.is_finite()) {
        return Err(Error::invalid("epsilon must be non-negative"));
    }
    if !(cfg.tolerance > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    cfg.kernel.validate()?;

    let x = ds.features();
    let y = ds.target();
    let kernel = cfg.kernel;
    let gram = if n <= GRAM_CACHE_LIMIT {
        Gram::Cached(
            x.iter()
                .map(|a| x.iter().map(|b| kernel.eval_unchecked(a, b)).collect())
                .collect(),
        )
    } else {
        Gram::OnDemand { x, kernel }
    };
    let diag: Vec<f64> = x.iter().map(|r| kernel.eval_unchecked(r, r)).collect();

    let mut s = Solver {
        y,
        beta: vec![0.0; n],
        grad: y.to_vec(),
        diag,
        c: cfg.c,
        eps: cfg.epsilon,
    };
    let mut rng = rng::seeded(cfg.seed);
    let mut objective_trace = Vec::new();
    let mut iterations = 0usize;
    let mut stalls = 0usize;
    let mut converged = false;
    let max_iterations = cfg.max_passes.saturating_mul(n);

    while iterations < max_iterations {
        let (Some((i, up_i)), Some((_, low_min))) = s.extremes() else {
            converged = true;
            break;
        };
        if up_i - low_min < cfg.tolerance {
            converged = true;
            break;
        }

        let row_i = gram.row(i);
        // second-order choice among violating partners
        let mut j_best: Option<(usize, f64)> = None;
        for j in 0..n {
            if j == i || !s.can_fall(j) {
                continue;
            }
            let diff = up_i - s.low(j);
            if diff <= 0.0 {
                continue;
            }
            let eta = (s.diag[i] + s.diag[j] - 2.0 * row_i[j]).max(1e-12);
            let score = diff * diff / eta;
            if j_best.is_none_or(|(_, b)| score > b) {
                j_best = Some((j, score));
            }
        }
        let Some((mut j, _)) = j_best else {
            converged = true;
            break;
        };

        let mut i = i;
        let mut t = s.line_search(i, j, row_i[j]);
        let mut row_i = row_i;
        if t <= 0.0 {
            // stalled: try a random rising/falling pair instead
            stalls += 1;
            if stalls > n {
                break;
            }
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b || !s.can_rise(a) || !s.can_fall(b) {
                iterations += 1;
                continue;
            }
            i = a;
            j = b;
            row_i = gram.row(i);
            t = s.line_search(i, j, row_i[j]);
            if t <= 0.0 {
                iterations += 1;
                continue;
            }
        } else {
            stalls = 0;
        }
        let row_j = gram.row(j);
        let row_i = row_i.into_owned();
        s.apply(i, j, t, &row_i, &row_j);

        iterations += 1;
        if iterations.is_multiple_of(n) {
            objective_trace.push(s.objective());
        }
    }
    objective_trace.push(s.objective());

    let bias = compute_bias(&s);
    let (support_vectors, dual_coefficients) = x
        .iter()
        .zip(&s.beta)
        .filter(|(_, b)| **b != 0.0)
        .map(|(r, b)| (r.clone(), *b))
        .unzip();

    Ok(SvrModel {
        support_vectors,
        dual_coefficients,
        bias,
        kernel,
        c: cfg.c,
        epsilon: cfg.epsilon,
        converged,
        iterations,
        objective_trace,
        input_dim: ds.n_features(),
    })
}

/// Mean of `gᵢ − ε·sign(βᵢ)` over unbounded support vectors; without any,
/// the midpoint of the feasible bias interval.
fn compute_bias(s: &Solver<'_>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..s.beta.len() {
        let b = s.beta[i];
        if b != 0.0 && b.abs() < s.c {
            sum += s.grad[i] - s.eps * b.signum();
            count += 1;
        }
    }
    if count > 0 {
        return sum / count as f64;
    }
    match s.extremes() {
        (Some((_, hi)), Some((_, lo))) => 0.5 * (hi + lo),
        (Some((_, hi)), None) => hi,
        (None, Some((_, lo))) => lo,
        (None, None) => 0.0,
    }
}
