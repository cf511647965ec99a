//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every check compares the implementation against an oracle written here
//! from the defining formulas, never against the implementation itself.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::NaiveDateTime;
use heliocast_core::dataset::{
    extract_features, parse_records, summarize, Dataset, FeatureSpec, Record, DEFAULT_SEED,
    DEFAULT_TRAIN_FRACTION,
};
use heliocast_core::harness::{
    default_model_suite, fit_model, generate_synthetic, load_model, run_comparison, save_model,
    ModelKind, ModelParams, ModelSpec,
};
use heliocast_core::linear_models::{expand_polynomial, fit_ols};
use heliocast_core::metrics::score;
use heliocast_core::neighbors::fit_knn;
use heliocast_core::rng::{self, Rng};
use heliocast_core::svr::{fit_svr, KernelKind, KernelSpec, SvrConfig};
use heliocast_core::trees::{fit_forest, fit_gbr, fit_tree, ForestConfig, GbrConfig, TreeConfig};
use heliocast_service::{AppState, FixedClock, ModelStore, Provider};
use rand::Rng as _;

type Check = Result<String, String>;
type Points = Vec<(f64, f64)>;

/// Criteria whose literal statement contradicts another requirement. They
/// still run and still print FAIL; they do not change the exit status.
const KNOWN_CONFLICTS: &[&str] = &["tree-oracle"];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(x: f64, oracle: f64) -> f64 {
    if oracle == 0.0 {
        x.abs()
    } else {
        (x - oracle).abs() / oracle.abs()
    }
}

fn dataset(features: Vec<Vec<f64>>, target: Vec<f64>) -> Dataset {
    let d = features[0].len();
    let names = (0..d).map(|j| format!("x{j}")).collect();
    Dataset::new(features, target, names).unwrap()
}

fn random_matrix(r: &mut Rng, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| r.random_range(lo..hi)).collect())
        .collect()
}

// ---------------------------------------------------------------- metrics

struct OracleMetrics {
    mse: f64,
    rmse: f64,
    mae: f64,
    r2: Option<f64>,
}

fn metrics_oracle(a: &[f64], p: &[f64]) -> OracleMetrics {
    let n = a.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    for i in 0..a.len() {
        let e = a[i] - p[i];
        sq += e * e;
        abs += e.abs();
    }
    let mean = a.iter().sum::<f64>() / n;
    let sst: f64 = a.iter().map(|v| (v - mean) * (v - mean)).sum();
    OracleMetrics {
        mse: sq / n,
        rmse: (sq / n).sqrt(),
        mae: abs / n,
        r2: (a.len() > 1 && sst > 0.0).then(|| 1.0 - sq / sst),
    }
}

fn metrics_oracle_check() -> Check {
    let mut r = rng::seeded(1);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = r.random_range(1..=1000);
        let scale = 10f64.powi(r.random_range(-3..=4));
        let a: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0) * scale).collect();
        let p: Vec<f64> = if case % 2 == 0 {
            (0..n).map(|_| r.random_range(-1.0..1.0) * scale).collect()
        } else {
            a.iter().map(|v| v + r.random_range(-0.1..0.1) * scale).collect()
        };
        let got = score(&a, &p).map_err(|e| e.to_string())?;
        let want = metrics_oracle(&a, &p);
        for (name, x, o) in [
            ("mse", got.mse, want.mse),
            ("rmse", got.rmse, want.rmse),
            ("mae", got.mae, want.mae),
        ] {
            let e = rel_err(x, o);
            worst = worst.max(e);
            ensure(e <= 1e-12, || format!("case {case} n={n}: {name} {x} vs {o}"))?;
        }
        match (got.r2, want.r2) {
            (Some(x), Some(o)) => {
                let e = rel_err(x, o);
                worst = worst.max(e);
                ensure(e <= 1e-12, || format!("case {case} n={n}: r2 {x} vs {o}"))?;
            }
            (None, None) => {}
            (x, o) => return Err(format!("case {case} n={n}: r2 {x:?} vs {o:?}")),
        }
    }
    Ok(format!("1000 random cases, max relative error {worst:.1e}"))
}

// ---------------------------------------------------------------- OLS

fn ols_check() -> Check {
    let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.37 - 4.0).collect();
    let y: Vec<f64> = x.iter().map(|v| 3.0 + 2.0 * v).collect();
    let m = fit_ols(&Dataset::from_columns(&x, &y).unwrap(), 1).map_err(|e| e.to_string())?;
    let (b0, b1) = (m.coefficients[0], m.coefficients[1]);
    ensure((b0 - 3.0).abs() <= 1e-8 && (b1 - 2.0).abs() <= 1e-8, || {
        format!("coefficients {b0}, {b1}")
    })?;

    // Residual orthogonality on noisy, well-conditioned random problems.
    let mut r = rng::seeded(2);
    let mut worst_orth = 0.0f64;
    for _ in 0..50 {
        let n = r.random_range(20..200);
        let d = r.random_range(1..=3);
        let xs = random_matrix(&mut r, n, d, -5.0, 5.0);
        let ys: Vec<f64> = xs
            .iter()
            .map(|row| 1.0 + row.iter().sum::<f64>() + r.random_range(-1.0..1.0))
            .collect();
        for degree in [1, 2] {
            let ds = dataset(xs.clone(), ys.clone());
            let m = fit_ols(&ds, degree).map_err(|e| e.to_string())?;
            let phi: Vec<Vec<f64>> = xs.iter().map(|row| expand_polynomial(row, degree).unwrap()).collect();
            let resid: Vec<f64> = phi
                .iter()
                .zip(&ys)
                .map(|(f, y)| y - f.iter().zip(&m.coefficients).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            let norm_y = ys.iter().map(|v| v * v).sum::<f64>().sqrt();
            for j in 0..phi[0].len() {
                let dot: f64 = phi.iter().zip(&resid).map(|(f, e)| f[j] * e).sum();
                worst_orth = worst_orth.max(dot.abs() / norm_y);
            }
        }
    }
    ensure(worst_orth < 1e-7, || format!("residual orthogonality {worst_orth:.2e}"))?;

    let yq: Vec<f64> = x.iter().map(|v| 1.0 - 0.5 * v + 0.25 * v * v).collect();
    let ds = Dataset::from_columns(&x, &yq).unwrap();
    let m = fit_ols(&ds, 2).map_err(|e| e.to_string())?;
    let mse = x
        .iter()
        .zip(&yq)
        .map(|(v, y)| (m.predict(&[*v]).unwrap() - y).powi(2))
        .sum::<f64>()
        / x.len() as f64;
    ensure(mse < 1e-16, || format!("quadratic train MSE {mse:e}"))?;
    Ok(format!(
        "intercept err {:.1e}, slope err {:.1e}; max |phi^T r|/|y| {worst_orth:.1e}; quadratic MSE {mse:.1e}",
        (b0 - 3.0).abs(),
        (b1 - 2.0).abs()
    ))
}

// ---------------------------------------------------------------- KNN

fn knn_oracle(xs: &[Vec<f64>], ys: &[f64], k: usize, q: &[f64]) -> f64 {
    let mut all: Vec<(f64, usize)> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| (x.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let chosen = &all[..k.min(xs.len())];
    let zeros: Vec<f64> = chosen.iter().filter(|c| c.0 == 0.0).map(|c| ys[c.1]).collect();
    if !zeros.is_empty() {
        return zeros.iter().sum::<f64>() / zeros.len() as f64;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(d2, i) in chosen {
        let w = 1.0 / d2.sqrt();
        num += w * ys[i];
        den += w;
    }
    num / den
}

fn knn_check() -> Check {
    let mut r = rng::seeded(3);
    let mut worst = 0.0f64;
    let mut queries = 0;
    for set in 0..200 {
        let n = r.random_range(1..=500);
        let d = r.random_range(1..=3);
        let k = r.random_range(1..=15);
        let mut xs = random_matrix(&mut r, n, d, -10.0, 10.0);
        if set % 4 == 0 && n > 3 {
            // duplicated rows exercise the zero-distance and tie rules
            xs[1] = xs[0].clone();
            xs[n - 1] = xs[0].clone();
        }
        let ys: Vec<f64> = (0..n).map(|_| r.random_range(-100.0..100.0)).collect();
        let model = fit_knn(&dataset(xs.clone(), ys.clone()), k, false).map_err(|e| e.to_string())?;
        let mut qs = random_matrix(&mut r, 20, d, -12.0, 12.0);
        qs.extend(xs.iter().take(5).cloned());
        for q in &qs {
            let got = model.predict(q).map_err(|e| e.to_string())?;
            let want = knn_oracle(&xs, &ys, k, q);
            let e = (got - want).abs();
            worst = worst.max(e);
            queries += 1;
            ensure(e <= 1e-9, || format!("set {set}: {got} vs oracle {want}"))?;
        }
    }

    // k = 1 reproduces its own training targets.
    let xs = random_matrix(&mut r, 300, 2, 0.0, 1.0);
    let ys: Vec<f64> = (0..300).map(|_| r.random_range(-5.0..5.0)).collect();
    let model = fit_knn(&dataset(xs.clone(), ys.clone()), 1, false).unwrap();
    let pred: Vec<f64> = xs.iter().map(|x| model.predict(x).unwrap()).collect();
    let r2 = score(&ys, &pred).unwrap().r2.unwrap();
    ensure(r2 == 1.0, || format!("k=1 train R2 {r2}"))?;
    Ok(format!("{queries} queries over 200 sets, max abs error {worst:.1e}; k=1 train R2 = {r2}"))
}

// ---------------------------------------------------------------- trees

fn sse(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let m = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - m) * (v - m)).sum()
}

/// Candidate thresholds: midpoints between consecutive distinct values.
fn thresholds(pts: &[(f64, f64)]) -> Vec<f64> {
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

fn partition(pts: &[(f64, f64)], t: f64) -> (Points, Points) {
    pts.iter().partition(|p| p.0 <= t)
}

fn ys(pts: &[(f64, f64)]) -> Vec<f64> {
    pts.iter().map(|p| p.1).collect()
}

/// Minimum SSE over every tree of depth at most `depth`.
fn optimal_sse(pts: &[(f64, f64)], depth: usize) -> f64 {
    let mut best = sse(&ys(pts));
    if depth == 0 {
        return best;
    }
    for t in thresholds(pts) {
        let (l, r) = partition(pts, t);
        best = best.min(optimal_sse(&l, depth - 1) + optimal_sse(&r, depth - 1));
    }
    best
}

/// SSE of the tree grown greedily: each node takes the split with the
/// largest SSE reduction, smallest threshold on ties.
fn greedy_sse(pts: &[(f64, f64)], depth: usize) -> f64 {
    let parent = sse(&ys(pts));
    if depth == 0 || pts.len() < 2 {
        return parent;
    }
    let mut best: Option<(f64, f64)> = None;
    for t in thresholds(pts) {
        let (l, r) = partition(pts, t);
        let gain = parent - sse(&ys(&l)) - sse(&ys(&r));
        if gain > 1e-12 * parent && best.is_none_or(|(_, g)| gain > g) {
            best = Some((t, gain));
        }
    }
    match best {
        None => parent,
        Some((t, _)) => {
            let (l, r) = partition(pts, t);
            greedy_sse(&l, depth - 1) + greedy_sse(&r, depth - 1)
        }
    }
}

fn random_tree_sets(seed: u64, count: usize) -> Vec<Points> {
    let mut r = rng::seeded(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(2..=12);
            (0..n)
                .map(|_| {
                    // coarse grid so repeated x values occur
                    let x = (r.random_range(0.0..8.0f64)).floor() / 2.0;
                    (x, r.random_range(-10.0..10.0))
                })
                .collect()
        })
        .collect()
}

fn fitted_sse(pts: &[(f64, f64)], depth: usize) -> Result<f64, String> {
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y = ys(pts);
    let tree = fit_tree(&Dataset::from_columns(&x, &y).unwrap(), &TreeConfig::with_depth(depth))
        .map_err(|e| e.to_string())?;
    Ok(x.iter().zip(&y).map(|(xi, yi)| (tree.predict(&[*xi]).unwrap() - yi).powi(2)).sum())
}

fn tree_oracle_check() -> Check {
    let sets = random_tree_sets(4, 100);
    let mut mismatches = Vec::new();
    let mut worst_gap = 0.0f64;
    for (i, pts) in sets.iter().enumerate() {
        let got = fitted_sse(pts, 2)?;
        let opt = optimal_sse(pts, 2);
        if (got - opt).abs() > 1e-9 {
            mismatches.push(i);
            worst_gap = worst_gap.max(got - opt);
        }
    }
    let leaves = depth3_leaves()?;
    ensure(leaves <= 8, || format!("depth-3 tree with {leaves} leaves"))?;
    ensure(mismatches.is_empty(), || {
        format!(
            "{} of 100 datasets: greedy depth-2 SSE exceeds the exhaustive optimum (largest gap {worst_gap:.3}); \
             greedy CART is not globally optimal (max depth-3 leaves {leaves})",
            mismatches.len()
        )
    })?;
    Ok(format!("100 datasets match the exhaustive optimum; max depth-3 leaves {leaves}"))
}

fn depth3_leaves() -> Result<usize, String> {
    let mut r = rng::seeded(5);
    let mut most = 0;
    for _ in 0..100 {
        let n = r.random_range(2..=200);
        let d = r.random_range(1..=3);
        let xs = random_matrix(&mut r, n, d, 0.0, 1.0);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let tree = fit_tree(&dataset(xs, y), &TreeConfig::with_depth(3)).map_err(|e| e.to_string())?;
        most = most.max(tree.n_leaves());
    }
    Ok(most)
}

fn tree_greedy_check() -> Check {
    let sets = random_tree_sets(4, 100);
    let mut worst = 0.0f64;
    for (i, pts) in sets.iter().enumerate() {
        for depth in 1..=3 {
            let got = fitted_sse(pts, depth)?;
            let want = greedy_sse(pts, depth);
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= 1e-9, || {
                format!("dataset {i} depth {depth}: SSE {got} vs greedy enumeration {want}")
            })?;
        }
        ensure(fitted_sse(pts, 1)? <= optimal_sse(pts, 1) + 1e-9, || {
            format!("dataset {i}: depth-1 tree is not the optimal stump")
        })?;
    }
    Ok(format!(
        "same 100 datasets: fitted SSE equals greedy split enumeration at depths 1-3 (max diff {worst:.1e}); stumps are optimal"
    ))
}

// ---------------------------------------------------------------- forest

fn forest_check() -> Check {
    let mut r = rng::seeded(6);
    let mut probes = 0;
    for set in 0..100 {
        let n = r.random_range(1..=150);
        let d = r.random_range(1..=3);
        let xs = random_matrix(&mut r, n, d, -3.0, 3.0);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-50.0..50.0)).collect();
        let ds = dataset(xs.clone(), y);
        let max_depth = match r.random_range(0..4) {
            0 => None,
            k => Some(k * 2),
        };
        let tree_config = TreeConfig {
            max_depth,
            min_samples_split: r.random_range(2..=5),
            seed: set,
        };
        let tree = fit_tree(&ds, &tree_config).map_err(|e| e.to_string())?;
        let single = fit_forest(
            &ds,
            &ForestConfig {
                tree_count: 1,
                bootstrap: false,
                tree_config,
                seed: set,
            },
        )
        .map_err(|e| e.to_string())?;
        let bagged = fit_forest(
            &ds,
            &ForestConfig {
                tree_count: 7,
                bootstrap: true,
                tree_config,
                seed: set,
            },
        )
        .map_err(|e| e.to_string())?;
        let mut rows = random_matrix(&mut r, 30, d, -4.0, 4.0);
        rows.extend(xs);
        for row in &rows {
            let a = tree.predict(row).unwrap();
            let b = single.predict(row).unwrap();
            ensure(a.to_bits() == b.to_bits(), || format!("set {set}: tree {a} vs forest {b}"))?;
            let members: Vec<f64> = bagged.trees.iter().map(|t| t.predict(row).unwrap()).collect();
            let lo = members.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = members.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let p = bagged.predict(row).unwrap();
            ensure(lo <= p && p <= hi, || format!("set {set}: {p} outside [{lo}, {hi}]"))?;
            probes += 1;
        }
    }
    Ok(format!("100 datasets, {probes} probe rows: single-tree forest bit-identical, bagged forest within member range"))
}

// ---------------------------------------------------------------- GBR

fn gbr_check() -> Check {
    let mut r = rng::seeded(7);
    let mut stages_checked = 0;
    for set in 0..50 {
        let n = r.random_range(2..=200);
        let d = r.random_range(1..=3);
        let ds = dataset(
            random_matrix(&mut r, n, d, 0.0, 10.0),
            (0..n).map(|_| r.random_range(-20.0..20.0)).collect(),
        );
        let g = fit_gbr(
            &ds,
            &GbrConfig {
                stage_count: 60,
                learning_rate: 0.2,
                max_depth: r.random_range(1..=5),
                seed: 42,
            },
        )
        .map_err(|e| e.to_string())?;
        for (m, w) in g.train_mse.windows(2).enumerate() {
            ensure(w[1] <= w[0], || format!("set {set}: stage {} MSE {} > {}", m + 1, w[1], w[0]))?;
            stages_checked += 1;
        }
    }

    let mut worst = 0.0f64;
    for set in 0..50 {
        let n = r.random_range(2..=200usize);
        let mut x: Vec<f64> = (0..n).map(|i| i as f64 + r.random_range(0.0..0.5)).collect();
        // shuffle so order carries no information
        for i in (1..n).rev() {
            x.swap(i, r.random_range(0..=i));
        }
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-20.0..20.0)).collect();
        let depth = (n as f64).log2().ceil().max(1.0) as usize;
        let g = fit_gbr(
            &Dataset::from_columns(&x, &y).unwrap(),
            &GbrConfig {
                stage_count: 100,
                learning_rate: 1.0,
                max_depth: depth,
                seed: 42,
            },
        )
        .map_err(|e| e.to_string())?;
        let mse = x
            .iter()
            .zip(&y)
            .map(|(xi, yi)| (g.predict(&[*xi]).unwrap() - yi).powi(2))
            .sum::<f64>()
            / n as f64;
        worst = worst.max(mse);
        ensure(mse < 1e-9, || format!("set {set}: n={n} depth={depth} train MSE {mse:e}"))?;
    }
    Ok(format!(
        "{stages_checked} stage transitions non-increasing at lr 0.2; lr 1.0 worst train MSE {worst:.1e}"
    ))
}

// ---------------------------------------------------------------- SVR

fn kernel(kind: KernelKind, gamma: f64, coef0: f64, degree: u32, u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    match kind {
        KernelKind::Linear => dot,
        KernelKind::Polynomial => (gamma * dot + coef0).powi(degree as i32),
        KernelKind::Rbf => (-gamma * u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).exp(),
    }
}

/// Projects `v` onto `{z in [0, c]^2n : sum(z[..n]) = sum(z[n..])}`.
fn project(v: &[f64], c: f64) -> Vec<f64> {
    let n = v.len() / 2;
    let sign = |i: usize| if i < n { 1.0 } else { -1.0 };
    let at = |lam: f64| -> (Vec<f64>, f64) {
        let z: Vec<f64> = v.iter().enumerate().map(|(i, x)| (x - lam * sign(i)).clamp(0.0, c)).collect();
        let s = z.iter().enumerate().map(|(i, x)| sign(i) * x).sum();
        (z, s)
    };
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if at(mid).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi)).0
}

/// Maximum of the ε-SVR dual over (α, α*) by accelerated projected gradient.
fn svr_dual_oracle(k: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> f64 {
    let n = y.len();
    let objective = |z: &[f64]| {
        let b: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += b[i] * k[i][j] * b[j];
            }
        }
        -0.5 * quad - eps * z.iter().sum::<f64>() + y.iter().zip(&b).map(|(a, b)| a * b).sum::<f64>()
    };
    let gradient = |z: &[f64]| {
        let b: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let mut g = vec![0.0; 2 * n];
        for i in 0..n {
            let kb: f64 = (0..n).map(|j| k[i][j] * b[j]).sum();
            g[i] = y[i] - eps - kb;
            g[n + i] = -y[i] - eps + kb;
        }
        g
    };
    // Lipschitz bound: 2 * max row sum of |K|.
    let lip = 2.0 * k.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lip.max(1e-12);
    let mut z = vec![0.0; 2 * n];
    let mut w = z.clone();
    let mut t = 1.0f64;
    let mut best = objective(&z);
    for _ in 0..20_000 {
        let g = gradient(&w);
        let stepped: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a + step * b).collect();
        let z_next = project(&stepped, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let f_next = objective(&z_next);
        if f_next < best - 1e-15 {
            // adaptive restart
            t = 1.0;
            w = z.clone();
            continue;
        }
        w = z_next
            .iter()
            .zip(&z)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        z = z_next;
        t = t_next;
        best = best.max(f_next);
    }
    best
}

fn svr_check() -> Check {
    let mut r = rng::seeded(8);
    let mut worst_gap = 0.0f64;
    let mut worst_sum = 0.0f64;
    for inst in 0..50 {
        let n = r.random_range(2..=8);
        let d = r.random_range(1..=2);
        let xs = random_matrix(&mut r, n, d, -2.0, 2.0);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let (kind, spec) = match inst % 3 {
            0 => (KernelKind::Linear, KernelSpec::linear()),
            1 => {
                let g = r.random_range(0.2..1.5);
                (KernelKind::Rbf, KernelSpec::rbf(g))
            }
            _ => {
                let g = r.random_range(0.2..1.0);
                let c0 = r.random_range(0.0..1.0);
                (KernelKind::Polynomial, KernelSpec::polynomial(g, c0, r.random_range(2..=3)))
            }
        };
        let c = r.random_range(0.1..10.0);
        let eps = r.random_range(0.0..0.5);
        let cfg = SvrConfig {
            c,
            epsilon: eps,
            ..SvrConfig::new(spec)
        };
        let model = fit_svr(&dataset(xs.clone(), y.clone()), &cfg).map_err(|e| e.to_string())?;
        let gram: Vec<Vec<f64>> = xs
            .iter()
            .map(|u| xs.iter().map(|v| kernel(kind, spec.gamma, spec.coef0, spec.degree, u, v)).collect())
            .collect();
        let oracle = svr_dual_oracle(&gram, &y, c, eps);
        let got = model.final_objective();
        let gap = (got - oracle).abs();
        worst_gap = worst_gap.max(gap);
        ensure(gap <= 1e-3, || format!("instance {inst} ({kind:?}, n={n}): objective {got} vs oracle {oracle}"))?;
        let sum: f64 = model.dual_coefficients.iter().sum();
        worst_sum = worst_sum.max(sum.abs());
        ensure(model.dual_coefficients.iter().all(|b| b.abs() <= c), || format!("instance {inst}: |beta| > C"))?;
        ensure(sum.abs() <= 1e-3, || format!("instance {inst}: sum beta = {sum}"))?;
    }

    let x: Vec<f64> = (0..50).map(|i| i as f64 * 10.0 / 49.0).collect();
    let y: Vec<f64> = x.iter().map(|v| 3.0 + 2.0 * v).collect();
    let ds = Dataset::from_columns(&x, &y).unwrap();
    let ols_slope = fit_ols(&ds, 1).map_err(|e| e.to_string())?.coefficients[1];
    let model = fit_svr(&ds, &SvrConfig { c: 100.0, ..SvrConfig::new(KernelSpec::linear()) })
        .map_err(|e| e.to_string())?;
    let slope: f64 = model
        .support_vectors
        .iter()
        .zip(&model.dual_coefficients)
        .map(|(sv, b)| sv[0] * b)
        .sum();
    let sum: f64 = model.dual_coefficients.iter().sum();
    ensure(model.dual_coefficients.iter().all(|b| b.abs() <= 100.0) && sum.abs() <= 1e-3, || {
        format!("slope fit infeasible: sum beta {sum}")
    })?;
    let rel = (slope - ols_slope).abs() / ols_slope.abs();
    ensure(rel <= 0.02, || format!("SVR slope {slope} vs OLS {ols_slope} ({:.2}%)", rel * 100.0))?;
    Ok(format!(
        "50 instances, max objective gap {worst_gap:.1e}, max |sum beta| {worst_sum:.1e}; slope {slope:.4} vs OLS {ols_slope:.4} ({:.2}%)",
        rel * 100.0
    ))
}

// ---------------------------------------------------------------- comparison

fn ordering_check() -> Check {
    let records = generate_synthetic(60, DEFAULT_SEED).map_err(|e| e.to_string())?;
    let spec = FeatureSpec::default();
    let ds = extract_features(&records, &spec).map_err(|e| e.to_string())?;
    let report = run_comparison(&ds, &default_model_suite(), &spec, DEFAULT_TRAIN_FRACTION, DEFAULT_SEED)
        .map_err(|e| e.to_string())?;
    ensure(report.rows.len() == 8, || format!("{} rows", report.rows.len()))?;
    if let Some(bad) = report.rows.iter().find(|r| r.error.is_some()) {
        return Err(format!("{} failed: {:?}", bad.display_name, bad.error));
    }
    let r2 = |k| report.r2_of(k).ok_or_else(|| format!("no R2 for {k}"));
    let (lin, gbr, forest) = (r2(ModelKind::Linear)?, r2(ModelKind::Gbr)?, r2(ModelKind::Forest)?);
    ensure(gbr >= lin && forest >= lin, || {
        format!("R2 gbr {gbr:.4}, forest {forest:.4}, linear {lin:.4}")
    })?;
    Ok(format!("R2 gbr {gbr:.4}, forest {forest:.4} >= linear {lin:.4}"))
}

// ---------------------------------------------------------------- summary

fn describe_oracle(mut v: Vec<f64>) -> [f64; 8] {
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| {
        let h = (n - 1) as f64 * p;
        let i = h as usize;
        if i + 1 >= n {
            v[n - 1]
        } else {
            v[i] + (h - i as f64) * (v[i + 1] - v[i])
        }
    };
    [n as f64, mean, var.sqrt(), v[0], q(0.25), q(0.5), q(0.75), v[n - 1]]
}

fn summary_check() -> Check {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample.csv");
    let file = std::fs::File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let records: Vec<Record> = parse_records(file).map_err(|e| e.to_string())?;
    let table = summarize(&records).map_err(|e| e.to_string())?;
    let names: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
    ensure(
        names.len() == 4
            && names[0] == "Month"
            && names[1] == "Hour"
            && names[2].starts_with("Irradiance")
            && names[3].starts_with("Temperature"),
        || format!("column order {names:?}"),
    )?;
    use chrono::{Datelike, Timelike};
    let columns: [Vec<f64>; 4] = [
        records.iter().map(|r| f64::from(r.timestamp.month())).collect(),
        records.iter().map(|r| f64::from(r.timestamp.hour())).collect(),
        records.iter().map(|r| r.irradiance).collect(),
        records.iter().map(|r| r.temperature).collect(),
    ];
    let mut worst = 0.0f64;
    for (col, values) in table.columns.iter().zip(columns) {
        let o = describe_oracle(values);
        let got = [
            col.count as f64,
            col.mean,
            col.std,
            col.min,
            col.q25,
            col.median,
            col.q75,
            col.max,
        ];
        for (stat, (g, w)) in ["count", "mean", "std", "min", "25%", "50%", "75%", "max"]
            .iter()
            .zip(got.iter().zip(o))
        {
            let e = rel_err(*g, w);
            worst = worst.max(e);
            ensure(e <= 1e-9, || format!("{} {stat}: {g} vs {w}", col.name))?;
        }
    }
    Ok(format!(
        "{} records, columns {names:?}, max relative error {worst:.1e}",
        records.len()
    ))
}

// ---------------------------------------------------------------- persistence

fn persistence_check() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = FeatureSpec::default();
    let ds = extract_features(&generate_synthetic(3, 9).unwrap(), &spec).unwrap();
    let mut r = rng::seeded(10);
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|_| vec![r.random_range(285.0..315.0), r.random_range(0..24) as f64])
        .collect();
    for kind in ModelKind::ALL {
        let mut params = ModelParams::defaults(kind);
        if let ModelParams::Forest(cfg) = &mut params {
            cfg.tree_count = 20;
        }
        let model = fit_model(&ModelSpec::new(kind.as_str(), params), &ds, &spec).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("{kind}.hcm"));
        save_model(&model, &path).map_err(|e| e.to_string())?;
        let loaded = load_model(&path).map_err(|e| e.to_string())?;
        for row in &rows {
            let (a, b) = (model.predict(row).unwrap(), loaded.predict(row).unwrap());
            ensure(a.to_bits() == b.to_bits(), || format!("{kind}: {a} != {b} at {row:?}"))?;
        }
    }
    Ok(format!("{} kinds x 100 rows bit-identical after save/load", ModelKind::ALL.len()))
}

// ---------------------------------------------------------------- service

fn service_check() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = FeatureSpec::default();
    let ds = extract_features(&generate_synthetic(3, 11).unwrap(), &spec).unwrap();
    let model = fit_model(&ModelSpec::new("Gradient Boosting Regressor", ModelParams::defaults(ModelKind::Gbr)), &ds, &spec)
        .map_err(|e| e.to_string())?;
    save_model(&model, dir.path().join("gbr.hcm")).map_err(|e| e.to_string())?;
    let now = NaiveDateTime::parse_from_str("2020-05-02T05:40:00", "%Y-%m-%dT%H:%M:%S").unwrap();

    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let (store, _) = ModelStore::open(dir.path());
        let state = AppState::new(store, Provider::Mock, FixedClock::at_local(now));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?;
        tokio::spawn(heliocast_service::serve(listener, state));
        let url = format!("http://{addr}/forecast?model=gbr&hours=24");
        let fetch = || async {
            let resp = reqwest::get(&url).await.map_err(|e| e.to_string())?;
            let ct = resp.headers().get("content-type").map(|v| v.to_str().unwrap_or("").to_string());
            ensure(resp.status().is_success(), || format!("status {}", resp.status()))?;
            ensure(ct.as_deref() == Some("application/json"), || format!("content-type {ct:?}"))?;
            resp.text().await.map_err(|e| e.to_string())
        };
        let first = fetch().await?;
        let second = fetch().await?;
        ensure(first == second, || "responses differ between calls".into())?;
        let points: Vec<serde_json::Value> = serde_json::from_str(&first).map_err(|e| e.to_string())?;
        ensure(points.len() == 24, || format!("{} points", points.len()))?;
        let temp_at = |hour: &str| {
            points
                .iter()
                .find(|p| p["timestamp"].as_str().is_some_and(|t| t.ends_with(hour)))
                .and_then(|p| p["temperature_k"].as_f64())
        };
        let (t6, t12) = (temp_at("T06:00:00"), temp_at("T12:00:00"));
        ensure(t6 == Some(296.0) && t12 == Some(302.0), || format!("hour 6 {t6:?}, hour 12 {t12:?}"))?;
        Ok(format!("24 points, byte-identical across calls; hour 6 -> {} K, hour 12 -> {} K", t6.unwrap(), t12.unwrap()))
    })
}

// ---------------------------------------------------------------- driver

struct Criterion {
    id: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: "metrics-oracle", limit: Some(Duration::from_secs(1)), run: metrics_oracle_check },
        Criterion { id: "ols-exactness", limit: None, run: ols_check },
        Criterion { id: "knn-oracle", limit: None, run: knn_check },
        Criterion { id: "tree-oracle", limit: None, run: tree_oracle_check },
        Criterion { id: "tree-greedy-enumeration (supplementary)", limit: None, run: tree_greedy_check },
        Criterion { id: "forest-degeneracy", limit: None, run: forest_check },
        Criterion { id: "gbr-monotonicity", limit: None, run: gbr_check },
        Criterion { id: "svr-dual-optimality", limit: Some(Duration::from_secs(30)), run: svr_check },
        Criterion { id: "ensemble-ordering", limit: Some(Duration::from_secs(120)), run: ordering_check },
        Criterion { id: "summary-statistics", limit: None, run: summary_check },
        Criterion { id: "persistence-roundtrip", limit: None, run: persistence_check },
        Criterion { id: "service-contract", limit: None, run: service_check },
    ];

    let mut unexpected = 0;
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(msg), Some(limit)) if elapsed > limit => {
                Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}"))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(msg) => println!("PASS {} [{elapsed:.2?}] {msg}", c.id),
            Err(msg) => {
                failed += 1;
                let known = KNOWN_CONFLICTS.contains(&c.id);
                if !known {
                    unexpected += 1;
                }
                println!(
                    "FAIL {} [{elapsed:.2?}] {msg}{}",
                    c.id,
                    if known { " (known conflict, see README)" } else { "" }
                );
            }
        }
    }
    println!(
        "{} of {} checks passed; {} known-conflict failure(s), {} unexpected",
        criteria.len() - failed,
        criteria.len(),
        failed - unexpected,
        unexpected
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
