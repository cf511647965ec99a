//! Model comparison harness: the estimator suite, training and prediction
//! behind one [`TrainedModel`] type, evaluation reports, plot data,
//! persistence and the synthetic dataset generator.

pub mod persist;
pub mod plot;
pub mod report;
pub mod synthetic;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureSpec};
use crate::linear_models::{fit_ols, LinearModel};
use crate::metrics::MetricsReport;
use crate::neighbors::{fit_knn, KnnModel, DEFAULT_K};
use crate::svr::{self, fit_svr, KernelKind, KernelSpec, SvrConfig, SvrModel};
use crate::trees::{
    fit_forest, fit_gbr, fit_tree, ForestConfig, ForestModel, GbrConfig, GbrModel, TreeConfig,
    TreeNode,
};
use crate::{rng, Error, Result};

pub use persist::{load_model, save_model, FORMAT_VERSION};
pub use plot::{export_plot_data, PlotPoint, PlotSeries};
pub use report::{run_comparison, ComparisonReport, ReportRow};
pub use synthetic::generate_synthetic;

/// Rows used to train SVR models when the training split is larger.
pub const DEFAULT_SVR_SUBSAMPLE: usize = 2000;

/// Estimator family of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Training-mean baseline.
    Mean,
    Linear,
    Polynomial,
    Knn,
    Tree,
    SvrLinear,
    SvrPoly,
    SvrRbf,
    Forest,
    Gbr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::Mean,
        ModelKind::Linear,
        ModelKind::Polynomial,
        ModelKind::Knn,
        ModelKind::Tree,
        ModelKind::SvrLinear,
        ModelKind::SvrPoly,
        ModelKind::SvrRbf,
        ModelKind::Forest,
        ModelKind::Gbr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mean => "mean",
            ModelKind::Linear => "linear",
            ModelKind::Polynomial => "polynomial",
            ModelKind::Knn => "knn",
            ModelKind::Tree => "tree",
            ModelKind::SvrLinear => "svr_linear",
            ModelKind::SvrPoly => "svr_poly",
            ModelKind::SvrRbf => "svr_rbf",
            ModelKind::Forest => "forest",
            ModelKind::Gbr => "gbr",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// SVR hyperparameters plus the harness subsampling policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    /// `None` resolves to `1 / (d · Var(X))` on the training rows.
    pub gamma: Option<f64>,
    pub coef0: f64,
    pub degree: u32,
    pub tolerance: f64,
    pub max_passes: usize,
    /// Train on a stratified subsample of at most this many rows.
    pub subsample: Option<usize>,
    pub seed: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: svr::DEFAULT_C,
            epsilon: svr::DEFAULT_EPSILON,
            gamma: None,
            coef0: 0.0,
            degree: svr::DEFAULT_POLY_DEGREE,
            tolerance: svr::DEFAULT_TOLERANCE,
            max_passes: svr::DEFAULT_MAX_PASSES,
            subsample: Some(DEFAULT_SVR_SUBSAMPLE),
            seed: 42,
        }
    }
}

/// Kind-specific hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Mean,
    Linear,
    Polynomial { degree: u32 },
    Knn { k: usize, standardize: bool },
    Tree(TreeConfig),
    SvrLinear(SvrParams),
    SvrPoly(SvrParams),
    SvrRbf(SvrParams),
    Forest(ForestConfig),
    Gbr(GbrConfig),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Mean => ModelKind::Mean,
            ModelParams::Linear => ModelKind::Linear,
            ModelParams::Polynomial { .. } => ModelKind::Polynomial,
            ModelParams::Knn { .. } => ModelKind::Knn,
            ModelParams::Tree(_) => ModelKind::Tree,
            ModelParams::SvrLinear(_) => ModelKind::SvrLinear,
            ModelParams::SvrPoly(_) => ModelKind::SvrPoly,
            ModelParams::SvrRbf(_) => ModelKind::SvrRbf,
            ModelParams::Forest(_) => ModelKind::Forest,
            ModelParams::Gbr(_) => ModelKind::Gbr,
        }
    }

    /// Default hyperparameters for `kind`.
    pub fn defaults(kind: ModelKind) -> ModelParams {
        match kind {
            ModelKind::Mean => ModelParams::Mean,
            ModelKind::Linear => ModelParams::Linear,
            ModelKind::Polynomial => ModelParams::Polynomial { degree: 2 },
            ModelKind::Knn => ModelParams::Knn {
                k: DEFAULT_K,
                standardize: false,
            },
            ModelKind::Tree => ModelParams::Tree(TreeConfig::with_depth(3)),
            ModelKind::SvrLinear => ModelParams::SvrLinear(SvrParams::default()),
            ModelKind::SvrPoly => ModelParams::SvrPoly(SvrParams::default()),
            ModelKind::SvrRbf => ModelParams::SvrRbf(SvrParams::default()),
            ModelKind::Forest => ModelParams::Forest(ForestConfig::default()),
            ModelKind::Gbr => ModelParams::Gbr(GbrConfig::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Polynomial { degree } if !(1..=2).contains(degree) => {
                Err(Error::invalid(format!("polynomial degree {degree} is not 1 or 2")))
            }
            ModelParams::Knn { k: 0, .. } => Err(Error::invalid("k must be at least 1")),
            ModelParams::Tree(cfg) if cfg.max_depth == Some(0) => {
                Err(Error::invalid("max_depth must be at least 1"))
            }
            ModelParams::Forest(cfg) if cfg.tree_count == 0 => {
                Err(Error::invalid("tree_count must be at least 1"))
            }
            ModelParams::Gbr(cfg) if cfg.max_depth == 0 || !(cfg.learning_rate > 0.0) => Err(
                Error::invalid("gbr needs max_depth >= 1 and a positive learning rate"),
            ),
            ModelParams::SvrLinear(p) | ModelParams::SvrPoly(p) | ModelParams::SvrRbf(p)
                if !(p.c > 0.0) || !(p.epsilon >= 0.0) || p.subsample == Some(0) =>
            {
                Err(Error::invalid("svr needs C > 0, epsilon >= 0 and a non-empty subsample"))
            }
            _ => Ok(()),
        }
    }
}

/// A named model configuration: one row of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub display_name: String,
    pub params: ModelParams,
}

impl ModelSpec {
    pub fn new(display_name: impl Into<String>, params: ModelParams) -> Self {
        ModelSpec {
            display_name: display_name.into(),
            params,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
}

/// The eight reference configurations, in results-table order.
///
/// The "SVR Kernel RBF" row uses a polynomial kernel: the reference setup
/// names the row RBF but configures `kernel='poly'`. Use
/// [`ModelParams::SvrRbf`] for a true RBF kernel.
pub fn default_model_suite() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new("Linear Regression", ModelParams::Linear),
        ModelSpec::new("Polynomial Regression", ModelParams::Polynomial { degree: 2 }),
        ModelSpec::new(
            "K-Nearest Neighbors",
            ModelParams::Knn {
                k: 10,
                standardize: false,
            },
        ),
        ModelSpec::new(
            "Decision Tree Regressor",
            ModelParams::Tree(TreeConfig {
                max_depth: Some(3),
                min_samples_split: 2,
                seed: 42,
            }),
        ),
        ModelSpec::new("SVR Kernel Lineal", ModelParams::SvrLinear(SvrParams::default())),
        ModelSpec::new("SVR Kernel RBF", ModelParams::SvrPoly(SvrParams::default())),
        ModelSpec::new(
            "Random Forest Regressor",
            ModelParams::Forest(ForestConfig {
                tree_count: 100,
                bootstrap: true,
                tree_config: TreeConfig::default(),
                seed: 42,
            }),
        ),
        ModelSpec::new(
            "Gradient Boosting Regressor",
            ModelParams::Gbr(GbrConfig {
                stage_count: 100,
                learning_rate: 0.2,
                max_depth: 5,
                seed: 42,
            }),
        ),
    ]
}

/// Learned parameters of any supported estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Mean { value: f64, input_dim: usize },
    Linear(LinearModel),
    Knn(KnnModel),
    Tree { root: TreeNode, input_dim: usize },
    Svr(SvrModel),
    Forest { model: ForestModel, input_dim: usize },
    Gbr { model: GbrModel, input_dim: usize },
}

impl Estimator {
    pub fn input_dim(&self) -> usize {
        match self {
            Estimator::Mean { input_dim, .. }
            | Estimator::Tree { input_dim, .. }
            | Estimator::Forest { input_dim, .. }
            | Estimator::Gbr { input_dim, .. } => *input_dim,
            Estimator::Linear(m) => m.input_dim,
            Estimator::Knn(m) => m.n_features(),
            Estimator::Svr(m) => m.input_dim,
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        let d = self.input_dim();
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        match self {
            Estimator::Mean { value, .. } => Ok(*value),
            Estimator::Linear(m) => m.predict(row),
            Estimator::Knn(m) => m.predict(row),
            Estimator::Tree { root, .. } => root.predict(row),
            Estimator::Svr(m) => m.predict(row),
            Estimator::Forest { model, .. } => model.predict(row),
            Estimator::Gbr { model, .. } => model.predict(row),
        }
    }
}

/// A fitted model with everything needed to featurize new inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub display_name: String,
    pub feature_spec: FeatureSpec,
    pub params: ModelParams,
    /// Rows the estimator was actually fitted on (after any subsampling).
    pub training_rows: usize,
    /// Held-out scores recorded at training time, when available.
    pub metrics: Option<MetricsReport>,
    pub notes: Vec<String>,
    pub estimator: Estimator,
}

impl TrainedModel {
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        self.estimator.predict(row)
    }

    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

/// Stratified subsample of at most `size` rows: targets are ranked into ten
/// equal-count strata and each stratum contributes in proportion to its size.
/// Returned indices are ascending.
pub fn stratified_subsample(target: &[f64], size: usize, seed: u64) -> Vec<usize> {
    let n = target.len();
    if size >= n {
        return (0..n).collect();
    }
    const STRATA: usize = 10;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| target[a].total_cmp(&target[b]).then(a.cmp(&b)));
    let strata: Vec<&[usize]> = (0..STRATA)
        .map(|s| &order[s * n / STRATA..(s + 1) * n / STRATA])
        .collect();

    // largest-remainder allocation
    let mut quota: Vec<usize> = strata.iter().map(|s| s.len() * size / n).collect();
    let mut rest: Vec<(usize, usize)> = strata
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.len() * size % n))
        .collect();
    rest.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let missing = size - quota.iter().sum::<usize>();
    for &(i, _) in rest.iter().take(missing) {
        quota[i] += 1;
    }

    let mut rng = rng::seeded(seed);
    let mut picked: Vec<usize> = strata
        .iter()
        .zip(&quota)
        .flat_map(|(s, &q)| {
            index::sample(&mut rng, s.len(), q)
                .into_iter()
                .map(|k| s[k])
                .collect::<Vec<_>>()
        })
        .collect();
    picked.sort_unstable();
    picked
}

fn svr_model(
    train: &Dataset,
    kind: KernelKind,
    p: &SvrParams,
    notes: &mut Vec<String>,
) -> Result<(Estimator, usize)> {
    let sample;
    let data = match p.subsample {
        Some(m) if m < train.n_samples() => {
            sample = train.subset(&stratified_subsample(train.target(), m, p.seed));
            notes.push(format!(
                "trained on a stratified subsample of {m} of {} rows (seed {})",
                train.n_samples(),
                p.seed
            ));
            &sample
        }
        _ => train,
    };
    let gamma = p.gamma.unwrap_or_else(|| svr::scale_gamma(data));
    let kernel = match kind {
        KernelKind::Linear => KernelSpec::linear(),
        KernelKind::Polynomial => KernelSpec::polynomial(gamma, p.coef0, p.degree),
        KernelKind::Rbf => KernelSpec::rbf(gamma),
    };
    let cfg = SvrConfig {
        kernel,
        c: p.c,
        epsilon: p.epsilon,
        tolerance: p.tolerance,
        max_passes: p.max_passes,
        seed: p.seed,
    };
    let model = fit_svr(data, &cfg)?;
    if !model.converged {
        notes.push(format!(
            "dual solver stopped after {} passes without meeting tolerance {}",
            p.max_passes, p.tolerance
        ));
    }
    Ok((Estimator::Svr(model), data.n_samples()))
}

/// Fits `spec` on `train`. `feature_spec` describes how `train` was built and
/// travels with the model for later featurization.
pub fn fit_model(spec: &ModelSpec, train: &Dataset, feature_spec: &FeatureSpec) -> Result<TrainedModel> {
    spec.params.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("empty training set"));
    }
    if train.n_features() != feature_spec.n_features() {
        return Err(Error::DimensionMismatch {
            expected: feature_spec.n_features(),
            got: train.n_features(),
        });
    }
    let d = train.n_features();
    let mut notes = Vec::new();
    let mut rows = train.n_samples();
    let estimator = match &spec.params {
        ModelParams::Mean => Estimator::Mean {
            value: train.target().iter().sum::<f64>() / rows as f64,
            input_dim: d,
        },
        ModelParams::Linear => {
            Estimator::Linear(fit_ols(train, feature_spec.polynomial_degree)?)
        }
        ModelParams::Polynomial { degree } => Estimator::Linear(fit_ols(train, *degree)?),
        ModelParams::Knn { k, standardize } => Estimator::Knn(fit_knn(train, *k, *standardize)?),
        ModelParams::Tree(cfg) => Estimator::Tree {
            root: fit_tree(train, cfg)?,
            input_dim: d,
        },
        ModelParams::SvrLinear(p) => {
            let (e, r) = svr_model(train, KernelKind::Linear, p, &mut notes)?;
            rows = r;
            e
        }
        ModelParams::SvrPoly(p) => {
            let (e, r) = svr_model(train, KernelKind::Polynomial, p, &mut notes)?;
            rows = r;
            e
        }
        ModelParams::SvrRbf(p) => {
            let (e, r) = svr_model(train, KernelKind::Rbf, p, &mut notes)?;
            rows = r;
            e
        }
        ModelParams::Forest(cfg) => Estimator::Forest {
            model: fit_forest(train, cfg)?,
            input_dim: d,
        },
        ModelParams::Gbr(cfg) => Estimator::Gbr {
            model: fit_gbr(train, cfg)?,
            input_dim: d,
        },
    };
    Ok(TrainedModel {
        kind: spec.kind(),
        display_name: spec.display_name.clone(),
        feature_spec: *feature_spec,
        params: spec.params,
        training_rows: rows,
        metrics: None,
        notes,
        estimator,
    })
}
