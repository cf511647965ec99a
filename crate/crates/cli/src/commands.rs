use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};

use heliocast_client::Client;
use heliocast_core::analysis::{correlation_matrix, select_variables, TARGET_LABEL};
use heliocast_core::api::EVALUATION_FILE;
use heliocast_core::dataset::{
    clean, extract_features, parse_records, split, summarize, write_records, FeatureSpec, Record,
};
use heliocast_core::harness::persist::write_atomic;
use heliocast_core::harness::synthetic::generate_synthetic_from;
use heliocast_core::harness::{
    default_model_suite, export_plot_data, fit_model, load_model, run_comparison, save_model,
    ModelKind, ModelParams, ModelSpec,
};
use heliocast_core::metrics::score;
use heliocast_service::{ServiceConfig, ProviderKind};

use crate::*;

type CmdResult = Result<(), Box<dyn Error>>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Summarize(a) => summarize_cmd(a),
        Command::Correlate(a) => correlate(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::ExportPlots(a) => export_plots(a),
        Command::Generate(a) => generate(a),
        Command::Serve(a) => serve(a),
        Command::Forecast(a) => forecast(a),
        Command::Models(a) => models(a),
    }
}

fn load_records(args: &DataArgs) -> Result<Vec<Record>, Box<dyn Error>> {
    let file = fs::File::open(&args.data)
        .map_err(|e| format!("{}: {e}", args.data.display()))?;
    let records = parse_records(std::io::BufReader::new(file))
        .map_err(|e| format!("{}: {e}", args.data.display()))?;
    Ok(clean(&records, args.clamp_negative))
}

impl FeatureArgs {
    fn spec(&self) -> FeatureSpec {
        FeatureSpec {
            use_temperature: self.features.contains(&Feature::Temperature),
            use_hour: self.features.contains(&Feature::Hour),
            use_month: self.features.contains(&Feature::Month),
            polynomial_degree: 1,
        }
    }
}

fn ensure_parent(path: &Path) -> Result<(), Box<dyn Error>> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    ensure_parent(path)?;
    write_atomic(path, bytes)?;
    Ok(())
}

fn summarize_cmd(a: SummarizeArgs) -> CmdResult {
    let table = summarize(&load_records(&a.data)?)?;
    print!("{table}");
    if let Some(path) = a.json {
        write_file(&path, serde_json::to_string_pretty(&table)?.as_bytes())?;
    }
    Ok(())
}

fn correlate(a: CorrelateArgs) -> CmdResult {
    let records = load_records(&a.data)?;
    let ds = extract_features(&records, &a.features.spec())?;
    let cm = correlation_matrix(&ds)?;
    write_file(&a.out, cm.to_csv().as_bytes())?;
    for label in cm.labels.iter().filter(|l| *l != TARGET_LABEL) {
        println!("r({label}, {TARGET_LABEL}) = {:.4}", cm.get(label, TARGET_LABEL)?);
    }
    let chosen = select_variables(&cm, TARGET_LABEL, a.threshold)?;
    println!("selected (|r| >= {}): {}", a.threshold, chosen.join(", "));
    println!("wrote {}", a.out.display());
    Ok(())
}

fn display_name(kind: ModelKind) -> String {
    default_model_suite()
        .into_iter()
        .find(|s| s.kind() == kind)
        .map(|s| s.display_name)
        .unwrap_or_else(|| match kind {
            ModelKind::Mean => "Mean Baseline".to_string(),
            ModelKind::SvrRbf => "SVR Kernel RBF (radial)".to_string(),
            other => other.to_string(),
        })
}

fn apply_overrides(params: &mut ModelParams, h: &HyperArgs) {
    match params {
        ModelParams::Polynomial { degree } => {
            if let Some(d) = h.degree {
                *degree = d;
            }
        }
        ModelParams::Knn { k, standardize } => {
            if let Some(v) = h.k {
                *k = v;
            }
            *standardize |= h.standardize;
        }
        ModelParams::Tree(cfg) => {
            if h.max_depth.is_some() {
                cfg.max_depth = h.max_depth;
            }
        }
        ModelParams::Forest(cfg) => {
            if let Some(n) = h.trees {
                cfg.tree_count = n;
            }
            if h.max_depth.is_some() {
                cfg.tree_config.max_depth = h.max_depth;
            }
        }
        ModelParams::Gbr(cfg) => {
            if let Some(n) = h.stages {
                cfg.stage_count = n;
            }
            if let Some(lr) = h.learning_rate {
                cfg.learning_rate = lr;
            }
            if let Some(d) = h.max_depth {
                cfg.max_depth = d;
            }
        }
        ModelParams::SvrLinear(p) | ModelParams::SvrPoly(p) | ModelParams::SvrRbf(p) => {
            if let Some(c) = h.c {
                p.c = c;
            }
            if let Some(e) = h.epsilon {
                p.epsilon = e;
            }
            if h.gamma.is_some() {
                p.gamma = h.gamma;
            }
            if let Some(n) = h.svr_subsample {
                p.subsample = (n > 0).then_some(n);
            }
        }
        ModelParams::Mean | ModelParams::Linear => {}
    }
}

fn seed_params(params: &mut ModelParams, seed: u64) {
    match params {
        ModelParams::Tree(cfg) => cfg.seed = seed,
        ModelParams::Forest(cfg) => cfg.seed = seed,
        ModelParams::Gbr(cfg) => cfg.seed = seed,
        ModelParams::SvrLinear(p) | ModelParams::SvrPoly(p) | ModelParams::SvrRbf(p) => p.seed = seed,
        _ => {}
    }
}

fn train(a: TrainArgs) -> CmdResult {
    let spec = a.features.spec();
    let ds = extract_features(&load_records(&a.data)?, &spec)?;
    let (train, test) = split(&ds, a.split.split, a.split.seed)?;
    let mut params = ModelParams::defaults(a.model);
    apply_overrides(&mut params, &a.hyper);
    seed_params(&mut params, a.split.seed);
    let mut model = fit_model(&ModelSpec::new(display_name(a.model), params), &train, &spec)?;
    let metrics = score(test.target(), &model.predict_rows(test.features())?)?;
    model.metrics = Some(metrics);
    ensure_parent(&a.out)?;
    save_model(&model, &a.out)?;
    println!(
        "{} trained on {} rows; test rmse {:.2} mae {:.2} r2 {}",
        model.display_name,
        model.training_rows,
        metrics.rmse,
        metrics.mae,
        metrics.r2.map_or("n/a".into(), |r| format!("{r:.4}"))
    );
    for note in &model.notes {
        println!("note: {note}");
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> CmdResult {
    let spec = a.features.spec();
    let ds = extract_features(&load_records(&a.data)?, &spec)?;
    let mut suite = default_model_suite();
    for s in &mut suite {
        seed_params(&mut s.params, a.split.seed);
        if let ModelParams::SvrLinear(p) | ModelParams::SvrPoly(p) = &mut s.params {
            if let Some(n) = a.svr_subsample {
                p.subsample = (n > 0).then_some(n);
            }
        }
        if let (RbfRowKernel::Rbf, ModelParams::SvrPoly(p)) = (a.rbf_row_kernel, s.params) {
            s.params = ModelParams::SvrRbf(p);
        }
    }
    let report = run_comparison(&ds, &suite, &spec, a.split.split, a.split.seed)?;
    let json = report.to_json()?;
    fs::create_dir_all(&a.out).map_err(|e| format!("{}: {e}", a.out.display()))?;
    write_file(&a.out.join("comparison.csv"), report.to_csv().as_bytes())?;
    write_file(&a.out.join("comparison.txt"), report.to_string().as_bytes())?;
    write_file(&a.out.join("comparison.json"), json.as_bytes())?;
    if let Some(dir) = &a.publish {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        write_file(&dir.join(EVALUATION_FILE), json.as_bytes())?;
    }
    print!("{report}");
    if report.rows.iter().any(|r| r.error.is_some()) {
        return Err("one or more models failed; see the report footnotes".into());
    }
    Ok(())
}

fn export_plots(a: ExportPlotsArgs) -> CmdResult {
    let model = load_model(&a.model)?;
    let records = load_records(&a.data)?;
    let series = export_plot_data(&model, &records, a.day, &model.feature_spec)?;
    let out = a
        .out
        .unwrap_or_else(|| PathBuf::from(format!("plot-{}.csv", a.day)));
    write_file(&out, series.to_csv().as_bytes())?;
    println!("{} points for {} ({}) -> {}", series.points.len(), a.day, series.display_name, out.display());
    Ok(())
}

fn generate(a: GenerateArgs) -> CmdResult {
    let records = generate_synthetic_from(a.start, a.days, a.seed)?;
    let mut buf = Vec::new();
    write_records(&mut buf, &records)?;
    write_file(&a.out, &buf)?;
    println!("wrote {} records to {}", records.len(), a.out.display());
    Ok(())
}

fn runtime() -> std::io::Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build()
}

fn serve(a: ServeArgs) -> CmdResult {
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
    let cfg = ServiceConfig {
        bind_addr: a.bind,
        model_dir: a.model_dir,
        provider: a.provider.parse::<ProviderKind>()?,
        api_key: std::env::var("WEATHER_API_KEY").ok(),
        base_url: a.weather_base_url,
        ..ServiceConfig::default()
    };
    runtime()?.block_on(heliocast_service::run(cfg)).map_err(|e| e as Box<dyn Error>)
}

fn forecast(a: ForecastArgs) -> CmdResult {
    let client = Client::new(&a.url.url);
    let points = runtime()?.block_on(client.forecast(&a.model, a.hours, a.clamp))?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&points)?);
        return Ok(());
    }
    println!("{:<20}{:>15}{:>15}", "timestamp", "temperature_k", "predicted_wm2");
    for p in &points {
        println!(
            "{:<20}{:>15.2}{:>15.2}",
            p.timestamp.format("%Y-%m-%d %H:%M"),
            p.temperature_k,
            p.predicted_wm2
        );
    }
    Ok(())
}

fn models(a: UrlArgs) -> CmdResult {
    let client = Client::new(&a.url);
    let models = runtime()?.block_on(client.models())?;
    println!("{:<20}{:<14}{:<32}{:>10}", "model_id", "kind", "name", "r2");
    for m in &models {
        let r2 = m
            .metrics
            .and_then(|x| x.r2)
            .map_or("n/a".to_string(), |r| format!("{r:.4}"));
        println!("{:<20}{:<14}{:<32}{:>10}", m.model_id, m.kind.as_str(), m.display_name, r2);
    }
    Ok(())
}
