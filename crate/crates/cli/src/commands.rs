//! Subcommand implementations.
//!
//! Every command validates and computes before writing, so a failing run
//! leaves no partial output, and exits zero only after all declared outputs
//! are on disk.

use crate::config::RunConfig;
use crate::CliError;
use lapwave::data::{
    generate_synthetic, load_dataset, load_single_graph, write_dataset, LoadOptions, SyntheticSpec,
};
use lapwave::eigen::eigendecompose;
use lapwave::error::Error;
use lapwave::graph::build_laplacian;
use lapwave::matrix::DenseMatrix;
use lapwave::model::TransformMode;
use lapwave::pipeline::{
    self, edge_saliency, evaluate, geometry_for, load_snapshot, precompute_inputs, save_snapshot,
    top_k_edges, MetricsReport, ModelSnapshot,
};
use lapwave::rng::RngStreams;
use lapwave::spectral::{reconstruct, reconstruction_grid, transform_approx, transform_exact};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

type CliResult = Result<(), CliError>;

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Core(Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require_out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    cfg.out_dir
        .clone()
        .ok_or_else(|| CliError::Config(vec!["out.dir: an output directory is required (--out)".into()]))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn thread_pool(workers: usize) -> Option<rayon::ThreadPool> {
    // lapwave re-exports nothing from rayon; pool only shapes parallelism.
    (workers > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
    })
}

fn matrix_csv(m: &DenseMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("string write");
        }
        out.push('\n');
    }
    out
}

pub fn inspect(cfg: &RunConfig) -> CliResult {
    print!("{}", cfg.resolved_text());
    Ok(())
}

pub fn transform(cfg: &RunConfig, graph: &Path, scales_flag: Option<&str>) -> CliResult {
    let out_dir = require_out_dir(cfg)?;
    let scales: Vec<f64> = match scales_flag {
        Some(text) => text
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Config(vec![format!("--scales: cannot parse '{text}'")]))?,
        None => cfg.transform_scales.clone().ok_or_else(|| {
            CliError::Config(vec![
                "transform.scales: scales are required (or pass --scales)".into(),
            ])
        })?,
    };
    if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0)) {
        return Err(CliError::Config(vec![
            "transform.scales: scales must be positive".into(),
        ]));
    }

    let opts = LoadOptions {
        absolute_value: cfg.absolute_value,
    };
    let (adjacency, warnings) = load_single_graph::<f64>(graph, opts)?;
    print_warnings(&warnings);
    let laplacian = build_laplacian(&adjacency, cfg.normalized);
    let eig = eigendecompose(&laplacian)?;

    let mut slices = Vec::with_capacity(scales.len());
    let mut report = String::new();
    for (i, s) in scales.iter().enumerate() {
        writeln!(report, "scale_{i} = {s}").expect("string write");
        let exact = transform_exact(&eig, cfg.kernel, *s);
        match cfg.mode {
            TransformMode::Exact => slices.push(exact),
            TransformMode::Approx => {
                let approx = transform_approx(&laplacian, cfg.kernel, *s, cfg.taylor_order)?;
                let discrepancy =
                    exact.frobenius_distance(&approx) / exact.fro_norm().max(1e-12);
                writeln!(report, "approx_discrepancy_scale_{i} = {discrepancy:e}")
                    .expect("string write");
                slices.push(approx);
            }
        }
    }
    if cfg.mode == TransformMode::Approx {
        writeln!(report, "approx_order = {}", cfg.taylor_order).expect("string write");
    }

    let grid = reconstruction_grid(&eig, 400);
    let rebuilt = reconstruct(&eig, cfg.kernel, &grid)?;
    let denom = laplacian.matrix().fro_norm().max(1e-12);
    let rec_error = rebuilt.frobenius_distance(laplacian.matrix()) / denom;
    writeln!(report, "reconstruction_relative_frobenius_error = {rec_error:e}")
        .expect("string write");

    ensure_dir(&out_dir)?;
    for (i, slice) in slices.iter().enumerate() {
        write_text(&out_dir.join(format!("slice_{i:02}.csv")), &matrix_csv(slice))?;
    }
    write_text(&out_dir.join("report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

pub fn synth(cfg: &RunConfig) -> CliResult {
    let out_dir = require_out_dir(cfg)?;
    let mut problems = Vec::new();
    let n = cfg.synth_n.unwrap_or_else(|| {
        problems.push("synth.n: required".to_string());
        0
    });
    let sigma = cfg.synth_sigma.unwrap_or_else(|| {
        problems.push("synth.sigma: required".to_string());
        0.0
    });
    let counts = cfg.synth_counts.clone().unwrap_or_else(|| {
        problems.push("synth.counts: required".to_string());
        Vec::new()
    });
    let template_paths = cfg.synth_templates.clone().unwrap_or_else(|| {
        problems.push("synth.templates: required".to_string());
        Vec::new()
    });
    if !problems.is_empty() {
        return Err(CliError::Config(problems));
    }

    let opts = LoadOptions {
        absolute_value: cfg.absolute_value,
    };
    let mut templates = Vec::with_capacity(template_paths.len());
    for path in &template_paths {
        let (adjacency, warnings) = load_single_graph::<f64>(path, opts)?;
        print_warnings(&warnings);
        templates.push(adjacency.weights().clone());
    }
    let spec = SyntheticSpec {
        n,
        templates,
        sigma,
        counts,
        seed: cfg.seed,
    };
    let dataset = generate_synthetic(&spec)?;
    ensure_dir(&out_dir)?;
    let manifest = write_dataset(&out_dir, &dataset)?;
    println!(
        "wrote {} samples across {} classes to {}",
        dataset.len(),
        dataset.n_classes(),
        manifest.display()
    );
    Ok(())
}

fn load_configured_dataset(cfg: &RunConfig) -> Result<lapwave::Dataset64, CliError> {
    let manifest = cfg.manifest.clone().ok_or_else(|| {
        CliError::Config(vec!["data.manifest: a dataset manifest is required".into()])
    })?;
    let loaded = load_dataset::<f64>(
        &manifest,
        LoadOptions {
            absolute_value: cfg.absolute_value,
        },
    )?;
    print_warnings(&loaded.warnings);
    Ok(loaded.dataset)
}

fn metrics_csv(rows: &[(String, &MetricsReport)], summary: Option<&pipeline::CvSummary>) -> String {
    let mut out = MetricsReport::csv_header();
    out.push('\n');
    for (tag, m) in rows {
        out.push_str(&m.csv_row(tag));
        out.push('\n');
    }
    if let Some(s) = summary {
        writeln!(
            out,
            "mean,{},{},{}",
            s.mean_accuracy, s.mean_weighted_precision, s.mean_weighted_recall
        )
        .expect("string write");
        writeln!(
            out,
            "std,{},{},{}",
            s.std_accuracy, s.std_weighted_precision, s.std_weighted_recall
        )
        .expect("string write");
    }
    out
}

pub fn train(cfg: &RunConfig) -> CliResult {
    let out_dir = require_out_dir(cfg)?;
    let dataset = load_configured_dataset(cfg)?;
    let geometry = geometry_for(&dataset, cfg.scale_count, cfg.widths.clone(), cfg.biases)?;
    let train_cfg = cfg.train_config();
    let spectral = cfg.spectral_config();

    let pool = thread_pool(cfg.workers);
    let run = || -> Result<_, Error> {
        let inputs = precompute_inputs(&dataset, &spectral, cfg.workers)?;
        let subset: Vec<usize> = (0..dataset.len()).collect();
        let streams = RngStreams::new(cfg.seed);
        let output = pipeline::train(
            &inputs,
            &dataset.labels(),
            &subset,
            &geometry,
            cfg.kernel,
            &train_cfg,
            cfg.scale_init_max,
            &streams,
        )?;
        let metrics = evaluate(
            &output.params,
            cfg.kernel,
            &train_cfg,
            &inputs,
            &dataset.labels(),
            &subset,
        )?;
        Ok((output, metrics))
    };
    let (output, metrics) = match pool {
        Some(pool) => pool.install(run),
        None => run(),
    }?;

    ensure_dir(&out_dir)?;
    write_text(&out_dir.join("run_manifest.conf"), &cfg.resolved_text())?;
    write_text(&out_dir.join("metrics.json"), &metrics.to_json())?;
    write_text(
        &out_dir.join("metrics.csv"),
        &metrics_csv(&[("train".to_string(), &metrics)], None),
    )?;
    write_text(&out_dir.join("history.csv"), &output.history.to_csv())?;
    let snapshot = ModelSnapshot {
        kernel: cfg.kernel,
        spectral,
        params: output.params,
    };
    save_snapshot(&out_dir.join("params.json"), &snapshot)?;
    println!(
        "trained {} epochs; training accuracy {:.4}",
        train_cfg.epochs, metrics.accuracy
    );
    Ok(())
}

pub fn cross_validate(cfg: &RunConfig) -> CliResult {
    let out_dir = require_out_dir(cfg)?;
    let dataset = load_configured_dataset(cfg)?;
    let geometry = geometry_for(&dataset, cfg.scale_count, cfg.widths.clone(), cfg.biases)?;
    let train_cfg = cfg.train_config();
    let spectral = cfg.spectral_config();

    let pool = thread_pool(cfg.workers);
    let run = || {
        pipeline::cross_validate(
            &dataset,
            &geometry,
            cfg.kernel,
            &spectral,
            &train_cfg,
            cfg.folds,
            cfg.scale_init_max,
            cfg.workers,
        )
    };
    let outcome = match pool {
        Some(pool) => pool.install(run),
        None => run(),
    }?;

    ensure_dir(&out_dir)?;
    write_text(&out_dir.join("run_manifest.conf"), &cfg.resolved_text())?;
    let mut rows = Vec::new();
    for fold in &outcome.folds {
        let tag = fold.fold.to_string();
        write_text(
            &out_dir.join(format!("fold_{tag}_metrics.json")),
            &fold.metrics.to_json(),
        )?;
        write_text(
            &out_dir.join(format!("fold_{tag}_history.csv")),
            &fold.history.to_csv(),
        )?;
        let snapshot = ModelSnapshot {
            kernel: cfg.kernel,
            spectral,
            params: fold.params.clone(),
        };
        save_snapshot(&out_dir.join(format!("fold_{tag}_params.json")), &snapshot)?;
        rows.push((tag, &fold.metrics));
    }
    write_text(
        &out_dir.join("metrics.csv"),
        &metrics_csv(&rows, Some(&outcome.summary)),
    )?;
    write_text(
        &out_dir.join("summary.json"),
        &serde_json_pretty(&outcome.summary)?,
    )?;
    println!(
        "{}-fold cv: accuracy {:.4} +/- {:.4} (majority baseline {:.4})",
        outcome.summary.folds,
        outcome.summary.mean_accuracy,
        outcome.summary.std_accuracy,
        outcome.summary.majority_baseline
    );
    Ok(())
}

fn serde_json_pretty<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Core(Error::invalid(format!("serialization failed: {e}"))))
}

pub fn saliency(cfg: &RunConfig, snapshot_path: &Path, names_flag: Option<&Path>) -> CliResult {
    let out_dir = require_out_dir(cfg)?;
    let snapshot: ModelSnapshot<f64> = load_snapshot(snapshot_path)?;
    let saliency = edge_saliency(&snapshot.params);
    let top = top_k_edges(&saliency, cfg.top_k)?;

    let names_path = names_flag.map(Path::to_path_buf).or_else(|| cfg.names.clone());
    let names = match &names_path {
        Some(path) => Some(load_names(path)?),
        None => None,
    };

    let mut top_csv = String::from(if names.is_some() {
        "row,col,value,row_name,col_name\n"
    } else {
        "row,col,value\n"
    });
    for (row, col, value) in &top {
        match &names {
            Some(map) => {
                let blank = String::new();
                let rn = map.get(row).unwrap_or(&blank);
                let cn = map.get(col).unwrap_or(&blank);
                writeln!(top_csv, "{row},{col},{value},{rn},{cn}").expect("string write");
            }
            None => writeln!(top_csv, "{row},{col},{value}").expect("string write"),
        }
    }

    ensure_dir(&out_dir)?;
    write_text(&out_dir.join("saliency.csv"), &saliency.to_csv())?;
    write_text(&out_dir.join("top_edges.csv"), &top_csv)?;
    println!(
        "saliency over {} nodes written; top edge ({}, {})",
        saliency.n, top[0].0, top[0].1
    );
    Ok(())
}

fn load_names(path: &Path) -> Result<HashMap<usize, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (index, name) = trimmed.split_once(',').ok_or_else(|| {
            CliError::Core(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: "expected 'index,name'".to_string(),
            })
        })?;
        let index: usize = index.trim().parse().map_err(|_| {
            CliError::Core(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("'{}' is not an index", index.trim()),
            })
        })?;
        map.insert(index, name.trim().to_string());
    }
    Ok(map)
}
