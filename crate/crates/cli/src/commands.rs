use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use peanoseg::imaging::{
    error_rate, labels_from_gray, load_grayscale, load_labels, read_pgm, save_observed,
    save_segmentation, synth_noise, synthetic, LabelImage,
};
use peanoseg::segment::{segment_with, Geometry};
use peanoseg::{build_context, build_scan, Method, Orientation, SemConfig};
use rayon::prelude::*;
use serde_json::json;

use crate::error::CliError;

const THREADS_VAR: &str = "PEANOSEG_THREADS";

fn check_noise(means: &[f64], variances: &[f64]) -> Result<(), CliError> {
    if means.is_empty() || means.len() != variances.len() {
        return Err(CliError::config(format!(
            "{} means and {} variances given; one of each per class is required",
            means.len(),
            variances.len()
        )));
    }
    if variances.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
        || means.iter().any(|m| !m.is_finite())
    {
        return Err(CliError::config(
            "means must be finite and variances nonnegative",
        ));
    }
    Ok(())
}

pub fn synth(
    truth: &Path,
    means: &[f64],
    variances: &[f64],
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    check_noise(means, variances)?;
    let labels = load_labels(truth, means.len()).map_err(|e| CliError::from(e).at(truth))?;
    let obs = synth_noise(&labels, means, variances, seed)?;
    let map = save_observed(&obs, out).map_err(|e| CliError::from(e).at(out))?;
    let meta = json!({
        "truth": truth.display().to_string(),
        "classes": means.len(),
        "means": means,
        "variances": variances,
        "seed": seed,
        "level_offset": map.offset,
        "level_scale": map.scale,
    });
    let mut sidecar = out.as_os_str().to_owned();
    sidecar.push(".json");
    std::fs::write(
        PathBuf::from(sidecar),
        serde_json::to_string_pretty(&meta)? + "\n",
    )?;
    Ok(())
}

pub struct SegmentJob {
    pub image: PathBuf,
    pub method: Method,
    pub classes: usize,
    pub config: SemConfig,
    pub crop: bool,
    pub out: PathBuf,
    pub csv: Option<PathBuf>,
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn segment(job: &SegmentJob) -> Result<(), CliError> {
    if job.classes == 0 {
        return Err(CliError::config("--classes must be at least 1"));
    }
    job.config.validate()?;
    let obs = load_grayscale(&job.image, job.crop).map_err(|e| CliError::from(e).at(&job.image))?;
    let start = Instant::now();
    let geometry = Geometry::new(obs.shape().order())?;
    let seg = segment_with(&obs, &geometry, job.method, job.classes, &job.config)?;
    let seconds = start.elapsed().as_secs_f64();
    save_segmentation(&seg.labels, &job.out).map_err(|e| CliError::from(e).at(&job.out))?;

    let Some(csv_path) = &job.csv else {
        return Ok(());
    };
    let fresh = std::fs::metadata(csv_path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(csv_path)
        .map_err(|e| CliError::from(e).at(csv_path))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record([
            "image",
            "method",
            "classes",
            "seed",
            "iters",
            "converged",
            "seconds",
            "means",
            "variances",
            "joint_h",
            "joint_v",
        ])?;
    }
    // evidential joints include the Omega row and column
    let params = &seg.params;
    let joint = |o| join(params.joint(o).as_slice());
    w.write_record([
        job.image.display().to_string(),
        job.method.to_string(),
        job.classes.to_string(),
        job.config.seed.to_string(),
        seg.iterations.to_string(),
        seg.converged.to_string(),
        format!("{seconds:.4}"),
        join(params.means()),
        join(params.variances()),
        joint(Orientation::Horizontal),
        joint(Orientation::Vertical),
    ])?;
    w.flush()?;
    Ok(())
}

/// Loads two label images, using as many classes as the busier one has
/// gray levels.
pub fn eval(truth: &Path, predicted: &Path) -> Result<f64, CliError> {
    let read = |p: &Path| read_pgm(p).map_err(|e| CliError::from(e).at(p));
    let (a, b) = (read(truth)?, read(predicted)?);
    let levels = |g: &peanoseg::GrayImage| {
        let mut v = g.samples.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    let k = levels(&a).max(levels(&b));
    let (a, b) = (labels_from_gray(&a, k)?, labels_from_gray(&b, k)?);
    Ok(error_rate(&a, &b)?)
}

pub struct BenchJob {
    pub truth: PathBuf,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub config: SemConfig,
    pub csv: Option<PathBuf>,
}

struct Cell {
    method: Method,
    seed: u64,
    error: f64,
    iters: usize,
    seconds: f64,
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::config(format!(
                "{THREADS_VAR} must be a positive integer, got '{v}'"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::config(e.to_string()))
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn bench(job: &BenchJob) -> Result<(), CliError> {
    check_noise(&job.means, &job.variances)?;
    if job.methods.is_empty() || job.seeds.is_empty() {
        return Err(CliError::config(
            "at least one method and one seed are required",
        ));
    }
    job.config.validate()?;
    let classes = job.means.len();
    let truth = load_labels(&job.truth, classes).map_err(|e| CliError::from(e).at(&job.truth))?;
    let geometry = Geometry::new(truth.shape().order())?;
    let name = job
        .truth
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();

    let grid: Vec<(Method, u64)> = job
        .methods
        .iter()
        .flat_map(|&m| job.seeds.iter().map(move |&s| (m, s)))
        .collect();
    let run = |&(method, seed): &(Method, u64)| -> Result<Cell, CliError> {
        run_cell(&truth, &geometry, method, seed, job)
    };
    let cells: Vec<Cell> = thread_pool()?
        .install(|| grid.par_iter().map(run).collect::<Vec<_>>())
        .into_iter()
        .collect::<Result<_, _>>()?;

    let sink: Box<dyn Write> = match &job.csv {
        Some(path) => {
            Box::new(std::fs::File::create(path).map_err(|e| CliError::from(e).at(path))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "image", "method", "seed", "error", "iters", "seconds", "error_sd",
    ])?;
    for c in &cells {
        w.write_record([
            name.clone(),
            c.method.to_string(),
            c.seed.to_string(),
            format!("{:.6}", c.error),
            c.iters.to_string(),
            format!("{:.4}", c.seconds),
            String::new(),
        ])?;
    }
    for &method in &job.methods {
        let mine = cells.iter().filter(|c| c.method == method);
        let (error, sd) = mean_sd(mine.clone().map(|c| c.error));
        let (iters, _) = mean_sd(mine.clone().map(|c| c.iters as f64));
        let (seconds, _) = mean_sd(mine.map(|c| c.seconds));
        w.write_record([
            name.clone(),
            method.to_string(),
            "mean".into(),
            format!("{error:.6}"),
            format!("{iters:.1}"),
            format!("{seconds:.4}"),
            format!("{sd:.6}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn run_cell(
    truth: &LabelImage,
    geometry: &Geometry,
    method: Method,
    seed: u64,
    job: &BenchJob,
) -> Result<Cell, CliError> {
    let obs = synth_noise(truth, &job.means, &job.variances, seed)?;
    let config = SemConfig {
        seed,
        ..job.config.clone()
    };
    let start = Instant::now();
    let seg = segment_with(&obs, geometry, method, truth.classes(), &config)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(Cell {
        method,
        seed,
        error: error_rate(truth, &seg.labels)?,
        iters: seg.iterations,
        seconds,
    })
}

pub fn scan(order: u32, with_context: bool) -> Result<(), CliError> {
    if order > 6 {
        return Err(CliError::config("printing is limited to order 6 (64 x 64)"));
    }
    let layout = build_scan(order)?;
    let width = layout.len().to_string().len();
    let mut out = io::stdout().lock();
    for row in layout.rank_grid() {
        let cells: Vec<String> = row.iter().map(|r| format!("{r:>width$}")).collect();
        writeln!(out, "{}", cells.join(" "))?;
    }
    if with_context {
        let ctx = build_context(&layout);
        writeln!(out)?;
        for pos in 0..layout.len() {
            let extras: Vec<String> = ctx
                .extras(pos)
                .iter()
                .map(|e| {
                    let o = match e.orientation {
                        Orientation::Horizontal => 'h',
                        Orientation::Vertical => 'v',
                    };
                    format!("{}{o}", e.position + 1)
                })
                .collect();
            writeln!(out, "{:>width$}: {}", pos + 1, extras.join(" "))?;
        }
    }
    Ok(())
}

pub fn generate(name: &str, order: u32, seed: u64, out: &Path) -> Result<(), CliError> {
    let image = synthetic::by_name(name, order, seed).ok_or_else(|| {
        CliError::config(format!(
            "unknown image '{name}' (expected one of {})",
            synthetic::SUITE.join(", ")
        ))
    })??;
    save_segmentation(&image, out).map_err(|e| CliError::from(e).at(out))?;
    Ok(())
}
