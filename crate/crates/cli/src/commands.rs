//! Subcommand bodies. Every artifact carries the tool version and the run
//! configuration: JSON files in an envelope, CSV files as leading `#` lines,
//! SVG files in an XML comment.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rpeqda::data::{format_f64, write_csv};
use rpeqda::eval::{loocv, run_scheme_experiment, table_csv, theta_lower_bound, SchemeExperiment};
use rpeqda::model_file::{load_model, save_model, StorageMode};
use rpeqda::qda::argmax_first;
use rpeqda::rng::mix_all;
use rpeqda::{Dataset, Error, Result, RpeConfig, RpeModel, VERSION};
use serde_json::{json, Value};

use crate::svg;
use crate::{BenchArgs, CvArgs, KlDiagArgs, PredictArgs, SimulateArgs, TrainArgs, Viz2dArgs};

fn provenance(run: &Value) -> Vec<String> {
    vec![format!("tool_version: {VERSION}"), format!("run_config: {run}")]
}

fn csv_preamble(run: &Value) -> String {
    provenance(run).iter().map(|l| format!("# {l}\n")).collect()
}

fn envelope(run: &Value, key: &str, body: Value) -> String {
    let mut map = serde_json::Map::new();
    map.insert("tool_version".into(), json!(VERSION));
    map.insert("run_config".into(), run.clone());
    map.insert(key.into(), body);
    serde_json::to_string_pretty(&Value::Object(map)).expect("json serializes") + "\n"
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("json serializes")
}

pub fn bench(a: &BenchArgs, run: &Value) -> Result<()> {
    let mut ps: Vec<usize> = Vec::new();
    for &p in a.p.iter().chain(&a.p_list) {
        if !ps.contains(&p) {
            ps.push(p);
        }
    }
    if ps.is_empty() {
        return Err(Error::InvalidParameter("give at least one dimension with --p or --p-list".into()));
    }
    create_dir(&a.out)?;
    let mut reports = Vec::new();
    let mut timings = Vec::new();
    for &family in &a.family {
        let config = a.ensemble.config(family);
        for &p in &ps {
            let mut exp = SchemeExperiment::new(a.scheme, p, a.reps, a.data_seed);
            exp.n_train_per_class = a.n_train;
            exp.n_test_per_class = a.n_test;
            let start = Instant::now();
            let report = run_scheme_experiment(&exp, &config)?;
            let total = start.elapsed().as_secs_f64();
            eprintln!("{} p = {p} {}: {} over {} reps ({total:.1}s)", a.scheme, report.method_label(), report.cell(), a.reps);
            timings.push(json!({
                "identifier": report.identifier,
                "p": p,
                "method": report.method_label(),
                "total_seconds": total,
                "seconds_per_replicate": report.seconds,
            }));
            reports.push(report);
        }
    }
    let table = table_csv(&reports);
    write_file(&a.out.join("report.json"), &envelope(run, "reports", to_value(&reports)))?;
    write_file(&a.out.join("table.csv"), &(csv_preamble(run) + &table))?;
    write_file(&a.out.join("timing.json"), &envelope(run, "timings", Value::Array(timings)))?;
    print!("{table}");
    Ok(())
}

pub fn train(a: &TrainArgs, run: &Value) -> Result<()> {
    let data = a.input.load()?;
    let model = RpeModel::fit(&data, &a.ensemble.config(a.family))?;
    let mode = if a.compact { StorageMode::Compact } else { StorageMode::Full };
    save_model(&a.out, &model, mode, run.clone())?;
    let redraws: usize = model.members().iter().map(|m| m.retries).sum();
    eprintln!(
        "trained {} members (d = {}, p = {}, {} classes, {redraws} redraws) -> {}",
        model.members().len(),
        model.d(),
        model.p(),
        model.n_classes(),
        a.out.display()
    );
    Ok(())
}

pub fn predict(a: &PredictArgs, run: &Value) -> Result<()> {
    let loaded = load_model(&a.model)?;
    let model = &loaded.model;
    let data = a.input.load()?;
    let scores = model.scores_batch(data.features())?;
    let names = model.class_names();

    let mut out = csv_preamble(run);
    out.push_str(&format!("# model_tool_version: {}\n", loaded.tool_version));
    out.push_str("row,label");
    for name in names {
        out.push_str(&format!(",score_{name}"));
    }
    out.push('\n');
    let mut agree = 0;
    let known = data.class_names().iter().all(|c| names.contains(c));
    for i in 0..scores.rows() {
        let row = scores.row(i);
        let k = argmax_first(row);
        if known && data.class_names()[data.labels()[i]] == names[k] {
            agree += 1;
        }
        out.push_str(&format!("{},{}", i + 1, names[k]));
        for s in row {
            out.push(',');
            out.push_str(&format_f64(*s));
        }
        out.push('\n');
    }
    match &a.out {
        Some(path) => write_file(path, &out)?,
        None => print!("{out}"),
    }
    if known {
        eprintln!("agreement with input labels: {agree}/{}", scores.rows());
    }
    Ok(())
}

pub fn cv(a: &CvArgs, run: &Value) -> Result<()> {
    let data = a.input.load()?;
    let identifier = a.input.data.file_stem().map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
    let report = loocv(&data, &identifier, &a.ensemble.config(a.family))?;
    write_file(&a.out, &envelope(run, "report", to_value(&report)))?;
    eprintln!(
        "{identifier} {}: LOOCV misclassification {:.4} (se {:.4}) over {} folds",
        report.method_label(),
        report.mean,
        report.sd,
        report.replicates
    );
    Ok(())
}

pub fn kl_diag(a: &KlDiagArgs, run: &Value) -> Result<()> {
    let data = a.input.load()?;
    let theta = theta_lower_bound(&data)?;
    let logs = theta.log_over_p(data.p());
    let mut out = csv_preamble(run);
    out.push_str("class");
    for l in &theta.labels {
        out.push_str(&format!(",{l}"));
    }
    out.push('\n');
    for (label, row) in theta.labels.iter().zip(&logs) {
        out.push_str(label);
        for v in row {
            out.push(',');
            out.push_str(&v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}")));
        }
        out.push('\n');
    }
    write_file(&a.out, &out)?;
    if let Some(path) = &a.svg {
        write_file(path, &svg::heatmap(&theta.labels, &logs, &provenance(run)))?;
    }
    Ok(())
}

/// Grid coordinate `i` of `g` on an axis centred at `center` with half-width `half`.
/// The formula is odd in `i ↦ g - 1 - i`, so a grid centred at the origin is symmetric.
fn grid_coord(center: f64, half: f64, i: usize, g: usize) -> f64 {
    center + half * (2.0 * i as f64 - (g - 1) as f64) / (g - 1) as f64
}

pub fn viz2d(a: &Viz2dArgs, run: &Value) -> Result<()> {
    if a.grid < 2 {
        return Err(Error::InvalidParameter(format!("--grid must be at least 2, got {}", a.grid)));
    }
    let data = a.input.load()?;
    let config = RpeConfig {
        b: 1,
        d: Some(2),
        family: a.family,
        master_seed: a.seed,
        ridge: a.ridge,
        ..RpeConfig::default()
    };
    let ensemble = RpeModel::fit(&data, &config)?;
    let member = &ensemble.members()[0];
    let points = member.projection.project(data.features())?;
    let names = ensemble.class_names();

    let mut center = [0.0; 2];
    let mut half = [0.0; 2];
    for c in 0..2 {
        let (lo, hi) = (0..points.rows())
            .map(|i| points.get(i, c))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        center[c] = 0.5 * (lo + hi);
        half[c] = if hi > lo { 0.55 * (hi - lo) } else { 1.0 };
    }

    create_dir(&a.out)?;
    let mut pts = csv_preamble(run);
    pts.push_str("label,z1,z2\n");
    let mut scatter = Vec::with_capacity(points.rows());
    for i in 0..points.rows() {
        let z = points.row(i);
        pts.push_str(&format!("{},{},{}\n", names[data.labels()[i]], format_f64(z[0]), format_f64(z[1])));
        scatter.push(([z[0], z[1]], data.labels()[i]));
    }
    write_file(&a.out.join("points.csv"), &pts)?;

    let g = a.grid;
    let mut grid = csv_preamble(run);
    grid.push_str(&format!("i,j,z1,z2,class,discriminant_{}_{},sign\n", names[0], names[1]));
    let mut cells = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let z = [grid_coord(center[0], half[0], i, g), grid_coord(center[1], half[1], j, g)];
            let scores = member.model.class_scores(&z)?;
            let k = argmax_first(&scores);
            let d01 = scores[0] - scores[1];
            let sign = if d01 > 0.0 { 1 } else if d01 < 0.0 { -1 } else { 0 };
            grid.push_str(&format!(
                "{i},{j},{},{},{},{},{sign}\n",
                format_f64(z[0]),
                format_f64(z[1]),
                names[k],
                format_f64(d01)
            ));
            cells.push((z, k));
        }
    }
    write_file(&a.out.join("grid.csv"), &grid)?;

    if let Some(path) = &a.svg {
        let step = [2.0 * half[0] / (g - 1) as f64, 2.0 * half[1] / (g - 1) as f64];
        let plot = svg::Scatter {
            names,
            points: &scatter,
            cells: &cells,
            step,
            lo: [center[0] - half[0] - 0.5 * step[0], center[1] - half[1] - 0.5 * step[1]],
            hi: [center[0] + half[0] + 0.5 * step[0], center[1] + half[1] + 0.5 * step[1]],
        };
        write_file(path, &plot.render(&provenance(run)))?;
    }
    eprintln!(
        "projected {} points to 2-D (redraws: {}); grid {g}x{g} -> {}",
        points.rows(),
        member.retries,
        a.out.display()
    );
    Ok(())
}

pub fn simulate(a: &SimulateArgs, run: &Value) -> Result<()> {
    if a.n == 0 {
        return Err(Error::InvalidParameter("--n must be positive".into()));
    }
    let exp = SchemeExperiment::new(a.scheme, a.p, 1, a.data_seed);
    let spec = exp.spec()?;
    // Same streams as the training rows of benchmark replicate 0.
    let blocks = (0..spec.n_classes())
        .map(|k| spec.sample(k, a.n, mix_all(a.data_seed, &[0, k as u64])))
        .collect::<Result<Vec<_>>>()?;
    let data = Dataset::from_class_blocks(blocks, spec.class_names())?;
    let mut comments = provenance(run);
    comments.push(format!("structure_seed: {}", exp.structure_seed()));
    let mut buf = Vec::new();
    write_csv(&mut buf, &data, &comments)?;
    fs::write(&a.out, buf).map_err(|e| Error::Io(format!("{}: {e}", a.out.display())))?;
    eprintln!("wrote {} rows x {} features -> {}", data.n(), data.p(), a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::grid_coord;

    #[test]
    fn grid_is_symmetric_about_center() {
        for g in 2..9 {
            for i in 0..g {
                assert_eq!(grid_coord(0.0, 1.7, i, g), -grid_coord(0.0, 1.7, g - 1 - i, g));
            }
            assert_eq!(grid_coord(2.0, 1.0, 0, g), 1.0);
            assert_eq!(grid_coord(2.0, 1.0, g - 1, g), 3.0);
        }
    }
}
