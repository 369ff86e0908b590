//! JSON persistence of fitted ensembles.
//!
//! Layout (schema version 1):
//!
//! ```text
//! { "schema_version": 1, "tool_version": "rpeqda x.y.z", "mode": "full" | "compact",
//!   "run_config": {...}, "config": RpeConfig, "family": "standard_normal" | "sparse_three_point",
//!   "d": 10, "p": 512, "class_names": [...],
//!   "members": [ { "seed": u64, "retries": n, "payload": null | {"Dense": [...]} | {"Sparse": {...}},
//!                  "classes": [ { "label", "prior", "mean", "cholesky_lower" } ] } ] }
//! ```
//!
//! Compact files omit every payload; matrices are regenerated from the stored
//! member seeds on load. Floats are written in shortest round-trip form, so a
//! loaded model reproduces the saved one bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CholeskyFactor;
use crate::qda::{GaussianClassModel, QdaModel};
use crate::randproj::{generate, Payload, ProjectionFamily, ProjectionMatrix};
use crate::rpe::{ProjectionMember, RpeConfig, RpeModel};
use crate::VERSION;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageMode {
    Full,
    Compact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassRecord {
    label: usize,
    prior: f64,
    mean: Vec<f64>,
    cholesky_lower: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MemberRecord {
    seed: u64,
    retries: usize,
    payload: Option<Payload>,
    classes: Vec<ClassRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    tool_version: String,
    mode: StorageMode,
    run_config: serde_json::Value,
    config: RpeConfig,
    family: ProjectionFamily,
    d: usize,
    p: usize,
    class_names: Vec<String>,
    members: Vec<MemberRecord>,
}

/// A model read back from disk together with the run configuration it was saved with.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: RpeModel,
    pub mode: StorageMode,
    pub tool_version: String,
    pub run_config: serde_json::Value,
}

pub fn model_to_json(model: &RpeModel, mode: StorageMode, run_config: serde_json::Value) -> Result<String> {
    let members = model
        .members()
        .iter()
        .map(|m| MemberRecord {
            seed: m.projection.seed(),
            retries: m.retries,
            payload: (mode == StorageMode::Full).then(|| m.projection.payload().clone()),
            classes: m
                .model
                .classes()
                .iter()
                .map(|c| ClassRecord {
                    label: c.label,
                    prior: c.prior,
                    mean: c.mean.clone(),
                    cholesky_lower: c.cov_factor.packed_lower().to_vec(),
                })
                .collect(),
        })
        .collect();
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        tool_version: VERSION.to_string(),
        mode,
        run_config,
        config: model.config().clone(),
        family: model.config().family,
        d: model.d(),
        p: model.p(),
        class_names: model.class_names().to_vec(),
        members,
    };
    serde_json::to_string(&file).map_err(|e| Error::ModelFormat(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<LoadedModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    let members = file
        .members
        .into_iter()
        .enumerate()
        .map(|(b, rec)| {
            let projection = match (file.mode, rec.payload) {
                (StorageMode::Full, Some(payload)) => ProjectionMatrix::from_payload(file.family, file.d, file.p, rec.seed, payload)?,
                (StorageMode::Compact, None) => generate(file.family, file.d, file.p, rec.seed)?,
                (StorageMode::Full, None) => return Err(Error::ModelFormat(format!("member {b} has no projection payload"))),
                (StorageMode::Compact, Some(_)) => return Err(Error::ModelFormat(format!("compact member {b} carries a payload"))),
            };
            let classes = rec
                .classes
                .into_iter()
                .map(|c| {
                    let factor = CholeskyFactor::from_packed(c.mean.len(), c.cholesky_lower)?;
                    GaussianClassModel::new(c.label, c.prior, c.mean, factor)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::ModelFormat(format!("member {b}: {e}")))?;
            ProjectionMember::new(projection, QdaModel::from_classes(classes)?, rec.retries)
        })
        .collect::<Result<Vec<_>>>()?;
    let model = RpeModel::from_parts(file.config, file.class_names, members)?;
    if model.d() != file.d || model.p() != file.p {
        return Err(Error::ModelFormat("member shapes disagree with the header".into()));
    }
    Ok(LoadedModel {
        model,
        mode: file.mode,
        tool_version: file.tool_version,
        run_config: file.run_config,
    })
}

pub fn save_model(path: impl AsRef<Path>, model: &RpeModel, mode: StorageMode, run_config: serde_json::Value) -> Result<()> {
    std::fs::write(path, model_to_json(model, mode, run_config)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LoadedModel> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::linalg::Matrix;
    use crate::rng::RandomStream;

    fn fitted(family: ProjectionFamily) -> (RpeModel, Dataset) {
        let mut rng = RandomStream::new(1);
        let a = Matrix::from_fn(15, 30, |_, _| rng.normal());
        let b = Matrix::from_fn(12, 30, |_, j| 1.5 * rng.normal() + if j < 3 { 1.0 } else { 0.0 });
        let data = Dataset::from_class_blocks(vec![a, b], vec!["x".into(), "y".into()]).unwrap();
        let model = RpeModel::fit(&data, &RpeConfig::new(12, 4, family, 77)).unwrap();
        (model, data)
    }

    #[test]
    fn full_and_compact_round_trip_bit_exactly() {
        for family in [ProjectionFamily::StandardNormal, ProjectionFamily::SparseThreePoint] {
            let (model, data) = fitted(family);
            let echo = serde_json::json!({"command": "train", "seed": 77});
            let full = model_from_json(&model_to_json(&model, StorageMode::Full, echo.clone()).unwrap()).unwrap();
            let compact_text = model_to_json(&model, StorageMode::Compact, echo.clone()).unwrap();
            let compact = model_from_json(&compact_text).unwrap();
            assert_eq!(full.model, model);
            assert_eq!(compact.model, model);
            assert_eq!(compact.run_config, echo);
            assert_eq!(compact.tool_version, VERSION);
            let s1 = full.model.scores_batch(data.features()).unwrap();
            let s2 = compact.model.scores_batch(data.features()).unwrap();
            for (a, b) in s1.as_slice().iter().zip(s2.as_slice()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
            assert!(!compact_text.contains("Dense") && !compact_text.contains("Sparse"));
        }
    }

    #[test]
    fn wrong_schema_version_rejected() {
        let (model, _) = fitted(ProjectionFamily::StandardNormal);
        let text = model_to_json(&model, StorageMode::Compact, serde_json::Value::Null).unwrap();
        let bumped = text.replacen("\"schema_version\":1", "\"schema_version\":2", 1);
        assert!(matches!(model_from_json(&bumped), Err(Error::ModelFormat(_))));
        assert!(matches!(model_from_json("{"), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn corrupted_factor_rejected() {
        let (model, _) = fitted(ProjectionFamily::StandardNormal);
        let text = model_to_json(&model, StorageMode::Full, serde_json::Value::Null).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["members"][0]["classes"][0]["cholesky_lower"][0] = serde_json::json!(-1.0);
        assert!(matches!(model_from_json(&v.to_string()), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn save_and_load_file() {
        let (model, _) = fitted(ProjectionFamily::SparseThreePoint);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&path, &model, StorageMode::Full, serde_json::Value::Null).unwrap();
        assert_eq!(load_model(&path).unwrap().model, model);
        assert!(matches!(load_model(dir.path().join("missing.json")), Err(Error::Io(_))));
    }
}
