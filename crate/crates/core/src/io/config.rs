//! TOML study configurations and hardware profiles, JSON model files.
//!
//! Each format carries `schema_version = 1` at its top level. The field is
//! optional when reading TOML and always written.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::optimizer::StudyConfig;
use crate::survival::AftModel;
use crate::types::HardwareProfile;
use crate::{Error, Result};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
const MODEL_KIND: &str = "aft_model";

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn toml_error(path: &Path, text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .and_then(|s| text.get(..s.start))
        .map_or(0, |head| 1 + head.matches('\n').count());
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.message().to_string(),
    }
}

/// Remove and check the optional top-level `schema_version`.
fn take_version(table: &mut toml::Table, path: &Path) -> Result<()> {
    match table.remove("schema_version") {
        None => Ok(()),
        Some(toml::Value::Integer(v)) if v == i64::from(CONFIG_SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("unsupported schema_version {v}"),
        }),
    }
}

fn parse_versioned<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T> {
    let mut table: toml::Table = text.parse().map_err(|e| toml_error(path, text, e))?;
    take_version(&mut table, path)?;
    T::deserialize(table).map_err(|e| toml_error(path, "", e))
}

pub fn parse_study_config(text: &str, path: &Path) -> Result<StudyConfig> {
    let config: StudyConfig = parse_versioned(text, path)?;
    config.validate()?;
    Ok(config)
}

pub fn load_study_config(path: impl AsRef<Path>) -> Result<StudyConfig> {
    let path = path.as_ref();
    parse_study_config(&read(path)?, path)
}

#[derive(Serialize)]
struct VersionedStudy<'a> {
    schema_version: u32,
    #[serde(flatten)]
    config: &'a StudyConfig,
}

pub fn study_config_to_toml(config: &StudyConfig) -> Result<String> {
    toml::to_string(&VersionedStudy {
        schema_version: CONFIG_SCHEMA_VERSION,
        config,
    })
    .map_err(|e| Error::InvalidArgument(format!("cannot encode configuration: {e}")))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    #[serde(rename = "profile", default)]
    profiles: Vec<HardwareProfile>,
}

/// Read `[[profile]]` tables with `name`, `cost_per_hour`, `power_watts`
/// and `bandwidth_gbps`.
pub fn parse_hardware_profiles(text: &str, path: &Path) -> Result<Vec<HardwareProfile>> {
    let file: ProfileFile = parse_versioned(text, path)?;
    if file.profiles.is_empty() {
        return Err(Error::Data(format!("{}: no [[profile]] entries", path.display())));
    }
    for p in &file.profiles {
        p.validate()?;
    }
    Ok(file.profiles)
}

pub fn load_hardware_profiles(path: impl AsRef<Path>) -> Result<Vec<HardwareProfile>> {
    let path = path.as_ref();
    parse_hardware_profiles(&read(path)?, path)
}

pub fn hardware_profiles_to_toml(profiles: &[HardwareProfile]) -> Result<String> {
    #[derive(Serialize)]
    struct Out<'a> {
        schema_version: u32,
        profile: &'a [HardwareProfile],
    }
    toml::to_string(&Out {
        schema_version: CONFIG_SCHEMA_VERSION,
        profile: profiles,
    })
    .map_err(|e| Error::InvalidArgument(format!("cannot encode profiles: {e}")))
}

#[derive(Serialize, Deserialize)]
struct ModelFile<T> {
    schema_version: u32,
    kind: String,
    model: T,
}

pub fn model_to_json(model: &AftModel) -> Result<String> {
    let file = ModelFile {
        schema_version: CONFIG_SCHEMA_VERSION,
        kind: MODEL_KIND.into(),
        model,
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

pub fn model_from_json(text: &str, path: &Path) -> Result<AftModel> {
    let parse = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let file: ModelFile<AftModel> = serde_json::from_str(text).map_err(|e| parse(e.line(), e.to_string()))?;
    if file.kind != MODEL_KIND || file.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(parse(
            1,
            format!("expected {MODEL_KIND} schema_version {CONFIG_SCHEMA_VERSION}, found {} {}", file.kind, file.schema_version),
        ));
    }
    file.model.validate()?;
    Ok(file.model)
}

pub fn save_model(model: &AftModel, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &model_to_json(model)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<AftModel> {
    let path = path.as_ref();
    model_from_json(&read(path)?, path)
}
