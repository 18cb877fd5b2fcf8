//! Trial logs, external CSV import, configuration files and reports.

pub mod config;
pub mod import;
pub mod report;
pub mod trial_log;

pub use config::{
    hardware_profiles_to_toml, load_hardware_profiles, load_model, load_study_config, model_from_json, model_to_json,
    parse_hardware_profiles, parse_study_config, save_model, study_config_to_toml, CONFIG_SCHEMA_VERSION,
};
pub use import::{import_csv_reader, import_external_csv, ColumnMap, Import, RejectedRow};
pub use report::{render_report, write_report, Report, ReportKind, COMPARE_HEADER, REPORT_SCHEMA_VERSION};
pub use trial_log::{load_trials, persist_trials, TrialLogWriter, TRIAL_LOG_SCHEMA_VERSION};
