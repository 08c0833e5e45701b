//! Command-line frontend for the tight-binding transport and
//! localization library: binds TOML configs to simulation pipelines
//! and emits figure-ready CSV/JSON datasets with reproducibility
//! manifests.

use std::path::PathBuf;

pub mod config;
pub mod ensemble;
pub mod manifest;
pub mod output;

pub mod commands {
    pub mod anderson;
    pub mod entangle;
    pub mod qrw;
    pub mod reduce;
    pub mod stark;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

/// Everything a command needs: the resolved config plus output routing.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: config::Config,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}
