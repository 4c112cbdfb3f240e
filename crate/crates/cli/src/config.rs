use std::path::{Path, PathBuf};

use emrkit_llm::LlmConfig;
use emrkit_sut::SutConfig;
use serde::{Deserialize, Serialize};

use crate::exit::{CliError, Exit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StubSet {
    /// Helpers for the bundled mock shop.
    #[default]
    Shop,
    /// No helpers; every non-builtin call makes an EMR not executable.
    None,
}

/// Everything a subcommand may need. Paths in a config file are relative
/// to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolConfig {
    pub out: PathBuf,
    /// Replay `mock_scripts` instead of calling the model.
    pub mock: bool,
    pub mock_scripts: Option<PathBuf>,
    /// Directory overriding prompt templates (derive/, generate/).
    pub templates: Option<PathBuf>,
    /// Directory of `*.smrl` few-shot examples.
    pub fewshot: Option<PathBuf>,
    /// API catalog of the SUT.
    pub catalog: Option<PathBuf>,
    pub stubs: StubSet,
    pub llm: LlmConfig,
    pub sut: SutConfig,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            out: PathBuf::from("emrkit-out"),
            mock: false,
            mock_scripts: None,
            templates: None,
            fewshot: None,
            catalog: None,
            stubs: StubSet::Shop,
            llm: LlmConfig::default(),
            sut: SutConfig::default(),
        }
    }
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl ToolConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new(Exit::Input, format!("{}: {e}", path.display())))?;
        let mut config: ToolConfig = toml::from_str(&text)
            .map_err(|e| CliError::new(Exit::Input, format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if config.out.is_relative() {
            config.out = base.join(&config.out);
        }
        for p in [
            &mut config.mock_scripts,
            &mut config.templates,
            &mut config.fewshot,
            &mut config.catalog,
            &mut config.sut.adapter,
            &mut config.sut.cassette,
        ] {
            rebase(base, p);
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
