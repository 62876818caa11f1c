//! Run configuration: one TOML file describing paths, the toolchain, the
//! sweep defaults, and the provider profiles. Every field has a default so
//! a bare invocation works against the shipped problem tree.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use vbench_core::generation::Temperature;
use vbench_core::harness::{
    Toolchain, DEFAULT_COMPILE_TEMPLATE, DEFAULT_SIMULATE_TEMPLATE,
};
use vbench_core::problems::Detail;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub toolchain: ToolchainConfig,
    #[serde(default)]
    pub sweep: SweepDefaults,
    #[serde(default = "default_providers", rename = "provider")]
    pub providers: Vec<ProviderProfile>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: PathsConfig::default(),
            toolchain: ToolchainConfig::default(),
            sweep: SweepDefaults::default(),
            providers: default_providers(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    #[serde(default = "default_problems_dir")]
    pub problems: PathBuf,
    #[serde(default = "default_store_path")]
    pub store: PathBuf,
    #[serde(default = "default_report_dir")]
    pub report_out: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            problems: default_problems_dir(),
            store: default_store_path(),
            report_out: default_report_dir(),
        }
    }
}

fn default_problems_dir() -> PathBuf {
    PathBuf::from("problems")
}

fn default_store_path() -> PathBuf {
    PathBuf::from("records.jsonl")
}

fn default_report_dir() -> PathBuf {
    PathBuf::from("reports")
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolchainConfig {
    /// Compile argv template; `{sources}` expands to the source paths and
    /// `{output}` to the image path.
    pub compile: Option<Vec<String>>,
    /// Simulate argv template; `{image}` expands to the compiled image.
    pub simulate: Option<Vec<String>>,
}

impl ToolchainConfig {
    pub fn build(&self) -> Result<Toolchain> {
        let compile = self
            .compile
            .clone()
            .unwrap_or_else(|| DEFAULT_COMPILE_TEMPLATE.iter().map(|s| s.to_string()).collect());
        let simulate = self
            .simulate
            .clone()
            .unwrap_or_else(|| DEFAULT_SIMULATE_TEMPLATE.iter().map(|s| s.to_string()).collect());
        Toolchain::new(compile, simulate).context("invalid toolchain template")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDefaults {
    #[serde(default = "default_details")]
    pub details: Vec<Detail>,
    #[serde(default = "default_temperatures")]
    pub temperatures: Vec<f64>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_sim_timeout")]
    pub sim_timeout_seconds: f64,
    #[serde(default = "default_compile_timeout")]
    pub compile_timeout_seconds: f64,
}

impl Default for SweepDefaults {
    fn default() -> Self {
        SweepDefaults {
            details: default_details(),
            temperatures: default_temperatures(),
            n: default_n(),
            max_tokens: default_max_tokens(),
            parallelism: default_parallelism(),
            sim_timeout_seconds: default_sim_timeout(),
            compile_timeout_seconds: default_compile_timeout(),
        }
    }
}

impl SweepDefaults {
    pub fn temperatures(&self) -> Vec<Temperature> {
        self.temperatures.iter().map(|&t| Temperature(t)).collect()
    }

    pub fn sim_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.sim_timeout_seconds)
    }

    pub fn compile_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.compile_timeout_seconds)
    }
}

fn default_details() -> Vec<Detail> {
    vec![Detail::L, Detail::M, Detail::H]
}

/// The sweep grid's temperature axis.
fn default_temperatures() -> Vec<f64> {
    vec![0.1, 0.3, 0.5, 0.7, 1.0]
}

fn default_n() -> usize {
    10
}

fn default_max_tokens() -> u32 {
    300
}

fn default_parallelism() -> usize {
    4
}

fn default_sim_timeout() -> f64 {
    10.0
}

fn default_compile_timeout() -> f64 {
    30.0
}

/// One provider entry. `kind` picks the wire protocol; the mock kind
/// replays a fixture file instead of calling anywhere.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderProfile {
    pub id: String,
    pub kind: ProviderKind,
    /// Marks the profile used when `--provider` is not given. Exactly one
    /// profile may carry it (a single profile is implicitly default).
    #[serde(default)]
    pub default: bool,
    /// Mock only: completions fixture path.
    pub fixture: Option<PathBuf>,
    /// HTTP kinds only.
    pub endpoint: Option<String>,
    pub api_key_env: Option<String>,
    pub model: Option<String>,
    pub max_n_per_call: Option<usize>,
    pub max_tokens_cap: Option<u32>,
    pub requests_per_second: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum ProviderKind {
    #[serde(rename = "mock")]
    Mock,
    #[serde(rename = "http-completion")]
    HttpCompletion,
    #[serde(rename = "http-chat")]
    HttpChat,
}

fn default_providers() -> Vec<ProviderProfile> {
    vec![ProviderProfile {
        id: "mock".to_string(),
        kind: ProviderKind::Mock,
        default: true,
        fixture: None,
        endpoint: None,
        api_key_env: None,
        model: None,
        max_n_per_call: None,
        max_tokens_cap: None,
        requests_per_second: None,
    }]
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.providers.is_empty() {
            bail!("config declares no providers");
        }
        let defaults = self.providers.iter().filter(|p| p.default).count();
        if self.providers.len() > 1 && defaults != 1 {
            bail!(
                "config must mark exactly one provider default (found {defaults} of {})",
                self.providers.len()
            );
        }
        let mut ids: Vec<&str> = self.providers.iter().map(|p| p.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.providers.len() {
            bail!("config has duplicate provider ids");
        }
        for profile in &self.providers {
            match profile.kind {
                ProviderKind::Mock => {}
                ProviderKind::HttpCompletion | ProviderKind::HttpChat => {
                    for (field, present) in [
                        ("endpoint", profile.endpoint.is_some()),
                        ("api_key_env", profile.api_key_env.is_some()),
                        ("model", profile.model.is_some()),
                    ] {
                        if !present {
                            bail!("provider {:?} is missing {field}", profile.id);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The profile named `id`, or the default profile when `id` is absent.
    pub fn provider(&self, id: Option<&str>) -> Result<&ProviderProfile> {
        match id {
            Some(id) => self
                .providers
                .iter()
                .find(|p| p.id == id)
                .with_context(|| format!("no provider {id:?} in config")),
            None => self
                .providers
                .iter()
                .find(|p| p.default)
                .or_else(|| (self.providers.len() == 1).then(|| &self.providers[0]))
                .context("no default provider configured; pass --provider"),
        }
    }
}
