//! Backend providers for matrix cells.

use std::path::PathBuf;
use std::sync::Arc;

use crate::agent::{AgentBackend, AgentError, HttpBackend, HttpBackendConfig, ScriptedBackend};
use crate::harness::Setting;

use super::{BackendProvider, BenchError};

/// Scripted backends from a directory of turn fixtures. Each cell reads
/// `<model>--<task>--<setting>.turns`; a fresh backend per cell keeps
/// repetitions independent and identical.
pub struct TurnsDirProvider {
    root: PathBuf,
}

impl TurnsDirProvider {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        TurnsDirProvider { root: root.into() }
    }

    /// Fixture file for one cell, rooted at the provider directory.
    pub fn fixture_path(&self, model_ref: &str, task_id: &str, setting: Setting) -> PathBuf {
        self.root.join(format!("{model_ref}--{task_id}--{}.turns", setting.as_str()))
    }
}

impl BackendProvider for TurnsDirProvider {
    fn backend(
        &self,
        model_ref: &str,
        task_id: &str,
        setting: Setting,
    ) -> Result<Arc<dyn AgentBackend>, BenchError> {
        let path = self.fixture_path(model_ref, task_id, setting);
        if !path.is_file() {
            return Err(BenchError::MissingFixture {
                model_ref: model_ref.to_string(),
                task_id: task_id.to_string(),
                setting: setting.as_str().to_string(),
            });
        }
        Ok(Arc::new(ScriptedBackend::from_file(&path)?))
    }
}

/// One HTTP backend shared by every cell; the model reference inside each
/// completion request selects the model.
pub struct HttpProvider {
    backend: Arc<HttpBackend>,
}

impl HttpProvider {
    pub fn new(config: HttpBackendConfig) -> Result<Self, AgentError> {
        Ok(HttpProvider { backend: Arc::new(HttpBackend::new(config)?) })
    }
}

impl BackendProvider for HttpProvider {
    fn backend(
        &self,
        _model_ref: &str,
        _task_id: &str,
        _setting: Setting,
    ) -> Result<Arc<dyn AgentBackend>, BenchError> {
        Ok(self.backend.clone())
    }
}
