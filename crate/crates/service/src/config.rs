use std::path::{Path, PathBuf};

use assess_core::sandbox::{SandboxConfig, Toolchain};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {}: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
}

/// Service configuration, read from a JSON file. Every field is optional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub port: u16,
    /// Attempt event logs live under `<data_dir>/attempts`.
    pub data_dir: PathBuf,
    /// Directory of question documents (`*.json`), loaded at startup.
    pub questions_dir: PathBuf,
    /// When set, every request must carry `Authorization: Bearer <token>`.
    pub token: Option<String>,
    pub worker_pool_size: usize,
    pub temp_root: Option<PathBuf>,
    pub toolchain: Toolchain,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: 8080,
            data_dir: PathBuf::from("data"),
            questions_dir: PathBuf::from("questions"),
            token: None,
            worker_pool_size: 4,
            temp_root: None,
            toolchain: Toolchain::default(),
        }
    }
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: ServiceConfig = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        // Relative paths are relative to the config file.
        let base = path.parent().unwrap_or(Path::new("."));
        for dir in [&mut config.data_dir, &mut config.questions_dir] {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        if let Some(root) = &mut config.temp_root {
            if root.is_relative() {
                *root = base.join(&*root);
            }
        }
        Ok(config)
    }

    pub fn sandbox(&self) -> SandboxConfig {
        SandboxConfig {
            toolchain: self.toolchain.clone(),
            worker_pool_size: self.worker_pool_size,
            temp_root: self.temp_root.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c: ServiceConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, ServiceConfig::default());
    }

    #[test]
    fn relative_dirs_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("service.json");
        std::fs::write(
            &path,
            r#"{"port": 9000, "data_dir": "d", "token": "s3cret", "toolchain": {"cxx": "clang++"}}"#,
        )
        .unwrap();
        let c = ServiceConfig::load(&path).unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.data_dir, dir.path().join("d"));
        assert_eq!(c.token.as_deref(), Some("s3cret"));
        assert_eq!(c.toolchain.cxx, PathBuf::from("clang++"));
        assert_eq!(c.toolchain.python, PathBuf::from("python3"));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ServiceConfig>(r#"{"prot": 1}"#).is_err());
    }
}
