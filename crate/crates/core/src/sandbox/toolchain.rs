use std::env;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SandboxError;
use crate::question::GradedLanguage;

/// Default compiler flags for C++ submissions: C++14 with warnings enabled.
pub const DEFAULT_CXX_FLAGS: &[&str] = &["-std=c++14", "-Wall"];

/// Paths to the interpreter and compiler used for graded languages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Toolchain {
    pub python: PathBuf,
    pub cxx: PathBuf,
    pub cxx_flags: Vec<String>,
}

impl Default for Toolchain {
    fn default() -> Self {
        Toolchain {
            python: PathBuf::from("python3"),
            cxx: PathBuf::from("g++"),
            cxx_flags: DEFAULT_CXX_FLAGS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Toolchain {
    pub fn program_for(&self, language: GradedLanguage) -> &Path {
        match language {
            GradedLanguage::Python3 => &self.python,
            GradedLanguage::Cpp14 => &self.cxx,
        }
    }

    /// Resolve the executable for `language` to an absolute path.
    pub fn resolve(&self, language: GradedLanguage) -> Result<PathBuf, SandboxError> {
        let program = self.program_for(language);
        find_executable(program).ok_or_else(|| SandboxError::MissingToolchain {
            language,
            program: program.to_path_buf(),
        })
    }

    /// Fail fast unless every configured toolchain is present.
    pub fn validate(&self) -> Result<(), SandboxError> {
        self.resolve(GradedLanguage::Python3)?;
        self.resolve(GradedLanguage::Cpp14)?;
        Ok(())
    }
}

fn is_executable(path: &Path) -> bool {
    path.metadata()
        .map(|m| m.is_file() && m.permissions().mode() & 0o111 != 0)
        .unwrap_or(false)
}

fn find_executable(program: &Path) -> Option<PathBuf> {
    if program.components().count() > 1 || program.is_absolute() {
        return is_executable(program).then(|| program.to_path_buf());
    }
    let path = env::var_os("PATH")?;
    env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|candidate| is_executable(candidate))
}
