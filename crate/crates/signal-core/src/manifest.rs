use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Result, SignalError};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// Which stage of the pipeline an entry feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validate,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Signal CSV path, relative to the manifest file's directory.
    pub path: String,
    pub label: String,
    pub split: Split,
}

/// Labeled signal collection with train/validate/test splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub classes: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(classes: Vec<String>) -> Self {
        DatasetManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            classes,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, path: impl Into<String>, label: impl Into<String>, split: Split) {
        self.entries.push(ManifestEntry {
            path: path.into(),
            label: label.into(),
            split,
        });
    }

    pub fn entries_in(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    /// Validates label membership and, with `check_files`, that every entry
    /// resolves to an existing file next to the manifest.
    pub fn validate(&self, base_dir: &Path, check_files: bool) -> Result<()> {
        for entry in &self.entries {
            if self.class_index(&entry.label).is_none() {
                return Err(SignalError::UnknownLabel {
                    path: entry.path.clone(),
                    label: entry.label.clone(),
                });
            }
            if check_files {
                let full = base_dir.join(&entry.path);
                if !full.exists() {
                    return Err(SignalError::MissingEntry(full));
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, json).map_err(|e| SignalError::io(path, e))
    }

    /// Loads and validates a manifest; entry paths must resolve to files.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| SignalError::io(path, e))?;
        let manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| SignalError::Format {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            return Err(SignalError::Format {
                path: path.to_path_buf(),
                message: format!("unsupported format_version {}", manifest.format_version),
            });
        }
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        manifest.validate(base, true)?;
        Ok(manifest)
    }

    /// Directory-relative entry path resolved against the manifest location.
    pub fn resolve(&self, manifest_path: &Path, entry: &ManifestEntry) -> PathBuf {
        manifest_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&entry.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{write_signal, LabeledSignal, Provenance, TimeSeries};

    #[test]
    fn load_rejects_unknown_label() {
        let mut m = DatasetManifest::new(vec!["A".into(), "B".into()]);
        m.push("sig.csv", "C", Split::Train);
        let err = m.validate(Path::new("."), false).unwrap_err();
        assert!(matches!(err, SignalError::UnknownLabel { .. }));
    }

    #[test]
    fn load_reports_missing_file_by_path() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = DatasetManifest::new(vec!["A".into()]);
        m.push("ghost.csv", "A", Split::Test);
        let mp = dir.path().join("manifest.json");
        m.save(&mp).unwrap();
        let err = DatasetManifest::load(&mp).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("ghost.csv"), "message was: {msg}");
    }

    #[test]
    fn roundtrip_with_real_entry() {
        let dir = tempfile::tempdir().unwrap();
        let sig = LabeledSignal::new(
            TimeSeries::single(0.01, "x", "m", vec![1.0, 2.0]).unwrap(),
            "A",
            Provenance::synthetic("t", 1, 0.0),
        );
        write_signal(&sig, &dir.path().join("sig.csv")).unwrap();
        let mut m = DatasetManifest::new(vec!["A".into()]);
        m.push("sig.csv", "A", Split::Train);
        let mp = dir.path().join("manifest.json");
        m.save(&mp).unwrap();
        let back = DatasetManifest::load(&mp).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.entries_in(Split::Train).count(), 1);
        assert_eq!(back.entries_in(Split::Test).count(), 0);
    }
}
