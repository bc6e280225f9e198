//! Output directory bookkeeping: every file written goes through here so the manifest
//! can list it with its checksum.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Column description for a sidecar.
pub struct Column<'a> {
    pub name: &'a str,
    pub unit: &'a str,
    pub meaning: &'a str,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub struct OutputDir {
    root: PathBuf,
    files: Vec<OutputFile>,
    diagnostics: Map<String, Value>,
    config_hash: String,
    started: Instant,
}

impl OutputDir {
    /// Creates `root`. Files named by a previous manifest there are removed first, so a
    /// rerun into the same directory leaves no stale outputs behind.
    pub fn create(root: &Path, config_toml: &str) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        let old = root.join(MANIFEST);
        if let Ok(text) = fs::read_to_string(&old) {
            if let Ok(v) = serde_json::from_str::<Value>(&text) {
                for f in v["outputs"].as_array().into_iter().flatten() {
                    if let Some(name) = f["file"].as_str() {
                        // only plain names inside root
                        if !name.contains("..") && !Path::new(name).is_absolute() {
                            let _ = fs::remove_file(root.join(name));
                        }
                    }
                }
            }
            fs::remove_file(&old)?;
        }
        let mut out = Self {
            root: root.to_path_buf(),
            files: Vec::new(),
            diagnostics: Map::new(),
            config_hash: sha256_hex(config_toml.as_bytes()),
            started: Instant::now(),
        };
        out.write_bytes("config.toml", config_toml.as_bytes())?;
        Ok(out)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, bytes)?;
        self.files.retain(|f| f.file != name);
        self.files.push(OutputFile {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Header plus rows of already formatted fields.
    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    /// `<name>.meta.json` naming the figure, axes and units of a CSV.
    pub fn write_sidecar(
        &mut self,
        name: &str,
        figure: &str,
        about: &str,
        columns: &[Column],
    ) -> Result<(), CliError> {
        let cols: Vec<Value> = columns
            .iter()
            .map(|c| json!({"name": c.name, "unit": c.unit, "meaning": c.meaning}))
            .collect();
        let meta = json!({
            "data": name,
            "figure": figure,
            "about": about,
            "columns": cols,
            "frequency_convention": "ordinary frequencies (Hz multiples), 2π not included",
            "config_sha256": self.config_hash,
        });
        self.write_json(&format!("{name}.meta.json"), &meta)
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.to_string(), value.into());
    }

    /// Writes the manifest last and returns it.
    pub fn finish(self, command: &str) -> Result<Value, CliError> {
        let manifest = json!({
            "command": command,
            "config_sha256": self.config_hash,
            "code_version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "outputs": self.files,
            "diagnostics": self.diagnostics,
        });
        let mut text = serde_json::to_string_pretty(&manifest).expect("JSON values serialize");
        text.push('\n');
        fs::write(self.root.join(MANIFEST), text)?;
        Ok(manifest)
    }
}

/// Shortest round-trip decimal form; stable across runs and locales.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_every_file_and_clears_stale_ones() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), "a = 1\n").unwrap();
        out.write_csv("x.csv", &["a", "b"], vec![vec![num(1.0), num(0.5)]])
            .unwrap();
        out.write_json("s.json", &json!({"k": 1})).unwrap();
        out.finish("test").unwrap();
        let names: Vec<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n != MANIFEST)
            .collect();
        let v: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST)).unwrap()).unwrap();
        let listed: Vec<&str> = v["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f["file"].as_str().unwrap())
            .collect();
        for n in &names {
            assert!(listed.contains(&n.as_str()), "{n} not in manifest");
        }
        let out = OutputDir::create(dir.path(), "a = 2\n").unwrap();
        assert!(!dir.path().join("x.csv").exists());
        out.finish("test").unwrap();
    }

    #[test]
    fn csv_text_is_plain() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), "").unwrap();
        out.write_csv(
            "x.csv",
            &["r_um", "v_kHz"],
            vec![vec![num(0.25), num(-1e-3)]],
        )
        .unwrap();
        let text = fs::read_to_string(dir.path().join("x.csv")).unwrap();
        assert_eq!(text, "r_um,v_kHz\n0.25,-0.001\n");
    }
}
