//! Run manifest: config echo, code version, timestamps, and per-output
//! checksums, written atomically at the end of a run.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub struct ManifestBuilder {
    directory: PathBuf,
    command: String,
    config_text: String,
    started: chrono::DateTime<chrono::Utc>,
    outputs: Vec<(String, String)>,
}

impl ManifestBuilder {
    pub fn new(directory: &Path, command: &str, config_text: &str) -> Self {
        Self {
            directory: directory.to_path_buf(),
            command: command.to_string(),
            config_text: config_text.to_string(),
            started: chrono::Utc::now(),
            outputs: Vec::new(),
        }
    }

    /// Register a finished output file and record its checksum.
    pub fn add_output(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let name = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.outputs.push((name, hex_string(&digest)));
        Ok(())
    }

    /// Write the manifest via a temporary file and an atomic rename.
    pub fn finish(self) -> anyhow::Result<PathBuf> {
        let finished = chrono::Utc::now();
        let mut text = String::new();
        text.push_str(&format!("command = {}\n", self.command));
        text.push_str(&format!("code_version = {}\n", env!("CARGO_PKG_VERSION")));
        text.push_str(&format!("started_utc = {}\n", self.started.to_rfc3339()));
        text.push_str(&format!("finished_utc = {}\n", finished.to_rfc3339()));
        text.push_str("\n[outputs]\n");
        for (name, digest) in &self.outputs {
            text.push_str(&format!("{name} = sha256:{digest}\n"));
        }
        text.push_str("\n[config]\n");
        for line in self.config_text.lines() {
            text.push_str(&format!("| {line}\n"));
        }
        let final_path = self.directory.join("run_manifest.txt");
        let tmp_path = self.directory.join(".run_manifest.tmp");
        {
            let mut f = std::fs::File::create(&tmp_path)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp_path, &final_path)?;
        Ok(final_path)
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
