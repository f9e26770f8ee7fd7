//! One directory per run: artifacts written via temp file + rename, plus a
//! manifest of SHA-256 content hashes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::Failure;

pub struct RunDir {
    root: PathBuf,
    files: BTreeMap<String, String>,
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Lib(tabkip::Error::io(path, e))
}

impl RunDir {
    /// Creates `root`. An existing nonempty directory is refused unless
    /// `force` is set, in which case files are overwritten in place.
    pub fn create(root: &Path, force: bool) -> Result<Self, Failure> {
        if root.exists() {
            let nonempty = fs::read_dir(root)
                .map_err(|e| io_failure(root, e))?
                .next()
                .is_some();
            if nonempty && !force {
                return Err(Failure::Config(format!(
                    "output directory {} already exists (use --force to overwrite)",
                    root.display()
                )));
            }
        }
        fs::create_dir_all(root).map_err(|e| io_failure(root, e))?;
        Ok(RunDir {
            root: root.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn staging(&self, name: &str) -> PathBuf {
        self.root.join(format!(".{name}.tmp"))
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), Failure> {
        let tmp = self.staging(name);
        fs::write(&tmp, contents).map_err(|e| io_failure(&tmp, e))?;
        self.commit(&tmp, name)
    }

    /// Lets `produce` write a CSV and its `.json` sidecar to a staging path,
    /// then moves both into place under `stem`.
    pub fn write_with_sidecar(
        &mut self,
        stem: &str,
        produce: impl FnOnce(&Path) -> tabkip::Result<()>,
    ) -> Result<(), Failure> {
        let tmp_csv = self.root.join(format!(".{stem}.tmp.csv"));
        produce(&tmp_csv).map_err(Failure::Lib)?;
        let tmp_json = tmp_csv.with_extension("json");
        self.commit(&tmp_csv, &format!("{stem}.csv"))?;
        self.commit(&tmp_json, &format!("{stem}.json"))
    }

    fn commit(&mut self, tmp: &Path, name: &str) -> Result<(), Failure> {
        let bytes = fs::read(tmp).map_err(|e| io_failure(tmp, e))?;
        let dest = self.path(name);
        fs::rename(tmp, &dest).map_err(|e| io_failure(&dest, e))?;
        self.files.insert(name.to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }

    /// Writes `manifest.json` listing every artifact written so far.
    pub fn finish(mut self, command: &str) -> Result<(), Failure> {
        let manifest = serde_json::json!({
            "command": command,
            "tabkip_version": env!("CARGO_PKG_VERSION"),
            "sha256": self.files,
        });
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Lib(e.into()))?;
        let tmp = self.staging("manifest.json");
        fs::write(&tmp, text + "\n").map_err(|e| io_failure(&tmp, e))?;
        let dest = self.path("manifest.json");
        fs::rename(&tmp, &dest).map_err(|e| io_failure(&dest, e))?;
        self.files.clear();
        Ok(())
    }
}
