//! CSV outputs and the JSON run manifest. Files are written to a temporary
//! sibling and renamed into place, so readers never see a partial file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eigensolve::EigenResult;
use crate::error::{Error, Result};
use crate::monotonicity::EnergyProfile;
use crate::slitmesh::SlitMesh;
use crate::spectra::SweepRecord;

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Input(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(Error::from)
}

fn num(x: f64) -> String {
    // shortest representation that round-trips
    format!("{x:?}")
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from("param,level,lambda1,residual,seconds\n");
    for r in records {
        let _ = writeln!(s, "{},{},{},{},{:.3}", num(r.param), r.level, num(r.lambda1), num(r.residual), r.seconds);
    }
    s
}

pub fn profile_csv(profile: &EnergyProfile) -> String {
    let mut s = String::from("r,E,phi,dE,ineq_ok\n");
    for i in 0..profile.radii.len() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            num(profile.radii[i]),
            num(profile.energy[i]),
            num(profile.phi[i]),
            num(profile.d_energy[i]),
            profile.inequality_ok[i]
        );
    }
    s
}

pub fn eigenvalues_csv(result: &EigenResult) -> String {
    let mut s = String::from("index,eigenvalue,residual\n");
    for (i, (l, r)) in result.eigenvalues.iter().zip(&result.residuals).enumerate() {
        let _ = writeln!(s, "{i},{},{}", num(*l), num(*r));
    }
    s
}

/// Parses a CSV written by this module into its header and numeric rows.
/// Boolean cells read as 0 or 1, empty cells as NaN.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Input("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| match c {
                    "true" => Ok(1.0),
                    "false" => Ok(0.0),
                    "" => Ok(f64::NAN),
                    c => c.parse::<f64>().map_err(|_| Error::Input(format!("bad CSV cell {c:?}"))),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.iter().any(|r| r.len() != header.len()) {
        return Err(Error::Input("CSV row length does not match the header".into()));
    }
    Ok((header, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub kind: String,
    pub level: u32,
    pub vertices: usize,
    pub cells: usize,
    pub dofs: usize,
    pub seam_pairs: usize,
    pub components: usize,
    pub h_max: f64,
}

impl MeshStats {
    pub fn of(mesh: &SlitMesh) -> Self {
        Self {
            kind: format!("{:?}", mesh.kind()).to_lowercase(),
            level: mesh.generation(),
            vertices: mesh.vertices().len(),
            cells: mesh.cells().len(),
            dofs: mesh.dof_count(),
            seam_pairs: mesh.seam_pairs().len(),
            components: mesh.components(),
            h_max: mesh.h_max(),
        }
    }
}

/// Everything needed to rerun a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, enough to rerun the command.
    pub args: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub meshes: Vec<MeshStats>,
    /// SHA-256 of the command, arguments, parameters and seed.
    pub input_hash: String,
    /// File names of the outputs, relative to the manifest.
    pub outputs: Vec<String>,
    /// Pass/fail verdicts of the numerical checks the command made.
    pub verdicts: BTreeMap<String, bool>,
    pub seconds: f64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, parameters: serde_json::Value, seed: u64) -> Self {
        let mut m = Self {
            command: command.to_string(),
            args,
            parameters,
            seed,
            tolerances: BTreeMap::new(),
            meshes: Vec::new(),
            input_hash: String::new(),
            outputs: Vec::new(),
            verdicts: BTreeMap::new(),
            seconds: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        m.input_hash = m.compute_hash();
        m
    }

    pub fn compute_hash(&self) -> String {
        let payload = serde_json::json!({
            "command": self.command,
            "args": self.args,
            "parameters": self.parameters,
            "seed": self.seed,
        });
        let digest = Sha256::digest(payload.to_string().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        write_atomic(path, json.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let m: Self = serde_json::from_str(&text)?;
        if m.compute_hash() != m.input_hash {
            return Err(Error::Input(format!("manifest {} has a stale input hash", path.display())));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotonicity::ExponentParams;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn profile_roundtrip() {
        let p = ExponentParams::planar_cracktip();
        let r = vec![0.1, 0.2, 0.4];
        let prof = EnergyProfile::build(p, r.clone(), r.clone(), vec![0.0; 3], vec![1e-12; 3]);
        let (h, rows) = read_csv(&profile_csv(&prof)).unwrap();
        assert_eq!(h, ["r", "E", "phi", "dE", "ineq_ok"]);
        assert_eq!(rows[2][0], 0.4);
        assert_eq!(rows[1][2], 1.0);
        assert_eq!(rows[0][4], 1.0);
    }

    #[test]
    fn manifest_hash_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = RunManifest::new("eig-sphere", vec!["--beta".into(), "0".into()], serde_json::json!({"beta": 0.0}), 5);
        assert_eq!(m.input_hash.len(), 64);
        let other = RunManifest::new("eig-sphere", vec!["--beta".into(), "0".into()], serde_json::json!({"beta": 0.0}), 6);
        assert_ne!(m.input_hash, other.input_hash);
        m.write(&p).unwrap();
        assert_eq!(RunManifest::read(&p).unwrap(), m);
        let irrational = RunManifest::new("sweep", vec![], serde_json::json!({"betas": [0.3 * std::f64::consts::PI]}), 5);
        irrational.write(&p).unwrap();
        assert_eq!(RunManifest::read(&p).unwrap(), irrational);
        let mut bad = m.clone();
        bad.seed = 9;
        bad.write(&p).unwrap();
        assert!(RunManifest::read(&p).is_err());
    }
}
