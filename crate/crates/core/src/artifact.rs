//! Artifact file plumbing: every file the toolkit writes starts with a
//! header line recording the tool version, the seed, input checksums, and —
//! for datasets — a checksum of the body, so tampering and drift are
//! detectable on import.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactHeader {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub inputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<String, usize>>,
}

impl ArtifactHeader {
    pub fn new(kind: &str, seed: u64) -> Self {
        ArtifactHeader {
            tool: "mot".into(),
            version: crate::VERSION.into(),
            kind: kind.into(),
            seed,
            inputs: BTreeMap::new(),
            checksum: None,
            round: None,
            counts: None,
        }
    }

    pub fn with_input(mut self, name: &str, checksum: String) -> Self {
        self.inputs.insert(name.into(), checksum);
        self
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    _header: ArtifactHeader,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn file_sha256(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

/// Checksum of a JSONL body: the digest of all lines, each followed by `\n`.
pub fn body_checksum(lines: &[String]) -> String {
    let mut hasher = Sha256::new();
    for line in lines {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    format!("{:x}", hasher.finalize())
}

/// Write a JSONL artifact: one header line, then the body. The header's
/// checksum field is filled in from the body.
pub fn write_jsonl(
    path: &Path,
    mut header: ArtifactHeader,
    body: &[String],
) -> std::io::Result<()> {
    header.checksum = Some(body_checksum(body));
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut file, &HeaderLine { _header: header })?;
    file.write_all(b"\n")?;
    for line in body {
        file.write_all(line.as_bytes())?;
        file.write_all(b"\n")?;
    }
    file.flush()
}

/// Read a JSONL file, splitting off the header line when one is present.
/// Body lines come back with their original 1-based line numbers; blank
/// lines are skipped.
pub fn read_jsonl(path: &Path) -> std::io::Result<(Option<ArtifactHeader>, Vec<(usize, String)>)> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut header = None;
    let mut body = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 && line.contains("\"_header\"") {
            if let Ok(parsed) = serde_json::from_str::<HeaderLine>(&line) {
                header = Some(parsed._header);
                continue;
            }
        }
        body.push((idx + 1, line));
    }
    Ok((header, body))
}
