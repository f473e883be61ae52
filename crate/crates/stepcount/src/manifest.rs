//! On-disk dataset layout: JSONL annotations, a JSON manifest pointing at
//! them, and an optional precomputed split file.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio_io::{read_wav, write_wav, Waveform};
use crate::error::{Error, Result};
use crate::synth::SynthRecording;
use crate::windowing::{FoldSplit, StepAnnotations};

/// Top-level dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Annotation JSONL files, relative to the manifest location.
    pub annotations: Vec<PathBuf>,
    /// Optional precomputed split file, relative to the manifest location.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<PathBuf>,
}

/// A recording with its annotations loaded into memory.
#[derive(Debug, Clone)]
pub struct Recording {
    pub annotations: StepAnnotations,
    pub waveform: Waveform,
}

pub fn write_annotations_jsonl(anns: &[StepAnnotations], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for a in anns {
        out.push_str(&serde_json::to_string(a)?);
        out.push('\n');
    }
    File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(path, e))
}

pub fn read_annotations_jsonl(path: impl AsRef<Path>) -> Result<Vec<StepAnnotations>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let ann: StepAnnotations = serde_json::from_str(&line)?;
        ann.validate()?;
        out.push(ann);
    }
    Ok(out)
}

pub fn write_manifest(m: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(m)?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_splits(splits: &[FoldSplit], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(splits)?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn read_splits(path: impl AsRef<Path>) -> Result<Vec<FoldSplit>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Load every annotated recording referenced by a manifest, reading the WAVs
/// from the paths stored in the annotations.
pub fn load_recordings(manifest_path: impl AsRef<Path>) -> Result<Vec<Recording>> {
    let manifest_path = manifest_path.as_ref();
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut out = Vec::new();
    for ann_file in &manifest.annotations {
        for annotations in read_annotations_jsonl(base.join(ann_file))? {
            let rel = annotations.audio_path.as_deref().ok_or_else(|| {
                Error::InvalidInput(format!(
                    "{}: annotation has no audio_path",
                    annotations.recording_id
                ))
            })?;
            let waveform = read_wav(base.join(rel))?;
            out.push(Recording {
                annotations,
                waveform,
            });
        }
    }
    Ok(out)
}

/// Load the split file referenced by a manifest, if any.
pub fn load_manifest_splits(manifest_path: impl AsRef<Path>) -> Result<Option<Vec<FoldSplit>>> {
    let manifest_path = manifest_path.as_ref();
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    match &manifest.splits {
        Some(p) => Ok(Some(read_splits(base.join(p))?)),
        None => Ok(None),
    }
}

/// Write a synthetic corpus to `dir`: one WAV per recording, an annotation
/// JSONL, and a manifest. Returns the manifest path.
pub fn write_corpus(dir: impl AsRef<Path>, corpus: &[SynthRecording]) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let audio_dir = dir.join("audio");
    std::fs::create_dir_all(&audio_dir).map_err(|e| Error::io(&audio_dir, e))?;

    let mut anns = Vec::with_capacity(corpus.len());
    for rec in corpus {
        let rel = format!("audio/{}.wav", rec.annotations.recording_id);
        write_wav(&rec.waveform, dir.join(&rel))?;
        let mut ann = rec.annotations.clone();
        ann.audio_path = Some(rel);
        anns.push(ann);
    }
    write_annotations_jsonl(&anns, dir.join("annotations.jsonl"))?;
    let manifest = Manifest {
        annotations: vec![PathBuf::from("annotations.jsonl")],
        splits: None,
    };
    let manifest_path = dir.join("manifest.json");
    write_manifest(&manifest, &manifest_path)?;
    Ok(manifest_path)
}
