use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;

use super::{DatasetId, ManifestEntry, SourcePartition};
use crate::error::{Error, Result};

pub const MANIFEST_HEADER: [&str; 5] = [
    "image_id",
    "dataset",
    "native_grade",
    "source_partition",
    "site",
];

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    read_manifest(fs::File::open(path)?, path)
}

pub fn read_manifest<R: Read>(reader: R, origin: &Path) -> Result<Vec<ManifestEntry>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 {
            if record.iter().ne(MANIFEST_HEADER) {
                return Err(parse_err(
                    line,
                    format!("expected header {}", MANIFEST_HEADER.join(",")),
                ));
            }
            continue;
        }
        if record.len() != MANIFEST_HEADER.len() {
            return Err(parse_err(
                line,
                format!("expected 5 fields, found {}", record.len()),
            ));
        }
        let image_id = record[0].to_string();
        if image_id.is_empty() {
            return Err(parse_err(line, "empty image_id".into()));
        }
        let dataset: DatasetId = record[1]
            .parse()
            .map_err(|e: Error| parse_err(line, e.to_string()))?;
        let grade: i64 = record[2].parse().map_err(|_| {
            parse_err(
                line,
                format!("native_grade {:?} is not an integer", &record[2]),
            )
        })?;
        if !(0..=dataset.max_grade() as i64).contains(&grade) {
            return Err(parse_err(
                line,
                format!("native grade {grade} out of range for {dataset}"),
            ));
        }
        let source_partition: SourcePartition = record[3]
            .parse()
            .map_err(|e: Error| parse_err(line, e.to_string()))?;
        let site = Some(record[4].to_string()).filter(|s| !s.is_empty());
        if !seen.insert(image_id.clone()) {
            return Err(parse_err(line, format!("duplicate image_id {image_id:?}")));
        }
        entries.push(ManifestEntry {
            image_id,
            dataset,
            native_grade: grade as u8,
            source_partition,
            site,
        });
    }
    Ok(entries)
}

pub fn write_manifest_to<W: Write>(entries: &[ManifestEntry], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(MANIFEST_HEADER)?;
    for e in entries {
        let grade = e.native_grade.to_string();
        wtr.write_record([
            e.image_id.as_str(),
            e.dataset.as_str(),
            grade.as_str(),
            e.source_partition.as_str(),
            e.site.as_deref().unwrap_or(""),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_manifest(entries: &[ManifestEntry], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_manifest_to(entries, &mut buf)?;
    crate::fsutil::write_atomic(path, &buf)
}

/// One image id per line; blank lines are skipped.
pub fn load_exclusions(path: &Path) -> Result<Vec<String>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

#[derive(Debug, Clone)]
pub struct PruneReport {
    pub manifest: Vec<ManifestEntry>,
    pub removed: usize,
    /// Exclusion ids that were not in the manifest.
    pub missing: Vec<String>,
}

pub fn prune(manifest: &[ManifestEntry], exclusions: &[String]) -> Result<PruneReport> {
    let mut excluded = HashSet::with_capacity(exclusions.len());
    for id in exclusions {
        if !excluded.insert(id.as_str()) {
            return Err(Error::invalid(format!(
                "duplicate id {id:?} in exclusion list"
            )));
        }
    }
    let present: HashSet<&str> = manifest.iter().map(|e| e.image_id.as_str()).collect();
    let missing: Vec<String> = exclusions
        .iter()
        .filter(|id| !present.contains(id.as_str()))
        .cloned()
        .collect();
    for id in &missing {
        warn!("excluded id {id} is not in the manifest");
    }
    let kept: Vec<ManifestEntry> = manifest
        .iter()
        .filter(|e| !excluded.contains(e.image_id.as_str()))
        .cloned()
        .collect();
    Ok(PruneReport {
        removed: manifest.len() - kept.len(),
        manifest: kept,
        missing,
    })
}
