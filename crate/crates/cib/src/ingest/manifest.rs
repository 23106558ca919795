//! Study manifest: one CSV row per clip.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// Interview chapter a clip was cut from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chapter {
    Depression,
    Mania,
}

impl Chapter {
    pub const ALL: [Chapter; 2] = [Chapter::Depression, Chapter::Mania];
}

impl fmt::Display for Chapter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chapter::Depression => "depression",
            Chapter::Mania => "mania",
        })
    }
}

impl FromStr for Chapter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "depression" => Ok(Chapter::Depression),
            "mania" => Ok(Chapter::Mania),
            other => Err(format!(
                "unknown chapter {other:?} (expected depression or mania)"
            )),
        }
    }
}

/// Diagnostic group label; always taken from the manifest, never inferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "OCD")]
    Ocd,
    #[serde(rename = "no_OCD")]
    NoOcd,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Ocd => "OCD",
            Group::NoOcd => "no_OCD",
        })
    }
}

impl FromStr for Group {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "OCD" => Ok(Group::Ocd),
            "no_OCD" => Ok(Group::NoOcd),
            other => Err(format!("unknown group {other:?} (expected OCD or no_OCD)")),
        }
    }
}

/// One manifest row describing a clip on disk.
#[derive(Debug, Clone)]
pub struct ManifestRow {
    pub participant_id: String,
    pub group: Group,
    pub chapter: Chapter,
    pub stream_path: PathBuf,
    pub fps: f64,
    pub human_scores_path: Option<PathBuf>,
    pub rater_id: Option<String>,
}

impl ManifestRow {
    pub fn clip_id(&self) -> String {
        format!("{}/{}", self.participant_id, self.chapter)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

pub const MANIFEST_HEADER: [&str; 7] = [
    "participant_id",
    "group",
    "chapter",
    "stream_path",
    "fps",
    "human_scores_path",
    "rater_id",
];

impl Manifest {
    /// Reads and validates a manifest CSV.
    ///
    /// Relative paths are resolved against the manifest's directory; every
    /// stream path must exist. `participant_id x chapter` must be unique.
    pub fn from_path(path: &Path) -> Result<Manifest, IngestError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| IngestError::BadManifest {
                line: 0,
                reason: format!("{}: {e}", path.display()),
            })?;
        let headers = reader
            .headers()
            .map_err(|e| IngestError::BadManifest {
                line: 1,
                reason: e.to_string(),
            })?
            .clone();
        let expected: Vec<&str> = MANIFEST_HEADER.to_vec();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(IngestError::BadManifest {
                line: 1,
                reason: format!("header must be {:?}, got {:?}", expected.join(","), got.join(",")),
            });
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |s: &str| -> PathBuf {
            let p = PathBuf::from(s);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };

        let mut rows = Vec::new();
        let mut seen: BTreeSet<(String, Chapter)> = BTreeSet::new();
        for (idx, record) in reader.records().enumerate() {
            let line = idx + 2;
            let record = record.map_err(|e| IngestError::BadManifest {
                line,
                reason: e.to_string(),
            })?;
            let field = |i: usize| record.get(i).unwrap_or("").to_string();
            let participant_id = field(0);
            if participant_id.is_empty() {
                return Err(IngestError::BadManifest {
                    line,
                    reason: "empty participant_id".to_string(),
                });
            }
            let group = field(1)
                .parse::<Group>()
                .map_err(|reason| IngestError::BadManifest { line, reason })?;
            let chapter = field(2)
                .parse::<Chapter>()
                .map_err(|reason| IngestError::BadManifest { line, reason })?;
            let stream_path = resolve(&field(3));
            let fps: f64 = field(4).parse().map_err(|_| IngestError::BadManifest {
                line,
                reason: format!("cannot parse fps {:?}", field(4)),
            })?;
            if !(fps > 0.0) {
                return Err(IngestError::BadManifest {
                    line,
                    reason: format!("fps must be positive, got {fps}"),
                });
            }
            let human_scores_path = match field(5).as_str() {
                "" => None,
                s => Some(resolve(s)),
            };
            let rater_id = match field(6).as_str() {
                "" => None,
                s => Some(s.to_string()),
            };
            if !seen.insert((participant_id.clone(), chapter)) {
                return Err(IngestError::DuplicateClip {
                    participant_id,
                    chapter,
                });
            }
            if !stream_path.exists() {
                return Err(IngestError::MissingStream {
                    participant_id,
                    path: stream_path.display().to_string(),
                });
            }
            rows.push(ManifestRow {
                participant_id,
                group,
                chapter,
                stream_path,
                fps,
                human_scores_path,
                rater_id,
            });
        }
        Ok(Manifest { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_manifest(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("manifest.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "{}", MANIFEST_HEADER.join(",")).unwrap();
        write!(f, "{body}").unwrap();
        path
    }

    #[test]
    fn empty_manifest_parses_to_no_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_manifest(dir.path(), "");
        let m = Manifest::from_path(&path).unwrap();
        assert!(m.rows.is_empty());
    }

    #[test]
    fn valid_row_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.jsonl"), "").unwrap();
        let path = write_manifest(dir.path(), "p01,OCD,depression,s.jsonl,25,,\n");
        let m = Manifest::from_path(&path).unwrap();
        assert_eq!(m.rows.len(), 1);
        let row = &m.rows[0];
        assert_eq!(row.group, Group::Ocd);
        assert_eq!(row.chapter, Chapter::Depression);
        assert!(row.stream_path.ends_with("s.jsonl"));
        assert!(row.human_scores_path.is_none());
        assert_eq!(row.clip_id(), "p01/depression");
    }

    #[test]
    fn missing_stream_names_the_participant() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_manifest(dir.path(), "p07,no_OCD,mania,absent.jsonl,25,,\n");
        match Manifest::from_path(&path) {
            Err(IngestError::MissingStream { participant_id, .. }) => {
                assert_eq!(participant_id, "p07");
            }
            other => panic!("expected MissingStream, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_participant_chapter_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.jsonl"), "").unwrap();
        let path = write_manifest(
            dir.path(),
            "p01,OCD,depression,s.jsonl,25,,\np01,OCD,depression,s.jsonl,25,,\n",
        );
        assert!(matches!(
            Manifest::from_path(&path),
            Err(IngestError::DuplicateClip { .. })
        ));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        std::fs::write(&path, "id,group\n").unwrap();
        assert!(matches!(
            Manifest::from_path(&path),
            Err(IngestError::BadManifest { line: 1, .. })
        ));
    }

    #[test]
    fn bad_group_and_fps_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.jsonl"), "").unwrap();
        for row in [
            "p01,Control,depression,s.jsonl,25,,\n",
            "p01,OCD,depression,s.jsonl,zero,,\n",
            "p01,OCD,depression,s.jsonl,0,,\n",
        ] {
            let path = write_manifest(dir.path(), row);
            assert!(
                matches!(Manifest::from_path(&path), Err(IngestError::BadManifest { line: 2, .. })),
                "row {row:?} should be rejected"
            );
        }
    }
}
