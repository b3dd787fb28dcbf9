//! Run directories: persisted graph, tasks, transcript, grades and scores.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{
    scores_from_grades, tasks_from_text, tasks_to_text, Exchange, GradeEntry, GradeSource, Task,
};
use crate::graph::TaskGraph;
use crate::scoring::{render_scores, Grade, Score};

pub const GRAPH_FILE: &str = "graph.txt";
pub const RULEBOOK_FILE: &str = "rulebook.txt";
pub const TASKS_FILE: &str = "tasks.txt";
pub const TRANSCRIPT_FILE: &str = "transcript.log";
pub const TIMESTAMPS_FILE: &str = "timestamps.txt";
pub const GRADES_FILE: &str = "grades.txt";
pub const SCORES_FILE: &str = "scores.txt";
pub const META_FILE: &str = "meta.txt";
pub const OVERRIDE_FILE: &str = "override.txt";

const CHECKSUM_PREFIX: &str = "sha256.";

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt run directory: {0}")]
    CorruptRunDirectory(String),
}

fn corrupt(msg: impl Into<String>) -> RecordError {
    RecordError::CorruptRunDirectory(msg.into())
}

/// Key/value metadata stored in `meta.txt`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunMeta {
    pub seed: u64,
    pub n: usize,
    pub attempt: u32,
    pub templates: String,
    pub lexicon: String,
    pub rubric: String,
    pub adapter: Option<String>,
    pub reinform: bool,
}

impl RunMeta {
    fn fields(&self) -> Vec<(&'static str, String)> {
        let mut f = vec![
            ("seed", self.seed.to_string()),
            ("n", self.n.to_string()),
            ("attempt", self.attempt.to_string()),
            ("templates", self.templates.clone()),
            ("lexicon", self.lexicon.clone()),
            ("rubric", self.rubric.clone()),
            (
                "rulebook",
                "reconstructed definitional sentences, renderer-version dependent".into(),
            ),
        ];
        if let Some(a) = &self.adapter {
            f.push(("adapter", a.clone()));
            f.push(("reinform", self.reinform.to_string()));
        }
        f
    }

    fn from_fields(map: &BTreeMap<String, String>) -> Result<RunMeta, RecordError> {
        let get = |k: &str| {
            map.get(k)
                .ok_or_else(|| corrupt(format!("meta.txt lacks `{k}`")))
        };
        let num = |k: &str| -> Result<u64, RecordError> {
            get(k)?
                .parse()
                .map_err(|_| corrupt(format!("meta.txt: bad `{k}`")))
        };
        Ok(RunMeta {
            seed: num("seed")?,
            n: num("n")? as usize,
            attempt: num("attempt")? as u32,
            templates: get("templates")?.clone(),
            lexicon: get("lexicon")?.clone(),
            rubric: get("rubric")?.clone(),
            adapter: map.get("adapter").cloned(),
            reinform: map.get("reinform").is_some_and(|v| v == "true"),
        })
    }
}

/// A model run: transcript, timestamps, grades and scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResults {
    pub transcript: Vec<Exchange>,
    pub timestamps: Vec<u128>,
    pub grades: Vec<GradeEntry>,
    pub scores: (Score, Score),
}

/// Everything in a run directory. `results` is absent until a model has
/// been run against the generated tasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub meta: RunMeta,
    pub graph: TaskGraph,
    pub rulebook: Vec<String>,
    pub tasks: Vec<Task>,
    pub results: Option<RunResults>,
}

pub fn grades_to_text(grades: &[GradeEntry]) -> String {
    let mut out = String::from("# task|p|source|rationale\n");
    for g in grades {
        out.push_str(&format!(
            "{}|{}|{}|{}\n",
            g.task,
            g.grade,
            g.source.as_str(),
            g.rationale
        ));
    }
    out
}

pub fn grades_from_text(text: &str) -> Option<Vec<GradeEntry>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.splitn(4, '|').collect();
            let [task, p, source, rationale] = f[..] else {
                return None;
            };
            Some(GradeEntry {
                task: task.to_string(),
                grade: Grade::parse(p)?,
                source: match source {
                    "auto" => GradeSource::Auto,
                    "override" => GradeSource::Override,
                    _ => return None,
                },
                rationale: rationale.to_string(),
            })
        })
        .collect()
}

/// Parses `override.txt` lines of the form `task|p|note`.
pub fn parse_overrides(text: &str) -> Result<BTreeMap<String, Grade>, String> {
    let mut out = BTreeMap::new();
    for (i, l) in text.lines().enumerate() {
        if l.trim().is_empty() || l.starts_with('#') {
            continue;
        }
        let mut f = l.splitn(3, '|');
        let (Some(task), Some(p)) = (f.next(), f.next()) else {
            return Err(format!("override line {}: expected `task|p|note`", i + 1));
        };
        let grade =
            Grade::parse(p).ok_or_else(|| format!("override line {}: bad grade `{p}`", i + 1))?;
        out.insert(task.trim().to_string(), grade);
    }
    Ok(out)
}

fn transcript_to_text(t: &[Exchange]) -> String {
    t.iter()
        .map(|e| serde_json::to_string(e).expect("exchange serializes") + "\n")
        .collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), RecordError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| RecordError::Io { path, source })
}

fn read(dir: &Path, name: &str) -> Result<String, RecordError> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|source| RecordError::Io { path, source })
}

impl RunRecord {
    /// Checksummed artifact bodies, in write order.
    fn artifacts(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            (GRAPH_FILE, self.graph.to_text()),
            (RULEBOOK_FILE, self.rulebook.join("\n") + "\n"),
            (TASKS_FILE, tasks_to_text(&self.tasks)),
        ];
        if let Some(r) = &self.results {
            out.push((TRANSCRIPT_FILE, transcript_to_text(&r.transcript)));
            out.push((GRADES_FILE, grades_to_text(&r.grades)));
            out.push((SCORES_FILE, render_scores(&r.scores.0, &r.scores.1)));
        }
        out
    }

    /// Writes every artifact, overwriting existing files. Files from an
    /// earlier run that this record does not carry are removed.
    pub fn persist(&self, dir: &Path) -> Result<(), RecordError> {
        fs::create_dir_all(dir).map_err(|source| RecordError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let artifacts = self.artifacts();
        let mut meta = String::new();
        for (k, v) in self.meta.fields() {
            meta.push_str(&format!("{k}={v}\n"));
        }
        for (name, body) in &artifacts {
            write(dir, name, body)?;
            meta.push_str(&format!(
                "{CHECKSUM_PREFIX}{name}={}\n",
                sha256_hex(body.as_bytes())
            ));
        }
        match &self.results {
            Some(r) => {
                let ts: String = r.timestamps.iter().map(|t| format!("{t}\n")).collect();
                write(dir, TIMESTAMPS_FILE, &ts)?;
            }
            None => {
                for stale in [TRANSCRIPT_FILE, GRADES_FILE, SCORES_FILE, TIMESTAMPS_FILE] {
                    let _ = fs::remove_file(dir.join(stale));
                }
            }
        }
        write(dir, META_FILE, &meta)
    }

    pub fn load(dir: &Path) -> Result<RunRecord, RecordError> {
        let meta_text = read(dir, META_FILE)?;
        let mut fields = BTreeMap::new();
        let mut sums = BTreeMap::new();
        for line in meta_text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| corrupt(format!("meta.txt: bad line `{line}`")))?;
            match k.strip_prefix(CHECKSUM_PREFIX) {
                Some(file) => sums.insert(file.to_string(), v.to_string()),
                None => fields.insert(k.to_string(), v.to_string()),
            };
        }
        let meta = RunMeta::from_fields(&fields)?;
        let mut bodies = HashMap::new();
        for (file, sum) in &sums {
            let body = read(dir, file)?;
            if sha256_hex(body.as_bytes()) != *sum {
                return Err(corrupt(format!("{file}: checksum mismatch")));
            }
            bodies.insert(file.as_str(), body);
        }
        let take = |name: &str| {
            bodies
                .get(name)
                .ok_or_else(|| corrupt(format!("meta.txt has no checksum for {name}")))
        };
        let graph = TaskGraph::from_text(take(GRAPH_FILE)?)
            .map_err(|e| corrupt(format!("{GRAPH_FILE}: {e}")))?;
        let rulebook: Vec<String> = take(RULEBOOK_FILE)?.lines().map(str::to_string).collect();
        let tasks =
            tasks_from_text(take(TASKS_FILE)?).ok_or_else(|| corrupt("tasks.txt: bad line"))?;
        let results = if bodies.contains_key(GRADES_FILE) {
            let transcript = take(TRANSCRIPT_FILE)?
                .lines()
                .map(serde_json::from_str)
                .collect::<Result<Vec<Exchange>, _>>()
                .map_err(|e| corrupt(format!("{TRANSCRIPT_FILE}: {e}")))?;
            let grades = grades_from_text(take(GRADES_FILE)?)
                .ok_or_else(|| corrupt("grades.txt: bad line"))?;
            let scores = scores_from_grades(&tasks, &grades).map_err(|e| corrupt(e.to_string()))?;
            if render_scores(&scores.0, &scores.1) != *take(SCORES_FILE)? {
                return Err(corrupt("scores.txt disagrees with grades.txt"));
            }
            let timestamps = match fs::read_to_string(dir.join(TIMESTAMPS_FILE)) {
                Ok(t) => t
                    .lines()
                    .map(|l| l.parse::<u128>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| corrupt("timestamps.txt: bad line"))?,
                Err(_) => Vec::new(),
            };
            Some(RunResults {
                transcript,
                timestamps,
                grades,
                scores,
            })
        } else {
            None
        };
        Ok(RunRecord {
            meta,
            graph,
            rulebook,
            tasks,
            results,
        })
    }
}

/// Reads `override.txt` when present.
pub fn load_overrides(dir: &Path) -> Result<BTreeMap<String, Grade>, RecordError> {
    match fs::read_to_string(dir.join(OVERRIDE_FILE)) {
        Ok(text) => parse_overrides(&text).map_err(corrupt),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(BTreeMap::new()),
        Err(source) => Err(RecordError::Io {
            path: dir.join(OVERRIDE_FILE),
            source,
        }),
    }
}
