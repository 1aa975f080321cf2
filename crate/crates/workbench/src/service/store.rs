use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use dsr_core::agreement::{AnnotationEvent, UnitKey};
use dsr_core::{Corpus, Dimension, Span, SpanKind};
use serde::Serialize;

use crate::formats::{event_line, parse_annotations};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no corpus is loaded")]
    NoCorpus,
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("annotator id is missing")]
    MissingAnnotator,
    #[error("score {0} is outside [-1, 1]")]
    InvalidScore(f64),
    #[error("dimension `{dim}` cannot be scored on a {kind} span")]
    IllegalDimension { dim: String, kind: SpanKind },
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("cannot replace the corpus while annotators are mid-queue: {0}")]
    SessionsActive(String),
    #[error("annotation log {path}: {source}")]
    Log {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// One span to be scored, in queue order.
#[derive(Debug, Clone)]
struct Task {
    id: String,
    text: usize,
    span: Span,
}

/// What the annotator sees: the span in its text and the dimensions to score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotationTask {
    pub task_id: String,
    pub text_id: String,
    pub content: String,
    pub start: usize,
    pub end: usize,
    /// `character` or `topic`.
    pub kind: &'static str,
    pub surface: String,
    /// Dimension codes to score, in fixed order.
    pub dimensions: Vec<&'static str>,
    /// Dimension codes this annotator has already scored.
    pub scored: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NextTask {
    Task(AnnotationTask),
    /// Every task in the queue is fully scored by this annotator.
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionState {
    pub annotator_id: String,
    /// Index of the first task still missing a score, or the queue length.
    pub queue_position: usize,
    pub completed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct AnnotatorProgress {
    pub completed_tasks: usize,
    pub scored_units: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Progress {
    pub total_tasks: usize,
    pub annotators: BTreeMap<String, AnnotatorProgress>,
    /// Scored units per dimension code, over all annotators.
    pub dimensions: BTreeMap<&'static str, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusInfo {
    pub name: String,
    pub texts: usize,
    pub tasks: usize,
}

/// Annotation state backed by an append-only JSONL log.
///
/// The log holds one annotation event per line. A score is acknowledged only
/// after its line has been written and synced, and a resubmission for the
/// same (annotator, unit) appends a new line that wins on replay.
pub struct AnnotationStore {
    log_path: PathBuf,
    log: File,
    corpus: Option<Corpus>,
    tasks: Vec<Task>,
    task_ids: BTreeMap<String, usize>,
    latest: BTreeMap<(UnitKey, String), AnnotationEvent>,
    sessions: BTreeSet<String>,
}

fn log_error(path: &Path) -> impl FnOnce(io::Error) -> ServiceError + '_ {
    move |source| ServiceError::Log {
        path: path.display().to_string(),
        source,
    }
}

impl AnnotationStore {
    /// Opens (creating if needed) the log at `path` and replays it. A final
    /// line without a newline is an append that never completed, so it was
    /// never acknowledged; it is cut off.
    pub fn open(path: &Path) -> Result<Self, ServiceError> {
        let mut log = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(log_error(path))?;
        let mut contents = String::new();
        log.read_to_string(&mut contents).map_err(log_error(path))?;
        let complete = contents.rfind('\n').map_or(0, |i| i + 1);
        if complete < contents.len() {
            log.set_len(complete as u64).map_err(log_error(path))?;
            log.sync_all().map_err(log_error(path))?;
            contents.truncate(complete);
        }
        log.seek(SeekFrom::End(0)).map_err(log_error(path))?;
        let events = parse_annotations(contents.as_bytes(), &path.display().to_string())
            .map_err(|e| ServiceError::Log {
                path: path.display().to_string(),
                source: io::Error::new(io::ErrorKind::InvalidData, e.to_string()),
            })?;
        let mut latest = BTreeMap::new();
        for e in events {
            latest.insert((e.unit(), e.annotator_id.clone()), e);
        }
        Ok(Self {
            log_path: path.to_path_buf(),
            log,
            corpus: None,
            tasks: Vec::new(),
            task_ids: BTreeMap::new(),
            latest,
            sessions: BTreeSet::new(),
        })
    }

    pub fn corpus_info(&self) -> Option<CorpusInfo> {
        self.corpus.as_ref().map(|c| CorpusInfo {
            name: c.name.clone(),
            texts: c.texts().len(),
            tasks: self.tasks.len(),
        })
    }

    /// Annotators who have fetched a task and still have tasks left.
    pub fn active_sessions(&self) -> Vec<String> {
        self.sessions
            .iter()
            .filter(|a| self.first_pending(a).is_some())
            .cloned()
            .collect()
    }

    /// Replaces the corpus and rebuilds the task queue: text order, then
    /// span start, kind and end.
    pub fn load_corpus(&mut self, corpus: Corpus) -> Result<CorpusInfo, ServiceError> {
        let active = self.active_sessions();
        if !active.is_empty() {
            return Err(ServiceError::SessionsActive(active.join(", ")));
        }
        let mut tasks = Vec::new();
        for (ti, (_, spans)) in corpus.spans_by_text().into_iter().enumerate() {
            let mut keyed: Vec<&Span> = spans.iter().map(|s| &s.span).collect();
            keyed.sort_by_key(|s| (s.start, s.kind, s.end));
            keyed.dedup_by_key(|s| (s.start, s.kind, s.end));
            for span in keyed {
                tasks.push(Task {
                    id: format!("{}:{}:{}:{}", span.text_id, span.start, span.end, span.kind),
                    text: ti,
                    span: span.clone(),
                });
            }
        }
        self.task_ids = tasks.iter().enumerate().map(|(i, t)| (t.id.clone(), i)).collect();
        self.tasks = tasks;
        self.corpus = Some(corpus);
        self.sessions.clear();
        Ok(self.corpus_info().expect("corpus just loaded"))
    }

    fn unit(span: &Span, dimension: Dimension) -> UnitKey {
        UnitKey {
            text_id: span.text_id.clone(),
            start: span.start,
            end: span.end,
            kind: span.kind,
            dimension,
        }
    }

    fn scored_dims(&self, task: &Task, annotator: &str) -> Vec<Dimension> {
        task.span
            .kind
            .dimensions()
            .filter(|d| {
                self.latest
                    .contains_key(&(Self::unit(&task.span, *d), annotator.to_string()))
            })
            .collect()
    }

    fn is_complete(&self, task: &Task, annotator: &str) -> bool {
        self.scored_dims(task, annotator).len() == task.span.kind.dimensions().count()
    }

    fn first_pending(&self, annotator: &str) -> Option<usize> {
        self.tasks.iter().position(|t| !self.is_complete(t, annotator))
    }

    pub fn session_state(&self, annotator: &str) -> SessionState {
        SessionState {
            annotator_id: annotator.to_string(),
            queue_position: self.first_pending(annotator).unwrap_or(self.tasks.len()),
            completed: self.tasks.iter().filter(|t| self.is_complete(t, annotator)).count(),
        }
    }

    /// First task in queue order that `annotator` has not fully scored. The
    /// same task is returned until every one of its dimensions is scored.
    pub fn next_task(&mut self, annotator: &str) -> Result<NextTask, ServiceError> {
        if annotator.is_empty() {
            return Err(ServiceError::MissingAnnotator);
        }
        let corpus = self.corpus.as_ref().ok_or(ServiceError::NoCorpus)?;
        self.sessions.insert(annotator.to_string());
        let Some(i) = self.first_pending(annotator) else {
            return Ok(NextTask::Done);
        };
        let task = &self.tasks[i];
        let text = &corpus.texts()[task.text];
        let scored = self.scored_dims(task, annotator);
        Ok(NextTask::Task(AnnotationTask {
            task_id: task.id.clone(),
            text_id: text.id.clone(),
            content: text.content.clone(),
            start: task.span.start,
            end: task.span.end,
            kind: task.span.kind.as_str(),
            surface: task.span.surface.clone(),
            dimensions: task.span.kind.dimensions().map(Dimension::code).collect(),
            scored: scored.into_iter().map(Dimension::code).collect(),
        }))
    }

    /// Validates, appends and syncs one score, then records it.
    pub fn submit_score(
        &mut self,
        annotator: &str,
        task_id: &str,
        dim: &str,
        score: f64,
        timestamp_ms: i64,
    ) -> Result<AnnotationEvent, ServiceError> {
        if annotator.is_empty() {
            return Err(ServiceError::MissingAnnotator);
        }
        if self.corpus.is_none() {
            return Err(ServiceError::NoCorpus);
        }
        let &i = self
            .task_ids
            .get(task_id)
            .ok_or_else(|| ServiceError::UnknownTask(task_id.to_string()))?;
        let span = &self.tasks[i].span;
        let dimension = Dimension::parse(dim).ok_or_else(|| ServiceError::UnknownDimension(dim.to_string()))?;
        if !span.kind.allows(dimension) {
            return Err(ServiceError::IllegalDimension {
                dim: dim.to_string(),
                kind: span.kind,
            });
        }
        if !(-1.0..=1.0).contains(&score) {
            return Err(ServiceError::InvalidScore(score));
        }
        let event = AnnotationEvent {
            annotator_id: annotator.to_string(),
            text_id: span.text_id.clone(),
            start: span.start,
            end: span.end,
            kind: span.kind,
            dimension,
            score,
            timestamp_ms,
        };
        let line = event_line(&event);
        self.log.write_all(line.as_bytes()).map_err(log_error(&self.log_path))?;
        self.log.sync_data().map_err(log_error(&self.log_path))?;
        self.sessions.insert(annotator.to_string());
        self.latest.insert((event.unit(), event.annotator_id.clone()), event.clone());
        Ok(event)
    }

    /// The latest event per (unit, annotator), ordered by unit then
    /// annotator.
    pub fn export_events(&self) -> Vec<AnnotationEvent> {
        self.latest.values().cloned().collect()
    }

    pub fn export_jsonl(&self) -> String {
        self.latest.values().map(event_line).collect()
    }

    pub fn progress(&self) -> Progress {
        let mut p = Progress {
            total_tasks: self.tasks.len(),
            ..Progress::default()
        };
        let current: BTreeSet<UnitKey> = self
            .tasks
            .iter()
            .flat_map(|t| t.span.kind.dimensions().map(|d| Self::unit(&t.span, d)))
            .collect();
        for (unit, annotator) in self.latest.keys() {
            if !current.contains(unit) {
                continue;
            }
            p.annotators.entry(annotator.clone()).or_default().scored_units += 1;
            *p.dimensions.entry(unit.dimension.code()).or_default() += 1;
        }
        for (annotator, entry) in p.annotators.iter_mut() {
            entry.completed_tasks = self.tasks.iter().filter(|t| self.is_complete(t, annotator)).count();
        }
        p
    }
}
