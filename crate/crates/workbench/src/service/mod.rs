//! Annotation backend: a task queue over a loaded corpus, an append-only
//! score log, and the HTTP API served to the annotation interface.

mod http;
mod store;

pub use http::{router, serve, SharedStore, ANNOTATOR_HEADER};
pub use store::{
    AnnotationStore, AnnotationTask, AnnotatorProgress, CorpusInfo, NextTask, Progress, ServiceError, SessionState,
};
