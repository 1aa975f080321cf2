//! File formats, report rendering, the annotation service and the `dsr`
//! command-line interface built on `dsr-core`.

pub mod cli;
pub mod export;
pub mod formats;
pub mod report;
pub mod service;
