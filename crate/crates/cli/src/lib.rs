//! Batch front end for `ownconc-core`: holdings ingestion, the dashboard and
//! text/JSON reports.

pub mod args;
pub mod dashboard;
pub mod error;
pub mod ingest;
pub mod report;
pub mod run;

pub use dashboard::{dashboard, Dashboard, DashboardOptions};
pub use error::CliError;
pub use ingest::{export_csv, ingest, Book, HoldingsRecord, InputFormat};
pub use run::{run, Output};
