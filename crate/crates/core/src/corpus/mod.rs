//! Coded corpora: papers, test families and manually coded tests, their
//! CSV/JSON ingestion, and the sample-refinement (exclusion) rules.

mod descriptives;
mod exclude;
mod ingest;
mod model;

pub use descriptives::{descriptives, Descriptives};
pub use exclude::{apply_exclusions, ExclusionOutcome, ExclusionReport, ExclusionRule, StageCount};
pub use ingest::{
    ingest_dir, read_papers_csv, read_tests_csv, write_csv, write_papers_csv, write_tests_csv,
    IngestDiagnostic, PAPER_COLUMNS, TEST_COLUMNS, TEST_EXTRA_COLUMNS,
};
pub use model::{CodedTest, Corpus, Design, PaperRecord};
