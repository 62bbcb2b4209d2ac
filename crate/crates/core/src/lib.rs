//! Map CVE entries onto open-source packages listed in a package-manager
//! metadata dump, and compute frequency reports over the result.
//!
//! The pipeline is: [`ingest`] the package CSV and CVE JSON into records,
//! run the [`matching`] strategies (strict name, partial + fuzzy name,
//! repository link) and aggregate with [`report`]. [`store`] persists every
//! stage as newline-delimited JSON inside a workspace directory.

pub mod cpe;
pub mod fuzzy;
pub mod ingest;
pub mod matching;
pub mod report;
pub mod store;
