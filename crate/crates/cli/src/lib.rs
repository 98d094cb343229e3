//! Command-line front end for the spectral solver and its verification
//! suites: scenario runs from TOML files, named check bundles, and ledger
//! merging. The binary is `bqlab`; the library exposes the same entry
//! points for integration tests.

pub mod config;
pub mod reporting;
pub mod simulate;
pub mod suites;
