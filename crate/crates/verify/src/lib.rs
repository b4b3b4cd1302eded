//! Holds the acceptance suite in `tests/acceptance.rs`:
//!
//! ```sh
//! cargo test -p frugal-verify --test acceptance
//! ```
