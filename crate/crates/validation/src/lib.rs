//! Holds the `acceptance` test target; see `tests/acceptance.rs`.
//!
//! It lives in its own package so that `cargo test --workspace` runs the
//! unit and integration tests of the other crates before it.
