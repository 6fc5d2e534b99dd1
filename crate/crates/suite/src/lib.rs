//! Acceptance suite. The criteria run from `tests/acceptance.rs`; their checks live in
//! `bruin_core::validation`.
