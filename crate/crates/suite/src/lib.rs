//! Holds the acceptance suite in `tests/acceptance.rs`. It lives in its own
//! package so that a failing criterion does not stop the other test targets
//! of the workspace from running.
