//! Acceptance suite: every criterion as a test printing one PASS line.
//!
//! ```bash
//! cargo test -p wpnav --test acceptance -- --nocapture --test-threads 4
//! ```
//!
//! The training-backed criteria share one trained fixture per model class and
//! run for several minutes; everything else completes in seconds.

mod common;
mod determinism;
mod fast;
mod gradients;
mod training;
