//! Property-test generators shared by the workspace's test suites.

pub mod actions;
pub mod dsl;
