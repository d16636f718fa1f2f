pub mod bootstrap;
pub mod essentialness;
pub mod frontier;
pub mod run;
pub mod technique;
pub mod timeline;
pub mod validate;

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some requested attempts produced no record.
    Shortfall,
}
