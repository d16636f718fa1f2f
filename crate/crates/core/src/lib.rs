//! Cost-of-pass analytics: exact money, cost-of-pass frontiers,
//! counterfactual analyses, trend fits, bootstrap intervals, and a harness
//! that produces the attempt records they consume.

pub mod analysis;
pub mod harness;
pub mod metrics;
pub mod money;
pub mod pricing;
pub mod records;
pub mod statistics;

pub use money::{ExtMoney, Fraction, Money};
