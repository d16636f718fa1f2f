//! Turns resource consumption into money.
//!
//! Token prices are quoted per million tokens. Any other per-attempt resource
//! (tool calls, verification passes, amortized hardware) is priced through
//! `extra_unit_prices`, so an attempt's cost is always an inner product of a
//! price vector and a quantity vector.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::CellStats;
use crate::money::Money;
use crate::records::AttemptRecord;

pub const INPUT_TOKENS: &str = "input_tokens";
pub const OUTPUT_TOKENS: &str = "output_tokens";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostingError {
    #[error("resource {0:?} has no unit price in sheet {1:?}")]
    UnknownResource(String, String),
    #[error("no exchange rate from {from} to {to}")]
    CurrencyMismatch { from: String, to: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSheet {
    pub id: String,
    pub currency: String,
    pub input_price_per_million_tokens: Money,
    pub output_price_per_million_tokens: Money,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra_unit_prices: BTreeMap<String, Money>,
}

fn per_million() -> BigRational {
    BigRational::from_integer(BigInt::from(1_000_000))
}

impl PriceSheet {
    pub fn per_million(id: &str, currency: &str, input: &str, output: &str) -> PriceSheet {
        PriceSheet {
            id: id.to_string(),
            currency: currency.to_string(),
            input_price_per_million_tokens: input.parse().expect("valid input price"),
            output_price_per_million_tokens: output.parse().expect("valid output price"),
            extra_unit_prices: BTreeMap::new(),
        }
    }

    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.currency.trim().is_empty() {
            out.push("currency code must be non-empty".to_string());
        }
        if self.input_price_per_million_tokens.is_negative() {
            out.push("input price must be non-negative".to_string());
        }
        if self.output_price_per_million_tokens.is_negative() {
            out.push("output price must be non-negative".to_string());
        }
        for (name, price) in &self.extra_unit_prices {
            if price.is_negative() {
                out.push(format!("unit price of {name:?} must be non-negative"));
            }
        }
        out
    }

    /// Unit price of a named resource; token prices are per single token.
    pub fn unit_price(&self, resource: &str) -> Option<Money> {
        match resource {
            INPUT_TOKENS => Some(&self.input_price_per_million_tokens / &per_million()),
            OUTPUT_TOKENS => Some(&self.output_price_per_million_tokens / &per_million()),
            other => self.extra_unit_prices.get(other).cloned(),
        }
    }

    /// Inner product of unit prices and quantities.
    pub fn price(&self, quantities: &CostVector) -> Result<Money, CostingError> {
        let mut total = Money::zero();
        for (name, qty) in &quantities.quantities {
            let unit = self
                .unit_price(name)
                .ok_or_else(|| CostingError::UnknownResource(name.clone(), self.id.clone()))?;
            total += &(&unit * qty.as_rational());
        }
        Ok(total)
    }
}

/// Per-attempt resource quantities, including the reserved `input_tokens` and
/// `output_tokens` entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostVector {
    pub quantities: BTreeMap<String, Money>,
}

impl CostVector {
    pub fn from_record(record: &AttemptRecord) -> CostVector {
        let mut quantities = BTreeMap::new();
        quantities.insert(
            INPUT_TOKENS.to_string(),
            Money::from_integer(record.input_tokens as i64),
        );
        quantities.insert(
            OUTPUT_TOKENS.to_string(),
            Money::from_integer(record.output_tokens as i64),
        );
        if let Some(extra) = &record.extra_resources {
            for (name, q) in extra {
                quantities.insert(name.clone(), q.clone());
            }
        }
        CostVector { quantities }
    }

    /// Element-wise sum.
    pub fn combined(&self, other: &CostVector) -> CostVector {
        let mut quantities = self.quantities.clone();
        for (name, q) in &other.quantities {
            let slot = quantities.entry(name.clone()).or_insert_with(Money::zero);
            *slot += q;
        }
        CostVector { quantities }
    }
}

/// Cost of one attempt in the sheet's currency. A `cost_override` on the
/// record wins over token pricing.
pub fn attempt_cost(record: &AttemptRecord, sheet: &PriceSheet) -> Result<Money, CostingError> {
    if let Some(cost) = &record.cost_override {
        return Ok(cost.clone());
    }
    sheet.price(&CostVector::from_record(record))
}

/// Cost of one attempt converted into `currency`.
pub fn attempt_cost_in(
    record: &AttemptRecord,
    sheet: &PriceSheet,
    currency: &str,
    fx: &FxTable,
) -> Result<Money, CostingError> {
    let cost = attempt_cost(record, sheet)?;
    fx.convert(&cost, &sheet.currency, currency)
}

/// `1 base = rate quote`, e.g. base USD, quote INR, rate 88.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FxRate {
    pub base: String,
    pub quote: String,
    pub rate: Money,
}

/// Fixed exchange-rate table supplied with the registry.
#[derive(Debug, Clone, Default)]
pub struct FxTable {
    rates: Vec<FxRate>,
}

impl FxTable {
    pub fn new(rates: Vec<FxRate>) -> Self {
        FxTable { rates }
    }

    pub fn convert(&self, amount: &Money, from: &str, to: &str) -> Result<Money, CostingError> {
        if from == to {
            return Ok(amount.clone());
        }
        for r in &self.rates {
            if r.base == from && r.quote == to {
                return Ok(amount.scale(r.rate.as_rational()));
            }
            if r.base == to && r.quote == from && !r.rate.is_zero() {
                return Ok(amount
                    .checked_div_rational(r.rate.as_rational())
                    .expect("non-zero rate"));
            }
        }
        Err(CostingError::CurrencyMismatch {
            from: from.to_string(),
            to: to.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertBound {
    Low,
    #[default]
    High,
}

/// Labor-cost profile of a human expert for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpertProfile {
    pub id: String,
    /// The expert strategy this profile prices.
    pub strategy_id: String,
    pub dataset_id: String,
    pub currency: String,
    pub hourly_rate_low: Money,
    pub hourly_rate_high: Money,
    pub minutes_per_problem: Money,
    #[serde(default)]
    pub region_label: String,
}

impl ExpertProfile {
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let zero = Money::zero();
        if self.hourly_rate_low <= zero {
            out.push("hourly_rate_low must be positive".to_string());
        }
        if self.hourly_rate_low > self.hourly_rate_high {
            out.push("hourly_rate_low must not exceed hourly_rate_high".to_string());
        }
        if self.minutes_per_problem <= zero {
            out.push("minutes_per_problem must be positive".to_string());
        }
        if self.currency.trim().is_empty() {
            out.push("currency code must be non-empty".to_string());
        }
        out
    }

    pub fn hourly_rate(&self, bound: ExpertBound) -> &Money {
        match bound {
            ExpertBound::Low => &self.hourly_rate_low,
            ExpertBound::High => &self.hourly_rate_high,
        }
    }
}

/// Labor cost of one problem: hourly rate × minutes / 60.
pub fn expert_cost(profile: &ExpertProfile, bound: ExpertBound) -> Money {
    let minutes = profile.minutes_per_problem.as_rational();
    let sixty = BigRational::from_integer(BigInt::from(60));
    profile.hourly_rate(bound).scale(&(minutes / sixty))
}

/// Cell estimate for an expert on one problem: always correct, at labor cost.
pub fn expert_strategy_stats(
    profile: &ExpertProfile,
    bound: ExpertBound,
    problem_id: &str,
) -> CellStats {
    CellStats {
        strategy_id: profile.strategy_id.clone(),
        problem_id: problem_id.to_string(),
        n_attempts: 1,
        n_correct: 1,
        mean_cost: expert_cost(profile, bound),
    }
}
