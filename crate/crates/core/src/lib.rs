//! Cascading-failure simulation for electric power grids.
//!
//! The engine couples AC power flow and transient rotor-angle dynamics with
//! explicit protection-relay models, including stochastically sampled hidden
//! relay failures, and reports the node-outage count and stability condition
//! of each simulated contingency. A linear DC steady-state cascade model is
//! included as a comparison baseline.
//!
//! Module map:
//! - [`netmodel`]: grid data model, case file I/O, topology queries
//! - [`acpf`]: Y-bus construction, Newton-Raphson AC power flow, DC power flow
//! - [`dynamics`]: swing-equation integration with governor/exciter controls
//! - [`protection`]: relay zones, timers, hidden-failure sampling, UFLS
//! - [`cascade`]: the stepped AC cascade loop (fault, trip, island, collapse)
//! - [`dccascade`]: angle-threshold DC cascade baseline
//! - [`scenario`]: attack scenarios, Monte Carlo ensembles, sensitivity sweeps
//! - [`report`]: plot-ready CSV / line-delimited event output

pub mod acpf;
pub mod cascade;
pub mod dccascade;
pub mod dynamics;
pub mod netmodel;
pub mod protection;
pub mod report;
pub mod scenario;


pub use netmodel::{Branch, Bus, BusType, ElementStatus, Generator, Load, Network};

