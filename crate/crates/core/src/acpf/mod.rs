//! Steady-state solvers: admittance matrix, Newton-Raphson AC power flow,
//! and the linear DC (B-theta) approximation.
//!
//! Everything here is a pure function of its inputs and safe to call from
//! concurrent Monte Carlo runs. Non-convergence of the AC solver is data,
//! not a panic: mid-cascade operating points can be infeasible and the
//! cascade layer decides what that means.

mod dc;
mod flows;
mod newton;
mod ybus;

pub use dc::{solve_dc, DcSolution};
pub use flows::{branch_current, branch_flows, BranchFlow};
pub use newton::{power_flow_jacobian, power_injections, solve_ac, solve_ac_with, PowerFlowSolution, SolveOptions};
pub use ybus::{build_ybus, AdmittanceMatrix};

use std::collections::HashMap;

use thiserror::Error;

use crate::netmodel::{BusId, Network};

#[derive(Debug, Error)]
pub enum AcpfError {
    #[error("network has no in-service bus")]
    EmptyNetwork,
    #[error("branch {0} has zero series impedance")]
    ZeroImpedanceBranch(usize),
    #[error("island containing bus {0} has no slack bus")]
    NoSlack(BusId),
    #[error("singular network matrix in island containing bus {0}")]
    Singular(BusId),
}

/// Maps in-service bus ids to contiguous matrix positions (ascending id).
#[derive(Debug, Clone, PartialEq)]
pub struct BusIndex {
    ids: Vec<BusId>,
    pos: HashMap<BusId, usize>,
}

impl BusIndex {
    pub fn new(net: &Network) -> Self {
        let mut ids: Vec<BusId> = net.in_service_buses().map(|b| b.id).collect();
        ids.sort_unstable();
        let pos = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        BusIndex { ids, pos }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[BusId] {
        &self.ids
    }

    pub fn position(&self, id: BusId) -> Option<usize> {
        self.pos.get(&id).copied()
    }

    pub fn id_at(&self, position: usize) -> BusId {
        self.ids[position]
    }
}
