//! Grid data model and topology queries.
//!
//! A [`Network`] is loaded once from a case file and treated as immutable
//! reference data; the cascade engine works on its own clones and flips
//! element statuses instead of deleting anything, so event logs can always
//! refer back to the original element tables. All electrical quantities are
//! stored in per-unit on the system MVA base from the case header.

mod case;
mod graph;

pub use case::{load_case, load_case_str, write_case, write_case_string};

use std::collections::HashMap;

use thiserror::Error;

pub type BusId = usize;
pub type BranchId = usize;
pub type GenId = usize;
pub type LoadId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusType {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementStatus {
    InService,
    Tripped,
    Isolated,
}

impl ElementStatus {
    pub fn in_service(self) -> bool {
        self == ElementStatus::InService
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Line,
    Transformer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: BusId,
    pub voltage_kv: f64,
    pub bus_type: BusType,
    pub status: ElementStatus,
}

/// Series branch (line or transformer) in the standard pi model.
/// Impedances are per-unit on the system base; `tap` is the off-nominal
/// turns ratio on the from side, 1.0 for lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: BranchId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub r: f64,
    pub x: f64,
    pub b_shunt: f64,
    pub tap: f64,
    pub rating_mva: f64,
    pub kind: BranchKind,
    pub status: ElementStatus,
}

/// First-order governor block: droop response toward `p_max` with time
/// constant `t_gov`. Powers in per-unit on the system base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GovernorParams {
    pub p_max: f64,
    pub droop: f64,
    pub t_gov: f64,
}

/// First-order excitation block: gain `k_a` on the terminal-voltage error,
/// time constant `t_ex`, field voltage ceiling `efd_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExciterParams {
    pub k_a: f64,
    pub t_ex: f64,
    pub efd_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: GenId,
    pub bus: BusId,
    pub p_set: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub v_set: f64,
    pub inertia_h: f64,
    pub damping_d: f64,
    pub xd_prime: f64,
    pub governor: GovernorParams,
    pub exciter: ExciterParams,
    pub status: ElementStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub id: LoadId,
    pub bus: BusId,
    pub p: f64,
    pub q: f64,
    pub sheddable_fraction: f64,
    pub status: ElementStatus,
}

/// One override line from the case file DYN section. `selector` is `None`
/// for `SET` (global) entries and `Some((kind, element))` for `RELAY`
/// entries; interpretation happens in the protection module.
#[derive(Debug, Clone, PartialEq)]
pub struct DynEntry {
    pub selector: Option<(String, String)>,
    pub key: String,
    pub value: f64,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("unknown bus id {0}")]
    UnknownBus(BusId),
    #[error("unknown branch id {0}")]
    UnknownBranch(BranchId),
    #[error("validation error: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
    pub dyn_entries: Vec<DynEntry>,
    bus_idx: HashMap<BusId, usize>,
    branch_idx: HashMap<BranchId, usize>,
}

impl Network {
    /// Assembles and validates a network from element tables. Quantities
    /// must already be per-unit; `load_case` is the usual entry point.
    pub fn new(
        base_mva: f64,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
        generators: Vec<Generator>,
        loads: Vec<Load>,
        dyn_entries: Vec<DynEntry>,
    ) -> Result<Self, NetworkError> {
        let bus_idx: HashMap<_, _> = buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
        let branch_idx: HashMap<_, _> =
            branches.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
        let net = Network {
            base_mva,
            buses,
            branches,
            generators,
            loads,
            dyn_entries,
            bus_idx,
            branch_idx,
        };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<(), NetworkError> {
        let err = |m: String| Err(NetworkError::Validation(m));
        if !(self.base_mva > 0.0) {
            return err(format!("base_mva must be positive, got {}", self.base_mva));
        }
        if self.bus_idx.len() != self.buses.len() {
            return err("duplicate bus ids".into());
        }
        if self.branch_idx.len() != self.branches.len() {
            return err("duplicate branch ids".into());
        }
        let mut gen_ids: Vec<_> = self.generators.iter().map(|g| g.id).collect();
        gen_ids.sort_unstable();
        gen_ids.dedup();
        if gen_ids.len() != self.generators.len() {
            return err("duplicate generator ids".into());
        }
        let mut load_ids: Vec<_> = self.loads.iter().map(|l| l.id).collect();
        load_ids.sort_unstable();
        load_ids.dedup();
        if load_ids.len() != self.loads.len() {
            return err("duplicate load ids".into());
        }
        for b in &self.buses {
            if !(b.voltage_kv > 0.0) {
                return err(format!("bus {}: voltage_kv must be positive", b.id));
            }
        }
        for br in &self.branches {
            for end in [br.from_bus, br.to_bus] {
                if !self.bus_idx.contains_key(&end) {
                    return err(format!("branch {} references missing bus {}", br.id, end));
                }
            }
            if br.x == 0.0 {
                return err(format!("branch {}: series reactance must be nonzero", br.id));
            }
            if !(br.rating_mva > 0.0) {
                return err(format!("branch {}: rating_mva must be positive", br.id));
            }
            if !(br.tap > 0.0) {
                return err(format!("branch {}: tap must be positive", br.id));
            }
        }
        for g in &self.generators {
            if !self.bus_idx.contains_key(&g.bus) {
                return err(format!("generator {} references missing bus {}", g.id, g.bus));
            }
            if g.status.in_service() && !(g.inertia_h > 0.0) {
                return err(format!("generator {}: inertia_h must be positive", g.id));
            }
            if g.xd_prime <= 0.0 {
                return err(format!("generator {}: xd_prime must be positive", g.id));
            }
        }
        for l in &self.loads {
            if !self.bus_idx.contains_key(&l.bus) {
                return err(format!("load {} references missing bus {}", l.id, l.bus));
            }
            // q may be negative (reactive compensation in published cases).
            if l.p < 0.0 {
                return err(format!("load {}: active power must be nonnegative", l.id));
            }
            if !(0.0..=1.0).contains(&l.sheddable_fraction) {
                return err(format!("load {}: sheddable_fraction outside [0,1]", l.id));
            }
        }
        // Each initially energized island needs exactly one slack bus.
        for island in self.energized_islands() {
            let slacks = island
                .iter()
                .filter(|id| self.bus(**id).map(|b| b.bus_type) == Some(BusType::Slack))
                .count();
            if slacks != 1 {
                return err(format!(
                    "island containing bus {} has {} slack buses, expected exactly 1",
                    island[0], slacks
                ));
            }
        }
        Ok(())
    }

    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.bus_idx.get(&id).map(|&i| &self.buses[i])
    }

    pub fn branch(&self, id: BranchId) -> Option<&Branch> {
        self.branch_idx.get(&id).map(|&i| &self.branches[i])
    }

    pub fn bus_mut(&mut self, id: BusId) -> Option<&mut Bus> {
        let i = *self.bus_idx.get(&id)?;
        Some(&mut self.buses[i])
    }

    pub fn branch_mut(&mut self, id: BranchId) -> Option<&mut Branch> {
        let i = *self.branch_idx.get(&id)?;
        Some(&mut self.branches[i])
    }

    pub fn in_service_buses(&self) -> impl Iterator<Item = &Bus> {
        self.buses.iter().filter(|b| b.status.in_service())
    }

    /// Branches that can carry power: in service themselves with both
    /// endpoint buses in service.
    pub fn effective_branches(&self) -> impl Iterator<Item = &Branch> {
        self.branches.iter().filter(|br| {
            br.status.in_service()
                && self.bus(br.from_bus).is_some_and(|b| b.status.in_service())
                && self.bus(br.to_bus).is_some_and(|b| b.status.in_service())
        })
    }

    pub fn in_service_generators(&self) -> impl Iterator<Item = &Generator> {
        self.generators.iter().filter(|g| g.status.in_service())
    }

    pub fn in_service_loads(&self) -> impl Iterator<Item = &Load> {
        self.loads.iter().filter(|l| l.status.in_service())
    }

    pub fn in_service_bus_count(&self) -> usize {
        self.in_service_buses().count()
    }

    /// Marks the given branches and buses as tripped. Generators and loads
    /// attached to a tripped bus go out of service with it. Already-tripped
    /// ids are accepted unchanged; unknown ids are an error. Newly isolated
    /// neighbours are left alone -- the cascade loop owns that ordering.
    pub fn remove_elements(
        &mut self,
        branch_ids: &[BranchId],
        bus_ids: &[BusId],
    ) -> Result<(), NetworkError> {
        for &id in branch_ids {
            let br = self.branch_mut(id).ok_or(NetworkError::UnknownBranch(id))?;
            br.status = ElementStatus::Tripped;
        }
        for &id in bus_ids {
            let bus = self.bus_mut(id).ok_or(NetworkError::UnknownBus(id))?;
            bus.status = ElementStatus::Tripped;
        }
        for &id in bus_ids {
            for g in &mut self.generators {
                if g.bus == id {
                    g.status = ElementStatus::Tripped;
                }
            }
            for l in &mut self.loads {
                if l.bus == id {
                    l.status = ElementStatus::Tripped;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests;
