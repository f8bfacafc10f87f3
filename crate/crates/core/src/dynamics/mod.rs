//! Time-domain transient stability simulation.
//!
//! Machine model: classical constant-flux machine behind its transient
//! reactance, wrapped with a first-order droop governor and a first-order
//! excitation block that drives the internal EMF magnitude. This is the
//! smallest model that exhibits the behaviours the cascade engine needs:
//! rotor-angle swings, out-of-step separation, governor saturation under
//! active-power deficit, and field-limit stress under reactive deficit.
//!
//! Integration is partitioned-explicit RK4: loads are converted to constant
//! admittances at initialization, so each stage evaluation solves one linear
//! network equation (Norton machine sources behind x'd) against a cached
//! factorization that is only rebuilt on topology changes.

mod stepper;

pub use stepper::{init_dynamics, DynamicsError, Stepper};

use num_complex::Complex64;

use crate::acpf::BusIndex;
use crate::netmodel::{BusId, GenId, Network};

/// Synchronous speed, rad/s (60 Hz system).
pub const OMEGA_S: f64 = 2.0 * std::f64::consts::PI * 60.0;
pub const NOMINAL_HZ: f64 = 60.0;
/// Bolted three-phase fault conductance, pu.
pub const FAULT_CONDUCTANCE: f64 = 1e5;

/// Dynamic state of one synchronous machine.
///
/// `e_prime` is the internal EMF magnitude; the excitation block drives it
/// directly (field voltage and EMF collapse to one state in the classical
/// model). The field-current proxy used by field overcurrent relays is
/// `e_prime / e_prime0`, i.e. 1.0 at the initial operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineState {
    pub gen_id: GenId,
    pub bus: BusId,
    /// Rotor angle, rad (synchronous frame).
    pub delta: f64,
    /// Speed deviation, pu of synchronous speed.
    pub omega_dev: f64,
    /// Internal EMF magnitude, pu.
    pub e_prime: f64,
    /// Governor output (mechanical power), pu.
    pub p_mech: f64,
    /// Governor power reference, fixed at the initial dispatch.
    pub p_ref: f64,
    /// Exciter voltage reference, back-solved so t=0 is an equilibrium.
    pub v_ref: f64,
    /// Initial EMF magnitude, the base for the field-current proxy.
    pub e_prime0: f64,
    /// Electrical power output at the last network solution, pu.
    pub p_elec: f64,
}

impl MachineState {
    /// Field current proxy, per-unit of the initial field level.
    pub fn i_fd(&self) -> f64 {
        self.e_prime / self.e_prime0
    }

    /// Field voltage alias; equal to the EMF state in this model.
    pub fn e_fd(&self) -> f64 {
        self.e_prime
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IslandInfo {
    pub buses: Vec<BusId>,
    /// Inertia-weighted mean rotor angle of the island's machines, rad.
    pub coi_angle: f64,
    /// Center-of-inertia frequency, Hz. `None` for machine-less islands.
    pub frequency_hz: Option<f64>,
}

/// Time-stamped electrical state of the whole system.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub t: f64,
    pub index: BusIndex,
    /// Bus voltage phasors at the last network solution, pu.
    pub voltages: Vec<Complex64>,
    /// One entry per in-service machine, in generator-id order.
    pub machines: Vec<MachineState>,
    pub islands: Vec<IslandInfo>,
}

impl SystemState {
    pub fn voltage(&self, bus: BusId) -> Option<Complex64> {
        self.index.position(bus).map(|i| self.voltages[i])
    }

    pub fn machine(&self, gen_id: GenId) -> Option<&MachineState> {
        self.machines.iter().find(|m| m.gen_id == gen_id)
    }

    pub fn island_containing(&self, bus: BusId) -> Option<&IslandInfo> {
        self.islands.iter().find(|i| i.buses.contains(&bus))
    }

    /// Total electrical generator output, pu.
    pub fn total_generation(&self) -> f64 {
        self.machines.iter().map(|m| m.p_elec).sum()
    }

    /// Actual power consumed by the constant-impedance loads, pu.
    pub fn total_load(&self, net: &Network, stepper: &Stepper) -> f64 {
        stepper.load_consumption(self, net)
    }
}

/// A three-phase bolted fault: a large real shunt at each listed bus from
/// `start` until cleared (explicitly or after `clearing_time`).
#[derive(Debug, Clone, PartialEq)]
pub struct FaultSpec {
    pub buses: Vec<BusId>,
    pub start: f64,
    pub clearing_time: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct DynamicsConfig {
    /// Integration step, s.
    pub dt: f64,
    /// Hold governor outputs at their current value (test instrumentation).
    pub freeze_governor: bool,
    /// Hold exciter outputs at their current value (test instrumentation).
    pub freeze_exciter: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig { dt: 0.01, freeze_governor: false, freeze_exciter: false }
    }
}
