//! Partitioned-explicit integration of the machine ODEs against the
//! algebraic network equations.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DVector, Dyn};
use num_complex::Complex64;
use thiserror::Error;

use super::{
    DynamicsConfig, FaultSpec, IslandInfo, MachineState, SystemState, FAULT_CONDUCTANCE,
    NOMINAL_HZ,
};
use crate::acpf::{build_ybus, PowerFlowSolution};
use crate::netmodel::{BusId, GenId, LoadId, Network};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("power flow solution did not converge")]
    NotConverged,
    #[error("generator {0} dispatched above its governor limit")]
    DispatchAboveLimit(GenId),
    #[error("unknown or out-of-service bus {0}")]
    UnknownBus(BusId),
    #[error("network algebraic solve failed (singular or non-finite)")]
    Singular,
}

#[derive(Debug, Clone, Copy, Default)]
struct Derivatives {
    d_delta: f64,
    d_omega: f64,
    d_e_prime: f64,
    d_p_mech: f64,
}

struct NetCache {
    index: crate::acpf::BusIndex,
    lu: nalgebra::LU<Complex64, Dyn, Dyn>,
}

/// Owns the integration configuration, the constant-impedance load
/// conversion, active fault shunts, and the cached network factorization.
/// Distinct simulations never share a stepper.
pub struct Stepper {
    pub config: DynamicsConfig,
    load_y: HashMap<LoadId, Complex64>,
    load_v0sq: HashMap<LoadId, f64>,
    fault_g: BTreeMap<BusId, f64>,
    cache: Option<NetCache>,
}

impl Stepper {
    /// Back-solves machine states from a converged power flow so every
    /// derivative is zero at t=0, and freezes loads as constant admittances
    /// anchored at their initial voltage.
    pub fn init(
        net: &Network,
        pf: &PowerFlowSolution,
        config: DynamicsConfig,
    ) -> Result<(Stepper, SystemState), DynamicsError> {
        if !pf.converged {
            return Err(DynamicsError::NotConverged);
        }

        let mut load_p = HashMap::new();
        let mut load_q = HashMap::new();
        for l in net.in_service_loads() {
            *load_p.entry(l.bus).or_insert(0.0) += l.p;
            *load_q.entry(l.bus).or_insert(0.0) += l.q;
        }

        // Group in-service generators by bus and split the bus-level
        // generation among them in proportion to their dispatch.
        let mut by_bus: BTreeMap<BusId, Vec<&crate::netmodel::Generator>> = BTreeMap::new();
        for g in net.in_service_generators() {
            by_bus.entry(g.bus).or_default().push(g);
        }

        let mut machines = Vec::new();
        for (bus, gens) in &by_bus {
            let i = pf.index.position(*bus).ok_or(DynamicsError::UnknownBus(*bus))?;
            let v = Complex64::from_polar(pf.vm[i], pf.va[i]);
            let p_bus = pf.p_calc[i] + load_p.get(bus).copied().unwrap_or(0.0);
            let q_bus = pf.q_calc[i] + load_q.get(bus).copied().unwrap_or(0.0);
            let p_set_sum: f64 = gens.iter().map(|g| g.p_set).sum();
            for g in gens {
                let w = if p_set_sum.abs() > 1e-12 {
                    g.p_set / p_set_sum
                } else {
                    1.0 / gens.len() as f64
                };
                let s = Complex64::new(p_bus * w, q_bus * w);
                let current = (s / v).conj();
                let emf = v + Complex64::new(0.0, g.xd_prime) * current;
                let e_prime0 = emf.norm();
                let delta = emf.arg();
                let p_elec = (emf * current.conj()).re;
                if p_elec > g.governor.p_max + 1e-9 {
                    return Err(DynamicsError::DispatchAboveLimit(g.id));
                }
                machines.push(MachineState {
                    gen_id: g.id,
                    bus: *bus,
                    delta,
                    omega_dev: 0.0,
                    e_prime: e_prime0,
                    p_mech: p_elec,
                    p_ref: p_elec,
                    v_ref: v.norm() + e_prime0 / g.exciter.k_a,
                    e_prime0,
                    p_elec,
                });
            }
        }
        machines.sort_by_key(|m| m.gen_id);

        let mut load_y = HashMap::new();
        let mut load_v0sq = HashMap::new();
        for l in net.in_service_loads() {
            let i = pf.index.position(l.bus).ok_or(DynamicsError::UnknownBus(l.bus))?;
            let v0sq = pf.vm[i] * pf.vm[i];
            load_y.insert(l.id, Complex64::new(l.p, -l.q) / v0sq);
            load_v0sq.insert(l.id, v0sq);
        }

        let mut stepper = Stepper {
            config,
            load_y,
            load_v0sq,
            fault_g: BTreeMap::new(),
            cache: None,
        };
        let voltages = stepper.solve_network(net, &machines)?;
        let index = stepper.cache.as_ref().unwrap().index.clone();
        let mut machines = machines;
        stepper.record_electrical_power(&index, &voltages, &mut machines, net);
        let islands = compute_islands(net, &machines);
        Ok((
            stepper,
            SystemState { t: 0.0, index, voltages, machines, islands },
        ))
    }

    /// Drops any network factorization; call after any change to topology,
    /// loads, generators or fault state.
    pub fn invalidate_topology(&mut self) {
        self.cache = None;
    }

    /// Re-reads current load p/q into the constant-impedance conversion,
    /// keeping each load's original anchor voltage. Used after shedding.
    pub fn refresh_loads(&mut self, net: &Network) {
        for l in &net.loads {
            if let Some(v0sq) = self.load_v0sq.get(&l.id) {
                self.load_y.insert(l.id, Complex64::new(l.p, -l.q) / v0sq);
            }
        }
        self.invalidate_topology();
    }

    /// Stamps a bolted three-phase fault shunt at each listed bus.
    pub fn apply_fault(&mut self, net: &Network, spec: &FaultSpec) -> Result<(), DynamicsError> {
        for &bus in &spec.buses {
            let b = net.bus(bus).ok_or(DynamicsError::UnknownBus(bus))?;
            if !b.status.in_service() {
                return Err(DynamicsError::UnknownBus(bus));
            }
            self.fault_g.insert(bus, FAULT_CONDUCTANCE);
        }
        self.invalidate_topology();
        Ok(())
    }

    /// Removes the fault shunts; exact inverse of [`Stepper::apply_fault`].
    pub fn clear_fault(&mut self, net: &Network, spec: &FaultSpec) -> Result<(), DynamicsError> {
        for &bus in &spec.buses {
            net.bus(bus).ok_or(DynamicsError::UnknownBus(bus))?;
            self.fault_g.remove(&bus);
        }
        self.invalidate_topology();
        Ok(())
    }

    pub fn has_active_fault(&self) -> bool {
        !self.fault_g.is_empty()
    }

    /// One RK4 step of length `config.dt`. Each stage solves the network
    /// algebraics at the stage state; the governor and exciter states are
    /// clamped to their limits after the combination.
    pub fn step(&mut self, state: &SystemState, net: &Network) -> Result<SystemState, DynamicsError> {
        let dt = self.config.dt;
        let params = self.machine_params(net, &state.machines);

        let y0 = state.machines.clone();
        let k1 = self.derivatives(net, &y0, &params)?;
        let y_a = advance(&y0, &k1, dt / 2.0);
        let k2 = self.derivatives(net, &y_a, &params)?;
        let y_b = advance(&y0, &k2, dt / 2.0);
        let k3 = self.derivatives(net, &y_b, &params)?;
        let y_c = advance(&y0, &k3, dt);
        let k4 = self.derivatives(net, &y_c, &params)?;

        let mut next: Vec<MachineState> = y0
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let mut nm = m.clone();
                nm.delta += dt / 6.0
                    * (k1[i].d_delta + 2.0 * k2[i].d_delta + 2.0 * k3[i].d_delta + k4[i].d_delta);
                nm.omega_dev += dt / 6.0
                    * (k1[i].d_omega + 2.0 * k2[i].d_omega + 2.0 * k3[i].d_omega + k4[i].d_omega);
                nm.e_prime += dt / 6.0
                    * (k1[i].d_e_prime
                        + 2.0 * k2[i].d_e_prime
                        + 2.0 * k3[i].d_e_prime
                        + k4[i].d_e_prime);
                nm.p_mech += dt / 6.0
                    * (k1[i].d_p_mech
                        + 2.0 * k2[i].d_p_mech
                        + 2.0 * k3[i].d_p_mech
                        + k4[i].d_p_mech);
                nm.p_mech = nm.p_mech.clamp(0.0, params[i].p_max);
                nm.e_prime = nm.e_prime.clamp(0.0, params[i].efd_max);
                nm
            })
            .collect();

        let voltages = self.solve_network(net, &next)?;
        let index = self.cache.as_ref().unwrap().index.clone();
        self.record_electrical_power(&index, &voltages, &mut next, net);
        let islands = compute_islands(net, &next);
        Ok(SystemState { t: state.t + dt, index, voltages, machines: next, islands })
    }

    /// Rebuilds the algebraic picture after external topology changes:
    /// machines of out-of-service generators are dropped, the factorization
    /// is rebuilt and voltages re-solved at the current rotor states.
    pub fn resync(&mut self, state: &SystemState, net: &Network) -> Result<SystemState, DynamicsError> {
        self.invalidate_topology();
        let live: Vec<GenId> = net.in_service_generators().map(|g| g.id).collect();
        let mut machines: Vec<MachineState> = state
            .machines
            .iter()
            .filter(|m| live.contains(&m.gen_id))
            .cloned()
            .collect();
        let voltages = self.solve_network(net, &machines)?;
        let index = self.cache.as_ref().unwrap().index.clone();
        self.record_electrical_power(&index, &voltages, &mut machines, net);
        let islands = compute_islands(net, &machines);
        Ok(SystemState { t: state.t, index, voltages, machines, islands })
    }

    /// Actual active power drawn by the constant-impedance loads, pu.
    pub fn load_consumption(&self, state: &SystemState, net: &Network) -> f64 {
        net.in_service_loads()
            .filter_map(|l| {
                let v = state.voltage(l.bus)?;
                let v0sq = self.load_v0sq.get(&l.id)?;
                Some(v.norm_sqr() * l.p / v0sq)
            })
            .sum()
    }

    fn machine_params(&self, net: &Network, machines: &[MachineState]) -> Vec<MachineParams> {
        machines
            .iter()
            .map(|m| {
                let g = net
                    .generators
                    .iter()
                    .find(|g| g.id == m.gen_id)
                    .expect("machine has a backing generator");
                MachineParams {
                    h: g.inertia_h,
                    d: g.damping_d,
                    xd_prime: g.xd_prime,
                    p_max: g.governor.p_max,
                    droop: g.governor.droop,
                    t_gov: g.governor.t_gov,
                    k_a: g.exciter.k_a,
                    t_ex: g.exciter.t_ex,
                    efd_max: g.exciter.efd_max,
                }
            })
            .collect()
    }

    fn derivatives(
        &mut self,
        net: &Network,
        machines: &[MachineState],
        params: &[MachineParams],
    ) -> Result<Vec<Derivatives>, DynamicsError> {
        let voltages = self.solve_network(net, machines)?;
        let index = &self.cache.as_ref().unwrap().index;
        let mut out = Vec::with_capacity(machines.len());
        for (m, p) in machines.iter().zip(params) {
            let vk = index
                .position(m.bus)
                .map(|i| voltages[i])
                .ok_or(DynamicsError::Singular)?;
            let emf = Complex64::from_polar(m.e_prime, m.delta);
            let current = (emf - vk) / Complex64::new(0.0, p.xd_prime);
            let p_e = (emf * current.conj()).re;

            let d_delta = super::OMEGA_S * m.omega_dev;
            let d_omega = (m.p_mech - p_e - p.d * m.omega_dev) / (2.0 * p.h);

            let mut d_p_mech = if self.config.freeze_governor {
                0.0
            } else {
                (m.p_ref - m.omega_dev / p.droop - m.p_mech) / p.t_gov
            };
            // Anti-windup at the governor limits.
            if (m.p_mech >= p.p_max && d_p_mech > 0.0) || (m.p_mech <= 0.0 && d_p_mech < 0.0) {
                d_p_mech = 0.0;
            }

            let mut d_e_prime = if self.config.freeze_exciter {
                0.0
            } else {
                (p.k_a * (m.v_ref - vk.norm()) - m.e_prime) / p.t_ex
            };
            if (m.e_prime >= p.efd_max && d_e_prime > 0.0) || (m.e_prime <= 0.0 && d_e_prime < 0.0)
            {
                d_e_prime = 0.0;
            }

            out.push(Derivatives { d_delta, d_omega, d_e_prime, d_p_mech });
        }
        Ok(out)
    }

    fn record_electrical_power(
        &self,
        index: &crate::acpf::BusIndex,
        voltages: &[Complex64],
        machines: &mut [MachineState],
        net: &Network,
    ) {
        for m in machines.iter_mut() {
            let xd = net
                .generators
                .iter()
                .find(|g| g.id == m.gen_id)
                .map(|g| g.xd_prime)
                .unwrap_or(1.0);
            if let Some(i) = index.position(m.bus) {
                let emf = Complex64::from_polar(m.e_prime, m.delta);
                let current = (emf - voltages[i]) / Complex64::new(0.0, xd);
                m.p_elec = (emf * current.conj()).re;
            }
        }
    }

    /// Solves `Y_aug V = I_norton` with the cached factorization, building
    /// it first if topology changed. `Y_aug` is the branch Y-bus plus load
    /// admittances, machine transient admittances and any fault shunts.
    fn solve_network(
        &mut self,
        net: &Network,
        machines: &[MachineState],
    ) -> Result<Vec<Complex64>, DynamicsError> {
        if self.cache.is_none() {
            let yb = build_ybus(net).map_err(|_| DynamicsError::Singular)?;
            let mut y = yb.y;
            let index = yb.index;
            for l in net.in_service_loads() {
                if let (Some(i), Some(ly)) = (index.position(l.bus), self.load_y.get(&l.id)) {
                    y[(i, i)] += ly;
                }
            }
            for g in net.in_service_generators() {
                if let Some(i) = index.position(g.bus) {
                    y[(i, i)] += Complex64::new(1.0, 0.0) / Complex64::new(0.0, g.xd_prime);
                }
            }
            for (&bus, &g) in &self.fault_g {
                if let Some(i) = index.position(bus) {
                    y[(i, i)] += Complex64::new(g, 0.0);
                }
            }
            let lu = y.lu();
            self.cache = Some(NetCache { index, lu });
        }
        let cache = self.cache.as_ref().unwrap();
        let n = cache.index.len();
        let mut inj = DVector::<Complex64>::zeros(n);
        for m in machines {
            let i = cache.index.position(m.bus).ok_or(DynamicsError::Singular)?;
            let xd = net
                .generators
                .iter()
                .find(|g| g.id == m.gen_id)
                .map(|g| g.xd_prime)
                .ok_or(DynamicsError::Singular)?;
            inj[i] += Complex64::from_polar(m.e_prime, m.delta) / Complex64::new(0.0, xd);
        }
        let v = cache.lu.solve(&inj).ok_or(DynamicsError::Singular)?;
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(DynamicsError::Singular);
        }
        Ok(v.iter().copied().collect())
    }
}

#[derive(Debug, Clone, Copy)]
struct MachineParams {
    h: f64,
    d: f64,
    xd_prime: f64,
    p_max: f64,
    droop: f64,
    t_gov: f64,
    k_a: f64,
    t_ex: f64,
    efd_max: f64,
}

fn advance(y0: &[MachineState], k: &[Derivatives], h: f64) -> Vec<MachineState> {
    y0.iter()
        .zip(k)
        .map(|(m, d)| {
            let mut nm = m.clone();
            nm.delta += h * d.d_delta;
            nm.omega_dev += h * d.d_omega;
            nm.e_prime += h * d.d_e_prime;
            nm.p_mech += h * d.d_p_mech;
            nm
        })
        .collect()
}

fn compute_islands(net: &Network, machines: &[MachineState]) -> Vec<IslandInfo> {
    let gen_h: HashMap<GenId, f64> =
        net.generators.iter().map(|g| (g.id, g.inertia_h)).collect();
    net.energized_islands()
        .into_iter()
        .map(|buses| {
            let mut h_sum = 0.0;
            let mut coi = 0.0;
            let mut w_coi = 0.0;
            for m in machines {
                if buses.binary_search(&m.bus).is_ok() {
                    let h = gen_h.get(&m.gen_id).copied().unwrap_or(0.0);
                    h_sum += h;
                    coi += h * m.delta;
                    w_coi += h * m.omega_dev;
                }
            }
            if h_sum > 0.0 {
                IslandInfo {
                    buses,
                    coi_angle: coi / h_sum,
                    frequency_hz: Some(NOMINAL_HZ * (1.0 + w_coi / h_sum)),
                }
            } else {
                IslandInfo { buses, coi_angle: 0.0, frequency_hz: None }
            }
        })
        .collect()
}

/// Convenience wrapper matching the documented operation shape.
pub fn init_dynamics(
    net: &Network,
    pf: &PowerFlowSolution,
    config: DynamicsConfig,
) -> Result<(Stepper, SystemState), DynamicsError> {
    Stepper::init(net, pf, config)
}
