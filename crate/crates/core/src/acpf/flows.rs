//! Per-branch complex power flows from a voltage solution.

use num_complex::Complex64;

use super::PowerFlowSolution;
use crate::netmodel::{BranchId, Network};

/// Complex power entering the branch at each end, pu on the system base.
/// Out-of-service branches (or branches with a dead end bus) carry zero.
#[derive(Debug, Clone, Copy)]
pub struct BranchFlow {
    pub branch_id: BranchId,
    pub s_from: Complex64,
    pub s_to: Complex64,
}

impl BranchFlow {
    pub fn mva_from(&self, base_mva: f64) -> f64 {
        self.s_from.norm() * base_mva
    }

    pub fn mva_to(&self, base_mva: f64) -> f64 {
        self.s_to.norm() * base_mva
    }
}

/// Pi-model branch currents/powers: half charging at each end, from-side
/// off-nominal tap. The from-side quantities are referred to the bus side
/// of the ideal transformer.
pub fn branch_flows(net: &Network, sol: &PowerFlowSolution) -> Vec<BranchFlow> {
    net.branches
        .iter()
        .map(|br| {
            let live = br.status.in_service();
            let (vf, vt) = (sol.voltage(br.from_bus), sol.voltage(br.to_bus));
            match (live, vf, vt) {
                (true, Some(vf), Some(vt)) => {
                    let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
                    let ysh = Complex64::new(0.0, br.b_shunt / 2.0);
                    let a = br.tap;
                    let i_from = (vf / a * (ys + ysh) - vt * ys) / a;
                    let i_to = vt * (ys + ysh) - vf / a * ys;
                    BranchFlow {
                        branch_id: br.id,
                        s_from: vf * i_from.conj(),
                        s_to: vt * i_to.conj(),
                    }
                }
                _ => BranchFlow {
                    branch_id: br.id,
                    s_from: Complex64::new(0.0, 0.0),
                    s_to: Complex64::new(0.0, 0.0),
                },
            }
        })
        .collect()
}

/// Current phasor into the branch at the given end (pu), for relay
/// measurements. `from_end` selects which terminal looks into the line.
pub fn branch_current(
    net: &Network,
    branch_id: BranchId,
    from_end: bool,
    voltage_of: impl Fn(crate::netmodel::BusId) -> Option<Complex64>,
) -> Option<Complex64> {
    let br = net.branch(branch_id)?;
    if !br.status.in_service() {
        return None;
    }
    let vf = voltage_of(br.from_bus)?;
    let vt = voltage_of(br.to_bus)?;
    let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
    let ysh = Complex64::new(0.0, br.b_shunt / 2.0);
    let a = br.tap;
    Some(if from_end {
        (vf / a * (ys + ysh) - vt * ys) / a
    } else {
        vt * (ys + ysh) - vf / a * ys
    })
}
