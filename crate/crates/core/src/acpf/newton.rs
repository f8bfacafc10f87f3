//! Full Newton-Raphson power flow in polar coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{build_ybus, AcpfError, BusIndex};
use crate::netmodel::{BusType, Network};

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Convergence threshold on max |dP|, |dQ| in per-unit.
    pub tolerance: f64,
    /// Cap on Newton corrections before giving up.
    pub max_iterations: usize,
    /// PV buses switch to PQ at their aggregate generator Q limit,
    /// re-checked every iteration. Disable to match published solutions
    /// computed without limit enforcement.
    pub enforce_q_limits: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tolerance: 1e-8, max_iterations: 20, enforce_q_limits: true }
    }
}

#[derive(Debug, Clone)]
pub struct PowerFlowSolution {
    pub index: BusIndex,
    /// Voltage magnitude per indexed bus, pu.
    pub vm: Vec<f64>,
    /// Voltage angle per indexed bus, rad. Slack angle is exactly 0.
    pub va: Vec<f64>,
    /// Net active/reactive injection at the solution, pu.
    pub p_calc: Vec<f64>,
    pub q_calc: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch: f64,
}

impl PowerFlowSolution {
    pub fn voltage(&self, bus: crate::netmodel::BusId) -> Option<Complex64> {
        let i = self.index.position(bus)?;
        Some(Complex64::from_polar(self.vm[i], self.va[i]))
    }

    pub fn vm_at(&self, bus: crate::netmodel::BusId) -> Option<f64> {
        self.index.position(bus).map(|i| self.vm[i])
    }

    pub fn va_at(&self, bus: crate::netmodel::BusId) -> Option<f64> {
        self.index.position(bus).map(|i| self.va[i])
    }
}

/// Complex power injections S = V o conj(Y V), split into (P, Q).
pub fn power_injections(
    y: &DMatrix<Complex64>,
    vm: &[f64],
    va: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = vm.len();
    let v: Vec<Complex64> =
        (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += y[(i, j)] * v[j];
        }
        let s = v[i] * acc.conj();
        p[i] = s.re;
        q[i] = s.im;
    }
    (p, q)
}

/// Analytic power-flow Jacobian for the selected mismatch rows and unknown
/// columns, in the ordering [dP rows; dQ rows] x [theta cols; vm cols].
pub fn power_flow_jacobian(
    y: &DMatrix<Complex64>,
    vm: &[f64],
    va: &[f64],
    p_rows: &[usize],
    q_rows: &[usize],
    theta_cols: &[usize],
    vm_cols: &[usize],
) -> DMatrix<f64> {
    let (p, q) = power_injections(y, vm, va);
    let nr = p_rows.len() + q_rows.len();
    let nc = theta_cols.len() + vm_cols.len();
    let mut jac = DMatrix::<f64>::zeros(nr, nc);

    let g = |i: usize, j: usize| y[(i, j)].re;
    let b = |i: usize, j: usize| y[(i, j)].im;

    let dp_dth = |i: usize, j: usize| {
        if i == j {
            -q[i] - b(i, i) * vm[i] * vm[i]
        } else {
            let th = va[i] - va[j];
            vm[i] * vm[j] * (g(i, j) * th.sin() - b(i, j) * th.cos())
        }
    };
    let dp_dv = |i: usize, j: usize| {
        if i == j {
            p[i] / vm[i] + g(i, i) * vm[i]
        } else {
            let th = va[i] - va[j];
            vm[i] * (g(i, j) * th.cos() + b(i, j) * th.sin())
        }
    };
    let dq_dth = |i: usize, j: usize| {
        if i == j {
            p[i] - g(i, i) * vm[i] * vm[i]
        } else {
            let th = va[i] - va[j];
            -vm[i] * vm[j] * (g(i, j) * th.cos() + b(i, j) * th.sin())
        }
    };
    let dq_dv = |i: usize, j: usize| {
        if i == j {
            q[i] / vm[i] - b(i, i) * vm[i]
        } else {
            let th = va[i] - va[j];
            vm[i] * (g(i, j) * th.sin() - b(i, j) * th.cos())
        }
    };

    for (r, &i) in p_rows.iter().enumerate() {
        for (c, &j) in theta_cols.iter().enumerate() {
            jac[(r, c)] = dp_dth(i, j);
        }
        for (c, &j) in vm_cols.iter().enumerate() {
            jac[(r, theta_cols.len() + c)] = dp_dv(i, j);
        }
    }
    for (r, &i) in q_rows.iter().enumerate() {
        let row = p_rows.len() + r;
        for (c, &j) in theta_cols.iter().enumerate() {
            jac[(row, c)] = dq_dth(i, j);
        }
        for (c, &j) in vm_cols.iter().enumerate() {
            jac[(row, theta_cols.len() + c)] = dq_dv(i, j);
        }
    }
    jac
}

pub fn solve_ac(
    net: &Network,
    init: Option<&PowerFlowSolution>,
) -> Result<PowerFlowSolution, AcpfError> {
    solve_ac_with(net, init, SolveOptions::default())
}

pub fn solve_ac_with(
    net: &Network,
    init: Option<&PowerFlowSolution>,
    opts: SolveOptions,
) -> Result<PowerFlowSolution, AcpfError> {
    let yb = build_ybus(net)?;
    let index = yb.index.clone();
    let n = index.len();

    // Every island must carry exactly one slack reference.
    for island in net.energized_islands() {
        let slacks = island
            .iter()
            .filter(|&&id| net.bus(id).map(|b| b.bus_type) == Some(BusType::Slack))
            .count();
        if slacks != 1 {
            return Err(AcpfError::NoSlack(island[0]));
        }
    }

    // Scheduled injections and voltage setpoints.
    let mut p_spec = vec![0.0; n];
    let mut q_load = vec![0.0; n];
    let mut v_setpoint = vec![1.0; n];
    let mut q_min = vec![0.0; n];
    let mut q_max = vec![0.0; n];
    let mut has_gen = vec![false; n];
    for l in net.in_service_loads() {
        let i = index.position(l.bus).expect("load bus in service");
        p_spec[i] -= l.p;
        q_load[i] += l.q;
    }
    for g in net.in_service_generators() {
        let i = index.position(g.bus).expect("gen bus in service");
        p_spec[i] += g.p_set;
        q_min[i] += g.q_min;
        q_max[i] += g.q_max;
        if !has_gen[i] {
            v_setpoint[i] = g.v_set;
            has_gen[i] = true;
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Slack,
        Pv,
        /// Fixed reactive injection; `Some(q)` when a PV bus was pinned at
        /// a generator limit.
        Pq(Option<f64>),
    }
    let mut kind: Vec<Kind> = index
        .ids()
        .iter()
        .map(|&id| match net.bus(id).unwrap().bus_type {
            BusType::Slack => Kind::Slack,
            BusType::Pv if has_gen[index.position(id).unwrap()] => Kind::Pv,
            _ => Kind::Pq(None),
        })
        .collect();

    // Flat start unless a previous solution supplies a warm start.
    let mut vm = vec![1.0; n];
    let mut va = vec![0.0; n];
    if let Some(prev) = init {
        for (i, &id) in index.ids().iter().enumerate() {
            if let Some(pos) = prev.index.position(id) {
                vm[i] = prev.vm[pos];
                va[i] = prev.va[pos];
            }
        }
    }
    for i in 0..n {
        match kind[i] {
            Kind::Slack => {
                vm[i] = v_setpoint[i];
                va[i] = 0.0;
            }
            Kind::Pv => vm[i] = v_setpoint[i],
            Kind::Pq(_) => {}
        }
    }

    let q_spec = |kind: &[Kind], q_load: &[f64], i: usize| -> f64 {
        match kind[i] {
            Kind::Pq(Some(qg)) => qg - q_load[i],
            _ => -q_load[i],
        }
    };

    let mut iterations = 0usize;
    let mut converged = false;
    let mut max_mismatch = f64::INFINITY;

    loop {
        let (p_calc, q_calc) = power_injections(&yb.y, &vm, &va);

        // PV buses whose generators hit a reactive limit become PQ with the
        // aggregate limit pinned. One-way within a solve.
        if opts.enforce_q_limits && iterations > 0 {
            for i in 0..n {
                if kind[i] == Kind::Pv {
                    let qg = q_calc[i] + q_load[i];
                    if qg > q_max[i] + 1e-9 {
                        kind[i] = Kind::Pq(Some(q_max[i]));
                    } else if qg < q_min[i] - 1e-9 {
                        kind[i] = Kind::Pq(Some(q_min[i]));
                    }
                }
            }
        }

        let p_rows: Vec<usize> =
            (0..n).filter(|&i| kind[i] != Kind::Slack).collect();
        let q_rows: Vec<usize> =
            (0..n).filter(|&i| matches!(kind[i], Kind::Pq(_))).collect();

        max_mismatch = 0.0f64;
        let mut mismatch = DVector::<f64>::zeros(p_rows.len() + q_rows.len());
        for (r, &i) in p_rows.iter().enumerate() {
            mismatch[r] = p_spec[i] - p_calc[i];
            max_mismatch = max_mismatch.max(mismatch[r].abs());
        }
        for (r, &i) in q_rows.iter().enumerate() {
            let v = q_spec(&kind, &q_load, i) - q_calc[i];
            mismatch[p_rows.len() + r] = v;
            max_mismatch = max_mismatch.max(v.abs());
        }

        if max_mismatch <= opts.tolerance {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }

        let jac = power_flow_jacobian(&yb.y, &vm, &va, &p_rows, &q_rows, &p_rows, &q_rows);
        let Some(dx) = jac.lu().solve(&mismatch) else {
            break;
        };
        for (c, &i) in p_rows.iter().enumerate() {
            va[i] += dx[c];
        }
        for (c, &i) in q_rows.iter().enumerate() {
            vm[i] += dx[p_rows.len() + c];
        }
        iterations += 1;

        if vm.iter().any(|v| !v.is_finite() || *v <= 1e-3)
            || va.iter().any(|a| !a.is_finite())
        {
            break;
        }
    }

    let (p_calc, q_calc) = power_injections(&yb.y, &vm, &va);
    Ok(PowerFlowSolution {
        index,
        vm,
        va,
        p_calc,
        q_calc,
        converged,
        iterations,
        max_mismatch,
    })
}
