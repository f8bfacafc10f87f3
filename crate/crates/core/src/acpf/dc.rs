//! Linear DC power flow: B theta = P under flat-voltage, lossless
//! assumptions, solved per energized island with the island slack at 0 rad.

use nalgebra::{DMatrix, DVector};

use super::{AcpfError, BusIndex};
use crate::netmodel::{BusType, Network};

#[derive(Debug, Clone)]
pub struct DcSolution {
    pub index: BusIndex,
    /// Bus voltage angle, rad.
    pub theta: Vec<f64>,
}

impl DcSolution {
    pub fn theta_at(&self, bus: crate::netmodel::BusId) -> Option<f64> {
        self.index.position(bus).map(|i| self.theta[i])
    }
}

pub fn solve_dc(net: &Network) -> Result<DcSolution, AcpfError> {
    let index = BusIndex::new(net);
    if index.is_empty() {
        return Err(AcpfError::EmptyNetwork);
    }
    let n = index.len();

    let mut p = vec![0.0; n];
    for l in net.in_service_loads() {
        p[index.position(l.bus).unwrap()] -= l.p;
    }
    for g in net.in_service_generators() {
        p[index.position(g.bus).unwrap()] += g.p_set;
    }

    let mut b = DMatrix::<f64>::zeros(n, n);
    for br in net.effective_branches() {
        let (i, j) = (
            index.position(br.from_bus).unwrap(),
            index.position(br.to_bus).unwrap(),
        );
        let susceptance = 1.0 / (br.x * br.tap);
        b[(i, i)] += susceptance;
        b[(j, j)] += susceptance;
        b[(i, j)] -= susceptance;
        b[(j, i)] -= susceptance;
    }

    let mut theta = vec![0.0; n];
    for island in net.energized_islands() {
        let slack = island
            .iter()
            .find(|&&id| net.bus(id).map(|b| b.bus_type) == Some(BusType::Slack))
            .copied()
            .ok_or(AcpfError::NoSlack(island[0]))?;
        let unknowns: Vec<usize> = island
            .iter()
            .filter(|&&id| id != slack)
            .map(|&id| index.position(id).unwrap())
            .collect();
        if unknowns.is_empty() {
            continue;
        }
        let m = unknowns.len();
        let mut b_red = DMatrix::<f64>::zeros(m, m);
        let mut p_red = DVector::<f64>::zeros(m);
        for (r, &i) in unknowns.iter().enumerate() {
            p_red[r] = p[i];
            for (c, &j) in unknowns.iter().enumerate() {
                b_red[(r, c)] = b[(i, j)];
            }
        }
        let th = b_red
            .lu()
            .solve(&p_red)
            .ok_or(AcpfError::Singular(island[0]))?;
        if th.iter().any(|v| !v.is_finite()) {
            return Err(AcpfError::Singular(island[0]));
        }
        for (r, &i) in unknowns.iter().enumerate() {
            theta[i] = th[r];
        }
    }
    Ok(DcSolution { index, theta })
}
