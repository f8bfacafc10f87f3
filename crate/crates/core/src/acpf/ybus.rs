//! Complex nodal admittance matrix assembly.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{AcpfError, BusIndex};
use crate::netmodel::Network;

/// Nodal admittance matrix over the in-service buses, per-unit.
///
/// Stored dense: the simulator targets desk-scale cases (tens to a few
/// hundred buses) where a dense factorization is faster than sparse
/// bookkeeping and can be cached across integration steps.
#[derive(Debug, Clone)]
pub struct AdmittanceMatrix {
    pub index: BusIndex,
    pub y: DMatrix<Complex64>,
}

/// Stamps every effective branch with the standard pi model: series
/// admittance `1/(r+jx)`, half line charging at each end, off-nominal tap
/// on the from side.
pub fn build_ybus(net: &Network) -> Result<AdmittanceMatrix, AcpfError> {
    let index = BusIndex::new(net);
    if index.is_empty() {
        return Err(AcpfError::EmptyNetwork);
    }
    let n = index.len();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for br in net.effective_branches() {
        if br.r == 0.0 && br.x == 0.0 {
            return Err(AcpfError::ZeroImpedanceBranch(br.id));
        }
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
        let ysh = Complex64::new(0.0, br.b_shunt / 2.0);
        let a = br.tap;
        let (i, j) = (
            index.position(br.from_bus).expect("effective branch endpoint"),
            index.position(br.to_bus).expect("effective branch endpoint"),
        );
        y[(i, i)] += (ys + ysh) / (a * a);
        y[(j, j)] += ys + ysh;
        y[(i, j)] += -ys / a;
        y[(j, i)] += -ys / a;
    }
    Ok(AdmittanceMatrix { index, y })
}
