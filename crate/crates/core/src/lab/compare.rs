//! Distance between a thin-channel solution and the limit solution.

use crate::coefficients::CoefficientSet;
use crate::epsilon::EpsilonSolution;
use crate::error::{Error, Result};
use crate::geometry::build_grids;
use crate::limit::LimitSolution;
use crate::norms::{diff, NormSuite};

/// One row of the sweep report. `ratio_t_n` is `None` when the normal
/// velocity vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub epsilon: f64,
    pub err_v1_hdiv: f64,
    pub err_vt: f64,
    pub err_dz_vt: f64,
    pub err_vn_hdz: f64,
    pub err_p1: f64,
    pub err_p2: f64,
    pub energy_residual: f64,
    pub apriori_e: f64,
    pub ratio_t_n: Option<f64>,
    pub vanish_dz_vt: f64,
    pub vanish_grad_t_eps_vn: f64,
}

pub const COLUMNS: [&str; 12] = [
    "epsilon",
    "err_v1_hdiv",
    "err_vT",
    "err_dz_vT",
    "err_vN_hdz",
    "err_p1",
    "err_p2",
    "energy_residual",
    "apriori_E",
    "ratio_T_N",
    "vanish_dzvT",
    "vanish_gradT_epsvN",
];

impl ComparisonRow {
    /// Values in [`COLUMNS`] order.
    pub fn values(&self) -> [Option<f64>; 12] {
        [
            Some(self.epsilon),
            Some(self.err_v1_hdiv),
            Some(self.err_vt),
            Some(self.err_dz_vt),
            Some(self.err_vn_hdz),
            Some(self.err_p1),
            Some(self.err_p2),
            Some(self.energy_residual),
            Some(self.apriori_e),
            self.ratio_t_n,
            Some(self.vanish_dz_vt),
            Some(self.vanish_grad_t_eps_vn),
        ]
    }

    pub fn column(&self, name: &str) -> Option<f64> {
        COLUMNS.iter().position(|c| *c == name).and_then(|i| self.values()[i])
    }
}

/// `|v_T| / |v_N|` over the channel, `None` if the denominator is below 1e-14.
pub fn velocity_ratio(sol: &EpsilonSolution) -> Option<f64> {
    let s = NormSuite::new(&sol.grid);
    let den = s.normal_l2(&sol.vn);
    if den < 1e-14 {
        None
    } else {
        Some(s.tangential_l2(&sol.vt) / den)
    }
}

/// Compare `eps_sol` with the limit. The tangential comparison is between
/// `eps * v_T` and the depth-independent `V`; the channel pressure is compared
/// with `P` extended constant in depth. `energy_residual` and `apriori_e` are
/// supplied by the caller since they need the assembled system.
pub fn compare_to_limit(
    eps_sol: &EpsilonSolution,
    lim: &LimitSolution,
    c: &CoefficientSet,
    energy_residual: f64,
    apriori_e: f64,
) -> Result<ComparisonRow> {
    let g = &eps_sol.grid;
    if !g.same_shape(&lim.grid) {
        return Err(Error::GridMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            g.nx, g.ny, g.nz, lim.grid.nx, lim.grid.ny, lim.grid.nz
        )));
    }
    let eps = eps_sol.epsilon;
    let (_, layout) = build_grids(g.domain, g.nx, g.ny, g.nz)?;
    let lifted = lim.lift(eps, &layout)?;
    let s = NormSuite::new(g);

    let du = diff(&eps_sol.u1, &lifted.u1);
    let dv = diff(&eps_sol.v1, &lifted.v1);
    let scaled_vt: Vec<f64> = eps_sol.vt.iter().map(|x| eps * x).collect();
    let lim_vt: Vec<f64> = lifted.vt.iter().map(|x| eps * x).collect();
    let dvt = diff(&scaled_vt, &lim_vt);
    let dvn = diff(&eps_sol.vn, &lifted.vn);
    let dp1 = diff(&eps_sol.p1, &lifted.p1);
    let dp2 = diff(&eps_sol.p2, &lifted.p2);

    Ok(ComparisonRow {
        epsilon: eps,
        err_v1_hdiv: s.hdiv(&du, &dv),
        err_vt: s.tangential_l2(&dvt) + s.tangential_grad(&dvt),
        err_dz_vt: s.tangential_dz(&scaled_vt),
        err_vn_hdz: s.hdz(&dvn),
        err_p1: s.porous_cells_l2(&dp1) + s.porous_weighted_l2(&c.q, &du, &dv),
        err_p2: s.channel_cells_l2(&dp2),
        energy_residual,
        apriori_e,
        ratio_t_n: velocity_ratio(eps_sol),
        vanish_dz_vt: s.tangential_dz(&eps_sol.vt),
        vanish_grad_t_eps_vn: eps * s.normal_grad(&eps_sol.vn),
    })
}
