//! Operators of the rescaled channel: viscous forms, slip term, divergence.
//!
//! Tangential velocities live on vertical faces `(i, k)` with `i` in `0..=nx`,
//! normal velocities on horizontal faces `(i, k)` with `k` in `0..=nz`. Which
//! faces carry unknowns is decided by a [`ChannelIndex`].

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::geometry::{DofLayout, GridPair};
use crate::sparse::{CsrMatrix, SparseSym, SymBuilder};

pub trait ChannelIndex {
    fn tangential(&self, i: usize, k: usize) -> Option<usize>;
    fn normal(&self, i: usize, k: usize) -> Option<usize>;
    fn velocity_len(&self) -> usize;
}

impl ChannelIndex for DofLayout {
    fn tangential(&self, i: usize, k: usize) -> Option<usize> {
        self.channel_tangential_dof(i, k)
    }
    fn normal(&self, i: usize, k: usize) -> Option<usize> {
        self.channel_normal_dof(i, k)
    }
    fn velocity_len(&self) -> usize {
        self.n_velocity()
    }
}

/// Every channel face carries an unknown: tangential faces first, then normal.
#[derive(Clone, Copy, Debug)]
pub struct FullChannelIndex {
    pub nx: usize,
    pub nz: usize,
}

impl ChannelIndex for FullChannelIndex {
    fn tangential(&self, i: usize, k: usize) -> Option<usize> {
        Some(k * (self.nx + 1) + i)
    }
    fn normal(&self, i: usize, k: usize) -> Option<usize> {
        Some((self.nx + 1) * self.nz + k * self.nx + i)
    }
    fn velocity_len(&self) -> usize {
        (self.nx + 1) * self.nz + self.nx * (self.nz + 1)
    }
}

#[derive(Clone, Debug)]
pub struct ChannelBlocks {
    pub tangential: SparseSym,
    pub normal: SparseSym,
    pub slip: SparseSym,
    pub divergence: CsrMatrix,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

/// `wx |dx w_T|^2 + wz |dz w_T|^2`. Differences in x run between neighbouring
/// faces of a row; differences in z between neighbouring rows. No term reaches
/// the interface or the top, which leaves both ends natural.
pub fn tangential_form(g: &GridPair, idx: &dyn ChannelIndex, wx: f64, wz: f64) -> SparseSym {
    let (dx, dz) = (g.dx(), g.dz());
    let mut b = SymBuilder::new(idx.velocity_len());
    if wx != 0.0 {
        for k in 0..g.nz {
            for i in 0..g.nx {
                b.add_difference(idx.tangential(i, k), idx.tangential(i + 1, k), wx * dz / dx);
            }
        }
    }
    if wz != 0.0 {
        for k in 0..g.nz.saturating_sub(1) {
            for i in 0..=g.nx {
                let c = wz * g.vertical_face_width(i) / dz;
                b.add_difference(idx.tangential(i, k), idx.tangential(i, k + 1), c);
            }
        }
    }
    b.build()
}

/// `wx |dx w_N|^2 + wz |dz w_N|^2`. The walls hold `w_N = 0` half a cell away.
pub fn normal_form(g: &GridPair, idx: &dyn ChannelIndex, wx: f64, wz: f64) -> SparseSym {
    let (dx, dz) = (g.dx(), g.dz());
    let mut b = SymBuilder::new(idx.velocity_len());
    if wx != 0.0 {
        for k in 0..=g.nz {
            let h = g.normal_row_weight(k);
            b.add_difference(idx.normal(0, k), None, wx * h / (0.5 * dx));
            for i in 0..g.nx - 1 {
                b.add_difference(idx.normal(i, k), idx.normal(i + 1, k), wx * h / dx);
            }
            b.add_difference(idx.normal(g.nx - 1, k), None, wx * h / (0.5 * dx));
        }
    }
    if wz != 0.0 {
        for k in 0..g.nz {
            for i in 0..g.nx {
                b.add_difference(idx.normal(i, k), idx.normal(i, k + 1), wz * dx / dz);
            }
        }
    }
    b.build()
}

/// Trapezoid-in-z / midpoint-in-x mass of both channel components.
pub fn channel_mass(g: &GridPair, idx: &dyn ChannelIndex, wt: f64, wn: f64) -> SparseSym {
    let mut b = SymBuilder::new(idx.velocity_len());
    for k in 0..g.nz {
        for i in 0..=g.nx {
            if let Some(d) = idx.tangential(i, k) {
                b.add_diag(d, wt * g.vertical_face_width(i) * g.dz());
            }
        }
    }
    for k in 0..=g.nz {
        for i in 0..g.nx {
            if let Some(d) = idx.normal(i, k) {
                b.add_diag(d, wn * g.dx() * g.normal_row_weight(k));
            }
        }
    }
    b.build()
}

/// `(K_TT, K_NN)` with `eps^2 mu` on tangential derivatives and `mu` on `dz`.
pub fn assemble_viscous(c: &CoefficientSet, g: &GridPair, idx: &dyn ChannelIndex, eps: f64) -> Result<(SparseSym, SparseSym)> {
    check_eps(eps)?;
    let e2 = eps * eps;
    Ok((
        tangential_form(g, idx, e2 * c.mu, c.mu),
        normal_form(g, idx, e2 * c.mu, c.mu),
    ))
}

/// Slip term `eps^2 beta sqrt(Q)_11 int_Gamma v_T w_T`; the interface trace of
/// `v_T` is its value in the bottom row.
pub fn assemble_bjs(c: &CoefficientSet, g: &GridPair, idx: &dyn ChannelIndex, eps: f64) -> Result<SparseSym> {
    check_eps(eps)?;
    let w = eps * eps * c.beta * c.slip_factor()?;
    let mut b = SymBuilder::new(idx.velocity_len());
    if w != 0.0 {
        for i in 0..=g.nx {
            if let Some(d) = idx.tangential(i, 0) {
                b.add_diag(d, w * g.vertical_face_width(i));
            }
        }
    }
    Ok(b.build())
}

/// Rows are channel cells `k * nx + i`: `eps dz (vT_right - vT_left) + dx (vN_top - vN_bottom)`.
pub fn assemble_channel_divergence(g: &GridPair, idx: &dyn ChannelIndex, eps: f64) -> Result<CsrMatrix> {
    check_eps(eps)?;
    let (dx, dz) = (g.dx(), g.dz());
    let mut t = Vec::with_capacity(4 * g.nx * g.nz);
    for k in 0..g.nz {
        for i in 0..g.nx {
            let row = k * g.nx + i;
            let faces = [
                (idx.tangential(i, k), -eps * dz),
                (idx.tangential(i + 1, k), eps * dz),
                (idx.normal(i, k), -dx),
                (idx.normal(i, k + 1), dx),
            ];
            for (d, v) in faces {
                if let Some(col) = d {
                    t.push((row, col, v));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(g.nx * g.nz, idx.velocity_len(), t))
}

pub fn assemble_channel(c: &CoefficientSet, g: &GridPair, idx: &dyn ChannelIndex, eps: f64) -> Result<ChannelBlocks> {
    let (tangential, normal) = assemble_viscous(c, g, idx, eps)?;
    Ok(ChannelBlocks {
        tangential,
        normal,
        slip: assemble_bjs(c, g, idx, eps)?,
        divergence: assemble_channel_divergence(g, idx, eps)?,
    })
}

/// `|w|^2_{H^1}` Gram matrix of the channel velocity.
pub fn h1_gram(g: &GridPair, idx: &dyn ChannelIndex) -> SparseSym {
    SparseSym::sum(&[
        &channel_mass(g, idx, 1.0, 1.0),
        &tangential_form(g, idx, 1.0, 1.0),
        &normal_form(g, idx, 1.0, 1.0),
    ])
    .expect("same dimension")
}
