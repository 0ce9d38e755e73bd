//! Discrete norms on the staggered fields.
//!
//! Array conventions (all faces present, eliminated ones hold zero):
//! porous vertical faces `j * (nx + 1) + i`, porous horizontal faces
//! `j * nx + i` with `j` in `0..=ny`, channel vertical faces `k * (nx + 1) + i`,
//! channel horizontal faces `k * nx + i` with `k` in `0..=nz`, interface nodes
//! `0..=nx`, cells row-major.

use crate::coefficients::Tensor2;
use crate::geometry::GridPair;

#[derive(Clone, Debug, PartialEq)]
pub struct NormSuite {
    pub grid: GridPair,
}

impl NormSuite {
    pub fn new(grid: &GridPair) -> Self {
        Self { grid: grid.clone() }
    }

    /// Vertex rule for `int w' T w` on the porous block.
    pub fn porous_form(&self, t: &Tensor2, u: &[f64], v: &[f64]) -> f64 {
        let g = &self.grid;
        let nx = g.nx;
        let area = g.porous.cell_area();
        let mut s = 0.0;
        for j in 0..g.ny {
            for i in 0..nx {
                let (ul, ur) = (u[j * (nx + 1) + i], u[j * (nx + 1) + i + 1]);
                let (vb, vt) = (v[j * nx + i], v[(j + 1) * nx + i]);
                for (a, b) in [(ul, vb), (ur, vb), (ul, vt), (ur, vt)] {
                    let tw = t.apply([a, b]);
                    s += 0.25 * area * (a * tw[0] + b * tw[1]);
                }
            }
        }
        s
    }

    pub fn porous_l2(&self, u: &[f64], v: &[f64]) -> f64 {
        self.porous_form(&Tensor2::IDENTITY, u, v).max(0.0).sqrt()
    }

    /// `|T w|` in L2.
    pub fn porous_weighted_l2(&self, t: &Tensor2, u: &[f64], v: &[f64]) -> f64 {
        let tt = Tensor2::new(
            t.xx * t.xx + t.yx * t.yx,
            t.xx * t.xy + t.yx * t.yy,
            t.xy * t.xx + t.yy * t.yx,
            t.xy * t.xy + t.yy * t.yy,
        );
        self.porous_form(&tt, u, v).max(0.0).sqrt()
    }

    /// Cell divergence (flux per unit area).
    pub fn porous_divergence(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let nx = g.nx;
        let mut out = Vec::with_capacity(nx * g.ny);
        for j in 0..g.ny {
            for i in 0..nx {
                let flux = (u[j * (nx + 1) + i + 1] - u[j * (nx + 1) + i]) * g.dy() + (v[(j + 1) * nx + i] - v[j * nx + i]) * g.dx();
                out.push(flux / g.porous.cell_area());
            }
        }
        out
    }

    pub fn hdiv(&self, u: &[f64], v: &[f64]) -> f64 {
        let l2 = self.porous_form(&Tensor2::IDENTITY, u, v);
        let div = self.porous_cells_l2(&self.porous_divergence(u, v));
        (l2 + div * div).max(0.0).sqrt()
    }

    pub fn porous_cells_l2(&self, p: &[f64]) -> f64 {
        (p.iter().map(|x| x * x).sum::<f64>() * self.grid.porous.cell_area()).sqrt()
    }

    pub fn channel_cells_l2(&self, p: &[f64]) -> f64 {
        (p.iter().map(|x| x * x).sum::<f64>() * self.grid.channel.cell_area()).sqrt()
    }

    pub fn tangential_l2(&self, vt: &[f64]) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for k in 0..g.nz {
            for i in 0..=g.nx {
                let w = vt[k * (g.nx + 1) + i];
                s += g.vertical_face_width(i) * g.dz() * w * w;
            }
        }
        s.sqrt()
    }

    /// `|grad_T w_T|` in L2, walls read from the array.
    pub fn tangential_grad(&self, vt: &[f64]) -> f64 {
        let g = &self.grid;
        let nx = g.nx;
        let mut s = 0.0;
        for k in 0..g.nz {
            for i in 0..nx {
                let d = vt[k * (nx + 1) + i + 1] - vt[k * (nx + 1) + i];
                s += g.dz() / g.dx() * d * d;
            }
        }
        s.sqrt()
    }

    pub fn tangential_dz(&self, vt: &[f64]) -> f64 {
        let g = &self.grid;
        let nx = g.nx;
        let mut s = 0.0;
        for k in 0..g.nz - 1 {
            for i in 0..=nx {
                let d = vt[(k + 1) * (nx + 1) + i] - vt[k * (nx + 1) + i];
                s += g.vertical_face_width(i) / g.dz() * d * d;
            }
        }
        s.sqrt()
    }

    pub fn normal_l2(&self, vn: &[f64]) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for k in 0..=g.nz {
            for i in 0..g.nx {
                let w = vn[k * g.nx + i];
                s += g.dx() * g.normal_row_weight(k) * w * w;
            }
        }
        s.sqrt()
    }

    /// `|grad_T w_N|` in L2 with zero wall values half a cell outside.
    pub fn normal_grad(&self, vn: &[f64]) -> f64 {
        let g = &self.grid;
        let nx = g.nx;
        let mut s = 0.0;
        for k in 0..=g.nz {
            let h = g.normal_row_weight(k);
            let row = &vn[k * nx..(k + 1) * nx];
            s += h / (0.5 * g.dx()) * (row[0] * row[0] + row[nx - 1] * row[nx - 1]);
            for i in 0..nx - 1 {
                let d = row[i + 1] - row[i];
                s += h / g.dx() * d * d;
            }
        }
        s.sqrt()
    }

    pub fn normal_dz(&self, vn: &[f64]) -> f64 {
        let g = &self.grid;
        let nx = g.nx;
        let mut s = 0.0;
        for k in 0..g.nz {
            for i in 0..nx {
                let d = vn[(k + 1) * nx + i] - vn[k * nx + i];
                s += g.dx() / g.dz() * d * d;
            }
        }
        s.sqrt()
    }

    /// `H(dz)` norm: `sqrt(|u|^2 + |dz u|^2)`.
    pub fn hdz(&self, vn: &[f64]) -> f64 {
        self.normal_l2(vn).hypot(self.normal_dz(vn))
    }

    /// Interface trace of the normal component (bottom row).
    pub fn normal_trace(&self, vn: &[f64]) -> f64 {
        let g = &self.grid;
        (vn[..g.nx].iter().map(|w| w * w).sum::<f64>() * g.dx()).sqrt()
    }

    /// Interface trace of the tangential component, read from the bottom row.
    pub fn tangential_trace(&self, vt: &[f64]) -> f64 {
        let g = &self.grid;
        let s: f64 = (0..=g.nx).map(|i| g.vertical_face_width(i) * vt[i] * vt[i]).sum();
        s.sqrt()
    }

    /// Node values on the interface (endpoints included), lumped mass.
    pub fn gamma_nodes_l2(&self, w: &[f64]) -> f64 {
        let g = &self.grid;
        let s: f64 = (0..=g.nx).map(|i| g.vertical_face_width(i) * w[i] * w[i]).sum();
        s.sqrt()
    }

    pub fn gamma_nodes_grad(&self, w: &[f64]) -> f64 {
        let g = &self.grid;
        let s: f64 = (0..g.nx).map(|i| (w[i + 1] - w[i]).powi(2) / g.dx()).sum();
        s.sqrt()
    }

    pub fn gamma_cells_l2(&self, p: &[f64]) -> f64 {
        (p.iter().map(|x| x * x).sum::<f64>() * self.grid.dx()).sqrt()
    }
}

pub fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
