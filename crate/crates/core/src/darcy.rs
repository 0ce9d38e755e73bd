//! Porous-block operators: weighted face mass, cell divergence, interface Robin
//! term. Outer faces keep their unknowns; with no boundary term assembled the
//! natural condition is zero pressure there.

use crate::coefficients::{CoefficientSet, Tensor2};
use crate::error::{Error, Result};
use crate::geometry::{GridPair, PorousDofs};
use crate::sparse::{CsrMatrix, SparseSym, SymBuilder};

#[derive(Clone, Debug)]
pub struct DarcyBlocks {
    pub mass: SparseSym,
    pub divergence: CsrMatrix,
    pub robin: SparseSym,
}

/// `int Q v . w` for the face-based (lowest-order Raviart-Thomas) field, using
/// the vertex rule on every cell. For diagonal `Q` this is the lumped face mass;
/// off-diagonal entries pair each face with the four perpendicular faces of
/// its two cells with weight `area / 4`.
pub fn tensor_mass(q: &Tensor2, g: &GridPair, dofs: &PorousDofs, n: usize) -> SparseSym {
    let area = g.porous.cell_area();
    let qxy = 0.5 * (q.xy + q.yx);
    let mut b = SymBuilder::new(n);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let us = [dofs.u(i, j), dofs.u(i + 1, j)];
            let vs = [dofs.v(i, j), dofs.v(i, j + 1)];
            for &u in &us {
                b.add_diag(u, 0.5 * q.xx * area);
            }
            for &v in &vs {
                b.add_diag(v, 0.5 * q.yy * area);
            }
            if qxy != 0.0 {
                for &u in &us {
                    for &v in &vs {
                        b.add_pair(u, v, 0.25 * qxy * area);
                    }
                }
            }
        }
    }
    b.build()
}

pub fn assemble_darcy_mass(c: &CoefficientSet, g: &GridPair, dofs: &PorousDofs, n: usize) -> Result<SparseSym> {
    c.validate()?;
    Ok(tensor_mass(&c.q, g, dofs, n))
}

/// Signed face flux of cell `(i, j)`: `(dofs, coefficient)` for the four faces.
pub fn cell_fluxes(g: &GridPair, dofs: &PorousDofs, i: usize, j: usize) -> [(usize, f64); 4] {
    let (dx, dy) = (g.dx(), g.dy());
    [
        (dofs.u(i, j), -dy),
        (dofs.u(i + 1, j), dy),
        (dofs.v(i, j), -dx),
        (dofs.v(i, j + 1), dx),
    ]
}

/// Rows: porous cells (`j * nx + i`); entries: outward face flux per unit velocity.
pub fn assemble_divergence(g: &GridPair, dofs: &PorousDofs, n: usize) -> CsrMatrix {
    let mut t = Vec::with_capacity(4 * g.nx * g.ny);
    for j in 0..g.ny {
        for i in 0..g.nx {
            for (col, v) in cell_fluxes(g, dofs, i, j) {
                t.push((dofs.cell(i, j), col, v));
            }
        }
    }
    CsrMatrix::from_triplets(g.nx * g.ny, n, t)
}

/// `weight * int_Gamma (v.n)(w.n)`, midpoint rule per interface face.
pub fn assemble_interface_robin(weight: f64, g: &GridPair, dofs: &PorousDofs, n: usize) -> Result<SparseSym> {
    if !(weight >= 0.0 && weight.is_finite()) {
        return Err(Error::NegativeWeight(weight));
    }
    let mut b = SymBuilder::new(n);
    if weight > 0.0 {
        for i in 0..g.nx {
            b.add_diag(dofs.interface(i), weight * g.dx());
        }
    }
    Ok(b.build())
}

pub fn assemble_darcy(c: &CoefficientSet, g: &GridPair, dofs: &PorousDofs, n: usize, robin_weight: f64) -> Result<DarcyBlocks> {
    Ok(DarcyBlocks {
        mass: assemble_darcy_mass(c, g, dofs, n)?,
        divergence: assemble_divergence(g, dofs, n),
        robin: assemble_interface_robin(robin_weight, g, dofs, n)?,
    })
}

/// `|v|^2_{H(div)}` Gram matrix: unit-tensor mass plus `sum (div v)^2 / area`.
pub fn hdiv_gram(g: &GridPair, dofs: &PorousDofs, n: usize) -> SparseSym {
    let mass = tensor_mass(&Tensor2::IDENTITY, g, dofs, n);
    let mut b = SymBuilder::new(n);
    let w = 1.0 / g.porous.cell_area();
    for j in 0..g.ny {
        for i in 0..g.nx {
            b.add_outer(&cell_fluxes(g, dofs, i, j), w);
        }
    }
    SparseSym::sum(&[&mass, &b.build()]).expect("same dimension")
}

/// Weak boundary term `-int p_D (w.n)` for prescribed outer pressure.
pub fn boundary_pressure_load(
    g: &GridPair,
    dofs: &PorousDofs,
    n: usize,
    p_d: &dyn Fn(f64, f64) -> f64,
) -> Vec<f64> {
    let (dx, dy) = (g.dx(), g.dy());
    let mut f = vec![0.0; n];
    for j in 0..g.ny {
        let (x, y) = g.porous.vertical_face(0, j);
        f[dofs.u(0, j)] += p_d(x, y) * dy;
        let (x, y) = g.porous.vertical_face(g.nx, j);
        f[dofs.u(g.nx, j)] -= p_d(x, y) * dy;
    }
    for i in 0..g.nx {
        let (x, y) = g.porous.horizontal_face(i, 0);
        f[dofs.v(i, 0)] += p_d(x, y) * dx;
        let (x, y) = g.porous.horizontal_face(i, g.ny);
        f[dofs.v(i, g.ny)] -= p_d(x, y) * dx;
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grids, DomainSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(nx: usize, ny: usize) -> (GridPair, PorousDofs) {
        let (g, l) = build_grids(DomainSpec::default(), nx, ny, 2).unwrap();
        (g, l.porous)
    }

    fn face_volumes(g: &GridPair, d: &PorousDofs) -> Vec<f64> {
        let mut vol = vec![0.0; d.len()];
        for j in 0..g.ny {
            for i in 0..=g.nx {
                vol[d.u(i, j)] = g.vertical_face_width(i) * g.dy();
            }
        }
        for j in 0..=g.ny {
            for i in 0..g.nx {
                vol[d.v(i, j)] = g.porous_row_weight(j) * g.dx();
            }
        }
        vol
    }

    #[test]
    fn identity_mass_is_face_volumes() {
        let (g, d) = setup(2, 2);
        let m = tensor_mass(&Tensor2::IDENTITY, &g, &d, d.len());
        let vol = face_volumes(&g, &d);
        assert_eq!(m.entries().len(), d.len());
        for i in 0..d.len() {
            assert!((m.get(i, i) - vol[i]).abs() < 1e-15);
        }
        let ones = vec![1.0; d.len()];
        assert!((m.quad_form(&ones) - vol.iter().sum::<f64>()).abs() < 1e-14);
    }

    #[test]
    fn anisotropic_scaling() {
        let (g, d) = setup(3, 2);
        let m1 = tensor_mass(&Tensor2::IDENTITY, &g, &d, d.len());
        let m4 = tensor_mass(&Tensor2::diag(4.0, 1.0), &g, &d, d.len());
        for k in d.vertical_range() {
            assert_eq!(m4.get(k, k), 4.0 * m1.get(k, k));
        }
        for k in d.horizontal_range() {
            assert_eq!(m4.get(k, k), m1.get(k, k));
        }
    }

    /// Vertex-rule quadrature of `int Q v.v` on the reconstructed field, cell by cell.
    fn vertex_quadrature(q: &Tensor2, g: &GridPair, d: &PorousDofs, w: &[f64]) -> f64 {
        let mut total = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (ul, ur) = (w[d.u(i, j)], w[d.u(i + 1, j)]);
                let (vb, vt) = (w[d.v(i, j)], w[d.v(i, j + 1)]);
                // The reconstructed field at a corner takes the adjacent face values.
                for (u, v) in [(ul, vb), (ur, vb), (ul, vt), (ur, vt)] {
                    let qv = q.apply([u, v]);
                    total += 0.25 * g.porous.cell_area() * (u * qv[0] + v * qv[1]);
                }
            }
        }
        total
    }

    #[test]
    fn full_tensor_matches_quadrature() {
        let (g, d) = setup(4, 3);
        let q = Tensor2::sym(2.0, 1.0, 2.0);
        let m = tensor_mass(&q, &g, &d, d.len());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let w: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let oracle = vertex_quadrature(&q, &g, &d, &w);
            assert!((m.quad_form(&w) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn full_tensor_mass_is_positive() {
        let (g, d) = setup(3, 3);
        let q = Tensor2::sym(2.0, 1.9, 2.0);
        let m = tensor_mass(&q, &g, &d, d.len());
        let dense = nalgebra::DMatrix::from_fn(d.len(), d.len(), |i, j| m.get(i, j));
        assert!(dense.symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn divergence_of_simple_fields() {
        let (g, d) = setup(3, 3);
        let div = assemble_divergence(&g, &d, d.len());
        let mut right = vec![0.0; d.len()];
        for k in d.vertical_range() {
            right[k] = 1.0;
        }
        let r = div.matvec(&right);
        assert!(r.iter().all(|&v| v.abs() < 1e-15));
        let mut pos = vec![0.0; d.len()];
        for j in 0..g.ny {
            for i in 0..=g.nx {
                pos[d.u(i, j)] = g.porous.vertical_face(i, j).0;
            }
        }
        for j in 0..=g.ny {
            for i in 0..g.nx {
                pos[d.v(i, j)] = g.porous.horizontal_face(i, j).1;
            }
        }
        let r = div.matvec(&pos);
        for v in r {
            assert!((v / g.porous.cell_area() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_random_brute_force() {
        let (g, d) = setup(3, 3);
        let div = assemble_divergence(&g, &d, d.len());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = div.matvec(&w);
        for j in 0..3 {
            for i in 0..3 {
                let flux = (w[d.u(i + 1, j)] - w[d.u(i, j)]) * g.dy() + (w[d.v(i, j + 1)] - w[d.v(i, j)]) * g.dx();
                assert!((r[j * 3 + i] - flux).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn discrete_divergence_theorem() {
        let (g, d) = setup(4, 3);
        let div = assemble_divergence(&g, &d, d.len());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let total: f64 = div.matvec(&w).iter().sum();
        let mut boundary = 0.0;
        for j in 0..g.ny {
            boundary += (w[d.u(g.nx, j)] - w[d.u(0, j)]) * g.dy();
        }
        for i in 0..g.nx {
            boundary += (w[d.v(i, g.ny)] - w[d.v(i, 0)]) * g.dx();
        }
        assert!((total - boundary).abs() < 1e-13);
    }

    #[test]
    fn robin_entries() {
        let (g, d) = setup(4, 2);
        assert!(assemble_interface_robin(0.0, &g, &d, d.len()).unwrap().entries().is_empty());
        let r = assemble_interface_robin(2.0, &g, &d, d.len()).unwrap();
        assert_eq!(r.entries().len(), 4);
        for k in d.interface_range() {
            assert_eq!(r.get(k, k), 0.5);
        }
        assert!(matches!(
            assemble_interface_robin(-1.0, &g, &d, d.len()),
            Err(Error::NegativeWeight(_))
        ));
    }

    #[test]
    fn robin_quadrature_converges() {
        let mut errs = Vec::new();
        for nx in [8, 16, 32] {
            let (g, d) = setup(nx, 2);
            let r = assemble_interface_robin(3.0, &g, &d, d.len()).unwrap();
            let mut w = vec![0.0; d.len()];
            for i in 0..nx {
                w[d.interface(i)] = g.interface_map[i].x;
            }
            errs.push((r.quad_form(&w) - 1.0).abs());
        }
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5);
    }
}
