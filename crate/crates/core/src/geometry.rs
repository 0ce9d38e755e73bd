//! Reference geometry and the staggered grid pair.
//!
//! The porous block occupies `(0, W) x (-D, 0)`, the rescaled channel sits on top
//! as `(0, W) x (0, 1)` and the interface is the segment at height zero. Both
//! grids share the `nx` columns, so the porous top faces and the channel bottom
//! faces coincide and carry one unknown each.

use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainSpec {
    pub porous_width: f64,
    pub porous_depth: f64,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            porous_width: 1.0,
            porous_depth: 1.0,
        }
    }
}

impl DomainSpec {
    /// Height of the rescaled channel. Fixed by construction.
    pub const fn channel_reference_height(&self) -> f64 {
        1.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("porous_width", self.porous_width), ("porous_depth", self.porous_depth)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidDomain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Uniform tensor grid with `cols x rows` cells and lower-left corner `(x0, y0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformGrid {
    pub cols: usize,
    pub rows: usize,
    pub dx: f64,
    pub dy: f64,
    pub x0: f64,
    pub y0: f64,
}

impl UniformGrid {
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + (i as f64 + 0.5) * self.dx, self.y0 + (j as f64 + 0.5) * self.dy)
    }

    /// Midpoint of the vertical face left of cell column `i` (`i` in `0..=cols`).
    pub fn vertical_face(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.dx, self.y0 + (j as f64 + 0.5) * self.dy)
    }

    /// Midpoint of the horizontal face below cell row `j` (`j` in `0..=rows`).
    pub fn horizontal_face(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + (i as f64 + 0.5) * self.dx, self.y0 + j as f64 * self.dy)
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn n_cells(&self) -> usize {
        self.cols * self.rows
    }

    pub fn n_vertical_faces(&self) -> usize {
        (self.cols + 1) * self.rows
    }

    pub fn n_horizontal_faces(&self) -> usize {
        self.cols * (self.rows + 1)
    }

    pub fn cell_centers(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.n_cells());
        for j in 0..self.rows {
            for i in 0..self.cols {
                out.push(self.cell_center(i, j));
            }
        }
        out
    }
}

/// Identifies porous top face `i` with channel bottom face `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfacePair {
    pub porous_face: (usize, usize),
    pub channel_face: (usize, usize),
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPair {
    pub domain: DomainSpec,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Cells are indexed `(i, j)` with `j = 0` at the porous bottom.
    pub porous: UniformGrid,
    /// Reference channel; `k = 0` touches the interface.
    pub channel: UniformGrid,
    pub interface_map: Vec<InterfacePair>,
}

impl GridPair {
    pub fn dx(&self) -> f64 {
        self.porous.dx
    }
    pub fn dy(&self) -> f64 {
        self.porous.dy
    }
    pub fn dz(&self) -> f64 {
        self.channel.dy
    }

    /// Height weight of channel horizontal face row `k`: half cells at the ends.
    pub fn normal_row_weight(&self, k: usize) -> f64 {
        if k == 0 || k == self.nz {
            0.5 * self.dz()
        } else {
            self.dz()
        }
    }

    /// Width weight of vertical face column `i`: half cells at the outer walls.
    pub fn vertical_face_width(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }

    /// Height weight of porous horizontal face row `j`.
    pub fn porous_row_weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.ny {
            0.5 * self.dy()
        } else {
            self.dy()
        }
    }

    pub fn same_shape(&self, other: &GridPair) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.nz == other.nz && self.domain == other.domain
    }
}

/// Global numbering of the porous face velocities.
///
/// Vertical faces come first, then horizontal faces row by row; the last row
/// (`j = ny`) is the interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PorousDofs {
    pub nx: usize,
    pub ny: usize,
    pub offset: usize,
}

impl PorousDofs {
    pub fn u(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j < self.ny);
        self.offset + j * (self.nx + 1) + i
    }
    pub fn v(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j <= self.ny);
        self.offset + (self.nx + 1) * self.ny + j * self.nx + i
    }
    pub fn interface(&self, i: usize) -> usize {
        self.v(i, self.ny)
    }
    pub fn len(&self) -> usize {
        (self.nx + 1) * self.ny + self.nx * (self.ny + 1)
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn vertical_range(&self) -> Range<usize> {
        self.offset..self.offset + (self.nx + 1) * self.ny
    }
    pub fn horizontal_range(&self) -> Range<usize> {
        let start = self.offset + (self.nx + 1) * self.ny;
        start..start + self.nx * (self.ny + 1)
    }
    pub fn interface_range(&self) -> Range<usize> {
        let end = self.offset + self.len();
        end - self.nx..end
    }
    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Unknown numbering of the coupled problem.
///
/// Velocity order: porous vertical faces, porous horizontal faces (interface row
/// last), channel normal faces of rows `1..nz`, channel tangential faces of
/// columns `1..nx`. Wall tangential faces and the top normal row are absent.
/// Pressure order: porous cells, then channel cells.
#[derive(Clone, Debug, PartialEq)]
pub struct DofLayout {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub porous: PorousDofs,
    pub porous_vertical: Range<usize>,
    pub porous_horizontal: Range<usize>,
    pub interface: Range<usize>,
    pub channel_normal: Range<usize>,
    pub channel_tangential: Range<usize>,
    pub porous_pressure: Range<usize>,
    pub channel_pressure: Range<usize>,
}

impl DofLayout {
    fn new(nx: usize, ny: usize, nz: usize) -> Self {
        let porous = PorousDofs { nx, ny, offset: 0 };
        let cn_start = porous.len();
        let cn_end = cn_start + nx * (nz - 1);
        let ct_end = cn_end + (nx - 1) * nz;
        Self {
            nx,
            ny,
            nz,
            porous,
            porous_vertical: porous.vertical_range(),
            porous_horizontal: porous.horizontal_range(),
            interface: porous.interface_range(),
            channel_normal: cn_start..cn_end,
            channel_tangential: cn_end..ct_end,
            porous_pressure: 0..nx * ny,
            channel_pressure: nx * ny..nx * ny + nx * nz,
        }
    }

    pub fn n_velocity(&self) -> usize {
        self.channel_tangential.end
    }

    pub fn n_pressure(&self) -> usize {
        self.channel_pressure.end
    }

    /// Channel normal face `(i, k)`; `k = 0` is the shared interface unknown.
    pub fn channel_normal_dof(&self, i: usize, k: usize) -> Option<usize> {
        match k {
            0 => Some(self.porous.interface(i)),
            k if k >= self.nz => None,
            k => Some(self.channel_normal.start + (k - 1) * self.nx + i),
        }
    }

    /// Channel tangential face `(i, k)`; wall columns are eliminated.
    pub fn channel_tangential_dof(&self, i: usize, k: usize) -> Option<usize> {
        if i == 0 || i >= self.nx {
            None
        } else {
            Some(self.channel_tangential.start + k * (self.nx - 1) + (i - 1))
        }
    }

    pub fn porous_cell(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn channel_cell(&self, i: usize, k: usize) -> usize {
        self.channel_pressure.start + k * self.nx + i
    }
}

pub fn build_grids(spec: DomainSpec, nx: usize, ny: usize, nz: usize) -> Result<(GridPair, DofLayout)> {
    spec.validate()?;
    for (name, n) in [("nx", nx), ("ny", ny), ("nz", nz)] {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("{name} must be at least 2, got {n}")));
        }
    }
    let dx = spec.porous_width / nx as f64;
    let porous = UniformGrid {
        cols: nx,
        rows: ny,
        dx,
        dy: spec.porous_depth / ny as f64,
        x0: 0.0,
        y0: -spec.porous_depth,
    };
    let channel = UniformGrid {
        cols: nx,
        rows: nz,
        dx,
        dy: spec.channel_reference_height() / nz as f64,
        x0: 0.0,
        y0: 0.0,
    };
    let interface_map = (0..nx)
        .map(|i| InterfacePair {
            porous_face: (i, ny),
            channel_face: (i, 0),
            x: porous.horizontal_face(i, ny).0,
        })
        .collect();
    let grid = GridPair {
        domain: spec,
        nx,
        ny,
        nz,
        porous,
        channel,
        interface_map,
    };
    Ok((grid, DofLayout::new(nx, ny, nz)))
}

/// Polynomial in the reference channel coordinates, `sum c * x^a * z^b`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly2 {
    pub terms: Vec<(f64, u32, u32)>,
}

impl Poly2 {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, x: f64, z: f64) -> f64 {
        self.terms.iter().map(|&(c, a, b)| c * x.powi(a as i32) * z.powi(b as i32)).sum()
    }

    pub fn d_dx(&self) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .filter(|t| t.1 > 0)
                .map(|&(c, a, b)| (c * a as f64, a - 1, b))
                .collect(),
        )
    }

    pub fn d_dz(&self) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .filter(|t| t.2 > 0)
                .map(|&(c, a, b)| (c * b as f64, a, b - 1))
                .collect(),
        )
    }

    /// Same field written in the physical coordinate `x_N = eps * z`.
    pub fn to_physical(&self, eps: f64) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .map(|&(c, a, b)| (c * eps.powi(-(b as i32)), a, b))
                .collect(),
        )
    }
}

/// Channel vector field `(w_T, w_N)` in reference coordinates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChannelPolyField {
    pub tangential: Poly2,
    pub normal: Poly2,
}

/// Divergence of a thin-channel field computed in both frames at reference
/// point `(x, z)`: the physical divergence at `(x, eps z)` and the rescaled
/// form `div_T w_T + (1/eps) dz w_N`.
pub fn reference_transform_check(field: &ChannelPolyField, eps: f64, x: f64, z: f64) -> (f64, f64) {
    let xn = eps * z;
    let phys_t = field.tangential.to_physical(eps);
    let phys_n = field.normal.to_physical(eps);
    let physical = phys_t.d_dx().eval(x, xn) + phys_n.d_dz().eval(x, xn);
    let reference = field.tangential.d_dx().eval(x, z) + field.normal.d_dz().eval(x, z) / eps;
    (physical, reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn smallest_grid_counts() {
        let (g, l) = build_grids(DomainSpec::default(), 2, 2, 2).unwrap();
        assert_eq!(l.interface.len(), 2);
        assert_eq!(g.interface_map.len(), 2);
        assert_eq!(l.porous_pressure.len(), 4);
        assert_eq!(l.channel_pressure.len(), 4);
    }

    #[test]
    fn velocity_count_matches_face_enumeration() {
        let (nx, ny, nz) = (4, 4, 4);
        let (_, l) = build_grids(DomainSpec::default(), nx, ny, nz).unwrap();
        // Enumerate every face of both grids by (region, orientation, i, j).
        let mut faces = BTreeSet::new();
        for j in 0..ny {
            for i in 0..=nx {
                faces.insert(("p", 'v', i, j));
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                faces.insert(("p", 'h', i, j));
            }
        }
        for k in 0..nz {
            for i in 0..=nx {
                faces.insert(("c", 'v', i, k));
            }
        }
        for k in 0..=nz {
            for i in 0..nx {
                faces.insert(("c", 'h', i, k));
            }
        }
        let total = faces.len();
        let walls = faces.iter().filter(|f| f.0 == "c" && f.1 == 'v' && (f.2 == 0 || f.2 == nx)).count();
        let top = faces.iter().filter(|f| f.0 == "c" && f.1 == 'h' && f.3 == nz).count();
        let shared = faces.iter().filter(|f| f.0 == "c" && f.1 == 'h' && f.3 == 0).count();
        assert_eq!(l.n_velocity(), total - walls - top - shared);
    }

    #[test]
    fn every_unknown_has_one_index() {
        let (_, l) = build_grids(DomainSpec::default(), 3, 2, 4).unwrap();
        let mut seen = vec![0usize; l.n_velocity()];
        for j in 0..l.ny {
            for i in 0..=l.nx {
                seen[l.porous.u(i, j)] += 1;
            }
        }
        for j in 0..=l.ny {
            for i in 0..l.nx {
                seen[l.porous.v(i, j)] += 1;
            }
        }
        for k in 1..l.nz {
            for i in 0..l.nx {
                seen[l.channel_normal_dof(i, k).unwrap()] += 1;
            }
        }
        for k in 0..l.nz {
            for i in 0..=l.nx {
                if let Some(d) = l.channel_tangential_dof(i, k) {
                    seen[d] += 1;
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        for i in 0..l.nx {
            assert_eq!(l.channel_normal_dof(i, 0), Some(l.porous.interface(i)));
            assert_eq!(l.channel_normal_dof(i, l.nz), None);
        }
    }

    #[test]
    fn interface_map_aligns_faces() {
        let (g, _) = build_grids(DomainSpec { porous_width: 2.0, porous_depth: 0.5 }, 5, 3, 2).unwrap();
        for pair in &g.interface_map {
            let (xp, yp) = g.porous.horizontal_face(pair.porous_face.0, pair.porous_face.1);
            let (xc, zc) = g.channel.horizontal_face(pair.channel_face.0, pair.channel_face.1);
            assert_eq!(xp, xc);
            assert_eq!(xp, pair.x);
            assert_eq!(yp, 0.0);
            assert_eq!(zc, 0.0);
        }
    }

    #[test]
    fn face_counts_closed_form() {
        let (g, _) = build_grids(DomainSpec::default(), 6, 5, 3).unwrap();
        assert_eq!(g.porous.n_vertical_faces(), 7 * 5);
        assert_eq!(g.porous.n_horizontal_faces(), 6 * 6);
        assert_eq!(g.channel.n_vertical_faces(), 7 * 3);
        assert_eq!(g.channel.n_horizontal_faces(), 6 * 4);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_grids(DomainSpec::default(), 1, 2, 2).is_err());
        assert!(build_grids(DomainSpec::default(), 2, 2, 0).is_err());
        let bad = DomainSpec { porous_width: 0.0, porous_depth: 1.0 };
        assert!(build_grids(bad, 2, 2, 2).is_err());
    }

    #[test]
    fn transform_vertical_stretch() {
        // Physical field (0, x_N) is (0, eps z) in reference coordinates.
        let f = ChannelPolyField {
            tangential: Poly2::default(),
            normal: Poly2::new(vec![(0.5, 0, 1)]),
        };
        let (p, r) = reference_transform_check(&f, 0.5, 0.3, 0.7);
        assert!((p - 1.0).abs() < 1e-15 && (r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transform_tangential_only() {
        let f = ChannelPolyField {
            tangential: Poly2::new(vec![(1.0, 1, 0)]),
            normal: Poly2::default(),
        };
        for eps in [1.0, 0.1, 1e-3] {
            assert_eq!(reference_transform_check(&f, eps, 0.2, 0.9), (1.0, 1.0));
        }
    }

    #[test]
    fn transform_mixed_polynomial() {
        let eps = 0.25;
        let f = ChannelPolyField {
            tangential: Poly2::new(vec![(1.0, 1, 1)]),
            normal: Poly2::new(vec![(eps, 0, 2)]),
        };
        // Hand differentiation: d/dx(x z) + (1/eps) d/dz(eps z^2) = 3z.
        let (p, r) = reference_transform_check(&f, eps, 0.5, 0.5);
        assert!((p - 1.5).abs() < 1e-14);
        assert!((r - 1.5).abs() < 1e-14);
    }
}
