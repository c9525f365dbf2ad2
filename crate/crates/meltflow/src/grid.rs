//! Uniform Cartesian grid (1D/2D) with cell-centered fields, one ghost layer,
//! second-order differential operators, multilinear interpolation and
//! boundary-condition application.
//!
//! A 1D problem is stored as a 2D lattice with a single interior row whose
//! y-ghosts mirror the interior, so every y-derivative vanishes and all
//! operators share one code path.

use crate::error::Error;
use crate::Result;

/// Sides of the rectangular domain, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    XMin = 0,
    XMax = 1,
    YMin = 2,
    YMax = 3,
}

pub const SIDES: [Side; 4] = [Side::XMin, Side::XMax, Side::YMin, Side::YMax];

/// Boundary tag of one domain side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryTag {
    /// No-slip wall; optional tangential wall velocity (lid).
    Wall,
    /// Mirror symmetry: normal velocity antisymmetric, everything else even.
    Symmetry,
    /// Zero-gradient outflow with fixed (gauge zero) pressure.
    Outlet,
    /// Generic fixed-value side; imposes the configured scalar values.
    FixedValue,
}

/// Per-side boundary specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec {
    pub tag: BoundaryTag,
    /// Dirichlet temperature for this side, if any.
    pub temperature: Option<f64>,
    /// Clamp the level set to phi = 1 on inflow portions of this side.
    pub phi_inflow_clamp: bool,
    /// Prescribed wall velocity (tangential lid velocity or fixed-value inflow).
    pub velocity: Option<[f64; 2]>,
}

impl BoundarySpec {
    pub fn wall() -> Self {
        BoundarySpec {
            tag: BoundaryTag::Wall,
            temperature: None,
            phi_inflow_clamp: false,
            velocity: None,
        }
    }
    pub fn symmetry() -> Self {
        BoundarySpec {
            tag: BoundaryTag::Symmetry,
            ..BoundarySpec::wall()
        }
    }
    pub fn outlet() -> Self {
        BoundarySpec {
            tag: BoundaryTag::Outlet,
            ..BoundarySpec::wall()
        }
    }
    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = Some(t);
        self
    }
    pub fn with_phi_clamp(mut self) -> Self {
        self.phi_inflow_clamp = true;
        self
    }
    pub fn with_velocity(mut self, v: [f64; 2]) -> Self {
        self.velocity = Some(v);
        self
    }
}

/// Uniform Cartesian grid descriptor. `ny == 1` for 1D problems.
#[derive(Debug, Clone)]
pub struct Grid {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub xmin: f64,
    pub ymin: f64,
    pub bcs: [BoundarySpec; 4],
}

impl Grid {
    /// Build a grid from extents and cell counts; spacing must come out uniform.
    pub fn new(
        extent_min: &[f64],
        extent_max: &[f64],
        cells: &[usize],
        bcs: [BoundarySpec; 4],
    ) -> Result<Grid> {
        let dim = cells.len();
        if dim == 0 || dim > 2 || extent_min.len() != dim || extent_max.len() != dim {
            return Err(Error::config(
                "grid.cells",
                "grid must be 1D or 2D with matching extents",
            ));
        }
        let mut violations = Vec::new();
        for a in 0..dim {
            if extent_max[a] <= extent_min[a] {
                violations.push(crate::error::ConfigViolation {
                    key: format!("grid.extent[{a}]"),
                    message: "extent_max must exceed extent_min".into(),
                });
            }
            if cells[a] < 4 {
                violations.push(crate::error::ConfigViolation {
                    key: format!("grid.cells[{a}]"),
                    message: format!("need at least 4 cells per axis, got {}", cells[a]),
                });
            }
        }
        if !violations.is_empty() {
            return Err(Error::Config(violations));
        }
        let h = (extent_max[0] - extent_min[0]) / cells[0] as f64;
        if dim == 2 {
            let hy = (extent_max[1] - extent_min[1]) / cells[1] as f64;
            if ((hy - h) / h).abs() > 1e-10 {
                return Err(Error::config(
                    "grid.extent",
                    format!("implied spacing is non-uniform: hx={h:.6e}, hy={hy:.6e}"),
                ));
            }
        }
        Ok(Grid {
            dim,
            nx: cells[0],
            ny: if dim == 2 { cells[1] } else { 1 },
            h,
            xmin: extent_min[0],
            ymin: if dim == 2 { extent_min[1] } else { 0.0 },
            bcs,
        })
    }

    /// Coordinates of the cell center at interior index (i, j), i in 1..=nx.
    #[inline]
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.xmin + (i as f64 - 0.5) * self.h,
            self.ymin + (j as f64 - 0.5) * self.h,
        )
    }

    #[inline]
    pub fn xmax(&self) -> f64 {
        self.xmin + self.nx as f64 * self.h
    }

    #[inline]
    pub fn ymax(&self) -> f64 {
        self.ymin + self.ny as f64 * self.h
    }

    /// Cell volume (area in 2D, length in 1D).
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn n_interior(&self) -> usize {
        self.nx * self.ny
    }
}

/// Cell-centered scalar field with one ghost layer per side.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![0.0; (grid.nx + 2) * (grid.ny + 2)],
        }
    }

    pub fn constant(grid: &Grid, v: f64) -> Self {
        ScalarField {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![v; (grid.nx + 2) * (grid.ny + 2)],
        }
    }

    /// Fill interior cells from a function of the cell-center coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = ScalarField::zeros(grid);
        for j in 1..=grid.ny {
            for i in 1..=grid.nx {
                let (x, y) = grid.center(i, j);
                out[(i, j)] = f(x, y);
            }
        }
        out
    }

    #[inline(always)]
    fn id(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 2) + i
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Max |value| over interior cells.
    pub fn max_abs_interior(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 1..=self.ny {
            for i in 1..=self.nx {
                m = m.max(self[(i, j)].abs());
            }
        }
        m
    }

    /// Sum over interior cells.
    pub fn sum_interior(&self) -> f64 {
        let mut s = 0.0;
        for j in 1..=self.ny {
            for i in 1..=self.nx {
                s += self[(i, j)];
            }
        }
        s
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for ScalarField {
    type Output = f64;
    #[inline(always)]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * (self.nx + 2) + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ScalarField {
    #[inline(always)]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        let id = self.id(i, j);
        &mut self.data[id]
    }
}

/// Cell-centered vector field stored as per-component scalars.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    pub fn max_norm_interior(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 1..=self.x.ny {
            for i in 1..=self.x.nx {
                m = m.max((self.x[(i, j)].powi(2) + self.y[(i, j)].powi(2)).sqrt());
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Boundary-condition application (ghost-layer updates)
// ---------------------------------------------------------------------------

/// Kind of scalar for ghost-cell rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Temperature,
    Pressure,
    LevelSet,
    /// Auxiliary fields: plain zero-gradient extrapolation on all sides.
    Generic,
}

fn for_side(grid: &Grid, side: Side, mut f: impl FnMut(/*ghost*/ (usize, usize), /*interior*/ (usize, usize))) {
    let (nx, ny) = (grid.nx, grid.ny);
    match side {
        Side::XMin => (1..=ny).for_each(|j| f((0, j), (1, j))),
        Side::XMax => (1..=ny).for_each(|j| f((nx + 1, j), (nx, j))),
        Side::YMin => (0..=nx + 1).for_each(|i| f((i, 0), (i, 1))),
        Side::YMax => (0..=nx + 1).for_each(|i| f((i, ny + 1), (i, ny))),
    }
}

fn side_spec(grid: &Grid, side: Side) -> BoundarySpec {
    if grid.dim == 1 && matches!(side, Side::YMin | Side::YMax) {
        // 1D lattices always mirror in y.
        BoundarySpec::symmetry()
    } else {
        grid.bcs[side as usize]
    }
}

/// Outward unit normal of a side.
pub fn side_normal(side: Side) -> [f64; 2] {
    match side {
        Side::XMin => [-1.0, 0.0],
        Side::XMax => [1.0, 0.0],
        Side::YMin => [0.0, -1.0],
        Side::YMax => [0.0, 1.0],
    }
}

/// Update the ghost layer of a scalar field according to the side tags.
///
/// For the level set, `velocity` enables the inflow clamp (`phi = 1` where
/// `u . n <= 0`) on sides that request it.
pub fn apply_scalar_bc(
    f: &mut ScalarField,
    grid: &Grid,
    kind: ScalarKind,
    velocity: Option<(&ScalarField, &ScalarField)>,
) {
    for side in SIDES {
        let spec = side_spec(grid, side);
        let n = side_normal(side);
        for_side(grid, side, |g, c| {
            let interior = f[c];
            f[g] = match (kind, spec.tag) {
                (ScalarKind::Temperature, _) if spec.temperature.is_some() => {
                    2.0 * spec.temperature.unwrap() - interior
                }
                (ScalarKind::Pressure, BoundaryTag::Outlet) => -interior,
                (ScalarKind::LevelSet, _) if spec.phi_inflow_clamp => {
                    let inflow = match velocity {
                        Some((u, v)) => u[c] * n[0] + v[c] * n[1] <= 0.0,
                        None => true,
                    };
                    if inflow {
                        2.0 - interior // enforce phi = 1 at the face
                    } else {
                        interior
                    }
                }
                // Symmetry, walls and outlets are zero-gradient for scalars.
                _ => interior,
            };
        });
    }
}

/// Update velocity ghost layers (both components) for the side tags.
pub fn apply_velocity_bc(u: &mut ScalarField, v: &mut ScalarField, grid: &Grid) {
    for side in SIDES {
        let spec = side_spec(grid, side);
        let n = side_normal(side);
        let horizontal = n[0] != 0.0;
        for_side(grid, side, |g, c| {
            let (ui, vi) = (u[c], v[c]);
            match spec.tag {
                BoundaryTag::Wall | BoundaryTag::FixedValue => {
                    let w = spec.velocity.unwrap_or([0.0, 0.0]);
                    u[g] = 2.0 * w[0] - ui;
                    v[g] = 2.0 * w[1] - vi;
                }
                BoundaryTag::Symmetry => {
                    if horizontal {
                        u[g] = -ui; // normal component antisymmetric
                        v[g] = vi;
                    } else {
                        u[g] = ui;
                        v[g] = -vi;
                    }
                }
                BoundaryTag::Outlet => {
                    u[g] = ui;
                    v[g] = vi;
                }
            }
        });
    }
}

// ---------------------------------------------------------------------------
// Differential operators (second-order central, interior cells)
// ---------------------------------------------------------------------------

/// Central-difference gradient. Ghost layers of `f` must be current; the
/// output ghosts are filled by zero-gradient extrapolation.
pub fn gradient(f: &ScalarField, grid: &Grid) -> VectorField {
    let mut out = VectorField::zeros(grid);
    let inv2h = 1.0 / (2.0 * grid.h);
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            out.x[(i, j)] = (f[(i + 1, j)] - f[(i - 1, j)]) * inv2h;
            out.y[(i, j)] = (f[(i, j + 1)] - f[(i, j - 1)]) * inv2h;
        }
    }
    apply_scalar_bc(&mut out.x, grid, ScalarKind::Generic, None);
    apply_scalar_bc(&mut out.y, grid, ScalarKind::Generic, None);
    out
}

/// Central-difference divergence of a cell-centered vector field.
pub fn divergence(vx: &ScalarField, vy: &ScalarField, grid: &Grid) -> ScalarField {
    let mut out = ScalarField::zeros(grid);
    let inv2h = 1.0 / (2.0 * grid.h);
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            out[(i, j)] = (vx[(i + 1, j)] - vx[(i - 1, j)]) * inv2h
                + (vy[(i, j + 1)] - vy[(i, j - 1)]) * inv2h;
        }
    }
    out
}

/// Compact variable-coefficient Laplacian `div(coeff grad f)` with
/// arithmetic-mean face coefficients.
pub fn laplacian_variable(f: &ScalarField, coeff: &ScalarField, grid: &Grid) -> ScalarField {
    let mut out = ScalarField::zeros(grid);
    let invh2 = 1.0 / (grid.h * grid.h);
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            let ke = 0.5 * (coeff[(i + 1, j)] + coeff[(i, j)]);
            let kw = 0.5 * (coeff[(i - 1, j)] + coeff[(i, j)]);
            let kn = 0.5 * (coeff[(i, j + 1)] + coeff[(i, j)]);
            let ks = 0.5 * (coeff[(i, j - 1)] + coeff[(i, j)]);
            out[(i, j)] = (ke * (f[(i + 1, j)] - f[(i, j)]) - kw * (f[(i, j)] - f[(i - 1, j)])
                + kn * (f[(i, j + 1)] - f[(i, j)])
                - ks * (f[(i, j)] - f[(i, j - 1)]))
                * invh2;
        }
    }
    out
}

/// Multilinear interpolation from cell centers (ghost-extended near
/// boundaries). Errors if the point lies outside the domain extent.
pub fn interpolate(f: &ScalarField, grid: &Grid, x: f64, y: f64) -> Result<f64> {
    let tol = 1e-12 * grid.h;
    if x < grid.xmin - tol || x > grid.xmax() + tol {
        return Err(Error::OutsideDomain(x, y));
    }
    if grid.dim == 2 && (y < grid.ymin - tol || y > grid.ymax() + tol) {
        return Err(Error::OutsideDomain(x, y));
    }
    Ok(interpolate_unchecked(f, grid, x, y))
}

/// Interpolation without the extent check; clamps to the ghost-extended range.
#[inline]
pub fn interpolate_unchecked(f: &ScalarField, grid: &Grid, x: f64, y: f64) -> f64 {
    // Continuous index such that cell center i sits at index i.
    let fx = (x - grid.xmin) / grid.h + 0.5;
    let fy = if grid.dim == 2 {
        (y - grid.ymin) / grid.h + 0.5
    } else {
        1.0
    };
    let fx = fx.clamp(0.0, (grid.nx + 1) as f64);
    let fy = fy.clamp(0.0, (grid.ny + 1) as f64);
    let i0 = (fx.floor() as usize).min(grid.nx);
    let j0 = (fy.floor() as usize).min(grid.ny);
    let tx = fx - i0 as f64;
    let ty = fy - j0 as f64;
    let f00 = f[(i0, j0)];
    let f10 = f[(i0 + 1, j0)];
    let f01 = f[(i0, j0 + 1)];
    let f11 = f[(i0 + 1, j0 + 1)];
    f00 * (1.0 - tx) * (1.0 - ty) + f10 * tx * (1.0 - ty) + f01 * (1.0 - tx) * ty + f11 * tx * ty
}
