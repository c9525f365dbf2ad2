//! Conservative tanh level-set core: initialization, advection,
//! reinitialization, smoothed Heaviside/delta functions, filtered
//! normal/curvature evaluation, isocontour projection and interface-value
//! extension.
//!
//! Conventions used throughout the crate:
//! - `phi > 0` in the liquid (dense) phase, `phi < 0` in the gas phase;
//! - the interface normal is `n = grad(phi~)/|grad(phi~)|`, i.e. it points
//!   from the gas phase into the liquid; the transport-velocity formulas and
//!   interface forces are written for this orientation;
//! - the smoothed Heaviside rises from 0 (gas) to 1 (liquid) over the band
//!   `|d| < 3 epsilon`, outside of which it saturates exactly.

use crate::error::Error;
use crate::grid::{
    apply_scalar_bc, gradient, interpolate_unchecked, Grid, ScalarField, ScalarKind, VectorField,
};
use crate::Result;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Clipping used when recovering the signed distance from phi.
const PHI_CLIP: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetConfig {
    /// Interface thickness parameter [m]; the band spans 6 epsilon.
    pub epsilon: f64,
    /// Max pseudo-time steps per reinitialization call.
    pub reinit_pseudo_steps: usize,
    /// Convergence tolerance on the max phi update per pseudo-step.
    pub reinit_tolerance: f64,
    /// Smoothing sweeps applied to phi before normal/curvature evaluation.
    pub filter_passes: usize,
    /// Bisection iterations for isocontour projection.
    pub projection_max_iter: usize,
    /// Length tolerance of the projection root find [m].
    pub projection_tolerance: f64,
}

impl LevelSetConfig {
    pub fn new(epsilon: f64) -> Self {
        LevelSetConfig {
            epsilon,
            reinit_pseudo_steps: 2,
            reinit_tolerance: 1e-8,
            filter_passes: 4,
            projection_max_iter: 40,
            projection_tolerance: 1e-12,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.epsilon > 0.0) || self.epsilon < grid.h * (1.0 - 1e-12) {
            return Err(Error::config(
                "levelset.epsilon",
                format!(
                    "epsilon must satisfy epsilon >= h (= {:.3e}), got {:.3e}",
                    grid.h, self.epsilon
                ),
            ));
        }
        if !(self.reinit_tolerance > 0.0 && self.projection_tolerance > 0.0) {
            return Err(Error::config("levelset", "tolerances must be positive"));
        }
        Ok(())
    }
}

/// Filtered interface geometry derived from the level set.
#[derive(Debug, Clone)]
pub struct InterfaceGeometry {
    /// Unit normal pointing from gas into liquid (`grad phi` direction).
    pub normal: VectorField,
    /// Mean curvature `-div(n)`; positive for a liquid disk.
    pub kappa: ScalarField,
    /// Smoothed Heaviside in [0, 1].
    pub heaviside: ScalarField,
    /// Smoothed delta `|grad H|`, zero outside the band.
    pub delta: ScalarField,
}

// ---------------------------------------------------------------------------
// Profile functions
// ---------------------------------------------------------------------------

/// Initialize `phi = tanh(d / (2 epsilon))` from a signed distance function.
pub fn init_levelset(grid: &Grid, sdf: impl Fn(f64, f64) -> f64, epsilon: f64) -> ScalarField {
    let mut phi = ScalarField::from_fn(grid, |x, y| (sdf(x, y) / (2.0 * epsilon)).tanh());
    apply_scalar_bc(&mut phi, grid, ScalarKind::LevelSet, None);
    phi
}

/// Recover the signed distance from the tanh profile (clipped near +-1).
#[inline]
pub fn distance_from_phi(phi: f64, epsilon: f64) -> f64 {
    2.0 * epsilon * phi.clamp(-PHI_CLIP, PHI_CLIP).atanh()
}

/// Smoothed Heaviside of a signed distance.
#[inline]
pub fn heaviside_of_distance(d: f64, epsilon: f64) -> f64 {
    let w = 3.0 * epsilon;
    if d <= -w {
        0.0
    } else if d >= w {
        1.0
    } else {
        0.5 + d / (6.0 * epsilon) + (PI * d / w).sin() / (2.0 * PI)
    }
}

/// Pointwise smoothed Heaviside of a phi value.
#[inline]
pub fn heaviside_of_phi(phi: f64, epsilon: f64) -> f64 {
    heaviside_of_distance(distance_from_phi(phi, epsilon), epsilon)
}

/// Field version of the smoothed Heaviside.
pub fn smooth_heaviside(phi: &ScalarField, grid: &Grid, epsilon: f64) -> ScalarField {
    let mut h = phi.clone();
    for v in h.data_mut() {
        *v = heaviside_of_phi(*v, epsilon);
    }
    let _ = grid;
    h
}

/// Smoothed delta `delta = |grad H|` from the Heaviside field.
pub fn smooth_delta(heaviside: &ScalarField, grid: &Grid) -> ScalarField {
    let g = gradient(heaviside, grid);
    let mut d = ScalarField::zeros(grid);
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            d[(i, j)] = (g.x[(i, j)].powi(2) + g.y[(i, j)].powi(2)).sqrt();
        }
    }
    apply_scalar_bc(&mut d, grid, ScalarKind::Generic, None);
    d
}

// ---------------------------------------------------------------------------
// Advection
// ---------------------------------------------------------------------------

/// Second-order upwind-biased derivative of `f` along x at interior (i, j),
/// falling back to first order next to the ghost layer.
#[inline]
fn upwind_dx(f: &ScalarField, i: usize, j: usize, vel: f64, h: f64, nx: usize) -> f64 {
    if vel > 0.0 {
        if i >= 2 {
            (3.0 * f[(i, j)] - 4.0 * f[(i - 1, j)] + f[(i - 2, j)]) / (2.0 * h)
        } else {
            (f[(i, j)] - f[(i - 1, j)]) / h
        }
    } else if i + 2 <= nx + 1 {
        (-3.0 * f[(i, j)] + 4.0 * f[(i + 1, j)] - f[(i + 2, j)]) / (2.0 * h)
    } else {
        (f[(i + 1, j)] - f[(i, j)]) / h
    }
}

#[inline]
fn upwind_dy(f: &ScalarField, i: usize, j: usize, vel: f64, h: f64, ny: usize) -> f64 {
    if vel > 0.0 {
        if j >= 2 {
            (3.0 * f[(i, j)] - 4.0 * f[(i, j - 1)] + f[(i, j - 2)]) / (2.0 * h)
        } else {
            (f[(i, j)] - f[(i, j - 1)]) / h
        }
    } else if j + 2 <= ny + 1 {
        (-3.0 * f[(i, j)] + 4.0 * f[(i, j + 1)] - f[(i, j + 2)]) / (2.0 * h)
    } else {
        (f[(i, j + 1)] - f[(i, j)]) / h
    }
}

/// Upwind advection tendency `-(u . grad) f` for interior cells.
pub fn advection_tendency(
    f: &ScalarField,
    ux: &ScalarField,
    uy: &ScalarField,
    grid: &Grid,
) -> ScalarField {
    let mut out = ScalarField::zeros(grid);
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    for j in 1..=ny {
        for i in 1..=nx {
            let u = ux[(i, j)];
            let v = uy[(i, j)];
            let mut t = -u * upwind_dx(f, i, j, u, h, nx);
            if grid.dim == 2 {
                t -= v * upwind_dy(f, i, j, v, h, ny);
            }
            out[(i, j)] = t;
        }
    }
    out
}

/// Advect the level set one step with explicit two-stage (Heun) integration.
///
/// Errors when the transport CFL `max|u| dt / h` exceeds 0.5. The range is
/// clamped back to [-1, 1] afterwards.
pub fn advect_levelset(
    phi: &mut ScalarField,
    u_gamma: &VectorField,
    grid: &Grid,
    dt: f64,
) -> Result<()> {
    let vmax = u_gamma.max_norm_interior();
    let cfl = vmax * dt / grid.h;
    if cfl > 0.5 + 1e-12 {
        return Err(Error::StepSize(format!(
            "level-set transport CFL {cfl:.3} exceeds 0.5 (|u|={vmax:.3e}, dt={dt:.3e}, h={:.3e})",
            grid.h
        )));
    }
    let bc_vel = (&u_gamma.x, &u_gamma.y);
    apply_scalar_bc(phi, grid, ScalarKind::LevelSet, Some(bc_vel));
    let k1 = advection_tendency(phi, &u_gamma.x, &u_gamma.y, grid);
    let mut stage = phi.clone();
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            stage[(i, j)] = phi[(i, j)] + dt * k1[(i, j)];
        }
    }
    apply_scalar_bc(&mut stage, grid, ScalarKind::LevelSet, Some(bc_vel));
    let k2 = advection_tendency(&stage, &u_gamma.x, &u_gamma.y, grid);
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            let v = phi[(i, j)] + 0.5 * dt * (k1[(i, j)] + k2[(i, j)]);
            phi[(i, j)] = v.clamp(-1.0, 1.0);
        }
    }
    apply_scalar_bc(phi, grid, ScalarKind::LevelSet, Some(bc_vel));
    Ok(())
}

// ---------------------------------------------------------------------------
// Reinitialization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct ReinitReport {
    pub pseudo_steps: usize,
    pub last_update: f64,
    pub converged: bool,
}

/// Conservative reinitialization toward the equilibrium tanh profile:
/// `d phi/d tau + div( (1 - phi^2)/2 n ) = eps div( (grad phi . n) n )`
/// with the normal field frozen during the pseudo-time loop.
pub fn reinitialize(
    phi: &mut ScalarField,
    normal: &VectorField,
    grid: &Grid,
    cfg: &LevelSetConfig,
) -> ReinitReport {
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let eps = cfg.epsilon;
    // Explicit stability: compression CFL and normal diffusion number both
    // bounded by 0.25 for epsilon >= h.
    let dtau = 0.25 * h * h / eps;
    let mut fx = vec![0.0; (nx + 1) * ny];
    let mut fy = vec![0.0; nx * (ny + 1)];
    let mut last_update = f64::INFINITY;
    let mut steps = 0;
    for _ in 0..cfg.reinit_pseudo_steps {
        steps += 1;
        apply_scalar_bc(phi, grid, ScalarKind::LevelSet, None);
        // x-face fluxes
        for j in 1..=ny {
            for f in 0..=nx {
                let (il, ir) = (f, f + 1);
                let pf = 0.5 * (phi[(il, j)] + phi[(ir, j)]);
                let nfx = 0.5 * (normal.x[(il, j)] + normal.x[(ir, j)]);
                let nfy = 0.5 * (normal.y[(il, j)] + normal.y[(ir, j)]);
                let dx = (phi[(ir, j)] - phi[(il, j)]) / h;
                let dy = if grid.dim == 2 {
                    0.25 * (phi[(il, j + 1)] - phi[(il, j - 1)] + phi[(ir, j + 1)]
                        - phi[(ir, j - 1)])
                        / h
                } else {
                    0.0
                };
                let gn = dx * nfx + dy * nfy;
                fx[(j - 1) * (nx + 1) + f] = 0.5 * (1.0 - pf * pf) * nfx - eps * gn * nfx;
            }
        }
        // y-face fluxes
        if grid.dim == 2 {
            for f in 0..=ny {
                for i in 1..=nx {
                    let (jl, jr) = (f, f + 1);
                    let pf = 0.5 * (phi[(i, jl)] + phi[(i, jr)]);
                    let nfx = 0.5 * (normal.x[(i, jl)] + normal.x[(i, jr)]);
                    let nfy = 0.5 * (normal.y[(i, jl)] + normal.y[(i, jr)]);
                    let dy = (phi[(i, jr)] - phi[(i, jl)]) / h;
                    let dx = 0.25
                        * (phi[(i + 1, jl)] - phi[(i - 1, jl)] + phi[(i + 1, jr)]
                            - phi[(i - 1, jr)])
                        / h;
                    let gn = dx * nfx + dy * nfy;
                    fy[(f * nx) + (i - 1)] = 0.5 * (1.0 - pf * pf) * nfy - eps * gn * nfy;
                }
            }
        }
        let mut update: f64 = 0.0;
        for j in 1..=ny {
            for i in 1..=nx {
                let mut div = (fx[(j - 1) * (nx + 1) + i] - fx[(j - 1) * (nx + 1) + i - 1]) / h;
                if grid.dim == 2 {
                    div += (fy[j * nx + (i - 1)] - fy[(j - 1) * nx + (i - 1)]) / h;
                }
                let d = -dtau * div;
                update = update.max(d.abs());
                phi[(i, j)] = (phi[(i, j)] + d).clamp(-1.0, 1.0);
            }
        }
        last_update = update;
        if update < cfg.reinit_tolerance {
            break;
        }
    }
    apply_scalar_bc(phi, grid, ScalarKind::LevelSet, None);
    ReinitReport {
        pseudo_steps: steps,
        last_update,
        converged: last_update < cfg.reinit_tolerance,
    }
}

// ---------------------------------------------------------------------------
// Geometry (filtering, normals, curvature)
// ---------------------------------------------------------------------------

/// One smoothing pass: [1 2 1]/4 binomial filter applied along each axis.
fn filter_pass(f: &mut ScalarField, grid: &Grid) {
    apply_scalar_bc(f, grid, ScalarKind::Generic, None);
    let mut tmp = f.clone();
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            tmp[(i, j)] = 0.25 * (f[(i - 1, j)] + 2.0 * f[(i, j)] + f[(i + 1, j)]);
        }
    }
    apply_scalar_bc(&mut tmp, grid, ScalarKind::Generic, None);
    if grid.dim == 2 {
        for j in 1..=grid.ny {
            for i in 1..=grid.nx {
                f[(i, j)] = 0.25 * (tmp[(i, j - 1)] + 2.0 * tmp[(i, j)] + tmp[(i, j + 1)]);
            }
        }
        apply_scalar_bc(f, grid, ScalarKind::Generic, None);
    } else {
        *f = tmp;
    }
}

/// Compute filtered normals, curvature and the smoothed Heaviside/delta pair.
pub fn interface_geometry(
    phi: &ScalarField,
    grid: &Grid,
    cfg: &LevelSetConfig,
) -> InterfaceGeometry {
    let mut smooth = phi.clone();
    for _ in 0..cfg.filter_passes {
        filter_pass(&mut smooth, grid);
    }
    let g = gradient(&smooth, grid);
    let mut normal = VectorField::zeros(grid);
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            let gx = g.x[(i, j)];
            let gy = g.y[(i, j)];
            let norm = (gx * gx + gy * gy).sqrt();
            if norm > 1e-12 {
                normal.x[(i, j)] = gx / norm;
                normal.y[(i, j)] = gy / norm;
            } else {
                normal.x[(i, j)] = 1.0;
                normal.y[(i, j)] = 0.0;
            }
        }
    }
    apply_scalar_bc(&mut normal.x, grid, ScalarKind::Generic, None);
    apply_scalar_bc(&mut normal.y, grid, ScalarKind::Generic, None);

    let mut kappa = ScalarField::zeros(grid);
    let div_n = crate::grid::divergence(&normal.x, &normal.y, grid);
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            kappa[(i, j)] = -div_n[(i, j)];
        }
    }
    for _ in 0..cfg.filter_passes {
        filter_pass(&mut kappa, grid);
    }
    apply_scalar_bc(&mut kappa, grid, ScalarKind::Generic, None);

    let mut heaviside = phi.clone();
    for v in heaviside.data_mut() {
        *v = heaviside_of_phi(*v, cfg.epsilon);
    }
    let delta = smooth_delta(&heaviside, grid);
    InterfaceGeometry {
        normal,
        kappa,
        heaviside,
        delta,
    }
}

// ---------------------------------------------------------------------------
// Isocontour projection and extension
// ---------------------------------------------------------------------------

/// Projection targets along the interface normal.
///
/// The liquid/gas ends are the exact Heaviside-saturation isocontours
/// `d = +-3 epsilon`, which on the tanh profile are the well-separated
/// level-set values `phi = +-tanh(3/2)`; the root find runs in phi where the
/// profile stays strictly monotone (H itself is flat past the ends).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoTarget {
    /// phi = 0 (H = 1/2).
    Midplane,
    /// Liquid end of the interface region (d = +3 eps, H = 1).
    LiquidEnd,
    /// Gas end of the interface region (d = -3 eps, H = 0).
    GasEnd,
}

impl IsoTarget {
    fn phi_target(self) -> f64 {
        match self {
            IsoTarget::Midplane => 0.0,
            IsoTarget::LiquidEnd => 1.5f64.tanh(),
            IsoTarget::GasEnd => -(1.5f64.tanh()),
        }
    }
}

/// Project a point onto the requested level-set isocontour along the local
/// interface normal: bracket at h/2 resolution, then bisect.
pub fn project_to_isocontour(
    grid: &Grid,
    phi: &ScalarField,
    normal: &VectorField,
    x: f64,
    y: f64,
    target: IsoTarget,
    cfg: &LevelSetConfig,
) -> Result<(f64, f64)> {
    let nx_v = interpolate_unchecked(&normal.x, grid, x, y);
    let ny_v = if grid.dim == 2 {
        interpolate_unchecked(&normal.y, grid, x, y)
    } else {
        0.0
    };
    let norm = (nx_v * nx_v + ny_v * ny_v).sqrt();
    if norm < 1e-12 {
        return Err(Error::Projection(x, y));
    }
    let (nxu, nyu) = (nx_v / norm, ny_v / norm);
    let eps = cfg.epsilon;
    let phi_target = target.phi_target();
    let eval = |s: f64| -> f64 {
        interpolate_unchecked(phi, grid, x + s * nxu, y + s * nyu) - phi_target
    };
    // band-edge cells sit up to ~one cell outside |d| < 3 eps; extend the
    // walk slightly so their far-end targets stay reachable
    let smax = 6.0 * eps + 2.0 * grid.h;
    let step = 0.5 * grid.h;
    let nsteps = (smax / step).ceil() as i64;
    // sample the ray and keep the bracket closest to s = 0
    let mut best: Option<(f64, f64, f64, f64)> = None; // (sa, sb, ga, gb)
    let mut prev_s = -(nsteps as f64) * step;
    let mut prev_g = eval(prev_s);
    for k in (-nsteps + 1)..=nsteps {
        let s = k as f64 * step;
        let gcur = eval(s);
        if prev_g == 0.0 || prev_g * gcur <= 0.0 {
            let mid = 0.5 * (prev_s + s);
            let better = match best {
                None => true,
                Some((sa, sb, _, _)) => mid.abs() < 0.5 * (sa + sb).abs(),
            };
            if better {
                best = Some((prev_s, s, prev_g, gcur));
            }
        }
        prev_s = s;
        prev_g = gcur;
    }
    let (mut sa, mut sb, mut ga, _gb) = best.ok_or(Error::Projection(x, y))?;
    for _ in 0..cfg.projection_max_iter {
        if (sb - sa).abs() < cfg.projection_tolerance {
            break;
        }
        let sm = 0.5 * (sa + sb);
        let gm = eval(sm);
        if ga * gm <= 0.0 {
            sb = sm;
        } else {
            sa = sm;
            ga = gm;
        }
    }
    let s = 0.5 * (sa + sb);
    if s.abs() > smax + step {
        return Err(Error::Projection(x, y));
    }
    Ok((x + s * nxu, y + s * nyu))
}

/// Precomputed projections for all band cells, shared by the extension calls
/// of one time step (geometry-only, independent of the extended field).
#[derive(Debug, Clone)]
pub struct BandProjections {
    pub cells: Vec<(usize, usize)>,
    pub mid: Vec<Option<(f64, f64)>>,
    pub liquid: Vec<Option<(f64, f64)>>,
    pub gas: Vec<Option<(f64, f64)>>,
    /// Cells whose projection failed and fell back to local evaluation.
    pub fallbacks: usize,
}

pub fn band_projections(
    grid: &Grid,
    phi: &ScalarField,
    geom: &InterfaceGeometry,
    cfg: &LevelSetConfig,
    want_gas: bool,
) -> BandProjections {
    let mut cells = Vec::new();
    for j in 1..=grid.ny {
        for i in 1..=grid.nx {
            if geom.delta[(i, j)] > 0.0 {
                cells.push((i, j));
            }
        }
    }
    let project = |target: IsoTarget| -> Vec<Option<(f64, f64)>> {
        cells
            .par_iter()
            .map(|&(i, j)| {
                let (x, y) = grid.center(i, j);
                project_to_isocontour(grid, phi, &geom.normal, x, y, target, cfg).ok()
            })
            .collect()
    };
    let mid = project(IsoTarget::Midplane);
    let liquid = project(IsoTarget::LiquidEnd);
    let gas = if want_gas {
        project(IsoTarget::GasEnd)
    } else {
        Vec::new()
    };
    let fallbacks = mid.iter().filter(|p| p.is_none()).count()
        + liquid.iter().filter(|p| p.is_none()).count()
        + gas.iter().filter(|p| p.is_none()).count();
    BandProjections {
        cells,
        mid,
        liquid,
        gas,
        fallbacks,
    }
}

impl BandProjections {
    pub fn points(&self, target: IsoTarget) -> &[Option<(f64, f64)>] {
        match target {
            IsoTarget::Midplane => &self.mid,
            IsoTarget::LiquidEnd => &self.liquid,
            IsoTarget::GasEnd => &self.gas,
        }
    }
}

/// Replace band values of `source` by its value at the projected isocontour
/// point; outside the band the field is returned unchanged. Returns the
/// number of fallback-to-local cells.
pub fn extend_from_interface(
    source: &ScalarField,
    grid: &Grid,
    proj: &BandProjections,
    target: IsoTarget,
) -> (ScalarField, usize) {
    let mut out = source.clone();
    let pts = proj.points(target);
    let mut fallbacks = 0;
    for (idx, &(i, j)) in proj.cells.iter().enumerate() {
        match pts[idx] {
            Some((px, py)) => out[(i, j)] = interpolate_unchecked(source, grid, px, py),
            None => fallbacks += 1,
        }
    }
    apply_scalar_bc(&mut out, grid, ScalarKind::Generic, None);
    (out, fallbacks)
}
