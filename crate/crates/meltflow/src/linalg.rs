//! Linear solvers for the implicit steps: a direct tridiagonal solve for 1D
//! systems and a Jacobi-preconditioned conjugate-gradient method in 2D, both
//! behind the same Helmholtz/Poisson operator so any solver meeting the
//! max-norm residual contract is conforming.

use crate::error::Error;
use crate::grid::{Grid, ScalarField, Side};
use crate::Result;
use rayon::prelude::*;

/// Homogeneous boundary behaviour of an implicit operator on one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceBc {
    /// Zero flux through the boundary face.
    Neumann,
    /// Zero value on the boundary face (ghost = -interior).
    Dirichlet,
}

/// Matrix-free operator `y = B x - div(k grad x)` with per-face coefficients.
///
/// `B` is the diagonal mass/damping coefficient (zero for a pure Poisson
/// operator). Face coefficients are stored explicitly so the projection step
/// can reuse exactly the same numbers for its face corrections.
pub struct HelmholtzOp {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Diagonal coefficient per interior cell, indexed like interior (i-1, j-1).
    pub bmass: Vec<f64>,
    /// x-face coefficients, (nx+1) x ny, face f between cells (f, j) and (f+1, j).
    pub kx: Vec<f64>,
    /// y-face coefficients, nx x (ny+1).
    pub ky: Vec<f64>,
    pub bc: [FaceBc; 4],
    diag: Vec<f64>,
    /// True when every side is Neumann and B == 0 (singular operator).
    pub singular: bool,
}

impl HelmholtzOp {
    /// Build from a cell-centered coefficient. Faces take the harmonic mean,
    /// which reproduces the exact steady flux across coefficient jumps and
    /// reduces to the arithmetic mean for smooth coefficients.
    pub fn from_cell_coeff(
        grid: &Grid,
        bmass: &ScalarField,
        coeff: &ScalarField,
        bc: [FaceBc; 4],
    ) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let face = |a: f64, b: f64| {
            if a > 0.0 && b > 0.0 {
                2.0 * a * b / (a + b)
            } else {
                0.5 * (a + b)
            }
        };
        let mut kx = vec![0.0; (nx + 1) * ny];
        let mut ky = vec![0.0; nx * (ny + 1)];
        for j in 1..=ny {
            for f in 0..=nx {
                kx[(j - 1) * (nx + 1) + f] = face(coeff[(f, j)], coeff[(f + 1, j)]);
            }
        }
        for f in 0..=ny {
            for i in 1..=nx {
                ky[f * nx + (i - 1)] = face(coeff[(i, f)], coeff[(i, f + 1)]);
            }
        }
        // In 1D the y faces do not exist.
        if grid.dim == 1 {
            ky.fill(0.0);
        }
        let mut b = vec![0.0; nx * ny];
        for j in 1..=ny {
            for i in 1..=nx {
                b[(j - 1) * nx + (i - 1)] = bmass[(i, j)];
            }
        }
        Self::from_face_coeffs(grid, b, kx, ky, bc)
    }

    /// Build directly from face coefficients.
    pub fn from_face_coeffs(
        grid: &Grid,
        bmass: Vec<f64>,
        kx: Vec<f64>,
        ky: Vec<f64>,
        bc: [FaceBc; 4],
    ) -> Self {
        let mut op = HelmholtzOp {
            nx: grid.nx,
            ny: grid.ny,
            h: grid.h,
            bmass,
            kx,
            ky,
            bc,
            diag: Vec::new(),
            singular: false,
        };
        op.singular = op.bc.iter().all(|b| *b == FaceBc::Neumann)
            && op.bmass.iter().all(|v| *v == 0.0);
        op.diag = op.compute_diag();
        op
    }

    #[inline(always)]
    fn kxf(&self, f: usize, j: usize) -> f64 {
        self.kx[(j - 1) * (self.nx + 1) + f]
    }

    #[inline(always)]
    fn kyf(&self, i: usize, f: usize) -> f64 {
        self.ky[f * self.nx + (i - 1)]
    }

    fn compute_diag(&self) -> Vec<f64> {
        let invh2 = 1.0 / (self.h * self.h);
        let (nx, ny) = (self.nx, self.ny);
        let mut d = vec![0.0; nx * ny];
        for j in 1..=ny {
            for i in 1..=nx {
                let mut v = self.bmass[(j - 1) * nx + (i - 1)];
                // west
                v += invh2
                    * if i > 1 {
                        self.kxf(i - 1, j)
                    } else {
                        match self.bc[Side::XMin as usize] {
                            FaceBc::Neumann => 0.0,
                            FaceBc::Dirichlet => 2.0 * self.kxf(0, j),
                        }
                    };
                // east
                v += invh2
                    * if i < nx {
                        self.kxf(i, j)
                    } else {
                        match self.bc[Side::XMax as usize] {
                            FaceBc::Neumann => 0.0,
                            FaceBc::Dirichlet => 2.0 * self.kxf(nx, j),
                        }
                    };
                // south
                v += invh2
                    * if j > 1 {
                        self.kyf(i, j - 1)
                    } else {
                        match self.bc[Side::YMin as usize] {
                            FaceBc::Neumann => 0.0,
                            FaceBc::Dirichlet => 2.0 * self.kyf(i, 0),
                        }
                    };
                // north
                v += invh2
                    * if j < ny {
                        self.kyf(i, j)
                    } else {
                        match self.bc[Side::YMax as usize] {
                            FaceBc::Neumann => 0.0,
                            FaceBc::Dirichlet => 2.0 * self.kyf(i, ny),
                        }
                    };
                d[(j - 1) * nx + (i - 1)] = v;
            }
        }
        d
    }

    /// y = A x over interior cells (ghosts of x are not read).
    pub fn apply(&self, x: &ScalarField, y: &mut ScalarField) {
        let invh2 = 1.0 / (self.h * self.h);
        let nx = self.nx;
        let bc = self.bc;
        let stride = nx + 2;
        let xs = x.data();
        // Split the output into disjoint interior rows for deterministic parallelism.
        let rows: Vec<(usize, &mut [f64])> = {
            let data = y.data_mut();
            data.chunks_mut(stride)
                .enumerate()
                .skip(1)
                .take(self.ny)
                .collect()
        };
        rows.into_par_iter().for_each(|(j, row)| {
            for i in 1..=nx {
                let c = j * stride + i;
                let xc = xs[c];
                let mut v = self.bmass[(j - 1) * nx + (i - 1)] * xc;
                // west face
                v += invh2
                    * if i > 1 {
                        self.kxf(i - 1, j) * (xc - xs[c - 1])
                    } else {
                        match bc[Side::XMin as usize] {
                            FaceBc::Neumann => 0.0,
                            FaceBc::Dirichlet => self.kxf(0, j) * 2.0 * xc,
                        }
                    };
                // east face
                v += invh2
                    * if i < nx {
                        self.kxf(i, j) * (xc - xs[c + 1])
                    } else {
                        match bc[Side::XMax as usize] {
                            FaceBc::Neumann => 0.0,
                            FaceBc::Dirichlet => self.kxf(nx, j) * 2.0 * xc,
                        }
                    };
                // south face
                v += invh2
                    * if j > 1 {
                        self.kyf(i, j - 1) * (xc - xs[c - stride])
                    } else {
                        match bc[Side::YMin as usize] {
                            FaceBc::Neumann => 0.0,
                            FaceBc::Dirichlet => self.kyf(i, 0) * 2.0 * xc,
                        }
                    };
                // north face
                v += invh2
                    * if j < self.ny {
                        self.kyf(i, j) * (xc - xs[c + stride])
                    } else {
                        match bc[Side::YMax as usize] {
                            FaceBc::Neumann => 0.0,
                            FaceBc::Dirichlet => self.kyf(i, self.ny) * 2.0 * xc,
                        }
                    };
                row[i] = v;
            }
        });
    }

    /// Add the lifting terms of inhomogeneous side values to a right-hand side.
    ///
    /// For a Dirichlet face value g: `rhs += 2 k_f g / h^2`; Neumann side flux
    /// q (outward, per area): `rhs += q k-independent / h`.
    pub fn lift_dirichlet(&self, rhs: &mut ScalarField, side: Side, value: f64) {
        let invh2 = 1.0 / (self.h * self.h);
        match side {
            Side::XMin => {
                for j in 1..=self.ny {
                    rhs[(1, j)] += 2.0 * self.kxf(0, j) * value * invh2;
                }
            }
            Side::XMax => {
                for j in 1..=self.ny {
                    rhs[(self.nx, j)] += 2.0 * self.kxf(self.nx, j) * value * invh2;
                }
            }
            Side::YMin => {
                for i in 1..=self.nx {
                    rhs[(i, 1)] += 2.0 * self.kyf(i, 0) * value * invh2;
                }
            }
            Side::YMax => {
                for i in 1..=self.nx {
                    rhs[(i, self.ny)] += 2.0 * self.kyf(i, self.ny) * value * invh2;
                }
            }
        }
    }
}

/// Solve statistics for diagnostics and failure reports.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual_inf: f64,
}

fn interior_mean(f: &ScalarField) -> f64 {
    f.sum_interior() / (f.nx * f.ny) as f64
}

fn remove_mean(f: &mut ScalarField) {
    let m = interior_mean(f);
    for j in 1..=f.ny {
        for i in 1..=f.nx {
            f[(i, j)] -= m;
        }
    }
}

/// Jacobi-preconditioned conjugate gradients with a max-norm stopping rule:
/// `||b - A x||_inf <= tol_rel * ||b||_inf + abs_floor`.
pub fn pcg(
    op: &HelmholtzOp,
    b: &ScalarField,
    x: &mut ScalarField,
    tol_rel: f64,
    abs_floor: f64,
    max_iter: usize,
    context: &'static str,
) -> Result<SolveStats> {
    let grid_like = (op.nx, op.ny);
    let mut b = b.clone();
    if op.singular {
        remove_mean(&mut b);
        remove_mean(x);
    }
    let bnorm = b.max_abs_interior();
    let target = tol_rel * bnorm + abs_floor;

    let mut r = b.clone();
    let mut ax = b.clone();
    op.apply(x, &mut ax);
    for j in 1..=grid_like.1 {
        for i in 1..=grid_like.0 {
            r[(i, j)] -= ax[(i, j)];
        }
    }
    let mut rnorm = r.max_abs_interior();
    if rnorm <= target {
        return Ok(SolveStats {
            iterations: 0,
            residual_inf: rnorm,
        });
    }

    let mut z = r.clone();
    let precond = |r: &ScalarField, z: &mut ScalarField| {
        for j in 1..=r.ny {
            for i in 1..=r.nx {
                let d = op.diag[(j - 1) * r.nx + (i - 1)];
                z[(i, j)] = if d > 0.0 { r[(i, j)] / d } else { r[(i, j)] };
            }
        }
    };
    precond(&r, &mut z);
    if op.singular {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut ap = b.clone();

    let dot = |a: &ScalarField, c: &ScalarField| -> f64 {
        let mut s = 0.0;
        for j in 1..=a.ny {
            for i in 1..=a.nx {
                s += a[(i, j)] * c[(i, j)];
            }
        }
        s
    };

    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // Should not happen for an SPD operator; bail out with diagnostics.
            return Err(Error::Solver {
                context,
                residual: rnorm,
                target,
                iterations: it,
            });
        }
        let alpha = rz / pap;
        for j in 1..=grid_like.1 {
            for i in 1..=grid_like.0 {
                x[(i, j)] += alpha * p[(i, j)];
                r[(i, j)] -= alpha * ap[(i, j)];
            }
        }
        rnorm = r.max_abs_interior();
        if rnorm <= target {
            if op.singular {
                remove_mean(x);
            }
            return Ok(SolveStats {
                iterations: it,
                residual_inf: rnorm,
            });
        }
        precond(&r, &mut z);
        if op.singular {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for j in 1..=grid_like.1 {
            for i in 1..=grid_like.0 {
                p[(i, j)] = z[(i, j)] + beta * p[(i, j)];
            }
        }
    }
    Err(Error::Solver {
        context,
        residual: rnorm,
        target,
        iterations: max_iter,
    })
}

/// Direct tridiagonal solve for 1D operators (Thomas algorithm).
///
/// For the singular all-Neumann Poisson case the right-hand side is deflated
/// to mean zero, the first unknown is pinned, and the mean is removed from
/// the solution afterwards.
pub fn solve_tridiag_1d(op: &HelmholtzOp, b: &ScalarField, x: &mut ScalarField) {
    let n = op.nx;
    let invh2 = 1.0 / (op.h * op.h);
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 1..=n {
        rhs[i - 1] = b[(i, 1)];
        let mut d = op.bmass[i - 1];
        if i > 1 {
            let k = op.kxf(i - 1, 1) * invh2;
            d += k;
            sub[i - 1] = -k;
        } else {
            match op.bc[Side::XMin as usize] {
                FaceBc::Neumann => {}
                FaceBc::Dirichlet => d += 2.0 * op.kxf(0, 1) * invh2,
            }
        }
        if i < n {
            let k = op.kxf(i, 1) * invh2;
            d += k;
            sup[i - 1] = -k;
        } else {
            match op.bc[Side::XMax as usize] {
                FaceBc::Neumann => {}
                FaceBc::Dirichlet => d += 2.0 * op.kxf(n, 1) * invh2,
            }
        }
        diag[i - 1] = d;
    }
    if op.singular {
        let mean = rhs.iter().sum::<f64>() / n as f64;
        rhs.iter_mut().for_each(|v| *v -= mean);
        // pin the first unknown
        diag[0] = 1.0;
        sup[0] = 0.0;
        rhs[0] = 0.0;
        sub[1] = 0.0;
    }
    // forward sweep
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut sol = vec![0.0; n];
    sol[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        sol[i] = (rhs[i] - sup[i] * sol[i + 1]) / diag[i];
    }
    if op.singular {
        let mean = sol.iter().sum::<f64>() / n as f64;
        sol.iter_mut().for_each(|v| *v -= mean);
    }
    for i in 1..=n {
        x[(i, 1)] = sol[i - 1];
    }
}

/// Dispatching solve: direct in 1D, PCG in 2D. Returns solver stats.
pub fn solve(
    op: &HelmholtzOp,
    b: &ScalarField,
    x: &mut ScalarField,
    tol_rel: f64,
    max_iter: usize,
    context: &'static str,
) -> Result<SolveStats> {
    let bnorm = b.max_abs_interior();
    let abs_floor = 1e-300 + 1e-14 * bnorm;
    if op.ny == 1 {
        solve_tridiag_1d(op, b, x);
        // report the true residual for the contract check
        let mut ax = b.clone();
        op.apply(x, &mut ax);
        let mut rnorm: f64 = 0.0;
        let mut bb = b.clone();
        if op.singular {
            remove_mean(&mut bb);
        }
        for i in 1..=op.nx {
            rnorm = rnorm.max((bb[(i, 1)] - ax[(i, 1)]).abs());
        }
        return Ok(SolveStats {
            iterations: 1,
            residual_inf: rnorm,
        });
    }
    pcg(op, b, x, tol_rel, abs_floor, max_iter, context)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundarySpec, Grid};

    fn grid1(n: usize) -> Grid {
        Grid::new(&[0.0], &[1.0], &[n], [BoundarySpec::wall(); 4]).unwrap()
    }

    fn grid2(n: usize) -> Grid {
        Grid::new(&[0.0, 0.0], &[1.0, 1.0], &[n, n], [BoundarySpec::wall(); 4]).unwrap()
    }

    #[test]
    fn tridiag_poisson_dirichlet() {
        // -u'' = pi^2 sin(pi x), u(0)=u(1)=0 -> u = sin(pi x)
        let g = grid1(200);
        let one = ScalarField::constant(&g, 1.0);
        let zero = ScalarField::zeros(&g);
        let op = HelmholtzOp::from_cell_coeff(&g, &zero, &one, [FaceBc::Dirichlet; 4]);
        let b = ScalarField::from_fn(&g, |x, _| {
            std::f64::consts::PI.powi(2) * (std::f64::consts::PI * x).sin()
        });
        let mut x = ScalarField::zeros(&g);
        solve_tridiag_1d(&op, &b, &mut x);
        let mut err: f64 = 0.0;
        for i in 1..=g.nx {
            let (xc, _) = g.center(i, 1);
            err = err.max((x[(i, 1)] - (std::f64::consts::PI * xc).sin()).abs());
        }
        assert!(err < 5e-4, "err={err}");
    }

    #[test]
    fn tridiag_neumann_singular() {
        // Pure Neumann Poisson with compatible rhs; solution defined up to a
        // constant, returned mean-free.
        let g = grid1(64);
        let one = ScalarField::constant(&g, 1.0);
        let zero = ScalarField::zeros(&g);
        let op = HelmholtzOp::from_cell_coeff(&g, &zero, &one, [FaceBc::Neumann; 4]);
        let k = 2.0 * std::f64::consts::PI;
        let b = ScalarField::from_fn(&g, |x, _| k * k * (k * x).cos());
        let mut x = ScalarField::zeros(&g);
        let stats = solve(&op, &b, &mut x, 1e-10, 1000, "test").unwrap();
        assert!(stats.residual_inf < 1e-8 * b.max_abs_interior());
        let mut err: f64 = 0.0;
        for i in 2..=g.nx - 1 {
            let (xc, _) = g.center(i, 1);
            err = err.max((x[(i, 1)] - (k * xc).cos()).abs());
        }
        assert!(err < 5e-2, "err={err}");
    }

    #[test]
    fn pcg_matches_tridiag_on_2d_stripe() {
        // A y-independent 2D problem must reproduce the 1D solution.
        let g2 = grid2(48);
        let one2 = ScalarField::constant(&g2, 1.0);
        let mass2 = ScalarField::constant(&g2, 5.0);
        let op2 = HelmholtzOp::from_cell_coeff(
            &g2,
            &mass2,
            &one2,
            [
                FaceBc::Dirichlet,
                FaceBc::Dirichlet,
                FaceBc::Neumann,
                FaceBc::Neumann,
            ],
        );
        let b2 = ScalarField::from_fn(&g2, |x, _| (3.0 * x).sin());
        let mut x2 = ScalarField::zeros(&g2);
        let stats = pcg(&op2, &b2, &mut x2, 1e-12, 1e-14, 4000, "test").unwrap();
        assert!(stats.residual_inf <= 1e-12 * b2.max_abs_interior() + 1e-14);

        let g1 = grid1(48);
        let one1 = ScalarField::constant(&g1, 1.0);
        let mass1 = ScalarField::constant(&g1, 5.0);
        let op1 = HelmholtzOp::from_cell_coeff(
            &g1,
            &mass1,
            &one1,
            [
                FaceBc::Dirichlet,
                FaceBc::Dirichlet,
                FaceBc::Neumann,
                FaceBc::Neumann,
            ],
        );
        let b1 = ScalarField::from_fn(&g1, |x, _| (3.0 * x).sin());
        let mut x1 = ScalarField::zeros(&g1);
        solve_tridiag_1d(&op1, &b1, &mut x1);
        for i in 1..=g1.nx {
            assert!((x2[(i, 24)] - x1[(i, 1)]).abs() < 1e-9);
        }
    }

    #[test]
    fn variable_coefficient_spd_and_converges() {
        let g = grid2(32);
        // strongly varying mobility, as in a 1000:1 density ratio projection
        let coeff = ScalarField::from_fn(&g, |x, y| {
            if (x - 0.5).hypot(y - 0.5) < 0.25 {
                1e-3
            } else {
                1.0
            }
        });
        let mut coeff = coeff;
        crate::grid::apply_scalar_bc(&mut coeff, &g, crate::grid::ScalarKind::Generic, None);
        let zero = ScalarField::zeros(&g);
        let op = HelmholtzOp::from_cell_coeff(
            &g,
            &zero,
            &coeff,
            [
                FaceBc::Neumann,
                FaceBc::Neumann,
                FaceBc::Neumann,
                FaceBc::Dirichlet,
            ],
        );
        let b = ScalarField::from_fn(&g, |x, y| (x - 0.5) * (y - 0.3));
        let mut x = ScalarField::zeros(&g);
        let stats = pcg(&op, &b, &mut x, 1e-9, 0.0, 10_000, "test").unwrap();
        assert!(stats.residual_inf <= 1e-9 * b.max_abs_interior());
    }

    #[test]
    fn lifting_reproduces_dirichlet_value() {
        // Solve B u - div(k grad u) = B*0 with u(0)=2, u(1)=2 and B -> 0:
        // solution tends to the constant 2.
        let g = grid1(32);
        let one = ScalarField::constant(&g, 1.0);
        let zero = ScalarField::zeros(&g);
        let op = HelmholtzOp::from_cell_coeff(
            &g,
            &zero,
            &one,
            [
                FaceBc::Dirichlet,
                FaceBc::Dirichlet,
                FaceBc::Neumann,
                FaceBc::Neumann,
            ],
        );
        let mut rhs = ScalarField::zeros(&g);
        op.lift_dirichlet(&mut rhs, Side::XMin, 2.0);
        op.lift_dirichlet(&mut rhs, Side::XMax, 2.0);
        let mut x = ScalarField::zeros(&g);
        solve_tridiag_1d(&op, &rhs, &mut x);
        for i in 1..=g.nx {
            assert!((x[(i, 1)] - 2.0).abs() < 1e-10);
        }
    }
}
