//! Time-stepping engine: the weakly partitioned operator-splitting loop
//! coupling the level-set transport, the energy equation and the
//! incompressible Navier-Stokes solve with explicit interface source terms.
//!
//! Per step:
//! 1. extrapolate predictors of the primary variables (linear in time),
//! 2. advance the level set (transport velocity, advection, reinitialization,
//!    geometry refresh),
//! 3. solve the energy equation with evaporative cooling and laser flux,
//! 4. update effective properties, assemble dilation/force terms, run the
//!    momentum predictor and the pressure projection.

use crate::config::{PhiInit, ScenarioKind, SimulationConfig};
use crate::error::Error;
use crate::evaporation::{self, EvapModel, InterfaceTemperature, ScaledDeltas};
use crate::flow::{self, InterfaceForces, ProjectionResult};
use crate::grid::{
    apply_scalar_bc, apply_velocity_bc, Grid, ScalarField, ScalarKind, VectorField,
};
use crate::levelset::{
    self, band_projections, interface_geometry, BandProjections, InterfaceGeometry, IsoTarget,
};
use crate::materials::{self, MaterialSet};
use crate::transport::{transport_velocity, TransportInputs, TransportVariant};
use crate::Result;

/// Initial condition bundle.
pub struct InitialState {
    pub phi: ScalarField,
    pub temperature: ScalarField,
    pub velocity: VectorField,
}

/// Per-step report used by runners and property tests.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub dt: f64,
    pub t: f64,
    pub step_index: usize,
    pub u_gamma_max: f64,
    pub div_residual: f64,
    pub div_contract: f64,
    pub interface_mass_flux: f64,
}

pub struct Simulation {
    pub cfg: SimulationConfig,
    pub grid: Grid,
    pub phi: ScalarField,
    pub temperature: ScalarField,
    pub velocity: VectorField,
    pub pressure: ScalarField,
    pub geom: InterfaceGeometry,
    pub time: f64,
    pub step_index: usize,
    /// Time integral of the interface mass flux [kg/m^(3-dim)].
    pub evaporated_integral: f64,
    /// Initial total mass.
    pub m0: f64,
    /// Accumulated projection fallbacks (extension warnings).
    pub projection_fallbacks: usize,
    /// Reinitialization convergence warnings.
    pub reinit_warnings: usize,
    /// Sub-step trace (populated when output.trace_steps is on).
    pub trace: Vec<String>,
    prev_temperature: ScalarField,
    prev_velocity: VectorField,
    alpha_v: f64,
    projections: Option<BandProjections>,
    last_u_gamma_max: f64,
}

impl Simulation {
    pub fn new(cfg: SimulationConfig, init: InitialState) -> Result<Self> {
        cfg.validate()?;
        let grid = Grid::new(&cfg.extent_min, &cfg.extent_max, &cfg.grid_cells, cfg.bcs)?;
        let mats = cfg.materials.clone();
        let alpha_v = if cfg.evaporation.model == EvapModel::Tanasawa {
            evaporation::tanasawa_coefficient(&mats)?
        } else {
            0.0
        };
        let mut phi = init.phi;
        apply_scalar_bc(&mut phi, &grid, ScalarKind::LevelSet, None);
        let mut temperature = init.temperature;
        apply_scalar_bc(&mut temperature, &grid, ScalarKind::Temperature, None);
        let mut velocity = init.velocity;
        apply_velocity_bc(&mut velocity.x, &mut velocity.y, &grid);
        let geom = interface_geometry(&phi, &grid, &cfg.levelset);
        let mut sim = Simulation {
            prev_temperature: temperature.clone(),
            prev_velocity: velocity.clone(),
            pressure: ScalarField::zeros(&grid),
            m0: 0.0,
            evaporated_integral: 0.0,
            projection_fallbacks: 0,
            reinit_warnings: 0,
            trace: Vec::new(),
            alpha_v,
            projections: None,
            last_u_gamma_max: 0.0,
            time: 0.0,
            step_index: 0,
            cfg,
            grid,
            phi,
            temperature,
            velocity,
            geom,
        };
        sim.refresh_projections();
        sim.m0 = sim.total_mass();
        Ok(sim)
    }

    /// Build a simulation from a configuration (scenario-defined initial state).
    pub fn from_config(cfg: SimulationConfig) -> Result<Self> {
        let init = initial_state(&cfg)?;
        Simulation::new(cfg, init)
    }

    fn needs_projections(&self) -> bool {
        self.cfg.transport.variant != TransportVariant::V1
            || self.cfg.evaporation.interface_temperature == InterfaceTemperature::Extended
    }

    fn refresh_projections(&mut self) {
        if self.needs_projections() && self.cfg.evaporation.model != EvapModel::None {
            let want_gas = matches!(
                self.cfg.transport.variant,
                TransportVariant::V3 | TransportVariant::V3e
            );
            let proj = band_projections(
                &self.grid,
                &self.phi,
                &self.geom,
                &self.cfg.levelset,
                want_gas,
            );
            self.projection_fallbacks += proj.fallbacks;
            self.projections = Some(proj);
        } else {
            self.projections = None;
        }
    }

    /// Pointwise evaporative mass flux for a given temperature.
    fn mdot_of(&self, t: f64) -> f64 {
        let mats = &self.cfg.materials;
        match self.cfg.evaporation.model {
            EvapModel::None => 0.0,
            EvapModel::Tanasawa => {
                evaporation::mdot_tanasawa(t, self.alpha_v, mats.evaporation.t_v)
            }
            EvapModel::Knight => evaporation::mdot_knight(t, mats),
        }
    }

    /// Mass-flux field from a temperature field, honoring the configured
    /// interface-temperature mode (band cells read the midplane temperature).
    fn mdot_field(&self, t_src: &ScalarField) -> ScalarField {
        let mut out = ScalarField::zeros(&self.grid);
        if self.cfg.evaporation.model == EvapModel::None {
            return out;
        }
        for j in 1..=self.grid.ny {
            for i in 1..=self.grid.nx {
                out[(i, j)] = self.mdot_of(t_src[(i, j)]);
            }
        }
        if self.cfg.evaporation.interface_temperature == InterfaceTemperature::Extended {
            if let Some(proj) = &self.projections {
                for (idx, &(i, j)) in proj.cells.iter().enumerate() {
                    if let Some((px, py)) = proj.mid[idx] {
                        let t_mid = crate::grid::interpolate_unchecked(t_src, &self.grid, px, py);
                        out[(i, j)] = self.mdot_of(t_mid);
                    }
                }
            }
        }
        apply_scalar_bc(&mut out, &self.grid, ScalarKind::Generic, None);
        out
    }

    /// Temperature used by interface force terms (extended when configured).
    fn interface_temperature_field(&self, t_src: &ScalarField) -> ScalarField {
        if self.cfg.evaporation.interface_temperature == InterfaceTemperature::Extended {
            if let Some(proj) = &self.projections {
                let (ext, fb) =
                    levelset::extend_from_interface(t_src, &self.grid, proj, IsoTarget::Midplane);
                let _ = fb;
                return ext;
            }
        }
        t_src.clone()
    }

    fn solid_fraction_field(&self, t_src: &ScalarField) -> ScalarField {
        let s = &self.cfg.materials.solidification;
        let mut f = ScalarField::zeros(&self.grid);
        for j in 1..=self.grid.ny {
            for i in 1..=self.grid.nx {
                f[(i, j)] = materials::solid_fraction(t_src[(i, j)], s.t_solidus, s.t_liquidus);
            }
        }
        apply_scalar_bc(&mut f, &self.grid, ScalarKind::Generic, None);
        f
    }

    /// Effective property fields (rho, mu, rho cp, k, |K|) for given phi/T.
    fn property_fields(
        &self,
        f_s: &ScalarField,
    ) -> (ScalarField, ScalarField, ScalarField, ScalarField, ScalarField) {
        let m = &self.cfg.materials;
        let g = &self.grid;
        let mut rho = ScalarField::zeros(g);
        let mut mu = ScalarField::zeros(g);
        let mut rhocp = ScalarField::zeros(g);
        let mut k = ScalarField::zeros(g);
        let mut darcy = ScalarField::zeros(g);
        let sol = &m.solidification;
        for j in 1..=g.ny {
            for i in 1..=g.nx {
                let h_phi = self.geom.heaviside[(i, j)];
                let h_s = materials::heaviside_sl(f_s[(i, j)]);
                rho[(i, j)] =
                    materials::effective_density_three_phase(m.solid.rho, m.liquid.rho, m.gas.rho, h_phi, h_s);
                mu[(i, j)] = materials::effective_property_three_phase(
                    m.solid.mu, m.liquid.mu, m.gas.mu, h_phi, h_s,
                );
                rhocp[(i, j)] = materials::effective_property_three_phase(
                    m.solid.rho * m.solid.cp,
                    m.liquid.rho * m.liquid.cp,
                    m.gas.rho * m.gas.cp,
                    h_phi,
                    h_s,
                );
                k[(i, j)] = materials::effective_property_three_phase(
                    m.solid.k, m.liquid.k, m.gas.k, h_phi, h_s,
                );
                // Darcy damping acts on the dense solid only
                darcy[(i, j)] = h_phi
                    * flow::darcy_coefficient_abs(f_s[(i, j)], sol.darcy_c, sol.darcy_b);
            }
        }
        for f in [&mut rho, &mut mu, &mut rhocp, &mut k, &mut darcy] {
            apply_scalar_bc(f, g, ScalarKind::Generic, None);
        }
        (rho, mu, rhocp, k, darcy)
    }

    pub fn total_mass(&self) -> f64 {
        let f_s = self.solid_fraction_field(&self.temperature);
        let (rho, ..) = self.property_fields(&f_s);
        rho.sum_interior() * self.grid.cell_volume()
    }

    /// Expected mass from the initial mass and the evaporative loss integral.
    pub fn expected_mass(&self) -> f64 {
        let m = &self.cfg.materials;
        self.m0 - (m.liquid.rho - m.gas.rho) / m.liquid.rho * self.evaporated_integral
    }

    /// Phase volumes (solid, liquid, gas).
    pub fn phase_volumes(&self) -> (f64, f64, f64) {
        let s = &self.cfg.materials.solidification;
        let vol = self.grid.cell_volume();
        let (mut vs, mut vl, mut vg) = (0.0, 0.0, 0.0);
        for j in 1..=self.grid.ny {
            for i in 1..=self.grid.nx {
                let h_phi = self.geom.heaviside[(i, j)];
                let f_s = materials::solid_fraction(
                    self.temperature[(i, j)],
                    s.t_solidus,
                    s.t_liquidus,
                );
                let h_s = materials::heaviside_sl(f_s);
                let (a_s, a_l, a_g) = materials::phase_fractions(h_phi, h_s);
                vs += a_s * vol;
                vl += a_l * vol;
                vg += a_g * vol;
            }
        }
        (vs, vl, vg)
    }

    /// Max velocity magnitude over gas cells (H < 0.1).
    pub fn max_gas_speed(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 1..=self.grid.ny {
            for i in 1..=self.grid.nx {
                if self.geom.heaviside[(i, j)] < 0.1 {
                    let s = (self.velocity.x[(i, j)].powi(2) + self.velocity.y[(i, j)].powi(2))
                        .sqrt();
                    m = m.max(s);
                }
            }
        }
        m
    }

    fn trace_push(&mut self, msg: String) {
        if self.cfg.output.trace_steps {
            self.trace.push(msg);
        }
    }

    /// Time-step controller: base dt bounded by the advective CFL (flow and
    /// transport velocities), the capillary limit and the source cap.
    fn controlled_dt(&self, u_gamma_max: f64) -> f64 {
        let f = &self.cfg.flow;
        let mut dt = f.dt;
        if f.auto_step {
            let m = &self.cfg.materials;
            let vmax = self
                .velocity
                .max_norm_interior()
                .max(u_gamma_max)
                .max(1e-30);
            dt = dt.min(f.cfl_safety * 0.5 * self.grid.h / vmax);
            let st_on = m.surface_tension.alpha0 > 0.0;
            if st_on {
                dt = dt.min(flow::capillary_timestep(
                    m.liquid.rho,
                    m.gas.rho,
                    m.surface_tension.alpha0,
                    self.grid.h,
                    f.cfl_safety,
                ));
            }
            dt = dt.min(f.source_dt_cap);
        }
        dt.min((f.t_end - self.time).max(1e-300))
    }

    /// Advance one step; returns the per-step report.
    pub fn step(&mut self) -> Result<StepInfo> {
        let n = self.step_index;
        let grid = self.grid.clone();
        let mats = self.cfg.materials.clone();

        // -- step 1: predictors of the primary variables ---------------------
        self.trace_push(format!("step {n}: predictors"));
        let first = self.step_index == 0;
        let mut t_hat = self.temperature.clone();
        let mut u_hat = self.velocity.clone();
        if !first {
            for j in 1..=grid.ny {
                for i in 1..=grid.nx {
                    t_hat[(i, j)] = 2.0 * self.temperature[(i, j)] - self.prev_temperature[(i, j)];
                    u_hat.x[(i, j)] = 2.0 * self.velocity.x[(i, j)] - self.prev_velocity.x[(i, j)];
                    u_hat.y[(i, j)] = 2.0 * self.velocity.y[(i, j)] - self.prev_velocity.y[(i, j)];
                }
            }
            apply_scalar_bc(&mut t_hat, &grid, ScalarKind::Temperature, None);
            apply_velocity_bc(&mut u_hat.x, &mut u_hat.y, &grid);
        }
        self.prev_temperature = self.temperature.clone();
        self.prev_velocity = self.velocity.clone();

        // -- step 2: level-set and geometric quantities -----------------------
        self.trace_push(format!("step {n}: levelset"));
        let f_s_now = self.solid_fraction_field(&self.temperature);
        let (rho_now, ..) = self.property_fields(&f_s_now);
        let mdot_hat = self.mdot_field(&t_hat);
        let inputs = TransportInputs {
            u: &u_hat,
            mdot: &mdot_hat,
            rho_eff: &rho_now,
            geom: &self.geom,
            projections: self.projections.as_ref(),
            rho_l: mats.liquid.rho,
            rho_g: mats.gas.rho,
        };
        let u_gamma = transport_velocity(&self.cfg.transport, &inputs, &grid);
        let u_gamma_max = u_gamma.max_norm_interior();
        self.last_u_gamma_max = u_gamma_max;
        let dt = self.controlled_dt(u_gamma_max);

        levelset::advect_levelset(&mut self.phi, &u_gamma, &grid, dt)?;
        let report = levelset::reinitialize(&mut self.phi, &self.geom.normal, &grid, &self.cfg.levelset);
        if !report.converged && report.last_update > 100.0 * self.cfg.levelset.reinit_tolerance {
            self.reinit_warnings += 1;
        }
        self.geom = interface_geometry(&self.phi, &grid, &self.cfg.levelset);
        self.refresh_projections();

        // -- step 3: energy equation ------------------------------------------
        self.trace_push(format!("step {n}: energy"));
        let f_s = self.solid_fraction_field(&self.temperature);
        let (rho_eff, mu_eff, rhocp_eff, k_eff, darcy_abs) = self.property_fields(&f_s);
        let deltas = evaporation::scaled_deltas(&self.geom.heaviside, &grid, &mats)?;
        let mdot_energy = self.mdot_field(&t_hat);
        let mut q_power = ScalarField::zeros(&grid);
        let laser_on = mats.laser.power > 0.0;
        for j in 1..=grid.ny {
            for i in 1..=grid.nx {
                let w = deltas.delta_rhocp_weighted[(i, j)];
                if w == 0.0 {
                    continue;
                }
                let mut q = -mdot_energy[(i, j)] * mats.evaporation.h_v * w;
                if laser_on {
                    let (x, y) = grid.center(i, j);
                    let nvec = [self.geom.normal.x[(i, j)], self.geom.normal.y[(i, j)]];
                    q += flow::laser_intensity(x, y, nvec, &mats.laser) * w;
                }
                q_power[(i, j)] = q;
            }
        }
        flow::heat_step(
            &mut self.temperature,
            &self.velocity,
            &q_power,
            &rhocp_eff,
            &k_eff,
            &grid,
            dt,
            1e-10,
            self.cfg.flow.poisson_max_iter,
        )?;

        // -- step 4: incompressible Navier-Stokes ------------------------------
        self.trace_push(format!("step {n}: flow"));
        let f_s_new = self.solid_fraction_field(&self.temperature);
        let (rho_eff, mu_eff, _rhocp2, _k2, darcy_abs) = {
            let _ = (rho_eff, mu_eff, darcy_abs);
            self.property_fields(&f_s_new)
        };
        let mdot_flow = self.mdot_field(&self.temperature);
        let e_v = evaporation::dilation_rate_field(&mdot_flow, &self.geom.delta, &grid, &mats);
        let t_iface = self.interface_temperature_field(&self.temperature);
        let st_on = mats.surface_tension.alpha0 > 0.0;
        let forces: InterfaceForces = flow::interface_forces(
            &t_iface,
            &mdot_flow,
            &self.geom,
            &deltas,
            &grid,
            &mats,
            self.cfg.evaporation.recoil,
            self.cfg.evaporation.anisimov_coefficient,
            st_on,
        )?;
        let (u_star, _mstats) = flow::momentum_predictor(
            &self.velocity,
            &rho_eff,
            &mu_eff,
            &darcy_abs,
            &forces.marangoni,
            &self.geom,
            &grid,
            dt,
            1e-9,
            self.cfg.flow.poisson_max_iter,
        )?;
        let (u_new, proj_res): (VectorField, ProjectionResult) = flow::pressure_projection(
            &u_star,
            &mut self.pressure,
            &e_v,
            &rho_eff,
            &darcy_abs,
            &forces,
            &deltas.g_rho,
            &self.geom.heaviside,
            mats.gravity,
            &grid,
            dt,
            &self.cfg.flow,
        )?;
        self.velocity = u_new;

        // -- bookkeeping --------------------------------------------------------
        let mut mdot_gamma = 0.0;
        for j in 1..=grid.ny {
            for i in 1..=grid.nx {
                mdot_gamma += mdot_flow[(i, j)] * self.geom.delta[(i, j)];
            }
        }
        mdot_gamma *= grid.cell_volume();
        self.evaporated_integral += dt * mdot_gamma;
        self.time += dt;
        self.step_index += 1;
        if !self.phi.all_finite() || !self.temperature.all_finite() {
            return Err(Error::StepSize(format!(
                "non-finite fields after step {n} (t = {:.6e})",
                self.time
            )));
        }
        Ok(StepInfo {
            dt,
            t: self.time,
            step_index: self.step_index,
            u_gamma_max,
            div_residual: proj_res.max_div_residual,
            div_contract: 10.0 * self.cfg.flow.poisson_tolerance * proj_res.rhs_scale,
            interface_mass_flux: mdot_gamma,
        })
    }

    pub fn finished(&self) -> bool {
        self.time >= self.cfg.flow.t_end * (1.0 - 1e-12)
    }
}

/// Build the initial fields for a configuration.
pub fn initial_state(cfg: &SimulationConfig) -> Result<InitialState> {
    let grid = Grid::new(&cfg.extent_min, &cfg.extent_max, &cfg.grid_cells, cfg.bcs)?;
    let eps = cfg.levelset.epsilon;
    match cfg.scenario {
        ScenarioKind::Custom => {
            let phi = match cfg.initial_phi {
                PhiInit::Uniform(v) => ScalarField::constant(&grid, v.clamp(-1.0, 1.0)),
                PhiInit::Plane { axis, pos, sign } => levelset::init_levelset(
                    &grid,
                    |x, y| sign * (if axis == 0 { x } else { y } - pos),
                    eps,
                ),
                PhiInit::Disk { cx, cy, r } => levelset::init_levelset(
                    &grid,
                    |x, y| r - ((x - cx).powi(2) + (y - cy).powi(2)).sqrt(),
                    eps,
                ),
            };
            Ok(InitialState {
                phi,
                temperature: ScalarField::constant(&grid, cfg.initial_temperature),
                velocity: VectorField::zeros(&grid),
            })
        }
        _ => crate::scenarios::scenario_initial_state(cfg, &grid),
    }
}
