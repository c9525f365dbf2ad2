//! Effective thermophysical property blending for two- and three-phase
//! (solid/liquid/gas) states, the temperature-based solid fraction, and the
//! parameter-scaled delta functions that make regularized interface integrals
//! exact under the chosen property interpolations.

use crate::error::Error;
use crate::Result;

pub const R_GAS: f64 = 8.314; // J/(mol K)

/// Per-phase constants (SI).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseProps {
    pub rho: f64,
    pub mu: f64,
    pub cp: f64,
    pub k: f64,
}

/// Surface-tension parameter group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceTension {
    /// Coefficient at the reference temperature [N/m].
    pub alpha0: f64,
    /// Gradient coefficient [N/(m K)].
    pub dalpha_dt: f64,
    /// Reference temperature [K].
    pub t_ref: f64,
    /// Residual coefficient floor [N/m].
    pub alpha_res: f64,
}

impl SurfaceTension {
    pub fn none() -> Self {
        SurfaceTension {
            alpha0: 0.0,
            dalpha_dt: 0.0,
            t_ref: 0.0,
            alpha_res: 0.0,
        }
    }

    /// alpha(T) = max(alpha0 - dalpha*(T - T_ref), alpha_res)
    pub fn coefficient(&self, t: f64) -> f64 {
        (self.alpha0 - self.dalpha_dt * (t - self.t_ref)).max(self.alpha_res)
    }
}

/// Evaporation parameter group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaporation {
    /// Boiling temperature [K].
    pub t_v: f64,
    /// Specific latent heat of evaporation [J/kg].
    pub h_v: f64,
    /// Molar mass [kg/mol].
    pub molar_mass: f64,
    /// Accommodation coefficient (Tanasawa) or sticking coefficient (Knight).
    pub accommodation: f64,
    /// Ambient pressure [Pa].
    pub p_ambient: f64,
}

/// Solidification parameter group (mushy zone + Darcy damping).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solidification {
    pub t_solidus: f64,
    pub t_liquidus: f64,
    /// Mushy-zone morphology constant C [kg/(m^3 s)].
    pub darcy_c: f64,
    /// Division-guard coefficient b.
    pub darcy_b: f64,
}

/// Laser parameter group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Laser {
    /// Power [W].
    pub power: f64,
    /// Absorptivity [-].
    pub absorptivity: f64,
    /// Beam radius [m].
    pub radius: f64,
    /// Focus point.
    pub focus: [f64; 2],
    /// Unit beam direction.
    pub direction: [f64; 2],
}

impl Laser {
    pub fn off() -> Self {
        Laser {
            power: 0.0,
            absorptivity: 0.0,
            radius: 1.0,
            focus: [0.0, 0.0],
            direction: [0.0, -1.0],
        }
    }
}

/// Complete material description used by a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSet {
    pub solid: PhaseProps,
    pub liquid: PhaseProps,
    pub gas: PhaseProps,
    pub surface_tension: SurfaceTension,
    pub evaporation: Evaporation,
    pub solidification: Solidification,
    pub laser: Laser,
    pub gravity: [f64; 2],
}

impl MaterialSet {
    /// Validate the physical invariants of the set; returns all violations.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        let mut pos = |key: &str, val: f64| {
            if !(val > 0.0) {
                v.push(crate::error::ConfigViolation {
                    key: key.to_string(),
                    message: format!("must be positive, got {val}"),
                });
            }
        };
        for (name, p) in [
            ("solid", &self.solid),
            ("liquid", &self.liquid),
            ("gas", &self.gas),
        ] {
            pos(&format!("materials.{name}.rho"), p.rho);
            pos(&format!("materials.{name}.mu"), p.mu);
            pos(&format!("materials.{name}.cp"), p.cp);
            pos(&format!("materials.{name}.k"), p.k);
        }
        if !(self.solidification.t_solidus < self.solidification.t_liquidus) {
            v.push(crate::error::ConfigViolation {
                key: "materials.solidification".into(),
                message: "requires t_solidus < t_liquidus".into(),
            });
        }
        if !(self.solidification.t_liquidus < self.evaporation.t_v) {
            v.push(crate::error::ConfigViolation {
                key: "materials.evaporation.t_v".into(),
                message: "requires t_liquidus < t_v".into(),
            });
        }
        if !(self.evaporation.accommodation > 0.0 && self.evaporation.accommodation <= 1.0) {
            v.push(crate::error::ConfigViolation {
                key: "materials.evaporation.accommodation".into(),
                message: "must lie in (0, 1]".into(),
            });
        }
        if !(self.solidification.darcy_b > 0.0) {
            v.push(crate::error::ConfigViolation {
                key: "materials.solidification.darcy_b".into(),
                message: "must be positive".into(),
            });
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// Built-in Ti-6Al-4V parameter set.
    pub fn ti6al4v() -> Self {
        MaterialSet {
            solid: PhaseProps {
                rho: 4087.0,
                mu: 3.5e-3,
                cp: 1130.0,
                k: 28.63,
            },
            liquid: PhaseProps {
                rho: 4087.0,
                mu: 3.5e-3,
                cp: 1130.0,
                k: 28.63,
            },
            gas: PhaseProps {
                rho: 4.087,
                mu: 3.5e-5,
                cp: 11.3,
                k: 0.02863,
            },
            surface_tension: SurfaceTension {
                alpha0: 1.493,
                dalpha_dt: 5.5e-4,
                t_ref: 1928.0,
                alpha_res: 0.01,
            },
            evaporation: Evaporation {
                t_v: 3133.0,
                h_v: 8.84e6,
                molar_mass: 4.78e-2,
                accommodation: 1.0,
                p_ambient: 101_325.0,
            },
            solidification: Solidification {
                t_solidus: 1933.0,
                t_liquidus: 2200.0,
                darcy_c: 1e12,
                darcy_b: 1.0,
            },
            laser: Laser {
                power: 78.0,
                absorptivity: 0.35,
                radius: 70e-6,
                focus: [0.0, 0.0],
                direction: [0.0, -1.0],
            },
            gravity: [0.0, -9.81],
        }
    }
}

// ---------------------------------------------------------------------------
// Pointwise blending functions
// ---------------------------------------------------------------------------

/// Arithmetic phase-fraction weighted average.
#[inline]
pub fn blend_arithmetic(a_l: f64, a_g: f64, h_phi: f64) -> f64 {
    h_phi * a_l + (1.0 - h_phi) * a_g
}

/// Reciprocal density interpolation: 1/rho = H/rho_l + (1-H)/rho_g.
#[inline]
pub fn blend_density_reciprocal(rho_l: f64, rho_g: f64, h_phi: f64) -> f64 {
    1.0 / (h_phi / rho_l + (1.0 - h_phi) / rho_g)
}

/// Solid fraction from temperature: 1 below solidus, linear in the mushy zone.
#[inline]
pub fn solid_fraction(t: f64, t_s: f64, t_l: f64) -> f64 {
    if t < t_s {
        1.0
    } else if t > t_l {
        0.0
    } else {
        (t_l - t) / (t_l - t_s)
    }
}

/// Smooth Heaviside-like function of the solid fraction with zero slope at 0 and 1.
#[inline]
pub fn heaviside_sl(f_s: f64) -> f64 {
    f_s * f_s * (3.0 - 2.0 * f_s)
}

/// Volume fractions (alpha_s, alpha_l, alpha_g); sums to one exactly.
#[inline]
pub fn phase_fractions(h_phi: f64, h_s: f64) -> (f64, f64, f64) {
    let a_s = h_phi * h_s;
    let a_l = h_phi * (1.0 - h_s);
    (a_s, a_l, 1.0 - a_s - a_l)
}

/// Arithmetic three-phase blend of an arbitrary property.
#[inline]
pub fn effective_property_three_phase(a_s: f64, a_l: f64, a_g: f64, h_phi: f64, h_s: f64) -> f64 {
    let dense = h_s * a_s + (1.0 - h_s) * a_l;
    blend_arithmetic(dense, a_g, h_phi)
}

/// Reciprocal three-phase density: dense arithmetic blend, then reciprocal to gas.
#[inline]
pub fn effective_density_three_phase(
    rho_s: f64,
    rho_l: f64,
    rho_g: f64,
    h_phi: f64,
    h_s: f64,
) -> f64 {
    let dense = h_s * rho_s + (1.0 - h_s) * rho_l;
    blend_density_reciprocal(dense, rho_g, h_phi)
}

/// Scaling constant of the density-consistent delta.
///
/// `c_rho = (rho_g - rho_l) / (rho_l rho_g ln(rho_g/rho_l))`, continuously
/// extended to its limit `1/rho` at equal densities. The constant makes
/// `integral(delta rho_eff c_rho) = 1` across a resolved interface under the
/// reciprocal density interpolation.
pub fn c_rho(rho_l: f64, rho_g: f64) -> Result<f64> {
    if !(rho_l > 0.0 && rho_g > 0.0) {
        return Err(Error::config(
            "materials.rho",
            "densities must be positive for the scaled delta",
        ));
    }
    let ratio = rho_g / rho_l;
    if (ratio - 1.0).abs() < 1e-12 {
        Ok(1.0 / rho_l)
    } else {
        Ok((rho_g - rho_l) / (rho_l * rho_g * ratio.ln()))
    }
}

/// Scaling constant of the heat-capacity-consistent delta:
/// `c = 3 / (b^2 + a b + a^2)` with a = (rho cp)_l, b = (rho cp)_g.
#[inline]
pub fn c_rhocp(rhocp_l: f64, rhocp_g: f64) -> f64 {
    3.0 / (rhocp_g * rhocp_g + rhocp_l * rhocp_g + rhocp_l * rhocp_l)
}

/// Primitive of the density-consistent delta along the Heaviside variable,
/// `G(H) = c_rho * integral_0^H rho(H') dH'`, rising from 0 (gas) to 1
/// (liquid). Its gradient magnitude is `delta_rho = delta rho_eff c_rho`
/// exactly, so discrete band integrals of `|grad G|` telescope to one at any
/// resolution.
pub fn delta_rho_potential(h_phi: f64, rho_l: f64, rho_g: f64) -> f64 {
    let a = 1.0 / rho_l;
    let b = 1.0 / rho_g;
    if ((rho_g - rho_l) / rho_l).abs() < 1e-12 {
        return h_phi;
    }
    let c = (rho_g - rho_l) / (rho_l * rho_g * (rho_g / rho_l).ln());
    c * ((b + (a - b) * h_phi) / b).ln() / (a - b)
}

/// Primitive of the heat-capacity-consistent, rho-cp-weighted delta:
/// `W(H) = c_rhocp * integral_0^H (rho cp)(H')^2 dH'` from 0 to 1; its
/// gradient magnitude equals `delta_rhocp * (rho cp)_eff`.
pub fn delta_rhocp_potential(h_phi: f64, rhocp_l: f64, rhocp_g: f64) -> f64 {
    if ((rhocp_l - rhocp_g) / rhocp_l).abs() < 1e-12 {
        return h_phi;
    }
    let c = c_rhocp(rhocp_l, rhocp_g);
    let v = rhocp_g + (rhocp_l - rhocp_g) * h_phi;
    c * (v.powi(3) - rhocp_g.powi(3)) / (3.0 * (rhocp_l - rhocp_g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_blend_endpoints_and_midpoint() {
        assert_eq!(blend_arithmetic(3.5e-3, 3.5e-5, 1.0), 3.5e-3);
        assert_eq!(blend_arithmetic(3.5e-3, 3.5e-5, 0.0), 3.5e-5);
        assert!((blend_arithmetic(3.5e-3, 3.5e-5, 0.5) - 1.7675e-3).abs() < 1e-18);
        assert!((blend_arithmetic(1.0, 1e-2, 0.5) - 0.505).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_blend() {
        assert_eq!(blend_density_reciprocal(1000.0, 1.0, 1.0), 1000.0);
        let mid = blend_density_reciprocal(1000.0, 1.0, 0.5);
        assert!((mid - 1.0 / (0.0005 + 0.5)).abs() < 1e-12);
        assert!((mid - 1.9980).abs() < 1e-4);
        for h in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert!((blend_density_reciprocal(1.0, 1.0, h) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn solid_fraction_examples() {
        assert_eq!(solid_fraction(1933.0, 1933.0, 2200.0), 1.0);
        assert_eq!(solid_fraction(2200.0, 1933.0, 2200.0), 0.0);
        assert_eq!(solid_fraction(2066.5, 1933.0, 2200.0), 0.5);
        let f = solid_fraction(2000.0, 1933.0, 2200.0);
        assert!((f - (2200.0 - 2000.0) / 267.0).abs() < 1e-12);
        assert!((f - 0.749).abs() < 1e-3);
    }

    #[test]
    fn heaviside_sl_examples() {
        assert_eq!(heaviside_sl(0.0), 0.0);
        assert_eq!(heaviside_sl(1.0), 1.0);
        assert_eq!(heaviside_sl(0.5), 0.5);
        assert!((heaviside_sl(0.25) - 0.15625).abs() < 1e-15);
    }

    #[test]
    fn heaviside_sl_flat_at_endpoints() {
        // finite-difference slope tends to zero at f_s in {0, 1}
        for step in [1e-3, 1e-4, 1e-5] {
            let s0 = (heaviside_sl(step) - heaviside_sl(0.0)) / step;
            let s1 = (heaviside_sl(1.0) - heaviside_sl(1.0 - step)) / step;
            assert!(s0.abs() < 4.0 * step, "s0={s0}");
            assert!(s1.abs() < 4.0 * step, "s1={s1}");
        }
    }

    #[test]
    fn phase_fraction_examples() {
        assert_eq!(phase_fractions(0.0, 0.7), (0.0, 0.0, 1.0));
        let (s, l, g) = phase_fractions(1.0, 0.3);
        assert!((s - 0.3).abs() < 1e-15 && (l - 0.7).abs() < 1e-15 && g.abs() < 1e-15);
        // partition of unity over a sweep
        for hp in 0..=10 {
            for hs in 0..=10 {
                let (s, l, g) = phase_fractions(hp as f64 / 10.0, hs as f64 / 10.0);
                assert!((s + l + g - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn three_phase_blends() {
        // cold dense = solid property
        assert_eq!(effective_property_three_phase(10.0, 20.0, 30.0, 1.0, 1.0), 10.0);
        // equal solid/liquid density reduces Eq. 25 to Eq. 10
        for h in [0.0, 0.3, 0.8, 1.0] {
            let a = effective_density_three_phase(4087.0, 4087.0, 4.087, h, 0.42);
            let b = blend_density_reciprocal(4087.0, 4.087, h);
            assert!((a - b).abs() < 1e-12);
        }
        let r = effective_density_three_phase(4087.0, 4087.0, 4.087, 0.5, 1.0);
        let expect = 1.0 / (0.5 / 4087.0 + 0.5 / 4.087);
        assert!((r - expect).abs() < 1e-12, "r={r}");
        assert!((r - 8.1659).abs() < 1e-3, "r={r}");
    }

    #[test]
    fn c_rho_values() {
        let c = c_rho(1000.0, 1.0).unwrap();
        assert!((c - 999.0 / (1000.0 * (1e-3f64).ln().abs())).abs() < 1e-12);
        assert!((c - 0.144621).abs() < 1e-5);
        // equal-density limit 1/rho, continuous against nearby ratios
        let lim = c_rho(2.0, 2.0).unwrap();
        assert!((lim - 0.5).abs() < 1e-14);
        let near = c_rho(2.0, 2.0 * (1.0 + 1e-9)).unwrap();
        assert!((near - 0.5).abs() < 1e-6);
        // the unit-integral design property fixes the limit: with rho_l =
        // rho_g = rho, integral(rho c_rho dH) over H in [0,1] must be 1
        assert!((2.0 * c_rho(2.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn c_rhocp_values() {
        // equal phases
        assert!((c_rhocp(7.0, 7.0) - 1.0 / 49.0).abs() < 1e-15);
        let a = 4087.0 * 1130.0;
        let b = 4.087 * 11.3;
        let c = c_rhocp(a, b);
        assert!((c - 3.0 / (a * a + a * b + b * b)).abs() < 1e-25);
    }

    #[test]
    fn delta_potentials_span_zero_to_one() {
        for (rl, rg) in [(1000.0, 1.0), (4087.0, 4.087), (2.0, 2.0)] {
            assert!((delta_rho_potential(0.0, rl, rg)).abs() < 1e-14);
            assert!((delta_rho_potential(1.0, rl, rg) - 1.0).abs() < 1e-12);
            // monotone
            let mut prev = 0.0;
            for k in 1..=50 {
                let v = delta_rho_potential(k as f64 / 50.0, rl, rg);
                assert!(v >= prev);
                prev = v;
            }
        }
        for (al, ag) in [(4087.0 * 1130.0, 4.087 * 11.3), (7.0, 7.0)] {
            assert!((delta_rhocp_potential(0.0, al, ag)).abs() < 1e-14);
            assert!((delta_rhocp_potential(1.0, al, ag) - 1.0).abs() < 1e-12);
        }
        // derivative of G matches rho(H) c_rho (finite differences)
        let (rl, rg) = (1000.0, 1.0);
        let c = c_rho(rl, rg).unwrap();
        for h in [0.1, 0.5, 0.9] {
            let step = 1e-6;
            let d = (delta_rho_potential(h + step, rl, rg) - delta_rho_potential(h - step, rl, rg))
                / (2.0 * step);
            let expect = blend_density_reciprocal(rl, rg, h) * c;
            assert!((d - expect).abs() < 1e-5 * expect, "H={h}");
        }
    }

    #[test]
    fn surface_tension_coefficient() {
        let st = MaterialSet::ti6al4v().surface_tension;
        assert_eq!(st.coefficient(1928.0), 1.493);
        // decreases with T, floored at the residual
        assert!(st.coefficient(3000.0) < 1.493);
        assert_eq!(st.coefficient(1e6), 0.01);
    }

    #[test]
    fn ti6al4v_preset_is_consistent() {
        let m = MaterialSet::ti6al4v();
        m.validate().unwrap();
        assert_eq!(m.solid.rho, m.liquid.rho);
        assert_eq!(m.evaporation.t_v, 3133.0);
        assert_eq!(m.solidification.darcy_c, 1e12);
    }

    #[test]
    fn validation_reports_all_violations() {
        let mut m = MaterialSet::ti6al4v();
        m.liquid.mu = -1.0;
        m.gas.rho = 0.0;
        match m.validate() {
            Err(Error::Config(v)) => {
                assert_eq!(v.len(), 2);
                assert!(v.iter().any(|x| x.key == "materials.liquid.mu"));
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
