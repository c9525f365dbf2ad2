//! Flat key-value configuration: parsing with exhaustive error reporting,
//! schema validation with nearest-key suggestions, named scenario presets,
//! and canonical serialization (used both by `presets` dumps and the
//! bit-for-bit preset round-trip checks).

use crate::error::{ConfigViolation, Error};
use crate::evaporation::{EvapModel, InterfaceTemperature, RecoilMode};
use crate::flow::FlowConfig;
use crate::grid::{BoundarySpec, BoundaryTag, Side};
use crate::levelset::LevelSetConfig;
use crate::materials::MaterialSet;
use crate::transport::{TransportConfig, TransportVariant};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Custom,
    Stefan1d,
    FilmBoiling2d,
    Laser1d,
    Laser2d,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "custom" => Some(ScenarioKind::Custom),
            "stefan_1d" => Some(ScenarioKind::Stefan1d),
            "film_boiling_2d" => Some(ScenarioKind::FilmBoiling2d),
            "laser_1d" => Some(ScenarioKind::Laser1d),
            "laser_2d" => Some(ScenarioKind::Laser2d),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Custom => "custom",
            ScenarioKind::Stefan1d => "stefan_1d",
            ScenarioKind::FilmBoiling2d => "film_boiling_2d",
            ScenarioKind::Laser1d => "laser_1d",
            ScenarioKind::Laser2d => "laser_2d",
        }
    }
}

/// Initial level-set description for custom scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiInit {
    Uniform(f64),
    /// Plane interface: liquid where `sign * (coord - pos) > 0` along `axis`.
    Plane { axis: usize, pos: f64, sign: f64 },
    /// Liquid disk of radius r centered at (cx, cy).
    Disk { cx: f64, cy: f64, r: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvapSettings {
    pub model: EvapModel,
    pub recoil: RecoilMode,
    pub interface_temperature: InterfaceTemperature,
    pub anisimov_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub stride: usize,
    pub dir: String,
    pub snapshots: bool,
    pub trace_steps: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub scenario: ScenarioKind,
    pub grid_cells: Vec<usize>,
    pub extent_min: Vec<f64>,
    pub extent_max: Vec<f64>,
    pub bcs: [BoundarySpec; 4],
    pub materials: MaterialSet,
    pub levelset: LevelSetConfig,
    pub transport: TransportConfig,
    pub evaporation: EvapSettings,
    pub flow: FlowConfig,
    pub output: OutputConfig,
    pub initial_temperature: f64,
    pub initial_phi: PhiInit,
}

impl SimulationConfig {
    /// Neutral base configuration (custom scenario, quiescent fields).
    pub fn base() -> Self {
        SimulationConfig {
            scenario: ScenarioKind::Custom,
            grid_cells: vec![32],
            extent_min: vec![0.0],
            extent_max: vec![1.0],
            bcs: [BoundarySpec::wall(); 4],
            materials: MaterialSet::ti6al4v(),
            levelset: LevelSetConfig::new(2.0 / 32.0),
            transport: TransportConfig::new(TransportVariant::V2),
            evaporation: EvapSettings {
                model: EvapModel::None,
                recoil: RecoilMode::None,
                interface_temperature: InterfaceTemperature::Extended,
                anisimov_coefficient: 0.54,
            },
            flow: FlowConfig::new(1e-3, 1e-2),
            output: OutputConfig {
                stride: 100,
                dir: "out".into(),
                snapshots: false,
                trace_steps: false,
            },
            initial_temperature: 500.0,
            initial_phi: PhiInit::Uniform(1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.grid_cells.len()
    }

    /// Cross-field validation; returns the full violation list.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        let collect = |r: Result<()>, v: &mut Vec<ConfigViolation>| {
            if let Err(Error::Config(mut list)) = r {
                v.append(&mut list);
            }
        };
        let grid = crate::grid::Grid::new(
            &self.extent_min,
            &self.extent_max,
            &self.grid_cells,
            self.bcs,
        );
        match grid {
            Ok(g) => collect(self.levelset.validate(&g), &mut v),
            Err(e) => collect(Err(e), &mut v),
        }
        collect(self.materials.validate(), &mut v);
        collect(self.flow.validate(), &mut v);
        if !(self.evaporation.anisimov_coefficient > 0.0) {
            v.push(ConfigViolation {
                key: "evaporation.anisimov_coefficient".into(),
                message: "must be positive".into(),
            });
        }
        if self.output.stride == 0 {
            v.push(ConfigViolation {
                key: "output.stride".into(),
                message: "must be at least 1".into(),
            });
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// Canonical serialization as sorted `key = value` lines.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let f = |v: f64| format!("{v:?}");
        let fl = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut kv: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, val: String| kv.push((k.to_string(), val));
        push("scenario", self.scenario.name().into());
        push(
            "grid.cells",
            self.grid_cells
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        push("grid.extent_min", fl(&self.extent_min));
        push("grid.extent_max", fl(&self.extent_max));
        for (side, name) in [
            (Side::XMin, "x_min"),
            (Side::XMax, "x_max"),
            (Side::YMin, "y_min"),
            (Side::YMax, "y_max"),
        ] {
            if side as usize >= 2 && self.dim() == 1 {
                continue;
            }
            let b = &self.bcs[side as usize];
            let tag = match b.tag {
                BoundaryTag::Wall => "wall",
                BoundaryTag::Symmetry => "symmetry",
                BoundaryTag::Outlet => "outlet",
                BoundaryTag::FixedValue => "fixed",
            };
            push(&format!("grid.bc.{name}"), tag.into());
            if let Some(t) = b.temperature {
                push(&format!("grid.bc.{name}.temperature"), f(t));
            }
            if b.phi_inflow_clamp {
                push(&format!("grid.bc.{name}.phi_clamp"), "true".into());
            }
            if let Some(w) = b.velocity {
                push(&format!("grid.bc.{name}.velocity"), fl(&w));
            }
        }
        let m = &self.materials;
        for (name, ph) in [("solid", &m.solid), ("liquid", &m.liquid), ("gas", &m.gas)] {
            push(&format!("materials.{name}.rho"), f(ph.rho));
            push(&format!("materials.{name}.mu"), f(ph.mu));
            push(&format!("materials.{name}.cp"), f(ph.cp));
            push(&format!("materials.{name}.k"), f(ph.k));
        }
        push("materials.surface_tension.alpha0", f(m.surface_tension.alpha0));
        push(
            "materials.surface_tension.dalpha_dt",
            f(m.surface_tension.dalpha_dt),
        );
        push("materials.surface_tension.t_ref", f(m.surface_tension.t_ref));
        push(
            "materials.surface_tension.alpha_res",
            f(m.surface_tension.alpha_res),
        );
        push("materials.evaporation.t_v", f(m.evaporation.t_v));
        push("materials.evaporation.h_v", f(m.evaporation.h_v));
        push(
            "materials.evaporation.molar_mass",
            f(m.evaporation.molar_mass),
        );
        push(
            "materials.evaporation.accommodation",
            f(m.evaporation.accommodation),
        );
        push(
            "materials.evaporation.p_ambient",
            f(m.evaporation.p_ambient),
        );
        push(
            "materials.solidification.t_solidus",
            f(m.solidification.t_solidus),
        );
        push(
            "materials.solidification.t_liquidus",
            f(m.solidification.t_liquidus),
        );
        push("materials.solidification.darcy_c", f(m.solidification.darcy_c));
        push("materials.solidification.darcy_b", f(m.solidification.darcy_b));
        push("materials.laser.power", f(m.laser.power));
        push("materials.laser.absorptivity", f(m.laser.absorptivity));
        push("materials.laser.radius", f(m.laser.radius));
        push("materials.laser.focus", fl(&m.laser.focus));
        push("materials.laser.direction", fl(&m.laser.direction));
        push("materials.gravity", fl(&m.gravity));
        push("levelset.epsilon", f(self.levelset.epsilon));
        push(
            "levelset.reinit_pseudo_steps",
            self.levelset.reinit_pseudo_steps.to_string(),
        );
        push(
            "levelset.reinit_tolerance",
            f(self.levelset.reinit_tolerance),
        );
        push(
            "levelset.filter_passes",
            self.levelset.filter_passes.to_string(),
        );
        push(
            "levelset.projection_max_iter",
            self.levelset.projection_max_iter.to_string(),
        );
        push(
            "levelset.projection_tolerance",
            f(self.levelset.projection_tolerance),
        );
        push(
            "levelset.transport_variant",
            self.transport.variant.name().into(),
        );
        push("levelset.curvature_floor", f(self.transport.curvature_floor));
        push(
            "evaporation.model",
            match self.evaporation.model {
                EvapModel::None => "none",
                EvapModel::Tanasawa => "tanasawa",
                EvapModel::Knight => "knight",
            }
            .into(),
        );
        push(
            "evaporation.recoil",
            match self.evaporation.recoil {
                RecoilMode::None => "none",
                RecoilMode::DilationOnly => "dilation-only",
                RecoilMode::Hybrid => "hybrid",
            }
            .into(),
        );
        push(
            "evaporation.interface_temperature",
            match self.evaporation.interface_temperature {
                InterfaceTemperature::Local => "local",
                InterfaceTemperature::Extended => "extended",
            }
            .into(),
        );
        push(
            "evaporation.anisimov_coefficient",
            f(self.evaporation.anisimov_coefficient),
        );
        push("flow.dt", f(self.flow.dt));
        push("flow.t_end", f(self.flow.t_end));
        push("flow.auto_step", self.flow.auto_step.to_string());
        push("flow.poisson_tolerance", f(self.flow.poisson_tolerance));
        push(
            "flow.poisson_max_iter",
            self.flow.poisson_max_iter.to_string(),
        );
        push("flow.cfl_safety", f(self.flow.cfl_safety));
        push("flow.source_dt_cap", f(self.flow.source_dt_cap));
        push("output.stride", self.output.stride.to_string());
        push("output.dir", self.output.dir.clone());
        push("output.snapshots", self.output.snapshots.to_string());
        push("output.trace_steps", self.output.trace_steps.to_string());
        push("initial.temperature", f(self.initial_temperature));
        let phi = match self.initial_phi {
            PhiInit::Uniform(v) => format!("uniform,{v:?}"),
            PhiInit::Plane { axis, pos, sign } => {
                format!("plane,{},{pos:?},{sign:?}", if axis == 0 { "x" } else { "y" })
            }
            PhiInit::Disk { cx, cy, r } => format!("disk,{cx:?},{cy:?},{r:?}"),
        };
        push("initial.phi", phi);
        kv.sort();
        kv
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.to_kv() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Key application
// ---------------------------------------------------------------------------

const SIDE_NAMES: [(&str, Side); 4] = [
    ("x_min", Side::XMin),
    ("x_max", Side::XMax),
    ("y_min", Side::YMin),
    ("y_max", Side::YMax),
];

/// The full schema key list (for unknown-key suggestions).
pub fn schema_keys() -> Vec<String> {
    let mut keys: Vec<String> = vec![
        "scenario",
        "grid.cells",
        "grid.extent_min",
        "grid.extent_max",
        "materials.preset",
        "materials.surface_tension.alpha0",
        "materials.surface_tension.dalpha_dt",
        "materials.surface_tension.t_ref",
        "materials.surface_tension.alpha_res",
        "materials.evaporation.t_v",
        "materials.evaporation.h_v",
        "materials.evaporation.molar_mass",
        "materials.evaporation.accommodation",
        "materials.evaporation.p_ambient",
        "materials.solidification.t_solidus",
        "materials.solidification.t_liquidus",
        "materials.solidification.darcy_c",
        "materials.solidification.darcy_b",
        "materials.laser.power",
        "materials.laser.absorptivity",
        "materials.laser.radius",
        "materials.laser.focus",
        "materials.laser.direction",
        "materials.gravity",
        "levelset.epsilon",
        "levelset.reinit_pseudo_steps",
        "levelset.reinit_tolerance",
        "levelset.filter_passes",
        "levelset.projection_max_iter",
        "levelset.projection_tolerance",
        "levelset.transport_variant",
        "levelset.curvature_floor",
        "evaporation.model",
        "evaporation.recoil",
        "evaporation.interface_temperature",
        "evaporation.anisimov_coefficient",
        "flow.dt",
        "flow.t_end",
        "flow.auto_step",
        "flow.poisson_tolerance",
        "flow.poisson_max_iter",
        "flow.cfl_safety",
        "flow.source_dt_cap",
        "output.stride",
        "output.dir",
        "output.snapshots",
        "output.trace_steps",
        "initial.temperature",
        "initial.phi",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    for phase in ["solid", "liquid", "gas"] {
        for p in ["rho", "mu", "cp", "k"] {
            keys.push(format!("materials.{phase}.{p}"));
        }
    }
    for (name, _) in SIDE_NAMES {
        keys.push(format!("grid.bc.{name}"));
        keys.push(format!("grid.bc.{name}.temperature"));
        keys.push(format!("grid.bc.{name}.phi_clamp"));
        keys.push(format!("grid.bc.{name}.velocity"));
    }
    keys
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1];
        for (j, cb) in b.iter().enumerate() {
            let cost = if ca == cb { 0 } else { 1 };
            cur.push((prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn nearest_key(key: &str) -> Option<String> {
    schema_keys()
        .into_iter()
        .map(|k| (levenshtein(key, &k), k))
        .min()
        .filter(|(d, _)| *d <= 3)
        .map(|(_, k)| k)
}

fn parse_f64(key: &str, value: &str) -> std::result::Result<f64, ConfigViolation> {
    value.trim().parse::<f64>().map_err(|_| ConfigViolation {
        key: key.into(),
        message: format!("expected a number, got '{value}'"),
    })
}

fn parse_usize(key: &str, value: &str) -> std::result::Result<usize, ConfigViolation> {
    value.trim().parse::<usize>().map_err(|_| ConfigViolation {
        key: key.into(),
        message: format!("expected a non-negative integer, got '{value}'"),
    })
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, ConfigViolation> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigViolation {
            key: key.into(),
            message: format!("expected a boolean, got '{value}'"),
        }),
    }
}

fn parse_f64_list(key: &str, value: &str) -> std::result::Result<Vec<f64>, ConfigViolation> {
    value
        .split(',')
        .map(|s| parse_f64(key, s))
        .collect::<std::result::Result<Vec<_>, _>>()
}

fn parse_pair(key: &str, value: &str) -> std::result::Result<[f64; 2], ConfigViolation> {
    let list = parse_f64_list(key, value)?;
    if list.len() != 2 {
        return Err(ConfigViolation {
            key: key.into(),
            message: format!("expected two comma-separated numbers, got '{value}'"),
        });
    }
    Ok([list[0], list[1]])
}

/// Apply one `key = value` assignment to the configuration.
pub fn apply_key(
    cfg: &mut SimulationConfig,
    key: &str,
    value: &str,
) -> std::result::Result<(), ConfigViolation> {
    let v = value.trim();
    let bad_enum = |key: &str, options: &str| ConfigViolation {
        key: key.into(),
        message: format!("unknown value '{v}'; expected one of {options}"),
    };
    match key {
        "scenario" => match ScenarioKind::parse(v) {
            Some(s) => {
                *cfg = crate::scenarios::preset(s);
                Ok(())
            }
            None => Err(bad_enum(
                key,
                "custom, stefan_1d, film_boiling_2d, laser_1d, laser_2d",
            )),
        },
        "grid.cells" => {
            let cells = v
                .split(',')
                .map(|s| parse_usize(key, s))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if cells.is_empty() || cells.len() > 2 {
                return Err(ConfigViolation {
                    key: key.into(),
                    message: "expected one or two comma-separated counts".into(),
                });
            }
            cfg.grid_cells = cells;
            Ok(())
        }
        "grid.extent_min" => {
            cfg.extent_min = parse_f64_list(key, v)?;
            Ok(())
        }
        "grid.extent_max" => {
            cfg.extent_max = parse_f64_list(key, v)?;
            Ok(())
        }
        "materials.preset" => match v {
            "ti6al4v" => {
                let laser = cfg.materials.laser;
                let gravity = cfg.materials.gravity;
                cfg.materials = MaterialSet::ti6al4v();
                cfg.materials.laser = laser;
                cfg.materials.gravity = gravity;
                Ok(())
            }
            _ => Err(bad_enum(key, "ti6al4v")),
        },
        "materials.gravity" => {
            cfg.materials.gravity = parse_pair(key, v)?;
            Ok(())
        }
        "materials.laser.power" => {
            cfg.materials.laser.power = parse_f64(key, v)?;
            Ok(())
        }
        "materials.laser.absorptivity" => {
            cfg.materials.laser.absorptivity = parse_f64(key, v)?;
            Ok(())
        }
        "materials.laser.radius" => {
            cfg.materials.laser.radius = parse_f64(key, v)?;
            Ok(())
        }
        "materials.laser.focus" => {
            cfg.materials.laser.focus = parse_pair(key, v)?;
            Ok(())
        }
        "materials.laser.direction" => {
            cfg.materials.laser.direction = parse_pair(key, v)?;
            Ok(())
        }
        "materials.surface_tension.alpha0" => {
            cfg.materials.surface_tension.alpha0 = parse_f64(key, v)?;
            Ok(())
        }
        "materials.surface_tension.dalpha_dt" => {
            cfg.materials.surface_tension.dalpha_dt = parse_f64(key, v)?;
            Ok(())
        }
        "materials.surface_tension.t_ref" => {
            cfg.materials.surface_tension.t_ref = parse_f64(key, v)?;
            Ok(())
        }
        "materials.surface_tension.alpha_res" => {
            cfg.materials.surface_tension.alpha_res = parse_f64(key, v)?;
            Ok(())
        }
        "materials.evaporation.t_v" => {
            cfg.materials.evaporation.t_v = parse_f64(key, v)?;
            Ok(())
        }
        "materials.evaporation.h_v" => {
            cfg.materials.evaporation.h_v = parse_f64(key, v)?;
            Ok(())
        }
        "materials.evaporation.molar_mass" => {
            cfg.materials.evaporation.molar_mass = parse_f64(key, v)?;
            Ok(())
        }
        "materials.evaporation.accommodation" => {
            cfg.materials.evaporation.accommodation = parse_f64(key, v)?;
            Ok(())
        }
        "materials.evaporation.p_ambient" => {
            cfg.materials.evaporation.p_ambient = parse_f64(key, v)?;
            Ok(())
        }
        "materials.solidification.t_solidus" => {
            cfg.materials.solidification.t_solidus = parse_f64(key, v)?;
            Ok(())
        }
        "materials.solidification.t_liquidus" => {
            cfg.materials.solidification.t_liquidus = parse_f64(key, v)?;
            Ok(())
        }
        "materials.solidification.darcy_c" => {
            cfg.materials.solidification.darcy_c = parse_f64(key, v)?;
            Ok(())
        }
        "materials.solidification.darcy_b" => {
            cfg.materials.solidification.darcy_b = parse_f64(key, v)?;
            Ok(())
        }
        "levelset.epsilon" => {
            cfg.levelset.epsilon = parse_f64(key, v)?;
            Ok(())
        }
        "levelset.reinit_pseudo_steps" => {
            cfg.levelset.reinit_pseudo_steps = parse_usize(key, v)?;
            Ok(())
        }
        "levelset.reinit_tolerance" => {
            cfg.levelset.reinit_tolerance = parse_f64(key, v)?;
            Ok(())
        }
        "levelset.filter_passes" => {
            cfg.levelset.filter_passes = parse_usize(key, v)?;
            Ok(())
        }
        "levelset.projection_max_iter" => {
            cfg.levelset.projection_max_iter = parse_usize(key, v)?;
            Ok(())
        }
        "levelset.projection_tolerance" => {
            cfg.levelset.projection_tolerance = parse_f64(key, v)?;
            Ok(())
        }
        "levelset.transport_variant" => match TransportVariant::parse(v) {
            Some(t) => {
                cfg.transport.variant = t;
                Ok(())
            }
            None => Err(bad_enum(key, "v1, v2, v2e, v3, v3e")),
        },
        "levelset.curvature_floor" => {
            cfg.transport.curvature_floor = parse_f64(key, v)?;
            Ok(())
        }
        "evaporation.model" => {
            cfg.evaporation.model = match v {
                "none" => EvapModel::None,
                "tanasawa" => EvapModel::Tanasawa,
                "knight" => EvapModel::Knight,
                _ => return Err(bad_enum(key, "none, tanasawa, knight")),
            };
            Ok(())
        }
        "evaporation.recoil" => {
            cfg.evaporation.recoil = match v {
                "none" => RecoilMode::None,
                "dilation-only" => RecoilMode::DilationOnly,
                "hybrid" => RecoilMode::Hybrid,
                _ => return Err(bad_enum(key, "none, dilation-only, hybrid")),
            };
            Ok(())
        }
        "evaporation.interface_temperature" => {
            cfg.evaporation.interface_temperature = match v {
                "local" => InterfaceTemperature::Local,
                "extended" => InterfaceTemperature::Extended,
                _ => return Err(bad_enum(key, "local, extended")),
            };
            Ok(())
        }
        "evaporation.anisimov_coefficient" => {
            cfg.evaporation.anisimov_coefficient = parse_f64(key, v)?;
            Ok(())
        }
        "flow.dt" => {
            cfg.flow.dt = parse_f64(key, v)?;
            Ok(())
        }
        "flow.t_end" => {
            cfg.flow.t_end = parse_f64(key, v)?;
            Ok(())
        }
        "flow.auto_step" => {
            cfg.flow.auto_step = parse_bool(key, v)?;
            Ok(())
        }
        "flow.poisson_tolerance" => {
            cfg.flow.poisson_tolerance = parse_f64(key, v)?;
            Ok(())
        }
        "flow.poisson_max_iter" => {
            cfg.flow.poisson_max_iter = parse_usize(key, v)?;
            Ok(())
        }
        "flow.cfl_safety" => {
            cfg.flow.cfl_safety = parse_f64(key, v)?;
            Ok(())
        }
        "flow.source_dt_cap" => {
            cfg.flow.source_dt_cap = if v == "inf" {
                f64::INFINITY
            } else {
                parse_f64(key, v)?
            };
            Ok(())
        }
        "output.stride" => {
            cfg.output.stride = parse_usize(key, v)?;
            Ok(())
        }
        "output.dir" => {
            cfg.output.dir = v.to_string();
            Ok(())
        }
        "output.snapshots" => {
            cfg.output.snapshots = parse_bool(key, v)?;
            Ok(())
        }
        "output.trace_steps" => {
            cfg.output.trace_steps = parse_bool(key, v)?;
            Ok(())
        }
        "initial.temperature" => {
            cfg.initial_temperature = parse_f64(key, v)?;
            Ok(())
        }
        "initial.phi" => {
            let parts: Vec<&str> = v.split(',').map(|s| s.trim()).collect();
            cfg.initial_phi = match parts.as_slice() {
                ["uniform", val] => PhiInit::Uniform(parse_f64(key, val)?),
                ["plane", axis, pos, sign] => PhiInit::Plane {
                    axis: match *axis {
                        "x" => 0,
                        "y" => 1,
                        _ => {
                            return Err(ConfigViolation {
                                key: key.into(),
                                message: "plane axis must be x or y".into(),
                            })
                        }
                    },
                    pos: parse_f64(key, pos)?,
                    sign: parse_f64(key, sign)?,
                },
                ["disk", cx, cy, r] => PhiInit::Disk {
                    cx: parse_f64(key, cx)?,
                    cy: parse_f64(key, cy)?,
                    r: parse_f64(key, r)?,
                },
                _ => {
                    return Err(ConfigViolation {
                        key: key.into(),
                        message: format!(
                            "expected 'uniform,<v>' | 'plane,<x|y>,<pos>,<sign>' | 'disk,<cx>,<cy>,<r>', got '{v}'"
                        ),
                    })
                }
            };
            Ok(())
        }
        _ => {
            // per-phase material properties and boundary specs
            for phase in ["solid", "liquid", "gas"] {
                for prop in ["rho", "mu", "cp", "k"] {
                    if key == format!("materials.{phase}.{prop}") {
                        let val = parse_f64(key, v)?;
                        let ph = match phase {
                            "solid" => &mut cfg.materials.solid,
                            "liquid" => &mut cfg.materials.liquid,
                            _ => &mut cfg.materials.gas,
                        };
                        match prop {
                            "rho" => ph.rho = val,
                            "mu" => ph.mu = val,
                            "cp" => ph.cp = val,
                            _ => ph.k = val,
                        }
                        return Ok(());
                    }
                }
            }
            for (name, side) in SIDE_NAMES {
                if key == format!("grid.bc.{name}") {
                    let spec = &mut cfg.bcs[side as usize];
                    spec.tag = match v {
                        "wall" => BoundaryTag::Wall,
                        "symmetry" => BoundaryTag::Symmetry,
                        "outlet" => BoundaryTag::Outlet,
                        "fixed" => BoundaryTag::FixedValue,
                        _ => return Err(bad_enum(key, "wall, symmetry, outlet, fixed")),
                    };
                    return Ok(());
                }
                if key == format!("grid.bc.{name}.temperature") {
                    cfg.bcs[side as usize].temperature = Some(parse_f64(key, v)?);
                    return Ok(());
                }
                if key == format!("grid.bc.{name}.phi_clamp") {
                    cfg.bcs[side as usize].phi_inflow_clamp = parse_bool(key, v)?;
                    return Ok(());
                }
                if key == format!("grid.bc.{name}.velocity") {
                    cfg.bcs[side as usize].velocity = Some(parse_pair(key, v)?);
                    return Ok(());
                }
            }
            let suggestion = nearest_key(key)
                .map(|k| format!("; did you mean '{k}'?"))
                .unwrap_or_default();
            Err(ConfigViolation {
                key: key.into(),
                message: format!("unknown key{suggestion}"),
            })
        }
    }
}

/// Parse a configuration from text: every violation is reported, not just the
/// first; a `scenario` key (anywhere in the file) is applied first so other
/// keys override the preset.
pub fn parse_config_text(text: &str) -> Result<SimulationConfig> {
    let mut violations = Vec::new();
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => entries.push((lineno + 1, k.trim().to_string(), v.trim().to_string())),
            None => violations.push(ConfigViolation {
                key: format!("line {}", lineno + 1),
                message: format!("expected 'key = value', got '{line}'"),
            }),
        }
    }
    let mut cfg = SimulationConfig::base();
    // scenario first
    for (_, k, v) in entries.iter().filter(|(_, k, _)| k == "scenario") {
        if let Err(e) = apply_key(&mut cfg, k, v) {
            violations.push(e);
        }
    }
    for (_, k, v) in entries.iter().filter(|(_, k, _)| k != "scenario") {
        if let Err(e) = apply_key(&mut cfg, k, v) {
            violations.push(e);
        }
    }
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    match cfg.validate() {
        Ok(()) => Ok(cfg),
        Err(e) => Err(e),
    }
}

/// Parse a configuration file.
pub fn parse_config(path: &std::path::Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_config_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_reference_expands() {
        let cfg = parse_config_text("scenario = stefan_1d\n").unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::Stefan1d);
        assert_eq!(cfg.grid_cells, vec![1000]);
        assert_eq!(cfg.materials.evaporation.t_v, 373.15);
        assert_eq!(cfg.materials.evaporation.accommodation, 5e-3);
        assert_eq!(cfg.flow.dt, 5e-5);
        assert_eq!(cfg.flow.t_end, 0.35);
    }

    #[test]
    fn negative_viscosity_rejected_with_key_path() {
        let err = parse_config_text(
            "scenario = stefan_1d\nmaterials.liquid.mu = -1.0\n",
        )
        .unwrap_err();
        match err {
            Error::Config(v) => {
                assert!(v.iter().any(|c| c.key == "materials.liquid.mu"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let err = parse_config_text("evaporation.modle = tanasawa\n").unwrap_err();
        match err {
            Error::Config(v) => {
                assert_eq!(v.len(), 1);
                assert!(v[0].message.contains("evaporation.model"), "{}", v[0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn all_violations_reported() {
        let err = parse_config_text(
            "scenario = stefan_1d\nmaterials.liquid.mu = -1\nflow.cfl_safety = 7\nbroken line\n",
        )
        .unwrap_err();
        match err {
            Error::Config(v) => assert!(v.len() >= 2, "violations: {v:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overrides_after_scenario_anywhere_in_file() {
        let cfg =
            parse_config_text("grid.cells = 2000\nscenario = stefan_1d\n").unwrap();
        // the scenario preset is applied first even though it appears later
        assert_eq!(cfg.grid_cells, vec![2000]);
    }

    #[test]
    fn serialization_round_trips() {
        for kind in [
            ScenarioKind::Stefan1d,
            ScenarioKind::FilmBoiling2d,
            ScenarioKind::Laser1d,
            ScenarioKind::Laser2d,
        ] {
            let cfg = crate::scenarios::preset(kind);
            let text = cfg.to_text();
            let parsed = parse_config_text(&text).unwrap();
            assert_eq!(parsed, cfg, "round-trip of {kind:?}");
            assert_eq!(parsed.to_text(), text);
        }
    }

    #[test]
    fn levenshtein_behaves() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("abc", "abd"), 1);
        assert_eq!(levenshtein("", "abc"), 3);
    }
}
