//! Scenario configuration: the unit-suffixed TOML format, shipped presets and
//! the resolved SI-unit [`Scenario`] a simulation runs.

mod loader;
mod model;
mod schema;

pub use loader::{load_config, parse_config, preset, preset_source, PRESETS};
pub use model::{Scenario, StartMode};
pub use schema::{
    ApproachKind, BatterySection, ChargerSection, ControllerSection, GroundSection, MagneticsSection, MissionSection,
    PowerSection, ScenarioConfig, StartKind, StationSection, StopCondition, TakeoffKind, TetherSection, TrajectoryKind,
    TrajectorySection, VehicleSection,
};
