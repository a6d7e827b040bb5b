//! Trajectory planning, tracking control, the mission state machine and
//! tracking metrics.

pub mod control;
pub mod metrics;
pub mod mission;
pub mod trajectory;

pub use control::{track, trim_attitude, ControlInput, ControlOutput, ControllerGains};
pub use metrics::{compute_metrics, RmseAccumulator, TrackingMetrics, TrackingSample};
pub use mission::{
    mission_tick, pre_dock_point, ApproachTrigger, MissionConfig, MissionContext, MissionEvent, MissionOutput,
    MissionPhase, MissionState, TakeoffTrigger, TrackingPlan,
};
pub use trajectory::{
    plan_trapezoid, CircleTrajectory, Path, PathSegment, RefPoint, TrapezoidalProfile, TrapezoidalSegment,
};
