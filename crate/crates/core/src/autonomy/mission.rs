//! Vehicle-side mission state machine.
//!
//! The cycle is TRACKING → APPROACH → DOCK_WAIT → CHARGING → TAKEOFF_DETACH
//! → RESUME → TRACKING. The only other edge is DOCK_WAIT → APPROACH, taken
//! when the head has not docked within the timeout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trajectory::{plan_trapezoid, CircleTrajectory, Path, PathSegment, RefPoint};
use crate::dynamics::HeadMode;
use crate::math::Vec3;
use crate::power::LowBatteryDetector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MissionPhase {
    Tracking,
    Approach,
    DockWait,
    Charging,
    TakeoffDetach,
    Resume,
}

impl MissionPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            MissionPhase::Tracking => "TRACKING",
            MissionPhase::Approach => "APPROACH",
            MissionPhase::DockWait => "DOCK_WAIT",
            MissionPhase::Charging => "CHARGING",
            MissionPhase::TakeoffDetach => "TAKEOFF_DETACH",
            MissionPhase::Resume => "RESUME",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            MissionPhase::Tracking,
            MissionPhase::Approach,
            MissionPhase::DockWait,
            MissionPhase::Charging,
            MissionPhase::TakeoffDetach,
            MissionPhase::Resume,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
    }

    pub fn next_in_cycle(self) -> Self {
        match self {
            MissionPhase::Tracking => MissionPhase::Approach,
            MissionPhase::Approach => MissionPhase::DockWait,
            MissionPhase::DockWait => MissionPhase::Charging,
            MissionPhase::Charging => MissionPhase::TakeoffDetach,
            MissionPhase::TakeoffDetach => MissionPhase::Resume,
            MissionPhase::Resume => MissionPhase::Tracking,
        }
    }

    pub fn is_legal_transition(from: Self, to: Self) -> bool {
        to == from.next_in_cycle() || (from == MissionPhase::DockWait && to == MissionPhase::Approach)
    }
}

/// What the vehicle flies while it has charge to spare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrackingPlan {
    Circle(CircleTrajectory),
    /// Seeded rest-to-rest legs between random points of a box.
    RandomLegs {
        min: Vec3,
        max: Vec3,
        v_max: f64,
        a_max: f64,
    },
    Hover(Vec3),
}

impl TrackingPlan {
    /// Where tracking (re)starts.
    pub fn entry_point(&self) -> Vec3 {
        match self {
            TrackingPlan::Circle(c) => c.start_point(),
            TrackingPlan::RandomLegs { min, max, .. } => (min + max) * 0.5,
            TrackingPlan::Hover(p) => *p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproachTrigger {
    LowBattery,
    /// Leave tracking after a fixed time (scripted dock cycles).
    Timer {
        after_s: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TakeoffTrigger {
    /// Terminal voltage at full with the charge current tapered off.
    ChargeComplete,
    /// Take off after a fixed time on the ground.
    Dwell { seconds: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionConfig {
    pub low_battery_voltage: f64,
    pub low_battery_debounce: f64,
    pub approach_trigger: ApproachTrigger,
    pub takeoff_trigger: TakeoffTrigger,
    pub travel_speed: f64,
    pub travel_accel: f64,
    /// Altitude for transfers between the work area and the station, m.
    pub cruise_altitude: f64,
    /// Height of the hanging head above the connector when docking starts, m.
    pub dock_clearance: f64,
    /// How far below the connector the hanging head is aimed, m; the
    /// resulting slack lets the field pull the head in.
    pub dock_overshoot: f64,
    pub settle_time: f64,
    pub descent_speed: f64,
    pub dock_timeout: f64,
    /// Lateral offset of the re-approach waypoint after a timeout, m.
    pub retry_offset: f64,
    /// Anchor height above the connector before moving sideways to land, m.
    pub landing_height: f64,
    /// Touchdown spot relative to the connector, horizontal, m.
    pub landing_offset: Vec3,
    pub landing_speed: f64,
    pub climb_speed: f64,
    /// Climb commanded on takeoff, m.
    pub takeoff_climb: f64,
    /// Time to confirm a finished charge on the vehicle side, s.
    pub charge_confirm_time: f64,
    /// Heading held throughout, rad.
    pub yaw: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig {
            low_battery_voltage: 6.6,
            low_battery_debounce: 0.5,
            approach_trigger: ApproachTrigger::LowBattery,
            takeoff_trigger: TakeoffTrigger::ChargeComplete,
            travel_speed: 1.0,
            travel_accel: 1.0,
            cruise_altitude: 1.0,
            dock_clearance: 0.05,
            dock_overshoot: 0.03,
            settle_time: 2.0,
            descent_speed: 0.08,
            dock_timeout: 30.0,
            retry_offset: 0.1,
            landing_height: 0.25,
            landing_offset: Vec3::new(-0.3, 0.0, 0.0),
            landing_speed: 0.3,
            climb_speed: 0.5,
            takeoff_climb: 1.0,
            charge_confirm_time: 0.5,
            yaw: 0.0,
        }
    }
}

impl MissionConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("travel_speed", self.travel_speed),
            ("travel_accel", self.travel_accel),
            ("descent_speed", self.descent_speed),
            ("landing_speed", self.landing_speed),
            ("climb_speed", self.climb_speed),
            ("dock_timeout", self.dock_timeout),
            ("low_battery_voltage", self.low_battery_voltage),
        ] {
            if !(v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.low_battery_debounce < 0.0 || self.settle_time < 0.0 || self.charge_confirm_time < 0.0 {
            return Err("debounce and settle times must be non-negative".into());
        }
        Ok(())
    }
}

/// Inputs sampled by the mission at a control iteration.
#[derive(Debug, Clone, Copy)]
pub struct MissionContext {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    /// Ground contact switch.
    pub landed: bool,
    pub head_mode: Option<HeadMode>,
    pub battery_voltage: f64,
    /// A, positive when discharging.
    pub battery_current: f64,
    pub connector: Vec3,
    pub attach_point: Vec3,
    pub tether_length: f64,
    pub full_voltage: f64,
    pub charge_cutoff: f64,
    pub ground_clearance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MissionEvent {
    LowBattery { voltage: f64 },
    DockRetry { attempt: u32 },
    PhaseChange { from: MissionPhase, to: MissionPhase },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionOutput {
    pub reference: RefPoint,
    pub motors_enabled: bool,
    pub events: Vec<MissionEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionState {
    pub phase: MissionPhase,
    pub phase_entry_time: f64,
    pub plan: TrackingPlan,
    path: Path,
    tracking_start: f64,
    circle_ramp: Option<f64>,
    low_battery: LowBatteryDetector,
    pub retries: u32,
    descending: bool,
    touchdown_from: f64,
    on_ground: bool,
    charged_since: Option<f64>,
    last_reference: RefPoint,
}

fn vehicle_for_anchor(anchor: Vec3, attach_point: &Vec3) -> Vec3 {
    anchor - attach_point
}

fn move_seg(from: Vec3, to: Vec3, v: f64, a: f64) -> PathSegment {
    PathSegment::Move(plan_trapezoid(from, to, v, a))
}

impl MissionState {
    /// Starts in flight on the tracking plan.
    pub fn tracking(plan: TrackingPlan, cfg: &MissionConfig, t: f64, start: RefPoint) -> Self {
        MissionState {
            phase: MissionPhase::Tracking,
            phase_entry_time: t,
            path: Path::new(
                t,
                vec![PathSegment::Hold {
                    at: start.position,
                    duration: 0.0,
                }],
            ),
            plan,
            tracking_start: t,
            circle_ramp: None,
            low_battery: LowBatteryDetector::new(cfg.low_battery_voltage, cfg.low_battery_debounce),
            retries: 0,
            descending: false,
            touchdown_from: 0.0,
            on_ground: false,
            charged_since: None,
            last_reference: start,
        }
    }

    /// Starts hovering over the station, waiting for the head to dock.
    pub fn dock_wait(plan: TrackingPlan, cfg: &MissionConfig, ctx: &MissionContext) -> Self {
        let mut st = Self::tracking(plan, cfg, ctx.t, RefPoint::hold(ctx.position));
        st.phase = MissionPhase::DockWait;
        st.path = dock_wait_path(ctx.position, cfg, ctx, ctx.t);
        st
    }

    pub fn reference(&self) -> RefPoint {
        self.last_reference
    }

    fn enter(&mut self, to: MissionPhase, t: f64, events: &mut Vec<MissionEvent>) {
        events.push(MissionEvent::PhaseChange { from: self.phase, to });
        self.phase = to;
        self.phase_entry_time = t;
    }
}

/// Hovering point that puts the hanging head `dock_clearance` above the
/// connector.
pub fn pre_dock_point(cfg: &MissionConfig, ctx: &MissionContext) -> Vec3 {
    let anchor = ctx.connector + Vec3::new(0.0, 0.0, ctx.tether_length + cfg.dock_clearance);
    vehicle_for_anchor(anchor, &ctx.attach_point)
}

fn dock_point(cfg: &MissionConfig, ctx: &MissionContext) -> Vec3 {
    let anchor = ctx.connector + Vec3::new(0.0, 0.0, ctx.tether_length - cfg.dock_overshoot);
    vehicle_for_anchor(anchor, &ctx.attach_point)
}

fn dock_wait_path(from: Vec3, cfg: &MissionConfig, ctx: &MissionContext, t: f64) -> Path {
    Path::new(
        t,
        vec![
            PathSegment::Hold {
                at: from,
                duration: cfg.settle_time,
            },
            move_seg(from, dock_point(cfg, ctx), cfg.descent_speed, 0.5),
        ],
    )
}

fn descent_path(from: Vec3, cfg: &MissionConfig, ctx: &MissionContext, t: f64) -> Path {
    Path::new(t, vec![move_seg(from, dock_point(cfg, ctx), cfg.descent_speed, 0.5)])
}

/// Brake from the current reference, transfer at cruise altitude and drop
/// onto `target` from above.
fn transfer_path(from: &RefPoint, target: Vec3, cfg: &MissionConfig, t: f64) -> Path {
    let brake = PathSegment::Brake {
        from: from.position,
        velocity: from.velocity,
        decel: cfg.travel_accel,
    };
    let stop = brake.end();
    let high = cfg.cruise_altitude.max(target.z);
    let up = Vec3::new(stop.x, stop.y, high.max(stop.z));
    let over = Vec3::new(target.x, target.y, up.z);
    let (v, a) = (cfg.travel_speed, cfg.travel_accel);
    Path::new(
        t,
        vec![
            brake,
            move_seg(stop, up, v, a),
            move_seg(up, over, v, a),
            move_seg(over, target, v, a),
        ],
    )
}

fn next_leg<R: Rng>(from: Vec3, plan: &TrackingPlan, rng: &mut R, t: f64) -> Path {
    match plan {
        TrackingPlan::RandomLegs { min, max, v_max, a_max } => {
            let to = Vec3::new(
                rng.random_range(min.x..=max.x),
                rng.random_range(min.y..=max.y),
                rng.random_range(min.z..=max.z),
            );
            Path::new(t, vec![move_seg(from, to, *v_max, *a_max)])
        }
        _ => Path::new(
            t,
            vec![PathSegment::Hold {
                at: from,
                duration: 0.0,
            }],
        ),
    }
}

fn charge_finished(ctx: &MissionContext) -> bool {
    ctx.battery_current.abs() < ctx.charge_cutoff && ctx.battery_voltage >= ctx.full_voltage - 0.02
}

/// One control iteration of the mission.
pub fn mission_tick<R: Rng>(
    st: &mut MissionState,
    cfg: &MissionConfig,
    ctx: &MissionContext,
    rng: &mut R,
) -> MissionOutput {
    let t = ctx.t;
    let mut events = Vec::new();
    let mut motors = true;
    let head_free = ctx.head_mode.is_none_or(|m| m.is_free());

    match st.phase {
        MissionPhase::Tracking => {
            let leave = match cfg.approach_trigger {
                ApproachTrigger::LowBattery => {
                    let low = st.low_battery.update(ctx.battery_voltage, t);
                    if low {
                        events.push(MissionEvent::LowBattery {
                            voltage: ctx.battery_voltage,
                        });
                    }
                    low
                }
                ApproachTrigger::Timer { after_s } => t - st.phase_entry_time >= after_s,
            };
            if leave {
                st.enter(MissionPhase::Approach, t, &mut events);
                st.path = transfer_path(&st.last_reference, pre_dock_point(cfg, ctx), cfg, t);
            } else if let TrackingPlan::RandomLegs { .. } = st.plan {
                if st.path.finished(t) {
                    let from = st.path.end().unwrap_or(ctx.position);
                    st.path = next_leg(from, &st.plan, rng, t);
                }
            }
        }
        MissionPhase::Approach => {
            if st.path.finished(t) {
                st.enter(MissionPhase::DockWait, t, &mut events);
                st.descending = false;
                st.path = dock_wait_path(pre_dock_point(cfg, ctx), cfg, ctx, t);
            }
        }
        MissionPhase::DockWait => {
            if ctx.head_mode == Some(HeadMode::Docked) {
                st.enter(MissionPhase::Charging, t, &mut events);
                let here = st.last_reference.position;
                let over = Vec3::new(
                    here.x,
                    here.y,
                    ctx.connector.z + cfg.landing_height - ctx.attach_point.z,
                );
                let spot = ctx.connector + cfg.landing_offset;
                let aside = Vec3::new(spot.x, spot.y, over.z);
                let ground = Vec3::new(spot.x, spot.y, ctx.ground_clearance - 0.02);
                let a = cfg.travel_accel;
                let segments = vec![
                    move_seg(here, over, cfg.landing_speed, a),
                    move_seg(over, aside, cfg.landing_speed, a),
                    move_seg(aside, ground, cfg.landing_speed, a),
                ];
                st.touchdown_from = t + segments[..2].iter().map(|s| s.duration()).sum::<f64>();
                st.path = Path::new(t, segments);
                st.on_ground = false;
                st.charged_since = None;
                st.retries = 0;
            } else if t - st.phase_entry_time >= cfg.dock_timeout {
                st.retries += 1;
                events.push(MissionEvent::DockRetry { attempt: st.retries });
                st.enter(MissionPhase::Approach, t, &mut events);
                let target = pre_dock_point(cfg, ctx);
                let angle = st.retries as f64 * std::f64::consts::FRAC_PI_2;
                let aside =
                    target + Vec3::new(angle.cos(), angle.sin(), 0.0) * cfg.retry_offset + Vec3::new(0.0, 0.0, 0.2);
                let from = st.last_reference.position;
                st.path = Path::new(
                    t,
                    vec![
                        move_seg(from, aside, cfg.travel_speed, cfg.travel_accel),
                        move_seg(aside, target, cfg.travel_speed, cfg.travel_accel),
                    ],
                );
            } else if ctx.head_mode == Some(HeadMode::Captured) && !st.descending {
                st.descending = true;
                st.path = descent_path(st.last_reference.position, cfg, ctx, t);
            }
        }
        MissionPhase::Charging => {
            if ctx.landed && t >= st.touchdown_from {
                st.on_ground = true;
            }
            let lost = head_free;
            let go = st.on_ground
                && match cfg.takeoff_trigger {
                    TakeoffTrigger::ChargeComplete => {
                        if charge_finished(ctx) {
                            let since = *st.charged_since.get_or_insert(t);
                            t - since >= cfg.charge_confirm_time
                        } else {
                            st.charged_since = None;
                            false
                        }
                    }
                    TakeoffTrigger::Dwell { seconds } => t - st.phase_entry_time >= seconds,
                };
            if go || lost {
                st.enter(MissionPhase::TakeoffDetach, t, &mut events);
                let from = ctx.position;
                let top = from + Vec3::new(0.0, 0.0, cfg.takeoff_climb);
                st.path = Path::new(t, vec![move_seg(from, top, cfg.climb_speed, 2.0)]);
                st.on_ground = false;
            } else if st.on_ground {
                motors = false;
            }
        }
        MissionPhase::TakeoffDetach => {
            if head_free {
                st.enter(MissionPhase::Resume, t, &mut events);
                let target = st.plan.entry_point();
                let mut path = transfer_path(&st.last_reference, target, cfg, t);
                path.segments.push(PathSegment::Hold {
                    at: target,
                    duration: 1.0,
                });
                st.path = path;
            }
        }
        MissionPhase::Resume => {
            if st.path.finished(t) {
                st.enter(MissionPhase::Tracking, t, &mut events);
                st.tracking_start = t;
                st.circle_ramp = Some(cfg.travel_accel);
                st.low_battery.reset();
                let from = st.plan.entry_point();
                st.path = next_leg(from, &st.plan, rng, t);
            }
        }
    }

    let mut reference = match (st.phase, &st.plan) {
        (MissionPhase::Tracking, TrackingPlan::Circle(c)) => c.sample_ramped(t - st.tracking_start, st.circle_ramp),
        (MissionPhase::Tracking, TrackingPlan::Hover(p)) => RefPoint::hold(*p),
        _ => st.path.sample(t),
    };
    reference.yaw = cfg.yaw;
    st.last_reference = reference;
    MissionOutput {
        reference,
        motors_enabled: motors,
        events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(t: f64) -> MissionContext {
        MissionContext {
            t,
            position: Vec3::new(0.0, 0.0, 1.0),
            velocity: Vec3::zeros(),
            landed: false,
            head_mode: Some(HeadMode::Slack),
            battery_voltage: 7.2,
            battery_current: 8.0,
            connector: Vec3::new(3.0, 0.0, 0.06),
            attach_point: Vec3::new(0.0, 0.0, -0.03),
            tether_length: 0.5,
            full_voltage: 7.4,
            charge_cutoff: 0.0455,
            ground_clearance: 0.05,
        }
    }

    fn circle() -> TrackingPlan {
        TrackingPlan::Circle(CircleTrajectory {
            center: Vec3::zeros(),
            radius: 1.0,
            speed: 2.0,
            altitude: 1.0,
        })
    }

    fn phases(events: &[MissionEvent]) -> Vec<MissionPhase> {
        events
            .iter()
            .filter_map(|e| match e {
                MissionEvent::PhaseChange { to, .. } => Some(*to),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn sustained_low_voltage_starts_approach() {
        let cfg = MissionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let start = circle();
        let r0 = match &start {
            TrackingPlan::Circle(c) => c.sample(0.0),
            _ => unreachable!(),
        };
        let mut st = MissionState::tracking(start, &cfg, 0.0, r0);
        let mut all = Vec::new();
        for i in 0..=1000 {
            let mut c = ctx(i as f64 * 0.002);
            c.battery_voltage = 6.59;
            all.extend(mission_tick(&mut st, &cfg, &c, &mut rng).events);
        }
        assert_eq!(st.phase, MissionPhase::Approach);
        assert!(matches!(all[0], MissionEvent::LowBattery { .. }));
        assert_eq!(phases(&all), vec![MissionPhase::Approach]);
    }

    #[test]
    fn docked_head_starts_charging_with_landing() {
        let cfg = MissionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c0 = ctx(0.0);
        let mut st = MissionState::dock_wait(circle(), &cfg, &c0);
        let mut c = ctx(0.1);
        c.head_mode = Some(HeadMode::Docked);
        let out = mission_tick(&mut st, &cfg, &c, &mut rng);
        assert_eq!(phases(&out.events), vec![MissionPhase::Charging]);
        assert!(out.motors_enabled);
        // the landing path ends on the ground next to the connector
        let end = st.path.end().unwrap();
        assert!(end.z < c.ground_clearance);
        assert!(((end - c.connector).xy() - cfg.landing_offset.xy()).norm() < 1e-12);
    }

    #[test]
    fn charge_complete_leads_back_to_tracking() {
        let cfg = MissionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = MissionState::dock_wait(circle(), &cfg, &ctx(0.0));
        let mut seen = Vec::new();
        let mut t = 0.0;
        let mut step = |st: &mut MissionState, f: &dyn Fn(&mut MissionContext)| {
            t += 0.002;
            let mut c = ctx(t);
            f(&mut c);
            let out = mission_tick(st, &cfg, &c, &mut rng);
            seen.extend(phases(&out.events));
            out
        };
        step(&mut st, &|c| c.head_mode = Some(HeadMode::Docked));
        // landed and charging
        for _ in 0..10_000 {
            step(&mut st, &|c| {
                c.head_mode = Some(HeadMode::Docked);
                c.landed = true;
                c.battery_current = -0.9;
            });
        }
        assert_eq!(st.phase, MissionPhase::Charging);
        let out = step(&mut st, &|c| {
            c.head_mode = Some(HeadMode::Docked);
            c.landed = true;
            c.battery_current = -0.9;
        });
        assert!(!out.motors_enabled);
        for _ in 0..1000 {
            step(&mut st, &|c| {
                c.head_mode = Some(HeadMode::Docked);
                c.landed = true;
                c.battery_current = 0.0;
                c.battery_voltage = 7.4;
            });
        }
        assert_eq!(st.phase, MissionPhase::TakeoffDetach);
        step(&mut st, &|c| c.head_mode = Some(HeadMode::Slack));
        assert_eq!(st.phase, MissionPhase::Resume);
        for _ in 0..20_000 {
            step(&mut st, &|_| {});
        }
        assert_eq!(st.phase, MissionPhase::Tracking);
        assert_eq!(
            seen,
            vec![
                MissionPhase::Charging,
                MissionPhase::TakeoffDetach,
                MissionPhase::Resume,
                MissionPhase::Tracking
            ]
        );
        for w in seen.windows(2) {
            assert!(MissionPhase::is_legal_transition(w[0], w[1]));
        }
    }

    #[test]
    fn dock_timeout_retries() {
        let cfg = MissionConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = MissionState::dock_wait(circle(), &cfg, &ctx(0.0));
        let mut retry = None;
        for i in 1..=20_000 {
            let out = mission_tick(&mut st, &cfg, &ctx(i as f64 * 0.002), &mut rng);
            if let Some(MissionEvent::DockRetry { attempt }) = out.events.first() {
                retry = Some((i, *attempt));
                break;
            }
        }
        let (i, attempt) = retry.unwrap();
        assert_eq!(attempt, 1);
        assert!((i as f64 * 0.002 - 30.0).abs() < 0.003);
        assert_eq!(st.phase, MissionPhase::Approach);
    }

    #[test]
    fn transition_table() {
        use MissionPhase::*;
        assert!(MissionPhase::is_legal_transition(Tracking, Approach));
        assert!(MissionPhase::is_legal_transition(DockWait, Approach));
        assert!(!MissionPhase::is_legal_transition(Approach, Charging));
        assert!(!MissionPhase::is_legal_transition(Tracking, Charging));
        assert_eq!(MissionPhase::parse("TAKEOFF_DETACH"), Some(TakeoffDetach));
    }
}
