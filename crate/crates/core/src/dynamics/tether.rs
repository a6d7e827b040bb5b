use serde::{Deserialize, Serialize};

use crate::magnetics::MagnetSpec;
use crate::math::Vec3;

/// Charging tether: massless unilateral spring-damper cable ending in a point
/// mass (magnet, enclosure, pogo pins and half of the wire).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetherConfig {
    /// Rest length, m.
    pub length: f64,
    /// Wire mass per metre, kg/m.
    pub linear_mass_density: f64,
    /// Lumped head mass, kg. Includes half of the wire mass.
    pub head_mass: f64,
    pub magnet: MagnetSpec,
    /// Cable stiffness in extension, N/m.
    pub stiffness: f64,
    /// Cable damping along its axis, N·s/m.
    pub damping: f64,
    /// Linear aerodynamic drag on the head, N·s/m.
    pub head_drag: f64,
}

impl TetherConfig {
    /// Builds a tether whose head carries the magnet, its enclosure and half
    /// of the wire; the other half of the wire is carried by the vehicle.
    pub fn with_magnet(magnet: MagnetSpec, length: f64, linear_mass_density: f64, enclosure_mass: f64) -> Self {
        let wire = length * linear_mass_density;
        TetherConfig {
            length,
            linear_mass_density,
            head_mass: magnet.mass + enclosure_mass + 0.5 * wire,
            magnet,
            stiffness: 2000.0,
            damping: 5.0,
            head_drag: 0.002,
        }
    }

    pub fn wire_mass(&self) -> f64 {
        self.length * self.linear_mass_density
    }

    /// Share of the wire mass folded into the vehicle.
    pub fn vehicle_side_mass(&self) -> f64 {
        0.5 * self.wire_mass()
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.length > 0.0) {
            return Err(format!("length must be positive, got {}", self.length));
        }
        if self.head_mass < self.magnet.mass {
            return Err(format!(
                "head_mass {} kg is lighter than its magnet ({} kg)",
                self.head_mass, self.magnet.mass
            ));
        }
        if self.stiffness <= 0.0 || self.damping < 0.0 || self.head_drag < 0.0 {
            return Err("cable stiffness must be positive and damping non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HeadMode {
    Slack,
    Taut,
    Captured,
    Docked,
}

impl HeadMode {
    pub fn as_str(self) -> &'static str {
        match self {
            HeadMode::Slack => "SLACK",
            HeadMode::Taut => "TAUT",
            HeadMode::Captured => "CAPTURED",
            HeadMode::Docked => "DOCKED",
        }
    }

    pub fn is_free(self) -> bool {
        matches!(self, HeadMode::Slack | HeadMode::Taut)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetherHeadState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub mode: HeadMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetherForces {
    pub on_vehicle: Vec3,
    pub on_head: Vec3,
    /// Cable tension, N. Never negative.
    pub tension: f64,
}

impl TetherForces {
    pub fn zero() -> Self {
        TetherForces {
            on_vehicle: Vec3::zeros(),
            on_head: Vec3::zeros(),
            tension: 0.0,
        }
    }
}

/// Cable force between the anchor (vehicle attach point) and the head.
///
/// Zero while the anchor-head distance is below the rest length. Beyond it,
/// a spring-damper tension acts along the cable, clipped at zero so the
/// cable never pushes.
pub fn tether_force(
    anchor_position: &Vec3,
    anchor_velocity: &Vec3,
    head: &TetherHeadState,
    cfg: &TetherConfig,
) -> TetherForces {
    let delta = head.position - anchor_position;
    let distance = delta.norm();
    if distance < cfg.length || distance == 0.0 {
        return TetherForces::zero();
    }
    let along = delta / distance;
    let extension = distance - cfg.length;
    let extension_rate = (head.velocity - anchor_velocity).dot(&along);
    let tension = (cfg.stiffness * extension + cfg.damping * extension_rate).max(0.0);
    let on_head = -along * tension;
    TetherForces {
        on_vehicle: -on_head,
        on_head,
        tension,
    }
}

/// SLACK/TAUT label from geometry. Captured and docked heads keep their mode.
pub fn cable_mode(anchor_position: &Vec3, head: &TetherHeadState, cfg: &TetherConfig) -> HeadMode {
    if !head.mode.is_free() {
        return head.mode;
    }
    if (head.position - anchor_position).norm() >= cfg.length {
        HeadMode::Taut
    } else {
        HeadMode::Slack
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::GRAVITY;
    use approx::assert_relative_eq;

    fn cfg() -> TetherConfig {
        TetherConfig::with_magnet(MagnetSpec::cera_l(), 0.5, 0.033, 0.0)
    }

    fn head_at(p: Vec3) -> TetherHeadState {
        TetherHeadState {
            position: p,
            velocity: Vec3::zeros(),
            mode: HeadMode::Slack,
        }
    }

    #[test]
    fn slack_cable_exerts_nothing() {
        let f = tether_force(
            &Vec3::zeros(),
            &Vec3::zeros(),
            &head_at(Vec3::new(0.0, 0.0, -0.3)),
            &cfg(),
        );
        assert_eq!(f, TetherForces::zero());
    }

    #[test]
    fn static_hang_carries_head_weight() {
        let c = cfg();
        let sag = c.head_mass * GRAVITY / c.stiffness;
        let head = head_at(Vec3::new(0.0, 0.0, -(c.length + sag)));
        let f = tether_force(&Vec3::zeros(), &Vec3::zeros(), &head, &c);
        assert_relative_eq!(f.tension, c.head_mass * GRAVITY, epsilon = 1e-12);
        assert_relative_eq!(f.on_head.z, c.head_mass * GRAVITY, epsilon = 1e-12);
        assert!(f.on_vehicle.z < 0.0);
    }

    #[test]
    fn one_millimetre_stretch_gives_two_newtons() {
        let c = cfg();
        let head = head_at(Vec3::new(0.501, 0.0, 0.0));
        let f = tether_force(&Vec3::zeros(), &Vec3::zeros(), &head, &c);
        assert_relative_eq!(f.tension, 2.0, epsilon = 1e-9);
        assert_relative_eq!(f.on_head.x, -2.0, epsilon = 1e-9);
    }

    #[test]
    fn cable_never_pushes_when_recoiling() {
        let c = cfg();
        let mut head = head_at(Vec3::new(0.0, 0.0, -0.5005));
        head.velocity = Vec3::new(0.0, 0.0, 1.0); // closing fast
        let f = tether_force(&Vec3::zeros(), &Vec3::zeros(), &head, &c);
        assert_eq!(f.tension, 0.0);
        assert_eq!(f.on_head, Vec3::zeros());
    }

    #[test]
    fn head_mass_folds_half_the_wire() {
        let c = TetherConfig::with_magnet(MagnetSpec::neod_s(), 0.5, 0.033, 0.001);
        assert_relative_eq!(c.head_mass, 0.00042 + 0.001 + 0.00825, epsilon = 1e-12);
        assert_relative_eq!(c.vehicle_side_mass(), 0.00825, epsilon = 1e-12);
        assert!(c.validate().is_ok());
    }

    proptest::proptest! {
        #[test]
        fn forces_are_equal_and_opposite(
            hx in -1.0..1.0f64, hy in -1.0..1.0f64, hz in -1.0..1.0f64,
            vx in -3.0..3.0f64, vz in -3.0..3.0f64,
        ) {
            let mut head = head_at(Vec3::new(hx, hy, hz));
            head.velocity = Vec3::new(vx, 0.0, vz);
            let f = tether_force(&Vec3::zeros(), &Vec3::new(0.1, 0.0, 0.0), &head, &cfg());
            proptest::prop_assert_eq!(f.on_vehicle, -f.on_head);
            proptest::prop_assert!(f.tension >= 0.0);
        }
    }
}
