use serde::{Deserialize, Serialize};

use crate::math::Vec3;

/// Reference sample handed to the tracking controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefPoint {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    /// Feeds the body-rate command; zero on piecewise-constant acceleration.
    #[serde(default = "Vec3::zeros")]
    pub jerk: Vec3,
    /// rad
    pub yaw: f64,
}

impl RefPoint {
    pub fn hold(position: Vec3) -> Self {
        RefPoint {
            position,
            velocity: Vec3::zeros(),
            acceleration: Vec3::zeros(),
            jerk: Vec3::zeros(),
            yaw: 0.0,
        }
    }
}

/// Rest-to-rest straight move with a trapezoidal (or triangular) speed
/// profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidalSegment {
    pub from: Vec3,
    pub to: Vec3,
    pub v_max: f64,
    pub a_max: f64,
    pub peak_speed: f64,
    pub t_accel: f64,
    pub t_cruise: f64,
    pub t_decel: f64,
}

impl TrapezoidalSegment {
    pub fn duration(&self) -> f64 {
        self.t_accel + self.t_cruise + self.t_decel
    }

    fn direction(&self) -> Vec3 {
        let d = self.to - self.from;
        let n = d.norm();
        if n == 0.0 {
            Vec3::zeros()
        } else {
            d / n
        }
    }

    /// Arc length, speed and signed acceleration along the segment.
    fn scalar(&self, t: f64) -> (f64, f64, f64) {
        let a = self.a_max;
        let vp = self.peak_speed;
        let t1 = self.t_accel;
        let t2 = t1 + self.t_cruise;
        let t3 = t2 + self.t_decel;
        if t <= 0.0 {
            (0.0, 0.0, 0.0)
        } else if t < t1 {
            (0.5 * a * t * t, a * t, a)
        } else if t < t2 {
            let s1 = 0.5 * a * t1 * t1;
            (s1 + vp * (t - t1), vp, 0.0)
        } else if t < t3 {
            let s2 = 0.5 * a * t1 * t1 + vp * self.t_cruise;
            let tau = t - t2;
            (s2 + vp * tau - 0.5 * a * tau * tau, vp - a * tau, -a)
        } else {
            ((self.to - self.from).norm(), 0.0, 0.0)
        }
    }

    pub fn sample(&self, t: f64) -> RefPoint {
        let u = self.direction();
        let (s, v, a) = self.scalar(t);
        let position = if t >= self.duration() {
            self.to
        } else {
            self.from + u * s
        };
        RefPoint {
            position,
            velocity: u * v,
            acceleration: u * a,
            jerk: Vec3::zeros(),
            yaw: 0.0,
        }
    }
}

/// Plans a straight rest-to-rest move: accelerate at `a_max`, cruise at
/// `v_max` if the distance allows, decelerate to rest at the target.
pub fn plan_trapezoid(from: Vec3, to: Vec3, v_max: f64, a_max: f64) -> TrapezoidalSegment {
    assert!(v_max > 0.0 && a_max > 0.0, "v_max and a_max must be positive");
    let distance = (to - from).norm();
    let (peak, t_ramp, t_cruise) = if distance == 0.0 {
        (0.0, 0.0, 0.0)
    } else if distance < v_max * v_max / a_max {
        let peak = (distance * a_max).sqrt();
        (peak, peak / a_max, 0.0)
    } else {
        let t_ramp = v_max / a_max;
        (v_max, t_ramp, (distance - v_max * t_ramp) / v_max)
    };
    TrapezoidalSegment {
        from,
        to,
        v_max,
        a_max,
        peak_speed: peak,
        t_accel: t_ramp,
        t_cruise,
        t_decel: t_ramp,
    }
}

/// Waypoint list flown as consecutive rest-to-rest trapezoids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidalProfile {
    pub waypoints: Vec<Vec3>,
    pub v_max: f64,
    pub a_max: f64,
    pub segments: Vec<TrapezoidalSegment>,
}

impl TrapezoidalProfile {
    pub fn through(waypoints: Vec<Vec3>, v_max: f64, a_max: f64) -> Self {
        let segments = waypoints
            .windows(2)
            .map(|w| plan_trapezoid(w[0], w[1], v_max, a_max))
            .collect();
        TrapezoidalProfile {
            waypoints,
            v_max,
            a_max,
            segments,
        }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration()).sum()
    }

    pub fn sample(&self, t: f64) -> RefPoint {
        let mut t0 = 0.0;
        for s in &self.segments {
            let d = s.duration();
            if t < t0 + d {
                return s.sample(t - t0);
            }
            t0 += d;
        }
        RefPoint::hold(self.waypoints.last().copied().unwrap_or_else(Vec3::zeros))
    }
}

/// Level circle at constant speed, counter-clockwise seen from above,
/// starting on the +x side of the centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleTrajectory {
    /// Horizontal centre; z is ignored in favour of `altitude`.
    pub center: Vec3,
    pub radius: f64,
    pub speed: f64,
    pub altitude: f64,
}

impl CircleTrajectory {
    pub fn start_point(&self) -> Vec3 {
        Vec3::new(self.center.x + self.radius, self.center.y, self.altitude)
    }

    pub fn sample(&self, t: f64) -> RefPoint {
        self.sample_ramped(t, None)
    }

    /// With `ramp` the speed grows from rest at that tangential
    /// acceleration, so tracking can begin from a hover at the start point.
    pub fn sample_ramped(&self, t: f64, ramp: Option<f64>) -> RefPoint {
        let t = t.max(0.0);
        let r = self.radius;
        let (arc, speed, tangential) = match ramp {
            Some(a) if t < self.speed / a => (0.5 * a * t * t, a * t, a),
            Some(a) => {
                let tr = self.speed / a;
                (0.5 * a * tr * tr + self.speed * (t - tr), self.speed, 0.0)
            }
            None => (self.speed * t, self.speed, 0.0),
        };
        let th = arc / r;
        let (s, c) = th.sin_cos();
        let radial = Vec3::new(c, s, 0.0);
        let tangent = Vec3::new(-s, c, 0.0);
        RefPoint {
            position: Vec3::new(self.center.x, self.center.y, self.altitude) + radial * r,
            velocity: tangent * speed,
            acceleration: tangent * tangential - radial * (speed * speed / r),
            jerk: -radial * (3.0 * tangential * speed / r) - tangent * (speed.powi(3) / (r * r)),
            yaw: 0.0,
        }
    }
}

/// Piece of a mission path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PathSegment {
    /// Constant deceleration from the given state to rest.
    Brake {
        from: Vec3,
        velocity: Vec3,
        decel: f64,
    },
    Move(TrapezoidalSegment),
    Hold {
        at: Vec3,
        duration: f64,
    },
}

impl PathSegment {
    pub fn duration(&self) -> f64 {
        match self {
            PathSegment::Brake { velocity, decel, .. } => velocity.norm() / decel,
            PathSegment::Move(s) => s.duration(),
            PathSegment::Hold { duration, .. } => *duration,
        }
    }

    pub fn end(&self) -> Vec3 {
        match self {
            PathSegment::Brake { from, velocity, decel } => {
                let v = velocity.norm();
                if v == 0.0 {
                    *from
                } else {
                    from + velocity * (0.5 * v / decel)
                }
            }
            PathSegment::Move(s) => s.to,
            PathSegment::Hold { at, .. } => *at,
        }
    }

    pub fn sample(&self, t: f64) -> RefPoint {
        match self {
            PathSegment::Brake { from, velocity, decel } => {
                let v = velocity.norm();
                let stop = v / decel;
                if v == 0.0 || t >= stop {
                    return RefPoint::hold(self.end());
                }
                let u = velocity / v;
                let t = t.max(0.0);
                RefPoint {
                    position: from + velocity * t - u * (0.5 * decel * t * t),
                    velocity: velocity - u * (decel * t),
                    acceleration: -u * *decel,
                    jerk: Vec3::zeros(),
                    yaw: 0.0,
                }
            }
            PathSegment::Move(s) => s.sample(t),
            PathSegment::Hold { at, .. } => RefPoint::hold(*at),
        }
    }
}

/// Chain of path segments started at a given mission time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub start_time: f64,
    pub segments: Vec<PathSegment>,
}

impl Path {
    pub fn new(start_time: f64, segments: Vec<PathSegment>) -> Self {
        Path { start_time, segments }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration()).sum()
    }

    pub fn finished(&self, t: f64) -> bool {
        t - self.start_time >= self.duration()
    }

    pub fn end(&self) -> Option<Vec3> {
        self.segments.last().map(|s| s.end())
    }

    pub fn sample(&self, t: f64) -> RefPoint {
        let mut local = t - self.start_time;
        for s in &self.segments {
            let d = s.duration();
            if local < d {
                return s.sample(local);
            }
            local -= d;
        }
        RefPoint::hold(self.end().unwrap_or_else(Vec3::zeros))
    }
}
