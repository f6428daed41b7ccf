//! Physical constants, state bounds and reward parameters of the built-in
//! environments. Every number the dynamics or rewards use lives here.

pub mod mountain_car {
    pub const FORCE: f64 = 0.001;
    pub const GRAVITY: f64 = 0.0025;
    pub const MIN_POSITION: f64 = -1.2;
    pub const MAX_POSITION: f64 = 0.6;
    pub const MAX_SPEED: f64 = 0.07;
    pub const GOAL_POSITION: f64 = 0.5;
    /// Throttle values for the three discrete actions (push left, coast, push right).
    pub const ACTIONS: [f64; 3] = [-1.0, 0.0, 1.0];
    /// Training start region: position uniform in [-0.6, -0.4], at rest.
    pub const INITIAL: [[f64; 2]; 2] = [[-0.6, -0.4], [0.0, 0.0]];
    pub const STEP_REWARD: f64 = -1.0;
}

pub mod pendulum {
    pub const GRAVITY: f64 = 10.0;
    pub const LENGTH: f64 = 1.0;
    pub const MASS: f64 = 1.0;
    pub const DT: f64 = 0.05;
    pub const MAX_SPEED: f64 = 8.0;
    pub const MAX_TORQUE: f64 = 2.0;
    /// Default torque grid.
    pub const ACTIONS: [f64; 3] = [-2.0, 0.0, 2.0];
    /// The angle is measured from upright; states leaving [-pi, pi] fall to the sink.
    pub const THETA_BOUND: f64 = std::f64::consts::PI;
    pub const INITIAL: [[f64; 2]; 2] = [[-0.05, 0.05], [-0.05, 0.05]];
    /// Reward is -(theta^2 + W_OMEGA * omega^2 + W_TORQUE * u^2).
    pub const W_OMEGA: f64 = 0.1;
    pub const W_TORQUE: f64 = 0.001;
    /// Training episodes end when |theta| exceeds this.
    pub const FALL_ANGLE: f64 = std::f64::consts::FRAC_PI_2;
    pub const FALL_PENALTY: f64 = -100.0;
}

pub mod cartpole {
    pub const GRAVITY: f64 = 9.8;
    pub const MASS_CART: f64 = 1.0;
    pub const MASS_POLE: f64 = 0.1;
    pub const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
    /// Half the pole length.
    pub const LENGTH: f64 = 0.5;
    pub const POLE_MASS_LENGTH: f64 = MASS_POLE * LENGTH;
    pub const FORCE_MAG: f64 = 10.0;
    pub const TAU: f64 = 0.02;
    pub const ACTIONS: [f64; 2] = [-FORCE_MAG, FORCE_MAG];
    /// Episode termination thresholds (training only).
    pub const X_THRESHOLD: f64 = 2.4;
    pub const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
    /// State-space bounds: twice the termination thresholds for position
    /// and angle, and a fixed box for the velocities.
    pub const X_BOUND: f64 = 4.8;
    pub const X_DOT_BOUND: f64 = 5.0;
    pub const THETA_BOUND: f64 = 0.42;
    pub const THETA_DOT_BOUND: f64 = 5.0;
    pub const INITIAL: [[f64; 2]; 4] = [[-0.05, 0.05]; 4];
    pub const STEP_REWARD: f64 = 1.0;
}

pub mod platoon {
    /// Default linear platoon model, parsed by `Environment::platoon_default`.
    pub const DEFAULT_CONFIG: &str = include_str!("../configs/platoon_dynamics.toml");
}
