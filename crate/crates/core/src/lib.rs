//! Barrier-Lyapunov backstepping control of a three-degree-of-freedom
//! surface vessel with asymmetric output constraints and input saturation.

pub mod acceptance;
pub mod actuator;
pub mod barrier;
pub mod config;
pub mod control;
pub mod linalg;
pub mod output;
pub mod scalar;
pub mod scenario;
pub mod sim;
pub mod trajectory;
pub mod vessel;

pub use linalg::{Mat3, Vec3};
pub use vessel::{BodyVelocity, Pose, VesselModel, VesselParams};
