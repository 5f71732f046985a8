//! Deterministic planar UAV-target engagement simulator.
//!
//! The library models a canard-controlled vehicle pursuing a maneuvering
//! target in the vertical plane, guided by a zero-effort-miss (ZEM) sliding
//! surface. The actuator command is the sum of an equivalent control that
//! holds the surface derivative at zero on the nominal linear model and a
//! discontinuous twisting term whose gain can adapt online. Three controller
//! variants (SMC, TSMC, ATSMC) run on identical scenarios for comparison,
//! including paired Monte Carlo campaigns with coefficient uncertainty.
//!
//! Module map:
//! - [`smallmat`]: fixed-size dense matrices up to 6x6 and a robust matrix
//!   exponential (scaling-and-squaring, Pade core).
//! - [`dynamics`]: nonlinear engagement kinematics, target lag, and airframe
//!   short-period dynamics.
//! - [`linmodel`]: frozen linearized guidance / airframe / integrated models.
//! - [`zem`]: ZEM computation, sliding surface, and the sigma-dot drift
//!   decomposition.
//! - [`control`]: equivalent control, twisting law, gain adaptation, actuator
//!   limiting, Lyapunov diagnostics.
//! - [`sim`]: fixed-step RK4 execution, maneuver schedule, uncertainty
//!   sampling, termination, miss extraction, Monte Carlo campaigns.

pub mod control;
pub mod dynamics;
pub mod linmodel;
pub mod sim;
pub mod smallmat;
pub mod zem;

pub use control::{AtsmcParams, ControlMode, Controller};
pub use dynamics::{EngagementState, RelGeometry, VehicleCoeffs};
pub use linmodel::{build_models, LinearModels};
pub use sim::{monte_carlo, run_engagement, CampaignResult, ScenarioConfig, Trace};
