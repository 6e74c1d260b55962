pub mod analytic;
pub mod cavity;
pub mod model;
pub mod ode;
pub mod ppsde;
