pub mod cli;
pub mod correlators;
pub mod curve;
pub mod diffsys;
pub mod dlbridge;
pub mod dy;
pub mod exact;
pub mod gw;
pub mod report;
pub mod toprec;
