//! Pulsed sideband-cooling schedules and their simulation.

mod quantum;
mod rate_map;
mod schedule;

pub use quantum::simulate_cooling_quantum;
pub use rate_map::{apply_heating, simulate_cooling, CoolingResult, NbarPoint, OVERFLOW_LIMIT};
pub use schedule::{
    build_schedule, pulse_transfer_probability, pulses_total_time, schedule_total_time, PulseKind,
    PulseSchedule, PulseSpec, RepumpModel, ScheduleTime,
};
