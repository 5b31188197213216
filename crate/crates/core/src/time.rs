//! Simulation clock. Step index 0 is midnight of the first simulated day.

/// Simulation time step in minutes.
pub const STEP_MINUTES: f64 = 3.75;
/// Simulation time step in hours (the Δk factor of energy sums).
pub const STEP_HOURS: f64 = STEP_MINUTES / 60.0;
pub const STEPS_PER_HOUR: usize = 16;
pub const STEPS_PER_DAY: usize = 24 * STEPS_PER_HOUR;

/// Hours elapsed since simulation start at the beginning of step `k`.
pub fn step_time_h(k: usize) -> f64 {
    k as f64 * STEP_HOURS
}

/// Hour of day in `[0, 24)` for a time in hours since simulation start.
pub fn hour_of_day(t_h: f64) -> f64 {
    t_h.rem_euclid(24.0)
}

/// Whole days elapsed since simulation start.
pub fn day_index(t_h: f64) -> i64 {
    (t_h / 24.0).floor() as i64
}
