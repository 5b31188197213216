//! Weather series, the synthetic winter climate generator, and the forecast
//! error models applied to them.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::time::{hour_of_day, step_time_h, STEPS_PER_DAY, STEPS_PER_HOUR, STEP_HOURS};
use crate::zone::Facade;
use crate::{Error, Result};

/// Column names of the weather CSV format, in file order.
pub const CSV_COLUMNS: [&str; 5] = ["time_h", "t_ext_c", "si_tilt_wm2", "si_south_wm2", "t_gnd_c"];

/// Weather channels sampled on the 3.75-min simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries {
    /// Outdoor air temperature, °C.
    pub t_ext: Vec<f64>,
    /// Total irradiance on the 45° south-facing PV plane, W/m².
    pub si_tilt: Vec<f64>,
    /// Total irradiance on the vertical south façade, W/m².
    pub si_south: Vec<f64>,
    /// Ground temperature below the slab, °C.
    pub t_gnd: Vec<f64>,
}

impl WeatherSeries {
    pub fn len(&self) -> usize {
        self.t_ext.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_ext.is_empty()
    }

    /// Checks the series invariants: equal channel lengths, finite values and
    /// non-negative irradiance.
    pub fn validate(&self) -> Result<()> {
        let n = self.t_ext.len();
        if self.si_tilt.len() != n || self.si_south.len() != n || self.t_gnd.len() != n {
            return Err(Error::Dimension("weather channels differ in length".into()));
        }
        let channels = [
            ("t_ext", &self.t_ext),
            ("si_tilt", &self.si_tilt),
            ("si_south", &self.si_south),
            ("t_gnd", &self.t_gnd),
        ];
        for (name, values) in channels {
            if let Some(k) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("{name} at step {k}")));
            }
        }
        if self.si_tilt.iter().chain(&self.si_south).any(|&v| v < 0.0) {
            return Err(Error::OutOfRange("negative irradiance".into()));
        }
        Ok(())
    }

    /// Copy of steps `[start, start + len)`.
    pub fn window(&self, start: usize, len: usize) -> Result<WeatherSeries> {
        if start + len > self.len() {
            return Err(Error::Dimension(format!(
                "window {start}..{} exceeds series length {}",
                start + len,
                self.len()
            )));
        }
        let r = start..start + len;
        Ok(WeatherSeries {
            t_ext: self.t_ext[r.clone()].to_vec(),
            si_tilt: self.si_tilt[r.clone()].to_vec(),
            si_south: self.si_south[r.clone()].to_vec(),
            t_gnd: self.t_gnd[r].to_vec(),
        })
    }

    /// Writes the series in the weather CSV format, one row per step.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for k in 0..self.len() {
            w.write_record(&[
                step_time_h(k).to_string(),
                self.t_ext[k].to_string(),
                self.si_tilt[k].to_string(),
                self.si_south[k].to_string(),
                self.t_gnd[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a weather CSV file and resamples it onto the simulation grid.
pub fn load_weather(path: impl AsRef<Path>) -> Result<WeatherSeries> {
    let file = std::fs::File::open(path)?;
    read_weather_csv(file)
}

/// Parses weather CSV text. Time is in decimal hours from simulation start
/// (which must be 0), at hourly or finer cadence; each channel is linearly
/// interpolated onto the 3.75-min grid and the last sample is held for one
/// more sampling interval.
pub fn read_weather_csv<R: Read>(input: R) -> Result<WeatherSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::WeatherFormat(format!("missing column `{name}`")))?;
    }

    let mut rows: Vec<[f64; 5]> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let mut values = [0.0; 5];
        for (c, (&i, name)) in idx.iter().zip(CSV_COLUMNS).enumerate() {
            let v = record
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidSample {
                    row: row + 1,
                    column: name.to_string(),
                })?;
            values[c] = v;
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::WeatherFormat("no data rows".into()));
    }
    if rows[0][0].abs() > 1e-9 {
        return Err(Error::WeatherFormat("time_h must start at 0".into()));
    }
    for w in rows.windows(2) {
        let dt = w[1][0] - w[0][0];
        if dt <= 0.0 {
            return Err(Error::WeatherFormat(format!(
                "non-monotonic timestamps at t = {} h",
                w[1][0]
            )));
        }
        if dt > 1.0 + 1e-9 {
            return Err(Error::WeatherFormat(format!(
                "gap of {dt} h at t = {} h exceeds hourly cadence",
                w[0][0]
            )));
        }
    }
    for r in &rows {
        if r[2] < 0.0 || r[3] < 0.0 {
            return Err(Error::WeatherFormat(format!(
                "negative irradiance at t = {} h",
                r[0]
            )));
        }
    }

    let last_dt = if rows.len() > 1 {
        rows[rows.len() - 1][0] - rows[rows.len() - 2][0]
    } else {
        1.0
    };
    let span = rows[rows.len() - 1][0] + last_dt;
    let n = (span / STEP_HOURS).round() as usize;

    let mut series = WeatherSeries {
        t_ext: Vec::with_capacity(n),
        si_tilt: Vec::with_capacity(n),
        si_south: Vec::with_capacity(n),
        t_gnd: Vec::with_capacity(n),
    };
    let mut seg = 0usize;
    for k in 0..n {
        let t = step_time_h(k);
        while seg + 1 < rows.len() && rows[seg + 1][0] <= t {
            seg += 1;
        }
        let sample = |c: usize| -> f64 {
            if seg + 1 >= rows.len() {
                return rows[seg][c];
            }
            let (a, b) = (&rows[seg], &rows[seg + 1]);
            let frac = (t - a[0]) / (b[0] - a[0]);
            a[c] + (b[c] - a[c]) * frac
        };
        series.t_ext.push(sample(1));
        series.si_tilt.push(sample(2));
        series.si_south.push(sample(3));
        series.t_gnd.push(sample(4));
    }
    Ok(series)
}

/// Parameters of the synthetic winter climate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClimateParams {
    pub latitude_deg: f64,
    /// Day of year of the first simulated day (1 = 1 January).
    pub start_day_of_year: u32,
    /// Long-run mean of the daily mean outdoor temperature, °C.
    pub daily_mean_c: f64,
    /// Standard deviation of the daily mean temperature, °C.
    pub daily_mean_sd_c: f64,
    /// Day-to-day AR(1) coefficient of the daily mean temperature.
    pub daily_mean_persistence: f64,
    /// Daily mean temperatures are clamped to this range, °C.
    pub daily_mean_range_c: (f64, f64),
    /// Half peak-to-peak diurnal swing, °C. Minimum at 03:00, maximum at 15:00.
    pub diurnal_amplitude_c: f64,
    pub ground_mean_c: f64,
    pub ground_amplitude_c: f64,
    /// Mean daily clearness (1 = clear sky, 0 = overcast).
    pub clearness_mean: f64,
    pub clearness_sd: f64,
    pub ground_albedo: f64,
    pub pv_tilt_deg: f64,
}

impl Default for ClimateParams {
    /// Early-January climate of a cold continental city near 43.7° N.
    fn default() -> Self {
        ClimateParams {
            latitude_deg: 43.67,
            start_day_of_year: 1,
            daily_mean_c: -5.5,
            daily_mean_sd_c: 3.5,
            daily_mean_persistence: 0.6,
            daily_mean_range_c: (-16.0, 4.0),
            diurnal_amplitude_c: 3.5,
            ground_mean_c: 6.0,
            ground_amplitude_c: 0.3,
            clearness_mean: 0.5,
            clearness_sd: 0.25,
            ground_albedo: 0.6,
            pv_tilt_deg: 45.0,
        }
    }
}

/// Solar elevation and azimuth (radians; azimuth measured from south,
/// positive toward west) using solar time.
pub fn solar_position(latitude_deg: f64, day_of_year: u32, hour: f64) -> (f64, f64) {
    let lat = latitude_deg.to_radians();
    let decl = (23.45f64).to_radians() * (2.0 * PI * (284.0 + day_of_year as f64) / 365.0).sin();
    let omega = (15.0 * (hour - 12.0)).to_radians();
    let sin_alt = lat.sin() * decl.sin() + lat.cos() * decl.cos() * omega.cos();
    let alt = sin_alt.clamp(-1.0, 1.0).asin();
    let az = omega
        .sin()
        .atan2(lat.sin() * omega.cos() - lat.cos() * decl.tan());
    (alt, az)
}

/// Irradiance on a south-facing plane of tilt `tilt_deg` from beam-normal,
/// horizontal-diffuse and horizontal-global components.
fn plane_irradiance(alt: f64, az: f64, tilt_deg: f64, beam_n: f64, diffuse_h: f64, albedo: f64) -> f64 {
    let beta = tilt_deg.to_radians();
    let cos_inc = alt.sin() * beta.cos() + alt.cos() * beta.sin() * az.cos();
    let ghi = beam_n * alt.sin() + diffuse_h;
    beam_n * cos_inc.max(0.0) + diffuse_h * (1.0 + beta.cos()) / 2.0 + ghi * albedo * (1.0 - beta.cos()) / 2.0
}

/// Generates a deterministic synthetic weather series of `days` days.
pub fn synthesize_weather(days: usize, seed: u64, climate: &ClimateParams) -> Result<WeatherSeries> {
    if days == 0 {
        return Err(Error::Config("weather synthesis needs at least one day".into()));
    }
    let (lo, hi) = climate.daily_mean_range_c;
    if lo > hi || climate.daily_mean_sd_c < 0.0 || climate.clearness_sd < 0.0 {
        return Err(Error::Config("inconsistent climate parameters".into()));
    }
    let mut temp_rng = channel_rng(seed, 101);
    let mut cloud_rng = channel_rng(seed, 102);
    let mut ground_rng = channel_rng(seed, 103);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let phi = climate.daily_mean_persistence.clamp(0.0, 0.999);
    let mut daily_means = Vec::with_capacity(days);
    let mut dev = 0.0;
    for _ in 0..days {
        dev = phi * dev + climate.daily_mean_sd_c * (1.0 - phi * phi).sqrt() * std_normal.sample(&mut temp_rng);
        daily_means.push((climate.daily_mean_c + dev).clamp(lo, hi));
    }

    let hours = days * 24 + 1;
    let mut hourly_clear = Vec::with_capacity(hours);
    for d in 0..=days {
        let c_day = (climate.clearness_mean + climate.clearness_sd * std_normal.sample(&mut cloud_rng))
            .clamp(0.05, 1.0);
        let per_day = if d == days { 1 } else { 24 };
        for _ in 0..per_day {
            hourly_clear.push((c_day + 0.08 * std_normal.sample(&mut cloud_rng)).clamp(0.02, 1.0));
        }
    }
    let ground_offset = 0.1 * std_normal.sample(&mut ground_rng);
    let ground_phase = ground_rng.gen_range(0.0..2.0 * PI);

    let n = days * STEPS_PER_DAY;
    let mut series = WeatherSeries {
        t_ext: Vec::with_capacity(n),
        si_tilt: Vec::with_capacity(n),
        si_south: Vec::with_capacity(n),
        t_gnd: Vec::with_capacity(n),
    };
    for k in 0..n {
        let t = step_time_h(k);
        let h = hour_of_day(t);
        let day = k / STEPS_PER_DAY;

        // Daily means anchored at noon, linear in between.
        let pos = (t - 12.0) / 24.0;
        let base = if pos <= 0.0 {
            daily_means[0]
        } else if pos >= (days - 1) as f64 {
            daily_means[days - 1]
        } else {
            let i = pos.floor() as usize;
            let f = pos - i as f64;
            daily_means[i] * (1.0 - f) + daily_means[i + 1] * f
        };
        series
            .t_ext
            .push(base + climate.diurnal_amplitude_c * (2.0 * PI * (h - 9.0) / 24.0).sin());

        let doy = (climate.start_day_of_year - 1 + day as u32) % 365 + 1;
        let (alt, az) = solar_position(climate.latitude_deg, doy, h);
        if alt <= 0.0 {
            series.si_tilt.push(0.0);
            series.si_south.push(0.0);
        } else {
            let hi_idx = k / STEPS_PER_HOUR;
            let f = (k % STEPS_PER_HOUR) as f64 / STEPS_PER_HOUR as f64;
            let c = hourly_clear[hi_idx] * (1.0 - f) + hourly_clear[hi_idx + 1] * f;
            let sin_alt = alt.sin();
            let air_mass = 1.0 / (sin_alt + 0.50572 * (alt.to_degrees() + 6.07995).powf(-1.6364));
            let dni_clear = 1353.0 * 0.7f64.powf(air_mass.powf(0.678));
            let ghi_clear = dni_clear * sin_alt + 0.1 * dni_clear;
            let beam_n = dni_clear * c.powf(1.5);
            let diffuse_h = ghi_clear * (0.1 + 0.25 * (1.0 - c));
            series.si_tilt.push(plane_irradiance(
                alt,
                az,
                climate.pv_tilt_deg,
                beam_n,
                diffuse_h,
                climate.ground_albedo,
            ));
            series
                .si_south
                .push(plane_irradiance(alt, az, 90.0, beam_n, diffuse_h, climate.ground_albedo));
        }

        series.t_gnd.push(
            climate.ground_mean_c
                + ground_offset
                + climate.ground_amplitude_c * (2.0 * PI * t / (24.0 * 30.0) + ground_phase).sin(),
        );
    }
    Ok(series)
}

/// Independent random stream for one noise channel derived from a root seed.
pub fn channel_rng(seed: u64, channel: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel);
    rng
}

/// Stream identifiers for the forecast noise channels.
pub mod channel {
    pub const T_EXT: u64 = 1;
    pub const SOLAR_TILT: u64 = 2;
    pub const SOLAR_WINDOW: u64 = 3;
    pub const T_GND: u64 = 4;
    /// Internal gains use `INTERNAL_GAIN + zone index`.
    pub const INTERNAL_GAIN: u64 = 16;
}

/// Forecast lead time the noise statistics describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HorizonClass {
    OneHourAhead,
    SixHoursAhead,
}

/// Gaussian forecast-error statistics for each disturbance channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastNoiseSpec {
    pub horizon_class: HorizonClass,
    pub t_ext_mean: f64,
    pub t_ext_std: f64,
    pub solar_mean: f64,
    pub solar_std: f64,
    pub t_gnd_mean: f64,
    pub t_gnd_std: f64,
    /// Approximate maximum relative deviation of internal gains (≈ 3σ).
    pub internal_gain_pct_std: f64,
    pub rng_seed: u64,
}

impl ForecastNoiseSpec {
    pub fn one_hour_ahead(rng_seed: u64) -> Self {
        ForecastNoiseSpec {
            horizon_class: HorizonClass::OneHourAhead,
            t_ext_mean: 0.04,
            t_ext_std: 1.2,
            solar_mean: 17.0,
            solar_std: 100.0,
            t_gnd_mean: 0.0,
            t_gnd_std: 0.17,
            internal_gain_pct_std: 0.30,
            rng_seed,
        }
    }

    pub fn six_hours_ahead(rng_seed: u64) -> Self {
        ForecastNoiseSpec {
            horizon_class: HorizonClass::SixHoursAhead,
            t_ext_std: 2.2,
            solar_std: 167.0,
            ..Self::one_hour_ahead(rng_seed)
        }
    }

    /// Perfect forecast.
    pub fn noiseless(rng_seed: u64) -> Self {
        ForecastNoiseSpec {
            horizon_class: HorizonClass::OneHourAhead,
            t_ext_mean: 0.0,
            t_ext_std: 0.0,
            solar_mean: 0.0,
            solar_std: 0.0,
            t_gnd_mean: 0.0,
            t_gnd_std: 0.0,
            internal_gain_pct_std: 0.0,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let stds = [
            self.t_ext_std,
            self.solar_std,
            self.t_gnd_std,
            self.internal_gain_pct_std,
        ];
        if stds.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::Config("noise standard deviations must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Draws `n_knots` hourly Gaussian noise values.
pub fn hourly_noise_knots(rng: &mut ChaCha8Rng, n_knots: usize, mean: f64, std: f64) -> Result<Vec<f64>> {
    if std == 0.0 {
        return Ok(vec![mean; n_knots]);
    }
    let dist = Normal::new(mean, std).map_err(|e| Error::Config(e.to_string()))?;
    Ok((0..n_knots).map(|_| dist.sample(rng)).collect())
}

/// Number of hourly knots needed to cover `n_steps` simulation steps.
pub fn knots_for_steps(n_steps: usize) -> usize {
    n_steps.div_ceil(STEPS_PER_HOUR) + 1
}

/// Linear interpolation of hourly knots onto `n_steps` grid points.
pub fn interpolate_hourly(knots: &[f64], n_steps: usize) -> Vec<f64> {
    (0..n_steps)
        .map(|k| {
            let i = k / STEPS_PER_HOUR;
            let f = (k % STEPS_PER_HOUR) as f64 / STEPS_PER_HOUR as f64;
            knots[i] * (1.0 - f) + knots[i + 1] * f
        })
        .collect()
}

/// Adds hourly forecast errors to an actual weather series.
///
/// Temperatures receive additive noise everywhere. Irradiance noise is
/// applied only where the actual irradiance is positive and the result is
/// clamped at zero, so night forecasts stay dark.
pub fn make_forecast(actual: &WeatherSeries, spec: &ForecastNoiseSpec) -> Result<WeatherSeries> {
    spec.validate()?;
    let n = actual.len();
    let knots = knots_for_steps(n);
    let noise = |channel: u64, mean: f64, std: f64| -> Result<Vec<f64>> {
        let mut rng = channel_rng(spec.rng_seed, channel);
        Ok(interpolate_hourly(&hourly_noise_knots(&mut rng, knots, mean, std)?, n))
    };
    let t_ext_noise = noise(channel::T_EXT, spec.t_ext_mean, spec.t_ext_std)?;
    let tilt_noise = noise(channel::SOLAR_TILT, spec.solar_mean, spec.solar_std)?;
    let window_noise = noise(channel::SOLAR_WINDOW, spec.solar_mean, spec.solar_std)?;
    let gnd_noise = noise(channel::T_GND, spec.t_gnd_mean, spec.t_gnd_std)?;

    let solar = |actual: &[f64], noise: &[f64]| -> Vec<f64> {
        actual
            .iter()
            .zip(noise)
            .map(|(&a, &e)| if a > 0.0 { (a + e).max(0.0) } else { 0.0 })
            .collect()
    };
    Ok(WeatherSeries {
        t_ext: actual.t_ext.iter().zip(&t_ext_noise).map(|(a, e)| a + e).collect(),
        si_tilt: solar(&actual.si_tilt, &tilt_noise),
        si_south: solar(&actual.si_south, &window_noise),
        t_gnd: actual.t_gnd.iter().zip(&gnd_noise).map(|(a, e)| a + e).collect(),
    })
}

/// Relative solar heat-gain factors of vertical façades with respect to the
/// south façade, for a mid-winter day at about 43° N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolarGainFactorTable {
    /// Rows for 08:00 … 12:00 as `[N, E, S, W]`. Afternoon hours mirror the
    /// morning with east and west exchanged (16:00 ↔ 08:00).
    pub morning_rows: [[f64; 4]; 5],
    /// Sunrise and sunset (hours) bounding the south-only gain outside the
    /// tabulated hours.
    pub sunrise_h: f64,
    pub sunset_h: f64,
}

impl Default for SolarGainFactorTable {
    fn default() -> Self {
        SolarGainFactorTable {
            morning_rows: [
                [0.053, 1.474, 1.0, 0.053],
                [0.066, 0.940, 1.0, 0.066],
                [0.067, 0.565, 1.0, 0.067],
                [0.070, 0.240, 1.0, 0.070],
                [0.067, 0.075, 1.0, 0.075],
            ],
            sunrise_h: 7.85,
            sunset_h: 16.85,
        }
    }
}

impl SolarGainFactorTable {
    fn column(facade: Facade) -> usize {
        match facade {
            Facade::N => 0,
            Facade::E => 1,
            Facade::S => 2,
            Facade::W => 3,
        }
    }

    fn at_listed_hour(&self, hour: usize, facade: Facade) -> f64 {
        if hour <= 12 {
            self.morning_rows[hour - 8][Self::column(facade)]
        } else {
            let mirrored = match facade {
                Facade::E => Facade::W,
                Facade::W => Facade::E,
                f => f,
            };
            self.morning_rows[24 - hour - 8][Self::column(mirrored)]
        }
    }

    /// Factor at an hour of day. Hours between listed rows are linearly
    /// interpolated; outside 08:00–16:00 only the south façade counts, and
    /// only while the sun is up.
    pub fn factor(&self, hour: f64, facade: Facade) -> f64 {
        let h = hour.rem_euclid(24.0);
        if !(8.0..=16.0).contains(&h) {
            let daylight = h >= self.sunrise_h && h < self.sunset_h;
            return if facade == Facade::S && daylight { 1.0 } else { 0.0 };
        }
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        if frac == 0.0 || lo == 16 {
            return self.at_listed_hour(lo, facade);
        }
        let a = self.at_listed_hour(lo, facade);
        let b = self.at_listed_hour(lo + 1, facade);
        a + (b - a) * frac
    }
}

/// Solar heat-gain forecast error through the windows of one façade, W.
pub fn solar_gain_noise(
    base_noise_wm2: f64,
    facade: Facade,
    hour: f64,
    window_area_m2: f64,
    g_value: f64,
    table: &SolarGainFactorTable,
) -> Result<f64> {
    if window_area_m2 < 0.0 {
        return Err(Error::OutOfRange(format!("window area {window_area_m2} m² < 0")));
    }
    Ok(base_noise_wm2 * g_value * window_area_m2 * table.factor(hour, facade))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hourly_csv(rows: &[(f64, f64)]) -> String {
        let mut s = String::from("time_h,t_ext_c,si_tilt_wm2,si_south_wm2,t_gnd_c\n");
        for (t, te) in rows {
            s.push_str(&format!("{t},{te},0,0,5\n"));
        }
        s
    }

    #[test]
    fn hourly_day_resamples_to_384_steps() {
        let rows: Vec<_> = (0..24).map(|h| (h as f64, -5.0)).collect();
        let w = read_weather_csv(hourly_csv(&rows).as_bytes()).unwrap();
        assert_eq!(w.len(), 384);
    }

    #[test]
    fn interpolates_between_hourly_samples() {
        let w = read_weather_csv(hourly_csv(&[(0.0, 0.0), (1.0, 1.6)]).as_bytes()).unwrap();
        assert_relative_eq!(w.t_ext[1], 0.1, max_relative = 1e-12);
        assert_relative_eq!(w.t_ext[16], 1.6);
        assert_relative_eq!(w.t_ext[31], 1.6);
    }

    #[test]
    fn nan_cell_is_invalid_sample() {
        let csv = "time_h,t_ext_c,si_tilt_wm2,si_south_wm2,t_gnd_c\n0,NaN,0,0,5\n";
        let err = read_weather_csv(csv.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("invalid sample"), "{err}");
    }

    #[test]
    fn missing_column_and_bad_time_are_rejected() {
        let csv = "time_h,t_ext_c,si_tilt_wm2,t_gnd_c\n0,1,0,5\n";
        assert!(matches!(read_weather_csv(csv.as_bytes()), Err(Error::WeatherFormat(_))));
        let csv = "time_h,t_ext_c,si_tilt_wm2,si_south_wm2,t_gnd_c\n0,1,0,0,5\n1,1,0,0,5\n0.5,1,0,0,5\n";
        assert!(matches!(read_weather_csv(csv.as_bytes()), Err(Error::WeatherFormat(_))));
    }

    #[test]
    fn csv_round_trip_on_grid() {
        let w = synthesize_weather(1, 3, &ClimateParams::default()).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let back = read_weather_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), w.len());
        for k in 0..w.len() {
            assert_relative_eq!(back.t_ext[k], w.t_ext[k], max_relative = 1e-12);
            assert_relative_eq!(back.si_south[k], w.si_south[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn synthesis_is_deterministic_and_dark_at_night() {
        let climate = ClimateParams::default();
        let a = synthesize_weather(3, 11, &climate).unwrap();
        let b = synthesize_weather(3, 11, &climate).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        for k in 0..a.len() {
            let day = (k / STEPS_PER_DAY) as u32;
            let (alt, _) = solar_position(climate.latitude_deg, climate.start_day_of_year + day, hour_of_day(step_time_h(k)));
            if alt <= 0.0 {
                assert_eq!(a.si_tilt[k], 0.0);
                assert_eq!(a.si_south[k], 0.0);
            }
        }
        assert!(a.si_tilt.iter().any(|&v| v > 100.0));
        assert!(synthesize_weather(0, 1, &climate).is_err());
    }

    #[test]
    fn daily_means_stay_in_configured_range() {
        let climate = ClimateParams::default();
        let w = synthesize_weather(30, 5, &climate).unwrap();
        let (lo, hi) = climate.daily_mean_range_c;
        for day in w.t_ext.chunks(STEPS_PER_DAY) {
            let mean = day.iter().sum::<f64>() / day.len() as f64;
            assert!(mean >= lo - 1e-9 && mean <= hi + 1e-9, "daily mean {mean}");
        }
    }

    #[test]
    fn zero_noise_forecast_equals_actual() {
        let w = synthesize_weather(2, 1, &ClimateParams::default()).unwrap();
        let f = make_forecast(&w, &ForecastNoiseSpec::noiseless(9)).unwrap();
        assert_eq!(f, w);
    }

    #[test]
    fn forecast_hits_drawn_noise_at_hour_boundaries() {
        let w = synthesize_weather(2, 1, &ClimateParams::default()).unwrap();
        let spec = ForecastNoiseSpec::six_hours_ahead(21);
        let f = make_forecast(&w, &spec).unwrap();
        let mut rng = channel_rng(21, channel::T_EXT);
        let knots = hourly_noise_knots(&mut rng, knots_for_steps(w.len()), 0.04, 2.2).unwrap();
        for h in 0..w.len() / STEPS_PER_HOUR {
            let k = h * STEPS_PER_HOUR;
            assert_relative_eq!(f.t_ext[k] - w.t_ext[k], knots[h], epsilon = 1e-12);
        }
        assert!(f.si_tilt.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn negative_std_is_rejected() {
        let w = synthesize_weather(1, 1, &ClimateParams::default()).unwrap();
        let mut spec = ForecastNoiseSpec::one_hour_ahead(1);
        spec.solar_std = -1.0;
        assert!(make_forecast(&w, &spec).is_err());
    }

    #[test]
    fn six_hour_noise_statistics() {
        let mut rng = channel_rng(77, channel::T_EXT);
        let n = 10_000;
        let draws = hourly_noise_knots(&mut rng, n, 0.04, 2.2).unwrap();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.04).abs() <= 0.07, "mean {mean}");
        // Standard error of the sample std is σ/√(2n).
        assert!((var.sqrt() - 2.2).abs() <= 3.0 * 2.2 / (2.0 * n as f64).sqrt(), "std {}", var.sqrt());
    }

    #[test]
    fn ground_noise_three_sigma_band() {
        let mut rng = channel_rng(5, channel::T_GND);
        let draws = hourly_noise_knots(&mut rng, 10_000, 0.0, 0.17).unwrap();
        let inside = draws.iter().filter(|d| d.abs() <= 0.51).count() as f64 / 10_000.0;
        assert!(inside >= 0.995, "{inside}");
    }

    #[test]
    fn solar_gain_noise_examples() {
        let t = SolarGainFactorTable::default();
        assert_relative_eq!(
            solar_gain_noise(100.0, Facade::S, 10.0, 6.10, 0.376, &t).unwrap(),
            229.36,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            solar_gain_noise(100.0, Facade::E, 10.0, 4.80, 0.376, &t).unwrap(),
            101.9712,
            max_relative = 1e-12
        );
        for f in Facade::ALL {
            assert_eq!(solar_gain_noise(0.0, f, 10.0, 5.0, 0.376, &t).unwrap(), 0.0);
        }
        assert!(solar_gain_noise(1.0, Facade::S, 10.0, -1.0, 0.376, &t).is_err());
    }

    #[test]
    fn factor_table_mirrors_afternoon_and_bounds() {
        let t = SolarGainFactorTable::default();
        assert_eq!(t.factor(16.0, Facade::W), 1.474);
        assert_eq!(t.factor(16.0, Facade::E), 0.053);
        assert_eq!(t.factor(15.0, Facade::W), 0.940);
        assert_eq!(t.factor(8.0, Facade::E), 1.474);
        assert_eq!(t.factor(7.0, Facade::E), 0.0);
        assert_eq!(t.factor(7.9, Facade::S), 1.0);
        assert_eq!(t.factor(2.0, Facade::S), 0.0);
        for step in 0..STEPS_PER_DAY {
            let h = step_time_h(step);
            assert_eq!(t.factor(h, Facade::S), if (7.85..16.85).contains(&h) { 1.0 } else { 0.0 });
            for f in Facade::ALL {
                let v = t.factor(h, f);
                assert!((0.0..=1.474).contains(&v));
            }
        }
    }

    #[test]
    fn solar_gain_noise_is_linear() {
        let t = SolarGainFactorTable::default();
        let a = solar_gain_noise(37.0, Facade::W, 14.5, 9.15, 0.376, &t).unwrap();
        let b = solar_gain_noise(74.0, Facade::W, 14.5, 9.15, 0.376, &t).unwrap();
        let c = solar_gain_noise(37.0, Facade::W, 14.5, 18.3, 0.376, &t).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
        assert_relative_eq!(c, 2.0 * a, max_relative = 1e-12);
    }
}
