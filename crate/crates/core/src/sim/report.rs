//! CSV and JSON reports of a run.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::metrics::{Summary, SCHEMA_VERSION};
use super::ScenarioResult;
use crate::building::lti::{INPUT_NAMES, OUTPUT_NAMES};
use crate::building::ZoneFit;
use crate::powerflow::PowerFlows;
use crate::Result;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const FLOWS_FILE: &str = "flows.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MODELS_FILE: &str = "models.json";

/// Column names of `timeseries.csv` for the given zones.
pub fn timeseries_header(zone_names: &[String]) -> Vec<String> {
    let mut h: Vec<String> = ["step", "time_h", "metric", "t_ext_c"].map(String::from).to_vec();
    h.extend(zone_names.iter().map(|z| format!("t_op_{}_c", z.to_lowercase())));
    h.extend(
        [
            "t_lb_c", "t_set_c", "t_ub_c", "soc_pct", "c_buy", "c_sell", "p_pv_kw", "p_load_kw", "p_elec_kw", "p_b_kw",
            "p_hp_kw", "p_fan_kw", "p_bb_kw", "q_hp_kw", "q_bb_kw", "plr_ou", "p_import_kw", "p_export_kw",
        ]
        .map(String::from),
    );
    h
}

pub fn write_timeseries_csv<W: Write>(result: &ScenarioResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(timeseries_header(&result.zone_names))?;
    let start = result.metric_start();
    for r in &result.records {
        let mut row = vec![
            r.step.to_string(),
            r.time_h.to_string(),
            u8::from(r.step >= start).to_string(),
            r.t_ext.to_string(),
        ];
        row.extend(r.t_op[..result.n_zones].iter().map(f64::to_string));
        let f = &r.flows;
        row.extend(
            [
                r.band.lb,
                r.band.set,
                r.band.ub,
                r.soc,
                r.c_buy,
                r.c_sell,
                f.p_pv,
                f.p_load,
                r.p_elec,
                f.p_b,
                r.p_hp,
                r.p_fan,
                r.p_bb,
                r.q_hp,
                r.q_bb,
                r.plr_ou,
                f.grid_import(),
                f.grid_export(),
            ]
            .map(|v| v.to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: one row per step and channel.
pub fn write_flows_csv<W: Write>(result: &ScenarioResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "time_h", "channel", "kw"])?;
    for r in &result.records {
        for (name, v) in PowerFlows::CHANNELS.iter().zip(r.flows.channels()) {
            w.write_record([r.step.to_string(), r.time_h.to_string(), name.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_json<W: Write>(summary: &Summary, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Contents of `models.json`: the identified prediction models.
#[derive(Debug, Serialize)]
pub struct ModelExport<'a> {
    pub schema_version: u32,
    pub state: [&'static str; 2],
    pub inputs: [&'static str; INPUT_NAMES.len()],
    pub outputs: [&'static str; OUTPUT_NAMES.len()],
    pub zones: &'a [ZoneFit],
}

pub fn write_models_json<W: Write>(fits: &[ZoneFit], mut out: W) -> Result<()> {
    let doc = ModelExport {
        schema_version: SCHEMA_VERSION,
        state: ["t_air", "2 t_op - t_air"],
        inputs: INPUT_NAMES,
        outputs: OUTPUT_NAMES,
        zones: fits,
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes `timeseries.csv`, `flows.csv`, `summary.json` and `models.json`
/// into `dir`, creating it if needed, and returns the file paths.
pub fn emit_report(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let paths = [TIMESERIES_FILE, FLOWS_FILE, SUMMARY_FILE, MODELS_FILE].map(|f| dir.join(f));
    write_timeseries_csv(result, BufWriter::new(File::create(&paths[0])?))?;
    write_flows_csv(result, BufWriter::new(File::create(&paths[1])?))?;
    let mut summary = BufWriter::new(File::create(&paths[2])?);
    write_summary_json(&result.summary(), &mut summary)?;
    summary.flush()?;
    let mut models = BufWriter::new(File::create(&paths[3])?);
    write_models_json(&result.identification, &mut models)?;
    models.flush()?;
    Ok(paths.to_vec())
}
