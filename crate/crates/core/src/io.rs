//! CSV and JSON formats for profiles, fields and decompositions.
//!
//! Profile CSV: `t,value`, header optional. Field CSV: one row per grid
//! node (see [`FIELD_HEADER`]) plus a JSON sidecar with the operator, the
//! search settings and the located disconnecting intervals.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxops::{classify_regions, DisconnectingInterval, MaximalField, OperatorSpec};
use crate::profile::{build_profile, Domain, Profile};
use crate::sunrise::{lateral_derivative_table, SunriseDecomposition};

pub const FIELD_HEADER: [&str; 11] = [
    "t",
    "value",
    "deriv",
    "label",
    "witness_p1",
    "witness_p2",
    "witness_p3",
    "witness_p4",
    "witness_kind",
    "gap",
    "deriv_method",
];

fn with_path<T>(path: &Path, r: std::result::Result<T, impl std::fmt::Display>) -> Result<T> {
    r.map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Read `t,value` rows. A first row that does not parse is taken as a header.
pub fn read_profile_csv(path: &Path, domain: Domain) -> Result<Profile> {
    let file = with_path(path, File::open(path))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file);
    let mut samples = vec![];
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if rec.len() < 2 {
            return Err(Error::Parse(format!("{}: row {} has {} columns, need t,value", path.display(), k + 1, rec.len())));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(t), Ok(v)) => samples.push((t, v)),
            _ if k == 0 => continue,
            _ => return Err(Error::Parse(format!("{}: row {}: cannot read '{},{}'", path.display(), k + 1, &rec[0], &rec[1]))),
        }
    }
    build_profile(&samples, domain).map_err(|e| match e {
        Error::Io(_) | Error::Parse(_) => e,
        other => Error::Parse(format!("{}: {other}", path.display())),
    })
}

pub fn write_profile_csv(path: &Path, f: &Profile) -> Result<()> {
    let mut w = with_path(path, csv::Writer::from_path(path))?;
    w.write_record(["t", "value"])?;
    for (t, v) in f.breakpoints().iter().zip(f.values()) {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    let mut f = with_path(path, File::create(path))?;
    with_path(path, f.write_all(s.as_bytes()))
}

pub fn write_field_csv(path: &Path, field: &MaximalField) -> Result<()> {
    let mut w = with_path(path, csv::Writer::from_path(path))?;
    w.write_record(FIELD_HEADER)?;
    for i in 0..field.grid.len() {
        let p = field.witnesses[i].params();
        let label = if field.is_disconnecting(i) { "D" } else { "C" };
        w.write_record([
            field.grid[i].to_string(),
            field.values[i].to_string(),
            field.deriv[i].to_string(),
            label.to_string(),
            p[0].to_string(),
            p[1].to_string(),
            p[2].to_string(),
            p[3].to_string(),
            field.witnesses[i].kind_name().to_string(),
            field.gaps[i].to_string(),
            field.deriv_method[i].name().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldSidecar {
    pub op: OperatorSpec,
    pub domain: String,
    pub grid_len: usize,
    pub gap_tol: f64,
    pub connecting_nodes: usize,
    pub disconnecting_nodes: usize,
    pub intervals: Vec<DisconnectingInterval>,
    pub max_value: f64,
    pub profile_max: f64,
}

pub fn field_sidecar(field: &MaximalField) -> FieldSidecar {
    let d = (0..field.grid.len()).filter(|&i| field.is_disconnecting(i)).count();
    FieldSidecar {
        op: field.op.clone(),
        domain: field.f.domain().to_string(),
        grid_len: field.grid.len(),
        gap_tol: field.gap_tol,
        connecting_nodes: field.grid.len() - d,
        disconnecting_nodes: d,
        intervals: classify_regions(field, field.gap_tol),
        max_value: field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        profile_max: field.f.max_value(),
    }
}

/// Lateral profiles with labels, one row per construction node.
pub fn write_lateral_csv(path: &Path, dec: &SunriseDecomposition) -> Result<()> {
    let table = lateral_derivative_table(dec);
    let mut w = with_path(path, csv::Writer::from_path(path))?;
    w.write_record(["t", "f", "field", "lateral_r", "lateral_l", "region", "side_r", "side_l", "deriv_class", "slope_r"])?;
    for k in 0..dec.nodes.len() {
        w.write_record([
            dec.nodes[k].to_string(),
            dec.f_values[k].to_string(),
            dec.field_values[k].to_string(),
            dec.lateral_r[k].to_string(),
            dec.lateral_l[k].to_string(),
            variant_name(&dec.regions[k]),
            variant_name(&dec.side_r[k]),
            variant_name(&dec.side_l[k]),
            variant_name(&table.classes[k]),
            table.slopes[k].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// serde name of a unit enum variant.
fn variant_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}
