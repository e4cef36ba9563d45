//! CSV and JSON emission.

use std::io::{self, Write};
use std::path::Path;

use rfi_qsdc::{Cutoff, PointResult};
use serde::Serialize;

pub const CSV_HEADER: &str = "attenuation_db,distance_km,beta_deg,mu,capacity_bit_per_pulse,c_lower,q_value,\
q_bab,e_bab,q_ba_signal,y1_min,y1_max,qn1_bae,qn2_bae,flags";

fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn csv_row(p: &PointResult) -> String {
    let nums = [
        p.attenuation_db,
        p.distance_km,
        p.beta_deg,
        p.mu,
        p.capacity,
        p.c_lower,
        p.q_value,
        p.q_bab,
        p.e_bab,
        p.q_ba_signal,
        p.y1_min,
        p.y1_max,
        p.qn1_bae,
        p.qn2_bae,
    ];
    let mut row: Vec<String> = nums.iter().map(|&x| sci(x)).collect();
    row.push(p.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(";"));
    row.join(",")
}

pub fn write_csv(mut w: impl Write, points: &[PointResult]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for p in points {
        writeln!(w, "{}", csv_row(p))?;
    }
    w.flush()
}

pub fn write_csv_file(path: &Path, points: &[PointResult]) -> io::Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv(io::BufWriter::new(f), points)
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub command: &'a str,
    pub config: std::collections::BTreeMap<&'static str, String>,
    pub points: &'a [PointResult],
    pub cutoffs: &'a [Cutoff],
    pub flagged_points: usize,
    pub selftest: Option<&'a [crate::selftest::GroupReport]>,
}

pub fn write_json(path: &Path, summary: &Summary<'_>) -> io::Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, summary)?;
    writeln!(w)?;
    w.flush()
}
