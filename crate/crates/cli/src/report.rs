//! CSV and JSON rendering. Floats use the shortest text that parses back
//! to the same value.

use std::fmt::Write as _;

use serde::Serialize;

use qudit_purify::purification::{ProtocolKind, ProtocolRun, SweepRow};
use qudit_purify::qlinalg::Ket;

use crate::args::{Format, OutputArgs};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadiusRow {
    pub dim: usize,
    pub protocol: ProtocolKind,
    pub f_min: f64,
    pub f_critical: f64,
}

pub fn float(x: f64) -> String {
    format!("{x:?}")
}

/// `x` with 12 significant digits.
fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

/// Nonzero amplitudes as `|i j⟩  re  im`.
pub fn bell_amplitudes(ket: &Ket, dim: usize) -> String {
    let mut s = String::new();
    for (idx, z) in ket.amplitudes().iter().enumerate() {
        if z.norm() > 1e-12 {
            let clean = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
            writeln!(s, "|{} {}⟩\t{}\t{}", idx / dim, idx % dim, sig12(clean(z.re)), sig12(clean(z.im))).unwrap();
        }
    }
    s
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn purify(run: &ProtocolRun, format: Format) -> String {
    match format {
        Format::Json => json(run),
        Format::Csv => {
            let mut s = String::from("step,fidelity,success_prob,eta\n");
            for r in &run.records {
                writeln!(s, "{},{},{},{}", r.step, float(r.fidelity), float(r.success_probability), float(r.cumulative_efficiency)).unwrap();
            }
            writeln!(s, "# converged={},steps={}", run.converged, run.steps).unwrap();
            s
        }
    }
}

pub fn sweep(rows: &[SweepRow], format: Format) -> String {
    match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut s = String::from("dim,protocol,f_initial,converged,steps,eta\n");
            for r in rows {
                writeln!(s, "{},{},{},{},{},{}", r.dim, r.kind, float(r.initial_fidelity), r.converged, r.steps, float(r.efficiency)).unwrap();
            }
            s
        }
    }
}

pub fn radius(rows: &[RadiusRow], format: Format) -> String {
    match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut s = String::from("dim,protocol,f_min,f_critical\n");
            for r in rows {
                writeln!(s, "{},{},{},{}", r.dim, r.protocol, float(r.f_min), float(r.f_critical)).unwrap();
            }
            s
        }
    }
}

impl OutputArgs {
    pub fn write(&self, text: &str) -> Result<(), String> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}
