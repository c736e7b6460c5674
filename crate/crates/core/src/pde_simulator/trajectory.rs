use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::grid::{self, Grid};
use crate::observer_design::Variant;

/// Field values at one instant; at sampling instants the state after the reset.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    /// ζᵢ for the predictor observer, empty for ZOH.
    pub zeta: Vec<f64>,
    /// The scalar multiplying lᵢ in the observer: ∫cᵢw − ζᵢ (predictor) or
    /// the held ∫kᵢw(tⱼ) − yᵢ(tⱼ) (ZOH).
    pub innovation: Vec<f64>,
    /// Left limit of `innovation` at a sampling instant after the first.
    pub innovation_before: Option<Vec<f64>>,
    /// Index into [`Trajectory::events`] if a sample was taken here.
    pub sample: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleEvent {
    pub t: f64,
    pub y: Vec<f64>,
    pub xi: Vec<f64>,
    /// ζ before and after the reset (predictor only).
    pub zeta_before: Vec<f64>,
    pub zeta_after: Vec<f64>,
    /// Held innovation (ZOH only).
    pub held: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryMeta {
    pub variant: Variant,
    pub nodes: usize,
    pub dt_max: f64,
    pub steps: usize,
    pub diameter: f64,
    pub horizon: f64,
    pub scheme: &'static str,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub meta: TrajectoryMeta,
    pub grid: Grid,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<SampleEvent>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn error(&self, k: usize) -> Vec<f64> {
        grid::sub(&self.snapshots[k].w, &self.snapshots[k].u)
    }

    pub fn error_l2(&self) -> Vec<f64> {
        (0..self.snapshots.len()).map(|k| self.grid.norm(&self.error(k))).collect()
    }

    pub fn error_sup(&self) -> Vec<f64> {
        (0..self.snapshots.len()).map(|k| grid::sup_norm(&self.error(k))).collect()
    }

    pub fn m(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.innovation.len())
    }

    /// CSV with columns t, e_l2, e_sup, then ζᵢ (predictor) or the held
    /// innovations (ZOH), then sample_flag.
    pub fn to_csv(&self) -> String {
        let m = self.m();
        let label = match self.meta.variant {
            Variant::Predictor => "zeta",
            Variant::Zoh => "held",
        };
        let mut out = String::from("t,e_l2,e_sup");
        for i in 1..=m {
            let _ = write!(out, ",{label}_{i}");
        }
        out.push_str(",sample_flag\n");
        let l2 = self.error_l2();
        let sup = self.error_sup();
        for (k, s) in self.snapshots.iter().enumerate() {
            let _ = write!(out, "{},{},{}", fmt(s.t), fmt(l2[k]), fmt(sup[k]));
            let cols = match self.meta.variant {
                Variant::Predictor => &s.zeta,
                Variant::Zoh => &s.innovation,
            };
            for v in cols {
                let _ = write!(out, ",{}", fmt(*v));
            }
            let _ = writeln!(out, ",{}", u8::from(s.sample.is_some()));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    /// One CSV per snapshot (x, u, w, e) in `dir`.
    pub fn write_fields(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (k, s) in self.snapshots.iter().enumerate() {
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("snapshot_{k:06}.csv")))?);
            writeln!(f, "# t={}", fmt(s.t))?;
            writeln!(f, "x,u,w,e")?;
            for i in 0..self.grid.nodes() {
                writeln!(f, "{},{},{},{}", fmt(self.grid.x(i)), fmt(s.u[i]), fmt(s.w[i]), fmt(s.w[i] - s.u[i]))?;
            }
        }
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip an f64.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}
