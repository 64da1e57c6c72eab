//! Sample and growth bookkeeping of an adaptive fit.

use crate::real::Real;
use std::io::{self, Write};

/// One adaptation event: either a sampling batch or a working-set expansion.
#[derive(Debug, Clone)]
pub struct GrowthRow {
    pub round: usize,
    /// "sample" or "expand".
    pub stage: &'static str,
    pub n_samples: usize,
    /// Index-set size per target after the event.
    pub set_sizes: Vec<usize>,
    /// `‖ε‖₂` per target after the event (`NaN` while undefined).
    pub eps_norms: Vec<f64>,
}

/// Samples, evaluations and the growth history of one adaptive fit.
#[derive(Debug, Clone)]
pub struct SampleLog<T> {
    pub seed: u64,
    pub points: Vec<Vec<T>>,
    /// Concatenated target outputs per sample, aligned with `points`.
    pub outputs: Vec<Vec<T>>,
    pub growth: Vec<GrowthRow>,
}

impl<T: Real> SampleLog<T> {
    /// CSV with `xi_*` columns followed by `y_*` columns, one row per sample.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let m = self.points.first().map_or(0, |p| p.len());
        let n_out = self.outputs.first().map_or(0, |o| o.len());
        let mut header = Vec::with_capacity(m + n_out);
        for i in 1..=m {
            header.push(format!("xi_{i}"));
        }
        for i in 1..=n_out {
            header.push(format!("y_{i}"));
        }
        writeln!(w, "{}", header.join(","))?;
        for (p, o) in self.points.iter().zip(&self.outputs) {
            let row: Vec<String> = p
                .iter()
                .chain(o.iter())
                .map(|v| format!("{:.17e}", v.to_f64_lossy()))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// CSV of the growth history: one row per adaptation event.
    pub fn write_growth_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let n_targets = self.growth.first().map_or(0, |g| g.set_sizes.len());
        let mut header = vec!["round".to_string(), "stage".to_string(), "n_samples".to_string()];
        for t in 0..n_targets {
            header.push(format!("dim_{t}"));
            header.push(format!("eps_{t}"));
        }
        writeln!(w, "{}", header.join(","))?;
        for g in &self.growth {
            let mut row = vec![g.round.to_string(), g.stage.to_string(), g.n_samples.to_string()];
            for t in 0..n_targets {
                row.push(g.set_sizes[t].to_string());
                row.push(format!("{:.6e}", g.eps_norms[t]));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
