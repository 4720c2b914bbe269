use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use stefan_core::collocation::ErrorCurve;
use stefan_core::solver::CoefficientSolution;

use crate::config::ConfigError;

/// Nine significant digits; negative zero prints as zero.
pub fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).map_err(|e| {
            ConfigError(format!("output directory {} is not writable: {e}", path.display()))
        })?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).with_context(|| format!("writing {}", p.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(p)
    }

    /// `name,index,value`; the `t^{-1/2}` flux term is `P` with index −1.
    pub fn coefficients(&self, name: &str, sol: &CoefficientSolution) -> Result<PathBuf> {
        self.csv(name, &["name", "index", "value"], &coefficient_rows(sol))
    }

    pub fn flux(&self, name: &str, curve: &ErrorCurve) -> Result<PathBuf> {
        let rows: Vec<Vec<String>> = curve
            .samples
            .iter()
            .map(|s| {
                vec![
                    num(s.t),
                    num(s.exact),
                    num(s.approx),
                    s.rel_err.map(num).unwrap_or_default(),
                ]
            })
            .collect();
        self.csv(name, &["t", "flux_exact", "flux_approx", "rel_err"], &rows)
    }

    pub fn front(&self, name: &str, times: &[f64], front: &[f64]) -> Result<PathBuf> {
        let rows: Vec<Vec<String>> = times
            .iter()
            .zip(front)
            .map(|(t, s)| vec![num(*t), num(*s)])
            .collect();
        self.csv(name, &["t", "front"], &rows)
    }
}

pub fn coefficient_rows(sol: &CoefficientSolution) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let mut push = |name: &str, index: i64, value: f64| {
        rows.push(vec![name.to_string(), index.to_string(), num(value)]);
    };
    for (name, values) in [
        ("A", &sol.phase1.coeff_plus),
        ("B", &sol.phase1.coeff_minus),
        ("C", &sol.phase2.coeff_plus),
        ("D", &sol.phase2.coeff_minus),
    ] {
        for (n, v) in values.iter().enumerate() {
            push(name, n as i64, *v);
        }
    }
    push("P", -1, sol.flux.singular);
    for (n, v) in sol.flux.p.iter().enumerate() {
        push("P", n as i64, *v);
    }
    for (n, v) in sol.front.alphas.iter().enumerate() {
        push("alpha", n as i64 + 1, *v);
    }
    rows
}

pub fn print_table(rows: &[Vec<String>]) {
    for r in rows {
        println!("{:<6} {:>3} {:>16}", r[0], r[1], r[2]);
    }
}
