use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONVERGENCE_HEADER: &str = "generation,best_fitness,mean_fitness,best_popcount,evaluations";

/// One row of the convergence trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    /// Best fitness seen so far, over all generations.
    pub best_fitness: f64,
    /// Mean fitness of this generation's population.
    pub mean_fitness: f64,
    pub best_popcount: usize,
    /// Cumulative count of distinct masks trained.
    pub evaluations: usize,
}

pub fn convergence_csv(log: &[GenerationLog]) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for g in log {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            g.generation, g.best_fitness, g.mean_fitness, g.best_popcount, g.evaluations
        ));
    }
    out
}

pub fn write_convergence_csv(path: &Path, log: &[GenerationLog]) -> Result<()> {
    std::fs::write(path, convergence_csv(log)).map_err(|e| Error::io(path, e))
}

pub fn parse_convergence_csv(text: &str) -> Result<Vec<GenerationLog>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CONVERGENCE_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                column: "-".into(),
                message: format!("expected header `{CONVERGENCE_HEADER}`"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let err = |message: String| Error::Parse {
            line: i + 1,
            column: "-".into(),
            message,
        };
        if fields.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("`{s}`: {e}")));
        let real = |s: &str| s.parse::<f64>().map_err(|e| err(format!("`{s}`: {e}")));
        out.push(GenerationLog {
            generation: int(fields[0])?,
            best_fitness: real(fields[1])?,
            mean_fitness: real(fields[2])?,
            best_popcount: int(fields[3])?,
            evaluations: int(fields[4])?,
        });
    }
    Ok(out)
}
