pub mod bound;
pub mod finite;
pub mod simulate;
pub mod verify;

use std::path::Path;

use mcb_core::finite_chain::{build_grid_walk, MatrixFile, StochasticMatrix};
use mcb_core::rational;
use mcb_core::Execution;

use crate::error::{CliError, CliResult};

pub struct LoadedChain {
    pub matrix: StochasticMatrix,
    /// Default initial state, 0-based.
    pub default_start: usize,
    pub label: String,
}

pub fn parse_grid(text: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::usage(format!("grid must be written RxC with positive integers, got {text:?}"));
    let (r, c) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if r == 0 || c == 0 {
        return Err(bad());
    }
    Ok((r, c))
}

pub fn load_chain(grid: Option<&str>, matrix: Option<&Path>) -> CliResult<LoadedChain> {
    match (grid, matrix) {
        (Some(g), None) => {
            let (r, c) = parse_grid(g)?;
            Ok(LoadedChain {
                matrix: build_grid_walk(r, c)?,
                default_start: (r / 2) * c + c / 2,
                label: format!("grid {r}x{c}"),
            })
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
            let file: MatrixFile = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("invalid matrix file {}: {e}", path.display())))?;
            Ok(LoadedChain {
                matrix: StochasticMatrix::from_file_form(&file)?,
                default_start: 0,
                label: format!("matrix {}", path.display()),
            })
        }
        _ => Err(CliError::usage("exactly one of --grid or --matrix is required")),
    }
}

/// Convert a 1-based state label to an index.
pub fn state_index(label: Option<usize>, default: usize, size: usize, flag: &str) -> CliResult<usize> {
    match label {
        None => Ok(default),
        Some(s) if (1..=size).contains(&s) => Ok(s - 1),
        Some(s) => Err(CliError::usage(format!("{flag} {s} outside 1..={size}"))),
    }
}

/// Accepts `p/q`, an integer, or a decimal.
pub fn parse_number(s: &str, flag: &str) -> CliResult<f64> {
    if let Ok(r) = rational::parse(s) {
        return Ok(rational::to_f64(&r));
    }
    s.trim().parse::<f64>().map_err(|_| CliError::usage(format!("{flag}: cannot parse {s:?} as a number")))
}

pub fn execution(workers: Option<usize>) -> CliResult<Execution> {
    match workers {
        None => Ok(Execution::default()),
        Some(0) => Err(CliError::usage("--workers must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        Some(w) => Ok(Execution::Parallel { workers: Some(w) }),
    }
}

pub fn labels(states: &[usize]) -> Vec<usize> {
    states.iter().map(|s| s + 1).collect()
}
