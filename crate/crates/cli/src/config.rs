//! Run configuration and table loading.

use std::fs;
use std::path::{Path, PathBuf};

use thetaform::cohft::{gen_trivial, read_table, ConformalData, CorrelatorTable};

use crate::Failure;

pub const GMAX_LIMIT: u8 = 3;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub gmax: u8,
    /// Largest `d` in recursion checks.
    pub dmax: i32,
    /// Series order for the quasi-Miura and second-bracket pipeline.
    pub order: u32,
    /// Series order for the recursion solver.
    pub solver_order: u32,
    /// Series order for CohFT and tautological-relation checks.
    pub check_order: u32,
    pub laurent_min: Option<i32>,
    pub seed: u64,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(gmax: u8, dmax: i32, order: Option<u32>) -> Result<RunConfig, Failure> {
        if gmax > GMAX_LIMIT {
            return Err(Failure::Input(format!("--gmax {gmax} exceeds the supported maximum {GMAX_LIMIT}")));
        }
        if dmax < 0 {
            return Err(Failure::Input("--dmax must be non-negative".into()));
        }
        if order == Some(0) {
            return Err(Failure::Input("--order must be positive".into()));
        }
        Ok(RunConfig {
            gmax,
            dmax,
            order: order.unwrap_or(8 + 4 * gmax as u32),
            solver_order: order.unwrap_or(default_order(gmax)),
            check_order: order.unwrap_or(10),
            laurent_min: None,
            seed: 0,
            report: None,
        })
    }
}

/// Table size that every default series order of a genus-`gmax` run fits in.
pub fn default_order(gmax: u8) -> u32 {
    10 + 4 * gmax as u32
}

pub struct Loaded {
    pub table: CorrelatorTable,
    pub conformal: Option<ConformalData>,
}

/// Reads `path`, or builds the trivial CohFT up to `gmax` when absent.
pub fn load(path: Option<&Path>, gmax: u8, order: Option<u32>) -> Result<Loaded, Failure> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            let (table, conformal) = read_table(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            if gmax > table.gmax {
                return Err(Failure::Input(format!("--gmax {gmax} but the table stops at genus {}", table.gmax)));
            }
            Ok(Loaded { table, conformal })
        }
        None => {
            let nmax = order.unwrap_or(default_order(gmax)).max(10) as usize;
            let table = gen_trivial(gmax, nmax).map_err(|e| Failure::Input(e.to_string()))?;
            Ok(Loaded { table, conformal: Some(ConformalData::kdv()) })
        }
    }
}
