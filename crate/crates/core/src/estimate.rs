//! Fault-tolerance volume fits and the modular system size formula.

use serde::Serialize;

use crate::error::{Error, Result};

/// Logical CNOT count of the reference 100-site Heisenberg simulation.
pub const REFERENCE_CNOTS: f64 = 1e7;
/// Logical T count of the reference 100-site Heisenberg simulation.
pub const REFERENCE_T_GATES: f64 = 1e9;

fn log_size(n: f64) -> Result<f64> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::invalid(format!("circuit size must be at least 1, got {n}")));
    }
    Ok(n.log10())
}

/// Physical space-time volume of one logical CNOT in a circuit of size `n`.
pub fn cnot_volume(n: f64) -> Result<f64> {
    Ok(1610.0 + 45.0 * log_size(n)?.powf(2.77))
}

/// Physical space-time volume of one logical T gate in a circuit of size `n`.
pub fn t_volume(n: f64) -> Result<f64> {
    Ok(3.13 + 3220.0 * log_size(n)?.powf(3.20))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FtOverheadReport {
    /// Circuit size used in the fits.
    pub n: f64,
    pub n_cnot: f64,
    pub n_t: f64,
    pub cnot_volume: f64,
    pub t_volume: f64,
    pub total_cnot_volume: f64,
    pub total_t_volume: f64,
}

impl FtOverheadReport {
    pub fn total(&self) -> f64 {
        self.total_cnot_volume + self.total_t_volume
    }
}

/// Volumes for a circuit with the given logical gate counts. The circuit size is
/// `n_cnot + n_t` unless `size` overrides it.
pub fn ft_report(n_cnot: f64, n_t: f64, size: Option<f64>) -> Result<FtOverheadReport> {
    if !(n_cnot >= 0.0) || !(n_t >= 0.0) {
        return Err(Error::invalid("gate counts must be nonnegative"));
    }
    let n = size.unwrap_or(n_cnot + n_t).max(1.0);
    let cv = cnot_volume(n)?;
    let tv = t_volume(n)?;
    Ok(FtOverheadReport {
        n,
        n_cnot,
        n_t,
        cnot_volume: cv,
        t_volume: tv,
        total_cnot_volume: n_cnot * cv,
        total_t_volume: n_t * tv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModularSystem {
    /// Qubits per chip.
    pub q: u64,
    /// Chips per QPU.
    pub m: u64,
    /// Microwave-linked QPUs.
    pub l: u64,
    /// Optically linked groups.
    pub t: u64,
    /// Classical parallelization factor.
    pub p: u64,
}

/// Total qubits `((q·m)·l·t)·p`.
pub fn modular_scale(sys: &ModularSystem) -> Result<u64> {
    let factors = [sys.q, sys.m, sys.l, sys.t, sys.p];
    if factors.contains(&0) {
        return Err(Error::invalid("all modular factors must be at least 1"));
    }
    factors
        .iter()
        .try_fold(1u64, |acc, &f| acc.checked_mul(f))
        .ok_or_else(|| Error::invalid("modular system size overflows"))
}
