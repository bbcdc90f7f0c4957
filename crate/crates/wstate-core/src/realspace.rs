//! Nonlinear displacement-dependent on-site energy and hopping amplitude,
//! used to certify the linear coupling slopes `xi_b` and `xi_p` by finite
//! differences.
//!
//! The displacements are treated as a classical periodic field here. The sign
//! convention inside the dressing brackets is the one under which a positive
//! displacement difference u[n+1] - u[n] strengthens the dressed interaction,
//! so the slopes of both quantities at u = 0 equal `xi_b` and `xi_p` from
//! [`crate::params::derive`] exactly.

use crate::params::PhysicalParams;
use thiserror::Error;

/// Default relative guard on the dressing-bracket denominators.
pub const DEFAULT_SINGULARITY_GUARD: f64 = 1e-6;

/// Default bound on |u_n| as a fraction of the lattice period.
pub const DEFAULT_MAX_DISPLACEMENT_FRACTION: f64 = 0.5;

#[derive(Debug, Error)]
pub enum RealSpaceError {
    #[error("displacement u[{index}] = {value} um exceeds {bound} um")]
    DisplacementOutOfRange { index: usize, value: f64, bound: f64 },
    #[error("dressing bracket denominator {denom} within {guard} of the resonance")]
    Singular { denom: f64, guard: f64 },
    #[error("empty displacement field")]
    Empty,
}

/// Classical displacement field with periodic indexing (site N wraps to 0).
/// Entries are in um.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    u: Vec<f64>,
}

impl DisplacementField {
    pub fn new(u: Vec<f64>) -> Result<Self, RealSpaceError> {
        if u.is_empty() {
            return Err(RealSpaceError::Empty);
        }
        Ok(Self { u })
    }

    pub fn zero(n: usize) -> Self {
        Self { u: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Displacement at site `n` with periodic wrap-around.
    pub fn at(&self, n: isize) -> f64 {
        let len = self.u.len() as isize;
        self.u[(n.rem_euclid(len)) as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    /// Cyclic shift by one site: entry n of the result is the old entry n-1.
    pub fn shifted(&self) -> Self {
        let n = self.u.len();
        Self {
            u: (0..n).map(|i| self.u[(i + n - 1) % n]).collect(),
        }
    }

    /// Checks |u_n| < fraction * a for all sites.
    pub fn validate(&self, a: f64, max_fraction: f64) -> Result<(), RealSpaceError> {
        let bound = max_fraction * a;
        for (index, &value) in self.u.iter().enumerate() {
            if value.abs() >= bound {
                return Err(RealSpaceError::DisplacementOutOfRange { index, value, bound });
            }
        }
        Ok(())
    }
}

/// Dressing bracket 1 / (1 - (zeta a^3)^2 / x^6) with a singularity guard on
/// the denominator.
fn bracket(x: f64, zeta_a3: f64, guard: f64) -> Result<f64, RealSpaceError> {
    let ratio = zeta_a3 / x.powi(3);
    let denom = 1.0 - ratio * ratio;
    if denom.abs() < guard {
        return Err(RealSpaceError::Singular { denom, guard });
    }
    Ok(1.0 / denom)
}

/// On-site energy over hbar (rad/s) of an excitation at site `n` for the
/// given displacement field.
///
/// At u = 0 this reduces to `eps0`; its slopes at u = 0 are +xi_b with
/// respect to u[n+1] and -xi_b with respect to u[n-1].
pub fn onsite_energy(
    field: &DisplacementField,
    n: usize,
    p: &PhysicalParams,
) -> Result<f64, RealSpaceError> {
    onsite_energy_guarded(field, n, p, DEFAULT_SINGULARITY_GUARD)
}

/// [`onsite_energy`] with an explicit singularity guard.
pub fn onsite_energy_guarded(
    field: &DisplacementField,
    n: usize,
    p: &PhysicalParams,
    guard: f64,
) -> Result<f64, RealSpaceError> {
    field.validate(p.a, DEFAULT_MAX_DISPLACEMENT_FRACTION)?;
    let n = n as isize;
    let zeta_a3 = p.c3_over_hbar / p.delta; // zeta * a^3, um^3
    let right = bracket(p.a + field.at(n) - field.at(n + 1), zeta_a3, guard)?;
    let left = bracket(p.a + field.at(n - 1) - field.at(n), zeta_a3, guard)?;
    Ok(0.5 * p.alpha.powi(4) * p.delta * (right + left))
}

/// Hopping amplitude over hbar (rad/s) between sites `n` and `n+1` for the
/// given displacement field.
///
/// At u = 0 this reduces to -t_e = |t_e| (for |zeta| < 1); its slope at
/// u = 0 with respect to u[n+1] is +xi_p.
pub fn hopping_amplitude(
    field: &DisplacementField,
    n: usize,
    p: &PhysicalParams,
) -> Result<f64, RealSpaceError> {
    hopping_amplitude_guarded(field, n, p, DEFAULT_SINGULARITY_GUARD)
}

/// [`hopping_amplitude`] with an explicit singularity guard.
pub fn hopping_amplitude_guarded(
    field: &DisplacementField,
    n: usize,
    p: &PhysicalParams,
    guard: f64,
) -> Result<f64, RealSpaceError> {
    field.validate(p.a, DEFAULT_MAX_DISPLACEMENT_FRACTION)?;
    let n = n as isize;
    let zeta_a3 = p.c3_over_hbar / p.delta;
    let bond = p.a + field.at(n + 1) - field.at(n);
    let br = bracket(p.a + field.at(n) - field.at(n + 1), zeta_a3, guard)?;
    Ok(p.alpha.powi(4) * p.c3_over_hbar / bond.powi(3) * br)
}
