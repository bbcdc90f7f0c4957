//! Physical inputs, unit conventions, and every closed-form derived quantity
//! of the effective excitation-boson model.
//!
//! All energies are kept as angular frequencies (E/hbar, rad/s) and lengths in
//! micrometers; SI units enter only inside the dimensionless coupling
//! strengths, where the oscillator length requires hbar and the atom mass.

use thiserror::Error;

/// Reduced Planck constant in J s (CODATA).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Mass of a Rb-87 atom in kg (CODATA atomic mass).
pub const RB87_MASS: f64 = 1.443_160_60e-25;

/// Dipole-dipole constant over hbar for Rb-87 at principal quantum number 80,
/// in rad/s um^3.
pub const C3_NQ80_OVER_HBAR: f64 = std::f64::consts::TAU * 40e9;

/// Dipole-dipole constant over hbar for Rb-87 at principal quantum number 50,
/// in rad/s um^3. Approximate: one order of magnitude below the nq = 80 value.
pub const C3_NQ50_OVER_HBAR: f64 = std::f64::consts::TAU * 4e9;

/// Relative tolerance for the |zeta| = 1 singularity check.
pub const ZETA_SINGULAR_TOL: f64 = 1e-12;

/// Relative tolerance within which the detuning must match the sweet-spot
/// value for the sweet-spot-only coupling formula.
pub const SWEET_SPOT_DELTA_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("need at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("singular parameters: |zeta| = {zeta} is 1 within {ZETA_SINGULAR_TOL} relative")]
    SingularZeta { zeta: f64 },
    #[error(
        "sweet-spot detuning required: delta = {delta} rad/s but the sweet spot \
         for this lattice period is {expected} rad/s"
    )]
    SweetSpotRequired { delta: f64, expected: f64 },
}

/// Experimentally settable inputs of the model.
///
/// Frequencies are angular (rad/s); `c3_over_hbar` is in rad/s um^3 and the
/// lattice period `a` in um.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Dipole-dipole constant divided by hbar, rad/s um^3.
    pub c3_over_hbar: f64,
    /// Lattice period, um.
    pub a: f64,
    /// Longitudinal trap angular frequency, rad/s.
    pub omega_b: f64,
    /// Dimensionless dressing parameter.
    pub alpha: f64,
    /// Total detuning as an angular frequency, rad/s.
    pub delta: f64,
    /// Atom mass, kg.
    pub mass: f64,
    /// Number of lattice sites.
    pub n_sites: usize,
    /// Total-boson-number truncation.
    pub max_bosons: usize,
}

impl PhysicalParams {
    /// Parameters with the detuning fixed to the sweet-spot value for the
    /// given lattice period.
    pub fn sweet_spot(
        c3_over_hbar: f64,
        a: f64,
        omega_b: f64,
        alpha: f64,
        mass: f64,
        n_sites: usize,
        max_bosons: usize,
    ) -> Self {
        Self {
            c3_over_hbar,
            a,
            omega_b,
            alpha,
            delta: sweet_spot_detuning(c3_over_hbar, a),
            mass,
            n_sites,
            max_bosons,
        }
    }

    /// Dimensionless ratio zeta of the dipole-dipole energy at distance `a`
    /// to the detuning.
    pub fn zeta(&self) -> f64 {
        self.c3_over_hbar / (self.delta * self.a.powi(3))
    }

    /// Rabi frequency Omega = Delta * alpha, rad/s.
    pub fn omega_rabi(&self) -> f64 {
        self.delta * self.alpha
    }

    /// Hard validity checks on the inputs.
    pub fn validate(&self) -> Result<(), ParamsError> {
        for (name, value) in [("a", self.a), ("omega_b", self.omega_b), ("mass", self.mass)] {
            if !(value > 0.0) {
                return Err(ParamsError::NonPositive { name, value });
            }
        }
        // alpha = 0 is the trivial decoupled limit and stays legal
        if !(self.alpha >= 0.0) {
            return Err(ParamsError::NonPositive { name: "alpha", value: self.alpha });
        }
        if self.n_sites < 2 {
            return Err(ParamsError::TooFewSites(self.n_sites));
        }
        let zeta = self.zeta();
        if (zeta.abs() - 1.0).abs() <= ZETA_SINGULAR_TOL {
            return Err(ParamsError::SingularZeta { zeta });
        }
        Ok(())
    }

    /// Non-fatal diagnostics, e.g. a dressing parameter outside the
    /// perturbative regime.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alpha > 0.2 {
            out.push(format!(
                "alpha = {} is outside the perturbative dressing regime (total \
                 couplings scale as alpha^4; intended range is 0.01-0.1)",
                self.alpha
            ));
        }
        out
    }

    /// True when the detuning equals the sweet-spot value within
    /// [`SWEET_SPOT_DELTA_TOL`] relative.
    pub fn is_sweet_spot(&self) -> bool {
        let expected = sweet_spot_detuning(self.c3_over_hbar, self.a);
        (self.delta - expected).abs() <= SWEET_SPOT_DELTA_TOL * expected.abs()
    }
}

/// Effective model quantities derived from [`PhysicalParams`].
///
/// `eps0`, `t_e`, `omega_d` are energies over hbar (rad/s); `xi_b`, `xi_p`
/// are slopes over hbar (rad/s per um); `g_b`, `g_p`, `lambda_eb` and `zeta`
/// are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub zeta: f64,
    /// Bare on-site energy over hbar.
    pub eps0: f64,
    /// Bare hopping over hbar; negative exactly when |zeta| < 1.
    pub t_e: f64,
    /// On-site (breathing) coupling slope over hbar, per um.
    pub xi_b: f64,
    /// Hopping (bond) coupling slope over hbar, per um.
    pub xi_p: f64,
    /// Dimensionless breathing coupling strength.
    pub g_b: f64,
    /// Dimensionless bond coupling strength.
    pub g_p: f64,
    /// Dimensionless effective coupling: the Brillouin-zone average of the
    /// squared vertex over 2 |t_e| omega_b.
    pub lambda_eb: f64,
    /// Drive resonance (eps0 - 2|t_e|), rad/s. Negative at the sweet spot.
    pub omega_d: f64,
}

/// Oscillator length sqrt(hbar / (2 m omega_b)) in um.
pub fn oscillator_length_um(mass: f64, omega_b: f64) -> f64 {
    (HBAR / (2.0 * mass * omega_b)).sqrt() * 1e6
}

/// Evaluates every derived quantity from the physical inputs.
///
/// Pure function: identical inputs give bit-identical outputs. Fails when the
/// inputs are invalid or |zeta| = 1 within [`ZETA_SINGULAR_TOL`] relative.
pub fn derive(p: &PhysicalParams) -> Result<DerivedParams, ParamsError> {
    p.validate()?;
    let zeta = p.zeta();
    let a4 = p.alpha.powi(4);
    let denom = 1.0 - zeta * zeta;
    let eps0 = a4 * p.delta / denom;
    let t_e = -a4 * p.c3_over_hbar / (p.a.powi(3) * denom);
    let xi_b = 3.0 * a4 * p.delta * zeta * zeta / (p.a * denom * denom);
    let xi_p = 3.0 * a4 * p.c3_over_hbar * (3.0 * zeta * zeta - 1.0) / (p.a.powi(4) * denom * denom);
    let ell = oscillator_length_um(p.mass, p.omega_b);
    let g_b = xi_b * ell / p.omega_b;
    let g_p = xi_p * ell / p.omega_b;
    let lambda_eb = if t_e == 0.0 {
        0.0
    } else {
        p.omega_b * (g_b * g_b + 2.0 * g_p * g_p) / t_e.abs()
    };
    let omega_d = eps0 - 2.0 * t_e.abs();
    Ok(DerivedParams {
        zeta,
        eps0,
        t_e,
        xi_b,
        xi_p,
        g_b,
        g_p,
        lambda_eb,
        omega_d,
    })
}

/// The coupling-balance point zeta_ss = (1 + sqrt(13)) / 6, the positive root
/// of 3 zeta^2 - zeta - 1 = 0 where the two coupling slopes coincide.
pub fn sweet_spot_zeta() -> f64 {
    (1.0 + 13.0_f64.sqrt()) / 6.0
}

/// Detuning that realizes the sweet spot for the given dipole-dipole constant
/// and lattice period: C3 / (hbar zeta_ss a^3), rad/s.
pub fn sweet_spot_detuning(c3_over_hbar: f64, a: f64) -> f64 {
    c3_over_hbar / (sweet_spot_zeta() * a.powi(3))
}

/// Effective coupling strength at the sweet spot, evaluated in closed form
/// from the physical inputs alone:
///
/// ```text
/// lambda = 27/2 alpha^4 C3 / (m omega_b^2 a^5) (3 zss^2 - 1)^2 / (1 - zss^2)^3
/// ```
///
/// This is an independent route to the same number as
/// `3 g^2 omega_b / |t_e|` assembled from [`derive`]. Requires the detuning to
/// sit at the sweet spot.
pub fn lambda_eb_ss(p: &PhysicalParams) -> Result<f64, ParamsError> {
    let expected = sweet_spot_detuning(p.c3_over_hbar, p.a);
    if (p.delta - expected).abs() > SWEET_SPOT_DELTA_TOL * expected.abs() {
        return Err(ParamsError::SweetSpotRequired {
            delta: p.delta,
            expected,
        });
    }
    let zss = sweet_spot_zeta();
    let zss2 = zss * zss;
    // C3 / (m omega_b^2 a^5) with C3 = hbar * c3_over_hbar (J um^3) and a in um:
    // the um^3/um^5 mismatch against SI meters contributes a factor 1e12.
    let energy_ratio = HBAR * p.c3_over_hbar * 1e12 / (p.mass * p.omega_b * p.omega_b * p.a.powi(5));
    Ok(13.5 * p.alpha.powi(4) * energy_ratio * (3.0 * zss2 - 1.0).powi(2)
        / (1.0 - zss2).powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> PhysicalParams {
        PhysicalParams::sweet_spot(C3_NQ80_OVER_HBAR, 4.0, std::f64::consts::TAU * 3e3, 0.1, RB87_MASS, 10, 8)
    }

    #[test]
    fn sweet_spot_zeta_value_and_root() {
        let z = sweet_spot_zeta();
        assert_relative_eq!(z, 0.767_591_879_243_998_2, max_relative = 1e-15);
        assert!((3.0 * z * z - z - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sweet_spot_detuning_matches_quoted_values() {
        // 3-significant-figure checks at the three quoted lattice periods
        let d4 = sweet_spot_detuning(C3_NQ80_OVER_HBAR, 4.0);
        let d10 = sweet_spot_detuning(C3_NQ80_OVER_HBAR, 10.0);
        let d15 = sweet_spot_detuning(C3_NQ80_OVER_HBAR, 15.0);
        assert_relative_eq!(d4, 5.12e9, max_relative = 5e-3);
        assert_relative_eq!(d10, 327.4e6, max_relative = 5e-3);
        assert_relative_eq!(d15, 97.0e6, max_relative = 5e-3);
    }

    #[test]
    fn couplings_balance_at_sweet_spot() {
        let d = derive(&base()).unwrap();
        assert_relative_eq!(d.g_b, d.g_p, max_relative = 1e-12);
        assert_relative_eq!(d.xi_b, d.xi_p, max_relative = 1e-12);
    }

    #[test]
    fn alpha_zero_kills_every_coupling() {
        let p = PhysicalParams { alpha: 0.0, ..base() };
        let d = derive(&p).unwrap();
        assert_eq!(d.eps0, 0.0);
        assert_eq!(d.t_e, 0.0);
        assert_eq!(d.xi_b, 0.0);
        assert_eq!(d.xi_p, 0.0);
        assert_eq!(d.lambda_eb, 0.0);
        assert!(matches!(
            derive(&PhysicalParams { alpha: -0.1, ..base() }),
            Err(ParamsError::NonPositive { name: "alpha", .. })
        ));
    }

    /// Frozen regression fixture: independent scalar evaluation of the
    /// closed-form expressions (30-digit arithmetic, recorded before this
    /// module was written) at c3/hbar = 2pi x 40e9, a = 4 um,
    /// omega_b = 2pi x 3 kHz, alpha = 0.1, sweet-spot detuning, Rb-87 mass.
    #[test]
    fn derive_matches_frozen_fixture() {
        let d = derive(&base()).unwrap();
        assert_relative_eq!(d.zeta, 0.767_591_879_243_998_2, max_relative = 1e-14);
        assert_relative_eq!(d.eps0, 1_245_363.742_693_431, max_relative = 1e-13);
        assert_relative_eq!(d.t_e, -955_931.095_596_389_6, max_relative = 1e-13);
        assert_relative_eq!(d.xi_b, 1_339_630.193_044_007_8, max_relative = 1e-13);
        assert_relative_eq!(d.xi_p, 1_339_630.193_044_007_8, max_relative = 1e-13);
        assert_relative_eq!(d.g_b, 9.894_617_117_920_28, max_relative = 1e-13);
        assert_relative_eq!(d.g_p, 9.894_617_117_920_28, max_relative = 1e-13);
        assert_relative_eq!(d.lambda_eb, 5.791_536_204_220_476, max_relative = 1e-13);
        assert_relative_eq!(d.omega_d, -666_498.448_499_348_5, max_relative = 1e-13);
    }

    #[test]
    fn lambda_routes_agree_and_scale_as_alpha_fourth() {
        let p = base();
        let d = derive(&p).unwrap();
        let lam = lambda_eb_ss(&p).unwrap();
        assert_relative_eq!(lam, 3.0 * d.g_b * d.g_b * p.omega_b / d.t_e.abs(), max_relative = 1e-10);
        assert_relative_eq!(lam, d.lambda_eb, max_relative = 1e-10);
        assert_relative_eq!(lam, 5.791_536_204_220_476, max_relative = 1e-13);

        let doubled = PhysicalParams { alpha: 0.2, ..p };
        assert_relative_eq!(lambda_eb_ss(&doubled).unwrap(), 16.0 * lam, max_relative = 1e-12);
    }

    #[test]
    fn lambda_ss_requires_sweet_spot() {
        let p = PhysicalParams { delta: base().delta * 1.01, ..base() };
        assert!(matches!(lambda_eb_ss(&p), Err(ParamsError::SweetSpotRequired { .. })));
    }

    #[test]
    fn lambda_scales_as_inverse_fifth_power_of_period_at_fixed_zeta() {
        let p1 = base();
        // rescale a and delta together so zeta stays fixed
        let p2 = PhysicalParams {
            a: 8.0,
            delta: p1.delta * (4.0f64 / 8.0).powi(3),
            ..p1
        };
        let l1 = lambda_eb_ss(&p1).unwrap();
        let l2 = lambda_eb_ss(&p2).unwrap();
        assert_relative_eq!(l2 / l1, (4.0f64 / 8.0).powi(5), max_relative = 1e-12);
    }

    #[test]
    fn hopping_sign_follows_zeta() {
        // |zeta| < 1: negative hopping
        let d = derive(&base()).unwrap();
        assert!(d.t_e < 0.0);
        // |zeta| > 1: positive hopping (small detuning)
        let p = PhysicalParams { delta: base().delta * 0.1, ..base() };
        assert!(p.zeta() > 1.0);
        let d = derive(&p).unwrap();
        assert!(d.t_e > 0.0);
    }

    #[test]
    fn singular_zeta_rejected() {
        let p = base();
        let singular = PhysicalParams {
            delta: p.c3_over_hbar / p.a.powi(3), // zeta exactly 1
            ..p
        };
        assert!(matches!(derive(&singular), Err(ParamsError::SingularZeta { .. })));
    }

    #[test]
    fn derive_is_bit_deterministic() {
        let p = base();
        let d1 = derive(&p).unwrap();
        let d2 = derive(&p).unwrap();
        assert_eq!(format!("{d1:?}"), format!("{d2:?}"));
    }

    #[test]
    fn alpha_warning_outside_regime() {
        let p = PhysicalParams { alpha: 0.3, ..base() };
        assert!(!p.warnings().is_empty());
        assert!(base().warnings().is_empty());
    }
}
