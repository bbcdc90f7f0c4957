//! Matrix-free Hermitian action of the coupled excitation-boson Hamiltonian
//! on real-space and momentum-sector bases, plus the sweet-spot vertex
//! function.
//!
//! The Hamiltonian consists of a free part (on-site energy, nearest-neighbor
//! hopping, flat boson energy) and two coupling terms: the on-site energy of
//! the excitation couples to the displacement difference of its neighbors
//! (strength `g_b`), and the hopping couples to the bond-length change
//! (strength `g_p`). Boson raises that would exceed the total-number
//! truncation annihilate the component; the matching lower is the exact
//! adjoint on the truncated space, so the operator stays Hermitian.

use crate::hilbert::{BosonBasis, ExcitationSector, RealSpaceBasis, SectorBasis};
use crate::linalg::HermitianOp;
use crate::params::{derive, DerivedParams, ParamsError, PhysicalParams};
use num_complex::Complex64;
use std::sync::Arc;

const NO_TARGET: u32 = u32::MAX;

/// Which Hamiltonian pieces an operator includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingSwitches {
    /// On-site (breathing) coupling term.
    pub include_b: bool,
    /// Bond (hopping-modulation) coupling term.
    pub include_p: bool,
    /// Constant on-site energy offset eps0 per excitation.
    pub include_eps0: bool,
}

impl CouplingSwitches {
    pub const ALL: Self = Self { include_b: true, include_p: true, include_eps0: true };
    /// Both couplings, with the constant eps0 offset dropped (the convention
    /// used by the ground-state sweeps).
    pub const NO_EPS0: Self = Self { include_b: true, include_p: true, include_eps0: false };
    /// Free theory.
    pub const FREE: Self = Self { include_b: false, include_p: false, include_eps0: true };
}

impl Default for CouplingSwitches {
    fn default() -> Self {
        Self::ALL
    }
}

/// Precomputed index tables for one boson basis: translations by one site and
/// raise/lower maps per site, shared by every operator on that basis.
#[derive(Debug)]
pub struct ConfigTables {
    bosons: Arc<BosonBasis>,
    /// Rank of T c (occupations shifted one site up).
    tr_plus: Vec<u32>,
    /// Rank of T^(-1) c.
    tr_minus: Vec<u32>,
    /// raise_idx[site * B + c]: rank of c + e_site, or NO_TARGET at the
    /// truncation boundary.
    raise_idx: Vec<u32>,
    raise_amp: Vec<f64>,
    lower_idx: Vec<u32>,
    lower_amp: Vec<f64>,
}

impl ConfigTables {
    pub fn new(bosons: Arc<BosonBasis>) -> Arc<Self> {
        let b = bosons.size();
        let n = bosons.n_sites();
        let mut tr_plus = vec![0u32; b];
        let mut tr_minus = vec![0u32; b];
        for c in 0..b {
            tr_plus[c] = bosons.translated_rank(c, 1) as u32;
            tr_minus[c] = bosons.translated_rank(c, -1) as u32;
        }
        let mut raise_idx = vec![NO_TARGET; n * b];
        let mut raise_amp = vec![0.0; n * b];
        let mut lower_idx = vec![NO_TARGET; n * b];
        let mut lower_amp = vec![0.0; n * b];
        for site in 0..n {
            for c in 0..b {
                if let Some((t, f)) = bosons.raised(c, site) {
                    raise_idx[site * b + c] = t as u32;
                    raise_amp[site * b + c] = f;
                }
                if let Some((t, f)) = bosons.lowered(c, site) {
                    lower_idx[site * b + c] = t as u32;
                    lower_amp[site * b + c] = f;
                }
            }
        }
        Arc::new(Self { bosons, tr_plus, tr_minus, raise_idx, raise_amp, lower_idx, lower_amp })
    }

    pub fn bosons(&self) -> &Arc<BosonBasis> {
        &self.bosons
    }
}

/// Scalar coefficients every apply needs, extracted from the derived
/// parameters.
#[derive(Debug, Clone, Copy)]
struct Coefficients {
    eps0: f64,
    minus_t_e: f64,
    gb_w: f64,
    gp_w: f64,
    omega_b: f64,
}

impl Coefficients {
    fn new(dp: &DerivedParams, omega_b: f64, sw: CouplingSwitches) -> Self {
        Self {
            eps0: if sw.include_eps0 { dp.eps0 } else { 0.0 },
            minus_t_e: -dp.t_e,
            gb_w: if sw.include_b { dp.g_b * omega_b } else { 0.0 },
            gp_w: if sw.include_p { dp.g_p * omega_b } else { 0.0 },
            omega_b,
        }
    }
}

/// Hermitian action of the full Hamiltonian on the one-excitation real-space
/// basis (no symmetry reduction).
#[derive(Debug, Clone)]
pub struct RealSpaceHamiltonian {
    tables: Arc<ConfigTables>,
    coeff: Coefficients,
    switches: CouplingSwitches,
    dp: DerivedParams,
}

impl RealSpaceHamiltonian {
    pub fn from_derived(
        tables: Arc<ConfigTables>,
        dp: DerivedParams,
        omega_b: f64,
        switches: CouplingSwitches,
    ) -> Self {
        let coeff = Coefficients::new(&dp, omega_b, switches);
        Self { tables, coeff, switches, dp }
    }

    pub fn new(
        tables: Arc<ConfigTables>,
        p: &PhysicalParams,
        switches: CouplingSwitches,
    ) -> Result<Self, ParamsError> {
        Ok(Self::from_derived(tables, derive(p)?, p.omega_b, switches))
    }

    pub fn basis(&self) -> RealSpaceBasis {
        RealSpaceBasis::new(self.tables.bosons().clone(), ExcitationSector::One)
    }

    pub fn derived(&self) -> &DerivedParams {
        &self.dp
    }

    pub fn switches(&self) -> CouplingSwitches {
        self.switches
    }
}

impl HermitianOp for RealSpaceHamiltonian {
    fn dim(&self) -> usize {
        let b = self.tables.bosons();
        b.n_sites() * b.size()
    }

    fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        assert_eq!(out.len(), self.dim(), "dimension mismatch");
        out.fill(Complex64::ZERO);
        let t = &*self.tables;
        let bosons = t.bosons();
        let n = bosons.n_sites();
        let b = bosons.size();
        let co = self.coeff;

        for site in 0..n {
            let row = site * b;
            let sp = (site + 1) % n;
            let sm = (site + n - 1) % n;
            let row_p = sp * b;
            let row_m = sm * b;
            for c in 0..b {
                let amp = v[row + c];
                if amp == Complex64::ZERO {
                    continue;
                }
                // free part
                out[row + c] += (co.eps0 + co.omega_b * bosons.total(c) as f64) * amp;
                out[row_p + c] += co.minus_t_e * amp;
                out[row_m + c] += co.minus_t_e * amp;
                // on-site coupling: displacement of the two neighbors
                if co.gb_w != 0.0 {
                    scatter(out, row, t, sp, c, co.gb_w, amp);
                    scatter(out, row, t, sm, c, -co.gb_w, amp);
                }
                // bond coupling: hop right with the bond (site, sp),
                // hop left with the bond (sm, site)
                if co.gp_w != 0.0 {
                    scatter(out, row_p, t, sp, c, co.gp_w, amp);
                    scatter(out, row_p, t, site, c, -co.gp_w, amp);
                    scatter(out, row_m, t, site, c, co.gp_w, amp);
                    scatter(out, row_m, t, sm, c, -co.gp_w, amp);
                }
            }
        }
    }
}

/// Adds `coef * (b_site^dag + b_site) amp` contributions for configuration
/// `c` into the block starting at `row`.
#[inline]
fn scatter(
    out: &mut [Complex64],
    row: usize,
    t: &ConfigTables,
    site: usize,
    c: usize,
    coef: f64,
    amp: Complex64,
) {
    let b = t.bosons.size();
    let k = site * b + c;
    let up = t.raise_idx[k];
    if up != NO_TARGET {
        out[row + up as usize] += coef * t.raise_amp[k] * amp;
    }
    let down = t.lower_idx[k];
    if down != NO_TARGET {
        out[row + down as usize] += coef * t.lower_amp[k] * amp;
    }
}

/// Same contributions as [`scatter`] with the boson-modified configuration
/// translated by one site (composition used by the momentum-sector hopping
/// terms), weighted by a complex phase.
#[inline]
fn scatter_translated(
    out: &mut [Complex64],
    t: &ConfigTables,
    translate: &[u32],
    site: usize,
    c: usize,
    coef: Complex64,
    amp: Complex64,
) {
    let b = t.bosons.size();
    let k = site * b + c;
    let up = t.raise_idx[k];
    if up != NO_TARGET {
        out[translate[up as usize] as usize] += coef * t.raise_amp[k] * amp;
    }
    let down = t.lower_idx[k];
    if down != NO_TARGET {
        out[translate[down as usize] as usize] += coef * t.lower_amp[k] * amp;
    }
}

/// Hermitian action of the Hamiltonian restricted to one total-quasimomentum
/// sector, acting on representative coefficients.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    tables: Arc<ConfigTables>,
    coeff: Coefficients,
    switches: CouplingSwitches,
    dp: DerivedParams,
    k_index: i64,
    k: f64,
}

impl SectorHamiltonian {
    pub fn from_derived(
        tables: Arc<ConfigTables>,
        dp: DerivedParams,
        omega_b: f64,
        k_index: i64,
        switches: CouplingSwitches,
    ) -> Self {
        let basis = SectorBasis::new(tables.bosons().clone(), k_index);
        let coeff = Coefficients::new(&dp, omega_b, switches);
        Self { tables, coeff, switches, dp, k_index: basis.k_index(), k: basis.k() }
    }

    pub fn new(
        tables: Arc<ConfigTables>,
        p: &PhysicalParams,
        k_index: i64,
        switches: CouplingSwitches,
    ) -> Result<Self, ParamsError> {
        Ok(Self::from_derived(tables, derive(p)?, p.omega_b, k_index, switches))
    }

    pub fn basis(&self) -> SectorBasis {
        SectorBasis::new(self.tables.bosons().clone(), self.k_index)
    }

    pub fn k_index(&self) -> i64 {
        self.k_index
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn derived(&self) -> &DerivedParams {
        &self.dp
    }

    pub fn switches(&self) -> CouplingSwitches {
        self.switches
    }
}

impl HermitianOp for SectorHamiltonian {
    fn dim(&self) -> usize {
        self.tables.bosons().size()
    }

    fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        assert_eq!(out.len(), self.dim(), "dimension mismatch");
        out.fill(Complex64::ZERO);
        let t = &*self.tables;
        let bosons = t.bosons();
        let n = bosons.n_sites();
        let b = bosons.size();
        let co = self.coeff;
        let s_last = n - 1;
        // hop phases: moving the excitation one site right multiplies the
        // representative amplitude by exp(-iK) and translates the bosons back
        let ph_right = Complex64::from_polar(1.0, -self.k);
        let ph_left = ph_right.conj();
        let hop_right = co.minus_t_e * ph_right;
        let hop_left = co.minus_t_e * ph_left;
        let gp_right = co.gp_w * ph_right;
        let gp_left = co.gp_w * ph_left;

        for c in 0..b {
            let amp = v[c];
            if amp == Complex64::ZERO {
                continue;
            }
            out[c] += (co.eps0 + co.omega_b * bosons.total(c) as f64) * amp;
            out[t.tr_minus[c] as usize] += hop_right * amp;
            out[t.tr_plus[c] as usize] += hop_left * amp;
            if co.gb_w != 0.0 {
                scatter(out, 0, t, 1 % n, c, co.gb_w, amp);
                scatter(out, 0, t, s_last, c, -co.gb_w, amp);
            }
            if co.gp_w != 0.0 {
                scatter_translated(out, t, &t.tr_minus, 1 % n, c, gp_right, amp);
                scatter_translated(out, t, &t.tr_minus, 0, c, -gp_right, amp);
                scatter_translated(out, t, &t.tr_plus, 0, c, gp_left, amp);
                scatter_translated(out, t, &t.tr_plus, s_last, c, -gp_left, amp);
            }
        }
    }
}

/// Sector operator for momentum index `k_index`, built from physical
/// parameters.
pub fn sector_operator(
    tables: Arc<ConfigTables>,
    p: &PhysicalParams,
    k_index: i64,
    switches: CouplingSwitches,
) -> Result<SectorHamiltonian, ParamsError> {
    SectorHamiltonian::new(tables, p, k_index, switches)
}

/// Sweet-spot coupling vertex `2 i g omega_b (sin k - sin q - sin(k + q))`
/// in rad/s; identically zero along k = pi.
pub fn vertex_ss(g: f64, omega_b: f64, k: f64, q: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * g * omega_b * (k.sin() - q.sin() - (k + q).sin()))
}
