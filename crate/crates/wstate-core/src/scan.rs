//! Coupling-strength sweeps: ground-state energy and quasimomentum across
//! every momentum sector, level-crossing detection, the lowest K = pi level
//! as a function of the Rabi frequency, and the K = pi spectral gap.
//!
//! The coupling is swept through the dressing parameter alpha (the effective
//! coupling scales as alpha^4), with the detuning pinned to the sweet spot.
//! Ground-state energies are reported without the constant eps0 offset, in
//! units of |t_e|.

use crate::eigensolver::{lowest_eigenpairs, EigOptions, SolverError};
use crate::hamiltonian::{ConfigTables, CouplingSwitches, SectorHamiltonian};
use crate::hilbert::{bz_indices, BasisError, BosonBasis};
use crate::params::{derive, DerivedParams, ParamsError, PhysicalParams};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;
use std::time::SystemTime;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("empty grid")]
    EmptyGrid,
    #[error("grid must be strictly increasing at position {0}")]
    NonIncreasingGrid(usize),
    #[error("detuning must sit at the sweet spot for this scan (delta = {delta}, sweet spot {expected})")]
    NotSweetSpot { delta: f64, expected: f64 },
    #[error("momentum-resolved scans need an even number of sites, got {0}")]
    OddSites(usize),
    #[error("solver failed at alpha = {alpha}, sector j = {k_index}: {source}")]
    Solver {
        alpha: f64,
        k_index: i64,
        source: SolverError,
    },
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Options controlling a sweep.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub eig: EigOptions,
    /// Bracket the level crossing by bisection when the sweep detects one.
    pub refine_critical: bool,
    /// Relative width of the bisection bracket on the effective coupling.
    pub critical_rel_width: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            eig: EigOptions::default(),
            refine_critical: true,
            critical_rel_width: 1e-3,
        }
    }
}

/// One sweep point.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub lambda_eb: f64,
    /// Rabi frequency Omega = Delta alpha, rad/s.
    pub omega_rabi: f64,
    /// (E_gs - eps0) / |t_e|.
    pub e_gs_over_te: f64,
    /// Ground-state total quasimomentum, reported as the non-negative member
    /// of a degenerate +-K pair, rad.
    pub k_gs: f64,
    /// Expected total boson number in the ground state.
    pub boson_number: f64,
    /// Squared overlap of the ground state with the zero-boson K = pi Bloch
    /// state.
    pub w_overlap: f64,
    /// (E_1(K = pi) - E_0(K = pi)) / omega_b.
    pub gap_pi_over_omega_b: f64,
}

/// Sweep metadata recorded alongside the points.
#[derive(Debug, Clone)]
pub struct ScanMeta {
    pub base: PhysicalParams,
    pub n_sites: usize,
    pub max_bosons: usize,
    pub seed: u64,
    pub started: SystemTime,
    pub finished: SystemTime,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    /// Effective coupling at the ground-state level crossing, bracketed to
    /// [`ScanOptions::critical_rel_width`]; `None` when the sweep stays on
    /// one side.
    pub lambda_critical: Option<f64>,
    pub meta: ScanMeta,
}

/// Lowest levels of every momentum sector at one value of alpha.
struct PointSolution {
    dp: DerivedParams,
    /// (k_index, lowest eigenvalue without eps0) per sector.
    sector_energies: Vec<(i64, f64)>,
    /// Index into `sector_energies` of the global minimum.
    gs_at: usize,
    gs_vector: Vec<Complex64>,
    /// Second K = pi level minus the first, when requested.
    gap_pi: Option<f64>,
}

fn sector_seed(seed: u64, k_index: i64) -> u64 {
    seed ^ (k_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn solve_point(
    base: &PhysicalParams,
    alpha: f64,
    tables: &Arc<ConfigTables>,
    opts: &ScanOptions,
    with_gap: bool,
) -> Result<PointSolution, ScanError> {
    let p = PhysicalParams { alpha, ..*base };
    let dp = derive(&p)?;
    let n = p.n_sites;
    let pi_index = (n / 2) as i64;

    let solved: Vec<(i64, f64, Option<Vec<Complex64>>, Option<f64>)> = bz_indices(n)
        .into_par_iter()
        .map(|j| {
            let op = SectorHamiltonian::from_derived(
                tables.clone(),
                dp,
                p.omega_b,
                j,
                CouplingSwitches::NO_EPS0,
            );
            let count = if with_gap && j == pi_index { 2 } else { 1 };
            let eig = lowest_eigenpairs(
                &op,
                &EigOptions {
                    count,
                    seed: sector_seed(opts.eig.seed, j),
                    ..opts.eig
                },
            )
            .map_err(|source| ScanError::Solver { alpha, k_index: j, source })?;
            let gap = if count == 2 {
                Some(eig.eigenvalues[1] - eig.eigenvalues[0])
            } else {
                None
            };
            Ok((j, eig.eigenvalues[0], Some(eig.eigenvectors[0].clone()), gap))
        })
        .collect::<Result<_, ScanError>>()?;

    let gs_at = solved
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .expect("at least one sector");
    let gap_pi = solved.iter().find(|s| s.0 == pi_index).and_then(|s| s.3);
    let gs_vector = solved[gs_at].2.clone().expect("vector kept");
    let sector_energies = solved.iter().map(|s| (s.0, s.1)).collect();
    Ok(PointSolution { dp, sector_energies, gs_at, gs_vector, gap_pi })
}

impl PointSolution {
    fn k_gs_index(&self) -> i64 {
        self.sector_energies[self.gs_at].0
    }

    fn e_gs(&self) -> f64 {
        self.sector_energies[self.gs_at].1
    }
}

fn validate_grid(grid: &[f64]) -> Result<(), ScanError> {
    if grid.is_empty() {
        return Err(ScanError::EmptyGrid);
    }
    for (i, w) in grid.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(ScanError::NonIncreasingGrid(i + 1));
        }
    }
    Ok(())
}

fn require_sweet_spot(base: &PhysicalParams) -> Result<(), ScanError> {
    if !base.is_sweet_spot() {
        return Err(ScanError::NotSweetSpot {
            delta: base.delta,
            expected: crate::params::sweet_spot_detuning(base.c3_over_hbar, base.a),
        });
    }
    Ok(())
}

/// Sweeps alpha over `alpha_grid` and records the global ground state per
/// point: its energy, quasimomentum, boson content, and overlap with the
/// zero-boson K = pi state, plus the K = pi gap.
///
/// Detects the first discontinuity of K_gs along the grid and, when
/// requested, brackets the critical coupling by bisection on the sector
/// label.
pub fn ground_state_scan(
    base: &PhysicalParams,
    alpha_grid: &[f64],
    opts: &ScanOptions,
) -> Result<ScanResult, ScanError> {
    validate_grid(alpha_grid)?;
    require_sweet_spot(base)?;
    if base.n_sites % 2 != 0 {
        return Err(ScanError::OddSites(base.n_sites));
    }
    let started = SystemTime::now();
    let bosons = BosonBasis::new(base.n_sites, base.max_bosons)?;
    let tables = ConfigTables::new(bosons);
    let pi_index = (base.n_sites / 2) as i64;

    let mut points = Vec::with_capacity(alpha_grid.len());
    let mut solutions = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let sol = solve_point(base, alpha, &tables, opts, true)?;
        let dp = sol.dp;
        let te = dp.t_e.abs();
        let j_gs = sol.k_gs_index();
        let k_gs = (j_gs.unsigned_abs() as f64) * std::f64::consts::TAU / base.n_sites as f64;
        let boson_number: f64 = sol
            .gs_vector
            .iter()
            .enumerate()
            .map(|(c, x)| x.norm_sqr() * tables.bosons().total(c) as f64)
            .sum();
        let w_overlap = if j_gs == pi_index {
            sol.gs_vector[0].norm_sqr()
        } else {
            0.0
        };
        points.push(ScanPoint {
            lambda_eb: dp.lambda_eb,
            omega_rabi: PhysicalParams { alpha, ..*base }.omega_rabi(),
            e_gs_over_te: sol.e_gs() / te,
            k_gs,
            boson_number,
            w_overlap,
            gap_pi_over_omega_b: sol.gap_pi.expect("gap requested") / base.omega_b,
        });
        solutions.push(sol);
    }

    // first discontinuity of the ground-state sector along the grid
    let mut lambda_critical = None;
    let jump = solutions
        .windows(2)
        .position(|w| w[0].k_gs_index().abs() != w[1].k_gs_index().abs());
    if let Some(i) = jump {
        let mut lo = alpha_grid[i];
        let mut hi = alpha_grid[i + 1];
        let pi_side = solutions[i].k_gs_index().abs();
        if opts.refine_critical {
            // bisection on the discrete sector label; the effective coupling
            // grows monotonically with alpha
            loop {
                let lam_lo = lambda_at(base, lo)?;
                let lam_hi = lambda_at(base, hi)?;
                if (lam_hi - lam_lo) <= opts.critical_rel_width * lam_hi {
                    lambda_critical = Some(0.5 * (lam_lo + lam_hi));
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let sol = solve_point(base, mid, &tables, opts, false)?;
                if sol.k_gs_index().abs() == pi_side {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        } else {
            lambda_critical = Some(0.5 * (lambda_at(base, lo)? + lambda_at(base, hi)?));
        }
    }

    Ok(ScanResult {
        points,
        lambda_critical,
        meta: ScanMeta {
            base: *base,
            n_sites: base.n_sites,
            max_bosons: base.max_bosons,
            seed: opts.eig.seed,
            started,
            finished: SystemTime::now(),
        },
    })
}

fn lambda_at(base: &PhysicalParams, alpha: f64) -> Result<f64, ScanError> {
    Ok(derive(&PhysicalParams { alpha, ..*base })?.lambda_eb)
}

/// One point of the lowest-K = pi-level curve.
#[derive(Debug, Clone, Copy)]
pub struct PiCurvePoint {
    /// Rabi frequency Omega, rad/s.
    pub omega_rabi: f64,
    pub lambda_eb: f64,
    /// Lowest K = pi eigenvalue minus eps0, in units of |t_e|.
    pub e_pi_over_te: f64,
}

/// Lowest K = pi eigenvalue against the Rabi frequency. The curve is flat at
/// -2 below the sector crossing and drops below afterwards.
pub fn pi_sector_curve(
    base: &PhysicalParams,
    omega_grid: &[f64],
    opts: &ScanOptions,
) -> Result<Vec<PiCurvePoint>, ScanError> {
    validate_grid(omega_grid)?;
    require_sweet_spot(base)?;
    if base.n_sites % 2 != 0 {
        return Err(ScanError::OddSites(base.n_sites));
    }
    let bosons = BosonBasis::new(base.n_sites, base.max_bosons)?;
    let tables = ConfigTables::new(bosons);
    let pi_index = (base.n_sites / 2) as i64;

    omega_grid
        .par_iter()
        .map(|&omega| {
            let alpha = omega / base.delta;
            let p = PhysicalParams { alpha, ..*base };
            let dp = derive(&p)?;
            let op = SectorHamiltonian::from_derived(
                tables.clone(),
                dp,
                p.omega_b,
                pi_index,
                CouplingSwitches::NO_EPS0,
            );
            let eig = lowest_eigenpairs(
                &op,
                &EigOptions { seed: sector_seed(opts.eig.seed, pi_index), ..opts.eig },
            )
            .map_err(|source| ScanError::Solver { alpha, k_index: pi_index, source })?;
            Ok(PiCurvePoint {
                omega_rabi: omega,
                lambda_eb: dp.lambda_eb,
                e_pi_over_te: eig.eigenvalues[0] / dp.t_e.abs(),
            })
        })
        .collect()
}

/// Spectral gap of the K = pi sector in units of the boson energy.
pub fn spectral_gap_pi(p: &PhysicalParams, opts: &ScanOptions) -> Result<f64, ScanError> {
    if p.n_sites % 2 != 0 {
        return Err(ScanError::OddSites(p.n_sites));
    }
    let dp = derive(p)?;
    let bosons = BosonBasis::new(p.n_sites, p.max_bosons)?;
    let tables = ConfigTables::new(bosons);
    let pi_index = (p.n_sites / 2) as i64;
    let op = SectorHamiltonian::from_derived(
        tables,
        dp,
        p.omega_b,
        pi_index,
        CouplingSwitches::NO_EPS0,
    );
    let eig = lowest_eigenpairs(
        &op,
        &EigOptions {
            count: 2,
            seed: sector_seed(opts.eig.seed, pi_index),
            ..opts.eig
        },
    )
    .map_err(|source| ScanError::Solver { alpha: p.alpha, k_index: pi_index, source })?;
    Ok((eig.eigenvalues[1] - eig.eigenvalues[0]) / p.omega_b)
}

/// Default convergence threshold on |E(M+2) - E(M)| in units of |t_e|.
pub const TRUNCATION_THRESHOLD_OVER_TE: f64 = 1e-6;

/// Ground-state energy shift when the boson truncation is raised from
/// `max_bosons` to `max_bosons + 2` at fixed alpha.
#[derive(Debug, Clone, Copy)]
pub struct TruncationShift {
    pub e_low: f64,
    pub e_high: f64,
    /// |E(M+2) - E(M)| / |t_e|.
    pub rel_change_over_te: f64,
}

impl TruncationShift {
    /// True when the shift is below [`TRUNCATION_THRESHOLD_OVER_TE`].
    pub fn is_converged(&self) -> bool {
        self.rel_change_over_te < TRUNCATION_THRESHOLD_OVER_TE
    }
}

/// The truncation-convergence probe: solves the global ground state at M and
/// at M + 2 and reports the energy shift in units of |t_e|.
pub fn truncation_convergence(
    base: &PhysicalParams,
    alpha: f64,
    opts: &ScanOptions,
) -> Result<TruncationShift, ScanError> {
    let dp = derive(&PhysicalParams { alpha, ..*base })?;
    let mut energies = [0.0f64; 2];
    for (slot, m) in [base.max_bosons, base.max_bosons + 2].iter().enumerate() {
        let p = PhysicalParams { max_bosons: *m, ..*base };
        let bosons = BosonBasis::new(p.n_sites, p.max_bosons)?;
        let tables = ConfigTables::new(bosons);
        let sol = solve_point(&p, alpha, &tables, opts, false)?;
        energies[slot] = sol.e_gs();
    }
    Ok(TruncationShift {
        e_low: energies[0],
        e_high: energies[1],
        rel_change_over_te: (energies[1] - energies[0]).abs() / dp.t_e.abs(),
    })
}
