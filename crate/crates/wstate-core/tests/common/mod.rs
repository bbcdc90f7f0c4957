//! Shared oracles for the integration tests: a deliberately slow dense
//! Hamiltonian builder written from the literal operator definitions, an
//! analytic enumerator of the free spectrum, and small comparison helpers.
//!
//! Nothing here goes through the production index tables or matrix-free
//! applies; states are explicit (excitation site, occupation vector) pairs
//! indexed through a hash map.

// each integration-test binary uses its own subset of these helpers
#![allow(dead_code)]

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::TAU;
use wstate_core::hamiltonian::CouplingSwitches;
use wstate_core::hilbert::enumerate_boson_configs;
use wstate_core::params::{derive, PhysicalParams};

/// Dense matrix of the one-excitation Hamiltonian assembled ket by ket from
/// the operator definitions. State ordering matches the production basis:
/// excitation site major, lexicographic boson configuration minor.
pub fn slow_dense_real_space(p: &PhysicalParams, switches: CouplingSwitches) -> faer::Mat<Complex64> {
    let d = derive(p).unwrap();
    let n = p.n_sites;
    let m = p.max_bosons;
    let configs = enumerate_boson_configs(n, m).unwrap();
    let index: HashMap<Vec<u8>, usize> =
        configs.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let b = configs.len();
    let dim = n * b;
    let idx = |site: usize, occ: &[u8]| -> usize { site * b + index[occ] };

    let raise = |occ: &[u8], site: usize| -> Option<(Vec<u8>, f64)> {
        let total: usize = occ.iter().map(|&x| x as usize).sum();
        if total >= m {
            return None;
        }
        let mut next = occ.to_vec();
        next[site] += 1;
        Some((next, (occ[site] as f64 + 1.0).sqrt()))
    };
    let lower = |occ: &[u8], site: usize| -> Option<(Vec<u8>, f64)> {
        if occ[site] == 0 {
            return None;
        }
        let mut next = occ.to_vec();
        next[site] -= 1;
        Some((next, (occ[site] as f64).sqrt()))
    };

    let mut h = faer::Mat::<Complex64>::zeros(dim, dim);
    let mut add = |row: usize, col: usize, val: f64| {
        h[(row, col)] += Complex64::from(val);
    };

    for site in 0..n {
        let right = (site + 1) % n;
        let left = (site + n - 1) % n;
        for occ in &configs {
            let col = idx(site, occ);
            let total: usize = occ.iter().map(|&x| x as usize).sum();
            if switches.include_eps0 {
                add(col, col, d.eps0);
            }
            add(col, col, p.omega_b * total as f64);
            // bare hopping: -t_e (c_{n+1}^dag c_n + c_n^dag c_{n+1})
            add(idx(right, occ), col, -d.t_e);
            add(idx(left, occ), col, -d.t_e);
            // on-site coupling: g_b w c^dag c (B_{n+1} - B_{n-1}),
            // B_s = b_s^dag + b_s
            if switches.include_b {
                for (s, sign) in [(right, 1.0), (left, -1.0)] {
                    if let Some((next, f)) = raise(occ, s) {
                        add(idx(site, &next), col, sign * d.g_b * p.omega_b * f);
                    }
                    if let Some((next, f)) = lower(occ, s) {
                        add(idx(site, &next), col, sign * d.g_b * p.omega_b * f);
                    }
                }
            }
            // bond coupling: g_p w (c_{n+1}^dag c_n + h.c.)(B_{n+1} - B_n);
            // the ket has the excitation at `site`, so it hops right through
            // the bond (site, right) and left through the bond (left, site)
            if switches.include_p {
                for (target, s_plus, s_minus) in [(right, right, site), (left, site, left)] {
                    for (s, sign) in [(s_plus, 1.0), (s_minus, -1.0)] {
                        if let Some((next, f)) = raise(occ, s) {
                            add(idx(target, &next), col, sign * d.g_p * p.omega_b * f);
                        }
                        if let Some((next, f)) = lower(occ, s) {
                            add(idx(target, &next), col, sign * d.g_p * p.omega_b * f);
                        }
                    }
                }
            }
        }
    }
    h
}

/// Exact spectrum of one momentum sector of the free theory (couplings off):
/// one excitation carrying momentum K - Q on the bare band plus bosons of
/// total momentum Q, enumerated over boson mode occupations.
pub fn free_sector_spectrum(p: &PhysicalParams, k_index: i64, include_eps0: bool) -> Vec<f64> {
    let d = derive(p).unwrap();
    let n = p.n_sites;
    let k = TAU * k_index as f64 / n as f64;
    let configs = enumerate_boson_configs(n, p.max_bosons).unwrap();
    let mut out: Vec<f64> = configs
        .iter()
        .map(|occ| {
            let total: usize = occ.iter().map(|&x| x as usize).sum();
            let q_sum: usize = occ.iter().enumerate().map(|(j, &x)| j * x as usize).sum();
            let q = TAU * (q_sum % n) as f64 / n as f64;
            let eps = if include_eps0 { d.eps0 } else { 0.0 };
            eps - 2.0 * d.t_e * (k - q).cos() + p.omega_b * total as f64
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Asserts two ascending spectra agree as multisets within `tol`.
pub fn assert_spectra_match(got: &[f64], want: &[f64], tol: f64, label: &str) {
    assert_eq!(got.len(), want.len(), "{label}: spectrum sizes differ");
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        assert!(
            (g - w).abs() <= tol,
            "{label}: level {i} differs: {g} vs {w} (|diff| = {:.3e}, tol {tol:.3e})",
            (g - w).abs()
        );
    }
}

/// Eigenvalues of a Hermitian complex matrix, ascending.
pub fn eigenvalues_of(mat: &faer::Mat<Complex64>) -> Vec<f64> {
    mat.self_adjoint_eigenvalues(faer::Side::Lower).unwrap()
}

/// Eigenvalues of an operator whose matrix is real symmetric (the unreduced
/// real-space Hamiltonian), through the much faster f64 path. Verifies that
/// the assembled columns are indeed real.
pub fn real_symmetric_eigenvalues(op: &dyn wstate_core::linalg::HermitianOp, scale: f64) -> Vec<f64> {
    let n = op.dim();
    let mut mat = faer::Mat::<f64>::zeros(n, n);
    let mut e = vec![Complex64::ZERO; n];
    let mut col = vec![Complex64::ZERO; n];
    for j in 0..n {
        e[j] = Complex64::ONE;
        op.apply_into(&e, &mut col);
        e[j] = Complex64::ZERO;
        for i in 0..n {
            assert!(col[i].im.abs() <= 1e-14 * scale, "complex entry at ({i}, {j})");
            mat[(i, j)] = col[i].re;
        }
    }
    mat.self_adjoint_eigenvalues(faer::Side::Lower).unwrap()
}

/// n choose k without overflow for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Standard sweet-spot parameter set used across the integration tests.
pub fn sweet_params(n: usize, m: usize, alpha: f64, omega_b_hz: f64) -> PhysicalParams {
    PhysicalParams::sweet_spot(
        wstate_core::params::C3_NQ80_OVER_HBAR,
        4.0,
        TAU * omega_b_hz,
        alpha,
        wstate_core::params::RB87_MASS,
        n,
        m,
    )
}
