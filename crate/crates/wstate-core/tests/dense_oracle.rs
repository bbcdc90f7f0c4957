//! The matrix-free applies against an independent dense construction, the
//! momentum-sector decomposition against the unreduced spectrum, and the
//! Lanczos solver against dense diagonalization.

mod common;

use common::*;
use num_complex::Complex64;
use wstate_core::eigensolver::{dense_spectrum, lowest_eigenpairs, EigOptions};
use wstate_core::hamiltonian::{
    ConfigTables, CouplingSwitches, RealSpaceHamiltonian, SectorHamiltonian,
};
use wstate_core::hilbert::{bz_indices, BosonBasis};
use wstate_core::linalg::{dense_matrix, hermiticity_defect};
use wstate_core::params::derive;

#[test]
fn fast_apply_matches_slow_dense_entrywise() {
    for (n, m) in [(2usize, 2usize), (3, 1), (3, 2), (4, 2)] {
        let p = sweet_params(n, m, 0.07, 3e3);
        let d = derive(&p).unwrap();
        let scale = d.eps0.abs() + 2.0 * d.t_e.abs() + p.omega_b;
        for switches in [CouplingSwitches::ALL, CouplingSwitches::NO_EPS0, CouplingSwitches::FREE] {
            let slow = slow_dense_real_space(&p, switches);
            assert!(hermiticity_defect(&slow) <= 1e-12 * scale, "oracle not hermitian");
            let tables = ConfigTables::new(BosonBasis::new(n, m).unwrap());
            let fast_op = RealSpaceHamiltonian::new(tables, &p, switches).unwrap();
            let fast = dense_matrix(&fast_op);
            let mut worst = 0.0f64;
            for i in 0..slow.nrows() {
                for j in 0..slow.ncols() {
                    worst = worst.max((slow[(i, j)] - fast[(i, j)]).norm());
                }
            }
            assert!(
                worst <= 1e-12 * scale,
                "entrywise defect {worst:.3e} at N={n}, M={m}, {switches:?}"
            );
        }
    }
}

#[test]
fn sector_spectra_union_equals_real_space_spectrum() {
    for (n, m) in [(3usize, 2usize), (4, 2), (5, 1)] {
        let p = sweet_params(n, m, 0.07, 3e3);
        let d = derive(&p).unwrap();
        let real = eigenvalues_of(&slow_dense_real_space(&p, CouplingSwitches::ALL));
        let tables = ConfigTables::new(BosonBasis::new(n, m).unwrap());
        let mut union = Vec::new();
        for j in bz_indices(n) {
            let op = SectorHamiltonian::new(tables.clone(), &p, j, CouplingSwitches::ALL).unwrap();
            union.extend(eigenvalues_of(&dense_matrix(&op)));
        }
        union.sort_by(f64::total_cmp);
        assert_spectra_match(&union, &real, 1e-10 * d.t_e.abs(), &format!("N={n} M={m}"));
    }
}

#[test]
fn free_sector_spectrum_matches_analytic_enumeration() {
    let (n, m) = (6usize, 3usize);
    let p = sweet_params(n, m, 0.07, 3e3);
    let d = derive(&p).unwrap();
    let tables = ConfigTables::new(BosonBasis::new(n, m).unwrap());
    for j in bz_indices(n) {
        let op = SectorHamiltonian::new(tables.clone(), &p, j, CouplingSwitches::FREE).unwrap();
        let got = eigenvalues_of(&dense_matrix(&op));
        let want = free_sector_spectrum(&p, j, true);
        assert_spectra_match(&got, &want, 1e-10 * d.t_e.abs(), &format!("free sector j={j}"));
    }
}

#[test]
fn lanczos_matches_dense_on_sector_operators() {
    let (n, m) = (4usize, 3usize);
    let p = sweet_params(n, m, 0.08, 3e3);
    let d = derive(&p).unwrap();
    let tables = ConfigTables::new(BosonBasis::new(n, m).unwrap());
    for j in bz_indices(n) {
        let op = SectorHamiltonian::new(tables.clone(), &p, j, CouplingSwitches::ALL).unwrap();
        let dense = dense_spectrum(&op, 4000).unwrap();
        let kr = lowest_eigenpairs(&op, &EigOptions { count: 3, ..Default::default() }).unwrap();
        for (a, b) in kr.eigenvalues.iter().zip(&dense.eigenvalues) {
            assert!(
                (a - b).abs() <= 1e-10 * d.t_e.abs(),
                "sector j={j}: {a} vs {b}"
            );
        }
        for r in &kr.residuals {
            assert!(*r <= 1e-10 * kr.eigenvalues[0].abs().max(1.0));
        }
    }
}

#[test]
fn lanczos_finds_free_spectrum_with_heavy_degeneracy() {
    // the free theory has large exact degeneracies; the analytic enumeration
    // pins the three lowest levels per sector
    let (n, m) = (6usize, 2usize);
    let p = sweet_params(n, m, 0.07, 3e3);
    let d = derive(&p).unwrap();
    let tables = ConfigTables::new(BosonBasis::new(n, m).unwrap());
    for j in [0i64, 1, 3] {
        let op = SectorHamiltonian::new(tables.clone(), &p, j, CouplingSwitches::FREE).unwrap();
        let kr = lowest_eigenpairs(&op, &EigOptions { count: 3, ..Default::default() }).unwrap();
        let want = free_sector_spectrum(&p, j, true);
        for (a, b) in kr.eigenvalues.iter().zip(&want) {
            assert!(
                (a - b).abs() <= 1e-10 * d.t_e.abs(),
                "sector j={j}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn dense_spectrum_self_consistency_on_sector_operator() {
    let (n, m) = (3usize, 2usize);
    let p = sweet_params(n, m, 0.06, 3e3);
    let tables = ConfigTables::new(BosonBasis::new(n, m).unwrap());
    let op = SectorHamiltonian::new(tables, &p, 1, CouplingSwitches::ALL).unwrap();
    let dense = dense_spectrum(&op, 100).unwrap();
    let kr = lowest_eigenpairs(&op, &EigOptions { count: 2, ..Default::default() }).unwrap();
    for (a, b) in kr.eigenvalues.iter().zip(&dense.eigenvalues) {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
    }
    // the dense eigenvectors satisfy their own residual contract
    for r in &dense.residuals {
        assert!(*r <= 1e-9 * dense.eigenvalues.last().unwrap().abs().max(1.0));
    }
    // overlap matrix is orthonormal within tolerance
    for i in 0..2 {
        for j in 0..2 {
            let overlap: Complex64 = kr.eigenvectors[i]
                .iter()
                .zip(&kr.eigenvectors[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((overlap.norm() - expect).abs() <= 1e-10);
        }
    }
}
