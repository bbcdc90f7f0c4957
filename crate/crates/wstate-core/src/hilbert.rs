//! Enumeration of the one-excitation x truncated-boson Hilbert space,
//! total-quasimomentum sector bases, and state indexing.
//!
//! Boson configurations are occupation vectors over the N sites with total
//! occupation at most M, ordered lexicographically. One-excitation states are
//! labelled by the excitation site (major index) and the boson configuration
//! (minor index). Momentum sectors pin the excitation at site 0: every
//! translation orbit of a one-excitation state has length exactly N, so each
//! boson configuration is a representative in every sector.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::sync::Arc;
use thiserror::Error;

/// Largest basis dimension the constructors accept by default.
pub const DEFAULT_MAX_DIM: usize = 4_000_000;

/// Non-eigenstate flag threshold on |<T>| in [`translation_eigenvalue`].
pub const TRANSLATION_EIGENSTATE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("basis dimension {dim} exceeds the configured maximum {max}")]
    Capacity { dim: usize, max: usize },
    #[error("momentum k = {k} is not 2 pi j / N for integer j with N = {n_sites}")]
    IncommensurateMomentum { k: f64, n_sites: usize },
    #[error("need at least one site")]
    NoSites,
    #[error("vector length {got} does not match basis dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

/// All boson occupation vectors of length `n_sites` with total at most
/// `max_bosons`, in lexicographic order, with O(N) rank/unrank support.
#[derive(Debug)]
pub struct BosonBasis {
    n_sites: usize,
    max_bosons: usize,
    size: usize,
    /// Configurations stored back to back, `n_sites` entries each.
    flat: Vec<u8>,
    totals: Vec<u8>,
    /// Pascal triangle: binom[i][j] = C(i, j).
    binom: Vec<Vec<usize>>,
}

impl BosonBasis {
    pub fn new(n_sites: usize, max_bosons: usize) -> Result<Arc<Self>, BasisError> {
        Self::with_max_dim(n_sites, max_bosons, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(
        n_sites: usize,
        max_bosons: usize,
        max_dim: usize,
    ) -> Result<Arc<Self>, BasisError> {
        if n_sites == 0 {
            return Err(BasisError::NoSites);
        }
        assert!(max_bosons <= u8::MAX as usize, "occupations are stored as u8");
        let order = n_sites + max_bosons;
        let mut binom: Vec<Vec<usize>> = Vec::with_capacity(order + 1);
        for i in 0..=order {
            let mut row = vec![0usize; order + 1];
            row[0] = 1;
            for j in 1..=i {
                let prev: &Vec<usize> = &binom[i - 1];
                row[j] = prev[j - 1].saturating_add(prev[j]);
            }
            binom.push(row);
        }
        let size = binom[order][max_bosons];
        if size > max_dim {
            return Err(BasisError::Capacity { dim: size, max: max_dim });
        }

        let mut flat = Vec::with_capacity(size * n_sites);
        let mut totals = Vec::with_capacity(size);
        let mut occ = vec![0u8; n_sites];
        loop {
            flat.extend_from_slice(&occ);
            totals.push(occ.iter().map(|&x| x as u16).sum::<u16>() as u8);
            if !next_config(&mut occ, max_bosons) {
                break;
            }
        }
        debug_assert_eq!(totals.len(), size);

        Ok(Arc::new(Self { n_sites, max_bosons, size, flat, totals, binom }))
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn max_bosons(&self) -> usize {
        self.max_bosons
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Occupation vector of the configuration with the given rank.
    pub fn config(&self, rank: usize) -> &[u8] {
        &self.flat[rank * self.n_sites..(rank + 1) * self.n_sites]
    }

    /// Total boson number of the configuration with the given rank.
    pub fn total(&self, rank: usize) -> usize {
        self.totals[rank] as usize
    }

    /// Number of occupation vectors of length `len` with total at most
    /// `budget`.
    fn tail_count(&self, len: usize, budget: usize) -> usize {
        self.binom[len + budget][budget]
    }

    /// Lexicographic rank of an occupation vector.
    pub fn rank(&self, occ: &[u8]) -> usize {
        debug_assert_eq!(occ.len(), self.n_sites);
        let mut rank = 0usize;
        let mut budget = self.max_bosons;
        for (i, &m) in occ.iter().enumerate() {
            let tail = self.n_sites - i - 1;
            for v in 0..m as usize {
                rank += self.tail_count(tail, budget - v);
            }
            budget -= m as usize;
        }
        rank
    }

    /// Rank of the configuration translated by `shift` sites: entry `i` of
    /// the result is entry `i - shift` (mod N) of the input.
    pub fn translated_rank(&self, rank: usize, shift: isize) -> usize {
        let n = self.n_sites as isize;
        let shift = shift.rem_euclid(n) as usize;
        if shift == 0 {
            return rank;
        }
        let src = self.config(rank);
        let mut occ = vec![0u8; self.n_sites];
        for (i, slot) in occ.iter_mut().enumerate() {
            *slot = src[(i + self.n_sites - shift) % self.n_sites];
        }
        self.rank(&occ)
    }

    /// Rank and matrix element sqrt(m_site + 1) of raising one boson at
    /// `site`; `None` when the raise leaves the truncated space.
    pub fn raised(&self, rank: usize, site: usize) -> Option<(usize, f64)> {
        if self.total(rank) >= self.max_bosons {
            return None;
        }
        let mut occ = self.config(rank).to_vec();
        let m = occ[site] as f64;
        occ[site] += 1;
        Some((self.rank(&occ), (m + 1.0).sqrt()))
    }

    /// Rank and matrix element sqrt(m_site) of removing one boson at `site`;
    /// `None` on an empty site.
    pub fn lowered(&self, rank: usize, site: usize) -> Option<(usize, f64)> {
        let mut occ = self.config(rank).to_vec();
        if occ[site] == 0 {
            return None;
        }
        let m = occ[site] as f64;
        occ[site] -= 1;
        Some((self.rank(&occ), m.sqrt()))
    }
}

/// Advances `occ` to the lexicographically next configuration with total at
/// most `max_bosons`; returns false after the last one.
fn next_config(occ: &mut [u8], max_bosons: usize) -> bool {
    let total: usize = occ.iter().map(|&x| x as usize).sum();
    let n = occ.len();
    if total < max_bosons {
        occ[n - 1] += 1;
        return true;
    }
    // find the rightmost position we can increment after zeroing its tail
    for i in (0..n).rev() {
        if occ[i] == 0 {
            continue;
        }
        // zero positions i..n, then increment position i-1 if it exists
        if i == 0 {
            return false;
        }
        for slot in occ.iter_mut().skip(i) {
            *slot = 0;
        }
        occ[i - 1] += 1;
        return true;
    }
    false
}

/// Complete lexicographic listing of boson configurations; thin convenience
/// wrapper over [`BosonBasis`].
pub fn enumerate_boson_configs(
    n_sites: usize,
    max_bosons: usize,
) -> Result<Vec<Vec<u8>>, BasisError> {
    let basis = BosonBasis::new(n_sites, max_bosons)?;
    Ok((0..basis.size()).map(|i| basis.config(i).to_vec()).collect())
}

/// Which excitation-number block a real-space basis spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitationSector {
    Zero,
    One,
}

/// Real-space basis over a fixed excitation sector, without symmetry
/// reduction.
///
/// One-excitation states are indexed as `site * B + config_rank` with
/// `B` the boson-basis size; zero-excitation states by the configuration
/// rank alone.
#[derive(Debug, Clone)]
pub struct RealSpaceBasis {
    bosons: Arc<BosonBasis>,
    sector: ExcitationSector,
}

impl RealSpaceBasis {
    pub fn new(bosons: Arc<BosonBasis>, sector: ExcitationSector) -> Self {
        Self { bosons, sector }
    }

    pub fn bosons(&self) -> &Arc<BosonBasis> {
        &self.bosons
    }

    pub fn sector(&self) -> ExcitationSector {
        self.sector
    }

    pub fn n_sites(&self) -> usize {
        self.bosons.n_sites()
    }

    pub fn size(&self) -> usize {
        match self.sector {
            ExcitationSector::Zero => self.bosons.size(),
            ExcitationSector::One => self.bosons.n_sites() * self.bosons.size(),
        }
    }

    /// Ordinal of the state with the given excitation site (`None` in the
    /// zero-excitation sector) and configuration rank.
    pub fn index(&self, site: Option<usize>, config_rank: usize) -> usize {
        match (self.sector, site) {
            (ExcitationSector::Zero, None) => config_rank,
            (ExcitationSector::One, Some(n)) => n * self.bosons.size() + config_rank,
            _ => panic!("excitation site inconsistent with basis sector"),
        }
    }

    /// Inverse of [`Self::index`].
    pub fn state(&self, index: usize) -> (Option<usize>, usize) {
        match self.sector {
            ExcitationSector::Zero => (None, index),
            ExcitationSector::One => {
                let b = self.bosons.size();
                (Some(index / b), index % b)
            }
        }
    }

    /// Applies the one-site translation operator T to a state vector.
    pub fn translate_vector(&self, v: &[Complex64]) -> Result<Vec<Complex64>, BasisError> {
        if v.len() != self.size() {
            return Err(BasisError::DimensionMismatch { got: v.len(), expected: self.size() });
        }
        let b = self.bosons.size();
        let n = self.bosons.n_sites();
        let mut out = vec![Complex64::ZERO; v.len()];
        match self.sector {
            ExcitationSector::Zero => {
                for c in 0..b {
                    out[self.bosons.translated_rank(c, 1)] = v[c];
                }
            }
            ExcitationSector::One => {
                for site in 0..n {
                    let target_site = (site + 1) % n;
                    for c in 0..b {
                        let tc = self.bosons.translated_rank(c, 1);
                        out[target_site * b + tc] = v[site * b + c];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Brillouin-zone indices j with K = 2 pi j / N and j in (-N/2, N/2].
pub fn bz_indices(n_sites: usize) -> Vec<i64> {
    let n = n_sites as i64;
    let lo = -(n - 1) / 2; // N even: -(N/2 - 1); N odd: -(N-1)/2
    (lo..=n / 2).collect()
}

/// Total-quasimomentum sector basis with the excitation pinned at site 0.
///
/// The embedded state of representative `c` is
/// `N^(-1/2) sum_n exp(i K n) T^n |exc at 0; c>`, so each embedded vector is
/// a translation eigenvector with eigenvalue `exp(-i K)`.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    bosons: Arc<BosonBasis>,
    k_index: i64,
}

impl SectorBasis {
    /// Sector for K = 2 pi j / N; `k_index` is normalized into (-N/2, N/2].
    pub fn new(bosons: Arc<BosonBasis>, k_index: i64) -> Self {
        let n = bosons.n_sites() as i64;
        let mut j = k_index.rem_euclid(n);
        if 2 * j > n {
            j -= n;
        }
        Self { bosons, k_index: j }
    }

    /// Sector for an explicit momentum value, which must be commensurate with
    /// the lattice.
    pub fn for_momentum(bosons: Arc<BosonBasis>, k: f64) -> Result<Self, BasisError> {
        let n = bosons.n_sites();
        let j_real = k * n as f64 / TAU;
        let j = j_real.round();
        if (j_real - j).abs() > 1e-9 {
            return Err(BasisError::IncommensurateMomentum { k, n_sites: n });
        }
        Ok(Self::new(bosons, j as i64))
    }

    pub fn bosons(&self) -> &Arc<BosonBasis> {
        &self.bosons
    }

    pub fn k_index(&self) -> i64 {
        self.k_index
    }

    /// Momentum K in radians per site, in (-pi, pi].
    pub fn k(&self) -> f64 {
        TAU * self.k_index as f64 / self.bosons.n_sites() as f64
    }

    pub fn size(&self) -> usize {
        self.bosons.size()
    }

    /// Embeds sector coefficients into the one-excitation real-space basis.
    pub fn embed(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>, BasisError> {
        if coeffs.len() != self.size() {
            return Err(BasisError::DimensionMismatch { got: coeffs.len(), expected: self.size() });
        }
        let n = self.bosons.n_sites();
        let b = self.bosons.size();
        let k = self.k();
        let norm = 1.0 / (n as f64).sqrt();
        let mut out = vec![Complex64::ZERO; n * b];
        for (c, amp) in coeffs.iter().enumerate() {
            if *amp == Complex64::ZERO {
                continue;
            }
            for site in 0..n {
                let phase = Complex64::from_polar(norm, k * site as f64);
                let tc = self.bosons.translated_rank(c, site as isize);
                out[site * b + tc] += phase * amp;
            }
        }
        Ok(out)
    }
}

/// Translation expectation of a state vector.
#[derive(Debug, Clone, Copy)]
pub struct TranslationExpectation {
    /// <psi|T|psi> / <psi|psi>.
    pub value: Complex64,
    /// True when |value| is within [`TRANSLATION_EIGENSTATE_TOL`] of 1.
    pub is_eigenstate: bool,
    /// Momentum -arg(value) folded into (-pi, pi].
    pub k: f64,
}

/// Measures `<psi|T|psi> / <psi|psi>`; flags inputs that are not translation
/// eigenvectors.
pub fn translation_eigenvalue(
    v: &[Complex64],
    basis: &RealSpaceBasis,
) -> Result<TranslationExpectation, BasisError> {
    let tv = basis.translate_vector(v)?;
    let mut dot = Complex64::ZERO;
    let mut norm2 = 0.0;
    for (a, b) in v.iter().zip(tv.iter()) {
        dot += a.conj() * b;
        norm2 += a.norm_sqr();
    }
    let value = dot / norm2;
    let mut k = -value.arg();
    if k <= -std::f64::consts::PI {
        k += TAU;
    }
    Ok(TranslationExpectation {
        value,
        is_eigenstate: value.norm() >= 1.0 - TRANSLATION_EIGENSTATE_TOL,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn small_enumeration_is_exact() {
        let configs = enumerate_boson_configs(2, 1).unwrap();
        assert_eq!(configs, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        let configs = enumerate_boson_configs(1, 0).unwrap();
        assert_eq!(configs, vec![vec![0]]);
    }

    /// Independent counter: direct recursion over site occupations.
    fn count_recursive(sites: usize, budget: usize) -> usize {
        if sites == 0 {
            return 1;
        }
        (0..=budget).map(|v| count_recursive(sites - 1, budget - v)).sum()
    }

    #[test]
    fn paper_scale_dimension() {
        let basis = BosonBasis::new(10, 8).unwrap();
        assert_eq!(basis.size(), 43758);
        assert_eq!(basis.size(), count_recursive(10, 8));
    }

    #[test]
    fn enumeration_is_sorted_and_duplicate_free() {
        let configs = enumerate_boson_configs(4, 3).unwrap();
        for w in configs.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(configs.len(), count_recursive(4, 3));
    }

    #[test]
    fn rank_inverts_config() {
        let basis = BosonBasis::new(4, 3).unwrap();
        for i in 0..basis.size() {
            assert_eq!(basis.rank(basis.config(i)), i);
        }
    }

    #[test]
    fn capacity_error() {
        assert!(matches!(
            BosonBasis::with_max_dim(10, 8, 1000),
            Err(BasisError::Capacity { dim: 43758, max: 1000 })
        ));
    }

    #[test]
    fn raise_lower_are_mutually_inverse() {
        let basis = BosonBasis::new(3, 2).unwrap();
        for i in 0..basis.size() {
            for site in 0..3 {
                if let Some((j, f_up)) = basis.raised(i, site) {
                    let (back, f_down) = basis.lowered(j, site).unwrap();
                    assert_eq!(back, i);
                    assert_relative_eq!(f_up, f_down, max_relative = 1e-15);
                } else {
                    assert_eq!(basis.total(i), basis.max_bosons());
                }
            }
        }
    }

    #[test]
    fn sector_sizes_and_completeness() {
        let bosons = BosonBasis::new(2, 1).unwrap();
        let sector = SectorBasis::new(bosons.clone(), 1); // K = pi
        assert_eq!(sector.size(), 3);
        assert_abs_diff_eq!(sector.k(), PI);

        let bosons = BosonBasis::new(10, 8).unwrap();
        for j in bz_indices(10) {
            assert_eq!(SectorBasis::new(bosons.clone(), j).size(), 43758);
        }
        let real = RealSpaceBasis::new(bosons.clone(), ExcitationSector::One);
        let total: usize = bz_indices(10)
            .into_iter()
            .map(|j| SectorBasis::new(bosons.clone(), j).size())
            .sum();
        assert_eq!(total, real.size());
    }

    #[test]
    fn bz_indices_cover_interval() {
        assert_eq!(bz_indices(4), vec![-1, 0, 1, 2]);
        assert_eq!(bz_indices(5), vec![-2, -1, 0, 1, 2]);
        assert_eq!(bz_indices(2), vec![0, 1]);
    }

    #[test]
    fn embedded_vectors_are_translation_eigenvectors() {
        let bosons = BosonBasis::new(5, 2).unwrap();
        let real = RealSpaceBasis::new(bosons.clone(), ExcitationSector::One);
        for j in bz_indices(5) {
            let sector = SectorBasis::new(bosons.clone(), j);
            let mut coeffs = vec![Complex64::ZERO; sector.size()];
            coeffs[3] = Complex64::new(0.6, -0.2);
            coeffs[7] = Complex64::new(0.1, 0.9);
            let v = sector.embed(&coeffs).unwrap();
            let tv = real.translate_vector(&v).unwrap();
            let phase = Complex64::from_polar(1.0, -sector.k());
            for (a, b) in v.iter().zip(tv.iter()) {
                assert_abs_diff_eq!((phase * a).re, b.re, epsilon = 1e-12);
                assert_abs_diff_eq!((phase * a).im, b.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn embedded_vectors_are_orthonormal() {
        let bosons = BosonBasis::new(4, 2).unwrap();
        let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
            x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
        };
        let embed_unit = |j: i64, c: usize| {
            let sector = SectorBasis::new(bosons.clone(), j);
            let mut coeffs = vec![Complex64::ZERO; sector.size()];
            coeffs[c] = Complex64::ONE;
            sector.embed(&coeffs).unwrap()
        };
        for (j1, c1, j2, c2) in [(0, 0, 0, 0), (0, 3, 0, 3), (0, 3, 0, 4), (1, 2, -1, 2), (2, 5, 2, 5), (1, 1, 2, 1)] {
            let v1 = embed_unit(j1, c1);
            let v2 = embed_unit(j2, c2);
            let expected = if (j1, c1) == (j2, c2) { 1.0 } else { 0.0 };
            let overlap = dot(&v1, &v2);
            assert_abs_diff_eq!(overlap.re, expected, epsilon = 1e-12);
            assert_abs_diff_eq!(overlap.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn translation_expectation_reads_off_momentum() {
        let bosons = BosonBasis::new(4, 1).unwrap();
        let real = RealSpaceBasis::new(bosons.clone(), ExcitationSector::One);

        let embed_unit = |j: i64| {
            let sector = SectorBasis::new(bosons.clone(), j);
            let mut coeffs = vec![Complex64::ZERO; sector.size()];
            coeffs[0] = Complex64::ONE;
            sector.embed(&coeffs).unwrap()
        };

        let pi_state = embed_unit(2);
        let t = translation_eigenvalue(&pi_state, &real).unwrap();
        assert!(t.is_eigenstate);
        assert_abs_diff_eq!(t.value.re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.value.im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.k, PI, epsilon = 1e-12);

        let zero_state = embed_unit(0);
        let t = translation_eigenvalue(&zero_state, &real).unwrap();
        assert!(t.is_eigenstate);
        assert_abs_diff_eq!(t.value.re, 1.0, epsilon = 1e-12);

        // equal superposition of K = 0 and K = pi embeddings: <T> = 0
        let mixed: Vec<Complex64> = pi_state
            .iter()
            .zip(zero_state.iter())
            .map(|(a, b)| (a + b) / 2.0_f64.sqrt())
            .collect();
        let t = translation_eigenvalue(&mixed, &real).unwrap();
        assert!(!t.is_eigenstate);
        assert_abs_diff_eq!(t.value.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn incommensurate_momentum_rejected() {
        let bosons = BosonBasis::new(4, 1).unwrap();
        assert!(matches!(
            SectorBasis::for_momentum(bosons.clone(), 0.3),
            Err(BasisError::IncommensurateMomentum { .. })
        ));
        let s = SectorBasis::for_momentum(bosons, PI).unwrap();
        assert_eq!(s.k_index(), 2);
    }

    proptest! {
        #[test]
        fn rank_round_trip(n in 1usize..6, m in 0usize..5, seed in 0usize..1000) {
            let basis = BosonBasis::new(n, m).unwrap();
            let i = seed % basis.size();
            prop_assert_eq!(basis.rank(basis.config(i)), i);
        }

        #[test]
        fn translation_is_a_bijection(n in 2usize..6, m in 0usize..4, shift in -3isize..4) {
            let basis = BosonBasis::new(n, m).unwrap();
            let mut seen = vec![false; basis.size()];
            for i in 0..basis.size() {
                let t = basis.translated_rank(i, shift);
                prop_assert!(!seen[t]);
                seen[t] = true;
            }
        }
    }
}
