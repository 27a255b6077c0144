//! Sparse reduced density matrices by hidden-label grouping.
//!
//! Tracing a set of modes out of a sparse pure state never materializes a
//! dense matrix: amplitudes are grouped by the occupations of the traced
//! (hidden) modes, and each group contributes one small outer product
//! `v_h v_h^dagger`. Memory scales with the number of nonzero entries
//! (`sum_h nnz(v_h)^2`), not with the visible dimension squared, which is
//! what keeps two-accelerated-party scenarios at large cutoffs tractable.
//!
//! Assembly is a sort-accumulate pipeline: every contribution becomes a
//! triple, triples are sorted by (row, column, value bits), and equal keys
//! are folded in that order. The sort canonicalizes the merge order, so the
//! result is bit-identical whether the group loop ran sequentially or on a
//! thread pool.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::registry::{ModeRegistry, OccupationLabel, PureState};
use crate::sum::NeumaierSum;

/// Off-diagonal entries below `trace * OFF_DIAGONAL_DUST` are dropped during
/// assembly; numerical dust far below every tolerance in use.
const OFF_DIAGONAL_DUST: f64 = 1e-16;

/// Sparse Hermitian operator over the visible modes, stored as the upper
/// triangle (by packed label key) plus the diagonal, sorted by (row, column).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    registry: Arc<ModeRegistry>,
    entries: Vec<(u128, u128, Complex64)>,
    trace: f64,
}

impl DensityMatrix {
    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    /// Number of stored entries (upper triangle plus diagonal).
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Trace, accumulated in sorted order at assembly time.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Stored entries as decoded label pairs. Each off-diagonal pair appears
    /// once; its mirror image is the complex conjugate.
    pub fn iter_upper(
        &self,
    ) -> impl Iterator<Item = (OccupationLabel, OccupationLabel, Complex64)> + '_ {
        self.entries
            .iter()
            .map(|&(i, j, v)| (self.registry.decode(i), self.registry.decode(j), v))
    }

    pub(crate) fn entries_packed(&self) -> &[(u128, u128, Complex64)] {
        &self.entries
    }

    /// Matrix element at a label pair (zero if absent, conjugated below the
    /// diagonal).
    pub fn get(&self, row: &[u32], col: &[u32]) -> Complex64 {
        let (Ok(mut i), Ok(mut j)) = (
            self.registry.encode_checked(row),
            self.registry.encode_checked(col),
        ) else {
            return Complex64::new(0.0, 0.0);
        };
        let flip = i > j;
        if flip {
            std::mem::swap(&mut i, &mut j);
        }
        match self
            .entries
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&(i, j)))
        {
            Ok(pos) => {
                let v = self.entries[pos].2;
                if flip {
                    v.conj()
                } else {
                    v
                }
            }
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// True if no off-diagonal entries are stored.
    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(i, j, _)| i == j)
    }

    fn assemble(registry: Arc<ModeRegistry>, mut triples: Vec<(u128, u128, Complex64)>) -> Self {
        sort_triples(&mut triples);
        let mut entries: Vec<(u128, u128, Complex64)> = Vec::new();
        for (i, j, v) in triples {
            match entries.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => entries.push((i, j, v)),
            }
        }
        let mut trace = NeumaierSum::new();
        for &(i, j, v) in &entries {
            if i == j {
                trace.add(v.re);
            }
        }
        let trace = trace.value();
        let floor = OFF_DIAGONAL_DUST * trace.abs();
        entries.retain(|&(i, j, v)| i == j || v.norm() >= floor);
        Self {
            registry,
            entries,
            trace,
        }
    }
}

#[cfg(feature = "parallel")]
fn sort_triples(triples: &mut [(u128, u128, Complex64)]) {
    triples.par_sort_unstable_by(compare_triples);
}

#[cfg(not(feature = "parallel"))]
fn sort_triples(triples: &mut [(u128, u128, Complex64)]) {
    triples.sort_unstable_by(compare_triples);
}

/// Total order on triples: label pair, then value bits. Ties in the value
/// are interchangeable, so any interleaving of producers sorts to the same
/// sequence and accumulates to the same floats.
fn compare_triples(a: &(u128, u128, Complex64), b: &(u128, u128, Complex64)) -> std::cmp::Ordering {
    (a.0, a.1, a.2.re.to_bits(), a.2.im.to_bits()).cmp(&(
        b.0,
        b.1,
        b.2.re.to_bits(),
        b.2.im.to_bits(),
    ))
}

/// Contributions of one hidden-label group: the upper triangle of
/// `v_h v_h^dagger` over the group's visible amplitudes.
fn group_triples(group: &[(u128, u128, Complex64)], out: &mut Vec<(u128, u128, Complex64)>) {
    for (a_idx, &(_, vis_a, amp_a)) in group.iter().enumerate() {
        for &(_, vis_b, amp_b) in &group[a_idx..] {
            // Sorted within the group, so vis_a <= vis_b.
            out.push((vis_a, vis_b, amp_a * amp_b.conj()));
        }
    }
}

fn keyed_amplitudes(
    state: &PureState,
    keep: &[usize],
    hidden: &[usize],
    vis_registry: &ModeRegistry,
    hid_registry: &ModeRegistry,
) -> Vec<(u128, u128, Complex64)> {
    let full = state.registry();
    let mut vis_occ = vec![0u32; keep.len()];
    let mut hid_occ = vec![0u32; hidden.len()];
    let mut keyed: Vec<(u128, u128, Complex64)> = Vec::with_capacity(state.nnz());
    for (&key, &amp) in state.packed() {
        for (slot, &mode) in keep.iter().enumerate() {
            vis_occ[slot] = full.extract(key, mode);
        }
        for (slot, &mode) in hidden.iter().enumerate() {
            hid_occ[slot] = full.extract(key, mode);
        }
        keyed.push((
            hid_registry.encode_unchecked(&hid_occ),
            vis_registry.encode_unchecked(&vis_occ),
            amp,
        ));
    }
    keyed
}

fn validate_keep(state: &PureState, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = state.registry().n_modes();
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || sorted.is_empty() || sorted.iter().any(|&m| m >= n) {
        return Err(Error::KeepNotSubset);
    }
    let hidden: Vec<usize> = (0..n).filter(|m| !sorted.contains(m)).collect();
    Ok((sorted, hidden))
}

/// Partial trace of a pure state: keep the listed modes, trace the rest.
///
/// `rho[a, b] = sum_h psi[a + h] conj(psi[b + h])` with `h` running over the
/// hidden-mode occupations. Positive semidefinite by construction since it
/// is a sum of outer products. Dispatches to the thread pool when the
/// `parallel` feature is enabled.
pub fn reduce(state: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    #[cfg(feature = "parallel")]
    {
        reduce_impl(state, keep, true)
    }
    #[cfg(not(feature = "parallel"))]
    {
        reduce_impl(state, keep, false)
    }
}

/// Single-threaded [`reduce`], available regardless of feature flags. The
/// result is bit-identical to the parallel path.
pub fn reduce_seq(state: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    reduce_impl(state, keep, false)
}

fn reduce_impl(state: &PureState, keep: &[usize], parallel: bool) -> Result<DensityMatrix> {
    let (keep, hidden) = validate_keep(state, keep)?;
    let vis_registry = Arc::new(state.registry().subset(&keep)?);
    let hid_registry = state.registry().subset(&hidden)?;

    let mut keyed = keyed_amplitudes(state, &keep, &hidden, &vis_registry, &hid_registry);
    if parallel {
        #[cfg(feature = "parallel")]
        keyed.par_sort_unstable_by_key(|&(h, v, _)| (h, v));
    } else {
        keyed.sort_unstable_by_key(|&(h, v, _)| (h, v));
    }

    // Group boundaries by hidden key.
    let mut bounds: Vec<usize> = vec![0];
    for i in 1..keyed.len() {
        if keyed[i].0 != keyed[i - 1].0 {
            bounds.push(i);
        }
    }
    bounds.push(keyed.len());

    let ranges: Vec<(usize, usize)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
    let triples: Vec<(u128, u128, Complex64)> = if parallel {
        #[cfg(feature = "parallel")]
        {
            // Groups are small; batch them so rayon's task overhead stays
            // negligible next to the outer products themselves.
            ranges
                .par_iter()
                .with_min_len(512)
                .fold(Vec::new, |mut acc, &(lo, hi)| {
                    group_triples(&keyed[lo..hi], &mut acc);
                    acc
                })
                .reduce(Vec::new, |mut a, mut b| {
                    a.append(&mut b);
                    a
                })
        }
        #[cfg(not(feature = "parallel"))]
        {
            unreachable!("parallel path requested without the parallel feature")
        }
    } else {
        let mut acc = Vec::new();
        for &(lo, hi) in &ranges {
            group_triples(&keyed[lo..hi], &mut acc);
        }
        acc
    };

    Ok(DensityMatrix::assemble(vis_registry, triples))
}

fn modes_of_parties(registry: &ModeRegistry, parties: &[usize]) -> Result<Vec<usize>> {
    let mut traced = Vec::new();
    for &p in parties {
        let modes = registry.modes_of_party(p);
        if modes.is_empty() {
            return Err(Error::UnknownParty(p));
        }
        traced.extend(modes);
    }
    traced.sort_unstable();
    traced.dedup();
    Ok(traced)
}

/// Standard partial trace of a density matrix over whole parties. Entries
/// survive when their row and column labels agree on every traced mode; the
/// trace is preserved exactly.
pub fn trace_out_parties(rho: &DensityMatrix, parties: &[usize]) -> Result<DensityMatrix> {
    let registry = rho.registry();
    let traced = modes_of_parties(registry, parties)?;
    let kept: Vec<usize> = (0..registry.n_modes())
        .filter(|m| !traced.contains(m))
        .collect();
    if kept.is_empty() {
        return Err(Error::KeepNotSubset);
    }
    let out_registry = Arc::new(registry.subset(&kept)?);

    let mut occ_i = vec![0u32; kept.len()];
    let mut occ_j = vec![0u32; kept.len()];
    let mut triples = Vec::with_capacity(rho.nnz());
    'entry: for &(i, j, v) in rho.entries_packed() {
        for &m in &traced {
            if registry.extract(i, m) != registry.extract(j, m) {
                continue 'entry;
            }
        }
        for (slot, &m) in kept.iter().enumerate() {
            occ_i[slot] = registry.extract(i, m);
            occ_j[slot] = registry.extract(j, m);
        }
        let ki = out_registry.encode_unchecked(&occ_i);
        let kj = out_registry.encode_unchecked(&occ_j);
        // Projection can flip the key order; keep the upper triangle.
        if ki <= kj {
            triples.push((ki, kj, v));
        } else {
            triples.push((kj, ki, v.conj()));
        }
    }
    Ok(DensityMatrix::assemble(out_registry, triples))
}

/// Diagonal part of a density matrix. Idempotent.
pub fn decohere(rho: &DensityMatrix) -> DensityMatrix {
    let entries: Vec<(u128, u128, Complex64)> = rho
        .entries_packed()
        .iter()
        .copied()
        .filter(|&(i, j, _)| i == j)
        .collect();
    DensityMatrix {
        registry: rho.registry().clone(),
        entries,
        trace: rho.trace(),
    }
}

/// Per-subsystem marginals of a density matrix: subsystem `k`'s marginal is
/// the partial trace over everything else, keyed by packed sub-labels.
/// Subsystems must partition the visible modes.
pub(crate) fn subsystem_marginals(
    rho: &DensityMatrix,
    subsystems: &[Vec<usize>],
) -> Result<Vec<BTreeMap<(u128, u128), Complex64>>> {
    let registry = rho.registry();
    let n = registry.n_modes();
    let mut seen = vec![false; n];
    for group in subsystems {
        for &m in group {
            if m >= n || seen[m] {
                return Err(Error::BadPartition);
            }
            seen[m] = true;
        }
    }
    if !seen.iter().all(|&s| s) || subsystems.iter().any(|g| g.is_empty()) {
        return Err(Error::BadPartition);
    }

    let sub_registries: Vec<ModeRegistry> = subsystems
        .iter()
        .map(|group| registry.subset(group))
        .collect::<Result<_>>()?;

    let mut marginals: Vec<BTreeMap<(u128, u128), Complex64>> =
        vec![BTreeMap::new(); subsystems.len()];
    let mut occ_i: Vec<u32> = Vec::new();
    let mut occ_j: Vec<u32> = Vec::new();
    for &(i, j, v) in rho.entries_packed() {
        for (k, group) in subsystems.iter().enumerate() {
            // The entry contributes to marginal k when the complement parts
            // of row and column agree, i.e. i and j differ only within k.
            let complement_equal = (0..n)
                .filter(|m| !group.contains(m))
                .all(|m| registry.extract(i, m) == registry.extract(j, m));
            if !complement_equal {
                continue;
            }
            occ_i.clear();
            occ_j.clear();
            for &m in group {
                occ_i.push(registry.extract(i, m));
                occ_j.push(registry.extract(j, m));
            }
            let ki = sub_registries[k].encode_unchecked(&occ_i);
            let kj = sub_registries[k].encode_unchecked(&occ_j);
            *marginals[k]
                .entry((ki, kj))
                .or_insert(Complex64::new(0.0, 0.0)) += v;
            if i != j {
                *marginals[k]
                    .entry((kj, ki))
                    .or_insert(Complex64::new(0.0, 0.0)) += v.conj();
            }
        }
    }
    Ok(marginals)
}

/// Product of the subsystem marginals, `pi(rho) = rho_1 (x) ... (x) rho_K`,
/// materialized sparsely. Marginals are taken from `rho` directly; no pure
/// state is re-expanded. For measuring the product's coherence without
/// materializing it, see [`crate::coherence::l1_local`].
pub fn marginal_product(rho: &DensityMatrix, subsystems: &[Vec<usize>]) -> Result<DensityMatrix> {
    let marginals = subsystem_marginals(rho, subsystems)?;
    let registry = rho.registry();

    // Mode order of the product follows the subsystem order; for the
    // party-ascending subsystems used throughout this matches the registry.
    let flat: Vec<usize> = subsystems.iter().flatten().copied().collect();
    let out_registry = Arc::new(registry.subset(&flat)?);
    let sub_registries: Vec<ModeRegistry> = subsystems
        .iter()
        .map(|group| registry.subset(group))
        .collect::<Result<_>>()?;
    let offsets: Vec<usize> = {
        let mut acc = 0;
        subsystems
            .iter()
            .map(|g| {
                let s = acc;
                acc += g.len();
                s
            })
            .collect()
    };

    let entry_lists: Vec<Vec<((u128, u128), Complex64)>> = marginals
        .iter()
        .map(|m| m.iter().map(|(&k, &v)| (k, v)).collect())
        .collect();
    if entry_lists.iter().any(|l| l.is_empty()) {
        return Ok(DensityMatrix::assemble(out_registry, Vec::new()));
    }

    // Odometer over one entry per marginal. Mirror-image combinations land
    // below the diagonal and are skipped; they carry the conjugate values.
    let mut triples: Vec<(u128, u128, Complex64)> = Vec::new();
    let mut occ_i = vec![0u32; flat.len()];
    let mut occ_j = vec![0u32; flat.len()];
    let mut idx = vec![0usize; entry_lists.len()];
    loop {
        let mut val = Complex64::new(1.0, 0.0);
        for (k, list) in entry_lists.iter().enumerate() {
            let ((si, sj), sv) = list[idx[k]];
            for slot in 0..subsystems[k].len() {
                occ_i[offsets[k] + slot] = sub_registries[k].extract(si, slot);
                occ_j[offsets[k] + slot] = sub_registries[k].extract(sj, slot);
            }
            val *= sv;
        }
        let ki = out_registry.encode_unchecked(&occ_i);
        let kj = out_registry.encode_unchecked(&occ_j);
        if ki <= kj {
            triples.push((ki, kj, val));
        }
        let mut k = 0;
        loop {
            if k == entry_lists.len() {
                break;
            }
            idx[k] += 1;
            if idx[k] < entry_lists[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == entry_lists.len() {
            break;
        }
    }
    Ok(DensityMatrix::assemble(out_registry, triples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::PureState;
    use crate::rindler::{AccelerationSpec, TruncationPolicy};
    use crate::states::{build, party_subsystems, StateFamily, StateSpec};
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qubit_registry(n: usize) -> Arc<ModeRegistry> {
        Arc::new(ModeRegistry::build(n, &[]).unwrap())
    }

    fn ghz_spec(theta: f64, accel: &[(usize, f64)], policy: TruncationPolicy) -> StateSpec {
        StateSpec::new(
            StateFamily::GeneralizedGhz { theta },
            accel
                .iter()
                .map(|&(p, r)| (p, AccelerationSpec::from_r(r).unwrap()))
                .collect(),
            policy,
        )
        .unwrap()
    }

    #[test]
    fn product_state_trace_second_mode() {
        let reg = qubit_registry(2);
        let st = PureState::basis_state(reg, &[0, 1]).unwrap();
        let rho = reduce(&st, &[0]).unwrap();
        assert_eq!(rho.nnz(), 1);
        assert_eq!(rho.get(&[0], &[0]), c(1.0));
        assert_eq!(rho.trace(), 1.0);
    }

    #[test]
    fn bell_pair_reduces_to_maximally_mixed() {
        let reg = qubit_registry(2);
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let st =
            PureState::from_amplitudes(reg, [(vec![0u32, 0], c(amp)), (vec![1u32, 1], c(amp))])
                .unwrap();
        let rho = reduce(&st, &[0]).unwrap();
        assert!(rho.is_diagonal());
        assert!((rho.get(&[0], &[0]).re - 0.5).abs() < 1e-15);
        assert!((rho.get(&[1], &[1]).re - 0.5).abs() < 1e-15);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ghz_accelerated_off_diagonal_block() {
        // Off-diagonals between (0,0,n) and (1,1,n+1) carry
        // cos(theta) sin(theta) sqrt(n+1) tanh^n(r) / cosh^3(r).
        let theta = PI / 4.0;
        let r = 1.0f64;
        let built = build(&ghz_spec(theta, &[(2, r)], TruncationPolicy::FixedNMax(40))).unwrap();
        let keep: Vec<usize> = vec![0, 1, 2]; // trace mode 3 = region II
        let rho = reduce(&built.state, &keep).unwrap();
        for n in 0..10u32 {
            let expected =
                theta.cos() * theta.sin() * ((n + 1) as f64).sqrt() * r.tanh().powi(2 * n as i32)
                    / r.cosh().powi(3);
            let got = rho.get(&[0, 0, n], &[1, 1, n + 1]);
            assert!(
                (got.re - expected).abs() < 1e-14,
                "n={n}: got {} expected {expected}",
                got.re
            );
        }
    }

    #[test]
    fn trace_equals_norm_sq() {
        for policy in [
            TruncationPolicy::FixedNMax(6),
            TruncationPolicy::TailTol(1e-6),
        ] {
            let built = build(&ghz_spec(PI / 5.0, &[(1, 0.9), (2, 1.7)], policy)).unwrap();
            let keep: Vec<usize> = built
                .state
                .registry()
                .modes()
                .iter()
                .enumerate()
                .filter(|(_, m)| !m.role.is_region_ii())
                .map(|(i, _)| i)
                .collect();
            let rho = reduce(&built.state, &keep).unwrap();
            assert!((rho.trace() - built.state.norm_sq()).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let built = build(&ghz_spec(
            PI / 4.0,
            &[(1, 1.1), (2, 0.6)],
            TruncationPolicy::FixedNMax(25),
        ))
        .unwrap();
        let keep = [0usize, 1, 3];
        let a = reduce(&built.state, &keep).unwrap();
        let b = reduce_seq(&built.state, &keep).unwrap();
        assert_eq!(a.entries_packed(), b.entries_packed());
        assert_eq!(a.trace().to_bits(), b.trace().to_bits());
    }

    #[test]
    fn reduce_rejects_bad_keep() {
        let reg = qubit_registry(2);
        let st = PureState::basis_state(reg, &[0, 0]).unwrap();
        assert!(reduce(&st, &[]).is_err());
        assert!(reduce(&st, &[5]).is_err());
        assert!(reduce(&st, &[0, 0]).is_err());
    }

    #[test]
    fn ghz_inertial_two_party_reduction_is_diagonal() {
        let built = build(&ghz_spec(PI / 4.0, &[], TruncationPolicy::FixedNMax(0))).unwrap();
        let rho = reduce(&built.state, &[0, 1, 2]).unwrap();
        let reduced = trace_out_parties(&rho, &[0]).unwrap();
        assert!(reduced.is_diagonal());
        assert!((reduced.trace() - 1.0).abs() < 1e-15);
        assert_eq!(reduced.registry().n_modes(), 2);
    }

    #[test]
    fn symmetric_w_reduction_keeps_off_diagonal_weight() {
        let spec = StateSpec::new(
            StateFamily::SymmetricW { parties: 3 },
            BTreeMap::new(),
            TruncationPolicy::FixedNMax(0),
        )
        .unwrap();
        let built = build(&spec).unwrap();
        let rho = reduce(&built.state, &[0, 1, 2]).unwrap();
        let reduced = trace_out_parties(&rho, &[0]).unwrap();
        // Off-diagonal total 2 * (1/3) between the two single-excitation labels.
        let mut off = 0.0;
        for (i, j, v) in reduced.iter_upper() {
            if i != j {
                off += 2.0 * v.norm();
            }
        }
        assert!((off - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn plus_product_single_party_marginal() {
        let spec = StateSpec::new(
            StateFamily::PlusProduct { parties: 3 },
            BTreeMap::new(),
            TruncationPolicy::FixedNMax(0),
        )
        .unwrap();
        let built = build(&spec).unwrap();
        let rho = reduce(&built.state, &[0, 1, 2]).unwrap();
        let single = trace_out_parties(&rho, &[0, 1]).unwrap();
        assert!((single.get(&[0], &[1]).re - 0.5).abs() < 1e-14);
        assert!((single.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn decohere_is_idempotent_and_diagonal() {
        let built = build(&ghz_spec(
            PI / 4.0,
            &[(2, 0.8)],
            TruncationPolicy::FixedNMax(10),
        ))
        .unwrap();
        let rho = reduce(&built.state, &[0, 1, 2]).unwrap();
        assert!(!rho.is_diagonal());
        let d1 = decohere(&rho);
        assert!(d1.is_diagonal());
        assert_eq!(d1.trace(), rho.trace());
        let d2 = decohere(&d1);
        assert_eq!(d1.entries_packed(), d2.entries_packed());
    }

    #[test]
    fn marginal_product_fixed_point_on_product_state() {
        // |0>|+> is a product state with unit trace, so pi(rho) = rho.
        let reg = qubit_registry(2);
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let st =
            PureState::from_amplitudes(reg, [(vec![0u32, 0], c(amp)), (vec![0u32, 1], c(amp))])
                .unwrap();
        let rho = reduce(&st, &[0, 1]).unwrap();
        let pi = marginal_product(&rho, &[vec![0], vec![1]]).unwrap();
        for (li, lj, v) in rho.iter_upper() {
            let w = pi.get(&li.0, &lj.0);
            assert!((v - w).norm() < 1e-13, "{li:?} {lj:?}: {v} vs {w}");
        }
        assert!((pi.trace() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn wwbar_marginals_match_known_matrix() {
        let spec = StateSpec::new(
            StateFamily::WWbar,
            BTreeMap::new(),
            TruncationPolicy::FixedNMax(0),
        )
        .unwrap();
        let built = build(&spec).unwrap();
        let rho = reduce(&built.state, &[0, 1, 2]).unwrap();
        let subs = party_subsystems(rho.registry());
        let marginals = subsystem_marginals(&rho, &subs).unwrap();
        for marg in &marginals {
            assert!((marg[&(0, 0)].re - 0.5).abs() < 1e-14);
            assert!((marg[&(1, 1)].re - 0.5).abs() < 1e-14);
            assert!((marg[&(0, 1)].re - 1.0 / 3.0).abs() < 1e-14);
            assert!((marg[&(1, 0)].re - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ghz_marginal_product_is_maximally_mixed_product() {
        let built = build(&ghz_spec(PI / 4.0, &[], TruncationPolicy::FixedNMax(0))).unwrap();
        let rho = reduce(&built.state, &[0, 1, 2]).unwrap();
        let pi = marginal_product(&rho, &[vec![0], vec![1], vec![2]]).unwrap();
        assert!(pi.is_diagonal());
        assert_eq!(pi.nnz(), 8);
        for (i, _, v) in pi.iter_upper() {
            assert!((v.re - 0.125).abs() < 1e-14, "{i:?}");
        }
    }

    #[test]
    fn marginal_product_rejects_non_partition() {
        let built = build(&ghz_spec(PI / 4.0, &[], TruncationPolicy::FixedNMax(0))).unwrap();
        let rho = reduce(&built.state, &[0, 1, 2]).unwrap();
        assert!(marginal_product(&rho, &[vec![0], vec![1]]).is_err());
        assert!(marginal_product(&rho, &[vec![0], vec![1], vec![1, 2]]).is_err());
        assert!(trace_out_parties(&rho, &[7]).is_err());
    }
}
