//! Total, global, and local l1-norm coherence of density matrices, plus the
//! end-to-end numeric evaluation: build, trace out region II, measure.
//!
//! Total coherence is the sum of absolute off-diagonal elements in the
//! occupation basis. Local coherence is the same measure applied to the
//! product of single-party marginals `pi(rho)`: superposition surviving
//! within each party on its own. Global coherence is the remainder
//! `C_G = C_T - C_L`, the share stored in inter-party correlations; this
//! difference form is what the closed forms of [`crate::analytic`] satisfy
//! identically (the sum rule `C_T = C_G + C_L` holds by construction here
//! and algebraically there).

use std::collections::BTreeMap;

use crate::density::{reduce, subsystem_marginals, DensityMatrix};
use crate::error::Result;
use crate::states::{build, party_subsystems, StateSpec};
use crate::sum::NeumaierSum;

/// Sum of absolute off-diagonal elements, `sum_{i != j} |rho_ij|`, taken in
/// the occupation-label basis. Twice the stored upper-triangle mass; entries
/// are walked in sorted storage order, so the compensated sum is
/// reproducible.
pub fn l1_total(rho: &DensityMatrix) -> f64 {
    let mut acc = NeumaierSum::new();
    for &(i, j, v) in rho.entries_packed() {
        if i != j {
            acc.add(v.norm());
        }
    }
    2.0 * acc.value()
}

/// Per-subsystem absolute entry mass and absolute diagonal mass of the
/// marginals; the building blocks of the factorized local coherence.
fn marginal_masses(rho: &DensityMatrix, subsystems: &[Vec<usize>]) -> Result<Vec<(f64, f64)>> {
    let marginals = subsystem_marginals(rho, subsystems)?;
    Ok(marginals
        .iter()
        .map(|marg| {
            let mut all = NeumaierSum::new();
            let mut diag = NeumaierSum::new();
            for (&(i, j), v) in marg {
                all.add(v.norm());
                if i == j {
                    diag.add(v.norm());
                }
            }
            (all.value(), diag.value())
        })
        .collect())
}

/// Off-diagonal l1 mass of the marginal product `pi(rho)`. Equal to
/// `l1_total(marginal_product(rho, subsystems))` through the factorization
/// of entrywise absolute sums over tensor products:
/// `sum |pi_ij| = prod_k sum |(rho_k)_ij|`, and likewise for the diagonal.
/// Evaluating the factored form never materializes the product.
pub fn l1_local(rho: &DensityMatrix, subsystems: &[Vec<usize>]) -> Result<f64> {
    let masses = marginal_masses(rho, subsystems)?;
    let all: f64 = masses.iter().map(|&(a, _)| a).product();
    let diag: f64 = masses.iter().map(|&(_, d)| d).product();
    Ok((all - diag).max(0.0))
}

/// Global (correlation) share of the coherence: total minus local. Clamped
/// at zero to absorb rounding dust on product states, where the two terms
/// coincide.
pub fn l1_global(rho: &DensityMatrix, subsystems: &[Vec<usize>]) -> Result<f64> {
    Ok((l1_total(rho) - l1_local(rho, subsystems)?).max(0.0))
}

/// Coherence values of one scenario plus its truncation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    pub c_total: f64,
    pub c_global: Option<f64>,
    pub c_local: Option<f64>,
    /// Cutoff used per accelerated party.
    pub n_max_used: BTreeMap<usize, u32>,
    /// Union bound on the omitted probability across accelerated parties.
    pub tail_bound_total: f64,
}

/// Full numeric pipeline: build the truncated state, trace out every
/// region-II mode, and measure total, global, and local coherence on the
/// reduced matrix. No renormalization is applied after truncation; the tail
/// bound in the report accounts for the deficit.
pub fn evaluate_numeric(spec: &StateSpec) -> Result<CoherenceReport> {
    let built = build(spec)?;
    let registry = built.state.registry();
    let keep: Vec<usize> = registry
        .modes()
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.role.is_region_ii())
        .map(|(i, _)| i)
        .collect();
    let rho = reduce(&built.state, &keep)?;
    let subsystems = party_subsystems(rho.registry());
    let c_total = l1_total(&rho);
    let c_local = l1_local(&rho, &subsystems)?;
    let c_global = (c_total - c_local).max(0.0);
    Ok(CoherenceReport {
        c_total,
        c_global: Some(c_global),
        c_local: Some(c_local),
        n_max_used: built.n_max.clone(),
        tail_bound_total: built.tail_bound_total(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{decohere, marginal_product, trace_out_parties};
    use crate::registry::{ModeRegistry, PureState};
    use crate::rindler::{AccelerationSpec, TruncationPolicy};
    use crate::states::StateFamily;
    use num_complex::Complex64;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn spec(family: StateFamily, accel: &[(usize, f64)], policy: TruncationPolicy) -> StateSpec {
        StateSpec::new(
            family,
            accel
                .iter()
                .map(|&(p, r)| (p, AccelerationSpec::from_r(r).unwrap()))
                .collect(),
            policy,
        )
        .unwrap()
    }

    fn reduced(
        family: StateFamily,
        accel: &[(usize, f64)],
        policy: TruncationPolicy,
    ) -> DensityMatrix {
        let built = crate::states::build(&spec(family, accel, policy)).unwrap();
        let keep: Vec<usize> = built
            .state
            .registry()
            .modes()
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.role.is_region_ii())
            .map(|(i, _)| i)
            .collect();
        reduce(&built.state, &keep).unwrap()
    }

    #[test]
    fn diagonal_matrix_has_zero_coherence() {
        let rho = reduced(
            StateFamily::GeneralizedGhz { theta: PI / 4.0 },
            &[],
            TruncationPolicy::FixedNMax(0),
        );
        let diag = decohere(&rho);
        assert_eq!(l1_total(&diag), 0.0);
    }

    #[test]
    fn plus_state_has_unit_coherence() {
        let reg = Arc::new(ModeRegistry::build(1, &[]).unwrap());
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let st =
            PureState::from_amplitudes(reg, [(vec![0u32], c(amp)), (vec![1u32], c(amp))]).unwrap();
        let rho = reduce(&st, &[0]).unwrap();
        assert!((l1_total(&rho) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_w_inertial_total_is_two() {
        let rho = reduced(
            StateFamily::SymmetricW { parties: 3 },
            &[],
            TruncationPolicy::FixedNMax(0),
        );
        assert!((l1_total(&rho) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn product_state_has_zero_global_coherence() {
        let rho = reduced(
            StateFamily::PlusProduct { parties: 3 },
            &[],
            TruncationPolicy::FixedNMax(0),
        );
        let subs = party_subsystems(rho.registry());
        assert!(l1_global(&rho, &subs).unwrap() < 1e-13);
        assert!((l1_local(&rho, &subs).unwrap() - 7.0).abs() < 1e-13);
        assert!((l1_total(&rho) - 7.0).abs() < 1e-13);
    }

    #[test]
    fn ghz_inertial_local_is_zero() {
        let rho = reduced(
            StateFamily::GeneralizedGhz { theta: PI / 4.0 },
            &[],
            TruncationPolicy::FixedNMax(0),
        );
        let subs = party_subsystems(rho.registry());
        assert_eq!(l1_local(&rho, &subs).unwrap(), 0.0);
        assert!((l1_global(&rho, &subs).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wwbar_inertial_split() {
        let rho = reduced(StateFamily::WWbar, &[], TruncationPolicy::FixedNMax(0));
        let subs = party_subsystems(rho.registry());
        assert!((l1_total(&rho) - 5.0).abs() < 1e-13);
        assert!((l1_local(&rho, &subs).unwrap() - 98.0 / 27.0).abs() < 1e-13);
        assert!((l1_global(&rho, &subs).unwrap() - 37.0 / 27.0).abs() < 1e-13);
    }

    #[test]
    fn star_inertial_split() {
        let rho = reduced(StateFamily::Star, &[], TruncationPolicy::FixedNMax(0));
        let subs = party_subsystems(rho.registry());
        assert!((l1_total(&rho) - 3.0).abs() < 1e-13);
        assert!((l1_local(&rho, &subs).unwrap() - 2.375).abs() < 1e-13);
        assert!((l1_global(&rho, &subs).unwrap() - 0.625).abs() < 1e-13);
    }

    #[test]
    fn factorized_local_matches_materialized_product() {
        for (family, accel) in [
            (StateFamily::WWbar, vec![(2usize, 0.9f64)]),
            (StateFamily::Star, vec![(0, 1.2)]),
            (
                StateFamily::PlusProduct { parties: 3 },
                vec![(1, 0.7), (2, 1.1)],
            ),
        ] {
            let rho = reduced(family, &accel, TruncationPolicy::FixedNMax(14));
            let subs = party_subsystems(rho.registry());
            let via_factors = l1_local(&rho, &subs).unwrap();
            let pi = marginal_product(&rho, &subs).unwrap();
            let via_product = l1_total(&pi);
            assert!(
                (via_factors - via_product).abs() < 1e-12,
                "{family:?}: {via_factors} vs {via_product}"
            );
        }
    }

    #[test]
    fn decohered_states_have_zero_coherence_everywhere() {
        for family in [
            StateFamily::GeneralizedGhz { theta: PI / 5.0 },
            StateFamily::WWbar,
            StateFamily::Star,
        ] {
            let rho = reduced(family, &[(2, 1.0)], TruncationPolicy::FixedNMax(12));
            assert_eq!(l1_total(&decohere(&rho)), 0.0);
        }
    }

    #[test]
    fn permutation_of_labels_preserves_total() {
        // Relabeling occupations within a mode is a diagonal-basis
        // permutation; the off-diagonal mass must not change. Swap the qubit
        // labels of party 0 in a W state.
        let family = StateFamily::SymmetricW { parties: 3 };
        let built =
            crate::states::build(&spec(family, &[], TruncationPolicy::FixedNMax(0))).unwrap();
        let reg = built.state.registry().clone();
        let swapped: Vec<(Vec<u32>, Complex64)> = built
            .state
            .amplitudes()
            .map(|(label, a)| {
                let mut occ = label.0;
                occ[0] = 1 - occ[0];
                (occ, a)
            })
            .collect();
        let permuted = PureState::from_amplitudes(reg, swapped).unwrap();
        let a = reduce(&built.state, &[0, 1, 2]).unwrap();
        let b = reduce(&permuted, &[0, 1, 2]).unwrap();
        assert!((l1_total(&a) - l1_total(&b)).abs() < 1e-14);
    }

    #[test]
    fn w_reduced_matrices_symmetric_at_equal_weights() {
        // At phi = pi/4 the two cross pairs carry equal weight, so tracing
        // party 0 or party 1 leaves equally coherent two-party states.
        let theta = (1.0f64 / 3.0f64.sqrt()).acos();
        let rho = reduced(
            StateFamily::GeneralizedW {
                theta,
                phi: PI / 4.0,
            },
            &[(2, 1.3)],
            TruncationPolicy::TailTol(1e-10),
        );
        let bc = trace_out_parties(&rho, &[0]).unwrap();
        let ac = trace_out_parties(&rho, &[1]).unwrap();
        assert!((l1_total(&bc) - l1_total(&ac)).abs() < 1e-10);
    }

    #[test]
    fn report_carries_diagnostics() {
        let report = evaluate_numeric(&spec(
            StateFamily::GeneralizedGhz { theta: PI / 4.0 },
            &[(2, 2.0)],
            TruncationPolicy::TailTol(1e-10),
        ))
        .unwrap();
        assert!(report.n_max_used[&2] >= 314);
        assert!(report.tail_bound_total <= 1e-10 * 2.0);
        assert!((report.c_total - 0.8988).abs() < 5e-4);
        let sum = report.c_global.unwrap() + report.c_local.unwrap();
        assert!((report.c_total - sum).abs() < 1e-12);
    }
}
