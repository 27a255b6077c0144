//! Builders for every state family under study, substituting truncated
//! Rindler expansions for each accelerated party.
//!
//! A family fixes the inertial superposition (a short list of qubit labels
//! with real amplitudes). Building a state replaces, for every accelerated
//! party, the `|0>` factor by the two-mode vacuum expansion and the `|1>`
//! factor by the one-particle expansion, leaving inertial parties as plain
//! qubits. Phases are all +1: every family here has real coefficients.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::registry::{ModeRegistry, PureState};
use crate::rindler::{
    one_particle_coefficients, tail_bound, vacuum_coefficients, AccelerationSpec, Expansion,
    TruncationPolicy,
};

/// The hub party of the star state: accelerating it behaves differently from
/// accelerating either leaf.
pub const STAR_CENTRAL_PARTY: usize = 2;

/// Leaf parties of the star state.
pub const STAR_PERIPHERAL_PARTIES: [usize; 2] = [0, 1];

/// The state families with known closed-form coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFamily {
    /// `cos(theta)|000> + sin(theta)|111>`.
    GeneralizedGhz { theta: f64 },
    /// `sin(theta)cos(phi)|100> + sin(theta)sin(phi)|010> + cos(theta)|001>`.
    GeneralizedW { theta: f64, phi: f64 },
    /// Equal-weight single-excitation state on `parties` qubits.
    SymmetricW { parties: usize },
    /// `(|0...0> + |1...1>)/sqrt(2)` on `parties` qubits.
    GhzN { parties: usize },
    /// `|+>^{x parties}`.
    PlusProduct { parties: usize },
    /// Equal superposition of all weight-1 and weight-2 labels on 3 qubits.
    WWbar,
    /// `(|000> + |100> + |101> + |111>)/2`; party 2 is the hub.
    Star,
}

impl StateFamily {
    pub fn party_count(&self) -> usize {
        match *self {
            StateFamily::GeneralizedGhz { .. }
            | StateFamily::GeneralizedW { .. }
            | StateFamily::WWbar
            | StateFamily::Star => 3,
            StateFamily::SymmetricW { parties }
            | StateFamily::GhzN { parties }
            | StateFamily::PlusProduct { parties } => parties,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let two_pi = 2.0 * std::f64::consts::PI;
        match *self {
            StateFamily::GeneralizedGhz { theta } => {
                if !theta.is_finite() || !(0.0..two_pi).contains(&theta) {
                    return Err(Error::InvalidAngle {
                        name: "theta",
                        value: theta,
                    });
                }
            }
            StateFamily::GeneralizedW { theta, phi } => {
                if !theta.is_finite() || !(0.0..two_pi).contains(&theta) {
                    return Err(Error::InvalidAngle {
                        name: "theta",
                        value: theta,
                    });
                }
                if !phi.is_finite() || !(0.0..two_pi).contains(&phi) {
                    return Err(Error::InvalidAngle {
                        name: "phi",
                        value: phi,
                    });
                }
            }
            StateFamily::SymmetricW { parties }
            | StateFamily::GhzN { parties }
            | StateFamily::PlusProduct { parties } => {
                if parties < 2 {
                    return Err(Error::TooFewParties {
                        min: 2,
                        got: parties,
                    });
                }
            }
            StateFamily::WWbar | StateFamily::Star => {}
        }
        Ok(())
    }

    /// The inertial superposition as (qubit label, amplitude) pairs.
    /// Amplitudes are real; exact zeros (e.g. `sin 0`) simply drop out.
    pub fn inertial_terms(&self) -> Vec<(Vec<u8>, f64)> {
        match *self {
            StateFamily::GeneralizedGhz { theta } => {
                vec![(vec![0, 0, 0], theta.cos()), (vec![1, 1, 1], theta.sin())]
            }
            StateFamily::GeneralizedW { theta, phi } => vec![
                (vec![1, 0, 0], theta.sin() * phi.cos()),
                (vec![0, 1, 0], theta.sin() * phi.sin()),
                (vec![0, 0, 1], theta.cos()),
            ],
            StateFamily::SymmetricW { parties } => {
                let amp = 1.0 / (parties as f64).sqrt();
                (0..parties)
                    .map(|k| {
                        let mut bits = vec![0u8; parties];
                        bits[k] = 1;
                        (bits, amp)
                    })
                    .collect()
            }
            StateFamily::GhzN { parties } => {
                let amp = std::f64::consts::FRAC_1_SQRT_2;
                vec![(vec![0; parties], amp), (vec![1; parties], amp)]
            }
            StateFamily::PlusProduct { parties } => {
                let amp = 2.0f64.powi(-(parties as i32)).sqrt();
                (0..1u64 << parties)
                    .map(|mask| {
                        let bits = (0..parties).map(|p| ((mask >> p) & 1) as u8).collect();
                        (bits, amp)
                    })
                    .collect()
            }
            StateFamily::WWbar => {
                let amp = 1.0 / 6.0f64.sqrt();
                [
                    [0, 0, 1],
                    [0, 1, 0],
                    [1, 0, 0],
                    [0, 1, 1],
                    [1, 0, 1],
                    [1, 1, 0],
                ]
                .iter()
                .map(|bits| (bits.to_vec(), amp))
                .collect()
            }
            StateFamily::Star => [[0, 0, 0], [1, 0, 0], [1, 0, 1], [1, 1, 1]]
                .iter()
                .map(|bits| (bits.to_vec(), 0.5))
                .collect(),
        }
    }
}

/// A family, which parties accelerate and how hard, and the truncation rule.
#[derive(Debug, Clone)]
pub struct StateSpec {
    pub family: StateFamily,
    pub accel: BTreeMap<usize, AccelerationSpec>,
    pub policy: TruncationPolicy,
}

impl StateSpec {
    pub fn new(
        family: StateFamily,
        accel: BTreeMap<usize, AccelerationSpec>,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        let spec = Self {
            family,
            accel,
            policy,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        self.policy.validate()?;
        let parties = self.family.party_count();
        for &p in self.accel.keys() {
            if p >= parties {
                return Err(Error::PartyOutOfRange(p, parties));
            }
        }
        Ok(())
    }

    /// Squeezing parameters keyed by accelerated party.
    pub fn accel_r(&self) -> BTreeMap<usize, f64> {
        self.accel.iter().map(|(&p, a)| (p, a.r())).collect()
    }
}

/// A built state with its truncation diagnostics.
#[derive(Debug, Clone)]
pub struct BuiltState {
    pub state: PureState,
    /// Cutoff actually used, per accelerated party.
    pub n_max: BTreeMap<usize, u32>,
    /// Worst omitted probability (over the two expansions), per party.
    pub tail_bounds: BTreeMap<usize, f64>,
}

impl BuiltState {
    /// Union bound on the state's norm deficit: the per-party tails summed.
    pub fn tail_bound_total(&self) -> f64 {
        self.tail_bounds.values().sum()
    }
}

/// Per-party substitution table: for one accelerated party, the list of
/// (region-I occupation, region-II occupation, coefficient) triples each
/// qubit value expands into.
struct PartyExpansion {
    vacuum: Vec<(u32, u32, f64)>,
    one_particle: Vec<(u32, u32, f64)>,
}

/// Build the family state over its canonical registry, substituting the
/// truncated expansions for accelerated parties. The result's norm deficit
/// is at most the sum of the per-party tail bounds.
pub fn build(spec: &StateSpec) -> Result<BuiltState> {
    spec.validate()?;
    let parties = spec.family.party_count();

    let mut n_max = BTreeMap::new();
    let mut tails = BTreeMap::new();
    let mut expansions: BTreeMap<usize, PartyExpansion> = BTreeMap::new();
    for (&p, acc) in &spec.accel {
        let r = acc.r();
        let m = spec.policy.n_max_for(r)?;
        n_max.insert(p, m);
        tails.insert(
            p,
            tail_bound(r, m, Expansion::Vacuum).max(tail_bound(r, m, Expansion::OneParticle)),
        );
        let vacuum = vacuum_coefficients(r, m)
            .into_iter()
            .enumerate()
            .map(|(n, c)| (n as u32, n as u32, c))
            .collect();
        let one_particle = one_particle_coefficients(r, m)
            .into_iter()
            .enumerate()
            .map(|(n, c)| (n as u32 + 1, n as u32, c))
            .collect();
        expansions.insert(
            p,
            PartyExpansion {
                vacuum,
                one_particle,
            },
        );
    }

    let accel_pairs: Vec<(usize, u32)> = n_max.iter().map(|(&p, &m)| (p, m)).collect();
    let registry = Arc::new(ModeRegistry::build(parties, &accel_pairs)?);

    // Mode index of each party's first (or only) mode.
    let first_mode: Vec<usize> = (0..parties)
        .map(|p| registry.modes_of_party(p)[0])
        .collect();

    let terms = spec.family.inertial_terms();
    let capacity: usize = terms
        .iter()
        .map(|_| {
            expansions
                .values()
                .map(|e| e.vacuum.len().max(e.one_particle.len()))
                .product::<usize>()
        })
        .sum();
    let mut amps: HashMap<u128, Complex64> = HashMap::with_capacity(capacity);
    let mut occ = vec![0u32; registry.n_modes()];

    for (bits, amp) in &terms {
        if *amp == 0.0 {
            continue;
        }
        // Substitution lists for this term, one per accelerated party.
        type SubstitutionList<'a> = (usize, &'a [(u32, u32, f64)]);
        let lists: Vec<SubstitutionList> = expansions
            .iter()
            .map(|(&p, exp)| {
                let list = if bits[p] == 0 {
                    &exp.vacuum
                } else {
                    &exp.one_particle
                };
                (p, list.as_slice())
            })
            .collect();

        // Inertial occupations are fixed for the whole term.
        for (p, &b) in bits.iter().enumerate() {
            if !expansions.contains_key(&p) {
                occ[first_mode[p]] = b as u32;
            }
        }

        // Odometer over the cartesian product of substitution lists.
        let mut idx = vec![0usize; lists.len()];
        loop {
            let mut coeff = *amp;
            for (k, &(p, list)) in lists.iter().enumerate() {
                let (vis, hid, c) = list[idx[k]];
                occ[first_mode[p]] = vis;
                occ[first_mode[p] + 1] = hid;
                coeff *= c;
            }
            if coeff.abs() >= 1e-300 {
                let key = registry.encode_unchecked(&occ);
                *amps.entry(key).or_insert(Complex64::new(0.0, 0.0)) += Complex64::new(coeff, 0.0);
            }
            // Advance the odometer.
            let mut k = 0;
            loop {
                if k == lists.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < lists[k].1.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == lists.len() {
                break;
            }
        }
    }

    let state = PureState::from_packed(registry, amps)?;
    Ok(BuiltState {
        state,
        n_max,
        tail_bounds: tails,
    })
}

/// Visible-mode groups per party, ascending: an inertial party contributes
/// its qubit mode, an accelerated party its region-I mode only. Mode indices
/// refer to the given registry, so calling this on a reduced matrix's
/// registry yields groups valid for that matrix.
pub fn party_subsystems(registry: &ModeRegistry) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, m) in registry.modes().iter().enumerate() {
        if !m.role.is_region_ii() {
            groups.entry(m.role.party()).or_default().push(i);
        }
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec_inertial(family: StateFamily) -> StateSpec {
        StateSpec::new(family, BTreeMap::new(), TruncationPolicy::FixedNMax(0)).unwrap()
    }

    fn spec_accel(
        family: StateFamily,
        accel: &[(usize, f64)],
        policy: TruncationPolicy,
    ) -> StateSpec {
        let accel = accel
            .iter()
            .map(|&(p, r)| (p, AccelerationSpec::from_r(r).unwrap()))
            .collect();
        StateSpec::new(family, accel, policy).unwrap()
    }

    #[test]
    fn inertial_families_are_normalized_textbook_states() {
        for family in [
            StateFamily::GeneralizedGhz { theta: PI / 4.0 },
            StateFamily::GeneralizedW {
                theta: PI / 5.0,
                phi: PI / 7.0,
            },
            StateFamily::SymmetricW { parties: 3 },
            StateFamily::GhzN { parties: 11 },
            StateFamily::PlusProduct { parties: 3 },
            StateFamily::WWbar,
            StateFamily::Star,
        ] {
            let built = build(&spec_inertial(family)).unwrap();
            assert!(
                (built.state.norm_sq() - 1.0).abs() < 1e-14,
                "{family:?}: norm {}",
                built.state.norm_sq()
            );
            assert_eq!(built.tail_bound_total(), 0.0);
        }
    }

    #[test]
    fn ghz_inertial_amplitudes() {
        let built = build(&spec_inertial(StateFamily::GeneralizedGhz {
            theta: PI / 4.0,
        }))
        .unwrap();
        assert_eq!(built.state.nnz(), 2);
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        assert!((built.state.amplitude(&[0, 0, 0]).re - amp).abs() < 1e-15);
        assert!((built.state.amplitude(&[1, 1, 1]).re - amp).abs() < 1e-15);
    }

    #[test]
    fn star_inertial_amplitudes() {
        let built = build(&spec_inertial(StateFamily::Star)).unwrap();
        assert_eq!(built.state.nnz(), 4);
        for label in [[0u32, 0, 0], [1, 0, 0], [1, 0, 1], [1, 1, 1]] {
            assert_eq!(built.state.amplitude(&label).re, 0.5);
        }
    }

    #[test]
    fn wwbar_inertial_amplitudes() {
        let built = build(&spec_inertial(StateFamily::WWbar)).unwrap();
        assert_eq!(built.state.nnz(), 6);
        let amp = 1.0 / 6.0f64.sqrt();
        for label in [
            [0u32, 0, 1],
            [0, 1, 0],
            [1, 0, 0],
            [0, 1, 1],
            [1, 0, 1],
            [1, 1, 0],
        ] {
            assert!((built.state.amplitude(&label).re - amp).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_acceleration_reproduces_inertial_values() {
        // With r = 0 the expansions are single exact terms, so every family
        // must carry exactly the inertial amplitudes on the embedded labels.
        let family = StateFamily::GeneralizedW {
            theta: PI / 5.0,
            phi: PI / 7.0,
        };
        let accelerated = build(&spec_accel(
            family,
            &[(2, 0.0)],
            TruncationPolicy::FixedNMax(4),
        ))
        .unwrap();
        let inertial = build(&spec_inertial(family)).unwrap();
        assert_eq!(accelerated.state.nnz(), inertial.state.nnz());
        for (bits, amp) in family.inertial_terms() {
            // Party 2 occupies modes 2 (region I) and 3 (region II): bit b
            // embeds as (b, 0).
            let label = [bits[0] as u32, bits[1] as u32, bits[2] as u32, 0];
            assert_eq!(accelerated.state.amplitude(&label).re, amp);
        }
        assert_eq!(accelerated.tail_bound_total(), 0.0);
    }

    #[test]
    fn ghz_one_accelerated_amplitudes() {
        // Expansion coefficients composed with the superposition weights.
        let theta = PI / 4.0;
        let built = build(&spec_accel(
            StateFamily::GeneralizedGhz { theta },
            &[(2, 1.0)],
            TruncationPolicy::FixedNMax(1),
        ))
        .unwrap();
        assert_eq!(built.state.nnz(), 4);
        let t = 1.0f64.tanh();
        let ch = 1.0f64.cosh();
        let cases = [
            ([0u32, 0, 0, 0], theta.cos() / ch),
            ([0, 0, 1, 1], theta.cos() * t / ch),
            ([1, 1, 1, 0], theta.sin() / (ch * ch)),
            ([1, 1, 2, 1], theta.sin() * 2.0f64.sqrt() * t / (ch * ch)),
        ];
        for (label, expected) in cases {
            assert!(
                (built.state.amplitude(&label).re - expected).abs() < 1e-15,
                "label {label:?}"
            );
        }
        // Frozen values of the same expressions.
        assert!((built.state.amplitude(&[0, 0, 0, 0]).re - theta.cos() * 0.648_054).abs() < 1e-6);
        assert!((built.state.amplitude(&[0, 0, 1, 1]).re - theta.cos() * 0.493_554).abs() < 1e-6);
        assert!((built.state.amplitude(&[1, 1, 1, 0]).re - theta.sin() * 0.419_974).abs() < 1e-6);
        assert!((built.state.amplitude(&[1, 1, 2, 1]).re - theta.sin() * 0.452_336).abs() < 1e-6);
    }

    #[test]
    fn term_count_is_product_of_cutoffs() {
        let built = build(&spec_accel(
            StateFamily::WWbar,
            &[(1, 0.8), (2, 1.4)],
            TruncationPolicy::FixedNMax(7),
        ))
        .unwrap();
        assert_eq!(built.state.nnz(), 6 * 8 * 8);
        assert_eq!(built.n_max, BTreeMap::from([(1, 7), (2, 7)]));
    }

    #[test]
    fn norm_deficit_bounded_by_tail_union() {
        let built = build(&spec_accel(
            StateFamily::GeneralizedGhz { theta: PI / 4.0 },
            &[(1, 1.2), (2, 1.2)],
            TruncationPolicy::FixedNMax(12),
        ))
        .unwrap();
        let deficit = 1.0 - built.state.norm_sq();
        assert!(deficit > 0.0);
        assert!(deficit <= built.tail_bound_total() + 1e-13);
    }

    #[test]
    fn subsystems_follow_visibility() {
        let reg = ModeRegistry::build(3, &[]).unwrap();
        assert_eq!(party_subsystems(&reg), vec![vec![0], vec![1], vec![2]]);
        let reg = ModeRegistry::build(3, &[(2, 4)]).unwrap();
        assert_eq!(party_subsystems(&reg), vec![vec![0], vec![1], vec![2]]);
        let reg = ModeRegistry::build(3, &[(1, 4), (2, 4)]).unwrap();
        assert_eq!(party_subsystems(&reg), vec![vec![0], vec![1], vec![3]]);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(StateFamily::GeneralizedGhz { theta: -0.1 }
            .validate()
            .is_err());
        assert!(StateFamily::GeneralizedW {
            theta: 0.5,
            phi: 7.0
        }
        .validate()
        .is_err());
        assert!(StateFamily::SymmetricW { parties: 1 }.validate().is_err());
        let bad = StateSpec::new(
            StateFamily::Star,
            BTreeMap::from([(4, AccelerationSpec::from_r(1.0).unwrap())]),
            TruncationPolicy::FixedNMax(3),
        );
        assert!(matches!(bad, Err(Error::PartyOutOfRange(4, 3))));
    }
}
