//! Closed-form coherence expressions, all built on one polylogarithm kernel.
//!
//! Every family studied here has an exact total coherence (and, where local
//! coherence exists, exact global/local splits) expressed through
//!
//! ```text
//! f(r) = Li_{-1/2}(tanh^2 r) / (sinh^2 r * cosh r),    Li_{-1/2}(z) = sum_{k>=1} sqrt(k) z^k
//! ```
//!
//! `f` decreases monotonically from `f(0) = 1` to `sqrt(pi)/2` as `r -> inf`,
//! which is why no amount of acceleration destroys the accessible coherence
//! completely. These closed forms are the fast path for sweeps and the
//! reference the truncated numeric pipeline is validated against.

use crate::error::{Error, Result};

/// Direct summation is used for arguments up to this point; beyond it the
/// series converges too slowly and the expansion about `z = 1` takes over.
const DIRECT_SERIES_MAX_Z: f64 = 0.9;

/// `Gamma(3/2) = sqrt(pi)/2`, the prefactor of the leading singular term of
/// `Li_{-1/2}` at unit argument, and also the `r -> inf` limit of the kernel.
pub const KERNEL_LIMIT_INFINITE_ACCELERATION: f64 = 0.886_226_925_452_758;

/// Riemann zeta at `-1/2 - k` for `k = 0..=8`: coefficients of the expansion
/// of `Li_{-1/2}(e^{-mu})` in powers of `mu`. Derived from `zeta(3/2 + k)`
/// through the functional equation; cross-checked against an independent
/// Euler-Maclaurin evaluation and against direct series summation in the
/// tests below.
const ZETA_NEG_HALF_MINUS_K: [f64; 9] = [
    -0.207_886_224_977_354_57,
    -0.025_485_201_889_833_036,
    0.008_516_928_777_850_331,
    0.004_441_011_335_479_432,
    -0.003_091_669_247_215_834,
    -0.002_671_458_019_899_224_6,
    0.002_746_767_939_536_868_8,
    0.003_269_039_572_600_22,
    -0.004_416_032_873_004_89,
];

/// `Li_{-1/2}(z) / z = sum_{n>=0} sqrt(n+1) z^n` by direct compensated
/// summation. Regular at `z = 0` (value 1), accurate for `z` up to the
/// branch point.
fn polylog_ratio_direct(z: f64) -> f64 {
    let mut sum = crate::sum::NeumaierSum::new();
    let mut zn = 1.0;
    for n in 0u32..100_000 {
        let term = ((n as f64) + 1.0).sqrt() * zn;
        sum.add(term);
        if term < 1e-18 * sum.value().max(1.0) {
            break;
        }
        zn *= z;
    }
    sum.value()
}

/// Expansion of `Li_{-1/2}(e^{-mu})` about `mu = 0`:
/// `Gamma(3/2) mu^{-3/2} + sum_k zeta(-1/2 - k) (-mu)^k / k!`.
/// Convergent for `|mu| < 2*pi`; with nine terms the truncation error is
/// below 1e-17 relative everywhere past the branch point.
fn polylog_asymptotic(z: f64) -> f64 {
    let mu = -z.ln();
    let mut value = KERNEL_LIMIT_INFINITE_ACCELERATION * mu.powf(-1.5);
    let mut pow = 1.0; // (-mu)^k / k!
    for (k, zeta) in ZETA_NEG_HALF_MINUS_K.iter().enumerate() {
        value += zeta * pow;
        pow *= -mu / ((k as f64) + 1.0);
    }
    value
}

/// `Li_{-1/2}(z)` for `z` in `[0, 1)`.
pub fn polylog_neg_half(z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) || !z.is_finite() {
        return Err(Error::PolylogDomain(z));
    }
    if z <= DIRECT_SERIES_MAX_Z {
        Ok(z * polylog_ratio_direct(z))
    } else {
        Ok(polylog_asymptotic(z))
    }
}

/// The coherence kernel `f(r) = Li_{-1/2}(tanh^2 r) / (sinh^2 r cosh r)`.
///
/// Evaluated as `[Li_{-1/2}(z)/z] / cosh^3 r` with `z = tanh^2 r`, which is
/// regular at `r = 0` (value exactly 1) and free of the 0/0 the raw form
/// would hit there.
pub fn kernel_f(r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    let t = r.tanh();
    let z = t * t;
    let inv_cosh3 = {
        let c = r.cosh();
        1.0 / (c * c * c)
    };
    if z <= DIRECT_SERIES_MAX_Z {
        polylog_ratio_direct(z) * inv_cosh3
    } else {
        (polylog_asymptotic(z) / z) * inv_cosh3
    }
}

/// Partial kernel `sum_{n=0}^{n_max} sqrt(n+1) tanh^{2n} r / cosh^3 r`: the
/// value the truncated numeric pipeline can actually see. Converges to
/// [`kernel_f`] from below as the cutoff grows.
pub fn kernel_f_truncated(r: f64, n_max: u32) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let t = r.tanh();
    let z = t * t;
    let c = r.cosh();
    let mut sum = crate::sum::NeumaierSum::new();
    let mut zn = 1.0;
    for n in 0..=n_max {
        sum.add(((n as f64) + 1.0).sqrt() * zn);
        zn *= z;
    }
    sum.value() / (c * c * c)
}

/// Kernel mass beyond the cutoff; the exact analytic-vs-truncated gap for
/// any term linear in one party's kernel.
pub fn kernel_tail(r: f64, n_max: u32) -> f64 {
    (kernel_f(r) - kernel_f_truncated(r, n_max)).max(0.0)
}

/// Total, global (inter-party), and local (intra-party) coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceTriple {
    pub total: f64,
    pub global: f64,
    pub local: f64,
}

impl CoherenceTriple {
    fn correlation_only(total: f64) -> Self {
        Self {
            total,
            global: total,
            local: 0.0,
        }
    }

    fn superposition_only(total: f64) -> Self {
        Self {
            total,
            global: 0.0,
            local: total,
        }
    }
}

fn check_angle(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || !(0.0..2.0 * std::f64::consts::PI).contains(&value) {
        return Err(Error::InvalidAngle { name, value });
    }
    Ok(())
}

fn kernels(rs: &[f64]) -> Vec<f64> {
    rs.iter().map(|&r| kernel_f(r)).collect()
}

/// Total coherence of the biased three-party GHZ state
/// `cos(theta)|000> + sin(theta)|111>` with up to two parties accelerated:
/// `2 |sin(theta) cos(theta)| * prod_k f(r_k)`. Which parties accelerate does
/// not matter; the state is permutation symmetric.
pub fn ghz_coherence(theta: f64, rs: &[f64]) -> Result<f64> {
    check_angle("theta", theta)?;
    if rs.len() > 2 {
        return Err(Error::UnsupportedPattern(format!(
            "tripartite GHZ closed form covers at most two accelerated parties, got {}",
            rs.len()
        )));
    }
    let amp = 2.0 * (theta.sin() * theta.cos()).abs();
    Ok(amp * kernels(rs).iter().product::<f64>())
}

/// Acceleration pattern for the generalized W family
/// `sin(theta)cos(phi)|100> + sin(theta)sin(phi)|010> + cos(theta)|001>`.
/// The closed forms cover the last party alone or the last two together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WPattern {
    Inertial,
    /// Party 2 accelerated.
    PartyTwo {
        r: f64,
    },
    /// Parties 1 and 2 accelerated.
    PartiesOneTwo {
        r1: f64,
        r2: f64,
    },
}

/// Total and two-party reduced coherences of the generalized W state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WCoherence {
    pub total: f64,
    /// Party 0 traced out.
    pub reduced_12: f64,
    /// Party 1 traced out.
    pub reduced_02: f64,
    /// Party 2 traced out.
    pub reduced_01: f64,
}

/// Closed forms for the generalized W family. All four values are sums of
/// pairwise amplitude products, each pair picking up one kernel factor per
/// accelerated party the two labels differ on.
pub fn w_coherence(theta: f64, phi: f64, pattern: WPattern) -> Result<WCoherence> {
    check_angle("theta", theta)?;
    check_angle("phi", phi)?;
    let (f1, f2) = match pattern {
        WPattern::Inertial => (1.0, 1.0),
        WPattern::PartyTwo { r } => (1.0, kernel_f(r)),
        WPattern::PartiesOneTwo { r1, r2 } => (kernel_f(r1), kernel_f(r2)),
    };
    // Excitation amplitudes of parties 0, 1, 2.
    let a0 = (theta.sin() * phi.cos()).abs();
    let a1 = (theta.sin() * phi.sin()).abs();
    let a2 = theta.cos().abs();
    let pair_01 = 2.0 * a0 * a1 * f1;
    let pair_02 = 2.0 * a0 * a2 * f2;
    let pair_12 = 2.0 * a1 * a2 * f1 * f2;
    Ok(WCoherence {
        total: pair_01 + pair_02 + pair_12,
        reduced_12: pair_12,
        reduced_02: pair_02,
        reduced_01: pair_01,
    })
}

/// Total coherence of the separable `|+>^{x3}` state with up to two parties
/// accelerated: 7 inertial, `3 + 4 f(r)` for one, and
/// `1 + 2 f(r1) + 2 f(r2) + 2 f(r1) f(r2)` for two. All of it is local.
pub fn separable_coherence(rs: &[f64]) -> Result<f64> {
    match kernels(rs).as_slice() {
        [] => Ok(7.0),
        [f] => Ok(3.0 + 4.0 * f),
        [f1, f2] => Ok(1.0 + 2.0 * f1 + 2.0 * f2 + 2.0 * f1 * f2),
        _ => Err(Error::UnsupportedPattern(format!(
            "separable closed form covers at most two accelerated parties, got {}",
            rs.len()
        ))),
    }
}

/// Coherence triple of the WW-bar state (equal superposition of the six
/// one- and two-excitation labels) with up to two parties accelerated. The
/// state is permutation symmetric, so only the multiset of accelerations
/// matters. Total equals global plus local identically.
pub fn wwbar_coherence(rs: &[f64]) -> Result<CoherenceTriple> {
    match kernels(rs).as_slice() {
        [] => Ok(CoherenceTriple {
            total: 5.0,
            global: 37.0 / 27.0,
            local: 98.0 / 27.0,
        }),
        [f] => Ok(CoherenceTriple {
            total: 2.0 + 3.0 * f,
            global: 2.0 / 9.0 + 31.0 * f / 27.0,
            local: 16.0 / 9.0 + 50.0 * f / 27.0,
        }),
        [f1, f2] => Ok(CoherenceTriple {
            total: 2.0 / 3.0 + 4.0 * (f1 + f2) / 3.0 + 5.0 * f1 * f2 / 3.0,
            global: 2.0 * (f1 + f2) / 9.0 + 25.0 * f1 * f2 / 27.0,
            local: 2.0 / 3.0 + 10.0 * (f1 + f2) / 9.0 + 20.0 * f1 * f2 / 27.0,
        }),
        _ => Err(Error::UnsupportedPattern(format!(
            "WW-bar closed form covers at most two accelerated parties, got {}",
            rs.len()
        ))),
    }
}

/// Acceleration scenario for the star state
/// `(|000> + |100> + |101> + |111>)/2`, whose hub is party 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StarScenario {
    Inertial,
    /// The hub (party 2) accelerated.
    Central {
        r: f64,
    },
    /// One leaf (party 0 or 1) accelerated.
    Peripheral {
        r: f64,
    },
    /// Hub plus one leaf.
    CentralPeripheral {
        central_r: f64,
        peripheral_r: f64,
    },
    /// Both leaves.
    TwoPeripheral {
        r1: f64,
        r2: f64,
    },
}

/// Coherence triple of the star state per scenario. Local coherence is the
/// same whether the hub or a leaf accelerates; in the mixed scenario the
/// global part is asymmetric under swapping the two parameters.
pub fn star_coherence(scenario: StarScenario) -> Result<CoherenceTriple> {
    let triple = match scenario {
        StarScenario::Inertial => CoherenceTriple {
            total: 3.0,
            global: 0.625,
            local: 2.375,
        },
        StarScenario::Central { r } => {
            let f = kernel_f(r);
            CoherenceTriple {
                total: 1.0 + 2.0 * f,
                global: -0.25 + 7.0 * f / 8.0,
                local: 1.25 + 9.0 * f / 8.0,
            }
        }
        StarScenario::Peripheral { r } => {
            let f = kernel_f(r);
            CoherenceTriple {
                total: 1.5 + 1.5 * f,
                global: 0.25 + 3.0 * f / 8.0,
                local: 1.25 + 9.0 * f / 8.0,
            }
        }
        StarScenario::CentralPeripheral {
            central_r,
            peripheral_r,
        } => {
            let fc = kernel_f(central_r);
            let fp = kernel_f(peripheral_r);
            CoherenceTriple {
                total: 0.5 + fc + 0.5 * fp + fc * fp,
                global: 0.25 * fc - 0.25 * fp + 5.0 * fc * fp / 8.0,
                local: 0.5 + 0.75 * (fc + fp) + 3.0 * fc * fp / 8.0,
            }
        }
        StarScenario::TwoPeripheral { r1, r2 } => {
            let f1 = kernel_f(r1);
            let f2 = kernel_f(r2);
            CoherenceTriple {
                total: 0.5 + f1 + f2 + 0.5 * f1 * f2,
                global: 0.25 * (f1 + f2) + f1 * f2 / 8.0,
                local: 0.5 + 0.75 * (f1 + f2) + 3.0 * f1 * f2 / 8.0,
            }
        }
    };
    Ok(triple)
}

/// Total coherence of the N-party GHZ state with the listed parties
/// accelerated: the single off-diagonal pair crosses every party, so the
/// value is the plain product of kernels and drops exponentially in the
/// number of accelerated parties.
pub fn ghz_n_coherence(n_parties: usize, rs: &[f64]) -> Result<f64> {
    if n_parties < 2 {
        return Err(Error::TooFewParties {
            min: 2,
            got: n_parties,
        });
    }
    if rs.len() > n_parties {
        return Err(Error::UnsupportedPattern(format!(
            "{} accelerated parties exceeds the {} in the state",
            rs.len(),
            n_parties
        )));
    }
    Ok(kernels(rs).iter().product())
}

/// Total coherence of the symmetric N-party W state with the listed parties
/// accelerated:
///
/// ```text
/// (2/N) [ sum_{i<j accelerated} f_i f_j + (N - n) sum_{i accelerated} f_i ]
///   + (N - n)(N - n - 1)/N
/// ```
///
/// The three groups are accelerated-accelerated pairs, accelerated-inertial
/// pairs, and inertial-inertial pairs; only pairwise terms appear, so the
/// decay is polynomial rather than exponential.
pub fn w_n_coherence(n_parties: usize, rs: &[f64]) -> Result<f64> {
    if n_parties < 2 {
        return Err(Error::TooFewParties {
            min: 2,
            got: n_parties,
        });
    }
    let n_acc = rs.len();
    if n_acc > n_parties {
        return Err(Error::UnsupportedPattern(format!(
            "{} accelerated parties exceeds the {} in the state",
            n_acc, n_parties
        )));
    }
    let fs = kernels(rs);
    let big_n = n_parties as f64;
    let inert = (n_parties - n_acc) as f64;
    let mut pair_sum = 0.0;
    for i in 0..n_acc {
        for j in (i + 1)..n_acc {
            pair_sum += fs[i] * fs[j];
        }
    }
    let single_sum: f64 = fs.iter().sum();
    Ok((2.0 / big_n) * (pair_sum + inert * single_sum) + inert * (inert - 1.0) / big_n)
}

/// Ratio of the coherence under acceleration to its inertial value, for
/// comparing decay across families with different inertial baselines.
pub fn normalized_coherence(c_rel: f64, c_inertial: f64) -> Result<f64> {
    if c_inertial <= 0.0 {
        return Err(Error::ZeroInertialCoherence);
    }
    Ok(c_rel / c_inertial)
}

/// Closed-form coherence triple for a full scenario spec, dispatching to the
/// family formulas above. Fails with `UnsupportedPattern` when no closed
/// form covers the requested acceleration pattern (the numeric pipeline
/// still can).
pub fn closed_form(spec: &crate::states::StateSpec) -> Result<CoherenceTriple> {
    use crate::states::{StateFamily, STAR_CENTRAL_PARTY};
    spec.validate()?;
    let accel = spec.accel_r();
    let parties: Vec<usize> = accel.keys().copied().collect();
    let rs: Vec<f64> = accel.values().copied().collect();
    match spec.family {
        StateFamily::GeneralizedGhz { theta } => Ok(CoherenceTriple::correlation_only(
            ghz_coherence(theta, &rs)?,
        )),
        StateFamily::GeneralizedW { theta, phi } => {
            let pattern = match parties.as_slice() {
                [] => WPattern::Inertial,
                [2] => WPattern::PartyTwo { r: accel[&2] },
                [1, 2] => WPattern::PartiesOneTwo {
                    r1: accel[&1],
                    r2: accel[&2],
                },
                other => {
                    return Err(Error::UnsupportedPattern(format!(
                        "generalized W closed forms cover parties {{2}} or {{1, 2}}, got {other:?}"
                    )))
                }
            };
            Ok(CoherenceTriple::correlation_only(
                w_coherence(theta, phi, pattern)?.total,
            ))
        }
        StateFamily::SymmetricW { parties: n } => {
            Ok(CoherenceTriple::correlation_only(w_n_coherence(n, &rs)?))
        }
        StateFamily::GhzN { parties: n } => {
            Ok(CoherenceTriple::correlation_only(ghz_n_coherence(n, &rs)?))
        }
        StateFamily::PlusProduct { parties: n } => {
            if n != 3 {
                return Err(Error::UnsupportedPattern(format!(
                    "separable closed forms cover 3 parties, got {n}"
                )));
            }
            Ok(CoherenceTriple::superposition_only(separable_coherence(
                &rs,
            )?))
        }
        StateFamily::WWbar => wwbar_coherence(&rs),
        StateFamily::Star => {
            let scenario = match parties.as_slice() {
                [] => StarScenario::Inertial,
                [p] if *p == STAR_CENTRAL_PARTY => StarScenario::Central { r: rs[0] },
                [_] => StarScenario::Peripheral { r: rs[0] },
                [a, b] if *b == STAR_CENTRAL_PARTY => StarScenario::CentralPeripheral {
                    central_r: accel[b],
                    peripheral_r: accel[a],
                },
                [a, b] if *a != STAR_CENTRAL_PARTY && *b != STAR_CENTRAL_PARTY => {
                    StarScenario::TwoPeripheral {
                        r1: accel[a],
                        r2: accel[b],
                    }
                }
                other => {
                    return Err(Error::UnsupportedPattern(format!(
                        "star closed forms cover one or two accelerated parties, got {other:?}"
                    )))
                }
            };
            star_coherence(scenario)
        }
    }
}

/// Sound upper bound on |numeric - closed form| for every reported quantity
/// at the given cutoffs.
///
/// The truncated pipeline evaluates the same multilinear expressions as the
/// closed forms, with each party's kernel and unit sums replaced by their
/// partial versions. All coefficients are positive and every variable sits
/// in [0, 1], so the shift is at most the inertial scale times the summed
/// per-party deficits: kernel tail plus both probability tails.
pub fn propagated_bound(
    spec: &crate::states::StateSpec,
    n_max_used: &std::collections::BTreeMap<usize, u32>,
) -> Result<f64> {
    use crate::rindler::{tail_bound, Expansion};
    let inertial = crate::states::StateSpec {
        family: spec.family,
        accel: std::collections::BTreeMap::new(),
        policy: spec.policy,
    };
    let base = closed_form(&inertial)?;
    let scale = base.total + base.local;
    let mut deficit = 0.0;
    for (&party, &r) in spec.accel_r().iter() {
        let m = *n_max_used.get(&party).unwrap_or(&0);
        deficit += kernel_tail(r, m)
            + tail_bound(r, m, Expansion::Vacuum)
            + tail_bound(r, m, Expansion::OneParticle);
    }
    Ok(scale * deficit)
}
