//! Truncated two-mode expansions of the Minkowski vacuum and one-particle
//! states seen by a uniformly accelerated observer, with exact tail
//! accounting.
//!
//! For squeezing parameter `r` (with `cosh r = (1 - e^{-2*pi*Omega})^{-1/2}`
//! for dimensionless frequency `Omega`), the vacuum maps to a two-mode
//! squeezed state with amplitude `tanh^n r / cosh r` on the pair occupation
//! `(n, n)` and the one-particle state to `sqrt(n+1) tanh^n r / cosh^2 r` on
//! `(n+1, n)`. The infinite sums are truncated at a cutoff `n_max`; both
//! omitted probabilities have closed forms, so truncation error is tracked
//! exactly rather than estimated.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::registry::{ModeRegistry, PureState};

/// Hard cap on the truncation cutoff. Tolerances that would require more
/// terms (r beyond roughly 7 at tol 1e-12) fail loudly instead of silently
/// degrading.
pub const N_MAX_CAP: u32 = 1_000_000;

/// Acceleration of one party, reduced to the dimensionless squeezing
/// parameter `r >= 0`. Retains the Rindler frequency when constructed from
/// physical inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelerationSpec {
    r: f64,
    omega: Option<f64>,
}

impl AccelerationSpec {
    pub fn from_r(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidSqueezing(r));
        }
        Ok(Self { r, omega: None })
    }

    /// Derive `r` from the dimensionless frequency `Omega = omega * c / a`.
    pub fn from_omega(omega: f64) -> Result<Self> {
        let r = r_from_omega(omega)?;
        Ok(Self {
            r,
            omega: Some(omega),
        })
    }

    /// Both quantities given explicitly; they must agree through
    /// `cosh r = (1 - e^{-2*pi*Omega})^{-1/2}` to 1e-12.
    pub fn from_r_and_omega(r: f64, omega: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidSqueezing(r));
        }
        let derived = r_from_omega(omega)?;
        if (derived - r).abs() > 1e-12 * (1.0 + r.abs()) {
            return Err(Error::InconsistentSpec { r, omega });
        }
        Ok(Self {
            r,
            omega: Some(omega),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn omega(&self) -> Option<f64> {
        self.omega
    }
}

/// Invert `cosh r = (1 - e^{-2*pi*Omega})^{-1/2}` for `Omega > 0`.
/// Strictly decreasing: large frequency (or small acceleration) means small
/// squeezing.
pub fn r_from_omega(omega: f64) -> Result<f64> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::InvalidFrequency(omega));
    }
    let x = (-2.0 * std::f64::consts::PI * omega).exp();
    // acosh(y) with y^2 - 1 = x / (1 - x), written to stay accurate as x -> 0.
    let y = 1.0 / (1.0 - x).sqrt();
    Ok((y + (x / (1.0 - x)).sqrt()).ln())
}

/// Which of the two expansions a tail refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    Vacuum,
    OneParticle,
}

/// How to choose the truncation cutoff `n_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationPolicy {
    /// Use this cutoff for every accelerated party.
    FixedNMax(u32),
    /// Per accelerated party, use the smallest cutoff whose omitted
    /// probability (for both expansions) is at most this value.
    TailTol(f64),
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TruncationPolicy::FixedNMax(n) => {
                if n > N_MAX_CAP {
                    return Err(Error::CapExceeded {
                        needed: n as u64,
                        cap: N_MAX_CAP,
                    });
                }
                Ok(())
            }
            TruncationPolicy::TailTol(tol) => {
                if !(tol > 0.0 && tol < 1.0) {
                    return Err(Error::InvalidTailTol(tol));
                }
                Ok(())
            }
        }
    }

    /// Cutoff for one party at squeezing `r`, satisfying both expansions'
    /// tails when tolerance-based. This is what the state builders use: a
    /// party holds both expansions over one shared mode pair.
    pub fn n_max_for(&self, r: f64) -> Result<u32> {
        self.n_max_for_expansion(r, Expansion::OneParticle)
    }

    /// Cutoff for a single expansion. The one-particle tail dominates the
    /// vacuum tail at every cutoff, so its cutoff also covers the vacuum.
    pub fn n_max_for_expansion(&self, r: f64, which: Expansion) -> Result<u32> {
        self.validate()?;
        match *self {
            TruncationPolicy::FixedNMax(n) => Ok(n),
            TruncationPolicy::TailTol(tol) => n_max_for_tol(r, tol, which),
        }
    }
}

/// Smallest `n_max` whose omitted probability is at most `tol`.
fn n_max_for_tol(r: f64, tol: f64, which: Expansion) -> Result<u32> {
    if r == 0.0 {
        return Ok(0);
    }
    let z = tanh_sq(r);
    // The vacuum tail z^(n+1) inverts in closed form; the one-particle tail
    // is larger, so start from the vacuum solution and walk up.
    let from_vacuum = (tol.ln() / z.ln()).ceil() as i64 - 1;
    let mut n = from_vacuum.max(0) as u64;
    loop {
        if n > N_MAX_CAP as u64 {
            return Err(Error::CapExceeded {
                needed: n,
                cap: N_MAX_CAP,
            });
        }
        if tail_bound(r, n as u32, which) <= tol {
            return Ok(n as u32);
        }
        n += 1;
    }
}

#[inline]
fn tanh_sq(r: f64) -> f64 {
    let t = r.tanh();
    t * t
}

/// Exact omitted probability of a truncated expansion.
///
/// Vacuum: the geometric tail `z^(n_max+1)` with `z = tanh^2 r`.
/// One-particle: the arithmetico-geometric tail
/// `z^(n_max+1) * ((n_max + 2) - (n_max + 1) z)`.
pub fn tail_bound(r: f64, n_max: u32, which: Expansion) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let z = tanh_sq(r);
    let m = n_max as f64;
    let head = z.powi(n_max as i32 + 1);
    match which {
        Expansion::Vacuum => head,
        Expansion::OneParticle => head * ((m + 2.0) - (m + 1.0) * z),
    }
}

/// Amplitudes `tanh^n r / cosh r` for `n = 0..=n_max`. At `r = 0` this is
/// exactly `[1.0]` regardless of the cutoff.
pub fn vacuum_coefficients(r: f64, n_max: u32) -> Vec<f64> {
    if r == 0.0 {
        return vec![1.0];
    }
    let t = r.tanh();
    let inv_cosh = 1.0 / r.cosh();
    let mut coeffs = Vec::with_capacity(n_max as usize + 1);
    let mut c = inv_cosh;
    for _ in 0..=n_max {
        coeffs.push(c);
        c *= t;
    }
    coeffs
}

/// Amplitudes `sqrt(n+1) tanh^n r / cosh^2 r` for `n = 0..=n_max`. At
/// `r = 0` this is exactly `[1.0]`.
pub fn one_particle_coefficients(r: f64, n_max: u32) -> Vec<f64> {
    if r == 0.0 {
        return vec![1.0];
    }
    let t = r.tanh();
    let inv_cosh2 = 1.0 / (r.cosh() * r.cosh());
    let mut coeffs = Vec::with_capacity(n_max as usize + 1);
    let mut tn = 1.0;
    for n in 0..=n_max {
        coeffs.push(((n as f64) + 1.0).sqrt() * tn * inv_cosh2);
        tn *= t;
    }
    coeffs
}

fn pair_registry(n_max: u32) -> Result<Arc<ModeRegistry>> {
    Ok(Arc::new(ModeRegistry::build(1, &[(0, n_max)])?))
}

/// Truncated vacuum expansion over one (region-I, region-II) mode pair:
/// amplitude `tanh^n r / cosh r` on occupation `(n, n)`. Returns the state
/// together with the cutoff actually used.
pub fn rindler_vacuum(r: f64, policy: TruncationPolicy) -> Result<(PureState, u32)> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidSqueezing(r));
    }
    let n_max = policy.n_max_for_expansion(r, Expansion::Vacuum)?;
    let registry = pair_registry(n_max)?;
    let coeffs = vacuum_coefficients(r, n_max);
    let entries = coeffs
        .into_iter()
        .enumerate()
        .map(|(n, c)| (vec![n as u32, n as u32], Complex64::new(c, 0.0)));
    Ok((PureState::from_amplitudes(registry, entries)?, n_max))
}

/// Truncated one-particle expansion over one mode pair: amplitude
/// `sqrt(n+1) tanh^n r / cosh^2 r` on occupation `(n+1, n)`.
pub fn rindler_one_particle(r: f64, policy: TruncationPolicy) -> Result<(PureState, u32)> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidSqueezing(r));
    }
    let n_max = policy.n_max_for_expansion(r, Expansion::OneParticle)?;
    let registry = pair_registry(n_max)?;
    let coeffs = one_particle_coefficients(r, n_max);
    let entries = coeffs
        .into_iter()
        .enumerate()
        .map(|(n, c)| (vec![n as u32 + 1, n as u32], Complex64::new(c, 0.0)));
    Ok((PureState::from_amplitudes(registry, entries)?, n_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_from_omega_inverts_algebraically() {
        // e^{-2*pi*Omega} = 3/4 makes cosh r = 2 exactly.
        let omega = (4.0f64 / 3.0).ln() / (2.0 * std::f64::consts::PI);
        let r = r_from_omega(omega).unwrap();
        assert!((r - 2.0f64.acosh()).abs() < 1e-14);
        assert!((r - 1.316_957_896_924_816_7).abs() < 1e-12);
    }

    #[test]
    fn r_from_omega_limits() {
        // Large frequency: squeezing vanishes.
        assert!(r_from_omega(50.0).unwrap() < 1e-10);
        // Small frequency: squeezing diverges.
        assert!(r_from_omega(1e-6).unwrap() > 5.0);
        // Strictly decreasing on a grid.
        let rs: Vec<f64> = [0.01, 0.1, 0.5, 1.0, 5.0]
            .iter()
            .map(|&w| r_from_omega(w).unwrap())
            .collect();
        assert!(rs.windows(2).all(|w| w[0] > w[1]));
        assert!(r_from_omega(0.0).is_err());
        assert!(r_from_omega(-1.0).is_err());
    }

    #[test]
    fn spec_consistency_check() {
        let omega = (4.0f64 / 3.0).ln() / (2.0 * std::f64::consts::PI);
        let r = 2.0f64.acosh();
        assert!(AccelerationSpec::from_r_and_omega(r, omega).is_ok());
        assert!(matches!(
            AccelerationSpec::from_r_and_omega(r + 1e-6, omega),
            Err(Error::InconsistentSpec { .. })
        ));
    }

    #[test]
    fn vacuum_at_rest_is_exact() {
        let (st, n_max) = rindler_vacuum(0.0, TruncationPolicy::FixedNMax(5)).unwrap();
        assert_eq!(st.nnz(), 1);
        assert_eq!(st.amplitude(&[0, 0]).re, 1.0);
        assert_eq!(n_max, 5);
        assert_eq!(st.norm_sq(), 1.0);
    }

    #[test]
    fn one_particle_at_rest_is_exact() {
        let (st, _) = rindler_one_particle(0.0, TruncationPolicy::FixedNMax(5)).unwrap();
        assert_eq!(st.nnz(), 1);
        assert_eq!(st.amplitude(&[1, 0]).re, 1.0);
    }

    #[test]
    fn vacuum_amplitudes_r1() {
        // tanh^n(1)/cosh(1) for n = 0, 1, 2, evaluated directly.
        let (st, _) = rindler_vacuum(1.0, TruncationPolicy::FixedNMax(2)).unwrap();
        assert_eq!(st.nnz(), 3);
        for n in 0..=2u32 {
            let expected = 1.0f64.tanh().powi(n as i32) / 1.0f64.cosh();
            assert!((st.amplitude(&[n, n]).re - expected).abs() < 1e-15);
        }
        // Frozen values from the same expression.
        assert!((st.amplitude(&[0, 0]).re - 0.648_054).abs() < 1e-6);
        assert!((st.amplitude(&[1, 1]).re - 0.493_554).abs() < 1e-6);
        assert!((st.amplitude(&[2, 2]).re - 0.375_888).abs() < 1e-6);
    }

    #[test]
    fn one_particle_amplitudes_r1() {
        // sqrt(n+1) tanh^n(1)/cosh^2(1) for n = 0, 1.
        let (st, _) = rindler_one_particle(1.0, TruncationPolicy::FixedNMax(1)).unwrap();
        assert_eq!(st.nnz(), 2);
        assert!((st.amplitude(&[1, 0]).re - 0.419_974).abs() < 1e-6);
        assert!((st.amplitude(&[2, 1]).re - 0.452_336).abs() < 1e-6);
    }

    #[test]
    fn labels_have_expansion_structure() {
        let (vac, _) = rindler_vacuum(1.5, TruncationPolicy::FixedNMax(20)).unwrap();
        for (label, a) in vac.amplitudes() {
            assert_eq!(label.0[0], label.0[1]);
            assert!(a.re > 0.0 && a.im == 0.0);
        }
        let (one, _) = rindler_one_particle(1.5, TruncationPolicy::FixedNMax(20)).unwrap();
        for (label, a) in one.amplitudes() {
            assert_eq!(label.0[0], label.0[1] + 1);
            assert!(a.re > 0.0 && a.im == 0.0);
        }
    }

    #[test]
    fn norm_plus_tail_is_one() {
        for &r in &[0.5, 1.0, 2.0, 3.0] {
            for &n_max in &[0u32, 5, 50] {
                let (vac, _) = rindler_vacuum(r, TruncationPolicy::FixedNMax(n_max)).unwrap();
                let total = vac.norm_sq() + tail_bound(r, n_max, Expansion::Vacuum);
                assert!(
                    (total - 1.0).abs() < 1e-13,
                    "vacuum r={r} n_max={n_max}: {total}"
                );
                let (one, _) = rindler_one_particle(r, TruncationPolicy::FixedNMax(n_max)).unwrap();
                let total = one.norm_sq() + tail_bound(r, n_max, Expansion::OneParticle);
                assert!(
                    (total - 1.0).abs() < 1e-13,
                    "one-particle r={r} n_max={n_max}: {total}"
                );
            }
        }
    }

    #[test]
    fn vacuum_tail_matches_brute_force() {
        // Direct summation of the omitted geometric terms.
        let r = 2.0f64;
        let n_max = 10u32;
        let z = r.tanh() * r.tanh();
        let brute: f64 = (n_max + 1..n_max + 4000)
            .map(|n| z.powi(n as i32) / (r.cosh() * r.cosh()))
            .sum();
        let exact = tail_bound(r, n_max, Expansion::Vacuum);
        assert!((exact - z.powi(11)).abs() < 1e-15);
        assert!((exact - 0.4466).abs() < 2e-4, "tail {exact}");
        // The truncated brute-force sum underestimates; allow its own tail.
        assert!((brute - exact).abs() < 1e-10, "brute {brute} vs {exact}");
    }

    #[test]
    fn tails_decrease_in_cutoff() {
        for &r in &[0.3, 1.0, 2.5] {
            for which in [Expansion::Vacuum, Expansion::OneParticle] {
                let tails: Vec<f64> = (0..40).map(|n| tail_bound(r, n, which)).collect();
                assert!(tails.windows(2).all(|w| w[0] > w[1]));
            }
        }
        assert_eq!(tail_bound(0.0, 7, Expansion::Vacuum), 0.0);
        assert_eq!(tail_bound(0.0, 0, Expansion::OneParticle), 0.0);
    }

    #[test]
    fn tolerance_policy_picks_smallest_cutoff() {
        // Smallest n with tanh(2)^(2(n+1)) <= 1e-10 is 314.
        let policy = TruncationPolicy::TailTol(1e-10);
        let (_, vac_cutoff) = rindler_vacuum(2.0, policy).unwrap();
        assert_eq!(vac_cutoff, 314);
        assert!(tail_bound(2.0, vac_cutoff, Expansion::Vacuum) <= 1e-10);
        assert!(tail_bound(2.0, vac_cutoff - 1, Expansion::Vacuum) > 1e-10);
        // The one-particle tail needs more terms; the shared per-party
        // cutoff used by the builders follows it.
        let n = policy.n_max_for(2.0).unwrap();
        assert!(n > vac_cutoff && n < 600, "n_max = {n}");
        assert!(tail_bound(2.0, n, Expansion::OneParticle) <= 1e-10);
        assert!(tail_bound(2.0, n - 1, Expansion::OneParticle) > 1e-10);
    }

    #[test]
    fn unreachable_tolerance_signals_cap() {
        let err = TruncationPolicy::TailTol(1e-12).n_max_for(9.0).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::TailTol(0.0).validate().is_err());
        assert!(TruncationPolicy::TailTol(1.0).validate().is_err());
        assert!(TruncationPolicy::TailTol(1e-10).validate().is_ok());
        assert!(TruncationPolicy::FixedNMax(N_MAX_CAP + 1)
            .validate()
            .is_err());
    }
}
