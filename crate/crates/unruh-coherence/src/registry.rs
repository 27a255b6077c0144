//! Labeled multimode Hilbert-space layout and the sparse pure-state
//! representation used by every other module.
//!
//! A [`ModeRegistry`] lists the modes of a multipartite system in a canonical
//! order: parties in ascending id, and for an accelerated party the region-I
//! mode immediately followed by its region-II partner. Occupation labels are
//! packed into `u128` keys (one bit field per mode) so that sparse maps over
//! labels stay allocation-free on the hot paths.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Amplitudes with squared magnitude below this are dropped on construction.
/// Far below every tail tolerance in use; purely an underflow guard.
const AMPLITUDE_FLOOR: f64 = 1e-300;

/// Slack allowed on the `norm_sq <= 1` invariant, to absorb rounding in
/// amplitude products.
const NORM_SLACK: f64 = 1e-9;

/// Role of a single mode within the registry.
///
/// An inertial party owns exactly one two-level mode. An accelerated party
/// owns a pair of bosonic modes, one for each of the two causally
/// disconnected Rindler wedges; only the region-I mode is ever visible to
/// observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeRole {
    InertialQubit(usize),
    RindlerI(usize),
    RindlerII(usize),
}

impl ModeRole {
    pub fn party(&self) -> usize {
        match *self {
            ModeRole::InertialQubit(p) | ModeRole::RindlerI(p) | ModeRole::RindlerII(p) => p,
        }
    }

    pub fn is_region_ii(&self) -> bool {
        matches!(self, ModeRole::RindlerII(_))
    }
}

/// A mode together with its local dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub role: ModeRole,
    pub dim: u32,
}

/// Bit-packing layout for occupation labels over a fixed mode list.
#[derive(Debug, Clone, PartialEq, Eq)]
struct LabelCodec {
    shifts: Vec<u32>,
    widths: Vec<u32>,
}

impl LabelCodec {
    fn for_modes(modes: &[Mode]) -> Result<Self> {
        let mut shifts = Vec::with_capacity(modes.len());
        let mut widths = Vec::with_capacity(modes.len());
        let mut total = 0u32;
        for m in modes {
            // width = bits needed to hold occupations 0..dim-1
            let w = 32 - (m.dim - 1).leading_zeros().min(31);
            let w = w.max(1);
            shifts.push(total);
            widths.push(w);
            total += w;
        }
        if total > 128 {
            return Err(Error::LabelWidthExceeded(total));
        }
        Ok(Self { shifts, widths })
    }

    #[inline]
    fn encode(&self, occ: &[u32]) -> u128 {
        let mut key = 0u128;
        for (i, &o) in occ.iter().enumerate() {
            key |= (o as u128) << self.shifts[i];
        }
        key
    }

    #[inline]
    fn extract(&self, key: u128, mode: usize) -> u32 {
        ((key >> self.shifts[mode]) & ((1u128 << self.widths[mode]) - 1)) as u32
    }

    fn decode(&self, key: u128) -> Vec<u32> {
        (0..self.shifts.len())
            .map(|i| self.extract(key, i))
            .collect()
    }
}

/// Occupation numbers for every mode of a registry, in registry order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OccupationLabel(pub Vec<u32>);

impl From<Vec<u32>> for OccupationLabel {
    fn from(v: Vec<u32>) -> Self {
        OccupationLabel(v)
    }
}

/// Ordered list of modes making up the full Hilbert space of one scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegistry {
    modes: Vec<Mode>,
    party_count: usize,
    codec: LabelCodec,
}

impl ModeRegistry {
    /// Build the canonical registry for `parties` parties, where each entry
    /// of `accelerated` maps a party id to its truncation cutoff `n_max`.
    /// Accelerated parties get a (region-I, region-II) mode pair of dimension
    /// `n_max + 2`, holding occupations `0..=n_max + 1`; inertial parties get
    /// a single two-level mode.
    pub fn build(parties: usize, accelerated: &[(usize, u32)]) -> Result<Self> {
        if parties == 0 {
            return Err(Error::ZeroParties);
        }
        let mut cutoff: HashMap<usize, u32> = HashMap::new();
        for &(p, n_max) in accelerated {
            if p >= parties {
                return Err(Error::PartyOutOfRange(p, parties));
            }
            if cutoff.insert(p, n_max).is_some() {
                return Err(Error::DuplicateParty(p));
            }
        }
        let mut modes = Vec::new();
        for p in 0..parties {
            match cutoff.get(&p) {
                Some(&n_max) => {
                    let dim = n_max + 2;
                    modes.push(Mode {
                        role: ModeRole::RindlerI(p),
                        dim,
                    });
                    modes.push(Mode {
                        role: ModeRole::RindlerII(p),
                        dim,
                    });
                }
                None => modes.push(Mode {
                    role: ModeRole::InertialQubit(p),
                    dim: 2,
                }),
            }
        }
        Self::from_modes(modes, parties)
    }

    /// Registry over an explicit mode list. Validates per-party structure:
    /// dimension 2 for inertial modes, adjacent equal-dimension I/II pairs
    /// for accelerated parties, parties in ascending order.
    pub(crate) fn from_modes(modes: Vec<Mode>, party_count: usize) -> Result<Self> {
        let codec = LabelCodec::for_modes(&modes)?;
        let reg = Self {
            modes,
            party_count,
            codec,
        };
        reg.validate()?;
        Ok(reg)
    }

    fn validate(&self) -> Result<()> {
        let mut last_party: Option<usize> = None;
        let mut i = 0;
        while i < self.modes.len() {
            let m = self.modes[i];
            let p = m.role.party();
            if let Some(lp) = last_party {
                if p <= lp {
                    return Err(Error::NonAscendingParties);
                }
            }
            last_party = Some(p);
            match m.role {
                ModeRole::InertialQubit(_) => {
                    if m.dim != 2 {
                        return Err(Error::InvalidArgument(format!(
                            "inertial mode for party {p} must have dimension 2"
                        )));
                    }
                    i += 1;
                }
                ModeRole::RindlerI(_) => {
                    let pair = self.modes.get(i + 1).copied();
                    match pair {
                        Some(ii) if ii.role == ModeRole::RindlerII(p) && ii.dim == m.dim && m.dim >= 2 => {
                            i += 2;
                        }
                        _ => {
                            return Err(Error::InvalidArgument(format!(
                                "party {p}: region-I mode must be followed by a matching region-II mode"
                            )))
                        }
                    }
                }
                ModeRole::RindlerII(_) => {
                    return Err(Error::InvalidArgument(format!(
                        "party {p}: region-II mode without a preceding region-I mode"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn party_count(&self) -> usize {
        self.party_count
    }

    /// Indices of the modes owned by `party`, in registry order.
    pub fn modes_of_party(&self, party: usize) -> Vec<usize> {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| m.role.party() == party)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of all region-II modes (the wedge that gets traced out).
    pub fn region_ii_modes(&self) -> Vec<usize> {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| m.role.is_region_ii())
            .map(|(i, _)| i)
            .collect()
    }

    /// The same mode layout with every party id shifted up by `offset`.
    /// Lets single-party states (expansions, qubits) be placed at arbitrary
    /// positions before joining them with [`PureState::tensor`].
    pub fn shift_parties(&self, offset: usize) -> ModeRegistry {
        let modes: Vec<Mode> = self
            .modes
            .iter()
            .map(|m| {
                let role = match m.role {
                    ModeRole::InertialQubit(p) => ModeRole::InertialQubit(p + offset),
                    ModeRole::RindlerI(p) => ModeRole::RindlerI(p + offset),
                    ModeRole::RindlerII(p) => ModeRole::RindlerII(p + offset),
                };
                Mode { role, dim: m.dim }
            })
            .collect();
        ModeRegistry {
            modes,
            party_count: self.party_count,
            codec: self.codec.clone(),
        }
    }

    /// Join two registries side by side. Party ids must stay strictly
    /// ascending across the seam, which also guarantees disjointness.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let left_max = self.modes.iter().map(|m| m.role.party()).max();
        let right_min = other.modes.iter().map(|m| m.role.party()).min();
        if let (Some(l), Some(r)) = (left_max, right_min) {
            if l == r {
                return Err(Error::PartyCollision);
            }
            if l > r {
                return Err(Error::NonAscendingParties);
            }
        }
        let modes: Vec<Mode> = self
            .modes
            .iter()
            .chain(other.modes.iter())
            .copied()
            .collect();
        Self::from_modes(modes, self.party_count + other.party_count)
    }

    /// Registry spanning only the modes at `kept` indices (ascending).
    /// Party structure is relaxed on the result: a region-I mode may appear
    /// without its region-II partner, which is exactly the visible layout
    /// after tracing out the inaccessible wedge.
    pub(crate) fn subset(&self, kept: &[usize]) -> Result<ModeRegistry> {
        let modes: Vec<Mode> = kept.iter().map(|&i| self.modes[i]).collect();
        let parties: std::collections::BTreeSet<usize> =
            modes.iter().map(|m| m.role.party()).collect();
        let codec = LabelCodec::for_modes(&modes)?;
        // Visible registries skip `validate`: lone region-I modes are legal here.
        Ok(ModeRegistry {
            modes,
            party_count: parties.len(),
            codec,
        })
    }

    #[inline]
    pub(crate) fn encode_checked(&self, occ: &[u32]) -> Result<u128> {
        if occ.len() != self.modes.len() {
            return Err(Error::LabelLength {
                got: occ.len(),
                expected: self.modes.len(),
            });
        }
        for (i, (&o, m)) in occ.iter().zip(&self.modes).enumerate() {
            if o >= m.dim {
                return Err(Error::OccupationOutOfBounds {
                    mode: i,
                    occ: o,
                    dim: m.dim,
                });
            }
        }
        Ok(self.codec.encode(occ))
    }

    #[inline]
    pub(crate) fn encode_unchecked(&self, occ: &[u32]) -> u128 {
        self.codec.encode(occ)
    }

    #[inline]
    pub(crate) fn extract(&self, key: u128, mode: usize) -> u32 {
        self.codec.extract(key, mode)
    }

    pub(crate) fn decode(&self, key: u128) -> OccupationLabel {
        OccupationLabel(self.codec.decode(key))
    }
}

/// Sparse pure state: a map from occupation labels to complex amplitudes over
/// a fixed registry. Immutable after construction. The squared norm may fall
/// short of one by exactly the truncation tail of the expansions it contains.
#[derive(Debug, Clone)]
pub struct PureState {
    registry: Arc<ModeRegistry>,
    amps: HashMap<u128, Complex64>,
}

impl PureState {
    /// Build a state from explicit (label, amplitude) pairs. Labels are
    /// bounds-checked against the registry; amplitudes at the same label
    /// accumulate; entries below the underflow floor are dropped.
    pub fn from_amplitudes<I, L>(registry: Arc<ModeRegistry>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (L, Complex64)>,
        L: AsRef<[u32]>,
    {
        let mut amps: HashMap<u128, Complex64> = HashMap::new();
        for (label, a) in entries {
            let key = registry.encode_checked(label.as_ref())?;
            *amps.entry(key).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        Self::from_packed(registry, amps)
    }

    /// Single-basis-state constructor.
    pub fn basis_state(registry: Arc<ModeRegistry>, occ: &[u32]) -> Result<Self> {
        Self::from_amplitudes(registry, [(occ, Complex64::new(1.0, 0.0))])
    }

    /// Construction path for builders that already produce packed keys within
    /// bounds. Applies the same underflow floor and norm check as
    /// [`PureState::from_amplitudes`].
    pub(crate) fn from_packed(
        registry: Arc<ModeRegistry>,
        mut amps: HashMap<u128, Complex64>,
    ) -> Result<Self> {
        // norm() is a hypot, so subnormal magnitudes compare correctly here.
        amps.retain(|_, a| a.norm() >= AMPLITUDE_FLOOR);
        let state = Self { registry, amps };
        let n = state.norm_sq();
        if n > 1.0 + NORM_SLACK {
            return Err(Error::NormExceedsOne(n));
        }
        Ok(state)
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn nnz(&self) -> usize {
        self.amps.len()
    }

    /// Amplitude at a label (zero if absent).
    pub fn amplitude(&self, occ: &[u32]) -> Complex64 {
        match self.registry.encode_checked(occ) {
            Ok(key) => self
                .amps
                .get(&key)
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0)),
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Iterate stored (label, amplitude) pairs in unspecified order.
    pub fn amplitudes(&self) -> impl Iterator<Item = (OccupationLabel, Complex64)> + '_ {
        self.amps
            .iter()
            .map(|(&k, &a)| (self.registry.decode(k), a))
    }

    pub(crate) fn packed(&self) -> &HashMap<u128, Complex64> {
        &self.amps
    }

    /// Sum of squared amplitude magnitudes, compensated.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        // Fixed order so repeated calls agree bit for bit.
        let mut keys: Vec<&u128> = self.amps.keys().collect();
        keys.sort_unstable();
        for k in keys {
            acc.add(self.amps[k].norm_sqr());
        }
        acc.value()
    }

    /// The same state over a registry with party ids shifted up by `offset`.
    pub fn shift_parties(&self, offset: usize) -> PureState {
        PureState {
            registry: Arc::new(self.registry.shift_parties(offset)),
            amps: self.amps.clone(),
        }
    }

    /// Tensor product. Registries are concatenated; amplitudes are all
    /// pairwise products, so `nnz(out) = nnz(a) * nnz(b)`.
    pub fn tensor(&self, other: &Self) -> Result<PureState> {
        let registry = Arc::new(self.registry.concat(&other.registry)?);
        let left_modes = self.registry.n_modes();
        let mut amps = HashMap::with_capacity(self.amps.len() * other.amps.len());
        let mut occ = vec![0u32; registry.n_modes()];
        for (&ka, &aa) in &self.amps {
            for (&kb, &ab) in &other.amps {
                for (i, slot) in occ.iter_mut().enumerate().take(left_modes) {
                    *slot = self.registry.extract(ka, i);
                }
                for j in 0..other.registry.n_modes() {
                    occ[left_modes + j] = other.registry.extract(kb, j);
                }
                let key = registry.encode_unchecked(&occ);
                amps.insert(key, aa * ab);
            }
        }
        Ok(PureState { registry, amps })
    }
}
