//! Fock states of `n` photons in `m` modes and the enumeration of the state
//! space Φ(m, n).
//!
//! States are ordered in descending lexicographic order of their occupation
//! tuples, so `(n, 0, ..., 0)` comes first and `(0, ..., 0, n)` last.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Occupation-number tuple: photons per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occupations: Vec<usize>,
}

impl FockState {
    pub fn new(occupations: Vec<usize>) -> Self {
        Self { occupations }
    }

    /// `n` single photons in the first `n` of `m` modes.
    pub fn single_photons(m: usize, n: usize) -> Result<Self> {
        if n > m {
            return Err(Error::InvalidDimension(format!(
                "cannot place {n} single photons in {m} modes"
            )));
        }
        let mut occ = vec![0; m];
        occ[..n].fill(1);
        Ok(Self::new(occ))
    }

    pub fn vacuum(m: usize) -> Self {
        Self::new(vec![0; m])
    }

    pub fn occupations(&self) -> &[usize] {
        &self.occupations
    }

    pub fn modes(&self) -> usize {
        self.occupations.len()
    }

    pub fn photons(&self) -> usize {
        self.occupations.iter().sum()
    }

    /// Occupation of a 0-based mode.
    pub fn get(&self, mode: usize) -> usize {
        self.occupations[mode]
    }

    pub fn max_occupation(&self) -> usize {
        self.occupations.iter().copied().max().unwrap_or(0)
    }

    /// Mode labels with multiplicity, e.g. `(2,0,1)` gives `[0, 0, 2]`.
    pub fn mode_list(&self) -> Vec<usize> {
        self.occupations
            .iter()
            .enumerate()
            .flat_map(|(mode, &count)| std::iter::repeat_n(mode, count))
            .collect()
    }

    /// ∏ occupations_i!
    pub fn normalization_product(&self) -> u64 {
        self.occupations
            .iter()
            .map(|&s| factorial(s))
            .try_fold(1u64, |acc, f| acc.checked_mul(f))
            .expect("factorial product overflows u64")
    }

    /// Occupations of `self` followed by those of `other`.
    pub fn concat(&self, other: &FockState) -> FockState {
        let mut occ = self.occupations.clone();
        occ.extend_from_slice(&other.occupations);
        FockState::new(occ)
    }

    /// The first `modes` occupations.
    pub fn truncate(&self, modes: usize) -> FockState {
        FockState::new(self.occupations[..modes].to_vec())
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, occ) in self.occupations.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{occ}")?;
        }
        Ok(())
    }
}

impl FromStr for FockState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(FockState::new(Vec::new()));
        }
        s.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("occupation {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(FockState::new)
    }
}

impl Serialize for FockState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FockState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// n! as u64; panics past 20!.
pub fn factorial(n: usize) -> u64 {
    (1..=n as u64)
        .try_fold(1u64, |acc, k| acc.checked_mul(k))
        .expect("factorial overflows u64")
}

/// binomial(n, k) in u128.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// |Φ(m, n)| = binomial(n + m - 1, n).
pub fn state_count(m: usize, n: usize) -> u128 {
    if m == 0 {
        return if n == 0 { 1 } else { 0 };
    }
    binomial((n + m - 1) as u64, n as u64)
}

/// Upper bound on materialized state spaces.
pub const MAX_STATES: usize = 1_000_000;

/// Enumerated Φ(m, n) with rank lookup.
#[derive(Debug)]
pub struct StateSpace {
    modes: usize,
    photons: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl StateSpace {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FockState> {
        self.states.iter()
    }

    /// Position of `state` in the enumeration order.
    pub fn rank(&self, state: &FockState) -> Result<usize> {
        self.check_member(state)?;
        Ok(self.index[state])
    }

    pub fn unrank(&self, rank: usize) -> Option<&FockState> {
        self.states.get(rank)
    }

    pub fn check_member(&self, state: &FockState) -> Result<()> {
        if state.modes() != self.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes,
                found: state.modes(),
            });
        }
        if state.photons() != self.photons {
            return Err(Error::PhotonMismatch {
                expected: self.photons,
                found: state.photons(),
            });
        }
        Ok(())
    }
}

/// All weak compositions of `n` into `m` parts, descending lexicographic.
pub fn enumerate_states(m: usize, n: usize) -> Result<Arc<StateSpace>> {
    if m == 0 {
        return Err(Error::InvalidDimension("mode count must be positive".into()));
    }
    let count = state_count(m, n);
    if count > MAX_STATES as u128 {
        return Err(Error::StateSpaceTooLarge {
            states: count,
            limit: MAX_STATES,
        });
    }
    let mut states = Vec::with_capacity(count as usize);
    let mut current = vec![0usize; m];
    fill_descending(&mut current, 0, n, &mut states);
    debug_assert_eq!(states.len() as u128, count);
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(Arc::new(StateSpace {
        modes: m,
        photons: n,
        states,
        index,
    }))
}

fn fill_descending(current: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<FockState>) {
    if pos == current.len() - 1 {
        current[pos] = remaining;
        out.push(FockState::new(current.to_vec()));
        return;
    }
    for take in (0..=remaining).rev() {
        current[pos] = take;
        fill_descending(current, pos + 1, remaining - take, out);
    }
    current[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(v: &[usize]) -> FockState {
        FockState::new(v.to_vec())
    }

    #[test]
    fn two_photons_two_modes() {
        let space = enumerate_states(2, 2).unwrap();
        assert_eq!(space.states(), &[st(&[2, 0]), st(&[1, 1]), st(&[0, 2])]);
        assert_eq!(space.rank(&st(&[2, 0])).unwrap(), 0);
        assert_eq!(space.rank(&st(&[0, 2])).unwrap(), 2);
    }

    #[test]
    fn vacuum_space() {
        let space = enumerate_states(3, 0).unwrap();
        assert_eq!(space.states(), &[st(&[0, 0, 0])]);
    }

    #[test]
    fn nine_modes_three_photons() {
        // direct count of triples (a, b, c) placements with repetition
        let mut brute = 0;
        for i in 0..9 {
            for j in i..9 {
                for _k in j..9 {
                    brute += 1;
                }
            }
        }
        assert_eq!(brute, 165);
        assert_eq!(enumerate_states(9, 3).unwrap().len(), brute);
    }

    #[test]
    fn zero_modes_rejected() {
        assert!(matches!(
            enumerate_states(0, 2),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn sizes_match_binomial() {
        for m in 1..=10 {
            for n in 0..=6 {
                let space = enumerate_states(m, n).unwrap();
                assert_eq!(space.len() as u128, binomial((n + m - 1) as u64, n as u64));
                let mut seen = std::collections::HashSet::new();
                for s in space.iter() {
                    assert_eq!(s.photons(), n);
                    assert!(seen.insert(s.clone()));
                }
                for (r, s) in space.iter().enumerate() {
                    assert_eq!(space.rank(s).unwrap(), r);
                    assert_eq!(space.unrank(r), Some(s));
                }
            }
        }
    }

    #[test]
    fn ordering_is_descending() {
        let space = enumerate_states(4, 3).unwrap();
        for w in space.states().windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn rank_rejects_wrong_shape() {
        let space = enumerate_states(3, 2).unwrap();
        assert!(matches!(
            space.rank(&st(&[1, 1, 1])),
            Err(Error::PhotonMismatch { .. })
        ));
        assert!(matches!(
            space.rank(&st(&[1, 1])),
            Err(Error::ModeMismatch { .. })
        ));
    }

    #[test]
    fn normalization_products() {
        assert_eq!(st(&[1, 1, 1, 0]).normalization_product(), 1);
        assert_eq!(st(&[2, 0]).normalization_product(), 2);
        assert_eq!(st(&[3, 2, 0, 1]).normalization_product(), 12);
    }

    #[test]
    fn concatenation() {
        assert_eq!(st(&[1, 1, 0]).concat(&st(&[1, 1])), st(&[1, 1, 0, 1, 1]));
        assert_eq!(st(&[2, 1]).concat(&st(&[])), st(&[2, 1]));
        let c = st(&[0, 0]).concat(&st(&[2, 1]));
        assert_eq!(c, st(&[0, 0, 2, 1]));
        assert_eq!(c.photons(), 3);
    }

    #[test]
    fn text_form() {
        let s: FockState = "1,1,1,0,0".parse().unwrap();
        assert_eq!(s, st(&[1, 1, 1, 0, 0]));
        assert_eq!(s.to_string(), "1,1,1,0,0");
        assert!("1,x".parse::<FockState>().is_err());
        assert!("1,-1".parse::<FockState>().is_err());
    }

    #[test]
    fn mode_list_repeats() {
        assert_eq!(st(&[2, 0, 1]).mode_list(), vec![0, 0, 2]);
    }
}
