//! Photon-number detection patterns.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest mode count accepted by [`enumerate_patterns`].
pub const MAX_ENUMERATION_SIZE: usize = 12;

/// Photon counts per output mode; the counts sum to the number of modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DetectionPattern(Vec<usize>);

impl DetectionPattern {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if counts.is_empty() || total != counts.len() {
            return Err(Error::InvalidPattern(format!(
                "{counts:?} carries {total} photons over {} modes",
                counts.len()
            )));
        }
        Ok(Self(counts))
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    /// `d_0! · … · d_{M-1}!`, exact for the sizes handled here.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&d| factorial(d) as f64).product()
    }

    /// Counts with one photon taken out of mode `k`.
    pub fn without_photon_in(&self, k: usize) -> Option<Vec<usize>> {
        let mut counts = self.0.clone();
        let slot = counts.get_mut(k)?;
        *slot = slot.checked_sub(1)?;
        Some(counts)
    }

    pub(crate) fn check_modes(&self, modes: usize) -> Result<()> {
        if self.modes() == modes {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "pattern over {} modes for a {modes}-mode interferometer",
                self.modes()
            )))
        }
    }
}

impl Deref for DetectionPattern {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl TryFrom<Vec<usize>> for DetectionPattern {
    type Error = Error;

    fn try_from(counts: Vec<usize>) -> Result<Self> {
        Self::new(counts)
    }
}

impl From<DetectionPattern> for Vec<usize> {
    fn from(p: DetectionPattern) -> Self {
        p.0
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub(crate) fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k as u64).fold(1, |acc, i| acc * (n as u64 - i) / (i + 1))
}

/// All patterns of `modes` photons over `modes` modes, in lexicographic
/// order with the first mode most significant and largest first, e.g.
/// `(2,0), (1,1), (0,2)`.
pub fn enumerate_patterns(modes: usize) -> Result<Vec<DetectionPattern>> {
    if modes == 0 {
        return Err(Error::InvalidArgument(
            "pattern size must be positive".into(),
        ));
    }
    if modes > MAX_ENUMERATION_SIZE {
        return Err(Error::TooLarge {
            what: "pattern enumeration",
            size: modes,
            limit: MAX_ENUMERATION_SIZE,
        });
    }

    fn fill(slot: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<DetectionPattern>) {
        if slot + 1 == current.len() {
            current[slot] = left;
            out.push(DetectionPattern(current.clone()));
            return;
        }
        for d in (0..=left).rev() {
            current[slot] = d;
            fill(slot + 1, left - d, current, out);
        }
    }

    let mut out = Vec::with_capacity(binomial(2 * modes - 1, modes - 1) as usize);
    fill(0, modes, &mut vec![0; modes], &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_enumerations() {
        let two: Vec<Vec<usize>> = enumerate_patterns(2)
            .unwrap()
            .into_iter()
            .map(Into::into)
            .collect();
        assert_eq!(two, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(
            enumerate_patterns(1).unwrap(),
            vec![DetectionPattern(vec![1])]
        );
        assert_eq!(enumerate_patterns(4).unwrap().len(), 35);
    }

    #[test]
    fn counts_match_binomial_and_are_sorted() {
        for m in 1..=8 {
            let all = enumerate_patterns(m).unwrap();
            assert_eq!(all.len() as u64, binomial(2 * m - 1, m - 1));
            assert!(all.windows(2).all(|w| w[0] > w[1]));
            assert!(all.iter().all(|p| p.iter().sum::<usize>() == m));
        }
    }

    #[test]
    fn size_limits() {
        assert!(enumerate_patterns(0).is_err());
        assert!(matches!(
            enumerate_patterns(13),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn pattern_validation() {
        assert!(DetectionPattern::new(vec![1, 1]).is_ok());
        assert!(DetectionPattern::new(vec![2, 1]).is_err());
        assert!(DetectionPattern::new(vec![]).is_err());
        let p = DetectionPattern::new(vec![3, 0, 1, 0]).unwrap();
        assert_eq!(p.factorial(), 6.0);
        assert_eq!(p.without_photon_in(0), Some(vec![2, 0, 1, 0]));
        assert_eq!(p.without_photon_in(1), None);
        assert_eq!(p.to_string(), "3 0 1 0");
    }
}
