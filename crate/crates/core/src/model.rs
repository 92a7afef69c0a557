//! Problem instances and the binary-word state space.
//!
//! A [`ModelParams`] holds the tree degree `d`, the strictly increasing edge
//! lengths `k_1 < … < k_m` and the opening probabilities `p_1, …, p_m`.
//! Chain states are binary words `x = (x_1, …, x_{k_m})` with `x_1` the
//! oldest coordinate; a word is indexed by reading `x_1` as the most
//! significant bit, so the index of `x` is `Σ x_i 2^{k_m - i}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    d: u64,
    lengths: Vec<u32>,
    probs: Vec<f64>,
}

impl ModelParams {
    /// Validates and builds an instance.
    pub fn new(d: u64, lengths: Vec<u32>, probs: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::DegreeTooSmall(d));
        }
        if lengths.is_empty() {
            return Err(Error::NoLengths);
        }
        if lengths.len() != probs.len() {
            return Err(Error::LengthMismatch {
                lengths: lengths.len(),
                probs: probs.len(),
            });
        }
        if lengths[0] == 0 {
            return Err(Error::ZeroLength);
        }
        if lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::LengthsNotIncreasing(lengths));
        }
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::ProbabilityOutOfRange { index: index + 1, value });
        }
        Ok(Self { d, lengths, probs })
    }

    /// Two-length instance `(l, k, p, q)`.
    pub fn two_edge(d: u64, l: u32, k: u32, p: f64, q: f64) -> Result<Self> {
        Self::new(d, vec![l, k], vec![p, q])
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn lengths(&self) -> &[u32] {
        &self.lengths
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of edge lengths `m`.
    pub fn m(&self) -> usize {
        self.lengths.len()
    }

    /// Longest length `k_m`, which is also the chain word length.
    pub fn word_len(&self) -> u32 {
        *self.lengths.last().expect("validated non-empty")
    }

    /// Copy with `p_j` (0-based `j`) replaced.
    pub fn with_prob(&self, j: usize, value: f64) -> Result<Self> {
        if j >= self.m() {
            return Err(Error::Domain(format!(
                "coordinate {} out of range for m = {}",
                j + 1,
                self.m()
            )));
        }
        let mut probs = self.probs.clone();
        probs[j] = value;
        Self::new(self.d, self.lengths.clone(), probs)
    }

    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.d, self.lengths.clone(), probs)
    }

    pub fn gcd(&self) -> u32 {
        self.lengths.iter().copied().fold(0, gcd)
    }

    pub fn is_reduced(&self) -> bool {
        self.gcd() == 1
    }

    /// Equivalent instance with coprime lengths.
    ///
    /// Lengths `k_i / g` on the tree of degree `d^g`, where `g` is the gcd of
    /// the lengths. Spine reachability at depths that are multiples of `g`
    /// follows the reduced chain, so criticality is preserved and
    /// `ρ_reduced = ρ_original^g`.
    pub fn reduce_gcd(&self) -> Result<Self> {
        let g = self.gcd();
        if g == 1 {
            return Ok(self.clone());
        }
        let d = self
            .d
            .checked_pow(g)
            .ok_or(Error::DegreeOverflow { d: self.d, power: g })?;
        Ok(Self {
            d,
            lengths: self.lengths.iter().map(|k| k / g).collect(),
            probs: self.probs.clone(),
        })
    }

    pub fn all_positive(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// Lengths whose probability is strictly positive.
    pub fn active_lengths(&self) -> Vec<u32> {
        self.lengths
            .iter()
            .zip(&self.probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&k, _)| k)
            .collect()
    }

    /// Probability that the next spine site is *not* reached from state `word`:
    /// `∏_j (1 - p_j)^{x_{k_m - k_j + 1}}`.
    ///
    /// Coordinate `x_{k_m - k_j + 1}` sits at bit `k_j - 1` of the index.
    pub fn closure_prob(&self, word: u64) -> f64 {
        self.lengths
            .iter()
            .zip(&self.probs)
            .filter(|(&k, _)| (word >> (k - 1)) & 1 == 1)
            .map(|(_, &p)| 1.0 - p)
            .product()
    }

    /// `1/d^{k_j}`, the upper end of the critical box for coordinate `j`.
    pub fn box_upper(&self, j: usize) -> f64 {
        (self.d as f64).powi(-(self.lengths[j] as i32))
    }
}

pub(crate) fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A chain state: a binary word of length `k_m`, `x_1` most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateWord {
    index: u64,
    len: u32,
}

impl StateWord {
    /// Maximum supported word length.
    pub const MAX_LEN: u32 = 63;

    /// Builds the word from its coordinates `(x_1, …, x_len)`.
    ///
    /// The all-zero word is the absorbing state and is rejected.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let len = bits.len() as u32;
        if len == 0 || len > Self::MAX_LEN {
            return Err(Error::InvalidIndex { index: 0, len });
        }
        let index = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Self::from_index(index, len)
    }

    pub fn from_index(index: u64, len: u32) -> Result<Self> {
        if len == 0 || len > Self::MAX_LEN || index == 0 || index >= 1u64 << len {
            return Err(Error::InvalidIndex { index, len });
        }
        Ok(Self { index, len })
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate `x_i`, 1-based.
    pub fn bit(&self, i: u32) -> bool {
        assert!((1..=self.len).contains(&i), "coordinate {i} out of range");
        (self.index >> (self.len - i)) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (1..=self.len).map(|i| self.bit(i)).collect()
    }
}

impl std::fmt::Display for StateWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Index of the word `bits`; the index-0 word is excluded.
pub fn word_index(bits: &[bool]) -> Result<u64> {
    StateWord::from_bits(bits).map(|w| w.index())
}

/// Coordinates of the word with the given index.
pub fn index_word(index: u64, len: u32) -> Result<Vec<bool>> {
    StateWord::from_index(index, len).map(|w| w.bits())
}

/// Unvalidated parameters as read from a config file or flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub d: Option<u64>,
    pub lengths: Option<Vec<u32>>,
    pub probs: Option<Vec<f64>>,
}

impl RawParams {
    /// Parses `key = value` lines (`d`, `lengths`, `probs`).
    ///
    /// Blank lines and lines starting with `#` are ignored; lists are
    /// comma-separated.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let value = value.trim();
            let bad = |what: &str| Error::Config(format!("line {}: bad {what}: {value}", lineno + 1));
            match key.trim() {
                "d" => raw.d = Some(value.parse().map_err(|_| bad("d"))?),
                "lengths" => raw.lengths = Some(parse_list(value).map_err(|_| bad("lengths"))?),
                "probs" => raw.probs = Some(parse_list(value).map_err(|_| bad("probs"))?),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(raw)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: RawParams) -> RawParams {
        RawParams {
            d: over.d.or(self.d),
            lengths: over.lengths.or(self.lengths),
            probs: over.probs.or(self.probs),
        }
    }

    pub fn resolve(self) -> Result<ModelParams> {
        let d = self.d.ok_or_else(|| Error::Config("missing `d`".into()))?;
        let lengths = self.lengths.ok_or_else(|| Error::Config("missing `lengths`".into()))?;
        let probs = self.probs.ok_or_else(|| Error::Config("missing `probs`".into()))?;
        ModelParams::new(d, lengths, probs)
    }
}

/// Parses a comma-separated list.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validates_well_formed_input() {
        let params = ModelParams::new(2, vec![1, 2], vec![0.1, 0.2]).unwrap();
        assert_eq!(params.word_len(), 2);
        assert_eq!(params.m(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ModelParams::new(2, vec![2, 1], vec![0.1, 0.2]),
            Err(Error::LengthsNotIncreasing(_))
        ));
        assert!(matches!(
            ModelParams::new(2, vec![1, 1], vec![0.1, 0.2]),
            Err(Error::LengthsNotIncreasing(_))
        ));
        assert_eq!(
            ModelParams::new(1, vec![1], vec![0.5]),
            Err(Error::DegreeTooSmall(1))
        );
        assert_eq!(ModelParams::new(2, vec![], vec![]), Err(Error::NoLengths));
        assert_eq!(ModelParams::new(2, vec![0, 1], vec![0.1, 0.1]), Err(Error::ZeroLength));
        assert!(matches!(
            ModelParams::new(2, vec![1, 2], vec![0.1, 1.5]),
            Err(Error::ProbabilityOutOfRange { index: 2, .. })
        ));
        assert!(matches!(
            ModelParams::new(2, vec![1, 2], vec![f64::NAN, 0.1]),
            Err(Error::ProbabilityOutOfRange { index: 1, .. })
        ));
        assert!(matches!(
            ModelParams::new(2, vec![1, 2], vec![0.1]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gcd_reduction() {
        let p = ModelParams::new(2, vec![2, 4], vec![0.3, 0.1]).unwrap();
        let r = p.reduce_gcd().unwrap();
        assert_eq!(r, ModelParams::new(4, vec![1, 2], vec![0.3, 0.1]).unwrap());

        let p = ModelParams::new(2, vec![1, 2], vec![0.3, 0.1]).unwrap();
        assert_eq!(p.reduce_gcd().unwrap(), p);

        let p = ModelParams::new(3, vec![3], vec![0.2]).unwrap();
        assert_eq!(
            p.reduce_gcd().unwrap(),
            ModelParams::new(27, vec![1], vec![0.2]).unwrap()
        );

        let p = ModelParams::new(1 << 40, vec![2], vec![0.2]).unwrap();
        assert!(matches!(p.reduce_gcd(), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn word_indexing() {
        assert_eq!(word_index(&[false, true]).unwrap(), 1);
        assert_eq!(word_index(&[true, false]).unwrap(), 2);
        assert_eq!(word_index(&[true, true]).unwrap(), 3);
        assert_eq!(index_word(5, 3).unwrap(), vec![true, false, true]);
        assert!(index_word(0, 3).is_err());
        assert!(index_word(8, 3).is_err());
        assert!(word_index(&[false, false]).is_err());
        assert_eq!(StateWord::from_index(6, 3).unwrap().to_string(), "110");
    }

    #[test]
    fn word_bijection_exhaustive() {
        for len in 1..=10u32 {
            for index in 1..(1u64 << len) {
                let bits = index_word(index, len).unwrap();
                assert_eq!(word_index(&bits).unwrap(), index);
                let expected: u64 = bits
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| (b as u64) << (len as usize - 1 - i))
                    .sum();
                assert_eq!(expected, index);
            }
        }
    }

    #[test]
    fn closure_probability_reads_lagged_coordinates() {
        // (l, k) = (1, 2): x_2 gates the short edge, x_1 the long one.
        let params = ModelParams::two_edge(2, 1, 2, 0.3, 0.1).unwrap();
        assert!((params.closure_prob(0b01) - 0.7).abs() < 1e-16);
        assert!((params.closure_prob(0b10) - 0.9).abs() < 1e-16);
        assert!((params.closure_prob(0b11) - 0.63).abs() < 1e-16);
        assert_eq!(params.closure_prob(0), 1.0);
    }

    #[test]
    fn config_parsing_and_override() {
        let text = "# instance\nd = 3\nlengths = 1, 2\nprobs = 0.1,0.05\n";
        let raw = RawParams::parse_config(text).unwrap();
        assert_eq!(raw.d, Some(3));
        let flags = RawParams {
            d: Some(2),
            ..Default::default()
        };
        let params = raw.overridden_by(flags).resolve().unwrap();
        assert_eq!(params.d(), 2);
        assert_eq!(params.lengths(), &[1, 2]);
        assert_eq!(params.probs(), &[0.1, 0.05]);

        assert!(RawParams::parse_config("x = 1").is_err());
        assert!(RawParams::parse_config("d 1").is_err());
        assert!(RawParams::parse_config("lengths = 1,a").is_err());
        assert!(RawParams::default().resolve().is_err());
    }

    proptest! {
        #[test]
        fn reduce_gcd_is_idempotent(
            d in 2u64..5,
            base in proptest::collection::btree_set(1u32..8, 1..4),
            g in 1u32..4,
        ) {
            let lengths: Vec<u32> = base.iter().map(|k| k * g).collect();
            let probs = vec![0.1; lengths.len()];
            let params = ModelParams::new(d, lengths, probs).unwrap();
            let once = params.reduce_gcd().unwrap();
            prop_assert!(once.is_reduced());
            prop_assert_eq!(once.reduce_gcd().unwrap(), once.clone());
            prop_assert_eq!(once.d(), d.pow(params.gcd()));
        }
    }
}
