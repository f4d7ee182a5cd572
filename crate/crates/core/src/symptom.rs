//! Closed symptom vocabulary, timepoints, and the compact symptom-set type.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Number of symptoms in the vocabulary.
pub const SYMPTOM_COUNT: usize = 28;
/// Number of assessment timepoints per patient.
pub const TIMEPOINT_COUNT: usize = 12;

macro_rules! symptoms {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// One of the 28 questionnaire symptoms.
        ///
        /// Variants are declared in byte-wise alphabetical order of their names,
        /// so the derived `Ord` agrees with sorting by name.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[repr(u8)]
        pub enum Symptom {
            $($variant),+
        }

        impl Symptom {
            pub const ALL: [Symptom; SYMPTOM_COUNT] = [$(Symptom::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $(Symptom::$variant => $name),+
                }
            }
        }

        impl FromStr for Symptom {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(Symptom::$variant),)+
                    other => Err(Error::UnknownSymptom(other.to_string())),
                }
            }
        }
    };
}

symptoms! {
    Activity => "activity",
    Appetite => "appetite",
    Breath => "breath",
    Choking => "choking",
    Constipation => "constipation",
    Distress => "distress",
    Drowsiness => "drowsiness",
    DryMouth => "dryMouth",
    Enjoyment => "enjoyment",
    Fatigue => "fatigue",
    Memory => "memory",
    Mood => "mood",
    MouthSores => "mouthSores",
    Mucus => "mucus",
    Nausea => "nausea",
    Numbness => "numbness",
    Pain => "pain",
    Relations => "relations",
    Sadness => "sadness",
    Skin => "skin",
    Sleep => "sleep",
    Speech => "speech",
    Swallow => "swallow",
    Taste => "taste",
    Teeth => "teeth",
    Vomit => "vomit",
    Walking => "walking",
    Work => "work",
}

impl Symptom {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Symptom> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for Symptom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Symptom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Symptom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Observation stage of a timepoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Baseline plus the seven weekly on-treatment assessments.
    Acute,
    /// Six weeks, six, twelve and eighteen months after treatment.
    Late,
}

impl Stage {
    pub fn timepoints(self) -> std::ops::Range<usize> {
        match self {
            Stage::Acute => 0..8,
            Stage::Late => 8..TIMEPOINT_COUNT,
        }
    }

    pub fn of_timepoint(index: usize) -> Option<Stage> {
        match index {
            0..=7 => Some(Stage::Acute),
            8..=11 => Some(Stage::Late),
            _ => None,
        }
    }
}

/// A set of symptoms packed into the low 28 bits of a word.
///
/// Ordering is by size first, then lexicographic over the ascending member list.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SymptomSet(u32);

impl SymptomSet {
    pub const EMPTY: SymptomSet = SymptomSet(0);

    pub fn from_bits(bits: u32) -> SymptomSet {
        SymptomSet(bits & ((1 << SYMPTOM_COUNT) - 1))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(symptom: Symptom) -> SymptomSet {
        SymptomSet(1 << symptom.index())
    }

    pub fn all() -> SymptomSet {
        SymptomSet((1 << SYMPTOM_COUNT) - 1)
    }

    pub fn insert(&mut self, symptom: Symptom) {
        self.0 |= 1 << symptom.index();
    }

    pub fn contains(self, symptom: Symptom) -> bool {
        self.0 & (1 << symptom.index()) != 0
    }

    pub fn is_superset(self, other: SymptomSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_subset(self, other: SymptomSet) -> bool {
        other.is_superset(self)
    }

    pub fn union(self, other: SymptomSet) -> SymptomSet {
        SymptomSet(self.0 | other.0)
    }

    pub fn intersection(self, other: SymptomSet) -> SymptomSet {
        SymptomSet(self.0 & other.0)
    }

    pub fn without(self, symptom: Symptom) -> SymptomSet {
        SymptomSet(self.0 & !(1 << symptom.index()))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in ascending (alphabetical) order.
    pub fn iter(self) -> impl Iterator<Item = Symptom> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Symptom::from_index(i)
        })
    }

    pub fn last(self) -> Option<Symptom> {
        if self.0 == 0 {
            None
        } else {
            Symptom::from_index(31 - self.0.leading_zeros() as usize)
        }
    }

    pub fn to_vec(self) -> Vec<Symptom> {
        self.iter().collect()
    }
}

impl FromIterator<Symptom> for SymptomSet {
    fn from_iter<I: IntoIterator<Item = Symptom>>(iter: I) -> Self {
        let mut set = SymptomSet::EMPTY;
        for s in iter {
            set.insert(s);
        }
        set
    }
}

impl Ord for SymptomSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for SymptomSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SymptomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(Symptom::name)).finish()
    }
}

impl fmt::Display for SymptomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(s.name())?;
        }
        f.write_str("}")
    }
}

impl Serialize for SymptomSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for SymptomSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<Symptom>::deserialize(deserializer)?;
        Ok(items.into_iter().collect())
    }
}
