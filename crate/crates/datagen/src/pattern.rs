//! Task formulas such as `a_c→t|a_d`.
//!
//! `→` separates the query side from one or more response sides, `|` joins
//! atoms into a paired unit. `->` is accepted for `→`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::DatagenError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Ac,
    Ad,
    T,
}

impl Atom {
    pub fn as_str(self) -> &'static str {
        match self {
            Atom::Ac => "a_c",
            Atom::Ad => "a_d",
            Atom::T => "t",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    /// `sides[0]` is the query, the rest are responses. Each side is a group
    /// of paired atoms.
    pub sides: Vec<Vec<Atom>>,
}

/// Every formula that appears in the pre- and post-training task tables.
pub const FORMULAS: &[&str] = &[
    "a_c→t",
    "t→a_d",
    "a_c→a_d",
    "a_d→a_d",
    "a_c→t|a_d",
    "a_c→t→a_c",
    "a_d→t→a_d",
    "a_c→t→a_d",
    "t→t",
    "a_c|t→t",
    "a_c|a_c→t",
    "a_c|a_c→t|a_d",
    "t|a_c→t",
];

impl Pattern {
    pub fn query(&self) -> &[Atom] {
        &self.sides[0]
    }

    pub fn responses(&self) -> impl Iterator<Item = &Atom> {
        self.sides[1..].iter().flatten()
    }

    pub fn count(&self, atom: Atom) -> usize {
        self.sides.iter().flatten().filter(|&&a| a == atom).count()
    }

    pub fn is_known(&self) -> bool {
        FORMULAS.iter().any(|f| f.parse::<Pattern>().ok().as_ref() == Some(self))
    }

    /// Parses and checks membership in [`FORMULAS`].
    pub fn known(s: &str) -> Result<Self, DatagenError> {
        let p: Pattern = s.parse()?;
        if p.is_known() {
            Ok(p)
        } else {
            Err(DatagenError::UnknownFormula(p.to_string()))
        }
    }
}

impl FromStr for Pattern {
    type Err = DatagenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DatagenError::BadPattern(s.to_string());
        let sides = s
            .replace("->", "→")
            .split('→')
            .map(|side| {
                side.split('|')
                    .map(|a| match a.trim() {
                        "a_c" => Ok(Atom::Ac),
                        "a_d" => Ok(Atom::Ad),
                        "t" => Ok(Atom::T),
                        _ => Err(bad()),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if sides.len() < 2 {
            return Err(bad());
        }
        Ok(Pattern { sides })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, side) in self.sides.iter().enumerate() {
            if i > 0 {
                f.write_str("→")?;
            }
            for (j, a) in side.iter().enumerate() {
                if j > 0 {
                    f.write_str("|")?;
                }
                f.write_str(a.as_str())?;
            }
        }
        Ok(())
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas_round_trip() {
        for f in FORMULAS {
            let p: Pattern = f.parse().unwrap();
            assert_eq!(p.to_string(), *f);
            assert!(p.is_known());
        }
        assert_eq!("a_c -> t | a_d".parse::<Pattern>().unwrap().to_string(), "a_c→t|a_d");
    }

    #[test]
    fn rejects_malformed_and_unknown() {
        for bad in ["", "t", "a_c→", "x→t", "a_c→t||a_d"] {
            assert!(matches!(bad.parse::<Pattern>(), Err(DatagenError::BadPattern(_))), "{bad}");
        }
        assert!(matches!(Pattern::known("a_d→t"), Err(DatagenError::UnknownFormula(_))));
    }

    #[test]
    fn sides() {
        let p: Pattern = "a_c|a_c→t|a_d".parse().unwrap();
        assert_eq!(p.query(), &[Atom::Ac, Atom::Ac]);
        assert_eq!(p.responses().copied().collect::<Vec<_>>(), [Atom::T, Atom::Ad]);
        assert_eq!(p.count(Atom::Ac), 2);
    }
}
