//! Kin coordinates and the designation lexicon that names them.
//!
//! A [`KinCoord`] places a relative with respect to a reference person:
//! how the two are linked (self, by blood, as the spouse of a blood
//! relative, or as a blood relative of one's spouse), how many generations
//! separate each of them from their closest common ancestor, which parent's
//! side the relation runs through, relative age for siblings, and the
//! relative's gender.

use std::fmt;

use thiserror::Error;

use crate::schema::Gender;

pub const SHIPPED_LEXICON: &str = include_str!("../../data/lexicon.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Link {
    SelfRef,
    Blood,
    /// Spouse of a blood relative (or of oneself).
    SpouseOf,
    /// Blood relative of one's spouse.
    ViaSpouse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Paternal,
    Maternal,
}

impl Side {
    pub fn of_parent(gender: Gender) -> Side {
        match gender {
            Gender::Male => Side::Paternal,
            Gender::Female => Side::Maternal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elder {
    Older,
    Younger,
}

impl Elder {
    pub fn flip(self) -> Elder {
        match self {
            Elder::Older => Elder::Younger,
            Elder::Younger => Elder::Older,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KinCoord {
    pub link: Link,
    pub up: u8,
    pub down: u8,
    pub side: Option<Side>,
    pub elder: Option<Elder>,
    pub gender: Option<Gender>,
}

impl KinCoord {
    /// Builds a coordinate, dropping the fields that carry no meaning for it:
    /// side below two generations up, relative age outside blood siblings,
    /// and gender for the reference person themself.
    pub fn new(
        link: Link,
        up: u8,
        down: u8,
        side: Option<Side>,
        elder: Option<Elder>,
        gender: Option<Gender>,
    ) -> KinCoord {
        if link == Link::SelfRef {
            return KinCoord::self_ref();
        }
        KinCoord {
            link,
            up,
            down,
            side: if up >= 2 { side } else { None },
            elder: if link == Link::Blood && up == 1 && down == 1 {
                elder
            } else {
                None
            },
            gender,
        }
    }

    pub fn self_ref() -> KinCoord {
        KinCoord {
            link: Link::SelfRef,
            up: 0,
            down: 0,
            side: None,
            elder: None,
            gender: None,
        }
    }

    /// The coordinate of the reference person as seen from the relative.
    /// Side information does not survive the flip.
    pub fn inverse(&self, reference_gender: Gender) -> KinCoord {
        let link = match self.link {
            Link::SelfRef => return KinCoord::self_ref(),
            Link::Blood => Link::Blood,
            Link::SpouseOf if self.up == 0 && self.down == 0 => Link::SpouseOf,
            Link::SpouseOf => Link::ViaSpouse,
            Link::ViaSpouse => Link::SpouseOf,
        };
        KinCoord::new(
            link,
            self.down,
            self.up,
            None,
            self.elder.map(Elder::flip),
            Some(reference_gender),
        )
    }

    pub fn key(&self) -> String {
        format!(
            "{}:{}:{}:{}:{}:{}",
            link_code(self.link),
            self.up,
            self.down,
            self.side.map_or("*", side_code),
            self.elder.map_or("*", elder_code),
            self.gender.map_or("*", gender_code)
        )
    }
}

impl fmt::Display for KinCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

fn link_code(l: Link) -> &'static str {
    match l {
        Link::SelfRef => "self",
        Link::Blood => "blood",
        Link::SpouseOf => "spouse",
        Link::ViaSpouse => "inlaw",
    }
}

fn side_code(s: Side) -> &'static str {
    match s {
        Side::Paternal => "pat",
        Side::Maternal => "mat",
    }
}

fn elder_code(e: Elder) -> &'static str {
    match e {
        Elder::Older => "older",
        Elder::Younger => "younger",
    }
}

fn gender_code(g: Gender) -> &'static str {
    match g {
        Gender::Male => "m",
        Gender::Female => "f",
    }
}

/// Lexicon key: exact link and generations, optional (wildcard) qualifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyPattern {
    pub link: Link,
    pub up: u8,
    pub down: u8,
    pub side: Option<Side>,
    pub elder: Option<Elder>,
    pub gender: Option<Gender>,
}

impl KeyPattern {
    fn matches(&self, c: &KinCoord) -> bool {
        self.link == c.link
            && self.up == c.up
            && self.down == c.down
            && self.side.is_none_or(|s| c.side == Some(s))
            && self.elder.is_none_or(|e| c.elder == Some(e))
            && self.gender.is_none_or(|g| c.gender == Some(g))
    }

    fn specificity(&self) -> usize {
        self.side.is_some() as usize
            + self.elder.is_some() as usize
            + self.gender.is_some() as usize
    }

    /// A representative coordinate for this pattern (wildcards filled with
    /// the first value).
    pub fn representative(&self) -> KinCoord {
        KinCoord::new(
            self.link,
            self.up,
            self.down,
            Some(self.side.unwrap_or(Side::Paternal)),
            self.elder,
            Some(self.gender.unwrap_or(Gender::Male)),
        )
    }

    fn parse(key: &str) -> Option<KeyPattern> {
        let f: Vec<&str> = key.split(':').collect();
        if f.len() != 6 {
            return None;
        }
        let link = match f[0] {
            "self" => Link::SelfRef,
            "blood" => Link::Blood,
            "spouse" => Link::SpouseOf,
            "inlaw" => Link::ViaSpouse,
            _ => return None,
        };
        let side = match f[3] {
            "*" => None,
            "pat" => Some(Side::Paternal),
            "mat" => Some(Side::Maternal),
            _ => return None,
        };
        let elder = match f[4] {
            "*" => None,
            "older" => Some(Elder::Older),
            "younger" => Some(Elder::Younger),
            _ => return None,
        };
        let gender = match f[5] {
            "*" => None,
            "m" => Some(Gender::Male),
            "f" => Some(Gender::Female),
            _ => return None,
        };
        Some(KeyPattern {
            link,
            up: f[1].parse().ok()?,
            down: f[2].parse().ok()?,
            side,
            elder,
            gender,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub key: KeyPattern,
    pub canonical: String,
    pub synonyms: Vec<String>,
}

impl LexiconEntry {
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.canonical.as_str()).chain(self.synonyms.iter().map(String::as_str))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("malformed lexicon at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    version: String,
    entries: Vec<LexiconEntry>,
}

impl Lexicon {
    pub fn shipped() -> Lexicon {
        Lexicon::parse(SHIPPED_LEXICON).expect("shipped lexicon is valid")
    }

    pub fn parse(source: &str) -> Result<Lexicon, LexiconError> {
        let mut version = String::from("unversioned");
        let mut entries = Vec::new();
        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.trim();
            if let Some(v) = text.strip_prefix("# lexicon:") {
                version = v.trim().to_string();
                continue;
            }
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| LexiconError::Malformed {
                line,
                reason: reason.to_string(),
            };
            let f: Vec<&str> = text.split('|').collect();
            if f.len() != 3 {
                return Err(bad("expected `key|canonical|synonyms`"));
            }
            let key = KeyPattern::parse(f[0]).ok_or_else(|| bad("bad coordinate key"))?;
            let canonical = f[1].trim().to_lowercase();
            if canonical.is_empty() {
                return Err(bad("empty canonical term"));
            }
            let synonyms: Vec<String> = f[2]
                .split(',')
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty() && *s != canonical)
                .collect();
            if entries.iter().any(|e: &LexiconEntry| e.key == key) {
                return Err(bad("duplicate key"));
            }
            entries.push(LexiconEntry {
                key,
                canonical,
                synonyms,
            });
        }
        Ok(Lexicon { version, entries })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    /// Most specific entry matching the coordinate.
    pub fn lookup(&self, coord: &KinCoord) -> Option<&LexiconEntry> {
        let mut best: Option<&LexiconEntry> = None;
        for e in self.entries.iter().filter(|e| e.key.matches(coord)) {
            if best.is_none_or(|b| e.key.specificity() > b.key.specificity()) {
                best = Some(e);
            }
        }
        best
    }

    /// Every distinct kin term, canonical and synonym, in lexicon order.
    pub fn all_terms(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in self.entries.iter().flat_map(LexiconEntry::terms) {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }
}
