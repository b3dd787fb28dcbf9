//! Distance-weighted reasoning and memory scores.
//!
//! Grades are kept in half units so every score is an exact fraction until
//! it is printed.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    Zero,
    Half,
    Full,
}

impl Grade {
    pub const ALL: [Grade; 3] = [Grade::Zero, Grade::Half, Grade::Full];

    pub fn half_units(self) -> u64 {
        match self {
            Grade::Zero => 0,
            Grade::Half => 1,
            Grade::Full => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Grade::Zero => "0",
            Grade::Half => "0.5",
            Grade::Full => "1",
        }
    }

    pub fn parse(s: &str) -> Option<Grade> {
        match s.trim() {
            "0" | "0.0" => Some(Grade::Zero),
            "0.5" | ".5" => Some(Grade::Half),
            "1" | "1.0" => Some(Grade::Full),
            _ => None,
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoringError {
    #[error("grade vector is missing indices {missing:?}")]
    IncompleteGradeVector { missing: Vec<u8> },
    #[error("grade index {0} is outside the scored range")]
    IndexOutOfRange(u8),
}

/// Grades keyed by distance (reasoning) or step count (memory).
pub type GradeVector = BTreeMap<u8, Grade>;

pub fn grade_vector(entries: impl IntoIterator<Item = (u8, Grade)>) -> GradeVector {
    entries.into_iter().collect()
}

/// A percentage held as the exact fraction `100 * num / den`.
#[derive(Debug, Clone, Copy)]
pub struct Score {
    num: u64,
    den: u64,
}

impl Score {
    /// Hundredths of a percent, rounded half up.
    pub fn hundredths(&self) -> u64 {
        let scaled = u128::from(self.num) * 10_000;
        let den = u128::from(self.den);
        ((scaled * 2 + den) / (den * 2)) as u64
    }

    pub fn as_f64(&self) -> f64 {
        100.0 * self.num as f64 / self.den as f64
    }

    pub fn is_perfect(&self) -> bool {
        self.num == self.den
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Score) -> bool {
        u128::from(self.num) * u128::from(other.den) == u128::from(other.num) * u128::from(self.den)
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Score) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Score) -> std::cmp::Ordering {
        (u128::from(self.num) * u128::from(other.den))
            .cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        write!(f, "{}.{:02}", h / 100, h % 100)
    }
}

pub const REASONING_DISTANCES: std::ops::RangeInclusive<u8> = 2..=5;
pub const MEMORY_STEPS: std::ops::RangeInclusive<u8> = 1..=5;

fn weighted_half_units(
    g: &GradeVector,
    range: std::ops::RangeInclusive<u8>,
) -> Result<u64, ScoringError> {
    if let Some(&bad) = g.keys().find(|i| !range.contains(i)) {
        return Err(ScoringError::IndexOutOfRange(bad));
    }
    let missing: Vec<u8> = range.clone().filter(|i| !g.contains_key(i)).collect();
    if !missing.is_empty() {
        return Err(ScoringError::IncompleteGradeVector { missing });
    }
    Ok(range.map(|i| u64::from(i) * g[&i].half_units()).sum())
}

fn weight_total(range: std::ops::RangeInclusive<u8>) -> u64 {
    range.map(u64::from).sum()
}

/// `100 * Σ p_i·i / Σ i` over distances 2..=5.
pub fn reasoning_score(g: &GradeVector) -> Result<Score, ScoringError> {
    let h = weighted_half_units(g, REASONING_DISTANCES)?;
    Ok(Score {
        num: h,
        den: 2 * weight_total(REASONING_DISTANCES),
    })
}

/// `100 * (1/4 · Σ p1_i·i / Σ i + 3/4 · Σ p2_i·i / Σ i)` over steps 1..=5,
/// where `g1` holds the distance-1 grades and `g2` the distance-2 grades.
pub fn memory_score(g1: &GradeVector, g2: &GradeVector) -> Result<Score, ScoringError> {
    let h1 = weighted_half_units(g1, MEMORY_STEPS)?;
    let h2 = weighted_half_units(g2, MEMORY_STEPS)?;
    Ok(Score {
        num: h1 + 3 * h2,
        den: 4 * 2 * weight_total(MEMORY_STEPS),
    })
}

/// The `scores.txt` body.
pub fn render_scores(reasoning: &Score, memory: &Score) -> String {
    format!("reasoning={reasoning}\nmemory={memory}\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use Grade::{Full as F, Half as H, Zero as Z};

    fn reasoning(p: [Grade; 4]) -> String {
        let g = grade_vector((2..=5).zip(p));
        reasoning_score(&g).unwrap().to_string()
    }

    #[test]
    fn reasoning_examples() {
        assert_eq!(reasoning([H, Z, Z, Z]), "7.14");
        assert_eq!(reasoning([F, F, F, F]), "100.00");
        assert_eq!(reasoning([Z, Z, Z, Z]), "0.00");
        assert_eq!(reasoning([F, F, F, H]), "82.14");
    }

    #[test]
    fn memory_examples() {
        let all = |g| grade_vector((1..=5).map(|i| (i, g)));
        assert_eq!(
            memory_score(&all(F), &all(F)).unwrap().to_string(),
            "100.00"
        );
        assert_eq!(memory_score(&all(F), &all(Z)).unwrap().to_string(), "25.00");
        let g1 = grade_vector((1..=5).zip([Z, F, F, F, F]));
        let g2 = grade_vector((1..=5).zip([F, F, F, H, F]));
        assert_eq!(memory_score(&g1, &g2).unwrap().to_string(), "88.33");
    }

    #[test]
    fn incomplete_and_out_of_range() {
        let g = grade_vector([(2, F), (3, F), (5, F)]);
        assert_eq!(
            reasoning_score(&g).unwrap_err(),
            ScoringError::IncompleteGradeVector { missing: vec![4] }
        );
        let g = grade_vector([(1, F), (2, F), (3, F), (4, F), (5, F)]);
        assert_eq!(
            reasoning_score(&g).unwrap_err(),
            ScoringError::IndexOutOfRange(1)
        );
    }

    #[test]
    fn rounding_is_half_up() {
        let s = Score { num: 1, den: 8 };
        assert_eq!(s.to_string(), "12.50");
        let s = Score { num: 1, den: 3 };
        assert_eq!(s.to_string(), "33.33");
        let s = Score { num: 2, den: 3 };
        assert_eq!(s.to_string(), "66.67");
    }

    #[test]
    fn grade_text() {
        for g in Grade::ALL {
            assert_eq!(Grade::parse(g.as_str()), Some(g));
        }
        assert_eq!(Grade::parse("0.7"), None);
    }

    #[test]
    fn scores_file() {
        let one = reasoning_score(&grade_vector((2..=5).map(|i| (i, F)))).unwrap();
        let zero = reasoning_score(&grade_vector((2..=5).map(|i| (i, Z)))).unwrap();
        assert_eq!(
            render_scores(&one, &zero),
            "reasoning=100.00\nmemory=0.00\n"
        );
    }
}
