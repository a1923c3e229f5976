use std::fmt;
use std::str::FromStr;

use crate::approx::{families, Subspace};
use crate::error::{Error, Result};
use crate::haar::LevelRange;

/// Named subspace constructions available to scans and certification runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyKind {
    HaarTruncation,
    UniformSpline,
    Random,
    /// Every coordinate of the band. Its dimension usually exceeds `n`.
    Full,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] =
        [Self::HaarTruncation, Self::UniformSpline, Self::Random, Self::Full];

    pub fn name(self) -> &'static str {
        match self {
            Self::HaarTruncation => "haar_truncation",
            Self::UniformSpline => "uniform_spline",
            Self::Random => "random",
            Self::Full => "full",
        }
    }

    /// Dimension the construction produces for budget `n` over `range`.
    pub fn planned_dim(self, n: u64, range: LevelRange) -> usize {
        match self {
            Self::Full => range.dim(),
            Self::UniformSpline => n.saturating_sub(1) as usize,
            _ => n as usize,
        }
    }

    /// Builds the subspace. `seed` only matters for [`FamilyKind::Random`].
    pub fn build(self, n: u64, range: LevelRange, seed: u64) -> Result<Subspace> {
        let n = usize::try_from(n).map_err(|_| Error::Capacity(format!("n = {n} too large")))?;
        match self {
            Self::HaarTruncation => families::haar_truncation(n, range),
            Self::UniformSpline => families::uniform_spline(n, range),
            Self::Random => families::random_subspace(n, range, seed),
            Self::Full => Ok(families::full_space(range)),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "haar_truncation" | "haar" => Ok(Self::HaarTruncation),
            "uniform_spline" | "spline" => Ok(Self::UniformSpline),
            "random" => Ok(Self::Random),
            "full" | "full_range" => Ok(Self::Full),
            other => Err(Error::Parameter(format!(
                "unknown family '{other}' (expected haar_truncation, uniform_spline, random or full)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in FamilyKind::ALL {
            assert_eq!(f.name().parse::<FamilyKind>().unwrap(), f);
        }
        assert_eq!("full-range".parse::<FamilyKind>().unwrap(), FamilyKind::Full);
        assert!("splines".parse::<FamilyKind>().is_err());
    }

    #[test]
    fn built_dimensions_match_plan() {
        let range = LevelRange::new(4, 6).unwrap();
        for f in FamilyKind::ALL {
            let v = f.build(16, range, 5).unwrap();
            assert_eq!(v.dim(), f.planned_dim(16, range), "{f}");
        }
    }
}
