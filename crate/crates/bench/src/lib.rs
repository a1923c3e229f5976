//! Fixtures shared by the criterion benchmarks.

use widthlab::experiment::FamilyKind;
use widthlab::{level_range, LevelRange, Subspace};

/// The band and subspace a scan builds for `(n, family)` at `q = 4`,
/// `gamma = 0.3`.
pub fn scan_fixture(n: u64, family: FamilyKind, seed: u64) -> (LevelRange, Subspace) {
    let range = level_range(n, 0.3, 4.0).expect("valid band");
    let v = family.build(n, range, seed).expect("fits in the band");
    (range, v)
}
