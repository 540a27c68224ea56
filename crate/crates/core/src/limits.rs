/// Size caps shared by evaluation, enumeration and the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest set accepted by the explicit `powerset` primitive.
    pub powerset_symbols: usize,
    /// Largest number of combinations a single generator may produce in memory.
    pub combinations: u64,
    /// Largest number of rows materialized for a matrix or a dedup pass.
    pub rows: usize,
    /// Largest family the oracle is willing to build.
    pub oracle_results: usize,
    /// Largest matrix the oracle compares exhaustively.
    pub oracle_rows: usize,
    /// Largest number of row pairs the oracle compares.
    pub oracle_pairs: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            powerset_symbols: 24,
            combinations: 1 << 24,
            rows: 1 << 26,
            oracle_results: 1 << 20,
            oracle_rows: 100_000,
            oracle_pairs: 1 << 24,
        }
    }
}
