//! Guessing Random Additive Noise Decoding.
//!
//! Noise patterns are queried in binary-symmetric-channel likelihood order
//! (see [`crate::pattern`]) and the first one whose removal leaves a codeword
//! is reported. GRAND runs without a budget, GRANDAB stops after every
//! pattern up to a Hamming weight has been tried, and SGRANDAB restricts the
//! patterns to the positions a reliability mask marks as unreliable.
//!
//! A query is a zero test of the syndrome. The engine computes `H y^T` once
//! and then XORs columns of `H`; for a weight-`w` class it walks the top
//! `w - 1` flip positions in colex order and resolves the last one with a
//! hash lookup of the remaining syndrome among the columns. The query count
//! of a hit is recovered from its colex rank, so the reported `Q` is exactly
//! what a one-pattern-at-a-time search would report.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::ca_polar::Code;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::pattern::{binomial, count_up_to_weight, PatternCursor};

/// Maximum number of codebook queries, `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GuessBudget(Option<u64>);

impl GuessBudget {
    /// GRAND: no abandonment.
    pub const UNBOUNDED: GuessBudget = GuessBudget(None);

    pub fn queries(limit: u64) -> Self {
        assert!(limit >= 1, "a guess budget must allow at least one query");
        GuessBudget(Some(limit))
    }

    /// Enough queries for every pattern of weight at most `w` on `n`
    /// positions, `T = sum_{b<=w} C(n, b)`.
    pub fn up_to_weight(n: usize, w: usize) -> Self {
        GuessBudget(Some(u64::try_from(count_up_to_weight(n, w)).unwrap_or(u64::MAX)))
    }

    pub fn limit(self) -> Option<u64> {
        self.0
    }

    pub fn is_unbounded(self) -> bool {
        self.0.is_none()
    }
}

/// Result of one decode: `(c*, d, Q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// The decoded codeword, absent on abandonment.
    pub codeword: Option<BitVector>,
    /// Number of codebook membership queries made, including the successful one.
    pub queries: u64,
}

impl DecodeOutcome {
    /// The flag `d`.
    pub fn success(&self) -> bool {
        self.codeword.is_some()
    }
}

/// Lowest-rank solution found in one weight class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hit {
    /// Colex rank within the weight class.
    pub rank: u128,
    /// Flip positions as ascending indices into the search support.
    pub subset: Vec<usize>,
}

const EMPTY: u32 = u32::MAX;

#[inline(always)]
fn mix<const W: usize>(key: &[u64; W]) -> u64 {
    let mut h = 0u64;
    for &k in key {
        h = (h ^ k).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
    h
}

#[inline(always)]
fn xor<const W: usize>(a: &[u64; W], b: &[u64; W]) -> [u64; W] {
    let mut out = *a;
    for (o, x) in out.iter_mut().zip(b) {
        *o ^= x;
    }
    out
}

/// Open-addressing map from a column value to the smallest index holding it.
#[derive(Clone, Debug)]
struct ColumnTable<const W: usize> {
    keys: Vec<[u64; W]>,
    first: Vec<u32>,
    shift: u32,
    mask: usize,
}

impl<const W: usize> ColumnTable<W> {
    fn new(cols: &[[u64; W]]) -> Self {
        let capacity = (2 * cols.len()).next_power_of_two().max(16);
        let mut table = ColumnTable {
            keys: vec![[0; W]; capacity],
            first: vec![EMPTY; capacity],
            shift: 64 - capacity.trailing_zeros(),
            mask: capacity - 1,
        };
        for (i, c) in cols.iter().enumerate() {
            let mut slot = table.slot(c);
            loop {
                if table.first[slot] == EMPTY {
                    table.keys[slot] = *c;
                    table.first[slot] = i as u32;
                    break;
                }
                if table.keys[slot] == *c {
                    break;
                }
                slot = (slot + 1) & table.mask;
            }
        }
        table
    }

    #[inline(always)]
    fn slot(&self, key: &[u64; W]) -> usize {
        (mix(key) >> self.shift) as usize
    }

    /// Smallest index whose column equals `key`, or `EMPTY`.
    #[inline(always)]
    fn lookup(&self, key: &[u64; W]) -> u32 {
        let mut slot = self.slot(key);
        loop {
            let i = self.first[slot];
            if i == EMPTY || self.keys[slot] == *key {
                return i;
            }
            slot = (slot + 1) & self.mask;
        }
    }
}

enum Flow {
    Hit(u128),
    Miss,
    Stop,
}

/// Parity-check columns of one search support, packed `W` words wide.
#[derive(Clone, Debug)]
pub struct Space<const W: usize> {
    cols: Vec<[u64; W]>,
    table: ColumnTable<W>,
}

impl<const W: usize> Space<W> {
    fn new(cols: Vec<[u64; W]>) -> Self {
        let table = ColumnTable::new(&cols);
        Space { cols, table }
    }

    /// Support size `l`.
    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    /// Lowest-rank weight-`w` subset whose columns XOR to `target`, among
    /// subsets whose largest element lies in `top` and whose colex rank is
    /// below `rank_limit`.
    pub fn find(&self, target: &[u64; W], w: usize, top: Range<usize>, rank_limit: u128) -> Option<Hit> {
        let l = self.cols.len();
        if w == 0 || w > l {
            return None;
        }
        let top = top.start.max(w - 1)..top.end.min(l);
        if w == 1 {
            for t in top {
                if t as u128 >= rank_limit {
                    return None;
                }
                if self.cols[t] == *target {
                    return Some(Hit { rank: t as u128, subset: vec![t] });
                }
            }
            return None;
        }
        let binom = BinomialTable::new(l, w);
        let mut chosen = Vec::with_capacity(w);
        for t in top {
            let r0 = binom.get(t, w);
            if r0 >= rank_limit {
                return None;
            }
            chosen.push(t);
            let partial = xor(target, &self.cols[t]);
            match self.descend(w - 1, t, &partial, r0, rank_limit, &binom, &mut chosen) {
                Flow::Hit(rank) => {
                    chosen.reverse();
                    return Some(Hit { rank, subset: chosen });
                }
                Flow::Stop => return None,
                Flow::Miss => {
                    chosen.pop();
                }
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        level: usize,
        upper: usize,
        partial: &[u64; W],
        base: u128,
        limit: u128,
        binom: &BinomialTable,
        chosen: &mut Vec<usize>,
    ) -> Flow {
        if level == 1 {
            let i = self.table.lookup(partial);
            if (i as usize) < upper {
                let rank = base + i as u128;
                if rank >= limit {
                    return Flow::Stop;
                }
                chosen.push(i as usize);
                return Flow::Hit(rank);
            }
            return Flow::Miss;
        }
        if level == 2 {
            // Innermost loop, kept flat.
            for t in 1..upper {
                let r0 = base + binom.get(t, 2);
                if r0 >= limit {
                    return Flow::Stop;
                }
                let p = xor(partial, &self.cols[t]);
                let i = self.table.lookup(&p);
                if (i as usize) < t {
                    let rank = r0 + i as u128;
                    if rank >= limit {
                        return Flow::Stop;
                    }
                    chosen.push(t);
                    chosen.push(i as usize);
                    return Flow::Hit(rank);
                }
            }
            return Flow::Miss;
        }
        for t in (level - 1)..upper {
            let r0 = base + binom.get(t, level);
            if r0 >= limit {
                return Flow::Stop;
            }
            chosen.push(t);
            let p = xor(partial, &self.cols[t]);
            match self.descend(level - 1, t, &p, r0, limit, binom, chosen) {
                Flow::Miss => {
                    chosen.pop();
                }
                other => return other,
            }
        }
        Flow::Miss
    }
}

struct BinomialTable {
    width: usize,
    values: Vec<u128>,
}

impl BinomialTable {
    fn new(n: usize, k: usize) -> Self {
        let width = k + 1;
        let mut values = vec![0u128; n * width];
        for t in 0..n {
            for j in 0..width {
                values[t * width + j] = binomial(t, j);
            }
        }
        BinomialTable { width, values }
    }

    #[inline(always)]
    fn get(&self, t: usize, j: usize) -> u128 {
        self.values[t * self.width + j]
    }
}

/// Strategy for searching one weight class; lets callers split the class
/// into colex ranges and search them concurrently.
pub trait WeightSearch {
    fn find<const W: usize>(&self, space: &Space<W>, target: &[u64; W], weight: usize, rank_limit: u128) -> Option<Hit>;
}

/// Searches each weight class in one pass.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl WeightSearch for Serial {
    fn find<const W: usize>(&self, space: &Space<W>, target: &[u64; W], weight: usize, rank_limit: u128) -> Option<Hit> {
        space.find(target, weight, 0..space.len(), rank_limit)
    }
}

/// Outcome of a search, in support coordinates.
struct Search {
    subset: Option<Vec<usize>>,
    queries: u64,
}

fn saturate(q: u128) -> u64 {
    u64::try_from(q).unwrap_or(u64::MAX)
}

fn run_search<const W: usize, S: WeightSearch>(
    space: &Space<W>,
    target: &[u64; W],
    budget: GuessBudget,
    searcher: &S,
) -> Search {
    let limit = budget.limit().map_or(u128::MAX, u128::from);
    // Weight 0 is the first query.
    if target.iter().all(|&w| w == 0) {
        return Search { subset: Some(Vec::new()), queries: 1 };
    }
    let mut spent: u128 = 1;
    let l = space.len();
    for w in 1..=l {
        if spent >= limit {
            return Search { subset: None, queries: saturate(limit) };
        }
        let remaining = limit - spent;
        let class = binomial(l, w);
        if let Some(hit) = searcher.find(space, target, w, class.min(remaining)) {
            return Search { subset: Some(hit.subset), queries: saturate(spent + hit.rank + 1) };
        }
        spent = spent.saturating_add(class);
    }
    // Every pattern on the support was tried.
    Search { subset: None, queries: saturate(spent.min(limit)) }
}

#[derive(Clone, Debug)]
enum Engine {
    W1(Space<1>),
    W2(Space<2>),
    W4(Space<4>),
    W8(Space<8>),
    /// More than 512 parity checks: cursor-driven reference search.
    Wide,
}

fn pack<const W: usize>(columns: &[BitVector]) -> Vec<[u64; W]> {
    columns
        .iter()
        .map(|c| {
            let mut out = [0u64; W];
            out[..c.words().len()].copy_from_slice(c.words());
            out
        })
        .collect()
}

fn engine_for(columns: &[BitVector], redundancy: usize) -> Engine {
    match redundancy.div_ceil(64) {
        0 | 1 => Engine::W1(Space::new(pack(columns))),
        2 => Engine::W2(Space::new(pack(columns))),
        3 | 4 => Engine::W4(Space::new(pack(columns))),
        5..=8 => Engine::W8(Space::new(pack(columns))),
        _ => Engine::Wide,
    }
}

/// A GRAND decoder bound to one code's parity-check matrix. Immutable;
/// decodes may run concurrently on a shared instance.
#[derive(Clone, Debug)]
pub struct Grand {
    n: usize,
    redundancy: usize,
    columns: Vec<BitVector>,
    parity_check: BitMatrix,
    full: Engine,
}

impl Grand {
    pub fn new(code: &Code) -> Self {
        Self::from_parity_check(code.parity_check().clone())
    }

    pub fn from_parity_check(parity_check: BitMatrix) -> Self {
        let columns: Vec<BitVector> = (0..parity_check.cols()).map(|j| parity_check.column(j)).collect();
        let redundancy = parity_check.rows();
        let full = engine_for(&columns, redundancy);
        Grand { n: parity_check.cols(), redundancy, columns, parity_check, full }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, v: &BitVector) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: v.len() });
        }
        Ok(())
    }

    /// GRAND (unbounded budget) or GRANDAB with an explicit query budget.
    pub fn decode(&self, y: &BitVector, budget: GuessBudget) -> Result<DecodeOutcome> {
        self.decode_with(y, budget, &Serial)
    }

    /// GRANDAB abandoning after all patterns of weight at most `ab`.
    pub fn decode_ab(&self, y: &BitVector, ab: usize) -> Result<DecodeOutcome> {
        self.decode(y, GuessBudget::up_to_weight(self.n, ab))
    }

    /// SGRANDAB: only positions with `mask` bit 1 (unreliable) may be flipped.
    pub fn decode_masked(&self, y: &BitVector, mask: &BitVector, budget: GuessBudget) -> Result<DecodeOutcome> {
        self.decode_masked_with(y, mask, budget, &Serial)
    }

    pub fn decode_with<S: WeightSearch>(&self, y: &BitVector, budget: GuessBudget, searcher: &S) -> Result<DecodeOutcome> {
        self.check(y)?;
        let support: Vec<usize> = (0..self.n).collect();
        Ok(self.dispatch(y, &self.full, &support, budget, searcher))
    }

    pub fn decode_masked_with<S: WeightSearch>(
        &self,
        y: &BitVector,
        mask: &BitVector,
        budget: GuessBudget,
        searcher: &S,
    ) -> Result<DecodeOutcome> {
        self.check(y)?;
        self.check(mask)?;
        let support: Vec<usize> = mask.iter_ones().collect();
        if support.len() == self.n {
            return Ok(self.dispatch(y, &self.full, &support, budget, searcher));
        }
        let selected: Vec<BitVector> = support.iter().map(|&p| self.columns[p].clone()).collect();
        let engine = engine_for(&selected, self.redundancy);
        Ok(self.dispatch(y, &engine, &support, budget, searcher))
    }

    fn dispatch<S: WeightSearch>(
        &self,
        y: &BitVector,
        engine: &Engine,
        support: &[usize],
        budget: GuessBudget,
        searcher: &S,
    ) -> DecodeOutcome {
        let search = match engine {
            Engine::W1(space) => run_search(space, &self.target(y), budget, searcher),
            Engine::W2(space) => run_search(space, &self.target(y), budget, searcher),
            Engine::W4(space) => run_search(space, &self.target(y), budget, searcher),
            Engine::W8(space) => run_search(space, &self.target(y), budget, searcher),
            Engine::Wide => {
                let mut cursor = PatternCursor::with_support(self.n, support.to_vec());
                return cursor_search(&self.parity_check, &self.columns, y, &mut cursor, budget);
            }
        };
        let codeword = search.subset.map(|subset| {
            let mut c = y.clone();
            for i in subset {
                c.flip(support[i]);
            }
            c
        });
        DecodeOutcome { codeword, queries: search.queries }
    }

    /// Syndrome `H y^T`, packed.
    fn target<const W: usize>(&self, y: &BitVector) -> [u64; W] {
        let mut s = [0u64; W];
        for j in y.iter_ones() {
            for (a, b) in s.iter_mut().zip(self.columns[j].words()) {
                *a ^= b;
            }
        }
        s
    }
}

fn cursor_search(
    parity_check: &BitMatrix,
    columns: &[BitVector],
    y: &BitVector,
    cursor: &mut PatternCursor,
    budget: GuessBudget,
) -> DecodeOutcome {
    let limit = budget.limit().unwrap_or(u64::MAX);
    let mut syndrome = parity_check.mat_vec_mul(y).expect("length checked by caller");
    let mut queries = 0u64;
    while queries < limit {
        let Some(delta) = cursor.advance() else { break };
        for &d in delta {
            syndrome.xor_assign(&columns[d]).expect("column length is the syndrome length");
        }
        queries += 1;
        if syndrome.is_zero() {
            let mut c = y.clone();
            for p in cursor.positions() {
                c.flip(p);
            }
            return DecodeOutcome { codeword: Some(c), queries };
        }
    }
    DecodeOutcome { codeword: None, queries }
}

/// One-pattern-at-a-time decoder driven by [`PatternCursor`] with an
/// incrementally updated syndrome. Same contract as [`Grand`]; slower, and
/// kept as an independent implementation to check the fast engine against.
pub fn reference_decode(code: &Code, y: &BitVector, mask: Option<&BitVector>, budget: GuessBudget) -> Result<DecodeOutcome> {
    let h = code.parity_check();
    let n = h.cols();
    if y.len() != n {
        return Err(Error::Dimension { expected: n, found: y.len() });
    }
    let mut cursor = match mask {
        Some(m) if m.len() != n => return Err(Error::Dimension { expected: n, found: m.len() }),
        Some(m) => PatternCursor::masked(m),
        None => PatternCursor::full(n),
    };
    let columns: Vec<BitVector> = (0..n).map(|j| h.column(j)).collect();
    Ok(cursor_search(h, &columns, y, &mut cursor, budget))
}

/// GRAND with budget `T` (unbounded for plain GRAND).
pub fn grand_decode(y: &BitVector, code: &Code, budget: GuessBudget) -> Result<DecodeOutcome> {
    Grand::new(code).decode(y, budget)
}

/// GRANDAB: abandon once every pattern of weight at most `ab` was queried.
pub fn grandab_decode(y: &BitVector, code: &Code, ab: usize) -> Result<DecodeOutcome> {
    Grand::new(code).decode_ab(y, ab)
}

/// SGRANDAB with mask `s` (1 = unreliable).
pub fn sgrandab_decode(y: &BitVector, s: &BitVector, code: &Code, budget: GuessBudget) -> Result<DecodeOutcome> {
    Grand::new(code).decode_masked(y, s, budget)
}

/// Query budget allowing every weight-`w` pattern on a full `n`-bit mask,
/// independent of the actual mask size.
pub fn sgrandab_budget(n: usize, w: usize) -> GuessBudget {
    GuessBudget::up_to_weight(n, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca_polar::{CodeSpec, CrcPolynomial, InfoSetRule, Interleaver};
    use crate::pattern::colex_rank;

    fn small_code() -> Code {
        // [8,4] Reed-Muller(1,3): minimum distance 4.
        let spec = CodeSpec {
            name: None,
            n: 8,
            k: 4,
            crc: CrcPolynomial::NONE,
            interleaver: Interleaver::Identity,
            info_set: InfoSetRule::Explicit(vec![3, 5, 6, 7]),
        };
        Code::build(&spec).unwrap()
    }

    fn hamming74() -> Code {
        let rows = ["1000110", "0100011", "0010111", "0001101"];
        let g = BitMatrix::from_rows(7, rows.iter().map(|r| r.parse().unwrap()).collect()).unwrap();
        Code::from_generator(g).unwrap()
    }

    #[test]
    fn noiseless_word_takes_one_query() {
        let code = small_code();
        let c = code.encode(&"1011".parse().unwrap()).unwrap();
        let out = grand_decode(&c, &code, GuessBudget::UNBOUNDED).unwrap();
        assert_eq!(out, DecodeOutcome { codeword: Some(c), queries: 1 });
    }

    #[test]
    fn single_flip_query_count_is_rank_based() {
        let code = hamming74();
        let c = code.encode(&"0110".parse().unwrap()).unwrap();
        for i in 0..7 {
            let mut y = c.clone();
            y.flip(i);
            let out = grand_decode(&y, &code, GuessBudget::UNBOUNDED).unwrap();
            assert_eq!(out.codeword.as_ref(), Some(&c));
            assert_eq!(out.queries, 2 + i as u64);
        }
    }

    #[test]
    fn forced_abandonment_counts_every_query() {
        let code = small_code();
        // Weight-2 noise on a distance-4 code with AB = 1 can never decode.
        let mut y = BitVector::zeros(8);
        y.flip(0);
        y.flip(5);
        let out = grandab_decode(&y, &code, 1).unwrap();
        assert!(!out.success());
        assert_eq!(out.queries, 1 + 8);
    }

    #[test]
    fn masked_reductions() {
        let code = hamming74();
        let grand = Grand::new(&code);
        let c = code.encode(&"1101".parse().unwrap()).unwrap();
        let budget = GuessBudget::queries(20);
        let mut y = c.clone();
        y.flip(1);
        y.flip(4);
        assert_eq!(
            grand.decode_masked(&y, &BitVector::ones(7), budget).unwrap(),
            grand.decode(&y, budget).unwrap()
        );
        let zeros = BitVector::zeros(7);
        assert_eq!(
            grand.decode_masked(&c, &zeros, budget).unwrap(),
            DecodeOutcome { codeword: Some(c.clone()), queries: 1 }
        );
        assert_eq!(grand.decode_masked(&y, &zeros, budget).unwrap(), DecodeOutcome { codeword: None, queries: 1 });
    }

    #[test]
    fn budget_cuts_inside_a_weight_class() {
        let code = hamming74();
        let grand = Grand::new(&code);
        let c = BitVector::zeros(7);
        let mut y = c.clone();
        y.flip(6);
        // The single flip at position 6 is query 8.
        assert_eq!(grand.decode(&y, GuessBudget::queries(7)).unwrap(), DecodeOutcome { codeword: None, queries: 7 });
        assert_eq!(grand.decode(&y, GuessBudget::queries(8)).unwrap().queries, 8);
    }

    #[test]
    fn fast_engine_matches_reference_exhaustively() {
        let code = small_code();
        let grand = Grand::new(&code);
        for w in 0u32..256 {
            let y = BitVector::from_fn(8, |i| (w >> i) & 1 == 1);
            for budget in [GuessBudget::UNBOUNDED, GuessBudget::queries(5), GuessBudget::up_to_weight(8, 1)] {
                assert_eq!(
                    grand.decode(&y, budget).unwrap(),
                    reference_decode(&code, &y, None, budget).unwrap(),
                    "y = {y}"
                );
            }
            let mask = BitVector::from_fn(8, |i| (w.wrapping_mul(37) >> i) & 1 == 1);
            assert_eq!(
                grand.decode_masked(&y, &mask, GuessBudget::UNBOUNDED).unwrap(),
                reference_decode(&code, &y, Some(&mask), GuessBudget::UNBOUNDED).unwrap()
            );
        }
    }

    #[test]
    fn find_respects_ranges_and_limits() {
        let code = hamming74();
        let grand = Grand::new(&code);
        let Engine::W1(space) = &grand.full else { panic!("expected a one-word engine") };
        // Target = columns 0 ^ 2 ^ 5.
        let target = [space.cols[0][0] ^ space.cols[2][0] ^ space.cols[5][0]];
        let hit = space.find(&target, 3, 0..7, u128::MAX).unwrap();
        assert_eq!(colex_rank(&hit.subset), hit.rank);
        let mut xor = 0;
        for &i in &hit.subset {
            xor ^= space.cols[i][0];
        }
        assert_eq!(xor, target[0]);
        assert!(space.find(&target, 3, 0..7, hit.rank).is_none());
        let upper = *hit.subset.last().unwrap();
        if let Some(later) = space.find(&target, 3, upper + 1..7, u128::MAX) {
            assert!(later.rank > hit.rank);
        }
    }

    #[test]
    fn budget_helpers() {
        assert_eq!(sgrandab_budget(128, 3).limit(), Some(349_633));
        assert_eq!(sgrandab_budget(128, 0).limit(), Some(1));
        assert_eq!(sgrandab_budget(128, 1).limit(), Some(129));
        assert_eq!(GuessBudget::up_to_weight(128, 40).limit(), Some(u64::MAX));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let code = hamming74();
        assert!(grand_decode(&BitVector::zeros(6), &code, GuessBudget::UNBOUNDED).is_err());
        assert!(sgrandab_decode(&BitVector::zeros(7), &BitVector::zeros(8), &code, GuessBudget::UNBOUNDED).is_err());
    }
}
