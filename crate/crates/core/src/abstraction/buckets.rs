//! Hand bucketing: per-round maps from canonical hands to bucket ids.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::canonical::{canonical_board, canonicalize, permute_card, permute_mask, CanonicalIndex, NUM_PREFLOP_CLASSES, SUIT_PERMS};
use super::equity::{equity, EquityMode};
use super::features::{board_features, counts_to_cdf, preflop_histogram, preflop_representatives, BoardFeatures, EquityHistogram, HistogramPolicy};
use super::kmeans::{kmeans, Centroids, KMeansConfig};
use crate::cards::{pair_cards, pair_index, Card, NUM_PAIRS};
use crate::error::Error;
use crate::game::Round;
use crate::FxHashMap;

pub const UNASSIGNED: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq)]
pub enum Assignment {
    /// Bucket per preflop class.
    Preflop(Vec<u32>),
    /// Sorted canonical board masks, each followed by 1326 bucket ids in
    /// the canonical board's labeling (`UNASSIGNED` on blocked pairs).
    Boards { boards: Vec<u64>, table: Vec<u32> },
    /// Sparse `(canonical index, bucket)` pairs sorted by index.
    Explicit(Vec<(u64, u32)>),
    /// Nearest centroid of the exactly computed river equity.
    Nearest,
    /// Every hand in bucket 0.
    Constant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucketMap {
    pub round: Round,
    pub n_buckets: u32,
    pub seed: u64,
    pub policy: HistogramPolicy,
    pub centroids: Centroids,
    pub assignment: Assignment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildConfig {
    pub kmeans: KMeansConfig,
    /// Random boards sampled to fit turn and river centroids.
    pub fit_boards: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig { kmeans: KMeansConfig::default(), fit_boards: 300 }
    }
}

fn board_cards(mask: u64) -> Vec<Card> {
    Card::all().filter(|c| mask & c.mask() != 0).collect()
}

/// Relabelings that fix a (canonical) board.
fn stabilizer(mask: u64) -> Vec<&'static [u8; 4]> {
    SUIT_PERMS.iter().filter(|p| permute_mask(mask, p) == mask).collect()
}

/// Smallest pair index reachable from `pair` under relabelings fixing the board.
fn pair_rep(pair: usize, stab: &[&[u8; 4]]) -> usize {
    let (a, b) = pair_cards(pair);
    stab.iter().map(|p| pair_index(permute_card(a, p), permute_card(b, p))).min().unwrap_or(pair)
}

fn feature_point(f: &BoardFeatures, pair: usize, out: &mut [f32]) {
    if f.dim == 1 {
        out[0] = f.point(pair)[0];
    } else {
        counts_to_cdf(f.point(pair), out);
    }
}

/// Buckets for every pair on a canonical board, written in its labeling.
fn assign_board(mask: u64, f: &BoardFeatures, cents: &Centroids, out: &mut [u32]) {
    let stab = stabilizer(mask);
    let mut buf = vec![0.0f32; f.dim];
    for p in 0..NUM_PAIRS {
        out[p] = UNASSIGNED;
    }
    for p in 0..NUM_PAIRS {
        if !f.live[p] {
            continue;
        }
        let r = pair_rep(p, &stab);
        if out[r] == UNASSIGNED {
            feature_point(f, r, &mut buf);
            out[r] = cents.nearest(&buf);
        }
        out[p] = out[r];
    }
}

fn all_canonical_boards(n: usize) -> Vec<u64> {
    let mut set = BTreeSet::new();
    let deck: Vec<Card> = Card::all().collect();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let cards: Vec<Card> = idx.iter().map(|&i| deck[i]).collect();
        set.insert(canonical_board(&cards).0);
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return set.into_iter().collect();
            }
            i -= 1;
            if idx[i] < 52 - n + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every canonical flop, sorted by mask.
pub fn canonical_flops() -> Vec<u64> {
    all_canonical_boards(3)
}

/// Fitting rows of one canonical board: one row per stabilizer class of live pairs.
fn push_rows(mask: u64, f: &BoardFeatures, rows: &mut Vec<f32>) {
    let stab = stabilizer(mask);
    let mut buf = vec![0.0f32; f.dim];
    for p in 0..NUM_PAIRS {
        if f.live[p] && pair_rep(p, &stab) == p {
            feature_point(f, p, &mut buf);
            rows.extend_from_slice(&buf);
        }
    }
}

impl BucketMap {
    /// Identity preflop bucketing: bucket == class.
    pub fn identity_preflop() -> BucketMap {
        BucketMap {
            round: Round::Preflop,
            n_buckets: NUM_PREFLOP_CLASSES as u32,
            seed: 0,
            policy: HistogramPolicy::default(),
            centroids: Centroids::new(1, Vec::new()),
            assignment: Assignment::Preflop((0..NUM_PREFLOP_CLASSES as u32).collect()),
        }
    }

    /// One bucket holding every hand.
    pub fn constant(round: Round) -> BucketMap {
        BucketMap {
            round,
            n_buckets: 1,
            seed: 0,
            policy: HistogramPolicy::default(),
            centroids: Centroids::new(1, Vec::new()),
            assignment: Assignment::Constant,
        }
    }

    /// Builds the map for one round with `k` buckets.
    pub fn build(round: Round, k: usize, policy: &HistogramPolicy, seed: u64, cfg: &BuildConfig) -> Result<BucketMap, Error> {
        let map = |centroids, assignment| BucketMap { round, n_buckets: k as u32, seed, policy: *policy, centroids, assignment };
        match round {
            Round::Preflop => {
                if k == NUM_PREFLOP_CLASSES {
                    return Ok(BucketMap { policy: *policy, seed, ..BucketMap::identity_preflop() });
                }
                let mut rows = Vec::new();
                for h in preflop_representatives() {
                    rows.extend(preflop_histogram(h, policy)?.cdf().into_iter().map(|x| x as f32));
                }
                let (cents, assign) = kmeans(&rows, policy.bins, k, seed, &cfg.kmeans)?;
                Ok(map(cents, Assignment::Preflop(assign)))
            }
            Round::Flop => {
                let boards = canonical_flops();
                let mut feats = Vec::with_capacity(boards.len());
                let mut rows = Vec::new();
                for &b in &boards {
                    let f = board_features(&board_cards(b), policy)?;
                    push_rows(b, &f, &mut rows);
                    feats.push(compact(f));
                }
                let (cents, _) = kmeans(&rows, policy.bins, k, seed, &cfg.kmeans)?;
                drop(rows);
                let mut table = vec![UNASSIGNED; boards.len() * NUM_PAIRS];
                for (i, f) in feats.into_iter().enumerate() {
                    assign_board(boards[i], &expand(f, policy.bins), &cents, &mut table[i * NUM_PAIRS..(i + 1) * NUM_PAIRS]);
                }
                Ok(map(cents, Assignment::Boards { boards, table }))
            }
            Round::Turn | Round::River => {
                let n = round.board_len();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut deck: Vec<Card> = Card::all().collect();
                let mut fit = BTreeSet::new();
                for _ in 0..cfg.fit_boards {
                    let (b, _) = deck.partial_shuffle(&mut rng, n);
                    fit.insert(canonical_board(b).0);
                }
                let dim = if round == Round::River { 1 } else { policy.bins };
                let mut rows = Vec::new();
                for &b in &fit {
                    push_rows(b, &board_features(&board_cards(b), policy)?, &mut rows);
                }
                let (cents, _) = kmeans(&rows, dim, k, seed, &cfg.kmeans)?;
                if round == Round::River {
                    return Ok(map(cents, Assignment::Nearest));
                }
                // every canonical turn, features recomputed board by board
                let boards = all_canonical_boards(4);
                let mut table = vec![UNASSIGNED; boards.len() * NUM_PAIRS];
                for (i, &b) in boards.iter().enumerate() {
                    let f = board_features(&board_cards(b), policy)?;
                    assign_board(b, &f, &cents, &mut table[i * NUM_PAIRS..(i + 1) * NUM_PAIRS]);
                }
                Ok(map(cents, Assignment::Boards { boards, table }))
            }
            Round::Terminal => Err(Error::RoundMismatch),
        }
    }

    /// Bucket of a canonical index.
    pub fn assignment(&self, ci: CanonicalIndex) -> Result<u32, Error> {
        if ci.round != self.round {
            return Err(Error::RoundMismatch);
        }
        let missing = Error::UnassignedIndex(ci.index);
        let found = match &self.assignment {
            Assignment::Constant => Some(0),
            Assignment::Preflop(t) => t.get(ci.index as usize).copied(),
            Assignment::Explicit(v) => v.binary_search_by_key(&ci.index, |e| e.0).ok().map(|i| v[i].1),
            Assignment::Boards { boards, table } => {
                let (b, p) = (ci.index / NUM_PAIRS as u64, (ci.index % NUM_PAIRS as u64) as usize);
                boards.binary_search(&b).ok().map(|i| table[i * NUM_PAIRS + p])
            }
            Assignment::Nearest => {
                let (b, p) = (ci.index / NUM_PAIRS as u64, (ci.index % NUM_PAIRS as u64) as usize);
                let cards = board_cards(b);
                let (h0, h1) = pair_cards(p);
                if cards.len() != self.round.board_len() || canonical_board(&cards).0 != b || (h0.mask() | h1.mask()) & b != 0 {
                    return Err(missing);
                }
                let x = if self.round == Round::River {
                    [equity([h0, h1], &cards, EquityMode::Exhaustive)? as f32]
                } else {
                    return Err(missing);
                };
                Some(self.centroids.nearest(&x))
            }
        };
        match found {
            Some(b) if b != UNASSIGNED => Ok(b),
            _ => Err(missing),
        }
    }

    pub fn bucket_of(&self, holes: [Card; 2], board: &[Card]) -> Result<u32, Error> {
        if Round::from_board_len(board.len()) != Some(self.round) {
            return Err(Error::RoundMismatch);
        }
        self.assignment(canonicalize(holes, board)?)
    }

    /// Buckets of all 1326 pairs on a canonical board, in its labeling.
    fn canonical_board_buckets(&self, mask: u64) -> Result<Vec<u32>, Error> {
        let mut out = vec![UNASSIGNED; NUM_PAIRS];
        match &self.assignment {
            Assignment::Boards { boards, table } => {
                let i = boards.binary_search(&mask).map_err(|_| Error::UnassignedIndex(mask * NUM_PAIRS as u64))?;
                out.copy_from_slice(&table[i * NUM_PAIRS..(i + 1) * NUM_PAIRS]);
            }
            Assignment::Nearest => {
                let f = board_features(&board_cards(mask), &self.policy)?;
                assign_board(mask, &f, &self.centroids, &mut out);
            }
            Assignment::Explicit(_) => {
                let stab = stabilizer(mask);
                for p in 0..NUM_PAIRS {
                    let (a, b) = pair_cards(p);
                    if (a.mask() | b.mask()) & mask == 0 {
                        let ci = CanonicalIndex { round: self.round, index: mask * NUM_PAIRS as u64 + pair_rep(p, &stab) as u64 };
                        out[p] = self.assignment(ci).unwrap_or(UNASSIGNED);
                    }
                }
            }
            Assignment::Constant => {
                for p in 0..NUM_PAIRS {
                    if !super::equity::pair_blocked(p, mask) {
                        out[p] = 0;
                    }
                }
            }
            Assignment::Preflop(_) => return Err(Error::RoundMismatch),
        }
        Ok(out)
    }

    /// Buckets of all 1326 pairs on `board` (`UNASSIGNED` where blocked).
    pub fn board_buckets(&self, board: &[Card]) -> Result<Vec<u32>, Error> {
        if Round::from_board_len(board.len()) != Some(self.round) {
            return Err(Error::RoundMismatch);
        }
        crate::cards::check_distinct(board)?;
        if self.round == Round::Preflop {
            return (0..NUM_PAIRS)
                .map(|p| {
                    let (a, b) = pair_cards(p);
                    self.bucket_of([a, b], &[])
                })
                .collect();
        }
        let (mask, perm) = canonical_board(board);
        let canon = self.canonical_board_buckets(mask)?;
        Ok(relabel(&canon, perm))
    }

    /// 64-bit hash of [`BucketMap::to_bytes`].
    pub fn fingerprint(&self) -> u64 {
        crate::hash::fnv64(&self.to_bytes())
    }

    /// Little-endian body encoding: round u8, n-buckets u32, seed u64,
    /// histogram policy, assignment block, centroid block.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Vec::new();
        w.push(self.round.index() as u8);
        put_u32(&mut w, self.n_buckets);
        put_u64(&mut w, self.seed);
        put_u32(&mut w, self.policy.bins as u32);
        put_u32(&mut w, self.policy.rivers_per_turn.map_or(0, |r| r as u32));
        put_u32(&mut w, self.policy.preflop_flops as u32);
        put_u64(&mut w, self.policy.seed);
        match &self.assignment {
            Assignment::Preflop(t) => {
                w.push(0);
                put_u64(&mut w, t.len() as u64);
                t.iter().for_each(|&b| put_u32(&mut w, b));
            }
            Assignment::Boards { boards, table } => {
                w.push(1);
                put_u64(&mut w, boards.len() as u64);
                boards.iter().for_each(|&b| put_u64(&mut w, b));
                table.iter().for_each(|&b| put_u32(&mut w, b));
            }
            Assignment::Explicit(v) => {
                w.push(2);
                put_u64(&mut w, v.len() as u64);
                for &(i, b) in v {
                    put_u64(&mut w, i);
                    put_u32(&mut w, b);
                }
            }
            Assignment::Nearest => w.push(3),
            Assignment::Constant => w.push(4),
        }
        put_u32(&mut w, self.centroids.dim as u32);
        put_u64(&mut w, self.centroids.len() as u64);
        self.centroids.data.iter().for_each(|&x| put_u32(&mut w, x.to_bits()));
        w
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<BucketMap, Error> {
        let mut r = Reader { bytes, pos: 0 };
        let round = r.u8()? as usize;
        if round > 3 {
            return Err(Error::Malformed("round"));
        }
        let round = Round::from_index(round);
        let n_buckets = r.u32()?;
        let seed = r.u64()?;
        let bins = r.u32()? as usize;
        let rivers = r.u32()? as usize;
        let policy = HistogramPolicy {
            bins,
            rivers_per_turn: if rivers == 0 { None } else { Some(rivers) },
            preflop_flops: r.u32()? as usize,
            seed: r.u64()?,
        };
        let assignment = match r.u8()? {
            0 => {
                let n = r.len(4)?;
                Assignment::Preflop((0..n).map(|_| r.u32()).collect::<Result<_, _>>()?)
            }
            1 => {
                let n = r.len(8 + 4 * NUM_PAIRS)?;
                let boards = (0..n).map(|_| r.u64()).collect::<Result<_, _>>()?;
                let table = (0..n * NUM_PAIRS).map(|_| r.u32()).collect::<Result<_, _>>()?;
                Assignment::Boards { boards, table }
            }
            2 => {
                let n = r.len(12)?;
                Assignment::Explicit((0..n).map(|_| Ok((r.u64()?, r.u32()?))).collect::<Result<_, Error>>()?)
            }
            3 => Assignment::Nearest,
            4 => Assignment::Constant,
            _ => return Err(Error::Malformed("assignment mode")),
        };
        let dim = r.u32()? as usize;
        if dim == 0 {
            return Err(Error::Malformed("centroid dimension"));
        }
        let k = r.len(4 * dim)?;
        let data = (0..k * dim).map(|_| r.u32().map(f32::from_bits)).collect::<Result<_, _>>()?;
        if r.pos != bytes.len() {
            return Err(Error::Malformed("trailing bytes"));
        }
        Ok(BucketMap { round, n_buckets, seed, policy, centroids: Centroids::new(dim, data), assignment })
    }
}

/// Moves per-pair values from a canonical labeling back to the original one.
fn relabel(canon: &[u32], perm: &[u8; 4]) -> Vec<u32> {
    (0..NUM_PAIRS)
        .map(|p| {
            let (a, b) = pair_cards(p);
            canon[pair_index(permute_card(a, perm), permute_card(b, perm))]
        })
        .collect()
}

/// Clusters arbitrary per-canonical histograms into `k` buckets.
pub fn build_buckets(features: &[(CanonicalIndex, EquityHistogram)], k: usize, seed: u64) -> Result<BucketMap, Error> {
    let first = features.first().ok_or(Error::InvalidClusterCount { k, points: 0 })?;
    let round = first.0.round;
    if features.iter().any(|f| f.0.round != round) {
        return Err(Error::RoundMismatch);
    }
    let bins = first.1.bins.len();
    let mut rows = Vec::with_capacity(features.len() * bins);
    for (_, h) in features {
        if h.bins.len() != bins {
            return Err(Error::InvalidConfig("histograms differ in length"));
        }
        rows.extend(h.cdf().into_iter().map(|x| x as f32));
    }
    let cfg = KMeansConfig { max_fit_points: usize::MAX, ..KMeansConfig::default() };
    let (cents, assign) = kmeans(&rows, bins, k, seed, &cfg)?;
    let mut pairs: Vec<(u64, u32)> = features.iter().zip(assign).map(|(f, b)| (f.0.index, b)).collect();
    pairs.sort_unstable();
    pairs.dedup_by_key(|e| e.0);
    Ok(BucketMap {
        round,
        n_buckets: k as u32,
        seed,
        policy: HistogramPolicy { bins, ..HistogramPolicy::default() },
        centroids: cents,
        assignment: Assignment::Explicit(pairs),
    })
}

/// Board features with counts packed into bytes.
struct Compact {
    counts: Vec<u8>,
    live: Vec<bool>,
}

fn compact(f: BoardFeatures) -> Compact {
    Compact { counts: f.values.iter().map(|&c| c as u8).collect(), live: f.live }
}

fn expand(c: Compact, dim: usize) -> BoardFeatures {
    BoardFeatures { values: c.counts.iter().map(|&x| x as f32).collect(), dim, live: c.live }
}

fn put_u32(w: &mut Vec<u8>, v: u32) {
    w.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(w: &mut Vec<u8>, v: u64) {
    w.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], Error> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(Error::Malformed("truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, Error> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, Error> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, Error> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    /// A length prefix, checked against the bytes left at `unit` bytes per item.
    fn len(&mut self, unit: usize) -> Result<usize, Error> {
        let n = self.u64()? as usize;
        if n.saturating_mul(unit) > self.bytes.len() - self.pos {
            return Err(Error::Malformed("length"));
        }
        Ok(n)
    }
}

/// Memoizes per-board bucket vectors for maps that compute on demand.
pub struct BucketCache {
    boards: RefCell<FxHashMap<u64, Vec<u32>>>,
    capacity: usize,
}

impl BucketCache {
    pub fn new(capacity: usize) -> BucketCache {
        BucketCache { boards: RefCell::new(FxHashMap::default()), capacity }
    }

    pub fn bucket(&self, map: &BucketMap, holes: [Card; 2], board: &[Card]) -> Result<u32, Error> {
        if board.is_empty() {
            return map.bucket_of(holes, board);
        }
        if Round::from_board_len(board.len()) != Some(map.round) {
            return Err(Error::RoundMismatch);
        }
        let (mask, perm) = canonical_board(board);
        let p = pair_index(permute_card(holes[0], perm), permute_card(holes[1], perm));
        if let Some(v) = self.boards.borrow().get(&mask) {
            return match v[p] {
                UNASSIGNED => map.bucket_of(holes, board),
                b => Ok(b),
            };
        }
        let v = map.canonical_board_buckets(mask)?;
        let b = v[p];
        let mut boards = self.boards.borrow_mut();
        if boards.len() >= self.capacity {
            boards.clear();
        }
        boards.insert(mask, v);
        drop(boards);
        if b == UNASSIGNED {
            return map.bucket_of(holes, board);
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.boards.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;

    fn two(s: &str) -> [Card; 2] {
        let c = parse_cards(s).unwrap();
        [c[0], c[1]]
    }

    #[test]
    fn identity_preflop_matches_class() {
        let m = BucketMap::identity_preflop();
        for p in 0..NUM_PAIRS {
            let (a, b) = pair_cards(p);
            let ci = canonicalize([a, b], &[]).unwrap();
            assert_eq!(m.bucket_of([a, b], &[]).unwrap() as u64, ci.index);
        }
    }

    #[test]
    fn round_mismatch_is_an_error() {
        let m = BucketMap::identity_preflop();
        let b = parse_cards("2c 3d 4h").unwrap();
        assert_eq!(m.bucket_of(two("As Ks"), &b), Err(Error::RoundMismatch));
    }

    #[test]
    fn single_cluster_and_unassigned() {
        let feats: Vec<_> = ["As Ad", "Ks Kd", "7c 2d"]
            .iter()
            .map(|s| {
                let h = two(s);
                (canonicalize(h, &[]).unwrap(), EquityHistogram::from_values(&[h[0].rank() as f64 / 13.0], 10))
            })
            .collect();
        let m = build_buckets(&feats, 1, 4).unwrap();
        for (ci, _) in &feats {
            assert_eq!(m.assignment(*ci).unwrap(), 0);
        }
        let other = canonicalize(two("Qs Qd"), &[]).unwrap();
        assert_eq!(m.assignment(other), Err(Error::UnassignedIndex(other.index)));
    }

    #[test]
    fn river_map_is_suit_invariant_and_round_trips() {
        let policy = HistogramPolicy::default();
        let cfg = BuildConfig { fit_boards: 20, ..BuildConfig::default() };
        let m = BucketMap::build(Round::River, 8, &policy, 7, &cfg).unwrap();
        let board = parse_cards("2c 7h 9s Jc Qd").unwrap();
        let perm = &SUIT_PERMS[13];
        let pb: Vec<Card> = board.iter().map(|&c| permute_card(c, perm)).collect();
        let h = two("Ah Kh");
        let ph = [permute_card(h[0], perm), permute_card(h[1], perm)];
        assert_eq!(m.bucket_of(h, &board).unwrap(), m.bucket_of(ph, &pb).unwrap());
        let all = m.board_buckets(&board).unwrap();
        assert_eq!(all[pair_index(h[0], h[1])], m.bucket_of(h, &board).unwrap());
        let cache = BucketCache::new(4);
        assert_eq!(cache.bucket(&m, ph, &pb).unwrap(), m.bucket_of(h, &board).unwrap());
        let back = BucketMap::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.fingerprint(), m.fingerprint());
    }

    #[test]
    fn single_pair_river_equity_matches_batch() {
        let board = parse_cards("4s 7h 9s Jc Qs").unwrap();
        let batch = crate::abstraction::equity::river_equities(&board);
        for p in (0..NUM_PAIRS).step_by(7) {
            let (a, b) = pair_cards(p);
            if batch[p].is_nan() {
                continue;
            }
            assert_eq!(equity([a, b], &board, EquityMode::Exhaustive).unwrap(), batch[p]);
        }
    }

    #[test]
    fn truncated_bytes_are_rejected() {
        let bytes = BucketMap::identity_preflop().to_bytes();
        assert!(BucketMap::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
