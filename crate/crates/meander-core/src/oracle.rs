//! Brute-force enumeration of one-band square-tiled surfaces.
//!
//! Abelian surfaces are origamis `(h, v)` with `h = (0 1 … k-1)`; quadratic
//! surfaces are fixed-point-free involutions on the `2w` boundary edges of a
//! `1 × w` band. Both are classified by genus, zero orders and band flags.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{param} = {requested} exceeds the configured budget {limit}")]
    Budget { param: &'static str, requested: u64, limit: u64 },
    #[error("invalid input: {0}")]
    Domain(String),
}

/// Explicit enumeration limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_squares: usize,
    pub max_width: usize,
    pub max_pair_squares: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_squares: 11, max_width: 10, max_pair_squares: 5 }
    }
}

/// Largest sizes the fixed-width leaf arrays support.
const MAX_K: usize = 16;
const MAX_W: usize = 16;

fn check(param: &'static str, requested: usize, limit: usize) -> Result<(), OracleError> {
    if requested > limit {
        return Err(OracleError::Budget { param, requested: requested as u64, limit: limit as u64 });
    }
    Ok(())
}

/// Bin key linking enumerated surfaces to analytic constants.
///
/// `mu` lists the positive zero orders in decreasing order: Abelian orders
/// for origamis, quadratic orders for band pairings. `orientable` marks a
/// trivial-holonomy flat structure (the square of an Abelian differential).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SurfaceClass {
    pub genus: u32,
    pub n_bigons: u32,
    pub mu: Vec<u32>,
    pub single_h: bool,
    pub single_v: bool,
    pub orientable: bool,
}

impl fmt::Display for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "g={} bigons={} mu={} h={} v={}",
            self.genus,
            self.n_bigons,
            mu_string(&self.mu),
            self.single_h,
            self.single_v
        )
    }
}

fn mu_string(mu: &[u32]) -> String {
    mu.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

/// Per-leaf histogram key: point counts per order (offset by one) plus flags.
type Profile = [u8; 2 * MAX_W + 2];

fn profile_class(p: &Profile, genus: u32, single_h: bool, single_v: bool, orientable: bool) -> SurfaceClass {
    let mut mu = Vec::new();
    for o in (2..p.len()).rev() {
        mu.extend(std::iter::repeat_n((o - 1) as u32, p[o] as usize));
    }
    SurfaceClass { genus, n_bigons: p[0] as u32, mu, single_h, single_v, orientable }
}

/// Counts for one class of one-band origamis with `k` squares.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianCounts {
    /// Permutations `v` in the class.
    pub raw: u64,
    /// Isomorphism classes with unlabeled zeros.
    pub unlabeled: u64,
    /// Isomorphism classes with labeled zeros.
    pub labeled: u64,
}

#[derive(Default, Clone, Copy)]
struct AbelianAcc {
    raw: u64,
    stab: u64,
    stab_fixing_zeros: u64,
}

/// Classifies `(h, v)` with `h` the standard cycle; returns the order profile,
/// genus, single-vertical flag and the per-vertex cycle ids.
fn classify_origami(v: &[u8], k: usize, cycle_id: &mut [u8; MAX_K], is_zero: &mut u32) -> (Profile, u32, bool) {
    let mut vinv = [0u8; MAX_K];
    for (i, &x) in v.iter().enumerate() {
        vinv[x as usize] = i as u8;
    }
    let prev = |x: usize| if x == 0 { k - 1 } else { x - 1 };
    let next = |x: usize| if x + 1 == k { 0 } else { x + 1 };
    // commutator h v h⁻¹ v⁻¹
    let mut comm = [0u8; MAX_K];
    for x in 0..k {
        comm[x] = next(v[prev(vinv[x] as usize)] as usize) as u8;
    }
    let mut profile: Profile = [0; 2 * MAX_W + 2];
    let mut seen = 0u32;
    let mut ncycles = 0usize;
    for s in 0..k {
        if seen >> s & 1 == 1 {
            continue;
        }
        let mut len = 0;
        let mut x = s;
        while seen >> x & 1 == 0 {
            seen |= 1 << x;
            cycle_id[x] = ncycles as u8;
            x = comm[x] as usize;
            len += 1;
        }
        if len > 1 {
            *is_zero |= 1 << s;
        }
        profile[len] += 1;
        ncycles += 1;
    }
    let excess = k - ncycles;
    assert!(excess.is_multiple_of(2), "odd total zero order for origami {v:?}");
    profile[1] = 0;
    let mut len = 1;
    let mut x = v[0] as usize;
    while x != 0 {
        x = v[x] as usize;
        len += 1;
    }
    (profile, (excess / 2 + 1) as u32, len == k)
}

fn abelian_leaf(v: &[u8], k: usize, acc: &mut FxHashMap<(Profile, u32, bool), AbelianAcc>) {
    let mut cycle_id = [0u8; MAX_K];
    let mut zero_reps = 0u32;
    let (profile, genus, single_v) = classify_origami(v, k, &mut cycle_id, &mut zero_reps);
    let mut stab = 1u64;
    let mut fixing = 1u64;
    let wrap = |x: usize| if x >= k { x - k } else { x };
    for j in 1..k {
        if (0..k).all(|i| v[wrap(i + j)] as usize == wrap(v[i] as usize + j)) {
            stab += 1;
            if (0..k).filter(|&x| zero_reps >> x & 1 == 1).all(|x| cycle_id[wrap(x + j)] == cycle_id[x]) {
                fixing += 1;
            }
        }
    }
    let e = acc.entry((profile, genus, single_v)).or_default();
    e.raw += 1;
    e.stab += stab;
    e.stab_fixing_zeros += fixing;
}

fn permute_rest(v: &mut Vec<u8>, used: u32, k: usize, f: &mut impl FnMut(&[u8])) {
    if v.len() == k {
        f(v);
        return;
    }
    for x in 0..k {
        if used >> x & 1 == 0 {
            v.push(x as u8);
            permute_rest(v, used | 1 << x, k, f);
            v.pop();
        }
    }
}

fn factorial_u64(n: u64) -> u64 {
    (1..=n).product()
}

/// Exact counts of one-band origamis with `k` squares, per class.
pub fn enumerate_abelian_one_band(
    k: usize,
    budget: &Budget,
) -> Result<BTreeMap<SurfaceClass, AbelianCounts>, OracleError> {
    if k == 0 {
        return Err(OracleError::Domain("at least one square is required".into()));
    }
    check("squares", k, budget.max_squares.min(MAX_K))?;
    let partials: Vec<FxHashMap<(Profile, u32, bool), AbelianAcc>> = (0..k)
        .into_par_iter()
        .map(|first| {
            let mut acc = FxHashMap::default();
            let mut v = vec![first as u8];
            permute_rest(&mut v, 1 << first, k, &mut |v| abelian_leaf(v, k, &mut acc));
            acc
        })
        .collect();
    let mut merged: BTreeMap<SurfaceClass, AbelianAcc> = BTreeMap::new();
    let mut mult: BTreeMap<SurfaceClass, u64> = BTreeMap::new();
    for part in partials {
        for ((profile, genus, single_v), a) in part {
            let class = profile_class(&profile, genus, true, single_v, true);
            let m = profile[2..].iter().map(|&c| factorial_u64(c as u64)).product();
            mult.insert(class.clone(), m);
            let e = merged.entry(class).or_default();
            e.raw += a.raw;
            e.stab += a.stab;
            e.stab_fixing_zeros += a.stab_fixing_zeros;
        }
    }
    let k = k as u64;
    Ok(merged
        .into_iter()
        .map(|(class, a)| {
            let labeled = a.stab_fixing_zeros * mult[&class];
            assert!(a.stab % k == 0 && labeled.is_multiple_of(k), "Burnside sums not divisible by the group order");
            (class, AbelianCounts { raw: a.raw, unlabeled: a.stab / k, labeled: labeled / k })
        })
        .collect())
}

/// Unlabeled orbit counts by explicit orbit construction, for cross-checking
/// the Burnside count on small sizes.
pub fn abelian_orbits_direct(k: usize) -> BTreeMap<SurfaceClass, u64> {
    assert!((1..=8).contains(&k), "direct orbit enumeration is for small k");
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut out = BTreeMap::new();
    let mut perms = Vec::new();
    permute_rest(&mut Vec::new(), 0, k, &mut |v| perms.push(v.to_vec()));
    for v in perms {
        if seen.contains(&v) {
            continue;
        }
        for j in 0..k {
            let conj: Vec<u8> = (0..k).map(|i| ((v[(i + k - j) % k] as usize + j) % k) as u8).collect();
            seen.insert(conj);
        }
        let mut ids = [0u8; MAX_K];
        let (p, genus, single_v) = classify_origami(&v, k, &mut ids, &mut 0);
        *out.entry(profile_class(&p, genus, true, single_v, true)).or_insert(0) += 1;
    }
    out
}

fn is_single_cycle(p: &[u8]) -> bool {
    let mut len = 1;
    let mut x = p[0] as usize;
    while x != 0 {
        x = p[x] as usize;
        len += 1;
    }
    len == p.len()
}

fn is_transitive(h: &[u8], v: &[u8]) -> bool {
    let k = h.len();
    let mut seen = 1u32;
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        for y in [h[x] as usize, v[x] as usize] {
            if seen >> y & 1 == 0 {
                seen |= 1 << y;
                stack.push(y);
            }
        }
    }
    seen.count_ones() as usize == k
}

/// Isomorphism classes of all connected origamis with `k` squares, computed by
/// Burnside over simultaneous conjugation in `S_k`; single_h and single_v are
/// both recorded.
pub fn enumerate_all_origamis(k: usize, budget: &Budget) -> Result<BTreeMap<SurfaceClass, u64>, OracleError> {
    if k == 0 {
        return Err(OracleError::Domain("at least one square is required".into()));
    }
    check("pair squares", k, budget.max_pair_squares.min(7))?;
    let mut perms = Vec::new();
    permute_rest(&mut Vec::new(), 0, k, &mut |v| perms.push(v.to_vec()));
    let mut sums: BTreeMap<SurfaceClass, u64> = BTreeMap::new();
    for h in &perms {
        for v in &perms {
            if !is_transitive(h, v) {
                continue;
            }
            let stab = perms
                .iter()
                .filter(|c| {
                    (0..k).all(|x| c[h[x] as usize] == h[c[x] as usize] && c[v[x] as usize] == v[c[x] as usize])
                })
                .count() as u64;
            let comm_cycles = commutator_cycle_lengths(h, v);
            let excess: usize = comm_cycles.iter().map(|l| l - 1).sum();
            assert!(excess.is_multiple_of(2));
            let mut mu: Vec<u32> = comm_cycles.iter().filter(|&&l| l > 1).map(|&l| (l - 1) as u32).collect();
            mu.sort_unstable_by(|a, b| b.cmp(a));
            let class = SurfaceClass {
                genus: (excess / 2 + 1) as u32,
                n_bigons: 0,
                mu,
                single_h: is_single_cycle(h),
                single_v: is_single_cycle(v),
                orientable: true,
            };
            *sums.entry(class).or_insert(0) += stab;
        }
    }
    let order = factorial_u64(k as u64);
    Ok(sums
        .into_iter()
        .map(|(c, s)| {
            assert!(s % order == 0);
            (c, s / order)
        })
        .collect())
}

fn commutator_cycle_lengths(h: &[u8], v: &[u8]) -> Vec<usize> {
    let k = h.len();
    let mut hinv = vec![0usize; k];
    let mut vinv = vec![0usize; k];
    for x in 0..k {
        hinv[h[x] as usize] = x;
        vinv[v[x] as usize] = x;
    }
    let comm: Vec<usize> = (0..k).map(|x| h[v[hinv[vinv[x]]] as usize] as usize).collect();
    let mut seen = vec![false; k];
    let mut out = Vec::new();
    for s in 0..k {
        let mut len = 0;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = comm[x];
            len += 1;
        }
        if len > 0 {
            out.push(len);
        }
    }
    out
}

/// Euler totients `φ(1..=n)` by sieve; index 0 is unused.
pub fn totients(n: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for p in 2..=n {
        if phi[p] == p as u64 {
            for m in (p..=n).step_by(p) {
                phi[m] -= phi[m] / p as u64;
            }
        }
    }
    phi
}

/// Oriented meanders of genus `g` with at most `n` crossings: doubly
/// single-band origamis with at most `n` squares. Genus one uses the
/// totient count; higher genus enumerates.
pub fn count_oriented_meanders(n: usize, g: u32, budget: &Budget) -> Result<u64, OracleError> {
    if g == 0 {
        return Err(OracleError::Domain("oriented meanders need genus at least one".into()));
    }
    if g == 1 {
        return Ok(totients(n)[1..].iter().sum());
    }
    check("squares", n, budget.max_squares)?;
    let mut total = 0;
    for k in 1..=n {
        for (c, counts) in enumerate_abelian_one_band(k, budget)? {
            if c.genus == g && c.single_v {
                total += counts.unlabeled;
            }
        }
    }
    Ok(total)
}

/// Classification of one band pairing.
struct BandLeaf {
    profile: Profile,
    genus: u32,
    single_v: bool,
    orientable: bool,
}

/// Boundary adjacency of the band, precomputed once per width.
struct BandGeometry {
    w: usize,
    right_end: [u8; 2 * MAX_W],
    left_edge: [u8; 2 * MAX_W],
}

impl BandGeometry {
    fn new(w: usize) -> Self {
        let mut right_end = [0u8; 2 * MAX_W];
        let mut left_edge = [0u8; 2 * MAX_W];
        for e in 0..2 * w {
            let side = e / w * w;
            right_end[e] = (side + (e - side + 1) % w) as u8;
            left_edge[e] = (side + (e - side + w - 1) % w) as u8;
        }
        BandGeometry { w, right_end, left_edge }
    }
}

/// Slots `0..w` are top edges and `w..2w` bottom edges; `pair` is the
/// involution. Points are indexed like the edge they are the left end of.
fn classify_band(pair: &[u8], geo: &BandGeometry) -> BandLeaf {
    let w = geo.w;
    let two_w = 2 * w;
    let mut profile: Profile = [0; 2 * MAX_W + 2];
    let mut seen = 0u32;
    let mut vertices = 0usize;
    let orientable = pair[..w].iter().all(|&p| p as usize >= w);
    for start in 0..two_w {
        if seen >> start & 1 == 1 {
            continue;
        }
        let mut cur = start;
        let mut leave_left = true;
        let mut c = 0usize;
        loop {
            seen |= 1 << cur;
            c += 1;
            let edge = if leave_left { cur } else { geo.left_edge[cur] as usize };
            let partner = pair[edge] as usize;
            let translation = (edge < w) != (partner < w);
            let arrive_left = leave_left == translation;
            cur = if arrive_left { partner } else { geo.right_end[partner] as usize };
            leave_left = !arrive_left;
            if cur == start {
                break;
            }
        }
        // angle c·π, order c - 2
        profile[c - 1] += 1;
        vertices += 1;
    }
    assert!(
        (w + 2 - vertices).is_multiple_of(2) && w + 2 >= vertices,
        "Euler characteristic parity violated for {pair:?}"
    );
    profile[1] = 0;
    let mut len = 0;
    let (mut sq, mut up) = (0usize, true);
    loop {
        let partner = pair[if up { sq } else { w + sq }] as usize;
        (sq, up) = if partner < w { (partner, false) } else { (partner - w, true) };
        len += 1;
        if sq == 0 && up {
            break;
        }
        assert!(len <= w, "vertical walk failed to close");
    }
    BandLeaf { profile, genus: ((w + 2 - vertices) / 2) as u32, single_v: len == w, orientable }
}

type BandKey = (Profile, u32, bool, bool);

fn band_leaf(pair: &[u8], geo: &BandGeometry, acc: &mut FxHashMap<BandKey, u64>) {
    let l = classify_band(pair, geo);
    *acc.entry((l.profile, l.genus, l.single_v, l.orientable)).or_insert(0) += 1;
}

/// Cycles of a 2-regular graph built one link at a time. Nodes carry two
/// half-edges; each half-edge is linked exactly once.
struct PathJoin {
    other: [u8; 4 * MAX_W],
    len: [u8; 4 * MAX_W],
}

/// What a link changed, for undo.
enum Joined {
    Closed(usize),
    Merged { a: usize, b: usize, saved: [u8; 4] },
}

impl PathJoin {
    /// Node `i` owns half-edges `ends(i)`.
    fn new(nodes: usize, ends: impl Fn(usize) -> (usize, usize)) -> Self {
        let mut pj = PathJoin { other: [0; 4 * MAX_W], len: [0; 4 * MAX_W] };
        for i in 0..nodes {
            let (x, y) = ends(i);
            pj.other[x] = y as u8;
            pj.other[y] = x as u8;
            pj.len[x] = 1;
            pj.len[y] = 1;
        }
        pj
    }

    fn link(&mut self, x: usize, y: usize) -> Joined {
        const M: usize = 4 * MAX_W - 1;
        let (x, y) = (x & M, y & M);
        if self.other[x] as usize == y {
            return Joined::Closed(self.len[x] as usize);
        }
        let (a, b) = (self.other[x] as usize & M, self.other[y] as usize & M);
        let saved = [self.other[a], self.len[a], self.other[b], self.len[b]];
        let l = self.len[x] + self.len[y];
        self.other[a] = b as u8;
        self.other[b] = a as u8;
        self.len[a] = l;
        self.len[b] = l;
        Joined::Merged { a, b, saved }
    }

    fn unlink(&mut self, j: &Joined) {
        if let Joined::Merged { a, b, saved } = *j {
            self.other[a] = saved[0];
            self.len[a] = saved[1];
            self.other[b] = saved[2];
            self.len[b] = saved[3];
        }
    }
}

/// Incremental classification state for the exhaustive band enumeration.
struct BandSearch<'a> {
    geo: BandGeometry,
    points: PathJoin,
    vertical: PathJoin,
    profile: Profile,
    vertices: usize,
    vertical_cycles: usize,
    same_side: usize,
    acc: &'a mut FxHashMap<BandKey, u64>,
}

impl BandSearch<'_> {
    fn point_link(&mut self, x: usize, y: usize) -> Joined {
        let j = self.points.link(x, y);
        if let Joined::Closed(c) = j {
            self.profile[c - 1] += 1;
            self.vertices += 1;
        }
        j
    }

    fn point_unlink(&mut self, j: Joined) {
        match j {
            Joined::Closed(c) => {
                self.profile[c - 1] -= 1;
                self.vertices -= 1;
            }
            j => self.points.unlink(&j),
        }
    }

    /// Half-edge ids: point `p` has `2p` (left end of edge `p`) and `2p+1`
    /// (right end of its left edge).
    fn add_pair(&mut self, e: usize, f: usize) -> [Joined; 3] {
        let w = self.geo.w;
        let (re, rf) = (self.geo.right_end[e] as usize, self.geo.right_end[f] as usize);
        let translation = (e < w) != (f < w);
        let (p1, p2) = if translation {
            (self.point_link(2 * e, 2 * f), self.point_link(2 * re + 1, 2 * rf + 1))
        } else {
            self.same_side += 1;
            (self.point_link(2 * e, 2 * rf + 1), self.point_link(2 * re + 1, 2 * f))
        };
        let v = self.vertical.link(e, f);
        if matches!(v, Joined::Closed(_)) {
            self.vertical_cycles += 1;
        }
        [p1, p2, v]
    }

    fn remove_pair(&mut self, e: usize, f: usize, undo: [Joined; 3]) {
        let [p1, p2, v] = undo;
        match v {
            Joined::Closed(_) => self.vertical_cycles -= 1,
            v => self.vertical.unlink(&v),
        }
        self.point_unlink(p2);
        self.point_unlink(p1);
        if (e < self.geo.w) == (f < self.geo.w) {
            self.same_side -= 1;
        }
    }

    fn leaf(&mut self) {
        let w = self.geo.w;
        assert!(
            (w + 2 - self.vertices).is_multiple_of(2) && w + 2 >= self.vertices,
            "Euler characteristic parity violated"
        );
        let genus = ((w + 2 - self.vertices) / 2) as u32;
        let mut profile = self.profile;
        profile[1] = 0;
        *self.acc.entry((profile, genus, self.vertical_cycles == 1, self.same_side == 0)).or_insert(0) += 1;
    }

    fn search(&mut self, used: u32) {
        let n = 2 * self.geo.w;
        if used.count_ones() as usize == n {
            self.leaf();
            return;
        }
        let i = (!used).trailing_zeros() as usize;
        let mut free = !used & ((1u64 << n) - 1) as u32 & !(1 << i);
        while free != 0 {
            let j = free.trailing_zeros() as usize;
            free &= free - 1;
            let undo = self.add_pair(i, j);
            self.search(used | 1 << i | 1 << j);
            self.remove_pair(i, j, undo);
        }
    }
}

fn band_key_class(k: BandKey) -> SurfaceClass {
    let (p, genus, single_v, orientable) = k;
    profile_class(&p, genus, true, single_v, orientable)
}

/// Exact per-class counts of pairings of a `1 × w` band, counted as raw
/// involutions (square 0 is a distinguished root).
pub fn enumerate_quadratic_band(w: usize, budget: &Budget) -> Result<BTreeMap<SurfaceClass, u64>, OracleError> {
    if w == 0 {
        return Err(OracleError::Domain("band width must be positive".into()));
    }
    check("width", w, budget.max_width.min(MAX_W))?;
    let n = 2 * w;
    let partials: Vec<FxHashMap<BandKey, u64>> = (1..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = FxHashMap::default();
            let mut st = BandSearch {
                geo: BandGeometry::new(w),
                points: PathJoin::new(n, |p| (2 * p, 2 * p + 1)),
                vertical: PathJoin::new(w, |i| (i, w + i)),
                profile: [0; 2 * MAX_W + 2],
                vertices: 0,
                vertical_cycles: 0,
                same_side: 0,
                acc: &mut acc,
            };
            let undo = st.add_pair(0, j);
            st.search(1 | 1 << j);
            st.remove_pair(0, j, undo);
            acc
        })
        .collect();
    let mut out = BTreeMap::new();
    for part in partials {
        for (key, c) in part {
            *out.entry(band_key_class(key)).or_insert(0) += c;
        }
    }
    Ok(out)
}

/// Number of fixed-point-free involutions on `2w` slots, `(2w-1)!!`.
pub fn pairing_count(w: usize) -> f64 {
    (1..w).map(|i| (2 * i + 1) as f64).product()
}

/// Sampled count estimate with a normal-approximation confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub hits: u64,
    pub samples: u64,
    pub count: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Uniform sampling of band pairings; each class gets an estimated count and
/// a Wilson interval at the given confidence level.
pub fn sample_quadratic_band(
    w: usize,
    samples: u64,
    seed: u64,
    confidence: f64,
) -> Result<BTreeMap<SurfaceClass, Estimate>, OracleError> {
    if w == 0 || w > MAX_W {
        return Err(OracleError::Domain(format!("band width must be in 1..={MAX_W}")));
    }
    if samples == 0 || !(0.0..1.0).contains(&confidence) {
        return Err(OracleError::Domain("need positive samples and confidence in (0,1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slots: Vec<u8> = (0..2 * w as u8).collect();
    let mut pair = vec![0u8; 2 * w];
    let mut acc = FxHashMap::default();
    let geo = BandGeometry::new(w);
    for _ in 0..samples {
        slots.shuffle(&mut rng);
        for c in slots.chunks(2) {
            pair[c[0] as usize] = c[1];
            pair[c[1] as usize] = c[0];
        }
        band_leaf(&pair, &geo, &mut acc);
    }
    let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + confidence / 2.0);
    let total = pairing_count(w);
    let n = samples as f64;
    Ok(acc
        .into_iter()
        .map(|(key, hits)| {
            let p = hits as f64 / n;
            let denom = 1.0 + z * z / n;
            let centre = (p + z * z / (2.0 * n)) / denom;
            let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
            let est = Estimate {
                hits,
                samples,
                count: p * total,
                ci_low: (centre - half).max(0.0) * total,
                ci_high: (centre + half).min(1.0) * total,
            };
            (band_key_class(key), est)
        })
        .collect())
}

/// Genus-zero single-vertical-band count at width `w`.
pub fn band_meanders(w: usize, budget: &Budget) -> Result<u64, OracleError> {
    Ok(enumerate_quadratic_band(w, budget)?
        .into_iter()
        .filter(|(c, _)| c.genus == 0 && c.single_v)
        .map(|(_, n)| n)
        .sum())
}

fn noncrossing_matchings(lo: usize, hi: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if lo >= hi {
        out.push(cur.clone());
        return;
    }
    // `lo` pairs with some `j` leaving even-sized inside and outside intervals
    for j in (lo + 1..hi).step_by(2) {
        cur[lo] = j;
        cur[j] = lo;
        let mut inner = Vec::new();
        noncrossing_matchings(lo + 1, j, cur, &mut inner);
        for m in inner {
            let mut m = m;
            noncrossing_matchings(j + 1, hi, &mut m, out);
        }
    }
}

/// All noncrossing perfect matchings of `2n` points on a line.
pub fn all_noncrossing_matchings(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    noncrossing_matchings(0, 2 * n, &mut vec![0; 2 * n], &mut out);
    out
}

/// Closed meanders with `2n` crossings: pairs of noncrossing arc systems above
/// and below a line whose union is one closed curve.
pub fn noncrossing_meanders(n: usize) -> u64 {
    let ms = all_noncrossing_matchings(n);
    let mut count = 0;
    for up in &ms {
        for down in &ms {
            let mut len = 0;
            let mut x = 0;
            loop {
                x = down[up[x]];
                len += 2;
                if x == 0 {
                    break;
                }
            }
            if len == 2 * n {
                count += 1;
            }
        }
    }
    count
}

/// `2d · count / N^d`, the lattice-count volume normalization.
pub fn volume_estimate(count: f64, n: u64, d: u32) -> f64 {
    2.0 * d as f64 * count / (n as f64).powi(d as i32)
}

/// Square-tiled surfaces in `Q(-1^4)` with labeled poles and at most `2n`
/// squares. Each is one cylinder of circumference `2l`, height `h`, twist
/// `t < 2l`, with three ways to split the poles between the boundaries.
pub fn pillowcase_count(n: u64) -> u64 {
    let mut total = 0;
    for h in 1..=n {
        let lmax = n / h;
        total += lmax * (lmax + 1);
    }
    3 * total
}

/// One CSV record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub class: SurfaceClass,
    pub squares: usize,
    pub count: String,
}

pub const CSV_HEADER: &str = "genus,bigons,mu,single_h,single_v,squares,count";

pub fn csv_line(row: &CsvRow) -> String {
    let c = &row.class;
    format!(
        "{},{},{},{},{},{},{}",
        c.genus,
        c.n_bigons,
        mu_string(&c.mu),
        c.single_h,
        c.single_v,
        row.squares,
        row.count
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn one_square() {
        let m = enumerate_abelian_one_band(1, &budget()).unwrap();
        assert_eq!(m.len(), 1);
        let (c, n) = m.iter().next().unwrap();
        assert_eq!((c.genus, c.single_v, n.unlabeled), (1, true, 1));
    }

    #[test]
    fn torus_single_vertical_is_totient() {
        let phi = totients(10);
        for (k, &want) in phi.iter().enumerate().take(9).skip(1) {
            let m = enumerate_abelian_one_band(k, &budget()).unwrap();
            let got: u64 = m.iter().filter(|(c, _)| c.genus == 1 && c.single_v).map(|(_, n)| n.unlabeled).sum();
            assert_eq!(got, want, "k={k}");
        }
        let m = enumerate_abelian_one_band(3, &budget()).unwrap();
        let c = m.iter().find(|(c, _)| c.genus == 1 && c.single_v).unwrap();
        assert_eq!(c.1.unlabeled, 2);
    }

    #[test]
    fn oriented_meander_counts() {
        assert_eq!(count_oriented_meanders(3, 1, &budget()).unwrap(), 4);
        assert_eq!(count_oriented_meanders(8, 1, &budget()).unwrap(), (1..=8).map(|k| totients(8)[k]).sum::<u64>());
        assert_eq!(count_oriented_meanders(3, 2, &budget()).unwrap(), 0);
        // smallest genus-two doubly single-band origami has 4 squares
        assert!(count_oriented_meanders(4, 2, &budget()).unwrap() > 0);
        assert!(matches!(count_oriented_meanders(20, 2, &budget()), Err(OracleError::Budget { .. })));
        assert!(count_oriented_meanders(3, 0, &budget()).is_err());
    }

    #[test]
    fn burnside_matches_direct_orbits() {
        for k in 1..=6 {
            let burnside: BTreeMap<SurfaceClass, u64> =
                enumerate_abelian_one_band(k, &budget()).unwrap().into_iter().map(|(c, n)| (c, n.unlabeled)).collect();
            assert_eq!(burnside, abelian_orbits_direct(k), "k={k}");
        }
    }

    #[test]
    fn labeled_counts_dominate_unlabeled() {
        for k in 1..=8 {
            for (c, n) in enumerate_abelian_one_band(k, &budget()).unwrap() {
                let m: u64 = c.mu.chunk_by(|a, b| a == b).map(|run| factorial_u64(run.len() as u64)).product();
                assert!(n.unlabeled <= n.labeled && n.labeled <= m * n.unlabeled, "{c} {n:?}");
                assert!(n.raw * m <= n.labeled * k as u64, "{c}");
            }
        }
    }

    #[test]
    fn all_origamis_symmetry_and_one_band_agreement() {
        for k in 1..=5 {
            let all = enumerate_all_origamis(k, &budget()).unwrap();
            let mut h_side: BTreeMap<(u32, Vec<u32>), u64> = BTreeMap::new();
            let mut v_side: BTreeMap<(u32, Vec<u32>), u64> = BTreeMap::new();
            for (c, n) in &all {
                if c.single_h {
                    *h_side.entry((c.genus, c.mu.clone())).or_insert(0) += n;
                }
                if c.single_v {
                    *v_side.entry((c.genus, c.mu.clone())).or_insert(0) += n;
                }
            }
            assert_eq!(h_side, v_side, "k={k}");
            let one_band = enumerate_abelian_one_band(k, &budget()).unwrap();
            for (c, n) in one_band {
                assert_eq!(all[&c], n.unlabeled, "k={k} {c}");
            }
        }
    }

    #[test]
    fn independent_meander_enumerator() {
        let expected = [1, 2, 8, 42, 262];
        for (i, &m) in expected.iter().enumerate() {
            assert_eq!(noncrossing_meanders(i + 1), m);
        }
        assert_eq!(all_noncrossing_matchings(4).len(), 14);
    }

    #[test]
    fn band_genus_zero_meanders() {
        for n in 1..=4 {
            assert_eq!(band_meanders(2 * n, &budget()).unwrap(), noncrossing_meanders(n), "n={n}");
        }
    }

    #[test]
    fn band_totals_and_invariants() {
        for w in 1..=7 {
            let m = enumerate_quadratic_band(w, &budget()).unwrap();
            let total: u64 = m.values().sum();
            assert_eq!(total as f64, pairing_count(w));
            for c in m.keys() {
                let s: i64 = c.mu.iter().map(|&x| x as i64).sum::<i64>() - c.n_bigons as i64;
                assert_eq!(s, 4 * c.genus as i64 - 4, "{c}");
                if c.orientable {
                    assert_eq!(c.n_bigons, 0);
                    assert!(c.mu.iter().all(|x| x % 2 == 0), "{c}");
                }
            }
        }
    }

    fn all_pairings(n: usize) -> Vec<Vec<u8>> {
        fn rec(p: &mut Vec<u8>, used: u32, n: usize, out: &mut Vec<Vec<u8>>) {
            if used.count_ones() as usize == n {
                out.push(p.clone());
                return;
            }
            let i = (!used).trailing_zeros() as usize;
            for j in i + 1..n {
                if used >> j & 1 == 0 {
                    p[i] = j as u8;
                    p[j] = i as u8;
                    rec(p, used | 1 << i | 1 << j, n, out);
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut vec![0; n], 0, n, &mut out);
        out
    }

    #[test]
    fn incremental_search_matches_direct_classification() {
        for w in 1..=6 {
            let geo = BandGeometry::new(w);
            let mut acc = FxHashMap::default();
            for p in all_pairings(2 * w) {
                band_leaf(&p, &geo, &mut acc);
            }
            let direct: BTreeMap<SurfaceClass, u64> = acc.into_iter().map(|(k, n)| (band_key_class(k), n)).collect();
            assert_eq!(direct, enumerate_quadratic_band(w, &budget()).unwrap(), "w={w}");
        }
    }

    #[test]
    fn torus_meander_with_two_bigons_within_four_crossings() {
        let hits: u64 = (1..=4)
            .flat_map(|w| enumerate_quadratic_band(w, &budget()).unwrap())
            .filter(|(c, _)| c.genus == 1 && c.n_bigons == 2 && c.single_v)
            .map(|(_, n)| n)
            .sum();
        assert!(hits >= 1);
    }

    #[test]
    fn exceptional_strata_empty() {
        for w in 1..=8 {
            for (c, n) in enumerate_quadratic_band(w, &budget()).unwrap() {
                let exceptional = c.genus == 2 && c.n_bigons == 0 && (c.mu == [4] || c.mu == [3, 1]);
                assert!(!(exceptional && !c.orientable), "w={w} {c} count {n}");
            }
        }
    }

    #[test]
    fn sampling_brackets_exact_counts() {
        let exact = enumerate_quadratic_band(5, &budget()).unwrap();
        let est = sample_quadratic_band(5, 20_000, 7, 0.999).unwrap();
        for (c, e) in &est {
            let x = exact[c] as f64;
            assert!(e.ci_low <= x && x <= e.ci_high, "{c}: {x} not in [{}, {}]", e.ci_low, e.ci_high);
        }
        assert_eq!(est, sample_quadratic_band(5, 20_000, 7, 0.999).unwrap());
    }

    #[test]
    fn budgets_are_enforced() {
        let b = Budget { max_squares: 4, max_width: 3, max_pair_squares: 3 };
        assert!(matches!(enumerate_abelian_one_band(5, &b), Err(OracleError::Budget { .. })));
        assert!(matches!(enumerate_quadratic_band(4, &b), Err(OracleError::Budget { .. })));
        assert!(matches!(enumerate_all_origamis(4, &b), Err(OracleError::Budget { .. })));
    }

    #[test]
    fn pillowcase_normalization() {
        let v = volume_estimate(pillowcase_count(50) as f64, 50, 2);
        let exact = 2.0 * std::f64::consts::PI.powi(2);
        assert!((v / exact - 1.0).abs() < 0.3, "{v}");
    }

    #[test]
    fn csv_format() {
        let row = CsvRow {
            class: SurfaceClass {
                genus: 2,
                n_bigons: 1,
                mu: vec![3, 2],
                single_h: true,
                single_v: false,
                orientable: false,
            },
            squares: 7,
            count: "12".into(),
        };
        assert_eq!(csv_line(&row), "2,1,3 2,true,false,7,12");
    }
}
