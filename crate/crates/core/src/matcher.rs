//! Star identification as subgraph matching on the inter-star angle graph.
//!
//! Measured stars are vertices and their pairwise angles are edges. A
//! candidate is an ordered tuple of catalog stars whose pairwise angles all
//! agree with the measured ones to within `epsilon`:
//!
//! * [`match_2_stars`]: one range query, both orientations of every hit;
//! * [`match_3_stars`]: pairwise sets joined into triangles, mirror images
//!   removed by the sign of the triple product;
//! * [`match_p_stars`]: grow each `(p-1)`-tuple by the stars adjacent to all
//!   of its members in the `(i, p)` pair sets;
//! * [`match_stars`]: add measured stars one at a time until the candidate
//!   set shrinks to a single tuple.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::catalog::StarId;
use crate::error::{Error, Result};
use crate::geometry::angular_distance;
use crate::pairdb::PairDatabase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredStar {
    /// Unit vector in the camera frame.
    pub direction: Vector3<f64>,
    /// Catalog id of the star that produced this measurement, when known.
    pub true_id: Option<StarId>,
}

impl MeasuredStar {
    pub fn new(direction: Vector3<f64>) -> Self {
        Self {
            direction,
            true_id: None,
        }
    }

    pub fn with_truth(direction: Vector3<f64>, id: StarId) -> Self {
        Self {
            direction,
            true_id: Some(id),
        }
    }
}

/// Ordered k-tuples of catalog ids; slot `i` matches measured star `i`.
///
/// Stored flat and kept in lexicographic order so that equal sets compare
/// equal and iteration order is reproducible.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CandidateSet {
    arity: usize,
    ids: Vec<StarId>,
}

impl CandidateSet {
    pub fn empty(arity: usize) -> Self {
        Self {
            arity,
            ids: Vec::new(),
        }
    }

    /// Builds a set from arbitrary tuples; duplicates are collapsed.
    pub fn from_tuples<I, T>(arity: usize, tuples: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[StarId]>,
    {
        let mut rows: Vec<Vec<StarId>> = tuples
            .into_iter()
            .map(|t| {
                let t = t.as_ref();
                assert_eq!(t.len(), arity, "tuple arity mismatch");
                t.to_vec()
            })
            .collect();
        rows.sort_unstable();
        rows.dedup();
        Self {
            arity,
            ids: rows.concat(),
        }
    }

    fn from_sorted_flat(arity: usize, mut ids: Vec<StarId>) -> Self {
        if arity > 0 {
            let mut rows: Vec<&[StarId]> = ids.chunks_exact(arity).collect();
            if !rows.windows(2).all(|w| w[0] < w[1]) {
                rows.sort_unstable();
                rows.dedup();
                ids = rows.concat();
            }
        }
        Self { arity, ids }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        if self.arity == 0 {
            0
        } else {
            self.ids.len() / self.arity
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn tuples(&self) -> impl ExactSizeIterator<Item = &[StarId]> + '_ {
        self.ids.chunks_exact(self.arity.max(1))
    }

    pub fn contains(&self, tuple: &[StarId]) -> bool {
        tuple.len() == self.arity && self.tuples().any(|t| t == tuple)
    }

    /// The only tuple, when there is exactly one.
    pub fn single(&self) -> Option<&[StarId]> {
        (self.len() == 1).then(|| &self.ids[..])
    }
}

/// Result of the incremental driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub candidates: CandidateSet,
    /// How many of the measured stars (taken in order) were used.
    pub p_used: usize,
    pub unique: bool,
}

/// Ordered pair candidates, both orientations present, sorted.
struct PairSet {
    pairs: Vec<(StarId, StarId)>,
}

impl PairSet {
    fn query(a: &Vector3<f64>, b: &Vector3<f64>, pdb: &PairDatabase, epsilon: f64) -> Self {
        let theta_hat = angular_distance(a, b);
        let hits = pdb.query_pairs(theta_hat, epsilon);
        let mut pairs = Vec::with_capacity(hits.len() * 2);
        for e in hits {
            pairs.push((e.id_a, e.id_b));
            pairs.push((e.id_b, e.id_a));
        }
        pairs.sort_unstable();
        Self { pairs }
    }

    /// Stars paired with `id`. Because both orientations are stored this is
    /// the same set whichever slot `id` occupies.
    fn partners(&self, id: StarId) -> impl Iterator<Item = StarId> + '_ {
        let lo = self.pairs.partition_point(|p| p.0 < id);
        self.pairs[lo..]
            .iter()
            .take_while(move |p| p.0 == id)
            .map(|p| p.1)
    }

    fn has_partner(&self, id: StarId) -> bool {
        let lo = self.pairs.partition_point(|p| p.0 < id);
        self.pairs.get(lo).is_some_and(|p| p.0 == id)
    }

    fn contains(&self, a: StarId, b: StarId) -> bool {
        self.pairs.binary_search(&(a, b)).is_ok()
    }

    fn firsts(&self) -> impl Iterator<Item = StarId> + '_ {
        let mut last = None;
        self.pairs.iter().filter_map(move |p| {
            if last == Some(p.0) {
                None
            } else {
                last = Some(p.0);
                Some(p.0)
            }
        })
    }

    fn into_candidates(self) -> CandidateSet {
        let ids = self.pairs.into_iter().flat_map(|(a, b)| [a, b]).collect();
        CandidateSet { arity: 2, ids }
    }
}

/// -1, 0 or +1.
fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign of `a . (b x c)`: which way round the triangle a, b, c winds.
pub fn handedness(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> i8 {
    sign(a.dot(&b.cross(c)))
}

pub fn match_2_stars(
    s1: &MeasuredStar,
    s2: &MeasuredStar,
    pdb: &PairDatabase,
    epsilon: f64,
) -> CandidateSet {
    PairSet::query(&s1.direction, &s2.direction, pdb, epsilon).into_candidates()
}

pub fn match_3_stars(
    s1: &MeasuredStar,
    s2: &MeasuredStar,
    s3: &MeasuredStar,
    pdb: &PairDatabase,
    epsilon: f64,
) -> CandidateSet {
    let c12 = PairSet::query(&s1.direction, &s2.direction, pdb, epsilon);
    triangles(
        &[s1.direction, s2.direction, s3.direction],
        &c12,
        pdb,
        epsilon,
    )
}

fn triangles(
    dirs: &[Vector3<f64>; 3],
    c12: &PairSet,
    pdb: &PairDatabase,
    epsilon: f64,
) -> CandidateSet {
    let c23 = PairSet::query(&dirs[1], &dirs[2], pdb, epsilon);
    let c13 = PairSet::query(&dirs[0], &dirs[2], pdb, epsilon);
    if c12.pairs.is_empty() || c23.pairs.is_empty() || c13.pairs.is_empty() {
        return CandidateSet::empty(3);
    }
    let measured = handedness(&dirs[0], &dirs[1], &dirs[2]);

    let mut ids = Vec::new();
    // A first-slot star must appear in both C12 and C13; walking the ids of
    // C12 in order and skipping those absent from C13 covers the union.
    for d in c12.firsts() {
        if !c13.has_partner(d) {
            continue;
        }
        let sd = pdb.direction(d);
        for d2 in c12.partners(d) {
            let sd2 = pdb.direction(d2);
            for d3 in c13.partners(d) {
                if c23.contains(d2, d3) && handedness(sd, sd2, pdb.direction(d3)) == measured {
                    ids.extend_from_slice(&[d, d2, d3]);
                }
            }
        }
    }
    CandidateSet::from_sorted_flat(3, ids)
}

/// Appends measured star `dirs[k]` to every tuple of `prev` (arity `k`).
fn extend(
    prev: &CandidateSet,
    dirs: &[Vector3<f64>],
    pdb: &PairDatabase,
    epsilon: f64,
) -> CandidateSet {
    let k = prev.arity();
    let newest = &dirs[k];
    let sets: Vec<PairSet> = dirs[..k]
        .iter()
        .map(|d| PairSet::query(d, newest, pdb, epsilon))
        .collect();
    let mut ids = Vec::new();
    let mut common: Vec<StarId> = Vec::new();
    for tuple in prev.tuples() {
        common.clear();
        common.extend(sets[0].partners(tuple[0]));
        for (set, &member) in sets.iter().zip(tuple).skip(1) {
            if common.is_empty() {
                break;
            }
            common.retain(|&c| set.contains(member, c));
        }
        for &c in &common {
            // Adjacent to every member, hence distinct from every member.
            debug_assert!(!tuple.contains(&c));
            ids.extend_from_slice(tuple);
            ids.push(c);
        }
    }
    CandidateSet::from_sorted_flat(k + 1, ids)
}

/// Candidates for all `p` measured stars at once.
///
/// Defined for any `p >= 2`; `p = 2` and `p = 3` reduce to the pair and
/// triangle matchers. Fewer than two stars give an empty set.
pub fn match_p_stars(stars: &[MeasuredStar], pdb: &PairDatabase, epsilon: f64) -> CandidateSet {
    let p = stars.len();
    if p < 2 {
        return CandidateSet::empty(p);
    }
    let dirs: Vec<Vector3<f64>> = stars.iter().map(|s| s.direction).collect();
    let c12 = PairSet::query(&dirs[0], &dirs[1], pdb, epsilon);
    if p == 2 {
        return c12.into_candidates();
    }
    let mut set = triangles(&[dirs[0], dirs[1], dirs[2]], &c12, pdb, epsilon);
    for _ in 3..p {
        if set.is_empty() {
            return CandidateSet::empty(p);
        }
        set = extend(&set, &dirs, pdb, epsilon);
    }
    set
}

/// Uses the first 2, 3, ... measured stars until exactly one candidate tuple
/// remains. If none of the prefixes is unique the full-length result is
/// returned with `p_used = p`.
pub fn match_stars(stars: &[MeasuredStar], pdb: &PairDatabase, epsilon: f64) -> MatchOutcome {
    let p = stars.len();
    let not_unique = |candidates| MatchOutcome {
        candidates,
        p_used: p,
        unique: false,
    };
    if p < 2 {
        return not_unique(CandidateSet::empty(p));
    }
    let dirs: Vec<Vector3<f64>> = stars.iter().map(|s| s.direction).collect();
    let c12 = PairSet::query(&dirs[0], &dirs[1], pdb, epsilon);
    // Both orientations of every pair are present, so |C12| is even and two
    // stars are never enough on their own.
    if c12.pairs.len() == 1 || p == 2 {
        let unique = c12.pairs.len() == 1;
        return MatchOutcome {
            candidates: c12.into_candidates(),
            p_used: 2,
            unique,
        };
    }
    let mut set = triangles(&[dirs[0], dirs[1], dirs[2]], &c12, pdb, epsilon);
    let mut used = 3;
    loop {
        if set.len() == 1 {
            return MatchOutcome {
                candidates: set,
                p_used: used,
                unique: true,
            };
        }
        if used == p {
            return not_unique(set);
        }
        if set.is_empty() {
            // Extending an empty set keeps it empty all the way to p.
            return not_unique(CandidateSet::empty(p));
        }
        set = extend(&set, &dirs, pdb, epsilon);
        used += 1;
    }
}

/// Unique, and every used slot holds the star that produced the measurement.
pub fn is_correct_match(outcome: &MatchOutcome, measured: &[MeasuredStar]) -> Result<bool> {
    let truth: Vec<StarId> = measured
        .iter()
        .enumerate()
        .map(|(i, m)| {
            m.true_id
                .ok_or_else(|| Error::Contract(format!("measured star {i} has no ground-truth id")))
        })
        .collect::<Result<_>>()?;
    let Some(tuple) = outcome.candidates.single().filter(|_| outcome.unique) else {
        return Ok(false);
    };
    let used = outcome.p_used.min(truth.len());
    Ok(tuple.len() >= used && tuple[..used] == truth[..used])
}
