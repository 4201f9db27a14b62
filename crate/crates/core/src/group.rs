//! The acting group: a rank-`d` integer lattice with a fixed enumeration and
//! a box Følner sequence.
//!
//! For `d = 1` the enumeration alternates signs by increasing magnitude
//! (`+1, -1, +2, -2, …`) and the `n`-th Følner box is `{1, …, n(n+1)}`,
//! which satisfies the validated almost-invariance inequality
//! `max_{k≤n} #(γ_k F_n △ F_n) / #F_n ≤ 1/n` exactly: the worst shift among
//! the first `n` elements is `⌈n/2⌉`, giving `2⌈n/2⌉/(n(n+1)) ≤ 1/n`.
//!
//! For `d > 1` the enumeration walks sup-norm shells (lexicographic order
//! inside a shell) and the boxes are cubes `{1, …, s_n}^d` with side
//! `s_n = 2 d r(n) n`, where `r(n)` is the sup-norm radius reached by the
//! first `n` elements. All counts are exact integer arithmetic.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A translation of the integer lattice `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<i64>,
}

impl GroupElement {
    pub fn identity(rank: usize) -> Self {
        GroupElement { coords: vec![0; rank] }
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Coordinatewise addition (group composition).
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { coords: self.coords.iter().map(|&c| -c).collect() }
    }

    /// Sup-norm displacement.
    pub fn displacement(&self) -> i64 {
        self.coords.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Rank-1 shift value; panics if the rank is not 1.
    pub fn shift(&self) -> i64 {
        assert_eq!(self.coords.len(), 1, "shift() requires a rank-1 element");
        self.coords[0]
    }
}

/// A box Følner set: the product of integer intervals `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerBox {
    pub index: u64,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl FolnerBox {
    /// Exact cardinality `#F_n`.
    pub fn cardinality(&self) -> u128 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| (h - l + 1) as u128)
            .product()
    }

    pub fn side_lengths(&self) -> Vec<i64> {
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| h - l + 1).collect()
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        point
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&p, (&l, &h))| l <= p && p <= h)
    }

    /// Enumerates the points of the box. Intended for small boxes (tests,
    /// simulation cells); series code uses the closed-form counts instead.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for (&l, &h) in self.lo.iter().zip(&self.hi) {
            let mut next = Vec::new();
            for p in out {
                for v in l..=h {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }
}

/// Result of checking the almost-invariance inequality up to a horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FolnerReport {
    pub pass: bool,
    /// Largest observed `#(γ_k F_n △ F_n)/#F_n` relative to its bound `1/n`;
    /// `worst_margin = n · ratio ≤ 1` iff the inequality holds there.
    pub worst_margin: f64,
    pub worst_ratio: f64,
    pub witness_k: u64,
    pub witness_n: u64,
}

/// A rank-`d` integer lattice together with its enumeration and Følner rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupModel {
    rank: usize,
}

impl Default for GroupModel {
    fn default() -> Self {
        GroupModel::new(1).unwrap()
    }
}

impl GroupModel {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidParam("group rank must be positive".into()));
        }
        Ok(GroupModel { rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.rank)
    }

    /// The `k`-th nonidentity element under the fixed enumeration, `k ≥ 1`.
    ///
    /// Rank 1: `+1, -1, +2, -2, …`. Higher rank: sup-norm shells in
    /// increasing radius, lexicographic inside a shell.
    pub fn enumerate(&self, k: u64) -> Result<GroupElement> {
        if k == 0 {
            return Err(Error::InvalidParam("enumeration index starts at 1".into()));
        }
        if self.rank == 1 {
            let magnitude = k.div_ceil(2) as i64;
            let sign = if k % 2 == 1 { 1 } else { -1 };
            return Ok(GroupElement { coords: vec![sign * magnitude] });
        }
        self.elements()
            .nth((k - 1) as usize)
            .ok_or_else(|| Error::InvalidParam("enumeration exhausted".into()))
    }

    /// Iterator over the enumeration `γ_1, γ_2, …` (identity excluded).
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        ShellIter { rank: self.rank, radius: 0, buf: Vec::new(), pos: 0 }
    }

    /// Sup-norm radius reached by the first `n` elements of the enumeration.
    pub fn enumeration_radius(&self, n: u64) -> i64 {
        if self.rank == 1 {
            return n.div_ceil(2) as i64;
        }
        // Smallest r with (2r+1)^d - 1 >= n.
        let mut r: i64 = 1;
        loop {
            let count = (2 * r as u128 + 1).pow(self.rank as u32) - 1;
            if count >= n as u128 {
                return r;
            }
            r += 1;
        }
    }

    /// The `n`-th Følner box, `n ≥ 1`.
    pub fn folner_set(&self, n: u64) -> Result<FolnerBox> {
        if n == 0 {
            return Err(Error::InvalidParam("Følner index starts at 1".into()));
        }
        let side = self.folner_side(n);
        Ok(FolnerBox {
            index: n,
            lo: vec![1; self.rank],
            hi: vec![side; self.rank],
        })
    }

    /// Side length of the `n`-th Følner box.
    pub fn folner_side(&self, n: u64) -> i64 {
        if self.rank == 1 {
            (n * (n + 1)) as i64
        } else {
            2 * self.rank as i64 * self.enumeration_radius(n) * n as i64
        }
    }

    /// Exact `#(g F_n △ F_n)` via the closed form for translated boxes:
    /// `2 (∏ L_i − ∏ max(0, L_i − |g_i|))`.
    pub fn symdiff_count(&self, g: &GroupElement, n: u64) -> Result<u128> {
        let box_n = self.folner_set(n)?;
        Ok(symdiff_of_box(&box_n, &g.coords))
    }

    /// Exact one-sided flux `#(g F_n \ F_n)`; by box symmetry it equals
    /// `#(F_n \ g F_n)`, i.e. half the symmetric difference.
    pub fn flux_count(&self, g: &GroupElement, n: u64) -> Result<u128> {
        Ok(self.symdiff_count(g, n)? / 2)
    }

    /// Checks `max_{1≤k≤n} #(γ_k F_n △ F_n)/#F_n ≤ 1/n` for every
    /// `n ≤ horizon`, exactly (integer cross-multiplication).
    pub fn validate_folner(&self, horizon: u64) -> Result<FolnerReport> {
        if horizon == 0 {
            return Err(Error::InvalidParam("horizon must be positive".into()));
        }
        let mut report = FolnerReport {
            pass: true,
            worst_margin: 0.0,
            worst_ratio: 0.0,
            witness_k: 0,
            witness_n: 0,
        };
        if self.rank == 1 {
            // The symmetric difference is monotone in |shift|, so the max over
            // the first n elements is attained at the largest magnitude ⌈n/2⌉.
            for n in 1..=horizon {
                let card = (n * (n + 1)) as u128;
                let worst_shift = n.div_ceil(2) as u128;
                let symdiff = 2 * worst_shift.min(card);
                let k = if n == 1 { 1 } else { (2 * worst_shift - 1).min(n as u128) as u64 };
                self.record(&mut report, symdiff, card, k, n);
            }
        } else {
            // Maintain the Pareto frontier of sorted |coordinate| profiles;
            // the symmetric difference is monotone in each |g_i| and symmetric
            // under permutation (cubic boxes), so the frontier carries the max.
            let mut frontier: Vec<(Vec<i64>, u64)> = Vec::new();
            let mut elems = self.elements();
            for n in 1..=horizon {
                let g = elems.next().expect("enumeration is infinite");
                let mut profile: Vec<i64> = g.coords.iter().map(|c| c.abs()).collect();
                profile.sort_unstable();
                if !frontier.iter().any(|(p, _)| dominates(p, &profile)) {
                    frontier.retain(|(p, _)| !dominates(&profile, p));
                    frontier.push((profile, n));
                }
                let box_n = self.folner_set(n)?;
                let card = box_n.cardinality();
                let (symdiff, k) = frontier
                    .iter()
                    .map(|(p, k)| (symdiff_of_box(&box_n, p), *k))
                    .max()
                    .unwrap();
                self.record(&mut report, symdiff, card, k, n);
            }
        }
        Ok(report)
    }

    fn record(&self, report: &mut FolnerReport, symdiff: u128, card: u128, k: u64, n: u64) {
        // Inequality symdiff/card <= 1/n, exactly: n * symdiff <= card.
        let ok = (n as u128) * symdiff <= card;
        let ratio = symdiff as f64 / card as f64;
        let margin = ratio * n as f64;
        if !ok {
            report.pass = false;
        }
        if margin >= report.worst_margin {
            report.worst_margin = margin;
            report.worst_ratio = ratio;
            report.witness_k = k;
            report.witness_n = n;
        }
    }
}

/// `p` dominates `q` if coordinatewise `p_i >= q_i` (sorted profiles).
fn dominates(p: &[i64], q: &[i64]) -> bool {
    p.iter().zip(q).all(|(a, b)| a >= b)
}

fn symdiff_of_box(box_n: &FolnerBox, shifts: &[i64]) -> u128 {
    let total = box_n.cardinality();
    let mut overlap: u128 = 1;
    for ((&l, &h), &s) in box_n.lo.iter().zip(&box_n.hi).zip(shifts) {
        let len = h - l + 1;
        let kept = (len - s.abs()).max(0) as u128;
        overlap *= kept;
    }
    2 * (total - overlap)
}


/// Walks sup-norm shells of `Z^d` in increasing radius, lexicographic order
/// inside each shell.
struct ShellIter {
    rank: usize,
    radius: i64,
    buf: Vec<GroupElement>,
    pos: usize,
}

impl Iterator for ShellIter {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        while self.pos >= self.buf.len() {
            self.radius += 1;
            self.buf = shell_points(self.rank, self.radius);
            self.pos = 0;
        }
        let e = self.buf[self.pos].clone();
        self.pos += 1;
        Some(e)
    }
}

fn shell_points(rank: usize, radius: i64) -> Vec<GroupElement> {
    let mut out = Vec::new();
    let mut coords = vec![-radius; rank];
    loop {
        if coords.iter().map(|c| c.abs()).max() == Some(radius) {
            out.push(GroupElement { coords: coords.clone() });
        }
        // Odometer increment over [-radius, radius]^d.
        let mut i = rank;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if coords[i] < radius {
                coords[i] += 1;
                break;
            }
            coords[i] = -radius;
        }
    }
}
