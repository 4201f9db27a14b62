//! Block constructions: the tower data `(λ_n, ν(A_n), F_n)` that defines the
//! density `f` and the measure `μ` for each of the four system families, plus
//! the polynomial `c(λ)` those families are parameterized through.
//!
//! Block parameters are lazily generated: `block(n)` is a pure function of
//! the construction descriptor and `n`, so series code can stream terms to
//! any horizon without materializing arrays. The `n_blocks` field is only the
//! default simulation truncation.

use serde::{Deserialize, Serialize};

use crate::group::GroupModel;
use crate::{Error, Result};

/// `c(λ) = λ³ − λ + λ⁻² − 1 = (1−λ²)(1−λ³)/λ²`, the coefficient that turns
/// tower masses into the quadratic-integral series. Positive for `λ ≠ 1`.
pub fn c_of_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParam(format!(
            "c(λ) requires λ > 0, got {lambda}"
        )));
    }
    let l2 = lambda * lambda;
    Ok((1.0 - l2) * (1.0 - l2 * lambda) / l2)
}

/// Polynomial form of `c`, kept as the independent algebraic route for the
/// dual-form agreement checks.
pub fn c_of_lambda_poly(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParam(format!(
            "c(λ) requires λ > 0, got {lambda}"
        )));
    }
    Ok(lambda.powi(3) - lambda + lambda.powi(-2) - 1.0)
}

/// Inverts `c` on `(0, 1)`, where it is strictly decreasing from `+∞` to `0`.
/// Bisection; the returned `λ` satisfies `c(λ) = target` to roundoff.
pub fn solve_c_inverse(target: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidParam(format!(
            "solve_c_inverse requires target > 0, got {target}"
        )));
    }
    let mut lo = f64::MIN_POSITIVE.sqrt();
    let mut hi = 1.0f64;
    // c(lo) is astronomically large, c(hi) = 0; keep the invariant
    // c(lo) >= target >= c(hi).
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if c_of_lambda(mid)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monotone level schedule for the `III_0` family: `λ_n = 2^{l_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Schedule {
    /// `l_n = 2^j` on segments `[N_j, N_{j+1})`, with
    /// `N_{j+1} = ⌈N_j · exp(4^{2^j})⌉` so every segment contributes at
    /// least 1 to `Σ 1/(n 4^{l_n})` (harmonic-integral minorant). Levels form
    /// the divisibility chain `1 | 2 | 4 | …` and are unbounded.
    Segmented,
    /// Explicit levels for the first blocks; the last level repeats forever.
    /// Must be positive, nondecreasing, and a divisibility chain.
    Explicit { levels: Vec<u32> },
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Schedule::Segmented => Ok(()),
            Schedule::Explicit { levels } => {
                if levels.is_empty() {
                    return Err(Error::InvalidParam("empty level schedule".into()));
                }
                for w in levels.windows(2) {
                    if w[1] < w[0] {
                        return Err(Error::InvalidParam(format!(
                            "levels must be nondecreasing, got {} after {}",
                            w[1], w[0]
                        )));
                    }
                    if w[1] % w[0] != 0 {
                        return Err(Error::InvalidParam(format!(
                            "levels must form a divisibility chain, {} does not divide {}",
                            w[0], w[1]
                        )));
                    }
                }
                if levels[0] == 0 {
                    return Err(Error::InvalidParam("levels must be positive".into()));
                }
                Ok(())
            }
        }
    }

    /// The exponent `l_n` for block `n ≥ 1`.
    pub fn level_at(&self, n: u64) -> u32 {
        match self {
            Schedule::Segmented => {
                let mut level = 1u32;
                let mut start = 1u64;
                loop {
                    let next = segment_end(start, level);
                    if n < next {
                        return level;
                    }
                    start = next;
                    level *= 2;
                }
            }
            Schedule::Explicit { levels } => {
                let idx = ((n - 1) as usize).min(levels.len() - 1);
                levels[idx]
            }
        }
    }

    /// Whether the level sequence is unbounded (needed for the lattice
    /// intersection shrinking to the trivial group).
    pub fn unbounded(&self) -> bool {
        matches!(self, Schedule::Segmented)
    }

    /// First block index with a level strictly above `level`, if reachable
    /// within `u64` indices.
    pub fn next_level_start(&self, level: u32) -> Option<u64> {
        match self {
            Schedule::Segmented => {
                let mut l = 1u32;
                let mut start = 1u64;
                while l <= level {
                    let next = segment_end(start, l);
                    if next == u64::MAX {
                        return None;
                    }
                    start = next;
                    l *= 2;
                }
                Some(start)
            }
            Schedule::Explicit { levels } => levels
                .iter()
                .position(|&l| l > level)
                .map(|i| i as u64 + 1),
        }
    }
}

/// End (exclusive) of the segment that starts at `start` with level `level`:
/// `⌈start · exp(4^level)⌉`, saturating.
fn segment_end(start: u64, level: u32) -> u64 {
    let factor = (4f64.powi(level as i32)).exp();
    let end = (start as f64) * factor;
    if end >= u64::MAX as f64 {
        u64::MAX
    } else {
        (end.ceil() as u64).max(start + 1)
    }
}

/// Parameters of one block `X_n`: a Rokhlin tower of shape `F_{shape_index}`
/// carrying density `λ_n` on mass `ν(A_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub index: u64,
    pub lambda: f64,
    /// `ν(A_n)`, the tower mass.
    pub nu_tower: f64,
    /// Index of the Følner box that shapes the tower (equal to `index`).
    pub shape_index: u64,
    /// `ν(A_n') = ν(A_n)/#F_n`, the per-cell mass.
    pub nu_base: f64,
}

impl BlockParams {
    /// `μ(A_n) = λ_n ν(A_n)`.
    pub fn mu_tower(&self) -> f64 {
        self.lambda * self.nu_tower
    }
}

/// Which construction family a spec instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    IiInf,
    Iii0,
    IiiLambda,
    Iii1,
    Custom,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SystemKind::IiInf => "II_inf",
            SystemKind::Iii0 => "III_0",
            SystemKind::IiiLambda => "III_lambda",
            SystemKind::Iii1 => "III_1",
            SystemKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Construction descriptor: everything `block(n)` is a function of.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Construction {
    /// `λ_n` solves `c(λ_n) = log(n+1)` on `(0,1)`; `ν(A_n) = 1/(2n log(n+1))`.
    IiInf,
    /// `λ_n = 2^{l_n}`, `ν(A_n) = 1/(2n c(λ_n))`.
    Iii0 { schedule: Schedule },
    /// Odd blocks carry `λ` with `ν = 1/(m log(m+1))`; even blocks carry
    /// `λ⁻¹` with `ν` scaled by `λ`.
    IiiLambda { lambda: f64 },
    /// Two interleaved `III_λ` families with rationally independent
    /// `log λ1, log λ2`.
    Iii1 { lambda1: f64, lambda2: f64 },
    /// Explicit finite block list (degenerate/test systems).
    Custom { blocks: Vec<CustomBlock> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomBlock {
    pub lambda: f64,
    pub nu_tower: f64,
}

/// One multiplicative generator of the values the cocycle can take: all
/// `log λ_n` of a spec are integer multiples of some generator's log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeneratorId(pub u64);

/// An immutable system specification; shared freely across workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub construction: Construction,
    /// Default truncation for simulation and block listings.
    pub n_blocks: u64,
    pub group: GroupModel,
}

impl SystemSpec {
    pub fn kind(&self) -> SystemKind {
        match &self.construction {
            Construction::IiInf => SystemKind::IiInf,
            Construction::Iii0 { .. } => SystemKind::Iii0,
            Construction::IiiLambda { .. } => SystemKind::IiiLambda,
            Construction::Iii1 { .. } => SystemKind::Iii1,
            Construction::Custom { .. } => SystemKind::Custom,
        }
    }

    /// Number of blocks the construction defines, if finite.
    pub fn max_blocks(&self) -> Option<u64> {
        match &self.construction {
            Construction::Custom { blocks } => Some(blocks.len() as u64),
            _ => None,
        }
    }

    /// Parameters of block `n ≥ 1`. Deterministic in `(construction, n)`.
    pub fn block(&self, n: u64) -> Result<BlockParams> {
        if n == 0 {
            return Err(Error::InvalidParam("block index starts at 1".into()));
        }
        let (lambda, nu_tower) = match &self.construction {
            Construction::IiInf => {
                let log_np1 = ((n + 1) as f64).ln();
                let lambda = solve_c_inverse(log_np1)?;
                (lambda, 1.0 / (2.0 * n as f64 * log_np1))
            }
            Construction::Iii0 { schedule } => {
                let level = schedule.level_at(n);
                let lambda = (2f64).powi(level as i32);
                let c = c_of_lambda(lambda)?;
                (lambda, 1.0 / (2.0 * n as f64 * c))
            }
            Construction::IiiLambda { lambda } => {
                let m = n.div_ceil(2) as f64;
                let base = 1.0 / (m * (m + 1.0).ln());
                if n % 2 == 1 {
                    (*lambda, base)
                } else {
                    (1.0 / lambda, lambda * base)
                }
            }
            Construction::Iii1 { lambda1, lambda2 } => {
                let m = n.div_ceil(4) as f64;
                let base = 1.0 / (m * (m + 1.0).ln());
                match (n - 1) % 4 {
                    0 => (*lambda1, base),
                    1 => (1.0 / lambda1, lambda1 * base),
                    2 => (*lambda2, base),
                    _ => (1.0 / lambda2, lambda2 * base),
                }
            }
            Construction::Custom { blocks } => {
                let b = blocks.get((n - 1) as usize).ok_or_else(|| {
                    Error::InvalidParam(format!(
                        "custom spec has {} blocks, requested {n}",
                        blocks.len()
                    ))
                })?;
                (b.lambda, b.nu_tower)
            }
        };
        let card = self.group.folner_set(n)?.cardinality() as f64;
        Ok(BlockParams {
            index: n,
            lambda,
            nu_tower,
            shape_index: n,
            nu_base: nu_tower / card,
        })
    }

    /// The multiplicative generator of block `n`'s density value together
    /// with the integer multiplier: `log λ_n = multiplier · log(generator)`.
    /// Exponent bookkeeping on these integers is what keeps every
    /// lattice/divisibility check free of floating point.
    pub fn generator_of_block(&self, n: u64) -> Result<(GeneratorId, i64)> {
        if n == 0 {
            return Err(Error::InvalidParam("block index starts at 1".into()));
        }
        Ok(match &self.construction {
            Construction::IiInf | Construction::Custom { .. } => (GeneratorId(n), 1),
            Construction::Iii0 { schedule } => {
                (GeneratorId(0), schedule.level_at(n) as i64)
            }
            Construction::IiiLambda { .. } => {
                (GeneratorId(0), if n % 2 == 1 { 1 } else { -1 })
            }
            Construction::Iii1 { .. } => match (n - 1) % 4 {
                0 => (GeneratorId(0), 1),
                1 => (GeneratorId(0), -1),
                2 => (GeneratorId(1), 1),
                _ => (GeneratorId(1), -1),
            },
        })
    }

    /// Base value of a generator: the λ whose integer powers the block
    /// densities of that generator are. Exact (no logs involved), so lattice
    /// fits can report `base^gcd` without rounding.
    pub fn generator_base(&self, id: GeneratorId) -> Result<f64> {
        Ok(match &self.construction {
            Construction::IiInf | Construction::Custom { .. } => self.block(id.0)?.lambda,
            Construction::Iii0 { .. } => 2.0,
            Construction::IiiLambda { lambda } => *lambda,
            Construction::Iii1 { lambda1, lambda2 } => {
                if id.0 == 0 {
                    *lambda1
                } else {
                    *lambda2
                }
            }
        })
    }

    /// `log` of a generator's base value.
    pub fn generator_log(&self, id: GeneratorId) -> Result<f64> {
        Ok(self.generator_base(id)?.ln())
    }

    /// Canonical serialized form: fixed field order, compact encoding, no
    /// unordered maps anywhere — byte-identical across runs, so spec files
    /// hash stably.
    pub fn canonical_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<SystemSpec> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Type `II_∞` family: `ν(A_n) = 1/(2n log(n+1))`, `c(λ_n) = log(n+1)`.
pub fn build_type_ii_inf(n_blocks: u64) -> Result<SystemSpec> {
    if n_blocks == 0 {
        return Err(Error::InvalidParam("n_blocks must be positive".into()));
    }
    Ok(SystemSpec {
        construction: Construction::IiInf,
        n_blocks,
        group: GroupModel::default(),
    })
}

/// Type `III_0` family: `λ_n = 2^{l_n}`, `ν(A_n) = 1/(2n c(λ_n))`.
pub fn build_type_iii0(n_blocks: u64, schedule: Schedule) -> Result<SystemSpec> {
    if n_blocks == 0 {
        return Err(Error::InvalidParam("n_blocks must be positive".into()));
    }
    schedule.validate()?;
    Ok(SystemSpec {
        construction: Construction::Iii0 { schedule },
        n_blocks,
        group: GroupModel::default(),
    })
}

/// Type `III_λ` family, `0 < λ < 1`.
pub fn build_type_iii_lambda(lambda: f64, n_blocks: u64) -> Result<SystemSpec> {
    if n_blocks == 0 {
        return Err(Error::InvalidParam("n_blocks must be positive".into()));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParam(format!(
            "lambda must lie in (0,1), got {lambda}"
        )));
    }
    Ok(SystemSpec {
        construction: Construction::IiiLambda { lambda },
        n_blocks,
        group: GroupModel::default(),
    })
}

/// Type `III_1` family: interleaves two `III_λ` constructions whose log
/// values are rationally independent.
pub fn build_type_iii1(lambda1: f64, lambda2: f64, n_blocks: u64) -> Result<SystemSpec> {
    if n_blocks == 0 {
        return Err(Error::InvalidParam("n_blocks must be positive".into()));
    }
    for l in [lambda1, lambda2] {
        if !(l > 0.0 && l < 1.0) {
            return Err(Error::InvalidParam(format!(
                "lambda must lie in (0,1), got {l}"
            )));
        }
    }
    if let Some((p, q)) = detect_rational_dependence(lambda1.ln() / lambda2.ln()) {
        return Err(Error::InvalidParam(format!(
            "log {lambda1} / log {lambda2} is rationally dependent ({p}/{q} within detection precision)"
        )));
    }
    Ok(SystemSpec {
        construction: Construction::Iii1 { lambda1, lambda2 },
        n_blocks,
        group: GroupModel::default(),
    })
}

/// Continued-fraction dependence detector: returns `Some((p, q))` when a
/// convergent `p/q` with `q ≤ 10⁶` satisfies `|q·ratio − p| ≤ 1e-12`.
/// Exact irrationality is undecidable in floating point; this bounds the
/// lattice the detector could confuse.
pub fn detect_rational_dependence(ratio: f64) -> Option<(i64, i64)> {
    const MAX_DEN: i64 = 1_000_000;
    const TOL: f64 = 1e-12;
    let mut x = ratio;
    // Convergent recurrence h_k = a_k h_{k-1} + h_{k-2}, same for q.
    let (mut h_prev, mut h) = (1i64, x.floor() as i64);
    let (mut q_prev, mut q) = (0i64, 1i64);
    for _ in 0..64 {
        if (q as f64 * ratio - h as f64).abs() <= TOL {
            return Some((h, q));
        }
        let frac = x - x.floor();
        if frac.abs() < 1e-18 {
            break;
        }
        x = 1.0 / frac;
        let a = x.floor() as i64;
        let h_next = match a.checked_mul(h).and_then(|v| v.checked_add(h_prev)) {
            Some(v) => v,
            None => break,
        };
        let q_next = match a.checked_mul(q).and_then(|v| v.checked_add(q_prev)) {
            Some(v) => v,
            None => break,
        };
        if q_next > MAX_DEN {
            break;
        }
        h_prev = h;
        h = h_next;
        q_prev = q;
        q = q_next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn c_values() {
        assert_eq!(c_of_lambda(1.0).unwrap(), 0.0);
        assert_relative_eq!(c_of_lambda(0.5).unwrap(), 2.625, max_relative = 1e-14);
        assert_relative_eq!(c_of_lambda(2.0).unwrap(), 5.25, max_relative = 1e-14);
        assert!(c_of_lambda(0.0).is_err());
        assert!(c_of_lambda(-1.0).is_err());
    }

    #[test]
    fn c_forms_agree() {
        for i in 1..1000 {
            let l = i as f64 / 100.0;
            let a = c_of_lambda(l).unwrap();
            let b = c_of_lambda_poly(l).unwrap();
            let scale = a.abs().max(b.abs()).max(1e-300);
            assert!((a - b).abs() / scale < 1e-12, "λ={l}: {a} vs {b}");
        }
    }

    #[test]
    fn c_strictly_decreasing_on_unit_interval() {
        let mut prev = f64::INFINITY;
        for i in 1..1000 {
            let l = i as f64 / 1000.0;
            let v = c_of_lambda(l).unwrap();
            assert!(v < prev, "c not strictly decreasing at λ={l}");
            prev = v;
        }
    }

    #[test]
    fn c_inverse_identity() {
        for i in 1..200 {
            let l = i as f64 / 200.0;
            let lam_inv = 1.0 / l;
            assert_relative_eq!(
                c_of_lambda(lam_inv).unwrap() * l,
                c_of_lambda(l).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn solve_c_round_trips() {
        for target in [1e-6, 1e-3, 0.1, 2f64.ln(), 1.0, 10.0, 1e3, 1e6] {
            let l = solve_c_inverse(target).unwrap();
            assert!(l > 0.0 && l < 1.0);
            assert!(
                (c_of_lambda(l).unwrap() - target).abs() <= 1e-10 * target.max(1.0),
                "target {target}"
            );
        }
        let l = solve_c_inverse(2f64.ln()).unwrap();
        assert!((l - 0.699).abs() < 1e-3, "got {l}");
    }

    #[test]
    fn lambda_trend_like_inverse_sqrt_log() {
        // λ with c(λ) = log(n+1) behaves like 1/sqrt(log n) for large n.
        let r3 = solve_c_inverse((1001f64).ln()).unwrap() * (1000f64).ln().sqrt();
        let r6 = solve_c_inverse((1_000_001f64).ln()).unwrap() * (1e6f64).ln().sqrt();
        assert!(r3 > 0.8 && r3 < 1.1, "ratio at 1e3: {r3}");
        assert!(r6 > 0.8 && r6 < 1.1, "ratio at 1e6: {r6}");
        assert!((r6 - 1.0).abs() < (r3 - 1.0).abs(), "trend not tightening");
    }

    #[test]
    fn ii_inf_blocks() {
        let spec = build_type_ii_inf(8).unwrap();
        let b1 = spec.block(1).unwrap();
        assert_relative_eq!(b1.nu_tower, 1.0 / (2.0 * 2f64.ln()), max_relative = 1e-14);
        assert!((b1.lambda - 0.699).abs() < 1e-3);
        // c(λ_n)·ν(A_n) = 1/(2n) by cancellation.
        for n in 1..50 {
            let b = spec.block(n).unwrap();
            assert_relative_eq!(
                c_of_lambda(b.lambda).unwrap() * b.nu_tower,
                1.0 / (2.0 * n as f64),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn iii0_blocks_default_schedule() {
        let spec = build_type_iii0(8, Schedule::Segmented).unwrap();
        let b = spec.block(1).unwrap();
        assert_eq!(b.lambda, 2.0);
        assert_relative_eq!(b.nu_tower, 1.0 / (2.0 * 5.25), max_relative = 1e-14);
        for n in 1..100 {
            let b = spec.block(n).unwrap();
            assert_relative_eq!(
                c_of_lambda(b.lambda).unwrap() * b.nu_tower,
                1.0 / (2.0 * n as f64),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn segmented_schedule_shape() {
        let s = Schedule::Segmented;
        assert_eq!(s.level_at(1), 1);
        assert_eq!(s.level_at(54), 1);
        assert_eq!(s.level_at(55), 2);
        assert_eq!(s.level_at(1_000_000), 2);
        // Monotone within a long prefix.
        let mut prev = 0;
        for n in 1..10_000 {
            let l = s.level_at(n);
            assert!(l >= prev);
            prev = l;
        }
        assert!(s.level_at(5) <= s.level_at(6));
        assert_eq!(s.next_level_start(1), Some(55));
        assert!(s.unbounded());
    }

    #[test]
    fn explicit_schedule_validation() {
        assert!(Schedule::Explicit { levels: vec![1, 1, 2, 4] }.validate().is_ok());
        assert!(Schedule::Explicit { levels: vec![2, 1] }.validate().is_err());
        assert!(Schedule::Explicit { levels: vec![2, 3] }.validate().is_err());
        assert!(Schedule::Explicit { levels: vec![] }.validate().is_err());
        assert!(build_type_iii0(4, Schedule::Explicit { levels: vec![3, 2] }).is_err());
    }

    #[test]
    fn iii_lambda_blocks() {
        let spec = build_type_iii_lambda(0.5, 8).unwrap();
        let b1 = spec.block(1).unwrap();
        let b2 = spec.block(2).unwrap();
        assert_relative_eq!(b1.nu_tower, 1.0 / 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(b2.nu_tower, 0.5 / 2f64.ln(), max_relative = 1e-14);
        assert_eq!(b1.lambda, 0.5);
        assert_eq!(b2.lambda, 2.0);
        assert!(build_type_iii_lambda(1.5, 4).is_err());
        assert!(build_type_iii_lambda(0.0, 4).is_err());
    }

    #[test]
    fn iii_lambda_pairing_telescopes() {
        let spec = build_type_iii_lambda(0.37, 64).unwrap();
        for m in 1..32u64 {
            let odd = spec.block(2 * m - 1).unwrap();
            let even = spec.block(2 * m).unwrap();
            let resid = odd.mu_tower() - odd.nu_tower + even.mu_tower() - even.nu_tower;
            let scale = odd.nu_tower.max(even.nu_tower);
            assert!(resid.abs() <= 4.0 * f64::EPSILON * scale, "pair {m}: {resid}");
        }
    }

    #[test]
    fn iii_lambda_c_nu_constant_per_pair() {
        let lambda = 0.5f64;
        let spec = build_type_iii_lambda(lambda, 16).unwrap();
        let c = c_of_lambda(lambda).unwrap();
        for m in 1..8u64 {
            let expect = c / (m as f64 * ((m + 1) as f64).ln());
            for b in [spec.block(2 * m - 1).unwrap(), spec.block(2 * m).unwrap()] {
                assert_relative_eq!(
                    c_of_lambda(b.lambda).unwrap() * b.nu_tower,
                    expect,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn iii1_accepts_independent_rejects_dependent() {
        assert!(build_type_iii1(0.5, 1.0 / 3.0, 8).is_ok());
        assert!(build_type_iii1(0.5, 0.25, 8).is_err());
        assert!(build_type_iii1(0.5, 0.5f64.powi(3), 8).is_err());
        let spec = build_type_iii1(0.5, 1.0 / 3.0, 8).unwrap();
        // Block 5 is the n=2 copy of the λ1 family.
        let b5 = spec.block(5).unwrap();
        assert_eq!(b5.lambda, 0.5);
        assert_relative_eq!(b5.nu_tower, 1.0 / (2.0 * 3f64.ln()), max_relative = 1e-14);
    }

    #[test]
    fn blocks_are_deterministic() {
        let spec = build_type_ii_inf(8).unwrap();
        for n in [1u64, 7, 100, 12345] {
            let a = spec.block(n).unwrap();
            let b = spec.block(n).unwrap();
            assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
            assert_eq!(a.nu_tower.to_bits(), b.nu_tower.to_bits());
            assert_eq!(a.nu_base.to_bits(), b.nu_base.to_bits());
        }
    }

    #[test]
    fn nu_base_times_cardinality_is_nu_tower() {
        let spec = build_type_iii_lambda(0.5, 8).unwrap();
        for n in 1..20u64 {
            let b = spec.block(n).unwrap();
            let card = spec.group.folner_set(n).unwrap().cardinality() as f64;
            let err = (b.nu_base * card - b.nu_tower).abs();
            assert!(err <= f64::EPSILON * b.nu_tower, "block {n}");
        }
    }

    #[test]
    fn serialization_round_trip_and_canonical() {
        let specs = vec![
            build_type_ii_inf(16).unwrap(),
            build_type_iii0(16, Schedule::Segmented).unwrap(),
            build_type_iii_lambda(0.5, 16).unwrap(),
            build_type_iii1(0.5, 1.0 / 3.0, 16).unwrap(),
        ];
        for spec in specs {
            let json = spec.canonical_json().unwrap();
            let back = SystemSpec::from_json(&json).unwrap();
            assert_eq!(spec, back);
            assert_eq!(json, back.canonical_json().unwrap());
        }
    }

    #[test]
    fn generator_bookkeeping() {
        let spec = build_type_iii_lambda(0.5, 8).unwrap();
        assert_eq!(spec.generator_of_block(1).unwrap(), (GeneratorId(0), 1));
        assert_eq!(spec.generator_of_block(2).unwrap(), (GeneratorId(0), -1));
        let spec0 = build_type_iii0(8, Schedule::Explicit { levels: vec![1, 2, 4] }).unwrap();
        assert_eq!(spec0.generator_of_block(2).unwrap(), (GeneratorId(0), 2));
        assert_eq!(spec0.generator_of_block(9).unwrap(), (GeneratorId(0), 4));
    }
}
