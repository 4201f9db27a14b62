//! Monte Carlo engine over cell-level Poisson configurations.
//!
//! Because the density is constant on every tower level and on every
//! boundary-shell cell, a point configuration is fully determined — for all
//! Radon–Nikodym purposes — by its per-cell counts: exact positions inside a
//! cell never matter. Each block is therefore a finite family of independent
//! Poisson draws, with zero modeling error for the quantities computed here.
//!
//! Conventions:
//! - The engine supports the rank-1 group model. Block `n`'s tower occupies
//!   levels `1..=L_n` with `L_n = n(n+1)`; the modeled boundary shell is
//!   `R` cells on each side.
//! - A shift `g` moves a point at level `x` to level `x + g`. The cocycle
//!   value is `∏_n λ_n^{net_n}` where `net_n` counts points entering minus
//!   points leaving tower `n`; the exponents are bookkept as exact integers
//!   per density generator, so all lattice membership tests are tolerance
//!   free.
//! - Points whose image leaves the modeled region invalidate the sample
//!   (`truncation_valid = false`) instead of being approximated; omitted
//!   blocks get a certified probability budget.
//! - Every sample derives its own RNG from `(seed, sample_index)` through a
//!   counter scheme, so streams are reproducible independently of parallel
//!   scheduling.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::GroupElement;
use crate::system::{Construction, GeneratorId, SystemSpec};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Cells and configurations
// ---------------------------------------------------------------------------

/// One cell of the modeled base space: a tower level of block `n`
/// (`level ∈ 1..=L_n`) or a boundary-shell cell next to it.
///
/// Invariant: `is_tower ⟺ level ∈ 1..=L_n`. The ν-mass of every cell of
/// block `n` is `ν(A_n')`; the μ-mass is `λ_n·ν(A_n')` on tower cells and
/// `ν(A_n')` on shell cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub block: u64,
    pub level: i64,
    pub is_tower: bool,
}

impl CellIndex {
    /// Builds the index for `(block, level)` with the tower flag derived
    /// from the block's Følner box.
    pub fn new(spec: &SystemSpec, block: u64, level: i64) -> Result<CellIndex> {
        let side = folner_side_checked(spec, block)?;
        Ok(CellIndex { block, level, is_tower: (1..=side).contains(&level) })
    }
}

fn folner_side_checked(spec: &SystemSpec, block: u64) -> Result<i64> {
    if block == 0 {
        return Err(Error::InvalidCell("block index starts at 1".into()));
    }
    if let Some(m) = spec.max_blocks() {
        if block > m {
            return Err(Error::InvalidCell(format!("spec has {m} blocks, cell names block {block}")));
        }
    }
    Ok(spec.group.folner_side(block))
}

/// The density `f` at a cell: `λ_n` on tower cells of block `n`, `1` on
/// boundary-shell cells. Rejects cells whose tower flag contradicts the
/// block geometry.
pub fn density_at(spec: &SystemSpec, cell: &CellIndex) -> Result<f64> {
    let side = folner_side_checked(spec, cell.block)?;
    let in_tower = (1..=side).contains(&cell.level);
    if in_tower != cell.is_tower {
        return Err(Error::InvalidCell(format!(
            "cell (block {}, level {}) has is_tower = {}, geometry says {}",
            cell.block, cell.level, cell.is_tower, in_tower
        )));
    }
    if in_tower {
        Ok(spec.block(cell.block)?.lambda)
    } else {
        Ok(1.0)
    }
}

/// A sampled Poisson point configuration, sparse over occupied cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub counts: BTreeMap<CellIndex, u64>,
    /// Number of modeled blocks.
    pub n_blocks: u64,
    /// Modeled shell width on each side of every tower.
    pub shell_radius: i64,
    pub seed: u64,
    pub sample_index: u64,
    /// Relabeling shift applied after sampling (0 for fresh samples); the
    /// modeled region of block `n` is `1−R+offset ..= L_n+R+offset`.
    pub offset: i64,
}

impl PointConfiguration {
    /// `ω(A_n)`: total count on the tower cells of block `n`.
    pub fn tower_count(&self, n: u64) -> u64 {
        let lo = CellIndex { block: n, level: i64::MIN, is_tower: false };
        let hi = CellIndex { block: n, level: i64::MAX, is_tower: true };
        self.counts
            .range(lo..=hi)
            .filter(|(c, _)| c.is_tower)
            .map(|(_, &v)| v)
            .sum()
    }

    pub fn total_points(&self) -> u64 {
        self.counts.values().sum()
    }

    /// The relabeled configuration `h·ω`: every point at level `x` moves to
    /// level `h + x`. Tower flags are recomputed for the new levels.
    pub fn translate(&self, spec: &SystemSpec, h: &GroupElement) -> Result<PointConfiguration> {
        let s = h.shift();
        let mut counts = BTreeMap::new();
        for (cell, &c) in &self.counts {
            let moved = CellIndex::new(spec, cell.block, cell.level + s)?;
            *counts.entry(moved).or_insert(0) += c;
        }
        Ok(PointConfiguration { counts, offset: self.offset + s, ..self.clone() })
    }
}

// ---------------------------------------------------------------------------
// Counter-based RNG
// ---------------------------------------------------------------------------

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample RNG: a ChaCha8 stream keyed by a splitmix chain over
/// `(seed, sample_index)`. Identical inputs give bit-identical streams on
/// any worker layout.
pub fn sample_rng(seed: u64, sample_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = splitmix64(seed ^ splitmix64(sample_index));
    for chunk in key.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn draw_poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite Poisson mean");
    d.sample(rng) as u64
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Draws one configuration: per block, the tower total is
/// `Poisson(μ_n(A_n))` with points placed uniformly over the `L_n` tower
/// cells, and the shell total is `Poisson(2R·ν(A_n'))` placed uniformly over
/// the `2R` shell cells. Because all cells of a region class carry equal
/// mass, this equals the product of independent per-cell Poisson draws.
pub fn sample_configuration(
    spec: &SystemSpec,
    n_blocks: u64,
    shell_radius: i64,
    seed: u64,
    sample_index: u64,
) -> Result<PointConfiguration> {
    sample_impl(spec, n_blocks, shell_radius, seed, sample_index, None)
}

/// As [`sample_configuration`], but with the tower counts of the listed
/// blocks forced to 0 — conditioning on the zero-count events, valid because
/// cells are independent.
pub fn sample_conditioned(
    spec: &SystemSpec,
    n_blocks: u64,
    shell_radius: i64,
    seed: u64,
    sample_index: u64,
    zero_blocks: &BTreeSet<u64>,
) -> Result<PointConfiguration> {
    if let Some(&bad) = zero_blocks.iter().find(|&&b| b == 0 || b > n_blocks) {
        return Err(Error::InvalidParam(format!(
            "conditioned block {bad} outside 1..={n_blocks}"
        )));
    }
    sample_impl(spec, n_blocks, shell_radius, seed, sample_index, Some(zero_blocks))
}

fn sample_impl(
    spec: &SystemSpec,
    n_blocks: u64,
    shell_radius: i64,
    seed: u64,
    sample_index: u64,
    zero_blocks: Option<&BTreeSet<u64>>,
) -> Result<PointConfiguration> {
    if n_blocks == 0 {
        return Err(Error::InvalidParam("n_blocks must be positive".into()));
    }
    if shell_radius < 0 {
        return Err(Error::InvalidParam("shell radius must be nonnegative".into()));
    }
    if spec.group.rank() != 1 {
        return Err(Error::InvalidParam("the engine supports the rank-1 group model".into()));
    }
    if let Some(m) = spec.max_blocks() {
        if n_blocks > m {
            return Err(Error::InvalidParam(format!(
                "spec has {m} blocks, requested {n_blocks}"
            )));
        }
    }
    let mut rng = sample_rng(seed, sample_index);
    let mut counts: BTreeMap<CellIndex, u64> = BTreeMap::new();
    for n in 1..=n_blocks {
        let b = spec.block(n)?;
        let side = spec.group.folner_side(n);
        let conditioned = zero_blocks.is_some_and(|z| z.contains(&n));
        if !conditioned {
            let k = draw_poisson(&mut rng, b.mu_tower());
            for _ in 0..k {
                let level = rng.gen_range(1..=side);
                *counts
                    .entry(CellIndex { block: n, level, is_tower: true })
                    .or_insert(0) += 1;
            }
        }
        if shell_radius > 0 {
            let k = draw_poisson(&mut rng, 2.0 * shell_radius as f64 * b.nu_base);
            for _ in 0..k {
                let idx = rng.gen_range(0..2 * shell_radius);
                let level = if idx < shell_radius {
                    1 - shell_radius + idx // left shell: 1−R ..= 0
                } else {
                    side + (idx - shell_radius) + 1 // right shell: L+1 ..= L+R
                };
                *counts
                    .entry(CellIndex { block: n, level, is_tower: false })
                    .or_insert(0) += 1;
            }
        }
    }
    Ok(PointConfiguration {
        counts,
        n_blocks,
        shell_radius,
        seed,
        sample_index,
        offset: 0,
    })
}

/// Probability weight of the conditioning event: `e^{−Σ_{k∈zero} μ_k(A_k)}`.
pub fn conditioning_weight(spec: &SystemSpec, zero_blocks: &BTreeSet<u64>) -> Result<f64> {
    let mut total = 0.0;
    for &n in zero_blocks {
        total += spec.block(n)?.mu_tower();
    }
    Ok((-total).exp())
}

// ---------------------------------------------------------------------------
// Radon–Nikodym density and cocycle
// ---------------------------------------------------------------------------

/// Block factor of `dν*/dμ*` at a configuration with `ω(A_n) = k`:
/// `e^{μ_n(A_n) − ν_n(A_n)} λ_n^{−k}`.
pub fn rn_block_density(spec: &SystemSpec, n: u64, tower_count: u64) -> Result<f64> {
    let b = spec.block(n)?;
    Ok((b.mu_tower() - b.nu_tower).exp() * b.lambda.powi(-(tower_count as i32)))
}

/// The cocycle value at `(g, ω)` as an exact integer exponent vector over
/// the spec's density generators, plus the derived real log value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleSample {
    /// Nonzero exponents only: `value = ∏ base_i^{exponents[i]}`.
    pub exponents: BTreeMap<GeneratorId, i64>,
    pub log_value: f64,
    /// `false` when some point's image left the modeled cells; such samples
    /// must be discarded, never approximated.
    pub truncation_valid: bool,
}

impl CocycleSample {
    pub fn exponent_of(&self, id: GeneratorId) -> i64 {
        self.exponents.get(&id).copied().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.exponents.is_empty()
    }
}

struct FluxScan {
    /// Per block: points entering minus points leaving the tower.
    net: Vec<i64>,
    /// Per block: points entering the tower (used by conditioning checks).
    influx: Vec<u64>,
    truncation_valid: bool,
}

fn scan_flux(spec: &SystemSpec, g: &GroupElement, omega: &PointConfiguration) -> Result<FluxScan> {
    let s = g.shift();
    if s.unsigned_abs() as i64 > omega.shell_radius {
        return Err(Error::ShellTooSmall {
            radius: omega.shell_radius,
            needed: s.unsigned_abs() as i64,
        });
    }
    let mut net = vec![0i64; omega.n_blocks as usize + 1];
    let mut influx = vec![0u64; omega.n_blocks as usize + 1];
    let mut truncation_valid = true;
    for (cell, &c) in &omega.counts {
        let side = spec.group.folner_side(cell.block);
        let x = cell.level;
        let y = x + s;
        let inside = (1..=side).contains(&x);
        let target_inside = (1..=side).contains(&y);
        let lo = 1 - omega.shell_radius + omega.offset;
        let hi = side + omega.shell_radius + omega.offset;
        if !(lo..=hi).contains(&y) {
            truncation_valid = false;
        }
        let i = cell.block as usize;
        if inside && !target_inside {
            net[i] -= c as i64;
        } else if !inside && target_inside {
            net[i] += c as i64;
            influx[i] += c;
        }
    }
    Ok(FluxScan { net, influx, truncation_valid })
}

/// Evaluates the Radon–Nikodym cocycle of the shift `g` at `ω`: per block,
/// the exponent contribution is the net number of points entering the tower
/// (each such point trades density 1 for `λ_n`), accumulated exactly on the
/// spec's generator lattice.
pub fn rn_cocycle(
    spec: &SystemSpec,
    g: &GroupElement,
    omega: &PointConfiguration,
) -> Result<CocycleSample> {
    let scan = scan_flux(spec, g, omega)?;
    let mut exponents: BTreeMap<GeneratorId, i64> = BTreeMap::new();
    for n in 1..=omega.n_blocks {
        let d = scan.net[n as usize];
        if d != 0 {
            let (gen, mult) = spec.generator_of_block(n)?;
            *exponents.entry(gen).or_insert(0) += d * mult;
        }
    }
    exponents.retain(|_, v| *v != 0);
    let mut log_value = 0.0;
    for (&gen, &e) in &exponents {
        log_value += e as f64 * spec.generator_log(gen)?;
    }
    Ok(CocycleSample { exponents, log_value, truncation_valid: scan.truncation_valid })
}

/// Whether applying `g` keeps the conditioning event intact: no point may
/// enter the tower of any conditioned block (their counts are 0, so no
/// point can leave either).
pub fn preserves_zero_blocks(
    spec: &SystemSpec,
    g: &GroupElement,
    omega: &PointConfiguration,
    zero_blocks: &BTreeSet<u64>,
) -> Result<bool> {
    let scan = scan_flux(spec, g, omega)?;
    Ok(scan.truncation_valid && zero_blocks.iter().all(|&n| scan.influx[n as usize] == 0))
}

// ---------------------------------------------------------------------------
// Truncation budget
// ---------------------------------------------------------------------------

/// Certified per-run error probabilities for a truncated simulation with
/// shifts of displacement at most `max_displacement`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TruncationBudget {
    /// Bound on P(some modeled shell point's image exits the modeled
    /// region) — the probability a sample is flagged invalid:
    /// `Σ_{n≤N} 2·s·ν(A_n')`.
    pub modeled_exit: f64,
    /// Bound on P(an omitted block `n > N` would have contributed a point
    /// to a flux cell of some tested shift).
    pub omitted_blocks: f64,
}

impl TruncationBudget {
    pub fn total(&self) -> f64 {
        self.modeled_exit + self.omitted_blocks
    }
}

pub fn truncation_error_budget(
    spec: &SystemSpec,
    n_blocks: u64,
    max_displacement: i64,
) -> Result<TruncationBudget> {
    let s = max_displacement.max(0) as f64;
    let mut modeled_exit = 0.0;
    for n in 1..=n_blocks {
        modeled_exit += 2.0 * s * spec.block(n)?.nu_base;
    }
    // Flux cells of an omitted block n carry mass ≤ s·(1+λ_n)·ν(A_n')
    // ≤ s·K/(n·n(n+1)) with the per-construction bound (1+λ_n)ν(A_n) ≤ K/n;
    // Σ_{n>N} 1/n³ ≤ 1/(2N²).
    let ln2 = std::f64::consts::LN_2;
    let k_const = match &spec.construction {
        Construction::IiInf => 1.0 / ln2,
        Construction::Iii0 { .. } => 0.6,
        Construction::IiiLambda { .. } => 4.0 / ln2,
        Construction::Iii1 { .. } => 8.0 / ln2,
        Construction::Custom { .. } => 0.0,
    };
    let omitted_blocks = if spec.max_blocks().is_some_and(|m| m <= n_blocks) {
        0.0
    } else {
        // Sum the leading omitted terms exactly, then close with the
        // analytic 1/(2N²) tail from the cutoff onward.
        let cutoff = n_blocks + 1024;
        let mut exact = 0.0;
        for n in (n_blocks + 1)..=cutoff {
            let b = spec.block(n)?;
            exact += s * (1.0 + b.lambda) * b.nu_base;
        }
        exact + s * k_const / (2.0 * (cutoff as f64).powi(2))
    };
    Ok(TruncationBudget { modeled_exit, omitted_blocks })
}

// ---------------------------------------------------------------------------
// Skellam window statistics
// ---------------------------------------------------------------------------

/// Block window over which the paired-block count difference is an exact
/// Skellam variable.
///
/// `alpha_n` accumulates the μ-masses of the heavier (even-indexed) blocks
/// of each pair: `α_n = Σ_{k=n+1}^{m_n} μ_{2k}(A_{2k}) = Σ 1/(k log(k+1))`.
/// The statistic ϑ below subtracts the lighter block of each pair from the
/// heavier one, so that `ϑ ~ Skellam(α_n, λα_n)` with mean `α_n(1−λ) > 0`
/// and variance `α_n(1+λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkellamSpec {
    /// Window start (exclusive): pairs `k = n+1 ..= m_n` are summed.
    pub n: u64,
    pub m_n: u64,
    pub alpha_n: f64,
    pub lambda: f64,
}

/// Smallest `m_n > n` with `α_n ∈ (0.5, 1)`. Exists for every `n ≥ 1`
/// because the increments `1/(k log(k+1))` are below `0.5` from `k = 2` on
/// and their sum diverges.
pub fn skellam_window(spec: &SystemSpec, n: u64) -> Result<SkellamSpec> {
    let lambda = match &spec.construction {
        Construction::IiiLambda { lambda } => *lambda,
        _ => {
            return Err(Error::InvalidParam(
                "skellam windows are defined for the III_lambda construction".into(),
            ))
        }
    };
    if n == 0 {
        return Err(Error::InvalidParam("window start must be ≥ 1".into()));
    }
    let mut alpha = 0.0f64;
    let mut k = n + 1;
    const LIMIT: u64 = 100_000_000;
    while k <= LIMIT {
        alpha += spec.block(2 * k)?.mu_tower();
        if alpha > 0.5 {
            if alpha >= 1.0 {
                return Err(Error::CertificateFailure {
                    witness: k,
                    reason: format!("window mass jumped to {alpha} ≥ 1"),
                });
            }
            return Ok(SkellamSpec { n, m_n: k, alpha_n: alpha, lambda });
        }
        k += 1;
    }
    Err(Error::HorizonTooSmall {
        horizon: LIMIT,
        reason: "window mass did not reach 0.5".into(),
    })
}

/// The integer window statistic
/// `ϑ = Σ_{k=n+1}^{m_n} (ω(A_{2k}) − ω(A_{2k−1}))` — heavier block minus
/// lighter block of each pair, so its law under μ* is exactly
/// `Skellam(α_n, λα_n)`.
pub fn theta_statistic(
    spec: &SystemSpec,
    window: &SkellamSpec,
    omega: &PointConfiguration,
) -> Result<i64> {
    let _ = spec;
    if omega.n_blocks < 2 * window.m_n {
        return Err(Error::InvalidParam(format!(
            "window needs {} blocks, configuration has {}",
            2 * window.m_n,
            omega.n_blocks
        )));
    }
    let mut theta = 0i64;
    for k in window.n + 1..=window.m_n {
        theta += omega.tower_count(2 * k) as i64 - omega.tower_count(2 * k - 1) as i64;
    }
    Ok(theta)
}

/// Histogram of ϑ over `samples` fresh configurations (parallel, counts
/// merged additively so the result is order-independent).
pub fn sample_theta_counts(
    spec: &SystemSpec,
    window: &SkellamSpec,
    samples: u64,
    seed: u64,
) -> Result<BTreeMap<i64, u64>> {
    let n_blocks = 2 * window.m_n;
    // Fail fast on configuration problems before entering the parallel loop.
    let _ = sample_configuration(spec, n_blocks, 0, seed, 0)?;
    let chunk = 65_536u64;
    let starts: Vec<u64> = (0..samples).step_by(chunk as usize).collect();
    let maps: Vec<BTreeMap<i64, u64>> = starts
        .par_iter()
        .map(|&a| {
            let b = (a + chunk).min(samples);
            let mut m = BTreeMap::new();
            for i in a..b {
                let omega = sample_configuration(spec, n_blocks, 0, seed, i)
                    .expect("parameters validated above");
                let t = theta_statistic(spec, window, &omega)
                    .expect("window fits the sampled blocks");
                *m.entry(t).or_insert(0u64) += 1;
            }
            m
        })
        .collect();
    let mut out = BTreeMap::new();
    for m in maps {
        for (k, v) in m {
            *out.entry(k).or_insert(0) += v;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Skellam pmf
// ---------------------------------------------------------------------------

/// `P(X − Y = k)` for independent `X ~ Poisson(mu1)`, `Y ~ Poisson(mu2)`,
/// by the direct series
/// `e^{−(μ1+μ2)} Σ_{j≥0} μ1^{k+j} μ2^j / ((k+j)! j!)` (for `k ≥ 0`;
/// negative `k` by symmetry), truncated when the certified geometric tail
/// bound drops below 1e-15 relative.
pub fn skellam_pmf(k: i64, mu1: f64, mu2: f64) -> f64 {
    assert!(mu1 >= 0.0 && mu2 >= 0.0, "Poisson means must be nonnegative");
    if k < 0 {
        return skellam_pmf(-k, mu2, mu1);
    }
    if mu1 == 0.0 {
        // X ≡ 0: P(−Y = k) for k ≥ 0 is the Poisson(mu2) mass at 0 (k = 0)
        // or 0 (k > 0).
        return if k == 0 { (-mu2).exp() } else { 0.0 };
    }
    let k = k as u64;
    // t_0 = μ1^k / k!, computed in log space to survive large k.
    let mut log_t0 = 0.0f64;
    for j in 1..=k {
        log_t0 += mu1.ln() - (j as f64).ln();
    }
    let mut term = log_t0.exp();
    let mut acc = term;
    let mut j = 0u64;
    loop {
        // term_{j+1} = term_j · μ1 μ2 / ((k+j+1)(j+1))
        let ratio = mu1 * mu2 / ((k + j + 1) as f64 * (j + 1) as f64);
        term *= ratio;
        acc += term;
        j += 1;
        if ratio < 0.5 {
            // Remaining terms are dominated by the geometric series with
            // this decreasing ratio: tail ≤ term·ratio/(1−ratio).
            let tail = term * ratio / (1.0 - ratio);
            if tail < 1e-15 * acc.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        if j > 10_000 {
            break; // unreachable for sane parameters; hard stop
        }
    }
    (-(mu1 + mu2)).exp() * acc
}

/// Analytic check of the mass chain at the window:
/// `pmf(1; α, λα) > α·e^{−α(1+λ)} > 1/16` and `pmf(0) > pmf(1)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Delta1Report {
    pub alpha: f64,
    pub lambda: f64,
    pub pmf0: f64,
    pub pmf1: f64,
    pub analytic_lower: f64,
    pub pass: bool,
}

pub fn delta1_mass_check(spec: &SystemSpec, window: &SkellamSpec) -> Result<Delta1Report> {
    let _ = spec;
    let a = window.alpha_n;
    let l = window.lambda;
    if !(a > 0.5 && a < 1.0) {
        return Err(Error::InvalidParam(format!("window mass {a} outside (0.5, 1)")));
    }
    let pmf0 = skellam_pmf(0, a, l * a);
    let pmf1 = skellam_pmf(1, a, l * a);
    let lower = a * (-a * (1.0 + l)).exp();
    let pass = pmf1 > lower && lower > 1.0 / 16.0 && pmf0 > pmf1;
    Ok(Delta1Report { alpha: a, lambda: l, pmf0, pmf1, analytic_lower: lower, pass })
}

// ---------------------------------------------------------------------------
// Monte Carlo estimates
// ---------------------------------------------------------------------------

/// Monte Carlo estimate with standard error; the estimator is a pure
/// function of `(spec, n_blocks, samples, seed)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RnEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub n_blocks: u64,
    pub seed: u64,
}

fn pairwise2(v: &[(f64, f64)]) -> (f64, f64) {
    match v.len() {
        0 => (0.0, 0.0),
        1 => v[0],
        2 => (v[0].0 + v[1].0, v[0].1 + v[1].1),
        n => {
            let (a, b) = (pairwise2(&v[..n / 2]), pairwise2(&v[n / 2..]));
            (a.0 + b.0, a.1 + b.1)
        }
    }
}

/// Mean of `∏_{n≤N} rn_block_density(n, ω(A_n))` over fresh configurations.
/// The exact expectation is 1 by the geometric-series identity
/// `Σ_k e^{μ−ν} λ^{−k} e^{−μ} μ^k/k! = e^{μ/λ−ν} = 1` (since `μ = λν`),
/// so the estimate must sit within a few standard errors of 1.
///
/// Only tower totals enter the density, so each sample draws one Poisson
/// total per block; the reduction tree is fixed, making the result
/// bit-stable across worker counts.
pub fn estimate_rn_expectation(
    spec: &SystemSpec,
    n_blocks: u64,
    samples: u64,
    seed: u64,
) -> Result<RnEstimate> {
    if samples < 1_000 {
        return Err(Error::InvalidParam("need at least 10³ samples".into()));
    }
    if n_blocks == 0 {
        return Err(Error::InvalidParam("n_blocks must be positive".into()));
    }
    if let Some(m) = spec.max_blocks() {
        if n_blocks > m {
            return Err(Error::InvalidParam(format!(
                "spec has {m} blocks, requested {n_blocks}"
            )));
        }
    }
    // Per-block (μ−ν offset, λ) table, hoisted out of the sample loop.
    let mut blocks = Vec::with_capacity(n_blocks as usize);
    let mut log_offset = 0.0f64;
    for n in 1..=n_blocks {
        let b = spec.block(n)?;
        log_offset += b.mu_tower() - b.nu_tower;
        blocks.push((b.mu_tower(), b.lambda.ln()));
    }
    let value = |i: u64| -> f64 {
        let mut rng = sample_rng(seed, i);
        let mut log_v = log_offset;
        for &(mu, log_lambda) in &blocks {
            let k = draw_poisson(&mut rng, mu);
            log_v -= k as f64 * log_lambda;
        }
        log_v.exp()
    };
    let chunk = 8192u64;
    let starts: Vec<u64> = (0..samples).step_by(chunk as usize).collect();
    let partials: Vec<(f64, f64)> = starts
        .par_iter()
        .map(|&a| {
            let b = (a + chunk).min(samples);
            let vals: Vec<(f64, f64)> = (a..b)
                .map(|i| {
                    let x = value(i);
                    (x, x * x)
                })
                .collect();
            pairwise2(&vals)
        })
        .collect();
    let (sum, sumsq) = pairwise2(&partials);
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sumsq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(RnEstimate {
        mean,
        std_error: (var / m).sqrt(),
        samples,
        n_blocks,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Ratio-set estimation
// ---------------------------------------------------------------------------

/// Structure of the multiplicative group generated by observed cocycle
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RatioSetFinding {
    /// All observed values lie in `{base^{gcd·m} | m ∈ Z}`; `fitted_lambda`
    /// is `base^{gcd}` computed without logs.
    Lattice {
        generator: GeneratorId,
        base: f64,
        exponent_gcd: i64,
        fitted_lambda: f64,
    },
    /// Two generators with rationally independent logs observed with
    /// nonzero exponents: the generated subgroup is dense in the positive
    /// reals.
    Dense { generators: Vec<GeneratorId> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSetEstimate {
    pub finding: RatioSetFinding,
    pub samples_total: u64,
    /// Samples surviving truncation (and, if conditioning, the requirement
    /// that the shift preserve the conditioned event).
    pub samples_valid: u64,
    /// Valid (sample, element) evaluations with a nonzero exponent vector.
    pub observations_nonzero: u64,
}

/// Collects exact exponent vectors of `rn_cocycle` across samples and
/// elements and reports the generated value group. With `conditioning`,
/// sampling is conditioned on the listed zero blocks and only evaluations
/// that keep the conditioned event intact are counted — the setting in
/// which all observed values must lie in the lattice of the first
/// unconditioned level.
pub fn ratio_set_estimate(
    spec: &SystemSpec,
    elements: &[GroupElement],
    samples: u64,
    seed: u64,
    conditioning: Option<&BTreeSet<u64>>,
) -> Result<RatioSetEstimate> {
    if elements.is_empty() {
        return Err(Error::InvalidParam("need at least one group element".into()));
    }
    let radius = elements.iter().map(|g| g.displacement()).max().unwrap_or(0);
    let n_blocks = spec.max_blocks().map_or(spec.n_blocks, |m| m.min(spec.n_blocks));
    let zero: BTreeSet<u64> = conditioning.cloned().unwrap_or_default();

    #[derive(Clone)]
    struct Acc {
        valid: u64,
        nonzero: u64,
        gcds: BTreeMap<GeneratorId, u64>,
    }
    let accumulate = |mut acc: Acc, sample: &CocycleSample| {
        if !sample.exponents.is_empty() {
            acc.nonzero += 1;
            for (&gen, &e) in &sample.exponents {
                let g = acc.gcds.entry(gen).or_insert(0);
                *g = gcd_u64(*g, e.unsigned_abs());
            }
        }
        acc
    };

    let chunk = 8192u64;
    let starts: Vec<u64> = (0..samples).step_by(chunk as usize).collect();
    let accs: Vec<Result<Acc>> = starts
        .par_iter()
        .map(|&a| {
            let b = (a + chunk).min(samples);
            let mut acc = Acc { valid: 0, nonzero: 0, gcds: BTreeMap::new() };
            for i in a..b {
                let omega = match conditioning {
                    Some(z) => sample_conditioned(spec, n_blocks, radius, seed, i, z)?,
                    None => sample_configuration(spec, n_blocks, radius, seed, i)?,
                };
                let mut all_ok = true;
                let mut evals = Vec::with_capacity(elements.len());
                for g in elements {
                    let c = rn_cocycle(spec, g, &omega)?;
                    if !c.truncation_valid
                        || (!zero.is_empty() && !preserves_zero_blocks(spec, g, &omega, &zero)?)
                    {
                        all_ok = false;
                        break;
                    }
                    evals.push(c);
                }
                if all_ok {
                    acc.valid += 1;
                    for c in &evals {
                        acc = accumulate(acc, c);
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut valid = 0u64;
    let mut nonzero = 0u64;
    let mut gcds: BTreeMap<GeneratorId, u64> = BTreeMap::new();
    for acc in accs {
        let acc = acc?;
        valid += acc.valid;
        nonzero += acc.nonzero;
        for (gen, g) in acc.gcds {
            let e = gcds.entry(gen).or_insert(0);
            *e = gcd_u64(*e, g);
        }
    }
    gcds.retain(|_, g| *g != 0);
    if gcds.is_empty() {
        return Err(Error::Undetermined(format!(
            "no nonzero cocycle observations in {valid} valid samples"
        )));
    }
    let finding = if gcds.len() == 1 {
        let (&generator, &g) = gcds.iter().next().expect("nonempty");
        let base = spec.generator_base(generator)?;
        RatioSetFinding::Lattice {
            generator,
            base,
            exponent_gcd: g as i64,
            fitted_lambda: base.powi(g as i32),
        }
    } else {
        let gens: Vec<GeneratorId> = gcds.keys().copied().collect();
        let ratio = spec.generator_log(gens[0])? / spec.generator_log(gens[1])?;
        if crate::system::detect_rational_dependence(ratio).is_some() {
            return Err(Error::Undetermined(
                "observed generators are rationally dependent within detection precision".into(),
            ));
        }
        RatioSetFinding::Dense { generators: gens }
    };
    Ok(RatioSetEstimate {
        finding,
        samples_total: samples,
        samples_valid: valid,
        observations_nonzero: nonzero,
    })
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}
