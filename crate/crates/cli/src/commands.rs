//! Implementations of the four subcommands. Each returns the process exit
//! code: 0 = verified as declared, 2 = undetermined, 1 = error (errors are
//! usually returned as `Err` and mapped in `main`).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use krieger_core::analytics::{
    chi, classify, conservativeness_certificate, hellinger_sum, kakutani_series,
    l1_displacement_series, quadratic_growth_bound, quadratic_integral, restricted_product_mass,
    KriegerType,
};
use krieger_core::group::GroupElement;
use krieger_core::sim::{
    delta1_mass_check, rn_cocycle, sample_configuration, sample_theta_counts, skellam_pmf,
    skellam_window, truncation_error_budget, RatioSetFinding,
};
use krieger_core::system::{
    build_type_ii_inf, build_type_iii0, build_type_iii1, build_type_iii_lambda, Construction,
    Schedule, SystemKind, SystemSpec,
};
use krieger_core::Error as CoreError;

use crate::artifacts::{
    read_cocycles_csv, read_report, read_theta_csv, write_cocycles_csv, write_report,
    write_samples_csv, write_theta_csv, AnalyticsReport, AnyResult, CocycleRow, ConfigFile,
    ElementSeries, GrowthProbe, RunConfig, RunReport, SimulationReport, SkellamSection,
};
use crate::svg;
use crate::{ConstructArgs, ReportArgs, SimulateArgs, VerifyArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_UNDETERMINED: u8 = 2;

fn load_spec(path: &Path) -> AnyResult<SystemSpec> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("reading spec {}: {e}", path.display()))?;
    Ok(SystemSpec::from_json(&text)?)
}

fn elements_of(spec: &SystemSpec, indices: &[u64]) -> AnyResult<Vec<GroupElement>> {
    let mut out = Vec::with_capacity(indices.len());
    for &k in indices {
        out.push(spec.group.enumerate(k)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// construct
// ---------------------------------------------------------------------------

pub fn cmd_construct(args: &ConstructArgs) -> AnyResult<u8> {
    let blocks = args.blocks;
    let spec = match args.kind.as_str() {
        "ii-inf" => build_type_ii_inf(blocks)?,
        "iii-0" => {
            let schedule = match &args.levels {
                None => Schedule::Segmented,
                Some(levels) => Schedule::Explicit { levels: levels.clone() },
            };
            build_type_iii0(blocks, schedule)?
        }
        "iii-lambda" => {
            let lambda = args.lambda.ok_or("--lambda is required for kind iii-lambda")?;
            build_type_iii_lambda(lambda, blocks)?
        }
        "iii-1" => {
            let l1 = args.lambda1.ok_or("--lambda1 is required for kind iii-1")?;
            let l2 = args.lambda2.ok_or("--lambda2 is required for kind iii-1")?;
            build_type_iii1(l1, l2, blocks)?
        }
        other => return Err(format!("unknown kind `{other}`").into()),
    };
    let json = spec.canonical_json()?;
    fs::write(&args.out, format!("{json}\n"))
        .map_err(|e| format!("writing {}: {e}", args.out.display()))?;

    println!("wrote {} ({} blocks, kind {})", args.out.display(), blocks, spec.kind());
    println!("{:>5} {:>12} {:>14} {:>14} {:>12}", "block", "lambda", "nu(A_n)", "mu(A_n)", "#F_n");
    for n in 1..=blocks.min(8) {
        let b = spec.block(n)?;
        println!(
            "{:>5} {:>12.6} {:>14.6e} {:>14.6e} {:>12}",
            n,
            b.lambda,
            b.nu_tower,
            b.mu_tower(),
            spec.group.folner_set(n)?.cardinality()
        );
    }
    if blocks > 8 {
        println!("  ... {} more blocks (deterministic in the block index)", blocks - 8);
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn type_matches(declared: &SystemSpec, found: &KriegerType) -> bool {
    match (declared.kind(), found) {
        (SystemKind::IiInf, KriegerType::IiInf) => true,
        (SystemKind::Iii0, KriegerType::Iii0) => true,
        (SystemKind::IiiLambda, KriegerType::IiiLambda(l)) => {
            match &declared.construction {
                Construction::IiiLambda { lambda } => (l - lambda).abs() <= 1e-12 * lambda,
                _ => false,
            }
        }
        (SystemKind::Iii1, KriegerType::Iii1) => true,
        // A custom spec declares no target type; any determined answer is
        // a successful verification of what the parameters produce.
        (SystemKind::Custom, t) => !matches!(t, KriegerType::Undetermined),
        _ => false,
    }
}

pub fn run_verify(config: &RunConfig) -> AnyResult<(AnalyticsReport, u8)> {
    let spec = &config.spec;
    let folner_horizon = config.horizon.min(10_000).max(1);
    let folner = spec.group.validate_folner(folner_horizon)?;

    let mut displacement = Vec::new();
    for (&k, g) in config.elements.iter().zip(elements_of(spec, &config.elements)?.iter()) {
        displacement.push(ElementSeries {
            element_index: k,
            shift: g.shift(),
            chi: chi(spec, k)?,
            l1: l1_displacement_series(spec, k, config.horizon)?,
            quadratic: quadratic_integral(spec, k, config.horizon)?,
        });
    }

    let conservativeness = conservativeness_certificate(spec, config.horizon)?;
    let mut growth_profile = Vec::new();
    for k in [100u64, 1_000, 10_000] {
        if k <= config.horizon {
            growth_profile.push(GrowthProbe { k, bound: quadratic_growth_bound(spec, k)? });
        }
    }

    let hellinger = hellinger_sum(spec, config.horizon)?;
    let mass = restricted_product_mass(spec, config.horizon)?;
    let kakutani = kakutani_series(spec, config.horizon)?;
    let classification = classify(spec, config.horizon)?;
    let classified_as = classification.krieger_type.to_string();
    let undetermined = matches!(classification.krieger_type, KriegerType::Undetermined);
    let matches_declared = type_matches(spec, &classification.krieger_type);

    let report = AnalyticsReport {
        folner,
        folner_horizon,
        displacement,
        conservativeness,
        growth_profile,
        hellinger_sum: hellinger,
        restricted_product_mass: mass,
        kakutani,
        classification,
        classified_as,
        declared_kind: spec.kind().to_string(),
        matches_declared,
    };
    let code = if undetermined {
        EXIT_UNDETERMINED
    } else if matches_declared {
        EXIT_OK
    } else {
        1
    };
    Ok((report, code))
}

pub fn cmd_verify(args: &VerifyArgs) -> AnyResult<u8> {
    let started = Instant::now();
    let spec = load_spec(&args.spec)?;
    let file = ConfigFile::load(args.config.as_deref())?;
    let config = RunConfig {
        command: "verify".into(),
        spec,
        horizon: args.horizon.or(file.horizon).unwrap_or(100_000),
        samples: 0,
        n_blocks: 0,
        shell_radius: 0,
        seed: 0,
        elements: args
            .elements
            .clone()
            .or(file.elements)
            .unwrap_or_else(|| vec![1, 2, 3, 4]),
        condition: Vec::new(),
    };
    let (analytics, code) = run_verify(&config)?;

    println!("declared kind : {}", analytics.declared_kind);
    println!("classified as : {}", analytics.classified_as);
    println!(
        "folner check  : {} (horizon {}, worst margin {:.3})",
        if analytics.folner.pass { "pass" } else { "FAIL" },
        analytics.folner_horizon,
        analytics.folner.worst_margin
    );
    for e in &analytics.displacement {
        println!(
            "element {:>3} (shift {:>3}): chi = {}, l1 {}, quadratic {}",
            e.element_index,
            e.shift,
            e.chi,
            e.l1.verdict,
            e.quadratic.verdict
        );
    }
    println!("hellinger sum : {}", analytics.hellinger_sum.verdict);
    println!("product mass  : {}", analytics.restricted_product_mass.verdict);
    println!("kakutani      : {}", analytics.kakutani.verdict);
    let report = RunReport { config, analytics: Some(analytics), simulation: None };
    let hash = write_report(&args.out, &report, started.elapsed().as_millis())?;
    println!("report        : {}/report.json (sha256 {hash})", args.out.display());
    Ok(code)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

const COCYCLE_DUMP_MAX: u64 = 20_000;
const SAMPLE_DUMP_MAX: u64 = 100;

fn skellam_section(
    spec: &SystemSpec,
    samples: u64,
    seed: u64,
) -> AnyResult<(SkellamSection, std::collections::BTreeMap<i64, u64>)> {
    let window = skellam_window(spec, 1)?;
    let delta1 = delta1_mass_check(spec, &window)?;
    let counts = sample_theta_counts(spec, &window, samples, seed)?;
    let total: u64 = counts.values().sum();
    let totf = total as f64;
    let mean = counts.iter().map(|(&t, &c)| t as f64 * c as f64).sum::<f64>() / totf;
    let var = counts
        .iter()
        .map(|(&t, &c)| (t as f64 - mean).powi(2) * c as f64)
        .sum::<f64>()
        / totf;
    let (mu1, mu2) = (window.alpha_n, window.lambda * window.alpha_n);
    let lo = counts.keys().next().copied().unwrap_or(0) - 40;
    let hi = counts.keys().next_back().copied().unwrap_or(0) + 40;
    let mut tv = 0.0;
    let mut pmf_mass = 0.0;
    for k in lo..=hi {
        let p = skellam_pmf(k, mu1, mu2);
        pmf_mass += p;
        let emp = counts.get(&k).map_or(0.0, |&c| c as f64 / totf);
        tv += (emp - p).abs();
    }
    // Mass the window [lo, hi] misses counts fully toward the distance.
    let tv_distance = 0.5 * (tv + (1.0 - pmf_mass).max(0.0));
    let section = SkellamSection {
        window,
        delta1,
        samples: total,
        empirical_mean: mean,
        empirical_variance: var,
        expected_mean: mu1 - mu2,
        expected_variance: mu1 + mu2,
        tv_distance,
    };
    Ok((section, counts))
}

pub struct SimulateOutput {
    pub report: SimulationReport,
    pub theta_counts: Option<std::collections::BTreeMap<i64, u64>>,
    pub cocycle_rows: Vec<CocycleRow>,
    pub sample_dumps: Vec<(u64, krieger_core::sim::PointConfiguration)>,
    pub code: u8,
}

pub fn run_simulate(config: &RunConfig) -> AnyResult<SimulateOutput> {
    let spec = &config.spec;
    let elements = elements_of(spec, &config.elements)?;
    let max_disp = elements.iter().map(|g| g.displacement()).max().unwrap_or(0);
    if config.shell_radius < max_disp {
        return Err(format!(
            "shell radius {} is below the largest element displacement {max_disp}",
            config.shell_radius
        )
        .into());
    }
    let n_blocks = spec
        .max_blocks()
        .map_or(config.n_blocks, |m| m.min(config.n_blocks));

    let rn = krieger_core::sim::estimate_rn_expectation(spec, n_blocks, config.samples, config.seed)?;
    let rn_within_4se = (rn.mean - 1.0).abs() <= 4.0 * rn.std_error;
    let budget = truncation_error_budget(spec, n_blocks, config.shell_radius)?;

    let (skellam, theta_counts) = match &spec.construction {
        Construction::IiiLambda { .. } => {
            let (section, counts) = skellam_section(spec, config.samples, config.seed)?;
            (Some(section), Some(counts))
        }
        _ => (None, None),
    };

    let conditioning: Option<BTreeSet<u64>> = if config.condition.is_empty() {
        None
    } else {
        Some(config.condition.iter().copied().collect())
    };
    let (ratio_set, ratio_set_undetermined, mut code) =
        match krieger_core::sim::ratio_set_estimate(
            spec,
            &elements,
            config.samples,
            config.seed,
            conditioning.as_ref(),
        ) {
            Ok(est) => (Some(est), None, EXIT_OK),
            Err(CoreError::Undetermined(msg)) => (None, Some(msg), EXIT_UNDETERMINED),
            Err(e) => return Err(e.into()),
        };

    // Deterministic raw dumps for the renderer and for audits.
    let mut cocycle_rows = Vec::new();
    let mut sample_dumps = Vec::new();
    for i in 0..config.samples.min(COCYCLE_DUMP_MAX) {
        let omega = sample_configuration(spec, n_blocks, config.shell_radius, config.seed, i)?;
        for (&k, g) in config.elements.iter().zip(elements.iter()) {
            let c = rn_cocycle(spec, g, &omega)?;
            let exponents = c
                .exponents
                .iter()
                .map(|(id, e)| format!("{}:{}", id.0, e))
                .collect::<Vec<_>>()
                .join(";");
            cocycle_rows.push(CocycleRow {
                sample_id: i,
                element_index: k,
                shift: g.shift(),
                exponents,
                log_value: c.log_value,
                truncation_valid: c.truncation_valid,
            });
        }
        if i < SAMPLE_DUMP_MAX {
            sample_dumps.push((i, omega));
        }
    }

    if !rn_within_4se || skellam.as_ref().is_some_and(|s| !s.delta1.pass) {
        code = 1;
    }
    let report =
        SimulationReport { rn, rn_within_4se, budget, skellam, ratio_set, ratio_set_undetermined };
    Ok(SimulateOutput { report, theta_counts, cocycle_rows, sample_dumps, code })
}

pub fn cmd_simulate(args: &SimulateArgs) -> AnyResult<u8> {
    let started = Instant::now();
    let spec = load_spec(&args.spec)?;
    let file = ConfigFile::load(args.config.as_deref())?;
    let elements = args
        .elements
        .clone()
        .or(file.elements)
        .unwrap_or_else(|| vec![1, 2, 3, 4]);
    let default_shell = {
        let els = elements_of(&spec, &elements)?;
        els.iter().map(|g| g.displacement()).max().unwrap_or(0)
    };
    let default_blocks = spec.max_blocks().unwrap_or(spec.n_blocks).min(spec.n_blocks).min(24);
    let config = RunConfig {
        command: "simulate".into(),
        spec,
        horizon: 0,
        samples: args.samples.or(file.samples).unwrap_or(100_000),
        n_blocks: args.blocks.or(file.n_blocks).unwrap_or(default_blocks),
        shell_radius: args.shell.or(file.shell_radius).unwrap_or(default_shell),
        seed: args.seed.or(file.seed).unwrap_or(0),
        elements,
        condition: args.condition.clone().or(file.condition).unwrap_or_default(),
    };
    let out = run_simulate(&config)?;

    fs::create_dir_all(&args.out)?;
    write_cocycles_csv(&args.out.join("cocycles.csv"), &out.cocycle_rows)?;
    write_samples_csv(&args.out.join("samples.csv"), &out.sample_dumps)?;
    if let Some(counts) = &out.theta_counts {
        write_theta_csv(&args.out.join("theta.csv"), counts)?;
    }

    let sim = &out.report;
    println!(
        "rn expectation: {:.6} ± {:.6} (SE) over {} samples, {} blocks — {}",
        sim.rn.mean,
        sim.rn.std_error,
        sim.rn.samples,
        sim.rn.n_blocks,
        if sim.rn_within_4se { "within 4 SE of 1" } else { "OUTSIDE 4 SE of 1" }
    );
    println!(
        "truncation    : exit budget {:.3e}, omitted-block budget {:.3e}",
        sim.budget.modeled_exit, sim.budget.omitted_blocks
    );
    if let Some(s) = &sim.skellam {
        println!(
            "skellam       : alpha = {:.4} (window blocks {}..{}), TV = {:.2e}, delta1 {}",
            s.window.alpha_n,
            s.window.n + 1,
            s.window.m_n,
            s.tv_distance,
            if s.delta1.pass { "pass" } else { "FAIL" }
        );
    }
    match (&sim.ratio_set, &sim.ratio_set_undetermined) {
        (Some(est), _) => match &est.finding {
            RatioSetFinding::Lattice { base, exponent_gcd, fitted_lambda, .. } => println!(
                "ratio set     : LATTICE base {base:.6} gcd {exponent_gcd} fitted {fitted_lambda:.6} \
                 ({}/{} samples valid, {} nonzero)",
                est.samples_valid, est.samples_total, est.observations_nonzero
            ),
            RatioSetFinding::Dense { generators } => println!(
                "ratio set     : DENSE ({} independent generators, {}/{} samples valid)",
                generators.len(),
                est.samples_valid,
                est.samples_total
            ),
        },
        (None, Some(msg)) => println!("ratio set     : UNDETERMINED ({msg})"),
        (None, None) => {}
    }

    let report = RunReport { config, analytics: None, simulation: Some(out.report) };
    let hash = write_report(&args.out, &report, started.elapsed().as_millis())?;
    println!("report        : {}/report.json (sha256 {hash})", args.out.display());
    Ok(out.code)
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn series_row(name: &str, v: &krieger_core::analytics::SeriesVerdict) -> String {
    format!(
        "| {} | {} | {:.6e} | {} |\n",
        name,
        v.verdict,
        v.partial_sum,
        if v.tail_upper.is_finite() {
            format!("tail ≤ {:.3e}", v.tail_upper)
        } else {
            format!("tail ≥ {:.3e}", v.tail_lower)
        }
    )
}

fn render_summary(report: &RunReport, hash: &str) -> String {
    let mut s = String::new();
    s.push_str("# Run summary\n\n");
    s.push_str(&format!(
        "- command: `{}`\n- declared kind: `{}`\n- report sha256: `{hash}`\n\n",
        report.config.command,
        report.config.spec.kind()
    ));
    if let Some(a) = &report.analytics {
        s.push_str(&format!(
            "## Classification\n\n- classified as: **{}**\n- matches declared kind: **{}**\n\n",
            a.classified_as, a.matches_declared
        ));
        s.push_str("## Certified series\n\n");
        s.push_str("| series | verdict | partial sum | certified tail |\n|---|---|---|---|\n");
        s.push_str(&series_row("hellinger sum", &a.hellinger_sum));
        s.push_str(&series_row("restricted product mass", &a.restricted_product_mass));
        s.push_str(&series_row("kakutani", &a.kakutani));
        s.push_str(&series_row("conservativeness divergence", &a.conservativeness.divergence));
        s.push_str(&series_row("conservativeness summability", &a.conservativeness.summability));
        for e in &a.displacement {
            s.push_str(&series_row(&format!("l1 displacement (element {})", e.element_index), &e.l1));
            s.push_str(&series_row(&format!("quadratic (element {})", e.element_index), &e.quadratic));
        }
        s.push('\n');
        s.push_str("## Asymptotic invariants\n\n");
        s.push_str(&format!(
            "- Følner validation to horizon {}: {} (worst margin {:.4})\n",
            a.folner_horizon,
            if a.folner.pass { "pass" } else { "fail" },
            a.folner.worst_margin
        ));
        for e in &a.displacement {
            s.push_str(&format!("- χ(element {}) = {}\n", e.element_index, e.chi));
        }
        for p in &a.growth_profile {
            s.push_str(&format!("- growth majorant B({}) = {:.6}\n", p.k, p.bound));
        }
        s.push('\n');
    }
    if let Some(sim) = &report.simulation {
        s.push_str("## Simulation\n\n");
        s.push_str(&format!(
            "- RN expectation: {:.6} ± {:.6} (SE), {} samples, {} blocks — within 4 SE of 1: **{}**\n",
            sim.rn.mean, sim.rn.std_error, sim.rn.samples, sim.rn.n_blocks, sim.rn_within_4se
        ));
        s.push_str(&format!(
            "- truncation budget: modeled-exit {:.3e}, omitted-block {:.3e}\n",
            sim.budget.modeled_exit, sim.budget.omitted_blocks
        ));
        if let Some(sk) = &sim.skellam {
            s.push_str(&format!(
                "- skew statistic window: blocks {}..{}, α = {:.6}, λ = {}\n",
                sk.window.n + 1,
                sk.window.m_n,
                sk.window.alpha_n,
                sk.window.lambda
            ));
            s.push_str(&format!(
                "- ϑ empirical mean {:.4} (expected {:.4}), variance {:.4} (expected {:.4})\n",
                sk.empirical_mean, sk.expected_mean, sk.empirical_variance, sk.expected_variance
            ));
            s.push_str(&format!(
                "- total variation distance to the Skellam law: {:.3e} over {} samples\n",
                sk.tv_distance, sk.samples
            ));
            s.push_str(&format!(
                "- unit-mass chain: pmf(1) = {:.6} > analytic lower {:.6} > 1/16 — pass: **{}**\n",
                sk.delta1.pmf1, sk.delta1.analytic_lower, sk.delta1.pass
            ));
        }
        match (&sim.ratio_set, &sim.ratio_set_undetermined) {
            (Some(est), _) => {
                match &est.finding {
                    RatioSetFinding::Lattice { base, exponent_gcd, fitted_lambda, .. } => {
                        s.push_str(&format!(
                            "- ratio set: **LATTICE**, base {base:.6}, exponent gcd {exponent_gcd}, \
                             fitted λ {fitted_lambda:.6}\n"
                        ));
                    }
                    RatioSetFinding::Dense { generators } => {
                        s.push_str(&format!(
                            "- ratio set: **DENSE** ({} rationally independent generators)\n",
                            generators.len()
                        ));
                    }
                }
                s.push_str(&format!(
                    "- samples: {} valid of {}, {} nonzero cocycle observations\n",
                    est.samples_valid, est.samples_total, est.observations_nonzero
                ));
            }
            (None, Some(msg)) => s.push_str(&format!("- ratio set: **UNDETERMINED** — {msg}\n")),
            (None, None) => {}
        }
        s.push('\n');
    }
    s
}

pub fn cmd_report(args: &ReportArgs) -> AnyResult<u8> {
    let dir: &PathBuf = &args.run;
    let report = read_report(dir)?;
    let report_bytes = fs::read(dir.join("report.json"))?;
    let hash = crate::artifacts::sha256_hex(&report_bytes);

    // ϑ histogram with the exact Skellam overlay.
    let theta_path = dir.join("theta.csv");
    if theta_path.exists() {
        let counts = read_theta_csv(&theta_path)?;
        let total: u64 = counts.values().sum();
        if total > 0 {
            let sk = report
                .simulation
                .as_ref()
                .and_then(|s| s.skellam.as_ref())
                .ok_or("theta.csv present but the report has no skellam section")?;
            let (mu1, mu2) = (sk.window.alpha_n, sk.window.lambda * sk.window.alpha_n);
            let bars: Vec<(f64, f64)> = counts
                .iter()
                .map(|(&t, &c)| (t as f64, c as f64 / total as f64))
                .collect();
            let lo = *counts.keys().next().unwrap() - 2;
            let hi = *counts.keys().next_back().unwrap() + 2;
            let overlay: Vec<(f64, f64)> =
                (lo..=hi).map(|k| (k as f64, skellam_pmf(k, mu1, mu2))).collect();
            let chart = svg::Chart {
                title: "Skew statistic: empirical frequencies vs exact Skellam pmf",
                x_label: "theta",
                y_label: "probability",
                bars: &bars,
                overlay: &overlay,
                overlay_label: "Skellam pmf",
                vlines: &[],
            };
            fs::write(dir.join("theta_hist.svg"), svg::render(&chart))?;
            println!("wrote {}", dir.join("theta_hist.svg").display());
        }
    }

    // Log Radon–Nikodym histogram with the lattice overlay.
    let cocycle_path = dir.join("cocycles.csv");
    if cocycle_path.exists() {
        let rows = read_cocycles_csv(&cocycle_path)?;
        let values: Vec<f64> =
            rows.iter().filter(|r| r.truncation_valid).map(|r| r.log_value).collect();
        if !values.is_empty() {
            let lattice_step = report.simulation.as_ref().and_then(|s| {
                s.ratio_set.as_ref().and_then(|est| match &est.finding {
                    RatioSetFinding::Lattice { fitted_lambda, .. } => {
                        Some(fitted_lambda.ln().abs())
                    }
                    RatioSetFinding::Dense { .. } => None,
                })
            });
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let width = match lattice_step {
                Some(d) if d > 0.0 => d / 4.0,
                _ => ((hi - lo) / 60.0).max(1e-6),
            };
            let mut hist = std::collections::BTreeMap::<i64, u64>::new();
            for &v in &values {
                *hist.entry((v / width).round() as i64).or_insert(0) += 1;
            }
            let n = values.len() as f64;
            let bars: Vec<(f64, f64)> =
                hist.iter().map(|(&b, &c)| (b as f64 * width, c as f64 / n)).collect();
            let vlines: Vec<f64> = match lattice_step {
                Some(d) if d > 0.0 => {
                    let k_lo = (lo / d).floor() as i64 - 1;
                    let k_hi = (hi / d).ceil() as i64 + 1;
                    (k_lo..=k_hi).map(|k| k as f64 * d).collect()
                }
                _ => Vec::new(),
            };
            let chart = svg::Chart {
                title: "Log Radon–Nikodym values (dashed: lattice of the fitted parameter)",
                x_label: "log dnu'/dnu",
                y_label: "frequency",
                bars: &bars,
                overlay: &[],
                overlay_label: "",
                vlines: &vlines,
            };
            fs::write(dir.join("rn_hist.svg"), svg::render(&chart))?;
            println!("wrote {}", dir.join("rn_hist.svg").display());
        }
    }

    let summary = render_summary(&report, &hash);
    fs::write(dir.join("summary.md"), summary)?;
    println!("wrote {}", dir.join("summary.md").display());
    Ok(EXIT_OK)
}
