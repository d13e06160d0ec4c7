//! The full acceptance run over the bundled atlas.

use std::time::Instant;

use invgen::atlas::Atlas;
use invgen::engine::{
    exact_e1, failure_probability_by_enumeration, fix_kset_brute_counts, fix_kset_profile,
    intersection_fugacity, lower_bound_series, mc_waiting_time, BoundCheck, Estimate,
    FugacitySystem, Mode, BRUTE_FORCE_LIMIT, DEFAULT_EXACT_CAP, DEFAULT_PARTITION_CAP,
};
use invgen::frac::{fraction_string, is_proper_probability, ratio, to_f64};
use invgen::lattice::BOSTON_SHALEV_DELTA;
use invgen::product::{
    m_n_by_descriptors, m_n_by_formula, maximal_descriptors, FactorCache, MaximalDescriptor,
};
use invgen::Result;
use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Value};

use crate::report::{Check, ExperimentReport};

pub const DEFAULT_SEED: u64 = 1729;

/// Trial counts for the Monte Carlo criteria.
#[derive(Clone, Copy, Debug)]
pub struct Scale {
    pub chebotarev_a5: usize,
    pub e1_powers: usize,
    pub chebotarev_powers: usize,
}

impl Scale {
    pub fn full() -> Self {
        Scale {
            chebotarev_a5: 100_000,
            e1_powers: 10_000,
            chebotarev_powers: 10_000,
        }
    }

    pub fn quick() -> Self {
        Scale {
            chebotarev_a5: 20_000,
            e1_powers: 2_000,
            chebotarev_powers: 2_000,
        }
    }
}

const E1_POWERS: [usize; 5] = [2, 4, 8, 16, 64];
const CHEB_POWERS: [usize; 3] = [4, 16, 64];

/// Per-experiment seed, so adding an experiment never shifts another's
/// draws.
fn sub_seed(seed: u64, criterion: u64, k: u64) -> u64 {
    seed ^ (criterion << 48) ^ (k << 32)
}

pub fn suite_paper(quick: bool, seed: u64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let scale = if quick { Scale::quick() } else { Scale::full() };
    let mut report = ExperimentReport::new(
        "verify --suite paper",
        json!({"suite": "paper", "quick": quick, "seed": seed}),
    );
    report.provenance.seed = Some(seed);
    let mut cache = FactorCache::new(Atlas::from_env()?);

    let a5 = cache.factor("A5")?;
    let c1 = vec![
        Check::equal(
            "alpha(A5)",
            json!("3/2"),
            json!(fraction_string(&a5.invariants.alpha)),
        ),
        Check::equal(
            "delta(A5)",
            json!("1/3"),
            json!(fraction_string(&a5.invariants.delta)),
        ),
    ];
    push(&mut report, 1, c1);

    let e1_a6 = exact_e1(&*cache.factor("A6")?)?;
    let e1_a6_exact = e1_a6.exact.clone().expect("exact e1");
    report.set(
        "e1_A6",
        json!({"fraction": fraction_string(&e1_a6_exact), "float": e1_a6.float}),
    );
    push(
        &mut report,
        2,
        vec![Check::equal(
            "e1(A6) to three decimals",
            json!("2.494"),
            json!(format!("{:.3}", e1_a6.float)),
        )],
    );

    let names: Vec<String> = cache
        .atlas()
        .entries()
        .iter()
        .map(|e| e.name.clone())
        .collect();
    let mut c3 = Vec::new();
    let mut c10 = Vec::new();
    let mut profiles = serde_json::Map::new();
    for name in &names {
        let f = cache.factor(name)?;
        let delta = to_f64(&f.invariants.delta);
        c3.push(Check::holds(
            format!("delta({name}) >= {BOSTON_SHALEV_DELTA}"),
            &format!(">= {BOSTON_SHALEV_DELTA}"),
            json!({"fraction": fraction_string(&f.invariants.delta), "float": delta}),
            delta >= BOSTON_SHALEV_DELTA,
        ));
        let binned: u64 = f.invariants.mntilde_table.values().sum();
        let proper = f
            .maximals
            .iter()
            .all(|m| is_proper_probability(&m.fugacity_q));
        c10.push(Check::holds(
            format!("m~_n profile of {name} is finite with proper fugacities"),
            "every maximal class binned once and every q < 1",
            json!({"profile": f.invariants.mntilde_table, "classes": f.maximals.len()}),
            binned == f.maximals.len() as u64 && proper,
        ));
        profiles.insert(name.clone(), json!(f.invariants.mntilde_table));
    }
    report.set("mtilde_profiles", Value::Object(profiles));
    push(&mut report, 3, c3);

    let g_a5 = cache.build_spec("A5")?;
    let sys = FugacitySystem::build(&g_a5, DEFAULT_EXACT_CAP)?;
    let c_a5 = sys.chebotarev();
    let mut series = 0.0;
    for t in 0.. {
        let term = to_f64(&sys.failure_probability(t));
        series += term;
        if term < 1e-18 {
            break;
        }
    }
    let mut oracle_agrees = true;
    for t in 0..=3 {
        oracle_agrees &=
            failure_probability_by_enumeration(&g_a5, t, 1 << 20)? == sys.failure_probability(t);
    }
    let mc = mc_waiting_time(
        &g_a5,
        Mode::Invariable,
        scale.chebotarev_a5,
        sub_seed(seed, 4, 1),
    )?;
    report.set_fraction("C_A5", &c_a5);
    report.set("C_A5_mc", json!(mc));
    let c4 = vec![
        Check::equal("C(A5) exact", json!("91/22"), json!(fraction_string(&c_a5))),
        Check::holds(
            "C(A5) equals the t-series limit",
            "|series - exact| < 1e-12",
            json!(series),
            (series - to_f64(&c_a5)).abs() < 1e-12,
        ),
        Check::holds(
            "class-signature enumeration matches inclusion-exclusion for t <= 3",
            "exact equality",
            json!(oracle_agrees),
            oracle_agrees,
        ),
        Check::holds(
            "C(A5) Monte Carlo within 3 sigma",
            &format!("{} +- 3 se", to_f64(&c_a5)),
            json!({"mean": mc.mean, "se": mc.std_error(), "trials": mc.trials}),
            mc.within_3_sigma(to_f64(&c_a5)),
        ),
    ];
    push(&mut report, 4, c4);

    let g3 = cache.build_spec("A5^3")?;
    let ds3 = maximal_descriptors(&g3);
    let formula = m_n_by_formula(&g3);
    let direct = m_n_by_descriptors(&ds3);
    let table_json = |t: &std::collections::BTreeMap<num_bigint::BigUint, num_bigint::BigUint>| {
        Value::Object(
            t.iter()
                .map(|(n, m)| (n.to_string(), json!(m.to_string())))
                .collect(),
        )
    };
    let alpha_sq = &a5.invariants.alpha * &a5.invariants.alpha;
    let floor = std::cmp::min(ratio(4, 1), alpha_sq);
    let diagonal_ok = ds3.iter().filter(|d| d.is_diagonal()).all(|d| {
        let inv = BigRational::one() / &d.fugacity_q;
        inv > ratio(2, 1) && inv >= floor
    });
    let c5 = vec![
        Check::equal(
            "m_n(A5^3) by counting formula",
            json!({"5": "15", "6": "18", "10": "30", "60": "360"}),
            table_json(&formula),
        ),
        Check::equal(
            "m_n(A5^3) by descriptor counting",
            table_json(&formula),
            table_json(&direct),
        ),
        Check::holds(
            "diagonal |G|/|M~| > 2 and >= min(4, alpha^2)",
            &format!("> 2 and >= {}", fraction_string(&floor)),
            json!(ds3
                .iter()
                .filter(|d| d.is_diagonal())
                .map(|d| fraction_string(&(BigRational::one() / &d.fugacity_q)))
                .collect::<Vec<_>>()),
            diagonal_ok,
        ),
    ];
    push(&mut report, 5, c5);

    let mut c6 = Vec::new();
    let mut exact_c = serde_json::Map::new();
    for k in 1..=3u64 {
        let g = cache.build_spec(&format!("A5^{k}"))?;
        let c = FugacitySystem::build(&g, DEFAULT_EXACT_CAP)?.chebotarev();
        let bound = lower_bound_series(&a5.invariants.alpha, k)?
            .exact
            .expect("small k is exact");
        exact_c.insert(k.to_string(), json!(fraction_string(&c)));
        c6.push(Check::holds(
            format!("C(A5^{k}) >= lower-bound series"),
            &format!(">= {}", fraction_string(&bound)),
            json!({"fraction": fraction_string(&c), "float": to_f64(&c)}),
            c >= bound,
        ));
    }
    report.set("C_A5_powers_exact", Value::Object(exact_c));
    push(&mut report, 6, c6);

    let log_l = (a5.invariants.l as f64).ln();
    let mut c7 = Vec::new();
    let mut e1_estimates = std::collections::BTreeMap::new();
    for k in E1_POWERS {
        let g = cache.build_spec(&format!("A5^{k}"))?;
        let est = mc_waiting_time(
            &g,
            Mode::Generation,
            scale.e1_powers,
            sub_seed(seed, 7, k as u64),
        )?;
        let centre = (k as f64).ln() / log_l;
        let b = BoundCheck::new(
            format!("log k/log 5 - 3 <= e1(A5^{k}) <= log k/log 5 + 6"),
            Some(centre - 3.0),
            Some(centre + 6.0),
            Estimate::from(&est),
        );
        c7.push(Check::from_bound(&b));
        e1_estimates.insert(k, est);
    }
    report.set("e1_A5_powers_mc", json!(e1_estimates));
    push(&mut report, 7, c7);

    let log_alpha = to_f64(&a5.invariants.alpha).ln();
    let mut c8 = Vec::new();
    let mut gaps = Vec::new();
    let mut cheb_estimates = std::collections::BTreeMap::new();
    for k in CHEB_POWERS {
        let g = cache.build_spec(&format!("A5^{k}"))?;
        let est = mc_waiting_time(
            &g,
            Mode::Invariable,
            scale.chebotarev_powers,
            sub_seed(seed, 8, k as u64),
        )?;
        let bound = (1.0 - (-1.0f64).exp()) * (k as f64).ln() / log_alpha;
        c8.push(Check::from_bound(&BoundCheck::new(
            format!("C(A5^{k}) >= (1 - 1/e) log k / log(3/2)"),
            Some(bound),
            None,
            Estimate::from(&est),
        )));
        let e1 = match e1_estimates.get(&k) {
            Some(e) => e.mean,
            None => {
                mc_waiting_time(
                    &g,
                    Mode::Generation,
                    scale.e1_powers,
                    sub_seed(seed, 7, k as u64),
                )?
                .mean
            }
        };
        gaps.push(est.mean - e1);
        cheb_estimates.insert(k, est);
    }
    let increasing = gaps.windows(2).all(|w| w[1] > w[0]);
    c8.push(Check::holds(
        "C - e1 increasing over k in {4, 16, 64}",
        "strictly increasing",
        json!(gaps),
        increasing,
    ));
    report.set("C_A5_powers_mc", json!(cheb_estimates));
    push(&mut report, 8, c8);

    push(&mut report, 9, fixset_checks()?);

    let g2 = cache.build_spec("A5^2")?;
    let ds2 = maximal_descriptors(&g2);
    let monotone = subset_fugacities_monotone(&g2, &ds2)?;
    let mut normalized = true;
    for k in 1..=3 {
        let g = cache.build_spec(&format!("A5^{k}"))?;
        normalized &= FugacitySystem::build(&g, DEFAULT_EXACT_CAP)?.failure_probability(0)
            == BigRational::one();
    }
    let sys2 = FugacitySystem::build(&g2, DEFAULT_EXACT_CAP)?;
    let mut oracle2 = true;
    for t in 0..=2 {
        oracle2 &=
            failure_probability_by_enumeration(&g2, t, 1 << 20)? == sys2.failure_probability(t);
    }
    c10.push(Check::holds(
        "q_J proper and non-increasing under subset growth on A5^2",
        "0 < q_J < 1, q_{J+d} <= q_J",
        json!(monotone),
        monotone,
    ));
    c10.push(Check::holds(
        "1 - P_I(G, 0) = 1 for A5, A5^2, A5^3",
        "exact equality",
        json!(normalized),
        normalized,
    ));
    c10.push(Check::holds(
        "class-signature enumeration matches inclusion-exclusion on A5^2 for t <= 2",
        "exact equality",
        json!(oracle2),
        oracle2,
    ));
    push(&mut report, 10, c10);

    report.finish(started);
    Ok(report)
}

fn push(report: &mut ExperimentReport, criterion: u32, checks: Vec<Check>) {
    report
        .checks
        .extend(checks.into_iter().map(|c| c.criterion(criterion)));
}

fn subset_fugacities_monotone(
    g: &invgen::product::ProductGroup,
    ds: &[MaximalDescriptor],
) -> Result<bool> {
    let m = ds.len();
    let qs = (1u32..1 << m)
        .map(|mask| {
            let j: Vec<&MaximalDescriptor> = (0..m)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| &ds[b])
                .collect();
            intersection_fugacity(g, &j)
        })
        .collect::<Result<Vec<_>>>()?;
    let q = |mask: u32| &qs[mask as usize - 1];
    Ok((1u32..1 << m).all(|mask| {
        let qj = q(mask);
        *qj > BigRational::from_integer(0.into())
            && is_proper_probability(qj)
            && (0..m).all(|b| mask >> b & 1 == 1 || q(mask | 1 << b) <= qj)
    }))
}

fn fixset_checks() -> Result<Vec<Check>> {
    let mut brute_ok = true;
    for r in 1..=BRUTE_FORCE_LIMIT {
        let counts = fix_kset_brute_counts(r)?;
        let total: u64 = (1..=r as u64).product();
        let profile = fix_kset_profile(r, DEFAULT_PARTITION_CAP)?;
        brute_ok &= (1..=r).all(|k| profile[k] == ratio(counts[k], total));
    }
    let mut symmetric = true;
    for r in 1..=20 {
        let p = fix_kset_profile(r, DEFAULT_PARTITION_CAP)?;
        symmetric &= (1..r).all(|k| p[k] == p[r - k]);
    }
    let d = invgen::engine::fixset::decay_exponent();
    let p40 = fix_kset_profile(40, DEFAULT_PARTITION_CAP)?;
    let scaled: Vec<f64> = (2..=20usize)
        .map(|k| {
            let kf = k as f64;
            to_f64(&p40[k]) * kf.powf(d) * (1.0 + kf.ln()).powf(1.5)
        })
        .collect();
    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    Ok(vec![
        Check::holds(
            format!("i(r,k) equals brute force over S_r for r <= {BRUTE_FORCE_LIMIT}"),
            "exact equality",
            json!(brute_ok),
            brute_ok,
        ),
        Check::holds(
            "i(r,k) = i(r,r-k) for r <= 20",
            "exact equality",
            json!(symmetric),
            symmetric,
        ),
        Check::holds(
            "i(40,k) k^delta (1+log k)^(3/2) within a factor 10 over k = 2..20",
            "max/min <= 10",
            json!({"ratio": hi / lo, "values": scaled}),
            hi / lo <= 10.0,
        ),
    ])
}
