//! Command grammar and dispatch for `lab`.

use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use invgen::atlas::{build_group, Atlas};
use invgen::engine::{
    exact_e1, failure_curve, fix_kset_brute_counts, fix_kset_proportion, lower_bound_series,
    mc_waiting_time, theorem_bounds, truncated_chebotarev, Estimate, FugacitySystem, Mode,
    SeriesValue, WaitingTimeEstimate, DEFAULT_EXACT_CAP, DEFAULT_PARTITION_CAP,
};
use invgen::frac::{fraction_string, parse_fraction, ratio, to_f64};
use invgen::lattice::FactorData;
use invgen::product::{
    m_n_by_descriptors, m_n_by_formula, maximal_descriptors, DescriptorKind, FactorCache,
    ProductGroup,
};
use invgen::{Error, Result};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::report::{fraction_json, Check, ExperimentReport, Table};
use crate::suite::{suite_paper, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(
    name = "lab",
    version,
    about = "Random and invariable generation of finite simple groups and their direct products"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json, visible_alias = "emit")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Inspect the group atlas.
    Atlas {
        #[command(subcommand)]
        action: AtlasAction,
    },
    /// Conjugacy classes of subgroups with Möbius values.
    Lattice { group: String },
    /// Maximal classes, l, delta, alpha and the m_n profiles of a simple group.
    Invariants {
        group: String,
        /// Use maximal classes from this JSON file instead of enumerating the lattice.
        #[arg(long)]
        import: Option<PathBuf>,
    },
    /// Maximal-subgroup classes of a product such as `A5^2xPSL(2,7)`.
    Descriptors { spec: String },
    /// The Chebotarev invariant C(G).
    Cheb(ChebArgs),
    /// The expected number of random generators e1(G).
    E1(E1Args),
    /// The lower-bound series sum_t 1 - (1 - alpha^-t)^k.
    Series {
        #[arg(long, value_parser = parse_alpha)]
        alpha: BigRational,
        #[arg(long)]
        k: u64,
        /// Tabulate every k' <= k.
        #[arg(long)]
        table: bool,
    },
    /// The proportion i(r,k) of S_r fixing a k-set.
    Fixset {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
        /// Cross-check against enumeration of S_r.
        #[arg(long)]
        brute: bool,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_parser = ["paper"])]
        suite: String,
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum AtlasAction {
    List,
    /// Rebuild and validate every entry, or the named ones.
    Validate {
        groups: Vec<String>,
    },
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).args(["exact", "truncate", "mc"])))]
pub struct ChebArgs {
    /// Group such as `A5`, `A5^3` or `A5^2xPSL(2,7)`.
    pub spec: String,
    /// Exact value by inclusion-exclusion.
    #[arg(long)]
    pub exact: bool,
    /// Sum the first T terms.
    #[arg(long, value_name = "T")]
    pub truncate: Option<u32>,
    /// Monte Carlo with this many trials.
    #[arg(long, value_name = "TRIALS")]
    pub mc: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Largest descriptor count handled by exact inclusion-exclusion.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub cap: usize,
    /// Tabulate 1 - P_I(G,t) for t = 0..=T (exact mode).
    #[arg(long, value_name = "T")]
    pub curve: Option<u32>,
    /// Check the known lower bounds against the value.
    #[arg(long)]
    pub bounds: bool,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).args(["exact", "mc"])))]
pub struct E1Args {
    /// Group such as `A6` or `A5^8`.
    pub spec: String,
    /// Exact value from the subgroup lattice (simple groups only).
    #[arg(long)]
    pub exact: bool,
    /// Monte Carlo with this many trials.
    #[arg(long, value_name = "TRIALS")]
    pub mc: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Check the known bounds against the value.
    #[arg(long)]
    pub bounds: bool,
}

fn parse_alpha(s: &str) -> std::result::Result<BigRational, String> {
    parse_fraction(s).map_err(|e| e.to_string())
}

pub fn run(cli: &Cli) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = match &cli.command {
        Command::Atlas { action } => atlas(action)?,
        Command::Lattice { group } => lattice(group)?,
        Command::Invariants { group, import } => invariants(group, import.as_ref())?,
        Command::Descriptors { spec } => descriptors(spec)?,
        Command::Cheb(args) => cheb(args)?,
        Command::E1(args) => e1(args)?,
        Command::Series { alpha, k, table } => series(alpha, *k, *table)?,
        Command::Fixset { r, k, brute } => fixset(*r, *k, *brute)?,
        Command::Verify { quick, seed, .. } => suite_paper(*quick, *seed)?,
    };
    report.finish(started);
    Ok(report)
}

fn cache() -> Result<FactorCache> {
    Ok(FactorCache::new(Atlas::from_env()?))
}

fn atlas(action: &AtlasAction) -> Result<ExperimentReport> {
    let atlas = Atlas::from_env()?;
    match action {
        AtlasAction::List => {
            let mut report = ExperimentReport::new("atlas list", json!({}));
            let mut table = Table::new(&["name", "degree", "order", "aut_order", "generators"]);
            let groups: Vec<Value> = atlas
                .entries()
                .iter()
                .map(|e| {
                    table.push(vec![
                        e.name.clone(),
                        e.degree.to_string(),
                        e.expected_order.map(|o| o.to_string()).unwrap_or_default(),
                        e.aut_order.map(|o| o.to_string()).unwrap_or_default(),
                        e.generators.len().to_string(),
                    ]);
                    json!({
                        "name": e.name,
                        "degree": e.degree,
                        "order": e.expected_order,
                        "aut_order": e.aut_order,
                        "generators": e.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            report.set("groups", json!(groups));
            report.table = Some(table);
            Ok(report)
        }
        AtlasAction::Validate { groups } => {
            let mut report = ExperimentReport::new("atlas validate", json!({"groups": groups}));
            let names: Vec<String> = if groups.is_empty() {
                atlas.entries().iter().map(|e| e.name.clone()).collect()
            } else {
                groups.clone()
            };
            let mut results = Vec::new();
            for name in names {
                let outcome = atlas.entry(&name).cloned().and_then(build_group);
                let measured = match &outcome {
                    Ok(g) => json!({
                        "order": g.order(),
                        "classes": g.classes.num_classes(),
                        "out_order": g.out_order(),
                        "aut_order": g.aut_order,
                    }),
                    Err(e) => json!({"error": e.to_string()}),
                };
                results.push(json!({"name": name, "result": measured.clone()}));
                report.checks.push(Check::holds(
                    format!("{name} is a valid simple group with its automorphisms"),
                    "valid",
                    measured,
                    outcome.is_ok(),
                ));
            }
            report.set("groups", json!(results));
            Ok(report)
        }
    }
}

fn lattice(group: &str) -> Result<ExperimentReport> {
    let f = cache()?.factor(group)?;
    let lattice = f
        .lattice
        .as_ref()
        .ok_or_else(|| Error::LatticeUnavailable(group.to_string()))?;
    let mut report = ExperimentReport::new("lattice", json!({"group": group}));
    let mut table = Table::new(&["class", "order", "size", "mobius", "maximal"]);
    let classes: Vec<Value> = lattice
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            table.push(vec![
                i.to_string(),
                c.order.to_string(),
                c.size.to_string(),
                c.mobius.to_string(),
                c.is_maximal.to_string(),
            ]);
            json!({
                "order": c.order,
                "size": c.size,
                "mobius": c.mobius,
                "maximal": c.is_maximal,
                "generators": c.generators.iter().map(|&x| f.group.table.element(x).to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    report.set("group", json!(f.name()));
    report.set("order", json!(lattice.group_order));
    report.set("subgroups", json!(lattice.records.len()));
    report.set("classes", json!(classes));
    report.table = Some(table);
    Ok(report)
}

fn invariants(group: &str, import: Option<&PathBuf>) -> Result<ExperimentReport> {
    let f = match import {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            let doc: Value = serde_json::from_str(&text)?;
            FactorData::from_import(Atlas::from_env()?.build(group)?, &doc)?
        }
        None => FactorData::analyze(Atlas::from_env()?.build(group)?)?,
    };
    let mut report = ExperimentReport::new(
        "invariants",
        json!({"group": group, "import": import.map(|p| p.display().to_string())}),
    );
    let inv = &f.invariants;
    report.set("group", json!(f.name()));
    report.set("order", json!(f.group.order()));
    report.set("l", json!(inv.l));
    report.set_fraction("delta", &inv.delta);
    report.set_fraction("alpha", &inv.alpha);
    report.set("m_n", json!(inv.m_n_table));
    report.set("mtilde_n", json!(inv.mntilde_table));
    report.set("script_m", json!(inv.script_m));
    let mut table = Table::new(&[
        "index",
        "order",
        "class_size",
        "mtilde_size",
        "q",
        "q_float",
    ]);
    let maximals: Vec<Value> = f
        .maximals
        .iter()
        .map(|m| {
            table.push(vec![
                m.index_n.to_string(),
                m.order().to_string(),
                m.class_size().to_string(),
                m.mtilde_size.to_string(),
                fraction_string(&m.fugacity_q),
                to_f64(&m.fugacity_q).to_string(),
            ]);
            json!({
                "index": m.index_n,
                "order": m.order(),
                "class_size": m.class_size(),
                "mtilde_size": m.mtilde_size,
                "q": fraction_string(&m.fugacity_q),
                "q_float": to_f64(&m.fugacity_q),
                "imported": m.trusted,
            })
        })
        .collect();
    report.set("maximal_classes", json!(maximals));
    report.table = Some(table);
    Ok(report)
}

fn descriptor_json(d: &invgen::product::MaximalDescriptor) -> Value {
    let (kind, coordinates, detail) = match d.kind {
        DescriptorKind::Product { coord, class } => {
            ("product", vec![coord], json!({"class": class}))
        }
        DescriptorKind::Diagonal { i, j, coset } => {
            ("diagonal", vec![i, j], json!({"coset": coset}))
        }
    };
    json!({
        "kind": kind,
        "coordinates": coordinates,
        "detail": detail,
        "index_n": d.index_n.to_string(),
        "class_size": d.class_size.to_string(),
        "q": fraction_string(&d.fugacity_q),
        "q_float": to_f64(&d.fugacity_q),
    })
}

fn m_n_json(t: &std::collections::BTreeMap<num_bigint::BigUint, num_bigint::BigUint>) -> Value {
    Value::Object(
        t.iter()
            .map(|(n, m)| (n.to_string(), json!(m.to_string())))
            .collect(),
    )
}

fn descriptors(spec: &str) -> Result<ExperimentReport> {
    let g = cache()?.build_spec(spec)?;
    let ds = maximal_descriptors(&g);
    let mut report = ExperimentReport::new("descriptors", json!({"spec": spec}));
    let mut table = Table::new(&["kind", "coordinates", "index_n", "q"]);
    for d in &ds {
        let v = descriptor_json(d);
        table.push(vec![
            v["kind"].as_str().unwrap_or_default().to_string(),
            v["coordinates"].to_string(),
            d.index_n.to_string(),
            fraction_string(&d.fugacity_q),
        ]);
    }
    report.set("group", json!(g.spec_string()));
    report.set("order", json!(g.order.to_string()));
    report.set(
        "descriptors",
        json!(ds.iter().map(descriptor_json).collect::<Vec<_>>()),
    );
    report.set(
        "product_count",
        json!(ds.iter().filter(|d| !d.is_diagonal()).count()),
    );
    report.set(
        "diagonal_count",
        json!(ds.iter().filter(|d| d.is_diagonal()).count()),
    );
    let formula = m_n_json(&m_n_by_formula(&g));
    let direct = m_n_json(&m_n_by_descriptors(&ds));
    report.set("m_n", formula.clone());
    report.checks.push(Check::equal(
        "m_n by counting formula matches descriptor counting",
        formula,
        direct,
    ));
    report.table = Some(table);
    Ok(report)
}

fn series_json(report: &mut ExperimentReport, key: &str, v: &SeriesValue) {
    if let Some(q) = &v.exact {
        report.set_fraction(key, q);
    } else {
        report.set(&format!("{key}_float"), json!(v.float));
    }
    report.set("value", json!(v.float));
    if v.exact.is_none() {
        report.set("truncation_bound", json!(v.truncation_bound));
        report.set("upper_bound", json!(v.upper_bound));
    }
}

fn estimate_json(report: &mut ExperimentReport, e: &WaitingTimeEstimate) {
    report.set("estimate", json!(e.mean));
    report.set("value", json!(e.mean));
    report.set("ci95", json!(e.ci95));
    report.set("mc", json!(e));
    report.provenance.seed = Some(e.seed);
}

fn attach_bounds(
    report: &mut ExperimentReport,
    g: &ProductGroup,
    e1: Option<Estimate>,
    c: Option<Estimate>,
) -> Result<()> {
    let b = theorem_bounds(g, e1, c)?;
    report.checks.extend(b.checks.iter().map(Check::from_bound));
    report.set(
        "reported",
        Value::Object(b.reported.into_iter().map(|(k, v)| (k, json!(v))).collect()),
    );
    Ok(())
}

fn cheb(args: &ChebArgs) -> Result<ExperimentReport> {
    let g = cache()?.build_spec(&args.spec)?;
    let mut report = ExperimentReport::new(
        "cheb",
        json!({
            "spec": args.spec,
            "exact": args.exact,
            "truncate": args.truncate,
            "mc": args.mc,
            "seed": args.seed,
            "cap": args.cap,
        }),
    );
    report.set("descriptors", json!(maximal_descriptors(&g).len()));
    let estimate = if args.exact {
        let sys = FugacitySystem::build(&g, args.cap)?;
        let c = sys.chebotarev();
        series_json(&mut report, "exact", &SeriesValue::exact(c.clone()));
        if let Some(t) = args.curve {
            let mut table = Table::new(&["t", "failure_probability"]);
            for (t, p) in failure_curve(&sys, t) {
                table.push(vec![t.to_string(), p.to_string()]);
            }
            report.table = Some(table);
        }
        Estimate::exact(to_f64(&c))
    } else if let Some(t) = args.truncate {
        let v = truncated_chebotarev(&g, t, args.cap)?;
        series_json(&mut report, "partial", &v);
        Estimate::exact(v.float)
    } else {
        let trials = args.mc.expect("mode group is required");
        let e = mc_waiting_time(&g, Mode::Invariable, trials, args.seed)?;
        estimate_json(&mut report, &e);
        Estimate::from(&e)
    };
    if args.bounds {
        attach_bounds(&mut report, &g, None, Some(estimate))?;
    }
    Ok(report)
}

fn e1(args: &E1Args) -> Result<ExperimentReport> {
    let mut cache = cache()?;
    let g = cache.build_spec(&args.spec)?;
    let mut report = ExperimentReport::new(
        "e1",
        json!({"spec": args.spec, "exact": args.exact, "mc": args.mc, "seed": args.seed}),
    );
    let estimate = if args.exact {
        if g.k() != 1 {
            return Err(Error::LatticeUnavailable(g.spec_string()));
        }
        let v = exact_e1(g.factor_of(0))?;
        series_json(&mut report, "exact", &v);
        Estimate::exact(v.float)
    } else {
        let trials = args.mc.expect("mode group is required");
        let e = mc_waiting_time(&g, Mode::Generation, trials, args.seed)?;
        estimate_json(&mut report, &e);
        Estimate::from(&e)
    };
    if args.bounds {
        attach_bounds(&mut report, &g, Some(estimate), None)?;
    }
    Ok(report)
}

fn series(alpha: &BigRational, k: u64, tabulate: bool) -> Result<ExperimentReport> {
    let mut report =
        ExperimentReport::new("series", json!({"alpha": fraction_string(alpha), "k": k}));
    let v = lower_bound_series(alpha, k)?;
    series_json(&mut report, "exact", &v);
    if tabulate {
        let log_alpha = to_f64(alpha).ln();
        let mut table = Table::new(&["k", "series", "asymptotic_lower", "log_k_over_log_alpha"]);
        for kk in 1..=k {
            let s = lower_bound_series(alpha, kk)?.float;
            let ratio = (kk as f64).ln() / log_alpha;
            table.push(vec![
                kk.to_string(),
                s.to_string(),
                ((1.0 - (-1.0f64).exp()) * ratio).to_string(),
                ratio.to_string(),
            ]);
        }
        report.table = Some(table);
    }
    Ok(report)
}

fn fixset(r: usize, k: usize, brute: bool) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("fixset", json!({"r": r, "k": k, "brute": brute}));
    let q = fix_kset_proportion(r, k, DEFAULT_PARTITION_CAP)?;
    report.set_fraction("value", &q);
    if brute {
        let counts = fix_kset_brute_counts(r)?;
        let total: u64 = (1..=r as u64).product();
        let b = ratio(counts[k], total);
        report.set("brute", fraction_json(&b));
        report.checks.push(Check::equal(
            "partition sum equals enumeration of S_r",
            json!(fraction_string(&b)),
            json!(fraction_string(&q)),
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn grammar_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn mode_flags_are_exclusive() {
        assert!(Cli::try_parse_from(["lab", "cheb", "A5"]).is_err());
        assert!(Cli::try_parse_from(["lab", "cheb", "A5", "--exact", "--mc", "10"]).is_err());
        assert!(Cli::try_parse_from(["lab", "cheb", "A5", "--exact"]).is_ok());
        assert!(Cli::try_parse_from(["lab", "series", "--alpha", "x", "--k", "2"]).is_err());
        assert!(Cli::try_parse_from(["lab", "verify", "--suite", "other"]).is_err());
    }

    #[test]
    fn cheb_exact_a5() {
        let cli = Cli::try_parse_from(["lab", "cheb", "A5", "--exact"]).unwrap();
        let r = run(&cli).unwrap();
        assert_eq!(r.results["exact"], "91/22");
        assert_eq!(r.results["descriptors"], 3);
    }

    #[test]
    fn invariants_a5() {
        let cli = Cli::try_parse_from(["lab", "invariants", "A5"]).unwrap();
        let r = run(&cli).unwrap();
        assert_eq!(r.results["l"], 5);
        assert_eq!(r.results["delta"], "1/3");
        assert_eq!(r.results["alpha"], "3/2");
    }

    #[test]
    fn series_and_fixset() {
        let cli = Cli::try_parse_from(["lab", "series", "--alpha", "3/2", "--k", "2"]).unwrap();
        assert_eq!(run(&cli).unwrap().results["exact"], "21/5");
        let cli =
            Cli::try_parse_from(["lab", "fixset", "--r", "4", "--k", "2", "--brute"]).unwrap();
        let r = run(&cli).unwrap();
        assert_eq!(r.results["value"], "5/12");
        assert!(r.all_pass());
    }

    #[test]
    fn e1_exact_needs_a_single_factor() {
        let cli = Cli::try_parse_from(["lab", "e1", "A5^2", "--exact"]).unwrap();
        assert!(matches!(run(&cli), Err(Error::LatticeUnavailable(_))));
    }
}
