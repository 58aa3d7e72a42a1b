//! Acceptance criteria: one line per criterion, exit status 1 if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use afc_cli::report::Report;
use afc_cli::scenarios::{run_scenario, Config};
use afc_core::calculus::{partition_multiplicity, profile_counts, set_partitions, PartitionProfile};
use afc_core::Field;

struct Outcome {
    ok: bool,
    summary: String,
}

fn scenarios(names: &[&str], cfg: &Config, keep: impl Fn(&str) -> bool) -> Outcome {
    let mut total = 0;
    let mut failures = Vec::new();
    for name in names {
        let r = run_scenario(name, cfg).expect("catalog name");
        for c in r.checks.iter().filter(|c| keep(&c.name)) {
            total += 1;
            if c.verdict != "pass" {
                failures.push(format!("{name}: {} [{}] {}", c.name, c.verdict, c.detail));
            }
        }
    }
    let ok = total > 0 && failures.is_empty();
    let summary = if failures.is_empty() { format!("{total} checks pass") } else { format!("{} of {total} checks not passing: {}", failures.len(), failures.join("; ")) };
    Outcome { ok, summary }
}

fn f2(window: usize) -> Config {
    Config { field: Field::F2, window, ..Config::default() }
}

fn criterion_1() -> Outcome {
    let out = scenarios(&["appendix-a"], &Config::default(), |_| true);
    let fields_ok = {
        let r = run_scenario("appendix-a", &Config::default()).unwrap();
        r.checks.len() >= 20 && r.checks.iter().any(|c| c.name.contains("over fp:2")) && r.checks.iter().any(|c| c.name.contains("over q"))
    };
    Outcome { ok: out.ok && fields_ok, summary: out.summary }
}

fn criterion_2() -> Outcome {
    scenarios(&["cross-effects"], &f2(6), |name| !name.starts_with("normal form"))
}

fn criterion_3() -> Outcome {
    scenarios(&["p0-model", "pn-degree"], &f2(6), |name| {
        name.starts_with("C_1 resolution") || name.starts_with("P_0 model") || name.contains("(A+X) is A+X") || name.starts_with("p_1 on Id") || name.starts_with("C_2 P_1")
    })
}

fn criterion_4() -> Outcome {
    scenarios(&["nabla-defs-agree"], &f2(6), |name| name.starts_with("sum definition"))
}

fn criterion_5() -> Outcome {
    scenarios(&["cdc-suite"], &f2(6), |_| true)
}

fn criterion_6() -> Outcome {
    let homological = scenarios(&["faa-di-bruno"], &Config { max_n: 3, ..f2(6) }, |name| name.starts_with("Delta_2 F = sum") || name.starts_with("Delta_3 F = sum"));
    // brute force: classify every set partition by its block sizes
    let mut combinatorial = true;
    for n in 1..=7 {
        let mut seen = std::collections::BTreeMap::<PartitionProfile, u128>::new();
        for p in set_partitions(n) {
            *seen.entry(PartitionProfile::of(&p)).or_default() += 1;
        }
        combinatorial &= seen == profile_counts(n) && seen.iter().all(|(p, &c)| partition_multiplicity(p) == c);
    }
    Outcome { ok: homological.ok && combinatorial, summary: format!("{}; multiplicities {}", homological.summary, if combinatorial { "match for n <= 7" } else { "differ" }) }
}

fn criterion_7() -> Outcome {
    scenarios(&["higher-chain-rule"], &Config { max_n: 2, max_dim: 1, ..f2(5) }, |_| true)
}

fn criterion_8() -> Outcome {
    scenarios(&["prolongation-equivalence"], &f2(6), |_| true)
}

fn criterion_9() -> Outcome {
    scenarios(&["kleisli-laws"], &f2(6), |name| name.contains("unit") || name.contains("contractible"))
}

fn criterion_10() -> Outcome {
    let run = |name: &str| Command::new(env!("CARGO_BIN_EXE_afc")).args(["--scenario", name, "--out", "json", "--window", "4", "--seed", "7"]).output().expect("binary runs").stdout;
    let names = ["cross-effects", "cdc-suite", "faa-di-bruno", "appendix-a", "kleisli-laws", "tangent-functoriality"];
    let differing: Vec<&str> = names.iter().copied().filter(|n| run(n) != run(n)).collect();
    let parsed = serde_json::from_slice::<Report>(&run("appendix-a")).is_ok();
    Outcome {
        ok: differing.is_empty() && parsed,
        summary: if differing.is_empty() { format!("{} scenarios byte-identical on rerun", names.len()) } else { format!("reports differ: {}", differing.join(", ")) },
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("appendix A exact suite", criterion_1, 10),
        ("cross-effect algebra", criterion_2, 10),
        ("P_n suite", criterion_3, 60),
        ("nabla definition agreement", criterion_4, 60),
        ("cartesian differential suite", criterion_5, 120),
        ("Faa di Bruno", criterion_6, 300),
        ("higher-order chain rule", criterion_7, 300),
        ("prolongation equivalence", criterion_8, 120),
        ("Kleisli laws", criterion_9, 30),
        ("determinism", criterion_10, 600),
    ];
    let mut failed = 0;
    for (i, (label, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let ok = out.ok && in_time;
        failed += usize::from(!ok);
        let timing = format!("{:.2}s of {limit}s", elapsed.as_secs_f64());
        println!("criterion {:>2} {}: {label} ({timing}) {}{}", i + 1, if ok { "PASS" } else { "FAIL" }, out.summary, if in_time { "" } else { "; over the time limit" });
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
