//! Acceptance gate: one pass/fail line per criterion.
//!
//! Each criterion is decided by named checks of the verification suites,
//! run once at their default scale and seed. Two checks are known to fail
//! for mathematical reasons (see README, "Known deviations"); they print
//! FAIL but do not abort the run. Every other check must pass.

use std::collections::BTreeMap;
use std::time::Instant;

use planar_walk::experiments::{run_suite, SuiteConfig, SuiteReport};

/// `(suite, check)` pairs that are expected to stay red.
const KNOWN_RED: [(&str, &str); 2] = [("3.8", "lclt_error_decreasing"), ("5.1", "sup_slope")];

struct Criterion {
    id: u32,
    title: &'static str,
    checks: &'static [(&'static str, &'static str)],
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: 1,
        title: "Dirichlet oracle equivalence (2 <= l,n <= 64, 20 data each, <= 1e-9, <= 2 min)",
        checks: &[("6.2", "oracle_agreement"), ("6.2", "oracle_sweep_time")],
    },
    Criterion {
        id: 2,
        title: "single-point exactness (R(2,2) = 1/4, strip n=2 = 1/(2+sqrt 3))",
        checks: &[
            ("6.2", "single_point_quarter"),
            ("6.3", "single_point_exact"),
        ],
    },
    Criterion {
        id: 3,
        title: "decay-rate bounds for n <= 10^4, residual <= 1e-13",
        checks: &[("6.1", "bounds_hold"), ("6.1", "root_residual")],
    },
    Criterion {
        id: 4,
        title: "LCLT accuracy and exact pmf validation",
        checks: &[
            ("3.8", "pmf_1d_binomial"),
            ("3.8", "pmf_2d_enumeration"),
            ("3.8", "lclt_error_at_100"),
            ("3.8", "lclt_error_decreasing"),
        ],
    },
    Criterion {
        id: 5,
        title: "tail constants stable within 20%, mean-square identities",
        checks: &[
            ("3.9", "constant_stable_doubled"),
            ("3.9", "constant_stable_same"),
            ("3.10", "constant_stable_doubled"),
            ("3.10", "constant_stable_same"),
            ("3.1", "walk_exact"),
            ("3.1", "walk_mc"),
            ("3.1", "bm_mc"),
        ],
    },
    Criterion {
        id: 6,
        title: "Brownian endpoint tails at 3 sigma, reflection bracket",
        checks: &[
            ("3.3", "endpoint_exact"),
            ("3.2", "walk_bracket"),
            ("3.2", "bm_bracket"),
        ],
    },
    Criterion {
        id: 7,
        title: "small-ball regression slope < 0, R^2 >= 0.95",
        checks: &[("3.4", "exponential_decay")],
    },
    Criterion {
        id: 8,
        title: "slit-disk closed form vs MC, exact exponent 0.5 +/- 0.01",
        checks: &[
            ("4.3", "slit_mc_matches_exact"),
            ("4.3", "exact_exponent_half"),
        ],
    },
    Criterion {
        id: 9,
        title: "discrete half-line exponent in [0.4, 0.6], <= 10 min",
        checks: &[("4.4", "exponent_near_half")],
    },
    Criterion {
        id: 10,
        title: "coupling: walk law, E[T] = 1, sup slope, tail curves",
        checks: &[
            ("5.1", "embedded_walk_is_srw"),
            ("5.2", "embedded_walk_is_srw"),
            ("5.1", "mean_exit_time_one"),
            ("5.1", "sup_slope"),
            ("5.1", "tail_curve_decreasing"),
            ("5.1", "tail_curve_log_linear"),
        ],
    },
];

fn cli_bytes(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = planar_walk_cli::run(args.iter().copied(), &mut out, &mut err);
    (code, out)
}

#[test]
fn acceptance() {
    let cfg = SuiteConfig::default();
    let mut reports: BTreeMap<&str, (SuiteReport, f64)> = BTreeMap::new();
    for c in &CRITERIA {
        for (suite, _) in c.checks {
            if !reports.contains_key(suite) {
                let t = Instant::now();
                let r = run_suite(suite, &cfg).expect("suite runs");
                reports.insert(suite, (r, t.elapsed().as_secs_f64()));
            }
        }
    }

    let mut unexpected = Vec::new();
    for c in &CRITERIA {
        let mut pass = true;
        let mut notes = Vec::new();
        for &(suite, name) in c.checks {
            let (rep, _) = &reports[suite];
            let check = rep
                .check(name)
                .unwrap_or_else(|| panic!("suite {suite} has no check {name}"));
            if !check.pass {
                pass = false;
                notes.push(format!("{suite}/{name}: {}", check.detail));
                if !KNOWN_RED.contains(&(suite, name)) {
                    unexpected.push(format!("criterion {}: {suite}/{name}", c.id));
                }
            }
        }
        if c.id == 9 {
            let secs = reports["4.4"].1;
            if secs > 600.0 {
                pass = false;
                notes.push(format!("runtime {secs:.0} s"));
                unexpected.push("criterion 9: runtime".into());
            }
        }
        let status = if pass { "PASS" } else { "FAIL" };
        let suffix = if notes.is_empty() {
            String::new()
        } else {
            format!(" [{}]", notes.join("; "))
        };
        println!("criterion {:>2} {status} {}{suffix}", c.id, c.title);
    }

    // Determinism: documented invocations rerun byte for byte.
    let runs: [&[&str]; 2] = [
        &["check", "--lemma", "6.2", "--seed", "7"],
        &["check", "--lemma", "4.4", "--seed", "7", "--threads", "1"],
    ];
    let mut same = true;
    for args in runs {
        let (c1, a) = cli_bytes(args);
        let (c2, b) = cli_bytes(args);
        same &= c1 == c2 && a == b && !a.is_empty();
    }
    let (_, threaded) = cli_bytes(&["check", "--lemma", "4.4", "--seed", "7"]);
    let (_, single) = cli_bytes(&["check", "--lemma", "4.4", "--seed", "7", "--threads", "1"]);
    same &= threaded == single;
    println!(
        "criterion 11 {} byte-identical CSV on rerun and across thread counts",
        if same { "PASS" } else { "FAIL" }
    );
    if !same {
        unexpected.push("criterion 11".into());
    }

    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:?}");
}
