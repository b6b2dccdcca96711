//! Acceptance criteria 1-8, one PASS/FAIL line each.
//!
//! Criteria in `KNOWN_FAIL` are implemented as stated and expected to fail;
//! the analysis lives in the decisions ledger. Any other failure makes this
//! target exit non-zero.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use maskstl::apps::{generate_dataset, grid_eval, linspace, mine_interval, mining_objective, plan_trajectory};
use maskstl::apps::{DatasetGen, MiningConfig, PlannerConfig};
use maskstl::autodiff::{check_formula_gradient, GradCheck};
use maskstl::formula::{parse, Formula};
use maskstl::recurrent::trace_recurrent;
use maskstl::reference::trace_ref;
use maskstl::smoothing::{reduce, Extremum};
use maskstl::testing::{describe, random_signals, FormulaGen};
use maskstl::{robustness_trace, Mode, NamedSignals, PaddingPolicy, SemanticsConfig};
use maskstl_cli::bench::{self, BenchConfig, Engine, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria expected to fail; see the ledger for why.
const KNOWN_FAIL: &[u32] = &[1, 7];

/// Id, name, time limit, check.
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn criterion_1() -> Outcome {
    let sig = NamedSignals::single("s", &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
    let f = parse("F[1,3] (s > 0)").unwrap();
    let last = robustness_trace(&f, &sig, &SemanticsConfig::hard()).unwrap();
    let want_last = [3.0, 4.0, 5.0, 6.0, 7.0, 7.0, 7.0, 7.0];
    let cfg = SemanticsConfig::hard().with_padding(PaddingPolicy::Constant(-1e5));
    let constant = robustness_trace(&f, &sig, &cfg).unwrap();
    let want_const = [3.0, 4.0, 5.0, 6.0, 7.0, -1e5, -1e5, -1e5];
    let ok_last = last.values() == want_last;
    let ok_const = constant.values() == want_const;
    outcome(
        ok_last && ok_const,
        format!(
            "last-value {:?} ({}); constant -1e5 {:?} vs expected {:?} ({})",
            last.values(),
            if ok_last { "match" } else { "MISMATCH" },
            constant.values(),
            want_const,
            if ok_const { "match" } else { "MISMATCH" },
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for lse in [false, true] {
        for _ in 0..1000 {
            let len = rng.random_range(1..=40);
            let f = FormulaGen::new(3, len, &["x", "y"]).formula(&mut rng);
            let sig = random_signals(&mut rng, &["x", "y"], len, -2.0, 2.0);
            let mode = if lse {
                Mode::LogSumExp {
                    temperature: rng.random_range(0.5..10.0),
                }
            } else {
                Mode::Hard
            };
            let padding = if rng.random_bool(0.5) {
                PaddingPolicy::LastValue
            } else {
                PaddingPolicy::Constant(rng.random_range(-3.0..3.0))
            };
            let cfg = SemanticsConfig::hard().with_mode(mode).with_padding(padding);
            let want = trace_ref(&f, &sig, &cfg).unwrap();
            for got in [
                robustness_trace(&f, &sig, &cfg).unwrap(),
                trace_recurrent(&f, &sig, &cfg).unwrap(),
            ] {
                if !close(got.values(), want.values(), 1e-9) {
                    return outcome(false, format!("mismatch on {} ({mode:?})", describe(&f, &sig)));
                }
                for (g, w) in got.values().iter().zip(want.values()) {
                    worst = worst.max((g - w).abs());
                }
            }
            cases += 1;
        }
    }
    outcome(
        true,
        format!("{cases} cases (1000 hard, 1000 lse), max abs deviation {worst:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    // witness: an untimed Eventually over a fixed random signal
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sig = random_signals(&mut rng, &["x"], 16, -1.0, 1.0);
    let f = Formula::eventually(None, Formula::gt("x", 0.0));
    let cfg = SemanticsConfig::hard().with_mode(Mode::SoftMax { temperature: 1.0 });
    let rec = trace_recurrent(&f, &sig, &cfg).unwrap()[0];
    let mask = robustness_trace(&f, &sig, &cfg).unwrap()[0];
    let gap = (rec - mask).abs();

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: f64 = rng.random_range(-3.0..3.0);
        let mode = Mode::LogSumExp {
            temperature: rng.random_range(0.5..10.0),
        };
        let which = if rng.random_bool(0.5) {
            Extremum::Max
        } else {
            Extremum::Min
        };
        let inner = reduce(&x, None, which, mode).unwrap();
        let nested = reduce(&[inner, y], None, which, mode).unwrap();
        let mut all = x.clone();
        all.push(y);
        let flat = reduce(&all, None, which, mode).unwrap();
        worst = worst.max((nested - flat).abs());
    }
    outcome(
        gap > 1e-3 && worst <= 1e-12,
        format!(
            "F (x > 0), seed 3, L=16, softmax tau=1: recurrent {rec:.6} vs masking {mask:.6} (gap {gap:.3e}); \
             lse nesting max deviation {worst:.2e} over 1000 nestings"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checked, mut with_interval, mut worst) = (0, 0, 0.0f64);
    while checked < 100 {
        let len = rng.random_range(2..=15);
        let mut g = FormulaGen::new(2, len, &["x", "y"]);
        g.smooth = true;
        let f = g.formula(&mut rng);
        let sig = random_signals(&mut rng, &["x", "y"], len, -2.0, 2.0);
        let temperature = [1.0, 5.0, 20.0][rng.random_range(0..3)];
        let mode = if rng.random_bool(0.5) {
            Mode::LogSumExp { temperature }
        } else {
            Mode::SoftMax { temperature }
        };
        let cfg = SemanticsConfig::hard().with_mode(mode);
        match check_formula_gradient(&f, &sig, &cfg, 1e-5) {
            Ok(GradCheck::Checked(err)) => {
                worst = worst.max(err);
                checked += 1;
                with_interval += usize::from(!f.smooth_intervals().is_empty());
            }
            Ok(GradCheck::SkippedAtKink) => {
                return outcome(false, format!("kink in smooth case {}", describe(&f, &sig)))
            }
            Err(maskstl::Error::EmptyWindow) => {}
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    outcome(
        worst < 1e-5 && with_interval > 0,
        format!("{checked} cases, {with_interval} with d/da, d/db, d/dc; max relative error {worst:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let cfg = MiningConfig::default();
    let gen = DatasetGen::default();
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..20u64 {
        let data = generate_dataset(&gen, seed).unwrap();
        let r = match mine_interval(&data, &cfg) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        if (r.a - gen.truth.0).abs() <= 0.05 && (r.b - gen.truth.1).abs() <= 0.05 {
            hits += 1;
        } else {
            misses.push(format!("seed {seed} -> ({:.3}, {:.3})", r.a, r.b));
        }
    }
    outcome(
        hits >= 18,
        format!("{hits}/20 seeds within 0.05 of (0.23, 0.59) {misses:?}"),
    )
}

fn criterion_6() -> Outcome {
    let cfg = PlannerConfig::default();
    let mut hits = 0;
    let mut lines = Vec::new();
    for seed in 0..10u64 {
        match plan_trajectory(&cfg, seed) {
            Ok(r) => {
                let ok = r.hard_robustness >= 0.0 && r.b - r.a >= cfg.nominal;
                hits += usize::from(ok);
                if !ok {
                    lines.push(format!(
                        "seed {seed}: rho {:.4}, b-a {:.3}",
                        r.hard_robustness,
                        r.b - r.a
                    ));
                }
            }
            Err(e) => lines.push(format!("seed {seed}: {e}")),
        }
    }
    outcome(
        hits >= 8,
        format!("{hits}/10 seeds with hard rho >= 0 and b-a >= 0.2 {lines:?}"),
    )
}

fn criterion_7() -> Outcome {
    let cfg = BenchConfig {
        sizes: vec![512],
        gradients: false,
        ..BenchConfig::default()
    };
    let report = match bench::run(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=6 {
        let m = report.median(k, Engine::Masking, Task::Value, 512).unwrap();
        let r = report.median(k, Engine::Recurrent, Task::Value, 512).unwrap();
        let faster = m < r;
        if k != 3 {
            pass &= faster;
        }
        parts.push(format!(
            "phi{k} {:+.0}%{}",
            (m / r - 1.0) * 100.0,
            if k == 3 {
                " (no direction asserted)"
            } else if faster {
                ""
            } else {
                " SLOWER"
            }
        ));
    }
    outcome(
        pass,
        format!("L=512, batch 8, masking vs recurrent median: {}", parts.join(", ")),
    )
}

fn criterion_8() -> Outcome {
    let data = generate_dataset(&DatasetGen::default(), 0).unwrap();
    let sem = SemanticsConfig::hard().with_mode(Mode::LogSumExp { temperature: 50.0 });
    let grid = linspace(0.0, 1.0, 300);
    let mut errors = 0;
    let cells = grid_eval(&grid, &grid, |a, b| {
        mining_objective(a, b, 50.0, &data, 0.15, &sem).unwrap_or_else(|_| {
            errors += 1;
            f64::NAN
        })
    });
    let valid: Vec<f64> = cells.iter().flatten().flatten().copied().collect();
    let finite = valid.iter().all(|v| v.is_finite());
    outcome(
        errors == 0 && finite && valid.len() == 300 * 299 / 2,
        format!("{} valid cells, all finite: {finite}", valid.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "Example 1 regression", Duration::from_secs(1), criterion_1),
        (2, "oracle equivalence", Duration::from_secs(120), criterion_2),
        (
            3,
            "softmax nesting witness and lse identity",
            Duration::from_secs(30),
            criterion_3,
        ),
        (4, "gradient correctness", Duration::from_secs(120), criterion_4),
        (5, "mining reproduction", Duration::from_secs(300), criterion_5),
        (6, "planning reproduction", Duration::from_secs(300), criterion_6),
        (7, "performance direction", Duration::from_secs(600), criterion_7),
        (8, "grid feasibility", Duration::from_secs(60), criterion_8),
    ];
    let mut unexpected = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = out.pass && in_time;
        let known = KNOWN_FAIL.contains(&id);
        let status = match (pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as known failure)",
            (false, true) => "FAIL (known, see ledger)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        let time = format!(
            "{:.2}s of {}s{}",
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { " OVER LIMIT" }
        );
        println!("criterion {id} [{name}]: {status} ({time}) {}", out.detail);
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
