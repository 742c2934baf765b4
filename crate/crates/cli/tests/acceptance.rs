//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criterion 4 is a known red: the fitted exponent of `||rho_t||_2` over
//! `t in [10, 100]` is `-(n/2) t/(t + 2 nu)` on average for a state with
//! symplectic eigenvalue `nu`, which misses `-n/2` by more than 0.02 for
//! most of the flow corpus. Its bounds are still required to hold, and the
//! process exits nonzero only on unexpected failures.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use qdiff::fock::{
    amplitude, displaced_thermal_fock, displaced_thermal_log, relative_entropy_with_log,
    spectral_entropy, spectral_overlap, spectral_purity, DEFAULT_DIM,
};
use qdiff::functionals::{
    dirichlet_form, entropy, entropy_power, fisher_j, hs_overlap, purity, relative_entropy,
};
use qdiff::grid::{grid_dirichlet, grid_purity, GridConfig, GridState};
use qdiff::semigroup::evolve_gaussian;
use qdiff::verify::{self, Corpus, Record, Status, TheoremId, VerificationReport};
use qdiff::{GaussianState, RunConfig};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn qdiff() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qdiff"))
}

fn relative_margin_ok(r: &Record, tol: f64) -> bool {
    r.margin >= -tol * r.lhs.abs().max(r.rhs.abs()).max(1.0)
}

fn report(theorem: TheoremId) -> VerificationReport {
    verify::run(theorem, &RunConfig::default()).expect("verifier runs")
}

fn oracle_equivalence() -> Outcome {
    let (o, elapsed) = timed(|| {
        let mut corpus = Corpus::new(1, TheoremId::Nash);
        let mut cases = Vec::new();
        for k in 0..50 {
            let nu = match k % 3 {
                0 => 0.5,
                1 => corpus.uniform(0.6, 3.0),
                _ => corpus.uniform(0.5005, 3.0),
            };
            let (q, p) = if k % 5 == 0 {
                (0.0, 0.0)
            } else {
                (corpus.uniform(-2.0, 2.0), corpus.uniform(-2.0, 2.0))
            };
            cases.push((
                nu,
                amplitude(q, p),
                GaussianState::thermal(1, nu).displace(&[q, p]).unwrap(),
            ));
        }
        let focks: Vec<_> = cases
            .iter()
            .map(|(nu, a, _)| displaced_thermal_fock(*nu, *a, DEFAULT_DIM).unwrap())
            .collect();
        let (mut e_s, mut e_u, mut e_o, mut e_d) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for (i, (_, _, st)) in cases.iter().enumerate() {
            e_s = e_s.max((entropy(st).unwrap() - spectral_entropy(&focks[i])).abs());
            e_u = e_u.max((purity(st).unwrap() - spectral_purity(&focks[i])).abs());
            let mut j = (i + 1) % cases.len();
            while cases[j].0 <= 0.5 {
                j = (j + 1) % cases.len();
            }
            let other = &cases[j].2;
            let ov = spectral_overlap(&focks[i], &focks[j]).unwrap();
            e_o = e_o.max((hs_overlap(st, other).unwrap() - ov).abs());
            let log_b = displaced_thermal_log(cases[j].0, cases[j].1, DEFAULT_DIM).unwrap();
            let d = relative_entropy_with_log(&focks[i], &log_b).unwrap();
            e_d = e_d.max((relative_entropy(st, other).unwrap() - d).abs());
        }
        outcome(
            e_s < 1e-8 && e_d < 1e-8 && e_u < 1e-10 && e_o < 1e-10,
            format!("max errors: entropy {e_s:.1e}, relative entropy {e_d:.1e}, purity {e_u:.1e}, overlap {e_o:.1e}"),
        )
    });
    outcome(
        o.passed && elapsed < Duration::from_secs(30),
        format!("{}; {:.1} s", o.detail, elapsed.as_secs_f64()),
    )
}

fn debruijn(rep: &VerificationReport, elapsed: Duration) -> Outcome {
    let recs: Vec<_> = rep.records_of("debruijn").collect();
    let worst = recs.iter().map(|r| r.lhs).fold(0.0, f64::max);
    outcome(
        recs.len() >= 600 && worst < 1e-6 && elapsed < Duration::from_secs(10),
        format!(
            "{} records, worst |4 dS/dt - J|/J = {worst:.1e}; {:.1} s",
            recs.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn fisher(rep: &VerificationReport) -> Outcome {
    let recs: Vec<_> = rep.records_of("fisher_consistency").collect();
    let worst = recs.iter().map(|r| r.lhs).fold(0.0, f64::max);
    outcome(
        recs.len() == 100 && worst < 1e-6,
        format!("{} states, worst relative error {worst:.1e}", recs.len()),
    )
}

/// `(outcome, known_red)`.
fn ultracontractivity() -> (Outcome, bool) {
    let rep = report(TheoremId::Ultra);
    let bounds_hold = ["norm_bound", "entropy_bound"]
        .iter()
        .all(|c| rep.records_of(c).all(|r| r.status != Status::Fail));
    let slopes: Vec<_> = rep.records_of("slope").collect();
    let bad = slopes.iter().filter(|r| r.status == Status::Fail).count();
    let ns: Vec<_> = (1..=3)
        .map(|n| {
            rep.summary
                .extras
                .get(&format!("max_slope_deviation_n{n}"))
                .copied()
                .unwrap_or(f64::NAN)
        })
        .collect();
    let detail = format!(
        "bounds {}; slope off by more than 0.02 in {bad}/{} states (max deviation n1 {:.3}, n2 {:.3}, n3 {:.3})",
        if bounds_hold { "hold" } else { "VIOLATED" },
        slopes.len(),
        ns[0],
        ns[1],
        ns[2]
    );
    (
        outcome(bounds_hold && bad == 0, detail),
        bounds_hold && bad > 0,
    )
}

fn nash() -> Outcome {
    let rep = report(TheoremId::Nash);
    let gauss = rep.records_of("nash").count();
    let grid = rep.records_of("nash_grid").count();
    let worst = rep
        .records
        .iter()
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);
    let sup = (1..=3)
        .filter_map(|n| rep.summary.extras.get(&format!("sup_ratio_n{n}")).copied())
        .fold(f64::INFINITY, f64::min);
    let dir = tempfile::tempdir().unwrap();
    let status = qdiff()
        .args([
            "verify",
            "nash",
            "--nash-constant",
            &(0.5 * sup).to_string(),
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    outcome(
        gauss >= 500 && grid == 50 && worst >= -1e-9 && status.code() == Some(4),
        format!(
            "{gauss} Gaussian + {grid} grid records, worst margin {worst:.2e}; control C = {:.3} exits {:?}",
            0.5 * sup,
            status.code()
        ),
    )
}

fn logsob_isoperimetric() -> Outcome {
    let ls = report(TheoremId::Logsob);
    let iso = report(TheoremId::Isoperimetric);
    let worst = ls
        .records
        .iter()
        .chain(&iso.records)
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);
    let th = GaussianState::thermal(1, 1.5);
    let je = fisher_j(&th).unwrap() * entropy_power(&th).unwrap();
    let sentinel = (je - 8.0 * 2f64.ln()).abs() < 1e-9 && je > 2.0 * std::f64::consts::E;
    outcome(
        worst >= -1e-9 && sentinel,
        format!(
            "{} + {} records, worst margin {worst:.2e}; sentinel J E = {je:.10} vs 2e = {:.10}",
            ls.records.len(),
            iso.records.len(),
            2.0 * std::f64::consts::E
        ),
    )
}

fn blachman_stam() -> Outcome {
    let rep = report(TheoremId::BlachmanStam);
    let bs: Vec<_> = rep.records_of("blachman_stam").collect();
    let mono: Vec<_> = rep.records_of("monotone").collect();
    let bs_ok = bs.iter().all(|r| relative_margin_ok(r, 1e-9));
    let mono_ok = mono.iter().all(|r| r.margin >= -1e-12 * r.rhs.abs());
    outcome(
        bs.len() == 20 * 49 * 3 && bs_ok && mono_ok,
        format!(
            "{} sweep records, {} monotonicity records; closest approach {:.6}",
            bs.len(),
            mono.len(),
            rep.summary.extras["closest_approach_ratio"]
        ),
    )
}

fn concavity() -> Outcome {
    let rep = report(TheoremId::Concavity);
    let d2 = rep
        .records_of("second_difference")
        .map(|r| r.lhs)
        .fold(f64::NEG_INFINITY, f64::max);
    let asym: Vec<_> = rep.records_of("asymptote").collect();
    let dev = asym.iter().map(|r| r.lhs).fold(0.0, f64::max);
    outcome(
        asym.len() == 50 && d2 <= 1e-8 && dev < 0.01,
        format!(
            "{} states, max second difference {d2:.2e}, max |dE/dt - e/2| {dev:.2e}",
            asym.len()
        ),
    )
}

fn grid_equivalence() -> Outcome {
    let cfg = GridConfig::new(12.0, 256).unwrap();
    let mut corpus = Corpus::new(3, TheoremId::PurityDecay);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let nu = corpus.uniform(0.5, 2.0);
        let (q, p) = (corpus.uniform(-2.0, 2.0), corpus.uniform(-2.0, 2.0));
        let st = GaussianState::thermal(1, nu).displace(&[q, p]).unwrap();
        let g = GridState::from_gaussian(&st, cfg).unwrap();
        let t = corpus.uniform(0.0, 3.0);
        let (ge, ce) = (g.evolve(t).unwrap(), evolve_gaussian(&st, t).unwrap());
        for (a, b) in [
            (grid_purity(&g).unwrap(), purity(&st).unwrap()),
            (grid_dirichlet(&g).unwrap(), dirichlet_form(&st).unwrap()),
            (grid_purity(&ge).unwrap(), purity(&ce).unwrap()),
            (grid_dirichlet(&ge).unwrap(), dirichlet_form(&ce).unwrap()),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    let r2 = std::f64::consts::SQRT_2;
    let cat = GridState::from_gaussian_mixture(
        &[
            (0.5, GaussianState::coherent(r2, 0.0)),
            (0.5, GaussianState::coherent(-r2, 0.0)),
        ],
        cfg,
    )
    .unwrap();
    let cat_err = (grid_purity(&cat).unwrap() - 0.5 * (1.0 + (-4.0f64).exp())).abs();
    let rep = report(TheoremId::PurityDecay);
    let rate: Vec<_> = rep.records_of("rate_identity_grid").collect();
    let rate_worst = rate.iter().map(|r| r.lhs).fold(0.0, f64::max);
    outcome(
        worst < 1e-7 && cat_err < 1e-6 && !rate.is_empty() && rate_worst < 1e-5,
        format!(
            "closed-form error {worst:.1e}, cat purity error {cat_err:.1e}, {} grid rate checks worst {rate_worst:.1e}",
            rate.len()
        ),
    )
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let status = qdiff()
                .args(["verify", "all", "--seed", "42", "--out"])
                .arg(dir.path())
                .output()
                .unwrap()
                .status;
            (status.success(), read_dir_bytes(dir.path()))
        })
        .collect();
    let same = runs[0].1 == runs[1].1;
    outcome(
        runs.iter().all(|r| r.0) && same && runs[0].1.len() == 18,
        format!("{} files per run, identical: {same}", runs[0].1.len()),
    )
}

fn main() {
    let mut unexpected = Vec::new();
    let mut line = |id: usize, name: &str, o: Outcome, known_red: bool| {
        let tag = match (o.passed, known_red) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {name:<32} {tag:<12} {}", o.detail);
        if !o.passed && !known_red {
            unexpected.push(id);
        }
    };

    line(1, "oracle equivalence", oracle_equivalence(), false);
    let start = Instant::now();
    let db = report(TheoremId::Debruijn);
    let elapsed = start.elapsed();
    line(2, "de Bruijn identity", debruijn(&db, elapsed), false);
    line(3, "Fisher consistency", fisher(&db), false);
    let (ultra, known) = ultracontractivity();
    line(4, "ultracontractivity exponent", ultra, known);
    line(5, "Nash inequality", nash(), false);
    line(
        6,
        "log-Sobolev and isoperimetric",
        logsob_isoperimetric(),
        false,
    );
    line(7, "Blachman-Stam", blachman_stam(), false);
    line(8, "entropy-power concavity", concavity(), false);
    line(
        9,
        "grid / closed-form equivalence",
        grid_equivalence(),
        false,
    );
    line(10, "determinism", determinism(), false);

    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
