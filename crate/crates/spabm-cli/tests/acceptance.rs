//! Acceptance gate: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`; always visible on failure).
//!
//! Run with `cargo test -p spabm-cli --test acceptance`. The heavy grid
//! criteria (6 and 7) dominate the runtime; the whole gate fits the stated
//! budgets on one core.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use spabm::estimator::penalty::{PenaltyParams, PenaltyVariant};
use spabm::estimator::rank_one::rank_one_approx;
use spabm::estimator::{fit, objective};
use spabm::metrics;
use spabm::model_select::select_k;
use spabm::ndarray::{array, Array2};
use spabm::net::{breve_support, lambda_support, probability_from_lambda, AdjacencyMatrix, Clustering, PopularityMatrix};
use spabm::oracle;
use spabm::ssc::elastic_net::solve_self_representation;
use spabm::ssc::{cluster_network, SscConfig};
use spabm::synth::{generate_instance, sample_adjacency, GeneratorConfig};
use tempfile::TempDir;

fn criterion(number: usize, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {number}: {verdict} ({detail})");
    assert!(ok, "criterion {number} failed: {detail}");
}

/// Deterministic uniform draw in `[0, 1)` without an RNG dependency.
fn mix_unit(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*state >> 11) as f64) / ((1u64 << 53) as f64)
}

fn toy_ssc() -> SscConfig<f64> {
    SscConfig {
        gamma1: Some(1.0),
        gamma2: Some(1.0),
        ..SscConfig::default()
    }
}

#[test]
fn criterion_01_rank_one_worked_value() {
    let m: Array2<f64> = array![[0.0, 0.0, 1.0], [1.0, 1.0, 1.0]];
    let started = Instant::now();
    let factor = rank_one_approx(&m.view(), 1e-12, 10_000).unwrap();
    let elapsed = started.elapsed();
    let approx = factor.matrix();
    let expected = 2.0_f64.sqrt() / 4.0;
    let d1 = (approx[[0, 0]] - expected).abs();
    let d2 = (approx[[0, 1]] - expected).abs();
    criterion(
        1,
        d1 < 5e-4 && d2 < 5e-4 && elapsed.as_micros() < 1000,
        &format!(
            "entries {:.6}, {:.6} vs sqrt(2)/4 = {expected:.6}; {} us",
            approx[[0, 0]],
            approx[[0, 1]],
            elapsed.as_micros()
        ),
    );
}

#[test]
fn criterion_02_objective_matches_oracle_everywhere() {
    let started = Instant::now();
    let config = toy_ssc();
    let candidates = oracle::surjective_clusterings(6, 2).unwrap();
    let mut worst = 0.0_f64;
    let mut pipeline_above_min = 0usize;
    let mut samples = 0usize;
    let target = 50usize;
    let mut seed = 0u64;
    while samples < target && seed < 300 {
        seed += 1;
        let mut state = 0xACCE_0002 ^ (seed.wrapping_mul(0x9E37_79B9));
        let instance = generate_instance(&GeneratorConfig {
            n: 6,
            k: 2,
            sigma: 0.3 + 0.7 * mix_unit(&mut state),
            omega: 0.3 + 0.7 * mix_unit(&mut state),
            seed: 1000 + seed,
            sizes: None,
        })
        .unwrap();
        let a = &instance.adjacency;
        // The clustering step can legitimately fail on degenerate tiny
        // graphs; such draws are skipped, not counted.
        let Ok(fitted) = fit(a, 2, seed, &config) else {
            continue;
        };
        samples += 1;
        for variant in [
            PenaltyVariant::Separable,
            PenaltyVariant::NonSeparable,
            PenaltyVariant::Empirical,
        ] {
            let params = PenaltyParams::with_variant(variant);
            let mut minimum = f64::INFINITY;
            for z in &candidates {
                let support = breve_support(&a.entries().view(), z).unwrap();
                let ours = objective(a, z, &support, &params).unwrap();
                let theirs = oracle::oracle_objective(a, z, &support, &params).unwrap();
                worst = worst.max((ours - theirs).abs());
                minimum = minimum.min(theirs);
            }
            let pipeline = objective(a, &fitted.clustering, &fitted.support, &params).unwrap();
            if pipeline >= minimum - 1e-10 {
                pipeline_above_min += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    criterion(
        2,
        samples == target
            && worst < 1e-10
            && pipeline_above_min == target * 3
            && elapsed.as_secs() < 60,
        &format!(
            "max objective gap {worst:.2e} over {samples} networks; pipeline >= exact \
             minimum in {pipeline_above_min}/{} checks; {:.1} s",
            target * 3,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_penalty_variants_sandwich() {
    let mut state = 0xACCE_0003u64;
    let mut held = 0usize;
    let cases = 200usize;
    for _ in 0..cases {
        // Draw n, then K below its ceiling, then community sizes and a
        // nonempty support per cell.
        let n = 8 + (mix_unit(&mut state) * 493.0) as usize;
        let k_cap = ((n as f64) / (n as f64).ln()).sqrt().floor() as usize;
        let k = 1 + (mix_unit(&mut state) * k_cap as f64) as usize;
        let k = k.min(k_cap).max(1);
        let mut sizes = vec![1usize; k];
        for _ in 0..n - k {
            let at = (mix_unit(&mut state) * k as f64) as usize;
            sizes[at.min(k - 1)] += 1;
        }
        let sets: Vec<Vec<Vec<usize>>> = (0..k)
            .map(|kk| {
                (0..k)
                    .map(|_| {
                        let count = 1 + (mix_unit(&mut state) * sizes[kk] as f64) as usize;
                        (0..count.min(sizes[kk])).collect()
                    })
                    .collect()
            })
            .collect();
        let support = spabm::net::SupportFamily::new(sets).unwrap();
        let beta1 = 0.25 + 3.75 * mix_unit(&mut state);
        let beta2 = 0.25 + 3.75 * mix_unit(&mut state);
        let pen = |variant| {
            spabm::estimator::penalty::penalty(
                &sizes,
                &support,
                &PenaltyParams { beta1, beta2, variant },
                0.0,
            )
            .unwrap()
        };
        let s = pen(PenaltyVariant::Separable);
        let ns = pen(PenaltyVariant::NonSeparable);
        let factor = 2.0 + beta1 / beta2;
        if ns < factor * s && factor * s < 2.0 * factor * ns {
            held += 1;
        }
    }
    criterion(3, held == cases, &format!("both strict inequalities held in {held}/{cases} draws"));
}

#[test]
fn criterion_04_selected_support_nests_inside_visible_and_population() {
    let config = SscConfig {
        gamma1: Some(0.1),
        gamma2: Some(0.1),
        ..SscConfig::default()
    };
    let params = PenaltyParams::<f64>::with_variant(PenaltyVariant::Separable);
    let mut checked = 0usize;
    let mut nested = 0usize;
    let mut seed = 0u64;
    while checked < 100 && seed < 1000 {
        seed += 1;
        let mut state = 0xACCE_0004 ^ (seed.wrapping_mul(0x9E37_79B9));
        let instance = generate_instance(&GeneratorConfig {
            n: 5 + (seed % 4) as usize,
            k: 2,
            sigma: 0.2 + 0.8 * mix_unit(&mut state),
            omega: 0.4 + 0.6 * mix_unit(&mut state),
            seed: 4000 + seed,
            sizes: None,
        })
        .unwrap();
        let a = &instance.adjacency;
        let Ok((z_hat, _)) = cluster_network(a, 2, seed, &config) else {
            continue;
        };
        // The exhaustive search enumerates 2^rows per block; it caps the
        // community size, so fits with a community over 4 nodes are
        // skipped, not counted.
        if z_hat.sizes().iter().any(|&s| s > 4) {
            continue;
        }
        let (j_hat, _) = oracle::exact_support_search(a, &z_hat, &params).unwrap();
        let visible = breve_support(&a.entries().view(), &z_hat).unwrap();
        let population = breve_support(&instance.probability.entries().view(), &z_hat).unwrap();
        checked += 1;
        if j_hat.is_subset_of(&visible) && visible.is_subset_of(&population) {
            nested += 1;
        }
    }
    criterion(
        4,
        checked == 100 && nested == 100,
        &format!("inclusion chain held on {nested}/{checked} fitted instances"),
    );
}

#[test]
fn criterion_05_visible_support_recovers_truth_at_strong_signal() {
    // Balanced two-community design whose smallest nonzero probability
    // clears 2K sqrt(ln n) / sqrt(2n): entries in [0.7, 0.95] give products
    // >= 0.49 > 0.4603 at n = 200, K = 2.
    let n = 200usize;
    let k = 2usize;
    let z = Clustering::balanced(n, k).unwrap();
    let floor = 2.0 * (k as f64) * (n as f64).ln().sqrt() / (2.0 * n as f64).sqrt();

    let mut state = 0xACCE_0005u64;
    let mut entries = Array2::zeros((n, k));
    for i in 0..n {
        for l in 0..k {
            // Every tenth within-community position loses its cross column.
            let dropped = l != z.label(i) && (i % 10) == 0;
            if !dropped {
                entries[[i, l]] = 0.7 + 0.25 * mix_unit(&mut state);
            }
        }
    }
    let lambda = PopularityMatrix::new(entries, z.clone()).unwrap();
    let truth = lambda_support(&lambda);
    let probability = probability_from_lambda(&lambda);
    let min_nonzero = probability
        .entries()
        .iter()
        .copied()
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    assert!(min_nonzero >= floor, "{min_nonzero} under the floor {floor}");

    let mut exact = 0usize;
    let reps = 100usize;
    for rep in 0..reps as u64 {
        let a = sample_adjacency(&probability, 5000 + rep).unwrap();
        let visible = breve_support(&a.entries().view(), &z).unwrap();
        if visible == truth {
            exact += 1;
        }
    }
    criterion(
        5,
        exact >= 95,
        &format!("visible support equaled the designed support in {exact}/{reps} draws (min nonzero p {min_nonzero:.3} >= {floor:.3})"),
    );
}

struct CellStats {
    n: usize,
    sigma: f64,
    omega: f64,
    mean_estimation: f64,
    mean_clustering: f64,
}

fn grid_cell(n: usize, sigma: f64, omega: f64, reps: usize, base: u64) -> CellStats {
    let config = SscConfig::default();
    let mut est_acc = 0.0;
    let mut clu_acc = 0.0;
    for rep in 0..reps as u64 {
        let seed = base
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add((n as u64) << 32)
            .wrapping_add(((sigma * 10.0) as u64) << 16)
            .wrapping_add(((omega * 10.0) as u64) << 8)
            .wrapping_add(rep);
        let instance = generate_instance(&GeneratorConfig {
            n,
            k: 4,
            sigma,
            omega,
            seed,
            sizes: None,
        })
        .unwrap();
        let fitted = fit(&instance.adjacency, 4, seed, &config).unwrap();
        let report = metrics::evaluate(
            &fitted.probability.entries().view(),
            &instance.probability.entries().view(),
            &fitted.clustering,
            instance.clustering(),
        )
        .unwrap();
        est_acc += report.estimation_error;
        clu_acc += report.clustering_error;
    }
    CellStats {
        n,
        sigma,
        omega,
        mean_estimation: est_acc / reps as f64,
        mean_clustering: clu_acc / reps as f64,
    }
}

#[test]
fn criterion_06_error_trends_across_the_grid() {
    let started = Instant::now();
    let reps = 20usize;
    let ns = [300usize, 420, 540];
    let sigmas = [0.3, 0.7];
    let omegas = [0.5, 0.8];
    let mut cells = Vec::new();
    for &sigma in &sigmas {
        for &omega in &omegas {
            for &n in &ns {
                cells.push(grid_cell(n, sigma, omega, reps, 66));
            }
        }
    }
    let at = |n: usize, sigma: f64, omega: f64| -> &CellStats {
        cells
            .iter()
            .find(|c| c.n == n && c.sigma == sigma && c.omega == omega)
            .unwrap()
    };

    let mut failures = Vec::new();
    // (a) estimation error strictly decreasing in n per (sigma, omega).
    for &sigma in &sigmas {
        for &omega in &omegas {
            for pair in ns.windows(2) {
                let lo = at(pair[0], sigma, omega).mean_estimation;
                let hi = at(pair[1], sigma, omega).mean_estimation;
                if !(hi < lo) {
                    failures.push(format!(
                        "estimation not decreasing at sigma={sigma} omega={omega}: n={} gives {lo:.5}, n={} gives {hi:.5}",
                        pair[0], pair[1]
                    ));
                }
            }
        }
    }
    // (b) sparser cross-community popularity estimates better at fixed n.
    for &omega in &omegas {
        for &n in &ns {
            let sparse = at(n, 0.3, omega).mean_estimation;
            let dense = at(n, 0.7, omega).mean_estimation;
            if !(sparse < dense) {
                failures.push(format!(
                    "estimation at sigma=0.3 not below sigma=0.7 for n={n} omega={omega}: {sparse:.5} vs {dense:.5}"
                ));
            }
        }
    }
    // (c) with strong cross signal, the denser instance clusters at least
    // as well at the largest size.
    let dense = at(540, 0.7, 0.8).mean_clustering;
    let sparse = at(540, 0.3, 0.8).mean_clustering;
    if !(dense <= sparse) {
        failures.push(format!(
            "clustering at sigma=0.7 above sigma=0.3 at n=540 omega=0.8: {dense:.5} vs {sparse:.5}"
        ));
    }

    let elapsed = started.elapsed().as_secs_f64();
    let budget_ok = elapsed < 1800.0;
    if !budget_ok {
        failures.push(format!("runtime {elapsed:.0} s over the 1800 s budget"));
    }
    criterion(
        6,
        failures.is_empty(),
        &if failures.is_empty() {
            format!("all trends held over {} runs; {elapsed:.0} s", 240)
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_07_community_count_recovered_by_penalized_selection() {
    let started = Instant::now();
    let reps = 50usize;
    let config = SscConfig::default();
    let params = PenaltyParams::<f64>::with_variant(PenaltyVariant::Empirical);
    let mut hits = 0usize;
    let mut ok = 0usize;
    for rep in 0..reps as u64 {
        let instance = generate_instance(&GeneratorConfig {
            n: 360,
            k: 4,
            sigma: 0.6,
            omega: 0.8,
            seed: 7000 + rep,
            sizes: None,
        })
        .unwrap();
        match select_k(&instance.adjacency, 2..=6, &params, 7500 + rep, &config) {
            Ok(result) => {
                ok += 1;
                if result.k_hat == 4 {
                    hits += 1;
                }
            }
            Err(_) => {}
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let frequency = hits as f64 / reps as f64;
    criterion(
        7,
        frequency >= 0.60 && ok == reps && elapsed < 1200.0,
        &format!("chose K=4 in {hits}/{reps} repetitions (frequency {frequency:.2}); {elapsed:.0} s"),
    );
}

#[test]
fn criterion_08_assignment_matching_equals_factorial_search() {
    let started = Instant::now();
    let mut state = 0xACCE_0008u64;
    let pairs = 500usize;
    let mut equal = 0usize;
    for _ in 0..pairs {
        let k = 2 + (mix_unit(&mut state) * 5.0) as usize;
        let n = k + (mix_unit(&mut state) * 40.0) as usize;
        let draw_labels = |state: &mut u64| -> Clustering {
            loop {
                let labels: Vec<usize> =
                    (0..n).map(|_| (mix_unit(state) * k as f64) as usize).collect();
                if let Ok(z) = Clustering::new(labels, k) {
                    return z;
                }
            }
        };
        let est = draw_labels(&mut state);
        let truth = draw_labels(&mut state);
        let (fast, _) = metrics::clustering_error(&est, &truth).unwrap();
        let slow = oracle::exact_permutation_match(&est, &truth).unwrap();
        if fast == slow {
            equal += 1;
        }
    }
    let elapsed = started.elapsed();
    criterion(
        8,
        equal == pairs && elapsed.as_secs() < 10,
        &format!("bitwise agreement on {equal}/{pairs} pairs; {} ms", elapsed.as_millis()),
    );
}

#[test]
fn criterion_09_numerical_kernels_meet_reference_accuracy() {
    // Leading singular value against the dense symmetric eigensolver.
    let mut state = 0xACCE_0009u64;
    let mut worst_sigma = 0.0_f64;
    for _ in 0..100 {
        let m = Array2::from_shape_fn((10, 10), |_| mix_unit(&mut state) * 2.0 - 1.0);
        let factor = rank_one_approx(&m.view(), 1e-12, 20_000).unwrap();
        let gram = m.t().dot(&m);
        let eigenvalues = spabm::eig::sym_eigen(&gram.view()).unwrap().0;
        let reference = eigenvalues[eigenvalues.len() - 1].max(0.0).sqrt();
        worst_sigma = worst_sigma.max((factor.sigma - reference).abs());
    }

    // Elastic-net stationarity rechecked from scratch on the adjacency.
    let mut worst_kkt = 0.0_f64;
    for round in 0..100u64 {
        let mut draw = 0xACCE_0009 ^ round.wrapping_mul(0x9E37_79B9);
        let density = 0.2 + 0.6 * mix_unit(&mut draw);
        let mut a = Array2::zeros((20, 20));
        for i in 1..20 {
            for j in 0..i {
                if mix_unit(&mut draw) < density {
                    a[[i, j]] = 1.0;
                    a[[j, i]] = 1.0;
                }
            }
        }
        let a = AdjacencyMatrix::new(a).unwrap();
        let gamma1 = 0.05 + 1.95 * mix_unit(&mut draw);
        let gamma2 = 0.05 + 1.95 * mix_unit(&mut draw);
        let solved = solve_self_representation(&a, gamma1, gamma2, 1e-7, 10_000).unwrap();
        let e = a.entries();
        for j in 0..20 {
            let w = solved.weights.column(j);
            let residual = e.column(j).to_owned() - e.dot(&w);
            let gradient = e.t().dot(&residual);
            for i in 0..20 {
                if i == j {
                    continue;
                }
                let r = gradient[i] - 2.0 * gamma2 * w[i];
                let violation = if w[i] > 0.0 {
                    (r - gamma1).abs()
                } else if w[i] < 0.0 {
                    (r + gamma1).abs()
                } else {
                    (r.abs() - gamma1).max(0.0)
                };
                worst_kkt = worst_kkt.max(violation);
            }
        }
    }
    criterion(
        9,
        worst_sigma < 1e-8 && worst_kkt <= 1e-6,
        &format!("max sigma gap {worst_sigma:.2e}; max stationarity violation {worst_kkt:.2e}"),
    );
}

fn run_cli(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_spabm"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Directory contents with the timing column of rows.csv masked out.
fn comparable_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let name = e.file_name().into_string().unwrap();
            let bytes = fs::read(e.path()).unwrap();
            if name == "rows.csv" {
                let text = String::from_utf8(bytes).unwrap();
                let stripped: Vec<&str> = text
                    .lines()
                    .map(|l| {
                        if l.starts_with('#') {
                            l
                        } else {
                            l.rsplit_once(',').map(|(rest, _)| rest).unwrap_or(l)
                        }
                    })
                    .collect();
                (name, stripped.join("\n").into_bytes())
            } else {
                (name, bytes)
            }
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn criterion_10_cli_outputs_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    let base = tmp.path();
    let gen = base.join("gen");
    run_cli(&[
        "generate", "--n", "80", "--k", "3", "--sigma", "0.5", "--omega", "0.6",
        "--seed", "31", "--out-dir", gen.to_str().unwrap(),
    ]);
    let adjacency = gen.join("adjacency.txt");
    let labels = gen.join("labels.txt");
    let probability = gen.join("probability.txt");
    let edges = base.join("edges.txt");
    fs::write(&edges, "1 2\n2 3\n3 1\n4 5\n").unwrap();
    let sweep_config = base.join("sweep.toml");
    fs::write(
        &sweep_config,
        "base_seed = 3\nreps = 2\n\n[grid]\nn = [50]\nk = [2]\nsigma = [0.5]\nomega = [0.5]\n\n[ssc]\ngamma1 = 1.0\ngamma2 = 1.0\n",
    )
    .unwrap();

    let mut mismatches = Vec::new();
    let mut compare = |label: &str, args_for: &dyn Fn(&str) -> Vec<String>| {
        let d1 = base.join(format!("{label}-1"));
        let d2 = base.join(format!("{label}-2"));
        for dir in [&d1, &d2] {
            let args = args_for(dir.to_str().unwrap());
            run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>());
        }
        if comparable_outputs(&d1) != comparable_outputs(&d2) {
            mismatches.push(label.to_string());
        }
    };

    compare("generate", &|dir| {
        vec![
            "generate", "--n", "40", "--k", "2", "--sigma", "0.7", "--omega", "0.4",
            "--seed", "8", "--out-dir", dir,
        ]
        .into_iter()
        .map(String::from)
        .collect()
    });
    compare("fit", &|dir| {
        vec![
            "fit", "--adjacency", adjacency.to_str().unwrap(), "--k", "3",
            "--seed", "5", "--truth-labels", labels.to_str().unwrap(),
            "--truth-probability", probability.to_str().unwrap(),
            "--out-dir", dir,
        ]
        .into_iter()
        .map(String::from)
        .collect()
    });
    compare("sweep", &|dir| {
        vec![
            "sweep", "--config", sweep_config.to_str().unwrap(), "--out-dir", dir,
        ]
        .into_iter()
        .map(String::from)
        .collect()
    });
    compare("select-k", &|dir| {
        vec![
            "select-k", "--adjacency", adjacency.to_str().unwrap(),
            "--k-range", "2..=4", "--reps", "2", "--seed", "13",
            "--out-dir", dir,
        ]
        .into_iter()
        .map(String::from)
        .collect()
    });
    compare("ingest", &|dir| {
        vec!["ingest", "--edges", edges.to_str().unwrap(), "--out-dir", dir]
            .into_iter()
            .map(String::from)
            .collect()
    });
    compare("evaluate", &|dir| {
        fs::create_dir_all(dir).unwrap();
        vec![
            "evaluate", "--estimated-labels", labels.to_str().unwrap(),
            "--truth-labels", labels.to_str().unwrap(),
            "--out", &format!("{dir}/report.json"),
        ]
        .into_iter()
        .map(String::from)
        .collect()
    });

    criterion(
        10,
        mismatches.is_empty(),
        &if mismatches.is_empty() {
            "all six commands reproduced byte-identical primary outputs".to_string()
        } else {
            format!("outputs differed for: {}", mismatches.join(", "))
        },
    );
}
