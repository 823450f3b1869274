//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use crlscore::aggregate::{
    aggregate_runs, build_scorecard, load_card_config, load_values, origami_area, origami_max_area, radar_area,
    resolve_models, AggregateMode, CardConfig, ScoreCard, StdConvention,
};
use crlscore::generation::{fid, inception_score, iou, kid, EmbeddingSet, ProbTable};
use crlscore::graph::{d_separated, find_confounders, junction_census};
use crlscore::independence::{audit_graph_against_data, chi2_independence, Expectation};
use crlscore::model::{load_graph, load_run_log, RunLog, RunRecord};
use crlscore::representation::{
    disentanglement_suite, hungarian_match, permutation_sweep, AssociationMatrix, DisentanglementScores, SuiteConfig,
};
use crlscore::scm::{load_scm, LogitRow, Mechanism, Noise, Nonlinearity, Scm};
use crlscore::svg::{emit_svg, model_polygons, shoelace_area, PlotKind, PlotSpec};
use crlscore::{BinaryMask, CausalGraph, DataTable, VariableSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CARD_TOL: f64 = 0.002;
const MAX_AREA_TOL: f64 = 0.001;
const ORDER_TOL: f64 = 1e-12;
const RADAR_CHANGE: f64 = 1e-9;
const CALIBRATION_BAND: (f64, f64) = (0.03, 0.07);
const ALPHA: f64 = 0.05;
const COUNTERFACTUAL_TOL: f64 = 1e-12;
const HUNGARIAN_TOL: f64 = 1e-12;
const SHOELACE_TOL: f64 = 1e-6;
const RUN_TOL: f64 = 5e-4;
const AUDIT_MAX_VIOLATION: f64 = 0.10;
const CONFOUNDER_DETECTION: f64 = 0.95;
const SUITE_N: usize = 10_000;
const ORDERING_N: usize = 2_000;
const ORDERING_SEEDS: u64 = 10;
const IDENTITY_MIC_FLOOR: f64 = 0.95;
const IDENTITY_FLOOR: f64 = 0.9;
const NOISE_CEILING: f64 = 0.25;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    check((got - want).abs() <= tol, format!("{label}: got {got:.6}, want {want} ± {tol}"))
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f()?;
    let took = start.elapsed();
    if let Some(limit) = limit {
        check(took < limit, format!("took {took:.2?}, limit {limit:?}"))?;
    }
    Ok(format!("{out} [{took:.2?}]"))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn benchmark_card(config: &CardConfig) -> Result<ScoreCard, String> {
    let values = load_values(fixture("benchmark.csv")).map_err(err)?;
    let models = resolve_models(config, &fixture(""), Some(&values)).map_err(err)?;
    build_scorecard(config, &models).map_err(err)
}

fn benchmark_config() -> Result<CardConfig, String> {
    load_card_config(fixture("card.toml")).map_err(err)
}

const MODELS: [&str; 3] = ["beta-VAE", "ConditionalVAE", "CausalVAE"];

fn criterion_1() -> Outcome {
    timed(Some(Duration::from_secs(1)), || {
        let config = benchmark_config()?;
        let card = benchmark_card(&config)?;
        let mut got = Vec::new();
        for (name, want) in MODELS.iter().zip([0.876, 0.855, 0.556]) {
            let m = card.model(name).ok_or("model missing")?;
            within(&format!("{name} radar"), m.radar_area, want, CARD_TOL)?;
            got.push(m.radar_area);
        }
        let mut swapped = config.clone();
        let irs = swapped.metrics.iter().position(|m| m.name == "IRS").ok_or("no IRS axis")?;
        let tic = swapped.metrics.iter().position(|m| m.name == "TIC").ok_or("no TIC axis")?;
        swapped.metrics.swap(irs, tic);
        let card = benchmark_card(&swapped)?;
        for (name, want) in MODELS.iter().zip([0.907, 0.894, 0.539]) {
            let m = card.model(name).ok_or("model missing")?;
            within(&format!("{name} swapped radar"), m.radar_area, want, CARD_TOL)?;
            got.push(m.radar_area);
        }
        Ok(format!("radar {:.4}/{:.4}/{:.4}, swapped {:.4}/{:.4}/{:.4}", got[0], got[1], got[2], got[3], got[4], got[5]))
    })
}

fn criterion_2() -> Outcome {
    timed(Some(Duration::from_secs(1)), || {
        let card = benchmark_card(&benchmark_config()?)?;
        within("h", card.h, 0.25, 0.0)?;
        for ((name, area), score) in MODELS.iter().zip([0.452, 0.448, 0.409]).zip([0.590, 0.586, 0.534]) {
            let m = card.model(name).ok_or("model missing")?;
            within(&format!("{name} origami area"), m.origami_area, area, CARD_TOL)?;
            within(&format!("{name} origami score"), m.origami_score, score, CARD_TOL)?;
            within(&format!("{name} score = area / max"), m.origami_score, m.origami_area / card.max_origami_area, 1e-12)?;
        }
        within("max area", card.max_origami_area, 0.765, MAX_AREA_TOL)?;
        check(card.ranking == MODELS, format!("ranking {:?}", card.ranking))?;
        let s: Vec<String> = card.models.iter().map(|m| format!("{:.4}", m.origami_score)).collect();
        Ok(format!("scores {}, max area {:.5}", s.join("/"), card.max_origami_area))
    })
}

fn is_dihedral(perm: &[usize]) -> bool {
    let n = perm.len();
    (0..n).any(|shift| {
        (0..n).all(|i| perm[i] == (i + shift) % n) || (0..n).all(|i| perm[i] == (shift + n - i) % n)
    })
}

fn criterion_3() -> Outcome {
    timed(Some(Duration::from_secs(5)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut dihedral, mut witnessed, mut worst) = (0, 0, 0.0f64);
        for trial in 0..10_000 {
            let n = rng.random_range(3..=10);
            let h = rng.random_range(0.05..=1.0);
            let r: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let permuted: Vec<f64> = perm.iter().map(|&i| r[i]).collect();
            let base = origami_area(&r, h).map_err(err)?;
            let diff = (origami_area(&permuted, h).map_err(err)? - base).abs();
            worst = worst.max(diff);
            check(diff <= ORDER_TOL, format!("trial {trial}: origami moved by {diff:e}"))?;

            let radar = radar_area(&r).map_err(err)?;
            if is_dihedral(&perm) {
                dihedral += 1;
                let d = (radar_area(&permuted).map_err(err)? - radar).abs();
                check(d <= ORDER_TOL, format!("trial {trial}: rotation/reversal moved radar by {d:e}"))?;
            }
            if n == 3 {
                // Every permutation of three axes is a rotation or reversal.
                continue;
            }
            // Draw non-dihedral permutations until one moves the radar area.
            let mut moved = false;
            for _ in 0..64 {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                if is_dihedral(&p) {
                    continue;
                }
                let q: Vec<f64> = p.iter().map(|&i| r[i]).collect();
                if (radar_area(&q).map_err(err)? - radar).abs() > RADAR_CHANGE {
                    moved = true;
                    break;
                }
            }
            check(moved, format!("trial {trial}: no permutation changed the radar area"))?;
            witnessed += 1;
        }
        Ok(format!("max origami drift {worst:.1e}; {witnessed} radar-sensitivity witnesses; {dihedral} dihedral draws invariant"))
    })
}

fn criterion_4() -> Outcome {
    timed(None, || {
        let g = |f: &str| load_graph(fixture(f)).map_err(err);
        let triple = |a: &str, b: &str, c: &str| (a.to_string(), b.to_string(), c.to_string());

        let beard = g("celeba_beard.json")?;
        let c = junction_census(&beard);
        check(c.chains.is_empty() && c.has_fork && c.has_collider, format!("BEARD census {c:?}"))?;
        check(c.forks.contains(&triple("bald", "age", "beard")), "BEARD fork beard <- age -> bald missing")?;
        check(c.colliders.contains(&triple("age", "bald", "gender")), "BEARD collider age -> bald <- gender missing")?;
        check(find_confounders(&beard).is_empty(), "BEARD should have no confounder")?;

        let smile = g("celeba_smile.json")?;
        let c = junction_census(&smile);
        check(c.has_chain && c.has_fork && c.has_collider, format!("SMILE census {c:?}"))?;
        let conf = find_confounders(&smile);
        check(
            conf.iter().any(|x| x.confounder == "smile" && x.cause == "mouth_open" && x.effect == "eyes_open"),
            format!("SMILE confounders {conf:?}"),
        )?;

        let flow = g("flow_noise.json")?;
        let c = junction_census(&flow);
        check(!c.has_fork && c.has_chain && c.has_collider, format!("Flow Noise census {c:?}"))?;
        check(c.chains.contains(&triple("ball_size", "hole", "water_flow")), "Flow Noise chain missing")?;

        let sun = g("shadow_sunlight.json")?;
        let c = junction_census(&sun);
        check(c.has_collider && !c.has_chain && !c.has_fork, format!("Shadow(SunLight) census {c:?}"))?;

        let point = g("shadow_pointlight.json")?;
        let c = junction_census(&point);
        check(c.has_fork && c.has_collider && !c.has_chain, format!("Shadow(PointLight) census {c:?}"))?;

        let pend = g("pendulum.json")?;
        let c = junction_census(&pend);
        check(c.has_fork && c.has_collider && !c.has_chain, format!("Pendulum census {c:?}"))?;
        check(c.forks.contains(&triple("shadow_length", "pendulum_angle", "shadow_position")), "Pendulum fork missing")?;

        for (name, graph) in [("Pendulum", &pend), ("Flow Noise", &flow), ("Shadow(SunLight)", &sun), ("Shadow(PointLight)", &point)] {
            check(find_confounders(graph).is_empty(), format!("{name} should have no confounder"))?;
        }
        Ok("six graphs match every junction and confounder claim".into())
    })
}

fn random_dag(rng: &mut ChaCha8Rng, max_nodes: usize, p: f64) -> CausalGraph {
    let n = rng.random_range(2..=max_nodes);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((names[order[i]].as_str(), names[order[j]].as_str()));
            }
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    CausalGraph::from_names(&refs, &edges).expect("random DAG is valid")
}

fn descendants(g: &CausalGraph, v: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for &c in g.children(u) {
            if seen.insert(c) {
                stack.push(c);
            }
        }
    }
    seen
}

/// d-separation by enumerating every simple path of the skeleton.
fn brute_force_dsep(g: &CausalGraph, x: usize, y: usize, z: &[usize]) -> bool {
    let neighbors = |u: usize| -> Vec<usize> { g.parents(u).iter().chain(g.children(u)).copied().collect() };
    let blocked = |path: &[usize]| -> bool {
        (1..path.len() - 1).any(|i| {
            let (a, b, c) = (path[i - 1], path[i], path[i + 1]);
            let collider = g.has_edge(a, b) && g.has_edge(c, b);
            if collider {
                !z.contains(&b) && !descendants(g, b).iter().any(|d| z.contains(d))
            } else {
                z.contains(&b)
            }
        })
    };
    let mut all_blocked = true;
    let mut stack: Vec<Vec<usize>> = vec![vec![x]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        if last == y {
            if !blocked(&path) {
                all_blocked = false;
                break;
            }
            continue;
        }
        for nb in neighbors(last) {
            if !path.contains(&nb) {
                let mut next = path.clone();
                next.push(nb);
                stack.push(next);
            }
        }
    }
    all_blocked
}

fn criterion_5() -> Outcome {
    timed(Some(Duration::from_secs(60)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut queries = 0usize;
        for trial in 0..1000 {
            let p = rng.random_range(0.2..0.6);
            let g = random_dag(&mut rng, 7, p);
            let n = g.len();
            for x in 0..n {
                for y in x + 1..n {
                    let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                    let mut sets: Vec<Vec<usize>> = vec![vec![]];
                    for (i, &a) in rest.iter().enumerate() {
                        sets.push(vec![a]);
                        for &b in &rest[i + 1..] {
                            sets.push(vec![a, b]);
                        }
                    }
                    for z in sets {
                        let names: Vec<&str> = z.iter().map(|&v| g.name(v)).collect();
                        let fast = d_separated(&g, g.name(x), g.name(y), &names).map_err(err)?;
                        let slow = brute_force_dsep(&g, x, y, &z);
                        check(
                            fast == slow,
                            format!("trial {trial}: {} vs {} given {names:?}: fast {fast}, paths {slow}", g.name(x), g.name(y)),
                        )?;
                        queries += 1;
                    }
                }
            }
        }
        Ok(format!("{queries} queries over 1000 DAGs, 0 disagreements"))
    })
}

fn categorical_table(columns: Vec<(&str, usize, Vec<f64>)>) -> DataTable {
    let (specs, data): (Vec<VariableSpec>, Vec<Vec<f64>>) =
        columns.into_iter().map(|(n, k, v)| (VariableSpec::categorical(n, k), v)).unzip();
    DataTable::new(specs, data).expect("valid categorical table")
}

fn criterion_6() -> Outcome {
    timed(Some(Duration::from_secs(30)), || {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (x, y, count) in [(0.0, 0.0, 30), (0.0, 1.0, 10), (1.0, 0.0, 10), (1.0, 1.0, 30)] {
            a.extend(std::iter::repeat_n(x, count));
            b.extend(std::iter::repeat_n(y, count));
        }
        let hand = chi2_independence(&categorical_table(vec![("a", 2, a), ("b", 2, b)]), "a", "b", &[], ALPHA).map_err(err)?;
        check(hand.statistic == 20.0 && hand.dof == 1, format!("hand case gave {} with dof {}", hand.statistic, hand.dof))?;

        let mut rejections = 0;
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 500;
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
            let t = categorical_table(vec![("x", 3, x), ("y", 3, y)]);
            if chi2_independence(&t, "x", "y", &[], ALPHA).map_err(err)?.dependent {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / 1000.0;
        check(
            rate >= CALIBRATION_BAND.0 && rate <= CALIBRATION_BAND.1,
            format!("null rejection rate {rate} outside {CALIBRATION_BAND:?}"),
        )?;
        Ok(format!("hand case 20.0 with dof 1; null rejection rate {rate:.3}"))
    })
}

fn criterion_7() -> Outcome {
    timed(None, || {
        let emb = |rows: &[&[f64]]| EmbeddingSet::new(rows.iter().map(|r| r.to_vec()).collect()).map_err(err);
        let f = fid(&emb(&[&[0.0], &[2.0]])?, &emb(&[&[1.0], &[3.0]])?).map_err(err)?;
        check(f == 1.0, format!("FID {f:e}"))?;
        let x = emb(&[&[1.0, 0.0], &[0.0, 1.0]])?;
        let k = kid(&x, &x).map_err(err)?;
        check(k == -2.375, format!("KID {k:e}"))?;
        let is = inception_score(&ProbTable::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).map_err(err)?);
        check(is == 2.0, format!("IS {is:e}"))?;
        let top = BinaryMask::new(2, 2, vec![true, true, false, false]).map_err(err)?;
        let left = BinaryMask::new(2, 2, vec![true, false, true, false]).map_err(err)?;
        let j = iou(&top, &left).map_err(err)?;
        check(j == 1.0 / 3.0, format!("IoU {j:e}"))?;
        Ok(format!("FID {f}, KID {k}, IS {is}, IoU {j}"))
    })
}

struct Scenarios {
    identity: DisentanglementScores,
    mixed: DisentanglementScores,
    noise: DisentanglementScores,
}

/// Three factors uniform on [0, 1]. Mixed latents leak 15% of the next
/// factor plus a little noise.
fn scenarios(n: usize, seed: u64) -> Result<Scenarios, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 3;
    let names = ["f0", "f1", "f2"];
    let factors: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    let noise: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    let jitter: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    let mixed: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..n).map(|r| 0.85 * factors[i][r] + 0.15 * factors[(i + 1) % k][r] + 0.1 * jitter[i][r]).collect())
        .collect();
    let f = DataTable::from_numeric(&names, factors.clone()).map_err(err)?;
    let config = SuiteConfig { bins: 20, seed };
    let run = |latents: Vec<Vec<f64>>| -> Result<DisentanglementScores, String> {
        let z = DataTable::from_numeric(&["z0", "z1", "z2"], latents).map_err(err)?;
        disentanglement_suite(&f, &z, &config).map_err(err)
    };
    Ok(Scenarios { identity: run(factors)?, mixed: run(mixed)?, noise: run(noise)? })
}

fn check_ordering(s: &Scenarios, label: &str) -> Result<(), String> {
    for ((name, id), ((_, mx), (_, no))) in
        s.identity.components().iter().zip(s.mixed.components().iter().zip(s.noise.components().iter()))
    {
        check(id > mx && mx > no, format!("{label}: {name} identity {id:.4} mixed {mx:.4} noise {no:.4}"))?;
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    timed(None, || {
        let big = scenarios(SUITE_N, 0)?;
        let id = &big.identity;
        check(id.mic >= IDENTITY_MIC_FLOOR, format!("identity MIC {:.4}", id.mic))?;
        for (name, v) in [("IRS", id.irs), ("JEMMIG", id.jemmig), ("DCI-D", id.dci_d)] {
            check(v >= IDENTITY_FLOOR, format!("identity {name} {v:.4}"))?;
        }
        for (name, v) in big.noise.components() {
            check(v <= NOISE_CEILING, format!("noise {name} {v:.4}"))?;
        }
        check_ordering(&big, "n=10000 seed 0")?;
        for seed in 0..ORDERING_SEEDS {
            check_ordering(&scenarios(ORDERING_N, seed)?, &format!("n={ORDERING_N} seed {seed}"))?;
        }
        let max_noise = big.noise.components().iter().map(|c| c.1).fold(0.0, f64::max);
        Ok(format!(
            "identity MIC {:.3} IRS {:.3} JEMMIG {:.3} DCI-D {:.3}; noise max {:.3}; ordering holds over {ORDERING_SEEDS} seeds",
            id.mic, id.irs, id.jemmig, id.dci_d, max_noise
        ))
    })
}

fn brute_force_max(m: &[Vec<f64>]) -> f64 {
    fn go(m: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == m.len() {
            *best = best.max(acc);
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                go(m, row + 1, used, acc + m[row][c], best);
                used[c] = false;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(m, 0, &mut vec![false; m[0].len()], 0.0, &mut best);
    best
}

fn criterion_9() -> Outcome {
    timed(None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..1000 {
            let cols = rng.random_range(1..=6);
            let rows = rng.random_range(1..=cols);
            let coarse = trial % 4 == 0;
            let values: Vec<Vec<f64>> = (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| if coarse { rng.random_range(0..3) as f64 / 2.0 } else { rng.random::<f64>() })
                        .collect()
                })
                .collect();
            let m = AssociationMatrix::new("trial", values.clone()).map_err(err)?;
            let h = hungarian_match(&m).map_err(err)?;
            let want = brute_force_max(&values);
            check((h.total - want).abs() <= HUNGARIAN_TOL, format!("trial {trial}: hungarian {} vs brute {want}", h.total))?;
            let s = permutation_sweep(&m).map_err(err)?;
            check(s.max == h.total, format!("trial {trial}: sweep max {} vs hungarian {}", s.max, h.total))?;
            let mut seen = BTreeSet::new();
            check(h.assignment.iter().all(|&c| seen.insert(c)), format!("trial {trial}: assignment not injective"))?;
        }
        Ok("1000 matrices up to 6x6: optima agree with brute force and the sweep".into())
    })
}

fn random_linear_scm(rng: &mut ChaCha8Rng) -> Scm {
    let g = random_dag(rng, 7, 0.5);
    let n = g.len();
    let mut mechanisms = Vec::with_capacity(n);
    let mut noise = Vec::with_capacity(n);
    for v in 0..n {
        let weights: BTreeMap<String, f64> = g
            .parents(v)
            .iter()
            .map(|&p| {
                let w = rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
                (g.name(p).to_string(), w)
            })
            .collect();
        let nonlinearity = match rng.random_range(0..5) {
            0 => Some(Nonlinearity::Tanh),
            1 => Some(Nonlinearity::Sin),
            2 => Some(Nonlinearity::Square),
            _ => None,
        };
        mechanisms.push(Some(Mechanism::Linear { weights, bias: rng.random_range(-1.0..1.0), nonlinearity }));
        noise.push(Some(if rng.random::<bool>() {
            Noise::Gaussian { sigma: rng.random_range(0.1..2.0) }
        } else {
            let low = rng.random_range(-1.0..0.0);
            Noise::Uniform { low, high: low + rng.random_range(0.0..2.0) }
        }));
    }
    Scm::new(g, mechanisms, noise).expect("random SCM is valid")
}

fn criterion_10() -> Outcome {
    timed(None, || {
        let scm = load_scm(fixture("chain_scm.json")).map_err(err)?;
        let out = scm
            .counterfactual(&[1.0, 3.0, 4.0], &BTreeMap::from([("A".to_string(), 2.0)]))
            .map_err(err)?;
        check(out[1] == 5.0 && out[2] == 6.0, format!("chain counterfactual {out:?}"))?;

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut worst = 0.0f64;
        for trial in 0..1000u64 {
            let scm = random_linear_scm(&mut rng);
            let row = scm.sample(1, trial).map_err(err)?.row(0);
            let same = scm.counterfactual(&row, &BTreeMap::new()).map_err(err)?;
            // Re-asserting the observed values must not move anything either.
            let pin = BTreeMap::from([(scm.graph().name(0).to_string(), row[0])]);
            let pinned = scm.counterfactual(&row, &pin).map_err(err)?;
            for (a, b) in row.iter().zip(same.iter().chain(pinned.iter())) {
                worst = worst.max((a - b).abs());
            }
            for (i, (a, b)) in row.iter().zip(&pinned).enumerate() {
                worst = worst.max((a - b).abs());
                check((a - b).abs() <= COUNTERFACTUAL_TOL, format!("trial {trial}: node {i} moved to {b} from {a}"))?;
            }
            for (i, (a, b)) in row.iter().zip(&same).enumerate() {
                check((a - b).abs() <= COUNTERFACTUAL_TOL, format!("trial {trial}: node {i} moved to {b} from {a}"))?;
            }
        }
        Ok(format!("chain gives B=5, C=6; 1000 random SCMs reproduce the observation (max drift {worst:e})"))
    })
}

fn criterion_11() -> Outcome {
    timed(None, || {
        let log = load_run_log(fixture("runs.csv")).map_err(err)?;
        let get = |mode| -> Result<(f64, f64), String> {
            let a = aggregate_runs(&log, mode, StdConvention::Population).map_err(err)?;
            Ok((a.metrics[0].mean, a.metrics[0].std))
        };
        let (all, _) = get(AggregateMode::All)?;
        let (bo, bo_std) = get(AggregateMode::BoundariesOut)?;
        let (top, _) = get(AggregateMode::TopK { k: 3 })?;
        within("all", all, 4.0, RUN_TOL)?;
        within("boundaries_out", bo, 3.0, RUN_TOL)?;
        within("boundaries_out population std", bo_std, (2.0f64 / 3.0).sqrt(), 1e-12)?;
        within("top-3", top, 5.667, RUN_TOL)?;
        // Constant runs: every mode gives the value with zero spread.
        let flat = RunLog::new((0..5).map(|i| RunRecord { run: i, metric: "m".into(), value: 0.7 }).collect()).map_err(err)?;
        for mode in [AggregateMode::All, AggregateMode::BoundariesOut, AggregateMode::TopK { k: 2 }] {
            let a = aggregate_runs(&flat, mode, StdConvention::Population).map_err(err)?;
            check((a.metrics[0].mean - 0.7).abs() < 1e-12 && a.metrics[0].std < 1e-12, format!("constant runs under {mode:?}"))?;
        }
        Ok(format!("all {all}, boundaries_out {bo} (std {bo_std:.4}), top-3 {top:.4}"))
    })
}

fn criterion_12() -> Outcome {
    timed(None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut worst = 0.0f64;
        for card in 0..100 {
            let n = rng.random_range(3..=10);
            let h = rng.random_range(0.05..=1.0);
            let models = rng.random_range(1..=4);
            let polygons: Vec<(String, Vec<f64>)> =
                (0..models).map(|m| (format!("model{m}"), (0..n).map(|_| rng.random::<f64>()).collect())).collect();
            let axes: Vec<String> = (0..n).map(|i| format!("metric{i}")).collect();
            for kind in [PlotKind::Radar, PlotKind::Origami { h }] {
                let svg = emit_svg(&PlotSpec { kind, axes: axes.clone(), polygons: polygons.clone() }).map_err(err)?;
                let parsed = model_polygons(&svg);
                check(parsed.len() == models, format!("card {card}: {} polygons for {models} models", parsed.len()))?;
                for (points, (_, values)) in parsed.iter().zip(&polygons) {
                    let (want, count) = match kind {
                        PlotKind::Radar => (radar_area(values).map_err(err)?, n),
                        PlotKind::Origami { h } => (origami_area(values, h).map_err(err)?, 2 * n),
                    };
                    check(points.len() == count, format!("card {card}: {} vertices, want {count}", points.len()))?;
                    let d = (shoelace_area(points) - want).abs();
                    worst = worst.max(d);
                    check(d <= SHOELACE_TOL, format!("card {card}: shoelace off by {d:e}"))?;
                }
            }
        }
        let _ = origami_max_area(8, 0.25).map_err(err)?;
        Ok(format!("100 cards, radar and origami; max shoelace gap {worst:.1e}"))
    })
}

fn logit(bias: f64, weights: &[(&str, f64)]) -> LogitRow {
    LogitRow { bias, weights: weights.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
}

/// Binary logistic mechanism: `P(1) = sigmoid(bias + sum w * parent)`.
fn binary(bias: f64, weights: &[(&str, f64)]) -> Option<Mechanism> {
    let zero: Vec<(&str, f64)> = weights.iter().map(|(k, _)| (*k, 0.0)).collect();
    Some(Mechanism::Categorical { logits: vec![logit(0.0, &zero), logit(bias, weights)] })
}

fn faithful_scm() -> Result<Scm, String> {
    let names = ["a", "b", "c", "d", "e", "f", "g"];
    let edges = [("a", "c"), ("b", "c"), ("c", "d"), ("d", "e"), ("f", "e"), ("a", "g")];
    let vars: Vec<VariableSpec> = names.iter().map(|n| VariableSpec::categorical(*n, 2)).collect();
    let base = CausalGraph::new(vars.clone(), vec![]).map_err(err)?;
    let idx = edges
        .iter()
        .map(|(x, y)| Ok((base.index_of(x)?, base.index_of(y)?)))
        .collect::<crlscore::Result<Vec<_>>>()
        .map_err(err)?;
    let g = CausalGraph::new(vars, idx).map_err(err)?;
    let mechanisms = vec![
        binary(0.0, &[]),
        binary(0.3, &[]),
        binary(-2.0, &[("a", 2.0), ("b", 2.0)]),
        binary(-1.5, &[("c", 3.0)]),
        binary(-2.0, &[("d", 2.5), ("f", 1.5)]),
        binary(-0.2, &[]),
        binary(1.5, &[("a", -3.0)]),
    ];
    Scm::new(g, mechanisms, vec![None; 7]).map_err(err)
}

fn confounded_beard(seed: u64) -> Result<(CausalGraph, DataTable), String> {
    let beard = load_graph(fixture("celeba_beard.json")).map_err(err)?;
    let mut vars = beard.variables().to_vec();
    vars.push(VariableSpec::categorical("hidden", 2).latent());
    let u = vars.len() - 1;
    let mut edges: Vec<(usize, usize)> = beard.edges().collect();
    edges.push((u, beard.index_of("age").map_err(err)?));
    edges.push((u, beard.index_of("gender").map_err(err)?));
    let g = CausalGraph::new(vars, edges).map_err(err)?;
    let mut mechanisms = vec![None; g.len()];
    let set = |m: &mut Vec<Option<Mechanism>>, name: &str, mech| -> Result<(), String> {
        m[g.index_of(name).map_err(err)?] = mech;
        Ok(())
    };
    set(&mut mechanisms, "hidden", binary(0.0, &[]))?;
    set(&mut mechanisms, "age", binary(-1.0, &[("hidden", 2.0)]))?;
    set(&mut mechanisms, "gender", binary(-1.0, &[("hidden", 2.0)]))?;
    set(&mut mechanisms, "beard", binary(-1.0, &[("age", 2.0)]))?;
    set(&mut mechanisms, "bald", binary(-2.0, &[("age", 1.5), ("gender", 1.5)]))?;
    let scm = Scm::new(g, mechanisms, vec![None; 5]).map_err(err)?;
    let data = scm.sample(SUITE_N, seed).map_err(err)?.observed().map_err(err)?;
    Ok((beard, data))
}

fn criterion_13() -> Outcome {
    timed(None, || {
        let scm = faithful_scm()?;
        let data = scm.sample(SUITE_N, 13).map_err(err)?;
        let audit = audit_graph_against_data(scm.graph(), &data, 2, ALPHA).map_err(err)?;
        let tested = audit.entries.iter().filter(|e| e.expected == Expectation::Independent).count();
        check(
            audit.violation_rate <= AUDIT_MAX_VIOLATION,
            format!("faithful SCM violation rate {:.3} over {} entries", audit.violation_rate, audit.entries.len()),
        )?;

        let mut flipped = 0;
        for seed in 0..100 {
            let (beard, data) = confounded_beard(seed)?;
            let audit = audit_graph_against_data(&beard, &data, 0, ALPHA).map_err(err)?;
            let entry = audit
                .entries
                .iter()
                .find(|e| e.x == "age" && e.y == "gender" && e.given.is_empty())
                .ok_or("audit lacks the age/gender entry")?;
            if entry.expected == Expectation::Independent && !entry.consistent {
                flipped += 1;
            }
        }
        let rate = flipped as f64 / 100.0;
        check(rate >= CONFOUNDER_DETECTION, format!("hidden cause detected in {flipped}/100 seeds"))?;
        Ok(format!(
            "faithful violation rate {:.3} ({} entries, {tested} independences); hidden cause flagged in {flipped}/100 seeds",
            audit.violation_rate,
            audit.entries.len()
        ))
    })
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("radar area reproduces the benchmark card (and the IRS/TIC swap)", criterion_1),
        ("origami area, maximum and score reproduce the benchmark card", criterion_2),
        ("origami order invariance, radar order sensitivity", criterion_3),
        ("junction and confounder census of the six dataset graphs", criterion_4),
        ("d-separation agrees with path enumeration", criterion_5),
        ("chi-square hand case and null calibration", criterion_6),
        ("generation metric hand cases are exact", criterion_7),
        ("disentanglement suite orders identity > mixed > noise", criterion_8),
        ("Hungarian matching agrees with brute force", criterion_9),
        ("SCM counterfactual closed form and abduction consistency", criterion_10),
        ("run aggregation modes", criterion_11),
        ("SVG polygons match computed areas", criterion_12),
        ("graph-data audit end to end", criterion_13),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
