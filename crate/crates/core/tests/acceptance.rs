//! End-to-end acceptance checks. Each test writes one `PASS`/`FAIL` line to
//! stderr (bypassing output capture) and then asserts its criterion.

mod common;

use std::io::Write;
use std::time::Instant;

use common::*;
use hiergame::graph::{chain, crossed_chains, sigma_for_beta, ChainLengths, Role};
use hiergame::influence::{GraphInfluence, InfluenceModel};
use hiergame::ising::{chain_conditional, chain_xy, coupling_from_hierarchy};
use hiergame::payoff::{path_share_matrix, shapley_shares};
use hiergame::vote::{conditional_influence, configuration_weights, ForwardSampler};
use hiergame::{transform_summary, Game, Graph, Params, Spin, SpinAssignment, Summary, VertexSet, VoteMode};
use rand::Rng;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    writeln!(err, "acceptance {id} [{verdict}] {name}: {detail}").unwrap();
}

fn nash_set(x: f64, y: f64) -> Vec<Vec<usize>> {
    transform_summary(&Game::prisoners_dilemma(), Summary::symmetric(x, y))
        .unwrap()
        .game
        .pure_nash()
}

#[test]
fn tipping_points() {
    let start = Instant::now();
    let step = 0.005;
    let mut worst: f64 = 0.0;
    let mut missing = Vec::new();
    let mut rows = 0;
    for k in 1..100 {
        let y = 0.5 + step * k as f64;
        let xs: Vec<f64> = (0..=200).map(|j| j as f64 * step).collect();
        let sets: Vec<_> = xs.iter().map(|&x| nash_set(x, y)).collect();
        let changes: Vec<f64> = (1..xs.len())
            .filter(|&j| sets[j] != sets[j - 1])
            .map(|j| 0.5 * (xs[j] + xs[j - 1]))
            .collect();
        for line in [(2.0 - y) / 3.0, (y + 1.0) / 3.0] {
            let d = changes.iter().map(|c| (c - line).abs()).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
            if d > step {
                missing.push((y, line));
            }
        }
        rows += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = missing.is_empty() && secs < 10.0;
    report(
        1,
        "tipping points",
        pass,
        &format!("{rows} rows of y, worst distance of a detected Nash change to x=(2-y)/3 or x=(y+1)/3 is {worst:.4} (step {step}), {secs:.2}s"),
    );
    assert!(pass, "missing tipping lines at {missing:?}");
}

#[test]
fn game_value() {
    let mut r = rng(2024);
    let mut worst: f64 = 0.0;
    let mut points = 0;
    while points < 1000 {
        let y: f64 = r.random_range(0.5..1.0);
        let x: f64 = r.random_range(0.0..1.0);
        let lines = [1.0 - y, (2.0 - y) / 3.0, (y + 1.0) / 3.0, y];
        // The three-branch formula covers the wedge 1 - y < x < y.
        if x <= lines[0] || x >= lines[3] || lines.iter().any(|l| (x - l).abs() < 1e-6) {
            continue;
        }
        let formula = if x < lines[1] {
            -1.0 + 2.0 * x
        } else if x < lines[2] {
            -1.0 + 2.0 * y
        } else {
            1.0 - 2.0 * x
        };
        let t = transform_summary(&Game::prisoners_dilemma(), Summary::symmetric(x, y)).unwrap();
        let nash = t.game.pure_nash();
        assert_eq!(nash.len(), 1, "equilibrium at ({x}, {y}) is not unique: {nash:?}");
        let nu = t.game.payoff(&nash[0]);
        worst = worst.max((nu[0] - formula).abs()).max((nu[1] - formula).abs());
        points += 1;
    }
    let pass = worst <= 1e-12;
    report(2, "game value", pass, &format!("{points} points, max |nu(sigma_hat) - formula| = {worst:.3e} (tol 1e-12)"));
    assert!(pass);
}

#[test]
fn ising_isomorphism_on_random_trees() {
    let start = Instant::now();
    let mut r = rng(7);
    let (mut failing, mut exact_trees, mut exact_failing) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    for _ in 0..200 {
        let n = r.random_range(2..=12);
        let d = r.random_range(0.1..0.9);
        let beta = r.random_range(0.2..2.0);
        let g = random_oriented_tree(&mut r, n, d, sigma_for_beta(beta));
        let params = Params::from_graph(&g).unwrap().with_mode(VoteMode::TanhApprox);
        let model = coupling_from_hierarchy(&g).unwrap();
        let (lam, execs) = roles(&g);
        let a: VertexSet = lam.iter().copied().collect();
        let mut dev: f64 = 0.0;
        for pattern in 0..1usize << lam.len() {
            let sigma: SpinAssignment = lam.iter().copied().zip(spins_of(pattern, lam.len())).collect();
            for &i in &execs {
                let vote = conditional_influence(&g, &a, &VertexSet::single(i), &sigma, &params).unwrap().probs[0];
                let ising = model.conditional(i, &a, &sigma).unwrap();
                dev = dev.max((vote - ising).abs());
            }
        }
        worst = worst.max(dev);
        failing += usize::from(dev > 1e-12);
        if is_exact(&g) {
            exact_trees += 1;
            worst_exact = worst_exact.max(dev);
            exact_failing += usize::from(dev > 1e-12);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failing == 0 && secs < 30.0;
    report(
        3,
        "Ising isomorphism on random trees",
        pass,
        &format!(
            "{failing}/200 trees disagree beyond 1e-12 (max deviation {worst:.3e}); \
             trees without free multi-predecessor vertices: {exact_failing}/{exact_trees} disagree \
             (max deviation {worst_exact:.3e}); {secs:.2}s"
        ),
    );
    assert!(pass, "vote and Ising conditionals differ on {failing} of 200 random trees");
}

#[test]
fn one_dimensional_closed_forms() {
    let betas = [0.1, 0.5, 1.0, 2.0];
    let mut worst: f64 = 0.0;
    for len in 1..=8u32 {
        for &beta in &betas {
            let g = chain::<f64>(len as usize, 0.5, sigma_for_beta(beta)).unwrap();
            let params = Params::from_graph(&g).unwrap();
            let model = coupling_from_hierarchy(&g).unwrap();
            let a = g.deciders();
            let one = g.lookup("1").unwrap();
            for s in Spin::BOTH {
                let sigma = SpinAssignment::uniform(&a, s);
                let closed = chain_conditional(len, beta, s == Spin::Up);
                let vote = conditional_influence(&g, &a, &VertexSet::single(one), &sigma, &params).unwrap().probs[0];
                let ising = model.conditional(one, &a, &sigma).unwrap();
                worst = worst.max((closed - vote).abs()).max((closed - ising).abs());
            }
        }
    }
    let mut worst_xy: f64 = 0.0;
    for a_len in 1..=8u32 {
        for c_len in 1..=8u32 {
            for &beta in &betas {
                let g = crossed_chains::<f64>(ChainLengths::symmetric(a_len as usize, c_len as usize), 0.5, sigma_for_beta(beta))
                    .unwrap();
                let oracle = GraphInfluence::for_graph(&g, Params::from_graph(&g).unwrap(), InfluenceModel::Ising).unwrap();
                let s = Summary::from_oracle(&oracle).unwrap();
                let (x, y) = chain_xy(a_len, c_len, beta);
                for (got, want) in [(s.x, x), (s.y, y), (s.x_bar, x), (s.y_bar, y)] {
                    worst_xy = worst_xy.max((got - want).abs());
                }
            }
        }
    }
    let mut shape = true;
    for &beta in &betas {
        for k in 1..=8 {
            let (x, _) = chain_xy(k, k, beta);
            shape &= (x - 0.5).abs() < 1e-12;
        }
        for c in 1..=8 {
            let xs: Vec<f64> = (1..=8).map(|a| chain_xy(a, c, beta).0).collect();
            shape &= xs.windows(2).all(|w| w[1] > w[0]);
        }
        let ys: Vec<f64> = (1..=8).map(|k| chain_xy(k, k, beta).1).collect();
        shape &= ys.windows(2).all(|w| w[1] < w[0] && w[1] > 0.5);
    }
    let (x0, y0) = chain_xy(3, 5, 1e-7f64);
    shape &= (x0 - 0.5).abs() < 1e-6 && (y0 - 0.5).abs() < 1e-6;
    let pass = worst <= 1e-12 && worst_xy <= 1e-12 && shape;
    report(
        4,
        "one-dimensional closed forms",
        pass,
        &format!("chain conditional max error {worst:.3e}, (x, y) max error {worst_xy:.3e}, x = 1/2 at a = c / beta -> 0 limit / monotonicity: {shape}"),
    );
    assert!(pass);
}

#[test]
fn shapley_closed_form_and_axioms() {
    let mut worst: f64 = 0.0;
    for (a, c) in [(1, 2), (2, 2), (3, 1), (4, 4), (2, 6), (5, 3)] {
        for beta in [0.5, 1.0, 2.0] {
            let g = crossed_chains::<f64>(ChainLengths::symmetric(a, c), 0.5, sigma_for_beta(beta)).unwrap();
            for model in [InfluenceModel::Ising, InfluenceModel::Vote] {
                let oracle = GraphInfluence::for_graph(&g, Params::from_graph(&g).unwrap(), model).unwrap();
                let Summary { x, y, x_bar, y_bar } = Summary::from_oracle(&oracle).unwrap();
                let phi = shapley_shares(&oracle).unwrap();
                let expected = [
                    [(y - x) / (2.0 * y - 1.0), (x_bar + y_bar - 1.0) / (2.0 * y_bar - 1.0)],
                    [(x + y - 1.0) / (2.0 * y - 1.0), (y_bar - x_bar) / (2.0 * y_bar - 1.0)],
                ];
                for lam in 0..2 {
                    for i in 0..2 {
                        worst = worst.max((phi.get(lam, i) - expected[lam][i]).abs());
                    }
                }
            }
        }
    }
    let mut r = rng(99);
    let (mut efficiency, mut dummy, mut dummies) = (0.0f64, 0.0f64, 0);
    for _ in 0..100 {
        let n = r.random_range(4..=10);
        let m = r.random_range(1..=3);
        let (d, beta) = (r.random_range(0.1..0.9), r.random_range(0.3..2.0));
        let g = random_dag(&mut r, n, m.min(n - 2), d, sigma_for_beta(beta));
        let (lam, execs) = roles(&g);
        let oracle = GraphInfluence::for_graph(&g, Params::from_graph(&g).unwrap(), InfluenceModel::Vote).unwrap();
        let phi = shapley_shares(&oracle).unwrap();
        let paths = path_share_matrix(&g, &execs).unwrap();
        for (i, &e) in execs.iter().enumerate() {
            efficiency = efficiency.max((phi.column_sum(i) - 1.0).abs()).max((paths.column_sum(i) - 1.0).abs());
            for (k, &l) in lam.iter().enumerate() {
                if brute_path_share(&g, l, e) == 0.0 {
                    dummies += 1;
                    dummy = dummy.max(phi.get(k, i).abs());
                }
            }
        }
    }
    let pass = worst <= 1e-12 && efficiency <= 1e-12 && dummy <= 1e-12 && dummies > 0;
    report(
        5,
        "Shapley closed form and axioms",
        pass,
        &format!("closed-form max error {worst:.3e}; 100 random DAGs: max |sum phi - 1| = {efficiency:.3e}, {dummies} dummy deciders with max |phi| = {dummy:.3e}"),
    );
    assert!(pass);
}

#[test]
fn monte_carlo_concordance() {
    let g = crossed_chains::<f64>(ChainLengths::uniform(4), 0.5, sigma_for_beta(1.0)).unwrap();
    let params = Params::from_graph(&g).unwrap();
    let lam = g.deciders().to_vec();
    let a = g.deciders();
    let samples = 100_000;
    let cases = [
        ("x", "1", [Spin::Down, Spin::Up]),
        ("y", "1", [Spin::Up, Spin::Up]),
        ("x_bar", "2", [Spin::Up, Spin::Down]),
        ("y_bar", "2", [Spin::Up, Spin::Up]),
    ];
    let run = |seed: u64, exec: &str, commands: [Spin; 2]| {
        let i = g.lookup(exec).unwrap();
        let sigma: SpinAssignment = lam.iter().copied().zip(commands).collect();
        let mut sampler = ForwardSampler::new(&g, params, seed).unwrap();
        (0..samples).filter(|_| sampler.draw(&sigma).unwrap().get(i) == Some(Spin::Up)).count()
    };
    let mut pass = true;
    let mut details = Vec::new();
    for (k, (name, exec, commands)) in cases.into_iter().enumerate() {
        let i = g.lookup(exec).unwrap();
        let sigma: SpinAssignment = lam.iter().copied().zip(commands).collect();
        let exact = conditional_influence(&g, &a, &VertexSet::single(i), &sigma, &params).unwrap().probs[0];
        let seed = 1000 + k as u64;
        let hits = run(seed, exec, commands);
        let deterministic = hits == run(seed, exec, commands);
        let p = hits as f64 / samples as f64;
        let se = (exact * (1.0 - exact) / samples as f64).sqrt();
        let z = (p - exact) / se;
        pass &= z.abs() < 3.0 && deterministic;
        details.push(format!("{name}: {p:.4} vs {exact:.4} (z = {z:+.2}, repeatable: {deterministic})"));
    }
    report(6, "Monte Carlo concordance", pass, &format!("{samples} samples each; {}", details.join("; ")));
    assert!(pass);
}

fn three_cycle() -> Graph {
    Graph::builder()
        .vertex("v1", Role::Agent)
        .vertex("v2", Role::Agent)
        .vertex("v3", Role::Agent)
        .edge("v1", "v2", 1.0)
        .edge("v2", "v3", 1.0)
        .edge("v3", "v1", 1.0)
        .build(0.5, sigma_for_beta(1.0))
        .unwrap()
}

fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let (zp, zq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    0.5 * p.iter().zip(q).map(|(a, b)| (a / zp - b / zq).abs()).sum::<f64>()
}

#[test]
fn cyclic_discrepancy() {
    let g = three_cycle();
    let model = coupling_from_hierarchy(&g).unwrap();
    let ising = model.boltzmann_weights().unwrap();
    let tanh = configuration_weights(&g, &Params::from_graph(&g).unwrap()).unwrap();
    let gauss = configuration_weights(&g, &Params::from_graph(&g).unwrap().with_mode(VoteMode::ExactGaussian)).unwrap();
    let tv = total_variation(&tanh, &ising);
    let tv_gauss = total_variation(&gauss, &ising);
    let ratio = tanh.iter().sum::<f64>() / ising.iter().sum::<f64>();
    let pass = tv > 1e-6;
    report(
        7,
        "cyclic discrepancy",
        pass,
        &format!(
            "directed 3-cycle, beta = 1, D = 1/2: TV(vote, Ising) = {tv:.3e} in tanh mode (required > 1e-6), \
             {tv_gauss:.3e} in gaussian mode; unnormalized Z_vote / Z_Ising = {ratio:.6}"
        ),
    );
    assert!(pass, "normalized vote and Ising distributions coincide (TV = {tv:e})");
}

#[test]
fn thermodynamic_limit_excluded() {
    let mut err = std::io::stderr().lock();
    writeln!(
        err,
        "acceptance 8 [SKIP] thermodynamic-limit phase transition: not reproducible on finite graphs; finite tipping points are covered by acceptance 1"
    )
    .unwrap();
}
