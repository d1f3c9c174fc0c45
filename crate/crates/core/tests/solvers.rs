mod common;

use common::coordinate_descent_lasso;
use sparsebench::model::{
    generate_instance, recommended_tau, Algorithm, GenerateParams, ProblemInstance,
    RegularizerConfig, SolverConfig, StoppingRule,
};
use sparsebench::solvers::{
    self, numerical_l0, objective, step, step_ad_fista, step_ad_ista, surrogate, IterateState,
};

fn instance(m: usize, n: usize, k: usize, noise: f64, seed: u64) -> ProblemInstance {
    generate_instance(&GenerateParams::new(m, n, k, noise, seed)).unwrap()
}

fn config(alg: Algorithm, inst: &ProblemInstance, tol: f64, max_iters: usize) -> SolverConfig {
    SolverConfig::recommended(alg, inst)
        .unwrap()
        .with_stop(StoppingRule::relative_step(tol))
        .with_max_iters(max_iters)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn ista_lasso_objective_is_monotone() {
    for seed in 0..5 {
        let inst = instance(30, 60, 4, 0.01, seed);
        let tau = 0.99 * recommended_tau(&inst).unwrap();
        let reg = RegularizerConfig::lasso(0.01, tau, 60).unwrap();
        let cfg = SolverConfig::new(Algorithm::Ista, tau).with_max_iters(3000);
        let res = solvers::run(&inst, &reg, &cfg).unwrap();
        for w in res.trace.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-10, "seed {seed} t={}", w[1].t);
        }
    }
}

#[test]
fn lasso_solvers_match_coordinate_descent() {
    let inst = instance(30, 60, 4, 0.01, 3);
    let alpha = 0.01;
    let want = coordinate_descent_lasso(inst.a(), inst.y(), alpha, 100_000);
    for alg in [Algorithm::Ista, Algorithm::Fista, Algorithm::Admm] {
        let cfg = config(alg, &inst, 1e-12, 200_000);
        let reg = RegularizerConfig::lasso(alpha, cfg.tau, 60).unwrap();
        let res = solvers::run(&inst, &reg, &cfg).unwrap();
        assert!(res.converged, "{alg}");
        assert!(linf(&res.x_final, &want) <= 1e-6, "{alg}: {:e}", linf(&res.x_final, &want));
    }
}

#[test]
fn admm_final_iterate_satisfies_subgradient_optimality() {
    let inst = instance(30, 60, 4, 0.01, 5);
    let alpha = 0.01;
    let tol = 1e-10;
    let cfg = config(Algorithm::Admm, &inst, tol, 200_000);
    let reg = RegularizerConfig::lasso(alpha, cfg.tau, 60).unwrap();
    let res = solvers::run(&inst, &reg, &cfg).unwrap();
    assert!(res.converged);
    let mut r = inst.a().matvec(&res.x_final).unwrap();
    r.iter_mut().zip(inst.y()).for_each(|(a, y)| *a -= y);
    let g = inst.a().matvec_transpose(&r).unwrap();
    for (gi, zi) in g.iter().zip(&res.x_final) {
        if *zi != 0.0 {
            assert!((gi + alpha * zi.signum()).abs() <= 10.0 * tol, "g={gi} z={zi}");
        } else {
            assert!(gi.abs() <= alpha + 10.0 * tol, "g={gi}");
        }
    }
}

#[test]
fn converged_run_is_a_fixed_point() {
    let inst = instance(30, 60, 4, 0.01, 7);
    for alg in [Algorithm::Ista, Algorithm::AdIsta, Algorithm::RwIsta] {
        let cfg = config(alg, &inst, 1e-10, 100_000);
        let reg = match alg.family() {
            sparsebench::model::Family::L1 => RegularizerConfig::lasso(0.01, cfg.tau, 60),
            sparsebench::model::Family::Log => RegularizerConfig::log(4e-3, 0.1, cfg.tau, 60),
        }
        .unwrap();
        let res = solvers::run(&inst, &reg, &cfg).unwrap();
        assert!(res.converged, "{alg}");
        let next = step(alg, &res.final_state, &inst, &reg, None).unwrap();
        assert!(linf(&next.x, &res.x_final) < 1e-8, "{alg}");
    }
}

#[test]
fn ad_fista_first_iterate_equals_ad_ista() {
    let inst = instance(20, 40, 3, 0.05, 9);
    let tau = recommended_tau(&inst).unwrap();
    let reg = RegularizerConfig::log(4e-4, 1e-2, tau, 40).unwrap();
    let x0 = vec![0.0; 40];
    let a = step_ad_ista(&IterateState::initial(Algorithm::AdIsta, x0.clone()), &inst, &reg).unwrap();
    let f = step_ad_fista(&IterateState::initial(Algorithm::AdFista, x0), &inst, &reg).unwrap();
    assert_eq!(a.x, f.x);
}

#[test]
fn surrogate_sandwich_holds_along_ad_ista() {
    for seed in 0..3 {
        let inst = instance(20, 40, 3, 0.05, seed);
        let tau = 0.99 * recommended_tau(&inst).unwrap();
        let reg = RegularizerConfig::log(4e-4, 1e-2, tau, 40).unwrap();
        let mut state = IterateState::initial(Algorithm::AdIsta, vec![0.0; 40]);
        for _ in 0..200 {
            let next = step_ad_ista(&state, &inst, &reg).unwrap();
            let f0 = objective(&state.x, &inst, &reg).unwrap();
            let s = surrogate(&next.x, &state.x, &inst, &reg).unwrap();
            let f1 = objective(&next.x, &inst, &reg).unwrap();
            assert!(f0 + 1e-10 >= s && s + 1e-10 >= f1, "seed {seed}: {f0} {s} {f1}");
            state = next;
        }
    }
}

#[test]
fn huge_threshold_converges_to_zero_immediately() {
    let inst = instance(20, 40, 3, 0.0, 2);
    for alg in Algorithm::ALL {
        let cfg = config(alg, &inst, 1e-8, 100);
        let reg = match alg.family() {
            sparsebench::model::Family::L1 => RegularizerConfig::lasso(1e6, cfg.tau, 40),
            sparsebench::model::Family::Log => RegularizerConfig::log(0.5e6 / cfg.tau, 1e3, cfg.tau, 40),
        }
        .unwrap();
        let res = solvers::run(&inst, &reg, &cfg).unwrap();
        assert!(res.converged && res.iters <= 2, "{alg}: {}", res.iters);
        assert!(res.x_final.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn l0_is_insensitive_to_zero_tolerance() {
    let inst = instance(40, 80, 4, 0.01, 11);
    let cfg = config(Algorithm::AdIsta, &inst, 1e-8, 20_000);
    let reg = RegularizerConfig::log(4e-3, 0.1, cfg.tau, 80).unwrap();
    let res = solvers::run(&inst, &reg, &cfg).unwrap();
    let counts: Vec<usize> = [1e-12, 1e-10, 1e-8, 1e-6, 1e-4]
        .iter()
        .map(|&tol| numerical_l0(&res.x_final, tol))
        .collect();
    assert!(counts.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
}

#[test]
fn trace_counts_iterates_from_zero() {
    let inst = instance(20, 40, 3, 0.05, 1);
    let cfg = SolverConfig::recommended(Algorithm::Ista, &inst)
        .unwrap()
        .with_stop(StoppingRule::iter_cap_only())
        .with_max_iters(3);
    let reg = RegularizerConfig::lasso(1e-3, cfg.tau, 40).unwrap();
    let res = solvers::run(&inst, &reg, &cfg).unwrap();
    let ts: Vec<usize> = res.trace.iter().map(|r| r.t).collect();
    assert_eq!(ts, vec![0, 1, 2, 3]);
    assert!(!res.converged);
}
