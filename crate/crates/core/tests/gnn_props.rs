use lpgraph::forge::{gen_random_lp_stream, gen_twin_pair, seeded_rng, GenConfig, TwinFamily, TwinVariant};
use lpgraph::gnn::{
    forward_scalar, forward_vertex, init_params, loss_and_grad, train, GnnConfig, GnnParams, OutputMode, Sample, Task,
    TrainConfig, Value,
};
use lpgraph::graph::{apply_permutation, encode, PermPair};
use lpgraph::wl::same_vertex_color;
use proptest::prelude::*;
use rand::Rng;

fn random_params(cfg: &GnnConfig, seed: u64) -> GnnParams {
    let mut p = init_params(cfg, seed).unwrap();
    let mut rng = seeded_rng(seed, 7);
    for v in p.as_mut_slice() {
        *v += rng.random_range(-0.2..0.2);
    }
    p
}

fn small_cfg(seed: u64) -> GenConfig {
    let mut rng = seeded_rng(seed, 3);
    let (m, n) = (rng.random_range(1..=6), rng.random_range(1..=8));
    GenConfig { m, n, nnz: rng.random_range(0..=m * n), c_scale: 1.0, bound_sigma: 3.0, p_le: 0.4, p_eq: 0.3, p_ge: 0.3, seed }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn invariant_and_equivariant(seed in any::<u64>(), wide in any::<bool>()) {
        let d = if wide { 32 } else { 4 };
        let g = encode(&gen_random_lp_stream(&small_cfg(seed), 0).unwrap());
        let perm = PermPair::random(g.m(), g.n(), &mut seeded_rng(seed, 4));
        let pg = apply_permutation(&g, &perm).unwrap();
        let ps = random_params(&GnnConfig::new(2, d, OutputMode::Scalar).unwrap(), seed);
        let (a, b) = (forward_scalar(&ps, &g).unwrap(), forward_scalar(&ps, &pg).unwrap());
        prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
        let pv = random_params(&GnnConfig::new(2, d, OutputMode::Vertex).unwrap(), seed);
        let y = perm.permute_w(&forward_vertex(&pv, &g).unwrap());
        let py = forward_vertex(&pv, &pg).unwrap();
        let scale = 1.0 + y.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        prop_assert!(y.iter().zip(&py).all(|(u, v)| (u - v).abs() <= 1e-6 * scale));
    }

    #[test]
    fn twins_are_not_separated(seed in any::<u64>(), k in prop::sample::select(vec![4usize, 6, 8])) {
        for variant in [TwinVariant::Infeasible, TwinVariant::Unbounded, TwinVariant::Bounded] {
            let (a, b) = gen_twin_pair(TwinFamily::CycleSplit { k }, variant).unwrap();
            let (ga, gb) = (encode(&a), encode(&b));
            let ps = random_params(&GnnConfig::new(2, 8, OutputMode::Scalar).unwrap(), seed);
            let (fa, fb) = (forward_scalar(&ps, &ga).unwrap(), forward_scalar(&ps, &gb).unwrap());
            prop_assert!((fa - fb).abs() <= 1e-6 * (1.0 + fa.abs()));
            let pv = random_params(&GnnConfig::new(2, 8, OutputMode::Vertex).unwrap(), seed);
            let ya = forward_vertex(&pv, &ga).unwrap();
            let mut sa = ya.clone();
            let mut sb = forward_vertex(&pv, &gb).unwrap();
            sa.sort_by(f64::total_cmp);
            sb.sort_by(f64::total_cmp);
            prop_assert!(sa.iter().zip(&sb).all(|(u, v)| (u - v).abs() <= 1e-6 * (1.0 + u.abs())));
            for j in 1..k {
                prop_assert!(same_vertex_color(&ga, 0, j).unwrap());
                prop_assert!((ya[0] - ya[j]).abs() <= 1e-6 * (1.0 + ya[0].abs()));
            }
        }
    }
}

fn grad_check(task: Task, net: u64) -> f64 {
    let d = [2, 4, 8][(net % 3) as usize];
    let cfg = GnnConfig::new(2, d, task.output_mode()).unwrap();
    let mut p = random_params(&cfg, 1000 + net);
    let gc = GenConfig { m: 4, n: 6, nnz: 10, seed: net, bound_sigma: 2.0, c_scale: 1.0, ..GenConfig::default() };
    let data: Vec<Sample> = (0..3)
        .map(|k| {
            let lp = gen_random_lp_stream(&gc, k).unwrap();
            let target = match task {
                Task::Feas => Value::Scalar((k % 2) as f64),
                Task::Obj => Value::Scalar(0.3 * k as f64 - 0.2),
                Task::Solu => Value::Vector((0..6).map(|j| 0.1 * j as f64 - 0.2).collect()),
            };
            Sample { graph: encode(&lp), target }
        })
        .collect();
    let (_, grad) = loss_and_grad(&p, &data, task).unwrap();
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for k in 0..p.len() {
        let orig = p.as_slice()[k];
        p.as_mut_slice()[k] = orig + eps;
        let up = loss_and_grad(&p, &data, task).unwrap().0;
        p.as_mut_slice()[k] = orig - eps;
        let down = loss_and_grad(&p, &data, task).unwrap().0;
        p.as_mut_slice()[k] = orig;
        let fd = (up - down) / (2.0 * eps);
        let a = grad.as_slice()[k];
        worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1e-6));
    }
    worst
}

#[test]
fn gradients_match_central_differences() {
    for task in [Task::Feas, Task::Obj, Task::Solu] {
        for net in 0..3 {
            let worst = grad_check(task, net);
            assert!(worst <= 1e-4, "{task:?} net {net}: {worst}");
        }
    }
}

#[test]
fn training_is_deterministic_and_fits_small_sets() {
    let gc = GenConfig { m: 3, n: 5, nnz: 8, seed: 11, bound_sigma: 2.0, c_scale: 1.0, ..GenConfig::default() };
    let data: Vec<Sample> = (0..6)
        .map(|k| Sample { graph: encode(&gen_random_lp_stream(&gc, k).unwrap()), target: Value::Scalar((k % 2) as f64) })
        .collect();
    let cfg = GnnConfig::new(2, 16, OutputMode::Scalar).unwrap();
    let tc = TrainConfig { epochs: 1500, seed: 2, batch_size: Some(3), stop_at_metric: Some(0.0), ..TrainConfig::default() };
    let (_, h1) = train(&cfg, &data, Task::Feas, &tc).unwrap();
    let (_, h2) = train(&cfg, &data, Task::Feas, &tc).unwrap();
    assert_eq!(h1, h2);
    assert_eq!(h1.last().unwrap().metric, 0.0, "{:?}", h1.last());
}
