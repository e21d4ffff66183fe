use proptest::prelude::*;

use super::*;

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn particle(position: Vec<f64>, fval: f64) -> Particle {
    Particle { velocity: vec![0.0; position.len()], best_position: position.clone(), best_fval: fval, position, fval }
}

#[test]
fn schedule_endpoints() {
    let c = MscPsoConfig { t_max: 10, ..Default::default() };
    let (eta, c1, c2) = schedule_params(&c, 10).unwrap();
    assert!((eta - 0.4).abs() < 1e-15 && (c1 - 0.5).abs() < 1e-15 && (c2 - 2.5).abs() < 1e-15);
    let (eta, c1, c2) = schedule_params(&c, 5).unwrap();
    assert!((eta - 0.65).abs() < 1e-15 && (c1 - 1.5).abs() < 1e-15 && (c2 - 1.5).abs() < 1e-15);
    let big = MscPsoConfig { t_max: 1_000_000, ..Default::default() };
    let (eta, c1, c2) = schedule_params(&big, 1).unwrap();
    assert!((eta - 0.9).abs() < 1e-6 && (c1 - 2.5).abs() < 1e-5 && (c2 - 0.5).abs() < 1e-5);
    assert!(schedule_params(&c, 0).is_err());
    assert!(schedule_params(&c, 11).is_err());
}

#[test]
fn elite_examples() {
    let five: Vec<Particle> = (0..5).map(|i| particle(vec![i as f64, 1.0], 5.0 - i as f64)).collect();
    assert_eq!(elite_mean(&five, 0.2), vec![4.0, 1.0]);
    let mut ten: Vec<Particle> = (0..10).map(|i| particle(vec![10.0 + i as f64; 2], 10.0)).collect();
    ten[3] = particle(vec![0.0, 0.0], 1.0);
    ten[7] = particle(vec![2.0, 2.0], 2.0);
    assert_eq!(elite_mean(&ten, 0.2), vec![1.0, 1.0]);
    assert_eq!(elite_count(7, 0.2), 1);
    assert_eq!(elite_count(30, 0.2), 6);
    // ties resolved by index
    let tied: Vec<Particle> = (0..5).map(|i| particle(vec![i as f64], 0.0)).collect();
    assert_eq!(elite_mean(&tied, 0.2), vec![0.0]);
}

#[test]
fn decode_examples() {
    let space = HyperparamSpace::from_ranges(&[("N", 10.0, 2000.0, true), ("omega", 1e-4, 100.0, false)]).unwrap();
    let hp = decode_position(&space, &[1999.6, 69.583]);
    assert_eq!(hp.get("N").unwrap(), 2000.0);
    assert_eq!(hp.get("omega").unwrap(), 69.583);
    assert_eq!(decode_position(&space, &[10.0, 1.0]).get("N").unwrap(), 10.0);
    let once = space.snap(&[123.4, 5.5]);
    assert_eq!(space.snap(&once), once);
}

#[test]
fn invalid_space_rejected() {
    assert!(HyperparamSpace::from_ranges(&[("N", 10.0, 10.0, true)]).is_err());
    assert!(HyperparamSpace::from_ranges(&[("a", 0.0, 1.0, false), ("a", 0.0, 2.0, false)]).is_err());
    assert!(HyperparamSpace::new(vec![]).is_err());
}

#[test]
fn resting_particle_at_optimum_stays() {
    let space = HyperparamSpace::cube(3, -1.0, 1.0).unwrap();
    let config = MscPsoConfig { m: 1, t_max: 5, mutation_scale: 0.0, ..Default::default() };
    let mut swarm = SwarmState {
        particles: vec![particle(vec![0.0; 3], 0.0)],
        global_best: vec![0.0; 3],
        global_best_fval: 0.0,
        elite_mean: vec![0.0; 3],
        iteration: 0,
    };
    pso_iterate(&mut swarm, &space, &config, UpdateRule::Msc, &mut |x| sphere(x)).unwrap();
    assert_eq!(swarm.particles[0].position, vec![0.0; 3]);
    assert_eq!(swarm.global_best, vec![0.0; 3]);
}

#[test]
fn msc_without_strategies_is_vanilla() {
    let space = HyperparamSpace::cube(4, -2.0, 3.0).unwrap();
    let base = MscPsoConfig { m: 6, t_max: 10, seed: 77, ..Default::default() };
    let reduced = MscPsoConfig {
        eta_max: 0.7,
        eta_min: 0.7,
        c1_max: 1.5,
        c1_min: 1.5,
        c2_max: 1.5,
        c2_min: 1.5,
        c3: 0.0,
        mutation_scale: 0.0,
        ..base
    };
    let mut f = |x: &[f64]| sphere(x);
    let start = init_swarm(&space, &base, &mut f).unwrap();
    let (mut a, mut b) = (start.clone(), start);
    pso_iterate(&mut a, &space, &reduced, UpdateRule::Msc, &mut f).unwrap();
    pso_iterate(&mut b, &space, &reduced, UpdateRule::VANILLA, &mut f).unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_search_on_parabola() {
    let space = HyperparamSpace::cube(1, -1.0, 1.0).unwrap();
    let config = MscPsoConfig { m: 10, t_max: 100, seed: 3, ..Default::default() };
    let res = optimize(&space, &mut |x| x[0] * x[0], Algorithm::RandomSearch, &config).unwrap();
    assert!(res.best_fval <= 1e-3, "{}", res.best_fval);
    assert_eq!(res.trace.len(), 100);
}

#[test]
fn non_finite_fitness_is_infinite() {
    let space = HyperparamSpace::cube(2, -1.0, 1.0).unwrap();
    let config = MscPsoConfig { m: 4, t_max: 3, ..Default::default() };
    let res = optimize(&space, &mut |_| f64::NAN, Algorithm::MscPso, &config).unwrap();
    assert_eq!(res.best_fval, f64::INFINITY);
    assert!(res.trace.iter().all(|r| r.mean_fval.is_nan()));
}

#[test]
fn traces_are_reproducible() {
    let space = HyperparamSpace::cube(5, -3.0, 3.0).unwrap();
    for alg in Algorithm::ALL {
        let config = MscPsoConfig { m: 8, t_max: 15, seed: 11, ..Default::default() };
        let a = optimize(&space, &mut |x| sphere(x), alg, &config).unwrap();
        let b = optimize(&space, &mut |x| sphere(x), alg, &config).unwrap();
        assert_eq!(a, b);
        let mut csv = Vec::new();
        write_trace_csv(&a.trace, &space, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 16);
        assert!(text.starts_with("generation,best_fval,mean_fval,x1,x2,x3,x4,x5\n"));
    }
}

#[test]
fn sigma_decays_to_one_over_e() {
    // with all attraction terms zero the displacement is the mutation alone
    let space = HyperparamSpace::cube(1, -1e6, 1e6).unwrap();
    let t_max = 4;
    let mut moves = Vec::new();
    for seed in 0..2000u64 {
        let config = MscPsoConfig { m: 1, t_max, seed, ..Default::default() };
        let mut swarm = SwarmState {
            particles: vec![particle(vec![0.0], 0.0)],
            global_best: vec![0.0],
            global_best_fval: 0.0,
            elite_mean: vec![0.0],
            iteration: t_max - 1,
        };
        pso_iterate(&mut swarm, &space, &config, UpdateRule::Msc, &mut |_| 1.0).unwrap();
        moves.push(swarm.particles[0].position[0]);
    }
    let sd = (moves.iter().map(|m| m * m).sum::<f64>() / moves.len() as f64).sqrt();
    let want = space.sigma_max(0) * (-1.0f64).exp();
    assert!((sd / want - 1.0).abs() < 0.08, "{sd} vs {want}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn positions_and_velocities_stay_bounded(seed in 0u64..1000, alg in 0usize..2) {
        let space = HyperparamSpace::new(
            (0..12)
                .map(|j| SpaceDim { name: format!("p{j}"), lower: -(j as f64) - 1.0, upper: 2.0 * j as f64 + 0.5, integer: j % 3 == 0 })
                .collect(),
        )
        .unwrap();
        let config = MscPsoConfig { m: 6, t_max: 100, seed, ..Default::default() };
        let rule = if alg == 0 { UpdateRule::Msc } else { UpdateRule::VANILLA };
        let mut f = |x: &[f64]| x.iter().enumerate().map(|(j, v)| (v - j as f64 * 0.3).powi(2)).sum::<f64>();
        let mut swarm = init_swarm(&space, &config, &mut f).unwrap();
        let mut last = swarm.global_best_fval;
        for _ in 0..100 {
            pso_iterate(&mut swarm, &space, &config, rule, &mut f).unwrap();
            for p in &swarm.particles {
                for (j, d) in space.dims().iter().enumerate() {
                    prop_assert!(p.position[j] >= d.lower && p.position[j] <= d.upper);
                    prop_assert!(p.velocity[j].abs() <= space.v_max(j));
                }
            }
            prop_assert!(swarm.global_best_fval <= last);
            let min_personal = swarm.particles.iter().map(|p| p.best_fval).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(swarm.global_best_fval, min_personal);
            last = swarm.global_best_fval;
        }
    }
}
