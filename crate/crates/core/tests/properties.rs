//! Randomized invariants. Query sequences are drawn from a ChaCha stream keyed
//! by a proptest-chosen seed, so every failure shrinks to a reproducible seed.

use lowbit_core::bit_adversary::BitAdversary;
use lowbit_core::bounds::{bit_floor, dir_floor};
use lowbit_core::dir_adversary::DirAdversary;
use lowbit_core::geometry::{
    dot, norm_l1, orthant_of, separates_strictly, support_inf_ball, BoxRegion, InfBall, OrthantLabel, WitnessSet,
};
use lowbit_core::mixed::{centered, fiber_index, fiber_point, MixedAdversary};
use lowbit_core::oracle::{bit_of, evaluate_query, reconstruct_from_bits, Query, SeparationOracle};
use lowbit_core::solvers::{
    default_bits, ellipsoid_solve, CutEffect, Ellipsoid, HonestOracle, ReconMode, SolveParams, SolverOutcome,
};
use lowbit_core::verifier::{answers_match, check_transcript};
use lowbit_core::ContinuousAdversary;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;
const RHO: f64 = 1e-4;

fn uniform_in(rng: &mut ChaCha8Rng, b: &BoxRegion) -> Vec<f64> {
    b.center.iter().map(|c| c + rng.random_range(-b.radius..b.radius)).collect()
}

fn vec_strategy(d: usize, lim: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-lim..lim, d)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn support_matches_corner_maximum(
        (c, a) in (1usize..6).prop_flat_map(|d| (vec_strategy(d, 3.0), vec_strategy(d, 3.0))),
        r in 0.01f64..2.0,
    ) {
        let ball = InfBall::new(c, r).unwrap();
        let s = support_inf_ball(&ball, &a).unwrap();
        let brute = ball.corners().map(|z| dot(&a, &z)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((s - brute).abs() <= 1e-12 * (1.0 + brute.abs()));
    }

    #[test]
    fn strict_separation_is_monotone_in_tol(
        (a, z, c) in (1usize..6).prop_flat_map(|d| (vec_strategy(d, 2.0), vec_strategy(d, 2.0), vec_strategy(d, 2.0))),
        r in 0.01f64..1.0,
        t1 in 0.0f64..1e-3,
        extra in 0.0f64..1e-3,
    ) {
        let w = WitnessSet::from_ball(InfBall::new(c, r).unwrap());
        if separates_strictly(&a, &z, &w, t1 + extra).unwrap() {
            prop_assert!(separates_strictly(&a, &z, &w, t1).unwrap());
        }
    }

    #[test]
    fn sub_box_points_keep_their_orthant(d in 1usize..10, idx in any::<u64>(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let anchor: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let universe = BoxRegion::new(anchor.clone(), rng.random_range(0.1..2.0)).unwrap();
        let label = OrthantLabel::from_index(d, idx % (1u64 << d));
        let sub = universe.orthant_sub_box(&label);
        let y = uniform_in(&mut rng, &sub);
        prop_assert_eq!(orthant_of(&y, &anchor), label);
        prop_assert!(universe.contains(&y));
    }

    #[test]
    fn bit_expansion_round_trips(x in -1.0f64..=1.0, b in 1u32..60) {
        let bits: Vec<u8> = (0..=b).map(|i| bit_of(x, i).unwrap()).collect();
        let y = reconstruct_from_bits(&bits);
        prop_assert!((x - y).abs() <= libm::scalbn(1.0, -(b as i32)), "x {} y {}", x, y);
        prop_assert!(y.abs() <= x.abs());
    }

    #[test]
    fn bit_adversary_map_is_coherent(d in 1usize..10, len in 1usize..80, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adv = BitAdversary::new(d, 1.0).unwrap();
        let mut asked: Vec<Vec<f64>> = Vec::new();
        // Past the floor the boxes shrink below the tolerance scale.
        let len = len.min(bit_floor(0, d, 1.0, RHO) as usize - 1);
        for _ in 0..len {
            // Mostly in the current box, sometimes anywhere (face answers), sometimes repeats.
            let p = match rng.random_range(0..10) {
                0 => (0..d).map(|_| rng.random_range(-1.5..1.5)).collect(),
                1 if !asked.is_empty() => asked[rng.random_range(0..asked.len())].clone(),
                _ => uniform_in(&mut rng, &adv.current_box()),
            };
            let q = if rng.random_bool(0.5) {
                Query::Coord { j: rng.random_range(0..d) }
            } else {
                Query::Bit { i: rng.random_range(0..8), j: rng.random_range(0..d) }
            };
            adv.query(&p, &q).unwrap();
            asked.push(p);
        }
        let (b1, b2) = adv.witness_balls(RHO).unwrap();
        for rec in &adv.transcript().records {
            let g = rec.realized_normal.as_ref().expect("realized after witnesses");
            prop_assert_eq!(evaluate_query(&rec.query, g).unwrap(), rec.answer);
        }
        for b in [b1, b2] {
            prop_assert!(check_transcript(adv.transcript(), &WitnessSet::from_ball(b), TOL).is_ok());
        }
    }

    #[test]
    fn dir_commits_are_orthonormal(d in 2usize..9, len in 1usize..60, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adv = DirAdversary::new(d, 1.0, TOL).unwrap();
        let len = len.min(dir_floor(0, d, 1.0, RHO) as usize - 1);
        for _ in 0..len {
            let p = uniform_in(&mut rng, &adv.current_box());
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let q = if rng.random_bool(0.5) { Query::Inner { v } } else { Query::SignInner { v } };
            adv.query(&p, &q).unwrap();
        }
        let (b1, b2) = adv.witness_balls(RHO).unwrap();
        let mut stages: Vec<Vec<Vec<f64>>> = adv.history().iter().map(|s| s.committed.clone()).collect();
        stages.push(adv.state().committed.clone());
        for committed in stages {
            prop_assert!(committed.len() <= d / 2 + 1);
            for (i, a) in committed.iter().enumerate() {
                for (j, b) in committed.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((dot(a, b) - want).abs() <= 1e-9);
                }
            }
        }
        for rec in &adv.transcript().records {
            let g = rec.realized_normal.as_ref().expect("realized after witnesses");
            prop_assert!(answers_match(&rec.query, g, &rec.answer, TOL));
        }
        for b in [b1, b2] {
            prop_assert!(check_transcript(adv.transcript(), &WitnessSet::from_ball(b), TOL).is_ok());
        }
    }

    #[test]
    fn central_cut_shrinks_volume(
        d in 2usize..12,
        seed in any::<u64>(),
        cuts in 1usize..20,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = Ellipsoid::ball(vec![0.0; d], 1.0);
        let bound = -1.0 / (2.0 * (d as f64 + 1.0));
        for _ in 0..cuts {
            let g: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let depth = rng.random_range(0.0..0.5);
            let offset = dot(&g, &e.center) - depth * dot(&g, &e.shape.mul_vec(&g)).sqrt();
            let before = e.log_volume();
            prop_assert_eq!(e.cut(&g, offset), CutEffect::Applied);
            let change = e.log_volume() - before;
            prop_assert!(change <= bound + 1e-6 * bound.abs(), "change {} bound {}", change, bound);
            // Tracked log-determinant agrees with the factorization.
            let l = e.shape.cholesky().expect("positive definite");
            let logdet: f64 = (0..d).map(|i| 2.0 * l[i * d + i].ln()).sum();
            prop_assert!((logdet - e.log_det).abs() <= 1e-6 * (1.0 + logdet.abs()));
        }
    }

    #[test]
    fn honest_solver_is_sound(d in 1usize..7, seed in any::<u64>(), bits_mode in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r, rho) = (1.0, 1e-2);
        let center: Vec<f64> = (0..d).map(|_| rng.random_range(-(r - rho)..(r - rho))).collect();
        let ball = InfBall::new(center, rho).unwrap();
        let mode = if bits_mode { ReconMode::Bits { bits: default_bits(r, d, rho) } } else { ReconMode::Coord };
        let mut o = HonestOracle::planted(vec![], ball.clone());
        let mut cuts = Vec::new();
        let rep = ellipsoid_solve(&mut o, &[], d, &SolveParams::new(r, rho, mode), Some(&mut cuts)).unwrap();
        let SolverOutcome::Feasible { point } = &rep.outcome else {
            return Err(TestCaseError::fail(format!("{:?}", rep.outcome)));
        };
        prop_assert!(o.contains(point));
        prop_assert_eq!(rep.queries, o.queries_made());
        if mode == ReconMode::Coord {
            prop_assert_eq!(rep.queries, d * rep.cuts + 1);
        }
        // No cut ever severs the planted ball.
        for c in &cuts {
            prop_assert!(ball.corners().all(|z| dot(&c.normal, &z) <= c.offset + 1e-12));
        }
    }

    #[test]
    fn lifted_answers_keep_all_three_conditions(
        n in 1usize..3,
        d in prop::sample::select(vec![2usize, 4]),
        len in 1usize..40,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = 1.0;
        let mut adv = MixedAdversary::new(n, d, r, TOL, || BitAdversary::new(d, r)).unwrap();
        for _ in 0..len {
            let x: Vec<f64> = (0..n)
                .map(|_| if rng.random_bool(0.3) { rng.random_range(0.05..0.95) } else { f64::from(rng.random_range(0..2u8)) })
                .collect();
            let mut p = x;
            p.extend((0..d).map(|_| rng.random_range(-r..r)));
            adv.query(&p, &Query::Coord { j: rng.random_range(0..n + d) }).unwrap();
        }
        adv.finalize().unwrap();
        let t = adv.transcript();
        for lift in adv.lifts() {
            let rec = &t.records[lift.index];
            let g = rec.realized_normal.as_ref().expect("finalized");
            let (xh, yh) = rec.point.split_at(n);
            let ahat = adv.fibers()[lift.fiber].transcript().records[lift.inner_index].realized_normal.clone().unwrap();
            // (1) the continuous block is the fiber normal
            prop_assert_eq!(&g[n..], ahat.as_slice());
            let level = dot(g, &rec.point);
            // (2) every feasible-reported point stays strictly feasible
            for z in &adv.ctx().feasible {
                prop_assert!(dot(g, z) < level - TOL);
            }
            // (3) every other integral fiber's slab lies strictly inside the halfspace
            let atilde = centered(xh);
            let m = lift.m;
            let slabs_inside = (0..1usize << n).all(|f| {
                let x = fiber_point(n, f);
                x == xh || m * dot(&atilde, &x) + r * norm_l1(&ahat) < m * dot(&atilde, xh) + dot(&ahat, yh) - TOL
            });
            prop_assert!(slabs_inside);
            prop_assert_eq!(lift.fiber, fiber_index(&xh.iter().map(|v| *v as u8).collect::<Vec<_>>()));
        }
    }
}
