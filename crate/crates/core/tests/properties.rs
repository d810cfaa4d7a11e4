use itq_load::itq::{
    compute_reward, run_itq_with, update_knowledge, ItqConfig, KnowledgeMatrixSet, Transition,
};
use itq_load::model::{self, CompositeParams, PARAM_COUNT};
use itq_load::scenario::{builtin_scenario, synthesize_measurements, ScenarioSpec};
use itq_load::space::{self, build_grid, ActionChain, Bounds, DEFAULT_RANGES};
use itq_load::transfer::{
    curve_similarity, discrete_frechet, transfer_init, Point, SourceTaskRecord, TransferMode,
};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

fn curve(max_len: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec([coord(), coord()], 1..=max_len)
}

fn dist(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Exhaustive search over monotone couplings.
fn brute_frechet(a: &[Point], b: &[Point], i: usize, j: usize) -> f64 {
    let d = dist(&a[i], &b[j]);
    if i + 1 == a.len() && j + 1 == b.len() {
        return d;
    }
    let mut best = f64::INFINITY;
    if i + 1 < a.len() {
        best = best.min(brute_frechet(a, b, i + 1, j));
    }
    if j + 1 < b.len() {
        best = best.min(brute_frechet(a, b, i, j + 1));
    }
    if i + 1 < a.len() && j + 1 < b.len() {
        best = best.min(brute_frechet(a, b, i + 1, j + 1));
    }
    d.max(best)
}

fn param_vector() -> impl Strategy<Value = [f64; PARAM_COUNT]> {
    let ranges: Vec<_> = DEFAULT_RANGES.iter().map(|&(lo, hi)| lo..=hi).collect();
    ranges.prop_map(|v| v.try_into().expect("13 ranges"))
}

fn short_series(params: CompositeParams) -> Option<itq_load::MeasurementSeries> {
    let mut spec: ScenarioSpec = builtin_scenario("S1").unwrap();
    spec.truth = params;
    synthesize_measurements(&spec, 1.6, 0.01).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dq_currents_linear_in_mismatch(
        r_s in 0.01..0.3f64, x_p in 0.05..1.0f64,
        u_d in coord(), u_q in coord(), e_d in coord(), e_q in coord(), k in -3.0..3.0f64,
    ) {
        let (i_d, i_q) = model::dq_currents(r_s, x_p, u_d, u_q, e_d, e_q).unwrap();
        let (j_d, j_q) = model::dq_currents(r_s, x_p, e_d + k * (u_d - e_d), e_q + k * (u_q - e_q), e_d, e_q).unwrap();
        prop_assert!((j_d - k * i_d).abs() < 1e-9 && (j_q - k * i_q).abs() < 1e-9);
    }

    #[test]
    fn dq_quantities_rotate_together(
        r_s in 0.01..0.3f64, x_p in 0.05..1.0f64,
        u_d in coord(), u_q in coord(), e_d in coord(), e_q in coord(), angle in 0.0..6.3f64,
    ) {
        let rot = |x: f64, y: f64| (x * angle.cos() - y * angle.sin(), x * angle.sin() + y * angle.cos());
        let (i_d, i_q) = model::dq_currents(r_s, x_p, u_d, u_q, e_d, e_q).unwrap();
        let (ru_d, ru_q) = rot(u_d, u_q);
        let (re_d, re_q) = rot(e_d, e_q);
        let (ri_d, ri_q) = model::dq_currents(r_s, x_p, ru_d, ru_q, re_d, re_q).unwrap();
        let (ei_d, ei_q) = rot(i_d, i_q);
        prop_assert!((ri_d - ei_d).abs() < 1e-9 && (ri_q - ei_q).abs() < 1e-9);

        let (p, q) = model::im_power(u_d, u_q, i_d, i_q);
        let (rp, rq) = model::im_power(ru_d, ru_q, ri_d, ri_q);
        prop_assert!((p - rp).abs() < 1e-9 && (q - rq).abs() < 1e-9);
    }

    #[test]
    fn zip_nominal_identity(a_p in 0.0..1.0f64, b_p in 0.0..1.0f64, a_q in 0.0..1.0f64, b_q in 0.0..1.0f64,
                            p0 in 0.1..2.0f64, q0 in -1.0..1.0f64, v0 in 0.5..1.5f64) {
        let zip = model::ZipParams::new(a_p, b_p, a_q, b_q);
        let (p, q) = model::zip_power(&zip, p0, q0, v0, v0).unwrap();
        prop_assert!((p - p0).abs() <= 1e-15 * p0.abs().max(1.0));
        prop_assert!((q - q0).abs() <= 1e-15 * q0.abs().max(1.0));
    }

    #[test]
    fn frechet_matches_exhaustive_search(a in curve(7), b in curve(7)) {
        let dp = discrete_frechet(&a, &b).unwrap();
        prop_assert_eq!(dp, brute_frechet(&a, &b, 0, 0));
        prop_assert_eq!(dp, discrete_frechet(&b, &a).unwrap());
        let forced = dist(&a[0], &b[0]).max(dist(a.last().unwrap(), b.last().unwrap()));
        prop_assert!(dp >= forced);
    }

    #[test]
    fn frechet_zero_iff_identical(a in curve(8), b in curve(8)) {
        prop_assert_eq!(discrete_frechet(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(curve_similarity(&a, &a).unwrap(), 1.0);
        // Consecutive repeats do not change the distance.
        let dedup = |c: &[Point]| { let mut v = c.to_vec(); v.dedup(); v };
        prop_assert_eq!(discrete_frechet(&a, &b).unwrap() == 0.0, dedup(&a) == dedup(&b));
        let s = curve_similarity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn encode_decode_identity(chain in prop::collection::vec(0usize..100, PARAM_COUNT)) {
        let grid = build_grid(100).unwrap();
        let chain = ActionChain(chain);
        let values = grid.values(&chain).unwrap();
        prop_assert_eq!(grid.encode_values(&values).unwrap(), chain);
    }

    #[test]
    fn decode_strictly_increasing(var in 0usize..PARAM_COUNT, i in 0usize..99) {
        let grid = build_grid(100).unwrap();
        prop_assert!(grid.point(var, i) < grid.point(var, i + 1));
    }

    #[test]
    fn reward_positive_iff_not_worse(f_prev in 0.0..10.0f64, f_new in 0.0..10.0f64, w in 0.1..5.0f64) {
        prop_assert_eq!(compute_reward(f_prev, f_new, w) > 0.0, f_new <= f_prev);
    }

    #[test]
    fn update_touches_only_visited_cells(chain in prop::collection::vec(0usize..6, PARAM_COUNT),
                                         first in 0usize..6, reward in 0.1..5.0f64) {
        let mut q = KnowledgeMatrixSet::zeros(PARAM_COUNT, 6);
        let before = q.clone();
        let t = Transition::from_chain(first, &ActionChain(chain));
        update_knowledge(&mut q, &t, reward, 0.1, 0.2);
        let changed = q.as_slice().iter().zip(before.as_slice()).filter(|(a, b)| a != b).count();
        prop_assert_eq!(changed, PARAM_COUNT);
    }

    #[test]
    fn weighted_transfer_is_linear(a in prop::collection::vec(-2.0..2.0f64, PARAM_COUNT * 9),
                                   b in prop::collection::vec(-2.0..2.0f64, PARAM_COUNT * 9),
                                   r1 in 0.0..1.0f64, r2 in 0.0..1.0f64, k in 0.0..3.0f64) {
        let rec = |data: Vec<f64>, name: &str| source(name, KnowledgeMatrixSet::from_raw(PARAM_COUNT, 3, data).unwrap());
        let srcs = [rec(a.clone(), "a"), rec(b.clone(), "b")];
        let q = transfer_init(&srcs, &[r1, r2], TransferMode::WeightedSum, false).unwrap();
        for (i, v) in q.as_slice().iter().enumerate() {
            prop_assert!((v - (r1 * a[i] + r2 * b[i])).abs() < 1e-12);
        }
        let scaled: Vec<f64> = a.iter().map(|x| k * x).collect();
        let qs = transfer_init(&[rec(scaled, "a")], &[r1], TransferMode::WeightedSum, false).unwrap();
        let qa = transfer_init(&srcs[..1], &[r1], TransferMode::WeightedSum, false).unwrap();
        for (x, y) in qs.as_slice().iter().zip(qa.as_slice()) {
            prop_assert!((x - k * y).abs() < 1e-12);
        }
    }

    #[test]
    fn single_source_scaling_preserves_argmax(data in prop::collection::vec(-2.0..2.0f64, PARAM_COUNT * 16),
                                              r in 0.01..5.0f64) {
        let src = source("a", KnowledgeMatrixSet::from_raw(PARAM_COUNT, 4, data).unwrap());
        let q = transfer_init(std::slice::from_ref(&src), &[r], TransferMode::WeightedSum, false).unwrap();
        for var in 0..PARAM_COUNT {
            for s in 0..4 {
                prop_assert_eq!(q.argmax(var, s), src.knowledge.argmax(var, s));
            }
        }
        prop_assert_eq!(q.greedy_chain(0), src.knowledge.greedy_chain(0));
    }
}

fn source(name: &str, knowledge: KnowledgeMatrixSet) -> SourceTaskRecord {
    let bins = knowledge.bins();
    SourceTaskRecord {
        name: name.into(),
        signature: short_series(builtin_scenario("S1").unwrap().truth).unwrap(),
        knowledge,
        best_params: vec![],
        best_fitness: 0.0,
        grid: build_grid(bins).unwrap(),
        config: ItqConfig::prelearning(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fitness_nonnegative_and_zero_at_truth(v in param_vector()) {
        let params = CompositeParams::from_vector(&v);
        if let Some(series) = short_series(params) {
            prop_assert!(space::fitness(&params, &series).value.abs() < 1e-12);
            let mut other = v;
            other[10] = if v[10] < 1.0 { v[10] + 0.5 } else { v[10] - 0.4 };
            let f = space::fitness(&CompositeParams::from_vector(&other), &series);
            prop_assert!(f.value >= 0.0);
        }
    }

    #[test]
    fn lm_gradient_matches_scalar_central_difference(v in param_vector()) {
        let params = CompositeParams::from_vector(&v);
        let Some(series) = short_series(params) else { return Ok(()) };
        // Measure against a shifted truth so the gradient is not zero.
        let mut x = v.to_vec();
        x[6] = (x[6] + 0.05).min(0.9);
        x[7] = (x[7] - 0.05).max(0.1);
        let bounds = Bounds::load_model();
        let res = |p: &[f64]| space::residuals(&CompositeParams::from_slice(p).ok()?, &series);
        let Some(g) = itq_load::baselines::lm_gradient(&res, &x, &bounds, 1e-6) else { return Ok(()) };
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        for i in 0..PARAM_COUNT {
            let h = 1e-6 * (bounds.hi[i] - bounds.lo[i]);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] = (x[i] + h).min(bounds.hi[i]);
            xm[i] = (x[i] - h).max(bounds.lo[i]);
            let fd = (space::fitness_of_vector(&xp, &series) - space::fitness_of_vector(&xm, &series)) / (xp[i] - xm[i]);
            prop_assert!((g[i] - fd).abs() <= 1e-4 * norm.max(1e-12), "component {}: {} vs {}", i, g[i], fd);
        }
    }

    #[test]
    fn itq_trace_is_monotone_on_random_quadratics(centre in prop::collection::vec(0.0..1.0f64, PARAM_COUNT), seed in 0u64..1000) {
        let grid = build_grid(12).unwrap();
        let bounds = grid.bounds();
        let target: Vec<f64> = centre.iter().enumerate().map(|(i, c)| bounds.lo[i] + c * (bounds.hi[i] - bounds.lo[i])).collect();
        let obj = |x: &[f64]| x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut cfg = ItqConfig::prelearning().with_seed(seed);
        cfg.k_max = 40;
        cfg.population = 8;
        let r = run_itq_with(&obj, &grid, &cfg, KnowledgeMatrixSet::for_grid(&grid)).unwrap();
        prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*r.trace.last().unwrap(), r.best_fitness);
        prop_assert!(bounds.contains(&r.best_position));
    }
}

#[test]
fn noise_statistics_match_configured_sigma() {
    let mut spec = builtin_scenario("S2").unwrap();
    let clean = synthesize_measurements(&spec, 100.0, 0.01).unwrap();
    spec.noise_std = 0.01;
    let noisy = synthesize_measurements(&spec, 100.0, 0.01).unwrap();
    assert!(noisy.len() >= 10_000);
    for (n, c) in [(&noisy.p, &clean.p), (&noisy.q, &clean.q)] {
        let d: Vec<f64> = n.iter().zip(c.iter()).map(|(a, b)| a - b).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        assert!((var.sqrt() / 0.01 - 1.0).abs() < 0.05, "std {}", var.sqrt());
    }
    assert_eq!(noisy.v, clean.v);
}

#[test]
fn generated_series_satisfy_invariants_and_are_deterministic() {
    for name in ["S1", "S2", "S3", "S4", "S5"] {
        let mut spec = builtin_scenario(name).unwrap();
        spec.noise_std = 0.005;
        let a = synthesize_measurements(&spec, 5.0, 0.01).unwrap();
        a.validate().unwrap();
        assert!(a.v.iter().all(|&v| v > 0.0 && v <= a.v0));
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        synthesize_measurements(&spec, 5.0, 0.01).unwrap().write_csv(&mut y).unwrap();
        assert_eq!(x, y);
    }
}

#[test]
fn grid_roundtrip_exhaustive_small_bins() {
    for bins in 2..=5 {
        let grid = build_grid(bins).unwrap();
        for var in 0..PARAM_COUNT {
            for i in 0..bins {
                let mut chain = vec![0; PARAM_COUNT];
                chain[var] = i;
                let chain = ActionChain(chain);
                assert_eq!(grid.encode_values(&grid.values(&chain).unwrap()).unwrap(), chain);
            }
        }
    }
}
