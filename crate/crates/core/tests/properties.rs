use benchnet::arch::{
    build_mlp, enumerate_layer_shapes, ArchSpec, CnnSpec, LayerDesc, MlpFamily, MlpSpec,
    ResidualSpec,
};
use benchnet::baselines::{fit_linear_regression, fit_random_forest, ForestParams};
use benchnet::data::{
    kendall_tau, run_pipeline, synthetic_dataset, CleanDataset, KendallTau, PipelineConfig,
    RawTable, SplitIndices, SplitSpec, SyntheticSpec,
};
use benchnet::harness::{compute_metrics, MetricsTriple};
use benchnet::model::Network;
use benchnet::nn::{
    conv1d_forward, dense_forward, residual_add, ActivationKind, Conv1dParams, DenseParams, Padding,
};
use benchnet::optim::{OptimizerConfig, OptimizerKind, OptimizerState};
use benchnet::Tensor;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn int_vec(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-5i32..5).prop_map(f64::from), len)
}

fn tau(x: &[f64], y: &[f64]) -> Option<f64> {
    kendall_tau(x, y).value()
}

proptest! {
    #[test]
    fn kendall_symmetric_and_bounded((x, y) in (2usize..40).prop_flat_map(|n| (int_vec(n..=n), int_vec(n..=n)))) {
        let a = tau(&x, &y);
        let b = tau(&y, &x);
        match (a, b) {
            (Some(a), Some(b)) => {
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&a));
            }
            (None, None) => {}
            _ => prop_assert!(false, "symmetry of undefined"),
        }
    }

    #[test]
    fn kendall_invariant_under_monotone_maps((x, y) in (2usize..40).prop_flat_map(|n| (int_vec(n..=n), int_vec(n..=n)))) {
        let fx: Vec<f64> = x.iter().map(|v| (v / 3.0).exp() + 7.0).collect();
        let fy: Vec<f64> = y.iter().map(|v| v * v * v - 2.0).collect();
        match (tau(&x, &y), tau(&fx, &fy)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (None, None) => {}
            other => prop_assert!(false, "{other:?}"),
        }
        // reversing one argument flips the sign
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        if let (Some(a), Some(b)) = (tau(&x, &y), tau(&x, &neg)) {
            prop_assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn split_is_a_partition(rows in 10usize..400, seed in any::<u64>()) {
        let s = SplitIndices::new(rows, &SplitSpec::new(seed)).unwrap();
        let n_test = (rows as f64 * 0.2).round() as usize;
        let n_val = ((rows - n_test) as f64 * 0.2).round() as usize;
        prop_assert_eq!(s.test.len(), n_test);
        prop_assert_eq!(s.validation.len(), n_val);
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..rows).collect::<Vec<_>>());
        prop_assert_eq!(s, SplitIndices::new(rows, &SplitSpec::new(seed)).unwrap());
    }

    #[test]
    fn dataset_csv_round_trip(
        rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..20),
        scale in 1e-12f64..1e12,
    ) {
        let features: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
        let target: Vec<f64> = rows.iter().map(|r| r[0] / scale).collect();
        let d = CleanDataset::from_numeric(features, target).unwrap();
        let back = CleanDataset::read_csv_from(d.to_csv_string().as_bytes()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn metric_means_lie_between_seed_extremes(
        seeds in prop::collection::vec((-1.0f64..1.0, 0.0f64..5.0, 0.0f64..5.0), 1..8),
    ) {
        let items: Vec<MetricsTriple> = seeds.iter().map(|&(r2, mae, mse)| MetricsTriple { r2: Some(r2), mae, mse }).collect();
        let mean = MetricsTriple::mean(&items).unwrap();
        let check = |f: &dyn Fn(&MetricsTriple) -> f64, m: f64| {
            let lo = items.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = items.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            lo - 1e-12 <= m && m <= hi + 1e-12
        };
        prop_assert!(check(&|m| m.r2.unwrap(), mean.r2.unwrap()));
        prop_assert!(check(&|m| m.mae, mean.mae));
        prop_assert!(check(&|m| m.mse, mean.mse));
    }

    #[test]
    fn metric_invariants(truth in prop::collection::vec(-10.0f64..10.0, 2..30), noise in prop::collection::vec(-1.0f64..1.0, 30)) {
        prop_assume!(truth.iter().any(|&t| t != truth[0]));
        let pred: Vec<f64> = truth.iter().zip(&noise).map(|(t, e)| t + e).collect();
        let m = compute_metrics(&pred, &truth).unwrap();
        prop_assert!(m.mse >= 0.0 && m.mae >= 0.0);
        prop_assert!(m.r2.unwrap() <= 1.0);
        prop_assert_eq!(m.r2 == Some(1.0), m.mse == 0.0);
        let exact = compute_metrics(&truth, &truth).unwrap();
        prop_assert_eq!(exact.r2, Some(1.0));
        let mean = truth.iter().sum::<f64>() / truth.len() as f64;
        let flat = compute_metrics(&vec![mean; truth.len()], &truth).unwrap();
        prop_assert_eq!(flat.r2, Some(0.0));
    }

    #[test]
    fn full_window_conv_equals_dense(len in 2usize..12, seed in any::<u64>()) {
        use rand::Rng;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..len).map(|_| r.gen_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..len).map(|_| r.gen_range(-1.0..1.0)).collect();
        let b: f64 = r.gen_range(-1.0..1.0);
        let conv = Conv1dParams::new(Tensor::new(vec![1, 1, len], w.clone()).unwrap(), Tensor::vector(vec![b]), 1, Padding::Valid).unwrap();
        let dense = DenseParams::new(Tensor::matrix(1, len, w).unwrap(), Tensor::vector(vec![b])).unwrap();
        let yc = conv1d_forward(&Tensor::new(vec![1, len], x.clone()).unwrap(), &conv).unwrap();
        let yd = dense_forward(&Tensor::vector(x), &dense).unwrap();
        // summation order differs between the two kernels
        prop_assert!((yc.data()[0] - yd.data()[0]).abs() < 1e-12);
    }

    #[test]
    fn residual_add_zero_is_identity(data in prop::collection::vec(-1e3f64..1e3, 1..32)) {
        let x = Tensor::vector(data.clone());
        let z = Tensor::zeros(&[data.len()]);
        prop_assert_eq!(residual_add(&x, &z).unwrap(), x);
    }

    #[test]
    fn legal_cnn_specs_build_or_reject_cleanly(
        hi in 2u32..9, depth in 1u32..5, k in 2usize..=5, stride in 1usize..=4, p in 2u32..8, q in 0u32..3,
    ) {
        let exps: Vec<u32> = (0..depth).filter_map(|i| hi.checked_sub(i)).collect();
        prop_assume!(exps.len() != 2 && !exps.is_empty() && *exps.last().unwrap() >= 1);
        let lo = p.saturating_sub(q).max(1);
        let spec = ArchSpec::Cnn(CnnSpec::new(&exps, k, stride, [p, lo], ActivationKind::Relu));
        match spec.build(24) {
            Ok(stack) => {
                let shapes = enumerate_layer_shapes(&stack, stack.input_shape()).unwrap();
                prop_assert_eq!(&shapes.last().unwrap().shape, &vec![1]);
                let net = Network::init(&stack, &mut ChaCha8Rng::seed_from_u64(0));
                prop_assert!(net.predict_row(&[0.5; 24]).unwrap().is_finite());
            }
            Err(e) => prop_assert!(matches!(e, benchnet::Error::Config(_)), "{e}"),
        }
    }
}

#[test]
fn forward_passes_are_pure() {
    let stack = ArchSpec::Residual(ResidualSpec::doubling(&[1], 6, 1))
        .build(8)
        .unwrap();
    let net = Network::init(&stack, &mut ChaCha8Rng::seed_from_u64(3));
    let x: Vec<f64> = (0..8).map(|i| i as f64 / 8.0).collect();
    assert_eq!(
        net.predict_row(&x).unwrap().to_bits(),
        net.predict_row(&x).unwrap().to_bits()
    );
}

#[test]
fn generators_are_deterministic_and_end_in_one_identity_unit() {
    let specs = [
        ArchSpec::Mlp(MlpSpec::new(
            MlpFamily::Trapezium,
            6,
            3,
            ActivationKind::Relu,
        )),
        ArchSpec::Mlp(MlpSpec::new(
            MlpFamily::Rectangular,
            5,
            2,
            ActivationKind::Sigmoid,
        )),
        ArchSpec::Cnn(CnnSpec::new(&[9, 7], 3, 1, [9, 5], ActivationKind::Tanh)),
        ArchSpec::Residual(ResidualSpec::doubling(&[2, 5, 5, 2], 8, 1)),
    ];
    for spec in specs {
        let a = spec.build(24).unwrap();
        assert_eq!(a, spec.build(24).unwrap());
        // no activation follows the output unit
        assert!(matches!(
            a.layers().last(),
            Some(LayerDesc::Dense { out_units: 1, .. })
        ));
    }
}

#[test]
fn trapezium_parameter_counts_decrease() {
    for n in 4..=11u32 {
        for m in 1..=10u32 {
            if n <= m + 1 {
                continue;
            }
            let stack = build_mlp(
                &MlpSpec::new(MlpFamily::Trapezium, n, m, ActivationKind::Relu),
                24,
            )
            .unwrap();
            let counts: Vec<usize> = stack
                .layers()
                .iter()
                .filter_map(|l| match l {
                    LayerDesc::Dense {
                        in_units,
                        out_units,
                    } => Some(in_units * out_units + out_units),
                    _ => None,
                })
                .collect();
            // hidden-to-hidden transitions, then the output unit
            for w in counts[1..].windows(2) {
                assert!(w[1] < w[0], "n={n} m={m}: {counts:?}");
            }
        }
    }
}

#[test]
fn optimizers_descend_a_quadratic_after_burn_in() {
    for kind in [
        OptimizerKind::Sgd,
        OptimizerKind::Rmsprop,
        OptimizerKind::Adam,
    ] {
        let mut state = OptimizerState::new(OptimizerConfig::new(kind), 1);
        let mut p = Tensor::vector(vec![0.0]);
        let loss = |p: f64| (p - 3.0) * (p - 3.0);
        let mut history = vec![loss(0.0)];
        for _ in 0..500 {
            let g = 2.0 * (p.data()[0] - 3.0);
            state.step(&mut p, &Tensor::vector(vec![g])).unwrap();
            history.push(loss(p.data()[0]));
        }
        for w in history[10..].windows(2) {
            assert!(w[1] <= w[0], "{kind}: {} -> {}", w[0], w[1]);
        }
        assert!(history[500] < history[0]);
    }
}

#[test]
fn optimizer_updates_stay_finite() {
    for kind in [
        OptimizerKind::Sgd,
        OptimizerKind::Rmsprop,
        OptimizerKind::Adam,
    ] {
        let mut state = OptimizerState::new(OptimizerConfig::new(kind), 3);
        let mut p = Tensor::vector(vec![0.0, 1.0, -1.0]);
        for g in [0.0, 1e-300, 1e300] {
            state.step(&mut p, &Tensor::vector(vec![g, -g, g])).unwrap();
            assert!(p.is_finite(), "{kind} with grad {g}");
        }
    }
}

fn fixture() -> RawTable {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/raw_results.csv"
    );
    RawTable::from_reader(std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn pipeline_row_and_column_accounting() {
    let raw = fixture();
    let out = run_pipeline(&raw, &PipelineConfig::default()).unwrap();
    let r = &out.report;
    assert!(out.dataset.n_rows() <= raw.row_count());
    assert_eq!(
        r.output_rows,
        raw.row_count() - r.outliers.zero_target_removed - r.outliers.unparseable_target_removed
    );
    let mut union: Vec<String> = r.correlation.retained.clone();
    union.extend(r.correlation.dropped.iter().map(|d| d.column.clone()));
    union.sort();
    let mut features = r.correlation.columns.clone();
    features.sort();
    assert_eq!(union, features);
    assert_eq!(
        out.dataset.column_names(),
        r.correlation
            .retained
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
    );
}

#[test]
fn pipeline_is_idempotent() {
    let once = run_pipeline(&fixture(), &PipelineConfig::default()).unwrap();
    let text = once.dataset.to_csv_string();
    let again = run_pipeline(
        &RawTable::from_reader(text.as_bytes()).unwrap(),
        &PipelineConfig::default(),
    )
    .unwrap();
    assert_eq!(again.dataset.to_csv_string(), text);
    assert!(again.report.correlation.dropped.is_empty());
    assert_eq!(again.report.outliers.removed.len(), 0);
}

#[test]
fn baselines_order_on_linear_and_nonlinear_data() {
    let linear = synthetic_dataset(&SyntheticSpec {
        rows: 400,
        interaction_share: 0.0,
        interactions: 0,
        noise: 0.0,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let lr = fit_linear_regression(&linear).unwrap();
    let pred: Vec<f64> = linear.features.iter().map(|r| lr.predict_row(r)).collect();
    assert!(compute_metrics(&pred, &linear.target).unwrap().r2.unwrap() >= 0.999);

    let data = synthetic_dataset(&SyntheticSpec {
        rows: 1500,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let split = benchnet::harness::prepare_split(&data, 1, false).unwrap();
    let lr = fit_linear_regression(&split.train).unwrap();
    let rf = fit_random_forest(
        &split.train,
        ForestParams {
            seed: 1,
            ..ForestParams::default()
        },
    )
    .unwrap();
    let score = |p: Vec<f64>| compute_metrics(&p, &split.test.target).unwrap().r2.unwrap();
    let lr_r2 = score(
        split
            .test
            .features
            .iter()
            .map(|r| lr.predict_row(r))
            .collect(),
    );
    let rf_r2 = score(
        split
            .test
            .features
            .iter()
            .map(|r| rf.predict_row(r))
            .collect(),
    );
    assert!(rf_r2 > lr_r2, "rf {rf_r2} lr {lr_r2}");
}

#[test]
fn constant_column_tau_is_undefined() {
    assert_eq!(
        kendall_tau(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
        KendallTau::Undefined
    );
}
