mod common;

use benchnet::nn::{ActivationKind, LossKind, Padding};
use common::gradcheck::*;
use proptest::prelude::*;

fn cfg() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

fn ok(c: Check) -> Result<(), TestCaseError> {
    c.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn dense(seed in any::<u64>()) {
        ok(check_dense(seed))?;
    }

    #[test]
    fn conv_valid_stride_1(seed in any::<u64>()) {
        ok(check_conv(seed, 1, Padding::Valid))?;
    }

    #[test]
    fn conv_valid_stride_2(seed in any::<u64>()) {
        ok(check_conv(seed, 2, Padding::Valid))?;
    }

    #[test]
    fn conv_same_stride_1(seed in any::<u64>()) {
        ok(check_conv(seed, 1, Padding::Same))?;
    }

    #[test]
    fn activations(seed in any::<u64>()) {
        for kind in ActivationKind::ALL {
            ok(check_activation(seed, kind))?;
        }
    }

    #[test]
    fn residual_add(seed in any::<u64>()) {
        ok(check_residual_add(seed))?;
    }

    #[test]
    fn flatten(seed in any::<u64>()) {
        ok(check_flatten(seed))?;
    }

    #[test]
    fn losses(seed in any::<u64>()) {
        ok(check_loss(seed, LossKind::Mse))?;
        ok(check_loss(seed, LossKind::Mae))?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn mlp_network(seed in any::<u64>()) {
        ok(check_network(seed, 0))?;
    }

    #[test]
    fn cnn_network(seed in any::<u64>()) {
        ok(check_network(seed, 1))?;
    }

    #[test]
    fn residual_network(seed in any::<u64>()) {
        ok(check_network(seed, 2))?;
    }
}
