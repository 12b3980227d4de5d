use nlaqkd_core::gaussian::homodyne_holevo_bound;
use nlaqkd_core::nla::amplified_output_variance;
use nlaqkd_core::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn lambda_weights_sum_to_one(alpha in 1e-6f64..=3.0) {
        let w = lambda_weights(alpha).unwrap();
        prop_assert!((w.sum() - 1.0).abs() < 1e-12, "sum {}", w.sum());
        prop_assert!(w.0.iter().all(|&l| l >= 0.0));
    }
}

proptest! {
    #[test]
    fn z_is_bounded_by_epr_correlation(alpha in 1e-4f64..=3.0) {
        let z = correlation_z(alpha);
        let v = 2.0 * alpha * alpha + 1.0;
        prop_assert!(z >= 0.0);
        prop_assert!(z <= (v * v - 1.0).sqrt() * (1.0 + 1e-14));
    }

    #[test]
    fn pure_states_have_unit_spectrum(v in 1.0f64..=100.0) {
        let cm = TwoModeCovariance::new(v, v, (v * v - 1.0).sqrt());
        let s = symplectic_eigenvalues(&cm).unwrap();
        prop_assert!((s.nu1 - 1.0).abs() < 1e-12, "{s:?}");
        prop_assert!((s.nu2 - 1.0).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn eigenvalue_product_is_determinant(a in 1.0f64..=50.0, b in 1.0f64..=50.0, frac in 0.0f64..=1.0) {
        let c = frac * (a * b - 1.0).sqrt();
        let cm = TwoModeCovariance::new(a, b, c);
        let s = symplectic_eigenvalues(&cm).unwrap();
        let det = a * b - c * c;
        prop_assert!(((s.nu1 * s.nu2 - det) / det).abs() < 1e-10, "{s:?} det {det}");
    }

    #[test]
    fn holevo_bound_is_nonnegative(va in 0.0f64..=1.0, t in 1e-6f64..=1.0, eps in 0.0f64..=0.1) {
        let p = ProtocolParams::from_modulation_variance(va, 0.8).unwrap();
        let ch = ChannelParams::new(t, eps).unwrap();
        let h = holevo_bound(&p, &ch).unwrap();
        prop_assert!(h.bits >= -1e-12, "{h:?}");
    }

    #[test]
    fn case_one_is_an_exact_rescaling(alpha in 0.05f64..=1.5, t in 1e-4f64..=1.0, frac in 0.0f64..=1.0) {
        let gain = 1.0 + frac * (t.sqrt().recip() - 1.0);
        let p = ProtocolParams::new(alpha, 0.8).unwrap();
        let ch = ChannelParams::new(t, 0.0).unwrap();
        let nla = NlaParams::with_gain(gain).unwrap();
        let amplified = nla_key_rate(&p, &ch, &nla).unwrap();
        let direct = key_rate(&p, &ChannelParams::new((gain * gain * t).min(1.0), 0.0).unwrap()).unwrap();
        prop_assert!((amplified.rate / nla.p_success() - direct.rate).abs() < 1e-12);
    }

    #[test]
    fn g_max_sits_on_the_physical_boundary(t in 1e-4f64..=0.99, eps in 1e-4f64..=0.2) {
        let ch = ChannelParams::new(t, eps).unwrap();
        let g = g_max(&ch);
        let at = equivalent_channel(&ch, g, 0.3);
        prop_assert!((at.eta - 1.0).abs() < 1e-9 || at.eps_g.abs() < 1e-12, "{at:?}");
        prop_assert!(at.physical);
        prop_assert!(!equivalent_channel(&ch, g * (1.0 + 1e-6), 0.3).physical);
    }

    #[test]
    fn unit_gain_limit_is_continuous(t in 1e-4f64..=1.0, eps in 0.0f64..=0.1) {
        let ch = ChannelParams::new(t, eps).unwrap();
        let exact = equivalent_channel(&ch, 1.0, 0.3);
        prop_assert_eq!(exact.eta, t);
        prop_assert_eq!(exact.eps_g, eps);
        // first-order drift: 2(g-1)T(1 + Tε) and -(g-1)Tε²
        let dg = 1e-8;
        let e = equivalent_channel(&ch, 1.0 + dg, 0.3);
        prop_assert!((e.eta - t * (1.0 + 2.0 * dg * (1.0 + t * eps))).abs() < 1e-12);
        prop_assert!((e.eps_g - (eps - dg * t * eps * eps)).abs() < 1e-12);
    }

    #[test]
    fn variance_condition_follows_from_eta_and_eps(alpha in 0.05f64..=1.0, t in 1e-3f64..=1.0, eps in 0.0f64..=0.1, frac in 0.0f64..=1.0) {
        let ch = ChannelParams::new(t, eps).unwrap();
        let gain = 1.0 + frac * (g_max(&ch) - 1.0);
        let p = ProtocolParams::new(alpha, 0.8).unwrap();
        let e = equivalent_channel(&ch, gain, alpha);
        let lhs = 1.0 + e.eta * e.eps_g + 2.0 * e.eta * e.alpha_g * e.alpha_g;
        prop_assert!((lhs - amplified_output_variance(&p, &ch, gain)).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn positive_rate_is_nonincreasing_in_loss(va in 0.05f64..=1.0, eps in 0.0f64..=0.05) {
        let p = ProtocolParams::from_modulation_variance(va, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=600 {
            let loss = 0.1 * i as f64;
            let ch = ChannelParams::new(loss_to_transmittance(loss), eps).unwrap();
            let r = key_rate(&p, &ch).unwrap().rate;
            if prev <= 0.0 {
                break;
            }
            prop_assert!(r <= prev + 1e-15, "loss {loss}: {r} > {prev}");
            prev = r;
        }
    }
}

#[test]
fn unphysical_covariance_has_no_holevo_value() {
    let h = homodyne_holevo_bound(&TwoModeCovariance::new(1.0, 1.0, 0.5)).unwrap();
    assert!(!h.physical);
    assert!(h.bits.is_nan());
}
