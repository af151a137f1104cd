use gprice::bsde::{predict_prices, PricingInput};
use gprice::error::Result;
use gprice::evaluation::metrics;
use gprice::nets::{Architecture, NetConfig};
use gprice::rng;
use gprice::xai::{
    evaluate_ablation, integrated_gradients, shapley_two_player, AblationConfig, FeatureGroup,
    LinearProbe, ModelView, PriceView, IG_STEPS,
};
use gprice::OptionKind;
use proptest::prelude::*;

struct Square;

impl ModelView for Square {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, p: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(p.iter().map(|x| x[0] * x[0]).collect())
    }
    fn grad(&self, p: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        Ok(p.iter().map(|x| vec![2.0 * x[0]]).collect())
    }
}

fn all(d: usize) -> Vec<FeatureGroup> {
    vec![FeatureGroup { name: "all".into(), features: 0..d }]
}

fn net(seed: u64) -> (Architecture, Vec<f64>) {
    let cfg = NetConfig {
        expansion_width: 8,
        hidden: vec![16, 12],
        dropout: 0.1,
        price_scale: 100.0,
        ..NetConfig::value()
    };
    let arch = Architecture::value(cfg).unwrap();
    let mut p = arch.init_params(seed, 0.8);
    let mut r = rng::stream(seed, &[3]);
    p.iter_mut().for_each(|v| *v += 0.2 * rng::standard_normal(&mut r));
    (arch, p)
}

fn contracts(n: usize, seed: u64) -> Vec<PricingInput> {
    let mut r = rng::stream(seed, &[4]);
    (0..n)
        .map(|i| {
            let x0 = 4000.0 * (1.0 + 0.05 * rng::standard_normal(&mut r));
            PricingInput {
                x0,
                strike: 4000.0,
                tau: 0.1 + 0.2 * rng::uniform_open(&mut r),
                rate: 0.0,
                kind: if i % 2 == 0 { OptionKind::Call } else { OptionKind::Put },
                sigma_steps: (0..6).map(|_| 0.15 + 0.1 * rng::uniform_open(&mut r)).collect(),
                sentiment: [0.3, -0.1, 0.2, 1.0, 0.6],
                label: 50.0 + 100.0 * rng::uniform_open(&mut r),
            }
        })
        .collect()
}

#[test]
fn linear_probe_is_exact_for_any_step_count() {
    let f = LinearProbe { w: vec![0.3, -1.7, 2.9, 1e-3], b: 0.4 };
    let x = [1.5, -2.0, 0.1, 7.0];
    let base = [0.2, 0.0, -0.3, 7.0];
    for m in [1, 2, 3, 7, 10, 33] {
        let r = integrated_gradients(&f, &x, &base, m, &all(4)).unwrap();
        for i in 0..4 {
            assert_eq!(r.attributions[i], f.w[i] * (x[i] - base[i]), "m={m} i={i}");
        }
    }
}

#[test]
fn square_midpoint_rule() {
    let r = integrated_gradients(&Square, &[1.0], &[0.0], IG_STEPS, &all(1)).unwrap();
    assert!((r.attributions[0] - 1.0).abs() < 1e-3);
    assert_eq!(r.delta, 1.0);
    assert_eq!(r.shares, vec![1.0]);
}

#[test]
fn baseline_input_attributes_nothing() {
    let (arch, p) = net(1);
    let c = &contracts(1, 1)[0];
    let view = PriceView::new(&arch, &p, c);
    let x = view.point(0.23, 0.8);
    let groups = [
        FeatureGroup { name: "rv".into(), features: 0..1 },
        FeatureGroup { name: "sent".into(), features: 1..view.dim() },
    ];
    let r = integrated_gradients(&view, &x, &x, IG_STEPS, &groups).unwrap();
    assert!(r.attributions.iter().all(|&a| a == 0.0));
    assert_eq!(r.shares, vec![0.0, 0.0]);
}

#[test]
fn ungrouped_features_must_match() {
    let f = LinearProbe { w: vec![1.0, 1.0], b: 0.0 };
    let one = [FeatureGroup { name: "a".into(), features: 0..1 }];
    assert!(integrated_gradients(&f, &[1.0, 1.0], &[0.0, 0.0], 10, &one).is_err());
    assert!(integrated_gradients(&f, &[1.0, 1.0], &[0.0, 1.0], 10, &one).is_ok());
}

#[test]
fn price_view_matches_the_pricer_and_finite_differences() {
    let (arch, p) = net(2);
    let cs = contracts(3, 2);
    let prices = predict_prices(&arch, &p, &cs, None).unwrap();
    for (c, &price) in cs.iter().zip(&prices) {
        let view = PriceView::new(&arch, &p, c);
        let x = view.point(c.sigma_steps[0], p[arch.gate_index()]);
        let y = view.eval(&[x.clone()]).unwrap()[0];
        assert!((y - price).abs() <= 1e-12 * price.abs().max(1.0));
        let g = &view.grad(&[x.clone()]).unwrap()[0];
        for i in [0, 1, 5] {
            let h = 1e-5;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (view.eval(&[xp]).unwrap()[0] - view.eval(&[xm]).unwrap()[0]) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-5 * fd.abs().max(1.0), "feature {i}: {fd} vs {}", g[i]);
        }
    }
}

#[test]
fn network_completeness_at_ten_steps() {
    let (arch, p) = net(3);
    for c in &contracts(4, 3) {
        let view = PriceView::new(&arch, &p, c);
        let x = view.point(c.sigma_steps[0], 0.8);
        let base = view.point(0.2, 0.0);
        let groups = [
            FeatureGroup { name: "rv".into(), features: 0..1 },
            FeatureGroup { name: "sent".into(), features: 1..view.dim() },
        ];
        let r = integrated_gradients(&view, &x, &base, IG_STEPS, &groups).unwrap();
        assert!(r.completeness_gap <= 1e-2 * r.delta.abs(), "{} vs {}", r.completeness_gap, r.delta);
        assert!((r.shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn full_ablation_is_the_standard_evaluation() {
    let (arch, p) = net(4);
    let cs = contracts(20, 4);
    let labels: Vec<f64> = cs.iter().map(|c| c.label).collect();
    let standard = metrics(&labels, &predict_prices(&arch, &p, &cs, None).unwrap()).unwrap().mae;
    let full = evaluate_ablation(&arch, &p, &cs, AblationConfig::FULL).unwrap();
    assert_eq!(full.to_bits(), standard.to_bits());
    let maes: Vec<f64> = AblationConfig::ALL
        .iter()
        .map(|&a| evaluate_ablation(&arch, &p, &cs, a).unwrap())
        .collect();
    assert!(maes.windows(2).any(|w| w[0] != w[1]));
}

#[test]
fn gate_zero_model_ignores_sentiment_mode() {
    let (arch, mut p) = net(5);
    p[arch.gate_index()] = 0.0;
    let cs = contracts(10, 5);
    let on = evaluate_ablation(&arch, &p, &cs, AblationConfig::FULL).unwrap();
    let off = evaluate_ablation(&arch, &p, &cs, AblationConfig::RV_ONLY).unwrap();
    assert_eq!(on.to_bits(), off.to_bits());
}

proptest! {
    #[test]
    fn shapley_is_additive(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3) {
        let s = shapley_two_player(a, b, c, d);
        prop_assert!((s.phi_rv + s.phi_sent - (a - d)).abs() <= 1e-12 * (1.0 + a.abs() + d.abs()));
    }
}
