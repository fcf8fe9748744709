use mixbo::space::{SearchSpace, UnitPoint, VariableSpec};
use mixbo::surrogates::gp::negative_log_likelihood;
use mixbo::surrogates::{
    gp_fit, hs_fit, hs_sample_objective, CategoricalKernel, Dataset, GpFitOptions, GpModel,
    HorseshoeOptions, Kernel, KernelConfig, KernelKind,
};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cat_space(d: usize, k: usize) -> SearchSpace {
    SearchSpace::new(
        (0..d)
            .map(|i| VariableSpec::categorical(format!("x{i}"), (0..k).map(|c| c.to_string())))
            .collect(),
    )
    .unwrap()
}

fn mixed_space() -> SearchSpace {
    SearchSpace::new(vec![
        VariableSpec::categorical("a", ["p", "q", "r"]),
        VariableSpec::categorical("b", ["p", "q"]),
        VariableSpec::continuous("x", -1.0, 1.0),
        VariableSpec::integer("n", 0, 9),
    ])
    .unwrap()
}

fn units(space: &SearchSpace, n: usize, seed: u64) -> Vec<UnitPoint> {
    space
        .sample_uniform(n, seed)
        .unwrap()
        .iter()
        .map(|p| space.transform(p).unwrap())
        .collect()
}

fn dataset(space: &SearchSpace, n: usize, seed: u64) -> Dataset {
    let xs = units(space, n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    let ys = xs
        .iter()
        .map(|u| u.cat.iter().sum::<usize>() as f64 + u.num.iter().sum::<f64>() + 0.1 * rng.random::<f64>())
        .collect();
    Dataset::new(xs, ys).unwrap()
}

// Cholesky-free determinant and solve by elimination, for the NLL oracle.
fn det_and_solve(a: &[Vec<f64>], b: &[f64]) -> (f64, Vec<f64>) {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if p != c {
            m.swap(p, c);
            rhs.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
            rhs[r] -= f * rhs[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    (det, x)
}

#[test]
fn nll_matches_dense_oracle() {
    let space = mixed_space();
    let kernel = Kernel::new(KernelConfig::mixture(CategoricalKernel::TransformedOverlap), &space).unwrap();
    let data = dataset(&space, 5, 3);
    let mut p = kernel.default_params();
    p.sigma = 1.3;
    p.noise = 0.05;
    p.mix_weight = 0.4;
    let raw = kernel.params_to_raw(&p).unwrap();
    let inputs: Vec<_> = data.x.iter().map(|u| kernel.prepare(u)).collect();
    let (mean, std) = mixbo::surrogates::standardization(&data.y);
    let y: Vec<f64> = data.y.iter().map(|v| (v - mean) / std).collect();
    let got = negative_log_likelihood(&kernel, &raw, &inputs, &y).unwrap();

    let n = y.len();
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| kernel.eval(&raw, &inputs[i], &inputs[j]) + if i == j { p.noise } else { 0.0 }).collect())
        .collect();
    let (det, alpha) = det_and_solve(&k, &y);
    let quad: f64 = y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let oracle = 0.5 * quad + 0.5 * det.ln() + 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
}

#[test]
fn fit_is_deterministic_and_never_worse_than_start() {
    for (i, config) in [
        KernelConfig::overlap(),
        KernelConfig::transformed_overlap(),
        KernelConfig::hed(32, 4),
    ]
    .into_iter()
    .enumerate()
    {
        let space = cat_space(6, 3);
        let data = dataset(&space, 15, i as u64);
        let a = gp_fit(Kernel::new(config.clone(), &space).unwrap(), &data, &GpFitOptions::default(), None).unwrap();
        let b = gp_fit(Kernel::new(config, &space).unwrap(), &data, &GpFitOptions::default(), None).unwrap();
        assert_eq!(a.raw_params(), b.raw_params());
        let d = a.diagnostics();
        assert!(d.final_nll <= d.initial_nll, "{d:?}");
        assert!((a.nll() - d.final_nll).abs() < 1e-9);
    }
}

#[test]
fn one_point_posterior() {
    let space = cat_space(2, 2);
    let kernel = Kernel::new(KernelConfig::overlap(), &space).unwrap();
    let mut p = kernel.default_params();
    p.sigma = 1.0;
    p.noise = 0.01;
    let x = UnitPoint::new(vec![], vec![0, 1]);
    let data = Dataset::new(vec![x.clone()], vec![2.0]).unwrap();
    let gp = GpModel::condition(kernel, &p, &data, false).unwrap();
    let (mu, var) = gp.predict(&x);
    assert!((mu - 2.0 / 1.01).abs() < 1e-12);
    assert!((var - (1.0 - 1.0 / 1.01)).abs() < 1e-12);
    // A disjoint point has zero covariance: prior mean and prior variance.
    let (mu, var) = gp.predict(&UnitPoint::new(vec![], vec![1, 0]));
    assert!(mu.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
}

#[test]
fn far_point_reverts_to_prior() {
    let space = SearchSpace::new(vec![VariableSpec::continuous("x", 0.0, 1.0)]).unwrap();
    let kernel = Kernel::new(KernelConfig::matern52(), &space).unwrap();
    let mut p = kernel.default_params();
    p.num_lengthscales = vec![0.01];
    p.noise = 0.01;
    p.sigma = 1.5;
    let xs = vec![UnitPoint::new(vec![0.0], vec![]), UnitPoint::new(vec![0.05], vec![])];
    let data = Dataset::new(xs, vec![1.0, 3.0]).unwrap();
    let gp = GpModel::condition(kernel, &p, &data, true).unwrap();
    let (mu, var) = gp.predict(&UnitPoint::new(vec![1.0], vec![]));
    let (mean, std) = gp.standardization();
    assert!((mu - mean).abs() < 1e-9);
    assert!((var - 1.5 * std * std).abs() < 1e-9);
}

#[test]
fn heldout_density_is_gaussian() {
    let space = cat_space(4, 3);
    let data = dataset(&space, 10, 9);
    let gp = gp_fit(Kernel::new(KernelConfig::transformed_overlap(), &space).unwrap(), &data, &GpFitOptions::default(), None).unwrap();
    let u = units(&space, 1, 77).remove(0);
    let (mu, var) = gp.predict(&u);
    let s2 = var + gp.params().noise * gp.standardization().1.powi(2);
    let y = mu + 0.3;
    let oracle = -0.5 * (2.0 * std::f64::consts::PI * s2).ln() - 0.09 / (2.0 * s2);
    assert!((gp.log_predictive_density(&u, y) - oracle).abs() < 1e-9);
}

#[test]
fn gp_rejects_bad_data() {
    let space = cat_space(2, 2);
    let k = || Kernel::new(KernelConfig::overlap(), &space).unwrap();
    let one = Dataset::new(vec![UnitPoint::new(vec![], vec![0, 0])], vec![1.0]).unwrap();
    assert!(gp_fit(k(), &one, &GpFitOptions::default(), None).is_err());
    assert!(Dataset::new(vec![UnitPoint::new(vec![], vec![0, 0])], vec![f64::NAN])
        .and_then(|d| gp_fit(k(), &d, &GpFitOptions::default(), None))
        .is_err());
    assert!(Kernel::new(KernelConfig::matern52(), &space).is_err());
    assert!(Kernel::new(KernelConfig::new(KernelKind::Mixture(CategoricalKernel::Overlap)), &space).is_err());
}

#[test]
fn horseshoe_recovers_a_sparse_main_effect() {
    let space = cat_space(6, 2);
    let mut z1 = Vec::new();
    let mut shrunk = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = units(&space, 60, 100 + seed);
        let ys: Vec<f64> = xs.iter().map(|u| 3.0 * u.cat[0] as f64 + 0.1 * (rng.random::<f64>() - 0.5)).collect();
        let data = Dataset::new(xs, ys).unwrap();
        let options = HorseshoeOptions {
            order: 1,
            ..HorseshoeOptions::default()
        };
        let model = hs_fit(&space, &data, &options, seed).unwrap();
        let coef = model.posterior_mean_raw();
        // Constant first, then one dummy per variable.
        z1.push(coef[1]);
        let null = model.posterior_mean()[2..].iter().map(|c| c.abs()).fold(0.0, f64::max);
        shrunk.push(null / model.threshold());
    }
    z1.sort_by(f64::total_cmp);
    shrunk.sort_by(f64::total_cmp);
    let (m1, ms) = (z1[10], shrunk[10]);
    assert!((m1 - 3.0).abs() <= 0.5, "median z1 coefficient {m1}");
    assert!(ms < 1.0, "median largest null coefficient is {ms} thresholds");
}

#[test]
fn horseshoe_determinism_and_small_data() {
    let space = cat_space(3, 3);
    let data = dataset(&space, 12, 2);
    let options = HorseshoeOptions::default();
    let a = hs_fit(&space, &data, &options, 5).unwrap();
    let b = hs_fit(&space, &data, &options, 5).unwrap();
    assert_eq!(a.draws(), b.draws());
    assert_eq!(hs_sample_objective(&a, 3).unwrap(), hs_sample_objective(&b, 3).unwrap());

    let tiny = Dataset::new(units(&space, 2, 8), vec![0.5, 1.5]).unwrap();
    let m = hs_fit(&space, &tiny, &options, 0).unwrap();
    assert!(m.draws().iter().flatten().all(|v| v.is_finite()));

    assert!(hs_fit(&mixed_space(), &dataset(&mixed_space(), 5, 1), &options, 0).is_err());
}

#[test]
fn sampled_objective_is_a_feature_dot_product() {
    let space = cat_space(4, 3);
    let data = dataset(&space, 20, 6);
    let model = hs_fit(&space, &data, &HorseshoeOptions::default(), 1).unwrap();
    let coef = hs_sample_objective(&model, 11).unwrap();
    assert_eq!(coef.len(), model.feature_map().n_features());
    let (mean, scale) = model.standardization();
    for u in units(&space, 10, 40) {
        let f = model.feature_map().features(&u.cat);
        let dot: f64 = f.iter().zip(&coef).map(|(a, b)| a * b).sum();
        assert!((model.evaluate(&coef, &u) - (mean + scale * dot)).abs() < 1e-12);
    }
    // Main effects over eight dummies plus all cross-variable products.
    let map = model.feature_map();
    let dummies = 4 * 2;
    assert_eq!(map.n_features(), 1 + dummies + (dummies * dummies - 4 * 4) / 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_are_symmetric_and_bounded(seed in 0u64..10_000, which in 0usize..4) {
        let space = mixed_space();
        let config = match which {
            0 => KernelConfig::mixture(CategoricalKernel::Overlap),
            1 => KernelConfig::mixture(CategoricalKernel::TransformedOverlap),
            2 => KernelConfig { hed_dictionary_size: 8, hed_seed: seed, ..KernelConfig::mixture(CategoricalKernel::Hed) },
            _ => KernelConfig::matern52(),
        };
        let kernel = Kernel::new(config, &space).unwrap();
        let raw = kernel.params_to_raw(&kernel.default_params()).unwrap();
        let u = units(&space, 2, seed);
        let (a, b) = (kernel.prepare(&u[0]), kernel.prepare(&u[1]));
        let kab = kernel.eval(&raw, &a, &b);
        prop_assert!((kab - kernel.eval(&raw, &b, &a)).abs() < 1e-14);
        let kaa = kernel.eval(&raw, &a, &a);
        let kbb = kernel.eval(&raw, &b, &b);
        prop_assert!(kab * kab <= kaa * kbb + 1e-12);
    }

    #[test]
    fn posterior_variance_is_nonnegative(seed in 0u64..10_000) {
        let space = cat_space(3, 3);
        let data = dataset(&space, 8, seed);
        let gp = gp_fit(Kernel::new(KernelConfig::transformed_overlap(), &space).unwrap(), &data, &GpFitOptions { epochs: 10, ..GpFitOptions::default() }, None).unwrap();
        for u in units(&space, 5, seed + 9) {
            let (m, v) = gp.predict(&u);
            prop_assert!(m.is_finite() && v >= 0.0);
        }
    }
}
