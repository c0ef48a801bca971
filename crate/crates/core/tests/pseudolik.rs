mod common;

use common::*;
use multigibbs::model::{Covariates, Family, ModelSpec};
use multigibbs::pattern::{MultiTypePattern, Point, Window};
use multigibbs::pseudolik::{
    build_design, generate_dummies, gradient, logistic_loglik, DesignData, Dummies, DummySpec, RowSource,
};
use multigibbs::lasso::{GroupLasso, SolverOptions};
use rand::Rng;

#[test]
fn symmetric_logistic_at_zero() {
    let w = Window::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let data = MultiTypePattern::new(w.clone(), 1, vec![Point::new(0.2, 0.2, 0)]).unwrap();
    let dummies = Dummies {
        pattern: MultiTypePattern::new(w, 1, vec![Point::new(0.8, 0.8, 0)]).unwrap(),
        rho: vec![1.0],
    };
    let spec = ModelSpec::uniform(1, Family::Strauss, vec![], vec![]).unwrap();
    let d = build_design(&data, &dummies, &spec, &Covariates::none(), 0.0).unwrap();
    assert_eq!(d.n_rows(), 2);
    let ll = logistic_loglik(&d, &[0.0]);
    assert!((ll + 2.0 * 2f64.ln()).abs() < 1e-12, "{ll}");
}

#[test]
fn two_point_hand_computation() {
    let w = Window::new(0.0, 2.0, 0.0, 2.0).unwrap();
    let data = MultiTypePattern::new(w.clone(), 1, vec![Point::new(1.0, 1.0, 0)]).unwrap();
    let dummies = Dummies {
        pattern: MultiTypePattern::new(w, 1, vec![Point::new(1.2, 1.0, 0)]).unwrap(),
        rho: vec![0.25],
    };
    let spec = ModelSpec::uniform(1, Family::Strauss, vec![0.5], vec![]).unwrap();
    let d = build_design(&data, &dummies, &spec, &Covariates::none(), 0.5).unwrap();
    let b = &d.blocks()[0];
    for r in 0..2 {
        let omega = b.column(1)[r];
        match b.source[r] {
            RowSource::Data(_) => assert_eq!(omega, 0.0),
            // Strauss ω for an added point counts each close pair from both sides.
            RowSource::Dummy(_) => assert_eq!(omega, 2.0),
        }
        assert!((b.offset - 4f64.ln()).abs() < 1e-12);
    }
}

#[test]
fn border_and_range_checks() {
    let w = Window::new(0.0, 4.0, 0.0, 4.0).unwrap();
    let mut r = rng(3);
    let pat = uniform_pattern(&mut r, &w, &[30]);
    let spec = ModelSpec::uniform(1, Family::Saturation, vec![0.3, 0.6], vec![]).unwrap();
    let d = generate_dummies(&w, &[30], &DummySpec::default(), &mut r).unwrap();
    assert!(build_design(&pat, &d, &spec, &Covariates::none(), 0.5).is_err());
    let des = build_design(&pat, &d, &spec, &Covariates::none(), 0.6).unwrap();
    let inner = w.erode(0.6).unwrap();
    let expected = pat.points().iter().chain(d.pattern.points()).filter(|p| inner.contains(p.x, p.y)).count();
    assert_eq!(des.n_rows(), expected);
    for b in des.blocks() {
        assert!(b.x.iter().zip(&b.y).all(|(&x, &y)| inner.contains(x, y)));
    }
}

#[test]
fn no_interaction_rows_are_covariates_only() {
    let w = Window::new(0.0, 4.0, 0.0, 4.0).unwrap();
    let mut r = rng(4);
    let pat = uniform_pattern(&mut r, &w, &[20, 10]);
    let spec = ModelSpec::uniform(2, Family::Strauss, vec![], vec![]).unwrap();
    let d = generate_dummies(&w, &[20, 10], &DummySpec::default(), &mut r).unwrap();
    let des = build_design(&pat, &d, &spec, &Covariates::none(), 0.0).unwrap();
    assert_eq!(des.n_coefficients(), 2);
    assert!(des.blocks().iter().all(|b| b.width == 1 && b.column(0).iter().all(|&v| v == 1.0)));
}

#[test]
fn gradient_matches_central_differences() {
    for seed in 0..50 {
        let des = small_design(seed);
        let mut r = rng(seed + 100);
        let theta: Vec<f64> = (0..des.n_coefficients()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let g = gradient(&des, &theta);
        let h = 1e-5;
        for k in 0..theta.len() {
            let mut a = theta.clone();
            let mut b = theta.clone();
            a[k] += h;
            b[k] -= h;
            let fd = (logistic_loglik(&des, &a) - logistic_loglik(&des, &b)) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-6, "seed {seed} coef {k}: {fd} vs {}", g[k]);
        }
    }
}

fn shifted(des: &DesignData<f64>, shift: f64) -> DesignData<f64> {
    let blocks = des
        .blocks()
        .iter()
        .cloned()
        .map(|mut b| {
            b.offset += shift;
            b
        })
        .collect();
    DesignData::from_blocks(des.layout().clone(), blocks, des.window().clone()).unwrap()
}

#[test]
fn offset_shift_moves_intercepts() {
    let des = small_design(7);
    let solver = GroupLasso::new(&des, SolverOptions::default());
    let base = solver.fit(0.0, None);
    let moved_design = shifted(&des, 0.75);
    let moved = GroupLasso::new(&moved_design, SolverOptions::default()).fit(0.0, None);
    assert!(base.converged && moved.converged);
    for (k, (a, b)) in base.theta.iter().zip(&moved.theta).enumerate() {
        let intercept = des.layout().groups().iter().any(|g| !g.penalized && g.offset == k);
        let expected = if intercept { a - 0.75 } else { *a };
        assert!((b - expected).abs() < 1e-5, "coef {k}: {b} vs {expected}");
    }
}

#[test]
fn intercept_is_unbiased_for_poisson_data() {
    let w = Window::new(0.0, 10.0, 0.0, 10.0).unwrap();
    let spec = ModelSpec::uniform(1, Family::Strauss, vec![], vec![]).unwrap();
    let truth = 2f64.ln();
    let est: Vec<f64> = (0..200)
        .map(|s| {
            let mut r = rng(5000 + s);
            let n = r.sample(rand_distr::Poisson::new(200.0).unwrap()) as usize;
            let pat = uniform_pattern(&mut r, &w, &[n]);
            let d = generate_dummies(&w, &[n], &DummySpec::default(), &mut r).unwrap();
            let des = build_design(&pat, &d, &spec, &Covariates::none(), 0.0).unwrap();
            GroupLasso::new(&des, SolverOptions::default()).fit(0.0, None).theta[0] - truth
        })
        .collect();
    let n = est.len() as f64;
    let mean = est.iter().sum::<f64>() / n;
    let sd = (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() <= 3.0 * sd / n.sqrt(), "mean {mean}, se {}", sd / n.sqrt());
}

#[test]
fn dummy_refresh_stays_within_monte_carlo_band() {
    let w = Window::new(0.0, 10.0, 0.0, 10.0).unwrap();
    let mut r = rng(77);
    let pat = uniform_pattern(&mut r, &w, &[150]);
    let spec = ModelSpec::uniform(1, Family::Saturation, vec![0.5], vec![]).unwrap();
    let fit = |seed: u64| {
        let d = generate_dummies(&w, &[150], &DummySpec::default(), &mut rng(seed)).unwrap();
        let des = build_design(&pat, &d, &spec, &Covariates::none(), 0.5).unwrap();
        GroupLasso::new(&des, SolverOptions::default()).fit(0.0, None).theta
    };
    let runs: Vec<Vec<f64>> = (0..20).map(fit).collect();
    let fresh = fit(999);
    for k in 0..fresh.len() {
        let vals: Vec<f64> = runs.iter().map(|t| t[k]).collect();
        let mean = vals.iter().sum::<f64>() / 20.0;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 19.0).sqrt();
        assert!((fresh[k] - mean).abs() <= 4.0 * sd, "coef {k}: {} vs {mean} ± {sd}", fresh[k]);
    }
}

#[test]
fn stratified_dummies_look_uniform() {
    // χ² over a 5×5 grid, 1% level (critical value 42.98 for 24 df).
    let w = Window::new(0.0, 10.0, 0.0, 10.0).unwrap();
    let mut rejections = 0;
    for s in 0..50 {
        let d = generate_dummies(&w, &[250], &DummySpec::default(), &mut rng(s)).unwrap();
        let mut cells = [0f64; 25];
        for p in d.pattern.points() {
            let cx = ((p.x / 2.0) as usize).min(4);
            let cy = ((p.y / 2.0) as usize).min(4);
            cells[cy * 5 + cx] += 1.0;
        }
        let e = 1000.0 / 25.0;
        let chi2: f64 = cells.iter().map(|c| (c - e).powi(2) / e).sum();
        if chi2 > 42.98 {
            rejections += 1;
        }
    }
    assert!(rejections <= 2, "{rejections} rejections");
}
