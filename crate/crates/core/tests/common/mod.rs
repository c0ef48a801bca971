#![allow(dead_code)]

use multigibbs::model::{Covariates, Family, ModelSpec};
use multigibbs::pattern::{MultiTypePattern, Point, Window};
use multigibbs::pseudolik::{build_design, generate_dummies, DesignData, DummySpec, RowSource, TypeBlock};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_pattern(rng: &mut ChaCha8Rng, w: &Window<f64>, counts: &[usize]) -> MultiTypePattern<f64> {
    let mut pts = Vec::new();
    for (ty, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            pts.push(Point::new(
                w.x_min + rng.gen::<f64>() * w.width(),
                w.y_min + rng.gen::<f64>() * w.height(),
                ty,
            ));
        }
    }
    MultiTypePattern::new(w.clone(), counts.len(), pts).unwrap()
}

/// Clustered type-0 points (so interaction groups carry signal) plus uniform others.
pub fn random_problem(seed: u64) -> (MultiTypePattern<f64>, ModelSpec<f64>) {
    let mut r = rng(seed);
    let p = r.gen_range(2..4);
    let w = Window::new(0.0, 4.0, 0.0, 4.0).unwrap();
    let mut pts = Vec::new();
    for ty in 0..p {
        let n = r.gen_range(15..40);
        let clustered = r.gen_bool(0.5);
        let (cx, cy) = (r.gen_range(0.5..3.5), r.gen_range(0.5..3.5));
        for _ in 0..n {
            let (x, y) = if clustered && r.gen_bool(0.6) {
                ((cx + r.gen_range(-0.4..0.4f64)).clamp(0.0, 4.0), (cy + r.gen_range(-0.4..0.4f64)).clamp(0.0, 4.0))
            } else {
                (r.gen::<f64>() * 4.0, r.gen::<f64>() * 4.0)
            };
            pts.push(Point::new(x, y, ty));
        }
    }
    let pat = MultiTypePattern::new(w, p, pts).unwrap();
    let family = if r.gen_bool(0.5) { Family::Saturation } else { Family::Strauss };
    let intra = if r.gen_bool(0.5) { vec![0.2, 0.4] } else { vec![0.3] };
    let inter = if r.gen_bool(0.5) { vec![0.25, 0.45] } else { vec![0.35] };
    let mut spec = ModelSpec::uniform(p, family, intra, inter).unwrap();
    if family == Family::Saturation {
        spec = spec.with_saturation_constant(r.gen_range(1..4)).unwrap();
    }
    (pat, spec)
}

pub fn small_design(seed: u64) -> DesignData<f64> {
    let (pat, spec) = random_problem(seed);
    let mut r = rng(seed ^ 0xD0);
    let dspec = DummySpec {
        intensity_factor: 4.0,
        min_per_type: 40,
    };
    let d = generate_dummies(pat.window(), &pat.counts(), &dspec, &mut r).unwrap();
    build_design(&pat, &d, &spec, &Covariates::none(), spec.max_range()).unwrap()
}

/// Naive `v(x)` with no spatial index: for each ordered (centre, neighbour type)
/// count ring neighbours, apply the cap, and add into the pair's group.
pub fn naive_v(pat: &MultiTypePattern<f64>, spec: &ModelSpec<f64>) -> Vec<f64> {
    let layout = spec.layout();
    let mut v = vec![0.0; layout.len()];
    let pts = pat.points();
    for (a, x) in pts.iter().enumerate() {
        let row = layout.type_row(x.ty);
        v[row.global[0]] += 1.0;
        for j in 0..spec.n_types() {
            let r = spec.ranges(x.ty, j);
            if r.is_empty() {
                continue;
            }
            let g = layout.pair_group(x.ty, j).unwrap();
            let off = layout.groups()[g].offset;
            for k in 0..r.len() {
                let lo = if k == 0 { -1.0 } else { r[k - 1] };
                let ne = pts
                    .iter()
                    .enumerate()
                    .filter(|&(b, y)| {
                        let d = ((x.x - y.x).powi(2) + (x.y - y.y).powi(2)).sqrt();
                        b != a && y.ty == j && d > lo && d <= r[k]
                    })
                    .count() as u32;
                let g = match spec.family() {
                    Family::Strauss => ne,
                    Family::Saturation => ne.min(spec.saturation(x.ty, j)[k]),
                };
                v[off + k] += g as f64;
            }
        }
    }
    v
}

pub fn random_pattern(rng: &mut ChaCha8Rng, n: usize, p: usize, side: f64) -> MultiTypePattern<f64> {
    let w = Window::new(0.0, side, 0.0, side).unwrap();
    let pts = (0..n)
        .map(|_| Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side, rng.gen_range(0..p)))
        .collect();
    MultiTypePattern::new(w, p, pts).unwrap()
}

pub fn random_spec(rng: &mut ChaCha8Rng, p: usize, family: Family) -> ModelSpec<f64> {
    let mut spec = ModelSpec::from_fn(p, family, |i, j| {
        if i != j && rng.gen_bool(0.3) {
            vec![]
        } else if rng.gen_bool(0.5) {
            vec![0.2 + rng.gen::<f64>() * 0.3]
        } else {
            vec![0.15, 0.3, 0.5]
        }
    })
    .unwrap();
    for i in 0..p {
        for j in 0..p {
            let k = spec.ranges(i, j).len();
            if k > 0 {
                spec.set_saturation(i, j, (0..k).map(|_| rng.gen_range(1..4)).collect()).unwrap();
            }
        }
    }
    spec
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Block with disjoint column supports: support `k` has `n[k]` rows of which `m[k]` are ones.
pub fn disjoint_block(ty: usize, n: &[usize], m: &[usize]) -> TypeBlock<f64> {
    let width = n.len();
    let rows: usize = n.iter().sum();
    let mut columns = vec![0.0; width * rows];
    let mut response = Vec::new();
    let mut r = 0;
    for k in 0..width {
        for i in 0..n[k] {
            columns[k * rows + r] = 1.0;
            response.push(if i < m[k] { 1.0 } else { 0.0 });
            r += 1;
        }
    }
    TypeBlock {
        ty,
        width,
        offset: 0.0,
        columns,
        response,
        x: vec![0.5; rows],
        y: vec![0.5; rows],
        source: (0..rows).map(RowSource::Dummy).collect(),
    }
}

/// Closed-form group soft-threshold for an equal-count orthogonal logistic group of size `l`.
pub fn closed_form(n: usize, m: usize, l: usize, kappa: f64) -> f64 {
    let g0 = m as f64 - n as f64 / 2.0;
    if (l as f64).sqrt() * g0.abs() <= kappa {
        return 0.0;
    }
    logit((m as f64 - g0.signum() * kappa / (l as f64).sqrt()) / n as f64)
}
