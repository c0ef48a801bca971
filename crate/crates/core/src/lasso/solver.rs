use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::pseudolik::{log_sigmoid, sigmoid, DesignData};
use crate::scalar::Real;

/// Group penalty weight `w_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupWeights {
    /// `|g|^(-1/2)`.
    #[default]
    Paper,
    /// `|g|^(1/2)`.
    Conventional,
}

impl GroupWeights {
    pub fn weight<T: Real>(self, size: usize) -> T {
        let s = T::from_usize_lossy(size).sqrt();
        match self {
            GroupWeights::Paper => T::one() / s,
            GroupWeights::Conventional => s,
        }
    }
}

/// Curvature used for the quadratic model of each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    /// Row weights `p(1-p)` with a backtracking line search.
    #[default]
    Exact,
    /// The fixed bound `1/4`: a majorizer, so every step is an ascent step.
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub tol: f64,
    pub kkt_tol: f64,
    pub max_iter: usize,
    pub curvature: Curvature,
    pub weights: GroupWeights,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            kkt_tol: 1e-5,
            max_iter: 200,
            curvature: Curvature::Exact,
            weights: GroupWeights::Paper,
        }
    }
}

/// Solution at one penalty value.
#[derive(Debug, Clone)]
pub struct FitResult<T> {
    pub gamma: T,
    pub theta: Vec<T>,
    /// `e_g` per group; always true for unpenalized groups.
    pub active: Vec<bool>,
    pub loglik: T,
    /// Penalized objective `ℓ − γ Σ w_g ‖θ_g‖`.
    pub objective: T,
    pub gradient: Vec<T>,
    pub iterations: usize,
    pub kkt: T,
    pub converged: bool,
    /// Penalized objective after every outer iteration.
    pub trace: Vec<T>,
}

#[derive(Debug, Clone)]
struct Part {
    block: usize,
    local: usize,
}

#[derive(Debug, Clone)]
struct GroupInfo {
    offset: usize,
    len: usize,
    penalized: bool,
    weight: f64,
    parts: Vec<Part>,
}

/// Block coordinate solver for the group-penalized logistic pseudo-likelihood.
pub struct GroupLasso<'a, T> {
    design: &'a DesignData<T>,
    groups: Vec<GroupInfo>,
    options: SolverOptions,
    bound_gram: Vec<Vec<T>>,
}

impl<'a, T: Real> GroupLasso<'a, T> {
    pub fn new(design: &'a DesignData<T>, options: SolverOptions) -> Self {
        let layout = design.layout();
        let groups = layout
            .groups()
            .iter()
            .map(|g| {
                let parts = design
                    .blocks()
                    .iter()
                    .enumerate()
                    .filter_map(|(b, blk)| {
                        let global = &layout.type_row(blk.ty).global;
                        global.iter().position(|&c| c == g.offset).map(|local| Part { block: b, local })
                    })
                    .collect();
                GroupInfo {
                    offset: g.offset,
                    len: g.len,
                    penalized: g.penalized,
                    weight: options.weights.weight::<f64>(g.len),
                    parts,
                }
            })
            .collect();
        let quarter = T::lit(0.25);
        let bound_gram = design
            .blocks()
            .iter()
            .map(|b| gram(b.width, b.n_rows(), &b.columns, |_| quarter))
            .collect();
        Self {
            design,
            groups,
            options,
            bound_gram,
        }
    }

    pub fn design(&self) -> &DesignData<T> {
        self.design
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn weight(&self, group: usize) -> T {
        T::lit(self.groups[group].weight)
    }

    pub fn unpenalized_count(&self) -> usize {
        self.groups.iter().filter(|g| !g.penalized).map(|g| g.len).sum()
    }

    fn penalty(&self, gamma: T, theta: &[T]) -> T {
        self.groups
            .iter()
            .filter(|g| g.penalized)
            .map(|g| {
                let n = norm(&theta[g.offset..g.offset + g.len]);
                if n > T::zero() {
                    gamma * T::lit(g.weight) * n
                } else {
                    T::zero()
                }
            })
            .sum()
    }

    /// Largest KKT violation at `theta` given the gradient.
    pub fn kkt_violation(&self, gamma: T, theta: &[T], grad: &[T]) -> T {
        let mut worst = T::zero();
        for g in &self.groups {
            let r = g.offset..g.offset + g.len;
            let gr = &grad[r.clone()];
            let th = &theta[r];
            let v = if !g.penalized {
                norm(gr)
            } else {
                let nt = norm(th);
                let kappa = gamma * T::lit(g.weight);
                if nt > T::zero() {
                    let d: Vec<T> = gr.iter().zip(th).map(|(&a, &t)| a - kappa * t / nt).collect();
                    norm(&d)
                } else {
                    (norm(gr) - kappa).max(T::zero())
                }
            };
            worst = worst.max(v);
        }
        worst
    }

    fn eta(&self, theta: &[T]) -> Vec<Vec<T>> {
        self.design.linear_predictor(theta)
    }

    fn loglik_of(&self, eta: &[Vec<T>]) -> T {
        eta.iter()
            .zip(self.design.blocks())
            .map(|(e, b)| {
                e.iter()
                    .zip(&b.response)
                    .map(|(&x, &t)| if t > T::zero() { log_sigmoid(x) } else { log_sigmoid(-x) })
                    .sum::<T>()
            })
            .sum()
    }

    fn gradient_of(&self, eta: &[Vec<T>]) -> Vec<T> {
        let layout = self.design.layout();
        let mut g = vec![T::zero(); layout.len()];
        for (e, b) in eta.iter().zip(self.design.blocks()) {
            let resid: Vec<T> = e.iter().zip(&b.response).map(|(&x, &t)| t - sigmoid(x)).collect();
            for (c, &gi) in layout.type_row(b.ty).global.iter().enumerate() {
                g[gi] += dot(b.column(c), &resid);
            }
        }
        g
    }

    fn exact_gram(&self, eta: &[Vec<T>]) -> Vec<Vec<T>> {
        eta.iter()
            .zip(self.design.blocks())
            .map(|(e, b)| {
                gram(b.width, b.n_rows(), &b.columns, |r| {
                    let p = sigmoid(e[r]);
                    p * (T::one() - p)
                })
            })
            .collect()
    }

    /// Zero interactions and each intercept at its covariate-free optimum
    /// `logit(n_data / n_rows) − offset`. Starting from zero instead puts every row
    /// deep in the flat part of the logistic curve when `ρ` is small.
    fn cold_start(&self) -> Vec<T> {
        let layout = self.design.layout();
        let mut theta = vec![T::zero(); self.design.n_coefficients()];
        for b in self.design.blocks() {
            let n = b.n_rows();
            let n_data = b.response.iter().filter(|&&t| t > T::zero()).count();
            if n_data > 0 && n_data < n {
                let frac = T::from_usize_lossy(n_data) / T::from_usize_lossy(n);
                theta[layout.type_row(b.ty).global[0]] = (frac / (T::one() - frac)).ln() - b.offset;
            }
        }
        theta
    }

    /// Fit at one penalty value, optionally warm-started.
    pub fn fit(&self, gamma: T, warm: Option<&[T]>) -> FitResult<T> {
        let n = self.design.n_coefficients();
        let mut theta = match warm {
            Some(w) => {
                assert_eq!(w.len(), n, "warm start length");
                w.to_vec()
            }
            None => self.cold_start(),
        };
        let mut eta = self.eta(&theta);
        let mut loglik = self.loglik_of(&eta);
        let mut objective = loglik - self.penalty(gamma, &theta);
        let mut grad = self.gradient_of(&eta);
        let mut kkt = self.kkt_violation(gamma, &theta, &grad);
        let mut trace = vec![objective];
        let mut converged = false;
        let mut iterations = 0;
        let tol = T::lit(self.options.tol);
        let kkt_tol = T::lit(self.options.kkt_tol);
        if kkt <= kkt_tol {
            converged = true;
        }
        while !converged && iterations < self.options.max_iter {
            iterations += 1;
            let step = match self.options.curvature {
                Curvature::Exact => {
                    let g = self.exact_gram(&eta);
                    let cand = self.solve_model(gamma, &theta, &grad, &g);
                    self.line_search(gamma, &theta, &eta, objective, &cand)
                        .or_else(|| self.bound_step(gamma, &theta, &grad, objective))
                }
                Curvature::Bound => self.bound_step(gamma, &theta, &grad, objective),
            };
            let step = step.or_else(|| {
                let g = match self.options.curvature {
                    Curvature::Exact => self.exact_gram(&eta),
                    Curvature::Bound => self.bound_gram.clone(),
                };
                self.flat_step(gamma, &theta, &grad, &g, objective, kkt)
            });
            let Some((new_theta, new_eta, new_obj, new_ll)) = step else {
                // No progress possible at working precision.
                break;
            };
            let rel = (new_obj - objective).abs() / (T::one() + objective.abs());
            theta = new_theta;
            eta = new_eta;
            objective = new_obj;
            loglik = new_ll;
            grad = self.gradient_of(&eta);
            kkt = self.kkt_violation(gamma, &theta, &grad);
            trace.push(objective);
            if rel < tol && kkt <= kkt_tol {
                converged = true;
            }
        }
        if !converged && kkt <= kkt_tol {
            converged = true;
        }
        let active = self
            .groups
            .iter()
            .map(|g| !g.penalized || theta[g.offset..g.offset + g.len].iter().any(|&v| v != T::zero()))
            .collect();
        FitResult {
            gamma,
            theta,
            active,
            loglik,
            objective,
            gradient: grad,
            iterations,
            kkt,
            converged,
            trace,
        }
    }

    /// Full model step accepted when the objective is flat to rounding but the KKT
    /// violation drops; lets the iteration finish below the objective's resolution.
    fn flat_step(
        &self,
        gamma: T,
        theta: &[T],
        grad: &[T],
        gram_blocks: &[Vec<T>],
        objective: T,
        kkt: T,
    ) -> Option<(Vec<T>, Vec<Vec<T>>, T, T)> {
        let cand = self.solve_model(gamma, theta, grad, gram_blocks);
        let eta = self.eta(&cand);
        let ll = self.loglik_of(&eta);
        let obj = ll - self.penalty(gamma, &cand);
        let slack = T::lit(64.0) * T::epsilon() * (T::one() + objective.abs());
        if !(obj >= objective - slack) {
            return None;
        }
        let new_kkt = self.kkt_violation(gamma, &cand, &self.gradient_of(&eta));
        (new_kkt < kkt * T::lit(0.5)).then_some((cand, eta, obj, ll))
    }

    fn bound_step(&self, gamma: T, theta: &[T], grad: &[T], objective: T) -> Option<(Vec<T>, Vec<Vec<T>>, T, T)> {
        let cand = self.solve_model(gamma, theta, grad, &self.bound_gram);
        let eta = self.eta(&cand);
        let ll = self.loglik_of(&eta);
        let obj = ll - self.penalty(gamma, &cand);
        (obj > objective && obj.is_finite()).then_some((cand, eta, obj, ll))
    }

    fn line_search(
        &self,
        gamma: T,
        theta: &[T],
        eta: &[Vec<T>],
        objective: T,
        cand: &[T],
    ) -> Option<(Vec<T>, Vec<Vec<T>>, T, T)> {
        let dir: Vec<T> = cand.iter().zip(theta).map(|(&a, &b)| a - b).collect();
        if dir.iter().all(|&d| d == T::zero()) {
            return None;
        }
        let bd: Vec<Vec<T>> = self
            .eta(&dir)
            .into_iter()
            .zip(self.design.blocks())
            .map(|(mut e, b)| {
                e.iter_mut().for_each(|v| *v -= b.offset);
                e
            })
            .collect();
        let mut t = T::one();
        for _ in 0..40 {
            let trial: Vec<T> = theta.iter().zip(&dir).map(|(&a, &d)| a + t * d).collect();
            let trial_eta: Vec<Vec<T>> = eta
                .iter()
                .zip(&bd)
                .map(|(e, d)| e.iter().zip(d).map(|(&a, &b)| a + t * b).collect())
                .collect();
            let ll = self.loglik_of(&trial_eta);
            let obj = ll - self.penalty(gamma, &trial);
            if obj > objective && obj.is_finite() {
                return Some((trial, trial_eta, obj, ll));
            }
            t *= T::lit(0.5);
        }
        None
    }

    /// Maximizes the penalized quadratic model `gᵀd − ½dᵀHd − pen(θ + d)` by cycling
    /// over groups, each solved exactly.
    fn solve_model(&self, gamma: T, theta0: &[T], grad: &[T], gram_blocks: &[Vec<T>]) -> Vec<T> {
        let blocks = self.design.blocks();
        let layout = self.design.layout();
        let mut theta = theta0.to_vec();
        let mut q = grad.to_vec();
        let eig: Vec<(Vec<T>, Vec<T>)> = self
            .groups
            .iter()
            .map(|g| {
                let mut h = vec![T::zero(); g.len * g.len];
                for part in &g.parts {
                    let w = blocks[part.block].width;
                    let gb = &gram_blocks[part.block];
                    for a in 0..g.len {
                        for b in 0..g.len {
                            h[a * g.len + b] += gb[(part.local + a) * w + part.local + b];
                        }
                    }
                }
                sym_eigen(&h, g.len)
            })
            .collect();
        let scale = theta0.iter().fold(T::one(), |m, &v| m.max(v.abs()));
        let inner_tol = T::lit(1e-13) * scale;
        let update = |gi: usize, theta: &mut Vec<T>, q: &mut Vec<T>| -> T {
            let g = &self.groups[gi];
            let r = g.offset..g.offset + g.len;
            let (vals, vecs) = &eig[gi];
            // c = q_g + H_gg θ_g
            let mut c = q[r.clone()].to_vec();
            let th = &theta[r.clone()];
            for a in 0..g.len {
                for b in 0..g.len {
                    let hab: T = (0..g.len).map(|k| vecs[a * g.len + k] * vals[k] * vecs[b * g.len + k]).sum();
                    c[a] += hab * th[b];
                }
            }
            let kappa = if g.penalized { gamma * T::lit(g.weight) } else { T::zero() };
            let new = group_solve(vals, vecs, &c, kappa);
            let delta: Vec<T> = new.iter().zip(th).map(|(&a, &b)| a - b).collect();
            let change = delta.iter().fold(T::zero(), |m, &d| m.max(d.abs()));
            if change == T::zero() {
                return change;
            }
            for part in &g.parts {
                let blk = &blocks[part.block];
                let w = blk.width;
                let gb = &gram_blocks[part.block];
                let global = &layout.type_row(blk.ty).global;
                for (col, &gc) in global.iter().enumerate() {
                    let u: T = (0..g.len).map(|k| gb[col * w + part.local + k] * delta[k]).sum();
                    q[gc] -= u;
                }
            }
            theta[r].copy_from_slice(&new);
            change
        };
        for _outer in 0..100 {
            let mut change = T::zero();
            for gi in 0..self.groups.len() {
                change = change.max(update(gi, &mut theta, &mut q));
            }
            if change <= inner_tol {
                break;
            }
            let active: Vec<usize> = (0..self.groups.len())
                .filter(|&gi| {
                    let g = &self.groups[gi];
                    !g.penalized || theta[g.offset..g.offset + g.len].iter().any(|&v| v != T::zero())
                })
                .collect();
            for _ in 0..10_000 {
                let mut c = T::zero();
                for &gi in &active {
                    c = c.max(update(gi, &mut theta, &mut q));
                }
                if c <= inner_tol {
                    break;
                }
            }
        }
        theta
    }

    /// γ_max: the smallest penalty at which every penalized group stays at zero,
    /// together with the fit of the unpenalized blocks alone.
    pub fn gamma_max(&self) -> Result<(T, FitResult<T>)> {
        let fit = self.fit(T::infinity(), None);
        if !fit.converged {
            return Err(Error::Solver(format!(
                "unpenalized fit did not converge after {} iterations (KKT violation {})",
                fit.iterations, fit.kkt
            )));
        }
        let g = self
            .groups
            .iter()
            .filter(|g| g.penalized)
            .map(|g| norm(&fit.gradient[g.offset..g.offset + g.len]) / T::lit(g.weight))
            .fold(T::zero(), T::max);
        // Guard against round-off admitting a group at exactly γ_max.
        Ok((g * T::lit(1.0 + 1e-9), fit))
    }

    /// Block-wise unpenalized refit `θ̃_g = θ̂_g + H_g⁻¹ ∇_g` of one group, using the
    /// local Hessian at the fit.
    pub fn unpenalized_group_solution(&self, fit: &FitResult<T>, group: usize) -> Vec<T> {
        let g = &self.groups[group];
        let eta = self.eta(&fit.theta);
        let blocks = self.design.blocks();
        let mut h = vec![T::zero(); g.len * g.len];
        for part in &g.parts {
            let b = &blocks[part.block];
            let w: Vec<T> = eta[part.block]
                .iter()
                .map(|&e| {
                    let p = sigmoid(e);
                    p * (T::one() - p)
                })
                .collect();
            for a in 0..g.len {
                for c in 0..g.len {
                    let xa = b.column(part.local + a);
                    let xc = b.column(part.local + c);
                    h[a * g.len + c] += xa.iter().zip(xc).zip(&w).map(|((&p, &q), &wr)| p * q * wr).sum();
                }
            }
        }
        let (vals, vecs) = sym_eigen(&h, g.len);
        let step = group_solve(&vals, &vecs, &fit.gradient[g.offset..g.offset + g.len], T::zero());
        fit.theta[g.offset..g.offset + g.len]
            .iter()
            .zip(step)
            .map(|(&a, b)| a + b)
            .collect()
    }
}

fn gram<T: Real, W: Fn(usize) -> T>(width: usize, n: usize, cols: &[T], weight: W) -> Vec<T> {
    let w: Vec<T> = (0..n).map(weight).collect();
    let mut g = vec![T::zero(); width * width];
    for a in 0..width {
        let xa = &cols[a * n..(a + 1) * n];
        let wa: Vec<T> = xa.iter().zip(&w).map(|(&x, &v)| x * v).collect();
        for b in a..width {
            let v = dot(&wa, &cols[b * n..(b + 1) * n]);
            g[a * width + b] = v;
            g[b * width + a] = v;
        }
    }
    g
}

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// `argmin ½θᵀHθ − cᵀθ + κ‖θ‖` for `H = V diag(λ) Vᵀ` (row-major `V`).
///
/// Directions with negligible curvature are left at zero.
pub fn group_solve<T: Real>(vals: &[T], vecs: &[T], c: &[T], kappa: T) -> Vec<T> {
    let n = c.len();
    if kappa > T::zero() && norm(c) <= kappa {
        return vec![T::zero(); n];
    }
    let lmax = vals.iter().fold(T::zero(), |m, &v| m.max(v));
    let floor = lmax * T::lit(1e-12);
    let ct: Vec<T> = (0..n)
        .map(|k| if vals[k] > floor { (0..n).map(|a| vecs[a * n + k] * c[a]).sum() } else { T::zero() })
        .collect();
    let tilde: Vec<T> = if kappa == T::zero() {
        (0..n).map(|k| if vals[k] > floor { ct[k] / vals[k] } else { T::zero() }).collect()
    } else {
        // ‖θ‖ = s solves Σ c̃²/(λ s + κ)² = 1.
        let phi = |s: T| -> T {
            (0..n)
                .filter(|&k| vals[k] > floor)
                .map(|k| {
                    let d = vals[k] * s + kappa;
                    ct[k] * ct[k] / (d * d)
                })
                .sum()
        };
        if phi(T::zero()) <= T::one() {
            return vec![T::zero(); n];
        }
        let lmin = (0..n).filter(|&k| vals[k] > floor).map(|k| vals[k]).fold(T::infinity(), T::min);
        let mut lo = T::zero();
        let mut hi = norm(&ct) / lmin;
        while phi(hi) > T::one() {
            hi *= T::lit(2.0);
        }
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid) > T::one() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = (lo + hi) * T::lit(0.5);
        (0..n)
            .map(|k| if vals[k] > floor { ct[k] * s / (vals[k] * s + kappa) } else { T::zero() })
            .collect()
    };
    (0..n).map(|a| (0..n).map(|k| vecs[a * n + k] * tilde[k]).sum()).collect()
}
