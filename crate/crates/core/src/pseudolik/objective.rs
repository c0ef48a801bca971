use super::design::DesignData;
use crate::scalar::Real;

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus<T: Real>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// `log σ(x) = −softplus(−x)`.
#[inline]
pub fn log_sigmoid<T: Real>(x: T) -> T {
    -softplus(-x)
}

#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `tᵀη − 1ᵀ log(1 + e^η)` with `η = Bθ + o`.
pub fn logistic_loglik<T: Real>(design: &DesignData<T>, theta: &[T]) -> T {
    assert_eq!(theta.len(), design.n_coefficients(), "theta length");
    design
        .linear_predictor(theta)
        .iter()
        .zip(design.blocks())
        .map(|(eta, b)| {
            eta.iter()
                .zip(&b.response)
                .map(|(&e, &t)| if t > T::zero() { log_sigmoid(e) } else { log_sigmoid(-e) })
                .sum::<T>()
        })
        .sum()
}

/// `Bᵀ(t − σ(η))`.
pub fn gradient<T: Real>(design: &DesignData<T>, theta: &[T]) -> Vec<T> {
    assert_eq!(theta.len(), design.n_coefficients(), "theta length");
    let mut g = vec![T::zero(); theta.len()];
    for (eta, b) in design.linear_predictor(theta).iter().zip(design.blocks()) {
        let resid: Vec<T> = eta.iter().zip(&b.response).map(|(&e, &t)| t - sigmoid(e)).collect();
        for (c, &gi) in design.layout().type_row(b.ty).global.iter().enumerate() {
            g[gi] += b.column(c).iter().zip(&resid).map(|(&x, &r)| x * r).sum::<T>();
        }
    }
    g
}
