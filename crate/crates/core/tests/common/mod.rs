//! Independent numerical oracles shared by the integration test targets.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on [a, b]: `panels` panels of `order` nodes.
pub struct Rule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl Rule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (t, wt) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut x = Vec::with_capacity(panels * order);
        let mut w = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (ti, wi) in t.iter().zip(&wt) {
                x.push(lo + 0.5 * h * (ti + 1.0));
                w.push(0.5 * h * wi);
            }
        }
        Self { x, w }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.x.iter().zip(&self.w).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Tensor-product quadrature of `f(x, y)` over a rectangle.
pub fn integrate_2d(rx: &Rule, ry: &Rule, f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut total = 0.0;
    for (&x, &wx) in rx.x.iter().zip(&rx.w) {
        let mut row = 0.0;
        for (&y, &wy) in ry.x.iter().zip(&ry.w) {
            row += wy * f(x, y);
        }
        total += wx * row;
    }
    total
}

/// Panels of width about `width` over [a, b].
fn rule_for(a: f64, b: f64, width: f64) -> Rule {
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    Rule::new(a, b, panels, 12)
}

/// Isotropic Gaussian density in the plane with per-coordinate variance `var`.
pub fn gauss2(var: f64, x: f64, y: f64) -> f64 {
    (-(x * x + y * y) / (2.0 * var)).exp() / (2.0 * PI * var)
}

/// Which centre process the oracle convolves against.
#[derive(Debug, Clone, Copy)]
pub enum Centres {
    Poisson,
    /// `|c(u, 0)|² / ρ²` for the kernel `ρ exp(−|u−v|²/β²)`.
    GaussianDpp { beta: f64 },
    /// `|c(u, 0)|² / ρ²` for the kernel `ρ exp((u v̄ − |u|²/2 − |v|²/2)/β²)`.
    GinibreDpp { beta: f64 },
}

impl Centres {
    fn correlation_sq(&self, x: f64, y: f64) -> f64 {
        match *self {
            Centres::Poisson => 0.0,
            Centres::GaussianDpp { beta } => {
                let c = (-(x * x + y * y) / (beta * beta)).exp();
                c * c
            }
            Centres::GinibreDpp { beta } => {
                // u v̄ = 0 for v = 0, so |c(u,0)| = ρ exp(−|u|²/(2β²))
                let c = (-(x * x + y * y) / (2.0 * beta * beta)).exp();
                c * c
            }
        }
    }

    fn length_scale(&self) -> f64 {
        match *self {
            Centres::Poisson => 0.0,
            Centres::GaussianDpp { beta } | Centres::GinibreDpp { beta } => beta,
        }
    }
}

/// Offspring autocorrelation `∫ k(y) k(y + x) dy` at `x = (r, 0)`, by 2-D quadrature
/// of the product of two offspring densities.
pub fn offspring_autocorrelation(alpha: f64, r: f64) -> f64 {
    let half = 12.0 * alpha;
    let c = -0.5 * r;
    let rx = rule_for(c - half, c + half, alpha);
    let ry = rule_for(-half, half, alpha);
    let var = alpha * alpha;
    integrate_2d(&rx, &ry, |x, y| gauss2(var, x, y) * gauss2(var, x + r, y))
}

/// Pair correlation of a cluster process at distance `r` as
/// `1 − (k*k̃*R)(x) + (k*k̃)(x)/ρ_Y`, with both convolutions computed by
/// 2-D quadrature. `k*k̃` inside the outer convolution is the Gaussian of
/// variance `2α²`, itself checked against [`offspring_autocorrelation`].
pub fn pcf_by_convolution(centres: Centres, alpha: f64, rho_y: f64, r: f64) -> f64 {
    let cluster = offspring_autocorrelation(alpha, r) / rho_y;
    let repulsion = match centres {
        Centres::Poisson => 0.0,
        _ => {
            let s = centres.length_scale();
            let half = 10.0 * (2.0f64.sqrt() * alpha).max(s);
            let width = 0.25 * (2.0f64.sqrt() * alpha).min(s);
            let rx = rule_for(r.min(0.0) - half, r.max(0.0) + half, width);
            let ry = rule_for(-half, half, width);
            let var = 2.0 * alpha * alpha;
            integrate_2d(&rx, &ry, |x, y| gauss2(var, r - x, -y) * centres.correlation_sq(x, y))
        }
    };
    1.0 - repulsion + cluster
}

/// `∫₀^r 2πs g(s) ds`.
pub fn k_by_quadrature(g: impl Fn(f64) -> f64, r: f64) -> f64 {
    Rule::new(0.0, r, 64, 12).integrate(|s| 2.0 * PI * s * g(s))
}

/// Root of `f` in `[a, b]` by bisection; `f(a)` and `f(b)` must differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) <= 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}
