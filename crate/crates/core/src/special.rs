//! Special functions and quadrature.
//!
//! `erf`, `erfc` and the gamma function come from `libm`; the modified
//! Bessel function of the second kind, the scaled `I_{3/2}`, the scaled
//! complementary error function and Gauss-Legendre quadrature live here.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

pub use libm::{erf, erfc};

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `exp(z²)·erfc(z)` for `z ≥ 0`, without overflow for large `z`.
pub fn erfcx(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < 4.0 {
        return (z * z).exp() * erfc(z);
    }
    // Continued fraction erfc(z) = e^{-z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))),
    // evaluated bottom-up with a fixed depth that is ample for z ≥ 4.
    let mut f = 0.0;
    for k in (1..=60).rev() {
        f = (k as f64 / 2.0) / (z + f);
    }
    1.0 / (PI.sqrt() * (z + f))
}

/// `exp(-t)·I_{3/2}(t)` for `t ≥ 0`, from the elementary form of `I_{3/2}`.
pub fn scaled_bessel_i_three_halves(t: f64) -> f64 {
    if t < 0.5 {
        // I_{3/2}(t) = Σ_k (t/2)^{2k+3/2} / (k! Γ(k+5/2)), summed to machine precision.
        let half = 0.5 * t;
        let mut term = half.powf(1.5) / gamma(2.5);
        let mut sum = term;
        for k in 1..30 {
            term *= half * half / (k as f64 * (k as f64 + 1.5));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        return sum * (-t).exp();
    }
    let e2 = (-2.0 * t).exp();
    (2.0 / PI).sqrt() * (t * (1.0 + e2) - (1.0 - e2)) / (2.0 * t.powf(1.5))
}

/// `1/Γ(1+μ) = 1 + γμ + a₃μ² + ...`; coefficients of the reciprocal gamma series.
const RECIP_GAMMA: [f64; 9] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
];

/// Temme's auxiliary `(1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)` and `(1/Γ(1-μ) + 1/Γ(1+μ)) / 2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let gampl = 1.0 / gamma(1.0 + mu);
    let gammi = 1.0 / gamma(1.0 - mu);
    let gam2 = 0.5 * (gammi + gampl);
    let gam1 = if mu.abs() < 0.05 {
        let m2 = mu * mu;
        -(RECIP_GAMMA[1] + m2 * (RECIP_GAMMA[3] + m2 * (RECIP_GAMMA[5] + m2 * RECIP_GAMMA[7])))
    } else {
        (gammi - gampl) / (2.0 * mu)
    };
    (gam1, gam2, gampl, gammi)
}

/// Modified Bessel function of the second kind `K_ν(x)` for `ν ≥ 0`, `x > 0`.
///
/// Temme's series for `x < 2`, Steed's continued fraction otherwise, then
/// forward recurrence from the fractional order `|μ| ≤ 1/2`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0 && x > 0.0, "bessel_k requires nu >= 0 and x > 0");
    if (nu - 0.5).abs() < 1e-15 {
        return (PI / (2.0 * x)).sqrt() * (-x).exp();
    }
    const EPS: f64 = 1e-16;
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let (mut k_mu, mut k_mu1);
    if x < 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..10_000 {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        k_mu = sum;
        k_mu1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..100_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        h *= a1;
        k_mu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        k_mu1 = k_mu * (mu + x + 0.5 - h) * xi;
    }
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    k_mu
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

fn gl_panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl20();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(w).map(|(&xi, &wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

/// Adaptive Gauss-Legendre quadrature of `f` over `[a, b]` to absolute `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = gl_panel(f, a, m);
        let right = gl_panel(f, m, b);
        if depth == 0 || (left + right - whole).abs() <= tol {
            left + right
        } else {
            rec(f, a, m, left, 0.5 * tol, depth - 1) + rec(f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    rec(f, a, b, gl_panel(f, a, b), tol, 40)
}
