//! Special functions backing the Student-t and normal quantiles.

use crate::scalar::Scalar;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma<S: Scalar>(x: S) -> S {
    let half = S::half();
    if x < half {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = S::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(S::one() - x);
    }
    let x = x - S::one();
    let mut acc = S::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + S::lit(c) / (x + S::count(i));
    }
    let t = x + S::lit(LANCZOS_G) + half;
    half * (S::two() * S::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

pub fn ln_beta<S: Scalar>(a: S, b: S) -> S {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

const MAX_CF_ITER: usize = 20_000;

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf<S: Scalar>(a: S, b: S, x: S) -> S {
    let one = S::one();
    let tiny = S::min_positive_value() / S::epsilon();
    let eps = S::epsilon();
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=MAX_CF_ITER {
        let m = S::count(m);
        let m2 = m + m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() <= eps {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
///
/// `y` must equal `1 - x`; passing it separately keeps full relative
/// precision when `x` is close to one.
pub fn inc_beta<S: Scalar>(a: S, b: S, x: S, y: S) -> S {
    let zero = S::zero();
    let one = S::one();
    if x <= zero {
        return zero;
    }
    if y <= zero {
        return one;
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + one) / (a + b + S::two()) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        one - ln_front.exp() * beta_cf(b, a, y) / b
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q<S: Scalar>(a: S, x: S) -> S {
    let zero = S::zero();
    let one = S::one();
    if x <= zero {
        return one;
    }
    let eps = S::epsilon();
    let ln_front = a * x.ln() - x - ln_gamma(a);
    if x < a + one {
        // series for P(a, x)
        let mut ap = a;
        let mut del = one / a;
        let mut sum = del;
        for _ in 0..MAX_CF_ITER {
            ap = ap + one;
            del = del * x / ap;
            sum = sum + del;
            if del.abs() < sum.abs() * eps {
                break;
            }
        }
        one - sum * ln_front.exp()
    } else {
        let tiny = S::min_positive_value() / eps;
        let mut b = x + one - a;
        let mut c = one / tiny;
        let mut d = one / b;
        let mut h = d;
        for i in 1..=MAX_CF_ITER {
            let i = S::count(i);
            let an = -i * (i - a);
            b = b + S::two();
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = one / d;
            let del = d * c;
            h = h * del;
            if (del - one).abs() <= eps {
                break;
            }
        }
        ln_front.exp() * h
    }
}

/// Complementary error function for `x >= 0`.
pub fn erfc<S: Scalar>(x: S) -> S {
    if x < S::zero() {
        return S::two() - erfc(-x);
    }
    gamma_q(S::half(), x * x)
}

/// Upper tail of the standard normal, `P(Z > x)`.
pub fn normal_upper_tail<S: Scalar>(x: S) -> S {
    S::half() * erfc(x / S::SQRT_2())
}

pub fn normal_pdf<S: Scalar>(x: S) -> S {
    (-S::half() * x * x).exp() / (S::two() * S::PI()).sqrt()
}

const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const ACKLAM_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACKLAM_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const ACKLAM_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn poly<S: Scalar>(coeffs: &[f64], x: S) -> S {
    coeffs.iter().fold(S::zero(), |acc, &c| acc * x + S::lit(c))
}

/// Standard normal quantile for a lower-tail probability `p` in (0, 1).
///
/// Rational approximation followed by two Halley refinements against
/// [`erfc`].
pub fn normal_quantile<S: Scalar>(p: S) -> S {
    let half = S::half();
    if p > half {
        return -normal_quantile(S::one() - p);
    }
    let p_low = S::lit(0.02425);
    let mut x = if p < p_low {
        let q = (-S::two() * p.ln()).sqrt();
        poly(&ACKLAM_C, q) / (poly(&ACKLAM_D, q) * q + S::one())
    } else {
        let q = p - half;
        let r = q * q;
        poly(&ACKLAM_A, r) * q / (poly(&ACKLAM_B, r) * r + S::one())
    };
    for _ in 0..2 {
        // Φ(x) for x <= 0 is the upper tail at -x
        let e = normal_upper_tail(-x) - p;
        let u = e / normal_pdf(x);
        x = x - u / (S::one() + x * u * half);
    }
    x
}
