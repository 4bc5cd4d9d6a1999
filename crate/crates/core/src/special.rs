//! Error function family.
//!
//! Rational Chebyshev approximations of W. J. Cody (Math. Comp. 1969),
//! accurate to near machine precision over the whole double range. The
//! interference CDF is `erfc` of a positive argument, so the relative
//! accuracy of `erfc` in the far tail matters as much as near zero.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

const FRAC_1_SQRT_PI: f64 = 5.641_895_835_477_562_869_5e-1;

// erf on |x| <= 0.46875
const A: [f64; 5] = [
    3.161_123_743_870_565_60e00,
    1.138_641_541_510_501_56e02,
    3.774_852_376_853_020_21e02,
    3.209_377_589_138_469_47e03,
    1.857_777_061_846_031_53e-1,
];
const B: [f64; 4] = [
    2.360_129_095_234_412_09e01,
    2.440_246_379_344_441_73e02,
    1.282_616_526_077_372_28e03,
    2.844_236_833_439_170_62e03,
];

// erfc on 0.46875 < |x| <= 4
const C: [f64; 9] = [
    5.641_884_969_886_700_89e-1,
    8.883_149_794_388_375_94e00,
    6.611_919_063_714_162_95e01,
    2.986_351_381_974_001_31e02,
    8.819_522_212_417_690_90e02,
    1.712_047_612_634_070_58e03,
    2.051_078_377_826_071_47e03,
    1.230_339_354_797_997_25e03,
    2.153_115_354_744_038_46e-8,
];
const D: [f64; 8] = [
    1.574_492_611_070_983_47e01,
    1.176_939_508_913_124_99e02,
    5.371_811_018_620_098_58e02,
    1.621_389_574_566_690_19e03,
    3.290_799_235_733_459_63e03,
    4.362_619_090_143_247_16e03,
    3.439_367_674_143_721_64e03,
    1.230_339_354_803_749_42e03,
];

// erfc on |x| > 4
const P: [f64; 6] = [
    3.053_266_349_612_323_44e-1,
    3.603_448_999_498_044_39e-1,
    1.257_817_261_112_292_46e-1,
    1.608_378_514_874_227_66e-2,
    6.587_491_615_298_378_03e-4,
    1.631_538_713_730_209_78e-2,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_42e00,
    1.872_952_849_923_460_47e00,
    5.279_051_029_514_284_12e-1,
    6.051_834_131_244_131_91e-2,
    2.335_204_976_268_691_85e-3,
];

const THRESH: f64 = 0.46875;
const XBIG: f64 = 26.543;
const XSMALL: f64 = 1.11e-16;

/// `exp(-y^2)` split as `exp(-ys^2) * exp(-(y - ys)(y + ys))` with `ys`
/// rounded to a multiple of 1/16, which keeps the product accurate for
/// large `y`.
fn exp_neg_sq(y: f64) -> f64 {
    let ys = (y * 16.0).trunc() / 16.0;
    let del = (y - ys) * (y + ys);
    (-ys * ys).exp() * (-del).exp()
}

/// erf on the small interval, where the rational form approximates erf directly.
fn erf_small(x: f64) -> f64 {
    let y = x.abs();
    let ysq = if y > XSMALL { y * y } else { 0.0 };
    let mut num = A[4] * ysq;
    let mut den = ysq;
    for i in 0..3 {
        num = (num + A[i]) * ysq;
        den = (den + B[i]) * ysq;
    }
    x * (num + A[3]) / (den + B[3])
}

/// erfc(|x|) for |x| > THRESH.
fn erfc_large(y: f64) -> f64 {
    if y <= 4.0 {
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        exp_neg_sq(y) * (num + C[7]) / (den + D[7])
    } else if y >= XBIG {
        0.0
    } else {
        let ysq = 1.0 / (y * y);
        let mut num = P[5] * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + P[i]) * ysq;
            den = (den + Q[i]) * ysq;
        }
        let r = ysq * (num + P[4]) / (den + Q[4]);
        exp_neg_sq(y) * (FRAC_1_SQRT_PI - r) / y
    }
}

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let y = x.abs();
    if y <= THRESH {
        return erf_small(x);
    }
    let r = (0.5 - erfc_large(y)) + 0.5;
    if x < 0.0 {
        -r
    } else {
        r
    }
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let y = x.abs();
    if y <= THRESH {
        return 1.0 - erf_small(x);
    }
    let r = erfc_large(y);
    if x < 0.0 {
        2.0 - r
    } else {
        r
    }
}

/// Inverse of `erfc` on (0, 2).
///
/// Bracketed Newton iteration; converges to a few ulps of the true root.
pub fn erfc_inv(u: f64) -> f64 {
    if !(u > 0.0 && u < 2.0) {
        return if u == 0.0 {
            f64::INFINITY
        } else if u == 2.0 {
            f64::NEG_INFINITY
        } else {
            f64::NAN
        };
    }
    if u > 1.0 {
        return -erfc_inv(2.0 - u);
    }
    // erfc is decreasing; bracket on [0, XBIG].
    let (mut lo, mut hi) = (0.0f64, XBIG);
    let mut x = {
        // Asymptotic starting point: erfc(x) ~ exp(-x^2) / (x sqrt(pi)).
        let t = (-u.ln()).max(0.0).sqrt();
        t.clamp(0.0, XBIG)
    };
    for _ in 0..200 {
        let f = erfc(x) - u;
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let deriv = -2.0 / PI.sqrt() * (-x * x).exp();
        let mut next = if deriv != 0.0 {
            x - f / deriv
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.abs().max(1e-300) || hi - lo <= f64::EPSILON * hi {
            return next;
        }
        x = next;
    }
    x
}
