//! Special functions needed by the closed-form oracles and the NIG density.

use crate::real::Real;

/// Gamma function.
#[inline]
pub fn gamma<T: Real>(x: T) -> T {
    x.tgamma()
}

/// Modified Bessel function of the first kind, order one.
fn bessel_i1<T: Real>(x: T) -> T {
    let ax = x.abs();
    let l = T::lit;
    if ax < l(3.75) {
        let y = (x / l(3.75)).powi(2);
        x * (l(0.5)
            + y * (l(0.878_905_94)
                + y * (l(0.514_988_69)
                    + y * (l(0.150_849_34)
                        + y * (l(0.026_587_33) + y * (l(0.003_015_32) + y * l(0.000_324_11)))))))
    } else {
        let y = l(3.75) / ax;
        let mut ans = l(0.022_829_67) + y * (l(-0.028_953_12) + y * (l(0.017_876_54) - y * l(0.004_200_59)));
        ans = l(0.398_942_28)
            + y * (l(-0.039_880_24) + y * (l(-0.003_620_18) + y * (l(0.001_638_01) + y * (l(-0.010_315_55) + y * ans))));
        ans = ans * ax.exp() / ax.sqrt();
        if x < T::zero() {
            -ans
        } else {
            ans
        }
    }
}

/// Modified Bessel function of the second kind, order one, for `x > 0`.
/// Polynomial approximations with relative error around 1e-7.
pub fn bessel_k1<T: Real>(x: T) -> T {
    let l = T::lit;
    if x <= l(2.0) {
        let y = x * x / l(4.0);
        (x / l(2.0)).ln() * bessel_i1(x)
            + (T::one() / x)
                * (T::one()
                    + y * (l(0.154_431_44)
                        + y * (l(-0.672_785_79)
                            + y * (l(-0.181_568_97)
                                + y * (l(-0.019_194_02) + y * (l(-0.001_104_04) + y * l(-0.000_046_86)))))))
    } else {
        let y = l(2.0) / x;
        ((-x).exp() / x.sqrt())
            * (l(1.253_314_14)
                + y * (l(0.234_986_19)
                    + y * (l(-0.036_556_20)
                        + y * (l(0.015_042_68)
                            + y * (l(-0.007_803_53) + y * (l(0.003_256_14) + y * l(-0.000_682_45)))))))
    }
}
