//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{domain, Result, SpectraError};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 50;

/// One panel: (Kronrod estimate, |Kronrod − Gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> Result<f64> {
    let (value, err) = whole;
    if err <= tol || err <= 1e3 * f64::EPSILON * value.abs() {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(SpectraError::IntegrationFailure {
            r: 0.5 * (a + b),
            reason: format!("quadrature did not converge on [{a}, {b}], error {err:e}"),
        });
    }
    let mid = 0.5 * (a + b);
    let left = gk15(f, a, mid);
    let right = gk15(f, mid, b);
    Ok(adapt(f, a, mid, left, 0.5 * tol, depth + 1)? + adapt(f, mid, b, right, 0.5 * tol, depth + 1)?)
}

/// `∫_a^b f` to relative tolerance `rel_tol` by recursive bisection.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || !(b > a) {
        return domain(format!("bad integration interval [{a}, {b}]"));
    }
    let whole = gk15(&f, a, b);
    // a coarse global pass sets the absolute target
    let mut coarse = 0.0;
    let panels = 16;
    for i in 0..panels {
        let x0 = a + (b - a) * i as f64 / panels as f64;
        let x1 = a + (b - a) * (i + 1) as f64 / panels as f64;
        coarse += gk15(&f, x0, x1).0.abs();
    }
    let tol = rel_tol * coarse.max(whole.0.abs()).max(f64::MIN_POSITIVE);
    adapt(&f, a, b, whole, tol, 0)
}

/// `∫_a^∞ f` for an integrand that decays monotonically in the tail: the
/// range is cut where `|f| < cutoff`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64, cutoff: f64) -> Result<f64> {
    let mut step = 1.0;
    let mut b = a + step;
    while f(b).abs() >= cutoff {
        step *= 2.0;
        b = a + step;
        if !b.is_finite() || step > 1e300 {
            return domain("integrand does not decay");
        }
    }
    integrate(f, a, b, rel_tol)
}
