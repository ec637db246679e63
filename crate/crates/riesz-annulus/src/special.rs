//! Special functions and the closed-form measures used both as solver inputs
//! and as oracles for the numerical machinery.
//!
//! The gamma function uses the Lanczos approximation with the coefficients
//! from Pugh's thesis (g = 10.900511, 11 terms), accurate to close to full
//! double precision on the positive axis.

use crate::error::{Error, Result};
use crate::measures::{EdgeDensity, Interval, SignedMeasure};
use crate::RieszParams;

/// Polynomial coefficients for the Lanczos approximation of gamma.
const LANCZOS_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];

/// Auxiliary shift in the Lanczos approximation.
const LANCZOS_R: f64 = 10.900511;

const TWO_SQRT_E_OVER_PI: f64 = 1.8603827342052657173362492472666631120594218414085755;
const LN_2_SQRT_E_OVER_PI: f64 = 0.6207822376352452223455184457816472122518527279025978;

/// Gamma function for positive arguments.
///
/// Accurate to at least 12 significant digits on (0, 170); overflows to
/// `inf` beyond the representable range like `tgamma`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection through Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let s: f64 = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |acc, (i, &d)| acc + d / (i as f64 - x));
        std::f64::consts::PI
            / ((std::f64::consts::PI * x).sin()
                * s
                * TWO_SQRT_E_OVER_PI
                * ((0.5 - x + LANCZOS_R) / std::f64::consts::E).powf(0.5 - x))
    } else {
        let s: f64 = LANCZOS_DK
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_DK[0], |acc, (i, &d)| acc + d / (x + i as f64 - 1.0));
        s * TWO_SQRT_E_OVER_PI * ((x - 0.5 + LANCZOS_R) / std::f64::consts::E).powf(x - 0.5)
    }
}

/// Natural log of gamma for positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        let pi = std::f64::consts::PI;
        return Ok(pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x)?);
    }
    let s: f64 = LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |acc, (i, &d)| acc + d / (x + i as f64 - 1.0));
    Ok(s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / std::f64::consts::E).ln())
}

/// Beta function B(p, q), computed as a gamma ratio in log space.
pub fn beta(p: f64, q: f64) -> Result<f64> {
    Ok((ln_gamma(p)? + ln_gamma(q)? - ln_gamma(p + q)?).exp())
}

/// Equilibrium measure of W(x) = |x|^{-s} on the interval [a, b]:
/// a constant smooth factor times the edge weight ((b-x)(x-a))^{-(1-s)/2},
/// normalized to total mass one.
pub fn equilibrium_interval(a: f64, b: f64, params: &RieszParams, n: usize) -> Result<EdgeDensity> {
    let iv = Interval::new(a, b)?;
    let s = params.s;
    let c = (b - a).powf(-s) * gamma(1.0 + s)? / gamma((1.0 + s) / 2.0)?.powi(2);
    EdgeDensity::from_fn(iv, s, n, |_| c)
}

/// Balayage of a unit point mass at `y` onto the interval [a, b] (closed form):
/// smooth factor (cos(pi s/2)/pi) ((b-y)(a-y))^{(1-s)/2} / |x-y| over the
/// usual edge weight.
pub fn balayage_point_interval(
    y: f64,
    a: f64,
    b: f64,
    params: &RieszParams,
    n: usize,
) -> Result<EdgeDensity> {
    let iv = Interval::new(a, b)?;
    if y >= a && y <= b {
        return Err(Error::Domain(format!(
            "point balayage requires y outside [{a}, {b}], got {y}"
        )));
    }
    let s = params.s;
    let pref = (std::f64::consts::PI * s / 2.0).cos() / std::f64::consts::PI
        * ((b - y) * (a - y)).powf((1.0 - s) / 2.0);
    EdgeDensity::from_fn(iv, s, n, |x| pref / (x - y).abs())
}

/// The explicit steady state on a single interval (the lambda = 0 case):
/// density C01 (1-x^2)^{-(1-s)/2} - C02 (1-x^2)^{(1+s)/2} on [-1, 1].
///
/// Its smooth factor over the edge weight is the quadratic
/// C01 (1 - 2(1-x^2)/(1+s)), which vanishes at x = sqrt((1-s)/2).
pub fn mu0_exact(params: &RieszParams, n: usize) -> Result<SignedMeasure> {
    let s = params.s;
    let (c01, c02) = mu0_constants(params)?;
    let piece = EdgeDensity::from_fn(Interval::new(-1.0, 1.0)?, s, n, |x| {
        c01 - c02 * (1.0 - x * x)
    })?;
    SignedMeasure::new(vec![piece], true, s)
}

/// The constants C01 and C02 of the explicit single-interval steady state.
pub fn mu0_constants(params: &RieszParams) -> Result<(f64, f64)> {
    let s = params.s;
    let c01 = 3.0 / (s * (1.0 - s) * gamma((1.0 - s) / 2.0)? * gamma((1.0 + s) / 2.0)?);
    let c02 = 2.0 * c01 / (1.0 + s);
    Ok((c01, c02))
}

/// Location of the sign change of the single-interval steady state.
///
/// The smooth factor C01 - C02 (1 - x^2) vanishes where 1 - x^2 = (1+s)/2,
/// i.e. at x = sqrt((1-s)/2).
pub fn mu0_sign_change(params: &RieszParams) -> f64 {
    ((1.0 - params.s) / 2.0).sqrt()
}

/// Kelvin transform x* = 1/(x - center) + center.
pub fn kelvin_transform(x: f64, center: f64) -> f64 {
    1.0 / (x - center) + center
}

/// Balayage of a unit point mass at `x0` onto a finite union of disjoint
/// closed intervals, via the Kelvin transform: the density is
/// rho_eq(x*) |x - x0|^{s-2} / C0, where rho_eq is the equilibrium measure
/// on the transformed set K* and C0 its equilibrium constant.
pub fn kelvin_point_balayage(
    x0: f64,
    k: &[Interval],
    params: &RieszParams,
    cfg: &crate::balayage::SolveConfig,
) -> Result<SignedMeasure> {
    let s = params.s;
    for iv in k {
        if x0 >= iv.a() && x0 <= iv.b() {
            return Err(Error::Domain(format!(
                "kelvin balayage requires the point {x0} outside the target set"
            )));
        }
    }
    // image intervals (the transform is monotone decreasing on each side of x0)
    let images: Vec<Interval> = k
        .iter()
        .map(|iv| {
            let (p, q) = (kelvin_transform(iv.a(), x0), kelvin_transform(iv.b(), x0));
            Interval::new(p.min(q), p.max(q))
        })
        .collect::<Result<_>>()?;
    let eq = crate::balayage::solve_equilibrium(&images, params, cfg)?;
    let c0 = eq.constant;
    let rho = &eq.measure;

    // sample the pulled-back density against each target interval's edge weight
    let mut pieces = Vec::with_capacity(k.len());
    for iv in k {
        let piece = EdgeDensity::from_fn(*iv, s, cfg.n_nodes, |x| {
            let xs = kelvin_transform(x, x0);
            let dens = rho.density_at(xs).expect("image point lies inside K*");
            let w = ((iv.b() - x) * (x - iv.a())).powf(-(1.0 - s) / 2.0);
            dens * (x - x0).abs().powf(s - 2.0) / c0 / w
        })?;
        pieces.push(piece);
    }
    SignedMeasure::new(pieces, false, s)
}
