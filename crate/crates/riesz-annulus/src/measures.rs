//! Edge-weighted signed measures on interval unions and evaluation of their
//! Riesz potentials W*mu (W(x) = |x|^{-s}) and fields `V[mu] = W*mu + U` with
//! U(x) = -(3/(1-s)) x^2.
//!
//! A measure piece on [a, b] is stored as a smooth factor u sampled at
//! Gauss–Jacobi nodes times the edge weight ((b-x)(x-a))^{-(1-s)/2}.  With
//! that weight the Riesz potential acts diagonally on Gegenbauer polynomials
//! C_m^{(s/2)}: mapping [a, b] to [-1, 1],
//!
//!   int |t0 - t|^{-s} C_m(t) (1-t^2)^{(s-1)/2} dt = Lam_m C_m(t0),  t0 in [-1,1],
//!
//! with Lam_0 = pi / cos(pi s / 2) and Lam_m = Lam_{m-1} (m-1+s)/m.  On-support
//! potentials are therefore evaluated spectrally from the Gegenbauer
//! coefficients of u; off-support points use the plain quadrature rule when
//! far enough and graded geometric panels near the interval endpoints.

use crate::error::{Error, Result};
use crate::quad::{self, jacobi_rule, JacobiRule};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// A closed interval [a, b] with a < b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!("interval needs a < b, got [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn half_length(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn mirrored(&self) -> Interval {
        Interval { a: -self.b, b: -self.a }
    }
}

/// Quadrature entry point: nodes and weights on `interval` for the
/// weight ((b-x)^alpha (x-a)^beta).
pub fn gauss_jacobi(
    n: usize,
    alpha: f64,
    beta: f64,
    interval: Interval,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(Error::Domain("gauss_jacobi needs n >= 2".into()));
    }
    let rule = jacobi_rule(n, alpha, beta)?;
    Ok(quad::mapped(&rule, interval.a(), interval.b()))
}

/// Values of C_m^{(lam)}(t) for m = 0..m_max-1.
pub(crate) fn gegenbauer_all(m_max: usize, lam: f64, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(m_max);
    if m_max == 0 {
        return;
    }
    out.push(1.0);
    if m_max == 1 {
        return;
    }
    out.push(2.0 * lam * t);
    for m in 2..m_max {
        let mf = m as f64;
        let next = (2.0 * (mf - 1.0 + lam) * t * out[m - 1] - (mf - 2.0 + 2.0 * lam) * out[m - 2]) / mf;
        out.push(next);
    }
}

/// Shared reference-interval machinery for a given (n, s): the standard
/// Gauss–Jacobi rule, Gegenbauer values at its nodes, norms and the Riesz
/// eigenvalues.
pub(crate) struct PieceBasis {
    pub rule: Arc<JacobiRule>,
    /// cmat[m][i] = C_m(t_i)
    pub cmat: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl PieceBasis {
    fn new(n: usize, s: f64) -> Result<Self> {
        let gamma_exp = (s - 1.0) / 2.0;
        let rule = jacobi_rule(n, gamma_exp, gamma_exp)?;
        let lam_g = s / 2.0;
        let mut cmat = vec![Vec::new(); n];
        let mut col = Vec::new();
        for i in 0..n {
            gegenbauer_all(n, lam_g, rule.nodes[i], &mut col);
            for (m, &v) in col.iter().enumerate() {
                cmat[m].push(v);
            }
        }
        // norms N_m = pi 2^{1-2 lam} Gamma(m+2 lam) / (m! (m+lam) Gamma(lam)^2), by ratio recurrence
        let mut norms = Vec::with_capacity(n);
        let g_lam = crate::special::gamma(lam_g)?;
        let g_2lam = crate::special::gamma(2.0 * lam_g)?;
        norms.push(std::f64::consts::PI * 2f64.powf(1.0 - 2.0 * lam_g) * g_2lam / (lam_g * g_lam * g_lam));
        for m in 1..n {
            let mf = m as f64;
            let prev = norms[m - 1];
            norms.push(prev * (mf - 1.0 + 2.0 * lam_g) / mf * (mf - 1.0 + lam_g) / (mf + lam_g));
        }
        let mut lambdas = Vec::with_capacity(n);
        lambdas.push(std::f64::consts::PI / (std::f64::consts::PI * s / 2.0).cos());
        for m in 1..n {
            let mf = m as f64;
            lambdas.push(lambdas[m - 1] * (mf - 1.0 + s) / mf);
        }
        Ok(PieceBasis { rule, cmat, norms, lambdas })
    }
}

fn basis_cache() -> &'static Mutex<HashMap<(usize, u64), Arc<PieceBasis>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<PieceBasis>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn piece_basis(n: usize, s: f64) -> Result<Arc<PieceBasis>> {
    let key = (n, s.to_bits());
    if let Some(b) = basis_cache().lock().unwrap().get(&key) {
        return Ok(b.clone());
    }
    let b = Arc::new(PieceBasis::new(n, s)?);
    basis_cache().lock().unwrap().insert(key, b.clone());
    Ok(b)
}

/// Kernel being integrated against a measure.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Kernel {
    /// |x - y|^{-s}
    Riesz { s: f64 },
    /// |x - y|^{b}
    Power { b: f64 },
}

impl Kernel {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            Kernel::Riesz { s } => r.powf(-s),
            Kernel::Power { b } => r.powf(b),
        }
    }

}

/// One measure piece: a smooth factor at Gauss–Jacobi nodes over the edge
/// weight ((b-x)(x-a))^{edge_exponent} on its interval.
#[derive(Clone)]
pub struct EdgeDensity {
    interval: Interval,
    edge_exponent: f64,
    s: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    smooth: Vec<f64>,
    bary: Vec<f64>,
    /// Gegenbauer coefficients of the smooth factor; present only when the
    /// edge exponent matches -(1-s)/2 so the diagonal form applies.
    geg: Option<Vec<f64>>,
    basis: Option<Arc<PieceBasis>>,
}

impl std::fmt::Debug for EdgeDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EdgeDensity")
            .field("interval", &self.interval)
            .field("edge_exponent", &self.edge_exponent)
            .field("n", &self.nodes.len())
            .finish()
    }
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0f64; n];
    for j in 0..n {
        let mut prod = 1.0f64;
        for k in 0..n {
            if k != j {
                prod *= nodes[j] - nodes[k];
                // rescale to dodge under/overflow for large n
                if prod.abs() > 1e150 {
                    prod *= 1e-150;
                } else if prod.abs() < 1e-150 {
                    prod *= 1e150;
                }
            }
        }
        w[j] = 1.0 / prod;
    }
    let max = w.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    for v in &mut w {
        *v /= max;
    }
    w
}

impl EdgeDensity {
    /// Piece with the standard edge exponent -(1-s)/2, smooth factor sampled
    /// from `f` at the Gauss–Jacobi nodes.
    pub fn from_fn<F: FnMut(f64) -> f64>(
        interval: Interval,
        s: f64,
        n: usize,
        mut f: F,
    ) -> Result<EdgeDensity> {
        check_s(s)?;
        let basis = piece_basis(n, s)?;
        let (nodes, weights) = quad::mapped(&basis.rule, interval.a(), interval.b());
        let smooth: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        Self::assemble(interval, (s - 1.0) / 2.0, s, nodes, weights, smooth, Some(basis))
    }

    /// Piece with standard edge exponent from precomputed smooth values.
    pub fn from_values(
        interval: Interval,
        s: f64,
        smooth: Vec<f64>,
    ) -> Result<EdgeDensity> {
        check_s(s)?;
        let basis = piece_basis(smooth.len(), s)?;
        let (nodes, weights) = quad::mapped(&basis.rule, interval.a(), interval.b());
        Self::assemble(interval, (s - 1.0) / 2.0, s, nodes, weights, smooth, Some(basis))
    }

    /// Piece with an arbitrary edge exponent (> -1).  No spectral on-support
    /// Riesz evaluation is available for these; they exist for smooth-kernel
    /// work such as the endpoint-case fixtures.
    pub fn from_fn_with_exponent<F: FnMut(f64) -> f64>(
        interval: Interval,
        s: f64,
        edge_exponent: f64,
        n: usize,
        mut f: F,
    ) -> Result<EdgeDensity> {
        let rule = jacobi_rule(n, edge_exponent, edge_exponent)?;
        let (nodes, weights) = quad::mapped(&rule, interval.a(), interval.b());
        let smooth: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        Self::assemble(interval, edge_exponent, s, nodes, weights, smooth, None)
    }

    fn assemble(
        interval: Interval,
        edge_exponent: f64,
        s: f64,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        smooth: Vec<f64>,
        basis: Option<Arc<PieceBasis>>,
    ) -> Result<EdgeDensity> {
        if smooth.len() != nodes.len() {
            return Err(Error::Domain("smooth factor length must match node count".into()));
        }
        let bary = barycentric_weights(&nodes);
        let geg = basis.as_ref().map(|b| {
            let n = nodes.len();
            let mut c = vec![0.0f64; n];
            for (m, cm) in c.iter_mut().enumerate() {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += b.rule.weights[i] * b.cmat[m][i] * smooth[i];
                }
                *cm = acc / b.norms[m];
            }
            c
        });
        Ok(EdgeDensity {
            interval,
            edge_exponent,
            s,
            nodes,
            weights,
            smooth,
            bary,
            geg,
            basis,
        })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn edge_exponent(&self) -> f64 {
        self.edge_exponent
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn smooth_values(&self) -> &[f64] {
        &self.smooth
    }

    /// Signed mass of this piece.
    pub fn mass(&self) -> f64 {
        self.weights.iter().zip(&self.smooth).map(|(w, u)| w * u).sum()
    }

    /// Smooth factor at arbitrary x by barycentric interpolation from the
    /// node values (exact at nodes).
    pub fn smooth_at(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.nodes.len() {
            let d = x - self.nodes[i];
            if d == 0.0 {
                return self.smooth[i];
            }
            let t = self.bary[i] / d;
            num += t * self.smooth[i];
            den += t;
        }
        num / den
    }

    /// Density value u(x) * ((b-x)(x-a))^{edge_exponent} at an interior point.
    pub fn density_at(&self, x: f64) -> Result<f64> {
        if !(x > self.interval.a() && x < self.interval.b()) {
            return Err(Error::Domain(format!(
                "density_at needs an interior point, got {x} for {:?}",
                self.interval
            )));
        }
        let w = ((self.interval.b() - x) * (x - self.interval.a())).powf(self.edge_exponent);
        Ok(self.smooth_at(x) * w)
    }

    /// Mirror image piece on [-b, -a].
    pub fn mirrored(&self) -> EdgeDensity {
        let interval = self.interval.mirrored();
        let nodes: Vec<f64> = self.nodes.iter().rev().map(|&x| -x).collect();
        let weights: Vec<f64> = self.weights.iter().rev().cloned().collect();
        let smooth: Vec<f64> = self.smooth.iter().rev().cloned().collect();
        Self::assemble(
            interval,
            self.edge_exponent,
            self.s,
            nodes,
            weights,
            smooth,
            self.basis.clone(),
        )
        .expect("mirroring preserves the piece layout")
    }

    /// Riesz potential of this piece at a point inside its interval, via the
    /// Gegenbauer diagonal form (spectrally exact for polynomial smooth
    /// factors of degree < n).
    pub(crate) fn self_riesz_potential(&self, x: f64) -> Result<f64> {
        let basis = self.basis.as_ref().ok_or_else(|| {
            Error::Domain("on-support Riesz potential needs the standard edge exponent".into())
        })?;
        let geg = self.geg.as_ref().unwrap();
        let t = (x - self.interval.midpoint()) / self.interval.half_length();
        let t = t.clamp(-1.0, 1.0);
        let mut vals = Vec::new();
        gegenbauer_all(self.n(), self.s / 2.0, t, &mut vals);
        Ok(geg
            .iter()
            .zip(&basis.lambdas)
            .zip(&vals)
            .map(|((c, l), v)| c * l * v)
            .sum())
    }

    /// int |x-y|^p dmu(y) for x strictly outside the interval (p may be
    /// positive; used for the gap-slab kernel in the F evaluation).
    pub(crate) fn exterior_power_integral(&self, p: f64, x: f64, panel_n: usize) -> f64 {
        self.exterior_kernel_integral(Kernel::Power { b: p }, x, panel_n)
    }

    /// Kernel integral against this piece for x strictly outside the interval.
    pub(crate) fn exterior_kernel_integral(&self, kernel: Kernel, x: f64, panel_n: usize) -> f64 {
        let iv = self.interval;
        let d = if x < iv.a() { iv.a() - x } else { x - iv.b() };
        debug_assert!(d > 0.0);
        if plain_rule_suffices(self.n(), d, iv.half_length()) {
            return self
                .nodes
                .iter()
                .zip(&self.weights)
                .zip(&self.smooth)
                .map(|((&y, &w), &u)| w * kernel.eval((x - y).abs()) * u)
                .sum();
        }
        self.graded_exterior(kernel, x, panel_n)
    }

    /// Graded geometric panels from the near endpoint; the first panel and
    /// the far half-panel use one-sided Jacobi rules matching the active edge
    /// factor, interior panels are Legendre with the edge factors in the
    /// integrand.
    fn graded_exterior(&self, kernel: Kernel, x: f64, m: usize) -> f64 {
        let iv = self.interval;
        let g = self.edge_exponent;
        let (near, far, sgn) = if x < iv.a() {
            (iv.a(), iv.b(), 1.0)
        } else {
            (iv.b(), iv.a(), -1.0)
        };
        let d = (near - x).abs();
        let len = iv.length();
        let r0 = d.clamp(1e-14 * len, 0.25 * len);

        let rule_first = jacobi_rule(m, 0.0, g).expect("valid exponent");
        let rule_mid = jacobi_rule(m, 0.0, 0.0).expect("legendre");
        let rule_far = jacobi_rule(m, g, 0.0).expect("valid exponent");

        let mut total = 0.0;
        // distance coordinate yd from the near endpoint
        let mut lo = 0.0f64;
        let mut hi = r0;
        let mut first = true;
        while lo < 0.5 * len {
            let h = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            if first {
                // weight (yd)^g handled by the rule: yd = h (1 + t)
                let scale = h.powf(1.0 + g);
                for (&t, &w) in rule_first.nodes.iter().zip(&rule_first.weights) {
                    let yd = h * (1.0 + t);
                    let y = near + sgn * yd;
                    let other = (far - y).abs();
                    total += scale * w * kernel.eval((x - y).abs()) * other.powf(g) * self.smooth_at(y);
                }
                first = false;
            } else {
                for (&t, &w) in rule_mid.nodes.iter().zip(&rule_mid.weights) {
                    let yd = mid + h * t;
                    let y = near + sgn * yd;
                    let other = (far - y).abs();
                    total += h * w * kernel.eval((x - y).abs()) * yd.powf(g) * other.powf(g) * self.smooth_at(y);
                }
            }
            lo = hi;
            hi = (2.0 * hi).min(0.5 * len);
        }
        // far half [len/2, len] in the distance coordinate, far-end factor in the rule
        let h = 0.25 * len;
        let mid = 0.75 * len;
        let scale = h.powf(1.0 + g);
        for (&t, &w) in rule_far.nodes.iter().zip(&rule_far.weights) {
            let yd = mid + h * t;
            let y = near + sgn * yd;
            total += scale * w * kernel.eval((x - y).abs()) * yd.powf(g) * self.smooth_at(y);
        }
        total
    }

    /// Power-kernel integral int |x-y|^b dmu(y) for x inside the interval,
    /// by splitting at y = x with Jacobi rules absorbing both the kernel
    /// factor and the edge factor on each side.
    pub(crate) fn interior_power_integral(&self, b: f64, x: f64, m: usize) -> f64 {
        let iv = self.interval;
        let g = self.edge_exponent;
        let mut total = 0.0;
        let tiny = 1e-14 * iv.length();
        if x - iv.a() > tiny {
            // weight (x-y)^b (y-a)^g on [a, x]
            let rule = jacobi_rule(m, b, g).expect("valid exponents");
            let (ys, ws) = quad::mapped(&rule, iv.a(), x);
            for (&y, &w) in ys.iter().zip(&ws) {
                total += w * (iv.b() - y).powf(g) * self.smooth_at(y);
            }
        }
        if iv.b() - x > tiny {
            // weight (b-y)^g (y-x)^b on [x, b]
            let rule = jacobi_rule(m, g, b).expect("valid exponents");
            let (ys, ws) = quad::mapped(&rule, x, iv.b());
            for (&y, &w) in ys.iter().zip(&ws) {
                total += w * (y - iv.a()).powf(g) * self.smooth_at(y);
            }
        }
        total
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("Riesz exponent s must lie in (0,1), got {s}")));
    }
    Ok(())
}

/// Geometric-convergence criterion for using the piece's own rule at an
/// exterior point: the nearest kernel singularity maps to the Bernstein
/// ellipse parameter rho = 1 + r + sqrt(2r + r^2) with r = d/h, and the
/// n-point rule error decays like rho^{-2n}.
fn plain_rule_suffices(n: usize, d: f64, h: f64) -> bool {
    let r = d / h;
    let rho = 1.0 + r + (2.0 * r + r * r).sqrt();
    2.0 * n as f64 * rho.ln() >= 32.0
}

/// A symmetric (or general) collection of edge-density pieces sharing one
/// kernel exponent.
#[derive(Debug, Clone)]
pub struct SignedMeasure {
    pieces: Vec<EdgeDensity>,
    symmetric: bool,
    s: f64,
}

impl SignedMeasure {
    pub fn new(pieces: Vec<EdgeDensity>, symmetric: bool, s: f64) -> Result<SignedMeasure> {
        if pieces.is_empty() {
            return Err(Error::Domain("measure needs at least one piece".into()));
        }
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Domain(format!("kernel exponent s must lie in (0,1], got {s}")));
        }
        let mut sorted: Vec<&EdgeDensity> = pieces.iter().collect();
        sorted.sort_by(|p, q| p.interval.a().partial_cmp(&q.interval.a()).unwrap());
        for w in sorted.windows(2) {
            if w[0].interval.b() > w[1].interval.a() + 1e-14 {
                return Err(Error::Domain("pieces must have pairwise disjoint interiors".into()));
            }
        }
        if symmetric {
            for p in &pieces {
                let m = p.interval.mirrored();
                let found = pieces.iter().any(|q| {
                    (q.interval.a() - m.a()).abs() < 1e-12 && (q.interval.b() - m.b()).abs() < 1e-12
                });
                if !found {
                    return Err(Error::Domain(
                        "symmetric measure needs mirrored pieces (or self-mirrored ones)".into(),
                    ));
                }
            }
        }
        Ok(SignedMeasure { pieces, symmetric, s })
    }

    /// Symmetric two-piece measure from the right-hand piece.
    pub fn symmetric_pair(right: EdgeDensity) -> Result<SignedMeasure> {
        let s = right.s;
        let left = right.mirrored();
        SignedMeasure::new(vec![left, right], true, s)
    }

    pub fn pieces(&self) -> &[EdgeDensity] {
        &self.pieces
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn b(&self) -> f64 {
        2.0 - self.s
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Rightmost piece (by left endpoint).
    pub fn right_piece(&self) -> &EdgeDensity {
        self.pieces
            .iter()
            .max_by(|p, q| p.interval.a().partial_cmp(&q.interval.a()).unwrap())
            .unwrap()
    }

    /// Support as a list of intervals, sorted.
    pub fn support(&self) -> Vec<Interval> {
        let mut ivs: Vec<Interval> = self.pieces.iter().map(|p| p.interval).collect();
        ivs.sort_by(|p, q| p.a().partial_cmp(&q.a()).unwrap());
        ivs
    }

    pub fn contains(&self, x: f64) -> bool {
        self.pieces.iter().any(|p| p.interval.contains(x))
    }

    /// Density at an interior point of the support.
    pub fn density_at(&self, x: f64) -> Result<f64> {
        for p in &self.pieces {
            if x > p.interval.a() && x < p.interval.b() {
                return p.density_at(x);
            }
        }
        Err(Error::Domain(format!("point {x} is not interior to the support")))
    }

    /// Signed total mass via the node weights.
    pub fn total_mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.mass()).sum()
    }

    /// Riesz potential (W * mu)(x) with W(y) = |y|^{-s}.
    ///
    /// On-support points use the spectral diagonal form; exterior points use
    /// the plain rule or graded panels depending on the distance to the piece.
    pub fn potential(&self, x: f64) -> Result<f64> {
        if self.s >= 1.0 {
            return Err(Error::Domain("Riesz potential needs s < 1".into()));
        }
        let kernel = Kernel::Riesz { s: self.s };
        let mut total = 0.0;
        for p in &self.pieces {
            let iv = p.interval;
            let edge_tol = 1e-13 * iv.length().max(1.0);
            if x >= iv.a() - edge_tol && x <= iv.b() + edge_tol {
                total += p.self_riesz_potential(x)?;
            } else {
                total += p.exterior_kernel_integral(kernel, x, 16);
            }
        }
        Ok(total)
    }

    /// `V[mu](x) = (W * mu)(x) - (3/(1-s)) x^2`.
    pub fn field_v(&self, x: f64) -> Result<f64> {
        Ok(self.potential(x)? - 3.0 / (1.0 - self.s) * x * x)
    }

    /// Original-variables field (script-W * mu)(x) + x^4/4 with
    /// script-W(y) = -|y|^b / b, b = 2 - s.
    ///
    /// The kernel is continuous, so no singularity subtraction is needed; the
    /// |x-y|^b kink at on-support points is absorbed exactly by split Jacobi
    /// rules.
    pub fn original_potential(&self, x: f64) -> Result<f64> {
        let b = self.b();
        if !(b >= 1.0 && b < 2.0 + 1e-12) {
            return Err(Error::Domain(format!("original potential needs b in [1,2), got {b}")));
        }
        let kernel = Kernel::Power { b };
        let mut conv = 0.0;
        for p in &self.pieces {
            let iv = p.interval;
            let edge_tol = 1e-14 * iv.length().max(1.0);
            if x > iv.a() + edge_tol && x < iv.b() - edge_tol {
                conv += p.interior_power_integral(b, x, p.n().max(24));
            } else if x >= iv.a() - edge_tol && x <= iv.b() + edge_tol {
                // endpoint: one-sided split, the empty side contributes nothing
                conv += p.interior_power_integral(b, x.clamp(iv.a(), iv.b()), p.n().max(24));
            } else {
                conv += p.exterior_kernel_integral(kernel, x, 16);
            }
        }
        Ok(-conv / b + x.powi(4) / 4.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{balayage_point_interval, equilibrium_interval, mu0_exact};
    use crate::RieszParams;
    use proptest::prelude::*;

    fn params(s: f64) -> RieszParams {
        RieszParams::from_s(s).unwrap()
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(0.0, 1.0).is_ok());
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(0.0, 0.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn gauss_jacobi_entry_point() {
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let (nodes, weights) = gauss_jacobi(2, 0.0, 0.0, iv).unwrap();
        let inv_sqrt3 = 1.0 / 3f64.sqrt();
        assert!((nodes[0] + inv_sqrt3).abs() < 1e-14);
        assert!((nodes[1] - inv_sqrt3).abs() < 1e-14);
        assert!((weights[0] - 1.0).abs() < 1e-14 && (weights[1] - 1.0).abs() < 1e-14);
        assert!(gauss_jacobi(1, 0.0, 0.0, iv).is_err());
        assert!(gauss_jacobi(8, -1.2, 0.0, iv).is_err());
    }

    #[test]
    fn two_point_endpoint_case_field() {
        // b = 2 endpoint: rho = (delta_1 + delta_{-1})/2; the original field
        // -(|x-1|^2 + |x+1|^2)/4 + x^4/4 equals -3/4 on {+-1} and exceeds it
        // elsewhere
        let field = |x: f64| -((x - 1.0).powi(2) + (x + 1.0).powi(2)) / 4.0 + x.powi(4) / 4.0;
        assert!((field(1.0) + 0.75).abs() < 1e-15);
        assert!((field(-1.0) + 0.75).abs() < 1e-15);
        for &x in &[-2.5, -0.5, 0.0, 0.7, 1.4, 3.0] {
            assert!(field(x) > -0.75, "x={x}: {}", field(x));
        }
    }

    #[test]
    fn equilibrium_potential_is_constant_on_support() {
        // W * omega_{a,b} is constant on [a, b]
        for &s in &[0.3, 0.7] {
            let p = params(s);
            let eq = equilibrium_interval(-0.4, 1.7, &p, 48).unwrap();
            let mu = SignedMeasure::new(vec![eq], false, s).unwrap();
            let vals: Vec<f64> = (0..20)
                .map(|i| {
                    let x = -0.4 + (i as f64 + 0.5) / 20.0 * 2.1;
                    mu.potential(x).unwrap()
                })
                .collect();
            let max = vals.iter().cloned().fold(f64::MIN, f64::max);
            let min = vals.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max - min < 1e-7, "s={s}: spread {}", max - min);
        }
    }

    #[test]
    fn mu0_field_vanishes_on_support() {
        for &s in &[0.3, 0.7] {
            let mu = mu0_exact(&params(s), 48).unwrap();
            for i in 0..10 {
                let x = -0.93 + i as f64 * 0.2;
                let v = mu.field_v(x).unwrap();
                assert!(v.abs() < 1e-7, "s={s} x={x}: V={v}");
            }
        }
    }

    #[test]
    fn potential_far_field_matches_multipole() {
        // two-term multipole: x^{-s} (1 + s(s+1)/(2(2+s)) x^{-2}) for the
        // unit-interval equilibrium measure (mean 0, second moment 1/(2+s))
        let s = 0.7;
        let eq = equilibrium_interval(-1.0, 1.0, &params(s), 48).unwrap();
        let mu = SignedMeasure::new(vec![eq], false, s).unwrap();
        let x = 100.0;
        let got = mu.potential(x).unwrap();
        let expect = x.powf(-s) * (1.0 + s * (s + 1.0) / (2.0 * (2.0 + s)) * x.powf(-2.0));
        assert!((got - expect).abs() / expect < 1e-6, "{got} vs {expect}");
    }

    #[test]
    fn point_balayage_potential_matches_point_source() {
        // W * Bal(delta_y, [a,b]) = |x - y|^{-s} on [a, b]
        let s = 0.6;
        let (a, b, y) = (-0.5, 1.0, -1.3);
        let bal = balayage_point_interval(y, a, b, &params(s), 64).unwrap();
        let mu = SignedMeasure::new(vec![bal], false, s).unwrap();
        for i in 0..=20 {
            let x = a + (i as f64 / 20.0) * (b - a);
            let got = mu.potential(x).unwrap();
            let expect = (x - y).abs().powf(-s);
            assert!(
                (got - expect).abs() < 1e-9,
                "x={x}: {got} vs {expect} (diff {})",
                got - expect
            );
        }
    }

    #[test]
    fn potential_even_for_symmetric_measures() {
        let mu = mu0_exact(&params(0.55), 40).unwrap();
        for &x in &[0.17, 0.62, 0.99, 1.5, 3.0] {
            let p1 = mu.potential(x).unwrap();
            let p2 = mu.potential(-x).unwrap();
            assert!((p1 - p2).abs() <= 1e-12 * p1.abs().max(1.0), "x={x}: {p1} vs {p2}");
        }
        // the external field vanishes at the origin
        assert_eq!(mu.field_v(0.0).unwrap(), mu.potential(0.0).unwrap());
    }

    #[test]
    fn potential_continuous_across_support_edge() {
        // graded exterior evaluation approaches the on-support edge value;
        // the approach rate is h^{(1-s)/2}, so use a small s for the check
        let s = 0.3;
        let mu = mu0_exact(&params(s), 64).unwrap();
        let v_edge = mu.potential(1.0).unwrap();
        let mut prev = f64::MAX;
        for &h in &[1e-2, 1e-4, 1e-6, 1e-8] {
            let diff = (mu.potential(1.0 + h).unwrap() - v_edge).abs();
            assert!(diff < prev, "not shrinking at h={h}");
            prev = diff;
        }
        assert!(prev < 1e-2 * v_edge.abs(), "residual gap {prev} vs edge {v_edge}");
    }

    #[test]
    fn quadrature_doubling_stability() {
        // doubling n moves potentials by less than 10x the quadrature tolerance
        let s = 0.45;
        let p = params(s);
        let tol = 1e-9;
        let mu1 = mu0_exact(&p, 48).unwrap();
        let mu2 = mu0_exact(&p, 96).unwrap();
        for &x in &[0.0, 0.5, 0.93, 1.2, 2.0] {
            let d = (mu1.potential(x).unwrap() - mu2.potential(x).unwrap()).abs();
            assert!(d <= 10.0 * tol, "x={x}: {d}");
        }
    }

    #[test]
    fn mirrored_pieces_double_the_mass() {
        let s = 0.7;
        let right = EdgeDensity::from_fn(Interval::new(0.3, 1.0).unwrap(), s, 32, |x| 1.0 + x).unwrap();
        let m_right = right.mass();
        let mu = SignedMeasure::symmetric_pair(right).unwrap();
        assert!((mu.total_mass() - 2.0 * m_right).abs() < 1e-14);
    }

    #[test]
    fn original_potential_b1_exact_minimizer() {
        // b = 1 endpoint: rho = (3/2) x^2 on [-1,1]; the original field is
        // constant (-3/4) on the support
        let piece = EdgeDensity::from_fn_with_exponent(
            Interval::new(-1.0, 1.0).unwrap(),
            1.0,
            0.0,
            48,
            |x| 1.5 * x * x,
        )
        .unwrap();
        let rho = SignedMeasure::new(vec![piece], true, 1.0).unwrap();
        assert!((rho.total_mass() - 1.0).abs() < 1e-12);
        for &x in &[-0.9, -0.4, 0.0, 0.3, 0.75, 1.0] {
            let f = rho.original_potential(x).unwrap();
            assert!((f + 0.75).abs() < 1e-9, "x={x}: {f}");
        }
        // off support the field exceeds the constant
        for &x in &[1.1, 1.6, 2.5] {
            assert!(rho.original_potential(x).unwrap() > -0.75);
        }
    }

    #[test]
    fn rejects_overlapping_pieces() {
        let s = 0.5;
        let p1 = EdgeDensity::from_fn(Interval::new(0.0, 1.0).unwrap(), s, 8, |_| 1.0).unwrap();
        let p2 = EdgeDensity::from_fn(Interval::new(0.5, 1.5).unwrap(), s, 8, |_| 1.0).unwrap();
        assert!(SignedMeasure::new(vec![p1, p2], false, s).is_err());
    }

    #[test]
    fn rejects_asymmetric_pair_with_symmetric_flag() {
        let s = 0.5;
        let p1 = EdgeDensity::from_fn(Interval::new(0.3, 1.0).unwrap(), s, 8, |_| 1.0).unwrap();
        let p2 = EdgeDensity::from_fn(Interval::new(-1.2, -0.3).unwrap(), s, 8, |_| 1.0).unwrap();
        assert!(SignedMeasure::new(vec![p1, p2], true, s).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn smooth_at_reproduces_polynomials(
            c0 in -2.0f64..2.0,
            c1 in -2.0f64..2.0,
            c2 in -2.0f64..2.0,
            x in -0.999f64..0.999,
        ) {
            let s = 0.7;
            let f = |y: f64| c0 + c1 * y + c2 * y * y;
            let piece = EdgeDensity::from_fn(Interval::new(-1.0, 1.0).unwrap(), s, 12, f).unwrap();
            prop_assert!((piece.smooth_at(x) - f(x)).abs() < 1e-10);
        }

        #[test]
        fn balayage_mass_at_most_source_mass(
            y in prop_oneof![-6.0f64..-1.05, 1.05f64..6.0],
            s in 0.15f64..0.9,
        ) {
            let p = RieszParams::from_s(s).unwrap();
            let bal = balayage_point_interval(y, -1.0, 1.0, &p, 32).unwrap();
            prop_assert!(bal.mass() <= 1.0 + 1e-12);
            prop_assert!(bal.mass() > 0.0);
        }
    }
}
