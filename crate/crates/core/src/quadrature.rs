//! Radial and spherical quadrature rules for continuum Fourier space.

use std::f64::consts::{LN_10, PI};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
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
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
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

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// `∫₀^ρ f(s) ds` for an integrand that may carry an integrable power-law
/// singularity at the origin.
///
/// The interval is cut into dyadic panels `[ρ2^{-k-1}, ρ2^{-k}]`, each
/// integrated adaptively; the panels below the last one are summed as a
/// geometric tail once contributions shrink geometrically.
pub fn origin_integral<F: Fn(f64) -> f64>(f: &F, rho: f64, tol: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Contract(format!("ball radius must be positive, got {rho}")));
    }
    let lo_rule = gauss_legendre(16);
    let hi_rule = gauss_legendre(32);
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut hi = rho;
    for _ in 0..1200 {
        let lo = 0.5 * hi;
        let piece = adaptive_panel(f, lo, hi, &lo_rule, &hi_rule, tol, 0)?;
        total += piece;
        if let Some(p) = prev {
            if p > 0.0 && piece >= 0.0 {
                let q = piece / p;
                if q < 0.999 && piece * q / (1.0 - q) <= tol * total.abs() {
                    return Ok(total + piece * q / (1.0 - q));
                }
            }
        }
        if piece == 0.0 && prev == Some(0.0) {
            // integrand vanishes near the origin
            return Ok(total);
        }
        prev = Some(piece);
        hi = lo;
        if hi < f64::MIN_POSITIVE * 1e10 {
            break;
        }
    }
    if total.is_finite() && prev.is_some_and(|p| p.abs() <= tol * total.abs()) {
        return Ok(total);
    }
    Err(Error::Numerical(format!(
        "ball integral on [0, {rho}] did not converge (partial sum {total:e}, last panel {:e})",
        prev.unwrap_or(f64::NAN)
    )))
}

fn adaptive_panel<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    lo_rule: &(Vec<f64>, Vec<f64>),
    hi_rule: &(Vec<f64>, Vec<f64>),
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let coarse = integrate_gl(f, a, b, lo_rule);
    let fine = integrate_gl(f, a, b, hi_rule);
    if !fine.is_finite() {
        return Err(Error::Numerical(format!("non-finite integrand on [{a:e}, {b:e}]")));
    }
    if (fine - coarse).abs() <= tol * fine.abs().max(1e-300) || (fine - coarse).abs() < 1e-300 {
        return Ok(fine);
    }
    if depth >= 30 {
        return Err(Error::Numerical(format!(
            "adaptive quadrature stalled on [{a:e}, {b:e}] (estimates {coarse:e} vs {fine:e})"
        )));
    }
    let m = 0.5 * (a + b);
    Ok(adaptive_panel(f, a, m, lo_rule, hi_rule, tol, depth + 1)?
        + adaptive_panel(f, m, b, lo_rule, hi_rule, tol, depth + 1)?)
}

/// Composite Gauss–Legendre rule in `ln ρ`: nodes and weights for
/// `∫ f(ρ) dρ` over `[rho_min, rho_max]`.
#[derive(Debug, Clone)]
pub struct LogRadialRule {
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl LogRadialRule {
    /// `panels_per_decade` panels with `points` Gauss nodes each; the last
    /// panel is shortened so that `rho_max` is a panel edge.
    pub fn new(rho_min: f64, rho_max: f64, panels_per_decade: usize, points: usize) -> Result<Self> {
        if !(rho_min > 0.0 && rho_max > rho_min) {
            return Err(Error::Contract(format!(
                "radial window needs 0 < rho_min < rho_max, got [{rho_min}, {rho_max}]"
            )));
        }
        let rule = gauss_legendre(points);
        let h = LN_10 / panels_per_decade as f64;
        let (lmin, lmax) = (rho_min.ln(), rho_max.ln());
        let mut radii = Vec::new();
        let mut weights = Vec::new();
        let mut a = lmin;
        while a < lmax - 1e-12 {
            let b = (a + h).min(lmax);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let rho = (mid + half * x).exp();
                radii.push(rho);
                weights.push(w * half * rho);
            }
            a = b;
        }
        Ok(Self {
            radii,
            weights,
            rho_min,
            rho_max,
        })
    }

    /// Like [`LogRadialRule::new`], with panel edges forced at every break
    /// inside the window (e.g. where a density is discontinuous).
    pub fn with_breaks(
        rho_min: f64,
        rho_max: f64,
        panels_per_decade: usize,
        points: usize,
        breaks: &[f64],
    ) -> Result<Self> {
        let mut edges = vec![rho_min];
        let mut inner: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&b| b > rho_min * (1.0 + 1e-12) && b < rho_max * (1.0 - 1e-12))
            .collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        edges.extend(inner);
        edges.push(rho_max);
        let mut out = Self::new(edges[0], edges[1], panels_per_decade, points)?;
        for pair in edges[1..].windows(2) {
            let seg = Self::new(pair[0], pair[1], panels_per_decade, points)?;
            out.radii.extend(seg.radii);
            out.weights.extend(seg.weights);
        }
        out.rho_max = rho_max;
        Ok(out)
    }

    /// `Σ wᵢ g(ρᵢ)` plus the power-law tail below `rho_min`, for integrand
    /// samples `g` at the nodes.
    pub fn integrate_samples(&self, g: &[f64]) -> f64 {
        let body: f64 = self.weights.iter().zip(g).map(|(w, v)| w * v).sum();
        if self.radii.len() < 2 {
            return body;
        }
        body + power_tail(self.rho_min, (self.radii[0], g[0]), (self.radii[1], g[1]))
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Extrapolated `∫₀^{upper} g`, assuming `g(ρ) ∝ ρ^α` below the node
/// `rho0`, with `α` taken from the two smallest nodes. Closes radial
/// quadratures whose integrands follow a power law at the origin.
pub fn power_tail(upper: f64, (rho0, g0): (f64, f64), (rho1, g1): (f64, f64)) -> f64 {
    if g0 <= 0.0 || g1 <= 0.0 {
        return 0.0;
    }
    let alpha = (g1 / g0).ln() / (rho1 / rho0).ln();
    if alpha <= -1.0 {
        return 0.0;
    }
    g0 * upper * (upper / rho0).powf(alpha) / (alpha + 1.0)
}

/// 26-point octahedral sphere rule (degree 7). Weights sum to one.
pub fn lebedev26() -> Vec<([f64; 3], f64)> {
    let mut out = Vec::with_capacity(26);
    let (w1, w2, w3) = (1.0 / 21.0, 4.0 / 105.0, 9.0 / 280.0);
    for d in 0..3 {
        for s in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[d] = s;
            out.push((v, w1));
        }
    }
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for sa in [1.0, -1.0] {
            for sb in [1.0, -1.0] {
                let mut v = [0.0; 3];
                v[a] = sa * r2;
                v[b] = sb * r2;
                out.push((v, w2));
            }
        }
    }
    let r3 = 1.0 / 3.0f64.sqrt();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                out.push(([sx * r3, sy * r3, sz * r3], w3));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(8);
        assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let v = integrate_gl(&|x: f64| x.powi(14), -1.0, 1.0, &rule);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
        let odd = gauss_legendre(7);
        assert!(odd.0[3].abs() < 1e-15);
    }

    #[test]
    fn origin_integral_handles_singular_power() {
        // ∫₀¹ s^{-0.8} ds = 5
        let v = origin_integral(&|s: f64| s.powf(-0.8), 1.0, 1e-12).unwrap();
        assert!((v - 5.0).abs() < 1e-9, "{v}");
        let v = origin_integral(&|s: f64| 4.0 * PI * s * s, 0.5, 1e-12).unwrap();
        assert!((v - 4.0 * PI / 3.0 * 0.125).abs() < 1e-13);
    }

    #[test]
    fn origin_integral_rejects_nonintegrable() {
        assert!(origin_integral(&|s: f64| 1.0 / s, 1.0, 1e-12).is_err());
    }

    #[test]
    fn log_rule_integrates_gaussian_shell() {
        let rule = LogRadialRule::new(1e-4, 1e2, 8, 8).unwrap();
        let f = |r: f64| 4.0 * PI * r * r * (-r * r).exp();
        let g: Vec<f64> = rule.radii.iter().map(|&r| f(r)).collect();
        let v = rule.integrate_samples(&g);
        assert!((v - PI.powf(1.5)).abs() < 1e-12 * PI.powf(1.5));
    }

    #[test]
    fn power_tail_closes_singular_integrand() {
        // ∫₀¹ ρ^{-1/2} dρ = 2
        let rule = LogRadialRule::with_breaks(1e-4, 1.0, 8, 8, &[0.3]).unwrap();
        let g: Vec<f64> = rule.radii.iter().map(|r| r.powf(-0.5)).collect();
        assert!((rule.integrate_samples(&g) - 2.0).abs() < 1e-12);
        assert_eq!(rule.len(), 4 * 64 + 8);
    }

    #[test]
    fn lebedev_is_exact_for_low_degree() {
        let rule = lebedev26();
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-15);
        // ⟨x²⟩ = 1/3, ⟨x⁴⟩ = 1/5, ⟨x²y²⟩ = 1/15, ⟨x⁶⟩ = 1/7
        let avg = |f: &dyn Fn([f64; 3]) -> f64| rule.iter().map(|(v, w)| w * f(*v)).sum::<f64>();
        assert!((avg(&|v| v[0] * v[0]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((avg(&|v| v[0].powi(4)) - 0.2).abs() < 1e-15);
        assert!((avg(&|v| v[0] * v[0] * v[1] * v[1]) - 1.0 / 15.0).abs() < 1e-15);
        assert!((avg(&|v| v[2].powi(6)) - 1.0 / 7.0).abs() < 1e-15);
    }
}
