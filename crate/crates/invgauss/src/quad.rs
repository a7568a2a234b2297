//! Gaussian quadrature rules (Legendre, Hermite, Jacobi) and panel-based
//! integration drivers used by every kernel and fractional-derivative
//! evaluation in the crate.
//!
//! All rules are generated by Newton iteration on the classical three-term
//! recurrences; nothing here is adaptive, so a fixed configuration always
//! produces bitwise-identical results.

use std::f64::consts::PI;

use crate::special::ln_gamma;

/// How an integrable endpoint power s^σ (σ > −1) is absorbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityHandling {
    /// Change of variables that flattens the power exactly.
    Substitution,
    /// Gauss–Jacobi rule carrying the power as an explicit weight.
    JacobiWeighted,
}

/// Node/truncation parameters shared by the quadrature-backed operations.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss nodes per panel (or per axis for tensor grids); at least 8.
    pub node_count: usize,
    /// Upper cutoff for half-line time integrals.
    pub truncation: f64,
    pub handling: SingularityHandling,
}

impl QuadratureConfig {
    pub fn new(node_count: usize, truncation: f64, handling: SingularityHandling) -> Self {
        assert!(node_count >= 8, "node_count must be at least 8");
        assert!(truncation > 0.0, "truncation must be positive");
        QuadratureConfig { node_count, truncation, handling }
    }
}

impl Default for QuadratureConfig {
    /// 200 Gauss–Legendre nodes per dyadic panel, truncation at t = 50.
    fn default() -> Self {
        QuadratureConfig::new(200, 50.0, SingularityHandling::Substitution)
    }
}

/// Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton.
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_deriv(n, z);
                pp = dp;
                let dz = p / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫_a^b f(x) dx.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Scaled nodes and weights on [a, b].
    pub fn scaled_to(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let xs = self.nodes.iter().map(|&x| mid + half * x).collect();
        let ws = self.weights.iter().map(|&w| w * half).collect();
        (xs, ws)
    }
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Hermite rule for ∫_{−∞}^{∞} e^{−x²} f(x) dx (physicists' weight).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..m {
            // Initial guesses from largest root inward (Numerical-Recipes style).
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pm1 = 0.0;
            for _ in 0..200 {
                let (p, prev) = hermite_orthonormal(n, z);
                pm1 = prev;
                let dp = (2.0 * nf).sqrt() * prev;
                let dz = p / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            let w = 1.0 / (nf * pm1 * pm1);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussHermite { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫ e^{−x²} f(x) dx.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Orthonormal Hermite value p_n(x) and p_{n−1}(x) (weight e^{−x²}).
fn hermite_orthonormal(n: usize, x: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

/// Gauss–Jacobi rule for ∫_{−1}^1 (1−x)^α (1+x)^β f(x) dx with α, β > −1.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussJacobi {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Self {
        assert!(n >= 1);
        assert!(alpha > -1.0 && beta > -1.0);
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut z = 0.0;
        for i in 0..n {
            // Initial guesses per Numerical-Recipes gaujac, largest root first.
            z = match i {
                0 => {
                    let an = alpha / nf;
                    let bn = beta / nf;
                    let r1 = (1.0 + alpha) * (2.78 / (4.0 + nf * nf) + 0.768 * an / nf);
                    let r2 = 1.0 + 1.48 * an + 0.96 * bn + 0.452 * an * an + 0.83 * an * bn;
                    1.0 - r1 / r2
                }
                1 => {
                    let r1 = (4.1 + alpha) / ((1.0 + alpha) * (1.0 + 0.156 * alpha));
                    let r2 = 1.0 + 0.06 * (nf - 8.0) * (1.0 + 0.12 * alpha) / nf;
                    let r3 = 1.0 + 0.012 * beta * (1.0 + 0.25 * alpha.abs()) / nf;
                    z - (1.0 - z) * r1 * r2 * r3
                }
                2 => {
                    let r1 = (1.67 + 0.28 * alpha) / (1.0 + 0.37 * alpha);
                    let r2 = 1.0 + 0.22 * (nf - 8.0) / nf;
                    let r3 = 1.0 + 8.0 * beta / ((6.28 + beta) * nf * nf);
                    z - (nodes[0] - z) * r1 * r2 * r3
                }
                _ if i == n - 2 => {
                    let r1 = (1.0 + 0.235 * beta) / (0.766 + 0.119 * beta);
                    let r2 = 1.0 / (1.0 + 0.639 * (nf - 4.0) / (1.0 + 0.71 * (nf - 4.0)));
                    let r3 = 1.0 / (1.0 + 20.0 * alpha / ((7.5 + alpha) * nf * nf));
                    z + (z - nodes[i - 2]) * r1 * r2 * r3
                }
                _ if i == n - 1 => {
                    let r1 = (1.0 + 0.37 * beta) / (1.67 + 0.28 * beta);
                    let r2 = 1.0 / (1.0 + 0.22 * (nf - 8.0) / nf);
                    let r3 = 1.0 / (1.0 + 8.0 * alpha / ((6.28 + alpha) * nf * nf));
                    z + (z - nodes[i - 2]) * r1 * r2 * r3
                }
                _ => 3.0 * nodes[i - 1] - 3.0 * nodes[i - 2] + nodes[i - 3],
            };
            let alfbet = alpha + beta;
            let mut pp = 0.0;
            let mut p2 = 0.0;
            for _ in 0..200 {
                // Jacobi recurrence for P_n^{(α,β)}.
                let mut temp = 2.0 + alfbet;
                let mut p1 = (alpha - beta + temp * z) / 2.0;
                p2 = 1.0;
                for j in 2..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    temp = 2.0 * jf + alfbet;
                    let a = 2.0 * jf * (jf + alfbet) * (temp - 2.0);
                    let b = (temp - 1.0) * (alpha * alpha - beta * beta + temp * (temp - 2.0) * z);
                    let c = 2.0 * (jf - 1.0 + alpha) * (jf - 1.0 + beta) * temp;
                    p1 = (b * p2 - c * p3) / a;
                }
                pp = (nf * (alpha - beta - temp * z) * p1
                    + 2.0 * (nf + alpha) * (nf + beta) * p2)
                    / (temp * (1.0 - z * z));
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 3e-15 {
                    break;
                }
            }
            nodes[i] = z;
            weights[i] = (ln_gamma(alpha + nf) + ln_gamma(beta + nf)
                - ln_gamma(nf + 1.0)
                - ln_gamma(nf + alfbet + 1.0))
                .exp()
                * (2.0 * nf + alfbet)
                * 2f64.powf(alfbet)
                / (pp * p2);
        }
        GaussJacobi { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫_{−1}^1 (1−x)^α (1+x)^β f(x) dx.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Panel breakpoints on [a, b], geometrically refined toward `a`.
/// The first panel has length (b−a)·2^{1−count}.
pub fn geometric_breakpoints(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(b > a && count >= 1);
    let mut cuts = Vec::with_capacity(count + 1);
    cuts.push(a);
    for j in (0..count - 1).rev() {
        cuts.push(a + (b - a) * 0.5f64.powi(j as i32 + 1));
    }
    cuts.push(b);
    cuts
}

/// ∫ f over the consecutive panels delimited by `cuts`, left to right.
pub fn integrate_panels<F: FnMut(f64) -> f64>(rule: &GaussLegendre, cuts: &[f64], mut f: F) -> f64 {
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        acc += rule.integrate(w[0], w[1], &mut f);
    }
    acc
}

/// ∫_0^∞ f with dyadic panels [0,h],[h,2h],[2h,4h],… up to `truncation`,
/// where h = truncation·2^{−(panels−1)}.
pub fn integrate_halfline<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    truncation: f64,
    panels: usize,
    f: F,
) -> f64 {
    let cuts = geometric_breakpoints(0.0, truncation, panels);
    integrate_panels(rule, &cuts, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::special::gamma;

    #[test]
    fn legendre_polynomial_exactness() {
        let rule = GaussLegendre::new(6);
        // exact for degree ≤ 11
        for deg in 0..=11u32 {
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-13, "deg={deg}: {got} vs {want}");
        }
        assert_relative_eq!(rule.weights().iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn legendre_known_gaussian() {
        let rule = GaussLegendre::new(64);
        let got = rule.integrate(-6.0, 6.0, |x| (-x * x).exp());
        assert_relative_eq!(got, PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn hermite_rule_moments() {
        for n in [1usize, 2, 5, 20, 41, 64] {
            let rule = GaussHermite::new(n);
            assert_relative_eq!(
                rule.weights().iter().sum::<f64>(),
                PI.sqrt(),
                max_relative = 1e-12
            );
        }
        let rule = GaussHermite::new(12);
        // ∫ e^{−x²} x^{2m} dx = Γ(m + 1/2), exact for 2m ≤ 23
        for m in 0..=11u32 {
            let got = rule.integrate(|x| x.powi(2 * m as i32));
            assert_relative_eq!(got, gamma(m as f64 + 0.5), max_relative = 1e-11);
        }
    }

    #[test]
    fn jacobi_reduces_to_legendre() {
        let gj = GaussJacobi::new(10, 0.0, 0.0);
        let gl = GaussLegendre::new(10);
        let mut a: Vec<f64> = gj.nodes().to_vec();
        a.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(gl.nodes()) {
            assert!((x - y).abs() < 1e-12);
        }
        let got = gj.integrate(|x| x * x + 0.3 * x);
        assert_relative_eq!(got, 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn jacobi_moments() {
        // ∫_{−1}^1 (1−x)^α dx = 2^{α+1}/(α+1)
        for &alpha in &[-0.5, -0.3, 0.7, 1.5] {
            let gj = GaussJacobi::new(16, alpha, 0.0);
            let total: f64 = gj.weights().iter().sum();
            assert_relative_eq!(total, 2f64.powf(alpha + 1.0) / (alpha + 1.0), max_relative = 1e-10);
            // first moment: ∫ (1−x)^α x dx = 2^{α+1}·(… ) — cross-check by substitution u = (1−x)/2:
            // ∫ = 2^{α+1} ∫_0^1 u^α (1−2u) du = 2^{α+1} (1/(α+1) − 2/(α+2))
            let got = gj.integrate(|x| x);
            let want = 2f64.powf(alpha + 1.0) * (1.0 / (alpha + 1.0) - 2.0 / (alpha + 2.0));
            assert_relative_eq!(got, want, max_relative = 1e-9);
        }
    }

    #[test]
    fn jacobi_vs_substitution_route() {
        // ∫_0^1 s^{−0.4} cos(s) ds two ways
        let a = -0.4f64;
        let gj = GaussJacobi::new(24, a, 0.0);
        // s = (1−x)/2 ⇒ ∫_0^1 s^a f(s) ds = 2^{−a−1} ∫ (1−x)^a f((1−x)/2) dx
        let via_jacobi = 2f64.powf(-a - 1.0) * gj.integrate(|x| ((1.0 - x) / 2.0f64).cos());
        // s = w^{1/(1+a)} flattening: ∫_0^1 s^a f(s) ds = p·∫_0^1 f(w^p) dw
        let p = 1.0 / (1.0 + a);
        let gl = GaussLegendre::new(64);
        let via_subst = p * gl.integrate(0.0, 1.0, |w| w.powf(p).cos());
        assert_relative_eq!(via_jacobi, via_subst, max_relative = 1e-8);
    }

    #[test]
    fn halfline_exponential() {
        let rule = GaussLegendre::new(32);
        let got = integrate_halfline(&rule, 60.0, 24, |t| (-t).exp());
        assert_relative_eq!(got, 1.0, max_relative = 1e-12);
        let got2 = integrate_halfline(&rule, 60.0, 24, |t| t * t * (-t).exp());
        assert_relative_eq!(got2, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn geometric_breakpoints_shape() {
        let cuts = geometric_breakpoints(0.0, 8.0, 4);
        assert_eq!(cuts, vec![0.0, 1.0, 2.0, 4.0, 8.0]);
    }
}
