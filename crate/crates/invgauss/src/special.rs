//! Exact combinatorial and polynomial primitives: Hermite polynomials,
//! Stirling numbers of the second kind, multinomial coefficients, log-Gamma
//! and the time-derivative coefficient tables for the Euclidean heat and
//! Poisson kernels.
//!
//! Combinatorial quantities are computed with exact big-integer arithmetic;
//! conversion to `f64` happens only at kernel-evaluation time.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecialError {
    #[error("multi-index must have at least one entry")]
    EmptyMultiIndex,
    #[error("derivative order {0} exceeds the supported table range")]
    OrderTooLarge(u32),
}

/// Largest time-derivative order for which coefficient tables are built.
/// The combinatorial sums mix large alternating terms; beyond this order the
/// cancellation error in `f64` is no longer negligible.
pub const MAX_DERIV_ORDER: u32 = 8;

/// Multi-index k ∈ ℕⁿ labelling a tensor Hermite eigenfunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    /// Builds a multi-index; the dimension must be at least one.
    pub fn new(entries: Vec<u32>) -> Result<Self, SpecialError> {
        if entries.is_empty() {
            return Err(SpecialError::EmptyMultiIndex);
        }
        Ok(MultiIndex(entries))
    }

    /// The zero multi-index in dimension `n`.
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        MultiIndex(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |k| = k_1 + … + k_n.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// k + e_i (zero-based axis).
    pub fn shift_up(&self, axis: usize) -> Self {
        let mut e = self.0.clone();
        e[axis] += 1;
        MultiIndex(e)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Physicists' Hermite polynomial H_k(z), evaluated with the three-term
/// recurrence H_{m+1} = 2z·H_m − 2m·H_{m−1}.
///
/// Total function: for very large `k` the value may overflow to ±∞, which is
/// the `f64` range-error signal.
pub fn hermite(k: u32, z: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0 * z,
        _ => {
            let mut prev = 1.0;
            let mut cur = 2.0 * z;
            for m in 1..k {
                let next = 2.0 * z * cur - 2.0 * (m as f64) * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Values H_0(z), …, H_max(z) in one pass of the recurrence.
pub fn hermite_upto(max: u32, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(1.0);
    if max == 0 {
        return out;
    }
    out.push(2.0 * z);
    for m in 1..max {
        let next = 2.0 * z * out[m as usize] - 2.0 * (m as f64) * out[m as usize - 1];
        out.push(next);
    }
    out
}

/// Tensor Hermite polynomial ℋ_k(x) = Π_i H_{k_i}(x_i).
///
/// Panics if the dimensions of `k` and `x` differ.
pub fn hermite_tensor(k: &MultiIndex, x: &[f64]) -> f64 {
    assert_eq!(
        k.dim(),
        x.len(),
        "multi-index dimension {} does not match point dimension {}",
        k.dim(),
        x.len()
    );
    k.entries()
        .iter()
        .zip(x)
        .map(|(&ki, &xi)| hermite(ki, xi))
        .product()
}

/// Stirling number of the second kind {N, L}: the number of partitions of an
/// N-set into L nonempty subsets. Returns 0 when L > N (convention).
pub fn stirling2(n: u32, l: u32) -> BigUint {
    if l > n {
        return BigUint::zero();
    }
    if n == 0 {
        return BigUint::one(); // {0,0} = 1
    }
    if l == 0 {
        return BigUint::zero();
    }
    // Row DP over {m, j} = {m−1, j−1} + j·{m−1, j}.
    let mut row = vec![BigUint::zero(); l as usize + 1];
    row[0] = BigUint::one();
    for m in 1..=n {
        let top = l.min(m) as usize;
        for j in (1..=top).rev() {
            let keep = &row[j] * BigUint::from(j);
            row[j] = &row[j - 1] + keep;
        }
        if m <= l {
            // {m, 0} = 0 once m ≥ 1
            row[0] = BigUint::zero();
        }
    }
    row[l as usize].clone()
}

/// Binomial coefficient C(n, k) as an exact big integer.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    for j in 0..k {
        num *= BigUint::from(n - j);
        num /= BigUint::from(j + 1);
    }
    num
}

/// Multinomial coefficient k! / (m_1!·…·m_r!) with Σ m_i = k.
pub fn multinomial(parts: &[u32]) -> BigUint {
    let mut total = 0u32;
    let mut out = BigUint::one();
    for &p in parts {
        total += p;
        out *= binomial(total, p);
    }
    out
}

/// Natural logarithm of the Gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Γ(x) for moderate positive arguments.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

pub(crate) fn big_to_f64(b: &BigUint) -> f64 {
    b.to_f64().unwrap_or(f64::INFINITY)
}

/// Which Euclidean kernel family a derivative-coefficient table describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivFamily {
    Heat,
    Poisson,
}

/// Coefficients of the polynomial part of t^k ∂_t^k of a Euclidean kernel.
///
/// Heat: t^k ∂_t^k T_t(z) = T_t(z) · Σ_j a_j (|z|²/2t)^j with a_k = 1.
/// Poisson: t^m ∂_t^m P_t(z) = P_t(z) · Σ_j a_j u^j / (1+u)^m, u = (|z|/t)²,
/// with leading coefficient m!.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivCoeffTable {
    pub order: u32,
    pub dimension: u32,
    pub family: DerivFamily,
    pub coeffs: Vec<f64>,
}

impl DerivCoeffTable {
    /// Evaluates the coefficient polynomial Σ_j a_j w^j by Horner's rule.
    pub fn poly(&self, w: f64) -> f64 {
        let mut acc = 0.0;
        for &a in self.coeffs.iter().rev() {
            acc = acc * w + a;
        }
        acc
    }
}

/// Coefficient table for t^k ∂_t^k T_t(z) over the Euclidean heat kernel in
/// dimension `n`.
///
/// Generated by differentiating the order-k form once more:
/// p_{k+1}(w) = (w − n/2 − k)·p_k(w) − w·p_k'(w), starting from p_0 = 1.
pub fn heat_deriv_coeffs(order: u32, n: u32) -> Result<DerivCoeffTable, SpecialError> {
    if order > MAX_DERIV_ORDER {
        return Err(SpecialError::OrderTooLarge(order));
    }
    assert!(n >= 1, "dimension must be at least 1");
    let half_n = n as f64 / 2.0;
    let mut p = vec![1.0_f64];
    for k in 0..order {
        let mut next = vec![0.0; p.len() + 1];
        for (j, &a) in p.iter().enumerate() {
            let jf = j as f64;
            next[j + 1] += a; // w·p_k
            next[j] -= (half_n + k as f64 + jf) * a; // −(n/2 + k + j)·a_j
        }
        p = next;
    }
    Ok(DerivCoeffTable {
        order,
        dimension: n,
        family: DerivFamily::Heat,
        coeffs: p,
    })
}

/// Coefficient table for t^m ∂_t^m P_t(z) over the Euclidean Poisson kernel:
/// the numerator polynomial over (1 + (|z|/t)²)^m multiplying P_t(z).
///
/// Recurrence (u = (|z|/t)²):
/// q_{m+1}(u) = ((1+m)u − (n+m))·q_m(u) − 2u(1+u)·q_m'(u), q_0 = 1.
pub fn poisson_deriv_coeffs(order: u32, n: u32) -> Result<DerivCoeffTable, SpecialError> {
    if order > MAX_DERIV_ORDER {
        return Err(SpecialError::OrderTooLarge(order));
    }
    assert!(n >= 1, "dimension must be at least 1");
    let nf = n as f64;
    let mut q = vec![1.0_f64];
    for m in 0..order {
        let mf = m as f64;
        let mut next = vec![0.0; q.len() + 1];
        for (j, &a) in q.iter().enumerate() {
            let jf = j as f64;
            next[j + 1] += (1.0 + mf) * a; // (1+m)u·q
            next[j] -= (nf + mf) * a; // −(n+m)·q
            // −2u(1+u)q' contributes −2j·a to degrees j and j+1
            next[j] -= 2.0 * jf * a;
            next[j + 1] -= 2.0 * jf * a;
        }
        q = next;
    }
    Ok(DerivCoeffTable {
        order,
        dimension: n,
        family: DerivFamily::Poisson,
        coeffs: q,
    })
}

/// All multi-indices m ∈ ℕ^n with |m| = total, in lexicographic order.
pub fn compositions(total: u32, n: usize) -> Vec<Vec<u32>> {
    fn rec(total: u32, n: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            rec(total - first, n - 1, prefix, out);
            prefix.pop();
        }
    }
    assert!(n >= 1);
    let mut out = Vec::new();
    rec(total, n, &mut Vec::new(), &mut out);
    out
}

/// All multi-indices k ∈ ℕ^n with |k| ≤ max_order, in lexicographic order.
pub fn multi_indices_upto(max_order: u32, n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for total in 0..=max_order {
        for c in compositions(total, n) {
            out.push(MultiIndex(c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_bigint::BigInt;

    /// Rodrigues-formula oracle: H_k = (−1)^k e^{z²} d^k/dz^k e^{−z²},
    /// carried out symbolically on integer polynomial coefficients.
    fn hermite_rodrigues_coeffs(k: u32) -> Vec<BigInt> {
        // q_0 = 1; q_{j+1} = q_j' − 2z·q_j; H_k = (−1)^k q_k.
        let mut q: Vec<BigInt> = vec![BigInt::from(1)];
        for _ in 0..k {
            let mut next = vec![BigInt::from(0); q.len() + 1];
            for (d, c) in q.iter().enumerate() {
                if d >= 1 {
                    next[d - 1] += c * BigInt::from(d);
                }
                next[d + 1] -= 2 * c;
            }
            q = next;
        }
        if k % 2 == 1 {
            for c in q.iter_mut() {
                *c = -c.clone();
            }
        }
        q
    }

    fn eval_int_poly(c: &[BigInt], z: f64) -> f64 {
        let mut acc = 0.0;
        for coef in c.iter().rev() {
            let cf = coef.to_string().parse::<f64>().unwrap();
            acc = acc * z + cf;
        }
        acc
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite(0, 3.7), 1.0);
        assert_eq!(hermite(1, 0.5), 1.0);
        assert_relative_eq!(hermite(2, 1.0), 2.0, max_relative = 1e-14);
        assert_relative_eq!(hermite(3, 1.0), -4.0, max_relative = 1e-14);
    }

    #[test]
    fn hermite_matches_rodrigues_oracle() {
        for k in 0..=12u32 {
            let coeffs = hermite_rodrigues_coeffs(k);
            let mut z = -4.0;
            while z <= 4.0 {
                let want = eval_int_poly(&coeffs, z);
                let got = hermite(k, z);
                if want.abs() > 1e-9 {
                    assert_relative_eq!(got, want, max_relative = 1e-9);
                } else {
                    assert!((got - want).abs() < 1e-8, "k={k} z={z}: {got} vs {want}");
                }
                z += 0.37;
            }
        }
    }

    #[test]
    fn hermite_upto_consistent() {
        let vals = hermite_upto(9, 0.83);
        for (k, &v) in vals.iter().enumerate() {
            assert_eq!(v, hermite(k as u32, 0.83));
        }
    }

    #[test]
    fn hermite_tensor_examples() {
        let k = MultiIndex::new(vec![0, 0]).unwrap();
        assert_eq!(hermite_tensor(&k, &[5.0, -2.0]), 1.0);
        let k = MultiIndex::new(vec![1, 1]).unwrap();
        assert_eq!(hermite_tensor(&k, &[1.0, 2.0]), 8.0);
        let k = MultiIndex::new(vec![2, 0]).unwrap();
        assert_relative_eq!(hermite_tensor(&k, &[1.0, 9.0]), 2.0, max_relative = 1e-14);
    }

    #[test]
    #[should_panic(expected = "does not match")]
    fn hermite_tensor_dimension_mismatch() {
        let k = MultiIndex::new(vec![1, 2]).unwrap();
        hermite_tensor(&k, &[0.3]);
    }

    /// Brute-force set-partition count for the Stirling oracle.
    fn partitions_into(n: usize, blocks: usize) -> u64 {
        fn rec(assign: &mut Vec<usize>, n: usize, used: usize, blocks: usize) -> u64 {
            if assign.len() == n {
                return u64::from(used == blocks);
            }
            let mut total = 0;
            for b in 0..used.min(blocks) {
                assign.push(b);
                total += rec(assign, n, used, blocks);
                assign.pop();
            }
            if used < blocks {
                assign.push(used);
                total += rec(assign, n, used + 1, blocks);
                assign.pop();
            }
            total
        }
        rec(&mut Vec::new(), n, 0, blocks)
    }

    #[test]
    fn stirling_examples() {
        assert_eq!(stirling2(3, 2), BigUint::from(3u32));
        assert_eq!(stirling2(5, 1), BigUint::from(1u32));
        assert_eq!(stirling2(4, 2), BigUint::from(partitions_into(4, 2)));
        assert_eq!(stirling2(2, 5), BigUint::zero());
        assert_eq!(stirling2(0, 0), BigUint::one());
    }

    #[test]
    fn stirling_matches_enumeration() {
        for n in 1..=7usize {
            for l in 0..=n {
                assert_eq!(
                    stirling2(n as u32, l as u32),
                    BigUint::from(partitions_into(n, l)),
                    "{{{n},{l}}}"
                );
            }
        }
    }

    #[test]
    fn stirling_falling_factorial_identity() {
        // x^N = Σ_L {N,L}·x(x−1)…(x−L+1), exactly at x = 1..5 for N ≤ 15.
        for n in 0..=15u32 {
            for x in 1..=5u64 {
                let lhs = BigUint::from(x).pow(n);
                let mut rhs = BigUint::zero();
                for l in 0..=n {
                    let mut ff = BigInt::from(1);
                    for j in 0..l {
                        ff *= BigInt::from(x as i64 - j as i64);
                    }
                    if ff > BigInt::from(0) {
                        rhs += stirling2(n, l) * ff.to_biguint().unwrap();
                    }
                }
                assert_eq!(lhs, rhs, "N={n}, x={x}");
            }
        }
    }

    #[test]
    fn binomial_and_multinomial() {
        assert_eq!(binomial(6, 2), BigUint::from(15u32));
        assert_eq!(binomial(4, 7), BigUint::zero());
        assert_eq!(multinomial(&[2, 1, 1]), BigUint::from(12u32));
        assert_eq!(multinomial(&[5]), BigUint::one());
    }

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(gamma(0.5), std::f64::consts::PI.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(gamma(1.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(gamma(4.0), 6.0, max_relative = 1e-12);
        assert_relative_eq!(gamma(1.5), 0.5 * std::f64::consts::PI.sqrt(), max_relative = 1e-12);
    }

    fn heat_kernel(t: f64, z: f64, n: u32) -> f64 {
        let tp = 2.0 * std::f64::consts::PI * t;
        tp.powf(-(n as f64) / 2.0) * (-z * z / (2.0 * t)).exp()
    }

    /// Central finite difference of order k, Richardson-extrapolated twice
    /// (error O(h⁶) before roundoff).
    fn central_dt<F: Fn(f64) -> f64>(f: &F, k: u32, t: f64, h: f64) -> f64 {
        let stencil = |h: f64| -> f64 {
            let mut acc = 0.0;
            for j in 0..=k {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let c = big_to_f64(&binomial(k, j));
                acc += sign * c * f(t + (k as f64 / 2.0 - j as f64) * h);
            }
            acc / h.powi(k as i32)
        };
        let d1 = stencil(h);
        let d2 = stencil(h / 2.0);
        let d4 = stencil(h / 4.0);
        let e1 = (4.0 * d2 - d1) / 3.0;
        let e2 = (4.0 * d4 - d2) / 3.0;
        (16.0 * e2 - e1) / 15.0
    }

    #[test]
    fn heat_coeff_examples() {
        let t0 = heat_deriv_coeffs(0, 3).unwrap();
        assert_eq!(t0.coeffs, vec![1.0]);
        let t1 = heat_deriv_coeffs(1, 2).unwrap();
        assert_eq!(t1.coeffs, vec![-1.0, 1.0]);
        // order-k table has k+1 entries with last entry 1
        for k in 0..=6 {
            for n in 1..=3 {
                let t = heat_deriv_coeffs(k, n).unwrap();
                assert_eq!(t.coeffs.len(), k as usize + 1);
                assert_eq!(*t.coeffs.last().unwrap(), 1.0, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn heat_coeffs_match_finite_differences() {
        // ∂_t^k T_t(z) = T_t(z)·p_k(|z|²/2t)/t^k vs central differences.
        let cases = [(2u32, 1u32, 0.7, 1.3), (1, 2, 0.9, 0.6), (3, 1, 1.1, 0.4), (4, 3, 0.8, 1.0)];
        for &(k, n, t, z) in &cases {
            let table = heat_deriv_coeffs(k, n).unwrap();
            let w = z * z / (2.0 * t);
            let ours = heat_kernel(t, z, n) * table.poly(w) / t.powi(k as i32);
            let fd = central_dt(&|s| heat_kernel(s, z, n), k, t, 0.05 * t.min(1.0));
            assert_relative_eq!(ours, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn heat_coeffs_random_finite_difference_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let k = rng.gen_range(1..=4u32);
            let n = rng.gen_range(1..=3u32);
            let t = rng.gen_range(0.4..2.0);
            let z = rng.gen_range(0.1..2.0);
            let table = heat_deriv_coeffs(k, n).unwrap();
            let ours = heat_kernel(t, z, n) * table.poly(z * z / (2.0 * t)) / t.powi(k as i32);
            let fd = central_dt(&|s| heat_kernel(s, z, n), k, t, 0.05 * t.min(1.0));
            assert_relative_eq!(ours, fd, max_relative = 1e-6);
        }
    }

    fn poisson_kernel(t: f64, z: f64, n: u32) -> f64 {
        let nf = n as f64;
        let c = gamma((nf + 1.0) / 2.0) / std::f64::consts::PI.powf((nf + 1.0) / 2.0);
        c * t / (t * t + z * z).powf((nf + 1.0) / 2.0)
    }

    #[test]
    fn poisson_coeff_examples() {
        let t0 = poisson_deriv_coeffs(0, 2).unwrap();
        assert_eq!(t0.coeffs, vec![1.0]);
        // m = 1: q_1(u) = u − n
        let t1 = poisson_deriv_coeffs(1, 3).unwrap();
        assert_eq!(t1.coeffs, vec![-3.0, 1.0]);

        // finite-difference cross-checks from the contract
        for &(m, n, t, z) in &[(1u32, 1u32, 0.5, 0.8f64), (2, 3, 1.1, 2.0), (3, 2, 0.9, 1.4)] {
            let table = poisson_deriv_coeffs(m, n).unwrap();
            let u = (z / t).powi(2);
            let ours =
                poisson_kernel(t, z, n) * table.poly(u) / ((1.0 + u).powi(m as i32) * t.powi(m as i32));
            let fd = central_dt(&|s| poisson_kernel(s, z, n), m, t, 0.05 * t.min(1.0));
            assert_relative_eq!(ours, fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn deriv_order_range_is_enforced() {
        assert_eq!(
            heat_deriv_coeffs(MAX_DERIV_ORDER + 1, 1),
            Err(SpecialError::OrderTooLarge(MAX_DERIV_ORDER + 1))
        );
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(4, 1).len(), 1);
        assert_eq!(compositions(4, 2).len(), 5);
        assert_eq!(compositions(3, 3).len(), 10);
        let all = multi_indices_upto(2, 2);
        assert_eq!(all.len(), 6); // (0,0),(0,1),(1,0),(0,2),(1,1),(2,0)
    }

    #[test]
    fn multi_index_basics() {
        let k = MultiIndex::new(vec![1, 2, 0]).unwrap();
        assert_eq!(k.order(), 3);
        assert_eq!(k.dim(), 3);
        assert_eq!(k.shift_up(2).entries(), &[1, 2, 1]);
        assert!(MultiIndex::new(vec![]).is_err());
        assert_eq!(format!("{}", k), "(1,2,0)");
    }
}
