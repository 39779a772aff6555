use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::{MathError, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    /// Legendre rule mapped to `[a, b]`.
    GaussLegendre { a: f64, b: f64 },
    /// Hermite rule for expectations under the standard normal.
    GaussHermiteProb,
}

/// Nodes and positive weights of an interpolatory quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub kind: RuleKind,
}

impl<T: Scalar> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

type Canon = Arc<(Vec<f64>, Vec<f64>)>;

fn cached(table: &'static OnceLock<Mutex<HashMap<usize, Canon>>>, n: usize, build: fn(usize) -> Canon) -> Canon {
    let map = table.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = map.lock().expect("quadrature cache").get(&n) {
        return r.clone();
    }
    let r = build(n);
    map.lock().expect("quadrature cache").insert(n, r.clone());
    r
}

fn legendre_canonical(n: usize) -> Canon {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Arc::new((x, w))
}

// Orthonormal He recurrence at x: returns (p_n, p_{n-1}, ln sum_{k<n} p_k^2).
// Values are rescaled on the fly, so only ratios of the first two are meaningful.
fn hermite_orthonormal(n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = 0.0;
    let mut log_scale = 0.0;
    for k in 0..n {
        sum += cur * cur;
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            cur *= 1e-100;
            prev *= 1e-100;
            sum *= 1e-200;
            log_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    (cur, prev, sum.ln() + log_scale)
}

// Nodes: eigenvalues of the Jacobi matrix of the He recurrence, Newton-polished.
// Weights: Christoffel numbers 1/sum p_k(x)^2, accurate far into the tails.
fn hermite_canonical(n: usize) -> Canon {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let mut nodes: Vec<f64> = j.symmetric_eigenvalues().iter().cloned().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));
    let sn = (n as f64).sqrt();
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (pn, pm, _) = hermite_orthonormal(n, *x);
            let step = pn / (sn * pm);
            if !step.is_finite() {
                break;
            }
            *x -= step;
        }
    }
    for i in 0..n / 2 {
        let m = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let pairs: Vec<(f64, f64)> = nodes
        .iter()
        .map(|&x| (x, (-hermite_orthonormal(n, x).2).exp()))
        .filter(|p| p.1 > 0.0)
        .collect();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let x = pairs.iter().map(|p| p.0).collect();
    let w = pairs.iter().map(|p| p.1 / total).collect();
    Arc::new((x, w))
}

static LEGENDRE: OnceLock<Mutex<HashMap<usize, Canon>>> = OnceLock::new();
static HERMITE: OnceLock<Mutex<HashMap<usize, Canon>>> = OnceLock::new();

/// n-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<T: Scalar>(n: usize, a: T, b: T) -> Result<QuadratureRule<T>> {
    if n < 2 {
        return Err(MathError::Domain(format!("Gauss-Legendre needs n >= 2, got {n}")));
    }
    if !(a < b) {
        return Err(MathError::Domain(format!("empty interval [{a}, {b}]")));
    }
    let canon = cached(&LEGENDRE, n, legendre_canonical);
    let half = (b - a) * T::lit(0.5);
    let mid = (b + a) * T::lit(0.5);
    Ok(QuadratureRule {
        nodes: canon.0.iter().map(|&x| mid + half * T::lit(x)).collect(),
        weights: canon.1.iter().map(|&w| half * T::lit(w)).collect(),
        kind: RuleKind::GaussLegendre {
            a: a.as_f64(),
            b: b.as_f64(),
        },
    })
}

/// n-point Gauss-Hermite rule normalised so that `integrate(f) ~ E[f(Z)]`, Z ~ N(0,1).
///
/// Nodes whose weight underflows in double precision are dropped, so for large
/// n the rule may hold slightly fewer than n points.
pub fn gauss_hermite_prob<T: Scalar>(n: usize) -> Result<QuadratureRule<T>> {
    if n < 2 {
        return Err(MathError::Domain(format!("Gauss-Hermite needs n >= 2, got {n}")));
    }
    let canon = cached(&HERMITE, n, hermite_canonical);
    let mut nodes = Vec::with_capacity(canon.0.len());
    let mut weights = Vec::with_capacity(canon.0.len());
    for (&x, &w) in canon.0.iter().zip(&canon.1) {
        let wt = T::lit(w);
        if wt > T::zero() {
            nodes.push(T::lit(x));
            weights.push(wt);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        kind: RuleKind::GaussHermiteProb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite_poly;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_legendre() {
        let r = gauss_legendre(2, -1.0f64, 1.0).unwrap();
        assert_relative_eq!(r.nodes[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r.nodes[0], -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn legendre_exactness() {
        let r = gauss_legendre(120, 0.0f64, 1.0).unwrap();
        assert!((r.integrate(|x| x.powi(5)) - 1.0 / 6.0).abs() < 1e-14);
        let r = gauss_legendre(120, 0.0f64, 0.25).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 0.25).abs() < 1e-14);
        assert!(gauss_legendre(10, 1.0f64, 1.0).is_err());
        assert!(gauss_legendre(1, 0.0f64, 1.0).is_err());
    }

    #[test]
    fn hermite_moments() {
        let r = gauss_hermite_prob::<f64>(10).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((r.integrate(|x| x * x) - 1.0).abs() < 1e-12);
        let r = gauss_hermite_prob::<f64>(40).unwrap();
        assert!((r.integrate(f64::exp) - 0.5f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn hermite_orthogonality() {
        let r = gauss_hermite_prob::<f64>(40).unwrap();
        let mut fact = 1.0;
        for m in 0..=12usize {
            if m > 0 {
                fact *= m as f64;
            }
            for n in 0..=12usize {
                let e = r.integrate(|x| hermite_poly(m, x).unwrap() * hermite_poly(n, x).unwrap());
                let want = if m == n { fact } else { 0.0 };
                assert!((e - want).abs() < 1e-8 * fact.max(1.0), "m={m} n={n} e={e}");
            }
        }
    }

    #[test]
    fn large_hermite_rule_positive() {
        let r = gauss_hermite_prob::<f64>(400).unwrap();
        assert!(r.len() >= 2);
        assert!(r.weights.iter().all(|&w| w > 0.0));
        assert!((r.integrate(|x| x.powi(4)) - 3.0).abs() < 1e-11);
    }

    #[test]
    fn large_hermite_rule_tails() {
        for n in [400, 800] {
            let r = gauss_hermite_prob::<f64>(n).unwrap();
            // Orthogonality of high-order polynomials is governed by the tail weights.
            for (a, b) in [(25usize, 25usize), (30, 28), (40, 40)] {
                let fact: f64 = (1..=a).map(|i| i as f64).product();
                let v = r.integrate(|x| hermite_poly(a, x).unwrap() * hermite_poly(b, x).unwrap()) / fact;
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-9, "n={n} He{a}He{b}: {v}");
            }
            assert!((r.integrate(|x| (3.0 * x).exp()) / 4.5f64.exp() - 1.0).abs() < 1e-12);
            let (x, w) = (*r.nodes.last().unwrap(), *r.weights.last().unwrap());
            assert!((w.ln() + 0.5 * x * x).abs() < 20.0, "x={x} w={w}");
        }
    }

    #[test]
    fn single_precision_rules() {
        let r = gauss_legendre(20, 0.0f32, 2.0).unwrap();
        assert!((r.integrate(|x| x * x) - 8.0 / 3.0).abs() < 1e-5);
    }
}
