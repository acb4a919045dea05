//! Non-central chi-squared density and survival function, and the bin-ratio
//! `q_ncx2` used by the envelope quantization score.
//!
//! Everything is evaluated in the log domain. Two routes are used for
//! `q_ncx2`:
//!
//! * a Poisson mixture of central chi-squared terms, summed around its peak
//!   with incomplete-gamma recurrences, for small noncentrality;
//! * the exact decomposition `X = (sqrt(λ) + Z)² + W` with `Z ~ N(0, 1)` and
//!   `W ~ χ²_{K-1}`, integrating over `W` with a generalized Gauss–Laguerre
//!   rule. This keeps the cost bounded when `λ` grows like `1/σ²`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use super::normal::{ln_1m_exp, ln_add_exp, ln_ndtr_diff, q_gauss_unchecked};
use crate::error::{Error, Result};

/// Relative cut-off (as a log) for truncating mixture sums.
const LN_TAIL_CUTOFF: f64 = -40.0;
const MAX_SERIES_TERMS: usize = 200_000;
const SERIES_MAX_NONCENTRALITY: f64 = 100.0;
const SERIES_MAX_CROSS: f64 = 800.0;
const QUADRATURE_NODES: usize = 40;
const PRUNE_NATS: f64 = 40.0;

#[inline]
fn ln_gamma(a: f64) -> f64 {
    libm::lgamma(a)
}

/// ln of `x^a e^{-x} / Γ(a + 1)`.
#[inline]
fn ln_poisson_term(a: f64, x: f64) -> f64 {
    if x == 0.0 || x.is_infinite() {
        f64::NEG_INFINITY
    } else {
        a * x.ln() - x - ln_gamma(a + 1.0)
    }
}

/// `(ln P(a, x), ln Q(a, x))` for the regularized incomplete gamma functions.
pub fn ln_gamma_pq(a: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if x == f64::INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    let ln_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut sum = 1.0;
        let mut term = 1.0;
        let mut ap = a;
        for _ in 0..100_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        let ln_p = ln_prefix - a.ln() + sum.ln();
        (ln_p, ln_1m_exp(ln_p.min(0.0)))
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..100_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let ln_q = ln_prefix + h.ln();
        (ln_1m_exp(ln_q.min(0.0)), ln_q)
    }
}

/// Log Poisson weight `ln(e^{-μ} μ^j / j!)`.
#[inline]
fn ln_poisson_weight(j: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if j == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + j as f64 * mean.ln() - ln_gamma(j as f64 + 1.0)
}

/// Parameters of a non-central chi-squared distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcChi2 {
    dof: u32,
    noncentrality: f64,
}

impl NcChi2 {
    pub fn new(dof: u32, noncentrality: f64) -> Result<Self> {
        if dof == 0 {
            return Err(Error::invalid("degrees of freedom must be at least 1"));
        }
        if !(noncentrality >= 0.0) || !noncentrality.is_finite() {
            return Err(Error::invalid(format!(
                "noncentrality must be finite and non-negative, got {noncentrality}"
            )));
        }
        Ok(Self { dof, noncentrality })
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    pub fn noncentrality(&self) -> f64 {
        self.noncentrality
    }

    pub fn ln_pdf(&self, xi: f64) -> f64 {
        let nu = self.dof as f64;
        let lam = self.noncentrality;
        if xi < 0.0 || xi.is_infinite() {
            return f64::NEG_INFINITY;
        }
        if xi == 0.0 {
            return match self.dof {
                1 => f64::INFINITY,
                2 => -std::f64::consts::LN_2 - lam / 2.0,
                _ => f64::NEG_INFINITY,
            };
        }
        let x = xi / 2.0;
        let half_lam = lam / 2.0;
        // term_j = ln w_j + ln g_{ν+2j}(ξ) = ln w_j + ln_poisson_term(ν/2 - 1 + j, x) - ln 2
        let term = |j: usize| {
            ln_poisson_weight(j, half_lam) + ln_poisson_term(nu / 2.0 - 1.0 + j as f64, x)
                - std::f64::consts::LN_2
        };
        if lam == 0.0 {
            return term(0);
        }
        // ratio of consecutive terms is (λξ/4) / ((j+1)(ν/2+j)); the peak solves it = 1
        let h = nu / 2.0;
        let c = lam * xi / 4.0;
        let disc = ((h + 1.0) * (h + 1.0) - 4.0 * (h - c)).max(0.0);
        let peak = ((-(h + 1.0) + disc.sqrt()) / 2.0).max(0.0).round() as usize;
        let top = term(peak);
        let mut acc = 0.0f64;
        let mut j = peak;
        loop {
            let t = term(j);
            acc += (t - top).exp();
            if t - top < LN_TAIL_CUTOFF || j > peak + MAX_SERIES_TERMS {
                break;
            }
            j += 1;
        }
        let mut j = peak;
        while j > 0 {
            j -= 1;
            let t = term(j);
            acc += (t - top).exp();
            if t - top < LN_TAIL_CUTOFF {
                break;
            }
        }
        top + acc.ln()
    }

    pub fn pdf(&self, xi: f64) -> f64 {
        self.ln_pdf(xi).exp()
    }

    /// ln P(X > ξ).
    pub fn ln_sf(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        if xi.is_infinite() {
            return f64::NEG_INFINITY;
        }
        let h = self.dof as f64 / 2.0;
        let x = xi / 2.0;
        let half_lam = self.noncentrality / 2.0;
        let start = half_lam.floor() as usize;

        // Upward from the Poisson mode: Q(a+1) = Q(a) + x^a e^-x / Γ(a+1) is stable.
        let (ln_p_start, ln_q_start) = ln_gamma_pq(h + start as f64, x);
        let mut best = f64::NEG_INFINITY;
        let mut terms = Vec::new();
        let mut ln_q = ln_q_start;
        let mut j = start;
        loop {
            let t = ln_poisson_weight(j, half_lam) + ln_q;
            best = best.max(t);
            terms.push(t);
            if (t - best < LN_TAIL_CUTOFF && j > start) || j > start + MAX_SERIES_TERMS {
                break;
            }
            if half_lam == 0.0 {
                break;
            }
            ln_q = ln_add_exp(ln_q, ln_poisson_term(h + j as f64, x));
            j += 1;
        }
        // Downward: P(a-1) = P(a) + x^{a-1} e^-x / Γ(a) is stable; Q follows
        // from P while P is small and is re-evaluated directly otherwise.
        let mut ln_p = ln_p_start;
        let mut j = start;
        while j > 0 {
            j -= 1;
            let a = h + j as f64;
            ln_p = ln_add_exp(ln_p, ln_poisson_term(a, x));
            let ln_q = if ln_p < -std::f64::consts::LN_2 {
                ln_1m_exp(ln_p)
            } else {
                ln_gamma_pq(a, x).1
            };
            let t = ln_poisson_weight(j, half_lam) + ln_q;
            best = best.max(t);
            terms.push(t);
            if t - best < LN_TAIL_CUTOFF {
                break;
            }
        }
        best + terms.iter().map(|t| (t - best).exp()).sum::<f64>().ln()
    }

    pub fn sf(&self, xi: f64) -> f64 {
        self.ln_sf(xi).exp()
    }
}

pub fn ncx2_pdf(xi: f64, dof: u32, noncentrality: f64) -> Result<f64> {
    Ok(NcChi2::new(dof, noncentrality)?.pdf(xi))
}

pub fn ncx2_sf(xi: f64, dof: u32, noncentrality: f64) -> Result<f64> {
    Ok(NcChi2::new(dof, noncentrality)?.sf(xi))
}

/// Upper end of the bulk of `W ~ χ²_{K-1}`; beyond it the mass is below 1e-13.
fn chi2_bulk_upper(k: u32) -> f64 {
    if k <= 1 {
        0.0
    } else {
        let m = (k - 1) as f64;
        m + 16.0 * (2.0 * m).sqrt() + 40.0
    }
}

/// Ratio whose product with `2ũ/σ²` is the envelope-interval score:
///
/// `(f_{K+2}(ξ_L; λ) - f_{K+2}(ξ_H; λ)) / (SF_K(ξ_L; λ) - SF_K(ξ_H; λ))`,
///
/// which equals `d/dλ ln P(X ∈ [ξ_L, ξ_H])` for `X ~ χ'²_K(λ)`.
pub fn q_ncx2(noncentrality: f64, xi_lo: f64, xi_hi: f64, dof: u32) -> Result<f64> {
    if dof == 0 {
        return Err(Error::invalid("degrees of freedom must be at least 1"));
    }
    if !(noncentrality >= 0.0) || !noncentrality.is_finite() {
        return Err(Error::invalid(format!("invalid noncentrality {noncentrality}")));
    }
    if !(xi_lo >= 0.0) || !(xi_lo < xi_hi) || xi_lo.is_infinite() {
        return Err(Error::invalid(format!("invalid interval [{xi_lo}, {xi_hi}]")));
    }
    Ok(q_ncx2_unchecked(noncentrality, xi_lo, xi_hi, dof))
}

pub(crate) fn q_ncx2_unchecked(lam: f64, xi_lo: f64, xi_hi: f64, k: u32) -> f64 {
    if xi_lo == 0.0 && xi_hi == f64::INFINITY {
        return 0.0;
    }
    let finite_top = if xi_hi.is_finite() { xi_hi } else { xi_lo };
    let kink_free = xi_lo == 0.0 || xi_lo >= chi2_bulk_upper(k);
    let small = lam <= SERIES_MAX_NONCENTRALITY && (lam * finite_top).sqrt() <= SERIES_MAX_CROSS;
    if small || !kink_free {
        let q = q_series(lam, xi_lo, xi_hi, k);
        if q.is_finite() {
            return q;
        }
    }
    if lam == 0.0 {
        return 0.0;
    }
    q_radial(lam, xi_lo, xi_hi, k)
}

/// ln(Q(a, x_lo) - Q(a, x_hi)) given the two ln Q values.
fn ln_gamma_interval(a: f64, x_lo: f64, x_hi: f64, ln_q_lo: f64, ln_q_hi: f64) -> f64 {
    let half = -std::f64::consts::LN_2;
    if ln_q_lo <= half {
        return ln_q_lo + ln_1m_exp((ln_q_hi - ln_q_lo).min(0.0));
    }
    // the bin sits in the lower part of the distribution: work with P
    let ln_p_lo = ln_gamma_pq(a, x_lo).0;
    if ln_q_hi <= half {
        (-(ln_q_hi.exp() + ln_p_lo.exp())).ln_1p()
    } else {
        let ln_p_hi = ln_gamma_pq(a, x_hi).0;
        ln_p_hi + ln_1m_exp((ln_p_lo - ln_p_hi).min(0.0))
    }
}

struct PeakTracker {
    best: f64,
}

impl PeakTracker {
    fn new() -> Self {
        Self { best: f64::NEG_INFINITY }
    }

    /// Records a term; returns true once the sequence is negligible.
    fn push(&mut self, t: f64) -> bool {
        self.best = self.best.max(t);
        self.best == f64::NEG_INFINITY || t - self.best < LN_TAIL_CUTOFF
    }
}

struct LowerTerm {
    a: f64,
    ln_w: f64,
    ln_q_hi: f64,
    ln_pt_lo: f64,
    ln_pt_hi: f64,
}

/// Weighted log interval masses for a prefix of terms with `Q(a, x_lo) > 1/2`.
fn resolve_lower(terms: &[LowerTerm], x_lo: f64, x_hi: f64) -> Vec<f64> {
    let Some(last) = terms.last() else {
        return Vec::new();
    };
    let mut ln_p_lo = ln_gamma_pq(last.a, x_lo).0;
    let mut ln_p_hi = if last.ln_q_hi > -std::f64::consts::LN_2 {
        ln_gamma_pq(last.a, x_hi).0
    } else {
        f64::NAN
    };
    let mut out = vec![0.0; terms.len()];
    for (i, t) in terms.iter().enumerate().rev() {
        if i + 1 < terms.len() {
            ln_p_lo = ln_add_exp(ln_p_lo, t.ln_pt_lo);
            if ln_p_hi.is_nan() && t.ln_q_hi > -std::f64::consts::LN_2 {
                ln_p_hi = ln_gamma_pq(t.a, x_hi).0;
            } else if !ln_p_hi.is_nan() {
                ln_p_hi = ln_add_exp(ln_p_hi, t.ln_pt_hi);
            }
        }
        let ln_d = if ln_p_hi.is_nan() {
            (-(t.ln_q_hi.exp() + ln_p_lo.exp())).ln_1p()
        } else {
            ln_p_hi + ln_1m_exp((ln_p_lo - ln_p_hi).min(0.0))
        };
        out[i] = t.ln_w + ln_d;
    }
    out
}

fn q_series(lam: f64, xi_lo: f64, xi_hi: f64, k: u32) -> f64 {
    let half_lam = lam / 2.0;
    // Poisson weights below j0 carry less than e^-70 of the mass; skip them
    // when the sums they would feed are provably unaffected.
    let j0 = (half_lam - 12.0 * half_lam.sqrt()).floor();
    if j0 >= 16.0 {
        let j0 = j0 as usize;
        let (num_lo, num_hi, den) = series_sums(j0, lam, xi_lo, xi_hi, k);
        let ln_head = ln_gamma_pq(j0 as f64, half_lam).1;
        if ln_head < den - PRUNE_NATS && ln_head < num_lo.max(num_hi) - PRUNE_NATS {
            return series_ratio(num_lo, num_hi, den);
        }
    }
    let (num_lo, num_hi, den) = series_sums(0, lam, xi_lo, xi_hi, k);
    series_ratio(num_lo, num_hi, den)
}

fn series_ratio(num_lo: f64, num_hi: f64, den: f64) -> f64 {
    if den == f64::NEG_INFINITY {
        return f64::NAN;
    }
    // the mixture pdf carries a factor 1/2 relative to the Poisson terms
    0.5 * ((num_lo - den).exp() - (num_hi - den).exp())
}

/// Log sums of the Poisson-mixed terms from index `j0` on: the two Gamma
/// densities at the bin edges and the Gamma interval mass.
fn series_sums(j0: usize, lam: f64, xi_lo: f64, xi_hi: f64, k: u32) -> (f64, f64, f64) {
    let x_lo = xi_lo / 2.0;
    let x_hi = xi_hi / 2.0;
    let half_lam = lam / 2.0;
    let a0 = k as f64 / 2.0;
    let ln_x_lo = x_lo.ln();
    let ln_x_hi = x_hi.ln();
    let advance = |ln_pt: f64, ln_x: f64, ln_next: f64| {
        if ln_pt == f64::NEG_INFINITY {
            ln_pt
        } else {
            ln_pt + ln_x - ln_next
        }
    };

    let mut ln_q_lo = ln_gamma_pq(a0 + j0 as f64, x_lo).1;
    let mut ln_q_hi = ln_gamma_pq(a0 + j0 as f64, x_hi).1;
    let mut ln_pt_lo = ln_poisson_term(a0 + j0 as f64, x_lo);
    let mut ln_pt_hi = ln_poisson_term(a0 + j0 as f64, x_hi);
    let mut ln_w = ln_poisson_weight(j0, half_lam);

    let (mut num_lo, mut num_hi, mut den) =
        (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut peak_lo, mut peak_hi, mut peak_den) =
        (PeakTracker::new(), PeakTracker::new(), PeakTracker::new());
    // Leading terms whose bin lies below the median of the Gamma law need P
    // rather than Q. They form a prefix; P is evaluated once at its end and
    // carried down by the stable recurrence P(a) = P(a+1) + x^a e^{-x}/Γ(a+1).
    let mut lower: Vec<LowerTerm> = Vec::new();
    let mut lower_open = true;
    let mut done_den = false;

    for j in j0..j0 + MAX_SERIES_TERMS {
        let a = a0 + j as f64;
        let t_lo = ln_w + ln_pt_lo;
        let t_hi = ln_w + ln_pt_hi;
        num_lo = ln_add_exp(num_lo, t_lo);
        num_hi = ln_add_exp(num_hi, t_hi);
        let done_lo = peak_lo.push(t_lo);
        let done_hi = peak_hi.push(t_hi);
        let in_lower = lower_open && ln_q_lo > -std::f64::consts::LN_2;
        if in_lower {
            lower.push(LowerTerm { a, ln_w, ln_q_hi, ln_pt_lo, ln_pt_hi });
        }
        let settled = j as f64 >= half_lam && done_lo && done_hi;
        if lower_open && (!in_lower || settled || half_lam == 0.0) {
            lower_open = false;
            for t in resolve_lower(&lower, x_lo, x_hi) {
                den = ln_add_exp(den, t);
                done_den = peak_den.push(t);
            }
        }
        if !in_lower {
            let t_den = ln_w + ln_gamma_interval(a, x_lo, x_hi, ln_q_lo, ln_q_hi);
            den = ln_add_exp(den, t_den);
            done_den = peak_den.push(t_den);
        }
        if j as f64 >= half_lam && done_den && done_lo && done_hi {
            break;
        }
        if half_lam == 0.0 {
            break;
        }
        // Q(a+1, x) = Q(a, x) + x^a e^{-x} / Γ(a+1)
        ln_q_lo = ln_add_exp(ln_q_lo, ln_pt_lo);
        ln_q_hi = ln_add_exp(ln_q_hi, ln_pt_hi);
        let ln_next = (a + 1.0).ln();
        ln_pt_lo = advance(ln_pt_lo, ln_x_lo, ln_next);
        ln_pt_hi = advance(ln_pt_hi, ln_x_hi, ln_next);
        ln_w += half_lam.ln() - ((j + 1) as f64).ln();
    }
    if lower_open {
        for t in resolve_lower(&lower, x_lo, x_hi) {
            den = ln_add_exp(den, t);
        }
    }
    (num_lo, num_hi, den)
}

/// Generalized Gauss–Laguerre rule for the density of `χ²_{K-1}`, weights
/// normalized to sum to one.
struct RadialRule {
    nodes: Vec<f64>,
    ln_weights: Vec<f64>,
    /// Node indices by decreasing weight.
    order: Vec<usize>,
}

impl RadialRule {
    fn new(nodes: Vec<f64>, ln_weights: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| ln_weights[b].total_cmp(&ln_weights[a]));
        Self { nodes, ln_weights, order }
    }
}

fn radial_rule(k: u32) -> Arc<RadialRule> {
    static RULES: OnceLock<Mutex<HashMap<u32, Arc<RadialRule>>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = rules.lock().expect("rule cache poisoned");
    guard.entry(k).or_insert_with(|| Arc::new(build_radial_rule(k))).clone()
}

fn build_radial_rule(k: u32) -> RadialRule {
    if k <= 1 {
        return RadialRule::new(vec![0.0], vec![0.0]);
    }
    // W/2 ~ Gamma(α + 1) with α = (K - 3)/2; Golub–Welsch on the Laguerre
    // Jacobi matrix.
    let alpha = (k as f64 - 3.0) / 2.0;
    let n = QUADRATURE_NODES;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jacobi[(i, i)] = 2.0 * i as f64 + alpha + 1.0;
        if i > 0 {
            let off = (i as f64 * (i as f64 + alpha)).sqrt();
            jacobi[(i, i - 1)] = off;
            jacobi[(i - 1, i)] = off;
        }
    }
    // eigenvalues only; nodes are polished by Newton and weights come from
    // w_i ∝ x_i / L_{n+1}^{(α)}(x_i)², which avoids relying on eigenvectors
    let mut roots: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    roots.sort_by(f64::total_cmp);
    let mut pairs = Vec::with_capacity(n);
    for &x0 in &roots {
        let mut x = x0;
        for _ in 0..3 {
            let (ln, ln_minus) = laguerre_pair(n, alpha, x);
            // x L_n' = n L_n - (n + α) L_{n-1}
            let deriv = (n as f64 * ln - (n as f64 + alpha) * ln_minus) / x;
            let step = ln / deriv;
            x -= step;
            if step.abs() < 1e-15 * x {
                break;
            }
        }
        let (next, _) = laguerre_pair(n + 1, alpha, x);
        pairs.push((2.0 * x, x.ln() - 2.0 * next.abs().ln()));
    }
    let top = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = pairs.iter().map(|p| (p.1 - top).exp()).sum();
    let ln_total = top + total.ln();
    RadialRule::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1 - ln_total).collect())
}

/// `(L_n^{(α)}(x), L_{n-1}^{(α)}(x))` by the three-term recurrence.
fn laguerre_pair(n: usize, alpha: f64, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    if n == 0 {
        return (prev, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Route through `X = (s + Z)² + W`, `s = sqrt(λ)`.
fn q_radial(lam: f64, xi_lo: f64, xi_hi: f64, k: u32) -> f64 {
    let s = lam.sqrt();
    let rule = radial_rule(k);
    let mut ln_mass = Vec::with_capacity(rule.nodes.len());
    let mut slope = Vec::with_capacity(rule.nodes.len());
    let mut best = f64::NEG_INFINITY;
    for &i in &rule.order {
        let (w, ln_weight) = (rule.nodes[i], rule.ln_weights[i]);
        // node masses are at most one, so lighter nodes cannot matter
        if ln_weight < best - PRUNE_NATS {
            break;
        }
        let d = if xi_hi.is_finite() { (xi_hi - w).max(0.0).sqrt() } else { f64::INFINITY };
        if d == 0.0 {
            continue;
        }
        let c = (xi_lo - w).max(0.0).sqrt();
        let (m, r) = if c == 0.0 {
            (ln_ndtr_diff(d - s, -d - s), q_gauss_unchecked(s, -d, d, 1.0))
        } else {
            let m_pos = ln_ndtr_diff(d - s, c - s);
            let r_pos = q_gauss_unchecked(s, c, d, 1.0);
            // Φ(-c-s) < exp(-(c+s)²/2) once c+s ≥ 1
            let neg_bound = -0.5 * (c + s) * (c + s);
            if c + s >= 1.0 && m_pos > f64::NEG_INFINITY && neg_bound < m_pos - PRUNE_NATS {
                (m_pos, r_pos)
            } else {
                let m_neg = ln_ndtr_diff(-c - s, -d - s);
                let r_neg = q_gauss_unchecked(s, -d, -c, 1.0);
                let m = ln_add_exp(m_pos, m_neg);
                if m == f64::NEG_INFINITY {
                    (m, 0.0)
                } else {
                    (m, (m_pos - m).exp() * r_pos + (m_neg - m).exp() * r_neg)
                }
            }
        };
        best = best.max(ln_weight + m);
        ln_mass.push(ln_weight + m);
        slope.push(r);
    }
    let top = ln_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return radial_tail_asymptote(s, xi_lo, xi_hi, k);
    }
    let (mut acc_w, mut acc_r) = (0.0, 0.0);
    for (m, r) in ln_mass.iter().zip(&slope) {
        let w = (m - top).exp();
        acc_w += w;
        acc_r += w * r;
    }
    // d ln P / dλ = (d ln P / ds) / (2s)
    acc_r / acc_w / (2.0 * s)
}

/// One-sided tail asymptote used only if every quadrature node underflows:
/// the radial coordinate is treated as `N(s, 1)` and pulled toward the
/// nearest admissible radius.
fn radial_tail_asymptote(s: f64, xi_lo: f64, xi_hi: f64, k: u32) -> f64 {
    let centre = (s * s + (k as f64 - 1.0)).sqrt();
    let target = if centre < xi_lo.sqrt() { xi_lo.sqrt() } else { xi_hi.sqrt() };
    (target - centre) / (2.0 * s.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central chi-squared pdf, written out directly.
    fn central_pdf(xi: f64, nu: f64) -> f64 {
        (((nu / 2.0) - 1.0) * xi.ln() - xi / 2.0 - (nu / 2.0) * 2f64.ln() - ln_gamma(nu / 2.0))
            .exp()
    }

    #[test]
    fn central_pdf_at_zero_two_dof() {
        let d = NcChi2::new(2, 0.0).unwrap();
        assert!((d.pdf(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_noncentrality_reduces_to_central() {
        for nu in [1u32, 2, 3, 8, 25] {
            let d = NcChi2::new(nu, 0.0).unwrap();
            for i in 1..60 {
                let xi = i as f64 * 0.5;
                let expected = central_pdf(xi, nu as f64);
                assert!((d.pdf(xi) - expected).abs() <= 1e-12 * expected, "nu={nu} xi={xi}");
            }
        }
    }

    #[test]
    fn pdf_is_zero_below_support() {
        assert_eq!(NcChi2::new(4, 3.0).unwrap().pdf(-1.0), 0.0);
    }

    #[test]
    fn sf_limits() {
        let d = NcChi2::new(6, 10.0).unwrap();
        assert_eq!(d.sf(0.0), 1.0);
        assert_eq!(d.sf(f64::INFINITY), 0.0);
        let mut prev = 1.0;
        for i in 1..200 {
            let v = d.sf(i as f64 * 0.5);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn incomplete_gamma_complements() {
        for &(a, x) in &[(0.5, 0.1), (3.0, 2.0), (10.0, 30.0), (50.5, 40.0), (4.0, 1e-3)] {
            let (lp, lq) = ln_gamma_pq(a, x);
            assert!((lp.exp() + lq.exp() - 1.0).abs() < 1e-13, "a={a} x={x}");
        }
        // Q(1, x) = e^{-x}
        assert!((ln_gamma_pq(1.0, 7.5).1 + 7.5).abs() < 1e-12);
    }

    #[test]
    fn full_support_interval_gives_zero() {
        for k in [1, 4, 8, 48] {
            assert_eq!(q_ncx2(3.0, 0.0, f64::INFINITY, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(q_ncx2(1.0, 2.0, 2.0, 4).is_err());
        assert!(q_ncx2(1.0, 3.0, 2.0, 4).is_err());
        assert!(q_ncx2(-1.0, 1.0, 2.0, 4).is_err());
        assert!(q_ncx2(1.0, 1.0, 2.0, 0).is_err());
    }

    #[test]
    fn routes_agree_where_both_apply() {
        // λ large enough for the radial rule, bins away from the χ² bulk
        for &(k, lam, lo, hi) in
            &[(8u32, 90.0, 120.0, 240.0), (4, 60.0, 90.0, 180.0), (24, 95.0, 180.0, 360.0)]
        {
            let a = q_series(lam, lo, hi, k);
            let b = q_radial(lam, lo, hi, k);
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-3), "k={k} lam={lam}: {a} vs {b}");
        }
    }

    #[test]
    fn stays_finite_over_sigma_range() {
        // σ² from 0 dB to -90 dB, envelopes from -60 dB to +10 dB
        for k in [4u32, 13, 48] {
            for s_db in (-90..=0).step_by(10) {
                let s2 = 10f64.powf(s_db as f64 / 10.0);
                for e_db in [-60.0, -30.0, 0.0, 10.0] {
                    let e_lo = 10f64.powf((e_db - 1.5) / 10.0);
                    let e_hi = 10f64.powf((e_db + 1.5) / 10.0);
                    for u_db in [-80.0, -40.0, e_db, 20.0] {
                        let lam = k as f64 * 10f64.powf(u_db / 10.0) / s2;
                        let q = q_ncx2(lam, k as f64 * e_lo / s2, k as f64 * e_hi / s2, k).unwrap();
                        assert!(q.is_finite(), "k={k} s2={s2} e={e_db} u={u_db}: {q}");
                    }
                }
            }
        }
    }
}
