//! Completely multiplicative functions f: N -> mu_d union {0} tabulated on
//! [1, x], their level sets, the mean square of power sums, per-root prime
//! harmonic sums, pretentious distances and twist minimization, and the
//! Turan-Kubilius second-moment check.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{self, PrimeTable};
use crate::character::{root_table, Character, ZERO_EXPONENT};
use crate::error::{Error, Result};

/// Op budget for the O(d*x) direct mean-square mode.
pub const DIRECT_MODE_BUDGET: u128 = 1 << 33;
/// Budget for the O(d^2) variance loop.
pub const QUADRATIC_BUDGET: u128 = 1 << 31;

/// A completely multiplicative function with values stored as exponents in
/// Z/dZ plus a zero sentinel. Immutable once built.
#[derive(Debug, Clone)]
pub struct MultFun {
    d: u32,
    /// exps[n] for 1 <= n <= x_max; exps[0] is unused.
    exps: Vec<u32>,
    /// ascending primes p <= x_max with f(p) = 0
    zero_primes: Vec<u64>,
}

/// Exact level-set counts |{n <= x : f(n) = e(j/d)}| plus the zero count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSetHistogram {
    pub d: u32,
    pub x: u64,
    pub counts: Vec<u64>,
    pub zeros: u64,
}

/// sigma_j(x) = sum of 1/p over p <= x with f(p) = e(j/d).
#[derive(Debug, Clone)]
pub struct SigmaVector {
    pub d: u32,
    pub x: u64,
    pub sigma: Vec<f64>,
}

/// Squared pretentious distance, with the minimizing twist when one was
/// searched for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceResult {
    pub value_squared: f64,
    pub minimizing_t: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub enum MeanSquareMode {
    /// O(d*x): sums |sum_n e(l*exp(n)/d)|^2 over l = 0..d-1, divided by d.
    Direct,
    /// O(x + d): the orthogonality identity sum_j counts[j]^2.
    Histogram,
}

impl MultFun {
    /// Tabulates a character as a multiplicative function on [1, x].
    pub fn from_character(chi: &Character, x: u64) -> MultFun {
        let exps = chi.exponent_table(x);
        let q = chi.q();
        let zero_primes = if q <= x { vec![q] } else { vec![] };
        MultFun {
            d: chi.order(),
            exps,
            zero_primes,
        }
    }

    /// f identically 1 on [1, x_max], carried at order d.
    pub fn one(d: u32, x_max: u64) -> MultFun {
        assert!(d >= 1);
        let mut exps = vec![0u32; x_max as usize + 1];
        exps[0] = ZERO_EXPONENT;
        MultFun {
            d,
            exps,
            zero_primes: vec![],
        }
    }

    /// Assigns each prime p <= x0 an independent uniform exponent in Z/dZ
    /// (or zero with probability zero_rate) and extends by complete
    /// multiplicativity. Same seed, same table.
    ///
    /// Membership in the weakly-equidistributing class is NOT guaranteed;
    /// run [`MultFun::check_weak_equidistribution`].
    pub fn random_member(x0: u64, d: u32, seed: u64, zero_rate: f64) -> Result<MultFun> {
        if d < 1 || x0 < 3 || !(0.0..1.0).contains(&zero_rate) {
            return Err(Error::domain(format!(
                "random_member requires d >= 1, x0 >= 3, zero_rate in [0,1); got d={d}, x0={x0}, zero_rate={zero_rate}"
            )));
        }
        let table = arith::sieve(x0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut exps = vec![0u32; x0 as usize + 1];
        exps[0] = ZERO_EXPONENT;
        let mut zero_primes = Vec::new();
        for &p in table.primes() {
            exps[p as usize] = if zero_rate > 0.0 && rng.gen::<f64>() < zero_rate {
                zero_primes.push(p);
                ZERO_EXPONENT
            } else {
                rng.gen_range(0..d)
            };
        }
        for n in 2..=x0 {
            if table.is_prime(n) {
                continue;
            }
            let p = table.least_prime_factor(n);
            let (a, b) = (exps[p as usize], exps[(n / p) as usize]);
            exps[n as usize] = if a == ZERO_EXPONENT || b == ZERO_EXPONENT {
                ZERO_EXPONENT
            } else {
                ((a as u64 + b as u64) % d as u64) as u32
            };
        }
        Ok(MultFun {
            d,
            exps,
            zero_primes,
        })
    }

    /// Pointwise product f*g, carried at order lcm(d_f, d_g).
    pub fn product(&self, other: &MultFun) -> MultFun {
        let x = self.x_max().min(other.x_max());
        let d = num_integer::lcm(self.d as u64, other.d as u64) as u32;
        let (sf, sg) = (d / self.d, d / other.d);
        let mut exps = vec![0u32; x as usize + 1];
        exps[0] = ZERO_EXPONENT;
        for n in 1..=x as usize {
            let (a, b) = (self.exps[n], other.exps[n]);
            exps[n] = if a == ZERO_EXPONENT || b == ZERO_EXPONENT {
                ZERO_EXPONENT
            } else {
                ((a as u64 * sf as u64 + b as u64 * sg as u64) % d as u64) as u32
            };
        }
        let mut zero_primes: Vec<u64> = self
            .zero_primes
            .iter()
            .chain(other.zero_primes.iter())
            .copied()
            .filter(|&p| p <= x)
            .collect();
        zero_primes.sort_unstable();
        zero_primes.dedup();
        MultFun {
            d,
            exps,
            zero_primes,
        }
    }

    pub fn order(&self) -> u32 {
        self.d
    }

    pub fn x_max(&self) -> u64 {
        self.exps.len() as u64 - 1
    }

    pub fn zero_primes(&self) -> &[u64] {
        &self.zero_primes
    }

    /// f(n) as an exponent; `None` encodes the value 0.
    pub fn exponent(&self, n: u64) -> Option<u32> {
        let e = self.exps[n as usize];
        (e != ZERO_EXPONENT).then_some(e)
    }

    pub fn value(&self, n: u64, roots: &[Complex64]) -> Complex64 {
        match self.exponent(n) {
            None => Complex64::new(0.0, 0.0),
            Some(j) => roots[j as usize],
        }
    }

    /// c_f(x) = product over zero primes p <= x of (1 - 1/p).
    pub fn c_f(&self, x: u64) -> f64 {
        self.zero_primes
            .iter()
            .take_while(|&&p| p <= x)
            .map(|&p| 1.0 - 1.0 / p as f64)
            .product()
    }

    pub fn level_histogram(&self, x: u64) -> LevelSetHistogram {
        assert!(x <= self.x_max(), "histogram cutoff beyond tabulation");
        let mut counts = vec![0u64; self.d as usize];
        let mut zeros = 0u64;
        for n in 1..=x as usize {
            match self.exps[n] {
                ZERO_EXPONENT => zeros += 1,
                e => counts[e as usize] += 1,
            }
        }
        debug_assert_eq!(counts.iter().sum::<u64>() + zeros, x);
        LevelSetHistogram {
            d: self.d,
            x,
            counts,
            zeros,
        }
    }

    /// Whether max_alpha |{n <= x : f(n) = alpha}| <= constant*x/d * c_f(x),
    /// together with the ratio of the two sides.
    pub fn check_weak_equidistribution(&self, x: u64, constant: f64) -> WeakEquiReport {
        let hist = self.level_histogram(x);
        let max_fiber = hist.counts.iter().copied().max().unwrap_or(0);
        let threshold = constant * x as f64 / self.d as f64 * self.c_f(x);
        WeakEquiReport {
            holds: max_fiber as f64 <= threshold,
            ratio: max_fiber as f64 / threshold,
            max_fiber,
            threshold,
        }
    }

    /// Sum over j of counts[j]^2: the exact pair count
    /// |{n, m <= x : f(n) = f(m) != 0}|.
    pub fn pair_count(&self, x: u64) -> u128 {
        self.level_histogram(x)
            .counts
            .iter()
            .map(|&c| c as u128 * c as u128)
            .sum()
    }

    /// (1/d) * sum over 0 <= l <= d-1 of |sum_{n <= x} f^l(n)|^2.
    ///
    /// Histogram mode evaluates the same quantity through the orthogonality
    /// identity; the result is the integer [`MultFun::pair_count`].
    pub fn mean_square_powers(&self, x: u64, mode: MeanSquareMode) -> Result<f64> {
        self.mean_square_powers_with_budget(x, mode, DIRECT_MODE_BUDGET)
    }

    pub fn mean_square_powers_with_budget(
        &self,
        x: u64,
        mode: MeanSquareMode,
        budget: u128,
    ) -> Result<f64> {
        assert!(x <= self.x_max(), "cutoff beyond tabulation");
        match mode {
            MeanSquareMode::Histogram => Ok(self.pair_count(x) as f64),
            MeanSquareMode::Direct => {
                let d = self.d as u64;
                if x as u128 * d as u128 > budget {
                    return Err(Error::Resource(format!(
                        "direct mean-square mode needs {} ops, budget {budget}",
                        x as u128 * d as u128
                    )));
                }
                let roots = root_table(self.d);
                let mut total = 0.0;
                for l in 0..d {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for n in 1..=x as usize {
                        let e = self.exps[n];
                        if e != ZERO_EXPONENT {
                            sum += roots[(l * e as u64 % d) as usize];
                        }
                    }
                    total += sum.norm_sqr();
                }
                Ok(total / d as f64)
            }
        }
    }

    /// Per-exponent prime harmonic sums sigma_j(x).
    pub fn sigma_vector(&self, x: u64, primes: &PrimeTable) -> SigmaVector {
        assert!(x <= self.x_max(), "cutoff beyond tabulation");
        let mut sigma = vec![0.0f64; self.d as usize];
        for &p in primes.primes_upto(x) {
            if let Some(j) = self.exponent(p) {
                sigma[j as usize] += 1.0 / p as f64;
            }
        }
        SigmaVector { d: self.d, x, sigma }
    }

    /// E_{!=0,1}(x) = sum of 1/p over p <= x with f(p) not in {0, 1}.
    pub fn e_not_zero_one(&self, x: u64, primes: &PrimeTable) -> f64 {
        primes.prime_harmonic_sum(x, |p| matches!(self.exponent(p), Some(j) if j != 0))
    }

    /// Sigma = min{ P-(d), 2 + E_{!=0,1}(x) }.
    pub fn big_sigma(&self, x: u64, primes: &PrimeTable) -> f64 {
        assert!(self.d >= 2, "big_sigma needs d >= 2");
        let p_minus = arith::smallest_prime_factor(self.d as u64) as f64;
        p_minus.min(2.0 + self.e_not_zero_one(x, primes))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WeakEquiReport {
    pub holds: bool,
    pub ratio: f64,
    pub max_fiber: u64,
    pub threshold: f64,
}

/// D(f,g;x)^2 = sum over p <= x of (1 - Re f(p) conj(g(p)))/p. A zero value
/// on either side contributes its full 1/p to the numerator.
pub fn pretentious_distance(f: &MultFun, g: &MultFun, x: u64, primes: &PrimeTable) -> DistanceResult {
    assert!(x <= f.x_max() && x <= g.x_max(), "cutoff beyond tabulation");
    let rf = root_table(f.order());
    let rg = root_table(g.order());
    let mut total = 0.0;
    for &p in primes.primes_upto(x) {
        let prod = f.value(p, &rf) * g.value(p, &rg).conj();
        total += (1.0 - prod.re) / p as f64;
    }
    DistanceResult {
        value_squared: total.max(0.0),
        minimizing_t: None,
    }
}

/// Minimizes D(f, n^it; x)^2 over t in the uniform grid
/// {-T, -T+step, ..., T}. Ties resolve to the smallest t.
pub fn distance_to_twist(
    f: &MultFun,
    x: u64,
    big_t: f64,
    grid_step: f64,
    primes: &PrimeTable,
) -> Result<DistanceResult> {
    if big_t <= 0.0 || grid_step <= 0.0 {
        return Err(Error::domain(format!(
            "twist search needs T > 0 and grid_step > 0, got T={big_t}, step={grid_step}"
        )));
    }
    let terms = twist_terms(f, x, primes);
    let steps = (2.0 * big_t / grid_step).round() as u64;
    let mut best = DistanceResult {
        value_squared: f64::INFINITY,
        minimizing_t: None,
    };
    for k in 0..=steps {
        let t = -big_t + k as f64 * grid_step;
        let v = twist_distance_sq(&terms, t);
        if v < best.value_squared {
            best = DistanceResult {
                value_squared: v,
                minimizing_t: Some(t),
            };
        }
    }
    Ok(best)
}

/// Grid minimization followed by three rounds of 10x local zoom around the
/// best point, clipped to [-T, T].
pub fn distance_to_twist_refined(
    f: &MultFun,
    x: u64,
    big_t: f64,
    grid_step: f64,
    primes: &PrimeTable,
) -> Result<DistanceResult> {
    let terms = twist_terms(f, x, primes);
    let mut best = distance_to_twist(f, x, big_t, grid_step, primes)?;
    let mut step = grid_step;
    for _ in 0..3 {
        step /= 10.0;
        let center = best.minimizing_t.unwrap();
        for k in -10i64..=10 {
            let t = (center + k as f64 * step).clamp(-big_t, big_t);
            let v = twist_distance_sq(&terms, t);
            if v < best.value_squared {
                best = DistanceResult {
                    value_squared: v,
                    minimizing_t: Some(t),
                };
            }
        }
    }
    Ok(best)
}

/// Per-prime data for D(f, n^it; x)^2: weight 1/p, phase of f(p), log p.
/// Zero values contribute a constant mass.
struct TwistTerms {
    theta: Vec<f64>,
    log_p: Vec<f64>,
    weight: Vec<f64>,
    zero_mass: f64,
}

fn twist_terms(f: &MultFun, x: u64, primes: &PrimeTable) -> TwistTerms {
    assert!(x <= f.x_max(), "cutoff beyond tabulation");
    let mut t = TwistTerms {
        theta: Vec::new(),
        log_p: Vec::new(),
        weight: Vec::new(),
        zero_mass: 0.0,
    };
    let tau = 2.0 * std::f64::consts::PI;
    for &p in primes.primes_upto(x) {
        match f.exponent(p) {
            None => t.zero_mass += 1.0 / p as f64,
            Some(j) => {
                t.theta.push(tau * j as f64 / f.order() as f64);
                t.log_p.push((p as f64).ln());
                t.weight.push(1.0 / p as f64);
            }
        }
    }
    t
}

fn twist_distance_sq(terms: &TwistTerms, t: f64) -> f64 {
    let mut total = terms.zero_mass;
    for i in 0..terms.theta.len() {
        total += terms.weight[i] * (1.0 - (terms.theta[i] - t * terms.log_p[i]).cos());
    }
    total.max(0.0)
}

/// C * ((M+1) e^{-M} + 1/T + loglog x / log x).
pub fn halasz_rhs(m: f64, big_t: f64, x: f64, c: f64) -> f64 {
    c * ((m + 1.0) * (-m).exp() + 1.0 / big_t + x.ln().ln() / x.ln())
}

/// The variance Delta = (1/d) sum over l of
/// (sum_j ||lj/d||^2 sigma_j - (1/12) sum_j sigma_j)^2, direct O(d^2) loop.
pub fn variance_delta(sigma: &SigmaVector) -> Result<f64> {
    variance_checked(sigma)?;
    let d = sigma.d as usize;
    let w = norm_sq_table(sigma.d);
    let centered: f64 = sigma.sigma[1..].iter().sum::<f64>() / 12.0;
    let mut delta = 0.0;
    for l in 1..=d {
        let mut inner = 0.0;
        let mut r = 0usize;
        for j in 1..d {
            r += l;
            if r >= d {
                r -= d;
            }
            // r = l*j mod d, advanced incrementally
            inner += w[r] * sigma.sigma[j];
        }
        delta += (inner - centered) * (inner - centered);
    }
    Ok(delta / d as f64)
}

/// Same variance evaluated by bucketing sigma_j on the residue l*j mod d
/// before applying the weights; an independent summation route used as a
/// cross-check of the direct loop.
pub fn variance_delta_bucketed(sigma: &SigmaVector) -> Result<f64> {
    variance_checked(sigma)?;
    let d = sigma.d as usize;
    let w = norm_sq_table(sigma.d);
    let centered: f64 = sigma.sigma[1..].iter().sum::<f64>() / 12.0;
    let mut bucket = vec![0.0f64; d];
    let mut delta = 0.0;
    for l in 1..=d {
        bucket.iter_mut().for_each(|b| *b = 0.0);
        let mut r = 0usize;
        for j in 1..d {
            r += l;
            if r >= d {
                r -= d;
            }
            bucket[r] += sigma.sigma[j];
        }
        let inner: f64 = (0..d).map(|r| w[r] * bucket[r]).sum();
        delta += (inner - centered) * (inner - centered);
    }
    Ok(delta / d as f64)
}

fn variance_checked(sigma: &SigmaVector) -> Result<()> {
    if sigma.d < 2 {
        return Err(Error::domain("variance needs d >= 2"));
    }
    let d = sigma.d as u128;
    if d * d > QUADRATIC_BUDGET {
        return Err(Error::Resource(format!(
            "variance loop is O(d^2) and d={d} exceeds the quadratic budget"
        )));
    }
    Ok(())
}

/// ||r/d||^2 for r in [0, d).
fn norm_sq_table(d: u32) -> Vec<f64> {
    (0..d as i64)
        .map(|r| {
            let dist = r.min(d as i64 - r) as f64 / d as f64;
            dist * dist
        })
        .collect()
}

/// Omega_S(n): number of prime-power divisors of n with base in S,
/// counted with multiplicity. Completely additive.
pub fn omega_s(n: u64, in_s: impl Fn(u64) -> bool) -> u64 {
    let mut m = n;
    let mut count = 0;
    let mut p = 2;
    while p * p <= m {
        while m % p == 0 {
            m /= p;
            if in_s(p) {
                count += 1;
            }
        }
        p += 1;
    }
    if m > 1 && in_s(m) {
        count += 1;
    }
    count
}

/// Turan-Kubilius style report for Omega_{S_j} with
/// S_j = {p <= x : f(p) = e(j/d)}.
#[derive(Debug, Clone, Copy)]
pub struct TkReport {
    pub mean: f64,
    pub sigma_j: f64,
    pub diff: f64,
    pub second_moment: f64,
    pub c_tk: f64,
    pub holds: bool,
}

pub fn turan_kubilius_check(
    f: &MultFun,
    x: u64,
    j: u32,
    primes: &PrimeTable,
    c_tk: f64,
) -> TkReport {
    assert!(x <= f.x_max(), "cutoff beyond tabulation");
    let mut omega = vec![0u32; x as usize + 1];
    let mut sigma_j = 0.0;
    for &p in primes.primes_upto(x) {
        if f.exponent(p) != Some(j) {
            continue;
        }
        sigma_j += 1.0 / p as f64;
        let mut pk = p;
        loop {
            let mut m = pk;
            while m <= x {
                omega[m as usize] += 1;
                m += pk;
            }
            match pk.checked_mul(p) {
                Some(next) if next <= x => pk = next,
                _ => break,
            }
        }
    }
    let n = x as f64;
    let mean = omega[1..].iter().map(|&o| o as f64).sum::<f64>() / n;
    let second_moment = omega[1..]
        .iter()
        .map(|&o| {
            let diff = o as f64 - sigma_j;
            diff * diff
        })
        .sum::<f64>()
        / n;
    TkReport {
        mean,
        sigma_j,
        diff: mean - sigma_j,
        second_moment,
        c_tk,
        holds: second_moment <= c_tk * (sigma_j + 1.0),
    }
}

/// Both sides of the orthogonality identity
/// sum_{l=1}^{d} sum_{p <= x} chi^l(p)/p = d * sum_{p <= x, chi(p)=1} 1/p.
#[derive(Debug, Clone, Copy)]
pub struct OrthogonalityReport {
    pub lhs: Complex64,
    pub rhs: f64,
    pub abs_diff: f64,
}

pub fn orthogonality_identity_check(
    chi: &Character,
    x: u64,
    primes: &PrimeTable,
) -> OrthogonalityReport {
    let d = chi.order() as u64;
    let roots = chi.roots();
    let plist = primes.primes_upto(x);
    let exps: Vec<Option<u32>> = plist.iter().map(|&p| chi.exponent(p)).collect();
    let mut lhs = Complex64::new(0.0, 0.0);
    for l in 1..=d {
        for (i, &p) in plist.iter().enumerate() {
            if let Some(j) = exps[i] {
                lhs += roots[(l * j as u64 % d) as usize] / p as f64;
            }
        }
    }
    let rhs = d as f64
        * plist
            .iter()
            .enumerate()
            .filter(|&(i, _)| exps[i] == Some(0))
            .map(|(_, &p)| 1.0 / p as f64)
            .sum::<f64>();
    OrthogonalityReport {
        lhs,
        rhs,
        abs_diff: (lhs - Complex64::new(rhs, 0.0)).norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{sieve, DlogTable};
    use std::sync::Arc;

    fn chi(q: u64, d: u32, ell: u32) -> Character {
        let dlog = Arc::new(DlogTable::build(q).unwrap());
        Character::new(dlog, d, ell).unwrap()
    }

    #[test]
    fn from_character_tabulation() {
        let f = MultFun::from_character(&chi(7, 2, 1), 6);
        let exps: Vec<u32> = (1..=6).map(|n| f.exponent(n).unwrap()).collect();
        assert_eq!(exps, vec![0, 0, 1, 0, 1, 1]);
        assert_eq!(f.exponent(1), Some(0));
        assert_eq!(f.level_histogram(6).zeros, 0); // x < q
        assert!(f.zero_primes().is_empty());

        let g = MultFun::from_character(&chi(7, 2, 1), 20);
        assert_eq!(g.zero_primes(), &[7]);
        assert_eq!(g.exponent(14), None);
        assert_eq!(g.level_histogram(20).zeros, 2); // 7 and 14
    }

    #[test]
    fn random_member_contracts() {
        let a = MultFun::random_member(500, 6, 42, 0.1).unwrap();
        let b = MultFun::random_member(500, 6, 42, 0.1).unwrap();
        assert_eq!(a.exps, b.exps);
        assert_eq!(a.zero_primes, b.zero_primes);

        let c = MultFun::random_member(500, 6, 7, 0.0).unwrap();
        assert_eq!(c.level_histogram(500).zeros, 0);

        let d1 = MultFun::random_member(500, 1, 7, 0.0).unwrap();
        assert!((1..=500).all(|n| d1.exponent(n) == Some(0)));

        assert!(MultFun::random_member(500, 0, 7, 0.0).is_err());
        assert!(MultFun::random_member(2, 2, 7, 0.0).is_err());
        assert!(MultFun::random_member(500, 2, 7, 1.0).is_err());
    }

    #[test]
    fn multiplicativity_of_random_members() {
        let f = MultFun::random_member(1000, 30, 3, 0.05).unwrap();
        for n in 1..=1000u64 {
            for m in 1..=1000 / n {
                let lhs = f.exponent(n * m);
                let rhs = match (f.exponent(n), f.exponent(m)) {
                    (Some(a), Some(b)) => Some((a + b) % 30),
                    _ => None,
                };
                assert_eq!(lhs, rhs, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn weak_equidistribution() {
        // a full period of a character achieves fiber size exactly (q-1)/d
        let f = MultFun::from_character(&chi(31, 5, 1), 30);
        let r = f.check_weak_equidistribution(30, 100.0);
        assert!(r.holds);
        assert_eq!(r.max_fiber, 6);

        // f == 1 with d = 1: fiber x <= 100x
        let ones = MultFun::one(1, 100);
        assert!(ones.check_weak_equidistribution(100, 100.0).holds);

        // all mass on one fiber fails once d exceeds the constant
        let ones = MultFun::one(200, 400);
        let r = ones.check_weak_equidistribution(400, 100.0);
        assert!(!r.holds);
        assert!(r.ratio > 1.0);
    }

    #[test]
    fn histogram_examples() {
        let f = MultFun::from_character(&chi(7, 6, 1), 6);
        let h = f.level_histogram(1);
        assert_eq!(h.counts[0], 1);
        assert_eq!(h.counts[1..].iter().sum::<u64>(), 0);

        let h = f.level_histogram(6);
        assert!(h.counts.iter().all(|&c| c == 1));
        assert_eq!(h.counts.iter().sum::<u64>() + h.zeros, 6);
    }

    #[test]
    fn mean_square_modes_agree() {
        let f = MultFun::from_character(&chi(31, 30, 1), 30);
        assert_eq!(
            f.mean_square_powers(1, MeanSquareMode::Histogram).unwrap(),
            1.0
        );
        let direct = f.mean_square_powers(20, MeanSquareMode::Direct).unwrap();
        let hist = f.mean_square_powers(20, MeanSquareMode::Histogram).unwrap();
        assert!((direct - hist).abs() / hist <= 1e-6, "{direct} vs {hist}");

        let ones = MultFun::one(1, 50);
        assert_eq!(
            ones.mean_square_powers(50, MeanSquareMode::Direct).unwrap(),
            50.0 * 50.0
        );

        assert!(matches!(
            f.mean_square_powers_with_budget(20, MeanSquareMode::Direct, 10),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn sigma_vectors() {
        let primes = sieve(1000).unwrap();
        let f = MultFun::random_member(1000, 4, 11, 0.0).unwrap();
        // x = 2: only p = 2 contributes, to whichever fiber it lives in
        let sv = f.sigma_vector(2, &primes);
        let j2 = f.exponent(2).unwrap() as usize;
        assert_eq!(sv.sigma[j2], 0.5);
        assert_eq!(sv.sigma.iter().sum::<f64>(), 0.5);

        let leg = MultFun::from_character(&chi(7, 2, 1), 6);
        let sv = leg.sigma_vector(6, &primes);
        assert!((sv.sigma[0] - 0.5).abs() < 1e-15);
        assert!((sv.sigma[1] - (1.0 / 3.0 + 1.0 / 5.0)).abs() < 1e-15);

        // partition of primes: sigma mass + zero mass = full harmonic mass
        let g = MultFun::random_member(1000, 6, 5, 0.2).unwrap();
        let sv = g.sigma_vector(1000, &primes);
        let zero_mass: f64 = g.zero_primes().iter().map(|&p| 1.0 / p as f64).sum();
        let all = primes.prime_harmonic_sum(1000, |_| true);
        assert!((sv.sigma.iter().sum::<f64>() + zero_mass - all).abs() < 1e-12);
    }

    #[test]
    fn big_sigma_examples() {
        let primes = sieve(100).unwrap();
        let leg = MultFun::from_character(&chi(7, 2, 1), 6);
        assert_eq!(leg.big_sigma(6, &primes), 2.0); // P-(2) = 2 wins

        let ones = MultFun::one(9, 50);
        assert_eq!(ones.big_sigma(50, &primes), 2.0); // empty sum, min{3, 2}

        let f = MultFun::from_character(&chi(31, 5, 1), 30);
        let sigma = f.big_sigma(30, &primes);
        assert!(sigma <= 5.0 && sigma >= 2.0);
    }

    #[test]
    fn pretentious_distance_basics() {
        let primes = sieve(1000).unwrap();
        let f = MultFun::from_character(&chi(7, 6, 1), 6);
        let d = pretentious_distance(&f, &f, 6, &primes);
        assert!(d.value_squared < 1e-12);

        // Mertens envelope: D^2 <= 2 sum 1/p
        let g = MultFun::random_member(1000, 5, 9, 0.1).unwrap();
        let h = MultFun::random_member(1000, 7, 10, 0.0).unwrap();
        let d = pretentious_distance(&g, &h, 1000, &primes);
        assert!(d.value_squared <= 2.0 * primes.prime_harmonic_sum(1000, |_| true));

        // zero values contribute exactly 1/p each
        let z = MultFun::random_member(100, 3, 1, 0.9).unwrap();
        let d_zz = pretentious_distance(&z, &z, 100, &primes);
        let nonzero_selfdist = 0.0;
        let zero_mass: f64 = (2..=100u64)
            .filter(|&n| primes.is_prime(n) && z.exponent(n).is_none())
            .map(|p| 1.0 / p as f64)
            .sum();
        assert!((d_zz.value_squared - zero_mass - nonzero_selfdist).abs() < 1e-12);
    }

    #[test]
    fn triangle_inequalities() {
        let primes = sieve(2000).unwrap();
        let fs: Vec<MultFun> = [(2u32, 1u64), (3, 2), (6, 3), (5, 4)]
            .iter()
            .map(|&(d, s)| MultFun::random_member(2000, d, s, 0.05).unwrap())
            .collect();
        let dist = |a: &MultFun, b: &MultFun| pretentious_distance(a, b, 2000, &primes)
            .value_squared
            .sqrt();
        for f in &fs {
            for g in &fs {
                for h in &fs {
                    assert!(dist(f, h) <= dist(f, g) + dist(g, h) + 1e-12);
                }
            }
        }
        // product form: D(f1 f2, g1 g2) <= D(f1,g1) + D(f2,g2)
        for (f1, f2, g1, g2) in [(&fs[0], &fs[1], &fs[2], &fs[3]), (&fs[3], &fs[2], &fs[1], &fs[0])] {
            let lhs = dist(&f1.product(f2), &g1.product(g2));
            assert!(lhs <= dist(f1, g1) + dist(f2, g2) + 1e-12);
        }
    }

    #[test]
    fn twist_minimization() {
        let primes = sieve(500).unwrap();
        let ones = MultFun::one(1, 500);
        let r = distance_to_twist(&ones, 500, 2.0, 0.5, &primes).unwrap();
        assert_eq!(r.minimizing_t, Some(0.0));
        assert_eq!(r.value_squared, 0.0);

        let f = MultFun::random_member(500, 6, 21, 0.0).unwrap();
        let at_zero = pretentious_distance(&f, &MultFun::one(1, 500), 500, &primes);
        let best = distance_to_twist(&f, 500, 3.0, 0.25, &primes).unwrap();
        assert!(best.value_squared <= at_zero.value_squared + 1e-12);

        // halving the step only refines the grid
        let coarse = distance_to_twist(&f, 500, 3.0, 0.5, &primes).unwrap();
        let fine = distance_to_twist(&f, 500, 3.0, 0.25, &primes).unwrap();
        assert!(fine.value_squared <= coarse.value_squared + 1e-15);

        let refined = distance_to_twist_refined(&f, 500, 3.0, 0.25, &primes).unwrap();
        assert!(refined.value_squared <= best.value_squared + 1e-15);
    }

    #[test]
    fn halasz_rhs_shape() {
        let x = 1e6;
        let v0 = halasz_rhs(0.0, 10.0, x, 1.0);
        assert!((v0 - (1.0 + 0.1 + x.ln().ln() / x.ln())).abs() < 1e-12);
        // decreasing in M beyond 1
        let mut prev = halasz_rhs(1.0, 10.0, x, 1.0);
        for m in [2.0, 4.0, 8.0, 16.0] {
            let v = halasz_rhs(m, 10.0, x, 1.0);
            assert!(v < prev);
            prev = v;
        }
        // all three terms vanish in the joint limit
        assert!(halasz_rhs(50.0, 1e9, 1e300, 1.0) < 0.01);
        assert!(halasz_rhs(80.0, 1e12, 1e300, 1.0) < halasz_rhs(50.0, 1e9, 1e300, 1.0));
    }

    #[test]
    fn variance_delta_values() {
        // all sigma zero
        let z = SigmaVector { d: 8, x: 10, sigma: vec![0.0; 8] };
        assert_eq!(variance_delta(&z).unwrap(), 0.0);

        // d = 2 closed form: Delta = 5 sigma1^2 / 288
        let s1 = 0.7;
        let sv = SigmaVector { d: 2, x: 10, sigma: vec![0.0, s1] };
        let delta = variance_delta(&sv).unwrap();
        assert!((delta - 5.0 * s1 * s1 / 288.0).abs() < 1e-15);

        // concentrated sigma on a unit of a prime d: Delta ~ sigma^2/180
        let d = 97u32;
        let mut sigma = vec![0.0; d as usize];
        sigma[5] = 2.5;
        let sv = SigmaVector { d, x: 100, sigma };
        let direct = variance_delta(&sv).unwrap();
        let bucketed = variance_delta_bucketed(&sv).unwrap();
        assert!((direct - bucketed).abs() <= 1e-12 * direct.max(1.0));
        let expected = 2.5 * 2.5 / 180.0;
        assert!((direct - expected).abs() < 0.02 * expected, "{direct} vs {expected}");

        let sv = SigmaVector { d: 100_000, x: 1, sigma: vec![] };
        assert!(matches!(variance_delta(&sv), Err(Error::Resource(_))));
    }

    #[test]
    fn omega_counts() {
        assert_eq!(omega_s(12, |p| p == 2), 2);
        assert_eq!(omega_s(1, |_| true), 0);
        assert_eq!(omega_s(97 * 97 * 3, |p| p == 97), 2);
    }

    #[test]
    fn turan_kubilius_reports() {
        let primes = sieve(20_000).unwrap();
        // empty S_j: a function with no prime at that exponent
        let ones = MultFun::one(5, 1000);
        let r = turan_kubilius_check(&ones, 1000, 3, &primes, 4.0);
        assert_eq!(r.mean, 0.0);
        assert_eq!(r.sigma_j, 0.0);
        assert_eq!(r.second_moment, 0.0);
        assert!(r.holds);

        // S = all primes <= x (exponent 0 of the all-ones function):
        // mean is close to sum over p^k <= x of 1/p^k
        let x = 20_000u64;
        let all = MultFun::one(3, x);
        let r = turan_kubilius_check(&all, x, 0, &primes, 4.0);
        let mut pk_sum = 0.0;
        for &p in primes.primes_upto(x) {
            let mut pk = p;
            loop {
                pk_sum += 1.0 / pk as f64;
                match pk.checked_mul(p) {
                    Some(n) if n <= x => pk = n,
                    _ => break,
                }
            }
        }
        assert!((r.mean - pk_sum).abs() < 0.05, "{} vs {pk_sum}", r.mean);
        assert!(r.holds);
    }

    #[test]
    fn orthogonality_identity() {
        let primes = sieve(1000).unwrap();
        for d in [30u32, 10, 6, 2] {
            let c = chi(31, d, 1);
            let r = orthogonality_identity_check(&c, 29, &primes);
            assert!(r.abs_diff < 1e-9, "d={d}: diff {}", r.abs_diff);

            // chi(p) = 1 iff p lies in the index-d subgroup, i.e.
            // p^((q-1)/d) = 1 mod q; an oracle independent of the dlog table
            let rhs_oracle: f64 = primes
                .primes_upto(29)
                .iter()
                .filter(|&&p| arith::mod_pow(p, 30 / d as u64, 31) == 1)
                .map(|&p| 1.0 / p as f64)
                .sum::<f64>()
                * d as f64;
            assert!((r.rhs - rhs_oracle).abs() < 1e-12, "d={d}");
        }

        let r = orthogonality_identity_check(&chi(31, 30, 1), 1, &primes);
        assert_eq!(r.lhs, Complex64::new(0.0, 0.0));
        assert_eq!(r.rhs, 0.0);
    }
}
