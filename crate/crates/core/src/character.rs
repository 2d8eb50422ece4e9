//! Primitive Dirichlet characters of exact order d modulo a prime q,
//! their partial and maximal sums, least non-one argument, value-argument
//! distribution, and the exceptional power-index sets.

use std::sync::Arc;

use num_complex::Complex64;

use crate::arith::{self, DlogTable, PrimeTable};
use crate::error::{Error, Result};

/// Sentinel exponent for the value 0 (i.e. q | n).
pub const ZERO_EXPONENT: u32 = u32::MAX;

/// e(j/d) for j in [0, d), built so that conjugate pairs are exact:
/// table[d-j] is the bitwise conjugate of table[j].
pub fn root_table(d: u32) -> Vec<Complex64> {
    let n = d as usize;
    let mut table = vec![Complex64::new(1.0, 0.0); n];
    for j in 1..=n / 2 {
        let root = if 2 * j == n {
            Complex64::new(-1.0, 0.0)
        } else {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / d as f64;
            Complex64::new(theta.cos(), theta.sin())
        };
        table[j] = root;
        if j != n - j {
            table[n - j] = root.conj();
        }
    }
    table
}

/// arg(e(j/d)) as the representative of j/d in (-1/2, 1/2].
pub fn arg_of_exponent(j: u32, d: u32) -> f64 {
    let jj = if 2 * j as u64 <= d as u64 {
        j as i64
    } else {
        j as i64 - d as i64
    };
    jj as f64 / d as f64
}

/// A half-open interval (lo, hi] inside (-1/2, 1/2] of character arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgInterval {
    lo: f64,
    hi: f64,
}

impl ArgInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&lo) || !(-0.5..=0.5).contains(&hi) || lo > hi {
            return Err(Error::domain(format!(
                "interval ({lo}, {hi}] must sit inside (-1/2, 1/2]"
            )));
        }
        Ok(ArgInterval { lo, hi })
    }

    pub fn full() -> Self {
        ArgInterval { lo: -0.5, hi: 0.5 }
    }

    pub fn empty() -> Self {
        ArgInterval { lo: 0.0, hi: 0.0 }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo < t && t <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// The maximum |partial sum| over one period and the first prefix length
/// attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxSumResult {
    pub value: f64,
    pub argmax_t: u64,
}

/// A symmetric subset of power indices [1, d-1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    d: u32,
    bits: Vec<u64>,
}

impl IndexSet {
    fn with_capacity(d: u32) -> Self {
        IndexSet {
            d,
            bits: vec![0u64; (d as usize + 63) / 64],
        }
    }

    /// Builds the set from member indices, asserting the l <-> d-l symmetry
    /// that conjugation-invariant statistics guarantee.
    pub fn from_members(d: u32, members: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut set = IndexSet::with_capacity(d);
        for l in members {
            if l == 0 || l >= d {
                return Err(Error::domain(format!("index {l} outside [1, {}]", d - 1)));
            }
            set.bits[l as usize / 64] |= 1 << (l % 64);
        }
        if !set.is_symmetric() {
            return Err(Error::domain(
                "index set is not symmetric under l -> d-l",
            ));
        }
        Ok(set)
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    pub fn contains(&self, l: u32) -> bool {
        l < self.d && self.bits[l as usize / 64] >> (l % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn members(&self) -> Vec<u32> {
        (1..self.d).filter(|&l| self.contains(l)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (1..self.d).all(|l| self.contains(l) == self.contains(self.d - l))
    }
}

/// A primitive character of exact order d modulo the prime q of its
/// discrete-log table, chi = chi_q^(ell (q-1)/d).
///
/// Values are carried as exponents in Z/dZ (never floating-point phases)
/// until a complex sum is actually requested, so equality tests against
/// roots of unity are exact.
#[derive(Debug, Clone)]
pub struct Character {
    dlog: Arc<DlogTable>,
    d: u32,
    ell: u32,
    step: u64,
    roots: Arc<Vec<Complex64>>,
}

impl Character {
    pub fn new(dlog: Arc<DlogTable>, d: u32, ell: u32) -> Result<Self> {
        let q = dlog.q();
        if d < 2 || (q - 1) % d as u64 != 0 {
            return Err(Error::domain(format!(
                "order d={d} must be >= 2 and divide q-1 = {}",
                q - 1
            )));
        }
        let ell = ell % d;
        if arith::gcd(ell as u64, d as u64) != 1 {
            return Err(Error::domain(format!(
                "power index ell={ell} must be a unit mod d={d}"
            )));
        }
        let step = (q - 1) / d as u64;
        let roots = Arc::new(root_table(d));
        Ok(Character {
            dlog,
            d,
            ell,
            step,
            roots,
        })
    }

    pub fn q(&self) -> u64 {
        self.dlog.q()
    }

    pub fn order(&self) -> u32 {
        self.d
    }

    pub fn power_index(&self) -> u32 {
        self.ell
    }

    pub fn generator(&self) -> u64 {
        self.dlog.generator()
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    /// chi(n) as an exponent: `None` when q | n, otherwise `Some(j)` with
    /// chi(n) = e(j/d).
    ///
    /// The numerator ell*step*ind(n) is a multiple of step = (q-1)/d, so the
    /// reduction mod q-1 followed by division by step is exact.
    pub fn exponent(&self, n: u64) -> Option<u32> {
        let q = self.q();
        let r = n % q;
        if r == 0 {
            return None;
        }
        let qm1 = q - 1;
        let ind = self.dlog.index(r) as u64;
        let num = arith::mul_mod(self.ell as u64 * self.step % qm1, ind, qm1);
        debug_assert_eq!(num % self.step, 0);
        Some((num / self.step) as u32)
    }

    /// chi(n) as a complex number.
    pub fn value(&self, n: u64) -> Complex64 {
        match self.exponent(n) {
            None => Complex64::new(0.0, 0.0),
            Some(j) => self.roots[j as usize],
        }
    }

    /// Exponents of chi(n) for n in [1, x]; ZERO_EXPONENT marks q | n.
    pub fn exponent_table(&self, x: u64) -> Vec<u32> {
        let mut t = vec![0u32; x as usize + 1];
        t[0] = ZERO_EXPONENT;
        for n in 1..=x {
            t[n as usize] = self.exponent(n).unwrap_or(ZERO_EXPONENT);
        }
        t
    }

    /// Sum of chi(n) over n <= x, terms accumulated in ascending n.
    pub fn partial_sum(&self, x: u64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 1..=x {
            sum += self.value(n);
        }
        sum
    }

    /// Sum of chi^k(n) over n <= x. For k = 0 mod d the power is principal
    /// and contributes 1 at every n coprime to q.
    pub fn partial_sum_of_power(&self, k: u32, x: u64) -> Complex64 {
        let q = self.q();
        let k = k % self.d;
        if k == 0 {
            let count = x - x / q;
            return Complex64::new(count as f64, 0.0);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 1..=x {
            if let Some(j) = self.exponent(n) {
                sum += self.roots[(k as u64 * j as u64 % self.d as u64) as usize];
            }
        }
        sum
    }

    /// M(chi) = max over 1 <= t <= q of |sum of chi(n) for n <= t|, by one
    /// prefix scan. Ties resolve to the smallest t.
    pub fn max_partial_sum(&self) -> MaxSumResult {
        let exps = self.exponent_table(self.q());
        self.max_scan(&exps, 1)
    }

    fn max_scan(&self, exps: &[u32], k: u32) -> MaxSumResult {
        let d = self.d as u64;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut best = (f64::NEG_INFINITY, 0u64);
        for (n, &e) in exps.iter().enumerate().skip(1) {
            if e != ZERO_EXPONENT {
                sum += self.roots[(k as u64 * e as u64 % d) as usize];
            }
            let norm = sum.norm_sqr();
            if norm > best.0 {
                best = (norm, n as u64);
            }
        }
        MaxSumResult {
            value: best.0.sqrt(),
            argmax_t: best.1,
        }
    }

    /// M(chi^l) for every l in [1, d-1], sharing one exponent table.
    pub fn power_max_sums(&self) -> Vec<MaxSumResult> {
        let exps = self.exponent_table(self.q());
        (1..self.d).map(|l| self.max_scan(&exps, l)).collect()
    }

    /// Least n >= 1 with chi(n) not in {0, 1}.
    pub fn least_nonone(&self) -> u64 {
        (1..=self.q())
            .find(|&n| matches!(self.exponent(n), Some(j) if j != 0))
            .expect("a non-principal character takes a value != 0, 1")
    }

    /// Fiber sizes |{1 <= n <= q-1 : exponent(n) = j}| over one full period.
    pub fn fiber_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.d as usize];
        for n in 1..self.q() {
            if let Some(j) = self.exponent(n) {
                counts[j as usize] += 1;
            }
        }
        counts
    }

    /// Exact count of n in [1, q-1] with arg(chi(n)) in the interval.
    pub fn arg_interval_count(&self, interval: ArgInterval) -> u64 {
        self.fiber_counts()
            .iter()
            .enumerate()
            .filter(|&(j, _)| interval.contains(arg_of_exponent(j as u32, self.d)))
            .map(|(_, &c)| c)
            .sum()
    }

    /// Sweeps intervals with endpoints on the grid {-1/2 + i/(2K)} and
    /// compares the worst count deviation against the Erdos-Turan style
    /// bound constant * q * (1/K + ln(1 + floor(K/d))/d).
    ///
    /// Interval membership is decided in exact integer arithmetic.
    pub fn erdos_turan_discrepancy_check(&self, big_k: u32, constant: f64) -> EtReport {
        assert!(big_k >= 1);
        let q = self.q();
        let d = self.d as i64;
        let two_k = 2 * big_k as i64;
        let counts = self.fiber_counts();

        // key(j) = arg numerator jj scaled by 2K; arg(e(j/d)) = jj/d.
        let mut keyed: Vec<(i64, u64)> = counts
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let jj = if 2 * j as i64 <= d { j as i64 } else { j as i64 - d };
                (jj * two_k, c)
            })
            .collect();
        keyed.sort_unstable();
        let prefix: Vec<u64> = keyed
            .iter()
            .scan(0u64, |acc, &(_, c)| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        // count of args with key <= bound_key (grid point i scaled by d)
        let count_upto = |bound_key: i64| -> u64 {
            let pos = keyed.partition_point(|&(k, _)| k <= bound_key);
            if pos == 0 {
                0
            } else {
                prefix[pos - 1]
            }
        };

        let mut max_discrepancy = f64::NEG_INFINITY;
        let mut worst = (0.0, 0.0);
        for a in 0..=two_k {
            let upto_a = count_upto((a - big_k as i64) * d);
            for b in a + 1..=two_k {
                let count = count_upto((b - big_k as i64) * d) - upto_a;
                let len = (b - a) as f64 / two_k as f64;
                let discrepancy = (count as f64 - q as f64 * len).abs();
                if discrepancy > max_discrepancy {
                    max_discrepancy = discrepancy;
                    worst = (
                        (a - big_k as i64) as f64 / two_k as f64,
                        (b - big_k as i64) as f64 / two_k as f64,
                    );
                }
            }
        }
        let bound = constant
            * q as f64
            * (1.0 / big_k as f64
                + (1.0 + (big_k / self.d) as f64).ln() / self.d as f64);
        EtReport {
            k: big_k,
            max_discrepancy,
            bound,
            holds: max_discrepancy <= bound,
            worst_interval: worst,
        }
    }

    /// Xi_d(epsilon) = {1 <= l <= d-1 : M(chi^l) > epsilon sqrt(q) log(q)}.
    pub fn xi_set(&self, epsilon: f64) -> Result<IndexSet> {
        if epsilon <= 0.0 {
            return Err(Error::domain(format!("epsilon must be > 0, got {epsilon}")));
        }
        let max_sums = self.power_max_sums();
        self.xi_set_from_max_sums(&max_sums, epsilon)
    }

    /// Same as [`Character::xi_set`] but reusing precomputed M(chi^l) values.
    pub fn xi_set_from_max_sums(&self, max_sums: &[MaxSumResult], epsilon: f64) -> Result<IndexSet> {
        let q = self.q() as f64;
        let threshold = epsilon * q.sqrt() * q.ln();
        let members = max_sums
            .iter()
            .enumerate()
            .filter(|(_, m)| m.value > threshold)
            .map(|(i, _)| i as u32 + 1);
        IndexSet::from_members(self.d, members)
    }

    /// (1/d) * sum over 1 <= l <= d-1 of M(chi^l).
    pub fn avg_max_sum_over_powers(&self) -> f64 {
        let sums = self.power_max_sums();
        sums.iter().map(|m| m.value).sum::<f64>() / self.d as f64
    }
}

/// Erdos-Turan interval-sweep report: worst deviation vs. the bound RHS.
#[derive(Debug, Clone, Copy)]
pub struct EtReport {
    pub k: u32,
    pub max_discrepancy: f64,
    pub bound: f64,
    pub holds: bool,
    pub worst_interval: (f64, f64),
}

/// |S_delta| = #{n = mk < q : m <= q^(delta/10) and p|k => q^(delta/10) < p <= q^delta}
/// by factoring every n < q. The window part k of n is unique, so n is in
/// S_delta exactly when the cofactor m = n/k is <= q^(delta/10).
pub fn count_s_delta(q: u64, delta: f64, primes: &PrimeTable) -> Result<u64> {
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::domain(format!("delta must be in (0,1), got {delta}")));
    }
    if primes.limit() < q - 1 {
        return Err(Error::TableRange(format!(
            "prime table limit {} < q-1 = {}",
            primes.limit(),
            q - 1
        )));
    }
    let y_hi = (q as f64).powf(delta).floor() as u64;
    let y_lo = (q as f64).powf(delta / 10.0).floor() as u64;
    let mut count = 0u64;
    for n in 1..q {
        let mut window_part = 1u64;
        for (p, mult) in primes.factorize(n) {
            if p > y_lo && p <= y_hi {
                window_part *= p.pow(mult);
            }
        }
        let m = n / window_part;
        debug_assert_eq!(m * window_part, n);
        if m <= y_lo {
            count += 1;
        }
    }
    Ok(count)
}
