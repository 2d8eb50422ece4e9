//! Prime sieving, factorization, primitive roots, discrete logarithms,
//! friable counting, and prime harmonic sums.

use crate::error::{Error, Result};

/// Default memory cap for discrete-log tables (number of residues).
pub const DEFAULT_DLOG_CAP: u64 = 1 << 31;

/// Primes and least-prime-factor data up to a fixed limit.
///
/// Built once with a linear sieve; immutable afterwards, so it can be shared
/// read-only across threads.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    /// smallest_factor[n] = least prime factor of n, for 2 <= n <= limit.
    smallest_factor: Vec<u32>,
}

/// Builds a [`PrimeTable`] covering `[2, limit]`.
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::domain(format!("sieve limit must be >= 2, got {limit}")));
    }
    if limit >= u32::MAX as u64 {
        return Err(Error::Resource(format!(
            "sieve limit {limit} exceeds the u32 factor-table range"
        )));
    }
    let n = limit as usize;
    let mut lpf = vec![0u32; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if lpf[i] == 0 {
            lpf[i] = i as u32;
            primes.push(i as u64);
        }
        // Linear sieve: each composite is struck exactly once by its lpf.
        for &p in &primes {
            let p = p as usize;
            if p > lpf[i] as usize || i * p > n {
                break;
            }
            lpf[i * p] = p as u32;
        }
    }
    Ok(PrimeTable {
        limit,
        primes,
        smallest_factor: lpf,
    })
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes in `[2, x]`; requires `x <= limit`.
    pub fn primes_upto(&self, x: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= x);
        &self.primes[..end]
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.smallest_factor[n as usize] as u64 == n
    }

    /// Least prime factor of `n` (n >= 2, n <= limit).
    pub fn least_prime_factor(&self, n: u64) -> u64 {
        debug_assert!((2..=self.limit).contains(&n));
        self.smallest_factor[n as usize] as u64
    }

    /// Largest prime factor of `n`, with the convention P+(1) = 1.
    pub fn largest_prime_factor(&self, n: u64) -> u64 {
        debug_assert!(n >= 1 && n <= self.limit);
        let mut m = n;
        let mut largest = 1;
        while m > 1 {
            let p = self.smallest_factor[m as usize] as u64;
            largest = p;
            while m % p == 0 {
                m /= p;
            }
        }
        largest
    }

    /// Prime factorization of `n <= limit` as ascending `(p, multiplicity)` pairs.
    pub fn factorize(&self, n: u64) -> Vec<(u64, u32)> {
        debug_assert!(n >= 1 && n <= self.limit);
        let mut m = n;
        let mut out = Vec::new();
        while m > 1 {
            let p = self.smallest_factor[m as usize] as u64;
            let mut k = 0;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            out.push((p, k));
        }
        out
    }

    /// All divisors of `n <= limit`, ascending.
    pub fn divisors(&self, n: u64) -> Vec<u64> {
        let mut divs = vec![1u64];
        for (p, k) in self.factorize(n) {
            let prev = divs.clone();
            let mut pe = 1u64;
            for _ in 0..k {
                pe *= p;
                divs.extend(prev.iter().map(|d| d * pe));
            }
        }
        divs.sort_unstable();
        divs
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        self.factorize(n).iter().all(|&(_, k)| k == 1)
    }

    /// Psi(x, y) = #{1 <= n <= x : P+(n) <= y}, exact count by factorization.
    pub fn friable_count(&self, x: u64, y: u64) -> Result<u64> {
        if x < 1 || y < 2 {
            return Err(Error::domain(format!(
                "friable_count requires x >= 1, y >= 2, got x={x}, y={y}"
            )));
        }
        if x > self.limit {
            return Err(Error::TableRange(format!(
                "friable_count x={x} exceeds sieve limit {}",
                self.limit
            )));
        }
        // n = 1 always counts (P+(1) = 1).
        let mut count = 1u64;
        for n in 2..=x {
            if self.largest_prime_factor(n) <= y {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Sum of 1/p over primes p <= x passing `filter`, accumulated in
    /// ascending order of p.
    pub fn prime_harmonic_sum<F: Fn(u64) -> bool>(&self, x: u64, filter: F) -> f64 {
        let mut sum = 0.0;
        for &p in self.primes_upto(x.min(self.limit)) {
            if filter(p) {
                sum += 1.0 / p as f64;
            }
        }
        sum
    }
}

/// Smallest prime factor of `d` by trial division; P-(1) is undefined and
/// returns `d` itself for d <= 1.
pub fn smallest_prime_factor(d: u64) -> u64 {
    if d <= 1 {
        return d;
    }
    if d % 2 == 0 {
        return 2;
    }
    let mut p = 3;
    while p * p <= d {
        if d % p == 0 {
            return p;
        }
        p += 2;
    }
    d
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    smallest_prime_factor(n) == n
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    debug_assert!(m > 0);
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Smallest primitive root modulo an odd prime `q`.
pub fn primitive_root(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::domain(format!("{q} is not prime")));
    }
    if q == 2 {
        return Err(Error::domain("modulus 2 has a trivial unit group"));
    }
    let phi = q - 1;
    let prime_factors: Vec<u64> = {
        let mut m = phi;
        let mut fs = Vec::new();
        let mut p = 2;
        while p * p <= m {
            if m % p == 0 {
                fs.push(p);
                while m % p == 0 {
                    m /= p;
                }
            }
            p += 1;
        }
        if m > 1 {
            fs.push(m);
        }
        fs
    };
    for g in 2..q {
        if prime_factors.iter().all(|&p| mod_pow(g, phi / p, q) != 1) {
            return Ok(g);
        }
    }
    unreachable!("every odd prime modulus has a primitive root")
}

/// Discrete logarithms modulo a prime: `ind[n]` with g^ind[n] = n (mod q).
///
/// The full table costs O(q) memory so that character evaluation in hot
/// loops is a single array read.
#[derive(Debug, Clone)]
pub struct DlogTable {
    q: u64,
    g: u64,
    ind: Vec<u32>,
}

impl DlogTable {
    /// Builds the table with the default memory cap.
    pub fn build(q: u64) -> Result<DlogTable> {
        Self::build_with_cap(q, DEFAULT_DLOG_CAP)
    }

    pub fn build_with_cap(q: u64, cap: u64) -> Result<DlogTable> {
        if q > cap {
            return Err(Error::Resource(format!(
                "dlog table for q={q} exceeds the cap {cap}"
            )));
        }
        let g = primitive_root(q)?;
        let mut ind = vec![0u32; q as usize];
        let mut acc = 1u64;
        for e in 0..q - 1 {
            ind[acc as usize] = e as u32;
            acc = mul_mod(acc, g, q);
        }
        debug_assert_eq!(acc, 1, "g must have order q-1");
        Ok(DlogTable { q, g, ind })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    /// ind(n) for n not divisible by q.
    pub fn index(&self, n: u64) -> u32 {
        let r = n % self.q;
        debug_assert!(r != 0, "discrete log of 0 is undefined");
        self.ind[r as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small() {
        assert_eq!(sieve(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(sieve(2).unwrap().primes(), &[2]);
        assert!(sieve(1).is_err());
    }

    /// Independent oracle: plain odd-only Eratosthenes, no shared code with
    /// the linear sieve above.
    fn eratosthenes(limit: usize) -> Vec<u64> {
        let mut is_comp = vec![false; limit + 1];
        let mut out = vec![2u64];
        let mut i = 3;
        while i * i <= limit {
            if !is_comp[i] {
                let mut j = i * i;
                while j <= limit {
                    is_comp[j] = true;
                    j += 2 * i;
                }
            }
            i += 2;
        }
        out.extend((3..=limit).step_by(2).filter(|&n| !is_comp[n]).map(|n| n as u64));
        out
    }

    #[test]
    fn sieve_to_a_million() {
        let table = sieve(1_000_000).unwrap();
        let oracle = eratosthenes(1_000_000);
        assert_eq!(table.primes().len(), 78_498);
        assert_eq!(table.primes(), oracle.as_slice());
    }

    #[test]
    fn lpf_divides_and_is_least() {
        let table = sieve(10_000).unwrap();
        for n in 2..=10_000u64 {
            let p = table.least_prime_factor(n);
            assert_eq!(n % p, 0);
            for m in 2..p {
                assert_ne!(n % m, 0, "n={n} has factor {m} below lpf {p}");
            }
        }
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(3).unwrap(), 2);
        assert_eq!(primitive_root(7).unwrap(), 3);
        assert_eq!(primitive_root(23).unwrap(), 5);
        assert!(primitive_root(8).is_err());

        // Brute-force order check of the returned roots.
        for q in [3u64, 7, 23, 101] {
            let g = primitive_root(q).unwrap();
            for h in 2..g {
                let order = (1..q).find(|&e| mod_pow(h, e, q) == 1).unwrap();
                assert!(order < q - 1, "{h} would be a smaller primitive root mod {q}");
            }
            let order = (1..q).find(|&e| mod_pow(g, e, q) == 1).unwrap();
            assert_eq!(order, q - 1);
        }
    }

    #[test]
    fn dlog_mod_7() {
        let t = DlogTable::build(7).unwrap();
        assert_eq!(t.generator(), 3);
        // powers of 3 mod 7: 3, 2, 6, 4, 5, 1
        assert_eq!(t.index(3), 1);
        assert_eq!(t.index(2), 2);
        assert_eq!(t.index(6), 3);
        assert_eq!(t.index(1), 0);
        assert_eq!(t.index(t.generator()), 1);
    }

    #[test]
    fn dlog_bijection_exhaustive() {
        let table = sieve(10_000).unwrap();
        for &q in table.primes() {
            if q < 3 {
                continue;
            }
            let t = DlogTable::build(q).unwrap();
            let mut seen = vec![false; (q - 1) as usize];
            for n in 1..q {
                let e = t.index(n);
                assert!(!seen[e as usize], "ind not injective at q={q}");
                seen[e as usize] = true;
                assert_eq!(mod_pow(t.generator(), e as u64, q), n);
            }
        }
    }

    #[test]
    fn dlog_cap() {
        assert!(matches!(
            DlogTable::build_with_cap(101, 100),
            Err(Error::Resource(_))
        ));
    }

    /// Trial-division friable oracle, independent of the lpf array.
    fn friable_oracle(x: u64, y: u64) -> u64 {
        (1..=x)
            .filter(|&n| {
                let mut m = n;
                let mut d = 2;
                while d * d <= m {
                    while m % d == 0 {
                        if d > y {
                            return false;
                        }
                        m /= d;
                    }
                    d += 1;
                }
                m == 1 || m <= y
            })
            .count() as u64
    }

    #[test]
    fn friable_examples() {
        let t = sieve(10_000).unwrap();
        assert_eq!(t.friable_count(100, 10).unwrap(), 46);
        assert_eq!(t.friable_count(1000, 1000).unwrap(), 1000);
        assert_eq!(t.friable_count(10, 2).unwrap(), 4); // 1, 2, 4, 8
        assert!(t.friable_count(0, 10).is_err());
        assert!(t.friable_count(10, 1).is_err());
    }

    #[test]
    fn friable_matches_oracle() {
        let t = sieve(10_000).unwrap();
        for &y in &[2u64, 3, 7, 10, 30, 100] {
            let mut prev = 0;
            for &x in &[1u64, 10, 100, 1234, 10_000] {
                let got = t.friable_count(x, y).unwrap();
                assert_eq!(got, friable_oracle(x, y), "x={x} y={y}");
                assert!(got >= prev, "not monotone in x");
                prev = got;
            }
        }
        // monotone in y
        let mut prev = 0;
        for &y in &[2u64, 3, 5, 7, 11, 50, 99] {
            let got = t.friable_count(5000, y).unwrap();
            assert!(got >= prev);
            prev = got;
        }
    }

    #[test]
    fn harmonic_sum_small() {
        let t = sieve(200_000).unwrap();
        let s10 = t.prime_harmonic_sum(10, |_| true);
        assert!((s10 - (0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0)).abs() < 1e-15);
        assert_eq!(t.prime_harmonic_sum(2, |_| true), 0.5);
    }

    #[test]
    fn harmonic_sum_mertens() {
        let t = sieve(100_000).unwrap();
        let s = t.prime_harmonic_sum(100_000, |_| true);
        let mertens = (100_000f64).ln().ln() + 0.26149;
        assert!((s - mertens).abs() < 0.01, "sum={s} vs mertens={mertens}");

        // monotone in x and inside the Rosser-Schoenfeld envelope
        // loglog x + B + 1/ln^2 x; the flat +0.27 form only holds once the
        // small-x error term has died down (x >= 1000)
        let mut prev = 0.0;
        for exp in 1..=5 {
            let x = 10u64.pow(exp);
            let s = t.prime_harmonic_sum(x, |_| true);
            let lnx = (x as f64).ln();
            assert!(s >= prev);
            assert!(s <= lnx.ln() + 0.26150 + 1.0 / (lnx * lnx), "x={x}");
            if x >= 1000 {
                assert!(s <= lnx.ln() + 0.27, "x={x}");
            }
            prev = s;
        }
    }

    #[test]
    fn divisors_and_squarefree() {
        let t = sieve(1000).unwrap();
        assert_eq!(t.divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(t.divisors(1), vec![1]);
        assert!(t.is_squarefree(210));
        assert!(!t.is_squarefree(12));
        assert_eq!(smallest_prime_factor(210), 2);
        assert_eq!(smallest_prime_factor(91), 7);
        assert_eq!(smallest_prime_factor(97), 97);
    }
}
