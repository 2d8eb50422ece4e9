//! Sumset algebra in Z/dZ on bitsets: iterated doubling, the Freiman-based
//! covering check, (k,l)-sets with the Bajnok-Hamidoune-Plagne bound and a
//! brute-force maximal-set search, and approximate-homomorphism defects.

use crate::character::{Character, IndexSet};
use crate::error::{Error, Result};

/// A subset of Z/dZ stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicSubset {
    d: u32,
    bits: Vec<u64>,
}

impl CyclicSubset {
    pub fn empty(d: u32) -> Self {
        assert!(d >= 1);
        CyclicSubset {
            d,
            bits: vec![0u64; (d as usize + 63) / 64],
        }
    }

    pub fn full(d: u32) -> Self {
        let mut s = CyclicSubset::empty(d);
        for w in 0..s.bits.len() {
            s.bits[w] = !0u64;
        }
        s.mask_top();
        s
    }

    pub fn from_members(d: u32, members: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut s = CyclicSubset::empty(d);
        for m in members {
            if m >= d {
                return Err(Error::domain(format!("element {m} outside Z/{d}Z")));
            }
            s.bits[m as usize / 64] |= 1 << (m % 64);
        }
        Ok(s)
    }

    pub fn from_index_set(set: &IndexSet) -> Self {
        CyclicSubset::from_members(set.modulus(), set.members()).expect("index set is in range")
    }

    fn mask_top(&mut self) {
        let rem = self.d as usize % 64;
        if rem != 0 {
            *self.bits.last_mut().unwrap() &= (1u64 << rem) - 1;
        }
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    pub fn contains(&self, m: u32) -> bool {
        m < self.d && self.bits[m as usize / 64] >> (m % 64) & 1 == 1
    }

    pub fn len(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.d
    }

    pub fn members(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len() as usize);
        for (w, &word) in self.bits.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let b = word.trailing_zeros();
                out.push(w as u32 * 64 + b);
                word &= word - 1;
            }
        }
        out
    }

    /// -A = A, i.e. m in A iff d - m in A.
    pub fn is_symmetric(&self) -> bool {
        (0..self.d).all(|m| self.contains(m) == self.contains((self.d - m) % self.d))
    }

    pub fn intersects(&self, other: &CyclicSubset) -> bool {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .any(|(&a, &b)| a & b != 0)
    }

    /// self |= other rotated left by `shift` within the d-bit field.
    fn or_rotated(&mut self, other: &CyclicSubset, shift: u32) {
        let d = self.d as usize;
        let shift = shift as usize % d;
        if shift == 0 {
            for (a, &b) in self.bits.iter_mut().zip(other.bits.iter()) {
                *a |= b;
            }
            return;
        }
        let n = self.bits.len();
        // bits j of other land at j + shift (low part) and j + shift - d (wrap)
        let (ws, bs) = (shift / 64, shift % 64);
        for i in (0..n).rev() {
            let mut v = 0u64;
            if i >= ws {
                v |= other.bits[i - ws] << bs;
                if bs > 0 && i > ws {
                    v |= other.bits[i - ws - 1] >> (64 - bs);
                }
            }
            self.bits[i] |= v;
        }
        self.mask_top();
        let back = d - shift; // logical right shift for the wrapped bits
        let (ws, bs) = (back / 64, back % 64);
        for i in 0..n {
            let mut v = 0u64;
            if i + ws < n {
                v = other.bits[i + ws] >> bs;
                if bs > 0 && i + ws + 1 < n {
                    v |= other.bits[i + ws + 1] << (64 - bs);
                }
            }
            self.bits[i] |= v;
        }
        self.mask_top();
    }

    pub fn is_subset_of(&self, other: &CyclicSubset) -> bool {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .all(|(&a, &b)| a & !b == 0)
    }
}

/// A + B = {a + b : a in A, b in B} via shifted-bitset OR.
pub fn sumset(a: &CyclicSubset, b: &CyclicSubset) -> Result<CyclicSubset> {
    if a.modulus() != b.modulus() {
        return Err(Error::domain(format!(
            "sumset modulus mismatch: {} vs {}",
            a.modulus(),
            b.modulus()
        )));
    }
    let mut out = CyclicSubset::empty(a.modulus());
    for m in a.members() {
        out.or_rotated(b, m);
        if out.is_full() {
            break;
        }
    }
    Ok(out)
}

/// Applies B <- B + B exactly j times.
pub fn iterate_double(a: &CyclicSubset, j: u32) -> CyclicSubset {
    let mut b = a.clone();
    for _ in 0..j {
        b = sumset(&b, &b).expect("same modulus");
    }
    b
}

/// kA by k-1 successive sumset applications.
pub fn repeated_sumset(a: &CyclicSubset, k: u32) -> Result<CyclicSubset> {
    if k < 1 {
        return Err(Error::domain("iterated sumset needs k >= 1"));
    }
    let mut acc = a.clone();
    for _ in 1..k {
        acc = sumset(&acc, a)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy)]
pub struct FreimanReport {
    /// First j with 2^j A = Z/dZ, when one exists within the ceiling.
    pub first_j: Option<u32>,
    /// ceil(log(1/c) / log(3/2))
    pub ceiling: u32,
    /// Set when no j within the ceiling fills the group; this would falsify
    /// the implementation, not the theorem.
    pub counterexample: bool,
}

/// Checks that a symmetric A with |A| >= c d and P-(d) > 1/c doubles to the
/// full group within the Freiman ceiling.
pub fn freiman_doubling_check(a: &CyclicSubset, c: f64) -> Result<FreimanReport> {
    let d = a.modulus();
    let mut violations = Vec::new();
    if !(crate::arith::smallest_prime_factor(d as u64) as f64 > 1.0 / c) {
        violations.push(format!("P-({d}) <= 1/c = {}", 1.0 / c));
    }
    if !a.is_symmetric() {
        violations.push("A is not symmetric".into());
    }
    if (a.len() as f64) < c * d as f64 {
        violations.push(format!("|A| = {} < c d = {}", a.len(), c * d as f64));
    }
    if !violations.is_empty() {
        return Err(Error::domain(violations.join("; ")));
    }
    let ceiling = ((1.0 / c).ln() / 1.5f64.ln()).ceil().max(1.0) as u32;
    let mut b = a.clone();
    let mut first_j = None;
    for j in 1..=ceiling {
        b = sumset(&b, &b)?;
        if b.is_full() {
            first_j = Some(j);
            break;
        }
    }
    Ok(FreimanReport {
        first_j,
        ceiling,
        counterexample: first_j.is_none(),
    })
}

/// Whether kA and lA are disjoint.
pub fn is_kl_set(a: &CyclicSubset, k: u32, l: u32) -> Result<bool> {
    if k < 1 || l < 1 {
        return Err(Error::domain("(k,l)-set test needs k, l >= 1"));
    }
    if a.is_empty() {
        return Err(Error::domain("(k,l)-set test needs a nonempty set"));
    }
    let ka = repeated_sumset(a, k)?;
    let la = repeated_sumset(a, l)?;
    Ok(!ka.intersects(&la))
}

/// The Bajnok / Hamidoune-Plagne cardinality bound for maximal (k,l)-sets
/// in Z/nZ: max over f | n of (n/f)(1 + floor((f-2)/(k+l))), with the floor
/// of a negative argument rounding toward minus infinity (the f = 1 term
/// is 0).
pub fn bhp_bound(n: u64, k: u32, l: u32) -> Result<u64> {
    if k == l {
        return Err(Error::domain("the bound requires k != l"));
    }
    if n < 1 || k < 1 || l < 1 {
        return Err(Error::domain("bhp_bound needs n, k, l >= 1"));
    }
    let kl = (k + l) as i64;
    let mut best = 0i64;
    for f in 1..=n {
        if n % f != 0 {
            continue;
        }
        let term = (n / f) as i64 * (1 + (f as i64 - 2).div_euclid(kl));
        best = best.max(term);
    }
    Ok(best as u64)
}

#[derive(Debug, Clone)]
pub struct KlSearchResult {
    pub max_size: u32,
    /// Lexicographically smallest witness among maximum-cardinality sets.
    pub witness: CyclicSubset,
}

/// Exhaustive maximum-cardinality (k,l)-set search in Z/nZ by DFS over
/// elements in increasing order. Supersets of non-(k,l)-sets are never
/// (k,l)-sets, so failed extensions prune their whole branch.
pub fn max_kl_set_bruteforce(n: u64, k: u32, l: u32) -> Result<KlSearchResult> {
    if k == l {
        return Err(Error::domain("the search requires k != l"));
    }
    if n > 30 {
        return Err(Error::Resource(format!(
            "exhaustive (k,l)-search is capped at n <= 30, got {n}"
        )));
    }
    if n < 1 || k < 1 || l < 1 {
        return Err(Error::domain("search needs n, k, l >= 1"));
    }
    let n = n as u32;
    let mask = if n == 32 { !0u32 } else { (1u32 << n) - 1 };
    let rot = |m: u32, s: u32| -> u32 {
        if s == 0 {
            m
        } else {
            ((m << s) | (m >> (n - s))) & mask
        }
    };
    let times = |a: u32, reps: u32| -> u32 {
        let mut acc = a;
        for _ in 1..reps {
            let mut next = 0u32;
            let mut rest = acc;
            while rest != 0 {
                let bit = rest.trailing_zeros();
                next |= rot(a, bit);
                rest &= rest - 1;
            }
            acc = next;
        }
        acc
    };
    let is_kl = |m: u32| -> bool { times(m, k) & times(m, l) == 0 };

    // 0 is never a member: it would put 0 in both kA and lA.
    let mut best_size = 0u32;
    let mut best_mask = 0u32;
    // iterative DFS: stack of (current mask, next element to try)
    let mut stack = vec![(0u32, 1u32)];
    while let Some((cur, from)) = stack.pop() {
        let size = cur.count_ones();
        if size > best_size {
            best_size = size;
            best_mask = cur;
        }
        // descend on the smallest untried element first so the first
        // maximum found is the lexicographically smallest
        for e in (from..n).rev() {
            if size + (n - e) <= best_size {
                continue;
            }
            let cand = cur | 1 << e;
            if is_kl(cand) {
                stack.push((cand, e + 1));
            }
        }
    }
    let witness = CyclicSubset::from_members(
        n,
        (0..n).filter(|&m| best_mask >> m & 1 == 1),
    )?;
    Ok(KlSearchResult {
        max_size: best_size,
        witness,
    })
}

/// phi: Z/dZ -> R with phi(0) = 0, tested for how far it is from a genuine
/// homomorphism.
#[derive(Debug, Clone)]
pub struct ApproxHom {
    phi: Vec<f64>,
}

impl ApproxHom {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if phi.is_empty() || phi[0] != 0.0 {
            return Err(Error::domain("phi must be nonempty with phi[0] = 0"));
        }
        Ok(ApproxHom { phi })
    }

    pub fn modulus(&self) -> u32 {
        self.phi.len() as u32
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    /// max over pairs (a, b) of |phi(a+b) - phi(a) - phi(b)|.
    pub fn defect(&self) -> f64 {
        let d = self.phi.len();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in a..d {
                let s = (a + b) % d;
                worst = worst.max((self.phi[s] - self.phi[a] - self.phi[b]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Report for the exceptional-set structure of one character: symmetry,
/// (2k,1)-disjointness, and the two cardinality bounds it feeds.
#[derive(Debug, Clone)]
pub struct XiStructureReport {
    pub q: u64,
    pub d: u32,
    pub epsilon: f64,
    pub k: u32,
    pub xi_size: u32,
    pub symmetric: bool,
    /// 2k Xi and Xi are disjoint (vacuously true when Xi is empty).
    pub disjoint: bool,
    pub bhp: u64,
    /// |Xi| <= bhp whenever the disjointness test passes.
    pub size_within_bhp: bool,
    /// d (1/k + 1/P-(d)) scaled by the supplied constant.
    pub density_rhs: f64,
    /// epsilon >= lemma_constant * (log q)^(-1/(3(2k+1)^2)); reported, not
    /// enforced.
    pub hypothesis_met: bool,
}

pub fn xi_structure_check(
    chi: &Character,
    epsilon: f64,
    k: u32,
    lemma_constant: f64,
    density_constant: f64,
) -> Result<XiStructureReport> {
    if k < 1 {
        return Err(Error::domain("k must be >= 1"));
    }
    let xi = chi.xi_set(epsilon)?;
    xi_structure_from_set(chi, &xi, epsilon, k, lemma_constant, density_constant)
}

/// Same as [`xi_structure_check`] with a precomputed exceptional set.
pub fn xi_structure_from_set(
    chi: &Character,
    xi: &IndexSet,
    epsilon: f64,
    k: u32,
    lemma_constant: f64,
    density_constant: f64,
) -> Result<XiStructureReport> {
    let d = chi.order();
    let q = chi.q();
    let set = CyclicSubset::from_index_set(xi);
    let disjoint = if set.is_empty() {
        true
    } else {
        is_kl_set(&set, 2 * k, 1)?
    };
    let bhp = bhp_bound(d as u64, 2 * k, 1)?;
    let p_minus = crate::arith::smallest_prime_factor(d as u64) as f64;
    let exponent = -1.0 / (3.0 * (2.0 * k as f64 + 1.0).powi(2));
    Ok(XiStructureReport {
        q,
        d,
        epsilon,
        k,
        xi_size: set.len(),
        symmetric: set.is_symmetric(),
        disjoint,
        bhp,
        size_within_bhp: !disjoint || set.len() as u64 <= bhp,
        density_rhs: density_constant * d as f64 * (1.0 / k as f64 + 1.0 / p_minus),
        hypothesis_met: epsilon >= lemma_constant * (q as f64).ln().powf(exponent),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DlogTable;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn set(d: u32, members: &[u32]) -> CyclicSubset {
        CyclicSubset::from_members(d, members.iter().copied()).unwrap()
    }

    #[test]
    fn sumset_basics() {
        let b = set(9, &[2, 5, 7]);
        assert_eq!(sumset(&set(9, &[0]), &b).unwrap(), b);
        assert!(sumset(&CyclicSubset::empty(9), &b).unwrap().is_empty());
        let a = set(5, &[1, 4]);
        assert_eq!(sumset(&a, &a).unwrap(), set(5, &[0, 2, 3]));
        assert!(sumset(&a, &b).is_err());
    }

    #[test]
    fn doubling() {
        let a = set(5, &[1, 4]);
        assert_eq!(iterate_double(&a, 0), a);
        assert!(iterate_double(&a, 2).is_full());
        assert_eq!(repeated_sumset(&a, 1).unwrap(), a);
    }

    #[test]
    fn symmetric_doubling_nests() {
        // 2^j A subset of 2^{j+1} A for symmetric nonempty A, exhaustively
        // over d <= 20 (0 in 2A makes the chain monotone from j = 1 on)
        for d in 2..=20u32 {
            let pairs: Vec<(u32, u32)> = (1..=d / 2).map(|m| (m, d - m)).collect();
            for mask in 0..(1u32 << pairs.len()) {
                for with_zero in [false, true] {
                    let mut members = Vec::new();
                    if with_zero {
                        members.push(0);
                    }
                    for (i, &(m, neg)) in pairs.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            members.push(m);
                            if neg != m {
                                members.push(neg);
                            }
                        }
                    }
                    if members.is_empty() {
                        continue;
                    }
                    let a = set(d, &members);
                    let mut prev = iterate_double(&a, 1);
                    for _ in 1..4 {
                        let next = sumset(&prev, &prev).unwrap();
                        assert!(prev.is_subset_of(&next), "d={d} A={members:?}");
                        prev = next;
                    }
                }
            }
        }
    }

    #[test]
    fn freiman_examples() {
        let full = CyclicSubset::full(7);
        let r = freiman_doubling_check(&full, 0.9).unwrap();
        assert_eq!(r.first_j, Some(1));
        assert!(!r.counterexample);

        let a = set(5, &[1, 4]);
        let r = freiman_doubling_check(&a, 0.4).unwrap();
        assert_eq!(r.ceiling, 3);
        assert_eq!(r.first_j, Some(2));

        // violated preconditions are all reported
        let asym = set(5, &[1, 2]);
        let err = freiman_doubling_check(&asym, 0.1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("symmetric"));
        assert!(msg.contains("P-(5)"));
    }

    #[test]
    fn kl_sets() {
        let odds = set(12, &[1, 3, 5, 7, 9, 11]);
        assert!(is_kl_set(&odds, 2, 1).unwrap());
        let with_zero = set(12, &[0, 5, 7]);
        assert!(!is_kl_set(&with_zero, 3, 1).unwrap());
        assert!(!is_kl_set(&odds, 1, 1).unwrap());
        assert!(is_kl_set(&CyclicSubset::empty(5), 2, 1).is_err());
        assert!(is_kl_set(&odds, 0, 1).is_err());
    }

    #[test]
    fn bhp_values() {
        assert_eq!(bhp_bound(12, 2, 1).unwrap(), 6);
        assert_eq!(bhp_bound(1, 2, 1).unwrap(), 0);
        // prime n: just f = 1 (worth 0) and f = n
        for n in [5u64, 7, 11, 13] {
            let expected = (1 + (n as i64 - 2).div_euclid(3)) as u64;
            assert_eq!(bhp_bound(n, 2, 1).unwrap(), expected);
        }
        assert!(bhp_bound(12, 2, 2).is_err());
    }

    #[test]
    fn brute_force_small() {
        let r = max_kl_set_bruteforce(12, 2, 1).unwrap();
        assert_eq!(r.max_size, 6);
        assert_eq!(r.witness.members(), vec![1, 3, 5, 7, 9, 11]);

        let r = max_kl_set_bruteforce(5, 2, 1).unwrap();
        assert_eq!(r.max_size, 2);
        assert_eq!(r.witness.members(), vec![1, 4]);
        assert!(is_kl_set(&r.witness, 2, 1).unwrap());

        let r = max_kl_set_bruteforce(2, 2, 1).unwrap();
        assert_eq!(r.max_size, 1);
        assert_eq!(r.witness.members(), vec![1]);

        assert!(max_kl_set_bruteforce(31, 2, 1).is_err());
        assert!(max_kl_set_bruteforce(12, 2, 2).is_err());
    }

    #[test]
    fn approx_hom_defects() {
        let zero = ApproxHom::new(vec![0.0; 8]).unwrap();
        assert_eq!(zero.defect(), 0.0);

        for d in [2usize, 3, 8] {
            let c = 0.37;
            let mut phi = vec![c; d];
            phi[0] = 0.0;
            let h = ApproxHom::new(phi).unwrap();
            assert!((h.defect() - 2.0 * c).abs() < 1e-15, "d={d}");
        }

        assert!(ApproxHom::new(vec![0.1, 0.0]).is_err());
    }

    #[test]
    fn hyers_bound_with_unit_constant() {
        // the only homomorphism Z/dZ -> R is 0, so max|phi| <= K * defect
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for d in [3usize, 5, 12, 30] {
            for _ in 0..20 {
                let mut phi: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                phi[0] = 0.0;
                let h = ApproxHom::new(phi).unwrap();
                assert!(h.max_abs() <= 1.0 * h.defect() + 1e-12, "d={d}");
            }
        }
    }

    #[test]
    fn xi_structure_reports() {
        let dlog = Arc::new(DlogTable::build(101).unwrap());
        let chi = Character::new(dlog, 100, 1).unwrap();
        let r = xi_structure_check(&chi, 0.5, 1, 1.0, 1.0).unwrap();
        assert!(r.symmetric);
        assert_eq!(r.bhp, bhp_bound(100, 2, 1).unwrap());
        assert!(r.size_within_bhp || !r.disjoint);

        // a huge threshold empties the set, vacuously a (2k,1)-set
        let r = xi_structure_check(&chi, 5.0, 1, 1.0, 1.0).unwrap();
        assert_eq!(r.xi_size, 0);
        assert!(r.disjoint);
        assert!(r.size_within_bhp);
    }

    proptest! {
        #[test]
        fn sumset_matches_double_loop(
            d in 2u32..40,
            seed_a in any::<u64>(),
            seed_b in any::<u64>(),
        ) {
            let pick = |seed: u64| -> Vec<u32> {
                (0..d).filter(|&m| (seed >> (m % 64)) & 1 == 1).collect()
            };
            let a = set(d, &pick(seed_a));
            let b = set(d, &pick(seed_b));
            let fast = sumset(&a, &b).unwrap();
            let mut slow = vec![false; d as usize];
            for &x in &a.members() {
                for &y in &b.members() {
                    slow[((x + y) % d) as usize] = true;
                }
            }
            for m in 0..d {
                prop_assert_eq!(fast.contains(m), slow[m as usize]);
            }
            // commutativity
            prop_assert_eq!(&fast, &sumset(&b, &a).unwrap());
        }

        #[test]
        fn sumset_associative(
            d in 2u32..30,
            sa in any::<u64>(),
            sb in any::<u64>(),
            sc in any::<u64>(),
        ) {
            let pick = |seed: u64| -> Vec<u32> {
                (0..d).filter(|&m| (seed >> (m % 64)) & 1 == 1).collect()
            };
            let (a, b, c) = (set(d, &pick(sa)), set(d, &pick(sb)), set(d, &pick(sc)));
            let left = sumset(&sumset(&a, &b).unwrap(), &c).unwrap();
            let right = sumset(&a, &sumset(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
