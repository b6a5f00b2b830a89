//! Cyclic subgroups of `Z_N`, their annihilators, and energy profiles.
//!
//! Every subgroup of `Z_N` is `<d>` for a divisor `d | N`. Its annihilator in
//! the dual group, indexed by frequency bins, is `<N/d>`. All arithmetic in
//! this module is exact integer arithmetic; only the energy computations
//! touch floating point.

use alloc::vec::Vec;

use crate::{Complex, Error, Result};

/// All positive divisors of `n` in strictly increasing order.
///
/// Returns an empty list for `n == 0`.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            small.push(i);
            if i != n / i {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// The cyclic subgroup `H = <d>` of `Z_n` together with `H⊥ = <n/d>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupSpec {
    n: usize,
    d: usize,
    elements_h: Vec<usize>,
    elements_h_perp: Vec<usize>,
}

impl SubgroupSpec {
    /// Builds `<d>` in `Z_n`. Fails unless `d` divides `n`.
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        if d == 0 || n % d != 0 {
            return Err(Error::InvalidGenerator { n, d });
        }
        let stride = n / d;
        Ok(Self {
            n,
            d,
            elements_h: (0..stride).map(|k| k * d).collect(),
            elements_h_perp: (0..d).map(|k| k * stride).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Generator parameter; also the size of the annihilator.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Residues of `H = {0, d, 2d, ...}` in increasing order.
    pub fn elements_h(&self) -> &[usize] {
        &self.elements_h
    }

    /// Residues of `H⊥ = {0, n/d, 2n/d, ...}` in increasing order.
    pub fn elements_h_perp(&self) -> &[usize] {
        &self.elements_h_perp
    }

    /// Spacing between consecutive annihilator elements, `n / d`.
    pub fn perp_stride(&self) -> usize {
        self.n / self.d
    }

    pub fn contains_h(&self, m: usize) -> bool {
        m < self.n && m % self.d == 0
    }

    pub fn contains_h_perp(&self, m: usize) -> bool {
        m < self.n && m % self.perp_stride() == 0
    }

    /// The annihilator viewed as a subgroup in its own right, `<n/d>`.
    pub fn dual(&self) -> Self {
        // n/d always divides n, so this cannot fail.
        Self::new(self.n, self.perp_stride()).expect("n/d divides n")
    }

    /// Exhaustive character test of this subgroup's elements.
    pub fn annihilator_bruteforce(&self) -> Vec<usize> {
        annihilator_bruteforce(self.n, &self.elements_h)
    }
}

/// `{ k in Z_n : k·h ≡ 0 (mod n) for every h in subset }`, by exhaustive
/// integer test.
///
/// `e^{2πi k h / n} = 1` exactly when `n | k·h`, so no floating-point
/// character evaluation is needed.
pub fn annihilator_bruteforce(n: usize, subset: &[usize]) -> Vec<usize> {
    (0..n)
        .filter(|&k| subset.iter().all(|&h| (k * h) % n == 0))
        .collect()
}

fn check_len(h: &[Complex], n: usize) -> Result<()> {
    if h.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: h.len(),
        });
    }
    Ok(())
}

pub(crate) fn energy(h: &[Complex]) -> f64 {
    h.iter().map(|c| c.norm_sqr()).sum()
}

/// Energy on the annihilator `{0, stride, 2·stride, ...}`.
pub(crate) fn strided_energy(h: &[Complex], stride: usize) -> f64 {
    h.iter().step_by(stride).map(|c| c.norm_sqr()).sum()
}

/// Orthogonal projection onto vectors supported on `H⊥`.
pub fn project(h: &[Complex], spec: &SubgroupSpec) -> Result<Vec<Complex>> {
    check_len(h, spec.n)?;
    let stride = spec.perp_stride();
    Ok(h.iter()
        .enumerate()
        .map(|(m, &v)| if m % stride == 0 { v } else { Complex::new(0.0, 0.0) })
        .collect())
}

/// Share of the total energy of `h` lying on `H⊥`.
pub fn energy_ratio(h: &[Complex], spec: &SubgroupSpec) -> Result<f64> {
    check_len(h, spec.n)?;
    let total = energy(h);
    if total <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(strided_energy(h, spec.perp_stride()) / total)
}

/// The subgroup with the smallest `d` whose annihilator holds at least
/// `1 - epsilon` of the energy of `h`.
///
/// Divisors are scanned in increasing numeric order; `d = n` always passes.
pub fn minimal_subgroup(h: &[Complex], epsilon: f64) -> Result<SubgroupSpec> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let n = h.len();
    if n == 0 {
        return Err(Error::ZeroOrder);
    }
    let total = energy(h);
    if total <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let threshold = 1.0 - epsilon;
    let d = divisors(n)
        .into_iter()
        .find(|&d| strided_energy(h, n / d) / total >= threshold)
        .unwrap_or(n);
    SubgroupSpec::new(n, d)
}

/// Energy ratio of `h` for every divisor of its length.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile {
    pub divisors: Vec<usize>,
    pub ratios: Vec<f64>,
    pub e_total: f64,
}

impl EnergyProfile {
    pub fn compute(h: &[Complex]) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        let e_total = energy(h);
        if e_total <= 0.0 {
            return Err(Error::ZeroEnergy);
        }
        let divisors = divisors(n);
        let ratios = divisors
            .iter()
            .map(|&d| strided_energy(h, n / d) / e_total)
            .collect();
        Ok(Self {
            divisors,
            ratios,
            e_total,
        })
    }

    pub fn ratio(&self, d: usize) -> Option<f64> {
        self.divisors
            .iter()
            .position(|&x| x == d)
            .map(|i| self.ratios[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn impulse(n: usize, at: usize) -> Vec<Complex> {
        let mut v = vec![c(0.0); n];
        v[at] = c(1.0);
        v
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(256), vec![1, 2, 4, 8, 16, 32, 64, 128, 256]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(7), vec![1, 7]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(36), vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
    }

    #[test]
    fn subgroup_of_z12() {
        let s = SubgroupSpec::new(12, 3).unwrap();
        assert_eq!(s.elements_h(), &[0, 3, 6, 9]);
        assert_eq!(s.elements_h_perp(), &[0, 4, 8]);
    }

    #[test]
    fn trivial_and_full_subgroups() {
        let s = SubgroupSpec::new(8, 8).unwrap();
        assert_eq!(s.elements_h(), &[0]);
        assert_eq!(s.elements_h_perp(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        let s = SubgroupSpec::new(8, 1).unwrap();
        assert_eq!(s.elements_h(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(s.elements_h_perp(), &[0]);
    }

    #[test]
    fn rejects_non_divisor() {
        assert_eq!(
            SubgroupSpec::new(12, 5),
            Err(Error::InvalidGenerator { n: 12, d: 5 })
        );
        assert!(SubgroupSpec::new(12, 0).is_err());
        assert_eq!(SubgroupSpec::new(0, 1), Err(Error::ZeroOrder));
    }

    #[test]
    fn bruteforce_annihilators() {
        assert_eq!(annihilator_bruteforce(12, &[0, 3, 6, 9]), vec![0, 4, 8]);
        assert_eq!(annihilator_bruteforce(6, &[0, 2, 4]), vec![0, 3]);
        assert_eq!(annihilator_bruteforce(5, &[0]), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn projector_examples() {
        for d in divisors(12) {
            let s = SubgroupSpec::new(12, d).unwrap();
            assert_eq!(project(&impulse(12, 0), &s).unwrap(), impulse(12, 0));
        }
        let s = SubgroupSpec::new(8, 2).unwrap();
        let ones = vec![c(1.0); 8];
        let expected: Vec<_> = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]
            .iter()
            .map(|&x| c(x))
            .collect();
        assert_eq!(project(&ones, &s).unwrap(), expected);

        let s = SubgroupSpec::new(12, 3).unwrap();
        let mut h = vec![c(0.0); 12];
        h[0] = Complex::new(0.3, -1.0);
        h[4] = Complex::new(2.0, 0.5);
        h[8] = Complex::new(-0.7, 0.1);
        assert!([0, 4, 8].iter().all(|&m| s.contains_h_perp(m)));
        assert_eq!(project(&h, &s).unwrap(), h);
    }

    #[test]
    fn projector_length_mismatch() {
        let s = SubgroupSpec::new(8, 2).unwrap();
        assert_eq!(
            project(&[c(1.0); 4], &s),
            Err(Error::LengthMismatch {
                expected: 8,
                got: 4
            })
        );
    }

    fn worked_example() -> Vec<Complex> {
        let mut h = vec![c(0.0); 8];
        h[0] = c(1.0);
        h[4] = c(0.5);
        h
    }

    #[test]
    fn energy_ratio_examples() {
        for d in divisors(8) {
            let s = SubgroupSpec::new(8, d).unwrap();
            assert_eq!(energy_ratio(&impulse(8, 0), &s).unwrap(), 1.0);
        }
        let h = worked_example();
        let r1 = energy_ratio(&h, &SubgroupSpec::new(8, 1).unwrap()).unwrap();
        assert!((r1 - 0.8).abs() < 1e-15);
        let r2 = energy_ratio(&h, &SubgroupSpec::new(8, 2).unwrap()).unwrap();
        assert_eq!(r2, 1.0);
    }

    #[test]
    fn energy_ratio_rejects_zero_vector() {
        let s = SubgroupSpec::new(8, 2).unwrap();
        assert_eq!(energy_ratio(&[c(0.0); 8], &s), Err(Error::ZeroEnergy));
    }

    #[test]
    fn minimal_subgroup_examples() {
        assert_eq!(minimal_subgroup(&worked_example(), 0.15).unwrap().d(), 2);
        assert_eq!(minimal_subgroup(&impulse(16, 0), 0.01).unwrap().d(), 1);
        assert_eq!(
            minimal_subgroup(&[c(0.0); 8], 0.15),
            Err(Error::ZeroEnergy)
        );
        assert_eq!(
            minimal_subgroup(&worked_example(), 1.0),
            Err(Error::InvalidEpsilon(1.0))
        );
    }

    #[test]
    fn dense_vector_needs_full_group() {
        // Equal magnitudes everywhere: R_d = d/n, so only d = n passes a tiny epsilon.
        let h: Vec<_> = (0..12)
            .map(|m| Complex::from_polar(1.0, m as f64 * 0.7))
            .collect();
        assert_eq!(minimal_subgroup(&h, 1e-9).unwrap().d(), 12);
    }

    #[test]
    fn energy_profile_full_divisor_is_one() {
        let h = worked_example();
        let p = EnergyProfile::compute(&h).unwrap();
        assert_eq!(p.divisors, vec![1, 2, 4, 8]);
        assert_eq!(p.ratio(8), Some(1.0));
        assert!((p.e_total - 1.25).abs() < 1e-15);
        assert_eq!(p.ratio(3), None);
    }
}
