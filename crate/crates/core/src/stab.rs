//! n-qubit stabilizer states.
//!
//! Every stabilizer state has the amplitude form
//!
//! ```text
//! 2^{-k/2} sum_{u in F_2^k} i^{l.u} (-1)^{q(u)} e_{a + B u}
//! ```
//!
//! over an affine subspace `a + span(B)` of `F_2^n`. Enumerating subspaces in
//! reduced row echelon form, offsets as coset representatives (zero on the
//! pivot bits), `l in Z_4^k` and strictly upper triangular `q` visits every
//! state exactly once. Basis index `x` maps to qubits big-endian: qubit 0 is
//! the most significant bit, matching [`crate::vector::kron`].

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::dictionary::{canonical_phase, Dictionary, Word};
use crate::error::{Error, Result};
use crate::vector;

/// Largest `n` materialized by default.
pub const MAX_MATERIALIZED_QUBITS: usize = 4;
/// Largest `n` accepted at all (materialized only with `allow_large`).
pub const MAX_QUBITS: usize = 5;
/// Largest `n` for streamed fidelity.
pub const MAX_STREAMED_QUBITS: usize = 6;

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// `i^phase * X^x Z^z` with bit masks over qubits (bit `n-1-j` is qubit `j`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliOperator {
    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::Validation(format!("qubit count {n} outside 1..=64")));
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::Validation("Pauli bits exceed qubit count".into()));
        }
        Ok(PauliOperator { n, x, z, phase: phase % 4 })
    }

    /// Parses labels like `"XIZ"` or `"-iYY"`. Y is stored as `i X Z`.
    pub fn from_label(label: &str) -> Result<Self> {
        let (mut phase, body) = match label {
            l if l.starts_with("-i") => (3u8, &l[2..]),
            l if l.starts_with('-') => (2, &l[1..]),
            l if l.starts_with("+i") => (1, &l[2..]),
            l if l.starts_with('i') => (1, &l[1..]),
            l if l.starts_with('+') => (0, &l[1..]),
            l => (0, l),
        };
        let n = body.chars().count();
        let (mut x, mut z) = (0u64, 0u64);
        for (j, ch) in body.chars().enumerate() {
            let bit = 1u64 << (n - 1 - j);
            match ch {
                'I' => {}
                'X' => x |= bit,
                'Z' => z |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                    phase += 1;
                }
                other => return Err(Error::Validation(format!("bad Pauli letter {other:?}"))),
            }
        }
        PauliOperator::new(n, x, z, phase)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Symplectic test: commute iff `x_p.z_q + x_q.z_p = 0` over `F_2`.
    pub fn commutes(&self, other: &PauliOperator) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        Ok(((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2))
    }

    /// `P v` for `v` in `C^{2^n}`.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.n;
        if v.len() != dim {
            return Err(Error::Dimension { expected: dim, found: v.len() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        let global = I_POW[self.phase as usize];
        for (b, &a) in v.iter().enumerate() {
            let sign = if (self.z & b as u64).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            out[b ^ self.x as usize] = global * a * sign;
        }
        Ok(out)
    }
}

pub fn pauli_commutes(p: &PauliOperator, q: &PauliOperator) -> Result<bool> {
    p.commutes(q)
}

/// Affine parametrization of a stabilizer state on `n` qubits.
///
/// `linear[j]` is the `Z_4` exponent of `i` attached to coordinate `u_j`;
/// `quadratic[i]` is row `i` of an upper triangular bit matrix (bit `j` set
/// means the term `u_i u_j`, `j >= i`) contributing a sign `(-1)^{q(u)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineForm {
    pub basis: Vec<u64>,
    pub offset: u64,
    pub linear: Vec<u8>,
    pub quadratic: Vec<u64>,
}

impl AffineForm {
    /// The computational basis state `e_x`.
    pub fn basis_state(x: u64) -> Self {
        AffineForm { basis: vec![], offset: x, linear: vec![], quadratic: vec![] }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 || n > 20 {
            return Err(Error::Validation(format!("qubit count {n} outside 1..=20")));
        }
        let k = self.basis.len();
        if k > n || self.linear.len() != k || self.quadratic.len() != k {
            return Err(Error::Validation(format!(
                "affine form has {} basis vectors, {} linear and {} quadratic rows for n={n}",
                k,
                self.linear.len(),
                self.quadratic.len()
            )));
        }
        let limit = 1u64 << n;
        if self.offset >= limit || self.basis.iter().any(|&b| b >= limit) {
            return Err(Error::Validation("affine form vector exceeds 2^n".into()));
        }
        if self.linear.iter().any(|&l| l > 3) {
            return Err(Error::Validation("linear coefficients must lie in Z_4".into()));
        }
        for (i, &row) in self.quadratic.iter().enumerate() {
            let allowed = ((1u64 << k) - 1) & !((1u64 << i) - 1);
            if row & !allowed != 0 {
                return Err(Error::Validation(format!("quadratic row {i} is not upper triangular")));
            }
        }
        if gf2_rank(&self.basis) != k {
            return Err(Error::Validation("basis vectors are linearly dependent over F_2".into()));
        }
        Ok(())
    }

    /// Exponent of `i` at coordinate vector `u`.
    fn phase_exponent(&self, u: u64) -> usize {
        let mut e = 0usize;
        for j in 0..self.basis.len() {
            if u >> j & 1 == 1 {
                e += self.linear[j] as usize;
                e += 2 * (self.quadratic[j] & u).count_ones() as usize;
            }
        }
        e % 4
    }

    fn point(&self, u: u64) -> u64 {
        let mut x = self.offset;
        for (j, b) in self.basis.iter().enumerate() {
            if u >> j & 1 == 1 {
                x ^= b;
            }
        }
        x
    }
}

/// Amplitude vector of the stabilizer state described by `form`.
pub fn stabilizer_amplitudes(form: &AffineForm, n: usize) -> Result<Vec<Complex64>> {
    form.validate(n)?;
    let k = form.dim();
    let norm = (0.5f64).powf(k as f64 / 2.0);
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
    for u in 0..1u64 << k {
        v[form.point(u) as usize] = I_POW[form.phase_exponent(u)] * norm;
    }
    Ok(v)
}

fn gf2_rank(vectors: &[u64]) -> usize {
    let mut rows = vectors.to_vec();
    let mut rank = 0;
    for bit in (0..64).rev() {
        let mask = 1u64 << bit;
        if let Some(p) = (rank..rows.len()).find(|&r| rows[r] & mask != 0) {
            rows.swap(rank, p);
            let pivot = rows[rank];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && *row & mask != 0 {
                    *row ^= pivot;
                }
            }
            rank += 1;
        }
    }
    rank
}

/// `2^n prod_{k=1..n} (2^k + 1)`.
pub fn stabilizer_count(n: usize) -> u64 {
    (1..=n as u32).fold(1u64 << n, |acc, k| acc * ((1u64 << k) + 1))
}

/// One affine subspace `offset + span(basis)` in the enumeration order.
#[derive(Debug, Clone)]
struct AffineClass {
    basis: Vec<u64>,
    offset: u64,
}

/// Visits all affine subspaces of `F_2^n` once: `k` ascending, pivot sets in
/// increasing mask order, free entries as a counter, then offsets.
fn for_each_affine_class(n: usize, mut visit: impl FnMut(&AffineClass)) {
    let full = (1u64 << n) - 1;
    for k in 0..=n {
        for pivots in 0..=full {
            if pivots.count_ones() as usize != k {
                continue;
            }
            let pivot_bits: Vec<u32> = (0..n as u32).filter(|&b| pivots >> b & 1 == 1).collect();
            // Free positions of basis vector j: non-pivot bits below its pivot.
            let free: Vec<Vec<u32>> = pivot_bits
                .iter()
                .map(|&p| (0..p).filter(|&b| pivots >> b & 1 == 0).collect())
                .collect();
            let total_free: usize = free.iter().map(Vec::len).sum();
            let non_pivot: Vec<u32> = (0..n as u32).filter(|&b| pivots >> b & 1 == 0).collect();
            for fill in 0..1u64 << total_free {
                let mut cursor = 0;
                let basis: Vec<u64> = pivot_bits
                    .iter()
                    .zip(&free)
                    .map(|(&p, positions)| {
                        let mut v = 1u64 << p;
                        for &b in positions {
                            if fill >> cursor & 1 == 1 {
                                v |= 1 << b;
                            }
                            cursor += 1;
                        }
                        v
                    })
                    .collect();
                for o in 0..1u64 << non_pivot.len() {
                    let offset = non_pivot
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| o >> i & 1 == 1)
                        .fold(0u64, |acc, (_, &b)| acc | 1 << b);
                    visit(&AffineClass { basis: basis.clone(), offset });
                }
            }
        }
    }
}

/// Strictly-upper pairs `(i, j)` of `0..k`, in the bit order used for `q`.
fn upper_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect()
}

fn quadratic_rows(k: usize, pairs: &[(usize, usize)], q: u64) -> Vec<u64> {
    let mut rows = vec![0u64; k];
    for (bit, &(i, j)) in pairs.iter().enumerate() {
        if q >> bit & 1 == 1 {
            rows[i] |= 1 << j;
        }
    }
    rows
}

/// Visits every stabilizer form in enumeration order.
pub fn for_each_stabilizer_form(n: usize, mut visit: impl FnMut(&AffineForm)) {
    for_each_affine_class(n, |class| {
        let k = class.basis.len();
        let pairs = upper_pairs(k);
        for q in 0..1u64 << pairs.len() {
            let quadratic = quadratic_rows(k, &pairs, q);
            for l in 0..1u64 << (2 * k) {
                let linear = (0..k).map(|j| (l >> (2 * j) & 3) as u8).collect();
                visit(&AffineForm {
                    basis: class.basis.clone(),
                    offset: class.offset,
                    linear,
                    quadratic: quadratic.clone(),
                });
            }
        }
    });
}

/// All stabilizer states on `n <= 4` qubits in a fixed deterministic order.
pub fn enumerate_stabilizer_states(n: usize) -> Result<Dictionary> {
    enumerate_stabilizer_states_with(n, false)
}

/// As [`enumerate_stabilizer_states`]; `allow_large` unlocks `n = 5`
/// (2,423,520 words, about 1.3 GB of amplitudes).
pub fn enumerate_stabilizer_states_with(n: usize, allow_large: bool) -> Result<Dictionary> {
    let cap = if allow_large { MAX_QUBITS } else { MAX_MATERIALIZED_QUBITS };
    if n == 0 || n > cap {
        return Err(Error::Capacity(format!(
            "stabilizer enumeration supports 1 <= n <= {cap} qubits, got {n}"
        )));
    }
    let mut words = Vec::with_capacity(stabilizer_count(n) as usize);
    for_each_stabilizer_form(n, |form| {
        let amps = stabilizer_amplitudes(form, n).expect("enumerated forms are valid");
        words.push(Word { amplitudes: canonical_phase(&amps), label: None });
    });
    Dictionary::from_words(words)
}

/// `F_STAB_n(psi)` and its argmax without materializing the dictionary.
///
/// Indices agree with [`enumerate_stabilizer_states`].
pub fn stabilizer_fidelity_streamed(n: usize, psi: &[Complex64]) -> Result<(f64, usize)> {
    Ok(stabilizer_fidelities_streamed(n, std::slice::from_ref(&psi.to_vec()))?[0])
}

/// Batched streamed fidelity: one pass over the enumeration for all states.
///
/// For each subspace and quadratic part, the overlaps with all `4^k` linear
/// phases come from a radix-2-to-4 transform of the restricted amplitudes.
pub fn stabilizer_fidelities_streamed(n: usize, states: &[Vec<Complex64>]) -> Result<Vec<(f64, usize)>> {
    if n == 0 || n > MAX_STREAMED_QUBITS {
        return Err(Error::Capacity(format!(
            "streamed fidelity supports 1 <= n <= {MAX_STREAMED_QUBITS}, got {n}"
        )));
    }
    let dim = 1usize << n;
    if let Some(bad) = states.iter().find(|s| s.len() != dim) {
        return Err(Error::Dimension { expected: dim, found: bad.len() });
    }
    let mut best = vec![(f64::NEG_INFINITY, 0usize); states.len()];
    let mut base = 0usize;
    let mut gathered = Vec::new();
    let mut work_a = Vec::new();
    let mut work_b = Vec::new();
    for_each_affine_class(n, |class| {
        let k = class.basis.len();
        let pairs = upper_pairs(k);
        let points: Vec<usize> = (0..1u64 << k)
            .map(|u| {
                let mut x = class.offset;
                for (j, b) in class.basis.iter().enumerate() {
                    if u >> j & 1 == 1 {
                        x ^= b;
                    }
                }
                x as usize
            })
            .collect();
        // Pair mask of each u: bit t set iff both coordinates of pairs[t] are 1.
        let pair_masks: Vec<u64> = (0..1u64 << k)
            .map(|u| {
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(_, &(i, j))| u >> i & 1 == 1 && u >> j & 1 == 1)
                    .fold(0u64, |m, (t, _)| m | 1 << t)
            })
            .collect();
        let norm2 = 0.5f64.powi(k as i32);
        let block = 1usize << (2 * k);
        for (slot, psi) in best.iter_mut().zip(states) {
            gathered.clear();
            gathered.extend(points.iter().map(|&x| psi[x]));
            for q in 0..1u64 << pairs.len() {
                work_a.clear();
                work_a.extend(
                    gathered
                        .iter()
                        .zip(&pair_masks)
                        .map(|(&a, &pm)| if (pm & q).count_ones() % 2 == 1 { -a } else { a }),
                );
                z4_transform(k, &mut work_a, &mut work_b);
                let start = base + q as usize * block;
                for (l, h) in work_a.iter().enumerate() {
                    let f = h.norm_sqr() * norm2;
                    if f > slot.0 {
                        *slot = (f, start + l);
                    }
                }
            }
        }
        base += block << pairs.len();
    });
    Ok(best)
}

/// In place: `a[l] <- sum_u i^{-l.u} a[u]`, `u in {0,1}^k` to `l in Z_4^k`
/// with `l_0` the least significant base-4 digit.
fn z4_transform(k: usize, a: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>) {
    const CONJ_I_POW: [Complex64; 4] = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    for j in 0..k {
        let low = 1usize << (2 * j);
        let high = 1usize << (k - j - 1);
        scratch.clear();
        scratch.resize(low * 4 * high, Complex64::new(0.0, 0.0));
        for h in 0..high {
            for lo in 0..low {
                let v0 = a[lo + low * (2 * h)];
                let v1 = a[lo + low * (2 * h + 1)];
                for (d, w) in CONJ_I_POW.iter().enumerate() {
                    scratch[lo + low * d + 4 * low * h] = v0 + w * v1;
                }
            }
        }
        std::mem::swap(a, scratch);
    }
}

/// Index sets of a dictionary that form disjoint orthonormal bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerBasisPartition {
    pub groups: Vec<Vec<usize>>,
}

impl StabilizerBasisPartition {
    /// Group id of every word.
    pub fn labels(&self, len: usize) -> Vec<usize> {
        let mut labels = vec![usize::MAX; len];
        for (g, members) in self.groups.iter().enumerate() {
            for &i in members {
                labels[i] = g;
            }
        }
        labels
    }
}

/// Partitions `STAB_n` into the orthonormal bases of states sharing a
/// stabilizer group up to signs. Each class is the orbit of its first word
/// under the `4^n` Pauli operators `X^x Z^z`, so the partition is canonical
/// and deterministic (groups ordered by their smallest index).
pub fn group_into_bases(d: &Dictionary) -> Result<StabilizerBasisPartition> {
    let dim = d.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::Structure(format!("dimension {dim} is not 2^n with n >= 1")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > 20 {
        return Err(Error::Capacity(format!("{n} qubits")));
    }
    let mut assigned = vec![false; d.len()];
    let mut groups = Vec::new();
    for start in 0..d.len() {
        if assigned[start] {
            continue;
        }
        let mut members = Vec::with_capacity(dim);
        for x in 0..dim as u64 {
            for z in 0..dim as u64 {
                let p = PauliOperator::new(n, x, z, 0)?;
                let image = p.apply(d.word(start))?;
                let idx = d.find(&image).ok_or_else(|| {
                    Error::Structure(format!("Pauli image of word {start} is not in the dictionary"))
                })?;
                if !members.contains(&idx) {
                    members.push(idx);
                }
            }
        }
        members.sort_unstable();
        if members.len() != dim {
            return Err(Error::Structure(format!(
                "word {start} has a Pauli orbit of {} rays, expected {dim}",
                members.len()
            )));
        }
        for &i in &members {
            if assigned[i] {
                return Err(Error::Structure(format!("word {i} lies in two Pauli orbits")));
            }
            assigned[i] = true;
        }
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if vector::inner(d.word(i), d.word(j)).norm() > 1e-10 {
                    return Err(Error::Structure(format!("words {i} and {j} are not orthogonal")));
                }
            }
        }
        groups.push(members);
    }
    Ok(StabilizerBasisPartition { groups })
}

/// The six single-qubit stabilizer states in the order `e_0, e_1, |+>, |->, |+i>, |-i>`.
pub fn single_qubit_stabilizers() -> Vec<Vec<Complex64>> {
    let h = FRAC_1_SQRT_2;
    let c = Complex64::new;
    vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(h, 0.0), c(h, 0.0)],
        vec![c(h, 0.0), c(-h, 0.0)],
        vec![c(h, 0.0), c(0.0, h)],
        vec![c(h, 0.0), c(0.0, -h)],
    ]
}
