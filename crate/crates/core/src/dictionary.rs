//! Finite dictionaries of unit vectors in `C^d`.
//!
//! Words are stored one per ray: every vector is rotated so that its first
//! nonzero amplitude is real and positive, and two inputs that differ only by
//! a global phase collapse to one word. Extent and fidelity are both
//! phase-invariant in each word, so nothing is lost.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector;

/// Tolerance on `| <w,w> - 1 |` for accepted words.
pub const NORM_TOL: f64 = 1e-9;
/// Grid spacing used to quantize amplitudes for ray hashing.
pub const RAY_GRID: f64 = 1e-9;
/// Two canonical vectors within this sup-distance are the same ray.
pub const RAY_TOL: f64 = 1e-8;
/// Amplitudes below this modulus are skipped when choosing the phase anchor.
const PHASE_ANCHOR_EPS: f64 = 1e-10;

pub const FILE_VERSION: u64 = 1;

/// Largest vector length `maximally_entangled` will allocate.
pub const MAX_DIM: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub amplitudes: Vec<Complex64>,
    pub label: Option<String>,
}

impl Word {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// Rotate `v` so its first non-negligible amplitude is real positive.
pub fn canonical_phase(v: &[Complex64]) -> Vec<Complex64> {
    let mut out = v.to_vec();
    if let Some(k) = v.iter().position(|a| a.norm() > PHASE_ANCHOR_EPS) {
        let r = v[k].norm();
        let rot = v[k].conj() / r;
        for a in out.iter_mut() {
            *a *= rot;
        }
        out[k] = Complex64::new(r, 0.0);
    }
    out
}

fn ray_key(v: &[Complex64]) -> u64 {
    // FNV-1a over the quantized components.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for a in v {
        for x in [a.re, a.im] {
            let q = (x / RAY_GRID).round() as i64;
            for b in q.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    h
}

/// Hash index from ray to word position, for canonical vectors.
#[derive(Debug, Clone, Default)]
struct RayIndex {
    buckets: HashMap<u64, Vec<usize>>,
}

impl RayIndex {
    fn find(&self, words: &[Word], canonical: &[Complex64]) -> Option<usize> {
        self.buckets.get(&ray_key(canonical)).and_then(|ids| {
            ids.iter()
                .copied()
                .find(|&i| vector::max_abs_diff(&words[i].amplitudes, canonical) <= RAY_TOL)
        })
    }

    fn insert(&mut self, canonical: &[Complex64], index: usize) {
        self.buckets.entry(ray_key(canonical)).or_default().push(index);
    }
}

/// A finite, ray-deduplicated set of unit vectors in `C^dim`.
#[derive(Debug, Clone)]
pub struct Dictionary {
    dim: usize,
    words: Vec<Word>,
    index: RayIndex,
}

impl Dictionary {
    /// Builds a dictionary from unit vectors. Non-unit inputs are rejected,
    /// phases are canonicalized and repeated rays dropped (first one wins).
    pub fn new(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        Self::from_words(
            vectors
                .into_iter()
                .map(|amplitudes| Word { amplitudes, label: None })
                .collect(),
        )
    }

    pub fn from_words(words: Vec<Word>) -> Result<Self> {
        let first = words.first().ok_or(Error::Empty)?;
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::Validation("zero-dimensional word".into()));
        }
        let mut dict = Dictionary {
            dim,
            words: Vec::with_capacity(words.len()),
            index: RayIndex::default(),
        };
        for (i, w) in words.into_iter().enumerate() {
            if w.dim() != dim {
                return Err(Error::Dimension { expected: dim, found: w.dim() });
            }
            check_unit(&w.amplitudes, i)?;
            dict.push_canonical(Word {
                amplitudes: canonical_phase(&w.amplitudes),
                label: w.label,
            });
        }
        Ok(dict)
    }

    /// Pushes an already canonical word unless its ray is present.
    fn push_canonical(&mut self, word: Word) -> bool {
        if self.index.find(&self.words, &word.amplitudes).is_some() {
            return false;
        }
        self.index.insert(&word.amplitudes, self.words.len());
        self.words.push(word);
        true
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &[Complex64] {
        &self.words[i].amplitudes
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.words.iter().map(|w| w.amplitudes.as_slice())
    }

    /// Position of the ray of `v` (any phase), if present.
    pub fn find(&self, v: &[Complex64]) -> Option<usize> {
        if v.len() != self.dim {
            return None;
        }
        self.index.find(&self.words, &canonical_phase(v))
    }

    pub fn contains(&self, v: &[Complex64]) -> bool {
        self.find(v).is_some()
    }

    /// All pairwise products `s1 (x) s2`, first factor outermost.
    pub fn tensor(&self, other: &Dictionary) -> Dictionary {
        let mut out = Dictionary {
            dim: self.dim * other.dim,
            words: Vec::with_capacity(self.len() * other.len()),
            index: RayIndex::default(),
        };
        for a in &self.words {
            for b in &other.words {
                let label = match (&a.label, &b.label) {
                    (Some(x), Some(y)) => Some(format!("{x}⊗{y}")),
                    _ => None,
                };
                let amplitudes = canonical_phase(&vector::kron(&a.amplitudes, &b.amplitudes));
                out.push_canonical(Word { amplitudes, label });
            }
        }
        out
    }

    /// Entrywise complex conjugate of every word.
    pub fn conjugate(&self) -> Dictionary {
        let mut out = Dictionary {
            dim: self.dim,
            words: Vec::with_capacity(self.len()),
            index: RayIndex::default(),
        };
        for w in &self.words {
            out.push_canonical(Word {
                amplitudes: canonical_phase(&vector::conj(&w.amplitudes)),
                label: w.label.clone(),
            });
        }
        out
    }

    pub fn is_conjugation_closed(&self) -> bool {
        self.words
            .iter()
            .all(|w| self.contains(&vector::conj(&w.amplitudes)))
    }

    /// `D ∪ {w}`. A word whose ray is already present leaves the dictionary unchanged.
    pub fn add_word(&self, w: &[Complex64]) -> Result<Dictionary> {
        self.add_labeled_word(w, None)
    }

    pub fn add_labeled_word(&self, w: &[Complex64], label: Option<String>) -> Result<Dictionary> {
        if w.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: w.len() });
        }
        check_unit(w, self.len())?;
        let mut out = self.clone();
        out.push_canonical(Word { amplitudes: canonical_phase(w), label });
        Ok(out)
    }

    /// Largest `|<s, psi>|^2` over words with the lowest index on exact ties.
    pub fn max_overlap(&self, psi: &[Complex64]) -> Result<(f64, usize)> {
        if psi.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: psi.len() });
        }
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, s) in self.iter().enumerate() {
            let f = vector::inner(s, psi).norm_sqr();
            if f > best.0 {
                best = (f, i);
            }
        }
        Ok(best)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Dictionary> {
        let text = fs::read_to_string(path)?;
        Dictionary::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = DictionaryFile {
            version: FILE_VERSION,
            dim: self.dim,
            words: self
                .words
                .iter()
                .map(|w| WordRecord {
                    label: w.label.clone(),
                    amps: to_pairs(&w.amplitudes),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("dictionary serializes")
    }

    pub fn from_json(text: &str) -> Result<Dictionary> {
        let header: VersionProbe = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
        if header.version != FILE_VERSION {
            return Err(Error::Version { found: header.version, expected: FILE_VERSION });
        }
        let file: DictionaryFile = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
        let words: Vec<Word> = file
            .words
            .into_iter()
            .map(|w| Word { amplitudes: from_pairs(&w.amps), label: w.label })
            .collect();
        if let Some(w) = words.iter().find(|w| w.dim() != file.dim) {
            return Err(Error::Dimension { expected: file.dim, found: w.dim() });
        }
        Dictionary::from_words(words)
    }
}

fn check_unit(v: &[Complex64], index: usize) -> Result<()> {
    let norm = vector::norm(v);
    if !norm.is_finite() || (norm * norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Normalization { index, norm });
    }
    Ok(())
}

/// `d0^{-n/2} sum_k e_k (x) e_k` in `C^{d0^{2n}}`.
pub fn maximally_entangled(d0: usize, n: usize) -> Result<Vec<Complex64>> {
    if d0 < 2 || n < 1 {
        return Err(Error::Validation(format!("need d0 >= 2 and n >= 1, got d0={d0}, n={n}")));
    }
    let local = u32::try_from(n)
        .ok()
        .and_then(|n| d0.checked_pow(n))
        .filter(|&k| k <= MAX_DIM)
        .ok_or_else(|| Error::Capacity(format!("{d0}^{n} is too large")))?;
    let dim = local
        .checked_mul(local)
        .filter(|&k| k <= MAX_DIM)
        .ok_or_else(|| Error::Capacity(format!("{d0}^(2*{n}) exceeds {MAX_DIM}")))?;
    let amp = Complex64::new(1.0 / (local as f64).sqrt(), 0.0);
    let mut phi = vec![Complex64::new(0.0, 0.0); dim];
    for k in 0..local {
        phi[k * local + k] = amp;
    }
    Ok(phi)
}

#[derive(Serialize, Deserialize)]
struct DictionaryFile {
    version: u64,
    dim: usize,
    words: Vec<WordRecord>,
}

#[derive(Serialize, Deserialize)]
struct WordRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    amps: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u64,
}

/// State file: `{"amps": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub amps: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn new(v: &[Complex64]) -> Self {
        StateFile { amps: to_pairs(v) }
    }

    pub fn vector(&self) -> Vec<Complex64> {
        from_pairs(&self.amps)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Vec<Complex64>> {
        let text = fs::read_to_string(path)?;
        let file: StateFile = serde_json::from_str(&text).map_err(|e| parse_error(&text, &e))?;
        if file.amps.is_empty() {
            return Err(Error::Validation("state has no amplitudes".into()));
        }
        let v = file.vector();
        if v.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Validation("state has non-finite amplitudes".into()));
        }
        Ok(v)
    }

    pub fn save(v: &[Complex64], path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string(&StateFile::new(v)).expect("state serializes"))?;
        Ok(())
    }
}

pub fn to_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|a| [a.re, a.im]).collect()
}

pub fn from_pairs(p: &[[f64; 2]]) -> Vec<Complex64> {
    p.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
}

/// Converts serde_json's line/column into a byte offset into `text`.
fn parse_error(text: &str, e: &serde_json::Error) -> Error {
    let line = e.line().max(1);
    let offset: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum::<usize>()
        + e.column().saturating_sub(1);
    Error::Parse { offset: offset.min(text.len()), message: e.to_string() }
}
