//! Binary linear block codes with a cached BPSK codebook.
//!
//! Message `m` (zero-based, `0..2^k`) has information bits `u_j = (m >> (k-1-j)) & 1`,
//! so row 0 of the generator is driven by the most significant bit. Message 0 is
//! the all-zero word. Column 0 of the generator is the first channel use.

use std::path::Path;

use crate::channel::modulate;
use crate::error::{Error, Result};

/// Largest supported dimension; the cached codebook has `2^k · n_c` entries.
pub const MAX_K: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n_c: usize,
    k: usize,
    generator: Vec<Vec<u8>>,
    bits: Vec<u8>,
    symbols: Vec<f64>,
}

impl Codebook {
    pub fn from_generator(rows: Vec<Vec<u8>>, n_c: usize) -> Result<Self> {
        let k = rows.len();
        if k > MAX_K {
            return Err(Error::CodeTooLarge { k, max: MAX_K });
        }
        if n_c == 0 {
            return Err(Error::Parse {
                line: 0,
                msg: "codeword length must be positive".into(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_c {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("row has {} columns, expected {n_c}", row.len()),
                });
            }
            if row.iter().any(|&b| b > 1) {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "entries must be 0 or 1".into(),
                });
            }
        }
        let rank = gf2_rank(&rows);
        if rank < k {
            return Err(Error::RankDeficient { rank, k });
        }

        let m_total = 1usize << k;
        let mut bits = vec![0u8; m_total * n_c];
        for m in 1..m_total {
            let low = m.trailing_zeros() as usize;
            let row = &rows[k - 1 - low];
            let prev = m & (m - 1);
            for j in 0..n_c {
                bits[m * n_c + j] = bits[prev * n_c + j] ^ row[j];
            }
        }
        let symbols = modulate(&bits);
        Ok(Codebook {
            n_c,
            k,
            generator: rows,
            bits,
            symbols,
        })
    }

    /// Parses the plain-text generator format: an optional `n_c k` header,
    /// then `k` rows of `0`/`1` characters. Whitespace inside rows is ignored
    /// and lines starting with `#` are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if lines.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no generator rows".into(),
            });
        }

        let header = parse_header(lines[0].1);
        let rows_from = |body: &[(usize, &str)]| -> Result<Vec<Vec<u8>>> {
            body.iter()
                .map(|&(line, l)| {
                    l.chars()
                        .filter(|c| !c.is_whitespace())
                        .map(|c| match c {
                            '0' => Ok(0u8),
                            '1' => Ok(1u8),
                            other => Err(Error::Parse {
                                line,
                                msg: format!("unexpected character {other:?}"),
                            }),
                        })
                        .collect()
                })
                .collect()
        };

        if let Some((n_c, k)) = header {
            // "10 1" could be a header or a row; take the header reading only
            // when the body agrees with it.
            if let Ok(rows) = rows_from(&lines[1..]) {
                if rows.len() == k && rows.iter().all(|r| r.len() == n_c) {
                    return Self::from_generator(rows, n_c);
                }
            }
            if lines[0].1.chars().any(|c| !matches!(c, '0' | '1') && !c.is_whitespace()) {
                return Err(Error::Parse {
                    line: lines[0].0,
                    msg: format!("header declares {n_c}x{k} but the body does not match"),
                });
            }
        }

        let rows = rows_from(&lines)?;
        let n_c = rows[0].len();
        Self::from_generator(rows, n_c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("{}: {e}", path.as_ref().display()),
        })?;
        Self::parse(&text)
    }

    /// `(n, 1)` repetition code.
    pub fn repetition(n: usize) -> Result<Self> {
        Self::from_generator(vec![vec![1; n]], n)
    }

    /// Systematic Hamming (7, 4) code.
    pub fn hamming_7_4() -> Self {
        let g = [
            "1000110", //
            "0100101", //
            "0010011", //
            "0001111",
        ];
        let rows = g
            .iter()
            .map(|r| r.bytes().map(|b| b - b'0').collect())
            .collect();
        Self::from_generator(rows, 7).expect("hamming generator is full rank")
    }

    /// First-order Reed–Muller code RM(1, m): length `2^m`, dimension `m + 1`.
    pub fn reed_muller_1(m: usize) -> Result<Self> {
        let n = 1usize << m;
        let mut rows = vec![vec![1u8; n]];
        for i in 0..m {
            rows.push((0..n).map(|j| ((j >> (m - 1 - i)) & 1) as u8).collect());
        }
        Self::from_generator(rows, n)
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of messages `M = 2^k`.
    pub fn size(&self) -> usize {
        1 << self.k
    }


    pub fn generator(&self) -> &[Vec<u8>] {
        &self.generator
    }

    fn check_index(&self, m: usize) -> Result<()> {
        if m >= self.size() {
            return Err(Error::MessageOutOfRange {
                index: m,
                size: self.size(),
            });
        }
        Ok(())
    }

    /// BPSK codeword of message `m`.
    pub fn encode(&self, m: usize) -> Result<&[f64]> {
        self.check_index(m)?;
        Ok(self.codeword(m))
    }

    /// Binary codeword of message `m`.
    pub fn bits(&self, m: usize) -> Result<&[u8]> {
        self.check_index(m)?;
        Ok(&self.bits[m * self.n_c..(m + 1) * self.n_c])
    }

    #[inline]
    pub(crate) fn codeword(&self, m: usize) -> &[f64] {
        &self.symbols[m * self.n_c..(m + 1) * self.n_c]
    }

    pub fn codewords(&self) -> impl Iterator<Item = &[f64]> {
        self.symbols.chunks_exact(self.n_c)
    }

    fn check_len(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n_c {
            return Err(Error::LengthMismatch {
                expected: self.n_c,
                got: y.len(),
            });
        }
        Ok(())
    }

    /// `x_m^T y` for every message, written into `out` (length `M`).
    pub fn correlations_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(y)?;
        if out.len() != self.size() {
            return Err(Error::LengthMismatch {
                expected: self.size(),
                got: out.len(),
            });
        }
        for (o, cw) in out.iter_mut().zip(self.codewords()) {
            *o = dot(cw, y);
        }
        Ok(())
    }

    /// Maximum-likelihood decoding by exhaustive correlation.
    ///
    /// Returns the maximizing message and the attained correlation; ties go to
    /// the smallest index.
    pub fn ml_decode(&self, y: &[f64]) -> Result<(usize, f64)> {
        self.check_len(y)?;
        Ok(self.argmax_correlation(y))
    }

    pub(crate) fn argmax_correlation(&self, y: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (m, cw) in self.codewords().enumerate() {
            let c = dot(cw, y);
            if c > best.1 {
                best = (m, c);
            }
        }
        best
    }

    /// Minimum Hamming weight over nonzero codewords; `None` when `k = 0`.
    pub fn min_distance(&self) -> Option<usize> {
        (1..self.size())
            .map(|m| self.bits[m * self.n_c..(m + 1) * self.n_c].iter().filter(|&&b| b == 1).count())
            .min()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * i + l] * b[4 * i + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}

fn gf2_rank(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][c] == 1) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in 0..m.len() {
            if r != rank && m[r][c] == 1 {
                for j in c..cols {
                    m[r][j] ^= m[rank][j];
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianSource;
    use proptest::prelude::*;

    fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
        a.iter().zip(b).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn repetition_from_text() {
        let cb = Codebook::parse("111").unwrap();
        assert_eq!(cb.size(), 2);
        assert_eq!(cb.encode(0).unwrap(), &[1.0, 1.0, 1.0]);
        assert_eq!(cb.encode(1).unwrap(), &[-1.0, -1.0, -1.0]);
        assert_eq!(cb.min_distance(), Some(3));
    }

    #[test]
    fn header_and_whitespace() {
        let text = "# toy\n4 2\n1 1 0 0\n0 0 1 1\n";
        let cb = Codebook::parse(text).unwrap();
        assert_eq!((cb.n_c(), cb.k()), (4, 2));
        assert_eq!(cb.bits(1).unwrap(), &[0, 0, 1, 1]);
        assert_eq!(cb.bits(2).unwrap(), &[1, 1, 0, 0]);
        // "10 1" reads as a row when the body does not fit the header reading.
        let row = Codebook::parse("10 1\n").unwrap();
        assert_eq!((row.n_c(), row.k()), (3, 1));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Codebook::parse("1102"), Err(Error::Parse { .. })));
        assert!(matches!(Codebook::parse(""), Err(Error::Parse { .. })));
        assert!(matches!(Codebook::parse("110\n11"), Err(Error::Parse { .. })));
        assert!(matches!(
            Codebook::parse("5 2\n11000\n"),
            Err(Error::Parse { .. })
        ));
        assert_eq!(
            Codebook::parse("101\n101"),
            Err(Error::RankDeficient { rank: 1, k: 2 })
        );
        let big = vec![vec![0u8; 30]; 25];
        assert_eq!(
            Codebook::from_generator(big, 30),
            Err(Error::CodeTooLarge { k: 25, max: MAX_K })
        );
    }

    #[test]
    fn hamming_exhaustive() {
        let cb = Codebook::hamming_7_4();
        assert_eq!(cb.size(), 16);
        // exhaustive weight enumeration: 1 + 7 z^3 + 7 z^4 + z^7
        let mut weights = [0usize; 8];
        for m in 0..16 {
            weights[cb.bits(m).unwrap().iter().filter(|&&b| b == 1).count()] += 1;
        }
        assert_eq!(weights, [1, 0, 0, 7, 7, 0, 0, 1]);
        assert_eq!(cb.min_distance(), Some(3));
    }

    #[test]
    fn reed_muller_parameters() {
        let cb = Codebook::reed_muller_1(4).unwrap();
        assert_eq!((cb.n_c(), cb.k()), (16, 5));
        assert_eq!(cb.min_distance(), Some(8));
    }

    #[test]
    fn encode_rules() {
        let cb = Codebook::hamming_7_4();
        assert!(cb.encode(0).unwrap().iter().all(|&s| s == 1.0));
        assert_eq!(
            cb.encode(16),
            Err(Error::MessageOutOfRange { index: 16, size: 16 })
        );
        let mut seen: Vec<Vec<u8>> = (0..16).map(|m| cb.bits(m).unwrap().to_vec()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn decode_noiseless_and_small_cases() {
        let cb = Codebook::hamming_7_4();
        for m in 0..16 {
            let (mh, stat) = cb.ml_decode(cb.encode(m).unwrap()).unwrap();
            assert_eq!((mh, stat), (m, 7.0));
        }
        let rep = Codebook::repetition(3).unwrap();
        let (mh, stat) = rep.ml_decode(&[0.9, -0.1, 0.2]).unwrap();
        assert_eq!(mh, 0);
        assert!((stat - 1.0).abs() < 1e-15);
        assert!(rep.ml_decode(&[0.0; 2]).is_err());
        // exact tie: both correlations are 0
        assert_eq!(rep.ml_decode(&[0.0; 3]).unwrap().0, 0);
    }

    #[test]
    fn decode_matches_distance_scan() {
        let cb = Codebook::hamming_7_4();
        let mut g = GaussianSource::from_seed(5);
        for _ in 0..10_000 {
            let m = g.index(16);
            let y: Vec<f64> = cb.encode(m).unwrap().iter().map(|s| s + g.standard_normal()).collect();
            let naive = (0..16)
                .map(|c| {
                    let d: f64 = cb.encode(c).unwrap().iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
                    (c, d)
                })
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
            assert_eq!(cb.ml_decode(&y).unwrap().0, naive.0);
        }
    }

    #[test]
    fn correlation_distance_identity() {
        for cb in [Codebook::hamming_7_4(), Codebook::reed_muller_1(3).unwrap()] {
            for a in 0..cb.size() {
                for b in 0..cb.size() {
                    let corr = dot(cb.encode(a).unwrap(), cb.encode(b).unwrap());
                    let d = hamming_distance(cb.bits(a).unwrap(), cb.bits(b).unwrap());
                    assert_eq!(corr, cb.n_c() as f64 - 2.0 * d as f64);
                }
            }
        }
    }

    #[test]
    fn decoding_error_falls_with_snr() {
        let cb = Codebook::hamming_7_4();
        let mut rates = Vec::new();
        for sigma in [1.2, 0.8, 0.5] {
            let mut g = GaussianSource::from_seed(11);
            let trials = 20_000;
            let errors = (0..trials)
                .filter(|_| {
                    let m = g.index(16);
                    let y: Vec<f64> = cb.encode(m).unwrap().iter().map(|s| s + sigma * g.standard_normal()).collect();
                    cb.ml_decode(&y).unwrap().0 != m
                })
                .count();
            rates.push(errors as f64 / trials as f64);
        }
        assert!(rates[0] > rates[1] && rates[1] > rates[2], "{rates:?}");
    }

    proptest! {
        #[test]
        fn extension_never_lowers_distance(seed in 0u64..500) {
            let mut g = GaussianSource::from_seed(seed);
            let (k, n) = (3usize, 7usize);
            let rows: Vec<Vec<u8>> = (0..k).map(|_| (0..n).map(|_| g.index(2) as u8).collect()).collect();
            if let Ok(cb) = Codebook::from_generator(rows.clone(), n) {
                let ext: Vec<Vec<u8>> = rows
                    .iter()
                    .map(|r| {
                        let mut r = r.clone();
                        r.push(r.iter().fold(0, |a, b| a ^ b));
                        r
                    })
                    .collect();
                let cbx = Codebook::from_generator(ext, n + 1).unwrap();
                prop_assert!(cbx.min_distance() >= cb.min_distance());
            }
        }
    }
}
