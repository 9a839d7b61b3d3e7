//! Binary-input AWGN slot model.
//!
//! A slot carries either nothing (`x = 0`) or a BPSK sequence `x ∈ {±1}^n`;
//! the receiver observes `y = x + z` with `z` i.i.d. `N(0, σ²)`. The symbol
//! energy is 1, so `Es/N0 = 1 / (2σ²)`.

use crate::error::{Error, Result};
use crate::rng::GaussianSource;

/// Noise variance per dimension for a given `Es/N0` in dB.
pub fn snr_to_sigma2(es_n0_db: f64) -> f64 {
    1.0 / (2.0 * 10f64.powf(es_n0_db / 10.0))
}

pub fn sigma2_to_snr_db(sigma2: f64) -> f64 {
    10.0 * (1.0 / (2.0 * sigma2)).log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    es_n0_db: f64,
    sigma2: f64,
    n: usize,
}

impl ChannelParams {
    pub fn from_snr_db(es_n0_db: f64, n: usize) -> Result<Self> {
        if !es_n0_db.is_finite() {
            return Err(Error::Domain {
                what: "Es/N0 (dB)",
                value: es_n0_db,
            });
        }
        Self::check_n(n)?;
        Ok(ChannelParams {
            es_n0_db,
            sigma2: snr_to_sigma2(es_n0_db),
            n,
        })
    }

    /// `sigma2 = 0` is accepted and models a noiseless channel (`Es/N0 = +inf`).
    pub fn from_sigma2(sigma2: f64, n: usize) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::Domain {
                what: "noise variance",
                value: sigma2,
            });
        }
        Self::check_n(n)?;
        Ok(ChannelParams {
            es_n0_db: sigma2_to_snr_db(sigma2),
            sigma2,
            n,
        })
    }

    fn check_n(n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Domain {
                what: "slot length",
                value: 0.0,
            });
        }
        Ok(())
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::check_n(n)?;
        Ok(ChannelParams { n, ..self.clone() })
    }

    pub fn es_n0_db(&self) -> f64 {
        self.es_n0_db
    }

    pub fn es_n0_linear(&self) -> f64 {
        1.0 / (2.0 * self.sigma2)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// BPSK map: bit 0 → +1, bit 1 → −1.
pub fn modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b & 1 == 0 { 1.0 } else { -1.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotState {
    Idle,
    /// Zero-based message index.
    Active(usize),
}

#[derive(Debug, Clone, Copy)]
pub enum Transmission<'a> {
    Idle,
    Active { message: usize, symbols: &'a [f64] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub state: SlotState,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Adds `N(0, σ²)` noise in place.
pub fn add_noise(y: &mut [f64], sigma: f64, source: &mut GaussianSource) {
    if sigma == 0.0 {
        return;
    }
    for v in y.iter_mut() {
        *v += sigma * source.standard_normal();
    }
}

/// Synthesizes one slot. Deterministic in `(params, tx, seed)`.
pub fn emit_slot(params: &ChannelParams, tx: Transmission<'_>, seed: u64) -> Result<Slot> {
    let n = params.n();
    let (state, x) = match tx {
        Transmission::Idle => (SlotState::Idle, vec![0.0; n]),
        Transmission::Active { message, symbols } => {
            if symbols.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: symbols.len(),
                });
            }
            if let Some(&bad) = symbols.iter().find(|s| s.abs() != 1.0) {
                return Err(Error::Domain {
                    what: "BPSK symbol",
                    value: bad,
                });
            }
            (SlotState::Active(message), symbols.to_vec())
        }
    };
    let mut y = x.clone();
    add_noise(&mut y, params.sigma(), &mut GaussianSource::from_seed(seed));
    Ok(Slot { state, x, y })
}

/// Split of a slot into a known preamble followed by a codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePlan {
    preamble: Vec<f64>,
    n_c: usize,
}

impl FramePlan {
    /// All-ones preamble of length `n_p`.
    pub fn new(n_p: usize, n_c: usize) -> Self {
        FramePlan {
            preamble: vec![1.0; n_p],
            n_c,
        }
    }

    pub fn with_preamble(preamble: Vec<f64>, n_c: usize) -> Result<Self> {
        if let Some(&bad) = preamble.iter().find(|s| s.abs() != 1.0) {
            return Err(Error::Domain {
                what: "preamble symbol",
                value: bad,
            });
        }
        Ok(FramePlan { preamble, n_c })
    }

    pub fn n_p(&self) -> usize {
        self.preamble.len()
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn n(&self) -> usize {
        self.n_p() + self.n_c
    }

    pub fn preamble(&self) -> &[f64] {
        &self.preamble
    }

    /// `(y_p, y_c)`.
    pub fn split<'a>(&self, y: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        if y.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: y.len(),
            });
        }
        Ok(y.split_at(self.n_p()))
    }

    /// Writes `(preamble | codeword)` into `out`.
    pub fn frame_into(&self, codeword: &[f64], out: &mut [f64]) -> Result<()> {
        if codeword.len() != self.n_c {
            return Err(Error::LengthMismatch {
                expected: self.n_c,
                got: codeword.len(),
            });
        }
        if out.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: out.len(),
            });
        }
        let (p, c) = out.split_at_mut(self.n_p());
        p.copy_from_slice(&self.preamble);
        c.copy_from_slice(codeword);
        Ok(())
    }

    pub fn frame(&self, codeword: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n()];
        self.frame_into(codeword, &mut out)?;
        Ok(out)
    }
}
