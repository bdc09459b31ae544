//! Periodic points of the induced map and of the original map.
//!
//! Fixed points of composed inverse branches `phi_beta` enumerate the
//! `G^m`-periodic points; fixed points of binary `psi`-words enumerate the
//! `T^n`-periodic points. Both are strict contractions (away from the
//! all-parabolic word), so contraction iteration plus one Newton polish
//! step nails them to near machine precision.

use crate::error::{Error, Result};
use crate::induced::word_apply;
use crate::maps::{BranchId, MapSpec};
use crate::potential::PotentialSpec;

/// A multi-index `beta ∈ N^m` addressing the composed branch `phi_beta`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() || entries.contains(&0) {
            return Err(Error::Domain("word entries must be positive".into()));
        }
        Ok(Word(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// Word length `m`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|beta| = beta_1 + ... + beta_m`, the z-exponent of the word.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Stream all words in `N^m` with `|beta| = total`, lexicographically.
///
/// Words are never materialized as a full list; the iterator walks the
/// compositions of `total` into `m` positive parts in place.
pub struct CompositionIter {
    m: usize,
    total: usize,
    state: Option<Vec<usize>>,
}

impl CompositionIter {
    pub fn new(m: usize, total: usize) -> Self {
        let state = if m >= 1 && total >= m {
            let mut first = vec![1usize; m];
            first[m - 1] = total - (m - 1);
            Some(first)
        } else {
            None
        };
        CompositionIter { m, total, state }
    }
}

impl Iterator for CompositionIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let state = self.state.as_mut()?;
        let out = state.clone();
        let m = self.m;
        if m == 1 {
            self.state = None;
            return Some(out);
        }
        // advance: rightmost i < m-1 whose increment still leaves the last
        // entry positive after resetting everything between them to 1
        let mut prefix: usize = state[..m - 1].iter().sum();
        let mut advanced = false;
        for i in (0..m - 1).rev() {
            // prefix holds sum of state[..=i] here
            let tail_min = m - 2 - i; // ones in positions i+1 .. m-2
            if self.total > prefix + 1 + tail_min {
                state[i] += 1;
                for v in state[i + 1..m - 1].iter_mut() {
                    *v = 1;
                }
                state[m - 1] = self.total - (prefix + 1) - tail_min;
                advanced = true;
                break;
            }
            prefix -= state[i];
        }
        if !advanced {
            self.state = None;
        }
        Some(out)
    }
}

/// Stream every word in `N^m` with `|beta| <= max_total`, grouped by
/// nondecreasing total.
pub fn words_up_to(m: usize, max_total: usize) -> impl Iterator<Item = Word> {
    (m..=max_total).flat_map(move |t| CompositionIter::new(m, t).map(Word))
}

/// A `G^m`-periodic point addressed by its word.
#[derive(Debug, Clone)]
pub struct PeriodicRecord {
    pub word: Word,
    /// Fixed point of `phi_beta`.
    pub x_fix: f64,
    /// `phi_beta'(x_fix)`, signed; `1/(G^m)'(x_fix)`.
    pub deriv_phi: f64,
    /// `log W_beta(x_fix)`.
    pub log_weight: f64,
    /// `|beta|`, the exponent of `z` carried by this orbit.
    pub z_exponent: usize,
}

/// Lean fixed-point solve for a word given by its entries.
///
/// Returns `(x_fix, phi_beta'(x_fix), log W_beta(x_fix))`.
pub fn fixed_point_data(
    map: &MapSpec,
    pot: &PotentialSpec,
    entries: &[usize],
    tol: f64,
) -> Result<(f64, f64, f64)> {
    let mut x = 0.5;
    for iter in 0..120 {
        let (v, d, lw) = word_apply(map, Some(pot), entries, x)?;
        let gap = v - x;
        if gap.abs() <= tol {
            // one Newton polish step unless already at roundoff
            if gap.abs() > 1e-15 {
                let newton = x - gap / (d - 1.0);
                if newton > 0.0 && newton < 1.0 {
                    let (_, d2, lw2) = word_apply(map, Some(pot), entries, newton)?;
                    return Ok((newton, d2, lw2));
                }
            }
            return Ok((v, d, lw));
        }
        // Newton accelerates once the contraction has localized the root
        let newton = x - gap / (d - 1.0);
        x = if iter >= 2 && newton > 0.0 && newton < 1.0 {
            newton
        } else {
            v
        };
    }
    Err(Error::NoConvergence {
        context: format!("fixed point of word {:?}", entries),
        lo: 0.0,
        hi: 1.0,
    })
}

/// Locate the unique fixed point of `phi_beta` and populate its record.
///
/// Contraction iteration from the interval midpoint, then Newton polish
/// using the chain-rule derivative; if a Newton step escapes `(0,1)` the
/// iteration falls back to pure contraction.
pub fn fixed_point(
    map: &MapSpec,
    pot: &PotentialSpec,
    word: &Word,
    tol: f64,
) -> Result<PeriodicRecord> {
    let (x_fix, deriv_phi, log_weight) = fixed_point_data(map, pot, word.entries(), tol)?;
    Ok(PeriodicRecord {
        word: word.clone(),
        x_fix,
        deriv_phi,
        log_weight,
        z_exponent: word.total(),
    })
}

/// A `T^n`-periodic point with its binary itinerary.
#[derive(Debug, Clone)]
pub struct TPeriodicRecord {
    /// Itinerary bits; `bits[j]` is the branch of `T^j(x)`.
    pub bits: Vec<u8>,
    pub x_fix: f64,
    /// `sum_{j<n} v(T^j(x))`, assembled from per-point solves.
    pub weight: f64,
}

/// All `2^n` periodic points of `T^n`, one per binary itinerary.
///
/// Each point is the fixed point of `psi_{w_1} ∘ ... ∘ psi_{w_n}`. Orbit
/// points entering the weight are looked up from the records of the
/// rotated itineraries rather than produced by forward iteration.
pub fn t_periodic_points(map: &MapSpec, pot: &PotentialSpec, n: usize) -> Result<Vec<TPeriodicRecord>> {
    if n == 0 {
        return Err(Error::Domain("period must be at least 1".into()));
    }
    if n > 20 {
        return Err(Error::Domain(format!(
            "period {n} rejected: 2^n periodic points would not be desk-scale"
        )));
    }
    let count = 1usize << n;
    let mut points = vec![0.0f64; count];
    for (code, point) in points.iter_mut().enumerate() {
        if code == 0 {
            *point = 0.0; // all-parabolic word: the indifferent fixed point
            continue;
        }
        *point = binary_fixed_point(map, code, n)?;
    }
    let mut out = Vec::with_capacity(count);
    for code in 0..count {
        let bits: Vec<u8> = (0..n).map(|j| ((code >> (n - 1 - j)) & 1) as u8).collect();
        let weight = if code == 0 {
            // isolated parabolic orbit: exact limit value n * v(0)
            n as f64 * pot.v_at_zero()
        } else {
            let mut acc = 0.0;
            for (j, &bit) in bits.iter().enumerate() {
                // T^j(x) is the fixed point of the j-fold rotated itinerary
                let rotated = rotate_code(code, j, n);
                let branch = if bit == 0 {
                    BranchId::Parabolic
                } else {
                    BranchId::Expanding
                };
                acc += pot.value(map, branch, points[rotated])?;
            }
            acc
        };
        out.push(TPeriodicRecord {
            bits,
            x_fix: points[code],
            weight,
        });
    }
    Ok(out)
}

fn rotate_code(code: usize, by: usize, n: usize) -> usize {
    if by == 0 {
        return code;
    }
    let mask = (1usize << n) - 1;
    ((code << by) | (code >> (n - by))) & mask
}

fn binary_fixed_point(map: &MapSpec, code: usize, n: usize) -> Result<f64> {
    let apply = |x: f64| -> Result<(f64, f64)> {
        let mut p = x;
        let mut d = 1.0;
        for j in (0..n).rev() {
            let branch = if (code >> (n - 1 - j)) & 1 == 0 {
                BranchId::Parabolic
            } else {
                BranchId::Expanding
            };
            p = map.inverse_branch(branch, p, crate::induced::WALK_TOL)?;
            let (_, dt) = map.branch_value_deriv(branch, p)?;
            d /= dt;
        }
        Ok((p, d))
    };
    let mut x = 0.5;
    for iter in 0..200 {
        let (v, d) = apply(x)?;
        let gap = v - x;
        if gap.abs() <= 1e-13 {
            if gap.abs() > 1e-15 {
                let newton = x - gap / (d - 1.0);
                if newton > 0.0 && newton < 1.0 {
                    return Ok(newton);
                }
            }
            return Ok(v);
        }
        let newton = x - gap / (d - 1.0);
        x = if iter >= 1 && newton > 0.0 && newton < 1.0 {
            newton
        } else {
            v
        };
    }
    Err(Error::NoConvergence {
        context: format!("binary word {code:b} of period {n}"),
        lo: 0.0,
        hi: 1.0,
    })
}
