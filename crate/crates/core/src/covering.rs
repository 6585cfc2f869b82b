//! Constructions of tau-hitting sets: finite collections of unit vectors
//! whose spherical caps at level tau cover the whole unit sphere.
//!
//! The menu ranges from elementary sets (singleton, antipodal pair, regular
//! simplex, signed basis) through spherical-coordinate grids, the ternary
//! set `{-1,0,1}^n`, and a tuned level-set family with parameters
//! `(alpha, beta)`, up to compositions via Kronecker blocks and appending
//! that reach `tau ~ 0.3 sqrt(ln n / n)` with polynomially many caps.
//! Coverage quality can be certified on a fine grid or estimated by
//! multi-start minimization of the discrepancy `min_x max_i v_i^T x`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Default cap on materialized vectors per construction.
pub const MATERIALIZE_BUDGET: u128 = 10_000_000;
/// Default cap on grid points scanned by coverage verification (streamed,
/// never materialized).
pub const VERIFY_BUDGET: u128 = 100_000_000;

const DEDUP_DECIMALS: f64 = 1e12;

/// How a hitting set was built; enough to re-derive its claimed tau.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Grid { m: usize },
    Random { count: usize, seed: u64 },
    H2,
    H3 { alpha: f64, beta: f64 },
    H4,
    H5 { alpha: f64, beta: f64 },
    Simplex,
    PmBasis,
    Antipodal,
    Singleton,
    Kron { child: Box<Provenance>, child_tau: f64, n2: usize },
    Append { left: Box<Provenance>, left_tau: f64, right: Box<Provenance>, right_tau: f64 },
}

/// The split used by the composed constructions: `n1 = ceil(ln n)`,
/// `n2 = floor(n / n1)`, `n3 = n - n1 * n2`.
pub fn log_split(n: usize) -> (usize, usize, usize) {
    let n1 = ((n as f64).ln().ceil() as usize).max(1);
    let n2 = n / n1;
    let n3 = n - n1 * n2;
    (n1, n2, n3)
}

fn h2_tau(n: usize) -> f64 {
    2.0 / ((n as f64).ln() + 5.0).sqrt()
}

fn h3_tau(alpha: f64, beta: f64) -> f64 {
    (alpha - 1.0) / (alpha * beta * (alpha + 1.0)).sqrt()
}

fn kron_tau(child_tau: f64, n2: usize) -> f64 {
    child_tau / (n2 as f64).sqrt()
}

fn append_tau(t1: f64, t2: f64) -> f64 {
    t1 * t2 / (t1 * t1 + t2 * t2).sqrt()
}

impl Provenance {
    /// Recomputes the claimed tau from the recorded parameters for a set of
    /// dimension `n`.
    pub fn formula_tau(&self, n: usize) -> f64 {
        match self {
            Provenance::Grid { m } => {
                // A tau below -1 is vacuous; clamp so the claim stays a
                // valid cap level for very coarse grids.
                (1.0 - PI * PI * (n as f64 - 1.0) / (8.0 * (*m as f64) * (*m as f64))).max(-1.0)
            }
            Provenance::Random { .. } => f64::NAN,
            Provenance::H2 => h2_tau(n),
            Provenance::H3 { alpha, beta } => h3_tau(*alpha, *beta),
            Provenance::H4 => {
                let (n1, n2, n3) = log_split(n);
                let kron = kron_tau(h2_tau(n1), n2);
                match n3 {
                    0 => kron,
                    1 => append_tau(kron, 1.0),
                    _ => append_tau(kron, h2_tau(n3)),
                }
            }
            Provenance::H5 { alpha, beta } => {
                let (_, n2, _) = log_split(n);
                h3_tau(*alpha, *beta) / (n2 as f64 + 1.0).sqrt()
            }
            Provenance::Simplex => 1.0 / n as f64,
            Provenance::PmBasis => 1.0 / (n as f64).sqrt(),
            Provenance::Antipodal => 0.0,
            Provenance::Singleton => -1.0,
            Provenance::Kron { child_tau, n2, .. } => kron_tau(*child_tau, *n2),
            Provenance::Append { left_tau, right_tau, .. } => append_tau(*left_tau, *right_tau),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Grid { m } => write!(f, "grid(m={m})"),
            Provenance::Random { count, seed } => write!(f, "random(count={count},seed={seed})"),
            Provenance::H2 => write!(f, "h2"),
            Provenance::H3 { alpha, beta } => write!(f, "h3(alpha={alpha:.17e},beta={beta:.17e})"),
            Provenance::H4 => write!(f, "h4"),
            Provenance::H5 { alpha, beta } => write!(f, "h5(alpha={alpha:.17e},beta={beta:.17e})"),
            Provenance::Simplex => write!(f, "simplex"),
            Provenance::PmBasis => write!(f, "pm_basis"),
            Provenance::Antipodal => write!(f, "antipodal"),
            Provenance::Singleton => write!(f, "singleton"),
            Provenance::Kron { child, child_tau, n2 } => {
                write!(f, "kron(n2={n2},tau={child_tau:.17e},child={child})")
            }
            Provenance::Append { left, left_tau, right, right_tau } => write!(
                f,
                "append(ltau={left_tau:.17e},rtau={right_tau:.17e},left={left},right={right})"
            ),
        }
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_kv<'a>(part: &'a str, key: &str) -> Result<&'a str> {
    let prefix = format!("{key}=");
    part.strip_prefix(&prefix)
        .ok_or_else(|| Error::Parse(format!("expected `{key}=...` in provenance, got {part:?}")))
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "h2" => return Ok(Provenance::H2),
            "h4" => return Ok(Provenance::H4),
            "simplex" => return Ok(Provenance::Simplex),
            "pm_basis" => return Ok(Provenance::PmBasis),
            "antipodal" => return Ok(Provenance::Antipodal),
            "singleton" => return Ok(Provenance::Singleton),
            _ => {}
        }
        let open = s
            .find('(')
            .ok_or_else(|| Error::Parse(format!("unknown provenance {s:?}")))?;
        if !s.ends_with(')') {
            return Err(Error::Parse(format!("unbalanced provenance {s:?}")));
        }
        let name = &s[..open];
        let body = &s[open + 1..s.len() - 1];
        let parts = split_top_level(body);
        let f64_of = |t: &str| -> Result<f64> {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad float {t:?} in provenance")))
        };
        let usize_of = |t: &str| -> Result<usize> {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad integer {t:?} in provenance")))
        };
        match name {
            "grid" => Ok(Provenance::Grid {
                m: usize_of(parse_kv(parts[0], "m")?)?,
            }),
            "random" => Ok(Provenance::Random {
                count: usize_of(parse_kv(parts[0], "count")?)?,
                seed: parse_kv(parts[1], "seed")?
                    .parse()
                    .map_err(|_| Error::Parse("bad seed".into()))?,
            }),
            "h3" => Ok(Provenance::H3 {
                alpha: f64_of(parse_kv(parts[0], "alpha")?)?,
                beta: f64_of(parse_kv(parts[1], "beta")?)?,
            }),
            "h5" => Ok(Provenance::H5 {
                alpha: f64_of(parse_kv(parts[0], "alpha")?)?,
                beta: f64_of(parse_kv(parts[1], "beta")?)?,
            }),
            "kron" => Ok(Provenance::Kron {
                n2: usize_of(parse_kv(parts[0], "n2")?)?,
                child_tau: f64_of(parse_kv(parts[1], "tau")?)?,
                child: Box::new(parse_kv(parts[2], "child")?.parse()?),
            }),
            "append" => Ok(Provenance::Append {
                left_tau: f64_of(parse_kv(parts[0], "ltau")?)?,
                right_tau: f64_of(parse_kv(parts[1], "rtau")?)?,
                left: Box::new(parse_kv(parts[2], "left")?.parse()?),
                right: Box::new(parse_kv(parts[3], "right")?.parse()?),
            }),
            _ => Err(Error::Parse(format!("unknown provenance {name:?}"))),
        }
    }
}

/// A finite list of unit vectors with its claimed covering level.
#[derive(Clone, Debug)]
pub struct HittingSet {
    n: usize,
    vectors: Vec<f64>, // m * n, row per vector
    claimed_tau: f64,
    provenance: Provenance,
    certified: bool,
}

impl HittingSet {
    fn finish(
        n: usize,
        raw: Vec<Vec<f64>>,
        provenance: Provenance,
        certified: bool,
    ) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput("hitting set has no vectors".into()));
        }
        let mut normalized: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
        for mut v in raw {
            debug_assert_eq!(v.len(), n);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm <= 1e-300 {
                return Err(Error::Numeric("zero vector in construction".into()));
            }
            for x in v.iter_mut() {
                *x /= norm;
            }
            normalized.push(v);
        }
        // Dedup on coordinates rounded to 12 decimals: sort, drop equal runs.
        let key = |v: &Vec<f64>| -> Vec<i64> {
            v.iter().map(|x| (x * DEDUP_DECIMALS).round() as i64).collect()
        };
        normalized.sort_by(|a, b| key(a).cmp(&key(b)));
        normalized.dedup_by(|a, b| key(a) == key(b));

        let claimed_tau = provenance.formula_tau(n);
        let mut vectors = Vec::with_capacity(normalized.len() * n);
        for v in normalized {
            vectors.extend_from_slice(&v);
        }
        Ok(Self {
            n,
            vectors,
            claimed_tau,
            provenance,
            certified,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vectors.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.n)
    }

    pub fn claimed_tau(&self) -> f64 {
        self.claimed_tau
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Largest inner product between `x` and a member of the set.
    pub fn max_inner(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let mut best = f64::NEG_INFINITY;
        for v in self.iter() {
            let dot: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
            if dot > best {
                best = dot;
            }
        }
        best
    }
}

/// Result of coverage verification or discrepancy estimation.
#[derive(Clone, Debug)]
pub struct CoverReport {
    /// Smallest max-inner-product found over the scanned subset of the
    /// sphere; upper-bounds the true covering level of the set.
    pub estimated_tau: f64,
    /// Point achieving `estimated_tau` (or the first failing grid point).
    pub witness: Vec<f64>,
    /// Present when grid certification succeeded: the certified (tau, grid m).
    pub certified_at: Option<(f64, usize)>,
    /// Number of sphere points evaluated.
    pub samples_used: usize,
}

// ---------------------------------------------------------------------------
// Grid construction
// ---------------------------------------------------------------------------

fn grid_count(n: usize, m: usize) -> Option<u128> {
    // Interior angles take m + 1 values (both endpoints of [0, pi]), the
    // last circular angle takes 2m.
    (m as u128 + 1)
        .checked_pow(n as u32 - 2)
        .and_then(|p| p.checked_mul(2 * m as u128))
}

/// Streams every spherical-coordinate grid point, stopping early when the
/// callback returns `false`. Interior angles `phi_1..phi_{n-2}` range over
/// `{k pi/m}` with `k <= m` — the endpoint pi must be included or points
/// near the negative first axis fall outside every half-spacing cell — and
/// the last (circular) angle ranges over `k < 2m`.
fn for_each_grid_point(n: usize, m: usize, mut f: impl FnMut(&[f64]) -> bool) {
    debug_assert!(n >= 2);
    let half: Vec<(f64, f64)> = (0..=m)
        .map(|k| {
            let a = PI * k as f64 / m as f64;
            (a.cos(), a.sin())
        })
        .collect();
    let full: Vec<(f64, f64)> = (0..2 * m)
        .map(|k| {
            let a = PI * k as f64 / m as f64;
            (a.cos(), a.sin())
        })
        .collect();
    let angles = n - 1;
    let mut digits = vec![0usize; angles];
    let mut x = vec![0.0f64; n];
    loop {
        let mut prefix = 1.0;
        for k in 0..angles {
            let (c, s) = if k + 1 < angles { half[digits[k]] } else { full[digits[k]] };
            x[k] = prefix * c;
            prefix *= s;
        }
        x[angles] = prefix;
        if !f(&x) {
            return;
        }
        // odometer
        let mut k = angles;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            digits[k] += 1;
            let limit = if k + 1 < angles { m + 1 } else { 2 * m };
            if digits[k] < limit {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// Spherical-coordinate grid on the unit sphere of `R^n` with claimed
/// `tau = 1 - pi^2 (n-1) / (8 m^2)` and at most `2 m^{n-1}` points.
pub fn build_grid(n: usize, m: usize) -> Result<HittingSet> {
    build_grid_with_budget(n, m, MATERIALIZE_BUDGET)
}

pub fn build_grid_with_budget(n: usize, m: usize, budget: u128) -> Result<HittingSet> {
    if n < 2 {
        return Err(Error::Parameter("grid needs n >= 2".into()));
    }
    if m < 1 {
        return Err(Error::Parameter("grid needs m >= 1".into()));
    }
    let count = grid_count(n, m).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::Budget {
            needed: count,
            cap: budget,
            hint: "reduce m or n".into(),
        });
    }
    let mut raw = Vec::with_capacity(count as usize);
    for_each_grid_point(n, m, |x| {
        raw.push(x.to_vec());
        true
    });
    HittingSet::finish(n, raw, Provenance::Grid { m }, true)
}

// ---------------------------------------------------------------------------
// Randomized construction
// ---------------------------------------------------------------------------

/// `count` i.i.d. uniform points on the sphere. Carries no tau claim
/// (claimed_tau is NaN) and is never certified.
pub fn build_random(n: usize, count: usize, seed: u64) -> Result<HittingSet> {
    if n < 2 {
        return Err(Error::Parameter("random set needs n >= 2".into()));
    }
    if count < 1 {
        return Err(Error::Parameter("count must be >= 1".into()));
    }
    let mut rng = Rng::new(seed);
    let raw: Vec<Vec<f64>> = (0..count).map(|_| rng.unit_vector(n)).collect();
    HittingSet::finish(n, raw, Provenance::Random { count, seed }, false)
}

// ---------------------------------------------------------------------------
// Ternary construction H2
// ---------------------------------------------------------------------------

/// Normalized nonzero vectors of `{-1, 0, 1}^n`; cardinality `3^n - 1`,
/// claimed `tau = 2 / sqrt(ln n + 5)`.
pub fn build_h2(n: usize) -> Result<HittingSet> {
    build_h2_with_budget(n, MATERIALIZE_BUDGET)
}

pub fn build_h2_with_budget(n: usize, budget: u128) -> Result<HittingSet> {
    if n < 1 {
        return Err(Error::Parameter("h2 needs n >= 1".into()));
    }
    let count = (3u128).checked_pow(n as u32).map(|c| c - 1).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::Budget {
            needed: count,
            cap: budget,
            hint: "3^n grows quickly; use h4/h5 for large n".into(),
        });
    }
    let mut raw = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; n];
    loop {
        if digits.iter().any(|&d| d != 1) {
            let v: Vec<f64> = digits.iter().map(|&d| d as f64 - 1.0).collect();
            raw.push(v);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return HittingSet::finish(n, raw, Provenance::H2, true);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < 3 {
                break;
            }
            digits[k] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Level-set construction H3
// ---------------------------------------------------------------------------

fn h3_level_count(n: usize, alpha: f64, beta: f64) -> usize {
    (((alpha * n as f64).ln() / beta.ln()).ceil() as usize).max(1)
}

fn h3_block_sizes(n: usize, alpha: f64, beta: f64) -> (usize, Vec<usize>) {
    let m = h3_level_count(n, alpha, beta);
    let mut rest = Vec::with_capacity(m.saturating_sub(1));
    let mut used = 0usize;
    for k in 2..=m {
        let s = (alpha * n as f64 / beta.powi(k as i32 - 1)).floor() as usize;
        rest.push(s);
        used += s;
    }
    debug_assert!(used <= n);
    (n - used, rest)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn validate_h3_params(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::Parameter(format!("h3 needs alpha >= 1, got {alpha}")));
    }
    if !(beta >= alpha + 1.0) || !beta.is_finite() {
        return Err(Error::Parameter(format!(
            "h3 needs beta >= alpha + 1, got alpha={alpha}, beta={beta}"
        )));
    }
    Ok(())
}

/// The tuned level-set construction with parameters `alpha >= 1`,
/// `beta >= alpha + 1`: coordinates take values `+-beta^{(k-1)/2}` according
/// to a partition into geometrically shrinking blocks, unioned over every
/// partition achieving the prescribed block sizes, then normalized.
/// Claimed `tau = (alpha - 1) / sqrt(alpha beta (alpha + 1))`.
pub fn build_h3(n: usize, alpha: f64, beta: f64) -> Result<HittingSet> {
    build_h3_with_budget(n, alpha, beta, MATERIALIZE_BUDGET)
}

pub fn build_h3_with_budget(n: usize, alpha: f64, beta: f64, budget: u128) -> Result<HittingSet> {
    if n < 2 {
        return Err(Error::Parameter("h3 needs n >= 2".into()));
    }
    validate_h3_params(alpha, beta)?;
    let (s1, rest) = h3_block_sizes(n, alpha, beta);

    // Budget guard on ln scale before any enumeration: the raw count is
    // (#partitions) * 2^{s1} * 4^{sum rest}.
    let ln_partitions =
        ln_factorial(n) - ln_factorial(s1) - rest.iter().map(|&s| ln_factorial(s)).sum::<f64>();
    let high: usize = rest.iter().sum();
    let ln_values = s1 as f64 * 2f64.ln() + high as f64 * 4f64.ln();
    let ln_budget = (budget as f64).ln();
    if ln_partitions + ln_values > ln_budget {
        let needed = if ln_partitions + ln_values < 80.0 {
            ((ln_partitions + ln_values).exp()) as u128
        } else {
            u128::MAX
        };
        return Err(Error::Budget {
            needed,
            cap: budget,
            hint: "h3 grows exponentially; use it only at small n".into(),
        });
    }

    // Enumerate partitions: assign block labels (0 for the unit block,
    // k >= 1 for level-k blocks) to coordinates, choosing each block as a
    // combination of the remaining indices.
    let mut raw: Vec<Vec<f64>> = Vec::new();
    let mut labels = vec![0usize; n];
    let levels: Vec<f64> = (0..=rest.len())
        .map(|k| beta.powf(k as f64 / 2.0))
        .collect(); // levels[0] = 1, levels[k] = beta^{k/2}
    enumerate_partitions(&mut labels, &rest, 0, &mut |labels| {
        emit_h3_vectors(labels, &levels, &mut raw);
    });
    HittingSet::finish(n, raw, Provenance::H3 { alpha, beta }, true)
}

/// Recursively chooses the indices of block `block + 1` (sizes in `rest`)
/// among coordinates still labeled 0.
fn enumerate_partitions(
    labels: &mut Vec<usize>,
    rest: &[usize],
    block: usize,
    cb: &mut impl FnMut(&[usize]),
) {
    if block == rest.len() {
        cb(labels);
        return;
    }
    let size = rest[block];
    let free: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    let mut choice = vec![0usize; size];
    choose_rec(&free, size, 0, 0, &mut choice, labels, rest, block, cb);
}

#[allow(clippy::too_many_arguments)]
fn choose_rec(
    free: &[usize],
    size: usize,
    start: usize,
    depth: usize,
    choice: &mut Vec<usize>,
    labels: &mut Vec<usize>,
    rest: &[usize],
    block: usize,
    cb: &mut impl FnMut(&[usize]),
) {
    if depth == size {
        for &i in choice.iter() {
            labels[i] = block + 1;
        }
        enumerate_partitions(labels, rest, block + 1, cb);
        for &i in choice.iter() {
            labels[i] = 0;
        }
        return;
    }
    for pos in start..free.len() {
        choice[depth] = free[pos];
        choose_rec(free, size, pos + 1, depth + 1, choice, labels, rest, block, cb);
    }
}

fn emit_h3_vectors(labels: &[usize], levels: &[f64], out: &mut Vec<Vec<f64>>) {
    // Coordinate in block 0 takes 2 signed values at level 1; block k >= 1
    // takes 4 values {+-1, +-beta^{k/2}}.
    let n = labels.len();
    let choices: Vec<usize> = labels.iter().map(|&b| if b == 0 { 2 } else { 4 }).collect();
    let mut digits = vec![0usize; n];
    loop {
        let mut v = vec![0.0f64; n];
        for i in 0..n {
            let d = digits[i];
            let mag = if labels[i] == 0 {
                1.0
            } else if d < 2 {
                1.0
            } else {
                levels[labels[i]]
            };
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            v[i] = sign * mag;
        }
        out.push(v);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < choices[k] {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// Closed-form `(tau, cardinality base)` for the level-set family at
/// parameters `(alpha, gamma)` with `beta = gamma + 1`: the set has
/// `tau = (alpha-1)/sqrt(alpha (alpha+1) (gamma+1))` and cardinality at most
/// `base^n` up to lower-order terms.
pub fn h3_formulas(alpha: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(alpha >= 1.0) || !(gamma >= alpha) {
        return Err(Error::Parameter(format!(
            "h3_formulas needs 1 <= alpha <= gamma, got alpha={alpha}, gamma={gamma}"
        )));
    }
    let tau = (alpha - 1.0) / (alpha * (alpha + 1.0) * (gamma + 1.0)).sqrt();
    let d = gamma - alpha;
    let tail = if d / gamma < 1e-14 {
        1.0
    } else {
        (gamma / d).powf(d / gamma)
    };
    let base = 2f64.powf((gamma + alpha) / gamma)
        * alpha.powf(-alpha / gamma)
        * (gamma + 1.0).powf(alpha * (gamma + 1.0) / (gamma * gamma))
        * tail;
    Ok((tau, base))
}

/// Constructive witness for the level-set theorem: classifies each
/// coordinate of `x` into its magnitude band and assigns the matching signed
/// level, producing a member of `build_h3(n, alpha, beta)` with
/// `z^T x >= (alpha-1)/sqrt(alpha beta (alpha+1))`.
pub fn h3_witness(x: &[f64], alpha: f64, beta: f64) -> Result<Vec<f64>> {
    validate_h3_params(alpha, beta)?;
    let n = x.len();
    if n == 0 {
        return Err(Error::EmptyInput("witness needs a nonempty vector".into()));
    }
    let m = h3_level_count(n, alpha, beta);
    let an = alpha * n as f64;
    let mut z = vec![0.0f64; n];
    for (i, &xi) in x.iter().enumerate() {
        let a = xi.abs();
        let sign = if xi >= 0.0 { 1.0 } else { -1.0 };
        if a * a <= 1.0 / an {
            z[i] = sign;
        } else {
            let mut level = 1usize;
            while level < m && a * a > beta.powi(level as i32) / an {
                level += 1;
            }
            z[i] = sign * beta.powf((level as f64 - 1.0) / 2.0);
        }
    }
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(z.into_iter().map(|v| v / norm).collect())
}

// ---------------------------------------------------------------------------
// Composition lemmas
// ---------------------------------------------------------------------------

/// Kronecker composition: places each member of `h` into every one of `n2`
/// standard-basis blocks, covering the sphere of `R^{n1 n2}` at
/// `tau / sqrt(n2)`. Requires `tau >= 0`.
pub fn kron_compose(h: &HittingSet, n2: usize) -> Result<HittingSet> {
    if n2 < 1 {
        return Err(Error::Parameter("kron needs n2 >= 1".into()));
    }
    if !(h.claimed_tau() >= 0.0) {
        return Err(Error::LemmaHypothesis(format!(
            "kron composition requires claimed_tau >= 0, got {}",
            h.claimed_tau()
        )));
    }
    let n1 = h.dim();
    let n = n1 * n2;
    let mut raw = Vec::with_capacity(h.len() * n2);
    for block in 0..n2 {
        for z in h.iter() {
            let mut v = vec![0.0f64; n];
            v[block * n1..(block + 1) * n1].copy_from_slice(z);
            raw.push(v);
        }
    }
    let prov = Provenance::Kron {
        child: Box::new(h.provenance().clone()),
        child_tau: h.claimed_tau(),
        n2,
    };
    HittingSet::finish(n, raw, prov, h.certified())
}

/// Append composition: zero-pads two hitting sets into `R^{n1+n2}`, covering
/// at `tau1 tau2 / sqrt(tau1^2 + tau2^2)`. Requires both taus > 0.
pub fn append_compose(h1: &HittingSet, h2: &HittingSet) -> Result<HittingSet> {
    if !(h1.claimed_tau() > 0.0) || !(h2.claimed_tau() > 0.0) {
        return Err(Error::LemmaHypothesis(format!(
            "append composition requires positive taus, got {} and {}",
            h1.claimed_tau(),
            h2.claimed_tau()
        )));
    }
    let (n1, n2) = (h1.dim(), h2.dim());
    let n = n1 + n2;
    let mut raw = Vec::with_capacity(h1.len() + h2.len());
    for z in h1.iter() {
        let mut v = vec![0.0f64; n];
        v[..n1].copy_from_slice(z);
        raw.push(v);
    }
    for z in h2.iter() {
        let mut v = vec![0.0f64; n];
        v[n1..].copy_from_slice(z);
        raw.push(v);
    }
    let prov = Provenance::Append {
        left: Box::new(h1.provenance().clone()),
        left_tau: h1.claimed_tau(),
        right: Box::new(h2.provenance().clone()),
        right_tau: h2.claimed_tau(),
    };
    HittingSet::finish(n, raw, prov, h1.certified() && h2.certified())
}

/// The set `{+1, -1}` on the 0-sphere, used for degenerate splits.
fn sign_pair() -> Result<HittingSet> {
    HittingSet::finish(1, vec![vec![1.0], vec![-1.0]], Provenance::PmBasis, true)
}

/// Kronecker-of-ternary composition at the logarithmic split, reaching
/// `tau = Omega(sqrt(ln n / (n ln ln n)))` with `O(n^{1+ln 3})` vectors.
pub fn build_h4(n: usize) -> Result<HittingSet> {
    if n < 2 {
        return Err(Error::Parameter("h4 needs n >= 2".into()));
    }
    let (n1, n2, n3) = log_split(n);
    let base = build_h2(n1)?;
    let kron = kron_compose(&base, n2)?;
    let composed = match n3 {
        0 => kron,
        1 => append_compose(&kron, &sign_pair()?)?,
        _ => append_compose(&kron, &build_h2(n3)?)?,
    };
    Ok(HittingSet {
        claimed_tau: Provenance::H4.formula_tau(n),
        provenance: Provenance::H4,
        ..composed
    })
}

/// Kronecker-of-level-set composition at the logarithmic split; with
/// `alpha = 2 + sqrt 5`, `beta = 3 + sqrt 5` this reaches
/// `tau = 0.3 sqrt(ln n / n)` with `O(n^3)` vectors. The claimed tau is the
/// conservative `mu / sqrt(n2 + 1)` from the composition argument.
pub fn build_h5(n: usize, alpha: f64, beta: f64) -> Result<HittingSet> {
    if n < 2 {
        return Err(Error::Parameter("h5 needs n >= 2".into()));
    }
    validate_h3_params(alpha, beta)?;
    let (n1, n2, n3) = log_split(n);
    let base = if n1 >= 2 { build_h3(n1, alpha, beta)? } else { sign_pair()? };
    let kron = kron_compose(&base, n2)?;
    let composed = match n3 {
        0 => kron,
        1 => append_compose(&kron, &sign_pair()?)?,
        _ => append_compose(&kron, &build_h3(n3, alpha, beta)?)?,
    };
    let prov = Provenance::H5 { alpha, beta };
    Ok(HittingSet {
        claimed_tau: prov.formula_tau(n),
        provenance: prov,
        ..composed
    })
}

// ---------------------------------------------------------------------------
// Classical sets
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassicalKind {
    Simplex,
    PmBasis,
    Antipodal,
    Singleton,
}

/// Elementary hitting sets: regular simplex (`tau = 1/n`), signed basis
/// (`tau = 1/sqrt n`), antipodal pair (`tau = 0`), singleton (`tau = -1`).
pub fn build_classical(n: usize, kind: ClassicalKind) -> Result<HittingSet> {
    match kind {
        ClassicalKind::Simplex | ClassicalKind::PmBasis if n < 2 => {
            return Err(Error::Parameter("simplex/pm_basis need n >= 2".into()));
        }
        ClassicalKind::Antipodal | ClassicalKind::Singleton if n < 1 => {
            return Err(Error::Parameter("need n >= 1".into()));
        }
        _ => {}
    }
    match kind {
        ClassicalKind::Simplex => {
            // Vertices of a regular simplex obtained by projecting the
            // standard basis of R^{n+1} onto the complement of the all-ones
            // direction.
            let np = n + 1;
            // Orthonormal basis of the complement via Gram-Schmidt on
            // successive differences e_j - e_{j+1}.
            let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
            for j in 0..n {
                let mut b = vec![0.0f64; np];
                b[j] = 1.0;
                b[j + 1] = -1.0;
                for prev in &basis {
                    let dot: f64 = b.iter().zip(prev).map(|(x, y)| x * y).sum();
                    for (bi, pi) in b.iter_mut().zip(prev) {
                        *bi -= dot * pi;
                    }
                }
                let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in b.iter_mut() {
                    *x /= norm;
                }
                basis.push(b);
            }
            let c = 1.0 / np as f64;
            let mut raw = Vec::with_capacity(np);
            for i in 0..np {
                let mut w = vec![-c; np];
                w[i] += 1.0;
                let v: Vec<f64> = basis
                    .iter()
                    .map(|b| b.iter().zip(&w).map(|(x, y)| x * y).sum())
                    .collect();
                raw.push(v);
            }
            HittingSet::finish(n, raw, Provenance::Simplex, true)
        }
        ClassicalKind::PmBasis => {
            let mut raw = Vec::with_capacity(2 * n);
            for i in 0..n {
                let mut v = vec![0.0f64; n];
                v[i] = 1.0;
                raw.push(v.clone());
                v[i] = -1.0;
                raw.push(v);
            }
            HittingSet::finish(n, raw, Provenance::PmBasis, true)
        }
        ClassicalKind::Antipodal => {
            let mut v = vec![0.0f64; n];
            v[0] = 1.0;
            let mut w = vec![0.0f64; n];
            w[0] = -1.0;
            HittingSet::finish(n, vec![v, w], Provenance::Antipodal, true)
        }
        ClassicalKind::Singleton => {
            let mut v = vec![0.0f64; n];
            v[0] = 1.0;
            HittingSet::finish(n, vec![v], Provenance::Singleton, true)
        }
    }
}

// ---------------------------------------------------------------------------
// Discrepancy estimation and grid certification
// ---------------------------------------------------------------------------

const ESTIMATE_STEPS: usize = 400;
const TEMP_LO: f64 = 10.0;
const TEMP_HI: f64 = 1000.0;

fn descend(h: &HittingSet, start: Vec<f64>) -> (f64, Vec<f64>) {
    let n = h.dim();
    let m = h.len();
    let mut x = start;
    let mut best_f = h.max_inner(&x);
    let mut best_x = x.clone();
    let mut scores = vec![0.0f64; m];
    for iter in 0..ESTIMATE_STEPS {
        let temp = TEMP_LO * (TEMP_HI / TEMP_LO).powf(iter as f64 / (ESTIMATE_STEPS - 1) as f64);
        let mut mx = f64::NEG_INFINITY;
        for (i, v) in h.iter().enumerate() {
            let s: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
            scores[i] = s;
            if s > mx {
                mx = s;
            }
        }
        if mx < best_f {
            best_f = mx;
            best_x = x.clone();
        }
        // Smoothed-max gradient: softmax-weighted combination of members.
        let mut weight_sum = 0.0;
        let mut grad = vec![0.0f64; n];
        for (i, v) in h.iter().enumerate() {
            let w = ((scores[i] - mx) * temp).exp();
            weight_sum += w;
            for (g, &a) in grad.iter_mut().zip(v) {
                *g += w * a;
            }
        }
        for g in grad.iter_mut() {
            *g /= weight_sum;
        }
        let step = 0.5 / ((iter + 1) as f64).sqrt();
        let mut next: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for v in next.iter_mut() {
                *v /= norm;
            }
            x = next;
        }
    }
    let f = h.max_inner(&x);
    if f < best_f {
        best_f = f;
        best_x = x;
    }
    (best_f, best_x)
}

/// Multi-start estimate of the spherical discrepancy
/// `min_{|x|=1} max_i v_i^T x`. The returned value upper-bounds the true
/// covering level of the set; restarts mix coarse grid points and seeded
/// random starts, refined by projected subgradient descent on an annealed
/// log-sum-exp smoothing of the max.
pub fn estimate_tau(h: &HittingSet, restarts: usize, seed: u64) -> Result<CoverReport> {
    if restarts < 1 {
        return Err(Error::Parameter("restarts must be >= 1".into()));
    }
    let n = h.dim();
    let mut pool: Vec<Vec<f64>> = Vec::new();
    for m in [2usize, 3] {
        if pool.len() >= restarts / 2 {
            break;
        }
        if grid_count(n, m).map(|c| c <= 4096).unwrap_or(false) {
            for_each_grid_point(n, m, |x| {
                pool.push(x.to_vec());
                pool.len() < restarts / 2
            });
        }
    }
    let starts: Vec<Vec<f64>> = (0..restarts)
        .map(|r| {
            if r < pool.len() {
                pool[r].clone()
            } else {
                Rng::derive(seed, r as u64).unit_vector(n)
            }
        })
        .collect();
    let results: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|s| descend(h, s))
        .collect();
    let mut best = 0usize;
    for i in 1..results.len() {
        if results[i].0 < results[best].0 {
            best = i;
        }
    }
    Ok(CoverReport {
        estimated_tau: results[best].0,
        witness: results[best].1.clone(),
        certified_at: None,
        samples_used: restarts * (ESTIMATE_STEPS + 2),
    })
}

/// Grid-certified sufficient coverage check. Every sphere point is within
/// angle `theta_g = arccos(1 - pi^2 (n-1)/(8 m^2))` of a grid point, so if
/// every grid point sees a member at angle `arccos(tau) - theta_g` or less,
/// the caps at level `tau` cover the whole sphere.
pub fn verify_cover(h: &HittingSet, tau: f64, grid_m: usize) -> Result<CoverReport> {
    verify_cover_with_budget(h, tau, grid_m, VERIFY_BUDGET)
}

pub fn verify_cover_with_budget(
    h: &HittingSet,
    tau: f64,
    grid_m: usize,
    budget: u128,
) -> Result<CoverReport> {
    let n = h.dim();
    if n < 2 {
        return Err(Error::Parameter("verification needs n >= 2".into()));
    }
    if grid_m < 1 {
        return Err(Error::Parameter("grid_m must be >= 1".into()));
    }
    let count = grid_count(n, grid_m).unwrap_or(u128::MAX);
    if count > budget {
        return Err(Error::Budget {
            needed: count,
            cap: budget,
            hint: "grid too fine to scan; use estimate_tau instead".into(),
        });
    }
    let grid_tau = 1.0 - PI * PI * (n as f64 - 1.0) / (8.0 * (grid_m as f64).powi(2));
    let theta_g = grid_tau.clamp(-1.0, 1.0).acos();
    // A grid point must see a member within angle arccos(tau) - theta_g for
    // the triangle argument to cover its whole cell; a negative slack means
    // this resolution cannot certify at all.
    let theta_req = tau.clamp(-1.0, 1.0).acos() - theta_g;
    let required = if theta_req < 0.0 { f64::INFINITY } else { theta_req.cos() };

    let mut min_best = f64::INFINITY;
    let mut witness = vec![0.0f64; n];
    let mut samples = 0usize;
    let mut failed = false;
    for_each_grid_point(n, grid_m, |y| {
        samples += 1;
        let best = h.max_inner(y);
        if best < min_best {
            min_best = best;
            witness.copy_from_slice(y);
        }
        if best < required {
            failed = true;
            witness.copy_from_slice(y);
            return false; // first failing grid point wins
        }
        true
    });
    Ok(CoverReport {
        estimated_tau: min_best,
        witness,
        certified_at: if failed { None } else { Some((tau, grid_m)) },
        samples_used: samples,
    })
}

/// Tries geometrically growing grid resolutions until a certification at
/// `tau` succeeds or the scan budget runs out; returns the last failing
/// report when no resolution certifies.
pub fn verify_cover_auto(h: &HittingSet, tau: f64) -> Result<CoverReport> {
    verify_cover_auto_with_budget(h, tau, VERIFY_BUDGET)
}

pub fn verify_cover_auto_with_budget(
    h: &HittingSet,
    tau: f64,
    budget: u128,
) -> Result<CoverReport> {
    let mut m = 4usize;
    let mut last: Option<CoverReport> = None;
    loop {
        if grid_count(h.dim(), m).unwrap_or(u128::MAX) > budget {
            return last.ok_or(Error::Budget {
                needed: grid_count(h.dim(), m).unwrap_or(u128::MAX),
                cap: budget,
                hint: "even the coarsest grid exceeds the scan budget".into(),
            });
        }
        let report = verify_cover_with_budget(h, tau, m, budget)?;
        if report.certified_at.is_some() {
            return Ok(report);
        }
        last = Some(report);
        m = m * 3 / 2 + 1;
    }
}

/// Empirical floor check: smallest max-inner-product over `samples` seeded
/// uniform sphere points. Deterministic for fixed inputs.
pub fn min_max_inner_samples(h: &HittingSet, samples: usize, seed: u64) -> f64 {
    let n = h.dim();
    (0..samples)
        .into_par_iter()
        .map(|j| {
            let x = Rng::derive(seed, j as u64).unit_vector(n);
            h.max_inner(&x)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Writes the text format: `n m claimed_tau certified provenance` on the
/// first line, then one vector per line with 17 significant digits.
pub fn write_hitting_set<W: Write>(w: &mut W, h: &HittingSet) -> Result<()> {
    writeln!(
        w,
        "{} {} {:.17e} {} {}",
        h.dim(),
        h.len(),
        h.claimed_tau(),
        h.certified(),
        h.provenance()
    )?;
    for v in h.iter() {
        let mut first = true;
        for x in v {
            if !first {
                write!(w, " ")?;
            }
            write!(w, "{x:.16e}")?;
            first = false;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads the format produced by [`write_hitting_set`].
pub fn read_hitting_set<R: BufRead>(r: &mut R) -> Result<HittingSet> {
    let mut header = String::new();
    loop {
        header.clear();
        if r.read_line(&mut header)? == 0 {
            return Err(Error::Parse("empty hitting-set file".into()));
        }
        if !header.trim().is_empty() {
            break;
        }
    }
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .ok_or_else(|| Error::Parse("missing n".into()))?
        .parse()
        .map_err(|_| Error::Parse("bad n".into()))?;
    let m: usize = it
        .next()
        .ok_or_else(|| Error::Parse("missing m".into()))?
        .parse()
        .map_err(|_| Error::Parse("bad m".into()))?;
    let claimed_tau: f64 = it
        .next()
        .ok_or_else(|| Error::Parse("missing tau".into()))?
        .parse()
        .map_err(|_| Error::Parse("bad tau".into()))?;
    let certified: bool = it
        .next()
        .ok_or_else(|| Error::Parse("missing certified flag".into()))?
        .parse()
        .map_err(|_| Error::Parse("bad certified flag".into()))?;
    let provenance: Provenance = it
        .next()
        .ok_or_else(|| Error::Parse("missing provenance".into()))?
        .parse()?;

    let mut vectors = Vec::with_capacity(n * m);
    let mut line = String::new();
    while vectors.len() < n * m {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Parse(format!(
                "expected {} coordinates, found {}",
                n * m,
                vectors.len()
            )));
        }
        for tok in line.split_whitespace() {
            vectors.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad coordinate {tok:?}")))?,
            );
        }
    }
    if vectors.len() != n * m {
        return Err(Error::Parse("coordinate count mismatch".into()));
    }
    for v in vectors.chunks_exact(n) {
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Parse("non-unit vector in file".into()));
        }
    }
    Ok(HittingSet {
        n,
        vectors,
        claimed_tau,
        provenance,
        certified,
    })
}

pub fn write_hitting_set_to_path(path: &std::path::Path, h: &HittingSet) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_hitting_set(&mut w, h)
}

pub fn read_hitting_set_from_path(path: &std::path::Path) -> Result<HittingSet> {
    let f = std::fs::File::open(path)?;
    let mut r = std::io::BufReader::new(f);
    read_hitting_set(&mut r)
}
