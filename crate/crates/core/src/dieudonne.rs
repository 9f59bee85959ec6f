//! Truncated Witt-vector linear algebra: normal-form symplectic
//! Frobenius matrices, semi-linear iteration, elementary-divisor slope
//! extraction, the operator identity for the 2g-th Frobenius power on
//! the first basis vector, and the sufficient supersingularity
//! criterion.
//!
//! The coefficient ring is `W(F_{p^m})/p^N`: polynomials of degree < m
//! over `Z/p^N` modulo a fixed monic lift of the residue-field modulus,
//! with Frobenius obtained by a Hensel lift of `x ↦ x^p`.

use crate::finitefield::{self, Fq};
use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WittError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("residue degree {0} out of the supported range 1..=6")]
    BadDegree(u32),
    #[error("precision {0} out of range (need 1..=20 with p^N < 2^40)")]
    BadPrecision(u32),
    #[error("genus {0} out of the supported range 1..=4")]
    BadGenus(u32),
    #[error("precision budget: need {needed} digits but only {available} are certain")]
    PrecisionBudget { needed: u32, available: u32 },
    #[error("slope extraction inconclusive: {0}")]
    Inconclusive(String),
}

/// Element of `W(F_{p^m})/p^N` as coefficients of the power basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witt {
    c: Vec<u64>,
}

/// The arithmetic context: modulus lift, precision, Frobenius matrices.
#[derive(Debug, Clone)]
pub struct WittCtx {
    p: u64,
    m: usize,
    precision: u32,
    pn: u64,
    modulus: Vec<u64>,
    /// sigma_pows[k] is the m×m matrix of σ^k on coefficient vectors,
    /// stored column-major: column j holds the coefficients of σ^k(x^j).
    sigma_pows: Vec<Vec<u64>>,
    residue: Fq,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl WittCtx {
    pub fn new(p: u64, m: u32, precision: u32) -> Result<WittCtx, WittError> {
        if !is_prime(p) {
            return Err(WittError::NotPrime(p));
        }
        if m == 0 || m > 6 {
            return Err(WittError::BadDegree(m));
        }
        let pn = p.checked_pow(precision).filter(|&v| v < (1 << 40));
        let Some(pn) = pn else {
            return Err(WittError::BadPrecision(precision));
        };
        if precision == 0 {
            return Err(WittError::BadPrecision(precision));
        }
        let residue =
            Fq::new(p as u32, m).map_err(|_| WittError::BadDegree(m))?;
        // Trivial lift of the residue modulus: digits 0..p-1 as integers.
        let modulus: Vec<u64> = residue.modulus().iter().map(|&c| c as u64).collect();
        let mut ctx = WittCtx {
            p,
            m: m as usize,
            precision,
            pn,
            modulus,
            sigma_pows: Vec::new(),
            residue,
        };
        ctx.build_sigma()?;
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn residue_degree(&self) -> usize {
        self.m
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    fn md(&self, v: u64) -> u64 {
        v % self.pn
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.pn as u128) as u64
    }

    pub fn zero(&self) -> Witt {
        Witt {
            c: vec![0; self.m],
        }
    }

    pub fn constant(&self, v: i64) -> Witt {
        let mut w = self.zero();
        w.c[0] = if v >= 0 {
            self.md(v as u64)
        } else {
            self.md(self.pn - (v.unsigned_abs() % self.pn))
        };
        w
    }

    /// The power-basis generator.
    pub fn gen(&self) -> Witt {
        let mut w = self.zero();
        if self.m > 1 {
            w.c[1] = 1;
        } else {
            // F_p case: the generator is 1.
            w.c[0] = 1;
        }
        w
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Witt {
        let mut c: Vec<u64> = coeffs.iter().map(|&v| self.md(v)).collect();
        c.resize(self.m, 0);
        Witt { c }
    }

    pub fn add(&self, a: &Witt, b: &Witt) -> Witt {
        Witt {
            c: a.c
                .iter()
                .zip(&b.c)
                .map(|(&x, &y)| self.md(x + y))
                .collect(),
        }
    }

    pub fn neg(&self, a: &Witt) -> Witt {
        Witt {
            c: a.c.iter().map(|&x| self.md(self.pn - x)).collect(),
        }
    }

    pub fn sub(&self, a: &Witt, b: &Witt) -> Witt {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Witt, b: &Witt) -> Witt {
        let mut prod = vec![0u64; 2 * self.m - 1];
        for (i, &x) in a.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate() {
                prod[i + j] = self.md(prod[i + j] + self.mulmod(x, y));
            }
        }
        // Reduce by the monic modulus.
        for i in (self.m..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..self.m {
                let t = self.mulmod(c, self.modulus[j]);
                prod[i - self.m + j] = self.md(prod[i - self.m + j] + self.pn - t);
            }
        }
        prod.truncate(self.m);
        Witt { c: prod }
    }

    pub fn scale(&self, a: &Witt, s: u64) -> Witt {
        Witt {
            c: a.c.iter().map(|&x| self.mulmod(x, self.md(s))).collect(),
        }
    }

    pub fn is_zero(&self, a: &Witt) -> bool {
        a.c.iter().all(|&x| x == 0)
    }

    /// p-adic valuation, capped at the precision.
    pub fn valuation(&self, a: &Witt) -> u32 {
        a.c.iter()
            .map(|&x| {
                if x == 0 {
                    self.precision
                } else {
                    let mut v = 0;
                    let mut x = x;
                    while x % self.p == 0 {
                        x /= self.p;
                        v += 1;
                    }
                    v
                }
            })
            .min()
            .unwrap_or(self.precision)
    }

    pub fn is_unit(&self, a: &Witt) -> bool {
        self.valuation(a) == 0
    }

    /// Exact division by p^k; every coefficient must be divisible.
    pub fn div_p_pow(&self, a: &Witt, k: u32) -> Witt {
        let pk = self.p.pow(k);
        Witt {
            c: a.c
                .iter()
                .map(|&x| {
                    assert!(x % pk == 0, "inexact division by p^{k}");
                    x / pk
                })
                .collect(),
        }
    }

    fn residue_of(&self, a: &Witt) -> finitefield::Elem {
        let mut packed = 0u32;
        for &x in a.c.iter().rev() {
            packed = packed * self.p as u32 + (x % self.p) as u32;
        }
        packed
    }

    fn lift_residue(&self, e: finitefield::Elem) -> Witt {
        let mut w = self.zero();
        let mut e = e;
        for slot in w.c.iter_mut() {
            *slot = (e % self.p as u32) as u64;
            e /= self.p as u32;
        }
        w
    }

    /// Inverse of a unit by lifting the residue inverse through Newton
    /// doubling.
    pub fn inv_unit(&self, a: &Witt) -> Witt {
        assert!(self.is_unit(a), "inverse of a non-unit");
        let mut v = self.lift_residue(self.residue.inv(self.residue_of(a)));
        let two = self.constant(2);
        loop {
            let av = self.mul(a, &v);
            if av == self.constant(1) {
                return v;
            }
            v = self.mul(&v, &self.sub(&two, &av));
        }
    }

    fn build_sigma(&mut self) -> Result<(), WittError> {
        // Hensel-lift the residue Frobenius: find the root of the
        // modulus congruent to gen^p mod p by Newton iteration.
        let h = self.modulus.clone();
        let hprime: Vec<u64> = (1..h.len())
            .map(|i| self.mulmod(i as u64, h[i]))
            .collect();
        let eval = |ctx: &WittCtx, coeffs: &[u64], at: &Witt| -> Witt {
            let mut acc = ctx.zero();
            for &c in coeffs.iter().rev() {
                acc = ctx.mul(&acc, at);
                acc = ctx.add(&acc, &ctx.constant(c as i64));
            }
            acc
        };
        let mut r = self.pow_witt(&self.gen(), self.p);
        for _ in 0..64 {
            let hr = eval(self, &h, &r);
            if self.is_zero(&hr) {
                break;
            }
            let hpr = eval(self, &hprime, &r);
            let delta = self.mul(&hr, &self.inv_unit(&hpr));
            r = self.sub(&r, &delta);
        }
        assert!(self.is_zero(&eval(self, &h, &r)), "Hensel lift failed");

        // σ as an m×m matrix: column j = coefficients of r^j.
        let mut sigma = vec![0u64; self.m * self.m];
        let mut rj = self.constant(1);
        for j in 0..self.m {
            for i in 0..self.m {
                sigma[i * self.m + j] = rj.c[i];
            }
            rj = self.mul(&rj, &r);
        }
        // Powers σ^0..σ^{m-1} (σ^m = id).
        let mut pows = Vec::with_capacity(self.m);
        let mut ident = vec![0u64; self.m * self.m];
        for i in 0..self.m {
            ident[i * self.m + i] = 1;
        }
        let mut acc = ident.clone();
        for _ in 0..self.m {
            pows.push(acc.clone());
            acc = self.small_matmul(&acc, &sigma);
        }
        // Closing the cycle is exactly σ^m = identity.
        assert_eq!(acc, ident, "Frobenius lift does not have order m");
        self.sigma_pows = pows;
        Ok(())
    }

    fn small_matmul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let m = self.m;
        let mut out = vec![0u64; m * m];
        for i in 0..m {
            for k in 0..m {
                let av = a[i * m + k];
                if av == 0 {
                    continue;
                }
                for j in 0..m {
                    out[i * m + j] = self.md(out[i * m + j] + self.mulmod(av, b[k * m + j]));
                }
            }
        }
        out
    }

    fn pow_witt(&self, a: &Witt, e: u64) -> Witt {
        let mut acc = self.constant(1);
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// The lifted Frobenius σ^k.
    pub fn frobenius(&self, a: &Witt, k: u32) -> Witt {
        let mat = &self.sigma_pows[k as usize % self.m];
        let mut out = self.zero();
        for i in 0..self.m {
            let mut acc = 0u64;
            for j in 0..self.m {
                acc = self.md(acc + self.mulmod(mat[i * self.m + j], a.c[j]));
            }
            out.c[i] = acc;
        }
        out
    }
}

/// Square matrix over the truncated Witt ring, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WMat {
    pub n: usize,
    pub data: Vec<Witt>,
}

impl WMat {
    pub fn zero(ctx: &WittCtx, n: usize) -> WMat {
        WMat {
            n,
            data: vec![ctx.zero(); n * n],
        }
    }

    pub fn identity(ctx: &WittCtx, n: usize) -> WMat {
        let mut m = WMat::zero(ctx, n);
        for i in 0..n {
            m.data[i * n + i] = ctx.constant(1);
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &Witt {
        &self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Witt) {
        self.data[r * self.n + c] = v;
    }

    pub fn mul(&self, ctx: &WittCtx, other: &WMat) -> WMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = WMat::zero(ctx, n);
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if ctx.is_zero(a) {
                    continue;
                }
                for j in 0..n {
                    let t = ctx.mul(a, other.at(k, j));
                    let cur = out.at(i, j).clone();
                    out.set(i, j, ctx.add(&cur, &t));
                }
            }
        }
        out
    }

    pub fn frobenius(&self, ctx: &WittCtx, k: u32) -> WMat {
        WMat {
            n: self.n,
            data: self.data.iter().map(|w| ctx.frobenius(w, k)).collect(),
        }
    }

    pub fn transpose(&self) -> WMat {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                data.push(self.data[i * n + j].clone());
            }
        }
        WMat { n, data }
    }

    pub fn column(&self, c: usize) -> Vec<Witt> {
        (0..self.n).map(|r| self.at(r, c).clone()).collect()
    }
}

/// Normal-form symplectic presentation of Frobenius on a p-rank-0,
/// a-number-1 module: a 2g×2g matrix with subdiagonal identity blocks,
/// a single corner entry, and a symmetric free block.
#[derive(Debug, Clone)]
pub struct GammaForm {
    pub g: usize,
    pub gamma: WMat,
}

/// The symmetric-reduced index set of the sufficient supersingularity
/// criterion, as 0-indexed entries of the free symmetric block.
pub fn criterion_pattern(g: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if g < 3 {
        return out;
    }
    for r in 0..g - 2 {
        for s in r..g - 2 {
            if r + s <= g - 3 {
                out.push((r, s));
            }
        }
    }
    out
}

/// Number of conditions for supersingularity: `g(g-1)/2 - [g²/4]`.
pub fn criterion_condition_count(g: usize) -> usize {
    criterion_pattern(g).len()
}

impl GammaForm {
    /// Builds the form from the free symmetric block `t` ((g-1)×(g-1),
    /// row-major); the remaining entries are forced by symplecticity.
    pub fn from_symmetric_block(ctx: &WittCtx, g: usize, t: &[Witt]) -> GammaForm {
        assert!(g >= 1);
        assert_eq!(t.len(), (g - 1) * (g - 1));
        let n = 2 * g;
        let mut gamma = WMat::zero(ctx, n);
        // Subdiagonal identity blocks.
        for i in 1..g {
            gamma.set(i, i - 1, ctx.constant(1));
            gamma.set(g + i, g + i - 1, ctx.constant(1));
        }
        // Corner entry of the lower-left block.
        gamma.set(g, g - 1, ctx.constant(1));
        // Upper-right block: first row is (0, .., 0, -1); rows 2..g carry
        // the symmetric block in their first g-1 columns.
        gamma.set(0, n - 1, ctx.constant(-1));
        for r in 0..g - 1 {
            for s in 0..g - 1 {
                gamma.set(1 + r, g + s, t[r * (g - 1) + s].clone());
            }
        }
        let form = GammaForm { g, gamma };
        debug_assert!(form.is_symplectic(ctx));
        form
    }

    /// `γ J γ^t = J` for the standard block form, checked exactly at the
    /// working precision.
    pub fn is_symplectic(&self, ctx: &WittCtx) -> bool {
        let n = 2 * self.g;
        let mut j = WMat::zero(ctx, n);
        for i in 0..self.g {
            j.set(i, self.g + i, ctx.constant(1));
            j.set(self.g + i, i, ctx.constant(-1));
        }
        let prod = self.gamma.mul(ctx, &j).mul(ctx, &self.gamma.transpose());
        prod == j
    }

    /// Entry of the free symmetric block (0-indexed).
    pub fn block_entry(&self, r: usize, s: usize) -> &Witt {
        self.gamma.at(1 + r, self.g + s)
    }
}

/// Draws a normal-form symplectic matrix with uniformly random free
/// entries; with `ss_pattern` the criterion entries are divisible by p.
pub fn random_gamma(
    ctx: &WittCtx,
    g: u32,
    seed: u64,
    ss_pattern: bool,
) -> Result<GammaForm, WittError> {
    if g == 0 || g > 4 {
        return Err(WittError::BadGenus(g));
    }
    let g = g as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = g.saturating_sub(1);
    let mut t = vec![ctx.zero(); k * k];
    let pattern = criterion_pattern(g);
    for r in 0..k {
        for s in r..k {
            let forced = ss_pattern && pattern.contains(&(r, s));
            let w = random_witt(ctx, &mut rng, forced);
            t[r * k + s] = w.clone();
            t[s * k + r] = w;
        }
    }
    Ok(GammaForm::from_symmetric_block(ctx, g, &t))
}

fn random_witt(ctx: &WittCtx, rng: &mut ChaCha8Rng, divisible_by_p: bool) -> Witt {
    let coeffs: Vec<u64> = (0..ctx.m)
        .map(|_| {
            if divisible_by_p {
                let top = ctx.pn / ctx.p;
                ctx.p * rng.gen_range(0..top)
            } else {
                rng.gen_range(0..ctx.pn)
            }
        })
        .collect();
    ctx.from_coeffs(&coeffs)
}

/// The matrix of the σ-linear Frobenius: blocks `(a, pb; c, pd)`.
pub fn f_matrix(ctx: &WittCtx, form: &GammaForm) -> WMat {
    let g = form.g;
    let n = 2 * g;
    let mut out = form.gamma.clone();
    for r in 0..n {
        for c in g..n {
            let scaled = ctx.scale(out.at(r, c), ctx.p);
            out.set(r, c, scaled);
        }
    }
    out
}

/// `A · σ(A) · σ²(A) ⋯ σ^{n-1}(A)`, the matrix of the n-th power of a
/// σ-linear map.
pub fn iterate_semilinear(ctx: &WittCtx, a: &WMat, n: u32) -> WMat {
    assert!(n >= 1);
    let mut acc = a.clone();
    for k in 1..n {
        acc = acc.mul(ctx, &a.frobenius(ctx, k % ctx.m as u32));
    }
    acc
}

/// Valuations of the elementary divisors over the local ring, by
/// valuation-minimal pivoting; values at the precision cap mean "at
/// least this much".
pub fn smith_valuations(ctx: &WittCtx, mat: &WMat) -> Vec<u32> {
    let n = mat.n;
    let mut m = mat.clone();
    let mut vals = Vec::with_capacity(n);
    for step in 0..n {
        // Global minimum valuation in the remaining block.
        let mut best = (ctx.precision, step, step);
        for r in step..n {
            for c in step..n {
                let v = ctx.valuation(m.at(r, c));
                if v < best.0 {
                    best = (v, r, c);
                }
            }
        }
        let (v, br, bc) = best;
        if v >= ctx.precision {
            // Everything left is zero at this precision.
            for _ in step..n {
                vals.push(ctx.precision);
            }
            break;
        }
        // Move the pivot to (step, step).
        for c in 0..n {
            let tmp = m.at(step, c).clone();
            m.set(step, c, m.at(br, c).clone());
            m.set(br, c, tmp);
        }
        for r in 0..n {
            let tmp = m.at(r, step).clone();
            m.set(r, step, m.at(r, bc).clone());
            m.set(r, bc, tmp);
        }
        let pivot = m.at(step, step).clone();
        let unit_inv = ctx.inv_unit(&ctx.div_p_pow(&pivot, v));
        // Eliminate the rest of the column and row. Quotients are exact
        // at full precision because every entry has valuation >= v.
        for r in step + 1..n {
            let e = m.at(r, step).clone();
            let ev = ctx.valuation(&e);
            if ev >= ctx.precision {
                continue;
            }
            let factor = ctx.mul(&ctx.div_p_pow(&e, v), &unit_inv);
            for c in step..n {
                let t = ctx.mul(&factor, m.at(step, c));
                let cur = m.at(r, c).clone();
                m.set(r, c, ctx.sub(&cur, &t));
            }
        }
        for c in step + 1..n {
            let e = m.at(step, c).clone();
            let ev = ctx.valuation(&e);
            if ev >= ctx.precision {
                continue;
            }
            let factor = ctx.mul(&ctx.div_p_pow(&e, v), &unit_inv);
            for r in step..n {
                let t = ctx.mul(&factor, m.at(r, step));
                let cur = m.at(r, c).clone();
                m.set(r, c, ctx.sub(&cur, &t));
            }
        }
        vals.push(v);
    }
    vals.sort_unstable();
    vals
}

/// A multiset of 2g slopes in [0,1], symmetric under s ↦ 1-s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeProfile {
    pub slopes: Vec<Ratio<u64>>,
    /// True when every other admissible polygon was excluded by the
    /// exact bound; false means "best feasible fit".
    pub certified: bool,
    /// Elementary-divisor valuations of the iterated Frobenius matrix.
    pub raw_valuations: Vec<u32>,
    /// The power of Frobenius the valuations were read from.
    pub iteration_power: u32,
}

impl SlopeProfile {
    pub fn is_all_half(&self) -> bool {
        self.slopes.iter().all(|s| *s == Ratio::new(1, 2))
    }

    pub fn sum(&self) -> Ratio<u64> {
        self.slopes.iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.slopes.len();
        (0..n).all(|i| self.slopes[i] + self.slopes[n - 1 - i] == Ratio::new(1, 1))
    }
}

impl std::fmt::Display for SlopeProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.slopes.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// All admissible Newton polygons for a p-rank-0 principally polarized
/// module of the given genus: 2g slopes in (0,1), nondecreasing,
/// symmetric under s ↦ 1-s, with integral breakpoints.
pub fn admissible_profiles(g: usize) -> Vec<Vec<Ratio<u64>>> {
    let width = 2 * g as u64;
    let height = g as u64;
    let mut out = Vec::new();
    let mut current: Vec<Ratio<u64>> = Vec::new();
    fn walk(
        x: u64,
        y: u64,
        width: u64,
        height: u64,
        last: Option<Ratio<u64>>,
        current: &mut Vec<Ratio<u64>>,
        out: &mut Vec<Vec<Ratio<u64>>>,
    ) {
        if x == width {
            if y == height {
                // Symmetry under s ↦ 1-s.
                let n = current.len();
                let symmetric = (0..n)
                    .all(|i| current[i] + current[n - 1 - i] == Ratio::new(1, 1));
                if symmetric {
                    out.push(current.clone());
                }
            }
            return;
        }
        for nx in x + 1..=width {
            for ny in y + 1..nx + y.min(height) + 1 {
                if ny > height {
                    break;
                }
                let run = nx - x;
                let rise = ny - y;
                if rise >= run {
                    continue; // slope must stay below 1
                }
                let slope = Ratio::new(rise, run);
                if let Some(prev) = last {
                    if slope <= prev {
                        continue;
                    }
                }
                let len = current.len();
                for _ in 0..run {
                    current.push(slope);
                }
                walk(nx, ny, width, height, Some(slope), current, out);
                current.truncate(len);
            }
        }
    }
    walk(0, 0, width, height, None, &mut current, &mut out);
    out.sort();
    out
}

const SLOPE_BUFFER: u32 = 2;

/// Newton slopes from the elementary divisors of the 2gk-th Frobenius
/// power.
///
/// The divisor valuations of a finite power only approximate the slopes
/// (the lattice need not be adapted to the slope filtration), but their
/// partial sums never exceed the corresponding partial sums of the true
/// polygon scaled by the power. That one-sided bound excludes candidate
/// polygons exactly: the result is certified when a single admissible
/// polygon survives, and otherwise the lowest feasible one is reported
/// uncertified. Valuations within the buffer of the precision are
/// treated as unknown and completed by the symmetry s ↦ 1-s; anything
/// still undetermined is an explicit inconclusive error, never a guess.
pub fn newton_slopes(
    ctx: &WittCtx,
    form: &GammaForm,
    iterations: u32,
) -> Result<SlopeProfile, WittError> {
    let g = form.g as u32;
    if iterations * g >= ctx.precision - SLOPE_BUFFER {
        return Err(WittError::PrecisionBudget {
            needed: iterations * g + SLOPE_BUFFER + 1,
            available: ctx.precision,
        });
    }
    let n_pow = 2 * g * iterations;
    let mat = iterate_semilinear(ctx, &f_matrix(ctx, form), n_pow);
    let raw = smith_valuations(ctx, &mat);
    let cert = ctx.precision - SLOPE_BUFFER;
    let n = raw.len();
    let mut vals: Vec<Option<u32>> = raw
        .iter()
        .map(|&v| if v < cert { Some(v) } else { None })
        .collect();
    // Symmetric completion: the divisor valuations pair to n_pow.
    for i in 0..n {
        if vals[i].is_none() {
            if let Some(partner) = vals[n - 1 - i] {
                vals[i] = Some(n_pow - partner);
            }
        }
    }
    let mut completed = Vec::with_capacity(n);
    for v in vals {
        match v {
            Some(v) => completed.push(v),
            None => {
                return Err(WittError::Inconclusive(format!(
                    "divisor valuations {raw:?} not certain below p^{cert} and not recoverable by symmetry"
                )))
            }
        }
    }
    completed.sort_unstable();
    if completed.iter().map(|&v| v as u64).sum::<u64>() != (g * n_pow) as u64 {
        return Err(WittError::Inconclusive(format!(
            "valuations {completed:?} do not sum to g times the iteration power"
        )));
    }

    // Partial sums of the observed polygon.
    let mut observed = Vec::with_capacity(n);
    let mut acc = 0u64;
    for &v in &completed {
        acc += v as u64;
        observed.push(acc);
    }

    // Feasible candidates: n_pow * T_j >= S_j for every j.
    let candidates = admissible_profiles(form.g);
    let mut feasible: Vec<(Ratio<u64>, &Vec<Ratio<u64>>)> = Vec::new();
    for cand in &candidates {
        let mut deficit = Ratio::new(0, 1);
        let mut ok = true;
        let mut t = Ratio::new(0, 1);
        for (j, s) in cand.iter().enumerate() {
            t += s;
            let scaled = t * Ratio::new(n_pow as u64, 1);
            let obs = Ratio::new(observed[j], 1);
            if scaled < obs {
                ok = false;
                break;
            }
            deficit += scaled - obs;
        }
        if ok {
            feasible.push((deficit, cand));
        }
    }
    if feasible.is_empty() {
        return Err(WittError::Inconclusive(format!(
            "no admissible polygon dominates the observed valuations {completed:?}"
        )));
    }
    feasible.sort_by_key(|a| a.0);
    let certified = feasible.len() == 1;
    let slopes = feasible[0].1.clone();
    Ok(SlopeProfile {
        slopes,
        certified,
        raw_valuations: completed,
        iteration_power: n_pow,
    })
}

/// Outcome of the operator-identity verification for `F^{2g} e_1`.
#[derive(Debug, Clone)]
pub struct Eq4Report {
    pub pass: bool,
    /// Valuation of the residual vector; the precision cap means the
    /// sides agree exactly at working precision.
    pub residual_valuation: u32,
}

/// Verifies that the 2g-th Frobenius power acts on the first basis
/// vector as the combination
/// `Σ_{i=1..g} Σ_{j=g+1..2g} p^{j-g} γ_{ij}^{σ^{2g-j}} F^{2g+i-j-1}`.
pub fn verify_eq4(ctx: &WittCtx, form: &GammaForm) -> Result<Eq4Report, WittError> {
    let g = form.g;
    let n = 2 * g as u32;
    if ctx.precision < n + 2 {
        return Err(WittError::PrecisionBudget {
            needed: n + 2,
            available: ctx.precision,
        });
    }
    let b = f_matrix(ctx, form);
    // F^e e1 for e = 0..2g: first columns of the iterated products.
    let mut f_pow_e1: Vec<Vec<Witt>> = Vec::with_capacity(n as usize + 1);
    f_pow_e1.push(WMat::identity(ctx, 2 * g).column(0));
    let mut acc = b.clone();
    f_pow_e1.push(acc.column(0));
    for e in 2..=n {
        acc = acc.mul(ctx, &b.frobenius(ctx, (e - 1) % ctx.m as u32));
        f_pow_e1.push(acc.column(0));
    }
    let lhs = &f_pow_e1[n as usize];

    let mut rhs = vec![ctx.zero(); 2 * g];
    for i in 1..=g {
        for j in g + 1..=2 * g {
            let gamma_ij = form.gamma.at(i - 1, j - 1);
            if ctx.is_zero(gamma_ij) {
                continue;
            }
            let twist = (2 * g - j) as u32;
            let coeff = ctx.scale(
                &ctx.frobenius(gamma_ij, twist % ctx.m as u32),
                ctx.p.pow((j - g) as u32),
            );
            let e = 2 * g + i - j - 1;
            for (slot, fe) in rhs.iter_mut().zip(&f_pow_e1[e]) {
                let t = ctx.mul(&coeff, fe);
                *slot = ctx.add(slot, &t);
            }
        }
    }

    let residual_valuation = lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| ctx.valuation(&ctx.sub(a, b)))
        .min()
        .unwrap_or(ctx.precision);
    Ok(Eq4Report {
        pass: residual_valuation >= ctx.precision - n,
        residual_valuation,
    })
}

/// The sufficient criterion: every entry in the pattern is divisible by
/// p. Only the forward implication (criterion ⇒ all slopes 1/2) holds.
pub fn ss_criterion_check(ctx: &WittCtx, form: &GammaForm) -> bool {
    criterion_pattern(form.g)
        .into_iter()
        .all(|(r, s)| ctx.valuation(form.block_entry(r, s)) >= 1)
}

/// Residue-field rank and determinant divisibility of the Frobenius
/// matrix, for structural checks.
pub fn f_matrix_residue_rank(ctx: &WittCtx, form: &GammaForm) -> usize {
    let fq = &ctx.residue;
    let n = 2 * form.g;
    let b = f_matrix(ctx, form);
    let mut data: Vec<finitefield::Elem> = (0..n * n)
        .map(|i| ctx.residue_of(&b.data[i]))
        .collect();
    finitefield::matrix_rank(fq, n, n, &mut data)
}


#[cfg(test)]
mod polygon_tests {
    use super::*;

    #[test]
    fn admissible_polygon_sets() {
        let half = |n: usize| vec![Ratio::new(1u64, 2); n];
        assert_eq!(admissible_profiles(1), vec![half(2)]);
        assert_eq!(admissible_profiles(2), vec![half(4)]);
        let third: Vec<Ratio<u64>> = [(1u64, 3); 3]
            .iter()
            .map(|&(a, b)| Ratio::new(a, b))
            .chain([Ratio::new(2u64, 3); 3])
            .collect();
        assert_eq!(admissible_profiles(3), vec![third.clone(), half(6)]);
        let g4 = admissible_profiles(4);
        assert_eq!(g4.len(), 3);
        let quarter: Vec<Ratio<u64>> = std::iter::repeat_n(Ratio::new(1u64, 4), 4)
            .chain(std::iter::repeat_n(Ratio::new(3u64, 4), 4))
            .collect();
        let mixed: Vec<Ratio<u64>> = std::iter::repeat_n(Ratio::new(1u64, 3), 3)
            .chain(std::iter::repeat_n(Ratio::new(1u64, 2), 2))
            .chain(std::iter::repeat_n(Ratio::new(2u64, 3), 3))
            .collect();
        assert!(g4.contains(&quarter));
        assert!(g4.contains(&mixed));
        assert!(g4.contains(&half(8)));
    }

    #[test]
    fn slopes_g4_pattern_samples() {
        let c = WittCtx::new(2, 4, 12).unwrap();
        for seed in 0..6 {
            let form = random_gamma(&c, 4, seed, true).unwrap();
            assert!(ss_criterion_check(&c, &form));
            let profile = newton_slopes(&c, &form, 2).unwrap();
            assert!(profile.is_all_half(), "seed {seed}: {profile}");
        }
    }
}
