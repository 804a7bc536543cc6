//! Thomas-algorithm kernels for one-dimensional Cayley sweeps.
//!
//! A sweep along one axis solves, for every grid line,
//!
//! ```text
//! (1 + a H₁) ψ' = (1 - a H₁) ψ,    H₁ = -½ D₂ + g − 2β
//! ```
//!
//! where `D₂` is the three-point second difference with zero Dirichlet data
//! outside the lattice, `β = 1/(2h²)` and `g = 2β + W` collects the diagonal
//! (kinetic diagonal plus the share `W` of the potential handled by this
//! sweep). The off-diagonal of `a H₁` is the constant `-aβ`.
//!
//! `a = i·τ/2` gives the unitary real-time Cayley factor for a sub-step `τ`;
//! `a = τ/2` gives the imaginary-time (diffusive) factor.

use ndarray::{ArrayViewMut2, Axis};

use crate::{Error, Result, C64};

/// Per-point arithmetic of one Cayley line solve.
pub(crate) trait Cayley: Copy + Send + Sync {
    /// Right-hand side `(1 - a H₁) ψ` at one point; `nbr` is the sum of the
    /// two neighbours.
    fn rhs(&self, psi: C64, nbr: C64, g: f64) -> C64;
    /// Pivot `d - c·cp_prev` of the forward elimination.
    fn pivot(&self, g: f64, cp_prev: C64) -> C64;
    /// Modified super-diagonal `c / pivot`.
    fn upper(&self, inv: C64) -> C64;
    /// Modified right-hand side `(r - c·rp_prev) / pivot`.
    fn reduced(&self, r: C64, rp_prev: C64, inv: C64) -> C64;
}

/// General complex coefficient `a`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct GeneralCayley {
    a: C64,
    /// `a·β`, the negated off-diagonal.
    ab: C64,
}

impl GeneralCayley {
    pub(crate) fn new(a: C64, beta: f64) -> Self {
        GeneralCayley { a, ab: a * beta }
    }
}

impl Cayley for GeneralCayley {
    #[inline(always)]
    fn rhs(&self, psi: C64, nbr: C64, g: f64) -> C64 {
        psi - self.a * (psi * g) + self.ab * nbr
    }

    #[inline(always)]
    fn pivot(&self, g: f64, cp_prev: C64) -> C64 {
        C64::new(1.0, 0.0) + self.a * g + self.ab * cp_prev
    }

    #[inline(always)]
    fn upper(&self, inv: C64) -> C64 {
        -self.ab * inv
    }

    #[inline(always)]
    fn reduced(&self, r: C64, rp_prev: C64, inv: C64) -> C64 {
        (r + self.ab * rp_prev) * inv
    }
}

/// Real-time factor `a = iα`, with the purely imaginary products unrolled.
#[derive(Clone, Copy, Debug)]
pub(crate) struct UnitaryCayley {
    alpha: f64,
    kappa: f64,
}

impl UnitaryCayley {
    pub(crate) fn new(alpha: f64, beta: f64) -> Self {
        UnitaryCayley {
            alpha,
            kappa: alpha * beta,
        }
    }
}

impl Cayley for UnitaryCayley {
    #[inline(always)]
    fn rhs(&self, psi: C64, nbr: C64, g: f64) -> C64 {
        // ψ - i(αgψ - κ·nbr)
        let ag = self.alpha * g;
        let q_re = ag * psi.re - self.kappa * nbr.re;
        let q_im = ag * psi.im - self.kappa * nbr.im;
        C64::new(psi.re + q_im, psi.im - q_re)
    }

    #[inline(always)]
    fn pivot(&self, g: f64, cp_prev: C64) -> C64 {
        // 1 + iαg + iκ·cp_prev
        C64::new(
            1.0 - self.kappa * cp_prev.im,
            self.alpha * g + self.kappa * cp_prev.re,
        )
    }

    #[inline(always)]
    fn upper(&self, inv: C64) -> C64 {
        // -iκ·inv
        C64::new(self.kappa * inv.im, -self.kappa * inv.re)
    }

    #[inline(always)]
    fn reduced(&self, r: C64, rp_prev: C64, inv: C64) -> C64 {
        // (r + iκ·rp_prev)·inv
        let t = C64::new(
            r.re - self.kappa * rp_prev.im,
            r.im + self.kappa * rp_prev.re,
        );
        t * inv
    }
}

#[inline(always)]
fn reciprocal(p: C64) -> (C64, bool) {
    let n = p.re * p.re + p.im * p.im;
    let ok = n > 0.0 && n.is_finite();
    let s = 1.0 / n;
    (C64::new(p.re * s, -p.im * s), ok)
}

fn breakdown() -> Error {
    Error::Numerical("zero or non-finite pivot in tridiagonal solve".into())
}

/// Scratch storage for batched plane solves.
#[derive(Default)]
pub(crate) struct PlaneScratch {
    upper: Vec<C64>,
    reduced: Vec<C64>,
    diag: Vec<f64>,
}

/// Solves every line of a plane in one pass.
///
/// Row `m` of `plane` holds the values at line position `m`; each column is
/// an independent line and rows must be contiguous. `diag(m, out)` fills the
/// diagonal term `g` for row `m`.
pub(crate) fn solve_plane<K, D>(
    kernel: K,
    plane: &mut ArrayViewMut2<'_, C64>,
    mut diag: D,
    scratch: &mut PlaneScratch,
) -> Result<()>
where
    K: Cayley,
    D: FnMut(usize, &mut [f64]),
{
    let (n_line, n_batch) = plane.dim();
    let len = n_line * n_batch;
    scratch.upper.resize(len, C64::new(0.0, 0.0));
    scratch.reduced.resize(len, C64::new(0.0, 0.0));
    scratch.diag.resize(n_batch, 0.0);
    let PlaneScratch {
        upper,
        reduced,
        diag: g,
    } = scratch;

    let zero = vec![C64::new(0.0, 0.0); n_batch];
    let src = plane.view();
    let row = |m: usize| {
        src.index_axis(Axis(0), m)
            .to_slice()
            .expect("plane rows must be contiguous")
    };
    let mut ok = true;
    for m in 0..n_line {
        diag(m, g);
        let cur = row(m);
        let prev = if m > 0 { row(m - 1) } else { &zero[..] };
        let next = if m + 1 < n_line {
            row(m + 1)
        } else {
            &zero[..]
        };
        let (done_u, rest_u) = upper.split_at_mut(m * n_batch);
        let (done_r, rest_r) = reduced.split_at_mut(m * n_batch);
        let out_u = &mut rest_u[..n_batch];
        let out_r = &mut rest_r[..n_batch];
        if m == 0 {
            for b in 0..n_batch {
                let r = kernel.rhs(cur[b], prev[b] + next[b], g[b]);
                let (inv, good) = reciprocal(kernel.pivot(g[b], C64::new(0.0, 0.0)));
                ok &= good;
                out_u[b] = kernel.upper(inv);
                out_r[b] = kernel.reduced(r, C64::new(0.0, 0.0), inv);
            }
        } else {
            let up = &done_u[(m - 1) * n_batch..];
            let rp = &done_r[(m - 1) * n_batch..];
            for b in 0..n_batch {
                let r = kernel.rhs(cur[b], prev[b] + next[b], g[b]);
                let (inv, good) = reciprocal(kernel.pivot(g[b], up[b]));
                ok &= good;
                out_u[b] = kernel.upper(inv);
                out_r[b] = kernel.reduced(r, rp[b], inv);
            }
        }
    }
    if !ok {
        return Err(breakdown());
    }

    // back substitution in the scratch rows, then copy out
    for m in (0..n_line - 1).rev() {
        let (head, tail) = reduced.split_at_mut((m + 1) * n_batch);
        let cur = &mut head[m * n_batch..];
        let u = &upper[m * n_batch..(m + 1) * n_batch];
        for b in 0..n_batch {
            cur[b] -= u[b] * tail[b];
        }
    }
    for (m, mut out) in plane.outer_iter_mut().enumerate() {
        out.as_slice_mut()
            .expect("plane rows must be contiguous")
            .copy_from_slice(&reduced[m * n_batch..(m + 1) * n_batch]);
    }
    Ok(())
}

/// Scratch storage for single-line solves.
#[derive(Default)]
pub(crate) struct LineScratch {
    upper: Vec<C64>,
    reduced: Vec<C64>,
}

/// Solves one contiguous line in place. `g[m]` is the diagonal term.
pub(crate) fn solve_line<K: Cayley>(
    kernel: K,
    line: &mut [C64],
    g: impl Fn(usize) -> f64,
    scratch: &mut LineScratch,
) -> Result<()> {
    let n = line.len();
    scratch.upper.resize(n, C64::new(0.0, 0.0));
    scratch.reduced.resize(n, C64::new(0.0, 0.0));
    let (upper, reduced) = (&mut scratch.upper, &mut scratch.reduced);

    let zero = C64::new(0.0, 0.0);
    let mut ok = true;
    let mut prev = zero;
    let mut up = zero;
    let mut rp = zero;
    for m in 0..n {
        let cur = line[m];
        let next = if m + 1 < n { line[m + 1] } else { zero };
        let gm = g(m);
        let r = kernel.rhs(cur, prev + next, gm);
        let (inv, good) = reciprocal(kernel.pivot(gm, up));
        ok &= good;
        up = kernel.upper(inv);
        rp = kernel.reduced(r, rp, inv);
        upper[m] = up;
        reduced[m] = rp;
        prev = cur;
    }
    if !ok {
        return Err(breakdown());
    }
    let mut next = reduced[n - 1];
    line[n - 1] = next;
    for m in (0..n - 1).rev() {
        next = reduced[m] - upper[m] * next;
        line[m] = next;
    }
    Ok(())
}
