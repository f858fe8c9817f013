//! Order-fixed compensated averaging.
//!
//! Every mean in the crate goes through [`MeanAcc`]: values are pushed in tick
//! order, the first value is taken as a shift, and the deviations from it are
//! Kahan-summed. A constant sequence therefore averages to exactly its value,
//! and the same sequence always produces the same bits.

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct MeanAcc {
    shift: f64,
    sum: f64,
    comp: f64,
    n: usize,
}

impl MeanAcc {
    #[inline]
    pub(crate) fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        if self.n == 0 {
            self.shift = x;
        } else {
            let y = (x - self.shift) - self.comp;
            let t = self.sum + y;
            self.comp = (t - self.sum) - y;
            self.sum = t;
        }
        self.n += 1;
    }

    #[inline]
    pub(crate) fn count(&self) -> usize {
        self.n
    }

    /// `None` when nothing was pushed.
    #[inline]
    pub(crate) fn mean(&self) -> Option<f64> {
        if self.n == 0 {
            None
        } else {
            Some(self.shift + self.sum / self.n as f64)
        }
    }
}

/// Plain Kahan sum, used where a total rather than a mean is needed.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub(crate) fn total(&self) -> f64 {
        self.sum
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = 134_217_729.0 * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Dekker's product: `a * b == p + e` exactly (barring overflow).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

/// Cascaded compensated sum: the exact rounding error of every addition is
/// collected separately, so `total()` is about as accurate as a sum carried
/// in twice the working precision.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct DdSum {
    s: f64,
    e: f64,
}

impl DdSum {
    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        let (s, err) = two_sum(self.s, x);
        self.s = s;
        self.e += err;
    }

    /// `(hi, lo)` with `hi` the nearest double to `hi + lo`.
    pub(crate) fn total(&self) -> (f64, f64) {
        two_sum(self.s, self.e)
    }
}

/// Double-double quotient, accurate to roughly `2^-100` relative.
fn dd_div(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let q1 = a.0 / b.0;
    let (p, e) = two_prod(q1, b.0);
    let r = (((a.0 - p) - e) + a.1) - q1 * b.1;
    two_sum(q1, r / b.0)
}

/// `c - p * u` for a double-double `p`, with the product taken exactly, so the
/// residual is accurate relative to itself rather than to `c`.
#[inline]
fn residual(c: f64, u: f64, p: (f64, f64)) -> f64 {
    let (m, me) = two_prod(p.0, u);
    ((c - m) - me) - p.1 * u
}

/// Statistics of the pairs `(C, U)` at `t_i` and `(C', U')` at `t_i + tau`:
/// means of the products, the four first moments, and the covariances of
/// value, volume and market-based price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairMoments {
    pub n: usize,
    pub cc: f64,
    pub uu: f64,
    pub c: f64,
    pub c_lag: f64,
    pub u: f64,
    pub u_lag: f64,
    pub cov_c: f64,
    pub cov_u: f64,
    pub cov_p: f64,
}

/// Two passes over `[C, U, C', U']` items; `pairs` must yield the same
/// sequence both times.
///
/// The first pass takes compensated means. The second takes compensated means
/// of deviation products: `(C - c)(C' - c')` for the value covariance, and the
/// same for volume. The price covariance
/// `cc / uu - (c c') / (u u')` is evaluated through the exact rewrite
///
/// `(mean(e e') + P mean(U e') + P' mean(U' e)) / uu`, with `e = C - P U`,
///
/// where `P = sum C / sum U` and `P'` likewise are carried in double-double.
/// The subtraction then happens per trade instead of between two numbers of
/// size `p^2`, which keeps the result accurate when `B_p` is small next to
/// the squared price.
pub(crate) fn pair_moments<I>(pairs: impl Fn() -> I) -> Option<PairMoments>
where
    I: Iterator<Item = [f64; 4]>,
{
    let mut m = [MeanAcc::new(); 6];
    let mut t = [DdSum::default(); 4];
    for [ca, ua, cb, ub] in pairs() {
        m[0].push(ca * cb);
        m[1].push(ua * ub);
        m[2].push(ca);
        m[3].push(cb);
        m[4].push(ua);
        m[5].push(ub);
        t[0].push(ca);
        t[1].push(ua);
        t[2].push(cb);
        t[3].push(ub);
    }
    let n = m[0].count();
    let [cc, uu, c, c_lag, u, u_lag] = [
        m[0].mean()?,
        m[1].mean()?,
        m[2].mean()?,
        m[3].mean()?,
        m[4].mean()?,
        m[5].mean()?,
    ];
    let p = dd_div(t[0].total(), t[1].total());
    let q = dd_div(t[2].total(), t[3].total());

    let mut s = [KahanSum::default(); 5];
    for [ca, ua, cb, ub] in pairs() {
        s[0].push((ca - c) * (cb - c_lag));
        s[1].push((ua - u) * (ub - u_lag));
        let e = residual(ca, ua, p);
        let f = residual(cb, ub, q);
        s[2].push(e * f);
        s[3].push(ua * f);
        s[4].push(ub * e);
    }
    let k = n as f64;
    let [cov_c, cov_u, ef, uf, ue] = s.map(|x| x.total() / k);
    // B_p is a combination of B_C and B_U, so it vanishes with both
    let cov_p = if cov_c == 0.0 && cov_u == 0.0 {
        0.0
    } else {
        (ef + (p.0 * uf + p.1 * uf) + (q.0 * ue + q.1 * ue)) / uu
    };
    Some(PairMoments {
        n,
        cc,
        uu,
        c,
        c_lag,
        u,
        u_lag,
        cov_c,
        cov_u,
        cov_p,
    })
}

/// `x^n` by repeated multiplication, left to right. `ipow(x, 2)` is `x * x`
/// bit for bit, which the zero-lag identities rely on.
#[inline]
pub(crate) fn ipow(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sequence_is_exact() {
        let c = std::f64::consts::PI * 1.0e7 / 3.0;
        let mut acc = MeanAcc::new();
        for _ in 0..1001 {
            acc.push(c);
        }
        assert_eq!(acc.mean(), Some(c));
        assert_eq!(acc.count(), 1001);
    }

    #[test]
    fn empty_has_no_mean() {
        assert_eq!(MeanAcc::new().mean(), None);
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let mut acc = MeanAcc::new();
        acc.push(0.0);
        acc.push(1.0e16);
        for _ in 0..1000 {
            acc.push(1.0);
        }
        assert_eq!(acc.sum, 1.0e16 + 1000.0);
    }

    #[test]
    fn ipow_matches_products() {
        let x = 1.1_f64;
        assert_eq!(ipow(x, 0), 1.0);
        assert_eq!(ipow(x, 1), x);
        assert_eq!(ipow(x, 2), x * x);
        assert_eq!(ipow(x, 3), x * x * x);
    }

    #[test]
    fn dd_total_and_quotient() {
        let mut acc = DdSum::default();
        for x in [0.1, 0.2, 0.3, 1e-17] {
            acc.push(x);
        }
        let (hi, lo) = acc.total();
        // exact sum of the four doubles is 0.6 + 3.7755575615628916e-17
        assert_eq!(hi, 0.6);
        assert!((lo - 3.7755575615628916e-17).abs() < 1e-32);
        let (q, r) = dd_div((1.0, 0.0), (3.0, 0.0));
        assert_eq!(q, 1.0 / 3.0);
        // 1/3 - q is about 1.85e-17
        assert!((r - 1.850371707708594e-17).abs() < 1e-30);
    }

    #[test]
    fn pair_moments_against_direct() {
        let rows = [[10.0, 2.0, 6.0, 2.0], [6.0, 2.0, 10.0, 2.0]];
        let m = pair_moments(|| rows.iter().copied()).unwrap();
        assert_eq!((m.n, m.cc, m.uu, m.c, m.u), (2, 60.0, 4.0, 8.0, 2.0));
        assert_eq!(m.cov_c, -4.0);
        assert_eq!(m.cov_u, 0.0);
        assert_eq!(m.cov_p, -1.0);
        assert!(pair_moments(std::iter::empty).is_none());
    }

    #[test]
    fn constant_pairs_have_zero_covariances() {
        let m = pair_moments(|| std::iter::repeat_n([0.7, 0.3, 0.7, 0.3], 9)).unwrap();
        assert_eq!((m.cov_c, m.cov_u, m.cov_p), (0.0, 0.0, 0.0));
    }

    #[test]
    fn kahan_total() {
        let mut k = KahanSum::default();
        for _ in 0..10 {
            k.push(0.1);
        }
        assert_eq!(k.total(), 1.0);
    }
}
