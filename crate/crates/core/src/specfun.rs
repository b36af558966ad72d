//! Cylindrical special functions: J_n, Y_n and H_n^(2) = J_n - jY_n for
//! integer order and real argument.
//!
//! Series sums run in double-double arithmetic so that the alternating
//! power series keeps full f64 accuracy up to the series/asymptotic
//! switch point. Above it, the Hankel amplitude/phase expansions provide
//! the order-0/1 anchors and stable recurrences produce higher orders:
//! upward for Y (dominant solution), upward for J while n <= x, and
//! Miller's normalized downward recurrence for J when n > x.

use num_complex::Complex64;

/// Series/asymptotic switch point for the order-0/1 anchors.
const SERIES_CUTOFF: f64 = 26.0;

// ---------------------------------------------------------------------------
// Double-double arithmetic (Dekker/Knuth error-free transformations).
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

const DD_EULER: Dd = Dd {
    hi: 0.5772156649015329,
    lo: -4.942915152430645e-18,
};
const DD_TWO_OVER_PI: Dd = Dd {
    hi: 0.6366197723675814,
    lo: -3.935735335036497e-17,
};
const DD_PI_OVER_4: Dd = Dd {
    hi: 0.7853981633974483,
    lo: 3.061616997868383e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ahi, alo) = split(a);
    let (bhi, blo) = split(b);
    let err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo;
    (p, err)
}

impl Dd {
    #[inline]
    fn from(a: f64) -> Self {
        Dd { hi: a, lo: 0.0 }
    }

    #[inline]
    fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[inline]
    fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = ((self.hi - p) - e + self.lo) / d;
        let (hi, lo) = quick_two_sum(q1, r);
        Dd { hi, lo }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    fn abs(self) -> f64 {
        self.value().abs()
    }
}

// ---------------------------------------------------------------------------
// Power-series evaluation (x <= SERIES_CUTOFF).
// ---------------------------------------------------------------------------

/// J_n(x) = sum_k (-1)^k (x/2)^{n+2k} / (k! (n+k)!), n >= 0.
fn bessel_j_series(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = x / 2.0;
    // Leading term (x/2)^n / n! as an interleaved product so the partial
    // products stay in range whenever the result is representable.
    let mut t0 = Dd::from(1.0);
    for i in 1..=n {
        t0 = t0.mul_f64(half).div_f64(i as f64);
        if t0.hi == 0.0 {
            return 0.0; // result underflows f64
        }
    }
    let half_sq = Dd::from(half).mul(Dd::from(half));
    let mut term = t0;
    let mut sum = t0;
    for k in 1..500u32 {
        term = term
            .mul(half_sq)
            .div_f64(k as f64)
            .div_f64((n + k) as f64)
            .neg();
        sum = sum.add(term);
        if term.abs() < 1e-35 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum.value()
}

/// Y_0 and Y_1 from the logarithmic series (A&S 9.1.11), x <= SERIES_CUTOFF.
fn bessel_y01_series(x: f64) -> (f64, f64) {
    let half = x / 2.0;
    let half_sq = Dd::from(half).mul(Dd::from(half));
    let ln_half = Dd::from((x / 2.0).ln());
    let lg = ln_half.add(DD_EULER); // ln(x/2) + gamma

    // Y_0 = (2/pi) [ (ln(x/2)+gamma) J_0 + sum_{k>=1} (-1)^{k+1} H_k (x/2)^{2k} / (k!)^2 ]
    let j0 = Dd::from(bessel_j_series(0, x));
    let mut term = Dd::from(1.0);
    let mut harmonic = Dd::from(0.0);
    let mut sum0 = Dd::from(0.0);
    for k in 1..500u32 {
        let kf = k as f64;
        term = term.mul(half_sq).div_f64(kf).div_f64(kf);
        harmonic = harmonic.add(Dd::from(1.0).div_f64(kf));
        let contrib = term.mul(harmonic);
        if k % 2 == 1 {
            sum0 = sum0.add(contrib);
        } else {
            sum0 = sum0.sub(contrib);
        }
        if contrib.abs() < 1e-35 * sum0.abs().max(1e-300) {
            break;
        }
    }
    let y0 = DD_TWO_OVER_PI.mul(lg.mul(j0).add(sum0)).value();

    // Y_1 = (2/pi) ln(x/2) J_1 - 2/(pi x)
    //       - (1/pi) sum_{k>=0} (-1)^k [psi(k+1)+psi(k+2)] (x/2)^{2k+1} / (k!(k+1)!)
    // with psi(k+1)+psi(k+2) = -2 gamma + H_k + H_{k+1}.
    let j1 = Dd::from(bessel_j_series(1, x));
    let mut term = Dd::from(half); // (x/2)^{2k+1} / (k!(k+1)!) at k=0
    let mut h_k = Dd::from(0.0);
    let mut h_k1 = Dd::from(1.0);
    let mut sum1 = Dd::from(0.0);
    for k in 0..500u32 {
        let digamma_pair = h_k.add(h_k1).sub(DD_EULER).sub(DD_EULER);
        let contrib = term.mul(digamma_pair);
        if k % 2 == 0 {
            sum1 = sum1.add(contrib);
        } else {
            sum1 = sum1.sub(contrib);
        }
        if contrib.abs() < 1e-35 * sum1.abs().max(1e-300) && k > 2 {
            break;
        }
        let kf = (k + 1) as f64;
        term = term.mul(half_sq).div_f64(kf).div_f64(kf + 1.0);
        h_k = h_k.add(Dd::from(1.0).div_f64(kf));
        h_k1 = h_k1.add(Dd::from(1.0).div_f64(kf + 1.0));
    }
    let y1 = DD_TWO_OVER_PI
        .mul(ln_half.mul(j1))
        .sub(DD_TWO_OVER_PI.div_f64(x))
        .sub(sum1.div_f64(std::f64::consts::PI))
        .value();

    (y0, y1)
}

// ---------------------------------------------------------------------------
// Hankel asymptotic expansion (x > SERIES_CUTOFF, n in {0, 1}).
// ---------------------------------------------------------------------------

/// Returns (J_n, Y_n) for n in {0, 1} via the amplitude/phase expansion
/// J = sqrt(2/(pi x)) (P cos w - Q sin w), Y = sqrt(2/(pi x)) (P sin w + Q cos w),
/// w = x - n pi/2 - pi/4. Terms are accumulated to their optimal truncation,
/// whose residual is ~e^{-2x}: negligible beyond the series cutoff.
fn bessel_jy_asymptotic(n: u32, x: f64) -> (f64, f64) {
    debug_assert!(n <= 1);
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut p = Dd::from(1.0);
    let mut q = Dd::from(0.0);
    let mut ak = Dd::from(1.0); // a_m(n) / x^m, running
    let mut prev = f64::INFINITY;
    for m in 1..60u32 {
        let odd = (2 * m - 1) as f64;
        ak = ak
            .mul_f64(mu - odd * odd)
            .div_f64(m as f64 * 8.0)
            .div_f64(x);
        let mag = ak.abs();
        if mag > prev || mag < 1e-24 {
            break; // optimal truncation reached
        }
        prev = mag;
        // sign pattern: P += (-1)^k a_{2k}/x^{2k}, Q += (-1)^k a_{2k+1}/x^{2k+1}
        match m % 4 {
            0 => p = p.add(ak),
            1 => q = q.add(ak),
            2 => p = p.sub(ak),
            3 => q = q.sub(ak),
            _ => unreachable!(),
        }
    }
    // Phase w = x - (2n+1) pi/4 in double-double, then sin/cos with the
    // low part folded in linearly.
    let w = Dd::from(x).sub(DD_PI_OVER_4.mul_f64((2 * n + 1) as f64));
    let (sw_hi, cw_hi) = w.hi.sin_cos();
    let sw = sw_hi + w.lo * cw_hi;
    let cw = cw_hi - w.lo * sw_hi;
    let amp = (2.0 / (std::f64::consts::PI * x)).sqrt();
    let j = amp * (p.value() * cw - q.value() * sw);
    let y = amp * (p.value() * sw + q.value() * cw);
    (j, y)
}

// ---------------------------------------------------------------------------
// Recurrences.
// ---------------------------------------------------------------------------

/// Miller's downward recurrence, normalized by 1 = J_0 + 2 sum_k J_{2k}.
/// Returns J_0..J_nmax. Restarts with a larger head margin until two runs
/// agree, so the declared accuracy is self-checking.
fn bessel_j_seq_miller(nmax: u32, x: f64) -> Vec<f64> {
    let mut margin = 40 + (2.0 * (nmax as f64).sqrt()) as u32;
    let mut prev_run: Option<Vec<f64>> = None;
    loop {
        let start = nmax + margin + (x as u32);
        let mut jp = Dd::from(0.0); // J_{k+1}
        let mut jc = Dd::from(1e-300); // J_k (arbitrary tiny seed)
        let mut out = vec![0.0f64; nmax as usize + 1];
        let mut norm = Dd::from(0.0);
        for k in (0..=start).rev() {
            // J_{k-1} = (2k/x) J_k - J_{k+1}; iterate storing J_k at index k
            if k <= nmax {
                out[k as usize] = jc.value();
            }
            if k % 2 == 0 {
                norm = norm.add(if k == 0 { jc } else { jc.mul_f64(2.0) });
            }
            if k > 0 {
                let jm = jc.mul_f64(2.0 * k as f64).div_f64(x).sub(jp);
                jp = jc;
                jc = jm;
                // rescale to avoid overflow of the growing solution
                if jc.hi.abs() > 1e280 {
                    let s = 1e-280;
                    jc = jc.mul_f64(s);
                    jp = jp.mul_f64(s);
                    norm = norm.mul_f64(s);
                    for v in out.iter_mut() {
                        *v *= s;
                    }
                }
            }
        }
        let scale = 1.0 / norm.value();
        for v in out.iter_mut() {
            *v *= scale;
        }
        if let Some(prev) = &prev_run {
            let agree = out.iter().zip(prev.iter()).all(|(a, b)| {
                let tol = 1e-15 * a.abs().max(b.abs()).max(1e-305);
                (a - b).abs() <= tol
            });
            if agree {
                return out;
            }
        }
        prev_run = Some(out);
        margin += 60;
        if margin > 4000 {
            return prev_run.unwrap();
        }
    }
}

/// J_0..J_nmax by upward recurrence from asymptotic anchors; valid while the
/// recurrence stays in the oscillatory region (nmax <= x).
fn bessel_j_seq_upward(nmax: u32, x: f64) -> Vec<f64> {
    let (j0, _) = bessel_jy_asymptotic(0, x);
    let (j1, _) = bessel_jy_asymptotic(1, x);
    let mut out = Vec::with_capacity(nmax as usize + 1);
    out.push(j0);
    if nmax >= 1 {
        out.push(j1);
    }
    let mut jm = Dd::from(j0);
    let mut jc = Dd::from(j1);
    for k in 1..nmax {
        let jn = jc.mul_f64(2.0 * k as f64).div_f64(x).sub(jm);
        jm = jc;
        jc = jn;
        out.push(jc.value());
    }
    out
}

/// Sequence J_0(x)..J_nmax(x) for x >= 0.
pub fn bessel_j_seq(nmax: u32, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "bessel_j requires x >= 0 (got {x})");
    if x == 0.0 {
        let mut out = vec![0.0; nmax as usize + 1];
        out[0] = 1.0;
        return out;
    }
    if x <= SERIES_CUTOFF {
        if nmax <= 1 {
            let mut out = vec![bessel_j_series(0, x)];
            if nmax == 1 {
                out.push(bessel_j_series(1, x));
            }
            return out;
        }
        return bessel_j_seq_miller(nmax, x);
    }
    if (nmax as f64) <= x {
        bessel_j_seq_upward(nmax, x)
    } else {
        bessel_j_seq_miller(nmax, x)
    }
}

/// Sequence Y_0(x)..Y_nmax(x) for x > 0. Entries whose magnitude exceeds
/// the f64 range saturate to -inf (Y_n decreases without bound as n grows
/// at fixed small x).
pub fn bessel_y_seq(nmax: u32, x: f64) -> Vec<f64> {
    assert!(
        x > 0.0,
        "bessel_y domain error: requires x > 0 (got {x}); Y_n is singular at 0"
    );
    let (y0, y1) = if x <= SERIES_CUTOFF {
        bessel_y01_series(x)
    } else {
        let (_, y0) = bessel_jy_asymptotic(0, x);
        let (_, y1) = bessel_jy_asymptotic(1, x);
        (y0, y1)
    };
    let mut out = Vec::with_capacity(nmax as usize + 1);
    out.push(y0);
    if nmax >= 1 {
        out.push(y1);
    }
    // Upward recurrence follows the dominant solution: stable for Y.
    let mut ym = Dd::from(y0);
    let mut yc = Dd::from(y1);
    let mut log_scale = 0.0f64; // accumulated ln of the rescale factor
    for k in 1..nmax {
        let yn = yc.mul_f64(2.0 * k as f64).div_f64(x).sub(ym);
        ym = yc;
        yc = yn;
        if yc.hi.abs() > 1e280 {
            let s = 1e-280;
            yc = yc.mul_f64(s);
            ym = ym.mul_f64(s);
            log_scale += 280.0 * std::f64::consts::LN_10;
        }
        let ln_mag = yc.hi.abs().ln() + log_scale;
        if ln_mag > 709.0 {
            out.push(if yc.hi < 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            });
        } else {
            out.push(yc.value() * log_scale.exp());
        }
    }
    out
}

/// Bessel function of the first kind, integer order. Total for x >= 0;
/// negative orders resolve through J_{-n} = (-1)^n J_n.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let (m, sign) = if n < 0 {
        (n.unsigned_abs(), if n % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (n as u32, 1.0)
    };
    if x <= SERIES_CUTOFF {
        assert!(x >= 0.0, "bessel_j requires x >= 0 (got {x})");
        return sign * bessel_j_series(m, x);
    }
    sign * bessel_j_seq(m, x)[m as usize]
}

/// Bessel function of the second kind, integer order; x > 0 required.
/// Negative orders resolve through Y_{-n} = (-1)^n Y_n.
pub fn bessel_y(n: i32, x: f64) -> f64 {
    let (m, sign) = if n < 0 {
        (n.unsigned_abs(), if n % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (n as u32, 1.0)
    };
    sign * bessel_y_seq(m, x)[m as usize]
}

/// Hankel function of the second kind: H_n^(2)(x) = J_n(x) - j Y_n(x).
pub fn hankel2(n: i32, x: f64) -> Complex64 {
    Complex64::new(bessel_j(n, x), -bessel_y(n, x))
}

/// Sequence H_0^(2)(x)..H_nmax^(2)(x).
pub fn hankel2_seq(nmax: u32, x: f64) -> Vec<Complex64> {
    let j = bessel_j_seq(nmax, x);
    let y = bessel_y_seq(nmax, x);
    j.into_iter()
        .zip(y)
        .map(|(j, y)| Complex64::new(j, -y))
        .collect()
}
