"""High-precision analysis on the hexagonal period lattice L = Omega*Z[omega].

Everything here concerns the curve y^2 = 4x^3 - 1 (g2 = 0, g3 = 1), whose
period lattice is Omega*Z[omega] with Omega real.  The real period is
computed from the weight-6 Eisenstein series at tau = omega, whose q-series
converges at ~7.8 bits per term; the Gamma-factor closed form is kept for the
test suite as an independent oracle.

Weierstrass functions are evaluated by argument reduction into the
fundamental cell followed by the Laurent series, with one duplication step
when the reduced argument is too close to the cell boundary for fast
convergence.  Division-point tables walk the curve's group law, re-anchoring
on a direct series evaluation every WALK_ANCHOR_INTERVAL steps so the error
stays at a fixed multiple of the ulp.

gmpy2 (MPFR/MPC) supplies the arbitrary-precision arithmetic; all routines
run inside a local context, so nothing leaks into the caller's precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import ConfigurationError, LatticePointError, PrecisionError

WALK_ANCHOR_INTERVAL = 64

_PI_CACHE: dict[int, mpfr] = {}


def _ctx(bits):
    return gmpy2.context(precision=bits)


def _pi(bits):
    if bits not in _PI_CACHE:
        with _ctx(bits):
            _PI_CACHE[bits] = gmpy2.const_pi()
    return _PI_CACHE[bits]


@dataclass(frozen=True)
class PeriodData:
    """The real period Omega and the lattice constants derived from it."""

    omega: mpfr
    precision_bits: int
    a_of_L: mpfr            # sqrt(3)*Omega^2 / (2*pi)
    s2_of_L: mpfr           # 2*zeta(Omega/2)/Omega - 2*pi/(sqrt(3)*Omega^2); vanishes
    zeta_half: mpfr         # zeta(Omega/2, L) = pi/(sqrt(3)*Omega)
    wp_third: tuple[mpc, mpc]   # (wp(Omega/3), wp'(Omega/3)) = (1, -sqrt(3))
    work_bits: int


def compute_period(precision_bits: int) -> PeriodData:
    """Period data at the requested precision (>= 53 bits)."""
    if precision_bits < 53:
        raise ConfigurationError("precision_bits must be at least 53")
    wb = precision_bits + 32
    with _ctx(wb):
        pi = gmpy2.const_pi()
        sqrt3 = gmpy2.sqrt(mpfr(3))
        # E6 at tau = omega; q = exp(2*pi*i*omega) = -exp(-pi*sqrt(3))
        q = -gmpy2.exp(-pi * sqrt3)
        e6 = mpfr(1)
        qn = mpfr(1)
        n = 1
        while True:
            qn *= q
            term = 504 * _sigma5(n) * qn
            e6 -= term
            if abs(term) < gmpy2.exp2(-wb - 8):
                break
            n += 1
        # g3(Z + Z*omega) = (8/27) pi^6 E6(omega); scaling to g3 = 1 gives Omega
        omega = pi * gmpy2.sqrt(mpfr(2) / 3) * gmpy2.root(e6, 6)
        a_of_l = sqrt3 * omega * omega / (2 * pi)
        zeta_half = _zeta_series(mpc(omega / 2), omega, wb).real
        s2 = 2 * zeta_half / omega - 2 * pi / (sqrt3 * omega * omega)
        third = omega / 3
        wp3, wp3p = _wp_series(mpc(third), omega, wb)
        return PeriodData(
            omega=omega,
            precision_bits=precision_bits,
            a_of_L=a_of_l,
            s2_of_L=s2,
            zeta_half=zeta_half,
            wp_third=(wp3, wp3p),
            work_bits=wb,
        )


def _sigma5(n):
    s = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            s += d**5
            e = n // d
            if e != d:
                s += e**5
        d += 1
    return s


def period_gamma_closed_form(precision_bits: int) -> mpfr:
    """Independent closed form 2*4^(-1/3)*Gamma(1/6)*Gamma(1/2)/(3*Gamma(2/3))."""
    with _ctx(precision_bits + 16):
        g16 = gmpy2.gamma(mpfr(1) / 6)
        g12 = gmpy2.gamma(mpfr(1) / 2)
        g23 = gmpy2.gamma(mpfr(2) / 3)
        return 2 * gmpy2.root(mpfr(4), 3) ** -1 * g16 * g12 / (3 * g23)


# ---------------------------------------------------------------------------
# Laurent series of wp, wp', zeta for g2 = 0, g3 = 1
#
# wp(z) = z^-2 + sum_{k>=2} c_k z^(2k-2), c2 = 0, c3 = 1/28,
# c_k = 3/((2k+1)(k-3)) * sum_{m=2}^{k-2} c_m c_{k-m}.
# Only k = 0 mod 3 contributes (the lattice has CM by omega).

_COEFF_CACHE: dict[int, list] = {}


def _laurent_coeffs(bits):
    if bits in _COEFF_CACHE:
        return _COEFF_CACHE[bits]
    count = bits // 3 + 20
    with _ctx(bits):
        c = [mpfr(0)] * (count + 1)
        if count >= 3:
            c[3] = mpfr(1) / 28
        for k in range(4, count + 1):
            acc = mpfr(0)
            for m in range(2, k - 1):
                acc += c[m] * c[k - m]
            c[k] = 3 * acc / ((2 * k + 1) * (k - 3))
    _COEFF_CACHE[bits] = c
    return c


def _wp_series(z, omega, bits):
    """(wp(z), wp'(z)) by Laurent series; |z| must be < ~0.58*omega."""
    c = _laurent_coeffs(bits)
    z2 = z * z
    inv2 = 1 / z2
    wp = inv2
    wpp = -2 * inv2 / z
    # terms c_k z^(2k-2) and (2k-2) c_k z^(2k-3), k = 3, 6, 9, ...
    zpow = z2 * z2          # z^(2k-2) at k = 3
    step = z2 * z2 * z2
    tiny = gmpy2.exp2(-bits - 4)
    for k in range(3, len(c), 3):
        t = c[k] * zpow
        wp += t
        wpp += (2 * k - 2) * t / z
        if abs(t.real) + abs(t.imag) < tiny and k > 6:
            break
        zpow *= step
    return wp, wpp


def _zeta_series(z, omega, bits):
    """zeta(z) = 1/z - sum c_k z^(2k-1)/(2k-1); same convergence domain."""
    c = _laurent_coeffs(bits)
    zv = 1 / z
    z2 = z * z
    zpow = z2 * z2 * z      # z^(2k-1) at k = 3
    step = z2 * z2 * z2
    tiny = gmpy2.exp2(-bits - 4)
    for k in range(3, len(c), 3):
        t = c[k] * zpow / (2 * k - 1)
        zv -= t
        if abs(t.real) + abs(t.imag) < tiny and k > 6:
            break
        zpow *= step
    return zv


def reduce_to_cell(z, omega, bits):
    """z modulo Omega*Z[omega], coordinates rounded to nearest."""
    with _ctx(bits):
        z = mpc(z)
        sqrt3 = gmpy2.sqrt(mpfr(3))
        beta = _nearest_int(2 * z.imag / (omega * sqrt3))
        alpha = _nearest_int(z.real / omega + mpfr(beta) / 2)
        zr = mpc(z.real - omega * (mpfr(alpha) - mpfr(beta) / 2),
                 z.imag - omega * mpfr(beta) * sqrt3 / 2)
        return zr


def _nearest_int(x):
    return int(gmpy2.rint_round(x))


_DUP_RATIO = 0.31


def wp_value(period: PeriodData, z) -> tuple[mpc, mpc]:
    """(wp(z), wp'(z)) for z off the lattice, by reduction + series."""
    bits = period.work_bits
    with _ctx(bits):
        om = period.omega
        zr = reduce_to_cell(z, om, bits)
        if abs(zr) < om * gmpy2.exp2(-bits // 2):
            raise LatticePointError("wp evaluated on (or too close to) a lattice point")
        if abs(zr) > _DUP_RATIO * om:
            x, y = _wp_series(zr / 2, om, bits)
            return _wp_double(x, y)
        return _wp_series(zr, om, bits)


def _wp_double(x, y):
    """One duplication on y^2 = 4x^3 - 1 in (wp, wp') coordinates."""
    # with Y = y/2 the curve is Y^2 = X^3 - 1/4 and the tangent slope is
    # 3X^2 / (2Y) = 3x^2 / y
    lam = 3 * x * x / y
    x2 = lam * lam - 2 * x
    y2 = 2 * lam * (x - x2) - y
    return x2, y2


def _zeta_reduced(period: PeriodData, zr, bits):
    om = period.omega
    if abs(zr) > _DUP_RATIO * om:
        half = zr / 2
        zv = _zeta_series(half, om, bits)
        x, y = _wp_series(half, om, bits)
        return 2 * zv + 3 * x * x / y
    return _zeta_series(zr, om, bits)


def zeta_value(period: PeriodData, z) -> mpc:
    """zeta(z (mod L)); note zeta itself is only quasi-periodic, so this is
    the value at the reduced argument (what eisenstein_e1star needs)."""
    bits = period.work_bits
    with _ctx(bits):
        om = period.omega
        zr = reduce_to_cell(z, om, bits)
        if abs(zr) < om * gmpy2.exp2(-bits // 2):
            raise LatticePointError("zeta evaluated on a lattice point")
        return _zeta_reduced(period, zr, bits)


def eisenstein_e1star(period: PeriodData, z) -> mpc:
    """The non-holomorphic series zeta(z) - z*s2(L) - conj(z)/A(L).

    Genuinely periodic in z (the quasi-periods of zeta cancel against the
    conj(z)/A term), so it may be evaluated at the reduced argument, as long
    as all three terms use the same representative.
    """
    bits = period.work_bits
    with _ctx(bits):
        om = period.omega
        zr = reduce_to_cell(z, om, bits)
        if abs(zr) < om * gmpy2.exp2(-bits // 2):
            raise LatticePointError("E1* has a pole on the lattice")
        zv = _zeta_reduced(period, zr, bits)
        return zv - zr * period.s2_of_L - gmpy2.mpc(zr.real, -zr.imag) / period.a_of_L


# ---------------------------------------------------------------------------
# division values: wp at (a + b*omega) * Omega / m


@dataclass(frozen=True)
class DivisionValueTable:
    """wp, wp' at the m-division points indexed by canonical residues."""

    modulus: int
    entries: dict
    max_residual: mpfr
    precision_bits: int


def guard_bits(precision_bits: int, m: int) -> int:
    """Working precision for an m^2-term job, per the cancellation budget."""
    return precision_bits + 10 + max(0, (m * m).bit_length())


class _RowWalker:
    """Walks P_(a+b*omega) = P + Q0 along a fixed row b, re-anchoring."""

    def __init__(self, period: PeriodData, m: int, bits: int):
        self.period = period
        self.m = m
        self.bits = bits
        with _ctx(bits):
            self.om = +period.omega
            om_c = mpc(mpfr(-1) / 2, gmpy2.sqrt(mpfr(3)) / 2)
            self.omega_c = om_c
            self.step_z = self.om / m          # real
            x0, y0 = wp_value(period, mpc(self.om / m))
            self.q0 = (x0, y0 / 2)             # (X, Y) on Y^2 = X^3 - 1/4
        self.max_residual = mpfr(0)
        # steps whose chord slope passes near the pole lose ~log2(|wp|) bits
        # to cancellation; re-anchor immediately afterwards
        self.pole_threshold = float(max(16, m / 8)) ** 2

    def _direct(self, a, b):
        with _ctx(self.bits):
            z = (a + b * self.omega_c) * self.om / self.m
            x, y = wp_value(self.period, z)
            return (x, y / 2)

    def _residual(self, pt):
        x, y = pt
        r = abs(y * y - (x * x * x - mpfr(1) / 4))
        if r > self.max_residual:
            self.max_residual = +r
        return r

    def row(self, b):
        """Yield (a, wp, wp') for a = 0..m-1, skipping the lattice point.

        The caller must hold a gmpy2 context with this walker's precision;
        generators cannot own one across yields without leaking it.
        """
        m = self.m
        if b % m == 0:
            # a = 0 is the lattice point; start from a = 1
            pt = self.q0
            yield 1, pt[0], 2 * pt[1]
            start = 2
        else:
            pt = self._direct(0, b)
            yield 0, pt[0], 2 * pt[1]
            start = 1
        force_anchor = False
        for a in range(start, m):
            if force_anchor or a % WALK_ANCHOR_INTERVAL == 0:
                self._residual(pt)
                pt = self._direct(a, b)
            else:
                pt = _add(pt, self.q0)
            c = complex(pt[0])
            force_anchor = c.real * c.real + c.imag * c.imag > self.pole_threshold
            yield a, pt[0], 2 * pt[1]
        self._residual(pt)


def _add(p, q):
    """Chord-tangent addition on Y^2 = X^3 - 1/4; never the point at infinity
    along the walks used here (rows stop before wrapping past c = -1)."""
    x1, y1 = p
    x2, y2 = q
    d = x2 - x1
    if d == 0:
        if y1 == -y2:
            raise ZeroDivisionError("walk stepped onto the point at infinity")
        lam = 3 * x1 * x1 / (2 * y1)
    else:
        lam = (y2 - y1) / d
    x3 = lam * lam - x1 - x2
    y3 = lam * (x1 - x3) - y1
    return (x3, y3)


def wp_division_values(period: PeriodData, m: int, reps) -> DivisionValueTable:
    """Table of (wp(c*Omega/m), wp'(c*Omega/m)) for every representative.

    Values are produced by the group-law walk with periodic direct
    re-anchoring; the recorded residual must stay below 2^(-precision/2).
    """
    if m % 3 == 0:
        raise ValueError("modulus must be coprime to 3")
    if reps.modulus.a != m:
        raise ValueError("representative system does not match the modulus")
    bits = guard_bits(period.precision_bits, m)
    walker = _RowWalker(period, m, bits)
    wanted = {}
    for c in reps:
        wanted[(c.a % m, c.b % m)] = reps.canonical(c)
    entries = {}
    with _ctx(bits):
        for b in range(m):
            if not any((a, b) in wanted for a in range(m)):
                continue
            for a, x, y in walker.row(b):
                key = (a, b)
                if key in wanted:
                    entries[wanted[key]] = (x, y)
    tol = gmpy2.exp2(-period.precision_bits // 2)
    if walker.max_residual > tol:
        raise PrecisionError(
            f"division-value residual {walker.max_residual} exceeds {tol}; "
            "increase the working precision"
        )
    return DivisionValueTable(
        modulus=m,
        entries=entries,
        max_residual=walker.max_residual,
        precision_bits=period.precision_bits,
    )
