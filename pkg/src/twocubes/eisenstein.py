"""Exact arithmetic in Z[omega], omega = (-1+sqrt(-3))/2.

Conventions used throughout the package:

* An element a + b*omega is stored as the integer pair (a, b); its norm is
  a^2 - a*b + b^2, which is multiplicative and makes the ring Euclidean.
* "Primary" means congruent to 1 mod 3.  Every element coprime to 3 has a
  unique unit multiple that is primary (the six units hit the six residue
  classes of (Z[omega]/3)^x).  Note this is the negative of the a = 2 mod 3
  normalisation used by Ireland-Rosen; cubic residue symbols do not see the
  sign of either argument, so the classical reciprocity and supplementary
  laws carry over unchanged.
* The cubic residue symbol (alpha/beta)_3 is defined for beta coprime to 3 by
  multiplicativity from (alpha/pi)_3 = alpha^((N(pi)-1)/3) mod pi at primes.
  It depends only on the ideals, takes values in {0, 1, omega, omega^2}, and
  is computed here by Euclidean reciprocity without factoring.
"""

from __future__ import annotations

import random


class Eis:
    """Immutable Eisenstein integer a + b*omega."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __setattr__(self, *_):
        raise AttributeError("Eis is immutable")

    def __repr__(self):
        if self.b == 0:
            return f"Eis({self.a})"
        return f"Eis({self.a}, {self.b})"

    def __eq__(self, other):
        other = _coerce(other)
        return other is not None and self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a or self.b)

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Eis(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Eis(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return Eis(other.a - self.a, other.b - self.b)

    def __neg__(self):
        return Eis(-self.a, -self.b)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        # (a+b w)(c+d w) = ac - bd + (ad + bc - bd) w   using w^2 = -1 - w
        a, b, c, d = self.a, self.b, other.a, other.b
        bd = b * d
        return Eis(a * c - bd, a * d + b * c - bd)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers leave the ring")
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self):
        """Complex conjugate: a + b*omega -> (a - b) - b*omega."""
        return Eis(self.a - self.b, -self.b)

    def norm(self):
        return self.a * self.a - self.a * self.b + self.b * self.b

    def __divmod__(self, other):
        """Euclidean division with rounding-to-nearest on both coordinates.

        Ties round toward -infinity, so canonical residues are deterministic.
        The remainder satisfies N(r) <= (3/4) N(other).
        """
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not other:
            raise ZeroDivisionError("division by zero in Z[omega]")
        n = other.norm()
        num = self * other.conj()
        qa = _round_half_down(num.a, n)
        qb = _round_half_down(num.b, n)
        q = Eis(qa, qb)
        return q, self - q * other

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def divexact(self, other):
        """Division known to be exact; raises if it is not."""
        q, r = divmod(self, other)
        if r:
            raise ValueError(f"{self} is not divisible by {other}")
        return q

    def is_unit(self):
        return self.norm() == 1


def _coerce(x):
    if isinstance(x, Eis):
        return x
    if isinstance(x, int):
        return Eis(x)
    return None


def _round_half_down(n, d):
    # round(n/d) with ties toward -infinity, d > 0
    return -((d - 2 * n) // (2 * d))


ZERO = Eis(0)
ONE = Eis(1)
OMEGA = Eis(0, 1)
OMEGA2 = Eis(-1, -1)
ONE_MINUS_OMEGA = Eis(1, -1)  # the prime above 3
SQRT_MINUS_3 = Eis(1, 2)

#: the six units, indexed so UNITS[k] = omega^(k mod 3) * (-1)^(k // 3)
UNITS = (ONE, OMEGA, OMEGA2, -ONE, -OMEGA, -OMEGA2)

_OMEGA_POW = (ONE, OMEGA, OMEGA2)


def gcd(x: Eis, y: Eis) -> Eis:
    """A gcd of x and y (well defined up to units)."""
    while y:
        x, y = y, x % y
    return x


def primary_associate(alpha: Eis) -> tuple[Eis, Eis]:
    """Return (unit, primary) with unit*alpha = primary = 1 mod 3.

    The pair is unique because the six units represent the six classes of
    (Z[omega]/3)^x.  Raises ValueError when alpha is divisible by 1 - omega.
    """
    if alpha.norm() % 3 == 0:
        raise ValueError(f"{alpha} is divisible by 1 - omega; no primary associate")
    for u in UNITS:
        c = u * alpha
        if c.a % 3 == 1 and c.b % 3 == 0:
            return u, c
    raise AssertionError("unit classes mod 3 failed to cover")  # pragma: no cover


def _unit_omega_exponent(u: Eis) -> int:
    """Exponent s with u = +-omega^s."""
    for s in range(3):
        if u == _OMEGA_POW[s] or u == -_OMEGA_POW[s]:
            return s
    raise ValueError(f"{u} is not a unit")


def cubic_residue_symbol(alpha: Eis, beta: Eis) -> Eis:
    """The cubic residue symbol (alpha/beta)_3 in {0, 1, omega, omega^2}.

    beta must be coprime to 3.  Computed by Euclidean reciprocity:
    reduce, strip units and powers of 1-omega with the supplementary laws

        (omega/beta)  = omega^((N(beta)-1)/3)
        ((1-omega)/beta) = omega^((a-1)/3)     beta = a + b*omega primary,

    then swap the (now primary) pair by cubic reciprocity and repeat.
    """
    alpha = _coerce(alpha)
    beta = _coerce(beta)
    if beta is None or alpha is None:
        raise TypeError("cubic_residue_symbol needs Eisenstein integers")
    nb = beta.norm()
    if nb == 0 or nb % 3 == 0:
        raise ValueError("lower argument must be nonzero and coprime to 3")
    if nb == 1:
        return ONE
    _, beta = primary_associate(beta)
    e = 0
    while True:
        alpha = alpha % beta
        if not alpha:
            return ZERO
        t = 0
        while alpha.norm() % 3 == 0:
            alpha = alpha.divexact(ONE_MINUS_OMEGA)
            t += 1
        unit, alpha = primary_associate(alpha)
        nb = beta.norm()
        s = _unit_omega_exponent(unit)
        # stripped alpha_old = unit^{-1} * (1-omega)^t * alpha
        e = (e - s * ((nb - 1) // 3) + t * ((beta.a - 1) // 3)) % 3
        if alpha.norm() == 1:
            return _OMEGA_POW[e]
        alpha, beta = beta, alpha


def symbol_via_powering(alpha: Eis, pi: Eis) -> Eis:
    """Independent oracle: alpha^((N(pi)-1)/3) mod pi for prime pi.

    Used by the test suite; quadratic in log N(pi) but with no reciprocity.
    """
    n = pi.norm()
    if n % 3 == 0:
        raise ValueError("pi must be coprime to 3")
    if (alpha % pi) == ZERO:
        return ZERO
    k = (n - 1) // 3
    result, base = ONE, alpha % pi
    while k:
        if k & 1:
            result = (result * base) % pi
        base = (base * base) % pi
        k >>= 1
    for w in _OMEGA_POW:
        if (result - w) % pi == ZERO:
            return w
    raise ArithmeticError(f"{alpha}^((N-1)/3) not a cube root of unity mod {pi}")


def is_prime(pi: Eis) -> bool:
    """Primality in Z[omega]: split/ramified (prime norm) or inert rational."""
    n = pi.norm()
    if n <= 1:
        return False
    if _is_rational_prime(n):
        return True
    r = _isqrt(n)
    return r * r == n and r % 3 == 2 and _is_rational_prime(r)


def _isqrt(n):
    import math

    return math.isqrt(n)


def _is_rational_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# negation-symmetric residue systems mod p and 2p


class SymmetricResidueSystem:
    """Canonical representatives of (Z[omega]/m)^x, closed under negation.

    Supported moduli: m = p or m = 2p for an odd rational prime p = 2 mod 3
    (then p is inert, so the unit group has p^2-1 resp. 3(p^2-1) elements).
    Representatives are the centred residues with both coordinates in
    (-m/2, m/2], which is negation-symmetric.
    """

    __slots__ = ("modulus", "p", "reps")

    def __init__(self, modulus: int, p: int, reps: list[Eis]):
        object.__setattr__(self, "modulus", Eis(modulus))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "reps", reps)

    def __setattr__(self, *_):
        raise AttributeError("SymmetricResidueSystem is immutable")

    def __len__(self):
        return len(self.reps)

    def __iter__(self):
        return iter(self.reps)

    def canonical(self, c: Eis) -> Eis:
        m = self.modulus.a
        return Eis(_centred(c.a, m), _centred(c.b, m))


def _centred(x: int, m: int) -> int:
    h = (m - 1) // 2
    return (x + h) % m - h


def symmetric_residue_system(m: int) -> SymmetricResidueSystem:
    """Build the negation-symmetric residue system for modulus p or 2p."""
    p, two = _parse_modulus(m)
    reps = []
    for a in range(m):
        ca = _centred(a, m)
        for b in range(m):
            if a % p == 0 and b % p == 0:
                continue
            if two and a % 2 == 0 and b % 2 == 0:
                continue
            reps.append(Eis(ca, _centred(b, m)))
    return SymmetricResidueSystem(m, p, reps)


def _parse_modulus(m: int) -> tuple[int, bool]:
    """Split a supported modulus into (p, has_factor_two)."""
    p, two = (m // 2, True) if m % 2 == 0 else (m, False)
    if p <= 3 or p % 3 != 2 or not _is_rational_prime(p):
        raise ValueError(
            f"unsupported modulus {m}: need p or 2p with p an odd inert prime"
        )
    return p, two


# ---------------------------------------------------------------------------
# fast symbol-exponent tables for the O(p^2)-term sums
#
# For inert p the residue field Z[omega]/p is F_{p^2}; (c/p)_3 = omega^e with
# e the discrete log of c mod 3.  One pass by a generator fills a byte table,
# and orientation is fixed by comparing g^((p^2-1)/3) with the image of omega.


def _f2_mul(x, y, p):
    a, b = x
    c, d = y
    bd = b * d
    return ((a * c - bd) % p, (a * d + b * c - bd) % p)


def _f2_pow(x, k, p):
    r = (1, 0)
    while k:
        if k & 1:
            r = _f2_mul(r, x, p)
        x = _f2_mul(x, x, p)
        k >>= 1
    return r


def _factorize(n: int) -> list[int]:
    """Distinct prime factors; trial division then Pollard rho."""
    out = set()
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        if n % q == 0:
            out.add(q)
            while n % q == 0:
                n //= q
    stack = [n] if n > 1 else []
    while stack:
        n = stack.pop()
        if n == 1:
            continue
        if _is_rational_prime(n):
            out.add(n)
            continue
        d = _pollard_rho(n)
        stack.extend((d, n // d))
    return sorted(out)


def _pollard_rho(n: int) -> int:
    import math

    while True:
        c = random.randrange(1, n)
        x = y = random.randrange(2, n)
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


def _find_generator(p: int) -> tuple[int, int]:
    """A generator of F_{p^2}^x = (Z[omega]/p)^x for inert p."""
    order = p * p - 1
    factors = _factorize(order)
    rng = random.Random(0xE15E << 16 | p)
    while True:
        g = (rng.randrange(p), rng.randrange(p))
        if g == (0, 0):
            continue
        if all(_f2_pow(g, order // q, p) != (1, 0) for q in factors):
            return g


def symbol_exponent_table(p: int) -> bytearray:
    """Byte table T of size p*p with (a+b*omega / p)_3 = omega^T[a*p+b].

    T[0] = 255 marks the non-unit class (0,0).  Deterministic for fixed p.
    """
    if p % 3 != 2 or not _is_rational_prime(p):
        raise ValueError(f"{p} is not an inert prime")
    g = _find_generator(p)
    n = p * p
    table = bytearray(n)
    table[0] = 255
    x = (1, 0)
    ga, gb = g
    for i in range(n - 1):
        a, b = x
        table[a * p + b] = i % 3
        bd = b * gb
        x = ((a * ga - bd) % p, (a * gb + b * ga - bd) % p)
    zeta = _f2_pow(g, (n - 1) // 3, p)
    if zeta == (0, 1):
        pass  # g^((p^2-1)/3) is the image of omega: T already oriented
    elif zeta == ((p - 1) % p, (p - 1) % p):
        # image of omega^2 = -1 - omega: swap exponents 1 and 2
        table = table.translate(bytes([0, 2, 1] + list(range(3, 256))))
    else:  # pragma: no cover
        raise AssertionError("g^((p^2-1)/3) is not a primitive cube root")
    return table


#: (c/2)_3 exponent by (a mod 2, b mod 2); None marks non-units
F4_EXPONENT = {(1, 0): 0, (0, 1): 1, (1, 1): 2}


def symbol_exponent_mod2(a: int, b: int) -> int:
    """Exponent e with (a+b*omega / 2)_3 = omega^e; requires coprimality to 2."""
    try:
        return F4_EXPONENT[(a & 1, b & 1)]
    except KeyError:
        raise ValueError(f"{a}+{b}w is divisible by 2") from None
