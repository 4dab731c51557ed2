"""The 2-descent dictionary: Sel_2(C_2p^j) from the 2-class group of Q(cbrt(p)).

For the rank-one family member E = C_{2p^j} (j = 1 iff p = 2 mod 9, else
j = 2), the minimal model y^2 = x^3 - 27 p^(2j) identifies the 2-descent
algebra with L = Q(cbrt(p)), and with k = rank_2(Cl(L)),

    dim Sel_2(E) = k     if eps(E) = (-1)^k,
                   k+1   otherwise,

sandwiched between the everywhere-unramified classes (dimension k) and the
square-ideal classes (dimension k+1).  The root number of the rank-one
member is -1, so Sel_2 always has odd dimension, and with trivial rational
torsion dim Sha[2] = dim Sel_2 - 1.  Nontriviality of Sha[2] is therefore
exactly the condition k >= 2.

Local Kummer-image dimensions are exposed for completeness: 0 at infinity,
2 at q = 2 (an index-2 subgroup of an order-8 group), and ell - 1 at odd q,
where ell is the number of primes of L above q.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cubicfield import ClassGroupStructure, _cube_roots
from .eisenstein import _is_rational_prime
from .errors import CertificationError, UnsupportedPrimeError
from .lvalue import family_class


@dataclass(frozen=True)
class SelmerReport:
    p: int
    j: int                      # E = C_{2 p^j} is the rank-one member
    k: int                      # 2-rank of Cl(Q(cbrt p))
    epsilon: int
    sel2_dim: int
    sha2_dim: int
    sha2_nontrivial: bool
    certificate: str

    @property
    def predicted_sha2(self) -> tuple[int, ...]:
        return (2,) * self.sha2_dim

    @property
    def curve_n(self) -> int:
        return 2 * self.p**self.j


def rank_one_exponent(p: int) -> int:
    """j with C_{2p^j} the rank-one curve: 1 for p = 2 mod 9, else 2."""
    return 1 if family_class(p) == 2 else 2


def sel2_dimension(k: int, epsilon: int) -> int:
    """dim_F2 Sel_2(E) from the 2-class rank and the root number."""
    if k < 0 or epsilon not in (1, -1):
        raise ValueError("need k >= 0 and epsilon = +-1")
    return k if epsilon == (-1) ** k else k + 1


def local_image_dimension(p: int, j: int, q) -> int:
    """F_2-dimension of the local Kummer image of E = C_{2p^j} at q.

    q may be a rational prime or the string "infinity".
    """
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    if q in ("infinity", "oo", float("inf")):
        return 0
    if not _is_rational_prime(q):
        raise ValueError(f"{q} is not a prime or the infinite place")
    if q == 2:
        return 2
    if q == 3 or q == p:
        return 0                  # totally ramified: one prime above q
    # ell = number of primes of L above q; x^3 - 27 p^(2j) factors like
    # x^3 - p (27 is a cube and p^2 generates the same cubic field)
    roots = _cube_roots(p if j == 1 else p * p % q if False else p, q)
    nroots = len(_cube_roots(p**j % q, q)) if q % 3 == 1 else 1
    if q % 3 == 2:
        ell = 2                    # one linear factor, one quadratic
    else:
        ell = 3 if nroots == 3 else 1
    return ell - 1


def sha2_report(p: int, cl: ClassGroupStructure,
                check_root_number: bool | None = None) -> SelmerReport:
    """Sha[2] prediction for the rank-one curve from the class group.

    The root number is -1 for the rank-one member; for p < 200 (or when
    check_root_number is forced on) this is cross-checked against the
    functional-equation oracle and any disagreement is a hard failure.
    """
    cls = family_class(p)
    if cl.p != p:
        raise ValueError(f"class group is for p = {cl.p}, not {p}")
    j = rank_one_exponent(p)
    epsilon = -1
    if check_root_number is None:
        check_root_number = p < 200
    if check_root_number:
        from . import hecke

        eps_oracle = hecke.root_number(2 * p**j)
        if eps_oracle != epsilon:
            raise CertificationError(
                f"oracle root number {eps_oracle} for C_{2 * p**j} "
                "contradicts the rank-one selection"
            )
    k = cl.two_rank
    sel2 = sel2_dimension(k, epsilon)
    sha2 = sel2 - 1
    return SelmerReport(
        p=p, j=j, k=k, epsilon=epsilon, sel2_dim=sel2, sha2_dim=sha2,
        sha2_nontrivial=sha2 > 0, certificate=cl.certificate,
    )
