"""Certification of spectral-gap growth conditions for superpotentials.

Three largely independent routes:

1. quasi-homogeneous route — exact: weights exist, all <= 1/2, finite
   Milnor number.  Verdict Satisfied or Unknown (never numeric).
2. Laurent route — Newton polytope must contain the origin strictly in
   its interior ("convenient"), and no face system
   ``g = theta_1 g = ... = theta_n g = 0`` (g the face restriction,
   theta_i the logarithmic derivatives) may have a solution with all
   coordinates nonzero.  Exact for n <= 2 via Groebner bases with a
   Rabinowitsch variable; randomized root search for n >= 3.
3. numeric growth probe — samples ``eps*|grad f|^k - |tensor grad^k f|``
   on spheres of growing radius; can only ever report LikelySatisfied.

Numeric verdicts are never promoted to Satisfied.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groebner import groebner_basis, milnor_ring
from .poly import Monomial, Polynomial, PolyError, WeightSystem, infer_weights
from .util import PrecondError, exact_rank as _rank, rref as _rref, solve_exact as _solve_exact

SATISFIED = "Satisfied"
LIKELY = "LikelySatisfied"
UNKNOWN = "Unknown"
VIOLATED = "Violated"
UNSUPPORTED = "Unsupported"


@dataclass
class EllipticityReport:
    verdict: str
    reason: str
    details: dict = field(default_factory=dict)
    table: list[tuple[int, float, float]] | None = None  # (k, radius, min margin)
    witness: tuple[complex, ...] | None = None


# -- quasi-homogeneous route ---------------------------------------------------


def growth_exponents(weights: WeightSystem) -> tuple[tuple[Fraction, ...], bool]:
    """Per-variable growth exponents q_i / min_j(1 - q_j).

    Returns (exponents, all_at_most_one).  When every weight is <= 1/2
    the exponents are automatically <= 1.
    """
    m = min(Fraction(1) - qj for qj in weights.q)
    delta = tuple(qi / m for qi in weights.q)
    return delta, all(d <= 1 for d in delta)


def check_quasihomogeneous_ellipticity(f: Polynomial) -> EllipticityReport:
    """Exact sufficient criterion: weighted-homogeneous of total weight 1
    with all weights <= 1/2 and finite Milnor number."""
    if f.mode != "poly":
        raise PrecondError("quasi-homogeneous route needs polynomial mode")
    weights = infer_weights(f)
    if weights is None:
        return EllipticityReport(UNKNOWN, "no consistent weight system with weights in (0,1)")
    bad = [(f.names[i], q) for i, q in enumerate(weights.q) if q > Fraction(1, 2)]
    if bad:
        nm, q = bad[0]
        return EllipticityReport(UNKNOWN, f"weight of {nm} is {q} > 1/2",
                                 {"weights": weights.q})
    ring = milnor_ring(f)
    if ring.mu == math.inf:
        return EllipticityReport(UNKNOWN, "critical locus is positive-dimensional",
                                 {"weights": weights.q})
    delta, delta_ok = growth_exponents(weights)
    return EllipticityReport(
        SATISFIED,
        "weighted-homogeneous, all weights <= 1/2, isolated critical point",
        {"weights": weights.q, "mu": ring.mu, "growth_exponents": delta,
         "growth_exponents_at_most_one": delta_ok})


# -- Newton polytope -----------------------------------------------------------


@dataclass(frozen=True)
class Face:
    """A face of the Newton polytope, recorded by the support points on it."""
    points: tuple[Monomial, ...]
    dim: int


@dataclass
class NewtonPolytope:
    support: list[Monomial]
    dim: int                      # affine dimension of the hull
    vertices: list[Monomial]
    faces: list[Face]             # all nonempty faces, the polytope itself last
    facets: list[tuple[tuple[Fraction, ...], Fraction]]  # hull-coord (normal, offset)
    convenient: bool              # origin strictly interior (requires full dim)
    _origin: Monomial = None      # base point p0 of the affine hull
    _basis: list[Monomial] = None  # integer direction basis of the hull

    def hull_coords(self, point: Monomial) -> list[Fraction] | None:
        """Coordinates of point within the affine hull, or None if outside it."""
        diff = [Fraction(a - b) for a, b in zip(point, self._origin)]
        A = [[Fraction(v[i]) for v in self._basis] for i in range(len(point))]
        x = _solve_exact(A, diff)
        if x is None:
            return None
        for i in range(len(point)):
            if sum(A[i][j] * x[j] for j in range(len(x))) != diff[i]:
                return None
        return x

    def contains(self, point: Monomial) -> bool:
        c = self.hull_coords(point)
        if c is None:
            return False
        return all(sum(nu[i] * c[i] for i in range(len(c))) <= off
                   for nu, off in self.facets)


def newton_polytope(f: Polynomial) -> NewtonPolytope:
    """Exact hull, facets, full face lattice, and the convenient flag."""
    if f.is_zero():
        raise PrecondError("Newton polytope of the zero polynomial")
    pts = sorted(set(f.coeffs))
    n = f.nvars
    p0 = pts[0]
    diffs = [[Fraction(a - b) for a, b in zip(p, p0)] for p in pts]

    # integer basis of the affine hull from rref pivot rows
    red, pivots = _rref([list(r) for r in diffs]) if len(pts) > 1 else ([], [])
    d = len(pivots)
    basis: list[Monomial] = []
    used_rank = 0
    for p, row in zip(pts, diffs):
        if _rank([list(b) for b in basis] + [row]) > used_rank:
            basis.append(tuple(row))
            used_rank += 1
        if used_rank == d:
            break
    basis = [tuple(int(x) if x == int(x) else x for x in b) for b in basis]

    def coords(p):
        diff = [Fraction(a - b) for a, b in zip(p, p0)]
        A = [[Fraction(b[i]) for b in basis] for i in range(n)]
        return _solve_exact(A, diff)

    hull_pts = {p: coords(p) for p in pts}

    if d == 0:
        face = Face((pts[0],), 0)
        poly = NewtonPolytope(pts, 0, [pts[0]], [face], [], False, p0, basis)
        poly.convenient = (n == 0)
        return poly

    # facets: supporting hyperplanes spanned by d support points
    facets: dict[tuple, tuple[tuple[Fraction, ...], Fraction]] = {}
    for comb in itertools.combinations(pts, d):
        rows = [[hull_pts[p][i] - hull_pts[comb[0]][i] for i in range(d)]
                for p in comb[1:]]
        if _rank(rows) != d - 1:
            continue
        # normal: 1-dim nullspace of rows (within hull coordinates)
        red2, piv2 = _rref(rows) if rows else ([], [])
        free = [i for i in range(d) if i not in piv2]
        if len(free) != 1:
            continue
        nu = [Fraction(0)] * d
        nu[free[0]] = Fraction(1)
        for i, col in enumerate(piv2):
            nu[col] = -red2[i][free[0]]
        off = sum(nu[i] * hull_pts[comb[0]][i] for i in range(d))
        vals = [sum(nu[i] * hull_pts[p][i] for i in range(d)) - off for p in pts]
        if all(v <= 0 for v in vals):
            pass
        elif all(v >= 0 for v in vals):
            nu = [-x for x in nu]
            off = -off
        else:
            continue
        # canonicalize to primitive integer normal
        den = 1
        for x in nu + [off]:
            den = den * x.denominator // math.gcd(den, x.denominator)
        inu = [int(x * den) for x in nu]
        ioff = int(off * den)
        g = 0
        for x in inu + [ioff]:
            g = math.gcd(g, abs(x))
        if g > 1:
            inu = [x // g for x in inu]
            ioff //= g
        key = (tuple(inu), ioff)
        facets[key] = (tuple(Fraction(x) for x in inu), Fraction(ioff))
    facet_list = list(facets.values())

    def on_facet(p, fac):
        nu, off = fac
        return sum(nu[i] * hull_pts[p][i] for i in range(d)) == off

    # face lattice: closure of facet equality sets under intersection
    all_face = frozenset(pts)
    seen = {all_face}
    frontier = [all_face]
    while frontier:
        cur = frontier.pop()
        for fac in facet_list:
            nxt = frozenset(p for p in cur if on_facet(p, fac))
            if nxt and nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)

    def face_dim(points_set):
        ps = sorted(points_set)
        rows = [[hull_pts[p][i] - hull_pts[ps[0]][i] for i in range(d)] for p in ps[1:]]
        return _rank(rows)

    faces = sorted((Face(tuple(sorted(s)), face_dim(s)) for s in seen),
                   key=lambda F: (F.dim, F.points))
    vertices = sorted({F.points[0] for F in faces if F.dim == 0})

    convenient = False
    if d == n:
        zero = tuple(0 for _ in range(n))
        c0 = coords(zero)
        if c0 is not None:
            convenient = all(
                sum(nu[i] * c0[i] for i in range(d)) < off for nu, off in facet_list)

    return NewtonPolytope(pts, d, vertices, faces, facet_list, convenient, p0, basis)


# -- Laurent nondegeneracy -----------------------------------------------------


def _clear_to_poly(g: Polynomial) -> Polynomial:
    """Multiply by the monomial making all exponents nonnegative (a torus unit)."""
    if g.is_zero():
        return Polynomial.zero(g.names, "poly")
    mins = [min(m[i] for m in g.coeffs) for i in range(g.nvars)]
    shift = tuple(-min(0, mi) for mi in mins)
    out = {tuple(e + s for e, s in zip(m, shift)): c for m, c in g.coeffs.items()}
    return Polynomial(out, g.names, "poly")


def _face_system(f: Polynomial, face: Face) -> list[Polynomial]:
    face_set = set(face.points)
    g = Polynomial({m: c for m, c in f.coeffs.items() if m in face_set},
                   f.names, "laurent")
    sys = [g] + [g.theta(i) for i in range(f.nvars)]
    return [_clear_to_poly(s) for s in sys if not s.is_zero()]


def _embed(p: Polynomial, names: tuple[str, ...]) -> Polynomial:
    extra = len(names) - p.nvars
    return Polynomial({m + (0,) * extra: c for m, c in p.coeffs.items()}, names, "poly")


def _torus_system_is_empty(system: list[Polynomial], names: tuple[str, ...]) -> bool:
    """Exact: no common zero with all coordinates nonzero (algebraically closed)."""
    n = len(names)
    wnames = names + ("_w",)
    gens = [_embed(s, wnames) for s in system]
    prod = Polynomial.monomial(tuple([1] * n + [1]), 1, wnames)
    gens.append(Polynomial.constant(1, wnames) - prod)
    gb = groebner_basis(gens, "grevlex")
    return gb.contains_one()


def _rational_roots(p: Polynomial) -> list[Fraction]:
    """All rational roots of a univariate polynomial over Q."""
    # scale to integer coefficients
    den = 1
    for c in p.coeffs.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    ic = {m[0]: int(c * den) for m, c in p.coeffs.items()}
    if not ic:
        return []
    lo = min(ic)
    ic = {e - lo: v for e, v in ic.items()}  # strip powers of z (z=0 excluded anyway)
    deg = max(ic)
    a0 = ic.get(0, 0)
    an = ic[deg]
    if a0 == 0:
        # all terms divisible by z after stripping cannot happen; guard anyway
        return []
    def divisors(k):
        k = abs(k)
        out = set()
        for i in range(1, int(math.isqrt(k)) + 1):
            if k % i == 0:
                out.update((i, k // i))
        return sorted(out)
    roots = []
    for pnum in divisors(a0):
        for qden in divisors(an):
            for sgn in (1, -1):
                cand = Fraction(sgn * pnum, qden)
                val = sum(v * cand ** e for e, v in ic.items())
                if val == 0 and cand not in roots:
                    roots.append(cand)
    return roots


def _poly_gcd_univariate(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd over Q[z]."""
    def degree(p):
        return max((m[0] for m in p.coeffs), default=-1)

    def rem(p, q):
        dq = degree(q)
        lcq = q.coeffs[(dq,)]
        while not p.is_zero() and degree(p) >= dq:
            dp = degree(p)
            c = p.coeffs[(dp,)] / lcq
            p = p - Polynomial.monomial((dp - dq,), c, p.names) * q
        return p

    while not b.is_zero():
        a, b = b, rem(a, b)
    if a.is_zero():
        return a
    lc = a.coeffs[(degree(a),)]
    return a * (Fraction(1) / lc)


def _newton_witness_search(system: list[Polynomial], nvars: int, seed: int,
                           starts: int = 200, tol: float = 1e-10):
    """Damped Gauss-Newton from random torus starts; returns a witness or None."""
    rng = np.random.default_rng(seed)
    derivs = [[s.diff(i) for i in range(nvars)] for s in system]

    def F(z):
        return np.array([s.eval_complex(z) for s in system])

    def J(z):
        return np.array([[derivs[k][i].eval_complex(z) for i in range(nvars)]
                         for k in range(len(system))])

    for _ in range(starts):
        logmod = rng.uniform(-1.5, 1.5, nvars)
        phase = rng.uniform(0, 2 * np.pi, nvars)
        z = np.exp(logmod + 1j * phase)
        for _ in range(60):
            Fz = F(z)
            res = np.linalg.norm(Fz)
            if res < tol:
                break
            step, *_ = np.linalg.lstsq(J(z), -Fz, rcond=None)
            t = 1.0
            improved = False
            for _ in range(30):
                znew = z + t * step
                if np.all(np.abs(znew) > 1e-8) and \
                   np.linalg.norm(F(znew)) < res * (1 - 1e-4 * t):
                    z, improved = znew, True
                    break
                t *= 0.5
            if not improved:
                break
        if np.linalg.norm(F(z)) < tol and np.all(np.abs(z) > 1e-6):
            return tuple(complex(v) for v in z)
    return None


def check_laurent_nondegenerate(f: Polynomial, seed: int = 0) -> EllipticityReport:
    """Face-by-face torus-solvability of g = theta_1 g = ... = theta_n g = 0.

    Exact verdict for n <= 2 (Groebner + Rabinowitsch); randomized search
    for n >= 3 can only return LikelySatisfied or Violated with witness.
    A convenient Newton polytope is a precondition.
    """
    if f.mode != "laurent":
        f = Polynomial(dict(f.coeffs), f.names, "laurent")
    poly = newton_polytope(f)
    if not poly.convenient:
        raise PrecondError("Newton polytope does not contain the origin "
                           "strictly in its interior")
    n = f.nvars
    exact = n <= 2
    per_face = []
    for face in poly.faces:
        system = _face_system(f, face)
        if not system:
            continue
        if exact:
            empty = _torus_system_is_empty(system, f.names)
            if not empty:
                witness = _exact_witness(system, f, seed)
                per_face.append((face, VIOLATED, witness))
            else:
                per_face.append((face, SATISFIED, None))
        else:
            w = _newton_witness_search(system, n, seed)
            per_face.append((face, VIOLATED if w else LIKELY, w))

    details = {"faces": [(list(face.points), verdict) for face, verdict, _ in per_face],
               "dim": poly.dim, "vertices": poly.vertices}
    for face, verdict, witness in per_face:
        if verdict == VIOLATED:
            return EllipticityReport(
                VIOLATED,
                f"face {list(face.points)} has a torus solution",
                details, witness=witness)
    if exact:
        return EllipticityReport(SATISFIED, "no face system has a torus solution",
                                 details)
    return EllipticityReport(LIKELY, "no torus solution found by randomized search",
                             details)


def _exact_witness(system: list[Polynomial], f: Polynomial, seed: int):
    """Best-effort witness for a violated face system (verdict already exact)."""
    n = f.nvars
    if n == 1:
        g = system[0]
        for s in system[1:]:
            g = _poly_gcd_univariate(g, s)
        if not g.is_zero():
            roots = [r for r in _rational_roots(g) if r != 0]
            if roots:
                return (complex(roots[0]),)
            # fall back to a numeric root of the gcd
            deg = max(m[0] for m in g.coeffs)
            arr = [float(g.coeffs.get((k,), 0)) for k in range(deg, -1, -1)]
            for r in np.roots(arr):
                if abs(r) > 1e-8:
                    return (complex(r),)
    return _newton_witness_search(system, n, seed)


# -- numeric growth table --------------------------------------------------------


def numeric_growth_table(f: Polynomial, k_max: int = 3,
                         radii: tuple = (2.0, 4.0, 8.0, 16.0, 32.0),
                         directions: int = 64, eps: float = 0.1,
                         seed: int = 0) -> EllipticityReport:
    """Sample eps*|grad f|^k - |grad^k f| over spheres of growing radius.

    Laurent inputs are probed in logarithmic coordinates (derivatives
    become the exponent-scaling operators, points z = exp(r*w)).  The
    tensor norm uses multinomial weights: |grad^k f|^2 =
    sum_{|a|=k} (k!/a!) |D^a f|^2.  Verdict is LikelySatisfied iff every
    k-row is positive and strictly increasing over the last three radii;
    numeric evidence is never promoted to Satisfied.
    """
    if k_max < 2:
        raise PrecondError("k_max must be at least 2")
    if not radii:
        raise PrecondError("need at least one radius")
    laurent = f.mode == "laurent"
    n = f.nvars

    def D(p, i):
        return p.theta(i) if laurent else p.diff(i)

    # derivative tensors per order: list of (multinomial weight, polynomial)
    tensors: dict[int, list[tuple[float, Polynomial]]] = {}
    for k in range(1, k_max + 1):
        entries = []
        for alpha in itertools.product(range(k + 1), repeat=n):
            if sum(alpha) != k:
                continue
            p = f
            for i, a in enumerate(alpha):
                for _ in range(a):
                    p = D(p, i)
            w = math.factorial(k)
            for a in alpha:
                w //= math.factorial(a)
            entries.append((float(w), p))
        tensors[k] = entries

    rng = np.random.default_rng(seed)
    if laurent:
        # infinity on the torus means the log-modulus leaves every compact
        # set; phases are compact directions, so sample them uniformly and
        # put the radius entirely on the modulus
        v = rng.normal(size=(directions, n))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        phases = rng.uniform(0, 2 * np.pi, size=(directions, n))

        def point(r, idx):
            return np.exp(r * v[idx] + 1j * phases[idx])
    else:
        dirs = rng.normal(size=(directions, n)) + 1j * rng.normal(size=(directions, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

        def point(r, idx):
            return r * dirs[idx]

    rows: list[tuple[int, float, float]] = []
    for k in range(2, k_max + 1):
        for r in radii:
            margins = []
            for idx in range(directions):
                z = point(r, idx)
                grad2 = sum(abs(p.eval_complex(z)) ** 2 for _, p in tensors[1])
                tens2 = sum(wt * abs(p.eval_complex(z)) ** 2 for wt, p in tensors[k])
                margins.append(eps * grad2 ** (k / 2) - math.sqrt(tens2))
            rows.append((k, float(r), float(min(margins))))

    ok = True
    tail = min(3, len(radii))
    for k in range(2, k_max + 1):
        krows = [m for kk, _, m in rows if kk == k][-tail:]
        if not all(m > 0 for m in krows):
            ok = False
        if not all(b > a for a, b in zip(krows, krows[1:])):
            ok = False
    verdict = LIKELY if ok else UNKNOWN
    reason = ("sampled margins positive and increasing at the largest radii"
              if ok else "sampled margins fail to grow")
    return EllipticityReport(verdict, reason, {"eps": eps, "directions": directions},
                             table=rows)


def growth_table_csv(report: EllipticityReport) -> str:
    lines = ["k,radius,min_margin"]
    for k, r, m in report.table or []:
        lines.append(f"{k},{r},{m}")
    return "\n".join(lines) + "\n"


def crepant_resolution_report() -> EllipticityReport:
    """Resolved-orbifold geometries need an explicit ALE metric, which no
    finite procedure here provides."""
    return EllipticityReport(UNSUPPORTED,
                             "resolved-orbifold target geometries are out of scope: "
                             "no computable asymptotically-flat metric is available")
