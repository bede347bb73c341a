"""Spectral analysis of the twisted Laplacians on the grid.

The numeric half of the package: lowest-eigenpair solves with a
certified kernel count, Hodge decomposition by deflated Green solves,
the order-by-order splitting of a harmonic form against the
degree-raising pair of differentials, cutoff homotopy operators with a
second-order consistency check, the comparison between the twisted
Dolbeault and twisted de Rham harmonic spaces, and Sobolev-style norm
probes.

Eigenproblems are matrix problems on the scaled flat vectors of
``forms.pack``, where the standard dot product equals the weighted L²
product, so an ordinary Hermitian eigensolve is the right tool.  The
sparse backend uses shift-invert Lanczos; the dense backend (used with
the trigonometric derivative where matrices are full) runs subspace
iteration with a single LU factorization followed by Rayleigh–Ritz
extraction.  All randomness is seeded, and eigenvector phases are
normalized, so repeated runs give identical output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..poly import Polynomial
from ..util import ComputeError, PrecondError
from .forms import DEGREE_SECTORS, DiscreteForm, inner, norm
from .forms import wedge_pairing
from .grid import Grid, build_grid, refine
from .operators import Operators

DEFAULT_GAP_THRESHOLD = 1e-3
GAP_RATIO = 100.0  # certification: first excluded / last included


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest entry is real positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        idx = int(np.argmax(np.abs(out[:, j])))
        pivot = out[idx, j]
        if abs(pivot) > 0:
            out[:, j] *= np.conj(pivot) / abs(pivot)
    return out


def _lowest_pairs(M, k: int, seed: int, dense: bool):
    """Lowest k eigenpairs of a Hermitian PSD matrix (vals ascending)."""
    n = M.shape[0]
    if dense:
        k = min(k, n - 1)
        block = min(n, k + 6)
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, block)) + 1j * rng.standard_normal((n, block))
        X, _ = np.linalg.qr(X)
        scale = max(float(np.mean(np.abs(np.diagonal(M)))), 1e-30)
        shifted = np.array(M, dtype=complex)
        shifted.flat[::n + 1] += 1e-9 * scale
        lu = sla.lu_factor(shifted, overwrite_a=True)
        for _ in range(30):
            X = sla.lu_solve(lu, X)
            X, _ = np.linalg.qr(X)
        H = X.conj().T @ (M @ X)
        H = 0.5 * (H + H.conj().T)
        w, V = np.linalg.eigh(H)
        vals = w[:k].real
        vecs = X @ V[:, :k]
    else:
        k = min(k, n - 2)
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        Mc = M.tocsc()
        try:
            vals, vecs = spla.eigsh(Mc, k=k, sigma=-1e-6, which="LM",
                                    v0=v0, tol=1e-12, maxiter=1000)
        except spla.ArpackNoConvergence as exc:
            # clustered spectra (e.g. vanishing twist) may stall; keep
            # whatever pairs did converge
            vals, vecs = exc.eigenvalues, exc.eigenvectors
            if vals.size == 0:
                raise ComputeError(
                    "eigensolver failed to converge on any pair") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order].real, vecs[:, order]
        # The general-mode Arnoldi solver returns linearly independent but
        # not mutually orthogonal vectors inside (near-)degenerate
        # clusters.  One Rayleigh-Ritz pass over the returned span
        # restores orthonormality to rounding without leaving the span.
        Q, _ = np.linalg.qr(vecs)
        H = Q.conj().T @ (M @ Q)
        H = 0.5 * (H + H.conj().T)
        w, V = np.linalg.eigh(H)
        vals, vecs = w.real, Q @ V
    vecs = _fix_phase(vecs)
    res = []
    Mv = M @ vecs
    for j in range(vecs.shape[1]):
        res.append(float(np.linalg.norm(Mv[:, j] - vals[j] * vecs[:, j])))
    return np.maximum(vals, 0.0), vecs, res


@dataclass
class SpectralResult:
    """Lowest part of one Laplacian spectrum with a certified kernel count."""

    f_text: str
    flavor: str
    degree: int
    backend: str
    half_width: float
    points: int
    gap_threshold: float
    eigenvalues: list
    residuals: list
    kernel_dim: int
    gap: float | None
    certified: bool
    reliable: bool
    notes: list
    eigenforms: list = field(repr=False, default_factory=list)

    def describe(self) -> dict:
        return {
            "f": self.f_text,
            "flavor": self.flavor,
            "degree": self.degree,
            "backend": self.backend,
            "grid": {"half_width": self.half_width, "points": self.points},
            "gap_threshold": self.gap_threshold,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "kernel_dim": self.kernel_dim,
            "gap": None if self.gap is None else float(self.gap),
            "certified": self.certified,
            "reliable": self.reliable,
            "notes": list(self.notes),
        }


def eigensolve_lowest(f: Polynomial | None, grid: Grid, degree: int = 1,
                      k: int = 8, backend: str = "fd2", seed: int = 7,
                      gap_threshold: float = DEFAULT_GAP_THRESHOLD,
                      flavor: str = "dbar_f",
                      operators: Operators | None = None) -> SpectralResult:
    ops = operators if operators is not None else Operators(grid, f, backend)
    M = ops.laplacian_matrix(flavor, degree)
    vals, vecs, res = _lowest_pairs(M, k, seed, dense=(backend == "spectral"))
    vals_list = [float(v) for v in vals]
    notes: list[str] = []

    kernel_dim = int(np.sum(vals < gap_threshold))
    certified = True
    if kernel_dim == len(vals_list) and kernel_dim > 0:
        certified = False
        notes.append("all computed eigenvalues sit below the threshold; "
                     "raise k to certify the kernel count")
        gap = None
    elif kernel_dim > 0:
        gap = vals_list[kernel_dim]
        ratio = gap / max(vals_list[kernel_dim - 1], 1e-300)
        if ratio < GAP_RATIO:
            certified = False
            notes.append(
                f"spectral gap ratio {ratio:.2e} below {GAP_RATIO:.0f}; "
                "kernel count not certified")
    else:
        gap = vals_list[0] if vals_list else None

    flat = bool(np.max(np.abs(ops.fp)) == 0.0)
    if flat:
        notes.append("gradient of the potential vanishes identically: "
                     "no confinement, kernel count is not meaningful")
    reliable = certified and not flat

    sector = DEGREE_SECTORS[degree]
    forms = [DiscreteForm.unpack(grid, sector, vecs[:, j])
             for j in range(vecs.shape[1])]
    return SpectralResult(
        f_text="0" if f is None else str(f), flavor=flavor, degree=degree,
        backend=backend, half_width=grid.half_width, points=grid.points,
        gap_threshold=gap_threshold, eigenvalues=vals_list, residuals=res,
        kernel_dim=kernel_dim, gap=gap, certified=certified,
        reliable=reliable, notes=notes, eigenforms=forms)


class SpectralContext:
    """Caches matrices, factorizations, eigensolves and kernel bases for
    one (f, grid, backend) so repeated decompositions stay cheap."""

    def __init__(self, f: Polynomial | None, grid: Grid,
                 backend: str = "fd2", seed: int = 7,
                 gap_threshold: float = DEFAULT_GAP_THRESHOLD):
        self.f = f
        self.grid = grid
        self.backend = backend
        self.seed = seed
        self.gap_threshold = gap_threshold
        self.ops = Operators(grid, f, backend)
        self._eig: dict = {}
        self._solve: dict = {}
        self._kernel: dict = {}

    def eigensolve(self, degree: int, k: int = 8,
                   flavor: str = "dbar_f") -> SpectralResult:
        key = (flavor, degree)
        cached = self._eig.get(key)
        if cached is not None and len(cached.eigenvalues) >= min(
                k, self._sector_size(degree) - 2):
            return cached
        result = eigensolve_lowest(
            self.f, self.grid, degree=degree, k=k, backend=self.backend,
            seed=self.seed, gap_threshold=self.gap_threshold, flavor=flavor,
            operators=self.ops)
        self._eig[key] = result
        return result

    def _sector_size(self, degree: int) -> int:
        n = self.grid.points ** 2
        return 2 * n if degree == 1 else n

    def kernel_matrix(self, degree: int, flavor: str = "dbar_f") -> np.ndarray:
        key = (flavor, degree)
        if key in self._kernel:
            return self._kernel[key]
        result = self.eigensolve(degree, flavor=flavor)
        sector = DEGREE_SECTORS[degree]
        cols = [form.pack(sector)
                for form in result.eigenforms[:result.kernel_dim]]
        if cols:
            K, _ = np.linalg.qr(np.column_stack(cols))
        else:
            K = np.zeros((self._sector_size(degree), 0), dtype=complex)
        self._kernel[key] = K
        return K

    def solver(self, degree: int, flavor: str = "dbar_f"):
        key = (flavor, degree)
        if key in self._solve:
            return self._solve[key]
        M = self.ops.laplacian_matrix(flavor, degree)
        if self.ops.sparse:
            scale = max(float(np.mean(np.abs(M.diagonal()))), 1e-30)
            shifted = (M + (1e-10 * scale) * sp.identity(
                M.shape[0], dtype=complex, format="csr")).tocsc()
            lu = spla.splu(shifted)
            fn = lu.solve
        else:
            n = M.shape[0]
            scale = max(float(np.mean(np.abs(np.diagonal(M)))), 1e-30)
            shifted = np.array(M, dtype=complex)
            shifted.flat[::n + 1] += 1e-10 * scale
            lu = sla.lu_factor(shifted, overwrite_a=True)
            fn = lambda b: sla.lu_solve(lu, b)  # noqa: E731
        self._solve[key] = fn
        return fn

    def green(self, degree: int, b: np.ndarray, flavor: str = "dbar_f",
              refinements: int = 3) -> np.ndarray:
        """Solve Laplacian·u = b on the orthogonal complement of the
        kernel (iteratively refined, deflated)."""
        K = self.kernel_matrix(degree, flavor)
        M = self.ops.laplacian_matrix(flavor, degree)
        solve = self.solver(degree, flavor)

        def deflate(v):
            if K.shape[1]:
                return v - K @ (K.conj().T @ v)
            return v

        r = deflate(b)
        u = deflate(solve(r))
        for _ in range(refinements):
            resid = deflate(r - M @ u)
            u = deflate(u + solve(resid))
        return u


@dataclass
class HodgeSplit:
    """Orthogonal pieces φ = harmonic + image + coimage with diagnostics."""

    harmonic: DiscreteForm
    image: DiscreteForm
    coimage: DiscreteForm
    relative_residual: float
    max_cross: float

    def describe(self) -> dict:
        return {"relative_residual": self.relative_residual,
                "max_cross": self.max_cross}


def hodge_decompose(f: Polynomial | None, grid: Grid, form: DiscreteForm,
                    backend: str = "fd2", seed: int = 7,
                    context: SpectralContext | None = None) -> HodgeSplit:
    """Split a form into harmonic, twisted-exact and twisted-coexact
    parts, degree sector by degree sector.

    The harmonic part is the projection onto the computed kernel.  The
    twisted-exact part is the orthogonal (least-squares) projection of
    the remainder onto the image of the twisted differential, obtained
    from a positive-definite solve one degree down; the final remainder
    is the coexact part.  Orthogonality of the three pieces is therefore
    a property of the construction, not of a discretization limit, and
    holds to solver precision."""
    ctx = context if context is not None else SpectralContext(
        f, grid, backend=backend, seed=seed)
    grid = ctx.grid
    if form.grid != grid:
        raise PrecondError("form grid does not match the context grid")
    A0, A1 = ctx.ops.sector_matrices("dbar_f")
    harmonic = DiscreteForm(grid)
    image = DiscreteForm(grid)
    coimage = DiscreteForm(grid)
    total = norm(form)
    if total == 0.0:
        return HodgeSplit(harmonic, image, coimage, 0.0, 0.0)
    for degree in (0, 1, 2):
        sector = DEGREE_SECTORS[degree]
        v = form.pack(sector)
        if np.linalg.norm(v) <= 1e-300 * total:
            continue
        K = ctx.kernel_matrix(degree)
        h = K @ (K.conj().T @ v) if K.shape[1] else np.zeros_like(v)
        w = v - h
        if degree == 0:
            # the adjoint differential from degree 1 hits all of the
            # non-harmonic sector: everything left is coexact
            u = ctx.green(0, w)
            c = A0.conj().T @ (A0 @ u)
            if K.shape[1]:
                c = c - K @ (K.conj().T @ c)
            e = w - c
        elif degree == 1:
            # least-squares projection onto the image of the twisted
            # differential via the degree-0 Laplacian
            x = ctx.green(0, A0.conj().T @ w)
            e = A0 @ x
            if K.shape[1]:
                e = e - K @ (K.conj().T @ e)
            c = w - e
        else:
            u = ctx.green(2, w)
            e = A1 @ (A1.conj().T @ u)
            if K.shape[1]:
                e = e - K @ (K.conj().T @ e)
            c = w - e
        harmonic = harmonic + DiscreteForm.unpack(grid, sector, h)
        image = image + DiscreteForm.unpack(grid, sector, e)
        coimage = coimage + DiscreteForm.unpack(grid, sector, c)
    recon = harmonic + image + coimage
    rel = norm(form - recon) / total
    cross = max(abs(inner(harmonic, image)), abs(inner(harmonic, coimage)),
                abs(inner(image, coimage))) / total ** 2
    return HodgeSplit(harmonic, image, coimage, float(rel), float(cross))


@dataclass
class SplittingSeries:
    """Order-by-order lift s = s0 + u s1 + … with per-order closure
    residuals for the combined differential (twisted + u·holomorphic)."""

    coefficients: list
    residuals: list
    truncation_tail: float
    harmonic_defect: float

    def describe(self) -> dict:
        return {"orders": len(self.coefficients) - 1,
                "residuals": [float(r) for r in self.residuals],
                "truncation_tail": float(self.truncation_tail),
                "harmonic_defect": float(self.harmonic_defect)}


def splitting_map(f: Polynomial, grid: Grid, form: DiscreteForm,
                  orders: int = 5, backend: str = "spectral", seed: int = 7,
                  precondition_tol: float = 1e-8,
                  context: SpectralContext | None = None) -> SplittingSeries:
    """Lift a harmonic degree-1 form φ to s(φ) = Σ uᵏ s_k with
    (twisted + u·holomorphic) s(φ) = 0 through the requested order.

    Each order solves the positive-definite top-degree Laplacian, so the
    correction s_k is automatically coexact and the recursion is
    canonical.  Requires φ harmonic to precondition_tol."""
    ctx = context if context is not None else SpectralContext(
        f, grid, backend=backend, seed=seed)
    grid = ctx.grid
    if form.grid != grid:
        raise PrecondError("form grid does not match the context grid")
    ops = ctx.ops
    A0, A1 = ops.sector_matrices("dbar_f")
    _, P1 = ops.sector_matrices("partial")
    s0 = form.pack(DEGREE_SECTORS[1])
    scale = np.linalg.norm(s0)
    if scale == 0.0:
        zero = DiscreteForm(grid)
        return SplittingSeries([zero] * (orders + 1), [0.0] * (orders + 1),
                               0.0, 0.0)
    defect = float(np.sqrt(
        np.linalg.norm(A1 @ s0) ** 2 + np.linalg.norm(A0.conj().T @ s0) ** 2
    ) / scale)
    if defect > precondition_tol:
        raise PrecondError(
            f"input form is not harmonic (defect {defect:.2e} exceeds "
            f"{precondition_tol:.2e})")
    M2 = ops.laplacian_matrix("dbar_f", 2)
    solve2 = ctx.solver(2)
    coeffs = [s0]
    residuals = [float(np.linalg.norm(A1 @ s0))]
    prev = s0
    for _ in range(1, orders + 1):
        rhs = -(P1 @ prev)
        w = solve2(rhs)
        for _ in range(2):
            w = w + solve2(rhs - M2 @ w)
        sk = A1.conj().T @ w
        residuals.append(float(np.linalg.norm(A1 @ sk - rhs)))
        coeffs.append(sk)
        prev = sk
    tail = float(np.linalg.norm(P1 @ prev))
    forms = [DiscreteForm.unpack(grid, DEGREE_SECTORS[1], c) for c in coeffs]
    return SplittingSeries(coefficients=forms, residuals=residuals,
                           truncation_tail=tail, harmonic_defect=defect)


def pairing_series(alpha, beta, twist: bool = True) -> list:
    """Formal-parameter expansion of the residue-type pairing of two
    u-series of forms: coefficient k collects Σ_{i+j=k} (−1)^j ∫αᵢ∧β̃ⱼ."""
    if isinstance(alpha, DiscreteForm):
        alpha = [alpha]
    if isinstance(beta, DiscreteForm):
        beta = [beta]
    if not alpha or not beta:
        raise PrecondError("pairing needs at least one coefficient per side")
    out = [0j] * (len(alpha) + len(beta) - 1)
    for i, a in enumerate(alpha):
        for j, b in enumerate(beta):
            out[i + j] += (-1) ** j * wedge_pairing(a, b, twist=twist)
    return out


# -- cutoff homotopy ----------------------------------------------------------


def smooth_cutoff(grid: Grid, inner_radius: float,
                  outer_radius: float) -> np.ndarray:
    """Radial C^∞ plateau function: 1 for r ≤ inner, 0 for r ≥ outer."""
    if not 0 < inner_radius < outer_radius:
        raise PrecondError("need 0 < inner_radius < outer_radius")
    if outer_radius >= grid.half_width:
        raise PrecondError("cutoff support must stay inside the box")
    r = np.abs(grid.z)
    t = np.clip((r - inner_radius) / (outer_radius - inner_radius), 0.0, 1.0)

    def bump(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    hi = bump(1.0 - t)
    lo = bump(t)
    return hi / (hi + lo)


class CutoffHomotopy:
    """Localization pair (T, R) built from a plateau cutoff and the
    pointwise gradient contraction: the anticommutator of the twisted
    differential with R equals identity minus T, up to a second-order
    discretization error supported on the cutoff transition."""

    def __init__(self, ops: Operators, cutoff: np.ndarray):
        self.ops = ops
        self.rho = cutoff
        self.q = ops.dzbar(cutoff)

    def _corrected(self, a: DiscreteForm) -> DiscreteForm:
        V = self.ops.gradient_contraction
        b = self.ops.diff("dbar", V(a)) + V(self.ops.diff("dbar", a))
        return a - b

    def tail(self, a: DiscreteForm) -> DiscreteForm:
        """R: degree-lowering correction supported off the plateau."""
        Vpsi = self.ops.gradient_contraction(self._corrected(a))
        return Vpsi.multiply_pointwise(1.0 - self.rho)

    def localize(self, a: DiscreteForm) -> DiscreteForm:
        """T: the localized remainder (cutoff multiple plus transition)."""
        Vpsi = self.ops.gradient_contraction(self._corrected(a))
        out = a.multiply_pointwise(self.rho)
        out.comps[2] = out.comps[2] + self.q * Vpsi.comps[0]
        out.comps[3] = out.comps[3] - self.q * Vpsi.comps[1]
        return out

    def identity_residual(self, a: DiscreteForm) -> DiscreteForm:
        d = self.ops.diff
        return (d("dbar_f", self.tail(a)) + self.tail(d("dbar_f", a))
                - a + self.localize(a))


def homotopy_identity_check(f: Polynomial, grid: Grid,
                            inner_radius: float | None = None,
                            outer_radius: float | None = None,
                            samples: int = 4, seed: int = 11,
                            backend: str = "fd2", levels: int = 2) -> dict:
    """Measure the localization-identity residual on Gaussian probes that
    straddle the cutoff transition, across grid refinements.

    Returns per-level worst relative residuals and their level-to-level
    ratios (≈ 4 for a second-order scheme), plus the residual on a probe
    supported deep inside the plateau (rounding level)."""
    R = grid.half_width
    inner = inner_radius if inner_radius is not None else 0.35 * R
    outer = outer_radius if outer_radius is not None else 0.60 * R
    rng = np.random.default_rng(seed)
    width = (outer - inner) / 3.0
    mid = 0.5 * (inner + outer)
    probes = []
    for _ in range(samples):
        center = mid * np.exp(2j * np.pi * rng.uniform())
        coeffs = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        probes.append((center, coeffs, width))
    interior = (0.0, np.array([1.0, 1.0, 1.0, 1.0], dtype=complex),
                inner / 6.0)

    def sample_probe(g: Grid, probe) -> DiscreteForm:
        center, coeffs, w = probe
        bump = np.exp(-(np.abs(g.z - center) / w) ** 2)
        out = DiscreteForm(g)
        for i in range(4):
            out.comps[i] = coeffs[i] * bump
        return out

    grids = [grid]
    for _ in range(levels - 1):
        grids.append(refine(grids[-1]))
    residuals = []
    interior_residual = None
    for g in grids:
        ops = Operators(g, f, backend)
        homotopy = CutoffHomotopy(ops, smooth_cutoff(g, inner, outer))
        worst = 0.0
        for probe in probes:
            a = sample_probe(g, probe)
            rel = norm(homotopy.identity_residual(a)) / norm(a)
            worst = max(worst, rel)
        residuals.append(float(worst))
        if interior_residual is None:
            a = sample_probe(g, interior)
            interior_residual = float(
                norm(homotopy.identity_residual(a)) / norm(a))
    ratios = [float(residuals[i] / residuals[i + 1])
              for i in range(len(residuals) - 1)]
    return {
        "inner_radius": inner, "outer_radius": outer,
        "grid_points": [g.points for g in grids],
        "residuals": residuals, "ratios": ratios,
        "interior_residual": interior_residual,
    }


# -- comparison with the full twisted de Rham operator ------------------------


PAIR_KEEP_THRESHOLD = 0.75


def _orthonormal(K: np.ndarray) -> np.ndarray:
    if K.shape[1] == 0:
        return K
    Q, _ = np.linalg.qr(K)
    return Q


def _paired_subspace(K_fwd: np.ndarray, K_bwd: np.ndarray) -> np.ndarray:
    """Dominant invariant subspace of the average of the two orthogonal
    projectors.  A kernel direction shared by both orientations shows up
    with projector eigenvalue near 1; an artifact attached to one
    orientation (boundary-corner modes of one-sided stencils) contributes
    only 1/2 and is dropped."""
    stacked = np.column_stack([K_fwd, K_bwd])
    if stacked.shape[1] == 0:
        return stacked
    Q, _ = np.linalg.qr(stacked)
    Pf = Q.conj().T @ _orthonormal(K_fwd)
    Pb = Q.conj().T @ _orthonormal(K_bwd)
    M = 0.5 * (Pf @ Pf.conj().T + Pb @ Pb.conj().T)
    w, V = np.linalg.eigh(M)
    keep = w > PAIR_KEEP_THRESHOLD
    return Q @ V[:, keep]


def derham_compare(f: Polynomial, grid: Grid, backend: str = "fd1",
                   k: int = 8, seed: int = 7,
                   gap_threshold: float = DEFAULT_GAP_THRESHOLD) -> dict:
    """Compare degree-1 harmonic spaces of the twisted Dolbeault and the
    twisted de Rham Laplacians.

    The identification halves the dz-component, projects onto the
    harmonic space of the half-twisted Dolbeault Laplacian (whose real
    superpotential variant shares that kernel), then multiplies by the
    unimodular phase built from the imaginary part of the potential.
    Reported: both kernel dimensions and the largest principal angle
    between the mapped space and the de Rham harmonic space.

    With the one-sided backend, kernels are computed for both stencil
    orientations and averaged: the leading truncation error changes sign
    with the orientation and cancels, and near-kernel artifacts glued to
    a boundary corner by one orientation do not pair with the other, so
    the averaged projector separates them cleanly."""
    symmetrize = backend == "fd1"
    sector = DEGREE_SECTORS[1]

    def kernel_cols(result):
        cols = [form.pack(sector)
                for form in result.eigenforms[:result.kernel_dim]]
        return (np.column_stack(cols) if cols
                else np.zeros((2 * grid.points ** 2, 0), dtype=complex))

    describes = {}
    kernels = {}
    orientations = ("fd1", "fd1b") if symmetrize else (backend,)
    per_orientation = {name: [] for name in ("dbar_f", "dbar_f_half", "d_f")}
    for orient in orientations:
        ops = Operators(grid, f, orient)
        for flavor in ("dbar_f", "dbar_f_half", "d_f"):
            res = eigensolve_lowest(f, grid, degree=1, k=k, backend=orient,
                                    seed=seed, gap_threshold=gap_threshold,
                                    flavor=flavor, operators=ops)
            per_orientation[flavor].append(kernel_cols(res))
            if orient == orientations[0]:
                describes[flavor] = res.describe()
        if orient == orientations[0]:
            phase = np.exp(-1j * ops.f_values.imag).ravel()
    for flavor, cols in per_orientation.items():
        kernels[flavor] = (_paired_subspace(*cols) if symmetrize
                           else _orthonormal(cols[0]))

    K_dol = kernels["dbar_f"]
    K_mid = kernels["dbar_f_half"]
    K_dr = kernels["d_f"]

    n = grid.points ** 2
    halve_dz = np.concatenate([0.5 * np.ones(n), np.ones(n)])
    phase2 = np.concatenate([phase, phase])

    max_angle = None
    if K_dol.shape[1] and K_mid.shape[1] and K_dr.shape[1]:
        mapped = halve_dz[:, None] * K_dol
        mapped = K_mid @ (K_mid.conj().T @ mapped)
        mapped = phase2[:, None] * mapped
        angles = sla.subspace_angles(mapped, K_dr)
        max_angle = float(np.degrees(np.max(angles))) if angles.size else 0.0
    return {
        "dolbeault": describes["dbar_f"],
        "mid": describes["dbar_f_half"],
        "derham": describes["d_f"],
        "dolbeault_dim": int(K_dol.shape[1]),
        "derham_dim": int(K_dr.shape[1]),
        "dims_agree": K_dol.shape[1] == K_dr.shape[1],
        "max_angle_degrees": max_angle,
    }


# -- norm probes ---------------------------------------------------------------


def norm_probe(f: Polynomial, grid: Grid, form: DiscreteForm, k: int = 2,
               backend: str = "fd2") -> dict:
    """Evaluate three graded Sobolev-style norms of order k on one form:
    stacked powers of the twisted Dirac operator; mixed powers of the
    gradient weight and the untwisted Dirac operator; and mixed powers of
    the gradient weight and the flat grid derivatives."""
    ops = Operators(grid, f, backend)
    g = ops.gradient_norm_field()

    # twisted Dirac powers
    chain = [form]
    for _ in range(k):
        chain.append(ops.dirac("dbar_f", chain[-1]))
    n_twisted = sum(norm(x) for x in chain)

    # gradient-weighted untwisted Dirac powers
    plain = [form]
    for _ in range(k):
        plain.append(ops.dirac("dbar", plain[-1]))
    n_graded = 0.0
    for j in range(k + 1):
        for i in range(k + 1 - j):
            weighted = plain[j] if i == 0 else plain[j].multiply_pointwise(g ** i)
            n_graded += norm(weighted)

    # gradient-weighted flat derivative stacks
    def grid_dx(a: DiscreteForm) -> DiscreteForm:
        out = DiscreteForm(grid)
        for i in range(4):
            out.comps[i] = ops.dx(a.comps[i])
        return out

    def grid_dy(a: DiscreteForm) -> DiscreteForm:
        out = DiscreteForm(grid)
        for i in range(4):
            out.comps[i] = ops.dy(a.comps[i])
        return out

    levels = [[form]]
    for _ in range(k):
        nxt = []
        for a in levels[-1]:
            nxt.append(grid_dx(a))
            nxt.append(grid_dy(a))
        levels.append(nxt)
    n_flat = 0.0
    for j in range(k + 1):
        for i in range(k + 1 - j):
            sq = 0.0
            for a in levels[j]:
                weighted = a if i == 0 else a.multiply_pointwise(g ** i)
                sq += norm(weighted) ** 2
            n_flat += float(np.sqrt(sq))

    values = [n_twisted, n_graded, n_flat]
    if min(values) <= 0:
        raise ComputeError("norm probe requires a nonzero form")
    max_ratio = max(a / b for a in values for b in values)
    return {"twisted_power": float(n_twisted), "graded": float(n_graded),
            "flat": float(n_flat), "max_ratio": float(max_ratio)}


# -- comparisons and export ----------------------------------------------------


def form_distance(a: DiscreteForm, b: DiscreteForm,
                  phase_free: bool = True) -> float:
    """Relative L² distance between unit-normalized forms, minimized over
    a global phase when phase_free (the natural eigenform comparison)."""
    na, nb = norm(a), norm(b)
    if na == 0 or nb == 0:
        raise PrecondError("cannot compare zero forms")
    overlap = inner(a, b) / (na * nb)
    if phase_free:
        return float(np.sqrt(max(0.0, 2.0 - 2.0 * abs(overlap))))
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * overlap.real)))


COMPONENT_LABELS = ("1", "dz", "dzbar", "dz^dzbar")


def write_eigenvalues_csv(result: SpectralResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue", "residual"])
        for i, (v, r) in enumerate(zip(result.eigenvalues, result.residuals)):
            writer.writerow([i, repr(float(v)), repr(float(r))])


def write_harmonic_profile_csv(result: SpectralResult, path) -> None:
    """Ground eigenform sampled over the grid: x, y, component, re, im."""
    if not result.eigenforms:
        raise ComputeError("no eigenforms to export")
    form = result.eigenforms[0]
    g = form.grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "component", "re", "im"])
        for ci in range(4):
            comp = form.comps[ci]
            if not np.any(comp):
                continue
            label = COMPONENT_LABELS[ci]
            for ix in range(g.points):
                for iy in range(g.points):
                    val = comp[ix, iy]
                    writer.writerow([repr(float(g.axis[ix])),
                                     repr(float(g.axis[iy])), label,
                                     repr(float(val.real)),
                                     repr(float(val.imag))])


__all__ = [
    "SpectralResult", "SpectralContext", "HodgeSplit", "SplittingSeries",
    "CutoffHomotopy", "eigensolve_lowest", "hodge_decompose",
    "splitting_map", "pairing_series", "smooth_cutoff",
    "homotopy_identity_check", "derham_compare", "norm_probe",
    "form_distance", "write_eigenvalues_csv", "write_harmonic_profile_csv",
    "build_grid",
]
