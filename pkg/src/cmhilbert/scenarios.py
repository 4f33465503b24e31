"""Registry of named verification scenarios.

Every scenario is a function ``(params, rng) -> Outcome``.  Parameters have
documented defaults (shown by ``cmverify list``) and may be overridden from
a config file; randomness comes only from the seeded ``rng``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import atomic
from .atomic import eta, zeta
from .cylinder import (
    BinaryAddress,
    CylinderState,
    SampledFactor,
    build_family,
    contract_head,
    contract_tail,
    cylinder_distance,
    cylinder_inner,
    product,
    product_inner_factorization_check,
    tensor,
)
from .grid import (
    Grid,
    GaussianWave,
    grid_inner,
    grid_norm,
    heat_1d_oracle,
)
from .laplacian import (
    HEAT,
    SCHRODINGER,
    contraction_derivative_check,
    evolve_head,
    evolve_heat,
    evolve_schrodinger,
    factorization_check,
    h1_inner,
    h1_profile,
    laplace_resolvent_oracle,
    laplacian,
    resolvent,
    translation_invariance_check,
)
from .profiles import BUMP
from .random_states import random_atomic, random_bandlimited, random_complex
from .translation import (
    ShiftVector,
    derivative,
    difference_quotient,
    strong_continuity_check,
    symmetry_check,
    translate,
    translate_atomic,
)

# topic areas every catalog must cover
TOPICS = (
    "square-root calculus",
    "translation group",
    "H1 form and Laplacian",
    "product measures",
    "tensor embedding and semigroups",
    "orthonormal family",
    "translation invariance",
)


@dataclass
class Check:
    name: str
    lhs: object
    rhs: object
    residual: float
    tolerance: float
    count: int = 1

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


@dataclass
class Outcome:
    checks: list[Check]
    series: list[tuple] | None = None


class Recorder:
    """Keeps the worst case per check name."""

    def __init__(self):
        self._checks: dict[str, Check] = {}

    def add(self, name: str, lhs, rhs, tolerance: float, residual: float | None = None) -> None:
        if residual is None:
            residual = abs(complex(lhs) - complex(rhs))
        residual = float(residual)
        old = self._checks.get(name)
        if old is None:
            self._checks[name] = Check(name, lhs, rhs, residual, tolerance)
            return
        old.count += 1
        if not residual <= old.residual:
            old.lhs, old.rhs, old.residual = lhs, rhs, residual

    def outcome(self, series=None) -> Outcome:
        return Outcome(list(self._checks.values()), series)


@dataclass(frozen=True)
class Scenario:
    id: str
    description: str
    topic: str
    anchors: tuple[str, ...]
    defaults: dict
    run: Callable = field(repr=False)
    has_series: bool = False


REGISTRY: dict[str, Scenario] = {}


def scenario(id: str, description: str, topic: str, anchors: tuple[str, ...], has_series: bool = False, **defaults):
    if topic not in TOPICS:
        raise ValueError(f"unknown topic {topic!r}")

    def register(fn):
        if id in REGISTRY:
            raise ValueError(f"duplicate scenario id {id!r}")
        REGISTRY[id] = Scenario(id, description, topic, anchors, defaults, fn, has_series)
        return fn

    return register


def _floats(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(v) for v in str(value).split(",") if v.strip()]


def _ints(value) -> list[int]:
    return [int(v) for v in _floats(value)]


# --------------------------------------------------------------------------
# square-root calculus


@scenario(
    "hilbert-axioms",
    "Inner-product axioms on random atomic states (sesquilinearity, symmetry, Cauchy-Schwarz, parallelogram)",
    "square-root calculus",
    ("sum and scalar multiple of complex measures", "inner product", "Hilbert space of complex measures"),
    triples=2000,
    dimension=2,
    max_atoms=6,
    tolerance=1e-10,
)
def _hilbert_axioms(p, rng):
    rec = Recorder()
    tol = p["tolerance"]
    for _ in range(p["triples"]):
        a, b, c = (random_atomic(rng, p["dimension"], p["max_atoms"]) for _ in range(3))
        z = complex(random_complex(rng)[0])
        ab = atomic.inner(a, b)
        rec.add("additivity", atomic.inner(a + b, c), atomic.inner(a, c) + atomic.inner(b, c), tol)
        rec.add("homogeneity", atomic.inner(z * a, b), z * ab, tol)
        rec.add("conjugate-homogeneity", atomic.inner(a, z * b), np.conj(z) * ab, tol)
        rec.add("conjugate-symmetry", ab, np.conj(atomic.inner(b, a)), tol)
        na, nb = atomic.norm(a), atomic.norm(b)
        rec.add("cauchy-schwarz", abs(ab), na * nb, tol, residual=max(0.0, abs(ab) - na * nb))
        lhs = atomic.norm(a + b) ** 2 + atomic.norm(a - b) ** 2
        rec.add("parallelogram", lhs, 2 * na**2 + 2 * nb**2, tol)
        aa = atomic.inner(a, a)
        rec.add("positivity", aa.real, na**2, tol, residual=abs(aa.imag) + max(0.0, -aa.real))
        rec.add("additive-inverse", atomic.norm(a + (-1) * a), 0.0, tol)
    return rec.outcome()


@scenario(
    "eta-zeta-roundtrip",
    "The squaring map z|z| and its inverse undo each other",
    "square-root calculus",
    ("squaring map and its inverse",),
    samples=1_000_000,
    tolerance=1e-12,
)
def _eta_zeta(p, rng):
    rec = Recorder()
    z = random_complex(rng, p["samples"])
    r1 = float(np.max(np.abs(zeta(eta(z)) - z)))
    r2 = float(np.max(np.abs(eta(zeta(z)) - z)))
    rec.add("zeta-after-eta", r1, 0.0, p["tolerance"], residual=r1)
    rec.add("eta-after-zeta", r2, 0.0, p["tolerance"], residual=r2)
    rec.add("eta(3+4i)", complex(eta(3 + 4j)), 15 + 20j, p["tolerance"])
    rec.add("zeta(0)", complex(zeta(0)), 0j, 0.0)
    return rec.outcome()


@scenario(
    "representation-independence",
    "Operations do not depend on the dominating base used to represent a measure",
    "square-root calculus",
    ("sum and scalar multiple of complex measures", "common dominating measure"),
    trials=500,
    tolerance=1e-12,
)
def _representation(p, rng):
    rec = Recorder()
    tol = p["tolerance"]
    for _ in range(p["trials"]):
        a, b = random_atomic(rng), random_atomic(rng)
        extra = random_atomic(rng, max_atoms=8)
        nu, _, _ = atomic.refine(atomic.add(a, b), extra)
        big = atomic.BaseMeasure(nu.points, rng.uniform(0.2, 3.0, size=len(nu)))
        ra, rb = atomic.rebase(a, big), atomic.rebase(b, big)
        rec.add("inner", atomic.inner(ra, rb), atomic.inner(a, b), tol)
        diff_sum = atomic.norm(atomic.sub(atomic.add(ra, rb), atomic.add(a, b)))
        rec.add("sum", diff_sum, 0.0, tol)
        rec.add("measure-values", 0.0, 0.0, 0.0, residual=0.0 if atomic.allclose(ra, a, tol) else 1.0)
        rec.add("total-variation", atomic.total_variation(ra), atomic.total_variation(a), tol)
    return rec.outcome()


@scenario(
    "cauchy-completeness",
    "An explicit Cauchy sequence of atomic states converges to its atomic limit",
    "square-root calculus",
    ("Hilbert space of complex measures",),
    terms=40,
    tolerance=1e-12,
)
def _cauchy(p, rng):
    rec = Recorder()
    n = p["terms"]
    amps = random_complex(rng, n) * 2.0 ** -np.arange(1, n + 1)
    pts = np.arange(n, dtype=float).reshape(-1, 1)

    def partial(m):
        return atomic.AtomicState(atomic.BaseMeasure(pts[:m], np.ones(m)), amps[:m])

    limit = partial(n)
    for m in range(1, n):
        bound = math.sqrt(math.fsum(np.abs(amps[m:]) ** 2))
        rec.add("distance-to-limit", atomic.norm(atomic.sub(partial(m), limit)), bound, p["tolerance"])
    return rec.outcome()


# --------------------------------------------------------------------------
# products


@scenario(
    "product-factorization",
    "Product measures: norms multiply, inner products and inner-product measures factorize, associativity",
    "product measures",
    ("product complex measure", "associativity of products", "factorization of inner products"),
    quadruples=500,
    tolerance=1e-12,
)
def _products(p, rng):
    rec = Recorder()
    tol = p["tolerance"]
    for _ in range(p["quadruples"]):
        u1, v1 = random_atomic(rng, 1), random_atomic(rng, 1)
        u2, v2 = random_atomic(rng, 2, 4), random_atomic(rng, 2, 4)
        lhs, rhs = product_inner_factorization_check(u1, v1, u2, v2)
        rec.add("inner-factorization", lhs, rhs, tol)
        rec.add("norm-multiplicativity", atomic.norm(product(u1, u2)), atomic.norm(u1) * atomic.norm(u2), tol)
        u3 = random_atomic(rng, 1, 3)
        left, right = product(product(u1, u2), u3), product(u1, product(u2, u3))
        rec.add("associativity", atomic.norm(atomic.sub(left, right)), 0.0, tol)
        pts, vals = atomic.inner_measure(product(u1, u2), product(v1, v2))
        p1, m1 = atomic.inner_measure(u1, v1)
        p2, m2 = atomic.inner_measure(u2, v2)
        expected = {tuple(a) + tuple(b): x * y for a, x in zip(p1.tolist(), m1) for b, y in zip(p2.tolist(), m2)}
        worst = max((abs(v - expected.get(tuple(q), 0.0)) for q, v in zip(pts.tolist(), vals)), default=0.0)
        rec.add("inner-measure-factorization", worst, 0.0, tol)
    return rec.outcome()


# --------------------------------------------------------------------------
# translation group and generators


def _grid(p, dim=None, points=None, length=None):
    d = p.get("dimension", 1) if dim is None else dim
    return Grid.cube(d, p.get("length", 2 * math.pi) if length is None else length, p.get("points", 64) if points is None else points)


@scenario(
    "translation-unitarity",
    "Translations preserve inner products and compose additively",
    "translation group",
    ("translation of a measure", "unitarity of translations", "translation group law"),
    trials=100,
    points=64,
    length=2 * math.pi,
    bandwidth=8,
    tolerance=1e-12,
)
def _translation(p, rng):
    rec = Recorder()
    tol = p["tolerance"]
    g = Grid.cube(2, p["length"], p["points"])
    h = g.spacing[0]
    for _ in range(p["trials"]):
        u = tensor(random_bandlimited(rng, g, p["bandwidth"]), build_family(BinaryAddress((0, 1))))
        # same tail as u half of the time so the inner products are not all zero
        v_addr = (0, 1) if rng.integers(0, 2) else (1, 1)
        v = tensor(random_bandlimited(rng, g, p["bandwidth"]), build_family(BinaryAddress(v_addr)))
        steps = rng.integers(-20, 21, size=2)
        a = ShiftVector.of({1: steps[0] * h, 2: steps[1] * h, 3: float(rng.integers(-3, 4))})
        b = ShiftVector.of({1: float(rng.integers(-9, 10)) * h, 4: 4.0 * float(rng.integers(-2, 3))})
        ta, tv = translate(a, u), translate(a, v)
        rec.add("lattice-norm", ta.norm(), u.norm(), 0.0)
        rec.add("lattice-inner", cylinder_inner(ta, tv), cylinder_inner(u, v), 0.0)
        back = translate(-a, ta)
        rec.add("lattice-inverse", grid_norm(back.head - u.head), 0.0, 0.0)
        ab = translate(a, translate(b, u))
        rec.add("lattice-group-law", cylinder_distance(ab, translate(a + b, u)), 0.0, 0.0)
        s = ShiftVector.of({1: float(rng.uniform(-1, 1)), 2: float(rng.uniform(-1, 1))})
        su, sv = translate(s, u), translate(s, v)
        rec.add("spectral-norm", su.norm(), u.norm(), tol)
        rec.add("spectral-inner", cylinder_inner(su, sv), cylinder_inner(u, v), tol)
        s2 = ShiftVector.of({1: float(rng.uniform(-1, 1))})
        rec.add("spectral-group-law", cylinder_distance(translate(s, translate(s2, u)), translate(s + s2, u)), 0.0, tol)
        au, av = random_atomic(rng), random_atomic(rng)
        shift = rng.normal(size=2)
        rec.add("atomic-inner", atomic.inner(translate_atomic(shift, au), translate_atomic(shift, av)), atomic.inner(au, av), tol)
    return rec.outcome()


@scenario(
    "generator-symmetry",
    "<i d_k u, v> = <u, i d_k v> on random band-limited heads and on tail factors",
    "translation group",
    ("coordinate derivative as translation generator", "self-adjointness of the generator"),
    pairs=200,
    dimensions="1,2,3",
    points="256,256,64",
    bandwidth=16,
    tolerance=1e-10,
)
def _symmetry(p, rng):
    rec = Recorder()
    tol = p["tolerance"]
    dims, points = _ints(p["dimensions"]), _ints(p["points"])
    if len(points) == 1:
        points = points * len(dims)
    if len(points) != len(dims):
        raise ValueError("give one grid size or one per dimension")
    for d, n in zip(dims, points):
        g = Grid.cube(d, 2 * math.pi, n)
        tail = build_family(BinaryAddress((0, 1)))
        for _ in range(p["pairs"]):
            u = tensor(random_bandlimited(rng, g, p["bandwidth"]), tail)
            v = tensor(random_bandlimited(rng, g, p["bandwidth"]), tail)
            for k in range(1, d + 3):
                lhs, rhs = symmetry_check(k, u, v)
                rec.add(f"N={d} axis={k}", lhs, rhs, tol)
    return rec.outcome()


def _dq_series(p, rng):
    levels = p["levels"]
    g = Grid.cube(1, 40.0, 256)
    head = g.sample(GaussianWave.normalized(1.0))
    u = tensor(head, build_family(BinaryAddress((1, 0, 1))))
    rows = []
    for k in range(1, 5):
        scale = 1.0 if k == 1 else float(k - 1) ** 2
        d = derivative(k, u)
        for i in range(levels + 1):
            h = p["h0"] * scale / 2**i
            rows.append((h, cylinder_distance(difference_quotient(k, h, u), -1 * d), f"x{k}"))
    return rows


@scenario(
    "difference-quotient-rate",
    "Difference quotients converge to the derivative at first order (head and tail coordinates)",
    "translation group",
    ("differentiability along a coordinate", "derivative of a product tail"),
    has_series=True,
    levels=6,
    h0=0.01,
    ratio_low=0.45,
    ratio_high=0.55,
)
def _dq(p, rng):
    rec = Recorder()
    rows = _dq_series(p, rng)
    by_label: dict[str, list[float]] = {}
    for _, r, label in rows:
        by_label.setdefault(label, []).append(r)
    mid, half = (p["ratio_low"] + p["ratio_high"]) / 2, (p["ratio_high"] - p["ratio_low"]) / 2
    for label, res in by_label.items():
        for i in range(1, len(res)):
            ratio = res[i] / res[i - 1]
            rec.add(f"{label} halving ratio", ratio, mid, half)
    return rec.outcome(series=rows)


@scenario(
    "strong-continuity",
    "||tau_{h e_k} u - u|| shrinks linearly for smooth states and jumps to sqrt(2)||u|| for disjoint shifts",
    "translation group",
    ("strong continuity along a coordinate",),
    levels=6,
    h0=0.05,
    tolerance=1e-10,
)
def _continuity(p, rng):
    rec = Recorder()
    g = Grid.cube(1, 40.0, 256)
    u = tensor(g.sample(GaussianWave.normalized(1.0)), build_family(BinaryAddress((0, 1))))
    hs = [p["h0"] / 2**i for i in range(p["levels"] + 1)]
    norms = strong_continuity_check(1, u, hs)
    d_norm = derivative(1, u).norm()
    for h, r in zip(hs, norms):
        # ||tau_h u - u|| <= h ||du|| with equality to first order
        rec.add("lipschitz-bound", r, h * d_norm, p["tolerance"], residual=max(0.0, r - h * d_norm))
    for i in range(1, len(norms)):
        rec.add("halving", norms[i] / norms[i - 1], 0.5, 0.05)
    flat = CylinderState(g.sample(lambda x: np.full_like(x, 1 / math.sqrt(40.0))), u.tail)
    rec.add("constant-head", max(strong_continuity_check(1, flat, hs)), 0.0, 0.0)
    # coordinate 3 is tail factor 2 with L_2 = 2: one offset step is L^2 = 4
    jump = strong_continuity_check(3, u, [4.0])[0]
    rec.add("disjoint-jump", jump, math.sqrt(2) * u.norm(), p["tolerance"])
    return rec.outcome()


@scenario(
    "tail-factor-derivative",
    "Derivative along a tail coordinate replaces that factor by its derivative, other factors untouched",
    "orthonormal family",
    ("derivative of a product tail",),
    depth=6,
    tolerance=1e-10,
)
def _tail_derivative(p, rng):
    rec = Recorder()
    u = build_family(BinaryAddress(tuple(int(b) for b in rng.integers(0, 2, size=p["depth"]))))
    for n in range(1, p["depth"] + 3):
        d = derivative(n, u)
        f = u.tail.factor(n)
        grid = f.reference_grid()
        x = grid.axis(0)
        # independent derivative: complex step on the closed-form bump
        y = x / f.scale**2 - f.offset
        expected = _bump_complex_step(y) / f.scale**3
        formula = CylinderState(u.head, u.tail.with_factor(n, SampledFactor(grid.sample(lambda _: expected))))
        rec.add(f"x{n} state", cylinder_distance(d, formula), 0.0, p["tolerance"])
        rec.add(f"x{n} norm^2", d.norm() ** 2, BUMP.deriv_norm_sq / f.scale**4, p["tolerance"])
        for j in range(1, p["depth"] + 3):
            if j != n:
                same = d.tail.factor(j) == u.tail.factor(j)
                rec.add("other factors untouched", float(same), 1.0, 0.0)
    return rec.outcome()


def _bump_complex_step(y, step=1e-30):
    y = np.asarray(y, dtype=float)
    inside = (y > 0) & (y < 1)
    z = np.where(inside, y, 0.5) + 1j * step
    val = np.exp(-1 / (z * (1 - z)))
    norm = math.sqrt(_bump_raw_norm_sq())
    return np.where(inside, val.imag / step, 0.0) / norm


def _bump_raw_norm_sq():
    from scipy.integrate import quad

    return quad(lambda y: math.exp(-2 / (y * (1 - y))), 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]


@scenario(
    "orthonormal-family",
    "The 2^depth family states with distinct address prefixes are orthonormal and lie in H1",
    "orthonormal family",
    ("uncountable orthonormal system", "orthogonality of product tails"),
    depth=6,
    tolerance=1e-10,
    remainder_terms=1000,
)
def _family(p, rng):
    rec = Recorder()
    addrs = BinaryAddress.all_prefixes(p["depth"])
    states = [build_family(a) for a in addrs]
    n = len(states)
    off = 0.0
    diag = 0.0
    for i in range(n):
        for j in range(n):
            g = cylinder_inner(states[i], states[j])
            if i == j:
                diag = max(diag, abs(g - 1))
            else:
                off = max(off, abs(g))
    rec.add(f"gram off-diagonal ({n}x{n})", off, 0.0, 0.0)
    rec.add(f"gram diagonal ({n}x{n})", 1.0 + diag, 1.0, p["tolerance"])
    u = states[int(rng.integers(0, n))]
    for k in range(1, p["depth"] + 1):
        rec.add(f"||d/dx_{k}||^2", derivative(k, u).norm() ** 2, BUMP.deriv_norm_sq / k**4, p["tolerance"])
    # partial sums of 1/n^4 plus the bound 1/(3 M^3) on the remainder certify the H1 sum
    m = p["remainder_terms"]
    partial = math.fsum(1 / k**4 for k in range(1, m + 1))
    bound = 1 / (3 * m**3)
    prof = h1_profile(u)
    total = prof.derivative_sum / BUMP.deriv_norm_sq
    rec.add("sum_k ||d_k u||^2 / ||f'||^2 in [S_M, S_M + 1/(3M^3)]", total, partial, bound,
            residual=0.0 if partial - 1e-12 <= total <= partial + bound + 1e-12 else abs(total - partial))
    return rec.outcome()


# --------------------------------------------------------------------------
# H1 form, resolvent, Laplacian


@scenario(
    "h1-form",
    "H1 norms of family states and Gaussian heads against partial sums and Plancherel",
    "H1 form and Laplacian",
    ("finite H1 norm", "H1 inner product"),
    sigma=1.0,
    tolerance=1e-8,
)
def _h1(p, rng):
    rec = Recorder()
    u = build_family(BinaryAddress((1, 0, 1)))
    partial = math.fsum(1 / k**4 for k in range(1, 200001))
    expected = 1 + BUMP.deriv_norm_sq * partial
    rec.add("family H1 norm^2", h1_profile(u).norm_sq, expected, 1e-10, residual=abs(h1_profile(u).norm_sq - expected) - BUMP.deriv_norm_sq / (3 * 200000**3))
    rec.add("family h1_inner(u,u)", h1_inner(u, u), h1_profile(u).norm_sq, 1e-10)
    sigma = p["sigma"]
    g = Grid.cube(1, 40 * sigma, 256)
    f = CylinderState.head_only(g.sample(GaussianWave.normalized(sigma)))
    # int |f'|^2 = 1/(2 sigma^2) for the unit Gaussian wave
    rec.add("gaussian H1 norm^2", h1_profile(f).norm_sq, 1 + 1 / (2 * sigma**2), p["tolerance"])
    g2 = Grid.cube(2, 40 * sigma, 128)
    f2 = CylinderState.head_only(g2.sample(lambda x, y: GaussianWave.normalized(sigma)(x) * GaussianWave.normalized(sigma)(y)))
    rec.add("2d gaussian H1 norm^2", h1_profile(f2).norm_sq, 1 + 2 / (2 * sigma**2), p["tolerance"])
    zero = CylinderState.head_only(g.sample(lambda x: 0 * x))
    rec.add("zero", h1_profile(zero).norm_sq, 0.0, 0.0)
    return rec.outcome()


@scenario(
    "resolvent",
    "(1-Delta)^-1 satisfies the weak H1 identity, the H1 bound, and matches the Laplace transform of the heat flow",
    "H1 form and Laplacian",
    ("elliptic equation", "resolvent bound and injectivity"),
    tests=20,
    points=128,
    bandwidth=12,
    weak_tolerance=1e-8,
    bound_tolerance=1e-10,
    laplace_tolerance=1e-6,
    quadrature_nodes=64,
)
def _resolvent(p, rng):
    rec = Recorder()
    g = Grid.cube(2, 2 * math.pi, p["points"])
    f = CylinderState.head_only(random_bandlimited(rng, g, p["bandwidth"]))
    u = resolvent(f)
    for _ in range(p["tests"]):
        phi = CylinderState.head_only(random_bandlimited(rng, g, p["bandwidth"]))
        rec.add("weak identity", h1_inner(u, phi), cylinder_inner(f, phi), p["weak_tolerance"])
    h1 = math.sqrt(h1_inner(u, u).real)
    rec.add("H1 bound", h1, f.norm(), p["bound_tolerance"], residual=max(0.0, h1 - f.norm()))
    gauss = CylinderState.head_only(Grid.cube(1, 40.0, 512).sample(GaussianWave.normalized(1.0)))
    oracle = laplace_resolvent_oracle(gauss, p["quadrature_nodes"])
    rec.add("laplace quadrature (gaussian)", cylinder_distance(resolvent(gauss), oracle), 0.0, p["laplace_tolerance"])
    oracle_f = laplace_resolvent_oracle(f, p["quadrature_nodes"])
    rec.add("laplace quadrature (random)", cylinder_distance(u, oracle_f), 0.0, p["laplace_tolerance"])
    back = laplacian(u)
    rec.add("(1-Delta) resolvent = id", cylinder_distance(u - back, f), 0.0, p["weak_tolerance"])
    for _ in range(5):
        h = CylinderState.head_only(random_bandlimited(rng, g, p["bandwidth"]))
        r = resolvent(h).norm()
        # ||(1-Delta)^-1 h|| >= ||h|| / (1 + max |xi|^2) rules out a nontrivial kernel
        floor = h.norm() / (1 + float(g.xi_squared().max()))
        rec.add("injectivity", r, floor, 0.0, residual=max(0.0, floor - r))
    return rec.outcome()


@scenario(
    "laplacian-form",
    "<-Delta u, u> equals the sum of squared derivative norms and is non-negative",
    "H1 form and Laplacian",
    ("Laplacian through the resolvent", "non-negative self-adjoint Laplacian"),
    trials=50,
    points=64,
    bandwidth=8,
    tolerance=1e-10,
)
def _laplacian_form(p, rng):
    rec = Recorder()
    for d in (1, 2, 3):
        g = Grid.cube(d, 2 * math.pi, p["points"] if d < 3 else 32)
        for _ in range(p["trials"]):
            u = CylinderState.head_only(random_bandlimited(rng, g, min(p["bandwidth"], 6)))
            v = CylinderState.head_only(random_bandlimited(rng, g, min(p["bandwidth"], 6)))
            lhs = cylinder_inner(-1 * laplacian(u), u)
            rhs = math.fsum(derivative(k, u).norm() ** 2 for k in range(1, d + 1))
            rec.add(f"form identity N={d}", lhs, rhs, p["tolerance"])
            rec.add("non-negativity", lhs.real, 0.0, 1e-12, residual=max(0.0, -lhs.real))
            rec.add("symmetry", cylinder_inner(laplacian(u), v), cylinder_inner(u, laplacian(v)), p["tolerance"])
            rec.add("resolvent(u - Delta u) = u", cylinder_distance(resolvent(u - laplacian(u)), u), 0.0, 1e-8)
    return rec.outcome()


# --------------------------------------------------------------------------
# semigroups and the head/tail factorization


def _gram_family(rng, grid: Grid, size: int, bandwidth: int):
    return [random_bandlimited(rng, grid, bandwidth) for _ in range(size)]


def _factorization(p, rng, mode):
    rec = Recorder()
    tol = p["tolerance"]
    g = Grid.cube(1, 2 * math.pi, p["points"])
    absorb_grid = Grid((2.0,), (p["points"],), (0.5,))
    heads = _gram_family(rng, g, p["family"], p["bandwidth"])
    u0 = build_family(BinaryAddress((0, 1, 1)))
    for t in _floats(p["times"]):
        rep = factorization_check(t, heads[0], u0, mode, family=heads, absorb_grid=absorb_grid)
        if mode == SCHRODINGER:
            rec.add(f"gram t={t}", rep["gram"], 0.0, tol)
        else:
            rec.add(f"gram proportionality t={t}", rep["gram"], 0.0, tol)
            rec.add(f"tail contraction in (0,1] t={t}", rep["tail_contraction_sq"], 1.0, 0.0,
                    residual=0.0 if 0 < rep["tail_contraction_sq"] <= 1 + 1e-12 else 1.0)
        rec.add(f"tensor t={t}", rep["tensor"], 0.0, 1e-12)
        g2 = Grid.cube(2, 2 * math.pi, 64)
        f2 = random_bandlimited(rng, g2, 6)
        rep2 = factorization_check(t, f2, u0, mode, split=1)
        rec.add(f"head split t={t}", rep2["split"], 0.0, 1e-10)
        g1 = random_bandlimited(rng, Grid.cube(1, 2 * math.pi, 64), 6)
        g1b = random_bandlimited(rng, Grid.cube(1, 2 * math.pi, 64), 6)
        prod = tensor(g1, CylinderState.head_only(g1b)).head
        joint = evolve_head(prod, t, mode)
        sep = tensor(evolve_head(g1, t, mode), CylinderState.head_only(evolve_head(g1b, t, mode))).head
        rec.add(f"product head t={t}", grid_norm(joint - sep), 0.0, 1e-10)
        fam = [CylinderState(h, u0.tail.restarted(2)) for h in heads]
        ev = [(evolve_schrodinger if mode == SCHRODINGER else evolve_heat)(t, s) for s in fam]
        if mode == SCHRODINGER:
            m = np.array([[cylinder_inner(a, b) for b in ev] for a in ev])
            pred = np.array([[grid_inner(evolve_head(a, t, mode), evolve_head(b, t, mode)) for b in heads] for a in heads])
            rec.add(f"symbolic-tail gram t={t}", float(np.max(np.abs(m - pred))), 0.0, tol)
    steps = [1e-5 / 2**i for i in range(5)]
    rep = factorization_check(0.0, heads[0], u0, mode, taylor_steps=steps)
    for i in range(1, len(steps)):
        rec.add("taylor rate", rep["taylor"][i] / rep["taylor"][i - 1], 0.5, 0.05)
    if mode == HEAT:
        gw = Grid.cube(1, 40.0, p["points"])
        f = gw.sample(GaussianWave.normalized(p["sigma"]))
        x = gw.axis(0)
        for t in _floats(p["times"]):
            ev = evolve_head(f, t, HEAT)
            oracle = gw.sample(heat_1d_oracle(p["sigma"], t))
            rec.add(f"gaussian closed form t={t}", grid_norm(ev - oracle), 0.0, 1e-8)
            a = ev.amp.real
            variance = math.fsum(x**2 * a) / math.fsum(a)
            rec.add(f"gaussian variance t={t}", variance, p["sigma"] ** 2 + 2 * t, 1e-8)
            rec.add(f"norm < 1 t={t}", ev.norm(), 1.0, 0.0, residual=0.0 if ev.norm() < 1 else 1.0)
    return rec.outcome()


@scenario(
    "factorization-schrodinger",
    "Schrödinger flow factorizes over head and tail: family Gram equals the head-evolved Gram",
    "tensor embedding and semigroups",
    ("factorization of the Schrödinger group", "tensor embedding", "product rule in time"),
    family=8,
    times="0.1,0.5,1.0",
    points=512,
    bandwidth=24,
    tolerance=1e-6,
)
def _factorization_s(p, rng):
    return _factorization(p, rng, SCHRODINGER)


@scenario(
    "factorization-heat",
    "Heat flow factorizes over head and tail: family Gram proportional to the head-evolved Gram",
    "tensor embedding and semigroups",
    ("factorization of the heat semigroup", "tensor embedding"),
    family=8,
    times="0.1,0.5,1.0",
    points=512,
    bandwidth=24,
    sigma=1.0,
    tolerance=1e-6,
)
def _factorization_h(p, rng):
    return _factorization(p, rng, HEAT)


@scenario(
    "tensor-contractions",
    "Tensor embedding is bilinear and multiplicative in inner products; both contractions are its adjoints",
    "tensor embedding and semigroups",
    ("N-shift", "tensor embedding", "tensor contractions", "contraction bounds", "derivatives through contractions"),
    trials=50,
    points=32,
    bandwidth=6,
    tolerance=1e-10,
)
def _contractions(p, rng):
    rec = Recorder()
    tol = p["tolerance"]
    g1 = Grid.cube(1, 2 * math.pi, p["points"])
    g2 = Grid.cube(2, 2 * math.pi, p["points"])
    tails = [build_family(BinaryAddress(b)) for b in ((0, 1), (0, 0), (1, 1))]
    for _ in range(p["trials"]):
        f1, f2 = random_bandlimited(rng, g1, p["bandwidth"]), random_bandlimited(rng, g1, p["bandwidth"])
        u1 = tensor(random_bandlimited(rng, g1, p["bandwidth"]), tails[0])
        u2 = tensor(random_bandlimited(rng, g1, p["bandwidth"]), tails[int(rng.integers(0, 2))])
        lhs = cylinder_inner(tensor(f1, u1), tensor(f2, u2))
        rec.add("inner factorization", lhs, grid_inner(f1, f2) * cylinder_inner(u1, u2), tol)
        rec.add("norm multiplicativity", tensor(f1, u1).norm(), f1.norm() * u1.norm(), 1e-12)
        z = complex(random_complex(rng)[0])
        lin = cylinder_distance(tensor(f1 + z * f2, u1), tensor(f1, u1) + z * tensor(f2, u1))
        rec.add("bilinearity", lin, 0.0, tol)
        v = CylinderState(random_bandlimited(rng, g2, p["bandwidth"]), tails[0].tail.restarted(3))
        w = contract_head(f1, v)
        rec.add("head contraction adjoint", cylinder_inner(tensor(f1, u1), v), cylinder_inner(u1, w), tol)
        rec.add("head contraction bound", w.norm(), f1.norm() * v.norm(), tol, residual=max(0.0, w.norm() - f1.norm() * v.norm()))
        gt = contract_tail(u1, v, 1)
        rec.add("tail contraction adjoint", cylinder_inner(tensor(f2, u1), v), grid_inner(f2, gt), tol)
        rec.add("tail contraction bound", gt.norm(), u1.norm() * v.norm(), tol, residual=max(0.0, gt.norm() - u1.norm() * v.norm()))
        for k in (1, 2, 3):
            r = contraction_derivative_check(k, f1, v, u=u1)
            rec.add(f"head contraction derivative k={k}", r["head"], 0.0, tol)
            if "tail" in r:
                rec.add("tail contraction derivative k=1", r["tail"], 0.0, tol)
        unit = f1 / f1.norm()
        rec.add("unit contraction", cylinder_distance(contract_head(unit, tensor(unit, u1)), u1), 0.0, tol)
    return rec.outcome()


@scenario(
    "semigroup-laws",
    "Semigroup composition, heat contraction monotonicity, Schrödinger unitarity",
    "tensor embedding and semigroups",
    ("heat semigroup", "Schrödinger group"),
    trials=20,
    samples=50,
    points=128,
    bandwidth=16,
    tolerance=1e-12,
)
def _semigroup(p, rng):
    rec = Recorder()
    tol = p["tolerance"]
    g = Grid.cube(1, 2 * math.pi, p["points"])
    tail = build_family(BinaryAddress((1,))).tail.restarted(2)
    for _ in range(p["trials"]):
        u = CylinderState(random_bandlimited(rng, g, p["bandwidth"]), tail)
        t1, t2 = (float(x) for x in rng.uniform(0, 1, size=2))
        for mode, ev in ((HEAT, evolve_heat), (SCHRODINGER, evolve_schrodinger)):
            a = ev(t1, ev(t2, u))
            b = ev(t1 + t2, u)
            rec.add(f"{mode} composition", grid_norm(a.head - b.head), 0.0, tol)
            rec.add(f"{mode} symbolic tail composition", float(a.tail == b.tail or abs(a.tail.time - b.tail.time) < 1e-15), 1.0, 0.0)
        ts = np.linspace(0, 2, p["samples"])
        norms = [grid_norm(evolve_head(u.head, float(t), HEAT)) for t in ts]
        rise = max(0.0, max(np.diff(norms)))
        rec.add("heat monotone", rise, 0.0, tol)
        rec.add("heat contraction", norms[-1], norms[0], tol, residual=max(0.0, norms[-1] - norms[0]))
        sn = [evolve_schrodinger(float(t), u).norm() for t in ts]
        rec.add("schrodinger unitarity", max(abs(s - u.norm()) for s in sn), 0.0, tol)
    return rec.outcome()


@scenario(
    "heat-contraction",
    "Norm of exp(t Delta) u against t for a Gaussian head (series for plotting)",
    "tensor embedding and semigroups",
    ("heat semigroup",),
    has_series=True,
    samples=50,
    t_max=5.0,
    sigma=1.0,
    tolerance=1e-12,
)
def _heat_series(p, rng):
    rec = Recorder()
    g = Grid.cube(1, 40.0, 256)
    f = g.sample(GaussianWave.normalized(p["sigma"]))
    ts = np.linspace(0, p["t_max"], p["samples"])
    rows = [(float(t), grid_norm(evolve_head(f, float(t), HEAT)), "norm") for t in ts]
    rows += [(float(t), (p["sigma"] / math.sqrt(p["sigma"] ** 2 + 2 * t)) ** 0.5, "closed form") for t in ts]
    norms = [r[1] for r in rows if r[2] == "norm"]
    rec.add("monotone", max(0.0, max(np.diff(norms))), 0.0, p["tolerance"])
    exact = [r[1] for r in rows if r[2] == "closed form"]
    rec.add("closed form", max(abs(a - b) for a, b in zip(norms, exact)), 0.0, 1e-10)
    return rec.outcome(series=rows)


# --------------------------------------------------------------------------
# translation invariance of the Laplacian


@scenario(
    "laplacian-translation-invariance",
    "Delta commutes with lattice and spectral translations",
    "translation invariance",
    ("translation invariance of the Laplacian", "translations preserve the H1 form"),
    trials=100,
    points=64,
    bandwidth=8,
    tolerance=1e-10,
)
def _laplacian_translation(p, rng):
    rec = Recorder()
    tol = p["tolerance"]
    for i in range(p["trials"]):
        d = 1 + i % 2
        g = Grid.cube(d, 2 * math.pi, p["points"])
        u = CylinderState.head_only(random_bandlimited(rng, g, p["bandwidth"]))
        lattice = ShiftVector.of([float(k) * g.spacing[0] for k in rng.integers(-30, 31, size=d)])
        spectral = ShiftVector.of([float(x) for x in rng.uniform(-3, 3, size=d)])
        rec.add("lattice shift", translation_invariance_check(lattice, u), 0.0, tol)
        rec.add("spectral shift", translation_invariance_check(spectral, u), 0.0, tol)
        v = CylinderState.head_only(random_bandlimited(rng, g, p["bandwidth"]))
        rec.add("H1 form invariance", h1_inner(translate(spectral, u), translate(spectral, v)), h1_inner(u, v), tol)
    rec.add("zero shift", translation_invariance_check(ShiftVector(), u), 0.0, 0.0)
    return rec.outcome()
