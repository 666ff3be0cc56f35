"""Named and randomly generated test systems.

The named fixtures are also shipped as JSON problem files under ``data/``;
:func:`write_bundled` regenerates them.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .linalg import exact_pinv, exact_rank
from .phase import ConstraintSet, PhaseSpace, PoissonStructure, build_structure
from .poly import PolyExpr
from .problem import ProblemFile, dump_problem, load_problem, problem_from_objects

DATA_DIR = Path(__file__).with_name("data")
BUNDLED = ("example1", "example1-constant-D", "counterexample", "firstclass", "dependent",
           "obstructed", "broken-jacobi")


@dataclass
class Fixture:
    name: str
    J: PoissonStructure
    cons: ConstraintSet
    D: Optional[tuple] = None  # symbolic numerator rows
    denominator: Optional[PolyExpr] = None
    relaxed: bool = False
    kind: str = ""

    def problem(self, **kwargs) -> ProblemFile:
        return problem_from_objects(self.J, self.cons, self.D, self.denominator,
                                    relaxed=self.relaxed or None, name=self.name, **kwargs)


def rigid_body_space(pairs: int = 1) -> PhaseSpace:
    names = ["z1", "z2", "z3"] + [f"w{i + 1}" for i in range(2 * pairs)]
    return PhaseSpace(tuple(names))


def lie_poisson_upper(scale=1, pairs: int = 1) -> dict:
    """so(3) block plus canonical pairs with {w_{2k-1}, w_{2k}} = -1, as in the 5x5 example."""
    s = Fraction(scale)
    upper = {"1,2": f"-({s})*z3", "1,3": f"({s})*z2", "2,3": f"-({s})*z1"}
    for k in range(pairs):
        a = 4 + 2 * k
        upper[f"{a},{a + 1}"] = "-1"
    return upper


CONSTANT_D = (("0", "0", "0"), ("0", "0", "1"), ("0", "-1", "0"))


def example1() -> Fixture:
    """so(3) + one canonical pair, Phi_k = z_k (k = 1..3).

    The constant D printed alongside this example does not satisfy the
    Casimir condition (C D C = z1 C); dividing it by z1 does.
    """
    space = rigid_body_space()
    J = build_structure(space, lie_poisson_upper())
    cons = ConstraintSet.parse(space, ["z1", "z2", "z3"])
    D = tuple(tuple(space.parse(x) for x in row) for row in CONSTANT_D)
    return Fixture("example1", J, cons, D, space.parse("z1"), kind="example1")


def example1_constant_D() -> Fixture:
    fx = example1()
    fx.name, fx.denominator = "example1-constant-D", None
    return fx


def counterexample(lam=2) -> Fixture:
    """J = diag(C, Jbar) constant, Q = (1, 0), D = C^{-1} (1 - lam)."""
    space = PhaseSpace(("z1", "z2", "w1", "w2"))
    J = build_structure(space, {"1,2": "1", "3,4": "1"})
    cons = ConstraintSet.parse(space, ["z1", "z2"])
    c = Fraction(1) - Fraction(lam)
    # C = [[0,1],[-1,0]] so C^{-1} = [[0,-1],[1,0]]
    D = ((PolyExpr.zero(4), PolyExpr.const(4, -c)), (PolyExpr.const(4, c), PolyExpr.zero(4)))
    return Fixture("counterexample", J, cons, D, None, relaxed=True, kind="counterexample")


def first_class() -> Fixture:
    """Rigid body plus a canonical pair; Phi = (|z|^2, w1, w2)."""
    space = rigid_body_space()
    J = build_structure(space, lie_poisson_upper())
    cons = ConstraintSet.parse(space, ["z1^2 + z2^2 + z3^2", "w1", "w2"])
    return Fixture("firstclass", J, cons, kind="firstclass")


def canonical4() -> tuple[PhaseSpace, PoissonStructure]:
    space = PhaseSpace(("q1", "p1", "q2", "p2"))
    return space, build_structure(space, {"1,2": "1", "3,4": "1"})


def dependent() -> Fixture:
    """Canonical (q1, p1, q2, p2) with Phi = (q1 p1, q1, p1): Phi_1 = Phi_2 Phi_3."""
    space, J = canonical4()
    return Fixture("dependent", J, ConstraintSet.parse(space, ["q1*p1", "q1", "p1"]),
                   kind="dependent")


def obstructed() -> Fixture:
    space, J = canonical4()
    return Fixture("obstructed", J, ConstraintSet.parse(space, ["q1", "p1", "q2"]),
                   kind="obstructed")


def broken_jacobi() -> Fixture:
    """3x3 structure J12 = z2, J13 = 0, J23 = z3; Jacobiator T_123 = -z3."""
    space = PhaseSpace(("z1", "z2", "z3"))
    J = build_structure(space, {"1,2": "z2", "2,3": "z3"})
    return Fixture("broken-jacobi", J, ConstraintSet(space, ()), kind="broken-jacobi")


def rigid_body() -> Fixture:
    space = PhaseSpace(("z1", "z2", "z3"))
    J = build_structure(space, {"1,2": "-z3", "1,3": "z2", "2,3": "-z1"})
    return Fixture("rigid-body", J, ConstraintSet(space, ()), kind="rigid-body")


NAMED = {
    "example1": example1,
    "example1-constant-D": example1_constant_D,
    "counterexample": counterexample,
    "firstclass": first_class,
    "dependent": dependent,
    "obstructed": obstructed,
    "broken-jacobi": broken_jacobi,
}


def bundled_path(name: str) -> Path:
    return DATA_DIR / f"{name}.json"


def load_bundled(name: str) -> ProblemFile:
    return load_problem(bundled_path(name))


def write_bundled(directory: Path = DATA_DIR) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    extras = {
        "example1": dict(hamiltonian="1/2*w1^2 + 1/2*w2^2", initial_state=[1, 2, 3, 1, 0]),
        "example1-constant-D": dict(hamiltonian="1/2*w1^2 + 1/2*w2^2", initial_state=[1, 2, 3, 1, 0]),
        "firstclass": dict(hamiltonian="1/2*z1^2 + z2^2 + 3/2*z3^2 + 1/2*w1^2 + 1/2*w2^2",
                           initial_state=[1, 0.5, -0.5, 0.3, 0.2]),
    }
    for name in BUNDLED:
        fx = NAMED[name]()
        dump_problem(fx.problem(**extras.get(name, {})), directory / f"{name}.json")


# -- random fixtures -------------------------------------------------------

def _random_poly(rng: random.Random, nvars: int, max_degree: int = 2, max_terms: int = 4) -> PolyExpr:
    terms = {}
    for _ in range(rng.randint(2, max_terms)):
        deg = rng.randint(1, max_degree)
        e = [0] * nvars
        for _ in range(deg):
            e[rng.randrange(nvars)] += 1
        terms[tuple(e)] = terms.get(tuple(e), 0) + rng.choice([-2, -1, 1, 2, Fraction(1, 2)])
    if rng.random() < 0.5:
        terms[(0,) * nvars] = rng.choice([-1, 1, Fraction(1, 2)])
    p = PolyExpr(nvars, terms)
    return p if p.degree() >= 1 else _random_poly(rng, nvars, max_degree, max_terms)


def random_fixture(seed: int) -> Fixture:
    """so(3) Lie-Poisson block plus canonical pairs with random degree <= 2 constraints.

    The family is picked so that the kernel condition holds generically:
    ``pair`` (two generic constraints, C invertible), ``casimir`` (a
    multiple of |z|^2 plus two generic constraints) or ``dependent`` (a
    third constraint linear in the first two).
    """
    rng = random.Random(seed)
    pairs = rng.choice([1, 1, 2])
    space = rigid_body_space(pairs)
    N = space.N
    scale = rng.choice([1, 2, -1, Fraction(1, 2)])
    J = build_structure(space, lie_poisson_upper(scale, pairs))
    kind = rng.choice(["pair", "casimir", "dependent"])
    p1, p2 = _random_poly(rng, N), _random_poly(rng, N)
    if kind == "pair":
        phis = (p1, p2)
    elif kind == "casimir":
        # the sphere |z| = r keeps the constraint surface nonempty
        r2 = rng.choice([1, 2, Fraction(1, 2)])
        cas = (space.parse("z1^2 + z2^2 + z3^2") - r2).scale(rng.choice([1, 2, -1]))
        phis = (cas, p1, p2)
    else:
        a, b = rng.choice([-2, -1, 1, 2]), rng.choice([-1, 1, 3])
        phis = (p1, p2, p1.scale(a) + p2.scale(b))
    return Fixture(f"random-{seed}", J, ConstraintSet(space, phis), kind=kind)


def random_symbolic_fixture(seed: int) -> Fixture:
    """Constant canonical structure with linear constraints and an exact polynomial D.

    One constraint is a linear combination of two others, so C is singular;
    D is the exact pseudoinverse of the constant C.
    """
    rng = random.Random(seed)
    while True:
        pairs = rng.choice([2, 3])
        N = 2 * pairs
        names = tuple(x for k in range(pairs) for x in (f"q{k + 1}", f"p{k + 1}"))
        space = PhaseSpace(names)
        upper = {}
        for k in range(pairs):
            upper[f"{2 * k + 1},{2 * k + 2}"] = str(rng.choice([1, 2, -1]))
        J = build_structure(space, upper)
        rows = [[rng.choice([-2, -1, 0, 0, 1, 2]) for _ in range(N)] for _ in range(2)]
        a, b = rng.choice([-1, 1, 2]), rng.choice([-2, 1])
        rows.append([a * x + b * y for x, y in zip(*rows)])
        if exact_rank(rows) != 2:
            continue
        phis = tuple(PolyExpr(N, {tuple(int(i == j) for i in range(N)): c
                                  for j, c in enumerate(r) if c})
                     + PolyExpr.const(N, rng.choice([0, 1, -1])) for r in rows)
        cons = ConstraintSet(space, phis)
        Jc = [[x.constant_value() for x in row] for row in J.entries]
        L = [[Fraction(x) for x in r] for r in rows]
        C = [[sum(L[n][i] * Jc[i][j] * L[m][j] for i in range(N) for j in range(N))
              for m in range(3)] for n in range(3)]
        if exact_rank(C) != 2:
            continue
        Dp = exact_pinv(C)
        D = tuple(tuple(PolyExpr.const(N, x) for x in row) for row in Dp)
        return Fixture(f"random-symbolic-{seed}", J, cons, D, kind="random-symbolic")


def admissible_fixture(index: int, n_points: int = 50, sample_seed: int = 0,
                       max_attempts: int = 100):
    """Draw random fixtures until the kernel condition holds at every sample point.

    A fixture whose constraint surface the sampler cannot reach is also
    redrawn, so the points always split evenly between on and off surface.

    Returns ``(fixture, system, samples, attempts)`` where ``system`` uses
    the pointwise pseudoinverse D and ``samples`` is the full point set
    the fixture was vetted on.
    """
    from .dirac import build_dirac_matrix, solve_D
    from .verify import check_kernel, sample_points

    for attempt in range(max_attempts):
        fx = random_fixture(1000 * index + attempt)
        sys_ = build_dirac_matrix(fx.J, fx.cons, solve_D(fx.J, fx.cons))
        samples = sample_points(sys_, n_points, sample_seed)
        if len(samples.points) < n_points or samples.on_surface.sum() < n_points // 2:
            continue
        if check_kernel(sys_, samples.points).passed:
            return fx, sys_, samples, attempt + 1
    raise RuntimeError(f"no admissible fixture for index {index} in {max_attempts} attempts")
