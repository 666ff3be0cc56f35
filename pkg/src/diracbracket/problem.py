"""JSON problem files: schema, validation and assembly into a DiracSystem."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .dirac import DiracSystem, build_dirac_matrix, solve_D, symbolic_D
from .phase import ConstraintSet, EntryParseError, PhaseSpace, PoissonStructure, build_structure
from .poly import PolyExpr, PolyParseError

KNOWN_KEYS = {
    "name", "description", "variables", "poisson", "constraints", "D", "D_denominator",
    "hamiltonian", "seed", "points", "tolerances", "relaxed", "initial_state", "derived",
}


class ProblemError(ValueError):
    """Malformed problem file; ``location`` names the offending field."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass
class ProblemFile:
    variables: list
    poisson: dict
    constraints: list = field(default_factory=list)
    D: Optional[list] = None
    D_denominator: Optional[str] = None
    hamiltonian: Optional[str] = None
    seed: Optional[int] = None
    points: Optional[int] = None
    tolerances: dict = field(default_factory=dict)
    relaxed: bool = False
    initial_state: Optional[list] = None
    name: Optional[str] = None
    description: Optional[str] = None
    extra: dict = field(default_factory=dict)

    # parsed objects, filled by validate()
    space: Optional[PhaseSpace] = field(default=None, repr=False)
    J: Optional[PoissonStructure] = field(default=None, repr=False)
    cons: Optional[ConstraintSet] = field(default=None, repr=False)
    D_rows: Optional[tuple] = field(default=None, repr=False)
    D_den: Optional[PolyExpr] = field(default=None, repr=False)
    H: Optional[PolyExpr] = field(default=None, repr=False)

    @classmethod
    def from_dict(cls, data) -> "ProblemFile":
        if not isinstance(data, dict):
            raise ProblemError("<root>", "problem file must be a JSON object")
        unknown = set(data) - KNOWN_KEYS
        if unknown:
            raise ProblemError(sorted(unknown)[0], "unknown field")
        for key in ("variables", "poisson"):
            if key not in data:
                raise ProblemError(key, "required field missing")
        pf = cls(
            variables=data["variables"],
            poisson=data["poisson"],
            constraints=data.get("constraints", []),
            D=data.get("D"),
            D_denominator=data.get("D_denominator"),
            hamiltonian=data.get("hamiltonian"),
            seed=data.get("seed"),
            points=data.get("points"),
            tolerances=data.get("tolerances") or {},
            relaxed=bool(data.get("relaxed", False)),
            initial_state=data.get("initial_state"),
            name=data.get("name"),
            description=data.get("description"),
            extra={k: data[k] for k in ("derived",) if k in data},
        )
        pf.validate()
        return pf

    def validate(self) -> "ProblemFile":
        if not isinstance(self.variables, list) or not all(isinstance(v, str) for v in self.variables):
            raise ProblemError("variables", "must be a list of names")
        try:
            self.space = PhaseSpace(tuple(self.variables))
        except ValueError as exc:
            raise ProblemError("variables", str(exc)) from exc
        for v in self.variables:
            if not v.isidentifier():
                raise ProblemError("variables", f"{v!r} is not a valid identifier")
        if not isinstance(self.poisson, dict):
            raise ProblemError("poisson", "must map 'i,j' to polynomial strings")
        try:
            self.J = build_structure(self.space, {k: _str(v, f"poisson[{k!r}]")
                                                  for k, v in self.poisson.items()})
        except EntryParseError as exc:
            raise ProblemError(f"poisson[{exc.location!r}]", str(exc.cause)) from exc
        except ValueError as exc:
            if isinstance(exc, ProblemError):
                raise
            raise ProblemError("poisson", str(exc)) from exc
        if not isinstance(self.constraints, list):
            raise ProblemError("constraints", "must be a list of polynomial strings")
        try:
            self.cons = ConstraintSet.parse(self.space, [_str(c, f"constraints[{i}]")
                                                         for i, c in enumerate(self.constraints)])
        except EntryParseError as exc:
            raise ProblemError(f"constraints[{exc.location}]", str(exc.cause)) from exc
        M = self.cons.M
        if self.D is not None:
            if not isinstance(self.D, list) or len(self.D) != M or \
                    any(not isinstance(r, list) or len(r) != M for r in self.D):
                raise ProblemError("D", f"must be a {M}x{M} matrix of polynomial strings")
            rows = []
            for i, row in enumerate(self.D):
                out = []
                for j, x in enumerate(row):
                    out.append(self._parse(_str(x, f"D[{i}][{j}]"), f"D[{i}][{j}]"))
                rows.append(tuple(out))
            self.D_rows = tuple(rows)
        if self.D_denominator is not None:
            if self.D is None:
                raise ProblemError("D_denominator", "given without D")
            self.D_den = self._parse(_str(self.D_denominator, "D_denominator"), "D_denominator")
            if self.D_den.is_zero():
                raise ProblemError("D_denominator", "must not be zero")
        if self.hamiltonian is not None:
            self.H = self._parse(_str(self.hamiltonian, "hamiltonian"), "hamiltonian")
        if self.seed is not None and (not isinstance(self.seed, int) or isinstance(self.seed, bool)):
            raise ProblemError("seed", "must be an integer")
        if self.points is not None and (not isinstance(self.points, int) or self.points < 1):
            raise ProblemError("points", "must be a positive integer")
        if not isinstance(self.tolerances, dict) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0
                for v in self.tolerances.values()):
            raise ProblemError("tolerances", "must map names to nonnegative numbers")
        if self.initial_state is not None:
            if not isinstance(self.initial_state, list) or len(self.initial_state) != self.space.N \
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                               for x in self.initial_state):
                raise ProblemError("initial_state", f"must be a list of {self.space.N} numbers")
        return self

    def _parse(self, src: str, location: str) -> PolyExpr:
        try:
            return self.space.parse(src)
        except PolyParseError as exc:
            raise ProblemError(location, str(exc)) from exc

    def build_system(self) -> DiracSystem:
        """Assemble J*, verifying a supplied D unless the file is relaxed.

        Without D the pointwise pseudoinverse is used.
        """
        if self.D_rows is not None:
            if self.relaxed:
                D = symbolic_D(self.D_rows, "user_supplied", self.D_den)
            else:
                D = solve_D(self.J, self.cons, "verify_user", D_user=self.D_rows,
                            denominator=self.D_den)
            return build_dirac_matrix(self.J, self.cons, D, relaxed=self.relaxed)
        return build_dirac_matrix(self.J, self.cons, solve_D(self.J, self.cons))

    def to_dict(self) -> dict:
        out = {"variables": list(self.variables), "poisson": dict(self.poisson),
               "constraints": list(self.constraints)}
        for key in ("name", "description", "D", "D_denominator", "hamiltonian", "seed", "points",
                    "initial_state"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        if self.relaxed:
            out["relaxed"] = True
        out.update(self.extra)
        return out


def _str(x, location):
    if isinstance(x, bool):
        raise ProblemError(location, "expected a polynomial string")
    if isinstance(x, (int,)):
        return str(x)
    if not isinstance(x, str):
        raise ProblemError(location, "expected a polynomial string")
    return x


def load_problem(path) -> ProblemFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemError(str(path), f"cannot read file: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise ProblemError(str(path), "file is not valid UTF-8") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"line {exc.lineno} column {exc.colno}", f"invalid JSON: {exc.msg}") from exc
    return ProblemFile.from_dict(data)


def dump_problem(pf: ProblemFile, path) -> None:
    Path(path).write_text(json.dumps(pf.to_dict(), indent=2) + "\n", encoding="utf-8")


def problem_from_objects(J: PoissonStructure, cons: ConstraintSet, D=None, denominator=None,
                         **kwargs) -> ProblemFile:
    """Serialize in-memory objects into a (validated) problem file."""
    space = J.space
    data = {"variables": list(space.var_names), "poisson": J.upper_strings(),
            "constraints": [space.format(p) for p in cons.phis]}
    if D is not None:
        data["D"] = [[x if isinstance(x, str) else space.format(x) for x in row] for row in D]
    if denominator is not None:
        data["D_denominator"] = denominator if isinstance(denominator, str) else space.format(denominator)
    data.update({k: v for k, v in kwargs.items() if v is not None})
    return ProblemFile.from_dict(data)
